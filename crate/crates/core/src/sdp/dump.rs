//! `SDPDUMP v1` text format for offline inspection of problem instances.
//!
//! ```text
//! SDPDUMP v1
//! sense maximize
//! block <name> <dim>            (one line per block)
//! scalar <name>                 (one line per scalar)
//! objective-block <index>       followed by <dim> rows of re/im pairs
//! objective-scalar <index> <c>
//! constraint <tag> <rel> <rhs> <terms>
//! term-block <index>            followed by <dim> rows of re/im pairs
//! term-scalar <index> <c>
//! end
//! ```
//!
//! Matrix rows are written row-major as `re im re im ...`. Floats use Rust's
//! shortest round-trip representation.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{IsacError, Result};
use crate::linalg::CMat;

use super::problem::{BlockId, Constraint, ObjectiveSense, Relation, ScalarId, SdpProblem, Term};

pub const SDPDUMP_HEADER: &str = "SDPDUMP v1";

fn sanitize(name: &str) -> String {
    let s: String = name.chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect();
    if s.is_empty() {
        "_".into()
    } else {
        s
    }
}

fn write_matrix(out: &mut String, m: &CMat) {
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("{:e} {:e}", m[(i, j)].re, m[(i, j)].im))
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
}

pub fn to_string(p: &SdpProblem) -> String {
    let mut out = String::new();
    out.push_str(SDPDUMP_HEADER);
    out.push('\n');
    let sense = match p.sense {
        ObjectiveSense::Maximize => "maximize",
        ObjectiveSense::Minimize => "minimize",
    };
    writeln!(out, "sense {sense}").unwrap();
    for b in &p.blocks {
        writeln!(out, "block {} {}", sanitize(&b.name), b.dim).unwrap();
    }
    for s in &p.scalars {
        writeln!(out, "scalar {}", sanitize(s)).unwrap();
    }
    for (i, c) in p.objective_blocks.iter().enumerate() {
        if let Some(c) = c {
            writeln!(out, "objective-block {i}").unwrap();
            write_matrix(&mut out, c);
        }
    }
    for (i, c) in p.objective_scalars.iter().enumerate() {
        if *c != 0.0 {
            writeln!(out, "objective-scalar {i} {c:e}").unwrap();
        }
    }
    for con in &p.constraints {
        writeln!(
            out,
            "constraint {} {} {:e} {}",
            sanitize(&con.tag),
            con.relation.symbol(),
            con.rhs,
            con.terms.len()
        )
        .unwrap();
        for t in &con.terms {
            match t {
                Term::Block(id, a) => {
                    writeln!(out, "term-block {}", id.0).unwrap();
                    write_matrix(&mut out, a);
                }
                Term::Scalar(id, c) => writeln!(out, "term-scalar {} {c:e}", id.0).unwrap(),
            }
        }
    }
    out.push_str("end\n");
    out
}

pub fn write(p: &SdpProblem, path: &Path) -> Result<()> {
    std::fs::write(path, to_string(p)).map_err(|e| IsacError::io(path, e))
}

pub fn read(path: &Path) -> Result<SdpProblem> {
    let text = std::fs::read_to_string(path).map_err(|e| IsacError::io(path, e))?;
    parse(&text)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<Vec<&'a str>> {
        loop {
            let (i, l) = self.inner.next().ok_or_else(|| IsacError::Parse {
                line: self.line + 1,
                message: "unexpected end of input".into(),
            })?;
            self.line = i + 1;
            let toks: Vec<&str> = l.split_whitespace().collect();
            if !toks.is_empty() {
                return Ok(toks);
            }
        }
    }

    fn err(&self, message: impl Into<String>) -> IsacError {
        IsacError::Parse {
            line: self.line,
            message: message.into(),
        }
    }

    fn num<T: std::str::FromStr>(&self, tok: Option<&&str>) -> Result<T> {
        tok.and_then(|t| t.parse().ok())
            .ok_or_else(|| self.err(format!("expected number, found {:?}", tok)))
    }

    fn matrix(&mut self, dim: usize) -> Result<CMat> {
        let mut m = CMat::zeros(dim, dim);
        for i in 0..dim {
            let toks = self.next()?;
            if toks.len() != 2 * dim {
                return Err(self.err(format!("expected {} values, found {}", 2 * dim, toks.len())));
            }
            for j in 0..dim {
                m[(i, j)] = Complex64::new(self.num(toks.get(2 * j))?, self.num(toks.get(2 * j + 1))?);
            }
        }
        Ok(m)
    }
}

pub fn parse(text: &str) -> Result<SdpProblem> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        line: 0,
    };
    let head = lines.next()?;
    if head.join(" ") != SDPDUMP_HEADER {
        return Err(lines.err(format!("missing `{SDPDUMP_HEADER}` header")));
    }
    let sense = match lines.next()?.as_slice() {
        ["sense", "maximize"] => ObjectiveSense::Maximize,
        ["sense", "minimize"] => ObjectiveSense::Minimize,
        other => return Err(lines.err(format!("bad sense line {other:?}"))),
    };
    let mut p = SdpProblem::new(sense);
    let mut pending: Option<Constraint> = None;
    let mut remaining = 0usize;
    loop {
        let toks = lines.next()?;
        match toks[0] {
            "block" if toks.len() == 3 => {
                let dim = lines.num(toks.get(2))?;
                p.add_block(toks[1], dim);
            }
            "scalar" if toks.len() == 2 => {
                p.add_scalar(toks[1]);
            }
            "objective-block" => {
                let i: usize = lines.num(toks.get(1))?;
                let dim = p.blocks.get(i).ok_or_else(|| lines.err("unknown block"))?.dim;
                let m = lines.matrix(dim)?;
                p.set_objective_block(BlockId(i), m);
            }
            "objective-scalar" => {
                let i: usize = lines.num(toks.get(1))?;
                if i >= p.scalars.len() {
                    return Err(lines.err("unknown scalar"));
                }
                p.set_objective_scalar(ScalarId(i), lines.num(toks.get(2))?);
            }
            "constraint" if toks.len() == 5 => {
                if remaining != 0 {
                    return Err(lines.err("previous constraint has missing terms"));
                }
                if let Some(c) = pending.take() {
                    p.add_constraint(c);
                }
                let rel = Relation::parse(toks[2]).ok_or_else(|| lines.err("bad relation"))?;
                let rhs: f64 = lines.num(toks.get(3))?;
                remaining = lines.num(toks.get(4))?;
                let mut c = Constraint::new(toks[1]);
                c.relation = rel;
                c.rhs = rhs;
                pending = Some(c);
            }
            "term-block" | "term-scalar" => {
                let Some(c) = pending.as_mut() else {
                    return Err(lines.err("term outside constraint"));
                };
                if remaining == 0 {
                    return Err(lines.err("too many terms"));
                }
                remaining -= 1;
                let i: usize = lines.num(toks.get(1))?;
                if toks[0] == "term-block" {
                    let dim = p.blocks.get(i).ok_or_else(|| lines.err("unknown block"))?.dim;
                    let m = lines.matrix(dim)?;
                    c.terms.push(Term::Block(BlockId(i), m));
                } else {
                    c.terms.push(Term::Scalar(ScalarId(i), lines.num(toks.get(2))?));
                }
            }
            "end" => {
                if remaining != 0 {
                    return Err(lines.err("constraint has missing terms"));
                }
                if let Some(c) = pending.take() {
                    p.add_constraint(c);
                }
                break;
            }
            other => return Err(lines.err(format!("unexpected token `{other}`"))),
        }
    }
    p.validate()?;
    Ok(p)
}
