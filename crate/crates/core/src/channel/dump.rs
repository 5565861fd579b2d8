//! `CHSET v1` text format for freezing channel realizations.
//!
//! ```text
//! CHSET v1
//! dims <M> <N> <K> <T>
//! H_br
//! <N rows of M re/im pairs>
//! h_bu <k>      followed by one row of M pairs   (K times)
//! h_ru <k>      followed by one row of N pairs   (K times)
//! g_bt <m>      followed by one row of M pairs   (T times)
//! g_rt <m>      followed by one row of N pairs   (T times)
//! end
//! ```

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{IsacError, Result};
use crate::linalg::{CMat, CVec};

use super::ChannelSet;

pub const CHSET_HEADER: &str = "CHSET v1";

fn row<'a>(it: impl Iterator<Item = &'a Complex64>) -> String {
    it.map(|z| format!("{:e} {:e}", z.re, z.im)).collect::<Vec<_>>().join(" ")
}

pub fn to_string(ch: &ChannelSet) -> String {
    let mut out = String::new();
    writeln!(out, "{CHSET_HEADER}").unwrap();
    writeln!(out, "dims {} {} {} {}", ch.antennas(), ch.ris_elements(), ch.users(), ch.targets()).unwrap();
    writeln!(out, "H_br").unwrap();
    for i in 0..ch.h_br.nrows() {
        writeln!(out, "{}", row(ch.h_br.row(i).iter())).unwrap();
    }
    for (name, vs) in [("h_bu", &ch.h_bu), ("h_ru", &ch.h_ru), ("g_bt", &ch.g_bt), ("g_rt", &ch.g_rt)] {
        for (i, v) in vs.iter().enumerate() {
            writeln!(out, "{name} {i}").unwrap();
            writeln!(out, "{}", row(v.iter())).unwrap();
        }
    }
    out.push_str("end\n");
    out
}

pub fn write(ch: &ChannelSet, path: &Path) -> Result<()> {
    std::fs::write(path, to_string(ch)).map_err(|e| IsacError::io(path, e))
}

pub fn read(path: &Path) -> Result<ChannelSet> {
    let text = std::fs::read_to_string(path).map_err(|e| IsacError::io(path, e))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<ChannelSet> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let mut at = 0usize;
    let mut next = |expect: &str| -> Result<(usize, String)> {
        let (i, l) = lines.next().ok_or_else(|| IsacError::Parse {
            line: at + 1,
            message: format!("unexpected end of input, expected {expect}"),
        })?;
        at = i + 1;
        Ok((at, l.trim().to_string()))
    };
    let perr = |line: usize, message: String| IsacError::Parse { line, message };

    let (ln, head) = next("header")?;
    if head != CHSET_HEADER {
        return Err(perr(ln, format!("missing `{CHSET_HEADER}` header")));
    }
    let (ln, dims) = next("dims")?;
    let d: Vec<usize> = dims
        .strip_prefix("dims")
        .ok_or_else(|| perr(ln, "expected dims line".into()))?
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| perr(ln, format!("bad dimension `{t}`"))))
        .collect::<Result<_>>()?;
    let [m, n, k, t] = d[..] else {
        return Err(perr(ln, "dims needs four values".into()));
    };

    let parse_row = |ln: usize, l: &str, len: usize| -> Result<Vec<Complex64>> {
        let vals: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| perr(ln, format!("bad number `{t}`"))))
            .collect::<Result<_>>()?;
        if vals.len() != 2 * len {
            return Err(perr(ln, format!("expected {} values, found {}", 2 * len, vals.len())));
        }
        Ok(vals.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect())
    };

    let (ln, tagline) = next("H_br")?;
    if tagline != "H_br" {
        return Err(perr(ln, "expected H_br".into()));
    }
    let mut h_br = CMat::zeros(n, m);
    for i in 0..n {
        let (ln, l) = next("H_br row")?;
        for (j, z) in parse_row(ln, &l, m)?.into_iter().enumerate() {
            h_br[(i, j)] = z;
        }
    }
    let mut read_vecs = |name: &str, count: usize, len: usize| -> Result<Vec<CVec>> {
        (0..count)
            .map(|i| {
                let (ln, l) = next(name)?;
                if l != format!("{name} {i}") {
                    return Err(perr(ln, format!("expected `{name} {i}`")));
                }
                let (ln, l) = next("vector row")?;
                Ok(CVec::from_vec(parse_row(ln, &l, len)?))
            })
            .collect()
    };
    let h_bu = read_vecs("h_bu", k, m)?;
    let h_ru = read_vecs("h_ru", k, n)?;
    let g_bt = read_vecs("g_bt", t, m)?;
    let g_rt = read_vecs("g_rt", t, n)?;
    let (ln, end) = next("end")?;
    if end != "end" {
        return Err(perr(ln, "expected end".into()));
    }
    let ch = ChannelSet {
        h_br,
        h_bu,
        h_ru,
        g_bt,
        g_rt,
    };
    ch.validate()?;
    Ok(ch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{random_geometry, synthesize, FadingParams, PlacementArea};

    #[test]
    fn round_trip_is_bit_exact() {
        let g = random_geometry([0.0; 3], [10.0, -8.0, 5.0], &PlacementArea::default(), 2, 3, 4, 9, 8);
        let ch = synthesize(&g, &FadingParams::default(), 2).unwrap();
        let text = to_string(&ch);
        assert!(text.starts_with("CHSET v1\ndims 4 9 2 3\n"));
        assert_eq!(parse(&text).unwrap(), ch);
    }

    #[test]
    fn truncated_input_reports_line() {
        let g = random_geometry([0.0; 3], [10.0, -8.0, 5.0], &PlacementArea::default(), 1, 1, 2, 4, 8);
        let ch = synthesize(&g, &FadingParams::default(), 2).unwrap();
        let text = to_string(&ch);
        let cut: String = text.lines().take(4).map(|l| format!("{l}\n")).collect();
        assert!(matches!(parse(&cut), Err(IsacError::Parse { .. })));
    }
}
