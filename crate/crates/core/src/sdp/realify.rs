//! Complex-to-real embedding of an [`SdpProblem`] into standard form
//!
//! ```text
//! minimize <C, X>  s.t.  <A_i, X> = b_i,  X = diag(X_1, ..., X_p) ⪰ 0
//! ```
//!
//! with every `n×n` Hermitian block replaced by its `2n×2n` real symmetric
//! embedding and every scalar (user variable or inequality slack) carried as
//! a `1×1` block. For Hermitian `A`, `X`: `Tr(AX) = ½ Tr(Ã X̃)`, so block
//! coefficients are embedded with a factor of one half.

use crate::error::Result;
use crate::linalg::{embed_hermitian, unembed, CMat, RMat};

use super::problem::{ObjectiveSense, Relation, SdpProblem, Term};

/// Symmetric coefficient matrix, stored sparse when it has few nonzeros.
#[derive(Clone, Debug)]
pub enum SymCoef {
    Dense(RMat),
    /// All nonzero entries, both triangles listed.
    Sparse {
        dim: usize,
        entries: Vec<(usize, usize, f64)>,
    },
}

impl SymCoef {
    pub fn from_dense(m: RMat) -> Self {
        let n = m.nrows();
        let nnz = m.iter().filter(|v| **v != 0.0).count();
        if nnz <= 2 * n {
            let mut entries = Vec::with_capacity(nnz);
            for j in 0..n {
                for i in 0..n {
                    let v = m[(i, j)];
                    if v != 0.0 {
                        entries.push((i, j, v));
                    }
                }
            }
            SymCoef::Sparse { dim: n, entries }
        } else {
            SymCoef::Dense(m)
        }
    }

    pub fn scalar(v: f64) -> Self {
        SymCoef::Sparse {
            dim: 1,
            entries: vec![(0, 0, v)],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SymCoef::Dense(m) => m.nrows(),
            SymCoef::Sparse { dim, .. } => *dim,
        }
    }

    /// `<A, X>`.
    pub fn dot(&self, x: &RMat) -> f64 {
        match self {
            SymCoef::Dense(m) => m.dot(x),
            SymCoef::Sparse { entries, .. } => entries.iter().map(|&(i, j, v)| v * x[(i, j)]).sum(),
        }
    }

    /// `target += alpha · A`.
    pub fn add_to(&self, target: &mut RMat, alpha: f64) {
        match self {
            SymCoef::Dense(m) => *target += m * alpha,
            SymCoef::Sparse { entries, .. } => {
                for &(i, j, v) in entries {
                    target[(i, j)] += alpha * v;
                }
            }
        }
    }

    /// `W A W` for symmetric `W`.
    pub fn sandwich(&self, w: &RMat) -> RMat {
        match self {
            SymCoef::Dense(m) => w * m * w,
            SymCoef::Sparse { dim, entries } => {
                let mut out = RMat::zeros(*dim, *dim);
                for &(k, l, v) in entries {
                    out.ger(v, &w.column(k), &w.column(l), 1.0);
                }
                out
            }
        }
    }

    pub fn fro_sq(&self) -> f64 {
        match self {
            SymCoef::Dense(m) => m.norm_squared(),
            SymCoef::Sparse { entries, .. } => entries.iter().map(|e| e.2 * e.2).sum(),
        }
    }

    pub fn scale(&mut self, f: f64) {
        match self {
            SymCoef::Dense(m) => *m *= f,
            SymCoef::Sparse { entries, .. } => entries.iter_mut().for_each(|e| e.2 *= f),
        }
    }

    pub fn to_dense(&self) -> RMat {
        let mut out = RMat::zeros(self.dim(), self.dim());
        self.add_to(&mut out, 1.0);
        out
    }
}

/// What a real block stands for in the original problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RealBlockKind {
    /// Embedding of complex block `index`.
    Embedded { index: usize },
    /// User scalar `index`.
    Scalar { index: usize },
    /// Slack of constraint `row` (`+s` for `<=`, `-s` for `>=`).
    Slack { row: usize },
}

#[derive(Clone, Debug)]
pub struct RealRow {
    pub terms: Vec<(usize, SymCoef)>,
    pub rhs: f64,
}

/// Standard-form real problem plus the map back to complex variables.
#[derive(Clone, Debug)]
pub struct RealifiedProblem {
    pub dims: Vec<usize>,
    pub kinds: Vec<RealBlockKind>,
    /// Minimization-form objective per real block.
    pub objective: Vec<Option<SymCoef>>,
    pub rows: Vec<RealRow>,
    pub(crate) complex_blocks: Vec<usize>,
    pub(crate) scalar_blocks: Vec<usize>,
    pub(crate) slack_of_row: Vec<Option<usize>>,
    /// Original objective = `objective_sign` × standard-form objective.
    pub(crate) objective_sign: f64,
}

/// Builds the real standard-form embedding of `problem`.
pub fn realify(problem: &SdpProblem) -> Result<RealifiedProblem> {
    problem.validate()?;
    let mut dims = Vec::new();
    let mut kinds = Vec::new();
    let mut complex_blocks = Vec::new();
    let mut scalar_blocks = Vec::new();
    for (b, spec) in problem.blocks.iter().enumerate() {
        complex_blocks.push(dims.len());
        dims.push(2 * spec.dim);
        kinds.push(RealBlockKind::Embedded { index: b });
    }
    for s in 0..problem.scalars.len() {
        scalar_blocks.push(dims.len());
        dims.push(1);
        kinds.push(RealBlockKind::Scalar { index: s });
    }

    let sign = match problem.sense {
        ObjectiveSense::Minimize => 1.0,
        ObjectiveSense::Maximize => -1.0,
    };
    let mut objective: Vec<Option<SymCoef>> = vec![None; dims.len()];
    for (b, coef) in problem.objective_blocks.iter().enumerate() {
        if let Some(c) = coef {
            objective[complex_blocks[b]] = Some(SymCoef::from_dense(embed_hermitian(c) * (0.5 * sign)));
        }
    }
    for (s, &c) in problem.objective_scalars.iter().enumerate() {
        if c != 0.0 {
            objective[scalar_blocks[s]] = Some(SymCoef::scalar(sign * c));
        }
    }

    let mut rows = Vec::with_capacity(problem.constraints.len());
    let mut slack_of_row = Vec::with_capacity(problem.constraints.len());
    for (r, con) in problem.constraints.iter().enumerate() {
        // Repeated references to the same variable are merged.
        let mut terms: Vec<(usize, SymCoef)> = Vec::new();
        let mut push = |idx: usize, coef: SymCoef| {
            if let Some(existing) = terms.iter_mut().find(|(i, _)| *i == idx) {
                let mut d = existing.1.to_dense();
                coef.add_to(&mut d, 1.0);
                existing.1 = SymCoef::from_dense(d);
            } else {
                terms.push((idx, coef));
            }
        };
        for t in &con.terms {
            match t {
                Term::Block(id, a) => push(complex_blocks[id.0], SymCoef::from_dense(embed_hermitian(a) * 0.5)),
                Term::Scalar(id, c) => push(scalar_blocks[id.0], SymCoef::scalar(*c)),
            }
        }
        let slack_sign = match con.relation {
            Relation::Eq => None,
            Relation::Le => Some(1.0),
            Relation::Ge => Some(-1.0),
        };
        if let Some(sg) = slack_sign {
            let idx = dims.len();
            dims.push(1);
            kinds.push(RealBlockKind::Slack { row: r });
            objective.push(None);
            terms.push((idx, SymCoef::scalar(sg)));
            slack_of_row.push(Some(idx));
        } else {
            slack_of_row.push(None);
        }
        rows.push(RealRow {
            terms,
            rhs: con.rhs,
        });
    }

    Ok(RealifiedProblem {
        dims,
        kinds,
        objective,
        rows,
        complex_blocks,
        scalar_blocks,
        slack_of_row,
        objective_sign: sign,
    })
}

impl RealifiedProblem {
    /// Embeds a complex-form point. Slacks are set to the value that makes
    /// each inequality row tight, clipped at zero.
    pub fn embed_point(&self, blocks: &[CMat], scalars: &[f64]) -> Vec<RMat> {
        let mut x: Vec<RMat> = self.dims.iter().map(|&d| RMat::zeros(d, d)).collect();
        for (b, &idx) in self.complex_blocks.iter().enumerate() {
            x[idx] = embed_hermitian(&blocks[b]);
        }
        for (s, &idx) in self.scalar_blocks.iter().enumerate() {
            x[idx][(0, 0)] = scalars[s];
        }
        for (r, slack) in self.slack_of_row.iter().enumerate() {
            if let Some(idx) = *slack {
                let row = &self.rows[r];
                let mut lhs = 0.0;
                let mut slack_coef = 0.0;
                for (b, coef) in &row.terms {
                    if *b == idx {
                        slack_coef = coef.dot(&RMat::from_element(1, 1, 1.0));
                    } else {
                        lhs += coef.dot(&x[*b]);
                    }
                }
                x[idx][(0, 0)] = ((row.rhs - lhs) / slack_coef).max(0.0);
            }
        }
        x
    }

    /// Maps real block values back to complex blocks and user scalars.
    pub fn back_map(&self, x: &[RMat]) -> (Vec<CMat>, Vec<f64>) {
        let blocks = self.complex_blocks.iter().map(|&i| unembed(&x[i])).collect();
        let scalars = self.scalar_blocks.iter().map(|&i| x[i][(0, 0)]).collect();
        (blocks, scalars)
    }

    /// Objective in the original sense.
    pub fn objective_value(&self, x: &[RMat]) -> f64 {
        self.objective_sign * self.standard_objective(x)
    }

    pub(crate) fn standard_objective(&self, x: &[RMat]) -> f64 {
        self.objective
            .iter()
            .zip(x)
            .filter_map(|(c, xb)| c.as_ref().map(|c| c.dot(xb)))
            .sum()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// `<A_i, X>` for every row.
    pub fn apply(&self, x: &[RMat]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.terms.iter().map(|(b, c)| c.dot(&x[*b])).sum())
            .collect()
    }
}
