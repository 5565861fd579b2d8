use num_complex::Complex64;

use crate::error::{IsacError, Result};
use crate::linalg::{hermitian_asymmetry, CMat};

/// Index of a Hermitian PSD matrix variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockId(pub usize);

/// Index of a nonnegative scalar variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScalarId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObjectiveSense {
    Maximize,
    Minimize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "<=" => Some(Relation::Le),
            "=" => Some(Relation::Eq),
            ">=" => Some(Relation::Ge),
            _ => None,
        }
    }
}

/// One summand of a linear functional: `Tr(A X_b)` or `c · s`.
#[derive(Clone, Debug)]
pub enum Term {
    Block(BlockId, CMat),
    Scalar(ScalarId, f64),
}

/// `Σ terms  (<= | = | >=)  rhs`.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub terms: Vec<Term>,
    pub rhs: f64,
    pub relation: Relation,
    pub tag: String,
}

impl Constraint {
    pub fn new(tag: impl Into<String>) -> Self {
        Constraint {
            terms: Vec::new(),
            rhs: 0.0,
            relation: Relation::Eq,
            tag: tag.into(),
        }
    }

    pub fn block(mut self, id: BlockId, coef: CMat) -> Self {
        self.terms.push(Term::Block(id, coef));
        self
    }

    pub fn scalar(mut self, id: ScalarId, coef: f64) -> Self {
        self.terms.push(Term::Scalar(id, coef));
        self
    }

    pub fn le(self, rhs: f64) -> Self {
        self.with(Relation::Le, rhs)
    }

    pub fn eq(self, rhs: f64) -> Self {
        self.with(Relation::Eq, rhs)
    }

    pub fn ge(self, rhs: f64) -> Self {
        self.with(Relation::Ge, rhs)
    }

    fn with(mut self, relation: Relation, rhs: f64) -> Self {
        self.relation = relation;
        self.rhs = rhs;
        self
    }

    /// Frobenius norm of the coefficient row over all terms.
    pub fn coefficient_norm(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| match t {
                Term::Block(_, a) => a.iter().map(|z| z.norm_sqr()).sum::<f64>(),
                Term::Scalar(_, c) => c * c,
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Evaluates the left-hand side. The second value is the imaginary
    /// residue of the trace terms, which is zero for Hermitian data.
    pub fn evaluate(&self, blocks: &[CMat], scalars: &[f64]) -> (f64, f64) {
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            match t {
                Term::Block(id, a) => acc += trace_product_complex(a, &blocks[id.0]),
                Term::Scalar(id, c) => acc += c * scalars[id.0],
            }
        }
        (acc.re, acc.im)
    }
}

fn trace_product_complex(a: &CMat, x: &CMat) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * x[(j, i)];
        }
    }
    acc
}

#[derive(Clone, Debug)]
pub struct BlockSpec {
    pub name: String,
    pub dim: usize,
}

/// A dense SDP over Hermitian PSD blocks and nonnegative scalars.
#[derive(Clone, Debug)]
pub struct SdpProblem {
    pub(crate) blocks: Vec<BlockSpec>,
    pub(crate) scalars: Vec<String>,
    pub(crate) objective_blocks: Vec<Option<CMat>>,
    pub(crate) objective_scalars: Vec<f64>,
    pub(crate) sense: ObjectiveSense,
    pub(crate) constraints: Vec<Constraint>,
}

impl SdpProblem {
    pub fn new(sense: ObjectiveSense) -> Self {
        SdpProblem {
            blocks: Vec::new(),
            scalars: Vec::new(),
            objective_blocks: Vec::new(),
            objective_scalars: Vec::new(),
            sense,
            constraints: Vec::new(),
        }
    }

    pub fn add_block(&mut self, name: impl Into<String>, dim: usize) -> BlockId {
        self.blocks.push(BlockSpec {
            name: name.into(),
            dim,
        });
        self.objective_blocks.push(None);
        BlockId(self.blocks.len() - 1)
    }

    pub fn add_scalar(&mut self, name: impl Into<String>) -> ScalarId {
        self.scalars.push(name.into());
        self.objective_scalars.push(0.0);
        ScalarId(self.scalars.len() - 1)
    }

    pub fn set_objective_block(&mut self, id: BlockId, coef: CMat) {
        self.objective_blocks[id.0] = Some(coef);
    }

    pub fn set_objective_scalar(&mut self, id: ScalarId, coef: f64) {
        self.objective_scalars[id.0] = coef;
    }

    pub fn add_constraint(&mut self, c: Constraint) {
        self.constraints.push(c);
    }

    pub fn blocks(&self) -> &[BlockSpec] {
        &self.blocks
    }

    pub fn scalars(&self) -> &[String] {
        &self.scalars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn sense(&self) -> ObjectiveSense {
        self.sense
    }

    pub fn objective_block(&self, id: BlockId) -> Option<&CMat> {
        self.objective_blocks[id.0].as_ref()
    }

    pub fn objective_scalar(&self, id: ScalarId) -> f64 {
        self.objective_scalars[id.0]
    }

    /// Multiplies every objective coefficient by `alpha`.
    pub fn scale_objective(&mut self, alpha: f64) {
        for m in self.objective_blocks.iter_mut().flatten() {
            *m *= Complex64::new(alpha, 0.0);
        }
        for c in &mut self.objective_scalars {
            *c *= alpha;
        }
    }

    /// Objective value at a candidate point.
    pub fn objective_value(&self, blocks: &[CMat], scalars: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (b, coef) in self.objective_blocks.iter().enumerate() {
            if let Some(c) = coef {
                acc += trace_product_complex(c, &blocks[b]).re;
            }
        }
        acc + self
            .objective_scalars
            .iter()
            .zip(scalars)
            .map(|(c, s)| c * s)
            .sum::<f64>()
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() && self.scalars.is_empty() {
            return Err(IsacError::validation("problem has no variables"));
        }
        for (b, spec) in self.blocks.iter().enumerate() {
            if spec.dim == 0 {
                return Err(IsacError::validation(format!("block `{}` has dimension 0", spec.name)));
            }
            if let Some(c) = &self.objective_blocks[b] {
                self.check_coef(BlockId(b), c, "objective")?;
            }
        }
        for c in &self.objective_scalars {
            if !c.is_finite() {
                return Err(IsacError::validation("non-finite objective coefficient"));
            }
        }
        for con in &self.constraints {
            if !con.rhs.is_finite() {
                return Err(IsacError::validation(format!("constraint `{}`: non-finite rhs", con.tag)));
            }
            for t in &con.terms {
                match t {
                    Term::Block(id, a) => self.check_coef(*id, a, &con.tag)?,
                    Term::Scalar(id, c) => {
                        if id.0 >= self.scalars.len() {
                            return Err(IsacError::validation(format!(
                                "constraint `{}` references undeclared scalar {}",
                                con.tag, id.0
                            )));
                        }
                        if !c.is_finite() {
                            return Err(IsacError::validation(format!(
                                "constraint `{}`: non-finite coefficient",
                                con.tag
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn check_coef(&self, id: BlockId, a: &CMat, ctx: &str) -> Result<()> {
        let spec = self.blocks.get(id.0).ok_or_else(|| {
            IsacError::validation(format!("`{ctx}` references undeclared block {}", id.0))
        })?;
        if a.nrows() != spec.dim || a.ncols() != spec.dim {
            return Err(IsacError::validation(format!(
                "`{ctx}`: coefficient is {}x{} but block `{}` is {}x{}",
                a.nrows(),
                a.ncols(),
                spec.name,
                spec.dim,
                spec.dim
            )));
        }
        if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(IsacError::validation(format!("`{ctx}`: non-finite coefficient")));
        }
        let scale = a.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
        let asym = hermitian_asymmetry(a);
        if asym > 1e-12 * scale {
            return Err(IsacError::validation(format!(
                "`{ctx}`: coefficient for block `{}` is not Hermitian (asymmetry {asym:e})",
                spec.name
            )));
        }
        Ok(())
    }
}
