use crate::error::{IsacError, Result};
use crate::linalg::{min_eigenvalue, CMat};

use super::problem::{Relation, SdpProblem};

/// Constraint-by-constraint audit of a candidate point.
#[derive(Clone, Debug)]
pub struct ResidualReport {
    /// Signed violation per constraint, positive when violated. Equalities
    /// report `|lhs - rhs|`.
    pub violations: Vec<f64>,
    /// `violation / (‖row‖_F + |rhs|)`.
    pub relative_violations: Vec<f64>,
    pub max_violation: f64,
    pub max_relative_violation: f64,
    pub block_min_eigenvalues: Vec<f64>,
    pub min_scalar: f64,
    pub objective: f64,
    /// Largest imaginary part of any `Tr(A X)`.
    pub max_imaginary_residue: f64,
}

pub fn check_residuals(problem: &SdpProblem, blocks: &[CMat], scalars: &[f64]) -> Result<ResidualReport> {
    if blocks.len() != problem.blocks.len() || scalars.len() != problem.scalars.len() {
        return Err(IsacError::validation(format!(
            "point has {} blocks / {} scalars, problem has {} / {}",
            blocks.len(),
            scalars.len(),
            problem.blocks.len(),
            problem.scalars.len()
        )));
    }
    for (x, spec) in blocks.iter().zip(&problem.blocks) {
        if x.nrows() != spec.dim || x.ncols() != spec.dim {
            return Err(IsacError::validation(format!(
                "block `{}` value is {}x{}, expected {}x{}",
                spec.name,
                x.nrows(),
                x.ncols(),
                spec.dim,
                spec.dim
            )));
        }
    }

    let mut violations = Vec::with_capacity(problem.constraints.len());
    let mut relative = Vec::with_capacity(problem.constraints.len());
    let mut max_imag = 0.0f64;
    for con in &problem.constraints {
        let (lhs, im) = con.evaluate(blocks, scalars);
        max_imag = max_imag.max(im.abs());
        let v = match con.relation {
            Relation::Eq => (lhs - con.rhs).abs(),
            Relation::Le => lhs - con.rhs,
            Relation::Ge => con.rhs - lhs,
        };
        let denom = con.coefficient_norm() + con.rhs.abs();
        violations.push(v);
        relative.push(if denom > 0.0 { v / denom } else { v });
    }
    let max_violation = violations.iter().fold(0.0f64, |a, &v| a.max(v));
    let max_relative_violation = relative.iter().fold(0.0f64, |a, &v| a.max(v));

    Ok(ResidualReport {
        violations,
        relative_violations: relative,
        max_violation,
        max_relative_violation,
        block_min_eigenvalues: blocks.iter().map(min_eigenvalue).collect(),
        min_scalar: scalars.iter().copied().fold(f64::INFINITY, f64::min),
        objective: problem.objective_value(blocks, scalars),
        max_imaginary_residue: max_imag,
    })
}
