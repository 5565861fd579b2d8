//! Infeasible-start primal-dual path-following method with Nesterov–Todd
//! scaling and a Mehrotra predictor-corrector, operating on the realified
//! standard form.
//!
//! Per iteration the search direction solves
//!
//! ```text
//! A(ΔX) = r_p,   Aᵀ(Δy) + ΔZ = R_d,   ΔX + W ΔZ W = R_c
//! ```
//!
//! where `W` is the NT scaling point (`W Z W = X`). Eliminating `ΔX`, `ΔZ`
//! leaves the Schur system `M Δy = r_p − A(R_c − W R_d W)` with
//! `M_ij = <A_i, W A_j W>`.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::linalg::{CMat, RMat};

use super::problem::SdpProblem;
use super::realify::{realify, RealBlockKind, RealRow, RealifiedProblem, SymCoef};
use super::residual::check_residuals;

#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Relative duality-gap target.
    pub gap_tolerance: f64,
    /// Relative primal/dual residual target.
    pub feasibility_tolerance: f64,
    pub max_iterations: usize,
    /// Fraction-to-boundary factor.
    pub step_fraction: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            gap_tolerance: 1e-7,
            feasibility_tolerance: 1e-7,
            max_iterations: 100,
            step_fraction: 0.99,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    MaxIterations,
    NumericalFailure,
}

impl std::fmt::Display for SdpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SdpStatus::Optimal => "optimal",
            SdpStatus::Infeasible => "infeasible",
            SdpStatus::MaxIterations => "max-iterations",
            SdpStatus::NumericalFailure => "numerical-failure",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub blocks: Vec<CMat>,
    pub scalars: Vec<f64>,
    /// Primal objective in the problem's own sense.
    pub objective: f64,
    pub dual_objective: f64,
    pub status: SdpStatus,
    /// `max(|p − d|, <X, Z>) / (1 + |p| + |d|)` in original units.
    pub duality_gap: f64,
    /// Signed violation per constraint (positive means violated).
    pub residuals: Vec<f64>,
    /// Largest violation relative to `‖row‖ + |rhs|`.
    pub max_violation: f64,
    pub iterations: usize,
    /// Complementarity `<X, Z> / n` after each accepted iteration.
    pub gap_history: Vec<f64>,
}

/// Solves `problem`. Input defects are errors; numerical outcomes are
/// reported through [`SdpSolution::status`].
pub fn solve(problem: &SdpProblem, options: &SolverOptions) -> Result<SdpSolution> {
    let real = realify(problem)?;
    let scaled = Scaled::new(&real);
    let out = interior_point(&scaled, options);

    let (blocks, scalars) = real.back_map(&out.x);
    let objective = problem.objective_value(&blocks, &scalars);
    let dual_objective = real.objective_sign * scaled.kappa * out.y.dot(&scaled.b);
    let report = check_residuals(problem, &blocks, &scalars)?;

    Ok(SdpSolution {
        blocks,
        scalars,
        objective,
        dual_objective,
        status: out.status,
        duality_gap: out.rel_gap,
        residuals: report.violations,
        max_violation: report.max_relative_violation,
        iterations: out.iterations,
        gap_history: out.history,
    })
}

/// Row- and objective-normalized copy of a realified problem.
struct Scaled {
    dims: Vec<usize>,
    c: Vec<Option<SymCoef>>,
    rows: Vec<RealRow>,
    b: DVector<f64>,
    kappa: f64,
    /// For each block, the `(row, term)` pairs touching it, sorted by row.
    block_rows: Vec<Vec<(usize, usize)>>,
}

impl Scaled {
    fn new(real: &RealifiedProblem) -> Self {
        let mut rows = real.rows.clone();
        for row in &mut rows {
            let is_slack = |b: usize| matches!(real.kinds[b], RealBlockKind::Slack { .. });
            let nu = row
                .terms
                .iter()
                .filter(|(b, _)| !is_slack(*b))
                .map(|(_, c)| c.fro_sq())
                .sum::<f64>()
                .sqrt();
            let nu = if nu > 0.0 { nu } else { 1.0 };
            for (b, c) in &mut row.terms {
                // slacks are rescaled along with the row so their coefficient stays ±1
                if !is_slack(*b) {
                    c.scale(1.0 / nu);
                }
            }
            row.rhs /= nu;
        }
        let kappa = real
            .objective
            .iter()
            .flatten()
            .map(|c| c.fro_sq())
            .sum::<f64>()
            .sqrt();
        let kappa = if kappa > 0.0 { kappa } else { 1.0 };
        let c = real
            .objective
            .iter()
            .map(|c| {
                c.clone().map(|mut c| {
                    c.scale(1.0 / kappa);
                    c
                })
            })
            .collect();
        let mut block_rows = vec![Vec::new(); real.dims.len()];
        for (r, row) in rows.iter().enumerate() {
            for (t, (b, _)) in row.terms.iter().enumerate() {
                block_rows[*b].push((r, t));
            }
        }
        let b = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.rhs));
        Scaled {
            dims: real.dims.clone(),
            c,
            rows,
            b,
            kappa,
            block_rows,
        }
    }

    fn apply(&self, x: &[RMat]) -> DVector<f64> {
        DVector::from_iterator(
            self.rows.len(),
            self.rows
                .iter()
                .map(|row| row.terms.iter().map(|(b, c)| c.dot(&x[*b])).sum::<f64>()),
        )
    }

    /// `Σ y_i A_i`, per block.
    fn adjoint(&self, y: &DVector<f64>) -> Vec<RMat> {
        let mut out: Vec<RMat> = self.dims.iter().map(|&d| RMat::zeros(d, d)).collect();
        for (r, row) in self.rows.iter().enumerate() {
            if y[r] != 0.0 {
                for (b, c) in &row.terms {
                    c.add_to(&mut out[*b], y[r]);
                }
            }
        }
        out
    }

    fn objective(&self, x: &[RMat]) -> f64 {
        self.c
            .iter()
            .zip(x)
            .filter_map(|(c, xb)| c.as_ref().map(|c| c.dot(xb)))
            .sum()
    }
}

struct Outcome {
    x: Vec<RMat>,
    y: DVector<f64>,
    status: SdpStatus,
    rel_gap: f64,
    iterations: usize,
    history: Vec<f64>,
}

/// NT scaling of one block: `X = G Λ Gᵀ`, `Z = G⁻ᵀ Λ G⁻¹`, `W = G Gᵀ`.
struct NtScaling {
    g: RMat,
    ginv: RMat,
    w: RMat,
    lam: DVector<f64>,
}

fn nt_scaling(x: &RMat, z: &RMat) -> Option<NtScaling> {
    if x.nrows() == 1 {
        let (xv, zv) = (x[(0, 0)], z[(0, 0)]);
        if !(xv > 0.0 && zv > 0.0) {
            return None;
        }
        let g = (xv / zv).sqrt().sqrt();
        return Some(NtScaling {
            g: RMat::from_element(1, 1, g),
            ginv: RMat::from_element(1, 1, 1.0 / g),
            w: RMat::from_element(1, 1, g * g),
            lam: DVector::from_element(1, (xv * zv).sqrt()),
        });
    }
    let lx = x.clone().cholesky()?.l();
    let lz = z.clone().cholesky()?.l();
    let svd = (lz.transpose() * &lx).svd(true, true);
    let u = svd.u?;
    let vt = svd.v_t?;
    let lam = svd.singular_values;
    if lam.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return None;
    }
    let inv_sqrt = lam.map(|s| 1.0 / s.sqrt());
    let mut g = &lx * vt.transpose();
    for (c, f) in inv_sqrt.iter().enumerate() {
        g.column_mut(c).scale_mut(*f);
    }
    let mut ginv = u.transpose() * lz.transpose();
    for (r, f) in inv_sqrt.iter().enumerate() {
        ginv.row_mut(r).scale_mut(*f);
    }
    let w = &g * g.transpose();
    Some(NtScaling { g, ginv, w, lam })
}

/// Largest `α` with `X + α ΔX ⪰ 0` (infinite when `ΔX ⪰ 0`).
fn max_step(x: &RMat, dx: &RMat) -> Option<f64> {
    if x.nrows() == 1 {
        let d = dx[(0, 0)];
        return Some(if d < 0.0 { -x[(0, 0)] / d } else { f64::INFINITY });
    }
    let l = x.clone().cholesky()?.l();
    let half = l.solve_lower_triangular(dx)?;
    let m = l.solve_lower_triangular(&half.transpose())?;
    let m = (&m + m.transpose()) * 0.5;
    let lam_min = m.symmetric_eigen().eigenvalues.min();
    Some(if lam_min < 0.0 { -1.0 / lam_min } else { f64::INFINITY })
}

/// Right-hand side `R_c` of `ΔX + W ΔZ W = R_c` targeting `target·I` in the
/// scaled frame, optionally with the Mehrotra second-order term.
fn scaled_complementarity(scal: &[NtScaling], predictor: Option<(&[RMat], &[RMat])>, target: f64) -> Vec<RMat> {
    scal.iter()
        .enumerate()
        .map(|(b, s)| {
            let d = s.lam.len();
            let cross = predictor.map(|(dx, dz)| {
                let dxs = &s.ginv * &dx[b] * s.ginv.transpose();
                let dzs = s.g.transpose() * &dz[b] * &s.g;
                &dxs * &dzs + &dzs * &dxs
            });
            let rt = RMat::from_fn(d, d, |i, j| {
                let mut v = cross.as_ref().map_or(0.0, |c| -c[(i, j)]);
                if i == j {
                    v += 2.0 * target - 2.0 * s.lam[i] * s.lam[i];
                }
                v / (s.lam[i] + s.lam[j])
            });
            let mut out = &s.g * rt * s.g.transpose();
            symmetrize(&mut out);
            out
        })
        .collect()
}

/// Halves both step lengths until `<X, Z>` does not grow.
#[allow(clippy::too_many_arguments)]
fn backtrack(
    x: &[RMat],
    z: &[RMat],
    dx: &[RMat],
    dz: &[RMat],
    mut ap: f64,
    mut ad: f64,
    xz: f64,
    tries: usize,
) -> Option<(f64, f64)> {
    for _ in 0..tries {
        let mut xz_new = 0.0;
        for b in 0..x.len() {
            xz_new += (&x[b] + &dx[b] * ap).dot(&(&z[b] + &dz[b] * ad));
        }
        if xz_new <= xz {
            return Some((ap, ad));
        }
        ap *= 0.5;
        ad *= 0.5;
    }
    None
}

fn symmetrize(m: &mut RMat) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

fn inner(a: &[RMat], b: &[RMat]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

/// Factorized Schur complement with diagonal regularization fallback.
enum SchurFactor {
    Chol(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl SchurFactor {
    fn new(m: DMatrix<f64>) -> Option<Self> {
        if m.nrows() == 0 {
            return m.cholesky().map(SchurFactor::Chol);
        }
        let max_diag = m.diagonal().amax().max(1e-300);
        let mut delta = 0.0;
        for _ in 0..6 {
            let mut mm = m.clone();
            for i in 0..mm.nrows() {
                mm[(i, i)] += delta;
            }
            if let Some(c) = mm.cholesky() {
                return Some(SchurFactor::Chol(c));
            }
            delta = if delta == 0.0 { 1e-14 * max_diag } else { delta * 100.0 };
        }
        let lu = m.lu();
        if lu.is_invertible() {
            Some(SchurFactor::Lu(lu))
        } else {
            None
        }
    }

    fn solve(&self, rhs: &DVector<f64>) -> Option<DVector<f64>> {
        let out = match self {
            SchurFactor::Chol(c) => c.solve(rhs),
            SchurFactor::Lu(l) => l.solve(rhs)?,
        };
        out.iter().all(|v| v.is_finite()).then_some(out)
    }
}

const INFEASIBLE_DUAL_OBJECTIVE: f64 = 1e8;
const STAGNATION_WINDOW: usize = 10;

fn interior_point(p: &Scaled, opts: &SolverOptions) -> Outcome {
    let nblocks = p.dims.len();
    let m = p.rows.len();
    let n_total: usize = p.dims.iter().sum();

    let tau = 1.0 + p.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let zeta = 1.0
        + p.c
            .iter()
            .flatten()
            .map(|c| c.fro_sq().sqrt())
            .fold(0.0f64, f64::max);
    let mut x: Vec<RMat> = p.dims.iter().map(|&d| RMat::identity(d, d) * tau).collect();
    let mut z: Vec<RMat> = p.dims.iter().map(|&d| RMat::identity(d, d) * zeta).collect();
    let mut y = DVector::zeros(m);

    let mut history = Vec::new();
    let mut pinf_history: Vec<f64> = Vec::new();
    let mut status = SdpStatus::MaxIterations;
    let mut rel_gap = f64::INFINITY;
    let mut iterations = 0;

    let c_dense: Vec<RMat> = p
        .c
        .iter()
        .zip(&p.dims)
        .map(|(c, &d)| c.as_ref().map(|c| c.to_dense()).unwrap_or_else(|| RMat::zeros(d, d)))
        .collect();
    let c_norm = c_dense.iter().map(|c| c.norm_squared()).sum::<f64>().sqrt();

    for iter in 0..=opts.max_iterations {
        iterations = iter;
        let rp = &p.b - p.apply(&x);
        let aty = p.adjoint(&y);
        let rd: Vec<RMat> = (0..nblocks).map(|b| &c_dense[b] - &z[b] - &aty[b]).collect();
        let pobj = p.objective(&x);
        let dobj = p.b.dot(&y);
        let xz = inner(&x, &z);
        let mu = xz / n_total as f64;

        let pinf = rp
            .iter()
            .zip(p.b.iter())
            .map(|(r, b)| r.abs() / (1.0 + b.abs()))
            .fold(0.0f64, f64::max);
        let dinf = rd.iter().map(|r| r.norm_squared()).sum::<f64>().sqrt() / (1.0 + c_norm);
        rel_gap = p.kappa * (pobj - dobj).abs().max(xz) / (1.0 + p.kappa * (pobj.abs() + dobj.abs()));
        pinf_history.push(pinf);

        if rel_gap <= opts.gap_tolerance && pinf <= opts.feasibility_tolerance && dinf <= opts.feasibility_tolerance {
            status = SdpStatus::Optimal;
            break;
        }
        if dobj > INFEASIBLE_DUAL_OBJECTIVE && pinf_history.len() > STAGNATION_WINDOW {
            let past = pinf_history[pinf_history.len() - 1 - STAGNATION_WINDOW];
            if pinf > 0.5 * past {
                status = SdpStatus::Infeasible;
                break;
            }
        }
        if iter == opts.max_iterations {
            break;
        }

        let Some(scal): Option<Vec<NtScaling>> = (0..nblocks).map(|b| nt_scaling(&x[b], &z[b])).collect() else {
            status = SdpStatus::NumericalFailure;
            break;
        };

        // Schur complement M_ij = <A_i, W A_j W>
        let mut schur = DMatrix::zeros(m, m);
        for b in 0..nblocks {
            let w = &scal[b].w;
            let touching = &p.block_rows[b];
            for (k, &(ri, ti)) in touching.iter().enumerate() {
                let sand = p.rows[ri].terms[ti].1.sandwich(w);
                for &(rj, tj) in &touching[k..] {
                    schur[(ri, rj)] += p.rows[rj].terms[tj].1.dot(&sand);
                }
            }
        }
        for i in 0..m {
            for j in 0..i {
                schur[(i, j)] = schur[(j, i)];
            }
        }
        let Some(factor) = SchurFactor::new(schur) else {
            status = SdpStatus::NumericalFailure;
            break;
        };

        let wrdw: Vec<RMat> = (0..nblocks).map(|b| &scal[b].w * &rd[b] * &scal[b].w).collect();
        let direction = |rc: &[RMat]| -> Option<(DVector<f64>, Vec<RMat>, Vec<RMat>)> {
            let tmp: Vec<RMat> = (0..nblocks).map(|b| &rc[b] - &wrdw[b]).collect();
            let rhs = &rp - p.apply(&tmp);
            let dy = factor.solve(&rhs)?;
            let atdy = p.adjoint(&dy);
            let mut dz = Vec::with_capacity(nblocks);
            let mut dx = Vec::with_capacity(nblocks);
            for b in 0..nblocks {
                let mut dzb = &rd[b] - &atdy[b];
                symmetrize(&mut dzb);
                let mut dxb = &rc[b] - &scal[b].w * &dzb * &scal[b].w;
                symmetrize(&mut dxb);
                dz.push(dzb);
                dx.push(dxb);
            }
            Some((dy, dx, dz))
        };
        let steps = |dx: &[RMat], dz: &[RMat]| -> Option<(f64, f64)> {
            let mut ap = f64::INFINITY;
            let mut ad = f64::INFINITY;
            for b in 0..nblocks {
                ap = ap.min(max_step(&x[b], &dx[b])?);
                ad = ad.min(max_step(&z[b], &dz[b])?);
            }
            Some((ap, ad))
        };

        // predictor
        let rc_aff: Vec<RMat> = x.iter().map(|xb| -xb).collect();
        let Some((_, dx_a, dz_a)) = direction(&rc_aff) else {
            status = SdpStatus::NumericalFailure;
            break;
        };
        let Some((ap, ad)) = steps(&dx_a, &dz_a) else {
            status = SdpStatus::NumericalFailure;
            break;
        };
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let mut xz_aff = 0.0;
        for b in 0..nblocks {
            xz_aff += (&x[b] + &dx_a[b] * ap).dot(&(&z[b] + &dz_a[b] * ad));
        }
        let sigma = (xz_aff / xz).clamp(0.0, 1.0).powi(3);

        // corrector in the NT-scaled frame, where the scaled point is diag(λ)
        let rc = scaled_complementarity(&scal, Some((&dx_a, &dz_a)), sigma * mu);
        let mut accepted = None;
        if let Some((dy, dx, dz)) = direction(&rc) {
            if let Some((ap, ad)) = steps(&dx, &dz) {
                let ap = (opts.step_fraction * ap).min(1.0);
                let ad = (opts.step_fraction * ad).min(1.0);
                if let Some((ap, ad)) = backtrack(&x, &z, &dx, &dz, ap, ad, xz, 10) {
                    accepted = Some((dy, dx, dz, ap, ad));
                }
            }
        }
        if accepted.is_none() {
            // Pure centering without the second-order term: <X,Z> decreases
            // for small enough common steps.
            let rc = scaled_complementarity(&scal, None, sigma.max(0.5) * mu);
            if let Some((dy, dx, dz)) = direction(&rc) {
                if let Some((ap, ad)) = steps(&dx, &dz) {
                    let a = (opts.step_fraction * ap.min(ad)).min(1.0);
                    if let Some((ap, ad)) = backtrack(&x, &z, &dx, &dz, a, a, xz, 60) {
                        accepted = Some((dy, dx, dz, ap, ad));
                    }
                }
            }
        }
        let Some((dy, dx, dz, ap, ad)) = accepted else {
            status = SdpStatus::NumericalFailure;
            break;
        };

        for b in 0..nblocks {
            x[b] += &dx[b] * ap;
            z[b] += &dz[b] * ad;
            symmetrize(&mut x[b]);
            symmetrize(&mut z[b]);
        }
        y += dy * ad;
        history.push(inner(&x, &z) / n_total as f64);
    }

    Outcome {
        x,
        y,
        status,
        rel_gap,
        iterations,
        history,
    }
}
