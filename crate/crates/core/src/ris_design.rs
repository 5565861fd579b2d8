//! RIS subproblem for fixed beamformers: every metric is a quadratic form
//! in `v = [ω; 1]`, so the design lifts to an SDP over `V = v v^H`, followed
//! by Gaussian randomization back to a feasible coefficient vector.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::ChannelSet;
use crate::error::{IsacError, Result};
use crate::linalg::{hermitize, psd_factor, quad_form, CMat, CVec, ONE};
use crate::rng::{self, complex_gaussian_vec, tag};
use crate::sdp::{self, BlockId, Constraint, ObjectiveSense, ScalarId, SdpProblem, SdpStatus};
use crate::sysmodel::{BeamformerSet, DesignConfig, HybridRisSpec, RisState};

/// Relative slack used when screening randomized candidates.
pub const SCREEN_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct LiftedMatrices {
    /// Illumination of target `m` is `v^H T_m v`.
    pub t: Vec<CMat>,
    /// RIS noise at target `m` is `v^H E_m v`.
    pub e: Vec<CMat>,
    /// Useful signal power at user `k`.
    pub a: Vec<CMat>,
    /// Interference plus RIS noise at user `k`.
    pub b: Vec<CMat>,
}

/// `q` with `v^H q = conj(f^H b)` where `f^H = d^H + r^H diag(ω) H_br`.
fn lifted_vector(ch: &ChannelSet, direct: &CVec, reflect: &CVec, beam: &CVec) -> CVec {
    let n = ch.ris_elements();
    let incident = &ch.h_br * beam;
    let mut q = CVec::zeros(n + 1);
    for i in 0..n {
        q[i] = reflect[i] * incident[i].conj();
    }
    q[n] = beam.dotc(direct);
    q
}

fn noise_block(spec: &HybridRisSpec, reflect: &CVec) -> CMat {
    let n = reflect.len();
    let mut e = CMat::zeros(n + 1, n + 1);
    for i in 0..spec.active.min(n) {
        e[(i, i)] = Complex64::new(spec.noise_power * reflect[i].norm_sqr(), 0.0);
    }
    e
}

fn beams(bf: &BeamformerSet) -> impl Iterator<Item = CVec> + '_ {
    bf.comm.column_iter().chain(bf.sensing.column_iter()).map(|c| c.into_owned())
}

fn accumulate(ch: &ChannelSet, direct: &CVec, reflect: &CVec, cols: impl Iterator<Item = CVec>) -> CMat {
    let n = ch.ris_elements();
    let mut out = CMat::zeros(n + 1, n + 1);
    for b in cols {
        let q = lifted_vector(ch, direct, reflect, &b);
        out.gerc(ONE, &q, &q, ONE);
    }
    out
}

pub fn build_lifted(ch: &ChannelSet, bf: &BeamformerSet, spec: &HybridRisSpec) -> Result<LiftedMatrices> {
    ch.validate()?;
    if spec.elements != ch.ris_elements() {
        return Err(IsacError::validation("surface size differs from channel"));
    }
    if bf.comm.ncols() != ch.users() || bf.comm.nrows() != ch.antennas() || bf.sensing.nrows() != ch.antennas() {
        return Err(IsacError::validation("beamformer dimensions do not match channel"));
    }
    let t = (0..ch.targets())
        .map(|m| accumulate(ch, &ch.g_bt[m], &ch.g_rt[m], beams(bf)))
        .collect();
    let e = (0..ch.targets()).map(|m| noise_block(spec, &ch.g_rt[m])).collect();
    let mut a = Vec::with_capacity(ch.users());
    let mut b = Vec::with_capacity(ch.users());
    for k in 0..ch.users() {
        let (d, r) = (&ch.h_bu[k], &ch.h_ru[k]);
        a.push(accumulate(ch, d, r, std::iter::once(bf.comm.column(k).into_owned())));
        let others = beams(bf).enumerate().filter(|(j, _)| *j != k).map(|(_, c)| c);
        b.push(accumulate(ch, d, r, others) + noise_block(spec, r));
    }
    Ok(LiftedMatrices { t, e, a, b })
}

/// `[ω; 1]`.
pub fn lift(ris: &RisState) -> CVec {
    let n = ris.len();
    CVec::from_fn(n + 1, |i, _| if i < n { ris.coefficients[i] } else { ONE })
}

impl LiftedMatrices {
    pub fn worst_illumination(&self, v: &CVec) -> f64 {
        self.t.iter().map(|t| quad_form(t, v)).fold(f64::INFINITY, f64::min)
    }

    pub fn sinr(&self, v: &CVec, k: usize, noise: f64) -> f64 {
        quad_form(&self.a[k], v) / (quad_form(&self.b[k], v) + noise)
    }

    /// Checks the SINR and target-noise rows with relative slack `tol`.
    pub fn is_feasible(&self, v: &CVec, cfg: &DesignConfig, tol: f64) -> bool {
        let gamma = cfg.sinr_threshold;
        let sinr_ok = self.a.iter().zip(&self.b).all(|(a, b)| {
            quad_form(a, v) >= gamma * (1.0 - tol) * (quad_form(b, v) + cfg.receiver_noise)
        });
        sinr_ok && self.e.iter().all(|e| quad_form(e, v) <= cfg.max_target_noise * (1.0 + tol))
    }
}

#[derive(Clone, Debug)]
pub struct RisProblem {
    pub problem: SdpProblem,
    pub lifted_block: BlockId,
    pub epigraph: ScalarId,
    /// The epigraph scalar is in units of this illumination (mW).
    pub objective_scale: f64,
}

/// Lifted relaxation. `reference` sets the objective scale and should be a
/// typical illumination level, e.g. that of the incumbent.
pub fn assemble_ris_sdp(
    lifted: &LiftedMatrices,
    cfg: &DesignConfig,
    spec: &HybridRisSpec,
    reference: Option<f64>,
) -> Result<RisProblem> {
    cfg.validate()?;
    spec.validate()?;
    if lifted.t.is_empty() {
        return Err(IsacError::validation("RIS design needs at least one target"));
    }
    let n = spec.elements;
    let tau = match reference {
        Some(r) if r > 0.0 && r.is_finite() => r,
        _ => lifted.t.iter().map(|t| t.trace().re).fold(0.0, f64::max).max(f64::MIN_POSITIVE),
    };

    let mut problem = SdpProblem::new(ObjectiveSense::Maximize);
    let vb = problem.add_block("V", n + 1);
    let t = problem.add_scalar("t");
    problem.set_objective_scalar(t, 1.0);
    for (m, tm) in lifted.t.iter().enumerate() {
        problem.add_constraint(
            Constraint::new(format!("illum_{m}"))
                .block(vb, tm * Complex64::new(1.0 / tau, 0.0))
                .scalar(t, -1.0)
                .ge(0.0),
        );
    }
    let gamma = cfg.sinr_threshold;
    for (k, (a, b)) in lifted.a.iter().zip(&lifted.b).enumerate() {
        problem.add_constraint(
            Constraint::new(format!("sinr_{k}"))
                .block(vb, a - b * Complex64::new(gamma, 0.0))
                .ge(gamma * cfg.receiver_noise),
        );
    }
    for (m, e) in lifted.e.iter().enumerate() {
        // all-passive surfaces have no noise rows
        if e.iter().any(|z| z.re != 0.0) {
            problem.add_constraint(Constraint::new(format!("noise_{m}")).block(vb, e.clone()).le(cfg.max_target_noise));
        }
    }
    for i in 0..=n {
        let mut d = CMat::zeros(n + 1, n + 1);
        d[(i, i)] = ONE;
        let c = Constraint::new(format!("diag_{i}")).block(vb, d);
        problem.add_constraint(if i < n && spec.is_active(i) {
            c.le(spec.modulus_cap_sq(i))
        } else {
            c.eq(1.0)
        });
    }
    Ok(RisProblem {
        problem,
        lifted_block: vb,
        epigraph: t,
        objective_scale: tau,
    })
}

/// Projects a draw onto the modulus constraints.
pub fn project(u: &CVec, spec: &HybridRisSpec) -> RisState {
    RisState::new(CVec::from_fn(u.len(), |i, _| {
        let z = u[i];
        let r = z.norm();
        if spec.is_active(i) {
            if r > spec.max_gain {
                z * (spec.max_gain / r)
            } else {
                z
            }
        } else if r > 0.0 {
            z / r
        } else {
            ONE
        }
    }))
}

#[derive(Clone, Debug)]
pub struct Randomized {
    pub state: RisState,
    /// Worst-case illumination of `state` under the lifted model, mW.
    pub objective: f64,
    /// No candidate passed screening; the incumbent was returned.
    pub fallback: bool,
}

/// Draws `cfg.randomizations` candidates, projects and screens them, and
/// keeps the best. The incumbent is always a candidate when given.
///
/// Each draw is `ξ ~ CN(0, V_opt)`; its first `N` entries, rotated by the
/// phase of `ξ_{N+1}`, form the candidate. Those entries are `CN(0, Ṽ)` with
/// `Ṽ` the leading block, and the rotation keeps their phase relative to the
/// direct path.
pub fn gaussian_randomization(
    v_opt: &CMat,
    lifted: &LiftedMatrices,
    cfg: &DesignConfig,
    spec: &HybridRisSpec,
    incumbent: Option<&RisState>,
    seed: u64,
) -> Result<Randomized> {
    let n = spec.elements;
    if v_opt.nrows() != n + 1 || v_opt.ncols() != n + 1 {
        return Err(IsacError::validation("lifted solution has the wrong size"));
    }
    let factor = psd_factor(&hermitize(v_opt));
    let best = (0..cfg.randomizations)
        .into_par_iter()
        .filter_map(|j| {
            let mut rng = rng::derived(seed, &[tag::RANDOMIZATION, j as u64]);
            let xi = &factor * complex_gaussian_vec(&mut rng, factor.ncols());
            let anchor = xi[n];
            let rot = if anchor.norm() > 0.0 { anchor.conj() / anchor.norm() } else { ONE };
            let state = project(&(xi.rows(0, n) * rot), spec);
            let v = lift(&state);
            lifted
                .is_feasible(&v, cfg, SCREEN_TOLERANCE)
                .then(|| (j, lifted.worst_illumination(&v), state))
        })
        // highest objective, then lowest draw index
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));

    let inc = incumbent.map(|s| (lifted.worst_illumination(&lift(s)), s.clone()));
    match (best, inc) {
        (Some((_, obj, state)), Some((io, is))) => Ok(if io >= obj {
            Randomized { state: is, objective: io, fallback: false }
        } else {
            Randomized { state, objective: obj, fallback: false }
        }),
        (Some((_, objective, state)), None) => Ok(Randomized { state, objective, fallback: false }),
        (None, Some((objective, state))) => Ok(Randomized { state, objective, fallback: true }),
        (None, None) => Err(IsacError::Infeasible("no feasible randomized candidate".into())),
    }
}

#[derive(Clone, Debug)]
pub struct RisDesign {
    pub state: RisState,
    /// Relaxed optimum, mW. `NaN` when the relaxation was infeasible.
    pub relaxed_objective: f64,
    pub achieved_objective: f64,
    pub fallback: bool,
    pub solver_status: SdpStatus,
}

/// Solves the lifted relaxation for `bf` and randomizes around it.
pub fn design_ris(
    ch: &ChannelSet,
    bf: &BeamformerSet,
    cfg: &DesignConfig,
    spec: &HybridRisSpec,
    incumbent: &RisState,
    seed: u64,
) -> Result<RisDesign> {
    let lifted = build_lifted(ch, bf, spec)?;
    let reference = lifted.worst_illumination(&lift(incumbent));
    let rp = assemble_ris_sdp(&lifted, cfg, spec, Some(reference))?;
    let sol = sdp::solve(&rp.problem, &cfg.solver)?;
    match sol.status {
        SdpStatus::Optimal => {}
        SdpStatus::Infeasible => {
            return Ok(RisDesign {
                state: incumbent.clone(),
                relaxed_objective: f64::NAN,
                achieved_objective: reference,
                fallback: true,
                solver_status: sol.status,
            })
        }
        other => {
            return Err(IsacError::Solver {
                status: other.to_string(),
                context: "RIS SDP".into(),
            })
        }
    }
    let relaxed = sol.scalars[rp.epigraph.0] * rp.objective_scale;
    let r = gaussian_randomization(&sol.blocks[rp.lifted_block.0], &lifted, cfg, spec, Some(incumbent), seed)?;
    Ok(RisDesign {
        state: r.state,
        relaxed_objective: relaxed,
        achieved_objective: r.objective,
        fallback: r.fallback,
        solver_status: sol.status,
    })
}
