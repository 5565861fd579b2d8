//! Beamformer subproblem for a fixed RIS state: SDP relaxation over the
//! transmit covariance `R` and per-user covariances `C_k`, then rank-one
//! recovery of the communication beamformers and a square-root factor for
//! the sensing beamformer.
//!
//! Variables are stored normalized by `P_t` and the epigraph scalar by the
//! largest possible illumination, which keeps the solver's tolerances
//! meaningful when powers span many decades.

use num_complex::Complex64;

use crate::channel::ChannelSet;
use crate::error::{IsacError, Result};
use crate::linalg::{fro, hermitize, min_eigenvalue, outer, psd_factor, quad_form, trace_re, CMat, CVec, ONE};
use crate::sdp::{self, BlockId, Constraint, ObjectiveSense, ScalarId, SdpProblem, SdpSolution, SdpStatus};
use crate::sysmodel::{
    effective_target_channel, effective_user_channel, user_ris_noise, BeamformerSet, DesignConfig, HybridRisSpec,
    RisState,
};

/// Assembled relaxation plus what is needed to map a solution back to mW.
#[derive(Clone, Debug)]
pub struct BfProblem {
    pub problem: SdpProblem,
    pub covariance: BlockId,
    pub users: Vec<BlockId>,
    pub residual: BlockId,
    pub epigraph: ScalarId,
    /// Matrix blocks are in units of this power (mW).
    pub power_scale: f64,
    /// The epigraph scalar is in units of this illumination (mW).
    pub objective_scale: f64,
    pub user_channels: Vec<CVec>,
    pub target_channels: Vec<CVec>,
}

/// Relaxed optimum in physical units.
#[derive(Clone, Debug)]
pub struct BfRelaxation {
    pub covariance: CMat,
    pub users: Vec<CMat>,
    /// Epigraph value, mW.
    pub objective: f64,
    pub status: SdpStatus,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct BfDesign {
    pub beamformers: BeamformerSet,
    pub relaxed_objective: f64,
    /// Worst-case illumination of the recovered beamformers, mW.
    pub achieved_objective: f64,
    pub solver_iterations: usize,
}

/// Hermitian basis `E` with `Tr(E X)` equal to `X_pp`, `Re X_pq` or `Im X_pq`.
fn hermitian_basis(m: usize) -> Vec<(String, CMat)> {
    let mut out = Vec::with_capacity(m * m);
    for p in 0..m {
        for q in p..m {
            let mut e = CMat::zeros(m, m);
            if p == q {
                e[(p, p)] = ONE;
                out.push((format!("couple_{p}_{p}"), e));
                continue;
            }
            e[(p, q)] = Complex64::new(0.5, 0.0);
            e[(q, p)] = Complex64::new(0.5, 0.0);
            out.push((format!("couple_re_{p}_{q}"), e));
            let mut e = CMat::zeros(m, m);
            e[(p, q)] = Complex64::new(0.0, 0.5);
            e[(q, p)] = Complex64::new(0.0, -0.5);
            out.push((format!("couple_im_{p}_{q}"), e));
        }
    }
    out
}

pub fn assemble_bf_sdp(ch: &ChannelSet, spec: &HybridRisSpec, ris: &RisState, cfg: &DesignConfig) -> Result<BfProblem> {
    cfg.validate()?;
    ch.validate()?;
    let m = ch.antennas();
    let k_users = ch.users();
    let user_channels = (0..k_users)
        .map(|k| effective_user_channel(ch, ris, k))
        .collect::<Result<Vec<_>>>()?;
    let target_channels = (0..ch.targets())
        .map(|t| effective_target_channel(ch, ris, t))
        .collect::<Result<Vec<_>>>()?;
    if target_channels.is_empty() {
        return Err(IsacError::validation("beamformer design needs at least one target"));
    }

    let pt = cfg.total_power;
    let strongest = target_channels.iter().map(|g| g.norm_squared()).fold(0.0, f64::max);
    let tau = if strongest > 0.0 { pt * strongest } else { 1.0 };

    let mut problem = SdpProblem::new(ObjectiveSense::Maximize);
    let covariance = problem.add_block("R", m);
    let users: Vec<BlockId> = (0..k_users).map(|k| problem.add_block(format!("C{k}"), m)).collect();
    let residual = problem.add_block("Z", m);
    let epigraph = problem.add_scalar("t");
    problem.set_objective_scalar(epigraph, 1.0);

    for (i, g) in target_channels.iter().enumerate() {
        problem.add_constraint(
            Constraint::new(format!("illum_{i}"))
                .block(covariance, outer(g) * Complex64::new(pt / tau, 0.0))
                .scalar(epigraph, -1.0)
                .ge(0.0),
        );
    }
    let boost = 1.0 + 1.0 / cfg.sinr_threshold;
    for (k, h) in user_channels.iter().enumerate() {
        let hh = outer(h);
        let rhs = user_ris_noise(ch, spec, ris, k)? + cfg.receiver_noise;
        problem.add_constraint(
            Constraint::new(format!("sinr_{k}"))
                .block(users[k], &hh * Complex64::new(boost * pt, 0.0))
                .block(covariance, &hh * Complex64::new(-pt, 0.0))
                .ge(rhs),
        );
    }
    problem.add_constraint(Constraint::new("power").block(covariance, CMat::identity(m, m)).le(1.0));
    for (tag, e) in hermitian_basis(m) {
        let neg = -&e;
        let mut c = Constraint::new(tag).block(covariance, e);
        for &u in &users {
            c = c.block(u, neg.clone());
        }
        problem.add_constraint(c.block(residual, neg).eq(0.0));
    }

    Ok(BfProblem {
        problem,
        covariance,
        users,
        residual,
        epigraph,
        power_scale: pt,
        objective_scale: tau,
        user_channels,
        target_channels,
    })
}

impl BfProblem {
    /// Maps a solver result back to physical units.
    pub fn relaxation(&self, sol: &SdpSolution) -> BfRelaxation {
        let s = Complex64::new(self.power_scale, 0.0);
        BfRelaxation {
            covariance: hermitize(&(&sol.blocks[self.covariance.0] * s)),
            users: self.users.iter().map(|u| hermitize(&(&sol.blocks[u.0] * s))).collect(),
            objective: sol.scalars[self.epigraph.0] * self.objective_scale,
            status: sol.status,
            iterations: sol.iterations,
        }
    }
}

/// Rank-one beamformers `c̃_k = Ĉ_k h_k / sqrt(h_k^H Ĉ_k h_k)`, one column
/// per user.
pub fn recover_rank1(users: &[CMat], channels: &[CVec]) -> Result<CMat> {
    if users.len() != channels.len() {
        return Err(IsacError::validation("one user covariance per channel expected"));
    }
    let m = channels.first().map_or(0, |h| h.len());
    let mut out = CMat::zeros(m, users.len());
    for (k, (c, h)) in users.iter().zip(channels).enumerate() {
        let value = quad_form(c, h);
        let threshold = 1e-12 * trace_re(c);
        if !(value > threshold) || value <= 0.0 {
            return Err(IsacError::DegenerateBeamformer {
                user: k,
                value,
                threshold,
            });
        }
        out.set_column(k, &((c * h) / Complex64::new(value.sqrt(), 0.0)));
    }
    Ok(out)
}

/// Square-root factor `S̃` with `S̃ S̃^H = R̂ − C̃ C̃^H`.
pub fn recover_sensing(covariance: &CMat, comm: &CMat) -> Result<CMat> {
    let residual = hermitize(&(covariance - comm * comm.adjoint()));
    let threshold = -1e-8 * (1.0 + trace_re(covariance));
    let min_eig = min_eigenvalue(&residual);
    if min_eig < threshold {
        return Err(IsacError::NotPsd { min_eig, threshold });
    }
    Ok(psd_factor(&residual))
}

fn status_error(status: SdpStatus, context: &str) -> IsacError {
    match status {
        SdpStatus::Infeasible => IsacError::Infeasible(context.to_string()),
        other => IsacError::Solver {
            status: other.to_string(),
            context: context.to_string(),
        },
    }
}

/// Solves the relaxation and returns it in physical units.
pub fn solve_bf_relaxation(bp: &BfProblem, cfg: &DesignConfig) -> Result<BfRelaxation> {
    let sol = sdp::solve(&bp.problem, &cfg.solver)?;
    if sol.status != SdpStatus::Optimal {
        return Err(status_error(sol.status, "beamformer SDP"));
    }
    Ok(bp.relaxation(&sol))
}

pub fn design_beamformers(ch: &ChannelSet, spec: &HybridRisSpec, ris: &RisState, cfg: &DesignConfig) -> Result<BfDesign> {
    let bp = assemble_bf_sdp(ch, spec, ris, cfg)?;
    let relaxed = solve_bf_relaxation(&bp, cfg)?;
    let comm = recover_rank1(&relaxed.users, &bp.user_channels)?;
    let sensing = recover_sensing(&relaxed.covariance, &comm)?;
    let beamformers = BeamformerSet { comm, sensing };
    let r = beamformers.covariance();
    let achieved = bp.target_channels.iter().map(|g| quad_form(&r, g)).fold(f64::INFINITY, f64::min);
    debug_assert!(fro(&(&r - &relaxed.covariance)) <= 1e-6 * (1.0 + fro(&relaxed.covariance)));
    Ok(BfDesign {
        beamformers,
        relaxed_objective: relaxed.objective,
        achieved_objective: achieved,
        solver_iterations: relaxed.iterations,
    })
}
