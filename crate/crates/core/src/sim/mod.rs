//! Seeded Monte-Carlo sweeps over one design parameter, all schemes, and
//! many channel realizations, with CSV output.

pub mod config;
mod csv;

pub use config::{load_config, Profile, SimulationConfig, SweepVariable};
pub use csv::{emit_csv, to_csv_string, CSV_HEADER};

use std::fmt;

use rayon::prelude::*;

use crate::channel::{self, random_geometry, synthesize, ChannelSet};
use crate::error::Result;
use crate::optimizer::{run_scheme, AlternationTrace, Scheme, TraceStatus};
use crate::rng::{derive_seed, tag};
use crate::sysmodel::{
    max_target_ris_noise, min_user_sinr, ris_output_power, ris_power_bound, worst_case_illumination, DesignConfig,
    HybridRisSpec,
};
use crate::units::{linear_to_db, mw_to_dbm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RowStatus {
    Ok,
    /// Feasible, but some RIS update kept the incumbent or the alternation
    /// stopped early on a solver failure.
    Fallback,
    /// No feasible design was found.
    Infeasible,
}

impl RowStatus {
    pub fn name(self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::Fallback => "fallback",
            RowStatus::Infeasible => "infeasible",
        }
    }
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub sweep_var: SweepVariable,
    pub sweep_value: f64,
    pub scheme: Scheme,
    pub realization: usize,
    pub wc_illum_dbm: f64,
    pub min_sinr_db: f64,
    pub max_tgt_noise_dbm: f64,
    pub pris_dbm: f64,
    pub thm1_bound_dbm: f64,
    pub iterations: usize,
    pub status: RowStatus,
}

/// Seed shared by every cell of realization `r`: same users, targets and
/// fading for every scheme and sweep value.
pub fn realization_seed(master: u64, r: usize) -> u64 {
    derive_seed(master, &[tag::CHANNEL, r as u64])
}

pub fn scheme_seed(master: u64, r: usize) -> u64 {
    derive_seed(master, &[tag::SCHEME, r as u64])
}

pub fn realization_channel(cfg: &SimulationConfig, r: usize) -> Result<(channel::ScenarioGeometry, ChannelSet)> {
    let seed = realization_seed(cfg.seed, r);
    let g = &cfg.geometry;
    let geometry = random_geometry(
        g.dfbs,
        g.ris,
        &g.area,
        g.users,
        g.targets,
        g.antennas,
        cfg.ris.elements,
        seed,
    );
    let ch = synthesize(&geometry, &cfg.fading, seed)?;
    Ok((geometry, ch))
}

/// Metrics of a finished trace in physical units (mW, linear SINR).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolutionMetrics {
    pub worst_illumination: f64,
    pub min_sinr: f64,
    pub max_target_noise: f64,
    pub ris_power: f64,
}

pub fn solution_metrics(ch: &ChannelSet, trace: &AlternationTrace, cfg: &DesignConfig) -> Result<Option<SolutionMetrics>> {
    let Some((bf, ris)) = &trace.solution else {
        return Ok(None);
    };
    let spec = &trace.spec;
    Ok(Some(SolutionMetrics {
        worst_illumination: worst_case_illumination(ch, ris, bf)?.0,
        min_sinr: min_user_sinr(ch, spec, ris, bf, cfg.receiver_noise)?,
        max_target_noise: max_target_ris_noise(ch, spec, ris)?,
        ris_power: ris_output_power(ch, spec, ris, bf)?,
    }))
}

fn row_status(trace: &AlternationTrace) -> RowStatus {
    match (&trace.solution, &trace.status) {
        (None, _) => RowStatus::Infeasible,
        (Some(_), TraceStatus::Stopped(_)) => RowStatus::Fallback,
        (Some(_), _) if trace.any_fallback() => RowStatus::Fallback,
        _ => RowStatus::Ok,
    }
}

fn run_cell(cfg: &SimulationConfig, value: f64, scheme: Scheme, r: usize) -> SweepResult {
    let (spec, design) = cfg.cell(value);
    let mut row = SweepResult {
        sweep_var: cfg.sweep.variable,
        sweep_value: value,
        scheme,
        realization: r,
        wc_illum_dbm: f64::NAN,
        min_sinr_db: f64::NAN,
        max_tgt_noise_dbm: f64::NAN,
        pris_dbm: f64::NAN,
        thm1_bound_dbm: f64::NAN,
        iterations: 0,
        status: RowStatus::Infeasible,
    };
    let Ok((geometry, ch)) = realization_channel(cfg, r) else {
        return row;
    };
    let eff: HybridRisSpec = scheme.effective_spec(&spec);
    if let Ok(zeta) = channel::dfbs_ris_gain(&geometry, &cfg.fading) {
        let bound = ris_power_bound(&eff, zeta, design.total_power, cfg.fading.rician_factor, cfg.geometry.antennas);
        row.thm1_bound_dbm = mw_to_dbm(bound);
    }
    let trace = run_scheme(scheme, &ch, &design, &spec, scheme_seed(cfg.seed, r));
    row.iterations = trace.iterations();
    match solution_metrics(&ch, &trace, &design) {
        Ok(Some(m)) => {
            row.wc_illum_dbm = mw_to_dbm(m.worst_illumination);
            row.min_sinr_db = linear_to_db(m.min_sinr);
            row.max_tgt_noise_dbm = mw_to_dbm(m.max_target_noise);
            row.pris_dbm = mw_to_dbm(m.ris_power);
            row.status = row_status(&trace);
        }
        _ => row.status = RowStatus::Infeasible,
    }
    row
}

/// Runs every (sweep value, scheme, realization) cell in parallel and
/// returns the rows sorted by sweep value, scheme order, realization.
pub fn run_sweep(cfg: &SimulationConfig) -> Result<Vec<SweepResult>> {
    cfg.validate()?;
    let cells: Vec<(usize, usize, usize)> = (0..cfg.sweep.values.len())
        .flat_map(|v| (0..cfg.schemes.len()).flat_map(move |s| (0..cfg.realizations).map(move |r| (v, s, r))))
        .collect();
    let mut rows: Vec<((usize, usize, usize), SweepResult)> = cells
        .into_par_iter()
        .map(|(v, s, r)| ((v, s, r), run_cell(cfg, cfg.sweep.values[v], cfg.schemes[s], r)))
        .collect();
    rows.sort_by_key(|(k, _)| *k);
    Ok(rows.into_iter().map(|(_, row)| row).collect())
}
