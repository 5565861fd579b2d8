//! Alternating design: beamformers for fixed RIS coefficients, then RIS
//! coefficients for fixed beamformers, keeping the best feasible pair seen.
//! Also hosts the baseline schemes.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::bf_design::design_beamformers;
use crate::channel::ChannelSet;
use crate::error::{IsacError, Result};
use crate::linalg::CVec;
use crate::ris_design::design_ris;
use crate::rng::{self, tag, unit_phase};
use crate::sysmodel::{
    max_target_ris_noise, min_user_sinr, BeamformerSet, DesignConfig, HybridRisSpec, RisState,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scheme {
    Hybrid,
    PassiveRis,
    RandomRis,
    NoRis,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Hybrid, Scheme::PassiveRis, Scheme::RandomRis, Scheme::NoRis];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Hybrid => "hybrid",
            Scheme::PassiveRis => "passive",
            Scheme::RandomRis => "random",
            Scheme::NoRis => "noris",
        }
    }

    /// Surface model the scheme actually uses.
    pub fn effective_spec(self, spec: &HybridRisSpec) -> HybridRisSpec {
        match self {
            Scheme::Hybrid => *spec,
            _ => spec.passive(),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = IsacError;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| IsacError::validation(format!("unknown scheme `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TraceStatus {
    Converged,
    MaxIterations,
    /// The first beamformer design had no feasible point.
    InfeasibleRealization,
    /// A later step failed; the best pair found so far is returned.
    Stopped(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub relaxed_bf: f64,
    pub recovered_bf: f64,
    /// `NaN` for schemes without RIS updates.
    pub relaxed_ris: f64,
    pub randomized: f64,
    pub min_sinr: f64,
    pub fallback: bool,
    pub best_so_far: f64,
}

#[derive(Clone, Debug)]
pub struct AlternationTrace {
    pub records: Vec<IterationRecord>,
    /// Best feasible pair, absent when none was found.
    pub solution: Option<(BeamformerSet, RisState)>,
    pub objective: f64,
    pub status: TraceStatus,
    pub spec: HybridRisSpec,
}

impl AlternationTrace {
    pub fn any_fallback(&self) -> bool {
        self.records.iter().any(|r| r.fallback)
    }

    pub fn iterations(&self) -> usize {
        self.records.len()
    }
}

/// Uniform phases; active elements at full gain.
pub fn initialize_ris(spec: &HybridRisSpec, seed: u64) -> RisState {
    let mut rng = rng::derived(seed, &[tag::RIS_INIT]);
    RisState::new(CVec::from_fn(spec.elements, |i, _| {
        let r = if spec.is_active(i) { spec.max_gain } else { 1.0 };
        unit_phase(&mut rng) * r
    }))
}

/// Shrinks the active gains uniformly until the target RIS noise cap holds.
fn respect_noise_cap(ch: &ChannelSet, spec: &HybridRisSpec, ris: RisState, cap: f64) -> Result<RisState> {
    let worst = max_target_ris_noise(ch, spec, &ris)?;
    if worst <= cap {
        return Ok(ris);
    }
    let s = Complex64::new((cap / worst).sqrt() * (1.0 - 1e-9), 0.0);
    let mut c = ris.coefficients;
    for i in 0..spec.active {
        c[i] *= s;
    }
    Ok(RisState::new(c))
}

struct Best {
    objective: f64,
    pair: Option<(BeamformerSet, RisState)>,
}

impl Best {
    fn offer(&mut self, objective: f64, bf: &BeamformerSet, ris: &RisState) {
        if self.pair.is_none() || objective > self.objective {
            self.objective = objective;
            self.pair = Some((bf.clone(), ris.clone()));
        }
    }
}

fn first_step_status(e: &IsacError) -> TraceStatus {
    match e {
        IsacError::Infeasible(_) | IsacError::DegenerateBeamformer { .. } => TraceStatus::InfeasibleRealization,
        other => TraceStatus::Stopped(other.to_string()),
    }
}

fn alternate_from(ch: &ChannelSet, cfg: &DesignConfig, spec: &HybridRisSpec, start: RisState, seed: u64) -> AlternationTrace {
    let mut records = Vec::new();
    let mut best = Best {
        objective: f64::NEG_INFINITY,
        pair: None,
    };
    let mut omega = start;
    let mut previous: Option<f64> = None;
    let mut status = TraceStatus::MaxIterations;

    for it in 0..cfg.max_iterations {
        let bf = match design_beamformers(ch, spec, &omega, cfg) {
            Ok(d) => d,
            Err(e) => {
                status = if it == 0 { first_step_status(&e) } else { TraceStatus::Stopped(e.to_string()) };
                break;
            }
        };
        best.offer(bf.achieved_objective, &bf.beamformers, &omega);
        let ris_seed = rng::derive_seed(seed, &[tag::RANDOMIZATION, it as u64]);
        let ris = match design_ris(ch, &bf.beamformers, cfg, spec, &omega, ris_seed) {
            Ok(r) => r,
            Err(e) => {
                status = TraceStatus::Stopped(e.to_string());
                records.push(IterationRecord {
                    relaxed_bf: bf.relaxed_objective,
                    recovered_bf: bf.achieved_objective,
                    relaxed_ris: f64::NAN,
                    randomized: f64::NAN,
                    min_sinr: min_user_sinr(ch, spec, &omega, &bf.beamformers, cfg.receiver_noise).unwrap_or(f64::NAN),
                    fallback: true,
                    best_so_far: best.objective,
                });
                break;
            }
        };
        best.offer(ris.achieved_objective, &bf.beamformers, &ris.state);
        records.push(IterationRecord {
            relaxed_bf: bf.relaxed_objective,
            recovered_bf: bf.achieved_objective,
            relaxed_ris: ris.relaxed_objective,
            randomized: ris.achieved_objective,
            min_sinr: min_user_sinr(ch, spec, &ris.state, &bf.beamformers, cfg.receiver_noise).unwrap_or(f64::NAN),
            fallback: ris.fallback,
            best_so_far: best.objective,
        });
        omega = ris.state;
        let now = bf.achieved_objective;
        if let Some(prev) = previous {
            if (now - prev).abs() <= cfg.convergence_tolerance * prev.abs() {
                status = TraceStatus::Converged;
                break;
            }
        }
        previous = Some(now);
    }

    AlternationTrace {
        records,
        objective: if best.pair.is_some() { best.objective } else { f64::NAN },
        solution: best.pair,
        status,
        spec: *spec,
    }
}

pub fn alternate(ch: &ChannelSet, cfg: &DesignConfig, spec: &HybridRisSpec, seed: u64) -> AlternationTrace {
    let start = initialize_ris(spec, seed);
    match respect_noise_cap(ch, spec, start, cfg.max_target_noise) {
        Ok(s) => alternate_from(ch, cfg, spec, s, seed),
        Err(e) => failed(spec, TraceStatus::Stopped(e.to_string())),
    }
}

fn failed(spec: &HybridRisSpec, status: TraceStatus) -> AlternationTrace {
    AlternationTrace {
        records: Vec::new(),
        solution: None,
        objective: f64::NAN,
        status,
        spec: *spec,
    }
}

/// One beamformer design against a fixed surface state.
fn single_pass(ch: &ChannelSet, cfg: &DesignConfig, spec: &HybridRisSpec, ris: RisState) -> AlternationTrace {
    match design_beamformers(ch, spec, &ris, cfg) {
        Ok(d) => AlternationTrace {
            records: vec![IterationRecord {
                relaxed_bf: d.relaxed_objective,
                recovered_bf: d.achieved_objective,
                relaxed_ris: f64::NAN,
                randomized: f64::NAN,
                min_sinr: min_user_sinr(ch, spec, &ris, &d.beamformers, cfg.receiver_noise).unwrap_or(f64::NAN),
                fallback: false,
                best_so_far: d.achieved_objective,
            }],
            objective: d.achieved_objective,
            solution: Some((d.beamformers, ris)),
            status: TraceStatus::Converged,
            spec: *spec,
        },
        Err(e) => failed(spec, first_step_status(&e)),
    }
}

pub fn run_scheme(scheme: Scheme, ch: &ChannelSet, cfg: &DesignConfig, spec: &HybridRisSpec, seed: u64) -> AlternationTrace {
    let eff = scheme.effective_spec(spec);
    match scheme {
        Scheme::Hybrid | Scheme::PassiveRis => alternate(ch, cfg, &eff, seed),
        Scheme::RandomRis => single_pass(ch, cfg, &eff, initialize_ris(&eff, seed)),
        Scheme::NoRis => single_pass(ch, cfg, &eff, RisState::off(spec.elements)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sysmodel::tests::desk_channel;
    use crate::sysmodel::{ris_output_power, target_ris_noise, user_ris_noise, worst_case_illumination};

    fn spec(n: usize, l: usize) -> HybridRisSpec {
        HybridRisSpec {
            elements: n,
            active: l,
            max_gain: 10f64.sqrt(),
            noise_power: 1e-6,
        }
    }

    fn cfg(iters: usize) -> DesignConfig {
        DesignConfig {
            total_power: 8.0,
            max_iterations: iters,
            randomizations: 50,
            ..DesignConfig::default()
        }
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert!("bogus".parse::<Scheme>().is_err());
    }

    #[test]
    fn initialization() {
        let p = spec(9, 0);
        assert!(initialize_ris(&p, 1).coefficients.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        assert_eq!(initialize_ris(&p, 1), initialize_ris(&p, 1));
        assert_ne!(initialize_ris(&p, 1), initialize_ris(&p, 2));
        let a = spec(9, 9);
        assert!(initialize_ris(&a, 3).coefficients.iter().all(|z| (z.norm() - a.max_gain).abs() < 1e-12));
    }

    #[test]
    fn one_iteration_has_one_record() {
        let ch = desk_channel(1, 4, 9, 2, 2);
        let t = alternate(&ch, &cfg(1), &spec(9, 2), 1);
        assert_eq!(t.records.len(), 1);
        assert!(t.solution.is_some());
    }

    #[test]
    fn best_so_far_is_monotone_and_feasible() {
        let s = spec(9, 2);
        let c = cfg(4);
        for seed in 0..3 {
            let ch = desk_channel(seed, 4, 9, 2, 2);
            let t = alternate(&ch, &c, &s, seed);
            for w in t.records.windows(2) {
                assert!(w[1].best_so_far >= w[0].best_so_far);
            }
            let (bf, ris) = t.solution.unwrap();
            assert!(ris.validate(&s).is_ok());
            assert!(bf.total_power() <= c.total_power + 1e-6);
            assert!(min_user_sinr(&ch, &s, &ris, &bf, c.receiver_noise).unwrap() >= c.sinr_threshold * (1.0 - 1e-4));
            assert!(max_target_ris_noise(&ch, &s, &ris).unwrap() <= c.max_target_noise * (1.0 + 1e-6));
            let (w, _) = worst_case_illumination(&ch, &ris, &bf).unwrap();
            assert!((w / t.objective - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn baselines() {
        let ch = desk_channel(4, 4, 9, 2, 2);
        let s = spec(9, 2);
        let c = cfg(2);
        let none = run_scheme(Scheme::NoRis, &ch, &c, &s, 4);
        let (bf, ris) = none.solution.unwrap();
        assert!(ris.is_off());
        assert_eq!(ris_output_power(&ch, &s, &ris, &bf).unwrap(), 0.0);
        assert_eq!(target_ris_noise(&ch, &s, &ris, 0).unwrap(), 0.0);
        assert_eq!(user_ris_noise(&ch, &s, &ris, 1).unwrap(), 0.0);

        let passive = run_scheme(Scheme::PassiveRis, &ch, &c, &s, 4);
        let (_, ris) = passive.solution.unwrap();
        assert!(ris.coefficients.iter().all(|z| z.norm() <= 1.0 + 1e-12));

        let random = run_scheme(Scheme::RandomRis, &ch, &c, &s, 4);
        assert_eq!(random.records.len(), 1);
        assert!(random.solution.unwrap().1.coefficients.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn unattainable_threshold_marks_realization() {
        let ch = desk_channel(5, 2, 4, 1, 1);
        let c = DesignConfig {
            total_power: 1e-9,
            sinr_threshold: 1e9,
            ..cfg(2)
        };
        let t = run_scheme(Scheme::Hybrid, &ch, &c, &spec(4, 1), 5);
        assert_eq!(t.status, TraceStatus::InfeasibleRealization);
        assert!(t.solution.is_none());
    }
}
