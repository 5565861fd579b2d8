//! Hybrid-RIS state and the scalar performance metrics: user SINR, target
//! illumination, RIS noise at users and targets, RIS output power, and the
//! closed-form bound on that output power.
//!
//! Channel convention: the DFBS signal `x` reaches user `k` as `h_k^H x` with
//! `h_k^H = h_bu,k^H + h_ru,k^H diag(ω) H_br`, and target `m` as `g_m^H x`
//! with the same structure.

use num_complex::Complex64;

use crate::channel::ChannelSet;
use crate::error::{IsacError, Result};
use crate::linalg::{CMat, CVec, ZERO};
use crate::sdp::SolverOptions;

const MODULUS_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HybridRisSpec {
    /// Element count `N`.
    pub elements: usize,
    /// Active elements are indices `0..active`.
    pub active: usize,
    /// Maximum active amplitude gain (linear).
    pub max_gain: f64,
    /// Noise power per active element, mW.
    pub noise_power: f64,
}

impl HybridRisSpec {
    pub fn validate(&self) -> Result<()> {
        if self.active > self.elements {
            return Err(IsacError::validation(format!(
                "{} active elements exceed N = {}",
                self.active, self.elements
            )));
        }
        if self.active > 0 && !(self.max_gain >= 1.0) {
            return Err(IsacError::validation("active gain must be at least 1"));
        }
        if !(self.noise_power >= 0.0) || !self.noise_power.is_finite() || !self.max_gain.is_finite() {
            return Err(IsacError::validation("RIS noise power and gain must be finite and nonnegative"));
        }
        Ok(())
    }

    pub fn is_active(&self, i: usize) -> bool {
        i < self.active
    }

    /// Same surface with every element passive.
    pub fn passive(&self) -> HybridRisSpec {
        HybridRisSpec {
            active: 0,
            ..*self
        }
    }

    /// Squared modulus cap of element `i`.
    pub fn modulus_cap_sq(&self, i: usize) -> f64 {
        if self.is_active(i) {
            self.max_gain * self.max_gain
        } else {
            1.0
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RisState {
    pub coefficients: CVec,
}

impl RisState {
    pub fn new(coefficients: CVec) -> Self {
        RisState { coefficients }
    }

    /// The all-zero state used for the no-RIS baseline.
    pub fn off(n: usize) -> Self {
        RisState {
            coefficients: CVec::zeros(n),
        }
    }

    pub fn is_off(&self) -> bool {
        self.coefficients.iter().all(|z| *z == ZERO)
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Checks the modulus constraints. The off state is accepted.
    pub fn validate(&self, spec: &HybridRisSpec) -> Result<()> {
        if self.len() != spec.elements {
            return Err(IsacError::validation(format!(
                "RIS state has {} entries, surface has {}",
                self.len(),
                spec.elements
            )));
        }
        if self.is_off() {
            return Ok(());
        }
        for (i, z) in self.coefficients.iter().enumerate() {
            let r = z.norm();
            let ok = if spec.is_active(i) {
                r <= spec.max_gain + MODULUS_TOL
            } else {
                (r - 1.0).abs() <= MODULUS_TOL
            };
            if !ok {
                return Err(IsacError::validation(format!("element {i} has modulus {r}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BeamformerSet {
    /// `M×K`, column `k` serves user `k`.
    pub comm: CMat,
    /// `M×M` sensing beamformer.
    pub sensing: CMat,
}

impl BeamformerSet {
    pub fn covariance(&self) -> CMat {
        &self.comm * self.comm.adjoint() + &self.sensing * self.sensing.adjoint()
    }

    pub fn total_power(&self) -> f64 {
        self.comm.norm_squared() + self.sensing.norm_squared()
    }
}

#[derive(Clone, Debug)]
pub struct DesignConfig {
    /// Total DFBS power `P_t`, mW.
    pub total_power: f64,
    /// SINR threshold `Γ`, linear.
    pub sinr_threshold: f64,
    /// Cap `r_max` on RIS noise at each target, mW.
    pub max_target_noise: f64,
    /// Receiver noise `σ²`, mW.
    pub receiver_noise: f64,
    /// RIS power budget, mW. Only compared against the bound.
    pub ris_power_budget: f64,
    pub randomizations: usize,
    pub max_iterations: usize,
    pub convergence_tolerance: f64,
    pub solver: SolverOptions,
}

impl Default for DesignConfig {
    fn default() -> Self {
        DesignConfig {
            total_power: 16.0,
            sinr_threshold: 10f64.powf(0.5),
            max_target_noise: 1e-9,
            receiver_noise: 10f64.powf(-9.4),
            ris_power_budget: 1e3,
            randomizations: 200,
            max_iterations: 10,
            convergence_tolerance: 1e-3,
            solver: SolverOptions::default(),
        }
    }
}

impl DesignConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.total_power, self.sinr_threshold, self.receiver_noise, self.ris_power_budget];
        if positive.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(IsacError::validation("P_t, Γ, σ² and P_max must be positive and finite"));
        }
        if !(self.max_target_noise >= 0.0) {
            return Err(IsacError::validation("r_max must be nonnegative"));
        }
        if !(self.convergence_tolerance >= 0.0) {
            return Err(IsacError::validation("convergence tolerance must be nonnegative"));
        }
        Ok(())
    }
}

fn check_dims(ch: &ChannelSet, ris: &RisState) -> Result<()> {
    if ris.len() != ch.ris_elements() {
        return Err(IsacError::validation(format!(
            "RIS state has {} entries, channel has {}",
            ris.len(),
            ch.ris_elements()
        )));
    }
    Ok(())
}

fn check_index(kind: &str, i: usize, n: usize) -> Result<()> {
    if i >= n {
        return Err(IsacError::validation(format!("{kind} index {i} out of range ({n})")));
    }
    Ok(())
}

/// `direct + H_br^H diag(ω)^H reflect`, the vector whose adjoint is the
/// effective row channel.
fn cascade(ch: &ChannelSet, ris: &RisState, direct: &CVec, reflect: &CVec) -> CVec {
    let weighted = reflect.zip_map(&ris.coefficients, |r, w| r * w.conj());
    direct + ch.h_br.ad_mul(&weighted)
}

pub fn effective_user_channel(ch: &ChannelSet, ris: &RisState, k: usize) -> Result<CVec> {
    check_dims(ch, ris)?;
    check_index("user", k, ch.users())?;
    Ok(cascade(ch, ris, &ch.h_bu[k], &ch.h_ru[k]))
}

pub fn effective_target_channel(ch: &ChannelSet, ris: &RisState, m: usize) -> Result<CVec> {
    check_dims(ch, ris)?;
    check_index("target", m, ch.targets())?;
    Ok(cascade(ch, ris, &ch.g_bt[m], &ch.g_rt[m]))
}

/// `ν² Σ_{i∈A} |a_i|² |ω_i|²`.
fn amplified_noise(spec: &HybridRisSpec, ris: &RisState, a: &CVec) -> f64 {
    (0..spec.active.min(a.len()))
        .map(|i| a[i].norm_sqr() * ris.coefficients[i].norm_sqr())
        .sum::<f64>()
        * spec.noise_power
}

/// RIS noise power `z_k` at user `k`.
pub fn user_ris_noise(ch: &ChannelSet, spec: &HybridRisSpec, ris: &RisState, k: usize) -> Result<f64> {
    check_dims(ch, ris)?;
    check_index("user", k, ch.users())?;
    Ok(amplified_noise(spec, ris, &ch.h_ru[k]))
}

pub fn user_sinr(
    ch: &ChannelSet,
    spec: &HybridRisSpec,
    ris: &RisState,
    bf: &BeamformerSet,
    k: usize,
    noise: f64,
) -> Result<f64> {
    let h = effective_user_channel(ch, ris, k)?;
    let gain = |c: nalgebra::DVectorView<Complex64>| h.dotc(&c).norm_sqr();
    let mut signal = 0.0;
    let mut interference = 0.0;
    for (j, c) in bf.comm.column_iter().enumerate() {
        if j == k {
            signal = gain(c);
        } else {
            interference += gain(c);
        }
    }
    interference += bf.sensing.column_iter().map(gain).sum::<f64>();
    Ok(signal / (interference + amplified_noise(spec, ris, &ch.h_ru[k]) + noise))
}

/// Smallest SINR over users; `+∞` when there are none.
pub fn min_user_sinr(
    ch: &ChannelSet,
    spec: &HybridRisSpec,
    ris: &RisState,
    bf: &BeamformerSet,
    noise: f64,
) -> Result<f64> {
    (0..ch.users()).try_fold(f64::INFINITY, |acc, k| Ok(acc.min(user_sinr(ch, spec, ris, bf, k, noise)?)))
}

pub fn target_illumination(ch: &ChannelSet, ris: &RisState, bf: &BeamformerSet, m: usize) -> Result<f64> {
    let g = effective_target_channel(ch, ris, m)?;
    let p = bf.comm.ad_mul(&g).norm_squared() + bf.sensing.ad_mul(&g).norm_squared();
    Ok(p)
}

pub fn target_ris_noise(ch: &ChannelSet, spec: &HybridRisSpec, ris: &RisState, m: usize) -> Result<f64> {
    check_dims(ch, ris)?;
    check_index("target", m, ch.targets())?;
    Ok(amplified_noise(spec, ris, &ch.g_rt[m]))
}

/// Largest target RIS noise; zero when there are no targets.
pub fn max_target_ris_noise(ch: &ChannelSet, spec: &HybridRisSpec, ris: &RisState) -> Result<f64> {
    (0..ch.targets()).try_fold(0.0f64, |acc, m| Ok(acc.max(target_ris_noise(ch, spec, ris, m)?)))
}

/// Output power of the active elements,
/// `Σ_{i∈A} |ω_i|² (h_br,i^H R h_br,i + ν²)` with `h_br,i^H` row `i` of `H_br`.
pub fn ris_output_power(ch: &ChannelSet, spec: &HybridRisSpec, ris: &RisState, bf: &BeamformerSet) -> Result<f64> {
    check_dims(ch, ris)?;
    let mut total = 0.0;
    for i in 0..spec.active.min(ris.len()) {
        let w2 = ris.coefficients[i].norm_sqr();
        if w2 == 0.0 {
            continue;
        }
        let row = ch.h_br.row(i);
        let incident = (row * &bf.comm).norm_squared() + (row * &bf.sensing).norm_squared();
        total += w2 * (incident + spec.noise_power);
    }
    Ok(total)
}

/// `Lη²[ζ_br P_t (ρM+1)/(ρ+1) + ν²]`.
pub fn ris_power_bound(spec: &HybridRisSpec, zeta_br: f64, total_power: f64, rician: f64, antennas: usize) -> f64 {
    let spread = (rician * antennas as f64 + 1.0) / (rician + 1.0);
    spec.active as f64 * spec.max_gain * spec.max_gain * (zeta_br * total_power * spread + spec.noise_power)
}

/// Minimum illumination over targets and its first minimizing index.
pub fn worst_case_illumination(ch: &ChannelSet, ris: &RisState, bf: &BeamformerSet) -> Result<(f64, usize)> {
    if ch.targets() == 0 {
        return Err(IsacError::validation("no targets"));
    }
    let mut best = (f64::INFINITY, 0);
    for m in 0..ch.targets() {
        let p = target_illumination(ch, ris, bf, m)?;
        if p < best.0 {
            best = (p, m);
        }
    }
    Ok(best)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::channel::{random_geometry, synthesize, FadingParams, PlacementArea};
    use crate::rng::{complex_gaussian, complex_gaussian_mat, seeded, unit_phase};
    use rand::Rng;

    pub(crate) fn desk_channel(seed: u64, m: usize, n: usize, k: usize, t: usize) -> ChannelSet {
        let g = random_geometry([0.0; 3], [10.0, -8.0, 5.0], &PlacementArea::default(), k, t, m, n, seed);
        synthesize(&g, &FadingParams::default(), seed).unwrap()
    }

    pub(crate) fn random_state<R: Rng>(rng: &mut R, spec: &HybridRisSpec) -> RisState {
        RisState::new(CVec::from_fn(spec.elements, |i, _| {
            let r = if spec.is_active(i) {
                1.0 + (spec.max_gain - 1.0) * rng.random::<f64>()
            } else {
                1.0
            };
            unit_phase(rng) * r
        }))
    }

    fn spec(n: usize, l: usize) -> HybridRisSpec {
        HybridRisSpec {
            elements: n,
            active: l,
            max_gain: 10f64.sqrt(),
            noise_power: 1e-6,
        }
    }

    #[test]
    fn state_validation() {
        let s = spec(4, 2);
        let mut rng = seeded(1);
        let st = random_state(&mut rng, &s);
        assert!(st.validate(&s).is_ok());
        assert!(RisState::off(4).validate(&s).is_ok());
        let mut bad = st.clone();
        bad.coefficients[3] *= Complex64::new(1.1, 0.0);
        assert!(bad.validate(&s).is_err());
        let mut bad = st;
        bad.coefficients[0] = Complex64::new(4.0, 0.0);
        assert!(bad.validate(&s).is_err());
        assert!(HybridRisSpec { active: 5, ..s }.validate().is_err());
        assert!(HybridRisSpec { max_gain: 0.5, ..s }.validate().is_err());
    }

    #[test]
    fn off_state_leaves_direct_links() {
        let ch = desk_channel(2, 4, 9, 2, 2);
        let off = RisState::off(9);
        assert_eq!(effective_user_channel(&ch, &off, 1).unwrap(), ch.h_bu[1]);
        assert_eq!(effective_target_channel(&ch, &off, 0).unwrap(), ch.g_bt[0]);
        assert!(effective_user_channel(&ch, &off, 2).is_err());
        assert!(effective_user_channel(&ch, &RisState::off(4), 0).is_err());
    }

    #[test]
    fn cascade_matches_row_formula() {
        let ch = desk_channel(3, 4, 9, 1, 1);
        let s = spec(9, 3);
        let st = random_state(&mut seeded(4), &s);
        let h = effective_user_channel(&ch, &st, 0).unwrap();
        let diag = CMat::from_diagonal(&st.coefficients);
        let row = ch.h_bu[0].adjoint() + ch.h_ru[0].adjoint() * diag * &ch.h_br;
        assert!((h.adjoint() - &row).norm() < 1e-14 * (1.0 + row.norm()));
    }

    #[test]
    fn matched_filter_sinr() {
        let ch = desk_channel(5, 4, 9, 1, 1);
        let s = spec(9, 0);
        let off = RisState::off(9);
        let h = &ch.h_bu[0];
        let pt: f64 = 8.0;
        let c = h * Complex64::new(pt.sqrt() / h.norm(), 0.0);
        let bf = BeamformerSet {
            comm: CMat::from_columns(&[c]),
            sensing: CMat::zeros(4, 4),
        };
        let sigma = 1e-9;
        let g = user_sinr(&ch, &s, &off, &bf, 0, sigma).unwrap();
        assert!((g / (pt * h.norm_squared() / sigma) - 1.0).abs() < 1e-12);
        let zero = BeamformerSet {
            comm: CMat::zeros(4, 1),
            ..bf
        };
        assert_eq!(user_sinr(&ch, &s, &off, &zero, 0, sigma).unwrap(), 0.0);
    }

    #[test]
    fn sinr_ignores_common_phase() {
        let ch = desk_channel(6, 4, 9, 2, 2);
        let s = spec(9, 3);
        let mut rng = seeded(7);
        let st = random_state(&mut rng, &s);
        let bf = BeamformerSet {
            comm: complex_gaussian_mat(&mut rng, 4, 2),
            sensing: complex_gaussian_mat(&mut rng, 4, 4),
        };
        let ph = unit_phase(&mut rng);
        let rot = BeamformerSet {
            comm: &bf.comm * ph,
            sensing: &bf.sensing * ph,
        };
        for k in 0..2 {
            let a = user_sinr(&ch, &s, &st, &bf, k, 1e-9).unwrap();
            let b = user_sinr(&ch, &s, &st, &rot, k, 1e-9).unwrap();
            assert!((a - b).abs() <= 1e-12 * a);
        }
    }

    #[test]
    fn illumination_trivia() {
        let ch = desk_channel(8, 4, 9, 1, 2);
        let off = RisState::off(9);
        let eye = BeamformerSet {
            comm: CMat::zeros(4, 1),
            sensing: CMat::identity(4, 4),
        };
        for m in 0..2 {
            let p = target_illumination(&ch, &off, &eye, m).unwrap();
            assert!((p - ch.g_bt[m].norm_squared()).abs() < 1e-14 * p);
        }
        let (w, arg) = worst_case_illumination(&ch, &off, &eye).unwrap();
        let n0 = ch.g_bt[0].norm_squared();
        let n1 = ch.g_bt[1].norm_squared();
        assert_eq!(arg, if n1 < n0 { 1 } else { 0 });
        assert!((w - n0.min(n1)).abs() < 1e-14 * w);
        let zero = BeamformerSet {
            comm: CMat::zeros(4, 1),
            sensing: CMat::zeros(4, 4),
        };
        assert_eq!(target_illumination(&ch, &off, &zero, 0).unwrap(), 0.0);
    }

    #[test]
    fn noise_terms_vanish_without_active_elements() {
        let ch = desk_channel(9, 4, 9, 2, 2);
        let mut rng = seeded(10);
        let bf = BeamformerSet {
            comm: complex_gaussian_mat(&mut rng, 4, 2),
            sensing: complex_gaussian_mat(&mut rng, 4, 4),
        };
        let s0 = spec(9, 0);
        let st = random_state(&mut rng, &s0);
        assert_eq!(target_ris_noise(&ch, &s0, &st, 0).unwrap(), 0.0);
        assert_eq!(user_ris_noise(&ch, &s0, &st, 1).unwrap(), 0.0);
        assert_eq!(ris_output_power(&ch, &s0, &st, &bf).unwrap(), 0.0);
        let quiet = HybridRisSpec {
            noise_power: 0.0,
            ..spec(9, 4)
        };
        assert_eq!(target_ris_noise(&ch, &quiet, &random_state(&mut rng, &quiet), 1).unwrap(), 0.0);
        let s = spec(9, 4);
        let mut st = random_state(&mut rng, &s);
        for i in 0..4 {
            st.coefficients[i] = ZERO;
        }
        assert_eq!(ris_output_power(&ch, &s, &st, &bf).unwrap(), 0.0);
    }

    #[test]
    fn bound_special_cases() {
        let s = spec(16, 4);
        assert_eq!(ris_power_bound(&spec(16, 0), 1e-6, 8.0, 10.0, 8), 0.0);
        let b = ris_power_bound(&s, 1e-6, 8.0, 0.0, 8);
        assert!((b - 4.0 * 10.0 * (8e-6 + 1e-6)).abs() < 1e-15);
        // M = 1 makes the Rician spread factor one for any ρ
        assert!((ris_power_bound(&s, 1e-6, 8.0, 7.0, 1) - b).abs() < 1e-15);
    }

    /// Symbol-level oracle for the received user signal.
    #[test]
    fn sinr_monte_carlo() {
        let ch = desk_channel(11, 4, 9, 2, 1);
        let s = spec(9, 3);
        let mut rng = seeded(12);
        let st = random_state(&mut rng, &s);
        let bf = BeamformerSet {
            comm: complex_gaussian_mat(&mut rng, 4, 2),
            sensing: complex_gaussian_mat(&mut rng, 4, 4) * Complex64::new(0.3, 0.0),
        };
        let sigma: f64 = 1e-7;
        let k = 0;
        let h_row = ch.h_ru[k].adjoint() * CMat::from_diagonal(&st.coefficients);
        let h = effective_user_channel(&ch, &st, k).unwrap();
        let draws = 100_000;
        let (mut sig, mut rest) = (0.0, 0.0);
        for _ in 0..draws {
            let d = CVec::from_fn(2, |_, _| complex_gaussian(&mut rng));
            let t = CVec::from_fn(4, |_, _| complex_gaussian(&mut rng));
            let n = CVec::from_fn(9, |i, _| {
                if i < 3 {
                    complex_gaussian(&mut rng) * s.noise_power.sqrt()
                } else {
                    ZERO
                }
            });
            let rx_sig = h.dotc(&bf.comm.column(k)) * d[k];
            let interf = h.dotc(&bf.comm.column(1)) * d[1] + h.dotc(&(&bf.sensing * &t));
            let noise = (&h_row * &n)[0] + complex_gaussian(&mut rng) * sigma.sqrt();
            sig += rx_sig.norm_sqr();
            rest += (interf + noise).norm_sqr();
        }
        let est = sig / rest;
        let exact = user_sinr(&ch, &s, &st, &bf, k, sigma).unwrap();
        assert!((est / exact - 1.0).abs() < 0.02, "{est} vs {exact}");
    }

    #[test]
    fn bound_holds_for_isotropic_designs() {
        for seed in 0..20 {
            let ch = desk_channel(seed, 8, 16, 2, 2);
            let s = spec(16, 4);
            let mut rng = seeded(seed + 100);
            let mut st = random_state(&mut rng, &s);
            for i in 0..4 {
                st.coefficients[i] = unit_phase(&mut rng) * s.max_gain;
            }
            let raw = complex_gaussian_mat(&mut rng, 8, 10);
            let pt = 8.0;
            let scale = (pt / raw.norm_squared()).sqrt();
            let bf = BeamformerSet {
                comm: raw.columns(0, 2) * Complex64::new(scale, 0.0),
                sensing: {
                    let mut sm = CMat::zeros(8, 8);
                    sm.columns_mut(0, 8).copy_from(&(raw.columns(2, 8) * Complex64::new(scale, 0.0)));
                    sm
                },
            };
            assert!(bf.total_power() <= pt * (1.0 + 1e-12));
            let g = random_geometry([0.0; 3], [10.0, -8.0, 5.0], &PlacementArea::default(), 2, 2, 8, 16, seed);
            let zeta = crate::channel::dfbs_ris_gain(&g, &FadingParams::default()).unwrap();
            let p = ris_output_power(&ch, &s, &st, &bf).unwrap();
            assert!(p <= ris_power_bound(&s, zeta, pt, 10.0, 8));
        }
    }
}
