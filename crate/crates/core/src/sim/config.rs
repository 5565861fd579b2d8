//! TOML configuration. Every field is optional; omitted fields take the
//! selected profile's value. Powers in the file are dB/dBm and are converted
//! to linear units here.
//!
//! ```toml
//! realizations = 20
//! seed = 1
//! schemes = ["hybrid", "passive", "random", "noris"]
//! output = "results.csv"
//!
//! [geometry]
//! dfbs = [0.0, 0.0, 0.0]
//! ris = [10.0, -8.0, 5.0]
//! area_corner = [5.0, -2.0, 0.0]
//! area_size = [10.0, 10.0]
//! antennas = 16
//! users = 2
//! targets = 4
//!
//! [fading]
//! rician_factor = 10.0
//! direct_pathloss = [30.0, 22.0]   # intercept dB, slope
//! ris_pathloss = [30.0, 35.0]
//!
//! [ris]
//! elements = 100
//! active = 20
//! gain_db = 10.0                   # amplitude cap 10^(gain_db/20)
//! noise_dbm = -60.0
//!
//! [design]
//! sinr_db = 5.0
//! receiver_noise_dbm = -94.0
//! max_target_noise_dbm = -90.0
//! power_per_antenna_db = 0.0       # P_t = M·10^(x/10) mW
//! ris_power_budget_dbm = 0.0
//! randomizations = 200
//! iterations = 10
//! tolerance = 1e-3
//!
//! [sweep]
//! variable = "pt"                  # pt | eta | L | gamma
//! values = [-5.0, 0.0, 5.0, 10.0]
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::channel::{FadingParams, PathlossLaw, PlacementArea, Point3};
use crate::error::{IsacError, Result};
use crate::optimizer::Scheme;
use crate::sdp::SolverOptions;
use crate::sysmodel::{DesignConfig, HybridRisSpec};
use crate::units::{db_to_linear, dbm_to_mw, gain_db_to_amplitude};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Profile {
    Desk,
    #[default]
    Paper,
}

impl FromStr for Profile {
    type Err = IsacError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Profile::Desk),
            "paper" => Ok(Profile::Paper),
            other => Err(IsacError::validation(format!("unknown profile `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SweepVariable {
    /// `P_t/M` in dB.
    Pt,
    /// Active gain in dB.
    Eta,
    /// Number of active elements.
    L,
    /// SINR threshold in dB.
    Gamma,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::Pt => "pt",
            SweepVariable::Eta => "eta",
            SweepVariable::L => "L",
            SweepVariable::Gamma => "gamma",
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepVariable {
    type Err = IsacError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pt" => Ok(SweepVariable::Pt),
            "eta" => Ok(SweepVariable::Eta),
            "L" | "l" => Ok(SweepVariable::L),
            "gamma" => Ok(SweepVariable::Gamma),
            other => Err(IsacError::validation(format!("unknown sweep variable `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeometryConfig {
    pub dfbs: Point3,
    pub ris: Point3,
    pub area: PlacementArea,
    pub antennas: usize,
    pub users: usize,
    pub targets: usize,
}

/// Design parameters in the units they are written in.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignParams {
    pub sinr_db: f64,
    pub receiver_noise_dbm: f64,
    pub max_target_noise_dbm: f64,
    pub power_per_antenna_db: f64,
    pub ris_power_budget_dbm: f64,
    pub randomizations: usize,
    pub iterations: usize,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RisParams {
    pub elements: usize,
    pub active: usize,
    pub gain_db: f64,
    pub noise_dbm: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationConfig {
    pub geometry: GeometryConfig,
    pub fading: FadingParams,
    pub ris: RisParams,
    pub design: DesignParams,
    pub sweep: SweepConfig,
    pub realizations: usize,
    pub seed: u64,
    pub schemes: Vec<Scheme>,
    pub output: PathBuf,
    pub profile: Profile,
}

/// Sweep points used when a variable is selected without explicit values.
pub fn default_sweep_values(variable: SweepVariable, profile: Profile) -> Vec<f64> {
    match (variable, profile) {
        (SweepVariable::Pt, _) => vec![-5.0, 0.0, 5.0, 10.0],
        (SweepVariable::Eta, Profile::Desk) => vec![0.0, 5.0, 10.0],
        (SweepVariable::Eta, Profile::Paper) => vec![0.0, 5.0, 10.0, 15.0, 20.0],
        (SweepVariable::L, Profile::Desk) => vec![0.0, 4.0, 8.0],
        (SweepVariable::L, Profile::Paper) => vec![0.0, 20.0, 40.0, 60.0, 80.0, 100.0],
        (SweepVariable::Gamma, _) => vec![0.0, 5.0, 10.0, 15.0],
    }
}

impl SimulationConfig {
    pub fn profile_defaults(profile: Profile) -> Self {
        let desk = profile == Profile::Desk;
        SimulationConfig {
            geometry: GeometryConfig {
                dfbs: [0.0, 0.0, 0.0],
                ris: [10.0, -8.0, 5.0],
                area: PlacementArea::default(),
                antennas: if desk { 8 } else { 16 },
                users: 2,
                targets: if desk { 2 } else { 4 },
            },
            fading: FadingParams::default(),
            ris: RisParams {
                elements: if desk { 16 } else { 100 },
                active: if desk { 4 } else { 20 },
                gain_db: 10.0,
                noise_dbm: -60.0,
            },
            design: DesignParams {
                sinr_db: 5.0,
                receiver_noise_dbm: -94.0,
                max_target_noise_dbm: -90.0,
                power_per_antenna_db: 0.0,
                ris_power_budget_dbm: 0.0,
                randomizations: 200,
                iterations: if desk { 5 } else { 10 },
                tolerance: 1e-3,
            },
            sweep: SweepConfig {
                variable: SweepVariable::Pt,
                values: default_sweep_values(SweepVariable::Pt, profile),
            },
            realizations: if desk { 20 } else { 100 },
            seed: 1,
            schemes: Scheme::ALL.to_vec(),
            output: PathBuf::from("results.csv"),
            profile,
        }
    }

    pub fn from_toml_str(text: &str, profile: Profile) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(1, |s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            IsacError::Parse {
                line,
                message: e.message().to_string(),
            }
        })?;
        let mut cfg = Self::profile_defaults(profile);
        raw.apply(&mut cfg)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Selects a different sweep variable; its values come from the file
    /// when it already sweeps that variable, else from the profile.
    pub fn with_sweep(mut self, variable: SweepVariable) -> Result<Self> {
        if self.sweep.variable != variable {
            self.sweep = SweepConfig {
                variable,
                values: default_sweep_values(variable, self.profile),
            };
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let range = |field: &str, message: &str| IsacError::Range {
            field: field.to_string(),
            message: message.to_string(),
        };
        let finite = [
            ("ris.gain_db", self.ris.gain_db),
            ("ris.noise_dbm", self.ris.noise_dbm),
            ("design.sinr_db", self.design.sinr_db),
            ("design.receiver_noise_dbm", self.design.receiver_noise_dbm),
            ("design.max_target_noise_dbm", self.design.max_target_noise_dbm),
            ("design.power_per_antenna_db", self.design.power_per_antenna_db),
            ("design.ris_power_budget_dbm", self.design.ris_power_budget_dbm),
            ("fading.rician_factor", self.fading.rician_factor),
        ];
        for (field, v) in finite {
            if !v.is_finite() {
                return Err(range(field, "must be finite"));
            }
        }
        if self.realizations == 0 {
            return Err(range("realizations", "must be at least 1"));
        }
        if self.geometry.antennas == 0 {
            return Err(range("geometry.antennas", "must be at least 1"));
        }
        if self.geometry.targets == 0 {
            return Err(range("geometry.targets", "must be at least 1"));
        }
        if crate::channel::exact_sqrt(self.ris.elements).is_none() || self.ris.elements == 0 {
            return Err(range("ris.elements", "must be a positive perfect square"));
        }
        if self.ris.active > self.ris.elements {
            return Err(range("ris.active", "cannot exceed ris.elements"));
        }
        if self.ris.gain_db < 0.0 {
            return Err(range("ris.gain_db", "active gain below 0 dB would attenuate"));
        }
        if self.fading.rician_factor < 0.0 {
            return Err(range("fading.rician_factor", "must be nonnegative"));
        }
        if !(self.geometry.area.width > 0.0 && self.geometry.area.depth > 0.0) {
            return Err(range("geometry.area_size", "must be positive"));
        }
        if self.design.tolerance < 0.0 || !self.design.tolerance.is_finite() {
            return Err(range("design.tolerance", "must be finite and nonnegative"));
        }
        if self.design.iterations == 0 {
            return Err(range("design.iterations", "must be at least 1"));
        }
        if self.schemes.is_empty() {
            return Err(range("schemes", "at least one scheme is required"));
        }
        let v = &self.sweep.values;
        if v.is_empty() {
            return Err(range("sweep.values", "must not be empty"));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(range("sweep.values", "must be finite"));
        }
        if v.windows(2).any(|w| w[1] <= w[0]) {
            return Err(range("sweep.values", "must be strictly increasing"));
        }
        match self.sweep.variable {
            SweepVariable::L => {
                if v.iter().any(|x| x.fract() != 0.0 || *x < 0.0 || *x > self.ris.elements as f64) {
                    return Err(range("sweep.values", "L values must be integers in 0..=N"));
                }
            }
            SweepVariable::Eta => {
                if v.iter().any(|x| *x < 0.0) {
                    return Err(range("sweep.values", "gain values must be at least 0 dB"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn scheme_index(&self, s: Scheme) -> usize {
        self.schemes.iter().position(|x| *x == s).unwrap_or(usize::MAX)
    }

    /// Surface model and design settings at one sweep point, in linear units.
    pub fn cell(&self, value: f64) -> (HybridRisSpec, DesignConfig) {
        let mut ris = self.ris.clone();
        let mut design = self.design.clone();
        match self.sweep.variable {
            SweepVariable::Pt => design.power_per_antenna_db = value,
            SweepVariable::Eta => ris.gain_db = value,
            SweepVariable::L => ris.active = value as usize,
            SweepVariable::Gamma => design.sinr_db = value,
        }
        let spec = HybridRisSpec {
            elements: ris.elements,
            active: ris.active,
            max_gain: gain_db_to_amplitude(ris.gain_db),
            noise_power: dbm_to_mw(ris.noise_dbm),
        };
        let cfg = DesignConfig {
            total_power: self.geometry.antennas as f64 * db_to_linear(design.power_per_antenna_db),
            sinr_threshold: db_to_linear(design.sinr_db),
            max_target_noise: dbm_to_mw(design.max_target_noise_dbm),
            receiver_noise: dbm_to_mw(design.receiver_noise_dbm),
            ris_power_budget: dbm_to_mw(design.ris_power_budget_dbm),
            randomizations: design.randomizations,
            max_iterations: design.iterations,
            convergence_tolerance: design.tolerance,
            solver: SolverOptions::default(),
        };
        (spec, cfg)
    }

    /// Sweep values whose RIS output-power bound exceeds the budget, i.e.
    /// where dropping the budget constraint is not justified.
    pub fn budget_not_redundant(&self) -> Result<Vec<f64>> {
        let zeta = crate::channel::pathloss_linear(
            crate::channel::distance(&self.geometry.dfbs, &self.geometry.ris),
            self.fading.ris_law,
        )?;
        Ok(self
            .sweep
            .values
            .iter()
            .copied()
            .filter(|&v| {
                let (spec, cfg) = self.cell(v);
                let bound = crate::sysmodel::ris_power_bound(
                    &spec,
                    zeta,
                    cfg.total_power,
                    self.fading.rician_factor,
                    self.geometry.antennas,
                );
                bound > cfg.ris_power_budget
            })
            .collect())
    }
}

pub fn load_config(path: &Path, profile: Profile) -> Result<SimulationConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| IsacError::io(path, e))?;
    SimulationConfig::from_toml_str(&text, profile)
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    realizations: Option<usize>,
    seed: Option<u64>,
    schemes: Option<Vec<String>>,
    output: Option<PathBuf>,
    geometry: Option<RawGeometry>,
    fading: Option<RawFading>,
    ris: Option<RawRis>,
    design: Option<RawDesign>,
    sweep: Option<RawSweep>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    dfbs: Option<Point3>,
    ris: Option<Point3>,
    area_corner: Option<Point3>,
    area_size: Option<[f64; 2]>,
    antennas: Option<usize>,
    users: Option<usize>,
    targets: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawFading {
    rician_factor: Option<f64>,
    direct_pathloss: Option<[f64; 2]>,
    ris_pathloss: Option<[f64; 2]>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawRis {
    elements: Option<usize>,
    active: Option<usize>,
    gain_db: Option<f64>,
    noise_dbm: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawDesign {
    sinr_db: Option<f64>,
    receiver_noise_dbm: Option<f64>,
    max_target_noise_dbm: Option<f64>,
    power_per_antenna_db: Option<f64>,
    ris_power_budget_dbm: Option<f64>,
    randomizations: Option<usize>,
    iterations: Option<usize>,
    tolerance: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    variable: Option<String>,
    values: Option<Vec<f64>>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn law([intercept_db, slope]: [f64; 2]) -> PathlossLaw {
    PathlossLaw { intercept_db, slope }
}

impl RawConfig {
    fn apply(self, cfg: &mut SimulationConfig) -> Result<()> {
        set(&mut cfg.realizations, self.realizations);
        set(&mut cfg.seed, self.seed);
        set(&mut cfg.output, self.output);
        if let Some(names) = self.schemes {
            cfg.schemes = names
                .iter()
                .map(|n| {
                    n.parse().map_err(|_| IsacError::Range {
                        field: "schemes".into(),
                        message: format!("unknown scheme `{n}`"),
                    })
                })
                .collect::<Result<_>>()?;
        }
        if let Some(g) = self.geometry {
            set(&mut cfg.geometry.dfbs, g.dfbs);
            set(&mut cfg.geometry.ris, g.ris);
            set(&mut cfg.geometry.area.corner, g.area_corner);
            if let Some([w, d]) = g.area_size {
                cfg.geometry.area.width = w;
                cfg.geometry.area.depth = d;
            }
            set(&mut cfg.geometry.antennas, g.antennas);
            set(&mut cfg.geometry.users, g.users);
            set(&mut cfg.geometry.targets, g.targets);
        }
        if let Some(f) = self.fading {
            set(&mut cfg.fading.rician_factor, f.rician_factor);
            set(&mut cfg.fading.direct_law, f.direct_pathloss.map(law));
            set(&mut cfg.fading.ris_law, f.ris_pathloss.map(law));
        }
        if let Some(r) = self.ris {
            set(&mut cfg.ris.elements, r.elements);
            set(&mut cfg.ris.active, r.active);
            set(&mut cfg.ris.gain_db, r.gain_db);
            set(&mut cfg.ris.noise_dbm, r.noise_dbm);
        }
        if let Some(d) = self.design {
            let p = &mut cfg.design;
            set(&mut p.sinr_db, d.sinr_db);
            set(&mut p.receiver_noise_dbm, d.receiver_noise_dbm);
            set(&mut p.max_target_noise_dbm, d.max_target_noise_dbm);
            set(&mut p.power_per_antenna_db, d.power_per_antenna_db);
            set(&mut p.ris_power_budget_dbm, d.ris_power_budget_dbm);
            set(&mut p.randomizations, d.randomizations);
            set(&mut p.iterations, d.iterations);
            set(&mut p.tolerance, d.tolerance);
        }
        if let Some(s) = self.sweep {
            if let Some(v) = s.variable {
                cfg.sweep.variable = v.parse().map_err(|_| IsacError::Range {
                    field: "sweep.variable".into(),
                    message: format!("unknown sweep variable `{v}`"),
                })?;
                cfg.sweep.values = default_sweep_values(cfg.sweep.variable, cfg.profile);
            }
            set(&mut cfg.sweep.values, s.values);
        }
        Ok(())
    }
}
