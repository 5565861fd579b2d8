//! Scenario geometry, array responses, pathloss, and seeded synthesis of every
//! link: DFBS→RIS (Rician), DFBS→user (Rayleigh), RIS→user (Rician),
//! DFBS→target and RIS→target (line of sight).
//!
//! The DFBS is a half-wavelength ULA along the y axis. The RIS is a
//! half-wavelength square UPA in the x–z plane, facing +y. Array phases
//! depend on direction cosines only, so the carrier never appears.

pub mod dump;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{IsacError, Result};
use crate::linalg::{CMat, CVec};
use crate::rng::{self, complex_gaussian_mat, complex_gaussian_vec, tag};

pub type Point3 = [f64; 3];

fn sub(a: &Point3, b: &Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn distance(a: &Point3, b: &Point3) -> f64 {
    let d = sub(a, b);
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// Unit vector from `from` towards `to`.
fn direction(from: &Point3, to: &Point3) -> Point3 {
    let d = sub(to, from);
    let n = distance(from, to);
    [d[0] / n, d[1] / n, d[2] / n]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioGeometry {
    pub dfbs: Point3,
    pub ris: Point3,
    pub users: Vec<Point3>,
    pub targets: Vec<Point3>,
    /// DFBS ULA size `M`.
    pub antennas: usize,
    /// RIS element count `N`, a perfect square.
    pub ris_elements: usize,
}

/// Integer square root when `n` is a perfect square.
pub fn exact_sqrt(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n).then_some(r)
}

impl ScenarioGeometry {
    pub fn validate(&self) -> Result<()> {
        if self.antennas == 0 {
            return Err(IsacError::validation("DFBS needs at least one antenna"));
        }
        if exact_sqrt(self.ris_elements).is_none() {
            return Err(IsacError::validation(format!(
                "RIS element count {} is not a perfect square",
                self.ris_elements
            )));
        }
        let mut points = vec![self.dfbs, self.ris];
        points.extend(self.users.iter().chain(&self.targets).copied());
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(IsacError::validation("non-finite position"));
        }
        let endpoints = [self.dfbs, self.ris];
        for a in &endpoints {
            for b in &points {
                if a != b && distance(a, b) <= 0.0 {
                    return Err(IsacError::validation("coincident terminals"));
                }
            }
        }
        if distance(&self.dfbs, &self.ris) <= 0.0 {
            return Err(IsacError::validation("DFBS and RIS coincide"));
        }
        for p in self.users.iter().chain(&self.targets) {
            if distance(p, &self.dfbs) <= 0.0 || distance(p, &self.ris) <= 0.0 {
                return Err(IsacError::validation("terminal coincides with DFBS or RIS"));
            }
        }
        Ok(())
    }

    pub fn ris_side(&self) -> usize {
        exact_sqrt(self.ris_elements).unwrap_or(0)
    }

    /// DFBS direction cosine along the array axis towards `p`.
    fn dfbs_cosine(&self, p: &Point3) -> f64 {
        direction(&self.dfbs, p)[1]
    }

    /// RIS direction cosines (horizontal x, vertical z) towards `p`.
    fn ris_cosines(&self, p: &Point3) -> (f64, f64) {
        let d = direction(&self.ris, p);
        (d[0], d[2])
    }

    pub fn dfbs_response(&self, p: &Point3) -> CVec {
        steering_ula(self.dfbs_cosine(p).asin(), self.antennas)
    }

    pub fn ris_response(&self, p: &Point3) -> CVec {
        let (u, v) = self.ris_cosines(p);
        steering_upa_cosines(u, v, self.ris_side())
    }
}

/// Rectangle in the `z = corner[2]` plane where users and targets are dropped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlacementArea {
    pub corner: Point3,
    pub width: f64,
    pub depth: f64,
}

impl Default for PlacementArea {
    fn default() -> Self {
        PlacementArea {
            corner: [5.0, -2.0, 0.0],
            width: 10.0,
            depth: 10.0,
        }
    }
}

impl PlacementArea {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point3 {
        [
            self.corner[0] + self.width * rng.random::<f64>(),
            self.corner[1] + self.depth * rng.random::<f64>(),
            self.corner[2],
        ]
    }
}

/// Drops `users` and `targets` uniformly over `area` using the stream of
/// `seed`.
pub fn random_geometry(
    dfbs: Point3,
    ris: Point3,
    area: &PlacementArea,
    users: usize,
    targets: usize,
    antennas: usize,
    ris_elements: usize,
    seed: u64,
) -> ScenarioGeometry {
    let mut rng = rng::derived(seed, &[tag::PLACEMENT]);
    let users = (0..users).map(|_| area.sample(&mut rng)).collect();
    let targets = (0..targets).map(|_| area.sample(&mut rng)).collect();
    ScenarioGeometry {
        dfbs,
        ris,
        users,
        targets,
        antennas,
        ris_elements,
    }
}

/// Log-distance pathloss `intercept + slope·log10(d)` dB.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathlossLaw {
    pub intercept_db: f64,
    pub slope: f64,
}

impl PathlossLaw {
    pub const DIRECT: PathlossLaw = PathlossLaw {
        intercept_db: 30.0,
        slope: 22.0,
    };
    pub const RIS: PathlossLaw = PathlossLaw {
        intercept_db: 30.0,
        slope: 35.0,
    };
}

/// Linear power gain `ζ = 10^(-(intercept + slope·log10 d)/10)`.
pub fn pathloss_linear(d: f64, law: PathlossLaw) -> Result<f64> {
    if !(d > 0.0) {
        return Err(IsacError::validation(format!("pathloss distance must be positive, got {d}")));
    }
    Ok(10f64.powf(-(law.intercept_db + law.slope * d.log10()) / 10.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FadingParams {
    pub rician_factor: f64,
    pub direct_law: PathlossLaw,
    pub ris_law: PathlossLaw,
}

impl Default for FadingParams {
    fn default() -> Self {
        FadingParams {
            rician_factor: 10.0,
            direct_law: PathlossLaw::DIRECT,
            ris_law: PathlossLaw::RIS,
        }
    }
}

impl FadingParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.direct_law.intercept_db,
            self.direct_law.slope,
            self.ris_law.intercept_db,
            self.ris_law.slope,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(IsacError::validation("pathloss law must be finite"));
        }
        if !(self.rician_factor >= 0.0) || !self.rician_factor.is_finite() {
            return Err(IsacError::validation("Rician factor must be finite and nonnegative"));
        }
        Ok(())
    }

    fn los_weight(&self) -> f64 {
        (self.rician_factor / (self.rician_factor + 1.0)).sqrt()
    }

    fn nlos_weight(&self) -> f64 {
        (1.0 / (self.rician_factor + 1.0)).sqrt()
    }
}

/// Half-wavelength ULA response, entry `m = exp(iπ m sin θ)`.
pub fn steering_ula(angle: f64, m: usize) -> CVec {
    let s = angle.sin();
    CVec::from_fn(m, |i, _| Complex64::from_polar(1.0, PI * i as f64 * s))
}

/// Half-wavelength square UPA response with `side²` entries, index
/// `p·side + q` for horizontal index `p` and vertical index `q`. Azimuth is
/// measured from broadside in the horizontal plane, elevation from it.
pub fn steering_upa(azimuth: f64, elevation: f64, side: usize) -> CVec {
    steering_upa_cosines(elevation.cos() * azimuth.sin(), elevation.sin(), side)
}

pub(crate) fn steering_upa_cosines(u: f64, v: f64, side: usize) -> CVec {
    CVec::from_fn(side * side, |idx, _| {
        let (p, q) = (idx / side, idx % side);
        Complex64::from_polar(1.0, PI * (p as f64 * u + q as f64 * v))
    })
}

/// Every channel block for one realization.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSet {
    /// `N×M`, DFBS→RIS.
    pub h_br: CMat,
    /// Per user, length `M`.
    pub h_bu: Vec<CVec>,
    /// Per user, length `N`.
    pub h_ru: Vec<CVec>,
    /// Per target, length `M`.
    pub g_bt: Vec<CVec>,
    /// Per target, length `N`.
    pub g_rt: Vec<CVec>,
}

impl ChannelSet {
    pub fn antennas(&self) -> usize {
        self.h_br.ncols()
    }

    pub fn ris_elements(&self) -> usize {
        self.h_br.nrows()
    }

    pub fn users(&self) -> usize {
        self.h_bu.len()
    }

    pub fn targets(&self) -> usize {
        self.g_bt.len()
    }

    pub fn validate(&self) -> Result<()> {
        let (n, m) = (self.ris_elements(), self.antennas());
        let ok = self.h_ru.len() == self.h_bu.len()
            && self.g_rt.len() == self.g_bt.len()
            && self.h_bu.iter().chain(&self.g_bt).all(|v| v.len() == m)
            && self.h_ru.iter().chain(&self.g_rt).all(|v| v.len() == n);
        if !ok {
            return Err(IsacError::validation("inconsistent channel dimensions"));
        }
        let finite = self.h_br.iter().chain(self.h_bu.iter().flatten()).chain(self.h_ru.iter().flatten())
            .chain(self.g_bt.iter().flatten()).chain(self.g_rt.iter().flatten())
            .all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite {
            return Err(IsacError::validation("non-finite channel entry"));
        }
        Ok(())
    }
}

/// Linear DFBS→RIS pathloss for `geometry`.
pub fn dfbs_ris_gain(geometry: &ScenarioGeometry, fading: &FadingParams) -> Result<f64> {
    pathloss_linear(distance(&geometry.dfbs, &geometry.ris), fading.ris_law)
}

pub fn synthesize(geometry: &ScenarioGeometry, fading: &FadingParams, seed: u64) -> Result<ChannelSet> {
    geometry.validate()?;
    fading.validate()?;
    let (m, n) = (geometry.antennas, geometry.ris_elements);
    let mut rng = rng::derived(seed, &[tag::CHANNEL]);
    let (los, nlos) = (
        Complex64::new(fading.los_weight(), 0.0),
        Complex64::new(fading.nlos_weight(), 0.0),
    );

    let zeta_br = dfbs_ris_gain(geometry, fading)?;
    let a_ris = geometry.ris_response(&geometry.dfbs);
    let a_bs = geometry.dfbs_response(&geometry.ris);
    let scatter = complex_gaussian_mat(&mut rng, n, m);
    let h_br = (&a_ris * a_bs.adjoint() * los + scatter * nlos) * Complex64::new(zeta_br.sqrt(), 0.0);

    let mut h_ru = Vec::with_capacity(geometry.users.len());
    let mut h_bu = Vec::with_capacity(geometry.users.len());
    for u in &geometry.users {
        let zeta = pathloss_linear(distance(&geometry.ris, u), fading.ris_law)?;
        let w = complex_gaussian_vec(&mut rng, n);
        h_ru.push((geometry.ris_response(u) * los + w * nlos) * Complex64::new(zeta.sqrt(), 0.0));
    }
    for u in &geometry.users {
        let zeta = pathloss_linear(distance(&geometry.dfbs, u), fading.direct_law)?;
        h_bu.push(complex_gaussian_vec(&mut rng, m) * Complex64::new(zeta.sqrt(), 0.0));
    }
    let mut g_bt = Vec::with_capacity(geometry.targets.len());
    let mut g_rt = Vec::with_capacity(geometry.targets.len());
    for t in &geometry.targets {
        let zb = pathloss_linear(distance(&geometry.dfbs, t), fading.direct_law)?;
        let zr = pathloss_linear(distance(&geometry.ris, t), fading.ris_law)?;
        g_bt.push(geometry.dfbs_response(t) * Complex64::new(zb.sqrt(), 0.0));
        g_rt.push(geometry.ris_response(t) * Complex64::new(zr.sqrt(), 0.0));
    }

    Ok(ChannelSet {
        h_br,
        h_bu,
        h_ru,
        g_bt,
        g_rt,
    })
}
