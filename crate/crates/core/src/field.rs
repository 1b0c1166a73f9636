//! Mode amplitudes of delta-coupled smearings and the smeared two-point
//! functions W, E = 2 Im W and H = 2 Re W, evaluated by momentum quadrature.
//!
//! Conventions. Positive-frequency modes are
//! u_k(t, x) = e^{i(k·x - ωt)} / sqrt(2ω(2π)ⁿ) and the amplitude of a smearing
//! f is f_k = -i ∫ f u_k*. For f = λ δ(t - t₀) F(x) this gives
//! f_k = -iλ N(k) e^{iωt₀} F̃(k), and the derivative coupling uses
//! ∫ δ'(t - t₀) h(t) dt = -h'(t₀), so a DeltaPrime amplitude is -iω times the
//! Delta amplitude (equivalently minus its t₀-derivative).
//!
//! Amplitudes are stored relative to the profile centre c: the stored value is
//! R(k) = f_k e^{ik·c}. Pairing two amplitudes restores the relative phase
//! e^{-ik·(c_g - c_f)}, or its angular average sinc(|k||c_g - c_f|) on a radial
//! grid.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{self, KGrid};
use crate::weyl::BilinearTable;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Pluggable mode model. Only Minkowski ships; curved backends would supply
/// their own dispersion and normalization.
pub trait ModeModel: Send + Sync + std::fmt::Debug {
    fn spatial_dimension(&self) -> usize;
    fn mass(&self) -> f64;
    fn omega(&self, k: f64) -> f64;
    /// N(k) = 1 / sqrt(2ω(2π)ⁿ)
    fn mode_normalization(&self, k: f64) -> f64;
    fn is_minkowski(&self) -> bool;
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpacetimeModel {
    dimension: usize,
    mass: f64,
    // curvature coupling ξ and scalar curvature R, both zero in flat space
    xi: f64,
    ricci: f64,
}

impl SpacetimeModel {
    pub fn minkowski(dimension: usize, mass: f64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidParameter("spatial dimension must be >= 1".into()));
        }
        if !(mass >= 0.0 && mass.is_finite()) {
            return Err(Error::InvalidParameter(format!("mass must be finite and >= 0, got {mass}")));
        }
        if dimension == 1 && mass == 0.0 {
            return Err(Error::MasslessOneDim);
        }
        Ok(Self { dimension, mass, xi: 0.0, ricci: 0.0 })
    }

    pub fn curvature_coupling(&self) -> f64 {
        self.xi
    }

    pub fn ricci_scalar(&self) -> f64 {
        self.ricci
    }
}

impl ModeModel for SpacetimeModel {
    fn spatial_dimension(&self) -> usize {
        self.dimension
    }

    fn mass(&self) -> f64 {
        self.mass
    }

    fn omega(&self, k: f64) -> f64 {
        (k * k + self.mass * self.mass).sqrt()
    }

    fn mode_normalization(&self, k: f64) -> f64 {
        1.0 / (2.0 * self.omega(k) * (2.0 * PI).powi(self.dimension as i32)).sqrt()
    }

    fn is_minkowski(&self) -> bool {
        true
    }
}

/// Radially tabulated Fourier profile: F̃(k) = e^{-ik·c} R(|k|) with R
/// linearly interpolated between increasing nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedProfile {
    center: Vec<f64>,
    k: Vec<f64>,
    values: Vec<Complex64>,
}

impl TabulatedProfile {
    pub fn new(center: Vec<f64>, k: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if k.len() < 2 || k.len() != values.len() {
            return Err(Error::InvalidParameter("tabulated profile needs >= 2 matching nodes".into()));
        }
        if k.windows(2).any(|w| !(w[1] > w[0])) || k[0] < 0.0 {
            return Err(Error::InvalidParameter("tabulated |k| nodes must be increasing and >= 0".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("tabulated values must be finite".into()));
        }
        Ok(Self { center, k, values })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn nodes(&self) -> &[f64] {
        &self.k
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn interpolate(&self, k: f64) -> Result<Complex64> {
        let (lo, hi) = (self.k[0], *self.k.last().unwrap());
        let slack = 1e-12 * hi;
        if !(k >= lo - slack && k <= hi + slack) {
            return Err(Error::OutOfRange { k, lo, hi });
        }
        let k = k.clamp(lo, hi);
        let j = self.k.partition_point(|&x| x < k);
        if j < self.k.len() && self.k[j] == k {
            return Ok(self.values[j]);
        }
        let (k0, k1) = (self.k[j - 1], self.k[j]);
        let t = (k - k0) / (k1 - k0);
        Ok(self.values[j - 1] * (1.0 - t) + self.values[j] * t)
    }
}

/// Spatial profile F(x), normalized to unit integral for the analytic kinds.
#[derive(Debug, Clone, PartialEq)]
pub enum SpatialProfile {
    Gaussian { center: Vec<f64>, width: f64 },
    /// F ∝ exp(-1 / (1 - r²/R²)) inside the ball of radius R
    CompactBump { center: Vec<f64>, radius: f64 },
    TabulatedFourier(TabulatedProfile),
}

impl SpatialProfile {
    pub fn gaussian(center: Vec<f64>, width: f64) -> Self {
        SpatialProfile::Gaussian { center, width }
    }

    pub fn bump(center: Vec<f64>, radius: f64) -> Self {
        SpatialProfile::CompactBump { center, radius }
    }

    pub fn center(&self) -> &[f64] {
        match self {
            SpatialProfile::Gaussian { center, .. } | SpatialProfile::CompactBump { center, .. } => center,
            SpatialProfile::TabulatedFourier(t) => t.center(),
        }
    }

    pub fn validate(&self, dimension: usize) -> Result<()> {
        if self.center().len() != dimension {
            return Err(Error::InvalidParameter(format!(
                "profile centre has {} components, model has {dimension}",
                self.center().len()
            )));
        }
        if self.center().iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("profile centre must be finite".into()));
        }
        match self {
            SpatialProfile::Gaussian { width, .. } if !(*width > 0.0 && width.is_finite()) => {
                Err(Error::InvalidParameter(format!("Gaussian width must be > 0, got {width}")))
            }
            SpatialProfile::CompactBump { radius, .. } if !(*radius > 0.0 && radius.is_finite()) => {
                Err(Error::InvalidParameter(format!("bump radius must be > 0, got {radius}")))
            }
            SpatialProfile::CompactBump { .. } if dimension != 1 && dimension != 3 => Err(Error::Unsupported(
                "compact bump transforms are implemented for 1 and 3 spatial dimensions".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Transform with the centre phase removed: F̃(k) e^{ik·c}, a function of |k|.
    pub fn radial_transform(&self, k: f64, dimension: usize) -> Result<Complex64> {
        match self {
            SpatialProfile::Gaussian { width, .. } => Ok((-0.5 * width * width * k * k).exp().into()),
            SpatialProfile::CompactBump { radius, .. } => Ok(bump_transform(k * radius, dimension)?.into()),
            SpatialProfile::TabulatedFourier(t) => t.interpolate(k),
        }
    }

    /// Rough spatial extent used to size quadrature grids.
    pub fn extent(&self) -> f64 {
        match self {
            SpatialProfile::Gaussian { width, .. } => 6.0 * width,
            SpatialProfile::CompactBump { radius, .. } => *radius,
            SpatialProfile::TabulatedFourier(_) => 0.0,
        }
    }

    /// Default momentum cutoff resolving this profile.
    pub fn default_cutoff(&self) -> Option<f64> {
        match self {
            SpatialProfile::Gaussian { width, .. } => Some(12.0 / width),
            SpatialProfile::CompactBump { radius, .. } => Some(200.0 / radius),
            SpatialProfile::TabulatedFourier(_) => None,
        }
    }
}

/// F̃(k) = ∫dⁿx F(x) e^{-ik·x}.
pub fn spatial_profile_fourier(profile: &SpatialProfile, k: &[f64]) -> Result<Complex64> {
    profile.validate(k.len())?;
    let kmag = k.iter().map(|x| x * x).sum::<f64>().sqrt();
    let phase: f64 = k.iter().zip(profile.center()).map(|(a, b)| a * b).sum();
    Ok(Complex64::from_polar(1.0, -phase) * profile.radial_transform(kmag, k.len())?)
}

fn bump(u: f64) -> f64 {
    if u >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

// normalization integral of the unit-radius bump in n dimensions
fn bump_norm(dimension: usize) -> f64 {
    static N1: OnceLock<f64> = OnceLock::new();
    static N3: OnceLock<f64> = OnceLock::new();
    match dimension {
        1 => *N1.get_or_init(|| 2.0 * grid::integrate(0.0, 1.0, 32, bump)),
        _ => *N3.get_or_init(|| 4.0 * PI * grid::integrate(0.0, 1.0, 32, |u| u * u * bump(u))),
    }
}

// transform of the unit-radius normalized bump at dimensionless frequency q = kR
fn bump_transform(q: f64, dimension: usize) -> Result<f64> {
    // about three radians of oscillation per 16-node panel
    let panels = 16usize.max((q / 3.0).ceil() as usize);
    match dimension {
        1 => Ok(2.0 * grid::integrate(0.0, 1.0, panels, |u| bump(u) * (q * u).cos()) / bump_norm(1)),
        3 => Ok(4.0 * PI * grid::integrate(0.0, 1.0, panels, |u| u * u * bump(u) * sinc(q * u)) / bump_norm(3)),
        n => Err(Error::Unsupported(format!("compact bump in {n} dimensions"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TemporalKind {
    Delta(f64),
    DeltaPrime(f64),
}

impl TemporalKind {
    pub fn time(&self) -> f64 {
        match *self {
            TemporalKind::Delta(t) | TemporalKind::DeltaPrime(t) => t,
        }
    }
}

/// λ χ(t) F(x) with χ a delta or delta-derivative at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct SmearingSpec {
    pub coupling: f64,
    pub temporal: TemporalKind,
    pub profile: SpatialProfile,
}

impl SmearingSpec {
    pub fn new(coupling: f64, temporal: TemporalKind, profile: SpatialProfile) -> Self {
        Self { coupling, temporal, profile }
    }

    pub fn with_coupling(&self, coupling: f64) -> Self {
        Self { coupling, ..self.clone() }
    }

    pub fn validate(&self, dimension: usize) -> Result<()> {
        if !self.coupling.is_finite() {
            return Err(Error::InvalidParameter("coupling must be finite".into()));
        }
        if !self.temporal.time().is_finite() {
            return Err(Error::InvalidParameter("interaction time must be finite".into()));
        }
        self.profile.validate(dimension)
    }
}

/// A sum of delta-coupled terms sharing one centre, e.g. a decoding smearing
/// δ(t - t_B) G₁ + δ'(t - t_B) G₂.
#[derive(Debug, Clone, PartialEq)]
pub struct Smearing {
    pub terms: Vec<SmearingSpec>,
}

impl From<SmearingSpec> for Smearing {
    fn from(s: SmearingSpec) -> Self {
        Smearing { terms: vec![s] }
    }
}

impl Smearing {
    pub fn scaled(&self, factor: f64) -> Self {
        Smearing {
            terms: self
                .terms
                .iter()
                .map(|t| t.with_coupling(t.coupling * factor))
                .collect(),
        }
    }
}

/// Discretized f_k on a grid, stored relative to `center`.
#[derive(Debug, Clone)]
pub struct ModeAmplitude {
    grid: Arc<KGrid>,
    center: Vec<f64>,
    values: Vec<Complex64>,
}

impl ModeAmplitude {
    pub fn new(grid: Arc<KGrid>, center: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if center.len() != grid.dimension() {
            return Err(Error::GridMismatch("centre dimension differs from grid".into()));
        }
        Ok(Self { grid, center, values })
    }

    pub fn grid(&self) -> &Arc<KGrid> {
        &self.grid
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    /// Values relative to the centre, R(k) = f_k e^{ik·c}.
    pub fn reduced_values(&self) -> &[Complex64] {
        &self.values
    }

    /// f_k at node i. Radial grids carry no direction, so this is only
    /// defined for tensor and explicit grids.
    pub fn value(&self, i: usize) -> Result<Complex64> {
        if self.grid.is_radial() {
            return Err(Error::Unsupported("full amplitudes need a directional grid".into()));
        }
        let phase: f64 = self.grid.node(i).iter().zip(&self.center).map(|(k, c)| k * c).sum();
        Ok(self.values[i] * Complex64::from_polar(1.0, -phase))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            center: self.center.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Pointwise sum; amplitudes with different centres can only be added on
    /// directional grids.
    pub fn add(&self, other: &ModeAmplitude) -> Result<Self> {
        same_grid(self, other)?;
        if self.center == other.center {
            let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
            return Ok(Self { grid: self.grid.clone(), center: self.center.clone(), values });
        }
        if self.grid.is_radial() {
            return Err(Error::Unsupported("cannot add radial amplitudes with different centres".into()));
        }
        let values = (0..self.grid.len())
            .map(|i| {
                let phase: f64 = self
                    .grid
                    .node(i)
                    .iter()
                    .zip(other.center.iter().zip(&self.center))
                    .map(|(k, (co, cs))| k * (co - cs))
                    .sum();
                self.values[i] + other.values[i] * Complex64::from_polar(1.0, -phase)
            })
            .collect();
        Ok(Self { grid: self.grid.clone(), center: self.center.clone(), values })
    }
}

fn same_grid(f: &ModeAmplitude, g: &ModeAmplitude) -> Result<()> {
    if Arc::ptr_eq(&f.grid, &g.grid) || *f.grid == *g.grid {
        Ok(())
    } else {
        Err(Error::GridMismatch("amplitudes live on different grids".into()))
    }
}

pub fn mode_amplitude(model: &dyn ModeModel, smearing: &SmearingSpec, grid: &Arc<KGrid>) -> Result<ModeAmplitude> {
    let n = model.spatial_dimension();
    if grid.dimension() != n {
        return Err(Error::GridMismatch(format!("grid dimension {} vs model {n}", grid.dimension())));
    }
    smearing.validate(n)?;
    let lambda = smearing.coupling;
    let mut values = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let k = grid.magnitude(i);
        let omega = model.omega(k);
        let base = -I * lambda * model.mode_normalization(k) * smearing.profile.radial_transform(k, n)?;
        let v = match smearing.temporal {
            TemporalKind::Delta(t0) => base * Complex64::from_polar(1.0, omega * t0),
            TemporalKind::DeltaPrime(t0) => -I * omega * base * Complex64::from_polar(1.0, omega * t0),
        };
        values.push(if lambda == 0.0 { Complex64::new(0.0, 0.0) } else { v });
    }
    ModeAmplitude::new(grid.clone(), smearing.profile.center().to_vec(), values)
}

/// Amplitude of a composite smearing (sum of its terms).
pub fn smearing_amplitude(model: &dyn ModeModel, smearing: &Smearing, grid: &Arc<KGrid>) -> Result<ModeAmplitude> {
    let mut terms = smearing.terms.iter();
    let first = terms
        .next()
        .ok_or_else(|| Error::InvalidParameter("empty smearing".into()))?;
    let mut acc = mode_amplitude(model, first, grid)?;
    for t in terms {
        acc = acc.add(&mode_amplitude(model, t, grid)?)?;
    }
    Ok(acc)
}

/// W(f, g) = Σ_k w_k f_k* g_k.
pub fn wightman(f: &ModeAmplitude, g: &ModeAmplitude) -> Result<Complex64> {
    same_grid(f, g)?;
    let grid = &f.grid;
    let delta: Vec<f64> = g.center.iter().zip(&f.center).map(|(a, b)| a - b).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    if grid.is_radial() {
        let d = delta.iter().map(|x| x * x).sum::<f64>().sqrt();
        for i in 0..grid.len() {
            let kernel = if d == 0.0 { 1.0 } else { sinc(grid.magnitude(i) * d) };
            acc += f.values[i].conj() * g.values[i] * (grid.weight(i) * kernel);
        }
    } else if delta.iter().all(|&x| x == 0.0) {
        for i in 0..grid.len() {
            acc += f.values[i].conj() * g.values[i] * grid.weight(i);
        }
    } else {
        for i in 0..grid.len() {
            let phase: f64 = grid.node(i).iter().zip(&delta).map(|(k, d)| k * d).sum();
            acc += f.values[i].conj() * g.values[i] * Complex64::from_polar(1.0, -phase) * grid.weight(i);
        }
    }
    Ok(acc)
}

/// E(f, g) = 2 Im W(f, g).
pub fn causal_propagator(f: &ModeAmplitude, g: &ModeAmplitude) -> Result<f64> {
    Ok(2.0 * wightman(f, g)?.im)
}

/// H(f, g) = 2 Re W(f, g).
pub fn hadamard(f: &ModeAmplitude, g: &ModeAmplitude) -> Result<f64> {
    Ok(2.0 * wightman(f, g)?.re)
}

/// Bilinear table over four amplitudes in the order f₁, f₂, g₁, g₂.
pub fn table_from_amplitudes(amps: &[ModeAmplitude; 4]) -> Result<BilinearTable> {
    let mut e = Matrix4::zeros();
    let mut h = Matrix4::zeros();
    for i in 0..4 {
        h[(i, i)] = 2.0 * wightman(&amps[i], &amps[i])?.re;
        for j in i + 1..4 {
            let w = wightman(&amps[i], &amps[j])?;
            e[(i, j)] = 2.0 * w.im;
            e[(j, i)] = -2.0 * w.im;
            h[(i, j)] = 2.0 * w.re;
            h[(j, i)] = 2.0 * w.re;
        }
    }
    BilinearTable::new(e, h)
}

pub fn build_bilinear_table(
    model: &dyn ModeModel,
    smearings: &[Smearing; 4],
    grid: &Arc<KGrid>,
) -> Result<BilinearTable> {
    let amps = [
        smearing_amplitude(model, &smearings[0], grid)?,
        smearing_amplitude(model, &smearings[1], grid)?,
        smearing_amplitude(model, &smearings[2], grid)?,
        smearing_amplitude(model, &smearings[3], grid)?,
    ];
    table_from_amplitudes(&amps)
}

/// Grid sized for a set of smearings: cutoff from the narrowest analytic
/// profile (or the tabulated range), panel count from the largest relative
/// phase ω·Δt + k·Δx the integrand can accumulate. Radial in three
/// dimensions, tensor otherwise.
pub fn default_grid(model: &dyn ModeModel, smearings: &[&Smearing]) -> Result<KGrid> {
    let specs: Vec<&SmearingSpec> = smearings.iter().flat_map(|s| s.terms.iter()).collect();
    if specs.is_empty() {
        return Err(Error::InvalidParameter("no smearings to size a grid for".into()));
    }
    let tab_max = specs
        .iter()
        .filter_map(|s| match &s.profile {
            SpatialProfile::TabulatedFourier(t) => t.nodes().last().copied(),
            _ => None,
        })
        .fold(f64::INFINITY, f64::min);
    let cutoff = if tab_max.is_finite() {
        tab_max
    } else {
        specs
            .iter()
            .filter_map(|s| s.profile.default_cutoff())
            .fold(0.0, f64::max)
    };
    let times: Vec<f64> = specs.iter().map(|s| s.temporal.time()).collect();
    let dt = times.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
        - times.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let mut dx: f64 = 0.0;
    for a in &specs {
        for b in &specs {
            let d: f64 = a
                .profile
                .center()
                .iter()
                .zip(b.profile.center())
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            dx = dx.max(d);
        }
    }
    let extent = specs.iter().map(|s| s.profile.extent()).fold(0.0, f64::max);
    let span = dt + dx + 2.0 * extent;
    let panels = 16usize.max((cutoff * span / 3.0).ceil() as usize);
    let points = panels * grid::PANEL_NODES;
    if model.spatial_dimension() == 3 {
        KGrid::radial(cutoff, points)
    } else {
        KGrid::tensor(model.spatial_dimension(), cutoff, points)
    }
}
