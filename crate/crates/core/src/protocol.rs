//! Protocol conditions: fine-tuning of E(f₁, f₂), the strong-coupling
//! margin, Bob's decoding smearings and causal classification of supports.

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::Arc;

use num_complex::Complex64;

use crate::channel::ideal_table;
use crate::error::{Error, Result};
use crate::field::{
    causal_propagator, hadamard, wightman, ModeAmplitude, ModeModel, Smearing, SmearingSpec, SpatialProfile,
    TabulatedProfile, TemporalKind,
};
use crate::grid::{self, GridKind, KGrid};
use crate::weyl::{BilinearTable, F1, F2};

/// Margin E(f₁,f₂)²/W(f₂,f₂) below which the encoding is not considered
/// strongly coupled.
pub const DEFAULT_MARGIN_THRESHOLD: f64 = 100.0;
const MAX_BRANCH: u64 = 1 << 20;

/// Coupling-stripped bilinears of Alice's two smearings. With couplings
/// λ₁ = cλ₂ on f₁ and λ₂ on f₂:
/// W(f₁,f₁) = c²λ₂² w1, W(f₂,f₂) = λ₂² w2, E(f₁,f₂) = cλ₂² e, H(f₁,f₂) = cλ₂² h.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConditions {
    pub e: f64,
    pub w1: f64,
    pub w2: f64,
    pub h: f64,
    pub branch: u64,
}

impl ProtocolConditions {
    pub fn new(e: f64, w1: f64, w2: f64, h: f64, branch: u64) -> Result<Self> {
        if ![e, w1, w2, h].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParameter("protocol conditions must be finite".into()));
        }
        if w1 < 0.0 || w2 < 0.0 {
            return Err(Error::InvalidParameter(format!("W diagonals must be >= 0, got {w1}, {w2}")));
        }
        Ok(Self { e, w1, w2, h, branch })
    }

    /// Reads the stripped values off unit-coupling amplitudes of f₁ and f₂.
    pub fn from_amplitudes(f1: &ModeAmplitude, f2: &ModeAmplitude, branch: u64) -> Result<Self> {
        Self::new(
            causal_propagator(f1, f2)?,
            wightman(f1, f1)?.re,
            wightman(f2, f2)?.re,
            hadamard(f1, f2)?,
            branch,
        )
    }

    pub fn with_branch(&self, branch: u64) -> Self {
        Self { branch, ..*self }
    }

    /// E(f₁, f₂) the branch aims for. For e > 0 this is π/4 + 2πn; for
    /// e < 0 the positive-c solutions sit at π/4 - 2π(n + 1).
    pub fn target(&self) -> f64 {
        let n = self.branch as f64;
        if self.e > 0.0 {
            FRAC_PI_4 + 2.0 * PI * n
        } else {
            FRAC_PI_4 - 2.0 * PI * (n + 1.0)
        }
    }

    /// E(f₁,f₂)²/W(f₂,f₂) = c²λ₂²e²/w2.
    pub fn margin(&self, c: f64, lambda2: f64) -> f64 {
        let w22 = lambda2 * lambda2 * self.w2;
        let e12 = c * lambda2 * lambda2 * self.e;
        if w22 == 0.0 {
            f64::INFINITY
        } else {
            e12 * e12 / w22
        }
    }

    /// g = f table at ratio c and coupling λ₂.
    pub fn ideal_table(&self, c: f64, lambda2: f64) -> Result<BilinearTable> {
        let l2 = lambda2 * lambda2;
        ideal_table(c * c * l2 * self.w1, l2 * self.w2, c * l2 * self.e, c * l2 * self.h)
    }
}

/// c = target / (λ₂² e) for the configured branch.
pub fn solve_fine_tuning(cond: &ProtocolConditions, lambda2: f64) -> Result<f64> {
    if !(lambda2 > 0.0 && lambda2.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda2 must be > 0, got {lambda2}")));
    }
    if cond.e == 0.0 {
        return Err(Error::NoSolution);
    }
    let c = cond.target() / (lambda2 * lambda2 * cond.e);
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::NoSolution);
    }
    Ok(c)
}

/// Smallest branch whose fine-tuned c reaches the margin threshold.
pub fn solve_fine_tuning_auto(cond: &ProtocolConditions, lambda2: f64, threshold: f64) -> Result<(ProtocolConditions, f64)> {
    for n in 0..MAX_BRANCH {
        let cand = cond.with_branch(n);
        let c = solve_fine_tuning(&cand, lambda2)?;
        if cand.margin(c, lambda2) >= threshold {
            return Ok((cand, c));
        }
    }
    Err(Error::NoSolution)
}

/// E(f₁,f₂)²/W(f₂,f₂), infinite when f₂ does not couple.
pub fn strong_coupling_margin(table: &BilinearTable) -> f64 {
    let w22 = table.w_diag(F2);
    if w22 == 0.0 {
        return f64::INFINITY;
    }
    let e = table.e()[(F1, F2)];
    e * e / w22
}

/// Grid nodes carrying the |k| tabulation of a decoding profile.
fn bob_nodes(grid: &KGrid) -> Result<Vec<usize>> {
    match grid.kind() {
        GridKind::Radial => Ok((0..grid.len()).collect()),
        GridKind::Tensor if grid.dimension() == 1 => Ok((grid.len() / 2..grid.len()).collect()),
        _ => Err(Error::Unsupported(
            "decoding smearings are tabulated in |k|: use a radial grid or a 1-D tensor grid".into(),
        )),
    }
}

/// Bob's decoding smearing for one Alice amplitude: a Delta term with profile
/// G̃₁ and a DeltaPrime term with profile G̃₂, both at t_B, chosen so that
/// g_k = f_k at every grid node. With Z(k) = i f_k e^{-iωt_B}/N(k), real
/// profiles require G̃₁ = (Z(k) + Z(-k)*)/2 and G̃₂ = (Z(-k)* - Z(k))/(2iω).
pub fn bob_smearing_for(model: &dyn ModeModel, f: &ModeAmplitude, t_b: f64) -> Result<Smearing> {
    let grid = f.grid();
    let nodes = bob_nodes(grid)?;
    let reduced = f.reduced_values();
    let scale = reduced.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut k = Vec::with_capacity(nodes.len());
    let mut g1 = Vec::with_capacity(nodes.len());
    let mut g2 = Vec::with_capacity(nodes.len());
    for &i in &nodes {
        let j = grid.mirror(i);
        if (reduced[i] - reduced[j]).norm() > 1e-12 * scale {
            return Err(Error::Unsupported("Alice amplitude is not even in k about its centre".into()));
        }
        let km = grid.magnitude(i);
        let omega = model.omega(km);
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::SingularNode { index: i, k: km });
        }
        let z = |idx: usize| {
            Complex64::i() * reduced[idx] * Complex64::from_polar(1.0, -omega * t_b) / model.mode_normalization(km)
        };
        let (zk, zm) = (z(i), z(j).conj());
        k.push(km);
        g1.push((zk + zm) * 0.5);
        g2.push((zm - zk) / (Complex64::i() * 2.0 * omega));
    }
    let center = f.center().to_vec();
    let delta = TabulatedProfile::new(center.clone(), k.clone(), g1)?;
    let prime = TabulatedProfile::new(center, k, g2)?;
    Ok(Smearing {
        terms: vec![
            SmearingSpec::new(1.0, TemporalKind::Delta(t_b), SpatialProfile::TabulatedFourier(delta)),
            SmearingSpec::new(1.0, TemporalKind::DeltaPrime(t_b), SpatialProfile::TabulatedFourier(prime)),
        ],
    })
}

/// (g₁, g₂) with g_i matching f_i mode by mode at t_B.
pub fn bob_smearing_solve(model: &dyn ModeModel, f1: &ModeAmplitude, f2: &ModeAmplitude, t_b: f64) -> Result<[Smearing; 2]> {
    Ok([bob_smearing_for(model, f1, t_b)?, bob_smearing_for(model, f2, t_b)?])
}

fn tabulated(spec: &SmearingSpec) -> Result<&TabulatedProfile> {
    match &spec.profile {
        SpatialProfile::TabulatedFourier(t) => Ok(t),
        _ => Err(Error::Unsupported("expected a tabulated profile".into())),
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// G(r) = (2π)⁻³ ∫d³k G̃(k) sinc(kr) for a profile tabulated on the nodes of
/// a radial grid.
pub fn inverse_radial_transform(profile: &TabulatedProfile, grid: &KGrid, r: f64) -> Result<f64> {
    if !grid.is_radial() || profile.nodes().len() != grid.len() {
        return Err(Error::GridMismatch("profile is not tabulated on this radial grid".into()));
    }
    let s: f64 = (0..grid.len())
        .map(|i| grid.weight(i) * profile.values()[i].re * sinc(grid.magnitude(i) * r))
        .sum();
    Ok(s / (8.0 * PI * PI * PI))
}

/// Bob's decoding smearing with each spatial profile cut to the radial band
/// |r - shell_radius| ≤ fraction·half_width and transformed back onto the
/// same radial nodes. fraction = 1 keeps the whole lightcone shell; smaller
/// values model a Bob who only covers part of it.
pub fn partial_coverage(g: &Smearing, grid: &KGrid, shell_radius: f64, half_width: f64, fraction: f64) -> Result<Smearing> {
    if !(0.0..=1.0).contains(&fraction) || !(half_width > 0.0) {
        return Err(Error::InvalidParameter(format!("coverage fraction {fraction} must lie in [0, 1]")));
    }
    let lo = (shell_radius - fraction * half_width).max(0.0);
    let hi = shell_radius + fraction * half_width;
    let mut terms = Vec::with_capacity(g.terms.len());
    for spec in &g.terms {
        let t = tabulated(spec)?;
        let values = if hi <= lo {
            vec![Complex64::new(0.0, 0.0); t.nodes().len()]
        } else {
            let panels = 16usize.max((grid.cutoff() * (hi - lo) / 3.0).ceil() as usize);
            let (r, w) = grid::composite_rule(lo, hi, panels);
            let density: Vec<f64> = r
                .iter()
                .map(|&ri| inverse_radial_transform(t, grid, ri))
                .collect::<Result<_>>()?;
            t.nodes()
                .iter()
                .map(|&k| {
                    let s: f64 = r
                        .iter()
                        .zip(&w)
                        .zip(&density)
                        .map(|((ri, wi), gi)| 4.0 * PI * ri * ri * wi * gi * sinc(k * ri))
                        .sum();
                    Complex64::from(s)
                })
                .collect()
        };
        let profile = TabulatedProfile::new(t.center().to_vec(), t.nodes().to_vec(), values)?;
        terms.push(SmearingSpec::new(spec.coupling, spec.temporal, SpatialProfile::TabulatedFourier(profile)));
    }
    Ok(Smearing { terms })
}

/// Space-time region of one delta coupling: a ball at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct Support {
    pub center: Vec<f64>,
    pub radius: f64,
    pub time: f64,
}

impl Support {
    pub fn new(center: Vec<f64>, radius: f64, time: f64) -> Self {
        Self { center, radius, time }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CausalClass {
    Spacelike,
    LightconeOnly,
    TimelikeInterior,
    Overlapping,
}

/// `margin` is the light-travel slack between the supports: positive
/// (d_min - |Δt|) when spacelike, negative (d_max - |Δt|) when Bob sits
/// strictly inside the lightcone, within tolerance of zero on the cone and
/// zero when the supports straddle it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CausalClassification {
    pub class: CausalClass,
    pub margin: f64,
}

pub fn causal_classify(model: &dyn ModeModel, alice: &Support, bob: &Support) -> Result<CausalClassification> {
    if !model.is_minkowski() {
        return Err(Error::Unsupported("causal classification is implemented for flat space only".into()));
    }
    if alice.center.len() != bob.center.len() || alice.radius < 0.0 || bob.radius < 0.0 {
        return Err(Error::InvalidParameter("supports must share a dimension and have radii >= 0".into()));
    }
    let dist = alice
        .center
        .iter()
        .zip(&bob.center)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let dt = (bob.time - alice.time).abs();
    let d_min = (dist - alice.radius - bob.radius).max(0.0);
    let d_max = dist + alice.radius + bob.radius;
    let tol = 1e-12 * (1.0 + dt.max(d_max));
    let (class, margin) = if (dt - d_min).abs() <= tol {
        (CausalClass::LightconeOnly, d_min - dt)
    } else if (dt - d_max).abs() <= tol {
        (CausalClass::LightconeOnly, d_max - dt)
    } else if dt < d_min {
        (CausalClass::Spacelike, d_min - dt)
    } else if dt > d_max {
        (CausalClass::TimelikeInterior, d_max - dt)
    } else {
        (CausalClass::Overlapping, 0.0)
    };
    Ok(CausalClassification { class, margin })
}

/// Alice's two unit-coupling amplitudes on a shared grid.
pub fn unit_amplitudes(
    model: &dyn ModeModel,
    f1: &SmearingSpec,
    f2: &SmearingSpec,
    grid: &Arc<KGrid>,
) -> Result<(ModeAmplitude, ModeAmplitude)> {
    Ok((
        crate::field::mode_amplitude(model, &f1.with_coupling(1.0), grid)?,
        crate::field::mode_amplitude(model, &f2.with_coupling(1.0), grid)?,
    ))
}
