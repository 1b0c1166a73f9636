//! Post-protocol state of environment and Bob, and the information measures
//! evaluated on it.
//!
//! Alice applies U_A = e^{iσ_x φ(f₂)} e^{iσ_z φ(f₁)}, Bob then applies
//! U_B = e^{-iσ_z φ(g₁)} e^{-iσ_x φ(g₂)}. Expanding every controlled unitary
//! in Pauli projectors leaves a sum over 2⁸ sign patterns whose field factor
//! is the vacuum expectation of a single eight-factor Weyl word.
//!
//! Two-qubit matrices use index 2·first + second, with 0 = |+z⟩ and
//! 1 = |-z⟩. The environment-Alice input is ordered (E, A), the output (B, E).

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

use nalgebra::{DMatrix, Matrix2, Matrix4, Vector2, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::weyl::{self, BilinearTable, F1, F2, G1, G2};

const STATE_TOL: f64 = 1e-10;
const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);
const CI: Complex64 = Complex64::new(0.0, 1.0);

/// Default tolerance of the fine-tuning check E(f₁, f₂) ≡ π/4 (mod 2π).
pub const FINE_TUNING_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Z,
}

/// Spectral projector (1 + s σ)/2.
pub fn projector(axis: Axis, sign: i8) -> Matrix2<Complex64> {
    let s = Complex64::from(f64::from(sign));
    let half = Complex64::new(0.5, 0.0);
    match axis {
        Axis::Z => Matrix2::new(half * (C1 + s), C0, C0, half * (C1 - s)),
        Axis::X => Matrix2::new(half, half * s, half * s, half),
    }
}

fn hermitian_check<const N: usize>(
    m: &nalgebra::SMatrix<Complex64, N, N>,
) -> Result<nalgebra::SMatrix<Complex64, N, N>> {
    let adj = m.adjoint();
    let asym = (m - adj).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if asym > STATE_TOL {
        return Err(Error::InvalidState(format!("residual anti-Hermitian part {asym:.3e}")));
    }
    Ok((m + adj) * Complex64::new(0.5, 0.0))
}

fn eigenvalues_dyn(m: DMatrix<Complex64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

fn validate_density<const N: usize>(
    m: &nalgebra::SMatrix<Complex64, N, N>,
) -> Result<nalgebra::SMatrix<Complex64, N, N>> {
    if m.iter().any(|z| !z.is_finite()) {
        return Err(Error::InvalidState("non-finite entry".into()));
    }
    let h = hermitian_check(m)?;
    let tr = h.trace();
    if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
        return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
    }
    let min = eigenvalues_dyn(DMatrix::from_iterator(N, N, h.iter().copied()))[0];
    if min < -STATE_TOL {
        return Err(Error::NotPositive { min_eigenvalue: min });
    }
    Ok(h)
}

/// Von Neumann entropy in bits of a density matrix of any size.
pub fn von_neumann_entropy(rho: &DMatrix<Complex64>) -> Result<f64> {
    if !rho.is_square() {
        return Err(Error::InvalidState("density matrix must be square".into()));
    }
    let adj = rho.adjoint();
    let asym = (rho - &adj).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if asym > STATE_TOL {
        return Err(Error::InvalidState(format!("residual anti-Hermitian part {asym:.3e}")));
    }
    let h = (rho + adj) * Complex64::new(0.5, 0.0);
    let tr = h.trace();
    if (tr.re - 1.0).abs() > STATE_TOL {
        return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
    }
    let ev = eigenvalues_dyn(h);
    if ev[0] < -STATE_TOL {
        return Err(Error::NotPositive { min_eigenvalue: ev[0] });
    }
    Ok(entropy_of_spectrum(&ev))
}

/// -Σ p log₂ p with negative round-off clipped to zero.
pub fn entropy_of_spectrum(p: &[f64]) -> f64 {
    p.iter()
        .map(|&x| if x > 0.0 { -x * x.log2() } else { 0.0 })
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct QubitState(Matrix2<Complex64>);

impl QubitState {
    pub fn new(m: Matrix2<Complex64>) -> Result<Self> {
        validate_density(&m).map(QubitState)
    }

    pub fn from_pure(v: Vector2<Complex64>) -> Result<Self> {
        let n = v.norm();
        if !(n > 0.0) {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v = v / Complex64::from(n);
        Self::new(v * v.adjoint())
    }

    /// ρ = (1 + r·σ)/2 for |r| ≤ 1.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let len = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        if len > 1.0 + 1e-12 {
            return Err(Error::InvalidState(format!("Bloch vector length {len} > 1")));
        }
        let h = 0.5;
        Self::new(Matrix2::new(
            Complex64::new(h * (1.0 + r[2]), 0.0),
            Complex64::new(h * r[0], -h * r[1]),
            Complex64::new(h * r[0], h * r[1]),
            Complex64::new(h * (1.0 - r[2]), 0.0),
        ))
    }

    pub fn plus_y() -> Self {
        Self::from_pure(Vector2::new(C1, CI)).unwrap()
    }

    pub fn plus_z() -> Self {
        Self::from_pure(Vector2::new(C1, C0)).unwrap()
    }

    pub fn minus_z() -> Self {
        Self::from_pure(Vector2::new(C0, C1)).unwrap()
    }

    pub fn maximally_mixed() -> Self {
        Self::from_bloch([0.0; 3]).unwrap()
    }

    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.0
    }

    pub fn bloch(&self) -> [f64; 3] {
        let m = &self.0;
        [2.0 * m[(1, 0)].re, 2.0 * m[(1, 0)].im, (m[(0, 0)] - m[(1, 1)]).re]
    }

    pub fn entropy(&self) -> f64 {
        entropy_of_spectrum(&eigenvalues_dyn(DMatrix::from_iterator(2, 2, self.0.iter().copied())))
    }

    /// |e⟩_E ⊗ ρ_A with E in |+z⟩, as an (E, A) input.
    pub fn with_trivial_environment(&self) -> TwoQubitState {
        let mut m = Matrix4::zeros();
        for a in 0..2 {
            for b in 0..2 {
                m[(a, b)] = self.0[(a, b)];
            }
        }
        TwoQubitState(m)
    }

    /// Canonical purification Σ √p_i |i⟩_E |v_i⟩_A from the eigendecomposition.
    pub fn purification(&self) -> TwoQubitState {
        let eig = self.0.symmetric_eigen();
        let mut psi = Vector4::zeros();
        for i in 0..2 {
            let p = eig.eigenvalues[i].max(0.0).sqrt();
            for a in 0..2 {
                psi[2 * i + a] = eig.eigenvectors[(a, i)] * p;
            }
        }
        TwoQubitState(psi * psi.adjoint())
    }
}

/// Density matrix on two qubits, index 2·first + second.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState(Matrix4<Complex64>);

impl TwoQubitState {
    pub fn new(m: Matrix4<Complex64>) -> Result<Self> {
        validate_density(&m).map(TwoQubitState)
    }

    pub fn from_pure(v: Vector4<Complex64>) -> Result<Self> {
        let n = v.norm();
        if !(n > 0.0) {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v = v / Complex64::from(n);
        Self::new(v * v.adjoint())
    }

    /// (|-z⟩_E|+z⟩_A + |+z⟩_E|-z⟩_A)/√2
    pub fn bell() -> Self {
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self::from_pure(Vector4::new(C0, s, s, C0)).unwrap()
    }

    pub fn product(first: &QubitState, second: &QubitState) -> Self {
        TwoQubitState(first.0.kronecker(&second.0))
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.0
    }

    pub fn trace_first(&self) -> QubitState {
        let m = &self.0;
        QubitState(Matrix2::from_fn(|i, j| m[(i, j)] + m[(2 + i, 2 + j)]))
    }

    pub fn trace_second(&self) -> QubitState {
        let m = &self.0;
        QubitState(Matrix2::from_fn(|i, j| m[(2 * i, 2 * j)] + m[(2 * i + 1, 2 * j + 1)]))
    }

    pub fn partial_transpose_second(&self) -> Matrix4<Complex64> {
        let m = &self.0;
        Matrix4::from_fn(|r, c| {
            let (a, b) = (r / 2, r % 2);
            let (ap, bp) = (c / 2, c % 2);
            m[(2 * a + bp, 2 * ap + b)]
        })
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigenvalues_dyn(DMatrix::from_iterator(4, 4, self.0.iter().copied()))
    }

    pub fn entropy(&self) -> f64 {
        entropy_of_spectrum(&self.eigenvalues())
    }
}

/// Trace distance ½‖ρ - σ‖₁ between Hermitian matrices of equal size.
pub fn trace_distance(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    let d = a - b;
    let d = (&d + d.adjoint()) * Complex64::new(0.5, 0.0);
    0.5 * d.symmetric_eigenvalues().iter().map(|x| x.abs()).sum::<f64>()
}

pub fn to_dmatrix4(m: &Matrix4<Complex64>) -> DMatrix<Complex64> {
    DMatrix::from_iterator(4, 4, m.iter().copied())
}

pub fn to_dmatrix2(m: &Matrix2<Complex64>) -> DMatrix<Complex64> {
    DMatrix::from_iterator(2, 2, m.iter().copied())
}

/// S(Tr_E ρ_EB) - S(ρ_EB); E is the second factor of the output.
pub fn coherent_information(rho_eb: &TwoQubitState) -> f64 {
    rho_eb.trace_second().entropy() - rho_eb.entropy()
}

/// (‖ρ^{T_E}‖₁ - 1)/2, transposing the second (environment) factor.
pub fn negativity(rho: &TwoQubitState) -> f64 {
    let pt = rho.partial_transpose_second();
    let norm1: f64 = to_dmatrix4(&pt)
        .symmetric_eigenvalues()
        .iter()
        .map(|x| x.abs())
        .sum();
    ((norm1 - 1.0) / 2.0).max(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolSpec {
    pub table: BilinearTable,
    /// environment-Alice input, ordered (E, A)
    pub rho_ea: TwoQubitState,
    pub bob_initial: QubitState,
}

impl ProtocolSpec {
    /// Bell input and Bob in |+y⟩.
    pub fn new(table: BilinearTable) -> Self {
        Self { table, rho_ea: TwoQubitState::bell(), bob_initial: QubitState::plus_y() }
    }

    pub fn with_input(&self, rho_ea: TwoQubitState) -> Self {
        Self { rho_ea, ..self.clone() }
    }
}

/// The linear map ρ_EA ⊗ ρ_B -> ρ_EB without validation or normalization.
pub fn assemble_raw(table: &BilinearTable, rho_ea: &Matrix4<Complex64>, rho_b: &Matrix2<Complex64>) -> Matrix4<Complex64> {
    let mut out = Matrix4::zeros();
    for (x, z) in weyl::sign_patterns() {
        let w = weyl::quasifree_expectation(&weyl::protocol_word(x, z), table);
        // Tr_A[(1 ⊗ L) ρ_EA (1 ⊗ R)] = Tr_A[(1 ⊗ R L) ρ_EA]
        let l = projector(Axis::X, x[3]) * projector(Axis::Z, z[3]);
        let r = projector(Axis::Z, -z[0]) * projector(Axis::X, -x[0]);
        let rl = r * l;
        let mut r_e = Matrix2::zeros();
        for e in 0..2 {
            for ep in 0..2 {
                let mut s = C0;
                for a in 0..2 {
                    for ap in 0..2 {
                        s += rl[(ap, a)] * rho_ea[(2 * e + a, 2 * ep + ap)];
                    }
                }
                r_e[(e, ep)] = s;
            }
        }
        let r_b = projector(Axis::Z, -z[2]) * projector(Axis::X, -x[2]) * rho_b * projector(Axis::X, x[1]) * projector(Axis::Z, z[1]);
        out += r_b.kronecker(&r_e) * w;
    }
    out
}

/// Exact ρ_EB from the 2⁸-term expansion, Hermitized and checked.
pub fn assemble_rho_eb(spec: &ProtocolSpec) -> Result<TwoQubitState> {
    let raw = assemble_raw(&spec.table, spec.rho_ea.matrix(), spec.bob_initial.matrix());
    finish_output(raw)
}

fn finish_output(raw: Matrix4<Complex64>) -> Result<TwoQubitState> {
    let h = hermitian_check(&raw)?;
    let tr = h.trace().re;
    if !(tr > 0.0) {
        return Err(Error::InvalidState(format!("output trace {tr}")));
    }
    let h = h / Complex64::from(tr);
    let min = eigenvalues_dyn(to_dmatrix4(&h))[0];
    if min < -STATE_TOL {
        return Err(Error::NotPositive { min_eigenvalue: min });
    }
    Ok(TwoQubitState(h))
}

fn ideal_entries(table: &BilinearTable) -> (f64, f64, f64, f64) {
    (table.w_diag(F1), table.w_diag(F2), table.e()[(F1, F2)], table.h()[(F1, F2)])
}

fn layout(pm: f64, pp: f64, x: Complex64, a: Complex64, b: Complex64, c: Complex64) -> Matrix4<Complex64> {
    let (pm, pp) = (Complex64::from(pm), Complex64::from(pp));
    Matrix4::new(
        pm, C0, a, c, //
        C0, pp, x, b, //
        a.conj(), x.conj(), pp, C0, //
        c.conj(), b.conj(), C0, pm,
    )
}

/// Ideal-decoding matrix built from the closed-form entries exactly as they
/// are usually quoted, including their known misprints. Only meant for
/// comparison with [`assemble_rho_eb`]; see [`corrected_closed_form_rho_eb`].
pub fn closed_form_rho_eb(table: &BilinearTable) -> Matrix4<Complex64> {
    let (w11, w22, e, h) = ideal_entries(table);
    let (s, co) = ((2.0 * e).sin(), (2.0 * e).cos());
    let w12 = table.w(F1, F2);
    let w21 = table.w(F2, F1);
    let pp = 0.25 * (1.0 + (-2.0 * w11).exp() * s);
    let pm = 0.25 * (1.0 - (-2.0 * w11).exp() * s);
    let x = Complex64::from(0.25 * s * ((-2.0 * w22).exp() + s));
    let pre = -0.25 * CI * (-2.0 * w11).exp() * co;
    let a = pre * (s - (-2.0 * w22).exp() * (w21 * 4.0).sinh());
    let b = pre * (s + (-2.0 * w22).exp() * (w12 * 4.0).cosh());
    let c = Complex64::from(0.25 * (-8.0 * w11).exp() * s * (s - (-2.0 * w22).exp() * (4.0 * h).cosh()));
    layout(pm, pp, x, a, b, c)
}

/// Ideal-decoding closed form (g = f, Bell input, Bob in |+y⟩), entries
/// recovered from the 2⁸-term sum:
/// P∓ = ¼(1 ∓ e^{-2W₂₂} sin 2E), X = ¼ sin 2E (e^{-2W₂₂} + sin 2E),
/// A = -(i/4) e^{-2W₁₁} cos 2E (sin 2E + e^{-2W₂₂} cosh 4W(f₂,f₁)),
/// B = -(i/4) e^{-2W₁₁} cos 2E (sin 2E + e^{-2W₂₂} cosh 4W(f₁,f₂)),
/// C = ¼ e^{-8W₁₁} sin 2E (sin 2E + e^{-2W₂₂} cosh 4H₁₂).
pub fn corrected_closed_form_rho_eb(table: &BilinearTable) -> Matrix4<Complex64> {
    let (w11, w22, e, h) = ideal_entries(table);
    let (s, co) = ((2.0 * e).sin(), (2.0 * e).cos());
    let damp = (-2.0 * w22).exp();
    let pp = 0.25 * (1.0 + damp * s);
    let pm = 0.25 * (1.0 - damp * s);
    let x = Complex64::from(0.25 * s * (damp + s));
    let pre = -0.25 * CI * (-2.0 * w11).exp() * co;
    let a = pre * (s + damp * (table.w(F2, F1) * 4.0).cosh());
    let b = pre * (s + damp * (table.w(F1, F2) * 4.0).cosh());
    let c = Complex64::from(0.25 * (-8.0 * w11).exp() * s * (s + damp * (4.0 * h).cosh()));
    layout(pm, pp, x, a, b, c)
}

/// Distance of E(f₁, f₂) from π/4 modulo 2π.
pub fn fine_tuning_residual(e12: f64) -> f64 {
    let r = (e12 - FRAC_PI_4).rem_euclid(2.0 * PI);
    r.min(2.0 * PI - r)
}

/// Tilde form valid when E(f₁, f₂) ≡ π/4:
/// P̃± = ¼(1 ± e^{-2W₂₂}), C̃ = ¼ e^{-8W₁₁}(e^{-2W₂₂} cosh 4H₁₂ + 1).
pub fn fine_tuned_rho_eb(table: &BilinearTable, tol: f64) -> Result<TwoQubitState> {
    let (w11, w22, e, h) = ideal_entries(table);
    if fine_tuning_residual(e) > tol {
        return Err(Error::FineTuningViolated { e12: e, tol });
    }
    let damp = (-2.0 * w22).exp();
    let pp = 0.25 * (1.0 + damp);
    let pm = 0.25 * (1.0 - damp);
    let c = Complex64::from(0.25 * (-8.0 * w11).exp() * (damp * (4.0 * h).cosh() + 1.0));
    let ppc = Complex64::from(pp);
    Ok(TwoQubitState(layout(pm, pp, ppc, C0, C0, c)))
}

/// ρ_E ⊗ σ_B for causally disconnected Alice and Bob, with Bob starting
/// in |+y⟩:
/// σ_B = [[½, X], [X*, ½]],
/// X = -(i/2) e^{-2W(g₁,g₁)} [e^{-2W(g₂,g₂)} cosh 2H(g₁,g₂) + sin 2E(g₁,g₂)].
pub fn spacelike_rho_eb(spec: &ProtocolSpec, tol: f64) -> Result<TwoQubitState> {
    let t = &spec.table;
    let cross = t.max_cross_e();
    if cross > tol {
        return Err(Error::CausalOverlap { max_cross: cross });
    }
    if (spec.bob_initial.matrix() - QubitState::plus_y().matrix()).norm() > STATE_TOL {
        return Err(Error::Unsupported("product form is stated for Bob starting in |+y>".into()));
    }
    let x = -0.5
        * CI
        * (-2.0 * t.w_diag(G1)).exp()
        * ((-2.0 * t.w_diag(G2)).exp() * (2.0 * t.h()[(G1, G2)]).cosh() + (2.0 * t.e()[(G1, G2)]).sin());
    let half = Complex64::new(0.5, 0.0);
    let sigma_b = Matrix2::new(half, x, x.conj(), half);
    let rho_e = spec.rho_ea.trace_second();
    Ok(TwoQubitState(sigma_b.kronecker(rho_e.matrix())))
}

/// Six axis poles, twelve edge midpoints and eight face-centre directions of
/// the cube, normalized onto the Bloch sphere, followed by the maximally
/// mixed state.
pub fn bloch_grid() -> Vec<QubitState> {
    let mut dirs: Vec<[f64; 3]> = Vec::with_capacity(27);
    for x in -1i32..=1 {
        for y in -1i32..=1 {
            for z in -1i32..=1 {
                if (x, y, z) != (0, 0, 0) {
                    dirs.push([x as f64, y as f64, z as f64]);
                }
            }
        }
    }
    dirs.sort_by_key(|d| d.iter().filter(|c| **c != 0.0).count());
    let mut out: Vec<QubitState> = dirs
        .iter()
        .map(|d| {
            let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            QubitState::from_bloch([d[0] / n, d[1] / n, d[2] / n]).unwrap()
        })
        .collect();
    out.push(QubitState::maximally_mixed());
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelCoherentInfo {
    pub max: f64,
    pub argmax: usize,
    pub values: Vec<f64>,
}

/// Max over `inputs` of I_c evaluated on the canonical purification of each
/// input. `channel` maps an (E, A) input to the (B, E) output.
pub fn channel_coherent_information<F>(channel: F, inputs: &[QubitState]) -> Result<ChannelCoherentInfo>
where
    F: Fn(&TwoQubitState) -> Result<TwoQubitState>,
{
    if inputs.is_empty() {
        return Err(Error::InvalidParameter("empty input grid".into()));
    }
    let values = inputs
        .iter()
        .map(|rho| channel(&rho.purification()).map(|out| coherent_information(&out)))
        .collect::<Result<Vec<f64>>>()?;
    let (argmax, max) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    Ok(ChannelCoherentInfo { max, argmax, values })
}

/// Max over input pairs of ‖ρ_B(i) - ρ_B(j)‖₁ for Bob's output marginal;
/// zero certifies that no classical signal passes for the tested inputs.
pub fn classical_signaling<F>(channel: F, inputs: &[QubitState]) -> Result<f64>
where
    F: Fn(&TwoQubitState) -> Result<TwoQubitState>,
{
    if inputs.len() < 2 {
        return Err(Error::InvalidParameter("signaling needs at least two inputs".into()));
    }
    let outs = inputs
        .iter()
        .map(|rho| channel(&rho.with_trivial_environment()).map(|o| to_dmatrix2(o.trace_second().matrix())))
        .collect::<Result<Vec<_>>>()?;
    let mut m: f64 = 0.0;
    for i in 0..outs.len() {
        for j in i + 1..outs.len() {
            m = m.max(2.0 * trace_distance(&outs[i], &outs[j]));
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntryComparison {
    pub label: &'static str,
    pub row: usize,
    pub col: usize,
    pub printed: Complex64,
    pub corrected: Complex64,
    pub assembled: Complex64,
}

impl EntryComparison {
    pub fn printed_error(&self) -> f64 {
        (self.printed - self.assembled).norm()
    }

    pub fn corrected_error(&self) -> f64 {
        (self.corrected - self.assembled).norm()
    }
}

/// Entry-by-entry comparison of the quoted closed form, its corrected
/// version and the exact assembly, for an ideal table with Bell input.
pub fn closed_form_audit(table: &BilinearTable) -> Result<Vec<EntryComparison>> {
    let exact = assemble_rho_eb(&ProtocolSpec::new(table.clone()))?;
    let printed = closed_form_rho_eb(table);
    let corrected = corrected_closed_form_rho_eb(table);
    let entries: [(&'static str, usize, usize); 7] = [
        ("P-", 0, 0),
        ("P+", 1, 1),
        ("X", 1, 2),
        ("A", 0, 2),
        ("B", 1, 3),
        ("C", 0, 3),
        ("zero", 0, 1),
    ];
    Ok(entries
        .iter()
        .map(|&(label, row, col)| EntryComparison {
            label,
            row,
            col,
            printed: printed[(row, col)],
            corrected: corrected[(row, col)],
            assembled: exact.matrix()[(row, col)],
        })
        .collect())
}

/// Tables with g = f: the f-block of E and H is repeated in all four blocks.
pub fn ideal_table(w11: f64, w22: f64, e12: f64, h12: f64) -> Result<BilinearTable> {
    let eb = [[0.0, e12], [-e12, 0.0]];
    let hb = [[2.0 * w11, h12], [h12, 2.0 * w22]];
    let e = Matrix4::from_fn(|i, j| eb[i % 2][j % 2]);
    let h = Matrix4::from_fn(|i, j| hb[i % 2][j % 2]);
    BilinearTable::new(e, h)
}
