//! Brute-force protocol simulation on a truncated multi-mode Fock space.
//!
//! A discrete model assigns each basis smearing b a vector of mode amplitudes
//! α[b][m], so that φ(b) = Σ_m (α* a_m + α a_m†) and e^{isφ(b)} is the product
//! of single-mode displacements D(isα[b][m]). Nothing here uses the Weyl
//! relations; the simulation applies the controlled displacements to state
//! vectors and traces out Alice and the field at the end.

use nalgebra::{DMatrix, Matrix4, Vector2};
use num_complex::Complex64;

use crate::channel::{Axis, TwoQubitState};
use crate::error::{Error, Result};
use crate::field::ModeAmplitude;
use crate::weyl::BilinearTable;

pub const DEFAULT_TRUNCATION: usize = 60;
/// Largest state vector (complex entries) the simulation will allocate.
pub const MAX_STATE_LEN: usize = 1 << 24;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteModeModel {
    alpha: [Vec<Complex64>; 4],
}

impl DiscreteModeModel {
    pub fn new(alpha: [Vec<Complex64>; 4]) -> Result<Self> {
        let m = alpha[0].len();
        if m == 0 || alpha.iter().any(|a| a.len() != m) {
            return Err(Error::InvalidParameter("all four smearings need the same non-zero mode count".into()));
        }
        if alpha.iter().flatten().any(|z| !z.is_finite()) {
            return Err(Error::InvalidParameter("mode amplitudes must be finite".into()));
        }
        Ok(Self { alpha })
    }

    /// α[b][m] = f_{k_m} sqrt(w_m) on a directional grid.
    pub fn from_amplitudes(amps: &[ModeAmplitude; 4]) -> Result<Self> {
        let grid = amps[0].grid().clone();
        if amps.iter().any(|a| **a.grid() != *grid) {
            return Err(Error::GridMismatch("amplitudes live on different grids".into()));
        }
        let mut alpha: [Vec<Complex64>; 4] = Default::default();
        for (b, amp) in amps.iter().enumerate() {
            alpha[b] = (0..grid.len())
                .map(|m| amp.value(m).map(|v| v * grid.weight(m).sqrt()))
                .collect::<Result<_>>()?;
        }
        Self::new(alpha)
    }

    pub fn modes(&self) -> usize {
        self.alpha[0].len()
    }

    pub fn alpha(&self, basis: usize, mode: usize) -> Complex64 {
        self.alpha[basis][mode]
    }

    /// Largest coherent amplitude any protocol branch can reach in one
    /// mode: max_m Σ_b |α[b][m]|.
    pub fn reachable_amplitude(&self) -> f64 {
        (0..self.modes())
            .map(|m| self.alpha.iter().map(|a| a[m].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncatedFock {
    /// highest photon number kept per mode
    pub n: usize,
}

impl Default for TruncatedFock {
    fn default() -> Self {
        Self { n: DEFAULT_TRUNCATION }
    }
}

impl TruncatedFock {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn levels(&self) -> usize {
        self.n + 1
    }

    pub fn dimension(&self, modes: usize) -> Option<usize> {
        self.levels().checked_pow(modes as u32)
    }

    /// Recommended truncation for amplitude a: 4a² + 20.
    pub fn recommended(amplitude: f64) -> usize {
        (4.0 * amplitude * amplitude + 20.0).ceil() as usize
    }

    /// Below the mean photon number a² the truncation cannot hold the state.
    pub fn hard_bound(amplitude: f64) -> usize {
        (amplitude * amplitude).ceil() as usize
    }

    /// Warns below the recommended truncation, errors below the hard bound.
    pub fn check_amplitude(&self, amplitude: f64) -> Result<()> {
        let hard = Self::hard_bound(amplitude);
        if self.n < hard {
            return Err(Error::TruncationTooSmall { n: self.n, bound: hard, amplitude });
        }
        let rec = Self::recommended(amplitude);
        if self.n < rec {
            log::warn!("Fock truncation N = {} below recommended {rec} for amplitude {amplitude:.3}", self.n);
        }
        Ok(())
    }
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// ⟨m|D(β)|n⟩ for m, n ≤ N from the Laguerre closed form
/// ⟨m|D|n⟩ = sqrt(n!/m!) β^{m-n} e^{-|β|²/2} L_n^{(m-n)}(|β|²) for m ≥ n and
/// the mirrored expression with -β* above the diagonal.
pub fn displacement_matrix(beta: Complex64, n: usize) -> DMatrix<Complex64> {
    let dim = n + 1;
    let mut d = DMatrix::from_element(dim, dim, C0);
    let x = beta.norm_sqr();
    if x == 0.0 {
        return DMatrix::identity(dim, dim);
    }
    let ln_fact: Vec<f64> = (0..=n).map(ln_factorial).collect();
    let ln_abs = beta.norm().ln();
    let arg = beta.arg();
    for diff in 0..dim {
        // L_k^{(diff)}(x) for k = 0..dim-diff by forward recurrence
        let len = dim - diff;
        let a = diff as f64;
        let mut lag = vec![0.0; len];
        lag[0] = 1.0;
        if len > 1 {
            lag[1] = 1.0 + a - x;
        }
        for k in 1..len.saturating_sub(1) {
            let kf = k as f64;
            lag[k + 1] = ((2.0 * kf + 1.0 + a - x) * lag[k] - (kf + a) * lag[k - 1]) / (kf + 1.0);
        }
        for (k, &l) in lag.iter().enumerate() {
            let (lo, hi) = (k, k + diff);
            let ln_pref = 0.5 * (ln_fact[lo] - ln_fact[hi]) + a * ln_abs - 0.5 * x;
            let mag = ln_pref.exp() * l;
            // lower triangle: β^{diff}; upper triangle: (-β*)^{diff}
            d[(hi, lo)] = Complex64::from_polar(mag, a * arg);
            if diff > 0 {
                let sign = if diff % 2 == 0 { 1.0 } else { -1.0 };
                d[(lo, hi)] = Complex64::from_polar(sign * mag, -a * arg);
            }
        }
    }
    d
}

/// Truncated annihilation operator on N + 1 levels.
pub fn annihilation(n: usize) -> DMatrix<Complex64> {
    let mut a = DMatrix::from_element(n + 1, n + 1, C0);
    for k in 1..=n {
        a[(k - 1, k)] = Complex64::from((k as f64).sqrt());
    }
    a
}

/// Cross-check path: dense exponential of the truncated generator βa† - β*a.
pub fn displacement_matrix_expm(beta: Complex64, n: usize) -> DMatrix<Complex64> {
    let a = annihilation(n);
    let gen = a.adjoint() * beta - &a * beta.conj();
    gen.exp()
}

/// Kronecker product of single-mode operators; mode 0 is the most
/// significant index of the composite space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    factors: Vec<DMatrix<Complex64>>,
}

impl FockOperator {
    pub fn new(factors: Vec<DMatrix<Complex64>>) -> Result<Self> {
        let dim = factors.first().map(|f| f.nrows()).unwrap_or(0);
        if dim == 0 || factors.iter().any(|f| f.nrows() != dim || f.ncols() != dim) {
            return Err(Error::InvalidParameter("single-mode factors must be equal square matrices".into()));
        }
        Ok(Self { factors })
    }

    pub fn modes(&self) -> usize {
        self.factors.len()
    }

    pub fn levels(&self) -> usize {
        self.factors[0].nrows()
    }

    pub fn factor(&self, mode: usize) -> &DMatrix<Complex64> {
        &self.factors[mode]
    }

    pub fn adjoint(&self) -> Self {
        Self { factors: self.factors.iter().map(|f| f.adjoint()).collect() }
    }

    /// y = O x on the composite space, factor by factor.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let levels = self.levels();
        let mut cur = x.to_vec();
        let mut next = vec![C0; x.len()];
        let mut post = x.len();
        for f in &self.factors {
            post /= levels;
            let pre = x.len() / (post * levels);
            if is_identity(f) {
                continue;
            }
            for p in 0..pre {
                let base = p * levels * post;
                for q in 0..post {
                    for i in 0..levels {
                        let mut s = C0;
                        for j in 0..levels {
                            s += f[(i, j)] * cur[base + j * post + q];
                        }
                        next[base + i * post + q] = s;
                    }
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }

    /// Dense matrix of the composite operator (small spaces only).
    pub fn to_dense(&self, limit: usize) -> Result<DMatrix<Complex64>> {
        let dim = self
            .levels()
            .checked_pow(self.modes() as u32)
            .filter(|&d| d <= limit)
            .ok_or(Error::MemoryBound { dimension: usize::MAX, limit })?;
        let mut out = DMatrix::from_element(dim, dim, C0);
        let mut e = vec![C0; dim];
        for c in 0..dim {
            e.iter_mut().for_each(|z| *z = C0);
            e[c] = C1;
            for (r, v) in self.apply(&e).into_iter().enumerate() {
                out[(r, c)] = v;
            }
        }
        Ok(out)
    }

    /// max over modes of |(O†O - 1)_{ij}| restricted to photon numbers ≤ k.
    /// The truncated closed form has exact matrix elements, so unitarity only
    /// holds on the part of the space well below the truncation edge.
    pub fn unitarity_defect(&self, k: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for f in &self.factors {
            for prod in [f.adjoint() * f, f * f.adjoint()] {
                for i in 0..=k.min(prod.nrows() - 1) {
                    for j in 0..=k.min(prod.ncols() - 1) {
                        let target = if i == j { C1 } else { C0 };
                        worst = worst.max((prod[(i, j)] - target).norm());
                    }
                }
            }
        }
        worst
    }
}

fn is_identity(m: &DMatrix<Complex64>) -> bool {
    m.iter()
        .enumerate()
        .all(|(idx, z)| *z == if idx % (m.nrows() + 1) == 0 { C1 } else { C0 })
}

/// e^{isφ(b)} = ⊗_m D(i s α[b][m]).
pub fn displacement_operator(model: &DiscreteModeModel, basis: usize, sign: f64, fock: TruncatedFock) -> Result<FockOperator> {
    fock.check_amplitude(model.reachable_amplitude())?;
    let i = Complex64::new(0.0, 1.0);
    FockOperator::new(
        (0..model.modes())
            .map(|m| displacement_matrix(i * sign * model.alpha(basis, m), fock.n))
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Qubit {
    Alice,
    Bob,
}

/// P₊ ⊗ D + P₋ ⊗ D† in the eigenbasis of `axis`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlledUnitary {
    pub axis: Axis,
    pub plus: FockOperator,
    pub minus: FockOperator,
}

pub fn controlled_unitary(axis: Axis, d: FockOperator) -> ControlledUnitary {
    let minus = d.adjoint();
    ControlledUnitary { axis, plus: d, minus }
}

impl ControlledUnitary {
    pub fn unitarity_defect(&self, k: usize) -> f64 {
        self.plus.unitarity_defect(k).max(self.minus.unitarity_defect(k))
    }

    /// Acts on the control qubit's two blocks (|+z⟩ part, |-z⟩ part).
    pub fn apply_blocks(&self, b0: &[Complex64], b1: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        match self.axis {
            Axis::Z => (self.plus.apply(b0), self.minus.apply(b1)),
            Axis::X => {
                let h = Complex64::from(std::f64::consts::FRAC_1_SQRT_2);
                let up: Vec<Complex64> = b0.iter().zip(b1).map(|(a, b)| (a + b) * h).collect();
                let um: Vec<Complex64> = b0.iter().zip(b1).map(|(a, b)| (a - b) * h).collect();
                let (up, um) = (self.plus.apply(&up), self.minus.apply(&um));
                let n0 = up.iter().zip(&um).map(|(a, b)| (a + b) * h).collect();
                let n1 = up.iter().zip(&um).map(|(a, b)| (a - b) * h).collect();
                (n0, n1)
            }
        }
    }
}

/// Pure state of qubits ⊗ Fock space, qubits most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    qubits: usize,
    fock_dim: usize,
    amplitudes: Vec<Complex64>,
}

impl FockState {
    /// Product of a qubit register state and the field vacuum.
    pub fn with_vacuum(qubit_state: &[Complex64], fock_dim: usize) -> Result<Self> {
        let qubits = qubit_state.len().trailing_zeros() as usize;
        if qubit_state.len() != 1 << qubits {
            return Err(Error::InvalidParameter("qubit register length must be a power of two".into()));
        }
        let len = qubit_state
            .len()
            .checked_mul(fock_dim)
            .filter(|&l| l <= MAX_STATE_LEN)
            .ok_or(Error::MemoryBound { dimension: qubit_state.len().saturating_mul(fock_dim), limit: MAX_STATE_LEN })?;
        let mut amplitudes = vec![C0; len];
        for (q, &c) in qubit_state.iter().enumerate() {
            amplitudes[q * fock_dim] = c;
        }
        Ok(Self { qubits, fock_dim, amplitudes })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Apply a controlled unitary with qubit `control` (0 = most significant).
    pub fn apply_controlled(&mut self, control: usize, u: &ControlledUnitary) {
        let stride = 1usize << (self.qubits - 1 - control);
        let f = self.fock_dim;
        for q in 0..(1usize << self.qubits) {
            if q & stride != 0 {
                continue;
            }
            let (i0, i1) = (q * f, (q | stride) * f);
            let (n0, n1) = u.apply_blocks(&self.amplitudes[i0..i0 + f], &self.amplitudes[i1..i1 + f]);
            self.amplitudes[i0..i0 + f].copy_from_slice(&n0);
            self.amplitudes[i1..i1 + f].copy_from_slice(&n1);
        }
    }
}

/// One simple-generated unitary e^{i s σ_axis φ(b)} controlled by a qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub qubit: Qubit,
    pub axis: Axis,
    pub basis: usize,
    pub sign: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Ordering {
    /// U_B U_A: e^{iσ_z φ(f₁)}, e^{iσ_x φ(f₂)}, e^{-iσ_x φ(g₂)}, e^{-iσ_z φ(g₁)}
    Ideal,
    /// Bob's unitary first; equal to Ideal whenever the two commute
    Spacelike,
    Custom(Vec<Step>),
}

impl Ordering {
    pub fn steps(&self) -> Vec<Step> {
        let alice = [
            Step { qubit: Qubit::Alice, axis: Axis::Z, basis: 0, sign: 1.0 },
            Step { qubit: Qubit::Alice, axis: Axis::X, basis: 1, sign: 1.0 },
        ];
        let bob = [
            Step { qubit: Qubit::Bob, axis: Axis::X, basis: 3, sign: -1.0 },
            Step { qubit: Qubit::Bob, axis: Axis::Z, basis: 2, sign: -1.0 },
        ];
        match self {
            Ordering::Ideal => alice.iter().chain(&bob).copied().collect(),
            Ordering::Spacelike => bob.iter().chain(&alice).copied().collect(),
            Ordering::Custom(steps) => steps.clone(),
        }
    }
}

fn pure_components(m: DMatrix<Complex64>) -> Vec<(f64, Vec<Complex64>)> {
    let n = m.nrows();
    let eig = m.symmetric_eigen();
    (0..n)
        .filter(|&i| eig.eigenvalues[i] > 1e-15)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors.column(i).iter().copied().collect()))
        .collect()
}

/// ρ_EB after running `ordering` on (E, A, B) ⊗ vacuum. The register order
/// is E, A, B (most significant first); E is never acted on.
pub fn simulate_protocol(
    model: &DiscreteModeModel,
    rho_ea: &TwoQubitState,
    bob_initial: &crate::channel::QubitState,
    ordering: &Ordering,
    fock: TruncatedFock,
) -> Result<TwoQubitState> {
    fock.check_amplitude(model.reachable_amplitude())?;
    let fock_dim = fock
        .dimension(model.modes())
        .filter(|&d| d.saturating_mul(8) <= MAX_STATE_LEN)
        .ok_or(Error::MemoryBound {
            dimension: fock.dimension(model.modes()).unwrap_or(usize::MAX).saturating_mul(8),
            limit: MAX_STATE_LEN,
        })?;
    let unitaries: Vec<(usize, ControlledUnitary)> = ordering
        .steps()
        .iter()
        .map(|s| {
            let d = displacement_operator(model, s.basis, s.sign, fock)?;
            let control = match s.qubit {
                Qubit::Alice => 1,
                Qubit::Bob => 2,
            };
            Ok((control, controlled_unitary(s.axis, d)))
        })
        .collect::<Result<_>>()?;

    let mut rho = Matrix4::<Complex64>::zeros();
    for (p, psi_ea) in pure_components(DMatrix::from_iterator(4, 4, rho_ea.matrix().iter().copied())) {
        for (q, chi) in pure_components(DMatrix::from_iterator(2, 2, bob_initial.matrix().iter().copied())) {
            let mut reg = vec![C0; 8];
            for ea in 0..4 {
                for b in 0..2 {
                    reg[2 * ea + b] = psi_ea[ea] * chi[b];
                }
            }
            let mut state = FockState::with_vacuum(&reg, fock_dim)?;
            for (control, u) in &unitaries {
                state.apply_controlled(*control, u);
            }
            let amp = state.amplitudes();
            let w = Complex64::from(p * q);
            for e in 0..2 {
                for b in 0..2 {
                    for ep in 0..2 {
                        for bp in 0..2 {
                            let mut s = C0;
                            for a in 0..2 {
                                let i0 = ((e * 2 + a) * 2 + b) * fock_dim;
                                let j0 = ((ep * 2 + a) * 2 + bp) * fock_dim;
                                for n in 0..fock_dim {
                                    s += amp[i0 + n] * amp[j0 + n].conj();
                                }
                            }
                            rho[(2 * b + e, 2 * bp + ep)] += s * w;
                        }
                    }
                }
            }
        }
    }
    let adj = rho.adjoint();
    let rho = (rho + adj) * Complex64::from(0.5);
    let tr = rho.trace().re;
    TwoQubitState::new(rho / Complex64::from(tr))
}

/// E and H from commutator and anticommutator vacuum expectations of the
/// truncated smeared field operators, mode by mode.
pub fn oracle_bilinears(model: &DiscreteModeModel) -> Result<BilinearTable> {
    let a = annihilation(2);
    let ad = a.adjoint();
    let mut e = Matrix4::<f64>::zeros();
    let mut h = Matrix4::<f64>::zeros();
    for m in 0..model.modes() {
        let phi: Vec<DMatrix<Complex64>> = (0..4)
            .map(|b| &a * model.alpha(b, m).conj() + &ad * model.alpha(b, m))
            .collect();
        for i in 0..4 {
            for j in i..4 {
                let pq = &phi[i] * &phi[j];
                let qp = &phi[j] * &phi[i];
                let comm = (&pq - &qp)[(0, 0)];
                let anti = (&pq + &qp)[(0, 0)];
                // [φ_i, φ_j] = i E_ij
                if i != j {
                    e[(i, j)] += comm.im;
                }
                h[(i, j)] += anti.re;
            }
        }
    }
    for i in 0..4 {
        for j in i + 1..4 {
            e[(j, i)] = -e[(i, j)];
            h[(j, i)] = h[(i, j)];
        }
    }
    BilinearTable::new(e, h)
}

/// Single-qubit Alice encoding U_A (c₁|+z⟩ + c₂|-z⟩)|0⟩, returned with the
/// qubit as the most significant index.
pub fn alice_encode(model: &DiscreteModeModel, psi_a: Vector2<Complex64>, fock: TruncatedFock) -> Result<FockState> {
    let fock_dim = fock
        .dimension(model.modes())
        .ok_or(Error::MemoryBound { dimension: usize::MAX, limit: MAX_STATE_LEN })?;
    let mut state = FockState::with_vacuum(&[psi_a[0], psi_a[1]], fock_dim)?;
    for s in &Ordering::Ideal.steps()[..2] {
        let u = controlled_unitary(s.axis, displacement_operator(model, s.basis, s.sign, fock)?);
        state.apply_controlled(0, &u);
    }
    Ok(state)
}

/// ‖(φ(f₂) ∓ E(f₁,f₂)) |±α⟩‖ with |±α⟩ = e^{±iφ(f₁)}|0⟩; the exact value is
/// sqrt(W(f₂,f₂)), which makes |±α⟩ approximate eigenvectors when
/// E(f₁,f₂)² ≫ W(f₂,f₂).
pub fn eigenvector_residual(model: &DiscreteModeModel, sign: f64, fock: TruncatedFock) -> Result<f64> {
    let fock_dim = fock
        .dimension(model.modes())
        .filter(|&d| d <= MAX_STATE_LEN)
        .ok_or(Error::MemoryBound { dimension: usize::MAX, limit: MAX_STATE_LEN })?;
    let d = displacement_operator(model, 0, sign, fock)?;
    let mut vac = vec![C0; fock_dim];
    vac[0] = C1;
    let coh = d.apply(&vac);
    let table = oracle_bilinears(model)?;
    let e12 = table.e()[(0, 1)];
    let a = annihilation(fock.n);
    let ad = a.adjoint();
    let mut out: Vec<Complex64> = coh.iter().map(|z| -z * sign * e12).collect();
    let ident = DMatrix::<Complex64>::identity(fock.levels(), fock.levels());
    for m in 0..model.modes() {
        let al = model.alpha(1, m);
        let phi_m = &a * al.conj() + &ad * al;
        let mut factors = vec![ident.clone(); model.modes()];
        factors[m] = phi_m;
        let term = FockOperator::new(factors)?.apply(&coh);
        for (o, t) in out.iter_mut().zip(term) {
            *o += t;
        }
    }
    Ok(out.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{assemble_rho_eb, spacelike_rho_eb, to_dmatrix4, trace_distance, ProtocolSpec, QubitState};
    use crate::weyl::{protocol_word, quasifree_expectation, WeylWord};
    use std::f64::consts::{FRAC_PI_4, PI};

    fn cz(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn closed_form_matches_dense_exponential() {
        for beta in [cz(0.3, -0.2), cz(1.5, 0.7), cz(-2.0, 0.0)] {
            let n = 60;
            let d = displacement_matrix(beta, n);
            let x = displacement_matrix_expm(beta, n);
            let mut worst: f64 = 0.0;
            for i in 0..=30 {
                for j in 0..=30 {
                    worst = worst.max((d[(i, j)] - x[(i, j)]).norm());
                }
            }
            assert!(worst < 1e-10, "{beta}: {worst}");
        }
    }

    #[test]
    fn zero_displacement_is_identity() {
        let d = displacement_matrix(C0, 10);
        assert_eq!(d, DMatrix::identity(11, 11));
        let model = DiscreteModeModel::new([vec![C0], vec![C0], vec![C0], vec![C0]]).unwrap();
        let op = displacement_operator(&model, 0, 1.0, TruncatedFock::new(8)).unwrap();
        let x: Vec<Complex64> = (0..9).map(|k| cz(k as f64, 1.0)).collect();
        assert_eq!(op.apply(&x), x);
    }

    #[test]
    fn displacement_is_unitary_below_the_edge() {
        let d = FockOperator::new(vec![displacement_matrix(cz(1.2, -1.4), 60)]).unwrap();
        // the tail of D|n⟩ reaches the edge for n near N/2 at this amplitude
        assert!(d.unitarity_defect(20) < 1e-12);
        assert!(d.unitarity_defect(30) > 1e-8);
    }

    #[test]
    fn vacuum_overlap_matches_quasifree_value() {
        let model = DiscreteModeModel::new([
            vec![cz(0.4, 0.3), cz(-0.2, 0.5)],
            vec![cz(0.1, 0.0), cz(0.0, 0.2)],
            vec![C0, C0],
            vec![C0, C0],
        ])
        .unwrap();
        let fock = TruncatedFock::new(30);
        let op = displacement_operator(&model, 0, 1.0, fock).unwrap();
        let mut vac = vec![C0; 31 * 31];
        vac[0] = C1;
        let overlap = op.apply(&vac)[0];
        let sum: f64 = (0..2).map(|m| model.alpha(0, m).norm_sqr()).sum();
        assert!((overlap - Complex64::from((-sum / 2.0).exp())).norm() < 1e-14);
        let table = oracle_bilinears(&model).unwrap();
        let w = quasifree_expectation(&WeylWord::<i64>::from_factors(vec![[1, 0, 0, 0]]), &table);
        assert!((overlap - w).norm() < 1e-14);
    }

    #[test]
    fn product_of_two_displacements_matches_weyl_relation() {
        let model = DiscreteModeModel::new([
            vec![cz(0.5, 0.1)],
            vec![cz(-0.2, 0.6)],
            vec![C0],
            vec![C0],
        ])
        .unwrap();
        let fock = TruncatedFock::new(40);
        let d1 = displacement_operator(&model, 0, 1.0, fock).unwrap();
        let d2 = displacement_operator(&model, 1, 1.0, fock).unwrap();
        let mut vac = vec![C0; 41];
        vac[0] = C1;
        let v = d1.apply(&d2.apply(&vac))[0];
        let table = oracle_bilinears(&model).unwrap();
        let w = quasifree_expectation(&WeylWord::<i64>::from_factors(vec![[1, 0, 0, 0], [0, 1, 0, 0]]), &table);
        assert!((v - w).norm() < 1e-8);
    }

    #[test]
    fn oracle_bilinears_hand_check() {
        let a = [cz(1.0, 0.5), cz(-0.3, 0.2)];
        let b = [cz(0.2, -0.4), cz(0.7, 0.1)];
        let model = DiscreteModeModel::new([a.to_vec(), b.to_vec(), a.to_vec(), vec![C0, C0]]).unwrap();
        let t = oracle_bilinears(&model).unwrap();
        let w: Complex64 = a[0].conj() * b[0] + a[1].conj() * b[1];
        assert!((t.e()[(0, 1)] - 2.0 * w.im).abs() < 1e-15);
        assert!((t.h()[(0, 1)] - 2.0 * w.re).abs() < 1e-15);
        let waa = a[0].norm_sqr() + a[1].norm_sqr();
        assert!((t.h()[(0, 0)] - 2.0 * waa).abs() < 1e-15);
        assert_eq!(t.e()[(0, 2)], 0.0);
    }

    #[test]
    fn controlled_unitary_examples() {
        let ident = FockOperator::new(vec![DMatrix::identity(5, 5)]).unwrap();
        let u = controlled_unitary(Axis::X, ident);
        let b0: Vec<Complex64> = (0..5).map(|k| cz(k as f64, 0.0)).collect();
        let b1: Vec<Complex64> = (0..5).map(|k| cz(0.0, k as f64)).collect();
        let (n0, n1) = u.apply_blocks(&b0, &b1);
        for k in 0..5 {
            assert!((n0[k] - b0[k]).norm() < 1e-15 && (n1[k] - b1[k]).norm() < 1e-15);
        }
        let d = FockOperator::new(vec![displacement_matrix(cz(0.4, 0.2), 20)]).unwrap();
        let u = controlled_unitary(Axis::Z, d.clone());
        let mut vac = vec![C0; 21];
        vac[0] = C1;
        let zero = vec![C0; 21];
        let (n0, n1) = u.apply_blocks(&vac, &zero);
        assert_eq!(n0, d.apply(&vac));
        assert!(n1.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn zero_couplings_leave_bob_alone() {
        let model = DiscreteModeModel::new([vec![C0], vec![C0], vec![C0], vec![C0]]).unwrap();
        let out = simulate_protocol(&model, &TwoQubitState::bell(), &QubitState::plus_y(), &Ordering::Ideal, TruncatedFock::new(4)).unwrap();
        let expect = TwoQubitState::product(&QubitState::plus_y(), &TwoQubitState::bell().trace_second());
        assert!((out.matrix() - expect.matrix()).norm() < 1e-14);
    }

    #[test]
    fn small_coupling_matches_assembly() {
        let model = DiscreteModeModel::new([
            vec![cz(0.3, 0.1), cz(0.1, -0.2)],
            vec![cz(-0.1, 0.25), cz(0.2, 0.05)],
            vec![cz(0.2, -0.1), cz(0.0, 0.3)],
            vec![cz(0.15, 0.15), cz(-0.25, 0.0)],
        ])
        .unwrap();
        let table = oracle_bilinears(&model).unwrap();
        let sim = simulate_protocol(&model, &TwoQubitState::bell(), &QubitState::plus_y(), &Ordering::Ideal, TruncatedFock::new(20)).unwrap();
        let exact = assemble_rho_eb(&ProtocolSpec::new(table)).unwrap();
        assert!(trace_distance(&to_dmatrix4(sim.matrix()), &to_dmatrix4(exact.matrix())) < 1e-10);
    }

    #[test]
    fn strong_coupling_fine_tuned_matches_assembly() {
        // single mode, ratio c = |α₁|/|α₂| = 40 and E(f₁,f₂) = π/4; branch
        // amplitudes reach 2|α₁| ≈ 8, so the truncation is raised to 140
        let c = 40.0;
        let a2 = (PI / (8.0 * c)).sqrt();
        let model = DiscreteModeModel::new([
            vec![Complex64::from(c * a2)],
            vec![cz(0.0, a2)],
            vec![Complex64::from(c * a2)],
            vec![cz(0.0, a2)],
        ])
        .unwrap();
        let table = oracle_bilinears(&model).unwrap();
        assert!((table.e()[(0, 1)] - FRAC_PI_4).abs() < 1e-14);
        let sim = simulate_protocol(&model, &TwoQubitState::bell(), &QubitState::plus_y(), &Ordering::Ideal, TruncatedFock::new(140)).unwrap();
        let exact = assemble_rho_eb(&ProtocolSpec::new(table)).unwrap();
        assert!(trace_distance(&to_dmatrix4(sim.matrix()), &to_dmatrix4(exact.matrix())) < 1e-6);
    }

    #[test]
    fn spacelike_model_is_input_independent() {
        // Alice couples to mode 0 only, Bob to mode 1 only
        let model = DiscreteModeModel::new([
            vec![cz(0.6, 0.0), C0],
            vec![cz(0.0, 0.5), C0],
            vec![C0, cz(0.4, 0.2)],
            vec![C0, cz(-0.3, 0.3)],
        ])
        .unwrap();
        let table = oracle_bilinears(&model).unwrap();
        assert_eq!(table.max_cross_e(), 0.0);
        let fock = TruncatedFock::new(30);
        let mut outs = Vec::new();
        for input in [QubitState::plus_z(), QubitState::minus_z(), QubitState::plus_y()] {
            let rho_ea = input.with_trivial_environment();
            let a = simulate_protocol(&model, &rho_ea, &QubitState::plus_y(), &Ordering::Ideal, fock).unwrap();
            let b = simulate_protocol(&model, &rho_ea, &QubitState::plus_y(), &Ordering::Spacelike, fock).unwrap();
            assert!((a.matrix() - b.matrix()).norm() < 1e-12);
            let p = spacelike_rho_eb(&ProtocolSpec::new(table.clone()).with_input(rho_ea), 0.0).unwrap();
            assert!(trace_distance(&to_dmatrix4(a.matrix()), &to_dmatrix4(p.matrix())) < 1e-10);
            outs.push(a);
        }
        for o in &outs[1..] {
            assert!((o.matrix() - outs[0].matrix()).norm() < 1e-12);
        }
    }

    #[test]
    fn alice_encoding_approaches_swap() {
        // |+y⟩(c₁|+α⟩ - i c₂|-α⟩) with fidelity rising with the coupling ratio
        let (c1, c2) = (cz(0.6, 0.0), cz(0.0, 0.8));
        let fock = TruncatedFock::new(60);
        let mut prev = 0.0;
        for r1 in [2.0, 3.0, 4.0, 5.0] {
            let r2 = PI / (8.0 * r1);
            let model = DiscreteModeModel::new([vec![Complex64::from(r1)], vec![cz(0.0, r2)], vec![C0], vec![C0]]).unwrap();
            let out = alice_encode(&model, Vector2::new(c1, c2), fock).unwrap();
            let mut vac = vec![C0; 61];
            vac[0] = C1;
            let plus = displacement_operator(&model, 0, 1.0, fock).unwrap().apply(&vac);
            let minus = displacement_operator(&model, 0, -1.0, fock).unwrap().apply(&vac);
            let field: Vec<Complex64> = plus.iter().zip(&minus).map(|(p, m)| c1 * p - Complex64::i() * c2 * m).collect();
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let y = [cz(s, 0.0), cz(0.0, s)];
            let mut overlap = C0;
            for q in 0..2 {
                for n in 0..61 {
                    overlap += (y[q] * field[n]).conj() * out.amplitudes()[q * 61 + n];
                }
            }
            let fid = overlap.norm_sqr();
            assert!(fid > prev);
            prev = fid;
        }
        assert!(prev > 0.99);
    }

    #[test]
    fn approximate_eigenvector_bound() {
        let r1 = 3.0;
        let r2 = PI / (8.0 * r1);
        let model = DiscreteModeModel::new([vec![Complex64::from(r1)], vec![cz(0.0, r2)], vec![C0], vec![C0]]).unwrap();
        let t = oracle_bilinears(&model).unwrap();
        for sign in [1.0, -1.0] {
            let res = eigenvector_residual(&model, sign, TruncatedFock::default()).unwrap();
            let e = t.e()[(0, 1)].abs();
            let bound = t.w_diag(1).sqrt() / e;
            assert!(res / e <= bound * (1.0 + 1e-9));
            assert!((res - t.w_diag(1).sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn truncation_limits() {
        let model = DiscreteModeModel::new([vec![Complex64::from(5.0)], vec![C0], vec![C0], vec![C0]]).unwrap();
        assert!(matches!(
            simulate_protocol(&model, &TwoQubitState::bell(), &QubitState::plus_y(), &Ordering::Ideal, TruncatedFock::new(10)),
            Err(Error::TruncationTooSmall { .. })
        ));
        let big = DiscreteModeModel::new([vec![C0; 5], vec![C0; 5], vec![C0; 5], vec![C0; 5]]).unwrap();
        assert!(matches!(
            simulate_protocol(&big, &TwoQubitState::bell(), &QubitState::plus_y(), &Ordering::Ideal, TruncatedFock::new(60)),
            Err(Error::MemoryBound { .. })
        ));
    }

    #[test]
    fn matched_discretization_reproduces_field_table() {
        use crate::field::{mode_amplitude, table_from_amplitudes, SmearingSpec, SpacetimeModel, SpatialProfile, TemporalKind};
        use crate::grid::KGrid;
        use std::sync::Arc;
        let model = SpacetimeModel::minkowski(1, 0.5).unwrap();
        let grid = Arc::new(KGrid::tensor(1, 10.0, 32).unwrap());
        let specs = [
            SmearingSpec::new(0.8, TemporalKind::Delta(0.0), SpatialProfile::gaussian(vec![0.0], 1.0)),
            SmearingSpec::new(0.5, TemporalKind::DeltaPrime(0.2), SpatialProfile::gaussian(vec![0.3], 0.7)),
            SmearingSpec::new(1.1, TemporalKind::Delta(1.5), SpatialProfile::gaussian(vec![1.0], 1.2)),
            SmearingSpec::new(0.3, TemporalKind::DeltaPrime(1.7), SpatialProfile::gaussian(vec![-0.5], 0.9)),
        ];
        let amps = specs.map(|s| mode_amplitude(&model, &s, &grid).unwrap());
        let field = table_from_amplitudes(&amps).unwrap();
        let oracle = oracle_bilinears(&DiscreteModeModel::from_amplitudes(&amps).unwrap()).unwrap();
        let scale = field.h().amax();
        assert!((field.e() - oracle.e()).amax() <= 1e-12 * scale);
        assert!((field.h() - oracle.h()).amax() <= 1e-12 * scale);
    }

    #[test]
    fn every_sign_pattern_matches_operator_product() {
        // single-pattern check of the word expectation against the operator product
        let model = DiscreteModeModel::new([
            vec![cz(0.3, 0.2)],
            vec![cz(-0.1, 0.4)],
            vec![cz(0.2, 0.0)],
            vec![cz(0.0, -0.3)],
        ])
        .unwrap();
        let table = oracle_bilinears(&model).unwrap();
        let fock = TruncatedFock::new(40);
        let x = [1i8, -1, 1, 1];
        let z = [-1i8, 1, 1, -1];
        let word = protocol_word(x, z);
        let mut v = vec![C0; 41];
        v[0] = C1;
        for c in word.factors().iter().rev() {
            let b = c.iter().position(|&k| k != 0).unwrap();
            v = displacement_operator(&model, b, c[b] as f64, fock).unwrap().apply(&v);
        }
        assert!((v[0] - quasifree_expectation(&word, &table)).norm() < 1e-10);
    }
    #[test]
    fn truncation_has_converged_at_the_default() {
        // two modes with per-mode reachable amplitude 2
        let model = DiscreteModeModel::new([
            vec![cz(0.5, 0.3), cz(-0.2, 0.4)],
            vec![cz(-0.3, 0.4), cz(0.5, 0.1)],
            vec![cz(0.2, -0.1), cz(0.3, -0.4)],
            vec![cz(0.4, 0.2), cz(-0.2, 0.3)],
        ])
        .unwrap();
        let scale: f64 = 2.0 / model.reachable_amplitude();
        let model = DiscreteModeModel::new(std::array::from_fn(|b| (0..2).map(|m| model.alpha(b, m) * scale).collect())).unwrap();
        assert!((model.reachable_amplitude() - 2.0).abs() < 1e-12);
        let run = |n| {
            simulate_protocol(&model, &TwoQubitState::bell(), &QubitState::plus_y(), &Ordering::Ideal, TruncatedFock::new(n)).unwrap()
        };
        let (a, b) = (run(DEFAULT_TRUNCATION), run(DEFAULT_TRUNCATION + 20));
        assert!(trace_distance(&to_dmatrix4(a.matrix()), &to_dmatrix4(b.matrix())) <= 1e-7);
    }
}
