//! Weyl-generator words over the basis {f₁, f₂, g₁, g₂} and their quasifree
//! vacuum expectation values.
//!
//! W(a) W(b) = e^{-(i/2) E(a, b)} W(a + b) and ω(W(h)) = e^{-W(h, h)/2} with
//! W(h, h) = hᵀ H h / 2.

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const F1: usize = 0;
pub const F2: usize = 1;
pub const G1: usize = 2;
pub const G2: usize = 3;
pub const BASIS_LABELS: [&str; 4] = ["f1", "f2", "g1", "g2"];

/// Causal propagator E and Hadamard function H over the four basis smearings.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearTable {
    e: Matrix4<f64>,
    h: Matrix4<f64>,
}

impl BilinearTable {
    /// Checks exact (anti)symmetry, finiteness, H ⪰ 0 and the
    /// Cauchy-Schwarz bound E(a,b)² ≤ 4 W(a,a) W(b,b).
    pub fn new(e: Matrix4<f64>, h: Matrix4<f64>) -> Result<Self> {
        if e.iter().chain(h.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidTable("non-finite entry".into()));
        }
        if e != -e.transpose() {
            return Err(Error::InvalidTable("E is not exactly antisymmetric".into()));
        }
        if h != h.transpose() {
            return Err(Error::InvalidTable("H is not exactly symmetric".into()));
        }
        let scale = h.abs().max().max(1.0);
        let min_eig = h.symmetric_eigenvalues().min();
        if min_eig < -1e-10 * scale {
            return Err(Error::InvalidTable(format!("H not positive semidefinite (eigenvalue {min_eig:.3e})")));
        }
        let table = Self { e, h };
        for i in 0..4 {
            for j in 0..4 {
                let bound = 4.0 * table.w_diag(i).max(0.0) * table.w_diag(j).max(0.0);
                let e2 = e[(i, j)] * e[(i, j)];
                if e2 > bound * (1.0 + 1e-10) + 1e-14 {
                    return Err(Error::InvalidTable(format!(
                        "E({},{})² = {e2:.6e} exceeds 4 W W = {bound:.6e}",
                        BASIS_LABELS[i], BASIS_LABELS[j]
                    )));
                }
            }
        }
        Ok(table)
    }

    pub fn zero() -> Self {
        Self { e: Matrix4::zeros(), h: Matrix4::zeros() }
    }

    pub fn e(&self) -> &Matrix4<f64> {
        &self.e
    }

    pub fn h(&self) -> &Matrix4<f64> {
        &self.h
    }

    /// W(b_i, b_i) = H_ii / 2
    pub fn w_diag(&self, i: usize) -> f64 {
        0.5 * self.h[(i, i)]
    }

    /// W(b_i, b_j) = H_ij / 2 + i E_ij / 2
    pub fn w(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(0.5 * self.h[(i, j)], 0.5 * self.e[(i, j)])
    }

    /// Full complex 4×4 Wightman matrix (a Gram matrix for physical tables).
    pub fn wightman_matrix(&self) -> Matrix4<Complex64> {
        Matrix4::from_fn(|i, j| self.w(i, j))
    }

    /// Smallest eigenvalue of the Wightman matrix; non-negative for tables
    /// that come from an actual one-particle space.
    pub fn gram_min_eigenvalue(&self) -> f64 {
        self.wightman_matrix().symmetric_eigenvalues().min()
    }

    /// max |E(f_i, g_j)| over the Alice-Bob cross block.
    pub fn max_cross_e(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in [F1, F2] {
            for j in [G1, G2] {
                m = m.max(self.e[(i, j)].abs());
            }
        }
        m
    }

    /// Ratio E(a,b)² / (W(a,a) W(b,b)) over all pairs, the tightness of the
    /// uncertainty bound (≤ 4 for any state, with equality only in degenerate cases).
    pub fn max_uncertainty_ratio(&self) -> f64 {
        let mut r: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let ww = self.w_diag(i) * self.w_diag(j);
                if ww > 0.0 {
                    r = r.max(self.e[(i, j)].powi(2) / ww);
                }
            }
        }
        r
    }
}

/// Coefficient types admissible in a word: integers keep the phase
/// bookkeeping exact; reals are accepted for oracle tests.
pub trait Coefficient: Copy + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn neg(self) -> Self;
    // acc_i next_j - acc_j next_i
    fn cross(ai: Self, nj: Self, aj: Self, ni: Self) -> Self;
    fn to_f64(self) -> f64;
}

impl Coefficient for i64 {
    fn zero() -> Self {
        0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn neg(self) -> Self {
        -self
    }
    fn cross(ai: Self, nj: Self, aj: Self, ni: Self) -> Self {
        ai * nj - aj * ni
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Coefficient for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn neg(self) -> Self {
        -self
    }
    fn cross(ai: Self, nj: Self, aj: Self, ni: Self) -> Self {
        ai * nj - aj * ni
    }
    fn to_f64(self) -> f64 {
        self
    }
}

/// Ordered product W(c¹·b) W(c²·b) ... times a unit-modulus phase.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylWord<C: Coefficient = i64> {
    factors: Vec<[C; 4]>,
    phase: Complex64,
}

impl<C: Coefficient> Default for WeylWord<C> {
    fn default() -> Self {
        Self::identity()
    }
}

impl<C: Coefficient> WeylWord<C> {
    pub fn identity() -> Self {
        Self { factors: Vec::new(), phase: Complex64::new(1.0, 0.0) }
    }

    pub fn from_factors(factors: Vec<[C; 4]>) -> Self {
        Self { factors, phase: Complex64::new(1.0, 0.0) }
    }

    /// Single generator carrying a phase, e.g. the output of `reduce`.
    pub fn reduced(total: [C; 4], phase: Complex64) -> Self {
        Self { factors: vec![total], phase }
    }

    pub fn factors(&self) -> &[[C; 4]] {
        &self.factors
    }

    pub fn phase(&self) -> Complex64 {
        self.phase
    }

    /// Concatenation, phases multiplied.
    pub fn concat(&self, other: &WeylWord<C>) -> Self {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        Self { factors, phase: self.phase * other.phase }
    }

    /// Reversed word with negated coefficients: the adjoint generator product.
    pub fn adjoint(&self) -> Self {
        Self {
            factors: self
                .factors
                .iter()
                .rev()
                .map(|c| [c[0].neg(), c[1].neg(), c[2].neg(), c[3].neg()])
                .collect(),
            phase: self.phase.conj(),
        }
    }
}

/// Appends a factor; reduction is deferred to [`reduce`].
pub fn compose<C: Coefficient>(word: &WeylWord<C>, factor: [C; 4]) -> WeylWord<C> {
    let mut factors = word.factors.clone();
    factors.push(factor);
    WeylWord { factors, phase: word.phase }
}

/// Left-to-right fold of the Weyl relation. The antisymmetric pair counts
/// n_ij = Σ (acc_i next_j - acc_j next_i) are accumulated in the coefficient
/// type and converted to a phase once at the end.
pub fn reduce<C: Coefficient>(word: &WeylWord<C>, table: &BilinearTable) -> ([C; 4], Complex64) {
    let mut iter = word.factors.iter();
    let mut acc = match iter.next() {
        Some(first) => *first,
        None => return ([C::zero(); 4], word.phase),
    };
    let mut counts = [[C::zero(); 4]; 4];
    for next in iter {
        for i in 0..4 {
            for j in i + 1..4 {
                counts[i][j] = counts[i][j].add(C::cross(acc[i], next[j], acc[j], next[i]));
            }
        }
        for i in 0..4 {
            acc[i] = acc[i].add(next[i]);
        }
    }
    let mut angle = 0.0;
    for i in 0..4 {
        for j in i + 1..4 {
            angle += counts[i][j].to_f64() * table.e[(i, j)];
        }
    }
    (acc, word.phase * Complex64::from_polar(1.0, -0.5 * angle))
}

/// ω of the word in the quasifree state with two-point data `table`.
pub fn quasifree_expectation<C: Coefficient>(word: &WeylWord<C>, table: &BilinearTable) -> Complex64 {
    let (total, phase) = reduce(word, table);
    let c: [f64; 4] = [total[0].to_f64(), total[1].to_f64(), total[2].to_f64(), total[3].to_f64()];
    let mut q = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            q += c[i] * c[j] * table.h[(i, j)];
        }
    }
    phase * (-0.25 * q).exp()
}

/// The eight-factor protocol word
/// W(z₁f₁) W(x₁f₂) W(x₂g₂) W(z₂g₁) W(z₃g₁) W(x₃g₂) W(x₄f₂) W(z₄f₁).
pub fn protocol_word(x: [i8; 4], z: [i8; 4]) -> WeylWord<i64> {
    let unit = |b: usize, s: i8| {
        let mut c = [0i64; 4];
        c[b] = s as i64;
        c
    };
    WeylWord::from_factors(vec![
        unit(F1, z[0]),
        unit(F2, x[0]),
        unit(G2, x[1]),
        unit(G1, z[1]),
        unit(G1, z[2]),
        unit(G2, x[2]),
        unit(F2, x[3]),
        unit(F1, z[3]),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedFormMode {
    /// g_i = f_i; only the f-block of the table is read
    SameSmearing,
    /// distinct Alice and Bob smearings
    General,
}

/// Explicit exponential form of ω for the protocol word, written out by
/// hand and independent of [`reduce`].
pub fn omega_o_closed_form(x: [i8; 4], z: [i8; 4], table: &BilinearTable, mode: ClosedFormMode) -> Complex64 {
    let [x1, x2, x3, x4] = x.map(f64::from);
    let [z1, z2, z3, z4] = z.map(f64::from);
    let e = &table.e;
    let h = &table.h;
    match mode {
        ClosedFormMode::SameSmearing => {
            let sz = z1 + z2 + z3 + z4;
            let sx = x1 + x2 + x3 + x4;
            let gauss = -0.5 * sz * sz * table.w_diag(F1) - 0.5 * sx * sx * table.w_diag(F2) - 0.5 * sx * sz * h[(F1, F2)];
            let angle = -0.5 * (x1 + x2) * (z1 - z2 - z3 - z4) * e[(F1, F2)]
                - 0.5 * (x3 + x4) * (z1 + z2 + z3 - z4) * e[(F1, F2)];
            Complex64::from_polar(gauss.exp(), angle)
        }
        ClosedFormMode::General => {
            let angle = -0.5
                * ((z1 - z4) * (x1 + x4) * e[(F1, F2)]
                    + (z2 + z3) * (x3 - x2) * e[(G1, G2)]
                    + (z2 + z3) * (z1 - z4) * e[(F1, G1)]
                    + (z1 - z4) * (x2 + x3) * e[(F1, G2)]
                    + (z2 + z3) * (x1 - x4) * e[(F2, G1)]
                    + (x2 + x3) * (x1 - x4) * e[(F2, G2)]);
            let (a, b, c, d) = (z1 + z4, x1 + x4, z2 + z3, x2 + x3);
            let gauss = -0.5
                * (a * a * table.w_diag(F1)
                    + b * b * table.w_diag(F2)
                    + c * c * table.w_diag(G1)
                    + d * d * table.w_diag(G2))
                - 0.5
                    * (a * b * h[(F1, F2)]
                        + c * a * h[(F1, G1)]
                        + d * a * h[(F1, G2)]
                        + c * b * h[(F2, G1)]
                        + d * b * h[(F2, G2)]
                        + d * c * h[(G1, G2)]);
            Complex64::from_polar(gauss.exp(), angle)
        }
    }
}

/// All 256 sign patterns in a fixed order: bit k of the index set means
/// sign -1 for the k-th entry of (x₁..x₄, z₁..z₄).
pub fn sign_patterns() -> impl Iterator<Item = ([i8; 4], [i8; 4])> {
    (0u32..256).map(|m| {
        let s = |k: u32| if m >> k & 1 == 1 { -1i8 } else { 1i8 };
        ([s(0), s(1), s(2), s(3)], [s(4), s(5), s(6), s(7)])
    })
}
