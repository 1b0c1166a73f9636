//! Momentum-space quadrature grids.
//!
//! All rules are composite 16-node Gauss-Legendre. Tensor grids are built on
//! [-Λ, Λ] per axis and symmetrized exactly, so k = 0 is never a node and
//! every node has an exact mirror -k. Radial grids cover [0, Λ] with the
//! 4πk² angular measure folded into the weights.

use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};

pub const PANEL_NODES: usize = 16;

fn reference_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let gl = GaussLegendre::new(PANEL_NODES).expect("16-node rule");
        let mut pairs: Vec<(f64, f64)> = gl.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        // enforce exact reflection symmetry of the reference rule
        for i in 0..PANEL_NODES / 2 {
            let j = PANEL_NODES - 1 - i;
            let x = 0.5 * (pairs[j].0 - pairs[i].0);
            let w = 0.5 * (pairs[j].1 + pairs[i].1);
            pairs[i] = (-x, w);
            pairs[j] = (x, w);
        }
        pairs
    })
}

/// Composite Gauss-Legendre nodes and weights on [a, b] with `panels` panels.
pub fn composite_rule(a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = reference_rule();
    let h = (b - a) / panels as f64;
    let mut x = Vec::with_capacity(panels * PANEL_NODES);
    let mut w = Vec::with_capacity(panels * PANEL_NODES);
    for p in 0..panels {
        let lo = a + h * p as f64;
        let mid = lo + 0.5 * h;
        for &(t, wt) in rule {
            x.push(mid + 0.5 * h * t);
            w.push(0.5 * h * wt);
        }
    }
    (x, w)
}

/// Integrate a smooth function over [a, b] with a composite rule.
pub fn integrate<F: FnMut(f64) -> f64>(a: f64, b: f64, panels: usize, mut f: F) -> f64 {
    let rule = reference_rule();
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let mid = a + h * (p as f64 + 0.5);
        let mut s = 0.0;
        for &(t, wt) in rule {
            s += wt * f(mid + 0.5 * h * t);
        }
        acc += 0.5 * h * s;
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    /// full tensor-product grid over ℝⁿ
    Tensor,
    /// |k| only, n = 3, for spherically symmetric integrands
    Radial,
    /// explicit node list supplied by the caller
    Nodes,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KGrid {
    kind: GridKind,
    dimension: usize,
    cutoff: f64,
    points_per_axis: usize,
    // flattened node coordinates: `stride` numbers per node
    coords: Vec<f64>,
    stride: usize,
    weights: Vec<f64>,
    mirror: Vec<usize>,
}

impl KGrid {
    /// Symmetric tensor-product grid on [-Λ, Λ]ⁿ.
    pub fn tensor(dimension: usize, cutoff: f64, points_per_axis: usize) -> Result<Self> {
        check_cutoff(cutoff)?;
        check_points(points_per_axis)?;
        if dimension == 0 {
            return Err(Error::InvalidParameter("grid dimension must be >= 1".into()));
        }
        let (mut x, mut w) = composite_rule(-cutoff, cutoff, points_per_axis / PANEL_NODES);
        let p = points_per_axis;
        for i in 0..p / 2 {
            let j = p - 1 - i;
            x[i] = -x[j];
            w[i] = w[j];
        }
        let total = p
            .checked_pow(dimension as u32)
            .filter(|&t| t <= 1 << 26)
            .ok_or_else(|| Error::InvalidParameter("tensor grid too large".into()))?;
        let mut coords = Vec::with_capacity(total * dimension);
        let mut weights = Vec::with_capacity(total);
        let mut mirror = Vec::with_capacity(total);
        let mut idx = vec![0usize; dimension];
        for flat in 0..total {
            let mut rem = flat;
            for d in (0..dimension).rev() {
                idx[d] = rem % p;
                rem /= p;
            }
            let mut wt = 1.0;
            let mut mflat = 0;
            for d in 0..dimension {
                coords.push(x[idx[d]]);
                wt *= w[idx[d]];
                mflat = mflat * p + (p - 1 - idx[d]);
            }
            weights.push(wt);
            mirror.push(mflat);
        }
        Ok(Self {
            kind: GridKind::Tensor,
            dimension,
            cutoff,
            points_per_axis,
            coords,
            stride: dimension,
            weights,
            mirror,
        })
    }

    /// Radial grid on (0, Λ] for three spatial dimensions.
    pub fn radial(cutoff: f64, points: usize) -> Result<Self> {
        check_cutoff(cutoff)?;
        check_points(points)?;
        let (k, w) = composite_rule(0.0, cutoff, points / PANEL_NODES);
        let weights = k
            .iter()
            .zip(&w)
            .map(|(&k, &w)| 4.0 * std::f64::consts::PI * k * k * w)
            .collect();
        Ok(Self {
            kind: GridKind::Radial,
            dimension: 3,
            cutoff,
            points_per_axis: points,
            mirror: (0..k.len()).collect(),
            coords: k,
            stride: 1,
            weights,
        })
    }

    /// Explicit nodes (each of length `dimension`) with positive weights. The
    /// set must be closed under k -> -k.
    pub fn from_nodes(dimension: usize, nodes: &[Vec<f64>], weights: &[f64]) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::InvalidParameter("node and weight lists must match and be non-empty".into()));
        }
        if nodes.iter().any(|n| n.len() != dimension) {
            return Err(Error::InvalidParameter("node of wrong dimension".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidParameter("weights must be positive and finite".into()));
        }
        let mut mirror = Vec::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if n.iter().all(|&c| c == 0.0) {
                return Err(Error::InvalidParameter("k = 0 is not allowed as a node".into()));
            }
            let j = nodes
                .iter()
                .position(|m| m.iter().zip(n).all(|(a, b)| *a == -*b))
                .ok_or_else(|| Error::InvalidParameter(format!("node {i} has no mirror")))?;
            if weights[j] != weights[i] {
                return Err(Error::InvalidParameter(format!("node {i} and its mirror differ in weight")));
            }
            mirror.push(j);
        }
        let cutoff = nodes
            .iter()
            .flat_map(|n| n.iter().map(|c| c.abs()))
            .fold(0.0, f64::max);
        Ok(Self {
            kind: GridKind::Nodes,
            dimension,
            cutoff,
            points_per_axis: nodes.len(),
            coords: nodes.concat(),
            stride: dimension,
            weights: weights.to_vec(),
            mirror,
        })
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn is_radial(&self) -> bool {
        self.kind == GridKind::Radial
    }

    /// Node coordinates; a single |k| for radial grids.
    pub fn node(&self, i: usize) -> &[f64] {
        &self.coords[i * self.stride..(i + 1) * self.stride]
    }

    pub fn magnitude(&self, i: usize) -> f64 {
        self.node(i).iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Index of the node at -k (identity for radial grids).
    pub fn mirror(&self, i: usize) -> usize {
        self.mirror[i]
    }

    /// Same grid with the point count doubled and the cutoff scaled.
    pub fn refined(&self, cutoff_factor: f64) -> Result<Self> {
        match self.kind {
            GridKind::Tensor => {
                KGrid::tensor(self.dimension, self.cutoff * cutoff_factor, self.points_per_axis * 2)
            }
            GridKind::Radial => KGrid::radial(self.cutoff * cutoff_factor, self.points_per_axis * 2),
            GridKind::Nodes => Err(Error::Unsupported("explicit node grids cannot be refined".into())),
        }
    }
}

fn check_cutoff(cutoff: f64) -> Result<()> {
    if cutoff > 0.0 && cutoff.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("cutoff must be positive, got {cutoff}")))
    }
}

fn check_points(points: usize) -> Result<()> {
    if points >= PANEL_NODES && points % PANEL_NODES == 0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "points per axis must be a positive multiple of {PANEL_NODES}, got {points}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composite_rule_integrates_polynomials_and_trig() {
        let v = integrate(0.0, 2.0, 3, |x| x.powi(7));
        assert!((v - 2f64.powi(8) / 8.0).abs() < 1e-12);
        let v = integrate(0.0, std::f64::consts::PI, 4, f64::sin);
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn tensor_grid_is_symmetric_and_punctured() {
        for dim in [1, 3] {
            let g = KGrid::tensor(dim, 5.0, 16).unwrap();
            for i in 0..g.len() {
                let m = g.mirror(i);
                assert!(g.node(i).iter().zip(g.node(m)).all(|(a, b)| *a == -*b));
                assert_eq!(g.weight(i), g.weight(m));
                assert!(g.magnitude(i) > 0.0);
            }
        }
    }

    #[test]
    fn tensor_weights_sum_to_volume() {
        let g = KGrid::tensor(3, 2.0, 32).unwrap();
        let vol: f64 = g.weights().iter().sum();
        assert!((vol - 64.0).abs() < 1e-11);
    }

    #[test]
    fn radial_weights_give_ball_volume() {
        let g = KGrid::radial(3.0, 32).unwrap();
        let vol: f64 = g.weights().iter().sum();
        let exact = 4.0 / 3.0 * std::f64::consts::PI * 27.0;
        assert!((vol - exact).abs() < 1e-11);
    }

    #[test]
    fn rejects_bad_point_counts() {
        assert!(KGrid::tensor(1, 1.0, 20).is_err());
        assert!(KGrid::radial(1.0, 0).is_err());
        assert!(KGrid::radial(-1.0, 16).is_err());
    }

    #[test]
    fn explicit_nodes_need_mirrors() {
        let ok = KGrid::from_nodes(1, &[vec![1.0], vec![-1.0]], &[0.5, 0.5]);
        assert!(ok.is_ok());
        assert!(KGrid::from_nodes(1, &[vec![1.0], vec![2.0]], &[0.5, 0.5]).is_err());
        assert!(KGrid::from_nodes(1, &[vec![0.0]], &[1.0]).is_err());
    }
}
