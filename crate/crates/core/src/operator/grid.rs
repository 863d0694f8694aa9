use crate::{Error, Result};
use std::collections::HashMap;
use std::f64::consts::PI;

pub const MAX_GRID_NODES: usize = 20_000;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Tensor-product Gauss–Legendre grid over a box in four dimensions.
///
/// A grid may also be a subset of such a tensor grid (e.g. the support of a
/// potential); `multi_index` keeps each node's position in the full tensor.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub nodes: Vec<[f64; 4]>,
    pub weights: Vec<f64>,
    /// Radius of the 4D ball with the cell's volume, per node.
    pub cell_radius: Vec<f64>,
    pub multi_index: Vec<[usize; 4]>,
    pub nodes_per_dim: usize,
    pub extents: [(f64, f64); 4],
}

/// Radius of the four-ball of volume `w`.
pub fn equal_volume_radius(w: f64) -> f64 {
    (2.0 * w / (PI * PI)).powf(0.25)
}

pub fn build_grid(extents: [(f64, f64); 4], nodes_per_dim: usize) -> Result<QuadratureGrid> {
    if !(4..=16).contains(&nodes_per_dim) {
        return Err(Error::InvalidGrid(format!(
            "nodes_per_dim = {nodes_per_dim} outside [4, 16]"
        )));
    }
    let total = nodes_per_dim.pow(4);
    if total > MAX_GRID_NODES {
        return Err(Error::GridTooLarge {
            nodes: total,
            limit: MAX_GRID_NODES,
        });
    }
    for &(a, b) in &extents {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidGrid(format!("bad extent [{a}, {b}]")));
        }
    }
    let (x, w) = gauss_legendre(nodes_per_dim);
    let axes: Vec<(Vec<f64>, Vec<f64>)> = extents
        .iter()
        .map(|&(a, b)| {
            let h = 0.5 * (b - a);
            let c = 0.5 * (a + b);
            (
                x.iter().map(|xi| c + h * xi).collect(),
                w.iter().map(|wi| h * wi).collect(),
            )
        })
        .collect();
    let n = nodes_per_dim;
    let mut nodes = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    let mut multi_index = Vec::with_capacity(total);
    for i0 in 0..n {
        for i1 in 0..n {
            for i2 in 0..n {
                for i3 in 0..n {
                    let idx = [i0, i1, i2, i3];
                    nodes.push([axes[0].0[i0], axes[1].0[i1], axes[2].0[i2], axes[3].0[i3]]);
                    weights.push(idx.iter().enumerate().map(|(d, &i)| axes[d].1[i]).product());
                    multi_index.push(idx);
                }
            }
        }
    }
    let cell_radius = weights.iter().map(|&w| equal_volume_radius(w)).collect();
    Ok(QuadratureGrid {
        nodes,
        weights,
        cell_radius,
        multi_index,
        nodes_per_dim,
        extents,
    })
}

impl QuadratureGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn box_volume(&self) -> f64 {
        self.extents.iter().map(|(a, b)| b - a).product()
    }

    /// Diagonal of the bounding box.
    pub fn diameter(&self) -> f64 {
        self.extents.iter().map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt()
    }

    pub fn max_cell_radius(&self) -> f64 {
        self.cell_radius.iter().cloned().fold(0.0, f64::max)
    }

    pub fn integrate<F: Fn(&[f64; 4]) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(x)).sum()
    }

    /// Keep the nodes flagged in `keep`.
    pub fn subset(&self, keep: &[bool]) -> QuadratureGrid {
        fn pick<T: Copy>(v: &[T], keep: &[bool]) -> Vec<T> {
            v.iter()
                .zip(keep)
                .filter(|(_, &k)| k)
                .map(|(x, _)| *x)
                .collect()
        }
        QuadratureGrid {
            nodes: pick(&self.nodes, keep),
            weights: pick(&self.weights, keep),
            cell_radius: pick(&self.cell_radius, keep),
            multi_index: pick(&self.multi_index, keep),
            nodes_per_dim: self.nodes_per_dim,
            extents: self.extents,
        }
    }

    /// Index map of the reflection `x_axis ↦ −x_axis`, if the grid is closed under it.
    pub fn reflection(&self, axis: usize) -> Option<Vec<usize>> {
        let (a, b) = self.extents[axis];
        if (a + b).abs() > 1e-12 * (b - a) {
            return None;
        }
        let lookup: HashMap<[usize; 4], usize> = self
            .multi_index
            .iter()
            .enumerate()
            .map(|(i, m)| (*m, i))
            .collect();
        let n = self.nodes_per_dim;
        self.multi_index
            .iter()
            .map(|m| {
                let mut r = *m;
                r[axis] = n - 1 - m[axis];
                lookup.get(&r).copied()
            })
            .collect()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        dist(&self.nodes[i], &self.nodes[j])
    }
}

pub fn dist(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exactness() {
        let (x, w) = gauss_legendre(7);
        for k in 0..14 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn box_grid_volume_and_moments() {
        let g = build_grid([(-1.0, 1.0); 4], 6).unwrap();
        assert_eq!(g.len(), 1296);
        assert!((g.total_weight() - 16.0).abs() < 1e-12);
        assert!((g.integrate(|x| x[0] * x[0]) - 16.0 / 3.0).abs() < 1e-12);
        assert!(g.weights.iter().all(|&w| w > 0.0));
        for i in 0..g.len() {
            for j in 0..i {
                assert!(g.distance(i, j) > 0.0);
            }
        }
    }

    #[test]
    fn grid_guards() {
        assert!(build_grid([(-1.0, 1.0); 4], 3).is_err());
        assert!(build_grid([(-1.0, 1.0); 4], 17).is_err());
        assert!(matches!(
            build_grid([(-1.0, 1.0); 4], 12),
            Err(Error::GridTooLarge { .. })
        ));
        assert!(build_grid([(1.0, -1.0), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)], 5).is_err());
    }

    #[test]
    fn reflections_are_involutions() {
        let g = build_grid([(-1.0, 1.0), (-2.0, 2.0), (-1.0, 1.0), (-1.0, 1.0)], 5).unwrap();
        for axis in 0..4 {
            let r = g.reflection(axis).unwrap();
            for (i, &j) in r.iter().enumerate() {
                assert_eq!(r[j], i);
                assert!((g.nodes[i][axis] + g.nodes[j][axis]).abs() < 1e-14);
            }
        }
    }
}
