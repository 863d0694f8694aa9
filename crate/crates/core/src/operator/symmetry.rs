//! Reflection-parity sectors of grid functions.

use super::grid::QuadratureGrid;
use crate::linalg::RMat;
use crate::{Error, Result};
use ndarray::Array2;

/// Parity per axis: `Some(1)` even, `Some(-1)` odd, `None` unconstrained.
pub type Parity = [Option<i8>; 4];

/// Orthonormal basis (columns) of the grid functions with the given parities.
///
/// Nodes are grouped into orbits of the constrained reflections; each orbit
/// contributes one basis vector unless an odd parity forces it to vanish.
pub fn sector_basis(grid: &QuadratureGrid, parity: &Parity) -> Result<RMat> {
    let n = grid.len();
    let mut maps = Vec::new();
    for (axis, p) in parity.iter().enumerate() {
        if p.is_some() {
            let r = grid.reflection(axis).ok_or_else(|| {
                Error::InvalidGrid(format!("grid not symmetric under reflection of axis {axis}"))
            })?;
            maps.push((axis, p.unwrap(), r));
        }
    }
    let mut seen = vec![false; n];
    let mut columns: Vec<Vec<(usize, f64)>> = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        // Orbit under the group generated by the reflections, with characters.
        let mut orbit: Vec<(usize, f64)> = vec![(start, 1.0)];
        let mut k = 0;
        while k < orbit.len() {
            let (i, s) = orbit[k];
            for (_, p, r) in &maps {
                let j = r[i];
                if !orbit.iter().any(|&(m, _)| m == j) {
                    orbit.push((j, s * *p as f64));
                }
            }
            k += 1;
        }
        for &(i, _) in &orbit {
            seen[i] = true;
        }
        // A fixed point of an odd reflection forces the component to vanish.
        let vanishes = maps
            .iter()
            .any(|(_, p, r)| *p < 0 && orbit.iter().any(|&(i, _)| r[i] == i));
        if !vanishes {
            let norm = (orbit.len() as f64).sqrt();
            columns.push(orbit.into_iter().map(|(i, s)| (i, s / norm)).collect());
        }
    }
    let mut b = Array2::zeros((n, columns.len()));
    for (c, col) in columns.iter().enumerate() {
        for &(i, s) in col {
            b[[i, c]] = s;
        }
    }
    Ok(b)
}

/// Axes along which a symmetric matrix commutes with the grid reflection.
pub fn commuting_axes(grid: &QuadratureGrid, a: &RMat, tol: f64) -> [bool; 4] {
    let mut out = [false; 4];
    let scale = a.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    for (axis, o) in out.iter_mut().enumerate() {
        if let Some(r) = grid.reflection(axis) {
            *o = a
                .indexed_iter()
                .all(|((i, j), x)| (a[[r[i], r[j]]] - x).abs() <= tol * scale);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::build_grid;

    #[test]
    fn sectors_partition_the_space() {
        let g = build_grid([(-1.0, 1.0); 4], 5).unwrap();
        let even = sector_basis(&g, &[Some(1), Some(1), None, None]).unwrap();
        let odd = sector_basis(&g, &[Some(-1), Some(1), None, None]).unwrap();
        let oe = sector_basis(&g, &[Some(1), Some(-1), None, None]).unwrap();
        let oo = sector_basis(&g, &[Some(-1), Some(-1), None, None]).unwrap();
        assert_eq!(even.ncols() + odd.ncols() + oe.ncols() + oo.ncols(), g.len());
        let gram = even.t().dot(&even);
        assert!((gram - crate::linalg::identity(even.ncols())).iter().all(|x| x.abs() < 1e-14));
        assert!(even.t().dot(&odd).iter().all(|x| x.abs() < 1e-14));
    }
}
