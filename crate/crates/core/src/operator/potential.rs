use super::grid::{build_grid, QuadratureGrid};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Profile of a compactly supported potential with unit coupling.
///
/// Attractive families are written `V = −g·profile` so that a positive
/// coupling deepens the well.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    /// `V ≡ 0`.
    Zero,
    /// `−(1 − q)²(1 + Σ tᵢxᵢ/aᵢ)` for `q = Σ (xᵢ/aᵢ)² < 1`.
    Bump { semi_axes: [f64; 4], tilt: [f64; 4] },
    /// Sign-indefinite pair: a well at `+d·e₁` and a barrier of relative
    /// height `ratio` at `−d·e₁`, both radial bumps of radius `radius`.
    Dipole { offset: f64, radius: f64, ratio: f64 },
}

fn radial_bump(q: f64) -> f64 {
    if q < 1.0 {
        (1.0 - q) * (1.0 - q)
    } else {
        0.0
    }
}

impl Shape {
    /// Radial bump `(1 − |x|²)²` on the unit ball.
    pub fn reference_bump() -> Shape {
        Shape::Bump {
            semi_axes: [1.0; 4],
            tilt: [0.0; 4],
        }
    }

    /// Value of `V/g` at `x`.
    pub fn profile(&self, x: &[f64; 4]) -> f64 {
        match self {
            Shape::Zero => 0.0,
            Shape::Bump { semi_axes, tilt } => {
                let mut q = 0.0;
                let mut lin = 1.0;
                for d in 0..4 {
                    let s = x[d] / semi_axes[d];
                    q += s * s;
                    lin += tilt[d] * s;
                }
                -radial_bump(q) * lin
            }
            Shape::Dipole {
                offset,
                radius,
                ratio,
            } => {
                let q = |shift: f64| {
                    let mut s = (x[0] - shift) * (x[0] - shift);
                    for xi in &x[1..] {
                        s += xi * xi;
                    }
                    s / (radius * radius)
                };
                -radial_bump(q(*offset)) + ratio * radial_bump(q(-offset))
            }
        }
    }

    /// Smallest axis-aligned box containing the support.
    pub fn bounding_box(&self) -> [(f64, f64); 4] {
        match self {
            Shape::Zero => [(-1.0, 1.0); 4],
            Shape::Bump { semi_axes, .. } => {
                let mut b = [(0.0, 0.0); 4];
                for d in 0..4 {
                    b[d] = (-semi_axes[d], semi_axes[d]);
                }
                b
            }
            Shape::Dipole { offset, radius, .. } => {
                let e = offset + radius;
                [(-e, e), (-radius, *radius), (-radius, *radius), (-radius, *radius)]
            }
        }
    }

    pub fn is_radial(&self) -> bool {
        match self {
            Shape::Zero => true,
            Shape::Bump { semi_axes, tilt } => {
                semi_axes.iter().all(|&a| a == semi_axes[0]) && tilt.iter().all(|&t| t == 0.0)
            }
            Shape::Dipole { .. } => false,
        }
    }

    /// Radial profile `V(r)/g` for radial shapes.
    pub fn radial_profile(&self, r: f64) -> Option<f64> {
        self.is_radial().then(|| self.profile(&[r, 0.0, 0.0, 0.0]))
    }

    /// Axes along which the profile is reflection symmetric.
    pub fn symmetric_axes(&self) -> [bool; 4] {
        match self {
            Shape::Zero => [true; 4],
            Shape::Bump { tilt, .. } => [tilt[0] == 0.0, tilt[1] == 0.0, tilt[2] == 0.0, tilt[3] == 0.0],
            Shape::Dipole { ratio, .. } => [*ratio == -1.0, true, true, true],
        }
    }

    /// Support radius about the origin.
    pub fn support_radius(&self) -> f64 {
        self.bounding_box()
            .iter()
            .map(|(a, b)| a.abs().max(b.abs()).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// A potential sampled on the nodes of its support.
#[derive(Debug, Clone)]
pub struct Potential {
    pub shape: Shape,
    pub coupling: f64,
    /// Support grid (all nodes of the box grid where `V ≠ 0`).
    pub grid: QuadratureGrid,
    pub samples: Vec<f64>,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub l1_norm: f64,
    /// Decay exponent of `|V(x)| ≲ ⟨x⟩^{−β}`; infinite for compact support.
    pub decay_exponent_beta: f64,
}

impl Potential {
    /// Sample `g·profile` on `grid`, keeping only the nodes where it is nonzero.
    ///
    /// The empty potential keeps the whole grid with `U ≡ +1`, `v ≡ 0`.
    pub fn sample(shape: Shape, coupling: f64, grid: &QuadratureGrid) -> Result<Potential> {
        if !coupling.is_finite() {
            return Err(Error::Domain {
                op: "Potential::sample",
                detail: format!("coupling = {coupling}"),
            });
        }
        let all: Vec<f64> = grid.nodes.iter().map(|x| coupling * shape.profile(x)).collect();
        let keep: Vec<bool> = all.iter().map(|&s| s != 0.0).collect();
        let (grid, samples) = if keep.iter().any(|&k| k) {
            (
                grid.subset(&keep),
                all.iter().copied().filter(|&s| s != 0.0).collect::<Vec<_>>(),
            )
        } else {
            (grid.clone(), vec![0.0; grid.len()])
        };
        let v: Vec<f64> = samples.iter().map(|s| s.abs().sqrt()).collect();
        let u: Vec<f64> = samples.iter().map(|&s| if s >= 0.0 { 1.0 } else { -1.0 }).collect();
        let l1_norm = samples.iter().zip(&grid.weights).map(|(s, w)| w * s.abs()).sum();
        Ok(Potential {
            shape,
            coupling,
            grid,
            samples,
            v,
            u,
            l1_norm,
            decay_exponent_beta: f64::INFINITY,
        })
    }

    /// Sample on a box grid fitted to the shape's bounding box.
    pub fn on_box(shape: Shape, coupling: f64, nodes_per_dim: usize) -> Result<Potential> {
        let grid = build_grid(shape.bounding_box(), nodes_per_dim)?;
        Potential::sample(shape, coupling, &grid)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.l1_norm == 0.0
    }

    /// `√w·v`, the symmetric-basis image of `v`.
    pub fn weighted_v(&self) -> Vec<f64> {
        self.v
            .iter()
            .zip(&self.grid.weights)
            .map(|(v, w)| v * w.sqrt())
            .collect()
    }

    pub fn with_coupling(&self, coupling: f64) -> Result<Potential> {
        let full = build_grid(self.grid.extents, self.grid.nodes_per_dim)?;
        Potential::sample(self.shape.clone(), coupling, &full)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampled_invariants() {
        let p = Potential::on_box(Shape::reference_bump(), 3.0, 6).unwrap();
        assert_eq!(p.len(), 176);
        for i in 0..p.len() {
            assert!((p.u[i] * p.v[i] * p.v[i] - p.samples[i]).abs() < 1e-15);
            assert_eq!(p.u[i], -1.0);
        }
        assert!(p.l1_norm > 0.0);
        // ∫(1−|x|²)² over the unit ball in 4D is π²/12.
        let exact = 3.0 * std::f64::consts::PI.powi(2) / 12.0;
        assert!((p.l1_norm - exact).abs() < 0.05 * exact);
    }

    #[test]
    fn dipole_is_sign_indefinite() {
        let s = Shape::Dipole {
            offset: 1.2,
            radius: 1.0,
            ratio: 0.5,
        };
        let p = Potential::on_box(s, 2.0, 6).unwrap();
        assert!(p.u.iter().any(|&u| u > 0.0) && p.u.iter().any(|&u| u < 0.0));
    }

    #[test]
    fn empty_potential_keeps_grid() {
        let p = Potential::on_box(Shape::Zero, 1.0, 4).unwrap();
        assert_eq!(p.len(), 256);
        assert!(p.is_zero());
        assert!(p.u.iter().all(|&u| u == 1.0));
    }
}
