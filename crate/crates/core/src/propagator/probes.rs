use serde::{Deserialize, Serialize};

/// A pair of points at which a kernel is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbePair {
    pub x: [f64; 4],
    pub y: [f64; 4],
}

impl ProbePair {
    pub fn distance(&self) -> f64 {
        crate::operator::dist(&self.x, &self.y)
    }
}

/// Twelve pairs: inside the unit support, near-diagonal, inside-to-outside and far field.
///
/// Coordinates are chosen off every Gauss–Legendre grid.
pub fn default_probes() -> Vec<ProbePair> {
    let raw: [([f64; 4], [f64; 4]); 12] = [
        ([0.11, 0.07, -0.05, 0.03], [-0.09, 0.13, 0.06, -0.04]),
        ([0.31, -0.22, 0.17, 0.09], [0.27, -0.18, 0.21, 0.05]),
        ([0.45, 0.1, -0.2, 0.15], [-0.4, -0.25, 0.1, -0.2]),
        ([0.2, 0.1, 0.05, -0.1], [1.6, 0.3, -0.2, 0.4]),
        ([1.5, 0.2, 0.1, 0.3], [1.7, -0.1, 0.2, 0.25]),
        ([1.8, 0.1, -0.3, 0.2], [-1.9, 0.2, 0.1, -0.25]),
        ([3.1, 0.5, -0.4, 0.2], [0.05, -0.1, 0.15, 0.02]),
        ([4.2, -1.0, 0.5, 0.3], [-3.5, 0.8, -0.6, 1.1]),
        ([0.7, 0.6, -0.3, 0.1], [-0.2, -0.7, 0.5, -0.4]),
        ([0.05, 0.02, 0.01, 0.03], [0.6, -0.5, 0.4, 0.3]),
        ([2.5, 2.0, -1.0, 0.5], [2.6, 1.9, -0.9, 0.6]),
        ([0.9, -0.8, 0.7, -0.6], [-1.2, 1.1, -0.9, 1.0]),
    ];
    raw.iter().map(|&(x, y)| ProbePair { x, y }).collect()
}
