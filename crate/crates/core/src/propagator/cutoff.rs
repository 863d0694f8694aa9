use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Smooth low-energy cutoff: `χ = 1` on `[0, λ₁/2]`, `0` on `[λ₁, ∞)`.
///
/// The transition is the polynomial smoothstep of order `smoothness`, so
/// `χ ∈ C^{smoothness}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub lambda1: f64,
    pub smoothness: u32,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        CutoffSpec {
            lambda1: 0.1,
            smoothness: 4,
        }
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `S_k(x)`: degree `2k+1`, `S(0) = 0`, `S(1) = 1`, first `k` derivatives zero at both ends.
fn smoothstep(k: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let mut s = 0.0;
    for n in 0..=k {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * binomial(k + n, n) * binomial(2 * k + 1, k - n) * x.powi((k + n + 1) as i32);
    }
    s
}

impl CutoffSpec {
    pub fn new(lambda1: f64, smoothness: u32) -> Result<CutoffSpec> {
        if !(lambda1 > 0.0 && lambda1.is_finite()) || smoothness > 12 {
            return Err(Error::Domain {
                op: "CutoffSpec::new",
                detail: format!("lambda1 = {lambda1}, smoothness = {smoothness}"),
            });
        }
        Ok(CutoffSpec {
            lambda1,
            smoothness,
        })
    }

    pub fn chi(&self, lambda: f64) -> f64 {
        let half = 0.5 * self.lambda1;
        if lambda <= half {
            1.0
        } else if lambda >= self.lambda1 {
            0.0
        } else {
            1.0 - smoothstep(self.smoothness, (lambda - half) / half)
        }
    }

    /// Points where `χ` is not analytic; quadrature panels must end there.
    pub fn breakpoints(&self) -> [f64; 2] {
        [0.5 * self.lambda1, self.lambda1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_shape() {
        let c = CutoffSpec::new(2.0, 4).unwrap();
        assert_eq!(c.chi(0.3), 1.0);
        assert_eq!(c.chi(1.0), 1.0);
        assert_eq!(c.chi(2.0), 0.0);
        assert!((c.chi(1.5) - 0.5).abs() < 1e-14);
        let mut prev = 1.0;
        for k in 0..=100 {
            let x = 1.0 + k as f64 / 100.0;
            let y = c.chi(x);
            assert!(y <= prev + 1e-15);
            prev = y;
        }
        // Derivatives up to order 4 vanish at the ends: χ(1 + h) − 1 = O(h⁵).
        let h = 1e-2;
        assert!((1.0 - c.chi(1.0 + h)).abs() < 1e3 * h.powi(5));
        assert!(c.chi(2.0 - h) < 1e3 * h.powi(5));
    }

    #[test]
    fn invalid_cutoff() {
        assert!(CutoffSpec::new(0.0, 4).is_err());
        assert!(CutoffSpec::new(1.0, 20).is_err());
    }
}
