//! Manufacturing potentials at which zero is not a regular point.
//!
//! For a fixed shape, `T(g) = U + g·K` with `K = v₁G₀v₁` positive
//! semidefinite (`v₁` the unit-coupling `v`), so every eigenvalue of `T(g)`
//! is nondecreasing in `g`. Crossings are located inside a reflection-parity
//! sector, which both separates degenerate channels and, for odd sectors,
//! forces `⟨v, f⟩ = 0` exactly.

use super::{classify, Classification, SpectralData};
use crate::linalg::{self, RMat};
use crate::operator::{assemble_vkv, sector_basis, G0Kernel, Parity, Potential, Shape};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

const ALL_EVEN: Parity = [Some(1); 4];
const ODD_FIRST: Parity = [Some(-1), Some(1), Some(1), Some(1)];
const THIRD_EVEN: Parity = [Some(1), None, Some(1), Some(1)];
const THIRD_ODD: Parity = [Some(-1), None, Some(1), Some(1)];

/// Tilt of the third-kind shape along its stretched axis.
pub const THIRD_KIND_TILT: f64 = 0.5;

#[derive(Debug, Clone, Serialize)]
pub struct TuneResult {
    pub g_star: f64,
    /// Tracked eigenvalue of `T(g*)`.
    pub eigenvalue: f64,
    pub t_norm: f64,
    pub iterations: usize,
}

/// `U` and `K` restricted to a sector, with `T(g) = U + gK`.
struct SectorPencil {
    u: RMat,
    k: RMat,
}

impl SectorPencil {
    fn new(shape: &Shape, nodes_per_dim: usize, parity: &Parity) -> Result<SectorPencil> {
        let p = Potential::on_box(shape.clone(), 1.0, nodes_per_dim)?;
        if p.is_zero() {
            return Err(Error::ZeroPotential);
        }
        let q = sector_basis(&p.grid, parity)?;
        let k = assemble_vkv(&G0Kernel, &p)?;
        let u = RMat::from_diag(&ndarray::Array1::from(p.u.clone()));
        Ok(SectorPencil {
            u: q.t().dot(&u).dot(&q),
            k: q.t().dot(&k).dot(&q),
        })
    }

    fn eigenvalues(&self, g: f64) -> Result<Vec<f64>> {
        let t = &self.u + &(&self.k * g);
        Ok(linalg::eigh(&t)?.0.to_vec())
    }
}

/// Smallest `g` in the bracket where an eigenvalue of `T(g)` in the sector crosses zero.
pub fn tune_coupling(
    shape: &Shape,
    bracket: (f64, f64),
    nodes_per_dim: usize,
    parity: &Parity,
) -> Result<TuneResult> {
    let pencil = SectorPencil::new(shape, nodes_per_dim, parity)?;
    let (lo, hi) = bracket;
    let w_lo = pencil.eigenvalues(lo)?;
    let m = w_lo.len();
    let positive = w_lo.iter().filter(|&&x| x > 0.0).count();
    if positive == m {
        return Err(Error::NoSignChange { lo, hi });
    }
    let index = m - positive - 1;
    let f = |g: f64| -> Result<(f64, f64)> {
        let w = pencil.eigenvalues(g)?;
        let norm = w.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        Ok((w[index], norm))
    };
    let (f_lo, _) = f(lo)?;
    let (f_hi, _) = f(hi)?;
    if !(f_lo <= 0.0 && f_hi > 0.0) {
        return Err(Error::NoSignChange { lo, hi });
    }
    find_root(f, lo, hi, f_lo, f_hi)
}

/// Bisection to a small bracket, then secant steps kept inside it.
fn find_root<F>(f: F, mut lo: f64, mut hi: f64, mut f_lo: f64, mut f_hi: f64) -> Result<TuneResult>
where
    F: Fn(f64) -> Result<(f64, f64)>,
{
    let mut iterations = 0;
    while hi - lo > 1e-4 * hi {
        let mid = 0.5 * (lo + hi);
        let (fm, _) = f(mid)?;
        iterations += 1;
        if fm > 0.0 {
            hi = mid;
            f_hi = fm;
        } else {
            lo = mid;
            f_lo = fm;
        }
    }
    for _ in 0..60 {
        let mut g = lo - f_lo * (hi - lo) / (f_hi - f_lo);
        if !(g > lo && g < hi) {
            g = 0.5 * (lo + hi);
        }
        let (fg, norm) = f(g)?;
        iterations += 1;
        if fg.abs() < 1e-13 * norm || hi - lo < 4.0 * f64::EPSILON * hi {
            return Ok(TuneResult {
                g_star: g,
                eigenvalue: fg,
                t_norm: norm,
                iterations,
            });
        }
        if fg > 0.0 {
            hi = g;
            f_hi = fg;
        } else {
            lo = g;
            f_lo = fg;
        }
    }
    Err(Error::NoConvergence(format!("root bracket [{lo}, {hi}]")))
}

/// Tilted, stretched bump used to manufacture the third kind.
pub fn third_kind_shape(stretch: f64) -> Shape {
    Shape::Bump {
        semi_axes: [1.0, stretch, 1.0, 1.0],
        tilt: [0.0, THIRD_KIND_TILT, 0.0, 0.0],
    }
}

/// Couplings of the second crossing in the even sector and the first in the odd one.
fn third_kind_crossings(stretch: f64, nodes_per_dim: usize) -> Result<(f64, f64)> {
    let shape = third_kind_shape(stretch);
    let even = SectorPencil::new(&shape, nodes_per_dim, &THIRD_EVEN)?;
    let odd = SectorPencil::new(&shape, nodes_per_dim, &THIRD_ODD)?;
    // U ≡ −1, so the crossings are g = 1/μ for the eigenvalues μ of K.
    let top = |p: &SectorPencil, k: usize| -> Result<f64> {
        let w = linalg::eigh(&p.k)?.0;
        Ok(1.0 / w[w.len() - 1 - k])
    };
    Ok((top(&even, 1)?, top(&odd, 0)?))
}

/// Tune the stretch so that an even-sector crossing meets the odd-sector one.
///
/// Returns the stretch and the common coupling.
pub fn tune_third_kind(bracket: (f64, f64), nodes_per_dim: usize) -> Result<(f64, TuneResult)> {
    let f = |a: f64| -> Result<(f64, f64)> {
        let (ge, go) = third_kind_crossings(a, nodes_per_dim)?;
        Ok(((ge - go) / go, 1.0))
    };
    let (lo, hi) = bracket;
    let (f_lo, _) = f(lo)?;
    let (f_hi, _) = f(hi)?;
    if f_lo * f_hi > 0.0 {
        return Err(Error::NoSignChange { lo, hi });
    }
    // Orient so that the function increases across the bracket.
    let s = if f_lo <= 0.0 { 1.0 } else { -1.0 };
    let oriented = |a: f64| f(a).map(|(v, n)| (s * v, n));
    let root = find_root(oriented, lo, hi, s * f_lo, s * f_hi)?;
    let (_, g_odd) = third_kind_crossings(root.g_star, nodes_per_dim)?;
    Ok((
        root.g_star,
        TuneResult {
            g_star: g_odd,
            eigenvalue: root.eigenvalue,
            t_norm: 1.0,
            iterations: root.iterations,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    FirstKind,
    SecondKind,
    ThirdKind,
}

impl Target {
    pub fn classification(self) -> Classification {
        match self {
            Target::FirstKind => Classification::FirstKind,
            Target::SecondKind => Classification::SecondKind,
            Target::ThirdKind => Classification::ThirdKind,
        }
    }
}

/// A tuned potential together with its classification.
#[derive(Debug, Clone)]
pub struct Manufactured {
    pub target: Target,
    pub shape: Shape,
    pub tune: TuneResult,
    pub spectral: SpectralData,
}

/// Build a potential of the requested kind on a grid with `nodes_per_dim` nodes per axis.
pub fn manufacture(target: Target, nodes_per_dim: usize, tol: f64) -> Result<Manufactured> {
    let (shape, tune) = match target {
        Target::FirstKind => {
            let shape = Shape::reference_bump();
            let tune = tune_coupling(&shape, (1.0, 100.0), nodes_per_dim, &ALL_EVEN)?;
            (shape, tune)
        }
        Target::SecondKind => {
            let shape = Shape::reference_bump();
            let tune = tune_coupling(&shape, (20.0, 200.0), nodes_per_dim, &ODD_FIRST)?;
            (shape, tune)
        }
        Target::ThirdKind => {
            let (stretch, tune) = tune_third_kind((0.9, 1.2), nodes_per_dim)?;
            (third_kind_shape(stretch), tune)
        }
    };
    let potential = Potential::on_box(shape.clone(), tune.g_star, nodes_per_dim)?;
    let spectral = classify(&potential, tol)?;
    Ok(Manufactured {
        target,
        shape,
        tune,
        spectral,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::DEFAULT_NULL_TOL;

    #[test]
    fn first_kind_coupling_brackets_classification() {
        let m = manufacture(Target::FirstKind, 5, DEFAULT_NULL_TOL).unwrap();
        assert_eq!(m.spectral.classification, Classification::FirstKind);
        assert_eq!(m.spectral.rank_s1, 1);
        let below = Potential::on_box(m.shape.clone(), 0.99 * m.tune.g_star, 5).unwrap();
        let s = classify(&below, DEFAULT_NULL_TOL).unwrap();
        assert_eq!(s.classification, Classification::Regular);
    }

    #[test]
    fn tracked_eigenvalue_is_monotone() {
        let shape = Shape::reference_bump();
        let r = tune_coupling(&shape, (1.0, 100.0), 5, &ALL_EVEN).unwrap();
        let pencil = SectorPencil::new(&shape, 5, &ALL_EVEN).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for k in -5..=5 {
            let g = r.g_star * (1.0 + 0.01 * k as f64);
            let top = pencil.eigenvalues(g).unwrap().last().copied().unwrap();
            assert!(top > prev);
            prev = top;
        }
    }

    #[test]
    fn no_sign_change_is_reported() {
        let shape = Shape::reference_bump();
        assert!(matches!(
            tune_coupling(&shape, (0.01, 0.02), 5, &ALL_EVEN),
            Err(Error::NoSignChange { .. })
        ));
    }
}
