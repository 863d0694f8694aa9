//! Expansion constants determined by least-squares matching.

use super::bessel::bessel_y1_regular;
use super::kernels::free_resolvent_regular;
use super::Sign;
use crate::{Error, Result, C64};
use ndarray::{Array1, Array2};
use ndarray_linalg::LeastSquaresSvd;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionConstants {
    pub a1: f64,
    pub z1: C64,
    pub a2: f64,
    pub z2: C64,
    pub b1: f64,
    pub b2: f64,
    /// Normalization of `G₂ = c₂r²`; fixed to one, which fixes `a₂` and `z₂`.
    pub c2: f64,
    pub c3: f64,
}

/// Coefficients of the small-`λr` expansion of `R₀⁺ − G₀` read off a mesh.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeshFit {
    pub a1: f64,
    pub z1: C64,
    /// Coefficient of `λ² log r`, the kernel `G₁ = g1_log·log r`.
    pub g1_log: f64,
    pub a2: f64,
    pub z2: C64,
    pub c3: f64,
    pub rms_residual: f64,
}

fn lstsq(design: Array2<f64>, rhs: Array1<f64>) -> Result<(Array1<f64>, f64)> {
    // Column scaling keeps the normal equations well conditioned.
    let scale: Vec<f64> = design
        .columns()
        .into_iter()
        .map(|c| c.dot(&c).sqrt().max(1e-300))
        .collect();
    let mut d = design.clone();
    for (mut col, s) in d.columns_mut().into_iter().zip(&scale) {
        col /= *s;
    }
    let sol = d.least_squares(&rhs).map_err(|e| Error::Fit(e.to_string()))?;
    let x = Array1::from_iter(sol.solution.iter().zip(&scale).map(|(v, s)| v / s));
    let r = &rhs - &design.dot(&x);
    let rms = (r.dot(&r) / r.len() as f64).sqrt();
    Ok((x, rms))
}

/// Fit `R₀⁺ − G₀` over a small-`λr` mesh against the partial sums of its
/// expansion, with `c₂ = 1`.
pub fn kernel_mesh_fit() -> Result<MeshFit> {
    let lambdas: Vec<f64> = (0..25).map(|i| 1e-4 * 10f64.powf(3.0 * i as f64 / 24.0)).collect();
    let radii: Vec<f64> = (0..13).map(|i| 0.05 * 40f64.powf(i as f64 / 12.0)).collect();
    let mut rows_re = Vec::new();
    let mut rows_im = Vec::new();
    let mut rhs_re = Vec::new();
    let mut rhs_im = Vec::new();
    for &l in &lambdas {
        for &r in &radii {
            let z = l * r;
            if z > 0.05 {
                continue;
            }
            let v = free_resolvent_regular(Sign::Plus, l, r) / (l * l);
            let (ll, lr) = (l.ln(), r.ln());
            let z2 = z * z;
            let z4 = z2 * z2;
            let z6 = z4 * z2;
            rows_re.extend_from_slice(&[
                ll,
                1.0,
                lr,
                z2 * ll,
                z2,
                z2 * lr,
                z4 * ll,
                z4,
                z4 * lr,
                z6 * ll,
                z6,
                z6 * lr,
            ]);
            rows_im.extend_from_slice(&[1.0, z2, z4, z6]);
            rhs_re.push(v.re);
            rhs_im.push(v.im);
        }
    }
    let m = rhs_re.len();
    let dre = Array2::from_shape_vec((m, 12), rows_re).expect("mesh rows");
    let dim = Array2::from_shape_vec((m, 4), rows_im).expect("mesh rows");
    let (xr, rr) = lstsq(dre, Array1::from(rhs_re))?;
    let (xi, ri) = lstsq(dim, Array1::from(rhs_im))?;
    Ok(MeshFit {
        a1: xr[0],
        z1: C64::new(xr[1], xi[0]),
        g1_log: xr[2],
        a2: xr[3],
        z2: C64::new(xr[4], xi[1]),
        c3: xr[5],
        rms_residual: rr.hypot(ri),
    })
}

/// Fit `b₁, b₂` in `Y₁(z) = −2/(πz) + (z/π)log(z/2) + b₁z − (z³/8π)log(z/2) + b₂z³ + …`.
fn y1_series_fit() -> Result<(f64, f64)> {
    let zs: Vec<f64> = (0..60).map(|i| 1e-4 * 5000f64.powf(i as f64 / 59.0)).collect();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for &z in &zs {
        let lg = (0.5 * z).ln();
        let y = bessel_y1_regular(z) - z * lg / PI + z.powi(3) * lg / (8.0 * PI);
        let z2 = z * z;
        let z4 = z2 * z2;
        rows.extend_from_slice(&[1.0, z2, z4 * lg, z4, z4 * z2 * lg, z4 * z2]);
        rhs.push(y / z);
    }
    let d = Array2::from_shape_vec((zs.len(), 6), rows).expect("y1 rows");
    let (x, _) = lstsq(d, Array1::from(rhs))?;
    Ok((x[0], x[1]))
}

/// Determine every expansion constant and check the fit is consistent.
pub fn constants_fit() -> Result<ExpansionConstants> {
    let mesh = kernel_mesh_fit()?;
    let (b1, b2) = y1_series_fit()?;
    // The λ²-level log coefficients must coincide: the log(λr) dependence is joint.
    if ((mesh.a1 - mesh.g1_log) / mesh.a1).abs() > 1e-8 {
        return Err(Error::Fit(format!(
            "log λ and log r coefficients differ: {} vs {}",
            mesh.a1, mesh.g1_log
        )));
    }
    if ((mesh.a2 - mesh.c3) / mesh.a2).abs() > 1e-6 {
        return Err(Error::Fit(format!(
            "λ⁴ log λ and log r coefficients differ: {} vs {}",
            mesh.a2, mesh.c3
        )));
    }
    let c = ExpansionConstants {
        a1: mesh.a1,
        z1: mesh.z1,
        a2: mesh.a2,
        z2: mesh.z2,
        b1,
        b2,
        c2: 1.0,
        c3: mesh.c3,
    };
    if c.a1 == 0.0 || c.a2 == 0.0 || c.z1.im == 0.0 || c.z2.im == 0.0 {
        return Err(Error::Fit("degenerate expansion constants".into()));
    }
    Ok(c)
}

static CONSTANTS: OnceLock<ExpansionConstants> = OnceLock::new();

/// Process-wide constants, fitted on first use.
pub fn expansion_constants() -> &'static ExpansionConstants {
    CONSTANTS.get_or_init(|| constants_fit().expect("expansion constants fit"))
}
