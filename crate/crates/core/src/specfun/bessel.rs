//! Bessel functions `J₀, J₁, Y₀, Y₁` of real argument.
//!
//! Three regimes: the power series for `z ≤ 5`, Miller's backward recurrence
//! with Neumann sums for `5 < z < 25`, and the Hankel asymptotic expansion
//! beyond. Each regime stays well conditioned in its band.

use crate::{Error, Result, C64};
use std::f64::consts::{FRAC_2_PI, FRAC_PI_4, PI};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

pub(crate) const SERIES_LIMIT: f64 = 5.0;
pub(crate) const ASYMPTOTIC_LIMIT: f64 = 25.0;

/// Values of the four functions at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselPair {
    pub j0: f64,
    pub j1: f64,
    pub y0: f64,
    pub y1: f64,
}

/// `(J₀, J₁)` by the ascending series.
pub fn series_j(z: f64) -> (f64, f64) {
    let q = -0.25 * z * z;
    let (mut t0, mut t1) = (1.0, 1.0);
    let (mut s0, mut s1) = (1.0, 1.0);
    for k in 1..80 {
        let kf = k as f64;
        t0 *= q / (kf * kf);
        t1 *= q / (kf * (kf + 1.0));
        s0 += t0;
        s1 += t1;
        if t0.abs() < 1e-18 * s0.abs().max(1e-300) && t1.abs() < 1e-18 * s1.abs().max(1e-300) {
            break;
        }
    }
    (s0, 0.5 * z * s1)
}

/// `(Y₀, Y₁ + 2/(πz))` by the ascending series; the second entry is regular at 0.
pub fn series_y(z: f64) -> (f64, f64) {
    let (j0, j1) = series_j(z);
    let log_half = (0.5 * z).ln();
    let q = -0.25 * z * z;
    // Y0 tail: sum_{k>=1} (-1)^{k+1} H_k (z²/4)^k/(k!)²
    let mut t0 = 1.0;
    let mut h = 0.0;
    let mut s0 = 0.0;
    // Y1 tail: sum_k (psi(k+1)+psi(k+2)) (-z²/4)^k/(k!(k+1)!)
    let mut t1 = 1.0;
    let mut s1 = 1.0 - 2.0 * EULER_GAMMA;
    for k in 1..80 {
        let kf = k as f64;
        h += 1.0 / kf;
        t0 *= q / (kf * kf);
        let d0 = -t0 * h;
        s0 += d0;
        t1 *= q / (kf * (kf + 1.0));
        let psi_sum = 2.0 * h + 1.0 / (kf + 1.0) - 2.0 * EULER_GAMMA;
        let d1 = t1 * psi_sum;
        s1 += d1;
        if d0.abs() < 1e-18 * s0.abs().max(1e-300) && d1.abs() < 1e-18 * s1.abs().max(1e-300) {
            break;
        }
    }
    let y0 = FRAC_2_PI * ((log_half + EULER_GAMMA) * j0 + s0);
    let y1reg = FRAC_2_PI * log_half * j1 - 0.5 * z * s1 / PI;
    (y0, y1reg)
}

/// Miller backward recurrence with the Neumann sums for the `Y` functions.
fn miller(z: f64) -> BesselPair {
    let mut n = (z + 30.0 + 12.0 * z.cbrt()) as usize;
    n += n % 2;
    let mut j = vec![0.0; n + 2];
    j[n] = 1e-30;
    for k in (1..=n).rev() {
        j[k - 1] = 2.0 * k as f64 / z * j[k] - j[k + 1];
        if j[k - 1].abs() > 1e250 {
            for v in j.iter_mut().skip(k - 1) {
                *v *= 1e-250;
            }
        }
    }
    let norm = j[0] + 2.0 * (1..=n / 2).map(|k| j[2 * k]).sum::<f64>();
    for v in j.iter_mut() {
        *v /= norm;
    }
    let c = (0.5 * z).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    for k in 1..=n / 2 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let kf = k as f64;
        s0 += sign * j[2 * k] / kf;
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / kf;
    }
    BesselPair {
        j0: j[0],
        j1: j[1],
        y0: FRAC_2_PI * (c * j[0] - 2.0 * s0),
        y1: FRAC_2_PI * (-j[0] / z + c * j[1] + s1),
    }
}

/// Hankel's expansion `J = √(2/πz)(P cos χ − Q sin χ)`, `Y = √(2/πz)(P sin χ + Q cos χ)`.
fn hankel_asymptotic(z: f64) -> BesselPair {
    let pq = |mu: f64| {
        let (mut p, mut q) = (1.0, 0.0);
        let mut term = 1.0;
        let mut last = f64::INFINITY;
        for k in 1..60 {
            let odd = (2 * k - 1) as f64;
            term *= (mu - odd * odd) / (k as f64 * 8.0 * z);
            if term.abs() > last {
                break;
            }
            last = term.abs();
            match k % 4 {
                1 => q += term,
                2 => p -= term,
                3 => q -= term,
                _ => p += term,
            }
            if term.abs() < 1e-17 {
                break;
            }
        }
        (p, q)
    };
    let amp = (FRAC_2_PI / z).sqrt();
    let (p0, q0) = pq(0.0);
    let (p1, q1) = pq(4.0);
    let (s0, c0) = (z - FRAC_PI_4).sin_cos();
    let (s1, c1) = (z - 3.0 * FRAC_PI_4).sin_cos();
    BesselPair {
        j0: amp * (p0 * c0 - q0 * s0),
        j1: amp * (p1 * c1 - q1 * s1),
        y0: amp * (p0 * s0 + q0 * c0),
        y1: amp * (p1 * s1 + q1 * c1),
    }
}

/// All four functions at `z > 0`.
pub fn bessel_all(z: f64) -> Result<BesselPair> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::Domain {
            op: "bessel_all",
            detail: format!("z = {z}"),
        });
    }
    Ok(if z <= SERIES_LIMIT {
        let (j0, j1) = series_j(z);
        let (y0, y1reg) = series_y(z);
        BesselPair {
            j0,
            j1,
            y0,
            y1: y1reg - FRAC_2_PI / z,
        }
    } else if z < ASYMPTOTIC_LIMIT {
        miller(z)
    } else {
        hankel_asymptotic(z)
    })
}

pub fn bessel_j0(z: f64) -> f64 {
    let z = z.abs();
    if z == 0.0 {
        1.0
    } else if z <= SERIES_LIMIT {
        series_j(z).0
    } else if z < ASYMPTOTIC_LIMIT {
        miller(z).j0
    } else {
        hankel_asymptotic(z).j0
    }
}

pub fn bessel_j1(z: f64) -> f64 {
    if z < 0.0 {
        return -bessel_j1(-z);
    }
    if z <= SERIES_LIMIT {
        series_j(z).1
    } else if z < ASYMPTOTIC_LIMIT {
        miller(z).j1
    } else {
        hankel_asymptotic(z).j1
    }
}

pub fn bessel_y0(z: f64) -> Result<f64> {
    Ok(bessel_all(z)?.y0)
}

pub fn bessel_y1(z: f64) -> Result<f64> {
    Ok(bessel_all(z)?.y1)
}

/// `Y₁(z) + 2/(πz)`, finite at `z = 0` where it vanishes.
pub fn bessel_y1_regular(z: f64) -> f64 {
    if z == 0.0 {
        0.0
    } else if z <= SERIES_LIMIT {
        series_y(z).1
    } else {
        bessel_all(z).map(|b| b.y1).unwrap_or(f64::NAN) + FRAC_2_PI / z
    }
}

/// `H₁^±(z) = J₁(z) ± iY₁(z)`.
pub fn hankel1(sign: super::Sign, z: f64) -> Result<C64> {
    let b = bessel_all(z)?;
    Ok(C64::new(b.j1, sign.value() * b.y1))
}

/// Branch evaluators exposed for overlap cross-validation.
pub mod branches {
    use super::BesselPair;

    pub fn series(z: f64) -> BesselPair {
        let (j0, j1) = super::series_j(z);
        let (y0, y1reg) = super::series_y(z);
        BesselPair {
            j0,
            j1,
            y0,
            y1: y1reg - std::f64::consts::FRAC_2_PI / z,
        }
    }

    pub fn recurrence(z: f64) -> BesselPair {
        super::miller(z)
    }

    pub fn asymptotic(z: f64) -> BesselPair {
        super::hankel_asymptotic(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from an arbitrary-precision evaluator.
    const J1_REF: [(f64, f64); 6] = [
        (0.1, 0.049_937_526_036_242_000_3),
        (1.0, 0.440_050_585_744_933_516),
        (4.5, -0.231_060_431_923_370_634),
        (7.0, -0.004_682_823_482_345_832_7),
        (20.0, 0.066_833_124_175_850_045_6),
        (60.0, 0.046_598_383_758_166_317_9),
    ];
    const Y1_REF: [(f64, f64); 6] = [
        (0.1, -6.458_951_094_702_026_64),
        (1.0, -0.781_212_821_300_288_717),
        (4.5, 0.300_997_323_069_654_623),
        (7.0, -0.302_667_237_024_184_87),
        (20.0, -0.165_511_614_362_521_296),
        (60.0, 0.091_869_609_369_866_895_3),
    ];
    const J0_REF: [(f64, f64); 3] = [
        (1.0, 0.765_197_686_557_966_551),
        (7.0, 0.300_079_270_519_555_597),
        (60.0, -0.091_471_804_089_061_869_5),
    ];
    const Y0_REF: [(f64, f64); 3] = [
        (1.0, 0.088_256_964_215_676_958),
        (7.0, -0.025_949_743_967_209_264_9),
        (60.0, 0.047_358_952_209_449_399_2),
    ];

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn j1_matches_reference() {
        for (z, v) in J1_REF {
            assert!(rel(bessel_j1(z), v) < 1e-12, "J1({z})");
        }
        assert_eq!(bessel_j1(0.0), 0.0);
    }

    #[test]
    fn y1_matches_reference() {
        for (z, v) in Y1_REF {
            assert!(rel(bessel_y1(z).unwrap(), v) < 1e-12, "Y1({z})");
        }
        assert!(bessel_y1(0.0).is_err());
    }

    #[test]
    fn order_zero_matches_reference() {
        for (z, v) in J0_REF {
            assert!(rel(bessel_j0(z), v) < 1e-12, "J0({z})");
        }
        for (z, v) in Y0_REF {
            assert!(rel(bessel_y0(z).unwrap(), v) < 1e-12, "Y0({z})");
        }
    }

    #[test]
    fn first_zero_of_j1() {
        assert!(bessel_j1(3.831_705_970_207_512_3).abs() < 1e-14);
    }

    #[test]
    fn y1_small_argument_ratio() {
        for z in [1e-3, 1e-4] {
            let ratio = bessel_y1(z).unwrap() / (-FRAC_2_PI / z);
            assert!((ratio - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn small_argument_series_shape() {
        let z: f64 = 1e-3;
        let j = z / 2.0 - z.powi(3) / 16.0;
        assert!(rel(bessel_j1(z), j) < 1e-12);
    }

    #[test]
    fn branches_agree_on_overlap() {
        for i in 0..=50 {
            let z = 3.0 + 5.0 * i as f64 / 50.0;
            let a = branches::series(z);
            let b = branches::recurrence(z);
            for (x, y) in [(a.j0, b.j0), (a.j1, b.j1), (a.y0, b.y0), (a.y1, b.y1)] {
                assert!((x - y).abs() < 1e-10, "z={z}: {x} vs {y}");
            }
        }
        for i in 0..=20 {
            let z = 20.0 + 10.0 * i as f64 / 20.0;
            let a = branches::recurrence(z);
            let b = branches::asymptotic(z);
            for (x, y) in [(a.j0, b.j0), (a.j1, b.j1), (a.y0, b.y0), (a.y1, b.y1)] {
                assert!((x - y).abs() < 1e-12, "z={z}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn wronskian_identity() {
        // J1 Y1' - J1' Y1 = J1 Y0 - J0 Y1 = 2/(πz)
        for i in 0..=400 {
            let z = 0.1 * (500.0_f64).powf(i as f64 / 400.0);
            let b = bessel_all(z).unwrap();
            let w = b.j1 * b.y0 - b.j0 * b.y1;
            assert!((w * z * PI / 2.0 - 1.0).abs() < 1e-10, "z={z}");
        }
    }

    #[test]
    fn hankel_envelope_and_conjugation() {
        use super::super::Sign;
        let h = hankel1(Sign::Plus, 1.0).unwrap();
        assert!((h.re - 0.440_050_585_744_933_5).abs() < 1e-12);
        assert!((h.im + 0.781_212_821_300_288_7).abs() < 1e-12);
        for i in 0..=200 {
            let z = 1.0 + 99.0 * i as f64 / 200.0;
            let p = hankel1(Sign::Plus, z).unwrap();
            let m = hankel1(Sign::Minus, z).unwrap();
            assert_eq!(p, m.conj());
            assert!(p.norm() * z.sqrt() < 1.0);
        }
    }
}
