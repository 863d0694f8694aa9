use super::{Classification, SpectralData};
use crate::linalg::{self, CMat};
use crate::operator::assemble_m0;
use crate::specfun::Sign;
use crate::{Error, Result, C64};
use ndarray::{Array1, Array2, OwnedRepr};
use ndarray_linalg::{FactorizeInto, LUFactorized, Lapack, Scalar, Solve};

#[derive(Debug, Clone)]
pub struct DirectInverse {
    pub inverse: CMat,
    /// One-norm condition number of `M`.
    pub condition: f64,
}

/// `M = T + M₀(λ)` for the snapped `T`.
pub fn assemble_m_snapped(spectral: &SpectralData, sign: Sign, lambda: f64) -> Result<(CMat, CMat)> {
    let m0 = assemble_m0(sign, lambda, &spectral.potential)?;
    let mut m = m0.clone();
    m.zip_mut_with(&spectral.t, |a, &b| *a += b);
    Ok((m, m0))
}

/// Dense inverse of `M±(λ)` by LU factorization.
pub fn invert_m_direct(sign: Sign, lambda: f64, spectral: &SpectralData) -> Result<DirectInverse> {
    let (m, _) = assemble_m_snapped(spectral, sign, lambda)?;
    let inverse = linalg::inverse(&m, "M(λ)")?;
    let condition = linalg::norm1(&m) * linalg::norm1(&inverse);
    if !condition.is_finite() || condition > 1e15 {
        return Err(Error::Singular(format!("M(λ) at λ = {lambda}, cond {condition:.3e}")));
    }
    Ok(DirectInverse { inverse, condition })
}

/// `A⁻¹ = (A+S)⁻¹ + (A+S)⁻¹ S B⁻¹ S (A+S)⁻¹`, `B = S − S(A+S)⁻¹S`, for `S = ΦΦᵀ`.
///
/// `B` is inverted on `ran S` in the coordinates of `Φ`.
pub fn jn_lemma_inverse<A: Scalar + Lapack>(a: &Array2<A>, phi: &Array2<A>) -> Result<Array2<A>> {
    let s = phi.dot(&phi.t());
    let x = linalg::inverse(&(a + &s), "A + S")?;
    let r = phi.ncols();
    let b = Array2::<A>::eye(r) - phi.t().dot(&x).dot(phi);
    let b_inv = linalg::inverse(&b, "B")?;
    let xp = x.dot(phi);
    let px = phi.t().dot(&x);
    Ok(&x + &xp.dot(&b_inv).dot(&px))
}

/// Block inverse `[[b11, b12], [b21, b22]]`.
#[derive(Debug, Clone)]
pub struct BlockInverse<A> {
    pub b11: Array2<A>,
    pub b12: Array2<A>,
    pub b21: Array2<A>,
    pub b22: Array2<A>,
}

impl<A: Scalar> BlockInverse<A> {
    pub fn assemble(&self) -> Array2<A> {
        let (n1, n2) = (self.b11.nrows(), self.b22.nrows());
        let mut m = Array2::<A>::zeros((n1 + n2, n1 + n2));
        m.slice_mut(ndarray::s![..n1, ..n1]).assign(&self.b11);
        m.slice_mut(ndarray::s![..n1, n1..]).assign(&self.b12);
        m.slice_mut(ndarray::s![n1.., ..n1]).assign(&self.b21);
        m.slice_mut(ndarray::s![n1.., n1..]).assign(&self.b22);
        m
    }
}

/// Feshbach formula with `a = (a₁₁ − a₁₂a₂₂⁻¹a₂₁)⁻¹`:
/// `[[a, −a a₁₂a₂₂⁻¹], [−a₂₂⁻¹a₂₁ a, a₂₂⁻¹a₂₁ a a₁₂a₂₂⁻¹ + a₂₂⁻¹]]`.
pub fn feshbach_invert<A: Scalar + Lapack>(
    a11: &Array2<A>,
    a12: &Array2<A>,
    a21: &Array2<A>,
    a22: &Array2<A>,
) -> Result<BlockInverse<A>> {
    let a22_inv = linalg::inverse(a22, "a22")?;
    let left = a22_inv.dot(a21);
    let right = a12.dot(&a22_inv);
    let schur = a11 - &a12.dot(&left);
    let a = linalg::inverse(&schur, "Schur complement")?;
    let b12 = -a.dot(&right);
    let b21 = -left.dot(&a);
    let b22 = left.dot(&a).dot(&right) + &a22_inv;
    Ok(BlockInverse {
        b11: a,
        b12,
        b21,
        b22,
    })
}

/// Factored form of `M(λ)⁻¹ = X + XΦ B⁻¹ ΦᵀX` with `X = (M + S₁)⁻¹`.
///
/// In the regular case `Φ` is empty and `X = M⁻¹`.
pub struct JnFactor {
    lu: LUFactorized<OwnedRepr<C64>>,
    phi: CMat,
    b_inv: CMat,
    n: usize,
}

/// Factor `M = T + M₀` with the reduced `B = ΦᵀX M₀ Φ`, which avoids the
/// cancellation in `I − ΦᵀXΦ` since `TΦ = 0` exactly.
pub fn jn_factor(spectral: &SpectralData, m0: &CMat) -> Result<JnFactor> {
    let n = spectral.len();
    let mut ms = m0.clone();
    ms.zip_mut_with(&spectral.t, |a, &b| *a += b);
    ms.zip_mut_with(&spectral.s1, |a, &b| *a += b);
    let lu = ms
        .factorize_into()
        .map_err(|_| Error::Singular("M + S1".into()))?;
    let phi = linalg::to_complex(&spectral.null_vectors);
    let r = phi.ncols();
    let b_inv = if r > 0 {
        let m0phi = m0.dot(&phi);
        let mut xm0phi = Array2::<C64>::zeros((n, r));
        for k in 0..r {
            let col = lu.solve(&m0phi.column(k).to_owned())?;
            xm0phi.column_mut(k).assign(&col);
        }
        let b = phi.t().dot(&xm0phi);
        linalg::inverse(&b, "B(λ)")?
    } else {
        Array2::zeros((0, 0))
    };
    Ok(JnFactor { lu, phi, b_inv, n })
}

impl JnFactor {
    /// `M⁻¹x`.
    pub fn apply(&self, x: &Array1<C64>) -> Result<Array1<C64>> {
        let y = self.lu.solve(x)?;
        if self.phi.ncols() == 0 {
            return Ok(y);
        }
        // M⁻¹ is complex symmetric, so ΦᵀX = (XΦ)ᵀ and ΦᵀXx = Φᵀy.
        let c = self.b_inv.dot(&self.phi.t().dot(&y));
        let z = self.lu.solve(&self.phi.dot(&c))?;
        Ok(y + z)
    }

    pub fn dense(&self) -> Result<CMat> {
        let mut out = Array2::<C64>::zeros((self.n, self.n));
        for k in 0..self.n {
            let mut e = Array1::<C64>::zeros(self.n);
            e[k] = C64::new(1.0, 0.0);
            out.column_mut(k).assign(&self.apply(&e)?);
        }
        Ok(out)
    }
}

/// `M±(λ)⁻¹` through the Jensen–Nenciu factorization.
pub fn jn_invert(spectral: &SpectralData, sign: Sign, lambda: f64) -> Result<CMat> {
    if spectral.classification == Classification::Regular {
        return Err(Error::WrongKind {
            expected: "non-regular",
            found: spectral.classification.name(),
        });
    }
    let m0 = assemble_m0(sign, lambda, &spectral.potential)?;
    jn_factor(spectral, &m0)?.dense()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::RMat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, m: usize, rng: &mut ChaCha8Rng) -> RMat {
        Array2::from_shape_fn((n, m), |_| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn feshbach_matches_direct_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random(6, 6, &mut rng) + 3.0 * linalg::identity(6);
        let s = ndarray::s![..2, ..2];
        let inv = feshbach_invert(
            &a.slice(s).to_owned(),
            &a.slice(ndarray::s![..2, 2..]).to_owned(),
            &a.slice(ndarray::s![2.., ..2]).to_owned(),
            &a.slice(ndarray::s![2.., 2..]).to_owned(),
        )
        .unwrap();
        let direct = linalg::inverse(&a, "a").unwrap();
        assert!(linalg::frobenius(&(inv.assemble() - direct)) < 1e-12);
    }

    #[test]
    fn feshbach_trivial_blocks() {
        let a11 = Array2::from_elem((1, 1), 1.0);
        let z12 = Array2::zeros((1, 2));
        let z21 = Array2::zeros((2, 1));
        let a22 = Array2::from_diag(&ndarray::arr1(&[2.0, 4.0]));
        let inv = feshbach_invert(&a11, &z12, &z21, &a22).unwrap();
        assert_eq!(inv.b11[[0, 0]], 1.0);
        assert!((inv.b22[[1, 1]] - 0.25).abs() < 1e-15);
        assert!(inv.b12.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn jn_lemma_on_near_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 20;
        let q = random(n, n, &mut rng);
        let (_, basis) = linalg::eigh(&(&q + &q.t())).unwrap();
        let mut d = Array1::from_shape_fn(n, |_| rng.gen_range(1.0..3.0));
        d[0] = 1e-3;
        d[1] = -2e-3;
        let a = basis.dot(&Array2::from_diag(&d)).dot(&basis.t());
        let phi = basis.slice(ndarray::s![.., ..2]).to_owned();
        let inv = jn_lemma_inverse(&a, &phi).unwrap();
        let direct = linalg::inverse(&a, "a").unwrap();
        assert!(linalg::frobenius(&(&inv - &direct)) < 1e-10 * linalg::frobenius(&direct));
    }
}
