//! Small dense real and complex matrix kernels.
//!
//! Matrices are `nalgebra` dynamic matrices of `f64` or `Complex64`. Every
//! routine here is a pure function of its inputs.

use std::ops::Deref;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

pub const MAX_DIM: usize = 8;

/// Relative tolerance (with an equal absolute floor) for the Hermitian check.
pub const HERMITIAN_TOL: f64 = 1e-12;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Builds a complex matrix from row-major `(re, im)` pairs.
pub fn cmat(d: usize, entries: &[(f64, f64)]) -> CMat {
    assert_eq!(entries.len(), d * d);
    CMat::from_row_iterator(d, d, entries.iter().map(|&(re, im)| c(re, im)))
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| c(x, 0.0))
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn ensure_finite(m: &CMat) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numerical("matrix has non-finite entries".into()))
    }
}

fn ensure_square(m: &CMat) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

/// Self-adjoint complex matrix, validated on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Hermitian(CMat);

impl Hermitian {
    /// Rejects inputs that are not Hermitian within [`HERMITIAN_TOL`]; no
    /// symmetrization is performed.
    pub fn new(m: CMat) -> Result<Self> {
        ensure_square(&m)?;
        ensure_finite(&m)?;
        let skew = frobenius(&(&m - m.adjoint()));
        let bound = HERMITIAN_TOL * frobenius(&m).max(1.0);
        if skew > bound {
            return Err(Error::Structure(format!(
                "matrix is not Hermitian: |A - A*|_F = {skew:e} > {bound:e}"
            )));
        }
        Ok(Hermitian(m))
    }

    pub fn from_real(m: &RMat) -> Result<Self> {
        Self::new(to_complex(m))
    }

    pub fn identity(d: usize) -> Self {
        Hermitian(CMat::identity(d, d))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_inner(self) -> CMat {
        self.0
    }

    /// Real trace.
    pub fn tr(&self) -> f64 {
        trace(&self.0).re
    }
}

impl Deref for Hermitian {
    type Target = CMat;

    fn deref(&self) -> &CMat {
        &self.0
    }
}

/// `x ⊗ x` for a unit vector `x`.
#[derive(Debug, Clone)]
pub struct RankOneProjection {
    vector: CVec,
    matrix: Hermitian,
}

impl RankOneProjection {
    /// Normalizes `x`; rejects vectors that are numerically zero.
    pub fn from_vector(x: &CVec) -> Result<Self> {
        let norm = x.norm();
        if !(norm > 1e-12) || !norm.is_finite() {
            return Err(Error::Structure("cannot project onto a zero vector".into()));
        }
        let vector = x.unscale(norm);
        let matrix = Hermitian(outer(&vector));
        Ok(RankOneProjection { vector, matrix })
    }

    pub fn vector(&self) -> &CVec {
        &self.vector
    }

    pub fn matrix(&self) -> &Hermitian {
        &self.matrix
    }

    pub fn complement(&self) -> Hermitian {
        let d = self.vector.len();
        Hermitian(CMat::identity(d, d) - self.matrix.matrix())
    }
}

/// `x x*`.
pub fn outer(x: &CVec) -> CMat {
    x * x.adjoint()
}

/// Residual of `p` against the rank-one projection axioms: the largest of
/// `|P² − P|_F`, `|P − P*|_F` and `|tr P − 1|`.
pub fn projection_defect(p: &CMat) -> f64 {
    let idem = frobenius(&(p * p - p));
    let herm = frobenius(&(p - p.adjoint()));
    let tr = (trace(p) - ONE).norm();
    idem.max(herm).max(tr)
}

/// `AB − BA`.
pub fn commutator(a: &CMat, b: &CMat) -> Result<CMat> {
    let d = ensure_square(a)?;
    if b.nrows() != d || b.ncols() != d {
        return Err(Error::Dimension(format!(
            "commutator of {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(a * b - b * a)
}

/// Entrywise complex conjugate.
pub fn conjugate_entrywise(a: &CMat) -> CMat {
    a.map(|z| z.conj())
}

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// Ascending.
    pub eigenvalues: RVec,
    /// Orthonormal columns, ordered like `eigenvalues`.
    pub eigenvectors: CMat,
}

impl SpectralDecomposition {
    pub fn reconstruct(&self) -> CMat {
        let lambda = CMat::from_diagonal(&self.eigenvalues.map(|x| c(x, 0.0)));
        &self.eigenvectors * lambda * self.eigenvectors.adjoint()
    }
}

pub fn eig_hermitian(a: &Hermitian) -> SpectralDecomposition {
    let eig = nalgebra::SymmetricEigen::new(a.matrix().clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let d = order.len();
    let eigenvalues = RVec::from_iterator(d, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut eigenvectors = CMat::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    }
}

/// Validates Hermitian structure and decomposes.
pub fn eig_hermitian_checked(a: &CMat) -> Result<SpectralDecomposition> {
    Ok(eig_hermitian(&Hermitian::new(a.clone())?))
}

#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMat,
    /// Descending, nonnegative.
    pub singular_values: RVec,
    pub v: CMat,
}

impl Svd {
    /// `U Σ V*`.
    pub fn reconstruct(&self) -> CMat {
        let sigma = CMat::from_diagonal(&self.singular_values.map(|x| c(x, 0.0)));
        &self.u * sigma * self.v.adjoint()
    }
}

pub fn svd(m: &CMat) -> Svd {
    let n = m.ncols().min(m.nrows());
    let dec = nalgebra::SVD::new(m.clone(), true, true);
    let (u, v_t) = (dec.u.expect("requested U"), dec.v_t.expect("requested V*"));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| dec.singular_values[j].total_cmp(&dec.singular_values[i]));
    let singular_values = RVec::from_iterator(n, order.iter().map(|&i| dec.singular_values[i]));
    let mut su = CMat::zeros(u.nrows(), n);
    let mut sv = CMat::zeros(v_t.ncols(), n);
    for (dst, &src) in order.iter().enumerate() {
        su.set_column(dst, &u.column(src));
        sv.set_column(dst, &v_t.row(src).adjoint());
    }
    Svd {
        u: su,
        singular_values,
        v: sv,
    }
}

pub fn singular_values(m: &CMat) -> RVec {
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    RVec::from_vec(s)
}

/// Real SVD `M = U Σ Vᵀ`, singular values descending.
#[derive(Debug, Clone)]
pub struct RealSvd {
    pub u: RMat,
    pub singular_values: RVec,
    pub v: RMat,
}

pub fn real_svd(m: &RMat) -> RealSvd {
    let n = m.ncols().min(m.nrows());
    let dec = nalgebra::SVD::new(m.clone(), true, true);
    let (u, v_t) = (dec.u.expect("requested U"), dec.v_t.expect("requested Vᵀ"));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| dec.singular_values[j].total_cmp(&dec.singular_values[i]));
    let singular_values = RVec::from_iterator(n, order.iter().map(|&i| dec.singular_values[i]));
    let mut su = RMat::zeros(u.nrows(), n);
    let mut sv = RMat::zeros(v_t.ncols(), n);
    for (dst, &src) in order.iter().enumerate() {
        su.set_column(dst, &u.column(src));
        sv.set_column(dst, &v_t.row(src).transpose());
    }
    RealSvd {
        u: su,
        singular_values,
        v: sv,
    }
}

/// Nearest orthogonal matrix in Frobenius norm (`U Vᵀ` from the SVD).
pub fn nearest_orthogonal(m: &RMat) -> RMat {
    let s = real_svd(m);
    &s.u * s.v.transpose()
}

pub fn orthogonality_defect(m: &RMat) -> f64 {
    let d = m.ncols();
    (m.transpose() * m - RMat::identity(d, d)).norm()
}

pub fn unitarity_defect(m: &CMat) -> f64 {
    let d = m.ncols();
    frobenius(&(m.adjoint() * m - CMat::identity(d, d)))
}

/// `U A U*`.
pub fn conjugate_by(u: &CMat, a: &CMat) -> CMat {
    u * a * u.adjoint()
}

/// Index of the first entry (row-major) whose modulus exceeds `threshold`.
pub fn first_significant_entry(m: &CMat, threshold: f64) -> Option<(usize, usize)> {
    (0..m.nrows())
        .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
        .find(|&(i, j)| m[(i, j)].norm() > threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{gaussian_hermitian, haar_unitary_with, sample_rng};

    fn sigma_z() -> CMat {
        cmat(2, &[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (-1.0, 0.0)])
    }

    fn sigma_x() -> CMat {
        cmat(2, &[(0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (0.0, 0.0)])
    }

    #[test]
    fn commutator_of_pauli_pair() {
        let k = commutator(&sigma_z(), &sigma_x()).unwrap();
        let expected = cmat(2, &[(0.0, 0.0), (2.0, 0.0), (-2.0, 0.0), (0.0, 0.0)]);
        assert!(frobenius(&(k - expected)) < 1e-15);
    }

    #[test]
    fn commutator_trivial_cases() {
        let mut rng = sample_rng(1, 0, 0);
        let a = gaussian_hermitian(4, &mut rng);
        assert_eq!(frobenius(&commutator(&a, &a).unwrap()), 0.0);
        let id = CMat::identity(4, 4);
        assert!(frobenius(&commutator(&a, &id).unwrap()) < 1e-15);
    }

    #[test]
    fn commutator_rejects_mismatched_dims() {
        let err = commutator(&CMat::identity(2, 2), &CMat::identity(3, 3)).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }

    #[test]
    fn hermitian_commutator_is_skew_and_traceless() {
        for idx in 0..50 {
            let mut rng = sample_rng(2, 0, idx);
            let d = 2 + (idx as usize % 7);
            let a = gaussian_hermitian(d, &mut rng);
            let b = gaussian_hermitian(d, &mut rng);
            let k = commutator(&a, &b).unwrap();
            assert!(trace(&k).norm() <= 1e-12);
            assert!(frobenius(&(k.adjoint() + &k)) <= 1e-12);
        }
    }

    #[test]
    fn hermitian_check_rejects_rather_than_symmetrizes() {
        let m = cmat(2, &[(1.0, 0.0), (1.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        assert!(matches!(Hermitian::new(m), Err(Error::Structure(_))));
        let tiny = cmat(2, &[(1.0, 0.0), (1.0, 1e-14), (1.0, 0.0), (1.0, 0.0)]);
        assert!(Hermitian::new(tiny).is_ok());
    }

    #[test]
    fn eig_of_diagonal_is_sorted() {
        let a = Hermitian::new(cmat(2, &[(3.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)])).unwrap();
        let e = eig_hermitian(&a);
        assert_eq!(e.eigenvalues.as_slice(), &[1.0, 3.0]);
    }

    #[test]
    fn eig_of_projection() {
        let mut rng = sample_rng(3, 0, 0);
        let u = haar_unitary_with(5, &mut rng);
        let p = RankOneProjection::from_vector(&u.column(2).into_owned()).unwrap();
        let e = eig_hermitian(p.matrix());
        for (k, &lambda) in e.eigenvalues.iter().enumerate() {
            let expected = if k == 4 { 1.0 } else { 0.0 };
            assert!((lambda - expected).abs() < 1e-13, "{lambda}");
        }
    }

    #[test]
    fn eig_reconstruction_and_orthonormality() {
        for idx in 0..100 {
            let mut rng = sample_rng(4, 0, idx);
            let d = 2 + (idx as usize % 7);
            let a = Hermitian::new(gaussian_hermitian(d, &mut rng)).unwrap();
            let e = eig_hermitian(&a);
            let scale = frobenius(&a).max(1.0);
            assert!(frobenius(&(e.reconstruct() - a.matrix())) <= 1e-10 * scale);
            assert!(unitarity_defect(&e.eigenvectors) <= 1e-12);
            assert!(e.eigenvalues.as_slice().windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eig_matches_closed_form_in_two_dimensions() {
        for idx in 0..100 {
            let mut rng = sample_rng(5, 0, idx);
            let a = gaussian_hermitian(2, &mut rng);
            let (p, q, r) = (a[(0, 0)].re, a[(1, 1)].re, a[(0, 1)].norm_sqr());
            let mean = 0.5 * (p + q);
            let radius = (0.25 * (p - q) * (p - q) + r).sqrt();
            let e = eig_hermitian(&Hermitian::new(a).unwrap());
            let scale = mean.abs() + radius;
            assert!((e.eigenvalues[0] - (mean - radius)).abs() <= 1e-10 * scale);
            assert!((e.eigenvalues[1] - (mean + radius)).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = cmat(2, &[(0.0, 0.0), (1.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        assert!(matches!(
            eig_hermitian_checked(&m),
            Err(Error::Structure(_))
        ));
    }

    #[test]
    fn svd_examples() {
        let m = cmat(2, &[(3.0, 0.0), (0.0, 0.0), (0.0, 0.0), (-4.0, 0.0)]);
        assert!((svd(&m).singular_values - RVec::from_vec(vec![4.0, 3.0])).norm() < 1e-14);
        assert_eq!(
            svd(&CMat::zeros(3, 3)).singular_values.as_slice(),
            &[0.0; 3]
        );
        let k = cmat(2, &[(0.0, 0.0), (2.0, 0.0), (-2.0, 0.0), (0.0, 0.0)]);
        assert!((svd(&k).singular_values - RVec::from_vec(vec![2.0, 2.0])).norm() < 1e-14);
    }

    #[test]
    fn svd_reconstruction_and_unitarity() {
        for idx in 0..100 {
            let mut rng = sample_rng(6, 0, idx);
            let d = 2 + (idx as usize % 7);
            let m = crate::random::gaussian_complex(d, &mut rng);
            let s = svd(&m);
            assert!(frobenius(&(s.reconstruct() - &m)) <= 1e-10 * frobenius(&m).max(1.0));
            assert!(unitarity_defect(&s.u) <= 1e-12);
            assert!(unitarity_defect(&s.v) <= 1e-12);
            assert!(s
                .singular_values
                .as_slice()
                .windows(2)
                .all(|w| w[0] >= w[1]));
        }
        let s = svd(&CMat::zeros(4, 4));
        assert!(unitarity_defect(&s.u) <= 1e-12 && unitarity_defect(&s.v) <= 1e-12);
    }

    #[test]
    fn singular_values_are_unitarily_invariant() {
        for idx in 0..50 {
            let mut rng = sample_rng(7, 0, idx);
            let d = 2 + (idx as usize % 7);
            let m = crate::random::gaussian_complex(d, &mut rng);
            let u = haar_unitary_with(d, &mut rng);
            let v = haar_unitary_with(d, &mut rng);
            let s0 = singular_values(&m);
            let s1 = singular_values(&(&u * &m * &v));
            assert!((s0 - &s1).norm() <= 1e-10 * s1[0]);
        }
    }

    #[test]
    fn conjugation_examples() {
        let real = to_complex(&RMat::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]));
        assert_eq!(conjugate_entrywise(&real), real);
        let m = cmat(2, &[(0.0, 0.0), (0.0, 1.0), (0.0, -1.0), (0.0, 0.0)]);
        let expected = cmat(2, &[(0.0, 0.0), (0.0, -1.0), (0.0, 1.0), (0.0, 0.0)]);
        assert_eq!(conjugate_entrywise(&m), expected);
    }

    #[test]
    fn conjugation_preserves_spectrum() {
        for idx in 0..50 {
            let mut rng = sample_rng(8, 0, idx);
            let d = 2 + (idx as usize % 7);
            let a = Hermitian::new(gaussian_hermitian(d, &mut rng)).unwrap();
            let abar = Hermitian::new(conjugate_entrywise(&a)).unwrap();
            assert!(frobenius(&(abar.matrix() - a.transpose())) == 0.0);
            let diff = eig_hermitian(&a).eigenvalues - eig_hermitian(&abar).eigenvalues;
            assert!(diff.amax() <= 1e-12 * frobenius(&a).max(1.0));
        }
    }

    #[test]
    fn rank_one_projection_axioms() {
        let mut rng = sample_rng(9, 0, 0);
        let x = crate::random::gaussian_cvec(6, &mut rng);
        let p = RankOneProjection::from_vector(&x).unwrap();
        assert!(projection_defect(p.matrix()) <= 1e-12);
        assert!(RankOneProjection::from_vector(&CVec::zeros(3)).is_err());
    }

    #[test]
    fn nearest_orthogonal_is_orthogonal() {
        let m = RMat::from_row_slice(3, 3, &[1.0, 0.1, 0.0, 0.0, 1.0, 0.2, 0.1, 0.0, 0.9]);
        assert!(orthogonality_defect(&nearest_orthogonal(&m)) < 1e-14);
    }
}
