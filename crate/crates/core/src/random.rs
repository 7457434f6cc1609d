//! Seeded sampling: Gaussian matrices and Haar-distributed orthogonal and
//! unitary matrices.
//!
//! Every random stream is addressed by `(seed, purpose, index)`, so a batch of
//! samples is identical no matter in which order (or on which thread) the
//! individual samples are drawn.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, CVec, RMat, RVec, MAX_DIM};

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent generator for sample `index` of stream `purpose` under `seed`.
pub fn sample_rng(seed: u64, purpose: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(purpose)));
    rng.set_stream(index);
    rng
}

pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn gaussian_rvec<R: Rng + ?Sized>(d: usize, rng: &mut R) -> RVec {
    RVec::from_fn(d, |_, _| normal(rng))
}

pub fn gaussian_real<R: Rng + ?Sized>(d: usize, rng: &mut R) -> RMat {
    RMat::from_fn(d, d, |_, _| normal(rng))
}

/// Complex vector with i.i.d. standard complex Gaussian entries.
pub fn gaussian_cvec<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVec {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CVec::from_fn(d, |_, _| c(s * normal(rng), s * normal(rng)))
}

pub fn gaussian_complex<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(d, d, |_, _| c(s * normal(rng), s * normal(rng)))
}

/// `(G + G*) / 2` for a complex Gaussian `G` with unit-variance parts.
pub fn gaussian_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(d, d, |_, _| c(normal(rng), normal(rng)));
    (&g + g.adjoint()).scale(0.5)
}

fn check_dim(d: usize) -> Result<()> {
    if (2..=MAX_DIM).contains(&d) {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "dimension {d} outside 2..={MAX_DIM}"
        )))
    }
}

pub fn haar_orthogonal_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> RMat {
    let qr = gaussian_real(d, rng).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

pub fn haar_unitary_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let qr = gaussian_complex(d, rng).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let diag = r[(j, j)];
        let modulus = diag.norm();
        if modulus > 0.0 {
            let phase = diag / modulus;
            for i in 0..d {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// Haar-distributed real orthogonal matrix for `2 <= d <= 8`.
pub fn haar_orthogonal(d: usize, seed: u64) -> Result<RMat> {
    check_dim(d)?;
    Ok(haar_orthogonal_with(
        d,
        &mut sample_rng(seed, 0x4841_4152, d as u64),
    ))
}

/// Haar-distributed unitary matrix for `2 <= d <= 8`.
pub fn haar_unitary(d: usize, seed: u64) -> Result<CMat> {
    check_dim(d)?;
    Ok(haar_unitary_with(
        d,
        &mut sample_rng(seed, 0x4841_4155, d as u64),
    ))
}

/// Haar rotation (determinant +1).
pub fn haar_rotation(d: usize, seed: u64) -> Result<RMat> {
    let mut q = haar_orthogonal(d, seed)?;
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    Ok(q)
}

/// Unit vector drawn uniformly from the complex sphere.
pub fn unit_cvec<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVec {
    loop {
        let x = gaussian_cvec(d, rng);
        let n = x.norm();
        if n > 1e-6 {
            return x.unscale(n);
        }
    }
}
