//! The linear bijection between `R³` and traceless 2×2 Hermitian matrices,
//!
//! ```text
//! (a, b, c) ↦ [[a, b + ic], [b − ic, −a]],
//! ```
//!
//! and the lift of rotations of `R³` to 2×2 unitaries acting by conjugation.
//!
//! All axis conventions are read off this map; the basis `ι(e₁) = σz`,
//! `ι(e₂) = σx`, `ι(e₃) = −σy` is a reflected ordering of the Pauli triple,
//! so no Bloch-sphere convention is assumed anywhere.

use std::ops::Deref;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::cross;
use crate::linalg::{
    c, conjugate_by, conjugate_entrywise, first_significant_entry, frobenius, orthogonality_defect,
    trace, CMat, Hermitian, RMat, RVec,
};

/// Traceless 2×2 Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TracelessHermitian2(Hermitian);

impl TracelessHermitian2 {
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() != 2 || m.ncols() != 2 {
            return Err(Error::Dimension(format!(
                "expected a 2x2 matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let h = Hermitian::new(m)?;
        let tr = trace(h.matrix()).norm();
        if tr > 1e-12 * frobenius(h.matrix()).max(1.0) {
            return Err(Error::Structure(format!("trace {tr:e} is not zero")));
        }
        Ok(TracelessHermitian2(h))
    }

    pub fn hermitian(&self) -> &Hermitian {
        &self.0
    }

    pub fn matrix(&self) -> &CMat {
        self.0.matrix()
    }

    pub fn into_inner(self) -> CMat {
        self.0.into_inner()
    }
}

impl Deref for TracelessHermitian2 {
    type Target = CMat;

    fn deref(&self) -> &CMat {
        &self.0
    }
}

fn check_len3(v: &RVec) -> Result<()> {
    if v.len() != 3 {
        return Err(Error::Dimension(format!(
            "expected a 3-vector, got length {}",
            v.len()
        )));
    }
    Ok(())
}

fn iota_raw(a: f64, b: f64, cc: f64) -> CMat {
    CMat::from_row_slice(2, 2, &[c(a, 0.0), c(b, cc), c(b, -cc), c(-a, 0.0)])
}

pub fn iota(v: &RVec) -> Result<TracelessHermitian2> {
    check_len3(v)?;
    Ok(TracelessHermitian2(Hermitian::new(iota_raw(
        v[0], v[1], v[2],
    ))?))
}

/// Inverse of [`iota`]; the input must be traceless Hermitian.
pub fn iota_inv(m: &CMat) -> Result<RVec> {
    let t = TracelessHermitian2::new(m.clone())?;
    Ok(iota_inv_unchecked(&t))
}

fn iota_inv_unchecked(m: &CMat) -> RVec {
    let a = 0.5 * (m[(0, 0)].re - m[(1, 1)].re);
    let off = 0.5 * (m[(0, 1)] + m[(1, 0)].conj());
    RVec::from_vec(vec![a, off.re, off.im])
}

/// `ι(e₁), ι(e₂), ι(e₃)`.
pub fn basis() -> [CMat; 3] {
    [
        iota_raw(1.0, 0.0, 0.0),
        iota_raw(0.0, 1.0, 0.0),
        iota_raw(0.0, 0.0, 1.0),
    ]
}

/// `|det[ι(v), ι(w)] − 4|v × w|²|`; zero up to roundoff.
pub fn comm_cross_residual(v: &RVec, w: &RVec) -> Result<f64> {
    let k = {
        let (x, y) = (iota(v)?, iota(w)?);
        x.matrix() * y.matrix() - y.matrix() * x.matrix()
    };
    let det = k[(0, 0)] * k[(1, 1)] - k[(0, 1)] * k[(1, 0)];
    let cr = cross(v, w)?;
    Ok((det - c(4.0 * cr.norm_squared(), 0.0)).norm())
}

/// Rotation of `R³` induced by `C ↦ U C U*` in ι-coordinates,
/// `R_jk = ½ tr(ι(e_j) U ι(e_k) U*)`.
pub fn rotation_from_unitary(u: &CMat) -> RMat {
    let b = basis();
    RMat::from_fn(3, 3, |j, k| {
        0.5 * trace(&(&b[j] * conjugate_by(u, &b[k]))).re
    })
}

/// Picks the representative of `±U` whose first significant entry (row-major)
/// has positive real part, or zero real part and positive imaginary part.
pub fn canonical_sign(u: CMat) -> CMat {
    match first_significant_entry(&u, 1e-10) {
        Some(idx) => {
            let z = u[idx];
            let flip = if z.re.abs() > 1e-10 {
                z.re < 0.0
            } else {
                z.im < 0.0
            };
            if flip {
                -u
            } else {
                u
            }
        }
        None => u,
    }
}

/// Lifts a rotation of `R³` to `U ∈ SU(2)` with `ι(Rv) = U ι(v) U*`.
///
/// With `C_k = ι(R e_k)` and any 2×2 matrix `Y`, completeness of the basis
/// `ι(e_k)` gives `Y + Σ_k C_k Y ι(e_k) = 2 tr(U* Y) U`. Of the candidates
/// `Y ∈ {I, ι(e₁), ι(e₂), ι(e₃)}` at least one has `|tr(U* Y)| >= 1`; the
/// largest one is normalized to unit determinant and the sign fixed by
/// [`canonical_sign`].
pub fn su2_from_rotation(r: &RMat) -> Result<CMat> {
    if r.nrows() != 3 || r.ncols() != 3 {
        return Err(Error::Dimension(format!(
            "expected a 3x3 rotation, got {}x{}",
            r.nrows(),
            r.ncols()
        )));
    }
    let defect = orthogonality_defect(r);
    if defect > 1e-8 {
        return Err(Error::Structure(format!(
            "not orthogonal: |RᵀR − I|_F = {defect:e}"
        )));
    }
    if r.determinant() <= 0.0 {
        return Err(Error::Structure("not a rotation: det R <= 0".into()));
    }
    let b = basis();
    let images: Vec<CMat> = (0..3)
        .map(|k| iota_raw(r[(0, k)], r[(1, k)], r[(2, k)]))
        .collect();
    let candidates = [
        CMat::identity(2, 2),
        b[0].clone(),
        b[1].clone(),
        b[2].clone(),
    ];
    let w = candidates
        .iter()
        .map(|y| {
            let mut w = y.clone();
            for k in 0..3 {
                w += &images[k] * y * &b[k];
            }
            w
        })
        .max_by(|x, y| frobenius(x).total_cmp(&frobenius(y)))
        .expect("four candidates");
    let det = w[(0, 0)] * w[(1, 1)] - w[(0, 1)] * w[(1, 0)];
    let root: Complex64 = det.sqrt();
    if !(root.norm() > 1e-12) {
        return Err(Error::Numerical("degenerate lift".into()));
    }
    let u = canonical_sign(w.map(|z| z / root));
    let residual = (0..3)
        .map(|k| frobenius(&(conjugate_by(&u, &b[k]) - &images[k])))
        .fold(0.0, f64::max);
    if residual > 1e-8 {
        return Err(Error::Structure(format!(
            "adjoint action residual {residual:e} exceeds 1e-8"
        )));
    }
    Ok(u)
}

/// `S = diag(1, 1, −1)`: entrywise conjugation in ι-coordinates.
pub fn conjugation_reflection() -> RMat {
    RMat::from_diagonal(&RVec::from_vec(vec![1.0, 1.0, -1.0]))
}

/// Splits an improper orthogonal `O` as `O = R S` with `R = O S` a rotation and
/// `S` from [`conjugation_reflection`].
pub fn split_improper(o: &RMat) -> Result<(RMat, RMat)> {
    if o.nrows() != 3 || o.ncols() != 3 {
        return Err(Error::Dimension(format!(
            "expected a 3x3 matrix, got {}x{}",
            o.nrows(),
            o.ncols()
        )));
    }
    let defect = orthogonality_defect(o);
    if defect > 1e-8 {
        return Err(Error::Structure(format!(
            "not orthogonal: |OᵀO − I|_F = {defect:e}"
        )));
    }
    if o.determinant() >= 0.0 {
        return Err(Error::Structure("expected det O = −1".into()));
    }
    let s = conjugation_reflection();
    Ok((o * &s, s))
}

/// `conj(ι(v))`, which equals `ι(S v)`.
pub fn conjugate_iota(v: &RVec) -> Result<CMat> {
    Ok(conjugate_entrywise(iota(v)?.matrix()))
}
