//! Parallelogram area on `R^d`, the cross product, and classification of
//! linear maps that preserve area.

use crate::error::{Error, Result};
use crate::linalg::{real_svd, RMat, RVec};

/// Singular-value tolerance used by [`is_area_preserving_linear`].
pub const VERDICT_TOL: f64 = 1e-9;

fn check_pair(a: &RVec, b: &RVec) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "vectors of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::Dimension(format!(
            "area needs dimension >= 2, got {}",
            a.len()
        )));
    }
    Ok(())
}

fn clamp_radicand(radicand: f64, scale: f64) -> Result<f64> {
    if !radicand.is_finite() {
        Err(Error::Numerical("non-finite area radicand".into()))
    } else if radicand >= 0.0 {
        Ok(radicand.sqrt())
    } else if radicand >= -1e-12 * scale {
        Ok(0.0)
    } else {
        Err(Error::Numerical(format!(
            "negative area radicand {radicand:e} (scale {scale:e})"
        )))
    }
}

/// Area of the parallelogram spanned by `a` and `b`,
/// `√(|a|²|b|² − ⟨a,b⟩²)`.
///
/// The value is evaluated through the Lagrange identity as the norm of the
/// 2×2 minors `a_i b_j − a_j b_i`, which keeps full relative accuracy for
/// nearly parallel pairs; the Gram radicand is still formed and must not be
/// negative beyond roundoff.
pub fn area(a: &RVec, b: &RVec) -> Result<f64> {
    check_pair(a, b)?;
    let (aa, bb, ab) = (a.norm_squared(), b.norm_squared(), a.dot(b));
    clamp_radicand(aa * bb - ab * ab, aa * bb)?;
    let d = a.len();
    let mut sum = 0.0;
    for i in 0..d {
        for j in i + 1..d {
            let minor = a[i] * b[j] - a[j] * b[i];
            sum += minor * minor;
        }
    }
    Ok(sum.sqrt())
}

/// Area straight from the Gram determinant, without the minor expansion.
pub fn area_gram(a: &RVec, b: &RVec) -> Result<f64> {
    check_pair(a, b)?;
    let (aa, bb, ab) = (a.norm_squared(), b.norm_squared(), a.dot(b));
    clamp_radicand(aa * bb - ab * ab, aa * bb)
}

/// The same area with the inner product written through norms only
/// (polarization), `⟨a,b⟩ = (|a|² + |b|² − |a − b|²) / 2`.
pub fn area_polarized(a: &RVec, b: &RVec) -> Result<f64> {
    check_pair(a, b)?;
    let (aa, bb) = (a.norm_squared(), b.norm_squared());
    let half = 0.5 * ((a - b).norm_squared() - aa - bb);
    clamp_radicand(aa * bb - half * half, aa * bb)
}

pub fn cross(v: &RVec, w: &RVec) -> Result<RVec> {
    if v.len() != 3 || w.len() != 3 {
        return Err(Error::Dimension(format!(
            "cross product needs two 3-vectors, got {} and {}",
            v.len(),
            w.len()
        )));
    }
    Ok(RVec::from_vec(vec![
        v[1] * w[2] - v[2] * w[1],
        v[2] * w[0] - v[0] * w[2],
        v[0] * w[1] - v[1] * w[0],
    ]))
}

#[derive(Debug, Clone)]
pub struct AreaVerdict {
    pub preserving: bool,
    /// Pair of inputs whose area changes, present iff `preserving` is false.
    pub witness: Option<(RVec, RVec)>,
}

/// Decides whether the linear map `m` preserves all parallelogram areas.
///
/// In the plane this is `|det m| = 1`; from three dimensions on every singular
/// value must equal one. A negative verdict carries the pair of right
/// singular vectors `(v_i, v_j)` maximizing `|s_i s_j − 1|`, which is exactly
/// the area distortion of that pair.
pub fn is_area_preserving_linear(m: &RMat) -> Result<AreaVerdict> {
    let d = m.nrows();
    if d != m.ncols() || d < 2 {
        return Err(Error::Dimension(format!(
            "expected a square matrix of size >= 2, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let svd = real_svd(m);
    let s = &svd.singular_values;
    let preserving = if d == 2 {
        (s[0] * s[1] - 1.0).abs() <= VERDICT_TOL
    } else {
        s.iter().all(|x| (x - 1.0).abs() <= VERDICT_TOL)
    };
    if preserving {
        return Ok(AreaVerdict {
            preserving,
            witness: None,
        });
    }
    let mut best = (0, 1, -1.0);
    for i in 0..d {
        for j in i + 1..d {
            let distortion = (s[i] * s[j] - 1.0).abs();
            if distortion > best.2 {
                best = (i, j, distortion);
            }
        }
    }
    let (i, j, _) = best;
    Ok(AreaVerdict {
        preserving,
        witness: Some((svd.v.column(i).into_owned(), svd.v.column(j).into_owned())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{gaussian_real, gaussian_rvec, haar_orthogonal, sample_rng};

    fn v(xs: &[f64]) -> RVec {
        RVec::from_row_slice(xs)
    }

    #[test]
    fn area_examples() {
        assert_eq!(area(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap(), 1.0);
        let a = v(&[0.3, -1.7, 2.2]);
        for t in [0.0, -2.5, 1e3] {
            assert!(area(&a, &(&a * t)).unwrap() <= 1e-12 * a.norm_squared() * t.abs());
        }
        // Gram determinant: |a|² = 9, |b|² = 5, ⟨a,b⟩ = 4.
        let got = area(&v(&[1.0, 2.0, 2.0]), &v(&[2.0, 0.0, 1.0])).unwrap();
        assert!((got - 29f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn area_rejects_bad_dimensions() {
        assert!(matches!(
            area(&v(&[1.0]), &v(&[2.0])),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            area(&v(&[1.0, 0.0]), &v(&[1.0, 0.0, 0.0])),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn area_is_symmetric_and_homogeneous() {
        for idx in 0..200 {
            let mut rng = sample_rng(11, 0, idx);
            let d = 2 + idx as usize % 7;
            let (a, b) = (gaussian_rvec(d, &mut rng), gaussian_rvec(d, &mut rng));
            let t = crate::random::normal(&mut rng) * 3.0;
            let base = area(&a, &b).unwrap();
            assert!((area(&b, &a).unwrap() - base).abs() <= 1e-14 * base.max(1.0));
            let scaled = area(&(&a * t), &b).unwrap();
            assert!((scaled - t.abs() * base).abs() <= 1e-10 * scaled.max(1.0));
        }
    }

    #[test]
    fn polarized_form_agrees() {
        for idx in 0..1000 {
            let mut rng = sample_rng(12, 0, idx);
            let d = 2 + idx as usize % 7;
            let (a, b) = (gaussian_rvec(d, &mut rng), gaussian_rvec(d, &mut rng));
            let x = area(&a, &b).unwrap();
            let y = area_polarized(&a, &b).unwrap();
            assert!((x - y).abs() <= 1e-10 * x.max(1e-300), "{x} vs {y}");
        }
    }

    #[test]
    fn cross_examples() {
        let (e1, e2, e3) = (
            v(&[1.0, 0.0, 0.0]),
            v(&[0.0, 1.0, 0.0]),
            v(&[0.0, 0.0, 1.0]),
        );
        assert_eq!(cross(&e1, &e2).unwrap(), e3);
        let w = v(&[0.4, 1.0, -2.0]);
        assert_eq!(cross(&w, &w).unwrap().norm(), 0.0);
        assert!(matches!(
            cross(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn cross_norm_matches_area() {
        for idx in 0..500 {
            let mut rng = sample_rng(13, 0, idx);
            let (a, b) = (gaussian_rvec(3, &mut rng), gaussian_rvec(3, &mut rng));
            let x = cross(&a, &b).unwrap().norm();
            let y = area(&a, &b).unwrap();
            assert!((x - y).abs() <= 1e-12 * x.max(1e-300) + 1e-15);
        }
    }

    #[test]
    fn planar_scaling_law() {
        for idx in 0..1000 {
            let mut rng = sample_rng(14, 0, idx);
            let m = gaussian_real(2, &mut rng);
            let (a, b) = (gaussian_rvec(2, &mut rng), gaussian_rvec(2, &mut rng));
            let lhs = area(&(&m * &a), &(&m * &b)).unwrap();
            let rhs = m.determinant().abs() * area(&a, &b).unwrap();
            assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(lhs).max(1e-300));
        }
    }

    #[test]
    fn classifier_examples() {
        let squeeze = RMat::from_diagonal(&v(&[2.0, 0.5]));
        let verdict = is_area_preserving_linear(&squeeze).unwrap();
        assert!(verdict.preserving && verdict.witness.is_none());
        let e1 = v(&[1.0, 0.0]);
        let e2 = v(&[0.0, 1.0]);
        assert!((area(&(&squeeze * &e1), &(&squeeze * &e2)).unwrap() - 1.0).abs() < 1e-15);

        let m = RMat::from_diagonal(&v(&[2.0, 0.5, 1.0]));
        let verdict = is_area_preserving_linear(&m).unwrap();
        assert!(!verdict.preserving);
        let (a, b) = verdict.witness.unwrap();
        // The witness is (±e1, ±e3): unit area mapped to area 2.
        assert!((a[0].abs() - 1.0).abs() < 1e-12 && (b[2].abs() - 1.0).abs() < 1e-12);
        assert!((area(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        assert!((area(&(&m * &a), &(&m * &b)).unwrap() - 2.0).abs() < 1e-12);

        for d in 2..=8 {
            let q = haar_orthogonal(d, d as u64).unwrap();
            assert!(is_area_preserving_linear(&q).unwrap().preserving);
        }
    }

    #[test]
    fn witness_handles_reciprocal_singular_values() {
        // Pairing the farthest singular value with the nearest one would give
        // 2 · 0.5 = 1, no distortion; the pair search must avoid that.
        let m = RMat::from_diagonal(&v(&[2.0, 0.5, 0.5]));
        let verdict = is_area_preserving_linear(&m).unwrap();
        let (a, b) = verdict.witness.unwrap();
        let distortion = (area(&(&m * &a), &(&m * &b)).unwrap() - area(&a, &b).unwrap()).abs();
        assert!(distortion > 1e-6);
    }
}
