//! Forms `m(A) = τ(A)·U A' U* + f(A)·I` on Hermitian matrices, with
//! `A' = A` (unitary) or `A' = Ā` (antiunitary).

use serde::{Deserialize, Serialize};

use super::{
    area_canon_highd, assemble_unitary, fix_global_sign, point_json, CanonConfig, CLUSTER_TOL,
    PROBE_TOL, SCALAR_TOL, VALIDATION_TOL,
};
use crate::check::{check_comm_norm, CheckConfig};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::gauge::GaugeNorm;
use crate::linalg::{
    c, conjugate_by, conjugate_entrywise, eig_hermitian, frobenius, trace, CMat, CVec, Hermitian,
    RMat, RVec,
};
use crate::maps::{serde_cmat, MatrixMap, Point, VectorMap};
use crate::pauli::{
    conjugation_reflection, iota, iota_inv, rotation_from_unitary, split_improper,
    su2_from_rotation,
};
use crate::random::{gaussian_hermitian, sample_rng};

const STREAM_PROBE: u64 = 0xC9B0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalCommForm {
    #[serde(with = "serde_cmat")]
    pub unitary: CMat,
    pub antiunitary: bool,
    /// Largest `|m(A) − (τ U A' U* + f I)|_F / max(1, |A|_F)` over the probes.
    pub residual: f64,
    pub probes: usize,
}

/// Per-input parameters of the form at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommFit {
    pub tau: f64,
    pub f: f64,
    pub residual: f64,
}

impl CanonicalCommForm {
    pub fn dim(&self) -> usize {
        self.unitary.nrows()
    }

    /// `U A' U*`.
    pub fn conjugate(&self, a: &CMat) -> CMat {
        if self.antiunitary {
            conjugate_by(&self.unitary, &conjugate_entrywise(a))
        } else {
            conjugate_by(&self.unitary, a)
        }
    }

    /// Fits `τ` and `f` at `a` given its image `ma = m(a)`.
    pub fn fit(&self, ma: &CMat, a: &CMat) -> CommFit {
        let d = a.nrows();
        let id = CMat::identity(d, d);
        let (ta, tm) = (trace(a).re, trace(ma).re);
        let shifted = a - &id * c(ta / d as f64, 0.0);
        let image = ma - &id * c(tm / d as f64, 0.0);
        let conj = self.conjugate(&shifted);
        let tau = if frobenius(&shifted) <= SCALAR_TOL
            || frobenius(&(&image - &conj)) <= frobenius(&(&image + &conj))
        {
            1.0
        } else {
            -1.0
        };
        let f = (tm - tau * ta) / d as f64;
        let recon = self.conjugate(a) * c(tau, 0.0) + id * c(f, 0.0);
        CommFit {
            tau,
            f,
            residual: frobenius(&(ma - recon)) / frobenius(a).max(1.0),
        }
    }

    pub fn fit_at(&self, m: &dyn MatrixMap, a: &CMat) -> Result<CommFit> {
        Ok(self.fit(&eval(m, a)?, a))
    }

    pub fn tau_at(&self, m: &dyn MatrixMap, a: &CMat) -> Result<f64> {
        Ok(self.fit_at(m, a)?.tau)
    }

    pub fn f_at(&self, m: &dyn MatrixMap, a: &CMat) -> Result<f64> {
        Ok(self.fit_at(m, a)?.f)
    }

    /// `τ(A)·U A' U* + f(A)·I`.
    pub fn reconstruct_at(&self, m: &dyn MatrixMap, a: &CMat) -> Result<CMat> {
        let fit = self.fit_at(m, a)?;
        let d = a.nrows();
        Ok(self.conjugate(a) * c(fit.tau, 0.0) + CMat::identity(d, d) * c(fit.f, 0.0))
    }

    pub fn residual_on(&self, m: &dyn MatrixMap, probes: &[CMat], exec: Execution) -> Result<f64> {
        Ok(self.worst_probe(m, probes, exec)?.map_or(0.0, |(_, r)| r))
    }

    fn worst_probe(
        &self,
        m: &dyn MatrixMap,
        probes: &[CMat],
        exec: Execution,
    ) -> Result<Option<(usize, f64)>> {
        let fits = exec.map_range(probes.len(), |i| self.fit_at(m, &probes[i]));
        let mut worst: Option<(usize, f64)> = None;
        for (i, fit) in fits.into_iter().enumerate() {
            let r = fit?.residual;
            if worst.is_none_or(|(_, w)| r > w) {
                worst = Some((i, r));
            }
        }
        Ok(worst)
    }
}

fn eval(m: &dyn MatrixMap, a: &CMat) -> Result<CMat> {
    let out = m.eval(a)?;
    if out.nrows() != a.nrows() || out.ncols() != a.ncols() {
        return Err(Error::Dimension(format!(
            "map returned a {}x{} matrix for a {}x{} input",
            out.nrows(),
            out.ncols(),
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(Hermitian::new(out)?.into_inner())
}

/// Seeded Gaussian Hermitian validation probes.
pub fn comm_probes(d: usize, n: usize, seed: u64) -> Vec<CMat> {
    (0..n)
        .map(|i| gaussian_hermitian(d, &mut sample_rng(seed, STREAM_PROBE, i as u64)))
        .collect()
}

fn revalidate(m: &dyn MatrixMap, norm: &GaugeNorm, cfg: &CanonConfig) -> Result<()> {
    let check = CheckConfig::new(cfg.probes, VALIDATION_TOL, cfg.seed).with_exec(cfg.exec);
    let report = check_comm_norm(m, norm, &check)?;
    if !report.pass {
        let at = report
            .witness
            .map(|w| {
                format!(
                    " at {}",
                    serde_json::to_string(&w.inputs).unwrap_or_default()
                )
            })
            .unwrap_or_default();
        return Err(Error::NotAPreserver(format!(
            "commutator norm ({norm}) not preserved (relative error {:e}){at}",
            report.max_rel_err
        )));
    }
    Ok(())
}

fn finish(
    m: &dyn MatrixMap,
    unitary: CMat,
    antiunitary: bool,
    cfg: &CanonConfig,
) -> Result<CanonicalCommForm> {
    let probes = comm_probes(unitary.nrows(), cfg.probes, cfg.seed);
    let mut form = CanonicalCommForm {
        unitary,
        antiunitary,
        residual: 0.0,
        probes: probes.len(),
    };
    if let Some((i, r)) = form.worst_probe(m, &probes, cfg.exec)? {
        if r > PROBE_TOL {
            return Err(Error::NotAPreserver(format!(
                "reconstruction residual {r:e} at probe {}",
                point_json(&Point::from_matrix(&probes[i]))
            )));
        }
        form.residual = r;
    }
    Ok(form)
}

/// `ξ = ι⁻¹ ∘ ψ ∘ ι` with `ψ(C) = m(C) − (tr m(C)/2)·I`.
struct TracelessPart<'a> {
    m: &'a dyn MatrixMap,
}

impl VectorMap for TracelessPart<'_> {
    fn dim(&self) -> usize {
        3
    }

    fn eval(&self, v: &RVec) -> Result<RVec> {
        let x = iota(v)?;
        let out = eval(self.m, x.matrix())?;
        let half = trace(&out) * 0.5;
        iota_inv(&(out - CMat::identity(2, 2) * half))
    }
}

/// Canonical form of a commutator-norm preserver on 2×2 Hermitian matrices.
///
/// The traceless part is carried to `R³` by the Pauli map and recovered as a
/// signed orthogonal map `R`. A proper `R` lifts to a unitary; an improper one
/// is split as `R' S` with `S` the conjugation reflection and gives an
/// antiunitary. On 2×2 matrices `A ↦ −Ā` is a unitary conjugation, so the
/// flag is a gauge choice, fixed here by the sign rule on `R` (see
/// [`comm_gauge_flag_2x2`]).
pub fn comm_canon_2x2(
    m: &dyn MatrixMap,
    norm: &GaugeNorm,
    cfg: &CanonConfig,
) -> Result<CanonicalCommForm> {
    if m.dim() != 2 {
        return Err(Error::Dimension(format!(
            "expected 2x2 matrices, got {0}x{0}",
            m.dim()
        )));
    }
    revalidate(m, norm, cfg)?;
    let r = area_canon_highd(&TracelessPart { m }, cfg)?.linear_part;
    let (u, antiunitary) = if r.determinant() > 0.0 {
        (su2_from_rotation(&r)?, false)
    } else {
        let (proper, _) = split_improper(&r)?;
        (su2_from_rotation(&proper)?, true)
    };
    finish(m, u, antiunitary, cfg)
}

/// Antiunitary flag that [`comm_canon_2x2`] reports for `A ↦ U A' U*`.
pub fn comm_gauge_flag_2x2(u: &CMat, antiunitary: bool) -> bool {
    let mut r: RMat = rotation_from_unitary(u);
    if antiunitary {
        r *= conjugation_reflection();
    }
    fix_global_sign(r).determinant() < 0.0
}

/// Outlier eigenvector of `m(P)`: the image is `f·I ± Q` with `Q` rank one.
fn outlier_ray(m: &dyn MatrixMap, p: &CMat) -> Result<CVec> {
    let image = Hermitian::new(eval(m, p)?)?;
    let eig = eig_hermitian(&image);
    let lam = &eig.eigenvalues;
    let d = lam.len();
    let scale = lam.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
    let low = lam[d - 2] - lam[0] <= CLUSTER_TOL * scale;
    let high = lam[d - 1] - lam[1] <= CLUSTER_TOL * scale;
    let col = match (low, high) {
        (true, true) => {
            return Err(Error::Internal(format!(
                "ambiguous eigenvalue split for the image of {}",
                point_json(&Point::from_matrix(p))
            )))
        }
        (true, false) => d - 1,
        (false, true) => 0,
        (false, false) => {
            return Err(Error::NotAPreserver(format!(
                "image of the projection {} is not a scalar plus a rank-one projection",
                point_json(&Point::from_matrix(p))
            )))
        }
    };
    Ok(eig.eigenvectors.column(col).into_owned())
}

/// Canonical form of a commutator-norm preserver on `d×d` Hermitian matrices.
///
/// For `d ≥ 3` the images of rank-one projections are split into a repeated
/// eigenvalue `f` and a simple outlier `f ± 1`; the outlier rays determine `U`
/// up to phase. `d = 2` is delegated to [`comm_canon_2x2`].
pub fn comm_canon_general(
    m: &dyn MatrixMap,
    norm: &GaugeNorm,
    cfg: &CanonConfig,
) -> Result<CanonicalCommForm> {
    let d = m.dim();
    if d == 2 {
        return comm_canon_2x2(m, norm, cfg);
    }
    if d < 2 {
        return Err(Error::Dimension(format!("expected d >= 2, got {d}")));
    }
    revalidate(m, norm, cfg)?;
    let (u, antiunitary) = assemble_unitary(d, |p| outlier_ray(m, p))?;
    finish(m, u, antiunitary, cfg)
}
