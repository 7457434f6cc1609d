//! Maps on rank-one projections: spectral extension to Hermitian matrices of
//! `C²`, and Wigner-type recovery on `C^d`.

use serde::{Deserialize, Serialize};

use super::{assemble_unitary, point_json, CanonConfig, PROBE_TOL, VALIDATION_TOL};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{
    c, conjugate_by, conjugate_entrywise, eig_hermitian, frobenius, outer, projection_defect,
    trace, CMat, CVec, Hermitian,
};
use crate::maps::{serde_cmat, MatrixMap, Point};
use crate::random::{normal, sample_rng, unit_cvec};

const STREAM_COMPLEMENT: u64 = 0xE87E;
const STREAM_PAIR: u64 = 0x3A1B;
const STREAM_PROBE: u64 = 0x3B0E;

const COMPATIBILITY_SAMPLES: usize = 32;

/// Two eigenvalues closer than this (relative) are treated as equal.
const DEGENERATE_GAP: f64 = 1e-12;

/// Representation-independence tolerance of the extension.
const REPRESENTATION_TOL: f64 = 1e-10;

fn eval(phi: &dyn MatrixMap, p: &CMat) -> Result<CMat> {
    let out = phi.eval(p)?;
    if out.nrows() != p.nrows() || out.ncols() != p.ncols() {
        return Err(Error::Dimension(format!(
            "map returned a {}x{} matrix for a {}x{} input",
            out.nrows(),
            out.ncols(),
            p.nrows(),
            p.ncols()
        )));
    }
    Ok(out)
}

/// Seeded random rank-one projections.
pub fn projection_probes(d: usize, n: usize, seed: u64) -> Vec<CMat> {
    (0..n)
        .map(|i| outer(&unit_cvec(d, &mut sample_rng(seed, STREAM_PROBE, i as u64))))
        .collect()
}

/// `A = λ P + μ (I − P) ↦ λ Φ(P) + μ Φ(I − P)` for a map `Φ` on rank-one
/// projections of `C²`.
pub struct ExtendedProjectionMap<M> {
    phi: M,
}

impl<M: MatrixMap> ExtendedProjectionMap<M> {
    pub fn phi(&self) -> &M {
        &self.phi
    }

    fn assemble(&self, lambda: f64, mu: f64, p: &CMat) -> Result<CMat> {
        let q = CMat::identity(2, 2) - p;
        Ok(eval(&self.phi, p)? * c(lambda, 0.0) + eval(&self.phi, &q)? * c(mu, 0.0))
    }
}

impl<M: MatrixMap> MatrixMap for ExtendedProjectionMap<M> {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, a: &CMat) -> Result<CMat> {
        let h = Hermitian::new(a.clone())?;
        if h.dim() != 2 {
            return Err(Error::Dimension(format!(
                "expected a 2x2 input, got {0}x{0}",
                h.dim()
            )));
        }
        let eig = eig_hermitian(&h);
        let (mu, lambda) = (eig.eigenvalues[0], eig.eigenvalues[1]);
        if lambda - mu <= DEGENERATE_GAP * lambda.abs().max(mu.abs()).max(1.0) {
            return Ok(CMat::identity(2, 2) * c(0.5 * (lambda + mu), 0.0));
        }
        let p = outer(&eig.eigenvectors.column(1).into_owned());
        self.assemble(lambda, mu, &p)
    }
}

/// Extends `Φ` from rank-one projections of `C²` to all Hermitian 2×2
/// matrices through their spectral decomposition.
///
/// Complement compatibility `Φ(I − P) = I − Φ(P)` is checked on seeded samples,
/// as is independence of the extension from the choice of eigenprojection.
pub fn extend_projection_map<M: MatrixMap>(
    phi: M,
    cfg: &CanonConfig,
) -> Result<ExtendedProjectionMap<M>> {
    if phi.dim() != 2 {
        return Err(Error::Dimension(format!(
            "extension is defined on C^2, got C^{}",
            phi.dim()
        )));
    }
    let ext = ExtendedProjectionMap { phi };
    let id = CMat::identity(2, 2);
    for i in 0..COMPATIBILITY_SAMPLES {
        let mut rng = sample_rng(cfg.seed, STREAM_COMPLEMENT, i as u64);
        let p = outer(&unit_cvec(2, &mut rng));
        let q = &id - &p;
        let (fp, fq) = (eval(&ext.phi, &p)?, eval(&ext.phi, &q)?);
        let defect = frobenius(&(&id - &fp - &fq));
        if !(defect <= VALIDATION_TOL) {
            return Err(Error::Precondition(format!(
                "complement compatibility fails (defect {defect:e}) at P = {}",
                point_json(&Point::from_matrix(&p))
            )));
        }
        let (lambda, mu) = (normal(&mut rng), normal(&mut rng));
        let one = ext.assemble(lambda, mu, &p)?;
        let other = ext.assemble(mu, lambda, &q)?;
        let gap = frobenius(&(&one - &other));
        if !(gap <= REPRESENTATION_TOL * lambda.abs().max(mu.abs()).max(1.0)) {
            return Err(Error::Precondition(format!(
                "extension depends on the spectral representation (gap {gap:e}) at P = {}",
                point_json(&Point::from_matrix(&p))
            )));
        }
    }
    Ok(ext)
}

/// `Φ(P) = U P' U*` with `P' = P` or `P̄`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerForm {
    #[serde(with = "serde_cmat")]
    pub unitary: CMat,
    pub antiunitary: bool,
    /// Largest `|Φ(P) − U P' U*|_F` over the probes.
    pub residual: f64,
    pub probes: usize,
}

impl WignerForm {
    pub fn apply(&self, p: &CMat) -> CMat {
        if self.antiunitary {
            conjugate_by(&self.unitary, &conjugate_entrywise(p))
        } else {
            conjugate_by(&self.unitary, p)
        }
    }

    pub fn residual_on(
        &self,
        phi: &dyn MatrixMap,
        probes: &[CMat],
        exec: Execution,
    ) -> Result<f64> {
        Ok(self.worst_probe(phi, probes, exec)?.map_or(0.0, |(_, r)| r))
    }

    fn worst_probe(
        &self,
        phi: &dyn MatrixMap,
        probes: &[CMat],
        exec: Execution,
    ) -> Result<Option<(usize, f64)>> {
        let errs = exec.map_range(probes.len(), |i| -> Result<f64> {
            Ok(frobenius(
                &(eval(phi, &probes[i])? - self.apply(&probes[i])),
            ))
        });
        let mut worst: Option<(usize, f64)> = None;
        for (i, r) in errs.into_iter().enumerate() {
            let r = r?;
            if worst.is_none_or(|(_, w)| r > w) {
                worst = Some((i, r));
            }
        }
        Ok(worst)
    }
}

fn projection_image(phi: &dyn MatrixMap, p: &CMat) -> Result<Hermitian> {
    let out = eval(phi, p)?;
    let defect = projection_defect(&out);
    if !(defect <= VALIDATION_TOL) {
        return Err(Error::NotAPreserver(format!(
            "image of {} is not a rank-one projection (defect {defect:e})",
            point_json(&Point::from_matrix(p))
        )));
    }
    Hermitian::new(out)
}

fn top_ray(phi: &dyn MatrixMap, p: &CMat) -> Result<CVec> {
    let eig = eig_hermitian(&projection_image(phi, p)?);
    Ok(eig
        .eigenvectors
        .column(eig.eigenvalues.len() - 1)
        .into_owned())
}

/// Recovers `U` and the antiunitary flag of a transition-probability
/// preserving map on rank-one projections of `C^d`.
pub fn wigner_complex(phi: &dyn MatrixMap, cfg: &CanonConfig) -> Result<WignerForm> {
    let d = phi.dim();
    if d < 2 {
        return Err(Error::Dimension(format!("expected d >= 2, got {d}")));
    }
    for i in 0..cfg.probes {
        let mut rng = sample_rng(cfg.seed, STREAM_PAIR, i as u64);
        let (p, q) = (
            outer(&unit_cvec(d, &mut rng)),
            outer(&unit_cvec(d, &mut rng)),
        );
        let (fp, fq) = (projection_image(phi, &p)?, projection_image(phi, &q)?);
        let before = trace(&(&p * &q)).re;
        let after = trace(&(fp.matrix() * fq.matrix())).re;
        if !((before - after).abs() <= VALIDATION_TOL) {
            return Err(Error::NotAPreserver(format!(
                "tr(PQ) = {before} but tr(Φ(P)Φ(Q)) = {after} at {}",
                serde_json::to_string(&[Point::from_matrix(&p), Point::from_matrix(&q)])
                    .unwrap_or_default()
            )));
        }
    }
    let (unitary, antiunitary) = assemble_unitary(d, |p| top_ray(phi, p))?;
    let probes = projection_probes(d, cfg.probes, cfg.seed);
    let mut form = WignerForm {
        unitary,
        antiunitary,
        residual: 0.0,
        probes: probes.len(),
    };
    if let Some((i, r)) = form.worst_probe(phi, &probes, cfg.exec)? {
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
