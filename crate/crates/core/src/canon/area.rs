//! Signed-linear forms `m(v) = ε(v)·L v` on `R^d`.

use serde::{Deserialize, Serialize};

use super::{fix_global_sign, point_json, CanonConfig, PROBE_TOL, VALIDATION_TOL};
use crate::check::{check_area, CheckConfig};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{nearest_orthogonal, RMat, RVec};
use crate::maps::{serde_rmat, Point, VectorMap};
use crate::random::{gaussian_rvec, sample_rng};

const STREAM_PROBE: u64 = 0x9B0E;
const STREAM_PAIR: u64 = 0x9A1B;

/// Relative misfit allowed when matching `m(e₁ + e_j)` against `±(r₁ ± r_j)`.
const ASSEMBLY_TOL: f64 = 1e-7;

/// Linear part of a signed-linear map plus its fit on the validation probes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalAreaForm {
    #[serde(with = "serde_rmat")]
    pub linear_part: RMat,
    /// Largest `min_s |m(v) − s·Lv| / max(1, |v|)` over the probes.
    pub residual: f64,
    pub probes: usize,
}

impl CanonicalAreaForm {
    pub fn dim(&self) -> usize {
        self.linear_part.nrows()
    }

    /// `(sign, misfit)` for a known image `mv = m(v)`; ties go to `+1`.
    fn fit(&self, mv: &RVec, v: &RVec) -> (f64, f64) {
        let lv = &self.linear_part * v;
        let plus = (mv - &lv).norm();
        let minus = (mv + &lv).norm();
        let scale = v.norm().max(1.0);
        if minus < plus {
            (-1.0, minus / scale)
        } else {
            (1.0, plus / scale)
        }
    }

    /// `ε(v)`: the sign `s` minimizing `|m(v) − s·Lv|`.
    pub fn eps_at(&self, m: &dyn VectorMap, v: &RVec) -> Result<f64> {
        Ok(self.fit(&eval(m, v)?, v).0)
    }

    /// `ε(v)·L v`.
    pub fn reconstruct_at(&self, m: &dyn VectorMap, v: &RVec) -> Result<RVec> {
        Ok(&self.linear_part * v * self.eps_at(m, v)?)
    }

    /// Largest relative misfit of the form on `probes`.
    pub fn residual_on(&self, m: &dyn VectorMap, probes: &[RVec], exec: Execution) -> Result<f64> {
        Ok(self.worst_probe(m, probes, exec)?.map_or(0.0, |(_, r)| r))
    }

    fn worst_probe(
        &self,
        m: &dyn VectorMap,
        probes: &[RVec],
        exec: Execution,
    ) -> Result<Option<(usize, f64)>> {
        let fits = exec.map_range(probes.len(), |i| -> Result<f64> {
            Ok(self.fit(&eval(m, &probes[i])?, &probes[i]).1)
        });
        let mut worst: Option<(usize, f64)> = None;
        for (i, r) in fits.into_iter().enumerate() {
            let r = r?;
            if worst.is_none_or(|(_, w)| r > w) {
                worst = Some((i, r));
            }
        }
        Ok(worst)
    }
}

fn eval(m: &dyn VectorMap, v: &RVec) -> Result<RVec> {
    let out = m.eval(v)?;
    if out.len() != v.len() {
        return Err(Error::Dimension(format!(
            "map returned length {} for input of length {}",
            out.len(),
            v.len()
        )));
    }
    Ok(out)
}

/// Seeded Gaussian validation probes.
pub fn area_probes(d: usize, n: usize, seed: u64) -> Vec<RVec> {
    (0..n)
        .map(|i| gaussian_rvec(d, &mut sample_rng(seed, STREAM_PROBE, i as u64)))
        .collect()
}

fn unit(d: usize, j: usize) -> RVec {
    let mut e = RVec::zeros(d);
    e[j] = 1.0;
    e
}

/// Columns `m(e_j)` with relative signs fixed so that
/// `m(e₁ + e_j) = ±(col₁ + col_j)`.
fn assemble_columns(m: &dyn VectorMap, d: usize) -> Result<RMat> {
    let r: Vec<RVec> = (0..d)
        .map(|j| eval(m, &unit(d, j)))
        .collect::<Result<_>>()?;
    let mut cols = vec![r[0].clone()];
    for j in 1..d {
        let sum = eval(m, &(unit(d, 0) + unit(d, j)))?;
        let scale = (r[0].norm() + r[j].norm()).max(1.0);
        let misfit = |s: f64| {
            let target = &r[0] + &r[j] * s;
            (&sum - &target).norm().min((&sum + &target).norm())
        };
        let (plus, minus) = (misfit(1.0), misfit(-1.0));
        if plus.min(minus) > ASSEMBLY_TOL * scale {
            return Err(Error::NotAPreserver(format!(
                "sign consistency unresolvable at index {}: misfits {plus:e} and {minus:e}",
                j + 1
            )));
        }
        cols.push(if minus < plus { -&r[j] } else { r[j].clone() });
    }
    Ok(RMat::from_columns(&cols))
}

fn revalidate(m: &dyn VectorMap, cfg: &CanonConfig) -> Result<()> {
    let check = CheckConfig::new(cfg.probes, VALIDATION_TOL, cfg.seed).with_exec(cfg.exec);
    let report = check_area(m, &check)?;
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
            "area not preserved (relative error {:e}){at}",
            report.max_rel_err
        )));
    }
    Ok(())
}

fn finish(m: &dyn VectorMap, linear_part: RMat, cfg: &CanonConfig) -> Result<CanonicalAreaForm> {
    let probes = area_probes(linear_part.nrows(), cfg.probes, cfg.seed);
    let mut form = CanonicalAreaForm {
        linear_part,
        residual: 0.0,
        probes: probes.len(),
    };
    if let Some((i, r)) = form.worst_probe(m, &probes, cfg.exec)? {
        if r > PROBE_TOL {
            return Err(Error::NotAPreserver(format!(
                "reconstruction residual {r:e} at probe {}",
                point_json(&Point::from_vector(&probes[i]))
            )));
        }
        form.residual = r;
    }
    Ok(form)
}

/// Recovers `m(v) = ε(v)·B v` with `|det B| = 1` on the plane.
///
/// The columns of `B` are read from `m(e₁)` and `m(e₂)` with their relative
/// sign fixed by `m(e₁ + e₂)`; no global sign is imposed.
pub fn area_canon_2d(m: &dyn VectorMap, cfg: &CanonConfig) -> Result<CanonicalAreaForm> {
    if m.dim() != 2 {
        return Err(Error::Dimension(format!(
            "expected a map on R^2, got R^{}",
            m.dim()
        )));
    }
    revalidate(m, cfg)?;
    let b = assemble_columns(m, 2)?;
    let det = b.determinant();
    if !((det.abs() - 1.0).abs() <= 1e-6) {
        return Err(Error::NotAPreserver(format!(
            "|det B| = {} differs from 1",
            det.abs()
        )));
    }
    finish(m, b, cfg)
}

fn require_norms(m: &dyn VectorMap, d: usize, cfg: &CanonConfig) -> Result<()> {
    let mut points: Vec<RVec> = (0..d).map(|j| unit(d, j)).collect();
    points.extend(area_probes(d, cfg.probes, cfg.seed));
    for v in &points {
        let mv = eval(m, v)?;
        if (mv.norm() - v.norm()).abs() > PROBE_TOL * v.norm().max(1.0) {
            return Err(Error::NotAPreserver(format!(
                "norm not preserved: |m(v)| = {} but |v| = {} at {}",
                mv.norm(),
                v.norm(),
                point_json(&Point::from_vector(v))
            )));
        }
    }
    Ok(())
}

/// Recovers `m(v) = ε(v)·R v` with `R` orthogonal on `R^d`, `d ≥ 3`.
pub fn area_canon_highd(m: &dyn VectorMap, cfg: &CanonConfig) -> Result<CanonicalAreaForm> {
    let d = m.dim();
    if d < 3 {
        return Err(Error::Dimension(format!("expected d >= 3, got {d}")));
    }
    revalidate(m, cfg)?;
    require_norms(m, d, cfg)?;
    let r = fix_global_sign(nearest_orthogonal(&assemble_columns(m, d)?));
    finish(m, r, cfg)
}

fn wigner_pairs(d: usize, n: usize, seed: u64) -> Vec<(RVec, RVec)> {
    (0..n)
        .map(|i| {
            let mut rng = sample_rng(seed, STREAM_PAIR, i as u64);
            (gaussian_rvec(d, &mut rng), gaussian_rvec(d, &mut rng))
        })
        .collect()
}

/// Recovers the orthogonal part of a map with `|⟨m(a), m(b)⟩| = |⟨a, b⟩|`.
pub fn wigner_real(m: &dyn VectorMap, cfg: &CanonConfig) -> Result<CanonicalAreaForm> {
    let d = m.dim();
    if d < 2 {
        return Err(Error::Dimension(format!("expected d >= 2, got {d}")));
    }
    for (a, b) in wigner_pairs(d, cfg.probes, cfg.seed) {
        let (ma, mb) = (eval(m, &a)?, eval(m, &b)?);
        let (before, after) = (a.dot(&b).abs(), ma.dot(&mb).abs());
        if (before - after).abs() > VALIDATION_TOL * (a.norm() * b.norm()).max(1.0) {
            return Err(Error::NotAPreserver(format!(
                "|<a,b>| = {before} but |<m(a),m(b)>| = {after} at {}",
                serde_json::to_string(&[Point::from_vector(&a), Point::from_vector(&b)])
                    .unwrap_or_default()
            )));
        }
    }
    let r = fix_global_sign(nearest_orthogonal(&assemble_columns(m, d)?));
    finish(m, r, cfg)
}
