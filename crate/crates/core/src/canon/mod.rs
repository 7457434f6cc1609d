//! Recovery of canonical forms from black-box preservers.
//!
//! Each canonicalizer runs a fixed query plan against the map and then does
//! pure post-processing, so its output depends only on the map and the seed.
//! Accepted forms are re-validated on seeded probes; any misfit is reported
//! as [`Error::NotAPreserver`].

mod area;
mod comm;
mod projection;

use std::sync::Mutex;

use serde::{Deserialize, Serialize};

pub use area::{area_canon_2d, area_canon_highd, area_probes, wigner_real, CanonicalAreaForm};
pub use comm::{
    comm_canon_2x2, comm_canon_general, comm_gauge_flag_2x2, comm_probes, CanonicalCommForm,
};
pub use projection::{
    extend_projection_map, projection_probes, wigner_complex, ExtendedProjectionMap, WignerForm,
};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::gauge::GaugeNorm;
use crate::linalg::{c, first_significant_entry, outer, svd, CMat, CVec, RMat, RVec};
use crate::maps::{MatrixMap, Point, VectorMap};

/// Probes drawn for validation unless configured otherwise.
pub const DEFAULT_PROBES: usize = 64;

/// Reconstruction residual accepted on probes.
pub const PROBE_TOL: f64 = 1e-7;

/// Tolerance of the hypothesis re-validation run before recovery.
pub const VALIDATION_TOL: f64 = 1e-8;

/// Spread allowed inside the repeated eigenvalue cluster of `m(P)`.
pub const CLUSTER_TOL: f64 = 1e-6;

/// Inputs this close to a real multiple of the identity get `τ = +1`.
pub const SCALAR_TOL: f64 = 1e-10;

/// Entries below this are skipped by the first-nonzero sign and phase rules.
pub const GAUGE_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonConfig {
    pub seed: u64,
    pub probes: usize,
    pub exec: Execution,
}

impl CanonConfig {
    pub fn new(seed: u64) -> Self {
        CanonConfig {
            seed,
            probes: DEFAULT_PROBES,
            exec: Execution::default(),
        }
    }

    pub fn with_exec(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    Area,
    CommNorm,
    WignerReal,
    WignerComplex,
    ExtendProjection,
}

impl std::str::FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "area" => Target::Area,
            "comm-norm" => Target::CommNorm,
            "wigner-real" => Target::WignerReal,
            "wigner-complex" => Target::WignerComplex,
            "extend-projection" => Target::ExtendProjection,
            other => return Err(Error::Parameter(format!("unknown target `{other}`"))),
        })
    }
}

fn point_json(p: &Point) -> String {
    serde_json::to_string(p).unwrap_or_default()
}

/// Negates `r` unless the first entry of column 1 above the gauge threshold
/// is positive.
fn fix_global_sign(r: RMat) -> RMat {
    let first = r
        .column(0)
        .iter()
        .copied()
        .find(|x| x.abs() > GAUGE_THRESHOLD);
    match first {
        Some(x) if x < 0.0 => -r,
        _ => r,
    }
}

/// Nearest unitary in Frobenius norm.
fn nearest_unitary(m: &CMat) -> CMat {
    let s = svd(m);
    &s.u * s.v.adjoint()
}

/// Multiplies `u` by the phase making its first significant entry
/// (row-major) real and positive.
fn fix_global_phase(u: CMat) -> CMat {
    match first_significant_entry(&u, GAUGE_THRESHOLD) {
        Some(idx) => {
            let z = u[idx];
            let phase = z.conj() / z.norm();
            u * phase
        }
        None => u,
    }
}

fn basis_cvec(d: usize, j: usize) -> CVec {
    let mut e = CVec::zeros(d);
    e[j] = c(1.0, 0.0);
    e
}

/// Wigner-style assembly of the implementing (anti)unitary from the rays
/// `ray(P)` spanned by the images of the projections onto `e_j`,
/// `(e₁ + e_j)/√2` and `(e₁ + i e_j)/√2`.
///
/// Returns the unitary with its global phase fixed and whether the map is
/// antiunitary; the antiunitary vote must be unanimous.
fn assemble_unitary<F>(d: usize, ray: F) -> Result<(CMat, bool)>
where
    F: Fn(&CMat) -> Result<CVec>,
{
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let raw: Vec<CVec> = (0..d)
        .map(|j| ray(&outer(&basis_cvec(d, j))))
        .collect::<Result<_>>()?;
    let e0 = basis_cvec(d, 0);
    let mut cols = vec![raw[0].clone()];
    for (j, bj) in raw.iter().enumerate().skip(1) {
        let x = (&e0 + basis_cvec(d, j)) * c(s, 0.0);
        let w = ray(&outer(&x))?;
        let (a, b) = (w.dotc(&raw[0]), w.dotc(bj));
        if a.norm() < 1e-6 || b.norm() < 1e-6 {
            return Err(Error::NotAPreserver(format!(
                "image of the superposition of e1 and e{} has no overlap with the basis images",
                j + 1
            )));
        }
        let phase = a * b.conj() / (a.norm() * b.norm());
        cols.push(bj * phase);
    }
    let (mut unitary_votes, mut anti_votes) = (0usize, 0usize);
    for j in 1..d {
        let x = (&e0 + basis_cvec(d, j) * c(0.0, 1.0)) * c(s, 0.0);
        let w = ray(&outer(&x))?;
        let plus = w.dotc(&(&cols[0] + &cols[j] * c(0.0, 1.0))).norm();
        let minus = w.dotc(&(&cols[0] - &cols[j] * c(0.0, 1.0))).norm();
        if plus >= minus {
            unitary_votes += 1;
        } else {
            anti_votes += 1;
        }
    }
    if unitary_votes > 0 && anti_votes > 0 {
        return Err(Error::NotAPreserver(format!(
            "antiunitary vote not unanimous: {unitary_votes} unitary, {anti_votes} antiunitary"
        )));
    }
    let u = CMat::from_columns(&cols);
    Ok((fix_global_phase(nearest_unitary(&u)), anti_votes > 0))
}

struct RecordingVectorMap {
    dim: usize,
    log: Mutex<Vec<Point>>,
}

impl VectorMap for RecordingVectorMap {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, v: &RVec) -> Result<RVec> {
        self.log
            .lock()
            .expect("log lock")
            .push(Point::from_vector(v));
        Ok(v.clone())
    }
}

struct RecordingMatrixMap {
    dim: usize,
    log: Mutex<Vec<Point>>,
}

impl MatrixMap for RecordingMatrixMap {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, a: &CMat) -> Result<CMat> {
        self.log
            .lock()
            .expect("log lock")
            .push(Point::from_matrix(a));
        Ok(a.clone())
    }
}

fn dedup(points: Vec<Point>) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(points.len());
    for p in points {
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

/// Every input the canonicalizer for `target` queries on a `d`-dimensional
/// map under `cfg`, in first-query order.
///
/// The query points never depend on the map's answers, so the plan is
/// obtained by running the procedure once against the identity and recording
/// the queries. A table holding the map's values at these points can be
/// canonicalized without a live evaluator.
pub fn query_plan(
    target: Target,
    d: usize,
    norm: &GaugeNorm,
    cfg: &CanonConfig,
) -> Result<Vec<Point>> {
    let cfg = CanonConfig {
        exec: Execution::Sequential,
        ..*cfg
    };
    let log = match target {
        Target::Area | Target::WignerReal => {
            let rec = RecordingVectorMap {
                dim: d,
                log: Mutex::new(Vec::new()),
            };
            match (target, d) {
                (Target::Area, 2) => area_canon_2d(&rec, &cfg).map(|_| ())?,
                (Target::Area, _) => area_canon_highd(&rec, &cfg).map(|_| ())?,
                _ => wigner_real(&rec, &cfg).map(|_| ())?,
            }
            rec.log.into_inner().expect("log lock")
        }
        Target::CommNorm | Target::WignerComplex => {
            let rec = RecordingMatrixMap {
                dim: d,
                log: Mutex::new(Vec::new()),
            };
            if target == Target::CommNorm {
                comm_canon_general(&rec, norm, &cfg)?;
            } else {
                wigner_complex(&rec, &cfg)?;
            }
            rec.log.into_inner().expect("log lock")
        }
        Target::ExtendProjection => {
            let rec = RecordingMatrixMap {
                dim: d,
                log: Mutex::new(Vec::new()),
            };
            let ext = extend_projection_map(&rec, &cfg)?;
            comm_canon_2x2(&ext, norm, &cfg)?;
            rec.log.into_inner().expect("log lock")
        }
    };
    Ok(dedup(log))
}
