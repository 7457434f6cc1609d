//! Randomized black-box checks of preserver hypotheses.
//!
//! A check draws a seeded batch of inputs, evaluates the map on them
//! (concurrently when allowed) and reduces the per-sample errors by maximum.
//! Sampling can only falsify a universally quantified property, so a passing
//! report means that no violation was found among the samples drawn.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::gauge::{comm_norm, GaugeNorm};
use crate::geometry::area;
use crate::linalg::{
    commutator, frobenius, outer, projection_defect, trace, CMat, CVec, Hermitian, RVec,
};
use crate::maps::{MatrixMap, Point, VectorMap};
use crate::random::{gaussian_hermitian, gaussian_rvec, normal, sample_rng, unit_cvec};

pub const DEFAULT_TOL: f64 = 1e-8;

/// Inputs with norm below this are redrawn.
pub const DEGENERATE_NORM: f64 = 1e-6;

const STREAM_AREA: u64 = 0xA8EA;
const STREAM_COMM: u64 = 0xC0AA;
const STREAM_COMMUTE: u64 = 0xC0BB;
const STREAM_ORTHO: u64 = 0x0A7B;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckConfig {
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
    pub exec: Execution,
}

impl CheckConfig {
    pub fn new(samples: usize, tol: f64, seed: u64) -> Self {
        CheckConfig {
            samples,
            tol,
            seed,
            exec: Execution::default(),
        }
    }

    pub fn with_exec(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }
}

/// Inputs at which a property failed, and the two sides that should agree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub inputs: Vec<Point>,
    pub lhs: f64,
    pub rhs: f64,
    pub note: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationCounts {
    pub forward: u64,
    pub backward: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub property: String,
    pub pass: bool,
    pub n_samples: usize,
    pub tol: f64,
    pub max_abs_err: f64,
    pub max_rel_err: f64,
    pub witness: Option<Witness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violations: Option<ViolationCounts>,
    pub seed: u64,
}

impl CheckReport {
    /// Report vocabulary: a randomized check never certifies a property.
    pub fn verdict(&self) -> &'static str {
        if self.pass {
            "no violation found"
        } else {
            "violation found"
        }
    }
}

struct Outcome {
    abs_err: f64,
    rel_err: f64,
    witness: Witness,
    forward_violation: bool,
    backward_violation: bool,
}

impl Outcome {
    fn new(lhs: f64, rhs: f64, scale: f64, inputs: Vec<Point>, note: &str) -> Self {
        let abs_err = (lhs - rhs).abs();
        Outcome {
            abs_err,
            rel_err: abs_err / scale.max(1.0),
            witness: Witness {
                inputs,
                lhs,
                rhs,
                note: note.to_string(),
            },
            forward_violation: false,
            backward_violation: false,
        }
    }

    fn worse(self, other: Outcome) -> Outcome {
        if other.rel_err > self.rel_err {
            Outcome {
                forward_violation: self.forward_violation || other.forward_violation,
                backward_violation: self.backward_violation || other.backward_violation,
                ..other
            }
        } else {
            Outcome {
                forward_violation: self.forward_violation || other.forward_violation,
                backward_violation: self.backward_violation || other.backward_violation,
                ..self
            }
        }
    }
}

/// Order-independent reduction; the first sample attaining the maximum wins.
fn reduce(
    property: &str,
    cfg: &CheckConfig,
    outcomes: Vec<Result<Outcome>>,
    count_violations: bool,
) -> Result<CheckReport> {
    let mut max_abs = 0.0f64;
    let mut worst: Option<Outcome> = None;
    let mut counts = ViolationCounts::default();
    for outcome in outcomes {
        let o = outcome?;
        max_abs = max_abs.max(o.abs_err);
        counts.forward += o.forward_violation as u64;
        counts.backward += o.backward_violation as u64;
        worst = match worst {
            Some(w) if o.rel_err <= w.rel_err => Some(w),
            _ => Some(o),
        };
    }
    let max_rel = worst.as_ref().map_or(0.0, |w| w.rel_err);
    let pass = max_rel <= cfg.tol;
    Ok(CheckReport {
        property: property.to_string(),
        pass,
        n_samples: cfg.samples,
        tol: cfg.tol,
        max_abs_err: max_abs,
        max_rel_err: max_rel,
        witness: if pass { None } else { worst.map(|w| w.witness) },
        violations: count_violations.then_some(counts),
        seed: cfg.seed,
    })
}

fn nondegenerate_rvec<R: rand::Rng>(d: usize, rng: &mut R) -> RVec {
    loop {
        let v = gaussian_rvec(d, rng);
        if v.norm() >= DEGENERATE_NORM {
            return v;
        }
    }
}

fn eval_vector(m: &dyn VectorMap, v: &RVec) -> Result<RVec> {
    let out = m.eval(v)?;
    if out.len() != v.len() {
        return Err(Error::Dimension(format!(
            "map returned a vector of length {} for input of length {}",
            out.len(),
            v.len()
        )));
    }
    Ok(out)
}

fn eval_hermitian(m: &dyn MatrixMap, a: &CMat) -> Result<Hermitian> {
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
    Hermitian::new(out)
}

fn require_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::Dimension(format!(
            "checks need dimension >= 2, got {d}"
        )));
    }
    Ok(())
}

/// Checks `Area(m(a), m(b)) = Area(a, b)` on Gaussian pairs.
///
/// Every tenth sample also checks `|m(t v)| = |t|·|m(v)|`, which any area
/// preserver satisfies.
pub fn check_area(m: &dyn VectorMap, cfg: &CheckConfig) -> Result<CheckReport> {
    let d = m.dim();
    require_dim(d)?;
    let outcomes = cfg.exec.map_range(cfg.samples, |i| -> Result<Outcome> {
        let mut rng = sample_rng(cfg.seed, STREAM_AREA, i as u64);
        let a = nondegenerate_rvec(d, &mut rng);
        let b = nondegenerate_rvec(d, &mut rng);
        let (ma, mb) = (eval_vector(m, &a)?, eval_vector(m, &b)?);
        let before = area(&a, &b)?;
        let after = area(&ma, &mb)?;
        let mut outcome = Outcome::new(
            before,
            after,
            before,
            vec![Point::from_vector(&a), Point::from_vector(&b)],
            "area(a, b) vs area(m(a), m(b))",
        );
        if i % 10 == 0 {
            let t = 2.0 * normal(&mut rng);
            let scaled = eval_vector(m, &(&a * t))?.norm();
            let expected = t.abs() * ma.norm();
            outcome = outcome.worse(Outcome::new(
                expected,
                scaled,
                expected,
                vec![Point::from_vector(&a), Point::Vector(vec![t])],
                "|t|·|m(v)| vs |m(t·v)| for inputs (v, [t])",
            ));
        }
        Ok(outcome)
    });
    reduce("area", cfg, outcomes, false)
}

/// Checks `|||[m(A), m(B)]||| = |||[A, B]|||` on Gaussian Hermitian pairs.
pub fn check_comm_norm(
    m: &dyn MatrixMap,
    norm: &GaugeNorm,
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    let d = m.dim();
    require_dim(d)?;
    let outcomes = cfg.exec.map_range(cfg.samples, |i| -> Result<Outcome> {
        let mut rng = sample_rng(cfg.seed, STREAM_COMM, i as u64);
        let a = Hermitian::new(gaussian_hermitian(d, &mut rng))?;
        let b = Hermitian::new(gaussian_hermitian(d, &mut rng))?;
        let (ma, mb) = (eval_hermitian(m, &a)?, eval_hermitian(m, &b)?);
        let before = comm_norm(norm, &a, &b)?;
        let after = comm_norm(norm, &ma, &mb)?;
        Ok(Outcome::new(
            before,
            after,
            before,
            vec![Point::from_matrix(&a), Point::from_matrix(&b)],
            "|||[A,B]||| vs |||[m(A),m(B)]|||",
        ))
    });
    reduce(&format!("comm-norm ({norm})"), cfg, outcomes, false)
}

fn unit_frobenius(m: CMat) -> CMat {
    let n = frobenius(&m);
    if n > 0.0 {
        m.unscale(n)
    } else {
        m
    }
}

/// Real polynomial of degree at most `d − 1` in `a`, Gaussian coefficients.
fn random_polynomial<R: rand::Rng>(a: &CMat, rng: &mut R) -> CMat {
    let d = a.nrows();
    let mut power = CMat::identity(d, d);
    let mut out = CMat::zeros(d, d);
    for _ in 0..d {
        out += power.scale(normal(rng));
        power = &power * a;
    }
    out
}

/// Checks that commuting pairs map to commuting pairs and that pairs whose
/// images commute did commute.
///
/// Forward pairs are `(A, p(A))` for random real polynomials `p`; backward
/// pairs are independent Hermitian pairs. All inputs are scaled to unit
/// Frobenius norm, and commutator norms of images are divided by
/// `max(1, |m(A)|_F |m(B)|_F)`.
pub fn check_commutativity_bidir(m: &dyn MatrixMap, cfg: &CheckConfig) -> Result<CheckReport> {
    let d = m.dim();
    require_dim(d)?;
    let tol = cfg.tol;
    let outcomes = cfg.exec.map_range(cfg.samples, |i| -> Result<Outcome> {
        let mut rng = sample_rng(cfg.seed, STREAM_COMMUTE, i as u64);
        let a = unit_frobenius(gaussian_hermitian(d, &mut rng));
        let b = unit_frobenius(random_polynomial(&a, &mut rng));
        let c = unit_frobenius(gaussian_hermitian(d, &mut rng));
        let a = Hermitian::new(a)?;
        let b = Hermitian::new(b)?;
        let c = Hermitian::new(c)?;
        let (ma, mb, mc) = (
            eval_hermitian(m, &a)?,
            eval_hermitian(m, &b)?,
            eval_hermitian(m, &c)?,
        );
        let image_scale = |x: &CMat, y: &CMat| (frobenius(x) * frobenius(y)).max(1.0);

        let forward = frobenius(&commutator(&ma, &mb)?) / image_scale(&ma, &mb);
        let mut outcome = Outcome::new(
            0.0,
            forward,
            1.0,
            vec![Point::from_matrix(&a), Point::from_matrix(&b)],
            "commuting pair (A, p(A)): |[m(A),m(B)]|_F should vanish",
        );
        outcome.forward_violation = forward > tol;

        let image_comm = frobenius(&commutator(&ma, &mc)?) / image_scale(&ma, &mc);
        let source_comm = frobenius(&commutator(&a, &c)?);
        if image_comm <= tol && source_comm > tol {
            let mut back = Outcome::new(
                image_comm,
                source_comm,
                1.0,
                vec![Point::from_matrix(&a), Point::from_matrix(&c)],
                "images commute but inputs do not: lhs = |[m(A),m(B)]|_F, rhs = |[A,B]|_F",
            );
            back.rel_err = source_comm;
            back.abs_err = source_comm;
            back.backward_violation = true;
            outcome = outcome.worse(back);
        }
        Ok(outcome)
    });
    reduce("commutativity", cfg, outcomes, true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Both,
    Forward,
}

fn eval_projection(phi: &dyn MatrixMap, p: &CMat, tol: f64) -> Result<CMat> {
    let out = phi.eval(p)?;
    if out.nrows() != p.nrows() || out.ncols() != p.ncols() {
        return Err(Error::Dimension(
            "projection map changed the dimension".into(),
        ));
    }
    let defect = projection_defect(&out);
    if !(defect <= tol.max(1e-12)) {
        return Err(Error::Structure(format!(
            "output is not a rank-one projection (defect {defect:e}) for input {}",
            serde_json::to_string(&Point::from_matrix(p)).unwrap_or_default()
        )));
    }
    Ok(out)
}

/// `x, y` orthonormal by Gram–Schmidt.
fn orthonormal_pair<R: rand::Rng>(d: usize, rng: &mut R) -> (CVec, CVec) {
    let x = unit_cvec(d, rng);
    loop {
        let y = unit_cvec(d, rng);
        let y = &y - &x * x.dotc(&y);
        let n = y.norm();
        if n > 1e-3 {
            return (x, y.unscale(n));
        }
    }
}

/// Checks that a map on rank-one projections preserves orthogonality
/// (`tr(PQ) = 0`), forward only or in both directions.
pub fn check_projection_orthogonality(
    phi: &dyn MatrixMap,
    direction: Direction,
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    let d = phi.dim();
    require_dim(d)?;
    let tol = cfg.tol;
    let outcomes = cfg.exec.map_range(cfg.samples, |i| -> Result<Outcome> {
        let mut rng = sample_rng(cfg.seed, STREAM_ORTHO, i as u64);
        let (x, y) = orthonormal_pair(d, &mut rng);
        let (p, q) = (outer(&x), outer(&y));
        let (fp, fq) = (
            eval_projection(phi, &p, tol)?,
            eval_projection(phi, &q, tol)?,
        );
        let overlap = trace(&(&fp * &fq)).re.abs();
        let mut outcome = Outcome::new(
            0.0,
            overlap,
            1.0,
            vec![Point::from_matrix(&p), Point::from_matrix(&q)],
            "orthogonal pair: tr(Φ(P)Φ(Q)) should vanish",
        );
        outcome.forward_violation = overlap > tol;
        if direction == Direction::Both {
            let z = unit_cvec(d, &mut rng);
            let r = outer(&z);
            let fr = eval_projection(phi, &r, tol)?;
            let source = trace(&(&p * &r)).re.abs();
            let image = trace(&(&fp * &fr)).re.abs();
            if image <= tol && source > tol {
                let mut back = Outcome::new(
                    image,
                    source,
                    1.0,
                    vec![Point::from_matrix(&p), Point::from_matrix(&r)],
                    "images orthogonal but inputs not: lhs = tr(Φ(P)Φ(Q)), rhs = tr(PQ)",
                );
                back.rel_err = source;
                back.abs_err = source;
                back.backward_violation = true;
                outcome = outcome.worse(back);
            }
        }
        Ok(outcome)
    });
    reduce("orthogonality", cfg, outcomes, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, conjugate_by, to_complex, RMat};
    use crate::maps::{matrix_map, vector_map};
    use crate::random::{haar_rotation, haar_unitary};

    fn cfg() -> CheckConfig {
        CheckConfig::new(300, 1e-8, 7)
    }

    fn sign_of(v: &RVec) -> f64 {
        if (v[0] * 1e3).sin() > 0.0 {
            1.0
        } else {
            -1.0
        }
    }

    #[test]
    fn signed_rotation_passes_area() {
        let r = haar_rotation(3, 5).unwrap();
        let m = vector_map(3, move |v| &r * v * sign_of(v));
        let report = check_area(&m, &cfg()).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.witness.is_none());
    }

    #[test]
    fn stretch_fails_area_with_witness() {
        let s = RMat::from_diagonal(&RVec::from_vec(vec![2.0, 1.0, 1.0]));
        let m = vector_map(3, move |v| &s * v);
        let report = check_area(&m, &cfg()).unwrap();
        assert!(!report.pass);
        assert!(report.max_rel_err >= 0.5);
        let w = report.witness.unwrap();
        assert!((w.lhs - w.rhs).abs() / w.lhs.max(1.0) >= 0.5);
    }

    #[test]
    fn identity_passes_area_exactly() {
        let m = vector_map(4, |v| v.clone());
        let report = check_area(&m, &cfg()).unwrap();
        assert!(report.pass && report.max_rel_err <= 1e-15);
    }

    #[test]
    fn conjugation_affine_passes_comm_norm() {
        let u = haar_unitary(3, 11).unwrap();
        let m = matrix_map(3, move |a| {
            let tau = if trace(a).re > 0.3 { 1.0 } else { -1.0 };
            conjugate_by(&u, a).scale(tau) + CMat::identity(3, 3) * trace(a)
        });
        for n in GaugeNorm::standard_battery(3) {
            let report = check_comm_norm(&m, &n, &cfg()).unwrap();
            assert!(report.pass, "{n}: {report:?}");
        }
    }

    #[test]
    fn nonscalar_offset_fails_comm_norm() {
        let u = haar_unitary(3, 12).unwrap();
        let p0 = to_complex(&RMat::from_diagonal(&RVec::from_vec(vec![1.0, 0.0, 0.0])));
        let m = matrix_map(3, move |a| conjugate_by(&u, a) + &p0);
        let report = check_comm_norm(&m, &GaugeNorm::Operator, &cfg()).unwrap();
        assert!(!report.pass && report.witness.is_some());
    }

    #[test]
    fn identity_passes_comm_norm() {
        let m = matrix_map(2, |a| a.clone());
        assert!(
            check_comm_norm(&m, &GaugeNorm::Schatten(2.0), &cfg())
                .unwrap()
                .pass
        );
    }

    #[test]
    fn non_hermitian_output_is_a_structure_error() {
        let m = matrix_map(2, |a| a * c(0.0, 1.0));
        let err = check_comm_norm(&m, &GaugeNorm::Operator, &cfg()).unwrap_err();
        assert!(matches!(err, Error::Structure(_)));
    }

    #[test]
    fn commutativity_examples() {
        let u = haar_unitary(4, 3).unwrap();
        let conj = matrix_map(4, move |a| conjugate_by(&u, a));
        let report = check_commutativity_bidir(&conj, &cfg()).unwrap();
        assert!(report.pass);
        assert_eq!(report.violations, Some(ViolationCounts::default()));

        let u = haar_unitary(3, 4).unwrap();
        let affine = matrix_map(3, move |a| {
            conjugate_by(&u, a).scale(-1.0) + CMat::identity(3, 3) * trace(a)
        });
        assert!(
            check_comm_norm(&affine, &GaugeNorm::Operator, &cfg())
                .unwrap()
                .pass
        );
        let cfg9 = CheckConfig::new(300, 1e-9, 7);
        assert!(check_commutativity_bidir(&affine, &cfg9).unwrap().pass);

        let diag = matrix_map(2, |a| CMat::from_diagonal(&a.diagonal()));
        let report = check_commutativity_bidir(&diag, &cfg()).unwrap();
        assert!(!report.pass);
        let counts = report.violations.unwrap();
        assert_eq!(counts.forward, 0);
        assert!(counts.backward > 0);
        assert!(report.witness.is_some());
    }

    #[test]
    fn orthogonality_examples() {
        let u = haar_unitary(3, 5).unwrap();
        let conj = matrix_map(3, move |p| conjugate_by(&u, p));
        assert!(
            check_projection_orthogonality(&conj, Direction::Both, &cfg())
                .unwrap()
                .pass
        );

        let u2 = haar_unitary(2, 6).unwrap();
        let complement = matrix_map(2, move |p| conjugate_by(&u2, &(CMat::identity(2, 2) - p)));
        assert!(
            check_projection_orthogonality(&complement, Direction::Both, &cfg())
                .unwrap()
                .pass
        );

        let fixed = outer(&CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]));
        let constant = matrix_map(3, move |_| fixed.clone());
        let report = check_projection_orthogonality(&constant, Direction::Forward, &cfg()).unwrap();
        assert!(!report.pass && report.witness.is_some());
        assert!(report.violations.unwrap().forward > 0);
    }

    #[test]
    fn invalid_projection_output_is_rejected() {
        let m = matrix_map(2, |p| p.scale(2.0));
        let err = check_projection_orthogonality(&m, Direction::Both, &cfg()).unwrap_err();
        assert!(matches!(err, Error::Structure(_)));
    }

    #[test]
    fn reports_are_deterministic_across_execution_modes() {
        let s = RMat::from_diagonal(&RVec::from_vec(vec![1.1, 1.0, 0.9]));
        let m = vector_map(3, move |v| &s * v);
        let seq = check_area(&m, &cfg().with_exec(Execution::Sequential)).unwrap();
        let par = check_area(&m, &cfg().with_exec(Execution::Parallel)).unwrap();
        assert_eq!(seq, par);
        assert_eq!(seq.max_rel_err.to_bits(), par.max_rel_err.to_bits());
        let again = check_area(&m, &cfg()).unwrap();
        assert_eq!(par, again);
    }
}
