//! Batch run of the exact identities the library relies on.
//!
//! Each identity is evaluated on at least 1000 seeded instances and its
//! largest relative residual compared with [`SUITE_TOL`]. The kernels under
//! test are taken from a [`Kernels`] table so that faults can be injected.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exec::Execution;
use crate::gauge::{self, GaugeNorm};
use crate::geometry::{self, cross};
use crate::linalg::{outer, CMat, Hermitian, RMat, RVec};
use crate::pauli::iota;
use crate::random::{
    gaussian_hermitian, gaussian_real, gaussian_rvec, haar_unitary_with, sample_rng, unit_cvec,
};

pub const SUITE_TOL: f64 = 1e-9;

const INSTANCES: usize = 1000;
const DIMS: [usize; 4] = [2, 3, 4, 8];

/// Implementations exercised by the suite.
#[derive(Clone, Copy)]
pub struct Kernels {
    pub area: fn(&RVec, &RVec) -> Result<f64>,
    pub area_polarized: fn(&RVec, &RVec) -> Result<f64>,
    pub det_comm_2d: fn(&Hermitian, &Hermitian) -> Result<f64>,
    pub gauge: fn(&GaugeNorm, &[f64]) -> Result<f64>,
    pub comm_norm: fn(&GaugeNorm, &Hermitian, &Hermitian) -> Result<f64>,
    pub ui_norm: fn(&GaugeNorm, &CMat) -> Result<f64>,
    pub rank_one_constant: fn(&GaugeNorm, usize) -> Result<f64>,
}

impl Default for Kernels {
    fn default() -> Self {
        Kernels {
            area: geometry::area,
            area_polarized: geometry::area_polarized,
            det_comm_2d: gauge::det_comm_2d,
            gauge: |n, v| n.gauge(v),
            comm_norm: gauge::comm_norm,
            ui_norm: gauge::ui_norm,
            rank_one_constant: gauge::rank_one_comm_constant,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityResult {
    pub name: String,
    pub pass: bool,
    pub instances: usize,
    pub max_residual: f64,
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub pass: bool,
    pub identities: Vec<IdentityResult>,
}

impl SuiteReport {
    pub fn get(&self, name: &str) -> Option<&IdentityResult> {
        self.identities.iter().find(|r| r.name == name)
    }
}

fn rel(x: f64, y: f64) -> f64 {
    let scale = x.abs().max(y.abs());
    if scale == 0.0 {
        0.0
    } else {
        (x - y).abs() / scale
    }
}

fn run<F>(name: &str, seed: u64, stream: u64, exec: Execution, f: F) -> IdentityResult
where
    F: Fn(&mut rand_chacha::ChaCha8Rng, usize) -> Result<f64> + Sync + Send,
{
    let residuals = exec.map_range(INSTANCES, |i| f(&mut sample_rng(seed, stream, i as u64), i));
    let mut max_residual = 0.0f64;
    let mut error = None;
    for r in residuals {
        match r {
            Ok(x) if x.is_nan() => max_residual = f64::INFINITY,
            Ok(x) => max_residual = max_residual.max(x),
            Err(e) => {
                error.get_or_insert_with(|| e.to_string());
            }
        }
    }
    IdentityResult {
        name: name.to_string(),
        pass: error.is_none() && max_residual <= SUITE_TOL,
        instances: INSTANCES,
        max_residual,
        tol: SUITE_TOL,
        error,
    }
}

fn norm_max<F>(norms: &[GaugeNorm], mut f: F) -> Result<f64>
where
    F: FnMut(&GaugeNorm) -> Result<f64>,
{
    norms.iter().try_fold(0.0f64, |acc, n| Ok(acc.max(f(n)?)))
}

/// Runs every identity with the given kernels.
pub fn identity_suite(seed: u64, kernels: &Kernels, exec: Execution) -> SuiteReport {
    let k = *kernels;
    let identities = vec![
        run("area-two-forms", seed, 1, exec, |rng, i| {
            let d = 2 + i % 7;
            let (a, b) = (gaussian_rvec(d, rng), gaussian_rvec(d, rng));
            Ok(rel((k.area)(&a, &b)?, (k.area_polarized)(&a, &b)?))
        }),
        run("planar-scaling-law", seed, 2, exec, |rng, _| {
            let m: RMat = gaussian_real(2, rng);
            let (a, b) = (gaussian_rvec(2, rng), gaussian_rvec(2, rng));
            let lhs = (k.area)(&(&m * &a), &(&m * &b))?;
            Ok(rel(lhs, m.determinant().abs() * (k.area)(&a, &b)?))
        }),
        run("det-cross", seed, 3, exec, |rng, _| {
            let (v, w) = (gaussian_rvec(3, rng), gaussian_rvec(3, rng));
            let det = (k.det_comm_2d)(iota(&v)?.hermitian(), iota(&w)?.hermitian())?;
            Ok(rel(det, 4.0 * cross(&v, &w)?.norm_squared()))
        }),
        run("gauge-equivalence-2x2", seed, 4, exec, |rng, _| {
            let a = Hermitian::new(gaussian_hermitian(2, rng))?;
            let b = Hermitian::new(gaussian_hermitian(2, rng))?;
            let s = (k.det_comm_2d)(&a, &b)?.sqrt();
            norm_max(&GaugeNorm::standard_battery(2), |n| {
                Ok(rel((k.comm_norm)(n, &a, &b)?, (k.gauge)(n, &[s, s])?))
            })
        }),
        run("rank-one-constant", seed, 5, exec, |rng, i| {
            let d = DIMS[i % DIMS.len()];
            let a = Hermitian::new(gaussian_hermitian(d, rng))?;
            let x = unit_cvec(d, rng);
            let p = Hermitian::new(outer(&x))?;
            let spread = gauge::rank_one_variance(&a, &x).sqrt();
            norm_max(&GaugeNorm::standard_battery(d), |n| {
                Ok(rel(
                    (k.comm_norm)(n, &a, &p)? / spread,
                    (k.rank_one_constant)(n, d)?,
                ))
            })
        }),
        run("unitary-invariance", seed, 6, exec, |rng, i| {
            let d = DIMS[i % DIMS.len()];
            let a = crate::random::gaussian_complex(d, rng);
            let (u, v) = (haar_unitary_with(d, rng), haar_unitary_with(d, rng));
            let moved = &u * &a * &v;
            norm_max(&GaugeNorm::standard_battery(d), |n| {
                Ok(rel((k.ui_norm)(n, &moved)?, (k.ui_norm)(n, &a)?))
            })
        }),
    ];
    SuiteReport {
        seed,
        pass: identities.iter().all(|r| r.pass),
        identities,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        let report = identity_suite(0, &Kernels::default(), Execution::default());
        assert!(report.pass, "{report:#?}");
        for r in &report.identities {
            assert!(r.instances >= 1000 && r.max_residual <= 1e-9);
        }
    }

    #[test]
    fn suite_is_deterministic() {
        let a = identity_suite(5, &Kernels::default(), Execution::Parallel);
        let b = identity_suite(5, &Kernels::default(), Execution::Sequential);
        assert_eq!(a, b);
    }

    #[test]
    fn faulty_gauge_is_caught_alone() {
        let kernels = Kernels {
            gauge: |n, v| Ok(n.gauge(v)? * (1.0 + 1e-6)),
            ..Kernels::default()
        };
        let report = identity_suite(1, &kernels, Execution::default());
        assert!(!report.pass);
        for r in &report.identities {
            assert_eq!(r.pass, r.name != "gauge-equivalence-2x2", "{}", r.name);
        }
    }

    #[test]
    fn faulty_polarized_area_is_caught_alone() {
        let kernels = Kernels {
            area_polarized: |a, b| Ok(geometry::area_polarized(a, b)? + 1e-3),
            ..Kernels::default()
        };
        let report = identity_suite(1, &kernels, Execution::default());
        for r in &report.identities {
            assert_eq!(r.pass, r.name != "area-two-forms", "{}", r.name);
        }
    }
}
