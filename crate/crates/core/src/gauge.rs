//! Unitarily invariant norms as symmetric gauge functions of singular values.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{commutator, singular_values, CMat, CVec, Hermitian};

/// Descriptor of a symmetric gauge function.
///
/// Text form: `operator`, `schatten:<p>` (with `p >= 1` or `inf`),
/// `kyfan:<k>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum GaugeNorm {
    Operator,
    Schatten(f64),
    KyFan(usize),
}

impl GaugeNorm {
    pub fn schatten(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::Parameter(format!(
                "schatten exponent must be >= 1, got {p}"
            )));
        }
        Ok(GaugeNorm::Schatten(p))
    }

    pub fn kyfan(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Parameter("kyfan index must be >= 1".into()));
        }
        Ok(GaugeNorm::KyFan(k))
    }

    /// `schatten:1,2,3,inf` and `kyfan:1..=d`.
    pub fn standard_battery(d: usize) -> Vec<GaugeNorm> {
        let mut out = vec![
            GaugeNorm::Schatten(1.0),
            GaugeNorm::Schatten(2.0),
            GaugeNorm::Schatten(3.0),
            GaugeNorm::Schatten(f64::INFINITY),
        ];
        out.extend((1..=d).map(GaugeNorm::KyFan));
        out
    }

    /// Applies the gauge to a vector of reals (signs and order are ignored).
    pub fn gauge(&self, values: &[f64]) -> Result<f64> {
        let mut s: Vec<f64> = values.iter().map(|x| x.abs()).collect();
        s.sort_by(|a, b| b.total_cmp(a));
        let largest = s.first().copied().unwrap_or(0.0);
        match *self {
            GaugeNorm::Operator => Ok(largest),
            GaugeNorm::Schatten(p) if p.is_infinite() => Ok(largest),
            GaugeNorm::Schatten(p) => {
                if largest == 0.0 {
                    return Ok(0.0);
                }
                let sum: f64 = s.iter().map(|x| (x / largest).powf(p)).sum();
                Ok(largest * sum.powf(1.0 / p))
            }
            GaugeNorm::KyFan(k) => {
                if k == 0 || k > s.len() {
                    return Err(Error::Parameter(format!(
                        "kyfan:{k} needs 1 <= k <= {}",
                        s.len()
                    )));
                }
                Ok(s[..k].iter().sum())
            }
        }
    }
}

impl fmt::Display for GaugeNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GaugeNorm::Operator => write!(f, "operator"),
            GaugeNorm::Schatten(p) if p.is_infinite() => write!(f, "schatten:inf"),
            GaugeNorm::Schatten(p) => write!(f, "schatten:{p}"),
            GaugeNorm::KyFan(k) => write!(f, "kyfan:{k}"),
        }
    }
}

impl FromStr for GaugeNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "operator" {
            return Ok(GaugeNorm::Operator);
        }
        let bad = || Error::Parameter(format!("unrecognized norm descriptor `{s}`"));
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "schatten" => {
                let p = match arg {
                    "inf" | "infinity" => f64::INFINITY,
                    _ => arg.parse::<f64>().map_err(|_| bad())?,
                };
                GaugeNorm::schatten(p)
            }
            "kyfan" => GaugeNorm::kyfan(arg.parse::<usize>().map_err(|_| bad())?),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for GaugeNorm {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GaugeNorm> for String {
    fn from(n: GaugeNorm) -> String {
        n.to_string()
    }
}

/// Unitarily invariant norm of `m`: the gauge of its singular values.
pub fn ui_norm(n: &GaugeNorm, m: &CMat) -> Result<f64> {
    n.gauge(singular_values(m).as_slice())
}

/// `|||[A, B]|||`.
pub fn comm_norm(n: &GaugeNorm, a: &Hermitian, b: &Hermitian) -> Result<f64> {
    ui_norm(n, &commutator(a, b)?)
}

/// `det [A, B]` for 2×2 Hermitian `A`, `B`.
///
/// The commutator is skew-Hermitian and traceless, so its eigenvalues are
/// `±i s` and the determinant equals `s² >= 0`, `s` being the common singular
/// value.
pub fn det_comm_2d(a: &Hermitian, b: &Hermitian) -> Result<f64> {
    if a.dim() != 2 || b.dim() != 2 {
        return Err(Error::Dimension(format!(
            "det_comm_2d needs 2x2 matrices, got {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    let k = commutator(a, b)?;
    let det = k[(0, 0)] * k[(1, 1)] - k[(0, 1)] * k[(1, 0)];
    let scale = det.norm().max(1.0);
    if det.im.abs() > 1e-12 * scale {
        return Err(Error::Numerical(format!(
            "det[A,B] has imaginary part {:e}",
            det.im
        )));
    }
    if det.re < -1e-12 * scale {
        return Err(Error::Numerical(format!("det[A,B] = {:e} < 0", det.re)));
    }
    Ok(det.re.max(0.0))
}

/// Constant `c` with `|||[A, x⊗x]||| = c·√(⟨A²x,x⟩ − ⟨Ax,x⟩²)`: the gauge of
/// `(1, 1, 0, …, 0)`, since `[A, x⊗x]` has singular values `(s, s, 0, …)`.
pub fn rank_one_comm_constant(n: &GaugeNorm, d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::Parameter(format!("dimension must be >= 2, got {d}")));
    }
    let mut ones = vec![0.0; d];
    ones[0] = 1.0;
    ones[1] = 1.0;
    n.gauge(&ones)
}

/// `⟨A²x,x⟩ − ⟨Ax,x⟩²` for a unit vector `x`, evaluated as `|(A − μ)x|²` with
/// `μ = ⟨Ax,x⟩`.
pub fn rank_one_variance(a: &Hermitian, x: &CVec) -> f64 {
    let ax = a.matrix() * x;
    let mu = x.dotc(&ax).re;
    (ax - x * crate::linalg::c(mu, 0.0)).norm_squared()
}
