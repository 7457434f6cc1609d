//! Black-box maps: deterministic evaluators on `R^d` or on Hermitian `d×d`
//! matrices, and the JSON point encoding shared by tables and reports.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, RVec};

/// Domain (and codomain) of a map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Space {
    RealEuclidean { dim: usize },
    Hermitian { dim: usize },
}

impl Space {
    pub fn dim(&self) -> usize {
        match *self {
            Space::RealEuclidean { dim } | Space::Hermitian { dim } => dim,
        }
    }
}

/// Deterministic map `R^d → R^d`. Implementations must be reentrant.
pub trait VectorMap: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, v: &RVec) -> Result<RVec>;
}

/// Deterministic map on `d×d` Hermitian matrices (or on rank-one projections).
pub trait MatrixMap: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, a: &CMat) -> Result<CMat>;
}

impl<M: VectorMap + ?Sized> VectorMap for &M {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, v: &RVec) -> Result<RVec> {
        (**self).eval(v)
    }
}

impl<M: MatrixMap + ?Sized> MatrixMap for &M {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, a: &CMat) -> Result<CMat> {
        (**self).eval(a)
    }
}

impl<M: VectorMap + ?Sized> VectorMap for Box<M> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, v: &RVec) -> Result<RVec> {
        (**self).eval(v)
    }
}

impl<M: MatrixMap + ?Sized> MatrixMap for Box<M> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, a: &CMat) -> Result<CMat> {
        (**self).eval(a)
    }
}

/// Closure-backed [`VectorMap`].
pub struct FnVectorMap<F> {
    dim: usize,
    f: F,
}

pub fn vector_map<F>(dim: usize, f: F) -> FnVectorMap<F>
where
    F: Fn(&RVec) -> RVec + Sync,
{
    FnVectorMap { dim, f }
}

impl<F> VectorMap for FnVectorMap<F>
where
    F: Fn(&RVec) -> RVec + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, v: &RVec) -> Result<RVec> {
        Ok((self.f)(v))
    }
}

/// Closure-backed [`MatrixMap`].
pub struct FnMatrixMap<F> {
    dim: usize,
    f: F,
}

pub fn matrix_map<F>(dim: usize, f: F) -> FnMatrixMap<F>
where
    F: Fn(&CMat) -> CMat + Sync,
{
    FnMatrixMap { dim, f }
}

impl<F> MatrixMap for FnMatrixMap<F>
where
    F: Fn(&CMat) -> CMat + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, a: &CMat) -> Result<CMat> {
        Ok((self.f)(a))
    }
}

/// A map together with the space it acts on.
pub enum BlackBoxMap {
    Vector(Box<dyn VectorMap + Send>),
    Matrix(Box<dyn MatrixMap + Send>),
}

impl BlackBoxMap {
    pub fn space(&self) -> Space {
        match self {
            BlackBoxMap::Vector(m) => Space::RealEuclidean { dim: m.dim() },
            BlackBoxMap::Matrix(m) => Space::Hermitian { dim: m.dim() },
        }
    }

    pub fn as_vector(&self) -> Result<&(dyn VectorMap + Send)> {
        match self {
            BlackBoxMap::Vector(m) => Ok(m.as_ref()),
            BlackBoxMap::Matrix(_) => Err(Error::Parameter(
                "operation needs a map on real_euclidean space".into(),
            )),
        }
    }

    pub fn as_matrix(&self) -> Result<&(dyn MatrixMap + Send)> {
        match self {
            BlackBoxMap::Matrix(m) => Ok(m.as_ref()),
            BlackBoxMap::Vector(_) => Err(Error::Parameter(
                "operation needs a map on hermitian space".into(),
            )),
        }
    }
}

/// Point of either space in its JSON form: a vector is `[x, …]`, a matrix is
/// row-major `[[[re, im], …], …]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Point {
    Vector(Vec<f64>),
    Matrix(Vec<Vec<[f64; 2]>>),
}

impl Point {
    pub fn from_vector(v: &RVec) -> Self {
        Point::Vector(v.iter().copied().collect())
    }

    pub fn from_matrix(m: &CMat) -> Self {
        Point::Matrix(encode_matrix(m))
    }

    pub fn to_vector(&self) -> Result<RVec> {
        match self {
            Point::Vector(xs) => Ok(RVec::from_column_slice(xs)),
            Point::Matrix(_) => Err(Error::spec("point", "expected a vector")),
        }
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        match self {
            Point::Matrix(rows) => decode_matrix(rows, "point"),
            Point::Vector(_) => Err(Error::spec("point", "expected a matrix")),
        }
    }
}

pub fn encode_matrix(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

/// Decodes a square row-major complex matrix; `path` labels errors.
pub fn decode_matrix(rows: &[Vec<[f64; 2]>], path: &str) -> Result<CMat> {
    let d = rows.len();
    if d == 0 {
        return Err(Error::spec(path, "empty matrix"));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != d {
            return Err(Error::spec(
                format!("{path}[{i}]"),
                format!("row has {} entries, expected {d}", row.len()),
            ));
        }
    }
    let m = CMat::from_fn(d, d, |i, j| c(rows[i][j][0], rows[i][j][1]));
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::spec(path, "non-finite entry"));
    }
    Ok(m)
}

pub fn encode_real_matrix(m: &crate::linalg::RMat) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn decode_real_matrix(rows: &[Vec<f64>], path: &str) -> Result<crate::linalg::RMat> {
    let d = rows.len();
    if d == 0 {
        return Err(Error::spec(path, "empty matrix"));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != d {
            return Err(Error::spec(
                format!("{path}[{i}]"),
                format!("row has {} entries, expected {d}", row.len()),
            ));
        }
    }
    let m = crate::linalg::RMat::from_fn(d, d, |i, j| rows[i][j]);
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::spec(path, "non-finite entry"));
    }
    Ok(m)
}

/// Serde adapter writing a complex matrix as row-major `[re, im]` pairs.
pub mod serde_cmat {
    use super::{decode_matrix, encode_matrix};
    use crate::linalg::CMat;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
        encode_matrix(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        decode_matrix(&rows, "matrix").map_err(serde::de::Error::custom)
    }
}

/// Serde adapter writing a real matrix as rows.
pub mod serde_rmat {
    use super::{decode_real_matrix, encode_real_matrix};
    use crate::linalg::RMat;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &RMat, s: S) -> Result<S::Ok, S::Error> {
        encode_real_matrix(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<RMat, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        decode_real_matrix(&rows, "matrix").map_err(serde::de::Error::custom)
    }
}
