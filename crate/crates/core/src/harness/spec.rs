//! Map specifications (the zoo) and their evaluators.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::rules::{Rule, RuleInput};
use crate::error::{Error, Result};
use crate::linalg::{
    c, conjugate_by, conjugate_entrywise, eig_hermitian, outer, projection_defect, real_svd,
    unitarity_defect, CMat, Hermitian, RMat, RVec, MAX_DIM,
};
use crate::maps::{
    decode_matrix, decode_real_matrix, BlackBoxMap, MatrixMap, Point, Space, VectorMap,
};
use crate::random::{gaussian_hermitian, gaussian_rvec, haar_orthogonal, haar_unitary, sample_rng};

/// Table inputs match a query when every coordinate is this close.
pub const TABLE_MATCH_TOL: f64 = 1e-12;

/// Projection inputs with a larger defect are rejected.
const PROJECTION_INPUT_TOL: f64 = 1e-8;

const STREAM_NOISE: u64 = 0x4015E;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub space: Space,
    pub family: Family,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RealMatrixSource {
    Haar { haar_seed: u64 },
    Explicit(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum UnitarySource {
    Haar { haar_seed: u64 },
    Explicit(Vec<Vec<[f64; 2]>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptionKind {
    /// Multiplies the largest singular value of the linear part by `1 + magnitude`.
    ScaleSingularValue,
    /// Adds `magnitude·e₁` (vectors) or `magnitude·E₁₁` (matrices) to outputs.
    NonscalarOffset,
    /// Adds seeded Gaussian noise of size `magnitude` to outputs.
    Noise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub input: Point,
    pub output: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Family {
    /// `v ↦ sign_rule(v)·M v`.
    SignedLinear {
        matrix: RealMatrixSource,
        sign_rule: Rule,
    },
    /// `A ↦ tau_rule(A)·U A' U* + f_rule(A)·I`.
    ConjugationAffine {
        unitary: UnitarySource,
        #[serde(default)]
        antiunitary: bool,
        tau_rule: Rule,
        f_rule: Rule,
    },
    /// `P ↦ U P' U*` or `U (I − P') U*`, chosen per pair `{P, I − P}`.
    ProjectionMap {
        unitary: UnitarySource,
        #[serde(default)]
        antiunitary: bool,
        complement_choice_rule: Rule,
    },
    Table {
        entries: Vec<TableEntry>,
    },
    /// A conforming family with a documented perturbation.
    Corrupted {
        base: Box<Family>,
        kind: CorruptionKind,
        magnitude: f64,
        #[serde(default)]
        seed: u64,
    },
}

impl MapSpec {
    /// Parses a JSON document; errors carry the path of the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let spec: MapSpec = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::spec(
                if path == "." { "$".to_string() } else { path },
                e.into_inner().to_string(),
            )
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    /// SHA-256 of the canonical JSON form (sorted keys, no whitespace, numbers
    /// as parsed), so key order and formatting of the source do not matter.
    pub fn digest(&self) -> String {
        let value = serde_json::to_value(self).expect("spec serializes");
        hex::encode(Sha256::digest(value.to_string().as_bytes()))
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if !(2..=MAX_DIM).contains(&d) {
            return Err(Error::spec(
                "space.dim",
                format!("dimension {d} outside 2..={MAX_DIM}"),
            ));
        }
        validate_family(&self.family, self.space, "family")
    }

    pub fn make_map(&self) -> Result<BlackBoxMap> {
        self.validate()?;
        let d = self.dim();
        Ok(match self.space {
            Space::RealEuclidean { .. } => BlackBoxMap::Vector(vector_family(&self.family, d)?),
            Space::Hermitian { .. } => BlackBoxMap::Matrix(matrix_family(&self.family, d)?),
        })
    }
}

fn require_space(space: Space, want_vector: bool, path: &str, family: &str) -> Result<()> {
    let is_vector = matches!(space, Space::RealEuclidean { .. });
    if is_vector != want_vector {
        let expected = if want_vector {
            "real_euclidean"
        } else {
            "hermitian"
        };
        return Err(Error::spec(
            path,
            format!("{family} needs a {expected} space"),
        ));
    }
    Ok(())
}

fn require_sign_rule(rule: &Rule, path: &str) -> Result<()> {
    if !rule.is_sign_rule() {
        return Err(Error::spec(path, "sign rules must output only -1 or +1"));
    }
    Ok(())
}

fn real_matrix(src: &RealMatrixSource, d: usize, path: &str) -> Result<RMat> {
    let m = match src {
        RealMatrixSource::Haar { haar_seed } => haar_orthogonal(d, *haar_seed)?,
        RealMatrixSource::Explicit(rows) => decode_real_matrix(rows, path)?,
    };
    if m.nrows() != d {
        return Err(Error::spec(
            path,
            format!("expected a {d}x{d} matrix, got {0}x{0}", m.nrows()),
        ));
    }
    Ok(m)
}

fn unitary_matrix(src: &UnitarySource, d: usize, path: &str) -> Result<CMat> {
    let u = match src {
        UnitarySource::Haar { haar_seed } => haar_unitary(d, *haar_seed)?,
        UnitarySource::Explicit(rows) => decode_matrix(rows, path)?,
    };
    if u.nrows() != d {
        return Err(Error::spec(
            path,
            format!("expected a {d}x{d} matrix, got {0}x{0}", u.nrows()),
        ));
    }
    let defect = unitarity_defect(&u);
    if !(defect <= 1e-10) {
        return Err(Error::spec(
            path,
            format!("not unitary: |U*U − I|_F = {defect:e}"),
        ));
    }
    Ok(u)
}

fn check_point(p: &Point, space: Space, path: &str) -> Result<()> {
    let d = space.dim();
    match space {
        Space::RealEuclidean { .. } => {
            let v = p
                .to_vector()
                .map_err(|_| Error::spec(path, "expected a vector"))?;
            if v.len() != d || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::spec(
                    path,
                    format!("expected {d} finite coordinates"),
                ));
            }
        }
        Space::Hermitian { .. } => {
            let m = match p {
                Point::Matrix(rows) => decode_matrix(rows, path)?,
                Point::Vector(_) => return Err(Error::spec(path, "expected a matrix")),
            };
            if m.nrows() != d {
                return Err(Error::spec(path, format!("expected a {d}x{d} matrix")));
            }
            Hermitian::new(m).map_err(|e| Error::spec(path, e.to_string()))?;
        }
    }
    Ok(())
}

fn validate_family(family: &Family, space: Space, path: &str) -> Result<()> {
    let d = space.dim();
    match family {
        Family::SignedLinear { matrix, sign_rule } => {
            require_space(space, true, path, "signed_linear")?;
            real_matrix(matrix, d, &format!("{path}.matrix"))?;
            require_sign_rule(sign_rule, &format!("{path}.sign_rule"))
        }
        Family::ConjugationAffine {
            unitary, tau_rule, ..
        } => {
            require_space(space, false, path, "conjugation_affine")?;
            unitary_matrix(unitary, d, &format!("{path}.unitary"))?;
            require_sign_rule(tau_rule, &format!("{path}.tau_rule"))
        }
        Family::ProjectionMap { unitary, .. } => {
            require_space(space, false, path, "projection_map")?;
            unitary_matrix(unitary, d, &format!("{path}.unitary"))?;
            Ok(())
        }
        Family::Table { entries } => {
            for (i, e) in entries.iter().enumerate() {
                check_point(&e.input, space, &format!("{path}.entries[{i}].input"))?;
                check_point(&e.output, space, &format!("{path}.entries[{i}].output"))?;
            }
            Ok(())
        }
        Family::Corrupted {
            base, magnitude, ..
        } => {
            if !(magnitude.is_finite() && *magnitude >= 0.0) {
                return Err(Error::spec(
                    format!("{path}.magnitude"),
                    "must be finite and >= 0",
                ));
            }
            if matches!(**base, Family::Table { .. } | Family::Corrupted { .. }) {
                return Err(Error::spec(
                    format!("{path}.base"),
                    "corruptions apply to signed_linear, conjugation_affine or projection_map",
                ));
            }
            validate_family(base, space, &format!("{path}.base"))
        }
    }
}

struct SignedLinearMap {
    matrix: RMat,
    rule: Rule,
}

impl VectorMap for SignedLinearMap {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }
    fn eval(&self, v: &RVec) -> Result<RVec> {
        check_len(v.len(), self.dim())?;
        Ok(&self.matrix * v * self.rule.sign(&RuleInput::vector(v)))
    }
}

struct ConjugationAffineMap {
    unitary: CMat,
    antiunitary: bool,
    tau: Rule,
    f: Rule,
}

impl MatrixMap for ConjugationAffineMap {
    fn dim(&self) -> usize {
        self.unitary.nrows()
    }
    fn eval(&self, a: &CMat) -> Result<CMat> {
        check_len(a.nrows(), self.dim())?;
        let a = Hermitian::new(a.clone())?;
        let input = RuleInput::matrix(&a);
        let a2 = if self.antiunitary {
            conjugate_entrywise(&a)
        } else {
            a.into_inner()
        };
        let d = self.dim();
        Ok(
            conjugate_by(&self.unitary, &a2) * c(self.tau.sign(&input), 0.0)
                + CMat::identity(d, d) * c(self.f.value(&input), 0.0),
        )
    }
}

struct ProjectionMapEval {
    /// Need not be unitary once corrupted; outputs are then re-projected.
    conj: CMat,
    antiunitary: bool,
    rule: Rule,
}

impl MatrixMap for ProjectionMapEval {
    fn dim(&self) -> usize {
        self.conj.nrows()
    }
    fn eval(&self, p: &CMat) -> Result<CMat> {
        check_len(p.nrows(), self.dim())?;
        let defect = projection_defect(p);
        if !(defect <= PROJECTION_INPUT_TOL) {
            return Err(Error::Structure(format!(
                "input is not a rank-one projection (defect {defect:e})"
            )));
        }
        let d = self.dim();
        let q = CMat::identity(d, d) - p;
        let pair = RuleInput::unordered(RuleInput::matrix(p), RuleInput::matrix(&q));
        let chosen = if self.rule.sign(&pair) > 0.0 {
            p.clone()
        } else {
            q
        };
        let chosen = if self.antiunitary {
            conjugate_entrywise(&chosen)
        } else {
            chosen
        };
        Ok(conjugate_by(&self.conj, &chosen))
    }
}

struct TableMap {
    dim: usize,
    entries: Vec<(Vec<f64>, Point)>,
}

fn flatten(p: &Point) -> Vec<f64> {
    match p {
        Point::Vector(xs) => xs.clone(),
        Point::Matrix(rows) => rows.iter().flatten().flat_map(|z| [z[0], z[1]]).collect(),
    }
}

impl TableMap {
    fn lookup(&self, query: &Point) -> Result<&Point> {
        let q = flatten(query);
        self.entries
            .iter()
            .find(|(k, _)| {
                k.len() == q.len()
                    && k.iter()
                        .zip(&q)
                        .all(|(a, b)| (a - b).abs() <= TABLE_MATCH_TOL)
            })
            .map(|(_, out)| out)
            .ok_or_else(|| Error::MissingSample(serde_json::to_string(query).unwrap_or_default()))
    }
}

impl VectorMap for TableMap {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, v: &RVec) -> Result<RVec> {
        self.lookup(&Point::from_vector(v))?.to_vector()
    }
}

impl MatrixMap for TableMap {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, a: &CMat) -> Result<CMat> {
        self.lookup(&Point::from_matrix(a))?.to_matrix()
    }
}

fn table(entries: &[TableEntry], dim: usize) -> TableMap {
    TableMap {
        dim,
        entries: entries
            .iter()
            .map(|e| (flatten(&e.input), e.output.clone()))
            .collect(),
    }
}

fn check_len(got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::Dimension(format!(
            "input of size {got}, map acts on size {want}"
        )));
    }
    Ok(())
}

/// `M + magnitude·σ₁ u₁ v₁ᵀ`: the largest singular value scaled by `1 + magnitude`.
fn scale_top_singular_value(m: &RMat, magnitude: f64) -> RMat {
    let s = real_svd(m);
    m + (s.u.column(0) * s.v.column(0).transpose()) * (magnitude * s.singular_values[0])
}

struct PerturbedVector {
    inner: Box<dyn VectorMap + Send>,
    kind: CorruptionKind,
    magnitude: f64,
    seed: u64,
}

impl VectorMap for PerturbedVector {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, v: &RVec) -> Result<RVec> {
        let mut out = self.inner.eval(v)?;
        match self.kind {
            CorruptionKind::NonscalarOffset => out[0] += self.magnitude,
            CorruptionKind::Noise => {
                let h = Rule::hash_input(&RuleInput::vector(v), self.seed);
                let mut rng = sample_rng(h, STREAM_NOISE, 0);
                out += gaussian_rvec(out.len(), &mut rng) * self.magnitude;
            }
            CorruptionKind::ScaleSingularValue => {}
        }
        Ok(out)
    }
}

struct PerturbedMatrix {
    inner: Box<dyn MatrixMap + Send>,
    kind: CorruptionKind,
    magnitude: f64,
    seed: u64,
    reproject: bool,
}

/// Rank-one projection onto the top eigenvector.
fn top_projection(m: CMat) -> Result<CMat> {
    let eig = eig_hermitian(&Hermitian::new(m)?);
    let last = eig.eigenvalues.len() - 1;
    Ok(outer(&eig.eigenvectors.column(last).into_owned()))
}

impl MatrixMap for PerturbedMatrix {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, a: &CMat) -> Result<CMat> {
        let mut out = self.inner.eval(a)?;
        match self.kind {
            CorruptionKind::NonscalarOffset => out[(0, 0)] += c(self.magnitude, 0.0),
            CorruptionKind::Noise => {
                let h = Rule::hash_input(&RuleInput::matrix(a), self.seed);
                let mut rng = sample_rng(h, STREAM_NOISE, 0);
                out += gaussian_hermitian(out.nrows(), &mut rng) * c(self.magnitude, 0.0);
            }
            CorruptionKind::ScaleSingularValue => {}
        }
        if self.reproject {
            out = top_projection(out)?;
        }
        Ok(out)
    }
}

fn vector_family(family: &Family, d: usize) -> Result<Box<dyn VectorMap + Send>> {
    Ok(match family {
        Family::SignedLinear { matrix, sign_rule } => Box::new(SignedLinearMap {
            matrix: real_matrix(matrix, d, "family.matrix")?,
            rule: *sign_rule,
        }),
        Family::Table { entries } => Box::new(table(entries, d)),
        Family::Corrupted {
            base,
            kind,
            magnitude,
            seed,
        } => match (&**base, kind) {
            (Family::SignedLinear { matrix, sign_rule }, CorruptionKind::ScaleSingularValue) => {
                let m = real_matrix(matrix, d, "family.base.matrix")?;
                Box::new(SignedLinearMap {
                    matrix: scale_top_singular_value(&m, *magnitude),
                    rule: *sign_rule,
                })
            }
            _ => Box::new(PerturbedVector {
                inner: vector_family(base, d)?,
                kind: *kind,
                magnitude: *magnitude,
                seed: *seed,
            }),
        },
        _ => {
            return Err(Error::spec(
                "family",
                "family does not act on real_euclidean space",
            ))
        }
    })
}

fn matrix_family(family: &Family, d: usize) -> Result<Box<dyn MatrixMap + Send>> {
    Ok(match family {
        Family::ConjugationAffine {
            unitary,
            antiunitary,
            tau_rule,
            f_rule,
        } => Box::new(ConjugationAffineMap {
            unitary: unitary_matrix(unitary, d, "family.unitary")?,
            antiunitary: *antiunitary,
            tau: *tau_rule,
            f: *f_rule,
        }),
        Family::ProjectionMap {
            unitary,
            antiunitary,
            complement_choice_rule,
        } => Box::new(ProjectionMapEval {
            conj: unitary_matrix(unitary, d, "family.unitary")?,
            antiunitary: *antiunitary,
            rule: *complement_choice_rule,
        }),
        Family::Table { entries } => Box::new(table(entries, d)),
        Family::Corrupted {
            base,
            kind,
            magnitude,
            seed,
        } => {
            let is_projection = matches!(**base, Family::ProjectionMap { .. });
            let inner: Box<dyn MatrixMap + Send> = match (&**base, kind) {
                (
                    Family::ConjugationAffine {
                        unitary,
                        antiunitary,
                        tau_rule,
                        f_rule,
                    },
                    CorruptionKind::ScaleSingularValue,
                ) => Box::new(ConjugationAffineMap {
                    unitary: stretch_first_column(
                        unitary_matrix(unitary, d, "family.base.unitary")?,
                        *magnitude,
                    ),
                    antiunitary: *antiunitary,
                    tau: *tau_rule,
                    f: *f_rule,
                }),
                (
                    Family::ProjectionMap {
                        unitary,
                        antiunitary,
                        complement_choice_rule,
                    },
                    CorruptionKind::ScaleSingularValue,
                ) => Box::new(ProjectionMapEval {
                    conj: stretch_first_column(
                        unitary_matrix(unitary, d, "family.base.unitary")?,
                        *magnitude,
                    ),
                    antiunitary: *antiunitary,
                    rule: *complement_choice_rule,
                }),
                _ => matrix_family(base, d)?,
            };
            Box::new(PerturbedMatrix {
                inner,
                kind: *kind,
                magnitude: *magnitude,
                seed: *seed,
                reproject: is_projection,
            })
        }
        _ => {
            return Err(Error::spec(
                "family",
                "family does not act on hermitian space",
            ))
        }
    })
}

/// `U (I + magnitude·E₁₁)`: one singular value of `U` becomes `1 + magnitude`.
fn stretch_first_column(mut u: CMat, magnitude: f64) -> CMat {
    u.column_mut(0).scale_mut(1.0 + magnitude);
    u
}

/// Evaluates `map` at `points`, producing entries for a table spec.
pub fn tabulate(map: &BlackBoxMap, points: &[Point]) -> Result<Vec<TableEntry>> {
    points
        .iter()
        .map(|p| {
            let output = match map {
                BlackBoxMap::Vector(m) => Point::from_vector(&m.eval(&p.to_vector()?)?),
                BlackBoxMap::Matrix(m) => Point::from_matrix(&m.eval(&p.to_matrix()?)?),
            };
            Ok(TableEntry {
                input: p.clone(),
                output,
            })
        })
        .collect()
}
