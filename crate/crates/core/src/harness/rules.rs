//! Deterministic per-input rules: the sign functions `ε`, `τ`, offsets `f`
//! and complement choices of the map zoo.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::linalg::{trace, CMat, RVec};

/// Inputs are rounded to this grid before hashing, so values that differ
/// only by roundoff (and `−0` versus `0`) hash alike.
pub const HASH_GRID: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Rule {
    Constant {
        value: f64,
    },
    /// Trace of a matrix input, sum of coordinates of a vector input.
    Trace,
    SeededHash {
        seed: u64,
    },
}

/// What a rule sees of its input: the trace and the canonical bytes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RuleInput {
    key: Vec<i64>,
    trace_bits: u64,
}

fn quantize(x: f64) -> i64 {
    (x / HASH_GRID).round() as i64
}

impl RuleInput {
    pub fn vector(v: &RVec) -> Self {
        RuleInput {
            key: v.iter().map(|&x| quantize(x)).collect(),
            trace_bits: v.sum().to_bits(),
        }
    }

    /// Row-major real and imaginary parts.
    pub fn matrix(m: &CMat) -> Self {
        let key = (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
            .flat_map(|(i, j)| [quantize(m[(i, j)].re), quantize(m[(i, j)].im)])
            .collect();
        RuleInput {
            key,
            trace_bits: trace(m).re.to_bits(),
        }
    }

    /// Order-independent input for an unordered pair (e.g. `{P, I − P}`).
    pub fn unordered(a: RuleInput, b: RuleInput) -> Self {
        a.min(b)
    }

    fn trace(&self) -> f64 {
        f64::from_bits(self.trace_bits)
    }

    fn hash(&self, seed: u64) -> u64 {
        let mut h = Sha256::new();
        for k in &self.key {
            h.update(k.to_le_bytes());
        }
        h.update(seed.to_le_bytes());
        let out = h.finalize();
        u64::from_le_bytes(out[..8].try_into().expect("digest has 32 bytes"))
    }
}

impl Rule {
    /// A sign in `{−1, +1}`; zero traces and non-negative constants give `+1`.
    pub fn sign(&self, input: &RuleInput) -> f64 {
        let positive = match *self {
            Rule::Constant { value } => value >= 0.0,
            Rule::Trace => input.trace() >= 0.0,
            Rule::SeededHash { seed } => input.hash(seed) & 1 == 0,
        };
        if positive {
            1.0
        } else {
            -1.0
        }
    }

    /// A real value; seeded hashes map uniformly onto `[−1, 1)`.
    pub fn value(&self, input: &RuleInput) -> f64 {
        match *self {
            Rule::Constant { value } => value,
            Rule::Trace => input.trace(),
            Rule::SeededHash { seed } => {
                (input.hash(seed) >> 11) as f64 / (1u64 << 52) as f64 - 1.0
            }
        }
    }

    /// Whether [`Rule::sign`] can be read off without rounding a constant.
    pub fn is_sign_rule(&self) -> bool {
        match *self {
            Rule::Constant { value } => value == 1.0 || value == -1.0,
            _ => true,
        }
    }

    /// Hash of arbitrary canonical input, exposed for noise generation.
    pub(crate) fn hash_input(input: &RuleInput, seed: u64) -> u64 {
        input.hash(seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn constant_and_trace_rules() {
        let v = RVec::from_vec(vec![1.0, -3.0]);
        let x = RuleInput::vector(&v);
        assert_eq!(Rule::Constant { value: -1.0 }.sign(&x), -1.0);
        assert_eq!(Rule::Constant { value: 5.0 }.value(&x), 5.0);
        assert_eq!(Rule::Trace.value(&x), -2.0);
        assert_eq!(Rule::Trace.sign(&x), -1.0);
    }

    #[test]
    fn seeded_hash_is_deterministic_and_mixed() {
        let rule = Rule::SeededHash { seed: 9 };
        let mut plus = 0;
        for i in 0..400 {
            let v = RVec::from_vec(vec![i as f64 * 0.37, 1.0]);
            let s = rule.sign(&RuleInput::vector(&v));
            assert_eq!(s, rule.sign(&RuleInput::vector(&v)));
            plus += (s > 0.0) as i32;
            let val = rule.value(&RuleInput::vector(&v));
            assert!((-1.0..1.0).contains(&val));
        }
        assert!((120..280).contains(&plus), "{plus}");
    }

    #[test]
    fn hash_ignores_negative_zero_and_roundoff() {
        let rule = Rule::SeededHash { seed: 1 };
        let a = RVec::from_vec(vec![0.0, 0.25]);
        let b = RVec::from_vec(vec![-0.0, 0.25 + 1e-17]);
        assert_eq!(
            rule.value(&RuleInput::vector(&a)),
            rule.value(&RuleInput::vector(&b))
        );
    }

    #[test]
    fn unordered_pairs_hash_alike() {
        let p = CMat::from_row_slice(2, 2, &[c(0.3, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.7, 0.0)]);
        let q = CMat::identity(2, 2) - &p;
        let one = RuleInput::unordered(RuleInput::matrix(&p), RuleInput::matrix(&q));
        let two = RuleInput::unordered(RuleInput::matrix(&q), RuleInput::matrix(&p));
        assert_eq!(one, two);
    }
}
