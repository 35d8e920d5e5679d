//! Linear decision losses and the best-response policy.
//!
//! A loss assigns each action `a` a vector `ℓ_a ∈ [0,1]^c` and charges
//! `⟨y, ℓ_a⟩`. The column count `c` normally equals the label dimension.
//! For scalar (binary-outcome) data a loss may instead carry two columns; it
//! is then evaluated on the outcome vector `[1 - p, p]`, which is how the
//! usual two-action threshold loss is written.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct LossFunction {
    name: String,
    actions: usize,
    cols: usize,
    matrix: Vec<f64>,
}

impl LossFunction {
    /// Builds a loss from `K` rows of equal length. Entries must lie in `[0,1]`.
    pub fn new(name: impl Into<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let name = name.into();
        if rows.len() < 2 {
            return Err(Error::input(format!(
                "loss `{name}` needs at least 2 actions, found {}",
                rows.len()
            )));
        }
        let cols = rows[0].len();
        if cols == 0 {
            return Err(Error::input(format!("loss `{name}` has empty rows")));
        }
        let mut matrix = Vec::with_capacity(rows.len() * cols);
        for (a, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Dimension {
                    expected: cols,
                    found: row.len(),
                });
            }
            for (j, &x) in row.iter().enumerate() {
                if !(x.is_finite() && (0.0..=1.0).contains(&x)) {
                    return Err(Error::input(format!(
                        "loss `{name}` entry ({a}, {j}) = {x} outside [0, 1]"
                    )));
                }
            }
            matrix.extend_from_slice(row);
        }
        Ok(LossFunction {
            name,
            actions: rows.len(),
            cols,
            matrix,
        })
    }

    /// The two-action threshold loss on binary outcomes: action 0 costs 1
    /// when the outcome is 1, action 1 costs 1 when the outcome is 0.
    /// Its best response is action 0 exactly when `p <= 1/2`.
    pub fn threshold() -> Self {
        LossFunction::new("threshold", &[vec![0.0, 1.0], vec![1.0, 0.0]])
            .expect("static loss is valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of actions `K`.
    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, action: usize) -> &[f64] {
        &self.matrix[action * self.cols..(action + 1) * self.cols]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.actions).map(|a| self.row(a).to_vec()).collect()
    }

    /// Whether this loss can score vectors of dimension `dim`.
    pub fn supports_dim(&self, dim: usize) -> bool {
        self.cols == dim || (dim == 1 && self.cols == 2)
    }

    /// `ℓ(v, a)`: the loss of `action` when the outcome (or prediction) is `v`.
    #[inline]
    pub fn value(&self, action: usize, v: &[f64]) -> f64 {
        let row = self.row(action);
        if v.len() == self.cols {
            row.iter().zip(v).map(|(l, x)| l * x).sum()
        } else {
            debug_assert!(v.len() == 1 && self.cols == 2);
            (1.0 - v[0]) * row[0] + v[0] * row[1]
        }
    }

    /// `argmin_a ℓ(p, a)`, ties going to the smallest action index.
    #[inline]
    pub fn best_response(&self, p: &[f64]) -> usize {
        let mut best = 0;
        let mut best_value = self.value(0, p);
        for a in 1..self.actions {
            let v = self.value(a, p);
            if v < best_value {
                best = a;
                best_value = v;
            }
        }
        best
    }

    /// `min_a ℓ(y, a)`: loss of acting on the outcome itself.
    pub fn oracle_value(&self, y: &[f64]) -> f64 {
        (0..self.actions)
            .map(|a| self.value(a, y))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Affinely rescales a raw loss matrix into `[0,1]`.
///
/// One shift and one positive scale are applied to every entry, so for any
/// fixed outcome the ordering of actions is unchanged. A constant matrix maps
/// to all zeros.
pub fn rescale_loss(name: impl Into<String>, raw: &[Vec<f64>]) -> Result<LossFunction> {
    let name = name.into();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (a, row) in raw.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::input(format!(
                    "loss `{name}` entry ({a}, {j}) is not finite"
                )));
            }
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    let span = hi - lo;
    let rows: Vec<Vec<f64>> = raw
        .iter()
        .map(|row| {
            row.iter()
                .map(|&x| {
                    if span > 0.0 {
                        ((x - lo) / span).clamp(0.0, 1.0)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    LossFunction::new(name, &rows)
}

/// A finite family of losses sharing action count and column count.
#[derive(Clone, Debug, PartialEq)]
pub struct LossFamily {
    losses: Vec<LossFunction>,
}

impl LossFamily {
    pub fn new(losses: Vec<LossFunction>) -> Result<Self> {
        let first = losses
            .first()
            .ok_or_else(|| Error::input("loss family is empty"))?;
        let (k, c) = (first.actions, first.cols);
        for l in &losses {
            if l.actions != k {
                return Err(Error::input(format!(
                    "loss `{}` has {} actions, family uses {k}",
                    l.name, l.actions
                )));
            }
            if l.cols != c {
                return Err(Error::Dimension {
                    expected: c,
                    found: l.cols,
                });
            }
        }
        Ok(LossFamily { losses })
    }

    pub fn single(loss: LossFunction) -> Self {
        LossFamily { losses: vec![loss] }
    }

    pub fn len(&self) -> usize {
        self.losses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.losses.is_empty()
    }

    /// Shared action count `K`.
    pub fn actions(&self) -> usize {
        self.losses[0].actions
    }

    pub fn cols(&self) -> usize {
        self.losses[0].cols
    }

    pub fn get(&self, index: usize) -> Result<&LossFunction> {
        self.losses
            .get(index)
            .ok_or_else(|| Error::config(format!("loss index {index} out of range")))
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LossFunction> {
        self.losses.iter()
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.losses[0].supports_dim(dim) {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: dim,
                found: self.cols(),
            })
        }
    }

    /// SHA-256 over the canonical JSON rendering of the family.
    pub fn digest(&self) -> String {
        #[derive(Serialize)]
        struct Entry<'a> {
            matrix: Vec<Vec<f64>>,
            name: &'a str,
        }
        #[derive(Serialize)]
        struct Canon<'a> {
            d: usize,
            k: usize,
            losses: Vec<Entry<'a>>,
        }
        let canon = Canon {
            d: self.cols(),
            k: self.actions(),
            losses: self
                .losses
                .iter()
                .map(|l| Entry {
                    matrix: l.rows(),
                    name: &l.name,
                })
                .collect(),
        };
        let text = serde_json::to_string(&canon).expect("plain data serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

impl<'a> IntoIterator for &'a LossFamily {
    type Item = &'a LossFunction;
    type IntoIter = std::slice::Iter<'a, LossFunction>;

    fn into_iter(self) -> Self::IntoIter {
        self.losses.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn best_response_examples() {
        let l = LossFunction::new("swap", &[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(l.best_response(&[0.3, 0.7]), 1);
        assert_eq!(l.best_response(&[0.5, 0.5]), 0);

        let t = LossFunction::threshold();
        assert_eq!(t.best_response(&[0.4]), 0);
        assert_eq!(t.best_response(&[0.6]), 1);
        assert_eq!(t.best_response(&[0.5]), 0);
        assert_eq!(t.value(0, &[1.0]), 1.0);
        assert_eq!(t.value(1, &[0.0]), 1.0);
    }

    #[test]
    fn rescale_identity_and_constant() {
        let raw = vec![vec![0.0, 0.25], vec![1.0, 0.5]];
        let l = rescale_loss("id", &raw).unwrap();
        assert_eq!(l.rows(), raw);

        let c = rescale_loss("const", &[vec![3.0, 3.0], vec![3.0, 3.0]]).unwrap();
        assert!(c.rows().iter().flatten().all(|&x| x == 0.0));

        assert!(rescale_loss("nan", &[vec![f64::NAN], vec![0.0]]).is_err());
    }

    #[test]
    fn rescale_preserves_best_response() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let k = rng.gen_range(2..5);
            let d = rng.gen_range(1..5);
            let raw: Vec<Vec<f64>> = (0..k)
                .map(|_| (0..d).map(|_| rng.sample(StandardNormal)).collect())
                .collect();
            let p: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
            let scaled = rescale_loss("r", &raw).unwrap();
            assert!(scaled.rows().iter().flatten().all(|x| (0.0..=1.0).contains(x)));
            // argmin over the raw matrix, computed directly
            let raw_best = (0..k)
                .map(|a| raw[a].iter().zip(&p).map(|(l, x)| l * x).sum::<f64>())
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (a, v)| if v < acc.1 { (a, v) } else { acc })
                .0;
            let scaled_values: Vec<f64> = (0..k).map(|a| scaled.value(a, &p)).collect();
            let raw_values: Vec<f64> = (0..k)
                .map(|a| raw[a].iter().zip(&p).map(|(l, x)| l * x).sum::<f64>())
                .collect();
            // Near-ties can flip under floating point; only compare clear winners.
            let mut sorted = raw_values.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if sorted[1] - sorted[0] > 1e-9 {
                assert_eq!(scaled.best_response(&p), raw_best, "{scaled_values:?}");
            }
        }
    }

    #[test]
    fn family_checks_shapes() {
        let a = LossFunction::threshold();
        let b = LossFunction::new("three", &[vec![0.0, 1.0], vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        assert!(LossFamily::new(vec![a.clone(), b]).is_err());
        assert!(LossFamily::new(vec![]).is_err());
        let fam = LossFamily::single(a);
        assert!(fam.check_dim(1).is_ok());
        assert!(fam.check_dim(2).is_ok());
        assert!(fam.check_dim(3).is_err());
        assert_eq!(fam.digest().len(), 64);
    }
}
