//! Instance generators: the two closed-form counterexamples, seeded random
//! instances and seeded calibration/test splits.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::calibration::grid::decimal_fraction;
use crate::dataset::{EmpiricalDataset, Unit};
use crate::error::{Error, Result};
use crate::loss::{rescale_loss, LossFamily, LossFunction};

/// Name of the generator behind every seeded draw.
pub const RNG_NAME: &str = "ChaCha8";

/// Exact rational for a decimal input, so that quantities like `½ − 3φ/2`
/// come out as the double nearest the true value rather than accumulating
/// rounding at every operation.
#[derive(Clone, Copy, Debug)]
struct Ratio {
    num: i128,
    den: i128,
}

impl Ratio {
    fn of(x: f64) -> Option<Ratio> {
        let (num, den) = decimal_fraction(&x.to_string())?;
        Some(Ratio { num: num as i128, den: den as i128 })
    }

    fn int(n: i128) -> Ratio {
        Ratio { num: n, den: 1 }
    }

    fn add(self, o: Ratio) -> Ratio {
        Ratio { num: self.num * o.den + o.num * self.den, den: self.den * o.den }.reduced()
    }

    fn sub(self, o: Ratio) -> Ratio {
        self.add(Ratio { num: -o.num, den: o.den })
    }

    fn mul(self, o: Ratio) -> Ratio {
        Ratio { num: self.num * o.num, den: self.den * o.den }.reduced()
    }

    fn reduced(self) -> Ratio {
        fn gcd(a: i128, b: i128) -> i128 {
            if b == 0 { a.abs() } else { gcd(b, a % b) }
        }
        let g = gcd(self.num, self.den).max(1);
        Ratio { num: self.num / g, den: self.den / g }
    }

    /// Correctly rounded when both parts fit in 53 bits.
    fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// Evaluates `f` exactly when every input is a short decimal, otherwise in
/// plain floating point.
fn rational_or_float(inputs: &[f64], f: impl Fn(&[Ratio]) -> Ratio, fallback: impl Fn(&[f64]) -> f64) -> f64 {
    let ratios: Option<Vec<Ratio>> = inputs.iter().map(|&x| Ratio::of(x)).collect();
    match ratios {
        Some(r) => {
            let out = f(&r);
            if out.num.unsigned_abs() < 1 << 53 && out.den.unsigned_abs() < 1 << 53 {
                out.to_f64()
            } else {
                fallback(inputs)
            }
        }
        None => fallback(inputs),
    }
}

fn half() -> Ratio {
    Ratio { num: 1, den: 2 }
}

/// Two units where patching on prediction disagreement raises the decision loss.
///
/// Weights ½ each, labels `[0, 1]`, `f₁ = [½ − φ/2, ½ − 3φ/2]`,
/// `f₂ = [½ + φ/2, ½ − φ/2]`, threshold loss. The Brier scores differ by `φ²`.
pub fn gen_reconcile_counterexample(phi: f64) -> Result<(EmpiricalDataset, LossFamily)> {
    if !(phi > 0.0 && phi < 1.0 / 3.0) {
        return Err(Error::input(format!("phi must lie in (0, 1/3), got {phi}")));
    }
    // ½ + c·φ for a rational coefficient c
    let at = |c_num: i128, c_den: i128| {
        rational_or_float(
            &[phi],
            |r| half().add(Ratio { num: c_num, den: c_den }.mul(r[0])),
            |x| 0.5 + c_num as f64 / c_den as f64 * x[0],
        )
    };
    let units = vec![
        Unit::new(1, 0.5, vec![0.0], vec![at(-1, 2)], vec![at(1, 2)]),
        Unit::new(2, 0.5, vec![1.0], vec![at(-3, 2)], vec![at(-1, 2)]),
    ];
    Ok((EmpiricalDataset::new(1, units)?, LossFamily::single(LossFunction::threshold())))
}

/// How fractional true probabilities become labels.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelRealization {
    /// The label is the probability itself. Masses stay exact.
    #[default]
    Fractional,
    /// Each unit splits into a label-1 and a label-0 sub-unit weighted by
    /// the probability. Sub-unit ids are `2·id` and `2·id + 1`.
    Bernoulli,
}

/// Four units on which two predictors are each exactly decision-calibrated
/// for the threshold loss, yet disagree on actions on mass `2η`.
///
/// Weights `[½−η, η, η, ½−η]`; true probabilities `[β/2, 1−β/2, 1−β/2, 1−β/2]`;
/// low prediction `β/2 − 2ηβ + 2η`, high prediction `1 − β/2`, with `f₁` low
/// on units 1, 2 and `f₂` low on units 1, 3.
pub fn gen_decal_counterexample(
    eta: f64,
    beta: f64,
    realization: LabelRealization,
) -> Result<(EmpiricalDataset, LossFamily)> {
    if !(eta > 0.0 && eta < 0.25) {
        return Err(Error::input(format!("eta must lie in (0, 1/4), got {eta}")));
    }
    if !(beta > 0.0 && beta < 0.5) {
        return Err(Error::input(format!("beta must lie in (0, 1/2), got {beta}")));
    }
    let low = rational_or_float(
        &[eta, beta],
        |r| {
            let (e, b) = (r[0], r[1]);
            b.mul(half()).sub(Ratio::int(2).mul(e).mul(b)).add(Ratio::int(2).mul(e))
        },
        |x| x[1] / 2.0 - 2.0 * x[0] * x[1] + 2.0 * x[0],
    );
    let high = rational_or_float(&[beta], |r| Ratio::int(1).sub(r[0].mul(half())), |x| 1.0 - x[0] / 2.0);
    let truth_low = rational_or_float(&[beta], |r| r[0].mul(half()), |x| x[0] / 2.0);
    let outer = rational_or_float(&[eta], |r| half().sub(r[0]), |x| 0.5 - x[0]);

    let weights = [outer, eta, eta, outer];
    let truth = [truth_low, high, high, high];
    let f1 = [low, low, high, high];
    let f2 = [low, high, low, high];
    let mut units = Vec::new();
    for i in 0..4 {
        let id = i as u64 + 1;
        match realization {
            LabelRealization::Fractional => {
                units.push(Unit::new(id, weights[i], vec![truth[i]], vec![f1[i]], vec![f2[i]]));
            }
            LabelRealization::Bernoulli => {
                let w1 = weights[i] * truth[i];
                units.push(Unit::new(2 * id, w1, vec![1.0], vec![f1[i]], vec![f2[i]]));
                units.push(Unit::new(2 * id + 1, weights[i] - w1, vec![0.0], vec![f1[i]], vec![f2[i]]));
            }
        }
    }
    Ok((EmpiricalDataset::new(1, units)?, LossFamily::single(LossFunction::threshold())))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomInstanceSpec {
    pub n: usize,
    pub d: usize,
    /// Actions per loss.
    pub k: usize,
    pub loss_count: usize,
    /// Standard deviation of the Gaussian noise added to the labels.
    pub noise: f64,
    pub seed: u64,
}

/// Seeded random instance with uniform weights.
///
/// Labels are one-hot over `d` classes (for `d = 1`, a fair coin). Each
/// predictor is the label plus independent `N(0, noise²)` noise, clipped to
/// `[0,1]`. Loss entries are standard normal, with action `a < min(k, d)`
/// made strictly cheapest on outcome `a`, and then rescaled; for `d = 1`
/// the losses carry two columns and act on `[1 − p, p]`.
pub fn gen_random_instance(spec: &RandomInstanceSpec) -> Result<(EmpiricalDataset, LossFamily)> {
    let RandomInstanceSpec { n, d, k, loss_count, noise, seed } = *spec;
    if n == 0 || d == 0 || k < 2 || loss_count == 0 {
        return Err(Error::input("random instance needs n, d, loss_count ≥ 1 and k ≥ 2"));
    }
    if !(noise.is_finite() && noise >= 0.0) {
        return Err(Error::input(format!("noise must be non-negative, got {noise}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut units = Vec::with_capacity(n);
    for id in 0..n as u64 {
        let label: Vec<f64> = if d == 1 {
            vec![if rng.gen::<bool>() { 1.0 } else { 0.0 }]
        } else {
            let class = rng.gen_range(0..d);
            (0..d).map(|j| if j == class { 1.0 } else { 0.0 }).collect()
        };
        let mut noisy = || -> Vec<f64> {
            label
                .iter()
                .map(|&y| {
                    let z: f64 = rng.sample(StandardNormal);
                    (y + noise * z).clamp(0.0, 1.0)
                })
                .collect()
        };
        let f1 = noisy();
        let f2 = noisy();
        units.push(Unit::new(id, 0.0, label, f1, f2));
    }
    let cols = if d == 1 { 2 } else { d };
    let mut losses = Vec::with_capacity(loss_count);
    for li in 0..loss_count {
        let mut raw: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..cols).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        // each action is strictly cheapest on its favoured outcome, so none is
        // dominated outright
        for a in 0..k.min(cols) {
            let floor = raw.iter().map(|r| r[a]).fold(f64::INFINITY, f64::min);
            raw[a][a] = floor - 0.5;
        }
        losses.push(rescale_loss(format!("random_{li}"), &raw)?);
    }
    Ok((EmpiricalDataset::uniform(d, units)?, LossFamily::new(losses)?))
}

/// Seeded split into `(calibration, test)` rows; `test_fraction` of the units,
/// rounded down but at least one, go to the test side.
pub fn split_rows(n: usize, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) || n < 2 {
        return Err(Error::input("split needs n ≥ 2 and a test fraction in (0, 1)"));
    }
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_test = ((n as f64 * test_fraction) as usize).clamp(1, n - 1);
    let mut test = rows.split_off(n - n_test);
    rows.sort_unstable();
    test.sort_unstable();
    Ok((rows, test))
}

/// Splits a dataset into renormalized calibration and test halves.
pub fn split_dataset(data: &EmpiricalDataset, test_fraction: f64, seed: u64) -> Result<(EmpiricalDataset, EmpiricalDataset)> {
    let (cal, test) = split_rows(data.len(), test_fraction, seed)?;
    Ok((data.subset(&cal)?, data.subset(&test)?))
}
