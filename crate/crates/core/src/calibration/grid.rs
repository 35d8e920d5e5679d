//! Rounding onto the lattice `[1/m]^d` and the textual form of patch vectors.

use std::fmt;

use crate::error::{Error, Result};

/// Numerator of the grid point nearest to `v`; midpoints go up.
pub fn grid_numerator(v: f64, m: u64) -> i64 {
    (v * m as f64 + 0.5).floor() as i64
}

/// Coordinate-wise nearest point of `[1/m]^d`. `m == 0` returns `v` unchanged.
pub fn round_to_grid(v: &[f64], m: u64) -> Vec<f64> {
    if m == 0 {
        return v.to_vec();
    }
    v.iter()
        .map(|&x| grid_numerator(x, m) as f64 / m as f64)
        .collect()
}

/// A patch vector together with the exact text it is stored as.
///
/// Grid patches are written as unreduced `k/m`. Exact patches are written as
/// a decimal fraction when that parses back to the same double, otherwise as
/// the shortest round-trip decimal.
#[derive(Clone, Debug, PartialEq)]
pub struct Phi {
    values: Vec<f64>,
    text: Vec<String>,
}

impl Phi {
    pub fn exact(values: Vec<f64>) -> Phi {
        let text = values.iter().map(|&x| render_real(x)).collect();
        Phi { values, text }
    }

    /// Rounds `raw` onto `[1/m]^d`; `m == 0` keeps it exact.
    pub fn rounded(raw: &[f64], m: u64) -> Phi {
        if m == 0 {
            return Phi::exact(raw.to_vec());
        }
        let mut values = Vec::with_capacity(raw.len());
        let mut text = Vec::with_capacity(raw.len());
        for &x in raw {
            let k = grid_numerator(x, m);
            values.push(k as f64 / m as f64);
            text.push(format!("{k}/{m}"));
        }
        Phi { values, text }
    }

    pub fn parse<S: AsRef<str>>(items: &[S]) -> Result<Phi> {
        let mut values = Vec::with_capacity(items.len());
        let mut text = Vec::with_capacity(items.len());
        for s in items {
            let s = s.as_ref();
            values.push(parse_real(s)?);
            text.push(s.to_string());
        }
        Ok(Phi { values, text })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn text(&self) -> &[String] {
        &self.text
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&x| x == 0.0)
    }

    /// The shared denominator when every coordinate is written as `k/m`.
    pub fn grid_resolution(&self) -> Option<u64> {
        let mut found = None;
        for t in &self.text {
            let (_, den) = t.split_once('/')?;
            let den: u64 = den.parse().ok()?;
            match found {
                None => found = Some(den),
                Some(m) if m == den => {}
                Some(_) => return None,
            }
        }
        found
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

impl fmt::Display for Phi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.text.join(", "))
    }
}

/// Parses `p/q` or a plain decimal.
pub fn parse_real(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::input(format!("cannot parse `{s}` as a number"));
    let value = match s.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let q: u64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(bad());
            }
            p as f64 / q as f64
        }
        None => s.parse::<f64>().map_err(|_| bad())?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

/// Writes `x` as `p/10^k` when that fraction parses back to `x` exactly.
pub fn render_real(x: f64) -> String {
    let plain = x.to_string();
    if let Some(frac) = decimal_fraction(&plain) {
        let candidate = format!("{}/{}", frac.0, frac.1);
        if parse_real(&candidate).ok() == Some(x) {
            return candidate;
        }
    }
    plain
}

/// `"-0.25"` → `(-25, 100)`. Integers get denominator 1.
pub(crate) fn decimal_fraction(s: &str) -> Option<(i64, u64)> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() || !int.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let num: i64 = digits.trim_start_matches('0').parse().unwrap_or(0);
    let den = 10u64.checked_pow(frac.len() as u32)?;
    // 10^22 is the largest power of ten a double holds exactly
    if den > 10u64.pow(19) || num.unsigned_abs() > (1u64 << 53) {
        return None;
    }
    Some((if neg { -num } else { num }, den))
}
