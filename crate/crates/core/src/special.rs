//! Special functions used by the noise models.
//!
//! Modified Bessel functions `I_n(k)` of integer order are evaluated from the
//! power series for `k ≤ 15` and from the Hankel asymptotic expansion of the
//! exponentially scaled function `e^{-k} I_n(k)` above that. The two branches
//! agree to better than 1e-12 at the seam.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Power series below this argument, scaled asymptotic expansion above.
const SERIES_LIMIT: f64 = 15.0;

/// Continued fraction for `I1/I0` below this argument.
const RATIO_CF_LIMIT: f64 = 50.0;

/// Series for `coth` below this argument.
const COTH_SERIES_LIMIT: f64 = 1e-4;

/// Concentration parameter of a von Mises or von Mises–Fisher law.
///
/// `k = 0` is the uniform law. The noiseless limit `k → ∞` is a separate state
/// rather than `f64::INFINITY`, so that code can branch on it exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Concentration(Repr);

#[derive(Clone, Copy, Debug, PartialEq)]
enum Repr {
    Finite(f64),
    Infinite,
}

impl Concentration {
    /// Noiseless limit.
    pub const INFINITE: Concentration = Concentration(Repr::Infinite);
    /// Uniform distribution.
    pub const ZERO: Concentration = Concentration(Repr::Finite(0.0));

    /// A finite concentration. `f64::INFINITY` maps to the sentinel.
    pub fn new(k: f64) -> Result<Self> {
        if k.is_nan() || k < 0.0 {
            return Err(Error::domain(
                "concentration",
                format!("must be non-negative, got {k}"),
            ));
        }
        if k.is_infinite() {
            return Ok(Self::INFINITE);
        }
        Ok(Concentration(Repr::Finite(k)))
    }

    /// The finite value, or `None` for the noiseless sentinel.
    pub fn value(self) -> Option<f64> {
        match self.0 {
            Repr::Finite(k) => Some(k),
            Repr::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self.0, Repr::Infinite)
    }

    pub fn is_zero(self) -> bool {
        self.0 == Repr::Finite(0.0)
    }

    /// The value as an `f64`, with the sentinel mapped to `f64::INFINITY`.
    pub fn as_f64(self) -> f64 {
        self.value().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for Concentration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Repr::Finite(k) => write!(f, "{k}"),
            Repr::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Concentration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if matches!(s.to_ascii_lowercase().as_str(), "inf" | "infinity" | "+inf") {
            return Ok(Self::INFINITE);
        }
        let k: f64 = s
            .parse()
            .map_err(|_| Error::domain("concentration", format!("cannot parse {s:?}")))?;
        Self::new(k)
    }
}

fn check_argument(k: f64) -> Result<()> {
    if k.is_nan() || k < 0.0 {
        return Err(Error::domain(
            "bessel argument",
            format!("must be non-negative, got {k}"),
        ));
    }
    Ok(())
}

fn series(order: u32, k: f64) -> f64 {
    let half = 0.5 * k;
    let mut term = 1.0;
    for j in 1..=order {
        term *= half / j as f64;
    }
    if term == 0.0 {
        return 0.0;
    }
    let quarter_sq = half * half;
    let mut sum = term;
    let mut m = 1.0;
    loop {
        term *= quarter_sq / (m * (m + order as f64));
        sum += term;
        if term <= f64::EPSILON * 0.25 * sum {
            return sum;
        }
        m += 1.0;
    }
}

/// Hankel expansion of `e^{-k} I_n(k)`, truncated at the smallest term.
fn scaled_asymptotic(order: u32, k: f64) -> f64 {
    let mu = 4.0 * (order as f64) * (order as f64);
    let mut term = 1.0_f64;
    let mut sum = 1.0;
    let mut j = 1.0;
    loop {
        let odd = 2.0 * j - 1.0;
        let next = -term * (mu - odd * odd) / (j * 8.0 * k);
        if next.abs() > term.abs() && j > order as f64 {
            break;
        }
        sum += next;
        if next.abs() <= f64::EPSILON * 0.25 * sum.abs() {
            break;
        }
        term = next;
        j += 1.0;
    }
    sum / (2.0 * std::f64::consts::PI * k).sqrt()
}

/// Modified Bessel function of the first kind, `I_order(k)`.
///
/// Overflows to `+∞` for `k` beyond roughly 700; use [`bessel_i_scaled`] there.
pub fn bessel_i(order: u32, k: f64) -> Result<f64> {
    check_argument(k)?;
    if k <= SERIES_LIMIT {
        Ok(series(order, k))
    } else {
        Ok(scaled_asymptotic(order, k) * k.exp())
    }
}

/// Exponentially scaled Bessel function `e^{-k} I_order(k)`.
pub fn bessel_i_scaled(order: u32, k: f64) -> Result<f64> {
    check_argument(k)?;
    if k <= SERIES_LIMIT {
        Ok(series(order, k) * (-k).exp())
    } else {
        Ok(scaled_asymptotic(order, k))
    }
}

/// `I1(k)/I0(k)` by the Gauss continued fraction, evaluated with Lentz's method.
fn ratio_continued_fraction(k: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = TINY;
    let mut c = f;
    let mut d = 0.0;
    let mut j = 1.0;
    loop {
        let b = 2.0 * j / k;
        d = b + d;
        if d == 0.0 {
            d = TINY;
        }
        c = b + 1.0 / c;
        if c == 0.0 {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 || j > 10_000.0 {
            return f;
        }
        j += 1.0;
    }
}

/// The dephasing contraction `F_k = I1(k)/I0(k)`.
///
/// Exactly 0 at `k = 0` and exactly 1 for the noiseless sentinel.
pub fn bessel_ratio(k: Concentration) -> f64 {
    match k.value() {
        None => 1.0,
        Some(k) if k == 0.0 => 0.0,
        Some(k) if k <= RATIO_CF_LIMIT => ratio_continued_fraction(k),
        Some(k) => scaled_asymptotic(1, k) / scaled_asymptotic(0, k),
    }
}

/// Hyperbolic cotangent for `k > 0`.
pub fn coth(k: f64) -> Result<f64> {
    if k.is_nan() || k <= 0.0 {
        return Err(Error::domain("coth", format!("argument must be positive, got {k}")));
    }
    if k < COTH_SERIES_LIMIT {
        let k2 = k * k;
        return Ok(1.0 / k + k * (1.0 / 3.0 - k2 / 45.0));
    }
    Ok(1.0 / k.tanh())
}
