use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational used for `eps`, `R` and `L`.
pub type Rational = num_rational::Ratio<i64>;

/// Largest supported scale. Keeps every squared lattice norm well inside `i64`.
pub const MAX_K: u32 = 14;

/// Scale and domain parameters of one lattice space.
///
/// The domain is `E_0 = {eps < |x| < R} ∪ {a*} ∪ (0, L)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeParams {
    pub k: u32,
    #[serde(with = "ratio_str")]
    pub eps: Rational,
    #[serde(with = "ratio_str")]
    pub radius: Rational,
    #[serde(with = "ratio_str")]
    pub rod_length: Rational,
}

impl LatticeParams {
    /// Validates the standing assumptions: `2^-k < eps/4`, `R - eps > 16 eps`, `L > 16 eps`.
    pub fn new(k: u32, eps: Rational, radius: Rational, rod_length: Rational) -> Result<Self> {
        let p = Self { k, eps, radius, rod_length };
        p.validate()?;
        Ok(p)
    }

    /// The default domain `eps = 1, R = 20, L = 20` at scale `k`.
    pub fn standard(k: u32) -> Result<Self> {
        Self::new(k, Rational::from_integer(1), Rational::from_integer(20), Rational::from_integer(20))
    }

    pub fn validate(&self) -> Result<()> {
        if self.k > MAX_K {
            return Err(Error::Parameter(format!("k = {} exceeds the supported maximum {}", self.k, MAX_K)));
        }
        if self.eps <= Rational::from_integer(0) {
            return Err(Error::Parameter("eps must be positive".into()));
        }
        if *self.eps.denom() > 1 << 20 || *self.eps.numer() > 1 << 20 {
            return Err(Error::Parameter("eps numerator/denominator too large for exact tests".into()));
        }
        // 2^-k < eps/4  <=>  4 q < p 2^k
        let (p, q) = (*self.eps.numer() as i128, *self.eps.denom() as i128);
        if 4 * q >= p << self.k {
            return Err(Error::Parameter(format!(
                "mesh too coarse: 2^-{} < eps/4 fails for eps = {}",
                self.k, self.eps
            )));
        }
        let sixteen = Rational::from_integer(16);
        if self.radius - self.eps <= sixteen * self.eps {
            return Err(Error::Parameter(format!(
                "planar domain too small: R - eps > 16 eps fails for R = {}, eps = {}",
                self.radius, self.eps
            )));
        }
        if self.rod_length <= sixteen * self.eps {
            return Err(Error::Parameter(format!(
                "rod domain too small: L > 16 eps fails for L = {}, eps = {}",
                self.rod_length, self.eps
            )));
        }
        for (name, r) in [("R", self.radius), ("L", self.rod_length)] {
            if *r.numer() > 1 << 24 || *r.denom() > 1 << 20 {
                return Err(Error::Parameter(format!("{name} = {r} too large for exact tests")));
            }
        }
        Ok(())
    }

    pub fn with_k(&self, k: u32) -> Result<Self> {
        Self::new(k, self.eps, self.radius, self.rod_length)
    }

    /// Mesh `h = 2^-k`.
    pub fn h(&self) -> f64 {
        (-(self.k as f64)).exp2()
    }

    /// `2^k` as an integer.
    pub fn scale(&self) -> i64 {
        1i64 << self.k
    }

    /// Holding rate `lambda_k = 4^k`.
    pub fn lambda(&self) -> f64 {
        (2.0 * self.k as f64).exp2()
    }

    pub fn eps_f64(&self) -> f64 {
        ratio_f64(self.eps)
    }

    pub fn radius_f64(&self) -> f64 {
        ratio_f64(self.radius)
    }

    pub fn rod_length_f64(&self) -> f64 {
        ratio_f64(self.rod_length)
    }

    /// Largest `i^2 + j^2` of a grid point inside the closed disk `B_eps`.
    pub fn disk_max(&self) -> i64 {
        let (p, q) = (*self.eps.numer() as i128, *self.eps.denom() as i128);
        // n q^2 <= p^2 4^k
        Integer::div_floor(&((p * p) << (2 * self.k)), &(q * q)) as i64
    }

    /// Largest `i^2 + j^2` of a grid point strictly inside `|x| < R`.
    pub fn plane_max(&self) -> i64 {
        let (p, q) = (*self.radius.numer() as i128, *self.radius.denom() as i128);
        // n q^2 < p^2 4^k
        Integer::div_floor(&(((p * p) << (2 * self.k)) - 1), &(q * q)) as i64
    }

    /// Largest rod index `n` with `n 2^-k < L`.
    pub fn rod_max(&self) -> u32 {
        let (p, q) = (*self.rod_length.numer() as i128, *self.rod_length.denom() as i128);
        Integer::div_floor(&((p << self.k) - 1), &q) as u32
    }
}

pub(crate) fn ratio_f64(r: Rational) -> f64 {
    r.numer().to_f64().unwrap() / r.denom().to_f64().unwrap()
}

/// Parses `3`, `5/8`, `0.625` or `-1.5e0`-free decimals into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Usage(format!("not a rational number: {s:?}"));
    if let Some((a, b)) = s.split_once('/') {
        let a: i64 = a.trim().parse().map_err(|_| bad())?;
        let b: i64 = b.trim().parse().map_err(|_| bad())?;
        if b == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(a, b));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.len() > 12 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.starts_with('-');
        let whole: i64 = if int.is_empty() || int == "-" { 0 } else { int.parse().map_err(|_| bad())? };
        let den = 10i64.pow(frac.len() as u32);
        let f: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let num = whole.abs() * den + f;
        return Ok(Rational::new(if neg { -num } else { num }, den));
    }
    s.parse::<i64>().map(Rational::from_integer).map_err(|_| bad())
}

pub(crate) mod ratio_str {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_rational(&s).map_err(serde::de::Error::custom)
    }
}
