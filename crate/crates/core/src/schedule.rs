//! Sample-size schedule and the constants it depends on.
//!
//! Everything is exact: `epsilon` enters as a rational, `epsilon_1` and the
//! square of `C` are rationals, and `n_tilde`, `M(n)`, `m(n)` are big
//! integers. `C` itself carries a `sqrt(2)` factor and is kept as its exact
//! square plus a rational enclosure narrower than `1e-12`.
//!
//! The recursion for `m` is taken with equality,
//! `m(n+1) = m(n) + M(n) * h` with `M(n) = ceil((b1 * b2^((r-1) m(n)) / sqrt(eps1))^(r h))`,
//! which is the smallest admissible schedule. Its values explode at `n = 2`
//! for every non-trivial parameter set, so materialization stops at a
//! configurable number of decimal digits and reports a lower bound instead.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{random_partitionwise_map, PartitionwiseMap};

pub const DEFAULT_DIGIT_CAP: u64 = 1_000_000;

fn binom2(r: usize) -> u64 {
    (r * (r - 1) / 2) as u64
}

/// Exact rational value of the shortest decimal representation of `x`
/// (so `0.6` becomes `3/5`, not the nearest binary fraction).
pub fn decimal_to_rational(x: f64) -> Result<BigRational> {
    if !x.is_finite() {
        return Err(Error::validation(format!("{x} is not a finite number")));
    }
    parse_decimal(&format!("{x}"))
}

/// Parses `[-]digits[.digits]` exactly.
pub fn parse_decimal(text: &str) -> Result<BigRational> {
    let bad = || Error::validation(format!("cannot parse decimal `{text}`"));
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: num_bigint::BigInt = format!("{int}{frac}0").parse().map_err(|_| bad())?;
    let den = num_bigint::BigInt::from(10u32).pow(frac.len() as u32 + 1);
    let q = BigRational::new(digits, den);
    Ok(if neg { -q } else { q })
}

fn check_eps(eps: &BigRational) -> Result<()> {
    if !eps.is_positive() {
        return Err(Error::validation(format!("epsilon must be positive, got {eps}")));
    }
    Ok(())
}

/// `sqrt(epsilon_1) = eps / (6 b2 (r choose 2))`, exact.
pub fn sqrt_epsilon1(r: usize, b2: usize, eps: &BigRational) -> Result<BigRational> {
    check_eps(eps)?;
    if r < 2 || b2 == 0 {
        return Err(Error::validation("need r >= 2 and b2 >= 1"));
    }
    Ok(eps / BigRational::from_integer((6 * b2 as u64 * binom2(r)).into()))
}

/// `epsilon_1 = (eps / (6 b2 (r choose 2)))^2`.
pub fn epsilon1(r: usize, b2: usize, eps: &BigRational) -> Result<BigRational> {
    let s = sqrt_epsilon1(r, b2, eps)?;
    Ok(&s * &s)
}

/// `C = sqrt(2) (r choose 2) h^2 (b2 / sqrt(eps1))^((r choose 2) h^2 - 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstantC {
    /// Exact `C^2`.
    pub squared: BigRational,
    /// Rational enclosure `lower <= C <= upper`, `upper - lower = 10^-13`.
    pub lower: BigRational,
    pub upper: BigRational,
}

const C_DECIMALS: u32 = 13;

impl ConstantC {
    fn from_squared(squared: BigRational) -> Self {
        let scale = BigUint::from(10u32).pow(C_DECIMALS);
        let scaled = (squared.numer().magnitude() * &scale * &scale) / squared.denom().magnitude();
        let root = scaled.sqrt();
        let den: num_bigint::BigInt = scale.into();
        let lower = BigRational::new(root.clone().into(), den.clone());
        let upper = BigRational::new((root + 1u32).into(), den);
        ConstantC { squared, lower, upper }
    }

    pub fn to_f64(&self) -> f64 {
        self.upper.to_f64().unwrap_or(f64::INFINITY)
    }

    pub fn width(&self) -> BigRational {
        &self.upper - &self.lower
    }

    /// `C` with `digits` significant digits, e.g. `1.41421356237e0`.
    pub fn significant(&self, digits: usize) -> String {
        format_significant(&self.lower, digits)
    }
}

pub fn constant_c(r: usize, h: usize, b2: usize, eps1: &BigRational) -> Result<ConstantC> {
    if !eps1.is_positive() || eps1 > &BigRational::one() {
        return Err(Error::validation(format!("epsilon_1 must lie in (0, 1], got {eps1}")));
    }
    if r < 2 || h == 0 || b2 == 0 {
        return Err(Error::validation("need r >= 2, h >= 1, b2 >= 1"));
    }
    let k = binom2(r) * (h * h) as u64;
    let exp = (k - 1) as i32;
    // C^2 = 2 k^2 b2^(2(k-1)) / eps1^(k-1)
    let b2q = BigRational::from_integer((b2 as u64).into());
    let squared = BigRational::from_integer((2 * k * k).into()) * b2q.pow(2 * exp) / eps1.pow(exp);
    Ok(ConstantC::from_squared(squared))
}

/// Smallest integer `n` with `C b2 sqrt(b2 / n) <= eps / (2 (r choose 2))`,
/// i.e. `ceil(b2^3 (2 (r choose 2) C / eps)^2)`.
pub fn n_tilde(c: &ConstantC, b2: usize, r: usize, eps: &BigRational) -> Result<BigUint> {
    check_eps(eps)?;
    let k = BigRational::from_integer((2 * binom2(r)).into());
    let b2c = BigRational::from_integer(((b2 as u64).pow(3)).into());
    let x = b2c * &k * &k * &c.squared / (eps * eps);
    let n = x.ceil().to_integer();
    Ok(n.to_biguint().expect("positive").max(BigUint::one()))
}

/// Whether `C b2 sqrt(b2 / n) <= eps / (2 (r choose 2))` holds, exactly.
pub fn n_tilde_holds(c: &ConstantC, b2: usize, r: usize, eps: &BigRational, n: &BigUint) -> bool {
    if n.is_zero() {
        return false;
    }
    let b2q = BigRational::from_integer((b2 as u64).into());
    let lhs = &c.squared * &b2q * &b2q * &b2q / BigRational::from_integer(n.clone().into());
    let rhs = eps / BigRational::from_integer((2 * binom2(r)).into());
    lhs <= &rhs * &rhs
}

/// The exact schedule `m(0..)` for fixed `(r, h, b, eps)`.
#[derive(Debug, Clone)]
pub struct TheoreticalSchedule {
    pub r: usize,
    pub h: usize,
    pub b: (usize, usize),
    pub eps: BigRational,
    pub eps1: BigRational,
    pub c: ConstantC,
    pub n_tilde: BigUint,
    pub digit_cap: u64,
    sqrt_eps1: BigRational,
    /// `m(0), m(1), ...` as far as materialized.
    m: Vec<BigUint>,
    /// `M(0), M(1), ...`; `big_m[n]` drives `m[n + 1]`.
    big_m: Vec<BigUint>,
}

impl TheoreticalSchedule {
    pub fn new(r: usize, h: usize, b: (usize, usize), eps: BigRational, digit_cap: u64) -> Result<Self> {
        if b.0 == 0 {
            return Err(Error::validation("b1 must be >= 1"));
        }
        let sqrt_eps1 = sqrt_epsilon1(r, b.1, &eps)?;
        let eps1 = &sqrt_eps1 * &sqrt_eps1;
        let c = constant_c(r, h, b.1, &eps1)?;
        let n_tilde = n_tilde(&c, b.1, r, &eps)?;
        Ok(TheoreticalSchedule {
            r,
            h,
            b,
            eps,
            eps1,
            c,
            n_tilde,
            digit_cap,
            sqrt_eps1,
            m: vec![BigUint::zero()],
            big_m: Vec::new(),
        })
    }

    /// `log2 M(n)` from `m(n)` in floating point (a lower bound after the
    /// small safety margin).
    fn log2_big_m(&self, m_n: &BigUint) -> f64 {
        let (b1, b2) = (self.b.0 as f64, self.b.1 as f64);
        let m_f = m_n.to_f64().unwrap_or(f64::INFINITY);
        let inv_sqrt = -self.sqrt_eps1.to_f64().expect("finite").log2();
        let per = b1.log2() + (self.r - 1) as f64 * m_f * b2.log2() + inv_sqrt;
        (self.r * self.h) as f64 * per
    }

    fn extend(&mut self) -> Result<()> {
        let n = self.m.len() - 1;
        let m_n = self.m[n].clone();
        let log2 = self.log2_big_m(&m_n);
        let log2_total = log2 + (self.h as f64).log2();
        let digits = log2_total * std::f64::consts::LOG10_2;
        if !digits.is_finite() || digits > self.digit_cap as f64 {
            return Err(Error::DigitCapExceeded {
                what: format!("m({})", n + 1),
                digits_estimate: digits,
                log2_lower_bound: log2_total - 1e-9 * log2_total.abs().max(1.0),
                digit_cap: self.digit_cap,
            });
        }
        let exp = m_n
            .to_u64()
            .and_then(|m| m.checked_mul((self.r - 1) as u64))
            .and_then(|e| u32::try_from(e).ok())
            .ok_or_else(|| Error::DigitCapExceeded {
                what: format!("m({})", n + 1),
                digits_estimate: digits,
                log2_lower_bound: log2_total,
                digit_cap: self.digit_cap,
            })?;
        // (b1 b2^exp / (p/q))^(rh) = (b1 b2^exp q)^(rh) / p^(rh)
        let p = self.sqrt_eps1.numer().magnitude();
        let q = self.sqrt_eps1.denom().magnitude();
        let base = BigUint::from(self.b.0) * BigUint::from(self.b.1).pow(exp) * q;
        let rh = (self.r * self.h) as u32;
        let (quot, rem) = base.pow(rh).div_rem(&p.pow(rh));
        let big_m = if rem.is_zero() { quot } else { quot + 1u32 };
        let next = &m_n + &big_m * BigUint::from(self.h);
        self.big_m.push(big_m);
        self.m.push(next);
        Ok(())
    }

    /// `m(n)`, materializing the recursion up to `n`.
    pub fn m_of(&mut self, n: usize) -> Result<BigUint> {
        if BigUint::from(n) > self.n_tilde {
            return Err(Error::validation(format!("n = {n} exceeds n_tilde = {}", self.n_tilde)));
        }
        while self.m.len() <= n {
            self.extend()?;
        }
        Ok(self.m[n].clone())
    }

    /// `M(n) = ceil((b1 b2^((r-1) m(n)) / sqrt(eps1))^(r h))`.
    pub fn big_m(&mut self, n: usize) -> Result<BigUint> {
        while self.big_m.len() <= n {
            self.extend()?;
        }
        Ok(self.big_m[n].clone())
    }

    /// Materializes `m(0), m(1), ...` until `n_tilde` or the digit cap.
    /// Returns the overflow report, if one was hit.
    pub fn materialize(&mut self, max_n: usize) -> Option<Error> {
        let limit = self.n_tilde.to_usize().unwrap_or(usize::MAX).min(max_n);
        while self.m.len() <= limit {
            if let Err(e) = self.extend() {
                return Some(e);
            }
        }
        None
    }

    pub fn materialized(&self) -> &[BigUint] {
        &self.m
    }

    pub fn materialized_big_m(&self) -> &[BigUint] {
        &self.big_m
    }
}

/// `M` for a graph regularized with `m` samples per part:
/// `ceil((b1 b2^((r-1) m) / sqrt(eps1))^(r h))`, refused above `digit_cap`
/// decimal digits.
pub fn sample_budget(r: usize, h: usize, b: (usize, usize), eps: &BigRational, m: usize, digit_cap: u64) -> Result<BigUint> {
    let mut s = TheoreticalSchedule::new(r, h, b, eps.clone(), digit_cap)?;
    s.m = vec![BigUint::from(m)];
    s.big_m(0)
}

/// Explicit short schedule used for experiments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PracticalSchedule {
    m_list: Vec<usize>,
}

impl PracticalSchedule {
    pub fn new(m_list: Vec<usize>) -> Result<Self> {
        if m_list.first() != Some(&0) {
            return Err(Error::validation("practical schedule must start with 0"));
        }
        if m_list.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::validation(format!("practical schedule {m_list:?} is not non-decreasing")));
        }
        Ok(PracticalSchedule { m_list })
    }

    /// Parses a comma-separated list such as `0,1,2,4,8`.
    pub fn parse(text: &str) -> Result<Self> {
        let list = text
            .split(',')
            .map(|x| x.trim().parse::<usize>().map_err(|_| Error::validation(format!("bad schedule entry `{x}`"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(list)
    }

    pub fn m_list(&self) -> &[usize] {
        &self.m_list
    }

    pub fn n_tilde(&self) -> usize {
        self.m_list.len()
    }

    pub fn m_of(&self, n: usize) -> usize {
        self.m_list[n]
    }
}

/// Draws `n` uniformly from `0..n_tilde` and a random `phi` with `m(n)`
/// samples in every part.
pub fn choose_n_and_sample<R: Rng + ?Sized>(
    sched: &PracticalSchedule,
    part_sizes: &[usize],
    rng: &mut R,
) -> Result<(usize, PartitionwiseMap)> {
    let n = rng.gen_range(0..sched.n_tilde());
    let m = sched.m_of(n);
    let phi = random_partitionwise_map(part_sizes, &vec![m; part_sizes.len()], rng)?;
    Ok((n, phi))
}

/// Decimal scientific rendering of a positive rational with `digits`
/// significant digits (truncated).
pub fn format_significant(x: &BigRational, digits: usize) -> String {
    if x.is_zero() {
        return "0".into();
    }
    let num = x.numer().magnitude().clone();
    let den = x.denom().magnitude().clone();
    let int_part = &num / &den;
    let mut exp: i64 = if int_part.is_zero() {
        // count leading zeros after the point
        let mut e = 0i64;
        let mut n = num.clone();
        while (&n * 10u32) < den {
            n *= 10u32;
            e -= 1;
        }
        e - 1
    } else {
        int_part.to_string().len() as i64 - 1
    };
    let shift = digits as i64 - 1 - exp;
    let ten = BigUint::from(10u32);
    let mut scaled = if shift >= 0 {
        num * ten.pow(shift as u32) / den
    } else {
        num / (den * ten.pow((-shift) as u32))
    };
    let mut s = scaled.to_string();
    if s.len() > digits {
        scaled /= 10u32;
        exp += 1;
        s = scaled.to_string();
    }
    let (head, tail) = s.split_at(1);
    let sign = if x.is_negative() { "-" } else { "" };
    if tail.is_empty() {
        format!("{sign}{head}e{exp}")
    } else {
        format!("{sign}{head}.{tail}e{exp}")
    }
}
