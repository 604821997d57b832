//! Exact real numbers of the form `q_1*sqrt(r_1) + ... + q_k*sqrt(r_k)`.
//!
//! The `r_i` are distinct squarefree positive integers and the `q_i` nonzero
//! rationals. Square roots of distinct squarefree integers are linearly
//! independent over the rationals, so this canonical form makes equality
//! structural. Euclidean distances between points with rational coordinates
//! are single-term surds, and every quantity produced by the flow solver or
//! by a simplex run with a rational constraint matrix stays inside this set.
//!
//! Ordering is decided by a floating-point evaluation with a rigorous error
//! bound, falling back to interval refinement with big-integer square roots.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ParseScalarError;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Surd {
    // Sorted by radicand; coefficients nonzero; radicands squarefree.
    terms: Vec<(u64, BigRational)>,
}

fn squarefree_split(mut n: u64) -> (u64, u64) {
    // n = outer^2 * inner with inner squarefree.
    let mut outer = 1u64;
    let mut inner = 1u64;
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            outer *= p.pow(e / 2);
            if e % 2 == 1 {
                inner *= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    inner *= n;
    (outer, inner)
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

impl Surd {
    pub fn from_rational(q: BigRational) -> Self {
        if q.is_zero() {
            Surd::default()
        } else {
            Surd { terms: vec![(1, q)] }
        }
    }

    pub fn from_integer(v: i64) -> Self {
        Surd::from_rational(BigRational::from_integer(BigInt::from(v)))
    }

    /// `sqrt(q)` for a nonnegative rational `q`; `None` when `q < 0` or when
    /// numerator or denominator does not fit in `u64`.
    pub fn sqrt_rational(q: &BigRational) -> Option<Self> {
        if q.is_negative() {
            return None;
        }
        if q.is_zero() {
            return Some(Surd::default());
        }
        // sqrt(p/d) = po sqrt(pi) / (dout sqrt(di)) with pi, di squarefree;
        // pi*di = g^2 (pi/g)(di/g) where g = gcd(pi, di).
        let (po, pi) = squarefree_split(q.numer().to_u64()?);
        let (dout, di) = squarefree_split(q.denom().to_u64()?);
        let g = pi.gcd(&di);
        let inner = (pi / g).checked_mul(di / g)?;
        let coeff = BigRational::new(
            BigInt::from(po) * BigInt::from(g),
            BigInt::from(dout) * BigInt::from(di),
        );
        Some(Surd { terms: vec![(inner, coeff)] })
    }

    pub fn terms(&self) -> &[(u64, BigRational)] {
        &self.terms
    }

    pub fn is_rational(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0 == 1)
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        match self.terms.as_slice() {
            [] => Some(BigRational::zero()),
            [(1, q)] => Some(q.clone()),
            _ => None,
        }
    }

    fn from_map(map: BTreeMap<u64, BigRational>) -> Self {
        Surd {
            terms: map.into_iter().filter(|(_, q)| !q.is_zero()).collect(),
        }
    }

    fn scale(&self, q: &BigRational) -> Self {
        if q.is_zero() {
            return Surd::default();
        }
        Surd {
            terms: self.terms.iter().map(|(r, c)| (*r, c * q)).collect(),
        }
    }

    fn merge(&self, other: &Self, negate: bool) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < other.terms.len() {
            let take_left = j >= other.terms.len()
                || (i < self.terms.len() && self.terms[i].0 < other.terms[j].0);
            let take_right = i >= self.terms.len()
                || (j < other.terms.len() && other.terms[j].0 < self.terms[i].0);
            if take_left {
                out.push(self.terms[i].clone());
                i += 1;
            } else if take_right {
                let (r, c) = &other.terms[j];
                out.push((*r, if negate { -c } else { c.clone() }));
                j += 1;
            } else {
                let c = if negate {
                    &self.terms[i].1 - &other.terms[j].1
                } else {
                    &self.terms[i].1 + &other.terms[j].1
                };
                if !c.is_zero() {
                    out.push((self.terms[i].0, c));
                }
                i += 1;
                j += 1;
            }
        }
        Surd { terms: out }
    }

    fn product(&self, other: &Self) -> Self {
        if let Some(q) = other.to_rational() {
            return self.scale(&q);
        }
        if let Some(q) = self.to_rational() {
            return other.scale(&q);
        }
        let mut map: BTreeMap<u64, BigRational> = BTreeMap::new();
        for (r1, c1) in &self.terms {
            for (r2, c2) in &other.terms {
                let g = r1.gcd(r2);
                let r = u64::try_from((*r1 as u128 / g as u128) * (*r2 as u128 / g as u128))
                    .expect("surd radicand overflow");
                let c = c1 * c2 * BigRational::from_integer(BigInt::from(g));
                *map.entry(r).or_insert_with(BigRational::zero) += c;
            }
        }
        Surd::from_map(map)
    }

    /// Galois conjugate flipping the sign of `sqrt(p)`.
    fn conjugate(&self, p: u64) -> Self {
        Surd {
            terms: self
                .terms
                .iter()
                .map(|(r, c)| if r % p == 0 { (*r, -c) } else { (*r, c.clone()) })
                .collect(),
        }
    }

    fn quotient(&self, other: &Self) -> Self {
        assert!(!other.terms.is_empty(), "surd division by zero");
        if let [(r, c)] = other.terms.as_slice() {
            // 1/(c*sqrt(r)) = sqrt(r)/(c*r)
            let inv = (c * BigRational::from_integer(BigInt::from(*r))).recip();
            let root = Surd { terms: vec![(*r, inv)] };
            return self.product(&root);
        }
        let mut primes: Vec<u64> = other
            .terms
            .iter()
            .flat_map(|(r, _)| prime_factors(*r))
            .collect();
        primes.sort_unstable();
        primes.dedup();
        let mut num = self.clone();
        let mut den = other.clone();
        for p in primes {
            if den.terms.iter().all(|(r, _)| r % p != 0) {
                continue;
            }
            let conj = den.conjugate(p);
            num = num.product(&conj);
            den = den.product(&conj);
        }
        let d = den.to_rational().expect("rationalised denominator");
        num.scale(&d.recip())
    }

    /// Floating-point approximation together with an absolute error bound.
    fn approx(&self) -> Option<(f64, f64)> {
        let mut sum = 0.0f64;
        let mut mag = 0.0f64;
        for (r, c) in &self.terms {
            let cf = c.to_f64()?;
            if !cf.is_finite() || cf == 0.0 {
                return None;
            }
            let t = cf * (*r as f64).sqrt();
            sum += t;
            mag += t.abs();
        }
        let k = self.terms.len() as f64;
        Some((sum, mag * (k + 8.0) * f64::EPSILON))
    }

    fn sign_exact(&self) -> Ordering {
        if self.terms.is_empty() {
            return Ordering::Equal;
        }
        if let Some(q) = self.to_rational() {
            return q.cmp(&BigRational::zero());
        }
        if let Some((v, err)) = self.approx() {
            if v > err {
                return Ordering::Greater;
            }
            if v < -err {
                return Ordering::Less;
            }
        }
        let mut bits = 64u32;
        loop {
            let scale = BigUint::one() << (2 * bits as usize);
            let denom = BigRational::from_integer(BigInt::from(BigUint::one() << bits as usize));
            let mut lo = BigRational::zero();
            let mut hi = BigRational::zero();
            for (r, c) in &self.terms {
                let s = (BigUint::from(*r) * &scale).sqrt();
                let exact = &s * &s == BigUint::from(*r) * &scale;
                let s_lo = BigRational::from_integer(BigInt::from(s.clone())) / &denom;
                let s_hi = if exact {
                    s_lo.clone()
                } else {
                    BigRational::from_integer(BigInt::from(s + 1u32)) / &denom
                };
                if c.is_positive() {
                    lo += c * &s_lo;
                    hi += c * &s_hi;
                } else {
                    lo += c * &s_hi;
                    hi += c * &s_lo;
                }
            }
            if lo.is_positive() {
                return Ordering::Greater;
            }
            if hi.is_negative() {
                return Ordering::Less;
            }
            bits *= 2;
        }
    }

    pub fn signum_ord(&self) -> Ordering {
        self.sign_exact()
    }

    pub fn to_f64(&self) -> f64 {
        match self.approx() {
            Some((v, _)) => v,
            None => self
                .terms
                .iter()
                .map(|(r, c)| c.to_f64().unwrap_or(f64::NAN) * (*r as f64).sqrt())
                .sum(),
        }
    }

    /// Square root when the value is a nonnegative rational.
    pub fn sqrt(&self) -> Option<Self> {
        Surd::sqrt_rational(&self.to_rational()?)
    }
}

impl fmt::Debug for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Surd({self})")
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (r, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            if *r == 1 {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "sqrt({r})")?;
            } else {
                write!(f, "{a}*sqrt({r})")?;
            }
        }
        Ok(())
    }
}

pub(crate) fn parse_rational(s: &str) -> Result<BigRational, ParseScalarError> {
    let s = s.trim();
    let err = || ParseScalarError(s.to_string());
    if s.is_empty() {
        return Err(err());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p = parse_rational(p)?;
        let q = parse_rational(q)?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(p / q);
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| err())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(all.parse::<BigInt>().map_err(|_| err())?);
    let shift = exp - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    let factor = num_traits::pow(ten, shift.unsigned_abs() as usize);
    if shift >= 0 {
        value *= factor;
    } else {
        value /= factor;
    }
    Ok(if neg { -value } else { value })
}

fn parse_term(t: &str) -> Result<Surd, ParseScalarError> {
    let err = || ParseScalarError(t.to_string());
    let t = t.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest.trim()),
        None => (false, t.strip_prefix('+').unwrap_or(t).trim()),
    };
    let (coeff, root) = match body.find("sqrt(") {
        Some(i) => {
            let head = body[..i].trim().trim_end_matches('*').trim();
            let inner = body[i + 5..].strip_suffix(')').ok_or_else(err)?;
            let c = if head.is_empty() {
                BigRational::one()
            } else {
                parse_rational(head)?
            };
            (c, Some(parse_rational(inner)?))
        }
        None => (parse_rational(body)?, None),
    };
    let mut v = match root {
        Some(r) => Surd::sqrt_rational(&r).ok_or_else(err)?.scale(&coeff),
        None => Surd::from_rational(coeff),
    };
    if neg {
        v = -v;
    }
    Ok(v)
}

impl FromStr for Surd {
    type Err = ParseScalarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseScalarError(s.to_string()));
        }
        // Split on top-level '+'/'-' that are not part of an exponent.
        let bytes = s.as_bytes();
        let mut pieces = Vec::new();
        let mut start = 0;
        let mut depth = 0i32;
        for i in 0..bytes.len() {
            match bytes[i] {
                b'(' => depth += 1,
                b')' => depth -= 1,
                b'+' | b'-' if depth == 0 && i > start => {
                    let prev = s[..i].trim_end();
                    let after_exp = prev.ends_with(['e', 'E'])
                        && prev.len() >= 2
                        && prev.as_bytes()[prev.len() - 2].is_ascii_digit();
                    let after_op = prev.ends_with(['*', '/']) || prev.is_empty();
                    if !after_exp && !after_op && !s[start..i].trim().is_empty() {
                        pieces.push(&s[start..i]);
                        start = i;
                    }
                }
                _ => {}
            }
        }
        pieces.push(&s[start..]);
        let mut total = Surd::default();
        for p in pieces {
            total = total + parse_term(p)?;
        }
        Ok(total)
    }
}

impl Neg for Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd {
            terms: self.terms.into_iter().map(|(r, c)| (r, -c)).collect(),
        }
    }
}

impl Add for Surd {
    type Output = Surd;
    fn add(self, rhs: Surd) -> Surd {
        self.merge(&rhs, false)
    }
}

impl Sub for Surd {
    type Output = Surd;
    fn sub(self, rhs: Surd) -> Surd {
        self.merge(&rhs, true)
    }
}

impl Mul for Surd {
    type Output = Surd;
    fn mul(self, rhs: Surd) -> Surd {
        self.product(&rhs)
    }
}

impl Div for Surd {
    type Output = Surd;
    fn div(self, rhs: Surd) -> Surd {
        self.quotient(&rhs)
    }
}

impl<'a> Add<&'a Surd> for &'a Surd {
    type Output = Surd;
    fn add(self, rhs: &Surd) -> Surd {
        self.merge(rhs, false)
    }
}

impl<'a> Sub<&'a Surd> for &'a Surd {
    type Output = Surd;
    fn sub(self, rhs: &Surd) -> Surd {
        self.merge(rhs, true)
    }
}

impl Zero for Surd {
    fn zero() -> Self {
        Surd::default()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for Surd {
    fn one() -> Self {
        Surd::from_integer(1)
    }
}

impl PartialOrd for Surd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Surd {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.terms == other.terms {
            return Ordering::Equal;
        }
        if let (Some(a), Some(b)) = (self.to_rational(), other.to_rational()) {
            return a.cmp(&b);
        }
        if let (Some((a, ea)), Some((b, eb))) = (self.approx(), other.approx()) {
            let e = ea + eb + (a.abs() + b.abs()) * f64::EPSILON;
            if a - b > e {
                return Ordering::Greater;
            }
            if b - a > e {
                return Ordering::Less;
            }
        }
        self.merge(other, true).sign_exact()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &str) -> Surd {
        v.parse().unwrap()
    }

    #[test]
    fn squarefree_parts() {
        assert_eq!(squarefree_split(72), (6, 2));
        assert_eq!(squarefree_split(1), (1, 1));
        assert_eq!(squarefree_split(49), (7, 1));
        assert_eq!(prime_factors(30), vec![2, 3, 5]);
    }

    #[test]
    fn sqrt_of_rationals() {
        let half = Surd::sqrt_rational(&BigRational::new(1.into(), 2.into())).unwrap();
        assert_eq!(half.to_string(), "1/2*sqrt(2)");
        let q = Surd::sqrt_rational(&BigRational::new(9.into(), 16.into())).unwrap();
        assert_eq!(q, s("3/4"));
        assert!(Surd::sqrt_rational(&BigRational::from_integer((-1).into())).is_none());
    }

    #[test]
    fn structural_equality_is_exact() {
        let a = s("sqrt(2)") + s("sqrt(3)");
        let b = s("sqrt(3)") + s("sqrt(8)") - s("sqrt(2)");
        assert_eq!(a, b);
        assert!((s("sqrt(2)") - s("sqrt(2)")).is_zero());
    }

    #[test]
    fn products_and_quotients() {
        assert_eq!(s("sqrt(2)") * s("sqrt(6)"), s("2*sqrt(3)"));
        let x = s("1 + sqrt(2)");
        let y = s("sqrt(3) - sqrt(5) + 2");
        let q = x.clone() / y.clone();
        assert_eq!(q * y, x);
        assert_eq!(s("3*sqrt(5)") / s("sqrt(5)"), s("3"));
    }

    #[test]
    fn ordering_near_ties() {
        // sqrt(2) + sqrt(3) vs sqrt(10): 3.1462... > 3.1623? no, less.
        assert!(s("sqrt(2) + sqrt(3)") < s("sqrt(10)"));
        // 99/70 is a very close rational approximation of sqrt(2).
        assert!(s("99/70") > s("sqrt(2)"));
        let tiny = s("665857/470832") - s("sqrt(2)");
        assert!(tiny > Surd::zero());
    }

    #[test]
    fn display_round_trips() {
        for text in ["0", "-3/7", "sqrt(2)", "1/4*sqrt(2) - 5*sqrt(13)", "2 + 3/2*sqrt(3)"] {
            let v = s(text);
            assert_eq!(v.to_string().parse::<Surd>().unwrap(), v);
        }
        assert_eq!(s("0.25"), s("1/4"));
        assert_eq!(s("1e-2"), s("1/100"));
        assert_eq!(s("-2.5e1"), s("-25"));
        assert_eq!(s("sqrt(1/2)"), s("1/2*sqrt(2)"));
        assert!("abc".parse::<Surd>().is_err());
    }
}
