//! Exact arithmetic in Q(ζ), ζ a primitive n²-th root of unity.
//!
//! Elements are stored as an integer numerator vector over the power basis
//! 1, ζ, …, ζ^{φ(n²)-1} together with one positive common denominator.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CycloError {
    #[error("inverse of zero")]
    ZeroInverse,
    #[error("n must be odd and at least 3, got {0}")]
    BadOrder(u32),
    #[error("expected {expected} coefficients, got {got}")]
    Length { expected: usize, got: usize },
    #[error("cannot parse rational `{0}`")]
    Parse(String),
    #[error("values from different fields (n = {0} and n = {1})")]
    Mismatch(u32, u32),
}

/// Integer polynomial long division by a monic divisor. Coefficients low to high.
fn div_monic(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    if rem.len() <= dd {
        return vec![];
    }
    let mut quo = vec![BigInt::zero(); rem.len() - dd];
    for k in (0..quo.len()).rev() {
        let c = rem[k + dd].clone();
        if c.is_zero() {
            continue;
        }
        for (i, d) in den.iter().enumerate() {
            rem[k + i] -= &c * d;
        }
        quo[k] = c;
    }
    debug_assert!(rem.iter().all(|c| c.is_zero()));
    quo
}

/// Coefficients (low to high) of the m-th cyclotomic polynomial.
pub fn cyclotomic_polynomial(m: u32) -> Vec<BigInt> {
    let mut memo: HashMap<u32, Vec<BigInt>> = HashMap::new();
    cyclotomic_rec(m, &mut memo)
}

fn cyclotomic_rec(m: u32, memo: &mut HashMap<u32, Vec<BigInt>>) -> Vec<BigInt> {
    if let Some(p) = memo.get(&m) {
        return p.clone();
    }
    let mut p = vec![BigInt::zero(); m as usize + 1];
    p[0] = BigInt::from(-1);
    p[m as usize] = BigInt::one();
    for d in 1..m {
        if m % d == 0 {
            let q = cyclotomic_rec(d, memo);
            p = div_monic(&p, &q);
        }
    }
    memo.insert(m, p.clone());
    p
}

pub fn euler_phi(m: u32) -> u32 {
    let mut result = m;
    let mut x = m;
    let mut p = 2;
    while p * p <= x {
        if x % p == 0 {
            while x % p == 0 {
                x /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if x > 1 {
        result -= result / x;
    }
    result
}

/// Shared data for one field Q(ζ_{n²}).
pub struct CycloContext {
    n: u32,
    m: u32,
    deg: usize,
    phi: Vec<BigInt>,
    // x^k mod Φ for 0 <= k < 2m, as small integer vectors of length deg
    red: Vec<Vec<i64>>,
    power_index: HashMap<Vec<i64>, u32>,
}

impl fmt::Debug for CycloContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycloContext(n = {})", self.n)
    }
}

impl CycloContext {
    pub fn new(n: u32) -> Result<Arc<Self>, CycloError> {
        if n < 3 || n % 2 == 0 {
            return Err(CycloError::BadOrder(n));
        }
        let m = n * n;
        let phi = cyclotomic_polynomial(m);
        let deg = phi.len() - 1;
        debug_assert_eq!(deg as u32, euler_phi(m));
        let phi_small: Vec<i64> = phi.iter().map(|c| c.to_i64().unwrap()).collect();
        let mut red: Vec<Vec<i64>> = Vec::with_capacity(2 * m as usize);
        for k in 0..2 * m as usize {
            let mut v = vec![0i64; deg];
            if k < deg {
                v[k] = 1;
            } else {
                // x^k = x * x^{k-1}
                let prev = &red[k - 1];
                let top = prev[deg - 1];
                for i in (1..deg).rev() {
                    v[i] = prev[i - 1];
                }
                v[0] = 0;
                if top != 0 {
                    for i in 0..deg {
                        v[i] -= top * phi_small[i];
                    }
                }
            }
            red.push(v);
        }
        let mut power_index = HashMap::new();
        for k in 0..m {
            power_index.insert(red[k as usize].clone(), k);
        }
        Ok(Arc::new(CycloContext {
            n,
            m,
            deg,
            phi,
            red,
            power_index,
        }))
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// The order n² of ζ.
    pub fn m(&self) -> u32 {
        self.m
    }

    /// Field degree φ(n²).
    pub fn degree(&self) -> usize {
        self.deg
    }

    pub fn cyclotomic(&self) -> &[BigInt] {
        &self.phi
    }
}

pub fn make_context(n: u32) -> Result<Arc<CycloContext>, CycloError> {
    CycloContext::new(n)
}

/// (k)_base = 1 + base + ... + base^{k-1}.
pub fn q_integer(k: u32, base: &CycloNum) -> CycloNum {
    let mut acc = CycloNum::zero(base.context());
    let mut p = CycloNum::one(base.context());
    for _ in 0..k {
        acc += &p;
        p *= base;
    }
    acc
}

/// ζ^k for any integer k.
pub fn root_power(ctx: &Arc<CycloContext>, k: i64) -> CycloNum {
    let e = k.rem_euclid(ctx.m as i64) as usize;
    let num: Vec<BigInt> = ctx.red[e].iter().map(|&c| BigInt::from(c)).collect();
    CycloNum {
        ctx: ctx.clone(),
        num,
        den: BigInt::one(),
    }
}

/// q^k = ζ^{nk}.
pub fn q_power(ctx: &Arc<CycloContext>, k: i64) -> CycloNum {
    root_power(ctx, k * ctx.n as i64)
}

#[derive(Clone)]
pub struct CycloNum {
    ctx: Arc<CycloContext>,
    // empty means zero; otherwise length deg with content coprime to den
    num: Vec<BigInt>,
    den: BigInt,
}

impl CycloNum {
    pub fn zero(ctx: &Arc<CycloContext>) -> Self {
        CycloNum {
            ctx: ctx.clone(),
            num: Vec::new(),
            den: BigInt::one(),
        }
    }

    pub fn one(ctx: &Arc<CycloContext>) -> Self {
        Self::from_int(ctx, 1)
    }

    pub fn from_int(ctx: &Arc<CycloContext>, k: i64) -> Self {
        Self::from_bigint(ctx, BigInt::from(k))
    }

    pub fn from_bigint(ctx: &Arc<CycloContext>, k: BigInt) -> Self {
        if k.is_zero() {
            return Self::zero(ctx);
        }
        let mut num = vec![BigInt::zero(); ctx.deg];
        num[0] = k;
        CycloNum {
            ctx: ctx.clone(),
            num,
            den: BigInt::one(),
        }
    }

    pub fn from_rational(ctx: &Arc<CycloContext>, r: &Rational) -> Self {
        if r.is_zero() {
            return Self::zero(ctx);
        }
        let mut num = vec![BigInt::zero(); ctx.deg];
        num[0] = r.numer().clone();
        CycloNum {
            ctx: ctx.clone(),
            num,
            den: r.denom().clone(),
        }
    }

    pub fn from_coefficients(ctx: &Arc<CycloContext>, coeffs: &[Rational]) -> Result<Self, CycloError> {
        if coeffs.len() != ctx.deg {
            return Err(CycloError::Length {
                expected: ctx.deg,
                got: coeffs.len(),
            });
        }
        let mut den = BigInt::one();
        for c in coeffs {
            den = den.lcm(c.denom());
        }
        let num = coeffs
            .iter()
            .map(|c| c.numer() * (&den / c.denom()))
            .collect();
        Ok(Self::normalized(ctx.clone(), num, den))
    }

    fn normalized(ctx: Arc<CycloContext>, mut num: Vec<BigInt>, mut den: BigInt) -> Self {
        let mut g = BigInt::zero();
        for c in &num {
            if !c.is_zero() {
                g = g.gcd(c);
                if g.is_one() {
                    break;
                }
            }
        }
        if g.is_zero() {
            return CycloNum {
                ctx,
                num: Vec::new(),
                den: BigInt::one(),
            };
        }
        let g = g.gcd(&den);
        let flip = den.is_negative();
        if !g.is_one() || flip {
            let g = if flip { -g } else { g };
            for c in num.iter_mut() {
                *c = &*c / &g;
            }
            den = &den / &g;
        }
        CycloNum { ctx, num, den }
    }

    pub fn context(&self) -> &Arc<CycloContext> {
        &self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one()
            && !self.num.is_empty()
            && self.num[0].is_one()
            && self.num[1..].iter().all(|c| c.is_zero())
    }

    /// Rational coefficients on the power basis, length φ(n²).
    pub fn coefficients(&self) -> Vec<Rational> {
        if self.num.is_empty() {
            return vec![Rational::zero(); self.ctx.deg];
        }
        self.num
            .iter()
            .map(|c| Rational::new(c.clone(), self.den.clone()))
            .collect()
    }

    /// The value as a rational if it lies in Q.
    pub fn as_rational(&self) -> Option<Rational> {
        if self.num.is_empty() {
            return Some(Rational::zero());
        }
        if self.num[1..].iter().all(|c| c.is_zero()) {
            Some(Rational::new(self.num[0].clone(), self.den.clone()))
        } else {
            None
        }
    }

    /// If the value equals ζ^k, return k in [0, n²).
    pub fn as_zeta_power(&self) -> Option<u32> {
        if !self.den.is_one() || self.num.is_empty() {
            return None;
        }
        let small: Option<Vec<i64>> = self.num.iter().map(|c| c.to_i64()).collect();
        small.and_then(|v| self.ctx.power_index.get(&v).copied())
    }

    fn check(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.ctx, &other.ctx) || self.ctx.n == other.ctx.n,
            "{}",
            CycloError::Mismatch(self.ctx.n, other.ctx.n)
        );
    }

    fn add_impl(&self, other: &Self, negate: bool) -> Self {
        self.check(other);
        if other.num.is_empty() {
            return self.clone();
        }
        if self.num.is_empty() {
            return if negate { -other.clone() } else { other.clone() };
        }
        if self.den == other.den {
            let num = self
                .num
                .iter()
                .zip(&other.num)
                .map(|(a, b)| if negate { a - b } else { a + b })
                .collect();
            return Self::normalized(self.ctx.clone(), num, self.den.clone());
        }
        let l = self.den.lcm(&other.den);
        let fa = &l / &self.den;
        let fb = &l / &other.den;
        let num = self
            .num
            .iter()
            .zip(&other.num)
            .map(|(a, b)| {
                let t = b * &fb;
                if negate {
                    a * &fa - t
                } else {
                    a * &fa + t
                }
            })
            .collect();
        Self::normalized(self.ctx.clone(), num, l)
    }

    fn mul_impl(&self, other: &Self) -> Self {
        self.check(other);
        if self.num.is_empty() || other.num.is_empty() {
            return Self::zero(&self.ctx);
        }
        let deg = self.ctx.deg;
        let mut prod = vec![BigInt::zero(); 2 * deg - 1];
        for (i, a) in self.num.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.num.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        let mut num: Vec<BigInt> = prod.drain(..deg).collect();
        for (k, c) in prod.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (i, &r) in self.ctx.red[deg + k].iter().enumerate() {
                if r != 0 {
                    num[i] += c * r;
                }
            }
        }
        Self::normalized(self.ctx.clone(), num, &self.den * &other.den)
    }

    pub fn scale_int(&self, k: i64) -> Self {
        if k == 0 || self.num.is_empty() {
            return Self::zero(&self.ctx);
        }
        let k = BigInt::from(k);
        let num = self.num.iter().map(|c| c * &k).collect();
        Self::normalized(self.ctx.clone(), num, self.den.clone())
    }

    /// Multiplicative inverse, by the extended Euclidean algorithm against Φ_{n²}.
    pub fn inv(&self) -> Result<Self, CycloError> {
        if self.num.is_empty() {
            return Err(CycloError::ZeroInverse);
        }
        if let Some(k) = self.as_zeta_power() {
            return Ok(root_power(&self.ctx, -(k as i64)));
        }
        let a: Vec<Rational> = self
            .num
            .iter()
            .map(|c| Rational::from_integer(c.clone()))
            .collect();
        let phi: Vec<Rational> = self
            .ctx
            .phi
            .iter()
            .map(|c| Rational::from_integer(c.clone()))
            .collect();
        let mut r0 = trim(phi);
        let mut r1 = trim(a);
        let mut s0: Vec<Rational> = vec![];
        let mut s1: Vec<Rational> = vec![Rational::one()];
        while !r1.is_empty() {
            let (q, r) = poly_divrem(&r0, &r1);
            let s2 = poly_sub(&s0, &poly_mul(&q, &s1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s2);
        }
        // r0 is a nonzero constant since Φ is irreducible
        debug_assert_eq!(r0.len(), 1);
        let c = r0[0].clone();
        let mut coeffs: Vec<Rational> = s0.into_iter().map(|x| x / &c).collect();
        coeffs.resize(self.ctx.deg, Rational::zero());
        let mut res = Self::from_coefficients(&self.ctx, &coeffs)?;
        // account for the common denominator of self
        res = res.mul_impl(&Self::from_bigint(&self.ctx, self.den.clone()));
        Ok(res)
    }

    pub fn pow(&self, e: i64) -> Result<Self, CycloError> {
        let mut base = if e < 0 { self.inv()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Self::one(&self.ctx);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_impl(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_impl(&base);
            }
        }
        Ok(acc)
    }

    /// Reduced "p/q" strings, one per power-basis coefficient.
    pub fn to_strings(&self) -> Vec<String> {
        self.coefficients()
            .iter()
            .map(|c| format!("{}/{}", c.numer(), c.denom()))
            .collect()
    }

    pub fn from_strings(ctx: &Arc<CycloContext>, items: &[String]) -> Result<Self, CycloError> {
        let coeffs: Result<Vec<Rational>, CycloError> = items.iter().map(|s| parse_rational(s)).collect();
        Self::from_coefficients(ctx, &coeffs?)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.to_strings()
                .into_iter()
                .map(serde_json::Value::String)
                .collect(),
        )
    }

    pub fn from_json(ctx: &Arc<CycloContext>, v: &serde_json::Value) -> Result<Self, CycloError> {
        let arr = v
            .as_array()
            .ok_or_else(|| CycloError::Parse(v.to_string()))?;
        let items: Result<Vec<String>, CycloError> = arr
            .iter()
            .map(|x| match x {
                serde_json::Value::String(s) => Ok(s.clone()),
                serde_json::Value::Number(k) => Ok(k.to_string()),
                other => Err(CycloError::Parse(other.to_string())),
            })
            .collect();
        Self::from_strings(ctx, &items?)
    }
}

pub fn parse_rational(s: &str) -> Result<Rational, CycloError> {
    let s = s.trim();
    let err = || CycloError::Parse(s.to_string());
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| err())?;
            let q: BigInt = q.trim().parse().map_err(|_| err())?;
            if q.is_zero() {
                return Err(err());
            }
            Ok(Rational::new(p, q))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| err())?)),
    }
}

fn trim(mut p: Vec<Rational>) -> Vec<Rational> {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

fn poly_sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    trim(out)
}

fn poly_divrem(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let mut r = a.to_vec();
    if r.len() < b.len() {
        return (vec![], trim(r));
    }
    let db = b.len() - 1;
    let lead = b[db].clone();
    let mut q = vec![Rational::zero(); r.len() - db];
    for k in (0..q.len()).rev() {
        let c = &r[k + db] / &lead;
        if c.is_zero() {
            continue;
        }
        for (i, y) in b.iter().enumerate() {
            r[k + i] -= &c * y;
        }
        q[k] = c;
    }
    r.truncate(db);
    (trim(q), trim(r))
}

impl PartialEq for CycloNum {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.n == other.ctx.n && self.num == other.num && self.den == other.den
    }
}

impl Eq for CycloNum {}

impl Hash for CycloNum {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.ctx.n.hash(state);
        self.num.hash(state);
        self.den.hash(state);
    }
}

impl fmt::Debug for CycloNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for CycloNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coefficients().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let coeff = if a.is_integer() {
                a.numer().to_string()
            } else {
                format!("{}/{}", a.numer(), a.denom())
            };
            match i {
                0 => write!(f, "{}", coeff)?,
                _ => {
                    if !a.is_one() {
                        write!(f, "{}*", coeff)?;
                    }
                    if i == 1 {
                        write!(f, "z")?;
                    } else {
                        write!(f, "z^{}", i)?;
                    }
                }
            }
        }
        Ok(())
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<&CycloNum> for &CycloNum {
            type Output = CycloNum;
            fn $m(self, rhs: &CycloNum) -> CycloNum {
                $body(self, rhs)
            }
        }
        impl $tr<CycloNum> for CycloNum {
            type Output = CycloNum;
            fn $m(self, rhs: CycloNum) -> CycloNum {
                $body(&self, &rhs)
            }
        }
        impl $tr<&CycloNum> for CycloNum {
            type Output = CycloNum;
            fn $m(self, rhs: &CycloNum) -> CycloNum {
                $body(&self, rhs)
            }
        }
        impl $tr<CycloNum> for &CycloNum {
            type Output = CycloNum;
            fn $m(self, rhs: CycloNum) -> CycloNum {
                $body(self, &rhs)
            }
        }
    };
}

binop!(Add, add, |a: &CycloNum, b: &CycloNum| a.add_impl(b, false));
binop!(Sub, sub, |a: &CycloNum, b: &CycloNum| a.add_impl(b, true));
binop!(Mul, mul, |a: &CycloNum, b: &CycloNum| a.mul_impl(b));
binop!(Div, div, |a: &CycloNum, b: &CycloNum| a
    .mul_impl(&b.inv().expect("division by zero")));

impl AddAssign<&CycloNum> for CycloNum {
    fn add_assign(&mut self, rhs: &CycloNum) {
        *self = self.add_impl(rhs, false);
    }
}

impl SubAssign<&CycloNum> for CycloNum {
    fn sub_assign(&mut self, rhs: &CycloNum) {
        *self = self.add_impl(rhs, true);
    }
}

impl MulAssign<&CycloNum> for CycloNum {
    fn mul_assign(&mut self, rhs: &CycloNum) {
        *self = self.mul_impl(rhs);
    }
}

impl Neg for CycloNum {
    type Output = CycloNum;
    fn neg(mut self) -> CycloNum {
        for c in self.num.iter_mut() {
            *c = -std::mem::take(c);
        }
        self
    }
}

impl Neg for &CycloNum {
    type Output = CycloNum;
    fn neg(self) -> CycloNum {
        -self.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&c| BigInt::from(c)).collect()
    }

    #[test]
    fn small_cyclotomics() {
        assert_eq!(cyclotomic_polynomial(1), ints(&[-1, 1]));
        assert_eq!(cyclotomic_polynomial(6), ints(&[1, -1, 1]));
        assert_eq!(cyclotomic_polynomial(9), ints(&[1, 0, 0, 1, 0, 0, 1]));
        assert_eq!(cyclotomic_polynomial(25).len(), 21);
        assert_eq!(euler_phi(9), 6);
        assert_eq!(euler_phi(25), 20);
        assert_eq!(euler_phi(81), 54);
    }

    #[test]
    fn powers_wrap() {
        let ctx = CycloContext::new(3).unwrap();
        assert!(root_power(&ctx, 9).is_one());
        assert_eq!(root_power(&ctx, 4) * root_power(&ctx, 7), root_power(&ctx, 2));
        assert_eq!(q_power(&ctx, 3), CycloNum::one(&ctx));
        // 1 + q + q² = 0
        let s = CycloNum::one(&ctx) + q_power(&ctx, 1) + q_power(&ctx, 2);
        assert!(s.is_zero());
        assert_eq!(root_power(&ctx, 5).as_zeta_power(), Some(5));
    }

    #[test]
    fn inverse_and_errors() {
        let ctx = CycloContext::new(5).unwrap();
        let x = CycloNum::from_int(&ctx, 3) + root_power(&ctx, 1) - root_power(&ctx, 7).scale_int(2);
        let y = x.inv().unwrap();
        assert!((x * y).is_one());
        assert_eq!(CycloNum::zero(&ctx).inv(), Err(CycloError::ZeroInverse));
        assert!(CycloContext::new(4).is_err());
    }

    #[test]
    fn json_round_trip() {
        let ctx = CycloContext::new(3).unwrap();
        let half = Rational::new(BigInt::from(1), BigInt::from(2));
        let x = CycloNum::from_rational(&ctx, &half) + root_power(&ctx, 2);
        let s = x.to_strings();
        assert_eq!(s[0], "1/2");
        assert_eq!(s[1], "0/1");
        assert_eq!(CycloNum::from_json(&ctx, &x.to_json()).unwrap(), x);
    }
}
