//! The Green ring r(Ũ_q) and its relatives as normal-form rings over Z.
//!
//! Elements are integer combinations of normal monomials
//!   y^j (j ≤ 2n-2), y^k x_t (k ≤ (n-1)/2), y^i ε_t (i ≤ (n-3)/2),
//!   y^l z±^s, y^l w_{s,η} (l ≤ n-2).
//! Products are reduced by oriented relations; each rewrite strictly lowers
//! (z/w degree, x/ε count, y degree, ε before x).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::homalg::{claim_to_string, decompose, derive_seed, verify_claim, Claim, ClaimOutcome, Engine, HomError};
use crate::repcore::{tensor, IndecompLabel, Representation, Sign};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GreenError {
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("not expressible from the presentation data: {0}")]
    Unsupported(String),
    #[error("parameter out of range: {0}")]
    Range(String),
    #[error("reduction exceeded its step budget on {0}")]
    Budget(String),
}

/// Integer polynomial in y, coefficient of y^d at index d.
pub type Poly = Vec<BigInt>;

fn trim(mut p: Poly) -> Poly {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

pub fn poly_add(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![BigInt::zero(); a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] += c;
    }
    trim(out)
}

pub fn poly_scale(a: &Poly, k: &BigInt) -> Poly {
    trim(a.iter().map(|c| c * k).collect())
}

pub fn poly_sub(a: &Poly, b: &Poly) -> Poly {
    poly_add(a, &poly_scale(b, &BigInt::from(-1)))
}

pub fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
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

pub fn poly_const(c: i64) -> Poly {
    trim(vec![BigInt::from(c)])
}

pub fn poly_monomial(d: usize, c: i64) -> Poly {
    let mut p = vec![BigInt::zero(); d + 1];
    p[d] = BigInt::from(c);
    trim(p)
}

fn binom(a: i64, b: i64) -> BigInt {
    if b < 0 || a < 0 || b > a {
        return BigInt::zero();
    }
    let mut r = BigInt::one();
    for i in 0..b {
        r = r * BigInt::from(a - i) / BigInt::from(i + 1);
    }
    r
}

// (num/den)·C(a, b), which is an integer in every use
fn ratio_binom(num: i64, den: i64, a: i64, b: i64) -> BigInt {
    let top = BigInt::from(num) * binom(a, b);
    let (q, r) = top.div_rem(&BigInt::from(den));
    assert!(r.is_zero(), "non-integral coefficient");
    q
}

fn sign(i: i64) -> BigInt {
    if i % 2 == 0 {
        BigInt::one()
    } else {
        BigInt::from(-1)
    }
}

fn add_coeff(p: &mut Poly, d: usize, c: BigInt) {
    if p.len() <= d {
        p.resize(d + 1, BigInt::zero());
    }
    p[d] += c;
}

/// [V_l] = Σ (-1)^i C(l-1-i, i) y^{l-1-2i}.
pub fn simple_poly(l: u32) -> Poly {
    let l = l as i64;
    let mut p = Poly::new();
    for i in 0..=(l - 1) / 2 {
        add_coeff(&mut p, (l - 1 - 2 * i) as usize, sign(i) * binom(l - 1 - i, i));
    }
    trim(p)
}

/// [P_l] / [V_n] = Σ (-1)^i (n-l)/(n-l-i) C(n-l-i, i) y^{n-l-2i}.
pub fn projective_poly(n: u32, l: u32) -> Poly {
    let k = (n - l) as i64;
    let mut p = Poly::new();
    for i in 0..=k / 2 {
        add_coeff(&mut p, (k - 2 * i) as usize, sign(i) * ratio_binom(k, k - i, k - i, i));
    }
    trim(p)
}

/// Σ_{i=0}^{⌊r/2⌋} (-1)^i r/(r-i) C(r-i, i) y^{r-2i}, the ladder polynomial.
pub fn ladder_poly(r: u32) -> Poly {
    let r = r as i64;
    let mut p = Poly::new();
    for i in 0..=r / 2 {
        if r - i == 0 {
            continue;
        }
        add_coeff(&mut p, (r - 2 * i) as usize, sign(i) * ratio_binom(r, r - i, r - i, i));
    }
    trim(p)
}

#[derive(Clone, Debug)]
pub struct StructurePolys {
    pub f: [Poly; 4],
    pub g: [Poly; 4],
}

impl StructurePolys {
    pub fn new(n: u32) -> Self {
        let n = n as i64;
        let h = (n - 1) / 2;
        let mut f1 = Poly::new();
        let mut f2 = Poly::new();
        let mut f3 = Poly::new();
        let mut f4 = Poly::new();
        for i in 0..=h {
            add_coeff(&mut f1, (n - 1 - 2 * i) as usize, sign(i) * binom(n - 1 - i, i));
            add_coeff(&mut f2, (n - 2 * i) as usize, sign(i) * ratio_binom(n, n - i, n - i, i));
        }
        add_coeff(&mut f2, 0, BigInt::from(-2));
        for i in 1..=h {
            add_coeff(&mut f3, (n - 1 - 2 * i) as usize, sign(i - 1) * binom(n - i - 2, i - 1));
            add_coeff(&mut f4, (n - 2 * i) as usize, sign(i - 1) * binom(n - i - 1, i - 1));
        }
        let mut g1 = Poly::new();
        for i in 0..=(n + 1) / 4 {
            add_coeff(&mut g1, ((n + 1) / 2 - 2 * i) as usize, sign(i) * ratio_binom(n + 1, n + 1 - 2 * i, (n + 1) / 2 - i, i));
        }
        let mut g2 = Poly::new();
        for i in 0..=(n - 1) / 4 {
            add_coeff(&mut g2, ((n - 1) / 2 - 2 * i) as usize, sign(i) * ratio_binom(n - 1, n - 1 - 2 * i, (n - 1) / 2 - i, i));
        }
        let mut g3 = Poly::new();
        for i in 2..=h {
            add_coeff(&mut g3, (n - 2 * i) as usize, sign(i) * binom(n - 2 - i, i - 2));
        }
        add_coeff(&mut g3, 2, BigInt::one());
        add_coeff(&mut g3, 0, BigInt::from(-1));
        let mut g4 = Poly::new();
        for k in 1..=h {
            for i in 0..=(n - 1 - 2 * k) / 4 {
                add_coeff(&mut g4, k as usize, sign(i) * ratio_binom(k + 2 * i, k + i, k + i, i));
            }
        }
        for i in 1..=(n - 1) / 4 {
            add_coeff(&mut g4, 0, sign(i) * BigInt::from(2));
        }
        add_coeff(&mut g4, 0, BigInt::one());
        StructurePolys {
            f: [trim(f1), trim(f2), trim(f3), trim(f4)],
            g: [trim(g1), trim(g2), trim(g3), trim(g4)],
        }
    }
}

pub fn poly_to_string(p: &Poly) -> String {
    let mut e = GreenElem::zero();
    for (d, c) in p.iter().enumerate() {
        e.add_term(Monomial::y_pow(d as u32), c.clone());
    }
    e.to_string()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub y: u32,
    pub x: Vec<u32>,
    pub eps: Vec<u32>,
    pub zp: u32,
    pub zm: u32,
    pub w: Vec<(u32, String)>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial {
            y: 0,
            x: vec![],
            eps: vec![],
            zp: 0,
            zm: 0,
            w: vec![],
        }
    }

    pub fn y_pow(k: u32) -> Self {
        Monomial { y: k, ..Self::one() }
    }

    pub fn x(t: u32) -> Self {
        Monomial { x: vec![t], ..Self::one() }
    }

    pub fn eps(t: u32) -> Self {
        Monomial { eps: vec![t], ..Self::one() }
    }

    pub fn z(sign: Sign, s: u32) -> Self {
        match sign {
            Sign::Plus => Monomial { zp: s, ..Self::one() },
            Sign::Minus => Monomial { zm: s, ..Self::one() },
        }
    }

    pub fn w(s: u32, eta: &str) -> Self {
        Monomial {
            w: vec![(s, eta.to_string())],
            ..Self::one()
        }
    }

    pub fn times(&self, other: &Monomial) -> Monomial {
        let mut x = self.x.clone();
        x.extend(other.x.iter().copied());
        x.sort();
        let mut eps = self.eps.clone();
        eps.extend(other.eps.iter().copied());
        eps.sort();
        let mut w = self.w.clone();
        w.extend(other.w.iter().cloned());
        w.sort();
        Monomial {
            y: self.y + other.y,
            x,
            eps,
            zp: self.zp + other.zp,
            zm: self.zm + other.zm,
            w,
        }
    }

    fn with_y(&self, y: u32) -> Monomial {
        Monomial { y, ..self.clone() }
    }

    fn xe_count(&self) -> usize {
        self.x.len() + self.eps.len()
    }

    /// Member of the normal basis of r(Ũ_q).
    pub fn is_normal(&self, n: u32) -> bool {
        let xe = self.xe_count();
        let z = (self.zp > 0) as usize + (self.zm > 0) as usize;
        let w = self.w.len();
        match (xe, z, w) {
            (0, 0, 0) => self.y <= 2 * n - 2,
            (1, 0, 0) if self.x.len() == 1 => self.y <= (n - 1) / 2,
            (1, 0, 0) => self.y <= (n - 3) / 2,
            (0, 1, 0) | (0, 0, 1) => self.y <= n - 2,
            _ => false,
        }
    }

    /// Member of the normal basis of the stable ring.
    pub fn is_stable_normal(&self, n: u32) -> bool {
        let z = (self.zp > 0) as usize + (self.zm > 0) as usize;
        self.xe_count() == 0 && z + self.w.len() <= 1 && self.y <= n - 2
    }

    fn display_key(&self) -> (u8, Vec<u32>, u32, Vec<(u32, String)>, u32) {
        let kind = if !self.x.is_empty() {
            1
        } else if !self.eps.is_empty() {
            2
        } else if self.zp > 0 {
            3
        } else if self.zm > 0 {
            4
        } else if !self.w.is_empty() {
            5
        } else {
            0
        };
        let ts: Vec<u32> = self.x.iter().chain(&self.eps).copied().collect();
        (kind, ts, self.zp + self.zm, self.w.clone(), self.y)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.y {
            0 => {}
            1 => parts.push("y".to_string()),
            k => parts.push(format!("y^{}", k)),
        }
        for t in &self.x {
            parts.push(format!("x{}", t));
        }
        for t in &self.eps {
            parts.push(format!("e{}", t));
        }
        for (s, name) in [(self.zp, "z+"), (self.zm, "z-")] {
            match s {
                0 => {}
                1 => parts.push(name.to_string()),
                k => parts.push(format!("{}^{}", name, k)),
            }
        }
        for (s, eta) in &self.w {
            parts.push(format!("w{},{}", s, eta));
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GreenElem {
    terms: BTreeMap<Monomial, BigInt>,
}

impl GreenElem {
    pub fn zero() -> Self {
        GreenElem::default()
    }

    pub fn one() -> Self {
        Self::monomial(Monomial::one())
    }

    pub fn monomial(m: Monomial) -> Self {
        let mut e = GreenElem::zero();
        e.add_term(m, BigInt::one());
        e
    }

    pub fn from_int(c: i64) -> Self {
        let mut e = GreenElem::zero();
        e.add_term(Monomial::one(), BigInt::from(c));
        e
    }

    /// p(y)·m, unreduced.
    pub fn from_poly(p: &Poly, m: &Monomial) -> Self {
        let mut e = GreenElem::zero();
        for (d, c) in p.iter().enumerate() {
            e.add_term(m.with_y(m.y + d as u32), c.clone());
        }
        e
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, BigInt> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> BigInt {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, m: Monomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m.clone()).or_insert_with(BigInt::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &GreenElem) -> GreenElem {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &GreenElem) -> GreenElem {
        self.add(&other.scale(&BigInt::from(-1)))
    }

    pub fn scale(&self, k: &BigInt) -> GreenElem {
        let mut out = GreenElem::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * k);
        }
        out
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.sorted_terms()
                .into_iter()
                .map(|(m, c)| json!({"monomial": m.to_string(), "coeff": c.to_string()}))
                .collect(),
        )
    }

    pub fn from_json(ring: &GreenRing, v: &Value) -> Result<GreenElem, GreenError> {
        let bad = |msg: &str| GreenError::Parse { pos: 0, msg: msg.to_string() };
        let arr = v.as_array().ok_or_else(|| bad("expected an array of terms"))?;
        let mut out = GreenElem::zero();
        for item in arr {
            let m = item
                .get("monomial")
                .and_then(|x| x.as_str())
                .ok_or_else(|| bad("term without monomial"))?;
            let c: BigInt = item
                .get("coeff")
                .and_then(|x| x.as_str())
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad("term without integer coeff"))?;
            let mono = ring.parse_monomial(m)?;
            out.add_term(mono, c);
        }
        Ok(out)
    }

    fn sorted_terms(&self) -> Vec<(&Monomial, &BigInt)> {
        let mut v: Vec<(&Monomial, &BigInt)> = self.terms.iter().collect();
        v.sort_by_key(|(m, _)| m.display_key());
        v
    }
}

impl fmt::Display for GreenElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.sorted_terms() {
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            if *m == Monomial::one() {
                write!(f, "{}", a)?;
            } else if a.is_one() {
                write!(f, "{}", m)?;
            } else {
                write!(f, "{}*{}", a, m)?;
            }
        }
        Ok(())
    }
}

type Terms = Vec<(Monomial, BigInt)>;

/// Polynomials derived once per n and used by the rewrite rules.
struct Derived {
    zz: Poly,          // 1 + f1(2y + 4f3)
    f1sq: Poly,        // f1²
    one_f4: Poly,      // 1 + f4
    f1_y_f3: Poly,     // f1(y + f3)
    f4_1_f1: Poly,     // (f4 + 1)f1
    g3_f1: Poly,       // g3 f1
    two_g4_1: Poly,    // 2g4 - 1
    y_top: Poly,       // y^{2n-1} - f1 f2
    x_top: Poly,       // y^d - (g1 - g2), d = (n+1)/2
    g4_tail: Poly,     // g4 - y^{(n-1)/2}
    f1_1_2f4: Poly,    // f1(1 + 2f4)
    f1_1_f4: Poly,     // f1(1 + f4)
    f1_tail: Poly,     // f1 - y^{n-1}
}

pub struct GreenRing {
    n: u32,
    polys: StructurePolys,
    d: Derived,
    full_cache: Mutex<HashMap<Monomial, GreenElem>>,
    stable_cache: Mutex<HashMap<Monomial, GreenElem>>,
}

const DEPTH_LIMIT: usize = 100_000;

impl GreenRing {
    pub fn new(n: u32) -> Result<Self, GreenError> {
        if n < 3 || n % 2 == 0 {
            return Err(GreenError::Range(format!("n = {} must be odd and greater than 2", n)));
        }
        let polys = StructurePolys::new(n);
        let [f1, f2, f3, f4] = polys.f.clone();
        let [g1, g2, g3, g4] = polys.g.clone();
        let y = poly_monomial(1, 1);
        let one = poly_const(1);
        let two = BigInt::from(2);
        let d = Derived {
            zz: poly_add(&one, &poly_mul(&f1, &poly_add(&poly_scale(&y, &two), &poly_scale(&f3, &BigInt::from(4))))),
            f1sq: poly_mul(&f1, &f1),
            one_f4: poly_add(&one, &f4),
            f1_y_f3: poly_mul(&f1, &poly_add(&y, &f3)),
            f4_1_f1: poly_mul(&poly_add(&f4, &one), &f1),
            g3_f1: poly_mul(&g3, &f1),
            two_g4_1: poly_sub(&poly_scale(&g4, &two), &one),
            y_top: poly_sub(&poly_monomial(2 * n as usize - 1, 1), &poly_mul(&f1, &f2)),
            x_top: poly_sub(&poly_monomial((n as usize + 1) / 2, 1), &poly_sub(&g1, &g2)),
            g4_tail: poly_sub(&g4, &poly_monomial((n as usize - 1) / 2, 1)),
            f1_1_2f4: poly_mul(&f1, &poly_add(&one, &poly_scale(&f4, &two))),
            f1_1_f4: poly_mul(&f1, &poly_add(&one, &f4)),
            f1_tail: poly_sub(&f1, &poly_monomial(n as usize - 1, 1)),
        };
        let ring = GreenRing {
            n,
            polys,
            d,
            full_cache: Mutex::new(HashMap::new()),
            stable_cache: Mutex::new(HashMap::new()),
        };
        ring.check_leading_terms()?;
        Ok(ring)
    }

    // the orientation of every rule relies on these leading terms
    fn check_leading_terms(&self) -> Result<(), GreenError> {
        let n = self.n as usize;
        let [f1, f2, _, _] = &self.polys.f;
        let [g1, g2, _, g4] = &self.polys.g;
        let monic = |p: &Poly, d: usize| p.len() == d + 1 && p[d].is_one();
        let ok = monic(f1, n - 1)
            && monic(f2, n)
            && monic(g1, (n + 1) / 2)
            && g2.len() <= (n + 1) / 2
            && monic(g4, (n - 1) / 2);
        if ok {
            Ok(())
        } else {
            Err(GreenError::Range("structure polynomials lack the expected leading terms".into()))
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn polys(&self) -> &StructurePolys {
        &self.polys
    }

    pub fn f(&self, i: usize) -> &Poly {
        &self.polys.f[i - 1]
    }

    pub fn g(&self, i: usize) -> &Poly {
        &self.polys.g[i - 1]
    }

    fn check_t(&self, t: u32) -> Result<(), GreenError> {
        if t == 0 || t >= self.n {
            return Err(GreenError::Range(format!("index {} outside 1..{}", t, self.n - 1)));
        }
        Ok(())
    }

    fn rewrite_full(&self, m: &Monomial) -> Terms {
        let n = self.n;
        let d = &self.d;
        let mut out = Terms::new();
        let poly_times = |out: &mut Terms, p: &Poly, base: &Monomial, k: &BigInt| {
            for (deg, c) in p.iter().enumerate() {
                if !c.is_zero() {
                    out.push((base.with_y(base.y + deg as u32), c * k));
                }
            }
        };
        let one = BigInt::one();
        // z+ z- = 1 + f1(2y + 4f3)
        if m.zp > 0 && m.zm > 0 {
            let base = Monomial { zp: m.zp - 1, zm: m.zm - 1, ..m.clone() };
            poly_times(&mut out, &d.zz, &base, &one);
            return out;
        }
        if m.w.len() >= 2 {
            let (k, eta) = m.w[0].clone();
            let (s, alpha) = m.w[1].clone();
            let mut base = m.clone();
            base.w.drain(0..2);
            if eta != alpha {
                poly_times(&mut out, &d.f1sq, &base, &BigInt::from(k * s));
            } else {
                let (a, b) = (k.min(s), k.max(s));
                let mut with_w = base.clone();
                with_w.w.push((a, eta));
                with_w.w.sort();
                poly_times(&mut out, &d.one_f4, &with_w, &one);
                poly_times(&mut out, &d.f1sq, &base, &BigInt::from((b - 1) * a));
            }
            return out;
        }
        if m.w.len() == 1 && (m.zp > 0 || m.zm > 0) {
            let k = BigInt::from(m.w[0].0);
            let plus = m.zp > 0;
            let mut base = m.clone();
            if plus {
                base.zp -= 1;
            } else {
                base.zm -= 1;
            }
            poly_times(&mut out, self.f(4), &base, &one);
            base.w.clear();
            let tail = if plus { &d.f1sq } else { &d.f1_y_f3 };
            poly_times(&mut out, tail, &base, &k);
            return out;
        }
        if m.xe_count() >= 2 {
            let mut factors: Vec<(bool, u32)> = m.x.iter().map(|&t| (false, t)).chain(m.eps.iter().map(|&t| (true, t))).collect();
            let (e1, t1) = factors.remove(0);
            let (e2, t2) = factors.remove(0);
            let mut base = m.clone();
            base.x = factors.iter().filter(|f| !f.0).map(|f| f.1).collect();
            base.eps = factors.iter().filter(|f| f.0).map(|f| f.1).collect();
            let s = t1 + t2;
            if s == n {
                let p = if e1 && e2 { &d.g3_f1 } else { &d.f4_1_f1 };
                poly_times(&mut out, p, &base, &one);
            } else {
                let u = if s < n { s } else { s - n };
                let mut with_x = base.clone();
                with_x.x.push(u);
                with_x.x.sort();
                poly_times(&mut out, self.g(4), &with_x, &one);
            }
            return out;
        }
        if m.xe_count() == 1 && (m.zp > 0 || m.zm > 0) {
            let mut base = m.clone();
            if base.zp > 0 {
                base.zp -= 1;
            } else {
                base.zm -= 1;
            }
            poly_times(&mut out, &d.two_g4_1, &base, &one);
            return out;
        }
        if m.xe_count() == 1 && m.w.len() == 1 {
            let s = BigInt::from(m.w[0].0);
            let t = m.x.first().or(m.eps.first()).copied().unwrap();
            let base = Monomial {
                y: m.y,
                eps: vec![t],
                ..Monomial::one()
            };
            poly_times(&mut out, self.g(4), &base, &s);
            return out;
        }
        // y-degree reductions; the remaining monomial has a single non-y factor kind
        let minus_one = BigInt::from(-1);
        if m.xe_count() == 1 {
            if !m.x.is_empty() {
                let top = (n + 1) / 2;
                let base = m.with_y(m.y - top);
                poly_times(&mut out, &d.x_top, &base, &one);
            } else {
                let t = m.eps[0];
                let top = (n - 1) / 2;
                let y0 = m.y - top;
                let as_x = Monomial { y: y0, x: vec![t], ..Monomial::one() };
                poly_times(&mut out, self.g(4), &as_x, &one);
                poly_times(&mut out, &d.g4_tail, &m.with_y(y0), &minus_one);
            }
            return out;
        }
        if m.zp > 0 || m.zm > 0 {
            let y0 = m.y - (n - 1);
            let mut lower = m.with_y(y0);
            let same = lower.clone();
            if lower.zp > 0 {
                lower.zp -= 1;
            } else {
                lower.zm -= 1;
            }
            poly_times(&mut out, &d.f1_1_2f4, &lower, &one);
            poly_times(&mut out, &d.f1_tail, &same, &minus_one);
            return out;
        }
        if m.w.len() == 1 {
            let y0 = m.y - (n - 1);
            let k = BigInt::from(m.w[0].0);
            poly_times(&mut out, &d.f1_1_f4, &Monomial::y_pow(y0), &k);
            poly_times(&mut out, &d.f1_tail, &m.with_y(y0), &minus_one);
            return out;
        }
        let y0 = m.y - (2 * n - 1);
        poly_times(&mut out, &d.y_top, &Monomial::y_pow(y0), &one);
        out
    }

    fn rewrite_stable(&self, m: &Monomial) -> Terms {
        let n = self.n;
        let one = BigInt::one();
        let mut out = Terms::new();
        let poly_times = |out: &mut Terms, p: &Poly, base: &Monomial, k: &BigInt| {
            for (deg, c) in p.iter().enumerate() {
                if !c.is_zero() {
                    out.push((base.with_y(base.y + deg as u32), c * k));
                }
            }
        };
        if m.xe_count() > 0 {
            return out;
        }
        if m.zp > 0 && m.zm > 0 {
            out.push((Monomial { zp: m.zp - 1, zm: m.zm - 1, ..m.clone() }, one));
            return out;
        }
        if m.w.len() >= 2 {
            let (k, eta) = m.w[0].clone();
            let (s, alpha) = m.w[1].clone();
            if eta != alpha {
                return out;
            }
            let mut base = m.clone();
            base.w.drain(0..2);
            base.w.push((k.min(s), eta));
            base.w.sort();
            poly_times(&mut out, &self.d.one_f4, &base, &one);
            return out;
        }
        if m.w.len() == 1 && (m.zp > 0 || m.zm > 0) {
            let mut base = m.clone();
            if base.zp > 0 {
                base.zp -= 1;
            } else {
                base.zm -= 1;
            }
            poly_times(&mut out, self.f(4), &base, &one);
            return out;
        }
        // y^{n-1} = y^{n-1} - f1
        let base = m.with_y(m.y - (n - 1));
        poly_times(&mut out, &self.d.f1_tail, &base, &BigInt::from(-1));
        out
    }

    fn reduce_monomial(&self, m: &Monomial, stable: bool, depth: usize) -> Result<GreenElem, GreenError> {
        let normal = if stable { m.is_stable_normal(self.n) } else { m.is_normal(self.n) };
        if normal {
            return Ok(GreenElem::monomial(m.clone()));
        }
        if depth > DEPTH_LIMIT {
            return Err(GreenError::Budget(m.to_string()));
        }
        let cache = if stable { &self.stable_cache } else { &self.full_cache };
        if let Some(e) = cache.lock().unwrap().get(m) {
            return Ok(e.clone());
        }
        let terms = if stable { self.rewrite_stable(m) } else { self.rewrite_full(m) };
        let mut acc = GreenElem::zero();
        for (child, c) in terms {
            let r = self.reduce_monomial(&child, stable, depth + 1)?;
            acc = acc.add(&r.scale(&c));
        }
        cache.lock().unwrap().insert(m.clone(), acc.clone());
        Ok(acc)
    }

    fn reduce_with(&self, e: &GreenElem, stable: bool) -> Result<GreenElem, GreenError> {
        let mut acc = GreenElem::zero();
        for (m, c) in e.terms() {
            acc = acc.add(&self.reduce_monomial(m, stable, 0)?.scale(c));
        }
        Ok(acc)
    }

    /// Normal form in r(Ũ_q).
    pub fn reduce(&self, e: &GreenElem) -> Result<GreenElem, GreenError> {
        self.reduce_with(e, false)
    }

    /// Normal form in the stable ring.
    pub fn reduce_stable(&self, e: &GreenElem) -> Result<GreenElem, GreenError> {
        self.reduce_with(e, true)
    }

    fn raw_product(a: &GreenElem, b: &GreenElem) -> GreenElem {
        let mut out = GreenElem::zero();
        for (ma, ca) in a.terms() {
            for (mb, cb) in b.terms() {
                out.add_term(ma.times(mb), ca * cb);
            }
        }
        out
    }

    pub fn mul(&self, a: &GreenElem, b: &GreenElem) -> Result<GreenElem, GreenError> {
        let mut acc = GreenElem::zero();
        for (ma, ca) in a.terms() {
            for (mb, cb) in b.terms() {
                let r = self.reduce_monomial(&ma.times(mb), false, 0)?;
                acc = acc.add(&r.scale(&(ca * cb)));
            }
        }
        Ok(acc)
    }

    pub fn mul_stable(&self, a: &GreenElem, b: &GreenElem) -> Result<GreenElem, GreenError> {
        self.reduce_stable(&Self::raw_product(a, b))
    }

    pub fn mul_all(&self, items: &[GreenElem]) -> Result<GreenElem, GreenError> {
        let mut acc = GreenElem::one();
        for it in items {
            acc = self.mul(&acc, it)?;
        }
        Ok(acc)
    }

    pub fn pow(&self, a: &GreenElem, k: u32) -> Result<GreenElem, GreenError> {
        let mut acc = GreenElem::one();
        for _ in 0..k {
            acc = self.mul(&acc, a)?;
        }
        Ok(acc)
    }

    pub fn poly(&self, p: &Poly) -> Result<GreenElem, GreenError> {
        self.reduce(&GreenElem::from_poly(p, &Monomial::one()))
    }

    /// Image in the stable ring (quotient by the ideal of [V_n]).
    pub fn to_stable(&self, e: &GreenElem) -> Result<GreenElem, GreenError> {
        self.reduce_stable(e)
    }

    /// [V(t, r)] for any r ≥ 0 by the (y² - 2) recursion, unreduced in r.
    pub fn block_simple_class(&self, t: u32, r: u32) -> Result<GreenElem, GreenError> {
        self.check_t(t)?;
        match r {
            0 => return Ok(GreenElem::monomial(Monomial::x(t))),
            1 => return Ok(GreenElem::monomial(Monomial::eps(t))),
            _ => {}
        }
        let c = poly_sub(&poly_monomial(2, 1), &poly_const(2));
        let powers: Vec<Poly> = {
            let mut v = vec![poly_const(1)];
            for k in 1..r as usize {
                let next = poly_mul(&v[k - 1], &c);
                v.push(next);
            }
            v
        };
        let r = r as i64;
        let mut pe = Poly::new();
        for i in 0..=(r - 1) / 2 {
            pe = poly_add(&pe, &poly_scale(&powers[(r - 1 - 2 * i) as usize], &(sign(i) * binom(r - 1 - i, i))));
        }
        let mut px = Poly::new();
        for i in 0..=(r - 2) / 2 {
            px = poly_add(&px, &poly_scale(&powers[(r - 2 - 2 * i) as usize], &(sign(i) * binom(r - 2 - i, i))));
        }
        let raw = GreenElem::from_poly(&pe, &Monomial::eps(t)).sub(&GreenElem::from_poly(&px, &Monomial::x(t)));
        self.reduce(&raw)
    }

    /// Class of a label in normal form.
    pub fn from_label(&self, label: &IndecompLabel) -> Result<GreenElem, GreenError> {
        self.from_label_with(label, &BTreeMap::new())
    }

    /// As from_label, consulting derived classes for labels the presentation
    /// does not express.
    pub fn from_label_with(&self, label: &IndecompLabel, derived: &BTreeMap<IndecompLabel, GreenElem>) -> Result<GreenElem, GreenError> {
        let n = self.n;
        match label {
            IndecompLabel::Simple(l) if (1..=n).contains(l) => self.poly(&simple_poly(*l)),
            IndecompLabel::Proj(l) if (1..n).contains(l) => self.poly(&poly_mul(&projective_poly(n, *l), self.f(1))),
            IndecompLabel::BlockSimple(t, r) => self.block_simple_class(*t, r % n),
            IndecompLabel::Syzygy(sg, 1, 1) => Ok(GreenElem::monomial(Monomial::z(*sg, 1))),
            IndecompLabel::Band(s, 1, eta) if *s >= 1 => Ok(GreenElem::monomial(Monomial::w(*s, eta))),
            other => derived
                .get(other)
                .cloned()
                .ok_or_else(|| GreenError::Unsupported(other.to_string())),
        }
    }

    pub fn from_claim(&self, claim: &BTreeMap<IndecompLabel, usize>, derived: &BTreeMap<IndecompLabel, GreenElem>) -> Result<GreenElem, GreenError> {
        let mut acc = GreenElem::zero();
        for (l, k) in claim {
            acc = acc.add(&self.from_label_with(l, derived)?.scale(&BigInt::from(*k)));
        }
        Ok(acc)
    }

    /// Normal basis of r_p(Ū_q) (powers of y).
    pub fn basis_rp_bar(&self) -> Vec<Monomial> {
        (0..=2 * self.n - 2).map(Monomial::y_pow).collect()
    }

    /// Normal basis of r_p(Ũ_q).
    pub fn basis_rp(&self) -> Vec<Monomial> {
        let n = self.n;
        let mut out = self.basis_rp_bar();
        for t in 1..n {
            for k in 0..=(n - 1) / 2 {
                out.push(Monomial { y: k, x: vec![t], ..Monomial::one() });
            }
            for i in 0..=(n - 3) / 2 {
                out.push(Monomial { y: i, eps: vec![t], ..Monomial::one() });
            }
        }
        out
    }

    /// Normal monomials of r(Ũ_q) with s ≤ s_max over the given η labels.
    pub fn basis_full(&self, s_max: u32, etas: &[String]) -> Vec<Monomial> {
        let n = self.n;
        let mut out = self.basis_rp();
        for s in 1..=s_max {
            for l in 0..=n - 2 {
                out.push(Monomial { y: l, zp: s, ..Monomial::one() });
                out.push(Monomial { y: l, zm: s, ..Monomial::one() });
                for eta in etas {
                    out.push(Monomial {
                        y: l,
                        w: vec![(s, eta.clone())],
                        ..Monomial::one()
                    });
                }
            }
        }
        out
    }

    /// Parse and evaluate an expression in the generators.
    pub fn parse(&self, src: &str) -> Result<GreenElem, GreenError> {
        let mut p = Parser {
            ring: self,
            src,
            toks: lex(src)?,
            pos: 0,
        };
        let e = p.expr()?;
        if p.pos < p.toks.len() {
            return Err(GreenError::Parse {
                pos: p.toks[p.pos].1,
                msg: "unexpected token".into(),
            });
        }
        Ok(e)
    }

    fn parse_monomial(&self, s: &str) -> Result<Monomial, GreenError> {
        let e = self.parse(s)?;
        // a normal monomial parses to itself
        if e.terms().len() == 1 {
            let (m, c) = e.terms().iter().next().unwrap();
            if c.is_one() {
                return Ok(m.clone());
            }
        }
        Err(GreenError::Parse {
            pos: 0,
            msg: format!("`{}` is not a normal monomial", s),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Y,
    X(u32),
    E(u32),
    Z(Sign),
    W(u32, String),
    Named(char, usize),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, GreenError> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |pos: usize, msg: &str| GreenError::Parse { pos, msg: msg.to_string() };
    let digits = |i: &mut usize| -> Option<String> {
        let start = *i;
        while *i < chars.len() && chars[*i].1.is_ascii_digit() {
            *i += 1;
        }
        if *i == start {
            None
        } else {
            Some(chars[start..*i].iter().map(|c| c.1).collect())
        }
    };
    while i < chars.len() {
        let (pos, c) = chars[i];
        match c {
            ' ' | '\t' | '\n' => i += 1,
            '+' => {
                out.push((Tok::Plus, pos));
                i += 1
            }
            '-' => {
                out.push((Tok::Minus, pos));
                i += 1
            }
            '*' => {
                out.push((Tok::Star, pos));
                i += 1
            }
            '^' => {
                out.push((Tok::Caret, pos));
                i += 1
            }
            '(' => {
                out.push((Tok::LParen, pos));
                i += 1
            }
            ')' => {
                out.push((Tok::RParen, pos));
                i += 1
            }
            '0'..='9' => {
                let d = digits(&mut i).unwrap();
                out.push((Tok::Num(d.parse().unwrap()), pos));
            }
            'y' => {
                out.push((Tok::Y, pos));
                i += 1
            }
            'x' | 'e' => {
                i += 1;
                let d = digits(&mut i).ok_or_else(|| err(pos, "expected an index after x/e"))?;
                let t: u32 = d.parse().map_err(|_| err(pos, "index too large"))?;
                out.push((if c == 'x' { Tok::X(t) } else { Tok::E(t) }, pos));
            }
            'f' | 'g' => {
                i += 1;
                let d = digits(&mut i).ok_or_else(|| err(pos, "expected 1..4 after f/g"))?;
                let k: usize = d.parse().map_err(|_| err(pos, "bad index"))?;
                if !(1..=4).contains(&k) {
                    return Err(err(pos, "structure polynomials are f1..f4 and g1..g4"));
                }
                out.push((Tok::Named(c, k), pos));
            }
            'z' => {
                i += 1;
                match chars.get(i).map(|c| c.1) {
                    Some('+') => out.push((Tok::Z(Sign::Plus), pos)),
                    Some('-') => out.push((Tok::Z(Sign::Minus), pos)),
                    _ => return Err(err(pos, "expected z+ or z-")),
                }
                i += 1;
            }
            'w' => {
                i += 1;
                let d = digits(&mut i).ok_or_else(|| err(pos, "expected w<s>,<label>"))?;
                let s: u32 = d.parse().map_err(|_| err(pos, "index too large"))?;
                if chars.get(i).map(|c| c.1) != Some(',') {
                    return Err(err(pos, "expected ',' and a label after w<s>"));
                }
                i += 1;
                let start = i;
                while i < chars.len() && (chars[i].1.is_alphanumeric() || chars[i].1 == '_') {
                    i += 1;
                }
                if i == start {
                    return Err(err(pos, "empty band label"));
                }
                let name: String = chars[start..i].iter().map(|c| c.1).collect();
                out.push((Tok::W(s, name), pos));
            }
            _ => return Err(err(pos, &format!("unexpected character `{}`", c))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    ring: &'a GreenRing,
    src: &'a str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.src.len(), |t| t.1)
    }

    fn err(&self, msg: &str) -> GreenError {
        GreenError::Parse {
            pos: self.here(),
            msg: msg.to_string(),
        }
    }

    fn lift(&self, e: Result<GreenElem, GreenError>, at: usize) -> Result<GreenElem, GreenError> {
        e.map_err(|err| match err {
            GreenError::Range(m) => GreenError::Parse { pos: at, msg: m },
            other => other,
        })
    }

    fn expr(&mut self) -> Result<GreenElem, GreenError> {
        let mut acc = match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                self.term()?.scale(&BigInt::from(-1))
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn starts_factor(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Num(_) | Tok::Y | Tok::X(_) | Tok::E(_) | Tok::Z(_) | Tok::W(..) | Tok::Named(..) | Tok::LParen)
        )
    }

    fn term(&mut self) -> Result<GreenElem, GreenError> {
        let mut acc = self.factor()?;
        loop {
            let at = self.here();
            if self.peek() == Some(&Tok::Star) {
                self.pos += 1;
            } else if !self.starts_factor() {
                return Ok(acc);
            }
            let rhs = self.factor()?;
            acc = self.lift(self.ring.mul(&acc, &rhs), at)?;
        }
    }

    fn factor(&mut self) -> Result<GreenElem, GreenError> {
        let at = self.here();
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let k = match self.peek() {
                Some(Tok::Num(k)) => k.to_u32().ok_or_else(|| self.err("exponent too large"))?,
                _ => return Err(self.err("expected an exponent")),
            };
            self.pos += 1;
            return self.lift(self.ring.pow(&base, k), at);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<GreenElem, GreenError> {
        let at = self.here();
        let n = self.ring.n;
        let tok = self.peek().cloned().ok_or_else(|| self.err("unexpected end of expression"))?;
        self.pos += 1;
        let check = |t: u32| -> Result<(), GreenError> {
            if t == 0 || t >= n {
                Err(GreenError::Parse {
                    pos: at,
                    msg: format!("index {} outside 1..{}", t, n - 1),
                })
            } else {
                Ok(())
            }
        };
        match tok {
            Tok::Num(k) => Ok(GreenElem::one().scale(&k)),
            Tok::Y => Ok(GreenElem::monomial(Monomial::y_pow(1))),
            Tok::X(t) => {
                check(t)?;
                Ok(GreenElem::monomial(Monomial::x(t)))
            }
            Tok::E(t) => {
                check(t)?;
                Ok(GreenElem::monomial(Monomial::eps(t)))
            }
            Tok::Z(s) => Ok(GreenElem::monomial(Monomial::z(s, 1))),
            Tok::W(s, eta) => {
                if s == 0 {
                    return Err(GreenError::Parse {
                        pos: at,
                        msg: "band index must be at least 1".into(),
                    });
                }
                Ok(GreenElem::monomial(Monomial::w(s, &eta)))
            }
            Tok::Named(c, k) => {
                let p = if c == 'f' { self.ring.f(k) } else { self.ring.g(k) };
                self.lift(self.ring.poly(p), at)
            }
            Tok::LParen => {
                let e = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            _ => Err(GreenError::Parse {
                pos: at,
                msg: "expected a generator, number or `(`".into(),
            }),
        }
    }
}

/// Determinant of an integer matrix (fraction-free elimination).
pub fn integer_determinant(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !a[i][k].is_zero()) else {
            return BigInt::zero();
        };
        if p != k {
            a.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    sign * prev
}

/// One entry of a structured check report.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckLine {
    pub id: String,
    pub anchor: String,
    pub params: Value,
    pub passed: bool,
    pub detail: String,
}

impl CheckLine {
    fn zero_test(id: String, anchor: &str, params: Value, res: Result<GreenElem, GreenError>) -> CheckLine {
        match res {
            Ok(e) if e.is_zero() => CheckLine {
                id,
                anchor: anchor.into(),
                params,
                passed: true,
                detail: String::new(),
            },
            Ok(e) => CheckLine {
                id,
                anchor: anchor.into(),
                params,
                passed: false,
                detail: format!("residue {}", e),
            },
            Err(err) => CheckLine {
                id,
                anchor: anchor.into(),
                params,
                passed: false,
                detail: err.to_string(),
            },
        }
    }
}

/// A named generator of a relation set, as an element of the polynomial ring.
pub struct Relation {
    pub set: &'static str,
    pub name: String,
    pub raw: GreenElem,
}

fn e_poly(p: &Poly, m: &Monomial) -> GreenElem {
    GreenElem::from_poly(p, m)
}

fn mono(m: Monomial) -> GreenElem {
    GreenElem::monomial(m)
}

/// Default opaque band labels.
pub fn default_etas() -> Vec<String> {
    ["inf", "eta1", "eta2", "eta3", "eta4"].iter().map(|s| s.to_string()).collect()
}

impl GreenRing {
    /// The generators of I, U, J, U₀ and the stable set, unreduced.
    /// Band and syzygy indices run over 1..=s_max and the given labels.
    pub fn relations(&self, s_max: u32, etas: &[String]) -> Vec<Relation> {
        let n = self.n;
        let [f1, f2, f3, f4] = self.polys.f.clone();
        let [g1, g2, g3, g4] = self.polys.g.clone();
        let one = Monomial::one();
        let zp = Monomial::z(Sign::Plus, 1);
        let zm = Monomial::z(Sign::Minus, 1);
        let y = poly_monomial(1, 1);
        let c = |k: i64| poly_const(k);
        let mut out = Vec::new();
        let mut push = |set: &'static str, name: String, raw: GreenElem| out.push(Relation { set, name, raw });
        let f1f2 = e_poly(&poly_mul(&f1, &f2), &one);
        push("I_y", "f1*f2".into(), f1f2.clone());
        // I (for R = Z[y, z+, z-])
        let zz = mono(zp.times(&zm)).sub(&GreenElem::one()).sub(&e_poly(
            &poly_mul(&f1, &poly_add(&poly_scale(&y, &BigInt::from(2)), &poly_scale(&f3, &BigInt::from(4)))),
            &one,
        ));
        let f1_zp_1_2f4 = e_poly(&f1, &zp).sub(&e_poly(&poly_mul(&f1, &poly_add(&c(1), &poly_scale(&f4, &BigInt::from(2)))), &one));
        let f1_zp_zm = e_poly(&f1, &zp).sub(&e_poly(&f1, &zm));
        for set in ["I_R", "U", "T"] {
            push(set, "f1*f2".into(), f1f2.clone());
            push(set, "z+*z- - 1 - f1*(2y+4f3)".into(), zz.clone());
            push(set, "f1*(z+ - 1 - 2f4)".into(), f1_zp_1_2f4.clone());
            push(set, "f1*(z+ - z-)".into(), f1_zp_zm.clone());
        }
        let f1sq = poly_mul(&f1, &f1);
        for k in 1..=s_max {
            for eta in etas {
                let wk = Monomial::w(k, eta);
                let kk = BigInt::from(k);
                let mut u = vec![
                    (
                        format!("f1*(w{k},{eta} - {k} - {k}f4)"),
                        e_poly(&f1, &wk).sub(&e_poly(&poly_scale(&poly_mul(&f1, &poly_add(&c(1), &f4)), &kk), &one)),
                    ),
                    (
                        format!("(z+ - f4)*w{k},{eta} - {k}f1^2"),
                        mono(zp.times(&wk)).sub(&e_poly(&f4, &wk)).sub(&e_poly(&poly_scale(&f1sq, &kk), &one)),
                    ),
                    (
                        format!("(z- - f4)*w{k},{eta} - {k}f1*(y+f3)"),
                        mono(zm.times(&wk))
                            .sub(&e_poly(&f4, &wk))
                            .sub(&e_poly(&poly_scale(&poly_mul(&f1, &poly_add(&y, &f3)), &kk), &one)),
                    ),
                ];
                for s in 1..=s_max {
                    for alpha in etas {
                        if alpha != eta {
                            let ws = Monomial::w(s, alpha);
                            u.push((
                                format!("w{k},{eta}*w{s},{alpha} - {}f1^2", k * s),
                                mono(wk.times(&ws)).sub(&e_poly(&poly_scale(&f1sq, &BigInt::from(k * s)), &one)),
                            ));
                        }
                    }
                }
                for t in k..=s_max {
                    let wt = Monomial::w(t, eta);
                    u.push((
                        format!("w{k},{eta}*(w{t},{eta} - 1 - f4) - {}f1^2", (t - 1) * k),
                        mono(wk.times(&wt))
                            .sub(&mono(wk.clone()))
                            .sub(&e_poly(&f4, &wk))
                            .sub(&e_poly(&poly_scale(&f1sq, &BigInt::from((t - 1) * k)), &one)),
                    ));
                }
                for (name, raw) in u {
                    push("U", name.clone(), raw.clone());
                    push("T", name, raw);
                }
            }
        }
        // J (for Z[X'])
        let mut j = vec![("f1*f2".to_string(), f1f2.clone())];
        for t in 1..n {
            let (x, e) = (Monomial::x(t), Monomial::eps(t));
            j.push((format!("(g1-g2)*x{t}"), e_poly(&poly_sub(&g1, &g2), &x)));
            j.push((format!("g4*(x{t} - e{t})"), e_poly(&g4, &x).sub(&e_poly(&g4, &e))));
            for t2 in 1..n {
                let (x2, e2) = (Monomial::x(t2), Monomial::eps(t2));
                j.push((format!("x{t}*x{t2} - x{t}*e{t2}"), mono(x.times(&x2)).sub(&mono(x.times(&e2)))));
                if t + t2 != n {
                    j.push((format!("x{t}*x{t2} - e{t}*e{t2}"), mono(x.times(&x2)).sub(&mono(e.times(&e2)))));
                }
                if t + t2 < n {
                    j.push((format!("x{t}*x{t2} - g4*x{}", t + t2), mono(x.times(&x2)).sub(&e_poly(&g4, &Monomial::x(t + t2)))));
                }
                if t + t2 > n {
                    j.push((format!("x{t}*x{t2} - g4*x{}", t + t2 - n), mono(x.times(&x2)).sub(&e_poly(&g4, &Monomial::x(t + t2 - n)))));
                }
            }
            let xn = Monomial::x(n - t);
            let en = Monomial::eps(n - t);
            j.push((format!("x{t}*x{} - (f4+1)*f1", n - t), mono(x.times(&xn)).sub(&e_poly(&poly_mul(&poly_add(&f4, &c(1)), &f1), &one))));
            j.push((format!("e{t}*e{} - g3*f1", n - t), mono(e.times(&en)).sub(&e_poly(&poly_mul(&g3, &f1), &one))));
        }
        for (name, raw) in j {
            push("J", name.clone(), raw.clone());
            push("T", name, raw);
        }
        // U0
        let two_g4_1 = poly_sub(&poly_scale(&g4, &BigInt::from(2)), &c(1));
        for t in 1..n {
            let (x, e) = (Monomial::x(t), Monomial::eps(t));
            let mut u0 = vec![
                (format!("(z+ - z-)*x{t}"), mono(zp.times(&x)).sub(&mono(zm.times(&x)))),
                (format!("(z+ - z-)*e{t}"), mono(zp.times(&e)).sub(&mono(zm.times(&e)))),
                (format!("z+*x{t} - (2g4-1)*x{t}"), mono(zp.times(&x)).sub(&e_poly(&two_g4_1, &x))),
                (format!("z+*e{t} - (2g4-1)*e{t}"), mono(zp.times(&e)).sub(&e_poly(&two_g4_1, &e))),
            ];
            for s in 1..=s_max {
                for eta in etas {
                    let ws = Monomial::w(s, eta);
                    u0.push((format!("w{s},{eta}*x{t} - w{s},{eta}*e{t}"), mono(ws.times(&x)).sub(&mono(ws.times(&e)))));
                    u0.push((
                        format!("w{s},{eta}*x{t} - {s}g4*e{t}"),
                        mono(ws.times(&x)).sub(&e_poly(&poly_scale(&g4, &BigInt::from(s)), &e)),
                    ));
                }
            }
            for (name, raw) in u0 {
                push("U0", name.clone(), raw.clone());
                push("T", name, raw);
            }
        }
        // stable set over Y'
        push("stable", "f1".into(), e_poly(&f1, &one));
        push("stable", "z+*z- - 1".into(), mono(zp.times(&zm)).sub(&GreenElem::one()));
        for k in 1..=s_max {
            for eta in etas {
                let wk = Monomial::w(k, eta);
                push("stable", format!("(z+ - f4)*w{k},{eta}"), mono(zp.times(&wk)).sub(&e_poly(&f4, &wk)));
                push("stable", format!("(z+ - z-)*w{k},{eta}"), mono(zp.times(&wk)).sub(&mono(zm.times(&wk))));
                for s in 1..=s_max {
                    for alpha in etas {
                        if alpha != eta {
                            push("stable", format!("w{k},{eta}*w{s},{alpha}"), mono(wk.times(&Monomial::w(s, alpha))));
                        }
                    }
                }
                for t in k..=s_max {
                    let wt = Monomial::w(t, eta);
                    push(
                        "stable",
                        format!("w{k},{eta}*(w{t},{eta} - 1 - f4)"),
                        mono(wk.times(&wt)).sub(&mono(wk.clone())).sub(&e_poly(&f4, &wk)),
                    );
                }
            }
        }
        out
    }

    fn set_anchor(set: &str) -> &'static str {
        match set {
            "I_y" => "r_p(Ubar_q) = Z[y]/(f1 f2)",
            "I_R" => "R = Z[y,z+,z-]/I",
            "U" => "r(Ubar_q) = Z[X]/I_0",
            "J" => "r_p(Utilde_q) = Z[X']/J",
            "U0" | "T" => "r(Utilde_q) = Z[Y]/T",
            _ => "r_st(Utilde_q) = Z[Y']/J",
        }
    }

    /// Presentation checks: relation sets, normal-form closure, ranks and
    /// unimodularity of the class bases, and the stable quotient map.
    pub fn check_presentations(&self, s_max: u32, etas: &[String], seed: u64) -> Vec<CheckLine> {
        let n = self.n;
        let mut out = Vec::new();
        for rel in self.relations(s_max, etas) {
            let res = if rel.set == "stable" {
                self.reduce_stable(&rel.raw)
            } else {
                self.reduce(&rel.raw)
            };
            out.push(CheckLine::zero_test(
                format!("green.relation.{}", rel.set),
                Self::set_anchor(rel.set),
                json!({"n": n, "generator": rel.name}),
                res,
            ));
        }
        // normal monomials are fixed by reduction
        let basis = self.basis_full(s_max, etas);
        let closed: Vec<String> = basis
            .iter()
            .filter(|m| self.reduce(&mono((*m).clone())).ok() != Some(mono((*m).clone())))
            .map(|m| m.to_string())
            .collect();
        out.push(CheckLine {
            id: "green.basis.closed".into(),
            anchor: "basis {y^j, y^k x_t, y^i e_t, y^l z+^s, y^l z-^s, y^l w_s}".into(),
            params: json!({"n": n, "s_max": s_max, "monomials": basis.len()}),
            passed: closed.is_empty(),
            detail: closed.join(", "),
        });
        out.push(self.unimodular_check(
            "green.rank.rp_bar",
            "rank r_p(Ubar_q) = 2n-1",
            &self.basis_rp_bar(),
            &self.rp_bar_classes(),
        ));
        out.push(self.unimodular_check(
            "green.rank.rp",
            "rank r_p(Utilde_q) = n^2+n-1",
            &self.basis_rp(),
            &self.rp_classes(),
        ));
        out.extend(self.stable_quotient_checks(s_max, etas, seed));
        out
    }

    fn rp_bar_classes(&self) -> Vec<IndecompLabel> {
        let n = self.n;
        (1..=n)
            .map(IndecompLabel::Simple)
            .chain((1..n).map(IndecompLabel::Proj))
            .collect()
    }

    fn rp_classes(&self) -> Vec<IndecompLabel> {
        let n = self.n;
        let mut v = self.rp_bar_classes();
        for t in 1..n {
            for r in 0..n {
                v.push(IndecompLabel::BlockSimple(t, r));
            }
        }
        v
    }

    fn unimodular_check(&self, id: &str, anchor: &str, basis: &[Monomial], classes: &[IndecompLabel]) -> CheckLine {
        let params = json!({"n": self.n, "basis_size": basis.len(), "classes": classes.len()});
        let mut rows = Vec::new();
        let mut problem = None;
        for l in classes {
            match self.from_label(l) {
                Ok(e) => {
                    let outside: Vec<String> = e.terms().keys().filter(|m| !basis.contains(m)).map(|m| m.to_string()).collect();
                    if !outside.is_empty() {
                        problem = Some(format!("[{}] has terms outside the basis: {}", l, outside.join(", ")));
                    }
                    rows.push(basis.iter().map(|m| e.coeff(m)).collect::<Vec<_>>());
                }
                Err(err) => problem = Some(err.to_string()),
            }
        }
        if basis.len() != classes.len() {
            problem = Some(format!("{} basis monomials for {} classes", basis.len(), classes.len()));
        }
        if let Some(p) = problem {
            return CheckLine {
                id: id.into(),
                anchor: anchor.into(),
                params,
                passed: false,
                detail: p,
            };
        }
        let det = integer_determinant(rows);
        CheckLine {
            id: id.into(),
            anchor: anchor.into(),
            params,
            passed: det.abs().is_one(),
            detail: format!("det = {}", det),
        }
    }

    fn stable_quotient_checks(&self, s_max: u32, etas: &[String], seed: u64) -> Vec<CheckLine> {
        let n = self.n;
        let mut out = Vec::new();
        out.push(CheckLine::zero_test(
            "green.stable.vn".into(),
            "r_st = r / ([V_n])",
            json!({"n": n}),
            self.from_label(&IndecompLabel::Simple(n)).and_then(|v| self.to_stable(&v)),
        ));
        let zz = self
            .mul_stable(&mono(Monomial::z(Sign::Plus, 1)), &mono(Monomial::z(Sign::Minus, 1)))
            .map(|e| e.sub(&GreenElem::one()));
        out.push(CheckLine::zero_test(
            "green.stable.zz".into(),
            "stable z+ z- = 1",
            json!({"n": n}),
            zz,
        ));
        // the quotient map is multiplicative on sampled pairs of normal monomials
        let basis = self.basis_full(s_max.min(2), &etas[..etas.len().min(2)]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut bad = Vec::new();
        let samples = 60;
        for _ in 0..samples {
            let a = mono(basis[rng.gen_range(0..basis.len())].clone());
            let b = mono(basis[rng.gen_range(0..basis.len())].clone());
            let lhs = self.mul(&a, &b).and_then(|p| self.to_stable(&p));
            let rhs = self
                .to_stable(&a)
                .and_then(|sa| self.to_stable(&b).and_then(|sb| self.mul_stable(&sa, &sb)));
            if lhs != rhs {
                bad.push(format!("{} * {}", a, b));
            }
        }
        out.push(CheckLine {
            id: "green.stable.homomorphism".into(),
            anchor: "r_st = r / ([V_n])".into(),
            params: json!({"n": n, "samples": samples, "seed": seed}),
            passed: bad.is_empty(),
            detail: bad.join("; "),
        });
        out
    }

    /// Identities between classes that the relations must reproduce.
    pub fn check_lemmas(&self, s_max: u32, etas: &[String]) -> Vec<CheckLine> {
        let n = self.n;
        let mut out = Vec::new();
        let cls = |l: IndecompLabel| self.from_label(&l);
        let vn = || cls(IndecompLabel::Simple(n));
        let proj = |l: u32| if l == n { vn() } else { cls(IndecompLabel::Proj(l)) };
        let y = mono(Monomial::y_pow(1));
        let h = (n - 1) / 2;
        let sum = |items: Vec<Result<GreenElem, GreenError>>| -> Result<GreenElem, GreenError> {
            let mut acc = GreenElem::zero();
            for i in items {
                acc = acc.add(&i?);
            }
            Ok(acc)
        };
        let times_poly = |p: &Poly, e: Result<GreenElem, GreenError>| e.and_then(|e| self.mul(&self.poly(p)?, &e));
        let mut add = |id: &str, anchor: &str, params: Value, r: Result<GreenElem, GreenError>| {
            out.push(CheckLine::zero_test(format!("green.lemma.{}", id), anchor, params, r));
        };
        let p = json!({"n": n});
        add(
            "odd_projectives",
            "sum_i [P_{2i+1}] = [V_n]^2",
            p.clone(),
            sum((0..=h).map(|i| proj(2 * i + 1)).collect()).and_then(|s| Ok(s.sub(&self.mul(&vn()?, &vn()?)?))),
        );
        add(
            "odd_projectives_f3",
            "sum_{i>=1} [P_{2i+1}] = f3 [V_n]",
            p.clone(),
            sum((1..=h).map(|i| proj(2 * i + 1)).collect()).and_then(|s| Ok(s.sub(&times_poly(self.f(3), vn())?))),
        );
        add(
            "even_projectives_f4",
            "sum_{i>=1} [P_{2i}] = f4 [V_n]",
            p.clone(),
            sum((1..=h).map(|i| proj(2 * i)).collect()).and_then(|s| Ok(s.sub(&times_poly(self.f(4), vn())?))),
        );
        add("y_vn", "y [V_n] = [P_{n-1}]", p.clone(), vn().and_then(|v| Ok(self.mul(&y, &v)?.sub(&proj(n - 1)?))));
        add(
            "y_p1",
            "y [P_1] = [P_2] + 2[V_n]",
            p.clone(),
            proj(1).and_then(|p1| Ok(self.mul(&y, &p1)?.sub(&proj(2)?).sub(&vn()?.scale(&BigInt::from(2))))),
        );
        for j in 2..n - 1 {
            add(
                "y_pj",
                "y [P_j] = [P_{j+1}] + [P_{j-1}]",
                json!({"n": n, "j": j}),
                proj(j).and_then(|pj| Ok(self.mul(&y, &pj)?.sub(&proj(j + 1)?).sub(&proj(j - 1)?))),
            );
        }
        add(
            "y_pn1",
            "y [P_{n-1}] = 2[V_n] + [P_{n-2}]",
            p.clone(),
            proj(n - 1).and_then(|pl| Ok(self.mul(&y, &pl)?.sub(&vn()?.scale(&BigInt::from(2))).sub(&proj(n - 2)?))),
        );
        for j in 2..n {
            add(
                "y_vj",
                "y [V_j] = [V_{j+1}] + [V_{j-1}]",
                json!({"n": n, "j": j}),
                cls(IndecompLabel::Simple(j))
                    .and_then(|v| Ok(self.mul(&y, &v)?.sub(&cls(IndecompLabel::Simple(j + 1))?).sub(&cls(IndecompLabel::Simple(j - 1))?))),
            );
        }
        let zp = mono(Monomial::z(Sign::Plus, 1));
        let zm = mono(Monomial::z(Sign::Minus, 1));
        let two_y_4f3 = poly_add(&poly_monomial(1, 2), &poly_scale(self.f(3), &BigInt::from(4)));
        add(
            "zz",
            "z+ z- = 1 + (2y + 4 f3)[V_n]",
            p.clone(),
            times_poly(&two_y_4f3, vn()).and_then(|t| Ok(self.mul(&zp, &zm)?.sub(&GreenElem::one()).sub(&t))),
        );
        let one_2f4 = poly_add(&poly_const(1), &poly_scale(self.f(4), &BigInt::from(2)));
        for (name, z) in [("zp_vn", &zp), ("zm_vn", &zm)] {
            add(
                name,
                "z± [V_n] = (1 + 2 f4)[V_n]",
                p.clone(),
                vn().and_then(|v| Ok(self.mul(z, &v)?.sub(&times_poly(&one_2f4, Ok(v))?))),
            );
        }
        let one_f4 = poly_add(&poly_const(1), self.f(4));
        let y_f3 = poly_add(&poly_monomial(1, 1), self.f(3));
        for k in 1..=s_max {
            let eta = &etas[0];
            let wk = mono(Monomial::w(k, eta));
            let kk = BigInt::from(k);
            let prm = json!({"n": n, "k": k, "eta": eta});
            add(
                "w_vn",
                "w_k [V_n] = k(1 + f4)[V_n]",
                prm.clone(),
                vn().and_then(|v| Ok(self.mul(&wk, &v)?.sub(&times_poly(&one_f4, Ok(v))?.scale(&kk)))),
            );
            add(
                "zp_w",
                "z+ w_k = f4 w_k + k [V_n]^2",
                prm.clone(),
                vn().and_then(|v| {
                    Ok(self
                        .mul(&zp, &wk)?
                        .sub(&self.mul(&self.poly(self.f(4))?, &wk)?)
                        .sub(&self.mul(&v, &v)?.scale(&kk)))
                }),
            );
            add(
                "zm_w",
                "z- w_k = f4 w_k + k(y + f3)[V_n]",
                prm.clone(),
                vn().and_then(|v| {
                    Ok(self
                        .mul(&zm, &wk)?
                        .sub(&self.mul(&self.poly(self.f(4))?, &wk)?)
                        .sub(&times_poly(&y_f3, Ok(v))?.scale(&kk)))
                }),
            );
            for s in 1..=s_max {
                let ws_other = mono(Monomial::w(s, &etas[1 % etas.len()]));
                if etas.len() > 1 {
                    add(
                        "w_w_distinct",
                        "w_{k,eta} w_{s,alpha} = ks [V_n]^2 (eta != alpha)",
                        json!({"n": n, "k": k, "s": s}),
                        vn().and_then(|v| Ok(self.mul(&wk, &ws_other)?.sub(&self.mul(&v, &v)?.scale(&BigInt::from(k * s))))),
                    );
                }
                if k <= s {
                    let ws = mono(Monomial::w(s, eta));
                    add(
                        "w_w_same",
                        "w_{k,eta} w_{s,eta} = w_{k,eta}(1 + f4) + (s-1)k [V_n]^2 (k <= s)",
                        json!({"n": n, "k": k, "s": s}),
                        vn().and_then(|v| {
                            Ok(self
                                .mul(&wk, &ws)?
                                .sub(&self.mul(&wk, &self.poly(&one_f4)?)?)
                                .sub(&self.mul(&v, &v)?.scale(&BigInt::from((s - 1) * k))))
                        }),
                    );
                }
            }
        }
        let g4 = self.g(4).clone();
        let two_g4_1 = poly_sub(&poly_scale(&g4, &BigInt::from(2)), &poly_const(1));
        for t in 1..n {
            let x = mono(Monomial::x(t));
            let e = mono(Monomial::eps(t));
            let prm = json!({"n": n, "t": t});
            for (name, z) in [("zp", &zp), ("zm", &zm)] {
                for (kind, v) in [("x", &x), ("e", &e)] {
                    add(
                        &format!("{}_{}", name, kind),
                        "z± x_t = (2g - 1) x_t, z± e_t = (2g - 1) e_t",
                        prm.clone(),
                        self.mul(z, v).and_then(|l| Ok(l.sub(&times_poly(&two_g4_1, Ok(v.clone()))?))),
                    );
                }
            }
            for s in 1..=s_max {
                let ws = mono(Monomial::w(s, &etas[0]));
                for (kind, v) in [("x", &x), ("e", &e)] {
                    add(
                        &format!("w_{}", kind),
                        "w_s x_t = w_s e_t = s g e_t",
                        json!({"n": n, "t": t, "s": s}),
                        self.mul(&ws, v).and_then(|l| Ok(l.sub(&times_poly(&g4, Ok(e.clone()))?.scale(&BigInt::from(s))))),
                    );
                }
            }
            // ladder: polynomial times x_t / e_t is a sum of two block simples
            for r in 1..=n {
                let lad = ladder_poly(r);
                let (a, b) = if r % 2 == 1 {
                    (((n - r) / 2) as i64, ((n + r) / 2) as i64)
                } else {
                    (-((r / 2) as i64), (r / 2) as i64)
                };
                for (kind, shift, v) in [("x", 0i64, &x), ("e", 1i64, &e)] {
                    let rr = |k: i64| (k + shift).rem_euclid(n as i64) as u32;
                    add(
                        &format!("ladder_{}", kind),
                        "y-ladder: p_r(y) x_t = [V(t,(n-r)/2)] + [V(t,(n+r)/2)] (r odd), [V(t,-r/2)] + [V(t,r/2)] (r even)",
                        json!({"n": n, "t": t, "r": r}),
                        times_poly(&lad, Ok(v.clone())).and_then(|l| {
                            Ok(l.sub(&self.block_simple_class(t, rr(a))?).sub(&self.block_simple_class(t, rr(b))?))
                        }),
                    );
                }
            }
            // the (y^2 - 2) recursion is periodic in r with period n
            for r in [n, n + 1] {
                add(
                    "block_simple_period",
                    "[V(t,r)] = [V(t,r+n)]",
                    json!({"n": n, "t": t, "r": r}),
                    self.block_simple_class(t, r).and_then(|c| Ok(c.sub(&self.block_simple_class(t, r - n)?))),
                );
            }
        }
        out
    }

    /// Human-readable listing of the structure polynomials and relation sets.
    pub fn audit_text(&self, s_max: u32, etas: &[String]) -> String {
        let mut s = String::new();
        s.push_str(&format!("n = {}\n\n", self.n));
        for i in 1..=4 {
            s.push_str(&format!("f{} = {}\n", i, poly_to_string(self.f(i))));
        }
        for i in 1..=4 {
            s.push_str(&format!("g{} = {}\n", i, poly_to_string(self.g(i))));
        }
        let mut current = "";
        for rel in self.relations(s_max, etas) {
            if rel.set != current {
                current = rel.set;
                s.push_str(&format!("\n[{}] {}\n", rel.set, Self::set_anchor(rel.set)));
            }
            s.push_str(&format!("  {}  =  {}\n", rel.name, rel.raw));
        }
        s
    }
}

/// One product computed both in the ring and by decomposing a tensor product.
#[derive(Clone, Debug)]
pub struct CrossEntry {
    pub factors: Vec<IndecompLabel>,
    pub symbolic: GreenElem,
    pub summands: Claim,
    pub constructive: Option<GreenElem>,
    pub verified: bool,
    pub unverified: bool,
    pub detail: String,
}

impl CrossEntry {
    pub fn agrees(&self) -> bool {
        self.constructive.as_ref() == Some(&self.symbolic) && self.verified
    }

    pub fn to_json(&self) -> Value {
        json!({
            "factors": self.factors.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
            "symbolic": self.symbolic.to_string(),
            "decomposition": claim_to_string(&self.summands),
            "constructive": self.constructive.as_ref().map(|c| c.to_string()),
            "verified": self.verified,
            "unverified": self.unverified,
            "detail": self.detail,
        })
    }
}

/// Products that must appear in every crosscheck: y·x_t, x_t·x_t' on each side
/// of t + t' = n, z+·x_t, z+·z- and y^k·[V_n].
pub fn required_products(n: u32) -> Vec<Vec<IndecompLabel>> {
    use IndecompLabel::*;
    let mut out = Vec::new();
    for t in 1..n {
        out.push(vec![Simple(2), BlockSimple(t, 0)]);
    }
    out.push(vec![BlockSimple(1, 0), BlockSimple(1, 0)]);
    out.push(vec![BlockSimple(1, 0), BlockSimple(n - 1, 0)]);
    out.push(vec![BlockSimple(n - 1, 0), BlockSimple(n - 1, 0)]);
    out.push(vec![BlockSimple(1, 1), BlockSimple(n - 1, 1)]);
    out.push(vec![Syzygy(Sign::Plus, 1, 1), BlockSimple(1, 0)]);
    out.push(vec![Syzygy(Sign::Minus, 1, 1), BlockSimple(n - 1, 1)]);
    out.push(vec![Syzygy(Sign::Plus, 1, 1), Syzygy(Sign::Minus, 1, 1)]);
    for k in 1..=3 {
        let mut f = vec![Simple(2); k];
        f.push(Simple(n));
        out.push(f);
    }
    out
}

/// Labels the random part of the crosscheck draws from.
pub fn product_pool(n: u32) -> Vec<IndecompLabel> {
    use IndecompLabel::*;
    let mut pool: Vec<IndecompLabel> = (1..=n).map(Simple).collect();
    pool.extend((1..n).map(Proj));
    for t in 1..n {
        for r in 0..n {
            pool.push(BlockSimple(t, r));
        }
    }
    pool.push(Syzygy(Sign::Plus, 1, 1));
    pool.push(Syzygy(Sign::Minus, 1, 1));
    pool
}

// A pair whose product decomposes into labels with known classes.
fn closed_pair(n: u32, a: &IndecompLabel, b: &IndecompLabel) -> bool {
    use IndecompLabel::*;
    let absorbing = |l: &IndecompLabel| matches!(l, BlockSimple(..) | Proj(_)) || *l == Simple(n);
    let simple = |l: &IndecompLabel| matches!(l, Simple(_));
    let z = |l: &IndecompLabel, s: Sign| *l == Syzygy(s, 1, 1);
    absorbing(a)
        || absorbing(b)
        || (simple(a) && simple(b))
        || (z(a, Sign::Plus) && z(b, Sign::Minus))
        || (z(a, Sign::Minus) && z(b, Sign::Plus))
}

/// Random factor pairs from the pool, restricted to closed pairs.
pub fn sampled_products(n: u32, count: usize, seed: u64) -> Vec<Vec<IndecompLabel>> {
    let pool = product_pool(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let a = &pool[rng.gen_range(0..pool.len())];
        let b = &pool[rng.gen_range(0..pool.len())];
        if closed_pair(n, a, b) {
            out.push(vec![a.clone(), b.clone()]);
        }
    }
    out
}

impl GreenRing {
    /// Decompose the tensor product of the factors, verify the decomposition
    /// with an explicit isomorphism, and compare its class with the ring product.
    pub fn crosscheck_product(&self, engine: &Engine, factors: &[IndecompLabel], tag: &str) -> Result<CrossEntry, GreenError> {
        let he = |e: HomError| GreenError::Unsupported(e.to_string());
        let mut symbolic = GreenElem::one();
        for f in factors {
            symbolic = self.mul(&symbolic, &self.from_label(f)?)?;
        }
        let mut module: Option<Representation> = None;
        for f in factors {
            let x = engine.build(f).map_err(he)?;
            module = Some(match module {
                None => (*x).clone(),
                Some(m) => tensor(&m, &x).map_err(|e| he(e.into()))?,
            });
        }
        let module = module.unwrap_or_else(|| unreachable!());
        let dec = decompose(engine, &module).map_err(he)?;
        let mut detail = String::new();
        if let Some(rest) = &dec.unidentified {
            detail = format!("unidentified summand of dimension {}", rest.dim());
        }
        let constructive = if dec.unidentified.is_none() {
            match self.from_claim(&dec.summands, &BTreeMap::new()) {
                Ok(c) => Some(c),
                Err(e) => {
                    detail = e.to_string();
                    None
                }
            }
        } else {
            None
        };
        let mut unverified = false;
        let verified = if dec.unidentified.is_none() {
            match verify_claim(engine, &module, &dec.summands, tag).map_err(he)? {
                ClaimOutcome::Verified(_) => true,
                ClaimOutcome::Refuted(d) => {
                    detail = d.detail;
                    false
                }
                ClaimOutcome::Unverified(d) => {
                    detail = d.detail;
                    unverified = true;
                    false
                }
            }
        } else {
            false
        };
        Ok(CrossEntry {
            factors: factors.to_vec(),
            symbolic,
            summands: dec.summands,
            constructive,
            verified,
            unverified,
            detail,
        })
    }

    /// Required products followed by `samples` random closed pairs.
    pub fn crosscheck_with_engine(&self, engine: &Engine, samples: usize, seed: u64) -> Result<Vec<CrossEntry>, GreenError> {
        let mut products = required_products(self.n);
        products.extend(sampled_products(self.n, samples, derive_seed(seed, "green.crosscheck")));
        products
            .iter()
            .enumerate()
            .map(|(i, f)| self.crosscheck_product(engine, f, &format!("green.crosscheck.{}", i)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structure_polynomials_at_3() {
        let sp = StructurePolys::new(3);
        let s = |p: &Poly| poly_to_string(p);
        assert_eq!(s(&sp.f[0]), "-1 + y^2");
        assert_eq!(s(&sp.f[1]), "-2 - 3*y + y^3");
        assert_eq!(s(&sp.f[2]), "1");
        assert_eq!(s(&sp.f[3]), "y");
        assert_eq!(s(&sp.g[0]), "-2 + y^2");
        assert_eq!(s(&sp.g[1]), "y");
        assert_eq!(s(&sp.g[2]), "-1 + y^2");
        assert_eq!(s(&sp.g[3]), "1 + y");
    }

    #[test]
    fn small_products() {
        let r = GreenRing::new(3).unwrap();
        assert_eq!(r.parse("x1*x1").unwrap(), r.parse("(y+1)*x2").unwrap());
        assert_eq!(r.parse("x1*x1").unwrap().to_string(), "x2 + y*x2");
        let zz = r.parse("z+*z-").unwrap();
        assert_eq!(zz, r.parse("2y^3 + 4y^2 - 2y - 3").unwrap());
    }

    #[test]
    fn parse_errors_are_positioned() {
        let r = GreenRing::new(3).unwrap();
        assert_eq!(r.parse("y + q"), Err(GreenError::Parse { pos: 4, msg: "unexpected character `q`".into() }));
        assert!(matches!(r.parse("x3"), Err(GreenError::Parse { pos: 0, .. })));
        assert!(matches!(r.parse("(y"), Err(GreenError::Parse { pos: 2, .. })));
    }
}
