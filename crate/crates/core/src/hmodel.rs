//! The algebra Ũ_q (c = d = n) on its PBW basis E^a F^b K^c.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};
use thiserror::Error;

use crate::cyclo::{q_power, root_power, CycloContext, CycloError, CycloNum};

#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error(transparent)]
    Field(#[from] CycloError),
    #[error("index out of range: {0}")]
    Range(String),
    #[error("coefficient a^{{{i}{j}}}_{{{k},1}} vanishes")]
    VanishingCoefficient { i: u32, j: u32, k: u32 },
    #[error("malformed algebra element: {0}")]
    Parse(String),
}

/// PBW exponents (a, b, c) of E^a F^b K^c.
pub type Pbw = (u32, u32, u32);

#[derive(Clone, PartialEq, Eq)]
pub struct AlgebraElem {
    terms: BTreeMap<Pbw, CycloNum>,
}

impl AlgebraElem {
    pub fn terms(&self) -> &BTreeMap<Pbw, CycloNum> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, key: Pbw) -> Option<&CycloNum> {
        self.terms.get(&key)
    }

    fn push(&mut self, key: Pbw, c: CycloNum) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&key) {
            Some(x) => {
                *x += &c;
                if x.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, c);
            }
        }
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|(&(a, b, c), v)| json!({"a": a, "b": b, "c": c, "coeff": v.to_json()}))
                .collect(),
        )
    }
}

impl fmt::Debug for AlgebraElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|((a, b, c), v)| format!("({})E^{}F^{}K^{}", v, a, b, c))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// The algebra with its cached structure constants.
pub struct Algebra {
    ctx: Arc<CycloContext>,
    n: u32,
    m: u32,
    // α_r and β_r of the commutation identity, r = 0..n
    alpha: Vec<CycloNum>,
    beta: Vec<CycloNum>,
}

impl Algebra {
    pub fn new(ctx: &Arc<CycloContext>) -> Self {
        let n = ctx.n();
        let one = CycloNum::one(ctx);
        let qq = q_power(ctx, 1) - q_power(ctx, -1);
        let da = ((&one - q_power(ctx, -2)) * &qq).inv().expect("q^2 != 1");
        let db = ((&one - q_power(ctx, 2)) * &qq).inv().expect("q^2 != 1");
        let mut alpha = Vec::new();
        let mut beta = Vec::new();
        for r in 0..=n as i64 {
            alpha.push((&one - q_power(ctx, -2 * r)) * &da);
            beta.push((&one - q_power(ctx, 2 * r)) * &db);
        }
        Algebra {
            ctx: ctx.clone(),
            n,
            m: ctx.m(),
            alpha,
            beta,
        }
    }

    pub fn context(&self) -> &Arc<CycloContext> {
        &self.ctx
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// (1 − q^{−2r})/((1 − q^{−2})(q − q^{−1})).
    pub fn alpha(&self, r: u32) -> &CycloNum {
        &self.alpha[r as usize]
    }

    /// (1 − q^{2r})/((1 − q²)(q − q^{−1})).
    pub fn beta(&self, r: u32) -> &CycloNum {
        &self.beta[r as usize]
    }

    pub fn zero(&self) -> AlgebraElem {
        AlgebraElem {
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(&self, a: u32, b: u32, c: i64, coeff: CycloNum) -> AlgebraElem {
        let mut x = self.zero();
        if a < self.n && b < self.n {
            x.push((a, b, c.rem_euclid(self.m as i64) as u32), coeff);
        }
        x
    }

    pub fn scalar(&self, c: CycloNum) -> AlgebraElem {
        self.monomial(0, 0, 0, c)
    }

    pub fn one(&self) -> AlgebraElem {
        self.scalar(CycloNum::one(&self.ctx))
    }

    pub fn e(&self) -> AlgebraElem {
        self.monomial(1, 0, 0, CycloNum::one(&self.ctx))
    }

    pub fn f(&self) -> AlgebraElem {
        self.monomial(0, 1, 0, CycloNum::one(&self.ctx))
    }

    /// K^c for any integer c (K^{-1} = K^{n²-1}).
    pub fn k(&self, c: i64) -> AlgebraElem {
        self.monomial(0, 0, c, CycloNum::one(&self.ctx))
    }

    pub fn from_json(&self, v: &Value) -> Result<AlgebraElem, AlgebraError> {
        let arr = v
            .as_array()
            .ok_or_else(|| AlgebraError::Parse("expected a list of terms".into()))?;
        let mut x = self.zero();
        for t in arr {
            let get = |k: &str| {
                t.get(k)
                    .and_then(|v| v.as_u64())
                    .ok_or_else(|| AlgebraError::Parse(format!("missing field {}", k)))
            };
            let (a, b, c) = (get("a")? as u32, get("b")? as u32, get("c")? as u32);
            if a >= self.n || b >= self.n || c >= self.m {
                return Err(AlgebraError::Range(format!("({}, {}, {})", a, b, c)));
            }
            let coeff = CycloNum::from_json(
                &self.ctx,
                t.get("coeff")
                    .ok_or_else(|| AlgebraError::Parse("missing coeff".into()))?,
            )?;
            x.push((a, b, c), coeff);
        }
        Ok(x)
    }

    pub fn add(&self, x: &AlgebraElem, y: &AlgebraElem) -> AlgebraElem {
        let mut out = x.clone();
        for (&k, v) in &y.terms {
            out.push(k, v.clone());
        }
        out
    }

    pub fn sub(&self, x: &AlgebraElem, y: &AlgebraElem) -> AlgebraElem {
        let mut out = x.clone();
        for (&k, v) in &y.terms {
            out.push(k, -v);
        }
        out
    }

    pub fn scale(&self, x: &AlgebraElem, c: &CycloNum) -> AlgebraElem {
        let mut out = self.zero();
        for (&k, v) in &x.terms {
            out.push(k, v * c);
        }
        out
    }

    pub fn sum(&self, items: &[AlgebraElem]) -> AlgebraElem {
        let mut out = self.zero();
        for x in items {
            for (&k, v) in &x.terms {
                out.push(k, v.clone());
            }
        }
        out
    }

    fn left_k(&self, x: &AlgebraElem, c: u32) -> AlgebraElem {
        // K^c E^a F^b K^d = q^{2c(a-b)} E^a F^b K^{c+d}
        let mut out = self.zero();
        for (&(a, b, d), v) in &x.terms {
            let s = q_power(&self.ctx, 2 * c as i64 * (a as i64 - b as i64));
            out.push((a, b, (c + d) % self.m), v * &s);
        }
        out
    }

    fn left_e(&self, x: &AlgebraElem) -> AlgebraElem {
        let mut out = self.zero();
        for (&(a, b, c), v) in &x.terms {
            if a + 1 < self.n {
                out.push((a + 1, b, c), v.clone());
            }
        }
        out
    }

    fn left_f(&self, x: &AlgebraElem) -> AlgebraElem {
        // F E^a F^b K^c = E^a F^{b+1} K^c + α_a q^{2b} E^{a-1} F^b K^{c-1} − β_a q^{-2b} E^{a-1} F^b K^{c+1}
        let mut out = self.zero();
        let m = self.m;
        for (&(a, b, c), v) in &x.terms {
            if b + 1 < self.n {
                out.push((a, b + 1, c), v.clone());
            }
            if a > 0 {
                let s1 = &self.alpha[a as usize] * q_power(&self.ctx, 2 * b as i64);
                out.push((a - 1, b, (c + m - 1) % m), v * &s1);
                let s2 = &self.beta[a as usize] * q_power(&self.ctx, -2 * b as i64);
                out.push((a - 1, b, (c + 1) % m), -(v * &s2));
            }
        }
        out
    }

    /// E^a F^b K^c · y.
    pub fn monomial_times(&self, key: Pbw, y: &AlgebraElem) -> AlgebraElem {
        let (a, b, c) = key;
        let mut r = if c == 0 { y.clone() } else { self.left_k(y, c) };
        for _ in 0..b {
            r = self.left_f(&r);
        }
        for _ in 0..a {
            r = self.left_e(&r);
        }
        r
    }

    pub fn mul(&self, x: &AlgebraElem, y: &AlgebraElem) -> AlgebraElem {
        let mut out = self.zero();
        // group x by (a, b) so the F/E straightening runs once per group
        let mut groups: BTreeMap<(u32, u32), Vec<(u32, &CycloNum)>> = BTreeMap::new();
        for (&(a, b, c), v) in &x.terms {
            groups.entry((a, b)).or_default().push((c, v));
        }
        for ((a, b), ks) in groups {
            let mut pre = self.zero();
            for (c, v) in ks {
                let t = self.left_k(y, c);
                for (&k, w) in &t.terms {
                    pre.push(k, w * v);
                }
            }
            let mut r = pre;
            for _ in 0..b {
                r = self.left_f(&r);
            }
            for _ in 0..a {
                r = self.left_e(&r);
            }
            for (k, w) in r.terms {
                out.push(k, w);
            }
        }
        out
    }

    pub fn mul_all(&self, items: &[&AlgebraElem]) -> AlgebraElem {
        let mut acc = self.one();
        for x in items {
            acc = self.mul(&acc, x);
        }
        acc
    }

    pub fn pow(&self, x: &AlgebraElem, e: u32) -> AlgebraElem {
        let mut acc = self.one();
        for _ in 0..e {
            acc = self.mul(&acc, x);
        }
        acc
    }

    /// Central idempotent e_i = (1/n) Σ_t q^{ti} K^{tn}.
    pub fn block_idempotent(&self, i: u32) -> AlgebraElem {
        let inv_n = CycloNum::from_int(&self.ctx, self.n as i64).inv().unwrap();
        let mut x = self.zero();
        for t in 0..self.n {
            x.push((0, 0, t * self.n), q_power(&self.ctx, (t * i) as i64) * &inv_n);
        }
        x
    }

    /// 1_s = (1/m) Σ_r ζ^{sr} K^r; acts as the projection onto K-eigenvalue ζ^{-s}.
    pub fn weight_idempotent(&self, s: u32) -> AlgebraElem {
        let inv_m = CycloNum::from_int(&self.ctx, self.m as i64).inv().unwrap();
        let mut x = self.zero();
        for r in 0..self.m {
            x.push((0, 0, r), root_power(&self.ctx, s as i64 * r as i64) * &inv_m);
        }
        x
    }

    /// T^i_j = (1/n) Σ_k ζ^{((j-1)n+i)k} K_i^k with K_i = K e_i.
    pub fn sub_idempotent(&self, i: u32, j: u32) -> Result<AlgebraElem, AlgebraError> {
        if i == 0 || i >= self.n || j == 0 || j > self.n {
            return Err(AlgebraError::Range(format!("T^{}_{}", i, j)));
        }
        let ei = self.block_idempotent(i);
        let s = ((j - 1) * self.n + i) as i64;
        let inv_n = CycloNum::from_int(&self.ctx, self.n as i64).inv().unwrap();
        let mut sum = self.zero();
        for k in 0..self.n as i64 {
            sum.push((0, 0, k as u32), root_power(&self.ctx, s * k) * &inv_n);
        }
        Ok(self.mul(&sum, &ei))
    }

    /// a^{ij}_{k,s} for 1 ≤ s ≤ k ≤ n.
    pub fn a_coeff(&self, i: u32, j: u32, k: u32, s: u32) -> CycloNum {
        if s == k {
            return CycloNum::one(&self.ctx);
        }
        if s == 1 {
            let n = self.n as i64;
            let (i, j, k) = (i as i64, j as i64, k as i64);
            let num = q_power(&self.ctx, 2 * (k - 1)) * root_power(&self.ctx, (1 - j) * n - i)
                - q_power(&self.ctx, 2 * (1 - k)) * root_power(&self.ctx, i - (1 - j) * n);
            let den = q_power(&self.ctx, 1) - q_power(&self.ctx, -1);
            return num / den;
        }
        self.a_coeff(i, j, k, 1) + self.a_coeff(i, j, k - 1, s - 1)
    }

    /// A^{ij}_k = Σ_{p<k} (Π_{t≤p} a_{k,k-t}) E_i^{k-1-p} F_i^{n-1-p}.
    pub fn a_element(&self, i: u32, j: u32, k: u32) -> Result<AlgebraElem, AlgebraError> {
        if i == 0 || i >= self.n || j == 0 || j > self.n || k == 0 || k > self.n {
            return Err(AlgebraError::Range(format!("A^{{{}{}}}_{}", i, j, k)));
        }
        for kk in 2..=k {
            if self.a_coeff(i, j, kk, 1).is_zero() {
                return Err(AlgebraError::VanishingCoefficient { i, j, k: kk });
            }
        }
        let mut x = self.zero();
        let mut prod = CycloNum::one(&self.ctx);
        for p in 0..k {
            prod = prod * self.a_coeff(i, j, k, k - p);
            x.push((k - 1 - p, self.n - 1 - p, 0), prod.clone());
        }
        Ok(self.mul(&x, &self.block_idempotent(i)))
    }

    /// Right-hand side of the commutation identity F E^r = E^r F + E^{r-1}(α_r K^{-1} − β_r K).
    pub fn commutation_rhs(&self, r: u32) -> AlgebraElem {
        let one = CycloNum::one(&self.ctx);
        let mut x = self.monomial(r, 1, 0, one);
        x = self.add(&x, &self.monomial(r - 1, 0, -1, self.alpha[r as usize].clone()));
        self.sub(&x, &self.monomial(r - 1, 0, 1, self.beta[r as usize].clone()))
    }
}

/// Associator scalars φ(s,t,r) = ζ^{n·r·⌊(s+t)/m⌋}, stored as exponents of ζ.
pub struct AssociatorTable {
    ctx: Arc<CycloContext>,
    m: u32,
}

impl AssociatorTable {
    pub fn new(ctx: &Arc<CycloContext>) -> Self {
        AssociatorTable {
            ctx: ctx.clone(),
            m: ctx.m(),
        }
    }

    /// Exponent of ζ in φ(s,t,r), reduced mod m.
    pub fn exponent(&self, s: u32, t: u32, r: u32) -> u32 {
        let (s, t, r) = (s % self.m, t % self.m, r % self.m);
        let carry = (s + t) / self.m;
        (self.ctx.n() * r * carry) % self.m
    }

    pub fn scalar(&self, s: u32, t: u32, r: u32) -> CycloNum {
        root_power(&self.ctx, self.exponent(s, t, r) as i64)
    }

    /// The normalized 3-cocycle identity at (a,b,c,d):
    /// φ(b,c,d) φ(a,b+c,d) φ(a,b,c) = φ(a+b,c,d) φ(a,b,c+d).
    pub fn cocycle_holds(&self, a: u32, b: u32, c: u32, d: u32) -> bool {
        let m = self.m;
        let lhs = self.scalar(b, c, d) * self.scalar(a, (b + c) % m, d) * self.scalar(a, b, c);
        let rhs = self.scalar((a + b) % m, c, d) * self.scalar(a, b, (c + d) % m);
        lhs == rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclo::make_context;

    #[test]
    fn basic_relations() {
        let ctx = make_context(3).unwrap();
        let h = Algebra::new(&ctx);
        let (e, f, k) = (h.e(), h.f(), h.k(1));
        // K E = q² E K
        let lhs = h.mul(&k, &e);
        let rhs = h.monomial(1, 0, 1, q_power(&ctx, 2));
        assert_eq!(lhs, rhs);
        // EF - FE = (K - K^{-1})/(q - q^{-1})
        let comm = h.sub(&h.mul(&e, &f), &h.mul(&f, &e));
        let c = (q_power(&ctx, 1) - q_power(&ctx, -1)).inv().unwrap();
        let expect = h.scale(&h.sub(&h.k(1), &h.k(-1)), &c);
        assert_eq!(comm, expect);
        assert!(h.pow(&e, 3).is_zero());
        assert!(h.pow(&f, 3).is_zero());
        assert_eq!(h.pow(&k, 9), h.one());
    }

    #[test]
    fn idempotent_sums() {
        let ctx = make_context(3).unwrap();
        let h = Algebra::new(&ctx);
        let es: Vec<AlgebraElem> = (0..3).map(|i| h.block_idempotent(i)).collect();
        assert_eq!(h.sum(&es), h.one());
        let ones: Vec<AlgebraElem> = (0..9).map(|s| h.weight_idempotent(s)).collect();
        assert_eq!(h.sum(&ones), h.one());
        for i in 1..3 {
            for j in 1..=3 {
                assert_eq!(h.sub_idempotent(i, j).unwrap(), ones[((j - 1) * 3 + i) as usize]);
            }
        }
    }

    #[test]
    fn cocycle_normalized() {
        let ctx = make_context(3).unwrap();
        let t = AssociatorTable::new(&ctx);
        assert!(t.scalar(0, 5, 7).is_one());
        assert!(t.scalar(4, 8, 0).is_one());
        assert_eq!(t.exponent(5, 5, 1), 3);
    }
}
