//! Finite-dimensional Ũ_q-modules as matrix quadruples (E, F, K, K⁻¹).
//!
//! Every module built here keeps K diagonal, with the exponents w
//! (K e_i = ζ^w e_i) stored alongside. Imported modules with a
//! non-diagonal K are accepted and converted on demand.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use serde_json::{json, Value};
use thiserror::Error;

use crate::cyclo::{q_power, root_power, CycloContext, CycloError, CycloNum};
use crate::hmodel::{Algebra, AlgebraElem};
use crate::linalg::{is_zero_vector, nullspace, zero_vector, Echelon, Mat, Vector};

#[derive(Debug, Error)]
pub enum RepError {
    #[error(transparent)]
    Field(#[from] CycloError),
    #[error("parameter out of range: {0}")]
    Range(String),
    #[error("γ_{j} vanishes for V({t},{r})")]
    VanishingGamma { t: u32, r: u32, j: u32 },
    #[error("modules over different fields (n = {0} and n = {1})")]
    Mismatch(u32, u32),
    #[error("malformed module data: {0}")]
    Parse(String),
    #[error("module fails the defining relations: {0}")]
    Invalid(String),
    #[error("subspace is not a submodule")]
    NotInvariant,
    #[error("K is not diagonalizable over the field")]
    NotDiagonalizable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// Name of an indecomposable class.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IndecompLabel {
    Simple(u32),
    BlockSimple(u32, u32),
    Proj(u32),
    Syzygy(Sign, u32, u32),
    Band(u32, u32, String),
}

impl IndecompLabel {
    /// Checks parameter ranges and reduces r mod n.
    pub fn normalized(&self, n: u32) -> Result<IndecompLabel, RepError> {
        let bad = || RepError::Range(format!("{} at n = {}", self, n));
        Ok(match self {
            IndecompLabel::Simple(l) if (1..=n).contains(l) => self.clone(),
            IndecompLabel::BlockSimple(t, r) if (1..n).contains(t) => IndecompLabel::BlockSimple(*t, r % n),
            IndecompLabel::Proj(l) if (1..n).contains(l) => self.clone(),
            IndecompLabel::Syzygy(_, s, l) if *s >= 1 && (1..n).contains(l) => self.clone(),
            IndecompLabel::Band(s, l, _) if *s >= 1 && (1..n).contains(l) => self.clone(),
            _ => return Err(bad()),
        })
    }

    pub fn dim(&self, n: u32) -> usize {
        let n = n as usize;
        match self {
            IndecompLabel::Simple(l) => *l as usize,
            IndecompLabel::BlockSimple(..) => n,
            IndecompLabel::Proj(_) => 2 * n,
            IndecompLabel::Syzygy(_, s, l) => {
                let (s, l) = (*s as usize, *l as usize);
                if s % 2 == 1 {
                    s * n + (n - l)
                } else {
                    s * n + l
                }
            }
            IndecompLabel::Band(s, _, _) => 2 * (*s as usize) * n,
        }
    }

    pub fn pretty(&self) -> String {
        match self {
            IndecompLabel::Simple(l) => format!("V_{}", l),
            IndecompLabel::BlockSimple(t, r) => format!("V({},{})", t, r),
            IndecompLabel::Proj(l) => format!("P_{}", l),
            IndecompLabel::Syzygy(sg, s, l) => format!("Ω^{}{} V_{}", sg.symbol(), s, l),
            IndecompLabel::Band(s, l, eta) => format!("M_{}({},{})", s, l, eta),
        }
    }
}

impl fmt::Display for IndecompLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndecompLabel::Simple(l) => write!(f, "Simple({})", l),
            IndecompLabel::BlockSimple(t, r) => write!(f, "BlockSimple({},{})", t, r),
            IndecompLabel::Proj(l) => write!(f, "Proj({})", l),
            IndecompLabel::Syzygy(sg, s, l) => write!(f, "Syzygy({},{},{})", sg.symbol(), s, l),
            IndecompLabel::Band(s, l, eta) => write!(f, "Band({},{},{})", s, l, eta),
        }
    }
}

impl FromStr for IndecompLabel {
    type Err = RepError;

    fn from_str(s: &str) -> Result<Self, RepError> {
        let bad = || RepError::Parse(format!("unknown label `{}`", s));
        let s = s.trim();
        let open = s.find('(').ok_or_else(bad)?;
        if !s.ends_with(')') {
            return Err(bad());
        }
        let head = &s[..open];
        let args: Vec<&str> = s[open + 1..s.len() - 1].split(',').map(|a| a.trim()).collect();
        let num = |k: usize| -> Result<u32, RepError> {
            args.get(k).and_then(|a| a.parse().ok()).ok_or_else(bad)
        };
        match (head, args.len()) {
            ("Simple", 1) => Ok(IndecompLabel::Simple(num(0)?)),
            ("BlockSimple", 2) => Ok(IndecompLabel::BlockSimple(num(0)?, num(1)?)),
            ("Proj", 1) => Ok(IndecompLabel::Proj(num(0)?)),
            ("Syzygy", 3) => {
                let sign = match args[0] {
                    "+" => Sign::Plus,
                    "-" => Sign::Minus,
                    _ => return Err(bad()),
                };
                Ok(IndecompLabel::Syzygy(sign, num(1)?, num(2)?))
            }
            ("Band", 3) => Ok(IndecompLabel::Band(num(0)?, num(1)?, args[2].to_string())),
            _ => Err(bad()),
        }
    }
}

/// Block of a module: Block(i) when K^n acts as q^{n-i}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockIndex {
    Block(u32),
    Mixed,
}

/// A contiguous summand of a module built by direct sum.
#[derive(Clone, Debug, PartialEq)]
pub struct Part {
    pub offset: usize,
    pub dim: usize,
    pub label: Option<IndecompLabel>,
}

#[derive(Clone)]
struct Eigen {
    // columns of s are weight vectors; weights[k] is the exponent for column k
    s: Mat,
    s_inv: Mat,
    weights: Vec<u32>,
}

#[derive(Clone)]
pub struct Representation {
    ctx: Arc<CycloContext>,
    dim: usize,
    e: Mat,
    f: Mat,
    k: Mat,
    kinv: Mat,
    weights: Option<Vec<u32>>,
    label: Option<IndecompLabel>,
    parts: Vec<Part>,
    eigen: OnceLock<Result<Eigen, String>>,
}

impl fmt::Debug for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Representation(n = {}, dim = {}, label = {:?})",
            self.ctx.n(),
            self.dim,
            self.label
        )
    }
}

impl Representation {
    /// Module with K diagonal; `weights[i]` is the exponent of ζ on basis vector i.
    pub fn from_weighted(ctx: &Arc<CycloContext>, e: Mat, f: Mat, weights: Vec<u32>) -> Self {
        let m = ctx.m();
        let kd: Vec<CycloNum> = weights.iter().map(|&w| root_power(ctx, w as i64)).collect();
        let kid: Vec<CycloNum> = weights.iter().map(|&w| root_power(ctx, -(w as i64))).collect();
        let weights: Vec<u32> = weights.iter().map(|w| w % m).collect();
        let dim = weights.len();
        Representation {
            ctx: ctx.clone(),
            dim,
            e,
            f,
            k: Mat::diagonal(ctx, &kd),
            kinv: Mat::diagonal(ctx, &kid),
            weights: Some(weights),
            label: None,
            parts: vec![Part {
                offset: 0,
                dim,
                label: None,
            }],
            eigen: OnceLock::new(),
        }
    }

    /// Module from arbitrary matrices; K⁻¹ is computed. Detects a diagonal K.
    pub fn from_matrices(ctx: &Arc<CycloContext>, e: Mat, f: Mat, k: Mat) -> Result<Self, RepError> {
        let dim = k.nrows();
        for (name, mat) in [("E", &e), ("F", &f), ("K", &k)] {
            if mat.nrows() != dim || mat.ncols() != dim {
                return Err(RepError::Parse(format!("{} is not {}x{}", name, dim, dim)));
            }
        }
        if k.is_diagonal() {
            let mut weights = Vec::with_capacity(dim);
            let mut all = true;
            for i in 0..dim {
                match k.get(i, i).as_zeta_power() {
                    Some(w) => weights.push(w),
                    None => {
                        all = false;
                        break;
                    }
                }
            }
            if all {
                return Ok(Self::from_weighted(ctx, e, f, weights));
            }
        }
        let kinv = k
            .inverse()
            .ok_or_else(|| RepError::Invalid("K is not invertible".into()))?;
        Ok(Representation {
            ctx: ctx.clone(),
            dim,
            e,
            f,
            k,
            kinv,
            weights: None,
            label: None,
            parts: vec![Part {
                offset: 0,
                dim,
                label: None,
            }],
            eigen: OnceLock::new(),
        })
    }

    pub fn with_label(mut self, label: IndecompLabel) -> Self {
        if self.parts.len() == 1 {
            self.parts[0].label = Some(label.clone());
        }
        self.label = Some(label);
        self
    }

    pub fn context(&self) -> &Arc<CycloContext> {
        &self.ctx
    }

    pub fn n(&self) -> u32 {
        self.ctx.n()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn e(&self) -> &Mat {
        &self.e
    }

    pub fn f(&self) -> &Mat {
        &self.f
    }

    pub fn k(&self) -> &Mat {
        &self.k
    }

    pub fn kinv(&self) -> &Mat {
        &self.kinv
    }

    pub fn label(&self) -> Option<&IndecompLabel> {
        self.label.as_ref()
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    /// K-exponents of the basis vectors, when K is diagonal.
    pub fn weights(&self) -> Option<&[u32]> {
        self.weights.as_deref()
    }

    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    /// Matrix of a generator or of its named variants.
    pub fn generator(&self, g: Generator) -> &Mat {
        match g {
            Generator::E => &self.e,
            Generator::F => &self.f,
            Generator::K => &self.k,
        }
    }

    /// Replace one matrix entry; used to build negative controls.
    pub fn perturbed(&self, g: Generator, i: usize, j: usize, delta: &CycloNum) -> Self {
        let mut out = self.clone();
        let m = match g {
            Generator::E => &mut out.e,
            Generator::F => &mut out.f,
            Generator::K => &mut out.k,
        };
        let v = m.get(i, j) + delta;
        m.set(i, j, v);
        if g == Generator::K {
            out.weights = None;
            out.kinv = out.k.inverse().unwrap_or_else(|| out.kinv.clone());
        }
        out.eigen = OnceLock::new();
        out
    }

    /// Basis indices grouped by weight (weighted modules only).
    pub fn weight_spaces(&self) -> BTreeMap<u32, Vec<usize>> {
        let mut out: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        if let Some(ws) = &self.weights {
            for (i, &w) in ws.iter().enumerate() {
                out.entry(w).or_default().push(i);
            }
        }
        out
    }

    /// Sorted multiset of K-exponents.
    pub fn weight_multiset(&self) -> Result<Vec<u32>, RepError> {
        let mut ws = match &self.weights {
            Some(ws) => ws.clone(),
            None => self.eigen()?.weights.clone(),
        };
        ws.sort();
        Ok(ws)
    }

    fn eigen(&self) -> Result<&Eigen, RepError> {
        let res = self.eigen.get_or_init(|| {
            let ctx = &self.ctx;
            let mut cols: Vec<Vector> = Vec::new();
            let mut weights = Vec::new();
            for w in 0..ctx.m() {
                let shifted = self.k.sub(&Mat::scalar(ctx, self.dim, &root_power(ctx, w as i64)));
                for v in shifted.kernel() {
                    cols.push(v);
                    weights.push(w);
                }
            }
            if cols.len() != self.dim {
                return Err("K is not diagonalizable".to_string());
            }
            let s = Mat::from_columns(ctx, self.dim, &cols);
            let s_inv = s.inverse().ok_or("eigenbasis is singular")?;
            Ok(Eigen { s, s_inv, weights })
        });
        res.as_ref().map_err(|_| RepError::NotDiagonalizable)
    }

    /// An isomorphic module with diagonal K, and the change of basis (S, S⁻¹)
    /// where the columns of S are weight vectors in the original basis.
    pub fn weight_form(&self) -> Result<(Representation, Option<(Mat, Mat)>), RepError> {
        if self.weights.is_some() {
            return Ok((self.clone(), None));
        }
        let eig = self.eigen()?;
        let e = eig.s_inv.mul(&self.e).mul(&eig.s);
        let f = eig.s_inv.mul(&self.f).mul(&eig.s);
        let mut rep = Representation::from_weighted(&self.ctx, e, f, eig.weights.clone());
        rep.label = self.label.clone();
        Ok((rep, Some((eig.s.clone(), eig.s_inv.clone()))))
    }

    /// The submodule on a set of basis vectors spanning a submodule
    /// (a direct summand of a block-diagonal module, or a block component).
    pub fn coordinate_summand(&self, idx: &[usize]) -> Representation {
        let ws = self.weights.as_ref().expect("weighted module");
        let weights = idx.iter().map(|&i| ws[i]).collect();
        Representation::from_weighted(&self.ctx, self.e.select(idx, idx), self.f.select(idx, idx), weights)
    }

    /// Projection onto the span of weight vectors whose exponent satisfies `keep`.
    pub fn weight_projector(&self, keep: impl Fn(u32) -> bool) -> Result<Mat, RepError> {
        if let Some(ws) = &self.weights {
            let d: Vec<CycloNum> = ws
                .iter()
                .map(|&w| {
                    if keep(w) {
                        CycloNum::one(&self.ctx)
                    } else {
                        CycloNum::zero(&self.ctx)
                    }
                })
                .collect();
            return Ok(Mat::diagonal(&self.ctx, &d));
        }
        let eig = self.eigen()?;
        let d: Vec<CycloNum> = eig
            .weights
            .iter()
            .map(|&w| {
                if keep(w) {
                    CycloNum::one(&self.ctx)
                } else {
                    CycloNum::zero(&self.ctx)
                }
            })
            .collect();
        Ok(eig.s.mul(&Mat::diagonal(&self.ctx, &d)).mul(&eig.s_inv))
    }

    /// K^e for any integer e.
    pub fn k_power(&self, e: i64) -> Mat {
        let m = self.ctx.m() as i64;
        let e = e.rem_euclid(m);
        if let Some(ws) = &self.weights {
            let d: Vec<CycloNum> = ws
                .iter()
                .map(|&w| root_power(&self.ctx, w as i64 * e))
                .collect();
            return Mat::diagonal(&self.ctx, &d);
        }
        if e <= m / 2 {
            self.k.pow(e as u64)
        } else {
            self.kinv.pow((m - e) as u64)
        }
    }

    /// Matrix of an algebra element acting on the module.
    pub fn act(&self, x: &AlgebraElem) -> Mat {
        let mut acc = Mat::zeros(&self.ctx, self.dim, self.dim);
        let mut epow = vec![Mat::identity(&self.ctx, self.dim)];
        let mut fpow = vec![Mat::identity(&self.ctx, self.dim)];
        let n = self.n() as usize;
        for i in 1..n {
            epow.push(epow[i - 1].mul(&self.e));
            fpow.push(fpow[i - 1].mul(&self.f));
        }
        for (&(a, b, c), v) in x.terms() {
            let t = epow[a as usize]
                .mul(&fpow[b as usize])
                .mul(&self.k_power(c as i64))
                .scale(v);
            acc = acc.add(&t);
        }
        acc
    }

    pub fn to_json(&self) -> Value {
        let label = if self.parts.len() > 1 && self.parts.iter().all(|p| p.label.is_some()) {
            Value::String(
                self.parts
                    .iter()
                    .map(|p| p.label.as_ref().unwrap().to_string())
                    .collect::<Vec<_>>()
                    .join(" + "),
            )
        } else {
            match &self.label {
                Some(l) => Value::String(l.to_string()),
                None => Value::Null,
            }
        };
        json!({
            "n": self.n(),
            "dim": self.dim,
            "label": label,
            "E": self.e.to_json(),
            "F": self.f.to_json(),
            "K": self.k.to_json(),
        })
    }

    /// Load and validate a module from its JSON form.
    pub fn from_json(ctx: &Arc<CycloContext>, v: &Value) -> Result<Self, RepError> {
        let n = v
            .get("n")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| RepError::Parse("missing n".into()))? as u32;
        if n != ctx.n() {
            return Err(RepError::Mismatch(n, ctx.n()));
        }
        let dim = v
            .get("dim")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| RepError::Parse("missing dim".into()))? as usize;
        let mat = |key: &str| -> Result<Mat, RepError> {
            let raw = v
                .get(key)
                .ok_or_else(|| RepError::Parse(format!("missing {}", key)))?;
            let m = Mat::from_json(ctx, raw)?;
            if dim > 0 && (m.nrows() != dim || m.ncols() != dim) {
                return Err(RepError::Parse(format!("{} is not {}x{}", key, dim, dim)));
            }
            Ok(if dim == 0 { Mat::zeros(ctx, 0, 0) } else { m })
        };
        let mut rep = Self::from_matrices(ctx, mat("E")?, mat("F")?, mat("K")?)?;
        if let Some(Value::String(s)) = v.get("label") {
            let labels: Result<Vec<IndecompLabel>, RepError> = s.split(" + ").map(|x| x.parse()).collect();
            let labels = labels?;
            if labels.len() == 1 {
                rep = rep.with_label(labels[0].clone());
            }
        }
        let problems = validate(&rep);
        if !problems.is_empty() {
            return Err(RepError::Invalid(problems.join("; ")));
        }
        Ok(rep)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    E,
    F,
    K,
}

fn shift_matrix(ctx: &Arc<CycloContext>, dim: usize, down: &[CycloNum]) -> (Mat, Mat) {
    // E e_i = e_{i+1}; F e_{i+1} = down[i] e_i
    let mut e = Mat::zeros(ctx, dim, dim);
    let mut f = Mat::zeros(ctx, dim, dim);
    for i in 0..dim.saturating_sub(1) {
        e.set(i + 1, i, CycloNum::one(ctx));
        f.set(i, i + 1, down[i].clone());
    }
    (e, f)
}

/// The simple module V_l with basis m_1..m_l.
pub fn simple_v(ctx: &Arc<CycloContext>, l: u32) -> Result<Representation, RepError> {
    let n = ctx.n();
    if l == 0 || l > n {
        return Err(RepError::Range(format!("V_{} at n = {}", l, n)));
    }
    let one = CycloNum::one(ctx);
    let q2 = q_power(ctx, 2);
    let li = l as i64;
    // β_i(l) = (i)_{q²}(1 − q^{2(i−l)}) / (q^{2i−l} − q^{2i−l−2}), i = 1..l−1
    let mut down = Vec::new();
    for i in 1..li {
        let alpha = crate::cyclo::q_integer(i as u32, &q2) * (&one - q_power(ctx, 2 * (i - li)));
        let den = q_power(ctx, 2 * i - li) - q_power(ctx, 2 * i - li - 2);
        down.push(alpha / den);
    }
    let (e, f) = shift_matrix(ctx, l as usize, &down);
    let weights = (1..=li)
        .map(|i| ((n as i64) * (2 * i - li - 1)).rem_euclid(ctx.m() as i64) as u32)
        .collect();
    Ok(Representation::from_weighted(ctx, e, f, weights).with_label(IndecompLabel::Simple(l)))
}

/// γ_j for **V**(t, r).
pub fn gamma(ctx: &Arc<CycloContext>, t: u32, r: u32, j: u32) -> CycloNum {
    let one = CycloNum::one(ctx);
    let (t, r, j) = (t as i64, r as i64, j as i64);
    let qq = q_power(ctx, 1) - q_power(ctx, -1);
    let a = root_power(ctx, -t) * (q_power(ctx, -2 * r) - q_power(ctx, -2 * (r + j))) / (&one - q_power(ctx, -2));
    let b = root_power(ctx, t) * (q_power(ctx, 2 * r) - q_power(ctx, 2 * (r + j))) / (&one - q_power(ctx, 2));
    (a - b) / qq
}

/// The simple module **V**(t, r) with basis v_1..v_n.
pub fn block_simple_v(ctx: &Arc<CycloContext>, t: u32, r: i64) -> Result<Representation, RepError> {
    let n = ctx.n();
    if t == 0 || t >= n {
        return Err(RepError::Range(format!("V({},{}) at n = {}", t, r, n)));
    }
    let r = r.rem_euclid(n as i64) as u32;
    let mut down = Vec::new();
    for j in 1..n {
        let g = gamma(ctx, t, r, j);
        if g.is_zero() {
            return Err(RepError::VanishingGamma { t, r, j });
        }
        down.push(g);
    }
    let (e, f) = shift_matrix(ctx, n as usize, &down);
    let weights = (1..=n)
        .map(|i| (t + 2 * n * (r + i - 1)) % ctx.m())
        .collect();
    Ok(Representation::from_weighted(ctx, e, f, weights).with_label(IndecompLabel::BlockSimple(t, r)))
}

/// The left ideal H·u for an element u with K u = ζ^{-s} u (u = 1_s),
/// on the basis E^a F^b u ordered by (a, b).
pub fn left_ideal_module(alg: &Algebra, s: u32) -> Representation {
    let ctx = alg.context();
    let n = alg.n();
    let m = ctx.m();
    let dim = (n * n) as usize;
    let idx = |a: u32, b: u32| (a * n + b) as usize;
    // ζ^{-s c} for K^c
    let kappa: Vec<CycloNum> = (0..m).map(|c| root_power(ctx, -(s as i64) * c as i64)).collect();
    let mut e = Mat::zeros(ctx, dim, dim);
    let mut f = Mat::zeros(ctx, dim, dim);
    let gens = [(alg.e(), &mut e), (alg.f(), &mut f)];
    for (g, target) in gens {
        for a in 0..n {
            for b in 0..n {
                let prod = alg.mul(&g, &alg.monomial(a, b, 0, CycloNum::one(ctx)));
                let mut col: BTreeMap<usize, CycloNum> = BTreeMap::new();
                for (&(a2, b2, c2), v) in prod.terms() {
                    let entry = col.entry(idx(a2, b2)).or_insert_with(|| CycloNum::zero(ctx));
                    *entry += &(v * &kappa[c2 as usize]);
                }
                for (row, v) in col {
                    target.set(row, idx(a, b), v);
                }
            }
        }
    }
    let mut weights = vec![0; dim];
    for a in 0..n {
        for b in 0..n {
            let w = (2 * n as i64 * (a as i64 - b as i64) - s as i64).rem_euclid(m as i64);
            weights[idx(a, b)] = w as u32;
        }
    }
    Representation::from_weighted(ctx, e, f, weights)
}

/// The module H T^i_j = H·1_{(j-1)n+i}.
pub fn regular_submodule(alg: &Algebra, i: u32, j: u32) -> Result<Representation, RepError> {
    let n = alg.n();
    if i == 0 || i >= n || j == 0 || j > n {
        return Err(RepError::Range(format!("HT^{}_{}", i, j)));
    }
    Ok(left_ideal_module(alg, (j - 1) * n + i))
}

/// Image of an algebra element x under x ↦ x·1_s in left_ideal_module(s).
pub fn left_ideal_vector(alg: &Algebra, s: u32, x: &AlgebraElem) -> Vector {
    let ctx = alg.context();
    let n = alg.n();
    let mut v = zero_vector(ctx, (n * n) as usize);
    for (&(a, b, c), coeff) in x.terms() {
        let k = root_power(ctx, -(s as i64) * c as i64);
        v[(a * n + b) as usize] += &(coeff * &k);
    }
    v
}

/// Casimir element action EF + (q⁻¹K + qK⁻¹)/(q − q⁻¹)².
pub fn casimir(rep: &Representation) -> Mat {
    let ctx = rep.context();
    let qq = q_power(ctx, 1) - q_power(ctx, -1);
    let c = (&qq * &qq).inv().unwrap();
    let part = rep
        .k
        .scale(&q_power(ctx, -1))
        .add(&rep.kinv.scale(&q_power(ctx, 1)))
        .scale(&c);
    rep.e.mul(&rep.f).add(&part)
}

/// Casimir eigenvalue (q^l + q^{-l})/(q − q⁻¹)² on V_l.
pub fn casimir_value(ctx: &Arc<CycloContext>, l: u32) -> CycloNum {
    let qq = q_power(ctx, 1) - q_power(ctx, -1);
    (q_power(ctx, l as i64) + q_power(ctx, -(l as i64))) / (&qq * &qq)
}

/// The projective cover P_l of V_l (1 ≤ l < n), cut out of H·1_s by the
/// generalized Casimir eigenspace and spun from the projection of 1_s.
pub fn projective(alg: &Algebra, l: u32) -> Result<Representation, RepError> {
    let ctx = alg.context();
    let n = alg.n();
    if l == 0 || l >= n {
        return Err(RepError::Range(format!("P_{} at n = {}", l, n)));
    }
    let s = (n * (l - 1)) % ctx.m();
    let big = left_ideal_module(alg, s);
    let cas = casimir(&big);
    let top_w = big.weights().unwrap()[0];
    let ws = big.weight_spaces();
    let idx = &ws[&top_w];
    let d = idx.len();
    let c_local = cas.select(idx, idx);
    let shifted = c_local.sub(&Mat::scalar(ctx, d, &casimir_value(ctx, l)));
    let nil = shifted.pow(d as u64);
    let ker = nil.kernel();
    let img = nil.columns();
    // write the unit vector of 1_s (local index 0) as ker + im
    let mut basis: Vec<Vector> = ker.clone();
    let mut ech = Echelon::new(ctx, d);
    for v in &ker {
        ech.insert(v);
    }
    for v in &img {
        if ech.insert(v) {
            basis.push(v.clone());
        }
    }
    if basis.len() != d {
        return Err(RepError::Invalid("generalized eigenspaces do not span".into()));
    }
    let mut unit = zero_vector(ctx, d);
    unit[0] = CycloNum::one(ctx);
    let coords = ech.coordinates(&unit).expect("spanning set");
    let mut g_local = zero_vector(ctx, d);
    for (c, v) in coords.iter().zip(&ker) {
        for (x, y) in g_local.iter_mut().zip(v) {
            *x += &(c * y);
        }
    }
    let mut g = zero_vector(ctx, big.dim());
    for (k, &i) in idx.iter().enumerate() {
        g[i] = g_local[k].clone();
    }
    let span = spin(&big, &[g]);
    let rep = span.submodule_rep(&big)?;
    if rep.dim() != 2 * n as usize {
        return Err(RepError::Invalid(format!("P_{} has dimension {}", l, rep.dim())));
    }
    Ok(rep.with_label(IndecompLabel::Proj(l)))
}

/// Weight-graded subspace of a weighted module, remembering the inserted vectors.
#[derive(Clone)]
pub struct GradedSubspace {
    ctx: Arc<CycloContext>,
    dim: usize,
    spaces: BTreeMap<u32, Vec<usize>>,
    weight_of: Vec<u32>,
    local: BTreeMap<u32, Echelon>,
    vectors: Vec<Vector>,
    // (weight, position within that weight's echelon) for each inserted vector
    slots: Vec<(u32, usize)>,
    by_weight: BTreeMap<u32, Vec<usize>>,
}

impl GradedSubspace {
    pub fn new(rep: &Representation) -> Self {
        let weights = rep.weights().expect("weighted module").to_vec();
        GradedSubspace {
            ctx: rep.context().clone(),
            dim: rep.dim(),
            spaces: rep.weight_spaces(),
            weight_of: weights,
            local: BTreeMap::new(),
            vectors: Vec::new(),
            slots: Vec::new(),
            by_weight: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vector] {
        &self.vectors
    }

    pub fn weight_of_vector(&self, k: usize) -> u32 {
        self.slots[k].0
    }

    /// Split v into its weight components.
    pub fn components(&self, v: &[CycloNum]) -> Vec<(u32, Vector)> {
        let mut out = Vec::new();
        for (&w, idx) in &self.spaces {
            if idx.iter().any(|&i| !v[i].is_zero()) {
                let mut c = zero_vector(&self.ctx, self.dim);
                for &i in idx {
                    c[i] = v[i].clone();
                }
                out.push((w, c));
            }
        }
        out
    }

    fn restrict(&self, w: u32, v: &[CycloNum]) -> Vector {
        self.spaces[&w].iter().map(|&i| v[i].clone()).collect()
    }

    fn homogeneous_weight(&self, v: &[CycloNum]) -> Option<Option<u32>> {
        let mut found = None;
        for (i, c) in v.iter().enumerate() {
            if !c.is_zero() {
                let w = self.weight_of[i];
                match found {
                    None => found = Some(w),
                    Some(x) if x != w => return None,
                    _ => {}
                }
            }
        }
        Some(found)
    }

    /// Insert a weight vector; returns false if dependent (or zero).
    pub fn insert_weight_vector(&mut self, v: &[CycloNum]) -> bool {
        let w = match self.homogeneous_weight(v) {
            Some(Some(w)) => w,
            Some(None) => return false,
            None => panic!("insert_weight_vector on a mixed vector"),
        };
        let local_dim = self.spaces[&w].len();
        let r = self.restrict(w, v);
        let ech = self
            .local
            .entry(w)
            .or_insert_with(|| Echelon::new(&self.ctx, local_dim));
        if ech.insert(&r) {
            let pos = ech.rank() - 1;
            self.slots.push((w, pos));
            self.by_weight.entry(w).or_default().push(self.vectors.len());
            self.vectors.push(v.to_vec());
            true
        } else {
            false
        }
    }

    /// Insert every weight component of v; returns how many were new.
    pub fn insert(&mut self, v: &[CycloNum]) -> usize {
        let comps = self.components(v);
        comps.iter().filter(|(_, c)| self.insert_weight_vector(c)).count()
    }

    pub fn contains(&self, v: &[CycloNum]) -> bool {
        self.components(v).iter().all(|(w, c)| match self.local.get(w) {
            Some(ech) => ech.contains(&self.restrict(*w, c)),
            None => false,
        })
    }

    /// Coordinates of v in terms of the inserted vectors.
    pub fn coordinates(&self, v: &[CycloNum]) -> Option<Vector> {
        let mut out = zero_vector(&self.ctx, self.vectors.len());
        for (w, c) in self.components(v) {
            let ech = self.local.get(&w)?;
            let local = ech.coordinates(&self.restrict(w, &c))?;
            for (pos, val) in local.into_iter().enumerate() {
                out[self.by_weight[&w][pos]] = val;
            }
        }
        Some(out)
    }

    /// Residual of v modulo the subspace, on the non-pivot coordinates of each weight.
    fn residual(&self, v: &[CycloNum]) -> Vector {
        let mut out = zero_vector(&self.ctx, self.dim);
        for (w, c) in self.components(v) {
            let r = self.restrict(w, &c);
            let r = match self.local.get(&w) {
                Some(ech) => ech.reduce(&r).0,
                None => r,
            };
            for (k, &i) in self.spaces[&w].iter().enumerate() {
                out[i] = r[k].clone();
            }
        }
        out
    }

    /// The action on the inserted vectors, which must span a submodule.
    pub fn submodule_rep(&self, rep: &Representation) -> Result<Representation, RepError> {
        let d = self.vectors.len();
        let mut e = Mat::zeros(&self.ctx, d, d);
        let mut f = Mat::zeros(&self.ctx, d, d);
        for (k, v) in self.vectors.iter().enumerate() {
            for (g, target) in [(&rep.e, &mut e), (&rep.f, &mut f)] {
                let image = g.apply(v);
                let c = self.coordinates(&image).ok_or(RepError::NotInvariant)?;
                for (row, val) in c.into_iter().enumerate() {
                    target.set(row, k, val);
                }
            }
        }
        let weights = self.slots.iter().map(|s| s.0).collect();
        Ok(Representation::from_weighted(&self.ctx, e, f, weights))
    }

    /// Standard basis indices complementing the subspace, in increasing order.
    pub fn complement_indices(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (&w, idx) in &self.spaces {
            let probe: Vec<bool> = match self.local.get(&w) {
                Some(ech) => {
                    let mut taken = vec![false; idx.len()];
                    for p in ech_pivots(ech) {
                        taken[p] = true;
                    }
                    taken
                }
                None => vec![false; idx.len()],
            };
            for (k, &i) in idx.iter().enumerate() {
                if !probe[k] {
                    out.push(i);
                }
            }
        }
        out.sort();
        out
    }

    /// The quotient module on the complement basis, and the projection matrix.
    pub fn quotient_rep(&self, rep: &Representation) -> Result<(Representation, Mat), RepError> {
        let comp = self.complement_indices();
        let mut pos = vec![usize::MAX; self.dim];
        for (k, &i) in comp.iter().enumerate() {
            pos[i] = k;
        }
        let d = comp.len();
        let project = |v: &[CycloNum]| -> Result<Vector, RepError> {
            let r = self.residual(v);
            let mut out = zero_vector(&self.ctx, d);
            for (i, val) in r.into_iter().enumerate() {
                if !val.is_zero() {
                    if pos[i] == usize::MAX {
                        return Err(RepError::NotInvariant);
                    }
                    out[pos[i]] = val;
                }
            }
            Ok(out)
        };
        let mut e = Mat::zeros(&self.ctx, d, d);
        let mut f = Mat::zeros(&self.ctx, d, d);
        for (k, &i) in comp.iter().enumerate() {
            for (g, target) in [(&rep.e, &mut e), (&rep.f, &mut f)] {
                let col = g.column(i);
                for (row, val) in project(&col)?.into_iter().enumerate() {
                    target.set(row, k, val);
                }
            }
        }
        let mut proj_cols = Vec::with_capacity(self.dim);
        for i in 0..self.dim {
            let mut u = zero_vector(&self.ctx, self.dim);
            u[i] = CycloNum::one(&self.ctx);
            proj_cols.push(project(&u)?);
        }
        let proj = Mat::from_columns(&self.ctx, d, &proj_cols);
        let weights = rep.weights().unwrap();
        let qw = comp.iter().map(|&i| weights[i]).collect();
        Ok((Representation::from_weighted(&self.ctx, e, f, qw), proj))
    }
}

fn ech_pivots(ech: &Echelon) -> Vec<usize> {
    ech.pivots().to_vec()
}

/// Submodule generated by the given vectors (spun by E^a F^b).
pub fn spin(rep: &Representation, gens: &[Vector]) -> GradedSubspace {
    let n = rep.n();
    let mut sub = GradedSubspace::new(rep);
    for g in gens {
        for (_, comp) in sub.components(g) {
            let mut fv = comp;
            for _ in 0..n {
                let mut ev = fv.clone();
                for _ in 0..n {
                    if is_zero_vector(&ev) {
                        break;
                    }
                    sub.insert_weight_vector(&ev);
                    ev = rep.e.apply(&ev);
                }
                fv = rep.f.apply(&fv);
                if is_zero_vector(&fv) {
                    break;
                }
            }
        }
    }
    sub
}

pub fn direct_sum(ctx: &Arc<CycloContext>, mods: &[&Representation]) -> Representation {
    if mods.is_empty() {
        return Representation::from_weighted(ctx, Mat::zeros(ctx, 0, 0), Mat::zeros(ctx, 0, 0), vec![]);
    }
    let es: Vec<&Mat> = mods.iter().map(|m| &m.e).collect();
    let fs: Vec<&Mat> = mods.iter().map(|m| &m.f).collect();
    let e = Mat::block_diag(ctx, &es);
    let f = Mat::block_diag(ctx, &fs);
    let mut parts = Vec::new();
    let mut off = 0;
    for m in mods {
        for p in &m.parts {
            parts.push(Part {
                offset: off + p.offset,
                dim: p.dim,
                label: p.label.clone(),
            });
        }
        off += m.dim;
    }
    let mut rep = if mods.iter().all(|m| m.weights.is_some()) {
        let weights = mods
            .iter()
            .flat_map(|m| m.weights.as_ref().unwrap().iter().copied())
            .collect();
        Representation::from_weighted(ctx, e, f, weights)
    } else {
        let ks: Vec<&Mat> = mods.iter().map(|m| &m.k).collect();
        let kis: Vec<&Mat> = mods.iter().map(|m| &m.kinv).collect();
        Representation {
            ctx: ctx.clone(),
            dim: off,
            e,
            f,
            k: Mat::block_diag(ctx, &ks),
            kinv: Mat::block_diag(ctx, &kis),
            weights: None,
            label: None,
            parts: vec![],
            eigen: OnceLock::new(),
        }
    };
    parts.retain(|p| p.dim > 0);
    rep.parts = parts;
    if mods.len() == 1 {
        rep.label = mods[0].label.clone();
    }
    rep
}

/// Index s with 1_s v = v for a vector of weight exponent w.
pub fn projection_index(m: u32, w: u32) -> u32 {
    (m - w % m) % m
}

/// The quasi-Hopf tensor product M ⊗ N.
pub fn tensor(a: &Representation, b: &Representation) -> Result<Representation, RepError> {
    if a.n() != b.n() {
        return Err(RepError::Mismatch(a.n(), b.n()));
    }
    let ctx = a.context();
    let n = a.n();
    let m = ctx.m();
    let t1 = a.weight_projector(|w| projection_index(m, w) < 2 * n)?;
    let t2 = a.weight_projector(|w| projection_index(m, w) >= 2 * n)?;
    let t3 = a.weight_projector(|w| projection_index(m, w) < m - 2 * n)?;
    let t4 = a.weight_projector(|w| projection_index(m, w) >= m - 2 * n)?;
    let ib = Mat::identity(ctx, b.dim);
    let ia = Mat::identity(ctx, a.dim);
    let e = a
        .e
        .mul(&t1)
        .kron(&b.k_power(-(n as i64)))
        .add(&a.e.mul(&t2).kron(&ib))
        .add(&a.k.kron(&b.e));
    let f = a
        .f
        .mul(&t3)
        .kron(&b.k_power(-1))
        .add(&a.f.mul(&t4).kron(&b.k_power(n as i64 - 1)))
        .add(&ia.kron(&b.f));
    if let (Some(wa), Some(wb)) = (&a.weights, &b.weights) {
        let mut weights = Vec::with_capacity(a.dim * b.dim);
        for &x in wa {
            for &y in wb {
                weights.push((x + y) % m);
            }
        }
        return Ok(Representation::from_weighted(ctx, e, f, weights));
    }
    Ok(Representation {
        ctx: ctx.clone(),
        dim: a.dim * b.dim,
        e,
        f,
        k: a.k.kron(&b.k),
        kinv: a.kinv.kron(&b.kinv),
        weights: None,
        label: None,
        parts: vec![Part {
            offset: 0,
            dim: a.dim * b.dim,
            label: None,
        }],
        eigen: OnceLock::new(),
    })
}

/// All violated defining relations (empty when the module is valid).
pub fn validate(rep: &Representation) -> Vec<String> {
    let ctx = rep.context();
    let d = rep.dim;
    let n = rep.n() as u64;
    let mut out = Vec::new();
    let id = Mat::identity(ctx, d);
    if rep.k.mul(&rep.kinv) != id {
        out.push("K K^-1 = 1".to_string());
    }
    if rep.k.pow(ctx.m() as u64) != id {
        out.push("K^(n^2) = 1".to_string());
    }
    if !rep.e.pow(n).is_zero() {
        out.push("E^n = 0".to_string());
    }
    if !rep.f.pow(n).is_zero() {
        out.push("F^n = 0".to_string());
    }
    let q2 = q_power(ctx, 2);
    if rep.k.mul(&rep.e) != rep.e.mul(&rep.k).scale(&q2) {
        out.push("K E K^-1 = q^2 E".to_string());
    }
    if rep.k.mul(&rep.f).scale(&q2) != rep.f.mul(&rep.k) {
        out.push("K F K^-1 = q^-2 F".to_string());
    }
    let qq = (q_power(ctx, 1) - q_power(ctx, -1)).inv().unwrap();
    let lhs = rep.e.mul(&rep.f).sub(&rep.f.mul(&rep.e));
    let rhs = rep.k.sub(&rep.kinv).scale(&qq);
    if lhs != rhs {
        out.push("[E,F] = (K - K^-1)/(q - q^-1)".to_string());
    }
    out
}

pub fn block_index(rep: &Representation) -> Result<BlockIndex, RepError> {
    let n = rep.n();
    let ws = rep.weight_multiset()?;
    let mut found = None;
    for w in ws {
        // K^n = ζ^{nw} = q^{w mod n} = q^{n-i}
        let i = (n - w % n) % n;
        match found {
            None => found = Some(i),
            Some(x) if x != i => return Ok(BlockIndex::Mixed),
            _ => {}
        }
    }
    Ok(BlockIndex::Block(found.unwrap_or(0)))
}

/// Kernel of F restricted to a weight space, as vectors of the module.
pub fn lowest_weight_vectors(rep: &Representation, w: u32) -> Vec<Vector> {
    let spaces = rep.weight_spaces();
    let Some(idx) = spaces.get(&w) else {
        return vec![];
    };
    let all: Vec<usize> = (0..rep.dim).collect();
    let block = rep.f.select(&all, idx);
    nullspace(block.to_dense(), idx.len(), rep.context())
        .into_iter()
        .map(|local| {
            let mut v = zero_vector(rep.context(), rep.dim);
            for (k, &i) in idx.iter().enumerate() {
                v[i] = local[k].clone();
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclo::make_context;

    #[test]
    fn constructors_validate() {
        let ctx = make_context(3).unwrap();
        for l in 1..=3 {
            assert!(validate(&simple_v(&ctx, l).unwrap()).is_empty());
        }
        for t in 1..3 {
            for r in 0..3 {
                assert!(validate(&block_simple_v(&ctx, t, r).unwrap()).is_empty());
            }
        }
        let v2 = simple_v(&ctx, 2).unwrap();
        assert!(v2.f().get(0, 1).is_one());
    }

    #[test]
    fn label_round_trip() {
        for s in ["Simple(2)", "BlockSimple(1,0)", "Proj(1)", "Syzygy(-,3,2)", "Band(2,1,inf)"] {
            let l: IndecompLabel = s.parse().unwrap();
            assert_eq!(l.to_string(), s);
        }
        assert!("Foo(1)".parse::<IndecompLabel>().is_err());
    }

    #[test]
    fn corrupted_module_is_reported() {
        let ctx = make_context(3).unwrap();
        let v3 = simple_v(&ctx, 3).unwrap();
        let bad = v3.perturbed(Generator::E, 1, 0, &CycloNum::one(&ctx));
        let problems = validate(&bad);
        assert!(problems.iter().any(|p| p.starts_with("[E,F]")));
    }
}
