//! Hom spaces, isomorphism witnesses, summand splitting, radical/socle/top,
//! projective covers and syzygies.
//!
//! Hom(S, T) is computed from a presentation of S: greedy generators g_j
//! (standard basis vectors) are spun to words E^a F^b g_j; independent words
//! form a basis and every other word gives a relation. A hom is a choice of
//! v_j ∈ T of the weight of g_j satisfying every relation, since
//! F·E^a F^b g = E^a F^{b+1} g + c·E^{a-1} F^b g with c depending only on
//! the weight.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::cyclo::{CycloContext, CycloNum};
use crate::hmodel::Algebra;
use crate::linalg::{nullspace, rank_dense, rref, zero_vector, Mat, Vector};
use crate::repcore::{
    block_index, block_simple_v, direct_sum, lowest_weight_vectors, projective, simple_v, BlockIndex,
    GradedSubspace, IndecompLabel, RepError, Representation, Sign,
};

#[derive(Debug, Error)]
pub enum HomError {
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error("modules over different fields (n = {0} and n = {1})")]
    Mismatch(u32, u32),
    #[error("retry budget exhausted: {0}")]
    Budget(String),
    #[error("not constructible: {0}")]
    Unsupported(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("dimension count does not reconcile: {0}")]
    Reconcile(String),
}

/// Derive a per-task seed from the global seed and a task tag.
pub fn derive_seed(seed: u64, tag: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(tag.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().unwrap())
}

/// Parameters for seeded generic-combination searches.
#[derive(Clone, Copy, Debug)]
pub struct SearchParams {
    pub seed: u64,
    pub budget: u32,
    pub bound: i64,
}

impl SearchParams {
    pub fn new(seed: u64) -> Self {
        SearchParams {
            seed,
            budget: 64,
            bound: 8,
        }
    }

    pub fn tagged(&self, tag: &str) -> Self {
        SearchParams {
            seed: derive_seed(self.seed, tag),
            ..*self
        }
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

#[derive(Clone, Debug)]
pub struct HomSpace {
    pub source_dim: usize,
    pub target_dim: usize,
    pub basis: Vec<Mat>,
}

impl HomSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn combination(&self, ctx: &Arc<CycloContext>, coeffs: &[i64]) -> Mat {
        let mut acc = Mat::zeros(ctx, self.target_dim, self.source_dim);
        for (t, &c) in self.basis.iter().zip(coeffs) {
            if c != 0 {
                acc = acc.add(&t.scale(&CycloNum::from_int(ctx, c)));
            }
        }
        acc
    }
}

/// T·ρ_M(x) = ρ_N(x)·T for x ∈ {E, F, K}.
pub fn is_intertwiner(t: &Mat, m: &Representation, n: &Representation) -> bool {
    t.nrows() == n.dim()
        && t.ncols() == m.dim()
        && t.mul(m.e()) == n.e().mul(t)
        && t.mul(m.f()) == n.f().mul(t)
        && t.mul(m.k()) == n.k().mul(t)
}

fn check_same_field(a: &Representation, b: &Representation) -> Result<(), HomError> {
    if a.n() != b.n() {
        return Err(HomError::Mismatch(a.n(), b.n()));
    }
    Ok(())
}

struct Presentation {
    gen_weight: Vec<u32>,
    // basis words (generator, a, b)
    words: Vec<(usize, u32, u32)>,
    // (generator, a, b, coefficients over basis words)
    relations: Vec<(usize, u32, u32, Vec<(usize, CycloNum)>)>,
    // coordinates of each standard basis vector over the basis words
    coords: Vec<Vec<(usize, CycloNum)>>,
}

fn sparse(v: Vector) -> Vec<(usize, CycloNum)> {
    v.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect()
}

fn present(rep: &Representation) -> Presentation {
    let ctx = rep.context();
    let n = rep.n();
    let d = rep.dim();
    let weights = rep.weights().expect("weighted module");
    let mut sub = GradedSubspace::new(rep);
    let mut gen_weight = Vec::new();
    let mut words = Vec::new();
    let mut pending: Vec<(usize, u32, u32, Vector)> = Vec::new();
    for i in 0..d {
        let mut unit = zero_vector(ctx, d);
        unit[i] = CycloNum::one(ctx);
        if sub.contains(&unit) {
            continue;
        }
        let j = gen_weight.len();
        gen_weight.push(weights[i]);
        let mut fv = unit;
        for b in 0..n {
            let mut ev = fv.clone();
            for a in 0..n {
                if sub.insert_weight_vector(&ev) {
                    words.push((j, a, b));
                } else {
                    pending.push((j, a, b, ev.clone()));
                }
                ev = rep.e().apply(&ev);
            }
            fv = rep.f().apply(&fv);
        }
    }
    // later words may have been inserted after a relation was recorded, but a
    // dependent vector only uses words inserted before it
    let relations = pending
        .into_iter()
        .map(|(j, a, b, v)| {
            let c = sub.coordinates(&v).expect("dependent word");
            (j, a, b, sparse(c))
        })
        .collect();
    let coords = (0..d)
        .map(|i| {
            let mut unit = zero_vector(ctx, d);
            unit[i] = CycloNum::one(ctx);
            sparse(sub.coordinates(&unit).expect("spanning words"))
        })
        .collect();
    Presentation {
        gen_weight,
        words,
        relations,
        coords,
    }
}

// images[a * n + b][p] = E^a F^b u_p for u_p the p-th basis vector of weight w
fn word_images(target: &Representation, idx: &[usize]) -> Vec<Vec<Vector>> {
    let ctx = target.context();
    let n = target.n() as usize;
    let d = target.dim();
    let mut out = vec![Vec::with_capacity(idx.len()); n * n];
    for &i in idx {
        let mut fv = zero_vector(ctx, d);
        fv[i] = CycloNum::one(ctx);
        for b in 0..n {
            let mut ev = fv.clone();
            for a in 0..n {
                let next = target.e().apply(&ev);
                out[a * n + b].push(std::mem::replace(&mut ev, next));
            }
            fv = target.f().apply(&fv);
        }
    }
    out
}

fn hom_from_presentation(pres: &Presentation, source: &Representation, target: &Representation) -> HomSpace {
    let ctx = source.context();
    let n = source.n();
    let m = ctx.m();
    let tspaces = target.weight_spaces();
    let empty: Vec<usize> = Vec::new();
    let mut offsets = Vec::with_capacity(pres.gen_weight.len());
    let mut unknowns = 0usize;
    for w in &pres.gen_weight {
        offsets.push(unknowns);
        unknowns += tspaces.get(w).map_or(0, |v| v.len());
    }
    let mut basis = Vec::new();
    if unknowns > 0 {
        let mut cache: HashMap<u32, Vec<Vec<Vector>>> = HashMap::new();
        for w in &pres.gen_weight {
            cache
                .entry(*w)
                .or_insert_with(|| word_images(target, tspaces.get(w).unwrap_or(&empty)));
        }
        let img = |j: usize, a: u32, b: u32| &cache[&pres.gen_weight[j]][(a * n + b) as usize];
        let mut rows: Vec<Vector> = Vec::new();
        for (j, a, b, rel) in &pres.relations {
            let mu = (pres.gen_weight[*j] as i64 + 2 * n as i64 * (*a as i64 - *b as i64)).rem_euclid(m as i64) as u32;
            let Some(coords) = tspaces.get(&mu) else { continue };
            for &i in coords {
                let mut row = zero_vector(ctx, unknowns);
                for (p, v) in img(*j, *a, *b).iter().enumerate() {
                    if !v[i].is_zero() {
                        row[offsets[*j] + p] += &v[i];
                    }
                }
                for (k, c) in rel {
                    let (jk, ak, bk) = pres.words[*k];
                    for (p, v) in img(jk, ak, bk).iter().enumerate() {
                        if !v[i].is_zero() {
                            row[offsets[jk] + p] -= &(c * &v[i]);
                        }
                    }
                }
                if row.iter().any(|x| !x.is_zero()) {
                    rows.push(row);
                }
            }
        }
        for x in nullspace(rows, unknowns, ctx) {
            // image of each basis word
            let images: Vec<Vector> = pres
                .words
                .iter()
                .map(|&(j, a, b)| {
                    let mut acc = zero_vector(ctx, target.dim());
                    for (p, v) in img(j, a, b).iter().enumerate() {
                        let c = &x[offsets[j] + p];
                        if c.is_zero() {
                            continue;
                        }
                        for (r, val) in v.iter().enumerate() {
                            if !val.is_zero() {
                                acc[r] += &(c * val);
                            }
                        }
                    }
                    acc
                })
                .collect();
            let cols: Vec<Vector> = pres
                .coords
                .iter()
                .map(|coord| {
                    let mut acc = zero_vector(ctx, target.dim());
                    for (k, c) in coord {
                        for (r, val) in images[*k].iter().enumerate() {
                            if !val.is_zero() {
                                acc[r] += &(c * val);
                            }
                        }
                    }
                    acc
                })
                .collect();
            basis.push(Mat::from_columns(ctx, target.dim(), &cols));
        }
    }
    HomSpace {
        source_dim: source.dim(),
        target_dim: target.dim(),
        basis,
    }
}

fn hom_weighted(source: &Representation, target: &Representation) -> HomSpace {
    let ctx = source.context();
    let parts = source.parts();
    if parts.len() <= 1 {
        return hom_from_presentation(&present(source), source, target);
    }
    // one solve per distinct summand, embedded at each offset
    let mut distinct: Vec<(Representation, HomSpace)> = Vec::new();
    let mut basis = Vec::new();
    for part in parts {
        let idx: Vec<usize> = (part.offset..part.offset + part.dim).collect();
        let piece = source.coordinate_summand(&idx);
        let pos = distinct.iter().position(|(r, _)| {
            r.weights() == piece.weights() && r.e() == piece.e() && r.f() == piece.f()
        });
        let pos = match pos {
            Some(p) => p,
            None => {
                let h = hom_from_presentation(&present(&piece), &piece, target);
                distinct.push((piece, h));
                distinct.len() - 1
            }
        };
        let before = Mat::zeros(ctx, target.dim(), part.offset);
        let after = Mat::zeros(ctx, target.dim(), source.dim() - part.offset - part.dim);
        for t in &distinct[pos].1.basis {
            basis.push(Mat::hstack(&[&before, t, &after]));
        }
    }
    HomSpace {
        source_dim: source.dim(),
        target_dim: target.dim(),
        basis,
    }
}

/// Basis of Hom_H(M, N).
pub fn hom_space(m: &Representation, n: &Representation) -> Result<HomSpace, HomError> {
    check_same_field(m, n)?;
    let (mw, ms) = m.weight_form()?;
    let (nw, ns) = n.weight_form()?;
    let mut h = hom_weighted(&mw, &nw);
    if ms.is_some() || ns.is_some() {
        h.basis = h
            .basis
            .into_iter()
            .map(|t| {
                let t = match &ms {
                    Some((_, inv)) => t.mul(inv),
                    None => t,
                };
                match &ns {
                    Some((s, _)) => s.mul(&t),
                    None => t,
                }
            })
            .collect();
    }
    Ok(h)
}

pub fn hom_dim(m: &Representation, n: &Representation) -> Result<usize, HomError> {
    Ok(hom_space(m, n)?.dim())
}

/// Hom by solving T·X_M = X_N·T over all dim N × dim M entries; small inputs only.
pub fn hom_space_naive(m: &Representation, n: &Representation) -> HomSpace {
    let ctx = m.context();
    let (dm, dn) = (m.dim(), n.dim());
    let unknowns = dm * dn;
    let var = |r: usize, c: usize| r * dm + c;
    let mut rows = Vec::new();
    for (xm, xn) in [(m.e(), n.e()), (m.f(), n.f()), (m.k(), n.k())] {
        let xm = xm.to_dense();
        let xn = xn.to_dense();
        // (T X_M - X_N T)[r][c] = Σ_k T[r][k] X_M[k][c] - Σ_k X_N[r][k] T[k][c]
        for r in 0..dn {
            for c in 0..dm {
                let mut row = zero_vector(ctx, unknowns);
                for k in 0..dm {
                    if !xm[k][c].is_zero() {
                        row[var(r, k)] += &xm[k][c];
                    }
                }
                for k in 0..dn {
                    if !xn[r][k].is_zero() {
                        row[var(k, c)] -= &xn[r][k];
                    }
                }
                rows.push(row);
            }
        }
    }
    let basis = nullspace(rows, unknowns, ctx)
        .into_iter()
        .map(|x| {
            let dense: Vec<Vector> = (0..dn).map(|r| x[r * dm..(r + 1) * dm].to_vec()).collect();
            Mat::from_dense(ctx, dn, dm, &dense)
        })
        .collect();
    HomSpace {
        source_dim: dm,
        target_dim: dn,
        basis,
    }
}

/// Outcome of an isomorphism search.
#[derive(Clone, Debug)]
pub enum IsoResult {
    /// An invertible intertwiner M → N.
    Found(Mat),
    /// No isomorphism exists (forced by an exact argument).
    None(String),
    /// The retry budget ran out.
    Unverified(String),
}

impl IsoResult {
    pub fn witness(&self) -> Option<&Mat> {
        match self {
            IsoResult::Found(t) => Some(t),
            _ => None,
        }
    }
}

// weight blocks (rows of N, cols of M) of a weight-preserving map
fn weight_blocks(m: &Representation, n: &Representation) -> Vec<(Vec<usize>, Vec<usize>)> {
    let ms = m.weight_spaces();
    let ns = n.weight_spaces();
    ms.into_iter()
        .map(|(w, cols)| (ns.get(&w).cloned().unwrap_or_default(), cols))
        .collect()
}

fn blocks_invertible(t: &Mat, blocks: &[(Vec<usize>, Vec<usize>)]) -> bool {
    blocks
        .iter()
        .all(|(r, c)| r.len() == c.len() && !t.select(r, c).determinant().is_zero())
}

fn block_inverse(ctx: &Arc<CycloContext>, t: &Mat, blocks: &[(Vec<usize>, Vec<usize>)]) -> Mat {
    let mut inv = Mat::zeros(ctx, t.ncols(), t.nrows());
    for (r, c) in blocks {
        let b = t.select(r, c).inverse().expect("invertible block");
        for (i, &ci) in c.iter().enumerate() {
            for (j, &rj) in r.iter().enumerate() {
                let v = b.get(i, j);
                if !v.is_zero() {
                    inv.set(ci, rj, v);
                }
            }
        }
    }
    inv
}

fn search_invertible(
    ctx: &Arc<CycloContext>,
    hom: &HomSpace,
    blocks: &[(Vec<usize>, Vec<usize>)],
    dim: usize,
    params: &SearchParams,
) -> IsoResult {
    let h = hom.dim();
    if h == 0 {
        return IsoResult::None("Hom space is zero".into());
    }
    if h <= 2 {
        // det of x T1 + y T2 is homogeneous of degree dim in (x, y); more than
        // dim distinct projective points that all fail force it to vanish
        let mut points = vec![vec![1i64]];
        if h == 2 {
            points = vec![vec![0, 1]];
            for x in 0..=dim as i64 {
                points.push(vec![1, x]);
            }
        }
        for p in points {
            let t = hom.combination(ctx, &p);
            if blocks_invertible(&t, blocks) {
                return IsoResult::Found(t);
            }
        }
        return IsoResult::None(format!("no invertible element in a Hom space of dimension {}", h));
    }
    let mut rng = params.rng();
    for _ in 0..params.budget {
        let coeffs: Vec<i64> = (0..h).map(|_| rng.gen_range(-params.bound..=params.bound)).collect();
        if coeffs.iter().all(|&c| c == 0) {
            continue;
        }
        let t = hom.combination(ctx, &coeffs);
        if blocks_invertible(&t, blocks) {
            return IsoResult::Found(t);
        }
    }
    IsoResult::Unverified(format!(
        "{} random combinations of a Hom space of dimension {} were singular",
        params.budget, h
    ))
}

/// Search for an invertible intertwiner M → N.
pub fn find_isomorphism(m: &Representation, n: &Representation, params: &SearchParams) -> Result<IsoResult, HomError> {
    check_same_field(m, n)?;
    let ctx = m.context();
    if m.dim() != n.dim() {
        return Ok(IsoResult::None(format!("dimensions {} and {} differ", m.dim(), n.dim())));
    }
    if m.weight_multiset()? != n.weight_multiset()? {
        return Ok(IsoResult::None("K-spectra differ".into()));
    }
    if m.dim() == 0 {
        return Ok(IsoResult::Found(Mat::zeros(ctx, 0, 0)));
    }
    let (mw, ms) = m.weight_form()?;
    let (nw, ns) = n.weight_form()?;
    // solve from the side with more summands; its presentation is cheaper
    let flipped = nw.parts().len() > mw.parts().len();
    let (src, dst) = if flipped { (&nw, &mw) } else { (&mw, &nw) };
    let hom = hom_weighted(src, dst);
    let blocks = weight_blocks(src, dst);
    let res = search_invertible(ctx, &hom, &blocks, m.dim(), params);
    let IsoResult::Found(t) = res else { return Ok(res) };
    let mut t = if flipped { block_inverse(ctx, &t, &blocks) } else { t };
    if let Some((_, inv)) = &ms {
        t = t.mul(inv);
    }
    if let Some((s, _)) = &ns {
        t = s.mul(&t);
    }
    Ok(IsoResult::Found(t))
}

/// Independent check that T: M → N is an invertible intertwiner.
pub fn check_witness(t: &Mat, m: &Representation, n: &Representation) -> bool {
    if !is_intertwiner(t, m, n) {
        return false;
    }
    match (m.weights(), n.weights()) {
        (Some(_), Some(_)) => blocks_invertible(t, &weight_blocks(m, n)),
        _ => t.nrows() == t.ncols() && t.rank() == t.nrows(),
    }
}

/// Hom dimensions against each claimed summand type, for diagnostics.
#[derive(Clone, Debug)]
pub struct ClaimDiagnostics {
    pub module_dim: usize,
    pub claim_dim: usize,
    pub hom_table: Vec<(IndecompLabel, usize, usize)>,
    pub detail: String,
}

impl ClaimDiagnostics {
    pub fn to_json(&self) -> Value {
        json!({
            "module_dim": self.module_dim,
            "claim_dim": self.claim_dim,
            "hom_table": self.hom_table.iter().map(|(l, a, b)| json!({
                "label": l.to_string(), "hom_from_label_to_module": a, "hom_from_label_to_claim": b,
            })).collect::<Vec<_>>(),
            "detail": self.detail,
        })
    }
}

#[derive(Clone, Debug)]
pub enum ClaimOutcome {
    Verified(Mat),
    Refuted(ClaimDiagnostics),
    Unverified(ClaimDiagnostics),
}

/// A multiset of indecomposable labels.
pub type Claim = BTreeMap<IndecompLabel, usize>;

pub fn claim_from_list(items: &[IndecompLabel]) -> Claim {
    let mut c = Claim::new();
    for l in items {
        *c.entry(l.clone()).or_default() += 1;
    }
    c
}

pub fn claim_to_string(c: &Claim) -> String {
    if c.is_empty() {
        return "0".into();
    }
    c.iter()
        .map(|(l, k)| if *k == 1 { l.to_string() } else { format!("{}*{}", k, l) })
        .collect::<Vec<_>>()
        .join(" + ")
}

/// Shared context for constructions: seeded search parameters and a label cache.
pub struct Engine {
    ctx: Arc<CycloContext>,
    alg: Algebra,
    params: SearchParams,
    cache: Mutex<HashMap<IndecompLabel, Arc<Representation>>>,
}

impl Engine {
    pub fn new(ctx: &Arc<CycloContext>, seed: u64) -> Self {
        Engine {
            ctx: ctx.clone(),
            alg: Algebra::new(ctx),
            params: SearchParams::new(seed),
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_params(mut self, budget: u32, bound: i64) -> Self {
        self.params.budget = budget;
        self.params.bound = bound;
        self
    }

    pub fn context(&self) -> &Arc<CycloContext> {
        &self.ctx
    }

    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn n(&self) -> u32 {
        self.ctx.n()
    }

    pub fn params(&self) -> SearchParams {
        self.params
    }

    pub fn seed(&self) -> u64 {
        self.params.seed
    }

    pub fn params_for(&self, tag: &str) -> SearchParams {
        self.params.tagged(tag)
    }

    /// The module for a label (cached).
    pub fn build(&self, label: &IndecompLabel) -> Result<Arc<Representation>, HomError> {
        let label = label.normalized(self.n())?;
        if let Some(r) = self.cache.lock().unwrap().get(&label) {
            return Ok(r.clone());
        }
        let rep = match &label {
            IndecompLabel::Simple(l) => simple_v(&self.ctx, *l)?,
            IndecompLabel::BlockSimple(t, r) => block_simple_v(&self.ctx, *t, *r as i64)?,
            IndecompLabel::Proj(l) => projective(&self.alg, *l)?,
            IndecompLabel::Syzygy(sign, s, l) => {
                let prev = if *s == 1 {
                    self.build(&IndecompLabel::Simple(*l))?
                } else {
                    self.build(&IndecompLabel::Syzygy(*sign, s - 1, *l))?
                };
                let params = self.params_for(&label.to_string());
                let out = match sign {
                    Sign::Plus => omega(self, &prev, &params)?,
                    Sign::Minus => omega_inverse(self, &prev, &params)?,
                };
                out.with_label(label.clone())
            }
            IndecompLabel::Band(..) => {
                return Err(HomError::Unsupported(format!("{} (band modules are not constructed)", label)))
            }
        };
        let rep = Arc::new(rep);
        self.cache.lock().unwrap().insert(label, rep.clone());
        Ok(rep)
    }

    pub fn build_claim(&self, claim: &Claim) -> Result<Representation, HomError> {
        let mut mods = Vec::new();
        for (l, k) in claim {
            let r = self.build(l)?;
            for _ in 0..*k {
                mods.push(r.clone());
            }
        }
        let refs: Vec<&Representation> = mods.iter().map(|r| r.as_ref()).collect();
        Ok(direct_sum(&self.ctx, &refs))
    }

    /// Simples of the given block.
    pub fn block_simples(&self, block: BlockIndex) -> Result<Vec<Arc<Representation>>, HomError> {
        let n = self.n();
        let labels: Vec<IndecompLabel> = match block {
            BlockIndex::Block(0) => (1..=n).map(IndecompLabel::Simple).collect(),
            BlockIndex::Block(i) => (0..n).map(|r| IndecompLabel::BlockSimple(n - i, r)).collect(),
            BlockIndex::Mixed => (1..=n)
                .map(IndecompLabel::Simple)
                .chain((1..n).flat_map(|t| (0..n).map(move |r| IndecompLabel::BlockSimple(t, r))))
                .collect(),
        };
        labels.iter().map(|l| self.build(l)).collect()
    }
}

/// Check M ≅ ⊕ claim and re-check the witness independently.
pub fn verify_claim(engine: &Engine, m: &Representation, claim: &Claim, tag: &str) -> Result<ClaimOutcome, HomError> {
    let target = engine.build_claim(claim)?;
    let params = engine.params_for(tag);
    let res = find_isomorphism(m, &target, &params)?;
    let diagnostics = |detail: String| -> Result<ClaimDiagnostics, HomError> {
        let mut hom_table = Vec::new();
        for l in claim.keys() {
            let x = engine.build(l)?;
            hom_table.push((l.clone(), hom_dim(&x, m)?, hom_dim(&x, &target)?));
        }
        Ok(ClaimDiagnostics {
            module_dim: m.dim(),
            claim_dim: target.dim(),
            hom_table,
            detail,
        })
    };
    Ok(match res {
        IsoResult::Found(t) => {
            if check_witness(&t, m, &target) {
                ClaimOutcome::Verified(t)
            } else {
                ClaimOutcome::Unverified(diagnostics("witness failed the independent check".into())?)
            }
        }
        IsoResult::None(d) => ClaimOutcome::Refuted(diagnostics(d)?),
        IsoResult::Unverified(d) => ClaimOutcome::Unverified(diagnostics(d)?),
    })
}

fn block_of_weight(n: u32, w: u32) -> u32 {
    (n - w % n) % n
}

/// Summand of a weighted module lying in block i.
pub fn block_component(m: &Representation, i: u32) -> Representation {
    let n = m.n();
    let ws = m.weights().expect("weighted module");
    let idx: Vec<usize> = (0..m.dim()).filter(|&k| block_of_weight(n, ws[k]) == i).collect();
    m.coordinate_summand(&idx)
}

/// Multiplicities of the simples **V**(t, r) in a module of a semisimple block.
pub fn decompose_semisimple(m: &Representation) -> Result<Claim, HomError> {
    let (mw, _) = m.weight_form()?;
    let n = m.n();
    let i = match block_index(&mw)? {
        BlockIndex::Block(i) if i >= 1 => i,
        BlockIndex::Block(_) if mw.dim() == 0 => return Ok(Claim::new()),
        other => return Err(HomError::Precondition(format!("block {:?} is not semisimple", other))),
    };
    let t = n - i;
    let inv2 = (n + 1) / 2;
    let mut out = Claim::new();
    let mut total = 0;
    for w in mw.weight_spaces().keys() {
        let k = lowest_weight_vectors(&mw, *w).len();
        if k == 0 {
            continue;
        }
        // lowest weight of V(t, r) is t + 2nr
        let r = (((*w as i64 - t as i64) / n as i64).rem_euclid(n as i64) as u32 * inv2) % n;
        out.insert(IndecompLabel::BlockSimple(t, r), k);
        total += k * n as usize;
    }
    if total != mw.dim() {
        return Err(HomError::Reconcile(format!("{} lowest weight vectors for dimension {}", total / n as usize, mw.dim())));
    }
    Ok(out)
}

fn graded_kernel(map: &Mat, source: &Representation, target: &Representation) -> GradedSubspace {
    let ctx = source.context();
    let mut sub = GradedSubspace::new(source);
    let tspaces = target.weight_spaces();
    for (w, cols) in source.weight_spaces() {
        let rows = tspaces.get(&w).cloned().unwrap_or_default();
        let block = map.select(&rows, &cols);
        for v in nullspace(block.to_dense(), cols.len(), ctx) {
            let mut full = zero_vector(ctx, source.dim());
            for (k, &c) in cols.iter().enumerate() {
                full[c] = v[k].clone();
            }
            sub.insert_weight_vector(&full);
        }
    }
    sub
}

fn graded_image(map: &Mat, target: &Representation) -> GradedSubspace {
    let mut sub = GradedSubspace::new(target);
    for col in map.columns() {
        sub.insert(&col);
    }
    sub
}

fn block_ranks_full(map: &Mat, source: &Representation, target: &Representation, by_rows: bool) -> bool {
    let tspaces = target.weight_spaces();
    let sspaces = source.weight_spaces();
    let weights: Vec<u32> = if by_rows {
        tspaces.keys().copied().collect()
    } else {
        sspaces.keys().copied().collect()
    };
    weights.into_iter().all(|w| {
        let rows = tspaces.get(&w).cloned().unwrap_or_default();
        let cols = sspaces.get(&w).cloned().unwrap_or_default();
        let need = if by_rows { rows.len() } else { cols.len() };
        need == 0 || map.select(&rows, &cols).rank() == need
    })
}

pub struct SubmoduleData {
    pub basis: Vec<Vector>,
    pub module: Representation,
}

fn weighted_block(engine: &Engine, m: &Representation) -> Result<(Representation, BlockIndex, Vec<Arc<Representation>>), HomError> {
    let (mw, _) = m.weight_form()?;
    let b = block_index(&mw)?;
    let simples = engine.block_simples(b)?;
    Ok((mw, b, simples))
}

/// Sum of the images of all homs from simples (in the weight basis of M).
pub fn socle(engine: &Engine, m: &Representation) -> Result<SubmoduleData, HomError> {
    let (mw, _, simples) = weighted_block(engine, m)?;
    let mut sub = GradedSubspace::new(&mw);
    for s in simples {
        for t in hom_space(&s, &mw)?.basis {
            for col in t.columns() {
                sub.insert(&col);
            }
        }
    }
    let module = sub.submodule_rep(&mw)?;
    Ok(SubmoduleData {
        basis: sub.vectors().to_vec(),
        module,
    })
}

/// Intersection of the kernels of all homs to simples.
pub fn radical(engine: &Engine, m: &Representation) -> Result<SubmoduleData, HomError> {
    let (mw, _, simples) = weighted_block(engine, m)?;
    let ctx = mw.context();
    let mut maps = Vec::new();
    for s in &simples {
        maps.extend(hom_space(&mw, s)?.basis);
    }
    let refs: Vec<&Mat> = maps.iter().collect();
    let stacked = if refs.is_empty() {
        Mat::zeros(ctx, 0, mw.dim())
    } else {
        Mat::vstack(&refs)
    };
    let sub = stacked_kernel(&stacked, &mw);
    let module = sub.submodule_rep(&mw)?;
    Ok(SubmoduleData {
        basis: sub.vectors().to_vec(),
        module,
    })
}

// kernel of a map that need not be weight-preserving as a whole but is a
// stack of weight-preserving maps
fn stacked_kernel(map: &Mat, source: &Representation) -> GradedSubspace {
    let ctx = source.context();
    let mut sub = GradedSubspace::new(source);
    let all_rows: Vec<usize> = (0..map.nrows()).collect();
    for (_, cols) in source.weight_spaces() {
        let block = map.select(&all_rows, &cols);
        for v in nullspace(block.to_dense(), cols.len(), ctx) {
            let mut full = zero_vector(ctx, source.dim());
            for (k, &c) in cols.iter().enumerate() {
                full[c] = v[k].clone();
            }
            sub.insert_weight_vector(&full);
        }
    }
    sub
}

/// M / rad M and the multiplicities of its simple constituents.
pub fn top(engine: &Engine, m: &Representation) -> Result<(Representation, Claim), HomError> {
    let (mw, _, simples) = weighted_block(engine, m)?;
    let rad = radical(engine, &mw)?;
    let mut sub = GradedSubspace::new(&mw);
    for v in &rad.basis {
        sub.insert_weight_vector(v);
    }
    let (quot, _) = sub.quotient_rep(&mw)?;
    let mut claim = Claim::new();
    for s in simples {
        let k = hom_dim(&mw, &s)?;
        if k > 0 {
            claim.insert(s.label().unwrap().clone(), k);
        }
    }
    Ok((quot, claim))
}

fn projective_label(n: u32, l: u32) -> IndecompLabel {
    if l == n {
        IndecompLabel::Simple(n)
    } else {
        IndecompLabel::Proj(l)
    }
}

fn random_combination(ctx: &Arc<CycloContext>, hom: &HomSpace, rng: &mut ChaCha8Rng, bound: i64) -> Mat {
    let coeffs: Vec<i64> = (0..hom.dim()).map(|_| rng.gen_range(-bound..=bound)).collect();
    hom.combination(ctx, &coeffs)
}

/// Projective cover P → M of a weighted module.
pub fn projective_cover(engine: &Engine, m: &Representation, params: &SearchParams) -> Result<(Representation, Mat), HomError> {
    let ctx = engine.context();
    let n = engine.n();
    let (mw, _) = m.weight_form()?;
    match block_index(&mw)? {
        BlockIndex::Block(i) if i >= 1 => return Ok((mw.clone(), Mat::identity(ctx, mw.dim()))),
        BlockIndex::Mixed => return Err(HomError::Precondition("module spans several blocks".into())),
        _ => {}
    }
    let mut pieces: Vec<(Arc<Representation>, HomSpace, usize)> = Vec::new();
    for l in 1..=n {
        let a = hom_dim(&mw, &*engine.build(&IndecompLabel::Simple(l))?)?;
        if a > 0 {
            let p = engine.build(&projective_label(n, l))?;
            let h = hom_space(&p, &mw)?;
            pieces.push((p, h, a));
        }
    }
    let mods: Vec<&Representation> = pieces
        .iter()
        .flat_map(|(p, _, a)| std::iter::repeat(p.as_ref()).take(*a))
        .collect();
    let cover = direct_sum(ctx, &mods);
    let mut rng = params.rng();
    for _ in 0..params.budget {
        let mut blocks = Vec::new();
        for (_, h, a) in &pieces {
            for _ in 0..*a {
                blocks.push(random_combination(ctx, h, &mut rng, params.bound));
            }
        }
        let refs: Vec<&Mat> = blocks.iter().collect();
        let pi = if refs.is_empty() {
            Mat::zeros(ctx, mw.dim(), 0)
        } else {
            Mat::hstack(&refs)
        };
        if block_ranks_full(&pi, &cover, &mw, true) {
            return Ok((cover, pi));
        }
    }
    Err(HomError::Budget("no surjection from the projective cover".into()))
}

/// Ω M: kernel of the projective cover.
pub fn omega(engine: &Engine, m: &Representation, params: &SearchParams) -> Result<Representation, HomError> {
    let (mw, _) = m.weight_form()?;
    let (cover, pi) = projective_cover(engine, &mw, params)?;
    let ker = graded_kernel(&pi, &cover, &mw);
    Ok(ker.submodule_rep(&cover)?)
}

/// Injective envelope M → I (I projective, matching the socle).
pub fn injective_envelope(engine: &Engine, m: &Representation, params: &SearchParams) -> Result<(Representation, Mat), HomError> {
    let ctx = engine.context();
    let n = engine.n();
    let (mw, _) = m.weight_form()?;
    match block_index(&mw)? {
        BlockIndex::Block(i) if i >= 1 => return Ok((mw.clone(), Mat::identity(ctx, mw.dim()))),
        BlockIndex::Mixed => return Err(HomError::Precondition("module spans several blocks".into())),
        _ => {}
    }
    let mut pieces: Vec<(Arc<Representation>, HomSpace, usize)> = Vec::new();
    for l in 1..=n {
        let b = hom_dim(&*engine.build(&IndecompLabel::Simple(l))?, &mw)?;
        if b > 0 {
            let p = engine.build(&projective_label(n, l))?;
            let h = hom_space(&mw, &p)?;
            pieces.push((p, h, b));
        }
    }
    let mods: Vec<&Representation> = pieces
        .iter()
        .flat_map(|(p, _, b)| std::iter::repeat(p.as_ref()).take(*b))
        .collect();
    let hull = direct_sum(ctx, &mods);
    let mut rng = params.rng();
    for _ in 0..params.budget {
        let mut blocks = Vec::new();
        for (_, h, b) in &pieces {
            for _ in 0..*b {
                blocks.push(random_combination(ctx, h, &mut rng, params.bound));
            }
        }
        let refs: Vec<&Mat> = blocks.iter().collect();
        let iota = if refs.is_empty() {
            Mat::zeros(ctx, 0, mw.dim())
        } else {
            Mat::vstack(&refs)
        };
        if block_ranks_full(&iota, &mw, &hull, false) {
            return Ok((hull, iota));
        }
    }
    Err(HomError::Budget("no embedding into the injective envelope".into()))
}

/// Ω⁻¹ M: cokernel of the injective envelope.
pub fn omega_inverse(engine: &Engine, m: &Representation, params: &SearchParams) -> Result<Representation, HomError> {
    let (mw, _) = m.weight_form()?;
    let (hull, iota) = injective_envelope(engine, &mw, params)?;
    let img = graded_image(&iota, &hull);
    Ok(img.quotient_rep(&hull)?.0)
}

/// Ω^{±s} M by iteration.
pub fn syzygy(engine: &Engine, m: &Representation, sign: Sign, s: u32, tag: &str) -> Result<Representation, HomError> {
    let mut cur = m.weight_form()?.0;
    for step in 1..=s {
        let params = engine.params_for(&format!("{}/{}{}", tag, sign.symbol(), step));
        cur = match sign {
            Sign::Plus => omega(engine, &cur, &params)?,
            Sign::Minus => omega_inverse(engine, &cur, &params)?,
        };
    }
    Ok(cur)
}

/// Split off every summand isomorphic to X (End X local); returns the
/// multiplicity and a complement.
pub fn split_off(m: &Representation, x: &Representation) -> Result<(usize, Representation), HomError> {
    let ctx = m.context();
    let (mw, _) = m.weight_form()?;
    if mw.dim() < x.dim() || x.dim() == 0 {
        return Ok((0, mw));
    }
    let ins = hom_space(x, &mw)?.basis;
    if ins.is_empty() {
        return Ok((0, mw));
    }
    let outs = hom_space(&mw, x)?.basis;
    if outs.is_empty() {
        return Ok((0, mw));
    }
    // scalar part of π_b ∘ ι_a; radical elements are nilpotent and traceless
    let dim_x = CycloNum::from_int(ctx, x.dim() as i64);
    let pairing: Vec<Vector> = ins
        .iter()
        .map(|i| outs.iter().map(|p| p.mul(i).trace() / &dim_x).collect())
        .collect();
    let (_, col_pivots) = rref(pairing.clone(), outs.len());
    let r = col_pivots.len();
    if r == 0 {
        return Ok((0, mw));
    }
    let transposed: Vec<Vector> = (0..outs.len())
        .map(|b| pairing.iter().map(|row| row[b].clone()).collect())
        .collect();
    let (_, row_pivots) = rref(transposed, ins.len());
    let iota_refs: Vec<&Mat> = row_pivots.iter().map(|&a| &ins[a]).collect();
    let pi_refs: Vec<&Mat> = col_pivots.iter().map(|&b| &outs[b]).collect();
    let iota = Mat::hstack(&iota_refs);
    let pi = Mat::vstack(&pi_refs);
    let xs: Vec<&Representation> = std::iter::repeat(x).take(r).collect();
    let xr = direct_sum(ctx, &xs);
    let comp = pi.mul(&iota);
    if !blocks_invertible(&comp, &weight_blocks(&xr, &xr)) {
        return Err(HomError::Reconcile("split pair composition is singular".into()));
    }
    let ker = graded_kernel(&pi, &mw, &xr);
    Ok((r, ker.submodule_rep(&mw)?))
}

#[derive(Clone, Debug)]
pub struct Peeled {
    pub projective: Claim,
    pub stable: Representation,
}

/// Split off all projective summands P_l (and V_n) of a block-0 module.
pub fn peel_projectives(engine: &Engine, m: &Representation) -> Result<Peeled, HomError> {
    let n = engine.n();
    let (mut cur, _) = m.weight_form()?;
    if let BlockIndex::Block(i) = block_index(&cur)? {
        if i >= 1 && cur.dim() > 0 {
            // semisimple blocks consist of projective simples
            return Ok(Peeled {
                projective: decompose_semisimple(&cur)?,
                stable: direct_sum(engine.context(), &[]),
            });
        }
    }
    let mut projective = Claim::new();
    for l in 1..=n {
        let label = projective_label(n, l);
        let p = engine.build(&label)?;
        let (k, rest) = split_off(&cur, &p)?;
        if k > 0 {
            projective.insert(label, k);
        }
        cur = rest;
    }
    Ok(Peeled { projective, stable: cur })
}

/// Full decomposition into constructible indecomposables. Stable block-0
/// parts are matched against V_l and Ω^{±s}V_l candidates; a remainder that
/// matches none is returned unidentified.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub summands: Claim,
    pub unidentified: Option<Representation>,
}

pub fn decompose(engine: &Engine, m: &Representation) -> Result<Decomposition, HomError> {
    let n = engine.n();
    let (mw, _) = m.weight_form()?;
    let mut summands = Claim::new();
    let mut unidentified = None;
    for i in 0..n {
        let comp = block_component(&mw, i);
        if comp.dim() == 0 {
            continue;
        }
        if i >= 1 {
            for (l, k) in decompose_semisimple(&comp)? {
                *summands.entry(l).or_default() += k;
            }
            continue;
        }
        let peeled = peel_projectives(engine, &comp)?;
        summands.extend(peeled.projective);
        let mut cur = peeled.stable;
        let mut candidates: Vec<IndecompLabel> = (1..n).map(IndecompLabel::Simple).collect();
        let max_s = (cur.dim() / n as usize) as u32;
        for s in 1..=max_s {
            for l in 1..n {
                for sign in [Sign::Plus, Sign::Minus] {
                    candidates.push(IndecompLabel::Syzygy(sign, s, l));
                }
            }
        }
        for label in candidates {
            if cur.dim() == 0 {
                break;
            }
            if label.dim(n) > cur.dim() {
                continue;
            }
            let x = engine.build(&label)?;
            let (k, rest) = split_off(&cur, &x)?;
            if k > 0 {
                *summands.entry(label).or_default() += k;
                cur = rest;
            }
        }
        if cur.dim() > 0 {
            unidentified = Some(cur);
        }
    }
    Ok(Decomposition { summands, unidentified })
}

/// Rank of a list of vectors (helper for tests and reports).
pub fn span_rank(vectors: &[Vector], len: usize) -> usize {
    rank_dense(vectors.to_vec(), len)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclo::make_context;

    #[test]
    fn spin_hom_matches_naive() {
        let ctx = make_context(3).unwrap();
        let eng = Engine::new(&ctx, 7);
        let v2 = eng.build(&IndecompLabel::Simple(2)).unwrap();
        let p1 = eng.build(&IndecompLabel::Proj(1)).unwrap();
        let p2 = eng.build(&IndecompLabel::Proj(2)).unwrap();
        for (a, b) in [(&p1, &p1), (&p1, &v2), (&v2, &p2), (&p2, &p2), (&p1, &p2)] {
            let fast = hom_space(a, b).unwrap();
            let slow = hom_space_naive(a, b);
            assert_eq!(fast.dim(), slow.dim());
            for t in &fast.basis {
                assert!(is_intertwiner(t, a, b));
            }
        }
    }

    #[test]
    fn small_isomorphism_cases() {
        let ctx = make_context(3).unwrap();
        let eng = Engine::new(&ctx, 1);
        let v1 = eng.build(&IndecompLabel::Simple(1)).unwrap();
        let v2 = eng.build(&IndecompLabel::Simple(2)).unwrap();
        let two_v1 = direct_sum(&ctx, &[&v1, &v1]);
        let p = SearchParams::new(3);
        assert!(matches!(find_isomorphism(&v2, &two_v1, &p).unwrap(), IsoResult::None(_)));
        assert!(find_isomorphism(&v2, &v2, &p).unwrap().witness().is_some());
    }
}
