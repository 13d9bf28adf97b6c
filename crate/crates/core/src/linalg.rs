//! Sparse matrices and exact elimination over Q(ζ).

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::cyclo::{CycloContext, CycloError, CycloNum};

pub type Vector = Vec<CycloNum>;

pub fn zero_vector(ctx: &Arc<CycloContext>, len: usize) -> Vector {
    vec![CycloNum::zero(ctx); len]
}

pub fn is_zero_vector(v: &[CycloNum]) -> bool {
    v.iter().all(|c| c.is_zero())
}

/// Row-sparse matrix; rows keep their entries sorted by column and never store zeros.
#[derive(Clone)]
pub struct Mat {
    ctx: Arc<CycloContext>,
    rows: usize,
    cols: usize,
    data: Vec<Vec<(usize, CycloNum)>>,
}

impl PartialEq for Mat {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.data == other.data
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{}", self.rows, self.cols)?;
        for (i, row) in self.data.iter().enumerate() {
            for (j, v) in row {
                writeln!(f, "  [{},{}] = {}", i, j, v)?;
            }
        }
        Ok(())
    }
}

impl Mat {
    pub fn zeros(ctx: &Arc<CycloContext>, rows: usize, cols: usize) -> Self {
        Mat {
            ctx: ctx.clone(),
            rows,
            cols,
            data: vec![Vec::new(); rows],
        }
    }

    pub fn identity(ctx: &Arc<CycloContext>, d: usize) -> Self {
        Self::scalar(ctx, d, &CycloNum::one(ctx))
    }

    pub fn scalar(ctx: &Arc<CycloContext>, d: usize, c: &CycloNum) -> Self {
        let mut m = Self::zeros(ctx, d, d);
        if !c.is_zero() {
            for i in 0..d {
                m.data[i].push((i, c.clone()));
            }
        }
        m
    }

    pub fn diagonal(ctx: &Arc<CycloContext>, entries: &[CycloNum]) -> Self {
        let mut m = Self::zeros(ctx, entries.len(), entries.len());
        for (i, c) in entries.iter().enumerate() {
            if !c.is_zero() {
                m.data[i].push((i, c.clone()));
            }
        }
        m
    }

    pub fn from_dense(ctx: &Arc<CycloContext>, rows: usize, cols: usize, dense: &[Vector]) -> Self {
        let mut m = Self::zeros(ctx, rows, cols);
        for (i, row) in dense.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    m.data[i].push((j, v.clone()));
                }
            }
        }
        m
    }

    pub fn from_columns(ctx: &Arc<CycloContext>, rows: usize, columns: &[Vector]) -> Self {
        let mut m = Self::zeros(ctx, rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                if !v.is_zero() {
                    m.data[i].push((j, v.clone()));
                }
            }
        }
        m
    }

    pub fn context(&self) -> &Arc<CycloContext> {
        &self.ctx
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row_entries(&self, i: usize) -> &[(usize, CycloNum)] {
        &self.data[i]
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(|r| r.len()).sum()
    }

    pub fn get(&self, i: usize, j: usize) -> CycloNum {
        match self.data[i].binary_search_by_key(&j, |(c, _)| *c) {
            Ok(pos) => self.data[i][pos].1.clone(),
            Err(_) => CycloNum::zero(&self.ctx),
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: CycloNum) {
        let row = &mut self.data[i];
        match row.binary_search_by_key(&j, |(c, _)| *c) {
            Ok(pos) => {
                if v.is_zero() {
                    row.remove(pos);
                } else {
                    row[pos].1 = v;
                }
            }
            Err(pos) => {
                if !v.is_zero() {
                    row.insert(pos, (j, v));
                }
            }
        }
    }

    pub fn to_dense(&self) -> Vec<Vector> {
        let mut out = vec![zero_vector(&self.ctx, self.cols); self.rows];
        for (i, row) in self.data.iter().enumerate() {
            for (j, v) in row {
                out[i][*j] = v.clone();
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn columns(&self) -> Vec<Vector> {
        let mut out = vec![zero_vector(&self.ctx, self.rows); self.cols];
        for (i, row) in self.data.iter().enumerate() {
            for (j, v) in row {
                out[*j][i] = v.clone();
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|r| r.is_empty())
    }

    pub fn is_diagonal(&self) -> bool {
        self.rows == self.cols
            && self
                .data
                .iter()
                .enumerate()
                .all(|(i, r)| r.iter().all(|(j, _)| *j == i))
    }

    pub fn transpose(&self) -> Mat {
        let mut m = Mat::zeros(&self.ctx, self.cols, self.rows);
        for (i, row) in self.data.iter().enumerate() {
            for (j, v) in row {
                m.data[*j].push((i, v.clone()));
            }
        }
        m
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut m = Mat::zeros(&self.ctx, self.rows, other.cols);
        for (i, row) in self.data.iter().enumerate() {
            let mut acc: BTreeMap<usize, CycloNum> = BTreeMap::new();
            for (k, a) in row {
                for (j, b) in &other.data[*k] {
                    let t = a * b;
                    match acc.get_mut(j) {
                        Some(x) => *x += &t,
                        None => {
                            acc.insert(*j, t);
                        }
                    }
                }
            }
            m.data[i] = acc.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        }
        m
    }

    pub fn apply(&self, v: &[CycloNum]) -> Vector {
        assert_eq!(self.cols, v.len());
        self.data
            .iter()
            .map(|row| {
                let mut acc = CycloNum::zero(&self.ctx);
                for (j, a) in row {
                    if !v[*j].is_zero() {
                        acc += &(a * &v[*j]);
                    }
                }
                acc
            })
            .collect()
    }

    fn combine(&self, other: &Mat, negate: bool) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut m = Mat::zeros(&self.ctx, self.rows, self.cols);
        for i in 0..self.rows {
            let mut acc: BTreeMap<usize, CycloNum> = self.data[i].iter().cloned().collect();
            for (j, b) in &other.data[i] {
                let b = if negate { -b } else { b.clone() };
                match acc.get_mut(j) {
                    Some(x) => *x += &b,
                    None => {
                        acc.insert(*j, b);
                    }
                }
            }
            m.data[i] = acc.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        }
        m
    }

    pub fn add(&self, other: &Mat) -> Mat {
        self.combine(other, false)
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        self.combine(other, true)
    }

    pub fn scale(&self, c: &CycloNum) -> Mat {
        if c.is_zero() {
            return Mat::zeros(&self.ctx, self.rows, self.cols);
        }
        let mut m = self.clone();
        for row in m.data.iter_mut() {
            for (_, v) in row.iter_mut() {
                *v = &*v * c;
            }
        }
        m
    }

    pub fn kron(&self, other: &Mat) -> Mat {
        let mut m = Mat::zeros(&self.ctx, self.rows * other.rows, self.cols * other.cols);
        for (i, row) in self.data.iter().enumerate() {
            for (k, orow) in other.data.iter().enumerate() {
                let target = &mut m.data[i * other.rows + k];
                for (j, a) in row {
                    for (l, b) in orow {
                        target.push((j * other.cols + l, a * b));
                    }
                }
            }
        }
        m
    }

    pub fn pow(&self, mut e: u64) -> Mat {
        assert_eq!(self.rows, self.cols);
        let mut acc = Mat::identity(&self.ctx, self.rows);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Mat {
        let mut colpos = vec![usize::MAX; self.cols];
        for (k, &c) in cols.iter().enumerate() {
            colpos[c] = k;
        }
        let mut m = Mat::zeros(&self.ctx, rows.len(), cols.len());
        for (k, &r) in rows.iter().enumerate() {
            let mut row: Vec<(usize, CycloNum)> = self.data[r]
                .iter()
                .filter(|(j, _)| colpos[*j] != usize::MAX)
                .map(|(j, v)| (colpos[*j], v.clone()))
                .collect();
            row.sort_by_key(|(j, _)| *j);
            m.data[k] = row;
        }
        m
    }

    pub fn hstack(blocks: &[&Mat]) -> Mat {
        let ctx = blocks[0].ctx.clone();
        let rows = blocks[0].rows;
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut m = Mat::zeros(&ctx, rows, cols);
        let mut off = 0;
        for b in blocks {
            assert_eq!(b.rows, rows);
            for i in 0..rows {
                for (j, v) in &b.data[i] {
                    m.data[i].push((off + j, v.clone()));
                }
            }
            off += b.cols;
        }
        m
    }

    pub fn vstack(blocks: &[&Mat]) -> Mat {
        let ctx = blocks[0].ctx.clone();
        let cols = blocks[0].cols;
        let mut data = Vec::new();
        for b in blocks {
            assert_eq!(b.cols, cols);
            data.extend(b.data.iter().cloned());
        }
        Mat {
            ctx,
            rows: data.len(),
            cols,
            data,
        }
    }

    pub fn block_diag(ctx: &Arc<CycloContext>, blocks: &[&Mat]) -> Mat {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut m = Mat::zeros(ctx, rows, cols);
        let (mut ro, mut co) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for (j, v) in &b.data[i] {
                    m.data[ro + i].push((co + j, v.clone()));
                }
            }
            ro += b.rows;
            co += b.cols;
        }
        m
    }

    pub fn rank(&self) -> usize {
        rref(self.to_dense(), self.cols).1.len()
    }

    pub fn inverse(&self) -> Option<Mat> {
        inverse_dense(&self.to_dense()).map(|d| Mat::from_dense(&self.ctx, self.rows, self.cols, &d))
    }

    pub fn determinant(&self) -> CycloNum {
        determinant_dense(self.to_dense(), &self.ctx)
    }

    pub fn trace(&self) -> CycloNum {
        let mut acc = CycloNum::zero(&self.ctx);
        for i in 0..self.rows.min(self.cols) {
            acc += &self.get(i, i);
        }
        acc
    }

    /// Basis of the right kernel {x : A x = 0}.
    pub fn kernel(&self) -> Vec<Vector> {
        nullspace(self.to_dense(), self.cols, &self.ctx)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.to_dense()
                .iter()
                .map(|row| serde_json::Value::Array(row.iter().map(|c| c.to_json()).collect()))
                .collect(),
        )
    }

    pub fn from_json(ctx: &Arc<CycloContext>, v: &serde_json::Value) -> Result<Mat, CycloError> {
        let bad = || CycloError::Parse("matrix must be an array of rows".into());
        let rows = v.as_array().ok_or_else(bad)?;
        let mut dense = Vec::with_capacity(rows.len());
        let mut cols = None;
        for r in rows {
            let r = r.as_array().ok_or_else(bad)?;
            if *cols.get_or_insert(r.len()) != r.len() {
                return Err(CycloError::Parse("ragged matrix rows".into()));
            }
            let row: Result<Vector, CycloError> = r.iter().map(|c| CycloNum::from_json(ctx, c)).collect();
            dense.push(row?);
        }
        let cols = cols.unwrap_or(0);
        Ok(Mat::from_dense(ctx, dense.len(), cols, &dense))
    }
}

/// A cheap cost estimate used to prefer simple pivots.
fn pivot_cost(c: &CycloNum) -> usize {
    if c.as_zeta_power().is_some() {
        return 0;
    }
    if c.as_rational().is_some() {
        return 1;
    }
    2 + c.coefficients().iter().filter(|x| !num_traits::Zero::is_zero(*x)).count()
}

/// Gauss-Jordan reduction; returns the nonzero reduced rows and their pivot columns.
pub fn rref(mut rows: Vec<Vector>, ncols: usize) -> (Vec<Vector>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == rows.len() {
            break;
        }
        let mut best: Option<(usize, usize)> = None;
        for (i, row) in rows.iter().enumerate().skip(r) {
            if !row[col].is_zero() {
                let cost = pivot_cost(&row[col]);
                if best.is_none_or(|(_, c)| cost < c) {
                    best = Some((i, cost));
                    if cost == 0 {
                        break;
                    }
                }
            }
        }
        let Some((p, _)) = best else { continue };
        rows.swap(r, p);
        let inv = rows[r][col].inv().expect("nonzero pivot");
        if !inv.is_one() {
            for x in rows[r].iter_mut().skip(col) {
                if !x.is_zero() {
                    *x = &*x * &inv;
                }
            }
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (j, x) in pivot_row.iter().enumerate().skip(col) {
                if !x.is_zero() {
                    row[j] -= &(&f * x);
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    rows.truncate(r);
    (rows, pivots)
}

pub fn rank_dense(rows: Vec<Vector>, ncols: usize) -> usize {
    rref(rows, ncols).1.len()
}

pub fn nullspace(rows: Vec<Vector>, ncols: usize, ctx: &Arc<CycloContext>) -> Vec<Vector> {
    let (red, pivots) = rref(rows, ncols);
    let mut is_pivot = vec![false; ncols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let mut basis = Vec::new();
    for free in 0..ncols {
        if is_pivot[free] {
            continue;
        }
        let mut v = zero_vector(ctx, ncols);
        v[free] = CycloNum::one(ctx);
        for (row, &p) in red.iter().zip(&pivots) {
            if !row[free].is_zero() {
                v[p] = -&row[free];
            }
        }
        basis.push(v);
    }
    basis
}

pub fn inverse_dense(a: &[Vector]) -> Option<Vec<Vector>> {
    let d = a.len();
    if d == 0 {
        return Some(vec![]);
    }
    let ctx = a[0][0].context().clone();
    let aug: Vec<Vector> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            let mut e = zero_vector(&ctx, d);
            e[i] = CycloNum::one(&ctx);
            r.extend(e);
            r
        })
        .collect();
    let (red, pivots) = rref(aug, d);
    if pivots.len() < d {
        return None;
    }
    Some(red.into_iter().map(|r| r[d..].to_vec()).collect())
}

pub fn determinant_dense(mut rows: Vec<Vector>, ctx: &Arc<CycloContext>) -> CycloNum {
    let d = rows.len();
    let mut det = CycloNum::one(ctx);
    for col in 0..d {
        let Some(p) = (col..d).find(|&i| !rows[i][col].is_zero()) else {
            return CycloNum::zero(ctx);
        };
        if p != col {
            rows.swap(p, col);
            det = -det;
        }
        let piv = rows[col][col].clone();
        det *= &piv;
        let inv = piv.inv().expect("nonzero pivot");
        let prow = rows[col].clone();
        for row in rows.iter_mut().skip(col + 1) {
            if row[col].is_zero() {
                continue;
            }
            let f = &row[col] * &inv;
            for j in col..d {
                if !prow[j].is_zero() {
                    row[j] -= &(&f * &prow[j]);
                }
            }
        }
    }
    det
}

/// Incrementally built row-echelon basis that remembers how each stored row
/// was obtained from the inserted vectors.
#[derive(Clone)]
pub struct Echelon {
    ctx: Arc<CycloContext>,
    len: usize,
    rows: Vec<Vector>,
    pivots: Vec<usize>,
    // rows[i] = sum_j combo[i][j] * inserted[j]
    combo: Vec<Vector>,
}

impl Echelon {
    pub fn new(ctx: &Arc<CycloContext>, len: usize) -> Self {
        Echelon {
            ctx: ctx.clone(),
            len,
            rows: Vec::new(),
            pivots: Vec::new(),
            combo: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Reduce v against the stored rows; returns the residual and the
    /// coefficients c with v - residual = sum_j c_j inserted[j].
    pub fn reduce(&self, v: &[CycloNum]) -> (Vector, Vector) {
        let mut r = v.to_vec();
        let mut coeffs = zero_vector(&self.ctx, self.rows.len());
        for (i, (row, &p)) in self.rows.iter().zip(&self.pivots).enumerate() {
            if r[p].is_zero() {
                continue;
            }
            let f = r[p].clone();
            for (j, x) in row.iter().enumerate() {
                if !x.is_zero() {
                    r[j] -= &(&f * x);
                }
            }
            for (j, x) in self.combo[i].iter().enumerate() {
                if !x.is_zero() {
                    coeffs[j] += &(&f * x);
                }
            }
        }
        (r, coeffs)
    }

    pub fn contains(&self, v: &[CycloNum]) -> bool {
        is_zero_vector(&self.reduce(v).0)
    }

    /// Coordinates of v in terms of the inserted (independent) vectors.
    pub fn coordinates(&self, v: &[CycloNum]) -> Option<Vector> {
        let (r, c) = self.reduce(v);
        if is_zero_vector(&r) {
            Some(c)
        } else {
            None
        }
    }

    /// Insert v if it is independent of the current span.
    pub fn insert(&mut self, v: &[CycloNum]) -> bool {
        assert_eq!(v.len(), self.len);
        let (mut r, coeffs) = self.reduce(v);
        let Some(p) = r.iter().position(|c| !c.is_zero()) else {
            return false;
        };
        let k = self.rows.len();
        // new row = (v - sum coeffs_j inserted_j) / r[p]
        let inv = r[p].inv().expect("nonzero");
        for x in r.iter_mut() {
            if !x.is_zero() {
                *x = &*x * &inv;
            }
        }
        let mut combo: Vector = coeffs.iter().map(|c| -(c * &inv)).collect();
        combo.push(inv);
        for old in self.combo.iter_mut() {
            old.push(CycloNum::zero(&self.ctx));
        }
        self.rows.push(r);
        self.pivots.push(p);
        self.combo.push(combo);
        debug_assert_eq!(self.rows.len(), k + 1);
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclo::root_power;

    #[test]
    fn inverse_round_trip() {
        let ctx = CycloContext::new(3).unwrap();
        let z = |k| root_power(&ctx, k);
        let a = Mat::from_dense(
            &ctx,
            2,
            2,
            &[vec![z(1), z(2)], vec![CycloNum::one(&ctx), z(5)]],
        );
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), Mat::identity(&ctx, 2));
        let det = a.determinant();
        assert_eq!(det, z(6) - z(2));
    }

    #[test]
    fn kernel_and_echelon() {
        let ctx = CycloContext::new(3).unwrap();
        let one = CycloNum::one(&ctx);
        let z = root_power(&ctx, 1);
        let a = Mat::from_dense(
            &ctx,
            1,
            3,
            &[vec![one.clone(), z.clone(), CycloNum::zero(&ctx)]],
        );
        let ker = a.kernel();
        assert_eq!(ker.len(), 2);
        for v in &ker {
            assert!(is_zero_vector(&a.apply(v)));
        }
        let mut e = Echelon::new(&ctx, 3);
        assert!(e.insert(&ker[0]));
        assert!(e.insert(&ker[1]));
        let w: Vector = ker[0].iter().zip(&ker[1]).map(|(x, y)| x.scale_int(2) - y * &z).collect();
        let c = e.coordinates(&w).unwrap();
        assert_eq!(c[0], CycloNum::from_int(&ctx, 2));
        assert_eq!(c[1], -z);
        assert!(!e.insert(&w));
    }
}
