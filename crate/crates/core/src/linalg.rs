//! Dense matrices of rational expressions and certified elimination.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::symexpr::{RationalExpr, Symbols};

/// Outcome of a zero test on some domain (a stratum, or generic position).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZeroStatus {
    Zero,
    NonZero,
    Unknown,
}

/// Where expressions live: supplies reduction to canonical representatives
/// and zero certification.
pub trait Domain {
    fn reduce(&self, e: &RationalExpr) -> RationalExpr;
    fn status(&self, e: &RationalExpr) -> ZeroStatus;
}

/// Generic position: anything not identically zero is nonzero.
pub struct Generic<'a>(pub &'a Symbols);

impl Domain for Generic<'_> {
    fn reduce(&self, e: &RationalExpr) -> RationalExpr {
        self.0.canonical(e)
    }

    fn status(&self, e: &RationalExpr) -> ZeroStatus {
        if self.0.is_zero(e) {
            ZeroStatus::Zero
        } else {
            ZeroStatus::NonZero
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum MatrixError {
    #[error("matrix dimensions do not match")]
    Shape,
    #[error("matrix is not square")]
    NotSquare,
    #[error("no pivot certified nonzero in column {column}")]
    PivotFailure { column: usize, candidates: Vec<RationalExpr> },
    #[error("matrix is singular")]
    Singular,
}

#[derive(Clone, PartialEq, Eq)]
pub struct ExprMatrix {
    rows: usize,
    cols: usize,
    data: Vec<RationalExpr>,
}

impl fmt::Debug for ExprMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries((0..self.rows).map(|i| self.row(i))).finish()
    }
}

impl ExprMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ExprMatrix { rows, cols, data: vec![RationalExpr::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, RationalExpr::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<RationalExpr>>) -> Result<Self, MatrixError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(MatrixError::Shape);
        }
        Ok(ExprMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> RationalExpr) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ExprMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &RationalExpr {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, e: RationalExpr) {
        self.data[i * self.cols + j] = e;
    }

    pub fn row(&self, i: usize) -> &[RationalExpr] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<RationalExpr>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = &RationalExpr> {
        self.data.iter()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn map(&self, mut f: impl FnMut(&RationalExpr) -> RationalExpr) -> Self {
        ExprMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(&mut f).collect() }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.cols != other.rows {
            return Err(MatrixError::Shape);
        }
        Ok(Self::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = RationalExpr::zero();
            for k in 0..self.cols {
                let (a, b) = (self.get(i, k), other.get(k, j));
                if !a.is_zero() && !b.is_zero() {
                    acc = &acc + &(a * b);
                }
            }
            acc
        }))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(MatrixError::Shape);
        }
        Ok(Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) - other.get(i, j)))
    }

    pub fn is_symmetric(&self, symbols: &Symbols) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| symbols.equal(self.get(i, j), self.get(j, i))))
    }

    pub fn is_antisymmetric(&self, symbols: &Symbols) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..=i).all(|j| symbols.is_zero(&(self.get(i, j) + self.get(j, i)))))
    }

    pub fn is_zero_on(&self, domain: &impl Domain) -> bool {
        self.data.iter().all(|e| domain.status(&domain.reduce(e)) == ZeroStatus::Zero)
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]).clone())
    }

    /// Exact determinant in generic position.
    pub fn det(&self, symbols: &Symbols) -> Result<RationalExpr, MatrixError> {
        if self.rows != self.cols {
            return Err(MatrixError::NotSquare);
        }
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = RationalExpr::one();
        for k in 0..n {
            let pivot = (k..n)
                .filter(|&r| !symbols.is_zero(&a[r * n + k]))
                .min_by_key(|&r| pivot_cost(&a[r * n + k]));
            let Some(p) = pivot else {
                return Ok(RationalExpr::zero());
            };
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                det = -det;
            }
            let piv = a[k * n + k].clone();
            det = symbols.canonical(&(&det * &piv));
            let inv = piv.recip().expect("certified nonzero");
            for r in k + 1..n {
                if a[r * n + k].is_zero() {
                    continue;
                }
                let factor = &a[r * n + k] * &inv;
                for j in k..n {
                    let t = &factor * &a[k * n + j];
                    a[r * n + j] = symbols.canonical(&(&a[r * n + j] - &t));
                }
            }
        }
        Ok(det)
    }

    /// All `k x k` minors with their row and column index sets.
    pub fn minors(&self, k: usize, symbols: &Symbols) -> Vec<(Vec<usize>, Vec<usize>, RationalExpr)> {
        let mut out = Vec::new();
        let row_sets = subsets(self.rows, k);
        let col_sets = subsets(self.cols, k);
        for rs in &row_sets {
            for cs in &col_sets {
                let d = self.submatrix(rs, cs).det(symbols).expect("square");
                out.push((rs.clone(), cs.clone(), d));
            }
        }
        out
    }

    /// Rank in generic position.
    pub fn generic_rank(&self, symbols: &Symbols) -> usize {
        match eliminate(self, &Generic(symbols)) {
            Ok(e) => e.pivots.len(),
            Err(_) => unreachable!("generic elimination cannot fail"),
        }
    }

    /// Inverse by Gauss-Jordan elimination with pivots certified nonzero on
    /// `domain`.
    pub fn inverse_on(&self, domain: &impl Domain) -> Result<Self, MatrixError> {
        if self.rows != self.cols {
            return Err(MatrixError::NotSquare);
        }
        let n = self.rows;
        let mut a = self.map(|e| domain.reduce(e));
        let mut inv = Self::identity(n);
        for k in 0..n {
            let mut best: Option<usize> = None;
            let mut unknown = Vec::new();
            for r in k..n {
                match domain.status(a.get(r, k)) {
                    ZeroStatus::NonZero => {
                        if best.is_none_or(|b| pivot_cost(a.get(r, k)) < pivot_cost(a.get(b, k))) {
                            best = Some(r);
                        }
                    }
                    ZeroStatus::Unknown => unknown.push(a.get(r, k).clone()),
                    ZeroStatus::Zero => {}
                }
            }
            let Some(p) = best else {
                if unknown.is_empty() {
                    return Err(MatrixError::Singular);
                }
                return Err(MatrixError::PivotFailure { column: k, candidates: unknown });
            };
            a.swap_rows(k, p);
            inv.swap_rows(k, p);
            let pinv = a.get(k, k).recip().map_err(|_| MatrixError::Singular)?;
            for j in 0..n {
                let v = domain.reduce(&(a.get(k, j) * &pinv));
                a.set(k, j, v);
                let w = domain.reduce(&(inv.get(k, j) * &pinv));
                inv.set(k, j, w);
            }
            for r in 0..n {
                if r == k || a.get(r, k).is_zero() {
                    continue;
                }
                let factor = a.get(r, k).clone();
                for j in 0..n {
                    let v = domain.reduce(&(a.get(r, j) - &(&factor * a.get(k, j))));
                    a.set(r, j, v);
                    let w = domain.reduce(&(inv.get(r, j) - &(&factor * inv.get(k, j))));
                    inv.set(r, j, w);
                }
            }
        }
        Ok(inv)
    }

    /// Right null space on `domain`; for symmetric matrices this is also the
    /// left null space. Basis vectors are ordered by term count, then by
    /// their free column.
    pub fn null_space_on(&self, domain: &impl Domain) -> Result<NullSpace, MatrixError> {
        let e = eliminate(self, domain)?;
        let pivot_cols: Vec<usize> = e.pivots.iter().map(|&(_, c)| c).collect();
        let mut basis: Vec<(usize, Vec<RationalExpr>)> = Vec::new();
        for free in 0..self.cols {
            if pivot_cols.contains(&free) {
                continue;
            }
            let mut w = vec![RationalExpr::zero(); self.cols];
            w[free] = RationalExpr::one();
            for &(r, c) in &e.pivots {
                // reduced row r reads x_c + sum_{free} a_{r,f} x_f = 0
                w[c] = domain.reduce(&(-e.matrix.get(r, free)));
            }
            basis.push((free, w));
        }
        basis.sort_by_key(|(free, w)| (w.iter().map(|x| x.numer().len()).sum::<usize>(), *free));
        Ok(NullSpace { rank: e.pivots.len(), pivots: e.pivots, basis: basis.into_iter().map(|(_, w)| w).collect() })
    }

    /// Numeric values with every entry evaluated by `eval`.
    pub fn eval<E>(&self, mut eval: impl FnMut(&RationalExpr) -> Result<f64, E>) -> Result<Vec<f64>, E> {
        self.data.iter().map(&mut eval).collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

#[derive(Clone, Debug)]
pub struct NullSpace {
    pub rank: usize,
    /// (row, column) pivot positions in the reduced matrix.
    pub pivots: Vec<(usize, usize)>,
    pub basis: Vec<Vec<RationalExpr>>,
}

struct Eliminated {
    matrix: ExprMatrix,
    pivots: Vec<(usize, usize)>,
}

/// Lower is better: constants first, then short expressions.
fn pivot_cost(e: &RationalExpr) -> (bool, usize, usize) {
    (!e.is_constant(), e.numer().len() + e.denom().len(), e.numer().total_degree() as usize)
}

/// Full-pivoting reduction to reduced row echelon form. Pivots must be
/// certified nonzero; the leftover block must be certified zero.
fn eliminate(m: &ExprMatrix, domain: &impl Domain) -> Result<Eliminated, MatrixError> {
    let mut a = m.map(|e| domain.reduce(e));
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut used_rows = vec![false; a.rows];
    let mut used_cols = vec![false; a.cols];
    loop {
        let mut best: Option<(usize, usize)> = None;
        for r in (0..a.rows).filter(|&r| !used_rows[r]) {
            for c in (0..a.cols).filter(|&c| !used_cols[c]) {
                if domain.status(a.get(r, c)) == ZeroStatus::NonZero
                    && best.is_none_or(|(br, bc)| (pivot_cost(a.get(r, c)), c, r) < (pivot_cost(a.get(br, bc)), bc, br))
                {
                    best = Some((r, c));
                }
            }
        }
        let Some((pr, pc)) = best else { break };
        let pinv = a.get(pr, pc).recip().map_err(|_| MatrixError::Singular)?;
        for j in 0..a.cols {
            let v = domain.reduce(&(a.get(pr, j) * &pinv));
            a.set(pr, j, v);
        }
        for r in 0..a.rows {
            if r == pr || a.get(r, pc).is_zero() {
                continue;
            }
            let factor = a.get(r, pc).clone();
            for j in 0..a.cols {
                let v = domain.reduce(&(a.get(r, j) - &(&factor * a.get(pr, j))));
                a.set(r, j, v);
            }
        }
        used_rows[pr] = true;
        used_cols[pc] = true;
        pivots.push((pr, pc));
    }
    for c in (0..a.cols).filter(|&c| !used_cols[c]) {
        let leftovers: Vec<RationalExpr> = (0..a.rows)
            .filter(|&r| !used_rows[r])
            .map(|r| a.get(r, c).clone())
            .filter(|e| domain.status(e) != ZeroStatus::Zero)
            .collect();
        if !leftovers.is_empty() {
            return Err(MatrixError::PivotFailure { column: c, candidates: leftovers });
        }
    }
    pivots.sort_by_key(|&(_, c)| c);
    Ok(Eliminated { matrix: a, pivots })
}

/// All `k`-element subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Numeric rank by Gaussian elimination with partial pivoting; entries below
/// `rel_tol` times the largest magnitude count as zero.
pub fn numeric_rank(a: &[f64], rows: usize, cols: usize, rel_tol: f64) -> usize {
    let mut m = a.to_vec();
    let scale = m.iter().fold(0.0f64, |s, x| s.max(x.abs()));
    if scale == 0.0 {
        return 0;
    }
    let tol = rel_tol * scale;
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let (p, mag) = (rank..rows).map(|r| (r, m[r * cols + c].abs())).fold((rank, -1.0), |b, x| if x.1 > b.1 { x } else { b });
        if mag <= tol {
            continue;
        }
        for j in 0..cols {
            m.swap(rank * cols + j, p * cols + j);
        }
        for r in rank + 1..rows {
            let f = m[r * cols + c] / m[rank * cols + c];
            for j in c..cols {
                m[r * cols + j] -= f * m[rank * cols + j];
            }
        }
        rank += 1;
    }
    rank
}

/// Solves `a x = b` for a square `f64` system; `None` when singular.
pub fn solve_f64(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i * n + c].abs().total_cmp(&m[j * n + c].abs()))?;
        if m[p * n + c] == 0.0 || !m[p * n + c].is_finite() {
            return None;
        }
        for j in 0..n {
            m.swap(c * n + j, p * n + j);
        }
        x.swap(c, p);
        for r in c + 1..n {
            let f = m[r * n + c] / m[c * n + c];
            for j in c..n {
                m[r * n + j] -= f * m[c * n + j];
            }
            x[r] -= f * x[c];
        }
    }
    for c in (0..n).rev() {
        let mut s = x[c];
        for j in c + 1..n {
            s -= m[c * n + j] * x[j];
        }
        x[c] = s / m[c * n + c];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::SymbolKind;

    fn setup() -> Symbols {
        let mut s = Symbols::new();
        for n in ["x", "y", "z"] {
            s.add(n, SymbolKind::Coordinate).unwrap();
        }
        s
    }

    fn m(s: &Symbols, rows: &[&[&str]]) -> ExprMatrix {
        ExprMatrix::from_rows(rows.iter().map(|r| r.iter().map(|t| s.parse(t).unwrap()).collect()).collect()).unwrap()
    }

    #[test]
    fn determinant_of_degenerate_metric_vanishes() {
        let s = setup();
        let a = m(&s, &[&["y^2", "0", "-y"], &["0", "0", "0"], &["-y", "0", "1"]]);
        assert!(a.det(&s).unwrap().is_zero());
        assert_eq!(a.generic_rank(&s), 1);
        let b = m(&s, &[&["y^2", "0"], &["0", "x^2"]]);
        assert_eq!(b.det(&s).unwrap(), s.parse("x^2*y^2").unwrap());
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let s = setup();
        let a = m(&s, &[&["0", "-z"], &["z", "0"]]);
        let inv = a.inverse_on(&Generic(&s)).unwrap();
        assert_eq!(inv.mul(&a).unwrap(), ExprMatrix::identity(2));
        assert_eq!(a.mul(&inv).unwrap(), ExprMatrix::identity(2));
    }

    #[test]
    fn null_space_prefers_constant_pivots() {
        let s = setup();
        let a = m(&s, &[&["y^2", "0", "-y"], &["0", "0", "0"], &["-y", "0", "1"]]);
        let ns = a.null_space_on(&Generic(&s)).unwrap();
        assert_eq!(ns.rank, 1);
        assert_eq!(ns.basis.len(), 2);
        assert_eq!(ns.basis[0], vec![RationalExpr::zero(), RationalExpr::one(), RationalExpr::zero()]);
        assert_eq!(ns.basis[1], vec![RationalExpr::one(), RationalExpr::zero(), s.parse("y").unwrap()]);
        for w in &ns.basis {
            for i in 0..3 {
                let mut acc = RationalExpr::zero();
                for j in 0..3 {
                    acc = &acc + &(a.get(i, j) * &w[j]);
                }
                assert!(acc.is_zero());
            }
        }
    }

    #[test]
    fn numeric_rank_and_solve() {
        assert_eq!(numeric_rank(&[1.0, 2.0, 2.0, 4.0], 2, 2, 1e-12), 1);
        assert_eq!(numeric_rank(&[0.0; 4], 2, 2, 1e-12), 0);
        let x = solve_f64(&[2.0, 1.0, 1.0, 3.0], &[3.0, 5.0], 2).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14 && (x[1] - 1.4).abs() < 1e-14);
        assert!(solve_f64(&[1.0, 2.0, 2.0, 4.0], &[1.0, 1.0], 2).is_none());
    }

    #[test]
    fn subsets_enumerate_in_order() {
        assert_eq!(subsets(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(subsets(2, 0), vec![Vec::<usize>::new()]);
    }
}
