//! Exact linear algebra over a [`Field`]: incremental echelon bases, ranks,
//! null spaces and quotient dimensions of spans.
//!
//! Every "dimension of a module modulo `t^N`" computed by the crate goes
//! through here; the columns are always ordered so that the first nonzero
//! column of a row is its leading term.

use crate::coeffield::{Elem, Field};
use crate::error::{Error, Result};

/// A basis of a subspace of `K^n` in semi-echelon form: every stored row has
/// a pivot column equal to one and zeros in the pivot columns of all rows
/// inserted before it.
#[derive(Clone, Debug)]
pub struct Echelon {
    field: Field,
    ncols: usize,
    rows: Vec<Vec<Elem>>,
    pivots: Vec<usize>,
    pivot_row: Vec<Option<usize>>,
}

impl Echelon {
    pub fn new(field: &Field, ncols: usize) -> Echelon {
        Echelon { field: field.clone(), ncols, rows: Vec::new(), pivots: Vec::new(), pivot_row: vec![None; ncols] }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Pivot columns in insertion order.
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Whether column `c` is a pivot column.
    pub fn is_pivot(&self, c: usize) -> bool {
        self.pivot_row[c].is_some()
    }

    /// Stored rows (same order as [`Echelon::pivots`]).
    pub fn rows(&self) -> &[Vec<Elem>] {
        &self.rows
    }

    /// Reduce `v` against the basis in place.
    pub fn reduce(&self, v: &mut [Elem]) {
        let f = &self.field;
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            if f.is_zero(&v[pc]) {
                continue;
            }
            let c = v[pc].clone();
            for (j, r) in row.iter().enumerate().skip(pc) {
                if !f.is_zero(r) {
                    v[j] = f.sub(&v[j], &f.mul(&c, r));
                }
            }
        }
    }

    /// Insert `v`; returns whether it was independent of the basis.
    pub fn insert(&mut self, mut v: Vec<Elem>) -> bool {
        debug_assert_eq!(v.len(), self.ncols);
        self.reduce(&mut v);
        let f = &self.field;
        let Some(pc) = v.iter().position(|x| !f.is_zero(x)) else {
            return false;
        };
        let inv = f.inv(&v[pc]).expect("nonzero pivot");
        for x in v.iter_mut().skip(pc) {
            if !f.is_zero(x) {
                *x = f.mul(x, &inv);
            }
        }
        self.pivot_row[pc] = Some(self.rows.len());
        self.pivots.push(pc);
        self.rows.push(v);
        true
    }

    /// Whether `v` lies in the span.
    pub fn contains(&self, v: &[Elem]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w);
        w.iter().all(|x| self.field.is_zero(x))
    }
}

/// Rank of a list of row vectors of length `ncols`.
pub fn rank(field: &Field, ncols: usize, rows: impl IntoIterator<Item = Vec<Elem>>) -> usize {
    let mut e = Echelon::new(field, ncols);
    for r in rows {
        e.insert(r);
    }
    e.rank()
}

/// Reduced row echelon form; returns `(rows, pivot columns)`.
pub fn rref(field: &Field, ncols: usize, rows: impl IntoIterator<Item = Vec<Elem>>) -> (Vec<Vec<Elem>>, Vec<usize>) {
    let f = field;
    let mut e = Echelon::new(field, ncols);
    for r in rows {
        e.insert(r);
    }
    let mut order: Vec<usize> = (0..e.rank()).collect();
    order.sort_by_key(|&i| e.pivots[i]);
    let mut rows: Vec<Vec<Elem>> = order.iter().map(|&i| e.rows[i].clone()).collect();
    let pivots: Vec<usize> = order.iter().map(|&i| e.pivots[i]).collect();
    // back substitution
    for i in (0..rows.len()).rev() {
        let pc = pivots[i];
        for k in 0..i {
            if f.is_zero(&rows[k][pc]) {
                continue;
            }
            let c = rows[k][pc].clone();
            let (head, tail) = rows.split_at_mut(i);
            for (j, r) in tail[0].iter().enumerate().skip(pc) {
                if !f.is_zero(r) {
                    head[k][j] = f.sub(&head[k][j], &f.mul(&c, r));
                }
            }
        }
    }
    (rows, pivots)
}

/// Basis of the null space `{x : A x = 0}` of the matrix whose rows are given.
pub fn nullspace(field: &Field, ncols: usize, rows: impl IntoIterator<Item = Vec<Elem>>) -> Vec<Vec<Elem>> {
    let f = field;
    let (rref_rows, pivots) = rref(field, ncols, rows);
    let mut is_pivot = vec![false; ncols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let mut out = Vec::new();
    for free in 0..ncols {
        if is_pivot[free] {
            continue;
        }
        let mut v = vec![f.zero(); ncols];
        v[free] = f.one();
        for (row, &pc) in rref_rows.iter().zip(&pivots) {
            if !f.is_zero(&row[free]) {
                v[pc] = f.neg(&row[free]);
            }
        }
        out.push(v);
    }
    out
}

/// `dim (V + W) / W` for spans given by row vectors.
pub fn span_quotient_dim(field: &Field, ncols: usize, v: &[Vec<Elem>], w: &[Vec<Elem>]) -> usize {
    let mut e = Echelon::new(field, ncols);
    for r in w {
        e.insert(r.clone());
    }
    let base = e.rank();
    for r in v {
        e.insert(r.clone());
    }
    e.rank() - base
}

/// Evaluate a truncation-dependent dimension at `n` and `n + 8`; accept it
/// when both agree, otherwise double `n` until `cap`.
pub fn certified_dim(mut n: usize, cap: usize, mut dim_at: impl FnMut(usize) -> Result<usize>) -> Result<(usize, usize)> {
    loop {
        let a = dim_at(n)?;
        let b = dim_at(n + 8)?;
        if a == b {
            return Ok((a, n));
        }
        if 2 * n > cap {
            return Err(Error::UnstableTruncation(format!("dimension {a} at truncation {n} but {b} at {}", n + 8)));
        }
        n *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffield::make_field;

    fn v(f: &Field, xs: &[i64]) -> Vec<Elem> {
        xs.iter().map(|&x| f.from_i64(x)).collect()
    }

    #[test]
    fn nullspace_is_annihilated() {
        let f = make_field(7, 1).unwrap();
        let rows = vec![v(&f, &[1, 2, 3, 4]), v(&f, &[2, 4, 6, 2])];
        let ns = nullspace(&f, 4, rows.clone());
        assert_eq!(ns.len(), 2);
        for n in &ns {
            for r in &rows {
                let dot = r.iter().zip(n).fold(f.zero(), |a, (x, y)| f.add(&a, &f.mul(x, y)));
                assert!(f.is_zero(&dot));
            }
        }
    }

    #[test]
    fn quotient_of_spans() {
        let q = Field::rationals();
        let vs = vec![v(&q, &[1, 0, 0]), v(&q, &[0, 1, 0]), v(&q, &[0, 0, 1])];
        let ws = vec![v(&q, &[1, 1, 0])];
        assert_eq!(span_quotient_dim(&q, 3, &vs, &ws), 2);
    }

    #[test]
    fn certification_detects_instability() {
        let r = certified_dim(4, 32, Ok);
        assert!(matches!(r, Err(Error::UnstableTruncation(_))));
        assert_eq!(certified_dim(4, 32, |n| Ok(n.min(10))).unwrap(), (10, 16));
    }
}
