//! Jet-valued component containers: matrices for 2-tensors and
//! endomorphisms, and antisymmetric forms stored on increasing index tuples.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::epsnum::{Jet, JetSpace};
use crate::error::{Error, Result};

/// Dense matrix of jets. Endomorphisms are stored with the upper index as
/// the row: `m[(a, b)] = J^a_b`.
#[derive(Clone, Debug)]
pub struct JMat {
    rows: usize,
    cols: usize,
    data: Vec<Jet>,
}

impl JMat {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Jet) -> JMat {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        JMat { rows, cols, data }
    }

    pub fn zeros(space: &Arc<JetSpace>, rows: usize, cols: usize) -> JMat {
        let z = Jet::zero(space);
        JMat::from_fn(rows, cols, |_, _| z.clone())
    }

    pub fn identity(space: &Arc<JetSpace>, n: usize) -> JMat {
        let z = Jet::zero(space);
        let o = Jet::constant(space, 1.0);
        JMat::from_fn(n, n, |i, j| if i == j { o.clone() } else { z.clone() })
    }

    /// Constant matrix.
    pub fn from_f64(space: &Arc<JetSpace>, m: &DMatrix<f64>) -> JMat {
        JMat::from_fn(m.nrows(), m.ncols(), |i, j| Jet::constant(space, m[(i, j)]))
    }

    /// Outer product `u ⊗ v`.
    pub fn outer(u: &[Jet], v: &[Jet]) -> JMat {
        JMat::from_fn(u.len(), v.len(), |i, j| &u[i] * &v[j])
    }

    /// Symmetric square `θ ⊗ θ`.
    pub fn square(u: &[Jet]) -> JMat {
        let n = u.len();
        let mut m = JMat::from_fn(n, n, |i, j| if j >= i { &u[i] * &u[j] } else { u[0].zero_like() });
        for i in 0..n {
            for j in 0..i {
                m.data[i * n + j] = m.data[j * n + i].clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Jet {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Jet) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[Jet] {
        &self.data
    }

    pub fn map(&self, f: impl Fn(&Jet) -> Jet) -> JMat {
        JMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn transpose(&self) -> JMat {
        JMat::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn scale(&self, s: f64) -> JMat {
        self.map(|x| x.scale(s))
    }

    pub fn scale_jet(&self, s: &Jet) -> JMat {
        self.map(|x| x * s)
    }

    pub fn add(&self, o: &JMat) -> JMat {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        JMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &JMat) -> JMat {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        JMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn mul(&self, o: &JMat) -> JMat {
        assert_eq!(self.cols, o.rows, "matrix product shape mismatch");
        JMat::from_fn(self.rows, o.cols, |i, j| {
            let mut acc = self.get(i, 0) * o.get(0, j);
            for k in 1..self.cols {
                acc += self.get(i, k) * o.get(k, j);
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[Jet]) -> Vec<Jet> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = self.get(i, 0) * &v[0];
                for k in 1..self.cols {
                    acc += self.get(i, k) * &v[k];
                }
                acc
            })
            .collect()
    }

    /// `vᵀ M` as a row.
    pub fn vec_mul(&self, v: &[Jet]) -> Vec<Jet> {
        assert_eq!(self.rows, v.len());
        (0..self.cols)
            .map(|j| {
                let mut acc = &v[0] * self.get(0, j);
                for k in 1..self.rows {
                    acc += &v[k] * self.get(k, j);
                }
                acc
            })
            .collect()
    }

    /// Block-diagonal embedding at offset `at` inside an `n × n` zero matrix.
    pub fn embed(&self, n: usize, at: usize) -> JMat {
        let z = self.data[0].zero_like();
        JMat::from_fn(n, n, |i, j| {
            if i >= at && j >= at && i - at < self.rows && j - at < self.cols {
                self.get(i - at, j - at).clone()
            } else {
                z.clone()
            }
        })
    }

    /// Submatrix keeping rows and columns `0..n`.
    pub fn leading(&self, n: usize) -> JMat {
        JMat::from_fn(n, n, |i, j| self.get(i, j).clone())
    }

    /// Drops row and column `k`.
    pub fn drop_index(&self, k: usize) -> JMat {
        let idx: Vec<usize> = (0..self.rows).filter(|&i| i != k).collect();
        let jdx: Vec<usize> = (0..self.cols).filter(|&j| j != k).collect();
        JMat::from_fn(idx.len(), jdx.len(), |i, j| self.get(idx[i], jdx[j]).clone())
    }

    pub fn restrict(&self, var: usize, target: &Arc<JetSpace>) -> JMat {
        self.map(|x| x.restrict(var, target))
    }

    pub fn truncate(&self, order: usize) -> JMat {
        self.map(|x| x.truncate(order))
    }

    pub fn value(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).value())
    }

    /// Derivative of every entry with respect to `var`.
    pub fn d(&self, var: usize) -> JMat {
        self.map(|x| x.d(var))
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting on the
    /// values at the base point.
    pub fn inverse(&self, what: &str) -> Result<JMat> {
        let n = self.rows;
        if n != self.cols {
            return Err(Error::usage("inverse of a non-square matrix"));
        }
        let space = Arc::clone(self.data[0].space());
        let scale = self
            .data
            .iter()
            .fold(0.0_f64, |m, x| m.max(x.value().abs()))
            .max(f64::MIN_POSITIVE);
        let mut a = self.clone();
        let mut inv = JMat::identity(&space, n);
        for col in 0..n {
            let (piv, pval) = (col..n)
                .map(|r| (r, a.get(r, col).value().abs()))
                .fold((col, -1.0), |best, c| if c.1 > best.1 { c } else { best });
            if pval <= 1e-13 * scale {
                return Err(Error::Degenerate {
                    what: what.to_string(),
                    step: col,
                    pivot: pval,
                });
            }
            if piv != col {
                for j in 0..n {
                    a.data.swap(col * n + j, piv * n + j);
                    inv.data.swap(col * n + j, piv * n + j);
                }
            }
            let r = a.get(col, col).recip();
            for j in 0..n {
                let v = a.get(col, j) * &r;
                a.set(col, j, v);
                let w = inv.get(col, j) * &r;
                inv.set(col, j, w);
            }
            for row in 0..n {
                if row == col {
                    continue;
                }
                let factor = a.get(row, col).clone();
                if factor.max_abs_coeff() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let v = a.get(row, j) - &(&factor * a.get(col, j));
                    a.set(row, j, v);
                    let w = inv.get(row, j) - &(&factor * inv.get(col, j));
                    inv.set(row, j, w);
                }
            }
        }
        Ok(inv)
    }

    /// Solves `self · x = b`.
    pub fn solve(&self, b: &[Jet], what: &str) -> Result<Vec<Jet>> {
        Ok(self.inverse(what)?.mul_vec(b))
    }
}

/// Value of each jet in a slice.
pub fn values(v: &[Jet]) -> Vec<f64> {
    v.iter().map(|x| x.value()).collect()
}

/// Pads a vector or covector with zeros up to length `n`.
pub fn pad(v: &[Jet], n: usize) -> Vec<Jet> {
    let z = v[0].zero_like();
    let mut out = v.to_vec();
    out.resize(n, z);
    out
}

/// Removes component `k`.
pub fn drop_component(v: &[Jet], k: usize) -> Vec<Jet> {
    v.iter()
        .enumerate()
        .filter(|(i, _)| *i != k)
        .map(|(_, x)| x.clone())
        .collect()
}

pub fn restrict_vec(v: &[Jet], var: usize, target: &Arc<JetSpace>) -> Vec<Jet> {
    v.iter().map(|x| x.restrict(var, target)).collect()
}

pub fn dot(a: &[Jet], b: &[Jet]) -> Jet {
    let mut acc = &a[0] * &b[0];
    for k in 1..a.len() {
        acc += &a[k] * &b[k];
    }
    acc
}

/// Lexicographically ordered increasing index tuples of length `p` in `0..dim`.
#[derive(Clone, Debug)]
pub struct TupleIndex {
    dim: usize,
    deg: usize,
    tuples: Vec<Vec<usize>>,
}

impl TupleIndex {
    pub fn new(dim: usize, deg: usize) -> TupleIndex {
        fn rec(start: usize, left: usize, dim: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if left == 0 {
                out.push(cur.clone());
                return;
            }
            for i in start..dim {
                if dim - i < left {
                    break;
                }
                cur.push(i);
                rec(i + 1, left - 1, dim, cur, out);
                cur.pop();
            }
        }
        let mut tuples = Vec::new();
        rec(0, deg, dim, &mut Vec::new(), &mut tuples);
        TupleIndex { dim, deg, tuples }
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn tuple(&self, k: usize) -> &[usize] {
        &self.tuples[k]
    }

    /// Position of a strictly increasing tuple.
    pub fn position(&self, t: &[usize]) -> usize {
        // rank of a combination in lexicographic order
        let mut rank = 0;
        let mut prev = 0;
        for (pos, &v) in t.iter().enumerate() {
            let left = self.deg - pos - 1;
            for skipped in prev..v {
                rank += binom(self.dim - skipped - 1, left);
            }
            prev = v + 1;
        }
        rank
    }
}

fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut r = 1usize;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Sorts `idx`, returning the permutation sign, or `None` on a repeated index.
pub fn sort_with_sign(idx: &mut [usize]) -> Option<f64> {
    let mut sign = 1.0;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

/// A differential p-form, stored by its components on increasing index
/// tuples. Components follow the determinant convention:
/// `(α ∧ β)(e_i, e_j) = α_i β_j − α_j β_i` for 1-forms.
#[derive(Clone, Debug)]
pub struct Form {
    idx: Arc<TupleIndex>,
    comps: Vec<Jet>,
}

impl Form {
    pub fn from_fn(dim: usize, deg: usize, mut f: impl FnMut(&[usize]) -> Jet) -> Form {
        let idx = Arc::new(TupleIndex::new(dim, deg));
        let comps = (0..idx.len()).map(|k| f(idx.tuple(k))).collect();
        Form { idx, comps }
    }

    pub fn one_form(c: &[Jet]) -> Form {
        Form::from_fn(c.len(), 1, |t| c[t[0]].clone())
    }

    /// Two-form from an antisymmetric matrix `ω_ij`.
    pub fn from_matrix(m: &JMat) -> Result<Form> {
        let n = m.rows();
        for i in 0..n {
            for j in 0..n {
                let s = m.get(i, j).value() + m.get(j, i).value();
                let scale = 1.0 + m.get(i, j).value().abs();
                if s.abs() > 1e-9 * scale {
                    return Err(Error::usage(format!(
                        "two-form matrix is not antisymmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(Form::from_fn(n, 2, |t| m.get(t[0], t[1]).clone()))
    }

    pub fn dim(&self) -> usize {
        self.idx.dim
    }

    pub fn degree(&self) -> usize {
        self.idx.deg
    }

    pub fn components(&self) -> &[Jet] {
        &self.comps
    }

    pub fn tuples(&self) -> &TupleIndex {
        &self.idx
    }

    /// Component on an arbitrary index tuple (antisymmetry applied).
    pub fn get(&self, t: &[usize]) -> Option<Jet> {
        let mut s = t.to_vec();
        let sign = sort_with_sign(&mut s)?;
        let c = &self.comps[self.idx.position(&s)];
        Some(if sign < 0.0 { -c } else { c.clone() })
    }

    /// Full antisymmetric matrix of a 2-form.
    pub fn to_matrix(&self) -> JMat {
        assert_eq!(self.degree(), 2);
        let n = self.dim();
        let z = self.comps.first().map(|c| c.zero_like());
        JMat::from_fn(n, n, |i, j| {
            self.get(&[i, j])
                .unwrap_or_else(|| z.clone().expect("empty two-form"))
        })
    }

    pub fn map(&self, f: impl Fn(&Jet) -> Jet) -> Form {
        Form {
            idx: Arc::clone(&self.idx),
            comps: self.comps.iter().map(f).collect(),
        }
    }

    pub fn add(&self, o: &Form) -> Form {
        assert_eq!((self.dim(), self.degree()), (o.dim(), o.degree()));
        Form {
            idx: Arc::clone(&self.idx),
            comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Form) -> Form {
        assert_eq!((self.dim(), self.degree()), (o.dim(), o.degree()));
        Form {
            idx: Arc::clone(&self.idx),
            comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Form {
        self.map(|x| x.scale(s))
    }

    pub fn scale_jet(&self, s: &Jet) -> Form {
        self.map(|x| x * s)
    }

    pub fn values(&self) -> Vec<f64> {
        values(&self.comps)
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0_f64, |m, c| m.max(c.value().abs()))
    }

    /// Pullback along a hyperplane embedding `{x_k = const}`: drops every
    /// component that involves index `k` and restricts the jets.
    pub fn restrict_hyperplane(&self, k: usize, target: &Arc<JetSpace>) -> Form {
        let n = self.dim();
        let keep: Vec<usize> = (0..n).filter(|&i| i != k).collect();
        Form::from_fn(n - 1, self.degree(), |t| {
            let full: Vec<usize> = t.iter().map(|&i| keep[i]).collect();
            self.get(&full)
                .expect("increasing tuple")
                .restrict(k, target)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epsnum::seed;

    #[test]
    fn tuple_positions_match_enumeration() {
        let ti = TupleIndex::new(6, 3);
        for k in 0..ti.len() {
            assert_eq!(ti.position(ti.tuple(k)), k);
        }
        assert_eq!(ti.len(), 20);
    }

    #[test]
    fn jet_matrix_inverse() {
        let sp = JetSpace::get(2, 2).unwrap();
        let x = seed(&sp, &[0.4, -1.3]);
        let m = JMat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => &x[0] + 2.0,
            (0, 1) => &x[0] * &x[1],
            (1, 0) => x[1].clone(),
            _ => x[0].exp(),
        });
        let prod = m.mul(&m.inverse("m").unwrap());
        for i in 0..2 {
            for j in 0..2 {
                let target = if i == j { 1.0 } else { 0.0 };
                let e = prod.get(i, j);
                assert!((e.value() - target).abs() < 1e-14);
                assert!(e.coeffs()[1..].iter().all(|c| c.abs() < 1e-13));
            }
        }
    }

    #[test]
    fn singular_matrix_reports_step() {
        let sp = JetSpace::get(1, 0).unwrap();
        let m = JMat::from_f64(&sp, &DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]));
        match m.inverse("test") {
            Err(Error::Degenerate { step, .. }) => assert_eq!(step, 1),
            other => panic!("expected degeneracy, got {other:?}"),
        }
    }
}
