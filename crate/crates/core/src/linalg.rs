//! Exact linear algebra over [`Scalar`]: row reduction, kernels, and
//! subspaces in canonical reduced form.
//!
//! Vectors are plain `Vec<Scalar>`; matrices are lists of rows.

use std::fmt;

use num_traits::{One, Zero};

use crate::scalar::Scalar;

pub type Vector = Vec<Scalar>;

pub fn zero_vector(n: usize) -> Vector {
    vec![Scalar::zero(); n]
}

pub fn unit_vector(n: usize, k: usize) -> Vector {
    let mut v = zero_vector(n);
    v[k] = Scalar::one();
    v
}

pub fn is_zero_vector(v: &[Scalar]) -> bool {
    v.iter().all(Zero::is_zero)
}

pub fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    a.iter().zip(b).fold(Scalar::zero(), |acc, (x, y)| acc + x * y)
}

pub fn scale(v: &[Scalar], c: &Scalar) -> Vector {
    v.iter().map(|x| x * c).collect()
}

pub fn add_scaled(acc: &mut [Scalar], v: &[Scalar], c: &Scalar) {
    if c.is_zero() {
        return;
    }
    for (a, x) in acc.iter_mut().zip(v) {
        if !x.is_zero() {
            *a += &(x * c);
        }
    }
}

pub fn sub_vec(a: &[Scalar], b: &[Scalar]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn int_vector(v: &[i64]) -> Vector {
    v.iter().map(|&x| Scalar::from_int(x)).collect()
}

/// `A x` for a row-major `A`.
pub fn mat_vec(a: &[Vector], x: &[Scalar]) -> Vector {
    a.iter().map(|row| dot(row, x)).collect()
}

/// Reduced row echelon form of `rows` with zero rows removed.
///
/// Pivots are strictly increasing, each pivot entry is one, and every
/// other entry in a pivot column is zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub rows: Vec<Vector>,
    pub pivots: Vec<usize>,
    pub ncols: usize,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

pub fn rref(rows: &[Vector], ncols: usize) -> Rref {
    let mut m: Vec<Vector> = rows.to_vec();
    debug_assert!(m.iter().all(|r| r.len() == ncols));
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&k| !m[k][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip().expect("nonzero pivot");
        if !inv.is_one() {
            m[r] = scale(&m[r], &inv);
        }
        let pivot_row = m[r].clone();
        for (k, row) in m.iter_mut().enumerate() {
            if k != r && !row[c].is_zero() {
                let f = -row[c].clone();
                add_scaled(row, &pivot_row, &f);
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    Rref { rows: m, pivots, ncols }
}

pub fn rank(rows: &[Vector], ncols: usize) -> usize {
    rref(rows, ncols).rank()
}

/// Basis of `{x : A x = 0}`, one vector per free column of the RREF.
pub fn nullspace(rows: &[Vector], ncols: usize) -> Vec<Vector> {
    let red = rref(rows, ncols);
    let mut is_pivot = vec![false; ncols];
    for &p in &red.pivots {
        is_pivot[p] = true;
    }
    (0..ncols)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut v = unit_vector(ncols, f);
            for (row, &p) in red.rows.iter().zip(&red.pivots) {
                v[p] = -row[f].clone();
            }
            v
        })
        .collect()
}

/// Basis of `{c : c A = 0}` for an `m x n` matrix `A`.
pub fn left_kernel(rows: &[Vector], ncols: usize) -> Vec<Vector> {
    nullspace(&transpose(rows, ncols), rows.len())
}

pub fn transpose(rows: &[Vector], ncols: usize) -> Vec<Vector> {
    (0..ncols)
        .map(|c| rows.iter().map(|r| r[c].clone()).collect())
        .collect()
}

/// A linear subspace of `K^dim`, stored by its canonical RREF basis.
///
/// Two subspaces are equal exactly when their stored bases are equal.
#[derive(Clone, PartialEq, Eq)]
pub struct Subspace {
    basis: Rref,
}

impl Subspace {
    pub fn zero(dim: usize) -> Self {
        Subspace { basis: Rref { rows: Vec::new(), pivots: Vec::new(), ncols: dim } }
    }

    pub fn full(dim: usize) -> Self {
        Subspace::span((0..dim).map(|k| unit_vector(dim, k)).collect::<Vec<_>>(), dim)
    }

    pub fn span<V: AsRef<[Vector]>>(vectors: V, dim: usize) -> Self {
        Subspace { basis: rref(vectors.as_ref(), dim) }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.ncols
    }

    pub fn dim(&self) -> usize {
        self.basis.rank()
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.basis.pivots
    }

    pub fn into_basis(self) -> Vec<Vector> {
        self.basis.rows
    }

    /// Canonical representative of `v` modulo this subspace: the pivot
    /// coordinates are eliminated.
    pub fn reduce(&self, v: &[Scalar]) -> Vector {
        let mut out = v.to_vec();
        for (row, &p) in self.basis.rows.iter().zip(&self.basis.pivots) {
            if !out[p].is_zero() {
                let f = -out[p].clone();
                add_scaled(&mut out, row, &f);
            }
        }
        out
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        is_zero_vector(&self.reduce(v))
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.basis().iter().all(|v| other.contains(v))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        let rows: Vec<Vector> = self.basis().iter().chain(other.basis()).cloned().collect();
        Subspace::span(rows, self.ambient_dim())
    }

    /// Exact intersection, solved as the kernel of `[U^T | -W^T]`.
    pub fn intersect(&self, other: &Subspace) -> Subspace {
        let dim = self.ambient_dim();
        let (u, w) = (self.basis(), other.basis());
        if u.is_empty() || w.is_empty() {
            return Subspace::zero(dim);
        }
        let ncols = u.len() + w.len();
        let system: Vec<Vector> = (0..dim)
            .map(|c| {
                u.iter()
                    .map(|r| r[c].clone())
                    .chain(w.iter().map(|r| -&r[c]))
                    .collect()
            })
            .collect();
        let vectors: Vec<Vector> = nullspace(&system, ncols)
            .into_iter()
            .map(|coeffs| {
                let mut v = zero_vector(dim);
                for (c, row) in coeffs.iter().zip(u) {
                    add_scaled(&mut v, row, c);
                }
                v
            })
            .collect();
        Subspace::span(vectors, dim)
    }

    /// `{x : <x, v> = 0 for all v in self}` under the plain dot product.
    pub fn annihilator(&self) -> Subspace {
        let dim = self.ambient_dim();
        Subspace::span(nullspace(self.basis(), dim), dim)
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = self
            .basis()
            .iter()
            .map(|r| r.iter().map(ToString::to_string).collect())
            .collect();
        f.debug_struct("Subspace").field("dim", &self.ambient_dim()).field("basis", &rows).finish()
    }
}

/// Square integer matrix in column-major convention: column `l` is the
/// image of basis vector `l`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct IntMatrix {
    n: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(n: usize) -> Self {
        IntMatrix { n, data: vec![0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zeros(n);
        for k in 0..n {
            m.set(k, k, 1);
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.data[row * self.n + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: i64) {
        self.data[row * self.n + col] = value;
    }

    pub fn add_at(&mut self, row: usize, col: usize, value: i64) {
        self.data[row * self.n + col] += value;
    }

    pub fn column(&self, col: usize) -> Vec<i64> {
        (0..self.n).map(|r| self.get(r, col)).collect()
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.data.chunks(self.n.max(1)).take(self.n).map(<[i64]>::to_vec).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zeros(self.n);
        for r in 0..self.n {
            for c in 0..self.n {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        let n = self.n;
        let mut out = IntMatrix::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.get(r, k);
                if a == 0 {
                    continue;
                }
                for c in 0..n {
                    out.add_at(r, c, a * other.get(k, c));
                }
            }
        }
        out
    }

    pub fn add(&self, other: &IntMatrix) -> IntMatrix {
        IntMatrix { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &IntMatrix) -> IntMatrix {
        IntMatrix { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, c: i64) -> IntMatrix {
        IntMatrix { n: self.n, data: self.data.iter().map(|a| a * c).collect() }
    }

    pub fn to_scalar_rows(&self) -> Vec<Vector> {
        self.rows().iter().map(|r| int_vector(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> Vec<Vector> {
        rows.iter().map(|r| int_vector(r)).collect()
    }

    #[test]
    fn rref_of_identity_is_identity() {
        let id = m(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        let r = rref(&id, 3);
        assert_eq!(r.rows, id);
        assert_eq!(r.pivots, vec![0, 1, 2]);
    }

    #[test]
    fn rref_drops_dependent_rows() {
        let a = m(&[&[2, 4, 6], &[1, 2, 3], &[0, 1, 1]]);
        let r = rref(&a, 3);
        assert_eq!(r.rows, m(&[&[1, 0, 1], &[0, 1, 1]]));
        assert_eq!(r.pivots, vec![0, 1]);
    }

    #[test]
    fn nullspace_is_annihilated() {
        let a = m(&[&[1, 2, 3, 4], &[2, 4, 7, 9]]);
        let ker = nullspace(&a, 4);
        assert_eq!(ker.len(), 2);
        for v in &ker {
            assert!(is_zero_vector(&mat_vec(&a, v)));
        }
    }

    #[test]
    fn left_kernel_of_dependent_rows() {
        let a = m(&[&[1, 0], &[0, 1], &[1, 1]]);
        let ker = left_kernel(&a, 2);
        assert_eq!(ker, m(&[&[-1, -1, 1]]));
    }

    #[test]
    fn intersection_of_planes() {
        let u = Subspace::span(m(&[&[1, 0, 0], &[0, 1, 0]]), 3);
        let w = Subspace::span(m(&[&[0, 1, 0], &[0, 0, 1]]), 3);
        let i = u.intersect(&w);
        assert_eq!(i.basis(), &m(&[&[0, 1, 0]])[..]);
        assert!(i.is_subspace_of(&u) && i.is_subspace_of(&w));
    }

    #[test]
    fn reduce_eliminates_pivots() {
        let s = Subspace::span(m(&[&[1, 1, 0]]), 3);
        assert_eq!(s.reduce(&int_vector(&[2, 0, 5])), int_vector(&[0, -2, 5]));
        assert!(s.contains(&int_vector(&[-3, -3, 0])));
    }

    #[test]
    fn int_matrix_products() {
        let mut n = IntMatrix::zeros(2);
        n.set(0, 1, 3);
        assert!(n.mul(&n).is_zero());
        let t = IntMatrix::identity(2).add(&n);
        assert_eq!(t.transpose().get(1, 0), 3);
        assert_eq!(t.column(1), vec![3, 1]);
    }
}
