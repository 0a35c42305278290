//! Square integer matrices: fusion matrices, nimrep matrices, modular
//! invariants and graph generators.

use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rug::Float;
use serde::{Deserialize, Serialize};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IntMatrix {
    n: usize,
    data: Vec<i64>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

impl IntMatrix {
    pub fn zeros(n: usize) -> Self {
        IntMatrix {
            n,
            data: vec![0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Build from row vectors; `None` if the rows are not square.
    pub fn from_rows(rows: &[Vec<i64>]) -> Option<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return None;
        }
        Some(IntMatrix {
            n,
            data: rows.concat(),
        })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> i64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        IntMatrix { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.n + j] = v;
    }

    /// Row-major entries.
    pub fn data(&self) -> &[i64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.data.chunks(self.n.max(1)).map(<[i64]>::to_vec).take(self.n).collect()
    }

    pub fn trace(&self) -> i64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.n, other.n, "matrix size mismatch");
        let n = self.n;
        let mut out = IntMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.n, other.n);
        IntMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// `self += factor · other`.
    pub fn add_scaled(&mut self, factor: i64, other: &IntMatrix) {
        assert_eq!(self.n, other.n);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += factor * b;
        }
    }

    pub fn transpose(&self) -> IntMatrix {
        IntMatrix::from_fn(self.n, |i, j| self.get(j, i))
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// First negative entry in row-major order.
    pub fn first_negative(&self) -> Option<(usize, usize, i64)> {
        self.data
            .iter()
            .position(|&v| v < 0)
            .map(|k| (k / self.n, k % self.n, self.data[k]))
    }

    /// Connectivity of the graph with an edge `i - j` whenever
    /// `m[i][j] != 0` or `m[j][i] != 0`.
    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..self.n {
                if !seen[j] && (self.get(i, j) != 0 || self.get(j, i) != 0) {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Simultaneous row/column relabeling: entry `(i, j)` of the result is
    /// entry `(perm[i], perm[j])` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> IntMatrix {
        IntMatrix::from_fn(self.n, |i, j| self.get(perm[i], perm[j]))
    }

    /// Characteristic polynomial `det(xI - A)`, coefficients from the
    /// leading `x^n` term down, by the division-free Berkowitz recursion.
    pub fn charpoly(&self) -> Vec<BigInt> {
        let n = self.n;
        let a = |i: usize, j: usize| BigInt::from(self.get(i, j));
        let mut poly = vec![BigInt::from(1)];
        for r in 0..n {
            // Toeplitz column: 1, -a_rr, -R C, -R A C, ..., -R A^{r-1} C
            let mut col = vec![BigInt::from(1), -a(r, r)];
            let mut v: Vec<BigInt> = (0..r).map(|i| a(i, r)).collect();
            for _ in 0..r {
                let rc: BigInt = (0..r).map(|j| a(r, j) * &v[j]).sum();
                col.push(-rc);
                v = (0..r)
                    .map(|i| (0..r).map(|j| a(i, j) * &v[j]).sum())
                    .collect();
            }
            let next: Vec<BigInt> = (0..r + 2)
                .map(|i| {
                    (0..=i.min(r))
                        .map(|j| &col[i - j] * &poly[j])
                        .sum()
                })
                .collect();
            poly = next;
        }
        poly
    }

    /// Spectral radius in double precision.
    pub fn spectral_radius(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let m = DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j) as f64);
        if self.is_symmetric() {
            m.symmetric_eigenvalues()
                .iter()
                .fold(0.0f64, |acc, v| acc.max(v.abs()))
        } else {
            m.complex_eigenvalues()
                .iter()
                .fold(0.0f64, |acc, v| acc.max(v.norm()))
        }
    }
}

/// Evaluate a polynomial (highest coefficient first) at a real point.
pub fn eval_poly(coeffs: &[BigInt], x: &Float) -> Float {
    let mut acc = Float::new(x.prec());
    for c in coeffs {
        acc *= x;
        acc += &bigint_to_float(c, x.prec());
    }
    acc
}

/// Exact conversion of a big integer to an MPFR value.
pub fn bigint_to_float(c: &BigInt, bits: u32) -> Float {
    if c.is_zero() {
        return Float::new(bits);
    }
    if let Some(small) = c.to_i64() {
        return Float::with_val(bits, small);
    }
    let i = rug::Integer::from_str_radix(&c.to_str_radix(16), 16).unwrap_or_default();
    Float::with_val(bits, i)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> IntMatrix {
        IntMatrix::from_fn(n, |i, j| i64::from(i.abs_diff(j) == 1))
    }

    #[test]
    fn charpoly_of_small_matrices() {
        let m = IntMatrix::from_rows(&[vec![1, 2], vec![3, 4]]).unwrap();
        let p: Vec<i64> = m.charpoly().iter().map(|c| c.to_i64().unwrap()).collect();
        assert_eq!(p, vec![1, -5, -2]);
        let p3: Vec<i64> = path(3).charpoly().iter().map(|c| c.to_i64().unwrap()).collect();
        assert_eq!(p3, vec![1, 0, -2, 0]);
    }

    #[test]
    fn charpoly_matches_trace_and_determinant() {
        let m = IntMatrix::from_rows(&[vec![2, -1, 0], vec![4, 0, 3], vec![1, 1, 5]]).unwrap();
        let p = m.charpoly();
        assert_eq!(p[1], BigInt::from(-m.trace()));
        // det = 2(0-3) + 1(20-3) = 11, constant term is -det for n = 3
        assert_eq!(p[3], BigInt::from(-11));
    }

    #[test]
    fn path_radius() {
        let r = path(5).spectral_radius();
        assert!((r - 2.0 * (std::f64::consts::PI / 6.0).cos()).abs() < 1e-12);
    }

    #[test]
    fn connectivity() {
        assert!(path(4).is_connected());
        let mut m = path(4);
        m.set(1, 2, 0);
        m.set(2, 1, 0);
        assert!(!m.is_connected());
    }

    #[test]
    fn eval_poly_at_root() {
        let bits = 200;
        let x = Float::with_val(bits, 2).sqrt();
        let v = eval_poly(&path(3).charpoly(), &x);
        assert!(v.abs() < 1e-50);
    }
}
