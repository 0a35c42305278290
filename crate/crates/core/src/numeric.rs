//! Configurable-precision real and complex arithmetic.
//!
//! Every transcendental quantity in the crate (S and T matrices, character
//! values, boundary-state coefficients) is an MPFR value whose precision is
//! derived from a [`Precision`] given in decimal digits. Integrality and
//! rationality decisions are made by rounding followed by a residual check
//! against a tolerance expressed in the same digit count.

use std::ops::{Index, IndexMut};

use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};
use rug::float::Constant;
use rug::ops::PowAssign;
use rug::{Assign, Complex, Float};

/// Default working precision in decimal digits.
pub const DEFAULT_DIGITS: u32 = 50;

/// Extra binary digits carried beyond the requested decimal precision.
const GUARD_BITS: u32 = 32;

/// Working precision, counted in decimal digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Precision(u32);

impl Default for Precision {
    fn default() -> Self {
        Precision(DEFAULT_DIGITS)
    }
}

impl Precision {
    pub const fn new(digits: u32) -> Self {
        Precision(digits)
    }

    pub fn digits(self) -> u32 {
        self.0
    }

    /// Mantissa bits used for MPFR values at this precision.
    pub fn bits(self) -> u32 {
        (f64::from(self.0) * std::f64::consts::LOG2_10).ceil() as u32 + GUARD_BITS
    }

    pub fn real<T>(self, value: T) -> Float
    where
        Float: Assign<T>,
    {
        Float::with_val(self.bits(), value)
    }

    pub fn complex<T>(self, value: T) -> Complex
    where
        Complex: Assign<T>,
    {
        Complex::with_val(self.bits(), value)
    }

    pub fn pi(self) -> Float {
        Float::with_val(self.bits(), Constant::Pi)
    }

    /// `10^exponent` at this precision.
    pub fn pow10(self, exponent: i32) -> Float {
        let mut x = self.real(10);
        x.pow_assign(exponent);
        x
    }

    /// Residual threshold `10^(-digits/2)` used for validating input data.
    pub fn tolerance(self) -> Float {
        self.pow10(-((self.0 / 2) as i32))
    }

    pub fn rational(self, r: Rational64) -> Float {
        let mut x = self.real(*r.numer());
        x /= *r.denom();
        x
    }

    /// `exp(2πi·turns)`; the exact rational is reduced modulo 1 before the
    /// transcendental evaluation.
    pub fn cis_turns(self, turns: Rational64) -> Complex {
        let reduced = turns - turns.floor();
        let mut angle = self.pi();
        angle *= 2;
        angle *= &self.rational(reduced);
        let (sin, cos) = angle.sin_cos(self.real(0));
        Complex::with_val(self.bits(), (cos, sin))
    }

    /// Digits needed to print a value so that parsing it back is exact.
    pub fn roundtrip_digits(self) -> usize {
        (f64::from(self.bits()) * std::f64::consts::LOG10_2).ceil() as usize + 2
    }
}

/// Absolute value of a complex number as a real.
pub fn cabs(z: &Complex) -> Float {
    Float::with_val(z.prec().0, z.abs_ref())
}

/// Fixed-digit scientific rendering of a real value.
pub fn format_float(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(10, Some(digits))
}

/// Parse a decimal string into a value at the given precision.
pub fn parse_float(s: &str, precision: Precision) -> Option<Float> {
    let parsed = Float::parse(s.trim()).ok()?;
    Some(Float::with_val(precision.bits(), parsed))
}

/// Best rational approximation `p/q` with `q <= max_den` lying within
/// `tol` of `x`, found from the continued-fraction convergents.
pub fn rationalize(x: &Float, max_den: i64, tol: &Float) -> Option<Rational64> {
    let prec = x.prec();
    let mut y = x.clone();
    let (mut h1, mut h2): (i128, i128) = (1, 0);
    let (mut k1, mut k2): (i128, i128) = (0, 1);
    for _ in 0..64 {
        let a_float = Float::with_val(prec, y.floor_ref());
        let a = a_float.to_f64();
        if !a.is_finite() || a.abs() > 1e15 {
            return None;
        }
        let a = a as i128;
        let h = a * h1 + h2;
        let k = a * k1 + k2;
        if k > i128::from(max_den) {
            return None;
        }
        let mut err = Float::with_val(prec, h);
        err /= k as f64;
        err -= x;
        if err.abs() < *tol {
            return Some(Rational64::new(i64::try_from(h).ok()?, i64::try_from(k).ok()?));
        }
        let frac = y - &a_float;
        if frac.is_zero() {
            return None;
        }
        y = frac.recip();
        h2 = h1;
        h1 = h;
        k2 = k1;
        k1 = k;
    }
    None
}

/// Neumaier-compensated accumulator.
#[derive(Clone, Debug)]
pub struct CompensatedSum {
    sum: Float,
    carry: Float,
}

impl CompensatedSum {
    pub fn new(precision: Precision) -> Self {
        CompensatedSum {
            sum: precision.real(0),
            carry: precision.real(0),
        }
    }

    pub fn add(&mut self, x: &Float) {
        let t = Float::with_val(self.sum.prec(), &self.sum + x);
        if self.sum.cmp_abs(x) != Some(std::cmp::Ordering::Less) {
            let mut c = Float::with_val(self.sum.prec(), &self.sum - &t);
            c += x;
            self.carry += c;
        } else {
            let mut c = Float::with_val(self.sum.prec(), x - &t);
            c += &self.sum;
            self.carry += c;
        }
        self.sum = t;
    }

    pub fn value(&self) -> Float {
        Float::with_val(self.sum.prec(), &self.sum + &self.carry)
    }
}

/// Dense complex matrix at a fixed MPFR precision.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    bits: u32,
    data: Vec<Complex>,
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex;
    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex {
        &mut self.data[i * self.cols + j]
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize, precision: Precision) -> Self {
        let bits = precision.bits();
        CMatrix {
            rows,
            cols,
            bits,
            data: vec![Complex::new(bits); rows * cols],
        }
    }

    pub fn identity(n: usize, precision: Precision) -> Self {
        let mut m = Self::zeros(n, n, precision);
        for i in 0..n {
            m[(i, i)].assign(1);
        }
        m
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        precision: Precision,
        mut f: impl FnMut(usize, usize) -> Complex,
    ) -> Self {
        let bits = precision.bits();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(Complex::with_val(bits, f(i, j)));
            }
        }
        CMatrix { rows, cols, bits, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn row(&self, i: usize) -> &[Complex] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "matrix shape mismatch");
        let bits = self.bits.max(other.bits);
        let mut data = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Complex::new(bits);
                for k in 0..self.cols {
                    acc += &self[(i, k)] * &other[(k, j)];
                }
                data.push(acc);
            }
        }
        CMatrix {
            rows: self.rows,
            cols: other.cols,
            bits,
            data,
        }
    }

    pub fn adjoint(&self) -> CMatrix {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(Complex::with_val(self.bits, self[(i, j)].conj_ref()));
            }
        }
        CMatrix {
            rows: self.cols,
            cols: self.rows,
            bits: self.bits,
            data,
        }
    }

    pub fn transpose(&self) -> CMatrix {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self[(i, j)].clone());
            }
        }
        CMatrix {
            rows: self.cols,
            cols: self.rows,
            bits: self.bits,
            data,
        }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> Float {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut worst = Float::new(self.bits);
        for (a, b) in self.data.iter().zip(&other.data) {
            let d = Complex::with_val(self.bits, a - b);
            let m = cabs(&d);
            if m > worst {
                worst = m;
            }
        }
        worst
    }

    pub fn max_abs(&self) -> Float {
        let mut worst = Float::new(self.bits);
        for z in &self.data {
            let m = cabs(z);
            if m > worst {
                worst = m;
            }
        }
        worst
    }

    /// True when every imaginary part is exactly zero.
    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.imag().is_zero())
    }

    /// Right-multiply by `diag(d)`.
    pub fn scale_columns(&self, d: &[Complex]) -> CMatrix {
        assert_eq!(d.len(), self.cols);
        let mut out = self.clone();
        for i in 0..self.rows {
            for (j, dj) in d.iter().enumerate() {
                out[(i, j)] *= dj;
            }
        }
        out
    }
}

/// Kernel basis of `a` by Gauss–Jordan elimination with column-order
/// partial pivoting. A column whose best remaining pivot is below
/// `tol · max|a|` is treated as free. Each basis vector has a 1 in its own
/// free coordinate and 0 in the other free coordinates.
pub fn null_space(a: &CMatrix, tol: &Float) -> Vec<Vec<Complex>> {
    let (rows, cols) = (a.rows(), a.cols());
    let bits = a.bits();
    let mut threshold = a.max_abs();
    threshold *= tol;
    let mut m: Vec<Vec<Complex>> = (0..rows).map(|i| a.row(i).to_vec()).collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut free: Vec<usize> = Vec::new();
    let mut r = 0usize;
    for c in 0..cols {
        let mut best = None;
        let mut best_abs = Float::new(bits);
        for (i, row) in m.iter().enumerate().skip(r) {
            let v = cabs(&row[c]);
            if v > best_abs {
                best_abs = v;
                best = Some(i);
            }
        }
        match best {
            Some(p) if best_abs > threshold => {
                m.swap(r, p);
                let inv = Complex::with_val(bits, m[r][c].recip_ref());
                for z in m[r].iter_mut() {
                    *z *= &inv;
                }
                let pivot_row = m[r].clone();
                for (i, row) in m.iter_mut().enumerate() {
                    if i == r || row[c].is_zero() {
                        continue;
                    }
                    let factor = row[c].clone();
                    for (z, p) in row.iter_mut().zip(&pivot_row) {
                        *z -= &factor * p;
                    }
                }
                pivots.push(c);
                r += 1;
            }
            _ => free.push(c),
        }
    }
    free.iter()
        .map(|&f| {
            let mut v = vec![Complex::new(bits); cols];
            v[f].assign(1);
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = Complex::with_val(bits, -&m[i][f]);
            }
            v
        })
        .collect()
}

/// Exact floor of a rational as an integer.
pub fn rational_floor(r: Rational64) -> i64 {
    r.floor().to_integer()
}

/// True when `r` is an integer.
pub fn rational_is_integer(r: Rational64) -> bool {
    r.is_integer()
}

/// Render an exact rational as `"p/q"` (or `"p"` when integral).
pub fn format_rational(r: Rational64) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse `"p/q"` or `"p"`.
pub fn parse_rational(s: &str) -> Option<Rational64> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().ok()?;
            let d: i64 = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Rational64::new(n, d))
            }
        }
        None => s.parse::<i64>().ok().map(Rational64::from_integer),
    }
}

/// Absolute value of a rational as `f64`.
pub fn rational_abs_f64(r: Rational64) -> f64 {
    r.abs().to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bits_grow_with_digits() {
        assert!(Precision::new(50).bits() > 166);
        assert!(Precision::new(100).bits() > Precision::new(50).bits());
    }

    #[test]
    fn rationalize_recovers_small_fractions() {
        let p = Precision::new(50);
        let mut x = p.real(-7);
        x /= 13;
        let r = rationalize(&x, 1_000_000, &p.pow10(-20)).unwrap();
        assert_eq!(r, Rational64::new(-7, 13));
        assert_eq!(
            rationalize(&p.real(3), 10, &p.pow10(-20)),
            Some(Rational64::from_integer(3))
        );
    }

    #[test]
    fn rationalize_rejects_irrationals() {
        let p = Precision::new(50);
        let x = p.real(2).sqrt();
        assert_eq!(rationalize(&x, 1_000_000, &p.pow10(-20)), None);
    }

    #[test]
    fn null_space_of_rank_one_matrix() {
        let p = Precision::new(40);
        let a = CMatrix::from_fn(2, 3, p, |i, j| p.complex((i + 1) * (j + 1)));
        let basis = null_space(&a, &p.tolerance());
        assert_eq!(basis.len(), 2);
        for v in &basis {
            for i in 0..2 {
                let mut acc = p.complex(0);
                for j in 0..3 {
                    acc += &a[(i, j)] * &v[j];
                }
                assert!(cabs(&acc) < p.pow10(-35));
            }
        }
    }

    #[test]
    fn cis_turns_quarter() {
        let p = Precision::new(50);
        let z = p.cis_turns(Rational64::new(5, 4));
        assert!(z.real().clone().abs() < p.pow10(-45));
        assert!((z.imag().clone() - 1u32).abs() < p.pow10(-45));
    }

    #[test]
    fn rational_strings_roundtrip() {
        for r in [Rational64::new(3, 16), Rational64::new(-22, 5), Rational64::from_integer(4)] {
            assert_eq!(parse_rational(&format_rational(r)), Some(r));
        }
        assert_eq!(parse_rational("1/0"), None);
    }

    #[test]
    fn compensated_sum_matches_plain_sum() {
        let p = Precision::new(30);
        let mut s = CompensatedSum::new(p);
        for i in 1..=100 {
            s.add(&p.real(i));
        }
        assert_eq!(s.value(), 5050);
    }
}
