//! Truncated q-series with exact rational exponents.
//!
//! A series is `q^offset · Σ_j c_j q^{j/grid}` for `j = 0..len`, known up
//! to and including the last stored term. Exponents stay exact: operands on
//! different grids are re-gridded to the least common multiple first.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use rug::Float;

use crate::error::{Error, Result};
use crate::intmat::bigint_to_float;
use crate::numeric::CompensatedSum;
use crate::numeric::Precision;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QSeries {
    offset: Rational64,
    grid: u32,
    coeffs: Vec<BigInt>,
}

impl QSeries {
    /// `coeffs[j]` multiplies `q^{offset + j/grid}`. Panics if `grid == 0`
    /// or `coeffs` is empty.
    pub fn new(offset: Rational64, grid: u32, coeffs: Vec<BigInt>) -> Self {
        assert!(grid > 0, "grid must be positive");
        assert!(!coeffs.is_empty(), "a series needs at least one term");
        QSeries {
            offset,
            grid,
            coeffs,
        }
    }

    /// Series on the integer grid.
    pub fn integral(offset: Rational64, coeffs: Vec<BigInt>) -> Self {
        Self::new(offset, 1, coeffs)
    }

    /// `1 + O(q^{order+1})`.
    pub fn one(order: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); order + 1];
        coeffs[0] = BigInt::one();
        Self::integral(Rational64::zero(), coeffs)
    }

    pub fn offset(&self) -> Rational64 {
        self.offset
    }

    pub fn grid(&self) -> u32 {
        self.grid
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Truncation order relative to the offset, in powers of `q`.
    pub fn order(&self) -> Rational64 {
        Rational64::new(self.coeffs.len() as i64 - 1, i64::from(self.grid))
    }

    /// Absolute exponent of the last known term.
    pub fn horizon(&self) -> Rational64 {
        self.offset + self.order()
    }

    /// Coefficient of `q^exponent`, `None` beyond the truncation or off grid.
    pub fn coefficient(&self, exponent: Rational64) -> Option<BigInt> {
        let j = (exponent - self.offset) * i64::from(self.grid);
        if !j.is_integer() {
            return None;
        }
        if j.is_negative() {
            return Some(BigInt::zero());
        }
        self.coeffs.get(j.to_integer() as usize).cloned()
    }

    /// Exponent and coefficient of the first nonzero term.
    pub fn leading(&self) -> Option<(Rational64, &BigInt)> {
        self.coeffs
            .iter()
            .position(|c| !c.is_zero())
            .map(|j| (self.exponent(j), &self.coeffs[j]))
    }

    pub fn exponent(&self, j: usize) -> Rational64 {
        self.offset + Rational64::new(j as i64, i64::from(self.grid))
    }

    /// Same series on a finer grid (`grid` must divide `new_grid`).
    pub fn regrid(&self, new_grid: u32) -> Self {
        assert_eq!(new_grid % self.grid, 0, "new grid must refine the old one");
        let step = (new_grid / self.grid) as usize;
        let mut coeffs = vec![BigInt::zero(); (self.coeffs.len() - 1) * step + 1];
        for (j, c) in self.coeffs.iter().enumerate() {
            coeffs[j * step] = c.clone();
        }
        QSeries {
            offset: self.offset,
            grid: new_grid,
            coeffs,
        }
    }

    /// Coarsest grid carrying the same nonzero terms.
    pub fn compact(&self) -> Self {
        let mut step = 0usize;
        for (j, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                step = step.gcd(&j);
            }
        }
        let step = step.max(1).gcd(&(self.grid as usize));
        if step == 1 {
            return self.clone();
        }
        QSeries {
            offset: self.offset,
            grid: self.grid / step as u32,
            coeffs: self.coeffs.iter().step_by(step).cloned().collect(),
        }
    }

    /// Bring two series to a common grid that also resolves the difference
    /// of their offsets.
    fn align(&self, other: &Self) -> Result<(Self, Self, u32)> {
        let shift = self.offset - other.offset;
        let grid = u32::try_from(*shift.denom())
            .ok()
            .map(|d| self.grid.lcm(&other.grid).lcm(&d))
            .ok_or_else(|| {
                Error::SeriesMismatch(format!(
                    "offsets {} and {} have no common grid",
                    self.offset, other.offset
                ))
            })?;
        Ok((self.regrid(grid), other.regrid(grid), grid))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -1)
    }

    fn combine(&self, other: &Self, sign: i64) -> Result<Self> {
        let (a, b, grid) = self.align(other)?;
        let offset = a.offset.min(b.offset);
        let horizon = a.horizon().min(b.horizon());
        let len = ((horizon - offset) * i64::from(grid)).to_integer() + 1;
        if len <= 0 {
            return Err(Error::SeriesMismatch("truncations do not overlap".into()));
        }
        let mut coeffs = vec![BigInt::zero(); len as usize];
        for (s, factor) in [(&a, 1i64), (&b, sign)] {
            let start = ((s.offset - offset) * i64::from(grid)).to_integer() as usize;
            for (j, c) in s.coeffs.iter().enumerate() {
                if let Some(slot) = coeffs.get_mut(start + j) {
                    *slot += c * factor;
                }
            }
        }
        Ok(QSeries {
            offset,
            grid,
            coeffs,
        })
    }

    pub fn scale(&self, factor: &BigInt) -> Self {
        QSeries {
            offset: self.offset,
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let grid = self.grid.lcm(&other.grid);
        let (a, b) = (self.regrid(grid), other.regrid(grid));
        let len = a.coeffs.len().min(b.coeffs.len());
        let mut coeffs = vec![BigInt::zero(); len];
        for (i, x) in a.coeffs.iter().enumerate().take(len) {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate().take(len - i) {
                if !y.is_zero() {
                    coeffs[i + j] += x * y;
                }
            }
        }
        QSeries {
            offset: a.offset + b.offset,
            grid,
            coeffs,
        }
    }

    /// `self / other`; the divisor's first nonzero coefficient must be ±1.
    /// The result is known to the smaller of the two relative orders, after
    /// stripping the divisor's leading zeros.
    pub fn div(&self, other: &Self) -> Result<Self> {
        let grid = self.grid.lcm(&other.grid);
        let (a, b) = (self.regrid(grid), other.regrid(grid));
        let lead = b
            .coeffs
            .iter()
            .position(|c| !c.is_zero())
            .ok_or_else(|| Error::NonUnitLeading("0".into()))?;
        let b0 = &b.coeffs[lead];
        if b0.abs() != BigInt::one() {
            return Err(Error::NonUnitLeading(b0.to_string()));
        }
        let divisor = &b.coeffs[lead..];
        let sparse: Vec<(usize, &BigInt)> = divisor
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, c)| !c.is_zero())
            .collect();
        let len = a.coeffs.len().min(divisor.len());
        let mut out: Vec<BigInt> = Vec::with_capacity(len);
        for n in 0..len {
            let mut acc = a.coeffs[n].clone();
            for &(i, c) in &sparse {
                if i > n {
                    break;
                }
                acc -= c * &out[n - i];
            }
            // Dividing by ±1.
            if b0.is_negative() {
                acc = -acc;
            }
            out.push(acc);
        }
        Ok(QSeries {
            offset: a.offset - b.exponent(lead),
            grid,
            coeffs: out,
        })
    }

    /// Multiply by `q^shift`.
    pub fn shifted(&self, shift: Rational64) -> Self {
        QSeries {
            offset: self.offset + shift,
            grid: self.grid,
            coeffs: self.coeffs.clone(),
        }
    }

    /// Keep terms through relative order `order` (in powers of `q`).
    pub fn truncated(&self, order: usize) -> Self {
        let len = (order * self.grid as usize + 1).min(self.coeffs.len());
        QSeries {
            offset: self.offset,
            grid: self.grid,
            coeffs: self.coeffs[..len].to_vec(),
        }
    }

    /// Value at a real `0 < q < 1` with compensated summation.
    pub fn eval(&self, q: &Float, precision: Precision) -> Float {
        let bits = precision.bits();
        let ln_q = Float::with_val(bits, q.ln_ref());
        let step = Float::with_val(bits, &ln_q / self.grid).exp();
        let mut power = (ln_q * precision.rational(self.offset)).exp();
        let mut sum = CompensatedSum::new(precision);
        for c in &self.coeffs {
            if !c.is_zero() {
                sum.add(&Float::with_val(bits, bigint_to_float(c, bits) * &power));
            }
            power *= &step;
        }
        sum.value()
    }

    /// All coefficients non-negative.
    pub fn is_nonnegative(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }
}

/// `Π_{n>=1} (1 - q^n)^power` through `order`, on the integer grid.
pub fn euler_product(power: u32, order: usize) -> QSeries {
    let mut coeffs = vec![BigInt::zero(); order + 1];
    coeffs[0] = BigInt::one();
    for n in 1..=order {
        for _ in 0..power {
            for j in (n..=order).rev() {
                let t = coeffs[j - n].clone();
                coeffs[j] -= t;
            }
        }
    }
    QSeries::integral(Rational64::zero(), coeffs)
}

/// Partition numbers `p(0..=order)` by Euler's pentagonal recurrence.
pub fn partitions(order: usize) -> Vec<BigInt> {
    let mut p = vec![BigInt::zero(); order + 1];
    p[0] = BigInt::one();
    for n in 1..=order {
        let mut acc = BigInt::zero();
        for k in 1.. {
            let g1 = k * (3 * k - 1) / 2;
            if g1 > n {
                break;
            }
            let sign_positive = k % 2 == 1;
            let g2 = k * (3 * k + 1) / 2;
            let mut term = p[n - g1].clone();
            if g2 <= n {
                term += &p[n - g2];
            }
            if sign_positive {
                acc += term;
            } else {
                acc -= term;
            }
        }
        p[n] = acc;
    }
    p
}

/// Coefficients of `Π (1 - q^n)^{-3}` through `order`.
pub fn partitions_cubed(order: usize) -> Vec<BigInt> {
    let p = partitions(order);
    let mut p2 = vec![BigInt::zero(); order + 1];
    for i in 0..=order {
        for j in 0..=order - i {
            p2[i + j] += &p[i] * &p[j];
        }
    }
    let mut p3 = vec![BigInt::zero(); order + 1];
    for i in 0..=order {
        for j in 0..=order - i {
            p3[i + j] += &p2[i] * &p[j];
        }
    }
    p3
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn int(coeffs: &[i64]) -> QSeries {
        QSeries::integral(Rational64::zero(), coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    #[test]
    fn product_of_conjugates() {
        let p = int(&[1, 1, 0, 0]).mul(&int(&[1, -1, 0, 0]));
        assert_eq!(p, int(&[1, 0, -1, 0]));
    }

    #[test]
    fn eta_cube_identity() {
        // Σ (4n+1) q^{(4n+1)²/8} on the grid 1/8, against q^{1/8} Π(1 - q^n)^3.
        let order = 200;
        let mut lhs = vec![BigInt::zero(); 8 * order + 1];
        for n in -40i64..=40 {
            let m = 4 * n + 1;
            let j = (m * m - 1) as usize; // exponent (m² - 1)/8 in units of 1/8
            if j < lhs.len() {
                lhs[j] += m;
            }
        }
        let lhs = QSeries::new(Rational64::new(1, 8), 8, lhs).compact();
        let rhs = euler_product(3, order).shifted(Rational64::new(1, 8));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn partition_numbers() {
        let p = partitions(100);
        assert_eq!(p[10], BigInt::from(42));
        assert_eq!(p[100], "190569292".parse::<BigInt>().unwrap());
        let euler = euler_product(1, 100);
        let inv = QSeries::one(100).div(&euler).unwrap();
        assert_eq!(inv.coeffs(), &p[..]);
        let p3 = partitions_cubed(30);
        assert_eq!(QSeries::one(30).div(&euler_product(3, 30)).unwrap().coeffs(), &p3[..]);
    }

    #[test]
    fn grids_and_offsets() {
        let a = QSeries::new(Rational64::new(1, 4), 2, vec![1.into(), 2.into(), 3.into()]);
        let b = QSeries::new(Rational64::new(3, 4), 1, vec![5.into(), 7.into()]);
        let s = a.add(&b).unwrap();
        assert_eq!(s.grid(), 2);
        assert_eq!(s.coefficient(Rational64::new(3, 4)), Some(BigInt::from(7)));
        assert_eq!(s.horizon(), Rational64::new(5, 4));
        let third = QSeries::new(Rational64::new(1, 3), 1, vec![1.into(), 1.into()]);
        let mixed = a.add(&third).unwrap();
        assert_eq!(mixed.grid(), 12);
        assert_eq!(mixed.coefficient(Rational64::new(1, 3)), Some(BigInt::from(1)));
        assert!(matches!(
            int(&[2, 1]).div(&int(&[2, 1])),
            Err(Error::NonUnitLeading(_))
        ));
    }

    #[test]
    fn division_strips_leading_zeros() {
        let x = int(&[0, 1, 3, 1, 0, 0]);
        let q = int(&[1, 3, 1, 0, 0]).div(&x).unwrap();
        assert_eq!(q.offset(), Rational64::from_integer(-1));
        assert_eq!(q.coeffs()[0], BigInt::one());
        assert!(q.coeffs()[1..].iter().all(|c| c.is_zero()));
    }

    #[test]
    fn evaluation() {
        let precision = Precision::new(40);
        let q = precision.real(0.5);
        // Σ_{j<=60} (1/2)^j = 2 - 2^{-60}
        let v = QSeries::integral(Rational64::zero(), vec![BigInt::one(); 61]).eval(&q, precision);
        let expected = 2.0 - 2f64.powi(-60);
        assert!((v.to_f64() - expected).abs() < 1e-15);
        let half = QSeries::integral(Rational64::new(1, 2), vec![BigInt::one()]).eval(&q, precision);
        assert!((half.to_f64() - 0.5f64.sqrt()).abs() < 1e-15);
    }

    fn unit_series() -> impl Strategy<Value = QSeries> {
        (prop::collection::vec(-5i64..=5, 1..20), prop::bool::ANY).prop_map(|(mut c, neg)| {
            c[0] = if neg { -1 } else { 1 };
            int(&c)
        })
    }

    proptest! {
        #[test]
        fn self_division_is_one(x in unit_series()) {
            let r = x.div(&x).unwrap();
            prop_assert_eq!(r.coeffs()[0].clone(), BigInt::one());
            prop_assert!(r.coeffs()[1..].iter().all(|c| c.is_zero()));
        }

        #[test]
        fn division_inverts_multiplication(a in unit_series(), b in unit_series()) {
            let prod = a.mul(&b);
            let back = prod.div(&b).unwrap();
            let len = back.coeffs().len();
            prop_assert_eq!(back.coeffs(), &a.coeffs()[..len]);
        }

        #[test]
        fn add_sub_roundtrip(a in unit_series(), b in unit_series()) {
            let back = a.add(&b).unwrap().sub(&b).unwrap();
            let len = back.coeffs().len();
            prop_assert_eq!(back.coeffs(), &a.coeffs()[..len]);
        }
    }
}
