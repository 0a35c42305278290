//! Characters `χ_ρ(q) = Tr_ρ q^{L_0 - c/24}` of the built-in families and
//! the numerical S-transform check.

use num_bigint::BigInt;
use num_rational::Rational64;
use num_traits::Zero;
use rayon::prelude::*;
use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::modular_data::{kac_weight, minimal_central_charge, ModelFamily, ModularData};
use crate::numeric::{cabs, Precision};
use crate::qseries::{partitions, QSeries};

/// Largest truncation order accepted for characters.
pub const MAX_ORDER: usize = 10_000;

/// Default tolerance for channel checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

fn check_order(order: usize) -> Result<()> {
    if order > MAX_ORDER {
        return Err(Error::InvalidParameter(format!(
            "order {order} exceeds the maximum of {MAX_ORDER}"
        )));
    }
    Ok(())
}

/// Virasoro minimal-model character of the Kac sector `(r, s)`:
/// `q^{-1/24} Π(1 - q^n)^{-1} Σ_n (q^{a(n)} - q^{b(n)})` with
/// `a(n) = (2pp'n + pr - p's)²/4pp'` and `b(n) = (2pp'n + pr + p's)²/4pp'`.
pub fn char_minimal(p: u32, p_prime: u32, sector: (u32, u32), order: usize) -> Result<QSeries> {
    check_order(order)?;
    let (r, s) = sector;
    if !(1..p_prime).contains(&r) || !(1..p).contains(&s) {
        return Err(Error::InvalidMinimalLabels {
            p,
            p_prime,
            reason: format!("Kac label ({r},{s}) outside 1 <= r < p', 1 <= s < p"),
        });
    }
    let (pp, r, s) = (i64::from(p) * i64::from(p_prime), i64::from(r), i64::from(s));
    let (pr, ps) = (i64::from(p) * r, i64::from(p_prime) * s);
    // Exponents relative to a(0): a(n) - a(0) = pp'n² + (pr - p's)n and
    // b(n) - a(0) = pp'n² + (pr + p's)n + rs.
    let mut numerator = vec![BigInt::zero(); order + 1];
    let bound = (order as i64) / pp + 2;
    for n in -bound..=bound {
        let ea = pp * n * n + (pr - ps) * n;
        let eb = pp * n * n + (pr + ps) * n + r * s;
        if (0..=order as i64).contains(&ea) {
            numerator[ea as usize] += 1;
        }
        if (0..=order as i64).contains(&eb) {
            numerator[eb as usize] -= 1;
        }
    }
    let c = minimal_central_charge(p, p_prime);
    let offset = kac_weight(p, p_prime, r as u32, s as u32) - c / 24;
    let numerator = QSeries::integral(offset, numerator);
    let inverse_euler = QSeries::integral(Rational64::zero(), partitions(order));
    Ok(numerator.mul(&inverse_euler))
}

/// `A_{m,N}(q) = Σ_n (m + 2Nn) q^{(m + 2Nn)²/4N}` through relative order
/// `order`, for `0 < m < N`.
pub fn theta_difference(m: i64, big_n: i64, order: usize) -> QSeries {
    // (m + 2Nn)²/4N = m²/4N + Nn² + mn
    let mut coeffs = vec![BigInt::zero(); order + 1];
    let bound = (order as f64 / big_n as f64).sqrt() as i64 + 2;
    for n in -bound..=bound {
        let e = big_n * n * n + m * n;
        if (0..=order as i64).contains(&e) {
            coeffs[e as usize] += m + 2 * big_n * n;
        }
    }
    QSeries::integral(Rational64::new(m * m, 4 * big_n), coeffs)
}

/// SU(2)_k character of spin `a/2`: `A_{a+1,k+2} / A_{1,2}`. Its leading
/// coefficient is `a + 1`, the dimension of the ground-state multiplet.
pub fn char_su2(k: u32, a: u32, order: usize) -> Result<QSeries> {
    check_order(order)?;
    if k == 0 {
        return Err(Error::TrivialLevel);
    }
    if a > k {
        return Err(Error::InvalidParameter(format!("sector {a} outside 0..={k}")));
    }
    let num = theta_difference(i64::from(a) + 1, i64::from(k) + 2, order);
    let den = theta_difference(1, 2, order);
    num.div(&den)
}

/// Character of sector `rho` of a built-in model.
pub fn character(md: &ModularData, rho: usize, order: usize) -> Result<QSeries> {
    match md.family() {
        ModelFamily::Su2 { level } => char_su2(*level, rho as u32, order),
        ModelFamily::Minimal { p, p_prime, kac } => char_minimal(*p, *p_prime, kac[rho], order),
        ModelFamily::Custom => Err(Error::CharactersUnavailable(md.name().to_string())),
    }
}

/// Characters of every sector, in sector order.
pub fn characters(md: &ModularData, order: usize) -> Result<Vec<QSeries>> {
    (0..md.len())
        .into_par_iter()
        .map(|rho| character(md, rho, order))
        .collect()
}

/// Upper bound on `Σ_{j > order} b(j) x^{offset + j}` where `b(j)` bounds
/// the `j`-th coefficient of sector `rho`:
/// `p(j) <= exp(π sqrt(2j/3))` for minimal models, and
/// `(a+1) C(j+2, 2) exp(π sqrt(2j))` for SU(2) (three loop generators per
/// mode acting on the `(a+1)`-dimensional ground states).
pub fn tail_bound(md: &ModularData, rho: usize, order: usize, x: f64) -> f64 {
    if !(x > 0.0 && x < 1.0) {
        return f64::INFINITY;
    }
    let pi = std::f64::consts::PI;
    let ln_b: Box<dyn Fn(f64) -> f64> = match md.family() {
        ModelFamily::Su2 { .. } => {
            let mult = (rho as f64 + 1.0).ln();
            Box::new(move |j: f64| mult + ((j + 2.0) * (j + 1.0) / 2.0).ln() + pi * (2.0 * j).sqrt())
        }
        _ => Box::new(move |j: f64| pi * (2.0 * j / 3.0).sqrt()),
    };
    let offset = md.weights()[rho] - md.central_charge() / 24;
    let offset = *offset.numer() as f64 / *offset.denom() as f64;
    let ln_x = x.ln();
    let mut total = 0.0f64;
    let mut j = order as f64 + 1.0;
    let mut prev = f64::NEG_INFINITY;
    for _ in 0..10_000_000u32 {
        let ln_t = ln_b(j) + (offset + j) * ln_x;
        let ratio = (ln_t - prev).exp();
        total += ln_t.exp();
        // The term ratio decreases in j; once it is below 1/2 the rest is
        // bounded by a geometric series.
        if prev.is_finite() && ratio < 0.5 {
            return total + ln_t.exp() * ratio / (1.0 - ratio);
        }
        prev = ln_t;
        j += 1.0;
    }
    f64::INFINITY
}

/// Outcome of a channel comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelResidual {
    /// Numerical residual of the truncated series.
    pub numeric: f64,
    /// Analytic bound on what truncation can hide.
    pub tail_bound: f64,
    pub tolerance: f64,
}

impl ChannelResidual {
    /// Reported residual: numerical residual plus the tail bound, so it
    /// never undercuts the truncation error.
    pub fn residual(&self) -> f64 {
        self.numeric + self.tail_bound
    }

    pub fn passed(&self) -> bool {
        self.residual() < self.tolerance
    }
}

/// `β` must be positive and finite; whether truncation is adequate is
/// decided by the tail bound, not by a fixed range.
pub fn check_beta(beta: f64) -> Result<()> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta = {beta} must be positive")));
    }
    Ok(())
}

/// Nomes `q = e^{-β}` and `q̃ = e^{-4π²/β}`.
pub fn nomes(beta: f64, precision: Precision) -> (Float, Float) {
    let bits = precision.bits();
    let b = Float::with_val(bits, beta);
    let q = Float::with_val(bits, -&b).exp();
    let mut qt = precision.pi().square() * 4u32;
    qt /= &b;
    qt = (-qt).exp();
    (q, qt)
}

pub fn s_transform_residual(md: &ModularData, order: usize, beta: f64) -> Result<ChannelResidual> {
    s_transform_residual_with(md, order, beta, DEFAULT_TOLERANCE)
}

/// `max_λ |χ_λ(q̃) - Σ_μ S_λμ χ_μ(q)|` with `q = e^{-β}`, `q̃ = e^{-4π²/β}`.
///
/// Fails with `ConvergenceWarning` when the truncation tail bound alone
/// reaches `tolerance`.
pub fn s_transform_residual_with(
    md: &ModularData,
    order: usize,
    beta: f64,
    tolerance: f64,
) -> Result<ChannelResidual> {
    check_beta(beta)?;
    let precision = md.precision();
    let bits = precision.bits();
    let chars = characters(md, order)?;
    let (q, qt) = nomes(beta, precision);
    let at_q: Vec<Float> = chars.par_iter().map(|c| c.eval(&q, precision)).collect();
    let at_qt: Vec<Float> = chars.par_iter().map(|c| c.eval(&qt, precision)).collect();
    let n = md.len();
    let s = md.s();
    let tails_q: Vec<f64> = (0..n).map(|r| tail_bound(md, r, order, q.to_f64())).collect();
    let tails_qt: Vec<f64> = (0..n).map(|r| tail_bound(md, r, order, qt.to_f64())).collect();
    let mut numeric = 0.0f64;
    let mut tail = 0.0f64;
    for l in 0..n {
        let mut acc = Complex::with_val(bits, &at_qt[l]);
        let mut t = tails_qt[l];
        for m in 0..n {
            acc -= Complex::with_val(bits, &s[(l, m)] * &at_q[m]);
            t += cabs(&s[(l, m)]).to_f64() * tails_q[m];
        }
        numeric = numeric.max(cabs(&acc).to_f64());
        tail = tail.max(t);
    }
    if tail >= tolerance {
        return Err(Error::ConvergenceWarning {
            tail_bound: tail,
            tolerance,
        });
    }
    Ok(ChannelResidual {
        numeric,
        tail_bound: tail,
        tolerance,
    })
}
