//! Classification of physical modular invariants.
//!
//! A physical invariant is a non-negative integer matrix `Z` with
//! `Z_00 = 1` commuting with `S` and `T`. The search works in the real
//! commutant of `S` and `T`: its basis is computed numerically, rationalized
//! and brought to reduced echelon form, so that every element of the
//! commutant is determined by its entries at a handful of free positions.
//! Those entries are bounded by the Perron bound `Z_λμ <= d_λ d_μ`, which
//! turns the classification into a finite branch-and-prune lattice search.

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use rug::Complex;

use crate::error::{Error, Result};
use crate::intmat::IntMatrix;
use crate::modular_data::ModularData;
use crate::numeric::{cabs, null_space, rationalize, CMatrix};

/// Largest denominator accepted when rationalizing commutant vectors.
pub const MAX_DENOMINATOR: i64 = 1_000_000;

/// Default node budget for lattice searches.
pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000_000;

/// Square matrix of exact rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalMatrix {
    n: usize,
    data: Vec<Rational64>,
}

impl RationalMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Rational64 {
        self.data[i * self.n + j]
    }

    pub fn is_identity(&self) -> bool {
        (0..self.n).all(|i| {
            (0..self.n).all(|j| self.get(i, j) == Rational64::from_integer(i64::from(i == j)))
        })
    }
}

/// Rational basis of the commutant `{M real : MS = SM, MT = TM}`.
#[derive(Clone, Debug)]
pub struct Commutant {
    n: usize,
    /// Matrix positions `(λ, μ)` allowed by `T` (`h_λ - h_μ ∈ ℤ`).
    positions: Vec<(usize, usize)>,
    /// Basis vectors over `positions`, in reduced echelon form.
    vectors: Vec<Vec<Rational64>>,
    /// For each basis vector, the position index where it is 1 and every
    /// other basis vector is 0.
    free: Vec<usize>,
}

impl Commutant {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn positions(&self) -> &[(usize, usize)] {
        &self.positions
    }

    /// Matrix position of each basis vector's free coordinate.
    pub fn free_positions(&self) -> Vec<(usize, usize)> {
        self.free.iter().map(|&f| self.positions[f]).collect()
    }

    pub fn basis(&self) -> Vec<RationalMatrix> {
        self.vectors
            .iter()
            .map(|v| {
                let mut data = vec![Rational64::zero(); self.n * self.n];
                for (&(i, j), &x) in self.positions.iter().zip(v) {
                    data[i * self.n + j] = x;
                }
                RationalMatrix { n: self.n, data }
            })
            .collect()
    }

    /// Coordinates of `m` in the basis, if `m` lies in the span.
    pub fn coordinates(&self, m: &RationalMatrix) -> Option<Vec<Rational64>> {
        let coords: Vec<Rational64> = self
            .free
            .iter()
            .map(|&f| {
                let (i, j) = self.positions[f];
                m.get(i, j)
            })
            .collect();
        let mut rebuilt = vec![Rational64::zero(); self.n * self.n];
        for (c, v) in coords.iter().zip(&self.vectors) {
            for (&(i, j), &x) in self.positions.iter().zip(v) {
                rebuilt[i * self.n + j] += *c * x;
            }
        }
        (rebuilt == m.data).then_some(coords)
    }
}

/// Real commutant of `S` and `T`, rationalized with denominators up to
/// [`MAX_DENOMINATOR`].
pub fn commutant_basis(md: &ModularData) -> Result<Commutant> {
    let n = md.len();
    let precision = md.precision();
    let weights = md.weights();
    // Reverse row-major order: row-0 entries end up as free coordinates,
    // and those carry the tightest Perron bounds.
    let mut positions: Vec<(usize, usize)> = Vec::new();
    for i in (0..n).rev() {
        for j in (0..n).rev() {
            if (weights[i] - weights[j]).is_integer() {
                positions.push((i, j));
            }
        }
    }
    let s = md.s();
    let real = s.is_real();
    let blocks = if real { 1 } else { 2 };
    let cols = positions.len();
    let mut a = CMatrix::zeros(blocks * n * n, cols, precision);
    for i in 0..n {
        for j in 0..n {
            let row = i * n + j;
            for (c, &(l, m)) in positions.iter().enumerate() {
                // (MS - SM)_{ij} picks up S_{mj} from M_{im} and -S_{il} from M_{lj}.
                let mut coef = Complex::new(s.bits());
                if l == i {
                    coef += &s[(m, j)];
                }
                if m == j {
                    coef -= &s[(i, l)];
                }
                a[(row, c)] = precision.complex(coef.real());
                if !real {
                    a[(n * n + row, c)] = precision.complex(coef.imag());
                }
            }
        }
    }
    let kernel = null_space(&a, &precision.tolerance());
    let rat_tol = precision.pow10(-20);
    let mut vectors = Vec::with_capacity(kernel.len());
    let mut free = Vec::with_capacity(kernel.len());
    for v in &kernel {
        let mut rv = Vec::with_capacity(cols);
        for z in v {
            if cabs(&Complex::with_val(z.prec().0, z.imag())) > rat_tol {
                return Err(Error::RationalizationFailure {
                    value: z.imag().to_f64(),
                    max_den: MAX_DENOMINATOR,
                });
            }
            let q = rationalize(z.real(), MAX_DENOMINATOR, &rat_tol).ok_or(
                Error::RationalizationFailure {
                    value: z.real().to_f64(),
                    max_den: MAX_DENOMINATOR,
                },
            )?;
            rv.push(q);
        }
        free.push(0);
        vectors.push(rv);
    }
    // The echelon construction puts each vector's 1 at its free column and
    // zeros at the other free columns; recover those columns exactly.
    for (k, v) in vectors.iter().enumerate() {
        let candidates: Vec<usize> = (0..cols)
            .filter(|&c| {
                v[c] == Rational64::from_integer(1)
                    && vectors
                        .iter()
                        .enumerate()
                        .all(|(o, w)| o == k || w[c].is_zero())
            })
            .collect();
        free[k] = *candidates.first().ok_or(Error::RationalizationFailure {
            value: 1.0,
            max_den: MAX_DENOMINATOR,
        })?;
    }
    Ok(Commutant {
        n,
        positions,
        vectors,
        free,
    })
}

/// Physical modular invariant with its exponents and (for SU(2)) its
/// A/D/E name.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModularInvariant {
    z: IntMatrix,
    exponents: Vec<usize>,
    tag: String,
}

impl ModularInvariant {
    /// Validate `z` against `md`: `Z_00 = 1`, non-negative, and commuting
    /// with `S` and `T` to within the data tolerance.
    pub fn new(md: &ModularData, z: IntMatrix) -> Result<Self> {
        let n = md.len();
        if z.n() != n {
            return Err(Error::InvalidInvariant(format!(
                "Z is {}x{} but the model has {n} sectors",
                z.n(),
                z.n()
            )));
        }
        if z.get(0, 0) != 1 {
            return Err(Error::InvalidInvariant(format!("Z_00 = {}", z.get(0, 0))));
        }
        if let Some((i, j, v)) = z.first_negative() {
            return Err(Error::InvalidInvariant(format!("Z_({i},{j}) = {v} < 0")));
        }
        let (s_res, t_res) = commutation_residuals(md, &z);
        let tol = md.precision().tolerance().to_f64();
        if s_res > tol || t_res > tol {
            return Err(Error::InvalidInvariant(format!(
                "ZS - SZ residual {s_res:e}, ZT - TZ residual {t_res:e}"
            )));
        }
        let exponents = exponents_of(&z);
        let tag = md
            .su2_level()
            .and_then(|k| ade_tag(k, &exponents))
            .unwrap_or_else(|| "untagged".to_string());
        Ok(ModularInvariant { z, exponents, tag })
    }

    pub fn z(&self) -> &IntMatrix {
        &self.z
    }

    /// `Exp(Z)`: sector `λ` repeated `Z_λλ` times, ascending.
    pub fn exponents(&self) -> &[usize] {
        &self.exponents
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn trace(&self) -> usize {
        self.exponents.len()
    }

    /// Largest multiplicity of any exponent.
    pub fn max_multiplicity(&self) -> (usize, usize) {
        (0..self.z.n())
            .map(|l| (l, self.z.get(l, l).max(0) as usize))
            .max_by_key(|&(l, m)| (m, std::cmp::Reverse(l)))
            .unwrap_or((0, 0))
    }
}

fn exponents_of(z: &IntMatrix) -> Vec<usize> {
    (0..z.n())
        .flat_map(|l| std::iter::repeat_n(l, z.get(l, l).max(0) as usize))
        .collect()
}

/// Residuals `max|ZS - SZ|` and `max|ZT - TZ|`.
pub fn commutation_residuals(md: &ModularData, z: &IntMatrix) -> (f64, f64) {
    let n = md.len();
    let precision = md.precision();
    let zc = CMatrix::from_fn(n, n, precision, |i, j| precision.complex(z.get(i, j)));
    let s_res = zc.mul(md.s()).max_abs_diff(&md.s().mul(&zc)).to_f64();
    let mut t_res = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if z.get(i, j) != 0 {
                let d = Complex::with_val(zc.bits(), &md.t()[j] - &md.t()[i]);
                t_res = t_res.max(cabs(&d).to_f64() * z.get(i, j) as f64);
            }
        }
    }
    (s_res, t_res)
}

/// Exponents (shifted to sector labels `e - 1`) of the simply-laced Dynkin
/// diagrams with Coxeter number `k + 2`.
pub fn ade_exponents(k: u32) -> Vec<(String, Vec<usize>)> {
    let h = k as usize + 2;
    let mut out = vec![(format!("A{}", h - 1), (0..h - 1).collect::<Vec<_>>())];
    if h.is_multiple_of(2) && h >= 6 {
        let rank = (h + 2) / 2;
        let mut e: Vec<usize> = (0..rank - 1).map(|i| 2 * i).collect();
        e.push(rank - 2);
        e.sort_unstable();
        out.push((format!("D{rank}"), e));
    }
    let exceptional: [(&str, usize, &[usize]); 3] = [
        ("E6", 12, &[1, 4, 5, 7, 8, 11]),
        ("E7", 18, &[1, 5, 7, 9, 11, 13, 17]),
        ("E8", 30, &[1, 7, 11, 13, 17, 19, 23, 29]),
    ];
    for (name, coxeter, exps) in exceptional {
        if coxeter == h {
            out.push((name.to_string(), exps.iter().map(|e| e - 1).collect()));
        }
    }
    out
}

/// A/D/E name whose exponents equal `exponents`, if any.
pub fn ade_tag(k: u32, exponents: &[usize]) -> Option<String> {
    ade_exponents(k)
        .into_iter()
        .find(|(_, e)| e.as_slice() == exponents)
        .map(|(name, _)| name)
}

#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    pub node_budget: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

/// All physical invariants, sorted lexicographically by flattened `Z`.
pub fn enumerate_physical(md: &ModularData) -> Result<Vec<ModularInvariant>> {
    enumerate_physical_with(md, SearchOptions::default())
}

pub fn enumerate_physical_with(
    md: &ModularData,
    options: SearchOptions,
) -> Result<Vec<ModularInvariant>> {
    let commutant = commutant_basis(md)?;
    let dims: Vec<f64> = md.quantum_dims().iter().map(|d| d.to_f64()).collect();
    let positions = commutant.positions();
    let p = positions.len();

    let mut denom = 1i64;
    for v in &commutant.vectors {
        for x in v {
            denom = denom.lcm(x.denom());
        }
    }
    let basis: Vec<Vec<i64>> = commutant
        .vectors
        .iter()
        .map(|v| {
            v.iter()
                .map(|x| (x * denom).to_integer())
                .collect()
        })
        .collect();

    // Scaled bounds on each entry: lo <= D·Z_e <= hi.
    let vacuum = positions.iter().position(|&pos| pos == (0, 0));
    let mut lo = vec![0i64; p];
    let mut hi: Vec<i64> = positions
        .iter()
        .map(|&(l, m)| ((dims[l] * dims[m] + 1e-9).floor() as i64) * denom)
        .collect();
    if let Some(v) = vacuum {
        lo[v] = denom;
        hi[v] = denom;
    }

    // Coordinate ranges are entry ranges at the free positions.
    let mut order: Vec<usize> = (0..commutant.dim()).collect();
    let range = |i: usize| (lo[commutant.free[i]] / denom, hi[commutant.free[i]] / denom);
    order.sort_by_key(|&i| {
        let (a, b) = range(i);
        (b - a, i)
    });
    let ranges: Vec<(i64, i64)> = order.iter().map(|&i| range(i)).collect();
    let cols: Vec<&Vec<i64>> = order.iter().map(|&i| &basis[i]).collect();

    // rest[j][e]: min/max contribution of coordinates j.. to entry e.
    let d = order.len();
    let mut rest_min = vec![vec![0i64; p]; d + 1];
    let mut rest_max = vec![vec![0i64; p]; d + 1];
    for j in (0..d).rev() {
        let (a, b) = ranges[j];
        for e in 0..p {
            let (x, y) = (cols[j][e] * a, cols[j][e] * b);
            rest_min[j][e] = rest_min[j + 1][e] + x.min(y);
            rest_max[j][e] = rest_max[j + 1][e] + x.max(y);
        }
    }

    let mut search = LatticeSearch {
        cols: &cols,
        ranges: &ranges,
        rest_min: &rest_min,
        rest_max: &rest_max,
        lo: &lo,
        hi: &hi,
        denom,
        nodes: 0,
        budget: options.node_budget,
        found: Vec::new(),
    };
    let mut partial = vec![0i64; p];
    search.descend(0, &mut partial)?;

    let n = md.len();
    let mut out = Vec::with_capacity(search.found.len());
    for scaled in search.found {
        let mut z = IntMatrix::zeros(n);
        for (&(i, j), v) in positions.iter().zip(&scaled) {
            z.set(i, j, v / denom);
        }
        out.push(ModularInvariant::new(md, z)?);
    }
    out.sort_by(|a, b| a.z.data().cmp(b.z.data()));
    Ok(out)
}

struct LatticeSearch<'a> {
    cols: &'a [&'a Vec<i64>],
    ranges: &'a [(i64, i64)],
    rest_min: &'a [Vec<i64>],
    rest_max: &'a [Vec<i64>],
    lo: &'a [i64],
    hi: &'a [i64],
    denom: i64,
    nodes: u64,
    budget: u64,
    found: Vec<Vec<i64>>,
}

impl LatticeSearch<'_> {
    fn descend(&mut self, level: usize, partial: &mut Vec<i64>) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::SearchBudgetExceeded {
                budget: self.budget,
            });
        }
        let p = partial.len();
        for e in 0..p {
            if partial[e] + self.rest_max[level][e] < self.lo[e]
                || partial[e] + self.rest_min[level][e] > self.hi[e]
            {
                return Ok(());
            }
        }
        if level == self.cols.len() {
            if partial.iter().all(|v| v % self.denom == 0) {
                self.found.push(partial.clone());
            }
            return Ok(());
        }
        let (a, b) = self.ranges[level];
        let col = self.cols[level];
        for c in a..=b {
            for e in 0..p {
                partial[e] += c * col[e];
            }
            let r = self.descend(level + 1, partial);
            for e in 0..p {
                partial[e] -= c * col[e];
            }
            r?;
        }
        Ok(())
    }
}

/// `Σ_λμ Z_λμ S_0λ S_0μ`, which is positive for physical invariants.
pub fn vacuum_pairing(md: &ModularData, z: &IntMatrix) -> f64 {
    let n = md.len();
    let s0: Vec<f64> = (0..n).map(|l| md.s()[(0, l)].real().to_f64()).collect();
    let mut acc = 0.0;
    for l in 0..n {
        for m in 0..n {
            acc += z.get(l, m) as f64 * s0[l] * s0[m];
        }
    }
    acc
}

/// Entry bound `floor(d_λ d_μ)` used by the search.
pub fn perron_bound(md: &ModularData, l: usize, m: usize) -> i64 {
    let d = md.quantum_dims();
    let mut b = d[l].clone();
    b *= &d[m];
    (b.to_f64() + 1e-9).floor().to_i64().unwrap_or(i64::MAX)
}
