//! Independent brute-force oracle for physical modular invariants.

use std::collections::BTreeSet;

use nimrep_core::{IntMatrix, ModularData};

/// Every non-negative integer Z with `Z_00 = 1`, entries bounded by
/// `floor(d_λ d_μ)`, commuting with S and T.
///
/// Entries with `T_λ ≠ T_μ` are forced to zero by `ZT = TZ`. The remaining
/// entries are enumerated one at a time directly against the linear
/// equations `(SZ - ZS)_ij = 0`: after each assignment, every equation
/// touching that entry must still be solvable within the box of bounds of
/// its unassigned entries.
pub fn brute_force_invariants(md: &ModularData) -> BTreeSet<IntMatrix> {
    let n = md.len();
    let s: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| md.s()[(i, j)].real().to_f64()).collect()).collect();
    let t: Vec<(f64, f64)> = md.t().iter().map(|z| (z.real().to_f64(), z.imag().to_f64())).collect();
    let d: Vec<f64> = (0..n).map(|j| s[0][j] / s[0][0]).collect();
    let same_t = |i: usize, j: usize| (t[i].0 - t[j].0).abs() < 1e-9 && (t[i].1 - t[j].1).abs() < 1e-9;

    let cells: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| same_t(i, j))
        .collect();
    let bounds: Vec<i64> = cells
        .iter()
        .map(|&(i, j)| if (i, j) == (0, 0) { 1 } else { (d[i] * d[j] + 1e-9).floor() as i64 })
        .collect();

    // Equation (i, j) as sparse (cell, coefficient) terms:
    // Σ_r S_ir Z_rj - Σ_c Z_ic S_cj.
    let mut equations: Vec<Vec<(usize, f64)>> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let terms: Vec<(usize, f64)> = cells
                .iter()
                .enumerate()
                .filter_map(|(k, &(r, c))| {
                    let mut coef = 0.0;
                    if c == j {
                        coef += s[i][r];
                    }
                    if r == i {
                        coef -= s[c][j];
                    }
                    (coef.abs() > 1e-14).then_some((k, coef))
                })
                .collect();
            if !terms.is_empty() {
                equations.push(terms);
            }
        }
    }
    let mut touching: Vec<Vec<usize>> = vec![Vec::new(); cells.len()];
    for (e, terms) in equations.iter().enumerate() {
        for &(k, _) in terms {
            touching[k].push(e);
        }
    }

    struct Walk<'a> {
        n: usize,
        cells: &'a [(usize, usize)],
        bounds: &'a [i64],
        equations: &'a [Vec<(usize, f64)>],
        touching: &'a [Vec<usize>],
        values: Vec<i64>,
        out: BTreeSet<IntMatrix>,
    }
    impl Walk<'_> {
        /// Cells `0..=depth` are assigned.
        fn feasible(&self, e: usize, depth: usize) -> bool {
            let (mut lo, mut hi) = (0.0, 0.0);
            for &(k, coef) in &self.equations[e] {
                if k <= depth {
                    let v = coef * self.values[k] as f64;
                    lo += v;
                    hi += v;
                } else {
                    let v = coef * self.bounds[k] as f64;
                    lo += v.min(0.0);
                    hi += v.max(0.0);
                }
            }
            lo <= 1e-9 && hi >= -1e-9
        }

        fn go(&mut self, depth: usize) {
            if depth == self.cells.len() {
                let n = self.n;
                let mut z = IntMatrix::zeros(n);
                for (&(i, j), &v) in self.cells.iter().zip(&self.values) {
                    z.set(i, j, v);
                }
                self.out.insert(z);
                return;
            }
            let lo = i64::from(self.cells[depth] == (0, 0));
            for v in lo..=self.bounds[depth] {
                self.values[depth] = v;
                if self.touching[depth].iter().all(|&e| self.feasible(e, depth)) {
                    self.go(depth + 1);
                }
            }
            self.values[depth] = 0;
        }
    }
    let mut walk = Walk {
        n,
        cells: &cells,
        bounds: &bounds,
        equations: &equations,
        touching: &touching,
        values: vec![0; cells.len()],
        out: BTreeSet::new(),
    };
    walk.go(0);
    walk.out
}
