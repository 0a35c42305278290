//! Small undirected multigraphs (symmetric non-negative integer matrices,
//! loops allowed): canonical forms, Dynkin diagrams and bounded-radius
//! enumeration.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::intmat::IntMatrix;

/// Canonical relabeling of `g`.
///
/// The key is the upper triangle read column by column
/// (`g[0][0], g[0][1], g[1][1], g[0][2], ...`) and the canonical form is
/// the relabeling with the lexicographically largest key. Returns the
/// canonical matrix and the permutation with `canon = g.permuted(perm)`.
pub fn canonical_form(g: &IntMatrix) -> (IntMatrix, Vec<usize>) {
    let n = g.n();
    let mut search = Canon {
        g,
        best_key: Vec::new(),
        best_perm: (0..n).collect(),
    };
    let mut placed = Vec::with_capacity(n);
    let mut key = Vec::with_capacity(n * (n + 1) / 2);
    search.descend(&mut placed, &mut key);
    let perm = search.best_perm;
    (g.permuted(&perm), perm)
}

struct Canon<'a> {
    g: &'a IntMatrix,
    best_key: Vec<i64>,
    best_perm: Vec<usize>,
}

impl Canon<'_> {
    fn column(&self, placed: &[usize], v: usize) -> Vec<i64> {
        placed
            .iter()
            .map(|&u| self.g.get(u, v))
            .chain(std::iter::once(self.g.get(v, v)))
            .collect()
    }

    fn descend(&mut self, placed: &mut Vec<usize>, key: &mut Vec<i64>) {
        let n = self.g.n();
        if placed.len() == n {
            if *key > self.best_key {
                self.best_key = key.clone();
                self.best_perm = placed.clone();
            }
            return;
        }
        let mut best_col: Option<Vec<i64>> = None;
        let mut ties = Vec::new();
        for v in (0..n).filter(|v| !placed.contains(v)) {
            let col = self.column(placed, v);
            match &best_col {
                Some(b) if col < *b => {}
                Some(b) if col == *b => ties.push(v),
                _ => {
                    best_col = Some(col);
                    ties = vec![v];
                }
            }
        }
        let col = best_col.expect("an unplaced vertex exists");
        let start = key.len();
        key.extend_from_slice(&col);
        // Compare against the incumbent on the shared prefix.
        if !self.best_key.is_empty() && key[..] < self.best_key[..key.len()] {
            key.truncate(start);
            return;
        }
        for v in ties {
            placed.push(v);
            self.descend(placed, key);
            placed.pop();
        }
        key.truncate(start);
    }
}

pub fn path_graph(n: usize) -> IntMatrix {
    IntMatrix::from_fn(n, |i, j| i64::from(i.abs_diff(j) == 1))
}

/// `A_n`: the path on `n` vertices.
pub fn dynkin_a(n: usize) -> IntMatrix {
    path_graph(n)
}

/// `D_n` (`n >= 4`): a path `0 - 1 - ... - n-3` with two leaves on vertex `n-3`.
pub fn dynkin_d(n: usize) -> IntMatrix {
    assert!(n >= 4, "D_n needs n >= 4");
    let mut g = IntMatrix::from_fn(n, |i, j| i64::from(i.abs_diff(j) == 1 && i.max(j) < n - 1));
    g.set(n - 3, n - 1, 1);
    g.set(n - 1, n - 3, 1);
    g
}

/// `E_n` (`n = 6, 7, 8`): a path on `n - 1` vertices with one extra vertex
/// attached to the third.
pub fn dynkin_e(n: usize) -> IntMatrix {
    assert!((6..=8).contains(&n), "E_n exists for n = 6, 7, 8");
    let mut g = IntMatrix::zeros(n);
    for i in 0..n - 2 {
        g.set(i, i + 1, 1);
        g.set(i + 1, i, 1);
    }
    g.set(2, n - 1, 1);
    g.set(n - 1, 2, 1);
    g
}

/// Tadpole `T_n`: the path on `n` vertices with a loop at one end.
pub fn tadpole(n: usize) -> IntMatrix {
    let mut g = path_graph(n);
    g.set(n - 1, n - 1, 1);
    g
}

/// Name of `g` among `A_n`, `D_n`, `E_6..8` and tadpoles `T_n`.
pub fn graph_name(g: &IntMatrix) -> Option<String> {
    let n = g.n();
    if n == 0 {
        return None;
    }
    let canon = canonical_form(g).0;
    let mut candidates = vec![(format!("A{n}"), dynkin_a(n)), (format!("T{n}"), tadpole(n))];
    if n >= 4 {
        candidates.push((format!("D{n}"), dynkin_d(n)));
    }
    if (6..=8).contains(&n) {
        candidates.push((format!("E{n}"), dynkin_e(n)));
    }
    candidates
        .into_iter()
        .find(|(_, h)| canonical_form(h).0 == canon)
        .map(|(name, _)| name)
}

/// Graph for a Dynkin or tadpole name such as `"E6"`, `"D4"`, `"A5"`, `"T3"`.
pub fn graph_by_name(name: &str) -> Option<IntMatrix> {
    let (kind, size) = name.split_at(1);
    let n: usize = size.parse().ok()?;
    match kind {
        "A" if n >= 1 => Some(dynkin_a(n)),
        "D" if n >= 4 => Some(dynkin_d(n)),
        "E" if (6..=8).contains(&n) => Some(dynkin_e(n)),
        "T" if n >= 1 => Some(tadpole(n)),
        _ => None,
    }
}

/// Canonical forms of all connected graphs on `m` vertices with spectral
/// radius at most `radius` (plus `1e-9` slack).
///
/// Graphs are grown one vertex at a time. Every connected graph has a
/// vertex order whose prefixes are connected, and the spectral radius of
/// an induced subgraph never exceeds that of the graph, so pruning each
/// level by radius and deduplicating by canonical form loses nothing.
/// `budget` bounds the number of candidate extensions examined.
pub fn connected_graphs(m: usize, radius: f64, budget: u64) -> Result<Vec<IntMatrix>> {
    if m == 0 {
        return Ok(Vec::new());
    }
    let slack = 1e-9;
    let max_entry = (radius + slack).floor() as i64;
    let max_row_norm = (radius * radius + slack).floor() as i64;
    let mut level: BTreeSet<IntMatrix> = (0..=max_entry)
        .filter(|&l| l * l <= max_row_norm)
        .map(|l| IntMatrix::from_fn(1, |_, _| l))
        .filter(|g| g.spectral_radius() <= radius + slack)
        .map(|g| canonical_form(&g).0)
        .collect();
    let mut examined: u64 = level.len() as u64;
    for size in 1..m {
        let rows = extension_rows(size, max_entry, max_row_norm);
        let parents: Vec<IntMatrix> = level.into_iter().collect();
        examined += (parents.len() * rows.len()) as u64;
        if examined > budget {
            return Err(Error::SearchBudgetExceeded { budget });
        }
        let children: Vec<Vec<IntMatrix>> = parents
            .par_iter()
            .map(|g| {
                let norms: Vec<i64> = (0..size)
                    .map(|i| (0..size).map(|j| g.get(i, j).pow(2)).sum())
                    .collect();
                rows.iter()
                    .filter(|row| {
                        row[..size].iter().any(|&x| x > 0)
                            && (0..size).all(|i| norms[i] + row[i] * row[i] <= max_row_norm)
                    })
                    .map(|row| extend(g, row))
                    .filter(|h| h.spectral_radius() <= radius + slack)
                    .map(|h| canonical_form(&h).0)
                    .collect()
            })
            .collect();
        level = children.into_iter().flatten().collect();
    }
    Ok(level.into_iter().collect())
}

/// Rows `(adjacency to the `size` existing vertices, loop)` whose squared
/// norm is at most `max_norm`.
fn extension_rows(size: usize, max_entry: i64, max_norm: i64) -> Vec<Vec<i64>> {
    fn rec(
        pos: usize,
        row: &mut Vec<i64>,
        norm: i64,
        max_entry: i64,
        max_norm: i64,
        out: &mut Vec<Vec<i64>>,
    ) {
        if pos == row.len() {
            out.push(row.clone());
            return;
        }
        for v in 0..=max_entry {
            // The loop contributes v² to the diagonal of G², like an edge.
            if norm + v * v > max_norm {
                break;
            }
            row[pos] = v;
            rec(pos + 1, row, norm + v * v, max_entry, max_norm, out);
        }
        row[pos] = 0;
    }
    let mut out = Vec::new();
    rec(0, &mut vec![0; size + 1], 0, max_entry, max_norm, &mut out);
    out
}

fn extend(g: &IntMatrix, row: &[i64]) -> IntMatrix {
    let n = g.n();
    IntMatrix::from_fn(n + 1, |i, j| match (i == n, j == n) {
        (false, false) => g.get(i, j),
        (true, true) => row[n],
        (true, false) => row[j],
        (false, true) => row[i],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shuffle(g: &IntMatrix, seed: u64) -> IntMatrix {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut perm: Vec<usize> = (0..g.n()).collect();
        perm.shuffle(&mut rand::rngs::StdRng::seed_from_u64(seed));
        g.permuted(&perm)
    }

    #[test]
    fn canonical_form_is_relabeling_invariant() {
        for g in [dynkin_e(7), dynkin_d(6), tadpole(5), dynkin_a(9)] {
            let c = canonical_form(&g).0;
            for seed in 0..5 {
                assert_eq!(canonical_form(&shuffle(&g, seed)).0, c);
            }
        }
    }

    #[test]
    fn canonical_perm_reproduces_form() {
        let g = shuffle(&dynkin_e(8), 11);
        let (c, perm) = canonical_form(&g);
        assert_eq!(g.permuted(&perm), c);
    }

    #[test]
    fn names() {
        assert_eq!(graph_name(&shuffle(&dynkin_e(6), 3)).as_deref(), Some("E6"));
        assert_eq!(graph_name(&dynkin_d(4)).as_deref(), Some("D4"));
        assert_eq!(graph_name(&tadpole(2)).as_deref(), Some("T2"));
        assert_eq!(graph_by_name("E7"), Some(dynkin_e(7)));
        assert_eq!(graph_by_name("D3"), None);
    }

    #[test]
    fn radius_below_two_graphs_of_size_six() {
        // Connected graphs with radius < 2 on six vertices: A6, D6, E6, T6.
        let graphs = connected_graphs(6, 2.0 - 1e-6, 1_000_000).unwrap();
        let mut names: Vec<String> = graphs.iter().filter_map(graph_name).collect();
        names.sort();
        assert_eq!(names, vec!["A6", "D6", "E6", "T6"]);
    }

    #[test]
    fn budget_exceeded() {
        assert!(matches!(
            connected_graphs(6, 1.99, 5),
            Err(Error::SearchBudgetExceeded { budget: 5 })
        ));
    }
}
