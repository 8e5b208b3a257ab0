//! Moran's I, the unscaled statistic `Ī = Σ w_ij (x_i − x̄)(x_j − x̄)`, and
//! the pair-set cardinalities `|S_pq|` it decomposes into.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightGraph;
use crate::scheme::{extract_scheme, Sample, ValueScheme};
use crate::sum::{compensated_sum, NeumaierSum};

/// `counts[p][q] = |S_pq|`: directed edges from a `c_p` vertex to a `c_q`
/// vertex, indexed in scheme order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCounts {
    m: usize,
    counts: Vec<u64>,
}

impl PairCounts {
    pub fn zeros(m: usize) -> Self {
        Self { m, counts: vec![0; m * m] }
    }

    pub fn from_rows(rows: Vec<Vec<u64>>) -> Result<Self> {
        let m = rows.len();
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::SchemeSizeMismatch("pair count matrix is not square".into()));
        }
        Ok(Self { m, counts: rows.into_iter().flatten().collect() })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize) -> u64 {
        self.counts[p * self.m + q]
    }

    pub fn row_sum(&self, p: usize) -> u64 {
        self.counts[p * self.m..(p + 1) * self.m].iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.m).all(|p| (0..p).all(|q| self.get(p, q) == self.get(q, p)))
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.counts.chunks(self.m.max(1)).map(|c| c.to_vec()).collect()
    }
}

fn check_aligned(sample_len: usize, g: &WeightGraph) -> Result<()> {
    if sample_len != g.n_vertices() {
        return Err(Error::SchemeSizeMismatch(format!(
            "sample has {sample_len} values, graph has {} vertices",
            g.n_vertices()
        )));
    }
    Ok(())
}

/// Pair counts for an arrangement given as scheme labels.
pub fn count_pairs(labels: &[u32], m: usize, g: &WeightGraph) -> Result<PairCounts> {
    check_aligned(labels.len(), g)?;
    let mut pc = PairCounts::zeros(m);
    for i in 0..g.n_vertices() {
        let row = labels[i] as usize * m;
        for &j in g.neighbors(i) {
            pc.counts[row + labels[j as usize] as usize] += 1;
        }
    }
    Ok(pc)
}

/// `|S_pq|` for every ordered value pair of `s`, in the order of its scheme.
pub fn pair_counts(s: &Sample, g: &WeightGraph) -> Result<PairCounts> {
    let scheme = extract_scheme(s)?;
    pair_counts_with(&scheme, s, g)
}

pub fn pair_counts_with(scheme: &ValueScheme, s: &Sample, g: &WeightGraph) -> Result<PairCounts> {
    check_aligned(s.len(), g)?;
    count_pairs(&scheme.labels(s)?, scheme.m(), g)
}

/// `Ī` by a direct scan over edges, given per-vertex deviations from the mean.
pub fn unscaled_from_deviations(dev: &[f64], g: &WeightGraph) -> Result<f64> {
    check_aligned(dev.len(), g)?;
    let mut acc = NeumaierSum::new();
    for (i, &di) in dev.iter().enumerate() {
        for &j in g.neighbors(i) {
            acc.add(di * dev[j as usize]);
        }
    }
    Ok(acc.value())
}

/// Unscaled Moran's I, `Ī = Σ_i Σ_j w_ij (x_i − x̄)(x_j − x̄)`.
pub fn unscaled_moran(s: &Sample, g: &WeightGraph) -> Result<f64> {
    check_aligned(s.len(), g)?;
    if s.is_empty() {
        return Err(Error::EmptySample);
    }
    let mean = s.mean();
    let dev: Vec<f64> = s.values().iter().map(|x| x - mean).collect();
    unscaled_from_deviations(&dev, g)
}

/// `Ī` as the weighted sum `Σ_{p,q} (c_p − x̄)(c_q − x̄)|S_pq|`.
pub fn unscaled_from_counts(scheme: &ValueScheme, pc: &PairCounts) -> Result<f64> {
    if pc.m() != scheme.m() {
        return Err(Error::SchemeSizeMismatch(format!(
            "pair counts have dimension {}, scheme has {} values",
            pc.m(),
            scheme.m()
        )));
    }
    let a = scheme.deviations();
    let m = scheme.m();
    Ok(compensated_sum(
        (0..m).flat_map(|p| (0..m).map(move |q| (p, q))).map(|(p, q)| a[p] * a[q] * pc.get(p, q) as f64),
    ))
}

/// `I = (N / Σw) · Ī / SS`.
pub fn moran_i(s: &Sample, g: &WeightGraph) -> Result<f64> {
    let scheme = extract_scheme(s)?;
    check_aligned(s.len(), g)?;
    if scheme.sum_sq_dev() <= 0.0 || scheme.m() < 2 {
        return Err(Error::ZeroVariance);
    }
    let ibar = unscaled_moran(s, g)?;
    Ok(scale_unscaled(ibar, &scheme, g))
}

/// Converts `Ī` to `I` for a sample with the given scheme on `g`.
pub fn scale_unscaled(ibar: f64, scheme: &ValueScheme, g: &WeightGraph) -> f64 {
    scheme.n() as f64 / g.total_edges() as f64 * ibar / scheme.sum_sq_dev()
}

/// Evaluates `Ī` through the background-value rearrangement
///
/// `Q + Σ_{p≠r, q≠r} [a_p a_q − 2 a_p a_r + a_r²] |S_pq|`, with
/// `Q = a_r² kN + 2 Σ_{p≠r} [a_p a_r − a_r²] k n_p` and `a_p = c_p − x̄`.
///
/// Only foreground pair counts enter; the background ones are implied by
/// `Σ_q |S_pq| = k n_p`, so the result equals [`unscaled_from_counts`] on a
/// symmetric `k`-regular graph.
pub fn foreground_identity_check(scheme: &ValueScheme, pc: &PairCounts, r: usize, k: f64) -> Result<f64> {
    let m = scheme.m();
    if r >= m {
        return Err(Error::InvalidIndex { index: r, len: m });
    }
    if pc.m() != m {
        return Err(Error::SchemeSizeMismatch(format!("pair counts have dimension {}, scheme has {m}", pc.m())));
    }
    let a = scheme.deviations();
    let ar = a[r];
    let mut acc = NeumaierSum::new();
    acc.add(ar * ar * k * scheme.n() as f64);
    for p in (0..m).filter(|&p| p != r) {
        acc.add(2.0 * (a[p] * ar - ar * ar) * k * scheme.count(p) as f64);
    }
    for p in (0..m).filter(|&p| p != r) {
        for q in (0..m).filter(|&q| q != r) {
            acc.add((a[p] * a[q] - 2.0 * a[p] * ar + ar * ar) * pc.get(p, q) as f64);
        }
    }
    Ok(acc.value())
}

/// Exact mean of `Ī` over all arrangements of `scheme` on a loop-free graph
/// with `total_edges` directed edges: `−|E|·SS / (N(N−1))`, i.e.
/// `−k·SS/(N−1)` on a `k`-regular graph.
pub fn permutation_mean(scheme: &ValueScheme, total_edges: usize) -> f64 {
    let n = scheme.n() as f64;
    -(total_edges as f64) * scheme.sum_sq_dev() / (n * (n - 1.0))
}

/// `|a − b| / max(|a|, |b|, 1)`.
pub fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Contiguity;

    fn checkerboard(rows: usize, cols: usize) -> Sample {
        Sample::new((0..rows * cols).map(|i| ((i / cols + i % cols) % 2) as f64).collect()).unwrap()
    }

    fn torus4() -> WeightGraph {
        WeightGraph::torus(4, 4, Contiguity::Rook).unwrap()
    }

    #[test]
    fn checkerboard_counts_and_statistics() {
        let g = torus4();
        let s = checkerboard(4, 4);
        let pc = pair_counts(&s, &g).unwrap();
        assert_eq!(pc.rows(), vec![vec![0, 32], vec![32, 0]]);
        assert_eq!(unscaled_moran(&s, &g).unwrap(), -16.0);
        let scheme = extract_scheme(&s).unwrap();
        assert_eq!(unscaled_from_counts(&scheme, &pc).unwrap(), -16.0);
        assert_eq!(moran_i(&s, &g).unwrap(), -1.0);
        assert_eq!(foreground_identity_check(&scheme, &pc, 0, 4.0).unwrap(), -16.0);
    }

    #[test]
    fn constant_sample() {
        let g = torus4();
        let s = Sample::new(vec![3.0; 16]).unwrap();
        assert_eq!(pair_counts(&s, &g).unwrap().rows(), vec![vec![64]]);
        assert_eq!(unscaled_moran(&s, &g).unwrap(), 0.0);
        let scheme = extract_scheme(&s).unwrap();
        let pc = pair_counts(&s, &g).unwrap();
        assert_eq!(unscaled_from_counts(&scheme, &pc).unwrap(), 0.0);
        assert_eq!(foreground_identity_check(&scheme, &pc, 0, 4.0).unwrap(), 0.0);
        assert!(matches!(moran_i(&s, &g), Err(Error::ZeroVariance)));
    }

    #[test]
    fn bottom_row_on_3x3_torus() {
        let g = WeightGraph::torus(3, 3, Contiguity::Rook).unwrap();
        let s = Sample::new(vec![0., 0., 0., 0., 0., 0., 1., 1., 1.]).unwrap();
        let pc = pair_counts(&s, &g).unwrap();
        // brute force over all ordered vertex pairs
        let mut brute = [[0u64; 2]; 2];
        for i in 0..9 {
            for j in 0..9 {
                if g.contains(i, j) {
                    brute[s.values()[i] as usize][s.values()[j] as usize] += 1;
                }
            }
        }
        assert_eq!(pc.rows(), vec![brute[0].to_vec(), brute[1].to_vec()]);
        assert_eq!(pc.total(), 36);
        assert_eq!((pc.row_sum(0), pc.row_sum(1)), (24, 12));
        let scheme = extract_scheme(&s).unwrap();
        let direct = unscaled_moran(&s, &g).unwrap();
        assert!(relative_gap(direct, unscaled_from_counts(&scheme, &pc).unwrap()) < 1e-9);
    }

    #[test]
    fn halves_on_torus_give_one_half() {
        // left two columns 0, right two columns 1: every vertex has three
        // like-valued neighbours and one unlike, so Ī = 48/4 − 16/4 = 8.
        let g = torus4();
        let s = Sample::new((0..16).map(|i| if i % 4 < 2 { 0.0 } else { 1.0 }).collect()).unwrap();
        assert_eq!(unscaled_moran(&s, &g).unwrap(), 8.0);
        assert_eq!(moran_i(&s, &g).unwrap(), 0.5);
    }

    #[test]
    fn size_mismatch_and_bad_index() {
        let g = torus4();
        let s = Sample::new(vec![0.0, 1.0]).unwrap();
        assert!(matches!(pair_counts(&s, &g), Err(Error::SchemeSizeMismatch(_))));
        assert!(matches!(unscaled_moran(&s, &g), Err(Error::SchemeSizeMismatch(_))));
        let scheme = ValueScheme::new([(0.0, 1), (1.0, 1)]).unwrap();
        assert!(matches!(
            foreground_identity_check(&scheme, &PairCounts::zeros(2), 2, 4.0),
            Err(Error::InvalidIndex { .. })
        ));
        assert!(unscaled_from_counts(&scheme, &PairCounts::zeros(3)).is_err());
    }

    #[test]
    fn permutation_mean_on_regular_graph() {
        let scheme = ValueScheme::new([(0.0, 6), (1.0, 3)]).unwrap();
        // −k·SS/(N−1) = −4·2/8
        assert_eq!(permutation_mean(&scheme, 36), -1.0);
    }
}
