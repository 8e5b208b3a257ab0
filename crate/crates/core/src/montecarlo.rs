//! Ground truth for the analytic law: a permutation sampler, an exhaustive
//! enumerator for small instances, and the comparison metrics used by the
//! sweeps (histogram KL divergence, one-sample KS test, standardized
//! differences of mean and standard deviation).

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::AnalyticDist;
use crate::error::{Error, Result};
use crate::graph::WeightGraph;
use crate::moran::{count_pairs, relative_gap, unscaled_from_counts, PairCounts};
use crate::rng;
use crate::scheme::ValueScheme;
use crate::sum::{compensated_sum, NeumaierSum};

/// Bins used for KL divergence.
pub const KL_BINS: usize = 50;
/// Half-width of the KL histogram in analytic standard deviations.
pub const KL_SPAN_SD: f64 = 5.0;
/// Floor for analytic bin masses.
pub const KL_MASS_FLOOR: f64 = 1e-300;
/// Relative tolerance for the pair-count identity checked on every sample.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Equal-width histogram over `[lo, hi]`; values outside are clamped
    /// into the first or last bin.
    pub fn build(samples: &[f64], lo: f64, hi: f64, bins: usize) -> Self {
        let bins = bins.max(1);
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|b| if b == bins { hi } else { lo + b as f64 * width }).collect();
        let mut counts = vec![0u64; bins];
        for &x in samples {
            let b = if width > 0.0 { ((x - lo) / width).floor() } else { 0.0 };
            let b = if b.is_nan() { 0 } else { (b.max(0.0) as usize).min(bins - 1) };
            counts[b] += 1;
        }
        Self { edges, counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Sampled values of `Ī` with their moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDist {
    samples: Vec<f64>,
    pub n: usize,
    pub mean: f64,
    /// Standard deviation with the `n − 1` denominator.
    pub std: f64,
    pub histogram: Histogram,
}

impl EmpiricalDist {
    pub fn from_samples(samples: Vec<f64>) -> Self {
        let n = samples.len();
        let mean = if n == 0 { f64::NAN } else { compensated_sum(samples.iter().copied()) / n as f64 };
        let std = match n {
            0 => f64::NAN,
            1 => 0.0,
            _ => (compensated_sum(samples.iter().map(|x| (x - mean) * (x - mean))) / (n - 1) as f64).sqrt(),
        };
        let (lo, hi) = samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        let histogram = if n == 0 { Histogram { edges: vec![], counts: vec![] } } else { Histogram::build(&samples, lo, hi, KL_BINS) };
        Self { samples, n, mean, std, histogram }
    }

    /// Moments only, for ensembles too large to keep.
    pub fn summary_only(n: usize, mean: f64, std: f64) -> Self {
        Self { samples: Vec::new(), n, mean, std, histogram: Histogram { edges: vec![], counts: vec![] } }
    }

    pub fn samples(&self) -> Option<&[f64]> {
        (self.n == 0 || !self.samples.is_empty()).then_some(self.samples.as_slice())
    }

    /// One `ibar` column with a header line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "ibar")?;
        for x in &self.samples {
            writeln!(w, "{x}")?;
        }
        Ok(())
    }
}

/// Exact permutation law of `Ī` as a finite pmf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactDist {
    /// `(Ī, probability)`, sorted by value.
    pub support: Vec<(f64, f64)>,
    pub n_states: u128,
}

impl ExactDist {
    pub fn mean(&self) -> f64 {
        compensated_sum(self.support.iter().map(|(v, p)| v * p))
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        compensated_sum(self.support.iter().map(|(v, p)| (v - m) * (v - m) * p))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        compensated_sum(self.support.iter().take_while(|(v, _)| *v <= x).map(|(_, p)| *p))
    }

    /// `P(Ī < x)`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        compensated_sum(self.support.iter().take_while(|(v, _)| *v < x).map(|(_, p)| *p))
    }

    /// Probability of the support point closest to `x` within `1e-9` relative,
    /// zero otherwise.
    pub fn probability_of(&self, x: f64) -> f64 {
        self.support.iter().find(|(v, _)| relative_gap(*v, x) <= 1e-9).map_or(0.0, |(_, p)| *p)
    }
}

/// Per-replicate `Ī` plus the summed pair counts over the ensemble.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub ibar: Vec<f64>,
    /// `Σ_samples |S_pq|`, row-major `M×M`.
    pub pair_totals: Vec<u64>,
    pub m: usize,
}

impl Ensemble {
    pub fn mean_pair_count(&self, p: usize, q: usize) -> f64 {
        self.pair_totals[p * self.m + q] as f64 / self.ibar.len() as f64
    }
}

fn check_scheme_graph(scheme: &ValueScheme, g: &WeightGraph) -> Result<()> {
    if scheme.n() != g.n_vertices() {
        return Err(Error::SchemeSizeMismatch(format!(
            "scheme has {} observations, graph has {} vertices",
            scheme.n(),
            g.n_vertices()
        )));
    }
    Ok(())
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Parse(format!("cannot start worker pool: {e}")))
}

/// Draws `n_samples` uniform arrangements of `scheme` on `g`. Replicate `r`
/// shuffles the canonical arrangement with stream `r` of `seed`, so the
/// output does not depend on `workers`. Every replicate checks that the
/// direct edge scan and the pair-count expansion of `Ī` agree.
pub fn sample_ensemble(
    scheme: &ValueScheme,
    g: &WeightGraph,
    n_samples: usize,
    seed: u64,
    workers: usize,
) -> Result<Ensemble> {
    check_scheme_graph(scheme, g)?;
    let m = scheme.m();
    let dev = scheme.deviations();
    let canonical = scheme.sorted_labels();

    let replicate = |r: usize| -> Result<(f64, PairCounts)> {
        use rand::seq::SliceRandom;
        let mut labels = canonical.clone();
        labels.shuffle(&mut rng::replicate_stream(seed, r as u64));
        let mut acc = NeumaierSum::new();
        for i in 0..g.n_vertices() {
            let di = dev[labels[i] as usize];
            for &j in g.neighbors(i) {
                acc.add(di * dev[labels[j as usize] as usize]);
            }
        }
        let direct = acc.value();
        let pc = count_pairs(&labels, m, g)?;
        let from_counts = unscaled_from_counts(scheme, &pc)?;
        if relative_gap(direct, from_counts) > IDENTITY_TOLERANCE {
            return Err(Error::IdentityViolation { direct, from_counts });
        }
        Ok((direct, pc))
    };

    let results: Vec<(f64, PairCounts)> =
        pool(workers)?.install(|| (0..n_samples).into_par_iter().map(replicate).collect::<Result<_>>())?;

    let mut pair_totals = vec![0u64; m * m];
    let mut ibar = Vec::with_capacity(n_samples);
    for (v, pc) in results {
        ibar.push(v);
        for p in 0..m {
            for q in 0..m {
                pair_totals[p * m + q] += pc.get(p, q);
            }
        }
    }
    Ok(Ensemble { ibar, pair_totals, m })
}

/// Empirical permutation distribution of `Ī`.
pub fn sample_distribution(
    scheme: &ValueScheme,
    g: &WeightGraph,
    n_samples: usize,
    seed: u64,
    workers: usize,
) -> Result<EmpiricalDist> {
    Ok(EmpiricalDist::from_samples(sample_ensemble(scheme, g, n_samples, seed, workers)?.ibar))
}

/// Number of distinguishable arrangements `N! / Π n_p!`, or `None` on overflow.
pub fn arrangement_count(scheme: &ValueScheme) -> Option<u128> {
    // build the multinomial as a product of binomials, each exact in u128
    let mut total: u128 = 1;
    let mut placed: u128 = 0;
    for e in scheme.entries() {
        let mut binom: u128 = 1;
        for i in 1..=e.count as u128 {
            binom = binom.checked_mul(placed + i)? / i;
        }
        total = total.checked_mul(binom)?;
        placed += e.count as u128;
    }
    Some(total)
}

/// Next lexicographic permutation in place; false after the last one.
fn next_permutation(xs: &mut [u32]) -> bool {
    if xs.len() < 2 {
        return false;
    }
    let mut i = xs.len() - 1;
    while i > 0 && xs[i - 1] >= xs[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = xs.len() - 1;
    while xs[j] <= xs[i - 1] {
        j -= 1;
    }
    xs.swap(i - 1, j);
    xs[i..].reverse();
    true
}

/// Exact pmf of `Ī` over every distinguishable arrangement of `scheme`.
pub fn enumerate_exact(scheme: &ValueScheme, g: &WeightGraph, max_states: u128) -> Result<ExactDist> {
    check_scheme_graph(scheme, g)?;
    let states = arrangement_count(scheme).unwrap_or(u128::MAX);
    if states > max_states {
        return Err(Error::TooManyArrangements { states, limit: max_states });
    }
    let mut labels = scheme.sorted_labels();
    let mut values = Vec::with_capacity(states as usize);
    loop {
        let pc = count_pairs(&labels, scheme.m(), g)?;
        values.push(unscaled_from_counts(scheme, &pc)?);
        if !next_permutation(&mut labels) {
            break;
        }
    }
    debug_assert_eq!(values.len() as u128, states);
    values.sort_by(f64::total_cmp);

    let mut grouped: Vec<(f64, u64)> = Vec::new();
    for v in values {
        match grouped.last_mut() {
            Some((last, c)) if relative_gap(*last, v) <= 1e-9 => *c += 1,
            _ => grouped.push((v, 1)),
        }
    }
    let support = grouped.into_iter().map(|(v, c)| (v, c as f64 / states as f64)).collect();
    Ok(ExactDist { support, n_states: states })
}

/// `D(empirical ‖ analytic)` over [`KL_BINS`] equal-width bins spanning
/// `μ̃ ± 5σ̃`. Samples outside the span are clamped into the edge bins, and
/// the edge bins carry the corresponding analytic tail mass.
pub fn kl_divergence(e: &EmpiricalDist, d: &AnalyticDist) -> Result<f64> {
    kl_divergence_with(e, d, KL_BINS, KL_SPAN_SD)
}

pub fn kl_divergence_with(e: &EmpiricalDist, d: &AnalyticDist, bins: usize, span_sd: f64) -> Result<f64> {
    let samples = e.samples().ok_or(Error::RawSamplesRequired)?;
    let first = samples.first().copied();
    if first.is_none() || samples.iter().all(|&x| Some(x) == first) {
        return Err(Error::DegenerateDistribution("KL divergence needs at least two distinct values".into()));
    }
    let (lo, hi) = (d.mean - span_sd * d.sd(), d.mean + span_sd * d.sd());
    let hist = Histogram::build(samples, lo, hi, bins);
    let n = samples.len() as f64;
    let mut acc = NeumaierSum::new();
    for (b, &count) in hist.counts.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let upper = if b + 1 == bins { 1.0 } else { d.cdf(hist.edges[b + 1]) };
        let lower = if b == 0 { 0.0 } else { d.cdf(hist.edges[b]) };
        let q = (upper - lower).max(KL_MASS_FLOOR);
        let p = count as f64 / n;
        acc.add(p * (p / q).ln());
    }
    Ok(acc.value())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// `sup_x |F̂(x) − F(x)|` for sorted samples. `cdf_left(x)` is `P(X < x)`;
/// pass `cdf` twice for continuous laws. Ties are handled by comparing both
/// one-sided limits at every distinct sample value.
pub fn ks_statistic<F, G>(sorted: &[f64], cdf: F, cdf_left: G) -> f64
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / n - cdf_left(x)).abs());
        d = d.max((j as f64 / n - cdf(x)).abs());
        i = j;
    }
    d
}

/// Survival function of the Kolmogorov distribution, `P(K > λ)`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // P(K ≤ λ) = √(2π)/λ Σ exp(−(2j−1)²π²/(8λ²)), fast for small λ
        let c = std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let mut acc = 0.0;
        for j in 1.. {
            let odd = (2 * j - 1) as f64;
            let term = (-odd * odd * c).exp();
            acc += term;
            if term < 1e-12 * acc.max(1e-300) || j > 100 {
                break;
            }
        }
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * acc).clamp(0.0, 1.0)
    } else {
        let mut acc = 0.0;
        for j in 1.. {
            let jf = j as f64;
            let term = (-2.0 * jf * jf * lambda * lambda).exp();
            acc += if j % 2 == 1 { term } else { -term };
            if term < 1e-12 || j > 100 {
                break;
            }
        }
        (2.0 * acc).clamp(0.0, 1.0)
    }
}

/// One-sample KS test of the sampled `Ī` against the analytic normal law,
/// with the asymptotic Kolmogorov p-value at `λ = √n·D`.
pub fn ks_test(e: &EmpiricalDist, d: &AnalyticDist) -> Result<KsResult> {
    let samples = e.samples().ok_or(Error::RawSamplesRequired)?;
    if samples.is_empty() {
        return Err(Error::RawSamplesRequired);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let statistic = ks_statistic(&sorted, |x| d.cdf(x), |x| d.cdf(x));
    let p_value = kolmogorov_survival((sorted.len() as f64).sqrt() * statistic);
    Ok(KsResult { statistic, p_value })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardizedDiffs {
    /// `|μ̃ − μ̂| / σ̃`
    pub mean_diff: f64,
    /// `|σ̃ − σ̂| / σ̂`
    pub std_diff: f64,
}

pub fn standardized_diffs(d: &AnalyticDist, e: &EmpiricalDist) -> Result<StandardizedDiffs> {
    standardized_diffs_from(d.mean, d.sd(), e.mean, e.std)
}

pub fn standardized_diffs_from(mu_t: f64, sigma_t: f64, mu_e: f64, sigma_e: f64) -> Result<StandardizedDiffs> {
    if !(sigma_t > 0.0 && sigma_e > 0.0) {
        return Err(Error::DegenerateDistribution(format!(
            "standard deviations must be positive (analytic {sigma_t}, empirical {sigma_e})"
        )));
    }
    Ok(StandardizedDiffs {
        mean_diff: (mu_t - mu_e).abs() / sigma_t,
        std_diff: (sigma_t - sigma_e).abs() / sigma_e,
    })
}

/// JSON summary of a sampled ensemble against an analytic law.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub histogram: Histogram,
    pub kl: Option<f64>,
    pub ks: Option<KsResult>,
}

impl EnsembleSummary {
    pub fn new(e: &EmpiricalDist, d: Option<&AnalyticDist>) -> Self {
        let (kl, ks) = match d {
            Some(d) => (kl_divergence(e, d).ok(), ks_test(e, d).ok()),
            None => (None, None),
        };
        Self { n: e.n, mean: e.mean, std: e.std, histogram: e.histogram.clone(), kl, ks }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Contiguity;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    fn normal_draws(mean: f64, sd: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let dist = Normal::new(mean, sd).unwrap();
        (0..n).map(|_| dist.sample(&mut rng)).collect()
    }

    #[test]
    fn histogram_clamps_and_conserves() {
        let h = Histogram::build(&[-5.0, 0.0, 0.5, 0.99, 1.0, 7.0], 0.0, 1.0, 2);
        assert_eq!(h.counts, vec![2, 4]);
        assert_eq!(h.total(), 6);
        assert_eq!(h.edges, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn empirical_moments() {
        let e = EmpiricalDist::from_samples(vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.mean, 2.5);
        assert!((e.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(e.histogram.total(), 4);
        let empty = EmpiricalDist::from_samples(vec![]);
        assert_eq!(empty.n, 0);
        assert!(kl_divergence(&EmpiricalDist::summary_only(10, 0.0, 1.0), &AnalyticDist::from_moments(0.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn multinomial_counts() {
        assert_eq!(arrangement_count(&ValueScheme::new([(0.0, 6), (1.0, 3)]).unwrap()), Some(84));
        assert_eq!(arrangement_count(&ValueScheme::new([(0.0, 2), (1.0, 1), (2.0, 1)]).unwrap()), Some(12));
        assert_eq!(arrangement_count(&ValueScheme::new([(0.0, 800), (1.0, 800)]).unwrap()), None);
    }

    #[test]
    fn enumerates_two_by_two_bounded() {
        // ones on a shared edge leave Ī = 0; ones on a diagonal give −2
        let g = WeightGraph::bounded(2, 2, Contiguity::Rook).unwrap();
        let s = ValueScheme::new([(0.0, 2), (1.0, 2)]).unwrap();
        let exact = enumerate_exact(&s, &g, 100).unwrap();
        assert_eq!(exact.n_states, 6);
        assert_eq!(exact.support, vec![(-2.0, 1.0 / 3.0), (0.0, 2.0 / 3.0)]);
    }

    #[test]
    fn enumeration_limit_and_single_state() {
        let g = WeightGraph::torus(3, 3, Contiguity::Rook).unwrap();
        let s = ValueScheme::new([(0.0, 6), (1.0, 3)]).unwrap();
        assert!(matches!(enumerate_exact(&s, &g, 83), Err(Error::TooManyArrangements { states: 84, .. })));
        let single = enumerate_exact(&ValueScheme::new([(5.0, 9)]).unwrap(), &g, 1).unwrap();
        assert_eq!(single.support, vec![(0.0, 1.0)]);
    }

    #[test]
    fn ks_of_exact_pmf_against_itself_is_zero() {
        let g = WeightGraph::torus(3, 3, Contiguity::Rook).unwrap();
        let s = ValueScheme::new([(0.0, 6), (1.0, 3)]).unwrap();
        let exact = enumerate_exact(&s, &g, 1000).unwrap();
        let mut expanded: Vec<f64> = exact
            .support
            .iter()
            .flat_map(|&(v, p)| std::iter::repeat_n(v, (p * 84.0).round() as usize))
            .collect();
        expanded.sort_by(f64::total_cmp);
        assert_eq!(expanded.len(), 84);
        let d = ks_statistic(&expanded, |x| exact.cdf(x), |x| exact.cdf_left(x));
        assert!(d < 1e-12, "{d}");
    }

    #[test]
    fn kolmogorov_tail_values() {
        // reference values of the Kolmogorov survival function
        assert!((kolmogorov_survival(1.358_098_8) - 0.05).abs() < 1e-6);
        assert!((kolmogorov_survival(1.0) - 0.269_999_671).abs() < 1e-6);
        assert!((kolmogorov_survival(0.5) - 0.963_945_243).abs() < 1e-6);
        assert_eq!(kolmogorov_survival(0.0), 1.0);
        // both series agree where they meet
        let a = kolmogorov_survival(1.18 - 1e-12);
        let b = kolmogorov_survival(1.18);
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn self_consistency_of_metrics() {
        let d = AnalyticDist::from_moments(-1.18, 5.376).unwrap();
        let e = EmpiricalDist::from_samples(normal_draws(d.mean, d.sd(), 10_000, 11));
        let kl = kl_divergence(&e, &d).unwrap();
        assert!(kl < 5e-3, "{kl}");
        let ks = ks_test(&e, &d).unwrap();
        assert!(ks.p_value > 0.05, "{ks:?}");

        let shifted = EmpiricalDist::from_samples(e.samples().unwrap().iter().map(|x| x + 10.0 * d.sd()).collect());
        assert!(ks_test(&shifted, &d).unwrap().p_value < 1e-6);
    }

    #[test]
    fn kl_is_large_for_far_tail_mass() {
        let d = AnalyticDist::from_moments(0.0, 1.0).unwrap();
        let e = EmpiricalDist::from_samples(vec![4.9, 4.95, 4.9, 4.95]);
        assert!(kl_divergence(&e, &d).unwrap() > 10.0);
        let constant = EmpiricalDist::from_samples(vec![1.0; 5]);
        assert!(matches!(kl_divergence(&constant, &d), Err(Error::DegenerateDistribution(_))));
    }

    #[test]
    fn kl_does_not_grow_with_more_samples() {
        let d = AnalyticDist::from_moments(0.0, 1.0).unwrap();
        let mean_kl = |n: usize| -> f64 {
            (0..10)
                .map(|s| kl_divergence(&EmpiricalDist::from_samples(normal_draws(0.0, 1.0, n, 100 + s)), &d).unwrap())
                .sum::<f64>()
                / 10.0
        };
        assert!(mean_kl(20_000) <= mean_kl(10_000));
    }

    #[test]
    fn ks_invariant_under_monotone_rescaling() {
        let d = AnalyticDist::from_moments(2.0, 9.0).unwrap();
        let raw = normal_draws(2.5, 3.2, 2_000, 5);
        let e = EmpiricalDist::from_samples(raw.clone());
        let (a, b) = (7.5, -40.0);
        let moved = EmpiricalDist::from_samples(raw.iter().map(|x| a * x + b).collect());
        let d_moved = AnalyticDist::from_moments(a * d.mean + b, a * a * d.variance).unwrap();
        let s0 = ks_test(&e, &d).unwrap().statistic;
        let s1 = ks_test(&moved, &d_moved).unwrap().statistic;
        assert!((s0 - s1).abs() < 1e-12);
    }

    #[test]
    fn standardized_differences_from_published_moments() {
        let a = standardized_diffs_from(-5.21, 135.11, -4.51, 132.84).unwrap();
        assert!((a.mean_diff - 0.00518).abs() < 1e-5);
        assert!((a.std_diff - 0.01709).abs() < 1e-5);
        let c = standardized_diffs_from(-4.39, 161.66, -3.94, 139.85).unwrap();
        assert!((c.mean_diff - 0.00278).abs() < 1e-5);
        assert!((c.std_diff - 0.15595).abs() < 1e-5);
        let same = standardized_diffs_from(1.0, 2.0, 1.0, 2.0).unwrap();
        assert_eq!((same.mean_diff, same.std_diff), (0.0, 0.0));
        assert!(standardized_diffs_from(0.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn sampler_is_worker_independent() {
        let g = WeightGraph::bounded(8, 8, Contiguity::Queen).unwrap();
        let s = ValueScheme::new([(0.0, 40), (1.0, 14), (3.0, 10)]).unwrap();
        let a = sample_distribution(&s, &g, 500, 77, 1).unwrap();
        let b = sample_distribution(&s, &g, 500, 77, 8).unwrap();
        assert_eq!(a.samples(), b.samples());
        let c = sample_distribution(&s, &g, 500, 78, 8).unwrap();
        assert_ne!(a.samples(), c.samples());
    }

    #[test]
    fn constant_scheme_samples_are_zero() {
        let g = WeightGraph::torus(3, 3, Contiguity::Rook).unwrap();
        let e = sample_distribution(&ValueScheme::new([(2.0, 9)]).unwrap(), &g, 50, 1, 2).unwrap();
        assert!(e.samples().unwrap().iter().all(|&x| x == 0.0));
        assert_eq!(e.std, 0.0);
    }

    #[test]
    fn sampler_size_mismatch() {
        let g = WeightGraph::torus(3, 3, Contiguity::Rook).unwrap();
        let s = ValueScheme::new([(0.0, 5), (1.0, 5)]).unwrap();
        assert!(matches!(sample_distribution(&s, &g, 10, 1, 1), Err(Error::SchemeSizeMismatch(_))));
    }
}
