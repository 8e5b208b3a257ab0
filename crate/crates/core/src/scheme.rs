//! Observed samples, value schemes `T_M = {(c_p, n_p)}` and fixed-width
//! bucketization.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::sum::compensated_sum;

/// One real value per vertex, index-aligned with a [`WeightGraph`](crate::WeightGraph).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Sample(Vec<f64>);

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidValue(format!("non-finite value {v} at index {i}")));
        }
        Ok(Sample(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(self.0.iter().copied()) / self.0.len() as f64
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for Sample {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Sample::new(v)
    }
}

impl From<Sample> for Vec<f64> {
    fn from(s: Sample) -> Self {
        s.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeEntry {
    pub value: f64,
    pub count: usize,
}

/// Distinct values and their multiplicities, sorted by value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, usize)>", into = "Vec<(f64, usize)>")]
pub struct ValueScheme {
    entries: Vec<SchemeEntry>,
    n: usize,
    mean: f64,
    sum_sq_dev: f64,
    background: usize,
}

impl ValueScheme {
    /// Builds a scheme from `(value, count)` pairs in any order. Values must be
    /// finite and distinct, counts positive.
    pub fn new<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, usize)>,
    {
        let mut entries: Vec<SchemeEntry> =
            pairs.into_iter().map(|(value, count)| SchemeEntry { value, count }).collect();
        if entries.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(e) = entries.iter().find(|e| !e.value.is_finite()) {
            return Err(Error::InvalidValue(format!("non-finite scheme value {}", e.value)));
        }
        if let Some(e) = entries.iter().find(|e| e.count == 0) {
            return Err(Error::InvalidValue(format!("value {} has zero count", e.value)));
        }
        entries.sort_by(|a, b| a.value.total_cmp(&b.value));
        if let Some(w) = entries.windows(2).find(|w| w[0].value == w[1].value) {
            return Err(Error::InvalidValue(format!("duplicate scheme value {}", w[0].value)));
        }

        let n: usize = entries.iter().map(|e| e.count).sum();
        let mean = compensated_sum(entries.iter().map(|e| e.value * e.count as f64)) / n as f64;
        let sum_sq_dev = compensated_sum(entries.iter().map(|e| {
            let d = e.value - mean;
            d * d * e.count as f64
        }));
        // max_by_key keeps the last maximum; scan by hand so ties go to the smaller value
        let mut background = 0;
        for (p, e) in entries.iter().enumerate() {
            if e.count > entries[background].count {
                background = p;
            }
        }
        Ok(Self { entries, n, mean, sum_sq_dev, background })
    }

    pub fn entries(&self) -> &[SchemeEntry] {
        &self.entries
    }

    /// Number of distinct values `M`.
    pub fn m(&self) -> usize {
        self.entries.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `SS = Σ n_p (c_p − x̄)²`.
    pub fn sum_sq_dev(&self) -> f64 {
        self.sum_sq_dev
    }

    pub fn value(&self, p: usize) -> f64 {
        self.entries[p].value
    }

    pub fn count(&self, p: usize) -> usize {
        self.entries[p].count
    }

    /// `c_p − x̄` for every value, in scheme order.
    pub fn deviations(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value - self.mean).collect()
    }

    /// Index `r_max` of the most frequent value (ties go to the smaller value).
    pub fn background_index(&self) -> usize {
        self.background
    }

    /// `b = n_{r_max} / N`.
    pub fn background_proportion(&self) -> f64 {
        self.entries[self.background].count as f64 / self.n as f64
    }

    pub fn index_of(&self, value: f64) -> Option<usize> {
        self.entries.binary_search_by(|e| e.value.total_cmp(&value)).ok()
    }

    /// Maps each sample value to its scheme index.
    pub fn labels(&self, sample: &Sample) -> Result<Vec<u32>> {
        sample
            .values()
            .iter()
            .map(|&v| {
                self.index_of(v)
                    .map(|p| p as u32)
                    .ok_or_else(|| Error::SchemeSizeMismatch(format!("value {v} is not part of the scheme")))
            })
            .collect()
    }

    /// Canonical arrangement: labels in scheme order, each repeated `n_p` times.
    pub fn sorted_labels(&self) -> Vec<u32> {
        self.entries
            .iter()
            .enumerate()
            .flat_map(|(p, e)| std::iter::repeat_n(p as u32, e.count))
            .collect()
    }

    /// Uniformly random arrangement of the scheme's labels.
    pub fn shuffled_labels<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u32> {
        let mut labels = self.sorted_labels();
        labels.shuffle(rng);
        labels
    }

    pub fn to_pairs(&self) -> Vec<(f64, usize)> {
        self.entries.iter().map(|e| (e.value, e.count)).collect()
    }
}

impl TryFrom<Vec<(f64, usize)>> for ValueScheme {
    type Error = Error;

    fn try_from(v: Vec<(f64, usize)>) -> Result<Self> {
        ValueScheme::new(v)
    }
}

impl From<ValueScheme> for Vec<(f64, usize)> {
    fn from(s: ValueScheme) -> Self {
        s.to_pairs()
    }
}

/// Distinct values of `sample` with their multiplicities.
///
/// Logs a warning when the number of distinct values exceeds a tenth of the
/// sample size: the analytic law assumes a small number of discrete values.
pub fn extract_scheme(sample: &Sample) -> Result<ValueScheme> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut sorted = sample.values().to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut pairs: Vec<(f64, usize)> = Vec::new();
    for v in sorted {
        match pairs.last_mut() {
            Some((last, count)) if last.total_cmp(&v) == Ordering::Equal => *count += 1,
            _ => pairs.push((v, 1)),
        }
    }
    if pairs.len() * 10 > sample.len() {
        log::warn!(
            "{} distinct values in {} observations; bucketize before using the analytic law",
            pairs.len(),
            sample.len()
        );
    }
    ValueScheme::new(pairs)
}

/// Fixed-width binning with 1-based labels.
///
/// A value `v` gets label `1 + ⌊(v − origin)/width⌋`. Labels are clamped
/// below at 1 and, when a domain maximum is given, above at
/// `⌈(domain_max − origin)/width⌉`, so the last bucket absorbs the top of
/// the domain (width 20 over 0–250: 0–19 → 1, …, 240–250 → 13).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bucketizer {
    pub width: f64,
    pub origin: f64,
    pub domain_max: Option<f64>,
}

impl Bucketizer {
    pub fn new(width: f64, origin: f64, domain_max: Option<f64>) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidValue(format!("bin width must be positive, got {width}")));
        }
        if !origin.is_finite() || domain_max.is_some_and(|m| !m.is_finite()) {
            return Err(Error::InvalidValue("origin and domain maximum must be finite".into()));
        }
        Ok(Self { width, origin, domain_max })
    }

    pub fn last_label(&self) -> Option<u32> {
        self.domain_max.map(|m| ((m - self.origin) / self.width).ceil().max(1.0) as u32)
    }

    pub fn label(&self, v: f64) -> Result<u32> {
        if !v.is_finite() {
            return Err(Error::InvalidValue(format!("cannot bucketize {v}")));
        }
        let raw = 1.0 + ((v - self.origin) / self.width).floor();
        let mut label = raw.max(1.0);
        if let Some(last) = self.last_label() {
            label = label.min(last as f64);
        }
        Ok(label as u32)
    }

    pub fn apply(&self, values: &[f64]) -> Result<Sample> {
        let labels = values.iter().map(|&v| self.label(v).map(f64::from)).collect::<Result<Vec<_>>>()?;
        Sample::new(labels)
    }
}

/// Convenience wrapper around [`Bucketizer`].
pub fn bucketize(values: &[f64], bin_width: f64, origin: f64, domain_max: Option<f64>) -> Result<Sample> {
    Bucketizer::new(bin_width, origin, domain_max)?.apply(values)
}

/// Uniformly random spatial arrangement of the scheme on `n_vertices` cells.
pub fn random_arrangement(scheme: &ValueScheme, n_vertices: usize, seed: u64) -> Result<Sample> {
    if scheme.n() != n_vertices {
        return Err(Error::SchemeSizeMismatch(format!(
            "scheme has {} observations, graph has {n_vertices} vertices",
            scheme.n()
        )));
    }
    let mut rng = rng::seeded(seed);
    let labels = scheme.shuffled_labels(&mut rng);
    Sample::new(labels.into_iter().map(|p| scheme.value(p as usize)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashMap;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn extract_small_schemes() {
        let s = extract_scheme(&Sample::new(vec![0.0, 0.0, 1.0]).unwrap()).unwrap();
        assert_eq!(s.to_pairs(), vec![(0.0, 2), (1.0, 1)]);
        assert!(close(s.mean(), 1.0 / 3.0));
        assert!(close(s.sum_sq_dev(), 2.0 / 3.0));

        let s = extract_scheme(&Sample::new(vec![5.0; 4]).unwrap()).unwrap();
        assert_eq!(s.to_pairs(), vec![(5.0, 4)]);
        assert_eq!(s.sum_sq_dev(), 0.0);

        let s = extract_scheme(&Sample::new(vec![2.0, 0.0, 1.0, 0.0]).unwrap()).unwrap();
        assert_eq!(s.to_pairs(), vec![(0.0, 2), (1.0, 1), (2.0, 1)]);
        assert!(close(s.mean(), 0.75));
        assert!(close(s.sum_sq_dev(), 2.75));
    }

    #[test]
    fn empty_and_invalid_input() {
        assert!(matches!(extract_scheme(&Sample::new(vec![]).unwrap()), Err(Error::EmptySample)));
        assert!(Sample::new(vec![1.0, f64::NAN]).is_err());
        assert!(ValueScheme::new([(1.0, 2), (1.0, 3)]).is_err());
        assert!(ValueScheme::new([(1.0, 0)]).is_err());
    }

    #[test]
    fn background_ties_go_to_smaller_value() {
        let s = ValueScheme::new([(3.0, 5), (1.0, 5), (2.0, 1)]).unwrap();
        assert_eq!(s.background_index(), 0);
        assert_eq!(s.value(s.background_index()), 1.0);
        assert!(close(s.background_proportion(), 5.0 / 11.0));
    }

    #[test]
    fn bucket_labels() {
        let b = Bucketizer::new(20.0, 0.0, Some(250.0)).unwrap();
        assert_eq!(b.label(0.0).unwrap(), 1);
        assert_eq!(b.label(19.0).unwrap(), 1);
        assert_eq!(b.label(20.0).unwrap(), 2);
        assert_eq!(b.label(239.9).unwrap(), 12);
        assert_eq!(b.label(240.0).unwrap(), 13);
        assert_eq!(b.label(250.0).unwrap(), 13);
        assert_eq!(b.last_label(), Some(13));
        assert!(b.label(f64::INFINITY).is_err());
        assert!(Bucketizer::new(0.0, 0.0, None).is_err());

        // last bucket absorbs an exact multiple at the top of the domain
        let b = Bucketizer::new(20.0, 0.0, Some(260.0)).unwrap();
        assert_eq!(b.label(260.0).unwrap(), 13);
        assert_eq!(bucketize(&[239.9], 20.0, 0.0, None).unwrap().values(), &[12.0]);
    }

    #[test]
    fn single_value_arrangement() {
        let s = ValueScheme::new([(7.0, 4)]).unwrap();
        assert_eq!(random_arrangement(&s, 4, 99).unwrap().values(), &[7.0; 4]);
        assert!(matches!(random_arrangement(&s, 5, 1), Err(Error::SchemeSizeMismatch(_))));
    }

    #[test]
    fn arrangements_are_uniform() {
        // six arrangements of {0,0,1,1}; each should appear 10 000 ± 3σ times
        let scheme = ValueScheme::new([(0.0, 2), (1.0, 2)]).unwrap();
        let mut freq: HashMap<Vec<u32>, usize> = HashMap::new();
        let mut rng = rng::seeded(2024);
        let draws = 60_000;
        for _ in 0..draws {
            *freq.entry(scheme.shuffled_labels(&mut rng)).or_default() += 1;
        }
        assert_eq!(freq.len(), 6);
        let sigma = (draws as f64 * (1.0 / 6.0) * (5.0 / 6.0)).sqrt();
        for (k, v) in freq {
            assert!((v as f64 - 10_000.0).abs() < 3.0 * sigma, "{k:?}: {v}");
        }
    }

    #[test]
    fn scheme_serializes_as_pairs() {
        let s = ValueScheme::new([(1.0, 10), (0.0, 90)]).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, "[[0.0,90],[1.0,10]]");
        let back: ValueScheme = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }

    proptest! {
        #[test]
        fn arrangement_preserves_scheme(counts in prop::collection::vec(1usize..20, 1..6), seed in any::<u64>()) {
            let scheme = ValueScheme::new(counts.iter().enumerate().map(|(i, &c)| (i as f64 * 1.5 - 2.0, c))).unwrap();
            let sample = random_arrangement(&scheme, scheme.n(), seed).unwrap();
            prop_assert_eq!(extract_scheme(&sample).unwrap(), scheme);
        }

        #[test]
        fn derived_quantities_match_direct_pass(values in prop::collection::vec(0u8..6, 1..200)) {
            let sample = Sample::new(values.iter().map(|&v| v as f64 * 0.7).collect()).unwrap();
            let scheme = extract_scheme(&sample).unwrap();
            let mean = sample.values().iter().sum::<f64>() / sample.len() as f64;
            let ss: f64 = sample.values().iter().map(|x| (x - mean).powi(2)).sum();
            prop_assert!(close(scheme.mean(), mean));
            prop_assert!((scheme.sum_sq_dev() - ss).abs() <= 1e-12 * ss.max(1.0) * 10.0);
        }

        #[test]
        fn bucketize_is_monotone(a in -100.0f64..400.0, b in -100.0f64..400.0) {
            let bk = Bucketizer::new(20.0, 0.0, Some(250.0)).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(bk.label(lo).unwrap() <= bk.label(hi).unwrap());
        }

        #[test]
        fn bucket_midpoints_are_fixed_points(v in 0.0f64..250.0) {
            let bk = Bucketizer::new(20.0, 0.0, Some(250.0)).unwrap();
            let label = bk.label(v).unwrap();
            let mid = bk.origin + (label as f64 - 0.5) * bk.width;
            prop_assert_eq!(bk.label(mid).unwrap(), label);
        }
    }
}
