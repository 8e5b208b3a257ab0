//! Closed-form normal approximation of the permutation law of `Ī`.
//!
//! For a fixed value scheme on a `k`-regular graph, `Ī` is a weighted sum of
//! pair-set counts `|S_pq|`. Different-value counts are approximately
//! binomial, same-value counts approximately Poisson-binomial; replacing
//! both by normals gives
//!
//! ```text
//! μ̃  = Σ_{p≠q} a_p a_q μ_pq + Σ_p a_p² μ_pp
//! σ̃² = Σ_{p≠q, p,q≠r} [a_p a_q − 2 a_p a_r + a_r²]² σ²_pq + Σ_{p≠r} (c_p − c_r)⁴ σ²_pp
//! ```
//!
//! with `a_p = c_p − x̄` and `r` the most frequent (background) value.
//! Two corrections adjust the pair moments for graphs and schemes that
//! violate the regular-degree and scattered-foreground assumptions.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::graph::WeightGraph;
use crate::scheme::ValueScheme;
use crate::sum::NeumaierSum;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Which variance to use for different-value counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DifferentValueVariance {
    /// `min(n_p,n_q)·(k·max/N)·(1 − k·max/N)`, the form entering `σ̃²`.
    #[default]
    Binomial,
    /// `min(n_p,n_q)·(k·max/N)·(1 − k·min/N)`, the variant derived for
    /// small `n_p, n_q`; kept for comparison only.
    SmallerSuccess,
}

/// Means and variances of `|S_pq|` for every ordered value pair; the
/// diagonal holds the same-value moments `μ_pp`, `σ²_pp`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMoments {
    m: usize,
    mean: Vec<f64>,
    variance: Vec<f64>,
}

impl PairMoments {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn mean(&self, p: usize, q: usize) -> f64 {
        self.mean[p * self.m + q]
    }

    pub fn variance(&self, p: usize, q: usize) -> f64 {
        self.variance[p * self.m + q]
    }
}

#[inline]
fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Pair moments for `scheme` on a graph of nominal degree `k`.
///
/// Means are left unclamped except that a same-value mean never goes below
/// zero; the success probabilities inside the variances are clamped into
/// `[0, 1]` so that every variance is non-negative.
pub fn pair_moments(scheme: &ValueScheme, k: f64) -> Result<PairMoments> {
    pair_moments_with(scheme, k, DifferentValueVariance::Binomial)
}

pub fn pair_moments_with(scheme: &ValueScheme, k: f64, form: DifferentValueVariance) -> Result<PairMoments> {
    let big_n = scheme.n();
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidValue(format!("degree must be positive, got {k}")));
    }
    if big_n < 2 {
        return Err(Error::SchemeSizeMismatch(format!("need at least two observations, got {big_n}")));
    }
    let n = big_n as f64;
    let m = scheme.m();
    let mut mean = vec![0.0; m * m];
    let mut variance = vec![0.0; m * m];
    for p in 0..m {
        let np = scheme.count(p) as f64;
        for q in 0..m {
            let ix = p * m + q;
            if p == q {
                let density = k * np / n;
                mean[ix] = ((np - 1.0) * density - 1.0).max(0.0);
                variance[ix] = 2.0 * (np - 1.0) * density * clamp01(1.0 - k * (2.0 * np - 1.0) / (3.0 * n));
            } else {
                let nq = scheme.count(q) as f64;
                let (lo, hi) = (np.min(nq), np.max(nq));
                mean[ix] = lo * k * hi / n;
                let success = clamp01(k * hi / n);
                let failure = match form {
                    DifferentValueVariance::Binomial => 1.0 - success,
                    DifferentValueVariance::SmallerSuccess => 1.0 - clamp01(k * lo / n),
                };
                variance[ix] = lo * success * failure;
            }
        }
    }
    Ok(PairMoments { m, mean, variance })
}

fn check_dims(scheme: &ValueScheme, pm: &PairMoments) -> Result<()> {
    if scheme.m() != pm.m() {
        return Err(Error::SchemeSizeMismatch(format!(
            "moments have dimension {}, scheme has {} values",
            pm.m(),
            scheme.m()
        )));
    }
    Ok(())
}

/// `μ̃` assembled from (possibly corrected) pair moments.
pub fn assemble_mean(scheme: &ValueScheme, pm: &PairMoments) -> Result<f64> {
    check_dims(scheme, pm)?;
    let a = scheme.deviations();
    let mut acc = NeumaierSum::new();
    for p in 0..a.len() {
        for q in 0..a.len() {
            acc.add(a[p] * a[q] * pm.mean(p, q));
        }
    }
    Ok(acc.value())
}

/// `σ̃²` assembled from (possibly corrected) pair moments, using the most
/// frequent value as background.
pub fn assemble_variance(scheme: &ValueScheme, pm: &PairMoments) -> Result<f64> {
    check_dims(scheme, pm)?;
    let m = scheme.m();
    if m < 2 {
        return Err(Error::DegenerateScheme("variance needs at least two distinct values".into()));
    }
    let r = scheme.background_index();
    let a = scheme.deviations();
    let ar = a[r];
    let mut acc = NeumaierSum::new();
    for p in (0..m).filter(|&p| p != r) {
        for q in (0..m).filter(|&q| q != r && q != p) {
            let coef = a[p] * a[q] - 2.0 * a[p] * ar + ar * ar;
            acc.add(coef * coef * pm.variance(p, q));
        }
        let gap = scheme.value(p) - scheme.value(r);
        acc.add(gap.powi(4) * pm.variance(p, p));
    }
    Ok(acc.value())
}

/// Approximate mean of `Ī` without corrections.
pub fn approx_mean(scheme: &ValueScheme, k: f64) -> Result<f64> {
    assemble_mean(scheme, &pair_moments(scheme, k)?)
}

/// Approximate variance of `Ī` without corrections.
pub fn approx_variance(scheme: &ValueScheme, k: f64) -> Result<f64> {
    if scheme.m() < 2 {
        return Err(Error::DegenerateScheme("variance needs at least two distinct values".into()));
    }
    assemble_variance(scheme, &pair_moments(scheme, k)?)
}

/// Ratio of actual to nominal edge count, `total_edges / (k·N) = 1 + Δ_N/(kN)`.
pub fn edge_scale(delta_n: i64, k: f64, n: usize) -> f64 {
    1.0 + delta_n as f64 / (k * n as f64)
}

/// Rescales all pair moments for a graph whose edge count differs from
/// `k·N` by `delta_n`. Counts grow in proportion to the number of edges;
/// their variances, being sums of weakly dependent edge indicators, scale
/// the same way.
pub fn apply_delta_correction(pm: &PairMoments, delta_n: i64, k: f64, n: usize) -> Result<PairMoments> {
    let f = edge_scale(delta_n, k, n);
    if !(f > 0.0) {
        return Err(Error::CorrectionInfeasible(f));
    }
    Ok(PairMoments {
        m: pm.m,
        mean: pm.mean.iter().map(|x| x * f).collect(),
        variance: pm.variance.iter().map(|x| x * f).collect(),
    })
}

/// Undoes the `(|S_pp| − 1)/|S_pp|` shrinkage of the same-value means: the
/// approximate count tracks `|S_pp| − 1`, so each `μ_pp > 1` becomes
/// `μ_pp + 1`. Variances are unchanged.
pub fn apply_common_neighbor_correction(pm: &PairMoments) -> PairMoments {
    let mut out = pm.clone();
    for p in 0..pm.m {
        let ix = p * pm.m + p;
        if out.mean[ix] > 1.0 {
            out.mean[ix] += 1.0;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CorrectionFlags {
    pub delta_n_scaling: bool,
    pub common_neighbor: bool,
}

/// Which corrections to apply when building an [`AnalyticDist`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AnalyticOptions {
    /// `total_edges − k·N` of the graph the law is meant for.
    pub delta_n: i64,
    pub corrections: CorrectionFlags,
}

impl AnalyticOptions {
    pub fn uncorrected() -> Self {
        Self::default()
    }

    /// Both corrections, with the edge deficit of `g`.
    pub fn corrected_for(g: &WeightGraph) -> Self {
        Self {
            delta_n: g.delta_n(),
            corrections: CorrectionFlags { delta_n_scaling: true, common_neighbor: true },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailSide {
    Upper,
    Lower,
    Two,
}

impl std::str::FromStr for TailSide {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "upper" => Ok(TailSide::Upper),
            "lower" => Ok(TailSide::Lower),
            "two" => Ok(TailSide::Two),
            other => Err(Error::Parse(format!("unknown tail '{other}' (expected upper|lower|two)"))),
        }
    }
}

/// Normal law `N(μ̃, σ̃²)` for `Ī`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticDist {
    pub mean: f64,
    pub variance: f64,
    pub corrections: CorrectionFlags,
    pub k: f64,
    pub delta_n: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<ValueScheme>,
}

impl AnalyticDist {
    /// A bare normal law, not tied to any scheme.
    pub fn from_moments(mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite() && mean.is_finite()) {
            return Err(Error::DegenerateScheme(format!("invalid normal law N({mean}, {variance})")));
        }
        Ok(Self { mean, variance, corrections: CorrectionFlags::default(), k: f64::NAN, delta_n: 0, scheme: None })
    }

    pub fn sd(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let z = (x - self.mean) / self.sd();
        -0.5 * z * z - self.sd().ln() - LN_SQRT_2PI
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        0.5 * erfc(-(x - self.mean) / (self.sd() * std::f64::consts::SQRT_2))
    }

    /// `J = −ln φ(x; μ̃, σ̃²)`.
    pub fn self_information(&self, x: f64) -> f64 {
        -self.ln_pdf(x)
    }

    pub fn tail_probability(&self, x: f64, side: TailSide) -> f64 {
        let z = (x - self.mean) / self.sd();
        let upper = |z: f64| 0.5 * erfc(z / std::f64::consts::SQRT_2);
        match side {
            TailSide::Upper => upper(z),
            TailSide::Lower => upper(-z),
            TailSide::Two => (2.0 * upper(z.abs())).min(1.0),
        }
    }
}

/// Pair moments with the corrections in `options` applied, the
/// common-neighbor shift first.
pub fn corrected_pair_moments(scheme: &ValueScheme, k: f64, options: AnalyticOptions) -> Result<PairMoments> {
    let mut pm = pair_moments(scheme, k)?;
    if options.corrections.common_neighbor {
        pm = apply_common_neighbor_correction(&pm);
    }
    if options.corrections.delta_n_scaling {
        pm = apply_delta_correction(&pm, options.delta_n, k, scheme.n())?;
    }
    Ok(pm)
}

/// Builds the normal law for `scheme` on a graph of nominal degree `k`.
pub fn analytic_distribution(scheme: &ValueScheme, k: f64, options: AnalyticOptions) -> Result<AnalyticDist> {
    if scheme.m() < 2 || scheme.sum_sq_dev() <= 0.0 {
        return Err(Error::DegenerateScheme(format!("scheme has {} distinct value(s)", scheme.m())));
    }
    let pm = corrected_pair_moments(scheme, k, options)?;
    let mean = assemble_mean(scheme, &pm)?;
    let variance = assemble_variance(scheme, &pm)?;
    if !(variance > 0.0) {
        return Err(Error::DegenerateScheme("approximate variance is zero".into()));
    }
    Ok(AnalyticDist {
        mean,
        variance,
        corrections: options.corrections,
        k,
        delta_n: options.delta_n,
        scheme: Some(scheme.clone()),
    })
}

/// Spatial self-information of an observed `Ī`.
pub fn self_information(ibar_observed: f64, d: &AnalyticDist) -> f64 {
    d.self_information(ibar_observed)
}

pub fn tail_probability(ibar_observed: f64, d: &AnalyticDist, side: TailSide) -> f64 {
    d.tail_probability(ibar_observed, side)
}

/// How many times more likely (by density) the less surprising of two
/// observations is: `exp(J_more − J_less)`.
pub fn ease_ratio(j_more_surprising: f64, j_less_surprising: f64) -> f64 {
    (j_more_surprising - j_less_surprising).exp()
}
