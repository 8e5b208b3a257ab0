//! Synthetic robustness sweeps: independence level, random perturbation of
//! the weights, systematic edge deficit and the common-neighbor effect.
//!
//! Every sweep point is repeated `repeats` times. Each repeat draws a fresh
//! permutation ensemble (and, where relevant, a fresh perturbed graph) from a
//! seed derived from `(config seed, sweep kind, sweep value, repeat)`, so
//! adding or removing sweep points never changes the numbers of the others
//! and the worker count never changes anything.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analytic::{analytic_distribution, corrected_pair_moments, AnalyticDist, AnalyticOptions};
use crate::error::{Error, Result};
use crate::graph::{Contiguity, Topology, WeightGraph};
use crate::montecarlo::{kl_divergence, ks_test, sample_ensemble, standardized_diffs, EmpiricalDist, Ensemble};
use crate::rng::{derive_seed, DEFAULT_SEED};
use crate::scheme::ValueScheme;

const GRAPH_TAG: u64 = 0x6772_6170_68;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    Independence,
    Perturbation,
    Systematic,
    CommonNeighbor,
}

impl SweepKind {
    pub fn default_values(self) -> Vec<f64> {
        match self {
            SweepKind::Independence => vec![0.65, 0.55, 0.45, 0.35, 0.25],
            SweepKind::Perturbation => vec![0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3],
            SweepKind::Systematic => vec![-0.15, -0.1, -0.05, 0.0, 0.05, 0.1, 0.15],
            SweepKind::CommonNeighbor => (200..=300).step_by(20).map(f64::from).collect(),
        }
    }

    fn tag(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepKind::Independence => "independence",
            SweepKind::Perturbation => "perturbation",
            SweepKind::Systematic => "systematic",
            SweepKind::CommonNeighbor => "common-neighbor",
        })
    }
}

impl FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "independence" => Ok(SweepKind::Independence),
            "perturb" | "perturbation" => Ok(SweepKind::Perturbation),
            "systematic" => Ok(SweepKind::Systematic),
            "common-neighbor" | "common_neighbor" => Ok(SweepKind::CommonNeighbor),
            other => Err(Error::Parse(format!(
                "unknown sweep '{other}' (expected independence|perturb|systematic|common-neighbor)"
            ))),
        }
    }
}

/// One background value plus foreground values sharing the rest of the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeRule {
    pub background_value: f64,
    pub foreground_values: Vec<f64>,
}

impl Default for SchemeRule {
    fn default() -> Self {
        Self { background_value: 0.0, foreground_values: vec![1.0, 2.0, 3.0] }
    }
}

impl SchemeRule {
    /// `round(b·N)` background cells; the remainder is split as evenly as
    /// possible, larger shares going to the earlier foreground values.
    pub fn for_background(&self, b: f64, n: usize) -> Result<ValueScheme> {
        if !(b > 0.0 && b < 1.0) {
            return Err(Error::SchemeSizeMismatch(format!("background proportion {b} outside (0, 1)")));
        }
        let n_bg = (b * n as f64).round() as usize;
        let fg = self.foreground_values.len();
        if fg == 0 || n_bg >= n || n - n_bg < fg {
            return Err(Error::SchemeSizeMismatch(format!(
                "cannot split {} cells among {fg} foreground values",
                n.saturating_sub(n_bg)
            )));
        }
        let rest = n - n_bg;
        let counts = (0..fg).map(|i| rest / fg + usize::from(i < rest % fg));
        self.build(n_bg, counts)
    }

    /// `n_fg` cells for every foreground value, background takes the rest.
    pub fn for_foreground_size(&self, n_fg: usize, n: usize) -> Result<ValueScheme> {
        let fg_total = n_fg * self.foreground_values.len();
        if n_fg == 0 || fg_total >= n {
            return Err(Error::SchemeSizeMismatch(format!(
                "{} foreground values of {n_fg} cells do not fit in {n}",
                self.foreground_values.len()
            )));
        }
        self.build(n - fg_total, std::iter::repeat_n(n_fg, self.foreground_values.len()))
    }

    fn build(&self, n_bg: usize, counts: impl Iterator<Item = usize>) -> Result<ValueScheme> {
        let pairs = std::iter::once((self.background_value, n_bg))
            .chain(self.foreground_values.iter().copied().zip(counts));
        ValueScheme::new(pairs)
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, usize::from)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub rows: usize,
    pub cols: usize,
    pub contiguity: Contiguity,
    /// Grid boundary for every sweep except the systematic one, which
    /// always starts from a torus.
    pub topology: Topology,
    pub n_samples: usize,
    pub repeats: usize,
    pub seed: u64,
    pub scheme: SchemeRule,
    /// Sweep variable values; `None` selects the defaults of the sweep kind.
    pub values: Option<Vec<f64>>,
    /// Thread count. Has no influence on any result, so it is not part of
    /// the serialized configuration.
    #[serde(skip, default = "default_workers")]
    pub workers: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            rows: 40,
            cols: 40,
            contiguity: Contiguity::Rook,
            topology: Topology::Bounded,
            n_samples: 10_000,
            repeats: 10,
            seed: DEFAULT_SEED,
            scheme: SchemeRule::default(),
            values: None,
            workers: default_workers(),
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 2 || self.repeats == 0 {
            return Err(Error::InvalidValue(format!(
                "need at least 2 samples and 1 repeat (got {} and {})",
                self.n_samples, self.repeats
            )));
        }
        if self.scheme.foreground_values.is_empty() {
            return Err(Error::InvalidValue("scheme rule has no foreground values".into()));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.rows * self.cols
    }

    fn graph(&self) -> Result<WeightGraph> {
        WeightGraph::grid_with(self.rows, self.cols, self.contiguity, self.topology)
    }

    fn seed_for(&self, kind: SweepKind, value: f64, repeat: usize) -> u64 {
        derive_seed(self.seed, &[kind.tag(), value.to_bits(), repeat as u64])
    }

    fn graph_seed_for(&self, kind: SweepKind, value: f64, repeat: usize) -> u64 {
        derive_seed(self.seed, &[kind.tag(), value.to_bits(), repeat as u64, GRAPH_TAG])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Law {
    Corrected,
    Uncorrected,
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Law::Corrected => "corrected",
            Law::Uncorrected => "uncorrected",
        })
    }
}

/// Comparison of one sampled ensemble against one analytic law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepeatMetrics {
    pub repeat: usize,
    pub mean_diff: f64,
    pub std_diff: f64,
    pub kl: f64,
    pub ks_p: f64,
    pub mu_t: f64,
    pub sigma_t: f64,
    pub mu_e: f64,
    pub sigma_e: f64,
}

impl RepeatMetrics {
    pub fn compare(repeat: usize, e: &EmpiricalDist, d: &AnalyticDist) -> Result<Self> {
        let diffs = standardized_diffs(d, e)?;
        Ok(Self {
            repeat,
            mean_diff: diffs.mean_diff,
            std_diff: diffs.std_diff,
            kl: kl_divergence(e, d)?,
            ks_p: ks_test(e, d)?.p_value,
            mu_t: d.mean,
            sigma_t: d.sd(),
            mu_e: e.mean,
            sigma_e: e.std,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation over repeats, 0 for a single repeat.
    pub std: f64,
}

impl MeanStd {
    pub fn of(xs: impl IntoIterator<Item = f64>) -> Self {
        let xs: Vec<f64> = xs.into_iter().collect();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let std = if xs.len() < 2 {
            0.0
        } else {
            (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Self { mean, std }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean_diff: MeanStd,
    pub std_diff: MeanStd,
    pub kl: MeanStd,
    pub ks_p: MeanStd,
}

impl Aggregate {
    pub fn of(repeats: &[RepeatMetrics]) -> Self {
        Self {
            mean_diff: MeanStd::of(repeats.iter().map(|r| r.mean_diff)),
            std_diff: MeanStd::of(repeats.iter().map(|r| r.std_diff)),
            kl: MeanStd::of(repeats.iter().map(|r| r.kl)),
            ks_p: MeanStd::of(repeats.iter().map(|r| r.ks_p)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sweep_var: f64,
    pub law: Law,
    pub repeats: Vec<RepeatMetrics>,
    pub aggregate: Aggregate,
}

impl SweepRow {
    fn new(sweep_var: f64, law: Law, repeats: Vec<RepeatMetrics>) -> Self {
        let aggregate = Aggregate::of(&repeats);
        Self { sweep_var, law, repeats, aggregate }
    }
}

/// Mean same-value pair count for one foreground value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamePairRow {
    pub n: usize,
    pub value: f64,
    pub empirical: f64,
    pub uncorrected: f64,
    pub corrected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutput {
    pub kind: SweepKind,
    pub config: SweepConfig,
    pub values: Vec<f64>,
    pub rows: Vec<SweepRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub same_pairs: Vec<SamePairRow>,
}

impl SweepOutput {
    pub fn row(&self, sweep_var: f64, law: Law) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.sweep_var == sweep_var && r.law == law)
    }

    /// One line per (sweep value, law, repeat).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "sweep_var", "law", "repeat", "mean_diff", "std_diff", "kl", "ks_p", "mu_t", "sigma_t", "mu_e", "sigma_e",
        ])?;
        for row in &self.rows {
            for r in &row.repeats {
                out.write_record([
                    row.sweep_var.to_string(),
                    row.law.to_string(),
                    r.repeat.to_string(),
                    r.mean_diff.to_string(),
                    r.std_diff.to_string(),
                    r.kl.to_string(),
                    r.ks_p.to_string(),
                    r.mu_t.to_string(),
                    r.sigma_t.to_string(),
                    r.mu_e.to_string(),
                    r.sigma_e.to_string(),
                ])?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_same_pairs_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for row in &self.same_pairs {
            out.serialize(row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// The two laws compared at a sweep point.
#[derive(Debug, Clone, Copy)]
struct Laws {
    corrected: AnalyticOptions,
    uncorrected: AnalyticOptions,
}

struct PointResult {
    corrected: Vec<RepeatMetrics>,
    uncorrected: Vec<RepeatMetrics>,
    ensembles: Vec<Ensemble>,
}

/// Runs all repeats of one sweep point. `setup(repeat)` returns the graph to
/// sample on and the laws to compare against.
fn run_point<F>(cfg: &SweepConfig, kind: SweepKind, value: f64, scheme: &ValueScheme, keep: bool, setup: F) -> Result<PointResult>
where
    F: Fn(usize) -> Result<(WeightGraph, Laws)>,
{
    let mut out = PointResult { corrected: Vec::new(), uncorrected: Vec::new(), ensembles: Vec::new() };
    for repeat in 0..cfg.repeats {
        let (g, laws) = setup(repeat)?;
        let k = g.k_nominal() as f64;
        let ensemble = sample_ensemble(scheme, &g, cfg.n_samples, cfg.seed_for(kind, value, repeat), cfg.workers)?;
        let e = EmpiricalDist::from_samples(ensemble.ibar.clone());
        let corrected = analytic_distribution(scheme, k, laws.corrected)?;
        let uncorrected = analytic_distribution(scheme, k, laws.uncorrected)?;
        out.corrected.push(RepeatMetrics::compare(repeat, &e, &corrected)?);
        out.uncorrected.push(RepeatMetrics::compare(repeat, &e, &uncorrected)?);
        if keep {
            out.ensembles.push(ensemble);
        }
    }
    log::info!("{kind} sweep: point {value} done ({} repeats)", cfg.repeats);
    Ok(out)
}

fn finish(kind: SweepKind, cfg: &SweepConfig, values: Vec<f64>, points: Vec<PointResult>) -> SweepOutput {
    let mut rows = Vec::with_capacity(2 * points.len());
    for (&v, p) in values.iter().zip(points) {
        rows.push(SweepRow::new(v, Law::Corrected, p.corrected));
        rows.push(SweepRow::new(v, Law::Uncorrected, p.uncorrected));
    }
    SweepOutput { kind, config: cfg.clone(), values, rows, same_pairs: Vec::new() }
}

/// Varies the background proportion `b`. The corrected law carries both
/// corrections, the uncorrected one none.
pub fn independence_sweep(cfg: &SweepConfig, b_values: &[f64]) -> Result<SweepOutput> {
    cfg.validate()?;
    let g = cfg.graph()?;
    let laws = Laws { corrected: AnalyticOptions::corrected_for(&g), uncorrected: AnalyticOptions::uncorrected() };
    let points = b_values
        .iter()
        .map(|&b| {
            let scheme = cfg.scheme.for_background(b, cfg.n())?;
            run_point(cfg, SweepKind::Independence, b, &scheme, false, |_| Ok((g.clone(), laws)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(finish(SweepKind::Independence, cfg, b_values.to_vec(), points))
}

/// Flips a fraction `rho` of the edges (keeping their number) before
/// sampling, while the laws still assume the nominal degree. Uses the
/// background proportion `b` for the scheme.
pub fn perturbation_sweep_at(cfg: &SweepConfig, rho_values: &[f64], b: f64) -> Result<SweepOutput> {
    cfg.validate()?;
    let base = cfg.graph()?;
    let scheme = cfg.scheme.for_background(b, cfg.n())?;
    let points = rho_values
        .iter()
        .map(|&rho| {
            run_point(cfg, SweepKind::Perturbation, rho, &scheme, false, |repeat| {
                let g = base.perturb_balanced(rho, cfg.graph_seed_for(SweepKind::Perturbation, rho, repeat))?;
                let laws =
                    Laws { corrected: AnalyticOptions::corrected_for(&g), uncorrected: AnalyticOptions::uncorrected() };
                Ok((g, laws))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(finish(SweepKind::Perturbation, cfg, rho_values.to_vec(), points))
}

/// Background proportion used by the perturbation and systematic sweeps.
pub const HIGH_INDEPENDENCE_B: f64 = 0.65;

pub fn perturbation_sweep(cfg: &SweepConfig, rho_values: &[f64]) -> Result<SweepOutput> {
    perturbation_sweep_at(cfg, rho_values, HIGH_INDEPENDENCE_B)
}

/// Adds or removes `round(rate·k·N)` edges of a torus grid. Both laws
/// include the common-neighbor shift; only the corrected one rescales for
/// the edge count, so at rate 0 they coincide.
pub fn systematic_sweep(cfg: &SweepConfig, change_rates: &[f64]) -> Result<SweepOutput> {
    cfg.validate()?;
    let base = WeightGraph::torus(cfg.rows, cfg.cols, cfg.contiguity)?;
    let scheme = cfg.scheme.for_background(HIGH_INDEPENDENCE_B, cfg.n())?;
    let kn = (base.k_nominal() * base.n_vertices()) as f64;
    let points = change_rates
        .iter()
        .map(|&rate| {
            let delta = (rate * kn).round() as i64;
            run_point(cfg, SweepKind::Systematic, rate, &scheme, false, |repeat| {
                let g = base.perturb_systematic(delta, cfg.graph_seed_for(SweepKind::Systematic, rate, repeat))?;
                let corrected = AnalyticOptions::corrected_for(&g);
                let mut uncorrected = corrected;
                uncorrected.corrections.delta_n_scaling = false;
                Ok((g, Laws { corrected, uncorrected }))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(finish(SweepKind::Systematic, cfg, change_rates.to_vec(), points))
}

/// Gives every foreground value `n` cells. Both laws rescale for the edge
/// count; only the corrected one applies the common-neighbor shift. Also
/// tabulates the sampled mean of `|S_pp|` for every foreground value
/// against both approximations.
pub fn common_neighbor_sweep(cfg: &SweepConfig, n_values: &[usize]) -> Result<SweepOutput> {
    cfg.validate()?;
    let g = cfg.graph()?;
    let k = g.k_nominal() as f64;
    let corrected = AnalyticOptions::corrected_for(&g);
    let mut uncorrected = corrected;
    uncorrected.corrections.common_neighbor = false;
    let laws = Laws { corrected, uncorrected };

    let mut points = Vec::with_capacity(n_values.len());
    let mut same_pairs = Vec::new();
    for &n_fg in n_values {
        let scheme = cfg.scheme.for_foreground_size(n_fg, cfg.n())?;
        let point = run_point(cfg, SweepKind::CommonNeighbor, n_fg as f64, &scheme, true, |_| Ok((g.clone(), laws)))?;
        let pm_c = corrected_pair_moments(&scheme, k, laws.corrected)?;
        let pm_u = corrected_pair_moments(&scheme, k, laws.uncorrected)?;
        for &value in &cfg.scheme.foreground_values {
            let p = scheme.index_of(value).expect("foreground value is in the scheme");
            let empirical =
                point.ensembles.iter().map(|e| e.mean_pair_count(p, p)).sum::<f64>() / point.ensembles.len() as f64;
            same_pairs.push(SamePairRow {
                n: n_fg,
                value,
                empirical,
                uncorrected: pm_u.mean(p, p),
                corrected: pm_c.mean(p, p),
            });
        }
        points.push(point);
    }
    let mut out = finish(SweepKind::CommonNeighbor, cfg, n_values.iter().map(|&n| n as f64).collect(), points);
    out.same_pairs = same_pairs;
    Ok(out)
}

/// Runs `kind` over `cfg.values`, or the kind's defaults.
pub fn run_sweep(kind: SweepKind, cfg: &SweepConfig) -> Result<SweepOutput> {
    let values = cfg.values.clone().unwrap_or_else(|| kind.default_values());
    match kind {
        SweepKind::Independence => independence_sweep(cfg, &values),
        SweepKind::Perturbation => perturbation_sweep(cfg, &values),
        SweepKind::Systematic => systematic_sweep(cfg, &values),
        SweepKind::CommonNeighbor => {
            let ns = values
                .iter()
                .map(|&v| {
                    if v >= 1.0 && v.fract() == 0.0 {
                        Ok(v as usize)
                    } else {
                        Err(Error::InvalidValue(format!("foreground size {v} is not a positive integer")))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            common_neighbor_sweep(cfg, &ns)
        }
    }
}
