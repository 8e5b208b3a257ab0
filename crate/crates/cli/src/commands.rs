use std::fs;
use std::io::BufWriter;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use spatial_surprisal::analytic::{analytic_distribution, AnalyticOptions, CorrectionFlags};
use spatial_surprisal::experiments::{run_sweep, Law, SweepConfig, SweepKind};
use spatial_surprisal::graph::WeightGraph;
use spatial_surprisal::montecarlo::{sample_distribution, EnsembleSummary};
use spatial_surprisal::moran::{moran_i, pair_counts_with, unscaled_moran};
use spatial_surprisal::raster::{
    analyze_raster, ease_ratios, rank_patches, write_reports_csv, PatchOptions, RankKey, RasterFormat, RasterGrid,
};
use spatial_surprisal::scheme::{extract_scheme, Sample, ValueScheme};
use spatial_surprisal::{Error, Result};

use crate::manifest::{sidecar, RunManifest};
use crate::{
    AnalyticArgs, Corrections, GridArgs, InputFormat, MoranArgs, RankBy, RasterArgs, SampleArgs, SweepArgs, SweepName,
};

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, usize::from)
}

pub fn parse_shape(s: &str) -> std::result::Result<(usize, usize), String> {
    let (r, c) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected ROWSxCOLS, got '{s}'"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("bad dimension '{v}': {e}"));
    Ok((parse(r)?, parse(c)?))
}

pub fn parse_range(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or_else(|| format!("expected LO,HI, got '{s}'"))?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("bad bound '{v}': {e}"));
    let (lo, hi) = (parse(lo)?, parse(hi)?);
    if lo > hi {
        return Err(format!("empty range {lo},{hi}"));
    }
    Ok((lo, hi))
}

fn raster_format(f: InputFormat) -> RasterFormat {
    match f {
        InputFormat::Csv => RasterFormat::Csv,
        InputFormat::FlatBinary => RasterFormat::FlatBinary,
    }
}

fn flags(c: Corrections) -> CorrectionFlags {
    match c {
        Corrections::None => CorrectionFlags::default(),
        Corrections::Delta => CorrectionFlags { delta_n_scaling: true, common_neighbor: false },
        Corrections::Common => CorrectionFlags { delta_n_scaling: false, common_neighbor: true },
        Corrections::All => CorrectionFlags { delta_n_scaling: true, common_neighbor: true },
    }
}

fn load_grid(path: &Path, format: InputFormat, grid: &GridArgs) -> Result<(Sample, WeightGraph)> {
    let raster = RasterGrid::load(path, raster_format(format))?;
    let g = WeightGraph::grid_with(raster.rows(), raster.cols(), grid.contiguity, grid.topology())?;
    Ok((Sample::new(raster.data().to_vec())?, g))
}

fn load_scheme(path: &Path) -> Result<ValueScheme> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Format { path: path.to_owned(), msg: e.to_string() })
}

fn render(mut body: Value, manifest: &RunManifest) -> Result<String> {
    body["manifest"] = serde_json::to_value(manifest)?;
    Ok(serde_json::to_string_pretty(&body)?)
}

#[derive(Serialize)]
struct GridConfig<'a> {
    contiguity: spatial_surprisal::Contiguity,
    topology: spatial_surprisal::graph::Topology,
    format: &'a str,
}

fn format_name(f: InputFormat) -> &'static str {
    match f {
        InputFormat::Csv => "csv",
        InputFormat::FlatBinary => "flat_binary",
    }
}

pub fn moran(a: &MoranArgs) -> Result<String> {
    let (s, g) = load_grid(&a.input, a.format, &a.grid)?;
    let scheme = extract_scheme(&s)?;
    let i = moran_i(&s, &g)?;
    let ibar = unscaled_moran(&s, &g)?;
    let pc = pair_counts_with(&scheme, &s, &g)?;
    let cfg = GridConfig { contiguity: a.grid.contiguity, topology: a.grid.topology(), format: format_name(a.format) };
    let manifest = RunManifest::new("moran", cfg, None)?.input(&a.input)?;
    render(json!({ "I": i, "i_bar": ibar, "pair_counts": pc.rows(), "scheme": scheme }), &manifest)
}

pub fn analytic(a: &AnalyticArgs) -> Result<String> {
    let (scheme, k, delta_n, observed, manifest) = if let Some(path) = &a.from_grid {
        let (s, g) = load_grid(path, a.format, &a.grid)?;
        let scheme = extract_scheme(&s)?;
        let observed = match a.observed {
            Some(x) => Some(x),
            None => Some(unscaled_moran(&s, &g)?),
        };
        let k = a.k.unwrap_or(g.k_nominal() as f64);
        let delta_n = a.delta_n.unwrap_or(g.delta_n());
        (scheme, k, delta_n, observed, RunManifest::new("analytic", Value::Null, None)?.input(path)?)
    } else {
        let path = a.scheme.as_deref().expect("clap requires --scheme or --from-grid");
        let scheme = load_scheme(path)?;
        let k = a.k.unwrap_or(4.0);
        (scheme, k, a.delta_n.unwrap_or(0), a.observed, RunManifest::new("analytic", Value::Null, None)?.input(path)?)
    };
    if !(k > 0.0) {
        return Err(Error::InvalidValue(format!("k must be positive, got {k}")));
    }
    let options = AnalyticOptions { delta_n, corrections: flags(a.corrections) };
    let d = analytic_distribution(&scheme, k, options)?;
    let mut body = json!({ "mu": d.mean, "sigma2": d.variance, "k": k, "delta_n": delta_n, "corrections": options.corrections });
    if let Some(x) = observed {
        body["observed"] = json!(x);
        body["J"] = json!(d.self_information(x));
        body["tail_p"] = json!(d.tail_probability(x, a.tail));
    }
    let mut manifest = manifest;
    manifest.config = json!({
        "k": k,
        "delta_n": delta_n,
        "corrections": options.corrections,
        "observed": observed,
        "tail": a.tail,
        "scheme": scheme,
    });
    render(body, &manifest)
}

pub fn sample(a: &SampleArgs) -> Result<String> {
    let scheme = load_scheme(&a.scheme)?;
    let (rows, cols) = a.grid_shape;
    let g = WeightGraph::grid_with(rows, cols, a.grid.contiguity, a.grid.topology())?;
    if scheme.n() != g.n_vertices() {
        return Err(Error::SchemeSizeMismatch(format!(
            "scheme has {} observations, a {rows}x{cols} grid has {}",
            scheme.n(),
            g.n_vertices()
        )));
    }
    let e = sample_distribution(&scheme, &g, a.n, a.seed, a.workers)?;
    let mut w = BufWriter::new(fs::File::create(&a.out)?);
    e.write_csv(&mut w)?;
    std::io::Write::flush(&mut w)?;

    let options = AnalyticOptions { delta_n: g.delta_n(), corrections: flags(a.corrections) };
    let law = analytic_distribution(&scheme, g.k_nominal() as f64, options).ok();
    let summary = EnsembleSummary::new(&e, law.as_ref());
    let config = json!({
        "scheme": scheme,
        "grid_shape": [rows, cols],
        "contiguity": a.grid.contiguity,
        "topology": a.grid.topology(),
        "n": a.n,
        "corrections": options.corrections,
    });
    let manifest = RunManifest::new("sample", config, Some(a.seed))?.input(&a.scheme)?.output(&a.out);
    manifest.write(&sidecar(&a.out))?;
    let analytic = law.map(|d| json!({ "mu": d.mean, "sigma2": d.variance }));
    render(json!({ "summary": summary, "analytic": analytic }), &manifest)
}

fn sweep_kind(k: SweepName) -> SweepKind {
    match k {
        SweepName::Independence => SweepKind::Independence,
        SweepName::Perturb => SweepKind::Perturbation,
        SweepName::Systematic => SweepKind::Systematic,
        SweepName::CommonNeighbor => SweepKind::CommonNeighbor,
    }
}

/// Reads a sweep configuration, accepting a manifest of an earlier run too.
fn load_sweep_config(path: &Path, kind: SweepKind) -> Result<SweepConfig> {
    let fmt = |e: serde_json::Error| Error::Format { path: path.to_owned(), msg: e.to_string() };
    let mut value: Value = serde_json::from_str(&fs::read_to_string(path)?).map_err(fmt)?;
    if value.get("subcommand").is_some() {
        value = value["config"].take();
        if let Some(recorded) = value.as_object_mut().and_then(|m| m.remove("kind")) {
            if recorded != json!(kind) {
                return Err(Error::Format {
                    path: path.to_owned(),
                    msg: format!("manifest records a {recorded} sweep, not {kind}"),
                });
            }
        }
    }
    serde_json::from_value(value).map_err(fmt)
}

pub fn sweep(a: &SweepArgs) -> Result<String> {
    let kind = sweep_kind(a.kind);
    let mut cfg = match &a.config {
        Some(path) => load_sweep_config(path, kind)?,
        None => SweepConfig::default(),
    };
    cfg.workers = a.workers;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(n) = a.n_samples {
        cfg.n_samples = n;
    }
    if let Some(r) = a.repeats {
        cfg.repeats = r;
    }
    if a.values.is_some() {
        cfg.values = a.values.clone();
    }
    if cfg.values.is_none() {
        cfg.values = Some(kind.default_values());
    }
    let out = run_sweep(kind, &cfg)?;

    fs::create_dir_all(&a.out_dir)?;
    let csv_path = a.out_dir.join(format!("{kind}.csv"));
    out.write_csv(BufWriter::new(fs::File::create(&csv_path)?))?;
    let json_path = a.out_dir.join(format!("{kind}.json"));
    fs::write(&json_path, serde_json::to_string_pretty(&out)? + "\n")?;
    let mut manifest = RunManifest::new("sweep", &cfg, Some(cfg.seed))?.output(&csv_path).output(&json_path);
    if let Some(path) = &a.config {
        manifest = manifest.input(path)?;
    }
    if !out.same_pairs.is_empty() {
        let path = a.out_dir.join(format!("{kind}_same_pairs.csv"));
        out.write_same_pairs_csv(BufWriter::new(fs::File::create(&path)?))?;
        manifest = manifest.output(&path);
    }
    manifest.config["kind"] = json!(kind);
    manifest.write(&a.out_dir.join(format!("{kind}.manifest.json")))?;

    eprintln!("{:>10} {:>12} {:>10} {:>10} {:>12} {:>8}", "value", "law", "mean_diff", "std_diff", "kl", "ks_p");
    for row in &out.rows {
        let agg = &row.aggregate;
        eprintln!(
            "{:>10} {:>12} {:>10.4} {:>10.4} {:>12.4e} {:>8.3}",
            row.sweep_var,
            row.law.to_string(),
            agg.mean_diff.mean,
            agg.std_diff.mean,
            agg.kl.mean,
            agg.ks_p.mean
        );
    }
    let aggregates: Vec<Value> = out
        .rows
        .iter()
        .map(|r| json!({ "sweep_var": r.sweep_var, "law": r.law, "aggregate": r.aggregate }))
        .collect();
    let corrected_kl: Vec<f64> =
        out.rows.iter().filter(|r| r.law == Law::Corrected).map(|r| r.aggregate.kl.mean).collect();
    render(json!({ "kind": kind, "aggregates": aggregates, "corrected_kl": corrected_kl }), &manifest)
}

pub fn raster(a: &RasterArgs) -> Result<String> {
    let grid = RasterGrid::load(&a.input, raster_format(a.format))?;
    let opts = PatchOptions {
        bin_width: a.bin_width,
        origin: a.origin,
        domain_max: a.domain_max,
        contiguity: a.contiguity,
        tail: a.tail,
    };
    let reports = analyze_raster(&grid, a.tile, a.patch, &opts, a.workers)?;
    let key = match a.rank_by {
        RankBy::MoranI => RankKey::MoranI,
        RankBy::SelfInformation => RankKey::SelfInformation,
    };
    let ranked = rank_patches(&reports, key, a.b_range);
    let flagged = reports.iter().filter(|r| r.is_flagged()).count();

    let config = json!({
        "format": format_name(a.format),
        "tile": a.tile,
        "patch": a.patch,
        "options": opts,
        "rank_by": key,
        "b_range": a.b_range,
    });
    let mut manifest = RunManifest::new("raster", config, None)?.input(&a.input)?;
    if let Some(out) = &a.out {
        write_reports_csv(&reports, BufWriter::new(fs::File::create(out)?))?;
        manifest = manifest.output(out);
        manifest.write(&sidecar(out))?;
    }
    for r in ranked.iter().take(10) {
        eprintln!(
            "{:>12}  b={:.3}  I={:>8.4}  J={:>9.3}",
            r.id.to_string(),
            r.b,
            r.moran_i.unwrap_or(f64::NAN),
            r.self_information.unwrap_or(f64::NAN)
        );
    }
    let body = json!({
        "n_patches": reports.len(),
        "n_flagged": flagged,
        "ranked": ranked,
        "ease_ratios": if key == RankKey::SelfInformation { ease_ratios(&ranked) } else { Vec::new() },
    });
    render(body, &manifest)
}
