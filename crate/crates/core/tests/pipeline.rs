//! File formats and end-to-end flows through the public API.

use spatial_surprisal::experiments::{run_sweep, SweepConfig, SweepKind, SweepOutput};
use spatial_surprisal::graph::{Contiguity, WeightGraph};
use spatial_surprisal::montecarlo::{sample_distribution, EnsembleSummary};
use spatial_surprisal::raster::{analyze_raster, rank_patches, PatchOptions, RankKey, RasterFormat, RasterGrid};
use spatial_surprisal::scheme::ValueScheme;
use spatial_surprisal::{AnalyticOptions, Error};
use rand::{Rng, SeedableRng};

#[test]
fn graph_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.edges");
    let g = WeightGraph::bounded(5, 7, Contiguity::Queen).unwrap().perturb_balanced(0.2, 3).unwrap();
    g.save(&path).unwrap();
    assert_eq!(WeightGraph::load(&path).unwrap(), g);
    std::fs::write(&path, "4 4\n0 0\n").unwrap();
    assert!(WeightGraph::load(&path).is_err());
}

#[test]
fn raster_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data: Vec<f64> = (0..12 * 9).map(|i| (i % 251) as f64).collect();
    let r = RasterGrid::new(12, 9, data).unwrap();
    for (name, format) in [("r.csv", RasterFormat::Csv), ("r.sras", RasterFormat::FlatBinary)] {
        let path = dir.path().join(name);
        r.save(&path, format).unwrap();
        assert_eq!(RasterGrid::load(&path, format).unwrap(), r);
    }
    let missing = RasterGrid::load(&dir.path().join("nope.csv"), RasterFormat::Csv);
    assert!(matches!(missing, Err(Error::Io(_))));
    assert_eq!(missing.unwrap_err().exit_code(), 1);
}

#[test]
fn sample_csv_and_summary() {
    let g = WeightGraph::torus(3, 3, Contiguity::Rook).unwrap();
    let s = ValueScheme::new([(0.0, 6), (1.0, 3)]).unwrap();
    let e = sample_distribution(&s, &g, 1_000, 1, 2).unwrap();
    let mut buf = Vec::new();
    e.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next(), Some("ibar"));
    assert_eq!(text.lines().count(), 1_001);

    let empty = sample_distribution(&s, &g, 0, 1, 2).unwrap();
    let mut buf = Vec::new();
    empty.write_csv(&mut buf).unwrap();
    assert_eq!(buf, b"ibar\n");

    let d = spatial_surprisal::analytic::analytic_distribution(&s, 4.0, AnalyticOptions::uncorrected()).unwrap();
    let summary = EnsembleSummary::new(&e, Some(&d));
    assert_eq!(summary.histogram.counts.iter().sum::<u64>(), 1_000);
    assert!(summary.kl.is_some() && summary.ks.is_some());
}

#[test]
fn sweep_output_json_round_trips() {
    let cfg = SweepConfig { rows: 8, cols: 8, n_samples: 200, repeats: 2, values: Some(vec![0.6]), ..SweepConfig::default() };
    let out = run_sweep(SweepKind::Independence, &cfg).unwrap();
    let json = serde_json::to_string(&out).unwrap();
    let back: SweepOutput = serde_json::from_str(&json).unwrap();
    assert_eq!(back.rows, out.rows);
    assert_eq!(back.kind, SweepKind::Independence);
}

#[test]
fn raster_pipeline_ranks_patches() {
    // left half in horizontal bands, right half noise
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    let data: Vec<f64> = (0..40 * 40)
        .map(|i| {
            let (r, c) = (i / 40, i % 40);
            if c < 20 { (r / 4 * 10 % 40) as f64 } else { rng.random_range(0.0..40.0) }
        })
        .collect();
    let raster = RasterGrid::new(40, 40, data).unwrap();
    let opts = PatchOptions { bin_width: 10.0, ..PatchOptions::default() };
    let reports = analyze_raster(&raster, 40, 20, &opts, 2).unwrap();
    assert_eq!(reports.len(), 4);
    let by_i = rank_patches(&reports, RankKey::MoranI, None);
    let by_j = rank_patches(&reports, RankKey::SelfInformation, None);
    assert_eq!(by_i.len(), by_j.len());
    let mut ids_i: Vec<_> = by_i.iter().map(|r| r.id).collect();
    let mut ids_j: Vec<_> = by_j.iter().map(|r| r.id).collect();
    ids_i.sort();
    ids_j.sort();
    assert_eq!(ids_i, ids_j);
    // banded patches are strongly autocorrelated and far more surprising
    for r in &reports {
        let (i, j) = (r.moran_i.unwrap(), r.self_information.unwrap());
        if r.id.patch_col == 0 {
            assert!(i > 0.5 && j > 20.0, "{:?}: I {i} J {j}", r.id);
        } else {
            assert!(i.abs() < 0.2 && j < 10.0, "{:?}: I {i} J {j}", r.id);
        }
    }
    assert_eq!(by_j.last().unwrap().id.patch_col, 0);
}
