//! Raster ingestion, tiling and per-patch analysis.
//!
//! A raster is cut into square tiles, each tile into square patches. Every
//! patch is bucketized, placed on a bounded grid and scored by Moran's I and
//! by its spatial self-information under the corrected analytic law.
//!
//! The flat binary layout is the 4-byte magic `SRAS`, then `rows` and `cols`
//! as little-endian `u32`, then `rows·cols` unsigned bytes in row-major order.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{analytic_distribution, AnalyticOptions, TailSide};
use crate::error::{Error, Result};
use crate::graph::{Contiguity, WeightGraph};
use crate::moran::{count_pairs, relative_gap, scale_unscaled, unscaled_from_counts, unscaled_moran};
use crate::scheme::{extract_scheme, Bucketizer, ValueScheme};

pub const MAGIC: &[u8; 4] = b"SRAS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RasterFormat {
    Csv,
    FlatBinary,
}

impl FromStr for RasterFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(RasterFormat::Csv),
            "flat_binary" | "flat-binary" | "bin" => Ok(RasterFormat::FlatBinary),
            other => Err(Error::Parse(format!("unknown raster format '{other}' (expected csv|flat_binary)"))),
        }
    }
}

/// Row-major grid of finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterGrid {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RasterGrid {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidValue(format!("{} values for a {rows}x{cols} raster", data.len())));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidValue(format!("non-finite raster value {bad}")));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    /// `(min, max)`, or `None` for an empty raster.
    pub fn value_range(&self) -> Option<(f64, f64)> {
        let mut it = self.data.iter().copied();
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))))
    }

    /// Copies the `rows × cols` window with top-left corner `(r0, c0)`.
    pub fn window(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> RasterGrid {
        let mut data = Vec::with_capacity(rows * cols);
        for r in r0..r0 + rows {
            data.extend_from_slice(&self.data[r * self.cols + c0..r * self.cols + c0 + cols]);
        }
        RasterGrid { rows, cols, data }
    }

    /// Comma-separated rows; blank lines are ignored, ragged rows rejected.
    pub fn read_csv<R: Read>(r: R, origin: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(r);
        let mut data = Vec::new();
        let mut cols = None;
        let mut rows = 0;
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::format(origin, e.to_string()))?;
            if record.iter().all(str::is_empty) {
                continue;
            }
            match cols {
                None => cols = Some(record.len()),
                Some(c) if c != record.len() => {
                    return Err(Error::format(origin, format!("row {} has {} fields, expected {c}", line + 1, record.len())))
                }
                _ => {}
            }
            for field in record.iter() {
                let v: f64 = field
                    .parse()
                    .map_err(|_| Error::format(origin, format!("row {}: cannot parse '{field}'", line + 1)))?;
                if !v.is_finite() {
                    return Err(Error::format(origin, format!("row {}: non-finite value '{field}'", line + 1)));
                }
                data.push(v);
            }
            rows += 1;
        }
        let cols = cols.ok_or_else(|| Error::format(origin, "empty raster"))?;
        Ok(Self { rows, cols, data })
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for row in self.data.chunks(self.cols.max(1)) {
            let line: Vec<String> = row.iter().map(f64::to_string).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn read_flat_binary<R: Read>(mut r: R, origin: &Path) -> Result<Self> {
        let mut header = [0u8; 12];
        r.read_exact(&mut header).map_err(|_| Error::format(origin, "truncated header"))?;
        if &header[..4] != MAGIC {
            return Err(Error::format(origin, "bad magic, expected SRAS"));
        }
        let rows = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
        let cols = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
        let mut payload = Vec::new();
        r.read_to_end(&mut payload)?;
        if payload.len() != rows * cols {
            return Err(Error::format(
                origin,
                format!("{rows}x{cols} raster needs {} bytes, found {}", rows * cols, payload.len()),
            ));
        }
        Ok(Self { rows, cols, data: payload.into_iter().map(f64::from).collect() })
    }

    /// Fails unless every value is an integer in `0..=255`.
    pub fn write_flat_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let rows = u32::try_from(self.rows).map_err(|_| Error::InvalidValue("too many rows".into()))?;
        let cols = u32::try_from(self.cols).map_err(|_| Error::InvalidValue("too many columns".into()))?;
        let bytes = self
            .data
            .iter()
            .map(|&v| {
                if v.fract() == 0.0 && (0.0..=255.0).contains(&v) {
                    Ok(v as u8)
                } else {
                    Err(Error::InvalidValue(format!("{v} does not fit in an unsigned byte")))
                }
            })
            .collect::<Result<Vec<u8>>>()?;
        w.write_all(MAGIC)?;
        w.write_all(&rows.to_le_bytes())?;
        w.write_all(&cols.to_le_bytes())?;
        w.write_all(&bytes)?;
        Ok(())
    }

    pub fn load(path: &Path, format: RasterFormat) -> Result<Self> {
        let reader = BufReader::new(File::open(path)?);
        match format {
            RasterFormat::Csv => Self::read_csv(reader, path),
            RasterFormat::FlatBinary => Self::read_flat_binary(reader, path),
        }
    }

    pub fn save(&self, path: &Path, format: RasterFormat) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        match format {
            RasterFormat::Csv => self.write_csv(&mut w)?,
            RasterFormat::FlatBinary => self.write_flat_binary(&mut w)?,
        }
        w.flush()?;
        Ok(())
    }
}

pub fn load_raster(path: &Path, format: RasterFormat) -> Result<RasterGrid> {
    RasterGrid::load(path, format)
}

/// Position of a patch: tile coordinates, then patch coordinates inside
/// the tile. Orders row-major by tile, then by patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PatchId {
    pub tile_row: usize,
    pub tile_col: usize,
    pub patch_row: usize,
    pub patch_col: usize,
}

impl fmt::Display for PatchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}/{}.{}", self.tile_row, self.tile_col, self.patch_row, self.patch_col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub id: PatchId,
    pub grid: RasterGrid,
}

/// Cuts `r` into `tile × tile` tiles, dropping partial tiles at the right
/// and bottom edges, and each tile into `patch × patch` patches. Patches
/// come out tile by tile, row-major inside each tile.
pub fn tile(r: &RasterGrid, tile: usize, patch: usize) -> Result<impl Iterator<Item = Patch> + '_> {
    if tile == 0 || patch == 0 || tile % patch != 0 {
        return Err(Error::InvalidTiling(format!("patch size {patch} must divide tile size {tile}")));
    }
    let (tiles_r, tiles_c) = (r.rows / tile, r.cols / tile);
    let per = tile / patch;
    Ok((0..tiles_r).flat_map(move |tr| {
        (0..tiles_c).flat_map(move |tc| {
            (0..per * per).map(move |ix| {
                let (pr, pc) = (ix / per, ix % per);
                let id = PatchId { tile_row: tr, tile_col: tc, patch_row: pr, patch_col: pc };
                Patch { id, grid: r.window(tr * tile + pr * patch, tc * tile + pc * patch, patch, patch) }
            })
        })
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatchOptions {
    pub bin_width: f64,
    /// Lower edge of the first bucket.
    pub origin: f64,
    /// Top of the value domain; values above fall into the last bucket.
    pub domain_max: Option<f64>,
    pub contiguity: Contiguity,
    pub tail: TailSide,
}

impl Default for PatchOptions {
    fn default() -> Self {
        Self { bin_width: 1.0, origin: 0.0, domain_max: None, contiguity: Contiguity::Rook, tail: TailSide::Two }
    }
}

/// Scores for one patch. When `flag` is set the analytic fields are `None`;
/// Moran's I is still given if the patch is not constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchReport {
    pub id: PatchId,
    /// Number of distinct buckets.
    pub m: usize,
    /// Background proportion.
    pub b: f64,
    pub moran_i: Option<f64>,
    pub i_bar: Option<f64>,
    pub mu_t: Option<f64>,
    pub sigma_t: Option<f64>,
    pub self_information: Option<f64>,
    pub tail_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flag: Option<String>,
}

impl PatchReport {
    pub fn is_flagged(&self) -> bool {
        self.flag.is_some()
    }

    fn flagged(id: PatchId, scheme: &ValueScheme, err: &Error) -> Self {
        Self {
            id,
            m: scheme.m(),
            b: scheme.background_proportion(),
            moran_i: None,
            i_bar: None,
            mu_t: None,
            sigma_t: None,
            self_information: None,
            tail_p: None,
            flag: Some(err.to_string()),
        }
    }
}

/// Bucketizes a patch and scores it on a bounded grid with the corrected
/// analytic law. Constant patches come back flagged instead of failing;
/// any other error is returned.
pub fn analyze_patch(id: PatchId, p: &RasterGrid, opts: &PatchOptions) -> Result<PatchReport> {
    let g = WeightGraph::bounded(p.rows(), p.cols(), opts.contiguity)?;
    analyze_on(id, p, opts, &g)
}

fn analyze_on(id: PatchId, p: &RasterGrid, opts: &PatchOptions, g: &WeightGraph) -> Result<PatchReport> {
    let sample = Bucketizer::new(opts.bin_width, opts.origin, opts.domain_max)?.apply(p.data())?;
    let scheme = extract_scheme(&sample)?;
    if scheme.m() < 2 {
        return Ok(PatchReport::flagged(id, &scheme, &Error::ZeroVariance));
    }
    let labels = scheme.labels(&sample)?;
    let pc = count_pairs(&labels, scheme.m(), g)?;
    if pc.total() != g.total_edges() as u64 {
        return Err(Error::InvalidValue(format!("pair counts cover {} of {} edges", pc.total(), g.total_edges())));
    }
    let i_bar = unscaled_moran(&sample, g)?;
    let from_counts = unscaled_from_counts(&scheme, &pc)?;
    if relative_gap(i_bar, from_counts) > 1e-9 {
        return Err(Error::IdentityViolation { direct: i_bar, from_counts });
    }
    let d = match analytic_distribution(&scheme, g.k_nominal() as f64, AnalyticOptions::corrected_for(g)) {
        Ok(d) => d,
        Err(e @ Error::DegenerateScheme(_)) => {
            let mut rep = PatchReport::flagged(id, &scheme, &e);
            rep.moran_i = Some(scale_unscaled(i_bar, &scheme, g));
            rep.i_bar = Some(i_bar);
            return Ok(rep);
        }
        Err(e) => return Err(e),
    };
    Ok(PatchReport {
        id,
        m: scheme.m(),
        b: scheme.background_proportion(),
        moran_i: Some(scale_unscaled(i_bar, &scheme, g)),
        i_bar: Some(i_bar),
        mu_t: Some(d.mean),
        sigma_t: Some(d.sd()),
        self_information: Some(d.self_information(i_bar)),
        tail_p: Some(d.tail_probability(i_bar, opts.tail)),
        flag: None,
    })
}

/// Tiles `r` and analyzes every patch on `workers` threads. Reports come
/// back in tiling order whatever the thread count.
pub fn analyze_raster(r: &RasterGrid, tile_size: usize, patch: usize, opts: &PatchOptions, workers: usize) -> Result<Vec<PatchReport>> {
    let patches: Vec<Patch> = tile(r, tile_size, patch)?.collect();
    if patches.is_empty() {
        return Ok(Vec::new());
    }
    let g = WeightGraph::bounded(patch, patch, opts.contiguity)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Parse(format!("cannot start worker pool: {e}")))?;
    pool.install(|| patches.par_iter().map(|p| analyze_on(p.id, &p.grid, opts, &g)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankKey {
    MoranI,
    SelfInformation,
}

impl FromStr for RankKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "moran_i" | "moran-i" | "i" => Ok(RankKey::MoranI),
            "self_information" | "self-information" | "j" | "surprisal" => Ok(RankKey::SelfInformation),
            other => Err(Error::Parse(format!("unknown ranking key '{other}' (expected moran_i|self_information)"))),
        }
    }
}

/// Ascending order on `by`, ties broken by patch id. Flagged reports and,
/// with `b_filter = Some((lo, hi))`, reports with `b` outside `[lo, hi]`
/// are dropped.
pub fn rank_patches(reports: &[PatchReport], by: RankKey, b_filter: Option<(f64, f64)>) -> Vec<PatchReport> {
    let key = |r: &PatchReport| match by {
        RankKey::MoranI => r.moran_i,
        RankKey::SelfInformation => r.self_information,
    };
    let mut kept: Vec<(f64, &PatchReport)> = reports
        .iter()
        .filter(|r| b_filter.is_none_or(|(lo, hi)| r.b >= lo && r.b <= hi))
        .filter_map(|r| key(r).map(|k| (k, r)))
        .collect();
    kept.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.id.cmp(&b.1.id)));
    kept.into_iter().map(|(_, r)| r.clone()).collect()
}

/// For consecutive reports in surprisal order, how many times easier the
/// earlier one is to observe than the next: `exp(J_next − J_this)`.
pub fn ease_ratios(ranked: &[PatchReport]) -> Vec<f64> {
    ranked
        .windows(2)
        .filter_map(|w| Some((w[1].self_information? - w[0].self_information?).exp()))
        .collect()
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_reports_csv<W: Write>(reports: &[PatchReport], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "tile_row", "tile_col", "patch_row", "patch_col", "m", "b", "moran_i", "i_bar", "mu_t", "sigma_t",
        "self_information", "tail_p", "flag",
    ])?;
    for r in reports {
        out.write_record([
            r.id.tile_row.to_string(),
            r.id.tile_col.to_string(),
            r.id.patch_row.to_string(),
            r.id.patch_col.to_string(),
            r.m.to_string(),
            r.b.to_string(),
            opt(r.moran_i),
            opt(r.i_bar),
            opt(r.mu_t),
            opt(r.sigma_t),
            opt(r.self_information),
            opt(r.tail_p),
            r.flag.clone().unwrap_or_default(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_reports_json<W: Write>(reports: &[PatchReport], w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, reports)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn here() -> &'static Path {
        Path::new("<memory>")
    }

    fn id0() -> PatchId {
        PatchId { tile_row: 0, tile_col: 0, patch_row: 0, patch_col: 0 }
    }

    #[test]
    fn csv_parse() {
        let g = RasterGrid::read_csv("1,2\n3,4".as_bytes(), here()).unwrap();
        assert_eq!((g.rows(), g.cols(), g.data()), (2, 2, &[1.0, 2.0, 3.0, 4.0][..]));
        assert_eq!(g.value_range(), Some((1.0, 4.0)));
        assert!(matches!(RasterGrid::read_csv("1,2\n3".as_bytes(), here()), Err(Error::Format { .. })));
        assert!(matches!(RasterGrid::read_csv("1,x".as_bytes(), here()), Err(Error::Format { .. })));
        assert!(matches!(RasterGrid::read_csv("".as_bytes(), here()), Err(Error::Format { .. })));
    }

    #[test]
    fn flat_binary_layout_and_round_trip() {
        let g = RasterGrid::new(2, 3, vec![0.0, 1.0, 2.0, 253.0, 254.0, 255.0]).unwrap();
        let mut buf = Vec::new();
        g.write_flat_binary(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"SRAS");
        assert_eq!(&buf[4..12], &[2, 0, 0, 0, 3, 0, 0, 0]);
        assert_eq!(&buf[12..], &[0, 1, 2, 253, 254, 255]);
        assert_eq!(RasterGrid::read_flat_binary(&buf[..], here()).unwrap(), g);

        let short = &buf[..buf.len() - 1];
        assert!(matches!(RasterGrid::read_flat_binary(short, here()), Err(Error::Format { .. })));
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(RasterGrid::read_flat_binary(&bad[..], here()), Err(Error::Format { .. })));
        assert!(RasterGrid::new(1, 1, vec![256.0]).unwrap().write_flat_binary(Vec::new()).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let g = RasterGrid::new(2, 2, vec![0.5, -1.25, 3.0, 1e-7]).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        assert_eq!(RasterGrid::read_csv(&buf[..], here()).unwrap(), g);
    }

    #[test]
    fn tiling_counts() {
        let r = RasterGrid::new(100, 100, vec![0.0; 10_000]).unwrap();
        assert_eq!(tile(&r, 100, 50).unwrap().count(), 4);
        let r = RasterGrid::new(999, 1000, vec![0.0; 999_000]).unwrap();
        assert_eq!(tile(&r, 1000, 50).unwrap().count(), 0);
        assert!(matches!(tile(&r, 100, 30), Err(Error::InvalidTiling(_))));
        assert!(matches!(tile(&r, 0, 0), Err(Error::InvalidTiling(_))));
    }

    #[test]
    fn tiling_order_and_content() {
        let data: Vec<f64> = (0..36).map(f64::from).collect();
        let r = RasterGrid::new(6, 6, data).unwrap();
        let patches: Vec<Patch> = tile(&r, 3, 1).unwrap().collect();
        assert_eq!(patches.len(), 36);
        // first tile is rows 0..3, cols 0..3, in row-major order
        let firsts: Vec<f64> = patches[..9].iter().map(|p| p.grid.get(0, 0)).collect();
        assert_eq!(firsts, vec![0.0, 1.0, 2.0, 6.0, 7.0, 8.0, 12.0, 13.0, 14.0]);
        assert_eq!(patches[9].id, PatchId { tile_row: 0, tile_col: 1, patch_row: 0, patch_col: 0 });
        let two: Vec<Patch> = tile(&r, 6, 2).unwrap().collect();
        assert_eq!(two[1].grid.data(), &[2.0, 3.0, 8.0, 9.0]);
    }

    #[test]
    fn constant_patch_is_flagged() {
        let p = RasterGrid::new(50, 50, vec![0.0; 2500]).unwrap();
        let rep = analyze_patch(id0(), &p, &PatchOptions::default()).unwrap();
        assert!(rep.is_flagged());
        assert!(rep.flag.as_deref().unwrap().contains("zero variance"));
        assert_eq!(rep.b, 1.0);
        assert_eq!(rep.moran_i, None);
    }

    #[test]
    fn checkerboard_patch() {
        let data = (0..2500).map(|i| if (i / 50 + i % 50) % 2 == 0 { 5.0 } else { 15.0 }).collect();
        let p = RasterGrid::new(50, 50, data).unwrap();
        let opts = PatchOptions { bin_width: 10.0, ..PatchOptions::default() };
        let rep = analyze_patch(id0(), &p, &opts).unwrap();
        let i = rep.moran_i.unwrap();
        assert!((-1.0..=-0.9).contains(&i), "{i}");
        assert_eq!((rep.m, rep.b), (2, 0.5));
        // an even two-value split leaves the approximate variance at zero
        assert!(rep.flag.as_deref().unwrap().contains("degenerate"));
        assert_eq!(rep.self_information, None);
    }

    #[test]
    fn scored_patch_respects_density_bound() {
        let data = (0..2500).map(|i| if i % 7 == 0 { 15.0 } else if i % 11 == 0 { 25.0 } else { 5.0 }).collect();
        let p = RasterGrid::new(50, 50, data).unwrap();
        let opts = PatchOptions { bin_width: 10.0, ..PatchOptions::default() };
        let rep = analyze_patch(id0(), &p, &opts).unwrap();
        assert!(!rep.is_flagged(), "{:?}", rep.flag);
        let (j, sigma) = (rep.self_information.unwrap(), rep.sigma_t.unwrap());
        assert!(j >= (sigma * (2.0 * std::f64::consts::PI).sqrt()).ln());
        assert!(rep.b > 0.0 && rep.b <= 1.0);
        assert!((0.0..=1.0).contains(&rep.tail_p.unwrap()));
    }

    fn report(id: usize, b: f64, i: f64, j: f64) -> PatchReport {
        PatchReport {
            id: PatchId { tile_row: 0, tile_col: 0, patch_row: 0, patch_col: id },
            m: 3,
            b,
            moran_i: Some(i),
            i_bar: Some(i),
            mu_t: Some(0.0),
            sigma_t: Some(1.0),
            self_information: Some(j),
            tail_p: Some(0.5),
            flag: None,
        }
    }

    #[test]
    fn ranking_by_surprisal_and_ease() {
        let reports = vec![report(0, 0.6, 0.2, 15.22), report(1, 0.6, 0.3, 14.91)];
        let by_j = rank_patches(&reports, RankKey::SelfInformation, None);
        assert_eq!(by_j[0].self_information, Some(14.91));
        let ease = ease_ratios(&by_j);
        assert!((ease[0] - 1.363).abs() < 1e-3);
        // the two orders differ here
        let by_i = rank_patches(&reports, RankKey::MoranI, None);
        assert_eq!(by_i[0].id.patch_col, 0);
        assert_eq!(rank_patches(&reports[..1], RankKey::MoranI, None).len(), 1);
    }

    #[test]
    fn ranking_filters_and_breaks_ties_by_id() {
        let mut flagged = report(5, 0.6, 0.0, 0.0);
        flagged.flag = Some("zero variance".into());
        flagged.moran_i = None;
        flagged.self_information = None;
        let reports = vec![report(3, 0.6, 0.1, 2.0), report(1, 0.6, 0.1, 2.0), report(2, 0.9, -1.0, 1.0), flagged];
        let ranked = rank_patches(&reports, RankKey::MoranI, Some((0.55, 0.65)));
        let ids: Vec<usize> = ranked.iter().map(|r| r.id.patch_col).collect();
        assert_eq!(ids, vec![1, 3]);
        assert_eq!(rank_patches(&reports, RankKey::SelfInformation, None).len(), 3);
    }

    #[test]
    fn batch_is_worker_independent() {
        let data: Vec<f64> = (0..40 * 40).map(|i| ((i * 7919) % 23) as f64).collect();
        let r = RasterGrid::new(40, 40, data).unwrap();
        let opts = PatchOptions { bin_width: 8.0, ..PatchOptions::default() };
        let a = analyze_raster(&r, 20, 10, &opts, 1).unwrap();
        let b = analyze_raster(&r, 20, 10, &opts, 4).unwrap();
        assert_eq!(a.len(), 16);
        assert_eq!(a, b);
        let mut csv_out = Vec::new();
        write_reports_csv(&a, &mut csv_out).unwrap();
        assert_eq!(String::from_utf8(csv_out).unwrap().lines().count(), 17);
    }
}
