//! Binary spatial weights as directed graphs.
//!
//! `w_ij = 1` is stored as the directed edge `(i, j)`. Grids are symmetric,
//! but the perturbations flip individual matrix entries and may leave the
//! graph asymmetric, so nothing downstream assumes symmetry.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Contiguity {
    /// Edge-sharing 4-neighbourhood.
    #[default]
    Rook,
    /// Edge- and corner-sharing 8-neighbourhood.
    Queen,
}

impl Contiguity {
    pub fn degree(self) -> usize {
        match self {
            Contiguity::Rook => 4,
            Contiguity::Queen => 8,
        }
    }

    fn offsets(self) -> &'static [(isize, isize)] {
        const ROOK: [(isize, isize); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];
        const QUEEN: [(isize, isize); 8] =
            [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];
        match self {
            Contiguity::Rook => &ROOK,
            Contiguity::Queen => &QUEEN,
        }
    }
}

impl fmt::Display for Contiguity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Contiguity::Rook => "rook",
            Contiguity::Queen => "queen",
        })
    }
}

impl FromStr for Contiguity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rook" => Ok(Contiguity::Rook),
            "queen" => Ok(Contiguity::Queen),
            other => Err(Error::Parse(format!("unknown contiguity '{other}' (expected rook|queen)"))),
        }
    }
}

/// Grid boundary handling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    /// Wrap-around neighbours: exactly regular.
    Torus,
    /// Border and corner cells lose neighbours.
    #[default]
    Bounded,
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "torus" => Ok(Topology::Torus),
            "bounded" => Ok(Topology::Bounded),
            other => Err(Error::Parse(format!("unknown topology '{other}' (expected torus|bounded)"))),
        }
    }
}

/// Directed binary weight graph in compressed-row form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightGraph {
    n: usize,
    k_nominal: usize,
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl WeightGraph {
    /// Builds a graph from directed edges. Self-loops, out-of-range endpoints
    /// and duplicate edges are rejected.
    pub fn from_edges<I>(n: usize, k_nominal: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n > u32::MAX as usize {
            return Err(Error::InvalidDimension { rows: n, cols: 1, min: 1 });
        }
        let mut edges: Vec<(usize, usize)> = edges.into_iter().collect();
        for &(i, j) in &edges {
            if i >= n || j >= n {
                return Err(Error::InvalidEdge { from: i, to: j, reason: "endpoint out of range" });
            }
            if i == j {
                return Err(Error::InvalidEdge { from: i, to: j, reason: "self-loop" });
            }
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidEdge { from: w[0].0, to: w[0].1, reason: "duplicate edge" });
        }

        let mut offsets = vec![0usize; n + 1];
        for &(i, _) in &edges {
            offsets[i + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let targets = edges.iter().map(|&(_, j)| j as u32).collect();
        Ok(Self { n, k_nominal, offsets, targets })
    }

    /// Grid with wrap-around adjacency; every vertex has exactly
    /// `contiguity.degree()` out-neighbours.
    pub fn torus(rows: usize, cols: usize, contiguity: Contiguity) -> Result<Self> {
        if rows < 3 || cols < 3 {
            return Err(Error::InvalidDimension { rows, cols, min: 3 });
        }
        Self::grid(rows, cols, contiguity, true)
    }

    /// Grid without wrap-around; border cells have fewer neighbours and
    /// `delta_n()` is negative.
    pub fn bounded(rows: usize, cols: usize, contiguity: Contiguity) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::InvalidDimension { rows, cols, min: 2 });
        }
        Self::grid(rows, cols, contiguity, false)
    }

    pub fn grid_with(rows: usize, cols: usize, contiguity: Contiguity, topology: Topology) -> Result<Self> {
        match topology {
            Topology::Torus => Self::torus(rows, cols, contiguity),
            Topology::Bounded => Self::bounded(rows, cols, contiguity),
        }
    }

    fn grid(rows: usize, cols: usize, contiguity: Contiguity, wrap: bool) -> Result<Self> {
        let n = rows * cols;
        let mut edges = Vec::with_capacity(n * contiguity.degree());
        for r in 0..rows {
            for c in 0..cols {
                let i = r * cols + c;
                for &(dr, dc) in contiguity.offsets() {
                    let (rr, cc) = (r as isize + dr, c as isize + dc);
                    let (rr, cc) = if wrap {
                        (rr.rem_euclid(rows as isize), cc.rem_euclid(cols as isize))
                    } else if rr < 0 || cc < 0 || rr >= rows as isize || cc >= cols as isize {
                        continue;
                    } else {
                        (rr, cc)
                    };
                    edges.push((i, rr as usize * cols + cc as usize));
                }
            }
        }
        Self::from_edges(n, contiguity.degree(), edges)
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn k_nominal(&self) -> usize {
        self.k_nominal
    }

    pub fn total_edges(&self) -> usize {
        self.targets.len()
    }

    /// `total_edges − k·N`.
    pub fn delta_n(&self) -> i64 {
        self.total_edges() as i64 - (self.k_nominal * self.n) as i64
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        i < self.n && self.neighbors(i).binary_search(&(j as u32)).is_ok()
    }

    /// Directed edges in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| self.neighbors(i).iter().map(move |&j| (i, j as usize)))
    }

    pub fn is_symmetric(&self) -> bool {
        self.edges().all(|(i, j)| self.contains(j, i))
    }

    fn absent_entries(&self) -> usize {
        self.n * self.n.saturating_sub(1) - self.total_edges()
    }

    /// Draws `count` distinct absent off-diagonal entries uniformly.
    fn sample_absent<R: Rng>(&self, count: usize, rng: &mut R) -> Vec<(usize, usize)> {
        let absent = self.absent_entries();
        debug_assert!(count <= absent);
        if count == 0 {
            return Vec::new();
        }
        // Rejection sampling is cheap while the matrix is sparse; fall back
        // to explicit enumeration for dense graphs.
        if 4 * absent >= self.n * (self.n - 1) {
            let mut picked = HashSet::with_capacity(count);
            let mut out = Vec::with_capacity(count);
            while out.len() < count {
                let i = rng.random_range(0..self.n);
                let j = rng.random_range(0..self.n);
                if i != j && !self.contains(i, j) && picked.insert((i, j)) {
                    out.push((i, j));
                }
            }
            out
        } else {
            let candidates: Vec<(usize, usize)> = (0..self.n)
                .flat_map(|i| (0..self.n).map(move |j| (i, j)))
                .filter(|&(i, j)| i != j && !self.contains(i, j))
                .collect();
            index::sample(rng, candidates.len(), count).into_iter().map(|ix| candidates[ix]).collect()
        }
    }

    /// Flips `⌊ρ·k·N⌋` present entries to 0 and as many absent entries to 1,
    /// keeping the total edge count.
    pub fn perturb_balanced(&self, rho: f64, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::PerturbationInfeasible(format!("rate {rho} outside [0, 1)")));
        }
        let flips = (rho * (self.k_nominal * self.n) as f64 + 1e-9).floor() as usize;
        if flips > self.total_edges() || flips > self.absent_entries() {
            return Err(Error::PerturbationInfeasible(format!(
                "{flips} flips with {} edges and {} absent entries",
                self.total_edges(),
                self.absent_entries()
            )));
        }
        if flips == 0 {
            return Ok(self.clone());
        }
        let mut rng = rng::seeded(seed);
        let all: Vec<(usize, usize)> = self.edges().collect();
        let mut removed = vec![false; all.len()];
        for ix in index::sample(&mut rng, all.len(), flips) {
            removed[ix] = true;
        }
        let added = self.sample_absent(flips, &mut rng);
        let kept = all.into_iter().zip(removed).filter(|(_, r)| !r).map(|(e, _)| e);
        Self::from_edges(self.n, self.k_nominal, kept.chain(added))
    }

    /// Adds (`delta > 0`) or removes (`delta < 0`) `|delta|` directed edges
    /// chosen uniformly at random.
    pub fn perturb_systematic(&self, delta: i64, seed: u64) -> Result<Self> {
        let total = self.total_edges() as i64;
        if delta < -total || delta > self.absent_entries() as i64 {
            return Err(Error::PerturbationInfeasible(format!(
                "delta {delta} with {total} edges and {} absent entries",
                self.absent_entries()
            )));
        }
        if delta == 0 {
            return Ok(self.clone());
        }
        let mut rng = rng::seeded(seed);
        let mut edges: Vec<(usize, usize)> = self.edges().collect();
        if delta > 0 {
            edges.extend(self.sample_absent(delta as usize, &mut rng));
        } else {
            let mut drop = vec![false; edges.len()];
            for ix in index::sample(&mut rng, edges.len(), delta.unsigned_abs() as usize) {
                drop[ix] = true;
            }
            edges = edges.into_iter().zip(drop).filter(|(_, d)| !d).map(|(e, _)| e).collect();
        }
        Self::from_edges(self.n, self.k_nominal, edges)
    }

    /// Writes the edge-list format: header `N k_nominal`, then one `i j`
    /// line per directed edge in row-major order.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {}", self.n, self.k_nominal)?;
        for (i, j) in self.edges() {
            writeln!(w, "{i} {j}")?;
        }
        Ok(())
    }

    pub fn read_edge_list<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty edge list".into()))??;
        let mut it = header.split_whitespace();
        let parse = |tok: Option<&str>, what: &str| -> Result<usize> {
            tok.ok_or_else(|| Error::Parse(format!("missing {what}")))?
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("bad {what}: {e}")))
        };
        let n = parse(it.next(), "vertex count")?;
        let k = parse(it.next(), "nominal degree")?;
        let mut edges = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            edges.push((parse(it.next(), "edge source")?, parse(it.next(), "edge target")?));
        }
        Self::from_edges(n, k, edges)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_edge_list(std::io::BufWriter::new(f))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_edge_list(std::io::BufReader::new(f))
    }
}
