//! Synthetic alignment problems: random geometric reference graphs, two
//! independent noisy copies, and a hidden relabeling of the second copy.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::warn;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::eigen::derive_seeds;
use crate::error::{Error, Result};
use crate::matching::parse_pair;
use crate::motifs::{read_edge_list, write_edge_list, Graph};

/// Location parameter of the per-point neighbour count, `ln 5`.
pub fn rgg_mu() -> f64 {
    5f64.ln()
}

pub const RGG_SIGMA: f64 = 1.0;

/// Per-point neighbour count: `round_half_up(LogNormal(ln 5, 1))` clamped to
/// `[1, n − 1]`.
fn draw_degree<R: Rng + ?Sized>(rng: &mut R, n: usize) -> usize {
    let d = LogNormal::new(rgg_mu(), RGG_SIGMA).expect("valid lognormal");
    let x: f64 = d.sample(rng);
    let k = (x + 0.5).floor();
    let k = if k.is_finite() { k as usize } else { usize::MAX };
    k.clamp(1, n - 1)
}

/// Random geometric graph: `n` uniform points in the unit square, each joined
/// to its own number of nearest neighbours; duplicate edges merge.
pub fn rgg(n: usize, seed: u64) -> Graph {
    if n < 2 {
        return Graph::empty(n);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random(), rng.random())).collect();
    let mut pairs = Vec::new();
    let mut dist: Vec<(f64, usize)> = Vec::with_capacity(n);
    for i in 0..n {
        let k = draw_degree(&mut rng, n);
        dist.clear();
        dist.extend((0..n).filter(|&j| j != i).map(|j| {
            let dx = pts[i].0 - pts[j].0;
            let dy = pts[i].1 - pts[j].1;
            (dx * dx + dy * dy, j)
        }));
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < dist.len() {
            dist.select_nth_unstable_by(k, cmp);
        }
        pairs.extend(dist[..k].iter().map(|&(_, j)| (i, j)));
    }
    Graph::new(n, pairs).expect("indices in range")
}

/// Expected clamped neighbour count `E[clamp(round(LogNormal), 1, n − 1)]` by
/// Monte Carlo.
pub fn expected_rgg_degree_draw(n: usize, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples).map(|_| draw_degree(&mut rng, n) as f64).sum::<f64>() / samples as f64
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("{name} must be in [0, 1], got {p}")));
    }
    Ok(())
}

/// Deletes each edge with probability `p` and adds each non-edge with
/// probability `q = pρ/(1−ρ)`, `ρ` the input density, so the expected edge
/// count is unchanged. A complete graph gets `q = 0`.
pub fn er_noise(g: &Graph, p: f64, seed: u64) -> Result<Graph> {
    check_probability("p", p)?;
    let n = g.n();
    if n < 2 {
        return Ok(g.clone());
    }
    let rho = g.density();
    let q = if rho >= 1.0 {
        warn!("complete graph: no non-edges to add, using q = 0");
        0.0
    } else {
        p * rho / (1.0 - rho)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(g.num_edges());
    for (u, v) in g.edges() {
        if rng.random::<f64>() >= p {
            pairs.push((u, v));
        }
    }
    if q > 0.0 {
        for u in 0..n {
            for v in u + 1..n {
                if !g.has_edge(u, v) && rng.random::<f64>() < q {
                    pairs.push((u, v));
                }
            }
        }
    }
    Graph::new(n, pairs)
}

/// Appends `⌈frac·n⌉` vertices; each copies the current edges of a uniformly
/// chosen existing vertex (earlier copies included), keeping each edge with
/// probability `p_edge`.
pub fn duplication_noise(g: &Graph, frac: f64, p_edge: f64, seed: u64) -> Result<Graph> {
    if !(frac >= 0.0 && frac.is_finite()) {
        return Err(Error::InvalidArgument(format!("frac must be ≥ 0, got {frac}")));
    }
    check_probability("p_edge", p_edge)?;
    let mut out = g.clone();
    if g.n() == 0 {
        return Ok(out);
    }
    let count = (frac * g.n() as f64).ceil() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..count {
        let src = rng.random_range(0..out.n());
        let nbrs: Vec<usize> = out
            .neighbors(src)
            .iter()
            .copied()
            .filter(|_| rng.random::<f64>() < p_edge)
            .collect();
        out.add_vertex(&nbrs);
    }
    Ok(out)
}

/// Uniform relabeling; vertex `v` becomes `perm[v]`.
pub fn permute(g: &Graph, seed: u64) -> (Graph, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..g.n()).collect();
    perm.shuffle(&mut rng);
    (g.relabel(&perm), perm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum NoiseModel {
    Er { p: f64 },
    Duplication { frac: f64, p_edge: f64 },
}

impl NoiseModel {
    pub fn er_default() -> Self {
        NoiseModel::Er { p: 0.05 }
    }

    pub fn duplication_default() -> Self {
        NoiseModel::Duplication {
            frac: 0.25,
            p_edge: 0.5,
        }
    }

    pub fn apply(&self, g: &Graph, seed: u64) -> Result<Graph> {
        match *self {
            NoiseModel::Er { p } => er_noise(g, p, seed),
            NoiseModel::Duplication { frac, p_edge } => duplication_noise(g, frac, p_edge, seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub n: usize,
    pub noise: NoiseModel,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentProblem {
    pub graph_a: Graph,
    pub graph_b: Graph,
    /// `truth[i]` is the B-vertex of reference vertex `i` of A.
    pub truth: Vec<usize>,
    pub provenance: Provenance,
}

/// One RGG reference graph, two independent noisy copies, the second one
/// relabeled uniformly at random.
pub fn make_problem(n: usize, noise: NoiseModel, seed: u64) -> Result<AlignmentProblem> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let s = derive_seeds(seed, 4);
    let reference = rgg(n, s[0]);
    let graph_a = noise.apply(&reference, s[1])?;
    let noisy_b = noise.apply(&reference, s[2])?;
    let (graph_b, perm) = permute(&noisy_b, s[3]);
    let truth = perm[..n].to_vec();
    Ok(AlignmentProblem {
        graph_a,
        graph_b,
        truth,
        provenance: Provenance {
            generator: "rgg".into(),
            n,
            noise,
            seed,
        },
    })
}

/// Two 1-based columns `A-id B-id`, one reference vertex per line.
pub fn write_truth<W: Write>(truth: &[usize], mut w: W) -> Result<()> {
    writeln!(w, "# a b")?;
    for (i, &j) in truth.iter().enumerate() {
        writeln!(w, "{} {}", i + 1, j + 1)?;
    }
    Ok(())
}

/// Reads a truth file. Rows must cover A-ids `1..=len` exactly once.
pub fn read_truth<R: BufRead>(reader: R) -> Result<Vec<usize>> {
    let mut rows = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        rows.push(parse_pair(t, idx + 1)?);
    }
    rows.sort_unstable();
    let mut truth = Vec::with_capacity(rows.len());
    for (pos, &(i, j)) in rows.iter().enumerate() {
        if i != pos {
            return Err(Error::Parse {
                line: 0,
                message: format!("truth rows must cover A-ids 1..={} once", rows.len()),
            });
        }
        truth.push(j);
    }
    let mut seen = truth.clone();
    seen.sort_unstable();
    if seen.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Parse {
            line: 0,
            message: "truth maps two vertices to the same B-id".into(),
        });
    }
    Ok(truth)
}

/// Paths of the four files of a stored problem.
pub fn problem_paths(dir: &Path, stem: &str) -> [PathBuf; 4] {
    [
        dir.join(format!("{stem}_a.el")),
        dir.join(format!("{stem}_b.el")),
        dir.join(format!("{stem}_truth.txt")),
        dir.join(format!("{stem}_provenance.json")),
    ]
}

pub fn write_problem(p: &AlignmentProblem, dir: &Path, stem: &str) -> Result<()> {
    let [a, b, t, prov] = problem_paths(dir, stem);
    write_edge_list(&p.graph_a, BufWriter::new(File::create(a)?))?;
    write_edge_list(&p.graph_b, BufWriter::new(File::create(b)?))?;
    write_truth(&p.truth, BufWriter::new(File::create(t)?))?;
    let mut w = BufWriter::new(File::create(prov)?);
    serde_json::to_writer_pretty(&mut w, &p.provenance)?;
    writeln!(w)?;
    Ok(())
}

pub fn read_problem(dir: &Path, stem: &str) -> Result<AlignmentProblem> {
    let [a, b, t, prov] = problem_paths(dir, stem);
    Ok(AlignmentProblem {
        graph_a: read_edge_list(BufReader::new(File::open(a)?))?,
        graph_b: read_edge_list(BufReader::new(File::open(b)?))?,
        truth: read_truth(BufReader::new(File::open(t)?))?,
        provenance: serde_json::from_reader(BufReader::new(File::open(prov)?))?,
    })
}
