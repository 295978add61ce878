//! Maximum-weight bipartite matching on dense score matrices, and alignment
//! quality counts.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::motifs::Graph;
use crate::tensor::MotifTensor;

/// Partial injection between the vertices of `A` (rows) and `B` (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// `(i, i′)` pairs sorted by `i`.
    pairs: Vec<(usize, usize)>,
    pub weight: f64,
}

impl Matching {
    /// Validates that no row or column repeats.
    pub fn new(mut pairs: Vec<(usize, usize)>, weight: f64) -> Result<Self> {
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::ContractViolation("row matched twice".into()));
        }
        let mut cols: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        cols.sort_unstable();
        if cols.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::ContractViolation("column matched twice".into()));
        }
        Ok(Self { pairs, weight })
    }

    /// Matching whose weight is `Σ X(i, i′)` over its pairs.
    pub fn with_weights(pairs: Vec<(usize, usize)>, x: &DMatrix<f64>) -> Result<Self> {
        let mut m = Self::new(pairs, 0.0)?;
        m.weight = m.pairs.iter().map(|&(i, j)| x[(i, j)]).sum();
        Ok(m)
    }

    pub fn empty() -> Self {
        Self {
            pairs: Vec::new(),
            weight: 0.0,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            pairs: (0..n).map(|i| (i, i)).collect(),
            weight: n as f64,
        }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Row → column lookup for rows `0..m`.
    pub fn forward(&self, m: usize) -> Vec<Option<usize>> {
        let mut f = vec![None; m];
        for &(i, j) in &self.pairs {
            if i < m {
                f[i] = Some(j);
            }
        }
        f
    }
}

/// Exact maximum-weight matching of a dense `m × n` matrix (shortest
/// augmenting paths with potentials, `O(min² · max)`).
///
/// Only pairs with strictly positive weight are kept, so negative entries
/// are never forced; with an all-positive matrix the matching has
/// `min(m, n)` pairs. Ties go to the first optimum found by the row-major,
/// lowest-index-first scan.
pub fn max_weight_matching(x: &DMatrix<f64>) -> Result<Matching> {
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::NumericalFailure("matching input has non-finite entries".into()));
    }
    let (m, n) = x.shape();
    if m == 0 || n == 0 {
        return Ok(Matching::empty());
    }
    let transposed = m > n;
    let (rows, cols) = if transposed { (n, m) } else { (m, n) };
    // row-major costs for the minimization form
    let mut cost = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            let v = if transposed { x[(c, r)] } else { x[(r, c)] };
            cost[r * cols + c] = -v.max(0.0);
        }
    }
    let assign = hungarian(&cost, rows, cols);
    let mut pairs = Vec::with_capacity(rows);
    for (c, &r) in assign.iter().enumerate() {
        if let Some(r) = r {
            let (i, j) = if transposed { (c, r) } else { (r, c) };
            if x[(i, j)] > 0.0 {
                pairs.push((i, j));
            }
        }
    }
    Matching::with_weights(pairs, x)
}

/// Min-cost assignment of every row (`rows ≤ cols`). Returns the row assigned
/// to each column.
fn hungarian(cost: &[f64], rows: usize, cols: usize) -> Vec<Option<usize>> {
    const INF: f64 = f64::INFINITY;
    // 1-based with a virtual column 0
    let mut u = vec![0.0; rows + 1];
    let mut v = vec![0.0; cols + 1];
    let mut p = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    let mut minv = vec![INF; cols + 1];
    let mut used = vec![false; cols + 1];
    for i in 1..=rows {
        p[0] = i;
        let mut j0 = 0usize;
        minv.iter_mut().for_each(|m| *m = INF);
        used.iter_mut().for_each(|f| *f = false);
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let row = &cost[(i0 - 1) * cols..i0 * cols];
            let ui0 = u[i0];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=cols {
                if used[j] {
                    continue;
                }
                let cur = row[j - 1] - ui0 - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=cols)
        .map(|j| if p[j] == 0 { None } else { Some(p[j] - 1) })
        .collect()
}

/// Greedy matching by descending positive weight. A lower bound for tests.
pub fn greedy_matching(x: &DMatrix<f64>) -> Matching {
    let (m, n) = x.shape();
    let mut entries: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..m {
        for j in 0..n {
            if x[(i, j)] > 0.0 {
                entries.push((x[(i, j)], i, j));
            }
        }
    }
    entries.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut row_used = vec![false; m];
    let mut col_used = vec![false; n];
    let mut pairs = Vec::new();
    for (_, i, j) in entries {
        if !row_used[i] && !col_used[j] {
            row_used[i] = true;
            col_used[j] = true;
            pairs.push((i, j));
        }
    }
    Matching::with_weights(pairs, x).expect("greedy matching is feasible")
}

/// Hyperedges of `A` whose vertices are all matched and whose image is a
/// hyperedge of `B` (unordered count).
pub fn motifs_aligned(mt: &Matching, ta: &MotifTensor, tb: &MotifTensor) -> usize {
    assert_eq!(ta.order(), tb.order(), "motif tensors must share an order");
    let fwd = mt.forward(ta.dim());
    let mut img = vec![0usize; ta.order()];
    ta.hyperedges()
        .filter(|e| {
            for (slot, &v) in img.iter_mut().zip(e.iter()) {
                match fwd[v] {
                    Some(j) => *slot = j,
                    None => return false,
                }
            }
            img.sort_unstable();
            tb.find(&img).is_some()
        })
        .count()
}

/// Edges of `A` mapped onto edges of `B`.
pub fn edges_aligned(mt: &Matching, a: &Graph, b: &Graph) -> usize {
    let fwd = mt.forward(a.n());
    a.edges()
        .filter(|&(u, v)| match (fwd[u], fwd[v]) {
            (Some(x), Some(y)) => b.has_edge(x, y),
            _ => false,
        })
        .count()
}

/// Fraction of reference vertices `i` with `(i, truth[i])` in the matching.
pub fn accuracy(mt: &Matching, truth: &[usize]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let fwd = mt.forward(truth.len());
    let hits = truth
        .iter()
        .enumerate()
        .filter(|&(i, &t)| fwd[i] == Some(t))
        .count();
    hits as f64 / truth.len() as f64
}

/// `# weight <w>` header then one 1-based `i i′` pair per line.
pub fn write_matching<W: Write>(mt: &Matching, mut w: W) -> Result<()> {
    writeln!(w, "# weight {:?}", mt.weight)?;
    for &(i, j) in &mt.pairs {
        writeln!(w, "{} {}", i + 1, j + 1)?;
    }
    Ok(())
}

pub fn read_matching<R: BufRead>(reader: R) -> Result<Matching> {
    let mut weight = 0.0;
    let mut pairs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(rest) = t.strip_prefix('#') {
            let mut it = rest.split_whitespace();
            if it.next() == Some("weight") {
                weight = it.next().and_then(|s| s.parse().ok()).ok_or(Error::Parse {
                    line: idx + 1,
                    message: "bad weight header".into(),
                })?;
            }
            continue;
        }
        let ids = parse_pair(t, idx + 1)?;
        pairs.push(ids);
    }
    Matching::new(pairs, weight)
}

pub(crate) fn parse_pair(t: &str, line: usize) -> Result<(usize, usize)> {
    let f: Vec<&str> = t.split_whitespace().collect();
    if f.len() != 2 {
        return Err(Error::Parse {
            line,
            message: "expected two columns".into(),
        });
    }
    let p = |s: &str| -> Result<usize> {
        match s.parse::<usize>() {
            Ok(v) if v >= 1 => Ok(v - 1),
            _ => Err(Error::Parse {
                line,
                message: format!("bad 1-based id `{s}`"),
            }),
        }
    };
    Ok((p(f[0])?, p(f[1])?))
}
