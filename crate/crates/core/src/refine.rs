//! Local-search refinement of a matching, with candidates drawn from graph
//! neighbourhoods and nearest neighbours in the factor embedding.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::align::{rank_reveal, FactorPair, DEFAULT_TRUNC_TOL};
use crate::error::{Error, Result};
use crate::matching::Matching;
use crate::motifs::Graph;
use crate::tensor::MotifTensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Knn {
    /// Twice the numerical rank of `U·Vᵀ`.
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineOptions {
    pub knn: Knn,
    pub max_sweeps: usize,
    /// Cutoff used to measure the rank for [`Knn::Auto`].
    pub trunc_tol: f64,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self {
            knn: Knn::Auto,
            max_sweeps: 10,
            trunc_tol: DEFAULT_TRUNC_TOL,
        }
    }
}

/// The `k` rows of `f` nearest to row `row` in 2-norm, excluding `row`
/// itself, nearest first. Equal distances go to the lower index.
pub fn knn_embedding_neighbors(f: &DMatrix<f64>, row: usize, k: usize) -> Result<Vec<usize>> {
    let rows = f.nrows();
    if row >= rows {
        return Err(Error::InvalidArgument(format!("row {row} out of range 0..{rows}")));
    }
    if k == 0 || k >= rows {
        return Err(Error::InvalidArgument(format!(
            "K must be in 1..{rows}, got {k}"
        )));
    }
    Ok(knn_unchecked(f, row, k))
}

fn knn_unchecked(f: &DMatrix<f64>, row: usize, k: usize) -> Vec<usize> {
    let rows = f.nrows();
    let mut d: Vec<(f64, usize)> = (0..rows)
        .filter(|&j| j != row)
        .map(|j| {
            let mut s = 0.0;
            for c in 0..f.ncols() {
                let t = f[(j, c)] - f[(row, c)];
                s += t * t;
            }
            (s, j)
        })
        .collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < d.len() {
        d.select_nth_unstable_by(k, cmp);
        d.truncate(k);
    }
    d.sort_by(cmp);
    d.into_iter().map(|(_, j)| j).collect()
}

/// Resolved neighbour count: `Fixed(K)` as given, `Auto` as `2·rank(U·Vᵀ)`.
pub fn resolve_knn(factors: &FactorPair, opts: &RefineOptions) -> Result<usize> {
    match opts.knn {
        Knn::Fixed(k) => Ok(k),
        Knn::Auto => {
            let r = rank_reveal(&factors.u, &factors.v, opts.trunc_tol)?.rank();
            Ok((2 * r).max(1))
        }
    }
}

/// Outcome of [`local_search_report`]. Scores are `(motifs, edges)` aligned.
#[derive(Debug, Clone, PartialEq)]
pub struct RefineReport {
    pub matching: Matching,
    pub before: (usize, usize),
    pub after: (usize, usize),
    pub sweeps: usize,
    pub swaps: usize,
    pub knn: usize,
}

/// Greedy match-swapping that never lowers `(motifs, edges)` aligned.
pub fn local_search(
    mt: &Matching,
    a: &Graph,
    b: &Graph,
    ta: &MotifTensor,
    tb: &MotifTensor,
    factors: &FactorPair,
    opts: &RefineOptions,
) -> Result<Matching> {
    local_search_report(mt, a, b, ta, tb, factors, opts).map(|r| r.matching)
}

/// [`local_search`] with before/after scores and move counts.
///
/// Matched pairs are visited in descending `X*(i, i′) = U(i,:)·V(i′,:)` order.
/// For a pair `(i, i′)` the candidates are `(i, j′)` for `j′` among the K
/// nearest rows to `V(i′,:)` or the `B`-neighbours of `i′`, then `(j, i′)` for
/// `j` among the K nearest rows to `U(i,:)` or the `A`-neighbours of `i`. A
/// candidate whose other end is already matched becomes a 2-swap. The first
/// move that raises motifs, or keeps motifs and raises edges, is applied and
/// the sweep moves to the next pair.
pub fn local_search_report(
    mt: &Matching,
    a: &Graph,
    b: &Graph,
    ta: &MotifTensor,
    tb: &MotifTensor,
    factors: &FactorPair,
    opts: &RefineOptions,
) -> Result<RefineReport> {
    let (m, n) = (a.n(), b.n());
    if ta.order() != tb.order() {
        return Err(Error::OrderMismatch {
            left: ta.order(),
            right: tb.order(),
        });
    }
    if factors.u.nrows() != m || factors.v.nrows() != n {
        return Err(Error::ContractViolation(format!(
            "factors are {}×· and {}×·, graphs have {m} and {n} vertices",
            factors.u.nrows(),
            factors.v.nrows()
        )));
    }
    if ta.dim() < m || tb.dim() < n {
        return Err(Error::ContractViolation("motif tensors smaller than graphs".into()));
    }
    if mt.pairs().iter().any(|&(i, j)| i >= m || j >= n) {
        return Err(Error::ContractViolation("matching pair outside the graphs".into()));
    }
    let mut st = State::new(mt, a, b, ta, tb);
    let before = st.score;
    let k = resolve_knn(factors, opts)?;
    if mt.is_empty() {
        return Ok(RefineReport {
            matching: mt.clone(),
            before,
            after: before,
            sweeps: 0,
            swaps: 0,
            knn: k,
        });
    }
    let knn_u = all_knn(&factors.u, k);
    let knn_v = all_knn(&factors.v, k);

    let mut sweeps = 0;
    let mut swaps = 0;
    while sweeps < opts.max_sweeps {
        sweeps += 1;
        let mut order: Vec<(f64, usize, usize)> = st
            .pairs()
            .map(|(i, ip)| (factors.u.row(i).dot(&factors.v.row(ip)), i, ip))
            .collect();
        order.sort_by(|x, y| y.0.total_cmp(&x.0).then((x.1, x.2).cmp(&(y.1, y.2))));
        let mut changed = false;
        for (_, i, ip) in order {
            if st.fwd[i] != Some(ip) {
                continue;
            }
            let jps = merged(&knn_v[ip], b.neighbors(ip), ip);
            let js = merged(&knn_u[i], a.neighbors(i), i);
            let moves = jps
                .into_iter()
                .map(|jp| Move::Right { i, ip, jp })
                .chain(js.into_iter().map(|j| Move::Left { i, ip, j }));
            for mv in moves {
                if st.try_move(mv) {
                    swaps += 1;
                    changed = true;
                    break;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let pairs: Vec<(usize, usize)> = st.pairs().collect();
    let weight = pairs
        .iter()
        .map(|&(i, ip)| factors.u.row(i).dot(&factors.v.row(ip)))
        .sum();
    Ok(RefineReport {
        matching: Matching::new(pairs, weight)?,
        before,
        after: st.score,
        sweeps,
        swaps,
        knn: k,
    })
}

fn all_knn(f: &DMatrix<f64>, k: usize) -> Vec<Vec<usize>> {
    let rows = f.nrows();
    let k = k.min(rows.saturating_sub(1));
    (0..rows)
        .map(|r| if k == 0 { Vec::new() } else { knn_unchecked(f, r, k) })
        .collect()
}

fn merged(a: &[usize], b: &[usize], skip: usize) -> Vec<usize> {
    let mut v: Vec<usize> = a.iter().chain(b).copied().filter(|&x| x != skip).collect();
    v.sort_unstable();
    v.dedup();
    v
}

#[derive(Debug, Clone, Copy)]
enum Move {
    /// Re-match `i` (currently on `ip`) to `jp`.
    Right { i: usize, ip: usize, jp: usize },
    /// Match `j` to `ip` (currently held by `i`).
    Left { i: usize, ip: usize, j: usize },
}

struct State<'g> {
    a: &'g Graph,
    b: &'g Graph,
    ta: &'g MotifTensor,
    tb: &'g MotifTensor,
    fwd: Vec<Option<usize>>,
    bwd: Vec<Option<usize>>,
    /// Hyperedges of `T_A` containing each vertex.
    incident: Vec<Vec<usize>>,
    score: (usize, usize),
    buf: Vec<usize>,
}

impl<'g> State<'g> {
    fn new(mt: &Matching, a: &'g Graph, b: &'g Graph, ta: &'g MotifTensor, tb: &'g MotifTensor) -> Self {
        let mut fwd = vec![None; a.n()];
        let mut bwd = vec![None; b.n()];
        for &(i, j) in mt.pairs() {
            fwd[i] = Some(j);
            bwd[j] = Some(i);
        }
        let mut incident = vec![Vec::new(); a.n()];
        for (idx, e) in ta.hyperedges().enumerate() {
            for &v in e {
                if v < a.n() {
                    incident[v].push(idx);
                }
            }
        }
        let mut st = Self {
            a,
            b,
            ta,
            tb,
            fwd,
            bwd,
            incident,
            score: (0, 0),
            buf: Vec::with_capacity(ta.order()),
        };
        let motifs = (0..ta.nnz()).filter(|&e| st.motif_aligned(e)).count();
        let edges = a.edges().filter(|&(u, v)| st.edge_aligned(u, v)).count();
        st.score = (motifs, edges);
        st
    }

    fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.fwd
            .iter()
            .enumerate()
            .filter_map(|(i, j)| j.map(|j| (i, j)))
    }

    fn motif_aligned(&mut self, e: usize) -> bool {
        self.buf.clear();
        for &v in self.ta.hyperedge(e) {
            match self.fwd[v] {
                Some(j) => self.buf.push(j),
                None => return false,
            }
        }
        self.buf.sort_unstable();
        self.tb.find(&self.buf).is_some()
    }

    fn edge_aligned(&self, u: usize, v: usize) -> bool {
        match (self.fwd[u], self.fwd[v]) {
            (Some(x), Some(y)) => self.b.has_edge(x, y),
            _ => false,
        }
    }

    /// `(motifs, edges)` aligned among the structures touching `changed`.
    fn local_score(&mut self, changed: &[usize], hyper: &[usize]) -> (usize, usize) {
        let mut motifs = 0;
        for &e in hyper {
            if self.motif_aligned(e) {
                motifs += 1;
            }
        }
        let mut edges = 0;
        for (idx, &s) in changed.iter().enumerate() {
            for &t in self.a.neighbors(s) {
                // an edge between two changed vertices is counted once
                if changed[..idx].contains(&t) {
                    continue;
                }
                if self.edge_aligned(s, t) {
                    edges += 1;
                }
            }
        }
        (motifs, edges)
    }

    /// Applies `mv` if it improves the lexicographic score, else restores.
    fn try_move(&mut self, mv: Move) -> bool {
        // (A-vertex, new image) assignments, plus B-vertices to release
        let (assign, changed): (Vec<(usize, Option<usize>)>, Vec<usize>) = match mv {
            Move::Right { i, ip, jp } => match self.bwd[jp] {
                Some(h) => (vec![(i, Some(jp)), (h, Some(ip))], vec![i, h]),
                None => (vec![(i, Some(jp))], vec![i]),
            },
            Move::Left { i, ip, j } => match self.fwd[j] {
                Some(hp) => (vec![(j, Some(ip)), (i, Some(hp))], vec![i, j]),
                None => (vec![(j, Some(ip)), (i, None)], vec![i, j]),
            },
        };
        let mut hyper: Vec<usize> = changed
            .iter()
            .flat_map(|&s| self.incident[s].iter().copied())
            .collect();
        hyper.sort_unstable();
        hyper.dedup();

        let old: Vec<(usize, Option<usize>)> = changed.iter().map(|&s| (s, self.fwd[s])).collect();
        let before = self.local_score(&changed, &hyper);
        self.assign(&old, &assign);
        let after = self.local_score(&changed, &hyper);
        let better = after.0 > before.0 || (after.0 == before.0 && after.1 > before.1);
        if better {
            self.score.0 = self.score.0 + after.0 - before.0;
            self.score.1 = self.score.1 + after.1 - before.1;
        } else {
            self.assign(&assign, &old);
        }
        better
    }

    /// Moves the changed A-vertices from the `from` images to the `to` images.
    fn assign(&mut self, from: &[(usize, Option<usize>)], to: &[(usize, Option<usize>)]) {
        for &(s, img) in from {
            if let Some(j) = img {
                if self.bwd[j] == Some(s) {
                    self.bwd[j] = None;
                }
            }
            self.fwd[s] = None;
        }
        for &(s, img) in to {
            self.fwd[s] = img;
            if let Some(j) = img {
                self.bwd[j] = Some(s);
            }
        }
    }
}
