//! Undirected graphs, exact k-clique enumeration, and clique tensors.

use std::io::{BufRead, Write};

use log::warn;

use crate::error::{Error, Result};
use crate::tensor::MotifTensor;

pub const MIN_CLIQUE: usize = 2;
pub const MAX_CLIQUE: usize = 9;

/// Simple undirected graph on vertices `0..n` with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    edges: usize,
}

impl Graph {
    /// Builds a graph from 0-based pairs. Duplicate and reversed pairs are
    /// merged, self-loops dropped.
    pub fn new(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        let mut loops = 0usize;
        for (u, v) in pairs {
            if u >= n || v >= n {
                return Err(Error::ContractViolation(format!(
                    "edge ({u}, {v}) outside 0..{n}"
                )));
            }
            if u == v {
                loops += 1;
                continue;
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        if loops > 0 {
            warn!("dropped {loops} self-loop(s)");
        }
        let mut edges = 0;
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            edges += list.len();
        }
        Ok(Self {
            adj,
            edges: edges / 2,
        })
    }

    pub fn empty(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
            edges: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, l)| l.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Adds a vertex with the given neighbours and returns its id.
    pub fn add_vertex(&mut self, neighbors: &[usize]) -> usize {
        let id = self.adj.len();
        let mut list: Vec<usize> = neighbors.to_vec();
        list.sort_unstable();
        list.dedup();
        for &v in &list {
            let pos = self.adj[v].binary_search(&id).unwrap_err();
            self.adj[v].insert(pos, id);
        }
        self.edges += list.len();
        self.adj.push(list);
        id
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let edges = self.edges().map(|(u, v)| (perm[u], perm[v]));
        Self::new(self.n(), edges).expect("permutation stays in range")
    }

    pub fn density(&self) -> f64 {
        let n = self.n() as f64;
        if self.n() < 2 {
            return 0.0;
        }
        self.edges as f64 / (n * (n - 1.0) / 2.0)
    }
}

/// Reads a whitespace-separated 1-based edge list. Lines starting with `#` are
/// comments, except `# vertices N`, which fixes the vertex count so isolated
/// trailing vertices survive a round trip.
pub fn read_edge_list<R: BufRead>(reader: R) -> Result<Graph> {
    let mut declared: Option<usize> = None;
    let mut pairs = Vec::new();
    let mut max_id = 0usize;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            let mut it = rest.split_whitespace();
            if it.next() == Some("vertices") {
                let n = it.next().and_then(|s| s.parse().ok()).ok_or(Error::Parse {
                    line: lineno,
                    message: "bad `# vertices` header".into(),
                })?;
                declared = Some(n);
            }
            continue;
        }
        let mut it = trimmed.split_whitespace();
        let mut next_id = || -> Result<usize> {
            let f = it.next().ok_or(Error::Parse {
                line: lineno,
                message: "expected two vertex ids".into(),
            })?;
            let v: usize = f.parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("bad vertex id `{f}`"),
            })?;
            if v == 0 {
                return Err(Error::Parse {
                    line: lineno,
                    message: "vertex ids are 1-based".into(),
                });
            }
            Ok(v)
        };
        let u = next_id()?;
        let v = next_id()?;
        max_id = max_id.max(u).max(v);
        pairs.push((u - 1, v - 1));
    }
    let n = match declared {
        Some(n) if n < max_id => {
            return Err(Error::Parse {
                line: 0,
                message: format!("vertex id {max_id} exceeds declared count {n}"),
            })
        }
        Some(n) => n,
        None => max_id,
    };
    Graph::new(n, pairs)
}

pub fn write_edge_list<W: Write>(g: &Graph, mut w: W) -> Result<()> {
    writeln!(w, "# vertices {}", g.n())?;
    for (u, v) in g.edges() {
        writeln!(w, "{} {}", u + 1, v + 1)?;
    }
    Ok(())
}

fn check_clique_size(k: usize) -> Result<()> {
    if !(MIN_CLIQUE..=MAX_CLIQUE).contains(&k) {
        return Err(Error::InvalidArgument(format!(
            "clique size must be in {MIN_CLIQUE}..={MAX_CLIQUE}, got {k}"
        )));
    }
    Ok(())
}

/// Every `k`-clique exactly once as a strictly increasing tuple, in
/// lexicographic order. Flattened, `k` entries per clique.
///
/// Each clique is grown only through higher-numbered neighbours of its last
/// vertex, so the candidate set is always the common higher neighbourhood.
pub fn enumerate_cliques_flat(g: &Graph, k: usize) -> Result<Vec<usize>> {
    check_clique_size(k)?;
    let mut out = Vec::new();
    let mut stack = Vec::with_capacity(k);
    for v in 0..g.n() {
        let cands: Vec<usize> = g.neighbors(v).iter().copied().filter(|&u| u > v).collect();
        if cands.len() + 1 < k {
            continue;
        }
        stack.push(v);
        extend(g, k, &mut stack, &cands, &mut out);
        stack.pop();
    }
    Ok(out)
}

fn extend(g: &Graph, k: usize, stack: &mut Vec<usize>, cands: &[usize], out: &mut Vec<usize>) {
    if stack.len() == k {
        out.extend_from_slice(stack);
        return;
    }
    let need = k - stack.len();
    for (idx, &u) in cands.iter().enumerate() {
        if cands.len() - idx < need {
            break;
        }
        stack.push(u);
        if need == 1 {
            out.extend_from_slice(stack);
        } else {
            let next: Vec<usize> = cands[idx + 1..]
                .iter()
                .copied()
                .filter(|&w| g.has_edge(u, w))
                .collect();
            if next.len() + 1 >= need {
                extend(g, k, stack, &next, out);
            }
        }
        stack.pop();
    }
}

pub fn enumerate_cliques(g: &Graph, k: usize) -> Result<Vec<Vec<usize>>> {
    Ok(enumerate_cliques_flat(g, k)?
        .chunks_exact(k)
        .map(|c| c.to_vec())
        .collect())
}

/// Unit-weight order-`k` tensor whose hyperedges are the `k`-cliques of `g`.
pub fn clique_tensor(g: &Graph, k: usize) -> Result<MotifTensor> {
    let flat = enumerate_cliques_flat(g, k)?;
    if flat.is_empty() {
        warn!("graph with {} vertices has no {k}-cliques; motif tensor is empty", g.n());
    }
    let dim = g.n().max(1);
    Ok(MotifTensor::from_sorted_unit(k, dim, flat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::ttv_same;

    fn complete(n: usize) -> Graph {
        let pairs = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Graph::new(n, pairs).unwrap()
    }

    #[test]
    fn small_examples() {
        assert_eq!(enumerate_cliques(&complete(3), 3).unwrap(), vec![vec![0, 1, 2]]);
        let path = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        assert!(enumerate_cliques(&path, 3).unwrap().is_empty());
        assert_eq!(clique_tensor(&complete(4), 3).unwrap().nnz(), 4);
        let bip = Graph::new(4, [(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
        assert!(clique_tensor(&bip, 3).unwrap().is_empty());
    }

    #[test]
    fn k3_tensor_contraction() {
        let t = clique_tensor(&complete(3), 3).unwrap();
        let y = ttv_same(&t, &[1.0; 3], 2).unwrap().into_vector().unwrap();
        assert_eq!(y, vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn k2_is_the_edge_set() {
        let g = Graph::new(4, [(0, 1), (2, 1), (3, 0)]).unwrap();
        assert_eq!(
            enumerate_cliques(&g, 2).unwrap(),
            vec![vec![0, 1], vec![0, 3], vec![1, 2]]
        );
    }

    #[test]
    fn clique_size_range() {
        let g = complete(3);
        assert!(enumerate_cliques(&g, 1).is_err());
        assert!(enumerate_cliques(&g, 10).is_err());
        assert_eq!(enumerate_cliques(&complete(9), 9).unwrap().len(), 1);
    }

    #[test]
    fn edge_list_merges_and_drops_loops() {
        let text = "# comment\n1 2\n2 1\n3 3\n2 3\n\n1 2\n";
        let g = read_edge_list(text.as_bytes()).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.num_edges(), 2);
        assert!(read_edge_list("0 1\n".as_bytes()).is_err());
        assert!(read_edge_list("1 x\n".as_bytes()).is_err());
    }

    #[test]
    fn edge_list_round_trip_keeps_isolated_vertices() {
        let g = Graph::new(6, [(0, 1), (1, 4)]).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        assert_eq!(read_edge_list(buf.as_slice()).unwrap(), g);
    }

    #[test]
    fn add_vertex_keeps_lists_sorted() {
        let mut g = Graph::new(3, [(0, 1)]).unwrap();
        let v = g.add_vertex(&[2, 0]);
        assert_eq!(v, 3);
        assert_eq!(g.neighbors(0), &[1, 3]);
        assert_eq!(g.num_edges(), 3);
        assert!(g.has_edge(3, 2));
    }
}
