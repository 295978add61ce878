//! Sparse symmetric motif tensors, small dense tensors, and vector contractions.

use std::io::{BufRead, Write};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Default limit on the number of entries a dense oracle tensor may hold.
pub const DEFAULT_DENSE_BUDGET: usize = 1 << 24;

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, v| acc * v as f64)
}

/// Sparse symmetric cubical tensor stored as canonical (strictly increasing)
/// hyperedges. Every one of the `k!` orientations of a stored hyperedge is an
/// implied entry with the hyperedge's weight; all other entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MotifTensor {
    order: usize,
    dim: usize,
    // flattened, `order` indices per hyperedge, lexicographically sorted
    edges: Vec<usize>,
    weights: Vec<f64>,
}

impl MotifTensor {
    /// Builds a tensor from 0-based hyperedges. Each hyperedge must already be
    /// strictly increasing; weights default to 1.
    pub fn new(
        order: usize,
        dim: usize,
        hyperedges: Vec<Vec<usize>>,
        weights: Option<Vec<f64>>,
    ) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidArgument(format!(
                "tensor order must be at least 2, got {order}"
            )));
        }
        if dim == 0 {
            return Err(Error::InvalidArgument("tensor dimension must be positive".into()));
        }
        let weights = match weights {
            Some(w) => {
                if w.len() != hyperedges.len() {
                    return Err(Error::DimensionMismatch {
                        expected: hyperedges.len(),
                        found: w.len(),
                    });
                }
                w
            }
            None => vec![1.0; hyperedges.len()],
        };
        let mut items: Vec<(Vec<usize>, f64)> = Vec::with_capacity(hyperedges.len());
        for (e, w) in hyperedges.into_iter().zip(weights) {
            if e.len() != order {
                return Err(Error::ContractViolation(format!(
                    "hyperedge {e:?} has {} indices, tensor order is {order}",
                    e.len()
                )));
            }
            if e.windows(2).any(|p| p[0] >= p[1]) {
                return Err(Error::ContractViolation(format!(
                    "hyperedge {e:?} is not strictly increasing"
                )));
            }
            if e[order - 1] >= dim {
                return Err(Error::ContractViolation(format!(
                    "hyperedge {e:?} has an index outside 0..{dim}"
                )));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::ContractViolation(format!(
                    "hyperedge {e:?} has non-positive weight {w}"
                )));
            }
            items.push((e, w));
        }
        items.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(dup) = items.windows(2).find(|p| p[0].0 == p[1].0) {
            return Err(Error::ContractViolation(format!(
                "duplicate hyperedge {:?}",
                dup[0].0
            )));
        }
        let mut edges = Vec::with_capacity(items.len() * order);
        let mut weights = Vec::with_capacity(items.len());
        for (e, w) in items {
            edges.extend_from_slice(&e);
            weights.push(w);
        }
        Ok(Self {
            order,
            dim,
            edges,
            weights,
        })
    }

    /// Unit-weight tensor from hyperedges that are known to be canonical and
    /// already sorted (e.g. straight out of clique enumeration).
    pub(crate) fn from_sorted_unit(order: usize, dim: usize, edges: Vec<usize>) -> Self {
        debug_assert_eq!(edges.len() % order, 0);
        let nnz = edges.len() / order;
        Self {
            order,
            dim,
            edges,
            weights: vec![1.0; nnz],
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored (canonical) hyperedges.
    pub fn nnz(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn hyperedges(&self) -> impl ExactSizeIterator<Item = &[usize]> + '_ {
        self.edges.chunks_exact(self.order)
    }

    pub fn hyperedge(&self, idx: usize) -> &[usize] {
        &self.edges[idx * self.order..(idx + 1) * self.order]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Position of a canonical hyperedge, if stored.
    pub fn find(&self, sorted: &[usize]) -> Option<usize> {
        if sorted.len() != self.order {
            return None;
        }
        let mut lo = 0;
        let mut hi = self.nnz();
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.hyperedge(mid).cmp(sorted) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    /// Logical entry `T(i_1, ..., i_k)` of the symmetric tensor.
    pub fn entry(&self, index: &[usize]) -> f64 {
        let mut s = index.to_vec();
        s.sort_unstable();
        if s.windows(2).any(|p| p[0] == p[1]) {
            return 0.0;
        }
        self.find(&s).map_or(0.0, |i| self.weights[i])
    }

    /// Densifies the tensor; only meant for small oracle checks.
    pub fn to_dense(&self, budget: usize) -> Result<DenseTensor> {
        let mut out = DenseTensor::zeros(self.order, self.dim, budget)?;
        let mut perm: Vec<usize> = Vec::with_capacity(self.order);
        for (e, &w) in self.hyperedges().zip(&self.weights) {
            perm.clear();
            perm.extend_from_slice(e);
            for_each_permutation(&mut perm, &mut |p| out.set(p, w));
        }
        Ok(out)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: len,
            });
        }
        Ok(())
    }
}

/// Output of a same-vector contraction `T·x^p`.
#[derive(Debug, Clone, PartialEq)]
pub enum Contraction {
    /// `p = k − 1`
    Vector(Vec<f64>),
    /// `p = k`
    Scalar(f64),
}

impl Contraction {
    pub fn into_vector(self) -> Option<Vec<f64>> {
        match self {
            Contraction::Vector(v) => Some(v),
            Contraction::Scalar(_) => None,
        }
    }

    pub fn scalar(&self) -> Option<f64> {
        match self {
            Contraction::Scalar(s) => Some(*s),
            Contraction::Vector(_) => None,
        }
    }
}

/// `T·x^p` for `p ∈ {k−1, k}` under full symmetry.
pub fn ttv_same(t: &MotifTensor, x: &[f64], p: usize) -> Result<Contraction> {
    t.check_len(x.len())?;
    let k = t.order;
    if p == k - 1 {
        Ok(Contraction::Vector(ttv_vector(t, x)))
    } else if p == k {
        let scale = factorial(k);
        let s: f64 = t
            .hyperedges()
            .zip(&t.weights)
            .map(|(e, &w)| w * e.iter().map(|&j| x[j]).product::<f64>())
            .sum();
        Ok(Contraction::Scalar(scale * s))
    } else {
        Err(Error::UnsupportedContraction { p, order: k })
    }
}

/// `T·x^{k−1}` without the length check.
pub(crate) fn ttv_vector(t: &MotifTensor, x: &[f64]) -> Vec<f64> {
    let k = t.order;
    let scale = factorial(k - 1);
    let mut out = vec![0.0; t.dim];
    let mut prefix = vec![1.0; k + 1];
    let mut suffix = vec![1.0; k + 1];
    for (e, &w) in t.hyperedges().zip(&t.weights) {
        for q in 0..k {
            prefix[q + 1] = prefix[q] * x[e[q]];
        }
        for q in (0..k).rev() {
            suffix[q] = suffix[q + 1] * x[e[q]];
        }
        let ws = w * scale;
        for q in 0..k {
            out[e[q]] += ws * prefix[q] * suffix[q + 1];
        }
    }
    out
}

/// General multilinear contraction `T(·, x_1, ..., x_{k−1})` with `k − 1`
/// possibly distinct vectors.
pub fn ttv_multi(t: &MotifTensor, xs: &[&[f64]]) -> Result<Vec<f64>> {
    if xs.is_empty() {
        return Err(Error::InvalidArgument("ttv_multi needs at least one vector".into()));
    }
    let k = t.order;
    if xs.len() != k - 1 {
        return Err(Error::UnsupportedContraction {
            p: xs.len(),
            order: k,
        });
    }
    for x in xs {
        t.check_len(x.len())?;
    }
    Ok(ttv_multi_unchecked(t, xs))
}

pub(crate) fn ttv_multi_unchecked(t: &MotifTensor, xs: &[&[f64]]) -> Vec<f64> {
    let k = t.order;
    let mut out = vec![0.0; t.dim];
    if k == 2 {
        // adjacency-matrix case: out(i) = Σ_{j ~ i} w x(j)
        let x = xs[0];
        for (e, &w) in t.hyperedges().zip(&t.weights) {
            out[e[0]] += w * x[e[1]];
            out[e[1]] += w * x[e[0]];
        }
        return out;
    }
    if k == 3 {
        let (a, b) = (xs[0], xs[1]);
        for (e, &w) in t.hyperedges().zip(&t.weights) {
            let (i, j, l) = (e[0], e[1], e[2]);
            out[i] += w * (a[j] * b[l] + a[l] * b[j]);
            out[j] += w * (a[i] * b[l] + a[l] * b[i]);
            out[l] += w * (a[i] * b[j] + a[j] * b[i]);
        }
        return out;
    }
    let m = k - 1;
    let mut mat = vec![0.0; m * m];
    let mut scratch = PermanentScratch::new(m);
    for (e, &w) in t.hyperedges().zip(&t.weights) {
        for p in 0..k {
            // rows: vectors, cols: the other vertices of e
            let mut c = 0;
            for (q, &v) in e.iter().enumerate() {
                if q == p {
                    continue;
                }
                for (r, x) in xs.iter().enumerate() {
                    mat[r * m + c] = x[v];
                }
                c += 1;
            }
            out[e[p]] += w * scratch.permanent(&mat);
        }
    }
    out
}

/// Permanent of small square matrices by dynamic programming over column
/// subsets: `O(2^m · m)` additions, no cancellation.
pub(crate) struct PermanentScratch {
    m: usize,
    dp: Vec<f64>,
}

impl PermanentScratch {
    pub(crate) fn new(m: usize) -> Self {
        assert!(m <= 20, "permanent size {m} too large");
        Self {
            m,
            dp: vec![0.0; 1 << m],
        }
    }

    /// `mat` is row-major `m × m`.
    pub(crate) fn permanent(&mut self, mat: &[f64]) -> f64 {
        let m = self.m;
        match m {
            0 => return 1.0,
            1 => return mat[0],
            2 => return mat[0] * mat[3] + mat[1] * mat[2],
            _ => {}
        }
        let full = (1usize << m) - 1;
        self.dp.iter_mut().for_each(|v| *v = 0.0);
        self.dp[0] = 1.0;
        for mask in 0..full {
            let cur = self.dp[mask];
            if cur == 0.0 {
                continue;
            }
            let row = mask.count_ones() as usize;
            let mut free = full & !mask;
            while free != 0 {
                let col = free.trailing_zeros() as usize;
                free &= free - 1;
                self.dp[mask | (1 << col)] += cur * mat[row * m + col];
            }
        }
        self.dp[full]
    }
}

/// Calls `f` on every permutation of `items` (Heap's algorithm).
pub(crate) fn for_each_permutation<F: FnMut(&[usize])>(items: &mut [usize], f: &mut F) {
    let n = items.len();
    let mut c = vec![0usize; n];
    f(items);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            f(items);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Reads the tensor text format: a `k n nnz` header followed by `nnz` lines
/// of `k` strictly increasing 1-based indices and a weight.
pub fn read_tensor<R: BufRead>(reader: R) -> Result<MotifTensor> {
    let mut lines = reader
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| match l {
            Ok(s) => {
                let s = s.trim();
                !s.is_empty() && !s.starts_with('#')
            }
            Err(_) => true,
        });
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 0,
        message: "missing header".into(),
    })?;
    let header = header?;
    let h: Vec<usize> = parse_fields(&header, hline)?;
    if h.len() != 3 {
        return Err(Error::Parse {
            line: hline,
            message: "header must be `k n nnz`".into(),
        });
    }
    let (k, n, nnz) = (h[0], h[1], h[2]);
    let mut edges = Vec::with_capacity(nnz);
    let mut weights = Vec::with_capacity(nnz);
    for (lineno, line) in lines {
        let line = line?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != k + 1 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected {} fields, found {}", k + 1, fields.len()),
            });
        }
        let mut e = Vec::with_capacity(k);
        for f in &fields[..k] {
            let v: usize = f.parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("bad index `{f}`"),
            })?;
            if v == 0 || v > n {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("index {v} outside 1..={n}"),
                });
            }
            e.push(v - 1);
        }
        if e.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::Parse {
                line: lineno,
                message: "indices must be strictly increasing".into(),
            });
        }
        let w: f64 = fields[k].parse().map_err(|_| Error::Parse {
            line: lineno,
            message: format!("bad weight `{}`", fields[k]),
        })?;
        edges.push(e);
        weights.push(w);
    }
    if edges.len() != nnz {
        return Err(Error::Parse {
            line: hline,
            message: format!("header declares {nnz} hyperedges, found {}", edges.len()),
        });
    }
    MotifTensor::new(k, n, edges, Some(weights))
}

pub fn write_tensor<W: Write>(t: &MotifTensor, mut w: W) -> Result<()> {
    writeln!(w, "{} {} {}", t.order, t.dim, t.nnz())?;
    for (e, &wt) in t.hyperedges().zip(&t.weights) {
        for v in e {
            write!(w, "{} ", v + 1)?;
        }
        writeln!(w, "{wt}")?;
    }
    Ok(())
}

fn parse_fields(line: &str, lineno: usize) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|f| {
            f.parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("bad integer `{f}`"),
            })
        })
        .collect()
}

/// Dense cubical tensor with all `n^k` entries stored, first index fastest.
/// Used for small oracles and the random tensors of the eigenpair checks.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    order: usize,
    dim: usize,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn zeros(order: usize, dim: usize, budget: usize) -> Result<Self> {
        let entries = (dim as u128).pow(order as u32);
        if entries > budget as u128 {
            return Err(Error::BudgetExceeded { entries, budget });
        }
        Ok(Self {
            order,
            dim,
            data: vec![0.0; entries as usize],
        })
    }

    /// The order-`k` diagonal tensor with ones on the diagonal.
    pub fn diagonal(order: usize, dim: usize) -> Self {
        let mut t = Self::zeros(order, dim, usize::MAX).expect("no budget");
        for i in 0..dim {
            t.set(&vec![i; order], 1.0);
        }
        t
    }

    /// Random symmetric tensor: one standard-normal draw per index multiset,
    /// copied to all orientations, then scaled to unit Frobenius norm.
    pub fn random_symmetric<R: Rng + ?Sized>(order: usize, dim: usize, rng: &mut R) -> Self {
        let mut t = Self::zeros(order, dim, DEFAULT_DENSE_BUDGET).expect("small tensor");
        let mut idx = vec![0usize; order];
        loop {
            let v: f64 = rng.sample(StandardNormal);
            let mut p = idx.clone();
            for_each_permutation(&mut p, &mut |q| t.set(q, v));
            // next non-decreasing tuple
            let mut pos = order;
            while pos > 0 && idx[pos - 1] == dim - 1 {
                pos -= 1;
            }
            if pos == 0 {
                break;
            }
            idx[pos - 1] += 1;
            let base = idx[pos - 1];
            for slot in idx.iter_mut().skip(pos) {
                *slot = base;
            }
        }
        let norm = t.frobenius_norm();
        if norm > 0.0 {
            t.data.iter_mut().for_each(|v| *v /= norm);
        }
        t
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    fn offset(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.order);
        index
            .iter()
            .rev()
            .fold(0usize, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.data[self.offset(index)]
    }

    pub fn set(&mut self, index: &[usize], value: f64) {
        let o = self.offset(index);
        self.data[o] = value;
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            order: self.order,
            dim: self.dim,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// Whether every entry equals the entries at all permutations of its index.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let mut idx = vec![0usize; self.order];
        for flat in 0..self.data.len() {
            let mut r = flat;
            for slot in idx.iter_mut() {
                *slot = r % self.dim;
                r /= self.dim;
            }
            let v = self.data[flat];
            let mut ok = true;
            let mut p = idx.clone();
            for_each_permutation(&mut p, &mut |q| {
                if (self.get(q) - v).abs() > tol {
                    ok = false;
                }
            });
            if !ok {
                return false;
            }
        }
        true
    }

    /// Contracts the trailing modes with `xs`, last vector against last mode:
    /// `out(i, ...) = Σ T(i, ..., j_1, ..., j_p) Π x_t(j_t)`.
    pub fn contract_trailing(&self, xs: &[&[f64]]) -> Result<Vec<f64>> {
        if xs.len() > self.order {
            return Err(Error::UnsupportedContraction {
                p: xs.len(),
                order: self.order,
            });
        }
        for x in xs {
            if x.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: x.len(),
                });
            }
        }
        let mut cur = self.data.clone();
        for x in xs.iter().rev() {
            cur = contract_last(&cur, self.dim, x);
        }
        Ok(cur)
    }

    /// `T·x^{k−1}`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut cur = contract_last(&self.data, self.dim, x);
        for _ in 1..self.order - 1 {
            cur = contract_last(&cur, self.dim, x);
        }
        cur
    }

    /// `T·x^{k−2}` as a row-major `n × n` matrix.
    pub fn apply_matrix(&self, x: &[f64]) -> Vec<f64> {
        let mut cur = self.data.clone();
        for _ in 0..self.order - 2 {
            cur = contract_last(&cur, self.dim, x);
        }
        cur
    }

    /// Tensor Kronecker product `B ⊗ A` (`self` is `B`): the entry at the
    /// interleaved index `⟨i, i′⟩ = i + m·i′` (0-based) is `A(i)·B(i′)`.
    pub fn kron(&self, a: &DenseTensor, budget: usize) -> Result<DenseTensor> {
        if a.order != self.order {
            return Err(Error::OrderMismatch {
                left: a.order,
                right: self.order,
            });
        }
        let (m, n, k) = (a.dim, self.dim, self.order);
        let mut out = DenseTensor::zeros(k, m * n, budget)?;
        let mut ia = vec![0usize; k];
        let mut ib = vec![0usize; k];
        let mut ik = vec![0usize; k];
        for (fa, &va) in a.data.iter().enumerate() {
            if va == 0.0 {
                continue;
            }
            unflatten(fa, m, &mut ia);
            for (fb, &vb) in self.data.iter().enumerate() {
                if vb == 0.0 {
                    continue;
                }
                unflatten(fb, n, &mut ib);
                for t in 0..k {
                    ik[t] = ia[t] + m * ib[t];
                }
                out.set(&ik, va * vb);
            }
        }
        Ok(out)
    }
}

fn unflatten(mut flat: usize, dim: usize, out: &mut [usize]) {
    for slot in out.iter_mut() {
        *slot = flat % dim;
        flat /= dim;
    }
}

/// Contracts the slowest-varying mode of a flat array with `x`.
fn contract_last(data: &[f64], dim: usize, x: &[f64]) -> Vec<f64> {
    let stride = data.len() / dim;
    let mut out = vec![0.0; stride];
    for (l, &xl) in x.iter().enumerate() {
        if xl == 0.0 {
            continue;
        }
        let block = &data[l * stride..(l + 1) * stride];
        for (o, &v) in out.iter_mut().zip(block) {
            *o += v * xl;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> MotifTensor {
        MotifTensor::new(3, 3, vec![vec![0, 1, 2]], None).unwrap()
    }

    fn vec_of(c: Contraction) -> Vec<f64> {
        c.into_vector().unwrap()
    }

    #[test]
    fn triangle_ttv_examples() {
        let t = triangle();
        assert_eq!(vec_of(ttv_same(&t, &[1.0, 1.0, 1.0], 2).unwrap()), vec![2.0, 2.0, 2.0]);
        assert_eq!(vec_of(ttv_same(&t, &[1.0, 0.0, 0.0], 2).unwrap()), vec![0.0, 0.0, 0.0]);
        assert_eq!(vec_of(ttv_same(&t, &[1.0, 2.0, 3.0], 2).unwrap()), vec![12.0, 6.0, 4.0]);
        assert_eq!(ttv_same(&t, &[1.0, 2.0, 3.0], 3).unwrap().scalar(), Some(36.0));
    }

    #[test]
    fn ttv_multi_examples() {
        let t = triangle();
        let e1 = [1.0, 0.0, 0.0];
        let e2 = [0.0, 1.0, 0.0];
        assert_eq!(ttv_multi(&t, &[&e1, &e2]).unwrap(), vec![0.0, 0.0, 1.0]);
        let ones = [1.0; 3];
        assert_eq!(ttv_multi(&t, &[&ones, &ones]).unwrap(), vec![2.0, 2.0, 2.0]);
        let zero = [0.0; 3];
        assert_eq!(ttv_multi(&t, &[&ones, &zero]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn contraction_errors() {
        let t = triangle();
        assert!(matches!(
            ttv_same(&t, &[1.0, 1.0], 2),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            ttv_same(&t, &[1.0, 1.0, 1.0], 1),
            Err(Error::UnsupportedContraction { p: 1, order: 3 })
        ));
        assert!(matches!(ttv_multi(&t, &[]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn constructor_rejects_bad_hyperedges() {
        assert!(MotifTensor::new(3, 3, vec![vec![0, 2, 1]], None).is_err());
        assert!(MotifTensor::new(3, 3, vec![vec![0, 1, 3]], None).is_err());
        assert!(MotifTensor::new(3, 4, vec![vec![0, 1, 2], vec![0, 1, 2]], None).is_err());
        assert!(MotifTensor::new(3, 4, vec![vec![0, 1]], None).is_err());
        assert!(MotifTensor::new(3, 4, vec![vec![0, 1, 2]], Some(vec![-1.0])).is_err());
    }

    #[test]
    fn symmetric_entry_lookup() {
        let t = MotifTensor::new(3, 4, vec![vec![1, 2, 3], vec![0, 1, 2]], Some(vec![2.0, 1.0]))
            .unwrap();
        assert_eq!(t.entry(&[3, 1, 2]), 2.0);
        assert_eq!(t.entry(&[2, 0, 1]), 1.0);
        assert_eq!(t.entry(&[1, 1, 2]), 0.0);
        assert_eq!(t.entry(&[0, 1, 3]), 0.0);
        // canonical order after construction
        assert_eq!(t.hyperedge(0), &[0, 1, 2]);
    }

    #[test]
    fn tensor_text_round_trip() {
        let t = MotifTensor::new(3, 5, vec![vec![0, 1, 2], vec![2, 3, 4]], Some(vec![1.0, 2.5]))
            .unwrap();
        let mut buf = Vec::new();
        write_tensor(&t, &mut buf).unwrap();
        let back = read_tensor(buf.as_slice()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn loader_rejects_unsorted_line() {
        let text = "3 4 1\n1 3 2 1.0\n";
        assert!(matches!(read_tensor(text.as_bytes()), Err(Error::Parse { line: 2, .. })));
        let text = "3 4 2\n1 2 3 1.0\n";
        assert!(read_tensor(text.as_bytes()).is_err());
    }

    #[test]
    fn permanent_matches_permutation_sum() {
        let mut s = PermanentScratch::new(4);
        let mat: Vec<f64> = (0..16).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut cols = vec![0, 1, 2, 3];
        let mut brute = 0.0;
        for_each_permutation(&mut cols, &mut |p| {
            brute += (0..4).map(|r| mat[r * 4 + p[r]]).product::<f64>();
        });
        assert!((s.permanent(&mat) - brute).abs() < 1e-12);
    }

    #[test]
    fn dense_diagonal_apply() {
        let d = DenseTensor::diagonal(3, 2);
        assert_eq!(d.apply(&[0.5, 2.0]), vec![0.25, 4.0]);
        assert!(d.is_symmetric(0.0));
    }

    #[test]
    fn random_symmetric_is_symmetric_unit_norm() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let t = DenseTensor::random_symmetric(4, 3, &mut rng);
        assert!(t.is_symmetric(0.0));
        assert!((t.frobenius_norm() - 1.0).abs() < 1e-12);
    }
}
