//! Contractions against the tensor Kronecker product `B ⊗ A` of two motif
//! tensors, without forming it.
//!
//! Matrices are `nalgebra` column-major `DMatrix` values, so `vec(X)` is the
//! column-stacking `X.as_slice()` and the interleaved index of `(i, i′)` is
//! `i + m·i′` (0-based).

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tensor::{
    factorial, ttv_multi_unchecked, ttv_same, Contraction, DenseTensor, MotifTensor,
    PermanentScratch,
};

/// Default cap on `r^{k−1}` columns for the explicit low-rank expansion.
pub const DEFAULT_COLUMN_CAP: usize = 10_000;

/// Default number of expansion columns accumulated per batch in the
/// accumulation form. Best value is machine dependent.
pub const DEFAULT_ACCUMULATION_BATCH: usize = 16;

/// Borrowed view of the pair `(A, B)` standing for `B ⊗ A`.
#[derive(Debug, Clone, Copy)]
pub struct KronPair<'a> {
    pub a: &'a MotifTensor,
    pub b: &'a MotifTensor,
}

impl<'a> KronPair<'a> {
    pub fn new(a: &'a MotifTensor, b: &'a MotifTensor) -> Result<Self> {
        if a.order() != b.order() {
            return Err(Error::OrderMismatch {
                left: a.order(),
                right: b.order(),
            });
        }
        Ok(Self { a, b })
    }

    pub fn order(&self) -> usize {
        self.a.order()
    }

    /// `(m, n)`: dimensions of `A` and `B`.
    pub fn shape(&self) -> (usize, usize) {
        (self.a.dim(), self.b.dim())
    }

    fn check_shape(&self, x: &DMatrix<f64>) -> Result<()> {
        let (m, n) = self.shape();
        if x.nrows() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: x.nrows(),
            });
        }
        if x.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: x.ncols(),
            });
        }
        Ok(())
    }
}

/// 0-based interleaved index `⟨i, i′⟩`.
pub fn interleave(i: usize, ip: usize, m: usize) -> usize {
    i + m * ip
}

/// Inverse of [`interleave`].
pub fn deinterleave(idx: usize, m: usize) -> (usize, usize) {
    (idx % m, idx / m)
}

pub fn vec_of(x: &DMatrix<f64>) -> Vec<f64> {
    x.as_slice().to_vec()
}

pub fn unvec(v: &[f64], m: usize, n: usize) -> Result<DMatrix<f64>> {
    if v.len() != m * n {
        return Err(Error::DimensionMismatch {
            expected: m * n,
            found: v.len(),
        });
    }
    Ok(DMatrix::from_column_slice(m, n, v))
}

/// `unvec((B ⊗ A)·vec(X)^{k−1})` by looping over every pair of hyperedges.
///
/// For a hyperedge pair `(e_A, e_B)` and output position `(e_A[p], e_B[q])`
/// the contribution is `w_A w_B (k−1)!` times the permanent of `X` restricted
/// to the remaining vertices, which sums the `(k!)²` oriented correspondences.
pub fn implicit_kron_ttv(pair: &KronPair<'_>, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    pair.check_shape(x)?;
    let (m, n) = pair.shape();
    let k = pair.order();
    let scale = factorial(k - 1);
    let mut y = DMatrix::<f64>::zeros(m, n);
    let a = pair.a;
    let b = pair.b;
    if k == 2 {
        // Y = A X Bᵀ with symmetric adjacency matrices
        for (ea, &wa) in a.hyperedges().zip(a.weights()) {
            for (eb, &wb) in b.hyperedges().zip(b.weights()) {
                let w = wa * wb;
                let (a0, a1, b0, b1) = (ea[0], ea[1], eb[0], eb[1]);
                y[(a0, b0)] += w * x[(a1, b1)];
                y[(a0, b1)] += w * x[(a1, b0)];
                y[(a1, b0)] += w * x[(a0, b1)];
                y[(a1, b1)] += w * x[(a0, b0)];
            }
        }
        return Ok(y);
    }
    if k == 3 {
        let mut s = [[0.0f64; 3]; 3];
        for (ea, &wa) in a.hyperedges().zip(a.weights()) {
            let wa = wa * scale;
            for (eb, &wb) in b.hyperedges().zip(b.weights()) {
                for (p, row) in s.iter_mut().enumerate() {
                    for (q, v) in row.iter_mut().enumerate() {
                        *v = x[(ea[p], eb[q])];
                    }
                }
                let w = wa * wb;
                for p in 0..3 {
                    let (p1, p2) = OTHERS3[p];
                    for q in 0..3 {
                        let (q1, q2) = OTHERS3[q];
                        let perm = s[p1][q1] * s[p2][q2] + s[p1][q2] * s[p2][q1];
                        y[(ea[p], eb[q])] += w * perm;
                    }
                }
            }
        }
        return Ok(y);
    }
    let mut sub = vec![0.0; k * k];
    let mm = k - 1;
    let mut minor = vec![0.0; mm * mm];
    let mut scratch = PermanentScratch::new(mm);
    for (ea, &wa) in a.hyperedges().zip(a.weights()) {
        for (eb, &wb) in b.hyperedges().zip(b.weights()) {
            for p in 0..k {
                for q in 0..k {
                    sub[p * k + q] = x[(ea[p], eb[q])];
                }
            }
            let w = wa * wb * scale;
            for p in 0..k {
                for q in 0..k {
                    for (r, pp) in (0..k).filter(|&pp| pp != p).enumerate() {
                        for (c, qq) in (0..k).filter(|&qq| qq != q).enumerate() {
                            minor[r * mm + c] = sub[pp * k + qq];
                        }
                    }
                    y[(ea[p], eb[q])] += w * scratch.permanent(&minor);
                }
            }
        }
    }
    Ok(y)
}

const OTHERS3: [(usize, usize); 3] = [(1, 2), (0, 2), (0, 1)];

/// Rank-1 decoupling: returns `(A·u^p, B·v^p)`. Their Kronecker (outer)
/// product is `(B ⊗ A)·vec(u vᵀ)^p`.
pub fn rank1_kron_ttv(
    pair: &KronPair<'_>,
    u: &[f64],
    v: &[f64],
    p: usize,
) -> Result<(Contraction, Contraction)> {
    Ok((ttv_same(pair.a, u, p)?, ttv_same(pair.b, v, p)?))
}

/// Number of expansion columns `r^{k−1}`, saturating.
pub fn expansion_columns(rank: usize, order: usize) -> u128 {
    (rank as u128).saturating_pow((order - 1) as u32)
}

/// Rank-r decoupling: for every tuple `(i_1, ..., i_{k−1}) ∈ [r]^{k−1}` in
/// lexicographic order, column `A(U_{i_1}, ..., U_{i_{k−1}})` of `U′` and the
/// matching column of `V′`, so that `U′ V′ᵀ = unvec((B ⊗ A)·vec(U Vᵀ)^{k−1})`.
pub fn lowrank_kron_ttv(
    pair: &KronPair<'_>,
    u: &DMatrix<f64>,
    v: &DMatrix<f64>,
    column_cap: usize,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let r = check_factors(pair, u, v)?;
    let k = pair.order();
    let cols = expansion_columns(r, k);
    if cols > column_cap as u128 {
        return Err(Error::ColumnCapExceeded {
            columns: cols,
            cap: column_cap,
        });
    }
    let cols = cols as usize;
    let (m, n) = pair.shape();
    let ucols = columns_of(u);
    let vcols = columns_of(v);
    let mut uo = DMatrix::<f64>::zeros(m, cols);
    let mut vo = DMatrix::<f64>::zeros(n, cols);
    let mut tuple = vec![0usize; k - 1];
    for c in 0..cols {
        let (ca, cb) = expansion_column(pair, &ucols, &vcols, &tuple);
        uo.column_mut(c).copy_from_slice(&ca);
        vo.column_mut(c).copy_from_slice(&cb);
        next_tuple(&mut tuple, r);
    }
    Ok((uo, vo))
}

/// Number of nondecreasing tuples in `[r]^{k−1}`: `C(r + k − 2, k − 1)`.
pub fn symmetric_expansion_columns(rank: usize, order: usize) -> u128 {
    let d = (order - 1) as u128;
    let mut c: u128 = 1;
    for i in 0..d {
        c = c.saturating_mul(rank as u128 + i) / (i + 1);
    }
    c
}

/// Same product `U′ V′ᵀ` as [`lowrank_kron_ttv`], using one column per
/// multiset of factor indices. Both tensors are symmetric, so the column of a
/// tuple depends only on its multiset; the `U′` column carries the multiset's
/// multiplicity `(k−1)!/∏ c_j!`. Columns follow nondecreasing tuples in
/// lexicographic order.
pub fn lowrank_kron_ttv_sym(
    pair: &KronPair<'_>,
    u: &DMatrix<f64>,
    v: &DMatrix<f64>,
    column_cap: usize,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let r = check_factors(pair, u, v)?;
    let k = pair.order();
    let cols = symmetric_expansion_columns(r, k);
    if cols > column_cap as u128 {
        return Err(Error::ColumnCapExceeded {
            columns: cols,
            cap: column_cap,
        });
    }
    let cols = cols as usize;
    let (m, n) = pair.shape();
    let ucols = columns_of(u);
    let vcols = columns_of(v);
    let mut uo = DMatrix::<f64>::zeros(m, cols);
    let mut vo = DMatrix::<f64>::zeros(n, cols);
    let mut tuple = vec![0usize; k - 1];
    let top = factorial(k - 1);
    for c in 0..cols {
        let (ca, cb) = expansion_column(pair, &ucols, &vcols, &tuple);
        let mult = top / multiset_denominator(&tuple);
        for (dst, s) in uo.column_mut(c).iter_mut().zip(&ca) {
            *dst = mult * s;
        }
        vo.column_mut(c).copy_from_slice(&cb);
        next_sorted_tuple(&mut tuple, r);
    }
    Ok((uo, vo))
}

/// `∏ c_j!` over the run lengths of a sorted tuple.
fn multiset_denominator(tuple: &[usize]) -> f64 {
    let mut d = 1.0;
    let mut run = 1usize;
    for w in tuple.windows(2) {
        if w[0] == w[1] {
            run += 1;
            d *= run as f64;
        } else {
            run = 1;
        }
    }
    d
}

/// Next nondecreasing tuple over `[r]` in lexicographic order.
fn next_sorted_tuple(tuple: &mut [usize], r: usize) {
    let len = tuple.len();
    for pos in (0..len).rev() {
        if tuple[pos] + 1 < r {
            let v = tuple[pos] + 1;
            for t in &mut tuple[pos..] {
                *t = v;
            }
            return;
        }
    }
    tuple.iter_mut().for_each(|t| *t = 0);
}

/// Accumulation form of the rank-r expansion: returns the dense
/// `Σ_i U′(:, i) V′(:, i)ᵀ`, building `batch` columns at a time. Used when
/// `r^{k−1}` exceeds the column cap.
pub fn accumulate_kron_ttv(
    pair: &KronPair<'_>,
    u: &DMatrix<f64>,
    v: &DMatrix<f64>,
    batch: usize,
) -> Result<DMatrix<f64>> {
    let r = check_factors(pair, u, v)?;
    let k = pair.order();
    let (m, n) = pair.shape();
    let total = expansion_columns(r, k);
    let batch = batch.max(1);
    let ucols = columns_of(u);
    let vcols = columns_of(v);
    let mut acc = DMatrix::<f64>::zeros(m, n);
    let mut ub = DMatrix::<f64>::zeros(m, batch);
    let mut vb = DMatrix::<f64>::zeros(n, batch);
    let mut tuple = vec![0usize; k - 1];
    let mut done: u128 = 0;
    while done < total {
        let take = ((total - done).min(batch as u128)) as usize;
        for c in 0..take {
            let (ca, cb) = expansion_column(pair, &ucols, &vcols, &tuple);
            ub.column_mut(c).copy_from_slice(&ca);
            vb.column_mut(c).copy_from_slice(&cb);
            next_tuple(&mut tuple, r);
        }
        if take < batch {
            ub.columns_mut(take, batch - take).fill(0.0);
            vb.columns_mut(take, batch - take).fill(0.0);
        }
        acc.gemm(1.0, &ub, &vb.transpose(), 1.0);
        done += take as u128;
    }
    Ok(acc)
}

fn check_factors(pair: &KronPair<'_>, u: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<usize> {
    let (m, n) = pair.shape();
    if u.nrows() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: u.nrows(),
        });
    }
    if v.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: v.nrows(),
        });
    }
    if u.ncols() != v.ncols() {
        return Err(Error::DimensionMismatch {
            expected: u.ncols(),
            found: v.ncols(),
        });
    }
    if u.ncols() == 0 {
        return Err(Error::InvalidArgument("factors need at least one column".into()));
    }
    Ok(u.ncols())
}

fn columns_of(x: &DMatrix<f64>) -> Vec<Vec<f64>> {
    x.column_iter().map(|c| c.iter().copied().collect()).collect()
}

fn expansion_column(
    pair: &KronPair<'_>,
    ucols: &[Vec<f64>],
    vcols: &[Vec<f64>],
    tuple: &[usize],
) -> (Vec<f64>, Vec<f64>) {
    let xs: Vec<&[f64]> = tuple.iter().map(|&i| ucols[i].as_slice()).collect();
    let ys: Vec<&[f64]> = tuple.iter().map(|&i| vcols[i].as_slice()).collect();
    (ttv_multi_unchecked(pair.a, &xs), ttv_multi_unchecked(pair.b, &ys))
}

/// Advances a base-`r` counter, last digit fastest (lexicographic order).
fn next_tuple(tuple: &mut [usize], r: usize) {
    for d in tuple.iter_mut().rev() {
        *d += 1;
        if *d < r {
            return;
        }
        *d = 0;
    }
}

/// Materializes `B ⊗ A` as a dense tensor of dimension `m·n`; desk-scale
/// oracle only.
pub fn explicit_kron(pair: &KronPair<'_>, budget: usize) -> Result<DenseTensor> {
    let (m, n) = pair.shape();
    let entries = ((m * n) as u128).pow(pair.order() as u32);
    if entries > budget as u128 {
        return Err(Error::BudgetExceeded { entries, budget });
    }
    let a = pair.a.to_dense(budget)?;
    let b = pair.b.to_dense(budget)?;
    b.kron(&a, budget)
}
