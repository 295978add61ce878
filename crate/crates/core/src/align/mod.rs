//! Alignment iterations on a pair of motif tensors: TAME (dense implicit
//! contraction), exact LowRankTAME (factored iterates), and Λ-TAME
//! (independent power sequences per graph).

mod lambda;
mod lowrank;
mod rank_reveal;
mod tame;

use std::time::Instant;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kron::{implicit_kron_ttv, KronPair, DEFAULT_ACCUMULATION_BATCH, DEFAULT_COLUMN_CAP};
use crate::matching::{max_weight_matching, motifs_aligned, Matching};
use crate::tensor::{factorial, MotifTensor};

pub use lambda::lambda_tame;
pub use lowrank::lowrank_tame;
pub use rank_reveal::{rank_reveal, rank_reveal_with_spectrum, DEFAULT_TRUNC_TOL};
pub use tame::tame;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignOptions {
    /// Weight of the new contraction, in `(0, 1]`.
    pub alpha: f64,
    /// Shift on the previous iterate, `≥ 0`.
    pub beta: f64,
    pub max_iter: usize,
    /// Stop once consecutive λ estimates differ by less than this.
    pub tol: f64,
    /// Score every iterate with a matching. `None` uses the method default:
    /// on for TAME and LowRankTAME, off for Λ-TAME (one matching at the end).
    pub match_every: Option<bool>,
    /// Relative singular value cutoff in the rank-revealing step.
    pub trunc_tol: f64,
    /// Cap on `r^{k−1}` expansion columns before LowRankTAME switches to the
    /// accumulation form.
    pub column_cap: usize,
    pub batch: usize,
    /// Expand only nondecreasing index tuples, weighted by multiplicity.
    pub symmetric_expansion: bool,
    /// Keep every iterate in [`AlignmentOutput::trace`].
    #[serde(default)]
    pub keep_iterates: bool,
}

impl Default for AlignOptions {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 0.0,
            max_iter: 15,
            tol: 1e-6,
            match_every: None,
            trunc_tol: DEFAULT_TRUNC_TOL,
            column_cap: DEFAULT_COLUMN_CAP,
            batch: DEFAULT_ACCUMULATION_BATCH,
            symmetric_expansion: true,
            keep_iterates: false,
        }
    }
}

impl AlignOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must be in (0, 1], got {}",
                self.alpha
            )));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "beta must be finite and nonnegative, got {}",
                self.beta
            )));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(Error::InvalidArgument("tol must be nonnegative".into()));
        }
        if !(0.0..1.0).contains(&self.trunc_tol) {
            return Err(Error::InvalidArgument("trunc_tol must be in [0, 1)".into()));
        }
        Ok(())
    }
}

/// `X = U·Vᵀ` held as its factors.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPair {
    pub u: DMatrix<f64>,
    pub v: DMatrix<f64>,
}

impl FactorPair {
    pub fn new(u: DMatrix<f64>, v: DMatrix<f64>) -> Result<Self> {
        if u.ncols() != v.ncols() {
            return Err(Error::DimensionMismatch {
                expected: u.ncols(),
                found: v.ncols(),
            });
        }
        Ok(Self { u, v })
    }

    /// `(1/(mn))·𝟙𝟙ᵀ` as a rank-1 pair.
    pub fn uniform(m: usize, n: usize) -> Self {
        let s = 1.0 / (m * n) as f64;
        Self {
            u: DMatrix::from_element(m, 1, s),
            v: DMatrix::from_element(n, 1, 1.0),
        }
    }

    pub fn rank(&self) -> usize {
        self.u.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.u.nrows(), self.v.nrows())
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        &self.u * self.v.transpose()
    }

    /// `√trace((VᵀV)(UᵀU))` without forming `U·Vᵀ`.
    pub fn frob_norm(&self) -> f64 {
        let gu = self.u.tr_mul(&self.u);
        let gv = self.v.tr_mul(&self.v);
        gu.component_mul(&gv).sum().max(0.0).sqrt()
    }

    /// `trace(Xᵀ Y)` for `X = self`, `Y = other`.
    pub fn inner(&self, other: &FactorPair) -> f64 {
        let a = self.u.tr_mul(&other.u);
        let b = self.v.tr_mul(&other.v);
        a.component_mul(&b).sum()
    }
}

/// Which contraction path produced an iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContractionPath {
    Implicit,
    Expansion,
    Accumulation,
    PowerSequence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    /// 1-based iteration index.
    pub iteration: usize,
    pub lambda: f64,
    /// Rank of the factored iterate (`None` for dense iterates).
    pub rank: Option<usize>,
    /// Motifs aligned by the matching of this iterate, when scored.
    pub score: Option<usize>,
    /// `σ₂/σ₁` of the iterate before truncation, when computed.
    pub sigma_ratio: Option<f64>,
    pub path: ContractionPath,
    pub contraction_secs: f64,
    pub matching_secs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Iterate {
    Dense(DMatrix<f64>),
    Factored(FactorPair),
}

impl Iterate {
    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Iterate::Dense(x) => x.clone(),
            Iterate::Factored(f) => f.to_dense(),
        }
    }

    /// Factored form; a dense iterate is factored by a truncated SVD.
    pub fn to_factors(&self, trunc_tol: f64) -> Result<FactorPair> {
        match self {
            Iterate::Factored(f) => Ok(f.clone()),
            Iterate::Dense(x) => rank_reveal::factor_dense(x, trunc_tol).map(|(f, _)| f),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentOutput {
    pub best_iterate: Iterate,
    pub best_score: usize,
    /// 1-based index of the best iterate (0 when nothing was scored).
    pub best_iteration: usize,
    pub iterations: Vec<IterationStats>,
    pub best_matching: Matching,
    /// Stopped on the λ tolerance rather than the iteration limit.
    pub converged: bool,
    /// Every iterate in order, when `keep_iterates` is set.
    pub trace: Vec<Iterate>,
}

/// Matching of a dense score matrix and the motifs it aligns.
pub(crate) fn score_dense(
    x: &DMatrix<f64>,
    ta: &MotifTensor,
    tb: &MotifTensor,
) -> Result<(Matching, usize, f64)> {
    let t0 = Instant::now();
    let mt = max_weight_matching(x)?;
    let s = motifs_aligned(&mt, ta, tb);
    Ok((mt, s, t0.elapsed().as_secs_f64()))
}

/// Tracks the best scored iterate; earlier iterations win ties.
pub(crate) struct Best {
    pub iterate: Option<Iterate>,
    pub score: usize,
    pub iteration: usize,
    pub matching: Matching,
}

impl Best {
    pub fn new() -> Self {
        Self {
            iterate: None,
            score: 0,
            iteration: 0,
            matching: Matching::empty(),
        }
    }

    pub fn offer(&mut self, iteration: usize, score: usize, mt: Matching, it: impl FnOnce() -> Iterate) {
        if self.iterate.is_none() || score > self.score {
            self.iterate = Some(it());
            self.score = score;
            self.iteration = iteration;
            self.matching = mt;
        }
    }

    pub fn finish(self, iterations: Vec<IterationStats>, converged: bool) -> AlignmentOutput {
        AlignmentOutput {
            best_iterate: self.iterate.expect("at least one iterate is scored"),
            best_score: self.score,
            best_iteration: self.iteration,
            iterations,
            best_matching: self.matching,
            converged,
            trace: Vec::new(),
        }
    }
}

pub(crate) fn check_problem(ta: &MotifTensor, tb: &MotifTensor, opts: &AlignOptions) -> Result<()> {
    opts.validate()?;
    if ta.order() != tb.order() {
        return Err(Error::OrderMismatch {
            left: ta.order(),
            right: tb.order(),
        });
    }
    if ta.is_empty() || tb.is_empty() {
        return Err(Error::DegenerateProblem(format!(
            "motif tensors must be nonempty (nnz {} and {})",
            ta.nnz(),
            tb.nnz()
        )));
    }
    Ok(())
}

pub(crate) fn check_finite(x: impl IntoIterator<Item = f64>, what: &str) -> Result<()> {
    if x.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(Error::NumericalFailure(what.to_string()))
    }
}

/// `(1−α)·trace(WᵀX) + (α/k!)·(B ⊗ A)·vec(X)^k`.
///
/// With `α = 1` and `X` a matching matrix this counts the aligned motifs.
pub fn objective_value(
    x: &DMatrix<f64>,
    w: &DMatrix<f64>,
    ta: &MotifTensor,
    tb: &MotifTensor,
    alpha: f64,
) -> Result<f64> {
    if x.shape() != w.shape() {
        return Err(Error::DimensionMismatch {
            expected: w.nrows() * w.ncols(),
            found: x.nrows() * x.ncols(),
        });
    }
    let pair = KronPair::new(ta, tb)?;
    let linear = w.component_mul(x).sum();
    let y = implicit_kron_ttv(&pair, x)?;
    let form = y.component_mul(x).sum();
    let k = ta.order();
    Ok((1.0 - alpha) * linear + alpha / factorial(k) * form)
}
