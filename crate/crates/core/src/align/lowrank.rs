use std::time::Instant;

use nalgebra::DMatrix;

use super::rank_reveal::{factor_dense, rank_reveal_with_spectrum};
use super::{check_finite, check_problem, score_dense, AlignOptions, AlignmentOutput, Best};
use super::{ContractionPath, FactorPair, Iterate, IterationStats};
use crate::error::{Error, Result};
use crate::kron::{
    accumulate_kron_ttv, expansion_columns, lowrank_kron_ttv, lowrank_kron_ttv_sym, KronPair,
};
use crate::tensor::MotifTensor;

/// Exact LowRankTAME: the TAME iteration carried out on factors `X = U·Vᵀ`.
///
/// The next iterate's factors come from the `r^{k−1}` expansion columns,
/// concatenated with the scaled previous and initial factors, then reduced by
/// [`rank_reveal`](super::rank_reveal). When `r^{k−1}` exceeds
/// `opts.column_cap` the contraction is accumulated into a dense matrix and
/// refactored by a truncated SVD instead. In exact arithmetic the iterates
/// equal those of [`tame`](super::tame).
pub fn lowrank_tame(
    ta: &MotifTensor,
    tb: &MotifTensor,
    w: Option<&FactorPair>,
    opts: &AlignOptions,
) -> Result<AlignmentOutput> {
    check_problem(ta, tb, opts)?;
    let pair = KronPair::new(ta, tb)?;
    let (m, n) = pair.shape();
    let k = pair.order();
    let w = match w {
        Some(w) => {
            if w.shape() != (m, n) {
                return Err(Error::DimensionMismatch {
                    expected: m * n,
                    found: w.u.nrows() * w.v.nrows(),
                });
            }
            if w.rank() == 0 {
                return Err(Error::InvalidArgument("prior factors have no columns".into()));
            }
            w.clone()
        }
        None => FactorPair::uniform(m, n),
    };
    check_finite(w.u.iter().chain(w.v.iter()).copied(), "prior factors")?;
    let c = w.frob_norm();
    if c == 0.0 {
        return Err(Error::InvalidArgument("prior matrix must be nonzero".into()));
    }
    let t = w.rank();
    let init = FactorPair {
        u: w.u,
        v: w.v / c,
    };
    let match_every = opts.match_every.unwrap_or(true);
    let (a, b) = (opts.alpha, opts.beta);

    let mut cur = init.clone();
    let mut lambda_prev = f64::INFINITY;
    let mut best = Best::new();
    let mut stats = Vec::new();
    let mut converged = false;
    let mut trace = Vec::new();
    for ell in 1..=opts.max_iter {
        let r = cur.rank();
        let full_cols = expansion_columns(r, k);
        let t0 = Instant::now();
        let (next, sigma, path, lambda) = if full_cols <= opts.column_cap as u128 {
            let (uh, vh) = if opts.symmetric_expansion {
                lowrank_kron_ttv_sym(&pair, &cur.u, &cur.v, opts.column_cap)?
            } else {
                lowrank_kron_ttv(&pair, &cur.u, &cur.v, opts.column_cap)?
            };
            check_finite(uh.iter().chain(vh.iter()).copied(), "contraction")?;
            let hat = FactorPair { u: uh, v: vh };
            let lambda = hat.inner(&cur);
            let mut blocks = vec![(a.sqrt(), &hat)];
            if a * b != 0.0 {
                blocks.push(((a * b).sqrt(), &cur));
            }
            if a < 1.0 {
                blocks.push(((1.0 - a).sqrt(), &init));
            }
            let (uc, vc) = concat(&blocks, m, n);
            let (f, sigma) = rank_reveal_with_spectrum(&uc, &vc, opts.trunc_tol)
                .map_err(|e| degenerate(e, ell))?;
            (f, sigma, ContractionPath::Expansion, lambda)
        } else {
            let xh = accumulate_kron_ttv(&pair, &cur.u, &cur.v, opts.batch)?;
            check_finite(xh.iter().copied(), "contraction")?;
            let xcur = cur.to_dense();
            let lambda = xh.dot(&xcur);
            let mut dense = xh * a;
            if a * b != 0.0 {
                dense += xcur * (a * b);
            }
            if a < 1.0 {
                dense += init.to_dense() * (1.0 - a);
            }
            let (f, sigma) = factor_dense(&dense, opts.trunc_tol).map_err(|e| degenerate(e, ell))?;
            (f, sigma, ContractionPath::Accumulation, lambda)
        };
        let contraction_secs = t0.elapsed().as_secs_f64();
        let bound = full_cols.saturating_add((r + t) as u128);
        assert!(
            next.rank() as u128 <= bound,
            "rank {} exceeds the bound {bound} at iteration {ell}",
            next.rank()
        );
        let mut next = next;
        let nrm = next.frob_norm();
        if !nrm.is_finite() {
            return Err(Error::NumericalFailure(format!("iterate {ell} is not finite")));
        }
        if nrm == 0.0 {
            return Err(Error::DegenerateIterate {
                iteration: ell,
                reason: "iterate vanished".into(),
            });
        }
        next.v /= nrm;
        let sigma_ratio = match sigma.as_slice() {
            [s1, s2, ..] => s2 / s1,
            _ => 0.0,
        };
        let mut st = IterationStats {
            iteration: ell,
            lambda,
            rank: Some(next.rank()),
            score: None,
            sigma_ratio: Some(sigma_ratio),
            path,
            contraction_secs,
            matching_secs: 0.0,
        };
        if match_every {
            let (mt, s, secs) = score_dense(&next.to_dense(), ta, tb)?;
            st.score = Some(s);
            st.matching_secs = secs;
            best.offer(ell, s, mt, || Iterate::Factored(next.clone()));
        }
        stats.push(st);
        if opts.keep_iterates {
            trace.push(Iterate::Factored(next.clone()));
        }
        cur = next;
        if (lambda - lambda_prev).abs() < opts.tol {
            converged = true;
            break;
        }
        lambda_prev = lambda;
    }
    if best.iterate.is_none() {
        let (mt, s, secs) = score_dense(&cur.to_dense(), ta, tb)?;
        if let Some(last) = stats.last_mut() {
            last.score = Some(s);
            last.matching_secs = secs;
        }
        best.offer(stats.len(), s, mt, || Iterate::Factored(cur.clone()));
    }
    let mut out = best.finish(stats, converged);
    out.trace = trace;
    Ok(out)
}

fn degenerate(e: Error, iteration: usize) -> Error {
    match e {
        Error::DegenerateProblem(reason) => Error::DegenerateIterate { iteration, reason },
        other => other,
    }
}

fn concat(blocks: &[(f64, &FactorPair)], m: usize, n: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let total: usize = blocks.iter().map(|(_, f)| f.rank()).sum();
    let mut u = DMatrix::zeros(m, total);
    let mut v = DMatrix::zeros(n, total);
    let mut at = 0;
    for &(s, f) in blocks {
        let r = f.rank();
        u.columns_mut(at, r).copy_from(&(&f.u * s));
        v.columns_mut(at, r).copy_from(&(&f.v * s));
        at += r;
    }
    (u, v)
}
