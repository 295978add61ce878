use std::time::Instant;

use nalgebra::DMatrix;

use super::{check_finite, check_problem, score_dense, AlignOptions, AlignmentOutput, Best};
use super::{ContractionPath, Iterate, IterationStats};
use crate::error::{Error, Result};
use crate::kron::{implicit_kron_ttv, KronPair};
use crate::tensor::MotifTensor;

/// TAME with affine shift on dense iterates.
///
/// `w` defaults to the uniform `(1/(mn))·𝟙𝟙ᵀ`. Each iteration contracts the
/// implicit `B ⊗ A` against `X_ℓ`, estimates `λ = trace(X_ℓᵀ X̂)`, mixes
/// `α X̂ + αβ X_ℓ + (1−α) X₀` and renormalizes.
pub fn tame(
    ta: &MotifTensor,
    tb: &MotifTensor,
    w: Option<&DMatrix<f64>>,
    opts: &AlignOptions,
) -> Result<AlignmentOutput> {
    check_problem(ta, tb, opts)?;
    let pair = KronPair::new(ta, tb)?;
    let (m, n) = pair.shape();
    let w = match w {
        Some(w) => {
            if w.shape() != (m, n) {
                return Err(Error::DimensionMismatch {
                    expected: m * n,
                    found: w.nrows() * w.ncols(),
                });
            }
            w.clone()
        }
        None => DMatrix::from_element(m, n, 1.0 / (m * n) as f64),
    };
    check_finite(w.iter().copied(), "prior matrix")?;
    let wn = w.norm();
    if wn == 0.0 {
        return Err(Error::InvalidArgument("prior matrix must be nonzero".into()));
    }
    let x0 = w / wn;
    let match_every = opts.match_every.unwrap_or(true);
    let (a, b) = (opts.alpha, opts.beta);

    let mut x = x0.clone();
    let mut lambda_prev = f64::INFINITY;
    let mut best = Best::new();
    let mut stats = Vec::new();
    let mut converged = false;
    let mut trace = Vec::new();
    for ell in 1..=opts.max_iter {
        let t0 = Instant::now();
        let xhat = implicit_kron_ttv(&pair, &x)?;
        let contraction_secs = t0.elapsed().as_secs_f64();
        check_finite(xhat.iter().copied(), "contraction")?;
        let lambda = x.dot(&xhat);
        let mut next = xhat * a;
        if a * b != 0.0 {
            next += &x * (a * b);
        }
        if a < 1.0 {
            next += &x0 * (1.0 - a);
        }
        let nrm = next.norm();
        if !nrm.is_finite() {
            return Err(Error::NumericalFailure(format!("iterate {ell} is not finite")));
        }
        if nrm == 0.0 {
            return Err(Error::DegenerateIterate {
                iteration: ell,
                reason: "iterate vanished".into(),
            });
        }
        next /= nrm;
        let mut st = IterationStats {
            iteration: ell,
            lambda,
            rank: None,
            score: None,
            sigma_ratio: None,
            path: ContractionPath::Implicit,
            contraction_secs,
            matching_secs: 0.0,
        };
        if match_every {
            let (mt, s, secs) = score_dense(&next, ta, tb)?;
            st.score = Some(s);
            st.matching_secs = secs;
            best.offer(ell, s, mt, || Iterate::Dense(next.clone()));
        }
        stats.push(st);
        if opts.keep_iterates {
            trace.push(Iterate::Dense(next.clone()));
        }
        x = next;
        if (lambda - lambda_prev).abs() < opts.tol {
            converged = true;
            break;
        }
        lambda_prev = lambda;
    }
    if best.iterate.is_none() {
        let (mt, s, secs) = score_dense(&x, ta, tb)?;
        if let Some(last) = stats.last_mut() {
            last.score = Some(s);
            last.matching_secs = secs;
        }
        best.offer(stats.len(), s, mt, || Iterate::Dense(x.clone()));
    }
    let mut out = best.finish(stats, converged);
    out.trace = trace;
    Ok(out)
}
