use std::time::Instant;

use nalgebra::DMatrix;

use super::{check_finite, check_problem, score_dense, AlignOptions, AlignmentOutput, Best};
use super::{ContractionPath, FactorPair, Iterate, IterationStats};
use crate::error::{Error, Result};
use crate::tensor::{ttv_vector, MotifTensor};

/// Λ-TAME: independent shifted power sequences on `A` and `B`, stored as the
/// columns of `U` (`m × (L+1)`) and `V` (`n × (L+1)`), then matched on
/// `X = U·Vᵀ`.
///
/// Runs exactly `opts.max_iter` steps; `opts.tol` is not used. The reported
/// λ per step is `λ_A·λ_B`, the product of the two Rayleigh quotients
/// `⟨x, T x^{k−1}⟩`.
pub fn lambda_tame(
    ta: &MotifTensor,
    tb: &MotifTensor,
    opts: &AlignOptions,
) -> Result<(FactorPair, AlignmentOutput)> {
    check_problem(ta, tb, opts)?;
    let (m, n) = (ta.dim(), tb.dim());
    let cols = opts.max_iter + 1;
    let mut u = DMatrix::<f64>::zeros(m, cols);
    let mut v = DMatrix::<f64>::zeros(n, cols);
    u.column_mut(0).fill(1.0 / (m as f64).sqrt());
    v.column_mut(0).fill(1.0 / (n as f64).sqrt());
    let u1: Vec<f64> = u.column(0).iter().copied().collect();
    let v1: Vec<f64> = v.column(0).iter().copied().collect();
    let match_every = opts.match_every.unwrap_or(false);

    let mut best = Best::new();
    let mut stats = Vec::new();
    let mut pu = u1.clone();
    let mut pv = v1.clone();
    let mut trace = Vec::new();
    for ell in 1..=opts.max_iter {
        let t0 = Instant::now();
        let (nu, la) = step(ta, &pu, &u1, opts, ell)?;
        let (nv, lb) = step(tb, &pv, &v1, opts, ell)?;
        let contraction_secs = t0.elapsed().as_secs_f64();
        u.column_mut(ell).copy_from_slice(&nu);
        v.column_mut(ell).copy_from_slice(&nv);
        let mut st = IterationStats {
            iteration: ell,
            lambda: la * lb,
            rank: Some(ell + 1),
            score: None,
            sigma_ratio: None,
            path: ContractionPath::PowerSequence,
            contraction_secs,
            matching_secs: 0.0,
        };
        if match_every {
            let fp = FactorPair {
                u: u.columns(0, ell + 1).into_owned(),
                v: v.columns(0, ell + 1).into_owned(),
            };
            let (mt, s, secs) = score_dense(&fp.to_dense(), ta, tb)?;
            st.score = Some(s);
            st.matching_secs = secs;
            best.offer(ell, s, mt, || Iterate::Factored(fp));
        }
        stats.push(st);
        if opts.keep_iterates {
            trace.push(Iterate::Factored(FactorPair {
                u: u.columns(0, ell + 1).into_owned(),
                v: v.columns(0, ell + 1).into_owned(),
            }));
        }
        pu = nu;
        pv = nv;
    }
    let factors = FactorPair { u, v };
    if best.iterate.is_none() {
        let (mt, s, secs) = score_dense(&factors.to_dense(), ta, tb)?;
        if let Some(last) = stats.last_mut() {
            last.score = Some(s);
            last.matching_secs = secs;
        }
        best.offer(stats.len(), s, mt, || Iterate::Factored(factors.clone()));
    }
    let mut out = best.finish(stats, false);
    out.trace = trace;
    Ok((factors, out))
}

/// One shifted power step; returns the new unit column and `⟨x, T x^{k−1}⟩`.
fn step(
    t: &MotifTensor,
    x: &[f64],
    first: &[f64],
    opts: &AlignOptions,
    iteration: usize,
) -> Result<(Vec<f64>, f64)> {
    let y = ttv_vector(t, x);
    check_finite(y.iter().copied(), "contraction")?;
    let lambda: f64 = y.iter().zip(x).map(|(a, b)| a * b).sum();
    let (a, b) = (opts.alpha, opts.beta);
    let mut z: Vec<f64> = y
        .iter()
        .zip(x)
        .zip(first)
        .map(|((&yi, &xi), &fi)| a * yi + a * b * xi + (1.0 - a) * fi)
        .collect();
    let nrm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !nrm.is_finite() {
        return Err(Error::NumericalFailure(format!("column {iteration} is not finite")));
    }
    if nrm == 0.0 {
        return Err(Error::DegenerateIterate {
            iteration,
            reason: "contraction of the column is zero".into(),
        });
    }
    z.iter_mut().for_each(|v| *v /= nrm);
    Ok((z, lambda))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> MotifTensor {
        MotifTensor::new(3, 3, vec![vec![0, 1, 2]], None).unwrap()
    }

    #[test]
    fn triangle_columns_stay_uniform() {
        let t = triangle();
        let (f, out) = lambda_tame(&t, &t, &AlignOptions::default()).unwrap();
        assert_eq!(f.u.ncols(), 16);
        let c = 1.0 / 3f64.sqrt();
        assert!(f.u.iter().all(|&x| (x - c).abs() < 1e-12));
        let x = f.to_dense();
        assert!(x.iter().all(|&v| (v - x[(0, 0)]).abs() < 1e-12));
        assert_eq!(out.best_score, 1);
        assert_eq!(out.iterations.len(), 15);
    }

    #[test]
    fn zero_steps_give_uniform_rank_one() {
        let t = triangle();
        let opts = AlignOptions {
            max_iter: 0,
            ..AlignOptions::default()
        };
        let (f, out) = lambda_tame(&t, &t, &opts).unwrap();
        assert_eq!(f.rank(), 1);
        assert_eq!(out.best_matching.len(), 3);
    }

    #[test]
    fn identical_graphs_give_identical_factors() {
        let a = MotifTensor::new(3, 5, vec![vec![0, 1, 2], vec![1, 2, 3], vec![0, 3, 4]], None)
            .unwrap();
        let opts = AlignOptions {
            alpha: 0.5,
            beta: 1.0,
            ..AlignOptions::default()
        };
        let (f, _) = lambda_tame(&a, &a, &opts).unwrap();
        assert_eq!(f.u, f.v);
    }

    #[test]
    fn unit_columns() {
        let a = MotifTensor::new(3, 5, vec![vec![0, 1, 2], vec![1, 2, 3], vec![0, 3, 4]], None)
            .unwrap();
        let b = MotifTensor::new(3, 4, vec![vec![0, 1, 2], vec![1, 2, 3]], None).unwrap();
        let (f, _) = lambda_tame(&a, &b, &AlignOptions::default()).unwrap();
        for c in f.u.column_iter().chain(f.v.column_iter()) {
            assert!((c.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn vanishing_column_reports_iteration() {
        let a = triangle();
        let e1 = [1.0, 0.0, 0.0];
        let err = step(&a, &e1, &e1, &AlignOptions::default(), 4).unwrap_err();
        assert!(matches!(err, Error::DegenerateIterate { iteration: 4, .. }));
    }
}
