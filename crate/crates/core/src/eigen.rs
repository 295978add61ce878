//! Z-eigenpairs of symmetric tensors and the Kronecker decoupling check.
//!
//! A Z-eigenpair `(λ, x)` satisfies `T·x^{k−1} = λ x` with `‖x‖₂ = 1`. The
//! solvers here are multi-start shifted power iterations (SS-HOPM), with a few
//! Newton steps on the eigen equation to polish converged pairs.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{factorial, ttv_vector, DenseTensor, MotifTensor, DEFAULT_DENSE_BUDGET};

/// Operations the eigen solvers need from a symmetric tensor.
pub trait SymmetricTensor {
    fn order(&self) -> usize;
    fn dim(&self) -> usize;
    /// `T·x^{k−1}`
    fn apply(&self, x: &[f64]) -> Vec<f64>;
    /// `T·x^{k−2}` as an `n × n` matrix.
    fn apply_matrix(&self, x: &[f64]) -> DMatrix<f64>;
}

impl SymmetricTensor for MotifTensor {
    fn order(&self) -> usize {
        MotifTensor::order(self)
    }

    fn dim(&self) -> usize {
        MotifTensor::dim(self)
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        ttv_vector(self, x)
    }

    fn apply_matrix(&self, x: &[f64]) -> DMatrix<f64> {
        let k = MotifTensor::order(self);
        let n = MotifTensor::dim(self);
        let scale = factorial(k - 2);
        let mut out = DMatrix::zeros(n, n);
        for (e, &w) in self.hyperedges().zip(self.weights()) {
            for p in 0..k {
                for q in p + 1..k {
                    let rest: f64 = e
                        .iter()
                        .enumerate()
                        .filter(|&(t, _)| t != p && t != q)
                        .map(|(_, &j)| x[j])
                        .product();
                    let v = w * scale * rest;
                    out[(e[p], e[q])] += v;
                    out[(e[q], e[p])] += v;
                }
            }
        }
        out
    }
}

impl SymmetricTensor for DenseTensor {
    fn order(&self) -> usize {
        DenseTensor::order(self)
    }

    fn dim(&self) -> usize {
        DenseTensor::dim(self)
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        DenseTensor::apply(self, x)
    }

    fn apply_matrix(&self, x: &[f64]) -> DMatrix<f64> {
        let n = DenseTensor::dim(self);
        // symmetric, so row/column order of the flat buffer does not matter
        DMatrix::from_column_slice(n, n, &DenseTensor::apply_matrix(self, x))
    }
}

/// Symmetric tensor stored by its distinct entries, one per sorted index
/// tuple. Contractions cost `O(C(n+k−1, k)·k²)` rather than `O(nᵏ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PackedSymmetric {
    order: usize,
    dim: usize,
    tuples: Vec<usize>,
    values: Vec<f64>,
    // per tuple, one term per distinct index: position in the tuple and
    // coefficient; `starts[t]..starts[t + 1]` are the terms of tuple t
    starts: Vec<usize>,
    positions: Vec<usize>,
    coefs: Vec<f64>,
    // the same for `T·x^{k−2}`: one term per distinct ordered index pair
    pair_starts: Vec<usize>,
    pairs: Vec<(usize, usize)>,
    pair_coefs: Vec<f64>,
}

impl PackedSymmetric {
    /// Reads the sorted-index entries of `t`, which must be symmetric.
    pub fn from_dense(t: &DenseTensor) -> Self {
        let (k, n) = (t.order(), t.dim());
        let mut out = Self {
            order: k,
            dim: n,
            tuples: Vec::new(),
            values: Vec::new(),
            starts: vec![0],
            positions: Vec::new(),
            coefs: Vec::new(),
            pair_starts: vec![0],
            pairs: Vec::new(),
            pair_coefs: Vec::new(),
        };
        if n == 0 {
            return out;
        }
        let mut idx = vec![0usize; k];
        loop {
            let v = t.get(&idx);
            if v != 0.0 {
                out.push(&idx, v);
            }
            let mut pos = k;
            while pos > 0 && idx[pos - 1] == n - 1 {
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
        out
    }

    fn push(&mut self, tuple: &[usize], v: f64) {
        self.tuples.extend_from_slice(tuple);
        self.values.push(v);
        for (p, &i) in tuple.iter().enumerate() {
            if p > 0 && tuple[p - 1] == i {
                continue;
            }
            let rest: Vec<usize> = tuple[..p].iter().chain(&tuple[p + 1..]).copied().collect();
            self.positions.push(p);
            self.coefs.push(v * arrangements(&rest));
            for (q, &j) in rest.iter().enumerate() {
                if q > 0 && rest[q - 1] == j {
                    continue;
                }
                // position of this j in the full tuple
                let q_full = if q < p { q } else { q + 1 };
                let rest2: Vec<usize> =
                    rest[..q].iter().chain(&rest[q + 1..]).copied().collect();
                self.pairs.push((p, q_full));
                self.pair_coefs.push(v * arrangements(&rest2));
            }
        }
        self.starts.push(self.positions.len());
        self.pair_starts.push(self.pairs.len());
    }

    fn apply_fixed<const K: usize>(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        for (t, e) in self.tuples.chunks_exact(K).enumerate() {
            let mut xs = [0.0; K];
            for p in 0..K {
                xs[p] = x[e[p]];
            }
            // suffix[p] = Π_{q > p} xs[q]
            let mut suffix = [1.0; K];
            for p in (0..K - 1).rev() {
                suffix[p] = suffix[p + 1] * xs[p + 1];
            }
            let (lo, hi) = (self.starts[t], self.starts[t + 1]);
            let mut prefix = 1.0;
            let mut at = 0;
            for (&p, &c) in self.positions[lo..hi].iter().zip(&self.coefs[lo..hi]) {
                while at < p {
                    prefix *= xs[at];
                    at += 1;
                }
                y[e[p]] += c * prefix * suffix[p];
            }
        }
        y
    }

    fn apply_any(&self, x: &[f64]) -> Vec<f64> {
        let k = self.order;
        let mut y = vec![0.0; self.dim];
        let mut suffix = vec![1.0; k + 1];
        for (t, e) in self.tuples.chunks_exact(k).enumerate() {
            for p in (0..k).rev() {
                suffix[p] = suffix[p + 1] * x[e[p]];
            }
            let mut prefix = 1.0;
            let mut at = 0;
            for term in self.starts[t]..self.starts[t + 1] {
                let p = self.positions[term];
                while at < p {
                    prefix *= x[e[at]];
                    at += 1;
                }
                y[e[p]] += self.coefs[term] * prefix * suffix[p + 1];
            }
        }
        y
    }

    /// Number of stored distinct entries.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }
}

/// Distinct orderings of a sorted multiset.
fn arrangements(sorted: &[usize]) -> f64 {
    let mut out = factorial(sorted.len());
    let mut run = 1;
    for p in 1..=sorted.len() {
        if p < sorted.len() && sorted[p] == sorted[p - 1] {
            run += 1;
        } else {
            out /= factorial(run);
            run = 1;
        }
    }
    out
}

impl SymmetricTensor for PackedSymmetric {
    fn order(&self) -> usize {
        self.order
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self.order {
            2 => self.apply_fixed::<2>(x),
            3 => self.apply_fixed::<3>(x),
            4 => self.apply_fixed::<4>(x),
            5 => self.apply_fixed::<5>(x),
            6 => self.apply_fixed::<6>(x),
            _ => self.apply_any(x),
        }
    }

    fn apply_matrix(&self, x: &[f64]) -> DMatrix<f64> {
        let k = self.order;
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for (t, e) in self.tuples.chunks_exact(k).enumerate() {
            for term in self.pair_starts[t]..self.pair_starts[t + 1] {
                let (p, q) = self.pairs[term];
                let mut prod = self.pair_coefs[term];
                for (r, &j) in e.iter().enumerate() {
                    if r != p && r != q {
                        prod *= x[j];
                    }
                }
                out[(e[p], e[q])] += prod;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub lambda: f64,
    pub vector: Vec<f64>,
    /// `‖T·x^{k−1} − λ x‖₂`
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

pub fn residual<T: SymmetricTensor + ?Sized>(t: &T, lambda: f64, x: &[f64]) -> f64 {
    t.apply(x)
        .iter()
        .zip(x)
        .map(|(y, xi)| (y - lambda * xi).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Shifted symmetric higher-order power method:
/// `x ← normalize(T·x^{k−1} + shift·x)` until successive eigenvalue
/// estimates `⟨x, T·x^{k−1}⟩` differ by less than `tol`. With a negative
/// shift the normalized update is negated, which finds local minima of
/// `T·xᵏ`.
///
/// Running out of iterations is not an error; the pair comes back with
/// `converged = false`.
pub fn sshopm<T: SymmetricTensor + ?Sized>(
    t: &T,
    shift: f64,
    x0: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<EigenPair> {
    sshopm_watched(t, shift, x0, tol, max_iter, |_, _| false)
}

/// [`sshopm`] that also stops, unconverged, as soon as `watch` returns true
/// for the current iterate and eigenvalue estimate.
fn sshopm_watched<T, F>(
    t: &T,
    shift: f64,
    x0: &[f64],
    tol: f64,
    max_iter: usize,
    mut watch: F,
) -> Result<EigenPair>
where
    T: SymmetricTensor + ?Sized,
    F: FnMut(&[f64], f64) -> bool,
{
    if x0.len() != t.dim() {
        return Err(Error::DimensionMismatch {
            expected: t.dim(),
            found: x0.len(),
        });
    }
    let n0 = norm(x0);
    if !(n0 > 0.0 && n0.is_finite()) {
        return Err(Error::InvalidArgument("starting vector must be nonzero".into()));
    }
    let mut x: Vec<f64> = x0.iter().map(|v| v / n0).collect();
    let mut y = t.apply(&x);
    let mut lambda = dot(&x, &y);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let mut z: Vec<f64> = y.iter().zip(&x).map(|(yi, xi)| yi + shift * xi).collect();
        let nz = norm(&z);
        if nz == 0.0 {
            return Err(Error::DegenerateIterate {
                iteration: iterations,
                reason: "T·x^(k-1) + shift·x vanished".into(),
            });
        }
        if !nz.is_finite() {
            return Err(Error::NumericalFailure("power iterate overflowed".into()));
        }
        // a negative shift makes the map concave; stepping against the
        // gradient keeps the sign of x stable for odd orders
        let scale = if shift < 0.0 { -nz } else { nz };
        z.iter_mut().for_each(|v| *v /= scale);
        x = z;
        y = t.apply(&x);
        let next = dot(&x, &y);
        let delta = (next - lambda).abs();
        lambda = next;
        if delta < tol {
            converged = true;
            break;
        }
        if watch(&x, lambda) {
            break;
        }
    }
    let residual = y
        .iter()
        .zip(&x)
        .map(|(yi, xi)| (yi - lambda * xi).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(EigenPair {
        lambda,
        vector: x,
        residual,
        converged,
        iterations,
    })
}

/// Fixed points and 2-cycles already reached by one shift, so later runs with
/// that shift can stop once they come close to one.
struct Landmarks {
    even: bool,
    points: Vec<Vec<f64>>,
    cycles: Vec<Vec<f64>>,
}

/// Distance under which an iterate is taken to be captured by a landmark.
const CAPTURE: f64 = 1e-1;

impl Landmarks {
    fn new(order: usize) -> Self {
        Self {
            even: order.is_multiple_of(2),
            points: Vec::new(),
            cycles: Vec::new(),
        }
    }

    fn near(&self, x: &[f64], p: &[f64]) -> bool {
        let (mut plus, mut minus) = (0.0, 0.0);
        for (a, b) in x.iter().zip(p) {
            plus += (a - b) * (a - b);
            minus += (a + b) * (a + b);
        }
        let d2 = if self.even { plus.min(minus) } else { plus };
        d2 < CAPTURE * CAPTURE
    }
}

/// Outcome of one watched run in the multi-start search.
enum Run {
    Converged(EigenPair),
    /// Captured by an earlier converged run, so nothing new.
    Captured,
    Unconverged(EigenPair),
}

fn watched_run<T: SymmetricTensor + ?Sized>(
    t: &T,
    shift: f64,
    x0: &[f64],
    opts: &EigenOptions,
    marks: &mut Landmarks,
) -> Result<Run> {
    let mut prev: [Option<Vec<f64>>; 2] = [None, None];
    let mut captured = false;
    let mut cycle = false;
    let mut jumped: Option<EigenPair> = None;
    let mut trigger = NEWTON_TRIGGER;
    let mut last_abs = f64::NEG_INFINITY;
    let p = sshopm_watched(t, shift, x0, opts.tol, opts.max_iter, |x, lambda| {
        // the unshifted method only converges reliably while |λ| is
        // nondecreasing; once it drops the run is abandoned
        if shift == 0.0 {
            if lambda.abs() < last_abs - 1e-12 * last_abs.max(1.0) {
                return true;
            }
            last_abs = lambda.abs();
        }
        if marks.points.iter().any(|q| marks.near(x, q)) {
            captured = true;
            return true;
        }
        if marks.cycles.iter().any(|q| marks.near(x, q)) {
            return true;
        }
        if let [Some(back2), Some(back1)] = &prev {
            let d2 = dist2(x, back2);
            let d1 = dist2(x, back1);
            if d2 < 1e-18 && d1 > 1e-12 {
                cycle = true;
                return true;
            }
            if d1 < trigger * trigger {
                if let Some(q) = newton_jump(t, shift, x, opts) {
                    if marks.points.iter().any(|r| marks.near(&q.vector, r)) {
                        captured = true;
                    } else {
                        jumped = Some(q);
                    }
                    return true;
                }
                trigger /= 10.0;
            }
        }
        prev.swap(0, 1);
        prev[1] = Some(x.to_vec());
        false
    })?;
    if captured {
        return Ok(Run::Captured);
    }
    let p = match jumped {
        Some(q) => EigenPair {
            iterations: p.iterations + q.iterations,
            ..q
        },
        None => p,
    };
    if cycle {
        marks.cycles.push(p.vector.clone());
        if let Some(q) = prev[1].take() {
            marks.cycles.push(q);
        }
    }
    Ok(if p.converged {
        marks.points.push(p.vector.clone());
        Run::Converged(p)
    } else {
        Run::Unconverged(p)
    })
}

/// Power step length below which a Newton solve is tried from the iterate.
const NEWTON_TRIGGER: f64 = 1e-3;

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// Newton from a slowly converging power iterate. The result is kept only if
/// it stays close to `x`, does not move λ against the direction of the shift,
/// and is the matching kind of extremum of `T·xᵏ` on the sphere (maximum for
/// a positive shift, minimum for a negative one).
fn newton_jump<T: SymmetricTensor + ?Sized>(
    t: &T,
    shift: f64,
    x: &[f64],
    opts: &EigenOptions,
) -> Option<EigenPair> {
    let lambda0 = dot(x, &t.apply(x));
    let mut p = newton(t, x, lambda0, 1e-14, 8, 0.1)?;
    if !(p.residual <= opts.residual_cap() && dist2(&p.vector, x) < 1e-2) {
        return None;
    }
    let slack = 1e-9 * lambda0.abs().max(1.0);
    let (max_ok, min_ok) = extremum_kind(t, &p);
    let ok = if shift > 0.0 {
        p.lambda >= lambda0 - slack && max_ok
    } else if shift < 0.0 {
        p.lambda <= lambda0 + slack && min_ok
    } else {
        max_ok || min_ok
    };
    if !ok {
        return None;
    }
    p.converged = true;
    Some(p)
}

/// Whether `(λ, x)` is a local maximum / minimum of `T·xᵏ` on the unit
/// sphere, from the eigenvalues of `P((k−1)·T·x^{k−2} − λI)P` with
/// `P = I − xxᵀ`.
fn extremum_kind<T: SymmetricTensor + ?Sized>(t: &T, p: &EigenPair) -> (bool, bool) {
    let n = t.dim();
    let k = t.order() as f64;
    let x = DVector::from_column_slice(&p.vector);
    let proj = DMatrix::<f64>::identity(n, n) - &x * x.transpose();
    let mut c = t.apply_matrix(&p.vector) * (k - 1.0);
    for i in 0..n {
        c[(i, i)] -= p.lambda;
    }
    let c = &proj * c * &proj;
    let eig = c.symmetric_eigenvalues();
    let tol = 1e-9 * (k * p.lambda.abs()).max(1.0);
    (eig.iter().all(|&e| e <= tol), eig.iter().all(|&e| e >= -tol))
}

/// Newton's method on `F(x, λ) = (T·x^{k−1} − λx, (1 − xᵀx)/2)`, which
/// converges to nearby eigenpairs of any stability type. Returns the iterate
/// with the smallest residual seen; `converged` marks `residual ≤ tol`.
/// Gives up once an iterate is farther than `reach` from `x0`.
fn newton<T: SymmetricTensor + ?Sized>(
    t: &T,
    x0: &[f64],
    lambda0: f64,
    tol: f64,
    max_steps: usize,
    reach: f64,
) -> Option<EigenPair> {
    let n = t.dim();
    let k = t.order() as f64;
    let mut x = x0.to_vec();
    let mut lambda = lambda0;
    let mut best: Option<EigenPair> = None;
    for step in 0..=max_steps {
        let y = t.apply(&x);
        let r = norm(&y.iter().zip(&x).map(|(a, b)| a - lambda * b).collect::<Vec<_>>());
        if best.as_ref().is_none_or(|b| r < b.residual) {
            best = Some(EigenPair {
                lambda,
                vector: x.clone(),
                residual: r,
                converged: r <= tol,
                iterations: step,
            });
        }
        if r <= tol || step == max_steps {
            break;
        }
        let mut jac = DMatrix::<f64>::zeros(n + 1, n + 1);
        let h = t.apply_matrix(&x);
        for i in 0..n {
            for j in 0..n {
                jac[(i, j)] = (k - 1.0) * h[(i, j)];
            }
            jac[(i, i)] -= lambda;
            jac[(i, n)] = -x[i];
            jac[(n, i)] = -x[i];
        }
        let mut rhs = DVector::<f64>::zeros(n + 1);
        for i in 0..n {
            rhs[i] = -(y[i] - lambda * x[i]);
        }
        let Some(d) = jac.lu().solve(&rhs) else {
            break;
        };
        if !d.iter().all(|v| v.is_finite()) {
            break;
        }
        for i in 0..n {
            x[i] += d[i];
        }
        // renormalizing keeps the unit-norm constraint exact
        let nx = norm(&x);
        if !(nx > 0.0 && nx.is_finite()) {
            break;
        }
        x.iter_mut().for_each(|v| *v /= nx);
        if dist2(&x, x0) > reach * reach {
            return None;
        }
        lambda = dot(&x, &t.apply(&x));
    }
    best
}

/// Tries to shrink the residual of a converged power-iteration pair with a
/// few Newton steps, keeping the result only if it stays on the same pair.
fn polish<T: SymmetricTensor + ?Sized>(t: &T, pair: &EigenPair, tol: f64) -> EigenPair {
    if let Some(p) = newton(t, &pair.vector, pair.lambda, tol, 8, f64::INFINITY) {
        let same_pair = dot(&p.vector, &pair.vector).abs() > 1.0 - 1e-6
            && (p.lambda - pair.lambda).abs() <= 1e-6 * pair.lambda.abs().max(1.0);
        if same_pair && p.residual < pair.residual {
            return EigenPair {
                iterations: pair.iterations + p.iterations,
                converged: pair.converged,
                ..p
            };
        }
    }
    pair.clone()
}

/// Puts a pair into canonical sign: for odd order `(λ, x)` and `(−λ, −x)`
/// are both eigenpairs, so `λ ≥ 0` is chosen. The vector's largest-magnitude
/// entry is then made positive when the sign is otherwise free.
fn canonical_sign(order: usize, pair: &mut EigenPair) {
    let flip = |p: &mut EigenPair| p.vector.iter_mut().for_each(|v| *v = -*v);
    if order % 2 == 1 {
        if pair.lambda < 0.0 {
            pair.lambda = -pair.lambda;
            flip(pair);
        }
        if pair.lambda != 0.0 {
            return;
        }
    }
    let lead = pair
        .vector
        .iter()
        .copied()
        .fold(0.0f64, |acc, v| if v.abs() > acc.abs() + 1e-12 { v } else { acc });
    if lead < 0.0 {
        flip(pair);
    }
}

/// Dominance order: larger `|λ|`, then larger `λ`, then lexicographically
/// larger vector. Magnitudes within a relative `1e−9` count as tied, so
/// `±λ` pairs found to rounding error fall through to the sign.
fn dominates(a: &EigenPair, b: &EigenPair) -> bool {
    use std::cmp::Ordering;
    let (x, y) = (a.lambda.abs(), b.lambda.abs());
    if (x - y).abs() > 1e-9 * x.max(y).max(1.0) {
        return x > y;
    }
    match a.lambda.partial_cmp(&b.lambda) {
        Some(Ordering::Greater) => return true,
        Some(Ordering::Less) => return false,
        _ => {}
    }
    a.vector
        .iter()
        .zip(&b.vector)
        .find_map(|(x, y)| match x.partial_cmp(y) {
            Some(Ordering::Equal) | None => None,
            Some(o) => Some(o == Ordering::Greater),
        })
        .unwrap_or(false)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenOptions {
    /// Random starting points; each one is run with every shift.
    pub restarts: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
    /// Base shift `β₀`; runs use shifts `0, +β₀, −β₀`.
    pub shift: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            restarts: 100,
            seed: 0,
            tol: 1e-10,
            max_iter: 1000,
            shift: 1.0,
        }
    }
}

impl EigenOptions {
    fn shifts(&self) -> Vec<f64> {
        if self.shift == 0.0 {
            vec![0.0]
        } else {
            vec![0.0, self.shift, -self.shift]
        }
    }

    /// Residual accepted for a converged pair.
    pub fn residual_cap(&self) -> f64 {
        10.0 * self.tol
    }
}

/// Uniform point on the unit sphere (normalized Gaussian).
pub fn sphere_point<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let n = norm(&v);
        if n > 1e-300 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Multi-start search for the eigenpair of largest `|λ|`.
pub fn dominant_eigen<T: SymmetricTensor + ?Sized>(t: &T, opts: &EigenOptions) -> Result<EigenPair> {
    if opts.restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let shifts = opts.shifts();
    let mut best: Option<EigenPair> = None;
    let mut fallback: Option<EigenPair> = None;
    let mut last_err = None;
    let mut marks: Vec<Landmarks> = shifts.iter().map(|_| Landmarks::new(t.order())).collect();
    for _ in 0..opts.restarts {
        let x0 = sphere_point(t.dim(), &mut rng);
        for (&s, marks) in shifts.iter().zip(marks.iter_mut()) {
            let (mut p, slot) = match watched_run(t, s, &x0, opts, marks) {
                Ok(Run::Captured) => continue,
                Ok(Run::Converged(p)) if p.lambda.is_finite() => (p, &mut best),
                Ok(Run::Converged(p) | Run::Unconverged(p)) => (p, &mut fallback),
                Err(e) => {
                    last_err = Some(e);
                    continue;
                }
            };
            canonical_sign(t.order(), &mut p);
            if slot.as_ref().is_none_or(|b| dominates(&p, b)) {
                *slot = Some(p);
            }
        }
    }
    match best {
        Some(p) => {
            let mut p = polish(t, &p, 1e-14);
            canonical_sign(t.order(), &mut p);
            p.converged = p.residual <= opts.residual_cap();
            Ok(p)
        }
        None => match fallback {
            Some(mut p) => {
                p.converged = false;
                Ok(p)
            }
            None => Err(last_err.unwrap_or_else(|| {
                Error::DegenerateProblem("no eigen iteration produced a pair".into())
            })),
        },
    }
}

/// Samples distinct eigenvalues with representative vectors, sorted by
/// decreasing `|λ|`. Each start runs the shifted power method with every
/// shift and, separately, Newton's method on the eigen equation so that
/// saddle-type pairs are reachable too. Values within `1e−6` are merged.
pub fn spectrum_sample<T: SymmetricTensor + ?Sized>(
    t: &T,
    restarts: usize,
    seed: u64,
    tol: f64,
) -> Vec<EigenPair> {
    const DEDUP: f64 = 1e-6;
    let opts = EigenOptions {
        restarts,
        seed,
        tol,
        ..EigenOptions::default()
    };
    let accept = (10.0 * tol).max(1e-10);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found: Vec<EigenPair> = Vec::new();
    let keep = |mut p: EigenPair, found: &mut Vec<EigenPair>| {
        if !(p.lambda.is_finite() && p.residual <= accept) {
            return;
        }
        p.converged = true;
        canonical_sign(t.order(), &mut p);
        if found.iter().all(|q| (q.lambda - p.lambda).abs() > DEDUP) {
            found.push(p);
        }
    };
    for _ in 0..restarts {
        let x0 = sphere_point(t.dim(), &mut rng);
        for &s in &opts.shifts() {
            if let Ok(p) = sshopm(t, s, &x0, tol, opts.max_iter) {
                if p.converged {
                    keep(polish(t, &p, 1e-14), &mut found);
                }
            }
        }
        let lambda0 = dot(&x0, &t.apply(&x0));
        if let Some(p) = newton(t, &x0, lambda0, 1e-13, 60, f64::INFINITY) {
            keep(p, &mut found);
        }
    }
    found.sort_by(|a, b| {
        b.lambda
            .abs()
            .partial_cmp(&a.lambda.abs())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.lambda.partial_cmp(&a.lambda).unwrap_or(std::cmp::Ordering::Equal))
    });
    found
}

/// Comparison of the dominant pair of `B ⊗ A` with the pairs of `A` and `B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecouplingReport {
    pub dim_a: usize,
    pub dim_b: usize,
    pub order: usize,
    pub lambda_a: f64,
    pub lambda_b: f64,
    pub lambda_kron: f64,
    /// `|λ_kron − λ_A λ_B|`
    pub eig_gap: f64,
    /// `1 − |⟨x_kron, v ⊗ u⟩|`
    pub vec_gap: f64,
    pub converged: bool,
}

/// Computes the dominant pairs of `A`, `B` and the explicit `B ⊗ A`
/// independently and compares them.
pub fn verify_decoupling(
    a: &DenseTensor,
    b: &DenseTensor,
    opts: &EigenOptions,
) -> Result<DecouplingReport> {
    verify_decoupling_with_budget(a, b, opts, DEFAULT_DENSE_BUDGET)
}

pub fn verify_decoupling_with_budget(
    a: &DenseTensor,
    b: &DenseTensor,
    opts: &EigenOptions,
    budget: usize,
) -> Result<DecouplingReport> {
    let kron = PackedSymmetric::from_dense(&b.kron(a, budget)?);
    let (a, b) = (PackedSymmetric::from_dense(a), PackedSymmetric::from_dense(b));
    let seeds = derive_seeds(opts.seed, 3);
    let pa = dominant_eigen(&a, &EigenOptions { seed: seeds[0], ..*opts })?;
    let pb = dominant_eigen(&b, &EigenOptions { seed: seeds[1], ..*opts })?;
    let pk = dominant_eigen(&kron, &EigenOptions { seed: seeds[2], ..*opts })?;
    let m = a.dim();
    let mut inner = 0.0;
    for (ip, vb) in pb.vector.iter().enumerate() {
        for (i, ua) in pa.vector.iter().enumerate() {
            inner += pk.vector[i + m * ip] * ua * vb;
        }
    }
    let product = pa.lambda * pb.lambda;
    Ok(DecouplingReport {
        dim_a: a.dim(),
        dim_b: b.dim(),
        order: a.order(),
        lambda_a: pa.lambda,
        lambda_b: pb.lambda,
        lambda_kron: pk.lambda,
        eig_gap: (pk.lambda - product).abs(),
        vec_gap: (1.0 - inner.abs()).max(0.0),
        converged: pa.converged && pb.converged && pk.converged,
    })
}

/// Independent sub-seeds from one seed.
pub(crate) fn derive_seeds(seed: u64, count: usize) -> Vec<u64> {
    use rand::RngCore;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.next_u64()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> MotifTensor {
        MotifTensor::new(3, 3, vec![vec![0, 1, 2]], None).unwrap()
    }

    #[test]
    fn sshopm_diagonal_from_basis_vector() {
        let d2 = DenseTensor::diagonal(3, 2);
        let p = sshopm(&d2, 0.0, &[1.0, 0.0], 1e-12, 100).unwrap();
        assert!(p.converged);
        assert!((p.lambda - 1.0).abs() < 1e-15);
        assert_eq!(p.vector, vec![1.0, 0.0]);
    }

    #[test]
    fn sshopm_triangle_fixed_point() {
        let t = triangle();
        let x0 = vec![1.0 / 3f64.sqrt(); 3];
        let p = sshopm(&t, 0.0, &x0, 1e-12, 100).unwrap();
        assert!((p.lambda - 2.0 / 3f64.sqrt()).abs() < 1e-14);
        for v in &p.vector {
            assert!((v - 1.0 / 3f64.sqrt()).abs() < 1e-14);
        }
        assert!(p.residual < 1e-14);
    }

    #[test]
    fn sshopm_zero_tensor() {
        let z = MotifTensor::new(3, 3, vec![], None).unwrap();
        let p = sshopm(&z, 1.0, &[3.0, 0.0, 4.0], 1e-12, 10).unwrap();
        assert!(p.converged);
        assert_eq!(p.lambda, 0.0);
        assert_eq!(p.vector, vec![0.6, 0.0, 0.8]);
        assert!(matches!(
            sshopm(&z, 0.0, &[1.0, 0.0, 0.0], 1e-12, 10),
            Err(Error::DegenerateIterate { iteration: 1, .. })
        ));
        assert!(sshopm(&z, 1.0, &[0.0; 3], 1e-12, 10).is_err());
    }

    #[test]
    fn nonconvergence_is_flagged() {
        let t = triangle();
        let p = sshopm(&t, 0.0, &[1.0, 0.2, -0.3], 1e-16, 1).unwrap();
        assert!(!p.converged);
        assert_eq!(p.iterations, 1);
    }

    #[test]
    fn dominant_examples() {
        let opts = EigenOptions {
            restarts: 20,
            seed: 5,
            ..EigenOptions::default()
        };
        let d2 = dominant_eigen(&DenseTensor::diagonal(3, 2), &opts).unwrap();
        assert!((d2.lambda.abs() - 1.0).abs() < 1e-12);
        let d4 = dominant_eigen(&DenseTensor::diagonal(3, 4), &opts).unwrap();
        assert!((d4.lambda.abs() - 1.0).abs() < 1e-12);
        let tri = dominant_eigen(&triangle(), &opts).unwrap();
        assert!((tri.lambda - 2.0 / 3f64.sqrt()).abs() < 1e-10);
        assert!(tri.converged);
        assert!(tri.residual <= opts.residual_cap());
    }

    #[test]
    fn residual_field_recomputes() {
        let t = MotifTensor::new(3, 4, vec![vec![0, 1, 2], vec![1, 2, 3]], None).unwrap();
        let p = dominant_eigen(&t, &EigenOptions { restarts: 10, ..Default::default() }).unwrap();
        assert!((residual(&t, p.lambda, &p.vector) - p.residual).abs() <= 1e-12);
        assert!((norm(&p.vector) - 1.0).abs() <= 1e-12);
        assert!(p.lambda >= 0.0);
    }

    #[test]
    fn spectrum_of_zero_tensor() {
        let z = MotifTensor::new(3, 3, vec![], None).unwrap();
        let s = spectrum_sample(&z, 5, 1, 1e-12);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].lambda, 0.0);
    }

    #[test]
    fn spectrum_of_d2() {
        let s = spectrum_sample(&DenseTensor::diagonal(3, 2), 200, 2, 1e-12);
        let lams: Vec<f64> = s.iter().map(|p| p.lambda).collect();
        assert!(lams.iter().any(|l| (l - 1.0).abs() < 1e-6), "{lams:?}");
        assert!(lams.iter().any(|l| (l - 0.5f64.sqrt()).abs() < 1e-6), "{lams:?}");
    }

    #[test]
    fn decoupling_triangles() {
        let t = triangle().to_dense(1000).unwrap();
        let opts = EigenOptions {
            restarts: 20,
            seed: 9,
            ..EigenOptions::default()
        };
        let r = verify_decoupling(&t, &t, &opts).unwrap();
        assert!((r.lambda_kron - 4.0 / 3.0).abs() < 1e-9, "{r:?}");
        // sign patterns like (1, -1, -1)/√3 share the top eigenvalue, so only
        // the eigenvalue is compared here
        assert!(r.eig_gap <= 1e-9);
    }

    #[test]
    fn decoupling_diagonal() {
        let d2 = DenseTensor::diagonal(3, 2);
        let opts = EigenOptions {
            restarts: 20,
            seed: 1,
            ..EigenOptions::default()
        };
        let r = verify_decoupling(&d2, &d2, &opts).unwrap();
        assert!(r.eig_gap < 1e-12, "{r:?}");
        assert!(r.vec_gap < 1e-12, "{r:?}");
    }

    #[test]
    fn packed_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (k, n) in [(3, 4), (4, 3), (5, 3), (2, 5), (7, 3)] {
            let t = DenseTensor::random_symmetric(k, n, &mut rng);
            let p = PackedSymmetric::from_dense(&t);
            let x = sphere_point(n, &mut rng);
            let (y1, y2) = (SymmetricTensor::apply(&t, &x), SymmetricTensor::apply(&p, &x));
            for (a, b) in y1.iter().zip(&y2) {
                assert!((a - b).abs() < 1e-12);
            }
            let (h1, h2) = (
                SymmetricTensor::apply_matrix(&t, &x),
                SymmetricTensor::apply_matrix(&p, &x),
            );
            assert!((h1 - h2).norm() < 1e-12);
        }
    }

    #[test]
    fn motif_apply_matrix_matches_dense() {
        let t = MotifTensor::new(4, 5, vec![vec![0, 1, 2, 3], vec![1, 2, 3, 4]], Some(vec![1.0, 2.0]))
            .unwrap();
        let d = t.to_dense(10_000).unwrap();
        let x = [0.3, -0.1, 0.7, 0.2, 0.5];
        let a = SymmetricTensor::apply_matrix(&t, &x);
        let b = SymmetricTensor::apply_matrix(&d, &x);
        assert!((a - b).norm() < 1e-12);
    }
}
