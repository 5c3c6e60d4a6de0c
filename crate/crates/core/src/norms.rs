//! Operator norms, state 2-norms and the duality lower bound.

use crate::error::{Error, Result};
use crate::linalg::{self, hermitian_eigen, CMat, CVec, SpMat, C64};
use crate::ncpoly::{eval_dim, NCPoly, Symbol};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;

pub const POWER_SEED: u64 = 0x5eed_f00d;
pub const DENSE_LIMIT: usize = 512;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const MAX_ITERATIONS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMethod {
    DenseEigensolve,
    PowerIteration,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormResult {
    pub value: f64,
    pub method: NormMethod,
    pub iterations: usize,
    /// ‖T*Tv − λv‖ for the returned vector (0 for the dense path).
    pub residual: f64,
}

/// Largest singular value; dense eigensolve of T*T up to 512, power
/// iteration above.
pub fn op_norm(t: &SpMat, tol: f64) -> Result<NormResult> {
    if t.rows() <= DENSE_LIMIT && t.cols() <= DENSE_LIMIT {
        Ok(op_norm_dense(&linalg::sp_to_dense(t)))
    } else {
        op_norm_power(t, tol, MAX_ITERATIONS)
    }
}

pub fn op_norm_dense(t: &CMat) -> NormResult {
    if t.is_empty() {
        return NormResult { value: 0.0, method: NormMethod::DenseEigensolve, iterations: 0, residual: 0.0 };
    }
    let g = t.adjoint() * t;
    let (vals, _) = hermitian_eigen(&g);
    let top = vals.last().copied().unwrap_or(0.0).max(0.0);
    NormResult { value: top.sqrt(), method: NormMethod::DenseEigensolve, iterations: 0, residual: 0.0 }
}

fn start_vector(n: usize) -> CVec {
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_SEED);
    let v = CVec::from_fn(n, |_, _| C64::new(1.0 + 0.1 * (rng.random::<f64>() - 0.5), 0.1 * (rng.random::<f64>() - 0.5)));
    let nrm = v.norm();
    v.unscale(nrm)
}

/// Power iteration on T*T from a fixed seeded start vector.
pub fn op_norm_power(t: &SpMat, tol: f64, max_iter: usize) -> Result<NormResult> {
    let n = t.cols();
    if n == 0 {
        return Ok(NormResult { value: 0.0, method: NormMethod::PowerIteration, iterations: 0, residual: 0.0 });
    }
    let ta = linalg::sp_adjoint(t);
    let mut v = start_vector(n);
    let mut lambda = 0.0f64;
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        let w = linalg::sp_matvec(&ta, &linalg::sp_matvec(t, &v));
        let next = v.dotc(&w).re;
        residual = (&w - &v * C64::new(next, 0.0)).norm();
        let wn = w.norm();
        if wn == 0.0 {
            return Ok(NormResult { value: 0.0, method: NormMethod::PowerIteration, iterations: it, residual: 0.0 });
        }
        let converged = (next - lambda).abs() <= tol * next.abs().max(f64::MIN_POSITIVE);
        lambda = next;
        v = w.unscale(wn);
        if converged {
            return Ok(NormResult {
                value: lambda.max(0.0).sqrt(),
                method: NormMethod::PowerIteration,
                iterations: it,
                residual,
            });
        }
    }
    Err(Error::NonConvergence { iterations: max_iter, residual })
}

/// ⟨T*Tξ₀, ξ₀⟩^{1/2} = ‖Tξ₀‖.
pub fn two_norm(t: &SpMat, xi0: &CVec) -> f64 {
    linalg::sp_matvec(t, xi0).norm()
}

/// max over witnesses (p₁, p₂) of |⟨p·p₁ ξ₀, p₂ ξ₀⟩| / (‖p₁‖₂ ‖p₂‖₂),
/// a lower bound for ‖p‖ by Cauchy–Schwarz.
pub fn norm_lower_bound_duality(
    p: &NCPoly,
    assignment: &BTreeMap<Symbol, SpMat>,
    xi0: &CVec,
    witnesses: &[(NCPoly, NCPoly)],
) -> Result<f64> {
    let dim = xi0.len();
    let tp = eval_dim(p, assignment, dim)?;
    let mut best: f64 = 0.0;
    for (p1, p2) in witnesses {
        let v1 = linalg::sp_matvec(&eval_dim(p1, assignment, dim)?, xi0);
        let v2 = linalg::sp_matvec(&eval_dim(p2, assignment, dim)?, xi0);
        let (n1, n2) = (v1.norm(), v2.norm());
        if n1 <= 1e-300 || n2 <= 1e-300 {
            return Err(Error::DegenerateWitness);
        }
        let num = v2.dotc(&linalg::sp_matvec(&tp, &v1)).norm();
        best = best.max(num / (n1 * n2));
    }
    Ok(best)
}
