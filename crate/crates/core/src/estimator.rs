//! Uncertainty-weighted regularised maximum likelihood.
//!
//! The estimate is the root of
//! `λθ + Σ_i w_i (σ(φ_iᵀθ) − o_i) φ_i = 0`, which is the unique minimiser of
//! the strongly convex objective `λ/2 ||θ||² + Σ_i w_i (m(φ_iᵀθ) − o_i φ_iᵀθ)`
//! with `m' = σ` (the weighted log-loss for the sigmoid link).

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, Cholesky, SymMat};
use crate::link::LinkSpec;

/// One observed duel.
#[derive(Debug, Clone, PartialEq)]
pub struct DuelRecord {
    /// `φ(a) − φ(b)`.
    pub phi_diff: Vec<f64>,
    /// Observed (possibly flipped) label, `true` when `a` won.
    pub observed: bool,
    /// Uncertainty weight in `(0, 1]`.
    pub weight: f64,
    /// Local-derivative estimate (RCDB-S only; `κ` elsewhere).
    pub v_weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleParams {
    pub lambda: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl MleParams {
    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            tol: 1e-10,
            max_iter: 100,
        }
    }
}

/// Step halvings tried before a Newton direction is abandoned.
const MAX_HALVINGS: usize = 30;

/// Objective value at `theta`.
pub fn mle_objective(history: &[DuelRecord], lambda: f64, link: &LinkSpec, theta: &[f64]) -> f64 {
    let reg = 0.5 * lambda * dot(theta, theta);
    history.iter().fold(reg, |acc, r| {
        let z = dot(&r.phi_diff, theta);
        let o = if r.observed { 1.0 } else { 0.0 };
        acc + r.weight * (link.integral(z) - o * z)
    })
}

/// `λθ + Σ_i w_i (σ(φ_iᵀθ) − o_i) φ_i`.
pub fn mle_gradient(history: &[DuelRecord], lambda: f64, link: &LinkSpec, theta: &[f64]) -> Vec<f64> {
    let mut g: Vec<f64> = theta.iter().map(|t| lambda * t).collect();
    for r in history {
        let z = dot(&r.phi_diff, theta);
        let o = if r.observed { 1.0 } else { 0.0 };
        let c = r.weight * (link.value(z) - o);
        for (gi, p) in g.iter_mut().zip(&r.phi_diff) {
            *gi += c * p;
        }
    }
    g
}

fn hessian(history: &[DuelRecord], lambda: f64, link: &LinkSpec, theta: &[f64]) -> Result<SymMat> {
    history.iter().try_fold(SymMat::scaled_identity(theta.len(), lambda), |h, r| {
        let z = dot(&r.phi_diff, theta);
        h.rank_one_add(&r.phi_diff, r.weight * link.derivative(z))
    })
}

/// Damped Newton iteration from `warm_start`. Returns the root once the
/// gradient norm is at most `params.tol`.
pub fn solve_weighted_mle(
    history: &[DuelRecord],
    params: &MleParams,
    link: &LinkSpec,
    warm_start: &[f64],
) -> Result<Vec<f64>> {
    let d = warm_start.len();
    if let Some(r) = history.iter().find(|r| r.phi_diff.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: r.phi_diff.len(),
        });
    }
    debug_assert!(params.lambda > 0.0);
    debug_assert!(history.iter().all(|r| r.weight > 0.0));

    let lambda = params.lambda;
    let mut theta = warm_start.to_vec();
    let mut grad = mle_gradient(history, lambda, link, &theta);
    let mut gnorm = norm2(&grad);
    let mut obj = mle_objective(history, lambda, link, &theta);

    for _ in 0..params.max_iter {
        if gnorm <= params.tol {
            return Ok(theta);
        }
        let h = hessian(history, lambda, link, &theta)?;
        let step = h.cholesky()?.solve(&grad)?;

        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let cand: Vec<f64> = theta.iter().zip(&step).map(|(t, s)| t - scale * s).collect();
            let cand_obj = mle_objective(history, lambda, link, &cand);
            let cand_grad = mle_gradient(history, lambda, link, &cand);
            let cand_gnorm = norm2(&cand_grad);
            // Near the optimum the objective change drowns in the rounding
            // of a long sum, so a smaller gradient also counts as progress.
            let slack = 64.0 * f64::EPSILON * (1.0 + history.len() as f64) * (1.0 + obj.abs());
            if cand_obj < obj || (cand_obj <= obj + slack && cand_gnorm < gnorm) {
                accepted = Some((cand, cand_obj, cand_grad, cand_gnorm));
                break;
            }
            scale *= 0.5;
        }
        match accepted {
            Some((t, o, g, n)) => {
                theta = t;
                obj = o;
                grad = g;
                gnorm = n;
            }
            // no descent possible at machine precision
            None => break,
        }
    }
    if gnorm <= params.tol {
        Ok(theta)
    } else {
        Err(Error::NoConvergence {
            iterations: params.max_iter,
            residual: gnorm,
        })
    }
}

/// `min{1, α / ||φ||_{Σ^{-1}}}`; `α = +inf` encodes the no-corruption mode
/// where every weight is 1.
pub fn compute_weight(phi_diff: &[f64], sigma_factor: &Cholesky, alpha: f64) -> Result<f64> {
    if alpha == f64::INFINITY {
        return Ok(1.0);
    }
    let n = sigma_factor.elliptical_norm(phi_diff)?;
    if n <= alpha {
        Ok(1.0)
    } else {
        Ok(alpha / n)
    }
}

/// `Σ + w κ φ φᵀ`.
pub fn update_sigma(sigma: &SymMat, phi_diff: &[f64], w: f64, kappa: f64) -> Result<SymMat> {
    debug_assert!(w > 0.0 && w <= 1.0 && kappa > 0.0);
    sigma.rank_one_add(phi_diff, w * kappa)
}

/// `Λ + w v φ φᵀ`.
pub fn update_lambda_mat(lam: &SymMat, phi_diff: &[f64], w: f64, v: f64) -> Result<SymMat> {
    debug_assert!(w > 0.0 && w <= 1.0 && v > 0.0);
    lam.rank_one_add(phi_diff, w * v)
}
