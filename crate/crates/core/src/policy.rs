//! Pair-selection policies.
//!
//! All policies keep a regularised MLE of `θ*` and a covariance
//! `Σ_t = λI + Σ_i w_i κ φ_i φ_iᵀ`. RCDB weights each record by its
//! uncertainty; MaxPairUCB is the same procedure with every weight fixed to
//! one (RCDB with `α = ∞`). RCDB-S additionally tracks `Λ_t`, built from
//! local-derivative estimates, and explores with it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{compute_weight, solve_weighted_mle, update_lambda_mat, update_sigma, DuelRecord, MleParams};
use crate::linalg::{add, dot, sub, Cholesky, SymMat};
use crate::link::LinkSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Rcdb,
    Rcdbs,
    MaxInP,
    Colstim,
    MaxPairUcb,
}

impl PolicyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Rcdb => "rcdb",
            PolicyKind::Rcdbs => "rcdbs",
            PolicyKind::MaxInP => "maxinp",
            PolicyKind::Colstim => "colstim",
            PolicyKind::MaxPairUcb => "maxpairucb",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    MaxInP,
    Colstim,
    MaxPairUcb,
}

// ---------------------------------------------------------------------------
// Confidence radii

/// `α C̄`, which vanishes in the `α = ∞` / `C̄ = 0` mode.
fn corruption_term(alpha: f64, c: u64) -> f64 {
    if c == 0 || alpha.is_infinite() {
        0.0
    } else {
        alpha * c as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcdbParams {
    pub b: f64,
    pub kappa: f64,
    pub delta: f64,
    /// Known budget `C`, or the tolerance threshold `C̄` when `C` is unknown.
    pub c_for_tuning: u64,
    pub lambda: f64,
    /// `f64::INFINITY` when `c_for_tuning == 0`.
    pub alpha: f64,
    pub beta: f64,
}

impl RcdbParams {
    /// `λ = 1/B²`, `α = √d / (C̄ √κ)` and `β` from [`beta_rcdb`].
    pub fn derive(horizon: usize, d: usize, b: f64, kappa: f64, delta: f64, c_for_tuning: u64) -> Self {
        let lambda = 1.0 / (b * b);
        let alpha = if c_for_tuning == 0 {
            f64::INFINITY
        } else {
            (d as f64).sqrt() / (c_for_tuning as f64 * kappa.sqrt())
        };
        let mut p = Self {
            b,
            kappa,
            delta,
            c_for_tuning,
            lambda,
            alpha,
            beta: 0.0,
        };
        p.beta = beta_rcdb(horizon, d, &p);
        p
    }
}

/// `β = √λ B + α C̄ + √(d log((1 + 2T/λ)/δ) / κ)`.
pub fn beta_rcdb(horizon: usize, d: usize, p: &RcdbParams) -> f64 {
    let log_term = ((1.0 + 2.0 * horizon as f64 / p.lambda) / p.delta).ln();
    p.lambda.sqrt() * p.b + corruption_term(p.alpha, p.c_for_tuning) + (d as f64 * log_term / p.kappa).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcdbsParams {
    pub b: f64,
    pub kappa: f64,
    pub delta: f64,
    pub c_for_tuning: u64,
    pub lambda: f64,
    pub alpha: f64,
    /// Constant replacements for `β_t` / `β̃_t`.
    pub beta_override: Option<f64>,
    pub beta_tilde_override: Option<f64>,
}

impl RcdbsParams {
    /// `λ = d/B`, `α = (√d + √λ B) / C̄`.
    pub fn derive(d: usize, b: f64, kappa: f64, delta: f64, c_for_tuning: u64) -> Self {
        let lambda = d as f64 / b;
        let alpha = if c_for_tuning == 0 {
            f64::INFINITY
        } else {
            ((d as f64).sqrt() + lambda.sqrt() * b) / c_for_tuning as f64
        };
        Self {
            b,
            kappa,
            delta,
            c_for_tuning,
            lambda,
            alpha,
            beta_override: None,
            beta_tilde_override: None,
        }
    }

    /// `β_t = √λ B + √(d log(2(1 + 2t/λ)/δ)) / √κ + α C̄`.
    pub fn beta_t(&self, t: usize, d: usize) -> f64 {
        if let Some(b) = self.beta_override {
            return b;
        }
        let log_term = (2.0 * (1.0 + 2.0 * t as f64 / self.lambda) / self.delta).ln();
        self.lambda.sqrt() * self.b
            + (d as f64 * log_term).sqrt() / self.kappa.sqrt()
            + corruption_term(self.alpha, self.c_for_tuning)
    }

    /// `β̃_t = (1 + 4B)[√λ B + (2/√λ) d log((dλ + 2t)/(dλδ)) + α C̄]`.
    pub fn beta_tilde_t(&self, t: usize, d: usize) -> f64 {
        if let Some(b) = self.beta_tilde_override {
            return b;
        }
        let dl = d as f64 * self.lambda;
        let log_term = ((dl + 2.0 * t as f64) / (dl * self.delta)).ln();
        (1.0 + 4.0 * self.b)
            * (self.lambda.sqrt() * self.b
                + 2.0 / self.lambda.sqrt() * d as f64 * log_term
                + corruption_term(self.alpha, self.c_for_tuning))
    }
}

// ---------------------------------------------------------------------------
// Scoring rules

/// `(φ(a) + φ(b))ᵀθ + bonus ||φ(a) − φ(b)||_{M^{-1}}`.
pub fn symmetric_score(theta: &[f64], factor: &Cholesky, bonus: f64, fa: &[f64], fb: &[f64]) -> Result<f64> {
    let exploit = dot(&add(fa, fb), theta);
    if bonus == 0.0 {
        return Ok(exploit);
    }
    Ok(exploit + bonus * factor.elliptical_norm(&sub(fa, fb))?)
}

/// Maximiser of [`symmetric_score`] over unordered pairs `a <= b`
/// (including `a == b`); ties go to the lexicographically smallest pair.
pub fn select_symmetric(theta: &[f64], factor: &Cholesky, bonus: f64, actions: &[Vec<f64>]) -> Result<(usize, usize)> {
    let mut best = (0, 0);
    let mut best_score = f64::NEG_INFINITY;
    for a in 0..actions.len() {
        for b in a..actions.len() {
            let s = symmetric_score(theta, factor, bonus, &actions[a], &actions[b])?;
            if s > best_score {
                best_score = s;
                best = (a, b);
            }
        }
    }
    Ok(best)
}

/// Arms `a` that no `b` beats by more than its uncertainty:
/// `(φ(b) − φ(a))ᵀθ <= γ ||φ(b) − φ(a)||_{Σ^{-1}}` for every `b`.
pub fn promising_set(theta: &[f64], factor: &Cholesky, gamma: f64, actions: &[Vec<f64>]) -> Result<Vec<usize>> {
    let rewards: Vec<f64> = actions.iter().map(|f| dot(f, theta)).collect();
    let mut out = Vec::new();
    'arms: for a in 0..actions.len() {
        for b in 0..actions.len() {
            let gap = rewards[b] - rewards[a];
            if gap > 0.0 && gap > gamma * factor.elliptical_norm(&sub(&actions[b], &actions[a]))? {
                continue 'arms;
            }
        }
        out.push(a);
    }
    Ok(out)
}

pub fn baseline_select(
    kind: BaselineKind,
    theta: &[f64],
    factor: &Cholesky,
    gamma: f64,
    actions: &[Vec<f64>],
) -> Result<(usize, usize)> {
    match kind {
        BaselineKind::MaxPairUcb => select_symmetric(theta, factor, gamma, actions),
        BaselineKind::MaxInP => {
            let mut set = promising_set(theta, factor, gamma, actions)?;
            if set.is_empty() {
                set = (0..actions.len()).collect();
            }
            let mut best = (set[0], set[0]);
            let mut best_width = f64::NEG_INFINITY;
            for (i, &a) in set.iter().enumerate() {
                for &b in &set[i..] {
                    let w = factor.elliptical_norm(&sub(&actions[a], &actions[b]))?;
                    if w > best_width {
                        best_width = w;
                        best = (a, b);
                    }
                }
            }
            Ok(best)
        }
        BaselineKind::Colstim => {
            let argmax = |score: &dyn Fn(usize) -> Result<f64>| -> Result<usize> {
                let mut best = 0;
                let mut best_score = f64::NEG_INFINITY;
                for i in 0..actions.len() {
                    let s = score(i)?;
                    if s > best_score {
                        best_score = s;
                        best = i;
                    }
                }
                Ok(best)
            };
            let first = argmax(&|i| Ok(dot(&actions[i], theta)))?;
            let second = argmax(&|i| {
                let bonus = if gamma == 0.0 {
                    0.0
                } else {
                    gamma * factor.elliptical_norm(&sub(&actions[i], &actions[first]))?
                };
                Ok(dot(&actions[i], theta) + bonus)
            })?;
            Ok((first, second))
        }
    }
}

// ---------------------------------------------------------------------------
// Stateful policies

/// What a policy did with one observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateInfo {
    pub weight: f64,
    /// `‖φ_t‖_{Σ_t^{-1}}` under the pre-update covariance.
    pub phi_norm: f64,
    /// RCDB-S local-derivative estimate `v_t`.
    pub v_weight: Option<f64>,
}

pub trait DuelPolicy {
    fn kind(&self) -> PolicyKind;

    /// Chooses the pair for round `round` (1-based).
    fn select(&mut self, round: usize, actions: &[Vec<f64>]) -> Result<(usize, usize)>;

    /// Feeds back the observed label for the pair chosen in `round`;
    /// `observed == true` means `a` won.
    fn update(&mut self, round: usize, actions: &[Vec<f64>], a: usize, b: usize, observed: bool) -> Result<UpdateInfo>;

    fn theta(&self) -> &[f64];

    /// Current `Σ_t` and the confidence radius `β` that `‖θ_t − θ*‖_{Σ_t}`
    /// should stay below, for policies that maintain one.
    fn confidence(&self, round: usize) -> Option<(&SymMat, &Cholesky, f64)>;
}

/// MLE plus `Σ_t` bookkeeping shared by every policy.
#[derive(Debug, Clone)]
pub struct MleState {
    link: LinkSpec,
    kappa: f64,
    mle: MleParams,
    theta: Vec<f64>,
    sigma: SymMat,
    sigma_factor: Cholesky,
    history: Vec<DuelRecord>,
}

impl MleState {
    pub fn new(d: usize, lambda: f64, kappa: f64, link: LinkSpec) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!("lambda must be positive, got {lambda}")));
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidConfig(format!("kappa must be positive, got {kappa}")));
        }
        let sigma = SymMat::scaled_identity(d, lambda);
        let sigma_factor = sigma.cholesky()?;
        Ok(Self {
            link,
            kappa,
            mle: MleParams::new(lambda),
            theta: vec![0.0; d],
            sigma,
            sigma_factor,
            history: Vec::new(),
        })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn sigma(&self) -> &SymMat {
        &self.sigma
    }

    pub fn sigma_factor(&self) -> &Cholesky {
        &self.sigma_factor
    }

    pub fn history(&self) -> &[DuelRecord] {
        &self.history
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn lambda(&self) -> f64 {
        self.mle.lambda
    }

    /// Appends a record, grows `Σ` and re-solves the MLE from the previous
    /// estimate.
    fn absorb(&mut self, record: DuelRecord) -> Result<()> {
        self.sigma = update_sigma(&self.sigma, &record.phi_diff, record.weight, self.kappa)?;
        self.sigma_factor = self.sigma.cholesky()?;
        self.history.push(record);
        self.theta = solve_weighted_mle(&self.history, &self.mle, &self.link, &self.theta)?;
        Ok(())
    }
}

/// RCDB; with `alpha = ∞` this is MaxPairUCB.
#[derive(Debug, Clone)]
pub struct Rcdb {
    state: MleState,
    params: RcdbParams,
    bonus_scale: f64,
    kind: PolicyKind,
}

impl Rcdb {
    pub fn new(d: usize, params: RcdbParams, bonus_scale: f64, link: LinkSpec) -> Result<Self> {
        Ok(Self {
            state: MleState::new(d, params.lambda, params.kappa, link)?,
            params,
            bonus_scale,
            kind: PolicyKind::Rcdb,
        })
    }

    /// Unweighted twin: every weight is one and the bonus is `gamma`.
    pub fn max_pair_ucb(d: usize, params: RcdbParams, gamma: f64, link: LinkSpec) -> Result<Self> {
        let params = RcdbParams {
            alpha: f64::INFINITY,
            c_for_tuning: 0,
            beta: gamma,
            ..params
        };
        Ok(Self {
            kind: PolicyKind::MaxPairUcb,
            ..Self::new(d, params, 1.0, link)?
        })
    }

    pub fn params(&self) -> &RcdbParams {
        &self.params
    }

    pub fn state(&self) -> &MleState {
        &self.state
    }

    pub fn bonus(&self) -> f64 {
        self.bonus_scale * self.params.beta
    }
}

impl DuelPolicy for Rcdb {
    fn kind(&self) -> PolicyKind {
        self.kind
    }

    fn select(&mut self, _round: usize, actions: &[Vec<f64>]) -> Result<(usize, usize)> {
        select_symmetric(&self.state.theta, &self.state.sigma_factor, self.bonus(), actions)
    }

    fn update(&mut self, _round: usize, actions: &[Vec<f64>], a: usize, b: usize, observed: bool) -> Result<UpdateInfo> {
        let phi = sub(&actions[a], &actions[b]);
        let phi_norm = self.state.sigma_factor.elliptical_norm(&phi)?;
        let weight = compute_weight(&phi, &self.state.sigma_factor, self.params.alpha)?;
        self.state.absorb(DuelRecord {
            phi_diff: phi,
            observed,
            weight,
            v_weight: self.state.kappa,
        })?;
        Ok(UpdateInfo {
            weight,
            phi_norm,
            v_weight: None,
        })
    }

    fn theta(&self) -> &[f64] {
        &self.state.theta
    }

    fn confidence(&self, _round: usize) -> Option<(&SymMat, &Cholesky, f64)> {
        Some((&self.state.sigma, &self.state.sigma_factor, self.params.beta))
    }
}

/// RCDB-S: sigmoid-specialised RCDB exploring with `Λ_t`.
#[derive(Debug, Clone)]
pub struct RcdbS {
    state: MleState,
    lambda_mat: SymMat,
    lambda_factor: Cholesky,
    params: RcdbsParams,
    bonus_scale: f64,
    d: usize,
}

impl RcdbS {
    pub fn new(d: usize, params: RcdbsParams, bonus_scale: f64, link: LinkSpec) -> Result<Self> {
        if !link.is_sigmoid() {
            return Err(Error::WrongLink);
        }
        let state = MleState::new(d, params.lambda, params.kappa, link)?;
        let lambda_mat = state.sigma.clone();
        let lambda_factor = state.sigma_factor.clone();
        Ok(Self {
            state,
            lambda_mat,
            lambda_factor,
            params,
            bonus_scale,
            d,
        })
    }

    pub fn params(&self) -> &RcdbsParams {
        &self.params
    }

    pub fn state(&self) -> &MleState {
        &self.state
    }

    pub fn lambda_mat(&self) -> &SymMat {
        &self.lambda_mat
    }

    /// `v_t = max{κ, σ'(Δ̂)}` for `Δ̂ = |φᵀθ| + β ||φ||_{Σ^{-1}}`.
    pub fn local_derivative(&self, phi: &[f64], beta: f64) -> Result<(f64, f64)> {
        let gap = dot(phi, &self.state.theta).abs() + beta * self.state.sigma_factor.elliptical_norm(phi)?;
        Ok((gap, self.state.kappa.max(self.state.link.derivative(gap))))
    }
}

impl DuelPolicy for RcdbS {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Rcdbs
    }

    fn select(&mut self, round: usize, actions: &[Vec<f64>]) -> Result<(usize, usize)> {
        let bonus = self.bonus_scale * self.params.beta_tilde_t(round, self.d);
        select_symmetric(&self.state.theta, &self.lambda_factor, bonus, actions)
    }

    fn update(&mut self, round: usize, actions: &[Vec<f64>], a: usize, b: usize, observed: bool) -> Result<UpdateInfo> {
        let phi = sub(&actions[a], &actions[b]);
        let phi_norm = self.state.sigma_factor.elliptical_norm(&phi)?;
        let weight = compute_weight(&phi, &self.state.sigma_factor, self.params.alpha)?;
        let (_, v) = self.local_derivative(&phi, self.params.beta_t(round, self.d))?;
        self.lambda_mat = update_lambda_mat(&self.lambda_mat, &phi, weight, v)?;
        self.lambda_factor = self.lambda_mat.cholesky()?;
        self.state.absorb(DuelRecord {
            phi_diff: phi,
            observed,
            weight,
            v_weight: v,
        })?;
        Ok(UpdateInfo {
            weight,
            phi_norm,
            v_weight: Some(v),
        })
    }

    fn theta(&self) -> &[f64] {
        &self.state.theta
    }

    fn confidence(&self, round: usize) -> Option<(&SymMat, &Cholesky, f64)> {
        Some((&self.state.sigma, &self.state.sigma_factor, self.params.beta_t(round, self.d)))
    }
}

/// MaxInP and CoLSTIM on an unweighted MLE.
#[derive(Debug, Clone)]
pub struct Baseline {
    state: MleState,
    kind: BaselineKind,
    gamma: f64,
}

impl Baseline {
    pub fn new(d: usize, kind: BaselineKind, lambda: f64, kappa: f64, gamma: f64, link: LinkSpec) -> Result<Self> {
        Ok(Self {
            state: MleState::new(d, lambda, kappa, link)?,
            kind,
            gamma,
        })
    }

    pub fn state(&self) -> &MleState {
        &self.state
    }
}

impl DuelPolicy for Baseline {
    fn kind(&self) -> PolicyKind {
        match self.kind {
            BaselineKind::MaxInP => PolicyKind::MaxInP,
            BaselineKind::Colstim => PolicyKind::Colstim,
            BaselineKind::MaxPairUcb => PolicyKind::MaxPairUcb,
        }
    }

    fn select(&mut self, _round: usize, actions: &[Vec<f64>]) -> Result<(usize, usize)> {
        baseline_select(self.kind, &self.state.theta, &self.state.sigma_factor, self.gamma, actions)
    }

    fn update(&mut self, _round: usize, actions: &[Vec<f64>], a: usize, b: usize, observed: bool) -> Result<UpdateInfo> {
        let phi = sub(&actions[a], &actions[b]);
        let phi_norm = self.state.sigma_factor.elliptical_norm(&phi)?;
        self.state.absorb(DuelRecord {
            phi_diff: phi,
            observed,
            weight: 1.0,
            v_weight: self.state.kappa,
        })?;
        Ok(UpdateInfo {
            weight: 1.0,
            phi_norm,
            v_weight: None,
        })
    }

    fn theta(&self) -> &[f64] {
        &self.state.theta
    }

    fn confidence(&self, _round: usize) -> Option<(&SymMat, &Cholesky, f64)> {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::mle_gradient;
    use crate::linalg::norm2;
    use approx::assert_abs_diff_eq;

    fn e(i: usize, d: usize) -> Vec<f64> {
        (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()
    }

    fn brute_force(actions: &[Vec<f64>], score: impl Fn(usize, usize) -> f64) -> (usize, usize, f64) {
        let mut best = (0, 0, f64::NEG_INFINITY);
        for a in 0..actions.len() {
            for b in a..actions.len() {
                let s = score(a, b);
                if s > best.2 {
                    best = (a, b, s);
                }
            }
        }
        best
    }

    #[test]
    fn symmetric_selection_examples() {
        let actions = vec![e(0, 2), e(1, 2)];
        let id = SymMat::identity(2).cholesky().unwrap();
        assert_eq!(select_symmetric(&[0.0, 0.0], &id, 1.0, &actions).unwrap(), (0, 1));
        assert_eq!(select_symmetric(&[1.0, 0.0], &id, 0.0, &actions).unwrap(), (0, 0));

        let actions = vec![e(0, 2), vec![-1.0, 0.0], e(1, 2)];
        let f = SymMat::diag(&[2.0, 1.0]).cholesky().unwrap();
        let theta = [0.5, 0.0];
        // hand-evaluated scores of the six unordered pairs
        let inv = [0.5, 1.0];
        let score = |a: usize, b: usize| {
            let s: Vec<f64> = add(&actions[a], &actions[b]);
            let dv: Vec<f64> = sub(&actions[a], &actions[b]);
            dot(&s, &theta) + (dv[0] * dv[0] * inv[0] + dv[1] * dv[1] * inv[1]).sqrt()
        };
        let (ba, bb, _) = brute_force(&actions, score);
        assert_eq!(select_symmetric(&theta, &f, 1.0, &actions).unwrap(), (ba, bb));
        assert_eq!((ba, bb), (0, 2));
    }

    #[test]
    fn scoring_is_pair_symmetric() {
        let f = SymMat::from_rows(&[vec![2.0, 0.3], vec![0.3, 1.0]]).unwrap().cholesky().unwrap();
        let theta = [0.7, -0.2];
        let (x, y) = (vec![0.6, -0.1], vec![-0.3, 0.9]);
        assert_eq!(
            symmetric_score(&theta, &f, 1.3, &x, &y).unwrap(),
            symmetric_score(&theta, &f, 1.3, &y, &x).unwrap()
        );
    }

    #[test]
    fn beta_rcdb_examples() {
        let p = RcdbParams {
            b: 1.0,
            kappa: 1.0,
            delta: 0.1,
            c_for_tuning: 0,
            lambda: 1.0,
            alpha: f64::INFINITY,
            beta: 0.0,
        };
        let d = 3;
        let t = 100;
        assert_abs_diff_eq!(
            beta_rcdb(t, d, &p),
            1.0 + (d as f64 * ((1.0 + 2.0 * t as f64) / 0.1).ln()).sqrt(),
            epsilon = 1e-12
        );

        // default benchmark configuration, evaluated term by term
        let kappa = LinkSpec::Sigmoid.kappa_for(2.0, 2.0).unwrap();
        let p = RcdbParams::derive(2000, 5, 2.0, kappa, 0.05, 45);
        assert_abs_diff_eq!(p.lambda, 0.25, epsilon = 0.0);
        assert_abs_diff_eq!(p.alpha, 5f64.sqrt() / (45.0 * kappa.sqrt()), epsilon = 1e-15);
        let expected = 0.5 * 2.0 + 5f64.sqrt() / kappa.sqrt() + (5.0 * (16001.0f64 / 0.05).ln() / kappa).sqrt();
        assert_abs_diff_eq!(p.beta, expected, epsilon = 1e-9);
        assert_abs_diff_eq!(p.beta, 77.73, epsilon = 0.01);

        // only the tuning threshold enters the radius
        let q = RcdbParams::derive(2000, 5, 2.0, kappa, 0.05, 20);
        assert_abs_diff_eq!(q.beta, p.beta, epsilon = 1e-9);
        let z = RcdbParams::derive(2000, 5, 2.0, kappa, 0.05, 0);
        assert!(z.alpha.is_infinite());
        assert_abs_diff_eq!(z.beta, expected - 5f64.sqrt() / kappa.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn rcdbs_radii_are_nondecreasing() {
        let kappa = LinkSpec::Sigmoid.kappa_for(2.0, 2.0).unwrap();
        for c in [0, 1, 45] {
            let p = RcdbsParams::derive(5, 2.0, kappa, 0.05, c);
            assert_abs_diff_eq!(p.lambda, 2.5, epsilon = 0.0);
            let mut prev = (0.0, 0.0);
            for t in 1..=3000 {
                let cur = (p.beta_t(t, 5), p.beta_tilde_t(t, 5));
                assert!(cur.0 >= prev.0 && cur.1 >= prev.1);
                prev = cur;
            }
        }
    }

    #[test]
    fn rcdbs_local_derivative_example() {
        let kappa = LinkSpec::Sigmoid.kappa_for(2.0, 2.0).unwrap();
        let p = RcdbsParams::derive(2, 2.0, kappa, 0.05, 0);
        let mut pol = RcdbS::new(2, p, 1.0, LinkSpec::Sigmoid).unwrap();
        pol.state.theta = vec![1.0, 0.0];
        pol.state.sigma = SymMat::identity(2);
        pol.state.sigma_factor = pol.state.sigma.cholesky().unwrap();
        let (gap, v) = pol.local_derivative(&[1.0, 0.0], 0.5).unwrap();
        assert_abs_diff_eq!(gap, 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(v, 0.149146, epsilon = 1e-6);
        let (gap, v) = pol.local_derivative(&[0.0, 0.0], 0.5).unwrap();
        assert_eq!(gap, 0.0);
        assert_eq!(v, 0.25);
        assert!(RcdbS::new(2, p, 1.0, LinkSpec::PiecewiseLinear).is_err());
    }

    #[test]
    fn first_rcdb_weight_uses_lambda_identity() {
        let actions = vec![e(0, 2), vec![-1.0, 0.0]];
        let kappa = 0.25;
        let mut p = RcdbParams::derive(10, 2, 1.0, kappa, 0.05, 4);
        p.alpha = 0.3;
        let mut pol = Rcdb::new(2, p, 1.0, LinkSpec::Sigmoid).unwrap();
        let info = pol.update(1, &actions, 0, 1, true).unwrap();
        // Σ_1 = λI with λ = 1: ||φ||_2 = 2
        assert_abs_diff_eq!(info.weight, 0.3 / 2.0, epsilon = 1e-15);

        let mut twin = Rcdb::max_pair_ucb(2, p, 1.0, LinkSpec::Sigmoid).unwrap();
        assert_eq!(twin.update(1, &actions, 0, 1, true).unwrap().weight, 1.0);
    }

    #[test]
    fn two_scripted_rounds_match_gradient_descent() {
        let actions = vec![e(0, 2), e(1, 2), vec![-0.6, 0.8]];
        let kappa = 0.2;
        let mut p = RcdbParams::derive(10, 2, 1.0, kappa, 0.05, 3);
        p.alpha = 0.4;
        let mut pol = Rcdb::new(2, p, 1.0, LinkSpec::Sigmoid).unwrap();
        pol.update(1, &actions, 0, 1, true).unwrap();
        pol.update(2, &actions, 2, 0, false).unwrap();
        let h = pol.state().history().to_vec();
        assert!(h[0].weight < 1.0 && h[1].weight < 1.0);

        let mut th = vec![0.0, 0.0];
        for _ in 0..200_000 {
            let g = mle_gradient(&h, p.lambda, &LinkSpec::Sigmoid, &th);
            for (t, gi) in th.iter_mut().zip(&g) {
                *t -= 1e-2 * gi;
            }
        }
        for (a, b) in pol.theta().iter().zip(&th) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn baseline_cold_start_and_zero_bonus() {
        let actions = vec![vec![0.6, 0.0], vec![-0.6, 0.0], vec![0.0, 0.5]];
        let id = SymMat::identity(2).cholesky().unwrap();
        // θ = 0: every arm promising; widest pair is (0, 1)
        assert_eq!(baseline_select(BaselineKind::MaxInP, &[0.0, 0.0], &id, 1.0, &actions).unwrap(), (0, 1));
        // CoLSTIM: arm 0 first, then its most uncertain competitor
        assert_eq!(baseline_select(BaselineKind::Colstim, &[0.0, 0.0], &id, 1.0, &actions).unwrap(), (0, 1));

        let theta = [1.0, 1.0];
        for kind in [BaselineKind::MaxInP, BaselineKind::Colstim, BaselineKind::MaxPairUcb] {
            assert_eq!(baseline_select(kind, &theta, &id, 0.0, &actions).unwrap(), (0, 0));
        }
    }

    #[test]
    fn baselines_match_enumeration() {
        let actions = vec![vec![0.8, 0.1], vec![-0.2, 0.7], vec![0.1, -0.9]];
        let m = SymMat::from_rows(&[vec![1.5, 0.4], vec![0.4, 0.8]]).unwrap();
        let f = m.cholesky().unwrap();
        let theta = [0.3, 0.2];
        let gamma = 0.4;
        // explicit inverse of the 2x2 matrix
        let det = 1.5 * 0.8 - 0.4 * 0.4;
        let inv = [[0.8 / det, -0.4 / det], [-0.4 / det, 1.5 / det]];
        let enorm = |v: &[f64]| {
            (v[0] * (inv[0][0] * v[0] + inv[0][1] * v[1]) + v[1] * (inv[1][0] * v[0] + inv[1][1] * v[1])).sqrt()
        };
        let r = |i: usize| actions[i][0] * theta[0] + actions[i][1] * theta[1];

        // MaxPairUCB
        let (a, b, _) = brute_force(&actions, |a, b| r(a) + r(b) + gamma * enorm(&sub(&actions[a], &actions[b])));
        assert_eq!(baseline_select(BaselineKind::MaxPairUcb, &theta, &f, gamma, &actions).unwrap(), (a, b));

        // MaxInP
        let promising: Vec<usize> = (0..3)
            .filter(|&a| (0..3).all(|b| r(b) - r(a) <= gamma * enorm(&sub(&actions[b], &actions[a]))))
            .collect();
        assert_eq!(promising_set(&theta, &f, gamma, &actions).unwrap(), promising);
        let mut best = (0, 0, -1.0);
        for (i, &a) in promising.iter().enumerate() {
            for &b in &promising[i..] {
                let w = enorm(&sub(&actions[a], &actions[b]));
                if w > best.2 {
                    best = (a, b, w);
                }
            }
        }
        assert_eq!(
            baseline_select(BaselineKind::MaxInP, &theta, &f, gamma, &actions).unwrap(),
            (best.0, best.1)
        );

        // CoLSTIM
        let first = (0..3).fold(0, |m, i| if r(i) > r(m) { i } else { m });
        let second = (0..3).fold(0, |m, i| {
            let s = |j: usize| r(j) + gamma * enorm(&sub(&actions[j], &actions[first]));
            if s(i) > s(m) {
                i
            } else {
                m
            }
        });
        assert_eq!(
            baseline_select(BaselineKind::Colstim, &theta, &f, gamma, &actions).unwrap(),
            (first, second)
        );
    }

    #[test]
    fn estimates_stay_certified() {
        let actions = vec![e(0, 3), e(1, 3), e(2, 3), vec![-0.5, 0.5, 0.5]];
        let p = RcdbParams::derive(50, 3, 2.0, 0.1, 0.05, 5);
        let mut pol = Rcdb::new(3, p, 1.0, LinkSpec::Sigmoid).unwrap();
        for t in 1..=50 {
            let (a, b) = pol.select(t, &actions).unwrap();
            pol.update(t, &actions, a, b, t % 3 != 0).unwrap();
            let g = mle_gradient(pol.state().history(), p.lambda, &LinkSpec::Sigmoid, pol.theta());
            assert!(norm2(&g) <= 1e-10);
        }
    }
}
