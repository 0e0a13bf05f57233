//! Episode runner, multi-seed aggregation and budget sweeps.
//!
//! An episode with seed `s` uses three independent ChaCha streams derived
//! from `s`: one for drawing `θ*`, one for label sampling and one for the
//! adversary, so switching the attack never perturbs label draws for an
//! identical action sequence.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::adversary::AttackState;
use crate::config::{PolicyConfig, RunConfig};
use crate::environment::{build_env, EnvModel};
use crate::error::{Error, Result};
use crate::linalg::{norm2, sub};

const THETA_STREAM: u64 = 0;
const LABEL_STREAM: u64 = 1;
const ATTACK_STREAM: u64 = 2;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Per-round traces of one episode; every vector has length `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub instant_regret: Vec<f64>,
    pub cum_regret: Vec<f64>,
    pub flips_used: Vec<u64>,
    pub weight: Vec<f64>,
    /// `‖θ_t − θ*‖_{Σ_t}` before round `t`'s update; `None` for policies
    /// without a confidence ellipsoid.
    pub sigma_error: Option<Vec<f64>>,
    /// Confidence radius at round `t`, alongside `sigma_error`.
    pub radius: Option<Vec<f64>>,
    /// `‖θ_t − θ*‖_2` before round `t`'s update.
    pub euclid_error: Vec<f64>,
    /// Selected pairs, for certification and replay.
    pub pairs: Vec<(usize, usize)>,
    pub final_theta: Vec<f64>,
    pub theta_star: Vec<f64>,
}

impl RunResult {
    pub fn final_regret(&self) -> f64 {
        self.cum_regret.last().copied().unwrap_or(0.0)
    }

    pub fn horizon(&self) -> usize {
        self.cum_regret.len()
    }
}

/// Builds the environment for the episode with seed `seed`.
pub fn episode_env(cfg: &RunConfig, seed: u64) -> Result<EnvModel> {
    let theta_seed = if cfg.theta.redraw_per_run { seed } else { cfg.base_seed };
    let mut rng = stream(theta_seed, THETA_STREAM);
    build_env(&cfg.action_set, cfg.d, &cfg.theta.mode()?, cfg.link_spec()?, cfg.b, &mut rng)
}

/// Runs one episode of `policy` for `cfg.t` rounds.
pub fn run_episode(cfg: &RunConfig, policy: &PolicyConfig, seed: u64) -> Result<RunResult> {
    cfg.validate()?;
    let env = episode_env(cfg, seed)?;
    let mut attack = cfg.attack.resolve(&env, cfg.budget())?;
    let mut pol = cfg.instantiate(policy)?;
    let mut labels = stream(seed, LABEL_STREAM);
    let mut adv_rng = stream(seed, ATTACK_STREAM);
    run_with(&env, &mut attack, pol.as_mut(), cfg.t, &mut labels, &mut adv_rng)
}

/// The interaction loop proper: select, sample, corrupt, update.
pub fn run_with(
    env: &EnvModel,
    attack: &mut AttackState,
    policy: &mut dyn crate::policy::DuelPolicy,
    horizon: usize,
    label_rng: &mut ChaCha8Rng,
    attack_rng: &mut ChaCha8Rng,
) -> Result<RunResult> {
    let theta_star = env.theta_star().to_vec();
    let actions = env.actions().to_vec();
    let tracks_sigma = policy.confidence(1).is_some();
    let mut out = RunResult {
        instant_regret: Vec::with_capacity(horizon),
        cum_regret: Vec::with_capacity(horizon),
        flips_used: Vec::with_capacity(horizon),
        weight: Vec::with_capacity(horizon),
        sigma_error: tracks_sigma.then(|| Vec::with_capacity(horizon)),
        radius: tracks_sigma.then(|| Vec::with_capacity(horizon)),
        euclid_error: Vec::with_capacity(horizon),
        pairs: Vec::with_capacity(horizon),
        final_theta: Vec::new(),
        theta_star: theta_star.clone(),
    };
    let mut cum = 0.0;
    for t in 1..=horizon {
        let mut step = || -> Result<()> {
            let err = sub(policy.theta(), &theta_star);
            out.euclid_error.push(norm2(&err));
            if let Some((sigma, _, beta)) = policy.confidence(t) {
                let e = sigma.quad_form(&err)?.max(0.0).sqrt();
                out.sigma_error.as_mut().expect("tracked").push(e);
                out.radius.as_mut().expect("tracked").push(beta);
            }

            let (a, b) = policy.select(t, &actions)?;
            let label = env.sample_label(a, b, label_rng)?;
            let c = attack.corrupt(t, a, b, label, env, attack_rng)?;
            let info = policy.update(t, &actions, a, b, c.observed)?;

            let r = env.instant_regret(a, b)?;
            cum += r;
            out.instant_regret.push(r);
            out.cum_regret.push(cum);
            out.flips_used.push(attack.used());
            out.weight.push(info.weight);
            out.pairs.push((a, b));
            Ok(())
        };
        step().map_err(|e| e.at_round(t))?;
    }
    out.final_theta = policy.theta().to_vec();
    Ok(out)
}

/// Seeds `base_seed + i` for `i in 0..runs`.
pub fn seeds(cfg: &RunConfig) -> Vec<u64> {
    (0..cfg.runs as u64).map(|i| cfg.base_seed.wrapping_add(i)).collect()
}

#[cfg(feature = "parallel")]
fn map_jobs<J: Sync, T: Send>(jobs: &[J], f: impl Fn(&J) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    use rayon::prelude::*;
    jobs.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_jobs<J: Sync, T: Send>(jobs: &[J], f: impl Fn(&J) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    jobs.iter().map(f).collect()
}

/// All runs of one policy, in seed order.
pub fn run_policy(cfg: &RunConfig, policy: &PolicyConfig) -> Result<Vec<RunResult>> {
    cfg.validate()?;
    map_jobs(&seeds(cfg), |&s| run_episode(cfg, policy, s))
}

/// Runs of every configured policy on the same seed list, in config order.
pub fn run_all(cfg: &RunConfig) -> Result<Vec<Vec<RunResult>>> {
    cfg.validate()?;
    let seeds = seeds(cfg);
    let jobs: Vec<(usize, u64)> = (0..cfg.policies.len())
        .flat_map(|p| seeds.iter().map(move |&s| (p, s)))
        .collect();
    let mut flat = map_jobs(&jobs, |&(p, s)| run_episode(cfg, &cfg.policies[p], s))?.into_iter();
    Ok(cfg
        .policies
        .iter()
        .map(|_| flat.by_ref().take(seeds.len()).collect())
        .collect())
}

/// Pointwise mean and sample standard deviation (`n − 1` denominator, 0
/// for a single trace).
#[derive(Debug, Clone, PartialEq)]
pub struct MeanStd {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

pub fn mean_std(traces: &[&[f64]]) -> Result<MeanStd> {
    let first = traces.first().ok_or(Error::EmptyInput)?;
    let len = first.len();
    if let Some(t) = traces.iter().find(|t| t.len() != len) {
        return Err(Error::DimensionMismatch {
            expected: len,
            got: t.len(),
        });
    }
    let n = traces.len() as f64;
    let mut mean = vec![0.0; len];
    let mut std = vec![0.0; len];
    for i in 0..len {
        let m = traces.iter().map(|t| t[i]).sum::<f64>() / n;
        mean[i] = m;
        if traces.len() > 1 {
            let ss: f64 = traces.iter().map(|t| (t[i] - m) * (t[i] - m)).sum();
            std[i] = (ss / (n - 1.0)).sqrt();
        }
    }
    Ok(MeanStd { mean, std })
}

/// Cumulative-regret statistics of a set of runs.
pub type AggregateResult = MeanStd;

pub fn aggregate(results: &[RunResult]) -> Result<AggregateResult> {
    let traces: Vec<&[f64]> = results.iter().map(|r| r.cum_regret.as_slice()).collect();
    mean_std(&traces)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub budget: u64,
    /// `(mean, std)` of the final cumulative regret, per policy in config order.
    pub finals: Vec<(f64, f64)>,
}

/// Re-runs the comparison for each corruption budget. Policies without an
/// explicit `c_bar` are re-tuned to the budget of each row.
pub fn sweep_budget(cfg: &RunConfig, budgets: &[u64]) -> Result<Vec<SweepRow>> {
    if budgets.is_empty() {
        return Err(Error::EmptyInput);
    }
    budgets
        .iter()
        .map(|&c| {
            let mut row_cfg = cfg.clone();
            row_cfg.attack.budget = Some(c);
            let runs = run_all(&row_cfg)?;
            let finals = runs
                .iter()
                .map(|rs| final_stats(&rs.iter().map(RunResult::final_regret).collect::<Vec<_>>()))
                .collect();
            Ok(SweepRow { budget: c, finals })
        })
        .collect()
}

/// Mean and sample standard deviation of a list of scalars.
pub fn final_stats(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}
