//! Ground-truth linear preference environment with a static context
//! (`φ(x, a) = a`).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, sub};
use crate::link::LinkSpec;

/// Slack allowed on `||θ*|| <= B` and `||a|| <= 1` for rounding.
const NORM_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ActionSetSpec {
    /// All `2^d` vertices of `{-1/√d, 1/√d}^d`. Bit `j` of the action index
    /// selects the sign of coordinate `j` (set bit = positive).
    Hypercube,
    /// Standard basis `e_1, ..., e_d`.
    Basis,
    Explicit { actions: Vec<Vec<f64>> },
}

impl ActionSetSpec {
    pub fn build(&self, d: usize) -> Result<Vec<Vec<f64>>> {
        if d == 0 {
            return Err(Error::InvalidActionSet("dimension must be at least 1".into()));
        }
        let actions = match self {
            ActionSetSpec::Hypercube => {
                if d > 20 {
                    return Err(Error::InvalidActionSet(format!(
                        "hypercube action set limited to d <= 20, got {d}"
                    )));
                }
                let c = 1.0 / (d as f64).sqrt();
                (0..1usize << d)
                    .map(|idx| (0..d).map(|j| if idx >> j & 1 == 1 { c } else { -c }).collect())
                    .collect()
            }
            ActionSetSpec::Basis => (0..d)
                .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
            ActionSetSpec::Explicit { actions } => actions.clone(),
        };
        if actions.len() < 2 {
            return Err(Error::InvalidActionSet("need at least two actions".into()));
        }
        for (i, a) in actions.iter().enumerate() {
            if a.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: a.len(),
                });
            }
            if a.iter().any(|x| !x.is_finite()) || norm2(a) > 1.0 + NORM_SLACK {
                return Err(Error::InvalidActionSet(format!(
                    "action {i} must be finite with norm at most 1"
                )));
            }
        }
        Ok(actions)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ThetaMode {
    /// Coordinates uniform on `[-0.5, 0.5]`, rescaled to `||θ*||_2 = 2`.
    RandomNorm2,
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvModel {
    theta_star: Vec<f64>,
    actions: Vec<Vec<f64>>,
    link: LinkSpec,
    b: f64,
    rewards: Vec<f64>,
    best: usize,
}

pub fn draw_theta_norm2<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.5..=0.5)).collect();
        let n = norm2(&raw);
        if n > 0.0 {
            return raw.iter().map(|x| 2.0 * x / n).collect();
        }
    }
}

pub fn build_env<R: Rng + ?Sized>(
    spec: &ActionSetSpec,
    d: usize,
    theta_mode: &ThetaMode,
    link: LinkSpec,
    b: f64,
    rng: &mut R,
) -> Result<EnvModel> {
    let actions = spec.build(d)?;
    let theta_star = match theta_mode {
        ThetaMode::RandomNorm2 => draw_theta_norm2(d, rng),
        ThetaMode::Explicit(v) => {
            if v.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: v.len(),
                });
            }
            v.clone()
        }
    };
    EnvModel::new(theta_star, actions, link, b)
}

impl EnvModel {
    pub fn new(theta_star: Vec<f64>, actions: Vec<Vec<f64>>, link: LinkSpec, b: f64) -> Result<Self> {
        let norm = norm2(&theta_star);
        if !norm.is_finite() || norm > b * (1.0 + NORM_SLACK) {
            return Err(Error::InvalidTheta { norm, bound: b });
        }
        if actions.len() < 2 {
            return Err(Error::InvalidActionSet("need at least two actions".into()));
        }
        for a in &actions {
            if a.len() != theta_star.len() {
                return Err(Error::DimensionMismatch {
                    expected: theta_star.len(),
                    got: a.len(),
                });
            }
        }
        let rewards: Vec<f64> = actions.iter().map(|a| dot(&theta_star, a)).collect();
        let (best, _) = rewards
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &r)| if r > bv { (i, r) } else { (bi, bv) });
        let max_gap = rewards.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - rewards.iter().cloned().fold(f64::INFINITY, f64::min);
        if max_gap > link.valid_radius() {
            return Err(Error::DomainExceedsLinearRegion { range: max_gap });
        }
        Ok(Self {
            theta_star,
            actions,
            link,
            b,
            rewards,
            best,
        })
    }

    pub fn dim(&self) -> usize {
        self.theta_star.len()
    }

    pub fn theta_star(&self) -> &[f64] {
        &self.theta_star
    }

    pub fn actions(&self) -> &[Vec<f64>] {
        &self.actions
    }

    pub fn link(&self) -> &LinkSpec {
        &self.link
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    /// Index of the best action, lowest index on ties.
    pub fn best_action(&self) -> usize {
        self.best
    }

    fn check(&self, index: usize) -> Result<()> {
        if index < self.actions.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index,
                len: self.actions.len(),
            })
        }
    }

    pub fn phi_diff(&self, a: usize, b: usize) -> Result<Vec<f64>> {
        self.check(a)?;
        self.check(b)?;
        Ok(sub(&self.actions[a], &self.actions[b]))
    }

    /// `P(a ≻ b) = σ(r*(a) - r*(b))`.
    pub fn true_preference_prob(&self, a: usize, b: usize) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.link.value(self.rewards[a] - self.rewards[b]))
    }

    /// One Bernoulli draw; `true` (label 1) means `a` wins.
    pub fn sample_label<R: Rng + ?Sized>(&self, a: usize, b: usize, rng: &mut R) -> Result<bool> {
        let p = self.true_preference_prob(a, b)?;
        let u: f64 = rng.gen();
        Ok(u < p)
    }

    /// `2 r*(best) - r*(a) - r*(b)`.
    pub fn instant_regret(&self, a: usize, b: usize) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        let top = self.rewards[self.best];
        Ok(((top - self.rewards[a]) + (top - self.rewards[b])).max(0.0))
    }

    /// Index of the highest-reward action strictly worse than the best one.
    pub fn runner_up(&self) -> Option<usize> {
        let top = self.rewards[self.best];
        self.rewards
            .iter()
            .enumerate()
            .filter(|(_, &r)| r < top)
            .fold(None, |acc: Option<(usize, f64)>, (i, &r)| match acc {
                Some((_, v)) if v >= r => acc,
                _ => Some((i, r)),
            })
            .map(|(i, _)| i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e(i: usize, d: usize) -> Vec<f64> {
        (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()
    }

    fn line_env() -> EnvModel {
        EnvModel::new(
            vec![2.0, 0.0],
            vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0]],
            LinkSpec::Sigmoid,
            2.0,
        )
        .unwrap()
    }

    #[test]
    fn build_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let env = build_env(
            &ActionSetSpec::Basis,
            4,
            &ThetaMode::Explicit(e(0, 4).iter().map(|x| x / 4.0).collect()),
            LinkSpec::PiecewiseLinear,
            0.25,
            &mut rng,
        )
        .unwrap();
        assert_eq!(env.best_action(), 0);

        let env = build_env(
            &ActionSetSpec::Explicit {
                actions: vec![vec![1.0, 0.0], vec![-1.0, 0.0]],
            },
            2,
            &ThetaMode::Explicit(vec![2.0, 0.0]),
            LinkSpec::Sigmoid,
            2.0,
            &mut rng,
        )
        .unwrap();
        assert_eq!(env.best_action(), 0);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let env = build_env(&ActionSetSpec::Hypercube, 5, &ThetaMode::RandomNorm2, LinkSpec::Sigmoid, 2.0, &mut rng)
            .unwrap();
        assert_eq!(env.actions().len(), 32);
        assert_abs_diff_eq!(norm2(env.theta_star()), 2.0, epsilon = 1e-12);
        for a in env.actions() {
            assert_abs_diff_eq!(norm2(a), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn build_rejections() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = build_env(
            &ActionSetSpec::Basis,
            2,
            &ThetaMode::Explicit(vec![3.0, 0.0]),
            LinkSpec::Sigmoid,
            2.0,
            &mut rng,
        );
        assert!(matches!(err, Err(Error::InvalidTheta { .. })));

        let err = build_env(
            &ActionSetSpec::Explicit {
                actions: vec![vec![1.0, 0.0], vec![-1.0, 0.0]],
            },
            2,
            &ThetaMode::Explicit(vec![0.3, 0.0]),
            LinkSpec::PiecewiseLinear,
            1.0,
            &mut rng,
        );
        assert!(matches!(err, Err(Error::DomainExceedsLinearRegion { .. })));

        assert!(ActionSetSpec::Hypercube.build(21).is_err());
        assert!(ActionSetSpec::Explicit { actions: vec![vec![2.0]] }.build(1).is_err());
        assert!(ActionSetSpec::Explicit {
            actions: vec![vec![1.0], vec![1.5]]
        }
        .build(1)
        .is_err());
        assert!(ActionSetSpec::Basis.build(0).is_err());
    }

    #[test]
    fn preference_examples() {
        let env = line_env();
        assert_eq!(env.true_preference_prob(2, 2).unwrap(), 0.5);
        assert_abs_diff_eq!(env.true_preference_prob(0, 1).unwrap(), 0.982014, epsilon = 1e-6);
        assert!(matches!(env.true_preference_prob(0, 3), Err(Error::IndexOutOfRange { .. })));

        let pw = EnvModel::new(
            vec![0.2, 0.0],
            vec![vec![1.0, 0.0], vec![-1.0, 0.0]],
            LinkSpec::PiecewiseLinear,
            1.0,
        )
        .unwrap();
        assert_abs_diff_eq!(pw.true_preference_prob(0, 1).unwrap(), 0.9, epsilon = 1e-15);

        for a in 0..3 {
            for b in 0..3 {
                let s = env.true_preference_prob(a, b).unwrap() + env.true_preference_prob(b, a).unwrap();
                assert!((s - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn sampling_frequencies() {
        let env = line_env();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let fair = (0..n).filter(|_| env.sample_label(1, 1, &mut rng).unwrap()).count() as f64 / n as f64;
        assert!((fair - 0.5).abs() < 0.01);
        let biased = (0..n).filter(|_| env.sample_label(0, 1, &mut rng).unwrap()).count() as f64 / n as f64;
        assert!((biased - LinkSpec::Sigmoid.value(4.0)).abs() < 0.005);

        // scale 2 pushes the 0.25 gap onto the clamp boundary: probability 1
        let sure = EnvModel::new(
            vec![0.125, 0.0],
            vec![vec![1.0, 0.0], vec![-1.0, 0.0]],
            LinkSpec::scaled(LinkSpec::PiecewiseLinear, 2.0).unwrap(),
            0.125,
        )
        .unwrap();
        assert_eq!(sure.true_preference_prob(0, 1).unwrap(), 1.0);
        assert!((0..1000).all(|_| sure.sample_label(0, 1, &mut rng).unwrap()));
    }

    #[test]
    fn sampling_is_reproducible() {
        let env = line_env();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..200).map(|_| env.sample_label(2, 1, &mut rng).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
    }

    #[test]
    fn regret_examples() {
        let env = line_env();
        assert_eq!(env.instant_regret(0, 0).unwrap(), 0.0);
        assert_eq!(env.instant_regret(2, 1).unwrap(), 6.0);
        assert_eq!(env.instant_regret(0, 2).unwrap(), 2.0);
        for a in 0..3 {
            for b in 0..3 {
                let r = env.instant_regret(a, b).unwrap();
                assert_eq!(r, env.instant_regret(b, a).unwrap());
                assert!((0.0..=4.0 * env.b()).contains(&r));
            }
        }
        assert_eq!(env.runner_up(), Some(2));
    }
}
