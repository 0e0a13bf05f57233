//! Budgeted label-flipping adversaries.
//!
//! Every adversary is "strong": it sees the selected pair and the realised
//! label before deciding whether to flip. Budget is consumed only by actual
//! flips, and once `used == budget` nothing is flipped regardless of kind.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::environment::EnvModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttackKind {
    None,
    /// Flip every label in rounds `1..=budget`.
    Greedy,
    /// Flip each label independently with probability `p`.
    Random { p: f64 },
    /// Flip labels that agree with the more likely outcome under the true model.
    Adversarial,
    /// Make `target` win every duel it takes part in.
    Misleading { target: usize },
}

/// Config-file form: `{"kind": "random", "budget": 45, "p": 0.5}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackConfig {
    #[serde(default = "AttackConfig::default_kind")]
    pub kind: String,
    /// Defaults to `ceil(sqrt(T))` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<usize>,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            kind: Self::default_kind(),
            budget: None,
            p: None,
            target: None,
        }
    }
}

impl AttackConfig {
    fn default_kind() -> String {
        "greedy".into()
    }

    pub const DEFAULT_P: f64 = 0.5;

    /// Resolves the config against a concrete environment. The misleading
    /// target defaults to the best action strictly worse than the optimum.
    pub fn resolve(&self, env: &EnvModel, budget: u64) -> Result<AttackState> {
        let kind = match self.kind.as_str() {
            "none" => AttackKind::None,
            "greedy" => AttackKind::Greedy,
            "random" => AttackKind::Random {
                p: self.p.unwrap_or(Self::DEFAULT_P),
            },
            "adversarial" => AttackKind::Adversarial,
            "misleading" => {
                let target = match self.target {
                    Some(t) => t,
                    None => env.runner_up().ok_or_else(|| {
                        Error::InvalidAttack("all actions are optimal; no misleading target exists".into())
                    })?,
                };
                AttackKind::Misleading { target }
            }
            other => return Err(Error::InvalidAttack(format!("unknown attack kind {other:?}"))),
        };
        if self.p.is_some() && !matches!(kind, AttackKind::Random { .. }) {
            return Err(Error::InvalidAttack("\"p\" only applies to the random attack".into()));
        }
        if self.target.is_some() && !matches!(kind, AttackKind::Misleading { .. }) {
            return Err(Error::InvalidAttack("\"target\" only applies to the misleading attack".into()));
        }
        AttackState::new(kind, budget, env)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Corruption {
    pub observed: bool,
    pub flipped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackState {
    kind: AttackKind,
    budget: u64,
    used: u64,
}

impl AttackState {
    pub fn new(kind: AttackKind, budget: u64, env: &EnvModel) -> Result<Self> {
        match kind {
            AttackKind::Random { p } if !(p > 0.0 && p < 1.0) => {
                return Err(Error::InvalidAttack(format!("random attack needs 0 < p < 1, got {p}")));
            }
            AttackKind::Misleading { target } => {
                let rewards = env.rewards();
                if target >= rewards.len() {
                    return Err(Error::IndexOutOfRange {
                        index: target,
                        len: rewards.len(),
                    });
                }
                if rewards[target] >= rewards[env.best_action()] {
                    return Err(Error::InvalidAttack(format!(
                        "misleading target {target} is an optimal action"
                    )));
                }
            }
            _ => {}
        }
        Ok(Self { kind, budget, used: 0 })
    }

    pub fn none() -> Self {
        Self {
            kind: AttackKind::None,
            budget: 0,
            used: 0,
        }
    }

    pub fn kind(&self) -> AttackKind {
        self.kind
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    /// Decides whether to flip round `round`'s (1-based) label for the pair
    /// `(a, b)`; `true_label == true` means `a` won.
    pub fn corrupt<R: Rng + ?Sized>(
        &mut self,
        round: usize,
        a: usize,
        b: usize,
        true_label: bool,
        env: &EnvModel,
        rng: &mut R,
    ) -> Result<Corruption> {
        let pass = Corruption {
            observed: true_label,
            flipped: false,
        };
        if self.used >= self.budget {
            return Ok(pass);
        }
        let flip = match self.kind {
            AttackKind::None => false,
            AttackKind::Greedy => round as u64 <= self.budget,
            AttackKind::Random { p } => rng.gen::<f64>() < p,
            AttackKind::Adversarial => {
                let p = env.true_preference_prob(a, b)?;
                (p > 0.5 && true_label) || (p < 0.5 && !true_label)
            }
            AttackKind::Misleading { target } => {
                // a duel of the target against itself cannot be lost
                if a == b {
                    false
                } else if target == a {
                    !true_label
                } else if target == b {
                    true_label
                } else {
                    false
                }
            }
        };
        if !flip {
            return Ok(pass);
        }
        if self.used + 1 > self.budget {
            return Err(Error::BudgetViolation {
                used: self.used + 1,
                budget: self.budget,
            });
        }
        self.used += 1;
        Ok(Corruption {
            observed: !true_label,
            flipped: true,
        })
    }
}
