//! JSON run configuration and its resolution into concrete policies.
//!
//! Every key is optional; defaults reproduce the standard benchmark
//! (d = 5, T = 2000, B = 2, sigmoid link, hypercube actions, 10 runs,
//! greedy attack with budget `ceil(sqrt(T))`).

use serde::{Deserialize, Serialize};

use crate::adversary::AttackConfig;
use crate::environment::{ActionSetSpec, ThetaMode};
use crate::error::{Error, Result};
use crate::link::{LinkConfig, LinkSpec};
use crate::policy::{Baseline, BaselineKind, DuelPolicy, PolicyKind, Rcdb, RcdbParams, RcdbS, RcdbsParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaConfig {
    #[serde(default = "ThetaConfig::default_mode")]
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    /// Draw a fresh `θ*` for every run (seeded per run) instead of one
    /// shared `θ*` drawn from `base_seed`.
    #[serde(default = "default_true")]
    pub redraw_per_run: bool,
}

fn default_true() -> bool {
    true
}

impl ThetaConfig {
    fn default_mode() -> String {
        "random_norm2".into()
    }

    pub fn mode(&self) -> Result<ThetaMode> {
        match (self.mode.as_str(), &self.values) {
            ("random_norm2", None) => Ok(ThetaMode::RandomNorm2),
            ("random_norm2", Some(_)) => Err(Error::InvalidConfig(
                "theta.values only applies to mode \"explicit\"".into(),
            )),
            ("explicit", Some(v)) => Ok(ThetaMode::Explicit(v.clone())),
            ("explicit", None) => Err(Error::InvalidConfig("theta mode \"explicit\" requires \"values\"".into())),
            (other, _) => Err(Error::InvalidConfig(format!("unknown theta mode {other:?}"))),
        }
    }
}

impl Default for ThetaConfig {
    fn default() -> Self {
        Self {
            mode: Self::default_mode(),
            values: None,
            redraw_per_run: true,
        }
    }
}

/// Manual replacements for derived policy parameters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// `β` for RCDB, base bonus `γ` for the baselines, constant `β_t` for RCDB-S.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Constant `β̃_t` for RCDB-S.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_tilde: Option<f64>,
}

impl Overrides {
    fn is_empty(&self) -> bool {
        *self == Overrides::default()
    }
}

/// Shared exploration multiplier. The derived radii are worst-case bounds
/// that are far too wide at a few thousand rounds; at scale 1 every UCB rule
/// here explores purely and ignores the labels.
pub const DEFAULT_BONUS_SCALE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    #[serde(default)]
    pub name: String,
    /// Tolerance threshold `C̄`; when absent the attack budget is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_bar: Option<u64>,
    /// Multiplier on the exploration radius; defaults to
    /// [`DEFAULT_BONUS_SCALE`]. Use 1 for the radius as derived.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bonus_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Overrides::is_empty")]
    pub overrides: Overrides,
}

impl PolicyConfig {
    pub fn new(kind: PolicyKind) -> Self {
        Self {
            kind,
            name: kind.as_str().into(),
            c_bar: None,
            bonus_scale: None,
            overrides: Overrides::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "RunConfig::default_d")]
    pub d: usize,
    #[serde(default = "RunConfig::default_t")]
    pub t: usize,
    #[serde(default = "RunConfig::default_b")]
    pub b: f64,
    #[serde(default)]
    pub link: LinkConfig,
    #[serde(default = "RunConfig::default_action_set")]
    pub action_set: ActionSetSpec,
    #[serde(default)]
    pub theta: ThetaConfig,
    #[serde(default = "RunConfig::default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "RunConfig::default_delta")]
    pub delta: f64,
    #[serde(default = "RunConfig::default_policies")]
    pub policies: Vec<PolicyConfig>,
    #[serde(default)]
    pub attack: AttackConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            d: Self::default_d(),
            t: Self::default_t(),
            b: Self::default_b(),
            link: LinkConfig::default(),
            action_set: Self::default_action_set(),
            theta: ThetaConfig::default(),
            runs: Self::default_runs(),
            base_seed: 0,
            delta: Self::default_delta(),
            policies: Self::default_policies(),
            attack: AttackConfig::default(),
        }
    }
}

/// `ceil(sqrt(T))`.
pub fn default_budget(horizon: usize) -> u64 {
    let mut c = (horizon as f64).sqrt().floor() as u64;
    while c * c < horizon as u64 {
        c += 1;
    }
    c
}

impl RunConfig {
    fn default_d() -> usize {
        5
    }
    fn default_t() -> usize {
        2000
    }
    fn default_b() -> f64 {
        2.0
    }
    fn default_action_set() -> ActionSetSpec {
        ActionSetSpec::Hypercube
    }
    fn default_runs() -> usize {
        10
    }
    fn default_delta() -> f64 {
        0.05
    }
    fn default_policies() -> Vec<PolicyConfig> {
        [PolicyKind::Rcdb, PolicyKind::MaxInP, PolicyKind::Colstim, PolicyKind::MaxPairUcb]
            .into_iter()
            .map(PolicyConfig::new)
            .collect()
    }

    pub fn budget(&self) -> u64 {
        self.attack.budget.unwrap_or_else(|| default_budget(self.t))
    }

    pub fn link_spec(&self) -> Result<LinkSpec> {
        LinkSpec::from_config(&self.link)
    }

    /// Derivative lower bound over the feasible argument range `|x| <= 2B`.
    pub fn kappa(&self) -> Result<f64> {
        self.link_spec()?.kappa_for(self.b, 2.0)
    }

    /// Validates the config and returns a copy with every default made
    /// explicit (policy names, bonus scales and the attack budget).
    pub fn resolved(&self) -> Result<RunConfig> {
        self.validate()?;
        let mut out = self.clone();
        out.attack.budget = Some(self.budget());
        for p in &mut out.policies {
            if p.name.is_empty() {
                p.name = p.kind.as_str().into();
            }
            p.bonus_scale.get_or_insert(DEFAULT_BONUS_SCALE);
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.d == 0 {
            return bad("d must be at least 1".into());
        }
        if self.t == 0 {
            return bad("t must be at least 1".into());
        }
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        if !(self.b > 0.0 && self.b.is_finite()) {
            return bad(format!("b must be positive, got {}", self.b));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if self.budget() > self.t as u64 {
            return bad(format!("attack budget {} exceeds t = {}", self.budget(), self.t));
        }
        if self.policies.is_empty() {
            return bad("at least one policy is required".into());
        }
        self.theta.mode()?;
        self.action_set.build(self.d)?;
        self.kappa()?;
        let mut names = std::collections::HashSet::new();
        for p in &self.policies {
            let name = if p.name.is_empty() { p.kind.as_str() } else { &p.name };
            if !names.insert(name.to_string()) {
                return bad(format!("duplicate policy name {name:?}"));
            }
            if name.contains(',') || name.contains('\n') {
                return bad(format!("policy name {name:?} may not contain commas or newlines"));
            }
            if let Some(s) = p.bonus_scale {
                if !(s >= 0.0 && s.is_finite()) {
                    return bad(format!("bonus_scale must be nonnegative, got {s}"));
                }
            }
            let o = &p.overrides;
            for (key, v) in [("lambda", o.lambda), ("alpha", o.alpha), ("beta", o.beta), ("beta_tilde", o.beta_tilde)] {
                let Some(v) = v else { continue };
                // a zero radius (pure exploitation) is allowed
                let floor_ok = if key.starts_with("beta") { v >= 0.0 } else { v > 0.0 };
                if !(floor_ok && v.is_finite()) {
                    return bad(format!("override {key} out of range: {v}"));
                }
            }
            if p.kind == PolicyKind::Rcdbs && !self.link_spec()?.is_sigmoid() {
                return bad(format!("policy {name:?} (rcdbs) requires the sigmoid link"));
            }
        }
        Ok(())
    }

    /// Builds a fresh policy instance for one episode.
    pub fn instantiate(&self, policy: &PolicyConfig) -> Result<Box<dyn DuelPolicy + Send>> {
        let link = self.link_spec()?;
        let kappa = self.kappa()?;
        let c = policy.c_bar.unwrap_or_else(|| self.budget());
        let scale = policy.bonus_scale.unwrap_or(DEFAULT_BONUS_SCALE);
        let o = &policy.overrides;

        let rcdb_params = |c: u64| {
            let mut p = RcdbParams::derive(self.t, self.d, self.b, kappa, self.delta, c);
            if let Some(l) = o.lambda {
                p.lambda = l;
            }
            if let Some(a) = o.alpha {
                p.alpha = a;
            }
            p.beta = o.beta.unwrap_or_else(|| crate::policy::beta_rcdb(self.t, self.d, &p));
            p
        };

        Ok(match policy.kind {
            PolicyKind::Rcdb => Box::new(Rcdb::new(self.d, rcdb_params(c), scale, link)?),
            PolicyKind::Rcdbs => {
                let mut p = RcdbsParams::derive(self.d, self.b, kappa, self.delta, c);
                if let Some(l) = o.lambda {
                    p.lambda = l;
                }
                if let Some(a) = o.alpha {
                    p.alpha = a;
                }
                p.beta_override = o.beta;
                p.beta_tilde_override = o.beta_tilde;
                Box::new(RcdbS::new(self.d, p, scale, link)?)
            }
            kind => {
                // baselines explore with the no-corruption RCDB radius
                let p = rcdb_params(0);
                let gamma = scale * p.beta;
                match kind {
                    PolicyKind::MaxPairUcb => Box::new(Rcdb::max_pair_ucb(self.d, p, gamma, link)?),
                    PolicyKind::MaxInP => {
                        Box::new(Baseline::new(self.d, BaselineKind::MaxInP, p.lambda, kappa, gamma, link)?)
                    }
                    PolicyKind::Colstim => {
                        Box::new(Baseline::new(self.d, BaselineKind::Colstim, p.lambda, kappa, gamma, link)?)
                    }
                    PolicyKind::Rcdb | PolicyKind::Rcdbs => unreachable!(),
                }
            }
        })
    }
}
