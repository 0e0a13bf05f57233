//! Link functions mapping a reward gap to a win probability.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A link function `σ` with `σ(x) + σ(-x) = 1`.
///
/// `Scaled` is `σ_s(x) = σ_inner(s * x)`; the inner link may not itself be
/// scaled.
#[derive(Debug, Clone, PartialEq)]
pub enum LinkSpec {
    Sigmoid,
    PiecewiseLinear,
    Scaled { inner: Box<LinkSpec>, scale: f64 },
}

/// Config-file form of a link (`{"kind": "scaled", "scale": 0.5}`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    /// Inner link of a scaled link; defaults to `piecewise_linear`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<String>,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            kind: "sigmoid".into(),
            scale: None,
            inner: None,
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl LinkSpec {
    pub fn scaled(inner: LinkSpec, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidLink(format!("scale must be finite and positive, got {scale}")));
        }
        if matches!(inner, LinkSpec::Scaled { .. }) {
            return Err(Error::InvalidLink("scaled links may not be nested".into()));
        }
        Ok(LinkSpec::Scaled {
            inner: Box::new(inner),
            scale,
        })
    }

    pub fn from_config(cfg: &LinkConfig) -> Result<Self> {
        let base = |name: &str| match name {
            "sigmoid" => Ok(LinkSpec::Sigmoid),
            "piecewise_linear" => Ok(LinkSpec::PiecewiseLinear),
            other => Err(Error::InvalidLink(format!("unknown link kind {other:?}"))),
        };
        match cfg.kind.as_str() {
            "scaled" => {
                let scale = cfg
                    .scale
                    .ok_or_else(|| Error::InvalidLink("scaled link requires \"scale\"".into()))?;
                let inner = base(cfg.inner.as_deref().unwrap_or("piecewise_linear"))?;
                LinkSpec::scaled(inner, scale)
            }
            kind => {
                if cfg.scale.is_some() || cfg.inner.is_some() {
                    return Err(Error::InvalidLink(format!(
                        "\"scale\"/\"inner\" only apply to scaled links, not {kind:?}"
                    )));
                }
                base(kind)
            }
        }
    }

    pub fn to_config(&self) -> LinkConfig {
        match self {
            LinkSpec::Sigmoid => LinkConfig::default(),
            LinkSpec::PiecewiseLinear => LinkConfig {
                kind: "piecewise_linear".into(),
                ..LinkConfig::default()
            },
            LinkSpec::Scaled { inner, scale } => LinkConfig {
                kind: "scaled".into(),
                scale: Some(*scale),
                inner: Some(inner.to_config().kind),
            },
        }
    }

    pub fn is_sigmoid(&self) -> bool {
        matches!(self, LinkSpec::Sigmoid)
    }

    /// `σ(x)`.
    pub fn value(&self, x: f64) -> f64 {
        match self {
            LinkSpec::Sigmoid => sigmoid(x),
            LinkSpec::PiecewiseLinear => (0.5 + x).clamp(0.0, 1.0),
            LinkSpec::Scaled { inner, scale } => inner.value(scale * x),
        }
    }

    /// `σ'(x)`. The piecewise link has slope 1 on the closed interval
    /// `[-1/2, 1/2]` and 0 outside.
    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            LinkSpec::Sigmoid => {
                let p = sigmoid(x);
                p * (1.0 - p)
            }
            LinkSpec::PiecewiseLinear => {
                if x.abs() <= 0.5 {
                    1.0
                } else {
                    0.0
                }
            }
            LinkSpec::Scaled { inner, scale } => scale * inner.derivative(scale * x),
        }
    }

    /// Antiderivative `m` with `m' = σ`, normalised so that `m(x) - x -> 0`
    /// as `x -> +inf`. `m(z) - o z` is the per-record loss whose gradient
    /// is `(σ(z) - o)`; for the sigmoid it is the binary log-loss.
    pub fn integral(&self, x: f64) -> f64 {
        match self {
            LinkSpec::Sigmoid => x.max(0.0) + (-x.abs()).exp().ln_1p(),
            LinkSpec::PiecewiseLinear => {
                if x < -0.5 {
                    0.0
                } else if x > 0.5 {
                    x
                } else {
                    0.5 * x * x + 0.5 * x + 0.125
                }
            }
            LinkSpec::Scaled { inner, scale } => inner.integral(scale * x) / scale,
        }
    }

    /// Largest `r` such that arguments in `[-r, r]` stay inside the link's
    /// valid domain (infinite for the sigmoid).
    pub fn valid_radius(&self) -> f64 {
        match self {
            LinkSpec::Sigmoid => f64::INFINITY,
            LinkSpec::PiecewiseLinear => 0.5,
            LinkSpec::Scaled { inner, scale } => inner.valid_radius() / scale,
        }
    }

    /// Minimum of `σ'` over `|x| <= feat_diff_bound * b`: the derivative
    /// lower bound `κ`.
    pub fn kappa_for(&self, b: f64, feat_diff_bound: f64) -> Result<f64> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidLink(format!("B must be positive, got {b}")));
        }
        if !(feat_diff_bound > 0.0 && feat_diff_bound <= 2.0) {
            return Err(Error::InvalidLink(format!(
                "feature-difference bound must lie in (0, 2], got {feat_diff_bound}"
            )));
        }
        let range = feat_diff_bound * b;
        match self {
            // σ' is even and decreasing in |x|, so the minimum sits at the endpoint.
            LinkSpec::Sigmoid => {
                let e = (-range).exp();
                Ok(e / ((1.0 + e) * (1.0 + e)))
            }
            LinkSpec::PiecewiseLinear => {
                if range > 0.5 {
                    Err(Error::DomainExceedsLinearRegion { range })
                } else {
                    Ok(1.0)
                }
            }
            LinkSpec::Scaled { inner, scale } => {
                Ok(scale * inner.kappa_for(b * scale, feat_diff_bound)?)
            }
        }
    }
}
