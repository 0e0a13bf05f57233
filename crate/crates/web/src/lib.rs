//! Browser bindings. Each exported function takes plain numbers and strings
//! and returns a JSON document for the page's canvas plots.

use robust_duel::harness::{aggregate, run_all, sweep_budget};
use robust_duel::{LinkSpec, RunConfig};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Upper bound on plotted points per curve.
const MAX_POINTS: usize = 200;

#[derive(Serialize)]
struct Curve {
    name: String,
    mean: Vec<f64>,
    std: Vec<f64>,
}

#[derive(Serialize)]
struct CompareOut {
    rounds: Vec<usize>,
    curves: Vec<Curve>,
}

#[derive(Serialize)]
struct SweepOut {
    budgets: Vec<u64>,
    curves: Vec<Curve>,
}

#[derive(Serialize)]
struct LinkOut {
    x: Vec<f64>,
    value: Vec<f64>,
    derivative: Vec<f64>,
    kappa: f64,
}

fn base_config(attack: &str, t: usize, runs: usize, seed: u64) -> RunConfig {
    let mut cfg = RunConfig {
        t,
        runs,
        base_seed: seed,
        ..RunConfig::default()
    };
    cfg.attack.kind = attack.to_string();
    cfg
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

fn stride(t: usize) -> usize {
    t.div_ceil(MAX_POINTS).max(1)
}

/// Mean and std of cumulative regret of the four default policies.
pub fn compare_json(attack: &str, budget: u64, t: usize, runs: usize, seed: u64) -> Result<String, String> {
    let mut cfg = base_config(attack, t, runs, seed);
    cfg.attack.budget = Some(budget);
    let cfg = cfg.resolved().map_err(|e| e.to_string())?;
    let results = run_all(&cfg).map_err(|e| e.to_string())?;
    let step = stride(t);
    let keep: Vec<usize> = (0..t).filter(|i| (i + 1) % step == 0 || i + 1 == t).collect();
    let mut curves = Vec::new();
    for (p, runs) in cfg.policies.iter().zip(&results) {
        let agg = aggregate(runs).map_err(|e| e.to_string())?;
        curves.push(Curve {
            name: p.name.clone(),
            mean: keep.iter().map(|&i| agg.mean[i]).collect(),
            std: keep.iter().map(|&i| agg.std[i]).collect(),
        });
    }
    to_json(&CompareOut {
        rounds: keep.iter().map(|i| i + 1).collect(),
        curves,
    })
}

/// Final cumulative regret against the greedy attack budget.
pub fn sweep_json(budgets: &str, t: usize, runs: usize, seed: u64) -> Result<String, String> {
    let budgets = budgets
        .split(',')
        .map(|s| s.trim().parse::<u64>().map_err(|_| format!("bad budget {s:?}")))
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = base_config("greedy", t, runs, seed).resolved().map_err(|e| e.to_string())?;
    let rows = sweep_budget(&cfg, &budgets).map_err(|e| e.to_string())?;
    let curves = cfg
        .policies
        .iter()
        .enumerate()
        .map(|(k, p)| Curve {
            name: p.name.clone(),
            mean: rows.iter().map(|r| r.finals[k].0).collect(),
            std: rows.iter().map(|r| r.finals[k].1).collect(),
        })
        .collect();
    to_json(&SweepOut { budgets, curves })
}

/// Sigmoid value and derivative on `[-2B, 2B]` with the matching `κ`.
pub fn link_json(b: f64) -> Result<String, String> {
    let link = LinkSpec::Sigmoid;
    let kappa = link.kappa_for(b, 2.0).map_err(|e| e.to_string())?;
    let r = 2.0 * b;
    let x: Vec<f64> = (0..=MAX_POINTS).map(|i| -r + 2.0 * r * i as f64 / MAX_POINTS as f64).collect();
    to_json(&LinkOut {
        value: x.iter().map(|&v| link.value(v)).collect(),
        derivative: x.iter().map(|&v| link.derivative(v)).collect(),
        x,
        kappa,
    })
}

#[wasm_bindgen]
pub fn compare(attack: &str, budget: u32, t: u32, runs: u32, seed: u32) -> Result<String, JsValue> {
    compare_json(attack, budget.into(), t as usize, runs as usize, seed.into()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn sweep(budgets: &str, t: u32, runs: u32, seed: u32) -> Result<String, JsValue> {
    sweep_json(budgets, t as usize, runs as usize, seed.into()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn link_profile(b: f64) -> Result<String, JsValue> {
    link_json(b).map_err(|e| JsValue::from_str(&e))
}
