//! Mollifier convergence in W^{s,p,ω} and the weak-type capacity estimate.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::fields::standard_bump;
use crate::capacity::{solve_capacity, CapacityProblem};
use crate::error::{Error, Result};
use crate::grid::{sublevel_mask, DomainMask, Grid, ScalarField};
use crate::maxop::truncated_maximal;
use crate::report::{ExperimentReport, Gate, Table};
use crate::seminorm::{lp_norm_pow, weighted_seminorm_pow, SeminormParams};
use crate::weights::{tail_integrability, TailClass, Weight};

/// Window radii of the tail test run before any whole-space norm.
pub const TAIL_WINDOWS: [f64; 6] = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0];

/// Refuses weights whose tail `∫_{|z|>1} ω |z|^(-sp)` is not finite.
pub fn require_finite_tail(w: &Weight, s: f64, p: f64) -> Result<()> {
    match tail_integrability(w, s, p, 1.0, &TAIL_WINDOWS)?.class {
        TailClass::Finite => Ok(()),
        _ => Err(Error::TailDivergent),
    }
}

/// `f * φ_j` with φ_j the radial bump on B(0, 2^-j), normalized to unit
/// discrete mass. f is extended by zero outside its mask.
pub fn mollify(f: &ScalarField, j: u32) -> Result<ScalarField> {
    let g = f.grid();
    let h = g.h();
    let rad = 2f64.powi(-(j as i32)) / h;
    if rad <= 1.0 {
        return Err(Error::ResolutionInsufficient(format!("B(0, 2^-{j}) holds a single node at h = {h}")));
    }
    let k = rad.ceil() as isize;
    let ky = if g.dim() == 2 { k } else { 0 };
    let mut stencil = Vec::new();
    for dy in -ky..=ky {
        for dx in -k..=k {
            let v = standard_bump(((dx * dx + dy * dy) as f64).sqrt() / rad);
            if v > 0.0 {
                stencil.push((dx, dy, v));
            }
        }
    }
    let mass: f64 = stencil.iter().map(|t| t.2).sum();
    let mask = f.mask();
    let mut out = vec![0.0; g.len()];
    for &i in mask.nodes() {
        let [ix, iy] = g.cell(i);
        let mut acc = 0.0;
        for &(dx, dy, v) in &stencil {
            if let Some(q) = g.checked_index(ix as isize - dx, iy as isize - dy) {
                acc += v * f.get(q);
            }
        }
        out[i] = acc / mass;
    }
    ScalarField::new(mask, out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MollifierRow {
    pub j: u32,
    pub lp_pow: f64,
    pub seminorm_pow: f64,
    /// ‖f - f*φ_j‖ in W^{s,p,ω}
    pub norm: f64,
}

/// ‖f - f*φ_j‖_{W^{s,p,ω}} for each j. f must sit on a whole-space window and
/// ω must have a finite tail.
pub fn mollifier_convergence(f: &ScalarField, s: f64, p: f64, w: &Weight, j_list: &[u32]) -> Result<Vec<MollifierRow>> {
    if !f.mask().represents_whole_space() {
        return Err(Error::invalid("mollifier convergence runs on a whole-space window"));
    }
    require_finite_tail(w, s, p)?;
    let params = SeminormParams::new(s, p, w.clone())?;
    j_list
        .iter()
        .map(|&j| {
            let m = mollify(f, j)?;
            let d = ScalarField::new(f.mask(), f.values().iter().zip(m.values()).map(|(a, b)| a - b).collect())?;
            let lp = lp_norm_pow(&d, p);
            let semi = weighted_seminorm_pow(&d, &params)?;
            Ok(MollifierRow {
                j,
                lp_pow: lp,
                seminorm_pow: semi,
                norm: (lp + semi).powf(1.0 / p),
            })
        })
        .collect()
}

/// Profiles for the whole-space experiments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Profile {
    /// max(0, 1 - |x|)
    Hat,
    /// indicator of [-1, 1]
    Step,
    /// (1 + |x|)^(-decay)
    Decay { decay: f64 },
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Profile::Hat => (1.0 - x.abs()).max(0.0),
            Profile::Step => {
                if x.abs() <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Profile::Decay { decay } => (1.0 + x.abs()).powf(-decay),
        }
    }
}

/// A cell-aligned whole-space window `[-half, half]` with spacing `h`.
pub fn window(half: f64, h: f64) -> Result<Arc<DomainMask>> {
    Ok(DomainMask::whole_space(Grid::line_covering(-half, half, h)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MollifierConfig {
    pub profile: Profile,
    pub s: f64,
    pub p: f64,
    pub weight: String,
    pub j: Vec<u32>,
    pub h: f64,
    pub half_window: f64,
}

impl Default for MollifierConfig {
    fn default() -> Self {
        MollifierConfig {
            profile: Profile::Hat,
            s: 0.75,
            p: 2.0,
            weight: "pow:eps=0.5".into(),
            j: vec![1, 2, 3, 4, 5],
            h: 2f64.powi(-7),
            half_window: 8.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MollifierReport {
    pub config: MollifierConfig,
    pub rows: Vec<MollifierRow>,
    /// the same norms on the doubled window
    pub doubled: Vec<MollifierRow>,
    pub worst_window_change: f64,
}

impl ExperimentReport for MollifierReport {
    fn name(&self) -> &'static str {
        "mollifier"
    }

    fn gates(&self) -> Vec<Gate> {
        let norms: Vec<String> = self.rows.iter().map(|r| format!("{:.4e}", r.norm)).collect();
        vec![
            Gate::new(
                "monotone_decrease",
                self.rows.windows(2).all(|w| w[1].norm < w[0].norm),
                format!("norms [{}]", norms.join(", ")),
            ),
            Gate::new(
                "window_doubling_below_5pct",
                self.worst_window_change < 0.05,
                format!("worst change {:.4}", self.worst_window_change),
            ),
        ]
    }

    fn table(&self) -> Table {
        let mut t = Table::new(&["j", "lp_pow", "seminorm_pow", "norm", "norm_doubled"]);
        for (a, b) in self.rows.iter().zip(&self.doubled) {
            t.push(vec![a.j.into(), a.lp_pow.into(), a.seminorm_pow.into(), a.norm.into(), b.norm.into()]);
        }
        t
    }
}

pub fn mollifier_experiment(cfg: &MollifierConfig) -> Result<MollifierReport> {
    let w = Weight::parse(&cfg.weight, 1)?;
    let run = |half: f64| -> Result<Vec<MollifierRow>> {
        let mask = window(half, cfg.h)?;
        let f = ScalarField::from_fn(&mask, |x| cfg.profile.eval(x[0]))?;
        mollifier_convergence(&f, cfg.s, cfg.p, &w, &cfg.j)
    };
    let rows = run(cfg.half_window)?;
    let doubled = run(2.0 * cfg.half_window)?;
    let worst = rows
        .iter()
        .zip(&doubled)
        .map(|(a, b)| (a.norm - b.norm).abs() / b.norm)
        .fold(0.0, f64::max);
    Ok(MollifierReport {
        config: cfg.clone(),
        rows,
        doubled,
        worst_window_change: worst,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeakTypeRow {
    pub lambda: f64,
    pub set_size: usize,
    pub capacity: f64,
    /// C(E_λ) λ^p / ‖f‖^p
    pub k: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeakTypeResult {
    pub norm_pow: f64,
    pub rows: Vec<WeakTypeRow>,
    /// max/min of K over the λ with a nonempty superlevel set
    pub k_spread: f64,
}

/// For each λ: `E_λ = {M̂f > λ}`, its global capacity, and the constant K in
/// `C(E_λ) λ^p <= K ‖f‖^p_{W^{s,p,ω}}`.
pub fn weak_type_capacity_check(f: &ScalarField, s: f64, p: f64, w: &Weight, lambdas: &[f64]) -> Result<WeakTypeResult> {
    if lambdas.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::invalid("lambda values must be positive"));
    }
    let mask = f.mask();
    let params = SeminormParams::new(s, p, w.clone())?;
    let norm_pow = lp_norm_pow(f, p) + weighted_seminorm_pow(f, &params)?;
    if !(norm_pow > 0.0) {
        return Err(Error::DegenerateInput("f vanishes".into()));
    }
    let mhat = truncated_maximal(f)?;
    let neg = mhat.map(|v| -v)?;
    let mut rows = Vec::new();
    for &lambda in lambdas {
        let e = sublevel_mask(&neg, -lambda);
        let (capacity, converged) = if e.is_empty() {
            (0.0, true)
        } else {
            let sol = solve_capacity(&CapacityProblem::global(mask, e.clone(), s, p, w.clone())?)?;
            (sol.value, sol.converged)
        };
        rows.push(WeakTypeRow {
            lambda,
            set_size: e.len(),
            capacity,
            k: capacity * lambda.powf(p) / norm_pow,
            converged,
        });
    }
    let ks: Vec<f64> = rows.iter().filter(|r| r.set_size > 0).map(|r| r.k).collect();
    let spread = if ks.is_empty() {
        1.0
    } else {
        ks.iter().cloned().fold(0.0, f64::max) / ks.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    Ok(WeakTypeResult {
        norm_pow,
        rows,
        k_spread: spread,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeakTypeConfig {
    pub profile: Profile,
    pub s: f64,
    pub p: f64,
    pub weight: String,
    pub lambda: Vec<f64>,
    pub h: f64,
    pub half_window: f64,
}

impl Default for WeakTypeConfig {
    fn default() -> Self {
        WeakTypeConfig {
            profile: Profile::Decay { decay: 1.0 },
            s: 0.5,
            p: 1.2,
            weight: "pow:eps=0.25".into(),
            lambda: vec![0.5, 0.25, 0.125, 0.0625, 0.03125],
            h: 0.25,
            half_window: 64.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeakTypeReport {
    pub config: WeakTypeConfig,
    pub result: WeakTypeResult,
}

impl ExperimentReport for WeakTypeReport {
    fn name(&self) -> &'static str {
        "weak-type"
    }

    fn gates(&self) -> Vec<Gate> {
        let ks: Vec<String> = self.result.rows.iter().map(|r| format!("{:.4}", r.k)).collect();
        vec![
            Gate::new(
                "k_spread_below_10",
                self.result.k_spread < 10.0,
                format!("K [{}], max/min {:.4}", ks.join(", "), self.result.k_spread),
            ),
            Gate::new(
                "solver_converged",
                self.result.rows.iter().all(|r| r.converged),
                String::new(),
            ),
        ]
    }

    fn table(&self) -> Table {
        let mut t = Table::new(&["lambda", "set_size", "capacity", "k"]);
        for r in &self.result.rows {
            t.push(vec![r.lambda.into(), r.set_size.into(), r.capacity.into(), r.k.into()]);
        }
        t
    }
}

pub fn weak_type_experiment(cfg: &WeakTypeConfig) -> Result<WeakTypeReport> {
    let w = Weight::parse(&cfg.weight, 1)?;
    let mask = window(cfg.half_window, cfg.h)?;
    let f = ScalarField::from_fn(&mask, |x| cfg.profile.eval(x[0]))?;
    Ok(WeakTypeReport {
        config: cfg.clone(),
        result: weak_type_capacity_check(&f, cfg.s, cfg.p, &w, &cfg.lambda)?,
    })
}
