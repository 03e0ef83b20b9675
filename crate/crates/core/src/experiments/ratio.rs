//! Boundedness ratios for M_R: the weighted form, the split form of the main
//! theorem, and the Lipschitz and Hölder corollaries.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::fields::{band_limited_family, BandLimited};
use crate::error::{Error, Result};
use crate::grid::{DomainMask, RadiusField, ScalarField};
use crate::maxop::local_maximal_fast;
use crate::report::{Cell, ExperimentReport, Gate, Table};
use crate::seminorm::{classical_seminorm_pow, kernel_energy, KernelSpec};
use crate::weights::Weight;

/// Below this the right-hand side counts as zero.
pub const RHS_FLOOR: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ratio {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

fn ratio_of(lhs: f64, rhs: f64) -> Result<Ratio> {
    if !(rhs > RHS_FLOOR) {
        return Err(Error::DegenerateInput(format!("right-hand side {rhs:e} vanishes; f is constant")));
    }
    Ok(Ratio { lhs, rhs, ratio: lhs / rhs })
}

/// `|M_R f|^p` in the R-modified weighted seminorm over `|f|^p` in the plain
/// one.
pub fn boundedness_ratio(f: &ScalarField, r: &RadiusField, s: f64, p: f64, w: &Weight) -> Result<Ratio> {
    let spec = KernelSpec::weighted(s, p, w);
    let rhs = kernel_energy(f, &spec, p, None)?;
    if !(rhs > RHS_FLOOR) {
        return ratio_of(0.0, rhs);
    }
    let m = local_maximal_fast(f, r)?.values;
    ratio_of(kernel_energy(&m, &spec, p, Some(r))?, rhs)
}

/// The main theorem with ω = |·|^(ε-n): left kernel
/// `|x-y|^(ε-n) (|x-y| + |R(x)-R(y)|)^(-ε-sp)`, right kernel `|x-y|^(-n-sp)`.
pub fn theorem11_ratio(f: &ScalarField, r: &RadiusField, s: f64, p: f64, eps: f64) -> Result<Ratio> {
    let rhs = classical_seminorm_pow(f, s, p)?;
    if !(rhs > RHS_FLOOR) {
        return ratio_of(0.0, rhs);
    }
    let m = local_maximal_fast(f, r)?.values;
    theorem11_from_parts(&m, r, s, p, eps, rhs)
}

fn theorem11_from_parts(m: &ScalarField, r: &RadiusField, s: f64, p: f64, eps: f64, rhs: f64) -> Result<Ratio> {
    let n = m.grid().dim();
    let spec = KernelSpec::split(n, s, p, eps);
    ratio_of(kernel_energy(m, &spec, p, Some(r))?, rhs)
}

/// How a sweep builds R on the unit interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RadiusMode {
    Zero,
    Boundary,
    Holder { alpha: f64, l: f64 },
    Lipschitz { l: f64 },
}

impl RadiusMode {
    pub fn build(&self, mask: &Arc<DomainMask>) -> Result<RadiusField> {
        match self {
            RadiusMode::Zero => Ok(RadiusField::zero(mask)),
            RadiusMode::Boundary => RadiusField::boundary(mask),
            RadiusMode::Holder { alpha, l } => RadiusField::holder(mask, [0.5, 0.0], *alpha, *l),
            RadiusMode::Lipschitz { l } => RadiusField::lipschitz(mask, &LIPSCHITZ_ANCHORS, *l),
        }
    }

    pub fn label(&self) -> String {
        match self {
            RadiusMode::Zero => "zero".into(),
            RadiusMode::Boundary => "boundary".into(),
            RadiusMode::Holder { alpha, l } => format!("holder:{alpha},{l}"),
            RadiusMode::Lipschitz { l } => format!("lipschitz:{l}"),
        }
    }

    fn lipschitz_constant(&self) -> f64 {
        match self {
            RadiusMode::Lipschitz { l } => *l,
            _ => f64::NAN,
        }
    }
}

pub const LIPSCHITZ_ANCHORS: [[f64; 2]; 3] = [[0.25, 0.0], [0.5, 0.0], [0.75, 0.0]];

/// A field sampled cell-centred on `[0, 1]` with `nodes` nodes.
pub fn sample_unit(field: &BandLimited, nodes: usize) -> Result<ScalarField> {
    let mask = DomainMask::unit_interval(nodes)?;
    ScalarField::from_fn(&mask, |x| field.eval(x[0]))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MainSweepConfig {
    pub fields: usize,
    pub nodes: usize,
    pub s: Vec<f64>,
    pub p: Vec<f64>,
    pub eps: Vec<f64>,
    pub radius: Vec<RadiusMode>,
    pub seed: u64,
}

impl Default for MainSweepConfig {
    fn default() -> Self {
        MainSweepConfig {
            fields: 100,
            nodes: 256,
            s: vec![0.3, 0.7],
            p: vec![1.5, 2.0, 3.0],
            eps: vec![0.3, 0.7],
            radius: vec![
                RadiusMode::Zero,
                RadiusMode::Boundary,
                RadiusMode::Holder { alpha: 0.5, l: 1.0 },
            ],
            seed: 42,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioRow {
    pub case_id: String,
    pub field: usize,
    pub h: f64,
    pub s: f64,
    pub p: f64,
    pub eps: f64,
    /// Lipschitz constant of R, NaN for other modes.
    #[serde(rename = "L")]
    pub l: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseSummary {
    pub case_id: String,
    pub max_ratio_coarse: f64,
    pub max_ratio_fine: f64,
    /// max(fine/coarse, coarse/fine)
    pub drift: f64,
    pub all_finite: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MainSweepReport {
    pub config: MainSweepConfig,
    pub cases: Vec<CaseSummary>,
    pub rows: Vec<RatioRow>,
}

fn ratio_table(rows: &[RatioRow]) -> Table {
    let mut t = Table::ratio();
    for r in rows {
        t.push(vec![
            Cell::from(format!("{}#{}", r.case_id, r.field)),
            r.h.into(),
            r.s.into(),
            r.p.into(),
            r.eps.into(),
            r.l.into(),
            r.lhs.into(),
            r.rhs.into(),
            r.ratio.into(),
        ]);
    }
    t
}

fn drift(a: f64, b: f64) -> f64 {
    (a / b).max(b / a)
}

impl ExperimentReport for MainSweepReport {
    fn name(&self) -> &'static str {
        "main-sweep"
    }

    fn gates(&self) -> Vec<Gate> {
        let finite = self.cases.iter().all(|c| c.all_finite);
        let worst = self
            .cases
            .iter()
            .max_by(|a, b| a.drift.total_cmp(&b.drift))
            .map(|c| (c.case_id.clone(), c.drift))
            .unwrap_or_default();
        vec![
            Gate::new("all_ratios_finite", finite, format!("{} cases", self.cases.len())),
            Gate::new(
                "refinement_drift_below_2",
                self.cases.iter().all(|c| c.drift < 2.0),
                format!("worst drift {:.4} in {}", worst.1, worst.0),
            ),
        ]
    }

    fn table(&self) -> Table {
        ratio_table(&self.rows)
    }
}

fn case_id(s: f64, p: f64, eps: f64, mode: &RadiusMode) -> String {
    format!("s={s},p={p},eps={eps},R={}", mode.label())
}

/// Theorem 1.1 over random fields at `nodes` and `2 * nodes`, reporting the
/// maximal ratio per case at both resolutions.
pub fn main_sweep(cfg: &MainSweepConfig) -> Result<MainSweepReport> {
    let fields = band_limited_family(cfg.fields, cfg.seed);
    let mut rows = Vec::new();
    let mut max: HashMap<(String, usize), f64> = HashMap::new();
    let mut finite: HashMap<String, bool> = HashMap::new();
    for nodes in [cfg.nodes, 2 * cfg.nodes] {
        let mask = DomainMask::unit_interval(nodes)?;
        let radii = cfg.radius.iter().map(|m| m.build(&mask)).collect::<Result<Vec<_>>>()?;
        for (fi, field) in fields.iter().enumerate() {
            let f = ScalarField::from_fn(&mask, |x| field.eval(x[0]))?;
            let maxed = radii
                .iter()
                .map(|r| local_maximal_fast(&f, r).map(|m| m.values))
                .collect::<Result<Vec<_>>>()?;
            for &s in &cfg.s {
                for &p in &cfg.p {
                    let rhs = classical_seminorm_pow(&f, s, p)?;
                    for &eps in &cfg.eps {
                        for (mi, mode) in cfg.radius.iter().enumerate() {
                            let r = theorem11_from_parts(&maxed[mi], &radii[mi], s, p, eps, rhs)?;
                            let id = case_id(s, p, eps, mode);
                            let e = max.entry((id.clone(), nodes)).or_insert(0.0);
                            *e = e.max(r.ratio);
                            *finite.entry(id.clone()).or_insert(true) &= r.ratio.is_finite();
                            rows.push(RatioRow {
                                case_id: id,
                                field: fi,
                                h: 1.0 / nodes as f64,
                                s,
                                p,
                                eps,
                                l: mode.lipschitz_constant(),
                                lhs: r.lhs,
                                rhs: r.rhs,
                                ratio: r.ratio,
                            });
                        }
                    }
                }
            }
        }
    }
    let mut cases = Vec::new();
    for &s in &cfg.s {
        for &p in &cfg.p {
            for &eps in &cfg.eps {
                for mode in &cfg.radius {
                    let id = case_id(s, p, eps, mode);
                    let c = max[&(id.clone(), cfg.nodes)];
                    let f = max[&(id.clone(), 2 * cfg.nodes)];
                    cases.push(CaseSummary {
                        all_finite: finite[&id],
                        case_id: id,
                        max_ratio_coarse: c,
                        max_ratio_fine: f,
                        drift: drift(c, f),
                    });
                }
            }
        }
    }
    Ok(MainSweepReport {
        config: cfg.clone(),
        cases,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LipschitzSweepConfig {
    pub fields: usize,
    pub nodes: usize,
    pub s: Vec<f64>,
    pub p: Vec<f64>,
    pub eps: Vec<f64>,
    pub l: Vec<f64>,
    /// Fields that must satisfy every growth bound.
    pub required: usize,
    pub seed: u64,
}

impl Default for LipschitzSweepConfig {
    fn default() -> Self {
        LipschitzSweepConfig {
            fields: 100,
            nodes: 256,
            s: vec![0.3, 0.7],
            p: vec![1.5, 2.0, 3.0],
            eps: vec![0.3, 0.7],
            l: vec![0.0, 1.0, 4.0],
            required: 95,
            seed: 42,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LipschitzSweepReport {
    pub config: LipschitzSweepConfig,
    /// Per field: every case obeys ratio_L <= (1+L)^(ε+sp) ratio_0.
    pub field_passes: Vec<bool>,
    pub fields_passing: usize,
    /// Largest ratio_L / ((1+L)^(ε+sp) ratio_0) seen.
    pub worst_normalized_growth: f64,
    pub rows: Vec<RatioRow>,
}

impl ExperimentReport for LipschitzSweepReport {
    fn name(&self) -> &'static str {
        "lipschitz"
    }

    fn gates(&self) -> Vec<Gate> {
        vec![Gate::new(
            "growth_within_lipschitz_bound",
            self.fields_passing >= self.config.required,
            format!(
                "{}/{} fields, worst normalized growth {:.4}",
                self.fields_passing,
                self.field_passes.len(),
                self.worst_normalized_growth
            ),
        )]
    }

    fn table(&self) -> Table {
        ratio_table(&self.rows)
    }
}

/// The L-sweep of the Lipschitz corollary. Growth is measured against the
/// first L in the list.
pub fn lipschitz_sweep(cfg: &LipschitzSweepConfig) -> Result<LipschitzSweepReport> {
    if cfg.l.is_empty() {
        return Err(Error::invalid("the L-sweep needs at least one value"));
    }
    let fields = band_limited_family(cfg.fields, cfg.seed);
    let mask = DomainMask::unit_interval(cfg.nodes)?;
    let modes: Vec<RadiusMode> = cfg.l.iter().map(|&l| RadiusMode::Lipschitz { l }).collect();
    let radii = modes.iter().map(|m| m.build(&mask)).collect::<Result<Vec<_>>>()?;
    let l0 = cfg.l[0];
    let mut rows = Vec::new();
    let mut field_passes = Vec::new();
    let mut worst = 0.0f64;
    for (fi, field) in fields.iter().enumerate() {
        let f = ScalarField::from_fn(&mask, |x| field.eval(x[0]))?;
        let maxed = radii
            .iter()
            .map(|r| local_maximal_fast(&f, r).map(|m| m.values))
            .collect::<Result<Vec<_>>>()?;
        let mut ok = true;
        for &s in &cfg.s {
            for &p in &cfg.p {
                let rhs = classical_seminorm_pow(&f, s, p)?;
                for &eps in &cfg.eps {
                    let mut base = f64::NAN;
                    for (li, &l) in cfg.l.iter().enumerate() {
                        let r = theorem11_from_parts(&maxed[li], &radii[li], s, p, eps, rhs)?;
                        if li == 0 {
                            base = r.ratio;
                        } else {
                            let bound = ((1.0 + l) / (1.0 + l0)).powf(eps + s * p);
                            let g = r.ratio / (bound * base);
                            worst = worst.max(g);
                            ok &= g <= 1.0;
                        }
                        rows.push(RatioRow {
                            case_id: case_id(s, p, eps, &modes[li]),
                            field: fi,
                            h: 1.0 / cfg.nodes as f64,
                            s,
                            p,
                            eps,
                            l,
                            lhs: r.lhs,
                            rhs: r.rhs,
                            ratio: r.ratio,
                        });
                    }
                }
            }
        }
        field_passes.push(ok);
    }
    Ok(LipschitzSweepReport {
        config: cfg.clone(),
        fields_passing: field_passes.iter().filter(|&&b| b).count(),
        field_passes,
        worst_normalized_growth: worst,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HolderSweepConfig {
    pub fields: usize,
    pub nodes: usize,
    pub alpha: f64,
    pub l: f64,
    pub s: f64,
    pub sigma: f64,
    pub p: f64,
    pub seed: u64,
}

impl Default for HolderSweepConfig {
    fn default() -> Self {
        HolderSweepConfig {
            fields: 50,
            nodes: 256,
            alpha: 0.5,
            l: 1.0,
            s: 0.8,
            sigma: 0.3,
            p: 2.0,
            seed: 42,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolderSweepReport {
    pub config: HolderSweepConfig,
    pub max_ratio_coarse: f64,
    pub max_ratio_fine: f64,
    pub drift: f64,
    pub rows: Vec<RatioRow>,
}

impl ExperimentReport for HolderSweepReport {
    fn name(&self) -> &'static str {
        "holder"
    }

    fn gates(&self) -> Vec<Gate> {
        vec![
            Gate::new(
                "ratios_finite",
                self.rows.iter().all(|r| r.ratio.is_finite()),
                format!("{} rows", self.rows.len()),
            ),
            Gate::new("refinement_drift_below_2", self.drift < 2.0, format!("drift {:.4}", self.drift)),
        ]
    }

    fn table(&self) -> Table {
        ratio_table(&self.rows)
    }
}

/// Hölder corollary: `|M_R f|^p_{σ,p} / |f|^p_{s,p}` for an α-Hölder R and
/// σ < αs.
pub fn holder_sweep(cfg: &HolderSweepConfig) -> Result<HolderSweepReport> {
    if !(cfg.sigma > 0.0 && cfg.sigma < cfg.alpha * cfg.s) {
        return Err(Error::InadmissibleParameters(format!(
            "need 0 < sigma < alpha s = {}, got sigma = {}",
            cfg.alpha * cfg.s,
            cfg.sigma
        )));
    }
    let fields = band_limited_family(cfg.fields, cfg.seed);
    let mode = RadiusMode::Holder {
        alpha: cfg.alpha,
        l: cfg.l,
    };
    let mut rows = Vec::new();
    let mut maxes = Vec::new();
    for nodes in [cfg.nodes, 2 * cfg.nodes] {
        let mask = DomainMask::unit_interval(nodes)?;
        let r = mode.build(&mask)?;
        let mut best = 0.0f64;
        for (fi, field) in fields.iter().enumerate() {
            let f = ScalarField::from_fn(&mask, |x| field.eval(x[0]))?;
            let m = local_maximal_fast(&f, &r)?.values;
            let rat = ratio_of(classical_seminorm_pow(&m, cfg.sigma, cfg.p)?, classical_seminorm_pow(&f, cfg.s, cfg.p)?)?;
            best = best.max(rat.ratio);
            rows.push(RatioRow {
                case_id: format!("sigma={},s={},p={},R={}", cfg.sigma, cfg.s, cfg.p, mode.label()),
                field: fi,
                h: 1.0 / nodes as f64,
                s: cfg.s,
                p: cfg.p,
                eps: f64::NAN,
                l: f64::NAN,
                lhs: rat.lhs,
                rhs: rat.rhs,
                ratio: rat.ratio,
            });
        }
        maxes.push(best);
    }
    Ok(HolderSweepReport {
        config: cfg.clone(),
        max_ratio_coarse: maxes[0],
        max_ratio_fine: maxes[1],
        drift: drift(maxes[0], maxes[1]),
        rows,
    })
}
