//! Capacity experiments on Cantor sets: the Ahlfors scaling law and the
//! comparison between R-modified and plain relative capacities.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::capacity::{solve_capacity, CapacityProblem};
use crate::error::{Error, Result};
use crate::geometry::{build_cantor, porosity_check};
use crate::grid::{boundary_distance, distance_to_set, sublevel_mask, DomainMask, NodeSet, RadiusField, ScalarField};
use crate::maxop::local_maximal_fast;
use crate::quad::ls_slope;
use crate::report::{Cell, ExperimentReport, Gate, Table};
use crate::weights::Weight;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingRow {
    pub t: f64,
    pub capacity: f64,
    pub log_t: f64,
    pub log_cap: f64,
    pub free_nodes: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingFit {
    pub rows: Vec<ScalingRow>,
    pub slope: f64,
    pub expected_slope: f64,
}

impl ScalingFit {
    pub fn within(&self, tol: f64) -> bool {
        (self.slope - self.expected_slope).abs() <= tol
    }
}

/// E_t = {x ∈ G : dist(x, E) < t}.
pub fn neighbourhood(e: &NodeSet, mask: &Arc<DomainMask>, t: f64) -> Result<NodeSet> {
    Ok(sublevel_mask(&distance_to_set(mask, e)?, t))
}

/// Least-squares slope of log cap_{s,p}(E, E_t, G) against log t, compared
/// with n - λ - sp.
pub fn ahlfors_scaling_fit(e: &NodeSet, domain: &Arc<DomainMask>, lambda: f64, s: f64, p: f64, t_list: &[f64]) -> Result<ScalingFit> {
    let n = domain.grid().dim() as f64;
    if !(n - s * p < lambda && lambda < n) {
        return Err(Error::InadmissibleParameters(format!("need n - sp < lambda < n, got lambda = {lambda}")));
    }
    let (tmin, tmax) = t_list.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &t| (a.min(t), b.max(t)));
    if t_list.len() < 4 || tmax / tmin < 4.0 {
        return Err(Error::invalid("the fit needs at least four t spanning two dyadic scales"));
    }
    let mut rows = Vec::new();
    for &t in t_list {
        let et = neighbourhood(e, domain, t)?;
        let prob = CapacityProblem::classical_relative(domain, e.clone(), et.clone(), s, p)?;
        let sol = solve_capacity(&prob)?;
        rows.push(ScalingRow {
            t,
            capacity: sol.value,
            log_t: t.ln(),
            log_cap: sol.value.ln(),
            free_nodes: et.len() - e.len(),
            converged: sol.converged,
        });
    }
    let x: Vec<f64> = rows.iter().map(|r| r.log_t).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.log_cap).collect();
    Ok(ScalingFit {
        slope: ls_slope(&x, &y),
        expected_slope: n - lambda - s * p,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AhlforsConfig {
    pub level: u32,
    /// grid spacing is 3^-resolution
    pub resolution: u32,
    pub s: f64,
    pub p: f64,
    /// t = 3^-k
    pub t_exponents: Vec<u32>,
    /// G, centred on the Cantor interval [0, 1]
    pub domain: (f64, f64),
    pub tolerance: f64,
    pub doubling_tolerance: f64,
}

impl Default for AhlforsConfig {
    fn default() -> Self {
        AhlforsConfig {
            level: 6,
            resolution: 7,
            s: 0.5,
            p: 2.0,
            t_exponents: vec![2, 3, 4, 5],
            domain: (-2.0, 3.0),
            tolerance: 0.15,
            doubling_tolerance: 0.02,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AhlforsReport {
    pub config: AhlforsConfig,
    pub lambda: f64,
    pub fit: ScalingFit,
    pub doubled: ScalingFit,
}

impl ExperimentReport for AhlforsReport {
    fn name(&self) -> &'static str {
        "ahlfors"
    }

    fn gates(&self) -> Vec<Gate> {
        let shift = (self.fit.slope - self.doubled.slope).abs();
        vec![
            Gate::new(
                "slope_matches_exponent",
                self.fit.within(self.config.tolerance),
                format!(
                    "slope {:.4}, expected {:.4} ± {}",
                    self.fit.slope, self.fit.expected_slope, self.config.tolerance
                ),
            ),
            Gate::new(
                "window_doubling",
                shift <= self.config.doubling_tolerance,
                format!("slope change {shift:.4}"),
            ),
            Gate::new(
                "solver_converged",
                self.fit.rows.iter().chain(&self.doubled.rows).all(|r| r.converged),
                String::new(),
            ),
        ]
    }

    fn table(&self) -> Table {
        let mut t = Table::scaling();
        for r in &self.fit.rows {
            t.push(vec![r.t.into(), r.capacity.into(), r.log_t.into(), r.log_cap.into()]);
        }
        t
    }
}

/// A lattice-aligned open interval mask with spacing 3^-resolution.
fn ternary_domain(lo: f64, hi: f64, resolution: u32) -> Result<Arc<DomainMask>> {
    DomainMask::open_interval(lo, hi, 3f64.powi(-(resolution as i32)))
}

fn doubled(lo: f64, hi: f64) -> (f64, f64) {
    let (c, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    (c - 2.0 * r, c + 2.0 * r)
}

pub fn ahlfors_experiment(cfg: &AhlforsConfig) -> Result<AhlforsReport> {
    let lambda = 2f64.ln() / 3f64.ln();
    let t_list: Vec<f64> = cfg.t_exponents.iter().map(|&k| 3f64.powi(-(k as i32))).collect();
    let run = |(lo, hi): (f64, f64)| -> Result<ScalingFit> {
        let mask = ternary_domain(lo, hi, cfg.resolution)?;
        let e = build_cantor(cfg.level, mask.grid(), 0.0, 1.0)?;
        ahlfors_scaling_fit(&e, &mask, lambda, cfg.s, cfg.p, &t_list)
    };
    Ok(AhlforsReport {
        config: cfg.clone(),
        lambda,
        fit: run(cfg.domain)?,
        doubled: run(doubled(cfg.domain.0, cfg.domain.1))?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub t: f64,
    /// cap_{s,p,ω,R}(E, E_t ∩ E_{4t/κ,R}, G)
    pub lhs: f64,
    /// cap_{s,p,ω}(E, E_t, G)
    pub rhs: f64,
    pub ratio: f64,
    /// min of M_R(1 - min(1, φ)) over nodes with R >= 4t/κ, φ the minimizer of the right side
    pub lower_bound_min: f64,
    pub lower_bound_nodes: usize,
    pub lower_bound_failures: usize,
    /// E ⊂ E_t ∩ E_{4t/κ,R}
    pub inclusion_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonResult {
    pub kappa: f64,
    pub alpha: f64,
    /// 4^-n κ^n
    pub lower_bound: f64,
    pub rows: Vec<ComparisonRow>,
    pub ratio_spread: f64,
}

/// Both sides of the capacity comparison for each t, with
/// R = min(dist(·, E)^α, dist(·, ∂G)).
#[allow(clippy::too_many_arguments)]
pub fn capacity_comparison_sweep(
    e: &NodeSet,
    domain: &Arc<DomainMask>,
    kappa: f64,
    alpha: f64,
    s: f64,
    p: f64,
    w: &Weight,
    t_list: &[f64],
) -> Result<ComparisonResult> {
    if !(kappa > 0.0 && kappa <= 1.0 && alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid("need kappa in (0, 1] and alpha in (0, 1]"));
    }
    if e.is_empty() {
        return Err(Error::invalid("E is empty"));
    }
    let g = domain.grid();
    let n = g.dim() as i32;
    let coords: Vec<_> = e.iter().map(|i| g.coord(i)).collect();
    let diam = coords
        .iter()
        .flat_map(|a| coords.iter().map(move |b| crate::grid::dist2(*a, *b).sqrt()))
        .fold(0.0, f64::max);
    let bd = boundary_distance(domain);
    let gap = e.iter().map(|i| bd.get(i)).fold(f64::INFINITY, f64::min);
    for &t in t_list {
        if !(t > 0.0 && t < kappa * diam / 4.0) {
            return Err(Error::InadmissibleParameters(format!(
                "t = {t} must lie in (0, kappa diam(E) / 4) = (0, {})",
                kappa * diam / 4.0
            )));
        }
        if t >= gap {
            return Err(Error::InadmissibleParameters(format!("closure of E_t leaves G at t = {t}")));
        }
    }
    let dist = distance_to_set(domain, e)?;
    let r = RadiusField::new(
        domain,
        (0..g.len())
            .map(|i| if domain.is_inside(i) { dist.get(i).powf(alpha).min(bd.get(i)) } else { 0.0 })
            .collect(),
    )?;
    let lower_bound = 4f64.powi(-n) * kappa.powi(n);
    let mut rows = Vec::new();
    for &t in t_list {
        let et = sublevel_mask(&dist, t);
        let etr = sublevel_mask(r.as_field(), 4.0 * t / kappa);
        let h_set = et.intersection(&etr);
        let lhs = solve_capacity(&CapacityProblem::relative(domain, e.clone(), h_set.clone(), s, p, w.clone())?.with_radius(r.clone())?)?;
        let rhs = solve_capacity(&CapacityProblem::relative(domain, e.clone(), et, s, p, w.clone())?)?;
        let f = ScalarField::new(domain, rhs.minimizer.values().iter().map(|&v| 1.0 - v.min(1.0)).collect())?;
        let mf = local_maximal_fast(&f, &r)?.values;
        let mut min = f64::INFINITY;
        let mut nodes = 0;
        let mut failures = 0;
        for &i in domain.nodes() {
            if r.get(i) >= 4.0 * t / kappa {
                nodes += 1;
                min = min.min(mf.get(i));
                if mf.get(i) < lower_bound {
                    failures += 1;
                }
            }
        }
        rows.push(ComparisonRow {
            t,
            lhs: lhs.value,
            rhs: rhs.value,
            ratio: lhs.value / rhs.value,
            lower_bound_min: min,
            lower_bound_nodes: nodes,
            lower_bound_failures: failures,
            inclusion_holds: e.is_subset(&h_set),
        });
    }
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let spread = ratios.iter().cloned().fold(0.0, f64::max) / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(ComparisonResult {
        kappa,
        alpha,
        lower_bound,
        rows,
        ratio_spread: spread,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComparisonConfig {
    pub level: u32,
    pub resolution: u32,
    pub alpha: f64,
    pub s: f64,
    pub p: f64,
    pub weight: String,
    /// t = 2^-k
    pub t_exponents: Vec<u32>,
    pub domain: (f64, f64),
    /// porosity scales 3^-k
    pub porosity_exponents: Vec<u32>,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        ComparisonConfig {
            level: 6,
            resolution: 7,
            alpha: 0.5,
            s: 0.75,
            p: 2.0,
            weight: "pow:eps=0.5".into(),
            t_exponents: vec![5, 6, 7],
            domain: (-2.0, 3.0),
            porosity_exponents: vec![1, 2, 3, 4],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub config: ComparisonConfig,
    pub result: ComparisonResult,
}

impl ExperimentReport for ComparisonReport {
    fn name(&self) -> &'static str {
        "capacity-comparison"
    }

    fn gates(&self) -> Vec<Gate> {
        let r = &self.result;
        let failures: usize = r.rows.iter().map(|x| x.lower_bound_failures).sum();
        let min = r.rows.iter().map(|x| x.lower_bound_min).fold(f64::INFINITY, f64::min);
        vec![
            Gate::new(
                "ratio_spread_below_10",
                r.ratio_spread < 10.0,
                format!("max/min {:.4}", r.ratio_spread),
            ),
            Gate::new(
                "maximal_lower_bound",
                failures == 0,
                format!("{failures} failing nodes, min {min:.6} vs 4^-n kappa^n = {:.6}", r.lower_bound),
            ),
            Gate::new("inclusion", r.rows.iter().all(|x| x.inclusion_holds), String::new()),
        ]
    }

    fn table(&self) -> Table {
        let mut t = Table::new(&["t", "lhs", "rhs", "ratio", "lower_bound_min"]);
        for r in &self.result.rows {
            t.push(vec![
                Cell::from(r.t),
                r.lhs.into(),
                r.rhs.into(),
                r.ratio.into(),
                r.lower_bound_min.into(),
            ]);
        }
        t
    }
}

pub fn comparison_experiment(cfg: &ComparisonConfig) -> Result<ComparisonReport> {
    let mask = ternary_domain(cfg.domain.0, cfg.domain.1, cfg.resolution)?;
    let e = build_cantor(cfg.level, mask.grid(), 0.0, 1.0)?;
    let scales: Vec<f64> = cfg.porosity_exponents.iter().map(|&k| 3f64.powi(-(k as i32))).collect();
    let kappa = porosity_check(&e, mask.grid(), 0.0, &scales)?.kappa_estimate;
    if !(kappa > 0.0) {
        return Err(Error::DegenerateInput("the set is not porous at the tested scales".into()));
    }
    let w = Weight::parse(&cfg.weight, 1)?;
    let t_list: Vec<f64> = cfg.t_exponents.iter().map(|&k| 2f64.powi(-(k as i32))).collect();
    Ok(ComparisonReport {
        config: cfg.clone(),
        result: capacity_comparison_sweep(&e, &mask, kappa, cfg.alpha, cfg.s, cfg.p, &w, &t_list)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_radius_collapses_to_the_plain_capacity() {
        let mask = DomainMask::open_interval(-1.0, 2.0, 1.0 / 81.0).unwrap();
        let e = build_cantor(2, mask.grid(), 0.0, 1.0).unwrap();
        let w = Weight::power_origin(1, 0.5).unwrap();
        let t = 0.03;
        let et = neighbourhood(&e, &mask, t).unwrap();
        let plain = solve_capacity(&CapacityProblem::relative(&mask, e.clone(), et.clone(), 0.75, 2.0, w.clone()).unwrap()).unwrap();
        let zero = solve_capacity(
            &CapacityProblem::relative(&mask, e.clone(), et, 0.75, 2.0, w.clone())
                .unwrap()
                .with_radius(RadiusField::zero(&mask))
                .unwrap(),
        )
        .unwrap();
        assert!((plain.value - zero.value).abs() <= 1e-12 * plain.value);
        let res = capacity_comparison_sweep(&e, &mask, 0.15, 0.5, 0.75, 2.0, &w, &[t]).unwrap();
        assert!(res.rows[0].inclusion_holds);
        assert!(res.rows[0].ratio <= 1.0 + 1e-9);
    }

    #[test]
    fn inadmissible_t_is_refused() {
        let mask = DomainMask::open_interval(-1.0, 2.0, 1.0 / 27.0).unwrap();
        let e = build_cantor(2, mask.grid(), 0.0, 1.0).unwrap();
        let w = Weight::power_origin(1, 0.5).unwrap();
        let r = capacity_comparison_sweep(&e, &mask, 0.15, 0.5, 0.75, 2.0, &w, &[0.2]);
        assert!(matches!(r, Err(Error::InadmissibleParameters(_))));
    }
}
