//! The sharpness counterexample: on the dyadic gap set, M_R is unbounded from
//! W^{s,p} to W^{σ,p} once σ > αs.

use serde::{Deserialize, Serialize};

use super::fields::Bump;
use crate::error::{Error, Result};
use crate::geometry::{build_gap_set, DyadicGapSet};
use crate::grid::{DomainMask, ScalarField};
use crate::maxop::local_maximal_fast;
use crate::quad::ls_slope;
use crate::report::{ExperimentReport, Gate, Table};
use crate::seminorm::classical_seminorm_pow;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CounterexampleConfig {
    #[serde(rename = "M")]
    pub m: u32,
    pub s: f64,
    pub p: f64,
    pub sigma: f64,
    #[serde(rename = "N")]
    pub n_list: Vec<u32>,
    /// log2 of 1/h
    pub resolution: u32,
    /// support of ψ inside (0, 1)
    pub bump_support: (f64, f64),
}

impl Default for CounterexampleConfig {
    fn default() -> Self {
        CounterexampleConfig {
            m: 2,
            s: 0.9,
            p: 3.0,
            sigma: 0.6,
            n_list: vec![1, 2, 3],
            resolution: 10,
            bump_support: (0.02, 0.98),
        }
    }
}

/// What the last gate asserts, fixed by the sign of σ - αs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// σ > αs: ratios must grow
    Blowup,
    /// σ < αs: ratios stay within a factor 4
    Inversion,
    /// σ = αs: reported only
    Probe,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelResult {
    pub n: u32,
    /// |ψ_N|^p in W^{s,p}(G)
    pub psi_seminorm_pow: f64,
    /// |ψ_N|^p / (2^{N(sp-1)} |ψ|^p) - 1
    pub psi_scaling_error: f64,
    /// |M_R ψ_N|^p in W^{σ,p}(G)
    pub max_seminorm_pow: f64,
    /// |M_R ψ_N|_{σ,p} / |ψ_N|_{s,p}
    pub ratio: f64,
    /// min of M_R ψ_N over nodes of the half intervals of level N
    pub min_on_half_intervals: f64,
    pub half_interval_nodes: usize,
    pub half_interval_failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub config: CounterexampleConfig,
    pub regime: Regime,
    pub h: f64,
    pub radius_clipped: bool,
    /// |ψ|^p in W^{s,p}(G), the N = 0 reference
    pub psi_reference_pow: f64,
    pub levels: Vec<LevelResult>,
    /// slope of log2 |ψ_N|^p against N
    pub psi_exponent: f64,
    pub expected_psi_exponent: f64,
    /// log2(ratio_{N+1} / ratio_N)
    pub growth: Vec<f64>,
    pub growth_threshold: f64,
}

impl ExperimentReport for CounterexampleReport {
    fn name(&self) -> &'static str {
        "counterexample"
    }

    fn gates(&self) -> Vec<Gate> {
        let failures: usize = self.levels.iter().map(|l| l.half_interval_failures).sum();
        let worst_min = self.levels.iter().map(|l| l.min_on_half_intervals).fold(f64::INFINITY, f64::min);
        let worst_scale = self.levels.iter().map(|l| l.psi_scaling_error.abs()).fold(0.0, f64::max);
        let mut g = vec![
            Gate::new(
                "maximal_at_least_one_on_half_intervals",
                failures == 0,
                format!("{failures} failing nodes, min {worst_min:.6}"),
            ),
            Gate::new(
                "psi_growth_exponent",
                (self.psi_exponent - self.expected_psi_exponent).abs() <= 0.1,
                format!("slope {:.4}, expected {:.4} ± 0.1", self.psi_exponent, self.expected_psi_exponent),
            ),
            Gate::new(
                "psi_scaling_within_10pct",
                worst_scale <= 0.1,
                format!("worst relative deviation {worst_scale:.4}"),
            ),
        ];
        let growth = self.growth.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(", ");
        match self.regime {
            Regime::Blowup => g.push(Gate::new(
                "ratio_blowup",
                self.growth.iter().all(|&v| v >= self.growth_threshold),
                format!("log2 growth [{growth}] vs threshold {:.4}", (self.growth_threshold * 1e4).round() / 1e4 + 0.0),
            )),
            Regime::Inversion => {
                let r: Vec<f64> = self.levels.iter().map(|l| l.ratio).collect();
                let spread = r.iter().cloned().fold(0.0, f64::max) / r.iter().cloned().fold(f64::INFINITY, f64::min);
                g.push(Gate::new(
                    "ratios_within_factor_4",
                    spread < 4.0,
                    format!("max/min {spread:.4}, log2 growth [{growth}]"),
                ))
            }
            Regime::Probe => {}
        }
        g
    }

    fn table(&self) -> Table {
        let mut t = Table::new(&[
            "N",
            "psi_seminorm_pow",
            "max_seminorm_pow",
            "ratio",
            "min_on_half_intervals",
            "half_interval_failures",
        ]);
        for l in &self.levels {
            t.push(vec![
                l.n.into(),
                l.psi_seminorm_pow.into(),
                l.max_seminorm_pow.into(),
                l.ratio.into(),
                l.min_on_half_intervals.into(),
                l.half_interval_failures.into(),
            ]);
        }
        t
    }
}

/// Builds E, R = 2^(2α+1) dist(·, E)^α and ψ_N on G = (-8, 9) and measures
/// the three claims of the construction.
pub fn counterexample_blowup(cfg: &CounterexampleConfig) -> Result<CounterexampleReport> {
    let (m, s, p, sigma) = (cfg.m, cfg.s, cfg.p, cfg.sigma);
    if m < 2 || cfg.n_list.len() < 2 {
        return Err(Error::invalid("need M >= 2 and at least two levels"));
    }
    let alpha = 1.0 / m as f64;
    if alpha * s * p < 1.0 {
        return Err(Error::InadmissibleParameters(format!("alpha s p = {} < 1", alpha * s * p)));
    }
    if !(s > 0.0 && s < 1.0 && sigma > 0.0 && sigma < 1.0 && p > 1.0) {
        return Err(Error::InadmissibleParameters("need 0 < s, sigma < 1 and p > 1".into()));
    }
    let (a, b) = cfg.bump_support;
    if !(0.0 <= a && a < b && b <= 1.0) {
        return Err(Error::invalid("the bump must live in (0, 1)"));
    }
    let n_max = *cfg.n_list.iter().max().unwrap();
    let h = 2f64.powi(-(cfg.resolution as i32));
    if h > 2f64.powi(-((m * n_max) as i32)) / 16.0 {
        return Err(Error::ResolutionInsufficient(format!(
            "h = 2^-{} must be at most 2^-{} / 16",
            cfg.resolution,
            m * n_max
        )));
    }
    let regime = if (sigma - alpha * s).abs() <= 1e-12 {
        Regime::Probe
    } else if sigma > alpha * s {
        Regime::Blowup
    } else {
        Regime::Inversion
    };
    let mask = DyadicGapSet::standard_domain(h)?;
    let gap = build_gap_set(m, n_max, &mask)?;
    let (radius, radius_clipped) = gap.radius()?;
    let psi = Bump::new(a, b, 4.0);
    let sample = |n: u32| -> Result<ScalarField> {
        let b = psi.dilated(n);
        ScalarField::from_fn(&mask, |x| b.eval(x[0]))
    };
    let psi_reference_pow = classical_seminorm_pow(&sample(0)?, s, p)?;
    let mut levels = Vec::new();
    for &n in &cfg.n_list {
        let f = sample(n)?;
        let mr = local_maximal_fast(&f, &radius)?.values;
        let (min_half, nodes, failures) = half_interval_minimum(&gap, &mask, &mr, n);
        let num = classical_seminorm_pow(&mr, sigma, p)?;
        let den = classical_seminorm_pow(&f, s, p)?;
        levels.push(LevelResult {
            n,
            psi_seminorm_pow: den,
            psi_scaling_error: den / (2f64.powf(n as f64 * (s * p - 1.0)) * psi_reference_pow) - 1.0,
            max_seminorm_pow: num,
            ratio: (num / den).powf(1.0 / p),
            min_on_half_intervals: min_half,
            half_interval_nodes: nodes,
            half_interval_failures: failures,
        });
    }
    let xs: Vec<f64> = levels.iter().map(|l| l.n as f64).collect();
    let ys: Vec<f64> = levels.iter().map(|l| l.psi_seminorm_pow.log2()).collect();
    let growth = levels
        .windows(2)
        .map(|w| (w[1].ratio / w[0].ratio).log2() / (w[1].n as f64 - w[0].n as f64))
        .collect();
    Ok(CounterexampleReport {
        config: cfg.clone(),
        regime,
        h,
        radius_clipped,
        psi_reference_pow,
        psi_exponent: ls_slope(&xs, &ys),
        expected_psi_exponent: s * p - 1.0,
        growth,
        growth_threshold: sigma / alpha - s - 0.3,
        levels,
    })
}

/// (min, node count, nodes below 1) of `mr` over the open half intervals of
/// level `n`.
fn half_interval_minimum(gap: &DyadicGapSet, mask: &DomainMask, mr: &ScalarField, n: u32) -> (f64, usize, usize) {
    let g = mask.grid();
    let mut min = f64::INFINITY;
    let mut count = 0;
    let mut failures = 0;
    for iv in gap.intervals.iter().filter(|iv| iv.n == n) {
        let (lo, hi) = iv.half();
        for &i in mask.nodes() {
            let x = g.coord(i)[0];
            if x > lo && x < hi {
                let v = mr.get(i);
                min = min.min(v);
                count += 1;
                if v < 1.0 {
                    failures += 1;
                }
            }
        }
    }
    (min, count, failures)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coarse_run_checks_the_maximal_bound() {
        let cfg = CounterexampleConfig {
            n_list: vec![1, 2],
            resolution: 8,
            ..Default::default()
        };
        let rep = counterexample_blowup(&cfg).unwrap();
        assert_eq!(rep.regime, Regime::Blowup);
        assert!(!rep.radius_clipped);
        assert_eq!(rep.levels[1].half_interval_failures, 0);
        assert!(rep.levels[1].half_interval_nodes > 0);
        assert_eq!(rep.growth.len(), 1);
    }

    #[test]
    fn preconditions() {
        let mut cfg = CounterexampleConfig {
            resolution: 7,
            ..Default::default()
        };
        assert!(matches!(counterexample_blowup(&cfg), Err(Error::ResolutionInsufficient(_))));
        cfg.resolution = 10;
        cfg.p = 2.0;
        assert!(matches!(counterexample_blowup(&cfg), Err(Error::InadmissibleParameters(_))));
    }
}
