//! Pointwise domination of `ω^(1/p) S_R(M_R f)` by directional maximal
//! functions of `S f` on the product grid.

use serde::{Deserialize, Serialize};

use super::fields::band_limited_family;
use crate::error::{Error, Result};
use crate::grid::{DomainMask, RadiusField, ScalarField};
use crate::maxop::{directional_maximal, local_maximal_fast, ProductField};
use crate::report::{ExperimentReport, Gate, Table};
use crate::seminorm::difference_field;
use crate::weights::Weight;

/// `ω_m(x, y)`: `ω(x - y)^(1/p)` for m = 0, `ω(y - x)^(1/p)` for m = 1. The
/// diagonal carries the cell average of ω.
fn omega_field(w: &Weight, f: &ScalarField, p: f64, m: u8) -> Result<ProductField> {
    let h = f.grid().h();
    let diag = w.cell_average_at_origin(h).powf(1.0 / p);
    let side = f.grid().len();
    let mut values = vec![diag; side * side];
    for x in 0..side {
        for y in 0..side {
            if x != y {
                let z = (x as f64 - y as f64) * h;
                let z = if m == 0 { z } else { -z };
                values[x * side + y] = w.evaluate(&[z])?.powf(1.0 / p);
            }
        }
    }
    ProductField::new(f.mask(), values)
}

fn add_into(acc: &mut [f64], f: &ProductField) {
    for (a, v) in acc.iter_mut().zip(f.values()) {
        *a += v;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominationResult {
    /// max LHS/RHS over off-diagonal pairs with LHS > 0
    pub max_ratio: f64,
    pub worst_pair: Option<(usize, usize)>,
    pub pairs_tested: usize,
}

/// Both sides of the domination inequality on every off-diagonal node pair.
/// The sum runs over i, j, m ∈ {0, 1} and (k, l) ∈ {(0,0), (0,1), (1,0)}.
pub fn pointwise_domination_check(f: &ScalarField, r: &RadiusField, s: f64, p: f64, w: &Weight) -> Result<DominationResult> {
    if f.grid().dim() != 1 {
        return Err(Error::invalid("domination is checked on one-dimensional grids only"));
    }
    let mask = f.mask();
    let mr = local_maximal_fast(f, r)?.values;
    let sr = difference_field(&mr, s, Some(r))?;
    let sf = difference_field(f, s, None)?;
    let omegas = [omega_field(w, f, p, 0)?, omega_field(w, f, p, 1)?];
    let m = f.grid().len();
    let mut t = vec![0.0; m * m];
    for (k, l) in [(0u8, 0u8), (0, 1), (1, 0)] {
        let inner = directional_maximal(&sf, k, l)?;
        for om in &omegas {
            let b = om.zip_with(&inner, |a, b| a * b)?;
            for (i, j) in [(0u8, 0u8), (0, 1), (1, 0), (1, 1)] {
                add_into(&mut t, &directional_maximal(&b, i, j)?);
            }
        }
    }
    let lhs_w = &omegas[0];
    let mut best = 0.0f64;
    let mut worst = None;
    let mut pairs = 0;
    for &x in mask.nodes() {
        for &y in mask.nodes() {
            if x == y {
                continue;
            }
            pairs += 1;
            let lhs = lhs_w.get(x, y) * sr.get(x, y);
            if lhs <= 0.0 {
                continue;
            }
            let rhs = t[x * m + y] + t[y * m + x];
            let q = if rhs > 0.0 { lhs / rhs } else { f64::INFINITY };
            if q > best {
                best = q;
                worst = Some((x, y));
            }
        }
    }
    Ok(DominationResult {
        max_ratio: best,
        worst_pair: worst,
        pairs_tested: pairs,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DominationConfig {
    pub fields: usize,
    pub nodes: usize,
    pub s: f64,
    pub p: f64,
    pub weights: Vec<String>,
    pub seed: u64,
}

impl Default for DominationConfig {
    fn default() -> Self {
        DominationConfig {
            fields: 20,
            nodes: 96,
            s: 0.5,
            p: 2.0,
            weights: vec!["const:1.0".into(), "pow:eps=0.5".into()],
            seed: 42,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DominationCase {
    pub weight: String,
    pub max_ratio_coarse: f64,
    pub max_ratio_fine: f64,
    pub drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DominationReport {
    pub config: DominationConfig,
    pub cases: Vec<DominationCase>,
    /// (weight, nodes, field, max_ratio)
    pub per_field: Vec<(String, usize, usize, f64)>,
}

impl ExperimentReport for DominationReport {
    fn name(&self) -> &'static str {
        "domination"
    }

    fn gates(&self) -> Vec<Gate> {
        let mut g = Vec::new();
        for c in &self.cases {
            g.push(Gate::new(
                &format!("finite[{}]", c.weight),
                c.max_ratio_coarse.is_finite() && c.max_ratio_fine.is_finite(),
                format!("max ratio {:.4} / {:.4}", c.max_ratio_coarse, c.max_ratio_fine),
            ));
            g.push(Gate::new(
                &format!("refinement_drift_below_2[{}]", c.weight),
                c.drift < 2.0,
                format!("drift {:.4}", c.drift),
            ));
        }
        g
    }

    fn table(&self) -> Table {
        let mut t = Table::new(&["weight", "nodes", "field", "max_ratio"]);
        for (w, n, f, r) in &self.per_field {
            t.push(vec![w.clone().into(), (*n).into(), (*f).into(), (*r).into()]);
        }
        t
    }
}

/// Random nonnegative fields on `nodes` and `2 * nodes` cell-centred nodes of
/// [0, 1], R = boundary distance.
pub fn domination_sweep(cfg: &DominationConfig) -> Result<DominationReport> {
    let fields = band_limited_family(cfg.fields, cfg.seed);
    let mut cases = Vec::new();
    let mut per_field = Vec::new();
    for spec in &cfg.weights {
        let w = Weight::parse(spec, 1)?;
        let mut maxes = [0.0f64; 2];
        for (k, nodes) in [cfg.nodes, 2 * cfg.nodes].into_iter().enumerate() {
            let mask = DomainMask::unit_interval(nodes)?;
            let r = RadiusField::boundary(&mask)?;
            for (fi, field) in fields.iter().enumerate() {
                let f = ScalarField::from_fn(&mask, |x| field.eval(x[0]).abs())?;
                let res = pointwise_domination_check(&f, &r, cfg.s, cfg.p, &w)?;
                maxes[k] = maxes[k].max(res.max_ratio);
                per_field.push((spec.clone(), nodes, fi, res.max_ratio));
            }
        }
        cases.push(DominationCase {
            weight: spec.clone(),
            max_ratio_coarse: maxes[0],
            max_ratio_fine: maxes[1],
            drift: (maxes[0] / maxes[1]).max(maxes[1] / maxes[0]),
        });
    }
    Ok(DominationReport {
        config: cfg.clone(),
        cases,
        per_field,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_f_has_nothing_to_dominate() {
        let mask = DomainMask::unit_interval(24).unwrap();
        let f = ScalarField::from_fn(&mask, |_| 3.0).unwrap();
        let r = RadiusField::boundary(&mask).unwrap();
        let res = pointwise_domination_check(&f, &r, 0.5, 2.0, &Weight::constant(1, 1.0).unwrap()).unwrap();
        assert_eq!(res.max_ratio, 0.0);
        assert_eq!(res.pairs_tested, 24 * 23);
    }

    #[test]
    fn zero_radius_is_dominated_by_the_identity_term() {
        // with R = 0, S_R(M_R f) = S(|f|) <= S f, and the m = 0, i=j=k=l=0 term is ω_0 S f
        let mask = DomainMask::unit_interval(32).unwrap();
        let f = ScalarField::from_fn(&mask, |x| (6.0 * x[0]).sin().abs()).unwrap();
        let r = RadiusField::zero(&mask);
        let res = pointwise_domination_check(&f, &r, 0.5, 2.0, &Weight::power_origin(1, 0.5).unwrap()).unwrap();
        assert!(res.max_ratio <= 1.0 && res.max_ratio > 0.0);
    }
}
