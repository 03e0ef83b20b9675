//! Nonlocal capacities.
//!
//! The relative capacity of E in H (inside G) minimizes
//!
//! ```text
//! Σ_{x≠y ∈ G} |φ(x) - φ(y)|^p K(x, y) h^(2n),   K = ω(x - y) D^(-sp),
//! ```
//!
//! over φ with φ = 1 on E and φ = 0 on G∖H. The global variant drops the
//! outer constraint and adds `Σ |φ|^p h^n`. For p = 2 the minimizer solves a
//! symmetric positive definite system. For p < 2 it comes from iteratively
//! reweighted least squares, for p > 2 from projected gradient descent on
//! [0, 1]^free.
//!
//! Only the free × free block of the kernel is stored. Couplings from a free
//! node to the fixed nodes collapse into two sums per node.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{check_same_mask, distance_to_set, sublevel_mask, DomainMask, NodeSet, RadiusField, ScalarField};
use crate::seminorm::{pair_energy, KernelSpec, PairKernel, PowP};
use crate::weights::Weight;

/// Largest number of free nodes the solvers accept.
pub const MAX_FREE_NODES: usize = 4096;

#[derive(Clone, Debug)]
pub struct CapacityProblem {
    domain: Arc<DomainMask>,
    e: NodeSet,
    h_set: Option<NodeSet>,
    s: f64,
    p: f64,
    weight: Weight,
    radius: Option<RadiusField>,
}

impl CapacityProblem {
    /// Relative capacity of `e` in `h_set`, both inside `domain`.
    pub fn relative(domain: &Arc<DomainMask>, e: NodeSet, h_set: NodeSet, s: f64, p: f64, weight: Weight) -> Result<Self> {
        let prob = CapacityProblem {
            domain: domain.clone(),
            e,
            h_set: Some(h_set),
            s,
            p,
            weight,
            radius: None,
        };
        prob.validate()?;
        Ok(prob)
    }

    /// Global capacity of `e`, with the L^p term.
    pub fn global(domain: &Arc<DomainMask>, e: NodeSet, s: f64, p: f64, weight: Weight) -> Result<Self> {
        let prob = CapacityProblem {
            domain: domain.clone(),
            e,
            h_set: None,
            s,
            p,
            weight,
            radius: None,
        };
        prob.validate()?;
        Ok(prob)
    }

    /// Relative capacity for the classical kernel `|x - y|^(-n - sp)`,
    /// written as the weighted kernel with ω = |z|^(n/2 - n) and exponent
    /// `s + n/(2p)`.
    pub fn classical_relative(domain: &Arc<DomainMask>, e: NodeSet, h_set: NodeSet, s: f64, p: f64) -> Result<Self> {
        let n = domain.grid().dim();
        let eps = 0.5 * n as f64;
        let w = Weight::power_origin(n, eps)?;
        Self::relative(domain, e, h_set, s + eps / p, p, w)
    }

    pub fn with_radius(mut self, r: RadiusField) -> Result<Self> {
        check_same_mask(&self.domain, r.mask())?;
        self.radius = Some(r);
        Ok(self)
    }

    /// Same problem for another set E.
    pub fn with_set(&self, e: NodeSet) -> Result<Self> {
        let mut prob = self.clone();
        prob.e = e;
        prob.validate()?;
        Ok(prob)
    }

    fn validate(&self) -> Result<()> {
        let mask = &self.domain;
        if self.e.is_empty() {
            return Err(Error::invalid("capacity of an empty set"));
        }
        if !self.e.within(mask) {
            return Err(Error::invalid("E must consist of inside nodes"));
        }
        if let Some(h) = &self.h_set {
            if !h.within(mask) {
                return Err(Error::invalid("H must consist of inside nodes"));
            }
            if !self.e.is_subset(h) {
                return Err(Error::invalid("E must be contained in H"));
            }
        }
        if !(self.s > 0.0 && self.s <= 2.0) || !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::invalid(format!("need 0 < s <= 2 and 1 < p < inf, got s={}, p={}", self.s, self.p)));
        }
        if self.weight.dim() != mask.grid().dim() {
            return Err(Error::invalid("weight and domain dimensions differ"));
        }
        Ok(())
    }

    pub fn domain(&self) -> &Arc<DomainMask> {
        &self.domain
    }

    pub fn e(&self) -> &NodeSet {
        &self.e
    }

    pub fn h_set(&self) -> Option<&NodeSet> {
        self.h_set.as_ref()
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    pub fn radius(&self) -> Option<&RadiusField> {
        self.radius.as_ref()
    }

    /// True exactly for the global variant.
    pub fn include_lp_term(&self) -> bool {
        self.h_set.is_none()
    }

    fn kernel_spec(&self) -> KernelSpec {
        KernelSpec::weighted(self.s, self.p, &self.weight)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveMethod {
    Cholesky,
    ProjectedGradient,
    /// iteratively reweighted least squares, for p < 2
    Reweighted,
}

#[derive(Clone, Debug)]
pub struct CapacitySolution {
    pub value: f64,
    pub minimizer: ScalarField,
    pub converged: bool,
    pub iterations: usize,
    pub method: SolveMethod,
    /// Relative residual of the linear solve.
    pub residual: Option<f64>,
}

/// The capacity energy of an admissible φ given on every node of G.
pub fn capacity_energy(prob: &CapacityProblem, phi: &ScalarField) -> Result<f64> {
    check_same_mask(&prob.domain, phi.mask())?;
    let kernel = PairKernel::new(prob.domain.grid(), &prob.kernel_spec(), prob.radius.as_ref())?;
    let mut energy = pair_energy(&prob.domain, phi.values(), &kernel, prob.p);
    if prob.include_lp_term() {
        energy += crate::seminorm::lp_norm_pow(phi, prob.p);
    }
    Ok(energy)
}

/// Free-node system: couplings among free nodes and to the fixed values.
struct Reduced {
    free: Vec<usize>,
    /// symmetric free × free couplings K(x,y) + K(y,x), zero diagonal
    w: Vec<f64>,
    /// couplings to nodes fixed at 0, and at 1
    a0: Vec<f64>,
    a1: Vec<f64>,
    /// energy of fixed × fixed pairs
    c0: f64,
    /// weight of |φ|^p in the L^p term, relative to the pair terms
    lam: f64,
    /// L^p term of the nodes of E
    lam_e: f64,
    scale: f64,
    p: f64,
}

impl Reduced {
    fn build(prob: &CapacityProblem) -> Result<Reduced> {
        let mask = &prob.domain;
        let g = mask.grid();
        let n = g.dim() as i32;
        let h = g.h();
        let e_flags = prob.e.flags();
        let h_flags = prob.h_set.as_ref().map(|s| s.flags());
        let in_h = |i: usize| h_flags.as_ref().map(|f| f[i]).unwrap_or(true);
        let free: Vec<usize> = mask.nodes().iter().copied().filter(|&i| !e_flags[i] && in_h(i)).collect();
        if free.len() > MAX_FREE_NODES {
            return Err(Error::ProblemTooLarge(format!(
                "{} free nodes, the limit is {MAX_FREE_NODES}",
                free.len()
            )));
        }
        let zeros: Vec<usize> = mask.nodes().iter().copied().filter(|&i| !in_h(i)).collect();
        let kernel = PairKernel::new(g, &prob.kernel_spec(), prob.radius.as_ref())?;
        let ks = |x: usize, y: usize| kernel.k(x, y) + kernel.k(y, x);
        let m = free.len();
        let mut w = vec![0.0; m * m];
        for a in 0..m {
            for b in a + 1..m {
                let v = ks(free[a], free[b]);
                w[a * m + b] = v;
                w[b * m + a] = v;
            }
        }
        let mut a0 = vec![0.0; m];
        let mut a1 = vec![0.0; m];
        for (a, &x) in free.iter().enumerate() {
            a0[a] = zeros.iter().map(|&y| ks(x, y)).sum();
            a1[a] = prob.e.iter().map(|y| ks(x, y)).sum();
        }
        let c0 = prob.e.iter().map(|x| zeros.iter().map(|&y| ks(x, y)).sum::<f64>()).sum();
        let scale = h.powi(2 * n);
        let (lam, lam_e) = if prob.include_lp_term() {
            let hn = h.powi(n);
            (hn / scale, prob.e.len() as f64 * hn / scale)
        } else {
            (0.0, 0.0)
        };
        Ok(Reduced {
            free,
            w,
            a0,
            a1,
            c0,
            lam,
            lam_e,
            scale,
            p: prob.p,
        })
    }

    fn energy(&self, phi: &[f64], pw: &PowP) -> f64 {
        let m = self.free.len();
        let mut pair = 0.0;
        for a in 0..m {
            let row = &self.w[a * m..(a + 1) * m];
            let fa = phi[a];
            let mut acc = 0.0;
            for b in a + 1..m {
                acc += row[b] * pw.of((fa - phi[b]).abs());
            }
            pair += acc;
        }
        let mut single = 0.0;
        for a in 0..m {
            single += (self.a0[a] + self.lam) * pw.of(phi[a].abs()) + self.a1[a] * pw.of((1.0 - phi[a]).abs());
        }
        (self.c0 + self.lam_e + pair + single) * self.scale
    }

    fn gradient(&self, phi: &[f64], out: &mut [f64]) {
        let m = self.free.len();
        let p = self.p;
        let dpow = |t: f64| -> f64 {
            // d/dt |t|^p
            if t == 0.0 {
                0.0
            } else if p == 2.0 {
                2.0 * t
            } else {
                p * t.abs().powf(p - 1.0) * t.signum()
            }
        };
        for a in 0..m {
            let row = &self.w[a * m..(a + 1) * m];
            let fa = phi[a];
            let mut g = 0.0;
            for b in 0..m {
                if b != a {
                    g += row[b] * dpow(fa - phi[b]);
                }
            }
            g += (self.a0[a] + self.lam) * dpow(fa) + self.a1[a] * dpow(fa - 1.0);
            out[a] = g * self.scale;
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        let m = self.free.len();
        (0..m)
            .map(|a| {
                let row: f64 = self.w[a * m..(a + 1) * m].iter().sum();
                2.0 * (row + self.a0[a] + self.a1[a] + self.lam) * self.scale
            })
            .collect()
    }

    /// φ = a1 / (a0 + a1 + λ), the minimizer when the free nodes ignore each other.
    fn initial(&self) -> Vec<f64> {
        (0..self.free.len())
            .map(|a| (self.a1[a] / (self.a0[a] + self.a1[a] + self.lam)).clamp(0.0, 1.0))
            .collect()
    }

    fn expand(&self, prob: &CapacityProblem, phi: &[f64]) -> ScalarField {
        let mut v = vec![0.0; prob.domain.grid().len()];
        for i in prob.e.iter() {
            v[i] = 1.0;
        }
        for (a, &i) in self.free.iter().enumerate() {
            v[i] = phi[a];
        }
        ScalarField::new(&prob.domain, v).expect("values in [0, 1]")
    }
}

/// Minimizes the capacity energy.
pub fn solve_capacity(prob: &CapacityProblem) -> Result<CapacitySolution> {
    let red = Reduced::build(prob)?;
    let pw = PowP::new(prob.p);
    if red.free.is_empty() {
        let phi = red.expand(prob, &[]);
        return Ok(CapacitySolution {
            value: red.energy(&[], &pw),
            minimizer: phi,
            converged: true,
            iterations: 0,
            method: SolveMethod::Cholesky,
            residual: Some(0.0),
        });
    }
    if prob.p == 2.0 {
        return solve_linear(prob, &red, &pw);
    }
    if prob.p < 2.0 {
        return reweighted(prob, &red, &pw);
    }
    Ok(projected_gradient(prob, &red, &pw))
}

fn solve_linear(prob: &CapacityProblem, red: &Reduced, pw: &PowP) -> Result<CapacitySolution> {
    let m = red.free.len();
    let mut a = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        let row = &red.w[i * m..(i + 1) * m];
        let mut diag = red.a0[i] + red.a1[i] + red.lam;
        for j in 0..m {
            if j != i {
                a[(i, j)] = -row[j];
                diag += row[j];
            }
        }
        a[(i, i)] = diag;
    }
    let b = DVector::from_vec(red.a1.clone());
    let chol = a
        .clone()
        .cholesky()
        .ok_or_else(|| Error::SolverFailure("stiffness matrix is not positive definite".into()))?;
    let x = chol.solve(&b);
    let r = &a * &x - &b;
    let residual = r.amax() / b.amax().max(f64::MIN_POSITIVE);
    if !(residual < 1e-10) {
        return Err(Error::SolverFailure(format!("relative residual {residual:e} above 1e-10")));
    }
    let phi: Vec<f64> = x.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    Ok(CapacitySolution {
        value: red.energy(&phi, pw),
        minimizer: red.expand(prob, &phi),
        converged: true,
        iterations: 1,
        method: SolveMethod::Cholesky,
        residual: Some(residual),
    })
}

const MAX_ITER: usize = 5000;
const REL_TOL: f64 = 1e-8;

fn projected_gradient(prob: &CapacityProblem, red: &Reduced, pw: &PowP) -> CapacitySolution {
    let m = red.free.len();
    let diag = red.diagonal();
    let mut phi = red.initial();
    let mut energy = red.energy(&phi, pw);
    let mut grad = vec![0.0; m];
    let mut trial = vec![0.0; m];
    let mut step = 1.0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITER {
        iterations += 1;
        red.gradient(&phi, &mut grad);
        let mut tau = step;
        let mut accepted = None;
        for _ in 0..60 {
            let mut decrease = 0.0;
            for a in 0..m {
                trial[a] = (phi[a] - tau * grad[a] / diag[a]).clamp(0.0, 1.0);
                decrease += grad[a] * (trial[a] - phi[a]);
            }
            let e_new = red.energy(&trial, pw);
            if e_new <= energy + 1e-4 * decrease {
                accepted = Some(e_new);
                break;
            }
            tau *= 0.5;
        }
        let Some(e_new) = accepted else {
            // no descent left at working precision
            converged = true;
            break;
        };
        let change = (energy - e_new).abs();
        std::mem::swap(&mut phi, &mut trial);
        energy = e_new;
        step = 2.0 * tau;
        if change <= REL_TOL * energy.abs() {
            converged = true;
            break;
        }
    }
    CapacitySolution {
        value: energy,
        minimizer: red.expand(prob, &phi),
        converged,
        iterations,
        method: SolveMethod::ProjectedGradient,
        residual: None,
    }
}

const IRLS_MAX_ITER: usize = 400;
const DELTA_START: f64 = 1e-2;
const DELTA_FLOOR: f64 = 1e-9;

/// For 1 <= p < 2: majorize-minimize on the smoothed energy with
/// `|t|^p -> (t^2 + δ^2)^(p/2)`. Each step solves a weighted quadratic
/// problem whose minimizer stays in [0, 1] by the maximum principle; δ drops
/// tenfold whenever the smoothed energy settles.
fn reweighted(prob: &CapacityProblem, red: &Reduced, pw: &PowP) -> Result<CapacitySolution> {
    let m = red.free.len();
    let p = red.p;
    let weight = |t: f64, delta: f64| 0.5 * p * (t * t + delta * delta).powf(0.5 * p - 1.0);
    let smoothed = |t: f64, delta: f64| (t * t + delta * delta).powf(0.5 * p);
    let smoothed_energy = |phi: &[f64], delta: f64| -> f64 {
        let mut e = 0.0;
        for a in 0..m {
            let row = &red.w[a * m..(a + 1) * m];
            for b in a + 1..m {
                e += row[b] * smoothed(phi[a] - phi[b], delta);
            }
            e += (red.a0[a] + red.lam) * smoothed(phi[a], delta) + red.a1[a] * smoothed(1.0 - phi[a], delta);
        }
        e
    };
    let mut phi = red.initial();
    let mut delta = DELTA_START;
    let mut last = smoothed_energy(&phi, delta);
    let mut converged = false;
    let mut iterations = 0;
    let mut a_mat = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DVector::<f64>::zeros(m);
    while iterations < IRLS_MAX_ITER {
        iterations += 1;
        a_mat.fill(0.0);
        for a in 0..m {
            let row = &red.w[a * m..(a + 1) * m];
            for b in a + 1..m {
                if row[b] > 0.0 {
                    let c = row[b] * weight(phi[a] - phi[b], delta);
                    a_mat[(a, b)] -= c;
                    a_mat[(b, a)] -= c;
                    a_mat[(a, a)] += c;
                    a_mat[(b, b)] += c;
                }
            }
            let c0 = (red.a0[a] + red.lam) * weight(phi[a], delta);
            let c1 = red.a1[a] * weight(1.0 - phi[a], delta);
            a_mat[(a, a)] += c0 + c1;
            rhs[a] = c1;
        }
        let chol = a_mat
            .clone()
            .cholesky()
            .ok_or_else(|| Error::SolverFailure("reweighted system is not positive definite".into()))?;
        let x = chol.solve(&rhs);
        for a in 0..m {
            phi[a] = x[a].clamp(0.0, 1.0);
        }
        let e = smoothed_energy(&phi, delta);
        let settled = (last - e).abs() <= 1e-10 * e.abs();
        last = e;
        if settled {
            if delta <= DELTA_FLOOR {
                converged = true;
                break;
            }
            delta = (delta * 0.1).max(DELTA_FLOOR);
            last = smoothed_energy(&phi, delta);
        }
    }
    Ok(CapacitySolution {
        value: red.energy(&phi, pw),
        minimizer: red.expand(prob, &phi),
        converged,
        iterations,
        method: SolveMethod::Reweighted,
        residual: None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubadditivityReport {
    pub union: f64,
    pub first: f64,
    pub second: f64,
    /// `first + second - union`
    pub slack: f64,
    pub holds: bool,
}

/// Checks `C(E1 ∪ E2) <= C(E1) + C(E2)` for the problem `base` with E replaced.
/// An empty set has capacity zero.
pub fn capacity_subadditivity_check(e1: &NodeSet, e2: &NodeSet, base: &CapacityProblem) -> Result<SubadditivityReport> {
    let cap = |e: &NodeSet| -> Result<f64> {
        if e.is_empty() {
            return Ok(0.0);
        }
        Ok(solve_capacity(&base.with_set(e.clone())?)?.value)
    };
    let union = cap(&e1.union(e2))?;
    let first = cap(e1)?;
    let second = cap(e2)?;
    let slack = first + second - union;
    let holds = slack >= -1e-6 * (first + second).max(1.0);
    Ok(SubadditivityReport {
        union,
        first,
        second,
        slack,
        holds,
    })
}

/// `E_t = {x ∈ G : dist(x, E) < t}` and `E_{t,R} = {x ∈ G : R(x) < t}`.
pub fn neighbourhood_family(e: &NodeSet, mask: &Arc<DomainMask>, r: &RadiusField, t: f64) -> Result<(NodeSet, NodeSet)> {
    check_same_mask(mask, r.mask())?;
    if !(t > 0.0) {
        return Err(Error::invalid(format!("t must be positive, got {t}")));
    }
    let dist = distance_to_set(mask, e)?;
    Ok((sublevel_mask(&dist, t), sublevel_mask(r.as_field(), t)))
}

/// On-disk description of a capacity problem, read by the command line.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CapacityProblemDocument {
    pub grid: crate::grid::Grid,
    pub inside: Vec<bool>,
    /// node indices of E
    pub e: Vec<usize>,
    /// node indices of H; absent for the global capacity
    #[serde(default)]
    pub h: Option<Vec<usize>>,
    pub s: f64,
    pub p: f64,
    pub weight: String,
    /// radius mode, as accepted by `RadiusField::parse_mode`
    #[serde(default)]
    pub radius: Option<String>,
}

impl CapacityProblemDocument {
    pub fn into_problem(self) -> Result<CapacityProblem> {
        let mask = DomainMask::new(self.grid, self.inside)?;
        let n = mask.grid().len();
        let e = NodeSet::from_indices(n, self.e)?;
        let w = Weight::parse(&self.weight, mask.grid().dim())?;
        let prob = match self.h {
            Some(h) => CapacityProblem::relative(&mask, e, NodeSet::from_indices(n, h)?, self.s, self.p, w)?,
            None => CapacityProblem::global(&mask, e, self.s, self.p, w)?,
        };
        match self.radius {
            Some(spec) => {
                let r = RadiusField::parse_mode(&spec, &mask)?;
                prob.with_radius(r)
            }
            None => Ok(prob),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn setup() -> (Arc<DomainMask>, NodeSet, NodeSet) {
        let mask = DomainMask::open_interval(-1.0, 2.0, 0.125).unwrap();
        let g = mask.grid();
        let e = NodeSet::from_predicate(&mask, |p| (0.0..=1.0).contains(&p[0]));
        let h = NodeSet::from_predicate(&mask, |p| p[0] > -0.3 && p[0] < 1.3);
        assert_eq!(e.universe(), g.len());
        (mask, e, h)
    }

    #[test]
    fn linear_solve_beats_every_competitor() {
        let (mask, e, h) = setup();
        let prob = CapacityProblem::relative(&mask, e.clone(), h.clone(), 0.6, 2.0, Weight::constant(1, 1.0).unwrap()).unwrap();
        let sol = solve_capacity(&prob).unwrap();
        assert_eq!(sol.method, SolveMethod::Cholesky);
        assert!(sol.residual.unwrap() < 1e-10);
        let direct = capacity_energy(&prob, &sol.minimizer).unwrap();
        assert!((direct - sol.value).abs() < 1e-10 * direct);
        // perturbing an admissible minimizer never lowers the energy
        let free: Vec<usize> = h.difference(&e).iter().collect();
        for (k, &i) in free.iter().enumerate() {
            let mut v = sol.minimizer.values().to_vec();
            v[i] = (v[i] + if k % 2 == 0 { 0.05 } else { -0.05 }).clamp(0.0, 1.0);
            let other = capacity_energy(&prob, &ScalarField::new(&mask, v).unwrap()).unwrap();
            assert!(other >= sol.value * (1.0 - 1e-12));
        }
        // the indicator of H is admissible too
        let ind = ScalarField::new(&mask, h.flags().iter().map(|&b| f64::from(u8::from(b))).collect()).unwrap();
        assert!(capacity_energy(&prob, &ind).unwrap() >= sol.value);
    }

    #[test]
    fn projected_gradient_agrees_with_linear_solve() {
        let mask = DomainMask::open_interval(-1.0, 2.0, 0.25).unwrap();
        let e = NodeSet::from_predicate(&mask, |p| (0.0..=1.0).contains(&p[0]));
        let h = NodeSet::from_predicate(&mask, |p| p[0] > -0.6 && p[0] < 1.6);
        let prob = CapacityProblem::relative(&mask, e, h, 0.5, 2.0, Weight::constant(1, 1.0).unwrap()).unwrap();
        let red = Reduced::build(&prob).unwrap();
        let pw = PowP::new(2.0);
        let lin = solve_linear(&prob, &red, &pw).unwrap();
        let pg = projected_gradient(&prob, &red, &pw);
        assert!(pg.converged);
        assert!((pg.value - lin.value).abs() < 1e-6 * lin.value, "{} vs {}", pg.value, lin.value);
    }

    #[test]
    fn reweighting_and_projected_gradient_agree_below_two() {
        let mask = DomainMask::open_interval(-1.0, 2.0, 0.125).unwrap();
        let e = NodeSet::from_predicate(&mask, |p| (0.0..=1.0).contains(&p[0]));
        let h = NodeSet::from_predicate(&mask, |p| p[0] > -0.6 && p[0] < 1.6);
        for p in [1.2, 1.5, 1.8] {
            let prob = CapacityProblem::relative(&mask, e.clone(), h.clone(), 0.5, p, Weight::power_origin(1, 0.5).unwrap()).unwrap();
            let red = Reduced::build(&prob).unwrap();
            let pw = PowP::new(p);
            let irls = reweighted(&prob, &red, &pw).unwrap();
            let pg = projected_gradient(&prob, &red, &pw);
            assert!(irls.converged, "p = {p}");
            // projected gradient stalls first, never below the reweighted value
            assert!(irls.value <= pg.value * (1.0 + 1e-9), "p = {p}: {} vs {}", irls.value, pg.value);
            assert!(pg.value - irls.value < 1e-3 * irls.value, "p = {p}: {} vs {}", irls.value, pg.value);
        }
    }

    #[test]
    fn minimizer_is_admissible_and_monotone_in_e() {
        let (mask, e, h) = setup();
        let w = Weight::power_origin(1, 0.5).unwrap();
        let prob = CapacityProblem::relative(&mask, e.clone(), h.clone(), 0.7, 1.5, w.clone()).unwrap();
        let sol = solve_capacity(&prob).unwrap();
        assert_eq!(sol.method, SolveMethod::Reweighted);
        for &i in mask.nodes() {
            let v = sol.minimizer.get(i);
            assert!((0.0..=1.0).contains(&v));
            if e.contains(i) {
                assert_eq!(v, 1.0);
            }
            if !h.contains(i) {
                assert_eq!(v, 0.0);
            }
        }
        let smaller = NodeSet::from_predicate(&mask, |p| (0.25..=0.75).contains(&p[0]));
        let sub = solve_capacity(&prob.with_set(smaller).unwrap()).unwrap();
        assert!(sub.value <= sol.value * (1.0 + 1e-6));
    }

    #[test]
    fn subadditivity_and_degenerate_union() {
        let (mask, _, h) = setup();
        let w = Weight::constant(1, 1.0).unwrap();
        let e1 = NodeSet::from_predicate(&mask, |p| (0.0..=0.25).contains(&p[0]));
        let e2 = NodeSet::from_predicate(&mask, |p| (0.75..=1.0).contains(&p[0]));
        let base = CapacityProblem::relative(&mask, e1.clone(), h, 0.4, 2.0, w).unwrap();
        let rep = capacity_subadditivity_check(&e1, &e2, &base).unwrap();
        assert!(rep.holds && rep.slack > 0.0);
        let same = capacity_subadditivity_check(&e1, &e1, &base).unwrap();
        assert!(same.holds && (same.union - same.first).abs() < 1e-12 * same.first);
        let empty = NodeSet::empty(mask.grid().len());
        assert!(capacity_subadditivity_check(&e1, &empty, &base).unwrap().holds);
    }

    #[test]
    fn global_capacity_carries_the_lp_term() {
        let mask = DomainMask::open_interval(-2.0, 3.0, 0.25).unwrap();
        let e = NodeSet::from_predicate(&mask, |p| (0.0..=1.0).contains(&p[0]));
        let prob = CapacityProblem::global(&mask, e.clone(), 0.6, 2.0, Weight::constant(1, 1.0).unwrap()).unwrap();
        assert!(prob.include_lp_term());
        let sol = solve_capacity(&prob).unwrap();
        assert!(sol.value >= e.len() as f64 * 0.25);
        let direct = capacity_energy(&prob, &sol.minimizer).unwrap();
        assert!((direct - sol.value).abs() < 1e-9 * direct);
    }

    #[test]
    fn input_errors() {
        let (mask, e, h) = setup();
        let w = Weight::constant(1, 1.0).unwrap();
        let empty = NodeSet::empty(mask.grid().len());
        assert!(CapacityProblem::relative(&mask, empty, h.clone(), 0.5, 2.0, w.clone()).is_err());
        assert!(CapacityProblem::relative(&mask, h.clone(), e.clone(), 0.5, 2.0, w.clone()).is_err());
        let big = DomainMask::full(Grid::line(0.0, 1e-3, 5000).unwrap());
        let e_big = NodeSet::from_indices(5000, [2500]).unwrap();
        let prob = CapacityProblem::global(&big, e_big, 0.5, 2.0, w).unwrap();
        assert!(matches!(solve_capacity(&prob), Err(Error::ProblemTooLarge(_))));
    }

    #[test]
    fn neighbourhoods() {
        let mask = DomainMask::full(Grid::line(0.0, 0.1, 21).unwrap());
        let e = NodeSet::from_indices(21, [10]).unwrap();
        let r = RadiusField::boundary(&mask).unwrap();
        let (et, etr) = neighbourhood_family(&e, &mask, &r, 0.3).unwrap();
        // |x - 1| < 0.3 keeps 0.8..1.2; ties at exactly 0.3 are excluded
        assert_eq!(et.members(), &[8, 9, 10, 11, 12]);
        // R(x) = min(i + 1, 21 - i) h < 0.3
        assert_eq!(etr.members(), &[0, 1, 19, 20]);
    }
}
