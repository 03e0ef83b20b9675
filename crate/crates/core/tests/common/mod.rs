//! Property checks shared by the proptest suite and the acceptance harness.
//! Each returns `Err(reason)` on the first violation.

#![allow(dead_code)]

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fracmax::capacity::{capacity_energy, capacity_subadditivity_check, solve_capacity, CapacityProblem};
use fracmax::experiments::capacity_sweeps::neighbourhood;
use fracmax::experiments::mollifier::{window, Profile};
use fracmax::experiments::{mollifier_convergence, weak_type_capacity_check};
use fracmax::grid::{DomainMask, Grid, NodeSet, RadiusField, ScalarField};
use fracmax::maxop::{local_maximal, local_maximal_fast};
use fracmax::seminorm::{classical_seminorm_pow, kernel_energy, weighted_seminorm, KernelSpec, SeminormParams};
use fracmax::weights::{ap_constant_estimate, tail_integrability, TailClass, Weight};

pub type Check = Result<(), String>;

pub const NODES: usize = 40;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn mask() -> Arc<DomainMask> {
    DomainMask::unit_interval(NODES).unwrap()
}

fn field(m: &Arc<DomainMask>, v: &[f64]) -> ScalarField {
    ScalarField::from_inside(m, v).unwrap()
}

/// `t · dist(·, ∂G)` for t in [0, 1].
fn radius(m: &Arc<DomainMask>, t: f64) -> RadiusField {
    let b = RadiusField::boundary(m).unwrap();
    RadiusField::new(m, b.values().iter().map(|r| t * r).collect()).unwrap()
}

fn maximal(f: &ScalarField, r: &RadiusField) -> Vec<f64> {
    local_maximal(f, r).unwrap().values.inside_values()
}

pub fn maximal_sublinear(a: &[f64], b: &[f64], t: f64) -> Check {
    let m = mask();
    let r = radius(&m, t);
    let sum: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
    let (ma, mb, ms) = (maximal(&field(&m, a), &r), maximal(&field(&m, b), &r), maximal(&field(&m, &sum), &r));
    for i in 0..ms.len() {
        ensure!(ms[i] <= ma[i] + mb[i] + 1e-12 * (1.0 + ma[i] + mb[i]), "node {i}: {} > {} + {}", ms[i], ma[i], mb[i]);
    }
    Ok(())
}

pub fn maximal_homogeneous(a: &[f64], c: f64, t: f64) -> Check {
    let m = mask();
    let r = radius(&m, t);
    let scaled: Vec<f64> = a.iter().map(|x| c * x).collect();
    let (ma, mc) = (maximal(&field(&m, a), &r), maximal(&field(&m, &scaled), &r));
    for i in 0..ma.len() {
        ensure!((mc[i] - c.abs() * ma[i]).abs() <= 1e-12 * (1.0 + mc[i]), "node {i}: {} vs |{c}| {}", mc[i], ma[i]);
    }
    Ok(())
}

/// R ≤ R' gives M_R f ≤ M_R' f, and M_R f ≥ |f|.
pub fn maximal_monotone(a: &[f64], t1: f64, t2: f64) -> Check {
    let m = mask();
    let (lo, hi) = (t1.min(t2), t1.max(t2));
    let f = field(&m, a);
    let (small, large) = (maximal(&f, &radius(&m, lo)), maximal(&f, &radius(&m, hi)));
    for i in 0..small.len() {
        ensure!(small[i] <= large[i], "node {i}: radius {lo} gives {} > {}", small[i], large[i]);
        ensure!(small[i] >= a[i].abs(), "node {i}: M_R f = {} < |f| = {}", small[i], a[i].abs());
    }
    Ok(())
}

fn agree(slow: &[f64], fast: &[f64]) -> Check {
    for i in 0..slow.len() {
        ensure!((slow[i] - fast[i]).abs() <= 1e-12 * slow[i].max(1.0), "node {i}: {} vs {}", slow[i], fast[i]);
    }
    Ok(())
}

pub fn fast_matches_reference(a: &[f64], t: f64) -> Check {
    let m = mask();
    let r = radius(&m, t);
    let f = field(&m, a);
    agree(&maximal(&f, &r), &local_maximal_fast(&f, &r).unwrap().values.inside_values())
}

/// Same on a disc in the plane, values drawn from `seed`.
pub fn fast_matches_reference_plane(seed: u64, t: f64) -> Check {
    let grid = Grid::plane([0.05, 0.05], 0.1, [10, 10]).unwrap();
    let m = DomainMask::from_predicate(grid, |x| (x[0] - 0.5).hypot(x[1] - 0.5) < 0.45).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<f64> = (0..m.count()).map(|_| rng.gen_range(-5.0..5.0)).collect();
    let f = ScalarField::from_inside(&m, &v).unwrap();
    let r = radius(&m, t);
    agree(&maximal(&f, &r), &local_maximal_fast(&f, &r).unwrap().values.inside_values())
}

pub fn seminorm_triangle_homogeneity(a: &[f64], b: &[f64], c: f64, s: f64, p: f64) -> Check {
    let m = mask();
    let params = SeminormParams::new(s, p, Weight::power_origin(1, 0.5).unwrap()).unwrap();
    let norm = |v: &[f64]| weighted_seminorm(&field(&m, v), &params).unwrap();
    let sum: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
    let (na, nb, ns) = (norm(a), norm(b), norm(&sum));
    ensure!(ns <= (na + nb) * (1.0 + 1e-12), "triangle: {ns} > {na} + {nb}");
    let scaled: Vec<f64> = a.iter().map(|x| c * x).collect();
    let nc = norm(&scaled);
    ensure!((nc - c.abs() * na).abs() <= 1e-10 * (1.0 + na), "homogeneity: {nc} vs |{c}| {na}");
    Ok(())
}

/// Without R the split kernel `|d|^(eps-n) |d|^(-eps-sp)` is the classical one.
pub fn split_ignores_eps(a: &[f64], s: f64, p: f64, eps: f64) -> Check {
    let f = field(&mask(), a);
    let classical = classical_seminorm_pow(&f, s, p).unwrap();
    let split = kernel_energy(&f, &KernelSpec::split(1, s, p, eps), p, None).unwrap();
    ensure!((split - classical).abs() <= 1e-10 * classical, "eps = {eps}: {split} vs {classical}");
    Ok(())
}

pub fn reflection_invariance(a: &[f64], y0: f64) -> Check {
    let w = Weight::power_dist(1, 0.4, vec![[y0, 0.0], [0.3, 0.0]]).unwrap();
    for z in [-0.7, -0.2, 0.15, 0.6] {
        let (u, v) = (w.reflect().evaluate(&[z]).unwrap(), w.evaluate(&[-z]).unwrap());
        ensure!(u == v, "reflected weight at {z}: {u} vs {v}");
    }
    let f = field(&mask(), a);
    let plain = weighted_seminorm(&f, &SeminormParams::new(0.5, 2.0, w.clone()).unwrap()).unwrap();
    let refl = weighted_seminorm(&f, &SeminormParams::new(0.5, 2.0, w.reflect()).unwrap()).unwrap();
    ensure!((plain - refl).abs() <= 1e-12 * plain, "seminorm {plain} vs reflected {refl}");
    Ok(())
}

/// Clamping an admissible φ to [0, 1] never raises the capacity energy; 200
/// random φ.
pub fn truncation_decreases_energy() -> Check {
    let m = DomainMask::open_interval(-1.0, 2.0, 1.0 / 16.0).unwrap();
    let e = NodeSet::from_predicate(&m, |x| (0.0..=1.0).contains(&x[0]));
    let h = neighbourhood(&e, &m, 0.5).unwrap();
    let prob = CapacityProblem::relative(&m, e.clone(), h.clone(), 0.6, 2.5, Weight::power_origin(1, 0.5).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for k in 0..200 {
        let raw: Vec<f64> = (0..m.grid().len())
            .map(|i| {
                if e.contains(i) {
                    1.0
                } else if h.contains(i) {
                    rng.gen_range(-1.5..2.5)
                } else {
                    0.0
                }
            })
            .collect();
        let cut: Vec<f64> = raw.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        let before = capacity_energy(&prob, &ScalarField::new(&m, raw).unwrap()).unwrap();
        let after = capacity_energy(&prob, &ScalarField::new(&m, cut).unwrap()).unwrap();
        ensure!(after <= before * (1.0 + 1e-12), "phi #{k}: {after} > {before}");
    }
    Ok(())
}

pub fn capacity_subadditive_monotone() -> Check {
    let m = DomainMask::open_interval(-1.0, 2.0, 1.0 / 16.0).unwrap();
    let w = Weight::power_origin(1, 0.5).unwrap();
    let h = NodeSet::from_predicate(&m, |x| x[0] > -0.5 && x[0] < 1.5);
    let wide = NodeSet::from_predicate(&m, |x| x[0] > -0.9 && x[0] < 1.9);
    let e1 = NodeSet::from_predicate(&m, |x| (0.0..=0.4).contains(&x[0]));
    let e2 = NodeSet::from_predicate(&m, |x| (0.3..=1.0).contains(&x[0]));
    for p in [2.0, 1.5] {
        let base = CapacityProblem::relative(&m, e1.clone(), h.clone(), 0.5, p, w.clone()).unwrap();
        let rep = capacity_subadditivity_check(&e1, &e2, &base).unwrap();
        ensure!(rep.holds, "p = {p}: {rep:?}");
        let cap = |e: &NodeSet, hh: &NodeSet| {
            solve_capacity(&CapacityProblem::relative(&m, e.clone(), hh.clone(), 0.5, p, w.clone()).unwrap())
                .unwrap()
                .value
        };
        let small = cap(&e1, &h);
        let bigger_e = cap(&e1.union(&e2), &h);
        ensure!(small <= bigger_e * (1.0 + 1e-6), "p = {p}: growing E lowered the capacity, {small} > {bigger_e}");
        let bigger_h = cap(&e1, &wide);
        ensure!(bigger_h <= small * (1.0 + 1e-6), "p = {p}: growing H raised the capacity, {bigger_h} > {small}");
    }
    Ok(())
}

pub fn ap_constant_of_constants() -> Check {
    let grid = Grid::line(-1.0, 1.0 / 64.0, 129).unwrap();
    for c in [0.5, 1.0, 7.0] {
        for p in [1.5, 2.0, 4.0] {
            let est = ap_constant_estimate(&Weight::constant(1, c).unwrap(), p, &grid, 5).unwrap();
            ensure!(est.value == 1.0, "c = {c}, p = {p}: A_p = {}", est.value);
        }
    }
    Ok(())
}

/// ω = |x|^(eps - 1): the tail ∫_{|x|>1} |x|^(eps - 1 - sp) is finite iff eps < sp.
pub fn tail_classification() -> Check {
    let windows = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0];
    // every case keeps |eps - sp| >= 0.2, so the truncations settle or grow visibly
    let cases = [
        (0.2, 0.5, 2.0),
        (0.9, 0.3, 2.0),
        (0.5, 0.2, 1.5),
        (0.05, 0.2, 1.5),
        (0.8, 0.25, 2.0),
        (0.3, 0.25, 2.0),
        (0.5, 0.9, 1.2),
        (0.95, 0.5, 1.5),
        (0.6, 0.1, 3.0),
        (0.05, 0.1, 3.0),
        (0.7, 0.7, 1.5),
        (0.9, 0.25, 1.2),
        (0.9, 0.4, 1.5),
        (0.25, 0.4, 1.5),
        (1.0, 0.5, 1.0),
        (0.5, 0.8, 1.0),
        (0.75, 0.15, 2.5),
        (0.15, 0.15, 2.5),
        (0.85, 0.3, 1.0),
        (0.35, 0.6, 1.0),
    ];
    for (eps, s, p) in cases {
        let w = Weight::power_origin(1, eps).unwrap();
        let got = tail_integrability(&w, s, p, 1.0, &windows).unwrap().class;
        let want = if eps < s * p { TailClass::Finite } else { TailClass::Infinite };
        ensure!(got == want, "eps = {eps}, s = {s}, p = {p}: {got:?}, expected {want:?}");
    }
    Ok(())
}

pub fn weak_type_stable() -> Check {
    let m = window(64.0, 0.5).unwrap();
    let f = ScalarField::from_fn(&m, |x| Profile::Decay { decay: 1.0 }.eval(x[0])).unwrap();
    let w = Weight::power_origin(1, 0.25).unwrap();
    let res = weak_type_capacity_check(&f, 0.5, 1.2, &w, &[0.5, 0.25, 0.125, 0.0625, 0.03125]).unwrap();
    ensure!(res.rows.iter().all(|r| r.set_size > 0 && r.converged), "{:?}", res.rows);
    ensure!(res.k_spread < 10.0, "K spread {}", res.k_spread);
    Ok(())
}

pub fn mollifier_monotone() -> Check {
    let m = window(4.0, 2f64.powi(-7)).unwrap();
    let f = ScalarField::from_fn(&m, |x| Profile::Hat.eval(x[0])).unwrap();
    let w = Weight::power_origin(1, 0.5).unwrap();
    let rows = mollifier_convergence(&f, 0.75, 2.0, &w, &[1, 2, 3, 4, 5]).unwrap();
    for pair in rows.windows(2) {
        ensure!(pair[1].seminorm_pow < pair[0].seminorm_pow, "j = {}: seminorm rose", pair[1].j);
        ensure!(pair[1].norm < pair[0].norm, "j = {}: norm rose", pair[1].j);
    }
    Ok(())
}

fn vals(rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..NODES).map(|_| rng.gen_range(-5.0..5.0)).collect()
}

/// Every check, the input-driven ones on `cases` seeded random inputs.
pub fn suite(seed: u64, cases: usize) -> Vec<(&'static str, Check)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<(&'static str, Check)> = Vec::new();
    let mut run = |name: &'static str, f: &mut dyn FnMut(&mut ChaCha8Rng) -> Check| {
        let res = (0..cases).try_for_each(|_| f(&mut rng));
        out.push((name, res));
    };
    run("maximal_sublinear", &mut |r| {
        let (a, b) = (vals(r), vals(r));
        maximal_sublinear(&a, &b, r.gen())
    });
    run("maximal_homogeneous", &mut |r| {
        let a = vals(r);
        maximal_homogeneous(&a, r.gen_range(-4.0..4.0), r.gen())
    });
    run("maximal_radius_monotone_and_above_f", &mut |r| {
        let a = vals(r);
        maximal_monotone(&a, r.gen(), r.gen())
    });
    run("fast_vs_reference_1e-12", &mut |r| {
        let a = vals(r);
        fast_matches_reference(&a, r.gen())?;
        fast_matches_reference_plane(r.gen(), r.gen())
    });
    run("seminorm_triangle_homogeneity", &mut |r| {
        let (a, b) = (vals(r), vals(r));
        seminorm_triangle_homogeneity(&a, &b, r.gen_range(-3.0..3.0), r.gen_range(0.1..0.9), r.gen_range(1.0..3.5))
    });
    run("eps_independence_1e-10", &mut |r| {
        let a = vals(r);
        split_ignores_eps(&a, r.gen_range(0.1..0.9), r.gen_range(1.0..3.5), r.gen_range(0.05..0.95))
    });
    run("weight_reflection", &mut |r| {
        let a = vals(r);
        reflection_invariance(&a, r.gen_range(-0.5..0.5))
    });
    vec![
        ("truncation_decreases_energy", truncation_decreases_energy()),
        ("capacity_subadditive_monotone", capacity_subadditive_monotone()),
        ("ap_constant_one", ap_constant_of_constants()),
        ("tail_matches_eps_below_sp", tail_classification()),
        ("weak_type_stable", weak_type_stable()),
        ("mollifier_monotone", mollifier_monotone()),
    ]
    .into_iter()
    .for_each(|c| out.push(c));
    out
}
