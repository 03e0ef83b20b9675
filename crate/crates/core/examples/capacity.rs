//! Relative capacity of [0, 1] in shrinking neighbourhoods, for p = 2 (linear
//! solve) and p = 3 (projected gradient).

use fracmax::capacity::{solve_capacity, CapacityProblem};
use fracmax::experiments::capacity_sweeps::neighbourhood;
use fracmax::grid::{DomainMask, NodeSet};
use fracmax::weights::Weight;

fn main() -> fracmax::error::Result<()> {
    let mask = DomainMask::open_interval(-1.0, 2.0, 1.0 / 32.0)?;
    let e = NodeSet::from_predicate(&mask, |x| (0.0..=1.0).contains(&x[0]));
    for p in [2.0, 3.0] {
        for t in [0.5, 0.25, 0.125] {
            let h = neighbourhood(&e, &mask, t)?;
            let prob = CapacityProblem::relative(&mask, e.clone(), h, 0.5, p, Weight::constant(1, 1.0)?)?;
            let sol = solve_capacity(&prob)?;
            println!(
                "p = {p}, t = {t:5}: cap = {:.6} ({:?}, {} iterations)",
                sol.value, sol.method, sol.iterations
            );
        }
    }
    Ok(())
}
