//! cap(E, E_t) ~ t^(n - λ - sp) for the middle-thirds Cantor set, λ = log 2 / log 3.

use fracmax::experiments::ahlfors_scaling_fit;
use fracmax::geometry::build_cantor;
use fracmax::grid::DomainMask;

fn main() -> fracmax::error::Result<()> {
    let h = 3f64.powi(-6);
    let mask = DomainMask::open_interval(-2.0, 3.0, h)?;
    let e = build_cantor(5, mask.grid(), 0.0, 1.0)?;
    let lambda = 2f64.ln() / 3f64.ln();
    let t: Vec<f64> = (2..=5).map(|k| 3f64.powi(-k)).collect();
    let fit = ahlfors_scaling_fit(&e, &mask, lambda, 0.5, 2.0, &t)?;
    for r in &fit.rows {
        println!("t = {:.5}: cap = {:.5e} ({} free nodes)", r.t, r.capacity, r.free_nodes);
    }
    println!("slope {:.4}, expected {:.4}", fit.slope, fit.expected_slope);
    Ok(())
}
