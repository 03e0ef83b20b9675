//! M_R f for a sawtooth on [0, 1] with three radius fields, comparing the
//! fast path against the reference.

use fracmax::grid::{DomainMask, RadiusField, ScalarField};
use fracmax::maxop::{local_maximal, local_maximal_fast};

fn main() -> fracmax::error::Result<()> {
    let mask = DomainMask::unit_interval(128)?;
    let f = ScalarField::from_fn(&mask, |x| ((8.0 * x[0]).fract() - 0.5).abs())?;
    for spec in ["zero", "boundary", "holder:0.5,1"] {
        let r = RadiusField::parse_mode(spec, &mask)?;
        let slow = local_maximal(&f, &r)?.values;
        let fast = local_maximal_fast(&f, &r)?.values;
        let gap = slow.values().iter().zip(fast.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!(
            "{spec:>14}: max M_R f = {:.4}, min = {:.4}, |fast - reference| <= {gap:.1e}",
            slow.max_inside(),
            slow.min_inside()
        );
    }
    Ok(())
}
