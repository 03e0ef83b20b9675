//! Muckenhoupt A_p constants of power weights |x|^(eps - 1) on a dyadic window,
//! and whether the tail of ω(x)|x|^(-sp) is integrable.

use fracmax::grid::Grid;
use fracmax::weights::{ap_constant_estimate, tail_integrability, Weight};

fn main() -> fracmax::error::Result<()> {
    let window = Grid::line(-1.0, 1.0 / 256.0, 513)?;
    for eps in [0.25, 0.5, 0.75, 1.0] {
        let w = Weight::power_origin(1, eps)?;
        let a2 = ap_constant_estimate(&w, 2.0, &window, 6)?;
        let tail = tail_integrability(&w, 0.5, 2.0, 1.0, &[2.0, 4.0, 8.0, 16.0, 32.0, 64.0])?;
        println!("eps = {eps:4}: A_2 ~ {:.4} over {} cubes, tail {:?}", a2.value, a2.cubes_tested, tail.class);
    }
    Ok(())
}
