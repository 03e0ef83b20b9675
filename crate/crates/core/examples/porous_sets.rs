//! A Cantor set and a dyadic gap set: porosity and box-counting dimension.

use fracmax::geometry::{box_dimension_estimate, build_cantor, build_gap_set, porosity_check, DyadicGapSet};
use fracmax::grid::Grid;

fn main() -> fracmax::error::Result<()> {
    let h = 3f64.powi(-8);
    let grid = Grid::line_covering(-0.5, 1.5, h)?;
    let cantor = build_cantor(6, &grid, 0.0, 1.0)?;
    let scales: Vec<f64> = (1..=5).map(|k| 3f64.powi(-k)).collect();
    let por = porosity_check(&cantor, &grid, 0.1, &scales)?;
    println!("Cantor level 6: {} nodes, porosity constant ~ {:.4}", cantor.len(), por.kappa_estimate);
    let radii: Vec<f64> = (2..=6).map(|k| 3f64.powi(-k)).collect();
    let dim = box_dimension_estimate(&cantor, &grid, &radii)?;
    println!("box dimension ~ {:.4} (log 2 / log 3 = {:.4})", dim.estimate, 2f64.ln() / 3f64.ln());

    let mask = DyadicGapSet::standard_domain(2f64.powi(-10))?;
    let gap = build_gap_set(2, 4, &mask)?;
    let (_, clipped) = gap.radius()?;
    println!(
        "gap set M = 2, N = 4: {} nodes, {} removed intervals, radius clipped: {clipped}",
        gap.set.len(),
        gap.intervals.len()
    );
    Ok(())
}
