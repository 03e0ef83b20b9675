//! Exact distances on a grid: to a two-point set, to the boundary of an
//! interval, and the strict sublevel set {dist < t}.

use fracmax::grid::{boundary_distance, distance_to_set, sublevel_mask, DomainMask, NodeSet};

fn main() -> fracmax::error::Result<()> {
    let mask = DomainMask::open_interval(0.0, 1.0, 1.0 / 16.0)?;
    let g = mask.grid();
    let e = NodeSet::from_predicate(&mask, |x| (x[0] - 0.25).abs() < 1e-9 || (x[0] - 0.75).abs() < 1e-9);
    let d = distance_to_set(&mask, &e)?;
    let bd = boundary_distance(&mask);
    println!("{:>8} {:>10} {:>10}", "x", "dist(E)", "dist(dG)");
    for &i in mask.nodes() {
        println!("{:8.4} {:10.4} {:10.4}", g.coord(i)[0], d.get(i), bd.get(i));
    }
    let near = sublevel_mask(&d, 0.125);
    println!("{} nodes with dist(x, E) < 1/8", near.len());
    Ok(())
}
