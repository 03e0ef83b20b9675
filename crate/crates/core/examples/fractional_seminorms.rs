//! Weighted fractional seminorms of sin(2πx) on [0, 1], plain and with the
//! R-modified kernel.

use fracmax::grid::{DomainMask, RadiusField, ScalarField};
use fracmax::seminorm::{classical_seminorm, lp_norm, sobolev_norm, weighted_seminorm, SeminormParams};
use fracmax::weights::Weight;

fn main() -> fracmax::error::Result<()> {
    let mask = DomainMask::unit_interval(200)?;
    let f = ScalarField::from_fn(&mask, |x| (2.0 * std::f64::consts::PI * x[0]).sin())?;
    let (s, p) = (0.5, 2.0);
    println!("classical |f|_(s,p) = {:.6}", classical_seminorm(&f, s, p)?);
    println!("||f||_p = {:.6}", lp_norm(&f, p)?);
    for spec in ["const:1.0", "pow:eps=0.5", "pow:eps=0.9"] {
        let params = SeminormParams::new(s, p, Weight::parse(spec, 1)?)?;
        let with_r = params.clone().with_radius(RadiusField::boundary(&mask)?);
        println!(
            "{spec:>12}: seminorm {:.6}, with R = dist(., dG) {:.6}, full norm {:.6}",
            weighted_seminorm(&f, &params)?,
            weighted_seminorm(&f, &with_r)?,
            sobolev_norm(&f, &params)?
        );
    }
    Ok(())
}
