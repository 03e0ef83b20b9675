//! A small version of the main ratio sweep: random band-limited fields,
//! boundedness ratios for M_R, and their drift under refinement.

use fracmax::experiments::{main_sweep, MainSweepConfig};
use fracmax::report::ExperimentReport;

fn main() -> fracmax::error::Result<()> {
    let cfg = MainSweepConfig {
        fields: 10,
        nodes: 64,
        s: vec![0.5],
        p: vec![2.0],
        eps: vec![0.5],
        ..Default::default()
    };
    let rep = main_sweep(&cfg)?;
    for c in &rep.cases {
        println!(
            "{}: max ratio {:.4} (coarse) {:.4} (fine), drift {:.3}",
            c.case_id, c.max_ratio_coarse, c.max_ratio_fine, c.drift
        );
    }
    println!("all gates pass: {}", rep.passed());
    Ok(())
}
