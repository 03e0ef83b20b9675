//! The counterexample at small scale: M_R ψ_N stays above 1 on the half
//! intervals while the seminorm ratio is tracked level by level.

use fracmax::experiments::{counterexample_blowup, CounterexampleConfig};
use fracmax::report::ExperimentReport;

fn main() -> fracmax::error::Result<()> {
    let cfg = CounterexampleConfig {
        n_list: vec![1, 2],
        resolution: 9,
        ..Default::default()
    };
    let rep = counterexample_blowup(&cfg)?;
    for l in &rep.levels {
        println!(
            "N = {}: |psi|^p = {:.4e}, |M_R psi|^p = {:.4e}, ratio = {:.4e}, min on half intervals = {:.3}",
            l.n, l.psi_seminorm_pow, l.max_seminorm_pow, l.ratio, l.min_on_half_intervals
        );
    }
    for g in rep.gates() {
        println!("{} {}: {}", if g.passed { "PASS" } else { "FAIL" }, g.name, g.detail);
    }
    Ok(())
}
