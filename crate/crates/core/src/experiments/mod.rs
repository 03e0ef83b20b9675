//! End-to-end experiments. Each has a config with defaults matching the
//! reference runs, a runner, and a report type.

pub mod capacity_sweeps;
pub mod counterexample;
pub mod domination;
pub mod fields;
pub mod mollifier;
pub mod ratio;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

pub use capacity_sweeps::{
    ahlfors_experiment, ahlfors_scaling_fit, capacity_comparison_sweep, comparison_experiment, AhlforsConfig, AhlforsReport,
    ComparisonConfig, ComparisonReport,
};
pub use counterexample::{counterexample_blowup, CounterexampleConfig, CounterexampleReport, Regime};
pub use domination::{domination_sweep, pointwise_domination_check, DominationConfig, DominationReport};
pub use mollifier::{
    mollifier_convergence, mollifier_experiment, weak_type_capacity_check, weak_type_experiment, MollifierConfig, MollifierReport,
    Profile, WeakTypeConfig, WeakTypeReport,
};
pub use ratio::{
    boundedness_ratio, holder_sweep, lipschitz_sweep, main_sweep, theorem11_ratio, HolderSweepConfig, HolderSweepReport,
    LipschitzSweepConfig, LipschitzSweepReport, MainSweepConfig, MainSweepReport, RadiusMode,
};

use crate::error::{Error, Result};
use crate::report::{ExperimentReport, Gate, Table};

pub const NAMES: [&str; 9] = [
    "counterexample",
    "main-sweep",
    "lipschitz",
    "holder",
    "domination",
    "mollifier",
    "weak-type",
    "ahlfors",
    "capacity-comparison",
];

/// The report of any experiment.
#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum AnyReport {
    Counterexample(CounterexampleReport),
    MainSweep(MainSweepReport),
    Lipschitz(LipschitzSweepReport),
    Holder(HolderSweepReport),
    Domination(DominationReport),
    Mollifier(MollifierReport),
    WeakType(WeakTypeReport),
    Ahlfors(AhlforsReport),
    Comparison(ComparisonReport),
}

macro_rules! each {
    ($self:expr, $r:ident => $e:expr) => {
        match $self {
            AnyReport::Counterexample($r) => $e,
            AnyReport::MainSweep($r) => $e,
            AnyReport::Lipschitz($r) => $e,
            AnyReport::Holder($r) => $e,
            AnyReport::Domination($r) => $e,
            AnyReport::Mollifier($r) => $e,
            AnyReport::WeakType($r) => $e,
            AnyReport::Ahlfors($r) => $e,
            AnyReport::Comparison($r) => $e,
        }
    };
}

impl ExperimentReport for AnyReport {
    fn name(&self) -> &'static str {
        each!(self, r => r.name())
    }

    fn gates(&self) -> Vec<Gate> {
        each!(self, r => r.gates())
    }

    fn table(&self) -> Table {
        each!(self, r => r.table())
    }
}

/// Fills a config from a JSON object; missing keys keep their defaults.
pub fn config_from<C: DeserializeOwned>(params: &Value) -> Result<C> {
    serde_json::from_value(params.clone()).map_err(|e| Error::Parse(format!("config: {e}")))
}

/// The resolved config of `name` as JSON, defaults filled in.
pub fn resolved_config(name: &str, params: &Value) -> Result<Value> {
    fn go<C: DeserializeOwned + Serialize>(p: &Value) -> Result<Value> {
        Ok(serde_json::to_value(config_from::<C>(p)?)?)
    }
    match name {
        "counterexample" => go::<CounterexampleConfig>(params),
        "main-sweep" => go::<MainSweepConfig>(params),
        "lipschitz" => go::<LipschitzSweepConfig>(params),
        "holder" => go::<HolderSweepConfig>(params),
        "domination" => go::<DominationConfig>(params),
        "mollifier" => go::<MollifierConfig>(params),
        "weak-type" => go::<WeakTypeConfig>(params),
        "ahlfors" => go::<AhlforsConfig>(params),
        "capacity-comparison" => go::<ComparisonConfig>(params),
        _ => Err(Error::invalid(format!("unknown experiment '{name}'; known: {}", NAMES.join(", ")))),
    }
}

/// Runs experiment `name` with `params` layered over its defaults.
pub fn run_experiment(name: &str, params: &Value) -> Result<AnyReport> {
    Ok(match name {
        "counterexample" => AnyReport::Counterexample(counterexample_blowup(&config_from(params)?)?),
        "main-sweep" => AnyReport::MainSweep(main_sweep(&config_from(params)?)?),
        "lipschitz" => AnyReport::Lipschitz(lipschitz_sweep(&config_from(params)?)?),
        "holder" => AnyReport::Holder(holder_sweep(&config_from(params)?)?),
        "domination" => AnyReport::Domination(domination_sweep(&config_from(params)?)?),
        "mollifier" => AnyReport::Mollifier(mollifier_experiment(&config_from(params)?)?),
        "weak-type" => AnyReport::WeakType(weak_type_experiment(&config_from(params)?)?),
        "ahlfors" => AnyReport::Ahlfors(ahlfors_experiment(&config_from(params)?)?),
        "capacity-comparison" => AnyReport::Comparison(comparison_experiment(&config_from(params)?)?),
        _ => return Err(Error::invalid(format!("unknown experiment '{name}'; known: {}", NAMES.join(", ")))),
    })
}
