//! Round-loop orchestration and scenario plumbing.

mod config;
mod runner;
mod supply;
mod trace;

pub use config::{OutputPaths, ScenarioConfig, SellerConfig};
pub use runner::{build_learners, run_scenario, run_with_agents, scenario_supply, PricingAgent};
pub use supply::{make_supply_schedule, SupplySpec};
pub use trace::{read_run, write_run, RoundRecord, RunManifest, Trace};
