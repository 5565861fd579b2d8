//! Fixtures shared by the solver benchmarks.

use isac_core::optimizer::initialize_ris;
use isac_core::sim::{realization_channel, Profile, SimulationConfig};
use isac_core::{ChannelSet, DesignConfig, HybridRisSpec, RisState};

pub struct Fixture {
    pub channel: ChannelSet,
    pub spec: HybridRisSpec,
    pub design: DesignConfig,
    pub start: RisState,
}

/// First realization of the desk profile at the lowest sweep value.
pub fn desk() -> Fixture {
    let cfg = SimulationConfig::from_toml_str("", Profile::Desk).expect("desk profile");
    let (spec, design) = cfg.cell(cfg.sweep.values[0]);
    let channel = realization_channel(&cfg, 0).expect("desk channel").1;
    let start = initialize_ris(&spec, cfg.seed);
    Fixture { channel, spec, design, start }
}
