//! Joint transmit-beamformer and hybrid-RIS coefficient design for integrated
//! sensing and communication, plus the Monte-Carlo harness that sweeps it.

pub mod bf_design;
pub mod channel;
pub mod error;
pub mod linalg;
pub mod optimizer;
pub mod ris_design;
pub mod rng;
pub mod sdp;
pub mod sim;
pub mod sysmodel;
pub mod units;

pub use error::{IsacError, Result};
pub use channel::{ChannelSet, FadingParams, ScenarioGeometry};
pub use optimizer::{AlternationTrace, Scheme, TraceStatus};
pub use sdp::{SdpProblem, SdpSolution, SdpStatus, SolverOptions};
pub use sim::{Profile, RowStatus, SimulationConfig, SweepResult, SweepVariable};
pub use sysmodel::{BeamformerSet, DesignConfig, HybridRisSpec, RisState};
