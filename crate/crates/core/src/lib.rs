//! Simulation library for two-photon interference experiments: linear
//! two-mode optics, down-conversion pair ensembles, second-order
//! correlation scans, and a pulsed detection-event generator.

pub mod correlators;
pub mod eventsim;
pub mod fields;
pub mod harness;
pub mod rng;
pub mod sources;

pub use correlators::{CorrelationScan, FringeQuantity, MetaValue, ScanVariable};
pub use eventsim::{
    CoincidenceCounts, DetectionEvent, Detector, EventError, EventSimConfig, NormalizationMode,
};
pub use harness::{RunConfig, RunError, RunMode};
pub use fields::{ComplexAmplitude, FieldPair, TwoModeTransfer};
pub use sources::{
    CoherentSourceConfig, InvalidConfig, SpdcEnsembleConfig, SpdcPair, SpectrumStats,
};
