//! Time-domain simulation: pulses, propagation, cross-resonance and iSWAP
//! experiments, and gate metrics.

pub mod cr;
pub mod evolve;
pub mod iswap;
pub mod metrics;
pub mod pulse;

pub use evolve::{evolve, EvolveOptions, Integrator, Propagator, Trajectory};
pub use metrics::{gate_metrics, GateMetrics};
pub use pulse::{flattop_value, FlatTopPulse, PulseSchedule};
