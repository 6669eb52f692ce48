//! Benchmark-only crate; the measurements live in `benches/engine.rs`.
//!
//! Shared fixtures for the benchmarks are defined here so the bench file
//! stays focused on what is being timed.

use qsdc_core::{
    ChannelModel, DetectorModel, SessionConfig, SourceModel, StationOptics, SystemParams,
};

/// The reference bench system at the given intensity and round-trip
/// attenuation.
pub fn bench_params(mu: f64, alpha_rt_db: f64) -> SystemParams {
    SystemParams {
        source: SourceModel::new(mu).expect("valid intensity"),
        channel: ChannelModel::from_round_trip_db(alpha_rt_db).expect("valid attenuation"),
        optics: StationOptics::balanced(4.3, 2.3, 0.7).expect("balanced tap exists"),
        detector_a: DetectorModel::new(0.7, 8e-8, 0.9737).expect("valid detector"),
        detector_b: DetectorModel::new(0.7, 8e-8, 0.9948).expect("valid detector"),
    }
}

/// A session at the reference operating point.
pub fn bench_session(mu: f64, alpha_rt_db: f64) -> SessionConfig {
    SessionConfig {
        params: bench_params(mu, alpha_rt_db),
        dber_abort_threshold: 0.04,
        check_fraction: 1.0,
    }
}
