//! Flat JSON run configuration shared by every subcommand.
//!
//! Every field has a default matching the reference bench parameters, so an
//! empty object (or no file at all) describes the standard system. Unknown
//! keys are rejected to catch typos early.

use serde::{Deserialize, Serialize};
use std::path::Path;

use qsdc_core::{
    ChannelModel, DetectorModel, Error, Result, SessionConfig, SourceModel, StationOptics,
    SystemParams,
};
use qsdc_core::rate::CapacityOptions;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Signal intensity (mean photon number per pulse).
    pub mu: f64,
    /// Round-trip attenuation in dB for single-point commands.
    pub attenuation_db: f64,
    pub pulses: u64,
    pub seed: u64,
    pub dber_abort_threshold: f64,
    /// Fraction of encode rounds sacrificed to error estimation.
    pub check_fraction: f64,
    /// Prior weight of the zero bit in the two-photon leakage bound.
    pub p0: f64,
    pub encode_loop_loss_db: f64,
    pub short_arm_loss_db: f64,
    /// Tap ratio toward the encoding loop; null balances the control and
    /// return paths automatically.
    pub split_ratio_k: Option<f64>,
    pub eta_d_a: f64,
    pub eta_d_b: f64,
    pub y0_a: f64,
    pub y0_b: f64,
    pub visibility_ba: f64,
    pub visibility_bab: f64,
    pub estimator: String,
    pub include_two_photon_term: bool,
    pub alpha_start: f64,
    pub alpha_stop: f64,
    pub alpha_step: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub nu3: f64,
    pub v_pi: f64,
    pub c_max: f64,
    pub v_start: f64,
    pub v_stop: f64,
    pub v_step: f64,
    pub phase_offset: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mu: 0.01,
            attenuation_db: 0.0,
            pulses: 1_000_000,
            seed: 42,
            dber_abort_threshold: 0.04,
            check_fraction: 1.0,
            p0: 0.5,
            encode_loop_loss_db: 4.3,
            short_arm_loss_db: 2.3,
            split_ratio_k: None,
            eta_d_a: 0.7,
            eta_d_b: 0.7,
            y0_a: 8e-8,
            y0_b: 8e-8,
            visibility_ba: 0.9737,
            visibility_bab: 0.9948,
            estimator: "gllp".into(),
            include_two_photon_term: true,
            alpha_start: 0.0,
            alpha_stop: 20.0,
            alpha_step: 0.1,
            nu1: 0.07,
            nu2: 0.0445,
            nu3: 0.03,
            v_pi: 4.8,
            c_max: 20_000.0,
            v_start: -6.0,
            v_stop: 6.0,
            v_step: 0.1,
            phase_offset: 0.0,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Domain(format!("cannot read config {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Domain(format!("invalid config {}: {e}", path.display())))
    }

    /// Builds the physical system at the given intensity and round-trip
    /// attenuation.
    pub fn system_params(&self, mu: f64, alpha_rt_db: f64) -> Result<SystemParams> {
        let optics = match self.split_ratio_k {
            Some(k) => StationOptics::new(self.encode_loop_loss_db, self.short_arm_loss_db, k)?,
            None => StationOptics::balanced(
                self.encode_loop_loss_db,
                self.short_arm_loss_db,
                self.eta_d_a,
            )?,
        };
        Ok(SystemParams {
            source: SourceModel::new(mu)?,
            channel: ChannelModel::from_round_trip_db(alpha_rt_db)?,
            optics,
            detector_a: DetectorModel::new(self.eta_d_a, self.y0_a, self.visibility_ba)?,
            detector_b: DetectorModel::new(self.eta_d_b, self.y0_b, self.visibility_bab)?,
        })
    }

    pub fn session_config(&self, mu: f64, alpha_rt_db: f64) -> Result<SessionConfig> {
        Ok(SessionConfig {
            params: self.system_params(mu, alpha_rt_db)?,
            dber_abort_threshold: self.dber_abort_threshold,
            check_fraction: self.check_fraction,
        })
    }

    pub fn capacity_options(&self, include_override: Option<bool>) -> CapacityOptions {
        CapacityOptions {
            p0: self.p0,
            include_two_photon_term: include_override.unwrap_or(self.include_two_photon_term),
        }
    }

    pub fn decoy_nus(&self) -> (f64, f64, f64) {
        (self.nu1, self.nu2, self.nu3)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// An inclusive arithmetic grid `start, start + step, ..., stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !start.is_finite() || !stop.is_finite() || !step.is_finite() {
            return Err(Error::Domain("grid bounds must be finite".into()));
        }
        if step <= 0.0 {
            return Err(Error::Domain(format!(
                "grid step must be positive, got {step}"
            )));
        }
        if stop < start {
            return Err(Error::Domain(format!(
                "grid stop {stop} lies before start {start}"
            )));
        }
        let span = (stop - start) / step;
        if (span - span.round()).abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "grid [{start}, {stop}] is not an integer number of {step} steps"
            )));
        }
        Ok(Self { start, stop, step })
    }

    pub fn values(&self) -> Vec<f64> {
        let steps = ((self.stop - self.start) / self.step).round() as u64;
        (0..=steps)
            .map(|i| self.start + i as f64 * self.step)
            .collect()
    }
}

/// Parses a `start:stop:step` grid argument.
pub fn parse_grid_spec(text: &str) -> std::result::Result<GridSpec, String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected start:stop:step, got '{text}'"));
    }
    let mut nums = [0.0f64; 3];
    for (slot, part) in nums.iter_mut().zip(&parts) {
        *slot = part
            .parse()
            .map_err(|_| format!("'{part}' is not a number"))?;
    }
    GridSpec::new(nums[0], nums[1], nums[2]).map_err(|e| e.to_string())
}
