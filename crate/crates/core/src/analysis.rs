//! Whole-system evaluation: capacity at one operating point, cutoff
//! searches along the round-trip attenuation axis, and the analytic
//! expectations a Monte Carlo session is compared against.

use crate::error::{Error, Result};
use crate::estimators::{
    decoy_estimate, gllp_estimate, DecoyLevels, DecoyObservations, EstimatorKind,
    EstimatorOutput, IntensityObservation,
};
use crate::model::{
    link_budget, ChannelModel, DetectorModel, LinkBudget, SourceModel, StationOptics,
};
use crate::rate::{
    error_overall, find_cutoff, gain_error_point, gain_overall, secrecy_capacity,
    CapacityBreakdown, CapacityOptions, Cutoff, YieldConvention,
};

/// One complete system configuration: source, fiber, station optics, the
/// sender's control detector (`a`) and the receiver's decoder (`b`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub source: SourceModel,
    pub channel: ChannelModel,
    pub optics: StationOptics,
    pub detector_a: DetectorModel,
    pub detector_b: DetectorModel,
}

impl SystemParams {
    pub fn link_budget(&self) -> Result<LinkBudget> {
        link_budget(&self.channel, &self.optics, &self.detector_a, &self.detector_b)
    }

    /// Same system moved to a different round-trip attenuation.
    pub fn with_round_trip_db(&self, db: f64) -> Result<Self> {
        Ok(Self {
            channel: ChannelModel::from_round_trip_db(db)?,
            ..*self
        })
    }

    /// Same system run at a different signal intensity.
    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        Ok(Self {
            source: SourceModel::new(mu)?,
            ..*self
        })
    }
}

/// Closed-form per-pulse observables of a system configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticStatistics {
    pub q_ba: f64,
    pub e_ba: f64,
    pub q_bab: f64,
    pub e_bab: f64,
}

/// Evaluates the closed-form control-path and round-trip gain and error
/// rates of a configuration.
pub fn expected_statistics(params: &SystemParams) -> Result<AnalyticStatistics> {
    let link = params.link_budget()?;
    let point = gain_error_point(
        &params.source,
        &link,
        &params.detector_a,
        &params.detector_b,
        YieldConvention::Approximate,
    )?;
    Ok(AnalyticStatistics {
        q_ba: point.q_ba,
        e_ba: point.e_ba,
        q_bab: point.q_bab,
        e_bab: point.e_bab,
    })
}

/// Attack-free control-path observables at an arbitrary source intensity,
/// used to feed the decoy estimators.
pub fn intensity_observation(params: &SystemParams, intensity: f64) -> Result<IntensityObservation> {
    let link = params.link_budget()?;
    let y0 = params.detector_a.dark_count_prob();
    Ok(IntensityObservation {
        gain: gain_overall(intensity, link.eta_ba, y0)?,
        error_rate: error_overall(
            intensity,
            link.eta_ba,
            y0,
            params.detector_a.intrinsic_error(),
        )?,
    })
}

/// Attack-free observables at all four decoy intensities.
pub fn decoy_observations(params: &SystemParams, levels: &DecoyLevels) -> Result<DecoyObservations> {
    Ok(DecoyObservations {
        signal: intensity_observation(params, levels.mu())?,
        decoy1: intensity_observation(params, levels.nu1())?,
        decoy2: intensity_observation(params, levels.nu2())?,
        decoy3: intensity_observation(params, levels.nu3())?,
        vacuum_gain: params.detector_a.dark_count_prob(),
    })
}

/// Runs the selected estimator on the attack-free observables of this
/// configuration. Decoy estimation anchors the level set at the source's
/// signal intensity, so `decoy_nus` supplies only the three weak levels.
pub fn estimate(
    params: &SystemParams,
    estimator: EstimatorKind,
    decoy_nus: Option<(f64, f64, f64)>,
) -> Result<EstimatorOutput> {
    let link = params.link_budget()?;
    let mu = params.source.mu();
    let y0_a = params.detector_a.dark_count_prob();
    match estimator {
        EstimatorKind::Gllp => {
            let q_ba = gain_overall(mu, link.eta_ba, y0_a)?;
            let e_ba = error_overall(mu, link.eta_ba, y0_a, params.detector_a.intrinsic_error())?;
            gllp_estimate(mu, q_ba, e_ba, y0_a, &link)
        }
        EstimatorKind::Decoy => {
            let (nu1, nu2, nu3) = decoy_nus.ok_or_else(|| {
                Error::InfeasibleConfig(
                    "decoy estimation needs the three weak intensity levels".into(),
                )
            })?;
            let levels = DecoyLevels::new(mu, nu1, nu2, nu3)?;
            let obs = decoy_observations(params, &levels)?;
            decoy_estimate(
                &levels,
                &obs,
                link.eta_ba,
                y0_a,
                &link,
                params.source.n_max(),
            )
        }
    }
}

/// Secrecy-capacity lower bound of one configuration under the selected
/// estimator.
pub fn capacity_point(
    params: &SystemParams,
    estimator: EstimatorKind,
    decoy_nus: Option<(f64, f64, f64)>,
    options: &CapacityOptions,
) -> Result<CapacityBreakdown> {
    let stats = expected_statistics(params)?;
    let output = estimate(params, estimator, decoy_nus)?;
    secrecy_capacity(
        stats.q_bab,
        stats.e_bab,
        output.e1_upper,
        output.e2_upper,
        &output.gains,
        options,
    )
}

/// Locates where the capacity crosses zero along the round-trip attenuation
/// axis, searching `[lo_db, hi_db]` to `resolution_db`.
pub fn cutoff_round_trip_db(
    params: &SystemParams,
    estimator: EstimatorKind,
    decoy_nus: Option<(f64, f64, f64)>,
    options: &CapacityOptions,
    lo_db: f64,
    hi_db: f64,
    resolution_db: f64,
) -> Result<Cutoff> {
    find_cutoff(
        |alpha_rt| {
            let moved = params.with_round_trip_db(alpha_rt)?;
            Ok(capacity_point(&moved, estimator, decoy_nus, options)?.c_s)
        },
        lo_db,
        hi_db,
        resolution_db,
    )
}
