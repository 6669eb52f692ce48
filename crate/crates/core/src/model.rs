//! Source, channel, detector, and interferometer-optics models, plus the
//! elementary photon statistics every higher layer builds on.
//!
//! Conventions used throughout the crate: attenuations are given in dB and
//! convert to transmittances as `10^(-dB/10)`; detector efficiency is folded
//! into the path transmittance seen by a photon; dark counts are a per-gate
//! click probability on each detector; an interference visibility `V` maps
//! to the intrinsic error rate `(1 - V) / 2`.

use crate::error::{Error, Result};
use statrs::function::gamma::ln_gamma;

fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {value}")))
    }
}

fn ensure_probability(name: &str, value: f64) -> Result<()> {
    ensure_finite(name, value)?;
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{name} must lie in [0, 1], got {value}"
        )))
    }
}

/// Converts an attenuation in dB to a transmittance in (0, 1].
pub fn db_to_transmittance(db: f64) -> Result<f64> {
    ensure_finite("attenuation", db)?;
    if db < 0.0 {
        return Err(Error::Domain(format!(
            "attenuation must be non-negative, got {db} dB"
        )));
    }
    Ok(10f64.powf(-db / 10.0))
}

/// Binary Shannon entropy in bits; defined as 0 at both endpoints.
pub fn binary_entropy(p: f64) -> Result<f64> {
    ensure_probability("entropy argument", p)?;
    if p == 0.0 || p == 1.0 {
        return Ok(0.0);
    }
    Ok(-p * p.log2() - (1.0 - p) * (1.0 - p).log2())
}

/// Intrinsic error rate of an interferometric measurement with fringe
/// visibility `v`, namely `(1 - v) / 2`.
pub fn detector_error_from_visibility(v: f64) -> Result<f64> {
    ensure_probability("visibility", v)?;
    Ok((1.0 - v) / 2.0)
}

/// P(N = n) for N ~ Poisson(mu), evaluated in log space so large `n` and
/// `mu` stay finite.
pub fn poisson_pmf(n: u32, mu: f64) -> Result<f64> {
    ensure_finite("mean photon number", mu)?;
    if mu < 0.0 {
        return Err(Error::Domain(format!(
            "mean photon number must be non-negative, got {mu}"
        )));
    }
    if mu == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    let n_f = f64::from(n);
    Ok((-mu + n_f * mu.ln() - ln_gamma(n_f + 1.0)).exp())
}

/// P(N >= n_min) for N ~ Poisson(mu). Small tails are summed upward term by
/// term, which keeps full relative precision where one minus the head would
/// cancel; large tails fall back to the complement.
pub fn poisson_tail(n_min: u32, mu: f64) -> Result<f64> {
    let mut head = 0.0;
    for n in 0..n_min {
        head += poisson_pmf(n, mu)?;
    }
    if head < 0.5 {
        return Ok((1.0 - head).max(0.0));
    }
    let mut term = poisson_pmf(n_min, mu)?;
    let mut sum = term;
    let mut n = n_min;
    for _ in 0..10_000_000u32 {
        n += 1;
        term *= mu / f64::from(n);
        sum += term;
        if term < sum * 1e-18 || term < 1e-320 {
            break;
        }
    }
    Ok(sum.min(1.0))
}

/// Phase-randomized weak coherent pulse source; the photon number per pulse
/// is Poisson distributed with mean `mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceModel {
    mu: f64,
}

impl SourceModel {
    pub fn new(mu: f64) -> Result<Self> {
        ensure_finite("mean photon number", mu)?;
        if mu <= 0.0 {
            return Err(Error::Domain(format!(
                "mean photon number must be positive, got {mu}"
            )));
        }
        Ok(Self { mu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Photon-number cutoff for sums over Poisson terms; the neglected tail
    /// mass is far below 1e-15 for any accepted `mu`.
    pub fn n_max(&self) -> u32 {
        (40.0 * self.mu).ceil() as u32 + 20
    }
}

/// Fiber link between the receiver (who prepares and later decodes) and the
/// sender station. The stored value is the one-way attenuation; the encoded
/// photons traverse the same fiber twice, so the round trip sees double it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    attenuation_ba_db: f64,
}

impl ChannelModel {
    /// Builds the channel from the one-way attenuation in dB.
    pub fn from_one_way_db(db: f64) -> Result<Self> {
        db_to_transmittance(db)?;
        Ok(Self {
            attenuation_ba_db: db,
        })
    }

    /// Builds the channel from the round-trip attenuation in dB, the axis
    /// used for capacity sweeps.
    pub fn from_round_trip_db(db: f64) -> Result<Self> {
        Self::from_one_way_db(db / 2.0)
    }

    pub fn attenuation_ba_db(&self) -> f64 {
        self.attenuation_ba_db
    }

    pub fn attenuation_bab_db(&self) -> f64 {
        2.0 * self.attenuation_ba_db
    }

    /// One-way transmittance `t = 10^(-alpha/10)`.
    pub fn transmittance_ba(&self) -> f64 {
        10f64.powf(-self.attenuation_ba_db / 10.0)
    }

    /// Round-trip transmittance `t^2`.
    pub fn transmittance_bab(&self) -> f64 {
        let t = self.transmittance_ba();
        t * t
    }
}

/// Threshold single-photon detector with efficiency, per-gate dark-count
/// probability, and interference visibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel {
    efficiency: f64,
    dark_count_prob: f64,
    visibility: f64,
}

impl DetectorModel {
    pub fn new(efficiency: f64, dark_count_prob: f64, visibility: f64) -> Result<Self> {
        ensure_probability("detector efficiency", efficiency)?;
        if efficiency == 0.0 {
            return Err(Error::Domain(
                "detector efficiency must be positive".into(),
            ));
        }
        ensure_probability("dark count probability", dark_count_prob)?;
        if dark_count_prob >= 1.0 {
            return Err(Error::Domain(
                "dark count probability must be below 1".into(),
            ));
        }
        ensure_probability("visibility", visibility)?;
        Ok(Self {
            efficiency,
            dark_count_prob,
            visibility,
        })
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }

    pub fn dark_count_prob(&self) -> f64 {
        self.dark_count_prob
    }

    pub fn visibility(&self) -> f64 {
        self.visibility
    }

    /// `(1 - V) / 2`, the misalignment error applied to detected signals.
    pub fn intrinsic_error(&self) -> f64 {
        (1.0 - self.visibility) / 2.0
    }
}

/// Sender-station optics: the lossy encoding loop, the short measurement
/// arm, and the tap ratio `k` sending a fraction of the incoming light into
/// the encoding loop (the rest is measured locally as control rounds).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationOptics {
    encode_loop_loss_db: f64,
    short_arm_loss_db: f64,
    split_ratio_k: f64,
}

impl StationOptics {
    pub fn new(encode_loop_loss_db: f64, short_arm_loss_db: f64, split_ratio_k: f64) -> Result<Self> {
        db_to_transmittance(encode_loop_loss_db)?;
        db_to_transmittance(short_arm_loss_db)?;
        ensure_finite("split ratio", split_ratio_k)?;
        if split_ratio_k <= 0.0 || split_ratio_k >= 1.0 {
            return Err(Error::Domain(format!(
                "split ratio must lie strictly inside (0, 1), got {split_ratio_k}"
            )));
        }
        Ok(Self {
            encode_loop_loss_db,
            short_arm_loss_db,
            split_ratio_k,
        })
    }

    /// Builds the optics with the tap ratio solved so that the sender's
    /// control path and an eavesdropper intercepting the encoding loop see
    /// equal per-photon collection efficiencies.
    pub fn balanced(
        encode_loop_loss_db: f64,
        short_arm_loss_db: f64,
        detector_a_efficiency: f64,
    ) -> Result<Self> {
        let k = solve_split_ratio(encode_loop_loss_db, short_arm_loss_db, detector_a_efficiency)?;
        Self::new(encode_loop_loss_db, short_arm_loss_db, k)
    }

    pub fn encode_loop_loss_db(&self) -> f64 {
        self.encode_loop_loss_db
    }

    pub fn short_arm_loss_db(&self) -> f64 {
        self.short_arm_loss_db
    }

    pub fn split_ratio_k(&self) -> f64 {
        self.split_ratio_k
    }

    pub fn encode_loop_transmittance(&self) -> f64 {
        10f64.powf(-self.encode_loop_loss_db / 10.0)
    }

    pub fn short_arm_transmittance(&self) -> f64 {
        10f64.powf(-self.short_arm_loss_db / 10.0)
    }
}

/// Solves the tap ratio `k` that balances the sender's control-path
/// collection `gamma_a = (1 - k) * T_arm * eta_d` against the best
/// eavesdropper collection on the loop `gamma_e = k^2 * T_loop`.
///
/// Equality means `T_loop k^2 + gamma_a-coefficient k - coefficient = 0`,
/// whose positive root is returned. With lossless optics and a unit
/// detector the root is the golden ratio conjugate `(sqrt(5) - 1) / 2`.
pub fn solve_split_ratio(
    encode_loop_loss_db: f64,
    short_arm_loss_db: f64,
    detector_a_efficiency: f64,
) -> Result<f64> {
    ensure_probability("detector efficiency", detector_a_efficiency)?;
    if detector_a_efficiency == 0.0 {
        return Err(Error::InfeasibleConfig(
            "split ratio is undefined for a dead control detector".into(),
        ));
    }
    let a = db_to_transmittance(short_arm_loss_db)? * detector_a_efficiency;
    let b = db_to_transmittance(encode_loop_loss_db)?;
    let k = (-a + (a * a + 4.0 * a * b).sqrt()) / (2.0 * b);
    if !(0.0..=1.0).contains(&k) || k == 0.0 {
        return Err(Error::InfeasibleConfig(format!(
            "balanced split ratio fell outside (0, 1): {k}"
        )));
    }
    Ok(k)
}

/// Per-photon collection efficiencies of the whole system at one operating
/// point: the control path (`eta_ba`), the full encode round trip
/// (`eta_bab`), and the loss-prefactor pair (`gamma_a`, `gamma_e`) used to
/// scale eavesdropper gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub eta_ba: f64,
    pub eta_bab: f64,
    pub gamma_a: f64,
    pub gamma_e: f64,
}

impl LinkBudget {
    /// `max(1, gamma_e / gamma_a)`: how much more efficiently the best
    /// eavesdropper collects photons than the sender's own control path.
    pub fn eve_scale(&self) -> Result<f64> {
        if self.gamma_a <= 0.0 {
            return Err(Error::Domain(
                "control-path collection efficiency vanished".into(),
            ));
        }
        Ok((self.gamma_e / self.gamma_a).max(1.0))
    }
}

/// Assembles the link budget for a channel, station optics, and the two
/// detectors (the sender's control detector and the receiver's decoder).
pub fn link_budget(
    channel: &ChannelModel,
    optics: &StationOptics,
    detector_a: &DetectorModel,
    detector_b: &DetectorModel,
) -> Result<LinkBudget> {
    let t = channel.transmittance_ba();
    let arm = optics.short_arm_transmittance();
    let loop_t = optics.encode_loop_transmittance();
    let k = optics.split_ratio_k();
    let gamma_a = (1.0 - k) * arm * detector_a.efficiency();
    let gamma_e = k * k * loop_t;
    Ok(LinkBudget {
        eta_ba: t * gamma_a,
        eta_bab: t * t * k * k * loop_t * arm * detector_b.efficiency(),
        gamma_a,
        gamma_e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn poisson_pmf_reference_values() {
        assert!(close(poisson_pmf(0, 0.1).unwrap(), 0.904837418035960, 1e-14));
        assert!(close(poisson_pmf(1, 0.1).unwrap(), 0.0904837418035960, 1e-14));
        assert!(close(
            poisson_pmf(2, 0.01).unwrap(),
            4.95024916874584e-5,
            1e-17
        ));
    }

    #[test]
    fn poisson_tail_reference_values() {
        assert!(close(
            poisson_tail(2, 0.01).unwrap(),
            4.96679133402659e-5,
            1e-16
        ));
        assert!(close(
            poisson_tail(3, 0.1).unwrap(),
            1.54653070264672e-4,
            1e-15
        ));
        assert!(close(
            poisson_tail(3, 0.01).unwrap(),
            1.65421652807488e-7,
            1e-18
        ));
    }

    #[test]
    fn poisson_rejects_bad_mu() {
        assert!(poisson_pmf(0, -0.1).is_err());
        assert!(poisson_pmf(0, f64::NAN).is_err());
        assert_eq!(poisson_pmf(0, 0.0).unwrap(), 1.0);
        assert_eq!(poisson_pmf(3, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn transmittance_conversion() {
        assert!(close(db_to_transmittance(3.0).unwrap(), 0.501187233627272, 1e-15));
        assert_eq!(db_to_transmittance(0.0).unwrap(), 1.0);
        assert!(db_to_transmittance(-1.0).is_err());
    }

    #[test]
    fn entropy_reference_values() {
        assert!(close(binary_entropy(0.25).unwrap(), 0.811278124459133, 1e-15));
        assert!(close(binary_entropy(0.1).unwrap(), 0.468995593589281, 1e-15));
        assert!(close(binary_entropy(0.2).unwrap(), 0.721928094887362, 1e-15));
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert!(binary_entropy(1.2).is_err());
    }

    #[test]
    fn visibility_to_error() {
        assert!(close(detector_error_from_visibility(0.9737).unwrap(), 0.01315, 1e-12));
        assert!(close(detector_error_from_visibility(0.9948).unwrap(), 0.0026, 1e-12));
        assert_eq!(detector_error_from_visibility(1.0).unwrap(), 0.0);
    }

    #[test]
    fn source_cutoff() {
        assert_eq!(SourceModel::new(0.01).unwrap().n_max(), 21);
        assert_eq!(SourceModel::new(0.1).unwrap().n_max(), 24);
        assert!(SourceModel::new(0.0).is_err());
        assert!(SourceModel::new(-1.0).is_err());
    }

    #[test]
    fn channel_round_trip_axis() {
        let ch = ChannelModel::from_round_trip_db(6.0).unwrap();
        assert!(close(ch.attenuation_ba_db(), 3.0, 1e-15));
        assert!(close(ch.attenuation_bab_db(), 6.0, 1e-15));
        assert!(close(ch.transmittance_ba(), 0.501187233627272, 1e-15));
        assert!(close(ch.transmittance_bab(), 0.501187233627272f64.powi(2), 1e-15));
    }

    #[test]
    fn split_ratio_reference_root() {
        let k = solve_split_ratio(4.3, 2.3, 0.7).unwrap();
        assert!(close(k, 0.635720632587007, 1e-12));
        let golden = solve_split_ratio(0.0, 0.0, 1.0).unwrap();
        assert!(close(golden, 0.618033988749895, 1e-12));
    }

    #[test]
    fn split_ratio_balances_collections() {
        let k = solve_split_ratio(4.3, 2.3, 0.7).unwrap();
        let optics = StationOptics::new(4.3, 2.3, k).unwrap();
        let gamma_a = (1.0 - k) * optics.short_arm_transmittance() * 0.7;
        let gamma_e = k * k * optics.encode_loop_transmittance();
        assert!(close(gamma_a, gamma_e, 1e-15));
        assert!(close(gamma_a, 0.150152515994662, 1e-14));
    }

    #[test]
    fn link_budget_reference_point() {
        let channel = ChannelModel::from_one_way_db(0.0).unwrap();
        let optics = StationOptics::new(4.3, 2.3, 0.6358).unwrap();
        let det = DetectorModel::new(0.7, 8e-8, 0.9737).unwrap();
        let lb = link_budget(&channel, &optics, &det, &det).unwrap();
        assert!(close(lb.eta_ba, 0.150119801496354, 1e-14));
        assert!(close(lb.eta_bab, 0.0619069042756101, 1e-14));
        assert!(close(lb.gamma_e, 0.150190010328017, 1e-14));
        assert!(lb.eve_scale().unwrap() >= 1.0);
    }

    #[test]
    fn link_budget_attenuated() {
        let channel = ChannelModel::from_round_trip_db(6.0).unwrap();
        let optics = StationOptics::balanced(4.3, 2.3, 0.7).unwrap();
        let det = DetectorModel::new(0.7, 8e-8, 0.9737).unwrap();
        let lb = link_budget(&channel, &optics, &det, &det).unwrap();
        assert!(close(lb.eta_ba, 0.0752545241135393, 1e-14));
        assert!(close(lb.eta_bab, 0.0155464292138586, 1e-14));
        assert!(close(lb.eve_scale().unwrap(), 1.0, 1e-12));
    }

    #[test]
    fn detector_validation() {
        assert!(DetectorModel::new(0.0, 0.0, 1.0).is_err());
        assert!(DetectorModel::new(0.7, 1.0, 1.0).is_err());
        assert!(DetectorModel::new(0.7, -0.1, 1.0).is_err());
        assert!(DetectorModel::new(0.7, 0.0, 1.1).is_err());
        assert!(DetectorModel::new(1.0, 0.0, 1.0).is_ok());
    }

    #[test]
    fn optics_validation() {
        assert!(StationOptics::new(4.3, 2.3, 0.0).is_err());
        assert!(StationOptics::new(4.3, 2.3, 1.0).is_err());
        assert!(StationOptics::new(-0.1, 2.3, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn pmf_normalizes(mu in 0.001f64..5.0) {
            let source = SourceModel::new(mu).unwrap();
            let mut total = 0.0;
            for n in 0..=source.n_max() {
                total += poisson_pmf(n, mu).unwrap();
            }
            prop_assert!((total - 1.0).abs() < 1e-12);
        }

        #[test]
        fn tail_complements_head(mu in 0.001f64..5.0, n_min in 0u32..10) {
            let tail = poisson_tail(n_min, mu).unwrap();
            let mut head = 0.0;
            for n in 0..n_min {
                head += poisson_pmf(n, mu).unwrap();
            }
            prop_assert!((head + tail - 1.0).abs() < 1e-12);
        }

        #[test]
        fn transmittance_monotone(db1 in 0.0f64..40.0, db2 in 0.0f64..40.0) {
            let t1 = db_to_transmittance(db1).unwrap();
            let t2 = db_to_transmittance(db2).unwrap();
            if db1 < db2 {
                prop_assert!(t1 > t2);
            }
            prop_assert!(t1 > 0.0 && t1 <= 1.0);
        }

        #[test]
        fn entropy_symmetric(p in 0.0f64..=1.0) {
            let a = binary_entropy(p).unwrap();
            let b = binary_entropy(1.0 - p).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!(a <= 1.0 + 1e-12);
        }

        #[test]
        fn solved_ratio_is_a_root(loop_db in 0.0f64..10.0, arm_db in 0.0f64..10.0, eta in 0.1f64..=1.0) {
            let k = solve_split_ratio(loop_db, arm_db, eta).unwrap();
            prop_assert!(k > 0.0 && k < 1.0);
            let a = db_to_transmittance(arm_db).unwrap() * eta;
            let b = db_to_transmittance(loop_db).unwrap();
            let residual = b * k * k + a * k - a;
            prop_assert!(residual.abs() < 1e-12);
        }

        #[test]
        fn balanced_budget_orders_paths(rt_db in 0.0f64..30.0) {
            let channel = ChannelModel::from_round_trip_db(rt_db).unwrap();
            let optics = StationOptics::balanced(4.3, 2.3, 0.7).unwrap();
            let det = DetectorModel::new(0.7, 8e-8, 0.9737).unwrap();
            let lb = link_budget(&channel, &optics, &det, &det).unwrap();
            prop_assert!(lb.eta_bab <= lb.eta_ba);
            prop_assert!(lb.eta_ba <= 1.0);
            prop_assert!((lb.gamma_a - lb.gamma_e).abs() < 1e-12);
        }
    }
}
