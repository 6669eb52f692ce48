//! Seeded Monte Carlo implementation of the two-way protocol round trip.
//!
//! Each round prepares a weak coherent pulse in one of four phase states,
//! sends it through the lossy fiber, and either measures it at the sender
//! station (control rounds, yielding the disturbance rate) or encodes a bit
//! onto it and returns it for deterministic decoding (encode rounds,
//! yielding the round-trip error rate). Photon numbers are Poisson, every
//! lossy element is a per-photon Bernoulli thinning, and dark counts are
//! gated per round on the active detector with a real click winning any
//! coincidence.
//!
//! Sessions are sharded into fixed blocks of 2^18 pulses with per-shard
//! seeds derived from the session seed, so results are bit-identical for
//! any thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use statrs::function::beta::beta_reg;

use crate::analysis::SystemParams;
use crate::error::{Error, Result};
use crate::model::{DetectorModel, SourceModel};

/// Measurement basis of a preparation: computational or superposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Z,
    X,
}

/// A phase in exact quarter turns, so the four protocol states and the
/// pi-shift encoding stay free of floating-point drift.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseQuarters(u8);

impl PhaseQuarters {
    pub fn new(quarters: u8) -> Self {
        Self(quarters % 4)
    }

    pub fn quarters(&self) -> u8 {
        self.0
    }

    pub fn radians(&self) -> f64 {
        f64::from(self.0) * std::f64::consts::FRAC_PI_2
    }

    pub fn wrapping_add(&self, other: PhaseQuarters) -> PhaseQuarters {
        PhaseQuarters::new((self.0 + other.0) % 4)
    }

    pub fn wrapping_sub(&self, other: PhaseQuarters) -> PhaseQuarters {
        PhaseQuarters::new((4 + self.0 - other.0) % 4)
    }
}

/// One pulse in flight: its surviving photon number, the preparation
/// record, and the accumulated modulation phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub photon_count: u32,
    pub basis: Basis,
    pub bit: u8,
    pub prep_phase: PhaseQuarters,
    pub phase: PhaseQuarters,
    pub encoded: bool,
}

/// Destination of a pulse at the sender's tap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Control,
    Encode,
}

/// Outcome of a control measurement that produced a click.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutcome {
    pub alice_basis: Basis,
    pub basis_match: bool,
    pub bit: u8,
    pub dark_only: bool,
}

/// Samples a Poisson photon number by CDF inversion; exact, deterministic
/// across platforms, and capped defensively at 10^4.
fn sample_poisson<R: Rng>(mu: f64, rng: &mut R) -> u32 {
    let u: f64 = rng.gen();
    let mut n = 0u32;
    let mut pmf = (-mu).exp();
    let mut cdf = pmf;
    while u > cdf && n < 10_000 {
        n += 1;
        pmf *= mu / f64::from(n);
        cdf += pmf;
    }
    n
}

/// Draws a fresh pulse: Poisson photon number and a uniformly random basis
/// and bit, with the phase fixed by the preparation convention
/// `quarters = 2 * bit + (basis == X)`.
pub fn prepare_pulse<R: Rng>(source: &SourceModel, rng: &mut R) -> Pulse {
    let photon_count = sample_poisson(source.mu(), rng);
    let basis = if rng.gen_bool(0.5) { Basis::Z } else { Basis::X };
    let bit = u8::from(rng.gen_bool(0.5));
    let offset = u8::from(basis == Basis::X);
    let prep_phase = PhaseQuarters::new(2 * bit + offset);
    Pulse {
        photon_count,
        basis,
        bit,
        prep_phase,
        phase: prep_phase,
        encoded: false,
    }
}

/// Applies a lossy element: each photon independently survives with
/// probability `transmittance`.
pub fn transmit<R: Rng>(mut pulse: Pulse, transmittance: f64, rng: &mut R) -> Result<Pulse> {
    if !transmittance.is_finite() || !(0.0..=1.0).contains(&transmittance) {
        return Err(Error::Domain(format!(
            "transmittance must lie in [0, 1], got {transmittance}"
        )));
    }
    let mut survivors = 0;
    for _ in 0..pulse.photon_count {
        if rng.gen_bool(transmittance) {
            survivors += 1;
        }
    }
    pulse.photon_count = survivors;
    Ok(pulse)
}

/// Routes a whole pulse at the sender's tap: toward the encoding loop with
/// probability `k`, toward the control measurement otherwise.
pub fn alice_route<R: Rng>(k: f64, rng: &mut R) -> Result<Branch> {
    if !k.is_finite() || !(0.0..=1.0).contains(&k) {
        return Err(Error::Domain(format!(
            "split ratio must lie in [0, 1], got {k}"
        )));
    }
    Ok(if rng.gen_bool(k) {
        Branch::Encode
    } else {
        Branch::Control
    })
}

/// Measures a pulse on the control path in a uniformly random basis.
/// Detector efficiency thins the photons; a click is any surviving photon
/// or a dark count. Matched-basis signal clicks reproduce the prepared bit
/// up to the misalignment flip; mismatched or dark-only clicks are uniform.
pub fn alice_measure_control<R: Rng>(
    pulse: &Pulse,
    detector: &DetectorModel,
    rng: &mut R,
) -> Option<ControlOutcome> {
    let alice_basis = if rng.gen_bool(0.5) { Basis::Z } else { Basis::X };
    let mut detected = 0;
    for _ in 0..pulse.photon_count {
        if rng.gen_bool(detector.efficiency()) {
            detected += 1;
        }
    }
    let signal = detected >= 1;
    let dark = rng.gen_bool(detector.dark_count_prob());
    if !signal && !dark {
        return None;
    }
    let basis_match = alice_basis == pulse.basis;
    let bit = if signal && basis_match {
        pulse.bit ^ u8::from(rng.gen_bool(detector.intrinsic_error()))
    } else {
        u8::from(rng.gen_bool(0.5))
    };
    Some(ControlOutcome {
        alice_basis,
        basis_match,
        bit,
        dark_only: !signal,
    })
}

/// Encodes a bit by advancing the modulation phase half a turn per one-bit,
/// leaving zero-bits untouched.
pub fn encode(mut pulse: Pulse, bit: u8) -> Result<Pulse> {
    if bit > 1 {
        return Err(Error::Domain(format!("encoded bit must be 0 or 1, got {bit}")));
    }
    if pulse.encoded {
        return Err(Error::Domain("pulse was already encoded".into()));
    }
    pulse.phase = pulse.phase.wrapping_add(PhaseQuarters::new(2 * bit));
    pulse.encoded = true;
    Ok(pulse)
}

/// Decodes a returned pulse against its own preparation record. The phase
/// advance relative to the preparation is an exact half-turn multiple, so
/// the decoded bit is deterministic up to the misalignment flip; dark-only
/// clicks are uniform, and no click returns `None`.
pub fn bob_decode<R: Rng>(
    pulse: &Pulse,
    detector: &DetectorModel,
    rng: &mut R,
) -> Result<Option<u8>> {
    if !pulse.encoded {
        return Err(Error::Domain("pulse carries no encoded bit".into()));
    }
    let mut detected = 0;
    for _ in 0..pulse.photon_count {
        if rng.gen_bool(detector.efficiency()) {
            detected += 1;
        }
    }
    let signal = detected >= 1;
    let dark = rng.gen_bool(detector.dark_count_prob());
    if !signal && !dark {
        return Ok(None);
    }
    if !signal {
        return Ok(Some(u8::from(rng.gen_bool(0.5))));
    }
    let diff = pulse.phase.wrapping_sub(pulse.prep_phase).quarters();
    if diff % 2 != 0 {
        return Err(Error::Inconsistent(
            "decoded phase difference is not a half-turn multiple".into(),
        ));
    }
    let bit = diff / 2;
    Ok(Some(bit ^ u8::from(rng.gen_bool(detector.intrinsic_error()))))
}

/// Session-level protocol knobs on top of the physical parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionConfig {
    pub params: SystemParams,
    /// Sessions whose final control disturbance exceeds this abort.
    pub dber_abort_threshold: f64,
    /// Fraction of encode rounds marked for error checking.
    pub check_fraction: f64,
}

impl SessionConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.dber_abort_threshold.is_finite()
            || self.dber_abort_threshold <= 0.0
            || self.dber_abort_threshold > 0.5
        {
            return Err(Error::Domain(format!(
                "abort threshold must lie in (0, 1/2], got {}",
                self.dber_abort_threshold
            )));
        }
        if !self.check_fraction.is_finite() || !(0.0..=1.0).contains(&self.check_fraction) {
            return Err(Error::Domain(format!(
                "check fraction must lie in [0, 1], got {}",
                self.check_fraction
            )));
        }
        self.params.link_budget().map(|_| ())
    }
}

/// Aggregated counts of one session, with rate and confidence-interval
/// accessors. All rates fall back to 0 when their denominator is empty;
/// the raw counts disambiguate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SessionStats {
    pub n_pulses: u64,
    pub control_rounds: u64,
    pub control_clicks: u64,
    pub matched_clicks: u64,
    pub dber_errors: u64,
    pub encode_rounds: u64,
    pub encode_clicks: u64,
    pub check_clicks: u64,
    pub qber_errors: u64,
    pub aborted: bool,
}

impl SessionStats {
    fn merge(mut self, other: SessionStats) -> SessionStats {
        self.n_pulses += other.n_pulses;
        self.control_rounds += other.control_rounds;
        self.control_clicks += other.control_clicks;
        self.matched_clicks += other.matched_clicks;
        self.dber_errors += other.dber_errors;
        self.encode_rounds += other.encode_rounds;
        self.encode_clicks += other.encode_clicks;
        self.check_clicks += other.check_clicks;
        self.qber_errors += other.qber_errors;
        self
    }

    fn rate(num: u64, den: u64) -> f64 {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    }

    /// Control clicks per pulse.
    pub fn q_ba_hat(&self) -> f64 {
        Self::rate(self.control_clicks, self.n_pulses)
    }

    /// Disturbance among matched-basis control clicks.
    pub fn dber_hat(&self) -> f64 {
        Self::rate(self.dber_errors, self.matched_clicks)
    }

    /// Decoder clicks per pulse.
    pub fn q_bab_hat(&self) -> f64 {
        Self::rate(self.encode_clicks, self.n_pulses)
    }

    /// Error rate among check-marked decoder clicks.
    pub fn qber_hat(&self) -> f64 {
        Self::rate(self.qber_errors, self.check_clicks)
    }

    pub fn q_ba_ci95(&self) -> (f64, f64) {
        clopper_pearson(self.control_clicks, self.n_pulses)
    }

    pub fn dber_ci95(&self) -> (f64, f64) {
        clopper_pearson(self.dber_errors, self.matched_clicks)
    }

    pub fn q_bab_ci95(&self) -> (f64, f64) {
        clopper_pearson(self.encode_clicks, self.n_pulses)
    }

    pub fn qber_ci95(&self) -> (f64, f64) {
        clopper_pearson(self.qber_errors, self.check_clicks)
    }
}

/// Quantile of the beta distribution by bisecting the regularized
/// incomplete beta function until the bracket collapses to floating-point
/// resolution.
fn beta_quantile(a: f64, b: f64, p: f64) -> f64 {
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if beta_reg(a, b, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.max(1e-300) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Exact (Clopper-Pearson) 95% confidence interval for a binomial
/// proportion, via the beta quantiles. Empty trials return the full unit
/// interval.
pub fn clopper_pearson(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let x = successes as f64;
    let n = trials as f64;
    let lo = if successes == 0 {
        0.0
    } else {
        beta_quantile(x, n - x + 1.0, 0.025)
    };
    let hi = if successes >= trials {
        1.0
    } else {
        beta_quantile(x + 1.0, n - x, 0.975)
    };
    (lo, hi)
}

const SHARD_SIZE: u64 = 1 << 18;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn shard_seed(seed: u64, shard: u64) -> u64 {
    splitmix64(seed.wrapping_add(shard.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

#[derive(Clone, Copy)]
struct DerivedPaths {
    t_ba: f64,
    arm_t: f64,
    loop_t: f64,
    k: f64,
}

enum RoundRecord {
    Control {
        clicked: bool,
        matched: bool,
        error: bool,
    },
    Encode {
        clicked: bool,
        check: bool,
        error: bool,
    },
}

fn run_round<R: Rng>(
    config: &SessionConfig,
    paths: &DerivedPaths,
    rng: &mut R,
) -> Result<RoundRecord> {
    let pulse = prepare_pulse(&config.params.source, rng);
    let pulse = transmit(pulse, paths.t_ba, rng)?;
    match alice_route(paths.k, rng)? {
        Branch::Control => {
            let pulse = transmit(pulse, paths.arm_t, rng)?;
            match alice_measure_control(&pulse, &config.params.detector_a, rng) {
                Some(outcome) => Ok(RoundRecord::Control {
                    clicked: true,
                    matched: outcome.basis_match,
                    error: outcome.basis_match && outcome.bit != pulse.bit,
                }),
                None => Ok(RoundRecord::Control {
                    clicked: false,
                    matched: false,
                    error: false,
                }),
            }
        }
        Branch::Encode => {
            let bit = u8::from(rng.gen_bool(0.5));
            let check = rng.gen_bool(config.check_fraction);
            let pulse = transmit(pulse, paths.loop_t, rng)?;
            let pulse = encode(pulse, bit)?;
            let pulse = transmit(pulse, paths.k, rng)?;
            let pulse = transmit(pulse, paths.t_ba, rng)?;
            let pulse = transmit(pulse, paths.arm_t, rng)?;
            match bob_decode(&pulse, &config.params.detector_b, rng)? {
                Some(decoded) => Ok(RoundRecord::Encode {
                    clicked: true,
                    check,
                    error: decoded != bit,
                }),
                None => Ok(RoundRecord::Encode {
                    clicked: false,
                    check,
                    error: false,
                }),
            }
        }
    }
}

fn run_shard(config: &SessionConfig, paths: &DerivedPaths, pulses: u64, seed: u64) -> Result<SessionStats> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut stats = SessionStats {
        n_pulses: pulses,
        ..SessionStats::default()
    };
    for _ in 0..pulses {
        match run_round(config, paths, &mut rng)? {
            RoundRecord::Control {
                clicked,
                matched,
                error,
            } => {
                stats.control_rounds += 1;
                stats.control_clicks += u64::from(clicked);
                stats.matched_clicks += u64::from(clicked && matched);
                stats.dber_errors += u64::from(error);
            }
            RoundRecord::Encode {
                clicked,
                check,
                error,
            } => {
                stats.encode_rounds += 1;
                stats.encode_clicks += u64::from(clicked);
                stats.check_clicks += u64::from(clicked && check);
                stats.qber_errors += u64::from(clicked && check && error);
            }
        }
    }
    Ok(stats)
}

/// Runs a full session of `n_pulses` rounds with the given seed.
///
/// Work is split into fixed shards of 2^18 pulses with seeds derived from
/// the session seed, evaluated in parallel, and merged by integer addition,
/// so the result is identical for any thread count. The abort decision is
/// taken on the merged disturbance rate.
pub fn run_session(config: &SessionConfig, n_pulses: u64, seed: u64) -> Result<SessionStats> {
    config.validate()?;
    if n_pulses == 0 {
        return Err(Error::Domain("a session needs at least one pulse".into()));
    }
    let paths = DerivedPaths {
        t_ba: config.params.channel.transmittance_ba(),
        arm_t: config.params.optics.short_arm_transmittance(),
        loop_t: config.params.optics.encode_loop_transmittance(),
        k: config.params.optics.split_ratio_k(),
    };
    let n_shards = n_pulses.div_ceil(SHARD_SIZE);
    let mut stats = (0..n_shards)
        .into_par_iter()
        .map(|i| {
            let pulses = SHARD_SIZE.min(n_pulses - i * SHARD_SIZE);
            run_shard(config, &paths, pulses, shard_seed(seed, i))
        })
        .try_reduce(SessionStats::default, |a, b| Ok(a.merge(b)))?;
    stats.aborted = stats.matched_clicks > 0 && stats.dber_hat() > config.dber_abort_threshold;
    Ok(stats)
}

/// Expected photon counts of the receiver-bench interference fringe at one
/// modulator voltage: `(c_max / 2) * (1 + V cos(pi * v / v_pi + phase))`.
pub fn fringe_counts(
    voltage: f64,
    v_pi: f64,
    visibility: f64,
    c_max: f64,
    phase_offset: f64,
) -> Result<f64> {
    if !voltage.is_finite() || !phase_offset.is_finite() {
        return Err(Error::Domain("voltage and phase must be finite".into()));
    }
    if !v_pi.is_finite() || v_pi <= 0.0 {
        return Err(Error::Domain(format!(
            "half-wave voltage must be positive, got {v_pi}"
        )));
    }
    if !visibility.is_finite() || !(0.0..=1.0).contains(&visibility) {
        return Err(Error::Domain(format!(
            "visibility must lie in [0, 1], got {visibility}"
        )));
    }
    if !c_max.is_finite() || c_max < 0.0 {
        return Err(Error::Domain(format!(
            "peak counts must be non-negative, got {c_max}"
        )));
    }
    let phase = std::f64::consts::PI * voltage / v_pi + phase_offset;
    Ok(c_max / 2.0 * (1.0 + visibility * phase.cos()))
}

/// Sweeps the fringe over an inclusive voltage grid. The grid must land on
/// the stop voltage within 1e-9 of a step.
pub fn fringe_sweep(
    v_start: f64,
    v_stop: f64,
    v_step: f64,
    v_pi: f64,
    visibility: f64,
    c_max: f64,
    phase_offset: f64,
) -> Result<Vec<(f64, f64)>> {
    if !v_step.is_finite() || v_step <= 0.0 {
        return Err(Error::Domain(format!(
            "voltage step must be positive, got {v_step}"
        )));
    }
    if !v_start.is_finite() || !v_stop.is_finite() || v_stop <= v_start {
        return Err(Error::Domain(format!(
            "voltage range [{v_start}, {v_stop}] is invalid"
        )));
    }
    let span = (v_stop - v_start) / v_step;
    let steps = span.round();
    if (span - steps).abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "voltage range is not an integer number of steps (got {span} steps)"
        )));
    }
    let mut points = Vec::with_capacity(steps as usize + 1);
    for i in 0..=(steps as u64) {
        let v = v_start + i as f64 * v_step;
        points.push((v, fringe_counts(v, v_pi, visibility, c_max, phase_offset)?));
    }
    Ok(points)
}

/// Recovers the visibility `(max - min) / (max + min)` from swept fringe
/// counts.
pub fn fringe_visibility_from_counts(points: &[(f64, f64)]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Domain("cannot fit an empty fringe".into()));
    }
    let mut c_min = f64::INFINITY;
    let mut c_max = f64::NEG_INFINITY;
    for (_, c) in points {
        c_min = c_min.min(*c);
        c_max = c_max.max(*c);
    }
    if c_min + c_max <= 0.0 {
        return Err(Error::UndefinedRate(
            "fringe visibility is undefined for all-zero counts".into(),
        ));
    }
    Ok((c_max - c_min) / (c_max + c_min))
}
