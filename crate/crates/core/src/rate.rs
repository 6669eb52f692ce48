//! Closed-form gains and error rates of the protocol round trip, and the
//! secrecy-capacity lower bound assembled from per-photon-number terms.
//!
//! All rates are per pulse. The legitimate channel term is the mutual
//! information of the deterministic round trip; the adversary terms charge
//! each photon-number class with its information bound weighted by the
//! pessimistic fraction of pulses the adversary can reach.

use crate::error::{Error, Result};
use crate::eve::{eve_info_single, holevo_two_photon};
use crate::model::{
    binary_entropy, poisson_pmf, DetectorModel, LinkBudget, SourceModel,
};

fn ensure_probability(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{name} must lie in [0, 1], got {value}"
        )))
    }
}

fn ensure_intensity(mu: f64) -> Result<()> {
    if mu.is_finite() && mu > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "pulse intensity must be positive, got {mu}"
        )))
    }
}

/// Probability that at least one of `n` photons survives a path of
/// per-photon transmittance `eta`: `1 - (1 - eta)^n`.
pub fn n_photon_transmittance(eta: f64, n: u32) -> Result<f64> {
    ensure_probability("transmittance", eta)?;
    Ok(1.0 - (1.0 - eta).powi(n as i32))
}

/// Yield of an `n`-photon pulse in the standard additive dark-count
/// convention: `min(1, y0 + (1 - (1 - eta)^n))`.
pub fn yield_n(y0: f64, eta: f64, n: u32) -> Result<f64> {
    ensure_probability("dark count probability", y0)?;
    let eta_n = n_photon_transmittance(eta, n)?;
    Ok((y0 + eta_n).min(1.0))
}

/// Yield of an `n`-photon pulse without double-counting the coincidence of
/// a dark count and a detected photon: `y0 + eta_n - y0 * eta_n`.
pub fn yield_n_exact(y0: f64, eta: f64, n: u32) -> Result<f64> {
    ensure_probability("dark count probability", y0)?;
    let eta_n = n_photon_transmittance(eta, n)?;
    Ok(y0 + eta_n - y0 * eta_n)
}

/// Overall gain of a Poisson pulse train: `y0 + 1 - exp(-eta * mu)`.
pub fn gain_overall(mu: f64, eta: f64, y0: f64) -> Result<f64> {
    ensure_intensity(mu)?;
    ensure_probability("transmittance", eta)?;
    ensure_probability("dark count probability", y0)?;
    Ok(y0 - (-eta * mu).exp_m1())
}

/// Overall error rate of a Poisson pulse train. Dark counts contribute a
/// random bit (error fraction 1/2); detected photons err with the intrinsic
/// misalignment rate `e_det`.
pub fn error_overall(mu: f64, eta: f64, y0: f64, e_det: f64) -> Result<f64> {
    let gain = gain_overall(mu, eta, y0)?;
    if e_det < 0.0 || e_det > 0.5 || !e_det.is_finite() {
        return Err(Error::Domain(format!(
            "intrinsic error rate must lie in [0, 1/2], got {e_det}"
        )));
    }
    if gain <= 0.0 {
        return Err(Error::UndefinedRate(
            "error rate is undefined at zero gain".into(),
        ));
    }
    Ok((0.5 * y0 + e_det * (-(-eta * mu).exp_m1())) / gain)
}

/// Mutual information per pulse of the deterministic round trip: the gain
/// times the capacity of a binary symmetric channel at the round-trip error
/// rate.
pub fn mutual_info_ab(q_bab: f64, e_bab: f64) -> Result<f64> {
    ensure_probability("round-trip gain", q_bab)?;
    Ok(q_bab * (1.0 - binary_entropy(e_bab)?))
}

/// Pessimistic per-pulse rate at which an adversary obtains `n`-photon
/// pulses: the sender-side detected rate above dark counts, rescaled by how
/// much better the adversary's collection can be than the sender's control
/// path, floored at zero. The flag reports whether flooring occurred.
pub fn eve_gain_bound_n(
    q_ba_n: f64,
    p_n: f64,
    y0: f64,
    gamma_a: f64,
    gamma_e: f64,
) -> Result<(f64, bool)> {
    ensure_probability("per-photon-number gain", q_ba_n)?;
    ensure_probability("photon-number probability", p_n)?;
    ensure_probability("dark count probability", y0)?;
    if gamma_a <= 0.0 || !gamma_a.is_finite() {
        return Err(Error::Domain(
            "control-path collection efficiency must be positive".into(),
        ));
    }
    if gamma_e < 0.0 || !gamma_e.is_finite() {
        return Err(Error::Domain(
            "adversary collection efficiency must be non-negative".into(),
        ));
    }
    let raw = (q_ba_n - p_n * y0) * (gamma_e / gamma_a).max(1.0);
    if raw < 0.0 {
        Ok((0.0, true))
    } else {
        Ok((raw, false))
    }
}

/// Per-pulse rates of one-, two-, and three-plus-photon pulses available
/// to the adversary, with a flag recording whether any term was floored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EveGains {
    pub n1: f64,
    pub n2: f64,
    pub n3plus: f64,
    pub clipped: bool,
}

/// Which yield formula per-photon-number sums use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YieldConvention {
    /// `y0 + eta_n`, the standard small-dark-count form; overall gains use
    /// the matching closed form.
    Approximate,
    /// `y0 + eta_n - y0 * eta_n`; overall gains are summed term by term.
    Exact,
}

/// Gains and error rates of one operating point, with the per-photon-number
/// decomposition of the sender-side gain.
#[derive(Debug, Clone, PartialEq)]
pub struct GainErrorPoint {
    pub mu: f64,
    pub q_ba: f64,
    pub e_ba: f64,
    pub q_bab: f64,
    pub e_bab: f64,
    /// `q_ba_n[n]` is the joint rate of emitting `n` photons and the sender
    /// registering a control click, for `n` up to the source cutoff.
    pub q_ba_n: Vec<f64>,
}

/// Evaluates the closed-form observables of a system operating point.
pub fn gain_error_point(
    source: &SourceModel,
    link: &LinkBudget,
    detector_a: &DetectorModel,
    detector_b: &DetectorModel,
    convention: YieldConvention,
) -> Result<GainErrorPoint> {
    let mu = source.mu();
    let y0_a = detector_a.dark_count_prob();
    let y0_b = detector_b.dark_count_prob();
    let mut q_ba_n = Vec::with_capacity(source.n_max() as usize + 1);
    for n in 0..=source.n_max() {
        let y = match convention {
            YieldConvention::Approximate => yield_n(y0_a, link.eta_ba, n)?,
            YieldConvention::Exact => yield_n_exact(y0_a, link.eta_ba, n)?,
        };
        q_ba_n.push(poisson_pmf(n, mu)? * y);
    }
    let (q_ba, q_bab) = match convention {
        YieldConvention::Approximate => (
            gain_overall(mu, link.eta_ba, y0_a)?,
            gain_overall(mu, link.eta_bab, y0_b)?,
        ),
        YieldConvention::Exact => {
            let q_ba = q_ba_n.iter().sum();
            let mut q_bab = 0.0;
            for n in 0..=source.n_max() {
                q_bab += poisson_pmf(n, mu)? * yield_n_exact(y0_b, link.eta_bab, n)?;
            }
            (q_ba, q_bab)
        }
    };
    let e_ba = error_numerator(mu, link.eta_ba, y0_a, detector_a.intrinsic_error())? / q_ba;
    let e_bab = error_numerator(mu, link.eta_bab, y0_b, detector_b.intrinsic_error())? / q_bab;
    Ok(GainErrorPoint {
        mu,
        q_ba,
        e_ba,
        q_bab,
        e_bab,
        q_ba_n,
    })
}

fn error_numerator(mu: f64, eta: f64, y0: f64, e_det: f64) -> Result<f64> {
    ensure_intensity(mu)?;
    ensure_probability("transmittance", eta)?;
    if e_det < 0.0 || e_det > 0.5 || !e_det.is_finite() {
        return Err(Error::Domain(format!(
            "intrinsic error rate must lie in [0, 1/2], got {e_det}"
        )));
    }
    Ok(0.5 * y0 + e_det * (-(-eta * mu).exp_m1()))
}

/// Knobs of the capacity assembly: the encoded-bit prior entering the
/// two-photon bound and whether two-photon pulses are charged their Holevo
/// bound (true) or written off as fully leaked (false).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityOptions {
    pub p0: f64,
    pub include_two_photon_term: bool,
}

impl Default for CapacityOptions {
    fn default() -> Self {
        Self {
            p0: 0.5,
            include_two_photon_term: true,
        }
    }
}

/// The capacity lower bound and its constituent terms, all per pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityBreakdown {
    pub i_ab: f64,
    pub i_ae_1: f64,
    pub i_ae_2: f64,
    pub i_ae_3plus: f64,
    pub c_s: f64,
    pub clipped: bool,
}

impl CapacityBreakdown {
    /// The reported rate: negative capacity clamps to zero at presentation,
    /// while `c_s` keeps the signed value.
    pub fn c_s_clamped(&self) -> f64 {
        self.c_s.max(0.0)
    }
}

/// Assembles the secrecy-capacity lower bound from the round-trip
/// observables, the estimated single- and two-photon error rates, and the
/// adversary gains.
pub fn secrecy_capacity(
    q_bab: f64,
    e_bab: f64,
    e1: f64,
    e2: f64,
    gains: &EveGains,
    options: &CapacityOptions,
) -> Result<CapacityBreakdown> {
    let i_ab = mutual_info_ab(q_bab, e_bab)?;
    let i_ae_1 = gains.n1 * eve_info_single(e1)?;
    let per_two_photon = if options.include_two_photon_term {
        holevo_two_photon(e2, options.p0)?
    } else {
        1.0
    };
    let i_ae_2 = gains.n2 * per_two_photon;
    let i_ae_3plus = gains.n3plus;
    Ok(CapacityBreakdown {
        i_ab,
        i_ae_1,
        i_ae_2,
        i_ae_3plus,
        c_s: i_ab - i_ae_1 - i_ae_2 - i_ae_3plus,
        clipped: gains.clipped,
    })
}

/// Where the capacity curve crosses zero along an attenuation axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cutoff {
    /// Capacity is already non-positive at the start of the range.
    NonePositive,
    /// Capacity is still positive at the end of the range.
    Beyond(f64),
    /// The crossing, located to the requested resolution.
    At(f64),
}

/// Locates the zero crossing of `capacity` over `[lo, hi]` dB by a coarse
/// forward scan followed by bisection to `resolution_db`.
pub fn find_cutoff<F>(capacity: F, lo: f64, hi: f64, resolution_db: f64) -> Result<Cutoff>
where
    F: Fn(f64) -> Result<f64>,
{
    if !lo.is_finite() || !hi.is_finite() || lo < 0.0 || hi <= lo {
        return Err(Error::Domain(format!(
            "cutoff search range [{lo}, {hi}] is invalid"
        )));
    }
    if !resolution_db.is_finite() || resolution_db <= 0.0 {
        return Err(Error::Domain(format!(
            "cutoff resolution must be positive, got {resolution_db}"
        )));
    }
    if capacity(lo)? <= 0.0 {
        return Ok(Cutoff::NonePositive);
    }
    let coarse = resolution_db.max(0.25);
    let mut below = lo;
    let mut above = lo;
    loop {
        above = (above + coarse).min(hi);
        if capacity(above)? <= 0.0 {
            break;
        }
        if above >= hi {
            return Ok(Cutoff::Beyond(hi));
        }
        below = above;
    }
    while above - below > resolution_db {
        let mid = 0.5 * (below + above);
        if capacity(mid)? > 0.0 {
            below = mid;
        } else {
            above = mid;
        }
    }
    Ok(Cutoff::At(0.5 * (below + above)))
}
