//! Information an eavesdropper extracts from one- and two-photon pulses
//! under a collective attack on the two-way protocol.
//!
//! The single-photon bound is a binary-entropy closed form. The two-photon
//! bound is computed structurally: the eight post-attack joint states (four
//! preparation phase pairs times two encoded bits) are expanded over a
//! four-component ancilla family, their Gram matrix is assembled from the
//! ancilla overlaps, and the Holevo quantity follows from the Gram spectrum
//! since a Gram matrix shares its nonzero eigenvalues with the ensemble's
//! density operator.

use crate::error::{Error, Result};
use crate::model::binary_entropy;

/// Overlap data of the four ancilla components an eavesdropper attaches to
/// a two-photon pulse, parameterized by the two-photon error rate `e2`.
///
/// The components are, in order: survive-both on bit 0, flip on bit 0, flip
/// on bit 1, survive-both on bit 1. The attack is constrained to disturb
/// both conjugate bases equally, which forces the two flip components to be
/// fully proportional (overlap equal to their norm `2 e2`) and likewise the
/// two survival components (overlap `1 - 2 e2`); all other pairs are
/// orthogonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackOverlaps {
    e2: f64,
    survival_norm: f64,
    error_norm: f64,
    survival_overlap: f64,
    error_overlap: f64,
}

impl AttackOverlaps {
    pub fn e2(&self) -> f64 {
        self.e2
    }

    pub fn survival_norm(&self) -> f64 {
        self.survival_norm
    }

    pub fn error_norm(&self) -> f64 {
        self.error_norm
    }

    pub fn survival_overlap(&self) -> f64 {
        self.survival_overlap
    }

    pub fn error_overlap(&self) -> f64 {
        self.error_overlap
    }

    /// 4x4 Gram matrix of the ancilla components themselves.
    pub fn ancilla_gram(&self) -> [[f64; 4]; 4] {
        let s = self.survival_norm;
        let b = self.error_norm;
        let g = self.survival_overlap;
        let x = self.error_overlap;
        [
            [s, 0.0, 0.0, g],
            [0.0, b, x, 0.0],
            [0.0, x, b, 0.0],
            [g, 0.0, 0.0, s],
        ]
    }
}

/// Builds the ancilla overlap data for a two-photon error rate `e2` in
/// [0, 1/2].
pub fn attack_overlaps(e2: f64) -> Result<AttackOverlaps> {
    if !e2.is_finite() || !(0.0..=0.5).contains(&e2) {
        return Err(Error::Domain(format!(
            "two-photon error rate must lie in [0, 1/2], got {e2}"
        )));
    }
    Ok(AttackOverlaps {
        e2,
        survival_norm: 1.0 - 2.0 * e2,
        error_norm: 2.0 * e2,
        survival_overlap: 1.0 - 2.0 * e2,
        error_overlap: 2.0 * e2,
    })
}

/// Expansion coefficients of the eight post-attack states over the photon
/// pair basis (first index: 00, 01, 10, 11) and the ancilla family (second
/// index). States 0..4 carry encoded bit 0, states 4..8 carry bit 1; within
/// each half the four states correspond to the preparation phase pairs.
fn phi_coefficients() -> [[[f64; 4]; 4]; 8] {
    let mut c = [[[0.0; 4]; 4]; 8];
    c[0][0][0] = 1.0;
    c[0][1][1] = 1.0;
    c[1][2][2] = 1.0;
    c[1][3][3] = 1.0;
    for pair in [0, 2] {
        c[2][pair][0] = 0.5;
        c[2][pair][2] = 0.5;
    }
    for pair in [1, 3] {
        c[2][pair][1] = 0.5;
        c[2][pair][3] = 0.5;
    }
    c[3][0][0] = 0.5;
    c[3][0][2] = -0.5;
    c[3][1][1] = 0.5;
    c[3][1][3] = -0.5;
    c[3][2][0] = -0.5;
    c[3][2][2] = 0.5;
    c[3][3][1] = -0.5;
    c[3][3][3] = 0.5;
    c[4][0][1] = 1.0;
    c[4][1][0] = -1.0;
    c[5][2][3] = 1.0;
    c[5][3][2] = -1.0;
    for pair in [0, 2] {
        c[6][pair][1] = 0.5;
        c[6][pair][3] = 0.5;
    }
    for pair in [1, 3] {
        c[6][pair][0] = -0.5;
        c[6][pair][2] = -0.5;
    }
    c[7][0][1] = 0.5;
    c[7][0][3] = -0.5;
    c[7][1][0] = -0.5;
    c[7][1][2] = 0.5;
    c[7][2][1] = -0.5;
    c[7][2][3] = 0.5;
    c[7][3][0] = 0.5;
    c[7][3][2] = -0.5;
    c
}

/// Weighted 8x8 Gram matrix of the post-attack ensemble; its spectrum is
/// the spectrum of the eavesdropper's average state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GramMatrix {
    entries: [[f64; 8]; 8],
}

impl GramMatrix {
    /// Wraps raw entries after checking finiteness and symmetry.
    pub fn from_entries(entries: [[f64; 8]; 8]) -> Result<Self> {
        for i in 0..8 {
            for j in 0..8 {
                if !entries[i][j].is_finite() {
                    return Err(Error::Domain(format!(
                        "Gram entry ({i}, {j}) is not finite"
                    )));
                }
                if (entries[i][j] - entries[j][i]).abs() > 1e-12 {
                    return Err(Error::Domain(format!(
                        "Gram matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[[f64; 8]; 8] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..8).map(|i| self.entries[i][i]).sum()
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        eigenvalues_symmetric(&self.entries)
    }
}

/// Assembles the weighted Gram matrix of the eight post-attack states for
/// encoded-bit prior `p0` strictly inside (0, 1).
pub fn build_gram(overlaps: &AttackOverlaps, p0: f64) -> Result<GramMatrix> {
    if !p0.is_finite() || p0 <= 0.0 || p0 >= 1.0 {
        return Err(Error::Domain(format!(
            "bit prior must lie strictly inside (0, 1), got {p0}"
        )));
    }
    let anc = overlaps.ancilla_gram();
    let coeffs = phi_coefficients();
    let mut weights = [0.0; 8];
    for (i, w) in weights.iter_mut().enumerate() {
        let prior = if i < 4 { p0 } else { 1.0 - p0 };
        // Each bit value spreads uniformly over its four phase pairs.
        *w = (prior / 4.0).sqrt();
    }
    let mut entries = [[0.0; 8]; 8];
    for i in 0..8 {
        for j in i..8 {
            let mut inner = 0.0;
            for pair in 0..4 {
                for m in 0..4 {
                    if coeffs[i][pair][m] == 0.0 {
                        continue;
                    }
                    for n in 0..4 {
                        inner += coeffs[i][pair][m] * coeffs[j][pair][n] * anc[m][n];
                    }
                }
            }
            entries[i][j] = weights[i] * weights[j] * inner;
            entries[j][i] = entries[i][j];
        }
    }
    GramMatrix::from_entries(entries)
}

/// Spectrum of a density operator: eight eigenvalues stored in descending
/// order, each clamped into [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum {
    values: [f64; 8],
}

impl Spectrum {
    /// Validates and normalizes raw eigenvalues: anything outside [0, 1] by
    /// more than 1e-9 is rejected, small excursions are clamped, and the
    /// result is sorted descending.
    pub fn new(mut values: [f64; 8]) -> Result<Self> {
        for v in &mut values {
            if !v.is_finite() {
                return Err(Error::Domain("spectrum value is not finite".into()));
            }
            if *v < -1e-9 || *v > 1.0 + 1e-9 {
                return Err(Error::Domain(format!(
                    "spectrum value {v} lies outside [0, 1]"
                )));
            }
            *v = v.clamp(0.0, 1.0);
        }
        values.sort_by(|x, y| y.partial_cmp(x).unwrap());
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64; 8] {
        &self.values
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Eigenvalues of a symmetric 8x8 matrix by cyclic Jacobi rotations.
///
/// Sweeps run until the off-diagonal Frobenius norm drops below 1e-13, with
/// a budget of 200 sweeps. Non-symmetric or non-finite input is a domain
/// error; hitting the sweep budget is an internal inconsistency.
pub fn eigenvalues_symmetric(matrix: &[[f64; 8]; 8]) -> Result<Spectrum> {
    const N: usize = 8;
    const MAX_SWEEPS: usize = 200;
    const OFF_TOL: f64 = 1e-13;
    for i in 0..N {
        for j in 0..N {
            if !matrix[i][j].is_finite() {
                return Err(Error::Domain(format!("entry ({i}, {j}) is not finite")));
            }
            if (matrix[i][j] - matrix[j][i]).abs() > 1e-12 {
                return Err(Error::Domain(format!(
                    "matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    let mut a = *matrix;
    for _ in 0..MAX_SWEEPS {
        let mut off_sq = 0.0;
        for i in 0..N {
            for j in (i + 1)..N {
                off_sq += 2.0 * a[i][j] * a[i][j];
            }
        }
        if off_sq.sqrt() < OFF_TOL {
            let mut values = [0.0; N];
            for (i, v) in values.iter_mut().enumerate() {
                *v = a[i][i];
            }
            return Spectrum::new(values);
        }
        for p in 0..N - 1 {
            for q in (p + 1)..N {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let tau = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let app = a[p][p];
                let aqq = a[q][q];
                a[p][p] = app - t * apq;
                a[q][q] = aqq + t * apq;
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for i in 0..N {
                    if i == p || i == q {
                        continue;
                    }
                    let aip = a[i][p];
                    let aiq = a[i][q];
                    a[i][p] = c * aip - s * aiq;
                    a[p][i] = a[i][p];
                    a[i][q] = c * aiq + s * aip;
                    a[q][i] = a[i][q];
                }
            }
        }
    }
    Err(Error::Inconsistent(
        "Jacobi eigensolver did not converge within 200 sweeps".into(),
    ))
}

/// Von Neumann entropy in bits of a density spectrum; the eigenvalues must
/// sum to 1 within 1e-8.
pub fn von_neumann_entropy(spectrum: &Spectrum) -> Result<f64> {
    let sum = spectrum.sum();
    if (sum - 1.0).abs() > 1e-8 {
        return Err(Error::Domain(format!(
            "spectrum sums to {sum}, not a density spectrum"
        )));
    }
    Ok(spectrum
        .values()
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.log2())
        .sum())
}

/// Entropy of either bit-conditioned ensemble. The conditional Gram matrix
/// has the disturbance-independent spectrum {1/2, 1/4, 1/4, 0}, so this is
/// a constant 3/2.
const CONDITIONED_ENTROPY: f64 = 1.5;

/// Holevo information an eavesdropper gains about the encoded bit from a
/// two-photon pulse with error rate `e2`, for bit prior `p0`.
///
/// With a balanced prior this equals `1/2 + h(2 e2) / 2`, where the entropy
/// argument is evaluated as written (the quantity peaks at `e2 = 1/4` and
/// is symmetric about it). The pipeline route through the Gram spectrum is
/// kept as the primary implementation; the closed form serves as its check.
pub fn holevo_two_photon(e2: f64, p0: f64) -> Result<f64> {
    let overlaps = attack_overlaps(e2)?;
    let gram = build_gram(&overlaps, p0)?;
    let spectrum = gram.spectrum()?;
    let total = von_neumann_entropy(&spectrum)?;
    Ok((total - CONDITIONED_ENTROPY).max(0.0))
}

/// Scans the bit prior over a uniform grid in [0.05, 0.95] and returns the
/// `(p0, holevo)` pair maximizing the two-photon bound. Exploration helper;
/// the capacity engine always uses the balanced prior.
pub fn holevo_two_photon_best_p0(e2: f64, grid_points: usize) -> Result<(f64, f64)> {
    if grid_points < 2 {
        return Err(Error::Domain(
            "prior scan needs at least two grid points".into(),
        ));
    }
    let mut best = (0.5, f64::NEG_INFINITY);
    for i in 0..grid_points {
        let p0 = 0.05 + 0.90 * (i as f64) / ((grid_points - 1) as f64);
        let chi = holevo_two_photon(e2, p0)?;
        if chi > best.1 {
            best = (p0, chi);
        }
    }
    Ok(best)
}

/// Information an eavesdropper gains about the encoded bit from a
/// single-photon pulse with error rate `e1`: `h(2 e1)` with the argument
/// capped at 1/2, so the bound saturates at one bit for `e1 >= 1/4`.
pub fn eve_info_single(e1: f64) -> Result<f64> {
    if !e1.is_finite() || !(0.0..=0.5).contains(&e1) {
        return Err(Error::Domain(format!(
            "single-photon error rate must lie in [0, 1/2], got {e1}"
        )));
    }
    binary_entropy((2.0 * e1).min(0.5))
}

/// Information ceded per pulse of three or more photons: one full bit, the
/// worst case for an unambiguous splitting attack.
pub fn eve_info_multi(n: u32) -> Result<f64> {
    if n < 3 {
        return Err(Error::Domain(format!(
            "multi-photon worst case applies to n >= 3, got {n}"
        )));
    }
    Ok(1.0)
}
