//! Optimal passive beamforming toward user 2 and exact gain evaluation.
//!
//! The surface's reflection decomposes as θ = e^{jφ}·θ̄: a per-element
//! pattern θ̄ times one common phase φ. The beamforming gain |ḡ₂ᴴθ̄|² is
//! invariant to φ, which frees the common phase to carry the space-time
//! code. Aligning θ̄ with the cascaded channel's phases maximizes the gain
//! at the 1-norm of ḡ₂.

use num_complex::Complex64;

/// Errors from reflection-vector construction and gain evaluation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BeamformingError {
    /// Entry `index` of the per-element pattern is not unit-modulus.
    #[error("per-element pattern entry {index} has modulus {modulus}, not 1")]
    NonUnitModulus { index: usize, modulus: f64 },
    /// Vector lengths disagree.
    #[error("vector length {got} does not match {expected}")]
    LengthMismatch { got: usize, expected: usize },
    /// The cascaded channel is identically zero; its phase is undefined.
    #[error("undefined phase: cascaded channel vector is zero")]
    UndefinedPhase,
}

/// A full surface reflection state: common phase plus unit-modulus
/// per-element pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionVector {
    /// Common phase φ applied on top of the pattern.
    pub common_phase: f64,
    per_element: Vec<Complex64>,
}

impl ReflectionVector {
    /// Validates that every pattern entry has modulus 1 within 1e-12.
    pub fn new(common_phase: f64, per_element: Vec<Complex64>) -> Result<Self, BeamformingError> {
        for (index, v) in per_element.iter().enumerate() {
            let modulus = v.norm();
            if (modulus - 1.0).abs() > 1e-12 {
                return Err(BeamformingError::NonUnitModulus { index, modulus });
            }
        }
        Ok(Self {
            common_phase,
            per_element,
        })
    }

    /// The per-element pattern θ̄.
    pub fn per_element(&self) -> &[Complex64] {
        &self.per_element
    }

    /// Number of elements.
    pub fn len(&self) -> usize {
        self.per_element.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_element.is_empty()
    }

    /// The full reflection vector θ = e^{jφ}·θ̄.
    pub fn full(&self) -> Vec<Complex64> {
        let rot = Complex64::cis(self.common_phase);
        self.per_element.iter().map(|t| rot * t).collect()
    }

    /// Same pattern under a different common phase.
    pub fn with_common_phase(&self, common_phase: f64) -> Self {
        Self {
            common_phase,
            per_element: self.per_element.clone(),
        }
    }
}

/// Cascaded AP → IRS → user-2 channel ḡ₂, defined through its
/// conjugate-transpose row ḡ₂ᴴ = g₀ᵀ diag(g₂): entry n is `conj(g0ₙ·g2ₙ)`.
pub fn cascaded_vector(
    g0: &[Complex64],
    g2: &[Complex64],
) -> Result<Vec<Complex64>, BeamformingError> {
    if g0.len() != g2.len() {
        return Err(BeamformingError::LengthMismatch {
            got: g2.len(),
            expected: g0.len(),
        });
    }
    Ok(g0
        .iter()
        .zip(g2.iter())
        .map(|(a, b)| (a * b).conj())
        .collect())
}

/// Phase-aligned optimal pattern θ̄* = e^{j∠ḡ₂}, entrywise.
///
/// Entries where the cascaded channel vanishes get phase 0; an identically
/// zero channel is rejected because no phase is defined anywhere.
pub fn optimal_theta(g_bar_2: &[Complex64]) -> Result<ReflectionVector, BeamformingError> {
    if g_bar_2.iter().all(|v| v.norm_sqr() == 0.0) {
        return Err(BeamformingError::UndefinedPhase);
    }
    let pattern = g_bar_2
        .iter()
        .map(|v| {
            let n = v.norm();
            if n == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                v / n
            }
        })
        .collect();
    ReflectionVector::new(0.0, pattern)
}

/// Effective cascaded gain under the optimal pattern: ḡ₂* = ‖ḡ₂‖₁,
/// real and nonnegative.
pub fn optimal_effective_gain(g_bar_2: &[Complex64]) -> f64 {
    g_bar_2.iter().map(|v| v.norm()).sum()
}

/// Beamforming gain |ḡ₂ᴴ(e^{jφ}θ̄)|². The common phase enters the inner
/// product and drops out of the modulus, so the result is φ-invariant.
pub fn beamforming_gain(
    g_bar_2: &[Complex64],
    refl: &ReflectionVector,
) -> Result<f64, BeamformingError> {
    if g_bar_2.len() != refl.len() {
        return Err(BeamformingError::LengthMismatch {
            got: refl.len(),
            expected: g_bar_2.len(),
        });
    }
    let rot = Complex64::cis(refl.common_phase);
    let sum: Complex64 = g_bar_2
        .iter()
        .zip(refl.per_element().iter())
        .map(|(g, t)| g.conj() * (rot * t))
        .sum();
    Ok(sum.norm_sqr())
}

/// Received SNR at user 2: γ̃ = P₂·|h₂e^{−jφ} + ḡ₂*|²/σ².
///
/// The transmitted symbol is pre-compensated by e^{−jφ}, which makes the
/// reflected term φ-free and rotates the direct term instead.
pub fn user2_received_snr(
    h2: Complex64,
    g_bar_2_star: f64,
    common_phase: f64,
    p2: f64,
    sigma2: f64,
) -> f64 {
    let combined = h2 * Complex64::cis(-common_phase) + g_bar_2_star;
    p2 * combined.norm_sqr() / sigma2
}
