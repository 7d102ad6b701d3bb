//! Pilot design and least-squares estimation of the direct and effective
//! reflected channels at user 1.
//!
//! During training the AP repeats the pilot symbol 1 while the surface steps
//! its common phase through a fixed schedule φ'₁, …, φ'_L. Observation l is
//! `z_l = √P₁(h₁ + ḡ₁e^{jφ'_l}) + w_l`, so the design matrix has rows
//! `[1, e^{jφ'_l}]` and any rank-2 schedule identifies both unknowns. The
//! training length is independent of the element count: two pilots suffice
//! no matter how large the surface is, which is the whole point of encoding
//! over the common phase. No geometry type appears in this module.

use num_complex::Complex64;

/// Errors from plan construction and estimation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EstimationError {
    /// Fewer than two training phases.
    #[error("training plan needs at least 2 phases, got {0}")]
    TooShort(usize),
    /// The design matrix is (numerically) rank deficient.
    #[error("singular design: training phases do not separate the two channels")]
    SingularDesign,
    /// Observation/noise vector length differs from the plan length.
    #[error("expected {expected} observations, got {got}")]
    LengthMismatch { got: usize, expected: usize },
}

/// A common-phase training schedule; the pilot symbol is fixed to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingPlan {
    phases: Vec<f64>,
}

impl TrainingPlan {
    /// Validates length and rank. The design is rank 2 exactly when
    /// `det(ΦᴴΦ) = L² − |Σ e^{jφ'_l}|²` is positive.
    pub fn new(phases: Vec<f64>) -> Result<Self, EstimationError> {
        if phases.len() < 2 {
            return Err(EstimationError::TooShort(phases.len()));
        }
        let l = phases.len() as f64;
        let s: Complex64 = phases.iter().map(|&p| Complex64::cis(p)).sum();
        let det = l * l - s.norm_sqr();
        if det <= 1e-12 * l * l {
            return Err(EstimationError::SingularDesign);
        }
        Ok(Self { phases })
    }

    /// Minimum-overhead schedule: L = 2 with φ'₁ = 0, φ'₂ = −π, giving
    /// design rows [1, 1] and [1, −1].
    pub fn default_plan() -> Self {
        Self::new(vec![0.0, -std::f64::consts::PI]).expect("default plan is rank 2")
    }

    /// Training length L.
    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// Rows `[1, e^{jφ'_l}]` of the design matrix Φ.
    pub fn design_rows(&self) -> Vec<[Complex64; 2]> {
        self.phases
            .iter()
            .map(|&p| [Complex64::new(1.0, 0.0), Complex64::cis(p)])
            .collect()
    }

    /// Normal matrix ΦᴴΦ.
    pub fn gram(&self) -> [[Complex64; 2]; 2] {
        let l = self.phases.len() as f64;
        let s: Complex64 = self.phases.iter().map(|&p| Complex64::cis(p)).sum();
        [
            [Complex64::new(l, 0.0), s],
            [s.conj(), Complex64::new(l, 0.0)],
        ]
    }

    /// Estimation-error covariance (σ²/P₁)·(ΦᴴΦ)⁻¹ for noise power σ² and
    /// pilot power P₁.
    pub fn error_covariance(&self, p1: f64, noise_power: f64) -> [[Complex64; 2]; 2] {
        let g = self.gram();
        let det = (g[0][0] * g[1][1] - g[0][1] * g[1][0]).re;
        let scale = noise_power / (p1 * det);
        [
            [g[1][1] * scale, -g[0][1] * scale],
            [-g[1][0] * scale, g[0][0] * scale],
        ]
    }
}

/// Received pilot vector: `z_l = √P₁(h₁ + ḡ₁e^{jφ'_l}) + w_l`.
pub fn receive_pilots(
    plan: &TrainingPlan,
    h1: Complex64,
    g_bar_1: Complex64,
    p1: f64,
    noise: &[Complex64],
) -> Result<Vec<Complex64>, EstimationError> {
    if noise.len() != plan.len() {
        return Err(EstimationError::LengthMismatch {
            got: noise.len(),
            expected: plan.len(),
        });
    }
    let a = p1.sqrt();
    Ok(plan
        .phases()
        .iter()
        .zip(noise.iter())
        .map(|(&phi, &w)| a * (h1 + g_bar_1 * Complex64::cis(phi)) + w)
        .collect())
}

/// Least-squares estimates `[ĥ₁; ĝ̄₁] = Φ† z / √P₁` via the 2×2 normal
/// equations. Noiseless observations are recovered to machine precision.
pub fn ls_estimate(
    plan: &TrainingPlan,
    z: &[Complex64],
    p1: f64,
) -> Result<(Complex64, Complex64), EstimationError> {
    if z.len() != plan.len() {
        return Err(EstimationError::LengthMismatch {
            got: z.len(),
            expected: plan.len(),
        });
    }
    let g = plan.gram();
    let det = (g[0][0] * g[1][1] - g[0][1] * g[1][0]).re;
    let l = plan.len() as f64;
    if det <= 1e-12 * l * l {
        return Err(EstimationError::SingularDesign);
    }
    // Φᴴz accumulated row by row.
    let mut rhs = [Complex64::default(); 2];
    for (row, &zl) in plan.design_rows().iter().zip(z.iter()) {
        rhs[0] += row[0].conj() * zl;
        rhs[1] += row[1].conj() * zl;
    }
    let scale = 1.0 / (det * p1.sqrt());
    let h1 = (g[1][1] * rhs[0] - g[0][1] * rhs[1]) * scale;
    let g_bar_1 = (g[0][0] * rhs[1] - g[1][0] * rhs[0]) * scale;
    Ok((h1, g_bar_1))
}
