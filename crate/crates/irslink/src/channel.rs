//! UPA geometry, deterministic element-wise near-field gains, LoS channel
//! vectors, and Rayleigh fading samplers.
//!
//! The surface is a uniform planar array in the y–z plane with the access
//! point on its boresight (x) axis. Every per-element quantity is computed
//! from the element's centered grid offset: for a side of `n` elements the
//! offsets run over `{-(n-1)/2, ..., (n-1)/2}` in unit steps, which are
//! half-integers when `n` is even so that the grid stays symmetric about
//! boresight. Element order everywhere is row-major: the y index varies
//! slowest, the z index fastest.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

/// Errors from geometry/parameter validation and per-element lookups.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChannelError {
    /// A geometry invariant failed; `key` names the offending field.
    #[error("invalid geometry: {key}: {reason}")]
    InvalidGeometry {
        key: &'static str,
        reason: &'static str,
    },
    /// A system-parameter invariant failed; `key` names the offending field.
    #[error("invalid parameter: {key}: {reason}")]
    InvalidParams {
        key: &'static str,
        reason: &'static str,
    },
    /// A requested element offset does not lie on the centered grid.
    #[error("offset ({0}, {1}) is outside the centered element grid")]
    OffsetOutsideGrid(f64, f64),
    /// A supplied vector has the wrong length for the geometry.
    #[error("vector length {got} does not match element count {expected}")]
    LengthMismatch { got: usize, expected: usize },
}

/// Per-element gain model selector.
///
/// `ElementWise` is the physical near-field model (per-element distance and
/// projected aperture). The other two are reference models for comparison
/// overlays: `FreeSpace` keeps the per-element distance but drops the
/// aperture projection; `FarField` applies the boresight gain to every
/// element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainModel {
    ElementWise,
    FreeSpace,
    FarField,
}

/// Uniform planar array layout plus the AP standoff distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrsGeometry {
    /// Element count along the y axis.
    pub n_y: usize,
    /// Element count along the z axis.
    pub n_z: usize,
    /// Element pitch Δ in meters.
    pub spacing: f64,
    /// Effective element area A in m²; at most `spacing²`.
    pub element_area: f64,
    /// Boresight distance r from the AP to the array center, in meters.
    pub ap_distance: f64,
}

impl IrsGeometry {
    /// Validated constructor.
    pub fn new(
        n_y: usize,
        n_z: usize,
        spacing: f64,
        element_area: f64,
        ap_distance: f64,
    ) -> Result<Self, ChannelError> {
        let geom = Self {
            n_y,
            n_z,
            spacing,
            element_area,
            ap_distance,
        };
        geom.validate()?;
        Ok(geom)
    }

    /// Square array shorthand: `n_bar × n_bar` elements.
    pub fn square(
        n_bar: usize,
        spacing: f64,
        element_area: f64,
        ap_distance: f64,
    ) -> Result<Self, ChannelError> {
        Self::new(n_bar, n_bar, spacing, element_area, ap_distance)
    }

    /// Re-checks every invariant; used by the CLI after overrides.
    pub fn validate(&self) -> Result<(), ChannelError> {
        let err = |key, reason| Err(ChannelError::InvalidGeometry { key, reason });
        if self.n_y < 1 {
            return err("n_y", "element count must be at least 1");
        }
        if self.n_z < 1 {
            return err("n_z", "element count must be at least 1");
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return err("spacing", "element pitch must be positive and finite");
        }
        if !(self.element_area > 0.0 && self.element_area.is_finite()) {
            return err("element_area", "element area must be positive and finite");
        }
        if self.element_area > self.spacing * self.spacing * (1.0 + 1e-12) {
            return err("element_area", "element area may not exceed spacing²");
        }
        if !(self.ap_distance > 0.0 && self.ap_distance.is_finite()) {
            return err("ap_distance", "AP distance must be positive and finite");
        }
        Ok(())
    }

    /// Total element count N.
    pub fn num_elements(&self) -> usize {
        self.n_y * self.n_z
    }

    /// Pitch-to-distance ratio ε = Δ/r.
    pub fn epsilon(&self) -> f64 {
        self.spacing / self.ap_distance
    }

    /// Array occupation ratio ξ = A/Δ².
    pub fn occupation_ratio(&self) -> f64 {
        self.element_area / (self.spacing * self.spacing)
    }

    /// Centered grid offsets in row-major order (y slowest, z fastest).
    pub fn offsets(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let cy = (self.n_y as f64 - 1.0) / 2.0;
        let cz = (self.n_z as f64 - 1.0) / 2.0;
        (0..self.n_y).flat_map(move |iy| {
            (0..self.n_z).map(move |iz| (iy as f64 - cy, iz as f64 - cz))
        })
    }

    /// Checks that `(off_y, off_z)` lies on the centered grid lattice.
    pub fn check_offset(&self, off_y: f64, off_z: f64) -> Result<(), ChannelError> {
        let on_axis = |off: f64, n: usize| {
            let k = off + (n as f64 - 1.0) / 2.0;
            k > -1e-9 && k < n as f64 - 1.0 + 1e-9 && (k - k.round()).abs() < 1e-9
        };
        if on_axis(off_y, self.n_y) && on_axis(off_z, self.n_z) {
            Ok(())
        } else {
            Err(ChannelError::OffsetOutsideGrid(off_y, off_z))
        }
    }
}

/// Scenario-wide carrier, power, noise, and path-loss configuration.
///
/// All powers are linear milliwatts; all distances are meters. Conversion
/// from dB/dBm happens at the CLI boundary, never inside compute loops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Carrier wavelength λ in meters.
    pub wavelength: f64,
    /// Transmit power P₁ toward user 1, mW.
    pub tx_power_user1: f64,
    /// Transmit power P₂ toward user 2, mW.
    pub tx_power_user2: f64,
    /// Receiver noise power σ², mW.
    pub noise_power: f64,
    /// Reference path gain β at 1 m (linear).
    pub ref_path_gain: f64,
    /// Path-loss exponent α for the fading links.
    pub path_loss_exp: f64,
    /// AP → user-1 distance, meters.
    pub d_h1: f64,
    /// IRS → user-1 distance, meters.
    pub d_g1: f64,
    /// IRS → user-2 boresight distance r̃, meters.
    pub user2_distance: f64,
    /// Effective aperture A' of user 2's antenna, m².
    pub user2_antenna_area: f64,
    /// PSK constellation order M (power of two, ≥ 2).
    pub psk_order: usize,
}

impl SystemParams {
    /// Re-checks every invariant; used by the CLI after overrides.
    pub fn validate(&self) -> Result<(), ChannelError> {
        let err = |key, reason| Err(ChannelError::InvalidParams { key, reason });
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !pos(self.wavelength) {
            return err("wavelength", "must be positive and finite");
        }
        if !pos(self.tx_power_user1) {
            return err("tx_power_user1", "must be positive and finite");
        }
        if !pos(self.tx_power_user2) {
            return err("tx_power_user2", "must be positive and finite");
        }
        if !pos(self.noise_power) {
            return err("noise_power", "must be positive and finite");
        }
        if !pos(self.ref_path_gain) {
            return err("ref_path_gain", "must be positive and finite");
        }
        if !pos(self.path_loss_exp) {
            return err("path_loss_exp", "must be positive and finite");
        }
        if !pos(self.d_h1) {
            return err("d_h1", "must be positive and finite");
        }
        if !pos(self.d_g1) {
            return err("d_g1", "must be positive and finite");
        }
        if !pos(self.user2_distance) {
            return err("user2_distance", "must be positive and finite");
        }
        if !pos(self.user2_antenna_area) {
            return err("user2_antenna_area", "must be positive and finite");
        }
        if self.psk_order < 2 || !self.psk_order.is_power_of_two() {
            return err("psk_order", "must be a power of two, at least 2");
        }
        Ok(())
    }

    /// Transmit SNR P̄₁ = P₁/σ².
    pub fn tx_snr_user1(&self) -> f64 {
        self.tx_power_user1 / self.noise_power
    }

    /// Mean direct-link power gain ϱ²ₕ = β/d_h1^α.
    pub fn rho2_h1(&self) -> f64 {
        self.ref_path_gain / self.d_h1.powf(self.path_loss_exp)
    }

    /// Per-element fading variance of the IRS → user-1 link, 2β/d_g1^α.
    pub fn g1_element_variance(&self) -> f64 {
        2.0 * self.ref_path_gain / self.d_g1.powf(self.path_loss_exp)
    }
}

/// Distance ratio ρ = r/r̃ between the AP and user-2 standoffs.
pub fn distance_ratio(geom: &IrsGeometry, params: &SystemParams) -> f64 {
    geom.ap_distance / params.user2_distance
}

/// Cross-type invariant: user 2 must sit beyond the AP (0 < ρ < 1).
pub fn validate_scenario(geom: &IrsGeometry, params: &SystemParams) -> Result<(), ChannelError> {
    geom.validate()?;
    params.validate()?;
    if distance_ratio(geom, params) >= 1.0 {
        return Err(ChannelError::InvalidParams {
            key: "user2_distance",
            reason: "must exceed ap_distance (distance ratio ρ < 1)",
        });
    }
    Ok(())
}

/// One draw of the user-1 channels for a coherence block.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Direct AP → user-1 channel.
    pub h1: Complex64,
    /// Deterministic LoS AP → IRS vector.
    pub g0: Vec<Complex64>,
    /// Rayleigh IRS → user-1 vector.
    pub g1: Vec<Complex64>,
    /// Effective reflected gain ḡ₁ = g₀ᵀ diag(θ̄) g₁.
    pub g_bar_1: Complex64,
}

/// Distance from the AP to the element at centered offset `(off_y, off_z)`:
/// r·√(1 + (off_y² + off_z²)ε²).
pub fn element_distance(
    geom: &IrsGeometry,
    off_y: f64,
    off_z: f64,
) -> Result<f64, ChannelError> {
    geom.check_offset(off_y, off_z)?;
    let eps = geom.epsilon();
    let q = off_y * off_y + off_z * off_z;
    Ok(geom.ap_distance * (1.0 + q * eps * eps).sqrt())
}

fn gain_at(area: f64, dist: f64, q: f64, eps: f64, model: GainModel) -> f64 {
    let base = area / (4.0 * PI * dist * dist);
    let stretch = 1.0 + q * eps * eps;
    match model {
        // Per-element distance and cosine-foreshortened aperture.
        GainModel::ElementWise => base / (stretch * stretch.sqrt()),
        // Per-element distance only.
        GainModel::FreeSpace => base / stretch,
        // Boresight gain replicated to every element.
        GainModel::FarField => base,
    }
}

/// AP → element power gain under the selected model.
pub fn ap_element_gain_model(
    geom: &IrsGeometry,
    off_y: f64,
    off_z: f64,
    model: GainModel,
) -> Result<f64, ChannelError> {
    geom.check_offset(off_y, off_z)?;
    let q = off_y * off_y + off_z * off_z;
    Ok(gain_at(
        geom.element_area,
        geom.ap_distance,
        q,
        geom.epsilon(),
        model,
    ))
}

/// AP → element power gain a = A/(4πr²(1 + qε²)^{3/2}) (element-wise model).
pub fn ap_element_gain(geom: &IrsGeometry, off_y: f64, off_z: f64) -> Result<f64, ChannelError> {
    ap_element_gain_model(geom, off_y, off_z, GainModel::ElementWise)
}

/// Element → user-2 power gain b, same form as [`ap_element_gain`] with the
/// user-2 standoff r̃ and ε̃ = Δ/r̃.
pub fn user2_element_gain(
    geom: &IrsGeometry,
    params: &SystemParams,
    off_y: f64,
    off_z: f64,
) -> Result<f64, ChannelError> {
    geom.check_offset(off_y, off_z)?;
    let q = off_y * off_y + off_z * off_z;
    let eps_t = geom.spacing / params.user2_distance;
    Ok(gain_at(
        geom.element_area,
        params.user2_distance,
        q,
        eps_t,
        GainModel::ElementWise,
    ))
}

/// Deterministic LoS AP → IRS vector: per element, magnitude √a and phase
/// −2π·(AP-to-element distance)/λ.
pub fn los_vector_g0(geom: &IrsGeometry, params: &SystemParams) -> Vec<Complex64> {
    let eps = geom.epsilon();
    geom.offsets()
        .map(|(oy, oz)| {
            let q = oy * oy + oz * oz;
            let dist = geom.ap_distance * (1.0 + q * eps * eps).sqrt();
            let amp = gain_at(geom.element_area, geom.ap_distance, q, eps, GainModel::ElementWise)
                .sqrt();
            amp * Complex64::cis(-2.0 * PI * dist / params.wavelength)
        })
        .collect()
}

/// Deterministic LoS IRS → user-2 vector: per element, magnitude √(2b) (the
/// factor 2 accounts for reflection into a half-space) and phase
/// −2π·(element-to-user distance)/λ.
pub fn los_vector_g2(geom: &IrsGeometry, params: &SystemParams) -> Vec<Complex64> {
    let eps_t = geom.spacing / params.user2_distance;
    geom.offsets()
        .map(|(oy, oz)| {
            let q = oy * oy + oz * oz;
            let dist = params.user2_distance * (1.0 + q * eps_t * eps_t).sqrt();
            let b = gain_at(
                geom.element_area,
                params.user2_distance,
                q,
                eps_t,
                GainModel::ElementWise,
            );
            (2.0 * b).sqrt() * Complex64::cis(-2.0 * PI * dist / params.wavelength)
        })
        .collect()
}

/// One circularly-symmetric complex Gaussian draw with the given variance
/// (total over both quadrature components).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(scale * re, scale * im)
}

/// Draws the user-1 channels for one coherence block.
///
/// `h1` is CN(0, β/d_h1^α); the entries of `g1` are i.i.d. CN(0, 2β/d_g1^α).
/// The effective reflected gain uses the supplied per-element pattern θ̄ when
/// given and an all-ones pattern otherwise — the two are distributionally
/// identical for any unit-modulus θ̄.
pub fn sample_user1_channels<R: Rng + ?Sized>(
    geom: &IrsGeometry,
    params: &SystemParams,
    theta_bar: Option<&[Complex64]>,
    rng: &mut R,
) -> Result<ChannelRealization, ChannelError> {
    let n = geom.num_elements();
    if let Some(tb) = theta_bar {
        if tb.len() != n {
            return Err(ChannelError::LengthMismatch {
                got: tb.len(),
                expected: n,
            });
        }
    }
    let h1 = complex_gaussian(rng, params.rho2_h1());
    let var_g1 = params.g1_element_variance();
    let g1: Vec<Complex64> = (0..n).map(|_| complex_gaussian(rng, var_g1)).collect();
    let g0 = los_vector_g0(geom, params);
    let g_bar_1 = match theta_bar {
        Some(tb) => g0
            .iter()
            .zip(tb.iter())
            .zip(g1.iter())
            .map(|((a, t), b)| a * t * b)
            .sum(),
        None => g0.iter().zip(g1.iter()).map(|(a, b)| a * b).sum(),
    };
    Ok(ChannelRealization { h1, g0, g1, g_bar_1 })
}

/// Mean effective reflected gain E|ḡ₁|² by exact double summation under the
/// selected per-element gain model: Σ a(idx) · 2β/d_g1^α.
pub fn avg_reflected_gain_numeric_model(
    geom: &IrsGeometry,
    params: &SystemParams,
    model: GainModel,
) -> f64 {
    let eps = geom.epsilon();
    let sum_a: f64 = geom
        .offsets()
        .map(|(oy, oz)| {
            let q = oy * oy + oz * oz;
            gain_at(geom.element_area, geom.ap_distance, q, eps, model)
        })
        .sum();
    sum_a * params.g1_element_variance()
}

/// Mean effective reflected gain E|ḡ₁|² under the element-wise near-field
/// model (the brute-force oracle for the closed form).
pub fn avg_reflected_gain_numeric(geom: &IrsGeometry, params: &SystemParams) -> f64 {
    avg_reflected_gain_numeric_model(geom, params, GainModel::ElementWise)
}

/// Reference scenario geometry: square array, λ/2 pitch at λ = 5 cm, full
/// occupation (A = Δ²), AP standoff 0.5 m.
pub fn reference_geometry(n_bar: usize) -> IrsGeometry {
    IrsGeometry::square(n_bar, 0.025, 0.025 * 0.025, 0.5)
        .expect("reference geometry is valid")
}

/// Reference scenario parameters: 5 cm carrier, −30 dB path gain at 1 m,
/// exponent 3, both users' fading links at 80 m, user 2 at 50 m boresight
/// with a single-element aperture, −85 dBm noise, 8-PSK, 30 dBm transmit
/// power on both links.
pub fn reference_params() -> SystemParams {
    SystemParams {
        wavelength: 0.05,
        tx_power_user1: 1e3,
        tx_power_user2: 1e3,
        noise_power: 10f64.powf(-8.5),
        ref_path_gain: 1e-3,
        path_loss_exp: 3.0,
        d_h1: 80.0,
        d_g1: 80.0,
        user2_distance: 50.0,
        user2_antenna_area: 0.025 * 0.025,
        psk_order: 8,
    }
}
