//! Link-level simulation and closed-form analytics for an access point with an
//! integrated intelligent reflecting surface (IRS).
//!
//! The surface decomposes its reflection pattern into a per-element vector and
//! a single common phase-shift. The per-element pattern passively beamforms
//! toward one user while the common phase, which leaves the beamforming gain
//! untouched, simultaneously carries a rate-1 space-time code that gives a
//! second user transmit diversity of order two over its direct and reflected
//! links.
//!
//! Module map:
//!
//! * [`channel`] — UPA geometry, element-wise near-field gains, LoS vectors,
//!   Rayleigh fading samplers.
//! * [`stc`] — PSK modulation, the common-phase space-time code, the
//!   orthogonal combiner/detector, and benchmark encoders.
//! * [`estimation`] — pilot design and least-squares estimation of the
//!   direct and effective reflected channels.
//! * [`beamforming`] — optimal per-element phase design and exact
//!   beamforming-gain evaluation.
//! * [`analytics`] — closed forms: average reflected gain and its limit,
//!   MGF-based SER and its upper bound, beamforming-gain bounds and
//!   asymptotics, direct LoS gain.
//! * [`simkit`] — seeded, reproducible Monte Carlo engine and the experiment
//!   drivers behind the CLI.

pub mod analytics;
pub mod beamforming;
pub mod channel;
pub mod estimation;
pub mod simkit;
pub mod stc;

pub use num_complex::Complex64;
