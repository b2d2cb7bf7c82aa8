//! Underwater optical channel model.
//!
//! The received symbol is modeled as
//!
//! ```text
//! r_i = h · s_i · e^{jφ_i} + n_i
//! ```
//!
//! where `h` is a gamma-gamma turbulence fading coefficient drawn once per
//! frame (mean 1), `φ_i` is per-symbol phase jitter (Tikhonov by default, a
//! wrapped Gaussian as the low-deviation approximation), and `n_i` is
//! circular complex Gaussian noise scaled so the labeled OSNR is exact on a
//! unit-energy constellation.
//!
//! Turbulence strength enters through the plane-wave Rytov variance
//! `σ_i² = 1.23·Cn²·k^{7/6}·L^{11/6}` with `k = 2π/λ`, which fixes the
//! gamma-gamma shape parameters α and β. A simplified receiver link budget
//! (Beer–Lambert path loss, shot plus TIA thermal noise over an effective
//! bandwidth) predicts an OSNR from physical link parameters.

use num_complex::Complex64;

use crate::math::{bessel_k, ln_gamma};
use crate::rng::Prng;
use crate::signal::IQFrame;
use crate::{Error, Result};

/// Electron charge in coulombs.
const ELECTRON_CHARGE: f64 = 1.602_176_634e-19;

// ---------------------------------------------------------------------------
// Parameter types
// ---------------------------------------------------------------------------

/// Gamma-gamma turbulence description for one link.
#[derive(Clone, Debug)]
pub struct TurbulenceParams {
    /// Refractive-index structure constant, m^(-2/3).
    pub cn2: f64,
    /// Optical wavelength in meters.
    pub wavelength: f64,
    /// Link distance in meters.
    pub distance: f64,
    /// Large-scale gamma shape parameter.
    pub alpha: f64,
    /// Small-scale gamma shape parameter.
    pub beta: f64,
    /// Rytov variance σ_i².
    pub scintillation_index: f64,
}

impl TurbulenceParams {
    /// Derive α and β from the link geometry via the Rytov variance.
    pub fn from_link(cn2: f64, wavelength: f64, distance: f64) -> Result<Self> {
        let scintillation_index = rytov_variance(cn2, wavelength, distance)?;
        let (alpha, beta) = gg_params(scintillation_index)?;
        Ok(TurbulenceParams {
            cn2,
            wavelength,
            distance,
            alpha,
            beta,
            scintillation_index,
        })
    }
}

/// Phase-jitter distribution choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseModel {
    /// exp(cos φ / σ_φ²) / (2π I₀(1/σ_φ²)) — a von Mises law with
    /// concentration κ = 1/σ_φ².
    Tikhonov,
    /// N(0, σ_φ²) wrapped onto [-π, π]; the low-deviation approximation.
    WrappedGaussian,
}

/// Additive/multiplicative noise levels for one channel realization.
#[derive(Clone, Copy, Debug)]
pub struct NoiseSpec {
    /// Labeled signal-to-noise ratio in dB; `f64::INFINITY` disables noise.
    pub osnr_db: f64,
    /// Phase jitter standard deviation in degrees.
    pub phase_std_deg: f64,
    pub phase_model: PhaseModel,
}

impl NoiseSpec {
    pub fn new(osnr_db: f64, phase_std_deg: f64) -> Self {
        NoiseSpec {
            osnr_db,
            phase_std_deg,
            phase_model: PhaseModel::Tikhonov,
        }
    }

    /// No additive noise, no phase jitter.
    pub fn noiseless() -> Self {
        NoiseSpec::new(f64::INFINITY, 0.0)
    }
}

/// Receiver front-end and path parameters for OSNR prediction.
#[derive(Clone, Debug)]
pub struct LinkBudget {
    /// Transmitted optical power, watts.
    pub tx_power: f64,
    /// Beer–Lambert attenuation coefficient, 1/m.
    pub path_loss_coeff: f64,
    /// Photodetector responsivity, A/W.
    pub responsivity: f64,
    /// Receiver noise bandwidth, Hz.
    pub noise_bandwidth: f64,
    /// Dimensionless noise bandwidth factor.
    pub bandwidth_factor: f64,
    /// TIA input-referred noise current density, A/√Hz.
    pub tia_noise_current: f64,
    /// Link distance, meters.
    pub distance: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        LinkBudget {
            tx_power: 1e-3,
            path_loss_coeff: 0.056,
            responsivity: 0.4,
            noise_bandwidth: 50e6,
            bandwidth_factor: 0.562,
            tia_noise_current: 5e-12,
            distance: 10.0,
        }
    }
}

// ---------------------------------------------------------------------------
// Turbulence statistics
// ---------------------------------------------------------------------------

/// Plane-wave Rytov variance σ_i² = 1.23·Cn²·k^(7/6)·L^(11/6).
pub fn rytov_variance(cn2: f64, wavelength: f64, distance: f64) -> Result<f64> {
    for (name, v) in [("cn2", cn2), ("wavelength", wavelength), ("distance", distance)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::invalid_argument(format!(
                "{name} must be positive and finite, got {v}"
            )));
        }
    }
    let k = 2.0 * std::f64::consts::PI / wavelength;
    Ok(1.23 * cn2 * k.powf(7.0 / 6.0) * distance.powf(11.0 / 6.0))
}

/// Gamma-gamma shape parameters (α, β) for a plane wave:
///
/// ```text
/// α = [exp(0.54 σ² / (1 + 1.22 σ^(12/5))^(7/6)) - 1]⁻¹
/// β = [exp(0.509 σ² / (1 + 0.69 σ^(12/5))^(5/6)) - 1]⁻¹
/// ```
///
/// with σ^(12/5) = (σ²)^(6/5).
pub fn gg_params(sigma_i2: f64) -> Result<(f64, f64)> {
    if !(sigma_i2 > 0.0) || !sigma_i2.is_finite() {
        return Err(Error::invalid_argument(format!(
            "scintillation index must be positive, got {sigma_i2}"
        )));
    }
    let s125 = sigma_i2.powf(6.0 / 5.0); // σ_i^(12/5)
    let alpha = 1.0 / ((0.54 * sigma_i2 / (1.0 + 1.22 * s125).powf(7.0 / 6.0)).exp_m1());
    let beta = 1.0 / ((0.509 * sigma_i2 / (1.0 + 0.69 * s125).powf(5.0 / 6.0)).exp_m1());
    Ok((alpha, beta))
}

/// Gamma-gamma probability density
///
/// ```text
/// f(h) = 2(αβ)^((α+β)/2) / (Γ(α)Γ(β)) · h^((α+β)/2 - 1) · K_{α-β}(2√(αβh))
/// ```
///
/// Normalized with mean fading E[h] = 1.
pub fn gg_pdf(h: f64, alpha: f64, beta: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::invalid_argument(format!("h must be positive, got {h}")));
    }
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(Error::invalid_argument(format!(
            "alpha and beta must be positive, got ({alpha}, {beta})"
        )));
    }
    let half_sum = 0.5 * (alpha + beta);
    let ln_coef = std::f64::consts::LN_2 + half_sum * (alpha * beta).ln()
        - ln_gamma(alpha)
        - ln_gamma(beta)
        + (half_sum - 1.0) * h.ln();
    Ok(ln_coef.exp() * bessel_k(alpha - beta, 2.0 * (alpha * beta * h).sqrt()))
}

/// One fading coefficient h = X·Y with X ~ Gamma(α, 1/α), Y ~ Gamma(β, 1/β),
/// so E[h] = 1 and the scintillation index is 1/α + 1/β + 1/(αβ).
pub fn sample_fading(alpha: f64, beta: f64, rng: &mut Prng) -> Result<f64> {
    if !(alpha > 0.0 && beta > 0.0) || !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::invalid_argument(format!(
            "alpha and beta must be positive and finite, got ({alpha}, {beta})"
        )));
    }
    Ok(rng.gamma(alpha, 1.0 / alpha) * rng.gamma(beta, 1.0 / beta))
}

/// One phase-jitter draw in radians, in [-π, π]. `sigma_rad` is the jitter
/// standard deviation; zero returns exactly zero.
pub fn sample_phase_noise(sigma_rad: f64, model: PhaseModel, rng: &mut Prng) -> Result<f64> {
    if sigma_rad < 0.0 || !sigma_rad.is_finite() {
        return Err(Error::invalid_argument(format!(
            "phase std must be non-negative, got {sigma_rad}"
        )));
    }
    if sigma_rad == 0.0 {
        return Ok(0.0);
    }
    let phi = match model {
        PhaseModel::Tikhonov => rng.von_mises(1.0 / (sigma_rad * sigma_rad)),
        PhaseModel::WrappedGaussian => {
            let raw = sigma_rad * rng.normal();
            wrap_angle(raw)
        }
    };
    Ok(phi)
}

/// Wrap an angle to [-π, π].
fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut y = x.rem_euclid(two_pi);
    if y > std::f64::consts::PI {
        y -= two_pi;
    }
    y
}

/// Per-quadrature AWGN standard deviation for a labeled OSNR: the total
/// noise power `Es · 10^(-osnr/10)` split equally between I and Q.
pub fn awgn_sigma(osnr_db: f64, symbol_energy: f64) -> Result<f64> {
    if !(symbol_energy > 0.0) {
        return Err(Error::invalid_argument(format!(
            "symbol energy must be positive, got {symbol_energy}"
        )));
    }
    let noise_power = symbol_energy * 10.0f64.powf(-osnr_db / 10.0);
    Ok((noise_power / 2.0).sqrt())
}

/// Push a frame through the channel: one fading draw per frame (skipped when
/// `turbulence` is `None`), an independent phase draw and complex Gaussian
/// noise per symbol. Deterministic for a fixed generator state.
pub fn apply_channel(
    frame: &IQFrame,
    turbulence: Option<&TurbulenceParams>,
    noise: &NoiseSpec,
    rng: &mut Prng,
) -> Result<IQFrame> {
    let h = match turbulence {
        Some(t) => sample_fading(t.alpha, t.beta, rng)?,
        None => 1.0,
    };
    let sigma_phase = noise.phase_std_deg.to_radians();
    if sigma_phase < 0.0 {
        return Err(Error::invalid_argument("phase std must be non-negative"));
    }
    let sigma = awgn_sigma(noise.osnr_db, 1.0)?;
    let mut symbols = Vec::with_capacity(frame.len());
    for s in &frame.symbols {
        let phi = sample_phase_noise(sigma_phase, noise.phase_model, rng)?;
        let rotated = if phi == 0.0 {
            h * s
        } else {
            h * s * Complex64::new(phi.cos(), phi.sin())
        };
        let out = if sigma == 0.0 {
            rotated
        } else {
            rotated + Complex64::new(sigma * rng.normal(), sigma * rng.normal())
        };
        symbols.push(out);
    }
    Ok(IQFrame {
        format: frame.format,
        symbols,
    })
}

/// Predicted OSNR in dB from the receiver link budget:
/// Beer–Lambert received power, shot noise `2qI·B_eff`, and TIA thermal
/// noise `i_n²·B_eff` over the effective bandwidth
/// `B_eff = factor · bandwidth`.
pub fn link_budget_osnr(budget: &LinkBudget) -> Result<f64> {
    let fields = [
        ("tx_power", budget.tx_power),
        ("responsivity", budget.responsivity),
        ("noise_bandwidth", budget.noise_bandwidth),
        ("bandwidth_factor", budget.bandwidth_factor),
        ("tia_noise_current", budget.tia_noise_current),
        ("distance", budget.distance),
    ];
    for (name, v) in fields {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::invalid_argument(format!(
                "{name} must be positive and finite, got {v}"
            )));
        }
    }
    if budget.path_loss_coeff < 0.0 || !budget.path_loss_coeff.is_finite() {
        return Err(Error::invalid_argument(
            "path_loss_coeff must be non-negative and finite",
        ));
    }
    let received = budget.tx_power * (-budget.path_loss_coeff * budget.distance).exp();
    let current = budget.responsivity * received;
    let b_eff = budget.bandwidth_factor * budget.noise_bandwidth;
    let shot_var = 2.0 * ELECTRON_CHARGE * current * b_eff;
    let thermal_var = budget.tia_noise_current * budget.tia_noise_current * b_eff;
    Ok(10.0 * (current * current / (shot_var + thermal_var)).log10())
}
