//! Biexciton-exciton cascade pair source driven by a double pump pulse.

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ZERO};
use crate::state::{validate_density_matrix, DensityMatrix};

/// Double-pulse pump leaving the pump interferometer.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct PumpConfig {
    /// Pulse area of the early pulse (rad).
    pub theta1: f64,
    /// Pulse area of the late pulse (rad).
    pub theta2: f64,
    /// Intensity FWHM of each pulse envelope (s).
    pub pulse_fwhm: f64,
    /// Early-late separation (s).
    pub bin_delay: f64,
    /// Relative phase of the two pulses as seen by the two-photon transition (rad).
    pub pump_phase: f64,
    /// Maps pulse area to two-photon flop angle: `angle = gain * theta^2`.
    pub two_photon_gain: f64,
}

impl Default for PumpConfig {
    fn default() -> Self {
        Self {
            theta1: 1.0,
            theta2: 1.0,
            pulse_fwhm: 4e-12,
            bin_delay: 3.2e-9,
            pump_phase: 0.0,
            two_photon_gain: 0.676_130_5,
        }
    }
}

impl PumpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.pulse_fwhm > 0.0) {
            return Err(Error::OutOfRange { name: "pulse_fwhm", value: self.pulse_fwhm });
        }
        if !(self.bin_delay > 10.0 * self.pulse_fwhm) {
            return Err(Error::OutOfRange { name: "bin_delay", value: self.bin_delay });
        }
        if !(self.two_photon_gain > 0.0) {
            return Err(Error::OutOfRange { name: "two_photon_gain", value: self.two_photon_gain });
        }
        for (name, v) in [("theta1", self.theta1), ("theta2", self.theta2), ("pump_phase", self.pump_phase)] {
            if !v.is_finite() {
                return Err(Error::OutOfRange { name, value: v });
            }
        }
        Ok(())
    }
}

/// Physical knobs of the pair source.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SourceParams {
    pub pump: PumpConfig,
    /// Multiplies the early-early / late-late coherence.
    pub coherence_factor: f64,
    /// Fraction of pairs coming from cross-pulse double excitation.
    pub double_fraction: f64,
    /// Late/early excitation amplitude ratio.
    pub amplitude_imbalance: f64,
    /// Biexciton lifetime (s).
    pub tau_xx: f64,
    /// Exciton lifetime (s).
    pub tau_x: f64,
    /// Biexciton photon coherence time (s). Informational.
    pub coh_xx: f64,
    /// Exciton photon coherence time (s). Informational.
    pub coh_x: f64,
}

impl Default for SourceParams {
    /// Calibrated to populations 0.44 / 0.06 and coherence 0.25.
    fn default() -> Self {
        Self {
            pump: PumpConfig::default(),
            coherence_factor: 0.25 / 0.44,
            double_fraction: 0.12,
            amplitude_imbalance: 1.0,
            tau_xx: 405e-12,
            tau_x: 771e-12,
            coh_xx: 211e-12,
            coh_x: 178e-12,
        }
    }
}

impl SourceParams {
    /// Noiseless source emitting `(|00> + e^{i phi}|11>)/sqrt(2)`.
    pub fn ideal() -> Self {
        Self { coherence_factor: 1.0, double_fraction: 0.0, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        self.pump.validate()?;
        if !(0.0..=1.0).contains(&self.coherence_factor) {
            return Err(Error::OutOfRange { name: "coherence_factor", value: self.coherence_factor });
        }
        if !(0.0..1.0).contains(&self.double_fraction) {
            return Err(Error::OutOfRange { name: "double_fraction", value: self.double_fraction });
        }
        if !(self.amplitude_imbalance >= 0.0 && self.amplitude_imbalance.is_finite()) {
            return Err(Error::OutOfRange { name: "amplitude_imbalance", value: self.amplitude_imbalance });
        }
        for (name, v) in
            [("tau_xx", self.tau_xx), ("tau_x", self.tau_x), ("coh_xx", self.coh_xx), ("coh_x", self.coh_x)]
        {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::OutOfRange { name, value: v });
            }
        }
        Ok(())
    }
}

/// Unit-peak Gaussian envelope with intensity FWHM `fwhm`.
fn envelope(t: f64, fwhm: f64) -> f64 {
    let x = t / fwhm;
    (-4.0 * core::f64::consts::LN_2 * x * x).exp()
}

/// Rotating-frame pump Rabi amplitude
/// `theta1 f(t) + e^{i phi_P} theta2 f(t - dt)`.
pub fn pump_field(t: f64, cfg: &PumpConfig) -> Complex64 {
    let early = envelope(t, cfg.pulse_fwhm) * cfg.theta1;
    let late = envelope(t - cfg.bin_delay, cfg.pulse_fwhm) * cfg.theta2;
    Complex64::new(early, 0.0) + Complex64::from_polar(late, cfg.pump_phase)
}

/// Per-bin biexciton preparation probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcitationProbabilities {
    pub early: f64,
    pub late: f64,
    /// Both bins excited; bins are treated as independent.
    pub both: f64,
}

impl ExcitationProbabilities {
    /// Cross-pulse pair coincidences relative to same-pulse ones,
    /// `p_e p_l / (p_e (1 - p_l) + p_l (1 - p_e))` scaled by the two
    /// cross orderings.
    pub fn cross_to_same_ratio(&self) -> f64 {
        let same = self.early * (1.0 - self.late) + self.late * (1.0 - self.early);
        if same == 0.0 {
            return 0.0;
        }
        2.0 * self.both / same
    }
}

/// `p_i = sin^2(gain * theta_i^2 / 2)`, `p_both = p_early * p_late`.
pub fn excitation_probabilities(cfg: &PumpConfig) -> ExcitationProbabilities {
    let p = |theta: f64| {
        let s = (cfg.two_photon_gain * theta * theta / 2.0).sin();
        s * s
    };
    let early = p(cfg.theta1);
    let late = p(cfg.theta2);
    ExcitationProbabilities { early, late, both: early * late }
}

/// `(|00> + e^{i phi}|11>) / sqrt(2)`.
pub fn ideal_state(pump_phase: f64) -> [Complex64; 4] {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    [Complex64::new(h, 0.0), ZERO, ZERO, Complex64::from_polar(h, pump_phase)]
}

/// `(1 - beta) rho_deph + beta/2 (|01><01| + |10><10|)` where `rho_deph`
/// is the (possibly amplitude-imbalanced) pair state with its `|00><11|`
/// coherence scaled by the coherence factor.
pub fn emitted_density_matrix(p: &SourceParams) -> Result<DensityMatrix> {
    p.validate()?;
    let r = p.amplitude_imbalance;
    let norm = 1.0 + r * r;
    let w_early = 1.0 / norm;
    let w_late = r * r / norm;
    let keep = 1.0 - p.double_fraction;
    let coh = Complex64::from_polar(keep * p.coherence_factor * r / norm, -p.pump.pump_phase);

    let mut m = ComplexMatrix::diag(&[keep * w_early, p.double_fraction / 2.0, p.double_fraction / 2.0, keep * w_late]);
    m[(0, 3)] = coh;
    m[(3, 0)] = coh.conj();
    validate_density_matrix(&m)
}

/// Inverts the source model: `beta = 1 - 2 pop`, `g = coh / pop`.
pub fn calibrate_to_populations(target_pop: f64, target_coh: f64) -> Result<(f64, f64)> {
    if !(target_pop > 0.0 && target_pop <= 0.5) {
        return Err(Error::OutOfRange { name: "target_pop", value: target_pop });
    }
    if !(target_coh > 0.0 && target_coh <= target_pop) {
        return Err(Error::OutOfRange { name: "target_coh", value: target_coh });
    }
    Ok((target_coh / target_pop, 1.0 - 2.0 * target_pop))
}
