//! Light-source models: down-conversion pair ensembles with symmetric
//! spectral detuning, and an attenuated pulsed laser with Poisson
//! photon statistics.

use crate::fields::ComplexAmplitude;
use crate::rng::{CounterRng, Stream};
use num_complex::Complex64;
use std::f64::consts::TAU;

/// Vacuum speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// One down-converted pair. The two photons sit symmetrically at
/// +-delta_f about half the pump frequency and share the birth phase
/// psi picked up at emission.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpdcPair {
    /// Signed detuning from the spectral centre, Hz.
    pub delta_f: f64,
    /// Birth phase, uniform on [0, 2 pi).
    pub psi: f64,
    pub pair_index: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpdcEnsembleConfig {
    pub n_pairs: u64,
    /// Gaussian spread of the detuning, Hz.
    pub sigma_f: f64,
    /// Pump frequency, Hz; pairs centre on f0/2.
    pub f0: f64,
    pub seed: u64,
}

/// Derived spectral figures for a pair ensemble.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumStats {
    /// Full width at half maximum of the detuning spectrum, Hz.
    pub fwhm: f64,
    /// 1 / fwhm, s.
    pub coherence_time: f64,
    /// c / fwhm, m.
    pub coherence_length: f64,
}

/// Attenuated pulsed laser. `coherence_time` is informational; the
/// pulse statistics depend only on `mean_n` and `seed`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherentSourceConfig {
    /// Carrier frequency, Hz.
    pub f: f64,
    /// Mean photon number per pulse.
    pub mean_n: f64,
    pub coherence_time: f64,
    pub seed: u64,
}

/// The named field failed validation.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("invalid {field}: {reason}")]
pub struct InvalidConfig {
    pub field: &'static str,
    pub reason: String,
}

impl InvalidConfig {
    fn new(field: &'static str, reason: impl Into<String>) -> Self {
        InvalidConfig {
            field,
            reason: reason.into(),
        }
    }
}

impl SpdcEnsembleConfig {
    pub fn validate(&self) -> Result<(), InvalidConfig> {
        if self.n_pairs < 1 {
            return Err(InvalidConfig::new("n_pairs", "must be at least 1"));
        }
        if !(self.sigma_f.is_finite() && self.sigma_f > 0.0) {
            return Err(InvalidConfig::new(
                "sigma_f",
                format!("must be a positive finite spread, got {}", self.sigma_f),
            ));
        }
        if !(self.f0.is_finite() && self.f0 > 0.0) {
            return Err(InvalidConfig::new(
                "f0",
                format!("must be a positive finite frequency, got {}", self.f0),
            ));
        }
        Ok(())
    }
}

impl CoherentSourceConfig {
    pub fn validate(&self) -> Result<(), InvalidConfig> {
        if !(self.f.is_finite() && self.f > 0.0) {
            return Err(InvalidConfig::new(
                "f",
                format!("carrier frequency must be positive and finite, got {}", self.f),
            ));
        }
        if !(self.mean_n.is_finite() && self.mean_n > 0.0) {
            return Err(InvalidConfig::new(
                "mean_n",
                format!("mean photon number must be positive and finite, got {}", self.mean_n),
            ));
        }
        Ok(())
    }
}

/// Draws pair `pair_index` of the ensemble. Pure in (seed, pair_index):
/// any chunking or evaluation order reproduces the same pair.
pub fn sample_pair(cfg: &SpdcEnsembleConfig, pair_index: u64) -> SpdcPair {
    let mut detuning = CounterRng::at(cfg.seed, Stream::Detuning, pair_index);
    let mut phase = CounterRng::at(cfg.seed, Stream::BirthPhase, pair_index);
    SpdcPair {
        delta_f: cfg.sigma_f * detuning.next_gaussian(),
        psi: TAU * phase.next_f64(),
        pair_index,
    }
}

/// Samples the whole ensemble: detunings Gaussian(0, sigma_f^2) with
/// sign carried by the draw itself, birth phases uniform on [0, 2 pi).
pub fn sample_spdc_ensemble(cfg: &SpdcEnsembleConfig) -> Result<Vec<SpdcPair>, InvalidConfig> {
    cfg.validate()?;
    Ok((0..cfg.n_pairs).map(|j| sample_pair(cfg, j)).collect())
}

/// Signal and idler amplitudes for a common envelope e0: the idler runs
/// a quarter wave ahead, (e0, i e0).
pub fn pair_fields(_pair: &SpdcPair, e0: ComplexAmplitude) -> (ComplexAmplitude, ComplexAmplitude) {
    (e0, Complex64::new(0.0, 1.0) * e0)
}

/// Interferometric phase of a pair at arrival-time offset tau once the
/// carrier has dropped out: 2 pi (2 delta_f) tau.
pub fn reduced_pair_phase(pair: &SpdcPair, tau: f64) -> f64 {
    TAU * (2.0 * pair.delta_f) * tau
}

/// Path-length form of the pair phase, carrier included:
/// (2 pi / c)(f0/2 + 2 delta_f) x + psi.
pub fn full_pair_phase(pair: &SpdcPair, x: f64, f0: f64) -> f64 {
    (TAU / SPEED_OF_LIGHT) * (0.5 * f0 + 2.0 * pair.delta_f) * x + pair.psi
}

/// Photon number of pulse `pulse_index`, Poisson(mean_n). Pure in
/// (seed, pulse_index).
pub fn poisson_pulse_count(
    cfg: &CoherentSourceConfig,
    pulse_index: u64,
) -> Result<u64, InvalidConfig> {
    cfg.validate()?;
    let mut rng = CounterRng::at(cfg.seed, Stream::PulseCount, pulse_index);
    Ok(rng.next_poisson(cfg.mean_n))
}

/// P(2)/P(1) for a Poisson source: mean_n / 2. The small-mean measure
/// of how often a pulse that fired once fired twice.
pub fn bunching_ratio(mean_n: f64) -> Result<f64, InvalidConfig> {
    if !(mean_n.is_finite() && mean_n > 0.0) {
        return Err(InvalidConfig::new(
            "mean_n",
            format!("mean photon number must be positive and finite, got {mean_n}"),
        ));
    }
    Ok(mean_n / 2.0)
}

/// Spectral width and the coherence scales that follow from it:
/// fwhm = 2 sqrt(2 ln 2) sigma_f, t_c = 1/fwhm, l_c = c/fwhm.
pub fn spectrum_stats(cfg: &SpdcEnsembleConfig) -> Result<SpectrumStats, InvalidConfig> {
    cfg.validate()?;
    let fwhm = 2.0 * (2.0 * std::f64::consts::LN_2).sqrt() * cfg.sigma_f;
    Ok(SpectrumStats {
        fwhm,
        coherence_time: 1.0 / fwhm,
        coherence_length: SPEED_OF_LIGHT / fwhm,
    })
}
