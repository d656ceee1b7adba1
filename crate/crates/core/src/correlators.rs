//! Correlation estimators and scan builders: the two-photon dip, the
//! interferometer fringe set, and carrier-phase washout.

use crate::sources::{
    full_pair_phase, reduced_pair_phase, sample_spdc_ensemble, spectrum_stats, InvalidConfig,
    SpdcEnsembleConfig, SpdcPair, SPEED_OF_LIGHT,
};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

/// Swept variable of a scan; the name doubles as the CSV column label.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanVariable {
    /// Arrival-time offset, seconds.
    TauS,
    /// Interferometer phase, radians.
    PhiRad,
    /// Path position, metres.
    XM,
}

impl ScanVariable {
    pub fn name(self) -> &'static str {
        match self {
            ScanVariable::TauS => "tau_s",
            ScanVariable::PhiRad => "phi_rad",
            ScanVariable::XM => "x_m",
        }
    }
}

/// Scalar scan annotation.
#[derive(Clone, Debug, PartialEq)]
pub enum MetaValue {
    Float(f64),
    Int(u64),
    Text(String),
}

impl std::fmt::Display for MetaValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MetaValue::Float(v) => write!(f, "{v}"),
            MetaValue::Int(v) => write!(f, "{v}"),
            MetaValue::Text(v) => write!(f, "{v}"),
        }
    }
}

/// One swept quantity sampled on an ascending grid, with the parameters
/// that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationScan {
    pub variable: ScanVariable,
    /// CSV column label of the result.
    pub result_name: &'static str,
    /// (variable value, result), ascending in the variable.
    pub points: Vec<(f64, f64)>,
    pub meta: BTreeMap<&'static str, MetaValue>,
}

impl CorrelationScan {
    pub fn new(
        variable: ScanVariable,
        result_name: &'static str,
        points: Vec<(f64, f64)>,
        meta: BTreeMap<&'static str, MetaValue>,
    ) -> Self {
        assert!(!points.is_empty(), "a scan needs at least one point");
        for pair in points.windows(2) {
            assert!(pair[1].0 > pair[0].0, "scan values must ascend");
        }
        for &(x, y) in &points {
            assert!(x.is_finite() && y.is_finite(), "scan entries must be finite");
        }
        CorrelationScan {
            variable,
            result_name,
            points,
            meta,
        }
    }

    pub fn variable_name(&self) -> &'static str {
        self.variable.name()
    }

    pub fn meta_f64(&self, key: &str) -> Option<f64> {
        match self.meta.get(key) {
            Some(MetaValue::Float(v)) => Some(*v),
            Some(MetaValue::Int(v)) => Some(*v as f64),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ScanError {
    #[error("ensemble is empty")]
    EmptyEnsemble,
    #[error("scan points are not uniformly spaced")]
    NonUniformSpacing,
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
}

/// Uniform inclusive grid. The symmetric weighting makes the midpoint
/// of a sign-symmetric range come out exactly zero, so dip scans hit
/// tau = 0 on the nose.
pub fn scan_grid(min: f64, max: f64, n_steps: u64) -> Vec<f64> {
    assert!(min.is_finite() && max.is_finite() && min < max);
    assert!(n_steps >= 2, "a grid needs at least two points");
    let n = n_steps as usize;
    let last = (n - 1) as f64;
    (0..n)
        .map(|i| {
            if i == 0 {
                min
            } else if i == n - 1 {
                max
            } else {
                (min * (n - 1 - i) as f64 + max * i as f64) / last
            }
        })
        .collect()
}

/// Ensemble estimator of the normalized coincidence rate at offset tau:
/// (2/N) sum_j sin^2 of the reduced pair phase. Summation runs in index
/// order so the residual tail wiggles are reproducible bit for bit.
pub fn hom_g2_ensemble(pairs: &[SpdcPair], tau: f64) -> Result<f64, ScanError> {
    if pairs.is_empty() {
        return Err(ScanError::EmptyEnsemble);
    }
    let mut sum = 0.0;
    for pair in pairs {
        let s = reduced_pair_phase(pair, tau).sin();
        sum += s * s;
    }
    Ok(2.0 * sum / pairs.len() as f64)
}

/// Gaussian-averaged limit of the ensemble estimator:
/// 1 - exp(-32 pi^2 sigma_f^2 tau^2).
pub fn hom_g2_analytic(sigma_f: f64, tau: f64) -> f64 {
    assert!(sigma_f.is_finite() && sigma_f > 0.0);
    1.0 - (-32.0 * PI * PI * sigma_f * sigma_f * tau * tau).exp()
}

/// Samples one frozen ensemble and sweeps tau over an inclusive grid.
/// Meta records the coherence time along with the source parameters.
pub fn hom_dip_scan(
    cfg: &SpdcEnsembleConfig,
    tau_min: f64,
    tau_max: f64,
    n_steps: u64,
) -> Result<CorrelationScan, InvalidConfig> {
    let pairs = sample_spdc_ensemble(cfg)?;
    let stats = spectrum_stats(cfg)?;
    let grid = scan_grid(tau_min, tau_max, n_steps);
    let results: Vec<f64> = grid
        .par_iter()
        .map(|&tau| hom_g2_ensemble(&pairs, tau).expect("ensemble validated non-empty"))
        .collect();
    let mut meta = BTreeMap::new();
    meta.insert("sigma_f", MetaValue::Float(cfg.sigma_f));
    meta.insert("n_pairs", MetaValue::Int(cfg.n_pairs));
    meta.insert("f0", MetaValue::Float(cfg.f0));
    meta.insert("seed", MetaValue::Int(cfg.seed));
    meta.insert("t_c", MetaValue::Float(stats.coherence_time));
    Ok(CorrelationScan::new(
        ScanVariable::TauS,
        "g2",
        grid.into_iter().zip(results).collect(),
        meta,
    ))
}

/// Fringe-law output intensities ((i0/2)(1 - cos phi), (i0/2)(1 + cos phi)).
pub fn mzi_intensities(phi: f64, i0: f64) -> (f64, f64) {
    assert!(phi.is_finite());
    assert!(i0.is_finite() && i0 >= 0.0);
    let half = 0.5 * i0;
    let c = phi.cos();
    (half * (1.0 - c), half * (1.0 + c))
}

/// Normalized coincidence rate of the fringe pair: sin^2 phi.
pub fn coincidence_rate(phi: f64) -> f64 {
    assert!(phi.is_finite());
    let s = phi.sin();
    s * s
}

/// Intensity-correlation form of the coincidence rate, averaged over the
/// two settings {phi, phi + pi}. The half-turn shift exchanges the two
/// outputs, so the product I_A I_B is the same at both settings and each
/// averaged intensity is i0/2; the denominator never degenerates.
pub fn mzi_g2(phi: f64) -> f64 {
    let (intensity_a, intensity_b) = mzi_intensities(phi, 1.0);
    let mean_product = intensity_a * intensity_b;
    let mean_intensity = 0.5 * (intensity_a + intensity_b);
    mean_product / (mean_intensity * mean_intensity)
}

/// Which fringe quantity a scan reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FringeQuantity {
    IntensityA,
    IntensityB,
    CoincidenceRate,
    G2,
}

impl FringeQuantity {
    pub fn column_name(self) -> &'static str {
        match self {
            FringeQuantity::IntensityA => "i_a",
            FringeQuantity::IntensityB => "i_b",
            FringeQuantity::CoincidenceRate => "r_ab",
            FringeQuantity::G2 => "g2",
        }
    }
}

/// Sweeps the interferometer phase and reports the selected quantity.
pub fn mzi_fringe_scan(
    phi_min: f64,
    phi_max: f64,
    n_steps: u64,
    which: FringeQuantity,
    i0: f64,
) -> CorrelationScan {
    let grid = scan_grid(phi_min, phi_max, n_steps);
    let points = grid
        .into_iter()
        .map(|phi| {
            let y = match which {
                FringeQuantity::IntensityA => mzi_intensities(phi, i0).0,
                FringeQuantity::IntensityB => mzi_intensities(phi, i0).1,
                FringeQuantity::CoincidenceRate => coincidence_rate(phi),
                FringeQuantity::G2 => mzi_g2(phi),
            };
            (phi, y)
        })
        .collect();
    let mut meta = BTreeMap::new();
    meta.insert("i0", MetaValue::Float(i0));
    CorrelationScan::new(ScanVariable::PhiRad, which.column_name(), points, meta)
}

/// Frequency of the strongest nonzero Fourier bin of a uniformly spaced
/// scan, in cycles per unit of the swept variable. The mean is removed
/// first; a constant scan reports 0.
pub fn dominant_fringe_frequency(scan: &CorrelationScan) -> Result<f64, ScanError> {
    let n = scan.points.len();
    if n < 8 {
        return Err(ScanError::TooFewPoints { need: 8, got: n });
    }
    let first = scan.points[0].0;
    let last = scan.points[n - 1].0;
    let spacing = (last - first) / (n - 1) as f64;
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(ScanError::NonUniformSpacing);
    }
    for pair in scan.points.windows(2) {
        if ((pair[1].0 - pair[0].0) - spacing).abs() > 1e-9 * spacing {
            return Err(ScanError::NonUniformSpacing);
        }
    }

    let mean = scan.points.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let centred: Vec<f64> = scan.points.iter().map(|p| p.1 - mean).collect();
    let scale = scan.points.iter().map(|p| p.1.abs()).fold(0.0f64, f64::max);
    if centred.iter().all(|v| v.abs() <= scale * 1e-12) {
        return Ok(0.0);
    }

    let mut best_bin = 0usize;
    let mut best_power = -1.0f64;
    for bin in 1..=n / 2 {
        let mut re = 0.0;
        let mut im = 0.0;
        for (j, &y) in centred.iter().enumerate() {
            let angle = TAU * ((j * bin) % n) as f64 / n as f64;
            re += y * angle.cos();
            im -= y * angle.sin();
        }
        let power = re * re + im * im;
        if power > best_power {
            best_power = power;
            best_bin = bin;
        }
    }
    Ok(best_bin as f64 / (n as f64 * spacing))
}

/// (max - min) / (max + min) over the scan results; 0 for an all-zero
/// scan. Results must be nonnegative.
pub fn fringe_visibility(scan: &CorrelationScan) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &(_, y) in &scan.points {
        lo = lo.min(y);
        hi = hi.max(y);
    }
    assert!(lo >= 0.0, "fringe results must be nonnegative");
    if hi + lo == 0.0 {
        0.0
    } else {
        (hi - lo) / (hi + lo)
    }
}

/// Ensemble-averaged dark-port intensity along a path scan, in units of
/// the per-pair intensity: mean over pairs of 1 - cos(full pair phase).
/// The scan range must span at least three carrier wavelengths at f0/2.
pub fn washout_intensity_scan(
    pairs: &[SpdcPair],
    f0: f64,
    x_min: f64,
    x_max: f64,
    n_steps: u64,
) -> Result<CorrelationScan, ScanError> {
    if pairs.is_empty() {
        return Err(ScanError::EmptyEnsemble);
    }
    assert!(f0.is_finite() && f0 > 0.0);
    let carrier_wavelength = 2.0 * SPEED_OF_LIGHT / f0;
    assert!(
        x_max - x_min >= 3.0 * carrier_wavelength * (1.0 - 1e-12),
        "scan range must span at least three carrier wavelengths"
    );
    let grid = scan_grid(x_min, x_max, n_steps);
    let n_pairs = pairs.len() as f64;
    let results: Vec<f64> = grid
        .par_iter()
        .map(|&x| {
            let mut sum = 0.0;
            for pair in pairs {
                sum += 1.0 - full_pair_phase(pair, x, f0).cos();
            }
            sum / n_pairs
        })
        .collect();
    let mut meta = BTreeMap::new();
    meta.insert("f0", MetaValue::Float(f0));
    meta.insert("n_pairs", MetaValue::Int(pairs.len() as u64));
    Ok(CorrelationScan::new(
        ScanVariable::XM,
        "mean_i_a",
        grid.into_iter().zip(results).collect(),
        meta,
    ))
}

/// Samples a frozen ensemble and runs the washout scan over it.
pub fn spdc_washout_scan(
    cfg: &SpdcEnsembleConfig,
    x_min: f64,
    x_max: f64,
    n_steps: u64,
) -> Result<CorrelationScan, InvalidConfig> {
    let pairs = sample_spdc_ensemble(cfg)?;
    let mut scan = washout_intensity_scan(&pairs, cfg.f0, x_min, x_max, n_steps)
        .expect("ensemble validated non-empty");
    scan.meta.insert("sigma_f", MetaValue::Float(cfg.sigma_f));
    scan.meta.insert("seed", MetaValue::Int(cfg.seed));
    Ok(scan)
}
