//! Run orchestration: resolve a config, drive the matching pipeline,
//! write the CSV, hand back the scan.

mod config;
mod csv;

pub use config::{
    build_config, lex_config, parse_config, render_config, ConfigError, EventParams, ModeParams,
    RunConfig, RunMode, ScanRange, Settings, DEFAULT_CARRIER_F, DEFAULT_F0,
};
pub use csv::{render_scan_csv, write_csv, write_events_csv};

use crate::correlators::{
    fringe_visibility, hom_dip_scan, hom_g2_analytic, mzi_fringe_scan, scan_grid,
    spdc_washout_scan, CorrelationScan, FringeQuantity, MetaValue, ScanVariable,
};
use crate::eventsim::{
    count_coincidences, estimate_normalized_coincidence, multi_photon_pulse_count,
    simulate_coherent_stream, simulate_spdc_stream, EventError, EventSimConfig, NormalizationMode,
};
use crate::sources::{
    sample_spdc_ensemble, spectrum_stats, CoherentSourceConfig, InvalidConfig, SpdcEnsembleConfig,
};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write '{path}': {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Sim(#[from] EventError),
}

impl From<InvalidConfig> for RunError {
    fn from(e: InvalidConfig) -> Self {
        RunError::Config(ConfigError::Invalid(e))
    }
}

/// Offset of the hom-event normalization run, in coherence times: far
/// enough out that the dip has fully recovered.
const BASELINE_OFFSET_FACTOR: f64 = 10.0;

/// Drives the pipeline selected by the config, writes its CSV to the
/// configured output path, and returns the scan that was written (for
/// multi-column modes, the headline result column).
pub fn run(cfg: &RunConfig) -> Result<CorrelationScan, RunError> {
    match &cfg.params {
        ModeParams::HomAnalytic { sigma_f } => run_hom_analytic(cfg, *sigma_f),
        ModeParams::HomEnsemble { spdc } => run_hom_ensemble(cfg, spdc),
        ModeParams::HomEvent { spdc, event } => run_hom_event(cfg, spdc, event),
        ModeParams::MziScan { i0 } => run_mzi_scan(cfg, *i0),
        ModeParams::MziEvent { source, event } => run_mzi_event(cfg, source, event),
        ModeParams::Washout { spdc } => run_washout(cfg, spdc),
    }
}

fn run_hom_analytic(cfg: &RunConfig, sigma_f: f64) -> Result<CorrelationScan, RunError> {
    let probe = SpdcEnsembleConfig {
        n_pairs: 1,
        sigma_f,
        f0: DEFAULT_F0,
        seed: cfg.seed,
    };
    probe.validate()?;
    let grid = scan_grid(cfg.range.min, cfg.range.max, cfg.range.steps);
    let points: Vec<(f64, f64)> = grid
        .into_iter()
        .map(|tau| (tau, hom_g2_analytic(sigma_f, tau)))
        .collect();
    let mut meta = BTreeMap::new();
    meta.insert("sigma_f", MetaValue::Float(sigma_f));
    meta.insert("seed", MetaValue::Int(cfg.seed));
    let scan = CorrelationScan::new(ScanVariable::TauS, "g2", points, meta);
    write_csv(&scan, Path::new(&cfg.output))?;
    Ok(scan)
}

fn run_hom_ensemble(cfg: &RunConfig, spdc: &SpdcEnsembleConfig) -> Result<CorrelationScan, RunError> {
    let scan = hom_dip_scan(spdc, cfg.range.min, cfg.range.max, cfg.range.steps)?;
    let grid: Vec<f64> = scan.points.iter().map(|p| p.0).collect();
    let g2: Vec<f64> = scan.points.iter().map(|p| p.1).collect();
    let analytic: Vec<f64> = grid
        .iter()
        .map(|&tau| hom_g2_analytic(spdc.sigma_f, tau))
        .collect();
    let text = csv::render_table(
        "tau_s",
        &grid,
        &[("g2", &g2), ("g2_analytic", &analytic)],
        None,
    );
    csv::write_text(Path::new(&cfg.output), &text)?;
    Ok(scan)
}

fn run_hom_event(
    cfg: &RunConfig,
    spdc: &SpdcEnsembleConfig,
    event: &EventParams,
) -> Result<CorrelationScan, RunError> {
    let pairs = sample_spdc_ensemble(spdc)?;
    let t_c = spectrum_stats(spdc)?.coherence_time;
    let sim_cfg = EventSimConfig {
        n_pulses: event.n_pulses,
        pulse_period: event.pulse_period,
        // placeholder laser block; the pair stream never consults it
        source: CoherentSourceConfig {
            f: 0.5 * spdc.f0,
            mean_n: 1.0,
            coherence_time: t_c,
            seed: cfg.seed,
        },
        phi: 0.0,
        coincidence_window: event.coincidence_window,
        seed: cfg.seed,
    };
    let baseline_tau = BASELINE_OFFSET_FACTOR * t_c;
    let baseline_events = simulate_spdc_stream(&pairs, baseline_tau, &sim_cfg);
    let baseline = count_coincidences(&baseline_events, event.coincidence_window)?;
    drop(baseline_events);

    let grid = scan_grid(cfg.range.min, cfg.range.max, cfg.range.steps);
    let mut points = Vec::with_capacity(grid.len());
    for &tau in &grid {
        let events = simulate_spdc_stream(&pairs, tau, &sim_cfg);
        let counts = count_coincidences(&events, event.coincidence_window)?;
        let estimate =
            estimate_normalized_coincidence(&counts, NormalizationMode::HomSpdc, Some(&baseline))?;
        points.push((tau, estimate));
    }
    let mut meta = BTreeMap::new();
    meta.insert("sigma_f", MetaValue::Float(spdc.sigma_f));
    meta.insert("n_pairs", MetaValue::Int(spdc.n_pairs));
    meta.insert("f0", MetaValue::Float(spdc.f0));
    meta.insert("seed", MetaValue::Int(cfg.seed));
    meta.insert("t_c", MetaValue::Float(t_c));
    meta.insert("n_pulses", MetaValue::Int(event.n_pulses));
    meta.insert("baseline_tau", MetaValue::Float(baseline_tau));
    let scan = CorrelationScan::new(ScanVariable::TauS, "g2", points, meta);
    write_csv(&scan, Path::new(&cfg.output))?;
    Ok(scan)
}

fn run_mzi_scan(cfg: &RunConfig, i0: f64) -> Result<CorrelationScan, RunError> {
    let (min, max, steps) = (cfg.range.min, cfg.range.max, cfg.range.steps);
    let intensity_a = mzi_fringe_scan(min, max, steps, FringeQuantity::IntensityA, i0);
    let intensity_b = mzi_fringe_scan(min, max, steps, FringeQuantity::IntensityB, i0);
    let rate = mzi_fringe_scan(min, max, steps, FringeQuantity::CoincidenceRate, i0);
    let g2 = mzi_fringe_scan(min, max, steps, FringeQuantity::G2, i0);
    let grid: Vec<f64> = rate.points.iter().map(|p| p.0).collect();
    let column = |scan: &CorrelationScan| scan.points.iter().map(|p| p.1).collect::<Vec<f64>>();
    let text = csv::render_table(
        "phi_rad",
        &grid,
        &[
            ("i_a", &column(&intensity_a)),
            ("i_b", &column(&intensity_b)),
            ("r_ab", &column(&rate)),
            ("g2", &column(&g2)),
        ],
        None,
    );
    csv::write_text(Path::new(&cfg.output), &text)?;
    Ok(rate)
}

fn run_mzi_event(
    cfg: &RunConfig,
    source: &CoherentSourceConfig,
    event: &EventParams,
) -> Result<CorrelationScan, RunError> {
    let grid = scan_grid(cfg.range.min, cfg.range.max, cfg.range.steps);
    let mut points = Vec::with_capacity(grid.len());
    for &phi in &grid {
        let sim_cfg = EventSimConfig {
            n_pulses: event.n_pulses,
            pulse_period: event.pulse_period,
            source: *source,
            phi,
            coincidence_window: event.coincidence_window,
            seed: cfg.seed,
        };
        let events = simulate_coherent_stream(&sim_cfg)?;
        let counts = count_coincidences(&events, event.coincidence_window)?;
        let multi = multi_photon_pulse_count(&events);
        let estimate = estimate_normalized_coincidence(
            &counts,
            NormalizationMode::MziCoherent {
                multi_photon_pulses: multi,
            },
            None,
        )?;
        points.push((phi, estimate));
    }
    let mut meta = BTreeMap::new();
    meta.insert("mean_n", MetaValue::Float(source.mean_n));
    meta.insert("carrier_f", MetaValue::Float(source.f));
    meta.insert("n_pulses", MetaValue::Int(event.n_pulses));
    meta.insert("seed", MetaValue::Int(cfg.seed));
    let scan = CorrelationScan::new(ScanVariable::PhiRad, "r_ab", points, meta);
    write_csv(&scan, Path::new(&cfg.output))?;
    Ok(scan)
}

fn run_washout(cfg: &RunConfig, spdc: &SpdcEnsembleConfig) -> Result<CorrelationScan, RunError> {
    let mut scan = spdc_washout_scan(spdc, cfg.range.min, cfg.range.max, cfg.range.steps)?;
    let visibility = fringe_visibility(&scan);
    scan.meta.insert("visibility", MetaValue::Float(visibility));
    write_csv(&scan, Path::new(&cfg.output))?;
    Ok(scan)
}
