//! Acceptance gate: every release-blocking check at its stated
//! tolerance, one test per criterion.

use homsim::correlators::{
    dominant_fringe_frequency, fringe_visibility, hom_dip_scan, hom_g2_analytic, mzi_fringe_scan,
    washout_intensity_scan, FringeQuantity,
};
use homsim::eventsim::{
    count_coincidences, estimate_normalized_coincidence, multi_photon_pulse_count,
    simulate_coherent_stream, simulate_spdc_stream, EventSimConfig, NormalizationMode,
};
use homsim::harness::{parse_config, run, RunConfig};
use homsim::sources::{
    bunching_ratio, poisson_pulse_count, sample_spdc_ensemble, spectrum_stats,
    CoherentSourceConfig, SpdcEnsembleConfig, SpdcPair, SPEED_OF_LIGHT,
};
use rand_distr::Distribution;
use std::f64::consts::{FRAC_PI_2, LN_2, PI, TAU};

const SIGMA_F: f64 = 1.0;
const N_PAIRS: u64 = 10_000;
const F0: f64 = 7.4e14;

fn dip_cfg(seed: u64) -> SpdcEnsembleConfig {
    SpdcEnsembleConfig {
        n_pairs: N_PAIRS,
        sigma_f: SIGMA_F,
        f0: F0,
        seed,
    }
}

fn coherence_time() -> f64 {
    spectrum_stats(&dip_cfg(0)).unwrap().coherence_time
}

fn half_depth_tau(sigma_f: f64) -> f64 {
    (LN_2 / (32.0 * PI * PI * sigma_f * sigma_f)).sqrt()
}

/// Brute-force check built on an unrelated generator stack: draws
/// detunings from a ziggurat normal and averages 2 sin^2 of the reduced
/// phase directly. Returns (mean, standard error).
fn brute_force_dip(draws: u64, sigma_f: f64, tau: f64, seed: u64) -> (f64, f64) {
    use rand::SeedableRng;
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let normal = rand_distr::Normal::new(0.0, sigma_f).unwrap();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..draws {
        let delta_f: f64 = normal.sample(&mut rng);
        let s = (TAU * 2.0 * delta_f * tau).sin();
        let value = 2.0 * s * s;
        sum += value;
        sum_sq += value * value;
    }
    let mean = sum / draws as f64;
    let variance = (sum_sq / draws as f64 - mean * mean).max(0.0);
    (mean, (variance / draws as f64).sqrt())
}

#[test]
fn criterion_1_dip_shape() {
    let t_c = coherence_time();
    let scan = hom_dip_scan(&dip_cfg(171), -3.0 * t_c, 3.0 * t_c, 2001).unwrap();
    assert_eq!(scan.points.len(), 2001);

    let centre = scan.points[1000];
    assert_eq!(centre.0, 0.0, "grid must hit tau = 0 exactly");
    assert_eq!(centre.1, 0.0, "dip floor must be exactly zero");

    let shoulder: Vec<f64> = scan
        .points
        .iter()
        .filter(|(tau, _)| tau.abs() > 2.5 * t_c)
        .map(|&(_, g2)| g2)
        .collect();
    assert!(shoulder.len() > 100);
    let baseline = shoulder.iter().sum::<f64>() / shoulder.len() as f64;
    assert!(
        (0.98..=1.02).contains(&baseline),
        "baseline mean {baseline} outside [0.98, 1.02]"
    );

    let mut worst = 0.0f64;
    for &(tau, g2) in &scan.points {
        worst = worst.max((g2 - hom_g2_analytic(SIGMA_F, tau)).abs());
    }
    assert!(worst <= 0.05, "worst pointwise deviation {worst} > 0.05");
    println!(
        "acceptance 1 (dip shape): PASS  g2(0) = 0, baseline {baseline:.4}, max deviation {worst:.4}"
    );
}

#[test]
fn criterion_2_half_depth_crossing() {
    let t_c = coherence_time();
    let scan = hom_dip_scan(&dip_cfg(171), -3.0 * t_c, 3.0 * t_c, 2001).unwrap();
    let expected = half_depth_tau(SIGMA_F);
    assert!((hom_g2_analytic(SIGMA_F, expected) - 0.5).abs() <= 1e-12);

    // first half-crossing walking outward from the dip floor, each side
    let mut crossings = [None, None];
    for (side, outward) in [(0usize, 1000..2000usize), (1usize, 0..1000usize)] {
        let indices: Vec<usize> = if side == 0 {
            outward.collect()
        } else {
            outward.rev().collect()
        };
        for i in indices {
            let (t0, g0) = scan.points[i];
            let (t1, g1) = scan.points[i + 1];
            let (lo, hi) = if side == 0 { (g0, g1) } else { (g1, g0) };
            if lo < 0.5 && hi >= 0.5 {
                crossings[side] = Some(t0 + (0.5 - g0) * (t1 - t0) / (g1 - g0));
                break;
            }
        }
    }
    for (side, crossing) in crossings.iter().enumerate() {
        let tau = crossing.expect("dip must cross half depth on both sides");
        let relative = (tau.abs() - expected).abs() / expected;
        assert!(
            relative <= 0.02,
            "side {side}: crossing {} vs {expected}, off by {relative:.4}",
            tau.abs()
        );
    }

    let (mc, se) = brute_force_dip(1_000_000, SIGMA_F, expected, 987_654_321);
    assert!(
        (mc - 0.5).abs() <= 3.5 * se + 1e-12,
        "brute-force value {mc} not at half depth (se {se})"
    );
    println!(
        "acceptance 2 (half-depth point): PASS  crossings {:+.6}/{:+.6} vs {:.6}, brute force {mc:.4} +- {se:.4}",
        crossings[1].unwrap(),
        crossings[0].unwrap(),
        expected
    );
}

#[test]
fn criterion_3_deterministic_tail_wiggles() {
    let t_c = coherence_time();
    let first = hom_dip_scan(&dip_cfg(37), -3.0 * t_c, 3.0 * t_c, 2001).unwrap();
    let second = hom_dip_scan(&dip_cfg(37), -3.0 * t_c, 3.0 * t_c, 2001).unwrap();
    for (a, b) in first.points.iter().zip(&second.points) {
        assert_eq!(a.0.to_bits(), b.0.to_bits());
        assert_eq!(a.1.to_bits(), b.1.to_bits());
    }

    let tail: Vec<f64> = first
        .points
        .iter()
        .filter(|(tau, _)| {
            let a = tau.abs();
            (2.0 * t_c..=3.0 * t_c).contains(&a)
        })
        .map(|&(_, g2)| g2)
        .collect();
    assert!(tail.len() > 300);
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let var = tail.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (tail.len() - 1) as f64;
    let std = var.sqrt();
    let bound = 3.0 / (N_PAIRS as f64).sqrt();
    assert!(std > 0.0, "tail must carry residual oscillation");
    assert!(std <= bound, "tail std {std} exceeds {bound}");
    println!("acceptance 3 (tail wiggles): PASS  bit-identical rerun, tail std {std:.5} <= {bound}");
}

#[test]
fn criterion_4_interferometer_identities() {
    let i0 = 1.0;
    let steps = 1001;
    let (lo, hi) = (0.0, 4.0 * PI);
    let intensity_a = mzi_fringe_scan(lo, hi, steps, FringeQuantity::IntensityA, i0);
    let intensity_b = mzi_fringe_scan(lo, hi, steps, FringeQuantity::IntensityB, i0);
    let rate = mzi_fringe_scan(lo, hi, steps, FringeQuantity::CoincidenceRate, i0);
    let g2 = mzi_fringe_scan(lo, hi, steps, FringeQuantity::G2, i0);

    for k in 0..steps as usize {
        let (phi, a) = intensity_a.points[k];
        let b = intensity_b.points[k].1;
        let r = rate.points[k].1;
        let g = g2.points[k].1;
        assert!((a + b - i0).abs() <= 1e-12);
        assert!((r - phi.sin().powi(2)).abs() <= 1e-12);
        assert!((g - r).abs() <= 1e-12);
    }

    let freq_intensity = dominant_fringe_frequency(&intensity_a).unwrap();
    let freq_rate = dominant_fringe_frequency(&rate).unwrap();
    let spacing = intensity_a.points[1].0 - intensity_a.points[0].0;
    let record_length = steps as f64 * spacing;
    let bin_intensity = (freq_intensity * record_length).round() as u64;
    let bin_rate = (freq_rate * record_length).round() as u64;
    assert_eq!(bin_intensity, 2);
    assert_eq!(bin_rate, 4);
    assert_eq!(freq_rate, 2.0 * freq_intensity);
    println!(
        "acceptance 4 (fringe identities): PASS  identities <= 1e-12, rate bin {bin_rate} = 2 x intensity bin {bin_intensity}"
    );
}

#[test]
fn criterion_5_carrier_fringe_washout() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg: RunConfig = parse_config(
        "mode = washout-scan\nsigma_f = 1\nn_pairs = 10000\nsteps = 1001\nseed = 2026\n",
    )
    .unwrap();
    cfg.output = dir.path().join("washout.csv").to_str().unwrap().to_string();
    let scan = run(&cfg).unwrap();
    let visibility = scan.meta_f64("visibility").unwrap();
    assert!(visibility < 0.05, "random-phase visibility {visibility}");

    let quiet: Vec<SpdcPair> = (0..100)
        .map(|pair_index| SpdcPair {
            delta_f: 0.0,
            psi: 0.0,
            pair_index,
        })
        .collect();
    let wavelength = 2.0 * SPEED_OF_LIGHT / F0;
    let coherent_scan =
        washout_intensity_scan(&quiet, F0, 0.0, 3.0 * wavelength, 1001).unwrap();
    let coherent_visibility = fringe_visibility(&coherent_scan);
    assert!(
        coherent_visibility > 0.999,
        "locked-phase visibility {coherent_visibility}"
    );
    println!(
        "acceptance 5 (carrier washout): PASS  random psi {visibility:.4} < 0.05, locked psi {coherent_visibility:.6} > 0.999"
    );
}

#[test]
fn criterion_6_event_level_convergence() {
    // coherent branch at the quarter turn
    let mzi_cfg = EventSimConfig {
        n_pulses: 1_000_000,
        pulse_period: 1.0e-6,
        source: CoherentSourceConfig {
            f: 3.7e14,
            mean_n: 0.05,
            coherence_time: 1.0e-8,
            seed: 0xC0FFEE,
        },
        phi: FRAC_PI_2,
        coincidence_window: 2.5e-7,
        seed: 0xFEED,
    };
    let events = simulate_coherent_stream(&mzi_cfg).unwrap();
    let counts = count_coincidences(&events, mzi_cfg.coincidence_window).unwrap();
    let multi = multi_photon_pulse_count(&events);
    drop(events);
    let estimate = estimate_normalized_coincidence(
        &counts,
        NormalizationMode::MziCoherent {
            multi_photon_pulses: multi,
        },
        None,
    )
    .unwrap();
    let p_hat = counts.n_ab as f64 / multi as f64;
    let sigma = 2.0 * (p_hat * (1.0 - p_hat) / multi as f64).sqrt();
    assert!(
        (estimate - 1.0).abs() <= 3.0 * sigma,
        "coherent estimate {estimate} vs 1 (sigma {sigma}, {multi} multi-photon pulses)"
    );

    // pair branch against the analytic dip
    let pairs = sample_spdc_ensemble(&dip_cfg(4242)).unwrap();
    let t_c = coherence_time();
    let hom_cfg = EventSimConfig {
        n_pulses: 1_000_000,
        seed: 777,
        ..mzi_cfg.clone()
    };
    let baseline_events = simulate_spdc_stream(&pairs, 10.0 * t_c, &hom_cfg);
    let baseline = count_coincidences(&baseline_events, hom_cfg.coincidence_window).unwrap();
    drop(baseline_events);

    let mut report = String::new();
    for tau in [0.0, t_c, 3.0 * t_c] {
        let events = simulate_spdc_stream(&pairs, tau, &hom_cfg);
        let tau_counts = count_coincidences(&events, hom_cfg.coincidence_window).unwrap();
        drop(events);
        let ratio = estimate_normalized_coincidence(
            &tau_counts,
            NormalizationMode::HomSpdc,
            Some(&baseline),
        )
        .unwrap();
        let expected = hom_g2_analytic(SIGMA_F, tau);
        if tau == 0.0 {
            assert_eq!(tau_counts.n_ab, 0, "zero offset must give zero coincidences");
            assert_eq!(ratio, 0.0);
        } else {
            let counting = ratio
                * (1.0 / tau_counts.n_ab as f64 + 1.0 / baseline.n_ab as f64).sqrt();
            let ensemble = 1.0 / (N_PAIRS as f64).sqrt();
            let sigma = (counting * counting + ensemble * ensemble).sqrt();
            assert!(
                (ratio - expected).abs() <= 3.0 * sigma,
                "tau {tau}: ratio {ratio} vs {expected} (sigma {sigma})"
            );
        }
        report.push_str(&format!(" tau {tau:.3}: {ratio:.4} vs {expected:.4};"));
    }
    println!("acceptance 6 (event convergence): PASS  coherent {estimate:.4} vs 1;{report}");
}

#[test]
fn criterion_7_poisson_statistics() {
    assert_eq!(bunching_ratio(0.1).unwrap(), 0.05);

    let source = CoherentSourceConfig {
        f: 3.7e14,
        mean_n: 0.1,
        coherence_time: 1.0e-8,
        seed: 909,
    };
    let mut singles = 0u64;
    let mut doubles = 0u64;
    for pulse in 0..1_000_000u64 {
        match poisson_pulse_count(&source, pulse).unwrap() {
            1 => singles += 1,
            2 => doubles += 1,
            _ => {}
        }
    }
    let ratio = doubles as f64 / singles as f64;
    let sigma = ratio * (1.0 / singles as f64 + 1.0 / doubles as f64).sqrt();
    assert!(
        (ratio - 0.05).abs() <= 3.0 * sigma,
        "P(2)/P(1) = {ratio} vs 0.05 (sigma {sigma})"
    );
    println!(
        "acceptance 7 (photon statistics): PASS  bunching ratio exact, empirical {ratio:.5} vs 0.05"
    );
}

#[test]
fn criterion_8_byte_identical_reruns() {
    let documents = [
        "mode = hom-analytic\nsigma_f = 1\nsteps = 2001\nseed = 7\n",
        "mode = hom-ensemble\nsigma_f = 1\nn_pairs = 2000\nsteps = 501\nseed = 7\n",
        "mode = hom-event\nsigma_f = 1\nn_pairs = 500\nn_pulses = 20000\nsteps = 11\nseed = 7\n",
        "mode = mzi-scan\nsteps = 1001\nseed = 7\n",
        "mode = mzi-event\nmean_n = 0.1\nn_pulses = 20000\nsteps = 11\nseed = 7\n",
        "mode = washout-scan\nsigma_f = 1\nn_pairs = 2000\nsteps = 401\nseed = 7\n",
    ];
    for document in documents {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = parse_config(document).unwrap();
        let mode = cfg.mode.name();
        cfg.output = dir.path().join(&cfg.output).to_str().unwrap().to_string();

        run(&cfg).unwrap();
        let first = std::fs::read(&cfg.output).unwrap();
        run(&cfg).unwrap();
        let second = std::fs::read(&cfg.output).unwrap();
        assert_eq!(first, second, "{mode}: rerun differs");

        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        pool.install(|| run(&cfg)).unwrap();
        let single_threaded = std::fs::read(&cfg.output).unwrap();
        assert_eq!(first, single_threaded, "{mode}: thread count changes bytes");
    }
    println!("acceptance 8 (reproducibility): PASS  all six modes byte-identical across reruns and thread counts");
}
