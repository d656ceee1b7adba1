//! Pulsed event-level Monte Carlo: per-pulse photon numbers, stochastic
//! routing to two detectors, time-tagged clicks, and windowed
//! coincidence counting.

use crate::rng::{CounterRng, Stream};
use crate::sources::{
    poisson_pulse_count, reduced_pair_phase, CoherentSourceConfig, InvalidConfig, SpdcPair,
};

/// Which detector fired.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Detector {
    A,
    B,
}

/// One detector click. Click times sit on the pulse grid; no intra-pulse
/// jitter is modelled, so time = pulse_index * pulse_period.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectionEvent {
    pub detector: Detector,
    pub pulse_index: u64,
    pub time: f64,
}

/// Pulsed-run description: source, interferometer setting, counting
/// window, and the routing seed.
#[derive(Clone, Debug, PartialEq)]
pub struct EventSimConfig {
    pub n_pulses: u64,
    pub pulse_period: f64,
    pub source: CoherentSourceConfig,
    /// Interferometer phase. The pair-stream generator ignores it (each
    /// pair carries its own phase via the arrival offset).
    pub phi: f64,
    pub coincidence_window: f64,
    pub seed: u64,
}

impl EventSimConfig {
    pub fn validate(&self) -> Result<(), InvalidConfig> {
        if self.n_pulses < 1 {
            return Err(InvalidConfig {
                field: "n_pulses",
                reason: "must be at least 1".into(),
            });
        }
        if !(self.pulse_period.is_finite() && self.pulse_period > 0.0) {
            return Err(InvalidConfig {
                field: "pulse_period",
                reason: format!("must be positive and finite, got {}", self.pulse_period),
            });
        }
        if !(self.coincidence_window.is_finite()
            && self.coincidence_window > 0.0
            && self.coincidence_window <= self.pulse_period / 2.0)
        {
            return Err(InvalidConfig {
                field: "coincidence_window",
                reason: format!(
                    "must lie in (0, pulse_period/2], got {}",
                    self.coincidence_window
                ),
            });
        }
        if !self.phi.is_finite() {
            return Err(InvalidConfig {
                field: "phi",
                reason: format!("must be finite, got {}", self.phi),
            });
        }
        self.source.validate()
    }
}

/// Singles and windowed-coincidence totals of one event stream.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CoincidenceCounts {
    pub n_a: u64,
    pub n_b: u64,
    /// Pulses that produced at least one click on each detector within
    /// the window (capped at one per pulse).
    pub n_ab: u64,
    pub n_pulses_used: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EventError {
    #[error(transparent)]
    Config(#[from] InvalidConfig),
    #[error("events are not time-sorted")]
    UnsortedEvents,
    #[error("insufficient statistics: the normalizing count is zero")]
    InsufficientStatistics,
    #[error("pair-stream normalization needs a baseline run far off the dip")]
    BaselineRequired,
}

/// Generates clicks for an attenuated-laser run. Each pulse carries a
/// Poisson photon number; every photon routes to A with probability
/// (1 - cos phi)/2, independently of its pulse mates. Pure function of
/// the two seeds: the photon numbers come from the source seed, the
/// routing from the run seed.
pub fn simulate_coherent_stream(cfg: &EventSimConfig) -> Result<Vec<DetectionEvent>, EventError> {
    cfg.validate()?;
    let p_a = 0.5 * (1.0 - cfg.phi.cos());
    let mut events = Vec::new();
    for pulse_index in 0..cfg.n_pulses {
        let photons = poisson_pulse_count(&cfg.source, pulse_index).expect("source validated");
        if photons == 0 {
            continue;
        }
        let mut rng = CounterRng::at(cfg.seed, Stream::Routing, pulse_index);
        let time = pulse_index as f64 * cfg.pulse_period;
        for _ in 0..photons {
            let detector = if rng.next_f64() < p_a {
                Detector::A
            } else {
                Detector::B
            };
            events.push(DetectionEvent {
                detector,
                pulse_index,
                time,
            });
        }
    }
    Ok(events)
}

/// Generates clicks for a pair-per-pulse down-conversion run, cycling
/// through the ensemble. With s = sin of the reduced pair phase at the
/// arrival offset, the pair splits across the detectors with
/// probability s^2/2 and otherwise bunches out of one port, chosen by a
/// fair coin. The config's source and phi fields are not consulted: the
/// pairs and the offset define the physics.
pub fn simulate_spdc_stream(
    pairs: &[SpdcPair],
    tau: f64,
    cfg: &EventSimConfig,
) -> Vec<DetectionEvent> {
    assert!(!pairs.is_empty(), "pair stream needs a non-empty ensemble");
    assert!(cfg.n_pulses >= 1);
    assert!(cfg.pulse_period.is_finite() && cfg.pulse_period > 0.0);
    assert!(tau.is_finite());
    let n_pairs = pairs.len() as u64;
    let mut events = Vec::with_capacity(2 * cfg.n_pulses as usize);
    for pulse_index in 0..cfg.n_pulses {
        let pair = &pairs[(pulse_index % n_pairs) as usize];
        let s = reduced_pair_phase(pair, tau).sin();
        let p_split = 0.5 * s * s;
        let mut rng = CounterRng::at(cfg.seed, Stream::Routing, pulse_index);
        let (first, second) = if rng.next_f64() < p_split {
            (Detector::A, Detector::B)
        } else if rng.next_f64() < 0.5 {
            (Detector::A, Detector::A)
        } else {
            (Detector::B, Detector::B)
        };
        let time = pulse_index as f64 * cfg.pulse_period;
        events.push(DetectionEvent {
            detector: first,
            pulse_index,
            time,
        });
        events.push(DetectionEvent {
            detector: second,
            pulse_index,
            time,
        });
    }
    events
}

/// Tallies singles and windowed coincidences from a time-sorted stream.
/// A pulse scores at most one coincidence, as a binary counter would.
/// Partitioning a stream at pulse boundaries and summing the parts gives
/// the same totals as one pass.
pub fn count_coincidences(
    events: &[DetectionEvent],
    window: f64,
) -> Result<CoincidenceCounts, EventError> {
    assert!(window.is_finite() && window >= 0.0);
    for pair in events.windows(2) {
        if pair[1].time < pair[0].time {
            return Err(EventError::UnsortedEvents);
        }
    }
    let mut counts = CoincidenceCounts::default();
    let mut i = 0usize;
    while i < events.len() {
        let pulse = events[i].pulse_index;
        let mut j = i;
        while j < events.len() && events[j].pulse_index == pulse {
            j += 1;
        }
        let group = &events[i..j];
        let n_a = group.iter().filter(|e| e.detector == Detector::A).count();
        let n_b = group.len() - n_a;
        counts.n_a += n_a as u64;
        counts.n_b += n_b as u64;
        if n_a > 0 && n_b > 0 {
            let hit = group
                .iter()
                .filter(|e| e.detector == Detector::A)
                .any(|ea| {
                    group
                        .iter()
                        .filter(|e| e.detector == Detector::B)
                        .any(|eb| (ea.time - eb.time).abs() <= window)
                });
            if hit {
                counts.n_ab += 1;
            }
        }
        i = j;
    }
    counts.n_pulses_used = events.last().map_or(0, |e| e.pulse_index + 1);
    Ok(counts)
}

/// Number of pulses carrying two or more clicks: the normalizing count
/// for the coherent-stream estimator. Events must arrive grouped by
/// pulse, as the simulators emit them.
pub fn multi_photon_pulse_count(events: &[DetectionEvent]) -> u64 {
    let mut total = 0u64;
    let mut i = 0usize;
    while i < events.len() {
        let pulse = events[i].pulse_index;
        let mut j = i;
        while j < events.len() && events[j].pulse_index == pulse {
            j += 1;
        }
        if j - i >= 2 {
            total += 1;
        }
        i = j;
    }
    total
}

/// How a coincidence tally is scaled to the analytic curves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormalizationMode {
    /// Attenuated-laser runs: n_ab over half the multi-photon pulse
    /// count of the same stream, so the quarter-turn setting reads 1.
    MziCoherent { multi_photon_pulses: u64 },
    /// Pair-stream runs: n_ab over the baseline n_ab from a run far off
    /// the dip, so the flat shoulder reads 1.
    HomSpdc,
}

/// Normalized coincidence estimate. A zero denominator is flagged as
/// insufficient statistics, distinct from a true zero in the numerator.
pub fn estimate_normalized_coincidence(
    counts: &CoincidenceCounts,
    mode: NormalizationMode,
    baseline: Option<&CoincidenceCounts>,
) -> Result<f64, EventError> {
    match mode {
        NormalizationMode::MziCoherent { multi_photon_pulses } => {
            if multi_photon_pulses == 0 {
                return Err(EventError::InsufficientStatistics);
            }
            Ok(counts.n_ab as f64 / (multi_photon_pulses as f64 / 2.0))
        }
        NormalizationMode::HomSpdc => {
            let base = baseline.ok_or(EventError::BaselineRequired)?;
            if base.n_ab == 0 {
                return Err(EventError::InsufficientStatistics);
            }
            Ok(counts.n_ab as f64 / base.n_ab as f64)
        }
    }
}
