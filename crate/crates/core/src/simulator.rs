//! Monte Carlo time-tag generation.
//!
//! Each pulse cycle emits one SYNC tag. With probability `pair_prob` a joint
//! (port, slot) outcome is drawn from the analyzer distribution, the cascade
//! delays and detector jitter are added to the nominal slot times, and each
//! photon survives detection with probability `det_efficiency`. Dark counts
//! are superimposed as a uniform Poisson process per photon channel.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal, Poisson};

use crate::analyzer::{joint_distribution, AnalyzerPhase, OutcomeKey, Port};
use crate::error::{Error, Result};
use crate::source::{emitted_density_matrix, SourceParams};

/// Detector channel. The discriminant is the on-disk channel code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Channel {
    Sync = 0,
    Xx1 = 1,
    Xx2 = 2,
    X1 = 3,
    X2 = 4,
}

/// Which photon of the cascade a channel detects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    Biexciton,
    Exciton,
}

impl Channel {
    pub const ALL: [Channel; 5] = [Channel::Sync, Channel::Xx1, Channel::Xx2, Channel::X1, Channel::X2];
    pub const PHOTON: [Channel; 4] = [Channel::Xx1, Channel::Xx2, Channel::X1, Channel::X2];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    pub fn photon(arm: Arm, port: Port) -> Self {
        match (arm, port) {
            (Arm::Biexciton, Port::One) => Channel::Xx1,
            (Arm::Biexciton, Port::Two) => Channel::Xx2,
            (Arm::Exciton, Port::One) => Channel::X1,
            (Arm::Exciton, Port::Two) => Channel::X2,
        }
    }

    pub fn arm(self) -> Option<Arm> {
        match self {
            Channel::Sync => None,
            Channel::Xx1 | Channel::Xx2 => Some(Arm::Biexciton),
            Channel::X1 | Channel::X2 => Some(Arm::Exciton),
        }
    }

    pub fn port(self) -> Option<Port> {
        match self {
            Channel::Sync => None,
            Channel::Xx1 | Channel::X1 => Some(Port::One),
            Channel::Xx2 | Channel::X2 => Some(Port::Two),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::Sync => "SYNC",
            Channel::Xx1 => "XX1",
            Channel::Xx2 => "XX2",
            Channel::X1 => "X1",
            Channel::X2 => "X2",
        }
    }
}

/// A channel-tagged timestamp in integer picoseconds since run start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventRecord {
    pub timestamp: u64,
    pub channel: Channel,
}

impl EventRecord {
    pub fn new(channel: Channel, timestamp: u64) -> Self {
        Self { timestamp, channel }
    }
}

pub type EventStream = Vec<EventRecord>;

/// Seconds to the nearest integer picosecond.
pub fn secs_to_ps(s: f64) -> i64 {
    (s * 1e12).round() as i64
}

/// Acquisition settings of one measurement run.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct RunConfig {
    pub n_pulses: u64,
    /// Laser repetition period (s).
    pub rep_period: f64,
    /// Probability of an emitted pair per pulse cycle.
    pub pair_prob: f64,
    /// Detection probability, applied independently on every channel.
    pub det_efficiency: f64,
    /// Gaussian timing jitter standard deviation (s).
    pub jitter_sigma: f64,
    /// Dark count rate per photon channel (Hz).
    pub dark_rate: f64,
    /// Post-selection window width per peak (s).
    pub window: f64,
    /// Delay of the excitation pulse after its SYNC tag (s).
    pub sync_lead: f64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_pulses: 1_000_000,
            rep_period: 12.5e-9,
            pair_prob: 0.2,
            det_efficiency: 0.8,
            jitter_sigma: 50e-12,
            dark_rate: 100.0,
            window: 1.28e-9,
            sync_lead: 1e-9,
            seed: 1,
        }
    }
}

impl RunConfig {
    pub fn validate(&self, bin_delay: f64) -> Result<()> {
        for (name, p) in [("pair_prob", self.pair_prob), ("det_efficiency", self.det_efficiency)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::OutOfRange { name, value: p });
            }
        }
        if !(self.window > 0.0 && self.window < bin_delay) {
            return Err(Error::ConfigInvalid("window must be positive and shorter than the bin delay"));
        }
        if !(self.sync_lead >= 0.0 && self.sync_lead.is_finite()) {
            return Err(Error::OutOfRange { name: "sync_lead", value: self.sync_lead });
        }
        if !(self.rep_period > self.sync_lead + 2.0 * bin_delay + self.window) {
            return Err(Error::ConfigInvalid("rep_period must exceed sync_lead + 2 * bin_delay + window"));
        }
        if !(self.jitter_sigma >= 0.0 && self.jitter_sigma.is_finite()) {
            return Err(Error::OutOfRange { name: "jitter_sigma", value: self.jitter_sigma });
        }
        if !(self.dark_rate >= 0.0 && self.dark_rate.is_finite()) {
            return Err(Error::OutOfRange { name: "dark_rate", value: self.dark_rate });
        }
        Ok(())
    }
}

/// Biexciton then exciton emission delays: `t_xx ~ Exp(tau_xx)`,
/// `t_x = t_xx + Exp(tau_x)`.
pub fn sample_cascade_times<R: Rng + ?Sized>(tau_xx: f64, tau_x: f64, rng: &mut R) -> (f64, f64) {
    let t_xx = Exp::new(1.0 / tau_xx).expect("tau_xx > 0").sample(rng);
    let t_x = t_xx + Exp::new(1.0 / tau_x).expect("tau_x > 0").sample(rng);
    (t_xx, t_x)
}

/// Cumulative table for drawing joint outcomes.
struct OutcomeSampler {
    cumulative: [f64; OutcomeKey::COUNT],
}

impl OutcomeSampler {
    fn new(probs: &[f64; OutcomeKey::COUNT]) -> Self {
        let mut cumulative = [0.0; OutcomeKey::COUNT];
        let mut acc = 0.0;
        for (c, &p) in cumulative.iter_mut().zip(probs) {
            acc += p.max(0.0);
            *c = acc;
        }
        Self { cumulative }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> OutcomeKey {
        let u = rng.random::<f64>() * self.cumulative[OutcomeKey::COUNT - 1];
        let idx = self.cumulative.partition_point(|&c| c <= u).min(OutcomeKey::COUNT - 1);
        OutcomeKey::from_index(idx)
    }
}

/// Generates a time-sorted event stream for one phase setting.
/// Deterministic for a fixed `run.seed`.
pub fn simulate_run(source: &SourceParams, phases: AnalyzerPhase, run: &RunConfig) -> Result<EventStream> {
    source.validate()?;
    run.validate(source.pump.bin_delay)?;
    let rho = emitted_density_matrix(source)?;
    let sampler = OutcomeSampler::new(joint_distribution(&rho, phases).probabilities());

    let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
    let rep_ps = secs_to_ps(run.rep_period);
    let delay_ps = source.pump.bin_delay * 1e12;
    let lead_ps = run.sync_lead * 1e12;
    let jitter = if run.jitter_sigma > 0.0 {
        Some(Normal::new(0.0, run.jitter_sigma * 1e12).map_err(|_| Error::ConfigInvalid("jitter"))?)
    } else {
        None
    };

    let expected = run.n_pulses as f64 * (1.0 + 2.0 * run.pair_prob * run.det_efficiency);
    let mut events = Vec::with_capacity(expected as usize + 16);

    for k in 0..run.n_pulses {
        let sync = k as i64 * rep_ps;
        events.push(EventRecord::new(Channel::Sync, sync as u64));
        if !rng.random_bool(run.pair_prob) {
            continue;
        }
        let outcome = sampler.sample(&mut rng);
        let (t_xx, t_x) = sample_cascade_times(source.tau_xx, source.tau_x, &mut rng);
        let photons = [
            (Channel::photon(Arm::Biexciton, outcome.port_xx), outcome.slot_xx, t_xx),
            (Channel::photon(Arm::Exciton, outcome.port_x), outcome.slot_x, t_x),
        ];
        for (channel, slot, emission) in photons {
            let jitter_ps = jitter.map_or(0.0, |d| d.sample(&mut rng));
            if !rng.random_bool(run.det_efficiency) {
                continue;
            }
            let t = sync as f64 + lead_ps + f64::from(slot) * delay_ps + emission * 1e12 + jitter_ps;
            events.push(EventRecord::new(channel, t.round().max(0.0) as u64));
        }
    }

    let span_ps = run.n_pulses as f64 * rep_ps as f64;
    let mean_darks = run.dark_rate * run.n_pulses as f64 * run.rep_period;
    if mean_darks > 0.0 {
        let poisson = Poisson::new(mean_darks).map_err(|_| Error::ConfigInvalid("dark_rate"))?;
        for channel in Channel::PHOTON {
            let n = poisson.sample(&mut rng) as u64;
            for _ in 0..n {
                let t = (rng.random::<f64>() * span_ps).floor() as u64;
                events.push(EventRecord::new(channel, t));
            }
        }
    }

    events.sort_unstable();
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_pulses_gives_empty_stream() {
        let run = RunConfig { n_pulses: 0, ..RunConfig::default() };
        let s = simulate_run(&SourceParams::default(), AnalyzerPhase::default(), &run).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn same_seed_same_stream() {
        let run = RunConfig { n_pulses: 20_000, ..RunConfig::default() };
        let a = simulate_run(&SourceParams::default(), AnalyzerPhase::default(), &run).unwrap();
        let b = simulate_run(&SourceParams::default(), AnalyzerPhase::default(), &run).unwrap();
        assert_eq!(a, b);
        let c =
            simulate_run(&SourceParams::default(), AnalyzerPhase::default(), &RunConfig { seed: 2, ..run }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn stream_is_sorted_and_has_one_sync_per_cycle() {
        let run = RunConfig { n_pulses: 5_000, dark_rate: 1e5, ..RunConfig::default() };
        let s = simulate_run(&SourceParams::default(), AnalyzerPhase::default(), &run).unwrap();
        assert!(s.windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
        assert_eq!(s.iter().filter(|e| e.channel == Channel::Sync).count(), 5_000);
    }

    #[test]
    fn rejects_invalid_config() {
        let src = SourceParams::default();
        let bad = RunConfig { pair_prob: 1.5, ..RunConfig::default() };
        assert!(matches!(simulate_run(&src, AnalyzerPhase::default(), &bad), Err(Error::OutOfRange { .. })));
        let short = RunConfig { rep_period: 6e-9, ..RunConfig::default() };
        assert!(matches!(simulate_run(&src, AnalyzerPhase::default(), &short), Err(Error::ConfigInvalid(_))));
        let wide = RunConfig { window: 4e-9, ..RunConfig::default() };
        assert!(matches!(simulate_run(&src, AnalyzerPhase::default(), &wide), Err(Error::ConfigInvalid(_))));
    }

    #[test]
    fn cascade_is_ordered() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let (t_xx, t_x) = sample_cascade_times(405e-12, 771e-12, &mut rng);
            assert!(t_xx >= 0.0 && t_x > t_xx);
        }
    }

    #[test]
    fn cascade_means_match_lifetimes() {
        let n = 1_000_000;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (mut sum_xx, mut sum_gap) = (0.0, 0.0);
        for _ in 0..n {
            let (t_xx, t_x) = sample_cascade_times(405e-12, 771e-12, &mut rng);
            sum_xx += t_xx;
            sum_gap += t_x - t_xx;
        }
        let nf = n as f64;
        // exponential: std = mean, so the sample mean has sigma tau / sqrt(n)
        assert!((sum_xx / nf - 405e-12).abs() < 3.0 * 405e-12 / nf.sqrt());
        assert!((sum_gap / nf - 771e-12).abs() < 3.0 * 771e-12 / nf.sqrt());
    }

    #[test]
    fn channel_codes_round_trip() {
        for c in Channel::ALL {
            assert_eq!(Channel::from_code(c.code()), Some(c));
        }
        assert_eq!(Channel::from_code(5), None);
        assert_eq!(Channel::photon(Arm::Exciton, Port::Two), Channel::X2);
    }
}
