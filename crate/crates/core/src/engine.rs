//! Single-pass reduction of sorted time-tag streams.
//!
//! All reducers here are push-based state machines: feed records in
//! timestamp order, then call `finish`. Memory is bounded by the histogram
//! size and the 36 coincidence cells, independent of stream length.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};
#[allow(unused_imports)]
use num_traits::Float;

use crate::analyzer::{angle_close, AnalyzerPhase, JointDistribution, OutcomeKey, Port};
use crate::error::{Error, Result};
use crate::simulator::{secs_to_ps, Arm, Channel, EventRecord};

/// Counts of `event_time - last_SYNC_time` for one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalHistogram {
    pub channel: Channel,
    /// Bin width (s).
    pub bin_width: f64,
    pub counts: Vec<u64>,
    /// Events beyond the histogram range.
    pub overflow: u64,
    /// Events that arrived before the first SYNC.
    pub no_sync: u64,
    bin_width_ps: u64,
}

impl ArrivalHistogram {
    pub fn new(channel: Channel, bin_width: f64, range: f64) -> Self {
        let bin_width_ps = secs_to_ps(bin_width).max(1) as u64;
        let bins = (secs_to_ps(range).max(0) as u64).div_ceil(bin_width_ps) as usize;
        Self { channel, bin_width, counts: vec![0; bins], overflow: 0, no_sync: 0, bin_width_ps }
    }

    /// Records one event at `t_rel_ps` after its SYNC.
    #[inline]
    pub fn record(&mut self, t_rel_ps: u64) {
        let bin = (t_rel_ps / self.bin_width_ps) as usize;
        match self.counts.get_mut(bin) {
            Some(c) => *c += 1,
            None => self.overflow += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Left edge of bin `i` (s).
    pub fn bin_start(&self, i: usize) -> f64 {
        i as f64 * self.bin_width_ps as f64 * 1e-12
    }

    /// Position of the first of three arrival peaks spaced by `delay` (s):
    /// the mode of the histogram folded onto the first slot, after a
    /// +-128 ps moving sum. Zero for an empty histogram.
    pub fn first_peak_offset(&self, delay: f64) -> f64 {
        let n = self.counts.len();
        let step = (delay * 1e12 / self.bin_width_ps as f64).round() as usize;
        let half = (128 / self.bin_width_ps) as usize;
        let mut prefix = Vec::with_capacity(n + 1);
        prefix.push(0u64);
        for &c in &self.counts {
            prefix.push(prefix.last().unwrap() + c);
        }
        let smoothed = |i: usize| prefix[(i + half + 1).min(n)] - prefix[i.saturating_sub(half)];
        let mut best = None;
        for i in 0..n.saturating_sub(2 * step) {
            let c = smoothed(i) + smoothed(i + step) + smoothed(i + 2 * step);
            if c > 0 && best.is_none_or(|(_, b)| c > b) {
                best = Some((i, c));
            }
        }
        match best {
            Some((i, _)) => (i as f64 + 0.5) * self.bin_width_ps as f64 * 1e-12,
            None => 0.0,
        }
    }
}

/// Builds arrival histograms for several channels in one pass.
#[derive(Debug, Clone)]
pub struct HistogramBuilder {
    histograms: Vec<ArrivalHistogram>,
    last_sync: Option<u64>,
}

impl HistogramBuilder {
    pub fn new(channels: &[Channel], bin_width: f64, range: f64) -> Self {
        Self {
            histograms: channels.iter().map(|&c| ArrivalHistogram::new(c, bin_width, range)).collect(),
            last_sync: None,
        }
    }

    #[inline]
    pub fn push(&mut self, rec: EventRecord) {
        if rec.channel == Channel::Sync {
            self.last_sync = Some(rec.timestamp);
            return;
        }
        let Some(h) = self.histograms.iter_mut().find(|h| h.channel == rec.channel) else {
            return;
        };
        match self.last_sync {
            Some(sync) => h.record(rec.timestamp - sync),
            None => h.no_sync += 1,
        }
    }

    pub fn finish(self) -> Vec<ArrivalHistogram> {
        self.histograms
    }
}

/// Histogram of one channel relative to the preceding SYNC.
pub fn build_histogram<I>(stream: I, channel: Channel, bin_width: f64, range: f64) -> ArrivalHistogram
where
    I: IntoIterator<Item = EventRecord>,
{
    let mut b = HistogramBuilder::new(&[channel], bin_width, range);
    for rec in stream {
        b.push(rec);
    }
    b.finish().pop().unwrap()
}

/// Slot `k` if `|t_rel - offset - k * delay| <= window / 2`, else `None`.
pub fn classify_slot(t_rel: f64, delay: f64, window: f64, offset: f64) -> Option<u8> {
    let d = t_rel - offset;
    let k = (d / delay).round();
    if !(0.0..=2.0).contains(&k) {
        return None;
    }
    ((d - k * delay).abs() <= window / 2.0).then_some(k as u8)
}

/// Integer-picosecond slot classifier for one channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotClassifier {
    delay_ps: i64,
    window_ps: i64,
    offset_ps: i64,
}

impl SlotClassifier {
    pub fn new(delay: f64, window: f64, offset: f64) -> Self {
        Self { delay_ps: secs_to_ps(delay), window_ps: secs_to_ps(window), offset_ps: secs_to_ps(offset) }
    }

    #[inline]
    pub fn classify(&self, t_rel_ps: u64) -> Option<u8> {
        let d = t_rel_ps as i64 - self.offset_ps;
        let k = (2 * d + self.delay_ps).div_euclid(2 * self.delay_ps);
        if !(0..=2).contains(&k) {
            return None;
        }
        (2 * (d - k * self.delay_ps).abs() <= self.window_ps).then_some(k as u8)
    }
}

/// Per-channel slot offsets (s), i.e. where the slot-0 peak sits after SYNC.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelOffsets {
    /// Indexed by channel code; the SYNC entry is unused.
    offsets: [f64; 5],
}

impl ChannelOffsets {
    pub fn uniform(offset: f64) -> Self {
        Self { offsets: [offset; 5] }
    }

    pub fn get(&self, channel: Channel) -> f64 {
        self.offsets[channel.code() as usize]
    }

    pub fn set(&mut self, channel: Channel, offset: f64) {
        self.offsets[channel.code() as usize] = offset;
    }

    /// Mode of the first peak of each photon channel's histogram.
    pub fn from_histograms(histograms: &[ArrivalHistogram], delay: f64) -> Self {
        let mut out = Self::uniform(0.0);
        for h in histograms {
            out.set(h.channel, h.first_peak_offset(delay));
        }
        out
    }
}

impl Default for ChannelOffsets {
    fn default() -> Self {
        Self::uniform(0.0)
    }
}

/// The detector ports analysed as one pair, e.g. XX1-X2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PortPair {
    pub xx: Port,
    pub x: Port,
}

impl PortPair {
    pub const fn new(xx: Port, x: Port) -> Self {
        Self { xx, x }
    }

    pub fn key(&self, slot_xx: u8, slot_x: u8) -> OutcomeKey {
        OutcomeKey::new(self.xx, slot_xx, self.x, slot_x)
    }

    pub fn all() -> [PortPair; 4] {
        [
            PortPair::new(Port::One, Port::One),
            PortPair::new(Port::One, Port::Two),
            PortPair::new(Port::Two, Port::One),
            PortPair::new(Port::Two, Port::Two),
        ]
    }
}

impl Default for PortPair {
    /// XX1-X2.
    fn default() -> Self {
        Self::new(Port::One, Port::Two)
    }
}

/// Post-selected coincidence counts of one phase setting.
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceTable {
    pub counts: [u64; OutcomeKey::COUNT],
    /// SYNC cycles observed.
    pub exposure: u64,
    pub phase: AnalyzerPhase,
}

impl CoincidenceTable {
    pub fn new(phase: AnalyzerPhase) -> Self {
        Self { counts: [0; OutcomeKey::COUNT], exposure: 0, phase }
    }

    /// Noiseless table with `round(p * pairs)` counts per outcome.
    pub fn from_distribution(dist: &JointDistribution, pairs: f64, exposure: u64, phase: AnalyzerPhase) -> Self {
        let mut t = Self::new(phase);
        for (key, p) in dist.iter() {
            t.counts[key.index()] = (p.max(0.0) * pairs).round() as u64;
        }
        t.exposure = exposure;
        t
    }

    pub fn get(&self, key: OutcomeKey) -> u64 {
        self.counts[key.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Cell-wise sum with another table of the same phase setting.
    pub fn merge(&mut self, other: &CoincidenceTable) -> Result<()> {
        if !self.phase.approx_eq(&other.phase, 1e-9) {
            return Err(Error::ConfigInvalid("cannot merge tables of different phase settings"));
        }
        for (a, b) in self.counts.iter_mut().zip(other.counts.iter()) {
            *a += b;
        }
        self.exposure += other.exposure;
        Ok(())
    }

    /// All cells of a port pair grouped by `slot_xx + slot_x`.
    pub fn slot_sum_histogram(&self, pair: PortPair) -> [u64; 5] {
        let mut h = [0; 5];
        for sxx in 0..3u8 {
            for sx in 0..3u8 {
                h[(sxx + sx) as usize] += self.get(pair.key(sxx, sx));
            }
        }
        h
    }

    /// The five triple-coincidence peaks along the `t_xx ~ t_x` diagonal:
    /// short-short, one long path (early), the interfering middle, one long
    /// path (late), long-long. The cross-pulse corners `(0, 2)` and `(2, 0)`
    /// lie off the diagonal and are reported by [`Self::cross_pulse`].
    pub fn five_peaks(&self, pair: PortPair) -> [u64; 5] {
        let mut h = [0; 5];
        for sxx in 0..3u8 {
            for sx in 0..3u8 {
                if sxx.abs_diff(sx) <= 1 {
                    h[(sxx + sx) as usize] += self.get(pair.key(sxx, sx));
                }
            }
        }
        h
    }

    /// Counts in the `(0, 2)` and `(2, 0)` cells.
    pub fn cross_pulse(&self, pair: PortPair) -> u64 {
        self.get(pair.key(0, 2)) + self.get(pair.key(2, 0))
    }

    /// Counts in the `(0, 0)` and `(2, 2)` cells.
    pub fn same_pulse(&self, pair: PortPair) -> u64 {
        self.get(pair.key(0, 0)) + self.get(pair.key(2, 2))
    }
}

/// Bookkeeping for one triple extraction pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TripleAudit {
    pub sync_cycles: u64,
    /// Cycles with an accepted event on both arms; equals the table total.
    pub coincident_cycles: u64,
    pub accepted_xx: u64,
    pub accepted_x: u64,
    /// Accepted events beyond the first one of their arm in a cycle.
    pub extra_accepted: u64,
    /// Photon events outside every slot window.
    pub rejected: u64,
    /// Photon events before the first SYNC.
    pub before_sync: u64,
}

/// Streaming laser-XX-X triple coincidence extractor.
///
/// Per SYNC cycle the earliest accepted event of each arm is kept; a cycle
/// with both arms present increments one cell.
#[derive(Debug, Clone)]
pub struct TripleExtractor {
    classifiers: [SlotClassifier; 5],
    table: CoincidenceTable,
    audit: TripleAudit,
    sync: Option<u64>,
    xx: Option<(Port, u8)>,
    x: Option<(Port, u8)>,
}

impl TripleExtractor {
    pub fn new(delay: f64, window: f64, offsets: &ChannelOffsets, phase: AnalyzerPhase) -> Self {
        let classifiers = core::array::from_fn(|code| {
            let channel = Channel::from_code(code as u8).unwrap();
            SlotClassifier::new(delay, window, offsets.get(channel))
        });
        Self {
            classifiers,
            table: CoincidenceTable::new(phase),
            audit: TripleAudit::default(),
            sync: None,
            xx: None,
            x: None,
        }
    }

    #[inline]
    fn close_cycle(&mut self) {
        if let (Some((pxx, sxx)), Some((px, sx))) = (self.xx.take(), self.x.take()) {
            self.table.counts[OutcomeKey::new(pxx, sxx, px, sx).index()] += 1;
            self.audit.coincident_cycles += 1;
        }
    }

    #[inline]
    pub fn push(&mut self, rec: EventRecord) {
        let (arm, port) = match (rec.channel.arm(), rec.channel.port()) {
            (Some(arm), Some(port)) => (arm, port),
            _ => {
                self.close_cycle();
                self.sync = Some(rec.timestamp);
                self.audit.sync_cycles += 1;
                return;
            }
        };
        let Some(sync) = self.sync else {
            self.audit.before_sync += 1;
            return;
        };
        let Some(slot) = self.classifiers[rec.channel.code() as usize].classify(rec.timestamp - sync) else {
            self.audit.rejected += 1;
            return;
        };
        let (held, accepted) = match arm {
            Arm::Biexciton => (&mut self.xx, &mut self.audit.accepted_xx),
            Arm::Exciton => (&mut self.x, &mut self.audit.accepted_x),
        };
        *accepted += 1;
        if held.is_none() {
            *held = Some((port, slot));
        } else {
            self.audit.extra_accepted += 1;
        }
    }

    pub fn finish(mut self) -> (CoincidenceTable, TripleAudit) {
        self.close_cycle();
        self.table.exposure = self.audit.sync_cycles;
        (self.table, self.audit)
    }
}

/// Triple coincidence table of a sorted stream.
pub fn extract_triples<I>(
    stream: I,
    delay: f64,
    window: f64,
    offsets: &ChannelOffsets,
    phase: AnalyzerPhase,
) -> (CoincidenceTable, TripleAudit)
where
    I: IntoIterator<Item = EventRecord>,
{
    let mut ex = TripleExtractor::new(delay, window, offsets, phase);
    for rec in stream {
        ex.push(rec);
    }
    ex.finish()
}

/// Measurement basis of a visibility.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// `0/1`, from side-slot cells.
    Time,
    /// `+X/-X`, middle-middle fringe at phase sums `0` and `pi`.
    X,
    /// `+Y/-Y`, middle-middle fringe at phase sums `pi/2` and `3pi/2`.
    Y,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::Time, Basis::X, Basis::Y];

    pub fn label(self) -> &'static str {
        match self {
            Basis::Time => "0/1",
            Basis::X => "+X/-X",
            Basis::Y => "+Y/-Y",
        }
    }
}

/// Which cells feed a visibility estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PortSelection {
    /// Only the given port pair; phase sums are taken literally.
    Pair(PortPair),
    /// All four port pairs. Swapping the port of one arm shifts the fringe
    /// by `pi`, so each pair contributes at phase sum plus `pi` per arm
    /// whose port differs from the reference pair.
    AllPorts { reference: PortPair },
}

impl PortSelection {
    fn pairs(&self) -> impl Iterator<Item = (PortPair, f64)> + '_ {
        let (all, reference) = match *self {
            PortSelection::Pair(p) => (false, p),
            PortSelection::AllPorts { reference } => (true, reference),
        };
        PortPair::all().into_iter().filter(move |p| all || *p == reference).map(move |p| {
            let flips = u8::from(p.xx != reference.xx) + u8::from(p.x != reference.x);
            (p, f64::from(flips) * PI)
        })
    }
}

/// A visibility with its Poisson standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilityEstimate {
    pub value: f64,
    pub sigma: f64,
}

const PHASE_TOL: f64 = 1e-6;

/// Visibility in `basis` from coincidence tables.
///
/// Time basis: `(N_same - N_cross) / (N_same + N_cross)` over the side-slot
/// cells of every table. Energy bases: exposure-normalized middle-middle
/// rates at effective phase sums `2 phi` and `2 phi + pi`, with `phi = 0`
/// for X and `pi/2` for Y, `(max - min) / (max + min)`. Only runs with equal
/// arm phases count; with [`PortSelection::AllPorts`] only the run with both
/// arms at `phi` is used and the two sums come from port flips.
pub fn visibility_from_counts(
    tables: &[CoincidenceTable],
    basis: Basis,
    selection: PortSelection,
) -> Result<VisibilityEstimate> {
    match basis {
        Basis::Time => {
            let (mut same, mut cross) = (0u64, 0u64);
            for t in tables {
                for (pair, _) in selection.pairs() {
                    same += t.same_pulse(pair);
                    cross += t.cross_pulse(pair);
                }
            }
            if same + cross == 0 {
                return Err(Error::EmptyCells);
            }
            let (s, c) = (same as f64, cross as f64);
            let n = s + c;
            Ok(VisibilityEstimate { value: (s - c) / n, sigma: 2.0 * (s * c * n).sqrt() / (n * n) })
        }
        Basis::X | Basis::Y => {
            let phi = if basis == Basis::X { 0.0 } else { FRAC_PI_2 };
            let target = 2.0 * phi;
            let all_ports = matches!(selection, PortSelection::AllPorts { .. });
            let mut groups = [(0u64, 0u64); 2];
            for t in tables {
                let (a, b) = (t.phase.phi_xx(), t.phase.phi_x());
                if !angle_close(a, b, PHASE_TOL) || (all_ports && !angle_close(a, phi, PHASE_TOL)) {
                    continue;
                }
                for (pair, shift) in selection.pairs() {
                    let theta = t.phase.sum() + shift;
                    for (g, center) in groups.iter_mut().zip([target, target + PI]) {
                        if angle_close(theta, center, PHASE_TOL) {
                            g.0 += t.get(pair.key(1, 1));
                            g.1 += t.exposure;
                        }
                    }
                }
            }
            for (g, center) in groups.iter().zip([target, target + PI]) {
                if g.1 == 0 {
                    return Err(Error::MissingRun { phi_xx: center / 2.0, phi_x: center / 2.0 });
                }
            }
            if groups[0].0 + groups[1].0 == 0 {
                return Err(Error::EmptyCells);
            }
            let rate = |g: (u64, u64)| (g.0 as f64 / g.1 as f64, (g.0 as f64).sqrt() / g.1 as f64);
            let (a, sa) = rate(groups[0]);
            let (b, sb) = rate(groups[1]);
            let n = a + b;
            let value = (a - b).abs() / n;
            let sigma = 2.0 * ((b * sa).powi(2) + (a * sb).powi(2)).sqrt() / (n * n);
            Ok(VisibilityEstimate { value, sigma })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analyzer::joint_distribution;
    use crate::state::{phi_plus, DensityMatrix};

    fn ev(channel: Channel, t: u64) -> EventRecord {
        EventRecord::new(channel, t)
    }

    #[test]
    fn classify_examples() {
        let (d, w, o) = (3.2e-9, 1.28e-9, 0.3e-9);
        assert_eq!(classify_slot(o, d, w, o), Some(0));
        assert_eq!(classify_slot(o + 3.2e-9, d, w, o), Some(1));
        assert_eq!(classify_slot(o + 6.4e-9, d, w, o), Some(2));
        assert_eq!(classify_slot(o + 1.6e-9, d, w, o), None);
        assert_eq!(classify_slot(o + 9.6e-9, d, w, o), None);
        assert_eq!(classify_slot(o - 0.5e-9, d, w, o), Some(0));
        assert_eq!(classify_slot(o - 0.7e-9, d, w, o), None);
    }

    #[test]
    fn integer_classifier_matches_float() {
        let c = SlotClassifier::new(3.2e-9, 1.28e-9, 0.3e-9);
        for t in (0..10_000u64).step_by(7) {
            assert_eq!(c.classify(t), classify_slot(t as f64 * 1e-12, 3.2e-9, 1.28e-9, 0.3e-9), "t = {t} ps");
        }
    }

    #[test]
    fn hand_built_triple() {
        let stream = [ev(Channel::Sync, 1000), ev(Channel::Xx1, 1000), ev(Channel::X2, 1000 + 6400)];
        let (table, audit) =
            extract_triples(stream, 3.2e-9, 1.28e-9, &ChannelOffsets::uniform(0.0), AnalyzerPhase::default());
        assert_eq!(table.get(OutcomeKey::new(Port::One, 0, Port::Two, 2)), 1);
        assert_eq!(table.total(), 1);
        assert_eq!(table.exposure, 1);
        assert_eq!(audit.coincident_cycles, 1);
    }

    #[test]
    fn earliest_event_per_arm_wins() {
        let stream = [
            ev(Channel::Sync, 0),
            ev(Channel::Xx2, 3200),
            ev(Channel::Xx1, 6400),
            ev(Channel::X1, 3300),
            ev(Channel::Sync, 12_500),
            ev(Channel::X1, 12_600),
        ];
        let mut stream = stream.to_vec();
        stream.sort();
        let (table, audit) =
            extract_triples(stream, 3.2e-9, 1.28e-9, &ChannelOffsets::uniform(0.0), AnalyzerPhase::default());
        assert_eq!(table.get(OutcomeKey::new(Port::Two, 1, Port::One, 1)), 1);
        assert_eq!(table.total(), 1);
        assert_eq!(audit.extra_accepted, 1);
        assert_eq!(audit.sync_cycles, 2);
    }

    #[test]
    fn events_before_sync_are_counted() {
        let stream = [ev(Channel::X1, 5), ev(Channel::Sync, 10)];
        let (_, audit) = extract_triples(stream, 3.2e-9, 1.28e-9, &ChannelOffsets::default(), AnalyzerPhase::default());
        assert_eq!(audit.before_sync, 1);
        let h = build_histogram(stream, Channel::X1, 16e-12, 12.5e-9);
        assert_eq!(h.no_sync, 1);
        assert_eq!(h.total(), 0);
    }

    #[test]
    fn empty_stream_gives_empty_histogram() {
        let h = build_histogram(core::iter::empty(), Channel::X1, 16e-12, 12.5e-9);
        assert_eq!(h.counts.len(), 782);
        assert!(h.counts.iter().all(|&c| c == 0));
        assert_eq!(h.first_peak_offset(3.2e-9), 0.0);
    }

    #[test]
    fn histogram_overflow() {
        let stream = [ev(Channel::Sync, 0), ev(Channel::X1, 100), ev(Channel::X1, 20_000)];
        let h = build_histogram(stream, Channel::X1, 16e-12, 12.5e-9);
        assert_eq!((h.total(), h.overflow), (1, 1));
        assert_eq!(h.counts[6], 1);
    }

    fn ideal_tables(pairs: f64) -> [CoincidenceTable; 4] {
        let rho = DensityMatrix::pure(&phi_plus()).unwrap();
        AnalyzerPhase::tomography_settings()
            .map(|ph| CoincidenceTable::from_distribution(&joint_distribution(&rho, ph), pairs, 1_000, ph))
    }

    #[test]
    fn ideal_visibilities_are_one() {
        let tables = ideal_tables(64_000.0);
        for basis in Basis::ALL {
            for sel in
                [PortSelection::AllPorts { reference: PortPair::default() }, PortSelection::Pair(PortPair::default())]
            {
                let v = visibility_from_counts(&tables, basis, sel).unwrap();
                assert!((v.value - 1.0).abs() < 1e-12, "{basis:?} {sel:?}: {}", v.value);
            }
        }
    }

    #[test]
    fn equal_counts_give_zero_visibility() {
        let mut a = CoincidenceTable::new(AnalyzerPhase::new(0.0, 0.0));
        let mut b = CoincidenceTable::new(AnalyzerPhase::new(PI / 2.0, PI / 2.0));
        let pair = PortPair::default();
        a.counts[pair.key(1, 1).index()] = 500;
        b.counts[pair.key(1, 1).index()] = 500;
        a.exposure = 10;
        b.exposure = 10;
        let v = visibility_from_counts(&[a, b], Basis::X, PortSelection::Pair(pair)).unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn visibility_errors() {
        let t = CoincidenceTable::new(AnalyzerPhase::default());
        assert_eq!(
            visibility_from_counts(core::slice::from_ref(&t), Basis::Time, PortSelection::Pair(PortPair::default())),
            Err(Error::EmptyCells)
        );
        assert!(matches!(
            visibility_from_counts(&[t], Basis::Y, PortSelection::Pair(PortPair::default())),
            Err(Error::MissingRun { .. })
        ));
    }

    #[test]
    fn five_peaks_and_corners() {
        let mut t = CoincidenceTable::new(AnalyzerPhase::default());
        let pair = PortPair::default();
        for (i, (sxx, sx)) in
            [(0, 0), (0, 1), (1, 0), (1, 1), (1, 2), (2, 1), (2, 2), (0, 2), (2, 0)].iter().enumerate()
        {
            t.counts[pair.key(*sxx, *sx).index()] = 10 * (i as u64 + 1);
        }
        assert_eq!(t.five_peaks(pair), [10, 20 + 30, 40, 50 + 60, 70]);
        assert_eq!(t.cross_pulse(pair), 80 + 90);
        assert_eq!(t.slot_sum_histogram(pair), [10, 50, 40 + 80 + 90, 110, 70]);
    }

    #[test]
    fn merge_requires_same_phase() {
        let mut a = CoincidenceTable::new(AnalyzerPhase::default());
        a.counts[0] = 2;
        a.exposure = 3;
        let b = a.clone();
        a.merge(&b).unwrap();
        assert_eq!((a.counts[0], a.exposure), (4, 6));
        let c = CoincidenceTable::new(AnalyzerPhase::new(1.0, 0.0));
        assert!(a.merge(&c).is_err());
    }
}
