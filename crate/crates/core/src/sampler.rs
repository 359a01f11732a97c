//! Seeded Monte Carlo generation of two-photon detection events.
//!
//! Each pair draws from its own ChaCha8 stream (the stream id is the pair
//! index), so any partition of the index range into chunks reproduces the
//! sequential stream exactly. A pair first draws its outcome class with
//! probability `(P_c, 1 - P_c)`, then its coordinates by rejection from the
//! no-interference density `n(x1, x2)`, which bounds both outcome densities:
//! `pc <= n/2` and `pd <= (1 + V) n/2`.

use std::io::{self, BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::densities::{pair_terms, total_coincidence_prob, EventKind};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::model::{amplitudes, SourceModel, SourceScene};

/// Branches whose rejection acceptance rate falls below this are refused.
pub const MIN_ACCEPTANCE: f64 = 1e-4;

/// Proposal budget per pair; far above what `MIN_ACCEPTANCE` implies.
const MAX_PROPOSALS: usize = 100_000_000;

/// One detected pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    pub kind: EventKind,
    pub x1: f64,
    pub x2: f64,
}

/// Stream families, so photons and pairs from one seed are unrelated.
#[derive(Clone, Copy)]
enum Domain {
    Pairs = 0x7061_6972,
    Photons = 0x7068_6f74,
}

/// SplitMix64 finalizer.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn stream(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, domain as u64));
    rng.set_stream(index);
    rng
}

/// Precomputed per-scene sampling constants.
struct PairSampler {
    scene: SourceScene,
    model: SourceModel,
    coincidence_prob: f64,
}

impl PairSampler {
    fn new(scene: &SourceScene, model: SourceModel) -> Self {
        PairSampler { scene: *scene, model, coincidence_prob: total_coincidence_prob(scene, model) }
    }

    /// Branch probability over envelope mass.
    fn acceptance(&self, kind: EventKind) -> f64 {
        let v = self.scene.visibility();
        match kind {
            EventKind::CrossCoincidence => 2.0 * self.coincidence_prob,
            EventKind::Double => 2.0 * (1.0 - self.coincidence_prob) / (1.0 + v),
        }
    }

    fn gaussian(&self, rng: &mut ChaCha8Rng, center: f64) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        center + self.scene.sigma() * z
    }

    /// A draw from `n(x1, x2)`.
    fn propose(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        let (xp, xm) = (self.scene.x_plus(), self.scene.x_minus());
        match self.model {
            SourceModel::ThermalPair => {
                let c1 = if rng.random::<f64>() < 0.5 { xp } else { xm };
                let c2 = if rng.random::<f64>() < 0.5 { xp } else { xm };
                (self.gaussian(rng, c1), self.gaussian(rng, c2))
            }
            SourceModel::DistinctEmitters => {
                let (c1, c2) = if rng.random::<f64>() < 0.5 { (xp, xm) } else { (xm, xp) };
                (self.gaussian(rng, c1), self.gaussian(rng, c2))
            }
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<EventRecord> {
        let kind = if rng.random::<f64>() < self.coincidence_prob {
            EventKind::CrossCoincidence
        } else {
            EventKind::Double
        };
        let acceptance = self.acceptance(kind);
        if acceptance < MIN_ACCEPTANCE {
            return Err(Error::SamplingFailure { kind, acceptance, minimum: MIN_ACCEPTANCE });
        }
        let v = self.scene.visibility();
        for _ in 0..MAX_PROPOSALS {
            let (x1, x2) = self.propose(rng);
            let t = pair_terms(amplitudes(x1, &self.scene), amplitudes(x2, &self.scene), self.model);
            let ratio = if t.n > 0.0 { (t.kappa / t.n).clamp(0.0, 1.0) } else { 0.0 };
            let accept = match kind {
                EventKind::CrossCoincidence => 1.0 - v * ratio,
                EventKind::Double => (1.0 + v * ratio) / (1.0 + v),
            };
            if rng.random::<f64>() < accept {
                return Ok(EventRecord { kind, x1, x2 });
            }
        }
        Err(Error::SamplingFailure { kind, acceptance: 0.0, minimum: MIN_ACCEPTANCE })
    }
}

/// `n_pairs` i.i.d. detected pairs, reproducible bit-for-bit from `seed`.
pub fn sample_events(scene: &SourceScene, model: SourceModel, n_pairs: usize, seed: u64) -> Result<Vec<EventRecord>> {
    sample_events_with(scene, model, n_pairs, seed, Exec::default())
}

pub fn sample_events_with(
    scene: &SourceScene,
    model: SourceModel,
    n_pairs: usize,
    seed: u64,
    exec: Exec,
) -> Result<Vec<EventRecord>> {
    sample_event_range(scene, model, 0..n_pairs as u64, seed, exec)
}

/// Pairs with indices in `range`; concatenating consecutive ranges gives the
/// same events as one call over their union.
pub fn sample_event_range(
    scene: &SourceScene,
    model: SourceModel,
    range: std::ops::Range<u64>,
    seed: u64,
    exec: Exec,
) -> Result<Vec<EventRecord>> {
    if range.is_empty() {
        return Err(Error::invalid("need at least one pair to sample"));
    }
    let sampler = PairSampler::new(scene, model);
    let start = range.start;
    let len = (range.end - range.start) as usize;
    exec.try_map(len, |i| sampler.draw(&mut stream(seed, Domain::Pairs, start + i as u64)))
}

/// Pairs drawn in index order until `n_coincidences` cross-coincidences are
/// collected; the returned list includes every double drawn along the way.
pub fn sample_until_coincidences(
    scene: &SourceScene,
    model: SourceModel,
    n_coincidences: usize,
    seed: u64,
    exec: Exec,
) -> Result<Vec<EventRecord>> {
    if n_coincidences == 0 {
        return Err(Error::invalid("need at least one coincidence"));
    }
    let sampler = PairSampler::new(scene, model);
    if sampler.coincidence_prob <= 0.0 {
        return Err(Error::SamplingFailure { kind: EventKind::CrossCoincidence, acceptance: 0.0, minimum: MIN_ACCEPTANCE });
    }
    let chunk = ((n_coincidences as f64 / sampler.coincidence_prob) * 1.1).ceil().max(64.0) as u64;
    let mut events = Vec::new();
    let mut found = 0;
    let mut next = 0u64;
    loop {
        let batch = sample_event_range(scene, model, next..next + chunk, seed, exec)?;
        next += chunk;
        for e in batch {
            events.push(e);
            if e.kind == EventKind::CrossCoincidence {
                found += 1;
                if found == n_coincidences {
                    return Ok(events);
                }
            }
        }
    }
}

/// Direct-imaging photon positions drawn from `q(x)`.
pub fn sample_photons(scene: &SourceScene, n: usize, seed: u64) -> Result<Vec<f64>> {
    sample_photons_with(scene, n, seed, Exec::default())
}

pub fn sample_photons_with(scene: &SourceScene, n: usize, seed: u64, exec: Exec) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("need at least one photon to sample"));
    }
    let (xp, xm, sigma) = (scene.x_plus(), scene.x_minus(), scene.sigma());
    Ok(exec.map(n, |i| {
        let mut rng = stream(seed, Domain::Photons, i as u64);
        let c = if rng.random::<f64>() < 0.5 { xp } else { xm };
        let z: f64 = rng.sample(StandardNormal);
        c + sigma * z
    }))
}

/// Pixelated detector over `[lo, hi)` with optional region boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorSpec {
    pub pixel_width: f64,
    pub lo: f64,
    pub hi: f64,
    /// Interior cut points splitting the span into regions, ascending.
    pub region_boundaries: Vec<f64>,
}

impl DetectorSpec {
    pub fn new(pixel_width: f64, lo: f64, hi: f64) -> Result<Self> {
        let d = DetectorSpec { pixel_width, lo, hi, region_boundaries: Vec::new() };
        d.validate()?;
        Ok(d)
    }

    pub fn with_regions(mut self, boundaries: Vec<f64>) -> Result<Self> {
        self.region_boundaries = boundaries;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pixel_width.is_finite() && self.pixel_width > 0.0) {
            return Err(Error::invalid(format!("pixel width must be > 0, got {}", self.pixel_width)));
        }
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::invalid(format!("detector span needs lo < hi, got [{}, {}]", self.lo, self.hi)));
        }
        let b = &self.region_boundaries;
        if b.iter().any(|&x| !(x > self.lo && x < self.hi)) || b.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("region boundaries must be ascending and strictly inside the span"));
        }
        Ok(())
    }

    pub fn bins(&self) -> usize {
        ((self.hi - self.lo) / self.pixel_width).ceil() as usize
    }

    pub fn pixel(&self, x: f64) -> Option<usize> {
        if !(x >= self.lo && x < self.hi) {
            return None;
        }
        Some((((x - self.lo) / self.pixel_width) as usize).min(self.bins() - 1))
    }

    pub fn n_regions(&self) -> usize {
        self.region_boundaries.len() + 1
    }

    pub fn region(&self, x: f64) -> Option<usize> {
        if !(x >= self.lo && x < self.hi) {
            return None;
        }
        Some(self.region_boundaries.iter().take_while(|&&b| x >= b).count())
    }
}

/// Square histogram over pixel pairs `(x1, x2)`; row index is `x1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram2d {
    pub bins: usize,
    pub counts: Vec<u64>,
    /// Events with at least one coordinate outside the span.
    pub overflow: u64,
}

impl Histogram2d {
    fn new(bins: usize) -> Self {
        Histogram2d { bins, counts: vec![0; bins * bins], overflow: 0 }
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.bins + j]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.overflow
    }
}

/// Pair counts by `(region of x1, region of x2)`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionCounts {
    pub n_regions: usize,
    pub coincidences: Vec<u64>,
    pub doubles: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinnedEvents {
    pub coincidences: Histogram2d,
    pub doubles: Histogram2d,
    /// Present when the detector defines regions.
    pub regions: Option<RegionCounts>,
}

pub fn bin_events(events: &[EventRecord], detector: &DetectorSpec) -> BinnedEvents {
    let bins = detector.bins();
    let mut coincidences = Histogram2d::new(bins);
    let mut doubles = Histogram2d::new(bins);
    let r = detector.n_regions();
    let mut regions = RegionCounts { n_regions: r, coincidences: vec![0; r * r], doubles: vec![0; r * r] };
    for e in events {
        let hist = match e.kind {
            EventKind::CrossCoincidence => &mut coincidences,
            EventKind::Double => &mut doubles,
        };
        match (detector.pixel(e.x1), detector.pixel(e.x2)) {
            (Some(i), Some(j)) => hist.counts[i * bins + j] += 1,
            _ => hist.overflow += 1,
        }
        if let (Some(a), Some(b)) = (detector.region(e.x1), detector.region(e.x2)) {
            let table = match e.kind {
                EventKind::CrossCoincidence => &mut regions.coincidences,
                EventKind::Double => &mut regions.doubles,
            };
            table[a * r + b] += 1;
        }
    }
    BinnedEvents {
        coincidences,
        doubles,
        regions: (!detector.region_boundaries.is_empty()).then_some(regions),
    }
}

pub const EVENTS_CSV_HEADER: &str = "pair_index,kind,x1,x2";

/// Writes `pair_index,kind,x1,x2` rows; coordinates use the shortest
/// exponent form that parses back to the same value.
pub fn write_events_csv<W: Write>(mut w: W, events: &[EventRecord]) -> io::Result<()> {
    writeln!(w, "{EVENTS_CSV_HEADER}")?;
    for (i, e) in events.iter().enumerate() {
        writeln!(w, "{},{},{:e},{:e}", i, e.kind.code(), e.x1, e.x2)?;
    }
    Ok(())
}

pub fn read_events_csv<R: BufRead>(r: R) -> Result<Vec<EventRecord>> {
    let mut lines = r.lines();
    let bad = |line: usize, what: &str| Error::invalid(format!("events csv line {line}: {what}"));
    match lines.next() {
        Some(Ok(h)) if h.trim_end() == EVENTS_CSV_HEADER => {}
        _ => return Err(bad(1, "missing header")),
    }
    let mut out = Vec::new();
    for (n, line) in lines.enumerate() {
        let lineno = n + 2;
        let line = line.map_err(|e| bad(lineno, &e.to_string()))?;
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(bad(lineno, "expected 4 fields"));
        }
        let kind = EventKind::from_code(f[1]).ok_or_else(|| bad(lineno, "kind must be C or D"))?;
        let parse = |s: &str| s.parse::<f64>().ok().filter(|x| x.is_finite());
        let (x1, x2) = match (parse(f[2]), parse(f[3])) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(bad(lineno, "coordinates must be finite numbers")),
        };
        out.push(EventRecord { kind, x1, x2 });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sc(eps: f64, v: f64) -> SourceScene {
        SourceScene::new(0.0, eps, v).unwrap()
    }

    fn coincidence_fraction(events: &[EventRecord]) -> f64 {
        events.iter().filter(|e| e.kind == EventKind::CrossCoincidence).count() as f64 / events.len() as f64
    }

    #[test]
    fn identical_photons_never_split() {
        for model in [SourceModel::ThermalPair, SourceModel::DistinctEmitters] {
            let ev = sample_events(&sc(0.0, 1.0), model, 10_000, 3).unwrap();
            assert_eq!(coincidence_fraction(&ev), 0.0);
        }
    }

    #[test]
    fn coincidence_fraction_is_binomial() {
        let n = 100_000;
        let ev = sample_events(&sc(1.0, 0.92), SourceModel::ThermalPair, n, 11).unwrap();
        let p = 0.090_875_8;
        assert!((coincidence_fraction(&ev) - p).abs() < 3.0 * (p * (1.0 - p) / n as f64).sqrt());
        for model in [SourceModel::ThermalPair, SourceModel::DistinctEmitters] {
            let ev = sample_events(&sc(0.7, 0.0), model, 20_000, 5).unwrap();
            assert!((coincidence_fraction(&ev) - 0.5).abs() < 3.0 * (0.25 / 20_000f64).sqrt());
        }
    }

    #[test]
    fn deterministic_and_chunkable() {
        let s = sc(0.8, 0.9);
        let tp = SourceModel::ThermalPair;
        let a = sample_events_with(&s, tp, 500, 42, Exec::Sequential).unwrap();
        let b = sample_events_with(&s, tp, 500, 42, Exec::Parallel).unwrap();
        assert_eq!(a, b);
        let mut c = sample_event_range(&s, tp, 0..123, 42, Exec::Sequential).unwrap();
        c.extend(sample_event_range(&s, tp, 123..500, 42, Exec::Parallel).unwrap());
        assert_eq!(a, c);
        let d = sample_events(&s, tp, 500, 43).unwrap();
        assert_ne!(a, d);
        assert!(a.windows(2).all(|w| w[0] != w[1]));
        assert_eq!(sample_photons(&s, 50, 1).unwrap(), sample_photons_with(&s, 50, 1, Exec::Sequential).unwrap());
    }

    #[test]
    fn pathological_branch_is_refused() {
        // P_c ~ 1e-5: the coincidence envelope accepts 2e-5 of proposals
        let s = sc(0.0126, 1.0);
        let err = sample_events(&s, SourceModel::ThermalPair, 1_000_000, 1).unwrap_err();
        assert!(matches!(err, Error::SamplingFailure { kind: EventKind::CrossCoincidence, .. }));
        assert!(sample_events(&s, SourceModel::ThermalPair, 0, 1).is_err());
    }

    #[test]
    fn conditioning_on_coincidences() {
        let s = sc(0.5, 0.92);
        let ev = sample_until_coincidences(&s, SourceModel::ThermalPair, 100, 9, Exec::Parallel).unwrap();
        assert_eq!(ev.iter().filter(|e| e.kind == EventKind::CrossCoincidence).count(), 100);
        assert_eq!(ev.last().unwrap().kind, EventKind::CrossCoincidence);
        assert!(sample_until_coincidences(&sc(0.0, 1.0), SourceModel::ThermalPair, 10, 1, Exec::Parallel).is_err());
    }

    #[test]
    fn binning_edge_cases() {
        let det = DetectorSpec::new(0.5, -2.0, 2.0).unwrap();
        assert_eq!(det.bins(), 8);
        let b = bin_events(&[], &det);
        assert_eq!(b.coincidences.total() + b.doubles.total(), 0);
        assert!(b.regions.is_none());
        let b = bin_events(&[EventRecord { kind: EventKind::Double, x1: 0.0, x2: 0.0 }], &det);
        assert_eq!(b.doubles.get(4, 4), 1);
        assert_eq!(b.doubles.counts.iter().sum::<u64>(), 1);
        assert!(DetectorSpec::new(0.0, 0.0, 1.0).is_err());
        assert!(DetectorSpec::new(0.1, 1.0, 1.0).is_err());
        assert!(det.clone().with_regions(vec![1.0, -1.0]).is_err());
    }

    #[test]
    fn binning_preserves_counts_and_regions() {
        let ev = sample_events(&sc(1.5, 0.8), SourceModel::ThermalPair, 5000, 2).unwrap();
        let det = DetectorSpec::new(0.25, -3.0, 3.0).unwrap().with_regions(vec![-1.0, 0.0, 1.0]).unwrap();
        let b = bin_events(&ev, &det);
        let nc = ev.iter().filter(|e| e.kind == EventKind::CrossCoincidence).count() as u64;
        assert_eq!(b.coincidences.total(), nc);
        assert_eq!(b.doubles.total(), ev.len() as u64 - nc);
        assert!(b.doubles.overflow > 0);
        let r = b.regions.unwrap();
        let inside = ev.iter().filter(|e| det.region(e.x1).is_some() && det.region(e.x2).is_some()).count() as u64;
        assert_eq!(r.coincidences.iter().sum::<u64>() + r.doubles.iter().sum::<u64>(), inside);
        assert_eq!(det.region(-1.5), Some(0));
        assert_eq!(det.region(-1.0), Some(1));
        assert_eq!(det.region(2.9), Some(3));
    }

    #[test]
    fn csv_header_and_rejects() {
        let mut buf = Vec::new();
        write_events_csv(&mut buf, &[EventRecord { kind: EventKind::CrossCoincidence, x1: 0.1, x2: -2.5 }]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("pair_index,kind,x1,x2\n0,C,"));
        assert!(!text.contains('\r'));
        assert!(read_events_csv("pair_index,kind,x1,x2\n0,X,1,2\n".as_bytes()).is_err());
        assert!(read_events_csv("a,b\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_exact(xs in prop::collection::vec((any::<bool>(), -1e6f64..1e6, -1e6f64..1e6), 1..50)) {
            let events: Vec<EventRecord> = xs.iter().map(|&(c, x1, x2)| EventRecord {
                kind: if c { EventKind::CrossCoincidence } else { EventKind::Double }, x1, x2,
            }).collect();
            let mut buf = Vec::new();
            write_events_csv(&mut buf, &events).unwrap();
            prop_assert_eq!(read_events_csv(buf.as_slice()).unwrap(), events);
        }
    }
}
