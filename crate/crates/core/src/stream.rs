//! Shared domain types: arriving candidates, validated streams, the strict
//! total order used for every value comparison, and reproducible seeded
//! randomness with independent substreams.

use std::cmp::Ordering;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Errors from stream construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StreamError {
    /// A stream must contain at least one item.
    Empty,
    /// Arrival positions must be exactly 1..=n in order.
    BadArrival { expected: usize, got: usize },
    /// Observed and true values must be finite.
    NonFiniteValue { arrival: usize },
}

impl fmt::Display for StreamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Empty => write!(f, "stream is empty"),
            Self::BadArrival { expected, got } => {
                write!(f, "arrival positions must be contiguous: expected {expected}, got {got}")
            }
            Self::NonFiniteValue { arrival } => {
                write!(f, "non-finite value at arrival {arrival}")
            }
        }
    }
}

impl std::error::Error for StreamError {}

// ---------------------------------------------------------------------------
// Items and streams
// ---------------------------------------------------------------------------

/// One arriving candidate: an opaque identity, its 1-based arrival position,
/// the value the online policy observes, and optional ground-truth fields
/// used only by offline selection and by metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamItem {
    /// Opaque identity, preserved across permutations.
    pub id: String,
    /// 1-based position in the stream.
    pub arrival: usize,
    /// The value the online policy sees.
    pub observed_value: f64,
    /// Ground-truth value, if known; consumed by offline selection and
    /// value-ratio metrics, never by online decision rules.
    pub true_value: Option<f64>,
    /// Whether submitting this candidate succeeds, if known; consumed only
    /// by the attack-runner metrics.
    pub fooled: Option<bool>,
}

/// An ordered sequence of [`StreamItem`]s with arrivals exactly `1..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stream {
    items: Vec<StreamItem>,
}

impl Stream {
    /// Validates and wraps a vector of items: arrivals must be exactly
    /// `1..=n` in iteration order and every present value must be finite.
    pub fn new(items: Vec<StreamItem>) -> Result<Self, StreamError> {
        if items.is_empty() {
            return Err(StreamError::Empty);
        }
        for (i, item) in items.iter().enumerate() {
            if item.arrival != i + 1 {
                return Err(StreamError::BadArrival { expected: i + 1, got: item.arrival });
            }
            if !item.observed_value.is_finite() {
                return Err(StreamError::NonFiniteValue { arrival: item.arrival });
            }
            if let Some(t) = item.true_value {
                if !t.is_finite() {
                    return Err(StreamError::NonFiniteValue { arrival: item.arrival });
                }
            }
        }
        Ok(Self { items })
    }

    /// Builds a stream carrying only observed values: ids are the arrival
    /// positions, true values and success flags are absent.
    pub fn from_observed(values: &[f64]) -> Result<Self, StreamError> {
        let items = values
            .iter()
            .enumerate()
            .map(|(i, &v)| StreamItem {
                id: (i + 1).to_string(),
                arrival: i + 1,
                observed_value: v,
                true_value: None,
                fooled: None,
            })
            .collect();
        Self::new(items)
    }

    /// Number of items.
    pub fn n(&self) -> usize {
        self.items.len()
    }

    /// Items in arrival order.
    pub fn items(&self) -> &[StreamItem] {
        &self.items
    }

    /// Returns a uniformly shuffled copy with arrivals renumbered `1..=n`;
    /// every payload (id, values, flag) travels with its item.
    pub fn permute(&self, rng: &mut SeededRng) -> Stream {
        let mut items = self.items.clone();
        items.shuffle(rng);
        for (i, item) in items.iter_mut().enumerate() {
            item.arrival = i + 1;
        }
        Stream { items }
    }
}

// ---------------------------------------------------------------------------
// Total order on observations
// ---------------------------------------------------------------------------

/// Comparison key inducing a strict total order over stream items:
/// higher value wins, and on exactly equal values the EARLIER arrival is
/// treated as strictly larger.  "Top-k" and "k-th best" are therefore
/// always unique, keeping every rule and oracle deterministic.
#[derive(Debug, Clone, Copy)]
pub struct TotalOrderKey {
    pub value: f64,
    pub arrival: usize,
}

impl Ord for TotalOrderKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then_with(|| other.arrival.cmp(&self.arrival))
    }
}

impl PartialOrd for TotalOrderKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for TotalOrderKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for TotalOrderKey {}

/// Compares two (value, arrival) pairs under [`TotalOrderKey`] semantics.
pub fn compare(value_a: f64, arrival_a: usize, value_b: f64, arrival_b: usize) -> Ordering {
    TotalOrderKey { value: value_a, arrival: arrival_a }
        .cmp(&TotalOrderKey { value: value_b, arrival: arrival_b })
}

// ---------------------------------------------------------------------------
// Seeded randomness
// ---------------------------------------------------------------------------

/// Deterministic RNG with cheap independent substreams.
///
/// Identical `(seed, stream_index)` pairs always yield identical draws, and
/// distinct stream indices yield statistically independent sequences, so
/// parallel trials can each derive their own generator from a master seed
/// and produce results that do not depend on scheduling.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    stream_index: u64,
    inner: ChaCha12Rng,
}

impl SeededRng {
    /// Generator for `(seed, stream 0)`.
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Generator for an explicit `(seed, stream_index)` pair.
    pub fn with_stream(seed: u64, stream_index: u64) -> Self {
        let mut inner = ChaCha12Rng::seed_from_u64(seed);
        inner.set_stream(stream_index);
        Self { seed, stream_index, inner }
    }

    /// A fresh, independent generator sharing this one's seed.
    pub fn substream(&self, stream_index: u64) -> Self {
        Self::with_stream(self.seed, stream_index)
    }

    /// The master seed this generator was built from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The substream index this generator draws from.
    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest);
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_streams() {
        assert_eq!(Stream::new(Vec::new()), Err(StreamError::Empty));
    }

    #[test]
    fn rejects_gapped_arrivals() {
        let items = vec![StreamItem {
            id: "a".into(),
            arrival: 2,
            observed_value: 1.0,
            true_value: None,
            fooled: None,
        }];
        assert_eq!(Stream::new(items), Err(StreamError::BadArrival { expected: 1, got: 2 }));
    }

    #[test]
    fn rejects_non_finite_values() {
        assert!(matches!(
            Stream::from_observed(&[1.0, f64::NAN]),
            Err(StreamError::NonFiniteValue { arrival: 2 })
        ));
        let items = vec![StreamItem {
            id: "a".into(),
            arrival: 1,
            observed_value: 1.0,
            true_value: Some(f64::INFINITY),
            fooled: None,
        }];
        assert!(matches!(Stream::new(items), Err(StreamError::NonFiniteValue { arrival: 1 })));
    }

    #[test]
    fn key_order_prefers_value_then_earlier_arrival() {
        assert_eq!(compare(3.0, 5, 2.0, 1), Ordering::Greater);
        assert_eq!(compare(3.0, 5, 3.0, 2), Ordering::Less);
        assert_eq!(compare(3.0, 5, 3.0, 5), Ordering::Equal);
    }

    #[test]
    fn sorting_by_key_is_input_order_independent() {
        let mut a = vec![(2.0, 3), (2.0, 1), (5.0, 2)];
        let mut b = vec![(5.0, 2), (2.0, 1), (2.0, 3)];
        let by_key = |x: &(f64, usize), y: &(f64, usize)| compare(y.0, y.1, x.0, x.1);
        a.sort_by(by_key);
        b.sort_by(by_key);
        assert_eq!(a, b);
        assert_eq!(a[0], (5.0, 2));
        assert_eq!(a[1], (2.0, 1), "earlier arrival outranks later on ties");
    }

    #[test]
    fn identical_seed_and_stream_reproduce_draws() {
        let mut a = SeededRng::with_stream(9, 4);
        let mut b = SeededRng::with_stream(9, 4);
        for _ in 0..16 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn distinct_substreams_diverge() {
        let master = SeededRng::new(9);
        let mut a = master.substream(1);
        let mut b = master.substream(2);
        let same = (0..16).all(|_| a.next_u64() == b.next_u64());
        assert!(!same);
    }

    #[test]
    fn permute_preserves_payloads_and_renumbers() {
        let base = Stream::from_observed(&[10.0, 20.0, 30.0, 40.0]).unwrap();
        let mut rng = SeededRng::new(1);
        let shuffled = base.permute(&mut rng);
        assert_eq!(shuffled.n(), 4);
        let mut ids: Vec<&str> = shuffled.items().iter().map(|i| i.id.as_str()).collect();
        ids.sort_unstable();
        assert_eq!(ids, ["1", "2", "3", "4"]);
        for (i, item) in shuffled.items().iter().enumerate() {
            assert_eq!(item.arrival, i + 1);
        }
    }
}
