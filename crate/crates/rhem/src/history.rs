//! Decayed degree statistics of an event history.
//!
//! The engine maintains, for the prefix of events already advanced past:
//! hyperedge in-degrees of receiver subsets, sender-specific subset degrees,
//! actor outdegrees, and exact/unordered repetition keys. Every count is a
//! sum of exponentially decayed event weights `w(t - t_m) = 2^-((t-t_m)/T_half)`.
//!
//! Counters are lazy: each stores its value at a reference time and rescales
//! on access, so advancing past an event touches only the keys that event
//! creates. For an event with receiver set J this is all subsets of J up to
//! the tracked order P (twice: plain and sender-specific) plus three scalar
//! keys.

use std::collections::{BTreeSet, HashMap};
use std::io::{Read, Write};

use smallvec::SmallVec;

use crate::comb::for_each_combination;
use crate::error::{Error, Result};
use crate::model::{ActorId, ActorTable, Hyperevent};

/// Values below this are clamped to zero when decayed (far beneath any
/// meaningful weight, avoids subnormals).
const DECAY_FLOOR: f64 = 1e-300;

/// Warn when an event's receiver set implies a very large subset update.
const LARGE_EVENT_WARN: usize = 30;

/// Canonically sorted actor subset used as a store key. Inline up to 4 ids,
/// which covers the default maximum tracked order.
pub type SubsetKey = SmallVec<[ActorId; 4]>;

pub fn subset_key(ids: &[ActorId]) -> SubsetKey {
    let mut key: SubsetKey = SmallVec::from_slice(ids);
    key.sort_unstable();
    key.dedup();
    key
}

/// Exponential decay with a given half-life, in event-time units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayConfig {
    half_life: f64,
    rate: f64,
}

impl DecayConfig {
    pub fn from_half_life(half_life: f64) -> Result<Self> {
        if !(half_life > 0.0) || !half_life.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "half-life must be a positive finite number, got {half_life}"
            )));
        }
        Ok(Self {
            half_life,
            rate: std::f64::consts::LN_2 / half_life,
        })
    }

    pub fn half_life(&self) -> f64 {
        self.half_life
    }

    /// ln 2 / half-life.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Weight of an event `elapsed` time units in the past.
    pub fn weight(&self, elapsed: f64) -> f64 {
        let w = (-elapsed * self.rate).exp();
        if w < DECAY_FLOOR {
            0.0
        } else {
            w
        }
    }
}

/// A nonnegative decayed sum, stored as (value at reference time, reference time).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayedCounter {
    value: f64,
    ref_time: f64,
}

impl DecayedCounter {
    fn new(value: f64, ref_time: f64) -> Self {
        Self { value, ref_time }
    }

    /// Value at `t >= ref_time`.
    pub fn value_at(&self, t: f64, decay: &DecayConfig) -> f64 {
        if t == self.ref_time {
            return self.value;
        }
        let v = self.value * decay.weight(t - self.ref_time);
        if v < DECAY_FLOOR {
            0.0
        } else {
            v
        }
    }

    fn add_at(&mut self, t: f64, amount: f64, decay: &DecayConfig) {
        self.value = self.value_at(t, decay) + amount;
        self.ref_time = t;
    }
}

/// Decayed degree stores over the advanced event prefix.
#[derive(Debug, Clone)]
pub struct HistoryState {
    decay: DecayConfig,
    max_order: usize,
    position: u64,
    last_time: f64,
    /// hyperedge in-degree: subsets J' (|J'| <= P) jointly received
    in_deg: HashMap<SubsetKey, DecayedCounter>,
    /// sender-specific hyperedge degree: (i, J') with J' jointly received from i
    send_deg: HashMap<(ActorId, SubsetKey), DecayedCounter>,
    /// outdegree per sender
    out_deg: HashMap<ActorId, DecayedCounter>,
    /// exact repetition: (sender, full receiver set)
    exact: HashMap<(ActorId, SubsetKey), DecayedCounter>,
    /// unordered repetition: {sender} union receivers
    unordered: HashMap<SubsetKey, DecayedCounter>,
    /// dyadic adjacency, for iterating third actors: i -> receivers i has sent to
    out_adj: HashMap<ActorId, BTreeSet<ActorId>>,
    /// j -> senders that have sent to j
    in_adj: HashMap<ActorId, BTreeSet<ActorId>>,
}

impl HistoryState {
    pub fn new(decay: DecayConfig, max_order: usize) -> Result<Self> {
        if max_order == 0 {
            return Err(Error::InvalidConfig(
                "maximum tracked subset order must be at least 1".into(),
            ));
        }
        Ok(Self {
            decay,
            max_order,
            position: 0,
            last_time: f64::NEG_INFINITY,
            in_deg: HashMap::new(),
            send_deg: HashMap::new(),
            out_deg: HashMap::new(),
            exact: HashMap::new(),
            unordered: HashMap::new(),
            out_adj: HashMap::new(),
            in_adj: HashMap::new(),
        })
    }

    pub fn decay(&self) -> &DecayConfig {
        &self.decay
    }

    /// Maximum tracked subset order P.
    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Sequence index of the next event expected by `advance`.
    pub fn position(&self) -> u64 {
        self.position
    }

    /// Time of the last advanced event (-inf before the first).
    pub fn last_time(&self) -> f64 {
        self.last_time
    }

    /// Folds one event into the history. Events must arrive in sequence
    /// order with non-decreasing times.
    pub fn advance(&mut self, event: &Hyperevent) -> Result<()> {
        if event.index != self.position || (self.position > 0 && event.time < self.last_time) {
            return Err(Error::OutOfOrderEvent {
                expected: self.position,
                index: event.index,
                last_time: self.last_time,
                time: event.time,
            });
        }
        let t = event.time;
        let receivers = &event.receivers;
        if receivers.len() > LARGE_EVENT_WARN {
            log::warn!(
                "event {} has {} receivers; updating all subsets up to order {} touches many keys",
                event.index,
                receivers.len(),
                self.max_order.min(receivers.len())
            );
        }

        for p in 1..=self.max_order.min(receivers.len()) {
            for_each_combination(receivers, p, |subset| {
                let key: SubsetKey = SmallVec::from_slice(subset);
                self.in_deg
                    .entry(key.clone())
                    .or_insert_with(|| DecayedCounter::new(0.0, t))
                    .add_at(t, 1.0, &self.decay);
                self.send_deg
                    .entry((event.sender, key))
                    .or_insert_with(|| DecayedCounter::new(0.0, t))
                    .add_at(t, 1.0, &self.decay);
            });
        }
        for &j in receivers {
            self.out_adj.entry(event.sender).or_default().insert(j);
            self.in_adj.entry(j).or_default().insert(event.sender);
        }

        self.out_deg
            .entry(event.sender)
            .or_insert_with(|| DecayedCounter::new(0.0, t))
            .add_at(t, 1.0, &self.decay);

        let full: SubsetKey = SmallVec::from_slice(receivers);
        self.exact
            .entry((event.sender, full))
            .or_insert_with(|| DecayedCounter::new(0.0, t))
            .add_at(t, 1.0, &self.decay);

        let mut union: SubsetKey = SmallVec::from_slice(receivers);
        union.push(event.sender);
        union.sort_unstable();
        self.unordered
            .entry(union)
            .or_insert_with(|| DecayedCounter::new(0.0, t))
            .add_at(t, 1.0, &self.decay);

        self.position += 1;
        self.last_time = t;
        Ok(())
    }

    /// Decayed count of past events jointly received by every member of `subset`.
    pub fn hy_deg_in(&self, subset: &[ActorId], t: f64) -> Result<f64> {
        if subset.len() > self.max_order {
            return Err(Error::OrderExceeded {
                order: subset.len(),
                max_order: self.max_order,
            });
        }
        let key = subset_key(subset);
        Ok(self.value_of(self.in_deg.get(&key), t))
    }

    /// Decayed count of past events sent by `sender` and jointly received by
    /// every member of `subset`.
    pub fn hy_deg(&self, sender: ActorId, subset: &[ActorId], t: f64) -> Result<f64> {
        if subset.len() > self.max_order {
            return Err(Error::OrderExceeded {
                order: subset.len(),
                max_order: self.max_order,
            });
        }
        let key = subset_key(subset);
        Ok(self.value_of(self.send_deg.get(&(sender, key)), t))
    }

    /// Decayed count of past events sent by `actor`.
    pub fn deg_out(&self, actor: ActorId, t: f64) -> f64 {
        self.value_of(self.out_deg.get(&actor), t)
    }

    /// Decayed count of past events with exactly this sender and receiver set.
    pub fn exact_repetition(&self, sender: ActorId, receivers: &[ActorId], t: f64) -> f64 {
        let key = subset_key(receivers);
        self.value_of(self.exact.get(&(sender, key)), t)
    }

    /// Decayed count of past events whose sender-receiver union equals
    /// {sender} union receivers.
    pub fn unordered_repetition(&self, sender: ActorId, receivers: &[ActorId], t: f64) -> f64 {
        let mut key = subset_key(receivers);
        match key.binary_search(&sender) {
            Ok(_) => {}
            Err(pos) => key.insert(pos, sender),
        }
        self.value_of(self.unordered.get(&key), t)
    }

    /// Receivers that `sender` has sent to in the past (dyadic out-neighbours).
    pub fn sent_to(&self, sender: ActorId) -> Option<&BTreeSet<ActorId>> {
        self.out_adj.get(&sender)
    }

    /// Senders that have sent to `receiver` in the past.
    pub fn received_from(&self, receiver: ActorId) -> Option<&BTreeSet<ActorId>> {
        self.in_adj.get(&receiver)
    }

    /// Dyadic decayed count of past events from `i` reaching `j`
    /// (the order-1 sender-specific degree, without key construction cost).
    pub fn dyad(&self, i: ActorId, j: ActorId, t: f64) -> f64 {
        let key: SubsetKey = SmallVec::from_slice(&[j]);
        self.value_of(self.send_deg.get(&(i, key)), t)
    }

    /// Whether any receiver subset containing `j` has in-degree history.
    pub fn has_in_history(&self, j: ActorId) -> bool {
        self.in_adj.contains_key(&j)
    }

    fn value_of(&self, counter: Option<&DecayedCounter>, t: f64) -> f64 {
        counter.map_or(0.0, |c| c.value_at(t, &self.decay))
    }

    /// Immutable copy of the current state; queries on the snapshot are
    /// unaffected by later `advance` calls on the original.
    pub fn snapshot(&self) -> HistoryState {
        self.clone()
    }

    /// Number of stored counters, per store: (in_deg, send_deg, out_deg, exact, unordered).
    pub fn store_sizes(&self) -> (usize, usize, usize, usize, usize) {
        (
            self.in_deg.len(),
            self.send_deg.len(),
            self.out_deg.len(),
            self.exact.len(),
            self.unordered.len(),
        )
    }

    // ---- binary state dump ------------------------------------------------

    const MAGIC: &'static [u8; 8] = b"RHEMHST\x01";

    /// Writes a versioned binary dump: sorted key lists with
    /// (value, ref_time) pairs as little-endian 64-bit floats.
    pub fn save<W: Write>(&self, actors: &ActorTable, mut w: W) -> std::io::Result<()> {
        w.write_all(Self::MAGIC)?;
        write_f64(&mut w, self.decay.half_life)?;
        write_u64(&mut w, self.max_order as u64)?;
        write_u64(&mut w, self.position)?;
        write_f64(&mut w, self.last_time)?;

        write_u64(&mut w, actors.len() as u64)?;
        for label in actors.labels() {
            write_u64(&mut w, label.len() as u64)?;
            w.write_all(label.as_bytes())?;
        }

        let mut in_deg: Vec<_> = self.in_deg.iter().collect();
        in_deg.sort_by(|a, b| a.0.cmp(b.0));
        write_u64(&mut w, in_deg.len() as u64)?;
        for (key, c) in in_deg {
            write_key(&mut w, key)?;
            write_counter(&mut w, c)?;
        }

        let mut send_deg: Vec<_> = self.send_deg.iter().collect();
        send_deg.sort_by(|a, b| a.0.cmp(b.0));
        write_u64(&mut w, send_deg.len() as u64)?;
        for ((sender, key), c) in send_deg {
            write_u64(&mut w, *sender as u64)?;
            write_key(&mut w, key)?;
            write_counter(&mut w, c)?;
        }

        let mut out_deg: Vec<_> = self.out_deg.iter().collect();
        out_deg.sort_by_key(|(a, _)| **a);
        write_u64(&mut w, out_deg.len() as u64)?;
        for (actor, c) in out_deg {
            write_u64(&mut w, *actor as u64)?;
            write_counter(&mut w, c)?;
        }

        let mut exact: Vec<_> = self.exact.iter().collect();
        exact.sort_by(|a, b| a.0.cmp(b.0));
        write_u64(&mut w, exact.len() as u64)?;
        for ((sender, key), c) in exact {
            write_u64(&mut w, *sender as u64)?;
            write_key(&mut w, key)?;
            write_counter(&mut w, c)?;
        }

        let mut unordered: Vec<_> = self.unordered.iter().collect();
        unordered.sort_by(|a, b| a.0.cmp(b.0));
        write_u64(&mut w, unordered.len() as u64)?;
        for (key, c) in unordered {
            write_key(&mut w, key)?;
            write_counter(&mut w, c)?;
        }
        Ok(())
    }

    /// Loads a dump written by [`HistoryState::save`]. The actor labels in
    /// the dump must match `actors` exactly.
    pub fn load<R: Read>(actors: &ActorTable, mut r: R, path: &str) -> Result<HistoryState> {
        let bad = |msg: &str| Error::BadStateFile {
            path: path.to_string(),
            msg: msg.to_string(),
        };
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(|_| bad("truncated header"))?;
        if &magic != Self::MAGIC {
            return Err(bad("bad magic or unsupported version"));
        }
        let half_life = read_f64(&mut r).map_err(|_| bad("truncated"))?;
        let decay = DecayConfig::from_half_life(half_life)?;
        let max_order = read_u64(&mut r).map_err(|_| bad("truncated"))? as usize;
        let position = read_u64(&mut r).map_err(|_| bad("truncated"))?;
        let last_time = read_f64(&mut r).map_err(|_| bad("truncated"))?;

        let n_actors = read_u64(&mut r).map_err(|_| bad("truncated"))? as usize;
        if n_actors != actors.len() {
            return Err(bad(&format!(
                "actor universe mismatch: dump has {n_actors}, current table has {}",
                actors.len()
            )));
        }
        for id in 0..n_actors {
            let len = read_u64(&mut r).map_err(|_| bad("truncated"))? as usize;
            let mut buf = vec![0u8; len];
            r.read_exact(&mut buf).map_err(|_| bad("truncated"))?;
            let label = String::from_utf8(buf).map_err(|_| bad("non-utf8 actor label"))?;
            if actors.label(id as ActorId) != label {
                return Err(bad(&format!(
                    "actor universe mismatch at index {id}: dump '{label}', current '{}'",
                    actors.label(id as ActorId)
                )));
            }
        }

        let mut state = HistoryState::new(decay, max_order)?;
        state.position = position;
        state.last_time = last_time;

        let n = read_u64(&mut r).map_err(|_| bad("truncated"))?;
        for _ in 0..n {
            let key = read_key(&mut r).map_err(|_| bad("truncated"))?;
            let c = read_counter(&mut r).map_err(|_| bad("truncated"))?;
            state.in_deg.insert(key, c);
        }
        let n = read_u64(&mut r).map_err(|_| bad("truncated"))?;
        for _ in 0..n {
            let sender = read_u64(&mut r).map_err(|_| bad("truncated"))? as ActorId;
            let key = read_key(&mut r).map_err(|_| bad("truncated"))?;
            let c = read_counter(&mut r).map_err(|_| bad("truncated"))?;
            if key.len() == 1 {
                state.out_adj.entry(sender).or_default().insert(key[0]);
                state.in_adj.entry(key[0]).or_default().insert(sender);
            }
            state.send_deg.insert((sender, key), c);
        }
        let n = read_u64(&mut r).map_err(|_| bad("truncated"))?;
        for _ in 0..n {
            let actor = read_u64(&mut r).map_err(|_| bad("truncated"))? as ActorId;
            let c = read_counter(&mut r).map_err(|_| bad("truncated"))?;
            state.out_deg.insert(actor, c);
        }
        let n = read_u64(&mut r).map_err(|_| bad("truncated"))?;
        for _ in 0..n {
            let sender = read_u64(&mut r).map_err(|_| bad("truncated"))? as ActorId;
            let key = read_key(&mut r).map_err(|_| bad("truncated"))?;
            let c = read_counter(&mut r).map_err(|_| bad("truncated"))?;
            state.exact.insert((sender, key), c);
        }
        let n = read_u64(&mut r).map_err(|_| bad("truncated"))?;
        for _ in 0..n {
            let key = read_key(&mut r).map_err(|_| bad("truncated"))?;
            let c = read_counter(&mut r).map_err(|_| bad("truncated"))?;
            state.unordered.insert(key, c);
        }
        Ok(state)
    }
}

fn write_u64<W: Write>(w: &mut W, v: u64) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn write_f64<W: Write>(w: &mut W, v: f64) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn write_key<W: Write>(w: &mut W, key: &SubsetKey) -> std::io::Result<()> {
    write_u64(w, key.len() as u64)?;
    for &id in key {
        w.write_all(&id.to_le_bytes())?;
    }
    Ok(())
}

fn write_counter<W: Write>(w: &mut W, c: &DecayedCounter) -> std::io::Result<()> {
    write_f64(w, c.value)?;
    write_f64(w, c.ref_time)
}

fn read_u64<R: Read>(r: &mut R) -> std::io::Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64<R: Read>(r: &mut R) -> std::io::Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

fn read_key<R: Read>(r: &mut R) -> std::io::Result<SubsetKey> {
    let len = read_u64(r)? as usize;
    let mut key = SubsetKey::new();
    for _ in 0..len {
        let mut buf = [0u8; 4];
        r.read_exact(&mut buf)?;
        key.push(ActorId::from_le_bytes(buf));
    }
    Ok(key)
}

fn read_counter<R: Read>(r: &mut R) -> std::io::Result<DecayedCounter> {
    let value = read_f64(r)?;
    let ref_time = read_f64(r)?;
    Ok(DecayedCounter { value, ref_time })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comb::binomial_saturating;

    fn decay(hl: f64) -> DecayConfig {
        DecayConfig::from_half_life(hl).unwrap()
    }

    fn ev(time: f64, sender: ActorId, receivers: &[ActorId], index: u64) -> Hyperevent {
        Hyperevent::new(time, sender, receivers.to_vec(), index)
    }

    #[test]
    fn weight_at_zero_and_half_life() {
        let d = decay(7.0);
        assert_eq!(d.weight(0.0), 1.0);
        assert!((d.weight(7.0) - 0.5).abs() < 1e-15);
        assert!((d.weight(14.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn first_event_populates_all_subsets() {
        // receivers {B,C,D,E} = ids 1..=4, P=2: 4 singletons + 6 pairs
        let mut h = HistoryState::new(decay(1.0), 2).unwrap();
        h.advance(&ev(5.0, 0, &[1, 2, 3, 4], 0)).unwrap();
        let (in_deg, send_deg, out_deg, exact, unordered) = h.store_sizes();
        let expect = (binomial_saturating(4, 1) + binomial_saturating(4, 2)) as usize;
        assert_eq!(in_deg, expect);
        assert_eq!(send_deg, expect);
        assert_eq!(out_deg, 1);
        assert_eq!(exact, 1);
        assert_eq!(unordered, 1);
        for key in [&[1u32, 2][..], &[3, 4], &[2]] {
            assert_eq!(h.hy_deg_in(key, 5.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn half_life_halves_counts() {
        let mut h = HistoryState::new(decay(10.0), 2).unwrap();
        h.advance(&ev(0.0, 0, &[1, 2], 0)).unwrap();
        assert!((h.hy_deg_in(&[1, 2], 10.0).unwrap() - 0.5).abs() < 1e-12);
        assert!((h.hy_deg_in(&[1], 20.0).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn repeated_subset_sums_weights() {
        let d = decay(3.0);
        let mut h = HistoryState::new(d, 2).unwrap();
        h.advance(&ev(0.0, 0, &[1, 2, 3], 0)).unwrap();
        h.advance(&ev(2.0, 4, &[1, 2], 1)).unwrap();
        let t = 5.0;
        let expect = d.weight(5.0) + d.weight(3.0);
        assert!((h.hy_deg_in(&[1, 2], t).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn sender_specific_requires_sender_match() {
        let mut h = HistoryState::new(decay(1e12), 2).unwrap();
        h.advance(&ev(1.0, 0, &[2, 3, 4, 5], 0)).unwrap();
        assert!((h.hy_deg(0, &[2, 3], 2.0).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(h.hy_deg(6, &[2, 3], 2.0).unwrap(), 0.0);
    }

    #[test]
    fn outdegree_counts_sends_only() {
        let mut h = HistoryState::new(decay(1e12), 1).unwrap();
        h.advance(&ev(1.0, 0, &[3, 4, 5], 0)).unwrap();
        h.advance(&ev(2.0, 1, &[0, 2], 1)).unwrap();
        assert!((h.deg_out(1, 3.0) - 1.0).abs() < 1e-9);
        assert_eq!(h.deg_out(3, 3.0), 0.0);
        assert_eq!(h.deg_out(99, 3.0), 0.0);
    }

    #[test]
    fn geometric_series_of_same_sender() {
        let d = decay(2.0);
        let mut h = HistoryState::new(d, 1).unwrap();
        for m in 0..5u64 {
            h.advance(&ev(m as f64, 7, &[1], m)).unwrap();
        }
        // at t=4: weights 2^0 + 2^-1/2... = sum over gaps 0,1,2,3,4 of 2^(-gap/2)
        let expect: f64 = (0..5).map(|g| 0.5f64.powf(g as f64 / 2.0)).sum();
        assert!((h.deg_out(7, 4.0) - expect).abs() < 1e-12);
    }

    #[test]
    fn order_exceeded() {
        let h = HistoryState::new(decay(1.0), 2).unwrap();
        assert!(matches!(
            h.hy_deg_in(&[1, 2, 3], 0.0),
            Err(Error::OrderExceeded { .. })
        ));
    }

    #[test]
    fn rejects_out_of_order_events() {
        let mut h = HistoryState::new(decay(1.0), 2).unwrap();
        h.advance(&ev(5.0, 0, &[1], 0)).unwrap();
        assert!(h.advance(&ev(4.0, 0, &[1], 1)).is_err());
        assert!(h.advance(&ev(6.0, 0, &[1], 5)).is_err());
    }

    #[test]
    fn tied_times_count_with_full_weight() {
        let mut h = HistoryState::new(decay(1.0), 1).unwrap();
        h.advance(&ev(3.0, 0, &[1], 0)).unwrap();
        h.advance(&ev(3.0, 0, &[1], 1)).unwrap();
        assert!((h.hy_deg_in(&[1], 3.0).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn snapshot_is_immutable() {
        let mut h = HistoryState::new(decay(1.0), 2).unwrap();
        h.advance(&ev(0.0, 0, &[1, 2], 0)).unwrap();
        let snap = h.snapshot();
        h.advance(&ev(1.0, 0, &[1, 2], 1)).unwrap();
        assert!((snap.hy_deg_in(&[1, 2], 1.0).unwrap() - 0.5).abs() < 1e-12);
        assert!(h.hy_deg_in(&[1, 2], 1.0).unwrap() > 1.0);
    }

    #[test]
    fn unknown_keys_are_zero() {
        let h = HistoryState::new(decay(1.0), 3).unwrap();
        assert_eq!(h.hy_deg_in(&[1, 2], 0.0).unwrap(), 0.0);
        assert_eq!(h.exact_repetition(0, &[1], 0.0), 0.0);
        assert_eq!(h.unordered_repetition(0, &[1], 0.0), 0.0);
    }

    #[test]
    fn unordered_key_includes_sender() {
        let mut h = HistoryState::new(decay(1e12), 2).unwrap();
        h.advance(&ev(0.0, 0, &[1, 2, 3, 4], 0)).unwrap();
        // same union, different sender
        assert!((h.unordered_repetition(2, &[0, 1, 3, 4], 1.0) - 1.0).abs() < 1e-9);
        // different union
        assert_eq!(h.unordered_repetition(2, &[0, 1, 3], 1.0), 0.0);
        // exact repeat keeps the union
        assert!((h.unordered_repetition(0, &[1, 2, 3, 4], 1.0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn exact_repetition_distinguishes_sender() {
        let mut h = HistoryState::new(decay(1e12), 2).unwrap();
        h.advance(&ev(0.0, 0, &[1, 2, 3, 4], 0)).unwrap();
        assert!((h.exact_repetition(0, &[1, 2, 3, 4], 1.0) - 1.0).abs() < 1e-9);
        assert_eq!(h.exact_repetition(2, &[0, 1, 3, 4], 1.0), 0.0);
    }

    #[test]
    fn monotone_nesting_of_subsets() {
        let mut h = HistoryState::new(decay(5.0), 3).unwrap();
        h.advance(&ev(0.0, 0, &[1, 2, 3], 0)).unwrap();
        h.advance(&ev(1.0, 4, &[1, 2], 1)).unwrap();
        let t = 2.0;
        let sub = h.hy_deg_in(&[1, 2], t).unwrap();
        let sup = h.hy_deg_in(&[1, 2, 3], t).unwrap();
        assert!(sub >= sup);
    }

    #[test]
    fn save_load_roundtrip() {
        let mut actors = ActorTable::new();
        for l in ["A", "B", "C", "D"] {
            actors.intern(l);
        }
        let mut h = HistoryState::new(decay(3.0), 2).unwrap();
        h.advance(&ev(0.0, 0, &[1, 2], 0)).unwrap();
        h.advance(&ev(1.5, 1, &[0, 2, 3], 1)).unwrap();

        let mut buf = Vec::new();
        h.save(&actors, &mut buf).unwrap();
        let loaded = HistoryState::load(&actors, buf.as_slice(), "mem").unwrap();

        assert_eq!(loaded.position(), h.position());
        assert_eq!(loaded.last_time(), h.last_time());
        let t = 4.0;
        assert_eq!(
            loaded.hy_deg_in(&[0, 2], t).unwrap(),
            h.hy_deg_in(&[0, 2], t).unwrap()
        );
        assert_eq!(loaded.deg_out(1, t), h.deg_out(1, t));
        assert_eq!(
            loaded.exact_repetition(1, &[0, 2, 3], t),
            h.exact_repetition(1, &[0, 2, 3], t)
        );
        assert_eq!(loaded.sent_to(1), h.sent_to(1));

        // mismatched universe is rejected
        let mut other = ActorTable::new();
        other.intern("X");
        assert!(HistoryState::load(&other, buf.as_slice(), "mem").is_err());
    }
}
