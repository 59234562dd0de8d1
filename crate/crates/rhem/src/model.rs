//! Domain types for actors, attributes, and polyadic event streams.
//!
//! A hyperevent is a time-stamped interaction from one sender to a set of
//! receivers. Streams are ordered by time with ties broken by input order;
//! "the past" of an event is everything with a smaller sequence index.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Dense actor index. Labels are mapped to contiguous indices starting at 0.
pub type ActorId = u32;

/// Bijective label <-> dense index mapping for the actor universe.
#[derive(Debug, Clone, Default)]
pub struct ActorTable {
    labels: Vec<String>,
    index: HashMap<String, ActorId>,
    sealed: bool,
}

impl ActorTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a sealed table from a fixed label list (e.g. an attribute file).
    pub fn from_labels<I: IntoIterator<Item = String>>(labels: I) -> Result<Self> {
        let mut table = Self::new();
        for label in labels {
            if table.index.contains_key(&label) {
                return Err(Error::DuplicateActor {
                    path: String::new(),
                    line: 0,
                    label,
                });
            }
            table.insert(&label);
        }
        table.sealed = true;
        Ok(table)
    }

    /// After sealing, lookups of unknown labels fail instead of extending the
    /// universe.
    pub fn seal(&mut self) {
        self.sealed = true;
    }

    pub fn is_sealed(&self) -> bool {
        self.sealed
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, id: ActorId) -> &str {
        &self.labels[id as usize]
    }

    pub fn get(&self, label: &str) -> Option<ActorId> {
        self.index.get(label).copied()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Index of `label`, inserting it if the table is not sealed.
    pub fn intern(&mut self, label: &str) -> Option<ActorId> {
        if let Some(id) = self.index.get(label) {
            return Some(*id);
        }
        if self.sealed {
            return None;
        }
        Some(self.insert(label))
    }

    fn insert(&mut self, label: &str) -> ActorId {
        let id = self.labels.len() as ActorId;
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), id);
        id
    }

    pub fn ids(&self) -> impl Iterator<Item = ActorId> + '_ {
        0..self.labels.len() as ActorId
    }
}

/// Kind of a declared actor attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttrKind {
    Numeric,
    Categorical,
}

/// Per-actor attribute storage, dense over the actor universe.
#[derive(Debug, Clone)]
pub enum AttrColumn {
    /// Real-valued; binary attributes are stored as 0/1.
    Numeric(Vec<f64>),
    /// Category codes plus the category label list.
    Categorical { codes: Vec<u32>, levels: Vec<String> },
}

impl AttrColumn {
    pub fn kind(&self) -> AttrKind {
        match self {
            AttrColumn::Numeric(_) => AttrKind::Numeric,
            AttrColumn::Categorical { .. } => AttrKind::Categorical,
        }
    }
}

/// Named attribute columns covering every actor (no missing values).
#[derive(Debug, Clone, Default)]
pub struct AttributeTable {
    names: Vec<String>,
    columns: Vec<AttrColumn>,
    by_name: HashMap<String, usize>,
    n_actors: usize,
}

impl AttributeTable {
    /// An attribute-free table over `n_actors` actors.
    pub fn empty(n_actors: usize) -> Self {
        Self {
            names: Vec::new(),
            columns: Vec::new(),
            by_name: HashMap::new(),
            n_actors,
        }
    }

    pub fn n_actors(&self) -> usize {
        self.n_actors
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn push(&mut self, name: &str, column: AttrColumn) -> Result<()> {
        let n = match &column {
            AttrColumn::Numeric(v) => v.len(),
            AttrColumn::Categorical { codes, .. } => codes.len(),
        };
        if n != self.n_actors {
            return Err(Error::DimensionMismatch {
                expected: self.n_actors,
                got: n,
            });
        }
        if self.by_name.contains_key(name) {
            return Err(Error::InvalidConfig(format!("duplicate attribute '{name}'")));
        }
        self.by_name.insert(name.to_string(), self.columns.len());
        self.names.push(name.to_string());
        self.columns.push(column);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&AttrColumn> {
        self.by_name.get(name).map(|&i| &self.columns[i])
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn column(&self, index: usize) -> &AttrColumn {
        &self.columns[index]
    }
}

/// One time-stamped polyadic interaction event.
///
/// Receivers are deduplicated and stored sorted by actor index.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperevent {
    pub time: f64,
    pub sender: ActorId,
    pub receivers: Vec<ActorId>,
    /// 0-based position in the ordered stream.
    pub index: u64,
}

impl Hyperevent {
    pub fn new(time: f64, sender: ActorId, mut receivers: Vec<ActorId>, index: u64) -> Self {
        receivers.sort_unstable();
        receivers.dedup();
        Self {
            time,
            sender,
            receivers,
            index,
        }
    }

    pub fn size(&self) -> usize {
        self.receivers.len()
    }
}

/// How the eligible receiver universe of a sender is formed.
#[derive(Debug, Clone)]
pub enum RiskPolicy {
    /// Every actor except the sender (loops excluded). The default.
    AllExceptSender,
    /// Explicit eligible receiver set per sender. Sets never contain the
    /// sender; senders missing from the map fall back to `AllExceptSender`.
    Explicit(BTreeMap<ActorId, BTreeSet<ActorId>>),
}

impl Default for RiskPolicy {
    fn default() -> Self {
        RiskPolicy::AllExceptSender
    }
}

impl RiskPolicy {
    pub fn explicit(sets: BTreeMap<ActorId, BTreeSet<ActorId>>) -> Result<Self> {
        for (sender, set) in &sets {
            if set.contains(sender) {
                return Err(Error::InvalidConfig(format!(
                    "risk policy: eligible set of sender index {sender} contains the sender"
                )));
            }
        }
        Ok(RiskPolicy::Explicit(sets))
    }

    /// Sorted eligible receiver ids for `sender` in a universe of `n_actors`.
    pub fn eligible(&self, sender: ActorId, n_actors: usize) -> Vec<ActorId> {
        match self {
            RiskPolicy::AllExceptSender => (0..n_actors as ActorId).filter(|&a| a != sender).collect(),
            RiskPolicy::Explicit(map) => match map.get(&sender) {
                Some(set) => set.iter().copied().collect(),
                None => (0..n_actors as ActorId).filter(|&a| a != sender).collect(),
            },
        }
    }
}

/// Ordered sequence of hyperevents over a fixed actor universe.
#[derive(Debug, Clone)]
pub struct EventStream {
    actors: ActorTable,
    events: Vec<Hyperevent>,
    policy: RiskPolicy,
}

impl EventStream {
    /// Validates non-decreasing times and contiguous indices.
    pub fn new(actors: ActorTable, events: Vec<Hyperevent>, policy: RiskPolicy) -> Result<Self> {
        let mut last = f64::NEG_INFINITY;
        for (pos, ev) in events.iter().enumerate() {
            if ev.index != pos as u64 {
                return Err(Error::OutOfOrderEvent {
                    expected: pos as u64,
                    index: ev.index,
                    last_time: last,
                    time: ev.time,
                });
            }
            if ev.time < last {
                return Err(Error::OutOfOrderEvent {
                    expected: pos as u64,
                    index: ev.index,
                    last_time: last,
                    time: ev.time,
                });
            }
            last = ev.time;
        }
        Ok(Self {
            actors,
            events,
            policy,
        })
    }

    pub fn actors(&self) -> &ActorTable {
        &self.actors
    }

    pub fn events(&self) -> &[Hyperevent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn policy(&self) -> &RiskPolicy {
        &self.policy
    }

    pub fn eligible(&self, sender: ActorId) -> Vec<ActorId> {
        self.policy.eligible(sender, self.actors.len())
    }
}

/// Receiver-set size distribution of a stream.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeHistogram {
    /// size -> number of events with that many receivers
    pub counts: BTreeMap<usize, u64>,
    pub events: u64,
    pub mean_size: f64,
}

impl SizeHistogram {
    pub fn count(&self, size: usize) -> u64 {
        self.counts.get(&size).copied().unwrap_or(0)
    }

    /// Events with more than `size` receivers.
    pub fn count_above(&self, size: usize) -> u64 {
        self.counts
            .iter()
            .filter(|(s, _)| **s > size)
            .map(|(_, c)| c)
            .sum()
    }
}

impl fmt::Display for SizeHistogram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|J|:       ")?;
        for size in 1..=10 {
            write!(f, "{:>8}", size)?;
        }
        writeln!(f, "{:>8}", ">10")?;
        write!(f, "frequency: ")?;
        for size in 1..=10 {
            write!(f, "{:>8}", self.count(size))?;
        }
        writeln!(f, "{:>8}", self.count_above(10))?;
        writeln!(f, "events: {}", self.events)?;
        write!(f, "mean receivers: {:.2}", self.mean_size)
    }
}

/// Receiver-set size histogram, event count, and mean receiver count.
pub fn stream_stats(stream: &EventStream) -> Result<SizeHistogram> {
    if stream.is_empty() {
        return Err(Error::EmptyStream);
    }
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    let mut total = 0u64;
    for ev in stream.events() {
        *counts.entry(ev.size()).or_insert(0) += 1;
        total += ev.size() as u64;
    }
    let events = stream.len() as u64;
    Ok(SizeHistogram {
        counts,
        events,
        mean_size: total as f64 / events as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn actors(n: usize) -> ActorTable {
        let mut t = ActorTable::new();
        for i in 0..n {
            t.intern(&format!("a{i}"));
        }
        t
    }

    #[test]
    fn actor_table_bijection() {
        let mut t = ActorTable::new();
        let a = t.intern("A").unwrap();
        let b = t.intern("B").unwrap();
        assert_eq!((a, b), (0, 1));
        assert_eq!(t.intern("A"), Some(0));
        assert_eq!(t.label(1), "B");
        t.seal();
        assert_eq!(t.intern("C"), None);
    }

    #[test]
    fn receivers_sorted_and_deduped() {
        let ev = Hyperevent::new(1.0, 0, vec![3, 1, 3, 2], 0);
        assert_eq!(ev.receivers, vec![1, 2, 3]);
    }

    #[test]
    fn stream_rejects_decreasing_times() {
        let t = actors(3);
        let evs = vec![
            Hyperevent::new(5.0, 0, vec![1], 0),
            Hyperevent::new(4.0, 0, vec![2], 1),
        ];
        assert!(matches!(
            EventStream::new(t, evs, RiskPolicy::AllExceptSender),
            Err(Error::OutOfOrderEvent { .. })
        ));
    }

    #[test]
    fn stream_keeps_tied_times_in_input_order() {
        let t = actors(3);
        let evs = vec![
            Hyperevent::new(10.0, 0, vec![1], 0),
            Hyperevent::new(20.0, 0, vec![2], 1),
            Hyperevent::new(20.0, 1, vec![2], 2),
        ];
        let s = EventStream::new(t, evs, RiskPolicy::AllExceptSender).unwrap();
        assert_eq!(s.events()[1].sender, 0);
        assert_eq!(s.events()[2].sender, 1);
        assert_eq!(
            s.events().iter().map(|e| e.index).collect::<Vec<_>>(),
            vec![0, 1, 2]
        );
    }

    #[test]
    fn eligible_excludes_sender() {
        let t = actors(4);
        let s = EventStream::new(t, vec![], RiskPolicy::AllExceptSender).unwrap();
        assert_eq!(s.eligible(2), vec![0, 1, 3]);
    }

    #[test]
    fn explicit_policy_rejects_self_loop() {
        let mut map = BTreeMap::new();
        map.insert(0u32, BTreeSet::from([0u32, 1]));
        assert!(RiskPolicy::explicit(map).is_err());
    }

    #[test]
    fn stats_single_event() {
        let t = actors(5);
        let evs = vec![Hyperevent::new(1.0, 0, vec![1, 2, 3], 0)];
        let s = EventStream::new(t, evs, RiskPolicy::AllExceptSender).unwrap();
        let h = stream_stats(&s).unwrap();
        assert_eq!(h.counts, BTreeMap::from([(3, 1)]));
        assert_eq!(h.mean_size, 3.0);
    }

    #[test]
    fn stats_mean_of_two() {
        let t = actors(7);
        let evs = vec![
            Hyperevent::new(1.0, 0, vec![1], 0),
            Hyperevent::new(2.0, 0, vec![1, 2, 3, 4, 5], 1),
        ];
        let s = EventStream::new(t, evs, RiskPolicy::AllExceptSender).unwrap();
        let h = stream_stats(&s).unwrap();
        assert_eq!(h.mean_size, 3.0);
        assert_eq!(h.events, 2);
    }

    #[test]
    fn stats_empty_stream_errors() {
        let s = EventStream::new(actors(2), vec![], RiskPolicy::AllExceptSender).unwrap();
        assert!(matches!(stream_stats(&s), Err(Error::EmptyStream)));
    }

    #[test]
    fn histogram_sizes_sum_to_event_count() {
        let t = actors(6);
        let evs = (0..20u64)
            .map(|i| Hyperevent::new(i as f64, 0, vec![1 + (i % 4) as u32], i))
            .collect();
        let s = EventStream::new(t, evs, RiskPolicy::AllExceptSender).unwrap();
        let h = stream_stats(&s).unwrap();
        let sum: u64 = h.counts.values().sum();
        assert_eq!(sum, h.events);
    }
}
