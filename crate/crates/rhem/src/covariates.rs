//! Hyperedge covariates: attribute-based and history-based functions of a
//! candidate (sender, receiver set) pair.
//!
//! History-based covariates are averages of decayed degree statistics;
//! attribute covariates are receiver-set means and heterophily measures.
//! All of them are invariant to the input order of the receiver set.

use std::fmt;
use std::str::FromStr;

use crate::comb::{binomial_saturating, for_each_combination};
use crate::error::{Error, Result};
use crate::history::HistoryState;
use crate::model::{ActorId, AttrColumn, AttributeTable};

/// Which covariate to compute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CovariateKind {
    /// Mean attribute value over the receiver set.
    RecAvg { attribute: String },
    /// Mean absolute sender-receiver attribute difference (numeric) or
    /// mismatch fraction (categorical).
    SendRecDiff { attribute: String },
    /// Mean pairwise attribute difference within the receiver set; 0 for a
    /// singleton set.
    RecSetDiff { attribute: String },
    /// Decayed count of past events with the same sender and receiver set.
    ExactRepetition,
    /// Decayed count of past events with the same sender-receiver union.
    UnorderedRepetition,
    /// Mean hyperedge in-degree over size-p receiver subsets.
    RecSubRep { order: usize },
    /// Mean sender-specific hyperedge degree over size-p receiver subsets.
    SendRecSubRep { order: usize },
    /// Receivers jointly addressed together with a past sender among them.
    InteractRec { order: usize },
    /// Mean decayed count of past events from the receivers to the sender.
    Reciprocation,
    /// Mean outdegree of the receivers.
    OutInPop,
    TransitiveClosure,
    CyclicClosure,
    InBalance,
    OutBalance,
}

impl CovariateKind {
    pub fn is_history_based(&self) -> bool {
        !matches!(
            self,
            CovariateKind::RecAvg { .. }
                | CovariateKind::SendRecDiff { .. }
                | CovariateKind::RecSetDiff { .. }
        )
    }

    fn tag(&self) -> &'static str {
        match self {
            CovariateKind::RecAvg { .. } => "rec_avg",
            CovariateKind::SendRecDiff { .. } => "send_rec_diff",
            CovariateKind::RecSetDiff { .. } => "rec_set_diff",
            CovariateKind::ExactRepetition => "exact_repetition",
            CovariateKind::UnorderedRepetition => "unordered_repetition",
            CovariateKind::RecSubRep { .. } => "rec_sub_rep",
            CovariateKind::SendRecSubRep { .. } => "send_rec_sub_rep",
            CovariateKind::InteractRec { .. } => "interact_rec",
            CovariateKind::Reciprocation => "reciprocation",
            CovariateKind::OutInPop => "out_in_pop",
            CovariateKind::TransitiveClosure => "transitive_closure",
            CovariateKind::CyclicClosure => "cyclic_closure",
            CovariateKind::InBalance => "in_balance",
            CovariateKind::OutBalance => "out_balance",
        }
    }
}

/// One covariate specification: a kind plus an optional square-root
/// transform (history-based kinds only).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CovariateSpec {
    pub kind: CovariateKind,
    pub sqrt: bool,
}

impl CovariateSpec {
    pub fn new(kind: CovariateKind) -> Self {
        Self { kind, sqrt: false }
    }

    pub fn with_sqrt(kind: CovariateKind) -> Result<Self> {
        if !kind.is_history_based() {
            return Err(Error::InvalidSpec {
                spec: kind.tag().to_string(),
                msg: "the square-root transform applies to history-based covariates only".into(),
            });
        }
        Ok(Self { kind, sqrt: true })
    }

    /// Column name used in output tables, e.g. `rec_avg_female`,
    /// `rec_sub_rep_2`. The transform flag is not part of the name.
    pub fn name(&self) -> String {
        match &self.kind {
            CovariateKind::RecAvg { attribute }
            | CovariateKind::SendRecDiff { attribute }
            | CovariateKind::RecSetDiff { attribute } => {
                format!("{}_{}", self.kind.tag(), attribute)
            }
            CovariateKind::RecSubRep { order }
            | CovariateKind::SendRecSubRep { order }
            | CovariateKind::InteractRec { order } => format!("{}_{}", self.kind.tag(), order),
            _ => self.kind.tag().to_string(),
        }
    }
}

impl fmt::Display for CovariateSpec {
    /// Canonical spec-file form: `kind[:attribute][:p][,sqrt]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            CovariateKind::RecAvg { attribute }
            | CovariateKind::SendRecDiff { attribute }
            | CovariateKind::RecSetDiff { attribute } => {
                write!(f, "{}:{}", self.kind.tag(), attribute)?
            }
            CovariateKind::RecSubRep { order }
            | CovariateKind::SendRecSubRep { order }
            | CovariateKind::InteractRec { order } => write!(f, "{}:{}", self.kind.tag(), order)?,
            _ => write!(f, "{}", self.kind.tag())?,
        }
        if self.sqrt {
            write!(f, ",sqrt")?;
        }
        Ok(())
    }
}

impl FromStr for CovariateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidSpec {
            spec: s.to_string(),
            msg: msg.to_string(),
        };
        let s_trim = s.trim();
        let (head, sqrt) = match s_trim.split_once(',') {
            Some((head, modifier)) => {
                if modifier.trim() != "sqrt" {
                    return Err(bad("unknown modifier (expected 'sqrt')"));
                }
                (head.trim(), true)
            }
            None => (s_trim, false),
        };
        let mut parts = head.split(':');
        let tag = parts.next().unwrap_or("");
        let arg = parts.next().map(str::trim);
        if parts.next().is_some() {
            return Err(bad("too many ':' separators"));
        }
        let need_attr = || arg.map(str::to_string).ok_or_else(|| bad("missing attribute name"));
        let need_order = || -> Result<usize> {
            let raw = arg.ok_or_else(|| bad("missing subset order"))?;
            let p: usize = raw.parse().map_err(|_| bad("subset order must be a positive integer"))?;
            if p == 0 {
                return Err(bad("subset order must be a positive integer"));
            }
            Ok(p)
        };
        let no_arg = |kind: CovariateKind| -> Result<CovariateKind> {
            if arg.is_some() {
                Err(bad("this kind takes no ':' argument"))
            } else {
                Ok(kind)
            }
        };
        let kind = match tag {
            "rec_avg" => CovariateKind::RecAvg { attribute: need_attr()? },
            "send_rec_diff" => CovariateKind::SendRecDiff { attribute: need_attr()? },
            "rec_set_diff" => CovariateKind::RecSetDiff { attribute: need_attr()? },
            "exact_repetition" => no_arg(CovariateKind::ExactRepetition)?,
            "unordered_repetition" => no_arg(CovariateKind::UnorderedRepetition)?,
            "rec_sub_rep" => CovariateKind::RecSubRep { order: need_order()? },
            "send_rec_sub_rep" => CovariateKind::SendRecSubRep { order: need_order()? },
            "interact_rec" => CovariateKind::InteractRec { order: need_order()? },
            "reciprocation" => no_arg(CovariateKind::Reciprocation)?,
            "out_in_pop" => no_arg(CovariateKind::OutInPop)?,
            "transitive_closure" => no_arg(CovariateKind::TransitiveClosure)?,
            "cyclic_closure" => no_arg(CovariateKind::CyclicClosure)?,
            "in_balance" => no_arg(CovariateKind::InBalance)?,
            "out_balance" => no_arg(CovariateKind::OutBalance)?,
            other => return Err(bad(&format!("unknown covariate kind '{other}'"))),
        };
        if sqrt {
            CovariateSpec::with_sqrt(kind)
        } else {
            Ok(CovariateSpec::new(kind))
        }
    }
}

/// Values aligned with a [`CovariateSet`] spec list.
pub type CovariateVector = Vec<f64>;

/// A validated, attribute-resolved list of covariate specs ready for
/// evaluation against a history snapshot.
#[derive(Debug, Clone)]
pub struct CovariateSet {
    specs: Vec<CovariateSpec>,
    compiled: Vec<Compiled>,
    names: Vec<String>,
}

#[derive(Debug, Clone)]
enum Compiled {
    RecAvg(usize),
    SendRecDiff(usize),
    RecSetDiff(usize),
    ExactRepetition,
    UnorderedRepetition,
    RecSubRep(usize),
    SendRecSubRep(usize),
    InteractRec(usize),
    Reciprocation,
    OutInPop,
    Triadic(TriadicKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TriadicKind {
    Transitive,
    Cyclic,
    InBalance,
    OutBalance,
}

impl CovariateSet {
    /// Resolves attribute names against `attrs` and checks subset orders
    /// against the tracked maximum `max_order`.
    pub fn compile(
        specs: Vec<CovariateSpec>,
        attrs: &AttributeTable,
        max_order: usize,
    ) -> Result<Self> {
        let mut compiled = Vec::with_capacity(specs.len());
        for spec in &specs {
            let resolve = |name: &str| {
                attrs
                    .column_index(name)
                    .ok_or_else(|| Error::UnknownAttribute { name: name.to_string() })
            };
            let check_order = |p: usize| {
                if p > max_order {
                    Err(Error::OrderExceeded { order: p, max_order })
                } else {
                    Ok(p)
                }
            };
            let c = match &spec.kind {
                CovariateKind::RecAvg { attribute } => {
                    let idx = resolve(attribute)?;
                    if attrs.column(idx).kind() != crate::model::AttrKind::Numeric {
                        return Err(Error::InvalidSpec {
                            spec: spec.to_string(),
                            msg: "rec_avg requires a numeric attribute".into(),
                        });
                    }
                    Compiled::RecAvg(idx)
                }
                CovariateKind::SendRecDiff { attribute } => Compiled::SendRecDiff(resolve(attribute)?),
                CovariateKind::RecSetDiff { attribute } => Compiled::RecSetDiff(resolve(attribute)?),
                CovariateKind::ExactRepetition => Compiled::ExactRepetition,
                CovariateKind::UnorderedRepetition => Compiled::UnorderedRepetition,
                CovariateKind::RecSubRep { order } => Compiled::RecSubRep(check_order(*order)?),
                CovariateKind::SendRecSubRep { order } => Compiled::SendRecSubRep(check_order(*order)?),
                CovariateKind::InteractRec { order } => Compiled::InteractRec(check_order(*order)?),
                CovariateKind::Reciprocation => Compiled::Reciprocation,
                CovariateKind::OutInPop => Compiled::OutInPop,
                CovariateKind::TransitiveClosure => Compiled::Triadic(TriadicKind::Transitive),
                CovariateKind::CyclicClosure => Compiled::Triadic(TriadicKind::Cyclic),
                CovariateKind::InBalance => Compiled::Triadic(TriadicKind::InBalance),
                CovariateKind::OutBalance => Compiled::Triadic(TriadicKind::OutBalance),
            };
            compiled.push(c);
        }
        let names = specs.iter().map(|s| s.name()).collect();
        Ok(Self { specs, compiled, names })
    }

    pub fn specs(&self) -> &[CovariateSpec] {
        &self.specs
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    /// Evaluates every covariate for the candidate hyperedge
    /// (`sender`, `receivers`) at time `t`. `receivers` must be sorted,
    /// deduplicated, and nonempty.
    pub fn evaluate(
        &self,
        sender: ActorId,
        receivers: &[ActorId],
        t: f64,
        attrs: &AttributeTable,
        hist: &HistoryState,
        out: &mut [f64],
    ) -> Result<()> {
        if out.len() != self.compiled.len() {
            return Err(Error::DimensionMismatch {
                expected: self.compiled.len(),
                got: out.len(),
            });
        }
        for (slot, (c, spec)) in out.iter_mut().zip(self.compiled.iter().zip(&self.specs)) {
            let v = match c {
                Compiled::RecAvg(idx) => rec_avg_column(attrs.column(*idx), receivers),
                Compiled::SendRecDiff(idx) => send_rec_diff_column(attrs.column(*idx), sender, receivers),
                Compiled::RecSetDiff(idx) => rec_set_diff_column(attrs.column(*idx), receivers),
                Compiled::ExactRepetition => hist.exact_repetition(sender, receivers, t),
                Compiled::UnorderedRepetition => hist.unordered_repetition(sender, receivers, t),
                Compiled::RecSubRep(p) => rec_sub_rep(*p, receivers, t, hist)?,
                Compiled::SendRecSubRep(p) => send_rec_sub_rep(*p, sender, receivers, t, hist)?,
                Compiled::InteractRec(p) => interact_rec(*p, receivers, t, hist)?,
                Compiled::Reciprocation => reciprocation(sender, receivers, t, hist),
                Compiled::OutInPop => out_in_pop(receivers, t, hist),
                Compiled::Triadic(kind) => triadic(*kind, sender, receivers, t, hist),
            };
            *slot = if spec.sqrt { v.sqrt() } else { v };
        }
        Ok(())
    }

    /// Convenience wrapper allocating the output vector.
    pub fn evaluate_vec(
        &self,
        sender: ActorId,
        receivers: &[ActorId],
        t: f64,
        attrs: &AttributeTable,
        hist: &HistoryState,
    ) -> Result<CovariateVector> {
        let mut out = vec![0.0; self.len()];
        self.evaluate(sender, receivers, t, attrs, hist, &mut out)?;
        Ok(out)
    }
}

/// Parses a covariate spec file: one `kind[:attribute][:p][,sqrt]` per line,
/// blank lines and `#` comments ignored.
pub fn parse_spec_lines(text: &str) -> Result<Vec<CovariateSpec>> {
    let mut specs = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        specs.push(line.parse()?);
    }
    Ok(specs)
}

// ---- attribute covariates ---------------------------------------------

/// Mean attribute value over the receiver set (numeric attributes).
pub fn rec_avg(attribute: &str, receivers: &[ActorId], attrs: &AttributeTable) -> Result<f64> {
    match attrs.get(attribute) {
        Some(col @ AttrColumn::Numeric(_)) => Ok(rec_avg_column(col, receivers)),
        Some(_) => Err(Error::InvalidSpec {
            spec: format!("rec_avg:{attribute}"),
            msg: "rec_avg requires a numeric attribute".into(),
        }),
        None => Err(Error::UnknownAttribute { name: attribute.to_string() }),
    }
}

fn rec_avg_column(col: &AttrColumn, receivers: &[ActorId]) -> f64 {
    match col {
        AttrColumn::Numeric(z) => {
            receivers.iter().map(|&j| z[j as usize]).sum::<f64>() / receivers.len() as f64
        }
        AttrColumn::Categorical { .. } => f64::NAN,
    }
}

/// Mean absolute sender-receiver difference (numeric) or mismatch fraction
/// (categorical).
pub fn send_rec_diff(
    attribute: &str,
    sender: ActorId,
    receivers: &[ActorId],
    attrs: &AttributeTable,
) -> Result<f64> {
    let col = attrs
        .get(attribute)
        .ok_or_else(|| Error::UnknownAttribute { name: attribute.to_string() })?;
    Ok(send_rec_diff_column(col, sender, receivers))
}

fn send_rec_diff_column(col: &AttrColumn, sender: ActorId, receivers: &[ActorId]) -> f64 {
    let n = receivers.len() as f64;
    match col {
        AttrColumn::Numeric(z) => {
            let zi = z[sender as usize];
            receivers.iter().map(|&j| (zi - z[j as usize]).abs()).sum::<f64>() / n
        }
        AttrColumn::Categorical { codes, .. } => {
            let ci = codes[sender as usize];
            receivers.iter().filter(|&&j| codes[j as usize] != ci).count() as f64 / n
        }
    }
}

/// Mean pairwise difference within the receiver set; 0 when |J| = 1.
pub fn rec_set_diff(attribute: &str, receivers: &[ActorId], attrs: &AttributeTable) -> Result<f64> {
    let col = attrs
        .get(attribute)
        .ok_or_else(|| Error::UnknownAttribute { name: attribute.to_string() })?;
    Ok(rec_set_diff_column(col, receivers))
}

fn rec_set_diff_column(col: &AttrColumn, receivers: &[ActorId]) -> f64 {
    let n = receivers.len();
    if n < 2 {
        return 0.0;
    }
    let pairs = (n * (n - 1) / 2) as f64;
    let mut acc = 0.0;
    for (a, &j) in receivers.iter().enumerate() {
        for &j2 in &receivers[a + 1..] {
            acc += match col {
                AttrColumn::Numeric(z) => (z[j2 as usize] - z[j as usize]).abs(),
                AttrColumn::Categorical { codes, .. } => {
                    if codes[j2 as usize] != codes[j as usize] {
                        1.0
                    } else {
                        0.0
                    }
                }
            };
        }
    }
    acc / pairs
}

// ---- history covariates -------------------------------------------------

/// Average hyperedge in-degree over all size-`p` subsets of the receiver
/// set; 0 when |J| < p.
pub fn rec_sub_rep(p: usize, receivers: &[ActorId], t: f64, hist: &HistoryState) -> Result<f64> {
    if p > hist.max_order() {
        return Err(Error::OrderExceeded { order: p, max_order: hist.max_order() });
    }
    if receivers.len() < p {
        return Ok(0.0);
    }
    // only subsets of receivers that have ever received anything can score
    let active: Vec<ActorId> = receivers
        .iter()
        .copied()
        .filter(|&j| hist.has_in_history(j))
        .collect();
    let mut sum = 0.0;
    for_each_combination(&active, p, |subset| {
        sum += hist.hy_deg_in(subset, t).unwrap_or(0.0);
    });
    Ok(sum / binomial_saturating(receivers.len() as u64, p as u64) as f64)
}

/// Average sender-specific hyperedge degree over size-`p` receiver subsets.
pub fn send_rec_sub_rep(
    p: usize,
    sender: ActorId,
    receivers: &[ActorId],
    t: f64,
    hist: &HistoryState,
) -> Result<f64> {
    if p > hist.max_order() {
        return Err(Error::OrderExceeded { order: p, max_order: hist.max_order() });
    }
    if receivers.len() < p {
        return Ok(0.0);
    }
    let active: Vec<ActorId> = match hist.sent_to(sender) {
        Some(adj) => receivers.iter().copied().filter(|j| adj.contains(j)).collect(),
        None => Vec::new(),
    };
    let mut sum = 0.0;
    for_each_combination(&active, p, |subset| {
        sum += hist.hy_deg(sender, subset, t).unwrap_or(0.0);
    });
    Ok(sum / binomial_saturating(receivers.len() as u64, p as u64) as f64)
}

/// Receivers addressed jointly with a past sender among them: for every
/// receiver j, size-`p` subsets of the co-receivers that j has sent to.
pub fn interact_rec(p: usize, receivers: &[ActorId], t: f64, hist: &HistoryState) -> Result<f64> {
    if p > hist.max_order() {
        return Err(Error::OrderExceeded { order: p, max_order: hist.max_order() });
    }
    let n = receivers.len();
    if n < p + 1 {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for &j in receivers {
        let Some(adj) = hist.sent_to(j) else { continue };
        let active: Vec<ActorId> = receivers
            .iter()
            .copied()
            .filter(|&j2| j2 != j && adj.contains(&j2))
            .collect();
        for_each_combination(&active, p, |subset| {
            sum += hist.hy_deg(j, subset, t).unwrap_or(0.0);
        });
    }
    let denom = n as f64 * binomial_saturating(n as u64 - 1, p as u64) as f64;
    Ok(sum / denom)
}

/// Mean decayed count of past events sent by receiver-set members to the
/// sender.
pub fn reciprocation(sender: ActorId, receivers: &[ActorId], t: f64, hist: &HistoryState) -> f64 {
    receivers.iter().map(|&j| hist.dyad(j, sender, t)).sum::<f64>() / receivers.len() as f64
}

/// Mean outdegree of the receivers.
pub fn out_in_pop(receivers: &[ActorId], t: f64, hist: &HistoryState) -> f64 {
    receivers.iter().map(|&j| hist.deg_out(j, t)).sum::<f64>() / receivers.len() as f64
}

/// Four triadic closure variants. Third actors iterate over everyone except
/// the sender and the receiver under consideration (which includes other
/// members of the receiver set); only actors adjacent on both legs can
/// contribute, so iteration runs over the intersection of the two dyadic
/// adjacency sets.
fn triadic(kind: TriadicKind, sender: ActorId, receivers: &[ActorId], t: f64, hist: &HistoryState) -> f64 {
    let empty = std::collections::BTreeSet::new();
    let mut sum = 0.0;
    for &j in receivers {
        let (first, second) = match kind {
            // min( hy_deg(i,{a}), hy_deg(a,{j}) ): i -> a and a -> j
            TriadicKind::Transitive => (
                hist.sent_to(sender).unwrap_or(&empty),
                hist.received_from(j).unwrap_or(&empty),
            ),
            // min( hy_deg(a,{i}), hy_deg(j,{a}) ): a -> i and j -> a
            TriadicKind::Cyclic => (
                hist.received_from(sender).unwrap_or(&empty),
                hist.sent_to(j).unwrap_or(&empty),
            ),
            // min( hy_deg(a,{i}), hy_deg(a,{j}) ): a -> i and a -> j
            TriadicKind::InBalance => (
                hist.received_from(sender).unwrap_or(&empty),
                hist.received_from(j).unwrap_or(&empty),
            ),
            // min( hy_deg(i,{a}), hy_deg(j,{a}) ): i -> a and j -> a
            TriadicKind::OutBalance => (
                hist.sent_to(sender).unwrap_or(&empty),
                hist.sent_to(j).unwrap_or(&empty),
            ),
        };
        let (small, large) = if first.len() <= second.len() {
            (first, second)
        } else {
            (second, first)
        };
        for &a in small {
            if a == sender || a == j || !large.contains(&a) {
                continue;
            }
            let (leg1, leg2) = match kind {
                TriadicKind::Transitive => (hist.dyad(sender, a, t), hist.dyad(a, j, t)),
                TriadicKind::Cyclic => (hist.dyad(a, sender, t), hist.dyad(j, a, t)),
                TriadicKind::InBalance => (hist.dyad(a, sender, t), hist.dyad(a, j, t)),
                TriadicKind::OutBalance => (hist.dyad(sender, a, t), hist.dyad(j, a, t)),
            };
            sum += leg1.min(leg2);
        }
    }
    sum / receivers.len() as f64
}

/// Transitive closure: the candidate closes past paths sender -> a -> receiver.
pub fn transitive_closure(sender: ActorId, receivers: &[ActorId], t: f64, hist: &HistoryState) -> f64 {
    triadic(TriadicKind::Transitive, sender, receivers, t, hist)
}

/// Cyclic closure: the candidate closes past cycles a -> sender, receiver -> a.
pub fn cyclic_closure(sender: ActorId, receivers: &[ActorId], t: f64, hist: &HistoryState) -> f64 {
    triadic(TriadicKind::Cyclic, sender, receivers, t, hist)
}

/// Incoming balance: sender and receiver both received from the same third actor.
pub fn in_balance(sender: ActorId, receivers: &[ActorId], t: f64, hist: &HistoryState) -> f64 {
    triadic(TriadicKind::InBalance, sender, receivers, t, hist)
}

/// Outgoing balance: sender and receiver both sent to the same third actor.
pub fn out_balance(sender: ActorId, receivers: &[ActorId], t: f64, hist: &HistoryState) -> f64 {
    triadic(TriadicKind::OutBalance, sender, receivers, t, hist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::DecayConfig;
    use crate::model::Hyperevent;

    // near-flat decay so figure-style worked examples are exact up to decay
    fn flat_hist(max_order: usize) -> HistoryState {
        HistoryState::new(DecayConfig::from_half_life(1e12).unwrap(), max_order).unwrap()
    }

    fn advance(h: &mut HistoryState, time: f64, sender: ActorId, receivers: &[ActorId]) {
        let idx = h.position();
        h.advance(&Hyperevent::new(time, sender, receivers.to_vec(), idx))
            .unwrap();
    }

    fn attrs_numeric(values: &[f64]) -> AttributeTable {
        let mut t = AttributeTable::empty(values.len());
        t.push("z", AttrColumn::Numeric(values.to_vec())).unwrap();
        t
    }

    fn close(a: f64, b: f64) {
        assert!((a - b).abs() < 1e-9, "{a} != {b}");
    }

    #[test]
    fn rec_avg_cases() {
        let attrs = attrs_numeric(&[0.0, 0.0, 0.0, 1.0, 1.0]);
        close(rec_avg("z", &[1, 2], &attrs).unwrap(), 0.0);
        close(rec_avg("z", &[3], &attrs).unwrap(), 1.0);
        close(rec_avg("z", &[2, 3, 4], &attrs).unwrap(), 2.0 / 3.0);
        assert!(rec_avg("missing", &[1], &attrs).is_err());
    }

    #[test]
    fn send_rec_diff_numeric_and_categorical() {
        // sender 0 male (0), receivers: 1 female, 2 male
        let attrs = attrs_numeric(&[0.0, 1.0, 0.0, 0.0, 0.0]);
        close(send_rec_diff("z", 0, &[1, 2], &attrs).unwrap(), 0.5);
        close(send_rec_diff("z", 0, &[2, 3], &attrs).unwrap(), 0.0);

        let mut cat = AttributeTable::empty(5);
        cat.push(
            "dept",
            AttrColumn::Categorical {
                codes: vec![0, 0, 1, 2, 0],
                levels: vec!["Legal".into(), "Trading".into(), "Other".into()],
            },
        )
        .unwrap();
        // sender Legal, receivers {Legal, Trading, Other}
        close(send_rec_diff("dept", 0, &[1, 2, 3], &cat).unwrap(), 2.0 / 3.0);
    }

    #[test]
    fn rec_set_diff_cases() {
        let attrs = attrs_numeric(&[0.0, 1.0, 0.0, 0.0, 1.0]);
        close(rec_set_diff("z", &[2, 3], &attrs).unwrap(), 0.0);
        close(rec_set_diff("z", &[1], &attrs).unwrap(), 0.0);
        // values (1,0,0): 2 mismatched pairs of 3
        close(rec_set_diff("z", &[1, 2, 3], &attrs).unwrap(), 2.0 / 3.0);
    }

    // Worked example: history (t1, A, {B,C,D,E}); candidate (A, {C,D,E,F}).
    // Actors A..G = 0..6.
    #[test]
    fn partial_repetition_worked_example() {
        let mut h = flat_hist(4);
        advance(&mut h, 1.0, 0, &[1, 2, 3, 4]);
        let t = 2.0;
        let cand = [2u32, 3, 4, 5];
        close(rec_sub_rep(1, &cand, t, &h).unwrap(), 3.0 / 4.0);
        close(rec_sub_rep(2, &cand, t, &h).unwrap(), 3.0 / 6.0);
        close(rec_sub_rep(3, &cand, t, &h).unwrap(), 1.0 / 4.0);
        close(rec_sub_rep(4, &cand, t, &h).unwrap(), 0.0);

        // same sender: sender-specific variant agrees
        close(send_rec_sub_rep(1, 0, &cand, t, &h).unwrap(), 3.0 / 4.0);
        close(send_rec_sub_rep(2, 0, &cand, t, &h).unwrap(), 3.0 / 6.0);
        close(send_rec_sub_rep(3, 0, &cand, t, &h).unwrap(), 1.0 / 4.0);
        // different sender G: zero in the sender-specific variant
        for p in 1..=3 {
            close(send_rec_sub_rep(p, 6, &cand, t, &h).unwrap(), 0.0);
        }
    }

    #[test]
    fn rec_sub_rep_degenerate_sizes() {
        let mut h = flat_hist(4);
        advance(&mut h, 1.0, 0, &[1, 2]);
        close(rec_sub_rep(3, &[1, 2], 2.0, &h).unwrap(), 0.0);
        assert!(matches!(
            rec_sub_rep(5, &[1, 2, 3, 4, 5], 2.0, &h),
            Err(Error::OrderExceeded { .. })
        ));
    }

    // Worked example: history (t1, A, {C,D,E}); candidate (F, {A,B,C,D}).
    #[test]
    fn interact_rec_worked_example() {
        let mut h = flat_hist(4);
        advance(&mut h, 1.0, 0, &[2, 3, 4]);
        let t = 2.0;
        let cand = [0u32, 1, 2, 3];
        close(interact_rec(1, &cand, t, &h).unwrap(), 2.0 / 12.0);
        close(interact_rec(2, &cand, t, &h).unwrap(), 1.0 / 12.0);
        close(interact_rec(3, &cand, t, &h).unwrap(), 0.0);
        // singleton receiver set has no co-receiver subsets
        close(interact_rec(1, &[0], t, &h).unwrap(), 0.0);
    }

    // Worked example: history e1=(t1, A, {D,E,F}), e2=(t2, B, {A,C});
    // candidate (D, {A,B,C}).
    #[test]
    fn reciprocation_and_out_in_pop_worked_example() {
        let mut h = flat_hist(2);
        advance(&mut h, 1.0, 0, &[3, 4, 5]);
        advance(&mut h, 2.0, 1, &[0, 2]);
        let t = 3.0;
        close(reciprocation(3, &[0, 1, 2], t, &h), 1.0 / 3.0);
        close(out_in_pop(&[0, 1, 2], t, &h), 2.0 / 3.0);
        close(reciprocation(5, &[2], t, &h), 0.0);
    }

    // Worked example: history (A,{B,C}), (C,{D,E}); candidates (A,{D,E}) and
    // (E,{A,F}).
    #[test]
    fn transitive_and_cyclic_worked_example() {
        let mut h = flat_hist(2);
        advance(&mut h, 1.0, 0, &[1, 2]);
        advance(&mut h, 2.0, 2, &[3, 4]);
        let t = 3.0;
        close(transitive_closure(0, &[3, 4], t, &h), 2.0 / 2.0);
        close(cyclic_closure(4, &[0, 5], t, &h), 1.0 / 2.0);
    }

    // Worked example: history (C,{A,B}), (C,{D,E}); candidate (A,{D,E}).
    #[test]
    fn in_balance_worked_example() {
        let mut h = flat_hist(2);
        advance(&mut h, 1.0, 2, &[0, 1]);
        advance(&mut h, 2.0, 2, &[3, 4]);
        close(in_balance(0, &[3, 4], 3.0, &h), 2.0 / 2.0);
    }

    // Worked example: history (A,{B,C}), (E,{D,C}); candidate (A,{D,E}).
    #[test]
    fn out_balance_worked_example() {
        let mut h = flat_hist(2);
        advance(&mut h, 1.0, 0, &[1, 2]);
        advance(&mut h, 2.0, 4, &[3, 2]);
        close(out_balance(0, &[3, 4], 3.0, &h), 1.0 / 2.0);
    }

    #[test]
    fn exact_and_unordered_worked_example() {
        let mut h = flat_hist(2);
        advance(&mut h, 1.0, 0, &[1, 2, 3, 4]);
        let t = 2.0;
        close(h.exact_repetition(0, &[1, 2, 3, 4], t), 1.0);
        close(h.exact_repetition(2, &[0, 1, 3, 4], t), 0.0);
        close(h.unordered_repetition(2, &[0, 1, 3, 4], t), 1.0);
    }

    #[test]
    fn spec_parse_roundtrip() {
        for s in [
            "rec_avg:female",
            "send_rec_diff:dept",
            "rec_set_diff:senior",
            "exact_repetition",
            "unordered_repetition,sqrt",
            "rec_sub_rep:2,sqrt",
            "send_rec_sub_rep:3",
            "interact_rec:1",
            "reciprocation",
            "out_in_pop,sqrt",
            "transitive_closure",
            "cyclic_closure",
            "in_balance",
            "out_balance",
        ] {
            let spec: CovariateSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("rec_avg".parse::<CovariateSpec>().is_err());
        assert!("rec_sub_rep:0".parse::<CovariateSpec>().is_err());
        assert!("nope".parse::<CovariateSpec>().is_err());
        assert!("reciprocation,abs".parse::<CovariateSpec>().is_err());
        // sqrt is only for history-based kinds
        assert!("rec_avg:female,sqrt".parse::<CovariateSpec>().is_err());
    }

    #[test]
    fn spec_names_match_reports() {
        let cases = [
            ("rec_avg:female", "rec_avg_female"),
            ("rec_sub_rep:2,sqrt", "rec_sub_rep_2"),
            ("reciprocation", "reciprocation"),
        ];
        for (input, name) in cases {
            let spec: CovariateSpec = input.parse().unwrap();
            assert_eq!(spec.name(), name);
        }
    }

    #[test]
    fn evaluate_applies_sqrt_and_order() {
        let mut h = flat_hist(4);
        advance(&mut h, 1.0, 0, &[1, 2, 3, 4]);
        let attrs = AttributeTable::empty(7);
        let set = CovariateSet::compile(
            vec![
                "rec_sub_rep:1,sqrt".parse().unwrap(),
                "rec_sub_rep:1".parse().unwrap(),
            ],
            &attrs,
            4,
        )
        .unwrap();
        let v = set.evaluate_vec(0, &[2, 3, 4, 5], 2.0, &attrs, &h).unwrap();
        close(v[0], (3.0f64 / 4.0).sqrt());
        close(v[1], 3.0 / 4.0);
    }

    #[test]
    fn empty_spec_list_gives_empty_vector() {
        let h = flat_hist(2);
        let attrs = AttributeTable::empty(3);
        let set = CovariateSet::compile(vec![], &attrs, 2).unwrap();
        let v = set.evaluate_vec(0, &[1], 0.0, &attrs, &h).unwrap();
        assert!(v.is_empty());
    }

    #[test]
    fn compile_rejects_unknown_attribute_and_high_order() {
        let attrs = AttributeTable::empty(3);
        assert!(matches!(
            CovariateSet::compile(vec!["rec_avg:nope".parse().unwrap()], &attrs, 4),
            Err(Error::UnknownAttribute { .. })
        ));
        assert!(matches!(
            CovariateSet::compile(vec!["rec_sub_rep:5".parse().unwrap()], &attrs, 4),
            Err(Error::OrderExceeded { .. })
        ));
    }
}
