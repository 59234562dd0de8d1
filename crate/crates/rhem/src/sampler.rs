//! Case-control sampling of receiver sets.
//!
//! Each observed event becomes one stratum: the observed receiver set (the
//! case) plus `k` control sets of the same size, drawn uniformly without
//! replacement from all other same-size subsets of the sender's eligible
//! receivers. Control draws use rejection of duplicates and of the case,
//! which is exactly uniform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::HashSet;

use crate::comb::binomial_saturating;
use crate::covariates::CovariateSet;
use crate::error::{Error, Result};
use crate::history::{DecayConfig, HistoryState};
use crate::io::{ArtifactMeta, SampleRow, SampleTable};
use crate::model::{ActorId, AttributeTable, EventStream, Hyperevent};

#[derive(Debug, Clone)]
pub struct SamplerConfig {
    /// Controls per event.
    pub k: u64,
    /// Master seed; per-event generators are derived from it so strata are
    /// independent of processing order.
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { k: 100, seed: 0 }
    }
}

/// One observed event with its sampled controls and evaluated covariates.
/// `rows` holds one covariate vector per hyperedge, the case first.
#[derive(Debug, Clone)]
pub struct SampledStratum {
    pub event_index: u64,
    pub sender: ActorId,
    pub case: Vec<ActorId>,
    pub controls: Vec<Vec<ActorId>>,
    pub rows: Vec<Vec<f64>>,
}

impl SampledStratum {
    /// Receiver sets in row order: case first, then controls.
    pub fn receiver_sets(&self) -> impl Iterator<Item = &[ActorId]> {
        std::iter::once(self.case.as_slice()).chain(self.controls.iter().map(|c| c.as_slice()))
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Deterministic per-event generator derived from the master seed.
pub fn event_rng(seed: u64, event_index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(event_index.wrapping_add(1))))
}

/// Draws `k` distinct control receiver sets for one event: uniform over all
/// size-|J| subsets of `eligible` other than the case itself.
pub fn sample_stratum(
    event: &Hyperevent,
    eligible: &[ActorId],
    cfg: &SamplerConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<ActorId>>> {
    let size = event.size();
    for j in &event.receivers {
        if eligible.binary_search(j).is_err() {
            return Err(Error::InvalidConfig(format!(
                "observed receiver index {j} of event {} is not eligible under the risk policy",
                event.index
            )));
        }
    }
    let universe = binomial_saturating(eligible.len() as u64, size as u64);
    let available = universe.saturating_sub(1);
    if available < cfg.k {
        return Err(Error::InsufficientControls {
            requested: cfg.k,
            available,
        });
    }

    let mut seen: HashSet<Vec<ActorId>> = HashSet::with_capacity(cfg.k as usize + 1);
    seen.insert(event.receivers.clone());
    let mut controls = Vec::with_capacity(cfg.k as usize);
    // feasibility holds, so rejection terminates; the guard is generous
    let max_attempts = 1000 * (cfg.k + 1) * (1 + cfg.k / available.max(1));
    let mut attempts: u64 = 0;
    while controls.len() < cfg.k as usize {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::InsufficientControls {
                requested: cfg.k,
                available,
            });
        }
        let idx = rand::seq::index::sample(rng, eligible.len(), size);
        let mut set: Vec<ActorId> = idx.iter().map(|i| eligible[i]).collect();
        set.sort_unstable();
        if seen.insert(set.clone()) {
            controls.push(set);
        }
    }
    Ok(controls)
}

/// Runs the sampling pipeline over a whole stream: for every event, draw
/// controls against the history of strictly earlier events, evaluate the
/// covariates of the case and all controls, then fold the event into the
/// history.
pub fn sample_stream(
    stream: &EventStream,
    attrs: &AttributeTable,
    covariates: &CovariateSet,
    decay: DecayConfig,
    max_order: usize,
    cfg: &SamplerConfig,
) -> Result<Vec<SampledStratum>> {
    let mut hist = HistoryState::new(decay, max_order)?;
    sample_stream_from(stream, attrs, covariates, &mut hist, cfg)
}

/// As [`sample_stream`] but continuing from an existing history state.
/// Returns one stratum per event in order.
pub fn sample_stream_from(
    stream: &EventStream,
    attrs: &AttributeTable,
    covariates: &CovariateSet,
    hist: &mut HistoryState,
    cfg: &SamplerConfig,
) -> Result<Vec<SampledStratum>> {
    let mut strata = Vec::with_capacity(stream.len());
    for event in stream.events() {
        let eligible = stream.eligible(event.sender);
        let mut rng = event_rng(cfg.seed, event.index);
        let controls = sample_stratum(event, &eligible, cfg, &mut rng)?;

        let mut stratum = SampledStratum {
            event_index: event.index,
            sender: event.sender,
            case: event.receivers.clone(),
            controls,
            rows: Vec::new(),
        };
        stratum.rows = evaluate_rows(&stratum, event.time, attrs, covariates, hist)?;
        hist.advance(event)?;
        strata.push(stratum);
    }
    Ok(strata)
}

/// Covariate vectors for the case and every control, evaluated against the
/// same read-only history snapshot (rows fan out in parallel).
fn evaluate_rows(
    stratum: &SampledStratum,
    t: f64,
    attrs: &AttributeTable,
    covariates: &CovariateSet,
    hist: &HistoryState,
) -> Result<Vec<Vec<f64>>> {
    let sets: Vec<&[ActorId]> = stratum.receiver_sets().collect();
    sets.par_iter()
        .map(|receivers| covariates.evaluate_vec(stratum.sender, receivers, t, attrs, hist))
        .collect()
}

/// Flattens strata into the writable sample table.
pub fn to_sample_table(strata: &[SampledStratum], covariates: &CovariateSet, meta: ArtifactMeta) -> SampleTable {
    let mut rows = Vec::new();
    for s in strata {
        for (i, receivers) in s.receiver_sets().enumerate() {
            rows.push(SampleRow {
                stratum: s.event_index,
                is_case: i == 0,
                sender: s.sender,
                receivers: receivers.to_vec(),
                covariates: s.rows[i].clone(),
            });
        }
    }
    SampleTable {
        meta,
        covariate_names: covariates.names().to_vec(),
        rows,
    }
}
