//! Prediction-error measures: request inversions, item inversions,
//! instantaneous item inversions, and the floored error count `eta`.
//!
//! A pair of requests on different items is inverted when the strict order of
//! their true deadlines disagrees with the strict order of their predicted
//! deadlines (`d_q < d_q'` while `p_q > p_q'`). Ties in either coordinate do
//! not count. Item pairs are inverted when witnessed by at least one inverted
//! request pair; the instantaneous count takes, over all times `t`, the
//! maximum number of item pairs witnessed by request pairs whose closed
//! availability intervals both contain `t`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::{Instance, ItemId, RequestId, Tick};

/// All error measures of one instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Raw inverted request pair count (may be zero).
    pub request_inversions: u64,
    /// The raw count floored at 1, as used in ratio statements.
    pub request_inversions_floored: u64,
    /// Inverted request pairs, earlier true deadline first.
    pub request_inversion_pairs: Vec<(RequestId, RequestId)>,
    /// Raw inverted item pair count (may be zero).
    pub item_inversions: u64,
    /// Unordered inverted item pairs, normalized with the smaller id first.
    pub item_inversion_pairs: BTreeSet<(ItemId, ItemId)>,
    /// Maximum number of item inversions alive at any single time.
    pub instantaneous_item_inversions: u64,
    /// Earliest tick attaining the instantaneous maximum.
    pub peak_time: Tick,
    /// `max(1, instantaneous_item_inversions)`.
    pub eta: u64,
}

/// Inverted request pairs, each ordered with the strictly earlier true
/// deadline first.
pub fn request_inversions(instance: &Instance) -> Vec<(RequestId, RequestId)> {
    let mut pairs = Vec::new();
    for a in &instance.requests {
        for b in &instance.requests {
            if a.id >= b.id || a.item == b.item {
                continue;
            }
            if a.deadline < b.deadline && a.predicted > b.predicted {
                pairs.push((a.id, b.id));
            } else if b.deadline < a.deadline && b.predicted > a.predicted {
                pairs.push((b.id, a.id));
            }
        }
    }
    pairs
}

/// Unordered item pairs witnessed by at least one inverted request pair.
pub fn item_inversions(instance: &Instance) -> BTreeSet<(ItemId, ItemId)> {
    request_inversions(instance)
        .into_iter()
        .map(|(q, q2)| normalize_item_pair(instance.request(q).item, instance.request(q2).item))
        .collect()
}

fn normalize_item_pair(a: ItemId, b: ItemId) -> (ItemId, ItemId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Maximum over time of the number of item inversions alive at that time,
/// together with the earliest tick attaining it.
///
/// Only event points (arrivals and deadlines) are evaluated: between events
/// the set of alive requests can only shrink, so every maximum is attained at
/// an event point.
pub fn instantaneous_item_inversions(instance: &Instance) -> (u64, Tick) {
    let events: BTreeSet<Tick> = instance
        .requests
        .iter()
        .flat_map(|r| [r.arrival, r.deadline])
        .collect();
    max_alive_inversions(instance, events.into_iter())
}

/// Exhaustive per-tick variant of [`instantaneous_item_inversions`], sweeping
/// every integer tick from the first arrival to the last deadline. Intended
/// as a cross-check at small horizons.
pub fn instantaneous_dense_sweep(instance: &Instance) -> (u64, Tick) {
    let lo = instance.requests.iter().map(|r| r.arrival).min();
    let hi = instance.requests.iter().map(|r| r.deadline).max();
    match (lo, hi) {
        (Some(lo), Some(hi)) => max_alive_inversions(instance, lo..=hi),
        _ => (0, 0),
    }
}

fn max_alive_inversions(instance: &Instance, ticks: impl Iterator<Item = Tick>) -> (u64, Tick) {
    let pairs = request_inversions(instance);
    let mut best = 0u64;
    let mut peak = 0;
    let mut first = true;
    for t in ticks {
        let alive: BTreeSet<(ItemId, ItemId)> = pairs
            .iter()
            .filter(|(q, q2)| instance.request(*q).alive_at(t) && instance.request(*q2).alive_at(t))
            .map(|(q, q2)| {
                normalize_item_pair(instance.request(*q).item, instance.request(*q2).item)
            })
            .collect();
        let count = alive.len() as u64;
        if first || count > best {
            best = count;
            peak = t;
            first = false;
        }
    }
    (best, peak)
}

/// The prediction-error count: instantaneous item inversions floored at 1.
pub fn eta(instance: &Instance) -> u64 {
    instantaneous_item_inversions(instance).0.max(1)
}

pub fn metrics_report(instance: &Instance) -> MetricsReport {
    let request_inversion_pairs = request_inversions(instance);
    let item_inversion_pairs = item_inversions(instance);
    let (instantaneous, peak_time) = instantaneous_item_inversions(instance);
    let raw_requests = request_inversion_pairs.len() as u64;
    MetricsReport {
        request_inversions: raw_requests,
        request_inversions_floored: raw_requests.max(1),
        request_inversion_pairs,
        item_inversions: item_inversion_pairs.len() as u64,
        item_inversion_pairs,
        instantaneous_item_inversions: instantaneous,
        peak_time,
        eta: instantaneous.max(1),
    }
}
