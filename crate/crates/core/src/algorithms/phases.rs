//! Post-hoc phase diagnostics over traces of phase-marking policies.
//!
//! Phases are reconstructed per trace scope from the phase marks the policy
//! reported. Within a phase, every service except the last is *charged*. The
//! phase *boundary* is the time of its last service. A served request is
//! *unsafe* when its true deadline lies strictly after the boundary of the
//! phase it was served in.
//!
//! Two safety views are reported per service:
//!
//! * `unsafe_served` / `unsafe_fraction` count every served request,
//!   including requests that merely ride along because they share an item
//!   with a scanned request. This is the right notion for threshold
//!   (`tau`-unsafe) accounting.
//! * `safe` looks only at the *item-triggering* requests, one per transmitted
//!   item: the eligible request whose scan position caused the item to be
//!   included. Riders can carry arbitrarily late deadlines even under perfect
//!   predictions (see the unit test below), so the guarantee that charged
//!   services stay safe holds for item triggers, not for riders.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use thiserror::Error;

use crate::engine::{Mode, ServiceRecord, Trace};
use crate::model::{order_key_pred, order_key_true, Instance, ItemId, OrderKey, RequestId, Tick};
use crate::weight::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhaseService {
    pub time: Tick,
    pub trigger: RequestId,
    /// Every service of a phase except the last is charged.
    pub charged: bool,
    pub transmitted: BTreeSet<ItemId>,
    pub served: BTreeSet<RequestId>,
    /// Served requests whose true deadline exceeds the phase boundary.
    pub unsafe_served: BTreeSet<RequestId>,
    /// `|unsafe_served| / |served|`.
    pub unsafe_fraction: Rational,
    /// For each transmitted item, the eligible request that caused its
    /// inclusion (the trigger for the trigger's own item).
    pub item_triggers: BTreeMap<ItemId, RequestId>,
    /// Item triggers whose true deadline exceeds the phase boundary.
    pub unsafe_item_triggers: BTreeSet<RequestId>,
    /// Charged service with no unsafe item triggers (uncharged services are
    /// vacuously safe).
    pub safe: bool,
}

impl PhaseService {
    /// Charged service in which at least a `tau` fraction of served requests
    /// is unsafe.
    pub fn is_tau_unsafe(&self, tau: Rational) -> bool {
        self.charged && !self.served.is_empty() && self.unsafe_fraction >= tau
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Phase {
    /// Trace scope (0 for plain runs; bucket index for bucketed runs).
    pub scope: u32,
    /// Phase anchor reported by the policy.
    pub start: Tick,
    /// Time of the phase's last service.
    pub boundary: Tick,
    pub services: Vec<PhaseService>,
    /// How often each item was transmitted within the phase.
    pub item_transmissions: BTreeMap<ItemId, u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PhaseReport {
    pub phases: Vec<Phase>,
}

impl PhaseReport {
    pub fn services(&self) -> impl Iterator<Item = &PhaseService> {
        self.phases.iter().flat_map(|p| p.services.iter())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PhaseAnalysisError {
    #[error("trace lacks a phase mark before the service at tick {time} (scope {scope})")]
    MissingPhaseMark { scope: u32, time: Tick },
}

/// Rebuilds phases from a trace produced by a phase-marking policy and
/// classifies services and requests against the ground-truth instance.
pub fn analyze_phases(
    trace: &Trace,
    instance: &Instance,
) -> Result<PhaseReport, PhaseAnalysisError> {
    let mut per_scope: BTreeMap<u32, Vec<&ServiceRecord>> = BTreeMap::new();
    for record in trace.services() {
        per_scope.entry(record.scope).or_default().push(record);
    }

    let mut report = PhaseReport::default();
    for (scope, records) in per_scope {
        let mut groups: Vec<(Tick, Vec<&ServiceRecord>)> = Vec::new();
        for record in records {
            match record.phase_anchor {
                Some(anchor) => groups.push((anchor, vec![record])),
                None => match groups.last_mut() {
                    Some((_, services)) => services.push(record),
                    None => {
                        return Err(PhaseAnalysisError::MissingPhaseMark {
                            scope,
                            time: record.time,
                        })
                    }
                },
            }
        }
        for (start, records) in groups {
            report
                .phases
                .push(build_phase(trace.mode, instance, scope, start, &records));
        }
    }
    Ok(report)
}

fn build_phase(
    mode: Mode,
    instance: &Instance,
    scope: u32,
    start: Tick,
    records: &[&ServiceRecord],
) -> Phase {
    let boundary = records.last().expect("phase has at least one service").time;
    let mut item_transmissions: BTreeMap<ItemId, u32> = BTreeMap::new();
    let mut services = Vec::with_capacity(records.len());
    for (index, record) in records.iter().enumerate() {
        for &item in &record.transmitted {
            *item_transmissions.entry(item).or_insert(0) += 1;
        }
        let charged = index + 1 < records.len();
        let unsafe_served: BTreeSet<RequestId> = record
            .served
            .iter()
            .copied()
            .filter(|&q| instance.request(q).deadline > boundary)
            .collect();
        let unsafe_fraction = if record.served.is_empty() {
            Rational::from_integer(0)
        } else {
            Rational::new(unsafe_served.len() as i64, record.served.len() as i64)
        };
        let item_triggers = item_triggers(mode, instance, record, start);
        let unsafe_item_triggers: BTreeSet<RequestId> = item_triggers
            .values()
            .copied()
            .filter(|&q| instance.request(q).deadline > boundary)
            .collect();
        let safe = !charged || unsafe_item_triggers.is_empty();
        services.push(PhaseService {
            time: record.time,
            trigger: record.trigger,
            charged,
            transmitted: record.transmitted.clone(),
            served: record.served.clone(),
            unsafe_served,
            unsafe_fraction,
            item_triggers,
            unsafe_item_triggers,
            safe,
        });
    }
    Phase {
        scope,
        start,
        boundary,
        services,
        item_transmissions,
    }
}

/// For each transmitted item, the served request that caused its inclusion:
/// the trigger for the trigger's item, otherwise the scan-first eligible
/// request on the item. The scan order is the predicted-deadline key for
/// predicted-mode runs and the true-deadline key for clairvoyant runs.
fn item_triggers(
    mode: Mode,
    instance: &Instance,
    record: &ServiceRecord,
    start: Tick,
) -> BTreeMap<ItemId, RequestId> {
    let key = |q: RequestId| -> OrderKey {
        let request = instance.request(q);
        match mode {
            Mode::Predicted => order_key_pred(request, instance),
            Mode::Clairvoyant => order_key_true(request, instance),
        }
    };
    let trigger_item = instance.request(record.trigger).item;
    let mut triggers: BTreeMap<ItemId, RequestId> = BTreeMap::new();
    triggers.insert(trigger_item, record.trigger);
    for &item in &record.transmitted {
        if item == trigger_item {
            continue;
        }
        let eligible = record
            .served
            .iter()
            .copied()
            .filter(|&q| {
                let r = instance.request(q);
                r.item == item && r.arrival <= start
            })
            .min_by_key(|&q| key(q));
        // Fall back to any served request on the item; an item transmitted by
        // a scan always has an eligible served request, but traces of other
        // policies may not maintain that.
        let cause = eligible.or_else(|| {
            record
                .served
                .iter()
                .copied()
                .filter(|&q| instance.request(q).item == item)
                .min_by_key(|&q| key(q))
        });
        if let Some(cause) = cause {
            triggers.insert(item, cause);
        }
    }
    triggers
}
