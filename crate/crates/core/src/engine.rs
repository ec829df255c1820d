//! Online simulation protocol.
//!
//! The engine delivers arrivals (carrying predicted deadlines only) and
//! deadline events for still-pending requests, executes the algorithm's
//! service decisions against the ground-truth instance, and records a trace.
//! Limited information is enforced structurally: the view type handed to
//! algorithms has no true-deadline field, and a request served before its
//! deadline never produces a deadline event.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::{
    order_key_true, validate_instance, Instance, InstanceViolation, ItemId, OrderKey, RequestId,
    Tick,
};
use crate::schedule::{Schedule, Service};
use crate::weight::Weight;

/// What an online algorithm sees of a request. There is deliberately no true
/// deadline here.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OnlineRequestView {
    pub id: RequestId,
    pub item: ItemId,
    pub arrival: Tick,
    pub predicted: Tick,
}

/// Items an algorithm chooses to transmit in response to a deadline event.
/// Must contain the triggering request's item.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Decision {
    pub items: BTreeSet<ItemId>,
}

impl Decision {
    pub fn single(item: ItemId) -> Decision {
        Decision {
            items: BTreeSet::from([item]),
        }
    }
}

/// Static per-item data an algorithm may consult: the joint cost, item
/// weights, and tie-break ranks. Carries no request information.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ItemCatalog {
    joint_cost: Weight,
    weights: Vec<Weight>,
    ranks: Vec<u32>,
}

impl ItemCatalog {
    pub fn of(instance: &Instance) -> ItemCatalog {
        ItemCatalog {
            joint_cost: instance.joint_cost,
            weights: instance.items.iter().map(|i| i.weight).collect(),
            ranks: instance.tie_permutation.clone(),
        }
    }

    pub fn joint_cost(&self) -> Weight {
        self.joint_cost
    }

    pub fn weight(&self, item: ItemId) -> Weight {
        self.weights[item.0 as usize]
    }

    pub fn rank(&self, item: ItemId) -> u32 {
        self.ranks[item.0 as usize]
    }

    pub fn item_count(&self) -> usize {
        self.weights.len()
    }

    pub fn item_ids(&self) -> impl Iterator<Item = ItemId> + '_ {
        (0..self.weights.len() as u32).map(ItemId)
    }

    /// Ordering key over views: predicted deadline, then tie rank, then id.
    pub fn view_key(&self, view: &OnlineRequestView) -> OrderKey {
        OrderKey::new(view.predicted, self.rank(view.item), view.id)
    }

    /// Copy of the catalog with item weights replaced.
    pub fn with_weights(&self, weights: Vec<Weight>) -> ItemCatalog {
        assert_eq!(weights.len(), self.weights.len());
        ItemCatalog {
            joint_cost: self.joint_cost,
            weights,
            ranks: self.ranks.clone(),
        }
    }
}

/// Per-decision context: the event tick plus trace annotations the algorithm
/// may report (phase starts and a sub-policy scope tag).
#[derive(Debug)]
pub struct ServiceContext {
    now: Tick,
    scope: u32,
    phase_anchor: Option<Tick>,
}

impl ServiceContext {
    pub(crate) fn new(now: Tick) -> ServiceContext {
        ServiceContext {
            now,
            scope: 0,
            phase_anchor: None,
        }
    }

    pub fn now(&self) -> Tick {
        self.now
    }

    /// Report that this decision starts a new phase anchored at `anchor`.
    pub fn mark_phase(&mut self, anchor: Tick) {
        self.phase_anchor = Some(anchor);
    }

    /// Tag the decision with a sub-policy scope (bucket index); phase
    /// reconstruction groups services per scope.
    pub fn set_scope(&mut self, scope: u32) {
        self.scope = scope;
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("protocol violation by `{algorithm}` at tick {time}: {message}")]
pub struct ProtocolViolation {
    pub algorithm: String,
    pub time: Tick,
    pub message: String,
}

/// Behavioral contract for online policies.
///
/// An algorithm may only read the views it was handed and its own state. It
/// is notified of request removals performed by other components through
/// `on_external_service`, which defaults to a no-op.
pub trait OnlineAlgorithm {
    fn name(&self) -> String;

    fn on_arrival(&mut self, view: OnlineRequestView);

    fn on_deadline(
        &mut self,
        request: RequestId,
        ctx: &mut ServiceContext,
    ) -> Result<Decision, ProtocolViolation>;

    fn on_external_service(&mut self, served: &BTreeSet<RequestId>) {
        let _ = served;
    }
}

/// Prediction delivery mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Views carry the instance's predicted deadlines.
    Predicted,
    /// Views carry the true deadlines (perfect predictions).
    Clairvoyant,
}

/// One executed service as recorded in the trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ServiceRecord {
    pub time: Tick,
    pub trigger: RequestId,
    pub scope: u32,
    /// `Some(anchor)` when the decision started a new phase.
    pub phase_anchor: Option<Tick>,
    pub decided: BTreeSet<ItemId>,
    /// Decided items that had at least one pending request.
    pub transmitted: BTreeSet<ItemId>,
    pub served: BTreeSet<RequestId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceEvent {
    Arrival { time: Tick, request: RequestId },
    DeadlineTrigger { time: Tick, request: RequestId },
    Service(ServiceRecord),
}

/// Time-ordered event log of one simulation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    /// Prediction mode the run used; decides which order the scans saw.
    pub mode: Mode,
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn services(&self) -> impl Iterator<Item = &ServiceRecord> {
        self.events.iter().filter_map(|e| match e {
            TraceEvent::Service(record) => Some(record),
            _ => None,
        })
    }

    pub fn trigger_count(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, TraceEvent::DeadlineTrigger { .. }))
            .count()
    }

    /// Short tail excerpt for error reporting.
    pub fn excerpt(&self, max_events: usize) -> String {
        let skip = self.events.len().saturating_sub(max_events);
        self.events[skip..]
            .iter()
            .map(|e| format!("{e:?}"))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error(transparent)]
    Protocol(#[from] ProtocolViolation),
    #[error("invalid instance: {}", format_violations(.0))]
    InvalidInstance(Vec<InstanceViolation>),
    #[error("removal time {time} for {request} is outside its window")]
    InvalidRemovalTime { request: RequestId, time: Tick },
    #[error("removal-scheduled {request} would be served at tick {time}")]
    RemovalConflict { request: RequestId, time: Tick },
}

fn format_violations(violations: &[InstanceViolation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Runs `algorithm` on `instance` under the online protocol.
///
/// Event order within one tick: all arrivals first, then deadline events for
/// still-pending requests in [`order_key_true`] order, re-checking pendingness
/// after each service. A request served early never produces a deadline
/// event. The resulting schedule is feasible whenever the algorithm honors
/// the decision invariant.
pub fn simulate(
    instance: &Instance,
    algorithm: &mut dyn OnlineAlgorithm,
    mode: Mode,
) -> Result<(Schedule, Trace), SimError> {
    simulate_with_removals(instance, algorithm, mode, &BTreeMap::new())
}

/// [`simulate`] in clairvoyant mode: every view's predicted deadline is the
/// true deadline.
pub fn run_clairvoyant(
    instance: &Instance,
    algorithm: &mut dyn OnlineAlgorithm,
) -> Result<(Schedule, Trace), SimError> {
    simulate(instance, algorithm, Mode::Clairvoyant)
}

/// As [`simulate`], but requests scheduled in `removals` are never served:
/// each is withdrawn at its removal tick (before that tick's deadline events)
/// and announced through `on_external_service`. If a service would cover a
/// not-yet-removed request from the removal set, the removal schedule is
/// inconsistent with the run and an error is returned.
pub fn simulate_with_removals(
    instance: &Instance,
    algorithm: &mut dyn OnlineAlgorithm,
    mode: Mode,
    removals: &BTreeMap<RequestId, Tick>,
) -> Result<(Schedule, Trace), SimError> {
    let violations = validate_instance(instance);
    if !violations.is_empty() {
        return Err(SimError::InvalidInstance(violations));
    }
    for (&request, &time) in removals {
        if (request.0 as usize) >= instance.request_count()
            || !instance.request(request).alive_at(time)
        {
            return Err(SimError::InvalidRemovalTime { request, time });
        }
    }

    let m = instance.request_count();
    let mut arrived = vec![false; m];
    // Served or removed; either way the request no longer pends.
    let mut resolved = vec![false; m];

    let ticks: BTreeSet<Tick> = instance
        .requests
        .iter()
        .flat_map(|r| [r.arrival, r.deadline])
        .chain(removals.values().copied())
        .collect();

    let mut schedule = Schedule::default();
    let mut trace = Trace {
        mode,
        events: Vec::new(),
    };

    for &now in &ticks {
        for request in &instance.requests {
            if request.arrival == now {
                arrived[request.id.0 as usize] = true;
                trace.events.push(TraceEvent::Arrival {
                    time: now,
                    request: request.id,
                });
                let predicted = match mode {
                    Mode::Predicted => request.predicted,
                    Mode::Clairvoyant => request.deadline,
                };
                algorithm.on_arrival(OnlineRequestView {
                    id: request.id,
                    item: request.item,
                    arrival: request.arrival,
                    predicted,
                });
            }
        }

        let withdrawn: BTreeSet<RequestId> = removals
            .iter()
            .filter(|&(id, &t)| t == now && arrived[id.0 as usize] && !resolved[id.0 as usize])
            .map(|(&id, _)| id)
            .collect();
        if !withdrawn.is_empty() {
            for id in &withdrawn {
                resolved[id.0 as usize] = true;
            }
            algorithm.on_external_service(&withdrawn);
        }

        loop {
            let trigger = instance
                .requests
                .iter()
                .filter(|r| {
                    r.deadline == now && arrived[r.id.0 as usize] && !resolved[r.id.0 as usize]
                })
                .min_by_key(|r| order_key_true(r, instance));
            let Some(trigger) = trigger else { break };

            trace.events.push(TraceEvent::DeadlineTrigger {
                time: now,
                request: trigger.id,
            });
            let mut ctx = ServiceContext::new(now);
            let decision =
                algorithm.on_deadline(trigger.id, &mut ctx).map_err(|mut violation| {
                    violation.message = format!(
                        "{}; recent events:\n{}",
                        violation.message,
                        trace.excerpt(6)
                    );
                    SimError::Protocol(violation)
                })?;
            if !decision.items.contains(&trigger.item) {
                return Err(SimError::Protocol(ProtocolViolation {
                    algorithm: algorithm.name(),
                    time: now,
                    message: format!(
                        "decision omits the triggering request's {} (trigger {}); \
                         recent events:\n{}",
                        trigger.item,
                        trigger.id,
                        trace.excerpt(6)
                    ),
                }));
            }

            let mut served = BTreeSet::new();
            for request in &instance.requests {
                let idx = request.id.0 as usize;
                if arrived[idx] && !resolved[idx] && decision.items.contains(&request.item) {
                    if removals.contains_key(&request.id) {
                        return Err(SimError::RemovalConflict {
                            request: request.id,
                            time: now,
                        });
                    }
                    served.insert(request.id);
                }
            }
            let transmitted: BTreeSet<ItemId> =
                served.iter().map(|&q| instance.request(q).item).collect();
            for id in &served {
                resolved[id.0 as usize] = true;
            }

            schedule.services.push(Service {
                time: now,
                items: transmitted.clone(),
                served: served.clone(),
            });
            trace.events.push(TraceEvent::Service(ServiceRecord {
                time: now,
                trigger: trigger.id,
                scope: ctx.scope,
                phase_anchor: ctx.phase_anchor,
                decided: decision.items,
                transmitted,
                served,
            }));
        }
    }

    Ok((schedule, trace))
}
