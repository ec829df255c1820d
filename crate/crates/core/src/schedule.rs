//! Services, schedules, exact cost decomposition and feasibility checking.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Instance, ItemId, RequestId, Tick};
use crate::weight::Weight;

/// One service: a joint order at `time` transmitting `items` and serving
/// `served` requests.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Service {
    pub time: Tick,
    pub items: BTreeSet<ItemId>,
    pub served: BTreeSet<RequestId>,
}

/// Time-ordered list of services.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Schedule {
    pub services: Vec<Service>,
}

impl Schedule {
    pub fn total_cost(&self, instance: &Instance) -> Result<Weight, CostError> {
        Ok(schedule_cost(self, instance)?.total)
    }
}

/// Exact decomposition of a schedule's cost into the joint part and the
/// per-item parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostBreakdown {
    pub total: Weight,
    pub joint: Weight,
    pub per_item: BTreeMap<ItemId, Weight>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CostError {
    #[error("service references unknown {item}")]
    UnknownItem { item: ItemId },
    #[error("service references unknown {request}")]
    UnknownRequest { request: RequestId },
}

/// Cost of one service: the joint cost plus the weights of transmitted items.
pub fn service_cost(service: &Service, instance: &Instance) -> Result<Weight, CostError> {
    let mut cost = instance.joint_cost;
    for &item in &service.items {
        if (item.0 as usize) >= instance.item_count() {
            return Err(CostError::UnknownItem { item });
        }
        cost += instance.weight_of(item);
    }
    Ok(cost)
}

/// Cost of a whole schedule, decomposed. `total = joint + sum(per_item)`
/// exactly, with `joint` counting the joint cost once per service and
/// `per_item[i]` counting `w_i` once per service transmitting `i`.
pub fn schedule_cost(schedule: &Schedule, instance: &Instance) -> Result<CostBreakdown, CostError> {
    let joint = instance.joint_cost.times(schedule.services.len());
    let mut per_item: BTreeMap<ItemId, Weight> = BTreeMap::new();
    for service in &schedule.services {
        for &request in &service.served {
            if (request.0 as usize) >= instance.request_count() {
                return Err(CostError::UnknownRequest { request });
            }
        }
        for &item in &service.items {
            if (item.0 as usize) >= instance.item_count() {
                return Err(CostError::UnknownItem { item });
            }
            let entry = per_item.entry(item).or_insert_with(Weight::zero);
            *entry += instance.weight_of(item);
        }
    }
    let total = joint + per_item.values().copied().sum();
    Ok(CostBreakdown {
        total,
        joint,
        per_item,
    })
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScheduleViolation {
    #[error("{request} is never served")]
    Unserved { request: RequestId },
    #[error("{request} is served by more than one service")]
    ServedTwice { request: RequestId },
    #[error("{request} served at {time} outside [{arrival}, {deadline}]")]
    OutsideWindow {
        request: RequestId,
        time: Tick,
        arrival: Tick,
        deadline: Tick,
    },
    #[error("{request} served at {time} but its {item} is not transmitted")]
    ItemNotTransmitted {
        request: RequestId,
        item: ItemId,
        time: Tick,
    },
    #[error("service at {time} serves no request")]
    EmptyService { time: Tick },
    #[error("service at {time} transmits {item} which serves no request")]
    IdleItem { time: Tick, item: ItemId },
    #[error("services are not in time order (index {index})")]
    OutOfOrder { index: usize },
    #[error("schedule references unknown {request}")]
    UnknownRequest { request: RequestId },
    #[error("schedule references unknown {item}")]
    UnknownItem { item: ItemId },
}

/// Feasibility check: every request must be served exactly once, inside its
/// closed `[arrival, deadline]` window, by a service transmitting its item.
/// Also enforces the structural service invariants. Empty report = feasible.
pub fn validate_schedule(schedule: &Schedule, instance: &Instance) -> Vec<ScheduleViolation> {
    let mut violations = Vec::new();
    let mut served_by: BTreeMap<RequestId, Vec<usize>> = BTreeMap::new();

    for (index, service) in schedule.services.iter().enumerate() {
        if index > 0 && schedule.services[index - 1].time > service.time {
            violations.push(ScheduleViolation::OutOfOrder { index });
        }
        if service.served.is_empty() {
            violations.push(ScheduleViolation::EmptyService { time: service.time });
        }
        for &item in &service.items {
            if (item.0 as usize) >= instance.item_count() {
                violations.push(ScheduleViolation::UnknownItem { item });
            }
        }
        let mut used_items: BTreeSet<ItemId> = BTreeSet::new();
        for &request in &service.served {
            if (request.0 as usize) >= instance.request_count() {
                violations.push(ScheduleViolation::UnknownRequest { request });
                continue;
            }
            served_by.entry(request).or_default().push(index);
            used_items.insert(instance.request(request).item);
        }
        for &item in &service.items {
            if (item.0 as usize) < instance.item_count() && !used_items.contains(&item) {
                violations.push(ScheduleViolation::IdleItem {
                    time: service.time,
                    item,
                });
            }
        }
    }

    for request in &instance.requests {
        match served_by.get(&request.id).map(Vec::as_slice) {
            None | Some([]) => violations.push(ScheduleViolation::Unserved {
                request: request.id,
            }),
            Some([index]) => {
                let service = &schedule.services[*index];
                if !request.alive_at(service.time) {
                    violations.push(ScheduleViolation::OutsideWindow {
                        request: request.id,
                        time: service.time,
                        arrival: request.arrival,
                        deadline: request.deadline,
                    });
                }
                if !service.items.contains(&request.item) {
                    violations.push(ScheduleViolation::ItemNotTransmitted {
                        request: request.id,
                        item: request.item,
                        time: service.time,
                    });
                }
            }
            Some(_) => violations.push(ScheduleViolation::ServedTwice {
                request: request.id,
            }),
        }
    }
    violations
}
