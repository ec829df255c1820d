//! Instance data model: items, requests, tie-break orderings, validation.
//!
//! Times are integer ticks throughout. Repeated deadlines are legal in the
//! stored data; wherever a strict order over requests is needed (event
//! dispatch, greedy scans) the lexicographic keys of [`order_key_true`] and
//! [`order_key_pred`] stand in for the usual infinitesimal perturbation, so
//! instance files stay bit-stable.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::weight::Weight;

/// Integer time tick.
pub type Tick = i64;

/// Dense item index `0..n-1`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ItemId(pub u32);

/// Dense request index `0..m-1`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RequestId(pub u32);

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "item#{}", self.0)
    }
}

impl fmt::Debug for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "i{}", self.0)
    }
}

impl fmt::Display for RequestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "request#{}", self.0)
    }
}

impl fmt::Debug for RequestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Item {
    pub id: ItemId,
    pub weight: Weight,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Request {
    pub id: RequestId,
    pub item: ItemId,
    pub arrival: Tick,
    /// True deadline; hidden from online algorithms until it fires.
    pub deadline: Tick,
    /// Predicted deadline, delivered at arrival.
    pub predicted: Tick,
}

impl Request {
    /// Closed availability interval `[arrival, deadline]` contains `t`.
    pub fn alive_at(&self, t: Tick) -> bool {
        self.arrival <= t && t <= self.deadline
    }
}

/// A complete problem instance.
///
/// `tie_permutation[i]` is the rank of item `i` in the deadline tie-break
/// order; the default is the identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub joint_cost: Weight,
    #[serde(default)]
    pub tie_permutation: Vec<u32>,
    pub items: Vec<Item>,
    pub requests: Vec<Request>,
}

impl Instance {
    /// Builds an instance with dense ids from raw parts. `tie_permutation`
    /// defaults to the identity when `None`.
    pub fn from_parts(
        joint_cost: Weight,
        weights: Vec<Weight>,
        requests: Vec<(ItemId, Tick, Tick, Tick)>,
        tie_permutation: Option<Vec<u32>>,
    ) -> Instance {
        let items = weights
            .into_iter()
            .enumerate()
            .map(|(i, weight)| Item {
                id: ItemId(i as u32),
                weight,
            })
            .collect::<Vec<_>>();
        let tie_permutation = tie_permutation.unwrap_or_else(|| (0..items.len() as u32).collect());
        let requests = requests
            .into_iter()
            .enumerate()
            .map(|(q, (item, arrival, deadline, predicted))| Request {
                id: RequestId(q as u32),
                item,
                arrival,
                deadline,
                predicted,
            })
            .collect();
        Instance {
            joint_cost,
            tie_permutation,
            items,
            requests,
        }
    }

    pub fn item_count(&self) -> usize {
        self.items.len()
    }

    pub fn request_count(&self) -> usize {
        self.requests.len()
    }

    pub fn weight_of(&self, item: ItemId) -> Weight {
        self.items[item.0 as usize].weight
    }

    pub fn request(&self, id: RequestId) -> &Request {
        &self.requests[id.0 as usize]
    }

    /// Rank of an item in the tie-break permutation.
    pub fn tie_rank(&self, item: ItemId) -> u32 {
        self.tie_permutation[item.0 as usize]
    }

    /// Latest deadline, or 0 for an empty instance.
    pub fn horizon(&self) -> Tick {
        self.requests.iter().map(|r| r.deadline).max().unwrap_or(0)
    }

    /// Sorted distinct true deadlines.
    pub fn distinct_deadlines(&self) -> Vec<Tick> {
        let set: BTreeSet<Tick> = self.requests.iter().map(|r| r.deadline).collect();
        set.into_iter().collect()
    }

    /// Sub-instance keeping only `keep` requests, with dense re-numbered
    /// request ids. The item space is unchanged. Returns the old-to-new
    /// request id mapping alongside.
    pub fn restrict_requests(
        &self,
        keep: &BTreeSet<RequestId>,
    ) -> (Instance, Vec<(RequestId, RequestId)>) {
        let mut mapping = Vec::new();
        let mut requests = Vec::new();
        for request in &self.requests {
            if keep.contains(&request.id) {
                let new_id = RequestId(requests.len() as u32);
                mapping.push((request.id, new_id));
                requests.push(Request {
                    id: new_id,
                    ..request.clone()
                });
            }
        }
        let instance = Instance {
            joint_cost: self.joint_cost,
            tie_permutation: self.tie_permutation.clone(),
            items: self.items.clone(),
            requests,
        };
        (instance, mapping)
    }

    /// Copy of the instance with item weights replaced.
    pub fn with_item_weights(&self, weights: Vec<Weight>) -> Instance {
        assert_eq!(weights.len(), self.items.len());
        let items = self
            .items
            .iter()
            .zip(weights)
            .map(|(item, weight)| Item {
                id: item.id,
                weight,
            })
            .collect();
        Instance {
            items,
            ..self.clone()
        }
    }
}

/// Totally ordered key `(time, tie rank, request id)`; distinct for distinct
/// requests.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct OrderKey {
    pub time: Tick,
    pub rank: u32,
    pub request: u32,
}

impl OrderKey {
    pub fn new(time: Tick, rank: u32, request: RequestId) -> OrderKey {
        OrderKey {
            time,
            rank,
            request: request.0,
        }
    }
}

/// Key ordering requests by true deadline, ties broken by the instance
/// permutation and then request id.
pub fn order_key_true(request: &Request, instance: &Instance) -> OrderKey {
    OrderKey::new(
        request.deadline,
        instance.tie_rank(request.item),
        request.id,
    )
}

/// As [`order_key_true`] with the predicted deadline in place of the true one.
pub fn order_key_pred(request: &Request, instance: &Instance) -> OrderKey {
    OrderKey::new(
        request.predicted,
        instance.tie_rank(request.item),
        request.id,
    )
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceViolation {
    #[error("joint cost must be positive")]
    NonPositiveJointCost,
    #[error("{item} has non-dense id (expected {expected})")]
    NonDenseItemId { item: ItemId, expected: u32 },
    #[error("{request} has non-dense id (expected {expected})")]
    NonDenseRequestId { request: RequestId, expected: u32 },
    #[error("{item} weight exceeds joint cost")]
    ItemWeightExceedsJointCost { item: ItemId },
    #[error("{request} references unknown {item}")]
    UnknownItem { request: RequestId, item: ItemId },
    #[error("{request} deadline {deadline} before arrival {arrival}")]
    DeadlineBeforeArrival {
        request: RequestId,
        arrival: Tick,
        deadline: Tick,
    },
    #[error("{request} predicted deadline {predicted} before arrival {arrival}")]
    PredictedBeforeArrival {
        request: RequestId,
        arrival: Tick,
        predicted: Tick,
    },
    #[error("tie permutation has length {got}, expected {expected}")]
    TiePermutationLength { got: usize, expected: usize },
    #[error("tie permutation is not a bijection on item ids")]
    TiePermutationNotBijection,
}

/// Checks every instance invariant; an empty report means the instance is
/// well-formed. Violations are data, not failures.
pub fn validate_instance(instance: &Instance) -> Vec<InstanceViolation> {
    let mut violations = Vec::new();
    if instance.joint_cost <= Weight::zero() {
        violations.push(InstanceViolation::NonPositiveJointCost);
    }
    for (index, item) in instance.items.iter().enumerate() {
        if item.id.0 != index as u32 {
            violations.push(InstanceViolation::NonDenseItemId {
                item: item.id,
                expected: index as u32,
            });
        }
        if item.weight > instance.joint_cost {
            violations.push(InstanceViolation::ItemWeightExceedsJointCost { item: item.id });
        }
    }
    let n = instance.items.len();
    for (index, request) in instance.requests.iter().enumerate() {
        if request.id.0 != index as u32 {
            violations.push(InstanceViolation::NonDenseRequestId {
                request: request.id,
                expected: index as u32,
            });
        }
        if (request.item.0 as usize) >= n {
            violations.push(InstanceViolation::UnknownItem {
                request: request.id,
                item: request.item,
            });
        }
        if request.deadline < request.arrival {
            violations.push(InstanceViolation::DeadlineBeforeArrival {
                request: request.id,
                arrival: request.arrival,
                deadline: request.deadline,
            });
        }
        if request.predicted < request.arrival {
            violations.push(InstanceViolation::PredictedBeforeArrival {
                request: request.id,
                arrival: request.arrival,
                predicted: request.predicted,
            });
        }
    }
    if instance.tie_permutation.len() != n {
        violations.push(InstanceViolation::TiePermutationLength {
            got: instance.tie_permutation.len(),
            expected: n,
        });
    } else {
        let mut seen = vec![false; n];
        let mut bijective = true;
        for &rank in &instance.tie_permutation {
            match seen.get_mut(rank as usize) {
                Some(slot) if !*slot => *slot = true,
                _ => bijective = false,
            }
        }
        if !bijective {
            violations.push(InstanceViolation::TiePermutationNotBijection);
        }
    }
    violations
}
