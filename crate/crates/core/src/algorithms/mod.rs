//! Online policies and the post-hoc phase analyzer.

mod bucketed;
mod combine;
mod greedy;
mod heavy_light;
mod local_greedy;
mod phases;
mod trivial;

pub use bucketed::{bucket_ceiling, bucket_of, dyadic_levels, BucketIndex, BucketedLocalGreedy};
pub use combine::Combined;
pub use greedy::{ClassicGreedy, FolkloreGreedy};
pub use heavy_light::HeavyLight;
pub use local_greedy::{EligibilityAnchor, LocalGreedy, LocalGreedyConfig};
pub use phases::{analyze_phases, Phase, PhaseAnalysisError, PhaseReport, PhaseService};
pub use trivial::Trivial;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::engine::{ItemCatalog, OnlineAlgorithm, OnlineRequestView};
use crate::model::{ItemId, RequestId};

/// Registry names accepted by [`make_algorithm`], combined policies aside.
pub const ALGORITHM_NAMES: &[&str] = &[
    "classic-greedy",
    "folklore-greedy",
    "local-greedy",
    "local-greedy-arrival-anchor",
    "local-greedy-bucketed",
    "heavy-light",
    "trivial",
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown algorithm `{name}`")]
pub struct UnknownAlgorithm {
    pub name: String,
}

/// Whether [`make_algorithm`] accepts this name.
pub fn is_registered(name: &str) -> bool {
    if let Some(list) = name.strip_prefix("combined:") {
        let parts: Vec<&str> = list.split('+').collect();
        return parts.len() >= 2 && parts.iter().all(|p| ALGORITHM_NAMES.contains(p));
    }
    ALGORITHM_NAMES.contains(&name)
}

/// Instantiates a registered policy. `combined:<a>+<b>[+<c>]` builds the
/// union combiner over registered constituents.
pub fn make_algorithm(
    name: &str,
    catalog: &ItemCatalog,
) -> Result<Box<dyn OnlineAlgorithm>, UnknownAlgorithm> {
    if let Some(list) = name.strip_prefix("combined:") {
        let parts: Vec<&str> = list.split('+').collect();
        if parts.len() < 2
            || parts
                .iter()
                .any(|p| p.is_empty() || p.starts_with("combined:"))
        {
            return Err(UnknownAlgorithm {
                name: name.to_string(),
            });
        }
        let constituents = parts
            .iter()
            .map(|part| make_algorithm(part, catalog))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(Box::new(Combined::new(constituents)));
    }
    Ok(match name {
        "classic-greedy" => Box::new(ClassicGreedy::new(catalog)),
        "folklore-greedy" => Box::new(FolkloreGreedy::new(catalog)),
        "local-greedy" => Box::new(LocalGreedy::new(catalog)),
        "local-greedy-arrival-anchor" => Box::new(LocalGreedy::with_config(
            catalog,
            LocalGreedyConfig {
                eligibility_anchor: EligibilityAnchor::ArrivalOfTrigger,
            },
        )),
        "local-greedy-bucketed" => Box::new(BucketedLocalGreedy::new(catalog)),
        "heavy-light" => Box::new(HeavyLight::new(catalog)),
        "trivial" => Box::new(Trivial::new()),
        _ => {
            return Err(UnknownAlgorithm {
                name: name.to_string(),
            })
        }
    })
}

/// Pending request views held by a policy, keyed by request id.
#[derive(Clone, Debug, Default)]
pub(crate) struct PendingViews {
    views: BTreeMap<RequestId, OnlineRequestView>,
}

impl PendingViews {
    pub(crate) fn new() -> PendingViews {
        PendingViews::default()
    }

    pub(crate) fn insert(&mut self, view: OnlineRequestView) {
        self.views.insert(view.id, view);
    }

    pub(crate) fn get(&self, id: RequestId) -> Option<&OnlineRequestView> {
        self.views.get(&id)
    }

    pub(crate) fn remove_ids(&mut self, ids: &BTreeSet<RequestId>) {
        for id in ids {
            self.views.remove(id);
        }
    }

    /// Drops every view whose item was just transmitted; the engine serves
    /// exactly those requests.
    pub(crate) fn remove_on_items(&mut self, items: &BTreeSet<ItemId>) {
        self.views.retain(|_, view| !items.contains(&view.item));
    }

    /// Views in ascending predicted-deadline key order.
    pub(crate) fn sorted_by_prediction(&self, catalog: &ItemCatalog) -> Vec<OnlineRequestView> {
        let mut views: Vec<OnlineRequestView> = self.views.values().copied().collect();
        views.sort_by_key(|view| catalog.view_key(view));
        views
    }

    /// Request ids of views whose item is in `items`.
    pub(crate) fn ids_on_items(&self, items: &BTreeSet<ItemId>) -> BTreeSet<RequestId> {
        self.views
            .values()
            .filter(|view| items.contains(&view.item))
            .map(|view| view.id)
            .collect()
    }
}

/// Where the weight-budget scan stops relative to the add that reaches the
/// joint cost.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum StopRule {
    /// Break before an add that would reach the budget.
    BeforeReaching,
    /// Perform the add that reaches the budget, then break.
    AfterReaching,
}

/// Scans candidate views in the given order, accumulating distinct items
/// starting from the trigger's item, until the item weight reaches the joint
/// cost per the stop rule or the candidates run out.
pub(crate) fn greedy_scan(
    catalog: &ItemCatalog,
    trigger_item: ItemId,
    candidates: impl IntoIterator<Item = OnlineRequestView>,
    stop: StopRule,
) -> BTreeSet<ItemId> {
    let budget = catalog.joint_cost();
    let mut items = BTreeSet::from([trigger_item]);
    let mut weight = catalog.weight(trigger_item);
    for view in candidates {
        if items.contains(&view.item) {
            continue;
        }
        let next = catalog.weight(view.item);
        match stop {
            StopRule::BeforeReaching => {
                if weight + next >= budget {
                    break;
                }
                items.insert(view.item);
                weight += next;
            }
            StopRule::AfterReaching => {
                items.insert(view.item);
                weight += next;
                if weight >= budget {
                    break;
                }
            }
        }
    }
    items
}
