//! Phase-local greedy policy.
//!
//! The policy tracks phases: a new phase starts when a deadline fires for a
//! request that arrived after the current phase anchor. Within a phase only
//! requests that had arrived by the anchor are eligible for the budget scan,
//! so requests released mid-phase are deferred to the next phase.

use std::collections::BTreeSet;

use crate::algorithms::{greedy_scan, PendingViews, StopRule};
use crate::engine::{
    Decision, ItemCatalog, OnlineAlgorithm, OnlineRequestView, ProtocolViolation, ServiceContext,
};
use crate::model::{RequestId, Tick};

/// Which tick a new phase is anchored at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EligibilityAnchor {
    /// Anchor at the deadline of the phase-opening trigger.
    #[default]
    DeadlineOfTrigger,
    /// Anchor at the arrival of the phase-opening trigger.
    ArrivalOfTrigger,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct LocalGreedyConfig {
    pub eligibility_anchor: EligibilityAnchor,
}

pub struct LocalGreedy {
    catalog: ItemCatalog,
    config: LocalGreedyConfig,
    pending: PendingViews,
    /// Current phase anchor; `None` before the first phase.
    anchor: Option<Tick>,
    scope: u32,
}

impl LocalGreedy {
    pub fn new(catalog: &ItemCatalog) -> LocalGreedy {
        LocalGreedy::with_config(catalog, LocalGreedyConfig::default())
    }

    pub fn with_config(catalog: &ItemCatalog, config: LocalGreedyConfig) -> LocalGreedy {
        LocalGreedy {
            catalog: catalog.clone(),
            config,
            pending: PendingViews::new(),
            anchor: None,
            scope: 0,
        }
    }

    /// Same policy tagged with a trace scope; used by the bucketed variant to
    /// keep per-bucket phases separable.
    pub(crate) fn with_scope(
        catalog: &ItemCatalog,
        config: LocalGreedyConfig,
        scope: u32,
    ) -> LocalGreedy {
        LocalGreedy {
            scope,
            ..LocalGreedy::with_config(catalog, config)
        }
    }
}

impl OnlineAlgorithm for LocalGreedy {
    fn name(&self) -> String {
        match self.config.eligibility_anchor {
            EligibilityAnchor::DeadlineOfTrigger => "local-greedy".into(),
            EligibilityAnchor::ArrivalOfTrigger => "local-greedy-arrival-anchor".into(),
        }
    }

    fn on_arrival(&mut self, view: OnlineRequestView) {
        self.pending.insert(view);
    }

    fn on_deadline(
        &mut self,
        request: RequestId,
        ctx: &mut ServiceContext,
    ) -> Result<Decision, ProtocolViolation> {
        ctx.set_scope(self.scope);
        let trigger = *self.pending.get(request).expect("trigger must be pending");

        let starts_phase = match self.anchor {
            None => true,
            Some(anchor) => trigger.arrival > anchor,
        };
        if starts_phase {
            let anchor = match self.config.eligibility_anchor {
                EligibilityAnchor::DeadlineOfTrigger => ctx.now(),
                EligibilityAnchor::ArrivalOfTrigger => trigger.arrival,
            };
            self.anchor = Some(anchor);
            ctx.mark_phase(anchor);
        }
        let anchor = self.anchor.expect("anchor set above");

        let eligible = self
            .pending
            .sorted_by_prediction(&self.catalog)
            .into_iter()
            .filter(|view| view.arrival <= anchor);
        let items = greedy_scan(
            &self.catalog,
            trigger.item,
            eligible,
            StopRule::AfterReaching,
        );
        self.pending.remove_on_items(&items);
        Ok(Decision { items })
    }

    fn on_external_service(&mut self, served: &BTreeSet<RequestId>) {
        self.pending.remove_ids(served);
    }
}
