//! The two budget-scan greedy baselines.
//!
//! Both react to a deadline by scanning every pending request in ascending
//! predicted-deadline order and accumulating items against the joint-cost
//! budget. They differ only in the stopping rule: the classic variant breaks
//! before an add that would reach the budget, the folklore variant performs
//! that add and then breaks.

use std::collections::BTreeSet;

use crate::algorithms::{greedy_scan, PendingViews, StopRule};
use crate::engine::{
    Decision, ItemCatalog, OnlineAlgorithm, OnlineRequestView, ProtocolViolation, ServiceContext,
};
use crate::model::RequestId;

pub struct ClassicGreedy {
    catalog: ItemCatalog,
    pending: PendingViews,
}

impl ClassicGreedy {
    pub fn new(catalog: &ItemCatalog) -> ClassicGreedy {
        ClassicGreedy {
            catalog: catalog.clone(),
            pending: PendingViews::new(),
        }
    }
}

impl OnlineAlgorithm for ClassicGreedy {
    fn name(&self) -> String {
        "classic-greedy".into()
    }

    fn on_arrival(&mut self, view: OnlineRequestView) {
        self.pending.insert(view);
    }

    fn on_deadline(
        &mut self,
        request: RequestId,
        _ctx: &mut ServiceContext,
    ) -> Result<Decision, ProtocolViolation> {
        let trigger = *self.pending.get(request).expect("trigger must be pending");
        let items = greedy_scan(
            &self.catalog,
            trigger.item,
            self.pending.sorted_by_prediction(&self.catalog),
            StopRule::BeforeReaching,
        );
        self.pending.remove_on_items(&items);
        Ok(Decision { items })
    }

    fn on_external_service(&mut self, served: &BTreeSet<RequestId>) {
        self.pending.remove_ids(served);
    }
}

pub struct FolkloreGreedy {
    catalog: ItemCatalog,
    pending: PendingViews,
}

impl FolkloreGreedy {
    pub fn new(catalog: &ItemCatalog) -> FolkloreGreedy {
        FolkloreGreedy {
            catalog: catalog.clone(),
            pending: PendingViews::new(),
        }
    }
}

impl OnlineAlgorithm for FolkloreGreedy {
    fn name(&self) -> String {
        "folklore-greedy".into()
    }

    fn on_arrival(&mut self, view: OnlineRequestView) {
        self.pending.insert(view);
    }

    fn on_deadline(
        &mut self,
        request: RequestId,
        _ctx: &mut ServiceContext,
    ) -> Result<Decision, ProtocolViolation> {
        let trigger = *self.pending.get(request).expect("trigger must be pending");
        let items = greedy_scan(
            &self.catalog,
            trigger.item,
            self.pending.sorted_by_prediction(&self.catalog),
            StopRule::AfterReaching,
        );
        self.pending.remove_on_items(&items);
        Ok(Decision { items })
    }

    fn on_external_service(&mut self, served: &BTreeSet<RequestId>) {
        self.pending.remove_ids(served);
    }
}
