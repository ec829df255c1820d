//! Union composition of combinable policies.
//!
//! On each deadline every constituent is asked for its decision and the union
//! is transmitted. Constituents self-update as if they alone had serviced
//! their own decision; requests the union removes beyond that are announced
//! to each constituent through `on_external_service`, in constituent order,
//! so no special engine hooks are needed.

use std::collections::BTreeSet;

use crate::algorithms::PendingViews;
use crate::engine::{
    Decision, OnlineAlgorithm, OnlineRequestView, ProtocolViolation, ServiceContext,
};
use crate::model::{ItemId, RequestId};

pub struct Combined {
    label: String,
    parts: Vec<Box<dyn OnlineAlgorithm>>,
    pending: PendingViews,
    /// Per union service, per constituent: the items of its decision that had
    /// pending requests. Feeds counterfactual cost accounting in tests and
    /// benchmarks.
    service_log: Vec<Vec<BTreeSet<ItemId>>>,
}

impl Combined {
    pub fn new(parts: Vec<Box<dyn OnlineAlgorithm>>) -> Combined {
        assert!(!parts.is_empty(), "combiner needs at least one constituent");
        let label = format!(
            "combined:{}",
            parts.iter().map(|p| p.name()).collect::<Vec<_>>().join("+")
        );
        Combined {
            label,
            parts,
            pending: PendingViews::new(),
            service_log: Vec::new(),
        }
    }

    /// Per-service, per-constituent transmitted item sets.
    pub fn service_log(&self) -> &[Vec<BTreeSet<ItemId>>] {
        &self.service_log
    }
}

impl OnlineAlgorithm for Combined {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn on_arrival(&mut self, view: OnlineRequestView) {
        self.pending.insert(view);
        for part in &mut self.parts {
            part.on_arrival(view);
        }
    }

    fn on_deadline(
        &mut self,
        request: RequestId,
        ctx: &mut ServiceContext,
    ) -> Result<Decision, ProtocolViolation> {
        let now = ctx.now();
        let trigger_item = self
            .pending
            .get(request)
            .expect("trigger must be pending")
            .item;

        let mut decisions = Vec::with_capacity(self.parts.len());
        for part in &mut self.parts {
            // Constituent trace annotations are not forwarded; phases of a
            // combined run are not analyzable per constituent.
            let mut sub_ctx = ServiceContext::new(now);
            let decision = part.on_deadline(request, &mut sub_ctx)?;
            if !decision.items.contains(&trigger_item) {
                return Err(ProtocolViolation {
                    algorithm: part.name(),
                    time: now,
                    message: format!("constituent decision omits the triggering {trigger_item}"),
                });
            }
            decisions.push(decision.items);
        }

        let union: BTreeSet<ItemId> = decisions.iter().flatten().copied().collect();
        let union_served = self.pending.ids_on_items(&union);

        let mut log_entry = Vec::with_capacity(self.parts.len());
        for (part, items) in self.parts.iter_mut().zip(&decisions) {
            let own_served = self.pending.ids_on_items(items);
            log_entry.push(
                own_served
                    .iter()
                    .map(|&q| self.pending.get(q).unwrap().item)
                    .collect(),
            );
            let extra: BTreeSet<RequestId> =
                union_served.difference(&own_served).copied().collect();
            if !extra.is_empty() {
                part.on_external_service(&extra);
            }
        }
        self.service_log.push(log_entry);
        self.pending.remove_ids(&union_served);
        Ok(Decision { items: union })
    }

    fn on_external_service(&mut self, served: &BTreeSet<RequestId>) {
        self.pending.remove_ids(served);
        for part in &mut self.parts {
            part.on_external_service(served);
        }
    }
}
