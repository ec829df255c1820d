//! The baseline that serves every open request whenever a deadline fires.
//!
//! Triggering requests of successive services are disjoint by construction,
//! so each service is recorded as its own phase.

use std::collections::{BTreeMap, BTreeSet};

use crate::engine::{
    Decision, OnlineAlgorithm, OnlineRequestView, ProtocolViolation, ServiceContext,
};
use crate::model::{ItemId, RequestId};

#[derive(Default)]
pub struct Trivial {
    pending: BTreeMap<RequestId, OnlineRequestView>,
    scope: u32,
}

impl Trivial {
    pub fn new() -> Trivial {
        Trivial::default()
    }

    pub(crate) fn with_scope(scope: u32) -> Trivial {
        Trivial {
            scope,
            ..Trivial::default()
        }
    }
}

impl OnlineAlgorithm for Trivial {
    fn name(&self) -> String {
        "trivial".into()
    }

    fn on_arrival(&mut self, view: OnlineRequestView) {
        self.pending.insert(view.id, view);
    }

    fn on_deadline(
        &mut self,
        _request: RequestId,
        ctx: &mut ServiceContext,
    ) -> Result<Decision, ProtocolViolation> {
        ctx.set_scope(self.scope);
        ctx.mark_phase(ctx.now());
        let items: BTreeSet<ItemId> = self.pending.values().map(|view| view.item).collect();
        self.pending.clear();
        Ok(Decision { items })
    }

    fn on_external_service(&mut self, served: &BTreeSet<RequestId>) {
        for id in served {
            self.pending.remove(id);
        }
    }
}
