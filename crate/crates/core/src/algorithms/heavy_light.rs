//! Nonclairvoyant heavy/light policy.
//!
//! Item `i` is heavy when `n * w_i^2 >= w_0^2` (the exact-rational form of
//! `w_i >= w_0 / sqrt(n)`), light otherwise. Light items are grouped by
//! ascending id; a group closes at `ceil(sqrt(n))` members or as soon as
//! adding the next item would push the group weight past `w_0`, so every
//! service costs at most `2 w_0`. A heavy trigger serves just its item, a
//! light trigger serves its whole group.

use std::collections::{BTreeMap, BTreeSet};

use crate::engine::{
    Decision, ItemCatalog, OnlineAlgorithm, OnlineRequestView, ProtocolViolation, ServiceContext,
};
use crate::model::{ItemId, RequestId};
use crate::weight::{Rational, Weight};

pub struct HeavyLight {
    /// Item id -> set of items transmitted when that item triggers.
    group_of: Vec<BTreeSet<ItemId>>,
    items: BTreeMap<RequestId, ItemId>,
}

fn ceil_sqrt(n: usize) -> usize {
    let mut root = 0usize;
    while root * root < n {
        root += 1;
    }
    root
}

pub(crate) fn is_heavy(catalog: &ItemCatalog, item: ItemId) -> bool {
    let n = Rational::from_integer(catalog.item_count() as i64);
    let w = catalog.weight(item).ratio();
    let joint = catalog.joint_cost().ratio();
    n * w * w >= joint * joint
}

impl HeavyLight {
    pub fn new(catalog: &ItemCatalog) -> HeavyLight {
        let n = catalog.item_count();
        let size_cap = ceil_sqrt(n).max(1);
        let mut group_of: Vec<BTreeSet<ItemId>> = vec![BTreeSet::new(); n];

        let mut group: BTreeSet<ItemId> = BTreeSet::new();
        let mut group_weight = Weight::zero();
        let mut groups: Vec<BTreeSet<ItemId>> = Vec::new();
        for item in catalog.item_ids() {
            if is_heavy(catalog, item) {
                group_of[item.0 as usize] = BTreeSet::from([item]);
                continue;
            }
            let weight = catalog.weight(item);
            if group.len() == size_cap || group_weight + weight > catalog.joint_cost() {
                groups.push(std::mem::take(&mut group));
                group_weight = Weight::zero();
            }
            group.insert(item);
            group_weight += weight;
        }
        if !group.is_empty() {
            groups.push(group);
        }
        for members in groups {
            let weight: Weight = members.iter().map(|&i| catalog.weight(i)).sum();
            assert!(
                weight <= catalog.joint_cost(),
                "light group weight exceeds joint cost"
            );
            for &item in &members {
                group_of[item.0 as usize] = members.clone();
            }
        }
        HeavyLight {
            group_of,
            items: BTreeMap::new(),
        }
    }
}

impl OnlineAlgorithm for HeavyLight {
    fn name(&self) -> String {
        "heavy-light".into()
    }

    fn on_arrival(&mut self, view: OnlineRequestView) {
        self.items.insert(view.id, view.item);
    }

    fn on_deadline(
        &mut self,
        request: RequestId,
        _ctx: &mut ServiceContext,
    ) -> Result<Decision, ProtocolViolation> {
        let item = self.items[&request];
        Ok(Decision {
            items: self.group_of[item.0 as usize].clone(),
        })
    }
}
