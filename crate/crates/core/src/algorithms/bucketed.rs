//! Local greedy over dyadic weight buckets.
//!
//! Items are partitioned by weight into buckets `B_j = {i : w_0/2^j < w_i <=
//! w_0/2^(j-1)}` for `j = 1..ceil(log2 n)`, plus a tail bucket for items with
//! `w_i <= w_0/n` (items matching both predicates stay in their dyadic
//! bucket). Each dyadic bucket runs an independent phase-local greedy whose
//! budget arithmetic sees the bucket's weights rounded up to `w_0/2^(j-1)`;
//! the tail bucket runs the trivial policy. A deadline event is routed to the
//! owning bucket only, so requests are never served across buckets.

use std::collections::{BTreeMap, BTreeSet};

use crate::algorithms::{LocalGreedy, LocalGreedyConfig, Trivial};
use crate::engine::{
    Decision, ItemCatalog, OnlineAlgorithm, OnlineRequestView, ProtocolViolation, ServiceContext,
};
use crate::model::{ItemId, RequestId};
use crate::weight::{Rational, Weight};

/// Bucket index for one item: dyadic class `1..=levels`, or the tail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum BucketIndex {
    Dyadic(u32),
    Tail,
}

/// Number of dyadic levels for `n` items: the smallest `L` with `2^L >= n`.
pub fn dyadic_levels(n: usize) -> u32 {
    let mut levels = 0u32;
    while (1usize << levels) < n {
        levels += 1;
    }
    levels
}

/// Assigns an item weight to its bucket.
pub fn bucket_of(weight: Weight, joint: Weight, levels: u32) -> BucketIndex {
    let w = weight.ratio();
    let joint = joint.ratio();
    for j in 1..=levels {
        if w * Rational::from_integer(1 << j) > joint {
            return BucketIndex::Dyadic(j);
        }
    }
    BucketIndex::Tail
}

/// Bucket ceiling `w_0 / 2^(j-1)`.
pub fn bucket_ceiling(joint: Weight, j: u32) -> Weight {
    Weight::from_ratio(joint.ratio() / Rational::from_integer(1 << (j - 1)))
        .expect("ceiling of a non-negative weight")
}

enum BucketPolicy {
    Local(LocalGreedy),
    Tail(Trivial),
}

impl BucketPolicy {
    fn as_algorithm(&mut self) -> &mut dyn OnlineAlgorithm {
        match self {
            BucketPolicy::Local(inner) => inner,
            BucketPolicy::Tail(inner) => inner,
        }
    }
}

pub struct BucketedLocalGreedy {
    /// Item id -> index into `policies`.
    route: Vec<usize>,
    policies: Vec<BucketPolicy>,
    items: BTreeMap<RequestId, ItemId>,
}

impl BucketedLocalGreedy {
    pub fn new(catalog: &ItemCatalog) -> BucketedLocalGreedy {
        let n = catalog.item_count();
        let levels = dyadic_levels(n);

        let assignment: Vec<BucketIndex> = catalog
            .item_ids()
            .map(|item| bucket_of(catalog.weight(item), catalog.joint_cost(), levels))
            .collect();
        let rounded = rounded_catalog(catalog, &assignment);

        let mut policies = Vec::new();
        let mut policy_for_bucket: BTreeMap<u32, usize> = BTreeMap::new();
        let mut tail_policy: Option<usize> = None;
        let mut route = vec![usize::MAX; n];
        for (index, bucket) in assignment.iter().enumerate() {
            let policy = match bucket {
                BucketIndex::Dyadic(j) => *policy_for_bucket.entry(*j).or_insert_with(|| {
                    policies.push(BucketPolicy::Local(LocalGreedy::with_scope(
                        &rounded,
                        LocalGreedyConfig::default(),
                        *j,
                    )));
                    policies.len() - 1
                }),
                BucketIndex::Tail => *tail_policy.get_or_insert_with(|| {
                    policies.push(BucketPolicy::Tail(Trivial::with_scope(levels + 1)));
                    policies.len() - 1
                }),
            };
            route[index] = policy;
        }
        BucketedLocalGreedy {
            route,
            policies,
            items: BTreeMap::new(),
        }
    }
}

/// Catalog in which every dyadic item's weight is rounded up to its bucket
/// ceiling; tail weights are untouched.
pub(crate) fn rounded_catalog(catalog: &ItemCatalog, assignment: &[BucketIndex]) -> ItemCatalog {
    let weights = catalog
        .item_ids()
        .zip(assignment)
        .map(|(item, bucket)| match bucket {
            BucketIndex::Dyadic(j) => bucket_ceiling(catalog.joint_cost(), *j),
            BucketIndex::Tail => catalog.weight(item),
        })
        .collect();
    catalog.with_weights(weights)
}

impl OnlineAlgorithm for BucketedLocalGreedy {
    fn name(&self) -> String {
        "local-greedy-bucketed".into()
    }

    fn on_arrival(&mut self, view: OnlineRequestView) {
        self.items.insert(view.id, view.item);
        let policy = self.route[view.item.0 as usize];
        self.policies[policy].as_algorithm().on_arrival(view);
    }

    fn on_deadline(
        &mut self,
        request: RequestId,
        ctx: &mut ServiceContext,
    ) -> Result<Decision, ProtocolViolation> {
        let item = self.items[&request];
        let policy = self.route[item.0 as usize];
        self.policies[policy]
            .as_algorithm()
            .on_deadline(request, ctx)
    }

    fn on_external_service(&mut self, served: &BTreeSet<RequestId>) {
        for policy in &mut self.policies {
            policy.as_algorithm().on_external_service(served);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{simulate, Mode};
    use crate::model::Instance;
    use crate::schedule::{schedule_cost, service_cost, validate_schedule};

    #[test]
    fn bucket_assignment_matches_dyadic_intervals() {
        // n = 4, weights {1, 1/2, 1/3, 1/5}: levels = 2.
        let joint = Weight::one();
        let levels = dyadic_levels(4);
        assert_eq!(levels, 2);
        assert_eq!(
            bucket_of(Weight::one(), joint, levels),
            BucketIndex::Dyadic(1)
        );
        assert_eq!(
            bucket_of(Weight::new(1, 2).unwrap(), joint, levels),
            BucketIndex::Dyadic(2)
        );
        assert_eq!(
            bucket_of(Weight::new(1, 3).unwrap(), joint, levels),
            BucketIndex::Dyadic(2)
        );
        assert_eq!(
            bucket_of(Weight::new(1, 5).unwrap(), joint, levels),
            BucketIndex::Tail
        );
        assert_eq!(bucket_ceiling(joint, 2), Weight::new(1, 2).unwrap());
    }

    #[test]
    fn uniform_weights_behave_like_plain_local_greedy() {
        let instance = Instance::from_parts(
            Weight::one(),
            vec![Weight::one(); 3],
            vec![
                (ItemId(0), 0, 2, 5),
                (ItemId(1), 0, 6, 3),
                (ItemId(2), 1, 8, 8),
            ],
            None,
        );
        let catalog = ItemCatalog::of(&instance);
        let mut plain = LocalGreedy::new(&catalog);
        let (expected, _) = simulate(&instance, &mut plain, Mode::Predicted).unwrap();
        let mut bucketed = BucketedLocalGreedy::new(&catalog);
        let (got, _) = simulate(&instance, &mut bucketed, Mode::Predicted).unwrap();
        assert_eq!(got, expected);
    }

    #[test]
    fn tail_services_cost_at_most_twice_the_joint_cost() {
        // All four items sit in the tail (weights <= w_0/n).
        let w = Weight::new(1, 5).unwrap();
        let instance = Instance::from_parts(
            Weight::one(),
            vec![w; 4],
            vec![
                (ItemId(0), 0, 3, 9),
                (ItemId(1), 0, 3, 8),
                (ItemId(2), 0, 7, 7),
                (ItemId(3), 2, 7, 6),
            ],
            None,
        );
        let catalog = ItemCatalog::of(&instance);
        let mut alg = BucketedLocalGreedy::new(&catalog);
        let (schedule, _) = simulate(&instance, &mut alg, Mode::Predicted).unwrap();
        assert!(validate_schedule(&schedule, &instance).is_empty());
        for service in &schedule.services {
            assert!(service_cost(service, &instance).unwrap() <= instance.joint_cost.times(2));
        }
    }

    #[test]
    fn buckets_never_serve_across_each_other() {
        let instance = Instance::from_parts(
            Weight::one(),
            vec![
                Weight::one(),
                Weight::new(1, 2).unwrap(),
                Weight::new(1, 16).unwrap(),
            ],
            vec![
                (ItemId(0), 0, 4, 4),
                (ItemId(1), 0, 4, 5),
                (ItemId(2), 0, 4, 6),
                (ItemId(1), 0, 10, 10),
            ],
            None,
        );
        let catalog = ItemCatalog::of(&instance);
        let levels = dyadic_levels(3);
        let mut alg = BucketedLocalGreedy::new(&catalog);
        let (schedule, _) = simulate(&instance, &mut alg, Mode::Predicted).unwrap();
        assert!(validate_schedule(&schedule, &instance).is_empty());
        for service in &schedule.services {
            let buckets: BTreeSet<_> = service
                .items
                .iter()
                .map(
                    |&i| match bucket_of(catalog.weight(i), catalog.joint_cost(), levels) {
                        BucketIndex::Dyadic(j) => j,
                        BucketIndex::Tail => levels + 1,
                    },
                )
                .collect();
            assert_eq!(buckets.len(), 1, "service mixes buckets: {service:?}");
        }
        let total = schedule_cost(&schedule, &instance).unwrap().total;
        assert!(total > Weight::zero());
    }
}
