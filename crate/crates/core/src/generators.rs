//! Instance generators: the red/black and cheap/expensive adversarial
//! families, a behavior-adaptive lower-bound adversary, and seeded random
//! instances with controllable prediction noise.

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::engine::{simulate, ItemCatalog, Mode, OnlineAlgorithm, SimError, Trace};
use crate::metrics;
use crate::model::{Instance, ItemId, RequestId, Tick};
use crate::schedule::{Schedule, Service};
use crate::weight::{Rational, Weight};

/// Red/black instance: `2k` items of weight `1/k` under joint cost 1.
///
/// Black items occupy ids `0..k` and each receives `k` requests, the `j`-th
/// (1-based) arriving at `2j-1` with deadline `3k` and predicted deadline
/// `2j+1`. Red items occupy ids `k..2k`; red item `i` (1-based) has a single
/// request with arrival 0 and true and predicted deadline `2i`. Every red
/// item beyond the first is inverted with every black item.
pub fn gen_red_black(k: u32) -> Instance {
    assert!(k >= 1, "red/black requires k >= 1");
    let weight = Weight::new(1, i64::from(k)).expect("1/k");
    let weights = vec![weight; 2 * k as usize];
    let mut requests = Vec::new();
    for i in 1..=i64::from(k) {
        let red = ItemId(k + (i - 1) as u32);
        requests.push((red, 0, 2 * i, 2 * i));
    }
    for black in 0..k {
        for j in 1..=i64::from(k) {
            requests.push((ItemId(black), 2 * j - 1, 3 * i64::from(k), 2 * j + 1));
        }
    }
    Instance::from_parts(Weight::one(), weights, requests, None)
}

/// The known two-service optimum for [`gen_red_black`]: all reds at time 0,
/// all blacks at time `3k`. Total cost 4 for every `k`.
pub fn red_black_witness(instance: &Instance) -> Schedule {
    let k = instance.item_count() as u32 / 2;
    let reds: BTreeSet<ItemId> = (k..2 * k).map(ItemId).collect();
    let blacks: BTreeSet<ItemId> = (0..k).map(ItemId).collect();
    let red_requests: BTreeSet<RequestId> = instance
        .requests
        .iter()
        .filter(|r| r.item.0 >= k)
        .map(|r| r.id)
        .collect();
    let black_requests: BTreeSet<RequestId> = instance
        .requests
        .iter()
        .filter(|r| r.item.0 < k)
        .map(|r| r.id)
        .collect();
    Schedule {
        services: vec![
            Service {
                time: 0,
                items: reds,
                served: red_requests,
            },
            Service {
                time: 3 * i64::from(k),
                items: blacks,
                served: black_requests,
            },
        ],
    }
}

/// Cheap/expensive instance on `2n` items: cheap items (ids `0..n`, weight
/// `1/n`) and expensive items (ids `n..2n`, weight 1) under joint cost 1.
///
/// Requests come in `n` phases; phase `i` (1-based) starts at
/// `t_i = 2n(i-1)`. In each phase every cheap item `c_j` gets a request with
/// true and predicted deadline `t_i + 2(j-1)`, and every expensive item `e_j`
/// gets a request with true deadline `3n^2` and predicted deadline
/// `t_i + 2(j-1) + 1`, so `c_j` is inverted with `e_j'` for every `j' < j`.
pub fn gen_cheap_expensive(n: u32) -> Instance {
    assert!(n >= 2, "cheap/expensive requires n >= 2");
    let cheap = Weight::new(1, i64::from(n)).expect("1/n");
    let mut weights = vec![cheap; n as usize];
    weights.extend(vec![Weight::one(); n as usize]);
    let far = 3 * i64::from(n) * i64::from(n);
    let mut requests = Vec::new();
    for phase in 0..i64::from(n) {
        let start = 2 * i64::from(n) * phase;
        for j in 0..i64::from(n) {
            let expensive = ItemId(n + j as u32);
            requests.push((expensive, start, far, start + 2 * j + 1));
            let cheap_item = ItemId(j as u32);
            requests.push((cheap_item, start, start + 2 * j, start + 2 * j));
        }
    }
    Instance::from_parts(Weight::one(), weights, requests, None)
}

/// The known witness for [`gen_cheap_expensive`]: one service for the cheap
/// requests at the start of each phase plus one service for every expensive
/// request at the common far deadline. Total cost `3n + 1`.
pub fn cheap_expensive_witness(instance: &Instance) -> Schedule {
    let n = instance.item_count() as u32 / 2;
    let far = 3 * i64::from(n) * i64::from(n);
    let cheap_items: BTreeSet<ItemId> = (0..n).map(ItemId).collect();
    let mut services = Vec::new();
    for phase in 0..i64::from(n) {
        let start = 2 * i64::from(n) * phase;
        let served: BTreeSet<RequestId> = instance
            .requests
            .iter()
            .filter(|r| r.item.0 < n && r.arrival == start)
            .map(|r| r.id)
            .collect();
        services.push(Service {
            time: start,
            items: cheap_items.clone(),
            served,
        });
    }
    let expensive_items: BTreeSet<ItemId> = (n..2 * n).map(ItemId).collect();
    let expensive_requests: BTreeSet<RequestId> = instance
        .requests
        .iter()
        .filter(|r| r.item.0 >= n)
        .map(|r| r.id)
        .collect();
    services.push(Service {
        time: far,
        items: expensive_items,
        served: expensive_requests,
    });
    Schedule { services }
}

/// Prediction noise applied by [`gen_random`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NoiseModel {
    /// Predicted deadlines equal true deadlines.
    Exact,
    /// Each prediction is the deadline plus a uniform offset in
    /// `[-max_offset, max_offset]`, clamped to not precede the arrival.
    Shift { max_offset: i64 },
    /// Random prediction swaps until the raw request-inversion count reaches
    /// `budget` or the swap cap runs out; the achieved count is reported.
    TargetInversions { budget: u64, seed: u64 },
}

#[derive(Clone, Debug)]
pub struct RandomConfig {
    pub items: u32,
    pub requests: u32,
    pub horizon: Tick,
    /// Weights are drawn from the grid `{1/g, 2/g, ..., g/g}`.
    pub weight_grid: u32,
    pub noise: NoiseModel,
    pub seed: u64,
}

impl RandomConfig {
    pub fn new(items: u32, requests: u32, horizon: Tick, seed: u64) -> RandomConfig {
        RandomConfig {
            items,
            requests,
            horizon,
            weight_grid: 8,
            noise: NoiseModel::Exact,
            seed,
        }
    }

    pub fn with_noise(mut self, noise: NoiseModel) -> RandomConfig {
        self.noise = noise;
        self
    }
}

#[derive(Clone, Debug)]
pub struct RandomOutcome {
    pub instance: Instance,
    /// Achieved raw request-inversion count, reported for
    /// [`NoiseModel::TargetInversions`] (which may fall short of its budget).
    pub achieved_request_inversions: Option<u64>,
}

/// Seeded random instance under joint cost 1: arrivals uniform in the
/// horizon, deadlines uniform in `[arrival, horizon]`, weights from a uniform
/// rational grid, predictions per the noise model. Deterministic in the seed.
pub fn gen_random(config: &RandomConfig) -> RandomOutcome {
    assert!(config.items >= 1 && config.requests >= 1 && config.horizon >= 1);
    assert!(config.weight_grid >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let grid = i64::from(config.weight_grid);
    let weights: Vec<Weight> = (0..config.items)
        .map(|_| Weight::new(rng.random_range(1..=grid), grid).expect("grid weight"))
        .collect();
    let mut requests = Vec::new();
    for _ in 0..config.requests {
        let item = ItemId(rng.random_range(0..config.items));
        let arrival = rng.random_range(0..=config.horizon);
        let deadline = rng.random_range(arrival..=config.horizon);
        let predicted = match config.noise {
            NoiseModel::Shift { max_offset } => {
                (deadline + rng.random_range(-max_offset..=max_offset)).max(arrival)
            }
            _ => deadline,
        };
        requests.push((item, arrival, deadline, predicted));
    }
    let mut instance = Instance::from_parts(Weight::one(), weights, requests, None);
    let achieved = match config.noise {
        NoiseModel::TargetInversions { budget, seed } => {
            Some(swap_predictions_toward(&mut instance, budget, seed))
        }
        _ => None,
    };
    RandomOutcome {
        instance,
        achieved_request_inversions: achieved,
    }
}

/// Applies random legal prediction swaps until the raw request-inversion
/// count reaches `budget` or the attempt cap runs out; returns the achieved
/// count.
fn swap_predictions_toward(instance: &mut Instance, budget: u64, seed: u64) -> u64 {
    let m = instance.request_count();
    let mut achieved = metrics::request_inversions(instance).len() as u64;
    if m < 2 {
        return achieved;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap = 200 + 20 * budget;
    for _ in 0..cap {
        if achieved >= budget {
            break;
        }
        let a = rng.random_range(0..m);
        let b = rng.random_range(0..m);
        if a == b {
            continue;
        }
        let (pa, pb) = (
            instance.requests[a].predicted,
            instance.requests[b].predicted,
        );
        // A swap is legal only if both predictions stay at or after arrival.
        if pb < instance.requests[a].arrival || pa < instance.requests[b].arrival {
            continue;
        }
        instance.requests[a].predicted = pb;
        instance.requests[b].predicted = pa;
        achieved = metrics::request_inversions(instance).len() as u64;
    }
    achieved
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdversaryCase {
    /// The algorithm served few requests per service; all deadlines equal
    /// their predictions and the instance carries no inversions.
    Case1NoInversions,
    /// The algorithm batched many requests per service; deadlines of
    /// early-served requests are pushed past every phase, creating at most
    /// `c * n^(3/2)` item inversions.
    Case2ManyInversions,
}

#[derive(Clone, Debug)]
pub struct AdversaryOutcome {
    pub instance: Instance,
    pub case: AdversaryCase,
    /// Services the algorithm performed in each phase.
    pub per_phase_service_count: u32,
    /// Number of phases (equals the item count).
    pub phases: u32,
}

#[derive(Debug, Error)]
pub enum AdversaryError {
    #[error("adversary requires a perfect-square item count, got {n}")]
    NotPerfectSquare { n: u32 },
    #[error("adversary requires c >= 1, got {c}")]
    RatioBelowOne { c: Rational },
    #[error(
        "algorithm is not behaviorally repeating: phase {phase} diverges from phase 0 ({detail})"
    )]
    TranscriptDivergence { phase: u32, detail: String },
    #[error("adversary replay mismatch: emitted instance does not reproduce the probed run")]
    ReplayMismatch,
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, PartialEq, Eq)]
struct PhaseStep {
    offset: Tick,
    trigger_item: ItemId,
    decided: BTreeSet<ItemId>,
    served_items: BTreeSet<ItemId>,
}

/// Adaptive lower-bound construction against a deterministic, behaviorally
/// repeating algorithm.
///
/// Runs `n` phases on `n` items of weight `1/sqrt(n)`; phase `r` starts at
/// `2rn` and releases one request per item with predicted deadline
/// `start + i` for item index `i-1`. A request still pending at its predicted
/// deadline receives that tick as its true deadline and triggers a service.
/// After probing, the per-phase service count decides the case: if the
/// average number of requests per service is at most `sqrt(n)/c` the
/// early-served requests keep their predicted deadlines (no inversions),
/// otherwise their deadlines move to `3sn + start + i`.
///
/// The same algorithm instance runs through all phases and its per-phase
/// transcripts must be identical; a divergence is an error rather than an
/// assumption.
pub fn gen_adversary<F>(make: F, n: u32, c: Rational) -> Result<AdversaryOutcome, AdversaryError>
where
    F: Fn(&ItemCatalog) -> Box<dyn OnlineAlgorithm>,
{
    let sqrt = (n as f64).sqrt().round() as u32;
    if sqrt == 0 || sqrt * sqrt != n {
        return Err(AdversaryError::NotPerfectSquare { n });
    }
    if c < Rational::from_integer(1) {
        return Err(AdversaryError::RatioBelowOne { c });
    }
    let phases = n;

    // Probe instance: every deadline equals its prediction, so the engine
    // reveals exactly the deadlines the adaptive adversary would.
    let weights = vec![Weight::new(1, i64::from(sqrt)).expect("1/sqrt(n)"); n as usize];
    let mut requests = Vec::new();
    for phase in 0..i64::from(phases) {
        let start = 2 * phase * i64::from(n);
        for i in 0..i64::from(n) {
            requests.push((ItemId(i as u32), start, start + i + 1, start + i + 1));
        }
    }
    let probe = Instance::from_parts(Weight::one(), weights, requests, None);

    let catalog = ItemCatalog::of(&probe);
    let mut algorithm = make(&catalog);
    let (schedule, trace) = simulate(&probe, algorithm.as_mut(), Mode::Predicted)?;

    let transcripts = phase_transcripts(&probe, &trace, phases);
    for (phase, transcript) in transcripts.iter().enumerate().skip(1) {
        if transcript != &transcripts[0] {
            return Err(AdversaryError::TranscriptDivergence {
                phase: phase as u32,
                detail: first_difference(&transcripts[0], transcript),
            });
        }
    }
    let services_per_phase = transcripts[0].len() as u32;

    // Average requests per service <= sqrt(n)/c, cross-multiplied exactly:
    // c * n <= x * sqrt(n).
    let served_per_phase = i64::from(n);
    let lhs = c * Rational::from_integer(served_per_phase);
    let rhs = Rational::from_integer(i64::from(services_per_phase) * i64::from(sqrt));
    let case = if lhs <= rhs {
        AdversaryCase::Case1NoInversions
    } else {
        AdversaryCase::Case2ManyInversions
    };

    let mut instance = probe.clone();
    if case == AdversaryCase::Case2ManyInversions {
        let triggering: BTreeSet<RequestId> = trace.services().map(|s| s.trigger).collect();
        let far_base = 3 * i64::from(phases) * i64::from(n);
        for request in &mut instance.requests {
            if !triggering.contains(&request.id) {
                request.deadline = far_base + request.predicted;
            }
        }
        // The far deadlines must not disturb the run they were derived from.
        let mut fresh = make(&catalog);
        let (replayed, _) = simulate(&instance, fresh.as_mut(), Mode::Predicted)?;
        if replayed != schedule {
            return Err(AdversaryError::ReplayMismatch);
        }
    }

    Ok(AdversaryOutcome {
        instance,
        case,
        per_phase_service_count: services_per_phase,
        phases,
    })
}

/// Infers the adversary case back from an emitted instance: any deadline past
/// the last phase marks case 2.
pub fn adversary_case_of(instance: &Instance) -> AdversaryCase {
    let n = instance.item_count() as i64;
    let phase_end = 2 * (n - 1) * n + n;
    if instance.requests.iter().any(|r| r.deadline > phase_end) {
        AdversaryCase::Case2ManyInversions
    } else {
        AdversaryCase::Case1NoInversions
    }
}

fn phase_transcripts(instance: &Instance, trace: &Trace, phases: u32) -> Vec<Vec<PhaseStep>> {
    let n = instance.item_count() as i64;
    let mut transcripts: Vec<Vec<PhaseStep>> = (0..phases).map(|_| Vec::new()).collect();
    for record in trace.services() {
        let phase = (record.time / (2 * n)) as usize;
        let start = 2 * n * phase as i64;
        transcripts[phase].push(PhaseStep {
            offset: record.time - start,
            trigger_item: instance.request(record.trigger).item,
            decided: record.decided.clone(),
            served_items: record
                .served
                .iter()
                .map(|&q| instance.request(q).item)
                .collect(),
        });
    }
    transcripts
}

fn first_difference(reference: &[PhaseStep], other: &[PhaseStep]) -> String {
    if reference.len() != other.len() {
        return format!("{} services vs {}", other.len(), reference.len());
    }
    for (index, (a, b)) in reference.iter().zip(other).enumerate() {
        if a != b {
            return format!("service {index}: {b:?} vs {a:?}");
        }
    }
    "identical".into()
}
