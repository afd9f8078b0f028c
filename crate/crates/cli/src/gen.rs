//! Seeded random layered DTMC generator.
//!
//! Produces models whose layer partition is a directed path: every layer is
//! a block, cross edges only go to the next layer, the last layer feeds a
//! single goal trap. Cross edges enter a layer only through a few designated
//! entry states (at most three), the rest of a layer is reached through
//! in-layer edges, so block interfaces stay small while the width is the
//! full layer size. Every row is strictly substochastic with
//! small-denominator rationals.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use treewit_core::model::{ModelKind, ProbabilisticModel, StateId};
use treewit_core::scalar::ratio;

const MAX_INTERFACE: usize = 3;

pub fn generate_layered(
    layers: usize,
    width: usize,
    seed: u64,
) -> (ProbabilisticModel, Vec<BTreeSet<StateId>>) {
    assert!(layers >= 1 && width >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = layers * width + 1;
    let goal = layers * width;
    let state = |layer: usize, slot: usize| layer * width + slot;

    // Entry slots per layer: the only cross-edge targets.
    let entries: Vec<Vec<usize>> = (0..layers)
        .map(|_| {
            let k = rng.gen_range(1..=MAX_INTERFACE.min(width));
            let mut slots: Vec<usize> = (0..width).collect();
            for i in 0..k {
                let j = rng.gen_range(i..width);
                slots.swap(i, j);
            }
            let mut chosen = slots[..k].to_vec();
            chosen.sort_unstable();
            chosen
        })
        .collect();

    let mut targets_of: BTreeMap<StateId, BTreeSet<StateId>> = BTreeMap::new();
    for layer in 0..layers {
        // In-layer spread: a random order starting from the entries; every
        // non-entry slot hangs off one or two earlier slots.
        let entry_set: BTreeSet<usize> = entries[layer].iter().copied().collect();
        let mut order: Vec<usize> = entries[layer].clone();
        let mut rest: Vec<usize> = (0..width).filter(|s| !entry_set.contains(s)).collect();
        for i in (1..rest.len()).rev() {
            let j = rng.gen_range(0..=i);
            rest.swap(i, j);
        }
        order.extend(rest);
        for pos in entry_set.len()..width {
            let preds = rng.gen_range(1..=2usize.min(pos));
            for _ in 0..preds {
                let p = order[rng.gen_range(0..pos)];
                targets_of
                    .entry(state(layer, p))
                    .or_default()
                    .insert(state(layer, order[pos]));
            }
        }
        // Cross edges: only into the next layer's entries (or the goal).
        let next: Vec<StateId> = if layer + 1 < layers {
            entries[layer + 1]
                .iter()
                .map(|&slot| state(layer + 1, slot))
                .collect()
        } else {
            vec![goal]
        };
        for &t in &next {
            let src = state(layer, rng.gen_range(0..width));
            targets_of.entry(src).or_default().insert(t);
        }
        for slot in 0..width {
            let src = state(layer, slot);
            let t = next[rng.gen_range(0..next.len())];
            targets_of.entry(src).or_default().insert(t);
        }
    }

    let mut b = ProbabilisticModel::builder(ModelKind::Dtmc, n);
    for (src, targets) in &targets_of {
        let weights: Vec<i64> = targets.iter().map(|_| rng.gen_range(1..=15)).collect();
        let total: i64 = weights.iter().sum();
        let slack: i64 = rng.gen_range(4..=32);
        for (t, w) in targets.iter().zip(weights) {
            b = b.transition(*src, *t, ratio(w, total + slack));
        }
    }
    // Initial mass sits on the first layer's entries.
    let k0 = entries[0].len() as i64;
    for &slot in &entries[0] {
        b = b.initial(state(0, slot), ratio(1, 2 * k0));
    }
    b = b.goal(goal);
    let model = b.build().expect("generated layered model is well formed");
    debug_assert!(model.validate().is_empty());

    let mut blocks: Vec<BTreeSet<StateId>> = (0..layers)
        .map(|layer| (0..width).map(|j| state(layer, j)).collect())
        .collect();
    blocks.push(BTreeSet::from([goal]));
    (model, blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use treewit_core::partition::validate_partition;

    #[test]
    fn generated_models_are_valid_paths_with_small_interfaces() {
        for seed in 0..5 {
            let (model, blocks) = generate_layered(6, 4, seed);
            assert!(model.validate().is_empty());
            let p = validate_partition(&model.underlying_graph(), &blocks).unwrap();
            assert!(p.is_path());
            assert_eq!(p.width(), 4);
            let nav = p.navigation(&model.underlying_graph(), &model.initial_support());
            for inc in &nav.inc {
                assert!(inc.len() <= MAX_INTERFACE);
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let (a, _) = generate_layered(5, 3, 42);
        let (b, _) = generate_layered(5, 3, 42);
        assert_eq!(a, b);
    }
}
