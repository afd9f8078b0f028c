//! Layered Markov chains generated from normalized nonnegative 3-MCP
//! instances.
//!
//! The first variant realises matrix selection directly: each layer holds a
//! left and a right state triple, both wired to the whole next layer with
//! the entries of the layer's matrix pair, so a subsystem keeping one triple
//! per layer reaches the goal with probability `iota * M_.. * f`. The second
//! variant threads a probability-`gamma` cycle through every triple and
//! rewires the cross-layer edges so that an intact cycle still realises the
//! original matrix while breaking any cycle caps the reachability far below
//! every selection value; that separation is what makes subsystems encoding
//! selections optimal among equal-sized ones.
//!
//! The cross-layer edge carrying `M[u][v]` in the cycled variant has
//! probability `M[u][v] - gamma * M[u+1][v]` (second index cyclic): solving
//! the three cycle equations per target column reproduces `M` exactly, and
//! the entry range of normalized instances keeps every edge strictly inside
//! `(0, (1-gamma)/6)`.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::mcp::{McpInstance, NormalizedInstance, RatMatrix};
use crate::model::{ModelKind, ProbabilisticModel, StateId};
use crate::partition::{validate_partition, DirectedTreePartition, PartitionError};
use crate::reach::{initial_value, reach_value_exact, ReachError, ReachMode};
use crate::scalar::{int, pow, ratio, BigRational};

#[derive(Debug, Error)]
pub enum ChainError {
    #[error("instance entries are not within [1/12 - eps, 1/12]")]
    NotNormalized,
    #[error("selection length {got} does not match layer count {expected}")]
    SigmaLength { expected: usize, got: usize },
    #[error("no admissible cycle probability: interval ({lo}, {hi}) is empty")]
    NoAdmissibleGamma { lo: BigRational, hi: BigRational },
    #[error("subsystem must have {expected} states including the goal")]
    BadSubsystemSize { expected: usize },
    #[error("subsystem must contain the goal state")]
    GoalMissing,
    #[error("subsystem is good, not bad")]
    NotBad,
    #[error("operation requires the cycled chain variant")]
    WrongVariant,
    #[error("generated chain failed validation: {0}")]
    InvalidChain(String),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Reach(#[from] ReachError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChainVariant {
    Plain,
    Cycled { gamma: BigRational },
}

/// A generated hardness chain plus the instance it encodes.
#[derive(Debug, Clone)]
pub struct LayeredChain {
    pub model: ProbabilisticModel,
    pub variant: ChainVariant,
    pub instance: McpInstance,
    pub eps: BigRational,
    n: usize,
}

impl LayeredChain {
    /// Number of matrix layers.
    pub fn n_layers(&self) -> usize {
        self.n
    }

    /// Left triple of layer `i` (1-based).
    pub fn left(&self, i: usize) -> [StateId; 3] {
        debug_assert!((1..=self.n).contains(&i));
        let base = 6 * (i - 1);
        [base, base + 1, base + 2]
    }

    /// Right triple of layer `i` (1-based).
    pub fn right(&self, i: usize) -> [StateId; 3] {
        debug_assert!((1..=self.n).contains(&i));
        let base = 6 * (i - 1) + 3;
        [base, base + 1, base + 2]
    }

    pub fn final_triple(&self) -> [StateId; 3] {
        [6 * self.n, 6 * self.n + 1, 6 * self.n + 2]
    }

    pub fn goal_state(&self) -> StateId {
        6 * self.n + 3
    }

    pub fn n_states(&self) -> usize {
        6 * self.n + 4
    }

    /// The layer partition: one block per layer (left and right triple
    /// together), one for the final triple, one for the goal.
    pub fn layer_blocks(&self) -> Vec<BTreeSet<StateId>> {
        let mut blocks = Vec::with_capacity(self.n + 2);
        for i in 1..=self.n {
            let mut b: BTreeSet<StateId> = self.left(i).into_iter().collect();
            b.extend(self.right(i));
            blocks.push(b);
        }
        blocks.push(self.final_triple().into_iter().collect());
        blocks.push(BTreeSet::from([self.goal_state()]));
        blocks
    }

    /// Validated layer partition (a path of width 6).
    pub fn layer_partition(&self) -> Result<DirectedTreePartition, ChainError> {
        Ok(validate_partition(
            &self.model.underlying_graph(),
            &self.layer_blocks(),
        )?)
    }

    /// The subsystem encoding a selection: one triple per layer, the final
    /// triple and the goal. `3n + 4` states.
    pub fn good_subsystem(&self, sigma: &[bool]) -> Result<BTreeSet<StateId>, ChainError> {
        if sigma.len() != self.n {
            return Err(ChainError::SigmaLength {
                expected: self.n,
                got: sigma.len(),
            });
        }
        let mut s: BTreeSet<StateId> = self.final_triple().into_iter().collect();
        s.insert(self.goal_state());
        for (i, &pick) in sigma.iter().enumerate() {
            let triple = if pick { self.right(i + 1) } else { self.left(i + 1) };
            s.extend(triple);
        }
        Ok(s)
    }

    pub fn is_good(&self, kept: &BTreeSet<StateId>) -> bool {
        if !kept.contains(&self.goal_state()) {
            return false;
        }
        if !self.final_triple().iter().all(|s| kept.contains(s)) {
            return false;
        }
        if kept.len() != 3 * self.n + 4 {
            return false;
        }
        (1..=self.n).all(|i| {
            let l = self.left(i).iter().filter(|s| kept.contains(s)).count();
            let r = self.right(i).iter().filter(|s| kept.contains(s)).count();
            (l == 3 && r == 0) || (l == 0 && r == 3)
        })
    }

    /// Exact lower bound on the value of every good subsystem:
    /// `3^(n+1) * (1/12 - eps)^(n+2)`. Each of the `3^(n+1)` expansion terms
    /// of `iota * M_.. * f` multiplies `n+2` entries, all at least the floor.
    pub fn good_value_lower_bound(&self) -> BigRational {
        let floor = ratio(1, 12) - &self.eps;
        pow(&int(3), self.n + 1) * pow(&floor, self.n + 2)
    }
}

fn check_normalized(norm: &NormalizedInstance) -> Result<(), ChainError> {
    let floor = norm.entry_floor();
    let ceil = ratio(1, 12);
    let ok = |v: &BigRational| *v >= floor && *v <= ceil;
    let inst = &norm.instance;
    let fine = inst.dim == 3
        && !inst.is_empty()
        && inst.iota.iter().all(ok)
        && inst.fin.iter().all(ok)
        && inst
            .pairs
            .iter()
            .all(|(a, b)| a.entries().iter().all(ok) && b.entries().iter().all(ok));
    if fine {
        Ok(())
    } else {
        Err(ChainError::NotNormalized)
    }
}

/// Build the plain selection chain.
pub fn build_plain_chain(norm: &NormalizedInstance) -> Result<LayeredChain, ChainError> {
    check_normalized(norm)?;
    let inst = norm.instance.clone();
    let n = inst.len();
    let chain = LayeredChain {
        model: ProbabilisticModel::builder(ModelKind::Dtmc, 1).build().unwrap(),
        variant: ChainVariant::Plain,
        instance: inst,
        eps: norm.eps.clone(),
        n,
    };
    let mut b = ProbabilisticModel::builder(ModelKind::Dtmc, chain.n_states());
    for i in 1..=n {
        let (m0, m1) = &chain.instance.pairs[i - 1];
        let next: Vec<[StateId; 3]> = if i < n {
            vec![chain.left(i + 1), chain.right(i + 1)]
        } else {
            vec![chain.final_triple()]
        };
        for u in 0..3 {
            for target in &next {
                for v in 0..3 {
                    b = b.transition(chain.left(i)[u], target[v], m0.get(u, v).clone());
                    b = b.transition(chain.right(i)[u], target[v], m1.get(u, v).clone());
                }
            }
        }
    }
    for u in 0..3 {
        b = b.transition(
            chain.final_triple()[u],
            chain.goal_state(),
            chain.instance.fin[u].clone(),
        );
        b = b.initial(chain.left(1)[u], chain.instance.iota[u].clone());
        b = b.initial(chain.right(1)[u], chain.instance.iota[u].clone());
    }
    b = b.goal(chain.goal_state());
    let model = b.build().map_err(|e| ChainError::InvalidChain(e.to_string()))?;
    finish_chain(chain, model)
}

/// Admissible cycle probability. `1 - gamma` sits at the midpoint of
/// `(12 eps, 3^n (1/12 - eps)^(n+2))`; the upper end is a third of the loose
/// bound `1/3 (3(1/12 - eps))^(n+2)`, which keeps `3(1 - gamma)` strictly
/// below the good-subsystem value floor `3^(n+1) (1/12 - eps)^(n+2)`.
pub fn gamma_choice(norm: &NormalizedInstance) -> Result<BigRational, ChainError> {
    let n = norm.len();
    let floor = norm.entry_floor();
    let lo = int(12) * &norm.eps;
    let hi = pow(&int(3), n) * pow(&floor, n + 2);
    if lo >= hi {
        return Err(ChainError::NoAdmissibleGamma { lo, hi });
    }
    let one_minus_gamma = (&lo + &hi) / int(2);
    Ok(BigRational::one() - one_minus_gamma)
}

/// Edge matrix of the cycle gadget realising `m`: entry `(u, v)` is
/// `m[u][v] - gamma * m[u+1][v]` with the row index cyclic.
fn gadget_edges(m: &RatMatrix, gamma: &BigRational) -> RatMatrix {
    let mut out = RatMatrix::zeros(3);
    for u in 0..3 {
        for v in 0..3 {
            let direct = m.get(u, v);
            let shifted = m.get((u + 1) % 3, v);
            out.set(u, v, direct - gamma * shifted);
        }
    }
    out
}

fn gadget_final(f: &[BigRational], gamma: &BigRational) -> Vec<BigRational> {
    (0..3).map(|u| &f[u] - gamma * &f[(u + 1) % 3]).collect()
}

/// Build the cycled chain. Every triple carries the three `gamma` cycle
/// edges; cross-layer and final edges use the gadget entries, all of which
/// must be strictly positive and below `(1-gamma)/6`.
pub fn build_cycled_chain(norm: &NormalizedInstance) -> Result<LayeredChain, ChainError> {
    check_normalized(norm)?;
    let gamma = gamma_choice(norm)?;
    let inst = norm.instance.clone();
    let n = inst.len();
    let chain = LayeredChain {
        model: ProbabilisticModel::builder(ModelKind::Dtmc, 1).build().unwrap(),
        variant: ChainVariant::Cycled {
            gamma: gamma.clone(),
        },
        instance: inst,
        eps: norm.eps.clone(),
        n,
    };

    let edge_cap = (BigRational::one() - &gamma) / int(6);
    let check_edge = |v: &BigRational| *v > BigRational::zero() && *v < edge_cap;

    let mut b = ProbabilisticModel::builder(ModelKind::Dtmc, chain.n_states());
    let mut triples: Vec<[StateId; 3]> = Vec::new();
    for i in 1..=n {
        triples.push(chain.left(i));
        triples.push(chain.right(i));
    }
    triples.push(chain.final_triple());
    for t in &triples {
        for u in 0..3 {
            b = b.transition(t[u], t[(u + 1) % 3], gamma.clone());
        }
    }
    for i in 1..=n {
        let (m0, m1) = &chain.instance.pairs[i - 1];
        let e0 = gadget_edges(m0, &gamma);
        let e1 = gadget_edges(m1, &gamma);
        if !e0.entries().iter().all(check_edge) || !e1.entries().iter().all(check_edge) {
            return Err(ChainError::InvalidChain(
                "cycled gadget edge escaped (0, (1-gamma)/6)".into(),
            ));
        }
        let next: Vec<[StateId; 3]> = if i < n {
            vec![chain.left(i + 1), chain.right(i + 1)]
        } else {
            vec![chain.final_triple()]
        };
        for u in 0..3 {
            for target in &next {
                for v in 0..3 {
                    b = b.transition(chain.left(i)[u], target[v], e0.get(u, v).clone());
                    b = b.transition(chain.right(i)[u], target[v], e1.get(u, v).clone());
                }
            }
        }
    }
    let ef = gadget_final(&chain.instance.fin, &gamma);
    if !ef.iter().all(check_edge) {
        return Err(ChainError::InvalidChain(
            "cycled final edge escaped (0, (1-gamma)/6)".into(),
        ));
    }
    for u in 0..3 {
        b = b.transition(chain.final_triple()[u], chain.goal_state(), ef[u].clone());
        b = b.initial(chain.left(1)[u], chain.instance.iota[u].clone());
        b = b.initial(chain.right(1)[u], chain.instance.iota[u].clone());
    }
    b = b.goal(chain.goal_state());
    let model = b.build().map_err(|e| ChainError::InvalidChain(e.to_string()))?;
    finish_chain(chain, model)
}

fn finish_chain(mut chain: LayeredChain, model: ProbabilisticModel) -> Result<LayeredChain, ChainError> {
    let violations = model.validate();
    if !violations.is_empty() {
        return Err(ChainError::InvalidChain(
            violations
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("; "),
        ));
    }
    chain.model = model;
    let partition = chain.layer_partition()?;
    if partition.width() != 6 {
        return Err(ChainError::InvalidChain(format!(
            "layer partition width {} instead of 6",
            partition.width()
        )));
    }
    Ok(chain)
}

/// Probability of the selection's subsystem (exact chain solve) next to the
/// selection's matrix product value; the construction makes them equal.
pub fn verify_good_value(
    chain: &LayeredChain,
    sigma: &[bool],
) -> Result<(BigRational, BigRational), ChainError> {
    let kept = chain.good_subsystem(sigma)?;
    let sub = chain
        .model
        .induce_subsystem(&kept)
        .map_err(|e| ChainError::InvalidChain(e.to_string()))?;
    let values = reach_value_exact(&sub, ReachMode::Dtmc)?;
    let chain_prob = initial_value(&sub, &values);
    let mcp_value = crate::mcp::evaluate(&chain.instance, sigma)
        .map_err(|e| ChainError::InvalidChain(e.to_string()))?;
    Ok((chain_prob, mcp_value))
}

/// For a bad (non-selection) subsystem of the cycled chain with the right
/// size: check that its probability stays below the broken-cycle cap
/// `3 (1-gamma)`, which in turn sits below the good-value floor.
pub fn bad_subsystem_bound_check(
    chain: &LayeredChain,
    kept: &BTreeSet<StateId>,
) -> Result<bool, ChainError> {
    let gamma = match &chain.variant {
        ChainVariant::Cycled { gamma } => gamma.clone(),
        ChainVariant::Plain => return Err(ChainError::WrongVariant),
    };
    if kept.len() != 3 * chain.n_layers() + 4 {
        return Err(ChainError::BadSubsystemSize {
            expected: 3 * chain.n_layers() + 4,
        });
    }
    if !kept.contains(&chain.goal_state()) {
        return Err(ChainError::GoalMissing);
    }
    if chain.is_good(kept) {
        return Err(ChainError::NotBad);
    }
    let sub = chain
        .model
        .induce_subsystem(kept)
        .map_err(|e| ChainError::InvalidChain(e.to_string()))?;
    let values = reach_value_exact(&sub, ReachMode::Dtmc)?;
    let prob = initial_value(&sub, &values);
    let cap = int(3) * (BigRational::one() - &gamma);
    Ok(prob <= cap && cap < chain.good_value_lower_bound())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcp::{lift_to_nonnegative_3d, normalize_equal_valued, reduce_from_partition};
    use crate::model::ModelKind;
    use crate::reach::value_with_assumption_exact;

    fn normalized(s: &[i64]) -> NormalizedInstance {
        let red = reduce_from_partition(s).unwrap();
        let lifted = lift_to_nonnegative_3d(&red.instance).unwrap();
        normalize_equal_valued(&lifted).unwrap()
    }

    #[test]
    fn plain_chain_shape() {
        let norm = normalized(&[1, 1, 2]);
        let chain = build_plain_chain(&norm).unwrap();
        assert_eq!(chain.n_states(), 6 * 3 + 4);
        assert_eq!(chain.model.n_states(), chain.n_states());
        assert!(chain.model.validate().is_empty());
        let p = chain.layer_partition().unwrap();
        assert_eq!(p.width(), 6);
        assert!(p.is_path());
    }

    #[test]
    fn cycled_chain_shape_and_edge_range() {
        let norm = normalized(&[1, 2]);
        let chain = build_cycled_chain(&norm).unwrap();
        assert!(chain.model.validate().is_empty());
        let gamma = match &chain.variant {
            ChainVariant::Cycled { gamma } => gamma.clone(),
            _ => unreachable!(),
        };
        // Eq-style interval check on the cycle probability.
        let n = chain.n_layers();
        let floor = ratio(1, 12) - &chain.eps;
        let one_minus = BigRational::one() - &gamma;
        assert!(int(12) * &chain.eps < one_minus);
        assert!(one_minus < pow(&(int(3) * &floor), n + 2) / int(3));
        // Cross-layer probabilities strictly inside (0, 1/6).
        let sixth = ratio(1, 6);
        for s in 0..chain.model.n_states() {
            for row in chain.model.actions(s) {
                for (t, p) in &row.transitions {
                    if *t == chain.goal_state() || !same_triple(&chain, s, *t) {
                        assert!(*p > BigRational::zero() && *p < sixth);
                    }
                }
            }
        }
    }

    fn same_triple(chain: &LayeredChain, a: StateId, b: StateId) -> bool {
        let triple_of = |s: StateId| {
            if s >= 6 * chain.n_layers() {
                s.min(6 * chain.n_layers())
            } else {
                s / 3
            }
        };
        triple_of(a) == triple_of(b)
    }

    #[test]
    fn good_subsystem_membership() {
        let norm = normalized(&[1, 1]);
        let chain = build_plain_chain(&norm).unwrap();
        let s = chain.good_subsystem(&[false, false]).unwrap();
        assert_eq!(s.len(), 3 * 2 + 4);
        assert!(chain.is_good(&s));
        let mut broken = s.clone();
        broken.remove(&chain.left(1)[0]);
        assert!(!chain.is_good(&broken));
        assert!(matches!(
            chain.good_subsystem(&[true]),
            Err(ChainError::SigmaLength { .. })
        ));
    }

    #[test]
    fn good_values_match_matrix_products() {
        let norm = normalized(&[1, 1]);
        for chain in [
            build_plain_chain(&norm).unwrap(),
            build_cycled_chain(&norm).unwrap(),
        ] {
            for mask in 0..4u8 {
                let sigma: Vec<bool> = (0..2).map(|i| mask & (1 << i) != 0).collect();
                let (chain_prob, mcp_value) = verify_good_value(&chain, &sigma).unwrap();
                assert_eq!(chain_prob, mcp_value);
            }
        }
    }

    #[test]
    fn cycle_gadget_realises_matrix_exactly() {
        // Free-standing 6-state gadget: triple {0,1,2} with a gamma cycle,
        // targets {3,4,5}; pairwise reach probabilities must equal m.
        let gamma = ratio(1, 2);
        let m = RatMatrix::from_rows(vec![
            vec![ratio(1, 30), ratio(1, 40), ratio(1, 50)],
            vec![ratio(1, 40), ratio(1, 50), ratio(1, 30)],
            vec![ratio(1, 50), ratio(1, 30), ratio(1, 40)],
        ]);
        let edges = gadget_edges(&m, &gamma);
        let mut b = ProbabilisticModel::builder(ModelKind::Dtmc, 6);
        for u in 0..3 {
            b = b.transition(u, (u + 1) % 3, gamma.clone());
            for v in 0..3 {
                b = b.transition(u, 3 + v, edges.get(u, v).clone());
            }
        }
        let model = b.build().unwrap();
        for v in 0..3 {
            let kept: BTreeSet<StateId> = (0..6).collect();
            // Give only the probed target value 1, others 0.
            let mut assume = crate::reach::InterfaceAssumption::new();
            for w in 0..3 {
                assume.set(3 + w, if w == v { int(1) } else { int(0) });
            }
            let vals =
                value_with_assumption_exact(&model, &kept, &assume, ReachMode::Dtmc).unwrap();
            for u in 0..3 {
                assert_eq!(vals[u], *m.get(u, v), "reach({u} -> {}) != m[{u}][{v}]", 3 + v);
            }
        }
    }

    #[test]
    fn bad_subsystem_precondition_checks() {
        let norm = normalized(&[1, 1]);
        let chain = build_cycled_chain(&norm).unwrap();
        let good = chain.good_subsystem(&[false, true]).unwrap();
        assert!(matches!(
            bad_subsystem_bound_check(&chain, &good),
            Err(ChainError::NotBad)
        ));
        let mut bad = good.clone();
        bad.remove(&chain.right(2)[0]);
        bad.insert(chain.left(2)[0]);
        assert!(bad_subsystem_bound_check(&chain, &bad).unwrap());
    }

    #[test]
    fn plain_variant_rejects_bad_bound_check() {
        let norm = normalized(&[1]);
        let chain = build_plain_chain(&norm).unwrap();
        let mut kept = chain.good_subsystem(&[false]).unwrap();
        kept.remove(&chain.left(1)[0]);
        kept.insert(chain.right(1)[0]);
        assert!(matches!(
            bad_subsystem_bound_check(&chain, &kept),
            Err(ChainError::WrongVariant)
        ));
    }
}
