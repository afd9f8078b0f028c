//! Minimal witnessing subsystems via a directed tree partition.
//!
//! The solver walks the partition bottom-up. Per block it enumerates the
//! subsets passing the local Boolean filter, combines them with every
//! combination of the children's surviving partial subsystems, computes the
//! interface values on the block-local model (the subtree is summarised by
//! an assumption on `out(B)`, which is exact by the composition property of
//! the assumption transform), and prunes the accumulated list with the
//! mode's domination relation after every subset batch. At the root the
//! smallest surviving subsystem meeting the threshold is returned.
//!
//! Mode pairing: plain DTMC values and maximal MDP values prune with
//! standard (convex-hull) domination, minimal MDP values with strong
//! (pointwise) domination only, since minimal values are not subadditive.
//!
//! `brute_force_witness` is the independent oracle: an exhaustive
//! increasing-cardinality subset search over the relevant states with exact
//! arithmetic, returning the lexicographically smallest optimum.
//!
//! Threshold convention: a query with `lambda = 0` asks for a positive
//! witness (some goal-reaching skeleton); the empty subsystem is never
//! reported as a witness.

use std::collections::BTreeSet;

use num_traits::Zero;
use thiserror::Error;

use crate::hull::{
    remove_dominated, DominationMode, DominationStats, HullError, PartialSubsystem,
    DEFAULT_INTERFACE_CAP,
};
use crate::model::{ModelError, ModelKind, ProbabilisticModel, StateId, UnderlyingGraph};
use crate::par::{map_collect, Parallelism};
use crate::partition::{check_goal_blocks, DirectedTreePartition, PartitionError};
use crate::reach::{
    initial_value, reach_value_exact, reach_value_float, value_with_assumption_exact,
    value_with_assumption_float, InterfaceAssumption, ReachError, ReachMode,
};
use crate::scalar::{f64_to_rational, BigRational, Scalar};

pub const DEFAULT_BRUTE_FORCE_CAP: usize = 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessMode {
    Dtmc,
    MdpMax,
    MdpMin,
}

impl WitnessMode {
    pub fn reach_mode(self) -> ReachMode {
        match self {
            WitnessMode::Dtmc => ReachMode::Dtmc,
            WitnessMode::MdpMax => ReachMode::Max,
            WitnessMode::MdpMin => ReachMode::Min,
        }
    }

    /// Domination relation paired with the mode.
    pub fn domination(self) -> DominationMode {
        match self {
            WitnessMode::Dtmc | WitnessMode::MdpMax => DominationMode::Standard,
            WitnessMode::MdpMin => DominationMode::Strong,
        }
    }

    pub fn expected_kind(self) -> ModelKind {
        match self {
            WitnessMode::Dtmc => ModelKind::Dtmc,
            _ => ModelKind::Mdp,
        }
    }
}

impl std::fmt::Display for WitnessMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WitnessMode::Dtmc => write!(f, "dtmc"),
            WitnessMode::MdpMax => write!(f, "mdp-max"),
            WitnessMode::MdpMin => write!(f, "mdp-min"),
        }
    }
}

#[derive(Debug, Error)]
pub enum WitnessError {
    #[error("mode {mode} does not match a {kind} model")]
    ModeModelMismatch { mode: WitnessMode, kind: ModelKind },
    #[error("partition covers {partition_states} states but the model has {model_states}")]
    PartitionModelMismatch {
        partition_states: usize,
        model_states: usize,
    },
    #[error("initial state {0} lies outside the root block")]
    InitialOutsideRoot(StateId),
    #[error("interface of block {block} has {size} states, cap is {cap}; refine the partition")]
    InterfaceCapExceeded {
        block: usize,
        size: usize,
        cap: usize,
    },
    #[error("model has {n} states, brute force capped at {cap}")]
    StateCapExceeded { n: usize, cap: usize },
    #[error("no feasible survivor at the root; a supplied witness size bound may be too small")]
    EmptyRoot,
    #[error(transparent)]
    Hull(#[from] HullError),
    #[error(transparent)]
    Reach(#[from] ReachError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PruneOptions {
    pub value_bound: bool,
    pub distance_bound: bool,
}

impl PruneOptions {
    pub fn all() -> Self {
        PruneOptions {
            value_bound: true,
            distance_bound: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct WitnessOptions {
    pub prune: PruneOptions,
    /// Known upper bound on the minimal witness size (must come from an
    /// actual witness); derived greedily when absent and distance pruning
    /// is on.
    pub upper_bound: Option<usize>,
    pub interface_cap: usize,
    pub par: Parallelism,
}

impl Default for WitnessOptions {
    fn default() -> Self {
        WitnessOptions {
            prune: PruneOptions::default(),
            upper_bound: None,
            interface_cap: DEFAULT_INTERFACE_CAP,
            par: Parallelism::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct WitnessQuery<'a> {
    pub model: &'a ProbabilisticModel,
    pub partition: &'a DirectedTreePartition,
    pub mode: WitnessMode,
    pub threshold: BigRational,
    pub options: WitnessOptions,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BlockStats {
    pub block: usize,
    pub phi_models: usize,
    pub candidates: usize,
    pub survivors: usize,
    /// `2^|B|` times the product of the children's survivor counts.
    pub survivor_bound: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    pub subsets_enumerated: usize,
    pub combinations: usize,
    pub hull_calls: usize,
    pub points_pruned: usize,
    pub value_prunes: usize,
    pub distance_prunes: usize,
    pub blocks: Vec<BlockStats>,
}

impl SolveStats {
    fn absorb(&mut self, d: DominationStats) {
        self.hull_calls += d.hull_calls;
        self.points_pruned += d.points_pruned;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessResult<T> {
    pub states: BTreeSet<StateId>,
    pub size: usize,
    pub value: T,
    pub stats: SolveStats,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WitnessOutcome<T> {
    Feasible(WitnessResult<T>),
    Infeasible { full_value: T, stats: SolveStats },
}

impl<T> WitnessOutcome<T> {
    pub fn size(&self) -> Option<usize> {
        match self {
            WitnessOutcome::Feasible(r) => Some(r.size),
            WitnessOutcome::Infeasible { .. } => None,
        }
    }

    pub fn stats(&self) -> &SolveStats {
        match self {
            WitnessOutcome::Feasible(r) => &r.stats,
            WitnessOutcome::Infeasible { stats, .. } => stats,
        }
    }
}

/// `value` certifies the threshold: at least `lambda` for positive
/// thresholds, strictly positive otherwise.
pub fn meets_threshold<T: Scalar>(value: &T, lambda: &BigRational, tol: &T) -> bool {
    if *lambda > BigRational::zero() {
        *value >= T::from_rational(lambda) - tol.clone()
    } else {
        *value > *tol
    }
}

/// Numeric backend of the solver: exact rationals or tolerance-guided `f64`.
pub trait ValueBackend: Scalar {
    fn model_values(
        model: &ProbabilisticModel,
        mode: ReachMode,
        tol: &Self,
    ) -> Result<Vec<Self>, ReachError>;

    fn assumed_values(
        model: &ProbabilisticModel,
        kept: &BTreeSet<StateId>,
        assumption: &InterfaceAssumption,
        mode: ReachMode,
        tol: &Self,
    ) -> Result<Vec<Self>, ReachError>;

    fn to_rational(&self) -> BigRational;
}

impl ValueBackend for BigRational {
    fn model_values(
        model: &ProbabilisticModel,
        mode: ReachMode,
        _tol: &Self,
    ) -> Result<Vec<Self>, ReachError> {
        reach_value_exact(model, mode)
    }

    fn assumed_values(
        model: &ProbabilisticModel,
        kept: &BTreeSet<StateId>,
        assumption: &InterfaceAssumption,
        mode: ReachMode,
        _tol: &Self,
    ) -> Result<Vec<Self>, ReachError> {
        value_with_assumption_exact(model, kept, assumption, mode)
    }

    fn to_rational(&self) -> BigRational {
        self.clone()
    }
}

impl ValueBackend for f64 {
    fn model_values(
        model: &ProbabilisticModel,
        mode: ReachMode,
        tol: &Self,
    ) -> Result<Vec<Self>, ReachError> {
        reach_value_float(model, mode, *tol)
    }

    fn assumed_values(
        model: &ProbabilisticModel,
        kept: &BTreeSet<StateId>,
        assumption: &InterfaceAssumption,
        mode: ReachMode,
        tol: &Self,
    ) -> Result<Vec<Self>, ReachError> {
        value_with_assumption_float(model, kept, assumption, mode, *tol)
    }

    fn to_rational(&self) -> BigRational {
        f64_to_rational(*self).unwrap_or_else(BigRational::zero)
    }
}

// ---------------------------------------------------------------------------
// Local Boolean filter

/// Subsets of `block` in which every non-interface state keeps a predecessor
/// and every non-exit, non-goal state keeps a successor. Goal states are the
/// value sources, so the successor clause does not apply to them.
pub fn phi_models(
    graph: &UnderlyingGraph,
    block: &BTreeSet<StateId>,
    inc: &BTreeSet<StateId>,
    exit: &BTreeSet<StateId>,
    goal: &BTreeSet<StateId>,
) -> Vec<BTreeSet<StateId>> {
    let states: Vec<StateId> = block.iter().copied().collect();
    let pos_of = |s: StateId| states.binary_search(&s).ok();
    let n = states.len();
    // Per position: positions of in-block predecessors/successors and
    // whether each clause family applies.
    let mut pred_lists: Vec<Option<Vec<usize>>> = Vec::with_capacity(n);
    let mut succ_lists: Vec<Option<Vec<usize>>> = Vec::with_capacity(n);
    for &s in &states {
        pred_lists.push(if inc.contains(&s) {
            None
        } else {
            Some(
                graph
                    .predecessors(s)
                    .iter()
                    .filter_map(|&p| pos_of(p))
                    .collect(),
            )
        });
        succ_lists.push(if exit.contains(&s) || goal.contains(&s) {
            None
        } else {
            Some(
                graph
                    .successors(s)
                    .iter()
                    .filter_map(|&t| pos_of(t))
                    .collect(),
            )
        });
    }

    let mut chosen = vec![false; n];
    let mut out = Vec::new();
    fn conflict(
        upto: usize,
        chosen: &[bool],
        pred_lists: &[Option<Vec<usize>>],
        succ_lists: &[Option<Vec<usize>>],
    ) -> bool {
        for s in 0..=upto {
            if !chosen[s] {
                continue;
            }
            for lists in [&pred_lists[s], &succ_lists[s]] {
                if let Some(list) = lists {
                    // Clause failed for sure once all members are assigned
                    // (assigned = position <= upto) and none is kept.
                    if list.iter().all(|&p| p <= upto && !chosen[p]) {
                        return true;
                    }
                }
            }
        }
        false
    }
    fn rec(
        i: usize,
        n: usize,
        chosen: &mut Vec<bool>,
        states: &[StateId],
        pred_lists: &[Option<Vec<usize>>],
        succ_lists: &[Option<Vec<usize>>],
        out: &mut Vec<BTreeSet<StateId>>,
    ) {
        if i == n {
            out.push(
                states
                    .iter()
                    .zip(chosen.iter())
                    .filter(|(_, c)| **c)
                    .map(|(s, _)| *s)
                    .collect(),
            );
            return;
        }
        for value in [false, true] {
            chosen[i] = value;
            if !conflict(i, chosen, pred_lists, succ_lists) {
                rec(i + 1, n, chosen, states, pred_lists, succ_lists, out);
            }
        }
        chosen[i] = false;
    }
    rec(
        0,
        n,
        &mut chosen,
        &states,
        &pred_lists,
        &succ_lists,
        &mut out,
    );
    out
}

// ---------------------------------------------------------------------------
// Successor combinations

/// Cartesian product of the children's survivors: the combined state set and
/// the concatenated value vector over `out_sorted` (the disjoint union of
/// the children's interfaces). A childless block yields the single empty
/// combination.
pub fn successor_points<T: Scalar>(
    children: &[(Vec<StateId>, Vec<PartialSubsystem<T>>)],
    out_sorted: &[StateId],
) -> Vec<(BTreeSet<StateId>, Vec<T>)> {
    let mut combos: Vec<(BTreeSet<StateId>, Vec<(StateId, T)>)> =
        vec![(BTreeSet::new(), Vec::new())];
    for (inc_sorted, survivors) in children {
        let mut next = Vec::with_capacity(combos.len() * survivors.len().max(1));
        for (states, values) in &combos {
            for ps in survivors {
                let mut s = states.clone();
                s.extend(ps.states.iter().copied());
                let mut v = values.clone();
                for (q, val) in inc_sorted.iter().zip(&ps.point) {
                    v.push((*q, val.clone()));
                }
                next.push((s, v));
            }
        }
        combos = next;
    }
    combos
        .into_iter()
        .map(|(states, values)| {
            let vec = out_sorted
                .iter()
                .map(|q| {
                    values
                        .iter()
                        .find(|(s, _)| s == q)
                        .map(|(_, v)| v.clone())
                        .unwrap_or_else(T::zero)
                })
                .collect();
            (states, vec)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Heuristic pruning

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PruneDecision {
    Keep,
    DropValueBound,
    DropDistanceBound,
}

/// Drop a candidate only when it provably cannot be part of a minimal
/// witness: (a) all goals lie in this subtree and even the unweighted sum of
/// interface values misses the threshold, or (b) reaching the interface
/// already costs more states than a known witness bound allows.
pub fn prune_partial<T: Scalar>(
    candidate: &PartialSubsystem<T>,
    prune: PruneOptions,
    goal_in_subtree: bool,
    dist_to_interface: Option<usize>,
    upper_bound: Option<usize>,
    lambda: &BigRational,
    tol: &T,
) -> PruneDecision {
    if prune.value_bound && goal_in_subtree {
        let sum = candidate
            .point
            .iter()
            .fold(T::zero(), |acc, v| acc + v.clone());
        if sum < T::from_rational(lambda) - tol.clone() {
            return PruneDecision::DropValueBound;
        }
    }
    if prune.distance_bound && !candidate.states.is_empty() {
        if let Some(n_bound) = upper_bound {
            match dist_to_interface {
                Some(m) if m + candidate.size() <= n_bound => {}
                _ => return PruneDecision::DropDistanceBound,
            }
        }
    }
    PruneDecision::Keep
}

/// Block-local view used by the solver: the kept block states, the `out`
/// interface and one synthetic goal, remapped to dense local ids so that a
/// per-combination solve never touches the full state space. By the
/// composition property of the assumption transform, the local values equal
/// the subtree values of the combined partial subsystem.
struct LocalBlock {
    kind: ModelKind,
    /// Sorted kept block states; local ids `0..k`.
    states: Vec<StateId>,
    /// Out states take local ids `k..k+m`; the synthetic goal is `k+m`.
    n_out: usize,
    /// Remapped transition skeleton of the kept states.
    rows: Vec<Vec<(String, Vec<(usize, BigRational)>)>>,
    /// Kept states that are goal states (goal blocks).
    goal_local: Vec<usize>,
}

impl LocalBlock {
    fn build(model: &ProbabilisticModel, s_b: &BTreeSet<StateId>, out_sorted: &[StateId]) -> Self {
        let states: Vec<StateId> = s_b.iter().copied().collect();
        let k = states.len();
        let local_of = |q: StateId| -> Option<usize> {
            if let Ok(i) = states.binary_search(&q) {
                return Some(i);
            }
            out_sorted.binary_search(&q).ok().map(|i| k + i)
        };
        let rows = states
            .iter()
            .map(|&q| {
                model
                    .actions(q)
                    .iter()
                    .map(|row| {
                        let transitions = row
                            .transitions
                            .iter()
                            .filter_map(|(t, p)| local_of(*t).map(|lt| (lt, p.clone())))
                            .collect();
                        (row.label.clone(), transitions)
                    })
                    .collect()
            })
            .collect();
        let goal_local = states
            .iter()
            .enumerate()
            .filter(|(_, q)| model.is_goal(**q))
            .map(|(i, _)| i)
            .collect();
        LocalBlock {
            kind: model.kind(),
            states,
            n_out: out_sorted.len(),
            rows,
            goal_local,
        }
    }

    fn index_of(&self, q: StateId) -> usize {
        self.states.binary_search(&q).expect("state is kept")
    }

    /// Mode-optimal values of the kept states under the interface assumption
    /// `f` (ordered like the block's `out` interface).
    fn values<T: ValueBackend>(
        &self,
        f: &[T],
        mode: ReachMode,
        tol: &T,
    ) -> Result<Vec<T>, ReachError> {
        let k = self.states.len();
        let synthetic = k + self.n_out;
        let mut b = ProbabilisticModel::builder(self.kind, synthetic + 1);
        for (i, actions) in self.rows.iter().enumerate() {
            for (label, transitions) in actions {
                for (t, p) in transitions {
                    b = match self.kind {
                        ModelKind::Dtmc => b.transition(i, *t, p.clone()),
                        ModelKind::Mdp => b.mdp_transition(i, label, *t, p.clone()),
                    };
                }
            }
        }
        for (o, v) in f.iter().enumerate() {
            let value = v.to_rational();
            if !value.is_zero() {
                b = match self.kind {
                    ModelKind::Dtmc => b.transition(k + o, synthetic, value),
                    ModelKind::Mdp => b.mdp_transition(k + o, "assume", synthetic, value),
                };
            }
        }
        for &g in &self.goal_local {
            b = b.goal(g);
        }
        b = b.goal(synthetic);
        let local = b.build().map_err(ReachError::Model)?;
        T::model_values(&local, mode, tol)
    }
}

fn bfs_distances(graph: &UnderlyingGraph, starts: &BTreeSet<StateId>) -> Vec<Option<usize>> {
    let mut dist = vec![None; graph.n_vertices()];
    let mut queue = std::collections::VecDeque::new();
    for &s in starts {
        dist[s] = Some(0);
        queue.push_back(s);
    }
    while let Some(u) = queue.pop_front() {
        for &v in graph.successors(u) {
            if dist[v].is_none() {
                dist[v] = Some(dist[u].unwrap() + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Size of a witness found by the most-probable-path heuristic, or the state
/// count when the best path alone misses the threshold. A single path does
/// not bound min-mode witnesses, so min mode gets the trivial bound.
fn greedy_upper_bound(
    model: &ProbabilisticModel,
    mode: WitnessMode,
    lambda: &BigRational,
) -> usize {
    let n = model.n_states();
    if mode == WitnessMode::MdpMin {
        return n;
    }
    // Widest-path search maximising the edge-probability product.
    let mut best: Vec<Option<BigRational>> = model
        .initial()
        .iter()
        .map(|p| {
            if p.is_zero() {
                None
            } else {
                Some(BigRational::from_integer(1.into()))
            }
        })
        .collect();
    let mut pred: Vec<Option<StateId>> = vec![None; n];
    let mut done = vec![false; n];
    loop {
        let u = match (0..n)
            .filter(|&v| !done[v] && best[v].is_some())
            .max_by(|&a, &b| best[a].cmp(&best[b]))
        {
            Some(u) => u,
            None => break,
        };
        done[u] = true;
        for row in model.actions(u) {
            for (t, p) in &row.transitions {
                if p.is_zero() || done[*t] {
                    continue;
                }
                let cand = best[u].clone().unwrap() * p;
                if best[*t].as_ref().map_or(true, |b| cand > *b) {
                    best[*t] = Some(cand);
                    pred[*t] = Some(u);
                }
            }
        }
    }
    let target = model
        .goal()
        .iter()
        .filter(|&&g| best[g].is_some())
        .max_by(|&&a, &&b| best[a].cmp(&best[b]));
    if let Some(&g) = target {
        let product = best[g].clone().unwrap();
        if meets_threshold(&product, lambda, &BigRational::zero()) {
            let mut len = 1;
            let mut cur = g;
            while let Some(p) = pred[cur] {
                len += 1;
                cur = p;
            }
            return len;
        }
    }
    n
}

// ---------------------------------------------------------------------------
// The solver

pub fn solve_exact(query: &WitnessQuery) -> Result<WitnessOutcome<BigRational>, WitnessError> {
    solve_generic::<BigRational>(query, BigRational::zero())
}

pub fn solve_float(query: &WitnessQuery, tol: f64) -> Result<WitnessOutcome<f64>, WitnessError> {
    solve_generic::<f64>(query, tol)
}

fn solve_generic<T: ValueBackend>(
    query: &WitnessQuery,
    tol: T,
) -> Result<WitnessOutcome<T>, WitnessError> {
    let model = query.model;
    let partition = query.partition;
    let mode = query.mode;
    if mode.expected_kind() != model.kind() {
        return Err(WitnessError::ModeModelMismatch {
            mode,
            kind: model.kind(),
        });
    }
    let n: usize = partition.blocks().iter().map(|b| b.len()).sum();
    if n != model.n_states() {
        return Err(WitnessError::PartitionModelMismatch {
            partition_states: n,
            model_states: model.n_states(),
        });
    }
    check_goal_blocks(partition.blocks(), model.goal())?;
    let init_support = model.initial_support();
    for &s in &init_support {
        if partition.block_of(s) != partition.root() {
            return Err(WitnessError::InitialOutsideRoot(s));
        }
    }
    let graph = model.underlying_graph();
    let nav = partition.navigation(&graph, &init_support);
    let cap = query.options.interface_cap;
    for (b, inc) in nav.inc.iter().enumerate() {
        if inc.len() > cap {
            return Err(WitnessError::InterfaceCapExceeded {
                block: b,
                size: inc.len(),
                cap,
            });
        }
    }

    let mut stats = SolveStats::default();
    let reach_mode = mode.reach_mode();
    let full_values = T::model_values(model, reach_mode, &tol)?;
    let full_value = initial_value(model, &full_values);
    if !meets_threshold(&full_value, &query.threshold, &tol) {
        return Ok(WitnessOutcome::Infeasible {
            full_value,
            stats,
        });
    }

    let dist = bfs_distances(&graph, &init_support);
    let upper_bound = if query.options.prune.distance_bound {
        Some(
            query
                .options
                .upper_bound
                .unwrap_or_else(|| greedy_upper_bound(model, mode, &query.threshold)),
        )
    } else {
        None
    };

    let nb = partition.n_blocks();
    let mut table: Vec<Option<Vec<PartialSubsystem<T>>>> = vec![None; nb];
    for b in partition.bottom_up_order() {
        let block = &partition.blocks()[b];
        let inc_sorted: Vec<StateId> = nav.inc[b].iter().copied().collect();
        let out_sorted: Vec<StateId> = nav.out[b].iter().copied().collect();
        let models = phi_models(&graph, block, &nav.inc[b], &nav.exit[b], model.goal());
        stats.subsets_enumerated += models.len();

        let children: Vec<(Vec<StateId>, Vec<PartialSubsystem<T>>)> = partition
            .children(b)
            .iter()
            .map(|&c| {
                (
                    nav.inc[c].iter().copied().collect(),
                    table[c].take().expect("children processed first"),
                )
            })
            .collect();
        let child_counts: Vec<usize> = children.iter().map(|(_, s)| s.len()).collect();
        let combos = successor_points(&children, &out_sorted);
        stats.combinations += models.len() * combos.len();

        let goal_in_subtree =
            !model.goal().is_empty() && model.goal().iter().all(|g| nav.cl[b].contains(g));
        let m_dist = nav.inc[b].iter().filter_map(|&q| dist[q]).min();

        let mut survivors: Vec<PartialSubsystem<T>> = Vec::new();
        let mut candidates = 0usize;
        for s_b in &models {
            let local = LocalBlock::build(model, s_b, &out_sorted);
            let jobs: Vec<usize> = (0..combos.len()).collect();
            let evaluated: Vec<Result<PartialSubsystem<T>, ReachError>> =
                map_collect(jobs, query.options.par, |ci| {
                    let (combo_states, f_vec) = &combos[ci];
                    let values = local.values::<T>(f_vec, reach_mode, &tol)?;
                    let point = inc_sorted
                        .iter()
                        .map(|q| {
                            if s_b.contains(q) {
                                values[local.index_of(*q)].clone()
                            } else {
                                T::zero()
                            }
                        })
                        .collect();
                    let mut states = s_b.clone();
                    states.extend(combo_states.iter().copied());
                    Ok(PartialSubsystem::new(states, point))
                });
            let mut batch = Vec::new();
            for r in evaluated {
                let ps = r?;
                candidates += 1;
                match prune_partial(
                    &ps,
                    query.options.prune,
                    goal_in_subtree,
                    m_dist,
                    upper_bound,
                    &query.threshold,
                    &tol,
                ) {
                    PruneDecision::Keep => batch.push(ps),
                    PruneDecision::DropValueBound => stats.value_prunes += 1,
                    PruneDecision::DropDistanceBound => stats.distance_prunes += 1,
                }
            }
            survivors.extend(batch);
            // Per-batch pass: the pointwise filter is a sound subset of both
            // domination relations and keeps the running list short. The
            // block-end pass below applies the mode's full relation; the
            // final survivor set is the same either way (dominated points
            // never resurface), only the intermediate work differs.
            let (pruned, dstats) = remove_dominated(survivors, DominationMode::Strong, cap, &tol)?;
            survivors = pruned;
            stats.absorb(dstats);
        }
        let (pruned, dstats) = remove_dominated(survivors, mode.domination(), cap, &tol)?;
        survivors = pruned;
        stats.absorb(dstats);
        let bound = 2f64.powi(block.len() as i32)
            * child_counts.iter().map(|&c| c as f64).product::<f64>();
        stats.blocks.push(BlockStats {
            block: b,
            phi_models: models.len(),
            candidates,
            survivors: survivors.len(),
            survivor_bound: bound,
        });
        table[b] = Some(survivors);
    }

    let root = partition.root();
    let root_inc: Vec<StateId> = nav.inc[root].iter().copied().collect();
    let survivors = table[root].take().unwrap_or_default();
    let mut best: Option<(usize, BTreeSet<StateId>, T)> = None;
    for ps in survivors {
        let value = root_inc
            .iter()
            .zip(&ps.point)
            .fold(T::zero(), |acc, (q, v)| {
                acc + T::from_rational(&model.initial()[*q]) * v.clone()
            });
        if !meets_threshold(&value, &query.threshold, &tol) {
            continue;
        }
        let better = match &best {
            None => true,
            Some((sz, states, _)) => (ps.size(), &ps.states) < (*sz, states),
        };
        if better {
            best = Some((ps.size(), ps.states, value));
        }
    }
    match best {
        Some((size, states, value)) => Ok(WitnessOutcome::Feasible(WitnessResult {
            states,
            size,
            value,
            stats,
        })),
        None => Err(WitnessError::EmptyRoot),
    }
}

// ---------------------------------------------------------------------------
// Brute-force oracle

/// Exhaustive minimal-witness search: subsets of the relevant states (on an
/// initial-to-goal route) in increasing cardinality, lexicographic within a
/// cardinality, exact solves only after a bitmask connectivity prefilter.
pub fn brute_force_witness(
    model: &ProbabilisticModel,
    mode: WitnessMode,
    lambda: &BigRational,
    cap: usize,
    par: Parallelism,
) -> Result<WitnessOutcome<BigRational>, WitnessError> {
    if mode.expected_kind() != model.kind() {
        return Err(WitnessError::ModeModelMismatch {
            mode,
            kind: model.kind(),
        });
    }
    let n = model.n_states();
    if n > cap {
        return Err(WitnessError::StateCapExceeded { n, cap });
    }
    let zero = BigRational::zero();
    let stats = SolveStats::default();
    let full_values = reach_value_exact(model, mode.reach_mode())?;
    let full_value = initial_value(model, &full_values);
    if !meets_threshold(&full_value, lambda, &zero) {
        return Ok(WitnessOutcome::Infeasible {
            full_value,
            stats,
        });
    }

    let graph = model.underlying_graph();
    let reach = graph.reachable(model.initial_support());
    let coreach = graph.coreachable(model.goal().iter().copied());
    let relevant: Vec<StateId> = (0..n).filter(|&s| reach[s] && coreach[s]).collect();
    let k_rel = relevant.len();
    debug_assert!(k_rel <= 64);

    let idx_of = |s: StateId| relevant.binary_search(&s).ok();
    let mut adj_mask = vec![0u64; k_rel];
    for (i, &s) in relevant.iter().enumerate() {
        for &t in graph.successors(s) {
            if let Some(j) = idx_of(t) {
                adj_mask[i] |= 1 << j;
            }
        }
    }
    let mut init_mask = 0u64;
    for s in model.initial_support() {
        if let Some(i) = idx_of(s) {
            init_mask |= 1 << i;
        }
    }
    let mut goal_mask = 0u64;
    for &g in model.goal() {
        if let Some(i) = idx_of(g) {
            goal_mask |= 1 << i;
        }
    }

    let connected = |mask: u64| -> bool {
        let mut seen = mask & init_mask;
        if seen == 0 || mask & goal_mask == 0 {
            return false;
        }
        loop {
            let mut next = seen;
            let mut cursor = seen;
            while cursor != 0 {
                let i = cursor.trailing_zeros() as usize;
                cursor &= cursor - 1;
                next |= adj_mask[i] & mask;
            }
            if next == seen {
                break;
            }
            seen = next;
        }
        seen & goal_mask != 0
    };

    let evaluate = |mask: u64| -> Result<Option<(BTreeSet<StateId>, BigRational)>, WitnessError> {
        if !connected(mask) {
            return Ok(None);
        }
        let kept: BTreeSet<StateId> = (0..k_rel)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| relevant[i])
            .collect();
        let sub = model.induce_subsystem(&kept)?;
        let values = reach_value_exact(&sub, mode.reach_mode())?;
        let value = initial_value(&sub, &values);
        if meets_threshold(&value, lambda, &zero) {
            Ok(Some((kept, value)))
        } else {
            Ok(None)
        }
    };

    for k in 1..=k_rel {
        // Lexicographic combinations of k indices out of k_rel.
        let mut combo: Vec<usize> = (0..k).collect();
        let mut chunk: Vec<u64> = Vec::with_capacity(4096);
        loop {
            let mask = combo.iter().fold(0u64, |m, &i| m | (1 << i));
            chunk.push(mask);
            let exhausted = !next_combination(&mut combo, k_rel);
            if chunk.len() == 4096 || exhausted {
                let results = map_collect(std::mem::take(&mut chunk), par, |m| evaluate(m));
                for r in results {
                    if let Some((kept, value)) = r? {
                        return Ok(WitnessOutcome::Feasible(WitnessResult {
                            size: kept.len(),
                            states: kept,
                            value,
                            stats,
                        }));
                    }
                }
            }
            if exhausted {
                break;
            }
        }
    }
    Ok(WitnessOutcome::Infeasible {
        full_value,
        stats,
    })
}

fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::validate_partition;
    use crate::scalar::{int, ratio};

    fn set(states: &[StateId]) -> BTreeSet<StateId> {
        states.iter().copied().collect()
    }

    /// s0 -> s1 -> g with probability 1/2 each.
    fn chain_model() -> ProbabilisticModel {
        ProbabilisticModel::builder(ModelKind::Dtmc, 3)
            .transition(0, 1, ratio(1, 2))
            .transition(1, 2, ratio(1, 2))
            .initial(0, int(1))
            .goal(2)
            .build()
            .unwrap()
    }

    #[test]
    fn phi_isolated_interface_state() {
        let g = UnderlyingGraph::from_edges(1, []);
        let models = phi_models(&g, &set(&[0]), &set(&[0]), &set(&[0]), &set(&[]));
        assert_eq!(models, vec![set(&[]), set(&[0])]);
    }

    #[test]
    fn phi_linear_block_is_all_or_nothing() {
        let g = UnderlyingGraph::from_edges(4, [(0, 1), (1, 2), (2, 3)]);
        // Block {0,1,2} with inc {0}, exit {2} (edge into block {3}).
        let models = phi_models(&g, &set(&[0, 1, 2]), &set(&[0]), &set(&[2]), &set(&[]));
        assert_eq!(models, vec![set(&[]), set(&[0, 1, 2])]);
    }

    #[test]
    fn phi_goal_states_are_exempt_from_successor_clause() {
        let g = UnderlyingGraph::from_edges(2, [(0, 1)]);
        let models = phi_models(&g, &set(&[1]), &set(&[1]), &set(&[]), &set(&[1]));
        assert!(models.contains(&set(&[1])));
    }

    #[test]
    fn successor_points_product_counts() {
        let c1 = (
            vec![10],
            vec![
                PartialSubsystem::new(set(&[10]), vec![ratio(1, 2)]),
                PartialSubsystem::new(set(&[10, 11]), vec![ratio(3, 4)]),
            ],
        );
        let c2 = (
            vec![20],
            vec![
                PartialSubsystem::new(set(&[20]), vec![ratio(1, 3)]),
                PartialSubsystem::new(set(&[20, 21]), vec![ratio(2, 3)]),
                PartialSubsystem::new(set(&[]), vec![int(0)]),
            ],
        );
        let combos = successor_points(&[c1, c2], &[10, 20]);
        assert_eq!(combos.len(), 6);
        let leaf: Vec<(BTreeSet<StateId>, Vec<BigRational>)> = successor_points(&[], &[]);
        assert_eq!(leaf, vec![(set(&[]), vec![])]);
    }

    #[test]
    fn prune_partial_decisions() {
        let cand = PartialSubsystem::new(set(&[1, 2]), vec![ratio(1, 10)]);
        let d = prune_partial(
            &cand,
            PruneOptions::all(),
            true,
            Some(4),
            Some(5),
            &ratio(1, 2),
            &BigRational::zero(),
        );
        assert_eq!(d, PruneDecision::DropValueBound);
        let rich = PartialSubsystem::new(set(&[1, 2]), vec![ratio(9, 10)]);
        let d = prune_partial(
            &rich,
            PruneOptions::all(),
            true,
            Some(4),
            Some(5),
            &ratio(1, 2),
            &BigRational::zero(),
        );
        assert_eq!(d, PruneDecision::DropDistanceBound);
        let d = prune_partial(
            &rich,
            PruneOptions::all(),
            true,
            Some(3),
            Some(5),
            &ratio(1, 2),
            &BigRational::zero(),
        );
        assert_eq!(d, PruneDecision::Keep);
    }

    #[test]
    fn solve_three_state_chain() {
        let m = chain_model();
        let p = validate_partition(
            &m.underlying_graph(),
            &[set(&[0]), set(&[1]), set(&[2])],
        )
        .unwrap();
        let query = WitnessQuery {
            model: &m,
            partition: &p,
            mode: WitnessMode::Dtmc,
            threshold: ratio(1, 4),
            options: WitnessOptions::default(),
        };
        match solve_exact(&query).unwrap() {
            WitnessOutcome::Feasible(r) => {
                assert_eq!(r.size, 3);
                assert_eq!(r.states, set(&[0, 1, 2]));
                assert_eq!(r.value, ratio(1, 4));
            }
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    #[test]
    fn solve_zero_threshold_requires_positive_witness() {
        let m = chain_model();
        let p = validate_partition(
            &m.underlying_graph(),
            &[set(&[0]), set(&[1]), set(&[2])],
        )
        .unwrap();
        let query = WitnessQuery {
            model: &m,
            partition: &p,
            mode: WitnessMode::Dtmc,
            threshold: int(0),
            options: WitnessOptions::default(),
        };
        let outcome = solve_exact(&query).unwrap();
        assert_eq!(outcome.size(), Some(3));
        let oracle =
            brute_force_witness(&m, WitnessMode::Dtmc, &int(0), 22, Parallelism::Sequential)
                .unwrap();
        assert_eq!(oracle.size(), Some(3));
    }

    #[test]
    fn infeasible_when_full_system_misses() {
        let m = chain_model();
        let p = validate_partition(
            &m.underlying_graph(),
            &[set(&[0]), set(&[1]), set(&[2])],
        )
        .unwrap();
        let query = WitnessQuery {
            model: &m,
            partition: &p,
            mode: WitnessMode::Dtmc,
            threshold: ratio(1, 2),
            options: WitnessOptions::default(),
        };
        match solve_exact(&query).unwrap() {
            WitnessOutcome::Infeasible { full_value, .. } => {
                assert_eq!(full_value, ratio(1, 4));
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
        let oracle = brute_force_witness(
            &m,
            WitnessMode::Dtmc,
            &ratio(1, 2),
            22,
            Parallelism::Sequential,
        )
        .unwrap();
        assert!(matches!(oracle, WitnessOutcome::Infeasible { .. }));
    }

    #[test]
    fn brute_force_finds_single_path() {
        let m = chain_model();
        let r = brute_force_witness(
            &m,
            WitnessMode::Dtmc,
            &ratio(1, 4),
            22,
            Parallelism::Sequential,
        )
        .unwrap();
        match r {
            WitnessOutcome::Feasible(w) => {
                assert_eq!(w.states, set(&[0, 1, 2]));
                assert_eq!(w.value, ratio(1, 4));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn brute_force_cap_is_enforced() {
        let m = chain_model();
        assert!(matches!(
            brute_force_witness(
                &m,
                WitnessMode::Dtmc,
                &ratio(1, 4),
                2,
                Parallelism::Sequential
            ),
            Err(WitnessError::StateCapExceeded { n: 3, cap: 2 })
        ));
    }

    #[test]
    fn mode_model_mismatch() {
        let m = chain_model();
        let p = validate_partition(
            &m.underlying_graph(),
            &[set(&[0]), set(&[1]), set(&[2])],
        )
        .unwrap();
        let query = WitnessQuery {
            model: &m,
            partition: &p,
            mode: WitnessMode::MdpMin,
            threshold: ratio(1, 4),
            options: WitnessOptions::default(),
        };
        assert!(matches!(
            solve_exact(&query),
            Err(WitnessError::ModeModelMismatch { .. })
        ));
    }

    #[test]
    fn initial_must_sit_in_root() {
        let m = ProbabilisticModel::builder(ModelKind::Dtmc, 2)
            .transition(0, 1, int(1))
            .initial(1, int(1))
            .goal(1)
            .build();
        // goal 1 is not a trap violation aside, focus on root check.
        let m = match m {
            Ok(m) => m,
            Err(e) => panic!("{e}"),
        };
        let p = validate_partition(&m.underlying_graph(), &[set(&[0]), set(&[1])]).unwrap();
        let query = WitnessQuery {
            model: &m,
            partition: &p,
            mode: WitnessMode::Dtmc,
            threshold: ratio(1, 2),
            options: WitnessOptions::default(),
        };
        assert!(matches!(
            solve_exact(&query),
            Err(WitnessError::InitialOutsideRoot(1))
        ));
    }

    #[test]
    fn solve_matches_oracle_on_branching_dtmc() {
        // Root block {0}; two children {1} and {2}; goals {3} and {4} below.
        let m = ProbabilisticModel::builder(ModelKind::Dtmc, 5)
            .transition(0, 1, ratio(1, 2))
            .transition(0, 2, ratio(1, 4))
            .transition(1, 3, ratio(1, 2))
            .transition(2, 4, int(1))
            .initial(0, int(1))
            .goal(3)
            .goal(4)
            .build()
            .unwrap();
        let p = validate_partition(
            &m.underlying_graph(),
            &[set(&[0]), set(&[1]), set(&[2]), set(&[3]), set(&[4])],
        )
        .unwrap();
        for lambda in [ratio(1, 4), ratio(1, 3), ratio(1, 2), ratio(2, 5)] {
            let query = WitnessQuery {
                model: &m,
                partition: &p,
                mode: WitnessMode::Dtmc,
                threshold: lambda.clone(),
                options: WitnessOptions::default(),
            };
            let solved = solve_exact(&query).unwrap();
            let oracle = brute_force_witness(
                &m,
                WitnessMode::Dtmc,
                &lambda,
                22,
                Parallelism::Sequential,
            )
            .unwrap();
            assert_eq!(solved.size(), oracle.size(), "lambda = {lambda}");
        }
    }
}
