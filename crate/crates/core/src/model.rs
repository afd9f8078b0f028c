//! Explicit-state substochastic DTMCs and MDPs, induced subsystems and the
//! underlying (action-erased) graph.
//!
//! States are dense indices `0..n`; display names, when a frontend has any,
//! live in an optional side map owned by the frontend. All probabilities are
//! stored as exact rationals. A model is *substochastic*: row sums and the
//! initial mass may be below one, the missing mass implicitly flows to an
//! ignored fail state.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::scalar::BigRational;

pub type StateId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Dtmc,
    Mdp,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::Dtmc => write!(f, "dtmc"),
            ModelKind::Mdp => write!(f, "mdp"),
        }
    }
}

/// One enabled action of a state: a label and its transition row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionRow {
    pub label: String,
    /// Sorted by target state; targets are unique within a row.
    pub transitions: Vec<(StateId, BigRational)>,
}

impl ActionRow {
    pub fn probability_to(&self, target: StateId) -> BigRational {
        self.transitions
            .iter()
            .find(|(t, _)| *t == target)
            .map(|(_, p)| p.clone())
            .unwrap_or_else(BigRational::zero)
    }

    pub fn row_sum(&self) -> BigRational {
        self.transitions
            .iter()
            .fold(BigRational::zero(), |acc, (_, p)| acc + p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilisticModel {
    kind: ModelKind,
    /// Per state: enabled actions. DTMC states have exactly one row.
    actions: Vec<Vec<ActionRow>>,
    initial: Vec<BigRational>,
    goal: BTreeSet<StateId>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown state id {0}")]
    UnknownState(StateId),
    #[error("negative probability on transition {src} -> {dst}")]
    NegativeProbability { src: StateId, dst: StateId },
    #[error("duplicate transition {src} -> {dst} (same action)")]
    DuplicateTransition { src: StateId, dst: StateId },
    #[error("dtmc states take exactly one implicit action")]
    ActionOnDtmc,
    #[error("mdp transitions need an action label")]
    MissingAction,
}

/// A diagnostic produced by [`ProbabilisticModel::validate`]; never an error,
/// the caller decides what to do with them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    RowSumExceedsOne {
        state: StateId,
        action: String,
        sum: BigRational,
    },
    InitialMassExceedsOne {
        sum: BigRational,
    },
    ProbabilityOutOfRange {
        state: StateId,
        action: String,
        target: StateId,
        value: BigRational,
    },
    InitialOutOfRange {
        state: StateId,
        value: BigRational,
    },
    GoalNotTrap {
        state: StateId,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RowSumExceedsOne { state, action, sum } => {
                if action.is_empty() {
                    write!(f, "row sum {} > 1 at state {}", sum, state)
                } else {
                    write!(f, "row sum {} > 1 at state {} action {}", sum, state, action)
                }
            }
            Violation::InitialMassExceedsOne { sum } => {
                write!(f, "initial mass {} > 1", sum)
            }
            Violation::ProbabilityOutOfRange {
                state,
                action,
                target,
                value,
            } => write!(
                f,
                "probability {} out of [0,1] on {} -{}-> {}",
                value, state, action, target
            ),
            Violation::InitialOutOfRange { state, value } => {
                write!(
                    f,
                    "initial probability {} out of [0,1] at state {}",
                    value, state
                )
            }
            Violation::GoalNotTrap { state } => {
                write!(f, "goal state {} is not a trap", state)
            }
        }
    }
}

pub struct ModelBuilder {
    kind: ModelKind,
    n: usize,
    rows: Vec<Vec<ActionRow>>,
    initial: Vec<BigRational>,
    goal: BTreeSet<StateId>,
    error: Option<ModelError>,
}

impl ModelBuilder {
    pub fn new(kind: ModelKind, n_states: usize) -> Self {
        ModelBuilder {
            kind,
            n: n_states,
            rows: vec![Vec::new(); n_states],
            initial: vec![BigRational::zero(); n_states],
            goal: BTreeSet::new(),
            error: None,
        }
    }

    fn check_state(&mut self, s: StateId) -> bool {
        if s >= self.n {
            self.error.get_or_insert(ModelError::UnknownState(s));
            return false;
        }
        true
    }

    /// DTMC transition. The single implicit action row is created on demand.
    pub fn transition(mut self, src: StateId, dst: StateId, p: BigRational) -> Self {
        if self.kind != ModelKind::Dtmc {
            self.error.get_or_insert(ModelError::MissingAction);
            return self;
        }
        self.add_row_entry(src, "", dst, p);
        self
    }

    pub fn mdp_transition(
        mut self,
        src: StateId,
        action: &str,
        dst: StateId,
        p: BigRational,
    ) -> Self {
        if self.kind != ModelKind::Mdp {
            self.error.get_or_insert(ModelError::ActionOnDtmc);
            return self;
        }
        self.add_row_entry(src, action, dst, p);
        self
    }

    fn add_row_entry(&mut self, src: StateId, action: &str, dst: StateId, p: BigRational) {
        if !self.check_state(src) || !self.check_state(dst) {
            return;
        }
        if p < BigRational::zero() {
            self.error
                .get_or_insert(ModelError::NegativeProbability { src, dst });
            return;
        }
        let rows = &mut self.rows[src];
        let row = match rows.iter_mut().find(|r| r.label == action) {
            Some(r) => r,
            None => {
                rows.push(ActionRow {
                    label: action.to_string(),
                    transitions: Vec::new(),
                });
                rows.last_mut().unwrap()
            }
        };
        match row.transitions.binary_search_by_key(&dst, |(t, _)| *t) {
            Ok(_) => {
                self.error
                    .get_or_insert(ModelError::DuplicateTransition { src, dst });
            }
            Err(pos) => row.transitions.insert(pos, (dst, p)),
        }
    }

    pub fn initial(mut self, s: StateId, p: BigRational) -> Self {
        if self.check_state(s) {
            self.initial[s] = p;
        }
        self
    }

    pub fn goal(mut self, s: StateId) -> Self {
        if self.check_state(s) {
            self.goal.insert(s);
        }
        self
    }

    pub fn build(mut self) -> Result<ProbabilisticModel, ModelError> {
        if let Some(e) = self.error {
            return Err(e);
        }
        if self.kind == ModelKind::Dtmc {
            // Give trap states their (empty) implicit row so iteration is uniform.
            for rows in &mut self.rows {
                if rows.is_empty() {
                    rows.push(ActionRow {
                        label: String::new(),
                        transitions: Vec::new(),
                    });
                }
            }
        }
        Ok(ProbabilisticModel {
            kind: self.kind,
            actions: self.rows,
            initial: self.initial,
            goal: self.goal,
        })
    }
}

impl ProbabilisticModel {
    pub fn builder(kind: ModelKind, n_states: usize) -> ModelBuilder {
        ModelBuilder::new(kind, n_states)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn n_states(&self) -> usize {
        self.actions.len()
    }

    pub fn actions(&self, s: StateId) -> &[ActionRow] {
        &self.actions[s]
    }

    pub fn initial(&self) -> &[BigRational] {
        &self.initial
    }

    pub fn initial_support(&self) -> BTreeSet<StateId> {
        self.initial
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > BigRational::zero())
            .map(|(s, _)| s)
            .collect()
    }

    pub fn goal(&self) -> &BTreeSet<StateId> {
        &self.goal
    }

    pub fn is_goal(&self, s: StateId) -> bool {
        self.goal.contains(&s)
    }

    pub fn is_trap(&self, s: StateId) -> bool {
        self.actions[s]
            .iter()
            .all(|row| row.transitions.iter().all(|(_, p)| p.is_zero()))
    }

    /// All invariant violations of this model; empty iff the model is a valid
    /// substochastic DTMC/MDP with trap goal states.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let one = BigRational::one();
        for (s, rows) in self.actions.iter().enumerate() {
            for row in rows {
                for (t, p) in &row.transitions {
                    if *p < BigRational::zero() || *p > one {
                        out.push(Violation::ProbabilityOutOfRange {
                            state: s,
                            action: row.label.clone(),
                            target: *t,
                            value: p.clone(),
                        });
                    }
                }
                let sum = row.row_sum();
                if sum > one {
                    out.push(Violation::RowSumExceedsOne {
                        state: s,
                        action: row.label.clone(),
                        sum,
                    });
                }
            }
        }
        let mass = self
            .initial
            .iter()
            .fold(BigRational::zero(), |acc, p| acc + p);
        if mass > one {
            out.push(Violation::InitialMassExceedsOne { sum: mass });
        }
        for (s, p) in self.initial.iter().enumerate() {
            if *p < BigRational::zero() || *p > one {
                out.push(Violation::InitialOutOfRange {
                    state: s,
                    value: p.clone(),
                });
            }
        }
        for &g in &self.goal {
            if !self.is_trap(g) {
                out.push(Violation::GoalNotTrap { state: g });
            }
        }
        out
    }

    /// Subsystem induced by `kept`: every transition or initial entry with an
    /// endpoint outside `kept` is zeroed (dropped), goal states outside
    /// `kept` stop being goal. State ids are preserved.
    pub fn induce_subsystem(&self, kept: &BTreeSet<StateId>) -> Result<Self, ModelError> {
        if let Some(&bad) = kept.iter().find(|&&s| s >= self.n_states()) {
            return Err(ModelError::UnknownState(bad));
        }
        let actions = self
            .actions
            .iter()
            .enumerate()
            .map(|(s, rows)| {
                rows.iter()
                    .map(|row| ActionRow {
                        label: row.label.clone(),
                        transitions: if kept.contains(&s) {
                            row.transitions
                                .iter()
                                .filter(|(t, _)| kept.contains(t))
                                .cloned()
                                .collect()
                        } else {
                            Vec::new()
                        },
                    })
                    .collect()
            })
            .collect();
        let initial = self
            .initial
            .iter()
            .enumerate()
            .map(|(s, p)| {
                if kept.contains(&s) {
                    p.clone()
                } else {
                    BigRational::zero()
                }
            })
            .collect();
        let goal = self.goal.intersection(kept).cloned().collect();
        Ok(ProbabilisticModel {
            kind: self.kind,
            actions,
            initial,
            goal,
        })
    }

    /// Action-erased graph: an edge `(s, s')` iff some action moves from `s`
    /// to `s'` with positive probability.
    pub fn underlying_graph(&self) -> UnderlyingGraph {
        let mut edges = Vec::new();
        for (s, rows) in self.actions.iter().enumerate() {
            for row in rows {
                for (t, p) in &row.transitions {
                    if *p > BigRational::zero() {
                        edges.push((s, *t));
                    }
                }
            }
        }
        UnderlyingGraph::from_edges(self.n_states(), edges)
    }
}

/// Plain directed graph on dense vertex ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnderlyingGraph {
    n: usize,
    adj: Vec<Vec<usize>>,
    radj: Vec<Vec<usize>>,
}

impl UnderlyingGraph {
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        let mut radj = vec![Vec::new(); n];
        for (u, v) in edges {
            assert!(u < n && v < n, "edge endpoint out of range");
            adj[u].push(v);
            radj[v].push(u);
        }
        for list in adj.iter_mut().chain(radj.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        UnderlyingGraph { n, adj, radj }
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn predecessors(&self, v: usize) -> &[usize] {
        &self.radj[v]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, succ) in self.adj.iter().enumerate() {
            for &v in succ {
                out.push((u, v));
            }
        }
        out
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Vertices reachable from `starts` (inclusive).
    pub fn reachable(&self, starts: impl IntoIterator<Item = usize>) -> Vec<bool> {
        bfs(&self.adj, starts)
    }

    /// Vertices that can reach `targets` (inclusive).
    pub fn coreachable(&self, targets: impl IntoIterator<Item = usize>) -> Vec<bool> {
        bfs(&self.radj, targets)
    }

    /// Strongly connected components, Tarjan. Returns `(count, comp)` with
    /// component ids in reverse topological order of the condensation
    /// (component 0 has no outgoing condensation edges only when it is last;
    /// callers should not rely on any particular numbering beyond membership).
    pub fn sccs(&self) -> (usize, Vec<usize>) {
        tarjan_scc(&self.adj)
    }

    /// Condensation graph plus the component map.
    pub fn condensation(&self) -> (UnderlyingGraph, Vec<usize>) {
        let (count, comp) = self.sccs();
        let mut edges = Vec::new();
        for (u, succ) in self.adj.iter().enumerate() {
            for &v in succ {
                if comp[u] != comp[v] {
                    edges.push((comp[u], comp[v]));
                }
            }
        }
        (UnderlyingGraph::from_edges(count, edges), comp)
    }
}

fn bfs(adj: &[Vec<usize>], starts: impl IntoIterator<Item = usize>) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut queue: Vec<usize> = starts.into_iter().collect();
    for &s in &queue {
        seen[s] = true;
    }
    while let Some(u) = queue.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push(v);
            }
        }
    }
    seen
}

fn tarjan_scc(adj: &[Vec<usize>]) -> (usize, Vec<usize>) {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comp = vec![usize::MAX; n];
    let mut next_index = 0usize;
    let mut comp_count = 0usize;
    // Iterative DFS: (vertex, next child position).
    let mut call_stack: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        call_stack.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut child)) = call_stack.last_mut() {
            if *child < adj[v].len() {
                let w = adj[v][*child];
                *child += 1;
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call_stack.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call_stack.pop();
                if let Some(&(parent, _)) = call_stack.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    while let Some(w) = stack.pop() {
                        on_stack[w] = false;
                        comp[w] = comp_count;
                        if w == v {
                            break;
                        }
                    }
                    comp_count += 1;
                }
            }
        }
    }
    (comp_count, comp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn chain_3() -> ProbabilisticModel {
        // s0 -> s1 -> g, probability 1 each.
        ProbabilisticModel::builder(ModelKind::Dtmc, 3)
            .transition(0, 1, ratio(1, 1))
            .transition(1, 2, ratio(1, 1))
            .initial(0, ratio(1, 1))
            .goal(2)
            .build()
            .unwrap()
    }

    #[test]
    fn absorbing_goal_is_valid() {
        let m = ProbabilisticModel::builder(ModelKind::Dtmc, 1)
            .initial(0, ratio(1, 1))
            .goal(0)
            .build()
            .unwrap();
        assert!(m.validate().is_empty());
    }

    #[test]
    fn row_sum_violation_is_reported() {
        let m = ProbabilisticModel::builder(ModelKind::Dtmc, 3)
            .transition(0, 1, ratio(7, 10))
            .transition(0, 2, ratio(5, 10))
            .build()
            .unwrap();
        let violations = m.validate();
        assert_eq!(violations.len(), 1);
        match &violations[0] {
            Violation::RowSumExceedsOne { state, sum, .. } => {
                assert_eq!(*state, 0);
                assert_eq!(*sum, ratio(12, 10));
            }
            other => panic!("unexpected violation {other:?}"),
        }
    }

    #[test]
    fn goal_with_outgoing_edge_is_flagged() {
        let m = ProbabilisticModel::builder(ModelKind::Dtmc, 2)
            .transition(0, 0, ratio(1, 2))
            .goal(0)
            .build()
            .unwrap();
        assert_eq!(m.validate(), vec![Violation::GoalNotTrap { state: 0 }]);
        let _ = m.actions(1); // trap state got its implicit empty row
    }

    #[test]
    fn induce_identity_and_edge_removal() {
        let m = chain_3();
        let all: BTreeSet<_> = (0..3).collect();
        assert_eq!(m.induce_subsystem(&all).unwrap(), m);

        let kept: BTreeSet<_> = [0, 2].into_iter().collect();
        let sub = m.induce_subsystem(&kept).unwrap();
        assert!(sub.actions(0)[0].transitions.is_empty());
        assert_eq!(sub.initial()[0], ratio(1, 1));
        assert!(sub.is_goal(2));
        assert!(sub.validate().is_empty());
    }

    #[test]
    fn induce_empty_is_empty() {
        let m = chain_3();
        let sub = m.induce_subsystem(&BTreeSet::new()).unwrap();
        assert!(sub.goal().is_empty());
        assert!(sub.initial().iter().all(|p| p.is_zero()));
    }

    #[test]
    fn induce_unknown_state_errors() {
        let m = chain_3();
        let kept: BTreeSet<_> = [0, 7].into_iter().collect();
        assert_eq!(m.induce_subsystem(&kept), Err(ModelError::UnknownState(7)));
    }

    #[test]
    fn underlying_graph_erases_actions_and_zero_edges() {
        let m = ProbabilisticModel::builder(ModelKind::Mdp, 3)
            .mdp_transition(0, "a", 1, ratio(3, 10))
            .mdp_transition(0, "b", 1, ratio(9, 10))
            .mdp_transition(0, "a", 2, ratio(0, 1))
            .build()
            .unwrap();
        let g = m.underlying_graph();
        assert_eq!(g.edges(), vec![(0, 1)]);
    }

    #[test]
    fn dtmc_single_edge_graph() {
        let m = ProbabilisticModel::builder(ModelKind::Dtmc, 2)
            .transition(0, 1, ratio(1, 2))
            .build()
            .unwrap();
        assert_eq!(m.underlying_graph().edges(), vec![(0, 1)]);
    }

    #[test]
    fn scc_on_cycle_plus_tail() {
        let g = UnderlyingGraph::from_edges(4, [(0, 1), (1, 2), (2, 0), (2, 3)]);
        let (count, comp) = g.sccs();
        assert_eq!(count, 2);
        assert_eq!(comp[0], comp[1]);
        assert_eq!(comp[1], comp[2]);
        assert_ne!(comp[0], comp[3]);
    }
}
