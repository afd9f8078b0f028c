//! Reachability-probability computation and the interface-assumption
//! transform.
//!
//! Exact mode solves DTMCs by rational Gaussian elimination restricted to
//! states that can reach the goal, and MDPs by memoryless policy iteration
//! whose evaluations are rational linear solves. Float mode solves DTMCs by
//! `f64` elimination and MDPs by value iteration from below with an absolute
//! residual stop; it reports the residual on non-convergence and is the
//! heuristic path.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::model::{ActionRow, ModelError, ModelKind, ProbabilisticModel, StateId};
use crate::scalar::{BigRational, Scalar};

/// Which optimisation the reachability value refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReachMode {
    /// Plain DTMC probability (no nondeterminism allowed in the model).
    Dtmc,
    /// Maximal probability over schedulers.
    Max,
    /// Minimal probability over schedulers.
    Min,
}

#[derive(Debug, Error)]
pub enum ReachError {
    #[error("mode dtmc requires a dtmc model")]
    ModeMismatch,
    #[error("assumption state {0} is not in the kept set")]
    AssumptionOutsideKept(StateId),
    #[error("assumption value {value} at state {state} is outside [0,1]")]
    AssumptionOutOfRange { state: StateId, value: BigRational },
    #[error("value iteration did not converge within {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("internal solver error: {0}")]
    Internal(String),
}

/// A partial function from states to `[0,1]`: the assumed value of each
/// interface state. The domain is exactly the key set.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InterfaceAssumption {
    values: BTreeMap<StateId, BigRational>,
}

impl InterfaceAssumption {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (StateId, BigRational)>) -> Self {
        InterfaceAssumption {
            values: pairs.into_iter().collect(),
        }
    }

    pub fn set(&mut self, s: StateId, v: BigRational) {
        self.values.insert(s, v);
    }

    pub fn domain(&self) -> impl Iterator<Item = StateId> + '_ {
        self.values.keys().copied()
    }

    pub fn get(&self, s: StateId) -> Option<&BigRational> {
        self.values.get(&s)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&StateId, &BigRational)> {
        self.values.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Result of [`apply_assumption`]: the transformed model plus the designated
/// goal state the assumption edges point to. When the kept goal set is empty
/// (or entirely swallowed by the assumption domain) a fresh synthetic goal
/// state is appended, so the transformed model may have one extra state.
#[derive(Debug, Clone)]
pub struct AssumedModel {
    pub model: ProbabilisticModel,
    pub designated_goal: StateId,
    pub original_states: usize,
}

/// Build `M^f` for the subsystem induced by `kept`: every state in the
/// assumption domain loses its outgoing edges and instead moves to the
/// designated goal with its assumed probability. Assumption states are
/// removed from the goal set so that their value is exactly the assumed one.
pub fn apply_assumption(
    model: &ProbabilisticModel,
    kept: &BTreeSet<StateId>,
    assumption: &InterfaceAssumption,
) -> Result<AssumedModel, ReachError> {
    for (s, v) in assumption.iter() {
        if !kept.contains(s) {
            return Err(ReachError::AssumptionOutsideKept(*s));
        }
        if *v < BigRational::zero() || *v > BigRational::one() {
            return Err(ReachError::AssumptionOutOfRange {
                state: *s,
                value: v.clone(),
            });
        }
    }
    let induced = model.induce_subsystem(kept)?;
    let n = induced.n_states();
    let domain: BTreeSet<StateId> = assumption.domain().collect();
    let existing_goal = induced
        .goal()
        .iter()
        .copied()
        .find(|g| !domain.contains(g));
    let (n_total, designated_goal) = match existing_goal {
        Some(g) => (n, g),
        None => (n + 1, n),
    };

    let mut b = ProbabilisticModel::builder(induced.kind(), n_total);
    for s in 0..n {
        if let Some(v) = assumption.get(s) {
            if !v.is_zero() {
                b = match induced.kind() {
                    ModelKind::Dtmc => b.transition(s, designated_goal, v.clone()),
                    ModelKind::Mdp => b.mdp_transition(s, "assume", designated_goal, v.clone()),
                };
            }
            continue;
        }
        for row in induced.actions(s) {
            for (t, p) in &row.transitions {
                b = match induced.kind() {
                    ModelKind::Dtmc => b.transition(s, *t, p.clone()),
                    ModelKind::Mdp => b.mdp_transition(s, &row.label, *t, p.clone()),
                };
            }
        }
    }
    for (s, p) in induced.initial().iter().enumerate() {
        if !p.is_zero() {
            b = b.initial(s, p.clone());
        }
    }
    for &g in induced.goal() {
        if !domain.contains(&g) {
            b = b.goal(g);
        }
    }
    if existing_goal.is_none() {
        b = b.goal(designated_goal);
    }
    let model = b.build()?;
    Ok(AssumedModel {
        model,
        designated_goal,
        original_states: n,
    })
}

/// Exact per-state reachability values.
pub fn reach_value_exact(
    model: &ProbabilisticModel,
    mode: ReachMode,
) -> Result<Vec<BigRational>, ReachError> {
    check_mode(model, mode)?;
    match effective_mode(model, mode) {
        ReachMode::Dtmc => dtmc_values_exact(model),
        ReachMode::Max => mdp_policy_iteration(model, false),
        ReachMode::Min => mdp_policy_iteration(model, true),
    }
}

/// Float per-state reachability values with absolute tolerance `tol`.
pub fn reach_value_float(
    model: &ProbabilisticModel,
    mode: ReachMode,
    tol: f64,
) -> Result<Vec<f64>, ReachError> {
    check_mode(model, mode)?;
    match effective_mode(model, mode) {
        ReachMode::Dtmc => dtmc_values_float(model),
        ReachMode::Max => mdp_value_iteration(model, false, tol),
        ReachMode::Min => mdp_value_iteration(model, true, tol),
    }
}

/// `apply_assumption` followed by `reach_value_exact`, restricted to the
/// original state space.
pub fn value_with_assumption_exact(
    model: &ProbabilisticModel,
    kept: &BTreeSet<StateId>,
    assumption: &InterfaceAssumption,
    mode: ReachMode,
) -> Result<Vec<BigRational>, ReachError> {
    let assumed = apply_assumption(model, kept, assumption)?;
    let mut v = reach_value_exact(&assumed.model, mode)?;
    v.truncate(assumed.original_states);
    Ok(v)
}

/// Float analogue of [`value_with_assumption_exact`].
pub fn value_with_assumption_float(
    model: &ProbabilisticModel,
    kept: &BTreeSet<StateId>,
    assumption: &InterfaceAssumption,
    mode: ReachMode,
    tol: f64,
) -> Result<Vec<f64>, ReachError> {
    let assumed = apply_assumption(model, kept, assumption)?;
    let mut v = reach_value_float(&assumed.model, mode, tol)?;
    v.truncate(assumed.original_states);
    Ok(v)
}

/// Probability of reaching the goal from the initial distribution.
pub fn initial_value<T: Scalar>(model: &ProbabilisticModel, values: &[T]) -> T {
    model
        .initial()
        .iter()
        .zip(values)
        .fold(T::zero(), |acc, (p, v)| {
            acc + T::from_rational(p) * v.clone()
        })
}

fn check_mode(model: &ProbabilisticModel, mode: ReachMode) -> Result<(), ReachError> {
    if mode == ReachMode::Dtmc && model.kind() != ModelKind::Dtmc {
        return Err(ReachError::ModeMismatch);
    }
    Ok(())
}

fn effective_mode(model: &ProbabilisticModel, mode: ReachMode) -> ReachMode {
    // A DTMC is a one-action MDP; min and max coincide with the plain value.
    if model.kind() == ModelKind::Dtmc {
        ReachMode::Dtmc
    } else {
        mode
    }
}

// ---------------------------------------------------------------------------
// DTMC solves

fn dtmc_values_exact(model: &ProbabilisticModel) -> Result<Vec<BigRational>, ReachError> {
    dtmc_values_generic::<BigRational>(model, &BigRational::zero())
}

fn dtmc_values_float(model: &ProbabilisticModel) -> Result<Vec<f64>, ReachError> {
    dtmc_values_generic::<f64>(model, &1e-300)
}

fn dtmc_values_generic<T: Scalar>(
    model: &ProbabilisticModel,
    pivot_tol: &T,
) -> Result<Vec<T>, ReachError> {
    let n = model.n_states();
    let graph = model.underlying_graph();
    let coreach = graph.coreachable(model.goal().iter().copied());
    let mut values = vec![T::zero(); n];
    for &g in model.goal() {
        values[g] = T::one();
    }
    let unknowns: Vec<StateId> = (0..n)
        .filter(|&s| coreach[s] && !model.is_goal(s))
        .collect();
    if unknowns.is_empty() {
        return Ok(values);
    }
    let index: BTreeMap<StateId, usize> = unknowns
        .iter()
        .enumerate()
        .map(|(i, &s)| (s, i))
        .collect();
    let k = unknowns.len();
    let mut a = vec![vec![T::zero(); k]; k];
    let mut b = vec![T::zero(); k];
    for (i, &s) in unknowns.iter().enumerate() {
        a[i][i] = T::one();
        let row = &model.actions(s)[0];
        for (t, p) in &row.transitions {
            let pv = T::from_rational(p);
            if model.is_goal(*t) {
                b[i] = b[i].clone() + pv;
            } else if let Some(&j) = index.get(t) {
                a[i][j] = a[i][j].clone() - pv;
            }
        }
    }
    let x = gauss_solve(a, b, pivot_tol)
        .ok_or_else(|| ReachError::Internal("singular reachability system".into()))?;
    for (i, &s) in unknowns.iter().enumerate() {
        values[s] = x[i].clone();
    }
    Ok(values)
}

/// Dense Gaussian elimination with pivoting; `None` on a singular matrix.
fn gauss_solve<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>, pivot_tol: &T) -> Option<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        // Exact mode takes any nonzero pivot; float mode the largest one.
        let pivot_row = if T::EXACT {
            (col..n).find(|&r| !a[r][col].is_zero())?
        } else {
            let r = (col..n).max_by(|&x, &y| {
                a[x][col]
                    .abs_val()
                    .partial_cmp(&a[y][col].abs_val())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })?;
            if a[r][col].abs_val() <= *pivot_tol {
                return None;
            }
            r
        };
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        let inv = a[col][col].clone();
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone() / inv.clone();
            for c in col..n {
                a[r][c] = a[r][c].clone() - f.clone() * a[col][c].clone();
            }
            b[r] = b[r].clone() - f.clone() * b[col].clone();
        }
    }
    let mut x = vec![T::zero(); n];
    for r in (0..n).rev() {
        let mut acc = b[r].clone();
        for c in r + 1..n {
            acc = acc - a[r][c].clone() * x[c].clone();
        }
        x[r] = acc / a[r][r].clone();
    }
    Some(x)
}

// ---------------------------------------------------------------------------
// MDP solves

/// States from which *some* scheduler avoids the goal almost surely
/// (the min-probability-zero states). Complement of the least fixpoint of
/// "every enabled action has a positive-probability successor closer in".
fn min_zero_states(model: &ProbabilisticModel) -> Vec<bool> {
    let n = model.n_states();
    let mut in_r = vec![false; n];
    for &g in model.goal() {
        in_r[g] = true;
    }
    loop {
        let mut changed = false;
        for s in 0..n {
            if in_r[s] || model.actions(s).is_empty() {
                continue;
            }
            let all_actions_hit = model.actions(s).iter().all(|row| {
                row.transitions
                    .iter()
                    .any(|(t, p)| !p.is_zero() && in_r[*t])
            });
            if all_actions_hit {
                in_r[s] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    in_r.iter().map(|r| !r).collect()
}

/// Unknown states for the optimisation: positive value is possible and the
/// state is not a goal.
fn mdp_unknowns(model: &ProbabilisticModel, minimize: bool) -> Vec<StateId> {
    let n = model.n_states();
    if minimize {
        let zero = min_zero_states(model);
        (0..n)
            .filter(|&s| !zero[s] && !model.is_goal(s))
            .collect()
    } else {
        let coreach = model
            .underlying_graph()
            .coreachable(model.goal().iter().copied());
        (0..n)
            .filter(|&s| coreach[s] && !model.is_goal(s))
            .collect()
    }
}

fn lookahead(row: &ActionRow, values: &[BigRational]) -> BigRational {
    row.transitions
        .iter()
        .fold(BigRational::zero(), |acc, (t, p)| {
            acc + p * &values[*t]
        })
}

/// Howard policy iteration with exact evaluations. Switches only on strict
/// improvement, which together with exact least-fixpoint evaluation makes
/// the value vector strictly monotone across rounds, so it terminates.
fn mdp_policy_iteration(
    model: &ProbabilisticModel,
    minimize: bool,
) -> Result<Vec<BigRational>, ReachError> {
    let n = model.n_states();
    let unknowns = mdp_unknowns(model, minimize);
    let mut values = vec![BigRational::zero(); n];
    for &g in model.goal() {
        values[g] = BigRational::one();
    }
    if unknowns.is_empty() {
        return Ok(values);
    }
    let mut policy: BTreeMap<StateId, usize> = unknowns.iter().map(|&s| (s, 0)).collect();
    let max_rounds = 1_000_000usize;
    for _ in 0..max_rounds {
        evaluate_policy(model, &unknowns, &policy, &mut values)?;
        let mut switched = false;
        for &s in &unknowns {
            let current = values[s].clone();
            let mut best: Option<(usize, BigRational)> = None;
            for (idx, row) in model.actions(s).iter().enumerate() {
                let v = lookahead(row, &values);
                let better = match &best {
                    None => true,
                    Some((_, bv)) => {
                        if minimize {
                            v < *bv
                        } else {
                            v > *bv
                        }
                    }
                };
                if better {
                    best = Some((idx, v));
                }
            }
            if let Some((idx, v)) = best {
                let improves = if minimize { v < current } else { v > current };
                if improves && policy[&s] != idx {
                    policy.insert(s, idx);
                    switched = true;
                }
            }
        }
        if !switched {
            return Ok(values);
        }
    }
    Err(ReachError::Internal(
        "policy iteration exceeded the round cap".into(),
    ))
}

/// Exact value of the chain induced by `policy` on the unknown states; the
/// rest of `values` (goals, zeros) is left untouched and read as constants.
fn evaluate_policy(
    model: &ProbabilisticModel,
    unknowns: &[StateId],
    policy: &BTreeMap<StateId, usize>,
    values: &mut Vec<BigRational>,
) -> Result<(), ReachError> {
    let unknown_set: BTreeSet<StateId> = unknowns.iter().copied().collect();
    // Restrict the linear system to states that can reach a value source
    // (goal or pinned positive state) under this policy; the rest get 0.
    let mut sources: Vec<StateId> = model.goal().iter().copied().collect();
    for (s, v) in values.iter().enumerate() {
        if !unknown_set.contains(&s) && !v.is_zero() && !model.is_goal(s) {
            sources.push(s);
        }
    }
    let mut radj: Vec<Vec<StateId>> = vec![Vec::new(); model.n_states()];
    for &s in unknowns {
        let row = &model.actions(s)[policy[&s]];
        for (t, p) in &row.transitions {
            if !p.is_zero() {
                radj[*t].push(s);
            }
        }
    }
    let mut live = vec![false; model.n_states()];
    let mut queue = sources;
    for &s in &queue {
        live[s] = true;
    }
    while let Some(u) = queue.pop() {
        for &v in &radj[u] {
            if !live[v] {
                live[v] = true;
                queue.push(v);
            }
        }
    }

    let solve_states: Vec<StateId> = unknowns.iter().copied().filter(|&s| live[s]).collect();
    for &s in unknowns {
        if !live[s] {
            values[s] = BigRational::zero();
        }
    }
    if solve_states.is_empty() {
        return Ok(());
    }
    let index: BTreeMap<StateId, usize> = solve_states
        .iter()
        .enumerate()
        .map(|(i, &s)| (s, i))
        .collect();
    let k = solve_states.len();
    let mut a = vec![vec![BigRational::zero(); k]; k];
    let mut b = vec![BigRational::zero(); k];
    for (i, &s) in solve_states.iter().enumerate() {
        a[i][i] = BigRational::one();
        let row = &model.actions(s)[policy[&s]];
        for (t, p) in &row.transitions {
            if let Some(&j) = index.get(t) {
                a[i][j] = a[i][j].clone() - p;
            } else {
                b[i] = b[i].clone() + p * &values[*t];
            }
        }
    }
    let x = gauss_solve(a, b, &BigRational::zero())
        .ok_or_else(|| ReachError::Internal("singular policy evaluation".into()))?;
    for (i, &s) in solve_states.iter().enumerate() {
        values[s] = x[i].clone();
    }
    Ok(())
}

fn mdp_value_iteration(
    model: &ProbabilisticModel,
    minimize: bool,
    tol: f64,
) -> Result<Vec<f64>, ReachError> {
    let n = model.n_states();
    let unknowns = mdp_unknowns(model, minimize);
    let mut values = vec![0.0f64; n];
    for &g in model.goal() {
        values[g] = 1.0;
    }
    if unknowns.is_empty() {
        return Ok(values);
    }
    // f64 snapshot of the transition structure of the unknown states.
    let rows: Vec<(StateId, Vec<Vec<(StateId, f64)>>)> = unknowns
        .iter()
        .map(|&s| {
            let acts = model
                .actions(s)
                .iter()
                .map(|row| {
                    row.transitions
                        .iter()
                        .map(|(t, p)| (*t, crate::scalar::rational_to_f64(p)))
                        .collect()
                })
                .collect();
            (s, acts)
        })
        .collect();
    let max_iters = 1_000_000usize;
    let mut residual = f64::INFINITY;
    for _ in 0..max_iters {
        residual = 0.0;
        for (s, acts) in &rows {
            let mut best: Option<f64> = None;
            for act in acts {
                let v: f64 = act.iter().map(|(t, p)| p * values[*t]).sum();
                best = Some(match best {
                    None => v,
                    Some(b) => {
                        if minimize {
                            b.min(v)
                        } else {
                            b.max(v)
                        }
                    }
                });
            }
            let v = best.unwrap_or(0.0);
            residual = residual.max((v - values[*s]).abs());
            values[*s] = v;
        }
        if residual < tol {
            return Ok(values);
        }
    }
    Err(ReachError::NonConvergence {
        iterations: max_iters,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelKind;
    use crate::scalar::{int, ratio};

    #[test]
    fn goal_state_has_value_one() {
        let m = ProbabilisticModel::builder(ModelKind::Dtmc, 1)
            .goal(0)
            .build()
            .unwrap();
        assert_eq!(reach_value_exact(&m, ReachMode::Dtmc).unwrap(), vec![int(1)]);
    }

    #[test]
    fn one_step_gambler() {
        let m = ProbabilisticModel::builder(ModelKind::Dtmc, 3)
            .transition(0, 1, ratio(1, 2))
            .transition(0, 2, ratio(1, 2))
            .initial(0, int(1))
            .goal(1)
            .build()
            .unwrap();
        let v = reach_value_exact(&m, ReachMode::Dtmc).unwrap();
        assert_eq!(v[0], ratio(1, 2));
        assert_eq!(initial_value(&m, &v), ratio(1, 2));
    }

    #[test]
    fn cycle_with_escape() {
        // s0 loops with 1/2, escapes to goal with 1/4, leaks 1/4: value 1/2.
        let m = ProbabilisticModel::builder(ModelKind::Dtmc, 2)
            .transition(0, 0, ratio(1, 2))
            .transition(0, 1, ratio(1, 4))
            .goal(1)
            .build()
            .unwrap();
        let v = reach_value_exact(&m, ReachMode::Dtmc).unwrap();
        assert_eq!(v[0], ratio(1, 2));
    }

    #[test]
    fn assumption_chains_probabilities() {
        let m = ProbabilisticModel::builder(ModelKind::Dtmc, 2)
            .transition(0, 1, ratio(1, 2))
            .initial(0, int(1))
            .build()
            .unwrap();
        let f = InterfaceAssumption::from_pairs([(1, ratio(2, 5))]);
        let kept: BTreeSet<_> = [0, 1].into_iter().collect();
        let v = value_with_assumption_exact(&m, &kept, &f, ReachMode::Dtmc).unwrap();
        assert_eq!(v[0], ratio(1, 5));
        assert_eq!(v[1], ratio(2, 5));
    }

    #[test]
    fn zero_assumption_kills_interface() {
        let m = ProbabilisticModel::builder(ModelKind::Dtmc, 3)
            .transition(0, 1, ratio(1, 2))
            .transition(1, 2, int(1))
            .goal(2)
            .build()
            .unwrap();
        let f = InterfaceAssumption::from_pairs([(1, int(0))]);
        let kept: BTreeSet<_> = [0, 1, 2].into_iter().collect();
        let v = value_with_assumption_exact(&m, &kept, &f, ReachMode::Dtmc).unwrap();
        assert_eq!(v[0], int(0));
        assert_eq!(v[1], int(0));
    }

    #[test]
    fn assumption_on_goal_state_overrides_goal() {
        let m = ProbabilisticModel::builder(ModelKind::Dtmc, 2)
            .transition(0, 1, int(1))
            .goal(1)
            .build()
            .unwrap();
        let f = InterfaceAssumption::from_pairs([(1, ratio(1, 3))]);
        let kept: BTreeSet<_> = [0, 1].into_iter().collect();
        let v = value_with_assumption_exact(&m, &kept, &f, ReachMode::Dtmc).unwrap();
        assert_eq!(v[0], ratio(1, 3));
        assert_eq!(v[1], ratio(1, 3));
    }

    #[test]
    fn assumption_domain_must_be_kept() {
        let m = ProbabilisticModel::builder(ModelKind::Dtmc, 2)
            .transition(0, 1, int(1))
            .build()
            .unwrap();
        let f = InterfaceAssumption::from_pairs([(1, ratio(1, 2))]);
        let kept: BTreeSet<_> = [0].into_iter().collect();
        assert!(matches!(
            apply_assumption(&m, &kept, &f),
            Err(ReachError::AssumptionOutsideKept(1))
        ));
    }

    #[test]
    fn mdp_max_and_min_disagree() {
        let m = ProbabilisticModel::builder(ModelKind::Mdp, 3)
            .mdp_transition(0, "a", 1, int(1))
            .mdp_transition(0, "b", 2, int(1))
            .mdp_transition(1, "c", 1, int(1))
            .initial(0, int(1))
            .goal(2)
            .build()
            .unwrap();
        let max = reach_value_exact(&m, ReachMode::Max).unwrap();
        let min = reach_value_exact(&m, ReachMode::Min).unwrap();
        assert_eq!(max[0], int(1));
        assert_eq!(min[0], int(0));
    }

    #[test]
    fn min_subadditivity_fails_on_branching_mdp() {
        // x picks between y and z; f1 = (0, 1/2), f2 = (1/2, 0) on (y, z).
        let m = ProbabilisticModel::builder(ModelKind::Mdp, 3)
            .mdp_transition(0, "a", 1, int(1))
            .mdp_transition(0, "b", 2, int(1))
            .initial(0, int(1))
            .build()
            .unwrap();
        let kept: BTreeSet<_> = [0, 1, 2].into_iter().collect();
        let f1 = InterfaceAssumption::from_pairs([(1, int(0)), (2, ratio(1, 2))]);
        let f2 = InterfaceAssumption::from_pairs([(1, ratio(1, 2)), (2, int(0))]);
        let f12 = InterfaceAssumption::from_pairs([(1, ratio(1, 2)), (2, ratio(1, 2))]);
        let v1 = value_with_assumption_exact(&m, &kept, &f1, ReachMode::Min).unwrap();
        let v2 = value_with_assumption_exact(&m, &kept, &f2, ReachMode::Min).unwrap();
        let v12 = value_with_assumption_exact(&m, &kept, &f12, ReachMode::Min).unwrap();
        assert_eq!(v1[0], int(0));
        assert_eq!(v2[0], int(0));
        assert_eq!(v12[0], ratio(1, 2));
    }

    #[test]
    fn policy_iteration_handles_value_preserving_cycles() {
        // s0: stay in a cycle with s1 or jump to goal with 1/2.
        let m = ProbabilisticModel::builder(ModelKind::Mdp, 3)
            .mdp_transition(0, "jump", 2, ratio(1, 2))
            .mdp_transition(0, "cycle", 1, int(1))
            .mdp_transition(1, "back", 0, int(1))
            .goal(2)
            .build()
            .unwrap();
        let v = reach_value_exact(&m, ReachMode::Max).unwrap();
        assert_eq!(v[0], ratio(1, 2));
        assert_eq!(v[1], ratio(1, 2));
        let vmin = reach_value_exact(&m, ReachMode::Min).unwrap();
        assert_eq!(vmin[0], int(0));
    }

    #[test]
    fn float_matches_exact_on_small_chain() {
        let m = ProbabilisticModel::builder(ModelKind::Mdp, 4)
            .mdp_transition(0, "a", 1, ratio(1, 3))
            .mdp_transition(0, "a", 2, ratio(1, 3))
            .mdp_transition(0, "b", 3, ratio(1, 2))
            .mdp_transition(1, "a", 3, ratio(3, 4))
            .mdp_transition(2, "a", 0, int(1))
            .goal(3)
            .build()
            .unwrap();
        for mode in [ReachMode::Max, ReachMode::Min] {
            let exact = reach_value_exact(&m, mode).unwrap();
            let float = reach_value_float(&m, mode, 1e-12).unwrap();
            for (e, f) in exact.iter().zip(&float) {
                assert!((crate::scalar::rational_to_f64(e) - f).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn dtmc_mode_on_mdp_is_rejected() {
        let m = ProbabilisticModel::builder(ModelKind::Mdp, 1).build().unwrap();
        assert!(matches!(
            reach_value_exact(&m, ReachMode::Dtmc),
            Err(ReachError::ModeMismatch)
        ));
    }
}
