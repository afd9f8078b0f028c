//! Directed tree and path partitions of a directed graph.
//!
//! A partition is valid when the quotient graph (edges between distinct
//! blocks, self-loops ignored) is a directed tree: the undirected skeleton is
//! a tree and every block has in-degree at most one. Any strongly connected
//! component therefore lands inside a single block. The width of a partition
//! is its largest block.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{StateId, UnderlyingGraph};
use crate::par::{map_reduce, Parallelism};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionShape {
    Tree,
    Path,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("block {0} is empty")]
    EmptyBlock(usize),
    #[error("state {state} appears in blocks {a} and {b}")]
    Overlap { state: StateId, a: usize, b: usize },
    #[error("state {0} is not covered by any block")]
    Coverage(StateId),
    #[error("block references unknown state {0}")]
    UnknownState(StateId),
    #[error("quotient has a 2-cycle between blocks {a} and {b}")]
    QuotientTwoCycle { a: usize, b: usize },
    #[error("block {0} has quotient in-degree greater than one")]
    QuotientInDegree(usize),
    #[error("quotient contains a directed cycle")]
    QuotientCycle,
    #[error("quotient is not connected (forest with {roots} roots)")]
    QuotientDisconnected { roots: usize },
    #[error("quotient is a tree but not a path (block {0} has several children)")]
    NotAPath(usize),
    #[error("graph has {size} vertices, exhaustive search capped at {cap}")]
    CapExceeded { size: usize, cap: usize },
    #[error("block {0} mixes goal and non-goal states")]
    GoalBlockMixed(usize),
    #[error("splitting goal states out of block {0} breaks the tree property")]
    SplitBreaksTree(usize),
    #[error("merging root candidate blocks does not yield a directed tree partition")]
    MergeFailed,
}

/// A validated directed tree partition with its quotient tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedTreePartition {
    blocks: Vec<BTreeSet<StateId>>,
    block_of: Vec<usize>,
    root: usize,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
}

impl DirectedTreePartition {
    pub fn blocks(&self) -> &[BTreeSet<StateId>] {
        &self.blocks
    }

    pub fn block_of(&self, s: StateId) -> usize {
        self.block_of[s]
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, b: usize) -> Option<usize> {
        self.parent[b]
    }

    pub fn children(&self, b: usize) -> &[usize] {
        &self.children[b]
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Maximum block cardinality.
    pub fn width(&self) -> usize {
        self.blocks.iter().map(|b| b.len()).max().unwrap_or(0)
    }

    /// True when every block has at most one child (the quotient is a path).
    pub fn is_path(&self) -> bool {
        self.children.iter().all(|c| c.len() <= 1)
    }

    /// Blocks ordered children-before-parents.
    pub fn bottom_up_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.n_blocks());
        let mut stack = vec![(self.root, false)];
        while let Some((b, expanded)) = stack.pop() {
            if expanded {
                order.push(b);
            } else {
                stack.push((b, true));
                for &c in &self.children[b] {
                    stack.push((c, false));
                }
            }
        }
        order
    }

    /// Interface sets relative to `initial` states (all of which count as
    /// incoming for their block).
    pub fn navigation(&self, g: &UnderlyingGraph, initial: &BTreeSet<StateId>) -> TreeNavigation {
        let nb = self.n_blocks();
        let mut inc = vec![BTreeSet::new(); nb];
        let mut exit = vec![BTreeSet::new(); nb];
        for (b, states) in self.blocks.iter().enumerate() {
            for &s in states {
                if initial.contains(&s) {
                    inc[b].insert(s);
                } else if let Some(p) = self.parent[b] {
                    if g.predecessors(s).iter().any(|&q| self.block_of[q] == p) {
                        inc[b].insert(s);
                    }
                }
                if g.successors(s).iter().any(|&t| self.block_of[t] != b) {
                    exit[b].insert(s);
                }
            }
        }
        let mut out = vec![BTreeSet::new(); nb];
        for b in 0..nb {
            for &c in &self.children[b] {
                out[b].extend(inc[c].iter().copied());
            }
        }
        let mut cl = vec![BTreeSet::new(); nb];
        for &b in &self.bottom_up_order() {
            let mut closure: BTreeSet<StateId> = self.blocks[b].clone();
            for &c in &self.children[b] {
                closure.extend(cl[c].iter().copied());
            }
            cl[b] = closure;
        }
        TreeNavigation { inc, out, exit, cl }
    }
}

/// Per-block interface sets: `inc` (states entered from the parent block or
/// initial), `out` (union of the children's `inc`), `exit` (states with an
/// edge leaving the block) and `cl` (states of the block's subtree).
#[derive(Debug, Clone)]
pub struct TreeNavigation {
    pub inc: Vec<BTreeSet<StateId>>,
    pub out: Vec<BTreeSet<StateId>>,
    pub exit: Vec<BTreeSet<StateId>>,
    pub cl: Vec<BTreeSet<StateId>>,
}

/// Check `blocks` against the directed-tree-partition conditions for `g` and
/// return the navigable partition.
pub fn validate_partition(
    g: &UnderlyingGraph,
    blocks: &[BTreeSet<StateId>],
) -> Result<DirectedTreePartition, PartitionError> {
    let n = g.n_vertices();
    let nb = blocks.len();
    let mut block_of = vec![usize::MAX; n];
    for (i, block) in blocks.iter().enumerate() {
        if block.is_empty() {
            return Err(PartitionError::EmptyBlock(i));
        }
        for &s in block {
            if s >= n {
                return Err(PartitionError::UnknownState(s));
            }
            if block_of[s] != usize::MAX {
                return Err(PartitionError::Overlap {
                    state: s,
                    a: block_of[s],
                    b: i,
                });
            }
            block_of[s] = i;
        }
    }
    if let Some(s) = (0..n).find(|&s| block_of[s] == usize::MAX) {
        return Err(PartitionError::Coverage(s));
    }

    let mut qedges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (u, v) in g.edges() {
        let (bu, bv) = (block_of[u], block_of[v]);
        if bu != bv {
            qedges.insert((bu, bv));
        }
    }
    for &(a, b) in &qedges {
        if a < b && qedges.contains(&(b, a)) {
            return Err(PartitionError::QuotientTwoCycle { a, b });
        }
    }
    let mut parent = vec![None; nb];
    for &(a, b) in &qedges {
        if parent[b].is_some() {
            return Err(PartitionError::QuotientInDegree(b));
        }
        parent[b] = Some(a);
    }
    let roots: Vec<usize> = (0..nb).filter(|&b| parent[b].is_none()).collect();
    if roots.is_empty() {
        return Err(PartitionError::QuotientCycle);
    }
    if roots.len() > 1 {
        return Err(PartitionError::QuotientDisconnected { roots: roots.len() });
    }
    let root = roots[0];
    // With in-degree <= 1 and a unique root, a parent-chain walk exceeding
    // the block count means a directed cycle hangs off somewhere.
    for mut b in 0..nb {
        let mut steps = 0usize;
        while let Some(p) = parent[b] {
            b = p;
            steps += 1;
            if steps > nb {
                return Err(PartitionError::QuotientCycle);
            }
        }
    }
    let mut children = vec![Vec::new(); nb];
    for (b, p) in parent.iter().enumerate() {
        if let Some(p) = p {
            children[*p].push(b);
        }
    }
    Ok(DirectedTreePartition {
        blocks: blocks.to_vec(),
        block_of,
        root,
        parent,
        children,
    })
}

/// Exhaustive minimum width over all directed tree (or path) partitions.
/// Enumerates set partitions as restricted growth strings over the SCC
/// condensation (strongly connected states can never be separated). Ties
/// are broken by the lexicographically smallest growth string.
pub fn exact_width(
    g: &UnderlyingGraph,
    shape: PartitionShape,
    cap: usize,
    par: Parallelism,
) -> Result<(usize, DirectedTreePartition), PartitionError> {
    let n = g.n_vertices();
    if n > cap {
        return Err(PartitionError::CapExceeded { size: n, cap });
    }
    if n == 0 {
        return Err(PartitionError::Coverage(0));
    }
    let (cond, comp) = g.condensation();
    let k = cond.n_vertices();
    // Canonical component order: by smallest member state.
    let mut comp_order: Vec<usize> = (0..k).collect();
    let mut first_member = vec![usize::MAX; k];
    for s in (0..n).rev() {
        first_member[comp[s]] = s;
    }
    comp_order.sort_by_key(|&c| first_member[c]);
    let members: Vec<Vec<StateId>> = comp_order
        .iter()
        .map(|&c| (0..n).filter(|&s| comp[s] == c).collect())
        .collect();

    let prefix_len = k.min(3);
    let mut prefixes: Vec<Vec<usize>> = Vec::new();
    enumerate_rgs(&mut vec![0; 0], prefix_len, &mut |rgs| {
        prefixes.push(rgs.to_vec())
    });

    type Best = Option<(usize, Vec<usize>)>;
    let combine = |a: Best, b: Best| -> Best {
        match (a, b) {
            (None, x) | (x, None) => x,
            (Some(x), Some(y)) => {
                if (y.0, &y.1) < (x.0, &x.1) {
                    Some(y)
                } else {
                    Some(x)
                }
            }
        }
    };
    let eval = |prefix: Vec<usize>| -> Best {
        let mut best: Best = None;
        let mut rgs = prefix.clone();
        enumerate_rgs(&mut rgs, k, &mut |full| {
            let blocks = rgs_to_blocks(full, &members);
            if let Ok(p) = validate_partition(g, &blocks) {
                if shape == PartitionShape::Path && !p.is_path() {
                    return;
                }
                let w = p.width();
                let cand = Some((w, full.to_vec()));
                best = combine(best.take(), cand);
            }
        });
        best
    };
    let best = map_reduce(prefixes, par, None, eval, combine);
    match best {
        Some((w, rgs)) => {
            let blocks = rgs_to_blocks(&rgs, &members);
            let p = validate_partition(g, &blocks).expect("winning partition validates");
            Ok((w, p))
        }
        None => unreachable!("the single-block partition is always valid"),
    }
}

fn rgs_to_blocks(rgs: &[usize], members: &[Vec<StateId>]) -> Vec<BTreeSet<StateId>> {
    let nb = rgs.iter().copied().max().map_or(0, |m| m + 1);
    let mut blocks = vec![BTreeSet::new(); nb];
    for (i, &b) in rgs.iter().enumerate() {
        blocks[b].extend(members[i].iter().copied());
    }
    blocks
}

/// Extend `rgs` to all restricted growth strings of length `len`, invoking
/// `f` on each completion (in lexicographic order). `rgs` is restored.
fn enumerate_rgs(rgs: &mut Vec<usize>, len: usize, f: &mut impl FnMut(&[usize])) {
    if rgs.len() == len {
        f(rgs);
        return;
    }
    let max = rgs.iter().copied().max().map_or(0, |m| m + 1);
    for next in 0..=max {
        rgs.push(next);
        enumerate_rgs(rgs, len, f);
        rgs.pop();
    }
}

/// The width-decision gadget: two fresh vertices `i` (source, id `n`) and `e`
/// (sink, id `n+1`) with edges `i -> v` and `v -> e` for every original `v`.
pub fn bisection_gadget(g: &UnderlyingGraph) -> UnderlyingGraph {
    let n = g.n_vertices();
    let mut edges = g.edges();
    for v in 0..n {
        edges.push((n, v));
        edges.push((v, n + 1));
    }
    UnderlyingGraph::from_edges(n + 2, edges)
}

/// Brute-force oneway-bisection test: is there a half/half split `V0, V1`
/// of the vertices with no edge from `V1` back into `V0`?
pub fn has_oneway_bisection(g: &UnderlyingGraph) -> bool {
    let n = g.n_vertices();
    if n % 2 != 0 {
        return false;
    }
    if n == 0 {
        return true;
    }
    let edges = g.edges();
    // Subsets of size n/2 containing vertex 0 or not; plain bitmask scan.
    for mask in 0u64..(1u64 << n) {
        if (mask.count_ones() as usize) != n / 2 {
            continue;
        }
        let bad = edges.iter().any(|&(u, v)| {
            let u_in_v0 = mask & (1 << u) != 0;
            let v_in_v0 = mask & (1 << v) != 0;
            !u_in_v0 && v_in_v0
        });
        if !bad {
            return true;
        }
    }
    false
}

/// SCC condensation plus level merging: a valid directed tree partition for
/// any graph without hand-made input. Falls back to the single-block
/// partition when level blocks do not quotient to a path.
pub fn heuristic_layer_partition(g: &UnderlyingGraph) -> DirectedTreePartition {
    let n = g.n_vertices();
    assert!(n > 0, "empty graph has no partition");
    let (cond, comp) = g.condensation();
    let k = cond.n_vertices();

    // Longest-path levels over the condensation DAG.
    let mut level = vec![0usize; k];
    let order = topo_order(&cond);
    for &c in &order {
        for &d in cond.successors(c) {
            level[d] = level[d].max(level[c] + 1);
        }
    }
    // Merge levels until every condensation edge spans exactly one level.
    loop {
        compact_levels(&mut level);
        let violation = cond
            .edges()
            .into_iter()
            .find(|&(u, v)| level[v] > level[u] + 1);
        match violation {
            Some((u, v)) => {
                let (lo, hi) = (level[u], level[v]);
                for l in level.iter_mut() {
                    if *l > lo && *l <= hi {
                        *l = lo + 1;
                    }
                }
            }
            None => break,
        }
    }
    let n_levels = level.iter().copied().max().unwrap_or(0) + 1;
    let mut blocks = vec![BTreeSet::new(); n_levels];
    for s in 0..n {
        blocks[level[comp[s]]].insert(s);
    }
    match validate_partition(g, &blocks) {
        Ok(p) => p,
        Err(_) => {
            let whole: BTreeSet<StateId> = (0..n).collect();
            validate_partition(g, &[whole]).expect("single block is always a tree partition")
        }
    }
}

fn topo_order(g: &UnderlyingGraph) -> Vec<usize> {
    let n = g.n_vertices();
    let mut indeg = vec![0usize; n];
    for (_, v) in g.edges() {
        indeg[v] += 1;
    }
    let mut queue: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(u) = queue.pop() {
        order.push(u);
        for &v in g.successors(u) {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                queue.push(v);
            }
        }
    }
    order
}

fn compact_levels(level: &mut [usize]) {
    let mut seen: Vec<usize> = level.to_vec();
    seen.sort_unstable();
    seen.dedup();
    for l in level.iter_mut() {
        *l = seen.binary_search(l).unwrap();
    }
}

/// Merge all root-candidate blocks (quotient in-degree zero, or containing an
/// initial state) into a single root block. Returns the merged block list and
/// the width before/after so callers can report the increase.
pub fn merge_root_blocks(
    g: &UnderlyingGraph,
    blocks: &[BTreeSet<StateId>],
    initial: &BTreeSet<StateId>,
) -> Result<(Vec<BTreeSet<StateId>>, usize, usize), PartitionError> {
    let width_before = blocks.iter().map(|b| b.len()).max().unwrap_or(0);
    let mut block_of = std::collections::BTreeMap::new();
    for (i, b) in blocks.iter().enumerate() {
        for &s in b {
            block_of.insert(s, i);
        }
    }
    let mut has_parent = vec![false; blocks.len()];
    for (u, v) in g.edges() {
        let (bu, bv) = match (block_of.get(&u), block_of.get(&v)) {
            (Some(a), Some(b)) => (*a, *b),
            _ => continue,
        };
        if bu != bv {
            has_parent[bv] = true;
        }
    }
    let mut candidates: BTreeSet<usize> = (0..blocks.len()).filter(|&b| !has_parent[b]).collect();
    for &s in initial {
        if let Some(&b) = block_of.get(&s) {
            candidates.insert(b);
        }
    }
    let mut merged: Vec<BTreeSet<StateId>> = Vec::new();
    let mut root_block = BTreeSet::new();
    for (i, b) in blocks.iter().enumerate() {
        if candidates.contains(&i) {
            root_block.extend(b.iter().copied());
        } else {
            merged.push(b.clone());
        }
    }
    merged.insert(0, root_block);
    let width_after = merged.iter().map(|b| b.len()).max().unwrap_or(0);
    validate_partition(g, &merged).map_err(|_| PartitionError::MergeFailed)?;
    Ok((merged, width_before, width_after))
}

/// Split goal states out of mixed blocks, keeping the result only when it is
/// still a directed tree partition.
pub fn split_goal_blocks(
    g: &UnderlyingGraph,
    blocks: &[BTreeSet<StateId>],
    goal: &BTreeSet<StateId>,
) -> Result<Vec<BTreeSet<StateId>>, PartitionError> {
    let mut out = Vec::new();
    let mut split_any = None;
    for (i, b) in blocks.iter().enumerate() {
        let goal_part: BTreeSet<StateId> = b.intersection(goal).copied().collect();
        if goal_part.is_empty() || goal_part.len() == b.len() {
            out.push(b.clone());
        } else {
            split_any = Some(i);
            out.push(b.difference(goal).copied().collect());
            out.push(goal_part);
        }
    }
    if let Some(i) = split_any {
        validate_partition(g, &out).map_err(|_| PartitionError::SplitBreaksTree(i))?;
    }
    Ok(out)
}

/// Every block must be entirely goal or entirely non-goal.
pub fn check_goal_blocks(
    blocks: &[BTreeSet<StateId>],
    goal: &BTreeSet<StateId>,
) -> Result<(), PartitionError> {
    for (i, b) in blocks.iter().enumerate() {
        let inter = b.intersection(goal).count();
        if inter != 0 && inter != b.len() {
            return Err(PartitionError::GoalBlockMixed(i));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(states: &[StateId]) -> BTreeSet<StateId> {
        states.iter().copied().collect()
    }

    #[test]
    fn three_cycle_single_block_is_valid() {
        let g = UnderlyingGraph::from_edges(3, [(0, 1), (1, 2), (2, 0)]);
        let p = validate_partition(&g, &[set(&[0, 1, 2])]).unwrap();
        assert_eq!(p.width(), 3);
        assert!(p.is_path());
    }

    #[test]
    fn split_cycle_is_a_two_cycle() {
        let g = UnderlyingGraph::from_edges(3, [(0, 1), (1, 2), (2, 0)]);
        let err = validate_partition(&g, &[set(&[0, 1]), set(&[2])]).unwrap_err();
        assert!(matches!(err, PartitionError::QuotientTwoCycle { .. }));
    }

    #[test]
    fn forest_is_rejected() {
        let g = UnderlyingGraph::from_edges(4, [(0, 1), (2, 3)]);
        let err = validate_partition(&g, &[set(&[0]), set(&[1]), set(&[2]), set(&[3])])
            .unwrap_err();
        assert!(matches!(err, PartitionError::QuotientDisconnected { roots: 2 }));
    }

    #[test]
    fn in_degree_two_is_rejected() {
        let g = UnderlyingGraph::from_edges(3, [(0, 2), (1, 2)]);
        // Blocks {0},{1},{2}: block of 2 has two parents. The two roots are
        // found first.
        let err =
            validate_partition(&g, &[set(&[0]), set(&[1]), set(&[2])]).unwrap_err();
        assert!(matches!(
            err,
            PartitionError::QuotientInDegree(_) | PartitionError::QuotientDisconnected { .. }
        ));
    }

    #[test]
    fn coverage_and_overlap_detected() {
        let g = UnderlyingGraph::from_edges(2, [(0, 1)]);
        assert!(matches!(
            validate_partition(&g, &[set(&[0])]),
            Err(PartitionError::Coverage(1))
        ));
        assert!(matches!(
            validate_partition(&g, &[set(&[0, 1]), set(&[1])]),
            Err(PartitionError::Overlap { state: 1, .. })
        ));
    }

    #[test]
    fn width_singletons_on_path() {
        let g = UnderlyingGraph::from_edges(3, [(0, 1), (1, 2)]);
        let p = validate_partition(&g, &[set(&[0]), set(&[1]), set(&[2])]).unwrap();
        assert_eq!(p.width(), 1);
        assert_eq!(p.root(), 0);
        assert_eq!(p.children(0), &[1]);
    }

    #[test]
    fn exact_width_on_path_and_cycle() {
        let path = UnderlyingGraph::from_edges(3, [(0, 1), (1, 2)]);
        let (w, _) = exact_width(&path, PartitionShape::Tree, 12, Parallelism::Sequential).unwrap();
        assert_eq!(w, 1);

        let cycle = UnderlyingGraph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        let (w, p) = exact_width(&cycle, PartitionShape::Path, 12, Parallelism::Sequential).unwrap();
        assert_eq!(w, 5);
        assert_eq!(p.n_blocks(), 1);
    }

    #[test]
    fn exact_width_cap() {
        let g = UnderlyingGraph::from_edges(5, []);
        assert!(matches!(
            exact_width(&g, PartitionShape::Tree, 4, Parallelism::Sequential),
            Err(PartitionError::CapExceeded { size: 5, cap: 4 })
        ));
    }

    #[test]
    fn gadget_shape() {
        let g = UnderlyingGraph::from_edges(2, [(0, 1)]);
        let gadget = bisection_gadget(&g);
        assert_eq!(gadget.n_vertices(), 4);
        let mut edges = gadget.edges();
        edges.sort_unstable();
        assert_eq!(
            edges,
            vec![(0, 1), (0, 3), (1, 3), (2, 0), (2, 1)]
        );
    }

    #[test]
    fn oneway_bisection_trivial_cases() {
        let yes = UnderlyingGraph::from_edges(2, [(0, 1)]);
        assert!(has_oneway_bisection(&yes));
        let no = UnderlyingGraph::from_edges(2, [(0, 1), (1, 0)]);
        assert!(!has_oneway_bisection(&no));
        let odd = UnderlyingGraph::from_edges(3, []);
        assert!(!has_oneway_bisection(&odd));
    }

    #[test]
    fn heuristic_on_dag_gives_levels() {
        let g = UnderlyingGraph::from_edges(4, [(0, 1), (1, 2), (2, 3)]);
        let p = heuristic_layer_partition(&g);
        assert_eq!(p.width(), 1);
        assert_eq!(p.n_blocks(), 4);
    }

    #[test]
    fn heuristic_on_scc_gives_single_block() {
        let g = UnderlyingGraph::from_edges(3, [(0, 1), (1, 2), (2, 0)]);
        let p = heuristic_layer_partition(&g);
        assert_eq!(p.n_blocks(), 1);
        assert_eq!(p.width(), 3);
    }

    #[test]
    fn heuristic_merges_skip_edges() {
        // 0 -> 1 -> 2 -> 3 with a skip edge 0 -> 3.
        let g = UnderlyingGraph::from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)]);
        let p = heuristic_layer_partition(&g);
        // Levels 1..3 collapse into one block.
        assert_eq!(p.n_blocks(), 2);
        assert!(p.width() <= 3);
    }

    #[test]
    fn navigation_interfaces() {
        // Two blocks: {0,1} -> {2,3}; edges 1->2, 2->3, 3 exits nowhere.
        let g = UnderlyingGraph::from_edges(4, [(0, 1), (1, 2), (2, 3)]);
        let p = validate_partition(&g, &[set(&[0, 1]), set(&[2, 3])]).unwrap();
        let nav = p.navigation(&g, &set(&[0]));
        assert_eq!(nav.inc[0], set(&[0]));
        assert_eq!(nav.inc[1], set(&[2]));
        assert_eq!(nav.out[0], set(&[2]));
        assert_eq!(nav.exit[0], set(&[1]));
        assert_eq!(nav.cl[0], set(&[0, 1, 2, 3]));
        assert_eq!(nav.cl[1], set(&[2, 3]));
    }

    #[test]
    fn split_goal_blocks_when_tree_allows() {
        let g = UnderlyingGraph::from_edges(3, [(0, 1), (1, 2)]);
        let blocks = vec![set(&[0]), set(&[1, 2])];
        let goal = set(&[2]);
        let split = split_goal_blocks(&g, &blocks, &goal).unwrap();
        assert_eq!(split.len(), 3);
        assert!(check_goal_blocks(&split, &goal).is_ok());
    }

    #[test]
    fn merge_roots_repairs_forest() {
        let g = UnderlyingGraph::from_edges(4, [(0, 2), (1, 2), (2, 3)]);
        let blocks = vec![set(&[0]), set(&[1]), set(&[2]), set(&[3])];
        let initial = set(&[0, 1]);
        let (merged, before, after) = merge_root_blocks(&g, &blocks, &initial).unwrap();
        assert_eq!(before, 1);
        assert_eq!(after, 2);
        assert!(validate_partition(&g, &merged).is_ok());
    }
}
