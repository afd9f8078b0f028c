//! Domination between partial subsystems and the removeDominated filter.
//!
//! A partial subsystem for an interface `I` is a state set together with its
//! I-point: the vector of per-interface reachability values (zero at
//! interface states it does not keep). A set dominates a point when the
//! point is a convex combination of the axis projections of no-larger
//! members; strong domination asks for a single pointwise-larger no-larger
//! member. removeDominated walks the size classes in ascending order,
//! accumulates all projections, and keeps exactly the points that are not
//! convex combinations of the rest, which realises both contract bullets:
//! every discarded point is dominated by the survivors and no survivor is
//! dominated by the others.
//!
//! Everything runs over exact rationals by default; the `f64` instantiation
//! compares through the supplied tolerance and is heuristic.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::lp::{dominated_by_boxes, in_convex_hull};
use crate::model::StateId;
use crate::scalar::Scalar;

pub const DEFAULT_INTERFACE_CAP: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HullError {
    #[error("interface dimension {dim} exceeds the projection cap {cap}")]
    CapExceeded { dim: usize, cap: usize },
    #[error("partial subsystems disagree on the interface dimension")]
    InterfaceMismatch,
}

/// Which domination relation removeDominated prunes with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DominationMode {
    Standard,
    Strong,
}

/// A state set downstream of an interface together with its I-point.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialSubsystem<T> {
    pub states: BTreeSet<StateId>,
    pub point: Vec<T>,
}

impl<T: Scalar> PartialSubsystem<T> {
    pub fn new(states: BTreeSet<StateId>, point: Vec<T>) -> Self {
        PartialSubsystem { states, point }
    }

    pub fn size(&self) -> usize {
        self.states.len()
    }
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct DominationStats {
    pub hull_calls: usize,
    pub points_pruned: usize,
}

impl DominationStats {
    pub fn merge(&mut self, other: DominationStats) {
        self.hull_calls += other.hull_calls;
        self.points_pruned += other.points_pruned;
    }
}

fn vec_eq<T: Scalar>(a: &[T], b: &[T], tol: &T) -> bool {
    if a.len() != b.len() {
        return false;
    }
    if T::EXACT || tol.is_zero() {
        return a == b;
    }
    a.iter()
        .zip(b)
        .all(|(x, y)| (x.clone() - y.clone()).abs_val() <= *tol)
}

fn vec_ge<T: Scalar>(a: &[T], b: &[T], tol: &T) -> bool {
    if T::EXACT || tol.is_zero() {
        return a.iter().zip(b).all(|(x, y)| x >= y);
    }
    a.iter()
        .zip(b)
        .all(|(x, y)| x.clone() >= y.clone() - tol.clone())
}

/// All axis-subset zeroings of a point, duplicates removed. `2^dim` vectors
/// in the worst case, hence the cap.
pub fn projections<T: Scalar>(point: &[T], cap: usize) -> Result<Vec<Vec<T>>, HullError> {
    let dim = point.len();
    if dim > cap {
        return Err(HullError::CapExceeded { dim, cap });
    }
    let mut out: Vec<Vec<T>> = Vec::new();
    for mask in 0..(1usize << dim) {
        let proj: Vec<T> = point
            .iter()
            .enumerate()
            .map(|(i, v)| {
                if mask & (1 << i) != 0 {
                    v.clone()
                } else {
                    T::zero()
                }
            })
            .collect();
        if !out.iter().any(|p| p == &proj) {
            out.push(proj);
        }
    }
    Ok(out)
}

/// Incremental convex-hull accumulator over the projections of I-points,
/// remembering which partial subsystem contributed each point. The vertex
/// set is recomputed lazily and always equals the vertices of the convex
/// hull of everything added so far.
#[derive(Debug, Clone)]
pub struct HullAccumulator<T> {
    dim: usize,
    tol: T,
    /// Distinct point values with the ids of their contributing subsystems.
    entries: Vec<(Vec<T>, BTreeSet<usize>)>,
    vertices: Option<Vec<bool>>,
}

impl<T: Scalar> HullAccumulator<T> {
    pub fn new(dim: usize, tol: T) -> Self {
        HullAccumulator {
            dim,
            tol,
            entries: Vec::new(),
            vertices: None,
        }
    }

    pub fn add_point(&mut self, point: Vec<T>, origin: usize) {
        assert_eq!(point.len(), self.dim);
        self.vertices = None;
        if let Some((_, origins)) = self
            .entries
            .iter_mut()
            .find(|(p, _)| vec_eq(p, &point, &self.tol))
        {
            origins.insert(origin);
        } else {
            self.entries.push((point, BTreeSet::from([origin])));
        }
    }

    pub fn n_points(&self) -> usize {
        self.entries.len()
    }

    /// Contributors recorded for a point value, if present.
    pub fn origins_of(&self, point: &[T]) -> Option<&BTreeSet<usize>> {
        self.entries
            .iter()
            .find(|(p, _)| vec_eq(p, point, &self.tol))
            .map(|(_, o)| o)
    }

    /// Vertices of the hull of all points added so far.
    pub fn vertices(&mut self) -> Vec<Vec<T>> {
        let flags = self.vertex_flags();
        self.entries
            .iter()
            .zip(&flags)
            .filter(|(_, keep)| **keep)
            .map(|((p, _), _)| p.clone())
            .collect()
    }

    pub fn is_vertex(&mut self, point: &[T]) -> bool {
        let flags = self.vertex_flags();
        self.entries
            .iter()
            .zip(&flags)
            .any(|((p, _), keep)| *keep && vec_eq(p, point, &self.tol))
    }

    fn vertex_flags(&mut self) -> Vec<bool> {
        if let Some(flags) = &self.vertices {
            return flags.clone();
        }
        let flags: Vec<bool> = (0..self.entries.len())
            .map(|i| {
                let others: Vec<Vec<T>> = self
                    .entries
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, (p, _))| p.clone())
                    .collect();
                !in_convex_hull(&others, &self.entries[i].0, &self.tol)
            })
            .collect();
        self.vertices = Some(flags.clone());
        flags
    }
}

fn check_common_interface<T: Scalar>(
    points: &[&PartialSubsystem<T>],
) -> Result<usize, HullError> {
    let mut dims = points.iter().map(|p| p.point.len());
    let first = dims.next().unwrap_or(0);
    if dims.all(|d| d == first) {
        Ok(first)
    } else {
        Err(HullError::InterfaceMismatch)
    }
}

/// Does `candidates` dominate `target`: is the target's I-point a convex
/// combination of the projections of the no-larger candidates? Computed
/// without enumerating projections: that hull is exactly the set of points
/// coverable from above by a subconvex combination of the candidate points.
pub fn dominates<T: Scalar>(
    candidates: &[PartialSubsystem<T>],
    target: &PartialSubsystem<T>,
    cap: usize,
    tol: &T,
) -> Result<bool, HullError> {
    let mut refs: Vec<&PartialSubsystem<T>> = candidates.iter().collect();
    refs.push(target);
    let dim = check_common_interface(&refs)?;
    if dim > cap {
        return Err(HullError::CapExceeded { dim, cap });
    }
    let pool: Vec<Vec<T>> = candidates
        .iter()
        .filter(|c| c.size() <= target.size())
        .map(|c| c.point.clone())
        .collect();
    Ok(dominated_by_boxes(&pool, &target.point, tol))
}

/// Single-candidate pointwise variant: some no-larger candidate is
/// coordinatewise at least the target.
pub fn strongly_dominates<T: Scalar>(
    candidates: &[PartialSubsystem<T>],
    target: &PartialSubsystem<T>,
    tol: &T,
) -> Result<bool, HullError> {
    let mut refs: Vec<&PartialSubsystem<T>> = candidates.iter().collect();
    refs.push(target);
    check_common_interface(&refs)?;
    Ok(candidates
        .iter()
        .any(|c| c.size() <= target.size() && vec_ge(&c.point, &target.point, tol)))
}

/// Prune a set of partial subsystems down to the undominated ones.
///
/// Ties between equal points are resolved towards the smaller size, then the
/// lexicographically smallest state set, so the result is independent of the
/// input order. The empty partial subsystem (size 0) is only comparable to
/// itself and always survives.
pub fn remove_dominated<T: Scalar>(
    input: Vec<PartialSubsystem<T>>,
    mode: DominationMode,
    cap: usize,
    tol: &T,
) -> Result<(Vec<PartialSubsystem<T>>, DominationStats), HullError> {
    let mut stats = DominationStats::default();
    if input.is_empty() {
        return Ok((Vec::new(), stats));
    }
    let refs: Vec<&PartialSubsystem<T>> = input.iter().collect();
    let dim = check_common_interface(&refs)?;
    if dim > cap {
        return Err(HullError::CapExceeded { dim, cap });
    }

    // One representative per point value: smallest size, then lex state set.
    let mut reps: Vec<PartialSubsystem<T>> = Vec::new();
    for cand in input {
        match reps
            .iter_mut()
            .find(|r| vec_eq(&r.point, &cand.point, tol))
        {
            Some(r) => {
                if (cand.size(), &cand.states) < (r.size(), &r.states) {
                    *r = cand;
                }
                stats.points_pruned += 1;
            }
            None => reps.push(cand),
        }
    }
    reps.sort_by(|a, b| (a.size(), &a.states).cmp(&(b.size(), &b.states)));

    match mode {
        DominationMode::Strong => {
            let mut keep = vec![true; reps.len()];
            for i in 0..reps.len() {
                let dominated = reps.iter().enumerate().any(|(j, other)| {
                    j != i
                        && other.size() <= reps[i].size()
                        && vec_ge(&other.point, &reps[i].point, tol)
                });
                if dominated {
                    keep[i] = false;
                    stats.points_pruned += 1;
                }
            }
            let out = reps
                .into_iter()
                .zip(keep)
                .filter(|(_, k)| *k)
                .map(|(r, _)| r)
                .collect();
            Ok((out, stats))
        }
        DominationMode::Standard => {
            // Size classes ascending; a point is kept iff it is a vertex of
            // the hull of all projections of the no-larger points, i.e. iff
            // the boxes of the other no-larger points fail to cover it.
            let mut keep = vec![false; reps.len()];
            let mut i = 0;
            while i < reps.len() {
                let mut j = i;
                while j < reps.len() && reps[j].size() == reps[i].size() {
                    j += 1;
                }
                for idx in i..j {
                    let others: Vec<Vec<T>> = reps
                        .iter()
                        .take(j)
                        .enumerate()
                        .filter(|(o, _)| *o != idx)
                        .map(|(_, r)| r.point.clone())
                        .collect();
                    let boxed = others.iter().any(|p| vec_ge(p, &reps[idx].point, tol));
                    let dominated = boxed || {
                        stats.hull_calls += 1;
                        dominated_by_boxes(&others, &reps[idx].point, tol)
                    };
                    if dominated {
                        stats.points_pruned += 1;
                    } else {
                        keep[idx] = true;
                    }
                }
                i = j;
            }
            let out = reps
                .into_iter()
                .zip(keep)
                .filter(|(_, k)| *k)
                .map(|(r, _)| r)
                .collect();
            Ok((out, stats))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio, BigRational};
    use num_traits::Zero;

    fn zero() -> BigRational {
        BigRational::zero()
    }

    fn ps(states: &[StateId], point: &[BigRational]) -> PartialSubsystem<BigRational> {
        PartialSubsystem::new(states.iter().copied().collect(), point.to_vec())
    }

    #[test]
    fn projection_counts() {
        let p = projections(&[ratio(1, 2)], 8).unwrap();
        assert_eq!(p.len(), 2);
        let p = projections(&[ratio(3, 10), ratio(7, 10)], 8).unwrap();
        assert_eq!(p.len(), 4);
        // A zero coordinate halves the distinct projections.
        let p = projections(&[ratio(0, 1), ratio(7, 10)], 8).unwrap();
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn projection_cap() {
        let point = vec![int(1); 9];
        assert!(matches!(
            projections(&point, 8),
            Err(HullError::CapExceeded { dim: 9, cap: 8 })
        ));
    }

    #[test]
    fn dominates_by_mixing_two_points() {
        let s = vec![
            ps(&[0, 1], &[ratio(8, 10), ratio(1, 10)]),
            ps(&[2, 3], &[ratio(1, 10), ratio(8, 10)]),
        ];
        let t = ps(&[4, 5, 6], &[ratio(4, 10), ratio(4, 10)]);
        assert!(dominates(&s, &t, 8, &zero()).unwrap());
        let above = ps(&[4, 5, 6], &[ratio(9, 10), ratio(9, 10)]);
        assert!(!dominates(&s, &above, 8, &zero()).unwrap());
    }

    #[test]
    fn size_filter_blocks_larger_candidates() {
        let s = vec![ps(&[0, 1, 2], &[int(1), int(1)])];
        let t = ps(&[5], &[ratio(1, 2), ratio(1, 2)]);
        // The only candidate is larger than the target, so it cannot help.
        assert!(!dominates(&s, &t, 8, &zero()).unwrap());
    }

    #[test]
    fn strong_domination_is_pointwise() {
        let s = vec![ps(&[0, 1], &[ratio(3, 10), ratio(25, 100)])];
        let t = ps(&[2, 3], &[ratio(3, 10), ratio(2, 10)]);
        assert!(strongly_dominates(&s, &t, &zero()).unwrap());
        let u = vec![ps(&[0], &[ratio(9, 10), ratio(1, 10)])];
        let t2 = ps(&[2], &[ratio(2, 10), ratio(2, 10)]);
        assert!(!strongly_dominates(&u, &t2, &zero()).unwrap());
    }

    #[test]
    fn remove_dominated_keeps_frontier() {
        let input = vec![
            ps(&[0, 1], &[ratio(8, 10), ratio(1, 10)]),
            ps(&[2, 3], &[ratio(1, 10), ratio(8, 10)]),
            ps(&[4, 5, 6], &[ratio(4, 10), ratio(4, 10)]),
        ];
        let (out, stats) =
            remove_dominated(input, DominationMode::Standard, 8, &zero()).unwrap();
        assert_eq!(out.len(), 2);
        assert!(out.iter().all(|p| p.size() == 2));
        assert_eq!(stats.points_pruned, 1);
    }

    #[test]
    fn equal_points_keep_smallest() {
        let input = vec![
            ps(&[0, 1, 2], &[ratio(1, 2)]),
            ps(&[3], &[ratio(1, 2)]),
            ps(&[4, 5], &[ratio(1, 2)]),
        ];
        let (out, _) = remove_dominated(input, DominationMode::Standard, 8, &zero()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].states, BTreeSet::from([3]));
    }

    #[test]
    fn empty_subsystem_survives() {
        let input = vec![
            ps(&[], &[int(0), int(0)]),
            ps(&[0], &[ratio(1, 2), ratio(1, 2)]),
        ];
        let (out, _) = remove_dominated(input, DominationMode::Standard, 8, &zero()).unwrap();
        assert_eq!(out.len(), 2);
        assert!(out.iter().any(|p| p.states.is_empty()));
    }

    #[test]
    fn smaller_point_with_equal_value_displaces_projection_match() {
        // A size-2 point equal to a projection of a size-1 survivor is
        // dominated by it.
        let input = vec![
            ps(&[0], &[ratio(1, 2), ratio(7, 10)]),
            ps(&[1, 2], &[ratio(1, 2), int(0)]),
        ];
        let (out, _) = remove_dominated(input, DominationMode::Standard, 8, &zero()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].states, BTreeSet::from([0]));
    }

    #[test]
    fn strong_mode_is_pareto_per_size_prefix() {
        let input = vec![
            ps(&[0], &[ratio(5, 10), ratio(5, 10)]),
            ps(&[1], &[ratio(6, 10), ratio(6, 10)]),
            ps(&[2, 3], &[ratio(55, 100), ratio(55, 100)]),
            ps(&[4, 5], &[ratio(7, 10), ratio(1, 10)]),
        ];
        let (out, _) = remove_dominated(input, DominationMode::Strong, 8, &zero()).unwrap();
        let states: Vec<_> = out.iter().map(|p| p.states.clone()).collect();
        assert!(states.contains(&BTreeSet::from([1])));
        assert!(states.contains(&BTreeSet::from([4, 5])));
        assert!(!states.contains(&BTreeSet::from([0])));
        assert!(!states.contains(&BTreeSet::from([2, 3])));
    }

    #[test]
    fn one_dimensional_modes_coincide() {
        let input = vec![
            ps(&[0], &[ratio(1, 2)]),
            ps(&[1, 2], &[ratio(1, 4)]),
            ps(&[3], &[ratio(3, 4)]),
        ];
        let (std_out, _) =
            remove_dominated(input.clone(), DominationMode::Standard, 8, &zero()).unwrap();
        let (strong_out, _) =
            remove_dominated(input, DominationMode::Strong, 8, &zero()).unwrap();
        assert_eq!(std_out, strong_out);
    }

    #[test]
    fn accumulator_tracks_hull_vertices() {
        let mut hull = HullAccumulator::new(2, zero());
        hull.add_point(vec![int(0), int(0)], 0);
        hull.add_point(vec![int(1), int(0)], 1);
        hull.add_point(vec![int(0), int(1)], 2);
        assert_eq!(hull.vertices().len(), 3);
        hull.add_point(vec![ratio(1, 4), ratio(1, 4)], 3);
        assert!(!hull.is_vertex(&[ratio(1, 4), ratio(1, 4)]));
        assert!(hull.is_vertex(&[int(1), int(0)]));
        assert_eq!(hull.vertices().len(), 3);
    }
}
