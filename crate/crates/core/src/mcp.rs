//! The d-dimensional matrix-pair chain problem (MCP) and the reduction chain
//! that generates hard instances from the partition problem.
//!
//! `reduce_from_partition` encodes an integer multiset as a 2-dimensional
//! instance built from exact rational rotation matrices (tan-half-angle
//! parameterisation, one clockwise/counter-clockwise pair per element).
//! `lift_to_nonnegative_3d` embeds a 2-dimensional instance into nonnegative
//! 3x3 matrices through the basis change `B`, and `normalize_equal_valued`
//! rescales a lifted instance so every entry lands in `[1/12 - eps, 1/12]`
//! while preserving acceptance. Everything in this module is exact; no
//! floating point is involved anywhere.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::par::{map_reduce, Parallelism};
use crate::scalar::{int, pow, ratio, BigRational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum McpError {
    #[error("selection length {got} does not match instance length {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("matrix dimension mismatch")]
    DimensionMismatch,
    #[error("instance has {n} pairs, brute force capped at {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("expected a {expected}-dimensional instance")]
    WrongDimension { expected: usize },
    #[error("partition input is empty")]
    EmptyInput,
    #[error("all elements are zero: trivially a yes-instance, granularity undefined")]
    ZeroAccumulation,
    #[error("all lifted base entries are equal; normalization scale undefined")]
    DegenerateNormalization,
    #[error("internal reduction invariant failed: {0}")]
    Internal(String),
}

// ---------------------------------------------------------------------------
// Small exact matrices

/// Dense square rational matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RatMatrix {
    d: usize,
    entries: Vec<BigRational>,
}

impl RatMatrix {
    pub fn zeros(d: usize) -> Self {
        RatMatrix {
            d,
            entries: vec![BigRational::zero(); d * d],
        }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Self::zeros(d);
        for i in 0..d {
            m.set(i, i, BigRational::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Self {
        let d = rows.len();
        assert!(rows.iter().all(|r| r.len() == d));
        RatMatrix {
            d,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, r: usize, c: usize) -> &BigRational {
        &self.entries[r * self.d + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigRational) {
        self.entries[r * self.d + c] = v;
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.entries
    }

    pub fn mul(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.d, other.d);
        let d = self.d;
        let mut out = RatMatrix::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, row: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(row.len(), self.d);
        (0..self.d)
            .map(|j| {
                (0..self.d).fold(BigRational::zero(), |acc, i| acc + &row[i] * self.get(i, j))
            })
            .collect()
    }

    /// Matrix times column vector.
    pub fn mul_vec(&self, col: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(col.len(), self.d);
        (0..self.d)
            .map(|i| {
                (0..self.d).fold(BigRational::zero(), |acc, j| acc + self.get(i, j) * &col[j])
            })
            .collect()
    }

    pub fn transpose(&self) -> RatMatrix {
        let mut out = RatMatrix::zeros(self.d);
        for i in 0..self.d {
            for j in 0..self.d {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn map(&self, f: impl Fn(&BigRational) -> BigRational) -> RatMatrix {
        RatMatrix {
            d: self.d,
            entries: self.entries.iter().map(f).collect(),
        }
    }
}

fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter()
        .zip(b)
        .fold(BigRational::zero(), |acc, (x, y)| acc + x * y)
}

// ---------------------------------------------------------------------------
// Instances

/// A d-MCP instance: choose one matrix per pair so that
/// `iota * M_1 * ... * M_n * final >= threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct McpInstance {
    pub dim: usize,
    pub pairs: Vec<(RatMatrix, RatMatrix)>,
    pub iota: Vec<BigRational>,
    pub fin: Vec<BigRational>,
    pub threshold: BigRational,
}

impl McpInstance {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn check_dimensions(&self) -> Result<(), McpError> {
        let ok = self.iota.len() == self.dim
            && self.fin.len() == self.dim
            && self
                .pairs
                .iter()
                .all(|(a, b)| a.dim() == self.dim && b.dim() == self.dim);
        if ok {
            Ok(())
        } else {
            Err(McpError::DimensionMismatch)
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        let nn = |v: &BigRational| *v >= BigRational::zero();
        self.iota.iter().all(nn)
            && self.fin.iter().all(nn)
            && self
                .pairs
                .iter()
                .all(|(a, b)| a.entries().iter().all(nn) && b.entries().iter().all(nn))
    }
}

/// Exact value of one selection.
pub fn evaluate(inst: &McpInstance, sigma: &[bool]) -> Result<BigRational, McpError> {
    inst.check_dimensions()?;
    if sigma.len() != inst.len() {
        return Err(McpError::LengthMismatch {
            expected: inst.len(),
            got: sigma.len(),
        });
    }
    let mut row = inst.iota.clone();
    for (j, &pick) in sigma.iter().enumerate() {
        let m = if pick { &inst.pairs[j].1 } else { &inst.pairs[j].0 };
        row = m.vec_mul(&row);
    }
    Ok(dot(&row, &inst.fin))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceResult {
    pub accepted: bool,
    pub best_sigma: Vec<bool>,
    pub best_value: BigRational,
}

/// Exhaustive maximum over all `2^n` selections. Prefix products are shared
/// along the recursion; the work parallelises over selection prefixes and the
/// reduce keeps the lexicographically smallest selection among ties.
pub fn brute_force(
    inst: &McpInstance,
    cap: usize,
    par: Parallelism,
) -> Result<BruteForceResult, McpError> {
    inst.check_dimensions()?;
    let n = inst.len();
    if n > cap {
        return Err(McpError::CapExceeded { n, cap });
    }
    type Best = Option<(BigRational, Vec<bool>)>;
    let combine = |a: Best, b: Best| -> Best {
        match (a, b) {
            (None, x) | (x, None) => x,
            (Some(x), Some(y)) => {
                if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) {
                    Some(y)
                } else {
                    Some(x)
                }
            }
        }
    };

    let split = n.min(4);
    let mut tasks: Vec<(Vec<bool>, Vec<BigRational>)> = vec![(Vec::new(), inst.iota.clone())];
    for j in 0..split {
        let mut next = Vec::with_capacity(tasks.len() * 2);
        for (sigma, row) in tasks {
            for pick in [false, true] {
                let m = if pick { &inst.pairs[j].1 } else { &inst.pairs[j].0 };
                let mut s = sigma.clone();
                s.push(pick);
                next.push((s, m.vec_mul(&row)));
            }
        }
        tasks = next;
    }

    fn explore(
        inst: &McpInstance,
        pos: usize,
        sigma: &mut Vec<bool>,
        row: &[BigRational],
        best: &mut Option<(BigRational, Vec<bool>)>,
    ) {
        if pos == inst.len() {
            let value = dot(row, &inst.fin);
            let take = match best {
                None => true,
                Some((bv, bs)) => value > *bv || (value == *bv && *sigma < *bs),
            };
            if take {
                *best = Some((value, sigma.clone()));
            }
            return;
        }
        for pick in [false, true] {
            let m = if pick {
                &inst.pairs[pos].1
            } else {
                &inst.pairs[pos].0
            };
            sigma.push(pick);
            let next = m.vec_mul(row);
            explore(inst, pos + 1, sigma, &next, best);
            sigma.pop();
        }
    }

    let best = map_reduce(
        tasks,
        par,
        None,
        |(prefix, row)| {
            let mut sigma = prefix;
            let mut best = None;
            explore(inst, sigma.len(), &mut sigma, &row, &mut best);
            best
        },
        combine,
    );
    let (best_value, best_sigma) = best.expect("at least one selection exists");
    Ok(BruteForceResult {
        accepted: best_value >= inst.threshold,
        best_sigma,
        best_value,
    })
}

// ---------------------------------------------------------------------------
// Certified rational trigonometry

/// Bracket `arctan(t)` for `0 <= t <= 1` by alternating partial sums, adding
/// terms until the bracket is narrower than `width`.
fn arctan_bounds(t: &BigRational, width: &BigRational) -> (BigRational, BigRational) {
    assert!(*t >= BigRational::zero() && *t <= BigRational::one());
    if t.is_zero() {
        return (BigRational::zero(), BigRational::zero());
    }
    let t2 = t * t;
    let mut term = t.clone(); // t^{2j+1}
    let mut sum = BigRational::zero();
    let mut j = 0usize;
    loop {
        let contrib = &term / int(2 * j as i64 + 1);
        let prev = sum.clone();
        if j % 2 == 0 {
            sum += &contrib;
        } else {
            sum -= &contrib;
        }
        // Consecutive partial sums bracket the limit.
        let (lo, hi) = if sum < prev {
            (sum.clone(), prev)
        } else {
            (prev, sum.clone())
        };
        if j > 0 && &hi - &lo < *width {
            return (lo, hi);
        }
        term *= &t2;
        j += 1;
        assert!(j < 10_000, "arctan series failed to converge");
    }
}

/// Bracket `cos(x)` for `0 <= x <= 1` the same way.
fn cos_bounds(x: &BigRational, width: &BigRational) -> (BigRational, BigRational) {
    assert!(*x >= BigRational::zero() && *x <= BigRational::one());
    let x2 = x * x;
    let mut term = BigRational::one(); // x^{2j} / (2j)!
    let mut sum = BigRational::zero();
    let mut j = 0usize;
    loop {
        let prev = sum.clone();
        if j % 2 == 0 {
            sum += &term;
        } else {
            sum -= &term;
        }
        let (lo, hi) = if sum < prev {
            (sum.clone(), prev)
        } else {
            (prev, sum.clone())
        };
        if j > 0 && &hi - &lo < *width {
            return (lo, hi);
        }
        term = term * &x2 / int(((2 * j + 1) * (2 * j + 2)) as i64);
        j += 1;
        assert!(j < 10_000, "cos series failed to converge");
    }
}

/// Find rational `t` with `|2 arctan(t) - phi| < eps` for `0 < phi <= 1`,
/// by binary search with certified series brackets.
fn find_tan_half(phi: &BigRational, eps: &BigRational) -> Result<BigRational, McpError> {
    assert!(*phi > BigRational::zero() && *phi <= BigRational::one());
    let width = eps / int(4);
    let mut lo = BigRational::zero();
    let mut hi = if *phi < BigRational::one() {
        phi.clone()
    } else {
        BigRational::one()
    };
    let two = int(2);
    for _ in 0..512 {
        let mid = (&lo + &hi) / &two;
        let (a_lo, a_hi) = arctan_bounds(&mid, &width);
        let (a_lo, a_hi) = (&a_lo * &two, &a_hi * &two);
        if a_lo > phi - eps && a_hi < phi + eps {
            return Ok(mid);
        }
        if a_hi <= *phi {
            lo = mid;
        } else if a_lo >= *phi {
            hi = mid;
        } else {
            // Bracket straddles phi with width < eps/2, so both acceptance
            // inequalities hold; unreachable.
            return Ok(mid);
        }
    }
    Err(McpError::Internal(
        "tan-half binary search did not terminate".into(),
    ))
}

/// Proper rotation with rational entries: `cos = (1-t^2)/(1+t^2)`,
/// `sin = 2t/(1+t^2)`; rotates counter-clockwise by `2 arctan(t)`.
fn rotation_from_tan_half(t: &BigRational) -> RatMatrix {
    let t2 = t * t;
    let den = BigRational::one() + &t2;
    let cos = (BigRational::one() - &t2) / &den;
    let sin = (int(2) * t) / &den;
    RatMatrix::from_rows(vec![
        vec![cos.clone(), -sin.clone()],
        vec![sin, cos],
    ])
}

// ---------------------------------------------------------------------------
// Reduction: partition problem -> 2-MCP

/// A 2-MCP instance produced from an integer multiset, together with the
/// rotation granularity (the angle unit) and the per-matrix angle tolerance.
#[derive(Debug, Clone)]
pub struct PartitionReduction {
    pub instance: McpInstance,
    /// Angle unit: `3 / (4m)` where `m` bounds the accumulated absolute value.
    pub granularity: BigRational,
    /// Certified per-matrix angle error bound (`granularity / (4n)`).
    pub angle_tolerance: BigRational,
}

/// Encode "does `s` split into two equal-sum halves" as a 2-MCP instance.
/// Element `s_i` becomes a clockwise/counter-clockwise rotation pair by an
/// angle within `angle_tolerance` of `s_i * granularity`; the threshold is
/// the midpoint of the certified gap between yes- and no-selections.
pub fn reduce_from_partition(s: &[i64]) -> Result<PartitionReduction, McpError> {
    if s.is_empty() {
        return Err(McpError::EmptyInput);
    }
    let pos: i128 = s.iter().filter(|&&x| x > 0).map(|&x| x as i128).sum();
    let neg: i128 = s.iter().filter(|&&x| x < 0).map(|&x| -(x as i128)).sum();
    let m = pos.max(neg);
    if m == 0 {
        return Err(McpError::ZeroAccumulation);
    }
    let m_rat = BigRational::from_integer(BigInt::from(m));
    let n = s.len();
    let gamma = ratio(3, 4) / &m_rat;
    let eps = &gamma / int(4 * n as i64);

    let mut pairs = Vec::with_capacity(n);
    for &si in s {
        if si == 0 {
            let id = RatMatrix::identity(2);
            pairs.push((id.clone(), id));
            continue;
        }
        let abs = BigRational::from_integer(BigInt::from((si as i128).abs()));
        let phi = &abs * &gamma;
        let t = find_tan_half(&phi, &eps)?;
        let t_signed = if si > 0 { t } else { -t };
        let ccw = rotation_from_tan_half(&t_signed);
        let cw = ccw.transpose();
        pairs.push((cw, ccw));
    }

    // Certified threshold gap: every yes-selection composes to a rotation by
    // less than n*eps, every no-selection to at least granularity - n*eps
    // (which exceeds granularity/2). The value of a selection composing to
    // angle a is cos(a)/2.
    let half_gamma = &gamma / int(2);
    let n_eps = &eps * int(n as i64);
    let bound_width = ratio(1, 1_000_000);
    let (_, cos_half_gamma_hi) = cos_bounds(&half_gamma, &bound_width);
    let (cos_n_eps_lo, _) = cos_bounds(&n_eps, &bound_width);
    let low = cos_half_gamma_hi / int(2);
    let high = cos_n_eps_lo / int(2);
    if low >= high {
        return Err(McpError::Internal(
            "threshold interval collapsed; tolerance analysis violated".into(),
        ));
    }
    let threshold = (&low + &high) / int(2);

    let half = ratio(1, 2);
    Ok(PartitionReduction {
        instance: McpInstance {
            dim: 2,
            pairs,
            iota: vec![half.clone(), half.clone()],
            fin: vec![half.clone(), half],
            threshold,
        },
        granularity: gamma,
        angle_tolerance: eps,
    })
}

// ---------------------------------------------------------------------------
// Reduction: 2-MCP -> nonnegative 3-MCP

/// Basis change used by the 3-dimensional lift. The third standard basis
/// vector maps to `(1,1,1)`, whose direction absorbs the shift `kappa`.
pub fn basis_matrix() -> RatMatrix {
    RatMatrix::from_rows(vec![
        vec![int(1), int(1), int(1)],
        vec![int(-1), int(1), int(1)],
        vec![int(0), int(-2), int(1)],
    ])
}

pub fn basis_matrix_inverse() -> RatMatrix {
    RatMatrix::from_rows(vec![
        vec![ratio(3, 6), ratio(-3, 6), ratio(0, 6)],
        vec![ratio(1, 6), ratio(1, 6), ratio(-2, 6)],
        vec![ratio(2, 6), ratio(2, 6), ratio(2, 6)],
    ])
}

/// A nonnegative 3-MCP instance produced by the lift, remembering the shift
/// `kappa`; every matrix has the form `A + (kappa/3) * ones`, the initial
/// vector `a_iota + kappa/3`, the final vector `a_f + kappa`.
#[derive(Debug, Clone)]
pub struct LiftedInstance {
    pub instance: McpInstance,
    pub kappa: BigRational,
}

fn embed_3(m: &RatMatrix) -> RatMatrix {
    let mut out = RatMatrix::zeros(3);
    for i in 0..2 {
        for j in 0..2 {
            out.set(i, j, m.get(i, j).clone());
        }
    }
    out
}

/// Lift a 2-dimensional instance to an equivalent nonnegative 3-dimensional
/// one: for every selection the value grows by exactly `kappa^(n+2)`, and
/// `kappa` is the smallest power of two making every entry nonnegative.
pub fn lift_to_nonnegative_3d(inst: &McpInstance) -> Result<LiftedInstance, McpError> {
    inst.check_dimensions()?;
    if inst.dim != 2 {
        return Err(McpError::WrongDimension { expected: 2 });
    }
    let b = basis_matrix();
    let b_inv = basis_matrix_inverse();
    let n = inst.len();

    let a_parts: Vec<(RatMatrix, RatMatrix)> = inst
        .pairs
        .iter()
        .map(|(m0, m1)| {
            (
                b.mul(&embed_3(m0)).mul(&b_inv),
                b.mul(&embed_3(m1)).mul(&b_inv),
            )
        })
        .collect();
    let a_iota = b_inv.vec_mul(&[inst.iota[0].clone(), inst.iota[1].clone(), int(0)]);
    let a_fin = b.mul_vec(&[inst.fin[0].clone(), inst.fin[1].clone(), int(0)]);

    let zero = BigRational::zero();
    let mut kappa = BigRational::one();
    let kappa = loop {
        let third = &kappa / int(3);
        let mats_ok = a_parts.iter().all(|(a0, a1)| {
            a0.entries().iter().all(|e| e + &third >= zero)
                && a1.entries().iter().all(|e| e + &third >= zero)
        });
        let iota_ok = a_iota.iter().all(|e| e + &third >= zero);
        let fin_ok = a_fin.iter().all(|e| e + &kappa >= zero);
        if mats_ok && iota_ok && fin_ok {
            break kappa;
        }
        kappa = kappa * int(2);
        if kappa > pow(&int(2), 64) {
            return Err(McpError::Internal("no nonnegativity shift found".into()));
        }
    };

    let third = &kappa / int(3);
    let shift_mat = |m: &RatMatrix| m.map(|e| e + &third);
    let pairs = a_parts
        .iter()
        .map(|(a0, a1)| (shift_mat(a0), shift_mat(a1)))
        .collect();
    let iota = a_iota.iter().map(|e| e + &third).collect();
    let fin = a_fin.iter().map(|e| e + &kappa).collect();
    let threshold = &inst.threshold + pow(&kappa, n + 2);
    let lifted = McpInstance {
        dim: 3,
        pairs,
        iota,
        fin,
        threshold,
    };
    debug_assert!(lifted.is_nonnegative());
    Ok(LiftedInstance {
        instance: lifted,
        kappa,
    })
}

// ---------------------------------------------------------------------------
// Normalization to nearly equal-valued entries

/// Output of [`normalize_equal_valued`]: every entry of every matrix and of
/// both vectors lies in `[1/12 - eps, 1/12]`, acceptance is unchanged.
#[derive(Debug, Clone)]
pub struct NormalizedInstance {
    pub instance: McpInstance,
    pub eps: BigRational,
    pub kappa_prime: BigRational,
    pub scale: BigRational,
}

impl NormalizedInstance {
    pub fn len(&self) -> usize {
        self.instance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instance.is_empty()
    }

    /// Lower bound shared by all entries.
    pub fn entry_floor(&self) -> BigRational {
        ratio(1, 12) - &self.eps
    }
}

/// The entry tolerance used for length-`n` instances:
/// `1 / (3 * 12^(n+3) * 2^(n+2))`, which satisfies
/// `0 < 12 eps < 1/3 * (1/12 - eps)^(n+2)`.
pub fn normalization_eps(n: usize) -> BigRational {
    BigRational::one() / (int(3) * pow(&int(12), n + 3) * pow(&int(2), n + 2))
}

/// Check `0 < 12 eps < 1/3 * (1/12 - eps)^(n+2)` exactly.
pub fn eps_bound_holds(eps: &BigRational, n: usize) -> bool {
    let twelve_eps = int(12) * eps;
    let rhs = pow(&(ratio(1, 12) - eps), n + 2) / int(3);
    BigRational::zero() < twelve_eps && twelve_eps < rhs
}

/// Rebuild a lifted instance with a uniform shift `kappa'` sized so that
/// after scaling by `1 / (12 (max + kappa'))` every entry lies in
/// `[1/12 - eps, 1/12]`. Acceptance is preserved exactly: the rebuilt
/// unscaled value of a selection is the original 2-MCP value plus
/// `3^(n+1) * kappa'^(n+2)`, and scaling multiplies all values by
/// `scale^(n+2)`.
pub fn normalize_equal_valued(lifted: &LiftedInstance) -> Result<NormalizedInstance, McpError> {
    let inst = &lifted.instance;
    inst.check_dimensions()?;
    if inst.dim != 3 {
        return Err(McpError::WrongDimension { expected: 3 });
    }
    let n = inst.len();
    let third = &lifted.kappa / int(3);

    // Recover the base parts the lift shifted.
    let a_pairs: Vec<(RatMatrix, RatMatrix)> = inst
        .pairs
        .iter()
        .map(|(m0, m1)| (m0.map(|e| e - &third), m1.map(|e| e - &third)))
        .collect();
    let a_iota: Vec<BigRational> = inst.iota.iter().map(|e| e - &third).collect();
    let a_fin: Vec<BigRational> = inst.fin.iter().map(|e| e - &lifted.kappa).collect();
    let lambda_2d = &inst.threshold - pow(&lifted.kappa, n + 2);

    let mut all: Vec<&BigRational> = Vec::new();
    for (a0, a1) in &a_pairs {
        all.extend(a0.entries());
        all.extend(a1.entries());
    }
    all.extend(a_iota.iter());
    all.extend(a_fin.iter());
    let max = (*all.iter().max().unwrap()).clone();
    let min = (*all.iter().min().unwrap()).clone();
    if max == min {
        return Err(McpError::DegenerateNormalization);
    }

    let eps = normalization_eps(n);
    if !eps_bound_holds(&eps, n) {
        return Err(McpError::Internal("entry tolerance bound violated".into()));
    }
    let kappa_prime = (&max - &min) / (int(12) * &eps) - &max;
    let scale = BigRational::one() / (int(12) * (&max + &kappa_prime));

    let rebuild_mat = |m: &RatMatrix| m.map(|e| (e + &kappa_prime) * &scale);
    let pairs: Vec<(RatMatrix, RatMatrix)> = a_pairs
        .iter()
        .map(|(a0, a1)| (rebuild_mat(a0), rebuild_mat(a1)))
        .collect();
    let iota: Vec<BigRational> = a_iota.iter().map(|e| (e + &kappa_prime) * &scale).collect();
    let fin: Vec<BigRational> = a_fin.iter().map(|e| (e + &kappa_prime) * &scale).collect();
    let shift = pow(&int(3), n + 1) * pow(&kappa_prime, n + 2);
    let threshold = pow(&scale, n + 2) * (lambda_2d + shift);

    let instance = McpInstance {
        dim: 3,
        pairs,
        iota,
        fin,
        threshold,
    };
    let floor = ratio(1, 12) - &eps;
    let ceil = ratio(1, 12);
    let in_range = |v: &BigRational| *v >= floor && *v <= ceil;
    let range_ok = instance.iota.iter().all(in_range)
        && instance.fin.iter().all(in_range)
        && instance
            .pairs
            .iter()
            .all(|(a, b)| a.entries().iter().all(in_range) && b.entries().iter().all(in_range));
    if !range_ok {
        return Err(McpError::Internal(
            "normalized entries escaped the target range".into(),
        ));
    }
    Ok(NormalizedInstance {
        instance,
        eps,
        kappa_prime,
        scale,
    })
}

/// Direct subset-sum style check used as the ground truth for the reduction:
/// does some subset of `s` take exactly half the total?
pub fn has_equal_sum_split(s: &[i64]) -> bool {
    let total: i128 = s.iter().map(|&x| x as i128).sum();
    if total % 2 != 0 {
        return false;
    }
    // Meet on signed subset sums; n is tiny wherever this runs.
    fn rec(s: &[i64], idx: usize, acc: i128, target: i128) -> bool {
        if idx == s.len() {
            return acc == target;
        }
        rec(s, idx + 1, acc + s[idx] as i128, target) || rec(s, idx + 1, acc, target)
    }
    rec(s, 0, 0, total / 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_chain(n: usize, threshold: BigRational) -> McpInstance {
        let id = RatMatrix::identity(2);
        McpInstance {
            dim: 2,
            pairs: (0..n).map(|_| (id.clone(), id.clone())).collect(),
            iota: vec![int(1), int(0)],
            fin: vec![int(1), int(0)],
            threshold,
        }
    }

    #[test]
    fn identity_chain_evaluates_to_one() {
        let inst = identity_chain(3, int(1));
        for mask in 0..8u8 {
            let sigma: Vec<bool> = (0..3).map(|i| mask & (1 << i) != 0).collect();
            assert_eq!(evaluate(&inst, &sigma).unwrap(), int(1));
        }
    }

    #[test]
    fn scaling_pair_distinguishes_selections() {
        let two_i = RatMatrix::identity(2).map(|e| e * int(2));
        let inst = McpInstance {
            dim: 2,
            pairs: vec![(two_i, RatMatrix::zeros(2))],
            iota: vec![int(1), int(0)],
            fin: vec![int(1), int(0)],
            threshold: int(1),
        };
        assert_eq!(evaluate(&inst, &[false]).unwrap(), int(2));
        assert_eq!(evaluate(&inst, &[true]).unwrap(), int(0));
    }

    #[test]
    fn brute_force_accepts_and_rejects_around_one() {
        let inst = identity_chain(4, int(1));
        let res = brute_force(&inst, 24, Parallelism::Sequential).unwrap();
        assert!(res.accepted);
        assert_eq!(res.best_value, int(1));
        assert_eq!(res.best_sigma, vec![false; 4]);

        let inst = identity_chain(4, int(1) + ratio(1, 1000));
        let res = brute_force(&inst, 24, Parallelism::Sequential).unwrap();
        assert!(!res.accepted);
    }

    #[test]
    fn brute_force_cap() {
        let inst = identity_chain(5, int(1));
        assert!(matches!(
            brute_force(&inst, 4, Parallelism::Sequential),
            Err(McpError::CapExceeded { n: 5, cap: 4 })
        ));
    }

    #[test]
    fn parallel_and_sequential_brute_force_agree() {
        let red = reduce_from_partition(&[1, 2, 3, 4]).unwrap();
        let a = brute_force(&red.instance, 24, Parallelism::Sequential).unwrap();
        let b = brute_force(&red.instance, 24, Parallelism::Rayon).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn reduction_matches_split_existence() {
        let yes = reduce_from_partition(&[1, 1, 2]).unwrap();
        assert!(brute_force(&yes.instance, 24, Parallelism::Sequential)
            .unwrap()
            .accepted);
        let no = reduce_from_partition(&[1, 2]).unwrap();
        assert!(!brute_force(&no.instance, 24, Parallelism::Sequential)
            .unwrap()
            .accepted);
    }

    #[test]
    fn reduction_rejects_degenerate_inputs() {
        assert!(matches!(
            reduce_from_partition(&[]),
            Err(McpError::EmptyInput)
        ));
        assert!(matches!(
            reduce_from_partition(&[0, 0]),
            Err(McpError::ZeroAccumulation)
        ));
    }

    #[test]
    fn rotations_are_orthogonal() {
        let red = reduce_from_partition(&[3, 5]).unwrap();
        for (cw, ccw) in &red.instance.pairs {
            assert_eq!(cw.mul(ccw), RatMatrix::identity(2));
        }
    }

    #[test]
    fn basis_matrices_are_inverse() {
        assert_eq!(
            basis_matrix().mul(&basis_matrix_inverse()),
            RatMatrix::identity(3)
        );
    }

    #[test]
    fn lift_shifts_value_by_kappa_power() {
        let red = reduce_from_partition(&[1, 2]).unwrap();
        let lifted = lift_to_nonnegative_3d(&red.instance).unwrap();
        assert!(lifted.instance.is_nonnegative());
        let n = red.instance.len();
        let shift = pow(&lifted.kappa, n + 2);
        for mask in 0..4u8 {
            let sigma: Vec<bool> = (0..2).map(|i| mask & (1 << i) != 0).collect();
            let orig = evaluate(&red.instance, &sigma).unwrap();
            let new = evaluate(&lifted.instance, &sigma).unwrap();
            assert_eq!(new, orig + &shift);
        }
    }

    #[test]
    fn normalization_keeps_acceptance_and_range() {
        for s in [&[1i64, 1, 2][..], &[1, 2][..]] {
            let red = reduce_from_partition(s).unwrap();
            let lifted = lift_to_nonnegative_3d(&red.instance).unwrap();
            let norm = normalize_equal_valued(&lifted).unwrap();
            let n = s.len();
            assert!(eps_bound_holds(&norm.eps, n));
            for mask in 0..(1u8 << n) {
                let sigma: Vec<bool> = (0..n).map(|i| mask & (1 << i) != 0).collect();
                let lifted_acc =
                    evaluate(&lifted.instance, &sigma).unwrap() >= lifted.instance.threshold;
                let norm_acc =
                    evaluate(&norm.instance, &sigma).unwrap() >= norm.instance.threshold;
                assert_eq!(lifted_acc, norm_acc);
            }
            assert_eq!(
                has_equal_sum_split(s),
                brute_force(&norm.instance, 24, Parallelism::Sequential)
                    .unwrap()
                    .accepted
            );
        }
    }

    #[test]
    fn eps_bound_holds_for_small_lengths() {
        for n in 1..=6 {
            assert!(eps_bound_holds(&normalization_eps(n), n));
        }
    }
}
