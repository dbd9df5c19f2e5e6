//! Selective harmonic elimination: solve `Σ_i cos(n_k·θ_i) = 0` for every
//! target order `n_k`, one firing angle per target.
//!
//! Three routes are provided: damped Newton with the analytic Jacobian,
//! multistart enumeration of Newton over a seed lattice, and an exhaustive
//! lattice search used as an independent oracle.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::waveform::AngleSet;

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 100;
pub const DEFAULT_GRID_STEP_DEG: f64 = 5.0;
/// Two multistart roots closer than this (per angle) are the same root.
pub const DEDUP_TOLERANCE_DEG: f64 = 0.01;

const MAX_HALVINGS: usize = 30;
const SINGULAR_CONDITION: f64 = 1e12;
const MIN_ORACLE_STEP_DEG: f64 = 0.05;
const MAX_ORACLE_POINTS: f64 = 1e9;

/// Odd harmonic orders to eliminate, strictly ascending, all `>= 3`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct HarmonicTargetSet {
    orders: Vec<u32>,
}

impl HarmonicTargetSet {
    pub fn new(orders: Vec<u32>) -> Result<Self> {
        if orders.is_empty() {
            return Err(Error::validation(
                "harmonics",
                "at least one target order is required",
            ));
        }
        if let Some(&n) = orders.iter().find(|&&n| n < 3 || n.is_multiple_of(2)) {
            return Err(Error::validation(
                "harmonics",
                format!("order {n} is not an odd harmonic >= 3"),
            ));
        }
        if orders.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::validation(
                "harmonics",
                "orders must be strictly ascending",
            ));
        }
        Ok(Self { orders })
    }

    pub fn orders(&self) -> &[u32] {
        &self.orders
    }

    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }
}

impl TryFrom<Vec<u32>> for HarmonicTargetSet {
    type Error = Error;

    fn try_from(orders: Vec<u32>) -> Result<Self> {
        Self::new(orders)
    }
}

impl From<HarmonicTargetSet> for Vec<u32> {
    fn from(t: HarmonicTargetSet) -> Self {
        t.orders
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SheSolution {
    pub angle_set: AngleSet,
    /// `‖F‖∞` at `angle_set`.
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn check_dims(angles: usize, targets: &HarmonicTargetSet) -> Result<()> {
    if angles != targets.len() {
        return Err(Error::DimensionMismatch {
            angles,
            targets: targets.len(),
        });
    }
    Ok(())
}

fn residual_raw(angles: &[f64], orders: &[u32]) -> Vec<f64> {
    orders
        .iter()
        .map(|&n| angles.iter().map(|t| (n as f64 * t).cos()).sum())
        .collect()
}

fn jacobian_raw(angles: &[f64], orders: &[u32]) -> DMatrix<f64> {
    DMatrix::from_fn(orders.len(), angles.len(), |k, i| {
        let n = orders[k] as f64;
        -n * (n * angles[i]).sin()
    })
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn two_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn in_domain(angles: &[f64]) -> bool {
    angles.iter().all(|&a| a > 0.0 && a < FRAC_PI_2) && angles.windows(2).all(|w| w[0] < w[1])
}

/// `F_k = Σ_i cos(n_k·θ_i)` for each target order.
pub fn residual(angles: &AngleSet, targets: &HarmonicTargetSet) -> Result<Vec<f64>> {
    check_dims(angles.levels(), targets)?;
    Ok(residual_raw(angles.angles(), targets.orders()))
}

/// `J_ki = ∂F_k/∂θ_i = −n_k·sin(n_k·θ_i)`.
pub fn jacobian(angles: &AngleSet, targets: &HarmonicTargetSet) -> Result<DMatrix<f64>> {
    check_dims(angles.levels(), targets)?;
    Ok(jacobian_raw(angles.angles(), targets.orders()))
}

/// 1-norm condition estimate; `None` if the matrix cannot be inverted.
///
/// `‖J⁻¹‖` is measured against both `‖J‖` and the largest harmonic order,
/// which bounds `|J_ki|`, so a uniformly tiny Jacobian also counts as singular.
fn condition_number(matrix: &DMatrix<f64>, max_order: f64) -> Option<f64> {
    let inverse = matrix.clone().try_inverse()?;
    let norm1 = |m: &DMatrix<f64>| {
        m.column_iter()
            .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    Some(norm1(matrix).max(max_order) * norm1(&inverse))
}

/// Damped Newton iteration from `initial`.
///
/// Each step is halved (up to 30 times) until the iterate stays strictly
/// ascending inside `(0, π/2)` and the residual 2-norm decreases. Iterates
/// outside the domain are rejected, never projected back.
pub fn solve_newton(
    initial: &AngleSet,
    targets: &HarmonicTargetSet,
    tol: f64,
    max_iter: usize,
) -> Result<SheSolution> {
    check_dims(initial.levels(), targets)?;
    if !(tol > 0.0) {
        return Err(Error::validation("tol", "tolerance must be positive"));
    }
    let orders = targets.orders();
    let mut x = initial.angles().to_vec();
    let mut f = residual_raw(&x, orders);

    for iteration in 0..=max_iter {
        let norm = inf_norm(&f);
        if norm < tol {
            return Ok(SheSolution {
                angle_set: AngleSet::new(x)?,
                residual_norm: norm,
                iterations: iteration,
                converged: true,
            });
        }
        if iteration == max_iter {
            break;
        }

        let jac = jacobian_raw(&x, orders);
        let max_order = *orders.last().expect("non-empty targets") as f64;
        let cond = condition_number(&jac, max_order).unwrap_or(f64::INFINITY);
        if !(cond <= SINGULAR_CONDITION) {
            return Err(Error::Singular(format!(
                "Jacobian condition estimate {cond:e} at θ = {:?}°",
                to_deg(&x)
            )));
        }
        let step = jac
            .lu()
            .solve(&DVector::from_column_slice(&f))
            .ok_or_else(|| Error::Singular("LU solve failed".into()))?;

        let current = two_norm(&f);
        let mut scale = 1.0;
        let mut any_inside = false;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = x
                .iter()
                .zip(step.iter())
                .map(|(a, d)| a - scale * d)
                .collect();
            if in_domain(&trial) {
                any_inside = true;
                let trial_f = residual_raw(&trial, orders);
                if two_norm(&trial_f) < current {
                    accepted = Some((trial, trial_f));
                    break;
                }
            }
            scale *= 0.5;
        }
        match accepted {
            Some((next, next_f)) => {
                x = next;
                f = next_f;
            }
            None if !any_inside => {
                return Err(Error::Divergence(format!(
                    "Newton step leaves (0°, 90°) after {MAX_HALVINGS} halvings at iteration {}",
                    iteration + 1
                )));
            }
            None => {
                return Err(Error::NonConvergence {
                    residual_norm: inf_norm(&f),
                    best: AngleSet::new(x)?,
                    iterations: iteration,
                });
            }
        }
    }

    Err(Error::NonConvergence {
        residual_norm: inf_norm(&f),
        best: AngleSet::new(x)?,
        iterations: max_iter,
    })
}

fn to_deg(x: &[f64]) -> Vec<f64> {
    x.iter().map(|a| a.to_degrees()).collect()
}

/// Lattice values `g·step` strictly inside `(0°, 90°)`, in degrees.
fn lattice(step_deg: f64) -> Vec<f64> {
    (1..)
        .map(|g| g as f64 * step_deg)
        .take_while(|&v| v < 90.0 - 1e-9)
        .collect()
}

/// Visits every strictly ascending `k`-combination of `0..count` in
/// lexicographic order.
fn for_each_ascending(count: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k == 0 || k > count {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let mut pos = k;
        while pos > 0 {
            pos -= 1;
            if idx[pos] < count - k + pos {
                idx[pos] += 1;
                for j in pos + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
            if pos == 0 {
                return;
            }
        }
    }
}

/// Seeds Newton from every ascending lattice point at `grid_step_deg` and
/// returns the distinct converged roots, sorted by angle.
pub fn solve_multistart(
    targets: &HarmonicTargetSet,
    grid_step_deg: f64,
) -> Result<Vec<SheSolution>> {
    if !(grid_step_deg > 0.0 && grid_step_deg <= 15.0) {
        return Err(Error::validation(
            "grid_step",
            "grid step must be in (0°, 15°]",
        ));
    }
    let values: Vec<f64> = lattice(grid_step_deg)
        .iter()
        .map(|d| d.to_radians())
        .collect();
    let mut found = Vec::new();
    for_each_ascending(values.len(), targets.len(), |idx| {
        let seed = AngleSet::new(idx.iter().map(|&i| values[i]).collect())
            .expect("lattice points are ascending and inside (0, π/2)");
        if let Ok(sol) = solve_newton(&seed, targets, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER) {
            found.push(sol);
        }
    });

    found.sort_by(|a, b| {
        a.angle_set
            .angles()
            .partial_cmp(b.angle_set.angles())
            .expect("finite angles")
    });
    let dedup = DEDUP_TOLERANCE_DEG.to_radians();
    let mut distinct: Vec<SheSolution> = Vec::new();
    for sol in found {
        let duplicate = distinct.iter().any(|kept| {
            kept.angle_set
                .max_distance(&sol.angle_set)
                .is_some_and(|d| d < dedup)
        });
        if !duplicate {
            distinct.push(sol);
        }
    }
    Ok(distinct)
}

/// Root among `solutions` closest (max per-angle distance) to `reference`.
pub fn nearest_branch<'a>(
    solutions: &'a [SheSolution],
    reference: &AngleSet,
) -> Option<&'a SheSolution> {
    solutions
        .iter()
        .filter_map(|s| s.angle_set.max_distance(reference).map(|d| (d, s)))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, s)| s)
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exhaustive minimisation of `‖F‖²` over the ascending lattice with spacing
/// `step_deg`. Ties go to the lexicographically smallest angle set.
pub fn grid_oracle(targets: &HarmonicTargetSet, step_deg: f64) -> Result<AngleSet> {
    if !(step_deg >= MIN_ORACLE_STEP_DEG) {
        return Err(Error::Cost(format!(
            "grid step {step_deg}° is below the {MIN_ORACLE_STEP_DEG}° minimum"
        )));
    }
    let values = lattice(step_deg);
    let k = targets.len();
    let points = binomial(values.len(), k);
    if points > MAX_ORACLE_POINTS {
        return Err(Error::Cost(format!(
            "{points:.3e} lattice points exceed the 1e9 limit"
        )));
    }
    if points < 1.0 {
        return Err(Error::validation(
            "step",
            format!("lattice has fewer than {k} values below 90°"),
        ));
    }

    // cos(n_k·θ_g) per order, so each visit is additions only.
    let table: Vec<Vec<f64>> = targets
        .orders()
        .iter()
        .map(|&n| {
            values
                .iter()
                .map(|d| (n as f64 * d.to_radians()).cos())
                .collect()
        })
        .collect();

    let mut best_cost = f64::INFINITY;
    let mut best_idx = vec![0; k];
    for_each_ascending(values.len(), k, |idx| {
        let cost: f64 = table
            .iter()
            .map(|row| {
                let s: f64 = idx.iter().map(|&i| row[i]).sum();
                s * s
            })
            .sum();
        if cost < best_cost {
            best_cost = cost;
            best_idx.copy_from_slice(idx);
        }
    });
    AngleSet::from_degrees(&best_idx.iter().map(|&i| values[i]).collect::<Vec<_>>())
}
