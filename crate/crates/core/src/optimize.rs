//! Numerical search for discrete measures with large averaged self-distance.
//!
//! For fixed atoms `x_1, …, x_k` the self-distance is the quadratic form
//! `vᵀ D v` on the probability simplex, with `D_ij = |x_i − x_j|`. Because
//! `D` is symmetric and nonnegative, the multiplicative update
//! `v_i ← v_i (Dv)_i / vᵀDv` keeps `v` on the simplex and never decreases the
//! objective.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::conjectured_bound;
use crate::delta::delta_discrete;
use crate::measures::DiscreteMeasure;
use crate::norms::{DistanceMatrix, NormSpec};
use crate::{Error, Result, DEFAULT_TOL};

/// Relative improvement below which an iteration counts as stalled.
pub const STALL_TOL: f64 = 1e-12;
/// Consecutive stalled iterations that end a run.
pub const STALL_ITERS: usize = 10;
/// Atom limit for [`brute_force_weights`].
pub const BRUTE_MAX_ATOMS: usize = 5;
/// Resolution limit for [`brute_force_weights`].
pub const BRUTE_MAX_RESOLUTION: u32 = 400;
/// Weights below this are tried at zero after an ascent run.
pub const PRUNE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub best_measure: DiscreteMeasure,
    pub best_value: f64,
    pub iterations: u64,
    pub restarts_used: u64,
    pub converged: bool,
    /// `2(1 − 2^{−n}) − best_value`.
    pub gap_to_conjecture: f64,
    /// Accepted atom moves; zero unless atom positions were searched.
    #[serde(default)]
    pub accepted_moves: u64,
}

/// One multiplicative-update run.
#[derive(Debug, Clone, PartialEq)]
pub struct AscentRun {
    pub weights: Vec<f64>,
    pub value: f64,
    pub iterations: u64,
    pub converged: bool,
    /// Objective before each update and after the last one, when requested.
    pub trace: Vec<f64>,
}

/// Runs `v_i ← v_i (Dv)_i / vᵀDv` from `start` until the relative gain stays
/// below [`STALL_TOL`] for [`STALL_ITERS`] iterations or `max_iters` is hit.
pub fn multiplicative_ascent(
    d: &DistanceMatrix,
    start: Vec<f64>,
    max_iters: u64,
    keep_trace: bool,
) -> AscentRun {
    let mut v = start;
    let mut dv = d.apply(&v);
    let mut value = dot(&v, &dv);
    let mut trace = Vec::new();
    let mut stalled = 0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        if keep_trace {
            trace.push(value);
        }
        if value <= 0.0 {
            // Only a point mass (or all mass on coincident atoms) has value 0;
            // it is a fixed point.
            converged = true;
            break;
        }
        let mut total = 0.0;
        for (vi, dvi) in v.iter_mut().zip(&dv) {
            *vi *= dvi / value;
            total += *vi;
        }
        v.iter_mut().for_each(|vi| *vi /= total);
        dv = d.apply(&v);
        let next = dot(&v, &dv);
        iterations += 1;
        let gain = (next - value) / value;
        value = next;
        if gain < STALL_TOL {
            stalled += 1;
            if stalled >= STALL_ITERS {
                converged = true;
                break;
            }
        } else {
            stalled = 0;
        }
    }
    if keep_trace {
        trace.push(value);
    }
    AscentRun { weights: v, value, iterations, converged, trace }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_atoms(ns: &NormSpec, atoms: &[Vec<f64>]) -> Result<()> {
    if atoms.is_empty() {
        return Err(Error::input("need at least one atom"));
    }
    for (i, a) in atoms.iter().enumerate() {
        if !ns.in_unit_ball(a, DEFAULT_TOL)? {
            return Err(Error::input(format!("atom {i} lies outside the unit ball")));
        }
    }
    Ok(())
}

/// Multiplicative updates approach a face of the simplex only like `1/t`.
/// Zeroing the small weights and re-running on that face often lands on the
/// face optimum; the result is kept only if it is no worse.
fn polish(d: &DistanceMatrix, run: AscentRun, max_iters: u64) -> AscentRun {
    let mut start = run.weights.clone();
    let mut pruned = false;
    for w in &mut start {
        if *w > 0.0 && *w < PRUNE_TOL {
            *w = 0.0;
            pruned = true;
        }
    }
    let total: f64 = start.iter().sum();
    if !pruned || total <= 0.0 {
        return run;
    }
    start.iter_mut().for_each(|w| *w /= total);
    let refined = multiplicative_ascent(d, start, max_iters, false);
    if refined.value >= run.value {
        AscentRun { iterations: run.iterations + refined.iterations, ..refined }
    } else {
        run
    }
}

/// Dirichlet(1, …, 1) start for restart `index`.
fn dirichlet_start(k: usize, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut v: Vec<f64> = (0..k).map(|_| Exp1.sample(&mut rng)).collect();
    let total: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= total);
    v
}

/// Packages weights into a result, re-evaluating the value exactly.
fn finish(
    ns: &NormSpec,
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
    ascent_value: f64,
    iterations: u64,
    restarts_used: u64,
    converged: bool,
) -> Result<OptimizationResult> {
    let best_measure = DiscreteMeasure::on(ns, atoms, weights)?;
    let best_value = delta_discrete(ns, &best_measure)?.value;
    if (best_value - ascent_value).abs() > 1e-10 {
        return Err(Error::domain(format!(
            "optimizer objective {ascent_value} disagrees with exact evaluation {best_value}"
        )));
    }
    Ok(OptimizationResult {
        gap_to_conjecture: conjectured_bound(ns.dim() as u64) - best_value,
        best_measure,
        best_value,
        iterations,
        restarts_used,
        converged,
        accepted_moves: 0,
    })
}

/// Maximizes `Δ` over the weights of fixed atoms.
///
/// Start 0 is uniform; starts `1..=restarts` are Dirichlet(1) draws from
/// substream `i` of `seed`. Starts run in parallel; the best value wins and
/// ties go to the lowest start index.
pub fn maximize_weights(
    ns: &NormSpec,
    atoms: &[Vec<f64>],
    restarts: u64,
    max_iters: u64,
    seed: u64,
) -> Result<OptimizationResult> {
    if restarts < 1 {
        return Err(Error::input("restarts must be at least 1"));
    }
    check_atoms(ns, atoms)?;
    let d = ns.distance_matrix(atoms)?;
    let k = atoms.len();
    let runs: Vec<AscentRun> = (0..=restarts)
        .into_par_iter()
        .map(|i| {
            let start = if i == 0 { vec![1.0 / k as f64; k] } else { dirichlet_start(k, seed, i) };
            polish(&d, multiplicative_ascent(&d, start, max_iters, false), max_iters)
        })
        .collect();
    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.value > runs[best].value {
            best = i;
        }
    }
    let iterations = runs.iter().map(|r| r.iterations).sum();
    let run = &runs[best];
    finish(ns, atoms.to_vec(), run.weights.clone(), run.value, iterations, restarts + 1, run.converged)
}

/// Exhaustive maximization over the simplex grid `{c / m : Σ c_i = m}`.
///
/// The quadratic form is Lipschitz on the simplex, so the grid maximum is
/// within `O(k/m)` of the true maximum.
pub fn brute_force_weights(
    ns: &NormSpec,
    atoms: &[Vec<f64>],
    resolution: u32,
) -> Result<OptimizationResult> {
    let k = atoms.len();
    if k > BRUTE_MAX_ATOMS {
        return Err(Error::input(format!("brute force takes at most {BRUTE_MAX_ATOMS} atoms")));
    }
    if resolution == 0 || resolution > BRUTE_MAX_RESOLUTION {
        return Err(Error::input(format!(
            "resolution must lie in 1..={BRUTE_MAX_RESOLUTION}, got {resolution}"
        )));
    }
    check_atoms(ns, atoms)?;
    let d = ns.distance_matrix(atoms)?;
    let m = resolution;

    // Enumerate compositions with c_0 fixed per parallel task; within a task
    // the order is lexicographic, so the first maximum is deterministic.
    let per_first: Vec<(f64, Vec<u32>, u64)> = (0..=m)
        .into_par_iter()
        .map(|c0| {
            let mut counts = vec![0u32; k];
            counts[0] = c0;
            let mut best = (f64::NEG_INFINITY, counts.clone(), 0u64);
            enumerate(&d, m, &mut counts, 1, m - c0, &mut best);
            best
        })
        .collect();
    let points: u64 = per_first.iter().map(|b| b.2).sum();
    let (value, counts, _) = per_first
        .into_iter()
        .filter(|b| b.0.is_finite())
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .expect("the grid is nonempty");
    let weights: Vec<f64> = counts.iter().map(|&c| c as f64 / m as f64).collect();
    finish(ns, atoms.to_vec(), weights, value, points, 0, true)
}

fn enumerate(
    d: &DistanceMatrix,
    m: u32,
    counts: &mut [u32],
    pos: usize,
    remaining: u32,
    best: &mut (f64, Vec<u32>, u64),
) {
    let k = counts.len();
    if pos == k {
        if remaining != 0 {
            return;
        }
        let v: Vec<f64> = counts.iter().map(|&c| c as f64 / m as f64).collect();
        let value = d.quadratic_form(&v);
        best.2 += 1;
        if value > best.0 {
            best.0 = value;
            best.1.copy_from_slice(counts);
        }
        return;
    }
    if pos == k - 1 {
        counts[pos] = remaining;
        enumerate(d, m, counts, pos + 1, 0, best);
        return;
    }
    for c in 0..=remaining {
        counts[pos] = c;
        enumerate(d, m, counts, pos + 1, remaining - c, best);
    }
    counts[pos] = 0;
}

/// Settings for the inner weight optimization of [`perturb_atoms`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InnerSettings {
    pub restarts: u64,
    pub max_iters: u64,
}

impl Default for InnerSettings {
    fn default() -> Self {
        InnerSettings { restarts: 4, max_iters: 5_000 }
    }
}

/// Random coordinate-wise local search over atom positions.
///
/// Each round moves one coordinate of one atom by a uniform amount in
/// `[−step, step]`, pulls the atom back onto the ball by dividing by its norm
/// when it leaves, re-optimizes the weights, and keeps the move only if the
/// optimized value strictly increases.
pub fn perturb_atoms(
    ns: &NormSpec,
    start: &DiscreteMeasure,
    rounds: u64,
    step: f64,
    seed: u64,
) -> Result<OptimizationResult> {
    perturb_atoms_with(ns, start, rounds, step, seed, InnerSettings::default())
}

pub fn perturb_atoms_with(
    ns: &NormSpec,
    start: &DiscreteMeasure,
    rounds: u64,
    step: f64,
    seed: u64,
    inner: InnerSettings,
) -> Result<OptimizationResult> {
    if rounds < 1 {
        return Err(Error::input("rounds must be at least 1"));
    }
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::input(format!("step must lie in (0, 1], got {step}")));
    }
    start.check_support(ns)?;
    let mut atoms = start.atoms().to_vec();
    let mut current = maximize_weights(ns, &atoms, inner.restarts, inner.max_iters, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    let mut accepted = 0;
    let mut iterations = current.iterations;
    for _ in 0..rounds {
        let i = rng.random_range(0..atoms.len());
        let j = rng.random_range(0..ns.dim());
        let shift = rng.random_range(-step..=step);
        let mut proposal = atoms.clone();
        proposal[i][j] += shift;
        let g = ns.eval_unchecked(&proposal[i]);
        if g > 1.0 {
            proposal[i].iter_mut().for_each(|v| *v /= g);
        }
        let candidate = maximize_weights(ns, &proposal, inner.restarts, inner.max_iters, seed)?;
        iterations += candidate.iterations;
        if candidate.best_value > current.best_value {
            atoms = proposal;
            current = candidate;
            accepted += 1;
        }
    }
    current.iterations = iterations;
    current.accepted_moves = accepted;
    Ok(current)
}
