//! Grid search for designs maximizing `M_θ`, `M_r` or `M_θ·M_r`.
//!
//! Designs start at the left end of the space and are parameterized by
//! their consecutive distances `d_i = k_i h`, `k_i ≥ 1`, `Σ k_i ≤ K` where
//! `h` is the grid resolution and `K h = b - a`.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::fisher;
use crate::kernels::{psi_of, Covariance, Kernel};
use crate::matalg::{Design, Interval};
use crate::math::{powf, round};
use crate::par::map_indexed;
use crate::rng::replicate_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    Theta,
    R,
    Product,
}

impl Criterion {
    pub fn name(self) -> &'static str {
        match self {
            Criterion::Theta => "theta",
            Criterion::R => "r",
            Criterion::Product => "product",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "theta" => Some(Criterion::Theta),
            "r" => Some(Criterion::R),
            "product" => Some(Criterion::Product),
            _ => None,
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Criterion value of a distance vector. Only distances matter, so the
/// design is placed at the origin without a bounding space.
pub fn evaluate(kernel: &Kernel, distances: &[f64], criterion: Criterion, dr: f64) -> Result<f64> {
    let d = Design::from_distances(0.0, distances, unbounded(distances))?;
    match criterion {
        Criterion::Theta => fisher::m_theta(kernel, &d),
        Criterion::R => fisher::m_r(kernel, &d, dr),
        Criterion::Product => Ok(fisher::m_theta(kernel, &d)? * fisher::m_r(kernel, &d, dr)?),
    }
}

fn unbounded(distances: &[f64]) -> Interval {
    let total: f64 = distances.iter().sum();
    Interval {
        a: 0.0,
        b: if total > 0.0 { total } else { 1.0 },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOptions {
    /// Candidates within this of the optimum form the tie set.
    pub tie_tol: f64,
    /// Largest candidate count enumerated exhaustively.
    pub exhaustive_cap: u64,
    pub restarts: usize,
    pub seed: u64,
    /// Skip enumeration even when it would fit under the cap.
    pub force_coordinate_descent: bool,
    /// Finite-difference step for `M_r`; `None` uses [`fisher::default_dr`].
    pub dr: Option<f64>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            tie_tol: 1e-10,
            exhaustive_cap: 10_000_000,
            restarts: 5,
            seed: 0,
            force_coordinate_descent: false,
            dr: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMethod {
    Exhaustive,
    CoordinateDescent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub distances: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignSearchResult {
    pub best_design: Design,
    pub criterion_value: f64,
    pub criterion: Criterion,
    /// Every design within the tie tolerance of the optimum, in search order.
    pub ties: Vec<Design>,
    /// Designs that improved on or tied with the running optimum.
    pub trace: Vec<TraceEntry>,
    pub collapsed: bool,
    /// No distance at the minimal grid step and the design does not fill the
    /// space.
    pub interior_optimum: bool,
    pub method: SearchMethod,
    pub evaluations: u64,
    pub grid_resolution: f64,
}

impl DesignSearchResult {
    pub fn tie_distances(&self) -> Vec<Vec<f64>> {
        self.ties.iter().map(Design::distances).collect()
    }
}

/// Default grid resolution `(b - a) / 200`.
pub fn default_resolution(space: Interval) -> f64 {
    space.length() / 200.0
}

/// `C(k, j)` saturating at `u64::MAX`.
fn binomial(k: u64, j: u64) -> u64 {
    if j > k {
        return 0;
    }
    let j = j.min(k - j);
    let mut acc: u128 = 1;
    for i in 0..j {
        acc = acc * (k - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

struct Grid<'a> {
    kernel: &'a Kernel,
    criterion: Criterion,
    h: f64,
    steps: usize,
    dr: f64,
}

impl Grid<'_> {
    fn distances(&self, ks: &[usize]) -> Vec<f64> {
        ks.iter().map(|&k| k as f64 * self.h).collect()
    }

    /// Candidates that fail to factor score `-inf`.
    fn value(&self, ks: &[usize]) -> f64 {
        evaluate(self.kernel, &self.distances(ks), self.criterion, self.dr)
            .ok()
            .filter(|v| v.is_finite())
            .unwrap_or(f64::NEG_INFINITY)
    }
}

/// Running optimum with its tie set. Candidates arrive in a fixed order so
/// the outcome does not depend on how evaluation was scheduled.
struct Tracker {
    tol: f64,
    best: f64,
    ties: Vec<(Vec<usize>, f64)>,
    seen: BTreeSet<Vec<usize>>,
    trace: Vec<(Vec<usize>, f64)>,
}

impl Tracker {
    fn new(tol: f64) -> Self {
        Tracker {
            tol,
            best: f64::NEG_INFINITY,
            ties: Vec::new(),
            seen: BTreeSet::new(),
            trace: Vec::new(),
        }
    }

    fn within(&self, v: f64) -> bool {
        (self.best - v).abs() <= self.tol * self.best.abs().max(1.0)
    }

    fn offer(&mut self, ks: &[usize], v: f64) {
        if v == f64::NEG_INFINITY {
            return;
        }
        if v > self.best {
            self.best = v;
            let (tol, best) = (self.tol, self.best);
            let seen = &mut self.seen;
            self.ties.retain(|(ks, w)| {
                let keep = (best - w).abs() <= tol * best.abs().max(1.0);
                if !keep {
                    seen.remove(ks);
                }
                keep
            });
        } else if !self.within(v) {
            return;
        }
        if self.seen.insert(ks.to_vec()) {
            self.ties.push((ks.to_vec(), v));
        }
        self.trace.push((ks.to_vec(), v));
    }
}

/// Lexicographic successor of a composition with parts `≥ 1` and sum
/// `≤ total`. Returns false when exhausted.
fn next_composition(ks: &mut [usize], total: usize) -> bool {
    let m = ks.len();
    let sum: usize = ks.iter().sum();
    if sum < total {
        ks[m - 1] += 1;
        return true;
    }
    // Carry: reset the last position that cannot grow and bump its left neighbour.
    let mut i = m - 1;
    loop {
        if i == 0 {
            return false;
        }
        ks[i] = 1;
        ks[i - 1] += 1;
        let s: usize = ks.iter().sum();
        if s <= total {
            return true;
        }
        i -= 1;
    }
}

const BATCH: usize = 4096;

fn exhaustive(grid: &Grid<'_>, parts: usize, tracker: &mut Tracker) -> u64 {
    let mut ks = vec![1usize; parts];
    let mut evaluations = 0u64;
    let mut done = false;
    while !done {
        let mut batch: Vec<Vec<usize>> = Vec::with_capacity(BATCH);
        while batch.len() < BATCH {
            batch.push(ks.clone());
            if !next_composition(&mut ks, grid.steps) {
                done = true;
                break;
            }
        }
        let values = map_indexed(batch.len(), |i| grid.value(&batch[i]));
        for (cand, v) in batch.iter().zip(values) {
            tracker.offer(cand, v);
        }
        evaluations += batch.len() as u64;
    }
    evaluations
}

/// Random composition with parts `≥ 1` and sum `≤ total`.
fn random_start(parts: usize, total: usize, seed: u64, restart: u64) -> Vec<usize> {
    let mut rng = replicate_rng(seed, restart);
    let budget = total - parts;
    let mut ks = vec![1usize; parts];
    let spend = (rng.next_u64() % (budget as u64 + 1)) as usize;
    for _ in 0..spend {
        let i = (rng.next_u64() % parts as u64) as usize;
        ks[i] += 1;
    }
    ks
}

fn coordinate_descent(
    grid: &Grid<'_>,
    parts: usize,
    restarts: usize,
    seed: u64,
    tracker: &mut Tracker,
) -> u64 {
    let total = grid.steps;
    let mut evaluations = 0u64;
    for restart in 0..restarts.max(1) {
        // The first start is the equidistant design filling the space.
        let mut ks = if restart == 0 {
            let base = total / parts;
            let mut ks = vec![base; parts];
            for k in ks.iter_mut().take(total - base * parts) {
                *k += 1;
            }
            ks
        } else {
            random_start(parts, total, seed, restart as u64)
        };
        let mut current = grid.value(&ks);
        evaluations += 1;
        tracker.offer(&ks, current);
        loop {
            let mut improved = false;
            // Single coordinate moves within the budget.
            for i in 0..parts {
                let others: usize = ks.iter().sum::<usize>() - ks[i];
                let cands: Vec<usize> = (1..=total - others).filter(|&k| k != ks[i]).collect();
                let values = map_indexed(cands.len(), |c| {
                    let mut trial = ks.clone();
                    trial[i] = cands[c];
                    grid.value(&trial)
                });
                evaluations += cands.len() as u64;
                for (&k, v) in cands.iter().zip(values) {
                    let mut trial = ks.clone();
                    trial[i] = k;
                    tracker.offer(&trial, v);
                    if v > current + tracker.tol * current.abs().max(1.0) {
                        current = v;
                        ks = trial;
                        improved = true;
                    }
                }
            }
            // Transfers between two coordinates keep the total fixed.
            for i in 0..parts {
                for j in 0..parts {
                    if i == j {
                        continue;
                    }
                    let cands: Vec<usize> = (1..ks[j]).collect();
                    let values = map_indexed(cands.len(), |c| {
                        let mut trial = ks.clone();
                        trial[i] += cands[c];
                        trial[j] -= cands[c];
                        grid.value(&trial)
                    });
                    evaluations += cands.len() as u64;
                    let base = ks.clone();
                    for (&t, v) in cands.iter().zip(values) {
                        let mut trial = base.clone();
                        trial[i] += t;
                        trial[j] -= t;
                        tracker.offer(&trial, v);
                        if v > current + tracker.tol * current.abs().max(1.0) {
                            current = v;
                            ks = trial;
                            improved = true;
                        }
                    }
                }
            }
            if !improved {
                break;
            }
        }
    }
    evaluations
}

/// Searches the grid of distance vectors on `space` for the design of `n`
/// points maximizing `criterion`.
pub fn search(
    kernel: &Kernel,
    space: Interval,
    n: usize,
    criterion: Criterion,
    grid_resolution: f64,
) -> Result<DesignSearchResult> {
    search_with(kernel, space, n, criterion, grid_resolution, &SearchOptions::default())
}

pub fn search_with(
    kernel: &Kernel,
    space: Interval,
    n: usize,
    criterion: Criterion,
    grid_resolution: f64,
    options: &SearchOptions,
) -> Result<DesignSearchResult> {
    if n < 2 {
        return Err(Error::invalid("a design needs at least two points"));
    }
    let h = grid_resolution;
    let length = space.length();
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::invalid(alloc::format!("grid resolution must be positive, got {h}")));
    }
    if n as f64 * h > length * (1.0 + 1e-12) {
        return Err(Error::Infeasible(alloc::format!(
            "{n} points at resolution {h} do not fit in an interval of length {length}"
        )));
    }
    let steps_f = round(length / h);
    if (steps_f * h - length).abs() > 1e-12 * length.max(1.0) {
        return Err(Error::invalid(alloc::format!(
            "grid resolution {h} does not divide the interval length {length}"
        )));
    }
    let steps = steps_f as usize;
    let parts = n - 1;
    let dr = options.dr.unwrap_or_else(|| fisher::default_dr(kernel));
    let grid = Grid {
        kernel,
        criterion,
        h,
        steps,
        dr,
    };
    let mut tracker = Tracker::new(options.tie_tol);
    let count = binomial(steps as u64, parts as u64);
    let (method, evaluations) = if !options.force_coordinate_descent && count <= options.exhaustive_cap {
        (SearchMethod::Exhaustive, exhaustive(&grid, parts, &mut tracker))
    } else {
        (
            SearchMethod::CoordinateDescent,
            coordinate_descent(&grid, parts, options.restarts, options.seed, &mut tracker),
        )
    };
    if tracker.ties.is_empty() {
        return Err(Error::Infeasible(
            "no candidate design has a positive definite covariance matrix".into(),
        ));
    }
    // Prefer designs that fill the space, then the lexicographically
    // smallest distance vector.
    let best_ks = tracker
        .ties
        .iter()
        .map(|(ks, _)| ks)
        .min_by(|a, b| {
            let fa = a.iter().sum::<usize>() == steps;
            let fb = b.iter().sum::<usize>() == steps;
            fb.cmp(&fa).then_with(|| a.cmp(b))
        })
        .cloned()
        .unwrap_or_default();
    let to_design = |ks: &[usize]| {
        let mut points = Vec::with_capacity(ks.len() + 1);
        let mut acc = 0usize;
        points.push(space.a);
        for k in ks {
            acc += k;
            points.push((space.a + acc as f64 * h).min(space.b));
        }
        Design::new(points, space)
    };
    let best_design = to_design(&best_ks)?;
    let criterion_value = grid.value(&best_ks);
    let ties = tracker
        .ties
        .iter()
        .map(|(ks, _)| to_design(ks))
        .collect::<Result<Vec<_>>>()?;
    let trace = tracker
        .trace
        .iter()
        .map(|(ks, v)| TraceEntry {
            distances: grid.distances(ks),
            value: *v,
        })
        .collect();
    let collapsed = is_collapsing(&grid, &best_ks, criterion_value);
    let interior_optimum = best_ks.iter().all(|&k| k > 1) && best_ks.iter().sum::<usize>() < steps;
    Ok(DesignSearchResult {
        best_design,
        criterion_value,
        criterion,
        ties,
        trace,
        collapsed,
        interior_optimum,
        method,
        evaluations,
        grid_resolution: h,
    })
}

/// A coordinate at the minimal grid step whose one-sided slope in `d` is
/// negative, so the criterion keeps growing as that distance shrinks.
fn is_collapsing(grid: &Grid<'_>, ks: &[usize], value: f64) -> bool {
    let delta = 1e-3 * grid.h;
    ks.iter().enumerate().any(|(i, &k)| {
        if k != 1 {
            return false;
        }
        let mut d = grid.distances(ks);
        d[i] += delta;
        match evaluate(grid.kernel, &d, grid.criterion, grid.dr) {
            Ok(v) => (v - value) / delta < 0.0,
            Err(_) => false,
        }
    })
}

/// Maximizes `M_θ·M_r` on the default grid of `space`.
pub fn product_design(kernel: &Kernel, space: Interval, n: usize) -> Result<DesignSearchResult> {
    search(kernel, space, n, Criterion::Product, default_resolution(space))
}

/// Design whose consecutive distances form a geometric sequence with the
/// given ratio and fill `space`.
pub fn geometric_progressive(space: Interval, n: usize, ratio: f64) -> Result<Design> {
    if n < 2 {
        return Err(Error::invalid("a design needs at least two points"));
    }
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(Error::invalid(alloc::format!("ratio must be positive, got {ratio}")));
    }
    let parts = n - 1;
    let weights: Vec<f64> = (0..parts).map(|i| powf(ratio, i as f64)).collect();
    let total: f64 = weights.iter().sum();
    let length = space.length();
    let distances: Vec<f64> = weights.iter().map(|w| length * w / total).collect();
    if !total.is_finite() || distances.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
        return Err(Error::Infeasible(alloc::format!(
            "ratio {ratio} over {parts} gaps underflows or overflows"
        )));
    }
    let mut points = Vec::with_capacity(n);
    let mut x = space.a;
    points.push(x);
    for d in &distances[..parts - 1] {
        x += d;
        points.push(x);
    }
    // Land exactly on the right end.
    points.push(space.b);
    Design::new(points, space)
}

/// Total `ψ` budget `L = ψ(b - a)` of a space.
pub fn psi_budget<K: Covariance + ?Sized>(kernel: &K, space: Interval) -> f64 {
    psi_of(kernel).psi(space.length())
}

/// Design from `a` whose `n - 1` gaps each carry `ψ`-weight `L / (n - 1)`.
/// For OU (linear `ψ`) this is the equispaced design over the whole space;
/// for other kernels it generally stops short of `b`.
pub fn psi_equidistant<K: Covariance + ?Sized>(kernel: &K, space: Interval, n: usize) -> Result<Design> {
    if n < 2 {
        return Err(Error::invalid("a design needs at least two points"));
    }
    let psi = psi_of(kernel);
    let budget = psi.psi(space.length());
    if !(budget.is_finite() && budget > 0.0) {
        return Err(Error::Infeasible(alloc::format!("psi budget over the space is {budget}")));
    }
    let target = budget / (n - 1) as f64;
    // Smallest d with ψ(d) >= target; ψ is nondecreasing.
    let (mut lo, mut hi) = (0.0, space.length());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if psi.psi(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if hi <= f64::EPSILON * space.length() {
        return Err(Error::Infeasible(
            "psi jumps past the per-gap budget at the origin".into(),
        ));
    }
    let points = (0..n).map(|i| (space.a + i as f64 * hi).min(space.b)).collect();
    Design::new(points, space)
}
