//! Numerical stress test of the gate and rotation bounds.
//!
//! The search looks for drives `(e11, e22, e12, φ, F)` that realize a target
//! operation to within a fidelity tolerance `ε` while spending a smaller
//! normalized time–energy product than the bound allows. The pulse shape is
//! not searched: the dynamics see `f` only through `F(τ)`, so the pulse is
//! taken constant (`f ≡ 1`, `τ = F`) and `F` is a coordinate like the others.
//!
//! Protocol:
//!
//! 1. Draw `budget` random candidates over the full nonnegative-definite
//!    parameter set, split into fixed-size shards, each with its own
//!    ChaCha stream derived from the seed. Shards run in parallel; their
//!    summaries are merged in shard order, so results do not depend on the
//!    thread count.
//! 2. Bucket candidates by normalized product (width [`BIN_WIDTH`]) and keep
//!    the [`STARTS_PER_BIN`] lowest-error candidates of each bucket as
//!    refinement starts, so every product range gets explored.
//! 3. From each start, coordinate descent with step halving first drives
//!    the error below `ε/4`, then lowers the product while keeping the error
//!    within `ε`. Step size at level `k` is `INITIAL_STEP·2^-k` relative to
//!    the current energy scale, action and `π` for the phase coordinate.
//!
//! The energy charged to a candidate is the larger of the two basis-state
//! energies `e11`, `e22`, and the fidelity criterion is also the worse of
//! the two basis states.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::HamiltonianParams;
use crate::propagator::{propagator_unchecked, Unitary2};
use crate::speedlimit::{normalized_gate_bound, normalized_rotation_bound};
use crate::synthesis::gate_error;

/// Candidates per sampling shard.
pub const SHARD_SIZE: u64 = 4096;
/// Upper end of the sampled action range `(0, MAX_ACTION]`.
pub const MAX_ACTION: f64 = 4.0 * PI;
/// Width of the product buckets used to pick refinement starts.
pub const BIN_WIDTH: f64 = 0.25;
pub const STARTS_PER_BIN: usize = 2;
/// Relative step of the first refinement level.
pub const INITIAL_STEP: f64 = 0.1;
/// Sweep cap per refinement level.
pub const MAX_SWEEPS: usize = 200;
pub const DEFAULT_REFINE_LEVELS: u32 = 30;
/// Fidelity tolerances above this are flagged as the loose regime, where
/// the bound is not expected to hold.
pub const LOOSE_EPSILON: f64 = 1e-2;
/// Fraction of `ε` the restoration stage aims for before the product is
/// lowered.
const RESTORE_FRACTION: f64 = 0.25;

/// Admissible undershoot of the bound for fidelity tolerance `epsilon`:
/// `50·ε`, capped at 0.05.
pub fn undershoot_tolerance(epsilon: f64) -> f64 {
    (50.0 * epsilon).min(0.05)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "angle")]
pub enum SearchTarget {
    /// Swap gate with phase shift `θ`.
    Theta(f64),
    /// Rotation with `|⟨ψ(τ)|ψ(0)⟩| = cos α` for both basis states.
    Alpha(f64),
}

impl SearchTarget {
    pub fn kind(&self) -> &'static str {
        match self {
            SearchTarget::Theta(_) => "theta",
            SearchTarget::Alpha(_) => "alpha",
        }
    }

    pub fn angle(&self) -> f64 {
        match *self {
            SearchTarget::Theta(a) | SearchTarget::Alpha(a) => a,
        }
    }

    /// Bound on the normalized product.
    pub fn bound(&self) -> f64 {
        match *self {
            SearchTarget::Theta(theta) => normalized_gate_bound(theta),
            SearchTarget::Alpha(alpha) => normalized_rotation_bound(alpha),
        }
    }

    /// Distance of `u` from the target operation.
    pub fn error(&self, u: &Unitary2) -> f64 {
        match *self {
            SearchTarget::Theta(theta) => gate_error(u.matrix(), theta),
            SearchTarget::Alpha(alpha) => {
                let c = alpha.cos();
                (u.u11().norm() - c).abs().max((u.u22().norm() - c).abs())
            }
        }
    }
}

/// A point of the search space; the pulse is `f ≡ 1`, so `τ = action`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub params: HamiltonianParams,
    pub action: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub target: SearchTarget,
    pub epsilon: f64,
    pub budget: u64,
    /// Number of step-halving levels per refinement.
    pub refine_levels: u32,
    pub seed: u64,
    /// Extra candidates evaluated and refined alongside the random ones.
    pub injected: Vec<Candidate>,
}

impl SearchConfig {
    pub fn new(target: SearchTarget, epsilon: f64, budget: u64, seed: u64) -> Self {
        SearchConfig {
            target,
            epsilon,
            budget,
            refine_levels: DEFAULT_REFINE_LEVELS,
            seed,
            injected: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return bad(format!("epsilon {} outside (0, 0.5)", self.epsilon));
        }
        if self.budget == 0 {
            return bad("budget must be at least 1".into());
        }
        if self.refine_levels == 0 {
            return bad("refinement levels must be at least 1".into());
        }
        match self.target {
            SearchTarget::Theta(t) if !(t >= 0.0 && t.is_finite()) => Err(Error::InvalidTheta(t)),
            SearchTarget::Alpha(a) if !(0.0..=FRAC_PI_2).contains(&a) => Err(Error::AlphaOutOfRange(a)),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: String,
    pub angle: f64,
    pub bound: f64,
    pub best_product: f64,
    /// `best_product − bound`.
    pub gap: f64,
    pub best_params: HamiltonianParams,
    pub best_action: f64,
    pub gate_error: f64,
    pub samples: u64,
    pub seed: u64,
    pub epsilon: f64,
    /// Undershoot still consistent with the bound at this `ε`.
    pub tolerance: f64,
    pub loose_fidelity: bool,
    /// Set for `α = 0`, which is reached without any evolution.
    pub degenerate: bool,
    /// Best feasible product after sampling, then after each refinement.
    pub refinement_trace: Vec<f64>,
}

impl BoundReport {
    pub fn violates_bound(&self) -> bool {
        self.gap < -self.tolerance
    }
}

/// Normalized product `τ·E/(h/4)` of a constant-pulse candidate, charging
/// the larger basis-state energy.
pub fn normalized_product(params: &HamiltonianParams, action: f64) -> f64 {
    action * params.e11.max(params.e22) / FRAC_PI_2
}

/// `(normalized product, gate error)` of a candidate for the gate `θ`.
pub fn evaluate_candidate(params: &HamiltonianParams, action: f64, theta: f64) -> Result<(f64, f64)> {
    params.check()?;
    if action.is_nan() || action <= 0.0 {
        return Err(Error::NonpositiveDuration(action));
    }
    Ok(evaluate(&SearchTarget::Theta(theta), &Candidate { params: *params, action }))
}

fn evaluate(target: &SearchTarget, c: &Candidate) -> (f64, f64) {
    let u = propagator_unchecked(&c.params, c.action);
    (normalized_product(&c.params, c.action), target.error(&u))
}

fn shard_rng(seed: u64, shard: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

fn draw(rng: &mut ChaCha8Rng) -> Candidate {
    let e11: f64 = rng.gen();
    let e22: f64 = rng.gen();
    let u: f64 = rng.gen_range(0.0..=1.0);
    let phi = rng.gen_range(0.0..TAU);
    let action = MAX_ACTION * (1.0 - rng.gen::<f64>());
    // u ≤ 1 keeps e11·e22 − e12² ≥ 0; the product can still round below
    // zero, which the validity filter catches.
    let params = HamiltonianParams::new(e11, e22, u * (e11 * e22).sqrt(), phi);
    Candidate { params, action }
}

fn shard_candidates(seed: u64, shard: u64, count: u64) -> impl Iterator<Item = Candidate> {
    let mut rng = shard_rng(seed, shard);
    std::iter::repeat_with(move || draw(&mut rng))
        .filter(|c| c.params.validate().is_valid())
        .take(count as usize)
}

fn shard_count(budget: u64) -> u64 {
    budget.div_ceil(SHARD_SIZE)
}

fn shard_len(budget: u64, shard: u64) -> u64 {
    SHARD_SIZE.min(budget - shard * SHARD_SIZE)
}

/// The random candidate stream: `config.budget` valid candidates,
/// reproducible from `config.seed`.
pub fn sample_candidates(config: &SearchConfig) -> impl Iterator<Item = Candidate> + '_ {
    (0..shard_count(config.budget))
        .flat_map(move |s| shard_candidates(config.seed, s, shard_len(config.budget, s)))
}

/// An evaluated candidate tagged with its position in the stream.
#[derive(Debug, Clone, Copy)]
struct Scored {
    index: u64,
    candidate: Candidate,
    product: f64,
    error: f64,
}

impl Scored {
    /// Lower product first, then stream position.
    fn better_product(&self, other: &Scored) -> bool {
        (self.product, self.index) < (other.product, other.index)
    }

    fn better_error(&self, other: &Scored) -> bool {
        (self.error, self.index) < (other.error, other.index)
    }
}

#[derive(Debug, Default)]
struct Summary {
    best_feasible: Option<Scored>,
    /// Per product bucket, lowest-error candidates in ascending order.
    bins: Vec<Vec<Scored>>,
}

impl Summary {
    fn offer(&mut self, s: Scored, epsilon: f64) {
        if s.error <= epsilon && self.best_feasible.is_none_or(|b| s.better_product(&b)) {
            self.best_feasible = Some(s);
        }
        let bin = (s.product / BIN_WIDTH) as usize;
        if self.bins.len() <= bin {
            self.bins.resize_with(bin + 1, Vec::new);
        }
        let slot = &mut self.bins[bin];
        let pos = slot.iter().position(|o| s.better_error(o)).unwrap_or(slot.len());
        if pos < STARTS_PER_BIN {
            slot.insert(pos, s);
            slot.truncate(STARTS_PER_BIN);
        }
    }

    fn merge(mut self, other: Summary, epsilon: f64) -> Summary {
        if let Some(b) = other.best_feasible {
            self.offer_feasible(b, epsilon);
        }
        for s in other.bins.into_iter().flatten() {
            self.offer(s, epsilon);
        }
        self
    }

    fn offer_feasible(&mut self, s: Scored, epsilon: f64) {
        if s.error <= epsilon && self.best_feasible.is_none_or(|b| s.better_product(&b)) {
            self.best_feasible = Some(s);
        }
    }

    fn starts(&self) -> Vec<Scored> {
        self.bins.iter().flatten().copied().collect()
    }
}

/// Objective used during refinement; `None` marks points outside the
/// admissible set.
fn refine_coordinate(
    start: Candidate,
    levels: u32,
    objective: impl Fn(&Candidate) -> Option<f64>,
    stop_below: f64,
) -> (Candidate, f64, Vec<f64>) {
    let mut x = start;
    let mut fx = objective(&x).unwrap_or(f64::INFINITY);
    let mut trace = Vec::with_capacity(levels as usize);
    'levels: for level in 0..levels {
        let h = INITIAL_STEP * 0.5f64.powi(level as i32);
        for _ in 0..MAX_SWEEPS {
            let mut improved = false;
            for coord in 0..5 {
                let step = h * coordinate_scale(&x, coord);
                for dir in [1.0, -1.0] {
                    loop {
                        let y = shifted(&x, coord, dir * step);
                        match objective(&y) {
                            Some(fy) if fy < fx => {
                                x = y;
                                fx = fy;
                                improved = true;
                            }
                            _ => break,
                        }
                    }
                }
            }
            if fx <= stop_below {
                trace.push(fx);
                break 'levels;
            }
            if !improved {
                break;
            }
        }
        trace.push(fx);
    }
    (x, fx, trace)
}

fn coordinate_scale(x: &Candidate, coord: usize) -> f64 {
    match coord {
        0..=2 => x.params.e11.max(x.params.e22).max(1e-6),
        3 => PI,
        _ => x.action,
    }
}

fn shifted(x: &Candidate, coord: usize, delta: f64) -> Candidate {
    let mut p = x.params;
    let mut action = x.action;
    match coord {
        0 => p.e11 += delta,
        1 => p.e22 += delta,
        2 => p.e12 += delta,
        3 => p = HamiltonianParams::new(p.e11, p.e22, p.e12, p.phi + delta),
        _ => action += delta,
    }
    Candidate { params: p, action }
}

fn admissible(c: &Candidate) -> bool {
    c.action > 0.0 && c.action.is_finite() && c.params.validate().is_valid()
}

/// Restores feasibility from `start`, then lowers the product inside the
/// feasible set. Returns the final point and the product trace of the
/// second stage, or `None` if the error never gets within `ε`.
fn refine(target: &SearchTarget, start: Candidate, epsilon: f64, levels: u32) -> Option<(Scored, Vec<f64>)> {
    let error_of = |c: &Candidate| admissible(c).then(|| evaluate(target, c).1);
    let (restored, err, _) = refine_coordinate(start, levels, error_of, RESTORE_FRACTION * epsilon);
    if err > epsilon {
        return None;
    }
    let product_of = |c: &Candidate| {
        if !admissible(c) {
            return None;
        }
        let (product, error) = evaluate(target, c);
        (error <= epsilon).then_some(product)
    };
    let (best, product, trace) = refine_coordinate(restored, levels, product_of, f64::NEG_INFINITY);
    let (_, error) = evaluate(target, &best);
    Some((
        Scored {
            index: 0,
            candidate: best,
            product,
            error,
        },
        trace,
    ))
}

/// Runs the search for either target kind.
pub fn run_search(config: &SearchConfig) -> Result<BoundReport> {
    config.validate()?;
    let target = config.target;
    let epsilon = config.epsilon;

    let summaries: Vec<Summary> = (0..shard_count(config.budget))
        .into_par_iter()
        .map(|s| {
            let mut summary = Summary::default();
            for (i, candidate) in shard_candidates(config.seed, s, shard_len(config.budget, s)).enumerate() {
                let (product, error) = evaluate(&target, &candidate);
                summary.offer(
                    Scored {
                        index: s * SHARD_SIZE + i as u64,
                        candidate,
                        product,
                        error,
                    },
                    epsilon,
                );
            }
            summary
        })
        .collect();
    let mut summary = summaries
        .into_iter()
        .fold(Summary::default(), |acc, s| acc.merge(s, epsilon));

    let mut starts = summary.starts();
    for (k, candidate) in config.injected.iter().enumerate() {
        if !admissible(candidate) {
            return Err(Error::InvalidConfig(format!("injected candidate {k} is not admissible")));
        }
        let (product, error) = evaluate(&target, candidate);
        let scored = Scored {
            index: config.budget + k as u64,
            candidate: *candidate,
            product,
            error,
        };
        summary.offer_feasible(scored, epsilon);
        starts.push(scored);
    }

    let refined: Vec<Option<Scored>> = starts
        .par_iter()
        .map(|s| {
            refine(&target, s.candidate, epsilon, config.refine_levels).map(|(mut r, _)| {
                r.index = s.index;
                r
            })
        })
        .collect();

    let mut best = summary.best_feasible;
    let mut trace = vec![best.map_or(f64::INFINITY, |b| b.product)];
    for r in refined.into_iter().flatten() {
        if best.is_none_or(|b| r.better_product(&b)) {
            best = Some(r);
        }
        trace.push(best.map_or(f64::INFINITY, |b| b.product));
    }

    let samples = config.budget + config.injected.len() as u64;
    let best = best.ok_or(Error::NoFeasibleCandidate { samples })?;
    let bound = target.bound();
    Ok(BoundReport {
        kind: target.kind().to_string(),
        angle: target.angle(),
        bound,
        best_product: best.product,
        gap: best.product - bound,
        best_params: best.candidate.params,
        best_action: best.candidate.action,
        gate_error: best.error,
        samples,
        seed: config.seed,
        epsilon,
        tolerance: undershoot_tolerance(epsilon),
        loose_fidelity: epsilon > LOOSE_EPSILON,
        degenerate: matches!(target, SearchTarget::Alpha(a) if a == 0.0),
        refinement_trace: trace,
    })
}

/// Search for the swap gate; `config.target` must be [`SearchTarget::Theta`].
pub fn minimize_product(config: &SearchConfig) -> Result<BoundReport> {
    match config.target {
        SearchTarget::Theta(_) => run_search(config),
        SearchTarget::Alpha(_) => Err(Error::InvalidConfig("minimize_product needs a θ target".into())),
    }
}

/// Search for a rotation; `config.target` must be [`SearchTarget::Alpha`].
pub fn rotation_search(config: &SearchConfig) -> Result<BoundReport> {
    match config.target {
        SearchTarget::Alpha(_) => run_search(config),
        SearchTarget::Theta(_) => Err(Error::InvalidConfig("rotation_search needs an α target".into())),
    }
}
