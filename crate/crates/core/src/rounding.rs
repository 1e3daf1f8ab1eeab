//! Threshold rounding of relaxation vectors and greedy cardinality repair.
//!
//! Each round draws a Gaussian `g` and sets `ȳ_i = +1` when
//! `⟨g, w̄_i⟩ ≥ Φ⁻¹((1 − μ_i)/2)`, where `w̄_i` is the normalized part of
//! `v_i` orthogonal to `v₀`. Then `E[ȳ_i] = μ_i`. The `ȳ` vector lives in
//! the relaxation's false = `+1` encoding and is negated to obtain an
//! [`Assignment`].
//!
//! Round `t` with seed `s` reads from ChaCha8 stream `t` of key `s`, so any
//! round can be reproduced on its own and rounds may run in parallel.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::{gamma, inv};
use crate::instance::{evaluate_unchecked, flip_delta, Assignment, CCInstance, ConstraintKind};
use crate::sdp::{dot, SDPSolution};

pub const DEFAULT_ROUNDS: usize = 200;

/// Norm below which `v_i − μ_i v₀` counts as degenerate.
const DEGENERATE_NORM: f64 = 1e-12;
const PERTURBATION: f64 = 1e-9;

/// Uniform draw on the open interval (0, 1) from 53 random bits.
pub(crate) fn uniform_open(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

pub(crate) fn std_normal_sample(rng: &mut ChaCha8Rng) -> f64 {
    inv(uniform_open(rng))
}

pub(crate) fn round_rng(seed: u64, round: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(round);
    rng
}

/// `E[ȳ₁ȳ₂]` for two rounded variables with marginals `μ₁, μ₂` whose
/// vectors have inner product `ρ`.
pub fn expected_pair_product(mu1: f64, mu2: f64, rho: f64) -> f64 {
    let mu1 = mu1.clamp(-1.0, 1.0);
    let mu2 = mu2.clamp(-1.0, 1.0);
    let s1 = (1.0 - mu1 * mu1).max(0.0).sqrt();
    let s2 = (1.0 - mu2 * mu2).max(0.0).sqrt();
    if s1 == 0.0 || s2 == 0.0 {
        // one side is deterministic
        return mu1 * mu2;
    }
    let rho_bar = ((rho - mu1 * mu2) / (s1 * s2)).clamp(-1.0, 1.0);
    4.0 * gamma(rho_bar, (1.0 - mu1) / 2.0, (1.0 - mu2) / 2.0) + mu1 + mu2 - 1.0
}

/// Expected objective of one rounding before repair, in closed form.
pub fn predicted_value(inst: &CCInstance, sol: &SDPSolution) -> Result<f64> {
    check_sizes(inst, sol)?;
    let mu = sol.mus();
    Ok(inst
        .constraints()
        .iter()
        .map(|c| {
            let pair = if c.i == c.j { 1.0 } else { expected_pair_product(mu[c.i], mu[c.j], sol.rho(c.i, c.j)) };
            let v = match c.kind {
                ConstraintKind::Xor { parity } => (1.0 + f64::from(parity) * pair) / 2.0,
                ConstraintKind::Or(p) => {
                    let (p1, p2, p3) = p.coefficients();
                    (3.0 + p1 * mu[c.i] + p2 * mu[c.j] + p3 * pair) / 4.0
                }
            };
            c.weight * v
        })
        .sum())
}

fn check_sizes(inst: &CCInstance, sol: &SDPSolution) -> Result<()> {
    if sol.n() != inst.n() {
        return Err(Error::Invalid(format!("solution has {} variables, instance has {}", sol.n(), inst.n())));
    }
    Ok(())
}

/// Precomputed rounding geometry: thresholds and unit directions.
struct Rounder {
    thresholds: Vec<f64>,
    dirs: Vec<Vec<f64>>,
    dim: usize,
}

impl Rounder {
    fn new(sol: &SDPSolution) -> Self {
        let v0 = &sol.vectors[0];
        let dim = v0.len();
        let mut thresholds = Vec::with_capacity(sol.n());
        let mut dirs = Vec::with_capacity(sol.n());
        for i in 0..sol.n() {
            let mu = sol.mu(i);
            let vi = &sol.vectors[i + 1];
            let mut w: Vec<f64> = vi.iter().zip(v0).map(|(a, b)| a - mu * b).collect();
            let mut norm = dot(&w, &w).sqrt();
            if norm < DEGENERATE_NORM {
                w = vec![0.0; dim];
                w[i % dim] = PERTURBATION;
                norm = PERTURBATION;
            }
            w.iter_mut().for_each(|x| *x /= norm);
            let p = (1.0 - mu) / 2.0;
            let t = if p <= 0.0 {
                f64::NEG_INFINITY
            } else if p >= 1.0 {
                f64::INFINITY
            } else {
                inv(p)
            };
            thresholds.push(t);
            dirs.push(w);
        }
        Rounder { thresholds, dirs, dim }
    }

    fn round(&self, seed: u64, round: u64) -> Vec<i8> {
        let mut rng = round_rng(seed, round);
        let g: Vec<f64> = (0..self.dim).map(|_| std_normal_sample(&mut rng)).collect();
        self.dirs.iter().zip(&self.thresholds).map(|(w, &t)| if dot(&g, w) >= t { 1 } else { -1 }).collect()
    }
}

/// One rounding, as `ȳ` in the relaxation's encoding.
pub fn round_once(sol: &SDPSolution, seed: u64, round: u64) -> Vec<i8> {
    Rounder::new(sol).round(seed, round)
}

/// Convert `ȳ` to an assignment (true = `+1`).
pub fn to_assignment(ybar: &[i8]) -> Assignment {
    Assignment::new(ybar.iter().map(|&y| -y).collect()).expect("±1 entries")
}

/// Flip variables one at a time until exactly `k` are true. Each flip
/// moves toward the target and picks the variable whose flip loses the
/// least objective; ties go to the smallest index. Returns the repaired
/// assignment and the number of flips, which always equals the initial
/// cardinality gap.
pub fn repair(inst: &CCInstance, a: &Assignment) -> Result<(Assignment, usize)> {
    if a.len() != inst.n() {
        return Err(Error::Invalid(format!("assignment has {} entries, instance has {} variables", a.len(), inst.n())));
    }
    let inc = inst.incidence();
    Ok(repair_with(inst, &inc, a.clone()))
}

fn repair_with(inst: &CCInstance, inc: &[Vec<usize>], mut a: Assignment) -> (Assignment, usize) {
    let mut count = a.count_true();
    let mut flips = 0;
    while count != inst.k() {
        let from: i8 = if count > inst.k() { 1 } else { -1 };
        let x = a.values();
        let mut best: Option<(usize, f64)> = None;
        for i in (0..x.len()).filter(|&i| x[i] == from) {
            let d = flip_delta(inst, &inc[i], x, i);
            if best.is_none_or(|(_, bd)| d > bd) {
                best = Some((i, d));
            }
        }
        let (i, _) = best.expect("a variable on the surplus side exists");
        a.values_mut()[i] = -from;
        count = if from == 1 { count - 1 } else { count + 1 };
        flips += 1;
    }
    (a, flips)
}

/// Instances up to this size seed the solver with the exact optimum.
pub const EXACT_SEED_MAX_VARS: usize = 20;

/// Exact optimum for small instances, [`greedy_assignment`] otherwise.
pub fn best_known_assignment(inst: &CCInstance) -> Result<Assignment> {
    if inst.n() <= EXACT_SEED_MAX_VARS {
        Ok(crate::instance::brute_force_opt(inst)?.0)
    } else {
        Ok(greedy_assignment(inst))
    }
}

/// Deterministic feasible assignment: greedy fill from all-false, then
/// best-improvement swaps until no swap helps.
pub fn greedy_assignment(inst: &CCInstance) -> Assignment {
    let inc = inst.incidence();
    let (mut a, _) = repair_with(inst, &inc, Assignment::from_true_set(inst.n(), []));
    let eps = 1e-12 * inst.total_weight().max(1.0);
    for _ in 0..inst.n() * inst.n() {
        let x = a.values().to_vec();
        let mut best: Option<(usize, usize, f64)> = None;
        for i in (0..x.len()).filter(|&i| x[i] == 1) {
            let di = flip_delta(inst, &inc[i], &x, i);
            let mut y = x.clone();
            y[i] = -1;
            for j in (0..x.len()).filter(|&j| x[j] == -1) {
                let d = di + flip_delta(inst, &inc[j], &y, j);
                if d > eps && best.is_none_or(|(_, _, bd)| d > bd) {
                    best = Some((i, j, d));
                }
            }
        }
        match best {
            Some((i, j, _)) => {
                a.values_mut()[i] = -1;
                a.values_mut()[j] = 1;
            }
            None => break,
        }
    }
    a
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundingReport {
    pub best_assignment: Assignment,
    pub best_value: f64,
    pub best_round: usize,
    pub rounds: usize,
    /// Objective of each round before repair.
    pub raw_values: Vec<f64>,
    /// Objective of each round after repair.
    pub repaired_values: Vec<f64>,
    /// `|Σ ȳ_i − (n − 2k)|` per round, before repair.
    pub pre_repair_gaps: Vec<f64>,
    pub repair_flips: Vec<usize>,
}

impl RoundingReport {
    pub fn mean_gap(&self) -> f64 {
        self.pre_repair_gaps.iter().sum::<f64>() / self.rounds as f64
    }

    pub fn max_gap(&self) -> f64 {
        self.pre_repair_gaps.iter().copied().fold(0.0, f64::max)
    }

    pub fn mean_raw_value(&self) -> f64 {
        self.raw_values.iter().sum::<f64>() / self.rounds as f64
    }
}

/// Round `rounds` times in parallel, repair each, keep the best. Ties go to
/// the earliest round.
pub fn round_best_of(inst: &CCInstance, sol: &SDPSolution, rounds: usize, seed: u64) -> Result<RoundingReport> {
    check_sizes(inst, sol)?;
    if rounds == 0 {
        return Err(Error::Invalid("at least one rounding is required".into()));
    }
    let rounder = Rounder::new(sol);
    let inc = inst.incidence();
    let target = inst.n() as f64 - 2.0 * inst.k() as f64;
    let results: Vec<(f64, f64, f64, Assignment, usize)> = (0..rounds as u64)
        .into_par_iter()
        .map(|t| {
            let ybar = rounder.round(seed, t);
            let gap = (ybar.iter().map(|&y| f64::from(y)).sum::<f64>() - target).abs();
            let raw = to_assignment(&ybar);
            let raw_value = evaluate_unchecked(inst, raw.values());
            let (fixed, flips) = repair_with(inst, &inc, raw);
            let value = evaluate_unchecked(inst, fixed.values());
            (gap, raw_value, value, fixed, flips)
        })
        .collect();
    let mut best_round = 0;
    for (t, r) in results.iter().enumerate() {
        if r.2 > results[best_round].2 {
            best_round = t;
        }
    }
    Ok(RoundingReport {
        best_assignment: results[best_round].3.clone(),
        best_value: results[best_round].2,
        best_round,
        rounds,
        raw_values: results.iter().map(|r| r.1).collect(),
        repaired_values: results.iter().map(|r| r.2).collect(),
        pre_repair_gaps: results.iter().map(|r| r.0).collect(),
        repair_flips: results.iter().map(|r| r.4).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Constraint, ProblemKind};

    #[test]
    fn pair_product_limits() {
        // independent directions
        let e = expected_pair_product(0.3, -0.2, 0.3 * -0.2);
        assert!((e - 0.3 * -0.2).abs() < 1e-12);
        // identical vectors
        assert!((expected_pair_product(0.4, 0.4, 1.0) - 1.0).abs() < 1e-12);
        // zero marginals reduce to the arcsine law
        let r: f64 = -0.5;
        let want = 2.0 / std::f64::consts::PI * r.asin();
        assert!((expected_pair_product(0.0, 0.0, r) - want).abs() < 1e-12);
        // deterministic side
        assert_eq!(expected_pair_product(1.0, 0.25, 0.25), 0.25);
    }

    #[test]
    fn uniform_is_open() {
        let mut rng = round_rng(1, 2);
        for _ in 0..1000 {
            let u = uniform_open(&mut rng);
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn repair_hits_target_with_gap_flips() {
        let cs = (0..5).map(|i| Constraint { i, j: (i + 1) % 5, weight: 1.0, kind: ConstraintKind::CUT }).collect();
        let inst = CCInstance::new(ProblemKind::Cut, 5, 2, cs).unwrap();
        for mask in 0u64..32 {
            let a = Assignment::from_mask(5, mask);
            let gap = (a.count_true() as i64 - 2).unsigned_abs() as usize;
            let (r, flips) = repair(&inst, &a).unwrap();
            assert_eq!(r.count_true(), 2);
            assert_eq!(flips, gap);
        }
    }

    #[test]
    fn greedy_is_feasible() {
        let cs = (0..6).map(|i| Constraint { i, j: (i + 1) % 6, weight: 1.0, kind: ConstraintKind::CUT }).collect();
        let inst = CCInstance::new(ProblemKind::Cut, 6, 3, cs).unwrap();
        let a = greedy_assignment(&inst);
        assert_eq!(a.count_true(), 3);
    }
}
