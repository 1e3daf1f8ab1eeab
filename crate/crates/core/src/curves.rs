//! Hardness curves `β^cc_cut`, `β^cc_vc`, the approximation functions
//! `α^cc_cut`, `α^cc_2sat`, the search over configurations, and the
//! isolated-vertex / dummy-variable flattening of the hardness curves.
//!
//! Conventions: `q` is the fraction of variables set true, ρ ranges over
//! `κ(q)`, the feasible negative correlations of two q-biased bits.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::gamma;
use crate::numfmt::fmt_sig;
use crate::optimize::{golden_section, scan_then_golden, Minimum};
use crate::rounding::expected_pair_product;
use crate::sdp::check_triangle;

/// Number of equispaced ρ samples before golden refinement.
pub const RHO_SCAN_POINTS: usize = 512;
/// Golden-section bracket width for the ρ refinement.
pub const RHO_TOL: f64 = 1e-8;
/// Default q sampling step for emitted curves.
pub const DEFAULT_Q_STEP: f64 = 0.004;
/// Hardness of unconstrained Max-2-Sat (the LLZ constant), which caps the
/// CC-Max-2-Sat curve once dummy variables are added.
pub const UNCONSTRAINED_MAX_2SAT_HARDNESS: f64 = 0.9401;

/// Cardinality constraint `q ∈ (0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Cardinality(f64);

impl Cardinality {
    pub fn new(q: f64) -> Result<Self> {
        if q > 0.0 && q < 1.0 {
            Ok(Cardinality(q))
        } else {
            Err(Error::domain("q", q, "(0, 1)"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Balance `r = 1 - 2q` of the ±1 formulation.
    pub fn balance(self) -> f64 {
        1.0 - 2.0 * self.0
    }
}

/// The interval `[lo, 0)` (or `(lo, 0)` when `lo` is open).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoInterval {
    pub lo: f64,
    pub lo_closed: bool,
}

impl RhoInterval {
    pub const HI: f64 = 0.0;

    pub fn contains(&self, rho: f64) -> bool {
        let above = if self.lo_closed { rho >= self.lo } else { rho > self.lo };
        above && rho < Self::HI
    }
}

impl fmt::Display for RhoInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lo_closed { '[' } else { '(' };
        write!(f, "{open}{}, 0)", self.lo)
    }
}

/// κ(q): feasible correlations of two q-biased bits, excluding 0.
pub fn kappa(q: Cardinality) -> RhoInterval {
    let q = q.value();
    if q < 0.5 {
        RhoInterval { lo: -q / (1.0 - q), lo_closed: true }
    } else if q > 0.5 {
        RhoInterval { lo: -(1.0 - q) / q, lo_closed: true }
    } else {
        RhoInterval { lo: -1.0, lo_closed: false }
    }
}

fn check_rho(q: Cardinality, rho: f64) -> Result<()> {
    let k = kappa(q);
    if k.contains(rho) {
        Ok(())
    } else {
        Err(Error::domain("rho", rho, format!("kappa({}) = {k}", q.value())))
    }
}

/// `β^cc_cut(q, ρ) = (1 − Γ_ρ(q) − Γ_ρ(1−q)) / (2(q − q²)(1 − ρ))`.
pub fn beta_cut(q: Cardinality, rho: f64) -> Result<f64> {
    check_rho(q, rho)?;
    Ok(beta_cut_raw(q.value(), rho))
}

/// `β^cc_vc(q, ρ) = (1 − Γ_ρ(1−q)) / (q(1 + (1−q)(1−ρ)))`.
pub fn beta_vc(q: Cardinality, rho: f64) -> Result<f64> {
    check_rho(q, rho)?;
    Ok(beta_vc_raw(q.value(), rho))
}

pub(crate) fn beta_cut_raw(q: f64, rho: f64) -> f64 {
    let num = 1.0 - gamma(rho, q, q) - gamma(rho, 1.0 - q, 1.0 - q);
    num / (2.0 * (q - q * q) * (1.0 - rho))
}

pub(crate) fn beta_vc_raw(q: f64, rho: f64) -> f64 {
    let num = 1.0 - gamma(rho, 1.0 - q, 1.0 - q);
    num / (q * (1.0 + (1.0 - q) * (1.0 - rho)))
}

/// Minimizer of a curve function over ρ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoMinimum {
    pub rho_star: f64,
    pub value: f64,
}

/// Infimum of `f` over the interval. ρ = 0 itself is never sampled: the
/// curve functions tend to 1 there, which is never below the interior.
pub fn minimize_over_rho<F: Fn(f64) -> f64>(f: F, interval: RhoInterval, tol: f64) -> Result<RhoMinimum> {
    if !(tol > 0.0) {
        return Err(Error::domain("tol", tol, "(0, ∞)"));
    }
    if !(interval.lo >= -1.0 && interval.lo < 0.0) {
        return Err(Error::domain("lo", interval.lo, "[-1, 0)"));
    }
    let lo = if interval.lo_closed { interval.lo } else { interval.lo + 1e-9 };
    let step = (RhoInterval::HI - lo) / RHO_SCAN_POINTS as f64;
    let hi = RhoInterval::HI - step;
    let m = scan_then_golden(&f, lo, hi, RHO_SCAN_POINTS, tol);
    // The best sample may sit at the last point; look between it and 0 too.
    let m = if m.x >= hi - step {
        let tail = golden_section(&f, hi - step, RhoInterval::HI - 1e-12, tol);
        if tail.value < m.value {
            tail
        } else {
            m
        }
    } else {
        m
    };
    Ok(RhoMinimum { rho_star: m.x, value: m.value })
}

/// `inf_{ρ ∈ κ(q)} β^cc_cut(q, ρ)`.
pub fn beta_cut_inf(q: Cardinality) -> RhoMinimum {
    let qv = q.value();
    minimize_over_rho(|r| beta_cut_raw(qv, r), kappa(q), RHO_TOL).expect("valid interval")
}

/// `inf_{ρ ∈ κ(q)} β^cc_vc(q, ρ)`.
pub fn beta_vc_inf(q: Cardinality) -> RhoMinimum {
    let qv = q.value();
    minimize_over_rho(|r| beta_vc_raw(qv, r), kappa(q), RHO_TOL).expect("valid interval")
}

/// `α^cc_cut(q) = (2q − 2Γ_ρ̄(q)) / (2q)` with `ρ̄ = −q/(1−q)`; values with
/// `q > 1/2` are evaluated at `1 − q`.
pub fn alpha_cut(q: Cardinality) -> f64 {
    let q = q.value().min(1.0 - q.value());
    let rho_bar = -q / (1.0 - q);
    (2.0 * q - 2.0 * gamma(rho_bar, q, q)) / (2.0 * q)
}

/// `α^cc_2sat(q) = (1 − Γ_ρ̄(1 − q)) / (2q)` with `ρ̄ = −q/(1−q)`, for `q < 1/2`.
pub fn alpha_2sat(q: Cardinality) -> Result<f64> {
    let q = q.value();
    if q >= 0.5 {
        return Err(Error::domain("q", q, "(0, 1/2)"));
    }
    let rho_bar = -q / (1.0 - q);
    Ok((1.0 - gamma(rho_bar, 1.0 - q, 1.0 - q)) / (2.0 * q))
}

const ALPHA_SCAN: (f64, f64, usize) = (0.01, 0.499, 256);

/// Global minimum of [`alpha_cut`] over `q ∈ (0, 1/2)`; `x` is the minimizing `q`.
pub fn global_alpha_cut_minimum() -> Minimum {
    let (lo, hi, n) = ALPHA_SCAN;
    scan_then_golden(|q| alpha_cut(Cardinality(q)), lo, hi, n, 1e-10)
}

/// Global minimum of [`alpha_2sat`] over `q ∈ (0, 1/2)`.
pub fn global_alpha_2sat_minimum() -> Minimum {
    let (lo, hi, n) = ALPHA_SCAN;
    scan_then_golden(|q| alpha_2sat(Cardinality(q)).unwrap_or(f64::INFINITY), lo, hi, n, 1e-10)
}

/// Per-constraint SDP data `(μ₁, μ₂, ρ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Configuration {
    pub mu1: f64,
    pub mu2: f64,
    pub rho: f64,
}

impl Configuration {
    /// Validating constructor: coordinates in `[-1, 1]` and the four
    /// triangle inequalities satisfied.
    pub fn new(mu1: f64, mu2: f64, rho: f64) -> Result<Self> {
        for (name, v) in [("mu1", mu1), ("mu2", mu2), ("rho", rho)] {
            if !(-1.0..=1.0).contains(&v) {
                return Err(Error::domain(name, v, "[-1, 1]"));
            }
        }
        let violation = check_triangle(mu1, mu2, rho);
        if violation > 1e-12 {
            return Err(Error::Invalid(format!(
                "configuration ({mu1}, {mu2}, {rho}) violates a triangle inequality by {violation}"
            )));
        }
        Ok(Configuration { mu1, mu2, rho })
    }

    /// The diagonal boundary configuration `(μ, μ, −1 + 2μ)` with `μ = 1 − 2q`.
    pub fn diagonal(q: Cardinality) -> Self {
        let mu = 1.0 - 2.0 * q.value();
        Configuration { mu1: mu, mu2: mu, rho: -1.0 + 2.0 * mu.abs() }
    }

    fn coords(&self) -> [f64; 3] {
        [self.mu1, self.mu2, self.rho]
    }
}

/// Rounding loss ratio `(2 − 4Γ_ρ̄((1−μ₁)/2, (1−μ₂)/2) − μ₁ − μ₂) / (1 − ρ)`.
pub fn conf_ratio(c: &Configuration) -> f64 {
    (1.0 - expected_pair_product(c.mu1, c.mu2, c.rho)) / (1.0 - c.rho)
}

/// Outcome of the global search over configurations.
#[derive(Debug, Clone)]
pub struct ConfSearch {
    pub best: Configuration,
    pub value: f64,
    /// Every distinct local minimum within `1e-4` of the best, best first.
    pub near_optimal: Vec<(Configuration, f64)>,
}

const MU_CAP: f64 = 1.0 - 1e-6;
const RHO_CAP: f64 = 1.0 - 1e-3;

/// Linear constraints `a·x ≥ b` describing the searched part of Conf.
const CONF_CONSTRAINTS: [([f64; 3], f64); 10] = [
    ([1.0, 1.0, 1.0], -1.0),
    ([1.0, -1.0, -1.0], -1.0),
    ([-1.0, 1.0, -1.0], -1.0),
    ([-1.0, -1.0, 1.0], -1.0),
    ([1.0, 0.0, 0.0], -MU_CAP),
    ([-1.0, 0.0, 0.0], -MU_CAP),
    ([0.0, 1.0, 0.0], -MU_CAP),
    ([0.0, -1.0, 0.0], -MU_CAP),
    ([0.0, 0.0, 1.0], -1.0),
    ([0.0, 0.0, -1.0], -RHO_CAP),
];

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn feasible(x: &[f64; 3]) -> bool {
    CONF_CONSTRAINTS.iter().all(|(a, b)| dot(a, x) >= b - 1e-12)
}

fn conf_value(x: &[f64; 3]) -> f64 {
    conf_ratio(&Configuration { mu1: x[0], mu2: x[1], rho: x[2] })
}

/// Largest `t ∈ [0, max]` keeping `x + t·d` inside the searched polytope.
fn max_step(x: &[f64; 3], d: &[f64; 3], max: f64) -> f64 {
    CONF_CONSTRAINTS.iter().fold(max, |t, (a, b)| {
        let ad = dot(a, d);
        if ad < 0.0 {
            t.min(((dot(a, x) - b) / -ad).max(0.0))
        } else {
            t
        }
    })
}

/// Pattern search whose direction set spans every edge and face direction
/// of the triangle polytope, so it can slide along active faces.
fn pattern_search(start: [f64; 3], step0: f64, tol: f64) -> ([f64; 3], f64) {
    const DIRS: [[f64; 3]; 18] = [
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
        [1.0, 0.0, 1.0],
        [-1.0, 0.0, -1.0],
        [0.0, 1.0, 1.0],
        [0.0, -1.0, -1.0],
        [1.0, 0.0, -1.0],
        [-1.0, 0.0, 1.0],
        [0.0, 1.0, -1.0],
        [0.0, -1.0, 1.0],
        [1.0, 1.0, 0.0],
        [-1.0, -1.0, 0.0],
        [1.0, -1.0, 0.0],
        [-1.0, 1.0, 0.0],
    ];
    let mut x = start;
    let mut fx = conf_value(&x);
    let mut step = step0;
    let mut iters = 0;
    while step > tol && iters < 20_000 {
        iters += 1;
        let mut improved = false;
        for d in DIRS.iter() {
            let t = max_step(&x, d, step);
            if t <= 0.0 {
                continue;
            }
            let y = [x[0] + t * d[0], x[1] + t * d[1], x[2] + t * d[2]];
            let fy = conf_value(&y);
            if fy < fx {
                x = y;
                fx = fy;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, fx)
}

/// Global minimum of the rounding ratio over Conf: a feasible tensor grid
/// with `grid_density` points per axis seeds a pattern search from each
/// discrete local minimum.
pub fn full_conf_alpha_cut(grid_density: usize, refine_tol: f64) -> Result<ConfSearch> {
    if grid_density < 20 {
        return Err(Error::Invalid(format!("grid_density = {grid_density} must be at least 20")));
    }
    if !(refine_tol > 0.0) {
        return Err(Error::domain("refine_tol", refine_tol, "(0, ∞)"));
    }
    let g = grid_density;
    let mu_axis: Vec<f64> = (0..g).map(|i| -MU_CAP + 2.0 * MU_CAP * i as f64 / (g - 1) as f64).collect();
    let rho_axis: Vec<f64> = (0..g).map(|i| -1.0 + (RHO_CAP + 1.0) * i as f64 / (g - 1) as f64).collect();
    let idx = |i: usize, j: usize, k: usize| (i * g + j) * g + k;

    let values: Vec<Option<f64>> = (0..g * g * g)
        .into_par_iter()
        .map(|n| {
            let (i, j, k) = (n / (g * g), (n / g) % g, n % g);
            let x = [mu_axis[i], mu_axis[j], rho_axis[k]];
            feasible(&x).then(|| conf_value(&x))
        })
        .collect();

    let mut seeds: Vec<(f64, [f64; 3])> = Vec::new();
    for i in 0..g {
        for j in 0..g {
            for k in 0..g {
                let Some(v) = values[idx(i, j, k)] else { continue };
                let mut is_min = true;
                'nb: for di in -1i64..=1 {
                    for dj in -1i64..=1 {
                        for dk in -1i64..=1 {
                            let (a, b, c) = (i as i64 + di, j as i64 + dj, k as i64 + dk);
                            if (di, dj, dk) == (0, 0, 0) || a < 0 || b < 0 || c < 0 {
                                continue;
                            }
                            let (a, b, c) = (a as usize, b as usize, c as usize);
                            if a >= g || b >= g || c >= g {
                                continue;
                            }
                            if let Some(w) = values[idx(a, b, c)] {
                                if w < v {
                                    is_min = false;
                                    break 'nb;
                                }
                            }
                        }
                    }
                }
                if is_min {
                    seeds.push((v, [mu_axis[i], mu_axis[j], rho_axis[k]]));
                }
            }
        }
    }
    seeds.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.partial_cmp(&b.1).unwrap()));
    seeds.truncate(24);

    let step0 = 2.0 / (g - 1) as f64;
    let mut refined: Vec<([f64; 3], f64)> =
        seeds.par_iter().map(|(_, x)| pattern_search(*x, step0, refine_tol * 1e-2)).collect();
    refined.sort_by(|a, b| {
        a.1.total_cmp(&b.1)
            // prefer the μ ≥ 0 representative of the sign-symmetric pair
            .then((b.0[0] + b.0[1]).total_cmp(&(a.0[0] + a.0[1])))
    });

    let best_value = refined[0].1;
    let mut near: Vec<(Configuration, f64)> = Vec::new();
    for (x, v) in refined {
        if v > best_value + 1e-4 {
            break;
        }
        let c = Configuration { mu1: x[0], mu2: x[1], rho: x[2] };
        let dup = near.iter().any(|(o, _)| {
            let oc = o.coords();
            (0..3).map(|n| (oc[n] - x[n]).abs()).fold(0.0, f64::max) < 1e-3
        });
        if !dup {
            near.push((c, v));
        }
    }
    Ok(ConfSearch { best: near[0].0, value: best_value, near_optimal: near })
}

/// The three curve families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Problem {
    Cut,
    Vc,
    TwoSat,
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cut" => Ok(Problem::Cut),
            "vc" | "kvc" => Ok(Problem::Vc),
            "2sat" => Ok(Problem::TwoSat),
            other => Err(Error::Invalid(format!("unknown problem `{other}` (expected cut, vc or 2sat)"))),
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Problem::Cut => "cut",
            Problem::Vc => "vc",
            Problem::TwoSat => "2sat",
        })
    }
}

/// One sample of a hardness or approximation curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub q: f64,
    pub ratio: f64,
    /// Minimizing ρ; absent when the value was transferred by flattening.
    pub rho_star: Option<f64>,
    pub flattened: bool,
}

/// Unflattened hardness at `q`: the infimum over κ(q). For CC-Max-2-Sat
/// this is the better of the Max-k-VC bound at `q` and, after negating all
/// variables, at `1 − q`.
pub fn raw_hardness(problem: Problem, q: Cardinality) -> RhoMinimum {
    match problem {
        Problem::Cut => beta_cut_inf(q),
        Problem::Vc => beta_vc_inf(q),
        Problem::TwoSat => {
            let here = beta_vc_inf(q);
            let mirrored = beta_vc_inf(Cardinality(1.0 - q.value()));
            if mirrored.value < here.value {
                mirrored
            } else {
                here
            }
        }
    }
}

/// Local minimum of the unflattened curve inside `[lo, hi]`.
pub fn curve_local_minimum(problem: Problem, lo: f64, hi: f64) -> Result<Minimum> {
    Cardinality::new(lo)?;
    Cardinality::new(hi)?;
    Ok(scan_then_golden(|q| raw_hardness(problem, Cardinality(q)).value, lo, hi, 64, 1e-7))
}

/// Samples of an unflattened curve on a reference grid plus its refined
/// local minima; answers `inf` over q-ranges for the flattening transforms.
struct Envelope {
    samples: Vec<(f64, f64)>,
}

impl Envelope {
    fn build(problem: Problem, lo: f64, hi: f64, step: f64) -> Self {
        let n = ((hi - lo) / step).round() as usize;
        let qs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
        let vals: Vec<f64> = qs.par_iter().map(|&q| raw_hardness(problem, Cardinality(q)).value).collect();
        let mut samples: Vec<(f64, f64)> = qs.iter().copied().zip(vals.iter().copied()).collect();
        let minima: Vec<(f64, f64)> = (1..qs.len() - 1)
            .filter(|&i| vals[i] <= vals[i - 1] && vals[i] <= vals[i + 1])
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&i| {
                let m = golden_section(|q| raw_hardness(problem, Cardinality(q)).value, qs[i - 1], qs[i + 1], 1e-7);
                (m.x, m.value)
            })
            .collect();
        samples.extend(minima);
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        Envelope { samples }
    }

    fn inf_on(&self, a: f64, b: f64) -> f64 {
        self.samples.iter().filter(|(q, _)| *q >= a && *q <= b).map(|&(_, v)| v).fold(f64::INFINITY, f64::min)
    }
}

const ENVELOPE_STEP: f64 = 0.002;

fn vc_envelope() -> &'static Envelope {
    static ENV: OnceLock<Envelope> = OnceLock::new();
    ENV.get_or_init(|| Envelope::build(Problem::Vc, ENVELOPE_STEP, 1.0 - ENVELOPE_STEP, ENVELOPE_STEP))
}

fn cut_envelope() -> &'static Envelope {
    static ENV: OnceLock<Envelope> = OnceLock::new();
    ENV.get_or_init(|| Envelope::build(Problem::Cut, ENVELOPE_STEP, 0.5, ENVELOPE_STEP))
}

/// Max-k-VC hardness after adding isolated vertices: hardness at `q'`
/// transfers to every `q < q'`, so the curve becomes `inf_{q' ≥ q}`.
fn vc_flat(q: f64, raw: f64) -> f64 {
    raw.min(vc_envelope().inf_on(q, 1.0))
}

/// CC-Max-Cut soundness value is monotone on each side of 1/2, so the
/// isolated-vertex transfer works towards 1/2 from either side.
fn cut_flat(q: f64, raw: f64) -> f64 {
    let env = cut_envelope();
    if q <= 0.5 {
        raw.min(env.inf_on(q, 0.5))
    } else {
        // the cut curve is symmetric, so mirror into the sampled half
        raw.min(env.inf_on(1.0 - q, 0.5))
    }
}

/// q below 1/2 where the flattened Max-k-VC curve meets the unconstrained
/// Max-2-Sat hardness; the CC-Max-2-Sat curve is flat between it and its
/// mirror image.
pub fn two_sat_plateau_start() -> f64 {
    let f = |q: f64| vc_flat(q, beta_vc_inf(Cardinality(q)).value) - UNCONSTRAINED_MAX_2SAT_HARDNESS;
    let (mut a, mut b) = (0.37, 0.5);
    if f(b) <= 0.0 {
        return 0.5;
    }
    while b - a > 1e-10 {
        let m = 0.5 * (a + b);
        if f(m) > 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}

/// Sample a hardness curve on `q_grid`. With `flatten`, applies the
/// isolated-vertex transfer (cut, vc) and, for 2sat, mirroring plus the cap
/// from dummy-variable padding at the unconstrained Max-2-Sat hardness.
pub fn hardness_curve(problem: Problem, q_grid: &[f64], flatten: bool) -> Result<Vec<CurvePoint>> {
    validate_grid(q_grid)?;
    let raw: Vec<RhoMinimum> = q_grid.par_iter().map(|&q| raw_hardness(problem, Cardinality(q))).collect();
    if !flatten {
        return Ok(q_grid
            .iter()
            .zip(raw)
            .map(|(&q, m)| CurvePoint { q, ratio: m.value, rho_star: Some(m.rho_star), flattened: false })
            .collect());
    }
    let flat: Vec<f64> = q_grid
        .par_iter()
        .zip(raw.par_iter())
        .map(|(&q, m)| match problem {
            Problem::Vc => vc_flat(q, m.value),
            Problem::Cut => cut_flat(q, m.value),
            Problem::TwoSat => {
                let lo = q.min(1.0 - q);
                let hi = 1.0 - lo;
                let s = vc_flat(lo, beta_vc_inf(Cardinality(lo)).value)
                    .min(vc_flat(hi, beta_vc_inf(Cardinality(hi)).value));
                s.min(UNCONSTRAINED_MAX_2SAT_HARDNESS).min(m.value)
            }
        })
        .collect();
    Ok(q_grid
        .iter()
        .zip(raw)
        .zip(flat)
        .map(|((&q, m), f)| {
            if f < m.value - 1e-12 {
                CurvePoint { q, ratio: f, rho_star: None, flattened: true }
            } else {
                CurvePoint { q, ratio: m.value, rho_star: Some(m.rho_star), flattened: false }
            }
        })
        .collect())
}

/// Sample the approximation function of the problem on `q_grid`.
/// `cut` and `2sat` extend to `q ≥ 1/2` by negating all variables; `vc`
/// is only defined below 1/2.
pub fn alpha_curve(problem: Problem, q_grid: &[f64]) -> Result<Vec<CurvePoint>> {
    validate_grid(q_grid)?;
    q_grid
        .iter()
        .map(|&q| {
            let c = Cardinality(q);
            let low = Cardinality(q.min(1.0 - q));
            let ratio = match problem {
                Problem::Cut => alpha_cut(c),
                Problem::TwoSat if q == 0.5 => 1.0,
                Problem::TwoSat => alpha_2sat(low)?,
                Problem::Vc => alpha_2sat(c)?,
            };
            let rho_bar = -low.value() / (1.0 - low.value());
            Ok(CurvePoint { q, ratio, rho_star: Some(rho_bar), flattened: false })
        })
        .collect()
}

fn validate_grid(q_grid: &[f64]) -> Result<()> {
    if q_grid.is_empty() {
        return Err(Error::Invalid("empty q grid".into()));
    }
    for &q in q_grid {
        Cardinality::new(q)?;
    }
    if q_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("q grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Equispaced grid from `q_min` to `q_max` (inclusive, up to rounding) with
/// spacing `step`; abscissae are rounded to 1e-9 to avoid drift.
pub fn q_grid(q_min: f64, q_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        return Err(Error::domain("step", step, "(0, ∞)"));
    }
    Cardinality::new(q_min)?;
    Cardinality::new(q_max)?;
    if q_max < q_min {
        return Err(Error::Invalid(format!("q-max {q_max} is below q-min {q_min}")));
    }
    let n = ((q_max - q_min) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| ((q_min + step * i as f64) * 1e9).round() / 1e9).collect())
}

/// CSV rendering: header `q,ratio,rho_star,flattened`, 12 significant digits,
/// LF line endings. `preamble` lines are emitted first as `#` comments.
pub fn curve_csv(points: &[CurvePoint], preamble: &[String]) -> String {
    let mut out = String::new();
    for line in preamble {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out.push_str("q,ratio,rho_star,flattened\n");
    for p in points {
        let rho = p.rho_star.map(|r| fmt_sig(r, 12)).unwrap_or_default();
        out.push_str(&format!("{},{},{},{}\n", fmt_sig(p.q, 12), fmt_sig(p.ratio, 12), rho, u8::from(p.flattened)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn card(q: f64) -> Cardinality {
        Cardinality::new(q).unwrap()
    }

    #[test]
    fn kappa_branches() {
        let k = kappa(card(0.25));
        assert!((k.lo + 1.0 / 3.0).abs() < 1e-15 && k.lo_closed);
        assert_eq!(kappa(card(0.5)), RhoInterval { lo: -1.0, lo_closed: false });
        let k = kappa(card(0.75));
        assert!((k.lo + 1.0 / 3.0).abs() < 1e-15 && k.lo_closed);
        assert!(Cardinality::new(0.0).is_err());
        assert!(Cardinality::new(1.0).is_err());
    }

    #[test]
    fn beta_rejects_rho_outside_kappa() {
        let err = beta_cut(card(0.25), -0.5).unwrap_err().to_string();
        assert!(err.contains("kappa"), "{err}");
        assert!(beta_vc(card(0.5), -1.0).is_err());
        assert!(beta_vc(card(0.5), 0.0).is_err());
    }

    #[test]
    fn beta_tends_to_one_at_zero_rho() {
        for q in [0.1, 0.3, 0.5, 0.8] {
            let v = beta_cut(card(q), -1e-9).unwrap();
            assert!((v - 1.0).abs() < 1e-6, "q={q} v={v}");
        }
    }

    #[test]
    fn minimize_over_rho_parabola() {
        let interval = RhoInterval { lo: -0.8, lo_closed: true };
        let m = minimize_over_rho(|r| (r + 0.37).powi(2) + 0.5, interval, 1e-9).unwrap();
        assert!((m.rho_star + 0.37).abs() < 1e-7);
        assert!((m.value - 0.5).abs() < 1e-12);
        assert!(minimize_over_rho(|r| r, interval, 0.0).is_err());
    }

    #[test]
    fn diagonal_configuration_matches_alpha_cut() {
        for q in [0.1, 0.2, 0.365, 0.45] {
            let c = Configuration::diagonal(card(q));
            assert!(check_triangle(c.mu1, c.mu2, c.rho) <= 1e-15);
            assert!((conf_ratio(&c) - alpha_cut(card(q))).abs() < 1e-9, "q={q}");
        }
    }

    #[test]
    fn conf_ratio_at_antipodal_corner() {
        let c = Configuration::new(0.0, 0.0, -1.0).unwrap();
        assert!((conf_ratio(&c) - 1.0).abs() < 1e-15);
        assert!(Configuration::new(0.5, 0.5, -0.5).is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(hardness_curve(Problem::Cut, &[], false).is_err());
        assert!(hardness_curve(Problem::Cut, &[0.3, 0.2], false).is_err());
        assert!(hardness_curve(Problem::Cut, &[0.0, 0.2], false).is_err());
        let g = q_grid(0.364, 0.4, 0.004).unwrap();
        assert_eq!(g.len(), 10);
        assert_eq!(g[9], 0.4);
    }

    #[test]
    fn csv_layout() {
        let pts = [
            CurvePoint { q: 0.5, ratio: 0.878_567_206_395_2, rho_star: Some(-0.689), flattened: false },
            CurvePoint { q: 0.2, ratio: 0.858, rho_star: None, flattened: true },
        ];
        let csv = curve_csv(&pts, &["seed 0".to_string()]);
        assert_eq!(csv, "# seed 0\nq,ratio,rho_star,flattened\n0.5,0.878567206395,-0.689,0\n0.2,0.858,,1\n");
    }
}
