//! Self-check suites behind the `verify` subcommand.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curves::{self, alpha_2sat, alpha_cut, beta_cut, beta_vc, Cardinality, Problem};
use crate::error::{Error, Result};
use crate::gadget::{build_gadget, completeness_set, UGInstance};
use crate::gaussian::gamma;
use crate::numfmt::fmt_sig;
use crate::rounding::{expected_pair_product, round_once};
use crate::sdp::{check_triangle, SDPSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Gamma,
    Curves,
    GraphInvariants,
    RoundingStats,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Gamma, Suite::Curves, Suite::GraphInvariants, Suite::RoundingStats];
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gamma" => Ok(Suite::Gamma),
            "curves" => Ok(Suite::Curves),
            "graph-invariants" => Ok(Suite::GraphInvariants),
            "rounding-stats" => Ok(Suite::RoundingStats),
            other => Err(Error::Invalid(format!("unknown suite `{other}`"))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Gamma => "gamma",
            Suite::Curves => "curves",
            Suite::GraphInvariants => "graph-invariants",
            Suite::RoundingStats => "rounding-stats",
        })
    }
}

/// One measured invariant. `measured ≤ bound` means pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
}

impl Check {
    pub fn new(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Check { name: name.into(), measured, bound }
    }

    pub fn passed(&self) -> bool {
        self.measured <= self.bound
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    /// One `suite,name,measured,bound,verdict` CSV row per check.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                self.suite,
                c.name,
                fmt_sig(c.measured, 12),
                fmt_sig(c.bound, 12),
                if c.passed() { "pass" } else { "fail" }
            ));
        }
        out
    }
}

pub fn run(suite: Suite, seed: u64) -> Result<Report> {
    let checks = match suite {
        Suite::Gamma => gamma_suite(),
        Suite::Curves => curves_suite()?,
        Suite::GraphInvariants => graph_suite(seed)?,
        Suite::RoundingStats => rounding_suite(seed)?,
    };
    Ok(Report { suite, checks })
}

/// Largest reflection-identity residual over the standard grid:
/// `Γ_ρ(x,y) − (Γ_ρ(1−x,1−y) − 1 + x + y)`.
pub fn reflection_residual() -> f64 {
    let axis: Vec<f64> = (1..=19).map(|i| i as f64 * 0.05).collect();
    let rhos: Vec<f64> = (0..20).map(|i| -0.95 + 0.1 * i as f64).collect();
    let mut worst: f64 = 0.0;
    for &rho in &rhos {
        for &x in &axis {
            for &y in &axis {
                let lhs = gamma(rho, x, y);
                let rhs = gamma(rho, 1.0 - x, 1.0 - y) - 1.0 + x + y;
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    worst
}

fn gamma_suite() -> Vec<Check> {
    let axis: Vec<f64> = (1..=19).map(|i| i as f64 * 0.05).collect();
    let mut closed: f64 = 0.0;
    for &x in &axis {
        for &y in &axis {
            closed = closed
                .max((gamma(0.0, x, y) - x * y).abs())
                .max((gamma(1.0, x, y) - x.min(y)).abs())
                .max((gamma(-1.0, x, y) - (x + y - 1.0).max(0.0)).abs());
        }
    }
    vec![
        Check::new("reflection_identity_max_residual", reflection_residual(), 1e-9),
        Check::new("closed_forms_max_error", closed, 1e-12),
    ]
}

/// Reference coordinates the flattened curves must reproduce.
pub const CUT_TARGETS: [(f64, f64); 5] =
    [(0.364, 0.858297), (0.4, 0.860599), (0.452, 0.873752), (0.5, 0.878567), (0.6, 0.860599)];
pub const VC_TARGETS: [(f64, f64); 4] = [(0.364, 0.929148), (0.6, 0.944240), (0.8, 0.977829), (0.9, 0.993112)];
pub const TWO_SAT_TARGETS: [(f64, f64); 4] = [(0.4, 0.930300), (0.464, 0.940310), (0.536, 0.940310), (0.6, 0.930300)];

/// `max |α − β|` at the extremal correlation over `samples` points of
/// `(0, 1/2)`, for the cut and the 2-Sat/vertex-cover pair.
pub fn matching_identity_residuals(samples: usize) -> Result<(f64, f64)> {
    let mut cut: f64 = 0.0;
    let mut sat: f64 = 0.0;
    for i in 0..samples {
        let q = 0.01 + 0.48 * i as f64 / (samples - 1).max(1) as f64;
        let c = Cardinality::new(q)?;
        let rho = -q / (1.0 - q);
        cut = cut.max((alpha_cut(c) - beta_cut(c, rho)?).abs());
        sat = sat.max((alpha_2sat(c)? - beta_vc(c, rho)?).abs());
    }
    Ok((cut, sat))
}

fn curves_suite() -> Result<Vec<Check>> {
    let (cut, sat) = matching_identity_residuals(200)?;
    let mut checks = vec![
        Check::new("alpha_cut_minus_beta_cut_extremal", cut, 1e-10),
        Check::new("alpha_2sat_minus_beta_vc_extremal", sat, 1e-10),
    ];
    for (problem, targets) in
        [(Problem::Cut, &CUT_TARGETS[..]), (Problem::Vc, &VC_TARGETS[..]), (Problem::TwoSat, &TWO_SAT_TARGETS[..])]
    {
        let qs: Vec<f64> = targets.iter().map(|t| t.0).collect();
        let pts = curves::hardness_curve(problem, &qs, true)?;
        for (p, &(q, want)) in pts.iter().zip(targets) {
            checks.push(Check::new(format!("{problem}_flattened_at_{q}"), (p.ratio - want).abs(), 1e-3));
        }
    }
    Ok(checks)
}

fn graph_suite(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inv: f64 = 0.0;
    let mut eq1: f64 = 0.0;
    let mut comp: f64 = 0.0;
    for _ in 0..10 {
        let right = rng.gen_range(1..=6usize);
        let degree = rng.gen_range(1..=3usize);
        let left = (1..=6).find(|l| (l * degree) % right == 0).unwrap_or(right);
        let labels = rng.gen_range(1..=5usize);
        let (ug, z) = UGInstance::random_satisfiable(left, right, labels, degree, &mut rng)?;
        for (q, rho) in [(0.365, -0.365 / 0.635), (0.5, -0.5)] {
            let g = build_gadget(&ug, q, rho)?;
            let r = g.graph.invariants();
            inv = inv
                .max((r.total_vertex_weight - 1.0).abs())
                .max((r.total_edge_weight - 1.0).abs())
                .max(r.half_incidence_deviation);
            for _ in 0..100 {
                let s: Vec<bool> = (0..g.graph.vertex_count()).map(|_| rng.gen_bool(0.5)).collect();
                let lhs = g.graph.touching(&s);
                let rhs = g.graph.weight(&s) + 0.5 * g.graph.cut(&s);
                eq1 = eq1.max((lhs - rhs).abs());
            }
            let c = completeness_set(&ug, &z, &g)?;
            let t = g.nu.t;
            comp = comp
                .max((c.weight - q).abs())
                .max((c.cut_weight - 2.0 * t).abs())
                .max((c.touching_weight - (q + t)).abs());
        }
    }
    Ok(vec![
        Check::new("normalization_max_deviation", inv, 1e-12),
        Check::new("touching_identity_max_residual", eq1, 1e-12),
        Check::new("completeness_max_deviation", comp, 1e-12),
    ])
}

/// Three-row vector solution realizing `(μ₁, μ₂, ρ)`.
pub fn configuration_vectors(mu1: f64, mu2: f64, rho: f64) -> Vec<Vec<f64>> {
    let s1 = (1.0 - mu1 * mu1).sqrt();
    let s2 = (1.0 - mu2 * mu2).sqrt();
    let rb = ((rho - mu1 * mu2) / (s1 * s2)).clamp(-1.0, 1.0);
    vec![vec![1.0, 0.0, 0.0], vec![mu1, s1, 0.0], vec![mu2, s2 * rb, s2 * (1.0 - rb * rb).sqrt()]]
}

/// Uniform draw of a configuration satisfying the triangle inequalities
/// and positive semidefiniteness, with `|μ| ≤ 0.9` and `ρ ≤ 0.95`.
pub fn random_configuration<R: Rng>(rng: &mut R) -> (f64, f64, f64) {
    loop {
        let mu1: f64 = rng.gen_range(-0.9..0.9);
        let mu2: f64 = rng.gen_range(-0.9..0.9);
        let rho: f64 = rng.gen_range(-1.0..0.95);
        let s = ((1.0 - mu1 * mu1) * (1.0 - mu2 * mu2)).sqrt();
        if check_triangle(mu1, mu2, rho) == 0.0 && (rho - mu1 * mu2).abs() <= s {
            return (mu1, mu2, rho);
        }
    }
}

/// Monte Carlo agreement of the rounding with its closed forms.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundingStats {
    /// Largest `|mean − μ| / σ` over both marginals and all configurations.
    pub marginal_z: f64,
    /// Largest `|mean − E[ȳ₁ȳ₂]| / σ`.
    pub pair_z: f64,
    /// Smallest `(1 − E[ȳ₁ȳ₂]) / (1 − ρ)`.
    pub min_ratio: f64,
}

pub fn rounding_statistics(configs: usize, samples: usize, seed: u64) -> Result<RoundingStats> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = RoundingStats { marginal_z: 0.0, pair_z: 0.0, min_ratio: f64::INFINITY };
    for c in 0..configs {
        let (mu1, mu2, rho) = random_configuration(&mut rng);
        let sol = SDPSolution::from_vectors(configuration_vectors(mu1, mu2, rho))?;
        let (mut s1, mut s2, mut s12) = (0.0, 0.0, 0.0);
        let stream_seed = seed ^ (c as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        for t in 0..samples {
            let y = round_once(&sol, stream_seed, t as u64);
            s1 += f64::from(y[0]);
            s2 += f64::from(y[1]);
            s12 += f64::from(y[0] * y[1]);
        }
        let n = samples as f64;
        let e12 = expected_pair_product(mu1, mu2, rho);
        let z = |mean: f64, expect: f64| {
            let sd = ((1.0 - expect * expect).max(1e-300) / n).sqrt();
            (mean - expect).abs() / sd
        };
        stats.marginal_z = stats.marginal_z.max(z(s1 / n, mu1)).max(z(s2 / n, mu2));
        stats.pair_z = stats.pair_z.max(z(s12 / n, e12));
        stats.min_ratio = stats.min_ratio.min((1.0 - e12) / (1.0 - rho));
    }
    Ok(stats)
}

fn rounding_suite(seed: u64) -> Result<Vec<Check>> {
    let stats = rounding_statistics(20, 100_000, seed)?;
    let floor = curves::global_alpha_cut_minimum().value;
    Ok(vec![
        Check::new("marginal_max_sigmas", stats.marginal_z, 4.0),
        Check::new("pair_product_max_sigmas", stats.pair_z, 4.0),
        Check::new("alpha_floor_minus_min_ratio", floor - stats.min_ratio, 1e-6),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn configuration_vectors_realize_configuration() {
        let v = configuration_vectors(0.3, -0.2, -0.4);
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        assert!((dot(&v[0], &v[1]) - 0.3).abs() < 1e-15);
        assert!((dot(&v[0], &v[2]) + 0.2).abs() < 1e-15);
        assert!((dot(&v[1], &v[2]) + 0.4).abs() < 1e-15);
        for row in &v {
            assert!((dot(row, row) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn gamma_suite_passes() {
        assert!(run(Suite::Gamma, 0).unwrap().passed());
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.to_string().parse::<Suite>().unwrap(), s);
        }
    }
}
