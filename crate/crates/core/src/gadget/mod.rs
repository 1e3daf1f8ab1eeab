//! Dictatorship-test gadget built from a Unique Games instance, and tools
//! to probe its density.
//!
//! Gadget vertices are pairs `(v, x)` with `v` a right UG vertex and
//! `x ∈ {0,1}^L`, stored at index `v · 2^L + x` (bit `i` of `x` is `x_i`).
//! For every left vertex `u` and pair of its edges `(u,v₁,π₁)`, `(u,v₂,π₂)`
//! the gadget joins `(v₁, x)` and `(v₂, y)` with weight
//! `ν^{⊗L}(x∘π₁, y∘π₂) / (|U| D²)`, where `(x∘π)_i = x_{π(i)}`.

pub mod graph;
pub mod ug;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::{CCInstance, Constraint, ConstraintKind, ProblemKind};
pub use graph::{Edge, InvariantReport, WeightedGraph};
pub use ug::{Labeling, UGInstance, UgEdge};

/// Largest label count the gadget builder accepts.
pub const MAX_LABELS: usize = 14;
/// Largest number of edge entries the gadget builder will materialize.
pub const MAX_EDGE_ENTRIES: u64 = 1 << 24;
/// Largest vertex count for exhaustive density enumeration.
pub const MAX_EXACT_VERTICES: usize = 24;

/// Joint law of two `ρ`-correlated `q`-biased bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuDistribution {
    pub q: f64,
    pub rho: f64,
    pub t: f64,
    pub p00: f64,
    pub p01: f64,
    pub p10: f64,
    pub p11: f64,
}

impl NuDistribution {
    /// Probability of `(a, b)`.
    pub fn p(&self, a: bool, b: bool) -> f64 {
        match (a, b) {
            (false, false) => self.p00,
            (false, true) => self.p01,
            (true, false) => self.p10,
            (true, true) => self.p11,
        }
    }
}

/// Rejects parameters that would make a table entry negative.
pub fn nu(q: f64, rho: f64) -> Result<NuDistribution> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain("q", q, "(0, 1)"));
    }
    if !(-1.0..=1.0).contains(&rho) {
        return Err(Error::domain("rho", rho, "[-1, 1]"));
    }
    let t = (q - q * q) * (1.0 - rho);
    let snap = |x: f64| if x.abs() < 1e-15 { 0.0 } else { x };
    let p00 = snap(1.0 - q - t);
    let p11 = snap(q - t);
    if p00 < 0.0 || p11 < 0.0 {
        let lo = -(q / (1.0 - q)).min((1.0 - q) / q);
        return Err(Error::domain("rho", rho, format!("[{lo}, 1] for q = {q}")));
    }
    Ok(NuDistribution { q, rho, t, p00, p01: t, p10: t, p11 })
}

/// A gadget graph with its construction parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gadget {
    pub graph: WeightedGraph,
    pub labels: usize,
    pub right: usize,
    pub nu: NuDistribution,
}

impl Gadget {
    pub fn vertex_index(&self, v: usize, x: u32) -> usize {
        (v << self.labels) | x as usize
    }

    /// `(v, x)` for a vertex index.
    pub fn vertex_label(&self, idx: usize) -> (usize, u32) {
        (idx >> self.labels, (idx & ((1 << self.labels) - 1)) as u32)
    }
}

fn cube_weight(q: f64, x: u32, labels: usize) -> f64 {
    let ones = x.count_ones() as i32;
    q.powi(ones) * (1.0 - q).powi(labels as i32 - ones)
}

/// Map `a = x∘π` back to `x`: `x_{π(i)} = a_i`.
fn unpermute(a: u32, perm: &[usize]) -> u32 {
    perm.iter().enumerate().filter(|&(i, _)| a >> i & 1 == 1).fold(0, |x, (_, &p)| x | 1 << p)
}

pub fn build_gadget(ug: &UGInstance, q: f64, rho: f64) -> Result<Gadget> {
    let nu = nu(q, rho)?;
    let l = ug.labels();
    let d = ug.degree();
    let nonzero = [nu.p00, nu.p01, nu.p10, nu.p11].iter().filter(|&&p| p > 0.0).count() as u64;
    let pairs = (ug.left() * d * (d + 1) / 2) as u64;
    let estimate = (nonzero as f64).powi(l as i32) * pairs as f64;
    if l > MAX_LABELS || estimate > MAX_EDGE_ENTRIES as f64 {
        return Err(Error::Guard(format!(
            "gadget with L = {l} would have {} vertices and about {estimate:.3e} edge entries \
             (limits: L ≤ {MAX_LABELS}, {MAX_EDGE_ENTRIES} entries)",
            ug.right() as f64 * 2f64.powi(l as i32)
        )));
    }
    if !ug.is_right_regular() {
        return Err(Error::Invalid("gadget weights are normalized only for right-regular UG instances".into()));
    }

    // ν^{⊗L} support: (a, b, probability)
    let mut tensor: Vec<(u32, u32, f64)> = vec![(0, 0, 1.0)];
    for i in 0..l {
        let mut next = Vec::with_capacity(tensor.len() * 4);
        for &(a, b, p) in &tensor {
            for (ai, bi) in [(false, false), (false, true), (true, false), (true, true)] {
                let pi = nu.p(ai, bi);
                if pi > 0.0 {
                    next.push((a | (ai as u32) << i, b | (bi as u32) << i, p * pi));
                }
            }
        }
        tensor = next;
    }

    let size = 1usize << l;
    let vertex_weights: Vec<f64> =
        (0..ug.right()).flat_map(|_| (0..size as u32).map(|x| cube_weight(q, x, l) / ug.right() as f64)).collect();

    let base = 1.0 / (ug.left() as f64 * (d * d) as f64);
    let mut edges = Vec::new();
    for inc in ug.left_incidence() {
        for (s, &e1) in inc.iter().enumerate() {
            for &e2 in &inc[s..] {
                let (ea, eb) = (&ug.edges()[e1], &ug.edges()[e2]);
                let mult = if e1 == e2 { 1.0 } else { 2.0 };
                let xa: Vec<u32> = (0..size as u32).map(|a| unpermute(a, &ea.perm)).collect();
                let xb: Vec<u32> = (0..size as u32).map(|b| unpermute(b, &eb.perm)).collect();
                for &(a, b, p) in &tensor {
                    edges.push(Edge {
                        a: (ea.v << l) | xa[a as usize] as usize,
                        b: (eb.v << l) | xb[b as usize] as usize,
                        weight: p * base * mult,
                    });
                }
            }
        }
    }
    Ok(Gadget { graph: WeightedGraph::new(vertex_weights, edges)?, labels: l, right: ug.right(), nu })
}

/// The set `{(v, x) : x_{z(v)} = 1}` and its weights.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletenessReport {
    pub set: Vec<bool>,
    pub weight: f64,
    pub cut_weight: f64,
    pub inside_weight: f64,
    pub touching_weight: f64,
    /// Fraction of UG edges the labeling satisfies.
    pub ug_value: f64,
}

impl CompletenessReport {
    /// `2t(1 − γ)²` where `γ` is the violated fraction.
    pub fn cut_lower_bound(&self, nu: &NuDistribution) -> f64 {
        2.0 * nu.t * self.ug_value * self.ug_value
    }
}

pub fn completeness_set(ug: &UGInstance, z: &Labeling, gadget: &Gadget) -> Result<CompletenessReport> {
    if z.right.len() != ug.right() || z.left.len() != ug.left() {
        return Err(Error::Invalid("labeling size does not match the UG instance".into()));
    }
    if z.right.iter().chain(&z.left).any(|&lab| lab >= ug.labels()) {
        return Err(Error::Invalid(format!("labels must lie in 1..={}", ug.labels())));
    }
    if gadget.right != ug.right() || gadget.labels != ug.labels() {
        return Err(Error::Invalid("gadget was not built from this UG instance".into()));
    }
    let g = &gadget.graph;
    let set: Vec<bool> = (0..g.vertex_count())
        .map(|idx| {
            let (v, x) = gadget.vertex_label(idx);
            x >> z.right[v] & 1 == 1
        })
        .collect();
    Ok(CompletenessReport {
        weight: g.weight(&set),
        cut_weight: g.cut(&set),
        inside_weight: g.inside(&set),
        touching_weight: g.touching(&set),
        ug_value: ug.value(&z.left, &z.right)?,
        set,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityMode {
    Exact,
    LocalSearch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensitySample {
    pub r: f64,
    /// Smallest `w(S, S)` found among sets with `|w(S) − r| ≤ tol`; `None`
    /// if no such set was found.
    pub min_inside: Option<f64>,
    pub witness: Option<Vec<bool>>,
    pub method: DensityMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile {
    pub samples: Vec<DensitySample>,
    pub weight_tolerance: f64,
}

/// Minimum internal weight at each target weight. Exact mode enumerates
/// every subset; local-search mode only gives an upper bound on the
/// minimum.
pub fn density_profile(
    g: &WeightedGraph,
    r_grid: &[f64],
    mode: DensityMode,
    weight_tolerance: f64,
    seed: u64,
) -> Result<DensityProfile> {
    if !(weight_tolerance >= 0.0) {
        return Err(Error::domain("weight tolerance", weight_tolerance, "[0, ∞)"));
    }
    let samples = match mode {
        DensityMode::Exact => exact_density(g, r_grid, weight_tolerance)?,
        DensityMode::LocalSearch => r_grid.iter().map(|&r| search_density(g, r, weight_tolerance, seed)).collect(),
    };
    Ok(DensityProfile { samples, weight_tolerance })
}

fn exact_density(g: &WeightedGraph, r_grid: &[f64], tol: f64) -> Result<Vec<DensitySample>> {
    let n = g.vertex_count();
    if n > MAX_EXACT_VERTICES {
        return Err(Error::Guard(format!(
            "exact density enumerates 2^{n} subsets; limit is {MAX_EXACT_VERTICES} vertices"
        )));
    }
    let m = g.dense_weights();
    let w = g.vertex_weights();
    let mut best: Vec<(f64, u64)> = vec![(f64::INFINITY, 0); r_grid.len()];
    let mut mask: u64 = 0;
    let (mut ws, mut inside) = (0.0, 0.0);
    let total = 1u64 << n;
    for step in 0..total {
        if step > 0 {
            let v = step.trailing_zeros() as usize;
            let adding = mask >> v & 1 == 0;
            let links: f64 = (0..n).filter(|&u| u != v && mask >> u & 1 == 1).map(|u| m[u][v]).sum();
            if adding {
                ws += w[v];
                inside += links + m[v][v];
            } else {
                ws -= w[v];
                inside -= links + m[v][v];
            }
            mask ^= 1 << v;
        }
        for (slot, &r) in best.iter_mut().zip(r_grid) {
            if (ws - r).abs() <= tol && inside < slot.0 {
                *slot = (inside, mask);
            }
        }
    }
    Ok(best
        .into_iter()
        .zip(r_grid)
        .map(|((val, mask), &r)| {
            let found = val.is_finite();
            let witness: Option<Vec<bool>> = found.then(|| (0..n).map(|i| mask >> i & 1 == 1).collect());
            DensitySample {
                r,
                // recompute from scratch to shed incremental rounding
                min_inside: witness.as_ref().map(|s| g.inside(s)),
                witness,
                method: DensityMode::Exact,
            }
        })
        .collect())
}

const SEARCH_RESTARTS: u64 = 16;

fn search_density(g: &WeightedGraph, r: f64, tol: f64, seed: u64) -> DensitySample {
    let n = g.vertex_count();
    let w = g.vertex_weights();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut loops = vec![0.0; n];
    for e in g.edges() {
        if e.a == e.b {
            loops[e.a] += e.weight;
        } else {
            adj[e.a].push((e.b, e.weight));
            adj[e.b].push((e.a, e.weight));
        }
    }
    let mut best: Option<(f64, Vec<bool>)> = None;
    for restart in 0..SEARCH_RESTARTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(restart);
        let mut order: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
        let mut s = vec![false; n];
        let mut ws = 0.0;
        for &v in &order {
            if ws >= r - tol {
                break;
            }
            if ws + w[v] <= r + tol {
                s[v] = true;
                ws += w[v];
            }
        }
        if (ws - r).abs() > tol {
            continue;
        }
        // conn[v] = weight of non-loop edges from v into S
        let mut conn = vec![0.0; n];
        for v in (0..n).filter(|&v| s[v]) {
            for &(u, x) in &adj[v] {
                conn[u] += x;
            }
        }
        loop {
            let mut mv: Option<(usize, usize, f64)> = None;
            for out in (0..n).filter(|&v| s[v]) {
                for inn in (0..n).filter(|&v| !s[v]) {
                    if (ws - w[out] + w[inn] - r).abs() > tol {
                        continue;
                    }
                    let between: f64 = adj[out].iter().filter(|&&(u, _)| u == inn).map(|&(_, x)| x).sum();
                    let delta = (conn[inn] - between + loops[inn]) - (conn[out] + loops[out]);
                    if delta < -1e-15 && mv.is_none_or(|(_, _, d)| delta < d) {
                        mv = Some((out, inn, delta));
                    }
                }
            }
            let Some((out, inn, _)) = mv else { break };
            s[out] = false;
            s[inn] = true;
            ws += w[inn] - w[out];
            for &(u, x) in &adj[out] {
                conn[u] -= x;
            }
            for &(u, x) in &adj[inn] {
                conn[u] += x;
            }
        }
        let val = g.inside(&s);
        if best.as_ref().is_none_or(|(b, _)| val < *b) {
            best = Some((val, s));
        }
    }
    DensitySample {
        r,
        min_inside: best.as_ref().map(|b| b.0),
        witness: best.map(|b| b.1),
        method: DensityMode::LocalSearch,
    }
}

/// Internal weights of random sets near a target weight.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomSetSummary {
    pub accepted: usize,
    pub mean_inside: f64,
    pub min_inside: f64,
}

/// Include each vertex independently with probability `r`, keep draws whose
/// weight is within `tol` of `r`, and summarize `w(S, S)` over them.
pub fn random_set_density(g: &WeightedGraph, r: f64, tol: f64, draws: usize, seed: u64) -> RandomSetSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut min = f64::INFINITY;
    let mut accepted = 0;
    for _ in 0..draws {
        let s: Vec<bool> = (0..g.vertex_count()).map(|_| rng.gen_bool(r)).collect();
        if (g.weight(&s) - r).abs() <= tol {
            let inside = g.inside(&s);
            sum += inside;
            min = min.min(inside);
            accepted += 1;
        }
    }
    RandomSetSummary {
        accepted,
        mean_inside: if accepted > 0 { sum / accepted as f64 } else { f64::NAN },
        min_inside: min,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphProblem {
    Cut,
    Kvc,
}

/// Turn graph edges into cut or vertex-cover constraints; vertex weights
/// are dropped and `k` fixes how many vertices are chosen.
pub fn derive_cc_instance(g: &WeightedGraph, problem: GraphProblem, k: usize) -> Result<CCInstance> {
    let (kind, pk) = match problem {
        GraphProblem::Cut => (ConstraintKind::CUT, ProblemKind::Cut),
        GraphProblem::Kvc => (ConstraintKind::COVER, ProblemKind::Kvc),
    };
    let cs = g.edges().iter().map(|e| Constraint { i: e.a, j: e.b, weight: e.weight, kind }).collect();
    CCInstance::new(pk, g.vertex_count(), k, cs)
}
