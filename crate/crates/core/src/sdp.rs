//! Vector relaxation of a cardinality-constrained Max-2-CSP and a
//! low-rank solver for it.
//!
//! Row 0 of the vector matrix is `v₀`; row `i + 1` belongs to variable `i`.
//! The relaxation uses the false = `+1` encoding, so an integral assignment
//! `a` (true = `+1`) embeds as `v_{i+1} = -a_i · v₀`, `μ_i = ⟨v₀, v_{i+1}⟩`
//! and the balance row reads `Σ μ_i = n − 2k`.
//!
//! The solver runs Riemannian gradient descent on the product of unit
//! spheres inside an augmented Lagrangian loop covering the balance
//! equality and the triangle inequalities
//! `s₁μ_i + s₂μ_j + s₁s₂ρ_ij ≥ −1` on every constrained pair.

use std::collections::{BTreeMap, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instance::{CCInstance, ConstraintKind};
use crate::rounding::std_normal_sample;

const SIGNS: [(f64, f64); 4] = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
const INITIAL_PENALTY: f64 = 10.0;
const MAX_PENALTY: f64 = 1e8;
const INNER_ITERS: usize = 500;
const LBFGS_MEMORY: usize = 10;
const GRAD_TOL: f64 = 1e-9;
const REL_OBJ_TOL: f64 = 1e-9;

/// Largest violation among the four triangle inequalities of a pair;
/// zero when all hold.
pub fn check_triangle(mu_i: f64, mu_j: f64, rho_ij: f64) -> f64 {
    let min_lhs = SIGNS.iter().map(|&(s1, s2)| s1 * mu_i + s2 * mu_j + s1 * s2 * rho_ij).fold(f64::INFINITY, f64::min);
    (-1.0 - min_lhs).max(0.0)
}

/// `coeff · ⟨v_a, v_b⟩` with `a < b` as row indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub a: usize,
    pub b: usize,
    pub coeff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SDPProblem {
    n: usize,
    dim: usize,
    offset: f64,
    terms: Vec<Term>,
    balance_target: Option<f64>,
    triangle_pairs: Vec<(usize, usize)>,
}

impl SDPProblem {
    /// Number of variables (rows minus one).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Columns of the low-rank factor.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Required value of `Σ μ_i`, or `None` for an unconstrained relaxation.
    pub fn balance_target(&self) -> Option<f64> {
        self.balance_target
    }

    pub fn set_balance_target(&mut self, target: Option<f64>) {
        self.balance_target = target;
    }

    /// Variable pairs `(i, j)`, `i < j`, carrying triangle inequalities.
    pub fn triangle_pairs(&self) -> &[(usize, usize)] {
        &self.triangle_pairs
    }

    pub fn set_dim(&mut self, dim: usize) -> Result<()> {
        if dim == 0 {
            return Err(Error::Invalid("relaxation dimension must be positive".into()));
        }
        self.dim = dim;
        Ok(())
    }

    /// Relaxed objective of a vector configuration.
    pub fn objective_of(&self, vectors: &[Vec<f64>]) -> f64 {
        self.offset + self.terms.iter().map(|t| t.coeff * dot(&vectors[t.a], &vectors[t.b])).sum::<f64>()
    }

    /// Constraint residuals of a vector configuration.
    pub fn residuals_of(&self, vectors: &[Vec<f64>]) -> Residuals {
        let mu = |i: usize| dot(&vectors[0], &vectors[i + 1]);
        let balance = match self.balance_target {
            Some(b) => ((0..self.n).map(mu).sum::<f64>() - b).abs(),
            None => 0.0,
        };
        let triangle = self
            .triangle_pairs
            .iter()
            .map(|&(i, j)| check_triangle(mu(i), mu(j), dot(&vectors[i + 1], &vectors[j + 1])))
            .fold(0.0, f64::max);
        let unit_norm = vectors.iter().map(|v| (dot(v, v).sqrt() - 1.0).abs()).fold(0.0, f64::max);
        Residuals { balance, triangle, unit_norm }
    }
}

/// Build the relaxation of an instance.
pub fn relax(inst: &CCInstance) -> SDPProblem {
    let n = inst.n();
    let mut offset = 0.0;
    let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut add = |a: usize, b: usize, c: f64, offset: &mut f64| {
        if a == b {
            *offset += c;
        } else {
            *acc.entry((a.min(b), a.max(b))).or_insert(0.0) += c;
        }
    };
    let mut pairs = Vec::new();
    for c in inst.constraints() {
        let (ri, rj) = (c.i + 1, c.j + 1);
        let w = c.weight;
        match c.kind {
            ConstraintKind::Xor { parity } => {
                offset += w / 2.0;
                add(ri, rj, w * f64::from(parity) / 2.0, &mut offset);
            }
            ConstraintKind::Or(p) => {
                let (p1, p2, p3) = p.coefficients();
                offset += 3.0 * w / 4.0;
                add(0, ri, w * p1 / 4.0, &mut offset);
                add(0, rj, w * p2 / 4.0, &mut offset);
                add(ri, rj, w * p3 / 4.0, &mut offset);
            }
        }
        if c.i != c.j {
            pairs.push((c.i.min(c.j), c.i.max(c.j)));
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    let terms = acc.into_iter().filter(|&(_, c)| c != 0.0).map(|((a, b), coeff)| Term { a, b, coeff }).collect();
    let m = inst.constraints().len();
    let dim = (n + 1).min(((2.0 * m as f64).sqrt().ceil() as usize) + 2);
    SDPProblem { n, dim, offset, terms, balance_target: Some(n as f64 - 2.0 * inst.k() as f64), triangle_pairs: pairs }
}

/// The vector configuration for an integral assignment (true = `+1`).
pub fn integral_signs(a: &crate::instance::Assignment) -> Vec<f64> {
    a.values().iter().map(|&x| -f64::from(x)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    /// `|Σ μ_i − target|`.
    pub balance: f64,
    /// Largest triangle violation.
    pub triangle: f64,
    /// Largest `| ‖v‖ − 1 |`.
    pub unit_norm: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.balance.max(self.triangle).max(self.unit_norm)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub restarts: usize,
    /// Cap on gradient steps per restart.
    pub max_iters: usize,
    /// Feasibility tolerance on every residual.
    pub tol: f64,
    pub seed: u64,
    /// `μ` signs of a known integral point; restart 0 starts there.
    pub integral_seed: Option<Vec<f64>>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { restarts: 4, max_iters: 50_000, tol: 1e-6, seed: 0, integral_seed: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SDPSolution {
    /// Row 0 is `v₀`.
    pub vectors: Vec<Vec<f64>>,
    pub objective_value: f64,
    pub residuals: Residuals,
    pub converged: bool,
    /// Restart that produced the solution.
    pub restart: usize,
    pub iterations: usize,
}

impl SDPSolution {
    /// Wrap externally built vectors (row 0 is `v₀`). Only the unit-norm
    /// residual is meaningful; the objective is left as NaN.
    pub fn from_vectors(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let dim = vectors.first().map_or(0, Vec::len);
        if vectors.len() < 2 || dim == 0 || vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::Invalid("need v₀ plus at least one vector, all of equal positive length".into()));
        }
        let unit_norm = vectors.iter().map(|v| (dot(v, v).sqrt() - 1.0).abs()).fold(0.0, f64::max);
        Ok(SDPSolution {
            vectors,
            objective_value: f64::NAN,
            residuals: Residuals { balance: 0.0, triangle: 0.0, unit_norm },
            converged: true,
            restart: 0,
            iterations: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.vectors.len() - 1
    }

    /// `⟨v₀, v_{i+1}⟩`, clamped to `[-1, 1]`.
    pub fn mu(&self, i: usize) -> f64 {
        dot(&self.vectors[0], &self.vectors[i + 1]).clamp(-1.0, 1.0)
    }

    pub fn mus(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.mu(i)).collect()
    }

    /// `⟨v_{i+1}, v_{j+1}⟩`, clamped to `[-1, 1]`.
    pub fn rho(&self, i: usize, j: usize) -> f64 {
        dot(&self.vectors[i + 1], &self.vectors[j + 1]).clamp(-1.0, 1.0)
    }

    /// Full `(n+1) × (n+1)` Gram matrix.
    pub fn gram(&self) -> Vec<Vec<f64>> {
        let v = &self.vectors;
        (0..v.len()).map(|a| (0..v.len()).map(|b| dot(&v[a], &v[b])).collect()).collect()
    }

    /// Gram matrix as CSV, 17 significant digits.
    pub fn gram_csv(&self) -> String {
        let mut out = String::new();
        for row in self.gram() {
            let line: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solve the relaxation with independent restarts run in parallel. The
/// best feasible restart wins; ties go to the lower restart index.
pub fn solve(p: &SDPProblem, opts: &SolveOptions) -> Result<SDPSolution> {
    if opts.restarts == 0 {
        return Err(Error::Invalid("at least one restart is required".into()));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::domain("tol", opts.tol, "(0, ∞)"));
    }
    if let Some(s) = &opts.integral_seed {
        if s.len() != p.n {
            return Err(Error::Invalid(format!("integral seed has {} entries, expected {}", s.len(), p.n)));
        }
    }
    let runs: Vec<SDPSolution> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let seed = if r == 0 { opts.integral_seed.as_deref() } else { None };
            Restart::new(p, opts, r, seed).run()
        })
        .collect();
    let feasible = |s: &SDPSolution| s.residuals.max() <= opts.tol;
    let best = runs
        .iter()
        .filter(|s| feasible(s))
        .fold(None::<&SDPSolution>, |acc, s| match acc {
            Some(b) if b.objective_value >= s.objective_value => Some(b),
            _ => Some(s),
        })
        .or_else(|| {
            runs.iter().fold(None::<&SDPSolution>, |acc, s| match acc {
                Some(b) if b.residuals.max() <= s.residuals.max() => Some(b),
                _ => Some(s),
            })
        })
        .expect("at least one restart");
    Ok(best.clone())
}

struct Restart<'a> {
    p: &'a SDPProblem,
    opts: &'a SolveOptions,
    index: usize,
    rows: usize,
    dim: usize,
    v: Vec<f64>,
    scale: f64,
    lambda: f64,
    lambda_t: Vec<f64>,
    sigma: f64,
}

struct Eval {
    obj: f64,
    h: f64,
    g: Vec<f64>,
}

impl<'a> Restart<'a> {
    fn new(p: &'a SDPProblem, opts: &'a SolveOptions, index: usize, integral: Option<&[f64]>) -> Self {
        let rows = p.n + 1;
        let dim = p.dim;
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(index as u64);
        let mut v: Vec<f64> = (0..rows * dim).map(|_| std_normal_sample(&mut rng)).collect();
        if let Some(signs) = integral {
            // integral point plus a small perturbation to leave the vertex
            for r in 0..rows {
                let s = if r == 0 { 1.0 } else { signs[r - 1] };
                for c in 0..dim {
                    let noise = 1e-2 * v[r * dim + c];
                    v[r * dim + c] = if c == 0 { s } else { noise };
                }
            }
        }
        for r in 0..rows {
            normalize(&mut v[r * dim..(r + 1) * dim]);
        }
        let scale = p.terms.iter().map(|t| t.coeff.abs()).sum::<f64>().max(1e-300);
        Restart {
            p,
            opts,
            index,
            rows,
            dim,
            v,
            scale,
            lambda: 0.0,
            lambda_t: vec![0.0; 4 * p.triangle_pairs.len()],
            sigma: INITIAL_PENALTY,
        }
    }

    fn row(&self, r: usize) -> std::ops::Range<usize> {
        r * self.dim..(r + 1) * self.dim
    }

    fn ip(&self, v: &[f64], a: usize, b: usize) -> f64 {
        dot(&v[self.row(a)], &v[self.row(b)])
    }

    fn eval(&self, v: &[f64]) -> Eval {
        let p = self.p;
        let obj = p.terms.iter().map(|t| t.coeff * self.ip(v, t.a, t.b)).sum::<f64>() / self.scale;
        let h = match p.balance_target {
            Some(b) => (1..self.rows).map(|r| self.ip(v, 0, r)).sum::<f64>() - b,
            None => 0.0,
        };
        let mut g = Vec::with_capacity(4 * p.triangle_pairs.len());
        for &(i, j) in &p.triangle_pairs {
            let (mi, mj, r) = (self.ip(v, 0, i + 1), self.ip(v, 0, j + 1), self.ip(v, i + 1, j + 1));
            for &(s1, s2) in &SIGNS {
                g.push(s1 * mi + s2 * mj + s1 * s2 * r + 1.0);
            }
        }
        Eval { obj, h, g }
    }

    fn lagrangian(&self, e: &Eval) -> f64 {
        let s = self.sigma;
        let mut l = -e.obj + self.lambda * e.h + 0.5 * s * e.h * e.h;
        for (gt, &lt) in e.g.iter().zip(&self.lambda_t) {
            let m = (lt - s * gt).max(0.0);
            l += (m * m - lt * lt) / (2.0 * s);
        }
        l
    }

    /// Riemannian gradient of the Lagrangian and its squared norm.
    fn gradient(&self, v: &[f64], e: &Eval) -> (Vec<f64>, f64) {
        let p = self.p;
        let d = self.dim;
        let mut grad = vec![0.0; v.len()];
        let add = |grad: &mut Vec<f64>, a: usize, b: usize, c: f64| {
            for k in 0..d {
                grad[a * d + k] += c * v[b * d + k];
                grad[b * d + k] += c * v[a * d + k];
            }
        };
        for t in &p.terms {
            add(&mut grad, t.a, t.b, -t.coeff / self.scale);
        }
        if p.balance_target.is_some() {
            let ch = self.lambda + self.sigma * e.h;
            for r in 1..self.rows {
                add(&mut grad, 0, r, ch);
            }
        }
        for (idx, &(i, j)) in p.triangle_pairs.iter().enumerate() {
            for (s, &(s1, s2)) in SIGNS.iter().enumerate() {
                let t = 4 * idx + s;
                let ct = -(self.lambda_t[t] - self.sigma * e.g[t]).max(0.0);
                if ct != 0.0 {
                    add(&mut grad, 0, i + 1, ct * s1);
                    add(&mut grad, 0, j + 1, ct * s2);
                    add(&mut grad, i + 1, j + 1, ct * s1 * s2);
                }
            }
        }
        let mut norm2 = 0.0;
        for r in 0..self.rows {
            let rr = r * d..(r + 1) * d;
            let radial = dot(&grad[rr.clone()], &v[rr.clone()]);
            for k in rr {
                grad[k] -= radial * v[k];
                norm2 += grad[k] * grad[k];
            }
        }
        (grad, norm2)
    }

    fn residual(&self, e: &Eval) -> f64 {
        let tri = e.g.iter().map(|&g| (-g).max(0.0)).fold(0.0, f64::max);
        e.h.abs().max(tri)
    }

    fn snapshot(&self, v: &[f64], iterations: usize, converged: bool) -> SDPSolution {
        let vectors: Vec<Vec<f64>> = (0..self.rows).map(|r| v[self.row(r)].to_vec()).collect();
        SDPSolution {
            objective_value: self.p.objective_of(&vectors),
            residuals: self.p.residuals_of(&vectors),
            vectors,
            converged,
            restart: self.index,
            iterations,
        }
    }

    /// Riemannian L-BFGS on the Lagrangian with fixed multipliers. Returns
    /// true once the gradient norm drops below `gtol`.
    fn descend(&self, v: &mut Vec<f64>, e: &mut Eval, iters: &mut usize, gtol: f64) -> bool {
        let mut l0 = self.lagrangian(e);
        let (mut grad, mut g2) = self.gradient(v, e);
        let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(LBFGS_MEMORY);
        let mut trial = vec![0.0; v.len()];
        for _ in 0..INNER_ITERS {
            if g2.sqrt() <= gtol {
                return true;
            }
            if *iters >= self.opts.max_iters {
                return false;
            }
            *iters += 1;

            let mut dir = self.lbfgs_direction(&grad, &memory);
            self.project(v, &mut dir);
            let mut slope = dot(&dir, &grad);
            if !(slope < 0.0) {
                memory.clear();
                dir = grad.iter().map(|g| -g).collect();
                slope = -g2;
            }
            let mut t = if memory.is_empty() { 1.0 / g2.sqrt().max(1.0) } else { 1.0 };
            let mut accepted = None;
            for _ in 0..60 {
                for k in 0..v.len() {
                    trial[k] = v[k] + t * dir[k];
                }
                for r in 0..self.rows {
                    normalize(&mut trial[r * self.dim..(r + 1) * self.dim]);
                }
                let te = self.eval(&trial);
                let lt = self.lagrangian(&te);
                if lt <= l0 + 1e-4 * t * slope {
                    accepted = Some((te, lt));
                    break;
                }
                t *= 0.5;
            }
            let Some((te, lt)) = accepted else {
                return true;
            };
            let (new_grad, new_g2) = self.gradient(&trial, &te);
            let sv: Vec<f64> = trial.iter().zip(v.iter()).map(|(a, b)| a - b).collect();
            let yv: Vec<f64> = new_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
            let sy = dot(&sv, &yv);
            if sy > 1e-12 * dot(&sv, &sv).sqrt() * dot(&yv, &yv).sqrt() && sy > 0.0 {
                if memory.len() == LBFGS_MEMORY {
                    memory.pop_front();
                }
                memory.push_back((sv, yv, sy));
            }
            std::mem::swap(v, &mut trial);
            *e = te;
            l0 = lt;
            grad = new_grad;
            g2 = new_g2;
        }
        g2.sqrt() <= gtol
    }

    fn lbfgs_direction(&self, grad: &[f64], memory: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
        let mut q: Vec<f64> = grad.to_vec();
        let mut alphas = Vec::with_capacity(memory.len());
        for (s, y, sy) in memory.iter().rev() {
            let a = dot(s, &q) / sy;
            for k in 0..q.len() {
                q[k] -= a * y[k];
            }
            alphas.push(a);
        }
        if let Some((_, y, sy)) = memory.back() {
            let gamma = sy / dot(y, y);
            q.iter_mut().for_each(|x| *x *= gamma);
        }
        for ((s, y, sy), a) in memory.iter().zip(alphas.into_iter().rev()) {
            let b = dot(y, &q) / sy;
            for k in 0..q.len() {
                q[k] += (a - b) * s[k];
            }
        }
        q.iter_mut().for_each(|x| *x = -*x);
        q
    }

    /// Project each row of `d` onto the tangent space at the matching row
    /// of `v`.
    fn project(&self, v: &[f64], d: &mut [f64]) {
        for r in 0..self.rows {
            let rr = self.row(r);
            let radial = dot(&d[rr.clone()], &v[rr.clone()]);
            for k in rr {
                d[k] -= radial * v[k];
            }
        }
    }

    fn run(mut self) -> SDPSolution {
        let tol = self.opts.tol;
        let mut best: Option<SDPSolution> = None;
        let consider = |cand: SDPSolution, best: &mut Option<SDPSolution>| {
            if cand.residuals.max() > tol {
                return;
            }
            match best {
                Some(b) if b.objective_value >= cand.objective_value => {}
                _ => *best = Some(cand),
            }
        };
        if let Some(signs) = self.opts.integral_seed.as_deref().filter(|_| self.index == 0) {
            let mut exact = vec![0.0; self.rows * self.dim];
            exact[0] = 1.0;
            for (r, &s) in signs.iter().enumerate() {
                exact[(r + 1) * self.dim] = s;
            }
            consider(self.snapshot(&exact, 0, false), &mut best);
        }

        let mut iters = 0;
        let mut prev_obj = f64::NAN;
        let mut prev_res = f64::INFINITY;
        let mut converged = false;
        let mut v = std::mem::take(&mut self.v);
        let mut e = self.eval(&v);
        let mut least_infeasible = (f64::INFINITY, v.clone());
        let mut grad_tol = 1e-2;

        while iters < self.opts.max_iters {
            let grad_small = self.descend(&mut v, &mut e, &mut iters, grad_tol);
            grad_tol = (grad_tol * 0.1).max(GRAD_TOL);

            let res = self.residual(&e);
            if res < least_infeasible.0 {
                least_infeasible = (res, v.clone());
            }
            let snap = self.snapshot(&v, iters, false);
            let feasible = snap.residuals.max() <= tol;
            let obj = snap.objective_value;
            consider(snap, &mut best);

            let stable = (obj - prev_obj).abs() <= REL_OBJ_TOL * obj.abs().max(1.0);
            if feasible && (stable || (grad_small && grad_tol <= GRAD_TOL)) {
                converged = true;
                break;
            }
            prev_obj = obj;

            self.lambda += self.sigma * e.h;
            for (lt, &g) in self.lambda_t.iter_mut().zip(&e.g) {
                *lt = (*lt - self.sigma * g).max(0.0);
            }
            if res > tol && res > 0.25 * prev_res {
                self.sigma = (self.sigma * 10.0).min(MAX_PENALTY);
            }
            prev_res = res;
            e = self.eval(&v);
        }

        match best {
            Some(mut b) => {
                b.converged = converged;
                b.iterations = iters;
                b
            }
            None => self.snapshot(&least_infeasible.1, iters, false),
        }
    }
}

fn normalize(row: &mut [f64]) {
    let norm = dot(row, row).sqrt();
    if norm > 0.0 {
        for x in row.iter_mut() {
            *x /= norm;
        }
    } else {
        row[0] = 1.0;
    }
}
