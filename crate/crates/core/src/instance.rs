//! Cardinality-constrained Max-2-CSP instances: data model, text format and
//! the exact brute-force optimum.
//!
//! Sign convention: an [`Assignment`] stores `+1` for true and `-1` for
//! false, and the cardinality `k` counts true variables. Constraint
//! payloads keep the ±1 coefficients of the integer programs, which are
//! written for the opposite encoding (false = `+1`, matching the SDP's
//! `v₀`); [`constraint_value`] converts by negating both variables before
//! applying the formula. XOR constraints are unaffected by the flip.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

/// Largest instance the exhaustive optimum will enumerate.
pub const BRUTE_FORCE_MAX_VARS: usize = 28;

/// The four 2-clauses, named by which literal is negated (`n`) or
/// positive (`o`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrPattern {
    /// `x_i ∨ x_j`
    Oo,
    /// `¬x_i ∨ x_j`
    No,
    /// `x_i ∨ ¬x_j`
    On,
    /// `¬x_i ∨ ¬x_j`
    Nn,
}

impl OrPattern {
    /// Coefficients `(P¹, P², P³)` of `(3 + P¹x_i + P²x_j + P³x_ix_j)/4`
    /// in the false = `+1` encoding.
    pub fn coefficients(self) -> (f64, f64, f64) {
        match self {
            OrPattern::Oo => (-1.0, -1.0, -1.0),
            OrPattern::No => (1.0, -1.0, 1.0),
            OrPattern::On => (-1.0, 1.0, 1.0),
            OrPattern::Nn => (1.0, 1.0, -1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    /// `x_i x_j = parity`; parity `-1` is a cut edge.
    Xor {
        parity: i8,
    },
    Or(OrPattern),
}

impl ConstraintKind {
    pub const CUT: ConstraintKind = ConstraintKind::Xor { parity: -1 };
    pub const COVER: ConstraintKind = ConstraintKind::Or(OrPattern::Oo);

    pub fn tag(self) -> &'static str {
        match self {
            ConstraintKind::Xor { parity } if parity > 0 => "x+",
            ConstraintKind::Xor { .. } => "x-",
            ConstraintKind::Or(OrPattern::Oo) => "oo",
            ConstraintKind::Or(OrPattern::No) => "no",
            ConstraintKind::Or(OrPattern::On) => "on",
            ConstraintKind::Or(OrPattern::Nn) => "nn",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Some(match tag {
            "x+" => ConstraintKind::Xor { parity: 1 },
            "x-" => ConstraintKind::Xor { parity: -1 },
            "oo" => ConstraintKind::Or(OrPattern::Oo),
            "no" => ConstraintKind::Or(OrPattern::No),
            "on" => ConstraintKind::Or(OrPattern::On),
            "nn" => ConstraintKind::Or(OrPattern::Nn),
            _ => return None,
        })
    }
}

/// Value of one constraint under `x_i, x_j ∈ {−1, +1}` (true = `+1`).
/// Always 0 or 1.
pub fn constraint_value(kind: ConstraintKind, xi: i8, xj: i8) -> f64 {
    let (xi, xj) = (f64::from(xi), f64::from(xj));
    match kind {
        ConstraintKind::Xor { parity } => (1.0 + f64::from(parity) * xi * xj) / 2.0,
        ConstraintKind::Or(p) => {
            let (p1, p2, p3) = p.coefficients();
            // false = +1 encoding: substitute -x for x
            (3.0 - p1 * xi - p2 * xj + p3 * xi * xj) / 4.0
        }
    }
}

/// Which family an instance belongs to; restricts the allowed tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Cut,
    TwoLin,
    TwoSat,
    Kvc,
}

impl ProblemKind {
    fn allows(self, kind: ConstraintKind) -> bool {
        match self {
            ProblemKind::Cut => kind == ConstraintKind::CUT,
            ProblemKind::TwoLin => matches!(kind, ConstraintKind::Xor { .. }),
            ProblemKind::Kvc => kind == ConstraintKind::COVER,
            ProblemKind::TwoSat => matches!(kind, ConstraintKind::Or(_)),
        }
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cut" => Ok(ProblemKind::Cut),
            "2lin" => Ok(ProblemKind::TwoLin),
            "2sat" => Ok(ProblemKind::TwoSat),
            "kvc" => Ok(ProblemKind::Kvc),
            other => Err(Error::Invalid(format!("unknown problem `{other}`"))),
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::Cut => "cut",
            ProblemKind::TwoLin => "2lin",
            ProblemKind::TwoSat => "2sat",
            ProblemKind::Kvc => "kvc",
        })
    }
}

/// A weighted binary constraint on 0-based variables `i`, `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constraint {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
    pub kind: ConstraintKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CCInstance {
    problem: ProblemKind,
    n: usize,
    k: usize,
    constraints: Vec<Constraint>,
}

impl CCInstance {
    pub fn new(problem: ProblemKind, n: usize, k: usize, constraints: Vec<Constraint>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("instance needs at least one variable".into()));
        }
        if k > n {
            return Err(Error::Invalid(format!("cardinality {k} exceeds {n} variables")));
        }
        for c in &constraints {
            if c.i >= n || c.j >= n {
                return Err(Error::Invalid(format!(
                    "constraint ({}, {}) references a variable outside 1..={n}",
                    c.i + 1,
                    c.j + 1
                )));
            }
            if !(c.weight >= 0.0 && c.weight.is_finite()) {
                return Err(Error::domain("weight", c.weight, "[0, ∞)"));
            }
            if !problem.allows(c.kind) {
                return Err(Error::Invalid(format!("tag `{}` not allowed in a {problem} instance", c.kind.tag())));
            }
        }
        Ok(CCInstance { problem, n, k, constraints })
    }

    pub fn problem(&self) -> ProblemKind {
        self.problem
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of variables that must be true.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn q(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn balance(&self) -> f64 {
        1.0 - 2.0 * self.q()
    }

    pub fn total_weight(&self) -> f64 {
        self.constraints.iter().map(|c| c.weight).sum()
    }

    pub fn with_cardinality(&self, k: usize) -> Result<Self> {
        CCInstance::new(self.problem, self.n, k, self.constraints.clone())
    }

    /// Constraint indices touching each variable (a loop is listed once).
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.n];
        for (idx, c) in self.constraints.iter().enumerate() {
            inc[c.i].push(idx);
            if c.j != c.i {
                inc[c.j].push(idx);
            }
        }
        inc
    }

    /// Serialize to the line-oriented `ccmax v1` format.
    pub fn to_text(&self) -> String {
        let mut out = format!("ccmax v1\nproblem {}\nvars {}\ncard {}\n", self.problem, self.n, self.k);
        for c in &self.constraints {
            out.push_str(&format!("c {} {} {} {}\n", c.i + 1, c.j + 1, c.weight, c.kind.tag()));
        }
        out
    }

    /// Parse the `ccmax v1` format. `#` starts a comment anywhere on a line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let mut header = |key: &str| -> Result<(usize, String)> {
            let (ln, line) = lines.next().ok_or_else(|| Error::parse(0, format!("missing `{key}` header line")))?;
            let mut parts = line.split_whitespace();
            if parts.next() != Some(key) {
                return Err(Error::parse(ln, format!("expected `{key} ...`, found `{line}`")));
            }
            let value = parts.next().ok_or_else(|| Error::parse(ln, format!("`{key}` needs a value")))?;
            if parts.next().is_some() {
                return Err(Error::parse(ln, format!("trailing tokens after `{key}`")));
            }
            Ok((ln, value.to_string()))
        };

        let (ln, magic) = header("ccmax")?;
        if magic != "v1" {
            return Err(Error::parse(ln, format!("unsupported version `{magic}`")));
        }
        let (ln, problem) = header("problem")?;
        let problem: ProblemKind = problem.parse().map_err(|e: Error| Error::parse(ln, e.to_string()))?;
        let (ln, n) = header("vars")?;
        let n: usize = n.parse().map_err(|_| Error::parse(ln, format!("bad variable count `{n}`")))?;
        let (ln, k) = header("card")?;
        let k: usize = k.parse().map_err(|_| Error::parse(ln, format!("bad cardinality `{k}`")))?;

        let mut constraints = Vec::new();
        for (ln, line) in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 5 || toks[0] != "c" {
                return Err(Error::parse(ln, format!("expected `c <i> <j> <w> <tag>`, found `{line}`")));
            }
            let index = |s: &str| -> Result<usize> {
                let v: usize = s.parse().map_err(|_| Error::parse(ln, format!("bad index `{s}`")))?;
                if v == 0 || v > n {
                    return Err(Error::parse(ln, format!("index {v} outside 1..={n}")));
                }
                Ok(v - 1)
            };
            let i = index(toks[1])?;
            let j = index(toks[2])?;
            let weight: f64 = toks[3].parse().map_err(|_| Error::parse(ln, format!("bad weight `{}`", toks[3])))?;
            if !(weight >= 0.0 && weight.is_finite()) {
                return Err(Error::parse(ln, format!("weight {weight} must be finite and nonnegative")));
            }
            let kind = ConstraintKind::from_tag(toks[4])
                .ok_or_else(|| Error::parse(ln, format!("unknown tag `{}`", toks[4])))?;
            if !problem.allows(kind) {
                return Err(Error::parse(ln, format!("tag `{}` not allowed in a {problem} instance", toks[4])));
            }
            constraints.push(Constraint { i, j, weight, kind });
        }
        let inst = CCInstance::new(problem, n, k, constraints).map_err(|e| Error::parse(0, e.to_string()))?;
        if !(inst.total_weight() > 0.0) {
            return Err(Error::parse(0, "total constraint weight must be positive"));
        }
        Ok(inst)
    }
}

/// A ±1 vector, `+1` = true.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(Vec<i8>);

impl Assignment {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if let Some(v) = values.iter().find(|&&v| v != 1 && v != -1) {
            return Err(Error::Invalid(format!("assignment entry {v} is not ±1")));
        }
        Ok(Assignment(values))
    }

    /// Variables listed in `true_set` are `+1`, the rest `-1`.
    pub fn from_true_set(n: usize, true_set: impl IntoIterator<Item = usize>) -> Self {
        let mut v = vec![-1; n];
        for i in true_set {
            v[i] = 1;
        }
        Assignment(v)
    }

    pub(crate) fn from_mask(n: usize, mask: u64) -> Self {
        Assignment((0..n).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect())
    }

    pub fn values(&self) -> &[i8] {
        &self.0
    }

    pub(crate) fn values_mut(&mut self) -> &mut [i8] {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count_true(&self) -> usize {
        self.0.iter().filter(|&&v| v == 1).count()
    }

    pub fn is_feasible(&self, inst: &CCInstance) -> bool {
        self.len() == inst.n() && self.count_true() == inst.k()
    }

    /// Compact `+`/`-` rendering.
    pub fn to_sign_string(&self) -> String {
        self.0.iter().map(|&v| if v == 1 { '+' } else { '-' }).collect()
    }

    pub fn parse_sign_string(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                other => Err(Error::Invalid(format!("unexpected `{other}` in assignment"))),
            })
            .collect::<Result<Vec<i8>>>()
            .map(Assignment)
    }
}

/// `Σ weight · constraint_value`; does not check the cardinality.
pub fn evaluate(inst: &CCInstance, a: &Assignment) -> Result<f64> {
    if a.len() != inst.n() {
        return Err(Error::Invalid(format!("assignment has {} entries, instance has {} variables", a.len(), inst.n())));
    }
    Ok(evaluate_unchecked(inst, a.values()))
}

pub(crate) fn evaluate_unchecked(inst: &CCInstance, x: &[i8]) -> f64 {
    inst.constraints.iter().map(|c| c.weight * constraint_value(c.kind, x[c.i], x[c.j])).sum()
}

/// Exact optimum over all assignments with exactly `k` true variables.
/// Ties (within `1e-9` of the total weight) go to the lexicographically
/// smallest assignment, with `-1 < +1`.
pub fn brute_force_opt(inst: &CCInstance) -> Result<(Assignment, f64)> {
    let n = inst.n();
    if n > BRUTE_FORCE_MAX_VARS {
        return Err(Error::Guard(format!(
            "brute force enumerates C(n, k) assignments; n = {n} exceeds the limit of {BRUTE_FORCE_MAX_VARS}"
        )));
    }
    let k = inst.k();
    let inc = inst.incidence();
    let tie = 1e-9 * inst.total_weight().max(1.0);

    // Lexicographic order on ±1 vectors is numeric order on the bit-reversed
    // mask (variable 0 is the most significant position).
    let lex_key = |mask: u64| mask.reverse_bits() >> (64 - n.max(1));

    let mut x = vec![-1i8; n];
    let mut mask: u64 = if k == 0 { 0 } else { (1u64 << k) - 1 };
    for xi in x.iter_mut().take(k) {
        *xi = 1;
    }
    let mut value = evaluate_unchecked(inst, &x);
    let mut best = (value, mask);
    let limit = 1u64 << n;

    loop {
        if k == 0 || k == n {
            break;
        }
        // Gosper's hack: next mask with the same popcount.
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        if r >= limit {
            break;
        }
        let next = (((r ^ mask) >> 2) / c) | r;
        let mut changed = next ^ mask;
        while changed != 0 {
            let i = changed.trailing_zeros() as usize;
            changed &= changed - 1;
            value += flip_delta(inst, &inc[i], &x, i);
            x[i] = -x[i];
        }
        mask = next;
        if value > best.0 + tie || ((value - best.0).abs() <= tie && lex_key(mask) < lex_key(best.1)) {
            best = (value, mask);
        }
    }
    let a = Assignment::from_mask(n, best.1);
    let v = evaluate_unchecked(inst, a.values());
    Ok((a, v))
}

/// Random instance with `m` constraints on distinct variable pairs, tags
/// drawn uniformly from those the problem allows and weights uniform in
/// `[0.1, 1)`.
pub fn random_instance<R: Rng>(problem: ProblemKind, n: usize, k: usize, m: usize, rng: &mut R) -> Result<CCInstance> {
    if n < 2 {
        return Err(Error::Invalid("random instances need at least two variables".into()));
    }
    let tags: &[ConstraintKind] = match problem {
        ProblemKind::Cut => &[ConstraintKind::CUT],
        ProblemKind::TwoLin => &[ConstraintKind::CUT, ConstraintKind::Xor { parity: 1 }],
        ProblemKind::Kvc => &[ConstraintKind::COVER],
        ProblemKind::TwoSat => &[
            ConstraintKind::Or(OrPattern::Oo),
            ConstraintKind::Or(OrPattern::No),
            ConstraintKind::Or(OrPattern::On),
            ConstraintKind::Or(OrPattern::Nn),
        ],
    };
    let constraints = (0..m)
        .map(|_| {
            let i = rng.gen_range(0..n);
            let j = (i + rng.gen_range(1..n)) % n;
            Constraint { i, j, weight: rng.gen_range(0.1..1.0), kind: tags[rng.gen_range(0..tags.len())] }
        })
        .collect();
    CCInstance::new(problem, n, k, constraints)
}

/// Change in objective when variable `i` flips, given its incident
/// constraints.
pub(crate) fn flip_delta(inst: &CCInstance, incident: &[usize], x: &[i8], i: usize) -> f64 {
    let flip = |v: usize| if v == i { -x[v] } else { x[v] };
    incident
        .iter()
        .map(|&ci| {
            let c = &inst.constraints[ci];
            c.weight * (constraint_value(c.kind, flip(c.i), flip(c.j)) - constraint_value(c.kind, x[c.i], x[c.j]))
        })
        .sum()
}
