//! Vertex- and edge-weighted multigraphs.
//!
//! `w(S)` sums vertex weights. For vertex sets `S`, `T`, `w(S, T)` sums the
//! weights of edges with one endpoint in `S` and the other in `T`, each edge
//! counted once; in particular `w(S, Sᶜ)` is the cut and `w(S, V)` the
//! weight of edges touching `S`. A loop counts twice toward its vertex's
//! incident weight.

use crate::error::{Error, Result};

/// Compensated summation; gadget totals add up hundreds of thousands of
/// small terms.
pub(crate) fn stable_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in xs {
        let t = sum + x;
        comp += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    sum + comp + 0.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    vertex_weights: Vec<f64>,
    edges: Vec<Edge>,
}

/// Deviations from the normalization invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantReport {
    pub total_vertex_weight: f64,
    pub total_edge_weight: f64,
    /// `max_v |w(v) − ½ · incident(v)|`.
    pub half_incidence_deviation: f64,
}

impl InvariantReport {
    pub fn holds(&self, tol: f64) -> bool {
        (self.total_vertex_weight - 1.0).abs() <= tol
            && (self.total_edge_weight - 1.0).abs() <= tol
            && self.half_incidence_deviation <= tol
    }
}

impl WeightedGraph {
    pub fn new(vertex_weights: Vec<f64>, edges: Vec<Edge>) -> Result<Self> {
        if let Some(w) = vertex_weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::domain("vertex weight", *w, "[0, ∞)"));
        }
        for e in &edges {
            if e.a >= vertex_weights.len() || e.b >= vertex_weights.len() {
                return Err(Error::Invalid(format!("edge ({}, {}) references a missing vertex", e.a + 1, e.b + 1)));
            }
            if !(e.weight >= 0.0 && e.weight.is_finite()) {
                return Err(Error::domain("edge weight", e.weight, "[0, ∞)"));
            }
        }
        Ok(WeightedGraph { vertex_weights, edges })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_weights.len()
    }

    pub fn vertex_weights(&self) -> &[f64] {
        &self.vertex_weights
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Total incident edge weight per vertex, loops counted twice.
    pub fn incident_weights(&self) -> Vec<f64> {
        let mut parts: Vec<Vec<f64>> = vec![Vec::new(); self.vertex_count()];
        for e in &self.edges {
            parts[e.a].push(e.weight);
            parts[e.b].push(e.weight);
        }
        parts.into_iter().map(stable_sum).collect()
    }

    pub fn invariants(&self) -> InvariantReport {
        let inc = self.incident_weights();
        InvariantReport {
            total_vertex_weight: stable_sum(self.vertex_weights.iter().copied()),
            total_edge_weight: stable_sum(self.edges.iter().map(|e| e.weight)),
            half_incidence_deviation: self
                .vertex_weights
                .iter()
                .zip(&inc)
                .map(|(w, i)| (w - 0.5 * i).abs())
                .fold(0.0, f64::max),
        }
    }

    /// `w(S)` for a membership mask.
    pub fn weight(&self, s: &[bool]) -> f64 {
        stable_sum(self.vertex_weights.iter().zip(s).filter(|(_, &m)| m).map(|(w, _)| *w))
    }

    /// `w(S, T)`; both arguments are membership masks.
    pub fn between(&self, s: &[bool], t: &[bool]) -> f64 {
        stable_sum(self.edges.iter().filter(|e| (s[e.a] && t[e.b]) || (s[e.b] && t[e.a])).map(|e| e.weight))
    }

    /// `w(S, S)`: edges with both endpoints in `S`.
    pub fn inside(&self, s: &[bool]) -> f64 {
        self.between(s, s)
    }

    /// `w(S, Sᶜ)`.
    pub fn cut(&self, s: &[bool]) -> f64 {
        let comp: Vec<bool> = s.iter().map(|m| !m).collect();
        self.between(s, &comp)
    }

    /// `w(S, V)`: edges touching `S`.
    pub fn touching(&self, s: &[bool]) -> f64 {
        self.between(s, &vec![true; self.vertex_count()])
    }

    /// Symmetric matrix of summed edge weights; loops sit on the diagonal.
    pub fn dense_weights(&self) -> Vec<Vec<f64>> {
        let n = self.vertex_count();
        let mut m = vec![vec![0.0; n]; n];
        for e in &self.edges {
            m[e.a][e.b] += e.weight;
            if e.a != e.b {
                m[e.b][e.a] += e.weight;
            }
        }
        m
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("graph v1\n");
        for (i, w) in self.vertex_weights.iter().enumerate() {
            out.push_str(&format!("vertex {} {}\n", i + 1, w));
        }
        for e in &self.edges {
            out.push_str(&format!("edge {} {} {}\n", e.a + 1, e.b + 1, e.weight));
        }
        out
    }

    /// Parse the `graph v1` format. Vertex ids must be listed as 1, 2, ...
    pub fn parse(text: &str) -> Result<Self> {
        let mut seen_magic = false;
        let mut weights = Vec::new();
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if !seen_magic {
                if toks != ["graph", "v1"] {
                    return Err(Error::parse(ln, "expected `graph v1` header"));
                }
                seen_magic = true;
                continue;
            }
            let num = |t: &str| -> Result<f64> {
                t.parse::<f64>().map_err(|_| Error::parse(ln, format!("bad number `{t}`")))
            };
            let id = |t: &str| -> Result<usize> {
                match t.parse::<usize>() {
                    Ok(x) if x >= 1 => Ok(x - 1),
                    _ => Err(Error::parse(ln, format!("bad vertex id `{t}`"))),
                }
            };
            match toks[..] {
                ["vertex", v, w] => {
                    if id(v)? != weights.len() {
                        return Err(Error::parse(ln, "vertex ids must be consecutive from 1"));
                    }
                    weights.push(num(w)?);
                }
                ["edge", a, b, w] => edges.push(Edge { a: id(a)?, b: id(b)?, weight: num(w)? }),
                _ => return Err(Error::parse(ln, format!("unrecognized line `{line}`"))),
            }
        }
        if !seen_magic {
            return Err(Error::parse(0, "empty graph file"));
        }
        WeightedGraph::new(weights, edges).map_err(|e| Error::parse(0, e.to_string()))
    }
}
