//! Bipartite Unique Games instances.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// Edge `(u, v)` with a label permutation. A labeling `z` satisfies it when
/// `perm[z(u)] == z(v)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UgEdge {
    pub u: usize,
    pub v: usize,
    pub perm: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UGInstance {
    left: usize,
    right: usize,
    labels: usize,
    degree: usize,
    edges: Vec<UgEdge>,
}

impl UGInstance {
    /// Validates bijectivity of every permutation and left-regularity.
    pub fn new(left: usize, right: usize, labels: usize, degree: usize, edges: Vec<UgEdge>) -> Result<Self> {
        if left == 0 || right == 0 || labels == 0 || degree == 0 {
            return Err(Error::Invalid("left, right, labels and degree must all be positive".into()));
        }
        let mut deg = vec![0usize; left];
        for (idx, e) in edges.iter().enumerate() {
            if e.u >= left || e.v >= right {
                return Err(Error::Invalid(format!("edge {} endpoint out of range", idx + 1)));
            }
            if e.perm.len() != labels {
                return Err(Error::Invalid(format!(
                    "edge {} permutation has length {}, expected {labels}",
                    idx + 1,
                    e.perm.len()
                )));
            }
            let mut seen = vec![false; labels];
            for &p in &e.perm {
                if p >= labels || seen[p] {
                    return Err(Error::Invalid(format!("edge {} permutation is not a bijection on [L]", idx + 1)));
                }
                seen[p] = true;
            }
            deg[e.u] += 1;
        }
        if let Some(u) = deg.iter().position(|&d| d != degree) {
            return Err(Error::Invalid(format!("left vertex {} has degree {}, expected {degree}", u + 1, deg[u])));
        }
        Ok(UGInstance { left, right, labels, degree, edges })
    }

    pub fn left(&self) -> usize {
        self.left
    }

    pub fn right(&self) -> usize {
        self.right
    }

    pub fn labels(&self) -> usize {
        self.labels
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn edges(&self) -> &[UgEdge] {
        &self.edges
    }

    /// Edge indices at each left vertex, in file order.
    pub fn left_incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.left];
        for (i, e) in self.edges.iter().enumerate() {
            inc[e.u].push(i);
        }
        inc
    }

    pub fn right_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.right];
        for e in &self.edges {
            deg[e.v] += 1;
        }
        deg
    }

    pub fn is_right_regular(&self) -> bool {
        let d = self.right_degrees();
        d.iter().all(|&x| x == d[0])
    }

    /// Fraction of edges satisfied by a labeling of both sides.
    pub fn value(&self, left_labels: &[usize], right_labels: &[usize]) -> Result<f64> {
        if left_labels.len() != self.left || right_labels.len() != self.right {
            return Err(Error::Invalid("labeling size does not match the instance".into()));
        }
        let sat = self.edges.iter().filter(|e| e.perm.get(left_labels[e.u]) == Some(&right_labels[e.v])).count();
        Ok(sat as f64 / self.edges.len() as f64)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "ug v1\nleft {}\nright {}\nlabels {}\ndegree {}\n",
            self.left, self.right, self.labels, self.degree
        );
        for e in &self.edges {
            out.push_str(&format!("e {} {}", e.u + 1, e.v + 1));
            for p in &e.perm {
                out.push_str(&format!(" {}", p + 1));
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let mut header = |key: &str| -> Result<(usize, String)> {
            let (ln, line) = lines.next().ok_or_else(|| Error::parse(0, format!("missing `{key}` header line")))?;
            match line.split_whitespace().collect::<Vec<_>>()[..] {
                [k, v] if k == key => Ok((ln, v.to_string())),
                _ => Err(Error::parse(ln, format!("expected `{key} <value>`, found `{line}`"))),
            }
        };
        let (ln, magic) = header("ug")?;
        if magic != "v1" {
            return Err(Error::parse(ln, format!("unsupported version `{magic}`")));
        }
        let mut count = |key: &str| -> Result<usize> {
            let (ln, v) = header(key)?;
            v.parse().map_err(|_| Error::parse(ln, format!("bad {key} `{v}`")))
        };
        let left = count("left")?;
        let right = count("right")?;
        let labels = count("labels")?;
        let degree = count("degree")?;
        let mut edges = Vec::new();
        for (ln, line) in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.first() != Some(&"e") || toks.len() != 3 + labels {
                return Err(Error::parse(ln, format!("expected `e <u> <v>` and {labels} permutation entries")));
            }
            let nums = toks[1..]
                .iter()
                .map(|t| match t.parse::<usize>() {
                    Ok(x) if x >= 1 => Ok(x - 1),
                    _ => Err(Error::parse(ln, format!("bad index `{t}`"))),
                })
                .collect::<Result<Vec<usize>>>()?;
            edges.push(UgEdge { u: nums[0], v: nums[1], perm: nums[2..].to_vec() });
        }
        UGInstance::new(left, right, labels, degree, edges).map_err(|e| Error::parse(0, e.to_string()))
    }

    /// Random biregular instance with a planted labeling satisfying every
    /// edge. Requires `left · degree` divisible by `right`.
    pub fn random_satisfiable<R: Rng>(
        left: usize,
        right: usize,
        labels: usize,
        degree: usize,
        rng: &mut R,
    ) -> Result<(Self, Labeling)> {
        if right == 0 || !(left * degree).is_multiple_of(right) {
            return Err(Error::Invalid(format!(
                "{left} left vertices of degree {degree} cannot be spread evenly over {right} right vertices"
            )));
        }
        let per_right = left * degree / right;
        let mut stubs: Vec<usize> = (0..right).flat_map(|v| std::iter::repeat_n(v, per_right)).collect();
        stubs.shuffle(rng);
        let z = Labeling {
            left: (0..left).map(|_| rng.gen_range(0..labels)).collect(),
            right: (0..right).map(|_| rng.gen_range(0..labels)).collect(),
        };
        let mut edges = Vec::with_capacity(left * degree);
        for (slot, &v) in stubs.iter().enumerate() {
            let u = slot / degree;
            let mut perm: Vec<usize> = (0..labels).collect();
            perm.shuffle(rng);
            let pos = perm.iter().position(|&p| p == z.right[v]).expect("permutation");
            perm.swap(pos, z.left[u]);
            edges.push(UgEdge { u, v, perm });
        }
        Ok((UGInstance::new(left, right, labels, degree, edges)?, z))
    }
}

/// Labels for both sides of a UG instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labeling {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

impl Labeling {
    /// Text form: `left` line then `right` line, 1-based labels.
    pub fn to_text(&self) -> String {
        let join = |v: &[usize]| v.iter().map(|x| (x + 1).to_string()).collect::<Vec<_>>().join(" ");
        format!("left {}\nright {}\n", join(&self.left), join(&self.right))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut left = None;
        let mut right = None;
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut toks = line.split_whitespace();
            let key = toks.next().unwrap_or("");
            let vals = toks
                .map(|t| match t.parse::<usize>() {
                    Ok(x) if x >= 1 => Ok(x - 1),
                    _ => Err(Error::parse(i + 1, format!("bad label `{t}`"))),
                })
                .collect::<Result<Vec<usize>>>()?;
            match key {
                "left" => left = Some(vals),
                "right" => right = Some(vals),
                other => return Err(Error::parse(i + 1, format!("unexpected key `{other}`"))),
            }
        }
        Ok(Labeling {
            left: left.ok_or_else(|| Error::parse(0, "missing `left` line"))?,
            right: right.ok_or_else(|| Error::parse(0, "missing `right` line"))?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn planted_labeling_satisfies_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (ug, z) = UGInstance::random_satisfiable(4, 2, 5, 3, &mut rng).unwrap();
        assert!(ug.is_right_regular());
        assert_eq!(ug.value(&z.left, &z.right).unwrap(), 1.0);
        assert_eq!(UGInstance::parse(&ug.to_text()).unwrap(), ug);
        assert_eq!(Labeling::parse(&z.to_text()).unwrap(), z);
    }

    #[test]
    fn rejects_non_bijection_and_irregular() {
        let e = |u, v, perm: Vec<usize>| UgEdge { u, v, perm };
        assert!(UGInstance::new(1, 1, 2, 1, vec![e(0, 0, vec![0, 0])]).is_err());
        assert!(UGInstance::new(2, 1, 2, 1, vec![e(0, 0, vec![0, 1])]).is_err());
        assert!(UGInstance::random_satisfiable(3, 2, 2, 1, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }
}
