//! One-dimensional minimization: dense scan followed by golden-section
//! refinement of the best bracket.

/// Location and value of a minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a minimum of `f` on `[a, b]`, stopping once the
/// bracket is narrower than `tol`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> Minimum {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        Minimum { x: c, value: fc }
    } else {
        Minimum { x: d, value: fd }
    }
}

/// Evaluate `f` at `points` equispaced abscissae on `[lo, hi]` (both ends
/// included), then refine the bracket around the best sample by golden
/// section. The result is never worse than the best sample.
pub fn scan_then_golden<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, points: usize, tol: f64) -> Minimum {
    let points = points.max(3);
    let step = (hi - lo) / (points - 1) as f64;
    let xs: Vec<f64> = (0..points).map(|i| if i + 1 == points { hi } else { lo + step * i as f64 }).collect();
    let (best_i, best_v) =
        xs.iter()
            .map(|&x| f(x))
            .enumerate()
            .fold((0, f64::INFINITY), |(bi, bv), (i, v)| if v < bv { (i, v) } else { (bi, bv) });
    let a = xs[best_i.saturating_sub(1)];
    let b = xs[(best_i + 1).min(points - 1)];
    let refined = golden_section(&f, a, b, tol);
    if refined.value < best_v {
        refined
    } else {
        Minimum { x: xs[best_i], value: best_v }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_vertex() {
        let m = golden_section(|x| (x - 0.3).powi(2) + 2.0, -1.0, 1.0, 1e-10);
        assert!((m.x - 0.3).abs() < 1e-7);
        assert!((m.value - 2.0).abs() < 1e-15);
    }

    #[test]
    fn scan_picks_global_basin() {
        // Two basins; the deeper one sits at x = 0.8.
        let f = |x: f64| ((x - 0.2) * (x - 0.8)).powi(2) - 0.1 * x;
        let m = scan_then_golden(f, 0.0, 1.0, 64, 1e-10);
        assert!(m.x > 0.7);
    }

    #[test]
    fn scan_handles_minimum_at_endpoint() {
        let m = scan_then_golden(|x| x, -0.8, 0.0, 17, 1e-9);
        assert_eq!(m.x, -0.8);
        assert_eq!(m.value, -0.8);
    }
}
