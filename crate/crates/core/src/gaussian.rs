//! Standard normal functions and the bivariate orthant probability
//! `Γ_ρ(x, y) = Pr[X ≤ Φ⁻¹(x) ∧ Y ≤ Φ⁻¹(y)]` for standard normals with
//! correlation ρ.
//!
//! `Γ_ρ` is evaluated through the correlation integral
//!
//! ```text
//! Γ_ρ(x, y) = x·y + ∫₀^ρ φ₂(h, k; r) dr,      h = Φ⁻¹(x), k = Φ⁻¹(y)
//! ```
//!
//! after the substitution `r = sin θ`, which removes the `1/√(1−r²)`
//! factor and leaves a bounded, smooth integrand on `[0, asin ρ]`. The
//! integral is computed with adaptive composite Gauss–Legendre panels.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::OnceLock;

use crate::error::{Error, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Prob(f64);

impl Prob {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Prob(value))
        } else {
            Err(Error::domain("probability", value, "[0, 1]"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A correlation coefficient in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Correlation(f64);

impl Correlation {
    pub fn new(value: f64) -> Result<Self> {
        if (-1.0..=1.0).contains(&value) {
            Ok(Correlation(value))
        } else {
            Err(Error::domain("rho", value, "[-1, 1]"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

fn check_finite(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(name, x, "the finite reals"))
    }
}

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> Result<f64> {
    check_finite("x", x)?;
    Ok(pdf(x))
}

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> Result<Prob> {
    check_finite("x", x)?;
    Ok(Prob(cdf(x)))
}

/// Standard normal quantile function, defined on the open interval `(0, 1)`.
pub fn std_normal_inv(p: Prob) -> Result<f64> {
    let p = p.value();
    if p <= 0.0 {
        return Err(Error::domain("p", p, "(0, 1): Φ⁻¹(0) = -∞"));
    }
    if p >= 1.0 {
        return Err(Error::domain("p", p, "(0, 1): Φ⁻¹(1) = +∞"));
    }
    Ok(inv(p))
}

#[inline]
pub(crate) fn pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

#[inline]
pub(crate) fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Quantile for `p ∈ (0, 1)`. Antisymmetric by construction: the upper
/// half is computed as `-inv(1 - p)`, and `1 - p` is exact there.
pub(crate) fn inv(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    if p > 0.5 {
        return -inv_lower(1.0 - p);
    }
    inv_lower(p)
}

fn inv_lower(p: f64) -> f64 {
    if p == 0.5 {
        return 0.0;
    }
    let mut x = acklam(p);
    // Halley steps on Φ(x) - p. In the lower half Φ is evaluated with full
    // relative accuracy, so the residual stays meaningful deep in the tail.
    for _ in 0..2 {
        let e = cdf(x) - p;
        let u = e / pdf(x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}

/// Acklam's rational approximation (relative error ~1.15e-9), used as seed.
fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_671_010_336_226,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] =
        [7.784_695_709_041_462e-3, 3.224_671_290_700_398e-1, 2.445_134_137_142_996, 3.754_408_661_907_416];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// `Γ_ρ(x, y)`, the probability that two ρ-correlated standard normals fall
/// below their `x`- and `y`-quantiles.
pub fn gamma_rho(rho: Correlation, x: Prob, y: Prob) -> Prob {
    Prob(gamma(rho.value(), x.value(), y.value()))
}

/// `Γ_ρ(x) = Γ_ρ(x, x)`.
pub fn gamma_rho_diag(rho: Correlation, x: Prob) -> Prob {
    gamma_rho(rho, x, x)
}

/// Checked variant of [`gamma_rho`] on raw floats.
pub fn gamma_checked(rho: f64, x: f64, y: f64) -> Result<f64> {
    let rho = Correlation::new(rho)?;
    let x = Prob::new(x).map_err(|_| Error::domain("x", x, "[0, 1]"))?;
    let y = Prob::new(y).map_err(|_| Error::domain("y", y, "[0, 1]"))?;
    Ok(gamma_rho(rho, x, y).value())
}

/// Unchecked `Γ_ρ(x, y)`; callers guarantee `ρ ∈ [-1, 1]`, `x, y ∈ [0, 1]`.
pub(crate) fn gamma(rho: f64, x: f64, y: f64) -> f64 {
    let lower = (x + y - 1.0).max(0.0);
    let upper = x.min(y);
    if x <= 0.0 || y <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return y;
    }
    if y >= 1.0 {
        return x;
    }
    if rho == 0.0 {
        return x * y;
    }
    if rho >= 1.0 {
        return upper;
    }
    if rho <= -1.0 {
        return lower;
    }
    let h = inv(x);
    let k = inv(y);
    let value = x * y + correlation_integral(h, k, rho);
    value.clamp(lower, upper)
}

/// `∫₀^{asin ρ} exp(-(h² + k² - 2hk sin θ) / (2 cos² θ)) dθ / (2π)`.
fn correlation_integral(h: f64, k: f64, rho: f64) -> f64 {
    // Symmetric in (h, k) as evaluated, so Γ_ρ(x, y) == Γ_ρ(y, x) bitwise.
    let sq = h * h + k * k;
    let hk = h * k;
    let integrand = |theta: f64| {
        let (s, c) = theta.sin_cos();
        let c2 = c * c;
        if c2 <= 0.0 {
            return 0.0;
        }
        (-(sq - 2.0 * hk * s) / (2.0 * c2)).exp()
    };
    let end = rho.asin();
    adaptive_gauss_legendre(&integrand, 0.0, end) / (2.0 * PI)
}

const PANEL_NODES: usize = 32;
const ADAPT_TOL: f64 = 1e-15;
const ADAPT_DEPTH: u32 = 14;

struct Rule {
    nodes: [f64; PANEL_NODES],
    weights: [f64; PANEL_NODES],
}

fn rule() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| {
        let (nodes, weights) = gauss_legendre(PANEL_NODES);
        let mut rule = Rule { nodes: [0.0; PANEL_NODES], weights: [0.0; PANEL_NODES] };
        rule.nodes.copy_from_slice(&nodes);
        rule.weights.copy_from_slice(&weights);
        rule
    })
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on
/// `P_n`, started from the Chebyshev-like guess `cos(π(i - 1/4)/(n + 1/2))`.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let r = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    r.nodes.iter().zip(r.weights.iter()).map(|(&t, &w)| w * f(mid + half * t)).sum::<f64>() * half
}

fn adaptive_gauss_legendre<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    fn refine<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let left = panel(f, a, m);
        let right = panel(f, m, b);
        let both = left + right;
        if depth == 0 || (both - whole).abs() <= ADAPT_TOL {
            return both;
        }
        refine(f, a, m, left, depth - 1) + refine(f, m, b, right, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    refine(f, a, b, panel(f, a, b), ADAPT_DEPTH)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(rho: f64, x: f64, y: f64) -> f64 {
        gamma_checked(rho, x, y).unwrap()
    }

    #[test]
    fn pdf_values() {
        assert_eq!(std_normal_pdf(0.0).unwrap(), 0.398_942_280_401_432_7);
        for x in [0.5, 1.0, 2.3] {
            assert_eq!(std_normal_pdf(x).unwrap(), std_normal_pdf(-x).unwrap());
        }
        assert!(std_normal_pdf(f64::NAN).is_err());
    }

    #[test]
    fn cdf_values() {
        assert_eq!(std_normal_cdf(0.0).unwrap().value(), 0.5);
        assert!(std_normal_cdf(-8.0).unwrap().value() < 1e-14);
        assert!(std_normal_cdf(f64::INFINITY).is_err());
        for i in -60..=60 {
            let x = i as f64 * 0.1;
            let s = cdf(x) + cdf(-x);
            assert!((s - 1.0).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn inv_rejects_endpoints() {
        let lo = std_normal_inv(Prob::new(0.0).unwrap()).unwrap_err();
        assert!(lo.to_string().contains("-∞"));
        let hi = std_normal_inv(Prob::new(1.0).unwrap()).unwrap_err();
        assert!(hi.to_string().contains("+∞"));
        assert_eq!(std_normal_inv(Prob::new(0.5).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn inv_is_antisymmetric() {
        for p in [1e-12, 0.001, 0.02, 0.3, 0.49] {
            let upper = 1.0 - p;
            assert_eq!(inv(upper), -inv(1.0 - upper));
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(32);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // ∫ t^62 over [-1, 1] = 2/63, exact for a 32-point rule.
        let m: f64 = x.iter().zip(&w).map(|(t, w)| w * t.powi(62)).sum();
        assert!((m - 2.0 / 63.0).abs() < 1e-14);
    }

    #[test]
    fn gamma_closed_forms() {
        assert!((g(0.0, 0.3, 0.7) - 0.21).abs() < 1e-15);
        assert!((g(-1.0, 0.6, 0.7) - 0.3).abs() < 1e-15);
        assert_eq!(g(1.0, 0.6, 0.7), 0.6);
        for rho in [-1.0, -0.4, 0.0, 0.7, 1.0] {
            assert_eq!(g(rho, 0.35, 1.0), 0.35);
            assert_eq!(g(rho, 0.0, 0.35), 0.0);
        }
        // Sheppard: Γ_ρ(1/2, 1/2) = 1/4 + asin(ρ)/(2π).
        for rho in [-0.95, -0.5, 0.2, 0.9, 0.999] {
            let exact = 0.25 + f64::asin(rho) / (2.0 * PI);
            assert!((g(rho, 0.5, 0.5) - exact).abs() < 1e-14, "rho={rho}");
        }
    }

    #[test]
    fn gamma_rejects_out_of_range() {
        assert!(gamma_checked(1.1, 0.5, 0.5).is_err());
        assert!(gamma_checked(0.1, -0.1, 0.5).is_err());
        assert!(gamma_checked(0.1, 0.5, 1.5).is_err());
    }

    #[test]
    fn gamma_is_argument_symmetric() {
        for rho in [-0.9, -0.3, 0.4, 0.95] {
            for (x, y) in [(0.1, 0.8), (0.37, 0.52), (0.01, 0.99)] {
                assert_eq!(g(rho, x, y), g(rho, y, x));
            }
        }
    }
}
