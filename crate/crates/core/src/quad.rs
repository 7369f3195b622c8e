//! Shared quadrature and 1-D search primitives.
//!
//! Everything numerical in this crate that is not available in closed form
//! funnels through two tools: composite Gauss–Legendre panels with doubling
//! until the estimate stabilizes, and a golden-section scan for 1-D extrema.

use std::sync::OnceLock;

use crate::error::{Error, Result};

const GAUSS_POINTS: usize = 16;
const MAX_PANELS: usize = 8192;

/// Nodes and weights of the 16-point Gauss–Legendre rule on `[-1, 1]`,
/// computed once by Newton iteration on the Legendre recurrence (no
/// hand-copied tables to mistype).
fn gauss16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GAUSS_POINTS;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n / 2 {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, z);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
                let dz = p1 / dp;
                z -= dz;
                if dz.abs() < 1e-15 {
                    break;
                }
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        (nodes, weights)
    })
}

fn composite(lo: f64, hi: f64, panels: usize, f: &impl Fn(f64) -> f64) -> f64 {
    let (nodes, weights) = gauss16();
    let h = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let a = lo + h * p as f64;
        let mid = a + 0.5 * h;
        let half = 0.5 * h;
        let mut acc = 0.0;
        for (x, w) in nodes.iter().zip(weights) {
            acc += w * f(mid + half * x);
        }
        total += acc * half;
    }
    total
}

/// `∫_lo^hi f`, doubling the panel count until successive composite
/// Gauss–Legendre estimates agree to `tol·(1 + |I|)`.
pub fn integrate(lo: f64, hi: f64, tol: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
    if !(lo.is_finite() && hi.is_finite()) || !(tol > 0.0) {
        return Err(Error::Domain(format!("bad quadrature request [{lo}, {hi}], tol {tol}")));
    }
    if hi <= lo {
        return Ok(0.0);
    }
    let mut panels = 1;
    let mut prev = composite(lo, hi, panels, &f);
    while panels < MAX_PANELS {
        panels *= 2;
        let cur = composite(lo, hi, panels, &f);
        if (cur - prev).abs() <= tol * (1.0 + cur.abs()) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Domain(format!(
        "quadrature on [{lo}, {hi}] still moving after {MAX_PANELS} panels"
    )))
}

/// `∫_lo^hi f` by tanh-sinh (double-exponential) quadrature, which tolerates
/// integrable algebraic singularities at either endpoint. The node spacing
/// halves until two successive levels agree to `tol·(1 + |I|)`.
///
/// The integrand receives `(x, x − lo, hi − x)` with the endpoint distances
/// computed in the transform variable, where they stay exact down to the
/// doubly-exponential tails; singular factors must be built from those
/// distances, never by subtracting `x` from an endpoint, or the node mass
/// next to the singularity is lost to rounding.
pub fn de_integrate(lo: f64, hi: f64, tol: f64, f: impl Fn(f64, f64, f64) -> f64) -> Result<f64> {
    if !(lo.is_finite() && hi.is_finite()) || !(tol > 0.0) {
        return Err(Error::Domain(format!("bad quadrature request [{lo}, {hi}], tol {tol}")));
    }
    if hi <= lo {
        return Ok(0.0);
    }
    // beyond |t| = 5.5 the remaining mass is below f64 resolution even for
    // strongly singular integrands
    const T_MAX: f64 = 5.5;
    let c = 0.5 * (hi - lo);
    let term = |t: f64| -> f64 {
        let u = std::f64::consts::FRAC_PI_2 * t.abs().sinh();
        let e = (-2.0 * u).exp();
        if e == 0.0 {
            return 0.0;
        }
        // 1 ∓ tanh(u) without cancellation
        let near = 2.0 * c * e / (1.0 + e);
        let far = 2.0 * c / (1.0 + e);
        let w = c * std::f64::consts::FRAC_PI_2 * t.abs().cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
        let (x, d_lo, d_hi) = if t >= 0.0 { (hi - near, far, near) } else { (lo + near, near, far) };
        w * f(x, d_lo, d_hi)
    };
    let mut sum = term(0.0);
    let mut k = 1.0;
    while k <= T_MAX {
        sum += term(k) + term(-k);
        k += 1.0;
    }
    let mut h = 1.0;
    let mut prev = sum * h;
    for _ in 0..10 {
        h *= 0.5;
        let mut k = 1.0;
        while k * h <= T_MAX {
            sum += term(k * h) + term(-k * h);
            k += 2.0;
        }
        let cur = sum * h;
        if (cur - prev).abs() <= tol * (1.0 + cur.abs()) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Domain(format!("tanh-sinh quadrature on [{lo}, {hi}] did not settle")))
}

/// Golden-section maximizer on `[lo, hi]`; returns `(argmax, max)`.
///
/// Assumes `f` is continuous; with a unimodal `f` the bracket shrinks to the
/// true maximizer, otherwise it converges to some local maximum inside the
/// starting bracket — callers seed it from a grid scan for that reason.
pub fn maximize(mut lo: f64, mut hi: f64, iters: usize, f: impl Fn(f64) -> f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        // degree 31 is the edge of exactness for 16 points
        let got = composite(0.0, 1.0, 1, &|x: f64| 32.0 * x.powi(31));
        assert!((got - 1.0).abs() < 1e-12, "got {got}");
        let (_, weights) = gauss16();
        let total: f64 = weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn doubling_converges_on_oscillatory_integrand() {
        let got = integrate(0.0, std::f64::consts::PI, 1e-12, |x| (20.0 * x).sin().powi(2)).unwrap();
        assert!((got - std::f64::consts::PI / 2.0).abs() < 1e-10, "got {got}");
    }

    #[test]
    fn golden_section_finds_interior_maximum() {
        // position accuracy at a smooth maximum is limited to ~sqrt(machine eps)
        let (x, v) = maximize(0.0, 1.0, 80, |x| -(x - 0.3) * (x - 0.3) + 2.0);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularities() {
        let got = de_integrate(0.0, 1.0, 1e-12, |_, d_lo, _| d_lo.powf(-0.5)).unwrap();
        assert!((got - 2.0).abs() < 1e-11, "got {got}");
        // both endpoints singular: ∫₀¹ x^{−0.46}(1−x)^{−0.8} = B(0.54, 0.2)
        let beta = statrs::function::beta::beta(0.54, 0.2);
        let got =
            de_integrate(0.0, 1.0, 1e-12, |_, d_lo, d_hi| d_lo.powf(-0.46) * d_hi.powf(-0.8))
                .unwrap();
        assert!((got - beta).abs() < 1e-10 * beta, "got {got} want {beta}");
        // smooth integrands settle to the same value as the panel rule
        let de = de_integrate(0.25, 2.0, 1e-13, |x, _, _| x.sin()).unwrap();
        let gl = integrate(0.25, 2.0, 1e-13, f64::sin).unwrap();
        assert!((de - gl).abs() < 1e-12);
    }
}
