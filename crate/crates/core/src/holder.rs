//! Exponentially weighted Hölder norms on grid paths, and the damped kernel
//! supremum `k(ρ)` that controls how those norms contract.
//!
//! For a path `u` on `[T₁, T₂]` and weight rate `ρ ≥ 0`, the norm is
//!
//! ```text
//! ‖u‖_{β,ρ} = sup_t e^{-ρ(t-T₁)} ‖u(t)‖  +  sup_{s<t} e^{-ρ(t-T₁)} ‖u(t)-u(s)‖ / (t-s)^β
//! ```
//!
//! with the weight always attached to the *later* time of a pair. On a grid
//! with `M` points the two suprema run over grid times and grid pairs; the
//! pair scan is exact (no subsampling) but prunes pairs whose triangle-
//! inequality ceiling cannot beat the running maximum, and splits rows across
//! threads.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::par;
use crate::path::{SampledPath, ScalarPath};
use crate::quad;

/// The two suprema and their sum.
#[derive(Debug, Clone, Copy)]
pub struct WeightedNorms {
    /// Weighted supremum of `‖u(t)‖`.
    pub sup: f64,
    /// Weighted β-Hölder seminorm.
    pub seminorm: f64,
    /// `sup + seminorm`.
    pub norm: f64,
}

fn validate_params(beta: f64, rho: f64) -> Result<()> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Domain(format!("Hölder exponent must lie in (0, 1], got {beta}")));
    }
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::Domain(format!("weight rate must be finite and ≥ 0, got {rho}")));
    }
    Ok(())
}

/// Weighted norms of an `ℓ²`-valued grid path, weight anchored at
/// `path.t_start()`. Set `parallel: false` to force the sequential scan.
pub fn weighted_norms_opt(
    parallel: bool,
    path: &SampledPath,
    beta: f64,
    rho: f64,
) -> Result<WeightedNorms> {
    validate_params(beta, rho)?;
    let m = path.len();
    let dt = path.step();
    let row_norms: Vec<f64> = (0..m).map(|i| path.row_norm(i)).collect();
    let weights: Vec<f64> = (0..m).map(|i| (-rho * dt * i as f64).exp()).collect();
    let gap_pow: Vec<f64> = (0..m).map(|k| (dt * k as f64).powf(beta)).collect();

    let sup = row_norms
        .iter()
        .zip(&weights)
        .map(|(n, w)| n * w)
        .fold(0.0f64, f64::max);

    let diff_norm = |i: usize, j: usize| -> f64 {
        path.row(i)
            .iter()
            .zip(path.row(j).iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };

    // Adjacent pairs first: cheap and usually close to the supremum, which
    // makes the triangle-inequality prune below bite early.
    let mut floor = 0.0f64;
    for i in 1..m {
        floor = floor.max(weights[i] * diff_norm(i, i - 1) / gap_pow[1]);
    }

    let row_best = par::map_indexed_opt(parallel, m, |i| {
        let mut best = floor;
        for j in 0..i {
            let ceiling = weights[i] * (row_norms[i] + row_norms[j]) / gap_pow[i - j];
            if ceiling <= best {
                continue;
            }
            best = best.max(weights[i] * diff_norm(i, j) / gap_pow[i - j]);
        }
        best
    });
    let seminorm = row_best.into_iter().fold(floor, f64::max);

    Ok(WeightedNorms { sup, seminorm, norm: sup + seminorm })
}

pub fn weighted_norms(path: &SampledPath, beta: f64, rho: f64) -> Result<WeightedNorms> {
    weighted_norms_opt(true, path, beta, rho)
}

/// Unweighted Hölder norms (`ρ = 0`).
pub fn holder_norms(path: &SampledPath, beta: f64) -> Result<WeightedNorms> {
    weighted_norms(path, beta, 0.0)
}

/// Weighted norm of the difference `u − v`.
pub fn weighted_distance(u: &SampledPath, v: &SampledPath, beta: f64, rho: f64) -> Result<f64> {
    Ok(weighted_norms(&u.sub(v)?, beta, rho)?.norm)
}

fn scalar_as_sampled(path: &ScalarPath) -> SampledPath {
    let values = Array2::from_shape_vec((path.len(), 1), path.values().to_vec())
        .expect("scalar path has consistent length");
    SampledPath::new(path.t_start(), path.step(), values).expect("scalar path is already valid")
}

/// Weighted norms of a scalar grid path.
pub fn scalar_weighted_norms(path: &ScalarPath, beta: f64, rho: f64) -> Result<WeightedNorms> {
    weighted_norms(&scalar_as_sampled(path), beta, rho)
}

/// Unweighted β-Hölder seminorm of a scalar path — the size measure used for
/// noise paths throughout.
pub fn scalar_holder_seminorm(path: &ScalarPath, beta: f64) -> Result<f64> {
    Ok(scalar_weighted_norms(path, beta, 0.0)?.seminorm)
}

/// `k(ρ) = sup_{0 ≤ s < t ≤ T} ∫_s^t e^{-ρ(t-r)} (r-s)^a (t-r)^b dr`.
///
/// The integral depends on `(s, t)` only through `d = t - s`:
/// substituting `r = s + u·d` gives `I(d) = d^{a+b+1} J(ρd)` with
/// `J(ζ) = ∫_0^1 e^{-ζ(1-u)} u^a (1-u)^b du`, so the supremum is a 1-D search
/// over `d ∈ (0, T]`. At `ρ = 0` the supremum sits at `d = T` and equals
/// `T^{a+b+1} B(a+1, b+1)`; for large `ρ` it migrates to `d = Θ(1/ρ)` and
/// decays like `ρ^{-(a+b+1)}`. Requires `a, b > -1` and `a + b + 1 > 0` so
/// the integral exists and stays bounded as `d → 0`.
pub fn k_rho(rho: f64, a: f64, b: f64, horizon: f64, tol: f64) -> Result<f64> {
    k_rho_discounted(rho, a, b, 0.0, horizon, tol)
}

/// The seminorm-compatible variant
/// `sup_{s<t} (t-s)^{-γ} ∫_s^t e^{-ρ(t-r)} (r-s)^a (t-r)^b dr`; the extra
/// gap power is what the Hölder-seminorm half of the convolution estimate
/// divides by. Decays like `ρ^{-(a+b+1-γ)}`, slower than the raw kernel.
pub fn k_rho_discounted(
    rho: f64,
    a: f64,
    b: f64,
    gap_exponent: f64,
    horizon: f64,
    tol: f64,
) -> Result<f64> {
    if !(a > -1.0 && b > -1.0 && a + b + 1.0 > 0.0) {
        return Err(Error::Domain(format!(
            "kernel exponents need a, b > -1 and a + b + 1 > 0, got ({a}, {b})"
        )));
    }
    if !(0.0..=a + b + 1.0).contains(&gap_exponent) {
        return Err(Error::Domain(format!(
            "gap exponent must lie in [0, a + b + 1], got {gap_exponent}"
        )));
    }
    if !(horizon > 0.0) || !horizon.is_finite() || !(rho >= 0.0) || !rho.is_finite() || !(tol > 0.0) {
        return Err(Error::Domain(format!(
            "k(ρ) needs finite horizon > 0, ρ ≥ 0 and tol > 0 (got {horizon}, {rho}, {tol})"
        )));
    }

    let power = a + b + 1.0 - gap_exponent;
    let value_at = |d: f64| -> Result<f64> { Ok(d.powf(power) * j_integral(rho * d, a, b, tol)?) };

    // Log-spaced scan locates the supremum's neighbourhood (it can sit
    // anywhere between Θ(1/ρ) and T), then golden-section polishes it.
    let scan_points = 160;
    let d_min = horizon * 1e-10;
    let log_lo = d_min.ln();
    let log_step = (horizon.ln() - log_lo) / (scan_points - 1) as f64;
    let mut best_idx = 0;
    let mut best_val = f64::NEG_INFINITY;
    let mut d_values = Vec::with_capacity(scan_points);
    for k in 0..scan_points {
        let d = (log_lo + log_step * k as f64).exp();
        let v = value_at(d)?;
        d_values.push(d);
        if v > best_val {
            best_val = v;
            best_idx = k;
        }
    }
    let lo = d_values[best_idx.saturating_sub(1)];
    let hi = d_values[(best_idx + 1).min(scan_points - 1)];
    if hi > lo {
        let (_, refined) = quad::maximize(lo, hi, 120, |d| value_at(d).unwrap_or(f64::NEG_INFINITY));
        best_val = best_val.max(refined);
    }
    Ok(best_val)
}

/// `J(ζ) = ∫_0^1 e^{-ζ(1-u)} u^a (1-u)^b du` with both endpoint singularities
/// removed by the substitutions `u = v^{1/(1+a)}` (left half) and
/// `1-u = w^{1/(1+b)}` (right half), after which each integrand is bounded
/// and composite Gauss panels converge.
fn j_integral(zeta: f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let pa = 1.0 + a;
    let pb = 1.0 + b;
    let left = quad::integrate(0.0, 0.5f64.powf(pa), tol, |v| {
        let u = v.powf(1.0 / pa);
        (-zeta * (1.0 - u)).exp() * (1.0 - u).powf(b)
    })? / pa;
    let right = quad::integrate(0.0, 0.5f64.powf(pb), tol, |w| {
        let one_minus_u = w.powf(1.0 / pb);
        (-zeta * one_minus_u).exp() * (1.0 - one_minus_u).powf(a)
    })? / pb;
    Ok(left + right)
}
