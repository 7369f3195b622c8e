//! The spatial side: difference operators on a finite lattice window, their
//! spectra, the dissipative semigroup, and the pointwise nonlinearities.
//!
//! The second-difference operator `A = ν(2u_i - u_{i-1} - u_{i+1})` factors as
//! `A = B B* = B* B` through the forward/backward difference pair on the full
//! lattice; on a finite window the factorization survives under zero padding
//! (Dirichlet) or index wraparound (periodic). Both boundary choices have
//! closed-form orthonormal eigensystems, so the semigroup `e^{-t(A+λ)}` is
//! evaluated exactly — no time stepping error enters through the linear part.

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Indices wrap modulo the window length.
    Periodic,
    /// The window is embedded in the full lattice by zero extension.
    Dirichlet,
}

/// Pointwise (diagonal) nonlinearities acting component-wise on `ℓ²`.
///
/// Both families fix the origin. The `Saturating` pair has non-degenerate
/// linearization there, while the `FlatOrigin` pair has derivatives vanishing
/// at the origin — the property the small-ball stability argument needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NonlinearityFamily {
    /// Drift `a·tanh(u)`, noise coefficient `b·sin(u)`.
    Saturating { a: f64, b: f64 },
    /// Drift `a·(cos u - 1)`, noise coefficient `b·(1 - cos u)`, with a
    /// declared validity radius `delta` for the small-ball analysis.
    FlatOrigin { a: f64, b: f64, delta: f64 },
}

impl NonlinearityFamily {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            NonlinearityFamily::Saturating { a, b } => a >= 0.0 && b >= 0.0,
            NonlinearityFamily::FlatOrigin { a, b, delta } => a >= 0.0 && b >= 0.0 && delta > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid nonlinearity parameters: {self:?}")))
        }
    }

    pub fn drift_scalar(&self, x: f64) -> f64 {
        match *self {
            NonlinearityFamily::Saturating { a, .. } => a * x.tanh(),
            NonlinearityFamily::FlatOrigin { a, .. } => a * (x.cos() - 1.0),
        }
    }

    pub fn diffusion_scalar(&self, x: f64) -> f64 {
        match *self {
            NonlinearityFamily::Saturating { b, .. } => b * x.sin(),
            NonlinearityFamily::FlatOrigin { b, .. } => b * (1.0 - x.cos()),
        }
    }

    pub fn drift_derivative_scalar(&self, x: f64) -> f64 {
        match *self {
            NonlinearityFamily::Saturating { a, .. } => {
                let c = x.cosh();
                a / (c * c)
            }
            NonlinearityFamily::FlatOrigin { a, .. } => -a * x.sin(),
        }
    }

    pub fn diffusion_derivative_scalar(&self, x: f64) -> f64 {
        match *self {
            NonlinearityFamily::Saturating { b, .. } => b * x.cos(),
            NonlinearityFamily::FlatOrigin { b, .. } => b * x.sin(),
        }
    }

    pub fn drift(&self, u: &ArrayView1<f64>) -> Array1<f64> {
        u.mapv(|x| self.drift_scalar(x))
    }

    pub fn diffusion(&self, u: &ArrayView1<f64>) -> Array1<f64> {
        u.mapv(|x| self.diffusion_scalar(x))
    }

    /// Diagonal of the derivative of the drift map at `u`.
    pub fn drift_derivative(&self, u: &ArrayView1<f64>) -> Array1<f64> {
        u.mapv(|x| self.drift_derivative_scalar(x))
    }

    pub fn diffusion_derivative(&self, u: &ArrayView1<f64>) -> Array1<f64> {
        u.mapv(|x| self.diffusion_derivative_scalar(x))
    }

    /// Global Lipschitz constant of the drift map.
    pub fn drift_lipschitz(&self) -> f64 {
        match *self {
            NonlinearityFamily::Saturating { a, .. } => a,
            NonlinearityFamily::FlatOrigin { a, .. } => a,
        }
    }

    pub fn diffusion_lipschitz(&self) -> f64 {
        match *self {
            NonlinearityFamily::Saturating { b, .. } => b,
            NonlinearityFamily::FlatOrigin { b, .. } => b,
        }
    }

    /// Bound on the second derivative of the scalar drift profile.
    ///
    /// For `a·tanh` the extremum of `|2 sinh / cosh³|` sits at `tanh² = 1/3`,
    /// giving `4a/(3√3)`; the flat-origin cosine profile is bounded by `a`.
    pub fn drift_curvature(&self) -> f64 {
        match *self {
            NonlinearityFamily::Saturating { a, .. } => 4.0 * a / (3.0 * 3.0f64.sqrt()),
            NonlinearityFamily::FlatOrigin { a, .. } => a,
        }
    }

    pub fn diffusion_curvature(&self) -> f64 {
        match *self {
            NonlinearityFamily::Saturating { b, .. } => b,
            NonlinearityFamily::FlatOrigin { b, .. } => b,
        }
    }

    /// Supremum of the drift map over all of `ℓ²`.
    pub fn drift_sup(&self) -> f64 {
        match *self {
            NonlinearityFamily::Saturating { a, .. } => a,
            NonlinearityFamily::FlatOrigin { a, .. } => 2.0 * a,
        }
    }

    pub fn diffusion_sup(&self) -> f64 {
        match *self {
            NonlinearityFamily::Saturating { b, .. } => b,
            NonlinearityFamily::FlatOrigin { b, .. } => 2.0 * b,
        }
    }

    /// Whether both derivatives vanish at the origin.
    pub fn vanishing_linearization(&self) -> bool {
        matches!(self, NonlinearityFamily::FlatOrigin { .. })
    }

    /// `sup_{‖u‖ ≤ r} (‖Df(u)‖ + ‖Dh(u)‖)` over the closed ball of radius `r`.
    ///
    /// A diagonal map's derivative norm is the largest component derivative,
    /// and `‖u‖_{ℓ²} ≤ r` confines every component to `[-r, r]`.
    pub fn derivative_sup_on_ball(&self, r: f64) -> f64 {
        match *self {
            NonlinearityFamily::Saturating { a, b } => a + b,
            NonlinearityFamily::FlatOrigin { a, b, .. } => {
                (a + b) * r.min(std::f64::consts::FRAC_PI_2).sin()
            }
        }
    }
}

/// A lattice window with its linear operator and nonlinearity.
#[derive(Debug, Clone)]
pub struct LatticeModel {
    /// Window length (number of nodes).
    pub n: usize,
    pub boundary: Boundary,
    /// Diffusion weight `ν ≥ 0` in front of the second difference.
    pub nu: f64,
    /// Spectral shift `λ > 0`; the linear operator is `A + λ`.
    pub lambda: f64,
    pub family: NonlinearityFamily,
}

impl LatticeModel {
    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::Config(format!("window needs at least 3 nodes, got {}", self.n)));
        }
        if !(self.nu >= 0.0) || !self.nu.is_finite() {
            return Err(Error::Config(format!("diffusion weight must be ≥ 0, got {}", self.nu)));
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(Error::Config(format!("spectral shift must be > 0, got {}", self.lambda)));
        }
        self.family.validate()
    }

    fn sqrt_nu(&self) -> f64 {
        self.nu.sqrt()
    }

    /// Forward difference `(Bu)_i = √ν (u_{i+1} - u_i)`, window-truncated.
    pub fn apply_b(&self, u: &ArrayView1<f64>) -> Array1<f64> {
        let n = self.n;
        let s = self.sqrt_nu();
        Array1::from_shape_fn(n, |i| {
            let next = match self.boundary {
                Boundary::Periodic => u[(i + 1) % n],
                Boundary::Dirichlet => {
                    if i + 1 < n {
                        u[i + 1]
                    } else {
                        0.0
                    }
                }
            };
            s * (next - u[i])
        })
    }

    /// Backward difference `(B*u)_i = √ν (u_{i-1} - u_i)`, the adjoint of
    /// `apply_b` on the window.
    pub fn apply_b_star(&self, u: &ArrayView1<f64>) -> Array1<f64> {
        let n = self.n;
        let s = self.sqrt_nu();
        Array1::from_shape_fn(n, |i| {
            let prev = match self.boundary {
                Boundary::Periodic => u[(i + n - 1) % n],
                Boundary::Dirichlet => {
                    if i > 0 {
                        u[i - 1]
                    } else {
                        0.0
                    }
                }
            };
            s * (prev - u[i])
        })
    }

    /// Second difference `(Au)_i = ν (2u_i - u_{i-1} - u_{i+1})`.
    pub fn apply_a(&self, u: &ArrayView1<f64>) -> Array1<f64> {
        let n = self.n;
        Array1::from_shape_fn(n, |i| {
            let (prev, next) = match self.boundary {
                Boundary::Periodic => (u[(i + n - 1) % n], u[(i + 1) % n]),
                Boundary::Dirichlet => (
                    if i > 0 { u[i - 1] } else { 0.0 },
                    if i + 1 < n { u[i + 1] } else { 0.0 },
                ),
            };
            self.nu * (2.0 * u[i] - prev - next)
        })
    }

    /// `(A + λ) u`.
    pub fn apply_shifted(&self, u: &ArrayView1<f64>) -> Array1<f64> {
        let mut out = self.apply_a(u);
        out.scaled_add(self.lambda, u);
        out
    }

    /// Dense matrix of `A + λ` (for cross-checks and operator-valued paths).
    pub fn shifted_matrix(&self) -> Array2<f64> {
        let n = self.n;
        let mut m = Array2::zeros((n, n));
        for i in 0..n {
            let e = Array1::from_shape_fn(n, |j| if j == i { 1.0 } else { 0.0 });
            let col = self.apply_shifted(&e.view());
            for j in 0..n {
                m[[j, i]] = col[j];
            }
        }
        m
    }

    /// Eigenvalues of `A + λ` (ascending) and the matching orthonormal
    /// eigenbasis, one eigenvector per column. Closed forms:
    /// periodic `λ + 2ν(1 - cos(2πk/N))` with the real Fourier basis,
    /// Dirichlet `λ + 2ν(1 - cos(πk/(N+1)))` with the sine basis.
    pub fn eigen_system(&self) -> (Vec<f64>, Array2<f64>) {
        let n = self.n;
        let nf = n as f64;
        let mut mu = Vec::with_capacity(n);
        let mut basis = Array2::zeros((n, n));
        match self.boundary {
            Boundary::Periodic => {
                let mut col = 0;
                let tau = 2.0 * std::f64::consts::PI / nf;
                mu.push(self.lambda);
                for j in 0..n {
                    basis[[j, col]] = 1.0 / nf.sqrt();
                }
                col += 1;
                let pairs = (n - 1) / 2;
                for k in 1..=pairs {
                    let eig = self.lambda + 2.0 * self.nu * (1.0 - (tau * k as f64).cos());
                    let amp = (2.0 / nf).sqrt();
                    mu.push(eig);
                    for j in 0..n {
                        basis[[j, col]] = amp * (tau * (k * j) as f64).cos();
                    }
                    col += 1;
                    mu.push(eig);
                    for j in 0..n {
                        basis[[j, col]] = amp * (tau * (k * j) as f64).sin();
                    }
                    col += 1;
                }
                if n % 2 == 0 {
                    mu.push(self.lambda + 4.0 * self.nu);
                    for j in 0..n {
                        basis[[j, col]] = if j % 2 == 0 { 1.0 } else { -1.0 } / nf.sqrt();
                    }
                }
            }
            Boundary::Dirichlet => {
                let denom = nf + 1.0;
                let amp = (2.0 / denom).sqrt();
                for k in 1..=n {
                    let angle = std::f64::consts::PI * k as f64 / denom;
                    mu.push(self.lambda + 2.0 * self.nu * (1.0 - angle.cos()));
                    for j in 0..n {
                        basis[[j, k - 1]] = amp * (angle * (j + 1) as f64).sin();
                    }
                }
            }
        }
        (mu, basis)
    }

    /// Largest eigenvalue of `A + λ`.
    pub fn operator_norm(&self) -> f64 {
        let (mu, _) = self.eigen_system();
        mu.into_iter().fold(0.0, f64::max)
    }

    /// Dense matrix of the semigroup `e^{-t(A+λ)}`, exact via the spectrum.
    pub fn semigroup_matrix(&self, t: f64) -> Array2<f64> {
        let (mu, basis) = self.eigen_system();
        let n = self.n;
        // V · diag(e^{-tμ}) · Vᵀ
        let mut scaled = basis.clone();
        for (k, m) in mu.iter().enumerate() {
            let factor = (-t * m).exp();
            for j in 0..n {
                scaled[[j, k]] *= factor;
            }
        }
        scaled.dot(&basis.t())
    }

    pub fn apply_semigroup(&self, t: f64, u: &ArrayView1<f64>) -> Array1<f64> {
        self.semigroup_matrix(t).dot(u)
    }
}

/// Worst observed left-over-right ratios for the four semigroup estimates the
/// solver relies on. All operator norms are evaluated exactly through the
/// spectrum (every operator involved is a function of `A + λ`), so each field
/// must come out `≤ 1` up to rounding.
#[derive(Debug, Clone, Copy)]
pub struct SemigroupBounds {
    /// `‖S(d) − id‖ ≤ ‖A+λ‖ d`.
    pub identity_increment: f64,
    /// `‖S(t) − S(s)‖ ≤ ‖A+λ‖ (t−s) e^{−λs}`.
    pub two_time_difference: f64,
    /// `r ↦ S(t−r)` on `[0,t]` is β-Hölder with constant `‖A+λ‖ t^{1−β}`.
    pub convolution_seminorm: f64,
    /// `r ↦ S(t−r) − S(s−r)` on `[0,s]` is β-Hölder with constant
    /// `‖A+λ‖² (t−s) s^{1−β}`.
    pub convolution_difference: f64,
}

/// Evaluate the four semigroup estimates over the model's spectrum for every
/// ordered pair drawn from `times`; Hölder seminorms in the time variable are
/// scanned on a uniform subdivision of each window.
pub fn verify_semigroup_bounds(
    model: &LatticeModel,
    beta: f64,
    times: &[f64],
) -> Result<SemigroupBounds> {
    model.validate()?;
    if !(0.0 < beta && beta < 1.0) {
        return Err(Error::Domain("holder exponent must lie in (0, 1)".into()));
    }
    if times.len() < 2 || times.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::Domain("need at least two positive times".into()));
    }
    let (mu, _) = model.eigen_system();
    let a_norm = mu.iter().cloned().fold(0.0, f64::max);
    // ‖φ(A+λ)‖ for any scalar φ, by simultaneous diagonalization.
    let op_norm = |phi: &dyn Fn(f64) -> f64| -> f64 {
        mu.iter().map(|&m| phi(m).abs()).fold(0.0, f64::max)
    };
    let subdivide = |hi: f64| -> Vec<f64> {
        const CELLS: usize = 16;
        (0..=CELLS).map(|i| hi * i as f64 / CELLS as f64).collect()
    };

    let mut out = SemigroupBounds {
        identity_increment: 0.0,
        two_time_difference: 0.0,
        convolution_seminorm: 0.0,
        convolution_difference: 0.0,
    };
    for &t in times {
        let d = op_norm(&|m| 1.0 - (-m * t).exp());
        out.identity_increment = out.identity_increment.max(d / (a_norm * t));

        let grid = subdivide(t);
        for (i, &r1) in grid.iter().enumerate() {
            for &r2 in &grid[i + 1..] {
                let inc = op_norm(&|m| (-m * (t - r2)).exp() - (-m * (t - r1)).exp());
                let ratio = inc / (r2 - r1).powf(beta) / (a_norm * t.powf(1.0 - beta));
                out.convolution_seminorm = out.convolution_seminorm.max(ratio);
            }
        }
    }
    for &s in times {
        for &t in times {
            if s >= t {
                continue;
            }
            let d = op_norm(&|m| (-m * s).exp() - (-m * t).exp());
            out.two_time_difference = out
                .two_time_difference
                .max(d / (a_norm * (t - s) * (-model.lambda * s).exp()));

            let grid = subdivide(s);
            let phi = |m: f64, r: f64| (-m * (t - r)).exp() - (-m * (s - r)).exp();
            for (i, &r1) in grid.iter().enumerate() {
                for &r2 in &grid[i + 1..] {
                    let inc = op_norm(&|m| phi(m, r2) - phi(m, r1));
                    let ratio = inc / (r2 - r1).powf(beta)
                        / (a_norm * a_norm * (t - s) * s.powf(1.0 - beta));
                    out.convolution_difference = out.convolution_difference.max(ratio);
                }
            }
        }
    }
    Ok(out)
}

/// Worst-case slack in the four-point diffusion estimate
/// `‖h(u)−h(v)−h(w)+h(z)‖ ≤ √2 D_h ‖u−v−w+z‖ + 2 M_h ‖u−w‖ (‖u−v‖ + ‖w−z‖)`
/// together with the Lipschitz and derivative-norm facts it interpolates.
#[derive(Debug, Clone, Copy)]
pub struct DiffusionIncrementReport {
    /// max over quadruples of LHS / RHS in the four-point estimate.
    pub four_point_ratio: f64,
    /// max over pairs of `‖h(u)−h(v)‖ / (D_h ‖u−v‖)`.
    pub lipschitz_ratio: f64,
    /// max over points of `‖Dh(u)‖ / D_h` (diagonal derivative, sup entry).
    pub derivative_ratio: f64,
}

/// Evaluate the diffusion increment estimates on a sample of quadruples
/// `(u, v, w, z)`; each row bundle must have equal length.
pub fn verify_diffusion_increments(
    family: &NonlinearityFamily,
    quads: &[(Array1<f64>, Array1<f64>, Array1<f64>, Array1<f64>)],
) -> Result<DiffusionIncrementReport> {
    family.validate()?;
    let d_h = family.diffusion_lipschitz();
    let m_h = family.diffusion_curvature();
    let mut out = DiffusionIncrementReport {
        four_point_ratio: 0.0,
        lipschitz_ratio: 0.0,
        derivative_ratio: 0.0,
    };
    let norm = |x: &Array1<f64>| x.dot(x).sqrt();
    for (u, v, w, z) in quads {
        if v.len() != u.len() || w.len() != u.len() || z.len() != u.len() {
            return Err(Error::Domain("quadruple entries must share a length".into()));
        }
        let lhs = norm(&(family.diffusion(&u.view()) - family.diffusion(&v.view())
            - family.diffusion(&w.view())
            + family.diffusion(&z.view())));
        let rhs = 2.0f64.sqrt() * d_h * norm(&(u - v - w + z))
            + 2.0 * m_h * norm(&(u - w)) * (norm(&(u - v)) + norm(&(w - z)));
        if rhs > 1e-300 {
            out.four_point_ratio = out.four_point_ratio.max(lhs / rhs);
        }
        let pair = norm(&(u - v));
        if pair > 1e-300 {
            let lip = norm(&(family.diffusion(&u.view()) - family.diffusion(&v.view())));
            out.lipschitz_ratio = out.lipschitz_ratio.max(lip / (d_h * pair));
        }
        let deriv = family
            .diffusion_derivative(&u.view())
            .iter()
            .fold(0.0f64, |acc, &d| acc.max(d.abs()));
        out.derivative_ratio = out.derivative_ratio.max(deriv / d_h);
    }
    Ok(out)
}
