//! Grid-sampled path carriers.
//!
//! A path is stored as its values on a uniform time grid
//! `t_k = t_start + k·step`. Off-grid values are always taken from the
//! piecewise-linear interpolant, which is the convention every quadrature in
//! this crate is built around: integrals of interpolated data can be done in
//! closed form cell by cell, including against singular kernels.

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};

/// Relative tolerance used when snapping times to grid indices.
const GRID_SNAP: f64 = 1e-6;

/// An `ℓ²(window)`-valued path sampled on a uniform grid.
///
/// Rows index time, columns index lattice nodes.
#[derive(Debug, Clone)]
pub struct SampledPath {
    t_start: f64,
    step: f64,
    values: Array2<f64>,
}

impl SampledPath {
    pub fn new(t_start: f64, step: f64, values: Array2<f64>) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() || !t_start.is_finite() {
            return Err(Error::Config(format!(
                "sampled path needs finite t_start and positive step (got {t_start}, {step})"
            )));
        }
        if values.nrows() < 2 {
            return Err(Error::Config("sampled path needs at least two time points".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("sampled path contains non-finite values".into()));
        }
        Ok(Self { t_start, step, values })
    }

    pub fn from_fn(
        t_start: f64,
        step: f64,
        rows: usize,
        cols: usize,
        f: impl Fn(usize, usize) -> f64,
    ) -> Result<Self> {
        Self::new(t_start, step, Array2::from_shape_fn((rows, cols), |(i, j)| f(i, j)))
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_start + self.step * (self.values.nrows() - 1) as f64
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Number of time points (= cells + 1).
    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn num_nodes(&self) -> usize {
        self.values.ncols()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t_start + self.step * i as f64
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.values.row(i)
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn row_norm(&self, i: usize) -> f64 {
        self.values.row(i).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Grid index of time `t`; errors when `t` is off-grid or outside the window.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let raw = (t - self.t_start) / self.step;
        let idx = raw.round();
        if (raw - idx).abs() > GRID_SNAP * raw.abs().max(1.0) {
            return Err(Error::OffGrid { t, step: self.step });
        }
        if idx < 0.0 || idx as usize >= self.values.nrows() {
            return Err(Error::OutOfWindow { t, lo: self.t_start, hi: self.t_end() });
        }
        Ok(idx as usize)
    }

    /// Sub-path on `[t1, t2]`; both endpoints must be grid points.
    pub fn segment(&self, t1: f64, t2: f64) -> Result<SampledPath> {
        let i1 = self.index_of(t1)?;
        let i2 = self.index_of(t2)?;
        if i2 <= i1 {
            return Err(Error::Domain(format!("empty segment [{t1}, {t2}]")));
        }
        Ok(SampledPath {
            t_start: t1,
            step: self.step,
            values: self.values.slice(ndarray::s![i1..=i2, ..]).to_owned(),
        })
    }

    /// Same samples with every time label shifted by `dt`.
    pub fn translated(&self, dt: f64) -> SampledPath {
        SampledPath { t_start: self.t_start + dt, step: self.step, values: self.values.clone() }
    }

    /// Keep every `stride`-th row (coarser grid over the same window).
    pub fn strided(&self, stride: usize) -> Result<SampledPath> {
        if stride == 0 || (self.values.nrows() - 1) % stride != 0 {
            return Err(Error::GridMismatch(format!(
                "stride {stride} does not divide {} cells",
                self.values.nrows() - 1
            )));
        }
        Ok(SampledPath {
            t_start: self.t_start,
            step: self.step * stride as f64,
            values: self.values.slice(ndarray::s![..;stride, ..]).to_owned(),
        })
    }

    /// Pointwise difference `self − other` (grids must coincide).
    pub fn sub(&self, other: &SampledPath) -> Result<SampledPath> {
        if self.values.dim() != other.values.dim()
            || (self.t_start - other.t_start).abs() > GRID_SNAP * self.step
            || (self.step - other.step).abs() > GRID_SNAP * self.step
        {
            return Err(Error::GridMismatch("paths live on different grids".into()));
        }
        Ok(SampledPath {
            t_start: self.t_start,
            step: self.step,
            values: &self.values - &other.values,
        })
    }

    pub fn column(&self, j: usize) -> ScalarPath {
        ScalarPath {
            t_start: self.t_start,
            step: self.step,
            values: self.values.column(j).to_vec(),
        }
    }

    pub fn row_owned(&self, i: usize) -> Array1<f64> {
        self.values.row(i).to_owned()
    }
}

/// A scalar path on a uniform grid, interpolated linearly between samples.
#[derive(Debug, Clone)]
pub struct ScalarPath {
    t_start: f64,
    step: f64,
    values: Vec<f64>,
}

/// One straight piece of a piecewise-linear path restricted to a sub-interval:
/// `z(q) = value + slope·(q − lo)` on `[lo, hi]`.
#[derive(Debug, Clone, Copy)]
pub struct LinearPiece {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
    pub slope: f64,
}

impl ScalarPath {
    pub fn new(t_start: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step > 0.0) || !t_start.is_finite() {
            return Err(Error::Config(format!(
                "scalar path needs finite t_start and positive step (got {t_start}, {step})"
            )));
        }
        if values.len() < 2 {
            return Err(Error::Config("scalar path needs at least two time points".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("scalar path contains non-finite values".into()));
        }
        Ok(Self { t_start, step, values })
    }

    pub fn from_fn(t_start: f64, step: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(t_start, step, (0..n).map(|k| f(t_start + step * k as f64)).collect())
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_start + self.step * (self.values.len() - 1) as f64
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t_start + self.step * i as f64
    }

    pub fn index_of(&self, t: f64) -> Result<usize> {
        let raw = (t - self.t_start) / self.step;
        let idx = raw.round();
        if (raw - idx).abs() > GRID_SNAP * raw.abs().max(1.0) {
            return Err(Error::OffGrid { t, step: self.step });
        }
        if idx < 0.0 || idx as usize >= self.values.len() {
            return Err(Error::OutOfWindow { t, lo: self.t_start, hi: self.t_end() });
        }
        Ok(idx as usize)
    }

    /// Value of the linear interpolant at any `t` inside the window.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let lo = self.t_start;
        let hi = self.t_end();
        let tol = GRID_SNAP * self.step;
        if t < lo - tol || t > hi + tol {
            return Err(Error::OutOfWindow { t, lo, hi });
        }
        let pos = ((t - lo) / self.step).clamp(0.0, (self.values.len() - 1) as f64);
        let cell = (pos.floor() as usize).min(self.values.len() - 2);
        let frac = pos - cell as f64;
        Ok(self.values[cell] * (1.0 - frac) + self.values[cell + 1] * frac)
    }

    /// Cell index whose closed interval contains `t` (ties resolve left).
    fn cell_containing(&self, t: f64) -> usize {
        let pos = (t - self.t_start) / self.step;
        (pos.ceil() as isize - 1).clamp(0, self.values.len() as isize - 2) as usize
    }

    /// The grid cells of `[a, b]` clipped to the interval, as linear pieces.
    ///
    /// This is the carrier for all singular-kernel quadratures: on each piece
    /// the path is exactly linear, so kernel moments integrate in closed form.
    pub fn pieces_in(&self, a: f64, b: f64) -> Result<Vec<LinearPiece>> {
        let tol = GRID_SNAP * self.step;
        if a < self.t_start - tol || b > self.t_end() + tol || b <= a {
            return Err(Error::OutOfWindow { t: if a < self.t_start { a } else { b }, lo: self.t_start, hi: self.t_end() });
        }
        let first = self.cell_containing(a.max(self.t_start));
        let last = self.cell_containing(b.min(self.t_end()));
        let mut out = Vec::with_capacity(last - first + 1);
        for cell in first..=last {
            let c_lo = self.time(cell);
            let c_hi = self.time(cell + 1);
            let lo = a.max(c_lo);
            let hi = b.min(c_hi);
            if hi <= lo {
                continue;
            }
            let slope = (self.values[cell + 1] - self.values[cell]) / self.step;
            let value = self.values[cell] + slope * (lo - c_lo);
            out.push(LinearPiece { lo, hi, value, slope });
        }
        Ok(out)
    }

    pub fn translated(&self, dt: f64) -> ScalarPath {
        ScalarPath { t_start: self.t_start + dt, step: self.step, values: self.values.clone() }
    }

    /// Wiener shift: re-label time by `t ↦ t − τ` and re-base so the shifted
    /// path vanishes at its new origin.
    pub fn shifted(&self, tau: f64) -> Result<ScalarPath> {
        let pivot = self.eval(tau)?;
        Ok(ScalarPath {
            t_start: self.t_start - tau,
            step: self.step,
            values: self.values.iter().map(|v| v - pivot).collect(),
        })
    }

    pub fn segment(&self, t1: f64, t2: f64) -> Result<ScalarPath> {
        let i1 = self.index_of(t1)?;
        let i2 = self.index_of(t2)?;
        if i2 <= i1 {
            return Err(Error::Domain(format!("empty segment [{t1}, {t2}]")));
        }
        Ok(ScalarPath { t_start: t1, step: self.step, values: self.values[i1..=i2].to_vec() })
    }

    pub fn scaled(&self, c: f64) -> ScalarPath {
        ScalarPath {
            t_start: self.t_start,
            step: self.step,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn linear_combination(c1: f64, p1: &ScalarPath, c2: f64, p2: &ScalarPath) -> Result<ScalarPath> {
        if p1.values.len() != p2.values.len()
            || (p1.t_start - p2.t_start).abs() > GRID_SNAP * p1.step
            || (p1.step - p2.step).abs() > GRID_SNAP * p1.step
        {
            return Err(Error::GridMismatch("scalar paths live on different grids".into()));
        }
        Ok(ScalarPath {
            t_start: p1.t_start,
            step: p1.step,
            values: p1
                .values
                .iter()
                .zip(&p2.values)
                .map(|(a, b)| c1 * a + c2 * b)
                .collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp() -> ScalarPath {
        ScalarPath::from_fn(0.0, 0.25, 5, |t| 2.0 * t).unwrap()
    }

    #[test]
    fn eval_interpolates_linearly() {
        let p = ramp();
        assert!((p.eval(0.1).unwrap() - 0.2).abs() < 1e-15);
        assert!((p.eval(1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(p.eval(1.1).is_err());
    }

    #[test]
    fn pieces_cover_the_interval_exactly() {
        let p = ramp();
        let pieces = p.pieces_in(0.1, 0.9).unwrap();
        assert_eq!(pieces.len(), 4);
        assert!((pieces[0].lo - 0.1).abs() < 1e-15);
        assert!((pieces.last().unwrap().hi - 0.9).abs() < 1e-15);
        for w in pieces.windows(2) {
            assert!((w[0].hi - w[1].lo).abs() < 1e-15);
        }
        // each piece starts at the interpolated value
        for pc in &pieces {
            assert!((pc.value - p.eval(pc.lo).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn index_of_rejects_off_grid_times() {
        let p = ramp();
        assert_eq!(p.index_of(0.5).unwrap(), 2);
        assert!(matches!(p.index_of(0.3), Err(Error::OffGrid { .. })));
        assert!(matches!(p.index_of(2.0), Err(Error::OutOfWindow { .. })));
    }

    #[test]
    fn strided_halves_the_grid() {
        let p = SampledPath::from_fn(0.0, 0.25, 5, 2, |i, j| (i + j) as f64).unwrap();
        let q = p.strided(2).unwrap();
        assert_eq!(q.len(), 3);
        assert_eq!(q.step(), 0.5);
        assert_eq!(q.values()[[1, 0]], 2.0);
        assert!(p.strided(3).is_err());
    }

    #[test]
    fn segment_keeps_absolute_times() {
        let p = SampledPath::from_fn(-1.0, 0.5, 5, 1, |i, _| i as f64).unwrap();
        let s = p.segment(0.0, 1.0).unwrap();
        assert_eq!(s.t_start(), 0.0);
        assert_eq!(s.len(), 3);
        assert_eq!(s.values()[[0, 0]], 2.0);
    }
}
