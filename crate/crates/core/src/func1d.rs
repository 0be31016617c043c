//! Sampled scalar functions on an interval and monotone maps with inverses.

use crate::error::{Error, Result};

/// Which one-sided limit to take at a point where a function may jump.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Minimum node spacing, relative to the total span.
pub const MIN_SPACING: f64 = 1e-12;

/// Points this far outside the domain (relative to the span) are snapped
/// to the endpoint instead of being rejected; it absorbs rounding only.
const DOMAIN_SLACK: f64 = 1e-9;

/// Index `i` of the segment `[xs[i], xs[i+1]]` containing `x`.
/// `xs` must be strictly increasing with at least two entries and `x` inside.
pub(crate) fn segment(xs: &[f64], x: f64) -> usize {
    let n = xs.len();
    let i = xs.partition_point(|&v| v <= x);
    i.saturating_sub(1).min(n - 2)
}

/// Linear interpolation on strictly increasing `xs`; `x` is clamped to the ends.
pub(crate) fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if n == 1 {
        return ys[0];
    }
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let i = segment(xs, x);
    let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + w * (ys[i + 1] - ys[i])
}

/// Inverse of the piecewise-linear map `xs -> ys` with `ys` non-decreasing.
/// Returns `None` if `s` is outside `[ys[0], ys[n-1]]` by more than `tol`.
pub(crate) fn invert_increasing(xs: &[f64], ys: &[f64], s: f64, tol: f64) -> Option<f64> {
    let n = ys.len();
    if n == 0 || s < ys[0] - tol || s > ys[n - 1] + tol {
        return None;
    }
    if n == 1 || s <= ys[0] {
        return Some(xs[0]);
    }
    if s >= ys[n - 1] {
        return Some(xs[n - 1]);
    }
    let i = ys.partition_point(|&v| v <= s).saturating_sub(1).min(n - 2);
    let dy = ys[i + 1] - ys[i];
    if dy <= 0.0 {
        return Some(xs[i]);
    }
    let w = (s - ys[i]) / dy;
    Some(xs[i] + w * (xs[i + 1] - xs[i]))
}

/// A scalar function given by samples on a strictly increasing grid,
/// evaluated by piecewise-linear interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    xs: Vec<f64>,
    ys: Vec<f64>,
    // cumulative trapezoid integral from xs[0] to xs[i]
    cumulative: Vec<f64>,
}

impl SampledFunction {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::InvalidSamples(format!(
                "{} abscissae but {} values",
                xs.len(),
                ys.len()
            )));
        }
        if xs.len() < 2 {
            return Err(Error::InvalidSamples("need at least two samples".into()));
        }
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidSamples("non-finite sample".into()));
        }
        let span = xs[xs.len() - 1] - xs[0];
        if span <= 0.0 {
            return Err(Error::InvalidSamples("abscissae must be increasing".into()));
        }
        let min_gap = MIN_SPACING * span;
        for w in xs.windows(2) {
            if w[1] - w[0] < min_gap {
                return Err(Error::InvalidSamples(format!(
                    "abscissae {} and {} are not strictly increasing",
                    w[0], w[1]
                )));
            }
        }
        let mut cumulative = Vec::with_capacity(xs.len());
        cumulative.push(0.0);
        for i in 1..xs.len() {
            let prev = cumulative[i - 1];
            cumulative.push(prev + 0.5 * (xs[i] - xs[i - 1]) * (ys[i] + ys[i - 1]));
        }
        Ok(Self { xs, ys, cumulative })
    }

    /// Samples `f` on `n + 1` equally spaced points of `[a, b]`.
    pub fn from_fn(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let n = n.max(1);
        let xs: Vec<f64> = (0..=n)
            .map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 })
            .collect();
        let ys = xs.iter().map(|&x| f(x)).collect();
        Self::new(xs, ys)
    }

    pub fn constant(value: f64, a: f64, b: f64) -> Result<Self> {
        Self::new(vec![a, b], vec![value, value])
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    pub fn span(&self) -> f64 {
        let (a, b) = self.domain();
        b - a
    }

    fn clamp_into(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        let slack = DOMAIN_SLACK * (hi - lo);
        if x.is_nan() || x < lo - slack || x > hi + slack {
            return Err(Error::Domain { x, lo, hi });
        }
        Ok(x.clamp(lo, hi))
    }

    pub fn evaluate(&self, x: f64) -> Result<f64> {
        let x = self.clamp_into(x)?;
        Ok(interp(&self.xs, &self.ys, x))
    }

    /// Evaluation that clamps to the domain; for callers that already
    /// guarantee the argument is in range.
    pub(crate) fn at(&self, x: f64) -> f64 {
        interp(&self.xs, &self.ys, x)
    }

    fn primitive(&self, x: f64) -> f64 {
        let i = segment(&self.xs, x);
        let yx = interp(&self.xs, &self.ys, x);
        self.cumulative[i] + 0.5 * (x - self.xs[i]) * (self.ys[i] + yx)
    }

    /// Exact integral of the interpolant over `[a, b]` (signed if `b < a`).
    pub fn definite_integral(&self, a: f64, b: f64) -> Result<f64> {
        let a = self.clamp_into(a)?;
        let b = self.clamp_into(b)?;
        Ok(self.primitive(b) - self.primitive(a))
    }

    /// Derivative estimate: segment slopes placed at midpoints, extended
    /// constantly to the endpoints.
    pub fn derivative(&self) -> SampledFunction {
        let n = self.xs.len();
        let slopes: Vec<f64> = (0..n - 1)
            .map(|i| (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i]))
            .collect();
        let mut xs = Vec::with_capacity(n + 1);
        let mut ys = Vec::with_capacity(n + 1);
        xs.push(self.xs[0]);
        ys.push(slopes[0]);
        for i in 0..n - 1 {
            xs.push(0.5 * (self.xs[i] + self.xs[i + 1]));
            ys.push(slopes[i]);
        }
        xs.push(self.xs[n - 1]);
        ys.push(slopes[n - 2]);
        // midpoints of the tiny jump-window segments can crowd the endpoints
        let min_gap = MIN_SPACING * self.span();
        let mut cx = Vec::with_capacity(xs.len());
        let mut cy = Vec::with_capacity(ys.len());
        for (x, y) in xs.into_iter().zip(ys) {
            match cx.last() {
                Some(&last) if x - last < min_gap => {
                    *cy.last_mut().unwrap() = y;
                    *cx.last_mut().unwrap() = x;
                }
                _ => {
                    cx.push(x);
                    cy.push(y);
                }
            }
        }
        if cx.len() < 2 {
            let (a, b) = self.domain();
            return SampledFunction::constant(slopes[0], a, b).expect("valid domain");
        }
        *cx.first_mut().unwrap() = self.xs[0];
        *cx.last_mut().unwrap() = self.xs[n - 1];
        SampledFunction::new(cx, cy).expect("derivative grid is increasing")
    }

    /// Applies `f` to every sample value.
    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> SampledFunction {
        let ys = self.xs.iter().zip(&self.ys).map(|(&x, &y)| f(x, y)).collect();
        SampledFunction::new(self.xs.clone(), ys).expect("same grid")
    }

    pub fn max_abs(&self) -> f64 {
        self.ys.iter().fold(0.0_f64, |m, y| m.max(y.abs()))
    }
}

/// A strictly increasing map `t -> s` stored by samples, with an inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneMap {
    f: SampledFunction,
}

impl MonotoneMap {
    pub fn new(f: SampledFunction) -> Result<Self> {
        for w in f.values().windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidSamples(format!(
                    "map is not strictly increasing ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self { f })
    }

    pub fn function(&self) -> &SampledFunction {
        &self.f
    }

    pub fn domain(&self) -> (f64, f64) {
        self.f.domain()
    }

    pub fn range(&self) -> (f64, f64) {
        let v = self.f.values();
        (v[0], v[v.len() - 1])
    }

    pub fn apply(&self, t: f64) -> Result<f64> {
        self.f.evaluate(t)
    }

    pub fn invert(&self, s: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        let tol = DOMAIN_SLACK * (hi - lo);
        invert_increasing(self.f.abscissae(), self.f.values(), s, tol)
            .ok_or(Error::Range { s, lo, hi })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_linear_interpolant() {
        let f = SampledFunction::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 4.0]).unwrap();
        assert_eq!(f.evaluate(1.5).unwrap(), 2.5);
        assert_eq!(f.evaluate(0.0).unwrap(), 0.0);
        assert_eq!(f.evaluate(2.0).unwrap(), 4.0);
    }

    #[test]
    fn rejects_points_outside_domain() {
        let f = SampledFunction::constant(1.0, 0.0, 1.0).unwrap();
        assert!(matches!(f.evaluate(1.5), Err(Error::Domain { .. })));
        assert!(matches!(f.evaluate(-0.1), Err(Error::Domain { .. })));
    }

    #[test]
    fn rejects_non_increasing_abscissae() {
        assert!(SampledFunction::new(vec![0.0, 0.0, 1.0], vec![1.0, 2.0, 3.0]).is_err());
        assert!(SampledFunction::new(vec![0.0, 2.0, 1.0], vec![1.0, 2.0, 3.0]).is_err());
        assert!(SampledFunction::new(vec![0.0], vec![1.0]).is_err());
        assert!(SampledFunction::new(vec![0.0, 1.0], vec![1.0]).is_err());
    }

    #[test]
    fn integral_of_constant() {
        let f = SampledFunction::constant(1.0, 0.0, 1.0).unwrap();
        assert_eq!(f.definite_integral(0.0, 1.0).unwrap(), 1.0);
        assert!((f.definite_integral(0.25, 0.75).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn integral_inside_segment_is_exact() {
        // interpolant of x^2 on {0,1,2}: slopes 1 and 3
        let f = SampledFunction::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 4.0]).unwrap();
        // int_0.5^1.5: [0.5,1] of x -> 0.375, [1,1.5] of 1+3(x-1) -> 0.875
        assert!((f.definite_integral(0.5, 1.5).unwrap() - 1.25).abs() < 1e-14);
        assert!((f.definite_integral(1.5, 0.5).unwrap() + 1.25).abs() < 1e-14);
    }

    #[test]
    fn derivative_of_sampled_square() {
        let f = SampledFunction::from_fn(0.0, 1.0, 1000, |x| x * x).unwrap();
        let d = f.derivative();
        assert!((d.evaluate(0.5).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn monotone_map_inverse() {
        let f = SampledFunction::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.5, 2.0]).unwrap();
        let m = MonotoneMap::new(f).unwrap();
        assert!((m.invert(1.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((m.invert(1.75).unwrap() - 1.5).abs() < 1e-15);
        assert!(matches!(m.invert(2.5), Err(Error::Range { .. })));
    }

    #[test]
    fn monotone_map_requires_increasing_values() {
        let f = SampledFunction::new(vec![0.0, 1.0], vec![1.0, 1.0]).unwrap();
        assert!(MonotoneMap::new(f).is_err());
    }
}
