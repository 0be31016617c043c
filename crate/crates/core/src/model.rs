//! Domain types and the pointwise Griffith kernel.

use crate::error::{Error, Result};
use crate::func1d::{interp, invert_increasing, MonotoneMap, SampledFunction, Side, MIN_SPACING};

/// Default tolerance for compatibility checks on analytic inputs.
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regularity {
    C01,
    C1,
}

impl Regularity {
    pub fn name(self) -> &'static str {
        match self {
            Regularity::C01 => "C01",
            Regularity::C1 => "C1",
        }
    }
}

/// Local toughness of the adhesive, as a function of position.
#[derive(Debug, Clone, PartialEq)]
pub enum Toughness {
    Constant(f64),
    Sampled { kappa: SampledFunction, c1: f64, c2: f64 },
}

impl Toughness {
    pub fn constant(value: f64) -> Result<Self> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::InvalidToughness(value));
        }
        Ok(Toughness::Constant(value))
    }

    /// Sampled toughness; the bounds are the extreme sample values.
    pub fn sampled(kappa: SampledFunction) -> Result<Self> {
        let c1 = kappa.values().iter().cloned().fold(f64::INFINITY, f64::min);
        let c2 = kappa.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !(c1 > 0.0) {
            return Err(Error::InvalidToughness(c1));
        }
        Ok(Toughness::Sampled { kappa, c1, c2 })
    }

    pub fn bounds(&self) -> (f64, f64) {
        match self {
            Toughness::Constant(k) => (*k, *k),
            Toughness::Sampled { c1, c2, .. } => (*c1, *c2),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Toughness::Constant(_))
    }

    pub fn at(&self, x: f64) -> Result<f64> {
        match self {
            Toughness::Constant(k) => Ok(*k),
            Toughness::Sampled { kappa, .. } => kappa.evaluate(x),
        }
    }
}

fn check_domain(name: &str, f: &SampledFunction, ell: f64) -> Result<()> {
    let (a, b) = f.domain();
    let tol = 1e-9 * ell.max(1.0);
    if (a - 0.0).abs() > tol || (b - ell).abs() > tol {
        return Err(Error::InvalidSamples(format!(
            "{name} must be sampled on [0, {ell}], got [{a}, {b}]"
        )));
    }
    Ok(())
}

/// Initial configuration (ℓ₀, y₀, y₁).
#[derive(Debug, Clone, PartialEq)]
pub struct InitialState {
    pub ell0: f64,
    pub y0: SampledFunction,
    pub y1: SampledFunction,
    pub regularity: Regularity,
    y0_slope: SampledFunction,
}

impl InitialState {
    /// Checks only that the data live on `[0, ℓ₀]`; compatibility is
    /// reported separately by [`check_initial_compatibility`].
    pub fn new(
        ell0: f64,
        y0: SampledFunction,
        y1: SampledFunction,
        regularity: Regularity,
    ) -> Result<Self> {
        if !(ell0 > 0.0) || !ell0.is_finite() {
            return Err(Error::IncompatibleData(format!("ell0 must be positive, got {ell0}")));
        }
        check_domain("y0", &y0, ell0)?;
        check_domain("y1", &y1, ell0)?;
        let y0_slope = y0.derivative();
        Ok(Self { ell0, y0, y1, regularity, y0_slope })
    }

    /// Zero displacement and velocity on `[0, ℓ₀]`.
    pub fn at_rest(ell0: f64, regularity: Regularity) -> Result<Self> {
        let zero = SampledFunction::constant(0.0, 0.0, ell0)?;
        Self::new(ell0, zero.clone(), zero, regularity)
    }

    pub fn y0_slope(&self) -> &SampledFunction {
        &self.y0_slope
    }
}

/// Final configuration (ℓ̄₀, ȳ₀, ȳ₁) to be reached at time T.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetState {
    pub ell0: f64,
    pub y0: SampledFunction,
    pub y1: SampledFunction,
    pub regularity: Regularity,
    y0_slope: SampledFunction,
    damping: SampledFunction,
}

impl TargetState {
    pub fn new(
        ell0: f64,
        y0: SampledFunction,
        y1: SampledFunction,
        regularity: Regularity,
    ) -> Result<Self> {
        if !(ell0 > 0.0) || !ell0.is_finite() {
            return Err(Error::IncompatibleTarget(format!("ell0 must be positive, got {ell0}")));
        }
        check_domain("ybar0", &y0, ell0)?;
        check_domain("ybar1", &y1, ell0)?;
        let y0_slope = y0.derivative();
        let damping = sum_on_union(&y1, &y0_slope)?;
        Ok(Self { ell0, y0, y1, regularity, y0_slope, damping })
    }

    pub fn at_rest(ell0: f64, regularity: Regularity) -> Result<Self> {
        let zero = SampledFunction::constant(0.0, 0.0, ell0)?;
        Self::new(ell0, zero.clone(), zero, regularity)
    }

    pub fn y0_slope(&self) -> &SampledFunction {
        &self.y0_slope
    }

    /// ȳ₁ + ȳ₀′, the part of the target carried by incoming characteristics.
    pub fn damping_part(&self) -> &SampledFunction {
        &self.damping
    }
}

/// Pointwise sum of two functions on the same interval, sampled on the
/// union of their grids.
fn sum_on_union(a: &SampledFunction, b: &SampledFunction) -> Result<SampledFunction> {
    let mut xs: Vec<f64> = a.abscissae().iter().chain(b.abscissae()).cloned().collect();
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (lo, hi) = a.domain();
    let gap = MIN_SPACING * (hi - lo) * 2.0;
    xs.dedup_by(|p, q| (*p - *q).abs() < gap);
    xs.retain(|&x| x >= lo && x <= hi);
    let ys = xs.iter().map(|&x| a.at(x) + b.at(x)).collect();
    SampledFunction::new(xs, ys)
}

/// The debonding front ℓ on a time grid, with one-sided speeds at nodes.
///
/// Between nodes the speed is interpolated linearly from the right speed at
/// the left node to the left speed at the right node.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontCurve {
    times: Vec<f64>,
    positions: Vec<f64>,
    speeds: Vec<f64>,
    left_speeds: Vec<f64>,
    plus: Vec<f64>,
    minus: Vec<f64>,
}

impl FrontCurve {
    pub fn new(
        times: Vec<f64>,
        positions: Vec<f64>,
        speeds: Vec<f64>,
        left_speeds: Vec<f64>,
    ) -> Result<Self> {
        let n = times.len();
        if n == 0 || positions.len() != n || speeds.len() != n || left_speeds.len() != n {
            return Err(Error::InvalidSamples("front arrays must have equal, nonzero length".into()));
        }
        for w in times.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidSamples("front times must increase".into()));
            }
        }
        for &v in speeds.iter().chain(&left_speeds) {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::SpeedOutOfRange(v));
            }
        }
        let mut front = Self::empty();
        for i in 0..n {
            front.push(times[i], positions[i], left_speeds[i], speeds[i]);
        }
        for w in front.minus.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::StepTooLarge("t - l(t) is not strictly increasing".into()));
            }
        }
        Ok(front)
    }

    pub(crate) fn empty() -> Self {
        Self {
            times: Vec::new(),
            positions: Vec::new(),
            speeds: Vec::new(),
            left_speeds: Vec::new(),
            plus: Vec::new(),
            minus: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, t: f64, ell: f64, left_speed: f64, right_speed: f64) {
        self.times.push(t);
        self.positions.push(ell);
        self.left_speeds.push(left_speed);
        self.speeds.push(right_speed);
        self.plus.push(t + ell);
        self.minus.push(t - ell);
    }

    pub(crate) fn set_last_right_speed(&mut self, v: f64) {
        if let Some(last) = self.speeds.last_mut() {
            *last = v;
        }
    }

    /// Appends `other`, whose first node coincides with the last node of `self`.
    pub(crate) fn join(&mut self, other: &FrontCurve) {
        let skip = match (self.times.last(), other.times.first()) {
            (Some(&a), Some(&b)) if (a - b).abs() <= 1e-12 * a.abs().max(1.0) => {
                self.set_last_right_speed(other.speeds[0]);
                1
            }
            _ => 0,
        };
        for i in skip..other.len() {
            self.push(other.times[i], other.positions[i], other.left_speeds[i], other.speeds[i]);
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// Right-sided speeds at the nodes.
    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }

    pub fn left_speeds(&self) -> &[f64] {
        &self.left_speeds
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        self.times[self.len() - 1]
    }

    pub fn position(&self, t: f64) -> f64 {
        interp(&self.times, &self.positions, t)
    }

    pub fn speed(&self, t: f64, side: Side) -> f64 {
        let n = self.len();
        if n == 1 || t <= self.times[0] {
            return self.speeds[0];
        }
        if t >= self.times[n - 1] {
            return self.left_speeds[n - 1];
        }
        let i = crate::func1d::segment(&self.times, t);
        if t == self.times[i] {
            return match side {
                Side::Left if i > 0 => self.left_speeds[i],
                _ => self.speeds[i],
            };
        }
        let w = (t - self.times[i]) / (self.times[i + 1] - self.times[i]);
        self.speeds[i] + w * (self.left_speeds[i + 1] - self.speeds[i])
    }

    pub fn tau_plus(&self, t: f64) -> f64 {
        t + self.position(t)
    }

    pub fn tau_minus(&self, t: f64) -> f64 {
        t - self.position(t)
    }

    fn inverse_tol(values: &[f64]) -> f64 {
        1e-9 * (values[values.len() - 1] - values[0]).abs().max(1.0)
    }

    pub fn tau_plus_inverse(&self, s: f64) -> Result<f64> {
        let tol = Self::inverse_tol(&self.plus);
        invert_increasing(&self.times, &self.plus, s, tol).ok_or(Error::Range {
            s,
            lo: self.plus[0],
            hi: self.plus[self.len() - 1],
        })
    }

    pub fn tau_minus_inverse(&self, s: f64) -> Result<f64> {
        let tol = Self::inverse_tol(&self.minus);
        invert_increasing(&self.times, &self.minus, s, tol).ok_or(Error::Range {
            s,
            lo: self.minus[0],
            hi: self.minus[self.len() - 1],
        })
    }

    /// Node values of t + ℓ(t) and t − ℓ(t).
    pub fn tau_plus_values(&self) -> &[f64] {
        &self.plus
    }

    pub fn tau_minus_values(&self) -> &[f64] {
        &self.minus
    }

    /// τ₊ as a stand-alone monotone map.
    pub fn tau_plus_map(&self) -> Result<MonotoneMap> {
        MonotoneMap::new(SampledFunction::new(self.times.clone(), self.plus.clone())?)
    }

    pub fn tau_minus_map(&self) -> Result<MonotoneMap> {
        MonotoneMap::new(SampledFunction::new(self.times.clone(), self.minus.clone())?)
    }

    /// The trace point reflected from `s`: τ₋(τ₊⁻¹(s)), together with the
    /// reflection time τ₊⁻¹(s).
    pub fn echo(&self, s: f64) -> Result<(f64, f64)> {
        let t = self.tau_plus_inverse(s)?;
        // reflections through a node land exactly on that node's trace point
        let i = self.times.partition_point(|&x| x < t);
        let tol = 1e-12 * s.abs().max(1.0);
        for j in [i.saturating_sub(1), i.min(self.len() - 1)] {
            if (self.plus[j] - s).abs() <= tol {
                return Ok((self.minus[j], self.times[j]));
            }
        }
        Ok((t - self.position(t), t))
    }

    /// The part of the curve on `[a, b]`, with interpolated end nodes.
    pub fn restrict(&self, a: f64, b: f64) -> Result<FrontCurve> {
        let mut out = FrontCurve::empty();
        let eps = 1e-12 * self.end().abs().max(1.0);
        out.push(a, self.position(a), self.speed(a, Side::Left), self.speed(a, Side::Right));
        for i in 0..self.len() {
            let t = self.times[i];
            if t > a + eps && t < b - eps {
                out.push(t, self.positions[i], self.left_speeds[i], self.speeds[i]);
            }
        }
        if b > a + eps {
            out.push(b, self.position(b), self.speed(b, Side::Left), self.speed(b, Side::Right));
        }
        Ok(out)
    }
}

/// Half-width of the node pair representing a jump of u′, relative to the horizon.
const JUMP_HALF_WIDTH: f64 = 1e-10;

/// Boundary control u on `[0, T]` with its derivative.
///
/// Jumps of u′ are located explicitly; at a jump point the two one-sided
/// values are available through [`ControlSignal::slope`].
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSignal {
    u: SampledFunction,
    uprime: SampledFunction,
    jumps: Vec<f64>,
    pub regularity: Regularity,
}

impl ControlSignal {
    pub fn new(
        u: SampledFunction,
        uprime: SampledFunction,
        jumps: Vec<f64>,
        regularity: Regularity,
    ) -> Result<Self> {
        let (a, b) = u.domain();
        let (c, d) = uprime.domain();
        let tol = 1e-9 * b.abs().max(1.0);
        if a.abs() > tol || (c - a).abs() > tol || (d - b).abs() > tol {
            return Err(Error::InvalidSamples(format!(
                "control and its slope must share a domain [0, T]; got [{a}, {b}] and [{c}, {d}]"
            )));
        }
        let mut jumps = jumps;
        jumps.retain(|&j| j > a && j < b);
        jumps.sort_by(|p, q| p.partial_cmp(q).unwrap());
        Ok(Self { u, uprime, jumps, regularity })
    }

    pub(crate) fn half_width(horizon: f64) -> f64 {
        JUMP_HALF_WIDTH * horizon.max(1.0)
    }

    /// Control given by slope samples, integrated from `u0`. Jumps of the
    /// slope are stated at points of `jumps` via `(left, right)` values.
    pub fn from_slope(
        u0: f64,
        xs: &[f64],
        slopes: &[f64],
        jumps: &[(f64, f64, f64)],
        regularity: Regularity,
    ) -> Result<Self> {
        if xs.len() != slopes.len() || xs.len() < 2 {
            return Err(Error::InvalidSamples("slope samples malformed".into()));
        }
        let horizon = xs[xs.len() - 1];
        let w = Self::half_width(horizon);
        let mut pts: Vec<(f64, f64)> = xs
            .iter()
            .zip(slopes)
            .filter(|(x, _)| jumps.iter().all(|j| (**x - j.0).abs() > 2.0 * w))
            .map(|(x, y)| (*x, *y))
            .collect();
        for &(at, left, right) in jumps {
            pts.push((at - w, left));
            pts.push((at + w, right));
        }
        pts.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
        let px: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let py: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let uprime = SampledFunction::new(px, py)?;
        let mut uvals = Vec::with_capacity(uprime.abscissae().len());
        let mut acc = u0;
        uvals.push(acc);
        let (ux, uy) = (uprime.abscissae(), uprime.values());
        for i in 1..ux.len() {
            acc += 0.5 * (ux[i] - ux[i - 1]) * (uy[i] + uy[i - 1]);
            uvals.push(acc);
        }
        let u = SampledFunction::new(ux.to_vec(), uvals)?;
        Self::new(u, uprime, jumps.iter().map(|j| j.0).collect(), regularity)
    }

    /// Piecewise-linear control through the given samples; u′ jumps at every
    /// interior node where the slope changes.
    pub fn piecewise_linear(u: SampledFunction) -> Result<Self> {
        let xs = u.abscissae();
        let ys = u.values();
        let n = xs.len();
        let slopes: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])).collect();
        let mut sx = vec![xs[0]];
        let mut sy = vec![slopes[0]];
        let mut jumps = Vec::new();
        for i in 1..n - 1 {
            if slopes[i] != slopes[i - 1] {
                jumps.push((xs[i], slopes[i - 1], slopes[i]));
            }
        }
        sx.push(xs[n - 1]);
        sy.push(slopes[n - 2]);
        for i in 1..n - 1 {
            if slopes[i] == slopes[i - 1] {
                sx.push(xs[i]);
                sy.push(slopes[i]);
            }
        }
        let mut pts: Vec<(f64, f64)> = sx.into_iter().zip(sy).collect();
        pts.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
        let px: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let py: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let mut signal = Self::from_slope(ys[0], &px, &py, &jumps, Regularity::C01)?;
        // keep the exact node values of u rather than the re-integrated ones
        let u_exact = signal.u.map(|x, _| interp(xs, ys, x));
        signal.u = u_exact;
        Ok(signal)
    }

    /// Smooth control sampled from closed forms for u and u′.
    pub fn from_fn(
        horizon: f64,
        n: usize,
        u: impl Fn(f64) -> f64,
        uprime: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let uf = SampledFunction::from_fn(0.0, horizon, n, u)?;
        let pf = SampledFunction::from_fn(0.0, horizon, n, uprime)?;
        Self::new(uf, pf, Vec::new(), Regularity::C1)
    }

    pub fn zero(horizon: f64) -> Result<Self> {
        Self::from_fn(horizon, 1, |_| 0.0, |_| 0.0)
    }

    pub fn horizon(&self) -> f64 {
        self.u.domain().1
    }

    pub fn u(&self) -> &SampledFunction {
        &self.u
    }

    pub fn uprime(&self) -> &SampledFunction {
        &self.uprime
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        self.u.evaluate(t)
    }

    pub fn slope(&self, t: f64, side: Side) -> Result<f64> {
        let w = Self::half_width(self.horizon());
        let i = self.jumps.partition_point(|&j| j < t - 2.0 * w);
        if let Some(&b) = self.jumps.get(i) {
            if (t - b).abs() <= 2.0 * w {
                let x = match side {
                    Side::Left => b - w,
                    Side::Right => b + w,
                };
                return Ok(self.uprime.at(x));
            }
        }
        self.uprime.evaluate(t)
    }
}

/// Front speed selected by Griffith's criterion for trace slope `fp`.
pub fn griffith_speed(fp: f64, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::InvalidToughness(kappa));
    }
    let a = 2.0 * fp * fp;
    Ok(((a - kappa) / (a + kappa)).max(0.0))
}

/// The trace slope magnitude producing speed `v`; inverse of [`griffith_speed`]
/// on `(0, 1)`. The limit `v = 0` gives the threshold value √(κ/2).
pub fn speed_to_fprime_magnitude(v: f64, kappa: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&v) {
        return Err(Error::SpeedOutOfRange(v));
    }
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::InvalidToughness(kappa));
    }
    Ok((kappa * (1.0 + v) / (2.0 * (1.0 - v))).sqrt())
}

/// Dynamic energy release rate at the front.
pub fn energy_release_rate(speed: f64, slope: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&speed) {
        return Err(Error::SpeedOutOfRange(speed));
    }
    Ok(0.5 * (1.0 - speed * speed) * slope * slope)
}

/// One named check with its residual.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CheckReport {
    pub checks: Vec<Check>,
}

impl CheckReport {
    fn add(&mut self, name: &'static str, residual: f64, tol: f64) {
        self.checks.push(Check { name, residual, passed: residual <= tol });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

/// Compatibility of the initial data with the control at t = 0.
pub fn check_initial_compatibility(
    state: &InitialState,
    u0: f64,
    uprime0: f64,
    kappa: &Toughness,
    tol: f64,
) -> Result<CheckReport> {
    let mut report = CheckReport::default();
    let l = state.ell0;
    report.add("y0(0) = u(0)", (state.y0.at(0.0) - u0).abs(), tol);
    report.add("y0(l0) = 0", state.y0.at(l).abs(), tol);
    if state.regularity == Regularity::C1 {
        report.add("y1(0) = u'(0)", (state.y1.at(0.0) - uprime0).abs(), tol);
        let d0 = state.y0_slope.at(l);
        let y1 = state.y1.at(l);
        let a = 0.5 * (y1 - d0).powi(2);
        let k = kappa.at(l)?;
        let speed = ((a - k) / (a + k)).max(0.0);
        report.add("y1(l0) = -l'(0) y0'(l0)", (y1 + speed * d0).abs(), tol);
    }
    Ok(report)
}

/// Passive or active classification of a target at the front.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinalClass {
    /// Terminal front speed.
    pub alpha: f64,
    pub passive: bool,
    /// Both readings fit; resolved as passive.
    pub ambiguous: bool,
}

pub fn classify_final_state(target: &TargetState, kappa: &Toughness, tol: f64) -> Result<FinalClass> {
    let l = target.ell0;
    let d = target.y0_slope.at(l);
    let y1 = target.y1.at(l);
    let k = kappa.at(l)?;
    let passive = y1.abs() <= tol;
    let active_alpha = if 2.0 * k < d * d { Some((1.0 - 2.0 * k / (d * d)).sqrt()) } else { None };
    let active = active_alpha.map_or(false, |a| (y1 + a * d).abs() <= tol);
    match (passive, active) {
        (true, _) => Ok(FinalClass { alpha: 0.0, passive: true, ambiguous: active }),
        (false, true) => Ok(FinalClass { alpha: active_alpha.unwrap(), passive: false, ambiguous: false }),
        (false, false) => Err(Error::IncompatibleTarget(format!(
            "ybar1(l) = {y1} matches neither 0 nor -alpha ybar0'(l) with ybar0'(l) = {d}, kappa = {k}"
        ))),
    }
}

/// Result of testing |ȳ₁ + ȳ₀′|² ≤ 2κ along the target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampingReport {
    pub passed: bool,
    /// Largest value of |ȳ₁ + ȳ₀′|² − 2κ; non-positive when passed.
    pub worst_violation: f64,
    pub worst_x: f64,
}

/// `kappa_along(x)` is the toughness at the point where the characteristic
/// through (T, x) left the front.
pub fn check_damping_bound(
    target: &TargetState,
    kappa_along: &SampledFunction,
    tol: f64,
) -> Result<DampingReport> {
    let part = target.damping_part();
    let mut worst = f64::NEG_INFINITY;
    let mut worst_x = 0.0;
    for (&x, &v) in part.abscissae().iter().zip(part.values()) {
        let excess = v * v - 2.0 * kappa_along.evaluate(x)?;
        if excess > worst {
            worst = excess;
            worst_x = x;
        }
    }
    Ok(DampingReport { passed: worst <= tol, worst_violation: worst, worst_x })
}

/// Admissibility of a target at the front: ȳ₀(ℓ̄₀) = 0 and the passive or
/// active terminal condition.
pub fn check_target(target: &TargetState, kappa: &Toughness, tol: f64) -> Result<CheckReport> {
    let mut report = CheckReport::default();
    let l = target.ell0;
    report.add("ybar0(lbar0) = 0", target.y0.at(l).abs(), tol);
    let d = target.y0_slope.at(l);
    let y1 = target.y1.at(l);
    let k = kappa.at(l)?;
    let mut residual = y1.abs();
    if 2.0 * k < d * d {
        let alpha = (1.0 - 2.0 * k / (d * d)).sqrt();
        residual = residual.min((y1 + alpha * d).abs());
    }
    report.add("ybar1(lbar0) = -alpha ybar0'(lbar0)", residual, tol);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn griffith_speed_values() {
        assert_eq!(griffith_speed(0.0, 1.0).unwrap(), 0.0);
        assert_eq!(griffith_speed(1.0, 2.0).unwrap(), 0.0);
        assert!(close(griffith_speed(1.5_f64.sqrt(), 1.0).unwrap(), 0.5, 1e-15));
        assert!(matches!(griffith_speed(1.0, 0.0), Err(Error::InvalidToughness(_))));
    }

    #[test]
    fn fprime_magnitude_values() {
        assert!(close(speed_to_fprime_magnitude(0.0, 1.0).unwrap(), 0.5_f64.sqrt(), 1e-15));
        assert!(close(speed_to_fprime_magnitude(0.5, 1.0).unwrap(), 1.224744871391589, 1e-14));
        assert!(close(speed_to_fprime_magnitude(1.0 / 3.0, 3.0).unwrap(), 3.0_f64.sqrt(), 1e-14));
        assert!(matches!(speed_to_fprime_magnitude(1.0, 1.0), Err(Error::SpeedOutOfRange(_))));
    }

    #[test]
    fn energy_release_values() {
        assert!(energy_release_rate(1.0 - 1e-15, 5.0).unwrap() < 1e-12);
        assert_eq!(energy_release_rate(0.0, 1.0).unwrap(), 0.5);
        assert!(close(energy_release_rate(0.6, 2.0).unwrap(), 1.28, 1e-14));
        assert!(energy_release_rate(-0.1, 1.0).is_err());
    }

    #[test]
    fn front_speed_is_one_sided_at_nodes() {
        let f = FrontCurve::new(vec![0.0, 1.0, 2.0], vec![1.0, 1.5, 1.5], vec![0.5, 0.0, 0.0], vec![0.5, 0.5, 0.0])
            .unwrap();
        assert_eq!(f.speed(1.0, Side::Left), 0.5);
        assert_eq!(f.speed(1.0, Side::Right), 0.0);
        assert_eq!(f.speed(0.5, Side::Right), 0.5);
        assert!(close(f.tau_minus_inverse(0.5).unwrap(), 2.0, 1e-15));
        let (echo, t) = f.echo(2.5).unwrap();
        assert!(close(t, 1.0, 1e-15) && close(echo, -0.5, 1e-15));
    }

    #[test]
    fn piecewise_linear_control_has_jumps_at_corners() {
        let u = SampledFunction::new(vec![0.0, 1.0, 3.0], vec![0.0, 1.0, 0.0]).unwrap();
        let c = ControlSignal::piecewise_linear(u).unwrap();
        assert_eq!(c.jumps(), &[1.0]);
        assert!(close(c.slope(1.0, Side::Left).unwrap(), 1.0, 1e-12));
        assert!(close(c.slope(1.0, Side::Right).unwrap(), -0.5, 1e-12));
        assert!(close(c.value(2.0).unwrap(), 0.5, 1e-12));
        assert!(close(c.slope(0.5, Side::Right).unwrap(), 1.0, 1e-12));
    }
}
