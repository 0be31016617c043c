//! Forward solver for the front ℓ and the outgoing trace f, and
//! reconstruction of the displacement field.
//!
//! The displacement is written as y(t, x) = g(t + x) + f(t − x). The
//! outgoing trace f is fixed on [−ℓ₀, 0] by the initial data and beyond by
//! the boundary control and reflections at the front; the front speed is
//! given by Griffith's criterion applied to f′(t − ℓ(t)).

use crate::error::{Error, Result};
use crate::func1d::{SampledFunction, Side, MIN_SPACING};
use crate::model::{griffith_speed, ControlSignal, FrontCurve, InitialState, Toughness, DEFAULT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Euler,
    Heun,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub h: f64,
    pub scheme: Scheme,
    pub speed_clamp_eps: f64,
    /// Give up on the initial branch after this much time.
    pub horizon_cap: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { h: 1e-3, scheme: Scheme::Heun, speed_clamp_eps: 1e-9, horizon_cap: 100.0 }
    }
}

impl SolverConfig {
    pub fn with_step(h: f64) -> Self {
        Self { h, ..Self::default() }
    }

    pub fn validate(&self, ell0: f64) -> Result<()> {
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::InvalidConfig(format!("h must be positive, got {}", self.h)));
        }
        if self.h > ell0 / 10.0 * (1.0 + 1e-12) {
            return Err(Error::InvalidConfig(format!(
                "h = {} exceeds l0 / 10 = {}",
                self.h,
                ell0 / 10.0
            )));
        }
        if !(self.speed_clamp_eps > 0.0 && self.speed_clamp_eps < 1e-3) {
            return Err(Error::InvalidConfig(format!(
                "speed_clamp_eps must lie in (0, 1e-3), got {}",
                self.speed_clamp_eps
            )));
        }
        Ok(())
    }

    /// Tolerance for compatibility of sampled data.
    pub fn data_tol(&self) -> f64 {
        DEFAULT_TOL.max(10.0 * self.h)
    }
}

/// Evaluator for the outgoing trace f, the incoming trace g and their slopes
/// given a front and, for s > 0, a control.
#[derive(Debug, Clone, Copy)]
pub struct Trace<'a> {
    pub initial: &'a InitialState,
    pub control: Option<&'a ControlSignal>,
    pub front: &'a FrontCurve,
}

impl<'a> Trace<'a> {
    fn data_tol(&self) -> f64 {
        1e-9 * self.initial.ell0.max(1.0)
    }

    /// ½(y₁ − y₀′)(−s) for s ∈ [−ℓ₀, 0].
    pub fn seed_outgoing(&self, s: f64) -> Result<f64> {
        let x = -s;
        let d = self.initial.y0_slope().evaluate(x)?;
        let v = self.initial.y1.evaluate(x)?;
        Ok(0.5 * (v - d))
    }

    /// ½(y₀′ + y₁)(s) for s ∈ [0, ℓ₀].
    pub fn seed_incoming(&self, s: f64) -> Result<f64> {
        let d = self.initial.y0_slope().evaluate(s)?;
        let v = self.initial.y1.evaluate(s)?;
        Ok(0.5 * (d + v))
    }

    fn control(&self, s: f64) -> Result<&'a ControlSignal> {
        self.control.ok_or_else(|| {
            Error::Domain { x: s, lo: -self.initial.ell0, hi: 0.0 }
        })
    }

    /// f′(s), one-sided at points where it jumps.
    pub fn slope(&self, s: f64, side: Side) -> Result<f64> {
        let l0 = self.initial.ell0;
        if s < -l0 - self.data_tol() {
            return Err(Error::Domain { x: s, lo: -l0, hi: f64::INFINITY });
        }
        if s < 0.0 || (s == 0.0 && side == Side::Left) {
            return self.seed_outgoing(s);
        }
        let up = self.control(s)?.slope(s, side)?;
        Ok(up - self.incoming_slope(s, side)?)
    }

    /// g′(s), one-sided at points where it jumps.
    pub fn incoming_slope(&self, s: f64, side: Side) -> Result<f64> {
        let l0 = self.initial.ell0;
        if s < l0 || (s == l0 && side == Side::Left) {
            return self.seed_incoming(s);
        }
        let (echo, t) = self.front.echo(s)?;
        let v = self.front.speed(t, side);
        Ok(-self.slope(echo, side)? * (1.0 - v) / (1.0 + v))
    }

    /// f(s), normalized by f(0) = 0.
    pub fn value(&self, s: f64) -> Result<f64> {
        let l0 = self.initial.ell0;
        if s < -l0 - self.data_tol() {
            return Err(Error::Domain { x: s, lo: -l0, hi: f64::INFINITY });
        }
        if s <= 0.0 {
            let x = -s;
            let y0 = &self.initial.y0;
            return Ok(0.5 * (y0.evaluate(x)? - y0.at(0.0))
                - 0.5 * self.initial.y1.definite_integral(0.0, x)?);
        }
        Ok(self.control(s)?.value(s)? - self.incoming_value(s)?)
    }

    /// g(s).
    pub fn incoming_value(&self, s: f64) -> Result<f64> {
        let l0 = self.initial.ell0;
        let y0 = &self.initial.y0;
        if s < l0 {
            return Ok(y0.at(0.0) + 0.5 * (y0.evaluate(s)? - y0.at(0.0))
                + 0.5 * self.initial.y1.definite_integral(0.0, s)?);
        }
        let (echo, _) = self.front.echo(s)?;
        Ok(-self.value(echo)?)
    }
}

/// f′ on [−ℓ₀, ℓ₀] from the data and the control, sampled on the data grid.
pub fn seed_trace(initial: &InitialState, control: &ControlSignal) -> Result<SampledFunction> {
    let l0 = initial.ell0;
    let front = FrontCurve::new(vec![0.0], vec![l0], vec![0.0], vec![0.0])?;
    let trace = Trace { initial, control: Some(control), front: &front };
    let mut grid: Vec<f64> = initial
        .y0
        .abscissae()
        .iter()
        .chain(initial.y1.abscissae())
        .flat_map(|&x| [-x, x])
        .collect();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup_by(|a, b| (*a - *b).abs() < 2.0 * MIN_SPACING * l0);
    let values = grid
        .iter()
        .map(|&s| trace.slope(s, Side::Right).or_else(|_| trace.slope(s, Side::Left)))
        .collect::<Result<Vec<_>>>()?;
    SampledFunction::new(grid, values)
}

/// Terminal-time displacement and its derivatives on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSlice {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub dty: Vec<f64>,
    pub dxy: Vec<f64>,
}

/// A complete simulated trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionRecord {
    pub front: FrontCurve,
    /// Trace abscissae τ₋(tₙ) of the front nodes.
    pub trace_nodes: Vec<f64>,
    pub trace: SampledFunction,
    pub trace_slope: SampledFunction,
    pub control: ControlSignal,
    pub initial: InitialState,
    pub toughness: Toughness,
    /// Times at which the front crossed a discontinuity of the trace slope.
    pub events: Vec<f64>,
    pub speed_clamp_eps: f64,
}

impl SolutionRecord {
    pub fn trace_model(&self) -> Trace<'_> {
        Trace { initial: &self.initial, control: Some(&self.control), front: &self.front }
    }

    pub fn horizon(&self) -> f64 {
        self.front.end()
    }

    /// y, ∂ₜy and ∂ₓy at time t on the given points of [0, ℓ(t)].
    pub fn reconstruct(&self, t: f64, xs: &[f64]) -> Result<StateSlice> {
        let (t0, t1) = (self.front.start(), self.front.end());
        if t < t0 - 1e-12 || t > t1 + 1e-9 * t1.max(1.0) {
            return Err(Error::Domain { x: t, lo: t0, hi: t1 });
        }
        let ell = self.front.position(t);
        let tr = self.trace_model();
        let mut out = StateSlice { x: xs.to_vec(), y: vec![], dty: vec![], dxy: vec![] };
        for &x in xs {
            if x < -1e-12 || x > ell + 1e-9 * ell.max(1.0) {
                return Err(Error::Domain { x, lo: 0.0, hi: ell });
            }
            let x = x.clamp(0.0, ell);
            // limits from inside the interval: x -> 0+ at the boundary, x -> x- elsewhere
            let (fs, gs) = if x == 0.0 { (Side::Left, Side::Right) } else { (Side::Right, Side::Left) };
            let fo = tr.slope(t - x, fs)?;
            let gi = tr.incoming_slope(t + x, gs)?;
            out.y.push(tr.incoming_value(t + x)? + tr.value(t - x)?);
            out.dty.push(fo + gi);
            out.dxy.push(gi - fo);
        }
        Ok(out)
    }

    /// |ℓ′ₙ − griffith_speed(f′(τ₋(tₙ)), κ(ℓₙ))| at every node, after the
    /// speed clamp.
    pub fn griffith_residuals(&self) -> Result<Vec<f64>> {
        let tr = self.trace_model();
        let cap = 1.0 - self.speed_clamp_eps;
        let mut out = Vec::with_capacity(self.front.len());
        for i in 0..self.front.len() {
            let s = self.trace_nodes[i];
            let ell = self.front.positions()[i];
            let v = griffith_speed(tr.slope(s, Side::Right)?, self.toughness.at(ell)?)?.min(cap);
            out.push((self.front.speeds()[i] - v).abs());
        }
        Ok(out)
    }
}

/// Result of marching until the front first meets the corner characteristic.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialBranchResult {
    pub t_star: f64,
    /// Equal to `t_star`.
    pub ell_star: f64,
    /// Left-limit speed at `t_star`.
    pub ell_star_prime: f64,
    /// False for C⁰,¹ data, where the terminal speed is not a derivative.
    pub authoritative: bool,
    pub front: FrontCurve,
}

struct March<'a> {
    initial: &'a InitialState,
    control: Option<&'a ControlSignal>,
    kappa: &'a Toughness,
    cfg: SolverConfig,
    front: FrontCurve,
    trace_nodes: Vec<f64>,
    pending: Vec<f64>,
    events: Vec<f64>,
}

impl<'a> March<'a> {
    fn new(
        initial: &'a InitialState,
        control: Option<&'a ControlSignal>,
        kappa: &'a Toughness,
        cfg: SolverConfig,
        breakpoints: Vec<f64>,
    ) -> Result<Self> {
        let mut m = Self {
            initial,
            control,
            kappa,
            cfg,
            front: FrontCurve::empty(),
            trace_nodes: Vec::new(),
            pending: Vec::new(),
            events: Vec::new(),
        };
        for b in breakpoints {
            m.add_breakpoint(b);
        }
        let l0 = initial.ell0;
        // the seed slope on [-l0, 0] does not consult the front
        let v = m.speed(l0, -l0, Side::Right)?;
        m.front.push(0.0, l0, v, v);
        m.trace_nodes.push(-l0);
        Ok(m)
    }

    fn tiny(&self) -> f64 {
        1e-12 * self.initial.ell0.max(1.0)
    }

    fn add_breakpoint(&mut self, b: f64) {
        let tiny = self.tiny();
        let i = self.pending.partition_point(|&p| p < b);
        let near = |j: usize| self.pending.get(j).map_or(false, |&p| (p - b).abs() <= tiny);
        if near(i) || (i > 0 && near(i - 1)) {
            return;
        }
        self.pending.insert(i, b);
    }

    fn speed(&self, ell: f64, s: f64, side: Side) -> Result<f64> {
        let trace = Trace { initial: self.initial, control: self.control, front: &self.front };
        let fp = trace.slope(s, side)?;
        let v = griffith_speed(fp, self.kappa.at(ell)?)?;
        Ok(v.min(1.0 - self.cfg.speed_clamp_eps))
    }

    /// Position after a step of length `dt` from the last node, with every
    /// trace query clamped to lie before the breakpoint `b`.
    fn advance(&self, dt: f64, b: Option<f64>) -> Result<f64> {
        let n = self.front.len() - 1;
        let t = self.front.times()[n];
        let ell = self.front.positions()[n];
        let k1 = self.front.speeds()[n];
        match self.cfg.scheme {
            Scheme::Euler => Ok(ell + dt * k1),
            Scheme::Heun => {
                let lp = ell + dt * k1;
                let sp = t + dt - lp;
                let (sq, side) = match b {
                    Some(b) if sp >= b => (b, Side::Left),
                    _ => (sp, Side::Right),
                };
                let k2 = self.speed(lp, sq, side)?;
                Ok(ell + 0.5 * dt * (k1 + k2))
            }
        }
    }

    /// Step length in (0, dt] at which t − ℓ(t) reaches `b`.
    fn crossing(&self, dt: f64, b: f64) -> Result<f64> {
        let n = self.front.len() - 1;
        let t = self.front.times()[n];
        let phi = |d: f64| -> Result<f64> { Ok(t + d - self.advance(d, Some(b))? - b) };
        let (mut lo, mut hi) = (0.0, dt);
        let (mut flo, mut fhi) = (self.trace_nodes[n] - b, phi(dt)?);
        if fhi <= 0.0 {
            return Ok(dt);
        }
        let mut last_side = 0;
        for _ in 0..100 {
            let mid = (lo * fhi - hi * flo) / (fhi - flo);
            let mid = if mid > lo && mid < hi { mid } else { 0.5 * (lo + hi) };
            let fm = phi(mid)?;
            if fm.abs() <= 1e-15 * b.abs().max(1.0) || hi - lo <= 1e-15 * dt.max(1.0) {
                return Ok(mid);
            }
            if fm < 0.0 {
                lo = mid;
                flo = fm;
                if last_side == -1 {
                    fhi *= 0.5;
                }
                last_side = -1;
            } else {
                hi = mid;
                fhi = fm;
                if last_side == 1 {
                    flo *= 0.5;
                }
                last_side = 1;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Marches to `t_end`, or until the breakpoint `stop` is reached.
    /// Returns whether `stop` was reached.
    fn run(&mut self, t_end: f64, stop: Option<f64>) -> Result<bool> {
        let h = self.cfg.h;
        let tiny = self.tiny();
        let mut next = 0;
        loop {
            let n = self.front.len() - 1;
            let t = self.front.times()[n];
            let s = self.trace_nodes[n];
            if t >= t_end - 1e-12 * t_end.max(1.0) {
                return Ok(false);
            }
            let mut dt = (t_end - t).min(h);
            if t_end - (t + dt) < 1e-6 * h {
                dt = t_end - t;
            }
            while next < self.pending.len() && self.pending[next] <= s + tiny {
                next += 1;
            }
            let b = self.pending.get(next).copied();
            let ell1 = self.advance(dt, b)?;
            let s1 = t + dt - ell1;
            if !(s1 > s) {
                return Err(Error::StepTooLarge(format!(
                    "t - l(t) stopped increasing at t = {t} (speed clamp too loose for h = {h})"
                )));
            }
            match b {
                Some(b) if s1 >= b - tiny => {
                    let d = if (s1 - b).abs() <= tiny { dt } else { self.crossing(dt, b)? };
                    let d = d.max(1e-3 * h).min(dt);
                    // place the node exactly on the characteristic, keeping the integrated length
                    let ell = self.advance(d, Some(b))?;
                    let t1 = (b + ell).clamp(t + 1e-3 * d, (t + dt + tiny).min(t_end));
                    let ell = t1 - b;
                    let vl = self.speed(ell, b, Side::Left)?;
                    let vr = if stop == Some(b) { vl } else { self.speed(ell, b, Side::Right)? };
                    self.front.push(t1, ell, vl, vr);
                    self.trace_nodes.push(b);
                    self.events.push(t1);
                    next += 1;
                    if stop == Some(b) {
                        return Ok(true);
                    }
                    self.add_breakpoint(t1 + ell);
                }
                _ => {
                    let v = self.speed(ell1, s1, Side::Right)?;
                    self.front.push(t + dt, ell1, v, v);
                    self.trace_nodes.push(s1);
                }
            }
        }
    }
}

/// Simulates the front and trace on [0, T], with T the control horizon.
pub fn solve_front(
    initial: &InitialState,
    control: &ControlSignal,
    kappa: &Toughness,
    cfg: &SolverConfig,
) -> Result<SolutionRecord> {
    cfg.validate(initial.ell0)?;
    let tol = cfg.data_tol();
    let gap = (initial.y0.evaluate(0.0)? - control.value(0.0)?).abs();
    if gap > tol {
        return Err(Error::IncompatibleData(format!("y0(0) differs from u(0) by {gap}")));
    }
    let tip = initial.y0.evaluate(initial.ell0)?.abs();
    if tip > tol {
        return Err(Error::IncompatibleData(format!("y0(l0) = {tip} is not zero")));
    }
    let horizon = control.horizon();
    let mut breakpoints = vec![0.0, initial.ell0];
    breakpoints.extend_from_slice(control.jumps());
    let mut march = March::new(initial, Some(control), kappa, *cfg, breakpoints)?;
    march.run(horizon, None)?;
    let March { front, trace_nodes, events, .. } = march;

    let trace_model = Trace { initial, control: Some(control), front: &front };
    let mut grid = trace_nodes.clone();
    let s_end = *grid.last().unwrap();
    let m = ((horizon - s_end) / cfg.h).ceil().max(1.0) as usize;
    for i in 1..=m {
        grid.push(s_end + (horizon - s_end) * i as f64 / m as f64);
    }
    let gap = 2.0 * MIN_SPACING * (horizon + initial.ell0);
    grid.dedup_by(|a, b| *a - *b < gap);
    let slopes = grid.iter().map(|&s| trace_model.slope(s, Side::Right)).collect::<Result<Vec<_>>>()?;
    let values = grid.iter().map(|&s| trace_model.value(s)).collect::<Result<Vec<_>>>()?;
    let trace = SampledFunction::new(grid.clone(), values)?;
    let trace_slope = SampledFunction::new(grid, slopes)?;

    Ok(SolutionRecord {
        front,
        trace_nodes,
        trace,
        trace_slope,
        control: control.clone(),
        initial: initial.clone(),
        toughness: kappa.clone(),
        events,
        speed_clamp_eps: cfg.speed_clamp_eps,
    })
}

/// Marches the front on the data alone until t − ℓ(t) = 0.
pub fn solve_initial_branch(
    initial: &InitialState,
    kappa: &Toughness,
    cfg: &SolverConfig,
) -> Result<InitialBranchResult> {
    cfg.validate(initial.ell0)?;
    let mut march = March::new(initial, None, kappa, *cfg, vec![0.0])?;
    if !march.run(cfg.horizon_cap, Some(0.0))? {
        return Err(Error::HorizonExceeded { horizon: cfg.horizon_cap });
    }
    let front = march.front;
    let n = front.len() - 1;
    let t_star = front.times()[n];
    Ok(InitialBranchResult {
        t_star,
        ell_star: t_star,
        ell_star_prime: front.left_speeds()[n],
        authoritative: initial.regularity == crate::model::Regularity::C1,
        front,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Regularity;

    fn data(y0: impl Fn(f64) -> f64, y1: impl Fn(f64) -> f64) -> InitialState {
        let a = SampledFunction::from_fn(0.0, 1.0, 100, y0).unwrap();
        let b = SampledFunction::from_fn(0.0, 1.0, 100, y1).unwrap();
        InitialState::new(1.0, a, b, Regularity::C01).unwrap()
    }

    #[test]
    fn seed_trace_constant_velocity() {
        let init = data(|_| 0.0, |_| 2.0);
        let u = ControlSignal::zero(3.0).unwrap();
        let f = seed_trace(&init, &u).unwrap();
        assert!((f.evaluate(-0.5).unwrap() - 1.0).abs() < 1e-12);
        assert!((f.evaluate(-1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((f.evaluate(0.5).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn seed_trace_linear_displacement() {
        let init = data(|x| 1.0 - x, |_| 0.0);
        let u = ControlSignal::from_fn(3.0, 10, |_| 1.0, |_| 0.0).unwrap();
        let f = seed_trace(&init, &u).unwrap();
        assert!((f.evaluate(-0.3).unwrap() - 0.5).abs() < 1e-12);
        assert!((f.evaluate(0.7).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn seed_trace_rightward_wave_cancels() {
        // y1 = y0' and u' = (y0' + y1)/2 at the boundary
        let init = data(|x| (x - 1.0).powi(2), |x| 2.0 * (x - 1.0));
        let u = ControlSignal::from_fn(1.0, 1000, |t| (t - 1.0).powi(2), |t| 2.0 * (t - 1.0)).unwrap();
        let f = seed_trace(&init, &u).unwrap();
        // only the O(h) endpoint error of the sampled derivative remains
        assert!(f.max_abs() < 1e-2);
    }

    #[test]
    fn reflection_recursion_doubles_slope() {
        let init = InitialState::at_rest(1.0, Regularity::C01).unwrap();
        let u = ControlSignal::from_fn(3.0, 3, |t| t, |_| 1.0).unwrap();
        let sol = solve_front(&init, &u, &Toughness::constant(10.0).unwrap(), &SolverConfig::default())
            .unwrap();
        let tr = sol.trace_model();
        assert!(sol.front.positions().iter().all(|&l| (l - 1.0).abs() < 1e-12));
        assert!((tr.slope(0.5, Side::Right).unwrap() - 1.0).abs() < 1e-12);
        assert!((tr.slope(1.9, Side::Right).unwrap() - 1.0).abs() < 1e-12);
        assert!((tr.slope(2.5, Side::Right).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_large_step() {
        let init = InitialState::at_rest(1.0, Regularity::C01).unwrap();
        let cfg = SolverConfig::with_step(0.2);
        let err = solve_initial_branch(&init, &Toughness::constant(1.0).unwrap(), &cfg).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }
}
