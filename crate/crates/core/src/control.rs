//! Synthesis of a boundary control steering an initial state to a target.
//!
//! The front is prescribed on all of [0, T]: the initial branch up to t★,
//! an inflation segment on [t★, t̄★] and a final branch on [t̄★, T]. The
//! outgoing trace f′ is then fixed stage by stage in the trace variable
//! s = t − ℓ(t):
//!
//! 1. on (0, τ₋(t̄★)] so that Griffith's criterion produces the prescribed
//!    inflation speed;
//! 2. on (τ₋(t̄★), τ₋(T)] so that the reflected wave arriving at time T is
//!    the incoming part of the target;
//! 3. on (τ₋(T), T] equal to the outgoing part of the target.
//!
//! The control slope follows from u′ = f′ + g′, where g′ is the incoming
//! trace produced by the data and by reflection at the prescribed front.

use crate::branch::{static_branch, BranchResult};
use crate::error::{Error, Result};
use crate::forward::{solve_front, solve_initial_branch, InitialBranchResult, SolutionRecord, SolverConfig};
use crate::func1d::{SampledFunction, Side};
use crate::model::{
    check_initial_compatibility, check_target, speed_to_fprime_magnitude, ControlSignal,
    FrontCurve, InitialState, Regularity, TargetState, Toughness,
};

/// Fastest speed used on a synthesized inflation segment.
pub const MAX_INFLATION_SPEED: f64 = 1.0 - 1e-4;

/// Shape of the inflation segment on [t★, t̄★].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageOneCase {
    /// ℓ★ = ℓ̄★: the front rests.
    StaticMatch,
    /// C⁰,¹ synthesis: constant speed.
    Linear,
    /// Both end speeds positive.
    A,
    /// Only the final end speed positive.
    B,
    /// Only the initial end speed positive.
    C,
    /// Both end speeds zero.
    D,
}

impl StageOneCase {
    pub fn name(self) -> &'static str {
        match self {
            StageOneCase::StaticMatch => "static_match",
            StageOneCase::Linear => "linear",
            StageOneCase::A => "a",
            StageOneCase::B => "b",
            StageOneCase::C => "c",
            StageOneCase::D => "d",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InflationPlan {
    pub t_star: f64,
    pub ell_star: f64,
    pub ell_star_prime: f64,
    pub t_bar_star: f64,
    pub ell_bar_star: f64,
    pub ell_bar_star_prime: f64,
    /// Mean speed (ℓ̄★ − ℓ★)/(t̄★ − t★).
    pub v: f64,
    pub t_circ: f64,
    /// Half-width of the rest plateau around `t_circ`; zero for C⁰,¹ plans.
    pub delta: f64,
    pub case: StageOneCase,
    pub front_segment: FrontCurve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisReport {
    pub control: ControlSignal,
    pub plan: InflationPlan,
    pub branch: BranchResult,
    pub initial_branch: InitialBranchResult,
    /// (0, τ₋(t̄★)], (τ₋(t̄★), τ₋(T)], (τ₋(T), T].
    pub stage_boundaries: [(f64, f64); 3],
    /// The prescribed front on [0, T].
    pub front: FrontCurve,
    /// f′ on [0, τ₋(t̄★)].
    pub stage_one_fprime: SampledFunction,
    pub regularity: Regularity,
    /// Largest one-sided difference of u′ at the candidate jump points.
    pub max_uprime_jump: f64,
    /// Largest one-sided difference of ℓ′ at the front nodes.
    pub max_speed_jump: f64,
    /// f′ just before and just after τ₋(T), and −½(1 + α)ȳ₀′(ℓ̄₀).
    pub final_junction: (f64, f64, f64),
    initial: InitialState,
    target: TargetState,
}

impl SynthesisReport {
    fn assembly(&self) -> Assembly<'_> {
        Assembly {
            initial: &self.initial,
            target: &self.target,
            front: &self.front,
            stage1: &self.stage_one_fprime,
            s1: self.stage_boundaries[1].0,
            s2: self.stage_boundaries[2].0,
            horizon: self.branch.horizon,
        }
    }

    /// The designed outgoing trace slope f′(s).
    pub fn fprime(&self, s: f64, side: Side) -> Result<f64> {
        self.assembly().fprime(s, side)
    }

    /// The designed control slope u′(s), before sampling.
    pub fn uprime(&self, s: f64, side: Side) -> Result<f64> {
        self.assembly().uprime(s, side)
    }
}

fn sign_of(x: f64) -> Option<f64> {
    if x > 0.0 {
        Some(1.0)
    } else if x < 0.0 {
        Some(-1.0)
    } else {
        None
    }
}

/// f′ on τ₋ of a prescribed front segment, sampled at the node images.
///
/// Where the front moves, |f′| is the slope magnitude producing its speed,
/// with signs taken from `signs` (one per moving run, the last one reused).
/// Where the front rests, f′ interpolates linearly in s between the values of
/// the neighbouring runs, or the `endpoints` requirements at the ends of the
/// segment (zero if absent), clipped to the threshold band 2f′² ≤ κ.
pub fn fprime_for_prescribed_front(
    front: &FrontCurve,
    kappa: &Toughness,
    signs: &[f64],
    endpoints: (Option<f64>, Option<f64>),
) -> Result<SampledFunction> {
    let n = front.len();
    if n < 2 {
        return Err(Error::InvalidSamples("front segment needs two nodes".into()));
    }
    let s: Vec<f64> = front.tau_minus_values().to_vec();
    let ls = front.positions();
    let resting: Vec<bool> = (0..n - 1)
        .map(|i| front.speeds()[i] == 0.0 && front.left_speeds()[i + 1] == 0.0)
        .collect();
    let mut values = vec![f64::NAN; n];
    let mut fixed = vec![false; n];
    let mut run = 0usize;
    let mut i = 0;
    while i < n - 1 {
        let mut j = i;
        while j < n - 1 && resting[j] == resting[i] {
            j += 1;
        }
        if !resting[i] {
            let sign = signs.get(run).or(signs.last()).copied().unwrap_or(1.0);
            for k in i..=j {
                let v = if k == i { front.speeds()[k] } else { front.left_speeds()[k] };
                values[k] = sign * speed_to_fprime_magnitude(v, kappa.at(ls[k])?)?;
                fixed[k] = true;
            }
            run += 1;
        }
        i = j;
    }
    let mut i = 0;
    while i < n - 1 {
        if !resting[i] {
            i += 1;
            continue;
        }
        let mut j = i;
        while j < n - 1 && resting[j] {
            j += 1;
        }
        let a = if fixed[i] { values[i] } else { endpoints.0.unwrap_or(0.0) };
        let b = if fixed[j] { values[j] } else { endpoints.1.unwrap_or(0.0) };
        for k in i..=j {
            if fixed[k] {
                continue;
            }
            let w = (s[k] - s[i]) / (s[j] - s[i]);
            let cap = (kappa.at(ls[k])? / 2.0).sqrt();
            values[k] = (a + w * (b - a)).clamp(-cap, cap);
        }
        i = j;
    }
    SampledFunction::new(s, values)
}

/// Slope of the incoming trace at s given f′ and the front, one-sided.
fn incoming_slope(
    fprime: &dyn Fn(f64, Side) -> Result<f64>,
    front: &FrontCurve,
    initial: &InitialState,
    s: f64,
    side: Side,
) -> Result<f64> {
    if s < initial.ell0 || (s == initial.ell0 && side == Side::Left) {
        let d = initial.y0_slope().evaluate(s)?;
        return Ok(0.5 * (d + initial.y1.evaluate(s)?));
    }
    let (echo, t) = front.echo(s)?;
    if echo < -initial.ell0 - 1e-9 * initial.ell0.max(1.0) {
        return Err(Error::Domain { x: echo, lo: -initial.ell0, hi: s });
    }
    let v = front.speed(t, side);
    Ok(-fprime(echo, side)? * (1.0 - v) / (1.0 + v))
}

/// The control slope u′(s) for which the outgoing trace has slope f′ at s.
pub fn uprime_from_fprime(
    fprime: &dyn Fn(f64, Side) -> Result<f64>,
    front: &FrontCurve,
    initial: &InitialState,
    s: f64,
    side: Side,
) -> Result<f64> {
    Ok(fprime(s, side)? + incoming_slope(fprime, front, initial, s, side)?)
}

struct Assembly<'a> {
    initial: &'a InitialState,
    target: &'a TargetState,
    front: &'a FrontCurve,
    stage1: &'a SampledFunction,
    s1: f64,
    s2: f64,
    horizon: f64,
}

impl Assembly<'_> {
    fn fprime(&self, s: f64, side: Side) -> Result<f64> {
        let before = |b: f64| s < b || (s == b && side == Side::Left);
        if before(0.0) {
            let x = -s;
            let d = self.initial.y0_slope().evaluate(x)?;
            return Ok(0.5 * (self.initial.y1.evaluate(x)? - d));
        }
        if before(self.s1) {
            return self.stage1.evaluate(s);
        }
        if before(self.s2) {
            let t = self.front.tau_minus_inverse(s)?;
            let v = self.front.speed(t, side);
            let x = (self.front.tau_plus(t) - self.horizon).clamp(0.0, self.target.ell0);
            let d = self.target.damping_part().evaluate(x)?;
            return Ok(-0.5 * d * (1.0 + v) / (1.0 - v));
        }
        let x = (self.horizon - s).clamp(0.0, self.target.ell0);
        Ok(0.5 * (self.target.y1.evaluate(x)? - self.target.y0_slope().evaluate(x)?))
    }

    fn uprime(&self, s: f64, side: Side) -> Result<f64> {
        uprime_from_fprime(&|q, sd| self.fprime(q, sd), self.front, self.initial, s, side)
    }
}

/// Checks shared by both synthesizers; returns the initial branch.
fn preflight(
    initial: &InitialState,
    target: &TargetState,
    kappa: &Toughness,
    branch: &BranchResult,
    cfg: &SolverConfig,
    regularity: Regularity,
) -> Result<InitialBranchResult> {
    cfg.validate(initial.ell0)?;
    let tol = cfg.data_tol();
    let report = check_initial_compatibility(
        initial,
        initial.y0.evaluate(0.0)?,
        initial.y1.evaluate(0.0)?,
        kappa,
        tol,
    )?;
    let wanted: &[&str] = match regularity {
        Regularity::C01 => &["y0(l0) = 0"],
        Regularity::C1 => &["y0(l0) = 0", "y1(l0) = -l'(0) y0'(l0)"],
    };
    if let Some(c) = report.failures().into_iter().find(|c| wanted.contains(&c.name)) {
        return Err(Error::IncompatibleData(format!("{} fails by {}", c.name, c.residual)));
    }
    let t_report = check_target(target, kappa, tol)?;
    let t_wanted: &[&str] = match regularity {
        Regularity::C01 => &["ybar0(lbar0) = 0"],
        Regularity::C1 => &["ybar0(lbar0) = 0", "ybar1(lbar0) = -alpha ybar0'(lbar0)"],
    };
    if let Some(c) = t_report.failures().into_iter().find(|c| t_wanted.contains(&c.name)) {
        return Err(Error::IncompatibleTarget(format!("{} fails by {}", c.name, c.residual)));
    }
    if (branch.front.end() - branch.horizon).abs() > 1e-9 * branch.horizon.max(1.0) {
        return Err(Error::InvalidConfig("branch does not end at the horizon".into()));
    }
    let ib = solve_initial_branch(initial, kappa, cfg)?;
    let gain = branch.ell_bar_star - ib.ell_star;
    if gain < -1e-12 * ib.ell_star.max(1.0) {
        return Err(Error::InfeasibleTime(format!(
            "final branch starts at length {} below the initial branch end {}",
            branch.ell_bar_star, ib.ell_star
        )));
    }
    if !(branch.ell_bar_star < branch.t_bar_star) {
        return Err(Error::InfeasibleTime(format!(
            "final branch start length {} is not below its start time {}",
            branch.ell_bar_star, branch.t_bar_star
        )));
    }
    Ok(ib)
}

/// Node times at spacing at most `h` through the given increasing knots.
fn refine(knots: &[f64], h: f64) -> Vec<f64> {
    let mut out = vec![knots[0]];
    for w in knots.windows(2) {
        let len = w[1] - w[0];
        if len <= 0.0 {
            continue;
        }
        let m = (len / h).ceil().max(1.0) as usize;
        for i in 1..m {
            out.push(w[0] + len * i as f64 / m as f64);
        }
        out.push(w[1]);
    }
    out
}

/// Front with a piecewise-linear speed through `knots` (time, speed),
/// integrated exactly from `ell_start`.
fn front_from_speed_knots(
    knots: &[(f64, f64)],
    ell_start: f64,
    left_start: f64,
    right_end: f64,
    h: f64,
) -> Result<FrontCurve> {
    let kt: Vec<f64> = knots.iter().map(|k| k.0).collect();
    let kv: Vec<f64> = knots.iter().map(|k| k.1).collect();
    let times = refine(&kt, h);
    let speed = |t: f64| crate::func1d::interp(&kt, &kv, t);
    let mut front = FrontCurve::empty();
    let mut ell = ell_start;
    let n = times.len();
    for (i, &t) in times.iter().enumerate() {
        if i > 0 {
            let t0 = times[i - 1];
            ell += 0.5 * (t - t0) * (speed(t0) + speed(t));
        }
        let v = speed(t);
        let left = if i == 0 { left_start } else { v };
        let right = if i == n - 1 { right_end } else { v };
        front.push(t, ell, left, right);
    }
    Ok(front)
}

fn static_segment(t0: f64, t1: f64, ell: f64, left: f64, right: f64, h: f64) -> Result<FrontCurve> {
    front_from_speed_knots(&[(t0, 0.0), (t1, 0.0)], ell, left, right, h)
}

/// Junction value of f′ at τ₋(t̄★) demanded by the final branch.
fn junction_value(target: &TargetState, branch: &BranchResult) -> Result<f64> {
    let v = branch.ell_bar_star_prime;
    Ok(-0.5 * target.damping_part().evaluate(0.0)? * (1.0 + v) / (1.0 - v))
}

/// Points where u′ may jump or kink: the data boundary ℓ₀, the stage
/// boundaries, and both characteristic images of every front corner.
fn candidate_points(front: &FrontCurve, initial: &InitialState, corners: &[f64], s1: f64, s2: f64, horizon: f64) -> Vec<f64> {
    let mut pts = vec![initial.ell0, s1, s2];
    for &t in corners {
        pts.push(front.tau_minus(t));
        pts.push(front.tau_plus(t));
    }
    for p in [0.0, s1, s2] {
        if let Ok(t) = front.tau_minus_inverse(p) {
            pts.push(front.tau_plus(t));
        }
    }
    let eps = 1e-9 * horizon.max(1.0);
    pts.retain(|&p| p > eps && p < horizon - eps);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() <= eps);
    pts
}

struct Assembled {
    control: ControlSignal,
    max_uprime_jump: f64,
    max_speed_jump: f64,
    final_junction: (f64, f64, f64),
}

fn assemble(
    asm: &Assembly<'_>,
    corners: &[f64],
    alpha: f64,
    h: f64,
    regularity: Regularity,
) -> Result<Assembled> {
    let horizon = asm.horizon;
    let cands = candidate_points(asm.front, asm.initial, corners, asm.s1, asm.s2, horizon);
    let scale = 1.0 + asm.uprime(0.0, Side::Right)?.abs();
    let mut jumps = Vec::new();
    let mut extra = Vec::new();
    let mut max_jump = 0.0_f64;
    for &p in &cands {
        let l = asm.uprime(p, Side::Left)?;
        let r = asm.uprime(p, Side::Right)?;
        let jump = (l - r).abs();
        max_jump = max_jump.max(jump);
        if regularity == Regularity::C01 && jump > 1e-12 * scale {
            jumps.push((p, l, r));
        } else {
            extra.push(p);
        }
    }
    let m = (horizon / h).ceil().max(1.0) as usize;
    let mut grid: Vec<f64> = (0..=m).map(|i| horizon * i as f64 / m as f64).collect();
    grid[m] = horizon;
    grid.extend(extra);
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let gap = 1e-9 * horizon.max(1.0);
    grid.dedup_by(|a, b| (*a - *b).abs() <= gap);
    let values = grid
        .iter()
        .map(|&s| asm.uprime(s, if s >= horizon { Side::Left } else { Side::Right }))
        .collect::<Result<Vec<_>>>()?;
    let u0 = asm.initial.y0.evaluate(0.0)?;
    let control = ControlSignal::from_slope(u0, &grid, &values, &jumps, regularity)?;

    let front = asm.front;
    let max_speed_jump = front
        .speeds()
        .iter()
        .zip(front.left_speeds())
        .skip(1)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    let before = asm.fprime(asm.s2, Side::Left)?;
    let after = asm.fprime(asm.s2, Side::Right)?;
    let expected = -0.5 * (1.0 + alpha) * asm.target.y0_slope().evaluate(asm.target.ell0)?;
    Ok(Assembled { control, max_uprime_jump: max_jump, max_speed_jump, final_junction: (before, after, expected) })
}

#[allow(clippy::too_many_arguments)]
fn finish(
    initial: &InitialState,
    target: &TargetState,
    branch: &BranchResult,
    ib: InitialBranchResult,
    plan: InflationPlan,
    stage1: SampledFunction,
    corners: Vec<f64>,
    h: f64,
    regularity: Regularity,
) -> Result<SynthesisReport> {
    let mut front = ib.front.clone();
    front.join(&plan.front_segment);
    front.join(&branch.front);
    let horizon = branch.horizon;
    let s1 = plan.t_bar_star - plan.ell_bar_star;
    let s2 = horizon - target.ell0;
    let asm = Assembly { initial, target, front: &front, stage1: &stage1, s1, s2, horizon };
    let out = assemble(&asm, &corners, branch.alpha, h, regularity)?;
    if regularity == Regularity::C1 {
        let tol = 1e-6 + 10.0 * h;
        if out.max_uprime_jump > tol {
            let at = worst_jump_point(&asm, &corners)?;
            return Err(Error::ContinuityFailure { jump: out.max_uprime_jump, at });
        }
        if out.max_speed_jump > tol {
            return Err(Error::ContinuityFailure { jump: out.max_speed_jump, at: f64::NAN });
        }
    }
    Ok(SynthesisReport {
        control: out.control,
        plan,
        branch: branch.clone(),
        initial_branch: ib,
        stage_boundaries: [(0.0, s1), (s1, s2), (s2, horizon)],
        front,
        stage_one_fprime: stage1,
        regularity,
        max_uprime_jump: out.max_uprime_jump,
        max_speed_jump: out.max_speed_jump,
        final_junction: out.final_junction,
        initial: initial.clone(),
        target: target.clone(),
    })
}

fn worst_jump_point(asm: &Assembly<'_>, corners: &[f64]) -> Result<f64> {
    let mut worst = (0.0, f64::NAN);
    for p in candidate_points(asm.front, asm.initial, corners, asm.s1, asm.s2, asm.horizon) {
        let j = (asm.uprime(p, Side::Left)? - asm.uprime(p, Side::Right)?).abs();
        if j > worst.0 {
            worst = (j, p);
        }
    }
    Ok(worst.1)
}

/// Lipschitz control steering `initial` to `target` along `branch`, with a
/// constant-speed inflation segment.
pub fn synthesize_c01(
    initial: &InitialState,
    target: &TargetState,
    kappa: &Toughness,
    branch: &BranchResult,
    cfg: &SolverConfig,
) -> Result<SynthesisReport> {
    let ib = preflight(initial, target, kappa, branch, cfg, Regularity::C01)?;
    let (ts, ls) = (ib.t_star, ib.ell_star);
    let (tb, lb) = (branch.t_bar_star, branch.ell_bar_star);
    let gain = (lb - ls).max(0.0);
    let v = gain / (tb - ts);
    let tiny = 1e-12 * lb.max(1.0);
    let case = if gain <= tiny { StageOneCase::StaticMatch } else { StageOneCase::Linear };
    let v = if case == StageOneCase::StaticMatch { 0.0 } else { v };
    let mut segment = front_from_speed_knots(
        &[(ts, v), (tb, v)],
        ls,
        ib.ell_star_prime,
        branch.ell_bar_star_prime,
        cfg.h,
    )?;
    snap_end(&mut segment, lb)?;
    let f0 = ib_seed_slope(initial)?;
    let j = junction_value(target, branch)?;
    let sign = sign_of(j).or(sign_of(f0)).unwrap_or(1.0);
    let stage1 = fprime_for_prescribed_front(&segment, kappa, &[sign], (Some(f0), Some(j)))?;
    let plan = InflationPlan {
        t_star: ts,
        ell_star: ls,
        ell_star_prime: ib.ell_star_prime,
        t_bar_star: tb,
        ell_bar_star: lb,
        ell_bar_star_prime: branch.ell_bar_star_prime,
        v,
        t_circ: 0.5 * (ts + tb),
        delta: 0.0,
        case,
        front_segment: segment,
    };
    finish(initial, target, branch, ib, plan, stage1, vec![ts, tb], cfg.h, Regularity::C01)
}

fn ib_seed_slope(initial: &InitialState) -> Result<f64> {
    let d = initial.y0_slope().evaluate(0.0)?;
    Ok(0.5 * (initial.y1.evaluate(0.0)? - d))
}

fn snap_end(segment: &mut FrontCurve, ell_end: f64) -> Result<()> {
    let n = segment.len();
    let drift = segment.positions()[n - 1] - ell_end;
    if drift.abs() > 1e-9 * ell_end.max(1.0) {
        return Err(Error::InfeasibleTime(format!("inflation segment misses its end length by {drift}")));
    }
    let mut pos = segment.positions().to_vec();
    pos[n - 1] = ell_end;
    *segment = FrontCurve::new(
        segment.times().to_vec(),
        pos,
        segment.speeds().to_vec(),
        segment.left_speeds().to_vec(),
    )?;
    Ok(())
}

/// Trapezoidal speed profile on [a, b] from `vs` to `ve` with area `area`.
/// Returns its interior knots, or `None` if the cap cannot be respected.
fn trapezoid(a: f64, b: f64, vs: f64, ve: f64, area: f64) -> Option<Vec<(f64, f64)>> {
    let len = b - a;
    let mean = area / len;
    let ends = vs + ve;
    let mut rho = if ends > 0.0 { (mean / ends).min(0.25) } else { 0.25 };
    while rho > 1e-9 {
        let c = (mean - 0.5 * rho * ends) / (1.0 - rho);
        if c > 0.0 && c < MAX_INFLATION_SPEED {
            return Some(vec![(a, vs), (a + rho * len, c), (b - rho * len, c), (b, ve)]);
        }
        rho *= 0.5;
    }
    None
}

/// Continuously differentiable control steering `initial` to `target`
/// along a C¹ `branch`.
pub fn synthesize_c1(
    initial: &InitialState,
    target: &TargetState,
    kappa: &Toughness,
    branch: &BranchResult,
    cfg: &SolverConfig,
) -> Result<SynthesisReport> {
    if initial.regularity != Regularity::C1 {
        return Err(Error::IncompatibleData(
            "initial data is only Lipschitz; its terminal branch speed is not defined".into(),
        ));
    }
    let ib = preflight(initial, target, kappa, branch, cfg, Regularity::C1)?;
    let (ts, ls, vs) = (ib.t_star, ib.ell_star, ib.ell_star_prime);
    let (tb, lb, ve) = (branch.t_bar_star, branch.ell_bar_star, branch.ell_bar_star_prime);
    let zero = 1e-12;
    let (start_rest, end_rest) = (vs <= zero, ve <= zero);
    let gain = lb - ls;
    let span = tb - ts;
    let tc = 0.5 * (ts + tb);
    let f0 = ib_seed_slope(initial)?;
    let j = junction_value(target, branch)?;

    if gain <= 1e-12 * lb.max(1.0) {
        if !(start_rest && end_rest) {
            return Err(Error::InfeasibleTime(format!(
                "equal lengths {ls} and {lb} need zero end speeds, got {vs} and {ve}"
            )));
        }
        let segment = static_segment(ts, tb, ls, vs, ve, cfg.h)?;
        let stage1 = fprime_for_prescribed_front(&segment, kappa, &[], (Some(f0), Some(j)))?;
        let plan = InflationPlan {
            t_star: ts,
            ell_star: ls,
            ell_star_prime: vs,
            t_bar_star: tb,
            ell_bar_star: lb,
            ell_bar_star_prime: ve,
            v: 0.0,
            t_circ: tc,
            delta: 0.5 * span,
            case: StageOneCase::StaticMatch,
            front_segment: segment,
        };
        return finish(initial, target, branch, ib, plan, stage1, vec![ts, tb], cfg.h, Regularity::C1);
    }

    let case = match (start_rest, end_rest) {
        (false, false) => StageOneCase::A,
        (true, false) => StageOneCase::B,
        (false, true) => StageOneCase::C,
        (true, true) => StageOneCase::D,
    };
    let rests = 2 + start_rest as usize + end_rest as usize;
    let budget = span - gain / MAX_INFLATION_SPEED;
    let delta = (0.05 * span).min(0.5 * budget / rests as f64);
    if !(delta > 0.0) {
        return Err(Error::InfeasibleTime(format!(
            "length gain {gain} needs more than the available time {span}"
        )));
    }
    let a0 = if start_rest { ts + delta } else { ts };
    let a1 = tc - delta;
    let b0 = tc + delta;
    let b1 = if end_rest { tb - delta } else { tb };
    let moving = (a1 - a0) + (b1 - b0);
    let area_a = gain * (a1 - a0) / moving;
    let area_b = gain - area_a;
    let vs_eff = if start_rest { 0.0 } else { vs };
    let ve_eff = if end_rest { 0.0 } else { ve };
    let infeasible = || Error::InfeasibleTime(format!("cannot realize length gain {gain} below the speed cap"));
    let pa = trapezoid(a0, a1, vs_eff, 0.0, area_a).ok_or_else(infeasible)?;
    let pb = trapezoid(b0, b1, 0.0, ve_eff, area_b).ok_or_else(infeasible)?;
    let mut knots = Vec::new();
    if start_rest {
        knots.push((ts, 0.0));
    }
    knots.extend(pa);
    knots.extend(pb);
    if end_rest {
        knots.push((tb, 0.0));
    }
    let mut segment = front_from_speed_knots(&knots, ls, vs, ve, cfg.h)?;
    snap_end(&mut segment, lb)?;

    let forced_a = if start_rest { None } else { sign_of(f0) };
    let forced_b = if end_rest { None } else { sign_of(j) };
    let sign_b = forced_b.or(sign_of(j)).or(forced_a).or(sign_of(f0)).unwrap_or(1.0);
    let sign_a = forced_a.unwrap_or(sign_b);
    let stage1 = fprime_for_prescribed_front(&segment, kappa, &[sign_a, sign_b], (Some(f0), Some(j)))?;
    let corners: Vec<f64> = std::iter::once(ts).chain(knots.iter().map(|k| k.0)).chain([tb]).collect();
    let plan = InflationPlan {
        t_star: ts,
        ell_star: ls,
        ell_star_prime: vs,
        t_bar_star: tb,
        ell_bar_star: lb,
        ell_bar_star_prime: ve,
        v: gain / span,
        t_circ: tc,
        delta,
        case,
        front_segment: segment,
    };
    finish(initial, target, branch, ib, plan, stage1, corners, cfg.h, Regularity::C1)
}

fn static_preflight(target: &TargetState, horizon: f64) -> Result<()> {
    if !(horizon > 2.0 * target.ell0) {
        return Err(Error::InfeasibleTime(format!(
            "static branch needs T > 2 lbar0 = {}, got T = {horizon}",
            2.0 * target.ell0
        )));
    }
    Ok(())
}

/// Lipschitz synthesis along the static final branch 𝓛 ≡ ℓ̄₀.
pub fn synthesize_static_c01(
    initial: &InitialState,
    target: &TargetState,
    kappa: &Toughness,
    horizon: f64,
    cfg: &SolverConfig,
) -> Result<SynthesisReport> {
    static_preflight(target, horizon)?;
    let branch = static_branch(target, kappa, horizon, cfg.h, false)?;
    synthesize_c01(initial, target, kappa, &branch, cfg)
}

/// C¹ synthesis along the static final branch; needs ȳ₁(ℓ̄₀) = 0.
pub fn synthesize_static_c1(
    initial: &InitialState,
    target: &TargetState,
    kappa: &Toughness,
    horizon: f64,
    cfg: &SolverConfig,
) -> Result<SynthesisReport> {
    static_preflight(target, horizon)?;
    let branch = static_branch(target, kappa, horizon, cfg.h, true)?;
    synthesize_c1(initial, target, kappa, &branch, cfg)
}

/// Errors of a simulated terminal state against the target.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub front_error: f64,
    pub displacement_error: f64,
    pub velocity_error: f64,
    pub solution: SolutionRecord,
}

/// Simulates `control` and compares the state at its horizon with `target`.
pub fn verify_control(
    initial: &InitialState,
    target: &TargetState,
    kappa: &Toughness,
    control: &ControlSignal,
    cfg: &SolverConfig,
) -> Result<VerifyReport> {
    let sol = solve_front(initial, control, kappa, cfg)?;
    let horizon = control.horizon();
    let ell = sol.front.position(horizon);
    let reach = ell.min(target.ell0);
    let mut xs: Vec<f64> = target.y0.abscissae().iter().copied().filter(|&x| x <= reach).collect();
    let m = 400;
    xs.extend((0..=m).map(|i| reach * i as f64 / m as f64));
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    let state = sol.reconstruct(horizon, &xs)?;
    let mut dy = 0.0_f64;
    let mut dv = 0.0_f64;
    let last = xs.len() - 1;
    for (i, &x) in xs.iter().enumerate() {
        dy = dy.max((state.y[i] - target.y0.evaluate(x)?).abs());
        // velocities of Lipschitz states have no meaningful value on the boundary
        if i > 0 && i < last {
            dv = dv.max((state.dty[i] - target.y1.evaluate(x)?).abs());
        }
    }
    Ok(VerifyReport {
        front_error: (ell - target.ell0).abs(),
        displacement_error: dy,
        velocity_error: dv,
        solution: sol,
    })
}
