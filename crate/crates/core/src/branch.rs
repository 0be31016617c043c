//! Final branches: front curves that end at the target length with the
//! target state consistent with Griffith's criterion, computed backward in
//! time from T.
//!
//! Along a final branch 𝓛 the incoming part of the target,
//! Y = |ȳ₁ + ȳ₀′|²(t + 𝓛(t) − T), must not exceed K = 2κ(𝓛(t)), and the
//! speed is either 0 or the moving root (K − Y)/(K + Y).

use crate::error::{Error, Result};
use crate::model::{classify_final_state, FrontCurve, TargetState, Toughness, DEFAULT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchMode {
    PreferStatic,
    PreferMoving,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchPolicy {
    pub mode: BranchMode,
    /// Only allow switching between the static and moving options where
    /// they coincide, so that 𝓛′ stays continuous.
    pub c1_mode: bool,
    pub h: f64,
}

impl BranchPolicy {
    pub fn new(mode: BranchMode, c1_mode: bool, h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidConfig(format!("branch step must be positive, got {h}")));
        }
        Ok(Self { mode, c1_mode, h })
    }

    fn switch_tol(&self) -> f64 {
        10.0 * self.h
    }
}

/// Admissible speeds at one point of a branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedOptions {
    /// Zero speed is allowed (Y ≤ K).
    pub static_ok: bool,
    /// The moving root, when it lies in [0, 1).
    pub moving: Option<f64>,
}

impl SpeedOptions {
    pub fn speeds(&self) -> Vec<f64> {
        let mut out = Vec::new();
        if self.static_ok {
            out.push(0.0);
        }
        if let Some(r) = self.moving {
            if !(self.static_ok && r == 0.0) {
                out.push(r);
            }
        }
        out
    }
}

/// Speeds allowed by the constraint Y ≤ K and the inclusion
/// 𝓛′ ∈ {0, (K − Y)/(K + Y)}.
pub fn branch_speed_options(y: f64, k: f64) -> Result<SpeedOptions> {
    if !(k > 0.0) {
        return Err(Error::InvalidToughness(k / 2.0));
    }
    let slack = 1e-12 * k;
    let static_ok = y <= k + slack;
    let moving = if y > 0.0 && static_ok { Some(((k - y) / (k + y)).max(0.0)) } else { None };
    if !static_ok {
        return Err(Error::DeadEnd { t: f64::NAN, y, k });
    }
    Ok(SpeedOptions { static_ok, moving })
}

/// A final branch on [t̄★, T].
#[derive(Debug, Clone, PartialEq)]
pub struct BranchResult {
    pub front: FrontCurve,
    pub t_bar_star: f64,
    pub ell_bar_star: f64,
    pub ell_bar_star_prime: f64,
    /// Terminal speed 𝓛′(T).
    pub alpha: f64,
    /// Per node, whether the option not taken was admissible as well.
    pub alternatives: Vec<bool>,
    pub horizon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Option2 {
    Static,
    Moving,
}

struct Backward<'a> {
    target: &'a TargetState,
    kappa: &'a Toughness,
    horizon: f64,
    policy: BranchPolicy,
}

impl Backward<'_> {
    fn options(&self, t: f64, ell: f64) -> Result<SpeedOptions> {
        let x = (t + ell - self.horizon).clamp(0.0, self.target.ell0);
        let y = self.target.damping_part().evaluate(x)?.powi(2);
        let k = 2.0 * self.kappa.at(ell)?;
        branch_speed_options(y, k).map_err(|e| match e {
            Error::DeadEnd { y, k, .. } => Error::DeadEnd { t, y, k },
            other => other,
        })
    }

    /// Chosen speed, resulting option and whether the other option was
    /// admissible too.
    fn choose(&self, t: f64, ell: f64, current: Option2) -> Result<(f64, Option2, bool)> {
        let opts = self.options(t, ell)?;
        let tol = self.policy.switch_tol();
        let root = opts.moving;
        let distinct = |r: f64| r > tol;
        if !self.policy.c1_mode {
            let pick_moving = match self.policy.mode {
                BranchMode::PreferStatic => !opts.static_ok,
                BranchMode::PreferMoving => root.is_some(),
            };
            return Ok(match (pick_moving, root) {
                (true, Some(r)) if r > 0.0 => (r, Option2::Moving, opts.static_ok && distinct(r)),
                _ => (0.0, Option2::Static, root.map_or(false, distinct)),
            });
        }
        match current {
            Option2::Moving => match root {
                Some(r) if self.policy.mode == BranchMode::PreferStatic && r <= tol => {
                    Ok((0.0, Option2::Static, false))
                }
                Some(r) => Ok((r, Option2::Moving, distinct(r))),
                None => Err(Error::C1SwitchViolation { t }),
            },
            Option2::Static => match root {
                Some(r) if self.policy.mode == BranchMode::PreferMoving && r <= tol => {
                    Ok((r, Option2::Moving, false))
                }
                _ => Ok((0.0, Option2::Static, root.map_or(false, distinct))),
            },
        }
    }
}

/// Integrates a final branch backward from 𝓛(T) = ℓ̄₀ until t + 𝓛(t) = T.
pub fn solve_final_branch(
    target: &TargetState,
    kappa: &Toughness,
    horizon: f64,
    policy: &BranchPolicy,
) -> Result<BranchResult> {
    let bw = Backward { target, kappa, horizon, policy: *policy };
    let h = policy.h;
    let l_end = target.ell0;

    let (v_end, mut mode, alt_end) = if policy.c1_mode {
        let tol = DEFAULT_TOL.max(10.0 * h);
        let class = classify_final_state(target, kappa, tol)?;
        let opts = bw.options(horizon, l_end)?;
        if class.passive {
            let start = if policy.mode == BranchMode::PreferMoving
                && opts.moving.map_or(false, |r| r <= policy.switch_tol())
            {
                Option2::Moving
            } else {
                Option2::Static
            };
            (0.0, start, opts.moving.map_or(false, |r| r > policy.switch_tol()))
        } else {
            (class.alpha, Option2::Moving, opts.static_ok && class.alpha > policy.switch_tol())
        }
    } else {
        bw.choose(horizon, l_end, Option2::Static)?
    };

    let mut ts = vec![horizon];
    let mut ls = vec![l_end];
    let mut vs = vec![v_end];
    let mut alts = vec![alt_end];
    let max_steps = (horizon / h).ceil() as usize + 2;
    for _ in 0..max_steps {
        let n = ts.len() - 1;
        let (t, ell, k1) = (ts[n], ls[n], vs[n]);
        let tp = t - h;
        let lp = ell - h * k1;
        let (k2, _, _) = bw.choose(tp, lp, mode)?;
        let l_new = ell - 0.5 * h * (k1 + k2);
        let x = t + ell - horizon;
        let x_new = tp + l_new - horizon;
        if x_new <= 0.0 {
            let theta = x / (x - x_new);
            let tb = t - theta * h;
            if tb < 0.0 {
                return Err(Error::NoTermination);
            }
            let lb = horizon - tb;
            let (vb, _, ab) = bw.choose(tb, lb, mode)?;
            if theta * h > 1e-12 * horizon.max(1.0) {
                ts.push(tb);
                ls.push(lb);
                vs.push(vb);
                alts.push(ab);
            } else {
                ls[n] = horizon - ts[n];
            }
            break;
        }
        if tp < 0.0 {
            return Err(Error::NoTermination);
        }
        let (v, m, a) = bw.choose(tp, l_new, mode)?;
        mode = m;
        ts.push(tp);
        ls.push(l_new);
        vs.push(v);
        alts.push(a);
    }
    let n = ts.len() - 1;
    if ts[n] + ls[n] > horizon + 1e-9 * horizon.max(1.0) {
        return Err(Error::NoTermination);
    }
    finish(ts, ls, vs, alts, horizon)
}

fn finish(
    mut ts: Vec<f64>,
    mut ls: Vec<f64>,
    mut vs: Vec<f64>,
    mut alts: Vec<bool>,
    horizon: f64,
) -> Result<BranchResult> {
    ts.reverse();
    ls.reverse();
    vs.reverse();
    alts.reverse();
    let alpha = *vs.last().unwrap();
    let (t_bar_star, ell_bar_star, ell_bar_star_prime) = (ts[0], ls[0], vs[0]);
    let front = FrontCurve::new(ts, ls, vs.clone(), vs)?;
    Ok(BranchResult {
        front,
        t_bar_star,
        ell_bar_star,
        ell_bar_star_prime,
        alpha,
        alternatives: alts,
        horizon,
    })
}

/// The branch 𝓛 ≡ ℓ̄₀ on [T − ℓ̄₀, T], available when the whole target
/// satisfies |ȳ₁ + ȳ₀′|² ≤ 2κ(ℓ̄₀) and, for C¹ targets, ȳ₁(ℓ̄₀) = 0.
pub fn static_branch(
    target: &TargetState,
    kappa: &Toughness,
    horizon: f64,
    h: f64,
    c1: bool,
) -> Result<BranchResult> {
    let l = target.ell0;
    let k2 = 2.0 * kappa.at(l)?;
    let part = target.damping_part();
    let mut worst = (f64::NEG_INFINITY, 0.0);
    for (&x, &v) in part.abscissae().iter().zip(part.values()) {
        let excess = v * v - k2;
        if excess > worst.0 {
            worst = (excess, x);
        }
    }
    if worst.0 > 1e-12 * k2 {
        return Err(Error::ConstraintViolated { excess: worst.0, x: worst.1 });
    }
    if c1 {
        let tip = target.y1.evaluate(l)?;
        if tip.abs() > DEFAULT_TOL.max(10.0 * h) {
            return Err(Error::IncompatibleTarget(format!("ybar1(lbar0) = {tip} is not zero")));
        }
    }
    let t0 = horizon - l;
    if t0 <= 0.0 {
        return Err(Error::NoTermination);
    }
    let m = (l / h).ceil().max(1.0) as usize;
    let mut ts: Vec<f64> = (0..=m).map(|i| horizon - l * i as f64 / m as f64).collect();
    ts[m] = t0;
    let n = ts.len();
    let alts = vec![false; n];
    finish(ts, vec![l; n], vec![0.0; n], alts, horizon)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn options_examples() {
        let o = branch_speed_options(0.0, 2.0).unwrap();
        assert!(o.static_ok && o.moving.is_none());
        assert_eq!(o.speeds(), vec![0.0]);
        let o = branch_speed_options(2.0 / 3.0, 2.0).unwrap();
        assert!(o.static_ok);
        assert!((o.moving.unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(branch_speed_options(3.0, 2.0), Err(Error::DeadEnd { .. })));
    }

    #[test]
    fn coincident_options_collapse() {
        let o = branch_speed_options(2.0, 2.0).unwrap();
        assert_eq!(o.speeds(), vec![0.0]);
    }
}
