//! One pass/fail line per acceptance criterion. Exits nonzero if any fails.

use debond::branch::{solve_final_branch, BranchMode, BranchPolicy};
use debond::control::{synthesize_static_c01, synthesize_static_c1, verify_control};
use debond::forward::{solve_front, solve_initial_branch, Scheme, SolverConfig};
use debond::{ControlSignal, Error, InitialState, Regularity, SampledFunction, TargetState, Toughness};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::Instant;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn kappa(c: f64) -> Toughness {
    Toughness::constant(c).unwrap()
}

fn constant_velocity_data(y1: f64) -> InitialState {
    let y0 = SampledFunction::constant(0.0, 0.0, 1.0).unwrap();
    let v = SampledFunction::constant(y1, 0.0, 1.0).unwrap();
    InitialState::new(1.0, y0, v, Regularity::C01).unwrap()
}

fn static_invariance() -> Outcome {
    let start = Instant::now();
    let init = InitialState::at_rest(1.0, Regularity::C01).unwrap();
    let sol = solve_front(&init, &ControlSignal::zero(3.0).unwrap(), &kappa(1.0), &SolverConfig::default())
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    let drift = sol.front.positions().iter().fold(0.0_f64, |m, &l| m.max((l - 1.0).abs()));
    let xs: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let mut field = 0.0_f64;
    for &t in &[0.0, 1.0, 2.0, 3.0] {
        let st = sol.reconstruct(t, &xs).map_err(|e| e.to_string())?;
        for v in st.y.iter().chain(&st.dty).chain(&st.dxy) {
            field = field.max(v.abs());
        }
    }
    check(
        drift <= 1e-12 && field <= 1e-12 && elapsed < 0.1,
        format!("front drift {drift:.1e}, field {field:.1e}, {elapsed:.3} s"),
    )
}

fn sloped_error(h: f64, scheme: Scheme) -> f64 {
    let (a, b) = (0.5, 0.1);
    let k = Toughness::sampled(SampledFunction::new(vec![0.0, 10.0], vec![a, a + 10.0 * b]).unwrap()).unwrap();
    let cfg = SolverConfig { h, scheme, ..SolverConfig::default() };
    let sol = solve_front(&constant_velocity_data(2.0), &ControlSignal::zero(3.0).unwrap(), &k, &cfg).unwrap();
    let t_of = |l: f64| -(l - 1.0) - 4.0 / b * ((2.0 - a - b * l) / (2.0 - a - b)).ln();
    let (mut lo, mut hi) = (1.0, 3.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if t_of(mid) < 3.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (sol.front.position(3.0) - 0.5 * (lo + hi)).abs()
}

fn constant_speed() -> Outcome {
    let start = Instant::now();
    let sol = solve_front(
        &constant_velocity_data(2.0),
        &ControlSignal::zero(6.0).unwrap(),
        &kappa(0.5),
        &SolverConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    let mut worst = 0.0_f64;
    for (&t, &l) in sol.front.times().iter().zip(sol.front.positions()) {
        let exact = if t <= 5.0 { 1.0 + 0.6 * t } else { 4.0 };
        worst = worst.max((l - exact).abs());
    }
    let end = (sol.front.position(6.0) - 4.0).abs();
    // the constant-speed run is exact at every step, so orders are measured with sloped toughness
    let ratio = |s: Scheme| {
        let e: Vec<f64> = [0.02, 0.01, 0.005].iter().map(|&h| sloped_error(h, s)).collect();
        (e[0] / e[1], e[1] / e[2])
    };
    let (e1, e2) = ratio(Scheme::Euler);
    let (h1, h2) = ratio(Scheme::Heun);
    let orders = [e1, e2].iter().all(|r| (1.7..2.3).contains(r)) && [h1, h2].iter().all(|r| (3.4..4.6).contains(r));
    check(
        end <= 5e-3 && worst <= 1e-6 && orders && elapsed < 1.0,
        format!(
            "|l(6) - 4| = {end:.1e}, max node error {worst:.1e}, euler ratios {e1:.2}/{e2:.2}, heun ratios {h1:.2}/{h2:.2}, {elapsed:.3} s"
        ),
    )
}

fn initial_branch() -> Outcome {
    let cfg = SolverConfig::default();
    let ib = solve_initial_branch(&constant_velocity_data(2.0), &kappa(0.5), &cfg).map_err(|e| e.to_string())?;
    let rest = solve_initial_branch(&InitialState::at_rest(1.0, Regularity::C1).unwrap(), &kappa(1.0), &cfg)
        .map_err(|e| e.to_string())?;
    let (a, b) = ((ib.t_star - 2.5).abs(), (ib.ell_star - 2.5).abs());
    let c = (rest.t_star - 1.0).abs();
    check(a <= 5e-3 && b <= 5e-3 && c <= 1e-12, format!("|t* - 2.5| = {a:.1e}, |l* - 2.5| = {b:.1e}, static |t* - 1| = {c:.1e}"))
}

struct Suite {
    residual: f64,
    speeds_ok: bool,
    damping_excess: f64,
    elapsed: f64,
}

fn random_control(rng: &mut ChaCha8Rng, horizon: f64) -> ControlSignal {
    let n = rng.gen_range(2..8);
    let mut knots: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..horizon - 0.2)).collect();
    knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    knots.dedup_by(|a, b| (*a - *b).abs() < 0.05);
    let mut xs = vec![0.0];
    xs.extend(knots);
    xs.push(horizon);
    let mut ys = vec![0.0];
    for i in 1..xs.len() {
        let slope: f64 = rng.gen_range(-3.0..3.0);
        ys.push(ys[i - 1] + slope * (xs[i] - xs[i - 1]));
    }
    ControlSignal::piecewise_linear(SampledFunction::new(xs, ys).unwrap()).unwrap()
}

fn griffith_suite() -> Result<Suite, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h = 1e-3;
    let horizon = 5.0;
    let cfg = SolverConfig::with_step(h);
    let init = InitialState::at_rest(1.0, Regularity::C01).unwrap();
    let mut out = Suite { residual: 0.0, speeds_ok: true, damping_excess: f64::NEG_INFINITY, elapsed: 0.0 };
    for _ in 0..200 {
        let u = random_control(&mut rng, horizon);
        let c = rng.gen_range(0.3..3.0);
        let k = kappa(c);
        let sol = solve_front(&init, &u, &k, &cfg).map_err(|e| e.to_string())?;
        for r in sol.griffith_residuals().map_err(|e| e.to_string())? {
            out.residual = out.residual.max(r);
        }
        out.speeds_ok &= sol.front.speeds().iter().all(|&v| (0.0..1.0).contains(&v));
        // incoming part of the terminal state: y1 + y0' = 2 g'(T + x)
        let ell = sol.front.position(horizon);
        let xs: Vec<f64> = (0..=500).map(|i| ell * i as f64 / 500.0).collect();
        let st = sol.reconstruct(horizon, &xs).map_err(|e| e.to_string())?;
        for (i, &x) in xs.iter().enumerate() {
            let t_src = sol.front.tau_plus_inverse(horizon + x).map_err(|e| e.to_string())?;
            let bound = 2.0 * k.at(sol.front.position(t_src)).map_err(|e| e.to_string())?;
            let part = st.dty[i] + st.dxy[i];
            out.damping_excess = out.damping_excess.max(part * part - bound);
        }
    }
    out.elapsed = start.elapsed().as_secs_f64();
    Ok(out)
}

fn final_branch() -> Outcome {
    let h = 1e-3;
    let t = 6.0;
    let target = TargetState::new(
        2.0,
        SampledFunction::constant(0.0, 0.0, 2.0).unwrap(),
        SampledFunction::constant((2.0_f64 / 3.0).sqrt(), 0.0, 2.0).unwrap(),
        Regularity::C01,
    )
    .unwrap();
    let policy = BranchPolicy::new(BranchMode::PreferMoving, false, h).unwrap();
    let b = solve_final_branch(&target, &kappa(1.0), t, &policy).map_err(|e| e.to_string())?;
    let speed = b.front.speeds().iter().fold(0.0_f64, |m, &v| m.max((v - 0.5).abs()));
    let start = (b.t_bar_star - (t - 4.0 / 3.0)).abs();
    let meet = (b.t_bar_star + b.ell_bar_star - t).abs();
    check(
        speed <= 10.0 * h && start <= 10.0 * h && meet <= 1e-9,
        format!("|L' - 0.5| <= {speed:.1e}, |tbar* - (T - 4/3)| = {start:.1e}, |tbar* + L(tbar*) - T| = {meet:.1e}"),
    )
}

fn random_static_target(rng: &mut ChaCha8Rng) -> TargetState {
    let l = rng.gen_range(1.2..2.5);
    let a: Vec<f64> = (1..=3).map(|k| rng.gen_range(-0.3..0.3) / k as f64).collect();
    let (c0, c1, w1) = (rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6), rng.gen_range(0.5..4.0));
    let y0 = |x: f64| (0..3).map(|k| a[k] * ((k + 1) as f64 * PI * x / l).sin()).sum::<f64>();
    let dy0 = |x: f64| {
        (0..3).map(|k| a[k] * (k + 1) as f64 * PI / l * ((k + 1) as f64 * PI * x / l).cos()).sum::<f64>()
    };
    // |w| <= 1.2 < 0.9 sqrt(2)
    let w = |x: f64| c0 + c1 * (w1 * x).sin();
    TargetState::new(
        l,
        SampledFunction::from_fn(0.0, l, 2000, y0).unwrap(),
        SampledFunction::from_fn(0.0, l, 2000, |x| -dy0(x) + w(x)).unwrap(),
        Regularity::C01,
    )
    .unwrap()
}

fn c01_round_trip() -> Outcome {
    let cfg = SolverConfig::default();
    let k = kappa(1.0);
    let start = Instant::now();
    let init = InitialState::at_rest(1.0, Regularity::C01).unwrap();
    let target = TargetState::at_rest(2.0, Regularity::C01).unwrap();
    let rep = synthesize_static_c01(&init, &target, &k, 6.0, &cfg).map_err(|e| e.to_string())?;
    let v = verify_control(&init, &target, &k, &rep.control, &cfg).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    let base = v.front_error <= 1e-2 && v.displacement_error <= 1e-2 && elapsed < 5.0;

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut worst_front, mut worst_disp, mut worst_vel) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut failures = 0;
    for _ in 0..50 {
        let target = random_static_target(&mut rng);
        let horizon = 2.0 * target.ell0 + 1.5;
        let outcome = synthesize_static_c01(&init, &target, &k, horizon, &cfg)
            .and_then(|rep| verify_control(&init, &target, &k, &rep.control, &cfg));
        match outcome {
            Ok(r) => {
                worst_front = worst_front.max(r.front_error);
                worst_disp = worst_disp.max(r.displacement_error);
                worst_vel = worst_vel.max(r.velocity_error);
            }
            Err(_) => failures += 1,
        }
    }
    check(
        base && failures == 0 && worst_front <= 1e-2 && worst_disp <= 1e-2,
        format!(
            "expansion: front {:.1e}, displacement {:.1e}, {elapsed:.3} s; 50 random targets: {failures} errors, worst front {worst_front:.1e}, displacement {worst_disp:.1e}, velocity {worst_vel:.1e}",
            v.front_error, v.displacement_error
        ),
    )
}

fn c1_round_trip() -> Outcome {
    let cfg = SolverConfig::default();
    let k = kappa(1.0);
    let init = InitialState::at_rest(1.0, Regularity::C1).unwrap();
    let target = TargetState::new(
        2.0,
        SampledFunction::from_fn(0.0, 2.0, 2000, |x| 0.3 * (PI * x / 2.0).sin()).unwrap(),
        SampledFunction::constant(0.0, 0.0, 2.0).unwrap(),
        Regularity::C1,
    )
    .unwrap();
    let rep = synthesize_static_c1(&init, &target, &k, 6.0, &cfg).map_err(|e| e.to_string())?;
    let v = verify_control(&init, &target, &k, &rep.control, &cfg).map_err(|e| e.to_string())?;
    let (before, after, expected) = rep.final_junction;
    let junction = (before - expected).abs().max((after - expected).abs());
    let jump_tol = 1e-6 + 10.0 * cfg.h;
    check(
        rep.plan.case.name() == "d"
            && v.front_error <= 1e-2
            && v.displacement_error <= 1e-2
            && rep.max_uprime_jump <= jump_tol
            && rep.max_speed_jump <= jump_tol
            && junction <= 1e-8,
        format!(
            "case {}, front {:.1e}, displacement {:.1e}, velocity {:.1e}, u' jump {:.1e}, l' jump {:.1e}, junction {junction:.1e}",
            rep.plan.case.name(),
            v.front_error,
            v.displacement_error,
            v.velocity_error,
            rep.max_uprime_jump,
            rep.max_speed_jump
        ),
    )
}

fn infeasibility() -> Outcome {
    let cfg = SolverConfig::default();
    let k = kappa(1.0);
    let rest = InitialState::at_rest(1.0, Regularity::C01).unwrap();

    let fast = constant_velocity_data(2.0);
    let short = TargetState::at_rest(2.0, Regularity::C01).unwrap();
    let a = matches!(synthesize_static_c01(&fast, &short, &kappa(0.5), 10.0, &cfg), Err(Error::InfeasibleTime(_)));

    let over = TargetState::new(
        2.0,
        SampledFunction::constant(0.0, 0.0, 2.0).unwrap(),
        SampledFunction::constant(2.0, 0.0, 2.0).unwrap(),
        Regularity::C01,
    )
    .unwrap();
    let b = matches!(
        synthesize_static_c01(&rest, &over, &k, 8.0, &cfg),
        Err(Error::ConstraintViolated { .. } | Error::DeadEnd { .. })
    );
    let policy = BranchPolicy::new(BranchMode::PreferMoving, false, cfg.h).unwrap();
    let c = matches!(solve_final_branch(&over, &k, 8.0, &policy), Err(Error::DeadEnd { .. }));

    let d = matches!(synthesize_static_c01(&rest, &short, &k, 4.0, &cfg), Err(Error::InfeasibleTime(_)));
    let e = matches!(
        synthesize_static_c1(
            &InitialState::at_rest(1.0, Regularity::C1).unwrap(),
            &TargetState::at_rest(2.0, Regularity::C1).unwrap(),
            &k,
            4.0,
            &cfg
        ),
        Err(Error::InfeasibleTime(_))
    );
    check(
        a && b && c && d && e,
        format!("lbar* < l*: {a}, constraint: {b}, dead end: {c}, T = 2 lbar0 (C01): {d}, T = 2 lbar0 (C1): {e}"),
    )
}

fn main() {
    let mut all = true;
    let mut line = |n: usize, name: &str, r: Outcome| {
        let (tag, detail) = match r {
            Ok(d) => ("PASS", d),
            Err(d) => {
                all = false;
                ("FAIL", d)
            }
        };
        println!("criterion {n} {tag} {name}: {detail}");
    };
    line(1, "static invariance", static_invariance());
    line(2, "constant-speed oracle", constant_speed());
    line(3, "initial branch", initial_branch());
    match griffith_suite() {
        Ok(s) => {
            let h = 1e-3;
            line(
                4,
                "Griffith residuals",
                check(
                    s.residual <= 10.0 * h && s.speeds_ok && s.elapsed < 60.0,
                    format!("max residual {:.1e}, speeds in [0, 1): {}, {:.2} s", s.residual, s.speeds_ok, s.elapsed),
                ),
            );
            line(
                5,
                "damping bound",
                check(s.damping_excess <= 20.0 * h, format!("max excess over 2 kappa {:.1e}", s.damping_excess)),
            );
        }
        Err(e) => {
            line(4, "Griffith residuals", Err(e.clone()));
            line(5, "damping bound", Err(e));
        }
    }
    line(6, "final-branch oracle", final_branch());
    line(7, "C01 round trip", c01_round_trip());
    line(8, "C1 round trip", c1_round_trip());
    line(9, "infeasibility detection", infeasibility());
    if !all {
        std::process::exit(1);
    }
}
