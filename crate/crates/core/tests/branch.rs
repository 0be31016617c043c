use debond::branch::{solve_final_branch, static_branch, BranchMode, BranchPolicy};
use debond::{Error, Regularity, SampledFunction, TargetState, Toughness};

/// Target on [0, l] with ybar0 = 0 and ybar1 = c, so ybar1 + ybar0' = c.
fn uniform_target(l: f64, c: f64) -> TargetState {
    let y0 = SampledFunction::constant(0.0, 0.0, l).unwrap();
    let y1 = SampledFunction::constant(c, 0.0, l).unwrap();
    TargetState::new(l, y0, y1, Regularity::C01).unwrap()
}

#[test]
fn prefer_static_gives_the_static_branch() {
    let target = uniform_target(2.0, 0.5);
    let k = Toughness::constant(1.0).unwrap();
    let policy = BranchPolicy::new(BranchMode::PreferStatic, false, 1e-3).unwrap();
    let b = solve_final_branch(&target, &k, 6.0, &policy).unwrap();
    let s = static_branch(&target, &k, 6.0, 1e-3, false).unwrap();
    assert!((b.t_bar_star - 4.0).abs() < 1e-12);
    assert_eq!(b.ell_bar_star, 2.0);
    assert_eq!(b.ell_bar_star_prime, 0.0);
    assert!(b.front.positions().iter().all(|&l| l == 2.0));
    assert_eq!(s.t_bar_star, 4.0);
    assert_eq!(s.ell_bar_star, 2.0);
}

#[test]
fn prefer_moving_constant_coefficients() {
    let target = uniform_target(2.0, (2.0_f64 / 3.0).sqrt());
    let k = Toughness::constant(1.0).unwrap();
    let h = 1e-3;
    let t = 6.0;
    let policy = BranchPolicy::new(BranchMode::PreferMoving, false, h).unwrap();
    let b = solve_final_branch(&target, &k, t, &policy).unwrap();
    assert!(b.front.speeds().iter().all(|&v| (v - 0.5).abs() <= 10.0 * h));
    assert!((b.t_bar_star - (t - 4.0 / 3.0)).abs() <= 10.0 * h);
    assert!((b.ell_bar_star - 4.0 / 3.0).abs() <= 10.0 * h);
    assert!((b.t_bar_star + b.ell_bar_star - t).abs() <= 1e-12);
    for (&tn, &ln) in b.front.times().iter().zip(b.front.positions()) {
        assert!((ln - (2.0 - 0.5 * (t - tn))).abs() < 1e-9);
    }
    // both options were open everywhere
    assert!(b.alternatives.iter().all(|&a| a));
}

#[test]
fn violated_constraint_is_a_dead_end() {
    let target = uniform_target(2.0, 2.0);
    let k = Toughness::constant(1.0).unwrap();
    let policy = BranchPolicy::new(BranchMode::PreferStatic, false, 1e-3).unwrap();
    let err = solve_final_branch(&target, &k, 6.0, &policy).unwrap_err();
    assert!(matches!(err, Error::DeadEnd { t, .. } if t == 6.0));
    let err = static_branch(&target, &k, 6.0, 1e-3, false).unwrap_err();
    assert!(matches!(err, Error::ConstraintViolated { excess, .. } if (excess - 2.0).abs() < 1e-12));
}

#[test]
fn short_horizon_does_not_terminate() {
    let target = uniform_target(2.0, 0.0);
    let k = Toughness::constant(1.0).unwrap();
    let policy = BranchPolicy::new(BranchMode::PreferStatic, false, 1e-3).unwrap();
    assert!(matches!(solve_final_branch(&target, &k, 1.5, &policy), Err(Error::NoTermination)));
}

#[test]
fn c1_branch_ends_with_the_active_speed() {
    // ybar0 = a (l - x) has slope -a; ybar1 = alpha a makes the target active
    let (l, a, kappa) = (1.0, 2.0_f64, 1.0);
    let alpha = (1.0 - 2.0 * kappa / (a * a)).sqrt();
    let y0 = SampledFunction::from_fn(0.0, l, 1000, |x| a * (l - x)).unwrap();
    let y1 = SampledFunction::constant(alpha * a, 0.0, l).unwrap();
    let target = TargetState::new(l, y0, y1, Regularity::C1).unwrap();
    let k = Toughness::constant(kappa).unwrap();
    let policy = BranchPolicy::new(BranchMode::PreferStatic, true, 1e-3).unwrap();
    let b = solve_final_branch(&target, &k, 4.0, &policy).unwrap();
    assert!((b.alpha - alpha).abs() < 1e-12);
    // ybar1 + ybar0' is constant, so the moving root stays at alpha
    assert!(b.front.speeds().iter().all(|&v| (v - alpha).abs() < 1e-9));
}

#[test]
fn c1_branch_refuses_jumps() {
    let l = 1.0;
    let y0 = SampledFunction::constant(0.0, 0.0, l).unwrap();
    let y1 = SampledFunction::constant(0.0, 0.0, l).unwrap();
    let target = TargetState::new(l, y0, y1, Regularity::C1).unwrap();
    let k = Toughness::constant(1.0).unwrap();
    let policy = BranchPolicy::new(BranchMode::PreferMoving, true, 1e-3).unwrap();
    // Y = 0 everywhere leaves no moving option, so the branch stays static
    let b = solve_final_branch(&target, &k, 3.0, &policy).unwrap();
    assert!(b.front.speeds().iter().all(|&v| v == 0.0));

    // an active target whose incoming part drops to zero must jump from alpha to 0
    let a = 2.0_f64;
    let alpha = (1.0 - 2.0 / (a * a)).sqrt();
    let y0 = SampledFunction::from_fn(0.0, l, 1000, |x| a * (l - x)).unwrap();
    let y1 = SampledFunction::from_fn(0.0, l, 1000, |x| if x > 0.5 { alpha * a } else { a }).unwrap();
    let target = TargetState::new(l, y0, y1, Regularity::C1).unwrap();
    let err = solve_final_branch(&target, &k, 4.0, &policy).unwrap_err();
    assert!(matches!(err, Error::C1SwitchViolation { .. }), "{err:?}");
}
