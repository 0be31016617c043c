use crate::config::{BranchKind, ConfigError, ScenarioConfig};
use debond::branch::{solve_final_branch, static_branch, BranchResult};
use debond::control::{synthesize_c01, synthesize_c1, verify_control, SynthesisReport};
use debond::forward::{solve_front, solve_initial_branch, SolutionRecord};
use debond::model::{check_damping_bound, check_target, classify_final_state, DEFAULT_TOL};
use debond::{ControlSignal, FrontCurve, Regularity, SampledFunction};
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Points of the terminal-state grid written to state_at_T.csv.
const STATE_POINTS: usize = 1000;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] debond::Error),
    #[error("cannot write {path}: {message}")]
    Output { path: PathBuf, message: String },
    #[error("control file {path}: {message}")]
    ControlFile { path: PathBuf, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use debond::Error as E;
        match self {
            CliError::Config(_) | CliError::ControlFile { .. } => 2,
            CliError::Model(e) => match e {
                E::InvalidConfig(_) => 2,
                E::InfeasibleTime(_) | E::NoTermination => 4,
                E::DeadEnd { .. } | E::ConstraintViolated { .. } => 5,
                E::ContinuityFailure { .. } | E::C1SwitchViolation { .. } => 6,
                _ => 3,
            },
            CliError::Output { .. } => 3,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn out_err(path: &Path, e: impl ToString) -> CliError {
    CliError::Output { path: path.to_path_buf(), message: e.to_string() }
}

fn write_csv(dir: &Path, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> CliResult<()> {
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path).map_err(|e| out_err(&path, e))?;
    w.write_record(header).map_err(|e| out_err(&path, e))?;
    for row in rows {
        w.write_record(row.into_iter().map(fmt)).map_err(|e| out_err(&path, e))?;
    }
    w.flush().map_err(|e| out_err(&path, e))
}

fn write_text(dir: &Path, name: &str, lines: &[(&str, String)]) -> CliResult<()> {
    let path = dir.join(name);
    let body: String = lines.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
    fs::write(&path, body).map_err(|e| out_err(&path, e))
}

fn prepare(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| out_err(dir, e))
}

fn front_rows(front: &FrontCurve) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(front.len());
    for i in 0..front.len() {
        let t = front.times()[i];
        // consecutive nodes at the same time would break the increasing abscissa
        if rows.last().map_or(false, |r| r[0] >= t) {
            continue;
        }
        rows.push(vec![t, front.positions()[i], front.speeds()[i]]);
    }
    rows
}

fn write_front(dir: &Path, name: &str, first: &str, front: &FrontCurve) -> CliResult<()> {
    write_csv(dir, name, &["t", first, &format!("{first}_prime")], front_rows(front))
}

fn write_control(dir: &Path, control: &ControlSignal) -> CliResult<()> {
    let up = control.uprime();
    let mut rows = Vec::with_capacity(up.abscissae().len());
    for (&t, &v) in up.abscissae().iter().zip(up.values()) {
        rows.push(vec![t, control.value(t)?, v]);
    }
    write_csv(dir, "control.csv", &["t", "u", "u_prime"], rows)
}

fn write_solution(dir: &Path, sol: &SolutionRecord, horizon: f64) -> CliResult<()> {
    write_front(dir, "front.csv", "ell", &sol.front)?;
    let mut rows = Vec::new();
    for (&s, &f) in sol.trace.abscissae().iter().zip(sol.trace.values()) {
        rows.push(vec![s, f, sol.trace_slope.evaluate(s)?]);
    }
    write_csv(dir, "trace.csv", &["s", "f", "f_prime"], rows)?;
    write_control(dir, &sol.control)?;
    let ell = sol.front.position(horizon);
    let xs: Vec<f64> = (0..=STATE_POINTS).map(|i| ell * i as f64 / STATE_POINTS as f64).collect();
    let st = sol.reconstruct(horizon, &xs)?;
    let rows = (0..xs.len()).map(|i| vec![xs[i], st.y[i], st.dty[i], st.dxy[i]]);
    write_csv(dir, "state_at_T.csv", &["x", "y", "dt_y", "dx_y"], rows)
}

/// Reads a control written by this program: columns t, u, u_prime. Node
/// pairs closer than the jump resolution mark jumps of u′.
pub fn read_control(path: &Path, regularity: Regularity) -> CliResult<ControlSignal> {
    let bad = |m: String| CliError::ControlFile { path: path.to_path_buf(), message: m };
    let mut r = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let (mut ts, mut us, mut ups) = (Vec::new(), Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != 3 {
            return Err(bad(format!("expected 3 columns, got {}", rec.len())));
        }
        let parse = |i: usize| rec[i].trim().parse::<f64>().map_err(|e| bad(format!("{}: {e}", &rec[i])));
        ts.push(parse(0)?);
        us.push(parse(1)?);
        ups.push(parse(2)?);
    }
    if ts.len() < 2 {
        return Err(bad("needs at least two rows".into()));
    }
    let horizon = ts[ts.len() - 1];
    let gap = 1e-8 * horizon.max(1.0);
    let jumps: Vec<f64> = ts.windows(2).filter(|w| w[1] - w[0] < gap).map(|w| 0.5 * (w[0] + w[1])).collect();
    let u = SampledFunction::new(ts.clone(), us).map_err(|e| bad(e.to_string()))?;
    let up = SampledFunction::new(ts, ups).map_err(|e| bad(e.to_string()))?;
    ControlSignal::new(u, up, jumps, regularity).map_err(|e| bad(e.to_string()))
}

pub fn simulate(cfg: &ScenarioConfig, dir: &Path) -> CliResult<i32> {
    let initial = cfg.initial_state()?;
    let control = cfg.control()?;
    let kappa = cfg.toughness()?;
    let sol = solve_front(&initial, &control, &kappa, &cfg.solver())?;
    prepare(dir)?;
    write_solution(dir, &sol, cfg.horizon)?;
    Ok(0)
}

pub fn initial_branch(cfg: &ScenarioConfig, dir: &Path) -> CliResult<i32> {
    let initial = cfg.initial_state()?;
    let kappa = cfg.toughness()?;
    let ib = solve_initial_branch(&initial, &kappa, &cfg.solver())?;
    prepare(dir)?;
    write_front(dir, "initial_branch.csv", "ell", &ib.front)?;
    write_text(
        dir,
        "initial_branch.txt",
        &[
            ("t_star", fmt(ib.t_star)),
            ("ell_star", fmt(ib.ell_star)),
            ("ell_star_prime", fmt(ib.ell_star_prime)),
            ("authoritative", ib.authoritative.to_string()),
        ],
    )?;
    Ok(0)
}

fn branch_for(cfg: &ScenarioConfig) -> CliResult<BranchResult> {
    let target = cfg.target_state()?;
    let kappa = cfg.toughness()?;
    let c1 = cfg.regularity() == Regularity::C1;
    Ok(match cfg.branch.kind {
        BranchKind::Static => {
            if !(cfg.horizon > 2.0 * target.ell0) {
                return Err(debond::Error::InfeasibleTime(format!(
                    "static branch needs T > 2 lbar0 = {}, got T = {}",
                    2.0 * target.ell0,
                    cfg.horizon
                ))
                .into());
            }
            static_branch(&target, &kappa, cfg.horizon, cfg.solver.h, c1)?
        }
        BranchKind::Computed => solve_final_branch(&target, &kappa, cfg.horizon, &cfg.branch_policy()?)?,
    })
}

fn branch_lines(b: &BranchResult) -> Vec<(&'static str, String)> {
    vec![
        ("t_bar_star", fmt(b.t_bar_star)),
        ("ell_bar_star", fmt(b.ell_bar_star)),
        ("ell_bar_star_prime", fmt(b.ell_bar_star_prime)),
        ("alpha", fmt(b.alpha)),
        ("alternatives", b.alternatives.iter().filter(|&&a| a).count().to_string()),
    ]
}

pub fn final_branch(cfg: &ScenarioConfig, dir: &Path) -> CliResult<i32> {
    let b = branch_for(cfg)?;
    prepare(dir)?;
    write_front(dir, "branch.csv", "L", &b.front)?;
    write_text(dir, "branch.txt", &branch_lines(&b))?;
    Ok(0)
}

pub fn check_admissible(cfg: &ScenarioConfig, dir: &Path) -> CliResult<i32> {
    let target = cfg.target_state()?;
    let kappa = cfg.toughness()?;
    let tol = DEFAULT_TOL.max(10.0 * cfg.solver.h);
    let mut rows: Vec<(String, bool, f64)> = Vec::new();
    for c in check_target(&target, &kappa, tol)?.checks {
        rows.push((c.name.to_string(), c.passed, c.residual));
    }
    let class = classify_final_state(&target, &kappa, tol);
    rows.push(("final state classified".into(), class.is_ok(), class.as_ref().map_or(f64::NAN, |c| c.alpha)));
    // damping bound against the toughness at the target length
    let k_end = kappa.at(target.ell0)?;
    let kappa_along = SampledFunction::constant(k_end, 0.0, target.ell0)?;
    let d = check_damping_bound(&target, &kappa_along, 1e-12 * k_end)?;
    rows.push(("|ybar1 + ybar0'|^2 <= 2 kappa".into(), d.passed, d.worst_violation.max(0.0)));
    prepare(dir)?;
    let path = dir.join("admissibility.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| out_err(&path, e))?;
    w.write_record(["check", "passed", "residual"]).map_err(|e| out_err(&path, e))?;
    for (name, ok, r) in &rows {
        w.write_record([name.clone(), ok.to_string(), fmt(*r)]).map_err(|e| out_err(&path, e))?;
    }
    w.flush().map_err(|e| out_err(&path, e))?;
    Ok(if rows.iter().all(|r| r.1) { 0 } else { 1 })
}

fn synthesis(cfg: &ScenarioConfig) -> CliResult<SynthesisReport> {
    let initial = cfg.initial_state()?;
    let target = cfg.target_state()?;
    let kappa = cfg.toughness()?;
    let branch = branch_for(cfg)?;
    let solver = cfg.solver();
    Ok(match cfg.regularity() {
        Regularity::C01 => synthesize_c01(&initial, &target, &kappa, &branch, &solver)?,
        Regularity::C1 => synthesize_c1(&initial, &target, &kappa, &branch, &solver)?,
    })
}

fn write_synthesis(dir: &Path, rep: &SynthesisReport) -> CliResult<()> {
    write_control(dir, &rep.control)?;
    write_front(dir, "branch.csv", "L", &rep.branch.front)?;
    let p = &rep.plan;
    let [s1, s2, s3] = rep.stage_boundaries;
    let mut lines = vec![
        ("case", p.case.name().to_string()),
        ("regularity", rep.regularity.name().to_string()),
        ("v", fmt(p.v)),
        ("delta", fmt(p.delta)),
        ("t_circ", fmt(p.t_circ)),
        ("t_star", fmt(p.t_star)),
        ("ell_star", fmt(p.ell_star)),
        ("ell_star_prime", fmt(p.ell_star_prime)),
        ("t_bar_star", fmt(p.t_bar_star)),
        ("ell_bar_star", fmt(p.ell_bar_star)),
        ("ell_bar_star_prime", fmt(p.ell_bar_star_prime)),
        ("stage1", format!("{},{}", fmt(s1.0), fmt(s1.1))),
        ("stage2", format!("{},{}", fmt(s2.0), fmt(s2.1))),
        ("stage3", format!("{},{}", fmt(s3.0), fmt(s3.1))),
        ("max_uprime_jump", fmt(rep.max_uprime_jump)),
        ("max_speed_jump", fmt(rep.max_speed_jump)),
    ];
    lines.push(("alpha", fmt(rep.branch.alpha)));
    write_text(dir, "plan.txt", &lines)
}

pub fn synthesize(cfg: &ScenarioConfig, dir: &Path) -> CliResult<i32> {
    let rep = synthesis(cfg)?;
    prepare(dir)?;
    write_synthesis(dir, &rep)?;
    Ok(0)
}

/// Synthesizes (or replays `control_file`), simulates and compares the
/// terminal state with the target.
pub fn verify(cfg: &ScenarioConfig, dir: &Path, control_file: Option<&Path>) -> CliResult<i32> {
    let initial = cfg.initial_state()?;
    let target = cfg.target_state()?;
    let kappa = cfg.toughness()?;
    let solver = cfg.solver();
    let control = match control_file {
        Some(path) => read_control(path, cfg.regularity())?,
        None => {
            let rep = synthesis(cfg)?;
            prepare(dir)?;
            write_synthesis(dir, &rep)?;
            rep.control
        }
    };
    let v = verify_control(&initial, &target, &kappa, &control, &solver)?;
    let tol = &cfg.verify;
    let rows = [
        ("front_error", v.front_error, tol.front_tol),
        ("displacement_error", v.displacement_error, tol.displacement_tol),
        ("velocity_error", v.velocity_error, tol.velocity_tol),
    ];
    prepare(dir)?;
    let path = dir.join("verify.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| out_err(&path, e))?;
    w.write_record(["metric", "value", "tolerance", "passed"]).map_err(|e| out_err(&path, e))?;
    for (name, value, t) in rows {
        w.write_record([name.to_string(), fmt(value), fmt(t), (value <= t).to_string()])
            .map_err(|e| out_err(&path, e))?;
    }
    w.flush().map_err(|e| out_err(&path, e))?;
    Ok(if rows.iter().all(|r| r.1 <= r.2) { 0 } else { 1 })
}
