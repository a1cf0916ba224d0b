use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::str::FromStr;

use anyhow::{anyhow, Context};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use qsl_core::model::{HamiltonianSpec, QubitState};
use qsl_core::propagator::{evolve_ode_oracle, trajectory};
use qsl_core::search::{run_search, BoundReport, SearchConfig, SearchTarget};
use qsl_core::speedlimit::{self, si};
use qsl_core::synthesis::{synthesize_gate, Branch, GateSpec};
use qsl_core::Error as CoreError;

use crate::args::*;
use crate::output::{num, sibling, write_file, Csv, RunManifest};
use crate::{usage, Status, UsageError};

/// States whose norm is further than this from 1 are rejected.
pub const STATE_NORM_REJECT: f64 = 1e-9;
/// States off by more than this (but within the rejection limit) are
/// renormalized with a warning.
pub const STATE_NORM_WARN: f64 = 1e-12;

pub fn dispatch(cli: &Cli) -> anyhow::Result<Status> {
    match &cli.command {
        Command::Bound(a) => cmd_bound(a),
        Command::Synthesize(a) => cmd_synthesize(cli, a),
        Command::Simulate(a) => cmd_simulate(cli, a),
        Command::VerifyBound(a) => cmd_verify_bound(cli, a),
        Command::Sweep(a) => cmd_sweep(cli, a),
    }
}

fn angle_unit(degrees: bool) -> f64 {
    if degrees {
        PI / 180.0
    } else {
        1.0
    }
}

/// Input-value errors from the core library surface as usage errors.
fn as_usage(err: CoreError) -> anyhow::Error {
    UsageError(err.to_string()).into()
}

/// Parses `start:stop:step` into the inclusive grid `start + k·step`.
pub fn parse_grid(text: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return usage(format!("grid {text:?} is not start:stop:step"));
    }
    let mut v = [0.0f64; 3];
    for (slot, part) in v.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| UsageError(format!("grid {text:?}: {part:?} is not a number")))?;
    }
    let [start, stop, step] = v;
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) || step <= 0.0 {
        return usage(format!("grid {text:?} needs finite bounds and a positive step"));
    }
    if stop < start {
        return usage(format!("grid {text:?} is empty"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|k| start + k as f64 * step).collect())
}

/// Parses `"a1,a2"` into a state, renormalizing small norm errors.
pub fn parse_state(text: &str) -> anyhow::Result<QubitState> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return usage(format!("state {text:?} must be two comma-separated amplitudes"));
    }
    let parse = |s: &str| {
        Complex64::from_str(s).map_err(|_| UsageError(format!("amplitude {s:?} is not a complex number")))
    };
    let state = QubitState::new(parse(parts[0])?, parse(parts[1])?);
    let deviation = (state.norm_sqr() - 1.0).abs();
    if deviation > STATE_NORM_REJECT {
        return usage(format!(
            "state {text:?} has |a1|²+|a2|² = {}, not normalized",
            state.norm_sqr()
        ));
    }
    if deviation > STATE_NORM_WARN {
        eprintln!("warning: renormalizing state (|a1|²+|a2|² = {})", state.norm_sqr());
    }
    state.normalized(STATE_NORM_REJECT).map_err(as_usage)
}

#[derive(Debug, Serialize)]
struct BoundOutput {
    kind: &'static str,
    angle: f64,
    energy: f64,
    units: Units,
    tau: f64,
    normalized_bound: f64,
}

fn cmd_bound(args: &BoundArgs) -> anyhow::Result<Status> {
    let unit = angle_unit(args.degrees);
    let theta = args.theta.map(|t| t * unit);
    let alpha = args.alpha.map(|a| a * unit);
    if theta.is_some() && alpha.is_some() {
        return usage("--theta and --alpha are mutually exclusive");
    }

    let (energy, units) = match args.wavelength {
        Some(lambda) => {
            if args.energy.is_some() {
                return usage("--wavelength and --energy are mutually exclusive");
            }
            if args.units == Some(Units::Natural) {
                return usage("--wavelength requires SI units");
            }
            (si::from_wavelength(lambda).map_err(as_usage)?.0, Units::Si)
        }
        None => {
            let Some(energy) = args.energy else {
                return usage("--energy is required unless --wavelength is given");
            };
            if theta.is_none() && alpha.is_none() {
                return usage("one of --theta, --alpha or --wavelength is required");
            }
            (energy, args.units.unwrap_or(Units::Natural))
        }
    };

    let (kind, angle, normalized_bound, tau) = match (alpha, units) {
        (Some(a), Units::Natural) => ("alpha", a, speedlimit::normalized_rotation_bound(a), speedlimit::min_rotation_time(a, energy)),
        (Some(a), Units::Si) => ("alpha", a, speedlimit::normalized_rotation_bound(a), si::min_rotation_time(a, energy)),
        (None, Units::Natural) => {
            let t = theta.unwrap_or(0.0);
            ("theta", t, speedlimit::normalized_gate_bound(t), speedlimit::min_gate_time(t, energy))
        }
        (None, Units::Si) => {
            let t = theta.unwrap_or(0.0);
            ("theta", t, speedlimit::normalized_gate_bound(t), si::min_gate_time(t, energy))
        }
    };
    let out = BoundOutput {
        kind,
        angle,
        energy,
        units,
        tau: tau.map_err(as_usage)?,
        normalized_bound,
    };
    if args.json {
        println!("{}", serde_json::to_string_pretty(&out)?);
    } else {
        if units == Units::Si {
            println!("tau={:e} s", out.tau);
            println!("{kind}={}", out.angle);
            println!("energy={:e} J", out.energy);
        } else {
            println!("tau={}", out.tau);
            println!("{kind}={}", out.angle);
            println!("energy={}", out.energy);
        }
        println!("normalized_bound={}", out.normalized_bound);
    }
    Ok(Status::Passed)
}

fn cmd_synthesize(cli: &Cli, args: &SynthesizeArgs) -> anyhow::Result<Status> {
    let branch = match args.branch {
        BranchArg::Auto => Branch::Auto,
        BranchArg::Plus => Branch::Plus,
        BranchArg::Minus => Branch::Minus,
    };
    let spec = GateSpec::new(args.theta * angle_unit(args.degrees), args.energy).with_branch(branch);
    let gate = synthesize_gate(&spec).map_err(as_usage)?;
    let report = gate.verify(args.tol)?;

    write_file(&args.out, &gate.spec().to_json())?;
    let report_json = serde_json::to_string_pretty(&report)?;
    write_file(&sibling(&args.out, "report.json"), &report_json)?;
    RunManifest::for_cli(cli, None).write_beside(&args.out)?;
    println!("{report_json}");
    if !report.saturates {
        eprintln!("gate does not saturate the bound within {}", args.tol);
    }
    Ok(Status::from_bool(report.saturates))
}

fn cmd_simulate(cli: &Cli, args: &SimulateArgs) -> anyhow::Result<Status> {
    let text = fs::read_to_string(&args.spec).with_context(|| format!("reading {}", args.spec.display()))?;
    let spec = HamiltonianSpec::from_json(&text).map_err(|e| anyhow!("{}: {e}", args.spec.display()))?;
    let psi0 = parse_state(&args.state)?;
    if args.t.is_nan() || args.t < 0.0 {
        return usage(format!("--t must be nonnegative, got {}", args.t));
    }
    if args.points == 0 {
        return usage("--points must be at least 1");
    }
    if args.steps == 0 {
        return usage("--steps must be at least 1");
    }
    let params = spec.params();
    let times: Vec<f64> = if args.t == 0.0 || args.points == 1 {
        vec![args.t]
    } else {
        let n = args.points - 1;
        (0..=n).map(|k| args.t * k as f64 / n as f64).collect()
    };
    let rec = trajectory(&params, &spec.pulse, &times, &psi0)?;

    let mut header = vec!["t", "F", "re_a1", "im_a1", "re_a2", "im_a2", "energy"];
    if args.oracle {
        header.extend(["ode_re_a1", "ode_im_a1", "ode_re_a2", "ode_im_a2"]);
    }
    let oracle: Vec<QubitState> = if args.oracle {
        times
            .par_iter()
            .map(|&t| evolve_ode_oracle(&params, &spec.pulse, t, &psi0, args.steps))
            .collect::<Result<_, _>>()?
    } else {
        Vec::new()
    };

    let mut csv = Csv::new(&header);
    let mut max_dev: f64 = 0.0;
    for i in 0..rec.len() {
        let s = rec.states[i];
        let mut row = vec![
            num(rec.times[i]),
            num(rec.actions[i]),
            num(s.a1.re),
            num(s.a1.im),
            num(s.a2.re),
            num(s.a2.im),
            num(rec.energies[i]),
        ];
        if let Some(o) = oracle.get(i) {
            row.extend([num(o.a1.re), num(o.a1.im), num(o.a2.re), num(o.a2.im)]);
            max_dev = max_dev.max(s.max_component_diff(o));
        }
        csv.push(row);
    }
    csv.emit(args.out.as_deref(), false)?;
    if let Some(out) = &args.out {
        RunManifest::for_cli(cli, None).write_beside(out)?;
    }
    if args.oracle {
        eprintln!("max_deviation={max_dev:e}");
    }
    Ok(Status::Passed)
}

pub const SWEEP_HEADER: [&str; 8] = [
    "kind",
    "angle",
    "bound",
    "best_product",
    "gap",
    "gate_error",
    "samples",
    "seed",
];

/// Outcome of a verify-bound run over a grid.
#[derive(Debug, Clone)]
pub struct BoundSweep {
    pub targets: Vec<SearchTarget>,
    /// One entry per grid point, in grid order; `None` when no candidate
    /// reached the fidelity tolerance.
    pub reports: Vec<Option<BoundReport>>,
}

impl BoundSweep {
    pub fn min_gap(&self) -> Option<f64> {
        self.reports.iter().flatten().map(|r| r.gap).reduce(f64::min)
    }

    pub fn violations(&self) -> usize {
        self.reports.iter().flatten().filter(|r| r.violates_bound()).count()
    }

    pub fn to_csv(&self, budget: u64, seed: u64) -> Csv {
        let mut csv = Csv::new(&SWEEP_HEADER);
        for (target, report) in self.targets.iter().zip(&self.reports) {
            let row = match report {
                Some(r) => vec![
                    r.kind.clone(),
                    num(r.angle),
                    num(r.bound),
                    num(r.best_product),
                    num(r.gap),
                    num(r.gate_error),
                    r.samples.to_string(),
                    r.seed.to_string(),
                ],
                None => vec![
                    target.kind().to_string(),
                    num(target.angle()),
                    num(target.bound()),
                    "NaN".into(),
                    "NaN".into(),
                    "NaN".into(),
                    budget.to_string(),
                    seed.to_string(),
                ],
            };
            csv.push(row);
        }
        csv
    }
}

/// Grid endpoints written with a few decimals (such as 1.5708) land just
/// past π/2; pull those back onto the boundary.
fn snap_alpha(alpha: f64) -> f64 {
    if alpha > FRAC_PI_2 && alpha - FRAC_PI_2 <= ALPHA_SNAP {
        FRAC_PI_2
    } else {
        alpha
    }
}

/// Largest overshoot past π/2 that [`snap_alpha`] absorbs.
pub const ALPHA_SNAP: f64 = 1e-4;

/// Runs the bound search at every grid point, in order.
pub fn run_bound_sweep(args: &VerifyBoundArgs) -> anyhow::Result<BoundSweep> {
    let unit = angle_unit(args.degrees);
    let targets: Vec<SearchTarget> = match (&args.theta_grid, &args.alpha_grid) {
        (Some(g), None) => parse_grid(g)?.into_iter().map(|t| SearchTarget::Theta(t * unit)).collect(),
        (None, Some(g)) => parse_grid(g)?
            .into_iter()
            .map(|a| SearchTarget::Alpha(snap_alpha(a * unit)))
            .collect(),
        _ => return usage("exactly one of --theta-grid and --alpha-grid is required"),
    };
    let mut reports = Vec::with_capacity(targets.len());
    for &target in &targets {
        let config = SearchConfig {
            refine_levels: args.levels,
            ..SearchConfig::new(target, args.epsilon, args.budget, args.seed)
        };
        match run_search(&config) {
            Ok(r) => reports.push(Some(r)),
            Err(CoreError::NoFeasibleCandidate { samples }) => {
                eprintln!(
                    "warning: {} = {}: no feasible candidate in {samples} samples",
                    target.kind(),
                    target.angle()
                );
                reports.push(None);
            }
            Err(e) => return Err(as_usage(e)),
        }
    }
    Ok(BoundSweep { targets, reports })
}

fn cmd_verify_bound(cli: &Cli, args: &VerifyBoundArgs) -> anyhow::Result<Status> {
    let sweep = run_bound_sweep(args)?;
    sweep
        .to_csv(args.budget, args.seed)
        .emit(args.out.as_deref(), args.append)?;
    if let Some(out) = &args.out {
        RunManifest::for_cli(cli, Some(args.seed)).write_beside(out)?;
    }
    if let Some(path) = &args.reports {
        write_file(path, &serde_json::to_string_pretty(&sweep.reports)?)?;
    }
    let summary = format!(
        "min_gap={} rows={} violations={}",
        sweep.min_gap().map_or("NaN".to_string(), |g| g.to_string()),
        sweep.reports.len(),
        sweep.violations()
    );
    if args.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(Status::from_bool(sweep.violations() == 0))
}

fn cmd_sweep(cli: &Cli, args: &SweepArgs) -> anyhow::Result<Status> {
    let unit = angle_unit(args.degrees);
    let thetas = parse_grid(&args.theta_grid)?;
    if args.energies.is_empty() {
        return usage("--energies is empty");
    }
    let cells: Vec<(f64, f64)> = thetas
        .iter()
        .flat_map(|&t| args.energies.iter().map(move |&e| (t * unit, e)))
        .collect();
    let results = cells
        .par_iter()
        .map(|&(theta, energy)| {
            let gate = synthesize_gate(&GateSpec::new(theta, energy)).map_err(as_usage)?;
            let report = gate.verify(args.tol)?;
            Ok((gate, report))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    let mut csv = Csv::new(&[
        "theta",
        "energy",
        "branch",
        "tau",
        "product_normalized",
        "bound",
        "gate_error",
        "saturates",
    ]);
    for ((theta, energy), (gate, r)) in cells.iter().zip(&results) {
        csv.push(vec![
            num(*theta),
            num(*energy),
            format!("{:?}", gate.branch).to_lowercase(),
            num(r.tau),
            num(r.product_normalized),
            num(r.bound),
            num(r.gate_error),
            r.saturates.to_string(),
        ]);
    }
    csv.emit(args.out.as_deref(), false)?;
    if let Some(out) = &args.out {
        RunManifest::for_cli(cli, None).write_beside(out)?;
    }
    Ok(Status::from_bool(results.iter().all(|(_, r)| r.saturates)))
}
