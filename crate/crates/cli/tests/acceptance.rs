//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report is always printed:
//! `cargo test -p qsl-cli --test acceptance`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI, TAU};
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64 as C64;
use qsl_core::model::{HamiltonianParams, PulseProfile, QubitState};
use qsl_core::propagator::{
    average_energy, closed_form_propagator, evolve_closed_form, evolve_ode_oracle, trajectory,
};
use qsl_core::search::{rotation_search, SearchConfig, SearchTarget};
use qsl_core::speedlimit::{self, si};
use qsl_core::synthesis::{synthesize_gate, GateSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_params(rng: &mut impl Rng, max_energy: f64) -> HamiltonianParams {
    let e11 = rng.gen_range(0.0..max_energy);
    let e22 = rng.gen_range(0.0..max_energy);
    let u: f64 = rng.gen_range(0.0..=1.0);
    let p = HamiltonianParams::new(e11, e22, u * (e11 * e22).sqrt(), rng.gen_range(0.0..TAU));
    if p.validate().is_valid() {
        p
    } else {
        HamiltonianParams::new(e11, e22, 0.0, p.phi)
    }
}

fn random_pulse(rng: &mut impl Rng) -> PulseProfile {
    let knots = |rng: &mut dyn rand::RngCore, n: usize| {
        let mut cuts: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..9.9)).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut out = vec![0.0];
        out.extend(cuts);
        out.push(10.0);
        out
    };
    match rng.gen_range(0..3) {
        0 => PulseProfile::constant(rng.gen_range(0.2..2.0)).unwrap(),
        1 => {
            let n = rng.gen_range(0..5);
            let bps = knots(rng, n);
            let values = (0..bps.len() - 1).map(|_| rng.gen_range(0.2..2.0)).collect();
            PulseProfile::piecewise(bps, values).unwrap()
        }
        _ => {
            let n = rng.gen_range(0..6);
            let grid = knots(rng, n);
            let values = grid.iter().map(|_| rng.gen_range(0.2..2.0)).collect();
            PulseProfile::sampled(grid, values).unwrap()
        }
    }
}

fn random_state(rng: &mut impl Rng) -> QubitState {
    let a = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let b = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
    QubitState::new(a / n, b / n)
}

fn calcium_ion_time() -> Outcome {
    let energy = si::from_wavelength(397e-9).unwrap().0;
    let tau = si::min_gate_time(0.0, energy).unwrap();
    let rel = (tau / 6.62e-16 - 1.0).abs();
    check(rel <= 5e-3, format!("tau = {tau:.4e} s, relative deviation {rel:.2e} (tol 5e-3)"))
}

fn closed_form_vs_rk4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let params = random_params(&mut rng, 1.5);
        let pulse = random_pulse(&mut rng);
        let t = rng.gen_range(0.0..10.0);
        let psi0 = random_state(&mut rng);
        let exact = evolve_closed_form(&params, &pulse, t, &psi0).unwrap();
        let rk = evolve_ode_oracle(&params, &pulse, t, &psi0, 8192).unwrap();
        worst = worst.max(exact.max_component_diff(&rk));
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst <= 1e-8 && secs < 10.0,
        format!("max deviation {worst:.2e} (tol 1e-8), {secs:.2} s (limit 10 s)"),
    )
}

fn synthesis_saturates() -> Outcome {
    let thetas = [0.0, 0.3, FRAC_PI_4, FRAC_PI_2, 1.9, PI - 0.01, PI, 1.5 * PI];
    let mut worst_err: f64 = 0.0;
    let mut worst_rel: f64 = 0.0;
    for &theta in &thetas {
        for energy in [0.5, 1.0, 2.0] {
            let r = synthesize_gate(&GateSpec::new(theta, energy)).unwrap().verify(1e-9).unwrap();
            worst_err = worst_err.max(r.gate_error);
            worst_rel = worst_rel.max((r.product_normalized - r.bound).abs() / r.bound);
        }
    }
    check(
        worst_err <= 1e-9 && worst_rel <= 1e-12,
        format!("24 gates: max gate error {worst_err:.2e} (tol 1e-9), max relative product offset {worst_rel:.2e} (tol 1e-12)"),
    )
}

fn search_respects_bound() -> Outcome {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_qsl"))
        .args([
            "verify-bound",
            "--theta-grid",
            "0:3.1:0.31",
            "--epsilon",
            "1e-3",
            "--budget",
            "100000",
            "--seed",
            "20240601",
        ])
        .output()
        .expect("run qsl");
    let secs = start.elapsed().as_secs_f64();
    let csv = String::from_utf8_lossy(&out.stdout);
    let rows = csv.lines().count().saturating_sub(1);
    let stderr = String::from_utf8_lossy(&out.stderr);
    let min_gap: f64 = stderr
        .lines()
        .find_map(|l| l.strip_prefix("min_gap="))
        .and_then(|l| l.split_whitespace().next())
        .and_then(|g| g.parse().ok())
        .unwrap_or(f64::NAN);
    check(
        out.status.success() && rows == 11 && min_gap >= -0.05 && secs < 120.0,
        format!("{rows} grid points, min gap {min_gap:.2e} (tol -0.05), {secs:.1} s (limit 120 s)"),
    )
}

fn rotation_bound() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for energy in [0.5, 1.0, 3.0] {
        let exact = speedlimit::min_rotation_time(FRAC_PI_2, energy).unwrap()
            == speedlimit::orthogonalization_time(energy).unwrap();
        pass &= exact;
    }
    parts.push(format!("alpha = pi/2 equals orthogonalization time: {pass}"));
    for alpha in [FRAC_PI_8, FRAC_PI_4, 3.0 * FRAC_PI_8] {
        let r = rotation_search(&SearchConfig::new(SearchTarget::Alpha(alpha), 1e-3, 100_000, 7)).unwrap();
        let ok = r.best_product >= r.bound - 0.05 && r.best_product <= r.bound + 0.10;
        pass &= ok;
        parts.push(format!("alpha {alpha:.4}: {:.4} vs bound {:.4}", r.best_product, r.bound));
    }
    check(pass, format!("{} (window [-0.05, +0.10])", parts.join("; ")))
}

fn invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut defect, mut drift, mut rescale, mut period): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..500 {
        let p = random_params(&mut rng, 3.0);
        defect = defect.max(closed_form_propagator(&p, rng.gen_range(0.0..50.0)).unwrap().defect());

        let pulse = random_pulse(&mut rng);
        let psi0 = random_state(&mut rng);
        let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.25).collect();
        drift = drift.max(trajectory(&p, &pulse, &times, &psi0).unwrap().energy_drift());

        let t = rng.gen_range(0.1..10.0);
        let c = rng.gen_range(0.1..10.0);
        let fast = pulse.compressed(c).unwrap();
        let a = evolve_closed_form(&p, &pulse, t, &psi0).unwrap();
        let b = evolve_closed_form(&p, &fast, t / c, &psi0).unwrap();
        rescale = rescale.max(a.max_component_diff(&b));
        let ea = average_energy(&p, &pulse, t, &psi0).unwrap().value() * t;
        let eb = average_energy(&p, &fast, t / c, &psi0).unwrap().value() * (t / c);
        rescale = rescale.max((ea - eb).abs() / ea.abs().max(1.0));

        let theta = rng.gen_range(0.0..20.0);
        let e = rng.gen_range(0.1..5.0);
        let t0 = speedlimit::min_gate_time(theta, e).unwrap();
        let t1 = speedlimit::min_gate_time(theta + PI, e).unwrap();
        // Forming θ+π rounds, which shifts θ mod π by up to one ulp of θ+π.
        let slack = 2.0 * f64::EPSILON * (theta + PI) * (2.0 / PI) * speedlimit::orthogonalization_time(e).unwrap();
        period = period.max((t1 - t0).abs() / slack.max(f64::MIN_POSITIVE));
    }
    check(
        defect <= 1e-10 && drift <= 1e-9 && rescale <= 1e-12 && period <= 1.0,
        format!(
            "unitarity defect {defect:.2e} (tol 1e-10), energy drift {drift:.2e} (tol 1e-9), \
             rescaling {rescale:.2e} (tol 1e-12), periodicity {period:.2} x rounding slack (tol 1)"
        ),
    )
}

fn main() {
    let criteria: [Criterion; 6] = [
        ("minimum swap time for a 397 nm transition is 6.62e-16 s", calcium_ion_time),
        ("closed-form propagator matches RK4 on 1000 random instances", closed_form_vs_rk4),
        ("synthesized gates saturate the bound on the theta x energy grid", synthesis_saturates),
        ("random search does not beat the bound on the 11-point theta grid", search_respects_bound),
        ("rotation bound: exact at pi/2, search lands near it elsewhere", rotation_bound),
        ("unitarity, energy conservation, time rescaling and periodicity", invariants),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!("{} [{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
