use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use qsl_core::linalg::Mat2;
use qsl_core::model::{HamiltonianParams, PulseProfile, QubitState};
use qsl_core::propagator::{
    average_energy, closed_form_propagator, evolve_closed_form, evolve_ode_oracle, trajectory,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `exp(-i·F·K)` via `K = (tr/2)·I + (gap/2)·n·σ`, independent of the
/// eigenvector construction used by the library.
fn pauli_propagator(p: &HamiltonianParams, action: f64) -> Mat2 {
    let k = p.coefficient_generator();
    let half_tr = 0.5 * (p.e11 + p.e22);
    let half_gap = 0.5 * p.gap();
    let global = C64::from_polar(1.0, -half_tr * action);
    if half_gap == 0.0 {
        return Mat2::IDENTITY.scale(global);
    }
    let traceless = k - Mat2::IDENTITY.scale(half_tr.into());
    let (s, c) = (half_gap * action).sin_cos();
    let rot = Mat2::IDENTITY.scale(c.into()) - traceless.scale(C64::new(0.0, s / half_gap));
    rot.scale(global)
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

/// A pulse of a random shape with values in [0.2, 2] defined on `[0, 10]`.
fn random_pulse(rng: &mut impl Rng) -> PulseProfile {
    let knots = |rng: &mut dyn rand::RngCore, n: usize| {
        let mut cuts: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(0.1..9.9)).collect();
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
            let n = rng.gen_range(1..6);
            let bps = knots(rng, n);
            let values = (0..bps.len() - 1).map(|_| rng.gen_range(0.2..2.0)).collect();
            PulseProfile::piecewise(bps, values).unwrap()
        }
        _ => {
            let n = rng.gen_range(2..8);
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

#[test]
fn closed_form_matches_rk4_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let params = random_params(&mut rng, 1.5);
        let pulse = random_pulse(&mut rng);
        let t = rng.gen_range(0.0..10.0);
        let psi0 = random_state(&mut rng);
        let exact = evolve_closed_form(&params, &pulse, t, &psi0).unwrap();
        let rk = evolve_ode_oracle(&params, &pulse, t, &psi0, 8192).unwrap();
        worst = worst.max(exact.max_component_diff(&rk));
        assert!((exact.norm_sqr() - 1.0).abs() < 1e-12);
    }
    assert!(worst <= 1e-8, "worst deviation {worst:e}");
}

#[test]
fn closed_form_matches_pauli_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..2000 {
        let p = random_params(&mut rng, 3.0);
        let action = rng.gen_range(0.0..20.0);
        let u = closed_form_propagator(&p, action).unwrap();
        let want = pauli_propagator(&p, action);
        assert!((*u.matrix() - want).max_abs() < 1e-10, "{p:?} F={action}");
    }
}

#[test]
fn synthesized_example_energy_times_duration() {
    // θ = 0 gate: e11 = e22 = e12 = 1, φ = π, τ = π/2, so E·τ = π/2.
    let p = HamiltonianParams::new(1.0, 1.0, 1.0, PI);
    let pulse = PulseProfile::constant(1.0).unwrap();
    let tau = PI / 2.0;
    let e = average_energy(&p, &pulse, tau, &QubitState::basis1()).unwrap();
    assert!((e.value() * tau - PI / 2.0).abs() < 1e-12);
    assert!(e.discrepancy() < 1e-10);
}

fn arb_params() -> impl Strategy<Value = HamiltonianParams> {
    (0.0..3.0f64, 0.0..3.0f64, 0.0..=1.0f64, 0.0..TAU).prop_filter_map("valid", |(a, b, u, phi)| {
        let p = HamiltonianParams::new(a, b, u * (a * b).sqrt(), phi);
        p.validate().is_valid().then_some(p)
    })
}

fn arb_pulse() -> impl Strategy<Value = PulseProfile> {
    any::<u64>().prop_map(|seed| random_pulse(&mut ChaCha8Rng::seed_from_u64(seed)))
}

fn arb_state() -> impl Strategy<Value = QubitState> {
    any::<u64>().prop_map(|seed| random_state(&mut ChaCha8Rng::seed_from_u64(seed)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn propagator_is_unitary(p in arb_params(), action in 0.0..50.0f64) {
        let u = closed_form_propagator(&p, action).unwrap();
        prop_assert!(u.defect() <= 1e-10);
        prop_assert!((u.matrix().det().norm() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn propagator_composes(p in arb_params(), f1 in 0.0..10.0f64, f2 in 0.0..10.0f64) {
        let u1 = closed_form_propagator(&p, f1).unwrap();
        let u2 = closed_form_propagator(&p, f2).unwrap();
        let whole = closed_form_propagator(&p, f1 + f2).unwrap();
        prop_assert!((*whole.matrix() - *u1.then(&u2).matrix()).max_abs() <= 1e-10);
    }

    #[test]
    fn time_rescaling_invariance(
        p in arb_params(), pulse in arb_pulse(), psi0 in arb_state(),
        s in 0.01..1.0f64, c in 0.1..10.0f64,
    ) {
        let t = 10.0 * s;
        let fast = pulse.compressed(c).unwrap();
        let a = evolve_closed_form(&p, &pulse, t, &psi0).unwrap();
        let b = evolve_closed_form(&p, &fast, t / c, &psi0).unwrap();
        prop_assert!(a.max_component_diff(&b) <= 1e-12);
        let ea = average_energy(&p, &pulse, t, &psi0).unwrap().value() * t;
        let eb = average_energy(&p, &fast, t / c, &psi0).unwrap().value() * (t / c);
        prop_assert!((ea - eb).abs() <= 1e-12 * ea.abs().max(1.0));
    }

    #[test]
    fn energy_is_conserved(p in arb_params(), pulse in arb_pulse(), psi0 in arb_state()) {
        let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.25).collect();
        let rec = trajectory(&p, &pulse, &times, &psi0).unwrap();
        prop_assert!(rec.energy_drift() <= 1e-9);
    }

    #[test]
    fn average_energy_routes_agree(p in arb_params(), pulse in arb_pulse(), psi0 in arb_state(), s in 0.05..1.0f64) {
        let e = average_energy(&p, &pulse, 10.0 * s, &psi0).unwrap();
        prop_assert!(e.discrepancy() <= 1e-9, "{:?}", e);
    }
}
