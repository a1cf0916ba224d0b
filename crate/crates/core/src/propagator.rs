//! Exact time evolution under `H(t) = f(t)·H0` and an independent
//! Runge–Kutta integrator used as a cross-check.
//!
//! Since `H(t)` commutes with itself at all times, the propagator depends on
//! the pulse only through the accumulated action `F(t)`:
//!
//! ```text
//! a(t) = U(F(t))·a(0),   U(F) = exp(-i·F·K)
//! ```
//!
//! with `K` the coefficient generator of [`HamiltonianParams`]. The closed
//! form below diagonalizes `K` through the combinations
//! `b_i = k_i·a1 + a2`, which evolve as pure phases `exp(-i·E_i·F)`.

use crate::error::{Error, Result};
use crate::linalg::{Mat2, C64};
use crate::model::{HamiltonianParams, PulseProfile, PulseShape, QubitState};
use crate::quad::adaptive_simpson;

/// Below `DEGENERATE_E12 · max(e11, e22, 1)` the off-diagonal coupling is
/// treated as zero and the diagonal solution is used.
pub const DEGENERATE_E12: f64 = 1e-14;

/// A 2×2 propagator acting on coefficient pairs `(a1, a2)`.
///
/// Column `i` is the image of the basis state `ψ_i(0)`, so `u21` is the
/// `a2` component reached from `ψ1(0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2 {
    matrix: Mat2,
    defect: f64,
}

impl Unitary2 {
    pub fn from_matrix(matrix: Mat2) -> Self {
        Unitary2 {
            defect: unitarity_defect(&matrix),
            matrix,
        }
    }

    pub fn identity() -> Self {
        Unitary2::from_matrix(Mat2::IDENTITY)
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.matrix
    }

    /// Largest entry of `U†U − I`, computed at construction.
    pub fn defect(&self) -> f64 {
        self.defect
    }

    pub fn u11(&self) -> C64 {
        self.matrix.0[0][0]
    }
    pub fn u12(&self) -> C64 {
        self.matrix.0[0][1]
    }
    pub fn u21(&self) -> C64 {
        self.matrix.0[1][0]
    }
    pub fn u22(&self) -> C64 {
        self.matrix.0[1][1]
    }

    pub fn apply(&self, psi: &QubitState) -> QubitState {
        QubitState::from_array(self.matrix.apply(psi.as_array()))
    }

    /// `self` followed by `later`, i.e. `later · self`.
    pub fn then(&self, later: &Unitary2) -> Unitary2 {
        Unitary2::from_matrix(later.matrix * self.matrix)
    }
}

/// Largest entry magnitude of `U†U − I`.
pub fn unitarity_defect(u: &Mat2) -> f64 {
    (u.adjoint() * *u - Mat2::IDENTITY).max_abs()
}

/// Propagator after accumulated action `action`.
pub fn closed_form_propagator(params: &HamiltonianParams, action: f64) -> Result<Unitary2> {
    params.check()?;
    Ok(propagator_unchecked(params, action))
}

pub(crate) fn propagator_unchecked(params: &HamiltonianParams, action: f64) -> Unitary2 {
    let HamiltonianParams { e11, e22, e12, phi } = *params;
    if e12 < DEGENERATE_E12 * params.scale() {
        let a1 = C64::from_polar(1.0, -e22 * action);
        let a2 = C64::from_polar(1.0, -e11 * action);
        return Unitary2::from_matrix(Mat2::new(a1, 0.0.into(), 0.0.into(), a2));
    }

    // Real parts of k1, k2 solve e12·x² + (e11 − e22)·x − e12 = 0 with
    // x1·x2 = −1; take the root without cancellation and derive the other.
    let diff = e22 - e11;
    let gap = params.gap();
    let (x1, x2) = if diff >= 0.0 {
        let x1 = (diff + gap) / (2.0 * e12);
        (x1, -1.0 / x1)
    } else {
        let x2 = (diff - gap) / (2.0 * e12);
        (-1.0 / x2, x2)
    };
    let phase = C64::from_polar(1.0, phi);
    let k1 = phase * x1;
    let k2 = phase * x2;
    let (energy1, energy2) = params.eigenvalues_unchecked();
    let p1 = C64::from_polar(1.0, -energy1 * action);
    let p2 = C64::from_polar(1.0, -energy2 * action);
    let d = k1 - k2;

    // a_ij: component j of the state evolved from ψ_i(0).
    let a11 = (k1 * p1 - k2 * p2) / d;
    let a12 = k1 * k2 * (p2 - p1) / d;
    let a21 = (p1 - p2) / d;
    let a22 = (k1 * p2 - k2 * p1) / d;
    Unitary2::from_matrix(Mat2::new(a11, a21, a12, a22))
}

/// State at time `t` from the closed form.
pub fn evolve_closed_form(
    params: &HamiltonianParams,
    pulse: &PulseProfile,
    t: f64,
    psi0: &QubitState,
) -> Result<QubitState> {
    let action = pulse.accumulated_action(t)?;
    Ok(closed_form_propagator(params, action)?.apply(psi0))
}

/// State at time `t` by classical fixed-step RK4 on `i·da/dt = f(t)·K·a`.
///
/// The interval is split at the points where `f` is not smooth and the
/// `steps` budget is shared between the pieces in proportion to their length
/// (at least one step each), so every step sees a smooth right-hand side.
pub fn evolve_ode_oracle(
    params: &HamiltonianParams,
    pulse: &PulseProfile,
    t: f64,
    psi0: &QubitState,
    steps: usize,
) -> Result<QubitState> {
    params.check()?;
    if steps == 0 {
        return Err(Error::ZeroSteps);
    }
    pulse.value_at(t)?;
    if t == 0.0 {
        return Ok(*psi0);
    }
    let k = params.coefficient_generator();
    let mut y = psi0.as_array();
    for (a, b) in pulse.smooth_segments(t) {
        let n = ((steps as f64) * (b - a) / t).round().max(1.0) as usize;
        let h = (b - a) / n as f64;
        let f = |s: f64| segment_value(pulse, a, b, s);
        let rhs = |s: f64, y: [C64; 2]| -> [C64; 2] {
            let scale = C64::new(0.0, -f(s));
            let ky = k.apply(y);
            [scale * ky[0], scale * ky[1]]
        };
        for i in 0..n {
            let s = a + i as f64 * h;
            let k1 = rhs(s, y);
            let k2 = rhs(s + 0.5 * h, axpy(y, 0.5 * h, k1));
            let k3 = rhs(s + 0.5 * h, axpy(y, 0.5 * h, k2));
            let k4 = rhs(s + h, axpy(y, h, k3));
            for j in 0..2 {
                y[j] += (h / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
        }
    }
    Ok(QubitState::from_array(y))
}

fn axpy(y: [C64; 2], a: f64, x: [C64; 2]) -> [C64; 2] {
    [y[0] + x[0] * a, y[1] + x[1] * a]
}

/// `f(s)` for `s` in the smooth piece `[a, b]`, using the left limit at `b`.
fn segment_value(pulse: &PulseProfile, a: f64, b: f64, s: f64) -> f64 {
    let s = match pulse.shape() {
        PulseShape::Piecewise { .. } => 0.5 * (a + b),
        _ => s.clamp(a, b),
    };
    pulse.value_at(s).expect("segment lies inside the pulse domain")
}

/// A sampled trajectory. `energies` holds `⟨ψ(t)|H0|ψ(t)⟩`, which is
/// conserved along exact evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionRecord {
    pub times: Vec<f64>,
    pub actions: Vec<f64>,
    pub states: Vec<QubitState>,
    pub energies: Vec<f64>,
}

impl EvolutionRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Spread `max − min` of the recorded energies.
    pub fn energy_drift(&self) -> f64 {
        let max = self.energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = self.energies.iter().copied().fold(f64::INFINITY, f64::min);
        if self.energies.is_empty() {
            0.0
        } else {
            max - min
        }
    }
}

/// Closed-form trajectory sampled at `times`.
pub fn trajectory(
    params: &HamiltonianParams,
    pulse: &PulseProfile,
    times: &[f64],
    psi0: &QubitState,
) -> Result<EvolutionRecord> {
    params.check()?;
    let mut rec = EvolutionRecord {
        times: Vec::with_capacity(times.len()),
        actions: Vec::with_capacity(times.len()),
        states: Vec::with_capacity(times.len()),
        energies: Vec::with_capacity(times.len()),
    };
    for &t in times {
        let action = pulse.accumulated_action(t)?;
        let state = propagator_unchecked(params, action).apply(psi0);
        rec.times.push(t);
        rec.actions.push(action);
        rec.energies.push(params.energy(&state));
        rec.states.push(state);
    }
    Ok(rec)
}

/// Time average of `⟨ψ(t)|H(t)|ψ(t)⟩` over `[0, τ]`, computed twice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyAverage {
    /// `⟨ψ0|H0|ψ0⟩·F(τ)/τ`, using conservation of `⟨H0⟩`.
    pub analytic: f64,
    /// Adaptive quadrature over the closed-form trajectory.
    pub quadrature: f64,
}

impl EnergyAverage {
    pub fn value(&self) -> f64 {
        self.analytic
    }

    pub fn discrepancy(&self) -> f64 {
        (self.analytic - self.quadrature).abs()
    }
}

/// Absolute tolerance handed to the quadrature, per unit of time.
pub const ENERGY_QUADRATURE_TOL: f64 = 1e-12;

pub fn average_energy(
    params: &HamiltonianParams,
    pulse: &PulseProfile,
    tau: f64,
    psi0: &QubitState,
) -> Result<EnergyAverage> {
    params.check()?;
    if tau.is_nan() || tau <= 0.0 {
        return Err(Error::NonpositiveDuration(tau));
    }
    let total_action = pulse.accumulated_action(tau)?;
    let analytic = params.energy(psi0) * total_action / tau;

    let integral: f64 = pulse
        .smooth_segments(tau)
        .into_iter()
        .map(|(a, b)| {
            let integrand = |s: f64| {
                let f = segment_value(pulse, a, b, s);
                let action = pulse.accumulated_action(s.clamp(a, b)).unwrap();
                let psi = propagator_unchecked(params, action).apply(psi0);
                f * params.energy(&psi)
            };
            adaptive_simpson(integrand, a, b, ENERGY_QUADRATURE_TOL * (b - a))
        })
        .sum();
    Ok(EnergyAverage {
        analytic,
        quadrature: integral / tau,
    })
}
