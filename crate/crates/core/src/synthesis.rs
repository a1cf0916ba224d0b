//! Minimum-time synthesis of the swap gate with phase shift `θ`:
//!
//! ```text
//! ψ1(τ) = ψ2(0)·e^{-iθ},   ψ2(τ) = ψ1(0)·e^{-iθ}
//! ```
//!
//! A drive realizes the gate only if `e11 = e22`, `φ ∈ {0, π}` and
//! `e12·F(τ) = π/2` (for the fastest choice). The remaining freedom is the
//! ratio `e11/e12`, which must make the accumulated phase `e11·F(τ)` land on
//! `θ + π/2` (φ = π, the "plus" branch) or `θ − π/2` (φ = 0, the "minus"
//! branch) modulo 2π. The smallest admissible ratio gives the shortest gate.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat2, C64};
use crate::model::{HamiltonianParams, HamiltonianSpec, PulseProfile, QubitState};
use crate::propagator::{average_energy, closed_form_propagator, Unitary2};
use crate::speedlimit::{normalized_gate_bound, reduced_phase};

/// Default tolerance for [`verify_gate`].
pub const DEFAULT_VERIFY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    #[default]
    Auto,
    /// `φ = π`, `e11/e12 = 2θ/π + 1` with `θ` taken mod 2π.
    Plus,
    /// `φ = 0`, `e11/e12 = 2θ/π − 1`; needs `θ mod 2π ≥ π`.
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateSpec {
    pub theta: f64,
    pub energy: f64,
    pub branch: Branch,
}

impl GateSpec {
    pub fn new(theta: f64, energy: f64) -> Self {
        GateSpec {
            theta,
            energy,
            branch: Branch::Auto,
        }
    }

    pub fn with_branch(mut self, branch: Branch) -> Self {
        self.branch = branch;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesizedGate {
    pub theta: f64,
    pub params: HamiltonianParams,
    pub pulse: PulseProfile,
    pub tau: f64,
    /// Branch actually used (never `Auto`).
    pub branch: Branch,
    /// Expected `τ·E/(h/4)`, equal to `e11/e12`.
    pub predicted_product: f64,
}

impl SynthesizedGate {
    pub fn spec(&self) -> HamiltonianSpec {
        HamiltonianSpec::new(self.params, self.pulse.clone())
    }

    pub fn action(&self) -> f64 {
        self.pulse
            .accumulated_action(self.tau)
            .expect("constant pulse covers every τ")
    }

    pub fn verify(&self, tol: f64) -> Result<VerificationReport> {
        verify_gate(&self.params, &self.pulse, self.tau, self.theta, tol)
    }
}

/// `(e11/e12, φ, branch)` for the requested branch.
fn branch_ratio(theta: f64, branch: Branch) -> Result<(f64, f64, Branch)> {
    let residue = reduced_phase(theta);
    let upper_half = theta.rem_euclid(TAU) >= PI;
    let base = 1.0 + 2.0 * residue / PI;
    match branch {
        Branch::Plus => Ok((if upper_half { base + 2.0 } else { base }, PI, Branch::Plus)),
        Branch::Minus if upper_half => Ok((base, 0.0, Branch::Minus)),
        Branch::Minus => Err(Error::BranchInadmissible(theta)),
        Branch::Auto if upper_half => Ok((base, 0.0, Branch::Minus)),
        Branch::Auto => Ok((base, PI, Branch::Plus)),
    }
}

/// Builds the fastest drive with constant pulse `f ≡ 1` and mean energy
/// `spec.energy` that realizes the gate on the requested branch.
pub fn synthesize_gate(spec: &GateSpec) -> Result<SynthesizedGate> {
    if !(spec.energy > 0.0 && spec.energy.is_finite()) {
        return Err(Error::NonpositiveEnergy(spec.energy));
    }
    if !(spec.theta >= 0.0 && spec.theta.is_finite()) {
        return Err(Error::InvalidTheta(spec.theta));
    }
    let (ratio, phi, branch) = branch_ratio(spec.theta, spec.branch)?;
    let e11 = spec.energy;
    let e12 = e11 / ratio;
    // With f ≡ 1, F(τ) = τ, and e12·τ = π/2.
    let tau = FRAC_PI_2 * ratio / e11;
    Ok(SynthesizedGate {
        theta: spec.theta,
        params: HamiltonianParams::new(e11, e11, e12, phi),
        pulse: PulseProfile::constant(1.0)?,
        tau,
        branch,
        predicted_product: ratio,
    })
}

/// The ideal gate: zero diagonal, `e^{-iθ}` off the diagonal.
pub fn gate_target(theta: f64) -> Unitary2 {
    let z = C64::from_polar(1.0, -theta);
    Unitary2::from_matrix(Mat2::new(0.0.into(), z, z, 0.0.into()))
}

/// Frobenius distance to [`gate_target`], global phase included.
pub fn gate_error(u: &Mat2, theta: f64) -> f64 {
    (*u - *gate_target(theta).matrix()).frobenius_norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub theta: f64,
    pub tau: f64,
    pub energy: f64,
    pub product_normalized: f64,
    pub bound: f64,
    pub gate_error: f64,
    pub saturates: bool,
}

/// Checks a candidate drive against the gate and the bound.
///
/// `energy` is the time-averaged energy of the worse of the two basis
/// states. `saturates` holds when both the gate error and the distance of
/// the normalized product to the bound are within `tol`.
pub fn verify_gate(
    params: &HamiltonianParams,
    pulse: &PulseProfile,
    tau: f64,
    theta: f64,
    tol: f64,
) -> Result<VerificationReport> {
    params.check()?;
    let action = pulse.accumulated_action(tau)?;
    let u = closed_form_propagator(params, action)?;
    let error = gate_error(u.matrix(), theta);
    let energy = [QubitState::basis1(), QubitState::basis2()]
        .iter()
        .map(|psi| average_energy(params, pulse, tau, psi).map(|e| e.value()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    let product = tau * energy / FRAC_PI_2;
    let bound = normalized_gate_bound(theta);
    Ok(VerificationReport {
        theta,
        tau,
        energy,
        product_normalized: product,
        bound,
        gate_error: error,
        saturates: error <= tol && (product - bound).abs() <= tol,
    })
}
