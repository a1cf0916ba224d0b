//! Closed-form minimum times, in natural units (ħ = 1, `h = 2π`).

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// A bound evaluation request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundQuery {
    pub theta: f64,
    pub alpha: Option<f64>,
    pub energy: f64,
}

impl BoundQuery {
    /// Minimum time for the query: the rotation bound when `alpha` is set,
    /// the gate bound otherwise.
    pub fn min_time(&self) -> Result<f64> {
        match self.alpha {
            Some(alpha) => min_rotation_time(alpha, self.energy),
            None => min_gate_time(self.theta, self.energy),
        }
    }
}

fn check_energy(energy: f64) -> Result<()> {
    if energy > 0.0 && energy.is_finite() {
        Ok(())
    } else {
        Err(Error::NonpositiveEnergy(energy))
    }
}

/// `θ mod π`, in `[0, π)`.
pub fn reduced_phase(theta: f64) -> f64 {
    let r = theta.rem_euclid(PI);
    if r >= PI {
        0.0
    } else {
        r
    }
}

/// Time to reach an orthogonal state at mean energy `energy`: `h/(4E)`.
pub fn orthogonalization_time(energy: f64) -> Result<f64> {
    check_energy(energy)?;
    Ok(FRAC_PI_2 / energy)
}

/// Normalized bound `τ·E/(h/4) = 1 + 2(θ mod π)/π` for the swap gate with
/// phase shift `theta`.
pub fn normalized_gate_bound(theta: f64) -> f64 {
    1.0 + 2.0 * reduced_phase(theta) / PI
}

/// Minimum duration of the swap gate with phase shift `theta`.
pub fn min_gate_time(theta: f64, energy: f64) -> Result<f64> {
    if !(theta >= 0.0 && theta.is_finite()) {
        return Err(Error::InvalidTheta(theta));
    }
    Ok(orthogonalization_time(energy)? * normalized_gate_bound(theta))
}

/// Normalized bound `2α/π` for a rotation with `|⟨ψ(τ)|ψ(0)⟩| = cos α`.
pub fn normalized_rotation_bound(alpha: f64) -> f64 {
    2.0 * alpha / PI
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=FRAC_PI_2).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}

/// Minimum duration of a rotation by `alpha`: `α·h/(2πE) = α/E`.
pub fn min_rotation_time(alpha: f64, energy: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_energy(energy)?;
    if alpha == FRAC_PI_2 {
        return orthogonalization_time(energy);
    }
    Ok(alpha / energy)
}

/// SI constants and conversions.
pub mod si {
    use super::*;

    /// Planck constant, J·s (CODATA 2018, exact).
    pub const PLANCK: f64 = 6.626_070_15e-34;
    /// Reduced Planck constant, J·s.
    pub const HBAR: f64 = PLANCK / (2.0 * PI);
    /// Speed of light in vacuum, m/s (exact).
    pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

    /// Gate bound in seconds for a mean energy in joules.
    pub fn min_gate_time(theta: f64, energy_joules: f64) -> Result<f64> {
        check_energy(energy_joules)?;
        Ok(super::min_gate_time(theta, energy_joules)? * HBAR)
    }

    /// Rotation bound in seconds for a mean energy in joules.
    pub fn min_rotation_time(alpha: f64, energy_joules: f64) -> Result<f64> {
        Ok(super::min_rotation_time(alpha, energy_joules)? * HBAR)
    }

    /// Orthogonalization time `h/(4E)` in seconds.
    pub fn orthogonalization_time(energy_joules: f64) -> Result<f64> {
        Ok(super::orthogonalization_time(energy_joules)? * HBAR)
    }

    /// For a two-level transition of wavelength `lambda` (meters): the mean
    /// energy `hc/(2λ)` of an equal superposition of the two levels, and
    /// the orthogonalization time `λ/(2c)` it implies.
    pub fn from_wavelength(lambda: f64) -> Result<(f64, f64)> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::NonpositiveWavelength(lambda));
        }
        let energy = PLANCK * SPEED_OF_LIGHT / (2.0 * lambda);
        Ok((energy, orthogonalization_time(energy)?))
    }

    /// Natural-unit time to seconds, given the energy unit in joules.
    pub fn time_to_seconds(t: f64, energy_unit_joules: f64) -> f64 {
        t * HBAR / energy_unit_joules
    }

    pub fn seconds_to_time(seconds: f64, energy_unit_joules: f64) -> f64 {
        seconds * energy_unit_joules / HBAR
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn orthogonalization_examples() {
        assert_eq!(orthogonalization_time(1.0).unwrap(), FRAC_PI_2);
        assert_eq!(orthogonalization_time(2.0).unwrap(), FRAC_PI_4);
        assert_eq!(orthogonalization_time(0.0), Err(Error::NonpositiveEnergy(0.0)));
        assert!(orthogonalization_time(-1.0).is_err());
    }

    #[test]
    fn gate_time_examples() {
        assert_eq!(min_gate_time(0.0, 1.0).unwrap(), FRAC_PI_2);
        assert!((min_gate_time(FRAC_PI_2, 1.0).unwrap() - PI).abs() < 1e-15);
        assert!((min_gate_time(1.5 * PI, 1.0).unwrap() - PI).abs() < 1e-15);
        assert!(min_gate_time(1.0, 0.0).is_err());
        assert!(min_gate_time(-0.1, 1.0).is_err());
    }

    #[test]
    fn rotation_time_examples() {
        assert_eq!(min_rotation_time(FRAC_PI_2, 1.0).unwrap(), FRAC_PI_2);
        assert_eq!(min_rotation_time(0.0, 1.0).unwrap(), 0.0);
        assert_eq!(min_rotation_time(FRAC_PI_4, 1.0).unwrap(), FRAC_PI_4);
        assert_eq!(min_rotation_time(2.0, 1.0), Err(Error::AlphaOutOfRange(2.0)));
        assert_eq!(
            min_rotation_time(FRAC_PI_2, 3.0).unwrap(),
            orthogonalization_time(3.0).unwrap()
        );
    }

    #[test]
    fn wavelength_examples() {
        let (e, tau) = si::from_wavelength(397e-9).unwrap();
        assert!((tau / 6.62e-16 - 1.0).abs() < 5e-3, "{tau}");
        assert!((e / 2.50e-19 - 1.0).abs() < 5e-3, "{e}");
        assert!((tau * 4.0 * e / si::PLANCK - 1.0).abs() < 1e-12);
        assert!((tau - 397e-9 / (2.0 * si::SPEED_OF_LIGHT)).abs() < 1e-28);
        let (_, tau2) = si::from_wavelength(794e-9).unwrap();
        assert!((tau2 / tau - 2.0).abs() < 1e-12);
        assert!(si::from_wavelength(0.0).is_err());
    }

    #[test]
    fn si_round_trip() {
        let t = min_gate_time(0.7, 1.0).unwrap();
        let unit = 3.1e-20;
        let back = si::seconds_to_time(si::time_to_seconds(t, unit), unit);
        assert!((back / t - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn gate_time_is_pi_periodic(k in 0u32..50, r in 0.0..(PI - 1e-9), e in 0.01..100.0f64) {
            let theta = k as f64 * PI + r;
            let a = min_gate_time(theta, e).unwrap();
            let b = min_gate_time(theta + PI, e).unwrap();
            // Only the rounding of θ + π itself may separate the two.
            let slack = 2.0 * f64::EPSILON * (theta + PI) * (2.0 / PI) * orthogonalization_time(e).unwrap();
            prop_assert!((a - b).abs() <= slack, "{} vs {}", a, b);
        }

        #[test]
        fn consistency_and_scaling(e in 0.01..100.0f64, theta in 0.0..10.0f64, alpha in 0.0..FRAC_PI_2) {
            prop_assert_eq!(min_gate_time(0.0, e).unwrap(), orthogonalization_time(e).unwrap());
            prop_assert_eq!(min_rotation_time(FRAC_PI_2, e).unwrap(), orthogonalization_time(e).unwrap());
            let rel = |a: f64, b: f64| ((a - b) / b).abs();
            prop_assert!(rel(min_gate_time(theta, 2.0 * e).unwrap() * 2.0, min_gate_time(theta, e).unwrap()) <= 1e-15);
            prop_assert!(rel(orthogonalization_time(2.0 * e).unwrap() * 2.0, orthogonalization_time(e).unwrap()) <= 1e-15);
            if alpha > 0.0 {
                prop_assert!(rel(min_rotation_time(alpha, 2.0 * e).unwrap() * 2.0, min_rotation_time(alpha, e).unwrap()) <= 1e-15);
            }
        }

        #[test]
        fn gate_time_increases_on_a_period(a in 0.0..PI, b in 0.0..PI) {
            prop_assume!(a < b);
            prop_assert!(min_gate_time(a, 1.0).unwrap() < min_gate_time(b, 1.0).unwrap());
        }
    }
}
