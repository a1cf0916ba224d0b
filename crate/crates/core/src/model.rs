//! The Hamiltonian family `H(t) = f(t)·H0` with
//!
//! ```text
//! H0 = [[e11,            e12·exp(iφ)],
//!       [e12·exp(-iφ),   e22        ]]
//! ```
//!
//! written in the raw basis where `ψ2(0) = (1, 0)ᵀ` and `ψ1(0) = (0, 1)ᵀ`,
//! together with the pulse profiles `f` and their accumulated action
//! `F(t) = ∫₀ᵗ f`.

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat2, C64};

/// A constraint of the nonnegative-definite parameter set that a
/// [`HamiltonianParams`] value can violate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Violation {
    NonFinite,
    E11Negative,
    E22Negative,
    E12Negative,
    DeterminantNegative,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Violation::NonFinite => "all fields finite",
            Violation::E11Negative => "e11 >= 0",
            Violation::E22Negative => "e22 >= 0",
            Violation::E12Negative => "e12 >= 0",
            Violation::DeterminantNegative => "e11*e22 - e12^2 >= 0",
        })
    }
}

/// Outcome of [`HamiltonianParams::validate`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Verdict {
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidParams(self.violations))
        }
    }
}

/// Static part `H0` of the drive, in energy units with ħ = 1.
///
/// `e12` is the magnitude of the off-diagonal element and `phi` its phase,
/// kept in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianParams {
    pub e11: f64,
    pub e22: f64,
    pub e12: f64,
    pub phi: f64,
}

impl HamiltonianParams {
    /// Stores the fields as given, with `phi` reduced to `[0, 2π)`.
    pub fn new(e11: f64, e22: f64, e12: f64, phi: f64) -> Self {
        HamiltonianParams {
            e11,
            e22,
            e12,
            phi: reduce_angle(phi),
        }
    }

    /// Like [`new`](Self::new), but a negative `e12` is folded into the
    /// phase: `e12·exp(iφ) = |e12|·exp(i(φ + π))`.
    pub fn canonical(e11: f64, e22: f64, e12: f64, phi: f64) -> Self {
        if e12 < 0.0 {
            Self::new(e11, e22, -e12, phi + std::f64::consts::PI)
        } else {
            Self::new(e11, e22, e12, phi)
        }
    }

    /// Checks nonnegative definiteness and the canonical `e12 ≥ 0` form.
    /// Never fails; every violated constraint is listed.
    pub fn validate(&self) -> Verdict {
        let mut violations = Vec::new();
        if ![self.e11, self.e22, self.e12, self.phi]
            .iter()
            .all(|v| v.is_finite())
        {
            violations.push(Violation::NonFinite);
            return Verdict { violations };
        }
        if self.e11 < 0.0 {
            violations.push(Violation::E11Negative);
        }
        if self.e22 < 0.0 {
            violations.push(Violation::E22Negative);
        }
        if self.e12 < 0.0 {
            violations.push(Violation::E12Negative);
        }
        if self.e11 * self.e22 - self.e12 * self.e12 < 0.0 {
            violations.push(Violation::DeterminantNegative);
        }
        Verdict { violations }
    }

    pub fn check(&self) -> Result<()> {
        self.validate().into_result()
    }

    /// Eigenvalues `(E1, E2)` of `H0`, `E1 ≥ E2 ≥ 0`.
    pub fn eigenvalues(&self) -> Result<(f64, f64)> {
        self.check()?;
        Ok(self.eigenvalues_unchecked())
    }

    pub(crate) fn eigenvalues_unchecked(&self) -> (f64, f64) {
        let trace = self.e11 + self.e22;
        let gap = self.gap();
        let e1 = 0.5 * (trace + gap);
        // E2 from the determinant avoids cancellation in (trace - gap).
        let det = (self.e11 * self.e22 - self.e12 * self.e12).max(0.0);
        let e2 = if e1 > 0.0 { det / e1 } else { 0.0 };
        (e1, e2)
    }

    /// `E1 - E2 = sqrt((e11 - e22)² + 4·e12²)`.
    pub fn gap(&self) -> f64 {
        (self.e11 - self.e22).hypot(2.0 * self.e12)
    }

    /// `H0` in the raw basis.
    pub fn h0(&self) -> Mat2 {
        let off = C64::from_polar(self.e12, self.phi);
        Mat2::new(self.e11.into(), off, off.conj(), self.e22.into())
    }

    /// `H0` acting on the coefficient pair `(a1, a2)`:
    /// `i·da/dt = f(t)·K·a` with `K = [[e22, e12·e^{-iφ}], [e12·e^{iφ}, e11]]`.
    pub fn coefficient_generator(&self) -> Mat2 {
        let off = C64::from_polar(self.e12, self.phi);
        Mat2::new(self.e22.into(), off.conj(), off, self.e11.into())
    }

    /// `⟨ψ|H0|ψ⟩` for a state given by its coefficients.
    pub fn energy(&self, state: &QubitState) -> f64 {
        let off = C64::from_polar(self.e12, -self.phi);
        self.e22 * state.a1.norm_sqr()
            + self.e11 * state.a2.norm_sqr()
            + 2.0 * (state.a1.conj() * off * state.a2).re
    }

    /// Largest energy scale among the entries, at least 1.
    pub(crate) fn scale(&self) -> f64 {
        self.e11.max(self.e22).max(1.0)
    }
}

/// `f(t)·H0` at time `t`, in the raw basis.
pub fn hamiltonian_at(params: &HamiltonianParams, pulse: &PulseProfile, t: f64) -> Result<Mat2> {
    params.check()?;
    let f = pulse.value_at(t)?;
    Ok(params.h0().scale(f.into()))
}

pub(crate) fn reduce_angle(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs.
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Shapes a pulse profile can take.
///
/// Piecewise profiles hold `values[k]` on `[breakpoints[k], breakpoints[k+1])`
/// (the last interval is closed). Sampled profiles interpolate linearly
/// between `(grid[k], values[k])`. Both start at `t = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum PulseShape {
    Constant { value: f64 },
    Piecewise { breakpoints: Vec<f64>, values: Vec<f64> },
    Sampled { grid: Vec<f64>, values: Vec<f64> },
}

/// A strictly positive modulation `f(t)`. Construction validates the shape,
/// so every value of this type satisfies `f > 0` on its domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PulseShape", into = "PulseShape")]
pub struct PulseProfile {
    shape: PulseShape,
}

impl TryFrom<PulseShape> for PulseProfile {
    type Error = Error;

    fn try_from(shape: PulseShape) -> Result<Self> {
        PulseProfile::from_shape(shape)
    }
}

impl From<PulseProfile> for PulseShape {
    fn from(p: PulseProfile) -> Self {
        p.shape
    }
}

impl PulseProfile {
    pub fn constant(value: f64) -> Result<Self> {
        Self::from_shape(PulseShape::Constant { value })
    }

    pub fn piecewise(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::from_shape(PulseShape::Piecewise {
            breakpoints,
            values,
        })
    }

    pub fn sampled(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::from_shape(PulseShape::Sampled { grid, values })
    }

    pub fn from_shape(shape: PulseShape) -> Result<Self> {
        let bad = |msg: &str| Err(Error::InvalidPulse(msg.to_string()));
        let positive = |vals: &[f64]| vals.iter().all(|v| v.is_finite() && *v > 0.0);
        match &shape {
            PulseShape::Constant { value } => {
                if !positive(&[*value]) {
                    return bad("constant value must be finite and > 0");
                }
            }
            PulseShape::Piecewise {
                breakpoints,
                values,
            } => {
                if values.is_empty() || breakpoints.len() != values.len() + 1 {
                    return bad("piecewise needs n >= 1 values and n + 1 breakpoints");
                }
                check_grid(breakpoints)?;
                if !positive(values) {
                    return bad("piecewise values must be finite and > 0");
                }
            }
            PulseShape::Sampled { grid, values } => {
                if grid.len() < 2 || grid.len() != values.len() {
                    return bad("sampled needs at least 2 points and equal-length grid/values");
                }
                check_grid(grid)?;
                if !positive(values) {
                    return bad("sampled values must be finite and > 0");
                }
            }
        }
        Ok(PulseProfile { shape })
    }

    pub fn shape(&self) -> &PulseShape {
        &self.shape
    }

    /// Right end of the domain; infinite for constant pulses.
    pub fn end(&self) -> f64 {
        match &self.shape {
            PulseShape::Constant { .. } => f64::INFINITY,
            PulseShape::Piecewise { breakpoints, .. } => *breakpoints.last().unwrap(),
            PulseShape::Sampled { grid, .. } => *grid.last().unwrap(),
        }
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if t.is_nan() || t < 0.0 || t > self.end() {
            Err(Error::DomainExceeded { t, end: self.end() })
        } else {
            Ok(())
        }
    }

    /// `f(t)`.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(match &self.shape {
            PulseShape::Constant { value } => *value,
            PulseShape::Piecewise {
                breakpoints,
                values,
            } => values[segment_index(breakpoints, t)],
            PulseShape::Sampled { grid, values } => {
                let k = segment_index(grid, t);
                lerp(grid[k], grid[k + 1], values[k], values[k + 1], t)
            }
        })
    }

    /// Accumulated action `F(t) = ∫₀ᵗ f`. Exact for all three shapes: the
    /// sampled interpolant is linear between grid points, so each segment
    /// integrates to a trapezoid.
    pub fn accumulated_action(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(match &self.shape {
            PulseShape::Constant { value } => value * t,
            PulseShape::Piecewise {
                breakpoints,
                values,
            } => {
                let k = segment_index(breakpoints, t);
                let full: f64 = (0..k)
                    .map(|j| values[j] * (breakpoints[j + 1] - breakpoints[j]))
                    .sum();
                full + values[k] * (t - breakpoints[k])
            }
            PulseShape::Sampled { grid, values } => {
                let k = segment_index(grid, t);
                let full: f64 = (0..k)
                    .map(|j| 0.5 * (values[j] + values[j + 1]) * (grid[j + 1] - grid[j]))
                    .sum();
                let ft = lerp(grid[k], grid[k + 1], values[k], values[k + 1], t);
                full + 0.5 * (values[k] + ft) * (t - grid[k])
            }
        })
    }

    /// Points in `(0, t)` where `f` is not smooth.
    pub fn kinks_before(&self, t: f64) -> Vec<f64> {
        let interior = |pts: &[f64]| -> Vec<f64> {
            pts.iter().copied().filter(|&p| p > 0.0 && p < t).collect()
        };
        match &self.shape {
            PulseShape::Constant { .. } => Vec::new(),
            PulseShape::Piecewise { breakpoints, .. } => interior(breakpoints),
            PulseShape::Sampled { grid, .. } => interior(grid),
        }
    }

    /// Intervals of `[0, t]` on which `f` is smooth, in order.
    pub fn smooth_segments(&self, t: f64) -> Vec<(f64, f64)> {
        let mut points = vec![0.0];
        points.extend(self.kinks_before(t));
        points.push(t);
        points.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// The pulse `g(s) = c·f(c·s)`, which reaches action `F(t)` at `s = t/c`.
    pub fn compressed(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidPulse(format!("compression factor {c} must be > 0")));
        }
        let shape = match &self.shape {
            PulseShape::Constant { value } => PulseShape::Constant { value: c * value },
            PulseShape::Piecewise {
                breakpoints,
                values,
            } => PulseShape::Piecewise {
                breakpoints: breakpoints.iter().map(|b| b / c).collect(),
                values: values.iter().map(|v| v * c).collect(),
            },
            PulseShape::Sampled { grid, values } => PulseShape::Sampled {
                grid: grid.iter().map(|g| g / c).collect(),
                values: values.iter().map(|v| v * c).collect(),
            },
        };
        Self::from_shape(shape)
    }

    /// The remainder `g(s) = f(offset + s)` of the pulse after `offset`.
    pub fn tail(&self, offset: f64) -> Result<Self> {
        self.check_time(offset)?;
        if offset >= self.end() {
            return Err(Error::DomainExceeded {
                t: offset,
                end: self.end(),
            });
        }
        let shape = match &self.shape {
            PulseShape::Constant { value } => PulseShape::Constant { value: *value },
            PulseShape::Piecewise {
                breakpoints,
                values,
            } => {
                let k = segment_index(breakpoints, offset);
                let mut bps = vec![0.0];
                bps.extend(breakpoints[k + 1..].iter().map(|b| b - offset));
                PulseShape::Piecewise {
                    breakpoints: bps,
                    values: values[k..].to_vec(),
                }
            }
            PulseShape::Sampled { grid, values } => {
                let k = segment_index(grid, offset);
                let mut g = vec![0.0];
                let mut v = vec![lerp(grid[k], grid[k + 1], values[k], values[k + 1], offset)];
                g.extend(grid[k + 1..].iter().map(|x| x - offset));
                v.extend_from_slice(&values[k + 1..]);
                PulseShape::Sampled { grid: g, values: v }
            }
        };
        Self::from_shape(shape)
    }
}

fn check_grid(points: &[f64]) -> Result<()> {
    if points.first() != Some(&0.0) {
        return Err(Error::InvalidPulse("time grid must start at 0".into()));
    }
    if !points.iter().all(|p| p.is_finite()) || points.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidPulse(
            "time grid must be finite and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Index `k` of the interval `[p[k], p[k+1])` containing `t`; the last
/// interval is closed on the right.
fn segment_index(points: &[f64], t: f64) -> usize {
    let last = points.len() - 2;
    points.partition_point(|&p| p <= t).saturating_sub(1).min(last)
}

fn lerp(x0: f64, x1: f64, y0: f64, y1: f64, x: f64) -> f64 {
    let w = (x - x0) / (x1 - x0);
    y0 + w * (y1 - y0)
}

/// Coefficients `(a1, a2)` of `ψ = a1·ψ1(0) + a2·ψ2(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitState {
    pub a1: C64,
    pub a2: C64,
}

impl QubitState {
    pub fn new(a1: C64, a2: C64) -> Self {
        QubitState { a1, a2 }
    }

    /// `ψ1(0)`, i.e. `(a1, a2) = (1, 0)`.
    pub fn basis1() -> Self {
        QubitState::new(1.0.into(), 0.0.into())
    }

    /// `ψ2(0)`, i.e. `(a1, a2) = (0, 1)`.
    pub fn basis2() -> Self {
        QubitState::new(0.0.into(), 1.0.into())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a1.norm_sqr() + self.a2.norm_sqr()
    }

    /// Rescales to unit norm; fails if the norm is off by more than `tol`.
    pub fn normalized(self, tol: f64) -> Result<Self> {
        let n = self.norm_sqr();
        if !n.is_finite() || (n - 1.0).abs() > tol || n == 0.0 {
            return Err(Error::UnnormalizedState(n));
        }
        let s = n.sqrt();
        Ok(QubitState::new(self.a1 / s, self.a2 / s))
    }

    pub fn as_array(&self) -> [C64; 2] {
        [self.a1, self.a2]
    }

    pub fn from_array(a: [C64; 2]) -> Self {
        QubitState::new(a[0], a[1])
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &QubitState) -> C64 {
        self.a1.conj() * other.a1 + self.a2.conj() * other.a2
    }

    /// Largest componentwise distance to `other`.
    pub fn max_component_diff(&self, other: &QubitState) -> f64 {
        (self.a1 - other.a1).norm().max((self.a2 - other.a2).norm())
    }
}

/// The Hamiltonian spec file: `{"e11", "e22", "e12", "phi", "pulse"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSpec {
    pub e11: f64,
    pub e22: f64,
    pub e12: f64,
    pub phi: f64,
    pub pulse: PulseProfile,
}

impl HamiltonianSpec {
    pub fn new(params: HamiltonianParams, pulse: PulseProfile) -> Self {
        HamiltonianSpec {
            e11: params.e11,
            e22: params.e22,
            e12: params.e12,
            phi: params.phi,
            pulse,
        }
    }

    pub fn params(&self) -> HamiltonianParams {
        HamiltonianParams::new(self.e11, self.e22, self.e12, self.phi)
    }

    /// Parses and validates a spec document.
    pub fn from_json(text: &str) -> std::result::Result<Self, SpecError> {
        let spec: HamiltonianSpec = serde_json::from_str(text).map_err(|e| SpecError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        spec.params().check().map_err(SpecError::Invalid)?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Invalid(Error),
}
