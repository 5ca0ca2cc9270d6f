//! Equations of state closing the RMHD system.
//!
//! Every supported EOS depends on `(rho, p)` only through the ratio
//! `x = p / rho`, so the enthalpy is `h = G(x)` and its inverse is
//! `p = rho * X(h)`. The inverses of the Mathews and Ryu-Chattopadhyay
//! enthalpies are roots of quadratics in `x`; the branch that vanishes as
//! `h -> 1+` is the physical one. Both are written in cancellation-free form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Equation of state `h = H(rho, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Eos {
    /// `h = 1 + gamma p / ((gamma - 1) rho)` with `1 < gamma <= 2`.
    GammaLaw { gamma: f64 },
    /// `h = 5p/(2rho) + sqrt(9p^2/(4rho^2) + 1)`.
    Mathews,
    /// `h = 2(6p^2 + 4p rho + rho^2) / (rho (3p + 2rho))`.
    RyuChattopadhyay,
}

/// Partial derivatives of `p = P(rho, h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressurePartials {
    pub d_rho: f64,
    pub d_h: f64,
}

impl Eos {
    pub fn gamma_law(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 1.0 && gamma <= 2.0) {
            return Err(Error::domain("gamma_law", format!("gamma = {gamma} not in (1, 2]")));
        }
        Ok(Eos::GammaLaw { gamma })
    }

    /// Short label used in CSV output.
    pub fn label(&self) -> String {
        match self {
            Eos::GammaLaw { gamma } => format!("gamma={gamma}"),
            Eos::Mathews => "mathews".to_string(),
            Eos::RyuChattopadhyay => "rc".to_string(),
        }
    }

    /// `(gamma - 1) / gamma` for the gamma law.
    pub(crate) fn gamma_factor(&self) -> Option<f64> {
        match *self {
            Eos::GammaLaw { gamma } => Some((gamma - 1.0) / gamma),
            _ => None,
        }
    }

    /// Specific enthalpy `H(rho, p)`.
    pub fn enthalpy(&self, rho: f64, p: f64) -> Result<f64> {
        check_positive("enthalpy", "rho", rho)?;
        check_positive("enthalpy", "p", p)?;
        Ok(self.enthalpy_of_ratio(p / rho))
    }

    /// Inverse of [`Eos::enthalpy`] at fixed `rho`.
    pub fn pressure_from_enthalpy(&self, rho: f64, h: f64) -> Result<f64> {
        check_positive("pressure_from_enthalpy", "rho", rho)?;
        check_enthalpy("pressure_from_enthalpy", h)?;
        Ok(self.pressure_unchecked(rho, h))
    }

    /// `(dP/drho, dP/dh)` of the inverse `P(rho, h)`.
    pub fn dpressure(&self, rho: f64, h: f64) -> Result<PressurePartials> {
        check_positive("dpressure", "rho", rho)?;
        check_enthalpy("dpressure", h)?;
        Ok(self.dpressure_unchecked(rho, h))
    }

    /// `(dH/drho, dH/dp)` in closed form.
    pub fn enthalpy_partials(&self, rho: f64, p: f64) -> Result<(f64, f64)> {
        check_positive("enthalpy_partials", "rho", rho)?;
        check_positive("enthalpy_partials", "p", p)?;
        let x = p / rho;
        let slope = self.enthalpy_slope(x);
        Ok((-slope * x / rho, slope / rho))
    }

    /// `P(rho, h)` without domain checks. Used inside the master function,
    /// where iterates of non-PCP solvers may leave the physical domain.
    #[inline]
    pub(crate) fn pressure_unchecked(&self, rho: f64, h: f64) -> f64 {
        rho * self.ratio_of_enthalpy(h)
    }

    #[inline]
    pub(crate) fn dpressure_unchecked(&self, rho: f64, h: f64) -> PressurePartials {
        PressurePartials {
            d_rho: self.ratio_of_enthalpy(h),
            d_h: rho * self.ratio_slope(h),
        }
    }

    /// `G(x)` with `x = p / rho`.
    fn enthalpy_of_ratio(&self, x: f64) -> f64 {
        match *self {
            Eos::GammaLaw { gamma } => 1.0 + gamma * x / (gamma - 1.0),
            Eos::Mathews => 2.5 * x + (2.25 * x * x + 1.0).sqrt(),
            Eos::RyuChattopadhyay => {
                2.0 * ((6.0 * x + 4.0) * x + 1.0) / (3.0 * x + 2.0)
            }
        }
    }

    /// `G'(x)`.
    fn enthalpy_slope(&self, x: f64) -> f64 {
        match *self {
            Eos::GammaLaw { gamma } => gamma / (gamma - 1.0),
            Eos::Mathews => 2.5 + 2.25 * x / (2.25 * x * x + 1.0).sqrt(),
            Eos::RyuChattopadhyay => {
                let d = 3.0 * x + 2.0;
                2.0 * ((18.0 * x + 24.0) * x + 5.0) / (d * d)
            }
        }
    }

    /// `X(h) = G^{-1}(h)`, the pressure-to-density ratio.
    #[inline]
    fn ratio_of_enthalpy(&self, h: f64) -> f64 {
        match *self {
            Eos::GammaLaw { gamma } => (gamma - 1.0) / gamma * (h - 1.0),
            // 4x^2 - 5hx + h^2 - 1 = 0, root (5h - s)/8 with s = sqrt(9h^2 + 16)
            Eos::Mathews => {
                let s = (9.0 * h * h + 16.0).sqrt();
                2.0 * (h - 1.0) * (h + 1.0) / (5.0 * h + s)
            }
            // 12x^2 + (8 - 3h)x + 2 - 2h = 0, root (3h - 8 + s)/24 with
            // s = sqrt(9h^2 + 48h - 32); s - 3h = (48h - 32)/(s + 3h) > 0
            Eos::RyuChattopadhyay => {
                let s = ((9.0 * h + 48.0) * h - 32.0).sqrt();
                4.0 * (h - 1.0) / (8.0 + (48.0 * h - 32.0) / (s + 3.0 * h))
            }
        }
    }

    /// `X'(h)`.
    #[inline]
    fn ratio_slope(&self, h: f64) -> f64 {
        match *self {
            Eos::GammaLaw { gamma } => (gamma - 1.0) / gamma,
            Eos::Mathews => {
                let s = (9.0 * h * h + 16.0).sqrt();
                (5.0 - 9.0 * h / s) / 8.0
            }
            Eos::RyuChattopadhyay => {
                let s = ((9.0 * h + 48.0) * h - 32.0).sqrt();
                (3.0 + (9.0 * h + 24.0) / s) / 24.0
            }
        }
    }
}

fn check_positive(op: &'static str, name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(op, format!("{name} = {value} must be positive and finite")))
    }
}

fn check_enthalpy(op: &'static str, h: f64) -> Result<()> {
    if h.is_finite() && h > 1.0 {
        Ok(())
    } else {
        Err(Error::domain(op, format!("h = {h} must exceed 1")))
    }
}

/// Anything that provides a specific enthalpy `H(rho, p)`.
///
/// The condition checker only needs `H` and its partials; the default
/// partials are central differences with a relative step of `1e-7`.
pub trait EnthalpyModel {
    fn enthalpy_at(&self, rho: f64, p: f64) -> f64;

    /// `(dH/drho, dH/dp)`.
    fn enthalpy_partials_at(&self, rho: f64, p: f64) -> (f64, f64) {
        let hr = rho * 1e-7;
        let hp = p * 1e-7;
        let d_rho = (self.enthalpy_at(rho + hr, p) - self.enthalpy_at(rho - hr, p)) / (2.0 * hr);
        let d_p = (self.enthalpy_at(rho, p + hp) - self.enthalpy_at(rho, p - hp)) / (2.0 * hp);
        (d_rho, d_p)
    }
}

impl EnthalpyModel for Eos {
    fn enthalpy_at(&self, rho: f64, p: f64) -> f64 {
        self.enthalpy_of_ratio(p / rho)
    }

    fn enthalpy_partials_at(&self, rho: f64, p: f64) -> (f64, f64) {
        let x = p / rho;
        let slope = self.enthalpy_slope(x);
        (-slope * x / rho, slope / rho)
    }
}

/// The four structural conditions a causal EOS must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum EosCondition {
    /// `H` is differentiable (partials finite).
    Differentiable,
    /// `H >= sqrt(1 + p^2/rho^2) + p/rho`.
    KineticBound,
    /// `H (1/rho - dH/dp) < dH/drho < 0`.
    Causality,
    /// `H -> 1` as `p -> 0+`.
    ColdLimit,
}

impl EosCondition {
    pub const ALL: [EosCondition; 4] = [
        EosCondition::Differentiable,
        EosCondition::KineticBound,
        EosCondition::Causality,
        EosCondition::ColdLimit,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionViolation {
    pub condition: EosCondition,
    pub rho: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct EosConditionReport {
    pub samples: usize,
    pub violations: Vec<ConditionViolation>,
}

impl EosConditionReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, condition: EosCondition) -> usize {
        self.violations.iter().filter(|v| v.condition == condition).count()
    }
}

/// Relative offset of `p` used to probe the cold limit.
const COLD_PROBE: f64 = 1e-12;
const COLD_TOLERANCE: f64 = 1e-9;

/// Evaluates the four EOS conditions at each `(rho, p)` sample.
pub fn check_eos_conditions<M: EnthalpyModel + ?Sized>(
    model: &M,
    samples: &[(f64, f64)],
) -> Result<EosConditionReport> {
    let mut report = EosConditionReport { samples: samples.len(), violations: Vec::new() };
    for &(rho, p) in samples {
        check_positive("check_eos_conditions", "rho", rho)?;
        check_positive("check_eos_conditions", "p", p)?;
        let mut flag = |condition| report.violations.push(ConditionViolation { condition, rho, p });

        let h = model.enthalpy_at(rho, p);
        let (h_rho, h_p) = model.enthalpy_partials_at(rho, p);
        if !(h.is_finite() && h_rho.is_finite() && h_p.is_finite()) {
            flag(EosCondition::Differentiable);
        }

        let x = p / rho;
        if !(h >= (1.0 + x * x).sqrt() + x) {
            flag(EosCondition::KineticBound);
        }

        if !(h * (1.0 / rho - h_p) < h_rho && h_rho < 0.0) {
            flag(EosCondition::Causality);
        }

        let cold = model.enthalpy_at(rho, rho * COLD_PROBE);
        if !((cold - 1.0).abs() <= COLD_TOLERANCE) {
            flag(EosCondition::ColdLimit);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALL_KINDS: [Eos; 4] = [
        Eos::GammaLaw { gamma: 5.0 / 3.0 },
        Eos::GammaLaw { gamma: 2.0 },
        Eos::Mathews,
        Eos::RyuChattopadhyay,
    ];

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn gamma_law_enthalpy_and_inverse() {
        let eos = Eos::gamma_law(2.0).unwrap();
        assert_eq!(eos.enthalpy(1.0, 1.0).unwrap(), 3.0);
        assert_eq!(eos.pressure_from_enthalpy(1.0, 3.0).unwrap(), 1.0);
    }

    #[test]
    fn gamma_law_partials() {
        let eos = Eos::gamma_law(5.0 / 3.0).unwrap();
        let d = eos.dpressure(2.0, 4.0).unwrap();
        assert!(rel(d.d_rho, 1.2) < 1e-15);
        assert!(rel(d.d_h, 0.8) < 1e-15);
    }

    #[test]
    fn rc_hand_values() {
        // 2(6 + 4 + 1) / (1 * (3 + 2)) = 22/5
        let h = Eos::RyuChattopadhyay.enthalpy(1.0, 1.0).unwrap();
        assert!(rel(h, 4.4) < 1e-15);
        let p = Eos::RyuChattopadhyay.pressure_from_enthalpy(1.0, 4.4).unwrap();
        assert!(rel(p, 1.0) < 1e-14);
    }

    #[test]
    fn mathews_cold_limit() {
        let h = Eos::Mathews.enthalpy(1.0, 1e-300).unwrap();
        assert_eq!(h, 1.0);
        let p = Eos::Mathews.pressure_from_enthalpy(1.0, 1.0 + 1e-12).unwrap();
        assert!(p > 0.0 && p < 1e-12);
    }

    #[test]
    fn mathews_derivative_matches_finite_difference() {
        let eos = Eos::Mathews;
        let (rho, h) = (1.0, 2.0);
        let step = 1e-6;
        let fd_h = (eos.pressure_from_enthalpy(rho, h + step).unwrap()
            - eos.pressure_from_enthalpy(rho, h - step).unwrap())
            / (2.0 * step);
        let fd_rho = (eos.pressure_from_enthalpy(rho + step, h).unwrap()
            - eos.pressure_from_enthalpy(rho - step, h).unwrap())
            / (2.0 * step);
        let d = eos.dpressure(rho, h).unwrap();
        assert!(rel(d.d_h, fd_h) < 1e-6, "{} vs {}", d.d_h, fd_h);
        assert!(rel(d.d_rho, fd_rho) < 1e-6);
    }

    #[test]
    fn domain_errors() {
        let eos = Eos::Mathews;
        assert!(eos.enthalpy(0.0, 1.0).is_err());
        assert!(eos.enthalpy(1.0, -1.0).is_err());
        assert!(eos.enthalpy(f64::NAN, 1.0).is_err());
        assert!(eos.pressure_from_enthalpy(1.0, 1.0).is_err());
        assert!(eos.pressure_from_enthalpy(-1.0, 2.0).is_err());
        assert!(eos.dpressure(1.0, 0.5).is_err());
        assert!(Eos::gamma_law(1.0).is_err());
        assert!(Eos::gamma_law(2.5).is_err());
        assert!(Eos::gamma_law(2.0).is_ok());
    }

    #[test]
    fn enthalpy_partials_match_finite_differences() {
        struct ByDifferences(Eos);
        impl EnthalpyModel for ByDifferences {
            fn enthalpy_at(&self, rho: f64, p: f64) -> f64 {
                self.0.enthalpy_at(rho, p)
            }
        }
        for eos in ALL_KINDS {
            for &(rho, p) in &[(1.0, 1.0), (0.3, 7.0), (20.0, 0.01)] {
                let (a_rho, a_p) = eos.enthalpy_partials(rho, p).unwrap();
                let (f_rho, f_p) = ByDifferences(eos).enthalpy_partials_at(rho, p);
                // Differencing noise scales with H over the step, not with the partial.
                let h = eos.enthalpy(rho, p).unwrap();
                assert!((a_rho - f_rho).abs() < 1e-6 * h / rho, "{eos:?} {rho} {p}");
                assert!((a_p - f_p).abs() < 1e-6 * h / p, "{eos:?} {rho} {p}");
            }
        }
    }

    #[test]
    fn second_condition_at_unit_state() {
        let eos = Eos::gamma_law(2.0).unwrap();
        let report = check_eos_conditions(&eos, &[(1.0, 1.0)]).unwrap();
        assert!(report.is_clean());
        assert!(3.0 >= 2f64.sqrt() + 1.0);
    }

    #[test]
    fn invalid_model_is_flagged() {
        struct TooCold;
        impl EnthalpyModel for TooCold {
            fn enthalpy_at(&self, rho: f64, p: f64) -> f64 {
                1.0 + 0.1 * p / rho
            }
        }
        let report = check_eos_conditions(&TooCold, &[(1.0, 1.0), (2.0, 0.5)]).unwrap();
        assert_eq!(report.count(EosCondition::KineticBound), 2);
    }

    #[test]
    fn checker_rejects_nonpositive_samples() {
        assert!(check_eos_conditions(&Eos::Mathews, &[(1.0, 0.0)]).is_err());
    }

    #[test]
    fn pressure_limit_is_monotone() {
        for eos in ALL_KINDS {
            let mut last = f64::INFINITY;
            for k in 2..=10 {
                let p = eos.pressure_from_enthalpy(1.0, 1.0 + 10f64.powi(-k)).unwrap();
                assert!(p > 0.0 && p < last, "{eos:?} k={k}");
                last = p;
            }
        }
    }
}
