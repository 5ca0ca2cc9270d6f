//! Primitive and conservative states, the forward map, and admissibility.

use serde::{Deserialize, Serialize};

use crate::eos::Eos;
use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

#[inline]
pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// Physical state `(rho, v, B, p)` in units with `c = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    pub rho: f64,
    pub v: Vec3,
    #[serde(rename = "B")]
    pub b: Vec3,
    pub p: f64,
}

impl Primitive {
    pub fn new(rho: f64, v: Vec3, b: Vec3, p: f64) -> Result<Self> {
        let q = Primitive { rho, v, b, p };
        q.validate()?;
        Ok(q)
    }

    /// Checks `rho > 0`, `p > 0`, `|v| < 1` and finiteness.
    pub fn validate(&self) -> Result<()> {
        let finite = self.rho.is_finite()
            && self.p.is_finite()
            && self.v.iter().chain(self.b.iter()).all(|c| c.is_finite());
        if !finite {
            return Err(Error::NonPhysical("non-finite component".into()));
        }
        if !(self.rho > 0.0) {
            return Err(Error::NonPhysical(format!("rho = {:e} <= 0", self.rho)));
        }
        if !(self.p > 0.0) {
            return Err(Error::NonPhysical(format!("p = {:e} <= 0", self.p)));
        }
        let v2 = dot(&self.v, &self.v);
        if !(v2 < 1.0) {
            return Err(Error::NonPhysical(format!("|v|^2 = {v2} >= 1")));
        }
        Ok(())
    }

    pub fn lorentz_factor(&self) -> f64 {
        1.0 / (1.0 - dot(&self.v, &self.v)).sqrt()
    }
}

/// Evolved state `(D, m, B, E)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conserved {
    #[serde(rename = "D")]
    pub d: f64,
    pub m: Vec3,
    #[serde(rename = "B")]
    pub b: Vec3,
    #[serde(rename = "E")]
    pub e: f64,
}

impl Conserved {
    pub fn new(d: f64, m: Vec3, b: Vec3, e: f64) -> Self {
        Conserved { d, m, b, e }
    }

    fn is_finite(&self) -> bool {
        self.d.is_finite() && self.e.is_finite() && self.m.iter().chain(self.b.iter()).all(|c| c.is_finite())
    }
}

/// Forward map from primitive to conservative variables.
pub fn prim_to_cons(q: &Primitive, eos: &Eos) -> Result<Conserved> {
    let v2 = dot(&q.v, &q.v);
    if !(v2 < 1.0) {
        return Err(Error::domain("prim_to_cons", format!("|v|^2 = {v2} >= 1")));
    }
    let h = eos.enthalpy(q.rho, q.p)?;
    let inv_w2 = 1.0 - v2;
    let w2 = 1.0 / inv_w2;
    let w = w2.sqrt();
    let b2 = dot(&q.b, &q.b);
    let vb = dot(&q.v, &q.b);
    let p_tot = q.p + 0.5 * (inv_w2 * b2 + vb * vb);
    let xi = q.rho * h * w2;
    let m = std::array::from_fn(|i| (xi + b2) * q.v[i] - vb * q.b[i]);
    Ok(Conserved { d: q.rho * w, m, b: q.b, e: xi - p_tot + b2 })
}

/// Scalar reductions of a conservative state feeding the master function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scalars {
    pub d: f64,
    pub e: f64,
    /// `|m|`
    pub m: f64,
    /// `|B|`
    pub b: f64,
    /// `|m|^2`
    pub m_sq: f64,
    /// `|B|^2`
    pub b_sq: f64,
    /// `m . B`
    pub tau: f64,
    /// `B^2 - E`
    pub alpha1: f64,
    /// `B^2 - |m|`
    pub alpha2: f64,
    /// `tau^2 / B^2`, exactly zero without a field
    pub beta1: f64,
    /// `m^2 - beta1`
    pub beta2: f64,
}

impl Scalars {
    /// Builds the reductions from raw magnitudes, as used for profiling
    /// states specified by `(D, E, |m|^2, |B|, m.B)` directly.
    pub fn from_reductions(d: f64, e: f64, m_sq: f64, b: f64, tau: f64) -> Self {
        let b_sq = b * b;
        let m = m_sq.sqrt();
        // Cauchy-Schwarz keeps beta2 >= 0 in exact arithmetic; clamp rounding.
        let beta1 = if b_sq == 0.0 { 0.0 } else { (tau * tau / b_sq).min(m_sq) };
        Scalars {
            d,
            e,
            m,
            b,
            m_sq,
            b_sq,
            tau,
            alpha1: b_sq - e,
            alpha2: b_sq - m,
            beta1,
            beta2: m_sq - beta1,
        }
    }

    /// True when the state carries no magnetic coupling (`B = 0`).
    pub fn is_unmagnetized(&self) -> bool {
        self.b_sq == 0.0
    }
}

pub fn derived_scalars(u: &Conserved) -> Scalars {
    Scalars::from_reductions(u.d, u.e, dot(&u.m, &u.m), norm(&u.b), dot(&u.m, &u.b))
}

/// The two auxiliary functions of the admissibility criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Admissibility {
    pub phi: f64,
    pub psi: f64,
}

/// Evaluates `Phi(U)` and `Psi(U)`; `None` when a radicand is negative,
/// which only happens for inadmissible states.
pub fn admissibility_functions(u: &Conserved) -> Option<Admissibility> {
    let b2 = dot(&u.b, &u.b);
    let m2 = dot(&u.m, &u.m);
    let mb = dot(&u.m, &u.b);
    let alpha1 = b2 - u.e;
    let phi_sq = alpha1 * alpha1 + 3.0 * (u.e * u.e - u.d * u.d - m2);
    if !(phi_sq >= 0.0) {
        return None;
    }
    let phi = phi_sq.sqrt();
    let inner = phi + alpha1;
    if !(inner >= 0.0) {
        return None;
    }
    let psi = (phi - 2.0 * alpha1) * inner.sqrt() - (13.5 * (u.d * u.d * b2 + mb * mb)).sqrt();
    Some(Admissibility { phi, psi })
}

/// Membership in the admissible set: `D > 0`, `E > sqrt(D^2 + m^2)`, `Psi > 0`.
pub fn is_admissible(u: &Conserved) -> bool {
    if !u.is_finite() || !(u.d > 0.0) {
        return false;
    }
    let m2 = dot(&u.m, &u.m);
    if !(u.e - (u.d * u.d + m2).sqrt() > 0.0) {
        return false;
    }
    matches!(admissibility_functions(u), Some(a) if a.psi > 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gamma2() -> Eos {
        Eos::gamma_law(2.0).unwrap()
    }

    #[test]
    fn forward_map_static_states() {
        let q = Primitive::new(1.0, [0.0; 3], [0.0; 3], 1.0).unwrap();
        let u = prim_to_cons(&q, &gamma2()).unwrap();
        assert_eq!(u, Conserved::new(1.0, [0.0; 3], [0.0; 3], 2.0));

        let q = Primitive::new(1.0, [0.0; 3], [1.0, 0.0, 0.0], 1.0).unwrap();
        let u = prim_to_cons(&q, &gamma2()).unwrap();
        assert_eq!(u, Conserved::new(1.0, [0.0; 3], [1.0, 0.0, 0.0], 2.5));
    }

    #[test]
    fn forward_map_rejects_superluminal() {
        let q = Primitive { rho: 1.0, v: [1.0, 0.0, 0.0], b: [0.0; 3], p: 1.0 };
        assert!(prim_to_cons(&q, &gamma2()).is_err());
        assert!(Primitive::new(1.0, [0.6, 0.8, 0.0], [0.0; 3], 1.0).is_err());
        assert!(Primitive::new(-1.0, [0.0; 3], [0.0; 3], 1.0).is_err());
        assert!(Primitive::new(1.0, [0.0; 3], [0.0; 3], 0.0).is_err());
    }

    #[test]
    fn scalars_of_static_magnetized_state() {
        let s = derived_scalars(&Conserved::new(1.0, [0.0; 3], [1.0, 0.0, 0.0], 2.5));
        assert_eq!((s.m, s.b, s.tau), (0.0, 1.0, 0.0));
        assert_eq!((s.alpha1, s.alpha2), (-1.5, 1.0));
        assert_eq!((s.beta1, s.beta2), (0.0, 0.0));
    }

    #[test]
    fn scalars_piecewise_and_aligned() {
        let s = derived_scalars(&Conserved::new(1.0, [1.0, 0.0, 0.0], [0.0; 3], 3.0));
        assert_eq!((s.beta1, s.beta2), (0.0, 1.0));

        let s = derived_scalars(&Conserved::new(1.0, [3.0, 0.0, 0.0], [4.0, 0.0, 0.0], 30.0));
        assert_eq!(s.tau, 12.0);
        assert_eq!(s.beta1, 9.0);
        assert_eq!(s.beta2, 0.0);
    }

    #[test]
    fn admissibility_hand_values() {
        // Phi = sqrt(2.25 + 3 * 5.25) = sqrt(18)
        // Psi = (sqrt(18) + 3) * sqrt(sqrt(18) - 1.5) - sqrt(13.5)
        let u = Conserved::new(1.0, [0.0; 3], [1.0, 0.0, 0.0], 2.5);
        let a = admissibility_functions(&u).unwrap();
        let phi = 18f64.sqrt();
        let psi = (phi + 3.0) * (phi - 1.5).sqrt() - 13.5f64.sqrt();
        assert!((a.phi - phi).abs() < 1e-15);
        assert!((a.psi - psi).abs() < 1e-14);
        assert!((a.psi - 8.32).abs() < 5e-3);
        assert!(is_admissible(&u));

        let u = Conserved::new(1.0, [0.0; 3], [0.0; 3], 2.0);
        let a = admissibility_functions(&u).unwrap();
        let phi = 13f64.sqrt();
        assert!((a.phi - phi).abs() < 1e-15);
        assert!((a.psi - (phi + 4.0) * (phi - 2.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn inadmissible_states() {
        assert!(!is_admissible(&Conserved::new(-1.0, [0.0; 3], [0.0; 3], 2.0)));
        // E exactly sqrt(D^2 + m^2)
        assert!(!is_admissible(&Conserved::new(3.0, [4.0, 0.0, 0.0], [0.0; 3], 5.0)));
        assert!(!is_admissible(&Conserved::new(1.0, [0.0; 3], [f64::NAN, 0.0, 0.0], 2.0)));
        // Strong field, tiny energy: negative Psi.
        let u = Conserved::new(1.0, [0.0; 3], [10.0, 0.0, 0.0], 1.01);
        assert!(!is_admissible(&u));
    }

    #[test]
    fn json_keys() {
        let u: Conserved =
            serde_json::from_str(r#"{"D": 1, "m": [0,0,0], "B": [1,0,0], "E": 2.5}"#).unwrap();
        assert_eq!(u.e, 2.5);
        let q: Primitive =
            serde_json::from_str(r#"{"rho": 1, "v": [0,0,0], "B": [1,0,0], "p": 1}"#).unwrap();
        assert_eq!(q.b[0], 1.0);
    }
}
