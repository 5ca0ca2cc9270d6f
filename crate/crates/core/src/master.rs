//! The scalar master function `F(xi)` whose root is `xi* = rho h W^2`, its
//! derivative, the auxiliary polynomials, and the analytic bounds used to
//! start and bracket the iteration.
//!
//! Points where the Lorentz factor is not real are reported as `None`
//! rather than as errors so that callers comparing solvers can count them.

use serde::Serialize;

use crate::dd::Dd;
use crate::eos::Eos;
use crate::error::{Error, Result};
use crate::state::Scalars;

/// Which algebraic form of `W(xi)` to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LorentzForm {
    /// `W^-2 = (xi + alpha2)(eta + m)/eta^2 + beta1 (1/eta^2 - 1/xi^2)`.
    Stable,
    /// `W = xi (xi + B^2) / sqrt(f_a(xi))`; loses precision at large scales.
    Naive,
}

/// `W^-2` from the stable form, which is also the sign-carrier of `f_a`
/// on `xi > 0` (`f_a = xi^2 eta^2 W^-2`).
#[inline]
pub(crate) fn inverse_w_sq(xi: f64, s: &Scalars) -> f64 {
    let eta = xi + s.b_sq;
    let inv_eta2 = 1.0 / (eta * eta);
    (xi + s.alpha2) * (eta + s.m) * inv_eta2 + s.beta1 * (inv_eta2 - 1.0 / (xi * xi))
}

/// Lorentz factor from the stable form; `None` if not real.
pub fn lorentz_w_stable(xi: f64, s: &Scalars) -> Option<f64> {
    let bracket = inverse_w_sq(xi, s);
    (xi > 0.0 && bracket > 0.0).then(|| 1.0 / bracket.sqrt())
}

/// Lorentz factor from the defining quartic; `None` if not real.
pub fn lorentz_w_naive(xi: f64, s: &Scalars) -> Option<f64> {
    let (fa, _) = aux_quartics(xi, s);
    (xi > 0.0 && fa > 0.0).then(|| xi * (xi + s.b_sq) / fa.sqrt())
}

#[inline]
pub fn lorentz_w(xi: f64, s: &Scalars, form: LorentzForm) -> Option<f64> {
    match form {
        LorentzForm::Stable => lorentz_w_stable(xi, s),
        LorentzForm::Naive => lorentz_w_naive(xi, s),
    }
}

/// `F(xi)` given the Lorentz factor at `xi`.
#[inline]
fn master_f_at(xi: f64, w: f64, s: &Scalars, eos: &Eos) -> f64 {
    let inv_w = 1.0 / w;
    let inv_w2 = inv_w * inv_w;
    let pressure = match eos.gamma_factor() {
        Some(g0) => g0 * (xi * inv_w2 - s.d * inv_w),
        None => eos.pressure_unchecked(s.d * inv_w, xi * inv_w / s.d),
    };
    xi - pressure - 0.5 * (s.b_sq * inv_w2 + s.tau * s.tau / (xi * xi)) + s.alpha1
}

/// `W^-2` in double-double. Near the root its terms are O(1) while the
/// result can be far smaller.
fn inverse_w_sq_dd(xi: f64, s: &Scalars) -> Dd {
    let eta = Dd::sum(xi, s.b_sq);
    let eta2 = eta * eta;
    let inv_eta2 = eta2.recip();
    let inv_xi2 = Dd::product(xi, xi).recip();
    Dd::sum(xi, s.alpha2) * (eta + s.m) * inv_eta2 + (inv_eta2 - inv_xi2) * s.beta1
}

/// `F(xi)` with `W^-2`, the field terms, and the sum carried in
/// double-double. Its rounding error stays small relative to `F` where the
/// plain evaluation cancels; `None` where `W` is not real.
fn master_f_compensated_at(xi: f64, s: &Scalars, eos: &Eos) -> Option<f64> {
    let inv_w2 = inverse_w_sq_dd(xi, s);
    if !(xi > 0.0 && inv_w2.hi > 0.0) {
        return None;
    }
    let inv_w = inv_w2.hi.sqrt();
    let pressure = match eos.gamma_factor() {
        Some(g0) => (inv_w2 * xi + Dd::new(-s.d * inv_w)) * g0,
        None => Dd::new(eos.pressure_unchecked(s.d * inv_w, xi * inv_w / s.d)),
    };
    let alignment = Dd::new(s.tau * s.tau) / Dd::product(xi, xi);
    let magnetic = inv_w2 * s.b_sq;
    let f = Dd::sum(xi, s.alpha1) - pressure - (alignment + magnetic) * 0.5;
    Some(f.value())
}

/// `F'(xi)` given the Lorentz factor at `xi`.
#[inline]
fn master_df_at(xi: f64, w: f64, s: &Scalars, eos: &Eos) -> f64 {
    let eta = xi + s.b_sq;
    let xi3 = xi * xi * xi;
    let phi_a = -(s.beta1 / xi3 + s.beta2 / (eta * eta * eta));
    let base = 1.0 + s.b_sq * phi_a + s.tau * s.tau / xi3;
    match eos.gamma_factor() {
        Some(g0) => base - g0 * (1.0 / (w * w) - 2.0 * xi * phi_a + s.d * w * phi_a),
        None => {
            let dp = eos.dpressure_unchecked(s.d / w, xi / (s.d * w));
            base + dp.d_rho * s.d * w * phi_a + dp.d_h / s.d * (xi * w * phi_a - 1.0 / w)
        }
    }
}

/// `F(xi)` built on the stable Lorentz factor.
pub fn master_f(xi: f64, s: &Scalars, eos: &Eos) -> Option<f64> {
    master_f_with(xi, s, eos, LorentzForm::Stable)
}

/// `F(xi)` built on the naive Lorentz factor.
pub fn master_f_naive(xi: f64, s: &Scalars, eos: &Eos) -> Option<f64> {
    master_f_with(xi, s, eos, LorentzForm::Naive)
}

pub fn master_f_with(xi: f64, s: &Scalars, eos: &Eos, form: LorentzForm) -> Option<f64> {
    lorentz_w(xi, s, form).map(|w| master_f_at(xi, w, s, eos))
}

/// `F(xi)` on the stable form, evaluated with compensated arithmetic.
/// Agrees with [`master_f`] to rounding, but its own rounding error stays
/// small relative to `F` where the plain sum cancels.
pub fn master_f_compensated(xi: f64, s: &Scalars, eos: &Eos) -> Option<f64> {
    master_f_compensated_at(xi, s, eos)
}

/// `F'(xi)`; requires `W(xi)` real.
pub fn master_df(xi: f64, s: &Scalars, eos: &Eos) -> Result<f64> {
    master_df_with(xi, s, eos, LorentzForm::Stable).ok_or(Error::NonReal { xi })
}

pub fn master_df_with(xi: f64, s: &Scalars, eos: &Eos, form: LorentzForm) -> Option<f64> {
    lorentz_w(xi, s, form).map(|w| master_df_at(xi, w, s, eos))
}

/// `(W, F, F')` in one pass, skipping `F` when the caller already has it.
#[inline]
pub(crate) fn eval_newton(
    xi: f64,
    s: &Scalars,
    eos: &Eos,
    form: LorentzForm,
    cached_f: Option<f64>,
) -> Option<(f64, f64, f64)> {
    let w = lorentz_w(xi, s, form)?;
    let f = cached_f.unwrap_or_else(|| master_f_at(xi, w, s, eos));
    Some((w, f, master_df_at(xi, w, s, eos)))
}

/// Whether `xi` lies in the physical domain `(xi_b, inf)`, i.e. the
/// extracted state has `rho > 0`, `p > 0`, `|v| < 1`.
///
/// Equivalent to `xi > 0 && f_b(xi) > 0`, but evaluated as
/// `W^-2 > 0 && xi / (D W) > 1`: the raw quartic cancels catastrophically
/// at large Lorentz factors.
pub fn in_physical_domain(xi: f64, s: &Scalars) -> bool {
    if !(xi > 0.0) {
        return false;
    }
    let bracket = inverse_w_sq(xi, s);
    bracket > 0.0 && xi * bracket.sqrt() > s.d
}

/// Everything known about one point of the master function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MasterEval {
    pub xi: f64,
    pub f: Option<f64>,
    pub df: Option<f64>,
    pub w: Option<f64>,
    pub pcp_ok: bool,
}

pub fn evaluate(xi: f64, s: &Scalars, eos: &Eos) -> MasterEval {
    let w = lorentz_w_stable(xi, s);
    MasterEval {
        xi,
        f: w.map(|w| master_f_at(xi, w, s, eos)),
        df: w.map(|w| master_df_at(xi, w, s, eos)),
        w,
        pcp_ok: in_physical_domain(xi, s),
    }
}

/// `(f_a(xi), f_b(xi))` evaluated as raw polynomials.
pub fn aux_quartics(xi: f64, s: &Scalars) -> (f64, f64) {
    let eta = xi + s.b_sq;
    let eta2 = eta * eta;
    let fa = xi * xi * eta2 - (xi * xi * s.m_sq + (2.0 * xi + s.b_sq) * s.tau * s.tau);
    (fa, fa - s.d * s.d * eta2)
}

/// `f_c(xi) = xi^3 + (B^2 - E) xi^2 - (B^2 D^2 + tau^2)/2`.
pub fn cubic_fc(xi: f64, s: &Scalars) -> f64 {
    (xi + s.alpha1) * xi * xi + cubic_constant(s)
}

/// Constant term `a0` of `f_c`.
#[inline]
fn cubic_constant(s: &Scalars) -> f64 {
    -0.5 * (s.b_sq * s.d * s.d + s.tau * s.tau)
}

/// The unique positive root of `f_c`, by the real two-branch closed form
/// followed by one Newton polish step.
pub fn xi_c(s: &Scalars) -> Result<f64> {
    let alpha1 = s.alpha1;
    let a0 = cubic_constant(s);
    let raw = if a0 == 0.0 {
        // xi^2 (xi + alpha1): the positive root is -alpha1 (E when B = 0).
        -alpha1
    } else {
        let alpha1_cubed = alpha1 * alpha1 * alpha1;
        let delta = 27.0 * a0 + 4.0 * alpha1_cubed;
        if delta > 0.0 {
            let arg = (1.0 + 13.5 * a0 / alpha1_cubed).clamp(-1.0, 1.0);
            let theta = arg.acos();
            -alpha1 / 3.0 * (1.0 - 2.0 * (theta / 3.0 - std::f64::consts::FRAC_PI_3).cos())
        } else {
            let x1 = alpha1_cubed + 13.5 * a0;
            let x2 = 1.5 * (3.0 * a0 * delta).sqrt();
            // (x1 + x2)(x1 - x2) = alpha1^6: take the non-cancelling cube root
            // and recover the other from the product.
            let c = (x1 + x2.copysign(x1)).cbrt();
            -(alpha1 + c + alpha1 * alpha1 / c) / 3.0
        }
    };

    let slope = raw * (3.0 * raw + 2.0 * alpha1);
    let polished = if slope > 0.0 && slope.is_finite() { raw - cubic_fc(raw, s) / slope } else { raw };

    let bound = 1e-10 * 1f64.max(alpha1.abs().powi(3)).max(a0.abs());
    let residual = cubic_fc(polished, s);
    if !(polished > 0.0 && residual.abs() <= bound) {
        return Err(Error::CubicPostCheck { xi: polished, residual, bound });
    }
    Ok(polished)
}

/// The cheap initial-guess candidate `(Phi(U) - 2(B^2 - E)) / 3`.
pub fn xi_d(s: &Scalars) -> Result<f64> {
    let radicand = s.alpha1 * s.alpha1 + 3.0 * (s.e * s.e - s.d * s.d - s.m_sq);
    if !(radicand >= 0.0) {
        return Err(Error::domain("xi_d", format!("negative radicand {radicand:e}")));
    }
    Ok((radicand.sqrt() - 2.0 * s.alpha1) / 3.0)
}

/// Simple upper bound `2E - B^2` on the physical root.
pub fn xi_upper(s: &Scalars) -> f64 {
    2.0 * s.e - s.b_sq
}

/// Limit of `W^-2` as `xi -> 0+`, signed.
fn inverse_w_sq_at_zero(s: &Scalars) -> f64 {
    if s.beta1 > 0.0 {
        f64::NEG_INFINITY
    } else if s.b_sq == 0.0 {
        if s.m_sq > 0.0 {
            f64::NEG_INFINITY
        } else {
            1.0
        }
    } else {
        // (B^2 - m)(B^2 + m) / B^4
        (s.b_sq - s.m) * (s.b_sq + s.m) / (s.b_sq * s.b_sq)
    }
}

/// Bisection for the sign change of `g` on `(lo, hi)` with `g(lo) <= 0 < g(hi)`.
fn bisect_sign_change(mut lo: f64, mut hi: f64, g: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..2000 {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi || hi - lo <= 1e-13 * hi {
            break;
        }
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo + 0.5 * (hi - lo)
}

/// Locates `xi_a` (largest non-negative root of `f_a`) and `xi_b` (root of
/// `f_b` above `xi_a`) by sign-change bisection. Diagnostics only.
///
/// The bisection runs on sign-equivalent forms: for `xi > 0`,
/// `sign f_a = sign W^-2` and, above `xi_a`, `sign f_b = sign(xi W^-1 - D)`.
pub fn bracket_roots_ab(s: &Scalars) -> Result<(f64, f64)> {
    let mut hi = xi_upper(s).max(s.e).max(1.0);
    let mut grown = 0;
    while !(inverse_w_sq(hi, s) > 0.0 && hi * inverse_w_sq(hi, s).sqrt() > s.d) {
        hi *= 2.0;
        grown += 1;
        if grown > 200 || !hi.is_finite() {
            return Err(Error::Bracketing { what: "xi_b", lo: 0.0, hi });
        }
    }

    let xi_a = if inverse_w_sq_at_zero(s) >= 0.0 {
        0.0
    } else {
        bisect_sign_change(0.0, hi, |xi| inverse_w_sq(xi, s))
    };

    let g = |xi: f64| {
        let bracket = inverse_w_sq(xi, s);
        if bracket > 0.0 {
            xi * bracket.sqrt() - s.d
        } else {
            -s.d
        }
    };
    let xi_b = bisect_sign_change(xi_a, hi, g);
    if !(xi_b > xi_a) {
        return Err(Error::Bracketing { what: "xi_b", lo: xi_a, hi });
    }
    Ok((xi_a, xi_b))
}
