//! Functionals `I_L = ∫(u''/u')²` and `I_S = ∫S(u)`, their first variations, and the
//! extended-variation critical-point test for `I_S`.
//!
//! A curve is any [`Curve`] restricted to an interval by [`CurveFn`]; a variation direction is
//! anything implementing [`Variation`].

mod admissible;

pub use admissible::{
    admissible_variation, critical_test, du_residual, solve_du, AdmissibleVariation, BumpFn,
    CriticalReport, DuSolution, VariationCheck, Witness,
};

use crate::curve::{Curve, ExprCurve};
use crate::error::{Error, Result};
use crate::jet::{Jet4, VarJet};
use crate::quadrature::{self, ABS_TOL};
use crate::schwarzian::{boundary_b, boundary_terms, d_u, lagrangian, schwarzian};

/// Curves with `|u'|` below this anywhere on the check grid are rejected.
pub const MIN_SLOPE: f64 = 1e-8;

const CHECK_POINTS: usize = 201;

/// Default step of [`delta_fd`].
pub const FD_STEP: f64 = 1e-5;

/// A curve restricted to `[t0, t1]`, checked for `|u'| ≥ MIN_SLOPE` on a grid.
#[derive(Clone, Copy)]
pub struct CurveFn<'a> {
    curve: &'a dyn Curve,
    t0: f64,
    t1: f64,
}

impl<'a> CurveFn<'a> {
    pub fn new(curve: &'a dyn Curve, t0: f64, t1: f64) -> Result<Self> {
        if !(t0 < t1) || !t0.is_finite() || !t1.is_finite() {
            return Err(Error::InvalidInput(format!("bad interval [{t0}, {t1}]")));
        }
        for i in 0..CHECK_POINTS {
            let t = t0 + (t1 - t0) * i as f64 / (CHECK_POINTS - 1) as f64;
            let j = curve.jet(t)?;
            if !j.is_finite() {
                return Err(Error::SingularTime { t });
            }
            if !(j.p.abs() >= MIN_SLOPE) {
                return Err(Error::SingularJet { p: j.p });
            }
        }
        Ok(Self { curve, t0, t1 })
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.t0, self.t1)
    }

    pub fn curve(&self) -> &'a dyn Curve {
        self.curve
    }

    pub fn derivs(&self, t: f64) -> Result<[f64; 5]> {
        self.curve.derivs(t)
    }

    pub fn jet(&self, t: f64) -> Result<Jet4> {
        self.curve.jet(t)
    }

    /// Curve breakpoints strictly inside the interval.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.curve
            .breakpoints()
            .into_iter()
            .filter(|&x| x > self.t0 && x < self.t1)
            .collect()
    }

    fn integrate(
        &self,
        extra: &[f64],
        mut f: impl FnMut(f64, &Jet4) -> Result<f64>,
    ) -> Result<f64> {
        let mut cuts = self.breakpoints();
        cuts.extend_from_slice(extra);
        quadrature::integrate(|t| f(t, &self.jet(t)?), self.t0, self.t1, &cuts, ABS_TOL)
    }
}

/// A variation direction `v` with derivatives through order 3.
pub trait Variation {
    /// `[v, v', v'', v''']` at `t`.
    fn derivs(&self, t: f64) -> Result<[f64; 4]>;

    /// Points where `v''` may jump.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    fn varjet(&self, t: f64) -> Result<VarJet> {
        let d = self.derivs(t)?;
        Ok(VarJet::new(d[0], d[1], d[2]))
    }
}

impl Variation for ExprCurve {
    fn derivs(&self, t: f64) -> Result<[f64; 4]> {
        let d = Curve::derivs(self, t)?;
        Ok([d[0], d[1], d[2], d[3]])
    }
}

/// `v ≡ 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroVariation;

impl Variation for ZeroVariation {
    fn derivs(&self, _t: f64) -> Result<[f64; 4]> {
        Ok([0.0; 4])
    }
}

impl<V: Variation + ?Sized> Variation for &V {
    fn derivs(&self, t: f64) -> Result<[f64; 4]> {
        (**self).derivs(t)
    }

    fn breakpoints(&self) -> Vec<f64> {
        (**self).breakpoints()
    }
}

/// `u + s v` as a curve (the fourth derivative is not perturbed; no functional uses it).
pub struct Perturbed<'a> {
    pub u: &'a dyn Curve,
    pub v: &'a dyn Variation,
    pub s: f64,
}

impl Curve for Perturbed<'_> {
    fn derivs(&self, t: f64) -> Result<[f64; 5]> {
        let mut d = self.u.derivs(t)?;
        let w = self.v.derivs(t)?;
        for k in 0..4 {
            d[k] += self.s * w[k];
        }
        Ok(d)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.u.breakpoints();
        b.extend(self.v.breakpoints());
        b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Functional {
    /// `I_L = ∫ (u''/u')² dt`
    L,
    /// `I_S = ∫ S(u) dt`
    S,
}

impl Functional {
    fn density(self, j: &Jet4) -> Result<f64> {
        match self {
            Functional::L => lagrangian(j),
            Functional::S => schwarzian(j),
        }
    }
}

pub fn functional(which: Functional, u: &CurveFn) -> Result<f64> {
    u.integrate(&[], |_, j| which.density(j))
}

#[allow(non_snake_case)]
pub fn functional_IL(u: &CurveFn) -> Result<f64> {
    functional(Functional::L, u)
}

#[allow(non_snake_case)]
pub fn functional_IS(u: &CurveFn) -> Result<f64> {
    functional(Functional::S, u)
}

/// `I_S - (u''/u')|_{t0}^{t1} + I_L / 2`, which vanishes identically.
pub fn total_derivative_residual(u: &CurveFn) -> Result<f64> {
    let (t0, t1) = u.interval();
    let (a, b) = (u.jet(t0)?, u.jet(t1)?);
    let jump = b.q / b.p - a.q / a.p;
    Ok(functional_IS(u)? - jump + 0.5 * functional_IL(u)?)
}

fn perturb(j: &Jet4, w: &[f64; 4], s: f64) -> Jet4 {
    Jet4::new(
        j.t,
        j.u + s * w[0],
        j.p + s * w[1],
        j.q + s * w[2],
        j.r + s * w[3],
    )
}

/// Central difference `(I[u + h v] - I[u - h v]) / (2h)` on the interval of `u`.
///
/// Both functionals are integrated on one common node set (the quotient is formed under the
/// integral), so adaptive-quadrature noise does not get amplified by `1/h`.
pub fn delta_fd(which: Functional, u: &CurveFn, v: &dyn Variation, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidInput(format!(
            "finite-difference step {h} must be positive"
        )));
    }
    let (t0, t1) = u.interval();
    for s in [h, -h] {
        CurveFn::new(&Perturbed { u: u.curve(), v, s }, t0, t1)?;
    }
    u.integrate(&v.breakpoints(), |t, j| {
        let w = v.derivs(t)?;
        let plus = which.density(&perturb(j, &w, h))?;
        let minus = which.density(&perturb(j, &w, -h))?;
        Ok((plus - minus) / (2.0 * h))
    })
}

/// Richardson extrapolation of [`delta_fd`] from steps `h` and `h/2`.
pub fn delta_fd_richardson(
    which: Functional,
    u: &CurveFn,
    v: &dyn Variation,
    h: f64,
) -> Result<f64> {
    let coarse = delta_fd(which, u, v, h)?;
    let fine = delta_fd(which, u, v, 0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Equivalent ways of writing a first variation: an integral plus a boundary difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    /// `δI_L = ∫ 2u''v''/u'² - 2u''²v'/u'³`
    Expanded,
    /// `δI_L = ∫ (-2u'''/u'² + 2u''²/u'³) v' + B0|`
    SlopeWeighted,
    /// `δI_L = ∫ (-2u'''/u' + 3u''²/u'²) D_u(v)/u' + B1|`
    Connection,
    /// `δI_L = ∫ (2/u'²)(u'''' - F) v + B2|`, with `F` the Euler–Lagrange right-hand side
    EulerLagrange,
    /// `δI_S = ∫ S(u) D_u(v) / u' + B|`
    Schwarzian,
}

impl Form {
    pub fn functional(self) -> Functional {
        match self {
            Form::Schwarzian => Functional::S,
            _ => Functional::L,
        }
    }

    fn integrand(self, d: &[f64; 5], j: &Jet4, w: &VarJet) -> Result<f64> {
        j.check_regular()?;
        let (p, q, r) = (j.p, j.q, j.r);
        let (p2, p3) = (p * p, p * p * p);
        Ok(match self {
            Form::Expanded => 2.0 * q * w.v2 / p2 - 2.0 * q * q * w.v1 / p3,
            Form::SlopeWeighted => (-2.0 * r / p2 + 2.0 * q * q / p3) * w.v1,
            Form::Connection => (-2.0 * r / p + 3.0 * q * q / p2) * d_u(j, w)? / p,
            Form::EulerLagrange => {
                let f = -3.0 * q * q * q / p2 + 4.0 * q * r / p;
                2.0 / p2 * (d[4] - f) * w.v
            }
            Form::Schwarzian => schwarzian(j)? * d_u(j, w)? / p,
        })
    }

    fn boundary(self, j: &Jet4, w: &VarJet) -> Result<f64> {
        Ok(match self {
            Form::Expanded => 0.0,
            Form::SlopeWeighted => boundary_terms(j, w)?.b0,
            Form::Connection => boundary_terms(j, w)?.b1,
            Form::EulerLagrange => boundary_terms(j, w)?.b2,
            Form::Schwarzian => boundary_b(j, w)?,
        })
    }
}

/// `(integral, boundary difference)` of one form; their sum is the first variation.
pub fn delta_form(form: Form, u: &CurveFn, v: &dyn Variation) -> Result<(f64, f64)> {
    let integral = u.integrate(&v.breakpoints(), |t, _| {
        let d = u.derivs(t)?;
        let j = Jet4::from_derivs(t, &d);
        form.integrand(&d, &j, &v.varjet(t)?)
    })?;
    let (t0, t1) = u.interval();
    let boundary =
        form.boundary(&u.jet(t1)?, &v.varjet(t1)?)? - form.boundary(&u.jet(t0)?, &v.varjet(t0)?)?;
    Ok((integral, boundary))
}

/// `integral + boundary` of [`delta_form`].
pub fn delta_form_total(form: Form, u: &CurveFn, v: &dyn Variation) -> Result<f64> {
    let (i, b) = delta_form(form, u, v)?;
    Ok(i + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::MobiusFamily;

    fn curve(s: &str) -> ExprCurve {
        ExprCurve::parse(s).unwrap()
    }

    #[test]
    fn functionals_on_closed_forms() {
        let e = curve("exp(2*t)");
        let u = CurveFn::new(&e, 0.0, 1.0).unwrap();
        assert!((functional_IL(&u).unwrap() - 4.0).abs() < 1e-12);
        assert!((functional_IS(&u).unwrap() + 2.0).abs() < 1e-12);

        let tan = MobiusFamily::canonical(2.0);
        let u = CurveFn::new(&tan, 0.0, 0.5).unwrap();
        assert!((functional_IS(&u).unwrap() - 1.0).abs() < 1e-12);

        let affine = MobiusFamily::new(2.0, 1.0, 0.0, 1.0, 0.0).unwrap();
        let u = CurveFn::new(&affine, -3.0, 2.0).unwrap();
        assert_eq!(functional_IL(&u).unwrap(), 0.0);
        let m = MobiusFamily::new(1.0, 2.0, 1.0, 3.0, 0.0).unwrap();
        let u = CurveFn::new(&m, 0.0, 1.0).unwrap();
        assert!(functional_IS(&u).unwrap().abs() < 1e-12);
    }

    #[test]
    fn tan_lagrangian_matches_closed_integral() {
        // L(tan) = 4 tan², so I_L = 4 (tan 1 - 1).
        let tan = MobiusFamily::canonical(2.0);
        let u = CurveFn::new(&tan, 0.0, 1.0).unwrap();
        let want = 4.0 * (1f64.tan() - 1.0);
        assert!((functional_IL(&u).unwrap() - want).abs() < 1e-10);
        assert!(total_derivative_residual(&u).unwrap().abs() < 1e-10);
    }

    #[test]
    fn flat_curves_are_rejected() {
        let c = curve("t^2");
        assert!(matches!(
            CurveFn::new(&c, -1.0, 1.0),
            Err(Error::SingularJet { .. })
        ));
        assert!(CurveFn::new(&c, 1.0, 0.0).is_err());
    }

    #[test]
    fn fd_of_line_and_zero_variation() {
        let line = curve("t");
        let u = CurveFn::new(&line, 0.0, 1.0).unwrap();
        let v = curve("t^2");
        // S(t + s t²) = -6s²/(1 + 2st)², so the central difference is 12 h² to leading order.
        let fd = delta_fd(Functional::S, &u, &v, FD_STEP).unwrap();
        assert!((fd - 12.0 * FD_STEP * FD_STEP).abs() < 1e-12, "{fd}");
        assert!(
            delta_fd_richardson(Functional::S, &u, &v, FD_STEP)
                .unwrap()
                .abs()
                < 1e-13
        );
        let e = curve("exp(2*t)");
        let u = CurveFn::new(&e, 0.0, 1.0).unwrap();
        assert_eq!(
            delta_fd(Functional::S, &u, &ZeroVariation, FD_STEP).unwrap(),
            0.0
        );
        assert_eq!(
            delta_fd(Functional::L, &u, &ZeroVariation, FD_STEP).unwrap(),
            0.0
        );
    }

    #[test]
    fn schwarzian_form_of_line_with_quadratic_variation() {
        let line = curve("t");
        let u = CurveFn::new(&line, 0.0, 1.0).unwrap();
        let (i, b) = delta_form(Form::Schwarzian, &u, &curve("t^2")).unwrap();
        assert_eq!((i, b), (0.0, 0.0));
    }

    #[test]
    fn forms_agree_with_each_other_and_with_fd() {
        let c = curve("exp(2*t) + 0.3*t");
        let u = CurveFn::new(&c, 0.0, 1.0).unwrap();
        let v = curve("sin(3*t) + t^2");
        let totals: Vec<f64> = [
            Form::Expanded,
            Form::SlopeWeighted,
            Form::Connection,
            Form::EulerLagrange,
        ]
        .iter()
        .map(|f| delta_form_total(*f, &u, &v).unwrap())
        .collect();
        for x in &totals {
            assert!((x - totals[0]).abs() < 1e-9, "{totals:?}");
        }
        let fd = delta_fd_richardson(Functional::L, &u, &v, 1e-3).unwrap();
        assert!((fd - totals[0]).abs() < 1e-8, "{fd} {totals:?}");
        let s_form = delta_form_total(Form::Schwarzian, &u, &v).unwrap();
        let fd = delta_fd_richardson(Functional::S, &u, &v, 1e-3).unwrap();
        assert!((fd - s_form).abs() < 1e-8, "{fd} {s_form}");
    }
}
