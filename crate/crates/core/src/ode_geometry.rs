//! Generalized Wünschmann invariants `W0`, `W1` of `u'''' = F(t,u,p,q,r)` and linearization
//! of such an equation along a fixed solution.
//!
//! Total derivatives `d^k/dt^k` of `F_q`, `F_r` are read off the Taylor coefficients of the
//! partials composed with the formal solution through the jet.

use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::jet::Jet4;
use crate::schwarzian::EL_FIELD;
use crate::symbolics::{self, formal_solution, taylor_eval, Expr, Var};

/// Series order used for total derivatives (only the first three are needed).
const SERIES_ORDER: usize = 8;

/// Right-hand side `F` of a fourth-order equation with its partials in `p`, `q`, `r`.
#[derive(Debug, Clone)]
pub struct OdeField {
    f: Expr,
    fp: Expr,
    fq: Expr,
    fr: Expr,
}

impl OdeField {
    pub fn new(f: Expr) -> Self {
        let fp = f.differentiate(Var::P);
        let fq = f.differentiate(Var::Q);
        let fr = f.differentiate(Var::R);
        Self { f, fp, fq, fr }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(Self::new(symbolics::parse(text)?))
    }

    /// The Euler–Lagrange field of `∫(u''/u')² dt`.
    pub fn el() -> Self {
        Self::parse(EL_FIELD).expect("built-in field parses")
    }

    pub fn f(&self) -> &Expr {
        &self.f
    }

    pub fn fp(&self) -> &Expr {
        &self.fp
    }

    pub fn fq(&self) -> &Expr {
        &self.fq
    }

    pub fn fr(&self) -> &Expr {
        &self.fr
    }

    /// `(F_p, F_q, F_r)` at a jet.
    pub fn partials(&self, j: &Jet4) -> Result<[f64; 3]> {
        Ok([self.fp.eval(j)?, self.fq.eval(j)?, self.fr.eval(j)?])
    }
}

/// Values and total derivatives along the flow at one jet.
struct FlowDerivs {
    fp: f64,
    /// `F_q, d/dt F_q, d²/dt² F_q`
    fq: [f64; 3],
    /// `F_r, ..., d³/dt³ F_r`
    fr: [f64; 4],
}

fn flow_derivs(field: &OdeField, j: &Jet4) -> Result<FlowDerivs> {
    let sol = formal_solution(&field.f, j, SERIES_ORDER)?;
    let env = sol.env();
    let fq = taylor_eval(&field.fq, &env)?;
    let fr = taylor_eval(&field.fr, &env)?;
    let out = FlowDerivs {
        fp: field.fp.eval(j)?,
        fq: [fq.derivative(0), fq.derivative(1), fq.derivative(2)],
        fr: [
            fr.derivative(0),
            fr.derivative(1),
            fr.derivative(2),
            fr.derivative(3),
        ],
    };
    let all_finite = out.fp.is_finite() && out.fq.iter().chain(&out.fr).all(|x| x.is_finite());
    if !all_finite {
        return Err(Error::Domain(format!("field not smooth at jet {j:?}")));
    }
    Ok(out)
}

pub fn w1(field: &OdeField, j: &Jet4) -> Result<f64> {
    let d = flow_derivs(field, j)?;
    let [r0, r1, r2, _] = d.fr;
    let [q0, q1, _] = d.fq;
    Ok(2.25 * r0 * r1 - 1.5 * r2 + 3.0 * q1 - 0.375 * r0.powi(3) - 1.5 * q0 * r0 - 3.0 * d.fp)
}

/// Which partial stands in the slot written `F_3` in the `(7/20) F_3 d²F_r/dt²` term of `W0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThirdSlot {
    Fr,
    Fq,
    Fp,
}

pub fn w0(field: &OdeField, j: &Jet4) -> Result<f64> {
    w0_with(field, j, ThirdSlot::Fr)
}

/// `W0` with an explicit choice for the ambiguous `F_3` factor.
pub fn w0_with(field: &OdeField, j: &Jet4, slot: ThirdSlot) -> Result<f64> {
    let d = flow_derivs(field, j)?;
    let [r0, r1, r2, r3] = d.fr;
    let [q0, q1, q2] = d.fq;
    let f3 = match slot {
        ThirdSlot::Fr => r0,
        ThirdSlot::Fq => q0,
        ThirdSlot::Fp => d.fp,
    };
    Ok(
        11.0 / 1600.0 * r0.powi(4) - 9.0 / 50.0 * r0 * r0 * r1 - 1.0 / 200.0 * r0 * r0 * q0
            + 21.0 / 100.0 * r1 * r1
            + 1.0 / 50.0 * r1 * q0
            - 9.0 / 100.0 * q0 * q0
            + 7.0 / 20.0 * f3 * r2
            - 0.2 * r3
            + 0.3 * q2
            - 0.25 * r0 * q1,
    )
}

/// Invariant pair, serialized as `{"W0": …, "W1": …}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Invariants {
    #[serde(rename = "W0")]
    pub w0: f64,
    #[serde(rename = "W1")]
    pub w1: f64,
}

pub fn invariants(field: &OdeField, j: &Jet4) -> Result<Invariants> {
    Ok(Invariants {
        w0: w0(field, j)?,
        w1: w1(field, j)?,
    })
}

/// `(a1, a2, a3) = (F_p, F_q, F_r)` on the jet of `base` at `t`.
pub fn linearize(field: &OdeField, base: &dyn Curve, t: f64) -> Result<[f64; 3]> {
    let j = base.jet(t).map_err(|_| Error::SingularTime { t })?;
    j.check_regular().map_err(|_| Error::SingularTime { t })?;
    let a = field.partials(&j).map_err(|_| Error::SingularTime { t })?;
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::SingularTime { t });
    }
    Ok(a)
}

/// `v'''' = a3(t) v''' + a2(t) v'' + a1(t) v'` along a base solution.
pub struct LinearizedOde<'a> {
    field: &'a OdeField,
    base: &'a dyn Curve,
}

impl<'a> LinearizedOde<'a> {
    pub fn new(field: &'a OdeField, base: &'a dyn Curve) -> Self {
        Self { field, base }
    }

    /// `[a1, a2, a3]` at `t`.
    pub fn coeffs(&self, t: f64) -> Result<[f64; 3]> {
        linearize(self.field, self.base, t)
    }

    /// `v'''' - a3 v''' - a2 v'' - a1 v'` for `v` given by its derivatives at `t`.
    pub fn residual(&self, t: f64, v: &[f64; 5]) -> Result<f64> {
        let [a1, a2, a3] = self.coeffs(t)?;
        Ok(v[4] - a3 * v[3] - a2 * v[2] - a1 * v[1])
    }
}

/// Maximum residual of the basis functions over the sample times.
pub fn verify_linear_basis(lin: &LinearizedOde, basis: &[&dyn Curve], ts: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for b in basis {
        for &t in ts {
            worst = worst.max(lin.residual(t, &b.derivs(t)?)?.abs());
        }
    }
    Ok(worst)
}
