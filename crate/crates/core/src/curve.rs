//! Scalar functions of `t` that can report derivatives through order 4.

use crate::error::{Error, Result};
use crate::jet::Jet4;
use crate::symbolics::{self, Expr, SeriesEnv, Var};

/// A smooth (or piecewise smooth) function of `t`.
pub trait Curve {
    /// `[u, u', u'', u''', u'''']` at `t`.
    fn derivs(&self, t: f64) -> Result<[f64; 5]>;

    /// Interior points where some derivative may jump; quadrature splits there.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    fn jet(&self, t: f64) -> Result<Jet4> {
        Ok(Jet4::from_derivs(t, &self.derivs(t)?))
    }
}

impl<C: Curve + ?Sized> Curve for &C {
    fn derivs(&self, t: f64) -> Result<[f64; 5]> {
        (**self).derivs(t)
    }

    fn breakpoints(&self) -> Vec<f64> {
        (**self).breakpoints()
    }
}

/// A user expression in `t` alone, differentiated through Taylor arithmetic.
#[derive(Debug, Clone)]
pub struct ExprCurve {
    expr: Expr,
}

impl ExprCurve {
    pub fn new(expr: Expr) -> Result<Self> {
        for v in [Var::U, Var::P, Var::Q, Var::R] {
            if expr.depends_on(v) {
                return Err(Error::InvalidInput(format!(
                    "curve expression `{expr}` may only depend on t (found `{}`)",
                    v.symbol()
                )));
            }
        }
        Ok(Self { expr })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::new(symbolics::parse(text)?)
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }
}

impl Curve for ExprCurve {
    fn derivs(&self, t: f64) -> Result<[f64; 5]> {
        let s = symbolics::taylor_eval(&self.expr, &SeriesEnv::identity(t, 4))?;
        let d = s.derivatives();
        let out = [d[0], d[1], d[2], d[3], d[4]];
        if out.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite derivative of `{}` at t={t}",
                self.expr
            )));
        }
        Ok(out)
    }
}
