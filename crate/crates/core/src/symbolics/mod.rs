//! Expressions over jet coordinates, symbolic differentiation and truncated Taylor arithmetic.
//!
//! Total derivatives along the flow of `u'''' = F` are taken from the coefficients of
//! [`taylor_eval`] applied to a [`formal_solution`], never by nested partial differentiation.

mod expr;
mod parse;
mod taylor;

pub use expr::{BinOp, Expr, Func, Var, TAN_POLE_EPS};
pub use parse::parse;
pub use taylor::TaylorScalar;

use crate::error::{Error, Result};
use crate::jet::Jet4;

/// Exact partial derivative of `e` with respect to `var`.
pub fn differentiate(e: &Expr, var: Var) -> Expr {
    e.differentiate(var)
}

/// Evaluates `e` at a jet point.
pub fn eval_scalar(e: &Expr, env: &Jet4) -> Result<f64> {
    e.eval(env)
}

/// Series bound to each variable for [`taylor_eval`].
///
/// All bound series share one base point and order.
#[derive(Debug, Clone)]
pub struct SeriesEnv {
    base_point: f64,
    order: usize,
    slots: [Option<TaylorScalar>; 5],
}

impl SeriesEnv {
    pub fn new(base_point: f64, order: usize) -> Self {
        Self {
            base_point,
            order,
            slots: Default::default(),
        }
    }

    /// Environment with `t` bound to the identity series and nothing else.
    pub fn identity(base_point: f64, order: usize) -> Self {
        let mut env = Self::new(base_point, order);
        env.slots[0] = Some(TaylorScalar::variable(base_point, order));
        env
    }

    pub fn base_point(&self) -> f64 {
        self.base_point
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bind(&mut self, var: Var, series: TaylorScalar) -> Result<()> {
        if series.base_point() != self.base_point || series.order() != self.order {
            return Err(Error::SeriesMismatch(format!(
                "binding `{}` at (base {}, order {}) into env (base {}, order {})",
                var.symbol(),
                series.base_point(),
                series.order(),
                self.base_point,
                self.order
            )));
        }
        self.slots[var as usize] = Some(series);
        Ok(())
    }

    pub fn with(mut self, var: Var, series: TaylorScalar) -> Result<Self> {
        self.bind(var, series)?;
        Ok(self)
    }

    pub fn get(&self, var: Var) -> Option<&TaylorScalar> {
        self.slots[var as usize].as_ref()
    }
}

/// Composes `e` with the bound series: coefficient `k` of the result is `(1/k!) d^k/dt^k (e ∘ env)`.
pub fn taylor_eval(e: &Expr, env: &SeriesEnv) -> Result<TaylorScalar> {
    let (b, n) = (env.base_point, env.order);
    Ok(match e {
        Expr::Num(x) => TaylorScalar::constant(b, n, *x),
        Expr::Var(v) => env
            .get(*v)
            .cloned()
            .ok_or(Error::UnboundVariable(v.symbol()))?,
        Expr::Neg(a) => taylor_eval(a, env)?.neg(),
        Expr::Bin(op, l, r) => {
            let x = taylor_eval(l, env)?;
            let y = taylor_eval(r, env)?;
            match op {
                BinOp::Add => x.try_add(&y)?,
                BinOp::Sub => x.try_sub(&y)?,
                BinOp::Mul => x.try_mul(&y)?,
                BinOp::Div => x.try_div(&y)?,
            }
        }
        Expr::Pow(a, k) => taylor_eval(a, env)?.powi(*k)?,
        Expr::Call(f, a) => {
            let x = taylor_eval(a, env)?;
            match f {
                Func::Sin => x.sin_cos().0,
                Func::Cos => x.sin_cos().1,
                Func::Tan => x.tan()?,
                Func::Exp => x.exp(),
                Func::Ln => x.ln()?,
            }
        }
    })
}

/// Taylor series of the formal solution of `u'''' = F` through a jet.
///
/// `u`, `p`, `q`, `r` are all exact through the requested order; `p`, `q`, `r` are the
/// termwise derivatives of the `u` series.
#[derive(Debug, Clone)]
pub struct FormalSolution {
    pub u: TaylorScalar,
    pub p: TaylorScalar,
    pub q: TaylorScalar,
    pub r: TaylorScalar,
}

impl FormalSolution {
    /// Environment binding `t` and the four series, ready for [`taylor_eval`].
    pub fn env(&self) -> SeriesEnv {
        let b = self.u.base_point();
        let n = self.u.order();
        let mut env = SeriesEnv::identity(b, n);
        env.slots[1] = Some(self.u.clone());
        env.slots[2] = Some(self.p.clone());
        env.slots[3] = Some(self.q.clone());
        env.slots[4] = Some(self.r.clone());
        env
    }
}

/// Builds the formal solution by the classical recurrence: seed `u` from the jet, evaluate
/// `F` on the current partial series to get the next coefficient of `u''''`, integrate termwise.
pub fn formal_solution(f: &Expr, init: &Jet4, order: usize) -> Result<FormalSolution> {
    if order < 4 {
        return Err(Error::InvalidInput(format!(
            "formal solution order {order} < 4"
        )));
    }
    // u is carried three orders further so that r = u''' is exact through `order`.
    let full = order + 3;
    let b = init.t;
    let mut u = vec![0.0; full + 1];
    u[0] = init.u;
    u[1] = init.p;
    u[2] = init.q / 2.0;
    u[3] = init.r / 6.0;

    // Coefficient k-4 of F(env) depends on u up to k-1, so each pass fixes one more coefficient.
    for k in 4..=full {
        let m = k - 4;
        let env = derived_env(&TaylorScalar::from_coeffs(b, u[..=m + 3].to_vec()), m)?;
        let fm = taylor_eval(f, &env)?.coeff(m);
        u[k] = fm / ((k * (k - 1) * (k - 2) * (k - 3)) as f64);
    }

    let useries = TaylorScalar::from_coeffs(b, u);
    let p = useries.deriv();
    let q = p.deriv();
    let r = q.deriv();
    Ok(FormalSolution {
        u: useries.with_order(order),
        p: p.with_order(order),
        q: q.with_order(order),
        r: r.with_order(order),
    })
}

/// Env of order `m` from a `u` series known through order `m + 3`.
fn derived_env(u: &TaylorScalar, m: usize) -> Result<SeriesEnv> {
    let p = u.deriv();
    let q = p.deriv();
    let r = q.deriv();
    let b = u.base_point();
    SeriesEnv::identity(b, m)
        .with(Var::U, u.with_order(m))?
        .with(Var::P, p.with_order(m))?
        .with(Var::Q, q.with_order(m))?
        .with(Var::R, r.with_order(m))
}
