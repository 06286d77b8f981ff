use std::fmt;

use crate::error::{Error, Result};
use crate::jet::Jet4;

/// `|cos x|` below this is treated as a pole of `tan`.
pub const TAN_POLE_EPS: f64 = 1e-12;

/// The five jet coordinates an expression may refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    T,
    U,
    P,
    Q,
    R,
}

impl Var {
    pub const ALL: [Var; 5] = [Var::T, Var::U, Var::P, Var::Q, Var::R];

    pub fn symbol(self) -> char {
        match self {
            Var::T => 't',
            Var::U => 'u',
            Var::P => 'p',
            Var::Q => 'q',
            Var::R => 'r',
        }
    }

    pub fn from_symbol(s: &str) -> Option<Var> {
        match s {
            "t" => Some(Var::T),
            "u" => Some(Var::U),
            "p" => Some(Var::P),
            "q" => Some(Var::Q),
            "r" => Some(Var::R),
            _ => None,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        match s {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "tan" => Some(Func::Tan),
            "exp" => Some(Func::Exp),
            "ln" => Some(Func::Ln),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Expression tree over the jet variables `t, u, p, q, r`.
///
/// Nodes are built through the folding constructors ([`Expr::add`], [`Expr::mul`], ...),
/// which collapse numeric subtrees and the usual identities (`x+0`, `x*1`, `x*0`, ...).
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Expr::Num(v) => Some(*v),
            _ => None,
        }
    }

    fn is_num(&self, x: f64) -> bool {
        self.as_num() == Some(x)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Num(v) => Expr::Num(-v),
            Expr::Neg(inner) => *inner,
            a => Expr::Neg(Box::new(a)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => Expr::Num(x + y),
            (Some(x), _) if x == 0.0 => b,
            (_, Some(y)) if y == 0.0 => a,
            _ => Expr::Bin(BinOp::Add, Box::new(a), Box::new(b)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => Expr::Num(x - y),
            (Some(x), _) if x == 0.0 => Expr::neg(b),
            (_, Some(y)) if y == 0.0 => a,
            _ => Expr::Bin(BinOp::Sub, Box::new(a), Box::new(b)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => Expr::Num(x * y),
            (Some(x), _) | (_, Some(x)) if x == 0.0 => Expr::Num(0.0),
            (Some(x), _) if x == 1.0 => b,
            (_, Some(y)) if y == 1.0 => a,
            (Some(x), _) if x == -1.0 => Expr::neg(b),
            (_, Some(y)) if y == -1.0 => Expr::neg(a),
            _ => Expr::Bin(BinOp::Mul, Box::new(a), Box::new(b)),
        }
    }

    /// Quotient; a literal zero denominator is rejected.
    pub fn try_div(a: Expr, b: Expr) -> Result<Expr> {
        match (a.as_num(), b.as_num()) {
            (_, Some(y)) if y == 0.0 => Err(Error::Domain("division by literal zero".into())),
            (Some(x), Some(y)) => Ok(Expr::Num(x / y)),
            (Some(x), _) if x == 0.0 => Ok(Expr::Num(0.0)),
            (_, Some(y)) if y == 1.0 => Ok(a),
            _ => Ok(Expr::Bin(BinOp::Div, Box::new(a), Box::new(b))),
        }
    }

    /// Quotient for denominators known not to be a literal zero.
    fn div(a: Expr, b: Expr) -> Expr {
        Expr::try_div(a, b).expect("denominator folded to literal zero")
    }

    pub fn pow(a: Expr, n: i32) -> Expr {
        match (a.as_num(), n) {
            (_, 0) => Expr::Num(1.0),
            (_, 1) => a,
            (Some(x), _) if x != 0.0 || n > 0 => Expr::Num(x.powi(n)),
            _ => Expr::Pow(Box::new(a), n),
        }
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        match a.as_num() {
            Some(x) => {
                let v = match f {
                    Func::Sin => Some(x.sin()),
                    Func::Cos => Some(x.cos()),
                    Func::Exp => Some(x.exp()),
                    Func::Tan if x.cos().abs() >= TAN_POLE_EPS => Some(x.tan()),
                    Func::Ln if x > 0.0 => Some(x.ln()),
                    _ => None,
                };
                v.map(Expr::Num).unwrap_or(Expr::Call(f, Box::new(a)))
            }
            None => Expr::Call(f, Box::new(a)),
        }
    }

    /// Whether the expression mentions `v`.
    pub fn depends_on(&self, v: Var) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(w) => *w == v,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.depends_on(v),
            Expr::Bin(_, a, b) => a.depends_on(v) || b.depends_on(v),
        }
    }

    /// Exact symbolic partial derivative with respect to `v`, constant-folded.
    pub fn differentiate(&self, v: Var) -> Expr {
        match self {
            Expr::Num(_) => Expr::Num(0.0),
            Expr::Var(w) => Expr::Num(if *w == v { 1.0 } else { 0.0 }),
            Expr::Neg(a) => Expr::neg(a.differentiate(v)),
            Expr::Bin(op, a, b) => {
                let da = a.differentiate(v);
                let db = b.differentiate(v);
                let (a, b) = (a.as_ref().clone(), b.as_ref().clone());
                match op {
                    BinOp::Add => Expr::add(da, db),
                    BinOp::Sub => Expr::sub(da, db),
                    BinOp::Mul => Expr::add(Expr::mul(da, b), Expr::mul(a, db)),
                    BinOp::Div => {
                        if db.is_num(0.0) {
                            Expr::div(da, b)
                        } else {
                            let num = Expr::sub(Expr::mul(da, b.clone()), Expr::mul(a, db));
                            Expr::div(num, Expr::pow(b, 2))
                        }
                    }
                }
            }
            Expr::Pow(a, n) => {
                let da = a.differentiate(v);
                let inner = Expr::mul(Expr::Num(*n as f64), Expr::pow(a.as_ref().clone(), n - 1));
                Expr::mul(inner, da)
            }
            Expr::Call(f, a) => {
                let da = a.differentiate(v);
                if da.is_num(0.0) {
                    return Expr::Num(0.0);
                }
                let a = a.as_ref().clone();
                let outer = match f {
                    Func::Sin => Expr::call(Func::Cos, a),
                    Func::Cos => Expr::neg(Expr::call(Func::Sin, a)),
                    Func::Tan => Expr::add(Expr::Num(1.0), Expr::pow(Expr::call(Func::Tan, a), 2)),
                    Func::Exp => Expr::call(Func::Exp, a),
                    Func::Ln => return Expr::div(da, a),
                };
                Expr::mul(outer, da)
            }
        }
    }

    /// Evaluates at a jet point.
    pub fn eval(&self, env: &Jet4) -> Result<f64> {
        let vals = env.to_array();
        let x = self.eval_slots(&vals)?;
        if !x.is_finite() {
            return Err(Error::Domain(format!("non-finite value {x} for `{self}`")));
        }
        Ok(x)
    }

    fn eval_slots(&self, vals: &[f64; 5]) -> Result<f64> {
        Ok(match self {
            Expr::Num(x) => *x,
            Expr::Var(v) => vals[v.index()],
            Expr::Neg(a) => -a.eval_slots(vals)?,
            Expr::Bin(op, a, b) => {
                let x = a.eval_slots(vals)?;
                let y = b.eval_slots(vals)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0.0 {
                            return Err(Error::Domain("division by zero".into()));
                        }
                        x / y
                    }
                }
            }
            Expr::Pow(a, n) => {
                let x = a.eval_slots(vals)?;
                if x == 0.0 && *n < 0 {
                    return Err(Error::Domain("division by zero in negative power".into()));
                }
                x.powi(*n)
            }
            Expr::Call(f, a) => {
                let x = a.eval_slots(vals)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Tan => {
                        if x.cos().abs() < TAN_POLE_EPS {
                            return Err(Error::Domain(format!("tan pole at {x}")));
                        }
                        x.tan()
                    }
                    Func::Ln => {
                        if x <= 0.0 {
                            return Err(Error::Domain(format!("ln of non-positive value {x}")));
                        }
                        x.ln()
                    }
                }
            }
        })
    }

    /// Binding strength used by the printer: 1 sums, 2 products, 3 powers, 4 atoms.
    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Pow(..) => 3,
            _ => 4,
        }
    }
}

fn write_num(f: &mut fmt::Formatter<'_>, x: f64) -> fmt::Result {
    if x.is_sign_negative() && x != 0.0 {
        write!(f, "-{}", -x)
    } else {
        write!(f, "{}", x.abs())
    }
}

fn write_prec(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if e.precedence() < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Writes `e` so that it parses as a grammar `base`.
fn write_base(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::Num(_) | Expr::Var(_) | Expr::Call(..) | Expr::Neg(_) => write!(f, "{e}"),
        _ => write!(f, "({e})"),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write_num(f, *x),
            Expr::Var(v) => write!(f, "{}", v.symbol()),
            Expr::Neg(a) => {
                write!(f, "-")?;
                write_base(f, a)
            }
            Expr::Bin(op, a, b) => {
                let (sym, lp, rp) = match op {
                    BinOp::Add => ("+", 1, 1),
                    BinOp::Sub => ("-", 1, 2),
                    BinOp::Mul => ("*", 2, 2),
                    BinOp::Div => ("/", 2, 3),
                };
                write_prec(f, a, lp)?;
                write!(f, " {sym} ")?;
                write_prec(f, b, rp)
            }
            Expr::Pow(a, n) => {
                write_base(f, a)?;
                write!(f, "^{n}")
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}
