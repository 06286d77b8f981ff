//! Adaptive integration of `u'''' = -3q³/p² + 4qr/p` as a first-order system on `(u, p, q, r)`.
//!
//! Dormand–Prince 5(4) with PI step control. Every accepted step is recorded. Dense output
//! sums the formal Taylor solution about the nearest recorded sample, so `u` and its first
//! four derivatives are mutually consistent and satisfy the equation along each piece.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::jet::Jet4;
use crate::schwarzian::{mercator_c, schwarzian, EL_FIELD};
use crate::symbolics::{formal_solution, parse, TaylorScalar};

/// Integration stops once `|p|` falls below this.
pub const P_FLOOR: f64 = 1e-8;

pub const MIN_TOL: f64 = 1e-13;
pub const MAX_TOL: f64 = 1e-3;

const MAX_STEPS: usize = 1_000_000;

/// Order of the local series used for dense output.
const DENSE_ORDER: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Completed,
    StoppedNearSingularity,
}

/// Accepted steps of one integration, in integration order.
///
/// Sample times are strictly monotone in the direction of integration.
#[derive(Debug, Clone)]
pub struct Trajectory {
    samples: Vec<Jet4>,
    u4: Vec<f64>,
    // u, u', u'', u''', u'''' as series about each sample.
    local: Vec<[TaylorScalar; 5]>,
    s_values: Vec<f64>,
    c_values: Vec<f64>,
    tolerance: f64,
    status: Status,
}

impl Trajectory {
    pub fn samples(&self) -> &[Jet4] {
        &self.samples
    }

    pub fn s_values(&self) -> &[f64] {
        &self.s_values
    }

    pub fn c_values(&self) -> &[f64] {
        &self.c_values
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn first(&self) -> &Jet4 {
        &self.samples[0]
    }

    pub fn last(&self) -> &Jet4 {
        self.samples
            .last()
            .expect("trajectory has at least the initial sample")
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time interval covered, as `(min, max)`.
    pub fn span(&self) -> (f64, f64) {
        let a = self.first().t;
        let b = self.last().t;
        (a.min(b), a.max(b))
    }

    /// Index `k` of the step `[t_k, t_{k+1}]` containing `t`.
    fn locate(&self, t: f64) -> Option<usize> {
        let n = self.samples.len();
        if n < 2 {
            return None;
        }
        let (lo, hi) = self.span();
        if t < lo || t > hi {
            return None;
        }
        let forward = self.samples[1].t > self.samples[0].t;
        // First index whose time is past t in the integration direction.
        let idx = self
            .samples
            .partition_point(|s| if forward { s.t <= t } else { s.t >= t });
        Some(idx.clamp(1, n - 1) - 1)
    }

    /// Dense output `[u, u', u'', u''', u'''']` at `t`.
    ///
    /// Uses the local series of whichever end of the containing step is nearer; the pieces
    /// meet at step midpoints with a jump of the order of the integration error.
    pub fn dense(&self, t: f64) -> Result<[f64; 5]> {
        if self.samples.len() == 1 && t == self.samples[0].t {
            let j = self.samples[0];
            return Ok([j.u, j.p, j.q, j.r, self.u4[0]]);
        }
        let k = self.locate(t).ok_or(Error::InvalidInput(format!(
            "t={t} outside trajectory span {:?}",
            self.span()
        )))?;
        let near = if (t - self.samples[k].t).abs() <= (t - self.samples[k + 1].t).abs() {
            k
        } else {
            k + 1
        };
        Ok(std::array::from_fn(|i| self.local[near][i].eval_at(t)))
    }

    /// Writes `t,u,p,q,r,S,C`, one row per sample, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,u,p,q,r,S,C")?;
        for ((j, s), c) in self.samples.iter().zip(&self.s_values).zip(&self.c_values) {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                j.t, j.u, j.p, j.q, j.r, s, c
            )?;
        }
        Ok(())
    }
}

impl Curve for Trajectory {
    fn derivs(&self, t: f64) -> Result<[f64; 5]> {
        self.dense(t)
    }

    /// Step midpoints, where dense output switches from one local series to the next.
    fn breakpoints(&self) -> Vec<f64> {
        let mut ts: Vec<f64> = self
            .samples
            .windows(2)
            .map(|w| 0.5 * (w[0].t + w[1].t))
            .collect();
        ts.sort_by(f64::total_cmp);
        ts
    }
}

type State = [f64; 4];

fn field(y: &State) -> State {
    let (p, q, r) = (y[1], y[2], y[3]);
    [p, q, r, -3.0 * q * q * q / (p * p) + 4.0 * q * r / p]
}

fn axpy(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..4 {
            out[i] += h * c * k[i];
        }
    }
    out
}

// Dormand–Prince 5(4) tableau. The field is autonomous, so the stage nodes c_i are not needed.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Step-size controller (PI).
const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

struct StepResult {
    y: State,
    k7: State,
    err: f64,
}

fn dopri_step(y: &State, k1: &State, h: f64, tol: f64) -> StepResult {
    let k2 = field(&axpy(y, h, &[(A21, k1)]));
    let k3 = field(&axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = field(&axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = field(&axpy(
        y,
        h,
        &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)],
    ));
    let k6 = field(&axpy(
        y,
        h,
        &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
    ));
    let ynew = axpy(
        y,
        h,
        &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
    );
    let k7 = field(&ynew);
    let mut sum = 0.0;
    for i in 0..4 {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = tol + tol * y[i].abs().max(ynew[i].abs());
        sum += (e / sc).powi(2);
    }
    let err = (sum / 4.0).sqrt();
    StepResult {
        y: ynew,
        k7,
        err: if err.is_finite() { err } else { f64::INFINITY },
    }
}

fn norm(y: &State, sc: &State) -> f64 {
    (y.iter().zip(sc).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / 4.0).sqrt()
}

/// Starting step size (Hairer–Wanner heuristic).
fn initial_step(y: &State, f0: &State, tol: f64, dir: f64, span: f64) -> f64 {
    let sc: State = std::array::from_fn(|i| tol + tol * y[i].abs());
    let d0 = norm(y, &sc);
    let d1 = norm(f0, &sc);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(span);
    let f1 = field(&axpy(y, dir * h0, &[(1.0, f0)]));
    let diff: State = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = norm(&diff, &sc) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}

fn sample(t: f64, y: &State) -> Result<(Jet4, f64, f64)> {
    let j = Jet4::new(t, y[0], y[1], y[2], y[3]);
    Ok((j, schwarzian(&j)?, mercator_c(&j)?))
}

fn local_series(f: &crate::symbolics::Expr, j: &Jet4) -> Result<[TaylorScalar; 5]> {
    let s = formal_solution(f, j, DENSE_ORDER)?;
    let u4 = s.r.deriv();
    Ok([s.u, s.p, s.q, s.r, u4])
}

impl Trajectory {
    fn push(&mut self, f: &crate::symbolics::Expr, t: f64, y: &State, u4: f64) -> Result<()> {
        let (j, s, c) = sample(t, y)?;
        self.local.push(local_series(f, &j)?);
        self.samples.push(j);
        self.u4.push(u4);
        self.s_values.push(s);
        self.c_values.push(c);
        Ok(())
    }
}

/// Integrates the Euler–Lagrange equation from `init` to `t_end`.
pub fn integrate(init: &Jet4, t_end: f64, tol: f64) -> Result<Trajectory> {
    if !(MIN_TOL..=MAX_TOL).contains(&tol) {
        return Err(Error::InvalidTolerance(tol));
    }
    if !init.is_finite() || !t_end.is_finite() {
        return Err(Error::InvalidInput("non-finite initial data".into()));
    }
    if !(init.p.abs() >= P_FLOOR) {
        return Err(Error::SingularJet { p: init.p });
    }

    let mut y: State = [init.u, init.p, init.q, init.r];
    let mut t = init.t;
    let mut k1 = field(&y);
    let f = parse(EL_FIELD)?;
    let mut traj = Trajectory {
        samples: Vec::new(),
        u4: Vec::new(),
        local: Vec::new(),
        s_values: Vec::new(),
        c_values: Vec::new(),
        tolerance: tol,
        status: Status::Completed,
    };
    traj.push(&f, t, &y, k1[3])?;
    if t_end == t {
        return Ok(traj);
    }

    let dir = (t_end - t).signum();
    let span = (t_end - t).abs();
    let mut h = initial_step(&y, &k1, tol, dir, span);
    let mut err_old: f64 = 1e-4;
    let mut rejected_last = false;

    for _ in 0..MAX_STEPS {
        let remaining = (t_end - t).abs();
        if remaining <= 0.0 {
            return Ok(traj);
        }
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        if h < 1e-12 * t.abs().max(1.0) {
            traj.status = Status::StoppedNearSingularity;
            return Ok(traj);
        }

        let step = dopri_step(&y, &k1, dir * h, tol);
        let fac_raw = step.err.powf(ALPHA);
        if step.err <= 1.0 {
            let t_new = if last { t_end } else { t + dir * h };
            if !(step.y[1].abs() >= P_FLOOR) || step.y.iter().any(|x| !x.is_finite()) {
                traj.status = Status::StoppedNearSingularity;
                return Ok(traj);
            }
            traj.push(&f, t_new, &step.y, step.k7[3])?;
            y = step.y;
            k1 = step.k7;
            t = t_new;
            if last {
                return Ok(traj);
            }
            let mut fac = fac_raw / err_old.powf(BETA) / SAFETY;
            fac = fac.clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            if rejected_last {
                fac = fac.max(1.0);
            }
            h /= fac;
            err_old = step.err.max(1e-4);
            rejected_last = false;
        } else {
            let fac = if step.err.is_finite() {
                (fac_raw / SAFETY).min(1.0 / FAC_MIN)
            } else {
                10.0
            };
            h /= fac;
            rejected_last = true;
        }
    }
    traj.status = Status::StoppedNearSingularity;
    Ok(traj)
}

/// Maximum absolute deviation of `S` and `C` from their initial values.
pub fn invariant_drift(traj: &Trajectory) -> (f64, f64) {
    let drift = |v: &[f64]| v.iter().map(|x| (x - v[0]).abs()).fold(0.0, f64::max);
    (drift(&traj.s_values), drift(&traj.c_values))
}
