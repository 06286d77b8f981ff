//! Bump functions, the integrating-factor solve of `D_u(v) = φ`, admissible variations and the
//! critical-point test for `I_S`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet4, VarJet};
use crate::quadrature;
use crate::schwarzian::{boundary_b, d_u, d_u2, schwarzian};
use crate::symbolics::TaylorScalar;

use super::{delta_form_total, CurveFn, Form, Variation};

/// `|δI_S|` above this marks a variation as a witness of non-criticality.
pub const WITNESS_THRESHOLD: f64 = 1e-4;

const SOLVE_PANELS: usize = 16;

/// `amplitude · exp(1 - 1/(1 - x²))`, `x = (t - center)/radius`, zero for `|x| ≥ 1`.
///
/// The peak value at `t = center` equals `amplitude`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpFn {
    pub center: f64,
    pub radius: f64,
    pub amplitude: f64,
}

impl BumpFn {
    pub fn new(center: f64, radius: f64, amplitude: f64) -> Result<Self> {
        if !(radius > 0.0) || !center.is_finite() || !amplitude.is_finite() {
            return Err(Error::InvalidInput(format!(
                "bad bump ({center}, {radius}, {amplitude})"
            )));
        }
        Ok(Self {
            center,
            radius,
            amplitude,
        })
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.radius, self.center + self.radius)
    }

    /// `[φ, φ', φ'', φ''', φ'''']` at `t`.
    pub fn eval(&self, t: f64) -> [f64; 5] {
        let x = (t - self.center) / self.radius;
        let g0 = 1.0 - x * x;
        // Beyond this the value and all four derivatives are below 1e-290.
        if !(g0 > 1.0 / 700.0) {
            return [0.0; 5];
        }
        let xs = TaylorScalar::from_coeffs(t, vec![x, 1.0 / self.radius, 0.0, 0.0, 0.0]);
        let g = TaylorScalar::constant(t, 4, 1.0)
            .try_sub(&xs.try_mul(&xs).unwrap())
            .unwrap();
        let e = g
            .recip()
            .unwrap()
            .neg()
            .add_scalar(1.0)
            .exp()
            .scale(self.amplitude);
        let d = e.derivatives();
        [d[0], d[1], d[2], d[3], d[4]]
    }
}

impl Variation for BumpFn {
    fn derivs(&self, t: f64) -> Result<[f64; 4]> {
        let d = self.eval(t);
        Ok([d[0], d[1], d[2], d[3]])
    }
}

/// `v = u' (v0/u'(t0) + ∫_{t0}^t φ/u')`, the solution of `D_u(v) = φ` with `v(t0) = v0`.
#[derive(Clone)]
pub struct DuSolution<'a> {
    u: CurveFn<'a>,
    phi: BumpFn,
    c0: f64,
    nodes: Vec<f64>,
    cumulative: Vec<f64>,
}

impl DuSolution<'_> {
    fn psi(&self, t: f64) -> Result<f64> {
        Ok(self.phi.eval(t)[0] / self.u.jet(t)?.p)
    }

    /// `Φ(t) = v0/u'(t0) + ∫_{t0}^t φ/u'`.
    fn big_phi(&self, t: f64) -> Result<f64> {
        let (lo, hi) = (self.nodes[0], *self.nodes.last().unwrap());
        if t <= lo {
            return Ok(self.c0);
        }
        if t >= hi {
            return Ok(self.c0 + self.cumulative.last().unwrap());
        }
        let k = self.nodes.partition_point(|&x| x <= t) - 1;
        let rest = quadrature::integrate(|s| self.psi(s), self.nodes[k], t, &[], 1e-15)?;
        Ok(self.c0 + self.cumulative[k] + rest)
    }

    pub fn phi(&self) -> &BumpFn {
        &self.phi
    }
}

impl Variation for DuSolution<'_> {
    fn derivs(&self, t: f64) -> Result<[f64; 4]> {
        let [_, p, q, r, u4] = self.u.derivs(t)?;
        let ph = self.phi.eval(t);
        let big = self.big_phi(t)?;
        let psi = ph[0] / p;
        let psi1 = (ph[1] * p - ph[0] * q) / (p * p);
        Ok([
            p * big,
            q * big + ph[0],
            r * big + q * psi + ph[1],
            u4 * big + 2.0 * r * psi + q * psi1 + ph[2],
        ])
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.u.breakpoints();
        b.push(self.nodes[0]);
        b.push(*self.nodes.last().unwrap());
        b
    }
}

/// Solves `D_u(v) = φ` with `v(t0) = v0` on the interval of `u`.
pub fn solve_du<'a>(u: &CurveFn<'a>, phi: &BumpFn, v0: f64) -> Result<DuSolution<'a>> {
    let (t0, t1) = u.interval();
    let (a, b) = phi.support();
    if phi.amplitude != 0.0 && !(a > t0 && b < t1) {
        return Err(Error::InvalidInput(format!(
            "bump support [{a}, {b}] not inside ({t0}, {t1})"
        )));
    }
    let p0 = u.jet(t0)?.p;
    let (lo, hi) = (a.max(t0), b.min(t1));
    let nodes: Vec<f64> = (0..=SOLVE_PANELS)
        .map(|i| {
            if i == SOLVE_PANELS {
                hi
            } else {
                lo + (hi - lo) * i as f64 / SOLVE_PANELS as f64
            }
        })
        .collect();
    let mut sol = DuSolution {
        u: *u,
        phi: *phi,
        c0: v0 / p0,
        nodes,
        cumulative: vec![0.0],
    };
    let mut acc = 0.0;
    for w in sol.nodes.windows(2) {
        acc += quadrature::integrate(|s| sol.psi(s), w[0], w[1], &[], 1e-15)?;
        sol.cumulative.push(acc);
    }
    Ok(sol)
}

/// `max |D_u(v) - φ|` on `points` interior grid times, with `v'` taken by a
/// Richardson-extrapolated central difference of `v` alone.
pub fn du_residual(u: &CurveFn, v: &dyn Variation, phi: &BumpFn, points: usize) -> Result<f64> {
    // Narrow bumps have large fifth derivatives; keep the h⁴ truncation term below 1e-11.
    const H: f64 = 2e-5;
    let (t0, t1) = u.interval();
    let (a, b) = (t0 + 2.0 * H, t1 - 2.0 * H);
    let val = |t: f64| -> Result<f64> { Ok(v.derivs(t)?[0]) };
    let mut worst: f64 = 0.0;
    for i in 0..points {
        let t = if points == 1 {
            0.5 * (a + b)
        } else {
            a + (b - a) * i as f64 / (points - 1) as f64
        };
        let d1 = (val(t + H)? - val(t - H)?) / (2.0 * H);
        let d2 = (val(t + 0.5 * H)? - val(t - 0.5 * H)?) / H;
        let dv = (4.0 * d2 - d1) / 3.0;
        let j = u.jet(t)?;
        let res = dv - j.q / j.p * val(t)? - phi.eval(t)[0];
        worst = worst.max(res.abs());
    }
    Ok(worst)
}

/// `ṽ = v + c0 (t - t0 - ε)²₊ + c1 (t - t1 + ε)²₊` with `v` from [`solve_du`] (`v(t0) = 0`).
///
/// Each parabola lives on an `ε`-neighbourhood of one endpoint and joins zero with matching
/// value and slope. The constants make `D_u²(ṽ) + S(u)ṽ` vanish at both endpoints, so the
/// endpoint condition holds with or without the `1/u'` weight of the boundary term.
#[derive(Clone)]
pub struct AdmissibleVariation<'a> {
    pub v: DuSolution<'a>,
    pub eps: f64,
    pub c0: f64,
    pub c1: f64,
    t0: f64,
    t1: f64,
    /// Smallest `K` with `max(|v̂|, |D_u(v̂)|) ≤ K ε` on a sample grid.
    pub k_bound: f64,
    /// `(D_u²ṽ + S ṽ)|_{t0}^{t1}`, by direct evaluation.
    pub endpoint_residual: f64,
    /// `B(ṽ)|_{t0}^{t1}` with `B = (D_u²ṽ + S ṽ)/u'`.
    pub boundary_residual: f64,
}

impl AdmissibleVariation<'_> {
    fn glue(&self, t: f64) -> [f64; 4] {
        let mut out = [0.0; 4];
        let a = self.t0 + self.eps;
        if t < a {
            let x = t - a;
            out = [self.c0 * x * x, 2.0 * self.c0 * x, 2.0 * self.c0, 0.0];
        }
        let b = self.t1 - self.eps;
        if t > b {
            let x = t - b;
            for (o, g) in out.iter_mut().zip([x * x, 2.0 * x, 2.0, 0.0]) {
                *o += self.c1 * g;
            }
        }
        out
    }

    /// The correction `v̂` alone.
    pub fn correction(&self, t: f64) -> VarJet {
        let g = self.glue(t);
        VarJet::new(g[0], g[1], g[2])
    }
}

impl Variation for AdmissibleVariation<'_> {
    fn derivs(&self, t: f64) -> Result<[f64; 4]> {
        let mut d = self.v.derivs(t)?;
        for (x, g) in d.iter_mut().zip(self.glue(t)) {
            *x += g;
        }
        Ok(d)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.v.breakpoints();
        b.push(self.t0 + self.eps);
        b.push(self.t1 - self.eps);
        b
    }
}

/// `D_u²(w) + S(u) w`.
fn endpoint_value(j: &Jet4, w: &VarJet) -> Result<f64> {
    Ok(d_u2(j, w)? + schwarzian(j)? * w.v)
}

/// Builds an admissible variation from a bump supported in `(t0 + ε, t1 - ε)`.
pub fn admissible_variation<'a>(
    u: &CurveFn<'a>,
    phi: &BumpFn,
    eps: f64,
) -> Result<AdmissibleVariation<'a>> {
    let (t0, t1) = u.interval();
    if !(eps > 0.0 && 2.0 * eps < t1 - t0) {
        return Err(Error::InvalidInput(format!(
            "glue width {eps} does not fit in [{t0}, {t1}]"
        )));
    }
    let (a, b) = phi.support();
    if !(a > t0 + eps && b < t1 - eps) {
        return Err(Error::InvalidInput(format!(
            "bump support [{a}, {b}] must lie inside ({}, {})",
            t0 + eps,
            t1 - eps
        )));
    }
    let v = solve_du(u, phi, 0.0)?;
    let (j0, j1) = (u.jet(t0)?, u.jet(t1)?);

    let solve_c = |j: &Jet4, unit: VarJet, t: f64| -> Result<f64> {
        let beta = endpoint_value(j, &unit)?;
        let rhs = endpoint_value(j, &v.varjet(t)?)?;
        if !(beta.abs() > 1e-12 * (1.0 + rhs.abs())) {
            return Err(Error::Infeasible(format!(
                "endpoint condition insensitive to the glue constant at t={t} (coefficient {beta:e})"
            )));
        }
        Ok(-rhs / beta)
    };
    let c0 = solve_c(&j0, VarJet::new(eps * eps, -2.0 * eps, 2.0), t0)?;
    let c1 = solve_c(&j1, VarJet::new(eps * eps, 2.0 * eps, 2.0), t1)?;

    let mut av = AdmissibleVariation {
        v,
        eps,
        c0,
        c1,
        t0,
        t1,
        k_bound: 0.0,
        endpoint_residual: 0.0,
        boundary_residual: 0.0,
    };

    let mut k: f64 = 0.0;
    const GRID: usize = 50;
    for (lo, hi) in [(t0, t0 + eps), (t1 - eps, t1)] {
        for i in 0..=GRID {
            let t = lo + (hi - lo) * i as f64 / GRID as f64;
            let w = av.correction(t);
            k = k.max(w.v.abs()).max(d_u(&u.jet(t)?, &w)?.abs());
        }
    }
    av.k_bound = k / eps;

    let (w0, w1) = (av.varjet(t0)?, av.varjet(t1)?);
    av.endpoint_residual = endpoint_value(&j1, &w1)? - endpoint_value(&j0, &w0)?;
    av.boundary_residual = boundary_b(&j1, &w1)? - boundary_b(&j0, &w0)?;
    Ok(av)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub center: f64,
    pub radius: f64,
    pub amplitude: f64,
    pub delta: f64,
}

/// Diagnostics for one admissible variation drawn by [`critical_test`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationCheck {
    pub bump: BumpFn,
    pub delta: f64,
    pub endpoint_residual: f64,
    pub boundary_residual: f64,
    pub du_residual: f64,
    pub k_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalReport {
    pub u: String,
    pub interval: [f64; 2],
    pub n: usize,
    pub max_delta: f64,
    pub witness: Option<Witness>,
    #[serde(skip)]
    pub checks: Vec<VariationCheck>,
}

/// Draws `n` random bumps, builds admissible variations and evaluates `δI_S` by the
/// `∫ S D_u(v)/u' + B|` form. A witness is reported when the largest `|δI_S|` exceeds
/// [`WITNESS_THRESHOLD`].
pub fn critical_test(u: &CurveFn, n: usize, seed: u64, label: &str) -> Result<CriticalReport> {
    let (t0, t1) = u.interval();
    let len = t1 - t0;
    let eps = 0.02 * len;
    let gap = 0.01 * len;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CriticalReport {
        u: label.to_string(),
        interval: [t0, t1],
        n,
        max_delta: 0.0,
        witness: None,
        checks: Vec::with_capacity(n),
    };
    let mut best: Option<Witness> = None;
    for _ in 0..n {
        let radius = rng.random_range(0.05 * len..0.2 * len);
        let lo = t0 + eps + gap + radius;
        let hi = t1 - eps - gap - radius;
        let center = rng.random_range(lo..hi);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let amplitude = sign * rng.random_range(0.5..2.0);
        let bump = BumpFn::new(center, radius, amplitude)?;
        let av = admissible_variation(u, &bump, eps)?;
        let delta = delta_form_total(Form::Schwarzian, u, &av)?;
        report.checks.push(VariationCheck {
            bump,
            delta,
            endpoint_residual: av.endpoint_residual,
            boundary_residual: av.boundary_residual,
            du_residual: du_residual(u, &av.v, &bump, 41)?,
            k_bound: av.k_bound,
        });
        if best.is_none_or(|w| delta.abs() > w.delta.abs()) {
            best = Some(Witness {
                center,
                radius,
                amplitude,
                delta,
            });
        }
    }
    if let Some(w) = best {
        report.max_delta = w.delta.abs();
        if report.max_delta > WITNESS_THRESHOLD {
            report.witness = Some(w);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::MobiusFamily;
    use crate::curve::ExprCurve;
    use crate::variation::{delta_fd_richardson, Functional};

    #[test]
    fn bump_shape() {
        let b = BumpFn::new(0.5, 0.2, 3.0).unwrap();
        assert_eq!(b.eval(0.5)[0], 3.0);
        assert_eq!(b.eval(0.5)[1], 0.0);
        assert_eq!(b.eval(0.71), [0.0; 5]);
        assert_eq!(b.eval(0.3), [0.0; 5]);
        // φ'(t) against a central difference.
        let t = 0.58;
        let fd = (b.eval(t + 1e-6)[0] - b.eval(t - 1e-6)[0]) / 2e-6;
        assert!((fd - b.eval(t)[1]).abs() < 1e-6);
        assert!(BumpFn::new(0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn solve_du_on_the_line_is_the_antiderivative() {
        let line = ExprCurve::parse("t").unwrap();
        let u = CurveFn::new(&line, 0.0, 1.0).unwrap();
        let b = BumpFn::new(0.5, 0.2, 1.0).unwrap();
        let v = solve_du(&u, &b, 0.0).unwrap();
        let want = quadrature::integrate(|s| Ok(b.eval(s)[0]), 0.0, 0.62, &[0.3], 1e-14).unwrap();
        assert!((v.derivs(0.62).unwrap()[0] - want).abs() < 1e-13);
        assert_eq!(v.derivs(0.1).unwrap(), [0.0; 4]);
    }

    #[test]
    fn solve_du_kernel_and_zero() {
        let tan = MobiusFamily::canonical(2.0);
        let u = CurveFn::new(&tan, 0.1, 1.0).unwrap();
        let zero = BumpFn::new(0.5, 0.1, 0.0).unwrap();
        let v = solve_du(&u, &zero, 0.0).unwrap();
        assert_eq!(v.derivs(0.7).unwrap(), [0.0; 4]);
        let p0 = u.jet(0.1).unwrap().p;
        let v = solve_du(&u, &zero, p0).unwrap();
        for t in [0.1, 0.4, 0.9] {
            let d = v.derivs(t).unwrap();
            let j = u.derivs(t).unwrap();
            for k in 0..4 {
                assert!((d[k] - j[k + 1]).abs() < 1e-12 * j[k + 1].abs().max(1.0));
            }
        }
    }

    #[test]
    fn solve_du_residual_is_tiny() {
        let tan = MobiusFamily::canonical(2.0);
        let u = CurveFn::new(&tan, 0.1, 1.0).unwrap();
        let b = BumpFn::new(0.55, 0.2, 1.5).unwrap();
        let v = solve_du(&u, &b, 0.3).unwrap();
        assert!(du_residual(&u, &v, &b, 60).unwrap() < 1e-9);
    }

    #[test]
    fn admissible_variation_meets_endpoint_condition() {
        let tan = MobiusFamily::canonical(2.0);
        let u = CurveFn::new(&tan, 0.1, 1.0).unwrap();
        let b = BumpFn::new(0.55, 0.2, 1.0).unwrap();
        let av = admissible_variation(&u, &b, 0.02).unwrap();
        assert!(
            av.endpoint_residual.abs() < 1e-10,
            "{}",
            av.endpoint_residual
        );
        assert!(av.boundary_residual.abs() < 1e-10);
        assert!(av.k_bound.is_finite());
        // v vanishes to all orders near t0, so only the far end needs a correction.
        assert_eq!(av.c0, 0.0);
        // With the endpoint condition met, δI_S reduces to ∫ S D_u(ṽ)/u'.
        // The glue is only C¹: v'' jumps by 2c1 at t1 - ε, and the r/u' part of S picks up
        // that jump over u' on top of the pointwise integral.
        let fd = delta_fd_richardson(Functional::S, &u, &av, 1e-3).unwrap();
        let join = 2.0 * av.c1 / u.jet(1.0 - 0.02).unwrap().p;
        let form = delta_form_total(Form::Schwarzian, &u, &av).unwrap();
        assert!((fd + join - form).abs() < 1e-8, "{fd} {join} {form}");
        assert!(admissible_variation(&u, &BumpFn::new(0.15, 0.1, 1.0).unwrap(), 0.02).is_err());
    }

    #[test]
    fn critical_test_both_directions() {
        let m = MobiusFamily::new(1.0, 2.0, 1.0, 3.0, 0.0).unwrap();
        let u = CurveFn::new(&m, 0.0, 1.0).unwrap();
        let rep = critical_test(&u, 5, 7, "mobius").unwrap();
        assert!(rep.max_delta <= 1e-8 && rep.witness.is_none(), "{rep:?}");

        let tan = MobiusFamily::canonical(2.0);
        let u = CurveFn::new(&tan, 0.1, 1.0).unwrap();
        let rep = critical_test(&u, 5, 7, "tan(t)").unwrap();
        assert!(rep.witness.unwrap().delta.abs() > 1e-3);
        let again = critical_test(&u, 5, 7, "tan(t)").unwrap();
        assert_eq!(rep, again);
        let json = serde_json::to_string(&rep).unwrap();
        assert!(
            json.starts_with(r#"{"u":"tan(t)","interval":[0.1,1.0],"n":5,"max_delta":"#),
            "{json}"
        );
        assert!(json.contains(r#""witness":{"center":"#));
    }
}
