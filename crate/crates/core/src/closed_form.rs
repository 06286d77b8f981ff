//! Exact solutions of the fourth-order Euler–Lagrange equation.
//!
//! Every solution has constant Schwarzian `σ` and is a Möbius image of
//! `g(t) = e^{at}` (σ<0, `a = √(-2σ)`), `g(t) = t` (σ=0) or `g(t) = tan(ωt)` (σ>0, `ω = √(σ/2)`).
//! These constants realize `S(g) = σ` exactly: `S(e^{at}) = -a²/2` and `S(tan ωt) = 2ω²`.

use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::jet::Jet4;
use crate::schwarzian;
use crate::symbolics::TaylorScalar;

/// Relative size of the Möbius denominator treated as a pole.
const POLE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyClass {
    /// σ < 0
    Hyperbolic,
    /// σ = 0
    Parabolic,
    /// σ > 0
    Elliptic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct MobiusParams {
    #[serde(rename = "A")]
    a: f64,
    #[serde(rename = "B")]
    b: f64,
    #[serde(rename = "C")]
    c: f64,
    #[serde(rename = "D")]
    d: f64,
    sigma: f64,
}

/// `u(t) = (A g(t) + B) / (C g(t) + D)` with `S(u) ≡ σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MobiusParams", into = "MobiusParams")]
pub struct MobiusFamily {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    sigma: f64,
}

impl TryFrom<MobiusParams> for MobiusFamily {
    type Error = Error;

    fn try_from(m: MobiusParams) -> Result<Self> {
        MobiusFamily::new(m.a, m.b, m.c, m.d, m.sigma)
    }
}

impl From<MobiusFamily> for MobiusParams {
    fn from(f: MobiusFamily) -> Self {
        MobiusParams {
            a: f.a,
            b: f.b,
            c: f.c,
            d: f.d,
            sigma: f.sigma,
        }
    }
}

impl MobiusFamily {
    pub fn new(a: f64, b: f64, c: f64, d: f64, sigma: f64) -> Result<Self> {
        if ![a, b, c, d, sigma].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidInput("non-finite family parameter".into()));
        }
        let det = a * d - b * c;
        if det == 0.0 || det.abs() <= 1e-14 * (a * d).abs().max((b * c).abs()) {
            return Err(Error::InvalidInput(format!(
                "degenerate Möbius map: AD-BC = {det}"
            )));
        }
        Ok(Self { a, b, c, d, sigma })
    }

    /// `g` itself: the identity Möbius map.
    pub fn canonical(sigma: f64) -> Self {
        Self {
            a: 1.0,
            b: 0.0,
            c: 0.0,
            d: 1.0,
            sigma,
        }
    }

    pub fn params(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn determinant(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn class(&self) -> FamilyClass {
        if self.sigma < 0.0 {
            FamilyClass::Hyperbolic
        } else if self.sigma > 0.0 {
            FamilyClass::Elliptic
        } else {
            FamilyClass::Parabolic
        }
    }

    /// Rate `a` for σ<0 or frequency `ω` for σ>0; zero for σ=0.
    pub fn rate(&self) -> f64 {
        match self.class() {
            FamilyClass::Hyperbolic => (-2.0 * self.sigma).sqrt(),
            FamilyClass::Elliptic => (self.sigma / 2.0).sqrt(),
            FamilyClass::Parabolic => 0.0,
        }
    }

    /// Numerator and denominator series about `t`.
    ///
    /// The elliptic case uses `(A sin + B cos)/(C sin + D cos)`, which equals the tan form and
    /// stays regular at the tan poles whenever `C ≠ 0`.
    fn fraction(&self, t: f64, order: usize) -> (TaylorScalar, TaylorScalar) {
        let tau = TaylorScalar::variable(t, order);
        let (x, y) = match self.class() {
            FamilyClass::Parabolic => (tau, TaylorScalar::constant(t, order, 1.0)),
            FamilyClass::Hyperbolic => (
                tau.scale(self.rate()).exp(),
                TaylorScalar::constant(t, order, 1.0),
            ),
            FamilyClass::Elliptic => tau.scale(self.rate()).sin_cos(),
        };
        let num = x
            .scale(self.a)
            .try_add(&y.scale(self.b))
            .expect("same base and order");
        let den = x
            .scale(self.c)
            .try_add(&y.scale(self.d))
            .expect("same base and order");
        (num, den)
    }

    fn denominator_scale(&self, t: f64) -> (f64, f64) {
        let (x, y) = self.basis_values(t);
        (
            self.c * x + self.d * y,
            (self.c.abs() + self.d.abs()) * x.abs().max(y.abs()),
        )
    }

    fn basis_values(&self, t: f64) -> (f64, f64) {
        match self.class() {
            FamilyClass::Parabolic => (t, 1.0),
            FamilyClass::Hyperbolic => ((self.rate() * t).exp(), 1.0),
            FamilyClass::Elliptic => {
                let w = self.rate() * t;
                (w.sin(), w.cos())
            }
        }
    }

    /// Taylor series of `u` about `t`.
    pub fn series(&self, t: f64, order: usize) -> Result<TaylorScalar> {
        let (num, den) = self.fraction(t, order);
        let (_, scale) = self.denominator_scale(t);
        if !(den.value().abs() > POLE_EPS * scale) {
            return Err(Error::SingularTime { t });
        }
        num.try_div(&den).map_err(|_| Error::SingularTime { t })
    }

    /// Denominator of the composite; its zeros are the singular times.
    pub fn denominator(&self, t: f64) -> f64 {
        self.denominator_scale(t).0
    }
}

impl Curve for MobiusFamily {
    fn derivs(&self, t: f64) -> Result<[f64; 5]> {
        let d = self.series(t, 4)?.derivatives();
        Ok([d[0], d[1], d[2], d[3], d[4]])
    }
}

/// 3-jet of the family at `t`, by exact differentiation of the closed form.
pub fn family_eval_jet(f: &MobiusFamily, t: f64) -> Result<Jet4> {
    f.jet(t)
}

/// Singular times of `f` in `[t0, t1]`, sorted ascending.
///
/// The denominator is monotone between consecutive zeros of the elliptic lattice, so a grid
/// finer than a quarter period brackets every zero; each bracket is refined by bisection.
pub fn family_singularities(f: &MobiusFamily, t0: f64, t1: f64) -> Vec<f64> {
    if !(t0 < t1) {
        return Vec::new();
    }
    let cells = match f.class() {
        FamilyClass::Elliptic => {
            let quarter = std::f64::consts::FRAC_PI_2 / f.rate() / 2.0;
            (((t1 - t0) / quarter).ceil() as usize).max(64)
        }
        _ => 64,
    };
    let h = (t1 - t0) / cells as f64;
    let den = |t: f64| f.denominator(t);
    let mut roots: Vec<f64> = Vec::new();
    let push = |r: f64, roots: &mut Vec<f64>| {
        if roots.last().is_none_or(|&l| (r - l).abs() > 1e-12) {
            roots.push(r);
        }
    };
    let mut a = t0;
    let mut fa = den(a);
    if fa == 0.0 {
        push(a, &mut roots);
    }
    for i in 1..=cells {
        let b = if i == cells { t1 } else { t0 + i as f64 * h };
        let fb = den(b);
        if fb == 0.0 {
            push(b, &mut roots);
        } else if fa != 0.0 && fa.signum() != fb.signum() {
            push(bisect(&den, a, b, fa), &mut roots);
        }
        a = b;
        fa = fb;
    }
    roots
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b || b - a < 1e-14 {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Maximum residuals of a family over a sample grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub samples: usize,
    /// `max |S(jet) - σ|`
    pub max_schwarzian_residual: f64,
    /// `max |u'''' - F(jet)|`
    pub max_el_residual: f64,
}

/// Checks `S(u) = σ` and `u'''' = F(p,q,r)` at `samples` evenly spaced times in `[t0, t1]`.
pub fn family_verify(f: &MobiusFamily, samples: usize, t0: f64, t1: f64) -> Result<VerifyReport> {
    if samples == 0 {
        return Err(Error::InvalidInput("at least one sample required".into()));
    }
    if let Some(&t) = family_singularities(f, t0, t1).first() {
        return Err(Error::SingularTime { t });
    }
    let mut rep = VerifyReport {
        samples,
        max_schwarzian_residual: 0.0,
        max_el_residual: 0.0,
    };
    for i in 0..samples {
        let t = if samples == 1 {
            t0
        } else {
            t0 + (t1 - t0) * i as f64 / (samples - 1) as f64
        };
        let d = f.derivs(t)?;
        let j = Jet4::from_derivs(t, &d);
        let s = schwarzian::schwarzian(&j).map_err(|_| Error::SingularTime { t })?;
        let el = schwarzian::el_rhs(&j).map_err(|_| Error::SingularTime { t })?;
        rep.max_schwarzian_residual = rep.max_schwarzian_residual.max((s - f.sigma).abs());
        rep.max_el_residual = rep.max_el_residual.max((d[4] - el).abs());
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schwarzian::schwarzian;

    #[test]
    fn identity_parabolic_jet() {
        let f = MobiusFamily::new(1.0, 0.0, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(
            family_eval_jet(&f, 3.0).unwrap(),
            Jet4::new(3.0, 3.0, 1.0, 0.0, 0.0)
        );
    }

    #[test]
    fn tan_jet() {
        let f = MobiusFamily::canonical(2.0);
        let j = family_eval_jet(&f, 0.0).unwrap();
        assert_eq!(j, Jet4::new(0.0, 0.0, 1.0, 0.0, 2.0));
        assert_eq!(schwarzian(&j).unwrap(), 2.0);
    }

    #[test]
    fn exp_jet() {
        let f = MobiusFamily::canonical(-2.0);
        let j = family_eval_jet(&f, 0.0).unwrap();
        let want = [0.0, 1.0, 2.0, 4.0, 8.0];
        for (x, y) in j.to_array().iter().zip(want) {
            assert!((x - y).abs() < 1e-14);
        }
        assert!((schwarzian(&j).unwrap() + 2.0).abs() < 1e-14);
    }

    /// Hand-differentiated tan(ωt) jets, independent of the series machinery.
    #[test]
    fn elliptic_jet_matches_hand_derivatives() {
        let f = MobiusFamily::canonical(0.72); // ω = 0.6
        let w: f64 = 0.6;
        for t in [-1.0, 0.2, 1.9] {
            let x = (w * t).tan();
            let s2 = 1.0 + x * x;
            let want = [
                x,
                w * s2,
                2.0 * w * w * x * s2,
                2.0 * w.powi(3) * s2 * (1.0 + 3.0 * x * x),
            ];
            let j = family_eval_jet(&f, t).unwrap();
            for (got, want) in [j.u, j.p, j.q, j.r].iter().zip(want) {
                assert!(
                    (got - want).abs() < 1e-13 * (1.0 + want.abs()),
                    "{got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn degenerate_and_singular() {
        assert!(MobiusFamily::new(1.0, 2.0, 2.0, 4.0, 0.0).is_err());
        let f = MobiusFamily::new(1.0, 0.0, 1.0, -1.0, 0.0).unwrap();
        assert!(matches!(
            family_eval_jet(&f, 1.0),
            Err(Error::SingularTime { .. })
        ));
        let tan = MobiusFamily::canonical(2.0);
        assert!(family_eval_jet(&tan, std::f64::consts::FRAC_PI_2).is_err());
    }

    #[test]
    fn singularities() {
        let f = MobiusFamily::new(1.0, 0.0, 1.0, -1.0, 0.0).unwrap();
        let s = family_singularities(&f, 0.0, 2.0);
        assert_eq!(s.len(), 1);
        assert!((s[0] - 1.0).abs() < 1e-12);

        let s = family_singularities(&MobiusFamily::canonical(2.0), 0.0, 3.0);
        assert_eq!(s.len(), 1);
        assert!((s[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-12);

        assert!(family_singularities(&MobiusFamily::canonical(-2.0), 0.0, 10.0).is_empty());

        // tan(t) has poles at π/2 + kπ.
        let s = family_singularities(&MobiusFamily::canonical(2.0), -5.0, 5.0);
        let want: Vec<f64> = (-2..=1)
            .map(|k| std::f64::consts::FRAC_PI_2 + k as f64 * std::f64::consts::PI)
            .collect();
        assert_eq!(s.len(), want.len());
        for (a, b) in s.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }

        // e^{t}/(e^{t} - 2) has its pole at ln 2.
        let f = MobiusFamily::new(1.0, 0.0, 1.0, -2.0, -0.5).unwrap();
        let s = family_singularities(&f, 0.0, 1.0);
        assert_eq!(s.len(), 1);
        assert!((s[0] - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn verify_examples() {
        let r = family_verify(
            &MobiusFamily::new(2.0, 1.0, 1.0, 3.0, 0.0).unwrap(),
            100,
            0.0,
            1.0,
        )
        .unwrap();
        assert!(
            r.max_schwarzian_residual < 1e-10 && r.max_el_residual < 1e-10,
            "{r:?}"
        );
        let r = family_verify(&MobiusFamily::canonical(2.0), 100, 0.0, 1.0).unwrap();
        assert!(
            r.max_schwarzian_residual < 1e-9 && r.max_el_residual < 1e-9,
            "{r:?}"
        );
        let r = family_verify(
            &MobiusFamily::new(2.0, 1.0, 1.0, 3.0, -0.5).unwrap(),
            100,
            0.0,
            1.0,
        )
        .unwrap();
        assert!(
            r.max_schwarzian_residual < 1e-9 && r.max_el_residual < 1e-9,
            "{r:?}"
        );
        assert!(family_verify(&MobiusFamily::canonical(2.0), 10, 1.0, 2.0).is_err());
    }

    #[test]
    fn json_shape() {
        let f = MobiusFamily::new(1.0, 0.0, 1.0, -1.0, 0.5).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"A":1.0,"B":0.0,"C":1.0,"D":-1.0,"sigma":0.5}"#);
        let back: MobiusFamily = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        assert!(
            serde_json::from_str::<MobiusFamily>(r#"{"A":1,"B":1,"C":1,"D":1,"sigma":0}"#).is_err()
        );
    }
}
