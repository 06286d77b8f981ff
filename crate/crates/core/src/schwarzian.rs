//! Schwarzian derivative, the first integral `C`, the Lagrangian `(u''/u')²`, the right-hand
//! side of the fourth-order Euler–Lagrange equation, the operator `D_u` and boundary terms.

pub use crate::jet::{Jet4, VarJet, SINGULAR_P};

use crate::error::Result;

/// Euler–Lagrange right-hand side as an expression over the jet coordinates.
pub const EL_FIELD: &str = "-3*q^3/p^2 + 4*q*r/p";

/// `S(u) = r/p - (3/2)(q/p)²`.
pub fn schwarzian(j: &Jet4) -> Result<f64> {
    j.check_regular()?;
    let a = j.q / j.p;
    Ok(j.r / j.p - 1.5 * a * a)
}

/// `C(u) = (1/p)(r/p - q²/p²)`.
pub fn mercator_c(j: &Jet4) -> Result<f64> {
    j.check_regular()?;
    let a = j.q / j.p;
    Ok((j.r / j.p - a * a) / j.p)
}

/// `L = (q/p)²`.
pub fn lagrangian(j: &Jet4) -> Result<f64> {
    j.check_regular()?;
    let a = j.q / j.p;
    Ok(a * a)
}

/// `u''''` forced by the Euler–Lagrange equation: `F = -3q³/p² + 4qr/p`.
pub fn el_rhs(j: &Jet4) -> Result<f64> {
    j.check_regular()?;
    let (p, q, r) = (j.p, j.q, j.r);
    Ok(-3.0 * q * q * q / (p * p) + 4.0 * q * r / p)
}

/// `D_u(v) = v' - (u''/u') v`.
pub fn d_u(j: &Jet4, w: &VarJet) -> Result<f64> {
    j.check_regular()?;
    Ok(w.v1 - j.q / j.p * w.v)
}

/// `D_u²(v) = v'' - 2(q/p)v' + (2q²/p² - r/p)v`.
pub fn d_u2(j: &Jet4, w: &VarJet) -> Result<f64> {
    j.check_regular()?;
    let a = j.q / j.p;
    Ok(w.v2 - 2.0 * a * w.v1 + (2.0 * a * a - j.r / j.p) * w.v)
}

/// Boundary term of `δI_S`: `B = (1/p)(D_u²(v) + S(u) v)`.
pub fn boundary_b(j: &Jet4, w: &VarJet) -> Result<f64> {
    Ok((d_u2(j, w)? + schwarzian(j)? * w.v) / j.p)
}

/// Expanded form `B = v''/p - 2qv'/p² + q²v/(2p³)`.
pub fn boundary_b_expanded(j: &Jet4, w: &VarJet) -> Result<f64> {
    j.check_regular()?;
    let (p, q) = (j.p, j.q);
    Ok(w.v2 / p - 2.0 * q * w.v1 / (p * p) + q * q * w.v / (2.0 * p * p * p))
}

/// Boundary terms `(B0, B1, B2)` of the three integrated-by-parts forms of `δI_L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryTerms {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
}

pub fn boundary_terms(j: &Jet4, w: &VarJet) -> Result<BoundaryTerms> {
    j.check_regular()?;
    let (p, q, r) = (j.p, j.q, j.r);
    let p2 = p * p;
    let p3 = p2 * p;
    let lead = 2.0 * q * w.v1 / p2;
    Ok(BoundaryTerms {
        b0: lead,
        b1: lead - q * q * w.v / p3,
        b2: lead - 2.0 * r * w.v / p2 + 2.0 * q * q * w.v / p3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    fn near(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    /// Jet of the Möbius map (a t + b)/(c t + d), differentiated by hand.
    fn mobius_jet(a: f64, b: f64, c: f64, d: f64, t: f64) -> Jet4 {
        let den = c * t + d;
        let det = a * d - b * c;
        Jet4::new(
            t,
            (a * t + b) / den,
            det / den.powi(2),
            -2.0 * c * det / den.powi(3),
            6.0 * c * c * det / den.powi(4),
        )
    }

    #[test]
    fn schwarzian_examples() {
        assert_eq!(
            schwarzian(&Jet4::new(0.0, 0.0, 1.0, 0.0, 2.0)).unwrap(),
            2.0
        );
        assert!(
            schwarzian(&mobius_jet(2.0, 1.0, 1.0, 3.0, 1.0))
                .unwrap()
                .abs()
                < 1e-15
        );
        assert_eq!(
            schwarzian(&Jet4::new(0.0, 1.0, 2.0, 4.0, 8.0)).unwrap(),
            -2.0
        );
        assert!(matches!(
            schwarzian(&Jet4::new(0.0, 0.0, 1e-13, 1.0, 1.0)),
            Err(Error::SingularJet { .. })
        ));
    }

    #[test]
    fn mercator_examples() {
        assert_eq!(
            mercator_c(&Jet4::new(0.0, 0.0, 1.0, 0.0, 0.0)).unwrap(),
            0.0
        );
        assert_eq!(
            mercator_c(&Jet4::new(0.0, 0.0, 1.0, 0.0, 2.0)).unwrap(),
            2.0
        );
        assert_eq!(
            mercator_c(&Jet4::new(0.0, 1.0, 1.0, 1.0, 1.0)).unwrap(),
            0.0
        );
    }

    #[test]
    fn lagrangian_examples() {
        assert_eq!(
            lagrangian(&Jet4::new(0.0, 0.0, 2.0, 4.0, 0.0)).unwrap(),
            4.0
        );
        assert_eq!(
            lagrangian(&mobius_jet(3.0, 1.0, 0.0, 1.0, 0.7)).unwrap(),
            0.0
        );
        for t in [-1.0f64, 0.0, 0.4] {
            let e = (2.0 * t).exp();
            let j = Jet4::new(t, e, 2.0 * e, 4.0 * e, 8.0 * e);
            assert!(near(lagrangian(&j).unwrap(), 4.0, 1e-15));
        }
    }

    #[test]
    fn el_rhs_examples() {
        assert_eq!(el_rhs(&Jet4::new(0.0, 0.0, 1.0, 0.0, 5.0)).unwrap(), 0.0);
        assert_eq!(el_rhs(&Jet4::new(0.0, 1.0, 1.0, 1.0, 1.0)).unwrap(), 1.0);
    }

    #[test]
    fn d_u_examples() {
        let line = Jet4::new(0.3, 0.3, 1.0, 0.0, 0.0);
        assert_eq!(d_u(&line, &VarJet::new(2.0, -1.5, 0.0)).unwrap(), -1.5);
        let ex = Jet4::new(0.0, 1.0, 1.0, 1.0, 1.0);
        assert_eq!(d_u(&ex, &VarJet::new(1.0, 1.0, 0.0)).unwrap(), 0.0);
        assert_eq!(
            d_u(
                &Jet4::new(0.0, 0.0, 2.0, 4.0, 0.0),
                &VarJet::new(1.0, 0.0, 0.0)
            )
            .unwrap(),
            -2.0
        );
    }

    #[test]
    fn d_u2_examples() {
        let t = 0.8;
        let line = Jet4::new(t, t, 1.0, 0.0, 0.0);
        assert_eq!(d_u2(&line, &VarJet::new(t * t, 2.0 * t, 2.0)).unwrap(), 2.0);
        let ex = Jet4::new(0.0, 1.0, 1.0, 1.0, 1.0);
        assert_eq!(d_u2(&ex, &VarJet::new(1.0, 1.0, 1.0)).unwrap(), 0.0);
        assert_eq!(
            d_u2(
                &Jet4::new(0.0, 0.0, 1.0, 0.0, 0.0),
                &VarJet::new(0.0, 0.0, 5.0)
            )
            .unwrap(),
            5.0
        );
    }

    #[test]
    fn boundary_b_examples() {
        let t = 1.7;
        let line = Jet4::new(t, t, 1.0, 0.0, 0.0);
        assert_eq!(
            boundary_b(&line, &VarJet::new(t * t, 2.0 * t, 2.0)).unwrap(),
            2.0
        );
        let ex = Jet4::new(0.0, 1.0, 1.0, 1.0, 1.0);
        assert_eq!(boundary_b(&ex, &VarJet::new(1.0, 1.0, 1.0)).unwrap(), -0.5);
        let j = Jet4::new(0.1, 2.0, -3.0, 0.4, 7.0);
        assert_eq!(boundary_b(&j, &VarJet::default()).unwrap(), 0.0);
    }

    #[test]
    fn boundary_terms_examples() {
        let j = Jet4::new(0.0, 0.0, 1.5, 0.6, 9.0);
        let bt = boundary_terms(&j, &VarJet::new(0.0, 2.0, 0.0)).unwrap();
        let want = 2.0 * 0.6 * 2.0 / 2.25;
        assert_eq!((bt.b0, bt.b1, bt.b2), (want, want, want));
        let ex = Jet4::new(0.0, 1.0, 1.0, 1.0, 1.0);
        let bt = boundary_terms(&ex, &VarJet::new(1.0, 1.0, 0.0)).unwrap();
        assert_eq!((bt.b0, bt.b1, bt.b2), (2.0, 1.0, 2.0));
        let line = Jet4::new(2.0, 2.0, 1.0, 0.0, 0.0);
        let bt = boundary_terms(&line, &VarJet::new(3.0, -1.0, 4.0)).unwrap();
        assert_eq!((bt.b0, bt.b1, bt.b2), (0.0, 0.0, 0.0));
    }

    #[test]
    fn all_operations_reject_singular_jets() {
        let j = Jet4::new(0.0, 0.0, 0.0, 1.0, 1.0);
        let w = VarJet::new(1.0, 1.0, 1.0);
        assert!(mercator_c(&j).is_err());
        assert!(lagrangian(&j).is_err());
        assert!(el_rhs(&j).is_err());
        assert!(d_u(&j, &w).is_err());
        assert!(d_u2(&j, &w).is_err());
        assert!(boundary_b(&j, &w).is_err());
        assert!(boundary_b_expanded(&j, &w).is_err());
        assert!(boundary_terms(&j, &w).is_err());
    }
}
