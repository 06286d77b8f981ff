//! Points of the 3-jet space and variational jets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest |p| accepted by Schwarzian-type evaluations.
pub const SINGULAR_P: f64 = 1e-12;

/// A point `(t, u, p, q, r)` of the 3-jet space, with `p = u'`, `q = u''`, `r = u'''`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jet4 {
    pub t: f64,
    pub u: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

impl Jet4 {
    pub const fn new(t: f64, u: f64, p: f64, q: f64, r: f64) -> Self {
        Self { t, u, p, q, r }
    }

    /// Builds the jet at `t` from `[u, u', u'', u''', ...]`.
    pub fn from_derivs(t: f64, d: &[f64]) -> Self {
        Self::new(t, d[0], d[1], d[2], d[3])
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.t, self.u, self.p, self.q, self.r]
    }

    /// Fails with [`Error::SingularJet`] when `|p|` is below [`SINGULAR_P`].
    pub fn check_regular(&self) -> Result<()> {
        if !(self.p.abs() >= SINGULAR_P) {
            return Err(Error::SingularJet { p: self.p });
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }
}

impl From<[f64; 5]> for Jet4 {
    fn from(a: [f64; 5]) -> Self {
        Self::new(a[0], a[1], a[2], a[3], a[4])
    }
}

impl std::str::FromStr for Jet4 {
    type Err = Error;

    /// Parses `t,u,p,q,r`.
    fn from_str(s: &str) -> Result<Self> {
        let vals: Vec<f64> = s
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidInput(format!("jet `{s}`: {e}")))?;
        if vals.len() != 5 {
            return Err(Error::InvalidInput(format!(
                "jet `{s}` must have 5 components t,u,p,q,r (got {})",
                vals.len()
            )));
        }
        Ok(Self::new(vals[0], vals[1], vals[2], vals[3], vals[4]))
    }
}

/// Values `(v, v', v'')` of a variational vector field at one time.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VarJet {
    pub v: f64,
    pub v1: f64,
    pub v2: f64,
}

impl VarJet {
    pub const fn new(v: f64, v1: f64, v2: f64) -> Self {
        Self { v, v1, v2 }
    }

    pub fn scale(self, k: f64) -> Self {
        Self::new(k * self.v, k * self.v1, k * self.v2)
    }

    pub fn add(self, o: Self) -> Self {
        Self::new(self.v + o.v, self.v1 + o.v1, self.v2 + o.v2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_jet() {
        let j: Jet4 = "0, 0,1,0,2".parse().unwrap();
        assert_eq!(j, Jet4::new(0.0, 0.0, 1.0, 0.0, 2.0));
        assert!("1,2,3".parse::<Jet4>().is_err());
        assert!("a,b,c,d,e".parse::<Jet4>().is_err());
    }

    #[test]
    fn regularity() {
        assert!(Jet4::new(0.0, 0.0, 0.0, 1.0, 0.0).check_regular().is_err());
        assert!(Jet4::new(0.0, 0.0, f64::NAN, 1.0, 0.0)
            .check_regular()
            .is_err());
        assert!(Jet4::new(0.0, 0.0, -1e-3, 1.0, 0.0).check_regular().is_ok());
    }
}
