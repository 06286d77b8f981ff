//! Truncated power series in `t` about a base point.

use crate::error::{Error, Result};

use super::expr::TAN_POLE_EPS;

/// Truncated Taylor series `c_0 + c_1 τ + ... + c_N τ^N`, `τ = t - base_point`.
///
/// Coefficient `k` is `(1/k!) d^k/dt^k` of the represented function at the base point.
/// Binary operations require equal base points and orders.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorScalar {
    base_point: f64,
    coeffs: Vec<f64>,
}

impl TaylorScalar {
    pub fn from_coeffs(base_point: f64, coeffs: Vec<f64>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "a series needs at least one coefficient"
        );
        Self { base_point, coeffs }
    }

    pub fn constant(base_point: f64, order: usize, c: f64) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = c;
        Self { base_point, coeffs }
    }

    /// The independent variable `t` expanded about `base_point`.
    pub fn variable(base_point: f64, order: usize) -> Self {
        let mut s = Self::constant(base_point, order, base_point);
        if order >= 1 {
            s.coeffs[1] = 1.0;
        }
        s
    }

    pub fn base_point(&self) -> f64 {
        self.base_point
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// `d^k/dt^k` at the base point, i.e. `k! c_k`.
    pub fn derivative(&self, k: usize) -> f64 {
        self.coeff(k) * factorial(k)
    }

    /// All derivatives `0..=order` at the base point.
    pub fn derivatives(&self) -> Vec<f64> {
        (0..=self.order()).map(|k| self.derivative(k)).collect()
    }

    /// Sums the series at `t`.
    pub fn eval_at(&self, t: f64) -> f64 {
        let x = t - self.base_point;
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// Termwise derivative `d/dt`; the top coefficient becomes zero so the order is kept.
    pub fn deriv(&self) -> Self {
        let n = self.order();
        let mut out: Vec<f64> = (1..=n).map(|k| k as f64 * self.coeffs[k]).collect();
        out.push(0.0);
        Self {
            base_point: self.base_point,
            coeffs: out,
        }
    }

    /// Same base point with the order changed (truncated or zero-padded).
    pub fn with_order(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, 0.0);
        Self {
            base_point: self.base_point,
            coeffs,
        }
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.base_point != other.base_point || self.order() != other.order() {
            return Err(Error::SeriesMismatch(format!(
                "(base {}, order {}) vs (base {}, order {})",
                self.base_point,
                self.order(),
                other.base_point,
                other.order()
            )));
        }
        Ok(())
    }

    fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_compatible(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| f(*a, *b))
            .collect();
        Ok(Self {
            base_point: self.base_point,
            coeffs,
        })
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            base_point: self.base_point,
            coeffs: self.coeffs.iter().map(|c| f(*c)).collect(),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    pub fn neg(&self) -> Self {
        self.map(|c| -c)
    }

    pub fn scale(&self, k: f64) -> Self {
        self.map(|c| k * c)
    }

    pub fn add_scalar(&self, k: f64) -> Self {
        let mut s = self.clone();
        s.coeffs[0] += k;
        s
    }

    /// Cauchy product.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let n = self.order();
        let a = &self.coeffs;
        let b = &other.coeffs;
        let coeffs = (0..=n)
            .map(|k| (0..=k).map(|j| a[j] * b[k - j]).sum())
            .collect();
        Ok(Self {
            base_point: self.base_point,
            coeffs,
        })
    }

    pub fn try_div(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let b = &other.coeffs;
        if b[0] == 0.0 {
            return Err(Error::Domain("series division by zero".into()));
        }
        let n = self.order();
        let mut c = vec![0.0; n + 1];
        for k in 0..=n {
            let s: f64 = (1..=k).map(|j| b[j] * c[k - j]).sum();
            c[k] = (self.coeffs[k] - s) / b[0];
        }
        Ok(Self {
            base_point: self.base_point,
            coeffs: c,
        })
    }

    pub fn recip(&self) -> Result<Self> {
        Self::constant(self.base_point, self.order(), 1.0).try_div(self)
    }

    pub fn powi(&self, n: i32) -> Result<Self> {
        if n < 0 {
            return self.powi(-n)?.recip();
        }
        let mut result = Self::constant(self.base_point, self.order(), 1.0);
        let mut base = self.clone();
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result.try_mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.try_mul(&base)?;
            }
        }
        Ok(result)
    }

    pub fn exp(&self) -> Self {
        let a = &self.coeffs;
        let n = self.order();
        let mut b = vec![0.0; n + 1];
        b[0] = a[0].exp();
        for k in 1..=n {
            let s: f64 = (1..=k).map(|j| j as f64 * a[j] * b[k - j]).sum();
            b[k] = s / k as f64;
        }
        Self {
            base_point: self.base_point,
            coeffs: b,
        }
    }

    pub fn ln(&self) -> Result<Self> {
        let a = &self.coeffs;
        if a[0] <= 0.0 {
            return Err(Error::Domain(format!("ln of non-positive value {}", a[0])));
        }
        let n = self.order();
        let mut b = vec![0.0; n + 1];
        b[0] = a[0].ln();
        for k in 1..=n {
            let s: f64 = (1..k).map(|j| j as f64 * b[j] * a[k - j]).sum();
            b[k] = (a[k] - s / k as f64) / a[0];
        }
        Ok(Self {
            base_point: self.base_point,
            coeffs: b,
        })
    }

    /// `(sin, cos)` of the series, computed jointly.
    pub fn sin_cos(&self) -> (Self, Self) {
        let a = &self.coeffs;
        let n = self.order();
        let mut s = vec![0.0; n + 1];
        let mut c = vec![0.0; n + 1];
        s[0] = a[0].sin();
        c[0] = a[0].cos();
        for k in 1..=n {
            let mut ss = 0.0;
            let mut cc = 0.0;
            for j in 1..=k {
                let w = j as f64 * a[j];
                ss += w * c[k - j];
                cc += w * s[k - j];
            }
            s[k] = ss / k as f64;
            c[k] = -cc / k as f64;
        }
        (
            Self {
                base_point: self.base_point,
                coeffs: s,
            },
            Self {
                base_point: self.base_point,
                coeffs: c,
            },
        )
    }

    pub fn tan(&self) -> Result<Self> {
        let (s, c) = self.sin_cos();
        if c.coeffs[0].abs() < TAN_POLE_EPS {
            return Err(Error::Domain(format!("tan pole at {}", self.coeffs[0])));
        }
        s.try_div(&c)
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}
