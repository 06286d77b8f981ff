//! Adaptive 15-point Gauss–Kronrod quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Default absolute tolerance for the functionals.
pub const ABS_TOL: f64 = 1e-11;

const MAX_INTERVALS: usize = 4000;

// Kronrod nodes (non-negative half) and weights; odd indices are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One GK15 panel: `(kronrod, |kronrod - gauss|, ∫|f|)`.
fn gk15<F: FnMut(f64) -> Result<f64>>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut abs = WGK[7] * fc.abs();
    for i in 0..7 {
        let x = h * XGK[i];
        let f1 = f(c - x)?;
        let f2 = f(c + x)?;
        k += WGK[i] * (f1 + f2);
        abs += WGK[i] * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            g += WG[i / 2] * (f1 + f2);
        }
    }
    let (k, g, abs) = (k * h, g * h, abs * h.abs());
    if !k.is_finite() {
        return Err(Error::Domain(format!("non-finite integrand on [{a}, {b}]")));
    }
    Ok((k, (k - g).abs(), abs))
}

struct Panel {
    a: f64,
    b: f64,
    val: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// `∫_a^b f` to absolute accuracy `tol`, splitting first at the given breakpoints.
///
/// The target is relaxed to `1e-14 ∫|f|` when that is larger, since no double-precision
/// sum can do better. Fails with [`Error::Quadrature`] if the panel budget runs out.
pub fn integrate<F>(mut f: F, a: f64, b: f64, breakpoints: &[f64], tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return integrate(f, b, a, breakpoints, tol).map(|v| -v);
    }
    let mut cuts = vec![a];
    let mut inner: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x > a && x < b)
        .collect();
    inner.sort_by(f64::total_cmp);
    for x in inner {
        if x - cuts.last().unwrap() > 1e-14 * (1.0 + x.abs()) {
            cuts.push(x);
        }
    }
    if b - cuts.last().unwrap() <= 1e-14 * (1.0 + b.abs()) && cuts.len() > 1 {
        cuts.pop();
    }
    cuts.push(b);

    let mut heap = BinaryHeap::new();
    let (mut total, mut err, mut abs) = (0.0, 0.0, 0.0);
    for w in cuts.windows(2) {
        let (v, e, s) = gk15(&mut f, w[0], w[1])?;
        total += v;
        err += e;
        abs += s;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            val: v,
            err: e,
        });
    }
    let target = |abs: f64| tol.max(1e-14 * abs);
    while err > target(abs) {
        if heap.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature {
                a,
                b,
                estimate: err,
            });
        }
        let worst = heap.pop().unwrap();
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            // Cannot split further; accept what is left.
            heap.push(worst);
            break;
        }
        total -= worst.val;
        err -= worst.err;
        for (lo, hi) in [(worst.a, m), (m, worst.b)] {
            let (v, e, s) = gk15(&mut f, lo, hi)?;
            total += v;
            err += e;
            abs += s;
            heap.push(Panel {
                a: lo,
                b: hi,
                val: v,
                err: e,
            });
        }
        // Recompute occasionally to keep the running sums free of drift.
        if heap.len() % 64 == 0 {
            total = heap.iter().map(|p| p.val).sum();
            err = heap.iter().map(|p| p.err).sum();
        }
    }
    if err > target(abs) && err > 1e-8 * (1.0 + total.abs()) {
        return Err(Error::Quadrature {
            a,
            b,
            estimate: err,
        });
    }
    Ok(heap.iter().map(|p| p.val).sum())
}
