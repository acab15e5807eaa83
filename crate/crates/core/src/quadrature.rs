//! Globally adaptive 7/15-point Gauss–Kronrod quadrature.
#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// Kronrod abscissae on [0, 1]; odd indices are the 7-point Gauss nodes.
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

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct GaussKronrod {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for GaussKronrod {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_intervals: 20_000,
        }
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let pair = f(center - half * x) + f(center + half * x);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

impl GaussKronrod {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    /// Integrates `f` over `[a, b]`, starting from `initial` equal pieces
    /// and bisecting the piece with the largest error estimate until the
    /// total estimate is within tolerance.
    pub fn integrate(
        &self,
        f: impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        initial: usize,
    ) -> Result<Quadrature> {
        let initial = initial.max(1);
        let mut heap = BinaryHeap::with_capacity(initial * 2);
        let (mut total, mut total_err) = (0.0, 0.0);
        let width = (b - a) / initial as f64;
        for k in 0..initial {
            let lo = a + k as f64 * width;
            let hi = if k + 1 == initial { b } else { lo + width };
            let (value, error) = kronrod15(&f, lo, hi);
            total += value;
            total_err += error;
            heap.push(Segment {
                a: lo,
                b: hi,
                value,
                error,
            });
        }
        let mut evaluations = 15 * initial;

        while total_err > self.abs_tol.max(self.rel_tol * total.abs()) {
            if !(total.is_finite() && total_err.is_finite()) {
                return Err(Error::Numerical {
                    message: "integrand produced a non-finite value".into(),
                    estimate: total,
                    error: total_err,
                    evaluations,
                });
            }
            if heap.len() >= self.max_intervals {
                return Err(Error::Numerical {
                    message: format!(
                        "no convergence to relative tolerance {:e} within {} intervals",
                        self.rel_tol, self.max_intervals
                    ),
                    estimate: total,
                    error: total_err,
                    evaluations,
                });
            }
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.a + worst.b);
            let (lv, le) = kronrod15(&f, worst.a, mid);
            let (rv, re) = kronrod15(&f, mid, worst.b);
            evaluations += 30;
            total += lv + rv - worst.value;
            total_err += le + re - worst.error;
            heap.push(Segment {
                a: worst.a,
                b: mid,
                value: lv,
                error: le,
            });
            heap.push(Segment {
                a: mid,
                b: worst.b,
                value: rv,
                error: re,
            });
        }
        // Re-sum to shed the drift of the running updates.
        let (value, abs_error) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
        Ok(Quadrature {
            value,
            abs_error,
            evaluations,
        })
    }
}
