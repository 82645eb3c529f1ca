//! Adaptive Gauss–Kronrod quadrature and a Fourier-integral driver for
//! slowly decaying oscillatory integrands on the half line.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// 21-point Kronrod nodes with the embedded 10-point Gauss rule.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_460,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_958_109_831,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// One GK21 panel: (Kronrod estimate, |Kronrod − Gauss|).
fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    for i in 0..10 {
        let dx = half * XGK[i];
        let fsum = f(center - dx) + f(center + dx);
        kronrod += WGK[i] * fsum;
        // Odd Kronrod nodes are the Gauss nodes.
        if i % 2 == 1 {
            gauss += WG[i / 2] * fsum;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Result of a converged quadrature.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Globally adaptive GK21 on a finite interval. Bisects the panel with the
/// largest error estimate until the summed estimate drops below `abs_tol`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_panels: usize,
) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    let (value, error) = gk21(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, error });
    let mut total_error = error;
    loop {
        if total_error <= abs_tol {
            // Confirm against an exact resummation before stopping.
            total_error = heap.iter().map(|p| p.error).sum();
            if total_error <= abs_tol {
                break;
            }
        }
        if heap.len() >= max_panels {
            return Err(Error::Quadrature {
                achieved: total_error,
                requested: abs_tol,
            });
        }
        let worst = heap.pop().expect("heap never empties");
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = gk21(&f, worst.a, mid);
        let (v2, e2) = gk21(&f, mid, worst.b);
        total_error += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        // Recompute the running error now and then to shed rounding drift.
        if heap.len() % 64 == 0 || !total_error.is_finite() {
            total_error = heap.iter().map(|p| p.error).sum();
        }
    }
    let value = heap.iter().map(|p| p.value).sum();
    let error = heap.iter().map(|p| p.error).sum();
    Ok(Estimate { value, error })
}

/// Wynn's epsilon algorithm applied to a sequence of partial sums. Returns
/// the best extrapolated limit and the spread between the last two
/// even-column estimates.
pub fn wynn_epsilon(partial_sums: &[f64]) -> (f64, f64) {
    let n = partial_sums.len();
    if n < 3 {
        let last = partial_sums.last().copied().unwrap_or(0.0);
        return (last, f64::INFINITY);
    }
    // eps[k] holds column k; only even columns are limit estimates.
    let mut prev: Vec<f64> = vec![0.0; n + 1];
    let mut curr: Vec<f64> = partial_sums.to_vec();
    let mut estimates: Vec<f64> = vec![*partial_sums.last().unwrap()];
    let mut column = 0;
    while curr.len() > 1 {
        let mut next = Vec::with_capacity(curr.len() - 1);
        let mut broke = false;
        for i in 0..curr.len() - 1 {
            let diff = curr[i + 1] - curr[i];
            if diff == 0.0 || !diff.is_finite() {
                broke = true;
                break;
            }
            next.push(prev[i + 1] + 1.0 / diff);
        }
        if broke {
            break;
        }
        column += 1;
        prev = curr;
        curr = next;
        if column % 2 == 0 {
            estimates.push(*curr.last().unwrap());
        }
    }
    let m = estimates.len();
    if m < 2 {
        return (estimates[0], f64::INFINITY);
    }
    let best = estimates[m - 1];
    (best, (estimates[m - 1] - estimates[m - 2]).abs())
}

/// Which trigonometric kernel multiplies the amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    Cos,
    Sin,
}

/// ∫₀^∞ f(ω)·cos(ωt) dω or ∫₀^∞ f(ω)·sin(ωt) dω for an amplitude that
/// decays (possibly only algebraically) at large ω. The half line is cut at
/// the zeros of the kernel; the alternating panel sums are extrapolated with
/// Wynn's epsilon algorithm.
pub fn fourier_half_line<F: Fn(f64) -> f64>(
    f: F,
    t: f64,
    kernel: Kernel,
    abs_tol: f64,
) -> Result<Estimate> {
    assert!(t > 0.0, "Fourier integral needs t > 0");
    let half_period = std::f64::consts::PI / t;
    let first_zero = match kernel {
        Kernel::Cos => 0.5 * half_period,
        Kernel::Sin => half_period,
    };
    let integrand = |w: f64| {
        f(w) * match kernel {
            Kernel::Cos => (w * t).cos(),
            Kernel::Sin => (w * t).sin(),
        }
    };
    let panel_tol = abs_tol * 1e-2;
    let first = integrate(integrand, 0.0, first_zero, panel_tol, 4000)?;
    let mut quad_error = first.error;
    let mut sums = vec![first.value];
    let mut lo = first_zero;
    let mut last_estimate = f64::NAN;
    const MAX_PANELS: usize = 400;
    for k in 0..MAX_PANELS {
        let hi = lo + half_period;
        let panel = integrate(integrand, lo, hi, panel_tol, 4000)?;
        quad_error += panel.error;
        let s = sums.last().unwrap() + panel.value;
        sums.push(s);
        lo = hi;
        if k >= 8 {
            // Extrapolate from a trailing window to keep the table small.
            let window = &sums[sums.len().saturating_sub(30)..];
            let (estimate, spread) = wynn_epsilon(window);
            let change = (estimate - last_estimate).abs();
            last_estimate = estimate;
            if spread.max(change) + quad_error < abs_tol {
                return Ok(Estimate {
                    value: estimate,
                    error: spread.max(change) + quad_error,
                });
            }
        }
    }
    Err(Error::Quadrature {
        achieved: (sums[sums.len() - 1] - sums[sums.len() - 2]).abs(),
        requested: abs_tol,
    })
}
