//! Gauss–Kronrod quadrature: a fixed 10-point Gauss–Legendre rule and a
//! globally adaptive 21-point Kronrod scheme for vector-valued integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// 10-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre10(mut f: impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut sum = 0.0;
    for j in 0..5 {
        let x = h * XGK[2 * j + 1];
        sum += WG[j] * (f(c - x) + f(c + x));
    }
    sum * h
}

#[derive(Clone, Copy, Debug)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-300,
            max_intervals: 4000,
        }
    }
}

impl QuadConfig {
    pub fn rel(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
    pub intervals: usize,
}

struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
    priority: f64,
}

impl<const N: usize> PartialEq for Panel<N> {
    fn eq(&self, other: &Self) -> bool {
        self.priority.total_cmp(&other.priority) == Ordering::Equal
    }
}
impl<const N: usize> Eq for Panel<N> {}
impl<const N: usize> PartialOrd for Panel<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Panel<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority.total_cmp(&other.priority)
    }
}

fn kronrod21<const N: usize, F: FnMut(f64) -> [f64; N]>(
    f: &mut F,
    a: f64,
    b: f64,
) -> ([f64; N], [f64; N]) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut fv1 = [[0.0; N]; 10];
    let mut fv2 = [[0.0; N]; 10];
    let mut res_k = [0.0; N];
    let mut res_g = [0.0; N];
    let mut res_abs = [0.0; N];
    for i in 0..N {
        res_k[i] = WGK[10] * fc[i];
        res_abs[i] = (WGK[10] * fc[i]).abs();
    }
    for j in 0..10 {
        let x = h * XGK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        for i in 0..N {
            res_k[i] += WGK[j] * (f1[i] + f2[i]);
            res_abs[i] += WGK[j] * (f1[i].abs() + f2[i].abs());
            if j % 2 == 1 {
                res_g[i] += WG[j / 2] * (f1[i] + f2[i]);
            }
        }
        fv1[j] = f1;
        fv2[j] = f2;
    }
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for i in 0..N {
        let mean = 0.5 * res_k[i];
        let mut res_asc = WGK[10] * (fc[i] - mean).abs();
        for j in 0..10 {
            res_asc += WGK[j] * ((fv1[j][i] - mean).abs() + (fv2[j][i] - mean).abs());
        }
        let res_asc = res_asc * h.abs();
        let res_abs = res_abs[i] * h.abs();
        let mut err = ((res_k[i] - res_g[i]) * h).abs();
        if res_asc != 0.0 && err != 0.0 {
            err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
        }
        if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * res_abs);
        }
        value[i] = res_k[i] * h;
        error[i] = err;
    }
    (value, error)
}

/// Globally adaptive Gauss–Kronrod integration of a vector-valued function.
///
/// `points` must be an increasing sequence of at least two abscissae; the
/// integral runs from the first to the last, with every interior point used
/// as an initial panel boundary. Convergence is declared when every component
/// satisfies `err <= max(abs_tol, rel_tol * |value|)`.
pub fn integrate<const N: usize, F>(mut f: F, points: &[f64], cfg: QuadConfig) -> Result<QuadResult<N>>
where
    F: FnMut(f64) -> [f64; N],
{
    if points.len() < 2 {
        return Err(Error::InvalidArgument("quadrature needs two endpoints".into()));
    }
    let mut heap = BinaryHeap::new();
    let mut total = [0.0; N];
    let mut total_err = [0.0; N];
    // error of panels that can no longer be split (round-off floor)
    let mut frozen_err = [0.0; N];
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let (v, e) = kronrod21(&mut f, a, b);
        for i in 0..N {
            total[i] += v[i];
            total_err[i] += e[i];
        }
        heap.push(Panel {
            a,
            b,
            value: v,
            error: e,
            priority: 0.0,
        });
    }
    let scale_of = |total: &[f64; N], i: usize| (cfg.rel_tol * total[i].abs()).max(cfg.abs_tol);
    // re-key initial panels now that totals are known
    let mut panels: Vec<Panel<N>> = heap.into_vec();
    for p in panels.iter_mut() {
        p.priority = (0..N).map(|i| p.error[i] / scale_of(&total, i)).fold(0.0, f64::max);
    }
    let mut heap: BinaryHeap<Panel<N>> = panels.into();
    let mut intervals = heap.len();
    loop {
        let done = (0..N).all(|i| total_err[i] + frozen_err[i] <= scale_of(&total, i));
        if done {
            break;
        }
        let Some(p) = heap.pop() else { break };
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) || (p.b - p.a) <= 4.0 * f64::EPSILON * p.a.abs().max(p.b.abs()) {
            for i in 0..N {
                total_err[i] -= p.error[i];
                frozen_err[i] += p.error[i];
            }
            continue;
        }
        if intervals >= cfg.max_intervals {
            return Err(Error::NoConvergence {
                what: "adaptive quadrature",
            });
        }
        let (v1, e1) = kronrod21(&mut f, p.a, mid);
        let (v2, e2) = kronrod21(&mut f, mid, p.b);
        for i in 0..N {
            total[i] += v1[i] + v2[i] - p.value[i];
            total_err[i] += e1[i] + e2[i] - p.error[i];
        }
        intervals += 1;
        for (a, b, v, e) in [(p.a, mid, v1, e1), (mid, p.b, v2, e2)] {
            let priority = (0..N).map(|i| e[i] / scale_of(&total, i)).fold(0.0, f64::max);
            heap.push(Panel {
                a,
                b,
                value: v,
                error: e,
                priority,
            });
        }
    }
    // resum to limit drift from incremental updates
    let mut value = [0.0; N];
    let mut error = frozen_err;
    for p in heap.iter() {
        for i in 0..N {
            value[i] += p.value[i];
            error[i] += p.error[i];
        }
    }
    if value.iter().any(|v| !v.is_finite()) {
        return Err(Error::NoConvergence {
            what: "adaptive quadrature (non-finite integrand)",
        });
    }
    Ok(QuadResult {
        value,
        error,
        intervals,
    })
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar(mut f: impl FnMut(f64) -> f64, points: &[f64], cfg: QuadConfig) -> Result<f64> {
    integrate(|x| [f(x)], points, cfg).map(|r| r.value[0])
}
