//! Globally adaptive 21-point Gauss–Kronrod quadrature.

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

/// Integration settings. The target is `max(abs_tol, rel_tol * |I|)`.
#[derive(Clone, Copy, Debug)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Quadrature {
    pub fn new(abs_tol: f64) -> Self {
        Quadrature {
            abs_tol,
            rel_tol: 1e-14,
            max_intervals: 500,
        }
    }

    /// Integral of `f` over `[a, b]`; `a > b` flips the sign.
    pub fn integrate<F>(&self, mut f: F, a: f64, b: f64) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        Ok(self.integrate_vec(|x| Ok([f(x)?]), a, b)?[0])
    }

    /// Componentwise integral of a vector-valued `f`. Subdivision is driven
    /// by the largest component error.
    pub fn integrate_vec<F, const N: usize>(&self, mut f: F, a: f64, b: f64) -> Result<[f64; N]>
    where
        F: FnMut(f64) -> Result<[f64; N]>,
    {
        if a == b {
            return Ok([0.0; N]);
        }
        if a > b {
            return Ok(self.integrate_vec(f, b, a)?.map(|v| -v));
        }
        let fail = |estimate: f64| Error::Quadrature {
            a,
            b,
            estimate,
            tol: self.abs_tol,
        };
        let first = gk21(&mut f, a, b)?;
        let mut total = first.value;
        let mut err = first.error;
        let mut heap = BinaryHeap::new();
        heap.push(first);
        let size = |v: &[f64; N]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        while err > self.abs_tol.max(self.rel_tol * size(&total)) {
            if heap.len() >= self.max_intervals {
                return Err(fail(err));
            }
            if heap.peek().is_some_and(|w| w.error <= w.floor) {
                // the worst panel is at its round-off floor; splitting cannot help
                break;
            }
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                // interval cannot be split further in floating point
                return Err(fail(err));
            }
            let left = gk21(&mut f, worst.a, mid)?;
            let right = gk21(&mut f, mid, worst.b)?;
            for i in 0..N {
                total[i] += left.value[i] + right.value[i] - worst.value[i];
            }
            err += left.error + right.error - worst.error;
            heap.push(left);
            heap.push(right);
        }
        // re-sum to shed the running-update rounding
        let mut out = [0.0; N];
        for panel in heap.iter() {
            for i in 0..N {
                out[i] += panel.value[i];
            }
        }
        Ok(out)
    }
}

struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: f64,
    /// Round-off level of `error`.
    floor: f64,
}

impl<const N: usize> PartialEq for Panel<N> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
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
        self.error.total_cmp(&other.error)
    }
}

fn gk21<F, const N: usize>(f: &mut F, a: f64, b: f64) -> Result<Panel<N>>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut fv = [[0.0; N]; 21];
    fv[10] = f(center)?;
    for j in 0..10 {
        let dx = half * XGK[j];
        fv[j] = f(center - dx)?;
        fv[20 - j] = f(center + dx)?;
    }
    let mut value = [0.0; N];
    let mut error = 0.0f64;
    let mut floor = 0.0f64;
    for i in 0..N {
        let mut kronrod = WGK[10] * fv[10][i];
        let mut abs_k = kronrod.abs();
        let mut gauss = 0.0;
        for j in 0..10 {
            let (f1, f2) = (fv[j][i], fv[20 - j][i]);
            kronrod += WGK[j] * (f1 + f2);
            abs_k += WGK[j] * (f1.abs() + f2.abs());
            if j % 2 == 1 {
                gauss += WG[j / 2] * (f1 + f2);
            }
        }
        let mean = 0.5 * kronrod;
        let mut asc = WGK[10] * (fv[10][i] - mean).abs();
        for j in 0..10 {
            asc += WGK[j] * ((fv[j][i] - mean).abs() + (fv[20 - j][i] - mean).abs());
        }
        let resasc = asc * half;
        let resabs = abs_k * half;
        let mut e = ((kronrod - gauss) * half).abs();
        if resasc != 0.0 && e != 0.0 {
            e = resasc * (200.0 * e / resasc).powf(1.5).min(1.0);
        }
        if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            e = e.max(50.0 * f64::EPSILON * resabs);
        }
        floor = floor.max(50.0 * f64::EPSILON * resabs);
        value[i] = kronrod * half;
        if !value[i].is_finite() {
            return Err(Error::Quadrature {
                a,
                b,
                estimate: f64::INFINITY,
                tol: 0.0,
            });
        }
        error = error.max(e);
    }
    Ok(Panel {
        a,
        b,
        value,
        error,
        floor,
    })
}
