//! Globally adaptive Gauss-Kronrod (10/21 point) quadrature for
//! vector-valued integrands.
//!
//! The integrand returns `[T; N]`; every component is integrated over the same
//! panel tree. Panels are split where the weighted error is largest until each
//! component meets `max(abs_tol, rel_tol * scale_k)`, where the scale comes from
//! a caller-supplied map of the running estimate. Forced breakpoints seed the
//! initial panels so narrow features are never straddled.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::scalar::Real;

// Kronrod abscissae on [0, 1]; odd indices are the 10-point Gauss nodes.
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

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_350_184,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_panels: usize,
}

impl<T: Real> QuadOptions<T> {
    pub fn relative(rel_tol: T) -> Self {
        QuadOptions {
            rel_tol,
            abs_tol: T::zero(),
            max_panels: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T, const N: usize> {
    pub value: [T; N],
    pub error: [T; N],
    pub evaluations: usize,
    pub panels: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
struct Panel<T, const N: usize> {
    a: T,
    b: T,
    value: [T; N],
    error: [T; N],
    priority: T,
    splittable: bool,
}

impl<T: Real, const N: usize> PartialEq for Panel<T, N> {
    fn eq(&self, other: &Self) -> bool {
        self.priority == other.priority
    }
}
impl<T: Real, const N: usize> Eq for Panel<T, N> {}
impl<T: Real, const N: usize> PartialOrd for Panel<T, N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real, const N: usize> Ord for Panel<T, N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .partial_cmp(&other.priority)
            .unwrap_or(Ordering::Equal)
            // deterministic tie-break on position
            .then_with(|| other.a.partial_cmp(&self.a).unwrap_or(Ordering::Equal))
    }
}

fn rescale_error<T: Real>(err: T, res_abs: T, res_asc: T) -> T {
    let mut e = err.abs();
    if res_asc != T::zero() && e != T::zero() {
        let s = (T::lit(200.0) * e / res_asc).powf(T::lit(1.5));
        e = if s < T::one() { res_asc * s } else { res_asc };
    }
    if res_abs > T::min_positive_value() / (T::lit(50.0) * T::epsilon()) {
        e = e.max(T::lit(50.0) * T::epsilon() * res_abs);
    }
    e
}

/// One 21-point Kronrod panel with its embedded 10-point Gauss estimate.
pub fn gauss_kronrod_21<T: Real, const N: usize, F>(f: &F, a: T, b: T) -> ([T; N], [T; N])
where
    F: Fn(T) -> [T; N],
{
    let center = (a + b) / T::two();
    let half = (b - a) / T::two();
    let fc = f(center);
    let mut kron = [T::zero(); N];
    let mut gauss = [T::zero(); N];
    let mut res_abs = [T::zero(); N];
    let mut fv1 = [[T::zero(); N]; 10];
    let mut fv2 = [[T::zero(); N]; 10];
    let wc = T::lit(WGK[10]);
    for k in 0..N {
        kron[k] = wc * fc[k];
        res_abs[k] = wc * fc[k].abs();
    }
    for j in 0..10 {
        let dx = half * T::lit(XGK[j]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        let wk = T::lit(WGK[j]);
        for k in 0..N {
            kron[k] = kron[k] + wk * (f1[k] + f2[k]);
            res_abs[k] = res_abs[k] + wk * (f1[k].abs() + f2[k].abs());
            if j % 2 == 1 {
                gauss[k] = gauss[k] + T::lit(WG[j / 2]) * (f1[k] + f2[k]);
            }
        }
        fv1[j] = f1;
        fv2[j] = f2;
    }
    let mut err = [T::zero(); N];
    for k in 0..N {
        let mean = kron[k] / T::two();
        let mut asc = wc * (fc[k] - mean).abs();
        for j in 0..10 {
            asc = asc + T::lit(WGK[j]) * ((fv1[j][k] - mean).abs() + (fv2[j][k] - mean).abs());
        }
        let h = half.abs();
        err[k] = rescale_error((kron[k] - gauss[k]) * h, res_abs[k] * h, asc * h);
        kron[k] = kron[k] * half;
    }
    (kron, err)
}

/// Integrate `f` over `[points[0], points[last]]` with panel boundaries at every point.
///
/// `points` must be strictly increasing with at least two entries.
pub fn integrate<T, const N: usize, F, S>(f: F, points: &[T], opts: &QuadOptions<T>, scale: S) -> QuadResult<T, N>
where
    T: Real,
    F: Fn(T) -> [T; N],
    S: Fn(&[T; N]) -> [T; N],
{
    assert!(points.len() >= 2, "need at least one panel");
    let min_width = |a: T, b: T| (b - a).abs() > T::lit(64.0) * T::epsilon() * (a.abs().max(b.abs()));

    let tolerance = |value: &[T; N]| {
        let s = scale(value);
        let mut t = [T::zero(); N];
        for k in 0..N {
            t[k] = opts.abs_tol.max(opts.rel_tol * s[k].abs());
        }
        t
    };
    let priority = |err: &[T; N], tol: &[T; N]| {
        (0..N).fold(T::zero(), |m, k| {
            let denom = tol[k].max(T::min_positive_value());
            m.max(err[k] / denom)
        })
    };

    let mut heap = BinaryHeap::new();
    let mut done: Vec<Panel<T, N>> = Vec::new();
    let mut evaluations = 0;
    let mut initial = Vec::with_capacity(points.len() - 1);
    for w in points.windows(2) {
        let (v, e) = gauss_kronrod_21(&f, w[0], w[1]);
        evaluations += 21;
        initial.push((w[0], w[1], v, e));
    }
    let sum = |items: &mut dyn Iterator<Item = ([T; N], [T; N])>| {
        let mut v = [T::zero(); N];
        let mut e = [T::zero(); N];
        for (pv, pe) in items {
            for k in 0..N {
                v[k] = v[k] + pv[k];
                e[k] = e[k] + pe[k];
            }
        }
        (v, e)
    };
    let (mut total, mut total_err) = sum(&mut initial.iter().map(|p| (p.2, p.3)));
    let mut tol = tolerance(&total);
    for (a, b, value, error) in initial {
        heap.push(Panel {
            a,
            b,
            value,
            error,
            priority: priority(&error, &tol),
            splittable: min_width(a, b),
        });
    }

    let converged_now = |err: &[T; N], tol: &[T; N]| (0..N).all(|k| err[k].is_finite() && err[k] <= tol[k]);
    let mut converged = converged_now(&total_err, &tol);
    while !converged && heap.len() + done.len() < opts.max_panels {
        let Some(worst) = heap.pop() else { break };
        if !worst.splittable {
            done.push(worst);
            continue;
        }
        let mid = (worst.a + worst.b) / T::two();
        let (v1, e1) = gauss_kronrod_21(&f, worst.a, mid);
        let (v2, e2) = gauss_kronrod_21(&f, mid, worst.b);
        evaluations += 42;
        for k in 0..N {
            total[k] = total[k] - worst.value[k] + v1[k] + v2[k];
            total_err[k] = total_err[k] - worst.error[k] + e1[k] + e2[k];
        }
        tol = tolerance(&total);
        for (a, b, value, error) in [(worst.a, mid, v1, e1), (mid, worst.b, v2, e2)] {
            heap.push(Panel {
                a,
                b,
                value,
                error,
                priority: priority(&error, &tol),
                splittable: min_width(a, b),
            });
        }
        converged = converged_now(&total_err, &tol);
    }

    // final sums in panel order so the result does not depend on heap history
    let mut panels: Vec<Panel<T, N>> = heap.into_vec();
    panels.extend(done);
    panels.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap_or(Ordering::Equal));
    let (value, error) = sum(&mut panels.iter().map(|p| (p.value, p.error)));
    let converged = converged_now(&error, &tolerance(&value));
    QuadResult {
        value,
        error,
        evaluations,
        panels: panels.len(),
        converged,
    }
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<T: Real, F: Fn(T) -> T>(f: F, points: &[T], opts: &QuadOptions<T>) -> QuadResult<T, 1> {
    integrate(|x| [f(x)], points, opts, |v| *v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kronrod_rule_is_exact_for_degree_31() {
        for deg in 0..=31 {
            let (v, _) = gauss_kronrod_21(&|x: f64| [x.powi(deg)], -1.0, 1.0);
            let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
            assert!((v[0] - exact).abs() < 1e-14, "degree {deg}: {} vs {exact}", v[0]);
        }
    }

    #[test]
    fn gauss_weights_sum_to_two() {
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((g - 2.0).abs() < 1e-15);
        let k: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        assert!((k - 2.0).abs() < 1e-15);
    }

    #[test]
    fn narrow_lorentzian() {
        // width 1e-4 peak at x = 1 on [0, 10]; exact integral via arctan
        let w = 1e-4f64;
        let f = |x: f64| w / ((x - 1.0).powi(2) + w * w);
        let exact = (9.0f64 / w).atan() + (1.0f64 / w).atan();
        let r = integrate_scalar(f, &[0.0, 1.0, 10.0], &QuadOptions::relative(1e-10));
        assert!(r.converged);
        assert_relative_eq!(r.value[0], exact, max_relative = 1e-10);
        assert!(r.error[0] <= 1e-10 * exact);
    }

    #[test]
    fn vector_components_share_panels() {
        let r = integrate(
            |x: f64| [x.sin(), x.cos(), (-x * x).exp()],
            &[0.0, 3.0],
            &QuadOptions::relative(1e-12),
            |v| *v,
        );
        assert!(r.converged);
        assert_relative_eq!(r.value[0], 1.0 - 3.0f64.cos(), max_relative = 1e-12);
        assert_relative_eq!(r.value[1], 3.0f64.sin(), max_relative = 1e-12);
        assert_relative_eq!(r.value[2], 0.886_207_348_259_521_8, max_relative = 1e-12);
    }

    #[test]
    fn reports_non_convergence() {
        let opts = QuadOptions {
            rel_tol: 1e-12,
            abs_tol: 0.0,
            max_panels: 3,
        };
        let r = integrate_scalar(|x: f64| x.sqrt().recip(), &[0.0, 1.0], &opts);
        assert!(!r.converged);
        // a pole at a node gives a non-finite estimate, never a converged one
        let r = integrate_scalar(|x: f64| x.recip(), &[-1.0, 1.0], &QuadOptions::relative(1e-6));
        assert!(!r.converged);
    }

    #[test]
    fn single_precision() {
        let r = integrate_scalar(|x: f32| x.exp(), &[0.0, 1.0], &QuadOptions::relative(1e-5));
        assert!((r.value[0] - (1f32.exp() - 1.0)).abs() < 1e-5);
    }
}
