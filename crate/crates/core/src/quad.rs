//! Adaptive Gauss-Kronrod quadrature.
//!
//! One rule (21-point Kronrod / 10-point Gauss) with interval bisection,
//! plus a geometric endpoint refinement for integrands that are singular
//! at the upper limit. The latter doubles as a divergence detector: if
//! the contributions of the shrinking end segments stop decreasing, the
//! integrand is flagged as non-integrable.

use crate::error::{Error, Result};

// 21-point Kronrod nodes on [-1, 1] (positive half; symmetric).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 10] = [
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

/// Single 21-point Kronrod evaluation on [a, b]; returns (value, error estimate).
fn qk21(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = WGK[10] * fc;
    let mut resg = 0.0;
    for (j, &x) in XGK.iter().enumerate() {
        let dx = h * x;
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        resk += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    (resk * h, ((resk - resg) * h).abs())
}

const MAX_INTERVALS: usize = 4096;

/// Adaptive integration of `f` on [a, b] to relative tolerance `rel_tol`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    integrate_dyn(&mut f, a, b, rel_tol)
}

fn integrate_dyn(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (v0, e0) = qk21(f, a, b);
    // (error, a, b, value), worst interval kept last by sorting on demand
    let mut segs: Vec<(f64, f64, f64, f64)> = vec![(e0, a, b, v0)];
    loop {
        let total: f64 = segs.iter().map(|s| s.3).sum();
        let err: f64 = segs.iter().map(|s| s.0).sum();
        if !total.is_finite() {
            return Err(Error::NonFinite(format!("integrand on [{a}, {b}]")));
        }
        // scale by the L1-style sum so cancelling integrands (near-zero
        // totals) still converge
        let scale: f64 = segs.iter().map(|s| s.3.abs()).sum();
        if err <= rel_tol * total.abs().max(scale) + f64::MIN_POSITIVE {
            return Ok(total);
        }
        if segs.len() >= MAX_INTERVALS {
            return Err(Error::QuadNoConverge { a, b, est: err });
        }
        // split the interval with the largest error estimate
        let (idx, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .0.total_cmp(&y.1 .0))
            .unwrap();
        let (_, sa, sb, _) = segs.swap_remove(idx);
        let sm = 0.5 * (sa + sb);
        if sm <= sa || sm >= sb {
            // interval no longer splittable in f64; accept its contribution
            let (v, _) = qk21(f, sa, sb);
            segs.push((0.0, sa, sb, v));
            continue;
        }
        let (v1, e1) = qk21(f, sa, sm);
        let (v2, e2) = qk21(f, sm, sb);
        segs.push((e1, sa, sm, v1));
        segs.push((e2, sm, sb, v2));
    }
}

/// Adaptive integration with the domain pre-split at the given breakpoints.
pub fn integrate_with_breakpoints<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    rel_tol: f64,
) -> Result<f64> {
    let mut pts: Vec<f64> = points.to_vec();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut total = 0.0;
    for w in pts.windows(2) {
        total += integrate_dyn(&mut f, w[0], w[1], rel_tol)?;
    }
    Ok(total)
}

/// Integration of `f` on [a, b] where `f` may be singular (but integrable)
/// at `b`. The interval is refined geometrically toward `b`; segment
/// contributions of an integrable singularity decay geometrically, so the
/// tail is truncated once it is below tolerance. Contributions that fail
/// to decrease flag the integrand as non-integrable.
pub fn integrate_singular_upper<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<f64> {
    if !(b > a) {
        return Err(Error::InvalidParam(format!(
            "singular-upper integration needs a < b, got [{a}, {b}]"
        )));
    }
    let len = b - a;
    let mut total = 0.0;
    let mut prev_seg = f64::INFINITY;
    let mut growth_streak = 0u32;
    for k in 0..53 {
        let lo = b - len * 0.5_f64.powi(k);
        let hi = b - len * 0.5_f64.powi(k + 1);
        if hi <= lo {
            break;
        }
        let seg = integrate_dyn(&mut f, lo, hi, rel_tol)?;
        total += seg;
        let mag = seg.abs();
        if k >= 4 {
            if mag > prev_seg * 1.0001 {
                growth_streak += 1;
                if growth_streak >= 3 {
                    return Err(Error::Divergent { location: b });
                }
            } else {
                growth_streak = 0;
            }
            if mag <= 0.5 * rel_tol * total.abs() + f64::MIN_POSITIVE {
                return Ok(total);
            }
        }
        prev_seg = mag;
    }
    // Ran out of f64 resolution. Accept only if the tail was decaying.
    if prev_seg.is_finite() && prev_seg <= 1e-3 * total.abs().max(f64::MIN_POSITIVE) {
        Ok(total)
    } else {
        Err(Error::Divergent { location: b })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| 3.0 * x * x, 0.0, 2.0, 1e-12).unwrap();
        assert_relative_eq!(v, 8.0, max_relative = 1e-13);
    }

    #[test]
    fn oscillatory() {
        let v = integrate(|x| (10.0 * x).sin(), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        let exact = (1.0 - (10.0 * std::f64::consts::PI).cos()) / 10.0;
        // the exact value is ~0 by cancellation; compare absolutely
        assert!((v - exact).abs() < 1e-10, "v = {v}, exact = {exact}");
    }

    #[test]
    fn integrable_endpoint_singularity() {
        // int_0^1 (1-x)^{-1/2} dx = 2
        let v = integrate_singular_upper(|x| (1.0 - x).powf(-0.5), 0.0, 1.0, 1e-9).unwrap();
        assert_relative_eq!(v, 2.0, max_relative = 1e-6);
    }

    #[test]
    fn nonintegrable_endpoint_flagged() {
        // int_0^1 (1-x)^{-3/2} dx diverges
        let r = integrate_singular_upper(|x| (1.0 - x).powf(-1.5), 0.0, 1.0, 1e-9);
        assert!(matches!(r, Err(Error::Divergent { .. })));
    }

    #[test]
    fn breakpoints_handle_kinks() {
        let v = integrate_with_breakpoints(|x: f64| x.abs(), &[-1.0, 0.0, 1.0], 1e-12).unwrap();
        assert_relative_eq!(v, 1.0, max_relative = 1e-13);
    }
}
