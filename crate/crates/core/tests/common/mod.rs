//! Reference values computed without touching the library's numerics.

#![allow(dead_code)]

/// `J_m(x)` from its power series; adequate for `x < 20`.
pub fn bessel_j(m: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = half.powi(m as i32) / (1..=m).map(f64::from).product::<f64>();
    let mut sum = term;
    for k in 1..200 {
        let k = f64::from(k);
        term *= -(half * half) / (k * (k + f64::from(m)));
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// The first `count` positive zeros of `J_m`, bracketed on a 0.05 scan and
/// refined by bisection to machine precision.
pub fn bessel_zeros(m: u32, count: usize) -> Vec<f64> {
    let mut zeros = Vec::with_capacity(count);
    let step = 0.05;
    let mut a = step;
    let mut fa = bessel_j(m, a);
    while zeros.len() < count {
        let b = a + step;
        let fb = bessel_j(m, b);
        if fa * fb < 0.0 {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                let fm = bessel_j(m, mid);
                if fm * flo > 0.0 {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            zeros.push(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    zeros
}

/// `(H, K)` of `z = S(rho)` from fourth-order central differences of `S`
/// with step `h`: the meridian's plane-curve curvature and the normal's tilt
/// over the distance to the axis.
pub fn curvature_by_differences(s: &dyn Fn(f64) -> f64, rho: f64, h: f64) -> (f64, f64) {
    let (m2, m1, p1, p2) = (s(rho - 2.0 * h), s(rho - h), s(rho + h), s(rho + 2.0 * h));
    let s0 = s(rho);
    let slope = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
    let bend = (-m2 + 16.0 * m1 - 30.0 * s0 + 16.0 * p1 - p2) / (12.0 * h * h);
    let k_meridian = bend / (1.0 + slope * slope).powf(1.5);
    let k_azimuth = slope.atan().sin() / rho;
    (-0.5 * (k_meridian + k_azimuth), k_meridian * k_azimuth)
}
