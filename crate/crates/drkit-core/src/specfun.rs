//! Scalar special functions: Gamma, generalized Laguerre polynomials, the
//! modified Bessel function K_nu, and a numerically careful sinh(x)/x
//! family including a jet-valued version of y -> sinh(sqrt(y))/sqrt(y).

use crate::jet::Jet;
use crate::quad::adaptive_gk;
use crate::{DrError, Result};

/// Lanczos approximation coefficients (g = 7, 9 terms).
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_series(x: f64) -> f64 {
    // x is the shifted argument (original minus 1).
    let mut a = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    a
}

/// Gamma function for real arguments (poles rejected).
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(DrError::Domain(format!("gamma of non-finite {x}")));
    }
    if x <= 0.0 && x == x.floor() {
        return Err(DrError::Domain(format!("gamma pole at {x}")));
    }
    if x < 0.5 {
        // Reflection: Gamma(x) = pi / (sin(pi x) Gamma(1 - x)).
        let s = (std::f64::consts::PI * x).sin();
        return Ok(std::f64::consts::PI / (s * gamma_fn(1.0 - x)?));
    }
    if x > 20.0 {
        // Avoid overflow of t^{x+1/2} inside the direct form.
        return Ok(ln_gamma(x)?.exp());
    }
    let xs = x - 1.0;
    let t = xs + LANCZOS_G + 0.5;
    Ok((2.0 * std::f64::consts::PI).sqrt()
        * t.powf(xs + 0.5)
        * (-t).exp()
        * lanczos_series(xs))
}

/// ln Gamma(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(DrError::Domain(format!("ln_gamma needs x > 0, got {x}")));
    }
    if x < 0.5 {
        let s = (std::f64::consts::PI * x).sin();
        return Ok(std::f64::consts::PI.ln() - s.ln() - ln_gamma(1.0 - x)?);
    }
    let xs = x - 1.0;
    let t = xs + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * std::f64::consts::PI).ln() + (xs + 0.5) * t.ln() - t
        + lanczos_series(xs).ln())
}

/// Generalized Laguerre polynomial L_ell^alpha(t) by the stable three-term
/// recurrence (k+1) L_{k+1} = (2k+1+alpha-t) L_k - (k+alpha) L_{k-1}.
pub fn laguerre(ell: usize, alpha: f64, t: f64) -> f64 {
    if ell == 0 {
        return 1.0;
    }
    let mut lm1 = 1.0;
    let mut l = 1.0 + alpha - t;
    for k in 1..ell {
        let kf = k as f64;
        let lnext = ((2.0 * kf + 1.0 + alpha - t) * l - (kf + alpha) * lm1) / (kf + 1.0);
        lm1 = l;
        l = lnext;
    }
    l
}

/// Modified Bessel function K_nu(x) for x > 0 via the integral
/// representation K_nu(x) = int_0^inf exp(-x cosh(th)) cosh(nu th) dth.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(DrError::Domain(format!("bessel_k needs x > 0, got {x}")));
    }
    let anu = nu.abs();
    // Truncation point: x (cosh th - 1) - anu th >= 46 makes the tail
    // negligible relative to the e^{-x} scale of the value.
    let excess = |th: f64| x * (th.cosh() - 1.0) - anu * th - 46.0;
    let mut lo = 0.0;
    let mut hi = 1.0;
    while excess(hi) < 0.0 && hi < 800.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let th_max = hi;
    let scale = (-x).exp();
    let f = |th: f64| (-(x * (th.cosh() - 1.0))).exp() * (anu * th).cosh() * scale;
    let (v, _err) = adaptive_gk(&f, 0.0, th_max, scale.max(1e-300) * 1e-14, 1e-13, 48)?;
    Ok(v)
}

/// sinh(x)/x, accurate near zero and overflow-free for |x| <= ~700.
pub fn sinhc(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 0.1 {
        let y = x * x;
        1.0 + y / 6.0 * (1.0 + y / 20.0 * (1.0 + y / 42.0 * (1.0 + y / 72.0)))
    } else {
        x.sinh() / x
    }
}

/// ln(sinh(x)/x) for any real x (even function), stable for large |x|.
pub fn ln_sinhc(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 0.1 {
        sinhc(ax).ln()
    } else {
        ax - (2.0 * ax).ln() + (-(-2.0 * ax).exp()).ln_1p()
    }
}

/// (S(u), T(u)) = (u/sinh(u), u/tanh(u)); S(0) = T(0) = 1, T >= 1.
pub fn st_funcs(u: f64) -> (f64, f64) {
    let au = u.abs();
    if au < 0.1 {
        let s = 1.0 / sinhc(au);
        (s, au.cosh() * s)
    } else {
        let e2 = (-2.0 * au).exp();
        let denom = 1.0 - e2;
        let s = 2.0 * au * (-au).exp() / denom;
        let t = au * (1.0 + e2) / denom;
        (s, t)
    }
}

/// Jet of y -> sinh(sqrt(y))/sqrt(y) = sum_k y^k/(2k+1)!, valid for all
/// y >= 0 including a base point at or near zero.
pub fn jet_sinhc_sqrt(y: &Jet) -> Result<Jet> {
    let y0 = y.value();
    if !(y0 >= 0.0) {
        return Err(DrError::Domain(format!("jet_sinhc_sqrt needs y >= 0, got {y0}")));
    }
    if y0 <= 4.0 {
        // Taylor coefficients of the entire series recentered at y0:
        // c_m = sum_{k>=m} C(k, m) y0^{k-m} / (2k+1)!.
        let order = y.order();
        let mut coeffs = vec![0.0; order + 1];
        for (m, cm) in coeffs.iter_mut().enumerate() {
            // term at k = m is 1/(2m+1)!.
            let mut term = 1.0;
            for i in 1..=(2 * m + 1) {
                term /= i as f64;
            }
            let mut acc = term;
            let mut k = m as f64;
            loop {
                // ratio term(k+1)/term(k) = (k+1)/(k+1-m) * y0/((2k+2)(2k+3))
                term *= (k + 1.0) / (k + 1.0 - m as f64) * y0
                    / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
                acc += term;
                k += 1.0;
                if term.abs() <= 1e-20 * (acc.abs() + 1e-30) || k > 300.0 {
                    break;
                }
            }
            *cm = acc;
        }
        Ok(Jet::compose(&Jet::from_coeffs(&coeffs), y))
    } else {
        let s = y.sqrt()?;
        s.sinh().try_div(&s)
    }
}
