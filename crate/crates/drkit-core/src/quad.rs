//! Quadrature: an embedded Gauss–Kronrod 15/7 pair with adaptive bisection,
//! substitutions for inverse-square-root endpoint singularities and for
//! half-line integrals, and Golub–Welsch construction of Gauss–Legendre and
//! generalized Gauss–Laguerre rules.
//!
//! All routines are generic over [`QuadVal`], so the same adaptive driver
//! integrates scalars, small fixed vectors, dynamic vectors, and jets.
//! Everything is deterministic: identical inputs produce bit-identical
//! results.

use crate::jet::{Jet, JET_MAX};
use crate::{DrError, Result};

/// Values that can be accumulated by the quadrature driver.
pub trait QuadVal: Clone + Send + Sync {
    fn qv_zero() -> Self;
    fn qv_add(&self, o: &Self) -> Self;
    fn qv_sub(&self, o: &Self) -> Self;
    fn qv_scale(&self, w: f64) -> Self;
    /// Magnitude used for error control (a sup-type norm).
    fn qv_norm(&self) -> f64;
}

impl QuadVal for f64 {
    fn qv_zero() -> Self {
        0.0
    }
    fn qv_add(&self, o: &Self) -> Self {
        self + o
    }
    fn qv_sub(&self, o: &Self) -> Self {
        self - o
    }
    fn qv_scale(&self, w: f64) -> Self {
        self * w
    }
    fn qv_norm(&self) -> f64 {
        self.abs()
    }
}

impl QuadVal for [f64; 3] {
    fn qv_zero() -> Self {
        [0.0; 3]
    }
    fn qv_add(&self, o: &Self) -> Self {
        [self[0] + o[0], self[1] + o[1], self[2] + o[2]]
    }
    fn qv_sub(&self, o: &Self) -> Self {
        [self[0] - o[0], self[1] - o[1], self[2] - o[2]]
    }
    fn qv_scale(&self, w: f64) -> Self {
        [self[0] * w, self[1] * w, self[2] * w]
    }
    fn qv_norm(&self) -> f64 {
        self[0].abs().max(self[1].abs()).max(self[2].abs())
    }
}

/// Empty vectors act as a universal zero so accumulators need no size hint.
impl QuadVal for Vec<f64> {
    fn qv_zero() -> Self {
        Vec::new()
    }
    fn qv_add(&self, o: &Self) -> Self {
        if self.is_empty() {
            return o.clone();
        }
        if o.is_empty() {
            return self.clone();
        }
        assert_eq!(self.len(), o.len(), "QuadVal Vec length mismatch");
        self.iter().zip(o).map(|(a, b)| a + b).collect()
    }
    fn qv_sub(&self, o: &Self) -> Self {
        if o.is_empty() {
            return self.clone();
        }
        if self.is_empty() {
            return o.iter().map(|b| -b).collect();
        }
        assert_eq!(self.len(), o.len(), "QuadVal Vec length mismatch");
        self.iter().zip(o).map(|(a, b)| a - b).collect()
    }
    fn qv_scale(&self, w: f64) -> Self {
        self.iter().map(|a| a * w).collect()
    }
    fn qv_norm(&self) -> f64 {
        self.iter().fold(0.0, |m, a| m.max(a.abs()))
    }
}

impl QuadVal for Jet {
    fn qv_zero() -> Self {
        Jet::constant(0.0, JET_MAX - 1)
    }
    fn qv_add(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn qv_sub(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn qv_scale(&self, w: f64) -> Self {
        self.scale(w)
    }
    fn qv_norm(&self) -> f64 {
        self.coeffs().iter().fold(0.0, |m, a| m.max(a.abs()))
    }
}

// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
// Abscissae are symmetric; XGK[7] = 0. The embedded Gauss nodes are
// XGK[1], XGK[3], XGK[5] (and the center) with weights WG.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One Gauss–Kronrod 15/7 panel; returns (kronrod, gauss) estimates.
pub fn gk15_pair<V: QuadVal>(f: &dyn Fn(f64) -> V, a: f64, b: f64) -> (V, V) {
    let hc = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kron = fc.qv_scale(WGK[7]);
    let mut gauss = fc.qv_scale(WG[3]);
    for i in 0..7 {
        let fl = f(mid - hc * XGK[i]);
        let fr = f(mid + hc * XGK[i]);
        let s = fl.qv_add(&fr);
        kron = kron.qv_add(&s.qv_scale(WGK[i]));
        if i % 2 == 1 {
            gauss = gauss.qv_add(&s.qv_scale(WG[(i - 1) / 2]));
        }
    }
    (kron.qv_scale(hc), gauss.qv_scale(hc))
}

fn gk15<V: QuadVal>(f: &dyn Fn(f64) -> V, a: f64, b: f64) -> (V, f64) {
    let (kron, gauss) = gk15_pair(f, a, b);
    let err = kron.qv_sub(&gauss).qv_norm();
    (kron, err)
}

/// Relative level (vs. `max|f| * width`) below which panel errors are
/// indistinguishable from f64 roundoff in the quadrature sums. Tolerances
/// tighter than this are unattainable, e.g. for oscillatory integrands whose
/// integral is exponentially smaller than their amplitude.
const NOISE_EPS: f64 = 1e-14;

/// GK15 panel plus an amplitude proxy `max_i |f(x_i)| * (b - a)`, used to
/// detect when a panel error has reached the roundoff floor.
fn gk15_amp<V: QuadVal>(f: &dyn Fn(f64) -> V, a: f64, b: f64) -> (V, f64, f64) {
    let hc = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut amp = fc.qv_norm();
    let mut kron = fc.qv_scale(WGK[7]);
    let mut gauss = fc.qv_scale(WG[3]);
    for i in 0..7 {
        let fl = f(mid - hc * XGK[i]);
        let fr = f(mid + hc * XGK[i]);
        amp = amp.max(fl.qv_norm()).max(fr.qv_norm());
        let s = fl.qv_add(&fr);
        kron = kron.qv_add(&s.qv_scale(WGK[i]));
        if i % 2 == 1 {
            gauss = gauss.qv_add(&s.qv_scale(WG[(i - 1) / 2]));
        }
    }
    let kron = kron.qv_scale(hc);
    let gauss = gauss.qv_scale(hc);
    let err = kron.qv_sub(&gauss).qv_norm();
    (kron, err, amp * (b - a))
}

fn adapt_rec<V: QuadVal>(
    f: &dyn Fn(f64) -> V,
    a: f64,
    b: f64,
    tol: f64,
    depth_left: usize,
    err_acc: &mut f64,
    amp_acc: &mut f64,
) -> V {
    let (kron, err, amp) = gk15_amp(f, a, b);
    if err <= tol.max(NOISE_EPS * amp)
        || depth_left == 0
        || (b - a) < 1e-15 * (a.abs() + b.abs() + 1.0)
    {
        *err_acc += err;
        *amp_acc += amp;
        return kron;
    }
    let mid = 0.5 * (a + b);
    let left = adapt_rec(f, a, mid, 0.5 * tol, depth_left - 1, err_acc, amp_acc);
    let right = adapt_rec(f, mid, b, 0.5 * tol, depth_left - 1, err_acc, amp_acc);
    left.qv_add(&right)
}

/// Adaptive Gauss–Kronrod integration over a finite interval.
///
/// Bisects until each panel meets its share of the tolerance (halved per
/// level, so the leaf budget telescopes to at most the requested total).
/// Returns the estimate and an error bound; errs if the bound misses
/// `max(abs_tol, rel_tol * |result|)` by more than a small safety factor.
pub fn adaptive_gk<V: QuadVal>(
    f: &dyn Fn(f64) -> V,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_depth: usize,
) -> Result<(V, f64)> {
    let (rough, _) = gk15(f, a, b);
    let tol = abs_tol.max(rel_tol * rough.qv_norm());
    let mut err = 0.0;
    let mut amp = 0.0;
    let val = adapt_rec(f, a, b, tol, max_depth, &mut err, &mut amp);
    // `tol` itself is part of the allowance: leaves that met their granted
    // budget are converged even when cancellation leaves |val| << rough.
    let allowed = 4.0
        * abs_tol
            .max(rel_tol * val.qv_norm())
            .max(NOISE_EPS * amp)
            .max(tol);
    if err > allowed {
        return Err(DrError::QuadratureNonConvergence {
            estimate: val.qv_norm(),
            error_bound: err,
        });
    }
    Ok((val, err))
}

/// Half-line integral `\int_0^\infty f(t) dt` via `t = e^v`, integrating
/// `f(e^v) e^v` over a window around `center_v` that is extended in
/// width-2 chunks until both tails are negligible.
///
/// `center_v` should sit near the logarithm of the integrand's peak
/// location; the window always spans at least `center_v ± 17` before the
/// tail test can stop extension.
pub fn integrate_halfline<V: QuadVal>(
    f: &dyn Fn(f64) -> V,
    center_v: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_depth: usize,
) -> Result<(V, f64)> {
    let g = move |v: f64| -> V {
        let t = v.exp();
        f(t).qv_scale(t)
    };
    let granted = std::cell::Cell::new(0.0f64);
    let chunk = |lo: f64, hi: f64, tol_abs: f64, err_acc: &mut f64, amp_acc: &mut f64| -> V {
        let (rough, _) = gk15(&g, lo, hi);
        let tol = tol_abs.max(0.25 * rel_tol * rough.qv_norm());
        granted.set(granted.get() + tol);
        adapt_rec(&g, lo, hi, tol, max_depth, err_acc, amp_acc)
    };
    let mut err = 0.0;
    let mut amp = 0.0;
    let mut total = chunk(
        center_v - 1.0,
        center_v + 1.0,
        abs_tol * 0.125,
        &mut err,
        &mut amp,
    );
    const MIN_CHUNKS: usize = 8;
    const MAX_CHUNKS: usize = 400;
    for dir in [1.0f64, -1.0] {
        let mut small_streak = 0usize;
        let mut edge = center_v + dir;
        for k in 0..MAX_CHUNKS {
            if dir > 0.0 && edge > 740.0 {
                break;
            }
            if dir < 0.0 && edge < -745.0 {
                break;
            }
            let nxt = edge + 2.0 * dir;
            let (lo, hi) = if dir > 0.0 { (edge, nxt) } else { (nxt, edge) };
            let tol_chunk = 0.125 * abs_tol.max(rel_tol * total.qv_norm());
            let piece = chunk(lo, hi, tol_chunk, &mut err, &mut amp);
            let piece_norm = piece.qv_norm();
            total = total.qv_add(&piece);
            edge = nxt;
            if piece_norm <= tol_chunk.max(NOISE_EPS * amp) {
                small_streak += 1;
                if small_streak >= 2 && k + 1 >= MIN_CHUNKS {
                    break;
                }
            } else {
                small_streak = 0;
            }
            if k + 1 == MAX_CHUNKS {
                return Err(DrError::QuadratureNonConvergence {
                    estimate: total.qv_norm(),
                    error_bound: f64::INFINITY,
                });
            }
        }
    }
    let allowed = 8.0
        * abs_tol
            .max(rel_tol * total.qv_norm())
            .max(NOISE_EPS * amp)
            .max(granted.get());
    if err > allowed {
        return Err(DrError::QuadratureNonConvergence {
            estimate: total.qv_norm(),
            error_bound: err,
        });
    }
    Ok((total, err))
}

/// Integral over `[0, \infty)` by geometric chunks `[0,1], [1,2], [2,4], ...`
/// stopping once two consecutive chunks are negligible.  Suitable for
/// continuous integrands with eventual decay (no substitution applied).
pub fn integrate_ray<V: QuadVal>(
    f: &dyn Fn(f64) -> V,
    abs_tol: f64,
    rel_tol: f64,
    max_depth: usize,
) -> Result<(V, f64)> {
    let mut err = 0.0;
    let mut amp = 0.0;
    let mut granted = 0.0f64;
    let mut total = {
        let (rough, _) = gk15(f, 0.0, 1.0);
        let tol = (abs_tol * 0.125).max(0.25 * rel_tol * rough.qv_norm());
        granted += tol;
        adapt_rec(f, 0.0, 1.0, tol, max_depth, &mut err, &mut amp)
    };
    let mut lo = 1.0f64;
    let mut small_streak = 0usize;
    for k in 0..200 {
        let hi = 2.0 * lo;
        let tol_chunk = 0.125 * abs_tol.max(rel_tol * total.qv_norm());
        let (rough, _) = gk15(f, lo, hi);
        let tol = tol_chunk.max(0.25 * rel_tol * rough.qv_norm());
        granted += tol;
        let piece = adapt_rec(f, lo, hi, tol, max_depth, &mut err, &mut amp);
        let piece_norm = piece.qv_norm();
        total = total.qv_add(&piece);
        lo = hi;
        if piece_norm <= tol_chunk.max(NOISE_EPS * amp) {
            small_streak += 1;
            if small_streak >= 2 && k >= 3 {
                break;
            }
        } else {
            small_streak = 0;
        }
        if k == 199 {
            return Err(DrError::QuadratureNonConvergence {
                estimate: total.qv_norm(),
                error_bound: f64::INFINITY,
            });
        }
    }
    let allowed = 8.0
        * abs_tol
            .max(rel_tol * total.qv_norm())
            .max(NOISE_EPS * amp)
            .max(granted);
    if err > allowed {
        return Err(DrError::QuadratureNonConvergence {
            estimate: total.qv_norm(),
            error_bound: err,
        });
    }
    Ok((total, err))
}

/// Integration domain for [`integrate`].
#[derive(Clone, Copy, Debug)]
pub enum Domain {
    Interval(f64, f64),
    /// `(0, \infty)`.
    HalfLine,
}

/// Endpoint/half-line substitution selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Substitution {
    #[default]
    None,
    /// `x = a + u^2` at the left endpoint of a finite interval; removes
    /// `(x-a)^{-1/2}` singularities.
    SqrtEndpoint,
    /// `t = e^v` on the half-line.
    ExpHalfline,
}

/// Tolerances and the declared substitution for [`integrate`].
#[derive(Clone, Copy, Debug)]
pub struct QuadSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub substitution: Substitution,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_subdivisions: 48,
            substitution: Substitution::None,
        }
    }
}

impl QuadSpec {
    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(DrError::Invalid("quadrature tolerances must be positive".into()));
        }
        if self.max_subdivisions < 1 {
            return Err(DrError::Invalid("max_subdivisions must be >= 1".into()));
        }
        Ok(())
    }
}

/// Scalar adaptive integration over the declared domain.
///
/// Errors with the best estimate and an error bound when the tolerance
/// cannot be met within the subdivision budget.
pub fn integrate(f: &dyn Fn(f64) -> f64, domain: Domain, spec: &QuadSpec) -> Result<f64> {
    spec.validate()?;
    match (domain, spec.substitution) {
        (Domain::Interval(a, b), Substitution::None) => {
            Ok(adaptive_gk(f, a, b, spec.abs_tol, spec.rel_tol, spec.max_subdivisions)?.0)
        }
        (Domain::Interval(a, b), Substitution::SqrtEndpoint) => {
            if b <= a {
                return Err(DrError::Invalid("empty interval".into()));
            }
            let g = move |u: f64| f(a + u * u) * 2.0 * u;
            Ok(adaptive_gk(
                &g,
                0.0,
                (b - a).sqrt(),
                spec.abs_tol,
                spec.rel_tol,
                spec.max_subdivisions,
            )?
            .0)
        }
        (Domain::Interval(..), Substitution::ExpHalfline) => Err(DrError::Invalid(
            "exp_halfline substitution requires a half-line domain".into(),
        )),
        (Domain::HalfLine, Substitution::ExpHalfline) | (Domain::HalfLine, Substitution::None) => {
            Ok(integrate_halfline(f, 0.0, spec.abs_tol, spec.rel_tol, spec.max_subdivisions)?.0)
        }
        (Domain::HalfLine, Substitution::SqrtEndpoint) => Err(DrError::Invalid(
            "sqrt_endpoint substitution requires a finite interval".into(),
        )),
    }
}

/// Nodes and weights of a Gaussian rule from its symmetric tridiagonal
/// Jacobi matrix (diagonal `d`, subdiagonal `e`, zeroth moment `mu0`),
/// via the implicit-shift QL eigenvalue iteration that also accumulates
/// the first component of each eigenvector.
pub fn gauss_from_jacobi(d: &[f64], e: &[f64], mu0: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = d.len();
    assert!(n >= 1 && e.len() + 1 >= n);
    let mut d = d.to_vec();
    let mut e: Vec<f64> = {
        let mut v = e.to_vec();
        v.resize(n, 0.0);
        v
    };
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(DrError::NoConvergence(
                    "tridiagonal QL iteration for Gaussian nodes".into(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut early = false;
            for i in (l..m).rev() {
                let mut fv = s * e[i];
                let b = c * e[i];
                r = fv.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = fv / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                fv = z[i + 1];
                z[i + 1] = s * z[i] + c * fv;
                z[i] = c * z[i] - s * fv;
            }
            if !early {
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let nodes: Vec<f64> = idx.iter().map(|&i| d[i]).collect();
    let weights: Vec<f64> = idx.iter().map(|&i| mu0 * z[i] * z[i]).collect();
    Ok((nodes, weights))
}

/// n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let d = vec![0.0; n];
    let e: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    gauss_from_jacobi(&d, &e, 2.0).expect("Gauss-Legendre construction")
}

/// n-point generalized Gauss–Laguerre rule for `\int_0^\infty x^alpha e^{-x}
/// f(x) dx`.  `mu0` must equal `Gamma(alpha + 1)` (passed in to keep this
/// module free of special-function dependencies).
pub fn gauss_laguerre(n: usize, alpha: f64, mu0: f64) -> (Vec<f64>, Vec<f64>) {
    let d: Vec<f64> = (0..n).map(|i| 2.0 * i as f64 + alpha + 1.0).collect();
    let e: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            (k * (k + alpha)).sqrt()
        })
        .collect();
    gauss_from_jacobi(&d, &e, mu0).expect("Gauss-Laguerre construction")
}
