//! The solvable extension S = N x (0, inf) of an H-type group N (a
//! Damek-Ricci space when N is H-type): group operations, modular
//! function, radial distance, closed-form derivatives of cosh^2(r/2),
//! left-invariant vector fields, admissible weights with their radial
//! reduction densities, and a deterministic integrator for the right Haar
//! measure dx dz da/a.
//!
//! Points carry coordinates (x, z, a) with the product
//! `(x,z,a)(x',z',a') = (x + a^{1/2} x', z + a z' + a^{1/2) [x,x']/2, a a')`
//! and the distance r(p) to the identity determined by
//! `cosh^2(r/2) = ((1 + a + |x|^2/4)^2 + |z|^2) / (4a)`.

use rayon::prelude::*;

use crate::htype::{norm, HTypeAlgebra};
use crate::quad::{adaptive_gk, gauss_legendre};
use crate::specfun::gamma_fn;
use crate::{DrError, Result};

/// Point of S in coordinates (x, z, a), a > 0.
#[derive(Clone, Debug, PartialEq)]
pub struct SPoint {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub a: f64,
}

impl SPoint {
    pub fn new(x: Vec<f64>, z: Vec<f64>, a: f64) -> SPoint {
        SPoint { x, z, a }
    }
}

pub fn identity_s(alg: &HTypeAlgebra) -> SPoint {
    SPoint::new(vec![0.0; alg.dim_v], vec![0.0; alg.dim_z], 1.0)
}

fn check_dims(alg: &HTypeAlgebra, p: &SPoint) -> Result<()> {
    if p.x.len() != alg.dim_v || p.z.len() != alg.dim_z || !(p.a > 0.0) {
        return Err(DrError::DimMismatch(format!(
            "point dims ({}, {}, a={}) vs algebra ({}, {})",
            p.x.len(),
            p.z.len(),
            p.a,
            alg.dim_v,
            alg.dim_z
        )));
    }
    Ok(())
}

/// Group law of S.
pub fn compose_s(alg: &HTypeAlgebra, p: &SPoint, q: &SPoint) -> Result<SPoint> {
    check_dims(alg, p)?;
    check_dims(alg, q)?;
    let sa = p.a.sqrt();
    let x: Vec<f64> = p.x.iter().zip(&q.x).map(|(u, v)| u + sa * v).collect();
    let br = alg.bracket_xy(&p.x, &q.x);
    let z: Vec<f64> = p
        .z
        .iter()
        .zip(&q.z)
        .zip(&br)
        .map(|((u, v), w)| u + p.a * v + 0.5 * sa * w)
        .collect();
    Ok(SPoint::new(x, z, p.a * q.a))
}

/// `(x, z, a)^{-1} = (-a^{-1/2} x, -a^{-1} z, a^{-1})`.
pub fn inverse_s(p: &SPoint) -> SPoint {
    let ra = 1.0 / p.a;
    SPoint::new(
        p.x.iter().map(|v| -ra.sqrt() * v).collect(),
        p.z.iter().map(|v| -ra * v).collect(),
        ra,
    )
}

/// Modular function delta(p) = a^{-Q} of the right Haar measure.
pub fn modular_fn(alg: &HTypeAlgebra, p: &SPoint) -> f64 {
    p.a.powf(-alg.q_hom())
}

/// cosh^2(r(p)/2) in closed form.
pub fn cosh2_half(p: &SPoint) -> f64 {
    let q = 1.0 + p.a + 0.25 * norm(&p.x).powi(2);
    (q * q + norm(&p.z).powi(2)) / (4.0 * p.a)
}

/// Distance to the identity from cylindrical coordinates
/// (xi = |x|, zeta = |z|, u = log a); stable for very large arguments.
pub fn radius_cyl(xi: f64, zeta: f64, u: f64) -> f64 {
    // ln(1 + e^u + xi^2/4) via log-sum-exp.
    let t3 = if xi > 0.0 { 2.0 * (0.5 * xi).ln() } else { f64::NEG_INFINITY };
    let m = 0.0f64.max(u).max(t3);
    let mut s = (-m).exp() + (u - m).exp();
    if t3.is_finite() {
        s += (t3 - m).exp();
    }
    let lnp = m + s.ln();
    let l2z = if zeta > 0.0 { 2.0 * zeta.ln() } else { f64::NEG_INFINITY };
    let mm = (2.0 * lnp).max(l2z);
    let mut num = (2.0 * lnp - mm).exp();
    if l2z.is_finite() {
        num += (l2z - mm).exp();
    }
    let ln_ch2 = mm + num.ln() - (4.0f64).ln() - u;
    if ln_ch2 <= 0.0 {
        return 0.0;
    }
    if ln_ch2 > 80.0 {
        // acosh(w) ~ ln(2w) for huge w, so r ~ ln(4 ch2).
        return ln_ch2 + (4.0f64).ln();
    }
    let ch2 = ln_ch2.exp();
    2.0 * ch2.sqrt().acosh()
}

/// Geodesic distance r(p) from the identity.
pub fn distance_s(p: &SPoint) -> f64 {
    radius_cyl(norm(&p.x), norm(&p.z), p.a.ln())
}

/// Closed-form left-invariant derivatives of C(p) = cosh^2(r(p)/2),
/// ordered [X_0 C, X_1 C, ..., X_{dv} C, X_{dv+1} C, ..., X_{dv+dz} C].
pub fn grad_cosh2(alg: &HTypeAlgebra, p: &SPoint) -> Result<Vec<f64>> {
    check_dims(alg, p)?;
    let c = cosh2_half(p);
    let q = 1.0 + p.a + 0.25 * norm(&p.x).powi(2);
    let mut out = Vec::with_capacity(alg.n_dim() + 1);
    out.push(-c + 0.5 * q);
    let inv_sqrt_a = 1.0 / p.a.sqrt();
    for j in 0..alg.dim_v {
        // [x, e_j].z
        let mut bz = 0.0;
        for i in 0..alg.dim_v {
            if p.x[i] == 0.0 {
                continue;
            }
            for k in 0..alg.dim_z {
                bz += p.x[i] * alg.bracket_entry(i, j, k) * p.z[k];
            }
        }
        out.push(0.25 * inv_sqrt_a * (q * p.x[j] + bz));
    }
    for k in 0..alg.dim_z {
        out.push(0.5 * p.z[k]);
    }
    Ok(out)
}

fn flow_point_s(alg: &HTypeAlgebra, j: usize, s: f64) -> SPoint {
    let mut q = identity_s(alg);
    if j == 0 {
        q.a = s.exp();
    } else if j <= alg.dim_v {
        q.x[j - 1] = s;
    } else {
        q.z[j - 1 - alg.dim_v] = s;
    }
    q
}

/// Left-invariant derivative `X_j f(p)` for `j = 0..=dv+dz` (j = 0 is the
/// a-direction `a d/da`), via a 4th-order flow stencil with one Richardson
/// step.  `step <= 0` selects `1e-4 (1 + |x| + |z| + |log a|)`.
pub fn left_invariant_derivative_s(
    alg: &HTypeAlgebra,
    j: usize,
    f: &dyn Fn(&SPoint) -> f64,
    p: &SPoint,
    step: f64,
) -> Result<f64> {
    if j > alg.n_dim() {
        return Err(DrError::Invalid(format!(
            "direction {j} out of range 0..={}",
            alg.n_dim()
        )));
    }
    check_dims(alg, p)?;
    let pnorm = norm(&p.x) + norm(&p.z) + p.a.ln().abs();
    let h = if step > 0.0 { step } else { 1e-4 * (1.0 + pnorm) };
    let eval = |s: f64| -> Result<f64> {
        Ok(f(&compose_s(alg, p, &flow_point_s(alg, j, s))?))
    };
    let stencil = |h: f64| -> Result<f64> {
        Ok((-eval(2.0 * h)? + 8.0 * eval(h)? - 8.0 * eval(-h)? + eval(-2.0 * h)?) / (12.0 * h))
    };
    let d_h = stencil(h)?;
    let d_h2 = stencil(0.5 * h)?;
    Ok((16.0 * d_h2 - d_h) / 15.0)
}

/// Two-sided bracket power: `r^[p, q]` equals `r^p` for `r <= 1` and `r^q`
/// for `r > 1`.
pub fn bracket_pow(r: f64, p_small: f64, q_large: f64) -> f64 {
    if r <= 1.0 {
        r.powf(p_small)
    } else {
        r.powf(q_large)
    }
}

/// Admissible weight `w(p) = a^s |log a|^[g, gt] |x|^b |z|^c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightSpec {
    pub b: f64,
    pub c: f64,
    pub s: f64,
    pub gamma: f64,
    pub gamma_tilde: f64,
}

impl WeightSpec {
    pub fn new(b: f64, c: f64, s: f64, gamma: f64, gamma_tilde: f64) -> WeightSpec {
        WeightSpec { b, c, s, gamma, gamma_tilde }
    }

    /// The branch key e1 = b/4 + c/2 + s that selects the density shape.
    pub fn e1(&self) -> f64 {
        self.b / 4.0 + self.c / 2.0 + self.s
    }

    pub fn eval_cyl(&self, xi: f64, zeta: f64, u: f64) -> f64 {
        (self.s * u).exp()
            * bracket_pow(u.abs(), self.gamma, self.gamma_tilde)
            * xi.powf(self.b)
            * zeta.powf(self.c)
    }

    pub fn eval(&self, p: &SPoint) -> f64 {
        self.eval_cyl(norm(&p.x), norm(&p.z), p.a.ln())
    }

    /// The weight satisfying `w(p^{-1}) = w'(p)`: same (b, c, gamma,
    /// gamma_tilde), with s replaced by `-s - b/2 - c`.
    pub fn inverse_transformed(&self) -> WeightSpec {
        WeightSpec { s: -self.s - self.b / 2.0 - self.c, ..*self }
    }
}

/// Sub-regions of S, carved by the a-coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionVariant {
    /// All of S.
    Full,
    /// `{a <= e}`.
    LowA,
    /// `{a >= 1/e}`.
    HighA,
    /// `{1/e <= a <= e}`.
    MidA,
}

impl RegionVariant {
    /// Bounds of the region in u = log a (infinite when unbounded).
    pub fn u_caps(&self) -> (f64, f64) {
        match self {
            RegionVariant::Full => (f64::NEG_INFINITY, f64::INFINITY),
            RegionVariant::LowA => (f64::NEG_INFINITY, 1.0),
            RegionVariant::HighA => (-1.0, f64::INFINITY),
            RegionVariant::MidA => (-1.0, 1.0),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            RegionVariant::Full => "full",
            RegionVariant::LowA => "low_a",
            RegionVariant::HighA => "high_a",
            RegionVariant::MidA => "mid_a",
        }
    }
}

fn near_zero(x: f64) -> bool {
    x.abs() < 1e-13
}

/// Radial density phi(r) such that
/// `int_region delta^{1/2} F(r(p)) w(p) drho(p) ~ int_0^inf F(r) phi(r) dr`
/// up to two-sided constants, for every admissible profile F >= 0.
pub fn radial_reduction_density(
    alg: &HTypeAlgebra,
    w: &WeightSpec,
    variant: RegionVariant,
    r: f64,
) -> f64 {
    let q = alg.q_hom();
    let nb = alg.n_dim() as f64 + w.b + w.c + w.gamma;
    let e1 = w.e1();
    let half_bc = w.b / 4.0 + w.c / 2.0;
    let (small_pow, large_pow, kappa) = match variant {
        RegionVariant::Full => {
            if near_zero(e1) {
                (nb, 1.0 + w.gamma_tilde, q / 2.0 + half_bc)
            } else {
                (nb, w.gamma_tilde, q / 2.0 + half_bc + e1.abs())
            }
        }
        RegionVariant::LowA => {
            if near_zero(e1) {
                (nb, 1.0 + w.gamma_tilde, q / 2.0 - w.s)
            } else if e1 < 0.0 {
                (nb, w.gamma_tilde, q / 2.0 - w.s)
            } else {
                (nb, 0.0, q / 2.0 + half_bc)
            }
        }
        RegionVariant::HighA => {
            if near_zero(e1) {
                (nb, 1.0 + w.gamma_tilde, q / 2.0 + half_bc)
            } else if e1 > 0.0 {
                (nb, w.gamma_tilde, q / 2.0 + w.b / 2.0 + w.c + w.s)
            } else {
                (nb, 0.0, q / 2.0 + half_bc)
            }
        }
        RegionVariant::MidA => (nb, 0.0, q / 2.0 + half_bc),
    };
    bracket_pow(r, small_pow, large_pow) * (kappa * r).exp()
}

/// Composite weight forms whose region integrals against
/// `delta^{1/2} F(r)` reduce to `int F(r) r^[n+1, 0] e^{kappa r} dr`.
/// Forms 1 and 2 majorize the first-layer kernel factors, forms 3 and 4
/// the vertical drift factor `|1 - a^{-1}| (1 + a + |x|^2/4)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompositeForm {
    FirstLayerFull,
    FirstLayerLow,
    CenterDriftMid,
    CenterDriftFull,
}

impl CompositeForm {
    pub fn all() -> [CompositeForm; 4] {
        [
            CompositeForm::FirstLayerFull,
            CompositeForm::FirstLayerLow,
            CompositeForm::CenterDriftMid,
            CompositeForm::CenterDriftFull,
        ]
    }

    pub fn label(&self) -> &'static str {
        match self {
            CompositeForm::FirstLayerFull => "first_layer_full",
            CompositeForm::FirstLayerLow => "first_layer_low",
            CompositeForm::CenterDriftMid => "center_drift_mid",
            CompositeForm::CenterDriftFull => "center_drift_full",
        }
    }

    pub fn region(&self) -> RegionVariant {
        match self {
            CompositeForm::FirstLayerFull => RegionVariant::Full,
            CompositeForm::FirstLayerLow => RegionVariant::LowA,
            CompositeForm::CenterDriftMid => RegionVariant::MidA,
            CompositeForm::CenterDriftFull => RegionVariant::Full,
        }
    }

    /// The weight W(xi, zeta, u) multiplying `delta^{1/2} F(r)`.
    pub fn weight_cyl(&self, xi: f64, zeta: f64, u: f64) -> f64 {
        let a = u.exp();
        match self {
            CompositeForm::FirstLayerFull => {
                ((1.0 + a + 0.25 * xi * xi) * xi + xi * zeta) / a.sqrt()
            }
            CompositeForm::FirstLayerLow => {
                ((a + 0.25 * xi * xi) * xi + xi * zeta) / a.sqrt()
            }
            CompositeForm::CenterDriftMid | CompositeForm::CenterDriftFull => {
                (1.0 - 1.0 / a).abs() * (1.0 + a + 0.25 * xi * xi)
            }
        }
    }

    pub fn kappa(&self, alg: &HTypeAlgebra) -> f64 {
        let q = alg.q_hom();
        match self {
            CompositeForm::FirstLayerFull => (q + 2.0) / 2.0,
            CompositeForm::FirstLayerLow => q / 2.0 + 0.75,
            CompositeForm::CenterDriftMid => (q + 1.0) / 2.0,
            CompositeForm::CenterDriftFull => (q + 2.0) / 2.0,
        }
    }

    pub fn density(&self, alg: &HTypeAlgebra, r: f64) -> f64 {
        bracket_pow(r, alg.n_dim() as f64 + 1.0, 0.0) * (self.kappa(alg) * r).exp()
    }
}

/// Surface area of the unit sphere in R^d.
pub fn sphere_area(d: usize) -> f64 {
    2.0 * std::f64::consts::PI.powf(d as f64 / 2.0)
        / gamma_fn(d as f64 / 2.0).expect("d/2 > 0")
}

/// Integration box in cylindrical coordinates (xi, zeta, u).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HaarBox {
    pub xi_max: f64,
    pub zeta_max: f64,
    pub u_min: f64,
    pub u_max: f64,
}

impl HaarBox {
    pub fn new(xi_max: f64, zeta_max: f64, u_min: f64, u_max: f64) -> HaarBox {
        HaarBox { xi_max, zeta_max, u_min, u_max }
    }

    pub fn unbounded() -> HaarBox {
        HaarBox::new(f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY)
    }

    fn clamp_to(&self, caps: &HaarBox) -> HaarBox {
        HaarBox {
            xi_max: self.xi_max.min(caps.xi_max),
            zeta_max: self.zeta_max.min(caps.zeta_max),
            u_min: self.u_min.max(caps.u_min),
            u_max: self.u_max.min(caps.u_max),
        }
    }

    fn grow(&self, caps: &HaarBox) -> HaarBox {
        HaarBox {
            xi_max: (self.xi_max * 2.0).min(caps.xi_max),
            zeta_max: (self.zeta_max * 2.0).min(caps.zeta_max),
            u_min: (self.u_min - 4.0).max(caps.u_min),
            u_max: (self.u_max + 4.0).min(caps.u_max),
        }
    }
}

impl Default for HaarBox {
    fn default() -> HaarBox {
        HaarBox::new(4.0, 4.0, -4.0, 4.0)
    }
}

fn radial_breaks(maxv: f64) -> Vec<f64> {
    let mut v = vec![0.0];
    for head in [0.25, 0.5, 0.75, 1.0] {
        if head < maxv {
            v.push(head);
        } else {
            v.push(maxv);
            return v;
        }
    }
    let mut x = 1.0;
    while x < maxv {
        x = (2.0 * x).min(maxv);
        v.push(x);
    }
    v
}

fn u_breaks(u_min: f64, u_max: f64) -> Vec<f64> {
    let mut v = vec![u_min];
    let mut k = u_min.floor() + 1.0;
    while k < u_max {
        if k > u_min {
            v.push(k);
        }
        k += 1.0;
    }
    v.push(u_max);
    v
}

/// Integral over a fixed box of `f(xi, zeta, u)` against the radial form
/// of the right Haar measure,
/// `sigma_dv sigma_dz xi^{dv-1} zeta^{dz-1} dxi dzeta du`.
pub fn integrate_haar_box(
    alg: &HTypeAlgebra,
    f: &(dyn Fn(f64, f64, f64) -> f64 + Sync),
    bx: &HaarBox,
) -> Result<f64> {
    if !(bx.xi_max > 0.0) || !(bx.zeta_max > 0.0) || !(bx.u_max > bx.u_min) {
        return Err(DrError::Invalid(format!("degenerate box {bx:?}")));
    }
    let (gx, gw) = gauss_legendre(12);
    let xi_b = radial_breaks(bx.xi_max);
    let zeta_b = radial_breaks(bx.zeta_max);
    let u_b = u_breaks(bx.u_min, bx.u_max);
    let dv = alg.dim_v as i32;
    let dz = alg.dim_z as i32;

    let mut panels = Vec::new();
    for ix in 0..xi_b.len() - 1 {
        for iz in 0..zeta_b.len() - 1 {
            for iu in 0..u_b.len() - 1 {
                panels.push((
                    xi_b[ix],
                    xi_b[ix + 1],
                    zeta_b[iz],
                    zeta_b[iz + 1],
                    u_b[iu],
                    u_b[iu + 1],
                ));
            }
        }
    }

    let (px, _) = gauss_legendre(4);
    let parts: Vec<f64> = panels
        .par_iter()
        .map(|&(x0, x1, z0, z1, u0, u1)| {
            let hx = 0.5 * (x1 - x0);
            let cx = 0.5 * (x1 + x0);
            let hz = 0.5 * (z1 - z0);
            let cz = 0.5 * (z1 + z0);
            let hu = 0.5 * (u1 - u0);
            let cu = 0.5 * (u1 + u0);
            // Cheap support probe: integrands vanish identically outside a
            // radius ball, and most panels of the bounding box lie wholly
            // outside it.  A panel whose coarse scan is exactly zero
            // everywhere is skipped; any nonzero value triggers the full
            // product rule.
            let mut touched = false;
            'probe: for &xn in &px {
                for &zn in &px {
                    for &un in &px {
                        if f(cx + hx * xn, cz + hz * zn, cu + hu * un) != 0.0 {
                            touched = true;
                            break 'probe;
                        }
                    }
                }
            }
            if !touched {
                return 0.0;
            }
            let mut s = 0.0;
            for (i, &xn) in gx.iter().enumerate() {
                let xi = cx + hx * xn;
                let wx = gw[i] * hx * xi.powi(dv - 1);
                for (j, &zn) in gx.iter().enumerate() {
                    let zeta = cz + hz * zn;
                    let wz = gw[j] * hz * zeta.powi(dz - 1);
                    for (k, &un) in gx.iter().enumerate() {
                        let u = cu + hu * un;
                        s += f(xi, zeta, u) * wx * wz * gw[k] * hu;
                    }
                }
            }
            s
        })
        .collect();

    let total: f64 = parts.iter().sum();
    Ok(total * sphere_area(alg.dim_v) * sphere_area(alg.dim_z))
}

/// Haar integral with automatic box expansion: the box grows (within
/// `caps`) until two consecutive expansions change the value by less than
/// `rel_tol` relative.  Deterministic: panel sums are accumulated in a
/// fixed order.
pub fn integrate_haar(
    alg: &HTypeAlgebra,
    f: &(dyn Fn(f64, f64, f64) -> f64 + Sync),
    start: &HaarBox,
    caps: &HaarBox,
    rel_tol: f64,
) -> Result<f64> {
    let mut bx = start.clamp_to(caps);
    let mut total = integrate_haar_box(alg, f, &bx)?;
    let mut consec_small = 0;
    for _ in 0..60 {
        let grown = bx.grow(caps);
        if grown == bx {
            // Caps reached in every direction; the region is fully covered.
            return Ok(total);
        }
        let t2 = integrate_haar_box(alg, f, &grown)?;
        let delta = t2 - total;
        total = t2;
        bx = grown;
        if delta.abs() <= 0.5 * rel_tol * total.abs().max(1e-300) {
            consec_small += 1;
            if consec_small >= 2 {
                return Ok(total);
            }
        } else {
            consec_small = 0;
        }
    }
    Err(DrError::QuadratureNonConvergence { estimate: total, error_bound: f64::NAN })
}

/// Radial profiles F(r) used by reduction-ratio checks.
#[derive(Clone, Copy, Debug)]
pub enum RadialProfile {
    /// F = 1 on [0, cut], 0 beyond.
    Indicator(f64),
    /// F(r) = exp(-r^2 / sigma).
    Gaussian(f64),
}

impl RadialProfile {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            RadialProfile::Indicator(cut) => {
                if r <= cut {
                    1.0
                } else {
                    0.0
                }
            }
            RadialProfile::Gaussian(sigma) => (-r * r / sigma).exp(),
        }
    }

    /// Radius beyond which F(r) e^{kappa r} is negligible.
    fn support_radius(&self, kappa: f64) -> f64 {
        match *self {
            RadialProfile::Indicator(cut) => cut,
            RadialProfile::Gaussian(sigma) => {
                let k = kappa.max(0.0);
                0.5 * (k * sigma + (k * k * sigma * sigma + 4.0 * sigma * 140.0).sqrt()) + 10.0
            }
        }
    }

    pub fn label(&self) -> String {
        match *self {
            RadialProfile::Indicator(cut) => format!("indicator_{cut}"),
            RadialProfile::Gaussian(sigma) => format!("gaussian_{sigma}"),
        }
    }
}

/// Outcome of a two-sided reduction check: the region integral, the
/// one-dimensional reduced integral, and their ratio.
#[derive(Clone, Copy, Debug)]
pub struct RatioReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

fn region_caps(variant: RegionVariant) -> HaarBox {
    let (u_min, u_max) = variant.u_caps();
    HaarBox { u_min, u_max, ..HaarBox::unbounded() }
}

fn reduced_integral(
    density: &dyn Fn(f64) -> f64,
    profile: RadialProfile,
    kappa: f64,
) -> Result<f64> {
    let rmax = profile.support_radius(kappa);
    let (v, _) = adaptive_gk(&|r: f64| profile.eval(r) * density(r), 0.0, rmax, 1e-300, 1e-10, 48)?;
    Ok(v)
}

/// Ratio of the weighted region integral of `delta^{1/2} F(r) w` to its
/// one-dimensional reduction `int F phi dr`.
pub fn weighted_radial_ratio(
    alg: &HTypeAlgebra,
    w: &WeightSpec,
    variant: RegionVariant,
    profile: RadialProfile,
    rel_tol: f64,
) -> Result<RatioReport> {
    let qh = alg.q_hom();
    let f = move |xi: f64, zeta: f64, u: f64| {
        let r = radius_cyl(xi, zeta, u);
        let fv = profile.eval(r);
        if fv == 0.0 {
            return 0.0;
        }
        (-qh * u / 2.0).exp() * fv * w.eval_cyl(xi, zeta, u)
    };
    let lhs = integrate_haar(alg, &f, &HaarBox::default(), &region_caps(variant), rel_tol)?;
    let kappa_hint = qh / 2.0 + w.b.abs() + w.c.abs() + w.s.abs() + 1.0;
    let rhs = reduced_integral(
        &|r| radial_reduction_density(alg, w, variant, r),
        profile,
        kappa_hint,
    )?;
    if rhs == 0.0 {
        return Err(DrError::Invalid("reduced integral vanished".into()));
    }
    Ok(RatioReport { lhs, rhs, ratio: lhs / rhs })
}

/// Ratio check for the four composite weight forms.
pub fn composite_weight_ratio(
    alg: &HTypeAlgebra,
    form: CompositeForm,
    profile: RadialProfile,
    rel_tol: f64,
) -> Result<RatioReport> {
    let qh = alg.q_hom();
    let f = move |xi: f64, zeta: f64, u: f64| {
        let r = radius_cyl(xi, zeta, u);
        let fv = profile.eval(r);
        if fv == 0.0 {
            return 0.0;
        }
        (-qh * u / 2.0).exp() * fv * form.weight_cyl(xi, zeta, u)
    };
    let lhs = integrate_haar(alg, &f, &HaarBox::default(), &region_caps(form.region()), rel_tol)?;
    let rhs = reduced_integral(&|r| form.density(alg, r), profile, form.kappa(alg))?;
    if rhs == 0.0 {
        return Err(DrError::Invalid("reduced integral vanished".into()));
    }
    Ok(RatioReport { lhs, rhs, ratio: lhs / rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::htype::{build_algebra, AlgebraKind};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn assert_rel(a: f64, b: f64, tol: f64) {
        let scale = a.abs().max(b.abs()).max(1e-300);
        assert!((a - b).abs() <= tol * scale, "expected {a} ~ {b} rel tol {tol}");
    }

    fn h1() -> HTypeAlgebra {
        build_algebra(&AlgebraKind::Heisenberg(1)).unwrap()
    }

    fn q1() -> HTypeAlgebra {
        build_algebra(&AlgebraKind::Quaternionic(1)).unwrap()
    }

    fn rand_point(alg: &HTypeAlgebra, rng: &mut ChaCha8Rng) -> SPoint {
        SPoint::new(
            (0..alg.dim_v).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect(),
            (0..alg.dim_z).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect(),
            (rng.gen::<f64>() * 2.0 - 1.0).exp(),
        )
    }

    #[test]
    fn group_law_example_and_axioms() {
        let alg = h1();
        let p = SPoint::new(vec![1.0, 0.0], vec![0.0], 4.0);
        let q = SPoint::new(vec![0.0, 1.0], vec![0.0], 1.0);
        let pq = compose_s(&alg, &p, &q).unwrap();
        assert_eq!(pq.x, vec![1.0, 2.0]);
        assert_rel(pq.z[0], 1.0, 1e-15);
        assert_rel(pq.a, 4.0, 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for alg in [h1(), q1()] {
            for _ in 0..200 {
                let a = rand_point(&alg, &mut rng);
                let b = rand_point(&alg, &mut rng);
                let c = rand_point(&alg, &mut rng);
                let l = compose_s(&alg, &compose_s(&alg, &a, &b).unwrap(), &c).unwrap();
                let r = compose_s(&alg, &a, &compose_s(&alg, &b, &c).unwrap()).unwrap();
                for i in 0..alg.dim_v {
                    assert_rel(l.x[i], r.x[i], 1e-12);
                }
                for k in 0..alg.dim_z {
                    assert_rel(l.z[k], r.z[k], 1e-12);
                }
                assert_rel(l.a, r.a, 1e-12);

                let e = compose_s(&alg, &a, &inverse_s(&a)).unwrap();
                assert!(norm(&e.x) + norm(&e.z) + (e.a - 1.0).abs() <= 1e-13);
            }
        }
    }

    #[test]
    fn modular_function_is_a_homomorphism() {
        let alg = q1();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let p = rand_point(&alg, &mut rng);
            let q = rand_point(&alg, &mut rng);
            let pq = compose_s(&alg, &p, &q).unwrap();
            assert_rel(modular_fn(&alg, &pq), modular_fn(&alg, &p) * modular_fn(&alg, &q), 1e-12);
            assert_rel(modular_fn(&alg, &inverse_s(&p)), 1.0 / modular_fn(&alg, &p), 1e-12);
        }
    }

    #[test]
    fn distance_reference_points_and_invariances() {
        let alg = h1();
        assert_eq!(distance_s(&identity_s(&alg)), 0.0);
        // Pure a-displacement: r((0, 0, e^t)) = |t|.
        for &t in &[1.0f64, -1.0, 2.5, 1e-3] {
            let p = SPoint::new(vec![0.0; 2], vec![0.0], t.exp());
            assert_rel(distance_s(&p), t.abs(), 1e-9);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for alg in [h1(), q1()] {
            for _ in 0..300 {
                let p = rand_point(&alg, &mut rng);
                let r = distance_s(&p);
                assert_rel(distance_s(&inverse_s(&p)), r, 1e-11);
                assert!(r + 1e-12 >= p.a.ln().abs());
                // cosh2_half agrees with the log-stable cylindrical route.
                let direct = cosh2_half(&p);
                let ln_route = radius_cyl(norm(&p.x), norm(&p.z), p.a.ln());
                assert_rel(2.0 * direct.sqrt().acosh(), ln_route, 1e-10);
            }
        }
        // Log-stable branch for enormous coordinates.
        let r_big = radius_cyl(1e160, 0.0, 0.0);
        // cosh^2(r/2) ~ xi^4/64: r ~ 4 ln xi + ln(4/64) + ...
        assert_rel(r_big, 4.0 * 1e160f64.ln() - (16.0f64).ln(), 1e-9);
    }

    #[test]
    fn closed_form_gradient_matches_flow_derivatives() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for alg in [h1(), q1()] {
            for _ in 0..20 {
                let p = rand_point(&alg, &mut rng);
                let grad = grad_cosh2(&alg, &p).unwrap();
                for j in 0..=alg.n_dim() {
                    let flow =
                        left_invariant_derivative_s(&alg, j, &|q| cosh2_half(q), &p, -1.0)
                            .unwrap();
                    assert_rel(grad[j], flow, 1e-7);
                }
            }
        }
    }

    #[test]
    fn vector_fields_kill_or_scale_the_modular_root() {
        // X_0 delta^{1/2} = -(Q/2) delta^{1/2}; X_j delta^{1/2} = 0 for j >= 1.
        let alg = h1();
        let q = alg.q_hom();
        let f = move |p: &SPoint| p.a.powf(-q / 2.0);
        let p = SPoint::new(vec![0.4, -0.3], vec![0.2], 1.7);
        let d0 = left_invariant_derivative_s(&alg, 0, &f, &p, -1.0).unwrap();
        assert_rel(d0, -q / 2.0 * f(&p), 1e-9);
        for j in 1..=alg.n_dim() {
            let dj = left_invariant_derivative_s(&alg, j, &f, &p, -1.0).unwrap();
            assert!(dj.abs() <= 1e-12, "X_{j} delta^(1/2) = {dj}");
        }
    }

    #[test]
    fn weight_inverse_transform_identity() {
        let alg = h1();
        let w = WeightSpec::new(1.0, 2.0, -0.7, 0.3, 1.1);
        let wi = w.inverse_transformed();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let p = rand_point(&alg, &mut rng);
            let pi = inverse_s(&p);
            // |x(p^{-1})| = a^{-1/2}|x|, |z(p^{-1})| = a^{-1}|z|: the exact
            // identity is w(p^{-1}) = a^{-b/2 - c - s} |..| = w'(p) only in
            // the a-power; the |log a| bracket is invariant.
            assert_rel(w.eval(&pi), wi.eval(&p), 1e-11);
        }
    }

    #[test]
    fn branch_key_values_for_the_reference_weights() {
        let cases = [
            (WeightSpec::new(0.0, 0.0, 0.0, 0.0, 0.0), 0.0),
            (WeightSpec::new(1.0, 0.0, -0.5, 0.0, 0.0), -0.25),
            (WeightSpec::new(0.0, 1.0, -0.5, 0.0, 0.0), 0.0),
            (WeightSpec::new(2.0, 0.0, -0.5, 0.0, 0.0), 0.0),
        ];
        for (w, e1) in cases {
            assert_eq!(w.e1(), e1);
        }
    }

    #[test]
    fn density_branches_are_continuous_in_the_weight() {
        // On LowA with e1 = 0, the exponent q/2 - s equals q/2 + b/4 + c/2,
        // matching the Full-region branch.
        let alg = h1();
        let w = WeightSpec::new(2.0, 0.0, -0.5, 0.0, 0.0);
        for &r in &[0.3, 1.0, 2.0, 7.0] {
            let low = radial_reduction_density(&alg, &w, RegionVariant::LowA, r);
            let full = radial_reduction_density(&alg, &w, RegionVariant::Full, r);
            assert_rel(low, full, 1e-12);
        }
    }

    #[test]
    fn sphere_areas() {
        assert_rel(sphere_area(1), 2.0, 1e-13);
        assert_rel(sphere_area(2), 2.0 * std::f64::consts::PI, 1e-13);
        assert_rel(sphere_area(3), 4.0 * std::f64::consts::PI, 1e-13);
        assert_rel(sphere_area(4), 2.0 * std::f64::consts::PI.powi(2), 1e-13);
    }

    #[test]
    fn haar_integrator_gaussian_oracles() {
        // f = exp(-xi^2 - zeta^2 - u^2) integrates to the product of
        // Euclidean Gaussian integrals in (x, z, u).
        let f = |xi: f64, zeta: f64, u: f64| (-xi * xi - zeta * zeta - u * u).exp();
        let pi = std::f64::consts::PI;
        let v1 = integrate_haar(&h1(), &f, &HaarBox::default(), &HaarBox::unbounded(), 1e-10)
            .unwrap();
        assert_rel(v1, pi * pi, 1e-8);
        let v2 = integrate_haar(&q1(), &f, &HaarBox::default(), &HaarBox::unbounded(), 1e-10)
            .unwrap();
        assert_rel(v2, pi.powi(4), 1e-8);
    }

    #[test]
    fn haar_integrator_respects_u_translation_and_caps() {
        let f = |xi: f64, zeta: f64, u: f64| (-xi * xi - zeta * zeta - (u - 0.7) * (u - 0.7)).exp();
        let g = |xi: f64, zeta: f64, u: f64| (-xi * xi - zeta * zeta - u * u).exp();
        let alg = h1();
        let vf = integrate_haar(&alg, &f, &HaarBox::default(), &HaarBox::unbounded(), 1e-10)
            .unwrap();
        let vg = integrate_haar(&alg, &g, &HaarBox::default(), &HaarBox::unbounded(), 1e-10)
            .unwrap();
        assert_rel(vf, vg, 1e-8);

        // A capped u-range only counts the in-region mass.
        let caps = HaarBox { u_max: 0.0, ..HaarBox::unbounded() };
        let vh = integrate_haar(&alg, &g, &HaarBox::default(), &caps, 1e-10).unwrap();
        // int_{-inf}^0 e^{-u^2} = sqrt(pi)/2: exactly half the full value.
        assert_rel(vh, 0.5 * vg, 1e-7);
    }

    #[test]
    fn reduction_ratio_smoke_for_the_trivial_weight() {
        // For w = 1 and a Gaussian profile the region integral and its
        // radial reduction agree up to a moderate two-sided constant.
        let alg = h1();
        let w = WeightSpec::new(0.0, 0.0, 0.0, 0.0, 0.0);
        let rep = weighted_radial_ratio(
            &alg,
            &w,
            RegionVariant::Full,
            RadialProfile::Gaussian(1.0),
            1e-7,
        )
        .unwrap();
        assert!(rep.lhs > 0.0 && rep.rhs > 0.0);
        assert!(
            rep.ratio > 0.02 && rep.ratio < 50.0,
            "ratio {} out of generous band",
            rep.ratio
        );
    }
}
