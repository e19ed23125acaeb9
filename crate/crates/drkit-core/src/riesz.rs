//! First-order Riesz transform kernels.
//!
//! The kernel of the inverse square root of the distinguished Laplacian is
//! radial: `delta^{-1/2} k(r) = C_{dv,dz} Phi_{dv,dz}(cosh(r/2))`, where
//! Phi is built from `phi0(X) = 1/(sqrt(X^2-1) ln(X + sqrt(X^2-1)))` by
//! the derivative chain `Dt = -(1/2X) d/dX`, `Et = -d/dX` — a plain chain
//! for even dz and one extra Abel-type integral for odd dz.  Applying the
//! left-invariant fields to the radial kernel produces the first-order
//! Riesz kernels in closed form, and their large-|x| main terms are the
//! homogeneous-type functions r_0, r_j of the underlying nilpotent group.

use crate::htype::HTypeAlgebra;
use crate::jet::Jet;
use crate::quad::adaptive_gk;
use crate::space::SPoint;
use crate::specfun::gamma_fn;
use crate::{DrError, Result};

/// `C_{dv,dz} = 2^{-dv-dz-1} pi^{-(dv+dz+3)/2}`.
pub fn riesz_c_const(dv: usize, dz: usize) -> f64 {
    2.0f64.powi(-(dv as i32) - dz as i32 - 1)
        * std::f64::consts::PI.powf(-((dv + dz + 3) as f64) / 2.0)
}

/// `Ct_{dv,dz} = 2^{1-dv/2} pi^{-(dv+dz+3)/2} Gamma(dv/4+1/2) Gamma(dv/4+dz/2+1)`.
pub fn riesz_ctilde_const(dv: usize, dz: usize) -> Result<f64> {
    Ok(2.0f64.powf(1.0 - dv as f64 / 2.0)
        * std::f64::consts::PI.powf(-((dv + dz + 3) as f64) / 2.0)
        * gamma_fn(dv as f64 / 4.0 + 0.5)?
        * gamma_fn(dv as f64 / 4.0 + dz as f64 / 2.0 + 1.0)?)
}

/// Jet of `phi0(X) = 1 / (sqrt(X^2 - 1) ln(X + sqrt(X^2 - 1)))` for X > 1.
fn phi0_jet(x: &Jet) -> Result<Jet> {
    let s = x.mul(x).add_scalar(-1.0).sqrt()?;
    let acosh = x.add(&s).ln()?;
    s.mul(&acosh).recip()
}

/// Scalar phi0.
pub fn phi0(x: f64) -> Result<f64> {
    if !(x > 1.0) {
        return Err(DrError::Domain(format!("phi0 needs X > 1, got {x}")));
    }
    Ok(phi0_jet(&Jet::constant(x, 0))?.value())
}

fn check_dims(dv: usize, dz: usize) -> Result<(usize, usize)> {
    if dv < 2 || dv % 2 != 0 || dz < 1 {
        return Err(DrError::Invalid(format!(
            "Phi requires even dv >= 2 and dz >= 1, got ({dv}, {dz})"
        )));
    }
    let u_steps = if dz % 2 == 1 { (dz + 1) / 2 } else { dz / 2 };
    let v_steps = dv / 2 - 1;
    Ok((u_steps, v_steps))
}

/// Jet in Y of `Dt^{u} Et^{v} phi0` centered at y0, with `order` retained
/// output orders.
fn de_chain_jet(u_steps: usize, v_steps: usize, y0: f64, order: usize) -> Result<Jet> {
    let total = order + u_steps + v_steps;
    if total + 1 > crate::jet::JET_MAX {
        return Err(DrError::Invalid(format!(
            "derivative chain of {} steps exceeds jet capacity",
            u_steps + v_steps
        )));
    }
    let y = Jet::variable(y0, total);
    let mut f = phi0_jet(&y)?;
    for _ in 0..v_steps {
        f = f.derive()?.neg();
    }
    for _ in 0..u_steps {
        f = f.derive()?.neg().try_div(&y.scale(2.0))?;
    }
    Ok(f)
}

/// Jet of `Phi_{dv,dz}` in X.
pub fn phi_big_jet(dv: usize, dz: usize, x: &Jet) -> Result<Jet> {
    let (u_steps, v_steps) = check_dims(dv, dz)?;
    let x0 = x.value();
    if !(x0 > 1.0) {
        return Err(DrError::Domain(format!("Phi needs X > 1, got {x0}")));
    }
    if dz % 2 == 0 {
        let g = de_chain_jet(u_steps, v_steps, x0, x.order())?;
        let pref = 2.0f64.powf(1.0 - dv as f64 / 2.0) * std::f64::consts::PI.sqrt();
        Ok(Jet::compose(&g, x).scale(pref))
    } else {
        // int_X^inf g(Y) 2Y (Y^2 - X^2)^{-1/2} dY with Y = X cosh v:
        // int_0^vmax 2 X cosh(v) g(X cosh v) dv.
        let decay = dv as f64 / 2.0 + dz as f64;
        let v_max = 36.0 / decay + 4.0;
        let order = x.order();
        let f = |v: f64| -> Jet {
            let ch = v.cosh();
            let y_jet = x.scale(ch);
            let g = de_chain_jet(u_steps, v_steps, x0 * ch, order)
                .expect("chain validated before integration");
            Jet::compose(&g, &y_jet).mul(&x.scale(2.0 * ch))
        };
        let (jet, _err) = adaptive_gk(&f, 0.0, v_max, 1e-300, 1e-11, 48)?;
        Ok(jet.scale(2.0f64.powf(1.0 - dv as f64 / 2.0)))
    }
}

/// `Phi_{dv,dz}(X)`.
pub fn phi_big(dv: usize, dz: usize, x: f64) -> Result<f64> {
    Ok(phi_big_jet(dv, dz, &Jet::constant(x, 0))?.value())
}

/// `Dt Phi_{dv,dz}(X) = -(1/2X) Phi'` computed through the jet route;
/// equals `Phi_{dv,dz+2}(X)` identically.
pub fn phi_big_dtilde(dv: usize, dz: usize, x: f64) -> Result<f64> {
    let j = phi_big_jet(dv, dz, &Jet::variable(x, 1))?;
    Ok(-j.deriv_at_base(1) / (2.0 * x))
}

/// Radial profile of the inverse square root of the Laplacian,
/// `delta^{-1/2} k(r) = C_{dv,dz} Phi_{dv,dz}(cosh(r/2))`.
pub fn invsqrt_profile(alg: &HTypeAlgebra, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(DrError::Domain("invsqrt profile needs r > 0".into()));
    }
    Ok(riesz_c_const(alg.dim_v, alg.dim_z) * phi_big(alg.dim_v, alg.dim_z, (0.5 * r).cosh())?)
}

/// First-order Riesz transform kernels at a point of S.
/// Direction 0 gives the kernel of `R_0 - R_0^*`; directions `1..=dv` the
/// first-layer kernels `k_{R_j}`; directions `dv+1..=dv+dz` the central
/// kernels.
pub fn riesz_kernel(alg: &HTypeAlgebra, direction: usize, p: &SPoint) -> Result<f64> {
    if direction > alg.n_dim() {
        return Err(DrError::Invalid(format!(
            "direction {direction} out of range 0..={}",
            alg.n_dim()
        )));
    }
    let (dv, dz) = (alg.dim_v, alg.dim_z);
    let q = alg.q_hom();
    let c = riesz_c_const(dv, dz);
    let xi2 = p.x.iter().map(|v| v * v).sum::<f64>();
    let r = crate::space::distance_s(p);
    let phi2 = phi_big(dv, dz + 2, (0.5 * r).cosh())?;
    let pfac = 1.0 + p.a + 0.25 * xi2;
    Ok(if direction == 0 {
        -0.5 * c * p.a.powf(-q / 2.0) * (1.0 - 1.0 / p.a) * pfac * phi2
    } else if direction <= dv {
        let j = direction - 1;
        let mut bz = 0.0;
        for i in 0..dv {
            for k in 0..dz {
                bz += p.x[i] * alg.bracket_entry(i, j, k) * p.z[k];
            }
        }
        -0.25 * c * p.a.powf(-(q + 1.0) / 2.0) * (pfac * p.x[j] + bz) * phi2
    } else {
        let k = direction - 1 - dv;
        -0.5 * c * p.a.powf(-q / 2.0) * p.z[k] * phi2
    })
}

/// `H(x, z) = (1 + |x|^2/4)^2 + |z|^2` on the nilpotent group.
pub fn h_fn(x: &[f64], z: &[f64]) -> f64 {
    let xi2 = x.iter().map(|v| v * v).sum::<f64>();
    let z2 = z.iter().map(|v| v * v).sum::<f64>();
    (1.0 + 0.25 * xi2) * (1.0 + 0.25 * xi2) + z2
}

/// Main-term profile `r_0 = (1 + |x|^2/4) / H^{(Q+2)/2}`.
pub fn main_term_r0(alg: &HTypeAlgebra, x: &[f64], z: &[f64]) -> f64 {
    let xi2 = x.iter().map(|v| v * v).sum::<f64>();
    (1.0 + 0.25 * xi2) * h_fn(x, z).powf(-(alg.q_hom() + 2.0) / 2.0)
}

/// Main-term profiles on N: for `j = 1..=dv`,
/// `r_j = ((1 + |x|^2/4) x_j - [x, e_j].z) / (2 H^{(Q+2)/2})`; for
/// `j = dv+1..=dv+dz`, `r_j = z_{j-dv} / H^{(Q+2)/2}`.
pub fn main_term_rj(alg: &HTypeAlgebra, j: usize, x: &[f64], z: &[f64]) -> Result<f64> {
    if j == 0 || j > alg.n_dim() {
        return Err(DrError::Invalid(format!(
            "main term index {j} out of range 1..={}",
            alg.n_dim()
        )));
    }
    let h = h_fn(x, z).powf(-(alg.q_hom() + 2.0) / 2.0);
    if j <= alg.dim_v {
        let jj = j - 1;
        let xi2 = x.iter().map(|v| v * v).sum::<f64>();
        let mut bz = 0.0;
        for i in 0..alg.dim_v {
            for k in 0..alg.dim_z {
                bz += x[i] * alg.bracket_entry(i, jj, k) * z[k];
            }
        }
        Ok(0.5 * ((1.0 + 0.25 * xi2) * x[jj] - bz) * h)
    } else {
        Ok(z[j - 1 - alg.dim_v] * h)
    }
}

/// Logarithmically-damped flag-type main kernels on S.  `Central` is
/// `r_0 (chi_{a>=e} + chi_{a<=1/e}) / log a`; `CentralDifference` is
/// `[(r_0 dilated by a) - r_0] chi_{a>=e} / log a`; `FirstLayer(j)` is
/// `r_j chi_{a<=1/e} / log a`.
#[derive(Clone, Copy, Debug)]
pub enum MainKernel {
    Central,
    CentralDifference,
    FirstLayer(usize),
}

pub fn main_kernel(alg: &HTypeAlgebra, which: MainKernel, p: &SPoint) -> Result<f64> {
    let la = p.a.ln();
    Ok(match which {
        MainKernel::Central => {
            if la.abs() >= 1.0 {
                main_term_r0(alg, &p.x, &p.z) / la
            } else {
                0.0
            }
        }
        MainKernel::CentralDifference => {
            if la >= 1.0 {
                let s = 1.0 / p.a.sqrt();
                let xd: Vec<f64> = p.x.iter().map(|v| s * v).collect();
                let zd: Vec<f64> = p.z.iter().map(|v| v / p.a).collect();
                let dilated = p.a.powf(-alg.q_hom()) * main_term_r0(alg, &xd, &zd);
                (dilated - main_term_r0(alg, &p.x, &p.z)) / la
            } else {
                0.0
            }
        }
        MainKernel::FirstLayer(j) => {
            if la <= -1.0 {
                main_term_rj(alg, j, &p.x, &p.z)? / la
            } else {
                0.0
            }
        }
    })
}

/// `sum_{k>=0} binom(k - 1/2, k) / (2k + dv/2 + dz)`, summed directly with
/// compensated accumulation plus an Euler-Maclaurin tail estimate.
pub fn riesz_sum_constant(dv: usize, dz: usize) -> f64 {
    let beta = dv as f64 / 2.0 + dz as f64;
    let kmax: usize = 2_000_000;
    let mut c_k = 1.0f64; // binom(-1/2 + k, k) at k = 0
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for k in 0..=kmax {
        if k > 0 {
            let kf = k as f64;
            c_k *= (2.0 * kf - 1.0) / (2.0 * kf);
        }
        let term = c_k / (2.0 * k as f64 + beta);
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    // Tail: terms behave like (1/(2 sqrt(pi)))(k^{-3/2} - A k^{-5/2}),
    // A = beta/2 + 1/8; midpoint integral from kmax + 1/2.
    let a_coef = beta / 2.0 + 0.125;
    let kh = kmax as f64 + 0.5;
    let tail = (2.0 / kh.sqrt() - (2.0 * a_coef / 3.0) / (kh * kh.sqrt()))
        / (2.0 * std::f64::consts::PI.sqrt());
    sum + tail
}

/// Closed form of the same constant:
/// `sqrt(pi) Gamma(dv/4 + dz/2) / (2 Gamma(dv/4 + (dz+1)/2))`.
pub fn riesz_sum_constant_closed(dv: usize, dz: usize) -> Result<f64> {
    Ok(std::f64::consts::PI.sqrt() * gamma_fn(dv as f64 / 4.0 + dz as f64 / 2.0)?
        / (2.0 * gamma_fn(dv as f64 / 4.0 + (dz as f64 + 1.0) / 2.0)?))
}
