//! Operator-valued multiplier symbols and their one-dimensional model
//! operators on the log-scaled a-line.
//!
//! For each spectral point `(lambda, mu)` the three symbol families are
//! scalar profiles built from the `Xi_s` integrals:
//! `F_0 = Xit_2`, `F_v = lambda^{1/2} Xi_0`, `F_z = lambda Xi_0`.
//! The associated model operators act on functions of `a = e^u` by
//! convolution-type kernels `1/u` cut to a half-line; discretizing on a
//! uniform log grid with trapezoid weights gives matrices whose weighted
//! operator norms, derivative envelopes, Holder continuity and
//! R-boundedness are checked here.

use crate::gelfand::{xi_s, xi_tilde};
use crate::htype::HTypeAlgebra;
use crate::{DrError, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// symbols
// ---------------------------------------------------------------------------

/// The three scalar symbol families attached to the kernel directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymbolKind {
    /// Zero direction: `F_0(lambda, m) = Xit_2(lambda, m)`.
    Zero,
    /// First-layer directions: `F_v(lambda, m) = lambda^{1/2} Xi_0(lambda, m)`.
    Vector,
    /// Central directions: `F_z(lambda, m) = lambda Xi_0(lambda, m)`.
    Central,
}

impl SymbolKind {
    pub fn all() -> [SymbolKind; 3] {
        [SymbolKind::Zero, SymbolKind::Vector, SymbolKind::Central]
    }

    pub fn label(&self) -> &'static str {
        match self {
            SymbolKind::Zero => "zero",
            SymbolKind::Vector => "vector",
            SymbolKind::Central => "central",
        }
    }
}

/// Evaluates the symbol at spectral point `(lambda, m)`, `m = |mu| >= 0`.
/// The symbol is even in `mu`, so a negative `m` is reflected.
pub fn symbol_value(alg: &HTypeAlgebra, kind: SymbolKind, lambda: f64, m: f64) -> Result<f64> {
    let m = m.abs();
    if !(lambda > 0.0) {
        return Err(DrError::Domain(format!("symbol needs lambda > 0, got {lambda}")));
    }
    match kind {
        SymbolKind::Zero => xi_tilde(alg, 2.0, lambda, m),
        SymbolKind::Vector => Ok(lambda.sqrt() * xi_s(alg, 0.0, lambda, m)?),
        SymbolKind::Central => Ok(lambda * xi_s(alg, 0.0, lambda, m)?),
    }
}

// ---------------------------------------------------------------------------
// log grid, model operator matrices, weighted norms
// ---------------------------------------------------------------------------

/// Uniform grid on `[-u_max, u_max]` with trapezoid quadrature weights.
#[derive(Clone, Debug)]
pub struct LogGrid {
    pub u: Vec<f64>,
    pub wq: Vec<f64>,
    pub h: f64,
}

impl LogGrid {
    pub fn new(u_max: f64, n: usize) -> Result<LogGrid> {
        if n < 3 || !(u_max > 0.0) {
            return Err(DrError::Invalid(format!("bad log grid ({u_max}, {n})")));
        }
        let h = 2.0 * u_max / (n - 1) as f64;
        let u: Vec<f64> = (0..n).map(|i| -u_max + i as f64 * h).collect();
        let mut wq = vec![h; n];
        wq[0] = 0.5 * h;
        wq[n - 1] = 0.5 * h;
        Ok(LogGrid { u, wq, h })
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }
}

/// Default working grid.
pub fn default_grid() -> LogGrid {
    LogGrid::new(15.0, 301).unwrap()
}

/// Refined grid used for discretization drift checks.
pub fn refined_grid() -> LogGrid {
    LogGrid::new(20.0, 601).unwrap()
}

/// Transfer kernel supported on `u <= -1`: `chi_{u <= -1} / u`.
pub fn kernel_low(u: f64) -> f64 {
    if u <= -1.0 {
        1.0 / u
    } else {
        0.0
    }
}

/// Transfer kernel supported on `u >= 1`: `chi_{u >= 1} / u`.
pub fn kernel_high(u: f64) -> f64 {
    if u >= 1.0 {
        1.0 / u
    } else {
        0.0
    }
}

/// Dense matrix (row major) of the discretized model operator at spectral
/// point `(lambda, m)`:
///
/// * `Vector` / `Central`: `A_ij = F(e^{u_j} lambda, e^{u_j} m)
///   K_low(u_i - u_j) wq_j`;
/// * `Zero`: `A_ij = (F_0(e^{u_i} .) - F_0(e^{u_j} .)) K_high(u_i - u_j)
///   wq_j`.
pub fn op_matrix(
    alg: &HTypeAlgebra,
    kind: SymbolKind,
    lambda: f64,
    m: f64,
    grid: &LogGrid,
) -> Result<Vec<f64>> {
    let n = grid.len();
    let f: Vec<f64> = grid
        .u
        .iter()
        .map(|&u| symbol_value(alg, kind, u.exp() * lambda, u.exp() * m))
        .collect::<Result<Vec<f64>>>()?;
    let mut a = vec![0.0; n * n];
    match kind {
        SymbolKind::Vector | SymbolKind::Central => {
            for i in 0..n {
                for j in 0..n {
                    let k = kernel_low(grid.u[i] - grid.u[j]);
                    if k != 0.0 {
                        a[i * n + j] = f[j] * k * grid.wq[j];
                    }
                }
            }
        }
        SymbolKind::Zero => {
            for i in 0..n {
                for j in 0..n {
                    let k = kernel_high(grid.u[i] - grid.u[j]);
                    if k != 0.0 {
                        a[i * n + j] = (f[i] - f[j]) * k * grid.wq[j];
                    }
                }
            }
        }
    }
    Ok(a)
}

/// Weights on the log line used for the weighted-norm checks.
#[derive(Clone, Copy, Debug)]
pub enum A2Weight {
    Flat,
    /// `w(e^u) = max(|u|, h/2)^alpha`, `|alpha| < 1`; the floor at half a
    /// grid step keeps the discretization of the local singularity honest.
    Power(f64),
}

impl A2Weight {
    pub fn value(&self, u: f64, h: f64) -> f64 {
        match self {
            A2Weight::Flat => 1.0,
            A2Weight::Power(alpha) => u.abs().max(0.5 * h).powf(*alpha),
        }
    }

    pub fn label(&self) -> String {
        match self {
            A2Weight::Flat => "flat".into(),
            A2Weight::Power(a) => format!("power({a})"),
        }
    }
}

/// Muckenhoupt characteristic over grid-aligned intervals:
/// `sup_I avg_I(w) avg_I(1/w)` via prefix sums.
pub fn a2_constant(grid: &LogGrid, w: &A2Weight) -> f64 {
    let n = grid.len();
    let mut pw = vec![0.0; n + 1];
    let mut pi = vec![0.0; n + 1];
    let mut pl = vec![0.0; n + 1];
    for i in 0..n {
        let wv = w.value(grid.u[i], grid.h);
        pw[i + 1] = pw[i] + wv * grid.wq[i];
        pi[i + 1] = pi[i] + grid.wq[i] / wv;
        pl[i + 1] = pl[i] + grid.wq[i];
    }
    let mut best = 1.0f64;
    for i in 0..n {
        for j in (i + 1)..=n {
            let len = pl[j] - pl[i];
            let prod = (pw[j] - pw[i]) / len * ((pi[j] - pi[i]) / len);
            if prod > best {
                best = prod;
            }
        }
    }
    best
}

/// Largest singular value of a dense row-major matrix by power iteration
/// on `B^T B` (deterministic ramp start, relative tolerance 1e-8, at most
/// 10^4 iterations; the last iterate is returned if the cap is hit).
pub fn matrix_two_norm(b: &[f64], n: usize) -> f64 {
    assert_eq!(b.len(), n * n, "matrix shape mismatch");
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 / n as f64).collect();
    let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in x.iter_mut() {
        *v /= nx;
    }
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut sigma = 0.0f64;
    for _ in 0..10_000 {
        for i in 0..n {
            let row = &b[i * n..(i + 1) * n];
            y[i] = row.iter().zip(&x).map(|(a, b)| a * b).sum();
        }
        for v in z.iter_mut() {
            *v = 0.0;
        }
        for i in 0..n {
            let yi = y[i];
            if yi == 0.0 {
                continue;
            }
            let row = &b[i * n..(i + 1) * n];
            for (zj, aij) in z.iter_mut().zip(row) {
                *zj += aij * yi;
            }
        }
        let nz = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nz == 0.0 {
            return 0.0;
        }
        let new_sigma = nz.sqrt();
        let done = (new_sigma - sigma).abs() <= 1e-8 * new_sigma.max(1.0);
        sigma = new_sigma;
        for (xv, zv) in x.iter_mut().zip(&z) {
            *xv = zv / nz;
        }
        if done {
            break;
        }
    }
    sigma
}

/// Conjugates the discretized operator into the weighted sequence space
/// `l^2(w wq)` and returns the embedded matrix
/// `B_ij = A_ij sqrt(w_i wq_i / (w_j wq_j))`.
pub fn embed_weighted(a: &[f64], grid: &LogGrid, w: &A2Weight) -> Vec<f64> {
    let n = grid.len();
    let d: Vec<f64> = (0..n)
        .map(|i| (w.value(grid.u[i], grid.h) * grid.wq[i]).sqrt())
        .collect();
    let mut b = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            b[i * n + j] = a[i * n + j] * d[i] / d[j];
        }
    }
    b
}

/// Weighted operator norm of a discretized model operator.
pub fn weighted_norm(a: &[f64], grid: &LogGrid, w: &A2Weight) -> f64 {
    matrix_two_norm(&embed_weighted(a, grid, w), grid.len())
}

/// Builds the model operator and returns its weighted norm.
pub fn op_norm(
    alg: &HTypeAlgebra,
    kind: SymbolKind,
    lambda: f64,
    m: f64,
    grid: &LogGrid,
    w: &A2Weight,
) -> Result<f64> {
    let a = op_matrix(alg, kind, lambda, m, grid)?;
    Ok(weighted_norm(&a, grid, w))
}

/// Spectral sample points: lambda log-spaced over [1e-2, 1e2].
pub fn cone_lambdas() -> Vec<f64> {
    (0..9).map(|k| 10f64.powf(-2.0 + 0.5 * k as f64)).collect()
}

/// Central-frequency fractions `m = fr * lambda` staying inside the cone.
pub fn cone_fractions() -> Vec<f64> {
    vec![0.0, 0.25, 0.5, 0.75, 1.0]
}

// ---------------------------------------------------------------------------
// derivative envelopes and Holder continuity
// ---------------------------------------------------------------------------

/// Decay envelope for the scaled derivatives: with `dec = e^{-2c
/// sqrt(lambda+m)}` and `lg = log(e + 1/lambda)`,
/// `lambda^{|alpha|} |d^alpha F|` is compared against
/// * `Vector`: `lambda^{1/2} lg dec` (all orders),
/// * `Central`: `lambda lg dec` (all orders),
/// * `Zero`: `dec`, `lambda lg dec`, `lambda dec` for `|alpha| = 0, 1, >= 2`.
pub fn symbol_envelope(kind: SymbolKind, order: usize, c: f64, lambda: f64, m: f64) -> f64 {
    let dec = (-2.0 * c * (lambda + m).sqrt()).exp();
    let lg = (std::f64::consts::E + 1.0 / lambda).ln();
    match kind {
        SymbolKind::Vector => lambda.sqrt() * lg * dec,
        SymbolKind::Central => lambda * lg * dec,
        SymbolKind::Zero => match order {
            0 => dec,
            1 => lambda * lg * dec,
            _ => lambda * dec,
        },
    }
}

fn stencil_1d(f: &dyn Fn(f64) -> f64, x: f64, h: f64, order: usize) -> f64 {
    match order {
        0 => f(x),
        1 => (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h),
        2 => {
            (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h))
                / (12.0 * h * h)
        }
        _ => panic!("stencil order {order} not supported"),
    }
}

/// Central finite-difference `d_lambda^a d_m^b F` (fourth-order stencils,
/// steps proportional to the scale `lambda + m`).
pub fn symbol_derivative(
    alg: &HTypeAlgebra,
    kind: SymbolKind,
    a: usize,
    b: usize,
    lambda: f64,
    m: f64,
) -> Result<f64> {
    let hl = 0.03 * (lambda + m);
    let hm = 0.03 * (lambda + m);
    let f = |l: f64, mm: f64| symbol_value(alg, kind, l, mm).unwrap_or(f64::NAN);
    let v = if b == 0 {
        stencil_1d(&|l| f(l, m), lambda, hl, a)
    } else if a == 0 {
        stencil_1d(&|mm| f(lambda, mm), m, hm, b)
    } else {
        // mixed first/first
        let g = |l: f64| stencil_1d(&|mm| f(l, mm), m, hm, 1);
        stencil_1d(&g, lambda, hl, 1)
    };
    if v.is_nan() {
        return Err(DrError::Domain(format!(
            "derivative stencil left the symbol domain at ({lambda}, {m})"
        )));
    }
    Ok(v)
}

#[derive(Clone, Copy, Debug)]
pub struct DerivRecord {
    pub kind: SymbolKind,
    pub ord_lambda: usize,
    pub ord_m: usize,
    pub max_ratio: f64,
}

/// Sweeps all derivative orders `|alpha| <= 2` over the spectral sample
/// grid and records the worst ratio against the envelope with decay
/// constant `c`.
pub fn symbol_derivative_sweep(
    alg: &HTypeAlgebra,
    kind: SymbolKind,
    c: f64,
) -> Result<Vec<DerivRecord>> {
    let orders = [(0usize, 0usize), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];
    let mut out = Vec::new();
    for &(a, b) in &orders {
        let mut max_ratio = 0.0f64;
        for &lam in &cone_lambdas() {
            for &fr in &cone_fractions() {
                let m = fr * lam;
                let d = symbol_derivative(alg, kind, a, b, lam, m)?;
                let env = symbol_envelope(kind, a + b, c, lam, m);
                let ratio = lam.powi((a + b) as i32) * d.abs() / env;
                if ratio > max_ratio {
                    max_ratio = ratio;
                }
            }
        }
        out.push(DerivRecord {
            kind,
            ord_lambda: a,
            ord_m: b,
            max_ratio,
        });
    }
    Ok(out)
}

/// Worst Holder-`eps` difference quotient `|F(p) - F(p')| / dist^eps`
/// over seeded random pairs in the spectral window `lambda in [0.1, 10]`,
/// `m <= lambda`, separated by at most 1.
pub fn holder_ratio_max(
    alg: &HTypeAlgebra,
    kind: SymbolKind,
    eps: f64,
    seed: u64,
    n_pairs: usize,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_ratio = 0.0f64;
    for _ in 0..n_pairs {
        let l1: f64 = 0.1 + 9.9 * rng.gen::<f64>();
        let m1 = l1 * rng.gen::<f64>();
        let dl = (rng.gen::<f64>() - 0.5) * 1.0;
        let dm = (rng.gen::<f64>() - 0.5) * (1.0 - dl.abs());
        let l2 = (l1 + dl).clamp(0.1, 10.0);
        let m2 = (m1 + dm).clamp(0.0, l2);
        let dist = ((l2 - l1).powi(2) + (m2 - m1).powi(2)).sqrt();
        if dist < 1e-9 {
            continue;
        }
        let f1 = symbol_value(alg, kind, l1, m1)?;
        let f2 = symbol_value(alg, kind, l2, m2)?;
        let ratio = (f1 - f2).abs() / dist.powf(eps);
        if ratio > max_ratio {
            max_ratio = ratio;
        }
    }
    Ok(max_ratio)
}

/// Quadratic-touch ratio `|F(lambda, h) - F(lambda, 0)| / h^2`: the symbol
/// is smooth and even in `mu`, so its first `mu`-derivative vanishes on
/// the axis and the quotient stays bounded as `h -> 0`.
pub fn smoothness_at_zero_mu(
    alg: &HTypeAlgebra,
    kind: SymbolKind,
    lambda: f64,
    h: f64,
) -> Result<f64> {
    let f0 = symbol_value(alg, kind, lambda, 0.0)?;
    let fh = symbol_value(alg, kind, lambda, h)?;
    Ok((fh - f0).abs() / (h * h))
}

// ---------------------------------------------------------------------------
// R-bound estimation
// ---------------------------------------------------------------------------

fn top_right_singular(a: &[f64], n: usize) -> Vec<f64> {
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 / n as f64).collect();
    let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in x.iter_mut() {
        *v /= nx;
    }
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    for _ in 0..2_000 {
        for i in 0..n {
            y[i] = a[i * n..(i + 1) * n].iter().zip(&x).map(|(p, q)| p * q).sum();
        }
        for v in z.iter_mut() {
            *v = 0.0;
        }
        for i in 0..n {
            if y[i] == 0.0 {
                continue;
            }
            for (zj, aij) in z.iter_mut().zip(&a[i * n..(i + 1) * n]) {
                *zj += aij * y[i];
            }
        }
        let nz = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nz == 0.0 {
            return x;
        }
        let mut delta = 0.0f64;
        for (xv, zv) in x.iter_mut().zip(&z) {
            let nv = zv / nz;
            delta = delta.max((nv - *xv).abs());
            *xv = nv;
        }
        if delta < 1e-12 {
            break;
        }
    }
    x
}

fn vec_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn matvec(a: &[f64], n: usize, x: &[f64], out: &mut [f64]) {
    for i in 0..n {
        out[i] = a[i * n..(i + 1) * n].iter().zip(x).map(|(p, q)| p * q).sum();
    }
}

/// First-moment Rademacher ratio
/// `E || sum_m eps_m T_m z_m || / E || sum_m eps_m z_m ||` for one tuple.
fn rademacher_ratio(
    images: &[Vec<f64>],
    inputs: &[Vec<f64>],
    n: usize,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let m_count = images.len();
    let mut num = 0.0;
    let mut den = 0.0;
    let mut acc_w = vec![0.0; n];
    let mut acc_z = vec![0.0; n];
    let mut eval = |signs: &[f64], num: &mut f64, den: &mut f64| {
        for v in acc_w.iter_mut() {
            *v = 0.0;
        }
        for v in acc_z.iter_mut() {
            *v = 0.0;
        }
        for (s, (w, z)) in signs.iter().zip(images.iter().zip(inputs)) {
            for i in 0..n {
                acc_w[i] += s * w[i];
                acc_z[i] += s * z[i];
            }
        }
        *num += vec_norm(&acc_w);
        *den += vec_norm(&acc_z);
    };
    if m_count <= 10 {
        // exact enumeration; the first sign is fixed by symmetry
        let total = 1usize << (m_count - 1);
        let mut signs = vec![1.0; m_count];
        for pat in 0..total {
            for (b, s) in signs.iter_mut().enumerate().skip(1) {
                *s = if (pat >> (b - 1)) & 1 == 1 { -1.0 } else { 1.0 };
            }
            eval(&signs, &mut num, &mut den);
        }
    } else {
        let draws = 512;
        let mut signs = vec![1.0; m_count];
        for _ in 0..draws {
            for s in signs.iter_mut() {
                *s = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            }
            eval(&signs, &mut num, &mut den);
        }
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Lower estimate of the R-bound of a finite operator family by maximizing
/// the first-moment Rademacher ratio over a fixed candidate set of input
/// tuples: per-member top singular vectors, a shared top singular vector,
/// coordinate axis tuples, and seeded random Gaussian tuples.  Sign
/// expectations are exact for up to 10 members, Monte Carlo beyond.
pub fn r_bound_estimate(ops: &[Vec<f64>], n: usize, seed: u64) -> Result<f64> {
    let m_count = ops.len();
    if m_count == 0 {
        return Err(DrError::Invalid("empty operator family".into()));
    }
    for op in ops {
        if op.len() != n * n {
            return Err(DrError::DimMismatch(format!(
                "operator storage {} != {n}x{n}",
                op.len()
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let svecs: Vec<Vec<f64>> = ops.iter().map(|a| top_right_singular(a, n)).collect();
    let norms: Vec<f64> = ops
        .iter()
        .zip(&svecs)
        .map(|(a, v)| {
            let mut out = vec![0.0; n];
            matvec(a, n, v, &mut out);
            vec_norm(&out)
        })
        .collect();
    let best_member = norms
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);

    let mut tuples: Vec<Vec<Vec<f64>>> = Vec::new();
    // per-member singular tuples
    for k in 0..m_count {
        let mut t = vec![vec![0.0; n]; m_count];
        t[k] = svecs[k].clone();
        tuples.push(t);
    }
    // shared input tuple
    tuples.push(vec![svecs[best_member].clone(); m_count]);
    // axis tuples
    for axis in [0usize, n / 2, n - 1] {
        let mut e = vec![0.0; n];
        e[axis] = 1.0;
        tuples.push(vec![e; m_count]);
    }
    // random Gaussian tuples (Box-Muller from the seeded stream)
    for _ in 0..6 {
        let mut t = Vec::with_capacity(m_count);
        for _ in 0..m_count {
            let mut z = vec![0.0; n];
            for v in z.iter_mut() {
                let u1: f64 = rng.gen::<f64>().max(1e-12);
                let u2: f64 = rng.gen();
                *v = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
            }
            let nz = vec_norm(&z);
            if nz > 0.0 {
                for v in z.iter_mut() {
                    *v /= nz;
                }
            }
            t.push(z);
        }
        tuples.push(t);
    }

    let mut best = 0.0f64;
    for tuple in &tuples {
        let images: Vec<Vec<f64>> = ops
            .iter()
            .zip(tuple)
            .map(|(a, z)| {
                let mut out = vec![0.0; n];
                matvec(a, n, z, &mut out);
                out
            })
            .collect();
        let r = rademacher_ratio(&images, tuple, n, &mut rng);
        if r > best {
            best = r;
        }
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// dyadic partition tools
// ---------------------------------------------------------------------------

/// Smooth step: `e^{-1/x} / (e^{-1/x} + e^{-1/(1-x)})`, equal to 0 for
/// `x <= 0` and 1 for `x >= 1`.
pub fn transition(x: f64) -> f64 {
    let g = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    let a = g(x);
    let b = g(1.0 - x);
    if a == 0.0 && b == 0.0 {
        // only reachable through NaN input
        return f64::NAN;
    }
    a / (a + b)
}

/// Smooth low-pass cut: 1 for `|xi| <= 1`, 0 for `|xi| >= 2`.
pub fn ell_cut(xi: f64) -> f64 {
    let a = xi.abs();
    if a == 0.0 {
        return 1.0;
    }
    transition(1.0 - a.log2())
}

/// Littlewood-Paley bump `eta(xi) = ell_cut(xi) - ell_cut(2 xi)`,
/// supported in `1/2 <= |xi| <= 2`, with `sum_m eta(2^m xi) = 1`.
pub fn eta_bump(xi: f64) -> f64 {
    ell_cut(xi) - ell_cut(2.0 * xi)
}

/// Fattened bump `chi(xi) = ell_cut(xi/2) - ell_cut(4 xi)`: equal to 1 on
/// the support of `eta` and supported in `1/4 <= |xi| <= 4`.
pub fn chi_bump(xi: f64) -> f64 {
    ell_cut(0.5 * xi) - ell_cut(4.0 * xi)
}

/// Modulated dyadic frame element
/// `E_{k,m}(xi) = chi(|2^m xi|) e^{i k . (2^m xi)}` in two frequency
/// variables; returns (re, im).
pub fn e_km(k: (f64, f64), m: i32, xi: (f64, f64)) -> (f64, f64) {
    let s = 2f64.powi(m);
    let sx = (s * xi.0, s * xi.1);
    let r = (sx.0 * sx.0 + sx.1 * sx.1).sqrt();
    let amp = chi_bump(r);
    let ph = k.0 * sx.0 + k.1 * sx.1;
    (amp * ph.cos(), amp * ph.sin())
}

/// Magnitudes of the 2-d Fourier coefficients of `chi(|xi|)` on the
/// periodized box `[-4, 4]^2`, computed with an `n x n` tensor trapezoid
/// rule, for `0 <= k1, k2 <= k_max`.  The integrand is even in each
/// variable, so the coefficients are real up to a sign.
pub fn fourier_bump_coeffs(n: usize, k_max: usize) -> Vec<Vec<f64>> {
    let l = 4.0;
    let step = 2.0 * l / n as f64;
    let f: Vec<Vec<f64>> = (0..n)
        .map(|j1| {
            let x1 = -l + j1 as f64 * step;
            (0..n)
                .map(|j2| {
                    let x2 = -l + j2 as f64 * step;
                    chi_bump((x1 * x1 + x2 * x2).sqrt())
                })
                .collect()
        })
        .collect();
    let cosk = |k: usize, j: usize| (2.0 * std::f64::consts::PI * (k * j) as f64 / n as f64).cos();
    // first stage: G[k1][j2] = sum_{j1} f[j1][j2] cos(2 pi k1 j1 / n)
    let mut g = vec![vec![0.0; n]; k_max + 1];
    for (k1, row) in g.iter_mut().enumerate() {
        for j1 in 0..n {
            let c = cosk(k1, j1);
            if c == 0.0 {
                continue;
            }
            for (j2, acc) in row.iter_mut().enumerate() {
                *acc += f[j1][j2] * c;
            }
        }
    }
    // second stage: C[k1][k2] = sum_{j2} G[k1][j2] cos(2 pi k2 j2 / n) / n^2
    let mut c = vec![vec![0.0; k_max + 1]; k_max + 1];
    for k1 in 0..=k_max {
        for (k2, out) in c[k1].iter_mut().enumerate().take(k_max + 1) {
            let mut acc = 0.0;
            for j2 in 0..n {
                acc += g[k1][j2] * cosk(k2, j2);
            }
            *out = (acc / (n * n) as f64).abs();
        }
    }
    c
}
