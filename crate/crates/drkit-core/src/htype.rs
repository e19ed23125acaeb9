//! H-type Lie algebras and the 2-step nilpotent group N.
//!
//! An algebra is stored as its bracket tensor `b[i][j][k]` with
//! `[e_i, e_j] = sum_k b_{ij}^k e_{dv+k}` on the first layer `R^{dv}`; the
//! center is `R^{dz}`.  The J-maps are defined by `<J_mu x, y> = mu.[x, y]`,
//! and the algebra is H-type exactly when `|J_mu x| = |mu||x|` for all
//! inputs, which [`verify_htype`] probes at random samples.
//!
//! Built-in families: Heisenberg (dv = 2d, dz = 1) and quaternionic
//! (dv = 4n, dz = 3, J-maps given by right quaternion multiplication).
//! Custom bracket tensors are accepted even when they are not H-type, so
//! the verifier can report violations instead of panicking.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::{DrError, Result};

/// Immutable H-type algebra data (bracket tensor plus derived dimensions).
#[derive(Clone, Debug)]
pub struct HTypeAlgebra {
    pub dim_v: usize,
    pub dim_z: usize,
    /// Flattened tensor, index `i*dv*dz + j*dz + k` for `b_{ij}^k`.
    bracket: Vec<f64>,
}

/// Point of the nilpotent group N in exponential coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct NPoint {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
}

impl NPoint {
    pub fn new(x: Vec<f64>, z: Vec<f64>) -> NPoint {
        NPoint { x, z }
    }
}

/// Constructor selector for [`build_algebra`].
#[derive(Clone, Debug)]
pub enum AlgebraKind {
    /// dv = 2d, dz = 1, with `[e_{2i}, e_{2i+1}] = e_z`.
    Heisenberg(usize),
    /// dv = 4n, dz = 3, J-maps by right quaternion multiplication per
    /// 4-block.
    Quaternionic(usize),
    /// Explicit tensor entries `(i, j, k, value)`, 0-based, `i, j < dv`,
    /// `k < dz`.  Each entry also sets the antisymmetric mirror; explicit
    /// mirrors must be consistent.
    Custom {
        dim_v: usize,
        dim_z: usize,
        entries: Vec<(usize, usize, usize, f64)>,
    },
}

impl HTypeAlgebra {
    /// Homogeneous dimension Q = (dv + 2 dz) / 2.
    pub fn q_hom(&self) -> f64 {
        (self.dim_v as f64 + 2.0 * self.dim_z as f64) / 2.0
    }

    /// n = dv + dz.
    pub fn n_dim(&self) -> usize {
        self.dim_v + self.dim_z
    }

    pub fn bracket_entry(&self, i: usize, j: usize, k: usize) -> f64 {
        self.bracket[(i * self.dim_v + j) * self.dim_z + k]
    }

    /// `[x, y]` in the center.
    pub fn bracket_xy(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let dv = self.dim_v;
        let dz = self.dim_z;
        let mut out = vec![0.0; dz];
        for i in 0..dv {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..dv {
                let c = x[i] * y[j];
                if c == 0.0 {
                    continue;
                }
                let base = (i * dv + j) * dz;
                for (k, o) in out.iter_mut().enumerate() {
                    *o += c * self.bracket[base + k];
                }
            }
        }
        out
    }

    /// `J_mu x`, defined by `<J_mu x, y> = mu.[x, y]`.
    pub fn j_map(&self, mu: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        if mu.len() != self.dim_z || x.len() != self.dim_v {
            return Err(DrError::DimMismatch(format!(
                "j_map expects |mu|={} and |x|={}",
                self.dim_z, self.dim_v
            )));
        }
        let dv = self.dim_v;
        let dz = self.dim_z;
        let mut out = vec![0.0; dv];
        for i in 0..dv {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..dv {
                let base = (i * dv + j) * dz;
                let mut acc = 0.0;
                for k in 0..dz {
                    acc += mu[k] * self.bracket[base + k];
                }
                out[j] += x[i] * acc;
            }
        }
        Ok(out)
    }
}

/// Builds one of the named algebra families or a custom tensor.
pub fn build_algebra(kind: &AlgebraKind) -> Result<HTypeAlgebra> {
    match kind {
        AlgebraKind::Heisenberg(d) => {
            if *d == 0 {
                return Err(DrError::Invalid("heisenberg(d) needs d >= 1".into()));
            }
            let dv = 2 * d;
            let dz = 1;
            let mut bracket = vec![0.0; dv * dv * dz];
            for i in 0..*d {
                bracket[(2 * i * dv + 2 * i + 1) * dz] = 1.0;
                bracket[((2 * i + 1) * dv + 2 * i) * dz] = -1.0;
            }
            Ok(HTypeAlgebra { dim_v: dv, dim_z: dz, bracket })
        }
        AlgebraKind::Quaternionic(nq) => {
            if *nq == 0 {
                return Err(DrError::Invalid("quaternionic(n) needs n >= 1".into()));
            }
            let dv = 4 * nq;
            let dz = 3;
            let mut bracket = vec![0.0; dv * dv * dz];
            // Right multiplication by i, j, k on each quaternion block;
            // b_{ij}^k = <J_{eps_k} e_i, e_j>.
            // J_i: (x0,x1,x2,x3) -> (-x1, x0, x3, -x2)
            // J_j: (x0,x1,x2,x3) -> (-x2, -x3, x0, x1)
            // J_k: (x0,x1,x2,x3) -> (-x3, x2, -x1, x0)
            let jmaps: [[(usize, usize, f64); 4]; 3] = [
                [(0, 1, 1.0), (1, 0, -1.0), (2, 3, -1.0), (3, 2, 1.0)],
                [(0, 2, 1.0), (1, 3, 1.0), (2, 0, -1.0), (3, 1, -1.0)],
                [(0, 3, 1.0), (1, 2, -1.0), (2, 1, 1.0), (3, 0, -1.0)],
            ];
            for b in 0..*nq {
                let o = 4 * b;
                for (k, map) in jmaps.iter().enumerate() {
                    for &(i, j, v) in map {
                        bracket[((o + i) * dv + (o + j)) * dz + k] = v;
                    }
                }
            }
            Ok(HTypeAlgebra { dim_v: dv, dim_z: dz, bracket })
        }
        AlgebraKind::Custom { dim_v, dim_z, entries } => {
            let (dv, dz) = (*dim_v, *dim_z);
            if dv == 0 || dz == 0 {
                return Err(DrError::Invalid("custom algebra needs dv, dz >= 1".into()));
            }
            let mut set = vec![false; dv * dv * dz];
            let mut bracket = vec![0.0; dv * dv * dz];
            for &(i, j, k, v) in entries {
                if i >= dv || j >= dv || k >= dz {
                    return Err(DrError::DimMismatch(format!(
                        "entry ({i},{j},{k}) out of range for dv={dv}, dz={dz}"
                    )));
                }
                let idx = (i * dv + j) * dz + k;
                if set[idx] && bracket[idx] != v {
                    return Err(DrError::Invalid(format!(
                        "conflicting duplicate entries at ({i},{j},{k})"
                    )));
                }
                if i == j && v != 0.0 {
                    return Err(DrError::Invalid(format!(
                        "antisymmetry violated: diagonal entry ({i},{i},{k}) = {v}"
                    )));
                }
                set[idx] = true;
                bracket[idx] = v;
                let mirror = (j * dv + i) * dz + k;
                if set[mirror] {
                    if bracket[mirror] != -v {
                        return Err(DrError::Invalid(format!(
                            "antisymmetry violated at ({i},{j},{k}): b={} but mirror={}",
                            v, bracket[mirror]
                        )));
                    }
                } else {
                    set[mirror] = true;
                    bracket[mirror] = -v;
                }
            }
            Ok(HTypeAlgebra { dim_v: dv, dim_z: dz, bracket })
        }
    }
}

/// JSON form of a custom bracket tensor:
/// `{"dim_v": .., "dim_z": .., "entries": [[i, j, k, value], ...]}`.
#[derive(Deserialize)]
struct CustomAlgebraJson {
    dim_v: usize,
    dim_z: usize,
    entries: Vec<(usize, usize, usize, f64)>,
}

pub fn load_custom_json(text: &str) -> Result<HTypeAlgebra> {
    let spec: CustomAlgebraJson = serde_json::from_str(text)
        .map_err(|e| DrError::Invalid(format!("bad algebra JSON: {e}")))?;
    build_algebra(&AlgebraKind::Custom {
        dim_v: spec.dim_v,
        dim_z: spec.dim_z,
        entries: spec.entries,
    })
}

pub fn load_custom_file(path: &std::path::Path) -> Result<HTypeAlgebra> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| DrError::Invalid(format!("cannot read {}: {e}", path.display())))?;
    load_custom_json(&text)
}

/// Max relative violation of `|J_mu x| = |mu||x|` over random samples.
pub fn verify_htype(alg: &HTypeAlgebra, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let x: Vec<f64> = (0..alg.dim_v).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let mu: Vec<f64> = (0..alg.dim_z).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let nx = norm(&x);
        let nmu = norm(&mu);
        if nx * nmu < 1e-9 {
            continue;
        }
        let jx = alg.j_map(&mu, &x).expect("dims fixed");
        let v = (norm(&jx) - nmu * nx).abs() / (nmu * nx);
        worst = worst.max(v);
    }
    worst
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Group law on N: `(x, z)(x', z') = (x + x', z + z' + [x, x']/2)`.
pub fn compose_n(alg: &HTypeAlgebra, p: &NPoint, q: &NPoint) -> Result<NPoint> {
    if p.x.len() != alg.dim_v
        || q.x.len() != alg.dim_v
        || p.z.len() != alg.dim_z
        || q.z.len() != alg.dim_z
    {
        return Err(DrError::DimMismatch("compose_n point dims".into()));
    }
    let x: Vec<f64> = p.x.iter().zip(&q.x).map(|(a, b)| a + b).collect();
    let br = alg.bracket_xy(&p.x, &q.x);
    let z: Vec<f64> = p
        .z
        .iter()
        .zip(&q.z)
        .zip(&br)
        .map(|((a, b), c)| a + b + 0.5 * c)
        .collect();
    Ok(NPoint { x, z })
}

/// `(x, z)^{-1} = (-x, -z)`.
pub fn inverse_n(p: &NPoint) -> NPoint {
    NPoint {
        x: p.x.iter().map(|v| -v).collect(),
        z: p.z.iter().map(|v| -v).collect(),
    }
}

/// Automorphic dilation `(x, z) -> (a^{1/2} x, a z)`.
pub fn dilate_n(p: &NPoint, a: f64) -> NPoint {
    let s = a.sqrt();
    NPoint {
        x: p.x.iter().map(|v| s * v).collect(),
        z: p.z.iter().map(|v| a * v).collect(),
    }
}

fn flow_point(alg: &HTypeAlgebra, j: usize, s: f64) -> NPoint {
    let mut x = vec![0.0; alg.dim_v];
    let mut z = vec![0.0; alg.dim_z];
    if j >= 1 && j <= alg.dim_v {
        x[j - 1] = s;
    } else {
        z[j - 1 - alg.dim_v] = s;
    }
    NPoint { x, z }
}

/// Left-invariant derivative `X_j^N f(p)` for `j = 1..=dv+dz`, computed by a
/// 4th-order central stencil along the right-translation flow, improved by
/// one Richardson step.  `step <= 0` selects the default `1e-4 (1 + |p|)`.
pub fn left_invariant_derivative_n(
    alg: &HTypeAlgebra,
    j: usize,
    f: &dyn Fn(&NPoint) -> f64,
    p: &NPoint,
    step: f64,
) -> Result<f64> {
    if j == 0 || j > alg.n_dim() {
        return Err(DrError::Invalid(format!(
            "direction {j} out of range 1..={}",
            alg.n_dim()
        )));
    }
    let pnorm = norm(&p.x) + norm(&p.z);
    let h = if step > 0.0 { step } else { 1e-4 * (1.0 + pnorm) };
    let eval = |s: f64| -> Result<f64> {
        let q = flow_point(alg, j, s);
        Ok(f(&compose_n(alg, p, &q)?))
    };
    let stencil = |h: f64| -> Result<f64> {
        Ok((-eval(2.0 * h)? + 8.0 * eval(h)? - 8.0 * eval(-h)? + eval(-2.0 * h)?) / (12.0 * h))
    };
    let d_h = stencil(h)?;
    let d_h2 = stencil(0.5 * h)?;
    Ok((16.0 * d_h2 - d_h) / 15.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        let scale = a.abs().max(b.abs()).max(1.0);
        assert!((a - b).abs() <= tol * scale, "expected {a} ~ {b} (tol {tol})");
    }

    #[test]
    fn named_families_have_expected_shape() {
        let h1 = build_algebra(&AlgebraKind::Heisenberg(1)).unwrap();
        assert_eq!((h1.dim_v, h1.dim_z), (2, 1));
        assert_eq!(h1.bracket_entry(0, 1, 0), 1.0);
        assert_eq!(h1.bracket_entry(1, 0, 0), -1.0);
        assert_close(h1.q_hom(), 2.0, 1e-15);

        let q1 = build_algebra(&AlgebraKind::Quaternionic(1)).unwrap();
        assert_eq!((q1.dim_v, q1.dim_z), (4, 3));
        assert_close(q1.q_hom(), 5.0, 1e-15);
        assert_eq!(q1.n_dim(), 7);
    }

    #[test]
    fn custom_tensor_antisymmetry_is_enforced() {
        // Explicit inconsistent mirror entry must be rejected.
        let bad = AlgebraKind::Custom {
            dim_v: 2,
            dim_z: 1,
            entries: vec![(0, 1, 0, 1.0), (1, 0, 0, 0.0)],
        };
        assert!(build_algebra(&bad).is_err());
        // Diagonal entries cannot be nonzero.
        let diag = AlgebraKind::Custom {
            dim_v: 2,
            dim_z: 1,
            entries: vec![(0, 0, 0, 1.0)],
        };
        assert!(build_algebra(&diag).is_err());
    }

    #[test]
    fn non_htype_custom_builds_and_reports_violation() {
        // dv=3 with only [e1,e2] = ez: J_mu e3 = 0, so the identity fails
        // with relative violation 1 at x = e3.
        let alg = build_algebra(&AlgebraKind::Custom {
            dim_v: 3,
            dim_z: 1,
            entries: vec![(0, 1, 0, 1.0)],
        })
        .unwrap();
        let v = verify_htype(&alg, 2000, 7);
        assert!(v > 0.5, "expected large violation, got {v}");
    }

    #[test]
    fn htype_identity_holds_for_named_families() {
        for kind in [AlgebraKind::Heisenberg(1), AlgebraKind::Heisenberg(3), AlgebraKind::Quaternionic(1), AlgebraKind::Quaternionic(2)] {
            let alg = build_algebra(&kind).unwrap();
            let v = verify_htype(&alg, 10_000, 42);
            assert!(v <= 1e-12, "violation {v} for {kind:?}");
        }
    }

    #[test]
    fn j_map_properties() {
        let alg = build_algebra(&AlgebraKind::Heisenberg(1)).unwrap();
        let jx = alg.j_map(&[1.0], &[1.0, 0.0]).unwrap();
        assert_close(norm(&jx), 1.0, 1e-14);
        assert_close(jx[0], 0.0, 1e-14);
        let zero = alg.j_map(&[0.0], &[1.0, 0.0]).unwrap();
        assert_eq!(zero, vec![0.0, 0.0]);

        // Skew symmetry <J_mu x, x> = 0 and J_mu^2 = -|mu|^2 I.
        let q1 = build_algebra(&AlgebraKind::Quaternionic(1)).unwrap();
        let mut rng = <ChaCha8Rng as SeedableRng>::seed_from_u64(3);
        for _ in 0..200 {
            let x: Vec<f64> = (0..4).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let mu: Vec<f64> = (0..3).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let jx = q1.j_map(&mu, &x).unwrap();
            let dot: f64 = jx.iter().zip(&x).map(|(a, b)| a * b).sum();
            assert!(dot.abs() <= 1e-12);
            let jjx = q1.j_map(&mu, &jx).unwrap();
            let m2 = mu.iter().map(|a| a * a).sum::<f64>();
            for i in 0..4 {
                assert_close(jjx[i], -m2 * x[i], 1e-12);
            }
        }
    }

    #[test]
    fn group_law_examples_and_axioms() {
        let alg = build_algebra(&AlgebraKind::Heisenberg(1)).unwrap();
        let p = NPoint::new(vec![1.0, 0.0], vec![0.0]);
        let q = NPoint::new(vec![0.0, 1.0], vec![0.0]);
        let pq = compose_n(&alg, &p, &q).unwrap();
        assert_eq!(pq.x, vec![1.0, 1.0]);
        assert_close(pq.z[0], 0.5, 1e-15);

        // p p^{-1} = identity.
        let back = compose_n(&alg, &pq, &inverse_n(&pq)).unwrap();
        assert!(norm(&back.x) + norm(&back.z) <= 1e-15);

        // Associativity on random triples.
        let mut rng = <ChaCha8Rng as SeedableRng>::seed_from_u64(11);
        let rnd = |rng: &mut ChaCha8Rng| {
            NPoint::new(
                (0..2).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect(),
                (0..1).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect(),
            )
        };
        for _ in 0..300 {
            let (a, b, c) = (rnd(&mut rng), rnd(&mut rng), rnd(&mut rng));
            let l = compose_n(&alg, &compose_n(&alg, &a, &b).unwrap(), &c).unwrap();
            let r = compose_n(&alg, &a, &compose_n(&alg, &b, &c).unwrap()).unwrap();
            for i in 0..2 {
                assert_close(l.x[i], r.x[i], 1e-13);
            }
            assert_close(l.z[0], r.z[0], 1e-13);
        }
    }

    #[test]
    fn dilations_are_automorphisms() {
        let alg = build_algebra(&AlgebraKind::Quaternionic(1)).unwrap();
        let mut rng = <ChaCha8Rng as SeedableRng>::seed_from_u64(5);
        for _ in 0..200 {
            let p = NPoint::new(
                (0..4).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect(),
                (0..3).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect(),
            );
            let q = NPoint::new(
                (0..4).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect(),
                (0..3).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect(),
            );
            let a = 0.2 + 3.0 * rng.gen::<f64>();
            let lhs = dilate_n(&compose_n(&alg, &p, &q).unwrap(), a);
            let rhs = compose_n(&alg, &dilate_n(&p, a), &dilate_n(&q, a)).unwrap();
            for i in 0..4 {
                assert_close(lhs.x[i], rhs.x[i], 1e-13);
            }
            for k in 0..3 {
                assert_close(lhs.z[k], rhs.z[k], 1e-13);
            }
        }
    }

    #[test]
    fn left_invariant_derivatives_match_closed_forms() {
        let alg = build_algebra(&AlgebraKind::Heisenberg(1)).unwrap();
        // f(x, z) = x_1 along direction 1.
        let f1 = |p: &NPoint| p.x[0];
        let p = NPoint::new(vec![0.3, -0.7], vec![0.2]);
        let d = left_invariant_derivative_n(&alg, 1, &f1, &p, -1.0).unwrap();
        assert_close(d, 1.0, 1e-10);

        // f = z along direction 1 at x = (0, 2): X_1 z = [x, e_1].z/2 = -1.
        let fz = |p: &NPoint| p.z[0];
        let p2 = NPoint::new(vec![0.0, 2.0], vec![0.0]);
        let d2 = left_invariant_derivative_n(&alg, 1, &fz, &p2, -1.0).unwrap();
        assert_close(d2, -1.0, 1e-8);

        // f = H^{-Q/2} with H = (1+|x|^2/4)^2 + |z|^2, central direction:
        // X_3 f = -Q z / H^{Q/2+2-1}... for Q=2: -2z/H^2.
        let q = alg.q_hom();
        let fh = move |p: &NPoint| {
            let h = (1.0 + 0.25 * (p.x[0] * p.x[0] + p.x[1] * p.x[1])).powi(2)
                + p.z[0] * p.z[0];
            h.powf(-q / 2.0)
        };
        let p3 = NPoint::new(vec![0.0, 0.0], vec![1.0]);
        let d3 = left_invariant_derivative_n(&alg, 3, &fh, &p3, -1.0).unwrap();
        assert_close(d3, -2.0 * 1.0 / 4.0, 1e-8);
    }

    #[test]
    fn left_invariance_of_the_derivative() {
        // Derivative of f(q.) at p equals derivative of f at q p.
        let alg = build_algebra(&AlgebraKind::Heisenberg(1)).unwrap();
        let f = |p: &NPoint| (p.x[0] + 0.5 * p.x[1]).sin() * (-p.z[0]).exp();
        let q = NPoint::new(vec![0.4, -0.2], vec![0.3]);
        let p = NPoint::new(vec![-0.1, 0.8], vec![-0.6]);
        let qp = compose_n(&alg, &q, &p).unwrap();
        for j in 1..=3 {
            let alg2 = alg.clone();
            let q2 = q.clone();
            let shifted = move |r: &NPoint| f(&compose_n(&alg2, &q2, r).unwrap());
            let lhs = left_invariant_derivative_n(&alg, j, &shifted, &p, 1e-3).unwrap();
            let rhs = left_invariant_derivative_n(&alg, j, &f, &qp, 1e-3).unwrap();
            assert_close(lhs, rhs, 1e-6);
        }
    }

    #[test]
    fn json_loader_roundtrip() {
        let text = r#"{"dim_v": 2, "dim_z": 1, "entries": [[0, 1, 0, 1.0]]}"#;
        let alg = load_custom_json(text).unwrap();
        assert_eq!(alg.bracket_entry(1, 0, 0), -1.0);
        assert!(verify_htype(&alg, 1000, 1) <= 1e-12);
        assert!(load_custom_json("{").is_err());
    }
}
