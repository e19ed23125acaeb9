//! Randomized structural invariants: algebra and group laws, metric
//! symmetries, jet arithmetic against polynomial algebra, and determinism
//! of the quadrature layer.

use drkit_core::htype::{
    build_algebra, compose_n, dilate_n, inverse_n, norm, AlgebraKind, HTypeAlgebra, NPoint,
};
use drkit_core::jet::Jet;
use drkit_core::quad::{adaptive_gk, integrate_halfline};
use drkit_core::space::{
    compose_s, distance_s, identity_s, inverse_s, modular_fn, SPoint,
};
use drkit_core::specfun::gamma_fn;
use proptest::prelude::*;

fn models() -> Vec<HTypeAlgebra> {
    vec![
        build_algebra(&AlgebraKind::Heisenberg(1)).unwrap(),
        build_algebra(&AlgebraKind::Quaternionic(1)).unwrap(),
    ]
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn vec_close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(&x, &y)| close(x, y, tol))
}

fn s_point(alg: &HTypeAlgebra, seed: &[f64], a: f64) -> SPoint {
    let x: Vec<f64> = (0..alg.dim_v).map(|i| seed[i % seed.len()] * ((i + 1) as f64)).collect();
    let z: Vec<f64> = (0..alg.dim_z)
        .map(|i| seed[(i + 2) % seed.len()] - 0.5 * seed[i % seed.len()])
        .collect();
    SPoint::new(x, z, a)
}

fn n_point(alg: &HTypeAlgebra, seed: &[f64]) -> NPoint {
    let x: Vec<f64> = (0..alg.dim_v).map(|i| seed[(i + 1) % seed.len()] * 0.7).collect();
    let z: Vec<f64> = (0..alg.dim_z).map(|i| seed[(i + 3) % seed.len()] + 0.1).collect();
    NPoint::new(x, z)
}

/// Taylor coefficient of a polynomial (coefficients in the monomial basis)
/// around `x0`, by synthetic division.
fn taylor_shift(coeffs: &[f64], x0: f64) -> Vec<f64> {
    let mut work = coeffs.to_vec();
    let n = work.len();
    let mut out = vec![0.0; n];
    for item in out.iter_mut() {
        // divide work by (x - x0): remainder is the next Taylor coefficient
        let mut rem = 0.0;
        for c in work.iter_mut().rev() {
            let next = *c + rem * x0;
            rem = next;
            *c = next;
        }
        // work now holds [remainder, quotient...]; shift it down
        *item = work[0];
        work.remove(0);
        work.push(0.0);
        if work.iter().all(|&c| c == 0.0) {
            break;
        }
    }
    let _ = n;
    out
}

fn poly_jet(coeffs: &[f64], x0: f64, len: usize) -> Jet {
    let x = Jet::variable(x0, len - 1);
    let mut acc = Jet::constant(0.0, len - 1);
    for &c in coeffs.iter().rev() {
        acc = acc.mul(&x).add(&Jet::constant(c, len - 1));
    }
    acc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jet_products_match_polynomial_algebra(
        p in proptest::collection::vec(-2.0f64..2.0, 1..5),
        q in proptest::collection::vec(-2.0f64..2.0, 1..5),
        x0 in -1.5f64..1.5,
    ) {
        // product polynomial in the monomial basis
        let mut prod = vec![0.0; p.len() + q.len() - 1];
        for (i, &a) in p.iter().enumerate() {
            for (j, &b) in q.iter().enumerate() {
                prod[i + j] += a * b;
            }
        }
        let len = prod.len() + 1;
        let jp = poly_jet(&p, x0, len);
        let jq = poly_jet(&q, x0, len);
        let jprod = jp.mul(&jq);
        let want = taylor_shift(&prod, x0);
        for (k, &w) in want.iter().enumerate() {
            prop_assert!(close(jprod.coeff(k), w, 1e-10),
                "coefficient {k}: jet {} vs poly {}", jprod.coeff(k), w);
        }
    }

    #[test]
    fn group_axioms_hold_on_s(
        seed in proptest::collection::vec(-2.0f64..2.0, 4),
        la in -2.0f64..2.0,
        lb in -2.0f64..2.0,
        lc in -2.0f64..2.0,
    ) {
        for alg in models() {
            let p = s_point(&alg, &seed, la.exp());
            let q = s_point(&alg, &seed[1..].to_vec(), lb.exp());
            let r = s_point(&alg, &[seed[3], seed[0], seed[2], seed[1]], lc.exp());
            let left = compose_s(&alg, &compose_s(&alg, &p, &q).unwrap(), &r).unwrap();
            let right = compose_s(&alg, &p, &compose_s(&alg, &q, &r).unwrap()).unwrap();
            prop_assert!(vec_close(&left.x, &right.x, 1e-12));
            prop_assert!(vec_close(&left.z, &right.z, 1e-12));
            prop_assert!(close(left.a, right.a, 1e-12));

            let e = identity_s(&alg);
            let pe = compose_s(&alg, &p, &e).unwrap();
            prop_assert!(vec_close(&pe.x, &p.x, 1e-12) && close(pe.a, p.a, 1e-12));

            let pinv = inverse_s(&p);
            let id = compose_s(&alg, &p, &pinv).unwrap();
            prop_assert!(norm(&id.x) <= 1e-12 * (1.0 + norm(&p.x)));
            prop_assert!(norm(&id.z) <= 1e-11 * (1.0 + norm(&p.z)).powi(2));
            prop_assert!(close(id.a, 1.0, 1e-12));
        }
    }

    #[test]
    fn dilations_are_automorphisms_of_n(
        seed in proptest::collection::vec(-2.0f64..2.0, 4),
        lr in -1.5f64..1.5,
    ) {
        let r = lr.exp();
        for alg in models() {
            let p = n_point(&alg, &seed);
            let q = n_point(&alg, &[seed[2], seed[0], seed[3], seed[1]]);
            let lhs = dilate_n(&compose_n(&alg, &p, &q).unwrap(), r);
            let rhs = compose_n(&alg, &dilate_n(&p, r), &dilate_n(&q, r)).unwrap();
            prop_assert!(vec_close(&lhs.x, &rhs.x, 1e-12));
            prop_assert!(vec_close(&lhs.z, &rhs.z, 1e-12));
            // anisotropic scaling: x by sqrt(r), z by r
            let d = dilate_n(&p, r);
            prop_assert!(close(norm(&d.x), r.sqrt() * norm(&p.x), 1e-12));
            prop_assert!(close(norm(&d.z), r * norm(&p.z), 1e-12));
        }
    }

    #[test]
    fn metric_symmetries_hold(
        seed in proptest::collection::vec(-3.0f64..3.0, 4),
        la in -3.0f64..3.0,
    ) {
        for alg in models() {
            let p = s_point(&alg, &seed, la.exp());
            let d = distance_s(&p);
            let dinv = distance_s(&inverse_s(&p));
            prop_assert!(close(d, dinv, 1e-9), "d={d} d(inv)={dinv}");
            prop_assert!(d >= la.abs() - 1e-9, "|p| = {d} < |log a| = {}", la.abs());
            prop_assert!(d >= 0.0);
        }
    }

    #[test]
    fn modular_function_is_a_homomorphism(
        seed in proptest::collection::vec(-2.0f64..2.0, 4),
        la in -2.0f64..2.0,
        lb in -2.0f64..2.0,
    ) {
        for alg in models() {
            let p = s_point(&alg, &seed, la.exp());
            let q = s_point(&alg, &[seed[1], seed[3], seed[0], seed[2]], lb.exp());
            let pq = compose_s(&alg, &p, &q).unwrap();
            prop_assert!(close(
                modular_fn(&alg, &pq),
                modular_fn(&alg, &p) * modular_fn(&alg, &q),
                1e-11
            ));
        }
    }

    #[test]
    fn j_maps_are_skew_isometries(
        xs in proptest::collection::vec(-2.0f64..2.0, 4),
        mus in proptest::collection::vec(-2.0f64..2.0, 3),
    ) {
        for alg in models() {
            let x: Vec<f64> = (0..alg.dim_v).map(|i| xs[i % xs.len()] + 0.1 * i as f64).collect();
            let mu: Vec<f64> = (0..alg.dim_z).map(|i| mus[i % mus.len()]).collect();
            let jx = alg.j_map(&mu, &x).unwrap();
            // skew: <J x, x> = 0
            let dot: f64 = jx.iter().zip(&x).map(|(a, b)| a * b).sum();
            prop_assert!(dot.abs() <= 1e-12 * (1.0 + norm(&x).powi(2)) * (1.0 + norm(&mu)));
            // H-type: J^2 = -|mu|^2 I
            let jjx = alg.j_map(&mu, &jx).unwrap();
            let m2 = norm(&mu).powi(2);
            for (a, b) in jjx.iter().zip(&x) {
                prop_assert!(close(*a, -m2 * b, 1e-12));
            }
        }
    }

    #[test]
    fn gamma_satisfies_its_functional_equation(x in 0.05f64..30.0) {
        let g1 = gamma_fn(x + 1.0).unwrap();
        let g0 = gamma_fn(x).unwrap();
        prop_assert!(close(g1, x * g0, 1e-11), "Gamma({})={g1} vs {}", x + 1.0, x * g0);
    }

    #[test]
    fn quadrature_is_deterministic(c in 0.2f64..3.0, w in 0.2f64..2.0) {
        let f = |t: f64| (-(t - c) * (t - c) / (w * w)).exp();
        let (v1, e1) = integrate_halfline(&f, c.ln(), 1e-300, 1e-10, 40).unwrap();
        let (v2, e2) = integrate_halfline(&f, c.ln(), 1e-300, 1e-10, 40).unwrap();
        prop_assert_eq!(v1.to_bits(), v2.to_bits());
        prop_assert_eq!(e1.to_bits(), e2.to_bits());
        let g = |t: f64| (c * t).sin() * (-t).exp();
        let (a1, _) = adaptive_gk(&g, 0.0, 8.0, 1e-12, 1e-12, 40).unwrap();
        let (a2, _) = adaptive_gk(&g, 0.0, 8.0, 1e-12, 1e-12, 40).unwrap();
        prop_assert_eq!(a1.to_bits(), a2.to_bits());
        // and the value is right: int_0^inf sin(ct) e^{-t} dt = c/(1+c^2)
        let (full, _) = integrate_halfline(&|t: f64| (c * t).sin() * (-t).exp(), 0.0, 1e-300, 1e-11, 40).unwrap();
        prop_assert!(close(full, c / (1.0 + c * c), 1e-8));
    }
}
