use drkit_core::htype::{build_algebra, AlgebraKind};
use drkit_core::heat::*;
use drkit_core::riesz::*;
use drkit_core::symbols::*;
use std::time::Instant;

fn main() {
    let alg = build_algebra(&AlgebraKind::Heisenberg(1)).unwrap();
    let which: String = std::env::args().nth(1).unwrap_or_default();

    if which.is_empty() || which == "resid" {
        let t0 = Instant::now();
        let s = heat_equation_residual(&alg, 1.0, 0.05, 50, 42).unwrap();
        println!(
            "resid t=1 step=0.05: max={:.3e} mean={:.3e}  [{:?}]",
            s.max_normalized, s.mean_normalized, t0.elapsed()
        );
        let t0 = Instant::now();
        let s2 = heat_equation_residual(&alg, 1.0, 0.025, 50, 42).unwrap();
        println!(
            "resid t=1 step=0.025: max={:.3e} mean={:.3e} ratio_mean={:.2} [{:?}]",
            s2.max_normalized,
            s2.mean_normalized,
            s.mean_normalized / s2.mean_normalized,
            t0.elapsed()
        );
        for t in [0.5, 2.0] {
            let t0 = Instant::now();
            let s = heat_equation_residual(&alg, t, 0.05, 50, 42).unwrap();
            println!(
                "resid t={t} step=0.05: max={:.3e} mean={:.3e}  [{:?}]",
                s.max_normalized, s.mean_normalized, t0.elapsed()
            );
        }
    }

    if which.is_empty() || which == "wl1" {
        for t in [1.0, 0.25, 4.0, 16.0] {
            let t0 = Instant::now();
            let table = build_radial_table(&alg, t, (200.0 * t).sqrt() + 6.0).unwrap();
            println!("table t={t}: r_max={:.1} [{:?}]", table.r_max, t0.elapsed());
            for eps in [0.0, 0.5] {
                let t1 = Instant::now();
                let v = weighted_l1(&alg, &table, eps, true, 1e-4).unwrap();
                println!(
                    "wgrad t={t} eps={eps}: sqrt(t)*I = {:.6e}  [{:?}]",
                    t.sqrt() * v,
                    t1.elapsed()
                );
            }
            if t != 16.0 {
                let t1 = Instant::now();
                let tm = build_radial_table(&alg, t, (100.0 * t).sqrt() + 6.0).unwrap();
                let mass = heat_mass(&alg, &tm, 1e-5).unwrap();
                println!("mass t={t}: {:.8} [{:?}]", mass, t1.elapsed());
            }
        }
    }

    if which.is_empty() || which == "env" {
        for t in [0.25, 1.0, 4.0] {
            for r in [0.5, 1.0, 2.0, 5.0, 10.0] {
                let k = kernel_envelope_ratio(&alg, t, r).unwrap();
                let g = gradient_envelope_ratio(&alg, t, r).unwrap();
                println!("env t={t} r={r}: kernel={k:.4e} grad={g:.4e}");
            }
        }
    }

    if which.is_empty() || which == "phi" {
        for e in [10.0f64, 20.0] {
            let x = e.exp();
            let v = phi_big(2, 1, x).unwrap();
            let err = (v * x * x * e - 1.0).abs();
            println!("phi21 X=e^{e}: err={err:.4e} bound 2/logX={:.4e}", 2.0 / e);
        }
    }

    if which.is_empty() || which == "sweep" {
        for kind in SymbolKind::all() {
            let t0 = Instant::now();
            let recs = symbol_derivative_sweep(&alg, kind, 0.9).unwrap();
            for r in &recs {
                println!(
                    "sweep {:?} d({},{}): max_ratio={:.4e}",
                    kind, r.ord_lambda, r.ord_m, r.max_ratio
                );
            }
            let t1 = Instant::now();
            let h = holder_ratio_max(&alg, kind, 0.5, 11, 2000).unwrap();
            println!(
                "holder {:?}: {:.4e}  [sweep {:?}, holder {:?}]",
                kind,
                h,
                t0.elapsed(),
                t1.elapsed()
            );
        }
    }

    if which.is_empty() || which == "opnorm" {
        use rayon::prelude::*;
        let grid = default_grid();
        let t0 = Instant::now();
        let lambdas = cone_lambdas();
        let fracs = cone_fractions();
        for kind in SymbolKind::all() {
            let pts: Vec<(f64, f64)> = lambdas
                .iter()
                .flat_map(|&l| fracs.iter().map(move |&f| (l, f * l)))
                .collect();
            let mats: Vec<Vec<f64>> = pts
                .par_iter()
                .map(|&(l, m)| op_matrix(&alg, kind, l, m, &grid).unwrap())
                .collect();
            for w in [A2Weight::Flat, A2Weight::Power(0.5), A2Weight::Power(-0.5)] {
                let norms: Vec<f64> = mats
                    .par_iter()
                    .map(|a| weighted_norm(a, &grid, &w))
                    .collect();
                let mx = norms.iter().cloned().fold(0.0f64, f64::max);
                let mn = norms.iter().cloned().fold(f64::INFINITY, f64::min);
                println!(
                    "opnorm {:?} {}: min={mn:.4e} max={mx:.4e} band={:.2}",
                    kind,
                    w.label(),
                    mx / mn
                );
            }
        }
        println!("  [grid {:?}]", t0.elapsed());
        let t0 = Instant::now();
        let rg = refined_grid();
        for kind in SymbolKind::all() {
            let c = op_norm(&alg, kind, 1.0, 0.5, &grid, &A2Weight::Flat).unwrap();
            let r = op_norm(&alg, kind, 1.0, 0.5, &rg, &A2Weight::Flat).unwrap();
            let pct = 100.0 * (r - c).abs() / c;
            println!("drift {kind:?}: coarse={c:.5e} refined={r:.5e} drift={pct:.3}%");
        }
        println!("  [refined {:?}]", t0.elapsed());
    }

    if which.is_empty() || which == "ratio" {
        use drkit_core::space::*;
        let t0 = Instant::now();
        let w = WeightSpec::new(2.0, 0.0, -0.5, 0.0, 0.0);
        let rep = weighted_radial_ratio(&alg, &w, RegionVariant::Full, RadialProfile::Gaussian(4.0), 1e-6).unwrap();
        println!("ratio w=(2,0,-.5) full gauss4: {:.4} [{:?}]", rep.ratio, t0.elapsed());
        let t0 = Instant::now();
        let rep = weighted_radial_ratio(&alg, &w, RegionVariant::LowA, RadialProfile::Indicator(1.0), 1e-6).unwrap();
        println!("ratio w=(2,0,-.5) low ind1: {:.4} [{:?}]", rep.ratio, t0.elapsed());
        let t0 = Instant::now();
        let rep = composite_weight_ratio(&alg, CompositeForm::CenterDriftFull, RadialProfile::Gaussian(4.0), 1e-6).unwrap();
        println!("ratio drift_full gauss4: {:.4} [{:?}]", rep.ratio, t0.elapsed());
    }

    if which.is_empty() || which == "subord" {
        for r in [1.0, 2.0, 5.0] {
            let t0 = Instant::now();
            let a = invsqrt_profile(&alg, r).unwrap();
            let b = subordinated_invsqrt(&alg, r).unwrap();
            println!("subord r={r}: rel={:.3e} [{:?}]", (a - b).abs() / a.abs(), t0.elapsed());
        }
    }
}
