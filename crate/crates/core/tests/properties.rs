//! Property tests over randomly drawn devices, drives and traces.

use std::f64::consts::TAU;
use std::path::Path;

use approx::{assert_abs_diff_eq, assert_relative_eq};
use asq_core::coupling::{j_analytic, j_current_product, j_numeric, total_potential, SignConvention};
use asq_core::fitting::coherence::t1_model;
use asq_core::fitting::synth::peak_pair;
use asq_core::fitting::{extract_j, fit_t1, Trace};
use asq_core::io::{parse_grid, Table};
use asq_core::lindblad::{rotating_hamiltonian, steady_state, DecayRates, DriveConfig};
use asq_core::model::{AsqInductance, DeviceParams, FluxPoint, SpinConfig};
use proptest::prelude::*;

fn device() -> impl Strategy<Value = DeviceParams> {
    (0.0..2.5f64, 0.0..2.5f64, 0.0..1.0f64, 0.0..1.0f64, 5.0..60.0f64).prop_map(|(a, b, c, d, ej_c)| DeviceParams {
        ej_i_1: a,
        ej_i_2: b,
        ej_s_1: c,
        ej_s_2: d,
        ej_c,
        e_c: 0.2,
        skew_1: 0.0,
        skew_2: 0.0,
    })
}

fn flux() -> impl Strategy<Value = FluxPoint> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| FluxPoint::new(a, b))
}

fn drive() -> impl Strategy<Value = DriveConfig> {
    (0.0..20.0f64, 0.0..20.0f64, -400.0..400.0f64, -400.0..400.0f64, -300.0..300.0f64).prop_map(
        |(omega_p1, omega_p2, delta_1, delta_2, j)| DriveConfig { omega_p1, omega_p2, delta_1, delta_2, j },
    )
}

fn rates() -> impl Strategy<Value = DecayRates> {
    (-1.0..3.0f64, -1.0..3.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b, c, d)| DecayRates {
        t1_1: 10f64.powf(a),
        t1_2: 10f64.powf(b),
        t2_1: 10f64.powf(c),
        t2_2: 10f64.powf(d),
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn potential_is_periodic(p in device(), f in flux(), phase in -10.0..10.0f64) {
        for c in SpinConfig::ALL {
            let v = total_potential(&p, c, f, phase);
            assert_abs_diff_eq!(v, total_potential(&p, c, f, phase + TAU), epsilon = 1e-9);
            let shifted = FluxPoint::new(f.flux_1 + 1.0, f.flux_2 - 1.0);
            assert_abs_diff_eq!(v, total_potential(&p, c, shifted, phase), epsilon = 1e-9);
        }
    }

    #[test]
    fn numeric_j_is_periodic_and_label_symmetric(p in device(), f in flux()) {
        let j = j_numeric(&p, f).j;
        let shifted = j_numeric(&p, FluxPoint::new(f.flux_1 + 1.0, f.flux_2)).j;
        assert_abs_diff_eq!(j, shifted, epsilon = 1e-6);
        let swapped = j_numeric(&p.swapped(), FluxPoint::new(f.flux_2, f.flux_1)).j;
        assert_abs_diff_eq!(j, swapped, epsilon = 1e-6);
    }

    #[test]
    fn analytic_j_approaches_numeric_for_stiff_coupling(p in device(), f in flux()) {
        let p = DeviceParams { ej_c: 40.0 + p.ej_c * 5.0, ..p };
        let n = j_numeric(&p, f).j;
        let a = j_analytic(&p, f).unwrap().j;
        // the leading term is 2 E1 E2 / E_JC; corrections are smaller by E / E_JC
        let scale = 2e3 * p.ej_s_1 * p.ej_s_2 / p.ej_c;
        prop_assert!((a - n).abs() <= 0.05 * scale + 1e-6, "{a} vs {n} (scale {scale})");
    }

    #[test]
    fn current_product_is_bilinear(l_jc in 1.0..100.0f64, l in 50.0..500.0f64, i1 in -10.0..10.0f64, i2 in -10.0..10.0f64, k in 0.1..10.0f64) {
        let l_asq = AsqInductance::Finite(l);
        let base = j_current_product(l_jc, l_asq, i1, i2).unwrap();
        assert_relative_eq!(j_current_product(l_jc, l_asq, k * i1, i2).unwrap().j, k * base.j, max_relative = 1e-12);
        assert_relative_eq!(j_current_product(l_jc, l_asq, i2, -i1).unwrap().j, -base.j, max_relative = 1e-12);
        prop_assert_eq!(base.in_convention(SignConvention::Eigenenergy), -base.j);
        let looser = j_current_product(l_jc, AsqInductance::Divergent, i1, i2).unwrap().j;
        prop_assert!(looser.abs() >= base.j.abs());
    }

    #[test]
    fn steady_state_is_a_valid_density_matrix(cfg in drive(), r in rates()) {
        let sol = steady_state(&rotating_hamiltonian(&cfg), &r).unwrap();
        prop_assert!(sol.report.passes(), "{:?}", sol.report);
        assert_abs_diff_eq!(sol.populations.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
        prop_assert!(sol.populations.iter().all(|p| (-1e-9..=1.0 + 1e-9).contains(p)));
    }

    #[test]
    fn relabeling_qubits_permutes_populations(cfg in drive(), r in rates()) {
        let a = steady_state(&rotating_hamiltonian(&cfg), &r).unwrap();
        let b = steady_state(&rotating_hamiltonian(&cfg.swapped()), &r.swapped()).unwrap();
        for c in SpinConfig::ALL {
            assert_abs_diff_eq!(a.population(c), b.population(c.swapped()), epsilon = 1e-8);
        }
    }

    #[test]
    fn common_time_rescaling_leaves_steady_state(cfg in drive(), r in rates(), k in 0.1..10.0f64) {
        let a = steady_state(&rotating_hamiltonian(&cfg), &r).unwrap();
        let scaled = DriveConfig {
            omega_p1: k * cfg.omega_p1,
            omega_p2: k * cfg.omega_p2,
            delta_1: k * cfg.delta_1,
            delta_2: k * cfg.delta_2,
            j: k * cfg.j,
        };
        let b = steady_state(&rotating_hamiltonian(&scaled), &r.scaled(k)).unwrap();
        for (x, y) in a.populations.iter().zip(&b.populations) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-8);
        }
    }

    #[test]
    fn t1_fit_is_affine_equivariant(a in 0.2..2.0f64, t1 in 5.0..50.0f64, c in -1.0..1.0f64, k in 0.1..10.0f64, b in -5.0..5.0f64) {
        let t: Vec<f64> = (0..120).map(|i| i as f64).collect();
        let y: Vec<f64> = t.iter().map(|&x| t1_model(x, &[a, t1, c]) + 1e-3 * (x * 1.7).sin()).collect();
        let ys: Vec<f64> = y.iter().map(|v| k * v + b).collect();
        let f = fit_t1(&t, &y).unwrap();
        let g = fit_t1(&t, &ys).unwrap();
        assert_relative_eq!(f.p("T1"), t1, max_relative = 0.05);
        assert_relative_eq!(g.p("T1"), f.p("T1"), max_relative = 1e-5);
        assert_relative_eq!(g.p("a"), k * f.p("a"), max_relative = 1e-5);
        assert_abs_diff_eq!(g.p("c"), k * f.p("c") + b, epsilon = 1e-5 * (k + b.abs()));
    }

    #[test]
    fn peak_decision_ignores_signal_scale(seed in 0u64..1000, k in 0.05..20.0f64) {
        let (x, u, d) = peak_pair(3.4, 0.01, -140.0, 0.5, 0.05, seed);
        let a = extract_j(&Trace::new(&x, &u), &Trace::new(&x, &d)).unwrap();
        let us: Vec<f64> = u.iter().map(|v| v * k).collect();
        let ds: Vec<f64> = d.iter().map(|v| v * k).collect();
        let b = extract_j(&Trace::new(&x, &us), &Trace::new(&x, &ds)).unwrap();
        prop_assert_eq!(a.kind, b.kind);
        assert_relative_eq!(a.j_mhz, b.j_mhz, max_relative = 1e-6, epsilon = 1e-9);
    }
}

proptest! {
    #[test]
    fn grids_hit_both_ends(a in -1e3..1e3f64, b in -1e3..1e3f64, n in 2usize..500) {
        let g = parse_grid(&format!("{a}:{b}:{n}")).unwrap();
        prop_assert_eq!(g.len(), n);
        prop_assert_eq!(g[0], a);
        assert_abs_diff_eq!(g[n - 1], b, epsilon = 1e-12 * (a.abs() + b.abs()));
    }

    #[test]
    fn csv_round_trip_is_bit_exact(rows in prop::collection::vec(prop::array::uniform3(any::<f64>()), 1..20)) {
        let mut t = Table::new(["x", "y", "z"]);
        for r in &rows {
            t.push(r.to_vec());
        }
        let back = Table::from_csv_str(&t.to_csv_string(), Path::new("mem")).unwrap();
        for (x, y) in back.rows.iter().flatten().zip(t.rows.iter().flatten()) {
            prop_assert!(x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()));
        }
    }
}
