mod common;

use aqec_core::analytics::{
    achievable_rate, binary_entropy, bisect, block_lower_bound, choi_upper_bound,
    clifford_baseline, comparison_exponents, decoupling_rhs, depolarizing_hashing_rate,
    depth_formula, emit_rate_curves, f_ave_from_choi, f_of_p, h_of_p, hashing_threshold, log2_add,
    log2_coupling_term, newton, rate_curves_csv, relative_entropy, uniform_grid, BoundQuery,
    DecouplingVariant, Regime, RATE_CURVE_COLUMNS,
};
use aqec_core::ensembles::Family;
use aqec_core::noise::NoiseSpec;
use aqec_core::LabError;
use common::{reference, rel_close};
use proptest::prelude::*;

fn erasure(p: f64) -> NoiseSpec {
    NoiseSpec::ErasureIid { p }
}

#[test]
fn rate_curves_match_reference_table() {
    let want = reference()["rate_curves"].as_array().unwrap().clone();
    let got = emit_rate_curves(&uniform_grid(61, 0.6)).unwrap();
    assert_eq!(got.len(), want.len());
    for (row, w) in got.iter().zip(&want) {
        for (c, (a, b)) in row.iter().zip(w.as_array().unwrap()).enumerate() {
            let b = b.as_f64().unwrap();
            assert!(
                rel_close(*a, b, 1e-10),
                "{} at p = {}: {a} vs {b}",
                RATE_CURVE_COLUMNS[c],
                row[0]
            );
        }
    }
}

#[test]
fn curve_endpoints() {
    let rows = emit_rate_curves(&[0.0, 1.0]).unwrap();
    assert!(rows[0][1..].iter().all(|&v| v == 1.0));
    assert!(rows[1][1..7].iter().all(|&v| v == 0.0));
    assert_eq!(rows[1][7], 1.0);
    assert!(emit_rate_curves(&[1.5]).is_err());
}

#[test]
fn csv_layout() {
    let csv = rate_curves_csv(&emit_rate_curves(&uniform_grid(3, 0.6)).unwrap());
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], RATE_CURVE_COLUMNS.join(","));
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0,1,1,"));
    assert!(lines[2].starts_with("0.3,"));
    assert!(!csv.contains('\r'));
    assert!(lines.iter().all(|l| l.split(',').count() == 8));
}

#[test]
fn hashing_threshold_both_solvers() {
    let want = reference()["hashing_threshold"].as_f64().unwrap();
    let (b, n) = hashing_threshold(1e-14f64).unwrap();
    assert!((b - want).abs() < 1e-12, "{b}");
    assert!((n - want).abs() < 1e-12, "{n}");
    let (b32, n32) = hashing_threshold(1e-6f32).unwrap();
    assert!((b32 as f64 - want).abs() < 1e-5);
    assert!((n32 as f64 - want).abs() < 1e-5);
    assert!(depolarizing_hashing_rate(want).abs() < 1e-12);
}

#[test]
fn root_finders_on_known_roots() {
    let r = bisect(|x: f64| x * x - 2.0, 0.0, 2.0, 1e-15).unwrap();
    assert!((r - 2f64.sqrt()).abs() < 1e-14);
    let r = newton(
        |x: f64| x.cos() - x,
        |x: f64| -x.sin() - 1.0,
        1.0,
        1e-15,
        50,
    )
    .unwrap();
    assert!((r - 0.7390851332151607).abs() < 1e-14);
    assert!(bisect(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    assert!(newton(|_: f64| 1.0, |_: f64| 0.0, 0.0, 1e-12, 10).is_err());
}

#[test]
fn double_layer_erasure_bounds_match_reference() {
    let r = reference();
    let cases = [
        ("double_layer_erasure_256", 256, 51, 0.1),
        ("double_layer_erasure_1024", 1024, 256, 0.05),
    ];
    for (key, n, k, p) in cases {
        let q = BoundQuery::new(Family::DoubleLayer, erasure(p), n, k, 1.0 / n as f64);
        let rep = choi_upper_bound(&q).unwrap();
        let w = &r[key];
        assert!(
            rel_close(rep.value, w["value"].as_f64().unwrap(), 1e-12),
            "{key}: {}",
            rep.value
        );
        assert!(rel_close(
            rep.log2_terms["decay"],
            w["decay"].as_f64().unwrap(),
            1e-12
        ));
        assert!(rel_close(
            rep.log2_terms["coupling"],
            w["coupling"].as_f64().unwrap(),
            1e-12
        ));
        assert!(!rep.vacuous);
        assert_eq!(rep.formula_id, "double-layer/erasure-iid/non-smooth");
        assert!(rep.warnings.is_empty());
    }
}

#[test]
fn block_lower_bound_matches_reference() {
    let w = &reference()["block_lower_240"];
    let eps = 240f64.powf(-0.375);
    assert!(rel_close(eps, w["epsilon"].as_f64().unwrap(), 1e-15));
    let b = block_lower_bound(240.0, 48.0, eps, 0.25).unwrap();
    assert!(rel_close(
        b.term_poly,
        w["term_poly"].as_f64().unwrap(),
        1e-12
    ));
    assert!(rel_close(
        b.term_const,
        w["term_const"].as_f64().unwrap(),
        1e-12
    ));
    assert!(rel_close(
        b.relative_entropy,
        w["relative_entropy"].as_f64().unwrap(),
        1e-12
    ));
    assert_eq!(b.tau, 0.4);
    assert!(block_lower_bound(240.0, 200.0, eps, 0.25).is_err());
}

#[test]
fn comparison_exponents_match_quoted_values() {
    let w = &reference()["exponents_quoted"];
    let e = comparison_exponents(0.2f64, 0.25, 0.375).unwrap();
    assert!(rel_close(
        e.block_lower,
        w["block_lower"].as_f64().unwrap(),
        1e-12
    ));
    assert!(rel_close(e.double_layer_upper, -0.025, 1e-12));
    assert_eq!(format!("{:.2}", e.block_lower), "0.14");
    assert!(e.block_lower > 0.0);
}

#[test]
fn clifford_baseline_forms() {
    let rep = clifford_baseline(&NoiseSpec::ErasureFixedT { t: 10 }, 100, 20, None).unwrap();
    assert!(rel_close(
        rep.log2_value,
        -(100.0 - 20.0 - 20.0) / 4.0,
        1e-15
    ));
    let rep = clifford_baseline(&erasure(0.1), 100, 20, None).unwrap();
    let rate = 1.0 - 1.3f64.log2();
    assert!(rel_close(
        rep.log2_value,
        -100.0 * (rate - 0.2) / 4.0,
        1e-12
    ));
    let smooth = clifford_baseline(&erasure(0.1), 100, 20, Some(0.01)).unwrap();
    let inner = -100.0 * (0.8 - 0.2 - 0.01);
    let want = 0.5 * (8.0 * 0.01 + 2f64.powf(0.5 * inner)).log2();
    assert!(rel_close(smooth.log2_value, want, 1e-12));
    assert!(clifford_baseline(&NoiseSpec::ErasureFixedT { t: 1 }, 10, 2, Some(0.1)).is_err());
}

#[test]
fn unsupported_combinations() {
    let q = BoundQuery::new(Family::Brickwork, erasure(0.1), 64, 8, 0.1).with_delta(0.01);
    assert!(matches!(choi_upper_bound(&q), Err(LabError::Parameter(_))));
    let q = BoundQuery::new(Family::BlockEncoding, erasure(0.1), 64, 8, 0.1);
    assert!(matches!(
        choi_upper_bound(&q),
        Err(LabError::Unsupported(_))
    ));
    let q = BoundQuery::new(
        Family::Brickwork,
        NoiseSpec::ErasureFixedT { t: 2 },
        64,
        8,
        0.1,
    );
    assert!(matches!(
        choi_upper_bound(&q),
        Err(LabError::Unsupported(_))
    ));
    let q = BoundQuery::new(
        Family::DoubleLayer,
        NoiseSpec::ZzCoupling { p: 0.01 },
        64,
        8,
        0.1,
    )
    .with_delta(0.1);
    assert!(choi_upper_bound(&q).is_err());
    let q = BoundQuery::new(Family::DoubleLayer, erasure(0.1), 64, 8, 0.1).with_delta(1.5);
    assert!(choi_upper_bound(&q).is_err());
    let q = BoundQuery::new(Family::DoubleLayer, erasure(0.1), 64, 80, 0.1);
    assert!(choi_upper_bound(&q).is_err());
}

#[test]
fn rate_above_capacity_warns_and_is_vacuous() {
    let q = BoundQuery::new(Family::DoubleLayer, erasure(0.4), 256, 200, 1.0 / 256.0);
    let rep = choi_upper_bound(&q).unwrap();
    assert!(rep.vacuous);
    assert!(!rep.warnings.is_empty());
}

#[test]
fn zz_rates_depend_on_family() {
    let p = 0.02f64;
    let base = 1.0 - 2.0 * ((1.0 - p).sqrt() + p.sqrt()).log2();
    let zz = NoiseSpec::ZzCoupling { p };
    let dl = achievable_rate(&zz, Regime::NonSmooth, Family::DoubleLayer, None::<f64>).unwrap();
    assert!(rel_close(dl, base, 1e-14));
    let bw = achievable_rate(&zz, Regime::NonSmooth, Family::Brickwork, Some(0.25)).unwrap();
    let want = 1.0 - 2.0 * 1.25 * ((1.0 - p).sqrt() + p.sqrt()).log2();
    assert!(rel_close(bw, want, 1e-14));
    assert!(achievable_rate(&zz, Regime::NonSmooth, Family::Brickwork, None::<f64>).is_err());
    let plain = choi_upper_bound(&BoundQuery::new(Family::DoubleLayer, zz, 256, 10, 1.0)).unwrap();
    let finite = choi_upper_bound(
        &BoundQuery::new(Family::DoubleLayer, zz, 256, 10, 1.0).with_finite_block(),
    )
    .unwrap();
    let xi = 8.0;
    let finite_rate = 1.0 - 2.0 * (1.0 + 1.0 / xi) * ((1.0 - p).sqrt() + p.sqrt()).log2();
    assert!(rel_close(finite.rate.unwrap(), finite_rate, 1e-14));
    assert!(finite.log2_terms["decay"] > plain.log2_terms["decay"]);
}

#[test]
fn amplitude_damping_rates() {
    let p = 0.3f64;
    let a = NoiseSpec::AmplitudeDamping { p };
    let ns = achievable_rate(&a, Regime::NonSmooth, Family::DoubleLayer, None::<f64>).unwrap();
    assert!(rel_close(
        ns,
        -(1.0 / 1.7 + (0.3f64 / 1.7).sqrt()).log2(),
        1e-14
    ));
    let sm = achievable_rate(&a, Regime::Smooth, Family::DoubleLayer, None::<f64>).unwrap();
    assert!(rel_close(
        sm,
        binary_entropy(0.35) - binary_entropy(0.15),
        1e-14
    ));
}

#[test]
fn huge_registers_stay_finite() {
    let mut last = 0.0;
    for n in [1usize << 20, 1 << 26, 1 << 30] {
        let q = BoundQuery::new(Family::DoubleLayer, erasure(0.05), n, n / 4, 1.0 / n as f64);
        let rep = choi_upper_bound(&q).unwrap();
        assert!(rep.log2_value.is_finite() && rep.log2_value < last);
        last = rep.log2_value;
        let q = BoundQuery::new(
            Family::Brickwork,
            erasure(0.05),
            n,
            n / 1024,
            1.0 / n as f64,
        );
        assert!(choi_upper_bound(&q).unwrap().log2_value.is_finite());
    }
}

#[test]
fn coupling_term_closed_form() {
    let v: f64 = log2_coupling_term(256.0, 64.0, 1.0 / 256.0).unwrap();
    assert!(rel_close(v, 2.0 + 0.75 * -8.0 + 0.25 * 8.0 - 4.0, 1e-14));
    assert!(log2_coupling_term(4.0f64, 1.0, 8.0).is_err());
}

#[test]
fn depth_formulas() {
    assert_eq!(
        depth_formula(Family::DoubleLayer, 256, 51, 1.0 / 256.0).unwrap(),
        2
    );
    assert_eq!(
        depth_formula(Family::BlockEncoding, 256, 51, 1.0 / 256.0).unwrap(),
        1
    );
    let bw = depth_formula(Family::Brickwork, 64, 8, 0.01).unwrap();
    let gap = ((256.0f64 * 256.0 + 1.0) / 512.0).log2();
    let real = (6400.0f64).log2() + 6.0 / gap + (std::f64::consts::E - 1.0).log2() / gap + 1.0;
    assert_eq!(bw, real.ceil() as usize);
}

#[test]
fn average_fidelity_conversion() {
    assert_eq!(f_ave_from_choi(1.0f64, 3), 1.0);
    let f = f_ave_from_choi(0.5f64, 1);
    assert!(rel_close(f, ((2.0 * 0.25 + 1.0) / 3.0f64).sqrt(), 1e-15));
}

#[test]
fn decoupling_noiseless_limit() {
    let blocks = 4;
    let xi = 3u32;
    let s = 8.0f64;
    let eta = s / (s * s + 1.0);
    let c = 2.0 * ((1.0 + 2.0 * eta).powi(blocks - 1) - 1.0);
    let h_se = vec![f64::INFINITY; 2 * blocks as usize];
    let h_sr = vec![0.0; 2 * blocks as usize];
    let v = decoupling_rhs(DecouplingVariant::DoubleLayer { xi }, &h_se, &h_sr).unwrap();
    assert!(rel_close(v, c.sqrt(), 1e-14));
    assert!(decoupling_rhs(
        DecouplingVariant::DoubleLayer { xi },
        &h_se[..3],
        &h_sr[..3]
    )
    .is_err());
}

#[test]
fn generic_over_f32() {
    let a: f32 = achievable_rate(&erasure(0.1), Regime::Smooth, Family::DoubleLayer, None).unwrap();
    assert!((a - 0.8).abs() < 1e-6);
    let rows = emit_rate_curves(&[0.1f32, 0.2]).unwrap();
    let wide = emit_rate_curves(&[0.1f64, 0.2]).unwrap();
    for (r, w) in rows.iter().zip(&wide) {
        for (x, y) in r.iter().zip(w) {
            assert!((*x as f64 - y).abs() < 1e-5);
        }
    }
}

#[test]
fn log2_add_cases() {
    assert_eq!(log2_add(f64::NEG_INFINITY, 3.0), 3.0);
    assert!(rel_close(log2_add(1.0, 1.0), 2.0, 1e-15));
    assert!(rel_close(log2_add(-2000.0, -2000.0), -1999.0, 1e-15));
}

fn simplex() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(0.0f64..1.0).prop_map(|v| {
        let s: f64 = v.iter().sum::<f64>() + 1e-12;
        v.map(|x| x / s)
    })
}

proptest! {
    #[test]
    fn shannon_never_exceeds_half_renyi(p in simplex()) {
        prop_assert!(h_of_p(p) <= f_of_p(p) + 1e-12);
        prop_assert!(f_of_p(p) <= 2.0 + 1e-12);
    }

    #[test]
    fn smooth_rates_dominate(p in 0.0f64..=1.0) {
        for noise in [erasure(p), NoiseSpec::AmplitudeDamping { p }, NoiseSpec::Depolarizing { p }] {
            let ns = achievable_rate(&noise, Regime::NonSmooth, Family::DoubleLayer, None::<f64>).unwrap();
            let sm = achievable_rate(&noise, Regime::Smooth, Family::DoubleLayer, None::<f64>).unwrap();
            prop_assert!(sm >= ns - 1e-12, "{noise}: {sm} < {ns}");
        }
    }

    #[test]
    fn curves_decrease_in_p(a in 0.0f64..=0.5, b in 0.0f64..=0.5) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let rows = emit_rate_curves(&[lo, hi]).unwrap();
        for c in 1..8 {
            prop_assert!(rows[1][c] <= rows[0][c] + 1e-12, "column {}", RATE_CURVE_COLUMNS[c]);
            prop_assert!((0.0..=1.0).contains(&rows[0][c]));
        }
    }

    #[test]
    fn bounds_shrink_with_more_qubits(p in 0.01f64..0.15, r in 0.05f64..0.3) {
        let n1 = 1usize << 12;
        let n2 = 1usize << 16;
        let v = |n: usize| {
            let k = (r * n as f64) as usize;
            choi_upper_bound(&BoundQuery::new(Family::DoubleLayer, erasure(p), n, k, 1.0 / n as f64))
                .unwrap()
                .log2_value
        };
        if r < 1.0 - (1.0 + 3.0 * p).log2() {
            prop_assert!(v(n2) < v(n1));
        }
    }

    #[test]
    fn relative_entropy_is_nonnegative(a in 0.0f64..1.0, b in 0.001f64..0.999) {
        prop_assert!(relative_entropy(a, b) >= -1e-12);
        prop_assert!(relative_entropy(b, b).abs() < 1e-12);
    }
}
