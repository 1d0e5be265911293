use std::f64::consts::PI;

use cmc_tori::flow::{
    bouquet_limit, endpoint_h, has_minimal, level_constant, minimal_in_family,
    state_closing_residual, trace_family, trace_rotational, EventKind, TraceOptions,
};
use cmc_tori::genus0::{flat_roots, Triple};
use cmc_tori::spectral::{knot_type, nu_circle, omega_circle, sym_to_coords, SymPoints};

fn tr(l0: i64, l1: i64, l2: i64) -> Triple {
    Triple::new(l0, l1, l2).unwrap()
}

#[test]
fn family_213() {
    let t = tr(2, 1, 3);
    let f = trace_family(&t, &TraceOptions::default()).unwrap();
    assert_eq!(f.end_triple, Some(t));
    assert_eq!(f.qdot_sign_changes, 1);
    for s in &f.samples {
        assert!((level_constant(&s.point).unwrap() - f.c).abs() < 1e-8 * f.c);
        assert!(s.point.q >= f.c.sqrt() / (2.0 + 2.0 * f.c.sqrt()));
    }
    for w in f.samples.windows(2) {
        assert!(w[1].mean_curvature < w[0].mean_curvature);
        assert!(w[1].point.k > w[0].point.k);
    }
    let last = f.samples.last().unwrap();
    assert!((last.mean_curvature.abs() - 1.0 / 15f64.sqrt()).abs() < 1e-6);
    let mins: Vec<_> = f
        .events
        .iter()
        .filter(|e| e.kind == EventKind::Minimal)
        .collect();
    assert_eq!(mins.len(), 1);
    assert!(mins[0].state.mean_curvature.abs() < 1e-8);
    assert_eq!(
        f.events
            .iter()
            .filter(|e| e.kind == EventKind::CutCrossing)
            .count(),
        1
    );
}

#[test]
fn family_314_has_no_minimal() {
    let t = tr(3, 1, 4);
    let f = trace_family(&t, &TraceOptions::default()).unwrap();
    assert_eq!(f.end_triple, Some(tr(2, 1, 4)));
    assert!(f.minimal().is_none());
    assert!(minimal_in_family(&t, &TraceOptions::default())
        .unwrap()
        .is_none());
    let (h0, h1) = endpoint_h(&t).unwrap();
    assert!((f.samples[0].mean_curvature - h0).abs() < 1e-14);
    assert!((f.samples.last().unwrap().mean_curvature - h1).abs() < 1e-6);
}

#[test]
fn closing_and_knot_type_preserved() {
    let t = tr(2, 1, 5);
    let f = trace_family(&t, &TraceOptions::default()).unwrap();
    let s = f.s.unwrap();
    let step = (f.samples.len() / 25).max(1);
    for st in f.samples.iter().step_by(step) {
        if st.sp.theta2 < 1e-6 {
            continue;
        }
        let (r1, r2) = state_closing_residual(st, s).unwrap();
        assert!(r1.abs() < 1e-6 && r2.abs() < 1e-6, "t={} {r1} {r2}", st.t);
        let no = st.nu_omega().unwrap();
        let kt = knot_type(no.nu1, no.nu2, 1e-7).unwrap();
        assert_eq!((kt.m, kt.n), (1, 5));
    }
}

#[test]
fn state_at_interpolates() {
    let f = trace_family(&tr(2, 1, 3), &TraceOptions::default()).unwrap();
    let mid = f.state_at(f.t_mid()).unwrap();
    assert!((level_constant(&mid.point).unwrap() - f.c).abs() < 1e-8);
    // for this self-involutive family the minimal torus sits on the cut (k = h = 0)
    let m = f.minimal().unwrap();
    let cut = f
        .events
        .iter()
        .find(|e| e.kind == EventKind::CutCrossing)
        .unwrap();
    assert!((m.t - cut.t).abs() < 1e-8);
    assert_eq!(f.state_at(cut.t + 1e-7).unwrap().sp.sheet, 1);
    assert_eq!(f.state_at(cut.t - 1e-7).unwrap().sp.sheet, 0);
    assert!(f.state_at(f.t_end() + 1.0).is_err());
}

#[test]
fn start_matches_spectral_data_of_triple() {
    for t in [tr(2, 1, 3), tr(3, 1, 4), tr(5, 2, 7)] {
        let (_, r1, r2) = flat_roots(&t).unwrap();
        let sp = SymPoints::new(r1.arg(), r2.arg());
        let (k, h, _) = sym_to_coords(&sp).unwrap();
        let f = trace_family(&t, &TraceOptions::default()).unwrap();
        let p = f.samples[0].point;
        assert!((k - p.k).abs() < 1e-12 && (h - p.h).abs() < 1e-12, "{t}");
    }
}

#[test]
fn rotational_families() {
    for (l2, h_end) in [(2, 0.0), (3, 1.0 / 3f64.sqrt())] {
        let f = trace_rotational(1, l2, &TraceOptions::default()).unwrap();
        let (th, hb) = bouquet_limit(1, l2).unwrap();
        let b = f.bouquet.unwrap();
        assert!((b.theta0 - th).abs() < 1e-4, "{l2}: {} vs {th}", b.theta0);
        assert!((hb - h_end).abs() < 1e-12);
        assert!((b.mean_curvature - h_end).abs() < 1e-4);
        let (h0, _) = endpoint_h(&tr(1, 0, l2)).unwrap();
        assert!((f.samples[0].mean_curvature - h0).abs() < 1e-14);
        for w in f.samples.windows(2) {
            assert_eq!(w[1].point.k, -1.0);
            assert!(w[1].mean_curvature < w[0].mean_curvature);
        }
        assert!(f.minimal().is_none());
        // ω at θ0 equals r = ℓ0/ℓ2 along the family
        let r = 1.0 / l2 as f64;
        for st in f.samples.iter().step_by(f.samples.len() / 10) {
            let th0 = st.sp.theta1.min(PI - st.sp.theta1);
            let w = omega_circle(th0, st.point.q, 0).unwrap();
            assert!((w - r).abs() < 1e-7, "{} {w}", st.point.q);
            assert!(
                (nu_circle(st.sp.theta1, st.point.q) - nu_circle(st.sp.theta2, st.point.q)).abs()
                    < 1e-12
            );
        }
    }
}

#[test]
fn rotational_with_minimal() {
    let t = tr(5, 0, 8);
    assert!(has_minimal(&t));
    let m = minimal_in_family(&t, &TraceOptions::default())
        .unwrap()
        .unwrap();
    assert!(m.mean_curvature.abs() < 1e-8);
}

#[test]
fn minimal_flat_endpoint_counts() {
    // ℓ1² + ℓ2² = 2 ℓ̂0²: the end of the family is a flat minimal torus
    for t in [tr(3, 1, 7), tr(5, 1, 7)] {
        assert!(has_minimal(&t));
        let f = trace_family(&t, &TraceOptions::default()).unwrap();
        let mins: Vec<_> = f
            .events
            .iter()
            .filter(|e| e.kind == EventKind::Minimal)
            .collect();
        assert_eq!(mins.len(), 1, "{t}");
        assert!(mins[0].state.mean_curvature.abs() < 1e-6);
        let end = if mins[0].t == 0.0 {
            endpoint_h(&t).unwrap().0
        } else {
            endpoint_h(&t).unwrap().1
        };
        assert!(end.abs() < 1e-12, "{t}: {end}");
    }
}
