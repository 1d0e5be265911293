use std::f64::consts::{FRAC_PI_4, PI};

use cmc_tori::elliptic::{elliptic_ke_comp, jacobi_dn, quad};
use cmc_tori::flow::{trace_family, trace_rotational, FamilyTrace, FlowState, TraceOptions};
use cmc_tori::genus0::{periods_from_windings, Triple};
use cmc_tori::spectral::{nu_circle, nu_omega, Omega, SymPoints};
use cmc_tori::surface::*;
use num_complex::Complex64;

fn rotational_state(l0: i64, l2: i64, q: f64) -> (FamilyTrace, FlowState) {
    let f = trace_rotational(l0, l2, &TraceOptions::default()).unwrap();
    let st = f.state_at_q(q).unwrap();
    assert!((st.point.q - q).abs() < 1e-12);
    (f, st)
}

fn twizzled_state(t: Triple, frac: f64) -> (FamilyTrace, FlowState) {
    let f = trace_family(&t, &TraceOptions::default()).unwrap();
    let st = f
        .state_at(f.t_start() + frac * (f.t_end() - f.t_start()))
        .unwrap();
    (f, st)
}

fn norm4(p: &[f64; 4]) -> f64 {
    p.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[test]
fn closed_formula_matches_matrix_product() {
    for (q, t1, t2) in [
        (0.7, 0.5, 2.2),
        (0.3, 1.2, 0.4),
        (1.0, FRAC_PI_4, 3.0 * FRAC_PI_4),
        (0.95, 2.9, 0.1),
    ] {
        let s = Surface::new(q, SymPoints::new(t1, t2)).unwrap();
        for (x, y) in [(0.0, 0.0), (0.4, 1.1), (-2.3, 5.7), (7.0, -3.2)] {
            let a = s.point(x, y).unwrap();
            let b = s.point_matrix(x, y).unwrap();
            let d = (0..4).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max);
            assert!(d < 1e-14, "{q} {t1} {t2}: {d}");
            assert!((norm4(&a) - 1.0).abs() < 1e-14);
        }
    }
}

#[test]
fn frame_solves_the_structure_equations() {
    let s = Surface::new(0.6, SymPoints::new(0.8, 2.6)).unwrap();
    for k in 0..2 {
        for (x, y) in [(0.1, 0.2), (1.5, -0.7), (-0.4, 3.1)] {
            let r = frame_residual(&s, k, x, y).unwrap();
            assert!(r < 1e-6, "{k} {x} {y}: {r}");
        }
    }
}

#[test]
fn frame_angle_invariants() {
    let (q, th) = (0.45, 1.0);
    let mut prev = frame_angles(0.0, th, q).unwrap();
    for i in 1..200 {
        let s = frame_angles(0.05 * i as f64, th, q).unwrap();
        assert!((s.chi1.cos() + s.vp / (2.0 * s.nu * s.v)).abs() < 1e-8);
        // e^{iχ2} = X1^{1/2} X2^{-1/2}, continuous in y
        let e = s.x1c.sqrt() / s.x2c.sqrt();
        assert!((Complex64::from_polar(1.0, s.chi2) - e).norm() < 1e-12);
        assert!((s.chi2 - prev.chi2).abs() < 0.5 && (s.chi1 - prev.chi1).abs() < 0.5);
        assert!((s.j1 + q / (s.v * s.x1c)).norm() < 1e-15);
        prev = s;
    }
}

fn chi0_direct(theta: f64, q: f64, y: f64) -> f64 {
    let nu = nu_circle(theta, q);
    let f = |t: f64| {
        let v = jacobi_dn(t, q).unwrap();
        let x1 = Complex64::from_polar(v, 2.0 * theta) - q / v;
        -4.0 * nu * q * (2.0 * theta).sin() / x1.norm_sqr()
    };
    // split at multiples of K' so each panel is smooth
    let kp = elliptic_ke_comp(q).unwrap().kk;
    let n = (y / kp).ceil() as usize;
    (0..n)
        .map(|i| {
            quad(
                f,
                i as f64 * y / n as f64,
                (i + 1) as f64 * y / n as f64,
                1e-13,
            )
            .unwrap()
        })
        .sum()
}

#[test]
fn chi0_period_and_monodromy() {
    for (q, th) in [(0.5, 0.6), (0.9, 2.0), (0.2, 1.4)] {
        let c = Chi0::new(th, q).unwrap();
        let w = Omega::new(q).unwrap().branch(th).unwrap();
        assert!((c.period() + 2.0 * PI * w).abs() < 1e-9, "{q} {th}");
        let kp = c.kp();
        for p in 1..4 {
            let direct = chi0_direct(th, q, 2.0 * p as f64 * kp);
            assert!((c.eval(2.0 * p as f64 * kp).unwrap() - p as f64 * c.period()).abs() < 1e-9);
            assert!((direct - p as f64 * c.period()).abs() < 1e-9);
        }
        let y = 3.3 * kp;
        assert!((c.eval(y).unwrap() - chi0_direct(th, q, y)).abs() < 1e-10);
        assert!((c.eval(-y).unwrap() + c.eval(y).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn flat_limit_is_the_vacuum() {
    let th = 1.1;
    let s = frame_angles(0.7, th, 1.0).unwrap();
    assert_eq!(s.v, 1.0);
    assert_eq!(s.vp, 0.0);
    assert!((s.x1c - (Complex64::from_polar(1.0, 2.0 * th) - 1.0)).norm() < 1e-15);
    assert!((s.chi0 + 1.4 * th.cos()).abs() < 1e-15);
    let near = Chi0::new(th, 1.0 - 1e-9).unwrap();
    assert!((near.eval(0.7).unwrap() - s.chi0).abs() < 1e-7);
}

#[test]
fn fundamental_form_closed_forms() {
    let sp = SymPoints::new(0.5, 2.2);
    let ff = fundamental_forms(0.3, 0.7, &sp).unwrap();
    let (l1, l2) = (sp.lambda1(), sp.lambda2());
    let v = jacobi_dn(0.3, 0.7).unwrap();
    let other = -(l2 - l1).powi(2) / (4.0 * l1 * l2) * v * v;
    assert!(other.im.abs() < 1e-15);
    assert!((other.re - ff.conformal_factor).abs() < 1e-14);
    assert!((ff.hopf_q - Complex64::new(0.0, 0.25) * 0.7 * (l2.inv() - l1.inv())).norm() < 1e-15);
}

#[test]
fn finite_difference_forms() {
    let s = Surface::new(0.7, SymPoints::new(0.5, 2.2)).unwrap();
    let r = fundamental_form_residuals(&s, Complex64::new(2.0, 0.0), Complex64::new(0.3, 2.5), 4)
        .unwrap();
    assert!(r.conformality < 1e-6, "{r:?}");
    assert!(r.metric < 1e-6, "{r:?}");
    assert!(r.mean_curvature < 1e-5, "{r:?}");
    assert!(r.hopf < 1e-5, "{r:?}");
    let flat = Surface::new(1.0, SymPoints::new(0.6, 2.0)).unwrap();
    let r =
        fundamental_form_residuals(&flat, Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), 3)
            .unwrap();
    assert!(r.mean_curvature < 1e-6, "{r:?}");
    // exchanging the sym points reverses the orientation
    let sw = Surface::new(0.7, SymPoints::new(2.2, 0.5)).unwrap();
    let r = fundamental_form_residuals(&sw, Complex64::new(2.0, 0.0), Complex64::new(0.3, 2.5), 2)
        .unwrap();
    assert!(r.mean_curvature < 1e-5, "{r:?}");
    let a = fundamental_forms(0.1, 0.7, &SymPoints::new(0.5, 2.2))
        .unwrap()
        .mean_h;
    let b = fundamental_forms(0.1, 0.7, &SymPoints::new(2.2, 0.5))
        .unwrap()
        .mean_h;
    assert_eq!(a, -b);
}

#[test]
fn flat_periods_agree_with_genus_zero() {
    // for θ in (0, π/2) the principal root of e^{2iθ} is e^{iθ}
    let sp = SymPoints::new(0.4, 1.3);
    let w = [[1, 3], [2, -1]];
    let (g1, g2) = flat_periods(&sp, w).unwrap();
    let (h1, h2) = periods_from_windings(sp.lambda1(), sp.lambda2(), w).unwrap();
    let to_mesh = |g: Complex64| Complex64::new(0.0, -2.0 * PI) * g;
    assert!((g1 - to_mesh(h1)).norm() < 1e-12 && (g2 - to_mesh(h2)).norm() < 1e-12);
}

#[test]
fn clifford_mesh() {
    let sp = SymPoints::new(FRAC_PI_4, 3.0 * FRAC_PI_4);
    let m = mesh_for_flat(&sp, [[1, 1], [1, -1]], 32, 32).unwrap();
    let h = 0.5f64.sqrt();
    for p in &m.vertices {
        assert!((p[0].hypot(p[1]) - h).abs() < 1e-12 && (p[2].hypot(p[3]) - h).abs() < 1e-12);
    }
    assert!(m.closure_defect < 1e-12);
}

#[test]
fn rotational_periods() {
    let (f, st) = rotational_state(1, 2, 0.8);
    assert!((st.point.q - 0.8).abs() < 1e-10);
    let s = f.s.unwrap();
    let per = periods_for_mesh(st.point.q, &st.sp, s).unwrap();
    assert_eq!(per.g1.im, 0.0);
    assert_eq!(per.windings[0][0], 0);
    assert_ne!(per.windings[1][0], 0);
    let no = nu_omega(st.point.q, &st.sp).unwrap();
    for (j, p) in per.windings.iter().enumerate() {
        let x = per.xs[j];
        assert!((p[1] as f64 - (x * no.nu1 + p[0] as f64 * no.omega1)).abs() < 1e-8);
        assert!((p[2] as f64 - (x * no.nu2 + p[0] as f64 * no.omega2)).abs() < 1e-8);
    }
    let surf = Surface::new(st.point.q, st.sp).unwrap();
    assert!(monodromy_residual(&surf, &per).unwrap() < 1e-6);
    let m = mesh_for_state(&st, s, 64, 64).unwrap();
    assert!(m.closure_defect < 1e-6);
    assert!(m.vertices.iter().all(|p| (norm4(p) - 1.0).abs() < 1e-10));
}

#[test]
fn periods_reject_wrong_vector() {
    let (_, st) = rotational_state(1, 2, 0.8);
    assert!(matches!(
        periods_for_mesh(st.point.q, &st.sp, [2, 3, -3]),
        Err(cmc_tori::Error::NotClosing(_))
    ));
}

#[test]
fn twizzled_mesh_closes() {
    let (f, st) = twizzled_state(Triple::new(2, 1, 3).unwrap(), 0.3);
    let s = f.s.unwrap();
    let per = periods_for_mesh(st.point.q, &st.sp, s).unwrap();
    let surf = Surface::new(st.point.q, st.sp).unwrap();
    assert!(monodromy_residual(&surf, &per).unwrap() < 1e-6);
    let m = mesh_for_state(&st, s, 48, 48).unwrap();
    assert!(m.closure_defect < 1e-6, "{}", m.closure_defect);
    let r = fundamental_form_residuals(&surf, per.g1, per.g2, 3).unwrap();
    assert!(r.conformality < 1e-6 && r.mean_curvature < 1e-5, "{r:?}");
}

#[test]
fn stereographic_projection() {
    let pole = [0.0, 0.0, 1.0, 0.0];
    assert_eq!(
        stereographic([0.0, 0.0, -1.0, 0.0], pole).unwrap(),
        [0.0; 3]
    );
    let e = stereographic([0.6, 0.8, 0.0, 0.0], pole).unwrap();
    assert!((e.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-15);
    let pole = [0.5, -0.5, 0.5, 0.5];
    let p = [0.1, 0.7, -0.7, 0.1f64];
    let n = norm4(&p);
    let p = p.map(|v| v / n);
    let back = inverse_stereographic(stereographic(p, pole).unwrap(), pole).unwrap();
    assert!((0..4).all(|i| (back[i] - p[i]).abs() < 1e-12));
    assert!(stereographic(pole, pole).is_err());
}

#[test]
fn export_round_trip() {
    let sp = SymPoints::new(0.6, 2.1);
    let m = mesh_for_flat(&sp, [[1, 1], [1, -1]], 12, 8).unwrap();
    let obj = to_obj(&m);
    assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 96);
    assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 96);
    let js = to_json(&m).unwrap();
    assert_eq!(from_json(&js).unwrap(), m);
    assert_eq!(to_json(&from_json(&js).unwrap()).unwrap(), js);
    let dir = std::env::temp_dir().join(format!("cmc-export-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("m.obj");
    export(&m, ExportFormat::Obj, &path).unwrap();
    let a = std::fs::read(&path).unwrap();
    export(&m, ExportFormat::Obj, &path).unwrap();
    assert_eq!(a, std::fs::read(&path).unwrap());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn rotational_profile_formulas() {
    let (q, th) = (0.6, 0.7);
    let angle = |y: f64| {
        let p = profile_rotational(y, q, th).unwrap().point;
        p[1].atan2(p[0])
    };
    for y in [0.1, 0.5, 1.3, 2.9] {
        let s = profile_rotational(y, q, th).unwrap();
        let h = 1e-5;
        let mut d = angle(y + h) - angle(y - h);
        d -= 2.0 * PI * (d / (2.0 * PI)).round();
        assert!((d / (2.0 * h) - s.psi_prime).abs() < 1e-6, "{y}");
        assert!(s.kappa > 0.0 && s.point[3] > 0.0);
        // the same point from the immersion, mirrored
        let sp = SymPoints::new(th, PI - th);
        let f = immersion(0.0, y, q, &sp).unwrap();
        assert!((f[0] - s.point[0]).abs() < 1e-12 && (f[1] + s.point[1]).abs() < 1e-12);
        assert!((f[3] - s.point[3]).abs() < 1e-12 && f[2].abs() < 1e-12);
        // curvature of the orthographic curve by finite differences
        let h = 1e-3;
        let z = |t: f64| {
            let p = profile_rotational(t, q, th).unwrap().point;
            Complex64::new(p[0], p[1])
        };
        let d1 = (z(y + h) - z(y - h)) / (2.0 * h);
        let d2 = (z(y + h) - 2.0 * z(y) + z(y - h)) / (h * h);
        let k = (d1.conj() * d2).im / d1.norm().powi(3);
        assert!((k - s.kappa).abs() < 1e-5, "{k} {}", s.kappa);
    }
}

#[test]
fn rotational_turning_numbers() {
    for (l0, l2) in [(1, 2), (1, 3), (2, 3), (3, 4)] {
        let (_, st) = rotational_state(l0, l2, 0.5);
        let th = st.sp.theta1;
        let c = rotational_profile_curve(st.point.q, th, l2 as usize, 400).unwrap();
        assert_eq!(c.turning, l0, "({l0},{l2})");
    }
}

#[test]
fn turning_number_of_polylines() {
    let circle = |n: usize, k: f64| -> Vec<[f64; 2]> {
        (0..n)
            .map(|i| {
                let t = k * 2.0 * PI * i as f64 / n as f64;
                [t.cos(), t.sin()]
            })
            .collect()
    };
    assert_eq!(turning_number(&circle(64, 1.0)).unwrap(), 1);
    assert_eq!(turning_number(&circle(64, -1.0)).unwrap(), 1);
    // limaçon r = 1/2 + cos t has turning number 2
    let lim: Vec<[f64; 2]> = (0..400)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / 400.0;
            let r = 0.5 + t.cos();
            [r * t.cos(), r * t.sin()]
        })
        .collect();
    assert_eq!(turning_number(&lim).unwrap(), 2);
    assert!(turning_number(&[[0.0, 0.0], [1.0, 0.0]]).is_err());
}

#[test]
fn twizzled_profile_turning() {
    let t = Triple::new(2, 1, 5).unwrap();
    let (f, st) = twizzled_state(t, 0.5);
    let m = mesh_for_state(&st, f.s.unwrap(), 160, 160).unwrap();
    let curves = extract_profiles(&m, ProfileSet::First).unwrap();
    assert!(!curves.is_empty());
    for hemi in [1, -1] {
        let tt = total_turning(&curves, hemi);
        assert!(tt == 2 || tt == 4, "hemisphere {hemi}: {tt}");
    }
}

#[test]
fn rotational_mesh_profiles() {
    let (f, st) = rotational_state(2, 3, 0.6);
    let m = mesh_for_state(&st, f.s.unwrap(), 128, 128).unwrap();
    let curves = extract_profiles(&m, ProfileSet::Second).unwrap();
    assert_eq!(total_turning(&curves, 1), 2);
}

#[test]
fn chi0_near_the_cut() {
    // as θ → 0 the density concentrates where v = √q and χ0(2K') → -2πω = -2π
    for q in [0.2, 0.5, 0.9] {
        let c = Chi0::new(1e-12, q).unwrap();
        assert!((c.period() + 2.0 * PI).abs() < 1e-9, "{q}: {}", c.period());
        let c = Chi0::new(PI - 1e-12, q).unwrap();
        assert!((c.period() - 2.0 * PI).abs() < 1e-9, "{q}: {}", c.period());
    }
    let (f, _) = twizzled_state(Triple::new(2, 1, 3).unwrap(), 0.0);
    let mid = f.state_at(f.t_mid()).unwrap();
    assert!(mid.sp.theta2.min(PI - mid.sp.theta2) < 1e-8);
    let m = mesh_for_state(&mid, f.s.unwrap(), 48, 48).unwrap();
    assert!(m.closure_defect < 1e-9);
    let surf = Surface::new(mid.point.q, mid.sp).unwrap();
    let per = periods_for_mesh(mid.point.q, &mid.sp, f.s.unwrap()).unwrap();
    let r = fundamental_form_residuals(&surf, per.g1, per.g2, 12).unwrap();
    assert!(r.mean_curvature < 1e-6 && r.conformality < 1e-6, "{r:?}");
}
