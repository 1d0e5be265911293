//! Complete elliptic integrals, the Jacobi functions of the conformal factor,
//! and adaptive quadrature.
//!
//! Conventions: [`elliptic_ke`] takes the *modulus* `q`, so `kk = K(q)` and
//! `ee = E(q)`. The complementary pair [`elliptic_ke_comp`] is
//! `K'(q) = K(sqrt(1 - q^2))`. The Jacobi functions take the complementary
//! modulus `q`, i.e. parameter `m = 1 - q^2`, so that `dn` oscillates in
//! `[q, 1]` with period `2 K'(q)`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// A pair of complete elliptic integrals of the first and second kind.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EllipticPair {
    pub kk: f64,
    pub ee: f64,
}

/// AGM with the descending sum for the second kind.
///
/// `b0` is the complementary modulus and `c0sq = 1 - b0^2` the parameter.
/// `c0sq` may be slightly negative (complementary modulus above one), which
/// the flow uses when it overshoots `q = 1`.
fn agm_ke(b0: f64, c0sq: f64) -> EllipticPair {
    let mut a = 1.0_f64;
    let mut b = b0;
    let mut sum = 0.5 * c0sq;
    let mut pow = 0.5_f64;
    for _ in 0..64 {
        // a and b can stall one ulp apart
        if (a - b).abs() <= 4.0 * f64::EPSILON * a {
            break;
        }
        let c = 0.5 * (a - b);
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
        pow *= 2.0;
        sum += pow * c * c;
    }
    let kk = PI / (2.0 * a);
    EllipticPair {
        kk,
        ee: kk * (1.0 - sum),
    }
}

/// `K(q)` and `E(q)` for modulus `0 <= q < 1`.
///
/// ```
/// use cmc_tori::elliptic::elliptic_ke;
/// let p = elliptic_ke(0.0).unwrap();
/// assert!((p.kk - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
/// ```
pub fn elliptic_ke(q: f64) -> Result<EllipticPair> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::Domain(format!("modulus {q} outside [0,1)")));
    }
    Ok(agm_ke(((1.0 - q) * (1.0 + q)).sqrt(), q * q))
}

/// `K'(q)` and `E'(q)`, i.e. the integrals at modulus `sqrt(1 - q^2)`.
///
/// Even in `q`; at `q = ±1` both equal `π/2`. `K'` diverges at `q = 0`.
pub fn elliptic_ke_comp(q: f64) -> Result<EllipticPair> {
    if q == 0.0 {
        return Err(Error::Range("K'(q) diverges at q = 0".into()));
    }
    if !(q.abs() <= 1.0) {
        return Err(Error::Domain(format!("q = {q} outside [-1,1]")));
    }
    Ok(ke_comp_unchecked(q))
}

/// Complementary pair without the `|q| <= 1` check (`q != 0` assumed).
pub(crate) fn ke_comp_unchecked(q: f64) -> EllipticPair {
    let a = q.abs();
    agm_ke(a, (1.0 - a) * (1.0 + a))
}

/// Values of the Jacobi functions at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobiValues {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

/// `sn`, `cn`, `dn` at parameter `m = 1 - q^2` for `q` in `[0, 1]`.
///
/// Uses the descending Landen transformation seeded by the AGM sequence. The
/// argument is first reduced modulo the period `2K'(q)` of `dn`. When the
/// modulus `sqrt(1 - q^2)` is within `1e-12` of one the hyperbolic limit
/// (`dn = sech`) is used on the reduced argument.
pub fn jacobi_sn_cn_dn(y: f64, q: f64) -> Result<JacobiValues> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain(format!("q = {q} outside [0,1]")));
    }
    if q == 1.0 {
        return Ok(JacobiValues {
            sn: y.sin(),
            cn: y.cos(),
            dn: 1.0,
        });
    }
    // 1 - sqrt(1 - q^2) < 1e-12
    if q == 0.0 || q * q < 2e-12 {
        let y = if q == 0.0 {
            y
        } else {
            let period = 2.0 * ke_comp_unchecked(q).kk;
            y - period * (y / period).round()
        };
        let s = 1.0 / y.cosh();
        return Ok(JacobiValues {
            sn: y.tanh(),
            cn: s,
            dn: s,
        });
    }
    // Reduce modulo 4K' so that sn and cn stay consistent; dn has period 2K'.
    let kp = ke_comp_unchecked(q).kk;
    let y = y - 4.0 * kp * (y / (4.0 * kp)).round();

    let mut a = [0.0_f64; 40];
    let mut c = [0.0_f64; 40];
    a[0] = 1.0;
    let mut b = q;
    c[0] = ((1.0 - q) * (1.0 + q)).sqrt();
    let mut n = 0;
    while c[n].abs() > 1e-16 && n < 39 {
        let an = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = (a[n] * b).sqrt();
        n += 1;
        a[n] = an;
    }
    let mut phi = 2f64.powi(n as i32) * a[n] * y;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] * phi.sin() / a[j]).asin());
    }
    let (sn, cn) = phi.sin_cos();
    // dn² = 1 - m sn² = cn² + q² sn², free of cancellation near y = K'
    let dn = (cn * cn + q * q * sn * sn).sqrt();
    Ok(JacobiValues { sn, cn, dn })
}

/// `v(y) = dn(y | 1 - q^2)`, the square root of the conformal factor.
///
/// ```
/// use cmc_tori::elliptic::jacobi_dn;
/// assert_eq!(jacobi_dn(0.0, 0.3).unwrap(), 1.0);
/// assert!((jacobi_dn(0.7, 0.0).unwrap() - 1.0 / 0.7f64.cosh()).abs() < 1e-15);
/// ```
pub fn jacobi_dn(y: f64, q: f64) -> Result<f64> {
    Ok(jacobi_sn_cn_dn(y, q)?.dn)
}

/// `v(y)` together with `v'(y) = -(1 - q^2) sn cn`.
pub fn dn_and_derivative(y: f64, q: f64) -> Result<(f64, f64)> {
    let j = jacobi_sn_cn_dn(y, q)?;
    let m = (1.0 - q) * (1.0 + q);
    Ok((j.dn, -m * j.sn * j.cn))
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd-indexed Kronrod nodes (7-point rule).
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One 15-point Kronrod panel: (estimate, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        rk += WGK[j] * s;
        if j % 2 == 1 {
            rg += WG[j / 2] * s;
        }
    }
    (rk * h, ((rk - rg) * h).abs())
}

/// Fixed 15-point Kronrod rule on `[a, b]`, for smooth integrands on short
/// panels.
pub fn kronrod15<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    gk15(&f, a, b).0
}

/// Adaptive Gauss–Kronrod quadrature with absolute tolerance `tol`.
///
/// Bisects the panel with the largest error estimate until the summed
/// estimate falls below `tol`. Gives up after 4000 panels and returns
/// [`Error::Quadrature`] carrying the best estimate.
///
/// ```
/// use cmc_tori::elliptic::quad;
/// let v = quad(f64::sin, 0.0, std::f64::consts::PI, 1e-12).unwrap();
/// assert!((v - 2.0).abs() < 1e-12);
/// ```
pub fn quad<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut panels = vec![{
        let (v, e) = gk15(&f, a, b);
        (a, b, v, e)
    }];
    for _ in 0..4000 {
        let (mut total, mut err) = (0.0, 0.0);
        let mut worst = 0;
        for (i, p) in panels.iter().enumerate() {
            total += p.2;
            err += p.3;
            if p.3 > panels[worst].3 {
                worst = i;
            }
        }
        if !total.is_finite() {
            return Err(Error::Numerical("non-finite integrand".into()));
        }
        if err <= tol {
            return Ok(total);
        }
        let (lo, hi, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            return Err(Error::Quadrature {
                estimate: total,
                error: err,
            });
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
    let total: f64 = panels.iter().map(|p| p.2).sum();
    let err: f64 = panels.iter().map(|p| p.3).sum();
    Err(Error::Quadrature {
        estimate: total,
        error: err,
    })
}

/// Power series of `K(m)` and `(E(m) - K(m))/m` in the parameter `m`, used
/// where the flow field has a removable singularity at `m = 0`.
pub(crate) fn ke_series(m: f64) -> (f64, f64, f64) {
    // c_n = (2n)! / (4^n n!^2), K = π/2 Σ c_n² mⁿ, E = π/2 Σ c_n² mⁿ/(1-2n)
    let mut cn = 1.0_f64;
    let mut mn = 1.0_f64;
    let (mut k, mut e, mut d) = (0.0, 0.0, 0.0);
    for n in 0..40 {
        let nf = n as f64;
        if n > 0 {
            cn *= (2.0 * nf - 1.0) / (2.0 * nf);
        }
        let c2 = cn * cn;
        k += c2 * mn;
        e += c2 * mn / (1.0 - 2.0 * nf);
        mn *= m;
        if mn.abs() < 1e-20 {
            break;
        }
    }
    // (E - K)/m = π/2 Σ_{n≥1} c_n² m^{n-1} 2n/(1-2n), summed directly so a
    // tiny m is never divided by.
    let mut cn = 1.0_f64;
    let mut mk = 1.0_f64;
    for n in 1..40 {
        let nf = n as f64;
        cn *= (2.0 * nf - 1.0) / (2.0 * nf);
        d += cn * cn * mk * (2.0 * nf / (1.0 - 2.0 * nf));
        mk *= m;
        if mk.abs() < 1e-20 {
            break;
        }
    }
    (FRAC_PI_2 * k, FRAC_PI_2 * e, FRAC_PI_2 * d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ke_zero_modulus() {
        let p = elliptic_ke(0.0).unwrap();
        assert!((p.kk - FRAC_PI_2).abs() < 1e-15);
        assert!((p.ee - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn ke_half_matches_direct_quadrature() {
        let q: f64 = 0.5;
        let p = elliptic_ke(q).unwrap();
        let k = quad(
            |t| 1.0 / (1.0 - q * q * t.sin().powi(2)).sqrt(),
            0.0,
            FRAC_PI_2,
            1e-15,
        )
        .unwrap();
        let e = quad(
            |t| (1.0 - q * q * t.sin().powi(2)).sqrt(),
            0.0,
            FRAC_PI_2,
            1e-15,
        )
        .unwrap();
        assert!((p.kk - k).abs() < 1e-12 * k);
        assert!((p.ee - e).abs() < 1e-12 * e);
    }

    #[test]
    fn ke_near_one_modulus() {
        let p = elliptic_ke(1.0 - 1e-12).unwrap();
        assert!(p.kk > 10.0);
        assert!((p.ee - 1.0).abs() < 1e-9);
        assert!(elliptic_ke(1.0).is_err());
        assert!(elliptic_ke(-0.1).is_err());
    }

    #[test]
    fn comp_at_unit_q() {
        for q in [1.0, -1.0] {
            let p = elliptic_ke_comp(q).unwrap();
            assert_eq!(p.kk, FRAC_PI_2);
            assert_eq!(p.ee, FRAC_PI_2);
        }
        assert!(matches!(elliptic_ke_comp(0.0), Err(Error::Range(_))));
        assert!(elliptic_ke_comp(1.5).is_err());
    }

    #[test]
    fn comp_is_even() {
        for q in [0.1, 0.6, 0.93] {
            assert_eq!(elliptic_ke_comp(q).unwrap(), elliptic_ke_comp(-q).unwrap());
        }
    }

    #[test]
    fn series_agrees_with_agm() {
        for m in [-0.01, -1e-4, 1e-6, 0.003, 0.01] {
            let (k, e, d) = ke_series(m);
            let p = agm_ke((1.0 - m).sqrt(), m);
            assert!((k - p.kk).abs() < 1e-14, "{m}");
            assert!((e - p.ee).abs() < 1e-14, "{m}");
            if m.abs() > 1e-4 {
                assert!((d - (p.ee - p.kk) / m).abs() < 1e-9, "{m}");
            }
        }
        assert!((ke_series(0.0).2 + std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn dn_basic_values() {
        assert_eq!(jacobi_dn(0.0, 0.4).unwrap(), 1.0);
        assert_eq!(jacobi_dn(3.0, 1.0).unwrap(), 1.0);
        assert!(jacobi_dn(1.0, -0.1).is_err());
        // dn(K' | m) = q
        let q = 0.35;
        let kp = elliptic_ke_comp(q).unwrap().kk;
        assert!((jacobi_dn(kp, q).unwrap() - q).abs() < 1e-13);
    }

    #[test]
    fn quad_trivial() {
        assert_eq!(quad(|_| 0.0, 0.0, 1.0, 1e-12).unwrap(), 0.0);
        let k = quad(
            |t| (1.0 - 0.25 * t.sin().powi(2)).powf(-0.5),
            0.0,
            FRAC_PI_2,
            1e-14,
        )
        .unwrap();
        assert!((k - elliptic_ke(0.5).unwrap().kk).abs() < 1e-13);
    }

    #[test]
    fn quad_reports_nonconvergence() {
        match quad(|t| 1.0 / t.abs().max(1e-300), -1.0, 1.0, 1e-10) {
            Err(Error::Quadrature { estimate, .. }) => assert!(estimate > 10.0),
            other => panic!("expected quadrature error, got {other:?}"),
        }
    }
}
