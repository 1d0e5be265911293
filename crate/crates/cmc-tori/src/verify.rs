//! Invariant suites behind `cmc verify`. Each suite is a list of named
//! checks that are cheap enough to run on every invocation.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::elliptic::{dn_and_derivative, elliptic_ke, elliptic_ke_comp};
use crate::error::{Error, Result};
use crate::flow::{level_constant, trace_family, trace_rotational, EventKind, TraceOptions};
use crate::genus0::{spectral_from_triple, triple_from_spectral, Triple};
use crate::moduli::{apply_move, connectivity_check, reduce_to_base, verify_report, Move};
use crate::spectral::{omega_circle, SymPoints};
use crate::surface::{mesh_for_flat, rotational_profile_curve};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Elliptic,
    Spectral,
    Genus0,
    Flow,
    Surface,
    Moduli,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Elliptic,
        Suite::Spectral,
        Suite::Genus0,
        Suite::Flow,
        Suite::Surface,
        Suite::Moduli,
    ];
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::Elliptic => "elliptic",
            Suite::Spectral => "spectral",
            Suite::Genus0 => "genus0",
            Suite::Flow => "flow",
            Suite::Surface => "surface",
            Suite::Moduli => "moduli",
        };
        f.write_str(s)
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.to_string() == s)
            .ok_or_else(|| Error::Domain(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

struct Collector {
    suite: Suite,
    out: Vec<Check>,
}

impl Collector {
    fn check(&mut self, name: &str, r: Result<(bool, String)>) {
        let (passed, detail) = r.unwrap_or_else(|e| (false, e.to_string()));
        self.out.push(Check {
            suite: self.suite,
            name: name.into(),
            passed,
            detail,
        });
    }
}

fn tri(l0: i64, l1: i64, l2: i64) -> Result<Triple> {
    Triple::new(l0, l1, l2)
}

pub fn run_suite(suite: Suite) -> Vec<Check> {
    let mut c = Collector {
        suite,
        out: Vec::new(),
    };
    match suite {
        Suite::Elliptic => elliptic(&mut c),
        Suite::Spectral => spectral(&mut c),
        Suite::Genus0 => genus0(&mut c),
        Suite::Flow => flow(&mut c),
        Suite::Surface => surface(&mut c),
        Suite::Moduli => moduli(&mut c),
    }
    c.out
}

fn elliptic(c: &mut Collector) {
    c.check(
        "legendre relation",
        (|| {
            let mut worst = 0.0_f64;
            for i in 1..=19 {
                let q = 0.05 * i as f64;
                let (a, b) = (elliptic_ke(q)?, elliptic_ke_comp(q)?);
                worst = worst.max((a.ee * b.kk + b.ee * a.kk - a.kk * b.kk - FRAC_PI_2).abs());
            }
            Ok((worst < 1e-12, format!("max residual {worst:e}")))
        })(),
    );
    c.check(
        "K' and E' bounds",
        (|| {
            for i in 1..200 {
                let q = i as f64 / 200.0;
                let p = elliptic_ke_comp(q)?;
                let lo = 2.0 * p.ee / (1.0 + q * q);
                if !(1.0 <= lo && lo < p.kk && p.kk < p.ee / q) {
                    return Ok((false, format!("fails at q = {q}")));
                }
            }
            Ok((true, "199 points".into()))
        })(),
    );
    c.check(
        "dn period",
        (|| {
            let mut worst = 0.0_f64;
            for q in [0.1, 0.5, 0.9] {
                let kp = elliptic_ke_comp(q)?.kk;
                for y in [0.0, 0.3, 1.7] {
                    worst = worst.max(
                        (dn_and_derivative(y + 2.0 * kp, q)?.0 - dn_and_derivative(y, q)?.0).abs(),
                    );
                }
            }
            Ok((worst < 1e-10, format!("max defect {worst:e}")))
        })(),
    );
}

fn spectral(c: &mut Collector) {
    c.check(
        "omega increment across the cut",
        (|| {
            let mut worst = 0.0_f64;
            for q in [0.3, 0.7] {
                let inc = omega_circle(1e-9, q, 0)? - omega_circle(PI - 1e-9, q, 0)?;
                worst = worst.max((inc - 2.0).abs());
            }
            Ok((worst < 1e-7, format!("max defect {worst:e}")))
        })(),
    );
    c.check(
        "omega skew symmetry",
        (|| {
            let mut worst = 0.0_f64;
            for th in [0.2, 0.8, 1.3] {
                worst =
                    worst.max((omega_circle(th, 0.6, 0)? + omega_circle(PI - th, 0.6, 0)?).abs());
            }
            Ok((worst < 1e-8, format!("max defect {worst:e}")))
        })(),
    );
    c.check(
        "omega flat limit",
        (|| {
            let mut worst = 0.0_f64;
            for th in [0.3, 0.9, 1.4] {
                worst = worst.max((omega_circle(th, 1e-6, 0)? - (1.0 - 2.0 * th / PI)).abs());
            }
            Ok((worst < 1e-4, format!("max defect {worst:e}")))
        })(),
    );
}

fn genus0(c: &mut Collector) {
    c.check(
        "triple round trip",
        (|| {
            for t in [tri(2, 1, 3)?, tri(3, 1, 4)?, tri(5, 2, 7)?, tri(3, 0, 5)?] {
                let back = triple_from_spectral(&spectral_from_triple(&t)?)?;
                if back != t {
                    return Ok((false, format!("{t} came back as {back}")));
                }
            }
            Ok((true, "4 triples".into()))
        })(),
    );
}

fn flow(c: &mut Collector) {
    c.check(
        "family (2,1,3)",
        (|| {
            let t = tri(2, 1, 3)?;
            let f = trace_family(&t, &TraceOptions::default())?;
            let mut drift = 0.0_f64;
            for s in &f.samples {
                drift = drift.max((level_constant(&s.point)? - f.c).abs() / f.c);
            }
            let monotone = f
                .samples
                .windows(2)
                .all(|w| w[1].mean_curvature < w[0].mean_curvature);
            let end_h = f
                .samples
                .last()
                .map_or(f64::NAN, |s| s.mean_curvature.abs());
            let mins: Vec<_> = f
                .events
                .iter()
                .filter(|e| e.kind == EventKind::Minimal)
                .collect();
            let ok = drift < 1e-8
                && f.qdot_sign_changes == 1
                && monotone
                && (end_h - 1.0 / 15f64.sqrt()).abs() < 1e-6
                && f.end_triple == Some(t)
                && mins.len() == 1
                && mins[0].state.mean_curvature.abs() < 1e-8;
            Ok((
                ok,
                format!(
                    "drift {drift:e}, end |H| {end_h}, minimal events {}",
                    mins.len()
                ),
            ))
        })(),
    );
    c.check(
        "rotational family (1,0,2)",
        (|| {
            let f = trace_rotational(1, 2, &TraceOptions::default())?;
            let b = f
                .bouquet
                .ok_or_else(|| Error::Numerical("no bouquet fit".into()))?;
            Ok((
                (b.theta0 - PI / 4.0).abs() < 1e-4,
                format!("theta0 {}", b.theta0),
            ))
        })(),
    );
}

fn surface(c: &mut Collector) {
    c.check(
        "Clifford mesh",
        (|| {
            let sp = SymPoints::new(FRAC_PI_4, 3.0 * FRAC_PI_4);
            let m = mesh_for_flat(&sp, [[1, 1], [1, -1]], 32, 32)?;
            let unit = m
                .vertices
                .iter()
                .map(|p| (p.iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0).abs())
                .fold(0.0, f64::max);
            Ok((
                unit < 1e-10 && m.closure_defect < 1e-6,
                format!("unit {unit:e}, closure {:e}", m.closure_defect),
            ))
        })(),
    );
    c.check(
        "rotational profile (1,0,3)",
        (|| {
            let f = trace_rotational(1, 3, &TraceOptions::default())?;
            let st = f.state_at_q(0.5)?;
            let curve = rotational_profile_curve(st.point.q, st.sp.theta1, 3, 200)?;
            Ok((curve.turning == 1, format!("turning {}", curve.turning)))
        })(),
    );
}

fn moduli(c: &mut Collector) {
    c.check(
        "connectivity to index 8",
        (|| {
            let r = connectivity_check(8)?;
            verify_report(&r)?;
            Ok((
                true,
                format!(
                    "{} lattices, longest path {}",
                    r.lattices.len(),
                    r.max_path_len
                ),
            ))
        })(),
    );
    c.check(
        "move ① involution and reduction",
        (|| {
            let mut n = 0;
            for l2 in 2..=30 {
                for l0 in 1..l2 {
                    for l1 in 0..l0 {
                        let Ok(t) = Triple::new(l0, l1, l2) else {
                            continue;
                        };
                        if apply_move(&apply_move(&t, Move::One)?, Move::One)? != t {
                            return Ok((false, format!("① not an involution at {t}")));
                        }
                        reduce_to_base(&t)?.verify()?;
                        n += 1;
                    }
                }
            }
            Ok((true, format!("{n} triples")))
        })(),
    );
}
