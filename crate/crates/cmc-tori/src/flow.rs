//! The genus-one flow on `(q, k, h)`.
//!
//! Families are traced with `q > 0` and start at a flat torus on `q = 1`.
//! Sign convention: at `q = 1` the flat torus of a triple sits at
//! `X = sqrt((1+k)/(1+h))`, `Y = sqrt((1-k)/(1-h))` with `{X, Y}` equal to
//! `{ℓ1/ℓ0, ℓ2/ℓ0}` at the start and `{ℓ1/ℓ̂0, ℓ2/ℓ̂0}`, `ℓ̂0 = ℓ1 + ℓ2 - ℓ0`,
//! at the end. Then `H = h / sqrt(1 - h²)` decreases along every family.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Serialize, Serializer};

use crate::elliptic::{ke_comp_unchecked, ke_series};
use crate::error::{Error, Result};
use crate::genus0::{triple_from_s, Triple};
use crate::ode::{integrate, Control, OdeOptions, Step};
use crate::spectral::{
    closing_residual_from, closing_vector, coords_to_sym, gcd, mean_curvature, nu_omega,
    ModuliPoint, NuOmega, SymPoints,
};

/// Below this `|1 - q²|` the field uses power series in `m = 1 - q²`.
const SERIES_M: f64 = 1e-2;
/// A flat endpoint with `|H|` below this is minimal. Nonzero endpoint values
/// are rational expressions in the triple, far above it for small triples.
const FLAT_MINIMAL_TOL: f64 = 1e-6;

/// End of a family: `q` rises through `1 - END_EPS`.
const END_EPS: f64 = 1e-10;

/// `(K', E', (E' - K')/(1 - q²))`, with the quotient summed as a series
/// near `q² = 1`.
fn ke_terms(q: f64) -> (f64, f64, f64) {
    let m = (1.0 - q) * (1.0 + q);
    if m.abs() < SERIES_M {
        ke_series(m)
    } else {
        let p = ke_comp_unchecked(q);
        (p.kk, p.ee, (p.ee - p.kk) / m)
    }
}

fn field(q: f64, k: f64, h: f64) -> Result<[f64; 3]> {
    if q == 0.0 || !q.is_finite() {
        return Err(Error::Domain("the flow field is singular at q = 0".into()));
    }
    let (kp, ep, d) = ke_terms(q);
    // ((1+q²)E' - 2q²K')/(1-q²) and (2E' - (1+q²)K')/(1-q²)
    let a = 2.0 * d + 2.0 * kp - ep;
    let b = 2.0 * d + kp;
    Ok([
        q * (ep * k - q * kp * h),
        (1.0 - k * k) * a,
        q * (1.0 - h * h) * b,
    ])
}

/// `(q̇, k̇, ḣ)` at a point, analytic through `q = ±1`.
///
/// ```
/// use cmc_tori::flow::vector_field;
/// use cmc_tori::spectral::ModuliPoint;
/// let v = vector_field(&ModuliPoint { q: 1.0, k: 0.2, h: 0.2 }).unwrap();
/// assert!(v.iter().all(|x| x.abs() < 1e-15));
/// ```
pub fn vector_field(p: &ModuliPoint) -> Result<[f64; 3]> {
    field(p.q, p.k, p.h)
}

/// `c = (1-k²)(1-h²) / ((1+q²)/(2q) - kh)²`, constant along the flow.
pub fn level_constant(p: &ModuliPoint) -> Result<f64> {
    if p.q == 0.0 {
        return Err(Error::Domain("level constant undefined at q = 0".into()));
    }
    let den = (1.0 + p.q * p.q) / (2.0 * p.q) - p.k * p.h;
    if den == 0.0 {
        return Err(Error::Domain("level constant denominator vanishes".into()));
    }
    Ok((1.0 - p.k * p.k) * (1.0 - p.h * p.h) / (den * den))
}

/// Which flat end of a family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyEnd {
    Start,
    End,
}

/// A flat endpoint on `q = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlatEndpoint {
    pub point: ModuliPoint,
    pub sp: SymPoints,
    #[serde(rename = "H")]
    pub mean_curvature: f64,
}

/// The flat torus of a triple at the start or end of its family.
///
/// ```
/// use cmc_tori::flow::{flat_endpoint, FamilyEnd};
/// use cmc_tori::genus0::Triple;
/// let e = flat_endpoint(&Triple::new(2, 1, 3).unwrap(), FamilyEnd::Start).unwrap();
/// assert!((e.point.k + 11.0 / 16.0).abs() < 1e-15 && (e.point.h - 0.25).abs() < 1e-15);
/// ```
pub fn flat_endpoint(t: &Triple, end: FamilyEnd) -> Result<FlatEndpoint> {
    t.validate()?;
    let (x, y) = match end {
        FamilyEnd::Start => (t.l1 as f64 / t.l0 as f64, t.l2 as f64 / t.l0 as f64),
        FamilyEnd::End => {
            let lh = (t.l1 + t.l2 - t.l0) as f64;
            (t.l2 as f64 / lh, t.l1 as f64 / lh)
        }
    };
    let (x2, y2) = (x * x, y * y);
    let h = (2.0 - x2 - y2) / (x2 - y2);
    let k = x2 * (1.0 + h) - 1.0;
    let point = ModuliPoint { q: 1.0, k, h };
    Ok(FlatEndpoint {
        point,
        sp: coords_to_sym(k, h, false)?,
        mean_curvature: mean_curvature(h)?,
    })
}

/// Mean curvatures `(H0, H1)` of the flat tori at the start and end of the
/// family of a triple.
///
/// For rotational triples the family ends in a sphere bouquet and `H1` is
/// `cot(π ℓ0/ℓ2)`.
pub fn endpoint_h(t: &Triple) -> Result<(f64, f64)> {
    t.validate()?;
    let (l0, l1, l2) = (t.l0 as f64, t.l1 as f64, t.l2 as f64);
    let h0 = (l1 * l1 + l2 * l2 - 2.0 * l0 * l0)
        / (2.0 * ((l2 * l2 - l0 * l0) * (l0 * l0 - l1 * l1)).sqrt());
    if t.is_rotational() {
        return Ok((h0, 1.0 / (PI * l0 / l2).tan()));
    }
    let lh = l1 + l2 - l0;
    let h1 = -(l1 * l1 + l2 * l2 - 2.0 * lh * lh)
        / (2.0 * ((l2 * l2 - lh * lh) * (lh * lh - l1 * l1)).sqrt());
    Ok((h0, h1))
}

/// The `(ℓ0, ℓ2)` sphere bouquet: `θ0 = (π/2)(1 - ℓ0/ℓ2)` and `H = cot(π ℓ0/ℓ2)`.
pub fn bouquet_limit(l0: i64, l2: i64) -> Result<(f64, f64)> {
    if !(1 <= l0 && l0 < l2) || gcd(l0, l2) != 1 {
        return Err(Error::InvalidTriple(format!(
            "bouquet needs coprime 1 <= l0 < l2, got ({l0},{l2})"
        )));
    }
    let r = l0 as f64 / l2 as f64;
    Ok((FRAC_PI_2 * (1.0 - r), 1.0 / (PI * r).tan()))
}

/// Options for tracing a family.
#[derive(Clone, Copy, Debug)]
pub struct TraceOptions {
    pub ode: OdeOptions,
    /// Bound on `|c - c0|/c0` for accepted steps.
    pub drift_tol: f64,
    /// Give up after this much flow time.
    pub t_max: f64,
    /// Rotational traces stop once `q` falls below this value.
    pub q_min: f64,
    /// Tolerance for rational recovery of the end triple.
    pub rational_tol: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            ode: OdeOptions::default(),
            drift_tol: 1e-8,
            t_max: 1e3,
            q_min: 1e-4,
            rational_tol: 1e-7,
        }
    }
}

/// A point on a family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlowState {
    pub t: f64,
    pub point: ModuliPoint,
    pub sp: SymPoints,
    #[serde(rename = "H")]
    pub mean_curvature: f64,
    pub c: f64,
}

impl FlowState {
    fn new(t: f64, y: [f64; 3], sheet: i32) -> Result<Self> {
        let point = ModuliPoint {
            q: y[0],
            k: y[1].clamp(-1.0, 1.0),
            h: y[2].clamp(-1.0, 1.0),
        };
        let mut sp = coords_to_sym(point.k, point.h, false)?;
        sp.sheet = sheet;
        Ok(FlowState {
            t,
            point,
            sp,
            mean_curvature: mean_curvature(point.h)?,
            c: if point.q <= 1.0 {
                level_constant(&point)?
            } else {
                f64::NAN
            },
        })
    }

    /// `ν` and `ω` at the sym points with the sheet applied.
    pub fn nu_omega(&self) -> Result<NuOmega> {
        nu_omega(self.point.q.min(1.0), &self.sp)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    CutCrossing,
    Minimal,
    Bouquet,
    FlatEndpoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlowEvent {
    pub kind: EventKind,
    pub t: f64,
    pub state: FlowState,
}

/// Extrapolated sphere bouquet limit of a rotational family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BouquetFit {
    /// `min(θ1, π - θ1)` extrapolated to `q = 0`.
    pub theta0: f64,
    /// `-cot(2 θ0)`, the mean curvature of the limit.
    #[serde(rename = "H")]
    pub mean_curvature: f64,
    /// Raw value of `min(θ1, π - θ1)` at the smallest fitted `q`.
    pub theta0_at_q_min: f64,
}

/// An integrated family.
#[derive(Clone, Debug)]
pub struct FamilyTrace {
    pub triple: Triple,
    pub c: f64,
    pub samples: Vec<FlowState>,
    pub events: Vec<FlowEvent>,
    pub end_triple: Option<Triple>,
    /// Number of sign changes of `q̇`.
    pub qdot_sign_changes: usize,
    pub bouquet: Option<BouquetFit>,
    /// Closing vector `s` (continuous ω) recovered at the start.
    pub s: Option<[i64; 3]>,
    steps: Vec<Step<3>>,
}

impl FamilyTrace {
    pub fn t_start(&self) -> f64 {
        self.samples.first().map_or(0.0, |s| s.t)
    }

    pub fn t_end(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    pub fn is_rotational(&self) -> bool {
        self.triple.is_rotational()
    }

    /// State at flow time `t` from the dense output.
    pub fn state_at(&self, t: f64) -> Result<FlowState> {
        if !(t >= self.t_start() && t <= self.t_end()) {
            return Err(Error::Domain(format!(
                "t = {t} outside the traced interval [{}, {}]",
                self.t_start(),
                self.t_end()
            )));
        }
        let i = self
            .steps
            .partition_point(|s| s.t1() < t)
            .min(self.steps.len().saturating_sub(1));
        let y = match self.steps.get(i) {
            Some(s) => s.eval(t),
            None => {
                let p = self.samples[0].point;
                [p.q, p.k, p.h]
            }
        };
        let sheet = self
            .events
            .iter()
            .filter(|e| e.kind == EventKind::CutCrossing && e.t <= t)
            .count() as i32;
        FlowState::new(t, y, sheet)
    }

    /// Time of the middle of the family.
    pub fn t_mid(&self) -> f64 {
        0.5 * (self.t_start() + self.t_end())
    }

    /// The first state along the family with the given `q`, by bisection in
    /// `t` inside the first bracketing sample interval.
    pub fn state_at_q(&self, q: f64) -> Result<FlowState> {
        let i = self
            .samples
            .windows(2)
            .position(|w| (w[0].point.q - q) * (w[1].point.q - q) <= 0.0)
            .ok_or_else(|| {
                Error::Domain(format!(
                    "q = {q} is not reached along the {} family",
                    self.triple
                ))
            })?;
        let (mut a, mut b) = (self.samples[i].t, self.samples[i + 1].t);
        let fa = self.samples[i].point.q - q;
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if (self.state_at(m)?.point.q - q) * fa > 0.0 {
                a = m;
            } else {
                b = m;
            }
            if b - a <= 1e-15 * b.abs().max(1.0) {
                break;
            }
        }
        self.state_at(0.5 * (a + b))
    }

    pub fn minimal(&self) -> Option<&FlowEvent> {
        self.events.iter().find(|e| e.kind == EventKind::Minimal)
    }
}

#[derive(Serialize)]
struct SampleView {
    t: f64,
    q: f64,
    k: f64,
    h: f64,
    theta1: f64,
    theta2: f64,
    sheet: i32,
    #[serde(rename = "H")]
    mean_curvature: f64,
}

impl Serialize for FamilyTrace {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct View<'a> {
            triple: &'a Triple,
            end_triple: &'a Option<Triple>,
            c: f64,
            samples: Vec<SampleView>,
            events: &'a [FlowEvent],
            #[serde(skip_serializing_if = "Option::is_none")]
            bouquet: &'a Option<BouquetFit>,
        }
        let samples = self
            .samples
            .iter()
            .map(|f| SampleView {
                t: f.t,
                q: f.point.q,
                k: f.point.k,
                h: f.point.h,
                theta1: f.sp.theta1,
                theta2: f.sp.theta2,
                sheet: f.sp.sheet,
                mean_curvature: f.mean_curvature,
            })
            .collect();
        View {
            triple: &self.triple,
            end_triple: &self.end_triple,
            c: self.c,
            samples,
            events: &self.events,
            bouquet: &self.bouquet,
        }
        .serialize(s)
    }
}

fn drift_ok(c0: f64, tol: f64) -> impl Fn(&[f64; 3]) -> bool {
    move |y: &[f64; 3]| {
        if c0 == 0.0 {
            return true;
        }
        match level_constant(&ModuliPoint {
            q: y[0],
            k: y[1],
            h: y[2],
        }) {
            Ok(c) => (c - c0).abs() <= tol * c0,
            Err(_) => false,
        }
    }
}

/// Traces the twizzled family of a triple from its start on `q = 1` back to
/// `q = 1`, recording cut crossings, the minimal torus and the end.
pub fn trace_family(t: &Triple, opts: &TraceOptions) -> Result<FamilyTrace> {
    t.validate()?;
    if t.is_rotational() {
        return trace_rotational(t.l0, t.l2, opts);
    }
    let start = flat_endpoint(t, FamilyEnd::Start)?;
    let p0 = start.point;
    let c0 = level_constant(&p0)?;
    let y0 = [p0.q, p0.k, p0.h];
    let mut samples = vec![FlowState::new(0.0, y0, 0)?];
    let mut events = Vec::new();
    let mut steps = Vec::new();
    let mut sheet = 0;
    let mut qdot_sign_changes = 0;
    let mut qdot_prev = field(p0.q, p0.k, p0.h)?[0].signum();
    let mut finished = false;

    integrate(
        |_, y: &[f64; 3]| field(y[0], y[1], y[2]),
        0.0,
        y0,
        &opts.ode,
        drift_ok(c0, opts.drift_tol),
        |s| {
            let (a, b) = (s.y0, s.y1);
            let mut t_stop = None;
            // q returns to 1 only after q̇ changed sign
            let qdot = field(b[0], b[1], b[2])?[0].signum();
            if qdot != qdot_prev && qdot != 0.0 {
                qdot_sign_changes += 1;
                qdot_prev = qdot;
            }
            let level = 1.0 - END_EPS;
            if qdot_sign_changes > 0 && a[0] < level && b[0] >= level {
                t_stop = Some(s.locate(|_, y| y[0] - level));
            }
            let t_hi = t_stop.unwrap_or(s.t1());
            let mut found: Vec<(f64, EventKind)> = Vec::new();
            if (a[1] - a[2]).signum() != (b[1] - b[2]).signum() {
                let tc = s.locate(|_, y| y[1] - y[2]);
                if tc <= t_hi {
                    found.push((tc, EventKind::CutCrossing));
                }
            }
            if a[2].signum() != b[2].signum() && a[2] != 0.0 {
                let tm = s.locate(|_, y| y[2]);
                if tm <= t_hi {
                    found.push((tm, EventKind::Minimal));
                }
            }
            found.sort_by(|x, y| x.0.total_cmp(&y.0));
            for (te, kind) in found {
                let mut y = s.eval(te);
                if kind == EventKind::CutCrossing {
                    // λ2 passes λ = 1; after it ω2 continues on the next sheet
                    sheet += if b[1] > b[2] { 1 } else { -1 };
                }
                if kind == EventKind::Minimal {
                    y[2] = 0.0;
                }
                if kind == EventKind::CutCrossing {
                    // exactly on the cut
                    y[2] = y[1];
                }
                events.push(FlowEvent {
                    kind,
                    t: te,
                    state: FlowState::new(te, y, sheet)?,
                });
            }
            steps.push(*s);
            if let Some(te) = t_stop {
                let y = s.eval(te);
                let st = FlowState::new(te, y, sheet)?;
                samples.push(st);
                events.push(FlowEvent {
                    kind: EventKind::FlatEndpoint,
                    t: te,
                    state: st,
                });
                finished = true;
                return Ok(Control::Stop);
            }
            samples.push(FlowState::new(s.t1(), b, sheet)?);
            if s.t1() > opts.t_max {
                return Err(Error::Numerical(format!(
                    "family {t} did not reach q = 1 by t = {}",
                    opts.t_max
                )));
            }
            Ok(Control::Continue)
        },
    )?;
    if !finished {
        return Err(Error::Numerical(format!("family {t} did not terminate")));
    }
    let last = *samples.last().expect("non-empty");
    // a minimal flat endpoint belongs to the family; h then has no sign change
    if !events.iter().any(|e| e.kind == EventKind::Minimal) {
        let first = samples[0];
        for st in [first, last] {
            if st.mean_curvature.abs() < FLAT_MINIMAL_TOL {
                events.push(FlowEvent {
                    kind: EventKind::Minimal,
                    t: st.t,
                    state: st,
                });
            }
        }
        events.sort_by(|a, b| a.t.total_cmp(&b.t));
    }
    // the end triple uses the branch values of ω (flat data with sheet 0)
    let mut sp_branch = last.sp;
    sp_branch.sheet = 0;
    let no_end = nu_omega(last.point.q, &sp_branch)?;
    let end_triple = triple_from_s(closing_vector(&no_end, opts.rational_tol)?)?;
    let s = closing_vector(&samples[0].nu_omega()?, opts.rational_tol).ok();

    Ok(FamilyTrace {
        triple: *t,
        c: c0,
        samples,
        events,
        end_triple: Some(end_triple),
        qdot_sign_changes,
        bouquet: None,
        s,
        steps,
    })
}

/// Least squares fit of `θ0(q)` on `{1, q ln q, q, q² ln² q, q² ln q}`; returns
/// the constant term.
fn bouquet_extrapolate(data: &[(f64, f64)]) -> Result<f64> {
    let basis = |q: f64| {
        let l = q.ln();
        [1.0, q * l, q, q * q * l * l, q * q * l]
    };
    let n = data.len();
    const P: usize = 5;
    if n < P {
        return Err(Error::Numerical(
            "too few samples for the bouquet fit".into(),
        ));
    }
    // modified Gram-Schmidt on the columns
    let mut cols: Vec<Vec<f64>> = (0..P)
        .map(|j| data.iter().map(|&(q, _)| basis(q)[j]).collect())
        .collect();
    let mut rhs: Vec<f64> = data.iter().map(|&(_, v)| v).collect();
    let mut r = [[0.0f64; P]; P];
    for j in 0..P {
        for i in 0..j {
            let d: f64 = (0..n).map(|k| cols[i][k] * cols[j][k]).sum();
            r[i][j] = d;
            for k in 0..n {
                cols[j][k] -= d * cols[i][k];
            }
        }
        let nrm = cols[j].iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm == 0.0 {
            return Err(Error::Numerical("degenerate bouquet fit".into()));
        }
        r[j][j] = nrm;
        for x in &mut cols[j] {
            *x /= nrm;
        }
    }
    let mut z = [0.0f64; P];
    for j in 0..P {
        z[j] = (0..n).map(|k| cols[j][k] * rhs[k]).sum();
        for k in 0..n {
            rhs[k] -= z[j] * cols[j][k];
        }
    }
    let mut x = [0.0f64; P];
    for j in (0..P).rev() {
        x[j] = (z[j] - (j + 1..P).map(|i| r[j][i] * x[i]).sum::<f64>()) / r[j][j];
    }
    Ok(x[0])
}

/// Traces the rotational `(ℓ0, 0, ℓ2)` family from its flat start on `q = 1`
/// (`k = -1`, `h = 1 - 2r²`, `r = ℓ0/ℓ2`) towards the sphere bouquet at `q = 0`.
pub fn trace_rotational(l0: i64, l2: i64, opts: &TraceOptions) -> Result<FamilyTrace> {
    let triple = Triple::new(l0, 0, l2)?;
    let r = l0 as f64 / l2 as f64;
    let y0 = [1.0, -1.0, 1.0 - 2.0 * r * r];
    let mut samples = vec![FlowState::new(0.0, y0, 0)?];
    let mut events = Vec::new();
    let mut steps = Vec::new();
    // fit nodes q_i = q_min 2^i, i = 0..5
    let nodes: Vec<f64> = (0..6).map(|i| opts.q_min * 2f64.powi(i)).collect();
    let mut fit_data = Vec::new();
    let theta0 = |y: &[f64; 3]| {
        let t1 = 0.5 * (y[1].clamp(-1.0, 1.0).acos() + y[2].clamp(-1.0, 1.0).acos());
        t1.min(PI - t1)
    };
    integrate(
        |_, y: &[f64; 3]| {
            let f = field(y[0], y[1], y[2])?;
            Ok([f[0], 0.0, f[2]])
        },
        0.0,
        y0,
        &opts.ode,
        |_| true,
        |s| {
            let (a, b) = (s.y0, s.y1);
            let mut t_stop = None;
            for &qn in &nodes {
                if a[0] > qn && b[0] <= qn {
                    let tn = s.locate(|_, y| y[0] - qn);
                    fit_data.push((qn, theta0(&s.eval(tn))));
                    if qn == opts.q_min {
                        t_stop = Some(tn);
                    }
                }
            }
            if a[2].signum() != b[2].signum() && a[2] != 0.0 {
                let tm = s.locate(|_, y| y[2]);
                let mut y = s.eval(tm);
                y[2] = 0.0;
                events.push(FlowEvent {
                    kind: EventKind::Minimal,
                    t: tm,
                    state: FlowState::new(tm, y, 0)?,
                });
            }
            steps.push(*s);
            if let Some(te) = t_stop {
                let st = FlowState::new(te, s.eval(te), 0)?;
                samples.push(st);
                events.push(FlowEvent {
                    kind: EventKind::Bouquet,
                    t: te,
                    state: st,
                });
                return Ok(Control::Stop);
            }
            samples.push(FlowState::new(s.t1(), b, 0)?);
            if s.t1() > opts.t_max {
                return Err(Error::Numerical(format!(
                    "rotational family {triple} did not reach q_min"
                )));
            }
            Ok(Control::Continue)
        },
    )?;
    let th0 = bouquet_extrapolate(&fit_data)?;
    let raw = fit_data
        .iter()
        .find(|d| d.0 == opts.q_min)
        .map_or(f64::NAN, |d| d.1);
    Ok(FamilyTrace {
        triple,
        c: 0.0,
        samples,
        events,
        end_triple: None,
        qdot_sign_changes: 0,
        bouquet: Some(BouquetFit {
            theta0: th0,
            mean_curvature: -1.0 / (2.0 * th0).tan(),
            theta0_at_q_min: raw,
        }),
        s: Some([2 * l0, l2, -l2]),
        steps,
    })
}

/// Whether the family of a triple contains a minimal torus, by the closed
/// form criterion on the triple.
pub fn has_minimal(t: &Triple) -> bool {
    let (l0, l1, l2) = (t.l0, t.l1, t.l2);
    if t.is_rotational() {
        // r = ℓ0/ℓ2 ∈ (1/2, 1/√2]
        return l2 < 2 * l0 && 2 * l0 * l0 <= l2 * l2;
    }
    let lh = l1 + l2 - l0;
    l1 * l1 + l2 * l2 >= 2 * l0.max(lh).pow(2)
}

/// The minimal torus of the family, if there is one.
pub fn minimal_in_family(t: &Triple, opts: &TraceOptions) -> Result<Option<FlowState>> {
    if !has_minimal(t) {
        return Ok(None);
    }
    let tr = trace_family(t, opts)?;
    Ok(tr.minimal().map(|e| e.state))
}

/// Closing residuals of a state against `s`.
pub fn state_closing_residual(state: &FlowState, s: [i64; 3]) -> Result<(f64, f64)> {
    Ok(closing_residual_from(s, &state.nu_omega()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tr(l0: i64, l1: i64, l2: i64) -> Triple {
        Triple::new(l0, l1, l2).unwrap()
    }

    #[test]
    fn field_on_flat_boundary() {
        let v = vector_field(&ModuliPoint {
            q: 1.0,
            k: -0.5,
            h: 0.3,
        })
        .unwrap();
        assert!((v[0] - FRAC_PI_2 * (-0.8)).abs() < 1e-15);
        assert!(v[1].abs() < 1e-15 && v[2].abs() < 1e-15);
        assert!(vector_field(&ModuliPoint {
            q: 0.0,
            k: 0.0,
            h: 0.0
        })
        .is_err());
    }

    #[test]
    fn field_continuous_across_series_switch() {
        let q0 = (1.0f64 - SERIES_M).sqrt();
        let a = field(q0 - 1e-12, 0.3, -0.2).unwrap();
        let b = field(q0 + 1e-12, 0.3, -0.2).unwrap();
        for i in 0..3 {
            assert!((a[i] - b[i]).abs() < 1e-10, "{i}: {} {}", a[i], b[i]);
        }
    }

    #[test]
    fn monotonicity_signs() {
        for q in [0.1, 0.5, 0.9] {
            for (k, h) in [(0.3, -0.2), (-0.7, 0.6), (0.0, 0.0)] {
                let v = field(q, k, h).unwrap();
                assert!(v[1] > 0.0 && v[2] < 0.0);
            }
        }
    }

    #[test]
    fn level_examples() {
        let c = level_constant(&ModuliPoint {
            q: 1.0,
            k: -11.0 / 16.0,
            h: -0.25,
        })
        .unwrap();
        assert!((c - 2025.0 / 2809.0).abs() < 1e-15);
        let c = level_constant(&ModuliPoint {
            q: 1.0,
            k: -11.0 / 16.0,
            h: 0.25,
        })
        .unwrap();
        assert!((c - 0.36).abs() < 1e-15);
        assert_eq!(
            level_constant(&ModuliPoint {
                q: 0.4,
                k: 1.0,
                h: 0.2
            })
            .unwrap(),
            0.0
        );
    }

    #[test]
    fn endpoints_213_and_314() {
        let s = flat_endpoint(&tr(2, 1, 3), FamilyEnd::Start).unwrap();
        let e = flat_endpoint(&tr(2, 1, 3), FamilyEnd::End).unwrap();
        assert!((e.point.k - 11.0 / 16.0).abs() < 1e-15 && (e.point.h + 0.25).abs() < 1e-15);
        assert!(s.point.k - s.point.h < 0.0);
        let (h0, h1) = endpoint_h(&tr(2, 1, 3)).unwrap();
        assert!((h0 - 1.0 / 15f64.sqrt()).abs() < 1e-15 && (h1 + h0).abs() < 1e-15);
        assert!((s.mean_curvature - h0).abs() < 1e-14 && (e.mean_curvature - h1).abs() < 1e-14);
        let (h0, h1) = endpoint_h(&tr(3, 1, 4)).unwrap();
        assert!((h0 + 1.0 / (2.0 * 56f64.sqrt())).abs() < 1e-15);
        assert!((h1 + 0.75).abs() < 1e-15);
        let e = flat_endpoint(&tr(3, 1, 4), FamilyEnd::End).unwrap();
        assert!((e.point.k - 0.6).abs() < 1e-15 && (e.point.h + 0.6).abs() < 1e-15);
    }

    #[test]
    fn bouquet_examples() {
        let (t, h) = bouquet_limit(1, 2).unwrap();
        assert!((t - PI / 4.0).abs() < 1e-15 && h.abs() < 1e-15);
        let (t, h) = bouquet_limit(1, 3).unwrap();
        assert!((t - PI / 3.0).abs() < 1e-15 && (h - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!(bouquet_limit(2, 4).is_err());
    }

    #[test]
    fn extrapolation_recovers_constant() {
        let f = |q: f64| 0.7 + 0.3 * q * q.ln() - 1.1 * q + 2.0 * q * q * q.ln().powi(2);
        let data: Vec<_> = (0..6)
            .map(|i| 1e-4 * 2f64.powi(i))
            .map(|q| (q, f(q)))
            .collect();
        assert!((bouquet_extrapolate(&data).unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn minimal_criterion() {
        assert!(has_minimal(&tr(2, 1, 3)));
        assert!(!has_minimal(&tr(3, 1, 4)));
        for l2 in 2..12 {
            assert!(!has_minimal(&tr(1, 0, l2)));
        }
        assert!(has_minimal(&tr(5, 0, 8)));
    }
}
