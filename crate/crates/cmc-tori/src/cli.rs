//! The `cmc` command line.
//!
//! Settings resolve as flags, then `key = value` lines of the file given by
//! `--config`, then the defaults shown by `--help`. `CMC_THREADS` caps the
//! worker threads. JSON numbers carry 17 significant digits.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{ArgAction, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{trace_family, trace_rotational, FamilyTrace, FlowState, TraceOptions};
use crate::genus0::Triple;
use crate::moduli::{classify, connectivity_check, verify_report};
use crate::surface::{
    export, extract_profiles, mesh_for_state, rotational_profile_curve, total_turning,
    ExportFormat, ProfileCurve, ProfileSet,
};
use crate::verify::{run_suite, Suite};

/// Grid resolution `NXxNY`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Resolution {
    pub nx: usize,
    pub ny: usize,
}

impl FromStr for Resolution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("resolution must look like 128x128, got {s:?}"));
        let (a, b) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        let nx: usize = a.trim().parse().map_err(|_| bad())?;
        let ny: usize = b.trim().parse().map_err(|_| bad())?;
        if nx < 3 || ny < 3 {
            return Err(Error::Domain(format!("resolution {s} below 3x3")));
        }
        Ok(Resolution { nx, ny })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProfileSetArg {
    First,
    Second,
}

#[derive(Parser, Debug)]
#[command(
    name = "cmc",
    version,
    about = "Equivariant constant mean curvature tori in the 3-sphere"
)]
#[command(args_override_self = true)]
pub struct RunConfig {
    /// File of `key = value` lines, keys being long flag names
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Trace the family through a bifurcation vertex
    Flow(FlowArgs),
    /// Write a mesh of one torus of a family
    Mesh(MeshArgs),
    /// Profile curves of one torus with their turning numbers
    Profile(ProfileArgs),
    /// Classification record of a family
    Classify(ClassifyArgs),
    /// Connect every sublattice up to an index with the full lattice
    Graph(GraphArgs),
    /// Run the invariant suites
    Verify(VerifyArgs),
}

#[derive(clap::Args, Debug)]
pub struct TraceArgs {
    /// Vertex triple `L0,L1,L2`
    #[arg(long)]
    pub triple: Triple,
    /// Bound on the relative drift of the level constant
    #[arg(long, default_value_t = 1e-8)]
    pub drift_tol: f64,
    /// Relative tolerance of the integrator
    #[arg(long, default_value_t = 1e-12)]
    pub rtol: f64,
    /// Rotational traces stop below this q
    #[arg(long, default_value_t = 1e-4)]
    pub q_min: f64,
}

impl TraceArgs {
    fn options(&self) -> TraceOptions {
        let mut o = TraceOptions {
            drift_tol: self.drift_tol,
            q_min: self.q_min,
            ..Default::default()
        };
        o.ode.rtol = self.rtol;
        o
    }

    fn trace(&self, rotational: bool) -> Result<FamilyTrace> {
        let t = self.triple;
        if rotational && !t.is_rotational() {
            return Err(Error::Domain(format!("--rotational needs l1 = 0, got {t}")));
        }
        if t.is_rotational() {
            trace_rotational(t.l0, t.l2, &self.options())
        } else {
            trace_family(&t, &self.options())
        }
    }
}

#[derive(clap::Args, Debug)]
pub struct FlowArgs {
    #[command(flatten)]
    pub trace: TraceArgs,
    /// Trace the family of tori of revolution
    #[arg(long)]
    pub rotational: bool,
    /// Write here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
pub struct PickArgs {
    /// Flow time of the torus; the middle of the family if neither this nor --q is given
    #[arg(long, conflicts_with = "q")]
    pub t: Option<f64>,
    /// Take the first torus of the family with this q
    #[arg(long)]
    pub q: Option<f64>,
}

impl PickArgs {
    fn pick(&self, f: &FamilyTrace) -> Result<FlowState> {
        match (self.t, self.q) {
            (Some(t), _) => f.state_at(t),
            (None, Some(q)) => f.state_at_q(q),
            (None, None) => f.state_at(f.t_mid()),
        }
    }
}

#[derive(clap::Args, Debug)]
pub struct MeshArgs {
    #[command(flatten)]
    pub trace: TraceArgs,
    #[command(flatten)]
    pub pick: PickArgs,
    /// Grid resolution
    #[arg(long, default_value = "64x64")]
    pub res: Resolution,
    /// Output file
    #[arg(long)]
    pub out: PathBuf,
    /// obj or json; taken from the file extension when absent
    #[arg(long)]
    pub format: Option<ExportFormat>,
}

#[derive(clap::Args, Debug)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub trace: TraceArgs,
    #[command(flatten)]
    pub pick: PickArgs,
    /// Grid resolution for extracting twizzled profiles
    #[arg(long, default_value = "160x160")]
    pub res: Resolution,
    /// Samples per period of a rotational profile
    #[arg(long, default_value_t = 400)]
    pub samples: usize,
    /// Which family of profile spheres to cut with (twizzled only)
    #[arg(long, value_enum, default_value = "first")]
    pub set: ProfileSetArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
pub struct ClassifyArgs {
    /// Vertex triple `L0,L1,L2`
    #[arg(long)]
    pub triple: Triple,
    /// How often the torus covers its profile over the rotational period
    #[arg(long, default_value_t = 1)]
    pub wrapping: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
pub struct GraphArgs {
    /// Largest sublattice index
    #[arg(long, default_value_t = 8)]
    pub max_index: i64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
pub struct VerifyArgs {
    /// One of elliptic, spectral, genus0, flow, surface, moduli; all when absent
    #[arg(long)]
    pub suite: Option<Suite>,
}

struct Sig17;

impl serde_json::ser::Formatter for Sig17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(format_f64(v).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }
}

/// `v` with 17 significant digits, e.g. `1.0000000000000000e0`.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Compact JSON with every float written by [`format_f64`], plus a newline.
pub fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17);
    v.serialize(&mut ser)
        .map_err(|e| Error::Numerical(format!("json: {e}")))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Numerical(e.to_string()))
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Domain(format!("config line {}: expected key = value", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

/// Puts the config entries that apply to the chosen subcommand right after
/// its name, so that later command line flags override them.
fn merge_config(args: &[String], entries: &[(String, String)]) -> Result<Vec<String>> {
    let cmd = RunConfig::command();
    let known = |sub: &clap::Command, key: &str| {
        sub.get_arguments()
            .find(|a| a.get_long() == Some(key))
            .cloned()
    };
    for (k, _) in entries {
        if k != "config" && !cmd.get_subcommands().any(|s| known(s, k).is_some()) {
            return Err(Error::Domain(format!("unknown config key {k:?}")));
        }
    }
    let Some((pos, sub)) = args
        .iter()
        .enumerate()
        .skip(1)
        .find_map(|(i, a)| cmd.find_subcommand(a).map(|s| (i, s)))
    else {
        return Ok(args.to_vec());
    };
    let mut injected = Vec::new();
    for (k, v) in entries {
        let Some(arg) = known(sub, k) else { continue };
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            let on: bool = v
                .parse()
                .map_err(|_| Error::Domain(format!("config {k}: expected true or false")))?;
            if on {
                injected.push(format!("--{k}"));
            }
        } else {
            injected.push(format!("--{k}={v}"));
        }
    }
    let mut out = args[..=pos].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}

fn dispatch(cfg: RunConfig, stdout: &mut Vec<u8>) -> Result<bool> {
    match cfg.command {
        Command::Flow(a) => {
            let f = a.trace.trace(a.rotational)?;
            emit(&to_json(&f)?, a.out.as_deref(), stdout)?;
        }
        Command::Mesh(a) => {
            let f = a.trace.trace(false)?;
            let st = a.pick.pick(&f)?;
            let s =
                f.s.ok_or_else(|| Error::Numerical("family has no closing vector".into()))?;
            let mut mesh = mesh_for_state(&st, s, a.res.nx, a.res.ny)?;
            mesh.triple = Some(a.trace.triple);
            let format = match a.format {
                Some(f) => f,
                None if a.out.extension().is_some_and(|e| e == "json") => ExportFormat::Json,
                None => ExportFormat::Obj,
            };
            export(&mesh, format, &a.out)?;
            #[derive(Serialize)]
            struct Summary<'a> {
                out: &'a Path,
                format: String,
                t: f64,
                q: f64,
                vertices: usize,
                faces: usize,
                closure_defect: f64,
            }
            let sum = Summary {
                out: &a.out,
                format: format.to_string(),
                t: st.t,
                q: st.point.q,
                vertices: mesh.vertices.len(),
                faces: mesh.faces.len(),
                closure_defect: mesh.closure_defect,
            };
            emit(&to_json(&sum)?, None, stdout)?;
        }
        Command::Profile(a) => {
            let f = a.trace.trace(false)?;
            let st = a.pick.pick(&f)?;
            let t = a.trace.triple;
            let curves: Vec<ProfileCurve> = if t.is_rotational() {
                vec![rotational_profile_curve(
                    st.point.q,
                    st.sp.theta1,
                    t.l2 as usize,
                    a.samples,
                )?]
            } else {
                let s =
                    f.s.ok_or_else(|| Error::Numerical("family has no closing vector".into()))?;
                let mesh = mesh_for_state(&st, s, a.res.nx, a.res.ny)?;
                let set = match a.set {
                    ProfileSetArg::First => ProfileSet::First,
                    ProfileSetArg::Second => ProfileSet::Second,
                };
                extract_profiles(&mesh, set)?
            };
            #[derive(Serialize)]
            #[serde(rename_all = "camelCase")]
            struct Profiles {
                triple: Triple,
                t: f64,
                q: f64,
                total_turning: [i64; 2],
                curves: Vec<ProfileCurve>,
            }
            let p = Profiles {
                triple: t,
                t: st.t,
                q: st.point.q,
                total_turning: [total_turning(&curves, 1), total_turning(&curves, -1)],
                curves,
            };
            emit(&to_json(&p)?, a.out.as_deref(), stdout)?;
        }
        Command::Classify(a) => {
            emit(
                &to_json(&classify(&a.triple, a.wrapping)?)?,
                a.out.as_deref(),
                stdout,
            )?;
        }
        Command::Graph(a) => {
            let r = connectivity_check(a.max_index)?;
            verify_report(&r)?;
            emit(&to_json(&r)?, a.out.as_deref(), stdout)?;
        }
        Command::Verify(a) => {
            let suites = a.suite.map_or(Suite::ALL.to_vec(), |s| vec![s]);
            let mut ok = true;
            for s in suites {
                for c in run_suite(s) {
                    ok &= c.passed;
                    let tag = if c.passed { "PASS" } else { "FAIL" };
                    writeln!(stdout, "{tag} {}/{}: {}", c.suite, c.name, c.detail)?;
                }
            }
            return Ok(ok);
        }
    }
    Ok(true)
}

fn threads() -> Result<Option<usize>> {
    match std::env::var("CMC_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Domain(format!(
                "CMC_THREADS must be a positive integer, got {v:?}"
            ))),
        },
    }
}

/// Runs one command and returns the process exit code: 0 on success, 1 for
/// usage and domain errors, 2 for numerical failures (including failed
/// verification checks).
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let result = (|| -> Result<std::result::Result<RunConfig, clap::Error>> {
        let args = match config_path(&args) {
            Some(p) => merge_config(&args, &parse_config(&fs::read_to_string(p)?)?)?,
            None => args.clone(),
        };
        Ok(RunConfig::try_parse_from(args))
    })();
    let cfg = match result {
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return e.exit_code();
        }
        Ok(Err(e)) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
        Ok(Ok(cfg)) => cfg,
    };
    let mut buf = Vec::new();
    let outcome = threads().and_then(|n| match n {
        None => dispatch(cfg, &mut buf),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Numerical(e.to_string()))?
            .install(|| dispatch(cfg, &mut buf)),
    });
    if let Err(e) = stdout.write_all(&buf) {
        let _ = writeln!(stderr, "error: {e}");
        return 1;
    }
    match outcome {
        Ok(true) => 0,
        Ok(false) => 2,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
