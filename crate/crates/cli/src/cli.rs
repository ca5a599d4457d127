use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use matchstick::angles::{angle_fan, published_angle_list_check, AngleFan, AngleListReport};
use matchstick::figures::FIGURES;
use matchstick::flexer::{
    flex_step, monitor_value, steer_to_event, trace_to_csv, FlexOptions, FlexState, Monitor,
};
use matchstick::ingest::{write_msg, IngestReport};
use matchstick::refiner::{refine, DistanceConstraint, RefineOptions, RefineReport};
use matchstick::render::{render_svg, SvgStyle};
use matchstick::rigidity::{analyze, criticality_scan, flex_space, pebble_game_2_3, CriticalityScan, PebbleResult, RigidityReport};
use matchstick::symmetry::{detect_symmetries, SymmetryGroup};
use matchstick::verifier::{verify_matchstick, verify_patch, CrossingViolation, PatchReport, VerificationCertificate};
use matchstick::ToleranceProfile;
use serde::{Deserialize, Serialize};

use crate::assemble::{assemble, parse_plan, AssemblyReport};
use crate::input::{
    ensure_refined, figure_text, inferred_profile, load, parse_pair, read_text, write_text,
    CliError, CliResult, InputArgs, Loaded,
};

#[derive(Debug, Parser)]
#[command(name = "matchstick", version, about = "Ingest, verify, refine, analyze and flex matchstick graphs")]
pub struct Cli {
    /// Print the report as JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Turn a TikZ drawing into a unit-scale graph (MSG).
    Ingest(IngestArgs),
    /// Check unit lengths, crossings, separation and the degree profile.
    Verify(VerifyArgs),
    /// Solve all edge lengths to 1 to machine precision.
    Refine(RefineArgs),
    /// Infinitesimal rigidity: rank, degrees of freedom, flex modes.
    Rigidity(RigidityArgs),
    /// Move along a flex, or steer a vertex pair to a target distance.
    Flex(FlexArgs),
    /// Detect rotations and mirror lines.
    Symmetry(SymmetryArgs),
    /// Angles between consecutive edges around vertices.
    Angles(AnglesArgs),
    /// Build a graph from placed blocks (JSON plan).
    Assemble(AssembleArgs),
    /// Draw as SVG.
    Render(RenderArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long, value_name = "PATH", conflicts_with = "figure")]
    pub tikz: Option<PathBuf>,
    #[arg(long, value_name = "ID")]
    pub figure: Option<String>,
    /// List the bundled figures.
    #[arg(long, conflicts_with_all = ["tikz", "figure"])]
    pub list: bool,
    /// Write the graph in MSG format.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Allowed degrees `m,n`; defaults to the smallest and largest degree.
    #[arg(long, value_name = "M,N")]
    pub profile: Option<String>,
    /// Unit-length slack; defaults to the raw-figure tolerance.
    #[arg(long, value_name = "X")]
    pub eps: Option<f64>,
    /// Treat the drawing as a finite piece of an infinite graph: only
    /// interior vertices must meet the profile.
    #[arg(long)]
    pub patch: bool,
}

#[derive(Debug, Args)]
pub struct RefineArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Extra distance constraint `a,b,target` (ids or names); repeatable.
    #[arg(long = "constraint", value_name = "A,B,T")]
    pub constraints: Vec<String>,
    #[arg(long, default_value_t = 100)]
    pub max_iterations: usize,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RigidityArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Also recompute the rank with each edge removed.
    #[arg(long)]
    pub scan: bool,
    /// Analyze the coordinates as given instead of refining first.
    #[arg(long)]
    pub raw: bool,
}

#[derive(Debug, Args)]
pub struct FlexArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Steer until dist(a, b) = target; `a` and `b` are ids or names.
    #[arg(long, value_name = "A,B,TARGET", conflicts_with = "mode")]
    pub monitor: Option<String>,
    /// Step along this flex mode instead of steering.
    #[arg(long)]
    pub mode: Option<usize>,
    /// Step length for `--mode` (negative to go backwards).
    #[arg(long, default_value_t = 0.01, allow_negative_numbers = true)]
    pub h: f64,
    /// Number of `--mode` steps.
    #[arg(long, default_value_t = 1)]
    pub steps: usize,
    /// Initial step length when steering.
    #[arg(long)]
    pub step_init: Option<f64>,
    /// Write the steering trace as CSV.
    #[arg(long, value_name = "PATH")]
    pub trace: Option<PathBuf>,
    /// Write the final configuration (MSG).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub raw: bool,
}

#[derive(Debug, Args)]
pub struct SymmetryArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Matching radius.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub raw: bool,
}

#[derive(Debug, Args)]
pub struct AnglesArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Vertices (ids or names); defaults to those of the largest degree.
    #[arg(long = "vertex", value_name = "V")]
    pub vertices: Vec<String>,
    /// Also check the published eleven-angle list around a degree-11 vertex.
    #[arg(long)]
    pub published: bool,
    #[arg(long)]
    pub raw: bool,
}

#[derive(Debug, Args)]
pub struct AssembleArgs {
    #[arg(long, value_name = "PATH")]
    pub plan: PathBuf,
    /// Keep the merged coordinates as they are.
    #[arg(long)]
    pub no_refine: bool,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// SVG destination; standard output if omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Comma-separated vertices to mark; defaults to the named ones.
    #[arg(long, value_name = "V,...")]
    pub highlight: Option<String>,
    #[arg(long)]
    pub no_dots: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Directory for persisted sessions.
    #[arg(long, value_name = "DIR", default_value = "sessions")]
    pub state_dir: PathBuf,
}

// ---------------------------------------------------------------------------
// Reports. Every `--json` output is one of these.

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestOutput {
    pub n_vertices: usize,
    pub n_edges: usize,
    pub names: Vec<(usize, String)>,
    pub max_abs_length_deviation: f64,
    pub report: IngestReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutput {
    pub profile: (usize, usize),
    pub eps: f64,
    pub overall: bool,
    pub certificate: Option<VerificationCertificate>,
    pub patch: Option<PatchReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineOutput {
    pub report: RefineReport,
    pub max_abs_length_deviation: f64,
    pub constraints: Vec<DistanceConstraint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityOutput {
    pub refinement: Option<RefineReport>,
    pub report: RigidityReport,
    pub pebble: PebbleResult,
    pub scan: Option<CriticalityScan>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlexOutput {
    pub refinement: Option<RefineReport>,
    pub steps: usize,
    pub arclength: f64,
    pub monitor: Option<Monitor>,
    pub monitor_value: Option<f64>,
    pub max_abs_length_deviation: f64,
    pub crossing_ok: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryOutput {
    pub refinement: Option<RefineReport>,
    pub group: SymmetryGroup,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnglesOutput {
    pub fans: Vec<AngleFan>,
    pub published: Option<AngleListReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderOutput {
    pub lines: usize,
    pub highlighted: Vec<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureEntry {
    pub id: String,
    pub n_vertices: usize,
    pub n_edges: usize,
    pub degrees: Vec<usize>,
}

// ---------------------------------------------------------------------------

/// Run one invocation. `argv[0]` is the program name. Returns the exit
/// status: 0 success, 1 failed check, 2 usage or input error.
pub fn run<I, S>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = write!(out, "{}", e.render());
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(out, "error: {e}");
            e.code
        }
    }
}

fn emit<T: Serialize>(out: &mut dyn Write, json: bool, value: &T, text: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> CliResult<()> {
    let r = if json {
        crate::json::to_string_pretty(value)
            .map_err(|e| std::io::Error::other(e.to_string()))
            .and_then(|s| writeln!(out, "{s}"))
    } else {
        text(out)
    };
    r.map_err(|e| CliError::failed(format!("writing output: {e}")))
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> CliResult<i32> {
    let tol = ToleranceProfile::default();
    let json = cli.json;
    match &cli.command {
        Command::Ingest(a) => ingest(a, &tol, json, out),
        Command::Verify(a) => verify(a, &tol, json, out),
        Command::Refine(a) => refine_cmd(a, &tol, json, out),
        Command::Rigidity(a) => rigidity(a, &tol, json, out),
        Command::Flex(a) => flex(a, &tol, json, out),
        Command::Symmetry(a) => symmetry(a, &tol, json, out),
        Command::Angles(a) => angles(a, &tol, json, out),
        Command::Assemble(a) => assemble_cmd(a, &tol, json, out),
        Command::Render(a) => render(a, &tol, json, out),
        Command::Serve(a) => serve(a),
    }
}

fn maybe_refine(loaded: &Loaded, raw: bool) -> CliResult<(matchstick::Embedding, Option<RefineReport>)> {
    if raw {
        Ok((loaded.embedding.clone(), None))
    } else {
        ensure_refined(&loaded.graph, &loaded.embedding)
    }
}

fn ingest(a: &IngestArgs, tol: &ToleranceProfile, json: bool, out: &mut dyn Write) -> CliResult<i32> {
    if a.list {
        let list: Vec<FigureEntry> = FIGURES
            .iter()
            .map(|f| FigureEntry {
                id: f.id.to_string(),
                n_vertices: f.vertices,
                n_edges: f.edges,
                degrees: f.degrees.to_vec(),
            })
            .collect();
        emit(out, json, &list, |w| {
            for f in &list {
                writeln!(w, "{:<30} {:>4} vertices {:>4} edges  degrees {:?}", f.id, f.n_vertices, f.n_edges, f.degrees)?;
            }
            Ok(())
        })?;
        return Ok(0);
    }
    let text = match (&a.tikz, &a.figure) {
        (Some(p), _) => read_text(p)?,
        (None, Some(id)) => figure_text(id)?.to_string(),
        (None, None) => return Err(CliError::usage("one of --tikz, --figure or --list is required")),
    };
    let ing = matchstick::ingest::ingest_tikz(&text, tol)?;
    if let Some(p) = &a.out {
        write_text(p, &ing.to_msg())?;
    }
    let report = IngestOutput {
        n_vertices: ing.graph.n_vertices(),
        n_edges: ing.graph.n_edges(),
        names: ing.name_list(),
        max_abs_length_deviation: ing.embedding.max_abs_length_deviation(&ing.graph),
        report: ing.report.clone(),
    };
    emit(out, json, &report, |w| {
        writeln!(w, "{} vertices, {} edges", report.n_vertices, report.n_edges)?;
        writeln!(
            w,
            "{} segments ({} split, {} duplicates dropped), scale {:.6}",
            report.report.n_segments,
            report.report.segments_split,
            report.report.duplicate_segments_dropped,
            report.report.scale
        )?;
        writeln!(w, "max |len - 1| = {:.3e}", report.max_abs_length_deviation)?;
        for (v, n) in &report.names {
            writeln!(w, "vertex {v} is named {n}")?;
        }
        Ok(())
    })?;
    Ok(0)
}

fn describe_violation(g: &matchstick::Graph, v: &CrossingViolation) -> String {
    let pair = |e: usize| {
        let (a, b) = g.edges()[e];
        format!("({a}, {b})")
    };
    match *v {
        CrossingViolation::Disjoint { e1, e2, distance } => {
            format!("edges {} and {} cross or come within {distance:.3e}", pair(e1), pair(e2))
        }
        CrossingViolation::Overlap { e1, e2, distance } => {
            format!("edges {} and {} overlap (distance {distance:.3e})", pair(e1), pair(e2))
        }
        CrossingViolation::VertexOnEdge { vertex, edge, distance } => {
            format!("vertex {vertex} touches edge {} (distance {distance:.3e})", pair(edge))
        }
    }
}

fn verify(a: &VerifyArgs, tol: &ToleranceProfile, json: bool, out: &mut dyn Write) -> CliResult<i32> {
    let loaded = load(&a.input, tol)?;
    let (g, emb) = (&loaded.graph, &loaded.embedding);
    let profile = match &a.profile {
        Some(s) => parse_pair::<usize>(s, "--profile")?,
        None => inferred_profile(g),
    };
    let eps = a.eps.unwrap_or(tol.eps_raw);
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(CliError::usage("--eps must be positive"));
    }
    let report = if a.patch {
        let p = verify_patch(g, emb, profile.0, profile.1, tol, eps)?;
        VerifyOutput { profile, eps, overall: p.overall, certificate: None, patch: Some(p) }
    } else {
        let c = verify_matchstick(g, emb, profile.0, profile.1, tol, eps)?;
        VerifyOutput { profile, eps, overall: c.overall, certificate: Some(c), patch: None }
    };
    emit(out, json, &report, |w| {
        let verdict = if report.overall { "VERIFIED" } else { "FAILED" };
        writeln!(w, "{verdict}: {} vertices, {} edges, profile ({}, {})", g.n_vertices(), g.n_edges(), profile.0, profile.1)?;
        if let Some(c) = &report.certificate {
            writeln!(w, "unit lengths   {} (max |len - 1| = {:.3e}, eps {eps:e})", ok(c.unit_ok), c.max_abs_length_deviation)?;
            writeln!(w, "non-crossing   {}", ok(c.crossing_ok))?;
            for v in &c.violations {
                writeln!(w, "  {}", describe_violation(g, v))?;
            }
            writeln!(w, "degrees        {} {:?}", ok(c.degrees_ok), c.degree_profile.counts)?;
            writeln!(w, "connected      {}", ok(c.connected))?;
            writeln!(w, "separation     {}", ok(c.separation_ok))?;
            for (p, q) in &c.close_pairs {
                writeln!(w, "  vertices {p} and {q} nearly coincide")?;
            }
        }
        if let Some(p) = &report.patch {
            writeln!(w, "unit lengths   {} (max |len - 1| = {:.3e}, eps {eps:e})", ok(p.unit_ok), p.max_abs_length_deviation)?;
            writeln!(w, "non-crossing   {}", ok(p.crossing_ok))?;
            for v in &p.violations {
                writeln!(w, "  {}", describe_violation(g, v))?;
            }
            writeln!(w, "interior       {} {:?} ({} boundary vertices)", ok(p.interior_ok), p.interior_degrees, p.boundary.len())?;
            writeln!(w, "connected      {}", ok(p.connected))?;
            writeln!(w, "separation     {}", ok(p.separation_ok))?;
        }
        Ok(())
    })?;
    Ok(if report.overall { 0 } else { 1 })
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAIL"
    }
}

/// `a,b,target` with vertex ids or names.
fn parse_constraint(loaded: &Loaded, s: &str, what: &str) -> CliResult<DistanceConstraint> {
    let parts: Vec<&str> = s.split(',').collect();
    let [a, b, t] = parts[..] else {
        return Err(CliError::usage(format!("{what}: expected a,b,target, got {s:?}")));
    };
    let target: f64 = t
        .trim()
        .parse()
        .map_err(|_| CliError::usage(format!("{what}: bad target {t:?}")))?;
    let (a, b) = (loaded.vertex(a)?, loaded.vertex(b)?);
    if a == b || !(target > 0.0 && target.is_finite()) {
        return Err(CliError::usage(format!("{what}: need two distinct vertices and a positive target")));
    }
    Ok(DistanceConstraint { a, b, target })
}

fn refine_cmd(a: &RefineArgs, tol: &ToleranceProfile, json: bool, out: &mut dyn Write) -> CliResult<i32> {
    let loaded = load(&a.input, tol)?;
    let constraints = a
        .constraints
        .iter()
        .map(|s| parse_constraint(&loaded, s, "--constraint"))
        .collect::<CliResult<Vec<_>>>()?;
    let opts = RefineOptions {
        max_iterations: a.max_iterations,
        extra: constraints.clone(),
        ..Default::default()
    };
    let (emb, rep) = refine(&loaded.graph, &loaded.embedding, &opts)?;
    if let Some(p) = &a.out {
        write_text(p, &write_msg(&loaded.graph, &emb, &loaded.names))?;
    }
    let report = RefineOutput {
        max_abs_length_deviation: emb.max_abs_length_deviation(&loaded.graph),
        report: rep,
        constraints,
    };
    emit(out, json, &report, |w| {
        let r = &report.report;
        writeln!(
            w,
            "{} after {} iterations: max |len - 1| = {:.3e}, largest vertex move {:.3e}",
            if r.converged { "converged" } else { "NOT converged" },
            r.iterations,
            report.max_abs_length_deviation,
            r.displacement_max
        )?;
        for c in &report.constraints {
            writeln!(w, "dist({}, {}) = {:.15}", c.a, c.b, matchstick::distance(emb.get(c.a), emb.get(c.b)))?;
        }
        Ok(())
    })?;
    Ok(if report.report.converged { 0 } else { 1 })
}

fn rigidity(a: &RigidityArgs, tol: &ToleranceProfile, json: bool, out: &mut dyn Write) -> CliResult<i32> {
    let loaded = load(&a.input, tol)?;
    let (emb, refinement) = maybe_refine(&loaded, a.raw)?;
    let g = &loaded.graph;
    let report = RigidityOutput {
        report: analyze(g, &emb, tol)?,
        pebble: pebble_game_2_3(g),
        scan: if a.scan { Some(criticality_scan(g, &emb, tol)?) } else { None },
        refinement,
    };
    emit(out, json, &report, |w| {
        let r = &report.report;
        let class = match r.classification {
            matchstick::rigidity::Classification::Rigid => "rigid",
            matchstick::rigidity::Classification::Flexible => "flexible",
        };
        writeln!(w, "{class}, dof {} (rank {} of {})", r.internal_dof, r.rank, (2 * g.n_vertices()).saturating_sub(3))?;
        writeln!(w, "generic dof (pebble game) {}", report.pebble.generic_dof)?;
        if r.gap_ratio.is_finite() {
            writeln!(w, "singular-value gap {:.3e}", r.gap_ratio)?;
        }
        for warn in &r.warnings {
            writeln!(w, "warning: {warn:?}")?;
        }
        if report.refinement.is_some() {
            writeln!(w, "(coordinates were refined before the analysis)")?;
        }
        if let Some(s) = &report.scan {
            writeln!(w, "redundancy {}", s.redundancy)?;
            for e in &s.edges {
                writeln!(w, "  edge {:?}: dof {} without it", e.edge, e.dof_after_removal)?;
            }
        }
        Ok(())
    })?;
    Ok(0)
}

fn flex(a: &FlexArgs, tol: &ToleranceProfile, json: bool, out: &mut dyn Write) -> CliResult<i32> {
    let loaded = load(&a.input, tol)?;
    let (emb, refinement) = maybe_refine(&loaded, a.raw)?;
    let g = &loaded.graph;
    let mut opts = FlexOptions::default();
    if let Some(s) = a.step_init {
        opts.step_init = s;
        opts.step_max = opts.step_max.max(s);
        opts.step_min = opts.step_min.min(s);
    }
    let state0 = FlexState::new(emb);
    let (state, steps, monitor, crossing_ok) = if let Some(arg) = &a.monitor {
        let c = parse_constraint(&loaded, arg, "--monitor")?;
        let m = Monitor { a: c.a, b: c.b, target: c.target };
        let (state, trace) = steer_to_event(g, &state0, &m, &opts)?;
        if let Some(p) = &a.trace {
            write_text(p, &trace_to_csv(&trace))?;
        }
        let crossing = trace.last().and_then(|t| t.crossing_ok);
        (state, trace.len() - 1, Some(m), crossing)
    } else if let Some(k) = a.mode {
        let mut state = state0;
        let mut reference: Option<Vec<f64>> = None;
        for _ in 0..a.steps {
            let basis = flex_space(g, &state.embedding, opts.rank_tau)?;
            if basis.ncols() == 0 {
                return Err(matchstick::Error::NoFlex.into());
            }
            if k >= basis.ncols() {
                return Err(CliError::usage(format!("mode {k} requested but only {} flex modes exist", basis.ncols())));
            }
            let mut d: Vec<f64> = basis.column(k).iter().copied().collect();
            // Singular vectors have arbitrary sign; keep heading the same way.
            if let Some(r) = &reference {
                if d.iter().zip(r).map(|(x, y)| x * y).sum::<f64>() < 0.0 {
                    d.iter_mut().for_each(|x| *x = -*x);
                }
            }
            state = flex_step(g, &state, &d, a.h, &opts)?;
            reference = Some(d);
        }
        (state, a.steps, None, None)
    } else {
        return Err(CliError::usage("give --monitor a,b,target or --mode K"));
    };
    if let Some(p) = &a.out {
        write_text(p, &write_msg(g, &state.embedding, &loaded.names))?;
    }
    let report = FlexOutput {
        refinement,
        steps,
        arclength: state.arclength,
        monitor_value: monitor.as_ref().map(|m| monitor_value(&state.embedding, m)),
        monitor,
        max_abs_length_deviation: state.embedding.max_abs_length_deviation(g),
        crossing_ok,
    };
    emit(out, json, &report, |w| {
        writeln!(w, "{} steps, arclength {:.9}", report.steps, report.arclength)?;
        if let (Some(m), Some(v)) = (&report.monitor, report.monitor_value) {
            writeln!(w, "dist({}, {}) = {v:.15} (target {}, off by {:.3e})", m.a, m.b, m.target, (v - m.target).abs())?;
        }
        writeln!(w, "max |len - 1| = {:.3e}", report.max_abs_length_deviation)?;
        if let Some(c) = report.crossing_ok {
            writeln!(w, "crossing-free at the event: {}", if c { "yes" } else { "no" })?;
        }
        Ok(())
    })?;
    Ok(0)
}

fn symmetry(a: &SymmetryArgs, tol: &ToleranceProfile, json: bool, out: &mut dyn Write) -> CliResult<i32> {
    let loaded = load(&a.input, tol)?;
    let (emb, refinement) = maybe_refine(&loaded, a.raw)?;
    let sym_tol = a.tol.unwrap_or(tol.sym_tol);
    let report = SymmetryOutput {
        group: detect_symmetries(&loaded.graph, &emb, sym_tol),
        refinement,
    };
    emit(out, json, &report, |w| {
        let grp = &report.group;
        writeln!(w, "{}: rotation order {}, {} mirror lines", grp.classification, grp.rotation_order, grp.mirror_count)?;
        writeln!(w, "center ({:.12}, {:.12})", grp.center.x, grp.center.y)?;
        for a in &grp.mirror_axes {
            writeln!(w, "  mirror at {:.9} degrees", a.to_degrees())?;
        }
        Ok(())
    })?;
    Ok(0)
}

fn angles(a: &AnglesArgs, tol: &ToleranceProfile, json: bool, out: &mut dyn Write) -> CliResult<i32> {
    let loaded = load(&a.input, tol)?;
    let (emb, _) = maybe_refine(&loaded, a.raw)?;
    let g = &loaded.graph;
    let vertices: Vec<usize> = if a.vertices.is_empty() {
        let top = g.degrees().into_iter().max().unwrap_or(0);
        (0..g.n_vertices()).filter(|&v| g.degree(v) == top).collect()
    } else {
        a.vertices.iter().map(|s| loaded.vertex(s)).collect::<CliResult<_>>()?
    };
    let fans = vertices
        .iter()
        .map(|&v| angle_fan(g, &emb, v))
        .collect::<matchstick::Result<Vec<_>>>()?;
    let report = AnglesOutput {
        fans,
        published: a.published.then(published_angle_list_check),
    };
    emit(out, json, &report, |w| {
        for f in &report.fans {
            let list: Vec<String> = f.angles.iter().map(|x| format!("{x:.9}")).collect();
            writeln!(w, "vertex {} (degree {}): {} (sum {:.12})", f.center, f.angles.len(), list.join(", "), f.sum())?;
        }
        if let Some(p) = &report.published {
            writeln!(
                w,
                "published list: {} angles, sum {:.12}, range [{:.6}, {:.6}] ({})",
                p.count,
                p.sum,
                p.min,
                p.max,
                if p.sum_ok && p.range_ok { "ok" } else { "FAIL" }
            )?;
        }
        Ok(())
    })?;
    let bad = report.published.as_ref().is_some_and(|p| !(p.sum_ok && p.range_ok));
    Ok(if bad { 1 } else { 0 })
}

fn assemble_cmd(a: &AssembleArgs, tol: &ToleranceProfile, json: bool, out: &mut dyn Write) -> CliResult<i32> {
    let plan = parse_plan(&read_text(&a.plan)?)?;
    let base = a.plan.parent().map(PathBuf::from).unwrap_or_default();
    let built = assemble(&plan, &base, tol, !a.no_refine)?;
    if let Some(p) = &a.out {
        write_text(p, &write_msg(&built.graph, &built.embedding, &[]))?;
    }
    let report: &AssemblyReport = &built.report;
    emit(out, json, report, |w| {
        writeln!(
            w,
            "{} blocks -> {} vertices, {} edges ({} vertices identified, {} edges added)",
            report.blocks,
            report.n_vertices,
            report.n_edges,
            report.identifications,
            report.added_edges.len()
        )?;
        writeln!(w, "max |len - 1| = {:.3e}", report.max_abs_length_deviation)
    })?;
    Ok(0)
}

fn render(a: &RenderArgs, tol: &ToleranceProfile, json: bool, out: &mut dyn Write) -> CliResult<i32> {
    let loaded = load(&a.input, tol)?;
    let highlight: Vec<usize> = match &a.highlight {
        Some(list) => list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| loaded.vertex(s))
            .collect::<CliResult<_>>()?,
        None => loaded.names.iter().map(|&(v, _)| v).collect(),
    };
    let style = SvgStyle {
        vertex_dots: !a.no_dots,
        highlight: highlight.clone(),
        ..Default::default()
    };
    let svg = render_svg(&loaded.graph, &loaded.embedding, &style)?;
    match &a.out {
        Some(p) => {
            write_text(p, &svg)?;
            let report = RenderOutput {
                lines: loaded.graph.n_edges(),
                highlighted: highlight,
                out: Some(p.clone()),
            };
            emit(out, json, &report, |w| writeln!(w, "wrote {} ({} edges)", p.display(), report.lines))?;
        }
        None => {
            out.write_all(svg.as_bytes())
                .map_err(|e| CliError::failed(format!("writing output: {e}")))?;
        }
    }
    Ok(0)
}

fn serve(a: &ServeArgs) -> CliResult<i32> {
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::failed(format!("starting runtime: {e}")))?;
    rt.block_on(crate::server::serve(a.port, a.state_dir.clone()))
        .map_err(|e| CliError::failed(e.to_string()))?;
    Ok(0)
}
