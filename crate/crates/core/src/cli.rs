//! Command-line front end: problem specs, per-mode pipelines, reports and the corpus runner.

use crate::conjfield::{conformal_map, conjugate_form, conjugate_surface, INTERIOR_DEPTH};
use crate::divscan::{detect_divergence_lines, DivScanError, ScanOptions, VertexClass};
use crate::flatgeom::{build_multidomain, flux_polygon_from_vectors, ArcSpec, ChartTriangle, MultiDomain, Transition};
use crate::geom::Vec2;
use crate::jscheck::{check_solvability, ArcData, BoundaryData};
use crate::meshio::{save_obj, save_ply, save_with, write_psi_csv, write_w_csv};
use crate::msesolve::{
    ramp_values, scherk_exact, solve_dirichlet, solve_infinite, solve_ramped, DiscreteSolution, RampSchedule,
    SolveError, SolverConfig,
};
use crate::rnoid::{build_rnoid_in, total_curvature_report, ExhaustionSchedule, RnoidError, RnoidResult};
use crate::conjfield::graph_surface;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Default Scherk regression square: the closed form blows up on |x| = π/2.
pub const SCHERK_SIDE: f64 = std::f64::consts::PI - 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Check,
    Solve,
    Conjugate,
    Diverge,
    Rnoid,
    Scherk,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Check => "check",
            Mode::Solve => "solve",
            Mode::Conjugate => "conjugate",
            Mode::Diverge => "diverge",
            Mode::Rnoid => "rnoid",
            Mode::Scherk => "scherk",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    /// Axis-aligned rectangle with arcs tagged bottom, right, top, left.
    Rectangle {
        width: f64,
        height: f64,
        #[serde(default)]
        origin: Vec2,
        /// Interior vertices move by up to `jitter · h` in each coordinate.
        #[serde(default, skip_serializing_if = "is_zero")]
        jitter: f64,
    },
    /// Square centered at the origin, tagged like a rectangle.
    Square {
        side: f64,
        #[serde(default, skip_serializing_if = "is_zero")]
        jitter: f64,
    },
    Mesh(MeshSpec),
    /// A [`MeshSpec`] stored in a separate JSON file, relative to the spec file.
    File(PathBuf),
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

/// Problem-file domain: planar vertices and triangles, or per-triangle charts with
/// transitions; boundary arcs carry the labels that `boundary` refers to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vertices: Vec<Vec2>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub triangles: Vec<[usize; 3]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub charts: Vec<ChartTriangle>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub transitions: Vec<Transition>,
    pub boundary_arcs: Vec<ArcJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcJson {
    pub edges: Vec<[usize; 2]>,
    pub label: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub curved: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Symbol {
    #[serde(rename = "+inf")]
    PlusInf,
    #[serde(rename = "-inf")]
    MinusInf,
    /// Sample the Scherk closed form.
    #[serde(rename = "scherk")]
    Scherk,
}

/// Data on one labelled arc: a constant, `"+inf"`, `"-inf"`, `"scherk"`, or one value per
/// arc vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoundaryValue {
    Constant(f64),
    Symbol(Symbol),
    Values(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSpec {
    pub tol: f64,
    pub max_iter: usize,
    pub armijo: f64,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let c = SolverConfig::default();
        SolverSpec {
            tol: c.tol,
            max_iter: c.max_iter,
            armijo: c.armijo,
        }
    }
}

impl From<SolverSpec> for SolverConfig {
    fn from(s: SolverSpec) -> Self {
        SolverConfig {
            tol: s.tol,
            max_iter: s.max_iter,
            armijo: s.armijo,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub mode: Mode,
    /// Target mesh size for generated domains.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    /// Side of the Scherk regression square.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSpec>,
    /// Arc label to data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BTreeMap<String, BoundaryValue>>,
    /// Ramp levels standing in for ±∞.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramp: Option<Vec<f64>>,
    /// Vertex where solutions with only infinite data are pinned to 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fluxes: Option<Vec<Vec2>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ExhaustionSchedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Directory used to resolve relative paths; not part of the file.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("schema error{}{}: {message}", .field.as_ref().map(|f| format!(" in `{f}`")).unwrap_or_default(), .line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Schema {
        line: Option<usize>,
        field: Option<String>,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },
}

impl CliError {
    fn schema(field: &str, message: impl Into<String>) -> Self {
        CliError::Schema {
            line: None,
            field: Some(field.to_string()),
            message: message.into(),
        }
    }

    fn stage<E: std::error::Error + Send + Sync + 'static>(stage: &'static str) -> impl FnOnce(E) -> CliError {
        move |e| CliError::Stage {
            stage,
            source: Box::new(e),
        }
    }

    /// Process exit code: 2 for bad input, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema { .. } => 2,
            _ => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Pull the offending key out of serde's "unknown field `x`" and "missing field `x`" messages.
fn field_from_message(msg: &str) -> Option<String> {
    let start = msg.find('`')?;
    let rest = &msg[start + 1..];
    Some(rest[..rest.find('`')?].to_string())
}

/// Parse and validate a spec from JSON text, filling defaults.
pub fn parse_problem_str(text: &str) -> Result<ProblemSpec, CliError> {
    let mut spec: ProblemSpec = serde_json::from_str(text).map_err(|e| {
        let msg = e.to_string();
        CliError::Schema {
            line: Some(e.line()),
            field: field_from_message(&msg),
            message: msg,
        }
    })?;
    if spec.mode == Mode::Scherk && spec.side.is_none() {
        spec.side = Some(SCHERK_SIDE);
    }
    if spec.solver.is_none() && spec.mode != Mode::Check {
        spec.solver = Some(SolverSpec::default());
    }
    if spec.seed.is_none() {
        spec.seed = Some(0);
    }
    spec.validate()?;
    Ok(spec)
}

pub fn parse_problem(path: &Path) -> Result<ProblemSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut spec = parse_problem_str(&text)?;
    spec.base_dir = path.parent().map(Path::to_path_buf);
    spec.check_files()?;
    Ok(spec)
}

impl ProblemSpec {
    /// The minimal Scherk regression spec.
    pub fn scherk(side: f64, h: f64) -> Self {
        ProblemSpec {
            mode: Mode::Scherk,
            h: Some(h),
            side: Some(side),
            domain: None,
            boundary: None,
            ramp: None,
            anchor: None,
            fluxes: None,
            schedule: None,
            solver: None,
            seed: None,
            base_dir: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("specs serialize")
    }

    fn require<'a, T>(&self, v: &'a Option<T>, field: &str) -> Result<&'a T, CliError> {
        v.as_ref()
            .ok_or_else(|| CliError::schema(field, format!("required in {} mode", self.mode.name())))
    }

    fn validate(&self) -> Result<(), CliError> {
        if let Some(h) = self.h {
            if !(h > 0.0 && h.is_finite()) {
                return Err(CliError::schema("h", "mesh size must be positive"));
            }
        }
        if let Some(s) = &self.solver {
            if !(s.tol > 0.0) || s.max_iter == 0 || !(s.armijo > 0.0 && s.armijo < 1.0) {
                return Err(CliError::schema("solver", "need tol > 0, max_iter > 0 and 0 < armijo < 1"));
            }
        }
        if let Some(r) = &self.ramp {
            RampSchedule::new(r.clone()).map_err(|e| CliError::schema("ramp", e.to_string()))?;
        }
        match self.mode {
            Mode::Scherk => {
                self.require(&self.h, "h")?;
                let side = *self.require(&self.side, "side")?;
                if !(side > 0.0 && side < std::f64::consts::PI) {
                    return Err(CliError::schema("side", "Scherk square needs 0 < side < π"));
                }
            }
            Mode::Check | Mode::Solve | Mode::Conjugate | Mode::Diverge => {
                let dom = self.require(&self.domain, "domain")?;
                self.require(&self.boundary, "boundary")?;
                match dom {
                    DomainSpec::Rectangle { width, height, jitter, .. } => {
                        self.require(&self.h, "h")?;
                        if !(*width > 0.0 && *height > 0.0) {
                            return Err(CliError::schema("domain", "rectangle needs positive width and height"));
                        }
                        check_jitter(*jitter)?;
                    }
                    DomainSpec::Square { side, jitter } => {
                        self.require(&self.h, "h")?;
                        if !(*side > 0.0) {
                            return Err(CliError::schema("domain", "square needs a positive side"));
                        }
                        check_jitter(*jitter)?;
                    }
                    DomainSpec::Mesh(_) | DomainSpec::File(_) => {}
                }
                if self.mode == Mode::Diverge {
                    self.require(&self.ramp, "ramp")?;
                }
            }
            Mode::Rnoid => {
                let f = self.require(&self.fluxes, "fluxes")?;
                if f.len() < 3 {
                    return Err(CliError::schema("fluxes", "an r-noid needs at least 3 flux vectors"));
                }
                let s = self.require(&self.schedule, "schedule")?;
                s.validate().map_err(|e| CliError::schema("schedule", e.to_string()))?;
            }
        }
        Ok(())
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(d) if p.is_relative() => d.join(p),
            _ => p.to_path_buf(),
        }
    }

    fn check_files(&self) -> Result<(), CliError> {
        if let Some(DomainSpec::File(p)) = &self.domain {
            let full = self.resolve(p);
            if !full.is_file() {
                return Err(CliError::schema("domain", format!("file {} does not exist", full.display())));
            }
        }
        Ok(())
    }

    pub fn solver_config(&self) -> SolverConfig {
        self.solver.unwrap_or_default().into()
    }
}

fn check_jitter(j: f64) -> Result<(), CliError> {
    if (0.0..=0.25).contains(&j) {
        Ok(())
    } else {
        Err(CliError::schema("domain", "jitter must lie in [0, 0.25]"))
    }
}

fn jittered(dom: MultiDomain, jitter: f64, h: f64, seed: u64) -> Result<MultiDomain, CliError> {
    if jitter == 0.0 {
        return Ok(dom);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos = dom.mesh.positions.clone();
    for (v, p) in pos.iter_mut().enumerate() {
        let (dx, dy) = (rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
        if !dom.is_boundary(v) {
            *p = *p + Vec2::new(dx, dy) * (jitter * h);
        }
    }
    MultiDomain::from_planar(pos, dom.mesh.triangles.clone(), &dom.arc_specs()).map_err(CliError::stage("domain"))
}

/// Build the domain a spec describes.
pub fn build_domain(spec: &ProblemSpec) -> Result<MultiDomain, CliError> {
    let seed = spec.seed.unwrap_or(0);
    let h = || spec.h.ok_or_else(|| CliError::schema("h", "required for generated domains"));
    let from_mesh = |m: &MeshSpec| -> Result<MultiDomain, CliError> {
        let arcs: Vec<ArcSpec> = m
            .boundary_arcs
            .iter()
            .map(|a| ArcSpec {
                edges: a.edges.clone(),
                tag: a.label.clone(),
                curved: a.curved,
            })
            .collect();
        if !m.charts.is_empty() {
            build_multidomain(&m.charts, &m.transitions, &arcs).map_err(CliError::stage("domain"))
        } else {
            MultiDomain::from_planar(m.vertices.clone(), m.triangles.clone(), &arcs).map_err(CliError::stage("domain"))
        }
    };
    match spec.domain.as_ref().ok_or_else(|| CliError::schema("domain", "missing"))? {
        DomainSpec::Rectangle {
            width,
            height,
            origin,
            jitter,
        } => {
            let h = h()?;
            let nx = (width / h).round().max(1.0) as usize;
            let ny = (height / h).round().max(1.0) as usize;
            let d = MultiDomain::rectangle(*origin, *width, *height, nx, ny).map_err(CliError::stage("domain"))?;
            jittered(d, *jitter, h, seed)
        }
        DomainSpec::Square { side, jitter } => {
            let h = h()?;
            let d = MultiDomain::centered_square(*side, h).map_err(CliError::stage("domain"))?;
            jittered(d, *jitter, h, seed)
        }
        DomainSpec::Mesh(m) => from_mesh(m),
        DomainSpec::File(p) => {
            let full = spec.resolve(p);
            let text = std::fs::read_to_string(&full).map_err(io_err(&full))?;
            let m: MeshSpec = serde_json::from_str(&text).map_err(|e| CliError::Schema {
                line: Some(e.line()),
                field: Some("domain".into()),
                message: format!("{}: {e}", full.display()),
            })?;
            from_mesh(&m)
        }
    }
}

/// Per-arc boundary data from the label map. Every arc needs a label entry and every entry
/// must name an arc.
pub fn boundary_data(spec: &ProblemSpec, dom: &MultiDomain) -> Result<BoundaryData, CliError> {
    let map = spec.boundary.as_ref().ok_or_else(|| CliError::schema("boundary", "missing"))?;
    for key in map.keys() {
        if !dom.arcs.iter().any(|a| &a.tag == key) {
            let tags: Vec<&str> = dom.arcs.iter().map(|a| a.tag.as_str()).collect();
            return Err(CliError::schema("boundary", format!("no arc labelled {key:?} (arcs: {tags:?})")));
        }
    }
    let mut arcs = Vec::with_capacity(dom.arcs.len());
    for a in &dom.arcs {
        let v = map
            .get(&a.tag)
            .ok_or_else(|| CliError::schema("boundary", format!("no data for arc {:?}", a.tag)))?;
        arcs.push(match v {
            BoundaryValue::Constant(c) => ArcData::Finite(vec![*c; a.vertices.len()]),
            BoundaryValue::Symbol(Symbol::PlusInf) => ArcData::PlusInf,
            BoundaryValue::Symbol(Symbol::MinusInf) => ArcData::MinusInf,
            BoundaryValue::Symbol(Symbol::Scherk) => ArcData::Finite(
                a.vertices
                    .iter()
                    .map(|&v| {
                        let p = dom.position(v);
                        scherk_exact(p.x, p.y)
                    })
                    .collect::<Result<_, _>>()
                    .map_err(|e| CliError::schema("boundary", e.to_string()))?,
            ),
            BoundaryValue::Values(vals) => ArcData::Finite(vals.clone()),
        });
    }
    let data = BoundaryData::new(arcs);
    data.validate(dom).map_err(|e| CliError::schema("boundary", e.to_string()))?;
    Ok(data)
}

/// A numeric assertion with its measured value and threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    /// `<=` or `>=`.
    pub relation: String,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value,
            threshold,
            relation: "<=".into(),
            passed: value <= threshold,
        }
    }

    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value,
            threshold,
            relation: ">=".into(),
            passed: value >= threshold,
        }
    }
}

/// Deterministic run summary; wall-clock timings go to the `timings.json` sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub mode: Mode,
    pub tool_version: String,
    pub config: ProblemSpec,
    pub passed: bool,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<serde_json::Value>,
    pub details: BTreeMap<String, serde_json::Value>,
    /// File names relative to the output directory.
    pub artifacts: Vec<String>,
    #[serde(skip)]
    pub timings: Vec<(String, f64)>,
}

impl RunReport {
    fn new(spec: &ProblemSpec) -> Self {
        RunReport {
            mode: spec.mode,
            tool_version: TOOL_VERSION.to_string(),
            config: spec.clone(),
            passed: true,
            checks: Vec::new(),
            verdict: None,
            details: BTreeMap::new(),
            artifacts: Vec::new(),
            timings: Vec::new(),
        }
    }

    fn check(&mut self, c: Check) {
        if !c.passed {
            log::warn!("check {} failed: {} {} {}", c.name, c.value, c.relation, c.threshold);
        }
        self.passed &= c.passed;
        self.checks.push(c);
    }

    fn detail(&mut self, key: &str, v: impl Serialize) {
        self.details.insert(key.into(), serde_json::to_value(v).expect("details serialize"));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

struct Ctx<'a> {
    out: &'a Path,
    report: RunReport,
    clock: Instant,
}

impl Ctx<'_> {
    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.report.timings.push((stage.into(), (now - self.clock).as_secs_f64()));
        self.clock = now;
    }

    fn emit(&mut self, name: &str, f: impl FnOnce(&Path) -> Result<(), crate::meshio::MeshIoError>) -> Result<(), CliError> {
        let path = self.out.join(name);
        f(&path).map_err(CliError::stage("output"))?;
        self.report.artifacts.push(name.into());
        Ok(())
    }

    fn emit_json<T: Serialize>(&mut self, name: &str, v: &T) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(v).map_err(CliError::stage("output"))?;
        let path = self.out.join(name);
        std::fs::write(&path, text).map_err(io_err(&path))?;
        self.report.artifacts.push(name.into());
        Ok(())
    }
}

/// Options that do not belong to the spec itself.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: PathBuf,
    /// Overrides the spec's seed.
    pub seed: Option<u64>,
}

/// Run a validated spec, writing artifacts, `report.json` and `timings.json` into `opts.out`.
/// Artifacts written before a failure stay on disk.
pub fn run(spec: &ProblemSpec, opts: &RunOptions) -> Result<RunReport, CliError> {
    let mut spec = spec.clone();
    if let Some(s) = opts.seed {
        spec.seed = Some(s);
    }
    std::fs::create_dir_all(&opts.out).map_err(io_err(&opts.out))?;
    let mut ctx = Ctx {
        out: &opts.out,
        report: RunReport::new(&spec),
        clock: Instant::now(),
    };
    log::info!("running {} into {}", spec.mode.name(), opts.out.display());
    match spec.mode {
        Mode::Scherk => run_scherk(&spec, &mut ctx)?,
        Mode::Check => run_check(&spec, &mut ctx)?,
        Mode::Solve => {
            run_solve(&spec, &mut ctx, false)?;
        }
        Mode::Conjugate => {
            run_solve(&spec, &mut ctx, true)?;
        }
        Mode::Diverge => run_diverge(&spec, &mut ctx)?,
        Mode::Rnoid => run_rnoid(&spec, &mut ctx)?,
    }
    let report = ctx.report;
    let path = opts.out.join("report.json");
    std::fs::write(&path, report.to_json()).map_err(io_err(&path))?;
    let timings: BTreeMap<&str, f64> = report.timings.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    let path = opts.out.join("timings.json");
    std::fs::write(&path, serde_json::to_string_pretty(&timings).expect("timings serialize")).map_err(io_err(&path))?;
    Ok(report)
}

/// Interior max error against the closed form passes when ≤ 25 h² (0.01 at h = 0.02).
pub fn scherk_error_bound(h: f64) -> f64 {
    25.0 * h * h
}

fn run_scherk(spec: &ProblemSpec, ctx: &mut Ctx) -> Result<(), CliError> {
    let h = spec.h.unwrap_or(0.05);
    let side = spec.side.unwrap_or(SCHERK_SIDE);
    let dom = MultiDomain::centered_square(side, h).map_err(CliError::stage("domain"))?;
    let data = BoundaryData::from_fn(&dom, |p| scherk_exact(p.x, p.y).unwrap_or(f64::NAN));
    let vals = ramp_values(&dom, &data, 0.0);
    ctx.lap("domain");
    let sol = solve_dirichlet(&dom, &vals, &spec.solver_config()).map_err(CliError::stage("solve"))?;
    ctx.lap("solve");
    let err = dom
        .interior_vertices()
        .map(|v| {
            let p = dom.position(v);
            (sol.u[v] - scherk_exact(p.x, p.y).unwrap_or(f64::NAN)).abs()
        })
        .fold(0.0, f64::max);
    let r = &mut ctx.report;
    r.detail("max_error", err);
    r.detail("h", dom.h());
    r.detail("vertices", dom.n_vertices());
    r.detail("newton_iterations", sol.iterations);
    r.detail("residual", sol.residual);
    r.check(Check::at_most("max_error", err, scherk_error_bound(h)));
    r.check(Check::at_most("newton_residual", sol.residual, spec.solver_config().tol));
    let graph = graph_surface(&dom, &sol.u);
    ctx.emit("graph.obj", |p| save_obj(&graph, p))?;
    Ok(())
}

fn run_check(spec: &ProblemSpec, ctx: &mut Ctx) -> Result<(), CliError> {
    let dom = build_domain(spec)?;
    let data = boundary_data(spec, &dom)?;
    ctx.lap("domain");
    let v = check_solvability(&dom, &data).map_err(CliError::stage("check"))?;
    ctx.lap("check");
    ctx.report.detail("subdomains_checked", v.subdomains_checked);
    ctx.report.detail("violated", &v.violated);
    ctx.report.verdict = Some(serde_json::to_value(v.to_json()).expect("verdicts serialize"));
    Ok(())
}

/// Mean of W over the triangles around each vertex.
fn vertex_w(dom: &MultiDomain, sol: &DiscreteSolution) -> Vec<f64> {
    let mut sum = vec![0.0; dom.n_vertices()];
    let mut cnt = vec![0usize; dom.n_vertices()];
    for (t, tri) in dom.mesh.triangles.iter().enumerate() {
        for &v in tri {
            sum[v] += sol.w[t];
            cnt[v] += 1;
        }
    }
    sum.iter().zip(&cnt).map(|(s, &c)| if c == 0 { 1.0 } else { s / c as f64 }).collect()
}

fn run_solve(spec: &ProblemSpec, ctx: &mut Ctx, conjugate: bool) -> Result<(), CliError> {
    let dom = build_domain(spec)?;
    let data = boundary_data(spec, &dom)?;
    let cfg = spec.solver_config();
    ctx.lap("domain");
    let seq = if data.has_infinite() {
        let ramp = spec
            .ramp
            .clone()
            .ok_or_else(|| CliError::schema("ramp", "required for ±∞ boundary data"))?;
        let ramp = RampSchedule::new(ramp).map_err(|e| CliError::schema("ramp", e.to_string()))?;
        match solve_infinite(&dom, &data, &ramp, spec.anchor, &cfg) {
            Ok(seq) => seq,
            Err(SolveError::UnsolvableConfiguration(v)) => {
                // an answer, not a failure
                ctx.report.verdict = Some(serde_json::to_value(v.to_json()).expect("verdicts serialize"));
                ctx.report.detail("solved", false);
                return Ok(());
            }
            Err(e) => return Err(CliError::stage("solve")(e)),
        }
    } else {
        vec![solve_dirichlet(&dom, &ramp_values(&dom, &data, 0.0), &cfg).map_err(CliError::stage("solve"))?]
    };
    ctx.lap("solve");
    let sol = seq.last().expect("at least one solution");
    {
        let r = &mut ctx.report;
        r.detail("solved", true);
        r.detail("vertices", dom.n_vertices());
        r.detail("triangles", dom.n_triangles());
        r.detail("residual", sol.residual);
        r.detail("newton_iterations", seq.iter().map(|s| s.iterations).collect::<Vec<_>>());
        r.detail("ramp_levels", seq.iter().filter_map(|s| s.ramp_level).collect::<Vec<_>>());
        r.detail("max_w", sol.w.iter().copied().fold(0.0, f64::max));
        if seq.len() >= 2 {
            let prev = &seq[seq.len() - 2];
            let d = sol.u.iter().zip(&prev.u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            r.detail("last_ramp_change", d);
        }
        r.check(Check::at_most("newton_residual", sol.residual, cfg.tol));
    }
    let graph = graph_surface(&dom, &sol.u);
    let w = vertex_w(&dom, sol);
    ctx.emit("graph.obj", |p| save_obj(&graph, p))?;
    ctx.emit("graph.ply", |p| save_ply(&graph, &[("u", &sol.u), ("w", &w)], p))?;
    ctx.emit("w.csv", |p| save_with(p, |f| write_w_csv(&dom, &seq, f)))?;
    if !conjugate {
        return Ok(());
    }
    let field = conjugate_form(&dom, sol, spec.anchor).map_err(CliError::stage("conjugate"))?;
    let cmesh = conformal_map(&dom, sol).map_err(CliError::stage("conjugate"))?;
    let cs = conjugate_surface(&dom, sol, &field, &cmesh).map_err(CliError::stage("conjugate"))?;
    ctx.lap("conjugate");
    let h = spec.h.unwrap_or_else(|| dom.h());
    {
        let r = &mut ctx.report;
        r.detail("midpoint_residual", field.midpoint_residual);
        r.detail("period_ratio", cmesh.period_ratio);
        r.detail("max_length_distortion", cs.max_length_distortion);
        r.detail("corner_length_distortion", cs.corner_length_distortion);
        r.check(Check::at_most("loop_residual_over_h_len", field.closedness_ratio(INTERIOR_DEPTH), 1.0));
        r.check(Check::at_most("psi_lipschitz_excess", field.lipschitz_excess(&dom), 10.0 * h));
    }
    ctx.emit("sigma.obj", |p| save_obj(&cs.surface, p))?;
    ctx.emit("sigma.ply", |p| save_ply(&cs.surface, &[("psi", &field.psi), ("w", &w)], p))?;
    ctx.emit("psi.csv", |p| save_with(p, |f| write_psi_csv(&dom, &field.psi, f)))?;
    Ok(())
}

fn run_diverge(spec: &ProblemSpec, ctx: &mut Ctx) -> Result<(), CliError> {
    let dom = build_domain(spec)?;
    let data = boundary_data(spec, &dom)?;
    let levels = spec.ramp.clone().ok_or_else(|| CliError::schema("ramp", "required in diverge mode"))?;
    ctx.lap("domain");
    let seq = solve_ramped(&dom, &data, &levels, spec.anchor, &spec.solver_config()).map_err(CliError::stage("solve"))?;
    ctx.lap("solve");
    let infinite: Vec<usize> = (0..dom.arcs.len()).filter(|&a| !matches!(data.arcs[a], ArcData::Finite(_))).collect();
    let opts = ScanOptions::excluding(infinite);
    let summary = match detect_divergence_lines(&dom, &seq, &opts) {
        Ok(rep) => {
            let r = &mut ctx.report;
            r.verdict = Some(serde_json::json!({"status": "Divergent", "lines": rep.lines.len()}));
            r.detail("divergent_vertices", rep.region.count(VertexClass::Divergent));
            r.detail("bounded_vertices", rep.region.count(VertexClass::Bounded));
            r.detail("median_w", &rep.region.median_w);
            r.detail("crossing_violations", &rep.crossing_violations);
            let h = spec.h.unwrap_or_else(|| dom.h());
            for (i, l) in rep.lines.iter().enumerate() {
                r.check(Check::at_most(&format!("line{i}_straightness"), l.straightness, 2.0 * h));
                r.check(Check::at_most(&format!("line{i}_normal_spread_deg"), l.top_spread(), 10.0));
            }
            serde_json::json!({"lines": rep.lines, "crossing_violations": rep.crossing_violations})
        }
        Err(DivScanError::NoDivergence) => {
            ctx.report.verdict = Some(serde_json::json!({"status": "NoDivergence", "lines": 0}));
            serde_json::json!({"lines": []})
        }
        Err(e) => return Err(CliError::stage("diverge")(e)),
    };
    ctx.lap("scan");
    ctx.emit_json("divergence.json", &summary)?;
    ctx.emit("w.csv", |p| save_with(p, |f| write_w_csv(&dom, &seq, f)))?;
    Ok(())
}

fn rnoid_checks(res: &RnoidResult, r: &mut RunReport) {
    let h = res.h;
    r.check(Check::at_most("corner_flux", res.corner_flux_max(), 2.0 * h));
    r.check(Check::at_most("psi_corner_spread", res.psi_corner_spread(), 2.0 * h));
    r.check(Check::at_least("psi_interior_min", res.psi_interior_min, -2.0 * h));
    r.check(Check::at_most("planarity", res.planarity, res.planarity_tol));
    r.check(Check::at_most("flux_error", res.flux_error, 0.1));
    r.check(Check::at_least("strong_symmetry", res.strong_symmetry.fraction, 0.99));
    match total_curvature_report(res, res.targets.iter().map(|t| t.norm() / 2.0).fold(0.0, f64::max)) {
        Ok(c) => {
            if let Some(t) = c.tail_ratios.first() {
                r.check(Check::at_most("tail_ratio", *t, 0.6));
            }
            let rel = (c.degree_estimate - c.degree_oracle as f64).abs() / (c.degree_oracle.max(1) as f64);
            r.check(Check::at_most("degree_relative_error", rel, 0.1));
            r.detail("curvature", &c);
        }
        Err(e) => log::warn!("curvature report failed: {e}"),
    }
    r.detail("fluxes", &res.fluxes);
    r.detail("targets", &res.targets);
    r.detail("successive_diff", &res.successive_diff);
    r.detail("capped_euler", res.capped_euler);
    r.detail("ends", res.ends);
}

fn run_rnoid(spec: &ProblemSpec, ctx: &mut Ctx) -> Result<(), CliError> {
    let fluxes = spec.fluxes.as_ref().ok_or_else(|| CliError::schema("fluxes", "required in rnoid mode"))?;
    let sched = spec.schedule.as_ref().ok_or_else(|| CliError::schema("schedule", "required in rnoid mode"))?;
    let poly = flux_polygon_from_vectors(fluxes).map_err(|e| CliError::schema("fluxes", e.to_string()))?;
    let ckpt = ctx.out.join("checkpoints");
    std::fs::create_dir_all(&ckpt).map_err(io_err(&ckpt))?;
    let (res, err) = match build_rnoid_in(&poly, sched, Some(&ckpt)) {
        Ok(r) => (r, None),
        Err(RnoidError::FluxMismatch { worst, bound, result }) => (*result, Some((worst, bound))),
        Err(e) => return Err(CliError::stage("rnoid")(e)),
    };
    ctx.lap("rnoid");
    if let Some((worst, bound)) = err {
        log::warn!("end fluxes miss their targets by {worst:.4} (bound {bound:.4})");
    }
    rnoid_checks(&res, &mut ctx.report);
    ctx.report.artifacts.push("checkpoints".into());
    let sigma = &res.sigma;
    let topo = sigma.topology().map_err(CliError::stage("rnoid"))?;
    let k = sigma.angle_defects(&topo);
    let z: Vec<f64> = sigma.positions.iter().map(|p| p.z).collect();
    ctx.emit("sigma.obj", |p| save_obj(sigma, p))?;
    ctx.emit("sigma.ply", |p| save_ply(sigma, &[("height", &z), ("angle_defect", &k)], p))?;
    ctx.emit_json("rnoid.json", &res)?;
    ctx.lap("output");
    Ok(())
}

/// One corpus entry's outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub spec: String,
    pub mode: Option<Mode>,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Run every `*.json` in `dir`, each into `out/<stem>`, on `jobs` threads.
pub fn run_corpus(dir: &Path, out: &Path, jobs: usize, seed: Option<u64>) -> Result<Vec<CorpusEntry>, CliError> {
    use rayon::prelude::*;
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(CliError::stage("corpus"))?;
    let entries: Vec<CorpusEntry> = pool.install(|| {
        files
            .par_iter()
            .map(|f| {
                let stem = f.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                let name = f.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                let res = parse_problem(f).and_then(|spec| {
                    let opts = RunOptions {
                        out: out.join(&stem),
                        seed,
                    };
                    run(&spec, &opts)
                });
                match res {
                    Ok(r) => CorpusEntry {
                        spec: name,
                        mode: Some(r.mode),
                        passed: r.passed,
                        error: None,
                    },
                    Err(e) => CorpusEntry {
                        spec: name,
                        mode: None,
                        passed: false,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect()
    });
    std::fs::create_dir_all(out).map_err(io_err(out))?;
    let path = out.join("corpus.json");
    std::fs::write(&path, serde_json::to_string_pretty(&entries).expect("corpus serializes")).map_err(io_err(&path))?;
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_scherk_spec_fills_defaults() {
        let s = parse_problem_str(r#"{"mode":"scherk","side":3.0,"h":0.05}"#).unwrap();
        assert_eq!(s.mode, Mode::Scherk);
        assert_eq!(s.side, Some(3.0));
        assert_eq!(s.solver, Some(SolverSpec::default()));
        assert_eq!(s.seed, Some(0));
    }

    #[test]
    fn unknown_keys_are_named() {
        let e = parse_problem_str(r#"{"mode":"scherk","h":0.05,"solverr":{}}"#).unwrap_err();
        match e {
            CliError::Schema { field, line, .. } => {
                assert_eq!(field.as_deref(), Some("solverr"));
                assert_eq!(line, Some(1));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn rnoid_needs_fluxes() {
        let e = parse_problem_str(r#"{"mode":"rnoid","schedule":{"k":[2,4,8],"m0":4,"h":0.05}}"#).unwrap_err();
        assert!(matches!(e, CliError::Schema { field: Some(ref f), .. } if f == "fluxes"), "{e}");
    }

    #[test]
    fn nested_unknown_keys_are_rejected() {
        let e = parse_problem_str(r#"{"mode":"scherk","h":0.05,"solver":{"tol":1e-9,"maxiter":3}}"#).unwrap_err();
        assert!(matches!(e, CliError::Schema { field: Some(ref f), .. } if f == "maxiter"), "{e}");
    }

    #[test]
    fn boundary_labels_must_match_arcs() {
        let s = parse_problem_str(
            r#"{"mode":"check","h":0.5,"domain":{"square":{"side":1.0}},
               "boundary":{"top":"+inf","bottom":"+inf","left":0,"rigth":0}}"#,
        )
        .unwrap();
        let dom = build_domain(&s).unwrap();
        assert!(matches!(boundary_data(&s, &dom), Err(CliError::Schema { .. })));
    }
}
