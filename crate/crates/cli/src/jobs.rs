//! Job descriptions and their execution.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use calabi_core::basespace::{EdgeJson, SpaceSpec};
use calabi_core::decompose::{gamma_sweep, partition_and_evaluate, PieceStatus, DEFAULT_GAMMAS};
use calabi_core::measure::{integrate_monte_carlo, integrate_sigma};
use calabi_core::quasistate::{
    evaluate, evaluation_point, independence_certificate, mu_delta_closed_form, mu_delta_via_pullback, tree_median,
};
use calabi_core::symmetry::{displace_point, displace_region};
use calabi_core::{
    BaseSpace, Convention, Engine, Error as CoreError, MeasuredTree, QuasiStateModel, SmoothFunction,
    ToricHamiltonian, TreePoint,
};
use serde::{Deserialize, Serialize};

use crate::checks::{run_all, CheckOptions};
use crate::numfmt::{full, short, table};

/// Tolerance for the closed form against the pullback construction.
pub const TWO_PATH_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Eval,
    MuDelta,
    Independence,
    Displace,
    Median,
    Decompose,
    Selftest,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    #[default]
    Exact,
    Quad,
    Mc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineOptions {
    pub engine: EngineKind,
    pub order: usize,
    /// 0 lets the decomposition pick its own refinement.
    pub subdivisions: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self { engine: EngineKind::Exact, order: 6, subdivisions: 1, samples: 1_000_000, seed: 0 }
    }
}

impl EngineOptions {
    pub fn engine(&self) -> Engine {
        match self.engine {
            EngineKind::Exact => Engine::Exact,
            EngineKind::Quad => Engine::Quadrature { order: self.order, subdivisions: self.subdivisions },
            EngineKind::Mc => Engine::MonteCarlo { samples: self.samples, seed: self.seed },
        }
    }
}

/// Everything a run depends on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobSpec {
    pub command: Command,
    #[serde(default)]
    pub space: Option<PathBuf>,
    /// Shorthand for the simplex `Δₙ` when no space file is given.
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub function: Option<PathBuf>,
    #[serde(default)]
    pub tree: Option<PathBuf>,
    #[serde(default)]
    pub balls: Option<PathBuf>,
    #[serde(default)]
    pub point: Option<Vec<f64>>,
    #[serde(default)]
    pub engine: EngineOptions,
    #[serde(default)]
    pub deltas: Vec<f64>,
    /// Radius of the matched bumps when no profiles are given.
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default)]
    pub convention: Convention,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub gamma_sweep: bool,
    #[serde(default = "one")]
    pub power: i64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub table: bool,
    #[serde(default)]
    pub tamper_dirichlet: bool,
}

fn default_radius() -> f64 {
    0.02
}

fn one() -> i64 {
    1
}

impl JobSpec {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            space: None,
            n: None,
            function: None,
            tree: None,
            balls: None,
            point: None,
            engine: EngineOptions::default(),
            deltas: Vec::new(),
            radius: default_radius(),
            convention: Convention::default(),
            gamma: None,
            gamma_sweep: false,
            power: 1,
            out: None,
            table: false,
            tamper_dirichlet: false,
        }
    }
}

/// Raised when a numerical self-check disagrees; maps to exit status 2.
#[derive(Debug)]
pub struct CheckFailure(pub String);

impl fmt::Display for CheckFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "check failed: {}", self.0)
    }
}

impl std::error::Error for CheckFailure {}

/// 2 for failed internal checks, 1 for everything else.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    let internal = err.chain().any(|e| {
        e.downcast_ref::<CheckFailure>().is_some() || matches!(e.downcast_ref::<CoreError>(), Some(CoreError::Check(_)))
    });
    if internal {
        2
    } else {
        1
    }
}

/// What a run produced: text for stdout and files for the output directory.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub stdout: String,
    pub files: Vec<(String, String)>,
    /// Set when the run completed but a check inside it failed.
    pub failed: bool,
}

impl Artifacts {
    /// Writes `files` (and the job itself) under `dir`.
    pub fn write(&self, job: &JobSpec, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        fs::write(dir.join("job.json"), serde_json::to_string_pretty(job)? + "\n")?;
        for (name, body) in &self.files {
            let path = dir.join(name);
            fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| anyhow!("{}: malformed input: {e}", path.display()))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    Many(Vec<SmoothFunction>),
    One(SmoothFunction),
}

#[derive(Deserialize)]
struct TreeFile {
    edges: Vec<EdgeJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

fn load_space(job: &JobSpec) -> Result<BaseSpace> {
    match (&job.space, job.n) {
        (Some(path), _) => Ok(read_json::<SpaceSpec>(path)?.build()?),
        (None, Some(n)) => Ok(BaseSpace::simplex(n, 1.0)?),
        (None, None) => bail!("missing --space (or --n)"),
    }
}

fn load_function(job: &JobSpec) -> Result<SmoothFunction> {
    read_json(job.function.as_deref().context("missing --function")?)
}

fn load_profiles(job: &JobSpec) -> Result<Option<Vec<SmoothFunction>>> {
    let Some(path) = &job.function else { return Ok(None) };
    Ok(Some(match read_json::<OneOrMany>(path)? {
        OneOrMany::Many(v) => v,
        OneOrMany::One(f) => vec![f],
    }))
}

fn load_tree(job: &JobSpec) -> Result<MeasuredTree> {
    let path = job.tree.as_deref().context("missing --tree")?;
    let file: TreeFile = read_json(path)?;
    match (SpaceSpec::Tree { edges: file.edges }).build()? {
        BaseSpace::Tree(t) => Ok(t),
        _ => unreachable!("a tree spec builds a tree"),
    }
}

fn dimension(job: &JobSpec) -> Result<usize> {
    if let Some(n) = job.n {
        return Ok(n);
    }
    match load_space(job)? {
        BaseSpace::Simplex(s) => Ok(s.dim()),
        _ => bail!("this command needs a simplex"),
    }
}

fn deltas(job: &JobSpec) -> Result<&[f64]> {
    if job.deltas.is_empty() {
        bail!("missing --deltas");
    }
    Ok(&job.deltas)
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn csv(rows: &[Vec<String>]) -> String {
    rows.iter().map(|r| r.join(",") + "\n").collect()
}

/// Two-column output, CSV or a rounded table.
fn pairs(job: &JobSpec, rows: &[(&str, String)], values: &[(&str, f64)]) -> String {
    let mut all: Vec<Vec<String>> = rows.iter().map(|(k, v)| vec![k.to_string(), v.clone()]).collect();
    for (k, v) in values {
        all.push(vec![k.to_string(), if job.table { short(*v) } else { full(*v) }]);
    }
    if job.table {
        table(&["quantity", "value"], &all)
    } else {
        csv(&all)
    }
}

pub fn run(job: &JobSpec) -> Result<Artifacts> {
    match job.command {
        Command::Eval => eval(job),
        Command::MuDelta => mu_delta(job),
        Command::Independence => independence(job),
        Command::Displace => displace(job),
        Command::Median => median(job),
        Command::Decompose => decompose(job),
        Command::Selftest => selftest(job),
    }
}

fn eval(job: &JobSpec) -> Result<Artifacts> {
    let space = load_space(job)?;
    let model = QuasiStateModel::standard(&space)?;
    let f = load_function(job)?;
    let h = ToricHamiltonian::with_power(f.clone(), job.power);
    let mut values = Vec::new();
    let result = if job.engine.engine == EngineKind::Mc {
        let mc = integrate_monte_carlo(&model.dh, &f, job.engine.samples, job.engine.seed)?;
        let m = job.power as f64;
        let calabi = m * mc.estimate;
        let sigma = m * integrate_sigma(&model.sigma, &model.space, &f)?;
        values.push(("standard_error", m.abs() * mc.standard_error));
        calabi_core::quasistate::Evaluation { zeta: calabi - sigma, calabi, sigma }
    } else {
        evaluate(&model, &h, job.engine.engine())?
    };
    values.splice(0..0, [("zeta", result.zeta), ("calabi", result.calabi), ("sigma", result.sigma)]);
    let stdout = pairs(job, &[], &values);
    Ok(Artifacts { files: vec![("eval.csv".into(), csv_of(&values)), ("eval.json".into(), json(&result)?)], stdout, failed: false })
}

fn csv_of(values: &[(&str, f64)]) -> String {
    csv(&values.iter().map(|(k, v)| vec![k.to_string(), full(*v)]).collect::<Vec<_>>())
}

#[derive(Serialize, Deserialize)]
pub struct MuDeltaRow {
    pub n: usize,
    pub delta: f64,
    pub profile: usize,
    pub evaluation_point: f64,
    pub closed_form: f64,
    pub via_pullback: f64,
    pub difference: f64,
}

fn mu_delta(job: &JobSpec) -> Result<Artifacts> {
    let n = dimension(job)?;
    let profiles = load_profiles(job)?.context("missing --function (profile or list of profiles)")?;
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for &delta in deltas(job)? {
        for (j, f) in profiles.iter().enumerate() {
            let closed = mu_delta_closed_form(n, delta, f, job.convention)?;
            let via_pullback = mu_delta_via_pullback(n, delta, f)?;
            let derived = mu_delta_closed_form(n, delta, f, Convention::Derived)?;
            worst = worst.max((derived - via_pullback).abs());
            rows.push(MuDeltaRow {
                n,
                delta,
                profile: j,
                evaluation_point: evaluation_point(n, delta),
                closed_form: closed,
                via_pullback,
                difference: closed - via_pullback,
            });
        }
    }
    if worst > TWO_PATH_TOLERANCE {
        return Err(CheckFailure(format!("closed form and pullback differ by {worst:e}")).into());
    }
    let header = ["n", "delta", "profile", "evaluation_point", "closed_form", "via_pullback", "difference"];
    let cells = |fmt: fn(f64) -> String| -> Vec<Vec<String>> {
        rows.iter()
            .map(|r| {
                vec![
                    r.n.to_string(),
                    fmt(r.delta),
                    r.profile.to_string(),
                    fmt(r.evaluation_point),
                    fmt(r.closed_form),
                    fmt(r.via_pullback),
                    fmt(r.difference),
                ]
            })
            .collect()
    };
    let mut body = vec![header.iter().map(|s| s.to_string()).collect()];
    body.extend(cells(full));
    let csv_text = csv(&body);
    let stdout = if job.table { table(&header, &cells(short)) } else { csv_text.clone() };
    Ok(Artifacts {
        stdout,
        files: vec![("mu_delta.csv".into(), csv_text), ("mu_delta.json".into(), json(&rows)?)],
        failed: false,
    })
}

#[derive(Serialize, Deserialize)]
pub struct IndependenceArtifact {
    pub n: usize,
    pub deltas: Vec<f64>,
    pub convention: Convention,
    pub profiles: Vec<SmoothFunction>,
    pub certificate: calabi_core::quasistate::IndependenceCertificate,
}

fn independence(job: &JobSpec) -> Result<Artifacts> {
    let n = dimension(job)?;
    let deltas = deltas(job)?;
    let profiles = match load_profiles(job)? {
        Some(p) => p,
        None => deltas.iter().map(|&d| SmoothFunction::bump(vec![evaluation_point(n, d)], job.radius)).collect(),
    };
    let cert = independence_certificate(n, deltas, &profiles, job.convention)?;
    let max = cert.singular_values[0];
    let mut stdout = format!("rank,{}\n", cert.rank);
    stdout += &pairs(
        job,
        &[],
        &[
            ("max_singular_value", max),
            ("min_singular_value", cert.min_singular_value),
            ("ratio", cert.min_singular_value / max),
        ],
    );
    let mut plot = vec![vec!["i".to_string(), "j".into(), "delta".into(), "value".into()]];
    for (i, row) in cert.matrix.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            plot.push(vec![i.to_string(), j.to_string(), full(deltas[i]), full(*v)]);
        }
    }
    let artifact =
        IndependenceArtifact { n, deltas: deltas.to_vec(), convention: job.convention, profiles, certificate: cert };
    Ok(Artifacts {
        stdout,
        files: vec![("independence.json".into(), json(&artifact)?), ("independence_matrix.csv".into(), csv(&plot))],
        failed: false,
    })
}

fn displace(job: &JobSpec) -> Result<Artifacts> {
    let space = load_space(job)?;
    let simplex = space.as_simplex().context("displace needs a simplex")?;
    let cert = if let Some(p) = &job.point {
        displace_point(simplex, p)?
    } else {
        let balls: Vec<(Vec<f64>, f64)> = if let Some(path) = &job.balls {
            read_json::<Vec<Ball>>(path)?.into_iter().map(|b| (b.center, b.radius)).collect()
        } else {
            let f = load_function(job).context("displace needs --point, --balls or --function")?;
            f.support_bound().balls().context("the support bound is not a finite union of balls")?
        };
        displace_region(simplex, &balls)?
    };
    let stdout = match &cert {
        Some(c) => format!("certificate,{}\nseparation,{}\n", c.symmetry.cycles(), full(c.separation)),
        None => "certificate,none\n".to_string(),
    };
    Ok(Artifacts { stdout, files: vec![("certificate.json".into(), json(&cert)?)], failed: false })
}

fn median(job: &JobSpec) -> Result<Artifacts> {
    let tree = load_tree(job)?;
    let m = tree_median(&tree);
    let at = match m.point {
        TreePoint::Vertex(v) => format!("vertex:{}", tree.vertex_name(v)),
        TreePoint::Edge { edge, offset } => {
            let e = tree.edge(edge)?;
            format!("edge:{}-{}@{}", tree.vertex_name(e.u), tree.vertex_name(e.v), full(offset))
        }
    };
    let stdout = format!("median,{at},unique:{}\nspread,{}\n", m.unique, full(m.spread));
    Ok(Artifacts { files: vec![("median.csv".into(), stdout.clone())], stdout, failed: false })
}

#[derive(Serialize, Deserialize)]
pub struct SweepArtifact {
    pub schedule: Vec<f64>,
    pub rows: Vec<calabi_core::decompose::SweepRow>,
}

fn decompose(job: &JobSpec) -> Result<Artifacts> {
    let space = load_space(job)?;
    let model = QuasiStateModel::standard(&space)?;
    let f = load_function(job)?;
    let engine = match job.engine.engine {
        EngineKind::Exact => Engine::Exact,
        EngineKind::Quad => Engine::Quadrature { order: job.engine.order, subdivisions: job.engine.subdivisions },
        EngineKind::Mc => bail!("decompose evaluates pieces with a quadrature rule; use --engine exact or quad"),
    };
    if job.gamma_sweep {
        let schedule = DEFAULT_GAMMAS.to_vec();
        let rows = gamma_sweep(&model, &f, &schedule, engine)?;
        let header = ["gamma", "epsilon_achieved", "pipeline_value", "error", "additivity_error", "pieces"];
        let cells = |fmt: fn(f64) -> String| -> Vec<Vec<String>> {
            rows.iter()
                .map(|r| {
                    vec![
                        fmt(r.gamma),
                        fmt(r.epsilon_achieved),
                        fmt(r.pipeline_value),
                        fmt(r.error),
                        fmt(r.additivity_error),
                        r.pieces.to_string(),
                    ]
                })
                .collect()
        };
        let mut body = vec![header.iter().map(|s| s.to_string()).collect()];
        body.extend(cells(full));
        let csv_text = csv(&body);
        let stdout = if job.table { table(&header, &cells(short)) } else { csv_text.clone() };
        let artifact = SweepArtifact { schedule, rows };
        return Ok(Artifacts {
            stdout,
            files: vec![("gamma_sweep.csv".into(), csv_text), ("gamma_sweep.json".into(), json(&artifact)?)],
            failed: false,
        });
    }
    let gamma = job.gamma.context("missing --gamma (or --gamma-sweep)")?;
    let report = partition_and_evaluate(&model, &f, gamma, engine)?;
    let certified = report.pieces.iter().filter(|p| matches!(p.status, PieceStatus::Certified { .. })).count();
    let stdout = format!("pieces,{}\ncertified_pieces,{certified}\n", report.pieces.len())
        + &pairs(
            job,
            &[],
            &[
                ("gamma", report.gamma),
                ("epsilon_achieved", report.epsilon_achieved),
                ("sum_of_values", report.sum_of_values),
                ("zeta_fprime", report.zeta_fprime),
                ("reconstruction_error", report.reconstruction_error),
                ("additivity_error", report.additivity_error),
                ("partition_error", report.partition_error),
                ("pointwise_error", report.pointwise_error),
            ],
        );
    let mut pieces = vec![vec!["index".to_string(), "kind".into(), "certificate".into(), "radius".into(), "center".into(), "value".into()]];
    for p in &report.pieces {
        let (kind, cert) = match &p.status {
            PieceStatus::NearPstar => ("near_pstar", String::new()),
            PieceStatus::Certified { certificate } => ("certified", certificate.symmetry.cycles()),
        };
        let center: Vec<String> = p.center.iter().map(|&c| full(c)).collect();
        pieces.push(vec![p.index.to_string(), kind.into(), cert, full(p.radius), center.join(" "), full(p.value)]);
    }
    Ok(Artifacts {
        stdout,
        files: vec![("decompose.json".into(), json(&report)?), ("decompose_pieces.csv".into(), csv(&pieces))],
        failed: false,
    })
}

fn selftest(job: &JobSpec) -> Result<Artifacts> {
    let opts = CheckOptions { convention: job.convention, tamper_dirichlet: job.tamper_dirichlet };
    let outcomes = run_all(&opts);
    let mut stdout = String::new();
    for o in &outcomes {
        stdout += &o.line();
        stdout.push('\n');
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name).collect();
    if failed.is_empty() {
        stdout += &format!("all {} checks passed\n", outcomes.len());
    } else {
        stdout += &format!("failed: {}\n", failed.join(", "));
    }
    Ok(Artifacts { stdout, files: Vec::new(), failed: !failed.is_empty() })
}
