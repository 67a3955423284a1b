//! `ctrlgauge` command-line front end.
//!
//! Exit codes: 0 success, 1 unexpected failure, 2 schema or dimension error
//! (including bad flags), 3 missing target bounds, 4 singular `A` for a
//! recover analysis, 5 unstable generator growth, 6 state not reachable,
//! 7 oracle disagreement in `verify`.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ctrlgauge::control::{compare_ability_with, min_time, Side, DEFAULT_MAX_STEPS};
use ctrlgauge::model::{normalize_full, ModelFile};
use ctrlgauge::oracle::suite::{run_verify, Fault, Level, Status};
use ctrlgauge::region::{controllability_report, RegionFamily};
use ctrlgauge::zonotope::{svg_document, Polygon, ShapeReport};
use ctrlgauge::{ConstraintSpec, Error, Exec, LdtSystem, RegionKind};
use serde::Serialize;

use output::{fmt_sig, matrix_block, OutputSet};

#[derive(Parser, Debug)]
#[command(name = "ctrlgauge", version, about = "Control-ability analysis of linear discrete-time systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normalize a model by its rated or target bounds.
    Normalize(NormalizeArgs),
    /// Build controllability regions and report size and shape.
    Region(RegionArgs),
    /// Compare the control ability of two models.
    Compare(CompareArgs),
    /// Minimum-time steering of one state.
    Mintime(MintimeArgs),
    /// Cross-check the main algorithms against brute-force oracles.
    Verify(VerifyArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Mode {
    /// Use the model as written.
    Raw,
    /// Scale by the rated input and state bounds.
    Rated,
    /// Scale by the rated input and the target state bounds.
    Target,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Reach,
    Recover,
}

impl From<KindArg> for RegionKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Reach => RegionKind::Reach,
            KindArg::Recover => RegionKind::Recover,
        }
    }
}

#[derive(Args, Debug)]
struct Common {
    /// Directory for output files and the run manifest.
    #[arg(long, default_value = "ctrlgauge-out")]
    out_dir: PathBuf,
    /// Run analyses on one thread.
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn exec(&self) -> Exec {
        if self.sequential {
            Exec::Sequential
        } else {
            Exec::default()
        }
    }
}

#[derive(Args, Debug)]
struct NormalizeArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum)]
    mode: Mode,
    /// Output model path; defaults to `<out-dir>/<name>.<mode>.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct RegionArgs {
    #[arg(long)]
    model: PathBuf,
    /// Step count, or comma-separated counts to overlay (e.g. `2,6`).
    #[arg(long, value_delimiter = ',', required = true)]
    steps: Vec<usize>,
    #[arg(long, value_enum, default_value = "reach")]
    kind: KindArg,
    #[arg(long, value_enum, default_value = "raw")]
    mode: Mode,
    /// 1-based coordinate pair `i,j`; repeatable. Defaults to every pair
    /// when a csv or svg format is requested.
    #[arg(long, value_parser = parse_axes)]
    project: Vec<(usize, usize)>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    model_b: PathBuf,
    #[arg(long)]
    steps: usize,
    #[arg(long, value_enum, default_value = "reach")]
    kind: KindArg,
    #[arg(long, value_enum, default_value = "raw")]
    mode: Mode,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct MintimeArgs {
    #[arg(long)]
    model: PathBuf,
    /// Comma-separated state, e.g. `0.5,-1`.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    x0: Vec<f64>,
    #[arg(long, value_enum, default_value = "reach")]
    kind: KindArg,
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: usize,
    #[arg(long, value_enum, default_value = "raw")]
    mode: Mode,
    #[command(flatten)]
    common: Common,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FaultArg {
    Volume,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "quick")]
    level: LevelArg,
    /// Corrupt a main-path result to prove the suite detects it.
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<FaultArg>,
    #[command(flatten)]
    common: Common,
}

fn parse_axes(s: &str) -> Result<(usize, usize), String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [i, j] = parts.as_slice() else {
        return Err(format!("expected i,j, got {s:?}"));
    };
    let i: usize = i.trim().parse().map_err(|e| format!("{i:?}: {e}"))?;
    let j: usize = j.trim().parse().map_err(|e| format!("{j:?}: {e}"))?;
    if i == 0 || j == 0 {
        return Err("axes are 1-based".into());
    }
    Ok((i, j))
}

/// Raised by `verify` when any check fails.
#[derive(Debug)]
struct Disagreement;

impl std::fmt::Display for Disagreement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("oracle disagreement")
    }
}

impl std::error::Error for Disagreement {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Disagreement>().is_some() {
        return 7;
    }
    match err.downcast_ref::<Error>() {
        Some(
            Error::Schema(_)
            | Error::DimensionMismatch(_)
            | Error::NonFinite(_)
            | Error::NonPositiveBound { .. }
            | Error::InvalidConfig(_)
            | Error::BadAxes(..),
        ) => 2,
        Some(Error::MissingTarget) => 3,
        Some(Error::SingularA) => 4,
        Some(Error::UnstableGrowth { .. }) => 5,
        Some(Error::NotReachable { .. }) => 6,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CTRLGAUGE_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Normalize(a) => cmd_normalize(a),
        Command::Region(a) => cmd_region(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Mintime(a) => cmd_mintime(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn load(path: &Path) -> anyhow::Result<ModelFile> {
    Ok(ModelFile::load(path)?)
}

/// The system of `file` after applying `mode`.
fn prepared(file: &ModelFile, mode: Mode) -> anyhow::Result<LdtSystem> {
    let sys = file.system()?;
    match mode {
        Mode::Raw => Ok(sys),
        Mode::Rated | Mode::Target => {
            let spec = file.spec().ok_or_else(|| {
                Error::Schema(format!("model {:?} has no rated bounds", file.name))
            })?;
            Ok(normalize_full(&sys, &spec, mode == Mode::Target)?)
        }
    }
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Raw => "raw",
        Mode::Rated => "rated",
        Mode::Target => "target",
    }
}

fn cmd_normalize(a: NormalizeArgs) -> anyhow::Result<()> {
    let file = load(&a.model)?;
    let sys = prepared(&file, a.mode)?;
    println!("{} ({} bounds)", file.name, mode_name(a.mode));
    print!("{}", matrix_block("A'", sys.a()));
    print!("{}", matrix_block("B'", sys.b()));
    let mut out = OutputSet::new(&a.common.out_dir, "normalize")?;
    out.input(&a.model);
    out.param("mode", mode_name(a.mode));
    let normalized = ModelFile::normalized(&sys, file.target.is_some());
    let path = a
        .out
        .clone()
        .unwrap_or_else(|| a.common.out_dir.join(format!("{}.{}.json", file.name, mode_name(a.mode))));
    out.write(&path, &normalized.to_json())?;
    out.finish()
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ProjectionRecord {
    axes: [usize; 2],
    steps: Vec<usize>,
    degenerate: Vec<bool>,
    files: Vec<String>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct RegionOutput<'a> {
    model: &'a str,
    mode: Mode,
    controllable: Option<bool>,
    region: ctrlgauge::region::RegionSummary,
    projections: Vec<ProjectionRecord>,
}

#[derive(Serialize)]
struct PolygonJson<'a> {
    steps: usize,
    axes: [usize; 2],
    degenerate: bool,
    vertices: &'a [[f64; 2]],
}

fn cmd_region(a: RegionArgs) -> anyhow::Result<()> {
    let file = load(&a.model)?;
    let sys = prepared(&file, a.mode)?;
    let mut steps = a.steps.clone();
    steps.sort_unstable();
    steps.dedup();
    if steps.first() == Some(&0) {
        bail!(Error::InvalidConfig("steps must be at least 1".into()));
    }
    let horizon = *steps.last().expect("clap requires a value");
    let kind: RegionKind = a.kind.into();
    let exec = a.common.exec();
    let fam = RegionFamily::build(&sys, kind, horizon, &ConstraintSpec::default())?;
    let n = sys.n();

    let mut axes = a.project.clone();
    if axes.is_empty() && a.format != Format::Json {
        for i in 1..=n {
            for j in i + 1..=n {
                axes.push((i, j));
            }
        }
    }
    for &(i, j) in &axes {
        if i > n || j > n || i == j {
            bail!(Error::BadAxes(i, j, n));
        }
    }

    let mut out = OutputSet::new(&a.common.out_dir, "region")?;
    out.input(&a.model);
    out.param("steps", &steps.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(","));
    out.param("kind", kind_name(kind));
    out.param("mode", mode_name(a.mode));
    out.param("format", format_name(a.format));

    let summary = fam.summary(exec);
    println!("{} {} region, N = {horizon}", file.name, kind_name(kind));
    println!("  rank           {}", summary.rank);
    println!("  volume         {}", fmt_sig(summary.shape_factors.volume, 5));
    println!("  f1             {}", fmt_sig(summary.shape_factors.overall_shape_factor, 4));
    for p in &summary.shape_factors.planar_shape_factors {
        println!("  f1,{},{}         {}", p.i + 1, p.j + 1, fmt_sig(p.value, 4));
    }
    for (i, f) in summary.side_lengths.iter().enumerate() {
        println!("  f2,{}           {}", i + 1, fmt_sig(*f, 5));
    }
    println!("  vertices       {:?}", summary.vertex_count_by_stage);

    let mut projections = Vec::new();
    for &(i, j) in &axes {
        let polys: Vec<Polygon> = steps
            .iter()
            .map(|&k| fam.stage(k).project_2d(i - 1, j - 1))
            .collect::<ctrlgauge::Result<_>>()?;
        let mut record = ProjectionRecord {
            axes: [i, j],
            steps: steps.clone(),
            degenerate: polys.iter().map(|p| p.degenerate).collect(),
            files: Vec::new(),
        };
        for (k, p) in steps.iter().zip(&polys) {
            if p.degenerate {
                println!("  projection ({i},{j}) at N = {k} is degenerate ({} points)", p.vertices.len());
            }
        }
        match a.format {
            Format::Svg => {
                let path = a.common.out_dir.join(format!("projection_{i}_{j}.svg"));
                out.write(&path, &svg_document(&polys))?;
                record.files.push(path.display().to_string());
            }
            Format::Csv | Format::Json => {
                for (k, p) in steps.iter().zip(&polys) {
                    let ext = if a.format == Format::Csv { "csv" } else { "json" };
                    let path = a.common.out_dir.join(format!("projection_{i}_{j}_N{k}.{ext}"));
                    let body = if a.format == Format::Csv {
                        p.to_csv()
                    } else {
                        serde_json::to_string_pretty(&PolygonJson {
                            steps: *k,
                            axes: [i, j],
                            degenerate: p.degenerate,
                            vertices: &p.vertices,
                        })?
                    };
                    out.write(&path, &body)?;
                    record.files.push(path.display().to_string());
                }
            }
        }
        projections.push(record);
    }

    let controllable = controllability_report(&sys, horizon.max(n)).ok().map(|r| r.controllable);
    let body = RegionOutput {
        model: &file.name,
        mode: a.mode,
        controllable,
        region: summary,
        projections,
    };
    out.write(&a.common.out_dir.join("region.json"), &serde_json::to_string_pretty(&body)?)?;
    out.finish()
}

fn kind_name(kind: RegionKind) -> &'static str {
    match kind {
        RegionKind::Reach => "reach",
        RegionKind::Recover => "recover",
    }
}

fn format_name(f: Format) -> &'static str {
    match f {
        Format::Json => "json",
        Format::Csv => "csv",
        Format::Svg => "svg",
    }
}

fn shape_rows(a: &ShapeReport, b: &ShapeReport) -> Vec<(String, f64, f64)> {
    let mut rows = vec![
        ("volume".to_string(), a.volume, b.volume),
        ("f1".to_string(), a.overall_shape_factor, b.overall_shape_factor),
    ];
    for (pa, pb) in a.planar_shape_factors.iter().zip(&b.planar_shape_factors) {
        rows.push((format!("f1,{},{}", pa.i + 1, pa.j + 1), pa.value, pb.value));
    }
    for (i, (fa, fb)) in a.side_lengths.iter().zip(&b.side_lengths).enumerate() {
        rows.push((format!("f2,{}", i + 1), *fa, *fb));
    }
    rows
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct CompareOutput<'a> {
    model_a: &'a str,
    model_b: &'a str,
    mode: Mode,
    verdict: ctrlgauge::AbilityVerdict,
}

fn cmd_compare(a: CompareArgs) -> anyhow::Result<()> {
    let fa = load(&a.model)?;
    let fb = load(&a.model_b)?;
    let sa = prepared(&fa, a.mode)?;
    let sb = prepared(&fb, a.mode)?;
    let kind: RegionKind = a.kind.into();
    let verdict = compare_ability_with(&sa, &sb, a.steps, kind, a.common.exec())?;

    let width = fa.name.len().max(fb.name.len()).max(12);
    println!("{:<10} {:>width$} {:>width$}", "factor", fa.name, fb.name);
    for (label, va, vb) in shape_rows(&verdict.metrics_a, &verdict.metrics_b) {
        println!("{label:<10} {:>width$} {:>width$}", fmt_sig(va, 5), fmt_sig(vb, 5));
    }
    let stronger = match verdict.stronger {
        Some(Side::A) => format!(" ({} over {})", fa.name, fb.name),
        Some(Side::B) => format!(" ({} over {})", fb.name, fa.name),
        None => String::new(),
    };
    let exactness = if verdict.exact { "" } else { ", probable: sampled directions" };
    println!("relation at N = {}: {:?}{stronger}{exactness}", a.steps, verdict.relation);
    if verdict.metrics_a.volume != verdict.metrics_b.volume {
        let bigger = if verdict.metrics_a.volume > verdict.metrics_b.volume {
            &fa.name
        } else {
            &fb.name
        };
        println!("larger region volume: {bigger}");
    }

    let mut out = OutputSet::new(&a.common.out_dir, "compare")?;
    out.input(&a.model);
    out.input(&a.model_b);
    out.param("steps", &a.steps.to_string());
    out.param("kind", kind_name(kind));
    out.param("mode", mode_name(a.mode));
    let body = CompareOutput {
        model_a: &fa.name,
        model_b: &fb.name,
        mode: a.mode,
        verdict,
    };
    out.write(&a.common.out_dir.join("compare.json"), &serde_json::to_string_pretty(&body)?)?;
    out.finish()
}

fn cmd_mintime(a: MintimeArgs) -> anyhow::Result<()> {
    let file = load(&a.model)?;
    let sys = prepared(&file, a.mode)?;
    let kind: RegionKind = a.kind.into();
    let sol = match min_time(&sys, &a.x0, kind, a.max_steps) {
        Ok(sol) => sol,
        Err(Error::NotReachable { max_steps, direction, gap }) => {
            println!("not reachable within {max_steps} steps");
            if let Some(d) = &direction {
                let shown: Vec<String> = d.iter().map(|v| fmt_sig(*v, 4)).collect();
                println!("separating direction d = [{}], dᵀx0 − h(d) = {}", shown.join(", "), fmt_sig(gap, 4));
            }
            return Err(Error::NotReachable { max_steps, direction, gap }.into());
        }
        Err(e) => return Err(e.into()),
    };
    println!("N* = {}", sol.min_steps);
    for (k, u) in sol.inputs.iter().enumerate() {
        let shown: Vec<String> = u.iter().map(|v| fmt_sig(*v, 4)).collect();
        println!("  u[{k}] = [{}]", shown.join(", "));
    }
    println!("boundary status: {:?}", sol.boundary_status);
    println!("strategy-space dimension at N = {}: {}", sol.horizon, sol.strategy_dim);
    println!("terminal error: {:e}", sol.terminal_error);

    let mut out = OutputSet::new(&a.common.out_dir, "mintime")?;
    out.input(&a.model);
    out.param(
        "x0",
        &a.x0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","),
    );
    out.param("kind", kind_name(kind));
    out.param("maxSteps", &a.max_steps.to_string());
    out.param("mode", mode_name(a.mode));
    out.write(&a.common.out_dir.join("mintime.json"), &serde_json::to_string_pretty(&sol)?)?;
    out.finish()
}

fn cmd_verify(a: VerifyArgs) -> anyhow::Result<()> {
    let level = match a.level {
        LevelArg::Quick => Level::Quick,
        LevelArg::Full => Level::Full,
    };
    let fault = a.inject_fault.map(|f| match f {
        FaultArg::Volume => Fault::Volume,
    });
    let report = run_verify(a.seed, level, fault, a.common.exec());
    for c in &report.checks {
        let status = match c.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
        };
        println!("{status} {:<14} cases={:<4} discrepancy={:e}", c.name, c.cases, c.discrepancy);
        if let Some(d) = &c.detail {
            println!("     {d}");
        }
    }
    let mut out = OutputSet::new(&a.common.out_dir, "verify")?;
    out.param("seed", &a.seed.to_string());
    out.param("level", if level == Level::Quick { "quick" } else { "full" });
    if let Some(f) = a.inject_fault {
        out.param("injectFault", &format!("{f:?}").to_lowercase());
    }
    out.write(&a.common.out_dir.join("verify.json"), &serde_json::to_string_pretty(&report)?)?;
    out.finish()?;
    if !report.passed {
        return Err(anyhow::Error::new(Disagreement)).context("verify");
    }
    Ok(())
}
