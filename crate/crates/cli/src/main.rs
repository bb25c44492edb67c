mod manifest;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use scenekit::bezier::{fit_error, fit_lane};
use scenekit::coverset::{greedy_cover, CoverSetFile, TrajectorySet};
use scenekit::metrics::{evaluate, DEFAULT_KS};
use scenekit::predictors::{
    physics_oracle, rollout_default, score_modes_nearest_oracle, score_modes_physics, write_predictions,
    KinematicModelKind, PredictionRecord,
};
use scenekit::prompting::{render_prompt, PromptConfig, PromptVariant};
use scenekit::raster::{render, RasterConfig};
use scenekit::scene::{read_split, write_split};
use scenekit::synthetic::{generate_split, SyntheticConfig};
use scenekit::tokenizer::{HeuristicTokenizer, TokenCounter, WordPieceTokenizer};
use scenekit::{Point2, PredictionInstance};

use manifest::RunManifest;

const DEFAULT_SEED: u64 = 7;

#[derive(Parser)]
#[command(name = "scenekit", version, about = "Scene representations and evaluation for trajectory prediction")]
struct Cli {
    /// Seed for anything randomized (only `synth` draws random numbers).
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Worker threads for per-instance work; defaults to all cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a cubic Bézier to a polyline given as `x y` rows.
    FitBezier(FitBezierArgs),
    /// Render text prompts for every instance of a split.
    Prompt(PromptArgs),
    /// Render bird's-eye-view rasters for every instance of a split.
    Raster(RasterArgs),
    /// Cover-set construction.
    #[command(subcommand)]
    Coverset(CoversetCommand),
    /// Run a baseline or oracle predictor over a split.
    Predict(PredictArgs),
    /// Score a predictions file against a split.
    Evaluate(EvaluateArgs),
    /// Generate a synthetic split.
    Synth(SynthArgs),
}

#[derive(Args)]
struct FitBezierArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Also write the fit as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PromptArgs {
    #[arg(long, value_enum, default_value_t = Variant::Bezier)]
    variant: Variant,
    #[arg(long = "in")]
    input: PathBuf,
    /// JSON lines, one prompt per instance.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = scenekit::prompting::DEFAULT_MAX_TOKENS)]
    max_tokens: usize,
    /// Lane sample spacing of the discretized variant, meters.
    #[arg(long, default_value_t = 1.0)]
    spacing: f64,
    /// Wordpiece vocabulary; falls back to $SCENEKIT_VOCAB, then to the heuristic counter.
    #[arg(long)]
    vocab: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Bezier,
    Discretized,
}

#[derive(Args)]
struct RasterArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Output directory, one image per instance.
    #[arg(long)]
    out: PathBuf,
    /// Write binary PPM instead of PNG.
    #[arg(long)]
    ppm: bool,
}

#[derive(Subcommand)]
enum CoversetCommand {
    /// Greedy ε-cover of the split's ground-truth futures.
    Build(CoversetBuildArgs),
}

#[derive(Args)]
struct CoversetBuildArgs {
    #[arg(long)]
    epsilon: f64,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Model {
    CvYaw,
    CvYawRate,
    CaYaw,
    CaYawRate,
    PhysicsOracle,
    NearestOracle,
}

impl Model {
    fn kinematic(self) -> Option<KinematicModelKind> {
        match self {
            Model::CvYaw => Some(KinematicModelKind::ConstVelocityYaw),
            Model::CvYawRate => Some(KinematicModelKind::ConstVelocityYawRate),
            Model::CaYaw => Some(KinematicModelKind::ConstAccelYaw),
            Model::CaYawRate => Some(KinematicModelKind::ConstAccelYawRate),
            Model::PhysicsOracle | Model::NearestOracle => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Model::CvYaw => "cv-yaw",
            Model::CvYawRate => "cv-yaw-rate",
            Model::CaYaw => "ca-yaw",
            Model::CaYawRate => "ca-yaw-rate",
            Model::PhysicsOracle => "physics-oracle",
            Model::NearestOracle => "nearest-oracle",
        }
    }
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long, value_enum)]
    model: Model,
    #[arg(long = "in")]
    input: PathBuf,
    /// Cover-set file. Kinematic models then rank its modes instead of
    /// emitting their raw rollout; required by the nearest-mode oracle.
    #[arg(long)]
    modes: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    predictions: PathBuf,
    #[arg(long)]
    split: PathBuf,
    /// Cover-set file that ranked mode indices refer to.
    #[arg(long)]
    modes: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_KS)]
    ks: Vec<usize>,
    /// Row label in the printed table.
    #[arg(long, default_value = "predictions")]
    label: String,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 50)]
    count: usize,
    #[arg(long, default_value_t = 40.0)]
    min_lane_length: f64,
    #[arg(long, default_value_t = 120.0)]
    max_lane_length: f64,
    /// Omit ground-truth futures.
    #[arg(long)]
    unlabeled: bool,
    #[arg(long)]
    out: PathBuf,
}

/// Runs `f` per instance in parallel, keeping input order, and reports the
/// first failure in input order.
fn per_instance<T, F>(instances: &[PredictionInstance], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&PredictionInstance) -> scenekit::Result<T> + Sync,
{
    let results: Vec<scenekit::Result<T>> =
        instances.par_iter().map(|inst| f(inst).map_err(|e| e.for_instance(&inst.instance_id))).collect();
    results.into_iter().collect::<scenekit::Result<_>>().map_err(Into::into)
}

fn load_split(path: &Path) -> Result<Vec<PredictionInstance>> {
    read_split(path).with_context(|| format!("reading split {}", path.display()))
}

fn load_modes(path: &Path) -> Result<TrajectorySet> {
    CoverSetFile::read(path).and_then(|f| f.to_set()).with_context(|| format!("reading cover set {}", path.display()))
}

fn read_polyline(path: &Path) -> Result<Vec<Point2>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut points = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
        let [x, y] = fields[..] else {
            bail!("{}:{}: expected two numbers, got {line:?}", path.display(), n + 1);
        };
        let parse =
            |s: &str| s.parse::<f64>().with_context(|| format!("{}:{}: bad number {s:?}", path.display(), n + 1));
        points.push(Point2::new(parse(x)?, parse(y)?));
    }
    Ok(points)
}

fn fit_bezier(args: &FitBezierArgs) -> Result<()> {
    let poly = read_polyline(&args.input)?;
    let curve = fit_lane(&poly)?;
    let mse = fit_error(&curve, &poly)?;
    let points = curve.control_points();
    let mut stdout = std::io::stdout().lock();
    for p in &points {
        writeln!(stdout, "{} {}", p.x, p.y)?;
    }
    writeln!(stdout, "mse {mse:e}")?;

    if let Some(out) = &args.out {
        #[derive(Serialize)]
        struct Fit {
            control_points: Vec<[f64; 2]>,
            mse: f64,
        }
        let fit = Fit { control_points: points.iter().map(|&p| p.into()).collect(), mse };
        fs::write(out, serde_json::to_string_pretty(&fit)? + "\n")?;
        RunManifest::new("fit-bezier", json!({})).input(&args.input)?.output(out)?.write_beside(out)?;
    }
    Ok(())
}

fn tokenizer(vocab: Option<&Path>) -> Result<(Box<dyn TokenCounter>, String)> {
    let path = vocab.map(Path::to_path_buf).or_else(|| std::env::var_os("SCENEKIT_VOCAB").map(PathBuf::from));
    Ok(match path {
        Some(p) => {
            let tok =
                WordPieceTokenizer::from_file(&p).with_context(|| format!("loading vocabulary {}", p.display()))?;
            (Box::new(tok), format!("wordpiece:{}", p.display()))
        }
        None => (Box::new(HeuristicTokenizer), "heuristic".to_string()),
    })
}

fn prompt(args: &PromptArgs) -> Result<()> {
    let variant = match args.variant {
        Variant::Bezier => PromptVariant::Bezier,
        Variant::Discretized => PromptVariant::Discretized,
    };
    let config = PromptConfig { variant, max_tokens: args.max_tokens, discretization_spacing: args.spacing };
    config.validate()?;
    let (tok, tok_name) = tokenizer(args.vocab.as_deref())?;
    let split = load_split(&args.input)?;
    let rendered = per_instance(&split, |inst| render_prompt(inst, &config, tok.as_ref()))?;

    #[derive(Serialize)]
    struct Line<'a> {
        instance_id: &'a str,
        text: &'a str,
        token_count: usize,
        truncated: bool,
    }
    let mut out = String::new();
    for (inst, r) in split.iter().zip(&rendered) {
        out.push_str(&serde_json::to_string(&Line {
            instance_id: &inst.instance_id,
            text: &r.text,
            token_count: r.token_count,
            truncated: r.truncated,
        })?);
        out.push('\n');
    }
    fs::write(&args.out, out).with_context(|| format!("writing {}", args.out.display()))?;

    let truncated = rendered.iter().filter(|r| r.truncated).count();
    eprintln!("{} prompts, {truncated} truncated", rendered.len());
    RunManifest::new(
        "prompt",
        json!({
            "variant": variant.as_str(),
            "max_tokens": config.max_tokens,
            "discretization_spacing": config.discretization_spacing,
            "tokenizer": tok_name,
        }),
    )
    .input(&args.input)?
    .output(&args.out)?
    .write_beside(&args.out)?;
    Ok(())
}

fn file_stem_for(instance_id: &str) -> String {
    instance_id.chars().map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' }).collect()
}

fn raster(args: &RasterArgs) -> Result<()> {
    let config = RasterConfig::default();
    let split = load_split(&args.input)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let ext = if args.ppm { "ppm" } else { "png" };
    let files = per_instance(&split, |inst| {
        let image = render(inst, &config)?;
        let bytes = if args.ppm { image.to_ppm() } else { image.to_png()? };
        let path = args.out.join(format!("{}.{ext}", file_stem_for(&inst.instance_id)));
        fs::write(&path, bytes)?;
        Ok(path)
    })?;
    let mut manifest = RunManifest::new("raster", json!({ "format": ext, "raster": serde_json::to_value(&config)? }))
        .input(&args.input)?;
    for f in &files {
        manifest = manifest.output(f)?;
    }
    manifest.write_beside(&args.out)?;
    Ok(())
}

fn coverset_build(args: &CoversetBuildArgs) -> Result<()> {
    let split = load_split(&args.input)?;
    let futures: Vec<_> = split.iter().filter_map(|i| i.ground_truth.clone()).collect();
    if futures.is_empty() {
        bail!("{} has no ground-truth futures to cover", args.input.display());
    }
    let base = TrajectorySet::new(futures)?;
    let cover = greedy_cover(&base, args.epsilon)?;
    CoverSetFile::from_cover(&cover, base.len())?.write(&args.out)?;
    eprintln!("{} base trajectories, {} modes at epsilon {}", base.len(), cover.len(), args.epsilon);
    RunManifest::new("coverset build", json!({ "epsilon": args.epsilon }))
        .input(&args.input)?
        .output(&args.out)?
        .write_beside(&args.out)?;
    Ok(())
}

fn predict(args: &PredictArgs) -> Result<()> {
    let split = load_split(&args.input)?;
    let modes = args.modes.as_deref().map(load_modes).transpose()?;
    let model = args.model;
    let records = per_instance(&split, |inst| {
        let id = inst.instance_id.as_str();
        match (model.kinematic(), &modes) {
            (Some(kind), None) => Ok(PredictionRecord::from_trajectory(id, &rollout_default(kind, &inst.agent)?)),
            (Some(kind), Some(set)) => {
                Ok(PredictionRecord::from_scores(id, &score_modes_physics(&inst.agent, set, kind)?))
            }
            (None, _) if model == Model::PhysicsOracle => {
                let choice = physics_oracle(&inst.agent, inst.ground_truth.as_ref())?;
                Ok(PredictionRecord::from_trajectory(id, &choice.trajectory))
            }
            (None, Some(set)) => {
                let gt = inst
                    .ground_truth
                    .as_ref()
                    .ok_or_else(|| scenekit::Error::InvalidInput("nearest-mode oracle needs ground truth".into()))?;
                Ok(PredictionRecord::from_scores(id, &score_modes_nearest_oracle(gt, set)?))
            }
            (None, None) => Err(scenekit::Error::InvalidInput("nearest-oracle requires --modes".into())),
        }
    })?;
    write_predictions(&args.out, &records)?;

    let mut manifest = RunManifest::new("predict", json!({ "model": model.name() })).input(&args.input)?;
    if let Some(m) = &args.modes {
        manifest = manifest.input(m)?;
    }
    manifest.output(&args.out)?.write_beside(&args.out)?;
    Ok(())
}

fn evaluate_cmd(args: &EvaluateArgs) -> Result<()> {
    let predictions = scenekit::predictors::read_predictions(&args.predictions)
        .with_context(|| format!("reading predictions {}", args.predictions.display()))?;
    let split = load_split(&args.split)?;
    let modes = args.modes.as_deref().map(load_modes).transpose()?;
    let report = evaluate(&predictions, &split, modes.as_ref(), &args.ks)?;
    fs::write(&args.out, serde_json::to_string_pretty(&report)? + "\n")
        .with_context(|| format!("writing {}", args.out.display()))?;
    print!("{}", report.to_table(&args.label));

    let mut manifest = RunManifest::new("evaluate", json!({ "ks": args.ks, "label": args.label }))
        .input(&args.predictions)?
        .input(&args.split)?;
    if let Some(m) = &args.modes {
        manifest = manifest.input(m)?;
    }
    manifest.output(&args.out)?.write_beside(&args.out)?;
    Ok(())
}

fn synth(args: &SynthArgs, seed: u64) -> Result<()> {
    let config = SyntheticConfig {
        lane_length: (args.min_lane_length, args.max_lane_length),
        with_ground_truth: !args.unlabeled,
        ..SyntheticConfig::default()
    };
    let split = generate_split(seed, args.count, &config)?;
    write_split(&args.out, &split)?;
    RunManifest::new(
        "synth",
        json!({
            "seed": seed,
            "count": args.count,
            "lane_length": [args.min_lane_length, args.max_lane_length],
            "with_ground_truth": !args.unlabeled,
        }),
    )
    .output(&args.out)?
    .write_beside(&args.out)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            bail!("--jobs must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    match &cli.command {
        Command::FitBezier(a) => fit_bezier(a),
        Command::Prompt(a) => prompt(a),
        Command::Raster(a) => raster(a),
        Command::Coverset(CoversetCommand::Build(a)) => coverset_build(a),
        Command::Predict(a) => predict(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Synth(a) => synth(a, cli.seed),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
