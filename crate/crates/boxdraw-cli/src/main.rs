//! Command-line toolkit for box drawing classifiers: train (fast or exact),
//! predict, run the cross-validated cost-sweep evaluation, export the MIP as
//! LP text, compute the generalization bound, generate synthetic benchmark
//! data, and print a model's rules.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use boxdraw::bounds::{generalization_bound, BoundInputs};
use boxdraw::data::{normalize, Dataset, Label};
use boxdraw::eval::{
    confusion, default_costs, evaluate_cv, generate_synthetic, rate_hull, CvReport, Shape,
};
use boxdraw::exactboxes::{
    build_mip, lp_string, objective_value, solve_exact_small, ExactBoxesConfig, Optimality,
};
use boxdraw::fastboxes::{train_fast_boxes, FastBoxesConfig};
use boxdraw::model::{denormalize_model, BoxModel};

#[derive(Parser)]
#[command(
    name = "boxdraw",
    version,
    about = "Box drawing classifiers for imbalanced binary classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and write it as JSON.
    Train(TrainArgs),
    /// Append a prediction column to a CSV file.
    Predict(PredictArgs),
    /// Cross-validated cost-sweep evaluation (AUH protocol).
    Eval(EvalArgs),
    /// Write the mixed-integer program as solver-neutral LP text.
    EmitLp(EmitLpArgs),
    /// Print the generalization bound for a grid-anchored model class.
    Bound(BoundArgs),
    /// Generate a synthetic 2-D benchmark dataset.
    Generate(GenerateArgs),
    /// Print a model as human-readable rules.
    Describe(DescribeArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TrainerKind {
    Fast,
    Exact,
}

#[derive(Args)]
struct DataOpts {
    /// Name of the label column.
    #[arg(long, default_value = "label")]
    label_column: String,
    /// Label value mapped to +1; every other value maps to -1.
    #[arg(long, default_value = "pos")]
    positive_label: String,
}

#[derive(Args)]
struct TrainerOpts {
    #[arg(long, value_enum, default_value_t = TrainerKind::Fast)]
    trainer: TrainerKind,
    /// Number of boxes (clusters).
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Fast trainer: majority-class weight in (0, 1].
    #[arg(long, default_value_t = 0.5)]
    c: f64,
    /// Exact trainer: majority-class weight in (0, 1].
    #[arg(long, default_value_t = 0.5)]
    ci: f64,
    /// Exact trainer: per-box regularization penalty.
    #[arg(long, default_value_t = 0.0)]
    ce: f64,
    /// Fast trainer: expansion regularizer of the boundary loss.
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    /// Fast trainer: gap kept to the nearest negative (default 0.01).
    /// Exact trainer: strict-inequality constant of the MIP (default 1e-6).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Exact trainer: margin v of the indicator constraints.
    #[arg(long, default_value_t = 1e-4)]
    margin: f64,
    /// Seed behind all randomness (clustering, folds).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Node budget of the built-in exact solver.
    #[arg(long, default_value_t = 10_000_000)]
    budget: u64,
}

impl TrainerOpts {
    fn fast_config(&self) -> FastBoxesConfig {
        FastBoxesConfig {
            k: self.k,
            c: self.c,
            beta: self.beta,
            epsilon_expand: self.epsilon.unwrap_or(0.01),
            kmeans_seed: self.seed,
            ..FastBoxesConfig::default()
        }
    }

    fn exact_config(&self) -> ExactBoxesConfig {
        ExactBoxesConfig {
            k: self.k,
            c_i: self.ci,
            c_e: self.ce,
            margin: self.margin,
            eps_strict: self.epsilon.unwrap_or(1e-6),
            ..ExactBoxesConfig::default()
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    /// Training data CSV.
    data: PathBuf,
    /// Output path for the model JSON.
    model_out: PathBuf,
    #[command(flatten)]
    data_opts: DataOpts,
    #[command(flatten)]
    trainer_opts: TrainerOpts,
}

#[derive(Args)]
struct PredictArgs {
    /// Model JSON produced by `train`.
    model: PathBuf,
    /// Input CSV; feature columns are matched to the model by name, other
    /// columns pass through untouched.
    data: PathBuf,
    /// Output CSV (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Dataset CSV.
    data: PathBuf,
    /// Report JSON path; a points CSV and a hull CSV are written next to it.
    #[arg(long, default_value = "report.json")]
    out: PathBuf,
    /// Number of cross-validation folds.
    #[arg(long, default_value_t = 10)]
    folds: usize,
    /// Comma-separated majority-class weights (default 0.1,0.2,...,1.0).
    #[arg(long)]
    costs: Option<String>,
    #[command(flatten)]
    data_opts: DataOpts,
    #[command(flatten)]
    trainer_opts: TrainerOpts,
}

#[derive(Args)]
struct EmitLpArgs {
    /// Dataset CSV; features are normalized to [-1, 1] before the program is
    /// built, so boundary variables are in normalized units.
    data: PathBuf,
    /// Output path for the LP text.
    #[arg(long)]
    out: PathBuf,
    /// Refuse to materialize programs with m*n*k beyond this cap.
    #[arg(long, default_value_t = 200_000)]
    cap: usize,
    #[command(flatten)]
    data_opts: DataOpts,
    #[command(flatten)]
    trainer_opts: TrainerOpts,
}

#[derive(Args)]
struct BoundArgs {
    /// Number of boxes.
    #[arg(long)]
    k: usize,
    /// Sample count.
    #[arg(long)]
    m: usize,
    /// Confidence parameter in (0, 1].
    #[arg(long)]
    delta: f64,
    /// Comma-separated per-dimension grid sizes, e.g. 10,10,10.
    #[arg(long)]
    grid: String,
}

#[derive(Args)]
struct GenerateArgs {
    /// Positive-region shape: square, corner, diamond, or castle.
    #[arg(long)]
    shape: String,
    /// Total number of examples.
    #[arg(long)]
    m: usize,
    /// Imbalance ratio |negatives| / |positives|.
    #[arg(long, default_value_t = 9.0)]
    ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DescribeArgs {
    /// Model JSON produced by `train`.
    model: PathBuf,
}

enum CliError {
    Usage(String),
    Internal(String),
}

impl From<boxdraw::Error> for CliError {
    fn from(e: boxdraw::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

type CliResult = Result<(), CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Eval(args) => cmd_eval(args),
        Command::EmitLp(args) => cmd_emit_lp(args),
        Command::Bound(args) => cmd_bound(args),
        Command::Generate(args) => cmd_generate(args),
        Command::Describe(args) => cmd_describe(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(1)
        }
    }
}

/// Writes through a temporary file in the same directory so failures leave no
/// partial output behind.
fn write_atomic(path: &Path, contents: &str) -> CliResult {
    let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    std::fs::write(&tmp, contents)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::Usage(format!("cannot move output into {}: {e}", path.display())))
}

fn parse_costs(raw: &Option<String>) -> Result<Vec<f64>, CliError> {
    match raw {
        None => Ok(default_costs()),
        Some(text) => text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Usage(format!("cost {s:?} is not a number")))
            })
            .collect(),
    }
}

fn load_data(path: &Path, opts: &DataOpts) -> Result<Dataset, CliError> {
    Ok(Dataset::load_csv(
        path,
        &opts.label_column,
        &opts.positive_label,
    )?)
}

fn train_model(data: &Dataset, opts: &TrainerOpts) -> Result<(BoxModel, f64), CliError> {
    match opts.trainer {
        TrainerKind::Fast => {
            let model = train_fast_boxes(data, &opts.fast_config())?;
            let objective = objective_value(&model, data, opts.c, 0.0)?;
            Ok((model, objective))
        }
        TrainerKind::Exact => {
            let (ndata, params) = normalize(data)?;
            let solution = solve_exact_small(&ndata, &opts.exact_config(), opts.budget)?;
            let status = match solution.optimality {
                Optimality::ProvenOptimal => "proven optimal",
                Optimality::Incumbent => "incumbent (budget exhausted)",
            };
            println!(
                "solver: {status}, {} nodes explored",
                solution.nodes_explored
            );
            let model = denormalize_model(&solution.model, &params)?;
            let objective = objective_value(&model, data, opts.ci, opts.ce)?;
            Ok((model, objective))
        }
    }
}

fn cmd_train(args: TrainArgs) -> CliResult {
    let data = load_data(&args.data, &args.data_opts)?;
    let (model, objective) = train_model(&data, &args.trainer_opts)?;
    write_atomic(&args.model_out, &model.to_json())?;
    let counts = confusion(&model, &data)?;
    let positives = counts.tp + counts.fn_;
    let negatives = counts.fp + counts.tn;
    println!("boxes: {}", model.num_boxes());
    println!(
        "training accuracy positive: {:.6} ({}/{})",
        counts.tp as f64 / positives.max(1) as f64,
        counts.tp,
        positives
    );
    println!(
        "training accuracy negative: {:.6} ({}/{})",
        counts.tn as f64 / negatives.max(1) as f64,
        counts.tn,
        negatives
    );
    println!("objective: {objective}");
    println!("model: {}", args.model_out.display());
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> CliResult {
    let model = BoxModel::load(&args.model)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(&args.data)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", args.data.display())))?;
    let header = reader
        .headers()
        .map_err(|e| CliError::Usage(e.to_string()))?
        .clone();
    let columns: Vec<usize> = model
        .feature_names()
        .iter()
        .map(|name| {
            header.iter().position(|h| h == name).ok_or_else(|| {
                CliError::Usage(format!("feature {name:?} is missing from the input"))
            })
        })
        .collect::<Result<_, _>>()?;

    let mut out = String::new();
    let mut write_row = |cells: &mut dyn Iterator<Item = &str>| {
        let mut first = true;
        for cell in cells {
            if !first {
                out.push(',');
            }
            let quoted = cell.contains(',') || cell.contains('"') || cell.contains('\n');
            if quoted {
                out.push('"');
                out.push_str(&cell.replace('"', "\"\""));
                out.push('"');
            } else {
                out.push_str(cell);
            }
            first = false;
        }
        out.push('\n');
    };
    write_row(&mut header.iter().chain(std::iter::once("prediction")));

    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Usage(e.to_string()))?;
        let x: Vec<f64> = columns
            .iter()
            .map(|&j| {
                record[j].trim().parse::<f64>().map_err(|_| {
                    CliError::Usage(format!(
                        "cell at row {row}, column {:?} does not parse as a number: {:?}",
                        header[j].to_string(),
                        &record[j]
                    ))
                })
            })
            .collect::<Result<_, _>>()?;
        let label = model.predict(&x)?;
        let label_text = label.to_i8().to_string();
        write_row(&mut record.iter().chain(std::iter::once(label_text.as_str())));
    }

    match &args.out {
        Some(path) => write_atomic(path, &out),
        None => {
            print!("{out}");
            Ok(())
        }
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".to_string());
    path.with_file_name(format!("{stem}{suffix}"))
}

fn points_csv(report: &CvReport) -> String {
    let mut out = String::from("fold,cost,tp,fp,tn,fn\n");
    for fold in &report.folds {
        for p in &fold.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                fold.fold, p.cost, p.tp, p.fp, p.tn, p.fn_
            );
        }
    }
    out
}

fn pooled_hull_csv(report: &CvReport) -> String {
    let rates: Vec<(f64, f64)> = report
        .folds
        .iter()
        .flat_map(|f| f.points.iter().map(|p| (p.fpr(), p.tpr())))
        .collect();
    let hull = rate_hull(&rates);
    let mut out = String::from("fpr,tpr\n");
    for (x, y) in hull.hull {
        let _ = writeln!(out, "{x},{y}");
    }
    out
}

fn cmd_eval(args: EvalArgs) -> CliResult {
    let data = load_data(&args.data, &args.data_opts)?;
    let costs = parse_costs(&args.costs)?;
    let opts = &args.trainer_opts;
    let report = match opts.trainer {
        TrainerKind::Fast => {
            let trainer = |d: &Dataset, cost: f64| {
                let mut config = opts.fast_config();
                config.c = cost;
                train_fast_boxes(d, &config)
            };
            evaluate_cv(&data, &trainer, &costs, args.folds, opts.seed)?
        }
        TrainerKind::Exact => {
            let trainer = |d: &Dataset, cost: f64| {
                let mut config = opts.exact_config();
                config.c_i = cost;
                let (ndata, params) = normalize(d)?;
                let solution = solve_exact_small(&ndata, &config, opts.budget)?;
                denormalize_model(&solution.model, &params)
            };
            evaluate_cv(&data, &trainer, &costs, args.folds, opts.seed)?
        }
    };

    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Internal(format!("report serialization failed: {e}")))?;
    write_atomic(&args.out, &json)?;
    let points_path = sibling(&args.out, ".points.csv");
    write_atomic(&points_path, &points_csv(&report))?;
    let hull_path = sibling(&args.out, ".hull.csv");
    write_atomic(&hull_path, &pooled_hull_csv(&report))?;

    println!("folds: {}", report.folds.len());
    println!("mean AUH: {}", report.mean_auh);
    println!("std AUH: {}", report.std_auh);
    println!("trivial fraction: {}", report.trivial_fraction);
    println!("report: {}", args.out.display());
    println!("points: {}", points_path.display());
    println!("hull: {}", hull_path.display());
    Ok(())
}

fn cmd_emit_lp(args: EmitLpArgs) -> CliResult {
    let data = load_data(&args.data, &args.data_opts)?;
    let size = data.len() * data.n_features() * args.trainer_opts.k;
    if size > args.cap {
        return Err(CliError::Usage(format!(
            "program size m*n*k = {size} exceeds the cap {}; raise --cap to force",
            args.cap
        )));
    }
    let (ndata, _) = normalize(&data)?;
    let mip = build_mip(&ndata, &args.trainer_opts.exact_config())?;
    write_atomic(&args.out, &lp_string(&mip))?;
    println!(
        "variables: {} ({} continuous, {} binary)",
        mip.variables.len(),
        mip.count_continuous(),
        mip.count_binary()
    );
    println!("constraints: {}", mip.constraints.len());
    println!("lp: {}", args.out.display());
    Ok(())
}

fn cmd_bound(args: BoundArgs) -> CliResult {
    let grid_sizes: Vec<u64> = args
        .grid
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| CliError::Usage(format!("grid size {s:?} is not an integer")))
        })
        .collect::<Result<_, _>>()?;
    let bound = generalization_bound(&BoundInputs {
        k: args.k,
        grid_sizes,
        m: args.m,
        delta: args.delta,
    })?;
    if bound.clamped {
        eprintln!(
            "warning: the model-counting term is negative; the bound is vacuous and reported as 0"
        );
    }
    println!("{}", bound.value);
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> CliResult {
    let shape: Shape = args.shape.parse()?;
    let data = generate_synthetic(shape, args.m, args.ratio, args.seed)?;
    let mut out = String::from("x1,x2,label\n");
    for (x, &label) in data.rows().zip(data.labels()) {
        let tag = if label == Label::Pos { "pos" } else { "neg" };
        let _ = writeln!(out, "{},{},{tag}", x[0], x[1]);
    }
    write_atomic(&args.out, &out)?;
    println!(
        "wrote {} rows ({} positive, {} negative) to {}",
        data.len(),
        data.count_positives(),
        data.count_negatives(),
        args.out.display()
    );
    Ok(())
}

fn cmd_describe(args: DescribeArgs) -> CliResult {
    let model = BoxModel::load(&args.model)?;
    println!("{}", model.describe());
    Ok(())
}
