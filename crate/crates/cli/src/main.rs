use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mlclust::io::{
    cover_json, parse_collection_json, parse_cover_json, parse_partition_json, partition_json,
    read_matrix_csv, read_score_csv, trace_json, Labels,
};
use mlclust::lattice::lattice_check;
use mlclust::oracle::{brute_force_report, corollary_check, random_quadratic, CHECK_CAPACITY};
use mlclust::{
    embed_partition, global_score, init_restricted, init_score_proportional, init_uniform,
    is_local_maximizer, local_search, outlier_violations, score_contributions,
    similarity_from_distances, validate, ClusterScore, Error, FuzzyCover, InitMode, Normalization,
    Partition, QuadraticScore, Score, ScoreFunction, SearchTrace, SimilarityMatrix, SolverOptions,
    Subset,
};

#[derive(Parser)]
#[command(
    name = "mlclust",
    version,
    about = "Clustering by multilinear extension of cluster scores"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster the input and certify the result as a local maximizer.
    Cluster(ClusterArgs),
    /// Score a partition or fuzzy cover.
    Score(ScoreArgs),
    /// Compare against the brute-force optimum and sampled covers.
    Oracle(OracleArgs),
    /// Verify the partition-lattice identities for one n.
    LatticeCheck(LatticeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Similarity,
    Distance,
    /// A set function: `subset,value` rows.
    Score,
}

#[derive(Clone, Copy, ValueEnum)]
enum Normalize {
    /// Divide distances by the largest one.
    Max,
    /// Distances already lie in [0, 1].
    None,
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "similarity")]
    kind: Kind,
    #[arg(long, value_enum, default_value = "max")]
    normalize: Normalize,
    /// Refuse inputs with more points than this.
    #[arg(long)]
    max_n: Option<usize>,
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    input: InputArgs,
    /// uniform, score, or restricted:<path>.
    #[arg(long, default_value = "uniform")]
    init: String,
    /// Collection of maximal blocks (JSON list of label lists) bounding the
    /// initial support.
    #[arg(long)]
    restrict: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Record every candidate block's score in the trace.
    #[arg(long)]
    trace: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ScoreArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, conflicts_with = "cover", required_unless_present = "cover")]
    partition: Option<PathBuf>,
    #[arg(long)]
    cover: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, conflicts_with = "random", required_unless_present = "random")]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "similarity")]
    kind: Kind,
    #[arg(long, value_enum, default_value = "max")]
    normalize: Normalize,
    /// Use a random similarity matrix on this many points.
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    max_n: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct LatticeArgs {
    n: usize,
    /// Random set functions per check.
    #[arg(long, default_value_t = 50)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

enum Failure {
    Validation(String),
    Capacity(String),
    Invariant(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Capacity { .. } => Failure::Capacity(e.to_string()),
            Error::IterationGuard { .. } => Failure::Invariant(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

fn emit(value: &Value, output: Option<&Path>) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    match output {
        Some(p) => {
            fs::write(p, text).map_err(|e| Failure::Validation(format!("{}: {e}", p.display())))
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Validation(e.to_string())),
    }
}

fn load(
    path: &Path,
    kind: Kind,
    normalize: Normalize,
    max_n: Option<usize>,
) -> Result<(Score, Labels), Failure> {
    let text = read(path)?;
    let (score, labels) = match kind {
        Kind::Score => {
            let (v, labels) = read_score_csv(text.as_bytes())?;
            (Score::from(v), labels)
        }
        Kind::Similarity | Kind::Distance => {
            let (rows, labels) = read_matrix_csv(text.as_bytes())?;
            let s = match kind {
                Kind::Distance => {
                    let mode = match normalize {
                        Normalize::Max => Normalization::MaxNormalize,
                        Normalize::None => Normalization::AlreadyNormalized,
                    };
                    similarity_from_distances(&rows, mode)?
                }
                _ => SimilarityMatrix::from_rows(&rows)?,
            };
            (matrix_score(&s)?, labels)
        }
    };
    if let Some(limit) = max_n {
        if score.n() > limit {
            return Err(Error::Capacity {
                what: "input (--max-n)",
                n: score.n(),
                limit,
            }
            .into());
        }
    }
    Ok((score, labels))
}

// A single point has no pairs to compare; its score is 0.
fn matrix_score(s: &SimilarityMatrix) -> Result<Score, Error> {
    if s.n() == 1 {
        return Ok(ScoreFunction::from_values(1, vec![0.0, 0.0])?.into());
    }
    Ok(QuadraticScore::from_similarity(s)?.into())
}

fn initial_cover(
    score: &Score,
    labels: &Labels,
    init: &str,
    restrict: Option<&Path>,
) -> Result<FuzzyCover, Failure> {
    let collection = |p: &Path| -> Result<Vec<Subset>, Failure> {
        Ok(parse_collection_json(&read(p)?, labels)?)
    };
    let n = score.n();
    let cover = match (init, restrict) {
        ("uniform", None) => init_uniform(n)?,
        ("score", None) => init_score_proportional(score)?,
        ("uniform", Some(p)) => init_restricted(score, &collection(p)?, InitMode::Uniform)?,
        ("score", Some(p)) => init_restricted(score, &collection(p)?, InitMode::ScoreProportional)?,
        (other, None) => match other.strip_prefix("restricted:") {
            Some(p) => init_restricted(score, &collection(Path::new(p))?, InitMode::Uniform)?,
            None => {
                return Err(Failure::Validation(format!(
                    "unknown initializer {other:?}; expected uniform, score or restricted:<path>"
                )))
            }
        },
        (_, Some(_)) => {
            return Err(Failure::Validation(
                "--restrict combines with --init uniform or --init score only".into(),
            ))
        }
    };
    Ok(cover)
}

fn certify(score: &Score, p: &Partition, tol: f64) -> Result<bool, Failure> {
    Ok(is_local_maximizer(score, &embed_partition(p), tol)?
        && outlier_violations(score, p, tol)?.is_empty())
}

fn cmd_cluster(args: &ClusterArgs) -> Outcome {
    let inp = &args.input;
    let (score, labels) = load(&inp.input, inp.kind, inp.normalize, inp.max_n)?;
    let options = SolverOptions {
        tolerance: args.tol,
        record_trace: args.trace,
        ..SolverOptions::default()
    };
    options.check(score.n())?;

    let (partition, trace) = if score.n() == 1 {
        (Partition::finest(1), SearchTrace::default())
    } else {
        let cover = initial_cover(&score, &labels, &args.init, args.restrict.as_deref())?;
        local_search(&score, &cover, &options)?
    };
    let certified = certify(&score, &partition, args.tol)?;
    let out = json!({
        "partition": partition_json(&partition, &labels),
        "score": partition.value(&score),
        "certified_local_max": certified,
        "trace": trace_json(&trace, &labels),
    });
    emit(&out, args.output.as_deref())?;
    if !certified {
        return Err(Failure::Invariant(
            "local search output failed local-maximizer certification".into(),
        ));
    }
    Ok(())
}

fn cmd_score(args: &ScoreArgs) -> Outcome {
    let inp = &args.input;
    let (score, labels) = load(&inp.input, inp.kind, inp.normalize, inp.max_n)?;
    let out = if let Some(path) = &args.partition {
        let p = parse_partition_json(&read(path)?, &labels)?;
        let blocks: Vec<Value> = p
            .blocks()
            .iter()
            .map(|&b| json!({"block": labels.subset_json(b), "value": score.value(b)}))
            .collect();
        json!({
            "score": p.value(&score),
            "contributions": blocks,
            "support_condition": true,
        })
    } else {
        let path = args
            .cover
            .as_ref()
            .expect("clap requires --partition or --cover");
        let draft = parse_cover_json(&read(path)?, &labels)?;
        let diag = validate(&draft);
        if !diag.valid {
            return Err(Failure::Validation(format!(
                "invalid cover: {}",
                diag.issues.join("; ")
            )));
        }
        let cover = FuzzyCover::new(&draft)?;
        let contributions: Vec<Value> = score_contributions(&score, &cover)?
            .into_iter()
            .map(|(a, v)| json!({"subset": labels.subset_json(a), "value": v}))
            .collect();
        json!({
            "score": global_score(&score, &cover)?,
            "contributions": contributions,
            "support_condition": diag.support_exact_pruned,
            "support_condition_raw": diag.support_exact_raw,
            "cover": cover_json(&cover, &labels),
        })
    };
    emit(&out, args.output.as_deref())?;
    Ok(())
}

fn cmd_oracle(args: &OracleArgs) -> Outcome {
    let (score, labels) = match (&args.input, args.random) {
        (Some(path), _) => load(path, args.kind, args.normalize, args.max_n)?,
        (None, Some(n)) => {
            if let Some(limit) = args.max_n.filter(|&m| n > m) {
                return Err(Error::Capacity {
                    what: "input (--max-n)",
                    n,
                    limit,
                }
                .into());
            }
            (random_quadratic(n, args.seed)?.into(), Labels::numbered(n))
        }
        (None, None) => unreachable!("clap requires --input or --random"),
    };
    let report = if score.n() > CHECK_CAPACITY && args.samples == 0 {
        brute_force_report(&score)?
    } else {
        corollary_check(&score, args.samples, args.seed)?
    };
    let passed = report.passed();
    let mut out = serde_json::to_value(&report).expect("reports serialize");
    out["best_partition"] = report
        .best_partition
        .iter()
        .map(|b| b.iter().map(|&i| labels.json(i - 1)).collect::<Value>())
        .collect();
    emit(&out, args.output.as_deref())?;
    if !passed {
        return Err(Failure::Invariant("oracle check found violations".into()));
    }
    Ok(())
}

fn cmd_lattice(args: &LatticeArgs) -> Outcome {
    let report = lattice_check(args.n, args.samples, args.seed)?;
    let passed = report.passed;
    emit(
        &serde_json::to_value(&report).expect("reports serialize"),
        args.output.as_deref(),
    )?;
    if !passed {
        return Err(Failure::Invariant("lattice check failed".into()));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Cluster(a) => cmd_cluster(a),
        Command::Score(a) => cmd_score(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::LatticeCheck(a) => cmd_lattice(a),
    };
    match outcome {
        Ok(_) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Capacity(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Invariant(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
