//! Command-line pipeline: synthesize, estimate, equalize, verify, audit.
//!
//! Exit codes are a stable contract for scripting:
//! 0 success, 1 verification failure, 2 input error, 3 infeasibility.
//! Every output artifact embeds the run manifest as `#` comment lines, so a
//! rerun with the same arguments reproduces identical bytes.

use clap::{Parser, Subcommand};
use outcome_equal::{
    audit::audit,
    equalize::{
        information_cost, outcome_equalize, verify_insensitivity, verify_scoped_insensitivity,
        ScopeSpec,
    },
    error::Error,
    estimate::{estimate_joint, load_csv, write_csv, SmoothingSpec},
    format::{
        parse_joint, parse_schema_config, parse_synth_config, write_joint, write_schema_config,
    },
    oracle::brute_force_project,
    synth::{ground_truth_joint, sample},
    ThresholdPolicy, VERSION,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "outcome-equal",
    version,
    about = "Remove outcome/protected-attribute correlation from discrete joint distributions \
             with minimal loss of predictive information"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset from a generative-chain config; writes
    /// <output>.csv, <output>.schema, and <output>.joint (ground truth).
    Synth {
        /// Synthesis config file.
        #[arg(long)]
        input: PathBuf,
        /// Output path prefix.
        #[arg(long)]
        output: PathBuf,
        /// Overrides the seed declared in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Estimate a joint distribution from CSV records.
    Estimate {
        /// CSV file with one row per individual.
        #[arg(long)]
        input: PathBuf,
        /// Schema config declaring variables, roles, and levels.
        #[arg(long)]
        schema: PathBuf,
        /// Output joint-distribution file.
        #[arg(long)]
        output: PathBuf,
        /// Pseudo-count added to every cell (default 0: relative
        /// frequencies, empty cells reported loudly).
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Project a joint distribution onto the insensitivity constraint.
    Equalize {
        /// Joint-distribution file, or a CSV when --schema is given.
        #[arg(long)]
        input: PathBuf,
        /// Schema config; presence switches --input to CSV estimation mode.
        #[arg(long)]
        schema: Option<PathBuf>,
        /// Output joint-distribution file.
        #[arg(long)]
        output: PathBuf,
        /// Pseudo-count for the estimation step. Must be given explicitly
        /// (even as 0) when the estimated table has empty cells.
        #[arg(long)]
        alpha: Option<f64>,
        /// Protected variable(s) whose cells are exempted and equalized
        /// internally; repeat the flag for several.
        #[arg(long)]
        scope: Vec<String>,
        /// Tolerance for the post-hoc verification printout.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Also run the brute-force minimizer and print the largest cell
        /// disagreement with the closed form.
        #[arg(long)]
        oracle: bool,
        /// Dirichlet starts per slice for the oracle.
        #[arg(long, default_value_t = 64)]
        samples: usize,
        /// Coordinate-descent sweeps for the oracle.
        #[arg(long, default_value_t = 200)]
        iterations: usize,
        /// Seed for the oracle's generator.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check the insensitivity constraint; exit 0 iff it holds at --tol.
    Verify {
        /// Joint-distribution file.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Compare a distribution with its adjusted counterpart.
    Audit {
        /// Original joint-distribution file.
        #[arg(long)]
        input: PathBuf,
        /// Adjusted joint-distribution file.
        #[arg(long)]
        equalized: PathBuf,
        /// Outcome level targeted by the threshold policy.
        #[arg(long, requires = "tau")]
        target: Option<String>,
        /// Allocation threshold in [0, 1].
        #[arg(long, requires = "target")]
        tau: Option<f64>,
        /// Write the machine-readable report here as well.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Manifest lines embedded as comments in every output artifact.
struct Manifest {
    lines: Vec<String>,
}

impl Manifest {
    fn new(subcommand: &str) -> Self {
        Manifest {
            lines: vec![
                format!("manifest tool: outcome-equal {VERSION}"),
                format!("manifest subcommand: {subcommand}"),
            ],
        }
    }

    fn field(&mut self, key: &str, value: impl std::fmt::Display) {
        self.lines.push(format!("manifest {key}: {value}"));
    }

    fn path(&mut self, key: &str, value: &Path) {
        self.field(key, value.display());
    }

    fn comments(&self) -> &[String] {
        &self.lines
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Infeasible(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Synth { input, output, seed } => cmd_synth(&input, &output, seed),
        Command::Estimate {
            input,
            schema,
            output,
            alpha,
        } => cmd_estimate(&input, &schema, &output, alpha),
        Command::Equalize {
            input,
            schema,
            output,
            alpha,
            scope,
            tol,
            oracle,
            samples,
            iterations,
            seed,
        } => cmd_equalize(EqualizeArgs {
            input,
            schema,
            output,
            alpha,
            scope,
            tol,
            oracle,
            samples,
            iterations,
            seed,
        }),
        Command::Verify { input, tol } => cmd_verify(&input, tol),
        Command::Audit {
            input,
            equalized,
            target,
            tau,
            output,
        } => cmd_audit(&input, &equalized, target, tau, output.as_deref()),
    }
}

fn check_tol(tol: f64) -> Result<(), Error> {
    if !(tol > 0.0) {
        return Err(Error::Parse {
            line: 0,
            message: format!("--tol must be strictly positive, got {tol}"),
        });
    }
    Ok(())
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse {
        line: 0,
        message: format!("cannot read {}: {e}", path.display()),
    })
}

fn cmd_synth(input: &Path, output: &Path, seed: Option<u64>) -> Result<ExitCode, Error> {
    let mut config = parse_synth_config(&read(input)?)?;
    if let Some(seed) = seed {
        config = config.with_seed(seed);
    }

    let csv_path = with_suffix(output, "csv");
    let schema_path = with_suffix(output, "schema");
    let joint_path = with_suffix(output, "joint");

    let mut manifest = Manifest::new("synth");
    manifest.path("input", input);
    manifest.path("output csv", &csv_path);
    manifest.path("output schema", &schema_path);
    manifest.path("output joint", &joint_path);
    manifest.field("param samples", config.sample_count());
    manifest.field("seed", config.seed());

    // Everything is rendered before anything is written: a config error
    // never leaves partial files behind.
    let truth = ground_truth_joint(&config)?;
    let data = sample(&config)?;
    let csv_text = write_csv(&data, manifest.comments());
    let schema_text = write_schema_config(config.schema(), manifest.comments());
    let joint_text = write_joint(&truth, manifest.comments());

    std::fs::write(&csv_path, csv_text)?;
    std::fs::write(&schema_path, schema_text)?;
    std::fs::write(&joint_path, joint_text)?;
    println!(
        "wrote {} records to {}, schema to {}, ground-truth joint to {}",
        data.len(),
        csv_path.display(),
        schema_path.display(),
        joint_path.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn with_suffix(prefix: &Path, ext: &str) -> PathBuf {
    let mut name = prefix.file_name().unwrap_or_default().to_os_string();
    name.push(".");
    name.push(ext);
    prefix.with_file_name(name)
}

fn cmd_estimate(
    input: &Path,
    schema_path: &Path,
    output: &Path,
    alpha: Option<f64>,
) -> Result<ExitCode, Error> {
    let schema = parse_schema_config(&read(schema_path)?)?;
    let data = load_csv(input, &schema)?;
    let smoothing = SmoothingSpec::new(alpha.unwrap_or(0.0))?;
    let (dist, diag) = estimate_joint(&data, &smoothing)?;
    warn_empty_cells(&diag.empty_cell_labels);

    let mut manifest = Manifest::new("estimate");
    manifest.path("input", input);
    manifest.path("schema", schema_path);
    manifest.path("output", output);
    manifest.field("param alpha", smoothing.alpha());
    manifest.field("records", diag.record_count);
    manifest.field("empty cells", diag.empty_cells);

    std::fs::write(output, write_joint(&dist, manifest.comments()))?;
    println!(
        "estimated {} cells from {} records (empty cells: {}, effective sample size: {})",
        dist.probabilities().len(),
        diag.record_count,
        diag.empty_cells,
        diag.effective_sample_size
    );
    println!("wrote {}", output.display());
    Ok(ExitCode::SUCCESS)
}

fn warn_empty_cells(labels: &[String]) {
    if labels.is_empty() {
        return;
    }
    eprintln!(
        "warning: {} cell(s) have zero observations and estimate to exactly zero:",
        labels.len()
    );
    for l in labels.iter().take(10) {
        eprintln!("warning:   {l}");
    }
    if labels.len() > 10 {
        eprintln!("warning:   ... and {} more", labels.len() - 10);
    }
    eprintln!(
        "warning: zero cells may make equalization infeasible; smooth with --alpha > 0 \
         only if these zeros are sampling artifacts, not structural"
    );
}

struct EqualizeArgs {
    input: PathBuf,
    schema: Option<PathBuf>,
    output: PathBuf,
    alpha: Option<f64>,
    scope: Vec<String>,
    tol: f64,
    oracle: bool,
    samples: usize,
    iterations: usize,
    seed: u64,
}

fn cmd_equalize(args: EqualizeArgs) -> Result<ExitCode, Error> {
    check_tol(args.tol)?;
    let dist = match &args.schema {
        None => parse_joint(&read(&args.input)?)?,
        Some(schema_path) => {
            let schema = parse_schema_config(&read(schema_path)?)?;
            let data = load_csv(&args.input, &schema)?;
            let smoothing = SmoothingSpec::new(args.alpha.unwrap_or(0.0))?;
            let (dist, diag) = estimate_joint(&data, &smoothing)?;
            if diag.empty_cells > 0 && args.alpha.is_none() {
                warn_empty_cells(&diag.empty_cell_labels);
                eprintln!(
                    "error: the estimated table has {} empty cell(s) and no --alpha was \
                     given; pass --alpha 0 to keep them as structural zeros (equalization \
                     may then require --scope) or --alpha > 0 to smooth them away",
                    diag.empty_cells
                );
                return Ok(ExitCode::from(3));
            }
            warn_empty_cells(&diag.empty_cell_labels);
            dist
        }
    };

    let scope = (!args.scope.is_empty()).then(|| ScopeSpec::new(args.scope.iter().cloned()));
    if args.oracle && scope.is_some() {
        return Err(Error::Parse {
            line: 0,
            message: "--oracle checks the unscoped projection; drop --scope to use it".into(),
        });
    }

    let equalized = outcome_equalize(&dist, scope.as_ref())?;

    let check = verify_insensitivity(&equalized, args.tol);
    println!(
        "max insensitivity violation: {:.9e}{}",
        check.max_violation,
        if scope.is_some() {
            " (global; scoped runs equalize within scope cells only)"
        } else {
            ""
        }
    );
    if let Some(scope) = &scope {
        for (label, cell_check) in verify_scoped_insensitivity(&equalized, scope, args.tol)? {
            match cell_check {
                Some(c) => println!(
                    "scope cell {label}: max violation {:.9e} ({})",
                    c.max_violation,
                    if c.pass { "pass" } else { "FAIL" }
                ),
                None => println!("scope cell {label}: no mass"),
            }
        }
    }
    let cost = information_cost(&dist, &equalized)?;
    println!("information cost: {cost:.9e} nats");

    if args.oracle {
        let reference = brute_force_project(&dist, args.iterations, args.samples, args.seed)?;
        let disagreement = equalized
            .probabilities()
            .iter()
            .zip(reference.probabilities())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        println!("oracle max cell disagreement: {disagreement:.9e}");
    }

    let mut manifest = Manifest::new("equalize");
    manifest.path("input", &args.input);
    if let Some(schema_path) = &args.schema {
        manifest.path("schema", schema_path);
        manifest.field("param alpha", args.alpha.unwrap_or(0.0));
    }
    manifest.path("output", &args.output);
    if let Some(scope) = &scope {
        manifest.field("param scope", scope.names().join(", "));
    }
    manifest.field("param tol", args.tol);
    if args.oracle {
        manifest.field("param samples", args.samples);
        manifest.field("param iterations", args.iterations);
        manifest.field("seed", args.seed);
    }
    std::fs::write(&args.output, write_joint(&equalized, manifest.comments()))?;
    println!("wrote {}", args.output.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(input: &Path, tol: f64) -> Result<ExitCode, Error> {
    check_tol(tol)?;
    let dist = parse_joint(&read(input)?)?;
    let check = verify_insensitivity(&dist, tol);
    println!(
        "max insensitivity violation: {:.9e} at ({}, {}) with tol {:.3e}: {}",
        check.max_violation,
        check.worst_outcome,
        check.worst_group,
        check.tol,
        if check.pass { "PASS" } else { "FAIL" }
    );
    Ok(if check.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_audit(
    input: &Path,
    equalized_path: &Path,
    target: Option<String>,
    tau: Option<f64>,
    output: Option<&Path>,
) -> Result<ExitCode, Error> {
    let original = parse_joint(&read(input)?)?;
    let equalized = parse_joint(&read(equalized_path)?)?;
    let policy = match (target, tau) {
        (Some(t), Some(tau)) => Some(ThresholdPolicy::new(t, tau)?),
        _ => None,
    };
    let report = audit(&original, &equalized, policy.as_ref())?;
    print!("{}", report.to_human_text());

    if let Some(out) = output {
        let mut manifest = Manifest::new("audit");
        manifest.path("input", input);
        manifest.path("equalized", equalized_path);
        manifest.path("output", out);
        if let Some(p) = &policy {
            manifest.field("param target", p.target_outcome());
            manifest.field("param tau", p.tau());
        }
        std::fs::write(out, report.to_machine_text(manifest.comments()))?;
        println!("wrote {}", out.display());
    }
    Ok(ExitCode::SUCCESS)
}
