//! Command-line driver behind the `emaudit` binary.
//!
//! Exit codes: `0` success (and, for `audit`/`report`, no unfair target),
//! `1` at least one unfair target, `2` any error.

use std::error::Error;
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::audit::{run_audit, AuditReport, Baseline, Convention, DisparityOp};
use crate::config::{MeasureSpec, RunConfig, SweepSection};
use crate::datagen::{generate, synthetic_source};
use crate::dataset::{
    load_correspondences, write_correspondences, AuditMode, Correspondence, EntityTable, FormatConfig,
};
use crate::groups::GroupUniverse;
use crate::matchers::{apply_rules, apply_threshold, score_correspondences};
use crate::measures::Measure;
use crate::report::{heatmap_csv, render_grid, report_csv, report_json, SweepDocument};
use crate::sensitivity::sweep;

type CliResult<T> = Result<T, Box<dyn Error>>;

#[derive(Debug, Parser)]
#[command(name = "emaudit", version, about = "Group-fairness auditing for entity matching")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a semi-synthetic benchmark (left/right tables and labelled pairs).
    Generate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the configured baseline matcher over the labelled pairs.
    Match {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Audit predictions and write report.json, report.csv and grid.txt.
    Audit {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        audit: AuditArgs,
        /// Re-decide every pair from its score at this threshold.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Audit across matching thresholds and report the sensitivity score.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        audit: AuditArgs,
        /// Comma-separated thresholds (default 0.30..0.90 step 0.05).
        #[arg(long, value_delimiter = ',')]
        thresholds: Option<Vec<f64>>,
        /// Measure whose unfair-target counts are tracked.
        #[arg(long)]
        measure: Option<Measure>,
    },
    /// Render a previously written report.json.
    Report {
        /// Path to report.json.
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Grid)]
        format: Format,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long, short)]
    config: PathBuf,
    /// Output directory (overrides `data.output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AuditArgs {
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// `all` or a comma-separated list of measure ids.
    #[arg(long)]
    measures: Option<String>,
    #[arg(long, value_enum)]
    disparity: Option<OpArg>,
    #[arg(long, value_enum)]
    convention: Option<ConventionArg>,
    #[arg(long, value_enum)]
    baseline: Option<BaselineArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Single,
    Pairwise,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OpArg {
    Sub,
    Div,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ConventionArg {
    Eq,
    Table,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BaselineArg {
    Overall,
    Complement,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Grid,
    Csv,
    Json,
}

impl AuditArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let a = &mut cfg.audit;
        if let Some(t) = self.tau {
            a.tau = t;
        }
        if let Some(m) = self.mode {
            a.modes = match m {
                ModeArg::Single => vec![AuditMode::Single],
                ModeArg::Pairwise => vec![AuditMode::Pairwise],
                ModeArg::Both => vec![AuditMode::Single, AuditMode::Pairwise],
            };
        }
        if let Some(m) = &self.measures {
            a.measures = MeasureSpec::Keyword(m.clone());
        }
        if let Some(op) = self.disparity {
            a.disparity = match op {
                OpArg::Sub => DisparityOp::Sub,
                OpArg::Div => DisparityOp::Div,
            };
        }
        if let Some(c) = self.convention {
            a.convention = match c {
                ConventionArg::Eq => Convention::Equation,
                ConventionArg::Table => Convention::Table,
            };
        }
        if let Some(b) = self.baseline {
            a.baseline = match b {
                BaselineArg::Overall => Baseline::Overall,
                BaselineArg::Complement => Baseline::Complement,
            };
        }
    }
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    init_threads();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

/// Caps the worker pool when `EMAUDIT_THREADS` is set.
fn init_threads() {
    if let Some(n) = std::env::var("EMAUDIT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // A pool may already exist when called repeatedly in one process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn load_config(common: &Common) -> CliResult<RunConfig> {
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(out) = &common.out {
        cfg.data.output_dir = out.clone();
    }
    Ok(cfg)
}

fn read_table(path: &Path) -> CliResult<EntityTable> {
    let f = File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(EntityTable::read(BufReader::new(f))?)
}

fn read_pairs(path: &Path, universe: &GroupUniverse, require_prediction: bool) -> CliResult<Vec<Correspondence>> {
    let f = File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let format = FormatConfig { require_prediction, ..FormatConfig::default() };
    Ok(load_correspondences(BufReader::new(f), universe, &format)?)
}

fn write_pairs(path: &Path, universe: &GroupUniverse, cs: &[Correspondence]) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    write_correspondences(File::create(path)?, universe, cs)?;
    Ok(())
}

fn dispatch(command: Command) -> CliResult<i32> {
    match command {
        Command::Generate { common, seed } => cmd_generate(&common, seed),
        Command::Match { common, threshold } => cmd_match(&common, threshold),
        Command::Audit { common, audit, threshold } => cmd_audit(&common, &audit, threshold),
        Command::Sweep { common, audit, thresholds, measure } => cmd_sweep(&common, &audit, thresholds, measure),
        Command::Report { input, format } => cmd_report(&input, format),
    }
}

fn cmd_generate(common: &Common, seed: Option<u64>) -> CliResult<i32> {
    let cfg = load_config(common)?;
    let section = cfg.generate.as_ref().ok_or("config has no [generate] section")?;
    let mut gen = section.gen.clone();
    if let Some(s) = seed {
        gen.seed = s;
    }
    let source = match (&section.source, &section.synthetic_rows) {
        (Some(path), _) => read_table(path)?,
        (None, Some(rows)) => synthetic_source(gen.recipe, rows, gen.seed),
        (None, None) => return Err("[generate] needs `source` or `synthetic_rows`".into()),
    };
    let data = generate(&gen, &source)?;
    fs::create_dir_all(&cfg.data.output_dir)?;
    data.left.write(File::create(cfg.data.left_path())?)?;
    data.right.write(File::create(cfg.data.right_path())?)?;
    write_pairs(&cfg.data.correspondences_path(), &data.universe, &data.pairs)?;
    let positives = data.pairs.iter().filter(|c| c.truth.is_match()).count();
    println!(
        "generated {} left, {} right, {} pairs ({} matches) in {}",
        data.left.len(),
        data.right.len(),
        data.pairs.len(),
        positives,
        cfg.data.output_dir.display()
    );
    Ok(0)
}

fn cmd_match(common: &Common, threshold: Option<f64>) -> CliResult<i32> {
    let cfg = load_config(common)?;
    cfg.validate()?;
    let matcher = cfg.matcher.as_ref().ok_or("config has no [matcher] section")?;
    let universe = cfg.universe()?;
    let left = read_table(&cfg.data.left_path())?;
    let right = read_table(&cfg.data.right_path())?;
    let mut pairs = read_pairs(&cfg.data.correspondences_path(), &universe, false)?;
    if let Some(scorer) = &matcher.scorer {
        pairs = score_correspondences(&left, &right, &pairs, scorer)?;
    }
    match &matcher.rules {
        Some(rules) => pairs = apply_rules(&left, &right, &pairs, rules)?,
        None => apply_threshold(&mut pairs, threshold.unwrap_or(matcher.threshold))?,
    }
    let out = cfg.data.predictions_path();
    write_pairs(&out, &universe, &pairs)?;
    let predicted = pairs.iter().filter(|c| c.decision.is_some_and(|d| d.is_match())).count();
    println!("{} pairs, {} predicted matches -> {}", pairs.len(), predicted, out.display());
    Ok(0)
}

fn prepare_audit(cfg: &mut RunConfig, args: &AuditArgs) -> CliResult<GroupUniverse> {
    args.apply(cfg);
    cfg.validate()?;
    Ok(cfg.universe()?)
}

fn cmd_audit(common: &Common, args: &AuditArgs, threshold: Option<f64>) -> CliResult<i32> {
    let mut cfg = load_config(common)?;
    if threshold.is_some() {
        cfg.audit.threshold = threshold;
    }
    let universe = prepare_audit(&mut cfg, args)?;
    let threshold = cfg.audit.threshold;
    let mut cs = read_pairs(&cfg.data.predictions_path(), &universe, threshold.is_none())?;
    if let Some(t) = threshold {
        apply_threshold(&mut cs, t)?;
    }
    let targets = cfg.audit.targets(&universe)?;
    let measures = cfg.audit.measures.resolve()?;
    let report = run_audit(&universe, &cs, &targets, &measures, &cfg.audit.disparity_config())?;

    let dir = &cfg.data.output_dir;
    fs::create_dir_all(dir)?;
    let grid = render_grid(&report);
    fs::write(dir.join("report.json"), report_json(&report)?)?;
    fs::write(dir.join("report.csv"), report_csv(&report)?)?;
    fs::write(dir.join("grid.txt"), &grid)?;
    print!("{grid}");
    Ok(i32::from(report.any_unfair()))
}

fn cmd_sweep(
    common: &Common,
    args: &AuditArgs,
    thresholds: Option<Vec<f64>>,
    measure: Option<Measure>,
) -> CliResult<i32> {
    let mut cfg = load_config(common)?;
    let universe = prepare_audit(&mut cfg, args)?;
    let mut section = cfg.sweep.clone().unwrap_or_else(SweepSection::default);
    if thresholds.is_some() {
        section.thresholds = thresholds;
    }
    if let Some(m) = measure {
        section.measure = m;
    }
    let cs = read_pairs(&cfg.data.predictions_path(), &universe, false)?;
    let targets = cfg.audit.targets(&universe)?;
    let result = sweep(&universe, &cs, &section.grid(), &targets, section.measure, &cfg.audit.disparity_config())?;
    let doc = SweepDocument::new(&section.label, &result, section.norm)?;

    let dir = &cfg.data.output_dir;
    fs::create_dir_all(dir)?;
    let heat = heatmap_csv(std::slice::from_ref(&doc))?;
    fs::write(dir.join("sweep.json"), serde_json::to_string_pretty(&doc)?)?;
    fs::write(dir.join("heatmap.csv"), &heat)?;
    print!("{heat}");
    Ok(0)
}

fn cmd_report(input: &Path, format: Format) -> CliResult<i32> {
    let text = fs::read_to_string(input).map_err(|e| format!("{}: {e}", input.display()))?;
    let report: AuditReport = serde_json::from_str(&text)?;
    match format {
        Format::Grid => print!("{}", render_grid(&report)),
        Format::Csv => print!("{}", report_csv(&report)?),
        Format::Json => println!("{}", report_json(&report)?),
    }
    Ok(i32::from(report.any_unfair()))
}
