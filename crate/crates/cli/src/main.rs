use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use tailqueue::choice::{self, simulate_choices, ChoicePair, Fit, Menu};
use tailqueue::des::{run_replication_logged, sweep, ResultRow};
use tailqueue::report::{event_log_csv, results_csv, summary_csv};
use tailqueue::study::{self, Study};
use tailqueue::{moment_match, CvarConvention, DiscretePmf, MomentTargets};

mod config;
mod output;

use config::{parse_config_with_seed, render};
use output::{write_atomic, Manifest};

const SEED_ENV: &str = "TAILQUEUE_SEED";

#[derive(Debug, Parser)]
#[command(name = "tailqueue", version, about = "Pooled vs dedicated queues with tail-sensitive customers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario grid and write results, summary and manifest.
    Simulate(SimulateArgs),
    /// Distribution utilities.
    #[command(subcommand)]
    Dist(DistCommand),
    /// Fit a logit choice model to a labeled dataset.
    Fit(FitArgs),
    /// Simulate choices from known coefficients and fit them back.
    Recover(RecoverArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `out_dir` in the config; default `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Also write the event log of replication 0 of every scenario.
    #[arg(long)]
    event_log: bool,
}

#[derive(Debug, Subcommand)]
enum DistCommand {
    /// Moments and tail statistics of PMF files.
    Stats {
        files: Vec<PathBuf>,
        /// Include every bundled stimulus distribution.
        #[arg(long)]
        bundled: bool,
        #[arg(long, default_value_t = 0.8)]
        q: f64,
        /// Condition CVaR on strict exceedance of the percentile instead of
        /// the Rockafellar-Uryasev form.
        #[arg(long)]
        strict_cvar: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Closest PMF on a support with the requested moments.
    Match {
        /// Comma-separated support points.
        #[arg(long, value_parser = parse_list::<f64>)]
        support: List<f64>,
        #[arg(long)]
        mean: f64,
        #[arg(long)]
        sd: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        skew: Option<f64>,
        #[arg(long)]
        kurt: Option<f64>,
        /// PMF on the same support to stay close to (uniform by default).
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct FitArgs {
    /// CSV with columns subject_id,decision_id,pmf_file_A,pmf_file_B,chosenA;
    /// PMF paths are relative to the dataset file.
    #[arg(long)]
    dataset: PathBuf,
    /// tail, mean, meanvar, meanvarskew or all, optionally with `+constant`.
    #[arg(long, default_value = "tail")]
    menu: Menu,
    #[arg(long, default_value_t = 0.8)]
    q: f64,
    /// Starting values (comma-separated).
    #[arg(long, value_parser = parse_list::<f64>, allow_hyphen_values = true)]
    init: Option<List<f64>>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct RecoverArgs {
    /// True coefficients in menu order (comma-separated).
    #[arg(long, value_parser = parse_list::<f64>, allow_hyphen_values = true)]
    truth: List<f64>,
    #[arg(long, default_value = "tail")]
    menu: Menu,
    #[arg(long, default_value_t = 0.8)]
    q: f64,
    #[arg(long, default_value_t = 500)]
    subjects: usize,
    /// Seed of the synthetic choices (TAILQUEUE_SEED overrides).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
struct List<T>(Vec<T>);

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<List<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|v| v.trim().parse::<T>().map_err(|e| format!("`{}`: {e}", v.trim())))
        .collect::<Result<Vec<_>, _>>()
        .map(List)
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn env_seed() -> Result<Option<u64>, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .map(Some)
            .map_err(|_| CliError::Config(format!("{SEED_ENV}=`{v}` is not a 64-bit unsigned integer"))),
        Err(_) => Ok(None),
    }
}

fn write(dir: &Path, name: &str, text: &str, manifest: &mut Manifest) -> Result<(), CliError> {
    let path = dir.join(name);
    write_atomic(&path, text.as_bytes()).map_err(|e| runtime(format!("writing {}: {e}", path.display())))?;
    manifest.output(name);
    Ok(())
}

fn finish(dir: &Path, manifest: &Manifest) -> Result<(), CliError> {
    manifest
        .write(dir)
        .map(|_| ())
        .map_err(|e| runtime(format!("writing manifest: {e}")))
}

fn read_pmf(path: &Path) -> Result<DiscretePmf, CliError> {
    let text = fs::read_to_string(path).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
    DiscretePmf::parse(&text).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("{}: {e}", args.config.display())))?;
    let config = parse_config_with_seed(&text, env_seed()?).map_err(|e| CliError::Config(e.to_string()))?;
    let out = args
        .out
        .clone()
        .or_else(|| config.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let grid = config.grid();

    let mut manifest = Manifest::new("simulate");
    manifest.set("runs", config.runs());
    manifest.set("threads", args.threads);
    manifest.set("event_log", args.event_log);
    manifest.body(render(&config));

    let result = sweep(&grid, args.threads);
    let (rows, summary, failure) = match result {
        Ok(r) => (r.rows, Some(r.summary), None),
        Err(e) => (e.partial.clone(), None, Some(e)),
    };
    write(&out, "results.csv", &results_csv(&rows), &mut manifest)?;
    if let Some(failure) = failure {
        manifest.set("status", "aborted");
        finish(&out, &manifest)?;
        return Err(runtime(failure));
    }
    let summary = summary.unwrap_or_default();
    write(&out, "summary.csv", &summary_csv(&summary), &mut manifest)?;

    if args.event_log {
        for (scenario, row) in grid.scenarios().iter().zip(&rows) {
            let (_, log) = run_replication_logged(scenario, 0).map_err(runtime)?;
            let name = event_log_name(row);
            write(&out, &name, &event_log_csv(&log), &mut manifest)?;
        }
    }
    finish(&out, &manifest)?;
    print!("{}", summary_csv(&summary));
    eprintln!("{} runs written to {}", rows.len(), out.display());
    Ok(())
}

fn event_log_name(row: &ResultRow) -> String {
    format!(
        "events/rho{}_N{}_R{}_{}_{}.csv",
        row.rho, row.servers, row.reward, row.model, row.topology
    )
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

fn dist_stats(files: Vec<PathBuf>, bundled: bool, q: f64, strict_cvar: bool, out: PathBuf) -> Result<(), CliError> {
    if !(q > 0.0 && q < 1.0) {
        return Err(CliError::Usage(format!("--q must lie in (0, 1), got {q}")));
    }
    let convention = if strict_cvar {
        CvarConvention::StrictExceedance
    } else {
        CvarConvention::RockafellarUryasev
    };
    let mut inputs: Vec<(String, DiscretePmf)> = Vec::new();
    if bundled {
        for (s, name, pmf) in study::all() {
            inputs.push((study::file_name(s, name), pmf));
        }
    }
    for f in &files {
        inputs.push((f.display().to_string(), read_pmf(f)?));
    }
    if inputs.is_empty() {
        return Err(CliError::Usage("no PMF files given (pass files or --bundled)".into()));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["file", "mean", "stddev", "skewness", "kurtosis", "q", "pct_q", "cvar_q"])
        .map_err(runtime)?;
    for (name, pmf) in &inputs {
        let m = pmf.moments();
        w.write_record([
            name.clone(),
            m.mean.to_string(),
            m.stddev.to_string(),
            fmt_opt(m.skewness),
            fmt_opt(m.kurtosis),
            q.to_string(),
            pmf.percentile(q).to_string(),
            pmf.cvar_with(q, convention).to_string(),
        ])
        .map_err(runtime)?;
    }
    let text = String::from_utf8(w.into_inner().map_err(runtime)?).map_err(runtime)?;
    let mut manifest = Manifest::new("dist stats");
    manifest.set("q", q);
    manifest.set("bundled", bundled);
    manifest.set("cvar", format!("{convention:?}"));
    for f in &files {
        manifest.set("input", f.display());
    }
    write(&out, "stats.csv", &text, &mut manifest)?;
    finish(&out, &manifest)?;
    print!("{text}");
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn dist_match(
    support: Vec<f64>,
    mean: f64,
    sd: Option<f64>,
    skew: Option<f64>,
    kurt: Option<f64>,
    reference: Option<PathBuf>,
    out: PathBuf,
) -> Result<(), CliError> {
    let targets = MomentTargets { mean, stddev: sd, skewness: skew, kurtosis: kurt };
    let reference = reference.as_deref().map(read_pmf).transpose()?;
    let pmf = moment_match(&support, &targets, reference.as_ref()).map_err(runtime)?;
    let mut manifest = Manifest::new("dist match");
    manifest.set("support", support.iter().map(f64::to_string).collect::<Vec<_>>().join(","));
    manifest.set("targets", format!("mean={mean} sd={} skew={} kurt={}", fmt_opt(sd), fmt_opt(skew), fmt_opt(kurt)));
    let text = pmf.to_text();
    write(&out, "matched.pmf", &text, &mut manifest)?;
    finish(&out, &manifest)?;
    print!("{text}");
    Ok(())
}

fn parse_choice(s: &str) -> Option<bool> {
    match s.trim() {
        "1" | "true" | "TRUE" | "A" => Some(true),
        "0" | "false" | "FALSE" | "B" => Some(false),
        _ => None,
    }
}

fn read_dataset(path: &Path) -> Result<Vec<ChoicePair>, CliError> {
    let base = path.parent().unwrap_or(Path::new("."));
    let mut reader = csv::Reader::from_path(path).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
    let headers = reader.headers().map_err(runtime)?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| runtime(format!("{}: missing column `{name}`", path.display())))
    };
    let (subject, decision, file_a, file_b, chosen) = (
        column("subject_id")?,
        column("decision_id")?,
        column("pmf_file_A")?,
        column("pmf_file_B")?,
        column("chosenA")?,
    );
    let mut cache: HashMap<String, DiscretePmf> = HashMap::new();
    let mut load = |name: &str| -> Result<DiscretePmf, CliError> {
        if let Some(p) = cache.get(name) {
            return Ok(p.clone());
        }
        let pmf = read_pmf(&base.join(name))?;
        cache.insert(name.to_string(), pmf.clone());
        Ok(pmf)
    };
    let mut data = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let r = record.map_err(runtime)?;
        let row = i + 2;
        let a = load(&r[file_a])?;
        let b = load(&r[file_b])?;
        let c = parse_choice(&r[chosen])
            .ok_or_else(|| runtime(format!("{}: row {row}: chosenA `{}` is not 1/0", path.display(), &r[chosen])))?;
        data.push(ChoicePair::unlabeled(r[decision].to_string(), a, b).labeled(r[subject].to_string(), c));
    }
    Ok(data)
}

fn fit(args: FitArgs) -> Result<(), CliError> {
    let data = read_dataset(&args.dataset)?;
    let init = args.init.as_ref().map(|l| l.0.as_slice());
    let fit = choice::fit(&data, args.q, &args.menu, init).map_err(runtime)?;
    let mut manifest = Manifest::new("fit");
    manifest.set("dataset", args.dataset.display());
    manifest.set("menu", &args.menu);
    manifest.set("q", args.q);
    let text = fit.report_csv();
    write(&args.out, "fit.csv", &text, &mut manifest)?;
    finish(&args.out, &manifest)?;
    print!("{text}");
    Ok(())
}

fn recovery_csv(truth: &[f64], fit: &Fit) -> String {
    let mut out = String::from("feature,truth,estimate,stderr,error\n");
    for (i, name) in fit.names.iter().enumerate() {
        out.push_str(&format!(
            "{name},{},{},{},{}\n",
            truth[i],
            fit.params[i],
            fit.stderr[i],
            fit.params[i] - truth[i]
        ));
    }
    out.push_str("loglik,AIC,BIC,n\n");
    out.push_str(&format!("{},{},{},{}\n", fit.loglik, fit.aic, fit.bic, fit.n));
    out
}

fn recover(args: RecoverArgs) -> Result<(), CliError> {
    let seed = env_seed()?
        .or(args.seed)
        .ok_or_else(|| CliError::Config(format!("missing seed (pass --seed or set {SEED_ENV})")))?;
    let truth = args.truth.0;
    if truth.len() != args.menu.len() {
        return Err(CliError::Usage(format!(
            "--truth has {} values but menu `{}` has {} parameters",
            truth.len(),
            args.menu,
            args.menu.len()
        )));
    }
    let decisions = study::decisions();
    let pairs = study::decision_pairs();
    let data = simulate_choices(&truth, &pairs, args.subjects, args.q, &args.menu, seed).map_err(runtime)?;
    let fit = choice::fit(&data, args.q, &args.menu, None).map_err(runtime)?;

    let mut manifest = Manifest::new("recover");
    manifest.set("seed", seed);
    manifest.set("menu", &args.menu);
    manifest.set("q", args.q);
    manifest.set("subjects", args.subjects);
    manifest.set("truth", truth.iter().map(f64::to_string).collect::<Vec<_>>().join(","));

    let files: HashMap<&str, (String, String)> = decisions
        .iter()
        .map(|d| {
            let a = format!("pmf/{}", study::file_name(d.study, d.a));
            let b = format!("pmf/{}", study::file_name(d.study, d.b));
            (d.id.as_str(), (a, b))
        })
        .collect();
    for study in [Study::S2A, Study::S2B] {
        for d in decisions.iter().filter(|d| d.study == study) {
            for name in [d.a, d.b] {
                let file = format!("pmf/{}", study::file_name(study, name));
                write_atomic(&args.out.join(&file), study::text(study, name).unwrap().as_bytes())
                    .map_err(runtime)?;
            }
        }
    }
    let mut dataset = String::from("subject_id,decision_id,pmf_file_A,pmf_file_B,chosenA\n");
    for p in &data {
        let (a, b) = &files[p.decision_id.as_str()];
        let chosen = u8::from(p.chosen_a == Some(true));
        dataset.push_str(&format!("{},{},{a},{b},{chosen}\n", p.subject_id, p.decision_id));
    }
    write(&args.out, "dataset.csv", &dataset, &mut manifest)?;
    let text = recovery_csv(&truth, &fit);
    write(&args.out, "recovery.csv", &text, &mut manifest)?;
    manifest.output("pmf/");
    finish(&args.out, &manifest)?;
    print!("{text}");
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Dist(DistCommand::Stats { files, bundled, q, strict_cvar, out }) => {
            dist_stats(files, bundled, q, strict_cvar, out)
        }
        Command::Dist(DistCommand::Match { support, mean, sd, skew, kurt, reference, out }) => {
            dist_match(support.0, mean, sd, skew, kurt, reference, out)
        }
        Command::Fit(args) => fit(args),
        Command::Recover(args) => recover(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
