use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use binsa::binning::{analyze, conservation_check};
use binsa::io::report::{
    write_first_order_csv, write_histogram_csv, write_json, write_scenarios_csv,
    write_second_order_csv, write_sweep_csv, ComparisonBundle, SweepBundle, SCHEMA_VERSION,
};
use binsa::io::svg::{combined_bar_chart, stacked_histogram};
use binsa::io::{
    read_dataset_file, read_states, write_dataset_file, ReportBundle, RunMetadata, StudyConfig,
};
use binsa::simdec::{decompose, default_states, select_inputs};
use binsa::study::{compare, generate_dataset, sweep_dependence};
use binsa::{Dataset, Error, Result, Sampler};

/// Like `println!` but a closed stdout (e.g. a pipe into `head`) is not an
/// error.
macro_rules! say {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

#[derive(Parser)]
#[command(
    name = "binsa",
    version,
    about = "Sensitivity indices from a single dataset by simple binning"
)]
struct Cli {
    /// Print errors as JSON on stderr.
    #[arg(long, global = true)]
    json_errors: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON study configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in model, e.g. toy_portfolio, ishigami:7,0.1, nested_interaction.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Sample size.
    #[arg(long)]
    n: Option<usize>,
    /// mc, qmc or ffd.
    #[arg(long)]
    sampler: Option<Sampler>,
    /// First-order bin count.
    #[arg(long)]
    bins: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Draw inputs, evaluate a model and write the dataset CSV.
    Sample(Common),
    /// Estimate first-order, second-order and combined indices.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Dataset CSV (last column is the output).
        dataset: Option<PathBuf>,
    },
    /// Decompose the output distribution into scenarios.
    Simdec {
        #[command(flatten)]
        common: Common,
        dataset: Option<PathBuf>,
        /// JSON state definitions overriding the defaults.
        #[arg(long)]
        states: Option<PathBuf>,
    },
    /// Binning estimates next to pick-freeze estimates on a model.
    Compare(Common),
    /// Indices of the two-factor models across a dependence grid.
    SweepDependence(Common),
}

fn resolve_config(common: &Common, dataset: Option<&PathBuf>) -> Result<StudyConfig> {
    let mut cfg = match &common.config {
        Some(p) => StudyConfig::load(p)?,
        None => StudyConfig::default(),
    };
    if let Some(m) = &common.model {
        cfg.model = Some(m.clone());
        cfg.dataset = None;
    }
    if let Some(d) = dataset {
        cfg.dataset = Some(d.clone());
        cfg.model = None;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(n) = common.n {
        cfg.sampling.n = n;
        cfg.sweep.n = n;
    }
    if let Some(s) = common.sampler {
        cfg.sampling.method = s;
    }
    if let Some(b) = common.bins {
        cfg.binning.n_bins_first = Some(b);
    }
    if let Some(o) = &common.out {
        cfg.out = Some(o.clone());
    }
    Ok(cfg)
}

fn out_dir(cfg: &StudyConfig) -> Result<PathBuf> {
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn metadata(cfg: &StudyConfig, n_rows: usize) -> Result<RunMetadata> {
    let mut m = RunMetadata::new(n_rows);
    if cfg.model.is_some() {
        m.seed = Some(cfg.seed);
        m.model = cfg.model_id()?.map(|id| id.to_string());
        m.sampler = Some(cfg.sampling.method.to_string());
    }
    m.dataset = cfg.dataset.as_ref().map(|p| p.display().to_string());
    m.config = Some(serde_json::to_value(cfg)?);
    Ok(m)
}

fn load_dataset(cfg: &StudyConfig) -> Result<Dataset> {
    cfg.validate()?;
    if let Some(path) = &cfg.dataset {
        return read_dataset_file(path, cfg.inputs.as_deref()).map_err(|e| match e {
            Error::Io(io) => {
                Error::InvalidArgument(format!("cannot read {}: {io}", path.display()))
            }
            other => other,
        });
    }
    let model = cfg.model_id()?.expect("validated");
    let specs = cfg.specs_for(&model)?;
    generate_dataset(&model, &specs, &cfg.sampling_plan(), &cfg.dependence)
}

fn run_sample(common: &Common) -> Result<()> {
    let cfg = resolve_config(common, None)?;
    if cfg.model.is_none() {
        return Err(Error::InvalidArgument("sample needs a model".into()));
    }
    let ds = load_dataset(&cfg)?;
    let dir = out_dir(&cfg)?;
    let path = dir.join("dataset.csv");
    write_dataset_file(&ds, &path)?;
    say!("wrote {} rows to {}", ds.n_rows(), path.display());
    Ok(())
}

fn run_analyze(common: &Common, dataset: Option<&PathBuf>) -> Result<()> {
    let cfg = resolve_config(common, dataset)?;
    let ds = load_dataset(&cfg)?;
    let report = analyze(&ds, &cfg.binning)?;
    let dir = out_dir(&cfg)?;
    let bundle = ReportBundle::new(metadata(&cfg, ds.n_rows())?, &report);
    write_json(&bundle, create(&dir, "report.json")?)?;
    write_first_order_csv(&report, create(&dir, "first_order.csv")?)?;
    write_second_order_csv(&report, create(&dir, "second_order.csv")?)?;
    fs::write(dir.join("combined.svg"), combined_bar_chart(&report))?;
    say!("{:<16} {:>10} {:>10}", "input", "first", "combined");
    for (i, name) in report.names.iter().enumerate() {
        say!(
            "{:<16} {:>10.4} {:>10.4}",
            name,
            report.first_order[i],
            report.combined[i]
        );
    }
    say!(
        "sum of first and second order: {:.4}",
        conservation_check(&report)
    );
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn run_simdec(common: &Common, dataset: Option<&PathBuf>, states: Option<&PathBuf>) -> Result<()> {
    let mut cfg = resolve_config(common, dataset)?;
    if let Some(s) = states {
        cfg.states = Some(s.clone());
    }
    let ds = load_dataset(&cfg)?;
    let report = analyze(&ds, &cfg.binning)?;
    let defs = match &cfg.states {
        Some(path) => read_states(path)?,
        None => {
            let selected = select_inputs(&report, cfg.simdec.max_inputs, cfg.simdec.cum_threshold)?;
            default_states(&ds, &selected)?
        }
    };
    let dec = decompose(&ds, &defs, cfg.simdec.n_output_bins)?;
    let dir = out_dir(&cfg)?;
    write_scenarios_csv(&dec, create(&dir, "scenarios.csv")?)?;
    write_histogram_csv(&dec, create(&dir, "histogram.csv")?)?;
    fs::write(dir.join("simdec.svg"), stacked_histogram(&dec, "output"))?;
    let mut bundle = ReportBundle::new(metadata(&cfg, ds.n_rows())?, &report);
    bundle.decomposition = Some(dec.clone());
    write_json(&bundle, create(&dir, "report.json")?)?;
    say!(
        "{} scenarios over {}",
        dec.scenarios.len(),
        dec.inputs.join(", ")
    );
    for s in &dec.scenarios {
        say!(
            "sc{:<3} {} {:<28} p={:.4}",
            s.id,
            s.color,
            s.state_labels.join("/"),
            s.probability
        );
    }
    Ok(())
}

fn run_compare(common: &Common) -> Result<()> {
    let cfg = resolve_config(common, None)?;
    cfg.validate()?;
    let model = cfg
        .model_id()?
        .ok_or_else(|| Error::InvalidArgument("compare needs a model".into()))?;
    let specs = cfg.specs_for(&model)?;
    let cmp = compare(&model, &specs, &cfg.dependence, &cfg.compare_settings())?;
    let dir = out_dir(&cfg)?;
    let bundle = ComparisonBundle {
        schema_version: SCHEMA_VERSION,
        metadata: metadata(&cfg, cmp.binning_evaluations)?,
        comparison: cmp,
    };
    write_json(&bundle, create(&dir, "compare.json")?)?;
    let c = &bundle.comparison;
    say!(
        "{:<16} {:>9} {:>9} {:>9}   ({} vs {} evaluations)",
        "index",
        "binning",
        "oracle",
        "delta",
        c.binning_evaluations,
        c.oracle_evaluations
    );
    for d in c.first_order.iter().chain(&c.second_order) {
        say!(
            "{:<16} {:>9.4} {:>9.4} {:>9.4}",
            d.name,
            d.binning,
            d.reference,
            d.delta
        );
    }
    Ok(())
}

fn run_sweep(common: &Common) -> Result<()> {
    let cfg = resolve_config(common, None)?;
    let sweep = cfg.sweep_config()?;
    let rows = sweep_dependence(&sweep)?;
    let dir = out_dir(&cfg)?;
    write_sweep_csv(&rows, create(&dir, "sweep.csv")?)?;
    let bundle = SweepBundle {
        schema_version: SCHEMA_VERSION,
        metadata: RunMetadata {
            seed: Some(sweep.seed),
            sampler: Some(sweep.sampler.to_string()),
            config: Some(serde_json::to_value(&cfg)?),
            ..RunMetadata::new(sweep.n)
        },
        rows,
    };
    write_json(&bundle, create(&dir, "sweep.json")?)?;
    say!(
        "{} sweep points written to {}",
        bundle.rows.len(),
        dir.join("sweep.csv").display()
    );
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    if e.is_user_error() {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sample(c) => run_sample(c),
        Command::Analyze { common, dataset } => run_analyze(common, dataset.as_ref()),
        Command::Simdec {
            common,
            dataset,
            states,
        } => run_simdec(common, dataset.as_ref(), states.as_ref()),
        Command::Compare(c) => run_compare(c),
        Command::SweepDependence(c) => run_sweep(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = exit_code(&e);
            if cli.json_errors {
                let body = serde_json::json!({
                    "error": { "kind": e.kind(), "message": e.to_string(), "exit_code": code }
                });
                eprintln!("{body}");
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(code)
        }
    }
}
