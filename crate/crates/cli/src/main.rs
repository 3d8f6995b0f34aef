//! `urnlab` command line: generate datasets, train, evaluate, plot, self-test.
//!
//! Failures print a single line `error[<kind>]: <message>` on stderr and exit
//! with 2 (usage), 3 (configuration or input), 4 (training failure) or 1 (I/O).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use urnlab::harness::{
    annotate_dataset, build_datasets, evaluate, task_vocab, Experiment, ExperimentConfig,
};
use urnlab::langs::{Dataset, Task};
use urnlab::models::{count_params, Arch, Checkpoint};
use urnlab::report::{emit_csv, render_directory, render_plot, Axes, CsvTable, Series};
use urnlab::selftest::run_selftest;
use urnlab::Error;

#[derive(Parser)]
#[command(name = "urnlab", version, about = "Unitary-evolution RNNs on synthetic syntax tasks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample training and test sets and write them as dataset files.
    Generate(RunArgs),
    /// Train a model, writing per-epoch CSVs, a breakdown CSV and a checkpoint.
    Train(RunArgs),
    /// Re-evaluate a checkpoint on a dataset file.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Render SVG plots from CSV files.
    Report(ReportArgs),
    /// Run the built-in consistency checks.
    Selftest,
}

#[derive(Args)]
struct RunArgs {
    /// Starting configuration: cross-serial or dyck.
    #[arg(long)]
    preset: Option<String>,
    /// Config file applied after the preset and before the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// urn or lstm.
    #[arg(long)]
    arch: Option<Arch>,
    /// Hidden units n.
    #[arg(long)]
    units: Option<usize>,
    /// LSTM embedding width e.
    #[arg(long)]
    embed: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch: Option<usize>,
    /// Dropout rate in [0, 1).
    #[arg(long)]
    dropout: Option<f64>,
    #[arg(long)]
    train_count: Option<usize>,
    #[arg(long)]
    test_count: Option<usize>,
    /// Cross-serial training bound: m+n < k.
    #[arg(long)]
    k_train: Option<usize>,
    /// Cross-serial test bound.
    #[arg(long)]
    k_test: Option<usize>,
    /// Dyck training depth range, e.g. 3-6.
    #[arg(long)]
    depth_train: Option<String>,
    /// Dyck test depth range, e.g. 7-9.
    #[arg(long)]
    depth_test: Option<String>,
    /// Output directory.
    #[arg(long, env = "URNLAB_OUT", default_value = "results")]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory of CSV files; renders every standard figure found there.
    #[arg(long, conflicts_with = "csv")]
    dir: Option<PathBuf>,
    /// Individual CSV files, one series each (labelled by file stem).
    #[arg(long, num_args = 1..)]
    csv: Vec<PathBuf>,
    /// CSV column for the x axis.
    #[arg(long, default_value = "epoch")]
    x: String,
    /// CSV column for the y axis.
    #[arg(long, default_value = "testloss")]
    y: String,
    /// Draw the x axis decreasing from left to right.
    #[arg(long)]
    reverse_x: bool,
    #[arg(long, default_value = "")]
    title: String,
    /// Output directory (with --dir) or SVG file (with --csv).
    #[arg(long, env = "URNLAB_OUT", default_value = "results")]
    out: PathBuf,
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.preset {
            Some(p) => ExperimentConfig::preset(p)?,
            None => ExperimentConfig::cross_serial(),
        };
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            cfg.apply_text(&text)?;
        }
        let mut set = |key: &str, value: Option<String>| match value {
            Some(v) => cfg.set(key, &v),
            None => Ok(()),
        };
        set("arch", self.arch.map(|a| a.to_string()))?;
        set("units", self.units.map(|v| v.to_string()))?;
        set("embed", self.embed.map(|v| v.to_string()))?;
        set("seed", self.seed.map(|v| v.to_string()))?;
        set("epochs", self.epochs.map(|v| v.to_string()))?;
        set("lr", self.lr.map(|v| v.to_string()))?;
        set("batch", self.batch.map(|v| v.to_string()))?;
        set("dropout", self.dropout.map(|v| v.to_string()))?;
        set("train_count", self.train_count.map(|v| v.to_string()))?;
        set("test_count", self.test_count.map(|v| v.to_string()))?;
        set("k_train", self.k_train.map(|v| v.to_string()))?;
        set("k_test", self.k_test.map(|v| v.to_string()))?;
        set("depth_train", self.depth_train.clone())?;
        set("depth_test", self.depth_test.clone())?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn create_dir(dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn generate(args: &RunArgs) -> Result<(), Error> {
    let cfg = args.config()?;
    let (train, test) = build_datasets(&cfg)?;
    create_dir(&args.out)?;
    let (size_param, pair_count) = match cfg.task {
        Task::CrossSerial => (0, 0),
        Task::Dyck => (cfg.pairs, cfg.pair_count),
    };
    for (split, data, k) in [("train", train, cfg.k_train), ("test", test, cfg.k_test)] {
        let ds = Dataset {
            task: cfg.task,
            size_param: if cfg.task == Task::CrossSerial { k } else { size_param },
            pair_count,
            seed: cfg.seed,
            sequences: data.into_iter().map(|s| s.tokens).collect(),
        };
        let path = args.out.join(format!("{}_{split}.txt", cfg.task));
        ds.save(&path)?;
        println!("wrote {} ({} sequences)", path.display(), ds.sequences.len());
    }
    Ok(())
}

fn train(args: &RunArgs) -> Result<(), Error> {
    let cfg = args.config()?;
    let stem = cfg.run_name();
    create_dir(&args.out)?;
    std::fs::write(args.out.join(format!("{stem}.cfg")), cfg.to_text()).map_err(|e| Error::Io {
        path: args.out.join(format!("{stem}.cfg")),
        source: e,
    })?;
    let mut exp = Experiment::new(cfg)?;
    println!("parameters {}", exp.param_count());
    let mut failure = None;
    for _ in 0..exp.config.epochs {
        match exp.run_epoch() {
            Ok(r) => println!(
                "epoch {} trainloss {:.6} testloss {:.6} accuracy {:.6} maxErrRate {:.6}",
                r.epoch, r.trainloss, r.testloss, r.accuracy, r.max_err_rate
            ),
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    // Partial results are still written when training diverges.
    for path in emit_csv(&exp.result(), &args.out, &stem)? {
        println!("wrote {}", path.display());
    }
    if let Some(e) = failure {
        return Err(e);
    }
    let ck = Checkpoint {
        model: exp.model.clone(),
        vocab: exp.vocab.clone(),
        hyper: exp
            .config
            .entries()
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
    };
    let path = args.out.join(format!("{stem}.ckpt"));
    ck.save(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn eval(checkpoint: &Path, data: &Path) -> Result<(), Error> {
    let ck = Checkpoint::load(checkpoint)?;
    let ds = Dataset::load(data)?;
    let mut cfg = match ds.task {
        Task::CrossSerial => ExperimentConfig::cross_serial(),
        Task::Dyck => ExperimentConfig::dyck(),
    };
    match ds.task {
        Task::CrossSerial => cfg.k_test = ds.size_param,
        Task::Dyck => {
            cfg.pairs = ds.size_param;
            cfg.pair_count = ds.pair_count;
        }
    }
    cfg.vocab_size = ck.model.vocab_size();
    let vocab = task_vocab(&cfg)?;
    if vocab.names()[..cfg.task_symbols()] != ck.vocab.names()[..cfg.task_symbols()] {
        return Err(Error::Config("checkpoint vocabulary does not match the dataset's task".into()));
    }
    let test = annotate_dataset(&ds).map_err(|e| Error::Config(e.to_string()))?;
    let ev = evaluate(&ck.model, &test, &cfg)?;
    println!("parameters {}", count_params(&ck.model));
    println!(
        "testloss {:.6} accuracy {:.6} maxErrRate {:.6}",
        ev.loss,
        ev.accuracy(),
        ev.max_err_rate()
    );
    let bin = if ds.task == Task::Dyck { "attractors" } else { "p" };
    for (b, acc) in ev.populated() {
        println!("{bin} {b} accuracy {acc:.6} count {}", ev.bins[b].total);
    }
    Ok(())
}

fn report(args: &ReportArgs) -> Result<(), Error> {
    if let Some(dir) = &args.dir {
        for path in render_directory(dir, &args.out)? {
            println!("wrote {}", path.display());
        }
        return Ok(());
    }
    if args.csv.is_empty() {
        return Err(Error::InvalidArgument("report needs --dir or --csv".into()));
    }
    let series = args
        .csv
        .iter()
        .map(|p| {
            let label = p.file_stem().and_then(|s| s.to_str()).unwrap_or("series");
            Series::from_table(&CsvTable::load(p)?, &args.x, &args.y, label)
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let axes = Axes {
        title: args.title.clone(),
        x_label: args.x.clone(),
        y_label: args.y.clone(),
        reversed_x: args.reverse_x,
        ..Axes::default()
    };
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    std::fs::write(&args.out, render_plot(&series, &axes)).map_err(|e| Error::Io {
        path: args.out.clone(),
        source: e,
    })?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn selftest() -> Result<(), Error> {
    let mut failed = 0;
    for check in run_selftest() {
        match &check.outcome {
            Ok(()) => println!("ok   {}", check.name),
            Err(msg) => {
                failed += 1;
                println!("FAIL {}: {msg}", check.name);
            }
        }
    }
    if failed > 0 {
        return Err(Error::InvalidArgument(format!("{failed} self-test check(s) failed")));
    }
    Ok(())
}

fn exit_code(e: &Error) -> (u8, &'static str) {
    match e {
        Error::InvalidArgument(_) => (2, "usage"),
        Error::Config(_) | Error::Parse { .. } => (3, "config"),
        Error::TrainingFailure { .. } => (4, "training"),
        Error::Io { .. } => (1, "io"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid usage");
            let first = first.strip_prefix("error: ").unwrap_or(first);
            eprintln!("error[usage]: {first}");
            return ExitCode::from(2);
        }
    };
    let result = match &cli.command {
        Command::Generate(args) => generate(args),
        Command::Train(args) => train(args),
        Command::Eval { checkpoint, data } => eval(checkpoint, data),
        Command::Report(args) => report(args),
        Command::Selftest => selftest(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (code, kind) = exit_code(&e);
            eprintln!("error[{kind}]: {}", e.to_string().replace('\n', " "));
            ExitCode::from(code)
        }
    }
}
