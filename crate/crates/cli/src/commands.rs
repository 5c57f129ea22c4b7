use crate::args::{
    BenchArgs, Command, DataFlags, EvalArgs, FitFlags, InspectArgs, ReplayArgs, SplitArgs, TrainArgs, TransferArgs,
};
use ecgnet::data::{load_beats_csv, stratified_split, write_beats_csv};
use ecgnet::eval::{bench_throughput, evaluate_with_threads, replay_stream, threads_from_env, Report};
use ecgnet::model::{build, load_checkpoint, save_checkpoint};
use ecgnet::train::{train_with, EarlyStopConfig, EpochRecord, PlateauConfig, TrainHistory};
use ecgnet::transfer::{transfer_fit_with, TransferConfig};
use ecgnet::{Dataset, EcgError, LabelMap, Model, Result, TrainConfig};
use serde::Serialize;
use std::path::{Path, PathBuf};

pub fn run(command: Command) -> Result<()> {
    echo("arguments", &command);
    match command {
        Command::Split(a) => split(a),
        Command::Train(a) => train(a),
        Command::Transfer(a) => transfer(a),
        Command::Eval(a) => eval(a),
        Command::Bench(a) => bench(a),
        Command::Replay(a) => replay(a),
        Command::Inspect(a) => inspect(a),
    }
}

/// Resolved configuration goes to stderr so stdout stays machine-readable.
fn echo(what: &str, value: &impl Serialize) {
    let json = serde_json::to_string(value).expect("configuration serialises");
    eprintln!("{what}: {json}");
}

fn load(path: &Path, length: usize, lenient: bool) -> Result<Dataset> {
    load_beats_csv(path, length, !lenient)
}

/// Uses the class names for `n` classes; a file whose largest label is
/// below `n - 1` would otherwise get a smaller label space.
fn with_classes(ds: Dataset, n: usize) -> Result<Dataset> {
    if ds.n_classes() == n {
        return Ok(ds);
    }
    if ds.n_classes() > n {
        return Err(EcgError::Data(format!(
            "labels go up to {} but {n} classes were requested",
            ds.n_classes() - 1
        )));
    }
    ds.with_labels(LabelMap::for_classes(n))
}

fn with_model_labels(ds: Dataset, model: &Model) -> Result<Dataset> {
    if ds.n_classes() > model.n_classes() {
        return Err(EcgError::Data(format!(
            "labels go up to {} but the model has {} classes",
            ds.n_classes() - 1,
            model.n_classes()
        )));
    }
    ds.with_labels(LabelMap::new(model.label_names().to_vec())?)
}

fn train_config(fit: &FitFlags) -> Result<TrainConfig> {
    let config = TrainConfig {
        batch_size: fit.batch_size,
        learning_rate: fit.learning_rate,
        max_epochs: fit.epochs,
        seed: fit.seed,
        early_stop: EarlyStopConfig {
            patience: fit.patience,
            ..Default::default()
        },
        plateau: PlateauConfig {
            patience: fit.plateau_patience,
            factor: fit.plateau_factor,
            min_lr: fit.min_lr,
        },
        eval_threads: threads_from_env(),
        ..Default::default()
    };
    config.validate()?;
    Ok(config)
}

fn history_path(fit: &FitFlags, out: &Path) -> PathBuf {
    fit.history
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.history.jsonl", out.display())))
}

fn log_epoch(e: &EpochRecord) {
    eprintln!(
        "epoch {:>3}  loss {:.4}  acc {:.4}  val_loss {:.4}  val_acc {:.4}  lr {:.1e}  {:.1}s",
        e.epoch, e.train_loss, e.train_acc, e.val_loss, e.val_acc, e.lr, e.wall_seconds
    );
}

fn finish_training(model: &Model, history: &TrainHistory, out: &Path, history_out: &Path) -> Result<()> {
    save_checkpoint(model, out)?;
    history.save_jsonl(history_out)?;
    println!(
        "best epoch {} (val acc {:.4}) of {}{}; {:.1} s; checkpoint {}; history {}",
        history.best_epoch,
        history.best_val_acc().unwrap_or(0.0),
        history.epochs.len(),
        if history.stopped_early { ", stopped early" } else { "" },
        history.total_seconds(),
        out.display(),
        history_out.display()
    );
    Ok(())
}

fn split(a: SplitArgs) -> Result<()> {
    let ds = load(&a.input, a.data.length, a.data.lenient)?;
    let parts = stratified_split(&ds, a.ratios, a.seed)?;
    std::fs::create_dir_all(&a.out_dir).map_err(|e| EcgError::io(&a.out_dir, e))?;
    for (name, part) in [("train", &parts.train), ("val", &parts.val), ("test", &parts.test)] {
        let path = a.out_dir.join(format!("{name}.csv"));
        write_beats_csv(part, &path)?;
        let dist: Vec<String> = part
            .class_distribution()
            .iter()
            .map(|(c, n)| format!("{}={n}", part.labels().name(*c).unwrap_or("?")))
            .collect();
        println!("{name}: {} beats ({}) -> {}", part.len(), dist.join(", "), path.display());
    }
    Ok(())
}

fn train(a: TrainArgs) -> Result<()> {
    let DataFlags { length, lenient } = a.data;
    let train_set = with_classes(load(&a.train, length, lenient)?, a.classes)?;
    let val_set = with_classes(load(&a.val, length, lenient)?, a.classes)?;
    let config = train_config(&a.fit)?;
    let history_out = history_path(&a.fit, &a.out);
    echo("train config", &config);
    let model = build(a.arch, length, a.classes, config.seed)?;
    let (model, history) = train_with(model, &train_set, &val_set, &config, log_epoch)?;
    finish_training(&model, &history, &a.out, &history_out)
}

fn transfer(a: TransferArgs) -> Result<()> {
    let base = load_checkpoint(&a.base)?;
    let length = base.input_length();
    let train_set = with_classes(load(&a.train, length, a.lenient)?, a.classes)?;
    let val_set = with_classes(load(&a.val, length, a.lenient)?, a.classes)?;
    let config = TransferConfig {
        freeze_features: !a.unfreeze,
        train: train_config(&a.fit)?,
    };
    let history_out = history_path(&a.fit, &a.out);
    echo("transfer config", &config);
    let (model, history) = transfer_fit_with(base, &train_set, &val_set, &config, log_epoch)?;
    finish_training(&model, &history, &a.out, &history_out)
}

fn save_report(report: &Report, path: Option<&PathBuf>) -> Result<()> {
    print!("{report}");
    if let Some(p) = path {
        report.save(p)?;
        println!("report written to {}", p.display());
    }
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let model = load_checkpoint(&a.model)?;
    let test = with_model_labels(load(&a.test, model.input_length(), a.lenient)?, &model)?;
    let threads = threads_from_env();
    echo("eval config", &serde_json::json!({ "threads": threads, "beats": test.len() }));
    let evaluation = evaluate_with_threads(&model, &test, threads)?;
    let report = Report::new(a.model.display().to_string()).with_evaluation(&evaluation, model.label_names());
    save_report(&report, a.report.as_ref())
}

fn bench(a: BenchArgs) -> Result<()> {
    let model = load_checkpoint(&a.model)?;
    let test = load(&a.test, model.input_length(), a.lenient)?;
    let (throughput, _) = bench_throughput(&model, &test, a.batch, a.repeat)?;
    let report = Report::new(a.model.display().to_string()).with_throughput(throughput);
    save_report(&report, a.report.as_ref())
}

fn replay(a: ReplayArgs) -> Result<()> {
    let model = load_checkpoint(&a.model)?;
    let beats = load(&a.input, model.input_length(), a.lenient)?.signals();
    let latency = replay_stream(&model, &beats, a.rate)?;
    let report = Report::new(a.model.display().to_string()).with_latency(latency);
    save_report(&report, a.report.as_ref())
}

fn inspect(a: InspectArgs) -> Result<()> {
    let model = load_checkpoint(&a.checkpoint)?;
    let spec = model.spec();
    println!("arch: {}", model.arch());
    println!("input length: {}", model.input_length());
    println!("counted convs: {}", spec.counted_convs());
    println!("block filters: {:?}", spec.block_filters());
    println!("parameters: {}", model.parameter_count());
    println!("labels: {}", model.label_names().join(", "));
    Ok(())
}
