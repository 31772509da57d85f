use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use lapoleaf::bench::{run_bench, DEFAULT_SIZES};
use lapoleaf::dataset::{load_csv, read_feature_rows};
use lapoleaf::lodog::forest_to_dot;
use lapoleaf::metrics::{accuracy, sse};
use lapoleaf::model::ForestDocument;
use lapoleaf::{Config, Dataset, Error, Label, Model, Result};

/// Semi-supervised label propagation on an optimal leading forest.
#[derive(Parser)]
#[command(name = "lapoleaf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// CSV data file
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// Model JSON file
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Seed for the synthetic generators, overriding the config
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model and label the unlabeled rows
    Fit,
    /// Label the rows of a CSV file one after another without saving the model
    Predict,
    /// Insert the rows of a CSV file into a model and save it
    Add,
    /// Time the pipeline against the iterative baseline on synthetic data
    Bench,
    /// Write the forest as Graphviz DOT and JSON
    Export,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 1 })
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let mut config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    fs::create_dir_all(&cli.out).map_err(|e| io_error(&cli.out, e))?;
    match cli.command {
        Command::Fit => fit(cli, &config),
        Command::Predict => insert_rows(cli, false),
        Command::Add => insert_rows(cli, true),
        Command::Bench => bench(cli, &config),
        Command::Export => export(cli),
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.to_owned(),
        source: e,
    }
}

fn required<'a>(value: &'a Option<PathBuf>, flag: &str) -> Result<&'a PathBuf> {
    value
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter(format!("--{flag} is required")))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| io_error(path, e))
}

fn label_text(data: &Dataset, label: Label) -> String {
    match label {
        Label::Class(c) => data.class_name(c),
        Label::Value(v) => v.to_string(),
    }
}

fn write_predictions(path: &Path, model: &Model, rows: &[(usize, usize)]) -> Result<()> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut wtr = csv::Writer::from_writer(BufWriter::new(file));
    let width = model.label_state().width();
    let mut header = vec!["index".to_string(), "label".to_string()];
    header.extend((0..width).map(|k| format!("soft_{k}")));
    wtr.write_record(&header)?;
    for &(index, point) in rows {
        let mut rec = vec![
            index.to_string(),
            label_text(model.dataset(), model.predictions()[point]),
        ];
        rec.extend(model.label_state().row(point).iter().map(|v| v.to_string()));
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(|e| io_error(path, e))
}

fn fit(cli: &Cli, config: &Config) -> Result<()> {
    let (data, truth) = match (&cli.data, &config.synthetic) {
        (Some(path), _) => {
            let data = load_csv(path, &config.schema())?;
            let truth = match config.truth_schema(Some(data.class_names().to_vec())) {
                Some(schema) => load_csv(path, &schema)?.labels().to_vec(),
                None => vec![None; data.len()],
            };
            (data, truth)
        }
        (None, Some(synthetic)) => synthetic.generate(config.seed)?,
        (None, None) => {
            return Err(Error::InvalidParameter(
                "--data is required unless the config names a synthetic generator".into(),
            ))
        }
    };

    let (model, report) = Model::fit(&data, config.params)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    model.save(cli.out.join("model.json"))?;

    let rows: Vec<(usize, usize)> = report.row_map.iter().copied().enumerate().collect();
    write_predictions(&cli.out.join("predictions.csv"), &model, &rows)?;

    // held-out rows: unlabeled in the input, known in the truth column
    let (mut predicted, mut held_out) = (Vec::new(), Vec::new());
    for (raw, &point) in report.row_map.iter().enumerate() {
        if data.label(raw).is_none() && truth[raw].is_some() {
            predicted.push(model.predictions()[point]);
            held_out.push(truth[raw]);
        }
    }
    let t = report.timings;
    let metrics = json!({
        "rows": data.len(),
        "points": model.len(),
        "labeled": data.labeled_count(),
        "held_out": held_out.len(),
        "granules": model.forest().n_subtrees(),
        "cutoff_distance": model.cutoff(),
        "distance_evaluations": model.distances().eval_count(),
        "accuracy": accuracy(&predicted, &held_out),
        "sse": sse(&predicted, &held_out),
        "timings": {
            "preprocessing_s": t.preprocessing_s,
            "distance_s": t.distance_s,
            "oleaf_s": t.oleaf_s,
            "propagation_s": t.propagation_s,
        },
    });
    write_json(&cli.out.join("metrics.json"), &metrics)?;
    println!("{}", serde_json::to_string(&metrics)?);
    Ok(())
}

fn insert_rows(cli: &Cli, save: bool) -> Result<()> {
    let model_path = required(&cli.model, "model")?;
    let data_path = required(&cli.data, "data")?;
    let mut model = Model::load(model_path)?;
    let file = File::open(data_path).map_err(|e| io_error(data_path, e))?;
    let rows = read_feature_rows(file, model.dataset().feature_names())?;

    let mut points = Vec::with_capacity(rows.len());
    for (index, x) in rows.iter().enumerate() {
        let (ins, label) = model.predict_new_at(x)?;
        points.push((index, ins.index));
        if save {
            println!("{index},{}", label_text(model.dataset(), label));
        }
    }
    if !save {
        return write_predictions(&cli.out.join("predictions.csv"), &model, &points);
    }
    let target = if cli.out == Path::new(".") {
        model_path.clone()
    } else {
        cli.out.join("model.json")
    };
    model.save(target)
}

fn bench(cli: &Cli, config: &Config) -> Result<()> {
    let rows = run_bench(&config.params, config.seed, &DEFAULT_SIZES)?;
    println!(
        "{:>6} {:>12} {:>9} {:>12} {:>9} {:>12} {:>10} {:>9}",
        "n", "dist evals", "granules", "prop (s)", "acc", "base (s)", "base iter", "base acc"
    );
    for r in &rows {
        println!(
            "{:>6} {:>12} {:>9} {:>12.3e} {:>9.4} {:>12.3e} {:>10} {:>9.4}",
            r.n,
            r.distance_evaluations,
            r.granules,
            r.propagation_s,
            r.accuracy,
            r.baseline_s,
            r.baseline_iterations,
            r.baseline_accuracy
        );
    }
    write_json(&cli.out.join("bench.json"), &serde_json::to_value(&rows)?)
}

fn export(cli: &Cli) -> Result<()> {
    let model = Model::load(required(&cli.model, "model")?)?;
    let dot = forest_to_dot(model.tree(), model.forest());
    let path = cli.out.join("forest.dot");
    fs::write(&path, dot).map_err(|e| io_error(&path, e))?;
    let doc = ForestDocument::new(model.tree(), model.forest());
    write_json(&cli.out.join("forest.json"), &serde_json::to_value(&doc)?)
}
