//! Subcommand implementations behind the `iaml` binary.
//!
//! Conventions shared by every subcommand: flags win over `--config` file
//! values which win over built-in defaults (the `IAML_SEED` environment
//! variable supplies the default seed only); the fully-resolved configuration
//! is printed to standard error as one `resolved-config {...}` line; file
//! outputs are written to a temp sibling and renamed, so failed runs leave no
//! partial files; exit codes are 0 success, 1 validation error, 2 I/O error.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde_json::json;

use iaml_core::geometry::BBox;
use iaml_core::payoff::bin_payoff;
use iaml_core::sampler::{collect_bins, AugmentationConfig, RngStream, Strategy};
use iaml_core::toy::train::{
    run_sweep_cell, sweep_cells, train, LossKind, SweepGrid, SweepRow, TrainConfig, TrainOutcome,
};

use crate::dataset_io::{self, AugmentOptions, DatasetError};
use crate::report::{evaluate_files, EvalMode};

#[derive(Debug)]
pub enum CmdError {
    Validation(String),
    Io(String),
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmdError::Validation(msg) => write!(f, "{msg}"),
            CmdError::Io(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CmdError {}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Validation(_) => 1,
            CmdError::Io(_) => 2,
        }
    }
}

impl From<DatasetError> for CmdError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Validation(msg) => CmdError::Validation(msg),
            DatasetError::Io(err) => CmdError::Io(err.to_string()),
        }
    }
}

fn invalid(msg: impl Into<String>) -> CmdError {
    CmdError::Validation(msg.into())
}

/// Optional JSON config file merged under explicit flags.
#[derive(Default)]
struct FileConfig(serde_json::Map<String, serde_json::Value>);

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<Self, CmdError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CmdError::Io(format!("{}: {e}", path.display())))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| invalid(format!("{}: not valid JSON: {e}", path.display())))?;
        match value {
            serde_json::Value::Object(map) => Ok(Self(map)),
            _ => Err(invalid(format!(
                "{}: config file must hold a JSON object",
                path.display()
            ))),
        }
    }

    fn f64(&self, key: &str) -> Option<f64> {
        self.0.get(key).and_then(|v| v.as_f64())
    }

    fn u64(&self, key: &str) -> Option<u64> {
        self.0.get(key).and_then(|v| v.as_u64())
    }

    fn string(&self, key: &str) -> Option<String> {
        self.0.get(key).and_then(|v| v.as_str()).map(String::from)
    }
}

fn env_seed() -> Option<u64> {
    std::env::var("IAML_SEED").ok().and_then(|s| s.parse().ok())
}

fn resolve_seed(flag: Option<u64>, file: &FileConfig) -> u64 {
    flag.or_else(|| file.u64("seed"))
        .or_else(env_seed)
        .unwrap_or(0)
}

fn parse_f64_list(s: &str, what: &str) -> Result<Vec<f64>, CmdError> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| invalid(format!("{what}: cannot parse '{p}' as a number")))
        })
        .collect()
}

fn parse_u32_list(s: &str, what: &str) -> Result<Vec<u32>, CmdError> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<u32>()
                .map_err(|_| invalid(format!("{what}: cannot parse '{p}' as an integer")))
        })
        .collect()
}

fn parse_strategy(s: &str) -> Result<Strategy, CmdError> {
    match s {
        "iaml" => Ok(Strategy::IouPayoff),
        "random" => Ok(Strategy::UniformNoise),
        other => Err(invalid(format!(
            "unknown strategy '{other}' (expected iaml or random)"
        ))),
    }
}

fn print_resolved(config: serde_json::Value) {
    eprintln!("resolved-config {config}");
}

// ---------------------------------------------------------------------------
// augment
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct AugmentArgs {
    /// Input annotation JSONL.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output augmented JSONL (a .manifest.json sibling is written too).
    #[arg(long)]
    pub out: PathBuf,
    /// Max coordinate deviation in normalized units.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Payoff temperature.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Monte Carlo iterations per box.
    #[arg(long)]
    pub trials: Option<u32>,
    /// Replicas per record, original included.
    #[arg(long)]
    pub k: Option<u32>,
    /// Master seed for all sampling streams.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sampling strategy: iaml (payoff-weighted) or random (uniform noise).
    #[arg(long)]
    pub strategy: Option<String>,
    /// Skip records whose augmentation fails instead of aborting.
    #[arg(long)]
    pub skip_bad: bool,
    /// Augment only a deterministic subsample of the records.
    #[arg(long)]
    pub fraction: Option<f64>,
    /// Seed of the subsample draw (defaults to the master seed).
    #[arg(long)]
    pub subsample_seed: Option<u64>,
    /// Worker threads for the per-record fan-out.
    #[arg(long)]
    pub workers: Option<usize>,
    /// JSON config file merged under explicit flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn cmd_augment(args: &AugmentArgs) -> Result<(), CmdError> {
    let file = FileConfig::load(args.config.as_deref())?;
    let defaults = AugmentationConfig::default();
    let cfg = AugmentationConfig {
        epsilon: args.epsilon.or_else(|| file.f64("epsilon")).unwrap_or(defaults.epsilon),
        tau: args.tau.or_else(|| file.f64("tau")).unwrap_or(defaults.tau),
        n_trials: args
            .trials
            .or_else(|| file.u64("trials").map(|v| v as u32))
            .unwrap_or(defaults.n_trials),
        k_replicas: args
            .k
            .or_else(|| file.u64("k").map(|v| v as u32))
            .unwrap_or(defaults.k_replicas),
        master_seed: resolve_seed(args.seed, &file),
    };
    cfg.validate().map_err(|e| invalid(e.to_string()))?;
    let strategy_str = args
        .strategy
        .clone()
        .or_else(|| file.string("strategy"))
        .unwrap_or_else(|| "iaml".to_string());
    let strategy = parse_strategy(&strategy_str)?;
    let fraction = args.fraction.or_else(|| file.f64("fraction")).unwrap_or(1.0);
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(invalid("fraction must be in (0, 1]"));
    }
    let subsample_seed = args.subsample_seed.unwrap_or(cfg.master_seed);
    let workers = args
        .workers
        .or_else(|| file.u64("workers").map(|v| v as usize))
        .unwrap_or(1)
        .max(1);

    print_resolved(json!({
        "command": "augment",
        "in": args.input.display().to_string(),
        "out": args.out.display().to_string(),
        "epsilon": cfg.epsilon,
        "tau": cfg.tau,
        "trials": cfg.n_trials,
        "k": cfg.k_replicas,
        "seed": cfg.master_seed,
        "strategy": strategy_str,
        "skip_bad": args.skip_bad,
        "fraction": fraction,
        "subsample_seed": subsample_seed,
        "workers": workers,
    }));

    let records = dataset_io::load_records(&args.input)?;
    let records = if fraction < 1.0 {
        dataset_io::subsample(&records, fraction, subsample_seed)
    } else {
        records
    };
    let opts = AugmentOptions {
        strategy,
        skip_bad: args.skip_bad,
        workers,
    };
    dataset_io::write_augmented(&records, &cfg, &args.input, &args.out, &opts)?;
    println!("{}", dataset_io::manifest_path_for(&args.out).display());
    Ok(())
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Prediction JSONL.
    #[arg(long)]
    pub pred: PathBuf,
    /// Ground-truth annotation JSONL.
    #[arg(long)]
    pub gt: PathBuf,
    /// Comma-separated IoU thresholds.
    #[arg(long)]
    pub thresholds: Option<String>,
    /// Write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write one CSV row per (record, threshold) here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// elements (P/R/F across the action space) or click (point-in-box).
    #[arg(long)]
    pub mode: Option<String>,
    /// Score despite missing/unknown record ids (they are flagged).
    #[arg(long)]
    pub allow_missing: bool,
    /// Match on geometry alone, ignoring element types.
    #[arg(long)]
    pub geometry_only: bool,
    /// JSON config file merged under explicit flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn cmd_eval(args: &EvalArgs) -> Result<(), CmdError> {
    let file = FileConfig::load(args.config.as_deref())?;
    let thresholds_str = args
        .thresholds
        .clone()
        .or_else(|| file.string("thresholds"))
        .unwrap_or_else(|| "0.1,0.3,0.5,0.7".to_string());
    let thresholds = parse_f64_list(&thresholds_str, "--thresholds")?;
    if thresholds.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(invalid("thresholds must lie in [0, 1]"));
    }
    let mode_str = args
        .mode
        .clone()
        .or_else(|| file.string("mode"))
        .unwrap_or_else(|| "elements".to_string());
    let mode = EvalMode::parse(&mode_str)
        .ok_or_else(|| invalid(format!("unknown mode '{mode_str}' (elements or click)")))?;

    print_resolved(json!({
        "command": "eval",
        "pred": args.pred.display().to_string(),
        "gt": args.gt.display().to_string(),
        "thresholds": thresholds,
        "mode": mode.name(),
        "allow_missing": args.allow_missing,
        "geometry_only": args.geometry_only,
    }));

    let out = evaluate_files(
        &args.pred,
        &args.gt,
        &thresholds,
        mode,
        args.allow_missing,
        args.geometry_only,
    )?;
    if let Some(path) = &args.out {
        let body = serde_json::to_string_pretty(&out.report)
            .expect("report serialization cannot fail");
        dataset_io::atomic_write(path, body.as_bytes())?;
    }
    if let Some(path) = &args.csv {
        dataset_io::atomic_write(path, out.per_record_csv.as_bytes())?;
    }
    print!("{}", out.table);
    Ok(())
}

// ---------------------------------------------------------------------------
// dist
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct DistArgs {
    /// Ground-truth box as x_min,y_min,x_max,y_max.
    #[arg(long = "box")]
    pub bbox: String,
    /// Max coordinate deviation of the perturbations.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Comma-separated temperatures to tabulate.
    #[arg(long = "tau-list")]
    pub tau_list: Option<String>,
    /// Perturbation pool size.
    #[arg(long)]
    pub trials: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output histogram CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// JSON config file merged under explicit flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn cmd_dist(args: &DistArgs) -> Result<(), CmdError> {
    let file = FileConfig::load(args.config.as_deref())?;
    let coords = parse_f64_list(&args.bbox, "--box")?;
    if coords.len() != 4 {
        return Err(invalid("--box needs exactly four comma-separated values"));
    }
    let bbox = BBox::new(coords[0], coords[1], coords[2], coords[3])
        .map_err(|e| invalid(format!("--box {}: {e}", args.bbox)))?;
    let epsilon = args.epsilon.or_else(|| file.f64("epsilon")).unwrap_or(0.05);
    let taus = parse_f64_list(
        &args
            .tau_list
            .clone()
            .or_else(|| file.string("tau_list"))
            .unwrap_or_else(|| "1,3,6".to_string()),
        "--tau-list",
    )?;
    if taus.iter().any(|t| *t <= 0.0) {
        return Err(invalid("temperatures must be positive"));
    }
    let trials = args
        .trials
        .or_else(|| file.u64("trials").map(|v| v as u32))
        .unwrap_or(10_000);
    let seed = resolve_seed(args.seed, &file);

    print_resolved(json!({
        "command": "dist",
        "box": coords,
        "epsilon": epsilon,
        "tau_list": taus,
        "trials": trials,
        "seed": seed,
        "out": args.out.display().to_string(),
    }));

    // One shared perturbation pool; each temperature reweights it.
    let mut rng = RngStream::from_seed_value(seed);
    let bins = collect_bins(&bbox, epsilon, trials, &mut rng)
        .map_err(|e| invalid(e.to_string()))?;
    let mut csv = String::from("tau,i_r,count,probability\n");
    for &tau in &taus {
        let dist = bin_payoff(&bins, tau).map_err(|e| invalid(e.to_string()))?;
        for (idx, p) in dist.support().iter().zip(dist.probs()) {
            let count = bins.candidates(*idx).map(|c| c.len()).unwrap_or(0);
            csv.push_str(&format!("{tau},{},{count},{p}\n", idx.value()));
        }
    }
    dataset_io::atomic_write(&args.out, csv.as_bytes())?;
    println!("{}", args.out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

/// Knobs shared by `train` and `sweep`.
#[derive(Args, Debug, Clone)]
pub struct TrainBaseArgs {
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub trials: Option<u32>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long = "train-screens")]
    pub train_screens: Option<usize>,
    #[arg(long = "test-screens")]
    pub test_screens: Option<usize>,
    /// Elements per synthetic screen.
    #[arg(long)]
    pub elements: Option<usize>,
    /// Feature noise level sigma_f.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub thresholds: Option<String>,
    /// JSON config file merged under explicit flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct TrainArgs {
    /// Loss family member: mle, iaml, weighted, random-noise.
    #[arg(long)]
    pub loss: Option<String>,
    /// Replica/epoch parity knob k (MLE epochs; replica count otherwise).
    #[arg(long)]
    pub k: Option<u32>,
    /// Alias of --k, named for the MLE reading.
    #[arg(long)]
    pub epochs: Option<u32>,
    /// Training-set fraction in (0, 1].
    #[arg(long)]
    pub fraction: Option<f64>,
    /// Output directory for train_log.jsonl, report.json, params.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub base: TrainBaseArgs,
}

fn build_train_config(
    base: &TrainBaseArgs,
    loss: Option<&str>,
    k: Option<u32>,
    fraction: Option<f64>,
    file: &FileConfig,
) -> Result<(TrainConfig, u64), CmdError> {
    let defaults = TrainConfig::default();
    let loss_str = loss
        .map(String::from)
        .or_else(|| file.string("loss"))
        .unwrap_or_else(|| "mle".to_string());
    let loss = LossKind::parse(&loss_str).ok_or_else(|| {
        invalid(format!(
            "unknown loss '{loss_str}' (mle, iaml, weighted, random-noise)"
        ))
    })?;
    let k = k
        .or_else(|| file.u64("k").map(|v| v as u32))
        .unwrap_or(defaults.aug.k_replicas);
    let seed = resolve_seed(base.seed, file);
    let thresholds = parse_f64_list(
        &base
            .thresholds
            .clone()
            .or_else(|| file.string("thresholds"))
            .unwrap_or_else(|| "0.1,0.3,0.5,0.7".to_string()),
        "--thresholds",
    )?;

    // One user-facing seed fans out into the three independent streams.
    let cfg = TrainConfig {
        loss,
        aug: AugmentationConfig {
            epsilon: base.epsilon.or_else(|| file.f64("epsilon")).unwrap_or(defaults.aug.epsilon),
            tau: base.tau.or_else(|| file.f64("tau")).unwrap_or(defaults.aug.tau),
            n_trials: base
                .trials
                .or_else(|| file.u64("trials").map(|v| v as u32))
                .unwrap_or(defaults.aug.n_trials),
            k_replicas: k,
            master_seed: seed ^ 0x6175_675f_7365_6564,
        },
        learning_rate: base.lr.or_else(|| file.f64("lr")).unwrap_or(defaults.learning_rate),
        batch_size: base
            .batch
            .or_else(|| file.u64("batch").map(|v| v as usize))
            .unwrap_or(defaults.batch_size),
        train_screens: base
            .train_screens
            .or_else(|| file.u64("train_screens").map(|v| v as usize))
            .unwrap_or(defaults.train_screens),
        test_screens: base
            .test_screens
            .or_else(|| file.u64("test_screens").map(|v| v as usize))
            .unwrap_or(defaults.test_screens),
        elements_per_screen: base
            .elements
            .or_else(|| file.u64("elements").map(|v| v as usize))
            .unwrap_or(defaults.elements_per_screen),
        feature_noise: base.noise.or_else(|| file.f64("noise")).unwrap_or(defaults.feature_noise),
        hidden: base
            .hidden
            .or_else(|| file.u64("hidden").map(|v| v as usize))
            .unwrap_or(defaults.hidden),
        data_seed: seed,
        init_seed: seed ^ 0x696e_6974_5f73_6565,
        data_fraction: fraction.or_else(|| file.f64("fraction")).unwrap_or(1.0),
        thresholds,
    };
    Ok((cfg, seed))
}

fn train_config_json(cfg: &TrainConfig, seed: u64) -> serde_json::Value {
    json!({
        "loss": cfg.loss.name(),
        "k": cfg.aug.k_replicas,
        "epsilon": cfg.aug.epsilon,
        "tau": cfg.aug.tau,
        "trials": cfg.aug.n_trials,
        "lr": cfg.learning_rate,
        "batch": cfg.batch_size,
        "train_screens": cfg.train_screens,
        "test_screens": cfg.test_screens,
        "elements": cfg.elements_per_screen,
        "noise": cfg.feature_noise,
        "hidden": cfg.hidden,
        "fraction": cfg.data_fraction,
        "seed": seed,
        "thresholds": cfg.thresholds,
    })
}

fn train_report_json(outcome: &TrainOutcome) -> serde_json::Value {
    json!({
        "steps": outcome.report.steps,
        "final_loss": outcome.report.final_loss,
        "click_accuracy": outcome.report.click_accuracy,
        "thresholds": outcome.report.thresholds.iter().map(|t| json!({
            "threshold": t.threshold,
            "matched": t.matched,
            "n_pred": t.n_pred,
            "n_gt": t.n_gt,
            "precision": t.precision,
            "recall": t.recall,
            "f1": t.f1,
            "macro_precision": t.macro_precision,
            "macro_recall": t.macro_recall,
            "macro_f1": t.macro_f1,
        })).collect::<Vec<_>>(),
    })
}

fn train_table(outcome: &TrainOutcome) -> String {
    let mut s = format!(
        "steps\t{}\nfinal_loss\t{:.6}\nclick_accuracy\t{:.4}\n",
        outcome.report.steps, outcome.report.final_loss, outcome.report.click_accuracy
    );
    s.push_str("threshold\tprecision\trecall\tf1\n");
    for t in &outcome.report.thresholds {
        s.push_str(&format!(
            "{:.2}\t{:.4}\t{:.4}\t{:.4}\n",
            t.threshold, t.precision, t.recall, t.f1
        ));
    }
    s
}

pub fn cmd_train(args: &TrainArgs) -> Result<(), CmdError> {
    let file = FileConfig::load(args.base.config.as_deref())?;
    if let (Some(a), Some(b)) = (args.k, args.epochs) {
        if a != b {
            return Err(invalid("--k and --epochs disagree; pass only one"));
        }
    }
    let (cfg, seed) = build_train_config(
        &args.base,
        args.loss.as_deref(),
        args.k.or(args.epochs),
        args.fraction,
        &file,
    )?;
    let mut resolved = train_config_json(&cfg, seed);
    resolved["command"] = json!("train");
    print_resolved(resolved);

    let outcome = train(&cfg).map_err(|e| invalid(e.to_string()))?;

    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).map_err(|e| CmdError::Io(format!("{}: {e}", dir.display())))?;
        let mut log = String::new();
        for entry in &outcome.log {
            log.push_str(&format!(
                "{{\"step\":{},\"loss\":{},\"seed\":{}}}\n",
                entry.step, entry.loss, seed
            ));
        }
        dataset_io::atomic_write(&dir.join("train_log.jsonl"), log.as_bytes())?;

        let mut report = train_report_json(&outcome);
        report["config"] = train_config_json(&cfg, seed);
        dataset_io::atomic_write(
            &dir.join("report.json"),
            serde_json::to_string_pretty(&report).unwrap().as_bytes(),
        )?;

        // Named flat arrays, portable across implementations.
        let mut arrays = serde_json::Map::new();
        for (name, off, len) in outcome.model.param_layout() {
            arrays.insert(
                name.to_string(),
                json!(outcome.model.params()[off..off + len].to_vec()),
            );
        }
        let model_cfg = outcome.model.config();
        let params = json!({
            "config": {
                "features_per_element": model_cfg.features_per_element,
                "hidden": model_cfg.hidden,
                "n_tokens": model_cfg.n_tokens,
                "n_positions": model_cfg.n_positions,
            },
            "arrays": arrays,
        });
        dataset_io::atomic_write(
            &dir.join("params.json"),
            serde_json::to_string(&params).unwrap().as_bytes(),
        )?;
    }

    print!("{}", train_table(&outcome));
    Ok(())
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Comma-separated temperatures.
    #[arg(long)]
    pub taus: Option<String>,
    /// Comma-separated replica counts k.
    #[arg(long)]
    pub ks: Option<String>,
    /// Comma-separated training-set fractions.
    #[arg(long)]
    pub fractions: Option<String>,
    /// Seeds (replicates) per cell.
    #[arg(long)]
    pub seeds: Option<u32>,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads across sweep cells.
    #[arg(long)]
    pub workers: Option<usize>,
    #[command(flatten)]
    pub base: TrainBaseArgs,
}

fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut csv = String::from("method,tau,k,fraction,threshold,mean_f1,sd_f1,mean_click,n_seeds\n");
    for r in rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.method, r.tau, r.k, r.fraction, r.threshold, r.mean_f1, r.sd_f1, r.mean_click, r.n_seeds
        ));
    }
    csv
}

fn sweep_table(rows: &[SweepRow]) -> String {
    let mut s = String::from("method\ttau\tk\tfraction\tthreshold\tmean_f1\tsd_f1\tmean_click\n");
    for r in rows {
        s.push_str(&format!(
            "{}\t{}\t{}\t{}\t{:.2}\t{:.4}\t{:.4}\t{:.4}\n",
            r.method, r.tau, r.k, r.fraction, r.threshold, r.mean_f1, r.sd_f1, r.mean_click
        ));
    }
    s
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<(), CmdError> {
    let file = FileConfig::load(args.base.config.as_deref())?;
    let (base_cfg, seed) = build_train_config(&args.base, None, None, None, &file)?;
    let taus = parse_f64_list(
        &args.taus.clone().or_else(|| file.string("taus")).unwrap_or_else(|| "1,3,6".to_string()),
        "--taus",
    )?;
    let ks = parse_u32_list(
        &args.ks.clone().or_else(|| file.string("ks")).unwrap_or_else(|| "4".to_string()),
        "--ks",
    )?;
    let fractions = parse_f64_list(
        &args
            .fractions
            .clone()
            .or_else(|| file.string("fractions"))
            .unwrap_or_else(|| "0.1,1.0".to_string()),
        "--fractions",
    )?;
    let n_seeds = args
        .seeds
        .or_else(|| file.u64("seeds").map(|v| v as u32))
        .unwrap_or(5);
    if n_seeds == 0 {
        return Err(invalid("--seeds must be at least 1"));
    }
    let workers = args.workers.unwrap_or(1).max(1);

    print_resolved(json!({
        "command": "sweep",
        "taus": taus,
        "ks": ks,
        "fractions": fractions,
        "seeds": n_seeds,
        "workers": workers,
        "base": train_config_json(&base_cfg, seed),
        "out": args.out.display().to_string(),
    }));

    let grid = SweepGrid {
        taus,
        ks,
        fractions,
        n_seeds,
        base: base_cfg,
    };
    let cells = sweep_cells(&grid);
    for cell in &cells {
        for s in 0..n_seeds {
            eprintln!(
                "run\tmethod={}\ttau={}\tk={}\tfraction={}\tseed={s}",
                cell.method.name(),
                cell.tau,
                cell.k,
                cell.fraction
            );
        }
    }
    let results: Vec<Result<Vec<SweepRow>, CmdError>> = if workers > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| invalid(format!("worker pool: {e}")))?;
        pool.install(|| {
            cells
                .par_iter()
                .map(|cell| {
                    run_sweep_cell(&grid.base, cell, n_seeds).map_err(|e| invalid(e.to_string()))
                })
                .collect()
        })
    } else {
        cells
            .iter()
            .map(|cell| run_sweep_cell(&grid.base, cell, n_seeds).map_err(|e| invalid(e.to_string())))
            .collect()
    };
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }

    dataset_io::atomic_write(&args.out, sweep_csv(&rows).as_bytes())?;
    print!("{}", sweep_table(&rows));
    Ok(())
}
