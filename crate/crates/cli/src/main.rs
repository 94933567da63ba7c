use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use iaml_cli::commands::{
    cmd_augment, cmd_dist, cmd_eval, cmd_sweep, cmd_train, AugmentArgs, DistArgs, EvalArgs,
    SweepArgs, TrainArgs,
};

/// IoU-augmented maximum likelihood data smoothing for GUI-element
/// coordinate prediction: augment bounding-box training data through an
/// IoU-based payoff distribution, evaluate predictions at IoU thresholds,
/// inspect the payoff distribution, and run the desk-scale training
/// benchmark.
#[derive(Parser)]
#[command(name = "iaml", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Augment a JSONL annotation dataset with payoff-sampled replicas.
    Augment(AugmentArgs),
    /// Score predictions against ground truth (P/R/F1 or click accuracy).
    Eval(EvalArgs),
    /// Tabulate the payoff distribution of one box across temperatures.
    Dist(DistArgs),
    /// Train the synthetic coordinate-token benchmark once.
    Train(TrainArgs),
    /// Grid comparison of IAML against the MLE baseline.
    Sweep(SweepArgs),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let result = match &cli.command {
        Command::Augment(args) => cmd_augment(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Dist(args) => cmd_dist(args),
        Command::Train(args) => cmd_train(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
