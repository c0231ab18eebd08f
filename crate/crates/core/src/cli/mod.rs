//! Experiment harness: trains (or loads) a model, applies gauges and writes
//! CSV/SVG reports. Exit codes: 0 ok, 1 I/O, 2 bad config or input,
//! 3 function not preserved, 4 numerical failure.

mod commands;
mod config;
mod report;
mod svg;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use commands::{
    cmd_compare, cmd_dynamics, cmd_sanity, cmd_sweep, cmd_train, cmd_whiten, dynamics_rows, load_dataset,
    sweep_medians, sweep_rows, Context, DynamicsRow, GaugeRow, Outcome, SweepMedian, DYNAMICS_PROBES,
    FULL_SPECTRUM_MAX_P, MAX_LOGIT_DIFF, WHITEN_GAUGES,
};
pub use config::{parse_config_text, read_config_file, DatasetSpec, RunConfig, KEYS};
pub use report::{fmt_f, median, Table};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Train,
    Sanity,
    Sweep,
    Whiten,
    Compare,
    Dynamics,
}

#[derive(Debug, Parser)]
#[command(name = "gaugelens", version, about = "Gauge freedom experiments on a one-hidden-layer MLP")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Train a model and save `model.ckpt` and `train.csv`
    Train(Args),
    /// One gauge: function check and cosine distortion
    Sanity(Args),
    /// Distortion metrics over the kappa grid and seeds
    Sweep(Args),
    /// Whitening spectrum and canonical-cosine invariance
    Whiten(Args),
    /// Cosine change versus CKA and SVCCA across the kappa grid
    Compare(Args),
    /// Representation Jacobian, pullback metric and gauge laws
    Dynamics(Args),
}

/// Config file plus per-key overrides; flags win over the file.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Args {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "blobs|csv:PATH")]
    pub dataset: Option<String>,
    #[arg(long = "d_in", alias = "d-in")]
    pub d_in: Option<String>,
    #[arg(long)]
    pub classes: Option<String>,
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub spread: Option<String>,
    #[arg(long = "d_h", alias = "d-h")]
    pub d_h: Option<String>,
    #[arg(long)]
    pub epochs: Option<String>,
    #[arg(long)]
    pub lr: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long, value_name = "LIST")]
    pub kappa: Option<String>,
    #[arg(long)]
    pub seeds: Option<String>,
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long)]
    pub workers: Option<String>,
    #[arg(long)]
    pub energy: Option<String>,
    #[arg(long = "sanity_kappa", alias = "sanity-kappa")]
    pub sanity_kappa: Option<String>,
    #[arg(long)]
    pub omega: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
}

impl Args {
    fn overrides(&self) -> [(&'static str, &Option<String>); 19] {
        [
            ("dataset", &self.dataset),
            ("d_in", &self.d_in),
            ("classes", &self.classes),
            ("n", &self.n),
            ("spread", &self.spread),
            ("d_h", &self.d_h),
            ("epochs", &self.epochs),
            ("lr", &self.lr),
            ("seed", &self.seed),
            ("kind", &self.kind),
            ("kappa", &self.kappa),
            ("seeds", &self.seeds),
            ("k", &self.k),
            ("out", &self.out),
            ("workers", &self.workers),
            ("energy", &self.energy),
            ("sanity_kappa", &self.sanity_kappa),
            ("omega", &self.omega),
            ("model", &self.model),
        ]
    }

    pub fn resolve(&self) -> crate::Result<RunConfig> {
        let mut entries = match &self.config {
            Some(path) => read_config_file(path)?,
            None => BTreeMap::new(),
        };
        for (key, value) in self.overrides() {
            if let Some(v) = value {
                entries.insert(key.to_string(), v.clone());
            }
        }
        RunConfig::from_entries(&entries)
    }
}

impl Sub {
    pub fn split(&self) -> (Command, &Args) {
        match self {
            Sub::Train(a) => (Command::Train, a),
            Sub::Sanity(a) => (Command::Sanity, a),
            Sub::Sweep(a) => (Command::Sweep, a),
            Sub::Whiten(a) => (Command::Whiten, a),
            Sub::Compare(a) => (Command::Compare, a),
            Sub::Dynamics(a) => (Command::Dynamics, a),
        }
    }
}

pub fn execute(command: Command, cfg: &RunConfig) -> crate::Result<Outcome> {
    match command {
        Command::Train => cmd_train(cfg),
        Command::Sanity => cmd_sanity(cfg),
        Command::Sweep => cmd_sweep(cfg),
        Command::Whiten => cmd_whiten(cfg),
        Command::Compare => cmd_compare(cfg),
        Command::Dynamics => cmd_dynamics(cfg),
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. } => 1,
        Error::InvarianceViolation(_) => 3,
        e if e.is_numerical() => 4,
        _ => 2,
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (command, args) = cli.command.split();
    let result = args.resolve().and_then(|cfg| execute(command, &cfg));
    match result {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "seed = 3\nk = 5\n").unwrap();
        let cli = Cli::try_parse_from([
            "gaugelens",
            "sweep",
            "--config",
            path.to_str().unwrap(),
            "--k",
            "7",
            "--kappa",
            "1,4",
        ])
        .unwrap();
        let (cmd, args) = cli.command.split();
        assert_eq!(cmd, Command::Sweep);
        let cfg = args.resolve().unwrap();
        assert_eq!((cfg.seed, cfg.k), (3, 7));
        assert_eq!(cfg.kappas, vec![1.0, 4.0]);
    }

    #[test]
    fn every_key_has_a_flag() {
        let args = Args::default();
        let names: Vec<&str> = args.overrides().iter().map(|(k, _)| *k).collect();
        let keys: Vec<&str> = KEYS.iter().map(|(k, _)| *k).collect();
        assert_eq!(names, keys);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::InvarianceViolation("x".into())), 3);
        assert_eq!(exit_code(&Error::TrainingDiverged { epoch: 1 }), 4);
        assert_eq!(
            exit_code(&Error::Io { path: "p".into(), source: std::io::Error::other("x") }),
            1
        );
        assert_eq!(run(["gaugelens", "sweep", "--kappa", "0.5"]), 2);
        assert_eq!(run(["gaugelens", "bogus"]), 2);
    }
}
