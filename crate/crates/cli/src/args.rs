use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use neuroq_core::trainer::{Algorithm, RunManifest, TrainConfig};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "neuroq",
    version,
    about = "Q-learning for Pac-Man with rule-biased exploration"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one agent per seed and write their logs under --out.
    Train(Box<TrainArgs>),
    /// Write the ILP task a logged learner call solved.
    DumpIlp(DumpArgs),
    /// Print a logged episode frame by frame.
    Replay(ReplayArgs),
    /// Parse maps and print a summary of each.
    ValidateMap(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// TOML file with any subset of the training configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Rerun an earlier experiment from its manifest (file or run directory).
    #[arg(long, conflicts_with = "config")]
    pub from_manifest: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated seed list.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Worker threads; one per seed by default.
    #[arg(long)]
    pub jobs: Option<usize>,

    #[arg(long, value_parser = parse_algorithm)]
    pub algo: Option<Algorithm>,
    /// Bundled map name (small, large) or a .lay file.
    #[arg(long)]
    pub map: Option<String>,
    #[arg(long)]
    pub episodes: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub sigma: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub rho_min: Option<f64>,
    #[arg(long)]
    pub rho_max: Option<f64>,

    #[arg(long)]
    pub chase_prob: Option<f64>,
    #[arg(long)]
    pub chase_radius: Option<u32>,
    #[arg(long)]
    pub scared_ticks: Option<u32>,
    #[arg(long)]
    pub max_steps: Option<u32>,

    #[arg(long)]
    pub max_rules: Option<usize>,
    #[arg(long)]
    pub node_budget: Option<u64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Seed of the learner's local-search fallback.
    #[arg(long)]
    pub learner_seed: Option<u64>,

    #[arg(long)]
    pub max_body: Option<usize>,
    #[arg(long)]
    pub d_min: Option<i64>,
    #[arg(long)]
    pub d_max: Option<i64>,
    /// Comma-separated body predicates of the mode bias.
    #[arg(long, value_delimiter = ',')]
    pub predicates: Option<Vec<String>>,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse()
}

#[derive(Debug, Args)]
pub struct DumpArgs {
    /// Run directory written by `train`.
    #[arg(long)]
    pub run: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Learner call to dump; 0 is the bootstrap call after the first episode.
    #[arg(long)]
    pub batch: usize,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub run: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// 1-based episode number.
    #[arg(long)]
    pub episode: usize,
    /// Print only the final frame.
    #[arg(long)]
    pub last: bool,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(required = true)]
    pub maps: Vec<String>,
}

/// A fully merged training request.
#[derive(Debug, Clone)]
pub struct TrainPlan {
    pub config: TrainConfig,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub jobs: usize,
}

impl TrainArgs {
    /// Layers flags over the config file (or manifest) over defaults.
    pub fn plan(&self) -> Result<TrainPlan, CliError> {
        let (mut cfg, mut seeds, mut out, mut have_map) = if let Some(path) = &self.from_manifest {
            let m = RunManifest::read(path).map_err(|e| CliError::Usage(e.to_string()))?;
            (m.config, Some(m.seeds), Some(m.out_dir), true)
        } else if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            let table: toml::Table = toml::from_str(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            let have_map = table.contains_key("map");
            let cfg: TrainConfig = table
                .try_into()
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            (cfg, None, None, have_map)
        } else {
            (TrainConfig::default(), None, None, false)
        };

        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = &self.$flag { cfg.$($field).+ = v.clone(); })*
            };
        }
        set!(
            algo => algorithm,
            episodes => episodes,
            batch_size => batch_size,
            sigma => sigma,
            alpha => alpha,
            gamma => gamma,
            epsilon => epsilon,
            rho_min => rho_min,
            rho_max => rho_max,
            chase_prob => env.chase_prob,
            chase_radius => env.chase_radius,
            scared_ticks => env.scared_ticks,
            max_steps => env.max_steps,
            max_rules => learner.max_rules,
            node_budget => learner.node_budget,
            restarts => learner.restarts,
            learner_seed => learner.seed,
            max_body => bias.max_body,
            d_min => bias.d_min,
            d_max => bias.d_max,
            predicates => bias.predicates,
        );
        if let Some(m) = &self.map {
            cfg.map = m.clone();
            have_map = true;
        }
        if !have_map {
            return Err(CliError::Usage(
                "no map given (use --map or set `map` in --config)".into(),
            ));
        }
        if let Some(s) = &self.seeds {
            seeds = Some(s.clone());
        }
        if let Some(o) = &self.out {
            out = Some(o.clone());
        }
        let seeds = seeds.unwrap_or_else(|| vec![cfg.seed]);
        if seeds.is_empty() {
            return Err(CliError::Usage("--seeds is empty".into()));
        }
        let out =
            out.ok_or_else(|| CliError::Usage("no output directory given (use --out)".into()))?;
        let jobs = self.jobs.unwrap_or(seeds.len());
        if jobs == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(TrainPlan {
            config: cfg,
            seeds,
            out,
            jobs,
        })
    }
}
