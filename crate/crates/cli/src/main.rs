use std::path::PathBuf;
use std::process::ExitCode;

use cascade_motifs::pipeline::{run, Command, RunConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cascade-motifs", version, about = "Temporal motif analysis of information cascades")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Generate a synthetic corpus with ground truth into OUT/synth
    Synth,
    /// Parse, filter and classify inputs into OUT/ingest/corpus.json
    Ingest,
    /// Lifecycle, censuses, z-scores and transitions into OUT/analyze
    Analyze,
    /// Cross-validated edge-count models into OUT/predict
    Predict,
    /// Fit the inhibition thresholds to labels into OUT/calibrate
    Calibrate,
    /// Markdown summary of every stage into OUT/report
    Report,
}

#[derive(Args)]
struct Opts {
    /// TOML run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads, 0 for all cores
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output root shared by all stages
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Cascade log `cascade_id,source,target,time`
    #[arg(long, global = true)]
    cascades: Option<PathBuf>,
    /// Historical edges `u,v`
    #[arg(long, global = true)]
    diffusion: Option<PathBuf>,
    /// Ratings `user,item,time_hours` for co-rating cascades
    #[arg(long, global = true)]
    ratings: Option<PathBuf>,
    #[arg(long, global = true)]
    mu: Option<f64>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// `uniform` or `degree_weighted`
    #[arg(long, global = true)]
    weighting: Option<String>,
    /// Minimum gap after the steep time, minutes
    #[arg(long, global = true)]
    dtg: Option<f64>,
    /// Minimum growth ratio over the steep size
    #[arg(long, global = true)]
    g: Option<f64>,
    /// Inhibition labels `cascade_id,t_inhib`
    #[arg(long, global = true)]
    labels: Option<PathBuf>,
    /// `l1` or `l2`
    #[arg(long, global = true)]
    penalty: Option<String>,
    /// Any config key, e.g. `--set motifs.last_networks=10`
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Opts {
    fn overrides(&self) -> Vec<String> {
        let quote = |s: &str| format!("{:?}", s);
        let path = |p: &PathBuf| quote(&p.to_string_lossy());
        let mut o = Vec::new();
        let mut push = |key: &str, v: Option<String>| {
            if let Some(v) = v {
                o.push(format!("{key}={v}"));
            }
        };
        push("seed", self.seed.map(|v| v.to_string()));
        push("threads", self.threads.map(|v| v.to_string()));
        push("input.cascades", self.cascades.as_ref().map(path));
        push("input.diffusion", self.diffusion.as_ref().map(path));
        push("input.ratings", self.ratings.as_ref().map(path));
        push("hawkes.mu", self.mu.map(|v| format!("{v:?}")));
        push("hawkes.alpha", self.alpha.map(|v| format!("{v:?}")));
        push("hawkes.beta", self.beta.map(|v| format!("{v:?}")));
        push("hawkes.weighting", self.weighting.as_deref().map(quote));
        push("inhibition.dtg", self.dtg.map(|v| format!("{v:?}")));
        push("inhibition.g", self.g.map(|v| format!("{v:?}")));
        push("inhibition.labels", self.labels.as_ref().map(path));
        push("prediction.penalty", self.penalty.as_deref().map(|p| quote(&p.to_ascii_lowercase())));
        o.extend(self.overrides.iter().cloned());
        o
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let command = match cli.command {
        Cmd::Synth => Command::Synth,
        Cmd::Ingest => Command::Ingest,
        Cmd::Analyze => Command::Analyze,
        Cmd::Predict => Command::Predict,
        Cmd::Calibrate => Command::Calibrate,
        Cmd::Report => Command::Report,
    };
    let result = RunConfig::load(cli.opts.config.as_deref(), &cli.opts.overrides())
        .and_then(|config| run(command, &config, &cli.opts.out));
    match result {
        Ok(manifest) => {
            log::info!("{} finished, {} outputs", manifest.command, manifest.outputs.len());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
