use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ccbeam::cli::{exit_code, parse_config_with_base, parse_power_range, run_converge, run_sweep, Command, Overrides, RunManifest};
use ccbeam::orchestrator::SimConfig;
use ccbeam::Error;

#[derive(Parser)]
#[command(name = "ccbeam", version, about = "Beamformed coded-caching Monte-Carlo simulator")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// STP and throughput over a range of transmit powers.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
    },
    /// GA convergence traces of the shared delivery beam at one power.
    Converge {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "converge.csv")]
        out: PathBuf,
        /// Number of realizations to trace.
        #[arg(long, default_value_t = 10)]
        examples: usize,
    },
}

#[derive(Args)]
struct Common {
    /// JSON config file; keys mirror the simulation config fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Use the reference scale (15000 realizations, 64-beam codebook) as the base.
    #[arg(long)]
    full_scale: bool,
    /// Powers in dB as start:step:stop (inclusive) or a single value.
    #[arg(long)]
    powers_db: Option<String>,
    #[arg(long)]
    realizations: Option<usize>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
    /// Arbitrary override, e.g. --set ga.iterations=50. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn resolve(&self, command: Command) -> Result<SimConfig, Error> {
        let mut base = if self.full_scale { SimConfig::default() } else { SimConfig::desk_scale() };
        if command == Command::Converge {
            base.powers_db = vec![60.0];
        }
        let mut overrides = Overrides::new();
        for pair in &self.set {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("--set expects KEY=VALUE, got `{pair}`")))?;
            overrides.insert(k.trim().to_string(), v.trim().to_string());
        }
        if let Some(seed) = self.seed {
            overrides.insert("master_seed".into(), seed.to_string());
        }
        if let Some(n) = self.realizations {
            overrides.insert("realizations".into(), n.to_string());
        }
        if let Some(spec) = &self.powers_db {
            let powers = parse_power_range(spec)?;
            overrides.insert("powers_db".into(), serde_json::to_string(&powers).expect("numbers serialize"));
        }
        parse_config_with_base(base, self.config.as_deref(), &overrides)
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let (common, manifest) = match cli.command {
        Sub::Sweep { common, out } => {
            let config = common.resolve(Command::Sweep)?;
            (common, RunManifest::new(Command::Sweep, config, out))
        }
        Sub::Converge { common, out, examples } => {
            let config = common.resolve(Command::Converge)?;
            let mut m = RunManifest::new(Command::Converge, config, out);
            m.trace_examples = examples;
            (common, m)
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = common.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match manifest.command {
        Command::Sweep => run_sweep(&manifest).map(|rows| {
            eprintln!("wrote {} rows to {}", rows.len(), manifest.output.display());
        }),
        Command::Converge => run_converge(&manifest).map(|()| {
            eprintln!("wrote {} traces to {}", manifest.trace_examples, manifest.output.display());
        }),
    })
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
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
