use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fdefln::analysis::Phase;
use fdefln::scenarios::ScenarioKind;
use fdefln_bench::counts::count_table;
use fdefln_bench::{
    emse_sweep, run_experiment, time_per_block, write_csv, AlgoKind, BenchError, RunConfig,
};

#[derive(Parser)]
#[command(name = "fdefln-bench", version, about = "Run EFLN filter experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write per-block metrics as CSV.
    Run(Common),
    /// Simulated against theoretical steady-state EMSE over a step-size grid.
    Sweep(Common),
    /// Operation counts per block, closed form and instrumented.
    Counts {
        #[arg(short = 'm', long, default_value_t = 64)]
        block_len: usize,
        #[arg(short = 'p', long, default_value_t = 2)]
        order: usize,
        /// Secondary path length; defaults to the block length.
        #[arg(short = 'n', long)]
        taps: Option<usize>,
    },
    /// Median wall-clock time per block.
    Time(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario, when no config file is given.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated algorithm list.
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    /// Reference signal, one value per line.
    #[arg(long)]
    input_csv: Option<PathBuf>,
    /// Extra `key=value` settings, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, BenchError> {
        let mut cfg = match (&self.config, &self.scenario) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(s)) => RunConfig::new(s.parse::<ScenarioKind>()?),
            (None, None) => RunConfig::new(ScenarioKind::IdentEfln),
        };
        if let (Some(_), Some(s)) = (&self.config, &self.scenario) {
            if s.parse::<ScenarioKind>()? != cfg.scenario.kind {
                return Err(BenchError::Usage(
                    "--scenario conflicts with the config file".into(),
                ));
            }
        }
        if let Some(seed) = self.seed {
            cfg.scenario.seed = seed;
        }
        if let Some(t) = self.trials {
            cfg.scenario.trials = t;
        }
        if let Some(a) = &self.algo {
            cfg.set("algos", a)?;
        }
        if let Some(p) = &self.input_csv {
            cfg.set_input_csv(p)?;
        }
        for kv in &self.sets {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| BenchError::Usage(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        Ok(cfg)
    }
}

fn output(cfg: &RunConfig) -> Result<Box<dyn Write>, BenchError> {
    Ok(match &cfg.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(args: &Common) -> Result<(), BenchError> {
    let cfg = args.resolve()?;
    let report = run_experiment(&cfg)?;
    write_csv(output(&cfg)?, &report.records())?;
    for c in &report.curves {
        let k = c.ensemble_mse().len();
        eprintln!(
            "{:<10} final MSE {:>8.2} dB (last {} blocks)",
            c.spec.kind,
            c.mean_mse_db(k.saturating_sub(cfg.window.max(10))..k),
            cfg.window.max(10).min(k)
        );
    }
    match report.divergence() {
        Some((algo, trial, block)) => Err(BenchError::Divergence { algo, trial, block }),
        None => Ok(()),
    }
}

fn sweep(args: &Common) -> Result<(), BenchError> {
    let cfg = args.resolve()?;
    let rows = emse_sweep(&cfg)?;
    let mut w = csv::Writer::from_writer(output(&cfg)?);
    w.write_record(["mu", "simulated_db", "theoretical_db", "unstable"])?;
    for r in &rows {
        w.write_record([
            r.mu.to_string(),
            r.simulated_db.to_string(),
            r.theoretical_db.map(|t| t.to_string()).unwrap_or_default(),
            r.unstable.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn counts(m: usize, p: usize, n: Option<usize>) -> Result<(), BenchError> {
    let n = n.unwrap_or(m);
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    w.write_record([
        "algo",
        "phase",
        "mul",
        "add",
        "measured_mul",
        "measured_add",
    ])?;
    for (algo, closed, measured) in count_table(m, p, n)? {
        for phase in Phase::ALL {
            let c = closed.phase(phase);
            let meas = measured.map(|o| o.phase(phase));
            w.write_record([
                algo.name().to_string(),
                phase.name().to_string(),
                c.multiplications.to_string(),
                c.additions.to_string(),
                meas.map(|x| x.multiplications.to_string())
                    .unwrap_or_default(),
                meas.map(|x| x.additions.to_string()).unwrap_or_default(),
            ])?;
        }
        let t = closed.total();
        w.write_record([
            algo.name(),
            "total",
            &t.multiplications.to_string(),
            &t.additions.to_string(),
            "",
            "",
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn time(args: &Common) -> Result<(), BenchError> {
    let mut cfg = args.resolve()?;
    if args.algo.is_none() && args.config.is_none() {
        cfg.algos = vec![AlgoKind::Efln, AlgoKind::Fdefln];
    }
    if cfg.timed_blocks < 100 {
        return Err(BenchError::Usage(
            "timing needs at least 100 timed blocks".into(),
        ));
    }
    let s = &cfg.scenario;
    let mut w = csv::Writer::from_writer(output(&cfg)?);
    w.write_record([
        "algo",
        "block_len",
        "order",
        "median_us",
        "q1_us",
        "q3_us",
        "blocks",
    ])?;
    for spec in cfg.algo_specs() {
        let t = time_per_block(
            &spec,
            s.block_len,
            s.order,
            cfg.warmup,
            cfg.timed_blocks,
            s.seed,
        )?;
        w.write_record([
            spec.kind.name().to_string(),
            s.block_len.to_string(),
            s.order.to_string(),
            format!("{:.3}", t.median_us),
            format!("{:.3}", t.q1_us),
            format!("{:.3}", t.q3_us),
            t.blocks.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
        Command::Counts {
            block_len,
            order,
            taps,
        } => counts(*block_len, *order, *taps),
        Command::Time(a) => time(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
