use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use risloc::codebook::{write_ms_codebook, write_ris_codebook};
use risloc::sim::{aggregate, emit_csv, format_number, read_records, write_aggregate, write_csv};
use risloc::{Error, Result, Scheme, SimulationConfig, Simulator};

#[derive(Parser)]
#[command(name = "risloc", version, about = "RIS-aided beam training and localization sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo sweep over SNR, one CSV row per trial.
    Run(RunArgs),
    /// Noise-free saturation error of each scheme.
    Bound(ConfigArg),
    /// Per-scheme, per-SNR mean and median of a results CSV.
    Aggregate {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Writes the RIS and MS codebooks as text files.
    DumpCodebooks {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Args)]
struct ConfigArg {
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Results CSV; `-` for stdout. Defaults to the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<Scheme>>,
    #[arg(long = "snr-db", value_delimiter = ',', allow_hyphen_values = true)]
    snr_db: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<usize>,
    /// Per-slot protocol trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

fn load(arg: &ConfigArg) -> Result<SimulationConfig> {
    match &arg.config {
        Some(path) => SimulationConfig::load(path).map_err(|e| match e {
            Error::Io(io) => Error::Config {
                path: path.clone(),
                line: 0,
                message: io.to_string(),
            },
            other => other,
        }),
        None => Ok(SimulationConfig::default()),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg = load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.base_seed = seed;
    }
    if let Some(schemes) = args.schemes {
        cfg.schemes = schemes;
    }
    if let Some(snr) = args.snr_db {
        cfg.snr_list_db = snr;
    }
    if let Some(trials) = args.trials {
        cfg.trials_per_point = trials;
    }
    if let Some(out) = args.out {
        cfg.output_path = out;
    }
    cfg.normalize();
    cfg.validate()?;

    let sim = Simulator::new(cfg)?;
    let records = match &args.trace {
        Some(path) => {
            let mut trace = create(path)?;
            let records = sim.run_sweep(Some(&mut trace))?;
            trace.flush()?;
            records
        }
        None => sim.run_sweep(None)?,
    };
    let out = &sim.config.output_path;
    if out.as_os_str() == "-" {
        let stdout = io::stdout();
        let mut lock = stdout.lock();
        write_csv(&records, &mut lock)?;
        lock.flush()?;
    } else {
        emit_csv(&records, out)?;
        eprintln!("wrote {} rows to {}", records.len(), out.display());
    }
    Ok(())
}

fn bound(arg: ConfigArg) -> Result<()> {
    let sim = Simulator::new(load(&arg)?)?;
    let rows = sim.noise_free_bound()?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "scheme,pe_m2,oe_rad2,ris_idx,ms_idx")?;
    for r in rows {
        let idx = |v: Option<usize>| v.map_or("-".to_string(), |i| i.to_string());
        writeln!(
            out,
            "{},{},{},{},{}",
            r.scheme,
            format_number(r.pe),
            format_number(r.oe),
            idx(r.final_ris_index),
            idx(r.final_ms_index)
        )?;
    }
    Ok(())
}

fn aggregate_cmd(input: &Path, out: Option<&Path>) -> Result<()> {
    let records = read_records(BufReader::new(File::open(input)?), &input.display().to_string())?;
    let rows = aggregate(&records);
    match out {
        Some(path) => {
            let mut w = create(path)?;
            write_aggregate(&rows, &mut w)?;
            w.flush()?;
        }
        None => write_aggregate(&rows, &mut io::stdout().lock())?,
    }
    Ok(())
}

fn dump_codebooks(arg: ConfigArg, out_dir: &Path) -> Result<()> {
    let sim = Simulator::new(load(&arg)?)?;
    std::fs::create_dir_all(out_dir)?;
    let ris_path = out_dir.join("ris_codebook.txt");
    let ms_path = out_dir.join("ms_codebook.txt");
    let mut w = create(&ris_path)?;
    write_ris_codebook(&sim.ris_codebook, &mut w)?;
    w.flush()?;
    let mut w = create(&ms_path)?;
    write_ms_codebook(&sim.ms_codebook, &mut w)?;
    w.flush()?;
    eprintln!("wrote {} and {}", ris_path.display(), ms_path.display());
    Ok(())
}

fn exit_code(err: &Error) -> u8 {
    if err.is_numerical() {
        return 3;
    }
    match err {
        Error::Io(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Bound(arg) => bound(arg),
        Command::Aggregate { input, out } => aggregate_cmd(&input, out.as_deref()),
        Command::DumpCodebooks { config, out_dir } => dump_codebooks(config, &out_dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
