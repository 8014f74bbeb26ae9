use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tops_stbc::experiment::config::{parse_settings, Setting};
use tops_stbc::experiment::{
    report_partition, run_ber_sweep, run_complexity_audit, write_audit_csv, write_ber_csv, AuditConfig,
    ExperimentConfig, DEFAULT_AUDIT_M,
};
use tops_stbc::pulse::build_pulse_family;
use tops_stbc::{Error, Result};

#[derive(Parser)]
#[command(
    name = "tops-stbc",
    version,
    about = "Pulse-shaped group decoding of space-time block codes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the support partition and decoding structure of a code.
    Partition {
        /// Catalog name or path to a code description file.
        code: String,
    },
    /// Monte-Carlo BER sweep.
    Ber(Box<BerArgs>),
    /// Metric-evaluation counts versus constellation size.
    Audit {
        /// `all` or a comma-separated list of codes.
        #[arg(long, default_value = "all")]
        codes: String,
        /// Comma-separated strategies; defaults depend on the code.
        #[arg(long)]
        strategy: Option<String>,
        #[arg(long = "M", value_delimiter = ',', default_values_t = DEFAULT_AUDIT_M)]
        m: Vec<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Export a sampled orthonormal pulse family.
    Pulses {
        #[arg(long = "P")]
        p: usize,
        #[arg(long, default_value_t = 64)]
        oversampling: usize,
        /// Hermite width as a fraction of the symbol period.
        #[arg(long, default_value_t = 0.125)]
        width: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct BerArgs {
    /// Key-value config file; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    code: Option<String>,
    #[arg(long = "M")]
    m: Option<String>,
    #[arg(long)]
    strategy: Option<String>,
    /// `start:stop:step` in dB, or a comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    snr: Option<String>,
    /// `ebn0` (default) or `esn0`.
    #[arg(long)]
    snr_kind: Option<String>,
    #[arg(long)]
    bits: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Simulate the full pulse waveforms instead of the discrete shortcut.
    #[arg(long)]
    waveform: bool,
    #[arg(long)]
    n_rx: Option<String>,
    #[arg(long)]
    oversampling: Option<String>,
    #[arg(long)]
    pulse_width: Option<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Keep SNR points already present in the output file.
    #[arg(long)]
    resume: bool,
}

impl BerArgs {
    fn into_config(self) -> Result<ExperimentConfig> {
        let mut settings = match &self.config {
            Some(path) => parse_settings(&std::fs::read_to_string(path)?)?,
            None => Vec::new(),
        };
        let flags = [
            ("code", self.code),
            ("M", self.m),
            ("strategy", self.strategy),
            ("snr", self.snr),
            ("snr_kind", self.snr_kind),
            ("bits", self.bits),
            ("trials", self.trials),
            ("seed", self.seed),
            ("n_rx", self.n_rx),
            ("oversampling", self.oversampling),
            ("pulse_width", self.pulse_width),
            ("output", self.output.map(|p| p.display().to_string())),
        ];
        settings.extend(flags.into_iter().filter_map(|(k, v)| v.map(|v| Setting::flag(k, v))));
        if self.waveform {
            settings.push(Setting::flag("waveform", "true"));
        }
        if self.resume {
            settings.push(Setting::flag("resume", "true"));
        }
        ExperimentConfig::from_settings(&settings)
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Partition { code } => {
            print!("{}", report_partition(&code)?);
        }
        Command::Ber(args) => {
            let cfg = args.into_config()?;
            let result = run_ber_sweep(&cfg)?;
            write_ber_csv(&result, open_output(cfg.output.as_deref())?)?;
        }
        Command::Audit {
            codes,
            strategy,
            m,
            output,
        } => {
            let cfg = AuditConfig::parse(&codes, strategy.as_deref(), &m)?;
            let result = run_complexity_audit(&cfg)?;
            write_audit_csv(&result, open_output(output.as_deref())?)?;
            for t in &result.tables {
                eprintln!("{:<10} {:<13} exponent {:.3}", t.code, t.strategy.id(), t.exponent);
            }
        }
        Command::Pulses {
            p,
            oversampling,
            width,
            output,
        } => {
            let family = build_pulse_family(p, 1.0, oversampling, width)?;
            family.write_csv(open_output(output.as_deref())?)?;
            eprintln!("P={p} max Gram error {:e}", family.gram_error());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    e.exit_code() as u8
}
