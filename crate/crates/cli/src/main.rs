use clap::{Args, Parser, Subcommand};
use hkt_core::suite::{list_examples, sweep, verify, OutputFormat, SuiteConfig, CONFIG_ENV};
use hkt_core::HktError;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

/// Verifies the HKT example catalog.
#[derive(Parser)]
#[command(name = "hkt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the example catalog.
    List,
    /// Run the full check list of one example.
    Verify {
        id: String,
        #[command(flatten)]
        opts: Options,
    },
    /// Run one example over the cartesian product of parameter values.
    Sweep {
        id: String,
        /// `KEY=v1,v2,...`; repeat for more axes.
        #[arg(long = "grid", required = true)]
        grid: Vec<String>,
        #[command(flatten)]
        opts: Options,
    },
}

#[derive(Args)]
struct Options {
    /// Flat `key = value` config file.
    #[arg(long, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    #[arg(long)]
    tolerance: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// `text` or `json`.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Extra `KEY=VALUE` settings, e.g. `--set r=0.5`.
    #[arg(long = "set")]
    set: Vec<String>,
}

impl Options {
    fn load(&self) -> Result<SuiteConfig, HktError> {
        let mut cfg = match &self.config {
            Some(p) if !p.as_os_str().is_empty() => SuiteConfig::from_file(p)?,
            _ => SuiteConfig::default(),
        };
        for (key, value) in [
            ("tolerance", &self.tolerance),
            ("samples", &self.samples),
            ("seed", &self.seed),
            ("format", &self.format),
        ] {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        for kv in &self.set {
            let (k, v) = split_pair(kv)?;
            cfg.set(k, v)?;
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        Ok(cfg)
    }
}

fn split_pair(s: &str) -> Result<(&str, &str), HktError> {
    s.split_once('=')
        .ok_or_else(|| HktError::Config(format!("expected KEY=VALUE, got `{s}`")))
}

fn parse_grid(items: &[String]) -> Result<Vec<(String, Vec<String>)>, HktError> {
    items
        .iter()
        .map(|item| {
            let (k, v) = split_pair(item)?;
            let values: Vec<String> = v.split(',').map(|x| x.trim().to_string()).collect();
            if values.iter().any(String::is_empty) {
                return Err(HktError::Config(format!("empty value in grid axis `{item}`")));
            }
            Ok((k.trim().to_string(), values))
        })
        .collect()
}

fn emit(cfg: &SuiteConfig, text: String, json: String) -> Result<(), HktError> {
    let body = match cfg.format {
        OutputFormat::Text => text,
        OutputFormat::Json => json,
    };
    match &cfg.out {
        Some(path) => {
            std::fs::write(path, body + "\n").map_err(|e| HktError::Config(format!("{}: {e}", path.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{body}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(HktError::Config(format!("stdout: {e}"))),
                _ => Ok(()),
            }
        }
    }
}

fn run(cli: Cli) -> Result<bool, HktError> {
    match cli.command {
        Command::List => {
            for e in list_examples() {
                let mut tags = Vec::new();
                if e.randomized {
                    tags.push("seeded");
                }
                if e.negative_control {
                    tags.push("negative control");
                }
                let tags = if tags.is_empty() {
                    String::new()
                } else {
                    format!(" [{}]", tags.join(", "))
                };
                if writeln!(std::io::stdout(), "{:<15} {}{}", e.id, e.description, tags).is_err() {
                    break;
                }
            }
            Ok(true)
        }
        Command::Verify { id, opts } => {
            let cfg = opts.load()?;
            let report = verify(&id, &cfg)?;
            emit(&cfg, report.to_text(), report.to_json())?;
            Ok(report.pass)
        }
        Command::Sweep { id, grid, opts } => {
            let cfg = opts.load()?;
            let grid = parse_grid(&grid)?;
            let report = sweep(&id, &cfg, &grid)?;
            emit(&cfg, report.to_text(), report.to_json())?;
            Ok(report.pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
