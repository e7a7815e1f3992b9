use clap::Parser;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use sz_scatter::config::{read_config, Mode};
use sz_scatter::par::{with_thread_cap, Execution};
use sz_scatter::run::{emit_plot_data, exit_code_for, render_csv, run, EXIT_CONFIG};

/// Transmission, reflection and rigorous bounds for 1D scattering.
#[derive(Parser, Debug)]
#[command(name = "sz-scatter", version)]
struct Args {
    /// Run configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `[run] mode`.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
    /// CSV destination; overrides `[outputs] csv_path`. Without either, rows go to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse()
}

fn thread_cap() -> Result<Option<usize>, String> {
    match std::env::var("SZ_SCATTER_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("SZ_SCATTER_THREADS must be a positive integer, got `{v}`")),
        },
    }
}

fn exit(code: i32) -> ExitCode {
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let threads = match thread_cap() {
        Ok(t) => t,
        Err(msg) => {
            eprintln!("error: {msg}");
            return exit(EXIT_CONFIG);
        }
    };
    let mut config = match read_config(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return exit(EXIT_CONFIG);
        }
    };
    if let Some(mode) = args.mode {
        config.mode = mode;
    }

    let report = match with_thread_cap(threads, || run(&config, Execution::default())) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return exit(exit_code_for(&e));
        }
    };
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }

    let csv = render_csv(&report.rows);
    let written = match args.out.as_ref().or(config.outputs.csv_path.as_ref()) {
        Some(path) => std::fs::write(path, csv),
        None => std::io::stdout().write_all(csv.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: writing CSV: {e}");
        return exit(EXIT_CONFIG);
    }
    if let Some(path) = &config.outputs.plot_data_path {
        if let Err(e) = emit_plot_data(&report.rows, path) {
            eprintln!("error: writing plot data: {e}");
            return exit(EXIT_CONFIG);
        }
    }

    for v in &report.violations {
        eprintln!("bound violation: {v}");
    }
    exit(report.exit_code())
}
