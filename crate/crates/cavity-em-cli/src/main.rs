use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use cavity_em::config::parse_config;
use cavity_em::pipeline::{gram_for, run};
use cavity_em::Error;
use cavity_em_cli::{emit_csv, verify};

/// Backscatter RCS of a rectangular cavity in a ground plane.
#[derive(Parser, Debug)]
#[command(name = "cavity-em", version)]
struct Args {
    /// Key-value cavity description.
    #[arg(long, required_unless_present = "verify")]
    config: Option<PathBuf>,
    /// CSV output path; defaults to standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory holding cached Gram tensors.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Compute and store the Gram tensors, then stop.
    #[arg(long, requires = "cache_dir")]
    cache_only: bool,
    /// Worker threads for every parallel stage.
    #[arg(long)]
    threads: Option<usize>,
    /// Run the small-instance oracle checks and exit.
    #[arg(long)]
    verify: bool,
}

fn phase_error(phase: &str, e: &Error) -> ExitCode {
    eprintln!("error during {phase}: {e}");
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }

    if args.verify {
        return match verify() {
            Ok(checks) => {
                let mut ok = true;
                for c in &checks {
                    println!("{} {} value={:e} limit={:e}", if c.pass() { "PASS" } else { "FAIL" }, c.name, c.value, c.limit);
                    ok &= c.pass();
                }
                if ok {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                }
            }
            Err(e) => {
                eprintln!("error during verify: {e}");
                ExitCode::from(1)
            }
        };
    }

    let path = args.config.expect("clap enforces --config");
    let cfg = match std::fs::read_to_string(&path).map_err(Error::from).and_then(|t| parse_config(&t)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("invalid config {}: {e}", path.display());
            return ExitCode::from(2);
        }
    };

    if args.cache_only {
        let clock = Instant::now();
        return match gram_for(&cfg, args.cache_dir.as_deref()) {
            Ok((_, hit)) => {
                println!("phase=T_singular seconds={}", clock.elapsed().as_secs_f64());
                println!("cache {}", if hit { "hit" } else { "stored" });
                ExitCode::SUCCESS
            }
            Err(e) => phase_error("singular integrals", &e),
        };
    }

    let out = match run(&cfg, args.cache_dir.as_deref()) {
        Ok(o) => o,
        Err(e) => {
            let phase = match e {
                Error::Resonance { .. } => "vertical elimination",
                Error::Singular(_) => "interface solve",
                Error::Cache(_) | Error::Io(_) => "Gram cache",
                _ => "solve",
            };
            return phase_error(phase, &e);
        }
    };

    let clock = Instant::now();
    let written = match &args.out {
        Some(p) => emit_csv(&out.samples, p),
        None => cavity_em_cli::csv_string(&out.samples).map(|s| print!("{s}")),
    };
    if let Err(e) = written {
        eprintln!("error during output: {e}");
        return ExitCode::from(1);
    }
    let t = out.timings;
    let sink = if args.out.is_some() { println_stdout } else { println_stderr };
    sink(format!("phase=T_singular seconds={}", t.singular));
    sink(format!("phase=T_assemble seconds={}", t.assemble));
    sink(format!("phase=T_solve seconds={}", t.solve));
    sink(format!("phase=T_RCS seconds={}", t.rcs + clock.elapsed().as_secs_f64()));
    if out.condition > 1e12 {
        eprintln!("warning: aperture system condition estimate {:e}", out.condition);
    }
    ExitCode::SUCCESS
}

// Timing lines go to stdout unless stdout already carries the CSV.
fn println_stdout(s: String) {
    println!("{s}");
}

fn println_stderr(s: String) {
    eprintln!("{s}");
}
