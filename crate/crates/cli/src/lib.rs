//! Command-line front end: parses arguments, runs one computation, writes a
//! report. Exit codes: 0 computed, 1 usage or input error, 2 the checked
//! property failed.

mod commands;
mod inputs;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use report::{fmt_f64, Format};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VIOLATED: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "vdc-lab", version, about = "Experiments with van der Corput sets in Z^d")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Report format.
    #[arg(long, value_enum, default_value = "json", global = true)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: VDCLAB_JOBS, else all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Optional key=value file supplying default flag values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Van der Corput inequalities: the box form with Fejér weights and its
    /// |gamma| relaxation, the finite abelian group form, the generalized
    /// form with a positive-definite weight family (scalar or Hilbert-space
    /// valued), the quantitative limsup bound, and the one-dimensional
    /// spectral bound with eps = a_0.
    Ineq(commands::IneqArgs),
    /// Positive-definite families and Kamae-Mendès France witnesses: search
    /// on a grid by exact linear programming, verify a candidate, build
    /// P_{q,N} from a sequence, or certify positive-definiteness.
    Witness(commands::WitnessArgs),
    /// Spectral obstructions: Fourier coefficients of an atomic (or Bernoulli
    /// spectral) torus measure along D, tested for the vdC, FC+, density FC+,
    /// nice FC+ and summability characterizations.
    Spectral(commands::SpectralArgs),
    /// Simultaneous divisibility of integer polynomials by every prime power
    /// up to Q, and the 2-adic lifting plus Bézout construction for a p + b q.
    Divis(commands::DivisArgs),
    /// Recurrence on closed-form systems (rotations, cyclic shifts, Bernoulli
    /// cylinders, products): plain, strong, nice and averaging recurrence
    /// along a sequence, and random block orbits for the 0/1 vdC harness.
    Recur(commands::RecurArgs),
    /// Equidistribution mod 1: Weyl sums, star discrepancy, and correlation
    /// tails gamma(d_m) for the enhanced and density vdC definitions.
    Udtest(commands::UdtestArgs),
    /// Sequences: terms of integer sequences in Z^d and the random block
    /// sequences attached to a probability measure on the torus.
    Seq(commands::SeqArgs),
}

/// Reads `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("config line {}: expected key=value", i + 1))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Inserts config entries as flags right after the subcommand, unless the
/// command line already sets them.
fn apply_config(argv: &[String]) -> Result<Vec<String>, String> {
    let path = argv.iter().position(|a| a == "--config").and_then(|i| argv.get(i + 1)).cloned().or_else(|| {
        argv.iter().find_map(|a| a.strip_prefix("--config=").map(str::to_string))
    });
    let Some(path) = path else { return Ok(argv.to_vec()) };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let entries = parse_config(&text)?;
    let sub = argv.iter().skip(1).position(|a| !a.starts_with('-')).map(|i| i + 1);
    let mut out = argv.to_vec();
    let mut insert_at = sub.map_or(out.len(), |i| i + 1);
    for (k, v) in entries {
        let flag = format!("--{k}");
        if argv.iter().any(|a| a == &flag || a.starts_with(&format!("{flag}="))) {
            continue;
        }
        out.insert(insert_at, flag);
        insert_at += 1;
        if v != "true" {
            out.insert(insert_at, v);
            insert_at += 1;
        }
    }
    Ok(out)
}

fn jobs(global: &Global) -> Result<Option<usize>, String> {
    if let Some(j) = global.jobs {
        return Ok(Some(j));
    }
    match std::env::var("VDCLAB_JOBS") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| format!("VDCLAB_JOBS={v:?} is not a number")),
        Err(_) => Ok(None),
    }
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn run(argv: &[String]) -> i32 {
    let argv = match apply_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let threads = match jobs(&cli.global) {
        Ok(j) => j,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n.max(1));
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_USAGE;
        }
    };
    let outcome = pool.install(|| match &cli.command {
        Command::Ineq(a) => commands::ineq(a),
        Command::Witness(a) => commands::witness(a),
        Command::Spectral(a) => commands::spectral(a),
        Command::Divis(a) => commands::divis(a),
        Command::Recur(a) => commands::recur(a),
        Command::Udtest(a) => commands::udtest(a),
        Command::Seq(a) => commands::seq(a),
    });
    match outcome {
        Ok((rep, ok)) => match report::write_report(&rep, cli.global.format, cli.global.out.as_deref()) {
            Ok(()) => {
                if ok {
                    EXIT_OK
                } else {
                    EXIT_VIOLATED
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_USAGE
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn config_fills_missing_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.conf");
        std::fs::write(&path, "# defaults\nupto = 50\npolys = 0,1\n").unwrap();
        let argv = args(&format!("vdc-lab divis --config {} --upto 10", path.display()));
        let out = apply_config(&argv).unwrap();
        assert_eq!(out[..4], args("vdc-lab divis --polys 0,1")[..]);
        assert!(!out.contains(&"50".to_string()));
    }

    #[test]
    fn config_rejects_garbage() {
        assert!(parse_config("just words").is_err());
    }
}
