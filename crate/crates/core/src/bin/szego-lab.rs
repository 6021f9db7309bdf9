use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;
use szego_core::cli::{self, EXIT_CONFIG, EXIT_NUMERICAL};
use szego_core::io::SymbolSpec;
use szego_core::poisson::{self, FdOptions};
use szego_core::{conservation, hankel, Error, FourierSymbol};

#[derive(Parser)]
#[command(name = "szego-lab", version, about = "Spectral experiments for the quadratic Szegő equation")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario config and write trajectory.csv, report.json, manifest.json.
    Run { config: PathBuf },
    /// Print the conservation report and spectral data of a symbol.
    Inspect {
        symbol: PathBuf,
        /// Truncation (default: smallest resolving power of two).
        #[arg(long)]
        n: Option<usize>,
    },
    /// Poisson brackets between functionals, e.g. `--pairs ell_1:ell_2 --pairs 'F(-0.3):F(0.1)'`.
    Bracket {
        symbol: PathBuf,
        #[arg(long, required = true, num_args = 1..)]
        pairs: Vec<String>,
        #[arg(long)]
        richardson: bool,
    },
}

fn load_symbol(path: &PathBuf, n: Option<usize>) -> szego_core::Result<FourierSymbol> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    SymbolSpec::parse(&text)?.to_fourier(n)
}

fn inspect(path: &PathBuf, n: Option<usize>) -> szego_core::Result<serde_json::Value> {
    let u = load_symbol(path, n)?;
    let (sd, rep) = conservation::analyze(&u)?;
    let (rh, rk) = hankel::numerical_ranks(&u);
    Ok(json!({
        "truncation": u.len(),
        "ranks": { "h": rh, "k": rk },
        "conservation": rep,
        "spectral": sd.map(|s| s.to_json()),
    }))
}

fn bracket(path: &PathBuf, pairs: &[String], richardson: bool) -> szego_core::Result<serde_json::Value> {
    let u = load_symbol(path, None)?;
    let opts = FdOptions { richardson, ..Default::default() };
    let mut out = Vec::new();
    for p in pairs {
        let (a, b) = p.split_once(':').ok_or_else(|| Error::Config(format!("pair {p:?} is not of the form F:G")))?;
        let (fa, ia) = poisson::functional_by_label(a.trim())?;
        let (fb, ib) = poisson::functional_by_label(b.trim())?;
        let ga = poisson::gradient(&fa, &u, opts)?.swap_remove(ia);
        let gb = poisson::gradient(&fb, &u, opts)?.swap_remove(ib);
        let v = poisson::bracket_of(&ga, &gb);
        let norm = |g: &[szego_core::C64]| g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let scale = norm(&ga) * norm(&gb);
        out.push(json!({ "pair": p, "value": v, "scale": scale, "normalized": if scale > 0.0 { v / scale } else { 0.0 } }));
    }
    Ok(json!(out))
}

fn finish(res: szego_core::Result<serde_json::Value>) -> ExitCode {
    match res {
        Ok(v) => {
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&v).expect("json"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error [{}]: {e}", e.name());
            ExitCode::from(if matches!(e, Error::Config(_)) { EXIT_CONFIG } else { EXIT_NUMERICAL } as u8)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Run { config } => {
            let (code, report, err) = cli::run_file(&config);
            if let Some(r) = &report {
                for c in &r.checks {
                    println!("{} {} = {:.3e} ({} {:.1e})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.relation, c.tolerance);
                }
                if let Some(e) = &r.error {
                    eprintln!("error [{}]: {}", e.name, e.message);
                }
            }
            if let Some(e) = err {
                eprintln!("error [{}]: {e}", e.name());
            }
            ExitCode::from(code as u8)
        }
        Cmd::Inspect { symbol, n } => finish(inspect(&symbol, n)),
        Cmd::Bracket { symbol, pairs, richardson } => finish(bracket(&symbol, &pairs, richardson)),
    }
}
