//! Command-line front end.
//!
//! Exit codes: 0 = verified, 1 = falsified / violation found, 2 = invalid
//! input. Human-readable output goes to stderr, machine output (JSON) to
//! stdout. The SEED environment variable overrides the oracle default seed.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use fatpoints::error::Error;
use fatpoints::glue::prove_glue_base;
use fatpoints::monomials::verify_containment;
use fatpoints::oracle::{check_chudnovsky, system_dim, DEFAULT_PRIME};
use fatpoints::prover::{detect_low_gap, open_session, pipeline};
use fatpoints::report::{cert_roundtrip, save_json, to_canonical_json, CertificateFile, Outcome, RunReport};

#[derive(Parser)]
#[command(name = "fatpoints", version, about = "Exact certificates for fat-point linear systems in P^3")]
struct Cli {
    /// print the run report as JSON on stdout instead of human-readable text
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and verify proof artifacts
    Prove {
        #[command(subcommand)]
        what: ProveCommand,
    },
    /// Brute-force containment check for points in general coordinate position
    Containment(ContainmentArgs),
    /// Numerical dimension of a concrete linear system over a prime field
    Oracle(OracleArgs),
    /// Certificate file operations
    Cert {
        #[command(subcommand)]
        what: CertCommand,
    },
    /// Desk-scale check of the Chudnovsky bound for generic simple points
    Chudnovsky(ChudnovskyArgs),
}

#[derive(Subcommand)]
enum ProveCommand {
    /// The six base lower bounds on Waldschmidt constants
    Gammas {
        /// directory to write the six alpha-bound certificates into
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The parametric induction behind the gluing bound alpha(I(m^x8)) >= 2m
    Glue,
    /// Containment certificates for every n in a range
    Pipeline {
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
        /// write the per-n results as JSON
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CertCommand {
    /// Load a certificate, re-verify it, and check canonical serialization
    Verify { file: PathBuf },
}

#[derive(Args)]
struct ContainmentArgs {
    #[arg(long = "N")]
    n_proj: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    r: u32,
    #[arg(long)]
    tmax: u32,
}

#[derive(Args)]
struct OracleArgs {
    /// concrete system "d;m1,m2,..." (integers)
    #[arg(long)]
    system: String,
    #[arg(long = "N", default_value_t = 3)]
    n_proj: usize,
    #[arg(long, default_value_t = DEFAULT_PRIME)]
    prime: u64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 3)]
    reps: u32,
}

#[derive(Args)]
struct ChudnovskyArgs {
    #[arg(long)]
    n: usize,
    #[arg(long = "N", default_value_t = 3)]
    n_proj: usize,
    #[arg(long)]
    mmax: u32,
    #[arg(long, default_value_t = DEFAULT_PRIME)]
    prime: u64,
    #[arg(long)]
    seed: Option<u64>,
}

fn default_seed(cli_seed: Option<u64>) -> u64 {
    if let Some(s) = cli_seed {
        return s;
    }
    std::env::var("SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(7)
}

fn parse_concrete_system(text: &str) -> Result<(i64, Vec<i64>), Error> {
    let (d_part, m_part) = text
        .split_once(';')
        .ok_or_else(|| Error::Parse(format!("system '{text}' must look like 'd;m1,m2,...'")))?;
    let d = d_part
        .trim()
        .parse::<i64>()
        .map_err(|e| Error::Parse(format!("bad degree '{d_part}': {e}")))?;
    let mults = m_part
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<i64>()
                .map_err(|e| Error::Parse(format!("bad multiplicity '{s}': {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((d, mults))
}

fn emit(report: &RunReport, json: bool) -> Result<(), Error> {
    if json {
        print!("{}", to_canonical_json(report)?);
    } else {
        eprintln!("[{}] {}", report.command, report.statement);
        eprintln!("  outcome: {:?}, {} ms", report.outcome, report.timing_ms);
        println!("{:?}", report.outcome);
    }
    Ok(())
}

fn exit_for(outcome: Outcome) -> ExitCode {
    match outcome {
        Outcome::Verified => ExitCode::from(0),
        Outcome::Falsified => ExitCode::from(1),
        Outcome::Inconclusive => ExitCode::from(1),
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    let start = Instant::now();
    match cli.command {
        Command::Prove { what } => match what {
            ProveCommand::Gammas { out } => {
                let ctx = open_session()?;
                let gammas = ctx.gammas();
                let mut report = RunReport::new(
                    "prove gammas",
                    json!({ "out": out.as_ref().map(|p| p.display().to_string()) }),
                    "six certified lower bounds on gamma(I(seq)) for up to 10 fat points in P^3",
                );
                for (i, ab) in gammas.alpha_bounds.iter().enumerate() {
                    if let Some(dir) = &out {
                        std::fs::create_dir_all(dir)?;
                        let path = dir.join(format!("gammas-{}.json", i + 1));
                        save_json(&CertificateFile::Alpha(ab.clone()), &path)?;
                        report.certificates.push(json!(path.display().to_string()));
                    } else {
                        report.certificates.push(serde_json::to_value(ab)?);
                    }
                }
                for d in &gammas.discrepancies {
                    eprintln!(
                        "note: recomputed value differs from the printed source chain: {} \
                         (printed {}, recomputed {})",
                        d.context, d.printed, d.recomputed
                    );
                    report.parameters["discrepancies"] =
                        serde_json::to_value(&gammas.discrepancies)?;
                }
                report.outcome = Outcome::Verified;
                report.timing_ms = start.elapsed().as_millis();
                emit(&report, cli.json)?;
                Ok(exit_for(report.outcome))
            }
            ProveCommand::Glue => {
                let mut report = RunReport::new(
                    "prove glue",
                    json!({}),
                    "parametric induction: (2m-1; m^x8) is empty for all m >= 1",
                );
                prove_glue_base()?;
                report.outcome = Outcome::Verified;
                report.timing_ms = start.elapsed().as_millis();
                emit(&report, cli.json)?;
                Ok(exit_for(report.outcome))
            }
            ProveCommand::Pipeline { from, to, out } => {
                if from < 5 || to < from {
                    return Err(Error::Parse(format!("need 5 <= from <= to, got {from}..{to}")));
                }
                let ctx = open_session()?;
                let mut entries = Vec::new();
                for n in from..=to {
                    entries.push(pipeline(&ctx, n)?);
                }
                let gap = detect_low_gap(&ctx)?;
                let mut report = RunReport::new(
                    "prove pipeline",
                    json!({ "from": from, "to": to }),
                    "I(1^xn)^(3r) in M^(2r) I(1^xn)^r for all r >= 1 and each n in range",
                );
                report.parameters["known_gap"] = serde_json::to_value(&gap)?;
                report.parameters["discrepancies"] =
                    serde_json::to_value(&ctx.gammas().discrepancies)?;
                eprintln!(
                    "note: the printed case row for s = 7, 8 needs the unproved premise {}; \
                     repaired chains used instead",
                    gap.printed_needs
                );
                if let Some(path) = &out {
                    save_json(&entries, path)?;
                    report.certificates.push(json!(path.display().to_string()));
                }
                report.parameters["count"] = json!(entries.len());
                report.outcome = Outcome::Verified;
                report.timing_ms = start.elapsed().as_millis();
                emit(&report, cli.json)?;
                Ok(exit_for(report.outcome))
            }
        },
        Command::Containment(args) => {
            let rep = verify_containment(args.n_proj, args.n, args.r, args.tmax)?;
            let mut report = RunReport::new(
                "containment",
                json!({ "N": args.n_proj, "n": args.n, "r": args.r, "tmax": args.tmax }),
                "I^(Nr) in M^((N-1)r) I^r for points in general coordinate position",
            );
            report.outcome =
                if rep.total_violations == 0 { Outcome::Verified } else { Outcome::Falsified };
            report.certificates.push(serde_json::to_value(&rep)?);
            report.timing_ms = start.elapsed().as_millis();
            emit(&report, cli.json)?;
            Ok(exit_for(report.outcome))
        }
        Command::Oracle(args) => {
            let (d, mults) = parse_concrete_system(&args.system)?;
            let seed = default_seed(args.seed);
            let res = system_dim(d, &mults, args.n_proj, args.prime, seed, args.reps)?;
            // fixed machine format on stdout
            print!("{}", to_canonical_json(&res)?);
            if res.seed_disagreement {
                eprintln!("warning: dimensions disagreed across seeds");
                return Ok(ExitCode::from(1));
            }
            Ok(ExitCode::from(0))
        }
        Command::Cert { what } => match what {
            CertCommand::Verify { file } => match cert_roundtrip(&file) {
                Ok(_) => {
                    eprintln!("certificate verifies and is canonical");
                    println!("Verified");
                    Ok(ExitCode::from(0))
                }
                Err(Error::Json(e)) => {
                    eprintln!("schema violation: {e}");
                    Ok(ExitCode::from(2))
                }
                Err(Error::Io(e)) => {
                    eprintln!("cannot read file: {e}");
                    Ok(ExitCode::from(2))
                }
                Err(e) => {
                    eprintln!("verification failure: {e}");
                    println!("Falsified");
                    Ok(ExitCode::from(1))
                }
            },
        },
        Command::Chudnovsky(args) => {
            let seed = default_seed(args.seed);
            let rep = check_chudnovsky(args.n, args.n_proj, args.mmax, args.prime, seed)?;
            let mut report = RunReport::new(
                "chudnovsky",
                json!({ "n": args.n, "N": args.n_proj, "mmax": args.mmax, "prime": args.prime, "seed": seed }),
                "alpha(I^(m)) >= m*(alpha(I)+N-1)/N for n generic simple points",
            );
            report.outcome = if rep.all_hold { Outcome::Verified } else { Outcome::Falsified };
            report.certificates.push(serde_json::to_value(&rep)?);
            report.timing_ms = start.elapsed().as_millis();
            emit(&report, cli.json)?;
            Ok(exit_for(report.outcome))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(Error::Parse(e)) => {
            eprintln!("invalid input: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
