//! Command-line front end: parse cubic specs, run individual operations and
//! randomized suites, emit JSON reports and certificates.
//!
//! Exit codes: 0 success, 1 failed verification or suite, 2 invalid input,
//! 3 indeterminate map, 4 solver degeneracy, 5 resample exhaustion,
//! 6 rank-deficient certificate.

use clap::{Args, Parser, Subcommand};
use num_traits::Zero;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

use cubic_sprays::corpus::{gen_corpus, CorpusCubic};
use cubic_sprays::geom::{CubicHypersurface, LineSet};
use cubic_sprays::projective::ProjectivePoint;
use cubic_sprays::scalar::{Cx, Rat, Scalar};
use cubic_sprays::spray::{build_certificate, verify_certificate, SprayCertificate};
use cubic_sprays::suite::{run_suite, SuiteKind};
use cubic_sprays::{parse_cubic, Error, Tolerances};

#[derive(Parser)]
#[command(name = "cubic-sprays", version, about = "Cubic hypersurface geometry: third-point involution, lines through a point, and local-ellipticity certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Scalar backend.
    #[arg(long, value_parser = ["rational", "complex"])]
    backend: Option<String>,
    /// Membership tolerance (relative).
    #[arg(long, default_value_t = 1e-10)]
    tol_membership: f64,
    /// Rank threshold relative to the largest singular value.
    #[arg(long, default_value_t = 1e-8)]
    tol_rank: f64,
    /// Root clustering radius.
    #[arg(long, default_value_t = 1e-7)]
    cluster_radius: f64,
    /// Resample limit for randomized searches.
    #[arg(long, default_value_t = 32)]
    retries: usize,
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl CommonOpts {
    fn tolerances(&self) -> Tolerances {
        Tolerances {
            membership: self.tol_membership,
            rank: self.tol_rank,
            cluster_radius: self.cluster_radius,
            retries: self.retries,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Third-point involution: print tau_u(x) for points u, x on X.
    Tau {
        /// Cubic spec JSON file.
        cubic: PathBuf,
        /// Point u as a JSON array.
        #[arg(long)]
        u: String,
        /// Point x as a JSON array.
        #[arg(long)]
        x: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Lines on X through a point (n = 3 direct; --spanning for any n >= 3).
    Lines {
        cubic: PathBuf,
        #[arg(long)]
        x: String,
        /// Use the slicing strategy returning n spanning lines.
        #[arg(long)]
        spanning: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Build a local-ellipticity certificate at y and verify it.
    Certify {
        cubic: PathBuf,
        #[arg(long)]
        y: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Re-verify a certificate file from scratch.
    Verify {
        /// Certificate JSON (embeds its cubic).
        cert: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run a randomized verification suite.
    Suite {
        /// Cubic spec JSON file (omit when using --corpus).
        cubic: Option<PathBuf>,
        /// Corpus spec {"count":k,"dim":n,"coeff_bound":b,"seed":s}.
        #[arg(long)]
        corpus: Option<String>,
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 50)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Indeterminate(_) => 3,
        Error::SolverDegeneracy(_) | Error::EckardtCenter | Error::UseSpanningLines => 4,
        Error::ResampleLimit(_) | Error::RetryLimit(_) => 5,
        Error::RankDeficient(_) => 6,
        _ => 2,
    }
}

fn read_json(path: &PathBuf) -> Result<Value, Error> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn parse_point<K: Scalar>(text: &str) -> Result<ProjectivePoint<K>, Error> {
    let v: Value = serde_json::from_str(text)?;
    ProjectivePoint::from_json(&v)
}

fn emit(common: &CommonOpts, doc: &Value) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(doc)?;
    match &common.out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn load_surface_complex(
    path: &PathBuf,
    common: &CommonOpts,
) -> Result<CubicHypersurface<Cx>, Error> {
    let doc = read_json(path)?;
    let form = parse_cubic::<Cx>(&doc)?;
    Ok(CubicHypersurface::new(form).with_tolerances(common.tolerances()))
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Tau { cubic, u, x, common } => {
            let backend = common.backend.clone().unwrap_or_else(|| "rational".into());
            let doc = read_json(&cubic)?;
            let result = if backend == "rational" {
                let form = parse_cubic::<Rat>(&doc)?;
                let surface = CubicHypersurface::new(form).with_tolerances(common.tolerances());
                let up = parse_point::<Rat>(&u)?;
                let xp = parse_point::<Rat>(&x)?;
                let y = surface.third_point(&up, &xp)?;
                json!({ "backend": "rational", "y": y.to_json() })
            } else {
                let form = parse_cubic::<Cx>(&doc)?;
                let surface = CubicHypersurface::new(form).with_tolerances(common.tolerances());
                let up = parse_point::<Cx>(&u)?;
                let xp = parse_point::<Cx>(&x)?;
                let y = surface.third_point(&up, &xp)?;
                json!({ "backend": "complex", "y": y.to_json() })
            };
            emit(&common, &result)?;
            eprintln!("tau: ok");
            Ok(ExitCode::SUCCESS)
        }
        Command::Lines {
            cubic,
            x,
            spanning,
            seed,
            common,
        } => {
            let surface = load_surface_complex(&cubic, &common)?;
            let xp = parse_point::<Cx>(&x)?;
            if !surface.check_smooth_at(&xp)? {
                return Err(Error::SingularPoint("lines center".into()));
            }
            if spanning || surface.dim() != 3 {
                let sl = surface.spanning_lines(&xp, seed)?;
                let doc = json!({
                    "center": xp.to_json(),
                    "mode": "spanning",
                    "rank": sl.rank.rank,
                    "lines": sl.lines.iter().map(|l| l.to_json()).collect::<Vec<_>>(),
                });
                emit(&common, &doc)?;
                eprintln!("lines: {} spanning lines, rank {}", sl.lines.len(), sl.rank.rank);
            } else {
                match surface.lines_through(&xp, seed)? {
                    LineSet::Infinite { witness, .. } => {
                        let doc = json!({
                            "center": xp.to_json(),
                            "eckardt": true,
                            "witness": witness,
                        });
                        emit(&common, &doc)?;
                        eprintln!("lines: eckardt point");
                    }
                    LineSet::Finite { lines, .. } => {
                        let total: usize = lines.iter().map(|(_, m)| m).sum();
                        let doc = json!({
                            "center": xp.to_json(),
                            "eckardt": false,
                            "total_multiplicity": total,
                            "lines": lines.iter().map(|(l, m)| json!({
                                "line": l.to_json(),
                                "multiplicity": m,
                            })).collect::<Vec<_>>(),
                        });
                        emit(&common, &doc)?;
                        eprintln!("lines: {} distinct, multiplicities sum to {total}", lines.len());
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Certify {
            cubic,
            y,
            seed,
            common,
        } => {
            let surface = load_surface_complex(&cubic, &common)?;
            let yp = parse_point::<Cx>(&y)?;
            let cert = build_certificate(&surface, &yp, seed)?;
            let outcome = verify_certificate(&surface, &cert);
            let mut doc = cert.to_json(surface.form());
            doc["verified"] = json!(outcome.ok);
            emit(&common, &doc)?;
            if outcome.ok {
                eprintln!("certify: rank {} verified", cert.rank.rank);
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("certify: verification failed: {:?}", outcome.reasons);
                Ok(ExitCode::from(1))
            }
        }
        Command::Verify { cert, common } => {
            let doc = read_json(&cert)?;
            let cubic_doc = doc
                .get("cubic")
                .ok_or_else(|| Error::Parse("certificate missing \"cubic\"".into()))?;
            let backend = doc
                .get("backend")
                .and_then(Value::as_str)
                .unwrap_or("complex");
            let ok = if backend == "rational" {
                let form = parse_cubic::<Rat>(cubic_doc)?;
                let surface =
                    CubicHypersurface::new(form).with_tolerances(common.tolerances());
                let cert = SprayCertificate::<Rat>::from_json(&doc, &surface)?;
                let outcome = verify_certificate(&surface, &cert);
                report_verify(&common, &outcome)?;
                outcome.ok
            } else {
                let form = parse_cubic::<Cx>(cubic_doc)?;
                let surface =
                    CubicHypersurface::new(form).with_tolerances(common.tolerances());
                let cert = SprayCertificate::<Cx>::from_json(&doc, &surface)?;
                let outcome = verify_certificate(&surface, &cert);
                report_verify(&common, &outcome)?;
                outcome.ok
            };
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Suite {
            cubic,
            corpus,
            suite,
            trials,
            seed,
            common,
        } => {
            let kind = SuiteKind::parse(&suite)?;
            let items: Vec<CorpusCubic> = match (&cubic, &corpus) {
                (Some(path), None) => {
                    let doc = read_json(path)?;
                    let form = parse_cubic::<Rat>(&doc)?;
                    // A rational point is needed for the exact suites; the
                    // Fermat threefold has a standard one, and other inputs
                    // must carry a "base_point" member.
                    let base = if let Some(bp) = doc.get("base_point") {
                        ProjectivePoint::<Rat>::from_json(bp)?
                    } else if form == cubic_sprays::HomogeneousCubic::fermat(3) {
                        ProjectivePoint::from_ints(&[3, 4, 5, -6, 0])
                    } else {
                        return Err(Error::Parse(
                            "suite needs a rational base point: add \"base_point\" to the spec or use --corpus"
                                .into(),
                        ));
                    };
                    if !form.evaluate(base.coords())?.is_zero() {
                        return Err(Error::NotOnHypersurface("base_point".into()));
                    }
                    vec![CorpusCubic {
                        form,
                        base_point: base,
                    }]
                }
                (None, Some(spec)) => {
                    let v: Value = serde_json::from_str(spec)?;
                    let count = v.get("count").and_then(Value::as_u64).unwrap_or(3) as usize;
                    let dim = v.get("dim").and_then(Value::as_u64).unwrap_or(3) as usize;
                    let bound = v.get("coeff_bound").and_then(Value::as_i64).unwrap_or(5);
                    let cseed = v.get("seed").and_then(Value::as_u64).unwrap_or(seed);
                    gen_corpus(count, dim, bound, cseed)?
                }
                _ => {
                    return Err(Error::Parse(
                        "provide exactly one of a cubic file or --corpus".into(),
                    ))
                }
            };
            let report = run_suite(kind, &items, trials, seed);
            emit(&common, &report.to_json())?;
            eprintln!(
                "suite {}: {} pass, {} fail ({} ms)",
                report.suite, report.totals.pass, report.totals.fail, report.wall_clock_ms
            );
            Ok(if report.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn report_verify(
    common: &CommonOpts,
    outcome: &cubic_sprays::spray::VerifyOutcome,
) -> Result<(), Error> {
    let doc = json!({ "verified": outcome.ok, "reasons": outcome.reasons });
    emit(common, &doc)?;
    if outcome.ok {
        eprintln!("verify: ok");
    } else {
        eprintln!("verify: FAILED: {:?}", outcome.reasons);
    }
    Ok(())
}
