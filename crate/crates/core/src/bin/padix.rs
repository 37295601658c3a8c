//! Command-line front end: builds prescribed sequences, evaluates the
//! induced valuations, certifies pairs, classifies configurations, and
//! writes deterministic reports.

use clap::{Parser, Subcommand};
use padix::dedekind::{class_group, factorizability_witness, is_pid, IntConfig, Witness};
use padix::krasner::{certify_minimal_pair, conjugate_distances, omega, Verdict};
use padix::newton::polygon_of_points;
use padix::poly::Poly;
use padix::report::{Report, ReportStatus};
use padix::scalar::{is_prime, render_rat, vp_rational, ExtVal, Rat};
use padix::stacked::{
    breadth_report, build_prescribed, classify, verify_stacked, BreadthVerdict, Classification,
    SequenceSpec, StackedSequence,
};
use padix::textio;
use padix::tower::{enumerate_small_extensions, TowerElement};
use padix::valdom::{
    parse_rational_function, residue_of, valuate, CoefficientField, RationalFunction,
    ValuationHandle,
};
use padix::{Error, Result};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "padix",
    version,
    about = "Exact p-adic valuation tooling over explicit extension towers"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Override the precision declared by the input document(s).
    #[arg(long, global = true)]
    precision: Option<u32>,
    /// Override the seed declared by the input document(s).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the sequence a spec document prescribes, verify it, and write
    /// the sequence document.
    Build {
        spec: PathBuf,
        /// Destination for the sequence document; `<spec>.seq` by default.
        #[arg(long)]
        sequence_out: Option<PathBuf>,
    },
    /// Re-run every verification check on a built sequence document.
    Verify { sequence: PathBuf },
    /// Exact valuation of a rational function along a sequence.
    Valuate { sequence: PathBuf, phi: String },
    /// Residue of a valuation-zero rational function along a sequence.
    Residue { sequence: PathBuf, phi: String },
    /// Largest conjugate distance of a tower point.
    Omega { point: PathBuf },
    /// Newton polygon and root valuations of a polynomial over Q_p.
    Newton {
        #[arg(long)]
        prime: u64,
        poly: String,
    },
    /// Certify or refute the minimal pair (point, delta).
    CertifyPair {
        point: PathBuf,
        delta: String,
        /// Candidate lower-degree counterexample point.
        #[arg(long)]
        candidate: Option<PathBuf>,
    },
    /// Classify the valuation a sequence document declares.
    Classify { sequence: PathBuf },
    /// Class group of an integer-valued polynomial configuration.
    ClassGroup { config: PathBuf },
    /// Whether the configuration's ring is a principal ideal domain.
    Pid { config: PathBuf },
    /// Unit witness (n, d) for an integer polynomial over a configuration.
    Witness { config: PathBuf, poly: String },
    /// One tower per isomorphism class of small extensions of Q_p.
    EnumerateExts {
        #[arg(long)]
        prime: u64,
        #[arg(long)]
        max_degree: u32,
    },
}

fn command_name(cmd: &Cmd) -> &'static str {
    match cmd {
        Cmd::Build { .. } => "build",
        Cmd::Verify { .. } => "verify",
        Cmd::Valuate { .. } => "valuate",
        Cmd::Residue { .. } => "residue",
        Cmd::Omega { .. } => "omega",
        Cmd::Newton { .. } => "newton",
        Cmd::CertifyPair { .. } => "certify-pair",
        Cmd::Classify { .. } => "classify",
        Cmd::ClassGroup { .. } => "class-group",
        Cmd::Pid { .. } => "pid",
        Cmd::Witness { .. } => "witness",
        Cmd::EnumerateExts { .. } => "enumerate-exts",
    }
}

fn read_text(path: &Path) -> Result<(String, String)> {
    let bytes = std::fs::read(path)?;
    let digest = textio::sha256_hex(&bytes);
    let text = String::from_utf8(bytes)
        .map_err(|_| Error::InvalidArgument(format!("{} is not UTF-8 text", path.display())))?;
    Ok((text, digest))
}

fn load_spec(cli: &Cli, path: &Path, report: &mut Report) -> Result<SequenceSpec> {
    let (text, digest) = read_text(path)?;
    report.input_digest = digest;
    let mut spec = textio::parse_sequence_spec(&text)?;
    if let Some(n) = cli.precision {
        spec.precision = n;
    }
    if let Some(s) = cli.seed {
        spec.seed = s;
    }
    spec.validate()?;
    report.prime = spec.p.to_string();
    report.precision = spec.precision.to_string();
    report.seed = spec.seed.to_string();
    Ok(spec)
}

/// Loads a built sequence. Without overrides the stored invariants are
/// checked against the deterministic rebuild; with a precision or seed
/// override the stored build data no longer applies, so only the embedded
/// spec is used.
fn load_sequence(cli: &Cli, path: &Path, report: &mut Report) -> Result<StackedSequence> {
    let (text, digest) = read_text(path)?;
    report.input_digest = digest;
    let seq = if cli.precision.is_some() || cli.seed.is_some() {
        let mut spec = textio::embedded_spec(&text)?;
        if let Some(n) = cli.precision {
            spec.precision = n;
        }
        if let Some(s) = cli.seed {
            spec.seed = s;
        }
        spec.validate()?;
        build_prescribed(&spec)?
    } else {
        textio::read_sequence(&text)?
    };
    report.prime = seq.spec.p.to_string();
    report.precision = seq.spec.precision.to_string();
    report.seed = seq.spec.seed.to_string();
    Ok(seq)
}

/// Loads a tower point. Point documents pin the precision their coordinates
/// were issued at: an override may lower it, never raise it.
fn load_point(cli: &Cli, path: &Path, report: &mut Report) -> Result<TowerElement> {
    let (text, digest) = read_text(path)?;
    report.input_digest = digest;
    let x = textio::parse_point(&text)?;
    let have = x.tower().precision();
    let x = match cli.precision {
        None => x,
        Some(n) if n == have => x,
        Some(n) if n < have => x.reduce_precision(n),
        Some(n) => {
            return Err(Error::InvalidArgument(format!(
                "the point document pins precision {have}; cannot raise it to {n} \
                 (re-issue the document at the higher precision)"
            )))
        }
    };
    report.prime = x.tower().p().to_string();
    report.precision = x.tower().precision().to_string();
    Ok(x)
}

fn load_config(cli: &Cli, path: &Path, report: &mut Report) -> Result<IntConfig> {
    let (text, digest) = read_text(path)?;
    report.input_digest = digest;
    let cfg = textio::parse_int_config(&text)?.with_overrides(cli.precision, cli.seed);
    let primes: Vec<String> = cfg.support().iter().map(|p| p.to_string()).collect();
    report.prime = primes.join(",");
    let mut precisions = Vec::new();
    let mut seeds = Vec::new();
    for (_, els) in cfg.assignment() {
        for el in els {
            if let padix::dedekind::ElementBody::SequenceBacked { spec } = &el.body {
                precisions.push(spec.precision.to_string());
                seeds.push(spec.seed.to_string());
            }
        }
    }
    let resolve = |vals: Vec<String>| -> String {
        match vals.first() {
            None => "-".into(),
            Some(first) if vals.iter().all(|v| v == first) => first.clone(),
            Some(_) => "per-element".into(),
        }
    };
    report.precision = resolve(precisions);
    report.seed = resolve(seeds);
    Ok(cfg)
}

/// The numerator of a quotient-free rational function.
fn expect_polynomial(rf: &RationalFunction) -> Result<&Poly<Rat>> {
    let trivial = rf.den().degree() == Some(0);
    if !trivial {
        return Err(Error::InvalidArgument(
            "expected a polynomial, not a quotient".into(),
        ));
    }
    Ok(rf.num())
}

fn verdict_label(v: Verdict) -> &'static str {
    match v {
        Verdict::Certified => "certified",
        Verdict::Refuted => "refuted",
        Verdict::Unknown => "unknown",
    }
}

fn run_verify_checks(seq: &StackedSequence, report: &mut Report) -> Result<()> {
    let outcome = verify_stacked(seq);
    let total = outcome.checks.len();
    let passed = outcome.checks.iter().filter(|c| c.pass).count();
    let mut first_fail = None;
    for c in &outcome.checks {
        report.record("check", format!("pass={} {}", c.pass, c.name));
        if !c.pass {
            report.note(format!("failed {}: {}", c.name, c.detail));
            if first_fail.is_none() {
                first_fail = Some(c.name.clone());
            }
        }
    }
    report.record("checks-passed", format!("{passed}/{total}"));
    match first_fail {
        None => Ok(()),
        Some(name) => Err(Error::InvalidArgument(format!(
            "verification failed at check: {name}"
        ))),
    }
}

fn record_levels(seq: &StackedSequence, report: &mut Report) {
    for (n, rec) in seq.records.iter().enumerate() {
        let a = rec
            .a_val
            .map_or_else(|| "-".to_string(), |k| k.to_string());
        report.record(
            "level",
            format!("n={n} d={} e={} f={} a={a}", rec.d, rec.e, rec.f),
        );
    }
    let entries: Vec<String> = seq.gauge.iter().map(render_rat).collect();
    report.record(
        "gauge",
        if entries.is_empty() {
            "-".to_string()
        } else {
            entries.join(" ")
        },
    );
}

fn run(cli: &Cli, report: &mut Report) -> Result<()> {
    match &cli.command {
        Cmd::Build { spec, sequence_out } => {
            let s = load_spec(cli, spec, report)?;
            let seq = build_prescribed(&s)?;
            let doc = textio::render_sequence(&seq);
            let out = sequence_out
                .clone()
                .unwrap_or_else(|| PathBuf::from(format!("{}.seq", spec.display())));
            std::fs::write(&out, &doc)?;
            eprintln!("padix: wrote sequence document to {}", out.display());
            report.record(
                "sequence-doc",
                format!("sha256={}", textio::sha256_hex(doc.as_bytes())),
            );
            record_levels(&seq, report);
            run_verify_checks(&seq, report)?;
            report.note(format!(
                "built {} levels over Q_{} and verified every check",
                seq.records.len(),
                s.p
            ));
            Ok(())
        }
        Cmd::Verify { sequence } => {
            let seq = load_sequence(cli, sequence, report)?;
            record_levels(&seq, report);
            run_verify_checks(&seq, report)?;
            report.note("all verification checks passed");
            Ok(())
        }
        Cmd::Valuate { sequence, phi } => {
            let seq = load_sequence(cli, sequence, report)?;
            let f = parse_rational_function(phi)?;
            report.record("query", f.render());
            let h = ValuationHandle::over_sequence(seq, CoefficientField::Q);
            let w = valuate(&h, &f)?;
            report.record("value", render_rat(&w));
            report.note(format!("w({}) = {}", f.render(), render_rat(&w)));
            Ok(())
        }
        Cmd::Residue { sequence, phi } => {
            let seq = load_sequence(cli, sequence, report)?;
            let f = parse_rational_function(phi)?;
            report.record("query", f.render());
            let h = ValuationHandle::over_sequence(seq, CoefficientField::Q);
            let r = residue_of(&h, &f)?;
            let coords: Vec<String> = r.coords().iter().map(|c| c.to_string()).collect();
            report.record(
                "residue",
                format!(
                    "degree-over-fp={} coords={}",
                    r.degree_over_fp(),
                    coords.join(",")
                ),
            );
            report.note(format!(
                "residue of {} generates a degree-{} extension of the prime field",
                f.render(),
                r.degree_over_fp()
            ));
            Ok(())
        }
        Cmd::Omega { point } => {
            let x = load_point(cli, point, report)?;
            let om = omega(&x)?;
            let dist = conjugate_distances(&x)?;
            report.record("omega", om.render());
            let rendered: Vec<String> = dist.iter().map(render_rat).collect();
            report.record(
                "conjugate-distances",
                if rendered.is_empty() {
                    "-".to_string()
                } else {
                    rendered.join(" ")
                },
            );
            report.note(format!(
                "largest conjugate distance {}; {} conjugate(s) at lower distance listed",
                om.render(),
                dist.len().saturating_sub(1)
            ));
            Ok(())
        }
        Cmd::Newton { prime, poly } => {
            if !is_prime(*prime) {
                return Err(Error::NotPrime(*prime));
            }
            report.prime = prime.to_string();
            let rf = parse_rational_function(poly)?;
            report.record("query", rf.render());
            let f = expect_polynomial(&rf)?;
            if f.is_zero() {
                return Err(Error::InvalidArgument(
                    "the zero polynomial has no Newton polygon".into(),
                ));
            }
            let mut points = Vec::new();
            for (i, c) in f.coeffs().iter().enumerate() {
                if let ExtVal::Finite(v) = vp_rational(c, *prime)? {
                    points.push((i, v));
                }
            }
            let polygon = polygon_of_points(&points);
            report.record("ord-zero", polygon.ord_zero().to_string());
            for (i, v) in polygon.vertices() {
                report.record("vertex", format!("i={i} v={}", render_rat(v)));
            }
            for s in polygon.segments() {
                report.record(
                    "segment",
                    format!("slope={} length={}", render_rat(&s.slope), s.length),
                );
            }
            let roots: Vec<String> = polygon.root_valuations().iter().map(render_rat).collect();
            report.record(
                "root-valuations",
                if roots.is_empty() {
                    "-".to_string()
                } else {
                    roots.join(" ")
                },
            );
            report.note(format!(
                "{} root valuation(s) from {} segment(s); {} root(s) at zero",
                roots.len(),
                polygon.segments().len(),
                polygon.ord_zero()
            ));
            Ok(())
        }
        Cmd::CertifyPair {
            point,
            delta,
            candidate,
        } => {
            let x = load_point(cli, point, report)?;
            let d = textio::parse_rat_text(delta)?;
            report.record("delta", render_rat(&d));
            let cand = match candidate {
                None => None,
                Some(path) => {
                    let (text, digest) = read_text(path)?;
                    report.record("candidate-input", format!("sha256={digest}"));
                    Some(textio::parse_point(&text)?)
                }
            };
            let cert = certify_minimal_pair(&x, &d, cand.as_ref())?;
            report.record(
                "certificate",
                format!(
                    "verdict={} method={}",
                    verdict_label(cert.verdict),
                    cert.method.unwrap_or("-")
                ),
            );
            if let Some(w) = &cert.witness {
                report.note(w);
            }
            Ok(())
        }
        Cmd::Classify { sequence } => {
            let seq = load_sequence(cli, sequence, report)?;
            match classify(&seq) {
                Classification::DVRDiscrete(e) => {
                    report.record("classification", format!("discrete-valuation-ring e={e}"));
                    report.note(format!(
                        "declared continuation keeps ramification at {e}: the valuation ring is a DVR"
                    ));
                }
                Classification::NonDiscrete => {
                    report.record("classification", "non-discrete");
                    report.note("declared unbounded ramification: the value group is dense");
                }
                Classification::Indeterminate => {
                    report.record("classification", "indeterminate");
                    report.note("no declared continuation: the truncation decides nothing");
                }
            }
            let b = breadth_report(&seq);
            match &b.verdict {
                BreadthVerdict::Zero => report.record("breadth", "zero"),
                BreadthVerdict::NonZero { bound } => {
                    report.record("breadth", format!("nonzero bound={}", render_rat(bound)))
                }
                BreadthVerdict::TruncationOnly => report.record("breadth", "truncation-only"),
            }
            if let Some(g) = &b.last_gauge {
                report.record("last-gauge", render_rat(g));
            }
            Ok(())
        }
        Cmd::ClassGroup { config } => {
            let cfg = load_config(cli, config, report)?;
            let cl = class_group(&cfg)?;
            for s in &cl.summands {
                report.record(
                    "summand",
                    format!("p={} torsion={} rank={}", s.p, s.torsion, s.free_rank),
                );
            }
            report.record("class-group", cl.render());
            report.note(format!("Cl = {}", cl.render()));
            Ok(())
        }
        Cmd::Pid { config } => {
            let cfg = load_config(cli, config, report)?;
            let answer = is_pid(&cfg)?;
            report.record("pid", answer.to_string());
            report.note(if answer {
                "trivial class group: the ring is a principal ideal domain"
            } else {
                "nontrivial class group: the ring is Dedekind but not a PID"
            });
            Ok(())
        }
        Cmd::Witness { config, poly } => {
            let cfg = load_config(cli, config, report)?;
            let rf = parse_rational_function(poly)?;
            report.record("query", rf.render());
            let f = expect_polynomial(&rf)?;
            match factorizability_witness(&cfg, f)? {
                Witness::Witnessed { n, d } => {
                    report.record("witness", format!("n={n} d={d}"));
                    report.note(format!(
                        "({})^{n} / {d} is a unit at every listed element",
                        rf.render()
                    ));
                }
                Witness::CannotWitness { reason } => {
                    report.record("witness", "none");
                    report.note(reason);
                }
            }
            Ok(())
        }
        Cmd::EnumerateExts { prime, max_degree } => {
            if !is_prime(*prime) {
                return Err(Error::NotPrime(*prime));
            }
            if *max_degree < 2 {
                return Err(Error::InvalidArgument(
                    "max degree must be at least 2".into(),
                ));
            }
            let precision = cli.precision.unwrap_or(16);
            report.prime = prime.to_string();
            report.precision = precision.to_string();
            let mut count = 0usize;
            for degree in 2..=*max_degree {
                match enumerate_small_extensions(*prime, degree, precision) {
                    Ok(classes) => {
                        for c in classes {
                            report.record(
                                "extension",
                                format!(
                                    "degree={degree} e={} f={} label={}",
                                    c.e(),
                                    c.f(),
                                    c.label
                                ),
                            );
                            count += 1;
                        }
                    }
                    Err(Error::Unsupported(msg)) => {
                        report.record("unsupported", format!("degree={degree}"));
                        report.note(msg);
                    }
                    Err(e) => return Err(e),
                }
            }
            report.note(format!(
                "{count} isomorphism class(es) across degrees 2..={max_degree}"
            ));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut report = Report::new(command_name(&cli.command));
    if let Err(e) = run(&cli, &mut report) {
        report.fail(&e);
    }
    let text = report.render();
    match &cli.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("padix: cannot write report to {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    match report.status() {
        ReportStatus::Ok => ExitCode::SUCCESS,
        ReportStatus::Failed { .. } => ExitCode::FAILURE,
    }
}
