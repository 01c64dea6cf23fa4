use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use flagcert::certificate::{builtin_certificate, load_certificate, save_certificate, verify_example_order3};
use flagcert::construction::{builtin_spec, limit_densities, load_blowup, BuiltinSpec, LimitDensities};
use flagcert::linalg::min_eigenvalue_float;
use flagcert::orgraph::named;
use flagcert::scalar::{format_ratio, format_rational, parse_rational, rational_to_f64};
use flagcert::sdp::{round_and_verify, NumericalSolution, RoundOutcome, SdpProblem};
use flagcert::{enumerate_flags, enumerate_orgraphs, verify, Orgraph, PsdOutcome, Rational, Scalar, TypeSigma};
use serde_json::{json, Value};

/// Exact verification of flag-algebra certificates for oriented graphs.
#[derive(Parser)]
#[command(name = "flagcert", version)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "FLAGCERT_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// List orgraphs, or flags of a type, up to isomorphism.
    Enumerate {
        #[arg(long)]
        order: usize,
        /// Number of labeled vertices; lists flags instead of graphs.
        #[arg(long)]
        type_order: Option<usize>,
        /// The type as an org1 encoding (default: no arcs among the labels).
        #[arg(long = "type", requires = "type_order")]
        sigma: Option<String>,
    },
    /// Check a certificate exactly.
    Verify {
        /// Certificate JSON file.
        #[arg(required_unless_present = "builtin", conflicts_with = "builtin")]
        path: Option<PathBuf>,
        #[arg(long, value_parser = ["p3", "c4", "k12", "k2e1", "p3-order3", "p3-sdp", "c4-sdp", "k12-sdp"])]
        builtin: Option<String>,
        /// Check against this bound instead of the one in the certificate.
        #[arg(long)]
        bound: Option<String>,
    },
    /// Limit densities of a blowup construction.
    Construct {
        /// Blowup spec JSON file.
        #[arg(required_unless_present = "builtin", conflicts_with = "builtin")]
        path: Option<PathBuf>,
        #[arg(long, value_parser = ["c3", "c4", "k12", "2tournaments"])]
        builtin: Option<String>,
        #[arg(long, default_value_t = 4)]
        max_order: usize,
        /// Only report this graph (name or org1 encoding).
        #[arg(long)]
        target: Option<String>,
    },
    /// Export a problem for an external solver or round its solution.
    Sdp {
        #[command(subcommand)]
        command: SdpCommand,
    },
}

#[derive(Subcommand)]
enum SdpCommand {
    /// Write the problem in SDPA sparse format.
    Export(ExportArgs),
    /// Round a numerical solution and verify the result exactly.
    Round {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1000,10000,100000")]
        denominators: Vec<u64>,
        /// Where to write the certificate.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ExportArgs {
    /// Target graph (name or org1 encoding).
    #[arg(long)]
    target: String,
    /// Host order N.
    #[arg(long)]
    order: usize,
    #[arg(long, default_value_t = 1)]
    type_order: usize,
    /// Flag order (default: largest ℓ with 2ℓ − k ≤ N).
    #[arg(long)]
    flag_order: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

/// Failures that are answers, not errors: exit code 1.
struct Rejected;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Rejected)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

type Outcome = anyhow::Result<Result<(), Rejected>>;

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Enumerate { order, type_order, sigma } => enumerate(cli.format, *order, *type_order, sigma.as_deref()),
        Command::Verify { path, builtin, bound } => verify_cmd(cli.format, path.as_ref(), builtin.as_deref(), bound.as_deref()),
        Command::Construct { path, builtin, max_order, target } => {
            construct(cli.format, path.as_ref(), builtin.as_deref(), *max_order, target.as_deref())
        }
        Command::Sdp { command: SdpCommand::Export(args) } => export(cli.format, args),
        Command::Sdp { command: SdpCommand::Round { problem, solution, denominators, out } } => {
            round(cli.format, problem, solution, denominators, out.as_ref())
        }
    }
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn parse_graph(s: &str) -> anyhow::Result<Orgraph> {
    if let Some(g) = named::by_name(s) {
        return Ok(g.canonical_form());
    }
    let g: Orgraph = s.parse().with_context(|| format!("target {s:?} is neither a known name nor an org1 encoding"))?;
    Ok(g.canonical_form())
}

fn enumerate(format: Format, order: usize, type_order: Option<usize>, sigma: Option<&str>) -> Outcome {
    let items: Vec<String> = match type_order {
        None => enumerate_orgraphs(order)?.iter().map(Orgraph::encoding).collect(),
        Some(k) => {
            let graph = match sigma {
                Some(s) => {
                    let g: Orgraph = s.parse()?;
                    if g.order() != k {
                        bail!("type {s} has order {} but --type-order is {k}", g.order());
                    }
                    g
                }
                None => Orgraph::empty(k),
            };
            enumerate_flags(TypeSigma::new(graph), order)?.flags().iter().map(|f| f.to_string()).collect()
        }
    };
    match format {
        Format::Text => {
            println!("{}", items.len());
            for s in &items {
                println!("{s}");
            }
        }
        Format::Json => print_json(&json!({ "count": items.len(), "items": items })),
    }
    Ok(Ok(()))
}

fn verify_cmd(format: Format, path: Option<&PathBuf>, builtin: Option<&str>, bound: Option<&str>) -> Outcome {
    if builtin == Some("p3-order3") {
        return example(format);
    }
    let (name, mut cert) = match (path, builtin) {
        (Some(p), _) => (p.display().to_string(), load_certificate(p).with_context(|| format!("reading {}", p.display()))?),
        (None, Some(b)) => (b.to_string(), builtin_certificate(b).expect("listed builtin")),
        (None, None) => unreachable!("clap requires one"),
    };
    if let Some(b) = bound {
        cert.bound = parse_rational(b).context("--bound")?;
    }
    let report = verify(&cert)?;
    let eig = min_eigenvalue_float(&cert.q)?;
    let violating: Vec<(&Orgraph, &Rational)> =
        report.slack.iter().filter(|(_, s)| *s < Rational::from_integer(0.into())).map(|(g, s)| (g, s)).collect();
    match format {
        Format::Text => {
            println!("certificate: {name}");
            println!("target: {}  bound: {}  hosts: order {}", cert.target, format_rational(&cert.bound), cert.host_order);
            match &report.psd {
                PsdOutcome::Psd { .. } => println!("psd: yes"),
                PsdOutcome::NotPsd { witness, value } => {
                    let w: Vec<String> = witness.iter().map(format_rational).collect();
                    println!("psd: no (x^T Q x = {} at x = [{}])", format_rational(value), w.join(", "));
                }
            }
            println!("min slack: {} ({:.6}) at {}", format_rational(&report.min_slack), rational_to_f64(&report.min_slack), report.argmin);
            println!("implied bound: {} ({:.6})", format_rational(&report.implied_bound), rational_to_f64(&report.implied_bound));
            println!("min eigenvalue: {eig:.6e}");
            for (g, s) in violating.iter().take(10) {
                println!("violated at {g}: slack {}", format_rational(s));
            }
            if violating.len() > 10 {
                println!("... {} more", violating.len() - 10);
            }
            println!("result: {}", if report.claimed_bound_ok { "VERIFIED" } else { "FAILED" });
        }
        Format::Json => print_json(&json!({
            "certificate": name,
            "target": cert.target.encoding(),
            "bound": format_ratio(&cert.bound),
            "host_order": cert.host_order,
            "psd": report.psd_ok(),
            "min_slack": format_ratio(&report.min_slack),
            "argmin": report.argmin.encoding(),
            "implied_bound": format_ratio(&report.implied_bound),
            "min_eigenvalue": eig,
            "violations": violating.iter().map(|(g, s)| json!({ "graph": g.encoding(), "slack": format_ratio(s) })).collect::<Vec<_>>(),
            "verified": report.claimed_bound_ok,
        })),
    }
    Ok(if report.claimed_bound_ok { Ok(()) } else { Err(Rejected) })
}

fn example(format: Format) -> Outcome {
    let rep = verify_example_order3()?;
    match format {
        Format::Text => {
            for id in &rep.identities {
                println!("{}: {}", id.name, if id.holds() { "ok" } else { "FAILED" });
            }
            let [c0, c1, c2] = &rep.quadratic;
            println!("quadratic: {} + {}ρ + {}ρ²", format_rational(c0), format_rational(c1), format_rational(c2));
            println!("maximum {} at ρ = {}; value at ρ = 1: {}", format_rational(&rep.max_value), format_rational(&rep.argmax), format_rational(&rep.value_at_one));
            println!("result: {}", if rep.ok() { "VERIFIED" } else { "FAILED" });
        }
        Format::Json => print_json(&json!({
            "identities": rep.identities.iter().map(|i| json!({ "name": i.name, "holds": i.holds() })).collect::<Vec<_>>(),
            "quadratic": rep.quadratic.iter().map(format_ratio).collect::<Vec<_>>(),
            "argmax": format_ratio(&rep.argmax),
            "max_value": format_ratio(&rep.max_value),
            "value_at_one": format_ratio(&rep.value_at_one),
            "verified": rep.ok(),
        })),
    }
    Ok(if rep.ok() { Ok(()) } else { Err(Rejected) })
}

fn construct(format: Format, path: Option<&PathBuf>, builtin: Option<&str>, max_order: usize, target: Option<&str>) -> Outcome {
    let target = target.map(parse_graph).transpose()?;
    let exact = |r: &Rational| if format == Format::Json { format_ratio(r) } else { format_rational(r) };
    let rows = match (path, builtin) {
        (Some(p), _) => {
            let spec = load_blowup(p).with_context(|| format!("reading {}", p.display()))?;
            density_rows(&limit_densities(&spec, max_order)?, exact)
        }
        (None, Some(b)) => match builtin_spec(b).expect("listed builtin") {
            BuiltinSpec::Exact(spec) => density_rows(&limit_densities(&spec, max_order)?, exact),
            BuiltinSpec::Float(spec) => density_rows(&limit_densities(&spec, max_order)?, |x| format!("{x:.12}")),
        },
        (None, None) => unreachable!("clap requires one"),
    };
    let rows: Vec<_> = rows.into_iter().filter(|(_, g, _)| target.is_none_or(|t| t == *g)).collect();
    if let Some(t) = target {
        if rows.is_empty() {
            bail!("target {t} has order {} above --max-order {max_order}", t.order());
        }
    }
    match format {
        Format::Text => {
            for (ell, g, d) in &rows {
                println!("{ell} {g} {d}");
            }
        }
        Format::Json => print_json(&json!({
            "densities": rows.iter().map(|(ell, g, d)| json!({ "order": ell, "graph": g.encoding(), "density": d })).collect::<Vec<_>>(),
        })),
    }
    Ok(Ok(()))
}

fn density_rows<T: Scalar>(dens: &LimitDensities<T>, show: impl Fn(&T) -> String) -> Vec<(usize, Orgraph, String)> {
    (1..=dens.max_order()).flat_map(|ell| dens.order(ell).iter().map(|(g, d)| (ell, *g, show(d))).collect::<Vec<_>>()).collect()
}

fn export(format: Format, args: &ExportArgs) -> Outcome {
    let target = parse_graph(&args.target)?;
    let k = args.type_order;
    if k > args.order {
        bail!("--type-order {k} exceeds --order {}", args.order);
    }
    let flag_order = args.flag_order.unwrap_or((args.order + k) / 2);
    let problem = SdpProblem::build(&target, TypeSigma::new(Orgraph::empty(k)), flag_order, args.order)?;
    problem.export_sdpa(&args.out).with_context(|| format!("writing {}", args.out.display()))?;
    match format {
        Format::Text => println!(
            "wrote {}: {} flags, {} hosts, {} variables",
            args.out.display(),
            problem.dim(),
            problem.graphs().len(),
            problem.variables()
        ),
        Format::Json => print_json(&json!({
            "out": args.out.display().to_string(),
            "flags": problem.dim(),
            "hosts": problem.graphs().len(),
            "variables": problem.variables(),
        })),
    }
    Ok(Ok(()))
}

fn round(format: Format, problem: &PathBuf, solution: &PathBuf, denominators: &[u64], out: Option<&PathBuf>) -> Outcome {
    let problem = SdpProblem::import_sdpa(problem).with_context(|| format!("reading {}", problem.display()))?;
    let solution = NumericalSolution::load(solution).with_context(|| format!("reading {}", solution.display()))?;
    let outcome = round_and_verify(&problem, &solution, denominators)?;
    if let (Some(cert), Some(path)) = (outcome.certificate(), out) {
        save_certificate(cert, path).with_context(|| format!("writing {}", path.display()))?;
    }
    let attempts = outcome.attempts();
    match format {
        Format::Text => {
            for a in attempts {
                println!(
                    "D = {}: psd {}, implied {:.6}, bound {}",
                    a.denominator,
                    if a.psd.is_psd() { "yes" } else { "no" },
                    rational_to_f64(&a.implied_bound),
                    format_rational(&a.bound)
                );
            }
            match &outcome {
                RoundOutcome::Certified { certificate, denominator, .. } => {
                    println!("certified {} ≤ {} with D = {denominator}", certificate.target, format_rational(&certificate.bound))
                }
                RoundOutcome::Failed { .. } => println!("no denominator gave a PSD matrix"),
            }
        }
        Format::Json => print_json(&json!({
            "attempts": attempts.iter().map(|a| json!({
                "denominator": a.denominator,
                "psd": a.psd.is_psd(),
                "implied_bound": format_ratio(&a.implied_bound),
                "bound": format_ratio(&a.bound),
            })).collect::<Vec<_>>(),
            "certified": outcome.certificate().is_some(),
            "bound": outcome.certificate().map(|c| format_ratio(&c.bound)),
            "out": out.map(|p| p.display().to_string()),
        })),
    }
    Ok(if outcome.certificate().is_some() { Ok(()) } else { Err(Rejected) })
}
