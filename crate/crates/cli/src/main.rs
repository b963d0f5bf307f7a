use clap::{Args, Parser, Subcommand};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use symred::liealg::{normalize, parse_element, verify_conjugator, CaseId, LieAlgebraCase, Params};
use symred::reduction::apply_ansatz;
use symred::solutions::{
    catalog, entry, parse_values, quadrature_grid, quadrature_solve, verify_all, verify_flow, SolutionEntry,
    SolutionError, VerifyConfig,
};

mod report;

use report::{Report, RunInfo, Summary};

#[derive(Parser)]
#[command(name = "symred", version, about = "Approximate symmetry reductions of the dissipative wave equation")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Browse the solution catalog.
    Catalog {
        #[command(subcommand)]
        cmd: CatalogCmd,
    },
    /// Verify entries against the split equations and emit a JSON report.
    Verify(VerifyArgs),
    /// Normal form of a one-dimensional subalgebra.
    Classify {
        case: CaseId,
        element: String,
        #[command(flatten)]
        params: AlgParams,
    },
    /// Commutators of a case basis.
    Bracket {
        case: CaseId,
        /// Print the full commutator table.
        #[arg(long)]
        table: bool,
    },
    /// Reduced equations of an entry's ansatz and the reduction checks.
    Reduce {
        id: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Tabulate a quadrature entry as CSV `t,F`.
    Quadrature {
        id: String,
        /// Parameter assignment `name=value`; overrides the entry's first set.
        #[arg(long = "set", value_name = "NAME=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        points: Option<usize>,
        /// Output file (default stdout).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Push an entry's closed forms along a basis generator and re-verify.
    Flow {
        id: String,
        #[arg(long = "gen")]
        generator: String,
        #[arg(long, allow_negative_numbers = true)]
        tau: f64,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Subcommand)]
enum CatalogCmd {
    List {
        #[arg(long)]
        case: Option<CaseId>,
        /// Substring of the subalgebra label.
        #[arg(long)]
        subalgebra: Option<String>,
        #[arg(long)]
        json: bool,
    },
    Show {
        id: String,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long, env = "SYMRED_SEED", default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    ids: Vec<String>,
    #[arg(long, conflicts_with = "ids")]
    all: bool,
    #[command(flatten)]
    run: RunArgs,
    /// Override every entry's tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Args)]
struct AlgParams {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    p: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    q: f64,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    s: f64,
}

impl AlgParams {
    fn params(&self) -> Params {
        [("p", self.p), ("q", self.q), ("s", self.s)].iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }
}

enum Failure {
    Usage(String),
    Verify,
}

impl From<SolutionError> for Failure {
    fn from(e: SolutionError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Catalog { cmd } => catalog_cmd(cmd),
        Cmd::Verify(a) => verify_cmd(a),
        Cmd::Classify { case, element, params } => classify_cmd(case, &element, &params),
        Cmd::Bracket { case, table } => bracket_cmd(case, table),
        Cmd::Reduce { id, run } => reduce_cmd(&id, &run),
        Cmd::Quadrature { id, set, points, output } => quadrature_cmd(&id, &set, points, output),
        Cmd::Flow { id, generator, tau, run } => flow_cmd(&id, &generator, tau, &run),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn pool(jobs: Option<usize>) {
    if let Some(n) = jobs {
        // only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn catalog_cmd(cmd: CatalogCmd) -> Result<(), Failure> {
    match cmd {
        CatalogCmd::List { case, subalgebra, json } => {
            let sel: Vec<&SolutionEntry> = catalog()
                .iter()
                .filter(|e| case.map_or(true, |c| e.case == c))
                .filter(|e| subalgebra.as_ref().map_or(true, |s| e.subalgebra.contains(s.as_str())))
                .collect();
            if json {
                println!("{}", serde_json::to_string_pretty(&sel).map_err(usage)?);
            } else {
                for e in sel {
                    println!("{:<7} {:<4} {:<22} {:<17} ({})", e.id, e.case, e.subalgebra, e.kind.as_str(), e.label);
                }
            }
        }
        CatalogCmd::Show { id } => {
            let e = entry(&id)?;
            println!("{}", serde_json::to_string_pretty(e).map_err(usage)?);
        }
    }
    Ok(())
}

fn verify_cmd(a: VerifyArgs) -> Result<(), Failure> {
    pool(a.run.jobs);
    let mut sel: Vec<SolutionEntry> = if a.all {
        catalog().to_vec()
    } else if a.ids.is_empty() {
        return Err(usage("give entry ids or --all"));
    } else {
        a.ids.iter().map(|id| entry(id).cloned()).collect::<Result<_, _>>()?
    };
    if let Some(t) = a.tol {
        sel.iter_mut().for_each(|e| e.tolerance = t);
    }
    let cfg = VerifyConfig { samples: a.run.samples, seed: a.run.seed };
    let refs: Vec<&SolutionEntry> = sel.iter().collect();
    let reps = verify_all(&refs, &cfg).into_iter().collect::<Result<Vec<_>, _>>()?;
    let summary = Summary {
        pass: reps.iter().filter(|r| r.pass).count(),
        fail: reps.iter().filter(|r| !r.pass).count(),
        discrepancies: reps.iter().filter(|r| r.discrepancy()).count(),
    };
    let ok = summary.fail == 0;
    let report = Report {
        run: RunInfo {
            seed: cfg.seed,
            timestamp: (!a.no_timestamp).then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        entries: reps,
        summary,
    };
    let text = serde_json::to_string_pretty(&report).map_err(usage)? + "\n";
    match &a.report {
        Some(path) => {
            std::fs::write(path, text)?;
            for r in &report.entries {
                println!("{:<7} {} max {:.3e}", r.id, if r.pass { "PASS" } else { "FAIL" }, r.max());
            }
            println!(
                "{} pass, {} fail, {} discrepancies",
                report.summary.pass, report.summary.fail, report.summary.discrepancies
            );
        }
        None => print!("{text}"),
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}

fn classify_cmd(case: CaseId, element: &str, params: &AlgParams) -> Result<(), Failure> {
    let c = LieAlgebraCase::new(case).map_err(usage)?;
    let alg = c.numeric(&params.params()).map_err(usage)?;
    let x = parse_element(case, &c.names, element).map_err(usage)?;
    let cls = normalize(&alg, &x).map_err(usage)?;
    println!("{}", cls);
    println!("representative: {}", cls.representative.format(&c.names));
    for step in &cls.conjugator {
        let g = symred::liealg::AlgebraElement::new(case, step.generator.clone());
        println!("conjugator: exp({} * ({}))", step.parameter, g.format(&c.names));
    }
    println!("scale: {}", cls.scale);
    println!("conjugator residual: {:.3e}", verify_conjugator(&alg, &x, &cls));
    if let Some(n) = &cls.note {
        println!("note: {n}");
    }
    Ok(())
}

fn bracket_cmd(case: CaseId, table: bool) -> Result<(), Failure> {
    let c = LieAlgebraCase::new(case).map_err(usage)?;
    if !table {
        for l in c.bracket_lines(false) {
            println!("{l}");
        }
        return Ok(());
    }
    let cells: Vec<Vec<String>> =
        (0..c.dim()).map(|i| (0..c.dim()).map(|j| c.format_combination(&c.constants[i][j])).collect()).collect();
    let w = cells.iter().flatten().chain(&c.names).map(|s| s.chars().count()).max().unwrap_or(1);
    let mut head = format!("{:w$}", "");
    for n in &c.names {
        head.push_str(&format!(" | {:w$}", n));
    }
    println!("{}", head.trim_end());
    for (i, row) in cells.iter().enumerate() {
        let mut line = format!("{:w$}", c.names[i]);
        for cell in row {
            line.push_str(&format!(" | {:w$}", cell));
        }
        println!("{}", line.trim_end());
    }
    Ok(())
}

fn reduce_cmd(id: &str, run: &RunArgs) -> Result<(), Failure> {
    pool(run.jobs);
    let e = entry(id)?;
    let ansatz = e.ansatz().map_err(usage)?.ok_or_else(|| usage(format!("entry {id} has no ansatz")))?;
    println!("xi = {}", ansatz.xi);
    for (k, v) in &ansatz.forms {
        println!("{k} = {v}");
    }
    let pair = e.pair().map_err(usage)?;
    for (n, r) in apply_ansatz(&pair, &ansatz).map_err(usage)? {
        println!("{n} / ({}) : {}", ansatz.factor(&n), r);
    }
    let cfg = VerifyConfig { samples: run.samples, seed: run.seed };
    let rep = symred::solutions::verify(e, &cfg)?;
    let mut ok = true;
    for c in
        rep.checks.iter().filter(|c| c.name.starts_with("xi:") || c.name.starts_with("ode:") || c.name == "invariance")
    {
        ok &= c.pass();
        println!("{:<32} {:.3e} {}", c.name, c.value, if c.pass() { "PASS" } else { "FAIL" });
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}

fn quadrature_cmd(id: &str, set: &[String], points: Option<usize>, output: Option<PathBuf>) -> Result<(), Failure> {
    let mut e = entry(id)?.clone();
    let q = e.quadrature.as_mut().ok_or_else(|| usage(format!("entry {id} has no quadrature data")))?;
    if let Some(n) = points {
        q.points = n;
    }
    let mut values: BTreeMap<String, f64> = q.sets.first().cloned().unwrap_or_default();
    values.extend(parse_values(&set.iter().map(|s| s.replacen('=', " = ", 1)).collect::<Vec<_>>())?);
    let grid = quadrature_grid(&e, &values)?;
    let table = quadrature_solve(&e, &values, &grid)?;
    let sink: Box<dyn std::io::Write> = match output {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    w.write_record(["t", "F"]).map_err(usage)?;
    for (t, f) in table.t.iter().zip(&table.f) {
        w.write_record([t.to_string(), f.to_string()]).map_err(usage)?;
    }
    w.flush()?;
    Ok(())
}

fn flow_cmd(id: &str, generator: &str, tau: f64, run: &RunArgs) -> Result<(), Failure> {
    pool(run.jobs);
    let e = entry(id)?;
    let cfg = VerifyConfig { samples: run.samples, seed: run.seed };
    let rep = verify_flow(e, generator, tau, &cfg)?;
    println!("{}", serde_json::to_string_pretty(&rep).map_err(usage)?);
    if rep.pass {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}
