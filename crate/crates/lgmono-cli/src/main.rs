mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use lgmono::alignment::{self, AlignOptions, ExceptionalMap};
use lgmono::catalog::{Catalog, CatalogEntry};
use lgmono::continuation;
use lgmono::quiver;
use lgmono::solver::{self, CritSet};

#[derive(Parser, Debug)]
#[command(
    name = "lgm",
    version,
    about = "Landau-Ginzburg monodromy and exceptional collections on toric Fano manifolds"
)]
struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Catalog file in the v1 JSON schema (defaults to the built-in catalog).
    #[arg(long, global = true)]
    catalog: Option<PathBuf>,
    /// Seed for the multistart solver.
    #[arg(long, global = true, env = "LGM_SEED", default_value_t = 7)]
    seed: u64,
    /// Newton residual tolerance.
    #[arg(long, global = true)]
    tol_residual: Option<f64>,
    /// Endpoint matching tolerance for loops.
    #[arg(long, global = true)]
    match_tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List catalog entries.
    List,
    /// Critical points of an entry's potential.
    Solve { id: String },
    /// Monodromy permutation of the loop attached to a divisor.
    Monodromy {
        id: String,
        #[arg(long)]
        divisor: String,
        /// Base scaling for entries with a base/fiber partition.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Collection quiver, or its sub-quiver for one divisor.
    Quiver {
        id: String,
        #[arg(long)]
        divisor: Option<String>,
        #[arg(long)]
        dot: bool,
    },
    /// Containment check for one entry or all of them.
    Check {
        id: Option<String>,
        #[arg(long)]
        all: bool,
        /// Also compare stored monodromy figures and run the labelling recipes.
        #[arg(long)]
        full: bool,
    },
    /// SVG scatter of the critical points.
    Plot {
        id: String,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Failure class, mapped to the process exit code.
enum Failure {
    Verification(anyhow::Error),
    Usage(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Verification(e.into())
    }
}

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

struct RunConfig {
    json: bool,
    opts: AlignOptions,
}

impl RunConfig {
    fn from_cli(cli: &Cli) -> Result<Self, Failure> {
        let mut opts = AlignOptions::default();
        opts.solve.seed = cli.seed;
        if let Some(t) = cli.tol_residual {
            if !(t > 0.0) {
                return Err(usage(anyhow!("--tol-residual must be positive")));
            }
            opts.solve.tol_residual = t;
        }
        if let Some(t) = cli.match_tol {
            if !(t > 0.0) {
                return Err(usage(anyhow!("--match-tol must be positive")));
            }
            opts.track.match_tol = t;
        }
        Ok(Self {
            json: cli.json,
            opts,
        })
    }
}

fn load_catalog(path: &Option<PathBuf>) -> Result<Catalog, Failure> {
    match path {
        None => Ok(Catalog::builtin()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading {}", p.display()))
                .map_err(usage)?;
            Catalog::from_json(&text).map_err(usage)
        }
    }
}

fn entry<'a>(cat: &'a Catalog, id: &str) -> Result<&'a CatalogEntry, Failure> {
    cat.get(id).map_err(usage)
}

fn solve_and_label(
    e: &CatalogEntry,
    cfg: &RunConfig,
) -> Result<(CritSet, Option<ExceptionalMap>), Failure> {
    let cs = solver::solve_all(&e.potential(), &cfg.opts.solve)?;
    let map = if e.fixtures.is_empty() {
        None
    } else {
        Some(alignment::label_solutions(e, &cs)?)
    };
    Ok((cs, map))
}

fn point_labels(cs: &CritSet, map: &Option<ExceptionalMap>) -> Vec<String> {
    match map {
        Some(m) => m.point_labels(),
        None => (0..cs.len()).map(|i| i.to_string()).collect(),
    }
}

fn fmt_c(z: &lgmono::C64) -> String {
    if z.im.abs() < 5e-13 {
        format!("{:.6}", z.re)
    } else {
        format!("{:.6}{:+.6}i", z.re, z.im)
    }
}

fn print(v: &Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(v).expect("json values serialize")
    );
}

fn cmd_list(cat: &Catalog, cfg: &RunConfig) -> Result<(), Failure> {
    let rows: Vec<Value> = cat
        .entries()
        .iter()
        .map(|e| json!({"id": e.id, "title": e.title, "dim": e.dim(), "chi": e.collection.len()}))
        .collect();
    if cfg.json {
        print(&Value::Array(rows));
    } else {
        for e in cat.entries() {
            println!(
                "{:<18} dim {}  chi {}  {}",
                e.id,
                e.dim(),
                e.collection.len(),
                e.title
            );
        }
    }
    Ok(())
}

fn cmd_solve(e: &CatalogEntry, cfg: &RunConfig) -> Result<(), Failure> {
    let (cs, map) = solve_and_label(e, cfg)?;
    let labels = point_labels(&cs, &map);
    if cfg.json {
        let points: Vec<Value> = cs
            .points
            .iter()
            .zip(&labels)
            .enumerate()
            .map(|(i, (p, l))| {
                json!({
                    "index": i,
                    "label": l,
                    "coords": p.coords.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                    "residual": p.residual,
                    "min_singular": p.min_singular,
                })
            })
            .collect();
        print(
            &json!({"id": e.id, "potential": cs.potential.to_json(), "reduced": solver::is_reduced(&cs), "points": points}),
        );
    } else {
        println!("{}: {} critical points", e.id, cs.len());
        for (p, l) in cs.points.iter().zip(&labels) {
            let coords: Vec<String> = p.coords.iter().map(fmt_c).collect();
            println!("  {:<6} ({})", l, coords.join(", "));
        }
    }
    Ok(())
}

fn cmd_monodromy(
    e: &CatalogEntry,
    divisor: &str,
    epsilon: Option<f64>,
    cfg: &RunConfig,
) -> Result<(), Failure> {
    let d = e.parse_divisor(divisor).map_err(usage)?;
    let eps = epsilon.unwrap_or(e.epsilon);
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(usage(anyhow!("--epsilon must lie in (0, 1]")));
    }
    let (cs, map) = solve_and_label(e, cfg)?;
    let perm = continuation::divisor_monodromy(
        &cs.potential,
        e.rays(),
        &d,
        e.partition.as_ref(),
        eps,
        &cs,
        &cfg.opts.track,
    )?;
    let label_cycles = match &map {
        Some(m) => m.on_members(&perm.permutation).cycle_string_with(&m.labels),
        None => perm.permutation.to_string(),
    };
    if cfg.json {
        let mapping: serde_json::Map<String, Value> = perm
            .mapping()
            .iter()
            .enumerate()
            .map(|(i, &t)| (i.to_string(), json!(t)))
            .collect();
        print(&json!({
            "divisor": e.format_divisor(&d),
            "epsilon": perm.meta.epsilon,
            "mapping": mapping,
            "cycles": perm.permutation.to_string(),
            "label_cycles": label_cycles,
            "labels": point_labels(&cs, &map),
        }));
    } else {
        println!("{label_cycles}");
    }
    Ok(())
}

fn cmd_quiver(
    e: &CatalogEntry,
    divisor: Option<&str>,
    dot: bool,
    cfg: &RunConfig,
) -> Result<(), Failure> {
    let mut q = e.quiver();
    if let Some(expr) = divisor {
        q = quiver::divisor_subquiver(&q, &e.parse_divisor(expr).map_err(usage)?);
    }
    if dot {
        print!("{}", q.to_dot(&e.ray_names));
    } else if cfg.json {
        print(&q.to_json(&e.ray_names));
    } else {
        println!(
            "{}: {} vertices, {} edges",
            e.id,
            q.vertices.len(),
            q.edges.len()
        );
        for edge in &q.edges {
            println!(
                "  {:<4} {} -> {}  {}",
                edge.name,
                q.vertices[edge.source],
                q.vertices[edge.target],
                e.format_divisor(&edge.label)
            );
        }
    }
    Ok(())
}

fn check_one(
    cat: &Catalog,
    e: &CatalogEntry,
    full: bool,
    cfg: &RunConfig,
) -> Result<(bool, Value), Failure> {
    let cs = solver::solve_all(&e.potential(), &cfg.opts.solve)?;
    let map = alignment::label_solutions(e, &cs)?;
    let report = alignment::containment_report(e, &cs, &map, &cfg.opts.track);
    let mut passed = report.passed;
    let mut out = serde_json::to_value(&report)?;
    if full {
        let fixtures = alignment::check_monodromy_fixtures(e, &cs, &map, &cfg.opts.track);
        passed &= fixtures.iter().all(|f| f.passed);
        let recipes = match alignment::verify_labeling_recipe(e, cat, &cs, &map, &cfg.opts) {
            Ok(r) => serde_json::to_value(&r)?,
            Err(err) => {
                passed = false;
                json!({"error": err.to_string()})
            }
        };
        out["fixtures"] = serde_json::to_value(&fixtures)?;
        out["recipes"] = recipes;
    }
    out["passed"] = json!(passed);
    if !cfg.json {
        println!("{} {}", if passed { "PASS" } else { "FAIL" }, e.id);
        if let Some(alt) = &e.alternate_names {
            let names: Vec<String> = map
                .labels
                .iter()
                .map(|l| format!("{l}={}", alt.get(l).map_or("?", String::as_str)))
                .collect();
            println!("  alternate names: {}", names.join(", "));
        }
        for v in &report.verdicts {
            let status = match (&v.error, v.contained) {
                (Some(err), _) => err.clone(),
                (None, true) => "contained".into(),
                (None, false) => format!(
                    "violations: {}",
                    v.violations
                        .iter()
                        .map(|x| format!("{}->{}", x.source, x.target))
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            };
            println!("  {:<12} {:<48} {}", v.divisor, v.cycles, status);
        }
        if full {
            for f in out["fixtures"].as_array().into_iter().flatten() {
                if f["passed"] != json!(true) {
                    println!(
                        "  figure {} expected {} got {}",
                        f["divisor"], f["expected"], f["computed"]
                    );
                }
            }
            if let Some(err) = out["recipes"].get("error") {
                println!("  recipe: {err}");
            }
        }
    }
    Ok((passed, out))
}

fn cmd_check(
    cat: &Catalog,
    id: Option<&str>,
    all: bool,
    full: bool,
    cfg: &RunConfig,
) -> Result<(), Failure> {
    let targets: Vec<&CatalogEntry> = match (id, all) {
        (Some(_), true) => return Err(usage(anyhow!("give an entry id or --all, not both"))),
        (None, false) => return Err(usage(anyhow!("give an entry id or --all"))),
        (Some(id), false) => vec![entry(cat, id)?],
        (None, true) => cat.entries().iter().collect(),
    };
    let mut ok = true;
    let mut reports = Vec::new();
    for e in targets {
        match check_one(cat, e, full, cfg) {
            Ok((passed, v)) => {
                ok &= passed;
                reports.push(v);
            }
            Err(Failure::Verification(err)) => {
                ok = false;
                if !cfg.json {
                    println!("FAIL {} ({err})", e.id);
                }
                reports.push(json!({"entry_id": e.id, "passed": false, "error": err.to_string()}));
            }
            Err(u) => return Err(u),
        }
    }
    if cfg.json {
        print(&Value::Array(reports));
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Verification(anyhow!("containment check failed")))
    }
}

fn cmd_plot(e: &CatalogEntry, out: &PathBuf, cfg: &RunConfig) -> Result<(), Failure> {
    let (cs, map) = solve_and_label(e, cfg)?;
    let svg = plot::scatter_svg(
        &format!("Crit({}) - {}", e.id, e.title),
        &cs.coords(),
        &point_labels(&cs, &map),
    );
    std::fs::write(out, svg).with_context(|| format!("writing {}", out.display()))?;
    if !cfg.json {
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = RunConfig::from_cli(cli)?;
    let cat = load_catalog(&cli.catalog)?;
    match &cli.command {
        Command::List => cmd_list(&cat, &cfg),
        Command::Solve { id } => cmd_solve(entry(&cat, id)?, &cfg),
        Command::Monodromy {
            id,
            divisor,
            epsilon,
        } => cmd_monodromy(entry(&cat, id)?, divisor, *epsilon, &cfg),
        Command::Quiver { id, divisor, dot } => {
            cmd_quiver(entry(&cat, id)?, divisor.as_deref(), *dot, &cfg)
        }
        Command::Check { id, all, full } => cmd_check(&cat, id.as_deref(), *all, *full, &cfg),
        Command::Plot { id, out } => cmd_plot(entry(&cat, id)?, out, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("usage error: {e:#}");
            ExitCode::from(2)
        }
    }
}
