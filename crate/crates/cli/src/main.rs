use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kgf::manifest::{load_manifest, Overrides, ProjectManifest, Serialization};
use kgf::pipeline::{has_lint_errors, run_stages, Stage};
use kgf::report::{IterationReport, StageStatus};
use kgf::{diff_iterations, read_summary};
use kgf_core::quality::OverallStatus;

const PASS: u8 = 0;
const FAIL: u8 = 1;
const CONFIG: u8 = 2;

/// Knowledge graph project runner.
///
/// Exit status: 0 pass, 1 quality or evaluation failure, 2 configuration
/// error. Every flag can also be set through the KGF_ variable shown in
/// its help.
#[derive(Parser)]
#[command(name = "kgf", version)]
struct Cli {
    /// Project manifest (TOML).
    #[arg(long, global = true, env = "KGF_MANIFEST", default_value = "kgf.toml")]
    manifest: PathBuf,
    /// Overrides the manifest's iteration_label.
    #[arg(long, global = true, env = "KGF_ITERATION")]
    iteration: Option<String>,
    /// Overrides the manifest's output_dir.
    #[arg(long, global = true, env = "KGF_OUT")]
    out: Option<PathBuf>,
    /// Serialization of the graph artifact: turtle or nquads.
    #[arg(long, global = true, env = "KGF_FORMAT")]
    format: Option<Serialization>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest the data sources and write quality profiles.
    Profile,
    /// Profile, then clean and join the tables.
    Prep,
    /// Build the graph from the prepared tables.
    Map,
    /// Build the graph, load it into the store and run integrity queries.
    Load,
    /// Lint the ontology.
    Lint,
    /// Run the three-level quality check.
    Quality,
    /// Evaluate the CQ backlog (runs all stages).
    Evaluate,
    /// Run a full iteration.
    Run,
    /// Serve an iteration's store over a read-only SPARQL endpoint.
    Serve {
        #[arg(long, env = "KGF_PORT", default_value_t = 7878)]
        port: u16,
        #[arg(long, env = "KGF_BIND", default_value = "127.0.0.1")]
        bind: IpAddr,
        /// N-Quads file to serve instead of the iteration's store.nq.
        #[arg(long)]
        store: Option<PathBuf>,
    },
    /// Compare two iteration reports (report.json files or iteration directories).
    Diff {
        from: PathBuf,
        to: PathBuf,
        /// Print JSON instead of Markdown.
        #[arg(long)]
        json: bool,
    },
}

fn manifest(cli: &Cli) -> Result<ProjectManifest, ExitCode> {
    let overrides = Overrides {
        iteration_label: cli.iteration.clone(),
        output_dir: cli.out.clone(),
        serialization: cli.format,
    };
    load_manifest(&cli.manifest, &overrides).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(CONFIG)
    })
}

fn print_stages(report: &IterationReport) {
    for s in &report.stages {
        let status = match s.status {
            StageStatus::Ok => "ok",
            StageStatus::Failed => "FAILED",
            StageStatus::Skipped => "skipped",
        };
        match &s.error {
            Some(e) => println!("{:<9} {:<8} {:>9.1} ms  {e}", s.stage, status, s.duration_ms),
            None => println!("{:<9} {:<8} {:>9.1} ms", s.stage, status, s.duration_ms),
        }
    }
}

fn print_summary(report: &IterationReport) {
    if let Some(q) = &report.quality {
        println!(
            "quality: level 1 {}, level 2 {}, level 3 {}",
            pass_word(q.level1.passed),
            pass_word(q.level2.passed),
            pass_word(q.level3.passed)
        );
    }
    if let Some(t) = &report.evaluation {
        println!("fulfillment rate: {:.4} ({}/{})", t.fulfillment_rate, t.passed, t.evaluable);
    }
    println!("overall: {}", report.overall);
}

fn pass_word(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

fn stages_ok(report: &IterationReport) -> bool {
    report.failed_stages().next().is_none()
}

fn run(cli: &Cli, target: Stage) -> ExitCode {
    let m = match manifest(cli) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let stages = if target == Stage::Model {
        vec![Stage::Model]
    } else {
        target.with_prerequisites()
    };
    let report = match run_stages(&m, &stages) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: writing {}: {e}", m.iteration_dir().display());
            return ExitCode::from(FAIL);
        }
    };
    print_stages(&report);
    let ok = match target {
        Stage::Model => {
            print!("{}", kgf_core::ontology::render_findings(&report.lint_findings));
            stages_ok(&report) && !has_lint_errors(&report)
        }
        Stage::Load => {
            for o in &report.integrity {
                println!("integrity {:<24} {} {}", o.name, pass_word(o.passed), o.detail);
            }
            stages_ok(&report) && report.integrity.iter().all(|o| o.passed)
        }
        Stage::Quality | Stage::Evaluate => {
            print_summary(&report);
            if target == Stage::Quality {
                report.overall == OverallStatus::Pass
            } else {
                stages_ok(&report)
            }
        }
        _ => stages_ok(&report),
    };
    println!("artifacts: {}", m.iteration_dir().display());
    ExitCode::from(if ok { PASS } else { FAIL })
}

fn run_full(cli: &Cli) -> ExitCode {
    let m = match manifest(cli) {
        Ok(m) => m,
        Err(code) => return code,
    };
    match kgf::run_iteration(&m) {
        Ok(report) => {
            print_stages(&report);
            print_summary(&report);
            println!("artifacts: {}", m.iteration_dir().display());
            ExitCode::from(if report.overall == OverallStatus::Pass { PASS } else { FAIL })
        }
        Err(e) => {
            eprintln!("error: writing {}: {e}", m.iteration_dir().display());
            ExitCode::from(FAIL)
        }
    }
}

fn report_path(p: &Path) -> PathBuf {
    if p.is_dir() {
        p.join("report.json")
    } else {
        p.to_path_buf()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Profile => run(&cli, Stage::Profile),
        Command::Prep => run(&cli, Stage::Prep),
        Command::Map => run(&cli, Stage::Map),
        Command::Load => run(&cli, Stage::Load),
        Command::Lint => run(&cli, Stage::Model),
        Command::Quality => run(&cli, Stage::Quality),
        Command::Evaluate => run(&cli, Stage::Evaluate),
        Command::Run => run_full(&cli),
        Command::Serve { port, bind, store } => {
            let path = match store {
                Some(p) => p.clone(),
                None => match manifest(&cli) {
                    Ok(m) => m.iteration_dir().join("store.nq"),
                    Err(code) => return code,
                },
            };
            let store = match kgf::serve::load_store(&path) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e} (run the iteration first)");
                    return ExitCode::from(CONFIG);
                }
            };
            let runtime = tokio::runtime::Runtime::new().expect("tokio runtime");
            match runtime.block_on(kgf::serve::serve(store, SocketAddr::new(*bind, *port))) {
                Ok(()) => ExitCode::from(PASS),
                Err(e) => {
                    eprintln!("error: cannot serve on {bind}:{port}: {e}");
                    ExitCode::from(FAIL)
                }
            }
        }
        Command::Diff { from, to, json } => {
            let (a, b) = match (read_summary(&report_path(from)), read_summary(&report_path(to))) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(e), _) | (_, Err(e)) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(CONFIG);
                }
            };
            let d = diff_iterations((&a.0, &a.1), (&b.0, &b.1));
            if *json {
                println!("{}", serde_json::to_string_pretty(&d).expect("diff serializes"));
            } else {
                print!("{}", d.to_markdown());
            }
            ExitCode::from(PASS)
        }
    }
}
