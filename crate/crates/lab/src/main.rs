use clap::{Parser, Subcommand};
use scc_lab::config::{ExperimentConfig, EXPERIMENTS};
use scc_core::fuchsian::{enumerate_orbit, OrbitConfig};
use scc_core::hyperbolic::Point;
use scc_core::witness::{check_suborder_axioms, describe};
use scc_lab::{formats, records, report, LabError};
use std::path::PathBuf;
use std::process::ExitCode;

const DEFAULT_RESULTS: &str = "results/results.jsonl";

#[derive(Parser)]
#[command(name = "scc-lab", about = "Run counting, walk and witness experiments and report on them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and append its record to the results file.
    Run {
        #[arg(long)]
        experiment: Option<String>,
        /// TOML file overriding the experiment defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        /// Results file (JSON lines, appended).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for exported tables (orbit, drift, walk summary,
        /// trajectory log) when the experiment produces them.
        #[arg(long)]
        artifacts: Option<PathBuf>,
    },
    /// Summarise a results file; writes report.md and report.csv.
    Report {
        #[arg(long, default_value = DEFAULT_RESULTS)]
        results: PathBuf,
        /// Directory for report.md and report.csv; defaults to the results
        /// file's directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List experiment names with their default configs.
    List,
    /// Enumerate an orbit of a group given as TOML and write it as CSV.
    Orbit {
        #[arg(long)]
        group: PathBuf,
        #[arg(long)]
        radius: f64,
        /// Base point, real part.
        #[arg(long, default_value_t = 0.0)]
        x: f64,
        /// Base point, imaginary part.
        #[arg(long, default_value_t = 1.0)]
        y: f64,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Load a witness graph from JSON and check the suborder axioms.
    Witness {
        #[arg(long)]
        graph: PathBuf,
    },
}

fn run(
    experiment: Option<String>,
    config: Option<PathBuf>,
    seed: Option<u64>,
    workers: Option<usize>,
    out: Option<PathBuf>,
    artifacts: Option<PathBuf>,
) -> Result<bool, LabError> {
    let mut cfg = match (&config, &experiment) {
        (Some(path), e) => ExperimentConfig::from_file(path, e.as_deref())?,
        (None, Some(e)) => ExperimentConfig::defaults(e)?,
        (None, None) => return Err(LabError::Usage("need --experiment or --config".into())),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(w) = workers {
        cfg.workers = w;
    }
    cfg.validate()?;
    let path = out.or_else(|| cfg.out.clone().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from(DEFAULT_RESULTS));
    let (rec, tables) = scc_lab::run_with_artifacts(&cfg)?;
    records::append(&path, &rec)?;
    if let Some(dir) = artifacts {
        std::fs::create_dir_all(&dir)?;
        for (name, text) in &tables {
            std::fs::write(dir.join(name), text)?;
            println!("wrote {}", dir.join(name).display());
        }
    }
    println!("{} config {} -> {}", rec.experiment, rec.config_hash, path.display());
    for (k, v) in &rec.metrics {
        println!("  {k} = {v}");
    }
    for (id, pass) in &rec.criteria {
        println!("{id}: {}", if *pass { "PASS" } else { "FAIL" });
    }
    Ok(rec.passed())
}

fn report_cmd(results: PathBuf, out: Option<PathBuf>) -> Result<bool, LabError> {
    let loaded = records::load(&results)?;
    let rep = report::build(&loaded);
    let dir = out.unwrap_or_else(|| results.parent().map(PathBuf::from).unwrap_or_default());
    if !dir.as_os_str().is_empty() {
        std::fs::create_dir_all(&dir)?;
    }
    let md = rep.markdown();
    std::fs::write(dir.join("report.md"), &md)?;
    std::fs::write(dir.join("report.csv"), rep.csv())?;
    print!("{md}");
    Ok(rep.all_pass())
}

fn orbit_cmd(group: PathBuf, radius: f64, x: f64, y: f64, out: Option<PathBuf>) -> Result<bool, LabError> {
    let g = formats::group_from_toml(&std::fs::read_to_string(group)?)?;
    let p = Point::new(x, y)?;
    let o = enumerate_orbit(&g, &p, &OrbitConfig::new(radius))?;
    let csv = formats::orbit_csv(&o);
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(&path, csv)?;
            println!("{} orbit points within {radius} -> {}", o.within.len(), path.display());
        }
        None => print!("{csv}"),
    }
    Ok(true)
}

fn witness_cmd(graph: PathBuf) -> Result<bool, LabError> {
    let (g, labels) = formats::graph_from_json(&std::fs::read_to_string(graph)?)?;
    println!("vertices: {}", labels.join(", "));
    print!("{}", describe(&g));
    let rep = check_suborder_axioms(&g)?;
    for r in &rep.results {
        let at = r.witness.map(|(a, b, c)| format!(" at ({}, {}, {})", labels[a], labels[b], labels[c])).unwrap_or_default();
        println!("{:?}: {}{at}", r.axiom, if r.holds { "holds" } else { "fails" });
    }
    Ok(rep.all_hold())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { experiment, config, seed, workers, out, artifacts } => {
            run(experiment, config, seed, workers, out, artifacts)
        }
        Command::Report { results, out } => report_cmd(results, out),
        Command::List => {
            for e in EXPERIMENTS {
                let c = ExperimentConfig::defaults(e).expect("known experiment");
                println!("{e}\n{}", toml::to_string(&c).unwrap_or_default());
            }
            Ok(true)
        }
        Command::Orbit { group, radius, x, y, out } => orbit_cmd(group, radius, x, y, out),
        Command::Witness { graph } => witness_cmd(graph),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}
