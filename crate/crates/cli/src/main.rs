use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use k3fib_core::catalog::{replay, run_catalog, EntryResult, Report};
use k3fib_core::dynkin::{count_fibrations, DualGraph};
use k3fib_core::fibration::{Options, Status};
use k3fib_core::genus::{genus_tag, unique_in_genus, GenusEffort, GenusStatus};
use k3fib_core::quadform::{discriminant_form, even_overlattices, DEFAULT_GROUP_BOUND};
use k3fib_core::short_vectors::root_sublattice;
use k3fib_core::Lattice;

const EXIT_OK: u8 = 0;
const EXIT_FAILED: u8 = 1;
const EXIT_INPUT: u8 = 2;

#[derive(Parser)]
#[command(name = "k3fib", version, about = "Elliptic fibrations on K3 surfaces from Picard lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Effort {
    /// classes explored per genus before giving up
    #[arg(long, default_value_t = GenusEffort::default().class_cap)]
    genus_effort: usize,
    /// largest discriminant group searched for isotropic subgroups
    #[arg(long, default_value_t = DEFAULT_GROUP_BOUND)]
    group_bound: u64,
    /// largest height of isotropic vectors in split searches
    #[arg(long, default_value_t = k3fib_core::fibration::DEFAULT_HEIGHT_BOUND)]
    height_bound: i64,
}

impl Effort {
    fn options(&self) -> Options {
        Options {
            genus_effort: GenusEffort {
                class_cap: self.genus_effort,
            },
            group_bound: self.group_bound,
            height_bound: self.height_bound,
            ..Options::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Classify every lattice of a JSON-lines catalog
    Classify {
        catalog: PathBuf,
        /// directory holding `<name>.json` dual graphs
        #[arg(long)]
        graphs: Option<PathBuf>,
        #[command(flatten)]
        effort: Effort,
        /// treat inconclusive verdicts as failures
        #[arg(long)]
        strict: bool,
        /// JSON-lines report
        #[arg(long, conflicts_with = "table")]
        json: bool,
        /// human-readable table (default)
        #[arg(long)]
        table: bool,
    },
    /// Genus symbol and whether the class is alone in its genus
    Genus {
        /// lattice as a JSON file or inline JSON (`{"gram": …}` or a matrix)
        lattice: String,
        #[command(flatten)]
        effort: Effort,
    },
    /// Root sublattice of a negative definite lattice
    Roots { lattice: String },
    /// Even overlattices of a lattice
    Overlattices {
        lattice: String,
        #[arg(long, default_value_t = DEFAULT_GROUP_BOUND)]
        group_bound: u64,
    },
    /// Count elliptic fibrations on a dual graph of (−2)-curves
    GraphFibrations { graph: PathBuf },
    /// Re-run every certificate of a JSON-lines report
    CertificateReplay { report: PathBuf },
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn parse_lattice(arg: &str) -> Result<Lattice, String> {
    let text = if Path::new(arg).is_file() {
        read(Path::new(arg))?
    } else {
        arg.to_string()
    };
    if let Ok(l) = serde_json::from_str::<Lattice>(&text) {
        return Ok(l);
    }
    let gram: Vec<Vec<i64>> =
        serde_json::from_str(&text).map_err(|e| format!("expected a lattice or a Gram matrix: {e}"))?;
    Lattice::new(gram).map_err(|e| e.to_string())
}

fn load_graph(path: &Path) -> Result<DualGraph, String> {
    serde_json::from_str(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn classify(
    catalog: &Path,
    graphs: Option<&Path>,
    opts: &Options,
    strict: bool,
    json: bool,
) -> Result<u8, String> {
    let text = read(catalog)?;
    let resolve = |name: &str| match graphs {
        Some(dir) => load_graph(&dir.join(format!("{name}.json"))),
        None => Err(format!("graph `{name}` referenced but no --graphs directory given")),
    };
    let report = run_catalog(&text, &resolve, opts);
    if json {
        print!("{}", report.to_jsonl());
    } else {
        print!("{}", report.to_table());
    }
    for e in &report.entries {
        if let EntryResult::Error { error } = &e.result {
            eprintln!("error: {error}");
        }
    }
    Ok(if report.errors() > 0 {
        EXIT_INPUT
    } else if strict && report.count(Status::Inconclusive) > 0 {
        EXIT_FAILED
    } else {
        EXIT_OK
    })
}

fn genus(arg: &str, opts: &Options) -> Result<u8, String> {
    let l = parse_lattice(arg)?;
    let tag = genus_tag(&l).map_err(|e| e.to_string())?;
    println!("signature {}", tag.signature);
    println!("discriminant form {}", tag.disc_form);
    let v = unique_in_genus(&l, opts.genus_effort).map_err(|e| e.to_string())?;
    let status = match &v.status {
        GenusStatus::UniqueInGenus => "unique in its genus".to_string(),
        GenusStatus::NotUnique { reason, .. } => format!("not unique in its genus ({reason})"),
        GenusStatus::Inconclusive { reason } => format!("inconclusive ({reason})"),
    };
    println!("{status}");
    println!("classes found {}", v.classes_found.len());
    for c in v.classes_found.iter().skip(1) {
        println!("  {}", serde_json::to_string(c.gram()).expect("serializable"));
    }
    Ok(EXIT_OK)
}

fn roots(arg: &str) -> Result<u8, String> {
    let l = parse_lattice(arg)?;
    let (_, d) = root_sublattice(&l).map_err(|e| e.to_string())?;
    println!("{} (rank {}, {} roots)", d.name(), d.total_rank, d.root_count());
    Ok(EXIT_OK)
}

fn overlattices(arg: &str, bound: u64) -> Result<u8, String> {
    let l = parse_lattice(arg)?;
    let q = discriminant_form(&l).map_err(|e| e.to_string())?;
    println!("discriminant form {q}");
    let certs = even_overlattices(&l, bound).map_err(|e| e.to_string())?;
    println!("{} proper even overlattices", certs.len());
    for c in certs {
        let ok = if c.verify(&l) { "" } else { "  (verification failed)" };
        println!(
            "index {}: {}{ok}",
            c.index,
            serde_json::to_string(c.result.gram()).expect("serializable")
        );
    }
    Ok(EXIT_OK)
}

fn graph_fibrations(path: &Path) -> Result<u8, String> {
    let g = load_graph(path)?;
    let c = count_fibrations(&g).map_err(|e| e.to_string())?;
    for (i, d) in c.diagrams.iter().enumerate() {
        let names: Vec<&str> = d.vertices.iter().map(|&v| g.vertices[v].as_str()).collect();
        println!("{i}: {} on {}", d.kind, names.join(" "));
    }
    for (i, grp) in c.groups.iter().enumerate() {
        let ids: Vec<String> = grp.iter().map(|d| d.to_string()).collect();
        println!("fibration {}: diagrams {}", i + 1, ids.join(", "));
    }
    println!("{} elliptic fibrations", c.count);
    Ok(EXIT_OK)
}

fn certificate_replay(path: &Path) -> Result<u8, String> {
    let report = Report::from_jsonl(&read(path)?).map_err(|e| e.to_string())?;
    let mut failed = 0;
    for (e, v) in report.verdicts() {
        let r = replay(v);
        if r.ok {
            println!("{}: ok ({} steps, {})", e.label, r.steps, v.status);
        } else {
            failed += 1;
            println!("{}: FAILED", e.label);
            for m in r.mismatches {
                println!("  {m}");
            }
        }
    }
    println!("{} replayed, {failed} failed", report.verdicts().count());
    Ok(if failed > 0 { EXIT_FAILED } else { EXIT_OK })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Classify {
            catalog,
            graphs,
            effort,
            strict,
            json,
            table: _,
        } => classify(catalog, graphs.as_deref(), &effort.options(), *strict, *json),
        Command::Genus { lattice, effort } => genus(lattice, &effort.options()),
        Command::Roots { lattice } => roots(lattice),
        Command::Overlattices { lattice, group_bound } => overlattices(lattice, *group_bound),
        Command::GraphFibrations { graph } => graph_fibrations(graph),
        Command::CertificateReplay { report } => certificate_replay(report),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
