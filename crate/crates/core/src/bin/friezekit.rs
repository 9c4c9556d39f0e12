use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use serde_json::json;

use friezekit::annulus::{fan_triangulation, unitarize, MarkedAnnulus, Triangulation};
use friezekit::cluster::Seed;
use friezekit::frieze::{
    companion_b_vector, enumerate_frieze_vectors, evaluate_frieze, is_unitary, phi, phi_inverse, phi_inverse_annulus,
    FriezeAssignment,
};
use friezekit::knit::{knit_auto, knit_period, render_frieze, RenderFormat};
use friezekit::snake::{build_snake_graph, count_matchings, snake_laurent, PolygonTriangulation};
use friezekit::{LaurentPolynomial, Quiver, RingElement, RingKind};

const DEFAULT_LIMIT: usize = 10_000;

#[derive(Parser)]
#[command(name = "friezekit", version, about = "Exact computations with cluster-algebra friezes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

impl From<Format> for RenderFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Text => RenderFormat::Text,
            Format::Json => RenderFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Mutate the base seed along a path and print the resulting seed.
    Mutate {
        #[arg(long)]
        seed: PathBuf,
        /// Mutation directions, 0-based, e.g. 1,2,0.
        #[arg(long, default_value = "")]
        path: String,
    },
    /// Print the cluster variables reached along a path as Laurent polynomials.
    Expand {
        #[arg(long)]
        seed: PathBuf,
        #[arg(long, default_value = "")]
        path: String,
        /// Also write the base variables in terms of the reached cluster.
        #[arg(long)]
        inverse: bool,
    },
    /// Evaluate cluster variables under the frieze with the given base values.
    Evaluate {
        #[arg(long)]
        seed: PathBuf,
        #[arg(long, default_value = "Z")]
        ring: String,
        /// Base values separated by ';' or ','.
        #[arg(long)]
        values: String,
        #[arg(long, default_value = "")]
        path: String,
        /// Evaluate this expression instead of a cluster.
        #[arg(long)]
        expr: Option<String>,
    },
    /// List the positive frieze vectors in [1, bound]^n.
    FriezeVectors {
        #[arg(long)]
        seed: PathBuf,
        #[arg(long)]
        bound: u64,
        /// Print each vector together with its companion b-vector.
        #[arg(long)]
        b_vectors: bool,
    },
    /// Frieze vector of the cluster reached along a path.
    Phi {
        #[arg(long)]
        seed: PathBuf,
        #[arg(long, default_value = "")]
        path: String,
    },
    /// Cluster on which the frieze with the given vector is all ones.
    PhiInverse {
        #[arg(long, conflicts_with = "annulus", required_unless_present = "annulus")]
        seed: Option<PathBuf>,
        /// Affine type: boundary marked points `p,q`; the vector is read on the fan.
        #[arg(long)]
        annulus: Option<String>,
        #[arg(long)]
        vector: String,
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        limit: usize,
    },
    /// Search for a cluster of units.
    Unitary {
        #[arg(long)]
        seed: PathBuf,
        #[arg(long, default_value = "Z")]
        ring: String,
        #[arg(long)]
        values: String,
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        limit: usize,
    },
    /// Flip an annulus triangulation down to all ones.
    Unitarize {
        /// Boundary marked points `p,q`.
        #[arg(long)]
        annulus: String,
        #[arg(long)]
        values: String,
        /// Start triangulation JSON; defaults to the fan.
        #[arg(long)]
        triangulation: Option<PathBuf>,
    },
    /// Knit a frieze array from an acyclic slice.
    Knit {
        #[arg(long)]
        quiver: PathBuf,
        #[arg(long)]
        start: String,
        #[arg(long, default_value = "Z")]
        ring: String,
        /// Forward columns; without it, one full period is knitted.
        #[arg(long)]
        cols: Option<usize>,
        #[arg(long, default_value_t = 0)]
        back: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Snake graph of a diagonal in a triangulated polygon.
    Snake {
        /// Number of polygon vertices.
        #[arg(long)]
        polygon: usize,
        /// Diagonals `a,b;c,d;...`, labelled x1, x2, ... in order.
        #[arg(long)]
        diagonals: String,
        /// The diagonal `a,b` to expand.
        #[arg(long)]
        gamma: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

enum CliError {
    Usage(String),
    Domain(String),
}

impl CliError {
    fn domain(e: impl std::fmt::Display) -> Self {
        CliError::Domain(e.to_string())
    }

    fn usage(e: impl std::fmt::Display) -> Self {
        CliError::Usage(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Deserialize)]
struct SeedFile {
    n: usize,
    arrows: Vec<[i64; 3]>,
    #[serde(default)]
    names: Option<Vec<String>>,
}

struct LoadedSeed {
    seed: Seed,
    names: Vec<String>,
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn load_quiver(path: &Path) -> CliResult<(Quiver, Option<Vec<String>>)> {
    let raw: SeedFile = serde_json::from_str(&read(path)?).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let mut arrows = Vec::with_capacity(raw.arrows.len());
    for [s, t, m] in raw.arrows {
        let s = usize::try_from(s).map_err(|_| CliError::usage("negative vertex index"))?;
        let t = usize::try_from(t).map_err(|_| CliError::usage("negative vertex index"))?;
        arrows.push((s, t, m));
    }
    let quiver = Quiver::from_arrows(raw.n, &arrows).map_err(CliError::usage)?;
    if let Some(names) = &raw.names {
        if names.len() != raw.n {
            return Err(CliError::usage(format!("expected {} variable names, got {}", raw.n, names.len())));
        }
    }
    Ok((quiver, raw.names))
}

fn load_seed(path: &Path) -> CliResult<LoadedSeed> {
    let (quiver, names) = load_quiver(path)?;
    let names = names.unwrap_or_else(|| LaurentPolynomial::default_names(quiver.len()));
    Ok(LoadedSeed { seed: Seed::base(quiver), names })
}

fn split_list(s: &str) -> Vec<&str> {
    let sep = if s.contains(';') { ';' } else { ',' };
    s.split(sep).map(str::trim).filter(|t| !t.is_empty()).collect()
}

fn parse_path(s: &str) -> CliResult<Vec<usize>> {
    split_list(s).into_iter().map(|t| usize::from_str(t).map_err(|_| CliError::usage(format!("bad path entry {t:?}")))).collect()
}

fn parse_ring(s: &str) -> CliResult<RingKind> {
    RingKind::from_str(s).map_err(CliError::usage)
}

fn parse_values(ring: RingKind, s: &str) -> CliResult<Vec<RingElement>> {
    split_list(s).into_iter().map(|t| ring.parse(t).map_err(CliError::usage)).collect()
}

fn parse_integers(s: &str) -> CliResult<Vec<BigInt>> {
    split_list(s).into_iter().map(|t| BigInt::from_str(t).map_err(|_| CliError::usage(format!("bad integer {t:?}")))).collect()
}

fn parse_pair(s: &str) -> CliResult<(usize, usize)> {
    match parse_path(s)?[..] {
        [a, b] => Ok((a, b)),
        _ => Err(CliError::usage(format!("expected two numbers, got {s:?}"))),
    }
}

fn strings(v: &[RingElement]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

fn reach(loaded: &LoadedSeed, path: &str) -> CliResult<Seed> {
    loaded.seed.mutate_along(&parse_path(path)?).map_err(CliError::domain)
}

fn pretty(v: &impl Serialize) -> String {
    serde_json::to_string_pretty(v).unwrap_or_else(|e| unreachable!("JSON output: {e}"))
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Mutate { seed, path } => {
            let loaded = load_seed(&seed)?;
            let s = reach(&loaded, &path)?;
            let cluster: Vec<String> = s.vars().iter().map(|u| u.display_with(&loaded.names)).collect();
            println!("{}", pretty(&json!({ "quiver": s.quiver(), "names": loaded.names, "path": s.path(), "cluster": cluster })));
        }
        Command::Expand { seed, path, inverse } => {
            let loaded = load_seed(&seed)?;
            let s = reach(&loaded, &path)?;
            let vars = if inverse { s.expand_base_in_current().map_err(CliError::domain)? } else { s.vars().to_vec() };
            for u in vars {
                println!("{}", u.display_with(&loaded.names));
            }
        }
        Command::Evaluate { seed, ring, values, path, expr } => {
            let loaded = load_seed(&seed)?;
            let values = parse_values(parse_ring(&ring)?, &values)?;
            let f = FriezeAssignment::new(loaded.seed.clone(), values).map_err(CliError::domain)?;
            let targets = match expr {
                Some(e) => vec![LaurentPolynomial::parse_with(&e, &loaded.names).map_err(CliError::usage)?],
                None => reach(&loaded, &path)?.vars().to_vec(),
            };
            for u in targets {
                match evaluate_frieze(&f, &u).map_err(CliError::domain)? {
                    Some(v) => println!("{v}"),
                    None => return Err(CliError::Domain(format!("{} does not evaluate inside the ring", u.display_with(&loaded.names)))),
                }
            }
        }
        Command::FriezeVectors { seed, bound, b_vectors } => {
            let loaded = load_seed(&seed)?;
            for v in enumerate_frieze_vectors(&loaded.seed, bound).map_err(CliError::domain)? {
                if b_vectors {
                    let f = FriezeAssignment::new(loaded.seed.clone(), v.clone()).map_err(CliError::domain)?;
                    let b = companion_b_vector(&f).map_err(CliError::domain)?;
                    println!("{}", json!({ "vector": strings(&v), "b": strings(&b) }));
                } else {
                    println!("{}", json!(strings(&v)));
                }
            }
        }
        Command::Phi { seed, path } => {
            let loaded = load_seed(&seed)?;
            let target = reach(&loaded, &path)?;
            println!("{}", json!(strings(&phi(&loaded.seed, &target).map_err(CliError::domain)?)));
        }
        Command::PhiInverse { seed, annulus, vector, limit } => match (seed, annulus) {
            (Some(seed), None) => {
                let loaded = load_seed(&seed)?;
                let a = parse_values(RingKind::Z, &vector)?;
                let s = phi_inverse(&loaded.seed, a, limit).map_err(CliError::domain)?;
                let cluster: Vec<String> = s.vars().iter().map(|u| u.display_with(&loaded.names)).collect();
                println!("{}", pretty(&json!({ "path": s.path(), "cluster": cluster })));
            }
            (None, Some(pq)) => {
                let (p, q) = parse_pair(&pq)?;
                let a = MarkedAnnulus::new(p, q).map_err(CliError::usage)?;
                let out = phi_inverse_annulus(&a, &parse_integers(&vector)?).map_err(CliError::domain)?;
                println!("{}", pretty(&out));
            }
            _ => return Err(CliError::usage("give exactly one of --seed and --annulus")),
        },
        Command::Unitary { seed, ring, values, limit } => {
            let loaded = load_seed(&seed)?;
            let values = parse_values(parse_ring(&ring)?, &values)?;
            let search = is_unitary(&loaded.seed, values, limit).map_err(CliError::domain)?;
            match search.seed {
                Some(s) => println!("unitary at path {:?} ({} clusters searched)", s.path(), search.searched),
                None => println!("non-unitary ({} clusters searched)", search.searched),
            }
        }
        Command::Unitarize { annulus, values, triangulation } => {
            let (p, q) = parse_pair(&annulus)?;
            let a = MarkedAnnulus::new(p, q).map_err(CliError::usage)?;
            let t = match triangulation {
                Some(path) => {
                    let t: Triangulation = serde_json::from_str(&read(&path)?).map_err(CliError::usage)?;
                    if t.annulus() != &a {
                        return Err(CliError::usage("triangulation lives on a different annulus"));
                    }
                    t
                }
                None => fan_triangulation(&a),
            };
            let out = unitarize(&t, &parse_integers(&values)?).map_err(CliError::domain)?;
            println!("{}", pretty(&out));
        }
        Command::Knit { quiver, start, ring, cols, back, format } => {
            let (q, _) = load_quiver(&quiver)?;
            let start = parse_values(parse_ring(&ring)?, &start)?;
            let arr = match cols {
                Some(c) => knit_auto(&q, &start, c, back),
                None => knit_period(&q, &start),
            }
            .map_err(CliError::domain)?;
            print!("{}", render_frieze(&arr, format.into()));
            if matches!(format, Format::Json) {
                println!();
            }
        }
        Command::Snake { polygon, diagonals, gamma, format } => {
            let diags = diagonals.split(';').filter(|t| !t.trim().is_empty()).map(parse_pair).collect::<CliResult<Vec<_>>>()?;
            let t = PolygonTriangulation::new(polygon, diags).map_err(CliError::usage)?;
            let g = build_snake_graph(parse_pair(&gamma)?, &t).map_err(CliError::domain)?;
            let count = count_matchings(&g).map_err(CliError::domain)?;
            let laurent = snake_laurent(&g, t.diagonals().len());
            match format {
                Format::Text => {
                    println!("{}", g.render_text());
                    println!("matchings: {count}");
                    println!("expansion: {laurent}");
                }
                Format::Json => println!("{}", pretty(&json!({ "graph": g, "matchings": count.to_string(), "expansion": laurent.to_string() }))),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
