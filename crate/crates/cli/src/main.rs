mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use liftgap::boolfn::{BoolFn, Density};
use liftgap::csp::{self, Instance};
use liftgap::poly::MultilinearPoly;
use liftgap::rational::{self, Rational};
use liftgap::restriction;
use liftgap::sa::{self, EdgeFunctional, PseudoExpectation};
use liftgap::slack::{self, FarkasResult, PolyhedralRelaxation};
use serde_json::{json, Value};

use io::{embedded, emit, usage, Failure, Manifest};

#[derive(Parser)]
#[command(name = "liftgap", version, about = "Exact Sherali-Adams, slack and restriction experiments for boolean Max-CSPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Brute-force optimum and the smallest optimal assignment
    Opt(InstanceArg),
    /// Sherali-Adams value and an optimal local expectation functional
    Sa {
        #[command(flatten)]
        input: InstanceArg,
        #[arg(long)]
        rounds: usize,
    },
    /// Edge-variable Sherali-Adams value of a Max Cut instance
    SaEdge {
        #[command(flatten)]
        input: InstanceArg,
        #[arg(long)]
        level: usize,
    },
    /// Translate functionals between vertex and edge formulations
    Translate {
        #[command(flatten)]
        input: InstanceArg,
        #[arg(long, value_enum)]
        direction: Direction,
        /// Locality for v2e
        #[arg(long, default_value_t = 6)]
        k: usize,
        /// Edge level for e2v
        #[arg(long, default_value_t = 2)]
        level: usize,
        /// Functional to translate; the optimal one is computed when absent
        #[arg(long)]
        functional: Option<PathBuf>,
    },
    /// Value of a polyhedral relaxation on an instance
    Lp {
        #[command(flatten)]
        input: InstanceArg,
        #[command(flatten)]
        relaxation: RelaxationArg,
    },
    /// Slack function tables of a relaxation
    Slack {
        #[command(flatten)]
        relaxation: RelaxationArg,
        /// Variable count for built-in relaxations
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum, default_value_t = SlackFormat::Csv)]
        out: SlackFormat,
    },
    /// Decompose c − ℑ over the slacks, or certify that no decomposition exists
    Farkas {
        #[command(flatten)]
        input: InstanceArg,
        #[arg(long, allow_hyphen_values = true)]
        c: String,
        #[command(flatten)]
        relaxation: RelaxationArg,
    },
    /// Sample a restriction passing a density family
    Restrict {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        seed: u64,
        /// Defaults to ⌈d·log₂ n⌉
        #[arg(long)]
        t: Option<u32>,
        #[arg(long, default_value_t = 100)]
        max_trials: usize,
    },
    /// Planted main-inequality experiment
    MainIneq {
        #[command(flatten)]
        relaxation: RelaxationArg,
        /// Variable count for built-in relaxations
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        inst0: PathBuf,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Slack matrix, protocol matrix and its factorization
    Protocol {
        /// Row instances; all low-value graphs on --n vertices when absent
        #[arg(long, num_args = 1..)]
        rows: Vec<PathBuf>,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long)]
        c: String,
        #[arg(long)]
        s: String,
        #[arg(long = "T")]
        t: usize,
        /// Directory for the CSV and manifest files
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Antidiagonal contradiction check for a permutation-closed relaxation
    SymmetricCheck {
        #[arg(long)]
        inst0: PathBuf,
        #[arg(long)]
        c: String,
        #[arg(long)]
        d: usize,
        /// Relaxation on 2m variables; all width-d indicators when absent
        #[arg(long)]
        relaxation: Option<String>,
    },
    /// Generate instance files
    Gen {
        #[command(subcommand)]
        kind: GenKind,
        #[arg(long, value_enum, global = true)]
        format: Option<Format>,
    },
}

#[derive(Args)]
struct InstanceArg {
    /// Instance file (edge list, DIMACS CNF or JSON); standard input when absent or "-"
    instance: Option<PathBuf>,
}

#[derive(Args)]
struct RelaxationArg {
    /// metric, universal:D, or a relaxation JSON file
    #[arg(long, default_value = "metric")]
    relaxation: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    V2e,
    E2v,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SlackFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Edges,
    Dimacs,
    Json,
}

#[derive(Subcommand)]
enum GenKind {
    Cycle {
        #[arg(long)]
        n: usize,
    },
    Complete {
        #[arg(long)]
        n: usize,
    },
    Gnp {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: String,
        #[arg(long)]
        seed: u64,
    },
    #[command(name = "3sat")]
    Sat3 {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            let first = msg.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
            eprintln!("{}", json!({"error": "usage", "message": first.trim()}));
            return ExitCode::from(2);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", io::error_line(&f));
            ExitCode::from(match f {
                Failure::Usage(_) => 2,
                Failure::Domain(_) => 1,
            })
        }
    }
}

fn parse_rational(text: &str, what: &str) -> Result<Rational, Failure> {
    rational::parse(text).map_err(|e| usage(format!("--{what}: {e}")))
}

fn load_instance(manifest: &mut Manifest, path: Option<&Path>) -> Result<Instance, Failure> {
    let text = manifest.read(path)?;
    Ok(csp::parse_instance(&text)?)
}

fn load_relaxation(manifest: &mut Manifest, spec: &str, n: Option<usize>) -> Result<PolyhedralRelaxation, Failure> {
    manifest.param("relaxation", spec);
    let need_n = || n.ok_or_else(|| usage(format!("relaxation {spec} needs a variable count")));
    if spec == "metric" {
        return Ok(slack::metric_maxcut(need_n()?)?);
    }
    if let Some(d) = spec.strip_prefix("universal:") {
        let d: usize = d.parse().map_err(|_| usage(format!("bad level in {spec}")))?;
        return Ok(slack::universal(need_n()?, d)?);
    }
    let text = manifest.read(Some(Path::new(spec)))?;
    let rel = PolyhedralRelaxation::from_json(&text)?;
    if let Some(n) = n {
        if rel.n() != n {
            return Err(liftgap::Error::MalformedInput(format!("relaxation has {} variables, expected {n}", rel.n())).into());
        }
    }
    Ok(rel)
}

fn strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(rational::format).collect()
}

fn cut_edges(inst: &Instance) -> Result<Vec<(usize, usize)>, Failure> {
    inst.cut_edges()
        .ok_or_else(|| liftgap::Error::MalformedInput("a Max Cut instance is required".into()).into())
}

fn load_family(text: &str) -> Result<Vec<Density>, Failure> {
    let raw: Vec<Value> = serde_json::from_str(text).map_err(liftgap::Error::from)?;
    let mut out = Vec::with_capacity(raw.len());
    for (i, item) in raw.iter().enumerate() {
        let bad = |msg: String| liftgap::Error::MalformedInput(format!("density {}: {msg}", i + 1));
        let density = if item.get("values").is_some() {
            Density::from_boolfn(&BoolFn::from_json(&item.to_string())?)
        } else {
            let n = item.get("n").and_then(Value::as_u64).ok_or_else(|| bad("missing \"n\"".into()))? as usize;
            let coeffs = item
                .get("coeffs")
                .and_then(Value::as_object)
                .ok_or_else(|| bad("expected \"values\" or \"coeffs\"".into()))?;
            let mut terms = Vec::new();
            for (k, v) in coeffs {
                let mask: u64 = k.parse().map_err(|_| bad(format!("bad mask {k}")))?;
                let c = rational::parse(v.as_str().ok_or_else(|| bad(format!("coefficient of {k} must be a string")))?)?;
                terms.push((mask, c));
            }
            Density::from_poly(MultilinearPoly::from_terms(n, terms))
        };
        out.push(density.map_err(|e| bad(e.to_string()))?);
    }
    Ok(out)
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Opt(input) => {
            let mut man = Manifest::new("opt");
            let inst = load_instance(&mut man, input.instance.as_deref())?;
            let opt = csp::brute_force_opt(&inst)?;
            emit(
                json!({
                    "n": inst.n(),
                    "m": inst.m(),
                    "value": rational::format(&opt.value),
                    "witness": csp::format_assignment(inst.n(), opt.witness),
                }),
                &man,
            );
        }
        Command::Sa { input, rounds } => {
            let mut man = Manifest::new("sa");
            man.param("rounds", rounds);
            let inst = load_instance(&mut man, input.instance.as_deref())?;
            let sol = sa::sa_value(&inst, rounds)?;
            emit(json!({"value": rational::format(&sol.value), "pe": embedded(&sol.pe.to_json())}), &man);
        }
        Command::SaEdge { input, level } => {
            let mut man = Manifest::new("sa-edge");
            man.param("level", level);
            let inst = load_instance(&mut man, input.instance.as_deref())?;
            let sol = sa::edge_sa_value(&inst, level)?;
            emit(
                json!({"value": rational::format(&sol.value), "functional": embedded(&sol.functional.to_json())}),
                &man,
            );
        }
        Command::Translate { input, direction, k, level, functional } => {
            let mut man = Manifest::new("translate");
            let inst = load_instance(&mut man, input.instance.as_deref())?;
            let edges = cut_edges(&inst)?;
            let given = match &functional {
                Some(p) => Some(man.read(Some(p))?),
                None => None,
            };
            let out = match direction {
                Direction::V2e => {
                    man.param("direction", "v2e").param("k", k);
                    let pe = match given {
                        Some(text) => PseudoExpectation::from_json(&text)?,
                        None => sa::sa_value(&inst, k.min(inst.n()))?.pe,
                    };
                    let (ef, rep) = sa::vertex_to_edge(&pe, k, &edges)?;
                    json!({"functional": embedded(&ef.to_json()), "report": serde_json::to_value(&rep).expect("report")})
                }
                Direction::E2v => {
                    man.param("direction", "e2v").param("level", level);
                    let ef = match given {
                        Some(text) => EdgeFunctional::from_json(&text)?,
                        None => sa::edge_sa_value(&inst, level)?.functional,
                    };
                    let (pe, rep) = sa::edge_to_vertex(&ef, &edges)?;
                    json!({"functional": embedded(&pe.to_json()), "report": serde_json::to_value(&rep).expect("report")})
                }
            };
            emit(out, &man);
        }
        Command::Lp { input, relaxation } => {
            let mut man = Manifest::new("lp");
            let inst = load_instance(&mut man, input.instance.as_deref())?;
            let rel = load_relaxation(&mut man, &relaxation.relaxation, Some(inst.n()))?;
            let v = slack::lp_value(&rel, &inst)?;
            emit(
                json!({
                    "relaxation": rel.name(),
                    "size": rel.size(),
                    "value": rational::format(&v.value),
                    "point": strings(&v.point),
                }),
                &man,
            );
        }
        Command::Slack { relaxation, n, out } => {
            let mut man = Manifest::new("slack");
            let rel = load_relaxation(&mut man, &relaxation.relaxation, n)?;
            let slacks = slack::slack_functions(&rel)?;
            let tables: Vec<BoolFn> = (0..slacks.len()).map(|i| slacks.table(i)).collect::<liftgap::Result<_>>()?;
            match out {
                SlackFormat::Csv => {
                    let mut text = String::from("row");
                    for x in 0..1u64 << rel.n() {
                        text.push_str(&format!(",{x}"));
                    }
                    text.push('\n');
                    for (i, t) in tables.iter().enumerate() {
                        text.push_str(&(i + 1).to_string());
                        for v in t.values() {
                            text.push(',');
                            text.push_str(&rational::format(v));
                        }
                        text.push('\n');
                    }
                    print!("{text}");
                }
                SlackFormat::Json => {
                    let rows: Vec<Value> = tables.iter().map(|t| embedded(&t.to_json())).collect();
                    emit(json!({"relaxation": rel.name(), "n": rel.n(), "slacks": rows}), &man);
                }
            }
        }
        Command::Farkas { input, c, relaxation } => {
            let mut man = Manifest::new("farkas");
            let c = parse_rational(&c, "c")?;
            man.param("c", rational::format(&c));
            let inst = load_instance(&mut man, input.instance.as_deref())?;
            let rel = load_relaxation(&mut man, &relaxation.relaxation, Some(inst.n()))?;
            let slacks = slack::slack_functions(&rel)?;
            let out = match slack::farkas_decompose(&c, &inst, &rel)? {
                FarkasResult::Decomposition { lambda0, lambda } => {
                    let verify = slack::verify_decomposition(&c, &inst, &lambda0, &lambda, &slacks);
                    json!({
                        "feasible": true,
                        "lambda0": rational::format(&lambda0),
                        "lambda": strings(&lambda),
                        "verify": verify,
                    })
                }
                FarkasResult::Infeasible { certificate } => {
                    let verify = slack::verify_certificate(&c, &inst, &certificate, &slacks);
                    let terms: serde_json::Map<String, Value> =
                        certificate.terms().map(|(m, v)| (m.to_string(), Value::from(rational::format(v)))).collect();
                    json!({"feasible": false, "certificate": terms, "verify": verify})
                }
            };
            emit(out, &man);
        }
        Command::Restrict { family, n, m, d, seed, t, max_trials } => {
            let mut man = Manifest::new("restrict");
            let t = t.unwrap_or_else(|| restriction::ceil_log_t(n, d));
            man.param("n", n).param("m", m).param("d", d).param("t", t).param("maxTrials", max_trials).seed(seed);
            let text = man.read(Some(&family))?;
            let q = load_family(&text)?;
            let (_, report) = restriction::find_good_restriction(&q, n, m, d, t, max_trials, seed)?;
            emit(embedded(&report.to_json()), &man);
        }
        Command::MainIneq { relaxation, n, inst0, d, seed } => {
            let mut man = Manifest::new("main-ineq");
            man.param("d", d).seed(seed);
            let inst = load_instance(&mut man, Some(&inst0))?;
            let rel = load_relaxation(&mut man, &relaxation.relaxation, n)?;
            let report = restriction::main_inequality_experiment(&rel, &inst, d, seed)?;
            emit(embedded(&report.to_json()), &man);
        }
        Command::Protocol { rows, n, c, s, t, out_dir } => {
            let mut man = Manifest::new("protocol");
            let c = parse_rational(&c, "c")?;
            let s = parse_rational(&s, "s")?;
            man.param("c", rational::format(&c)).param("s", rational::format(&s)).param("T", t);
            let instances = if rows.is_empty() {
                man.param("n", n);
                slack::low_value_graphs(n, &s)?
            } else {
                let mut v = Vec::new();
                for p in &rows {
                    v.push(load_instance(&mut man, Some(p))?);
                }
                v
            };
            let width = instances.first().map(Instance::n).unwrap_or(n);
            let cols: Vec<u64> = (0..1u64 << width).collect();
            let sm = slack::build_slack_matrix(instances, cols.clone(), c, s)?;
            let pm = slack::protocol_matrix(&sm, t)?;
            let zero = Rational::from_integer(0.into());
            let bounded = pm
                .excess
                .iter()
                .zip(&pm.tail)
                .all(|(e, p)| e.iter().zip(p).all(|(e, p)| *e >= zero && e <= p));
            let factor = slack::protocol_factorization(&sm, t);
            let (factor_info, factor) = match factor {
                Ok(f) => (json!({"messageSpace": f.message_space(), "verified": f.product() == pm.entries}), Some(f)),
                Err(liftgap::Error::SizeCap { what, actual, limit }) => {
                    (json!({"skipped": format!("{what} is {actual}, limit {limit}")}), None)
                }
                Err(e) => return Err(e.into()),
            };
            if let Some(dir) = &out_dir {
                io::write_file(dir, "M.csv", &sm.to_csv(), &mut man)?;
                io::write_file(dir, "Mprime.csv", &pm.to_csv(&cols), &mut man)?;
                if let Some(f) = &factor {
                    io::write_file(dir, "U.csv", &f.u_csv(), &mut man)?;
                    io::write_file(dir, "V.csv", &f.v_csv(), &mut man)?;
                    io::write_file(dir, "factorization.json", &f.manifest_json(), &mut man)?;
                }
            }
            let max = |m: &[Vec<Rational>]| {
                m.iter().flatten().fold(zero.clone(), |a, b| if *b > a { b.clone() } else { a })
            };
            emit(
                json!({
                    "rows": sm.rows.len(),
                    "cols": cols.len(),
                    "T": t,
                    "maxExcess": rational::format(&max(&pm.excess)),
                    "maxTail": rational::format(&max(&pm.tail)),
                    "excessWithinTail": bounded,
                    "factorization": factor_info,
                }),
                &man,
            );
        }
        Command::SymmetricCheck { inst0, c, d, relaxation } => {
            let mut man = Manifest::new("symmetric-check");
            let c = parse_rational(&c, "c")?;
            man.param("c", rational::format(&c)).param("d", d);
            let inst = load_instance(&mut man, Some(&inst0))?;
            let rel = match &relaxation {
                Some(spec) => Some(load_relaxation(&mut man, spec, Some(2 * inst.n()))?),
                None => None,
            };
            let report = restriction::symmetric_contradiction_check(&inst, rel.as_ref(), &c, d)?;
            emit(embedded(&report.to_json()), &man);
        }
        Command::Gen { kind, format } => {
            let (inst, default) = match kind {
                GenKind::Cycle { n } => (csp::cycle(n)?, Format::Edges),
                GenKind::Complete { n } => (csp::complete(n)?, Format::Edges),
                GenKind::Gnp { n, p, seed } => (csp::random_graph(n, &parse_rational(&p, "p")?, seed)?, Format::Edges),
                GenKind::Sat3 { n, m, seed } => (csp::random_3sat(n, m, seed)?, Format::Dimacs),
            };
            let text = match format.unwrap_or(default) {
                Format::Edges => csp::write_edge_list(&inst)?,
                Format::Dimacs => csp::write_dimacs_cnf(&inst)?,
                Format::Json => inst.to_json() + "\n",
            };
            print!("{text}");
        }
    }
    Ok(())
}
