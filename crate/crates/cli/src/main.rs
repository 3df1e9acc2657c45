//! `dscm`: parse systems of SDEs, derive and transform their causal graphs,
//! answer separation and do-calculus queries, run constraint-based
//! discovery, simulate, and verify the whole stack.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dscm_core::dmg::{Dmg, SeparationMode};
use dscm_core::discovery::fci;
use dscm_core::independence::{
    check_independent_integrators, docalc_check, enumerate_im, local_independence_graph,
    IndependenceModel,
};
use dscm_core::model::{parse_model, SdeSystem};
use dscm_core::partition::TimeVal;
use dscm_core::sim::{simulate, SimConfig};
use dscm_core::timeops::{
    collapse_graph, intervene_graph, marginalise_graph, subsample_graph, time_split_graph,
    SplitMeta, SplitMode,
};
use dscm_core::verify::{VerifyOptions, CRITERIA};
use dscm_core::Scalar;

#[derive(Parser)]
#[command(name = "dscm", version, about = "Causal graph semantics for systems of SDEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Edges,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Strict,
    Figure,
}

impl From<Mode> for SplitMode {
    fn from(m: Mode) -> SplitMode {
        match m {
            Mode::Strict => SplitMode::Strict,
            Mode::Figure => SplitMode::Figure,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SepKind {
    Sigma,
    D,
}

#[derive(Args)]
struct GraphInput {
    /// Model file in the system DSL.
    model: Option<PathBuf>,
    /// Read a graph from an edge-list file instead of a model.
    #[arg(long, conflicts_with = "model")]
    edges: Option<PathBuf>,
    /// Read a graph from a DOT file instead of a model.
    #[arg(long, conflicts_with_all = ["model", "edges"])]
    dot: Option<PathBuf>,
    /// For model inputs: project exogenous variables out (collapsed graph).
    #[arg(long)]
    to_dmg: bool,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "edges")]
    format: Format,
    /// Write to a file instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a model, reporting diagnostics.
    Validate {
        model: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Emit the dependency graph of a model.
    Graph {
        #[command(flatten)]
        input: GraphInput,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Time-split the model graph at the given times.
    Split {
        model: PathBuf,
        /// Comma-separated split times: numbers, `name=value`, or labels
        /// declared in the model.
        #[arg(long)]
        tau: String,
        #[arg(long, value_enum, default_value = "strict")]
        mode: Mode,
        /// Marginalise these nodes out of the graph before splitting.
        #[arg(long)]
        drop: Vec<String>,
        #[arg(long)]
        to_dmg: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Split, then marginalise the interval pieces away.
    Subsample {
        model: PathBuf,
        #[arg(long)]
        tau: String,
        #[arg(long, value_enum, default_value = "strict")]
        mode: Mode,
        #[arg(long)]
        drop: Vec<String>,
        #[arg(long)]
        to_dmg: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Split and collapse back (a consistency transform).
    Collapse {
        model: PathBuf,
        #[arg(long)]
        tau: String,
        #[arg(long, value_enum, default_value = "strict")]
        mode: Mode,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Marginalise nodes out of a graph.
    Marginalise {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long, required = true)]
        drop: Vec<String>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Perfect intervention on a model (prints the intervened model) or on
    /// its graph with --graph.
    Intervene {
        model: PathBuf,
        /// Targets as `name=value` pairs.
        #[arg(long = "do", required = true)]
        targets: Vec<String>,
        /// Emit the intervened graph instead of the model text.
        #[arg(long)]
        graph: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Separation query.
    Sep {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long, required = true)]
        a: Vec<String>,
        #[arg(long, required = true)]
        b: Vec<String>,
        #[arg(long)]
        c: Vec<String>,
        #[arg(long, value_enum, default_value = "sigma")]
        mode: SepKind,
        #[arg(long)]
        json: bool,
    },
    /// Enumerate the σ-independence model of a graph.
    Im {
        #[command(flatten)]
        input: GraphInput,
        /// Largest conditioning-set size; defaults to |nodes| - 2.
        #[arg(long)]
        max_c: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Local-independence graph and guarantee report.
    Lig {
        model: PathBuf,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Do-calculus rule precondition check.
    Docalc {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long)]
        rule: u8,
        #[arg(long, required = true)]
        x: Vec<String>,
        #[arg(long, required = true)]
        y: Vec<String>,
        #[arg(long)]
        z: Vec<String>,
        #[arg(long)]
        w: Vec<String>,
        #[arg(long)]
        json: bool,
    },
    /// Run FCI on an independence model (or derive one from a graph).
    Fci {
        /// Independence-model file as produced by `im`.
        #[arg(long, conflicts_with = "from_graph")]
        im: Option<PathBuf>,
        /// Edge-list graph file to enumerate and discover from.
        #[arg(long)]
        from_graph: Option<PathBuf>,
        #[arg(long)]
        max_c: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Simulate a model and emit CSV sample paths.
    Simulate {
        model: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long, default_value_t = 100)]
        paths: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Override the model's horizon.
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the verification suite.
    Verify {
        /// Trim sweep sizes for a fast smoke run.
        #[arg(long)]
        quick: bool,
        /// Run only these criteria (may be repeated).
        #[arg(long = "criterion")]
        criteria: Vec<u8>,
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

type CliResult = Result<ExitCode, String>;

/// Flatten repeated occurrences and comma lists (commas inside piece
/// delimiters belong to the name).
fn names(args: &[String]) -> Vec<String> {
    args.iter()
        .flat_map(|s| dscm_core::independence::split_names(s))
        .collect()
}

fn read(path: &PathBuf) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_model(path: &PathBuf) -> Result<SdeSystem, String> {
    let text = read(path)?;
    match parse_model(&text) {
        Ok(parsed) => {
            for w in &parsed.warnings {
                eprintln!("{}: {w}", path.display());
            }
            Ok(parsed.system)
        }
        Err(diags) => {
            let mut out = String::new();
            for d in &diags {
                out.push_str(&format!("{}: {d}\n", path.display()));
            }
            Err(out.trim_end().to_string())
        }
    }
}

fn load_graph(input: &GraphInput) -> Result<Dmg, String> {
    if let Some(path) = &input.edges {
        return Dmg::from_edge_list(&read(path)?).map_err(|e| e.to_string());
    }
    if let Some(path) = &input.dot {
        return Dmg::from_dot(&read(path)?).map_err(|e| e.to_string());
    }
    let Some(path) = &input.model else {
        return Err("expected a model file, --edges or --dot".into());
    };
    let sys = load_model(path)?;
    let aug = sys.graph_of_sdes();
    Ok(if input.to_dmg { aug.to_dmg() } else { aug })
}

fn emit_graph(g: &Dmg, out: &OutputArgs) -> CliResult {
    let text = match out.format {
        Format::Dot => g.to_dot(),
        Format::Edges => g.to_edge_list(),
    };
    write_out(&out.output, &text)
}

fn write_out(target: &Option<PathBuf>, text: &str) -> CliResult {
    match target {
        Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

/// Parse `0,s,t` / `0,s=0.4` against the model's declared labels.
fn parse_tau(spec: &str, sys: &SdeSystem) -> Result<Vec<TimeVal>, String> {
    let mut out = Vec::new();
    for item in spec.split(',') {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        if let Some((name, value)) = item.split_once('=') {
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| format!("bad time value `{value}`"))?;
            out.push(TimeVal::labeled(v, name.trim()));
        } else if let Ok(v) = item.parse::<f64>() {
            out.push(TimeVal::new(v));
        } else if let Some(v) = sys.label_value(item) {
            out.push(TimeVal::labeled(v, item));
        } else {
            return Err(format!("unknown split label `{item}`"));
        }
    }
    Ok(out)
}

fn split_pipeline(
    model: &PathBuf,
    tau: &str,
    mode: Mode,
    drop: &[String],
) -> Result<(SdeSystem, dscm_core::timeops::SplitGraph), String> {
    let sys = load_model(model)?;
    let tau = parse_tau(tau, &sys)?;
    let mut aug = sys.graph_of_sdes();
    let drop = names(drop);
    if !drop.is_empty() {
        let refs: Vec<&str> = drop.iter().map(|s| s.as_str()).collect();
        aug = marginalise_graph(&aug, &refs).map_err(|e| e.to_string())?;
    }
    let meta = SplitMeta::from_system(&sys);
    let sg = time_split_graph(&aug, &meta, &tau, sys.horizon, mode.into())
        .map_err(|e| e.to_string())?;
    Ok((sys, sg))
}

fn dispatch(command: Command) -> CliResult {
    match command {
        Command::Validate { model, json } => {
            let text = read(&model)?;
            match parse_model(&text) {
                Ok(parsed) => {
                    let report = parsed.system.check_unique_solvability();
                    let integrators =
                        check_independent_integrators(&parsed.system.graph_of_sdes());
                    if json {
                        let value = serde_json::json!({
                            "valid": true,
                            "warnings": parsed
                                .warnings
                                .iter()
                                .map(|w| w.to_string())
                                .collect::<Vec<_>>(),
                            "uniquely_solvable": report.solvable,
                            "solvability_witness": report.witness,
                            "scc_order": report.scc_order,
                            "independent_integrators": integrators.pass,
                        });
                        println!("{}", serde_json::to_string_pretty(&value).unwrap());
                    } else {
                        for w in &parsed.warnings {
                            println!("warning: {w}");
                        }
                        println!(
                            "valid model: {} processes, {} drivers",
                            parsed.system.processes.len(),
                            parsed.system.drivers.len()
                        );
                        match &report.witness {
                            None => println!("uniquely solvable; component order: {:?}", report.scc_order),
                            Some((v, bad)) => {
                                println!("NOT uniquely solvable: {v} has integrators {bad:?} in its own component")
                            }
                        }
                        println!(
                            "independent integrators: {}",
                            if integrators.pass { "pass" } else { "fail" }
                        );
                    }
                    if report.solvable {
                        Ok(ExitCode::SUCCESS)
                    } else {
                        Ok(ExitCode::from(1))
                    }
                }
                Err(diags) => {
                    for d in &diags {
                        eprintln!("{}: {d}", model.display());
                    }
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::Graph { input, out } => {
            let g = load_graph(&input)?;
            emit_graph(&g, &out)
        }
        Command::Split {
            model,
            tau,
            mode,
            drop,
            to_dmg,
            out,
        } => {
            let (_, sg) = split_pipeline(&model, &tau, mode, &drop)?;
            let g = if to_dmg { sg.graph.to_dmg() } else { sg.graph.clone() };
            emit_graph(&g, &out)
        }
        Command::Subsample {
            model,
            tau,
            mode,
            drop,
            to_dmg,
            out,
        } => {
            let (_, sg) = split_pipeline(&model, &tau, mode, &drop)?;
            let sub = subsample_graph(&sg).map_err(|e| e.to_string())?;
            let g = if to_dmg { sub.to_dmg() } else { sub };
            emit_graph(&g, &out)
        }
        Command::Collapse { model, tau, mode, out } => {
            let (_, sg) = split_pipeline(&model, &tau, mode, &[])?;
            let g = collapse_graph(&sg).map_err(|e| e.to_string())?;
            emit_graph(&g, &out)
        }
        Command::Marginalise { input, drop, out } => {
            let g = load_graph(&input)?;
            let drop = names(&drop);
            let refs: Vec<&str> = drop.iter().map(|s| s.as_str()).collect();
            let m = marginalise_graph(&g, &refs).map_err(|e| e.to_string())?;
            emit_graph(&m, &out)
        }
        Command::Intervene {
            model,
            targets,
            graph,
            out,
        } => {
            let sys = load_model(&model)?;
            let mut parsed: Vec<(String, f64)> = Vec::new();
            for t in &names(&targets) {
                let (name, value) = t
                    .split_once('=')
                    .ok_or_else(|| format!("expected name=value, got `{t}`"))?;
                parsed.push((
                    name.trim().to_string(),
                    value
                        .trim()
                        .parse()
                        .map_err(|_| format!("bad value in `{t}`"))?,
                ));
            }
            let refs: Vec<(&str, f64)> = parsed.iter().map(|(n, v)| (n.as_str(), *v)).collect();
            let cut = sys.intervene(&refs).map_err(|e| e.to_string())?;
            if graph {
                let names: Vec<&str> = parsed.iter().map(|(n, _)| n.as_str()).collect();
                let g = intervene_graph(&sys.graph_of_sdes(), &names)
                    .map_err(|e| e.to_string())?;
                emit_graph(&g, &out)
            } else {
                write_out(&out.output, &cut.to_model_text())
            }
        }
        Command::Sep {
            input,
            a,
            b,
            c,
            mode,
            json,
        } => {
            let g = load_graph(&input)?;
            let (a, b, c) = (names(&a), names(&b), names(&c));
            let ar: Vec<&str> = a.iter().map(|s| s.as_str()).collect();
            let br: Vec<&str> = b.iter().map(|s| s.as_str()).collect();
            let cr: Vec<&str> = c.iter().map(|s| s.as_str()).collect();
            let kind = match mode {
                SepKind::Sigma => SeparationMode::Sigma,
                SepKind::D => SeparationMode::D,
            };
            let separated = g
                .separated_by_name(&ar, &br, &cr, kind)
                .map_err(|e| e.to_string())?;
            if json {
                println!(
                    "{}",
                    serde_json::json!({
                        "a": a, "b": b, "c": c,
                        "mode": match mode { SepKind::Sigma => "sigma", SepKind::D => "d" },
                        "separated": separated,
                    })
                );
            } else {
                println!("separated: {separated}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Im { input, max_c, output } => {
            let g = load_graph(&input)?;
            let max = max_c.unwrap_or_else(|| g.node_count().saturating_sub(2));
            let im = enumerate_im(&g, max).map_err(|e| e.to_string())?;
            write_out(&output, &im.to_text())
        }
        Command::Lig { model, json, out } => {
            let sys = load_model(&model)?;
            let lig = local_independence_graph(&sys.graph_of_sdes());
            if json {
                let value = serde_json::json!({
                    "guarantee": lig.guarantee,
                    "endogenous_integrators": lig.report.endogenous_integrators,
                    "shared_integrators": lig.report.shared_integrators,
                });
                println!("{}", serde_json::to_string_pretty(&value).unwrap());
            } else {
                println!(
                    "local-independence guarantee: {}",
                    if lig.guarantee { "yes" } else { "no" }
                );
                for (p, u) in &lig.report.endogenous_integrators {
                    println!("  {p} integrates endogenous {u}");
                }
                for (w, p, q) in &lig.report.shared_integrators {
                    println!("  {w} drives both {p} and {q}");
                }
            }
            emit_graph(&lig.graph, &out)
        }
        Command::Docalc {
            input,
            rule,
            x,
            y,
            z,
            w,
            json,
        } => {
            if !(1..=3).contains(&rule) {
                return Err("rule must be 1, 2 or 3".into());
            }
            let g = load_graph(&input)?;
            let (x, y, z, w) = (names(&x), names(&y), names(&z), names(&w));
            let xr: Vec<&str> = x.iter().map(|s| s.as_str()).collect();
            let yr: Vec<&str> = y.iter().map(|s| s.as_str()).collect();
            let zr: Vec<&str> = z.iter().map(|s| s.as_str()).collect();
            let wr: Vec<&str> = w.iter().map(|s| s.as_str()).collect();
            let holds = docalc_check(&g, rule, &xr, &yr, &zr, &wr).map_err(|e| e.to_string())?;
            if json {
                println!(
                    "{}",
                    serde_json::json!({"rule": rule, "x": x, "y": y, "z": z, "w": w, "holds": holds})
                );
            } else {
                println!("rule {rule} precondition holds: {holds}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Fci {
            im,
            from_graph,
            max_c,
            output,
        } => {
            let model = match (&im, &from_graph) {
                (Some(path), None) => {
                    IndependenceModel::from_text(&read(path)?).map_err(|e| e.to_string())?
                }
                (None, Some(path)) => {
                    let g = Dmg::from_edge_list(&read(path)?).map_err(|e| e.to_string())?;
                    let max = max_c.unwrap_or_else(|| g.node_count().saturating_sub(2));
                    enumerate_im(&g, max).map_err(|e| e.to_string())?
                }
                _ => return Err("provide exactly one of --im or --from-graph".into()),
            };
            let pag = fci(&model).map_err(|e| e.to_string())?;
            write_out(&output, &pag.to_text())
        }
        Command::Simulate {
            model,
            dt,
            paths,
            seed,
            horizon,
            output,
        } => {
            let mut sys = load_model(&model)?;
            if let Some(h) = horizon {
                if h <= 0.0 {
                    return Err("horizon must be positive".into());
                }
                sys.horizon = h;
            }
            let cfg = SimConfig::new(dt, paths, seed);
            let ens = simulate::<Scalar>(&sys, &cfg).map_err(|e| e.to_string())?;
            write_out(&output, &ens.to_csv())
        }
        Command::Verify { quick, criteria, json } => {
            let opts = VerifyOptions { quick };
            let ids: Vec<u8> = if criteria.is_empty() {
                CRITERIA.to_vec()
            } else {
                criteria
            };
            let mut all_pass = true;
            let mut results = Vec::new();
            for id in ids {
                let outcome = dscm_core::verify::criterion(id, opts);
                all_pass &= outcome.passed;
                if json {
                    results.push(serde_json::json!({
                        "id": outcome.id,
                        "name": outcome.name,
                        "passed": outcome.passed,
                        "details": outcome.details,
                        "millis": outcome.millis as u64,
                    }));
                } else {
                    println!("{}", outcome.summary_line());
                    for line in &outcome.details {
                        println!("    {line}");
                    }
                }
            }
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&serde_json::json!({
                        "passed": all_pass,
                        "criteria": results
                    }))
                    .unwrap()
                );
            }
            Ok(if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
