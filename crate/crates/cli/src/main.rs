// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! `bipolymer`: generate graphs, check their properties, and count
//! independent sets or colorings, writing JSON reports.
//!
//! Exit codes: 0 success, 2 precondition/regime/domain error, 3 budget
//! exceeded, 4 unparseable input.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bipolymer::harness::{
    reports_to_csv, run_experiment, run_sweep, CheckKind, Command, DriverOptions, GraphSource, ModelSpec, OracleTarget, PropertyKind,
    PropsSpec, RunConfig, RunReport, TaggedError,
};
use bipolymer::hardcore::Branch;
use bipolymer::oracle::OracleBudget;
use bipolymer::props::{RegimeMode, DEFAULT_SAMPLES_PER_SIZE};
use bipolymer::{par, Error, Side};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "bipolymer", version, about = "Polymer-model counting on random regular bipartite graphs")]
struct Cli {
    /// Master seed for sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Work-unit cap for exhaustive enumerations.
    #[arg(long, global = true, default_value_t = OracleBudget::DEFAULT.max_enumeration)]
    budget: u128,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Debug, Clone)]
struct GraphArgs {
    /// Graph file (text or JSON).
    #[arg(long, conflicts_with_all = ["n", "delta"])]
    graph: Option<PathBuf>,
    /// Sample a graph with this many vertices per side.
    #[arg(long, requires = "delta")]
    n: Option<usize>,
    #[arg(long, requires = "n")]
    delta: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    #[arg(long, value_enum)]
    model: ModelKind,
    /// Fugacity for the hardcore model, e.g. 1, 1/2 or 0.25.
    #[arg(long)]
    lambda: Option<String>,
    /// Cluster side for the hardcore model.
    #[arg(long, value_enum, default_value_t = SideArg::L)]
    side: SideArg,
    /// Number of colors for the coloring model.
    #[arg(long)]
    q: Option<usize>,
    /// Color class X, comma separated (1-based).
    #[arg(long, value_delimiter = ',')]
    x: Vec<u8>,
    /// Polymers have fewer than this many vertices (default: unbounded).
    #[arg(long)]
    alpha_n: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct DriverArgs {
    #[arg(long)]
    eps: f64,
    /// Skip the regime preconditions.
    #[arg(long)]
    force: bool,
    #[arg(long, value_enum, default_value_t = BranchArg::Auto)]
    branch: BranchArg,
    /// Truncation order override (bounds are then reported as heuristic).
    #[arg(long)]
    m: Option<usize>,
    /// Evaluate each polymer partition function exactly.
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    alpha_n: Option<usize>,
    #[arg(long)]
    radius: Option<f64>,
    /// Brute-force size threshold N.
    #[arg(long)]
    n_threshold: Option<usize>,
    /// Structural error base C.
    #[arg(long)]
    c_constant: Option<f64>,
    /// Also run the brute-force oracle and report the log error.
    #[arg(long)]
    compare: bool,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Sample a graph from the matching model.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        delta: usize,
        /// Write JSON instead of the text format.
        #[arg(long)]
        json: bool,
    },
    /// Check expansion or cover properties.
    Props {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_enum, default_value_t = PropertyArg::Expander)]
        property: PropertyArg,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, value_enum, default_value_t = RegimeArg::IsHigh)]
        regime: RegimeArg,
        #[arg(long)]
        q: Option<usize>,
        /// Enforce the regime's degree bounds.
        #[arg(long)]
        strict: bool,
        #[arg(long, value_enum, default_value_t = CheckArg::Auto)]
        mode: CheckArg,
        #[arg(long, default_value_t = DEFAULT_SAMPLES_PER_SIZE)]
        per_size: usize,
        /// Number of graphs to sample (needs --n/--delta); 0 checks one graph.
        #[arg(long, default_value_t = 0)]
        samples: usize,
    },
    /// Approximate the hardcore partition function.
    CountIs {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        lambda: String,
        #[command(flatten)]
        driver: DriverArgs,
    },
    /// Approximate the number of proper colorings.
    CountColorings {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        q: usize,
        #[command(flatten)]
        driver: DriverArgs,
    },
    /// Brute-force counts.
    Oracle {
        #[command(flatten)]
        graph: GraphArgs,
        /// Weighted independent sets (needs --lambda).
        #[arg(long, conflicts_with = "colorings", required_unless_present = "colorings")]
        is: bool,
        /// Proper colorings (needs --q).
        #[arg(long)]
        colorings: bool,
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long)]
        q: Option<usize>,
        /// Restrict to a cluster: L or R for independent sets, a color list for colorings.
        #[arg(long, requires = "alpha_n")]
        cluster: Option<String>,
        #[arg(long)]
        alpha_n: Option<usize>,
    },
    /// Polymer partition function Ξ(1) of one model.
    Xi {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        exact: bool,
    },
    /// Kotecký–Preiss condition on one graph.
    KpCheck {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        a_coeff: f64,
        #[arg(long)]
        radius: f64,
    },
    /// Run a JSON configuration (one run or an array of runs).
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Also write a CSV table of the reports.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModelKind {
    Hardcore,
    Coloring,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SideArg {
    L,
    R,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::L => Side::L,
            SideArg::R => Side::R,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum BranchArg {
    Auto,
    Brute,
    Polymer,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum PropertyArg {
    Expander,
    Cover,
    MixedExpansion,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum RegimeArg {
    IsHigh,
    IsLow,
    Coloring,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum CheckArg {
    Exact,
    Sampled,
    Auto,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<TaggedError> for Failure {
    fn from(t: TaggedError) -> Self {
        Failure {
            code: exit_code(&t.error),
            message: t.to_string(),
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Malformed { .. } => 4,
        Error::Resource { .. } => 3,
        Error::Precondition(_) | Error::Domain(_) | Error::Regime(_) | Error::Model(_) => 2,
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure {
        code: 4,
        message: format!("cannot read {}: {e}", path.display()),
    })
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure {
            code: 2,
            message: format!("cannot write {}: {e}", p.display()),
        }),
        None => {
            println!("{}", text.trim_end());
            Ok(())
        }
    }
}

fn graph_source(g: &GraphArgs) -> Result<Option<GraphSource>, Failure> {
    Ok(match (&g.graph, g.n, g.delta) {
        (Some(p), _, _) => Some(GraphSource::Inline { text: read(p)? }),
        (None, Some(n), Some(delta)) => Some(GraphSource::Sample { n, delta }),
        _ => None,
    })
}

fn usage(msg: &str) -> Failure {
    Failure {
        code: 2,
        message: msg.into(),
    }
}

fn model_spec(m: &ModelArgs) -> Result<ModelSpec, Failure> {
    Ok(match m.model {
        ModelKind::Hardcore => ModelSpec::Hardcore {
            lambda: m.lambda.clone().ok_or_else(|| usage("--model hardcore needs --lambda"))?,
            side: m.side.into(),
            alpha_n: m.alpha_n,
        },
        ModelKind::Coloring => ModelSpec::Coloring {
            q: m.q.ok_or_else(|| usage("--model coloring needs --q"))?,
            x: if m.x.is_empty() { return Err(usage("--model coloring needs --x")) } else { m.x.clone() },
            alpha_n: m.alpha_n,
        },
    })
}

fn driver(d: &DriverArgs) -> DriverOptions {
    DriverOptions {
        branch: match d.branch {
            BranchArg::Auto => Branch::Auto,
            BranchArg::Brute => Branch::Brute,
            BranchArg::Polymer => Branch::Polymer,
        },
        m: d.m,
        force: d.force,
        exact: d.exact,
        alpha_n: d.alpha_n,
        radius: d.radius,
        n_threshold: d.n_threshold,
        c_constant: d.c_constant,
        compare: d.compare,
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let config = |graph, command| RunConfig {
        name: None,
        seed: cli.seed,
        budget: cli.budget,
        graph,
        command,
    };
    let cfg = match &cli.command {
        Cmd::Gen { n, delta, json } => {
            let report = run_experiment(&config(Some(GraphSource::Sample { n: *n, delta: *delta }), Command::Gen))?;
            let text = report.graph_text.unwrap_or_default();
            let text = if *json {
                bipolymer::BipartiteGraph::from_text(&text).map_err(|e| usage(&e.to_string()))?.to_json()
            } else {
                text
            };
            return write_output(&cli.out, &text);
        }
        Cmd::Props {
            graph,
            property,
            alpha,
            beta,
            regime,
            q,
            strict,
            mode,
            per_size,
            samples,
        } => config(
            graph_source(graph)?,
            Command::Props(PropsSpec {
                property: match property {
                    PropertyArg::Expander => PropertyKind::Expander,
                    PropertyArg::Cover => PropertyKind::Cover,
                    PropertyArg::MixedExpansion => PropertyKind::MixedExpansion,
                },
                alpha: *alpha,
                beta: *beta,
                regime: match regime {
                    RegimeArg::IsHigh => RegimeMode::IsHigh,
                    RegimeArg::IsLow => RegimeMode::IsLow,
                    RegimeArg::Coloring => RegimeMode::Coloring,
                },
                q: *q,
                force: !strict,
                check: match mode {
                    CheckArg::Exact => CheckKind::Exact,
                    CheckArg::Sampled => CheckKind::Sampled,
                    CheckArg::Auto => CheckKind::Auto,
                },
                per_size: *per_size,
                samples: *samples,
            }),
        ),
        Cmd::CountIs { graph, lambda, driver: d } => config(
            graph_source(graph)?,
            Command::CountIs {
                lambda: lambda.clone(),
                eps: d.eps,
                driver: driver(d),
            },
        ),
        Cmd::CountColorings { graph, q, driver: d } => config(
            graph_source(graph)?,
            Command::CountColorings {
                q: *q,
                eps: d.eps,
                driver: driver(d),
            },
        ),
        Cmd::Oracle {
            graph,
            is,
            colorings: _,
            lambda,
            q,
            cluster,
            alpha_n,
        } => {
            let target = if *is {
                let side = match cluster.as_deref() {
                    None => None,
                    Some("L") | Some("l") => Some(Side::L),
                    Some("R") | Some("r") => Some(Side::R),
                    Some(other) => return Err(usage(&format!("--cluster for --is must be L or R, got {other}"))),
                };
                OracleTarget::IndependentSets {
                    lambda: lambda.clone().ok_or_else(|| usage("--is needs --lambda"))?,
                    side,
                    alpha_n: *alpha_n,
                }
            } else {
                let x = match cluster {
                    None => None,
                    Some(s) => Some(
                        s.split(',')
                            .map(|c| c.trim().parse::<u8>())
                            .collect::<Result<Vec<_>, _>>()
                            .map_err(|_| Failure {
                                code: 4,
                                message: format!("bad color list {s:?}"),
                            })?,
                    ),
                };
                OracleTarget::Colorings {
                    q: q.ok_or_else(|| usage("--colorings needs --q"))?,
                    x,
                    alpha_n: *alpha_n,
                }
            };
            config(graph_source(graph)?, Command::Oracle(target))
        }
        Cmd::Xi {
            graph,
            model,
            eps,
            radius,
            m,
            exact,
        } => config(
            graph_source(graph)?,
            Command::Xi {
                model: model_spec(model)?,
                eps: *eps,
                radius: *radius,
                m: *m,
                exact: *exact,
            },
        ),
        Cmd::KpCheck {
            graph,
            model,
            a_coeff,
            radius,
        } => config(
            graph_source(graph)?,
            Command::KpCheck {
                model: model_spec(model)?,
                a_coeff: *a_coeff,
                radius: *radius,
            },
        ),
        Cmd::Experiment { config: path, csv } => return run_config_file(path, csv.as_deref(), &cli.out),
    };
    let report = run_experiment(&cfg)?;
    write_output(&cli.out, &report.to_json())
}

fn run_config_file(path: &Path, csv: Option<&Path>, out: &Option<PathBuf>) -> Result<(), Failure> {
    let text = read(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Failure {
        code: 4,
        message: format!("{} (line {}): {e}", path.display(), e.line()),
    })?;
    let configs: Vec<RunConfig> = match value {
        serde_json::Value::Array(_) => serde_json::from_value(value),
        other => serde_json::from_value(other).map(|c| vec![c]),
    }
    .map_err(|e| Failure {
        code: 4,
        message: format!("{}: {e}", path.display()),
    })?;
    let mut reports: Vec<RunReport> = Vec::new();
    for r in run_sweep(&configs) {
        reports.push(r?);
    }
    if let Some(csv_path) = csv {
        let table = reports_to_csv(&reports).map_err(|e| usage(&e.to_string()))?;
        write_output(&Some(csv_path.to_path_buf()), &table)?;
    }
    write_output(out, &serde_json::to_string_pretty(&reports).expect("reports serialize"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads;
    match par::with_threads(threads, || run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
