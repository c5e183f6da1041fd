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

//! Experiment orchestration and machine-readable reports.
//!
//! A [`RunConfig`] names a graph source and one command. [`run_experiment`]
//! executes it and returns a [`RunReport`], whose JSON form is stable: the
//! same configuration and seed give byte-identical output once the
//! `timings` map is cleared. Exact rationals are written as `"p/q"` strings
//! and logarithms as decimals with 15 significant digits.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::coloring::{algorithm2, ColorClass, ColoringModel};
use crate::error::{Error, Result};
use crate::expansion::{estimate_log_xi, ln_rational, Estimate, Method};
use crate::graph::{BipartiteGraph, Side};
use crate::hardcore::{algorithm1, Branch, DriverConfig, HardcoreModel, HardcoreParams, LOW_FUGACITY_RADIUS};
use crate::oracle::{count_colorings, count_colorings_cluster, count_is, count_is_cluster, OracleBudget};
use crate::par;
use crate::polymer::{kp_check, xi_exact, PolymerModel};
use crate::props::{
    beta_minus_one_expansion_holds, has_cover_property, is_expander, regime_parameters, CheckMode, PropertyVerdict, RegimeMode,
    DEFAULT_SAMPLES_PER_SIZE,
};
use crate::random::{sample_graph, sub_seed, SampleConfig};

pub const SCHEMA_VERSION: u32 = 1;

/// The library module an error came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Module {
    GraphCore,
    RandomGen,
    StructureProps,
    PolymerCore,
    ClusterExpansion,
    HardcoreModel,
    ColoringModel,
    ExactOracle,
    CliHarness,
}

impl fmt::Display for Module {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        f.write_str(&s)
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("[{module}] {error}")]
pub struct TaggedError {
    pub module: Module,
    pub error: Error,
}

fn tag(module: Module) -> impl Fn(Error) -> TaggedError {
    move |error| TaggedError { module, error }
}

type Tagged<T> = std::result::Result<T, TaggedError>;

/// Parses `p/q`, an integer, or a finite decimal such as `0.25`, exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::malformed(None, format!("not a rational number: {s:?}"));
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.chars().any(|c| !c.is_ascii_digit()) || (int.is_empty() && frac.is_empty()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let digits = if digits == "-" || digits == "+" { return Err(bad()) } else { digits };
    let numer = BigInt::from_str(&digits).map_err(|_| bad())?;
    Ok(BigRational::new(numer, BigInt::from(10u8).pow(frac.len() as u32)))
}

pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Decimal with 15 significant digits.
pub fn format_log(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.14e}")
    } else {
        x.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GraphSource {
    /// Sampled from the matching model with the run's seed.
    Sample { n: usize, delta: usize },
    /// Text or JSON graph file contents.
    Inline { text: String },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PropertyKind {
    #[default]
    Expander,
    Cover,
    MixedExpansion,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Exact,
    Sampled,
    #[default]
    Auto,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PropsSpec {
    pub property: PropertyKind,
    /// α (or a for the cover property); taken from `regime` when absent.
    pub alpha: Option<f64>,
    /// β (or b for the cover property).
    pub beta: Option<f64>,
    pub regime: RegimeMode,
    pub q: Option<usize>,
    pub force: bool,
    pub check: CheckKind,
    pub per_size: usize,
    /// Number of sampled graphs; 0 checks the run's single graph.
    pub samples: usize,
}

impl Default for PropsSpec {
    fn default() -> Self {
        PropsSpec {
            property: PropertyKind::Expander,
            alpha: None,
            beta: None,
            regime: RegimeMode::IsHigh,
            q: None,
            force: true,
            check: CheckKind::Auto,
            per_size: DEFAULT_SAMPLES_PER_SIZE,
            samples: 0,
        }
    }
}

/// Options forwarded to Algorithms 1 and 2.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DriverOptions {
    pub branch: Branch,
    pub m: Option<usize>,
    pub force: bool,
    pub exact: bool,
    pub alpha_n: Option<usize>,
    pub radius: Option<f64>,
    pub n_threshold: Option<usize>,
    pub c_constant: Option<f64>,
    /// Also run the brute-force oracle and report the log error.
    pub compare: bool,
}

impl DriverOptions {
    fn config(&self, budget: OracleBudget) -> DriverConfig {
        let d = DriverConfig::default();
        DriverConfig {
            n_threshold: self.n_threshold.unwrap_or(d.n_threshold),
            c_constant: self.c_constant.unwrap_or(d.c_constant),
            alpha_n: self.alpha_n,
            m_override: self.m,
            radius: self.radius,
            branch: self.branch,
            force: self.force,
            exact: self.exact,
            budget,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ModelSpec {
    Hardcore {
        lambda: String,
        side: Side,
        /// Polymers have fewer than `alpha_n` vertices; unbounded when absent.
        alpha_n: Option<usize>,
    },
    Coloring {
        q: usize,
        x: Vec<u8>,
        alpha_n: Option<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "target", rename_all = "kebab-case")]
pub enum OracleTarget {
    IndependentSets {
        lambda: String,
        /// Restrict to the cluster of this side.
        side: Option<Side>,
        alpha_n: Option<usize>,
    },
    Colorings {
        q: usize,
        /// Restrict to the cluster of this color class.
        x: Option<Vec<u8>>,
        alpha_n: Option<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    Gen,
    Props(PropsSpec),
    CountIs {
        lambda: String,
        eps: f64,
        #[serde(default)]
        driver: DriverOptions,
    },
    CountColorings {
        q: usize,
        eps: f64,
        #[serde(default)]
        driver: DriverOptions,
    },
    Oracle(OracleTarget),
    Xi {
        #[serde(flatten)]
        model: ModelSpec,
        eps: f64,
        radius: Option<f64>,
        m: Option<usize>,
        exact: bool,
    },
    KpCheck {
        #[serde(flatten)]
        model: ModelSpec,
        a_coeff: f64,
        radius: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub budget: u128,
    pub graph: Option<GraphSource>,
    pub command: Command,
}

fn default_budget() -> u128 {
    OracleBudget::DEFAULT.max_enumeration
}

impl RunConfig {
    pub fn new(seed: u64, graph: Option<GraphSource>, command: Command) -> Self {
        RunConfig {
            name: None,
            seed,
            budget: OracleBudget::DEFAULT.max_enumeration,
            graph,
            command,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub n: usize,
    pub delta: usize,
    pub fingerprint: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedVerdict {
    pub name: String,
    pub verdict: PropertyVerdict,
}

/// An [`Estimate`] in report form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub name: String,
    pub method: Method,
    /// Whether the error bound is certified or only heuristic.
    pub certified: bool,
    pub log_value: String,
    pub exact: Option<String>,
    pub relative_error_bound: String,
    pub truncation_order: Option<usize>,
    pub polymer_count: Option<usize>,
    pub notes: Vec<String>,
}

impl EstimateRecord {
    fn new(name: &str, e: &Estimate) -> Self {
        EstimateRecord {
            name: name.into(),
            method: e.method,
            certified: e.certified,
            log_value: format_log(e.log_value),
            exact: e.exact.as_ref().map(format_rational),
            relative_error_bound: format_log(e.relative_error_bound),
            truncation_order: e.diagnostics.truncation_order,
            polymer_count: e.diagnostics.polymer_count,
            notes: e.diagnostics.notes.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comparison {
    pub estimate: String,
    pub oracle: String,
    /// |ln Ẑ − ln Z|.
    pub abs_log_error: String,
    pub bound: String,
    pub within_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub config: RunConfig,
    pub seed: u64,
    pub graph: Option<GraphSummary>,
    /// Graph text for `gen`.
    pub graph_text: Option<String>,
    pub verdicts: Vec<NamedVerdict>,
    pub estimates: Vec<EstimateRecord>,
    pub oracle: Vec<NamedValue>,
    pub comparisons: Vec<Comparison>,
    pub summary: BTreeMap<String, String>,
    /// Wall-clock seconds; the only nondeterministic field.
    pub timings: BTreeMap<String, f64>,
}

impl RunReport {
    fn new(config: &RunConfig) -> Self {
        RunReport {
            schema_version: SCHEMA_VERSION,
            config: config.clone(),
            seed: config.seed,
            graph: None,
            graph_text: None,
            verdicts: Vec::new(),
            estimates: Vec::new(),
            oracle: Vec::new(),
            comparisons: Vec::new(),
            summary: BTreeMap::new(),
            timings: BTreeMap::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::malformed(Some(e.line()), e.to_string()))
    }

    /// The report with its timing entries removed.
    pub fn without_timings(&self) -> Self {
        RunReport {
            timings: BTreeMap::new(),
            ..self.clone()
        }
    }
}

fn load_graph(config: &RunConfig) -> Tagged<Option<BipartiteGraph>> {
    match &config.graph {
        None => Ok(None),
        Some(GraphSource::Sample { n, delta }) => {
            let cfg = SampleConfig::new(*n, *delta, config.seed).map_err(tag(Module::RandomGen))?;
            Ok(Some(sample_graph(&cfg)))
        }
        Some(GraphSource::Inline { text }) => BipartiteGraph::parse(text).map(Some).map_err(tag(Module::GraphCore)),
    }
}

fn need_graph(g: &Option<BipartiteGraph>) -> Tagged<&BipartiteGraph> {
    g.as_ref()
        .ok_or_else(|| tag(Module::CliHarness)(Error::Precondition("this command needs a graph".into())))
}

fn check_mode(kind: CheckKind, budget: u128, per_size: usize, seed: u64) -> CheckMode {
    match kind {
        CheckKind::Exact => CheckMode::Exact { budget },
        CheckKind::Sampled => CheckMode::Sampled { per_size, seed },
        CheckKind::Auto => CheckMode::Auto { budget, per_size, seed },
    }
}

fn verify(g: &BipartiteGraph, spec: &PropsSpec, alpha: f64, beta: f64, mode: CheckMode) -> Result<PropertyVerdict> {
    match spec.property {
        PropertyKind::Expander => is_expander(g, alpha, beta, mode),
        PropertyKind::Cover => has_cover_property(g, alpha, beta, mode),
        PropertyKind::MixedExpansion => beta_minus_one_expansion_holds(g, alpha, beta, mode),
    }
}

fn run_props(config: &RunConfig, graph: &Option<BipartiteGraph>, spec: &PropsSpec, report: &mut RunReport) -> Tagged<()> {
    let delta = match (&config.graph, graph) {
        (_, Some(g)) => g.delta(),
        _ => return Err(tag(Module::CliHarness)(Error::Precondition("props needs a graph source".into()))),
    };
    let (alpha, beta) = match (spec.alpha, spec.beta) {
        (Some(a), Some(b)) => (a, b),
        (a, b) => {
            let p = regime_parameters(spec.regime, delta, spec.q, spec.force).map_err(tag(Module::StructureProps))?;
            (a.unwrap_or(p.alpha), b.unwrap_or(p.beta))
        }
    };
    report.summary.insert("alpha".into(), format_log(alpha));
    report.summary.insert("beta".into(), format_log(beta));
    if spec.samples == 0 {
        let g = need_graph(graph)?;
        let mode = check_mode(spec.check, config.budget, spec.per_size, config.seed);
        let verdict = verify(g, spec, alpha, beta, mode).map_err(tag(Module::StructureProps))?;
        report.verdicts.push(NamedVerdict {
            name: format!("{:?}", spec.property).to_lowercase(),
            verdict,
        });
        return Ok(());
    }
    let (n, delta) = match &config.graph {
        Some(GraphSource::Sample { n, delta }) => (*n, *delta),
        _ => {
            return Err(tag(Module::CliHarness)(Error::Precondition(
                "sampling several graphs needs a sampled graph source".into(),
            )))
        }
    };
    let seeds: Vec<u64> = (0..spec.samples as u64).map(|i| sub_seed(config.seed, i)).collect();
    let verdicts = par::map_slice(&seeds, |&s| -> Result<PropertyVerdict> {
        let g = sample_graph(&SampleConfig::new(n, delta, s)?);
        verify(&g, spec, alpha, beta, check_mode(spec.check, config.budget, spec.per_size, splitmix_tag(s)))
    });
    let mut passed = 0usize;
    let mut proofs = 0usize;
    for v in verdicts {
        let v = v.map_err(tag(Module::StructureProps))?;
        passed += v.holds as usize;
        proofs += v.is_proof as usize;
    }
    report.summary.insert("samples".into(), spec.samples.to_string());
    report.summary.insert("passed".into(), passed.to_string());
    report.summary.insert("exact_verdicts".into(), proofs.to_string());
    report.summary.insert("pass_fraction".into(), format_log(passed as f64 / spec.samples as f64));
    Ok(())
}

/// Distinct stream for subset sampling on a graph sampled from `s`.
fn splitmix_tag(s: u64) -> u64 {
    sub_seed(s, u32::MAX as u64)
}

fn compare(report: &mut RunReport, name: &str, est: &Estimate, oracle: &BigRational) -> Tagged<()> {
    let err = (est.log_value - ln_rational(oracle)).abs();
    let ok = err <= est.relative_error_bound + 1e-9 * (1.0 + est.log_value.abs());
    report.comparisons.push(Comparison {
        estimate: name.into(),
        oracle: format_rational(oracle),
        abs_log_error: format_log(err),
        bound: format_log(est.relative_error_bound),
        within_bound: ok,
    });
    if est.certified && !ok {
        return Err(tag(Module::CliHarness)(Error::Model(format!(
            "certified bound violated: |log error| = {err} > {}",
            est.relative_error_bound
        ))));
    }
    Ok(())
}

fn hardcore_model<'g>(g: &'g BipartiteGraph, lambda: &str, side: Side, alpha_n: Option<usize>) -> Tagged<HardcoreModel<'g>> {
    let lambda = parse_rational(lambda).map_err(tag(Module::CliHarness))?;
    let params = HardcoreParams::new(lambda, side, alpha_n.unwrap_or(usize::MAX)).map_err(tag(Module::HardcoreModel))?;
    Ok(HardcoreModel::new(g, params))
}

fn coloring_model<'g>(g: &'g BipartiteGraph, q: usize, x: &[u8], alpha_n: Option<usize>) -> Tagged<ColoringModel<'g>> {
    let x = ColorClass::new(q, x).map_err(tag(Module::ColoringModel))?;
    Ok(ColoringModel::new(g, x, alpha_n.unwrap_or(2 * g.n() + 1)))
}

fn with_model<R>(g: &BipartiteGraph, spec: &ModelSpec, f: impl FnOnce(&dyn PolymerModel) -> R) -> Tagged<R> {
    Ok(match spec {
        ModelSpec::Hardcore { lambda, side, alpha_n } => f(&hardcore_model(g, lambda, *side, *alpha_n)?),
        ModelSpec::Coloring { q, x, alpha_n } => f(&coloring_model(g, *q, x, *alpha_n)?),
    })
}

/// Runs one configured command.
pub fn run_experiment(config: &RunConfig) -> Tagged<RunReport> {
    let start = Instant::now();
    let mut report = RunReport::new(config);
    let budget = OracleBudget::new(config.budget).map_err(tag(Module::CliHarness))?;
    let graph = load_graph(config)?;
    if let Some(g) = &graph {
        report.graph = Some(GraphSummary {
            n: g.n(),
            delta: g.delta(),
            fingerprint: g.fingerprint(),
        });
    }
    match &config.command {
        Command::Gen => {
            report.graph_text = Some(need_graph(&graph)?.to_text());
        }
        Command::Props(spec) => run_props(config, &graph, spec, &mut report)?,
        Command::CountIs { lambda, eps, driver } => {
            let g = need_graph(&graph)?;
            let lambda = parse_rational(lambda).map_err(tag(Module::CliHarness))?;
            let est = algorithm1(g, &lambda, *eps, &driver.config(budget)).map_err(tag(Module::HardcoreModel))?;
            report.estimates.push(EstimateRecord::new("algorithm1", &est));
            if let Some(z) = est.exact.as_ref().filter(|_| est.method == Method::BruteForce) {
                report.oracle.push(NamedValue {
                    name: "Z".into(),
                    value: format_rational(z),
                });
            } else if driver.compare {
                let z = count_is(g, &lambda, budget).map_err(tag(Module::ExactOracle))?;
                report.oracle.push(NamedValue {
                    name: "Z".into(),
                    value: format_rational(&z),
                });
                compare(&mut report, "algorithm1", &est, &z)?;
            }
        }
        Command::CountColorings { q, eps, driver } => {
            let g = need_graph(&graph)?;
            let est = algorithm2(g, *q, *eps, &driver.config(budget)).map_err(tag(Module::ColoringModel))?;
            report.estimates.push(EstimateRecord::new("algorithm2", &est));
            if let Some(z) = est.exact.as_ref().filter(|_| est.method == Method::BruteForce) {
                report.oracle.push(NamedValue {
                    name: "C".into(),
                    value: format_rational(z),
                });
            } else if driver.compare {
                let c = count_colorings(g, *q, budget).map_err(tag(Module::ExactOracle))?;
                let c = BigRational::from_integer(c.into());
                report.oracle.push(NamedValue {
                    name: "C".into(),
                    value: format_rational(&c),
                });
                compare(&mut report, "algorithm2", &est, &c)?;
            }
        }
        Command::Oracle(target) => {
            let g = need_graph(&graph)?;
            let (name, value) = run_oracle(g, target, budget)?;
            report.oracle.push(NamedValue {
                name,
                value: format_rational(&value),
            });
        }
        Command::Xi { model, eps, radius, m, exact } => {
            let g = need_graph(&graph)?;
            let radius = radius.unwrap_or(LOW_FUGACITY_RADIUS);
            let est = with_model(g, model, |m_: &dyn PolymerModel| -> Tagged<Estimate> {
                if *exact {
                    let xi = xi_exact(m_, &BigRational::one(), None, budget).map_err(tag(Module::PolymerCore))?;
                    Ok(Estimate::exact(xi, Method::PolymerPipeline))
                } else {
                    estimate_log_xi(m_, *eps, radius, *m, budget).map_err(tag(Module::ClusterExpansion))
                }
            })??;
            report.estimates.push(EstimateRecord::new("xi", &est));
        }
        Command::KpCheck { model, a_coeff, radius } => {
            let g = need_graph(&graph)?;
            let rep = with_model(g, model, |m_: &dyn PolymerModel| kp_check(m_, *a_coeff, *radius))?.map_err(tag(Module::PolymerCore))?;
            report.summary.insert("max_ratio".into(), format_log(rep.max_ratio));
            report.summary.insert("passes".into(), rep.passes().to_string());
            report.summary.insert("polymer_count".into(), rep.polymer_count.to_string());
            if let Some(p) = rep.argmax {
                report.summary.insert("argmax".into(), p.support.to_string());
            }
        }
    }
    report.timings.insert("total".into(), start.elapsed().as_secs_f64());
    Ok(report)
}

fn run_oracle(g: &BipartiteGraph, target: &OracleTarget, budget: OracleBudget) -> Tagged<(String, BigRational)> {
    let t = tag(Module::ExactOracle);
    match target {
        OracleTarget::IndependentSets { lambda, side, alpha_n } => {
            let lambda = parse_rational(lambda).map_err(tag(Module::CliHarness))?;
            match side {
                None => Ok(("Z".into(), count_is(g, &lambda, budget).map_err(t)?)),
                Some(side) => {
                    let k = alpha_n.ok_or_else(|| tag(Module::CliHarness)(Error::Precondition("cluster needs alpha_n".into())))?;
                    Ok((format!("Z_{side}"), count_is_cluster(g, *side, k, &lambda, budget).map_err(t)?))
                }
            }
        }
        OracleTarget::Colorings { q, x, alpha_n } => match x {
            None => Ok(("C".into(), BigRational::from_integer(count_colorings(g, *q, budget).map_err(t)?.into()))),
            Some(x) => {
                let class = ColorClass::new(*q, x).map_err(tag(Module::ColoringModel))?;
                let k = alpha_n.ok_or_else(|| tag(Module::CliHarness)(Error::Precondition("cluster needs alpha_n".into())))?;
                let c = count_colorings_cluster(g, &class, k, *q, budget).map_err(t)?;
                Ok((format!("C_{class}"), BigRational::from_integer(c.into())))
            }
        },
    }
}

/// Runs several configurations concurrently; reports keep the input order.
pub fn run_sweep(configs: &[RunConfig]) -> Vec<Tagged<RunReport>> {
    par::map_slice(configs, run_experiment)
}

/// One CSV row per report.
pub fn reports_to_csv(reports: &[RunReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Precondition(format!("csv: {e}"));
    w.write_record([
        "name", "command", "seed", "n", "delta", "fingerprint", "estimate", "method", "certified", "log_value", "exact", "error_bound",
        "oracle", "abs_log_error", "pass_fraction", "seconds",
    ])
    .map_err(io)?;
    for r in reports {
        let cmd = serde_json::to_value(&r.config.command)
            .ok()
            .and_then(|v| v.get("command").and_then(|c| c.as_str()).map(String::from))
            .unwrap_or_default();
        let g = r.graph.as_ref();
        let e = r.estimates.first();
        let row = [
            r.config.name.clone().unwrap_or_default(),
            cmd,
            r.seed.to_string(),
            g.map(|g| g.n.to_string()).unwrap_or_default(),
            g.map(|g| g.delta.to_string()).unwrap_or_default(),
            g.map(|g| g.fingerprint.clone()).unwrap_or_default(),
            e.map(|e| e.name.clone()).unwrap_or_default(),
            e.map(|e| format!("{:?}", e.method)).unwrap_or_default(),
            e.map(|e| e.certified.to_string()).unwrap_or_default(),
            e.map(|e| e.log_value.clone()).unwrap_or_default(),
            e.and_then(|e| e.exact.clone()).unwrap_or_default(),
            e.map(|e| e.relative_error_bound.clone()).unwrap_or_default(),
            r.oracle.first().map(|o| o.value.clone()).unwrap_or_default(),
            r.comparisons.first().map(|c| c.abs_log_error.clone()).unwrap_or_default(),
            r.summary.get("pass_fraction").cloned().unwrap_or_default(),
            r.timings.get("total").map(|t| t.to_string()).unwrap_or_default(),
        ];
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Precondition(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

impl From<TaggedError> for Error {
    fn from(t: TaggedError) -> Self {
        t.error
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_parse() {
        let r = |p: i64, q: i64| BigRational::new(p.into(), q.into());
        assert_eq!(parse_rational("3/4").unwrap(), r(3, 4));
        assert_eq!(parse_rational("2").unwrap(), r(2, 1));
        assert_eq!(parse_rational("0.25").unwrap(), r(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), r(-3, 2));
        for bad in ["", "1/0", "a", "1.2.3", "-", "."] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
        assert_eq!(format_rational(&r(6, 4)), "3/2");
        assert_eq!(format_log(std::f64::consts::LN_2), "6.93147180559945e-1");
    }

    fn k22_source() -> GraphSource {
        GraphSource::Inline {
            text: "2 2\n0 1\n1 0\n".into(),
        }
    }

    #[test]
    fn count_is_report() {
        let cfg = RunConfig::new(
            7,
            Some(k22_source()),
            Command::CountIs {
                lambda: "1".into(),
                eps: 0.1,
                driver: DriverOptions {
                    force: true,
                    ..Default::default()
                },
            },
        );
        let rep = run_experiment(&cfg).unwrap();
        assert_eq!(rep.oracle[0].value, "7/1");
        assert_eq!(rep.estimates[0].relative_error_bound, format_log(0.0));
        let back = RunReport::from_json(&rep.to_json()).unwrap();
        assert_eq!(back, rep);
    }

    #[test]
    fn errors_are_tagged() {
        let cfg = RunConfig::new(
            0,
            Some(GraphSource::Inline { text: "2 1\n0 0\n".into() }),
            Command::Gen,
        );
        let err = run_experiment(&cfg).unwrap_err();
        assert_eq!(err.module, Module::GraphCore);
        assert!(matches!(err.error, Error::Malformed { line: Some(2), .. }));
        let cfg = RunConfig::new(0, Some(k22_source()), Command::CountIs { lambda: "1".into(), eps: 0.1, driver: DriverOptions::default() });
        assert_eq!(run_experiment(&cfg).unwrap_err().module, Module::HardcoreModel);
    }

    #[test]
    fn sweeps_are_reproducible() {
        let cfg = RunConfig::new(
            11,
            Some(GraphSource::Sample { n: 12, delta: 3 }),
            Command::Props(PropsSpec {
                alpha: Some(0.25),
                beta: Some(1.5),
                check: CheckKind::Sampled,
                per_size: 20,
                samples: 8,
                ..Default::default()
            }),
        );
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.without_timings().to_json(), b.without_timings().to_json());
        let frac: f64 = a.summary["pass_fraction"].parse().unwrap();
        assert!((0.0..=1.0).contains(&frac));
        let csv = reports_to_csv(&[a, b]).unwrap();
        assert_eq!(csv.lines().count(), 3);
    }
}
