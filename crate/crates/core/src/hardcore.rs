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

//! Weighted independent sets: polymers are G²-components of an independent
//! set restricted to one side X, and Z_X = (λ+1)^n Ξ_{<αn}.

use std::time::Instant;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansion::{estimate_log_xi, ln_rational, log_add, Estimate, Method};
use crate::graph::{BipartiteGraph, Side, Vertex, VertexSet};
use crate::oracle::{count_is, OracleBudget};
use crate::polymer::{xi_exact, Label, PolymerModel};
use crate::props::{regime_parameters, RegimeMode, RegimeParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardcoreParams {
    /// Fugacity. Zero is accepted so that degenerate cases can be examined.
    pub lambda: BigRational,
    pub side: Side,
    /// Polymers have fewer than `alpha_n` vertices.
    pub alpha_n: usize,
}

impl HardcoreParams {
    pub fn new(lambda: BigRational, side: Side, alpha_n: usize) -> Result<Self> {
        if lambda.is_negative() {
            return Err(Error::Domain(format!("fugacity must be nonnegative, got {lambda}")));
        }
        Ok(HardcoreParams { lambda, side, alpha_n })
    }
}

/// a_γ = λ^{|γ|} (λ+1)^{−|N(γ̄)|}.
pub fn hardcore_weight(g: &BipartiteGraph, support: &VertexSet, side: Side, lambda: &BigRational) -> Result<BigRational> {
    if support.is_empty() {
        return Err(Error::Model("empty support".into()));
    }
    if let Some(v) = support.iter().find(|v| v.side != side) {
        return Err(Error::Model(format!("vertex {v} is off the cluster side {side}")));
    }
    let nb = g.neighborhood(support)?;
    let one_plus = lambda + BigRational::one();
    Ok(num_traits::pow(lambda.clone(), support.len()) / num_traits::pow(one_plus, nb.len()))
}

pub struct HardcoreModel<'g> {
    graph: &'g BipartiteGraph,
    params: HardcoreParams,
}

impl<'g> HardcoreModel<'g> {
    pub fn new(graph: &'g BipartiteGraph, params: HardcoreParams) -> Self {
        HardcoreModel { graph, params }
    }

    pub fn params(&self) -> &HardcoreParams {
        &self.params
    }
}

impl PolymerModel for HardcoreModel<'_> {
    fn graph(&self) -> &BipartiteGraph {
        self.graph
    }

    fn in_universe(&self, v: Vertex) -> bool {
        v.side == self.params.side
    }

    fn label_domain(&self, _v: Vertex) -> Vec<Label> {
        vec![1]
    }

    fn max_polymer_size(&self) -> usize {
        self.params.alpha_n.saturating_sub(1)
    }

    fn structural_degree(&self) -> usize {
        self.graph.n()
    }

    fn weight_base(&self, support: &VertexSet, _labels: &[Label]) -> Result<BigRational> {
        hardcore_weight(self.graph, support, self.params.side, &self.params.lambda)
    }
}

/// (λ+1)^n · Σ_{compatible Γ, ‖Γ‖ < αn} Π w(γ, 1).
pub fn z_cluster_via_polymers(g: &BipartiteGraph, params: &HardcoreParams, budget: OracleBudget) -> Result<BigRational> {
    let model = HardcoreModel::new(g, params.clone());
    let xi = xi_exact(&model, &BigRational::one(), Some(params.alpha_n), budget)?;
    Ok(num_traits::pow(&params.lambda + BigRational::one(), g.n()) * xi)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    #[default]
    Auto,
    Brute,
    Polymer,
}

/// Radius of the zero-free disk used at high fugacity.
pub const HIGH_FUGACITY_RADIUS: f64 = 1.001;
/// Radius used at low fugacity and for colorings.
pub const LOW_FUGACITY_RADIUS: f64 = 2.0;

/// Knobs shared by both counting drivers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriverConfig {
    /// Brute force whenever n is at most this.
    pub n_threshold: usize,
    /// Brute force whenever ε ≤ 2C^{−n}; the structural error is C^{−n}.
    pub c_constant: f64,
    pub alpha_n: Option<usize>,
    pub m_override: Option<usize>,
    pub radius: Option<f64>,
    pub branch: Branch,
    pub force: bool,
    /// Compute each Ξ exactly instead of through the truncated series.
    pub exact: bool,
    pub budget: OracleBudget,
}

impl Default for DriverConfig {
    fn default() -> Self {
        DriverConfig {
            n_threshold: 24,
            c_constant: 1.01,
            alpha_n: None,
            m_override: None,
            radius: None,
            branch: Branch::Auto,
            force: false,
            exact: false,
            budget: OracleBudget::default(),
        }
    }
}

impl DriverConfig {
    pub(crate) fn check_eps(&self, eps: f64) -> Result<()> {
        if !(eps > 0.0) {
            return Err(Error::Domain(format!("eps must be positive, got {eps}")));
        }
        if !(self.c_constant > 1.0) {
            return Err(Error::Domain(format!("C must exceed 1, got {}", self.c_constant)));
        }
        Ok(())
    }

    /// C^{−n}.
    pub(crate) fn structural_error(&self, n: usize) -> f64 {
        (-(n as f64) * self.c_constant.ln()).exp()
    }

    pub(crate) fn use_brute(&self, n: usize, eps: f64) -> bool {
        match self.branch {
            Branch::Brute => true,
            Branch::Polymer => false,
            Branch::Auto => n <= self.n_threshold || eps <= 2.0 * self.structural_error(n),
        }
    }

    /// ε′ = ε − C^{−n}, the budget left for the series.
    pub(crate) fn series_eps(&self, n: usize, eps: f64) -> Result<f64> {
        let e = eps - self.structural_error(n);
        if e <= 0.0 && self.m_override.is_none() && !self.exact {
            return Err(Error::Precondition(format!(
                "eps={eps} leaves no room for the series after the structural error {}",
                self.structural_error(n)
            )));
        }
        Ok(e)
    }
}

/// Regime parameters and zero-free radius for fugacity `lambda`.
pub fn hardcore_regime(delta: usize, lambda: f64, force: bool) -> Result<(RegimeParams, f64)> {
    if lambda >= 1.0 {
        return Ok((regime_parameters(RegimeMode::IsHigh, delta, None, force)?, HIGH_FUGACITY_RADIUS));
    }
    let params = regime_parameters(RegimeMode::IsLow, delta, None, force)?;
    let lambda_l = params.lambda_l.unwrap_or(0.0);
    if !force && lambda <= lambda_l {
        return Err(Error::Regime(format!(
            "fugacity {lambda} is not above lambda_l={lambda_l:.6} for delta={delta}"
        )));
    }
    Ok((params, LOW_FUGACITY_RADIUS))
}

/// Estimate of ln Z(G, λ): brute force on small or very precise inputs,
/// otherwise n·ln(λ+1) + ln(Ξ̂_L + Ξ̂_R).
pub fn algorithm1(g: &BipartiteGraph, lambda: &BigRational, eps: f64, cfg: &DriverConfig) -> Result<Estimate> {
    let start = Instant::now();
    if lambda.is_negative() {
        return Err(Error::Domain(format!("fugacity must be nonnegative, got {lambda}")));
    }
    cfg.check_eps(eps)?;
    let lf = lambda.to_f64().unwrap_or(f64::INFINITY);
    let (regime, default_radius) = hardcore_regime(g.delta(), lf, cfg.force)?;
    let n = g.n();

    if cfg.use_brute(n, eps) {
        let z = count_is(g, lambda, cfg.budget)?;
        let mut est = Estimate::exact(z, Method::BruteForce);
        est.diagnostics.timings.insert("total".into(), start.elapsed().as_secs_f64());
        return Ok(est);
    }

    let alpha_n = cfg.alpha_n.unwrap_or_else(|| regime.alpha_n(n));
    let radius = cfg.radius.unwrap_or(default_radius);
    let eps_side = cfg.series_eps(n, eps)?;
    let side_model = |side| HardcoreParams::new(lambda.clone(), side, alpha_n).map(|p| HardcoreModel::new(g, p));
    let (ml, mr) = (side_model(Side::L)?, side_model(Side::R)?);
    let prefactor = num_traits::pow(lambda + BigRational::one(), n);

    let mut est = if cfg.exact {
        let one = BigRational::one();
        let (xl, xr) = crate::par::join(
            || xi_exact(&ml, &one, None, cfg.budget),
            || xi_exact(&mr, &one, None, cfg.budget),
        );
        let mut est = Estimate::exact(prefactor * (xl? + xr?), Method::PolymerPipeline);
        est.certified = false;
        est.relative_error_bound = cfg.structural_error(n);
        est
    } else {
        let (el, er) = crate::par::join(
            || estimate_log_xi(&ml, eps_side, radius, cfg.m_override, cfg.budget),
            || estimate_log_xi(&mr, eps_side, radius, cfg.m_override, cfg.budget),
        );
        let (el, er) = (el?, er?);
        let mut est = el.clone();
        est.log_value = ln_rational(&prefactor) + log_add(el.log_value, er.log_value);
        est.relative_error_bound = cfg.structural_error(n) + el.relative_error_bound + er.relative_error_bound;
        est.certified = el.certified && er.certified && !cfg.force;
        est.diagnostics.polymer_count = Some(el.diagnostics.polymer_count.unwrap_or(0) + er.diagnostics.polymer_count.unwrap_or(0));
        est.diagnostics.timings.clear();
        est
    };
    est.diagnostics.notes.push(format!("alpha_n={alpha_n}"));
    if cfg.force {
        est.diagnostics.notes.push("regime preconditions forced".into());
    }
    est.diagnostics.timings.insert("total".into(), start.elapsed().as_secs_f64());
    Ok(est)
}

/// Exact (λ+1)^n(Ξ_L + Ξ_R) with uncapped Ξ, the quantity the polymer
/// branch approximates.
pub fn polymer_branch_value(g: &BipartiteGraph, lambda: &BigRational, alpha_n: usize, budget: OracleBudget) -> Result<BigRational> {
    let mut total = BigRational::zero();
    for side in [Side::L, Side::R] {
        let model = HardcoreModel::new(g, HardcoreParams::new(lambda.clone(), side, alpha_n)?);
        total += xi_exact(&model, &BigRational::one(), None, budget)?;
    }
    Ok(num_traits::pow(lambda + BigRational::one(), g.n()) * total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::oracle::count_is_cluster;
    use crate::polymer::{enumerate_polymers, kp_check, high_fugacity_kp_coefficient};
    use crate::random::{sample_graph, SampleConfig};

    fn r(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    const B: OracleBudget = OracleBudget::DEFAULT;
    const L0: Vertex = Vertex::left(0);
    const L1: Vertex = Vertex::left(1);

    fn set(vs: &[Vertex]) -> VertexSet {
        vs.iter().copied().collect()
    }

    #[test]
    fn weight_examples() {
        let g = k22();
        assert_eq!(hardcore_weight(&g, &set(&[L0]), Side::L, &r(1, 1)).unwrap(), r(1, 4));
        assert_eq!(hardcore_weight(&g, &set(&[L0]), Side::L, &r(2, 1)).unwrap(), r(2, 9));
        assert_eq!(hardcore_weight(&g, &set(&[L0, L1]), Side::L, &r(1, 1)).unwrap(), r(1, 4));
        assert!(matches!(
            hardcore_weight(&g, &set(&[Vertex::right(0)]), Side::L, &r(1, 1)),
            Err(Error::Model(_))
        ));
    }

    fn model(g: &BipartiteGraph, lambda: BigRational, alpha_n: usize) -> HardcoreModel<'_> {
        HardcoreModel::new(g, HardcoreParams::new(lambda, Side::L, alpha_n).unwrap())
    }

    #[test]
    fn polymer_sets() {
        let g = k22();
        let supports = |k| -> Vec<VertexSet> {
            enumerate_polymers(&model(&g, r(1, 1), k), usize::MAX).unwrap().into_iter().map(|p| p.support).collect()
        };
        assert_eq!(supports(2), vec![set(&[L0]), set(&[L1])]);
        assert_eq!(supports(3), vec![set(&[L0]), set(&[L1]), set(&[L0, L1])]);
        assert!(supports(0).is_empty());
        assert!(enumerate_polymers(&model(&g, r(1, 1), 9), 0).unwrap().is_empty());
    }

    #[test]
    fn xi_examples() {
        let g = k22();
        let m = model(&g, r(1, 1), usize::MAX);
        assert_eq!(xi_exact(&m, &r(1, 1), None, B).unwrap(), r(7, 4));
        assert_eq!(xi_exact(&m, &r(1, 1), Some(2), B).unwrap(), r(3, 2));
        assert_eq!(xi_exact(&m, &r(0, 1), None, B).unwrap(), r(1, 1));
    }

    #[test]
    fn cluster_examples() {
        let g = k22();
        let p = |l, k| HardcoreParams::new(l, Side::L, k).unwrap();
        assert_eq!(z_cluster_via_polymers(&g, &p(r(1, 1), 2), B).unwrap(), r(6, 1));
        assert_eq!(z_cluster_via_polymers(&g, &p(r(1, 1), 3), B).unwrap(), r(7, 1));
        assert_eq!(z_cluster_via_polymers(&g, &p(r(0, 1), 3), B).unwrap(), r(1, 1));
        assert!(HardcoreParams::new(r(-1, 1), Side::L, 1).is_err());
    }

    #[test]
    fn cluster_matches_oracle_on_random_graphs() {
        for seed in 0..15 {
            let g = sample_graph(&SampleConfig::new(4, 2, seed).unwrap());
            for side in [Side::L, Side::R] {
                for k in 0..=5 {
                    let p = HardcoreParams::new(r(3, 2), side, k).unwrap();
                    assert_eq!(
                        z_cluster_via_polymers(&g, &p, B).unwrap(),
                        count_is_cluster(&g, side, k, &r(3, 2), B).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn kp_examples() {
        let t = high_fugacity_kp_coefficient();
        let g = k22();
        let rep = kp_check(&model(&g, r(1, 1), usize::MAX), t, 1.0).unwrap();
        assert!((rep.max_ratio - 3.49).abs() <= 0.01, "{}", rep.max_ratio);
        assert_eq!(rep.argmax.unwrap().support, set(&[L0]));
        let g = k11();
        let rep = kp_check(&model(&g, r(1, 10), usize::MAX), t, 1.0).unwrap();
        assert!((rep.max_ratio - 0.371).abs() < 0.001);
        assert!(rep.passes());
    }

    #[test]
    fn algorithm1_examples() {
        let g = k22();
        let cfg = DriverConfig {
            force: true,
            ..Default::default()
        };
        let est = algorithm1(&g, &r(1, 1), 0.1, &cfg).unwrap();
        assert_eq!(est.method, Method::BruteForce);
        assert_eq!(est.exact, Some(r(7, 1)));
        assert_eq!(est.relative_error_bound, 0.0);

        let poly = DriverConfig {
            branch: Branch::Polymer,
            alpha_n: Some(3),
            exact: true,
            ..cfg.clone()
        };
        let est = algorithm1(&g, &r(1, 1), 0.1, &poly).unwrap();
        assert_eq!(est.method, Method::PolymerPipeline);
        assert_eq!(est.exact, Some(r(14, 1)));

        let zero = algorithm1(&g, &r(0, 1), 0.1, &poly).unwrap();
        assert_eq!(zero.exact, Some(r(2, 1)));
    }

    #[test]
    fn algorithm1_series_path() {
        let g = k22();
        let cfg = DriverConfig {
            force: true,
            branch: Branch::Polymer,
            alpha_n: Some(3),
            m_override: Some(40),
            radius: Some(1.5),
            ..Default::default()
        };
        let est = algorithm1(&g, &r(1, 1), 0.1, &cfg).unwrap();
        assert!(!est.certified);
        assert!((est.log_value - 14f64.ln()).abs() < 1e-6, "{}", est.log_value);
    }

    #[test]
    fn regime_is_enforced() {
        let g = k22();
        let cfg = DriverConfig::default();
        assert!(matches!(algorithm1(&g, &r(1, 1), 0.1, &cfg), Err(Error::Regime(_))));
        assert!(matches!(algorithm1(&g, &r(-1, 1), 0.1, &cfg), Err(Error::Domain(_))));
        assert!(algorithm1(&g, &r(1, 1), 0.0, &DriverConfig { force: true, ..cfg }).is_err());
    }
}
