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

//! Proper q-colorings. The ground cluster for a color set X colors L from X
//! and R from [q]\X; polymers are G²-components of the deviating vertices,
//! labeled with their colors.

use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansion::{estimate_log_xi, ln_rational, log_add, Estimate, Method};
use crate::graph::{BipartiteGraph, Side, Vertex, VertexSet};
use crate::hardcore::{Branch, DriverConfig, LOW_FUGACITY_RADIUS};
use crate::oracle::{count_colorings, OracleBudget};
use crate::polymer::{xi_exact, Label, Polymer, PolymerModel};
use crate::props::{binomial, half_palettes, regime_parameters, FLOAT_SLACK, RegimeMode};

/// Largest palette the bitmask representation supports.
pub const MAX_COLORS: usize = 63;

/// A nonempty proper subset X of [q], colors 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ColorClass {
    q: usize,
    mask: u64,
}

impl ColorClass {
    pub fn new(q: usize, colors: &[u8]) -> Result<Self> {
        if q == 0 || q > MAX_COLORS {
            return Err(Error::Domain(format!("palette size must be in 1..={MAX_COLORS}, got {q}")));
        }
        let mut mask = 0u64;
        for &c in colors {
            if c == 0 || c as usize > q {
                return Err(Error::Domain(format!("color {c} is not in [{q}]")));
            }
            mask |= 1 << (c - 1);
        }
        let full = if q == 64 { u64::MAX } else { (1u64 << q) - 1 };
        if mask == 0 || mask == full {
            return Err(Error::Domain("color class must be a nonempty proper subset of [q]".into()));
        }
        Ok(ColorClass { q, mask })
    }

    /// X = [k].
    pub fn prefix(q: usize, k: usize) -> Result<Self> {
        let colors: Vec<u8> = (1..=k as u8).collect();
        Self::new(q, &colors)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, c: u8) -> bool {
        c >= 1 && (c as usize) <= self.q && self.mask >> (c - 1) & 1 == 1
    }

    pub fn colors(&self) -> Vec<u8> {
        (1..=self.q as u8).filter(|&c| self.contains(c)).collect()
    }

    pub fn complement(&self) -> Vec<u8> {
        (1..=self.q as u8).filter(|&c| !self.contains(c)).collect()
    }

    /// Colors a vertex on `side` takes when it does not deviate.
    pub fn ground_colors(&self, side: Side) -> Vec<u8> {
        match side {
            Side::L => self.colors(),
            Side::R => self.complement(),
        }
    }

    /// Every proper subset of [q] with the given size, in lexicographic order.
    pub fn all_of_size(q: usize, k: usize) -> Result<Vec<Self>> {
        let mut out = Vec::new();
        for mask in 1u64..(1u64 << q) {
            if mask.count_ones() as usize == k {
                let colors: Vec<u8> = (0..q as u8).filter(|&i| mask >> i & 1 == 1).map(|i| i + 1).collect();
                out.push(Self::new(q, &colors)?);
            }
        }
        out.sort_by_key(|x| x.colors());
        Ok(out)
    }
}

impl std::fmt::Display for ColorClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let cs: Vec<String> = self.colors().iter().map(u8::to_string).collect();
        write!(f, "{{{}}}", cs.join(","))
    }
}

/// A full assignment of colors (1-based) to both sides.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Coloring {
    pub left: Vec<u8>,
    pub right: Vec<u8>,
}

impl Coloring {
    pub fn new(left: Vec<u8>, right: Vec<u8>) -> Self {
        Coloring { left, right }
    }

    pub fn get(&self, v: Vertex) -> u8 {
        match v.side {
            Side::L => self.left[v.index as usize],
            Side::R => self.right[v.index as usize],
        }
    }

    pub fn is_proper(&self, g: &BipartiteGraph) -> bool {
        (0..g.n()).all(|i| g.neighbor_ids(i).iter().all(|&r| self.left[i] != self.right[r as usize - g.n()]))
    }
}

/// d_X(σ) = |σ_L^{-1}([q]\X)| + |σ_R^{-1}(X)|.
pub fn deviation_distance(g: &BipartiteGraph, sigma: &Coloring, x: &ColorClass) -> Result<usize> {
    if sigma.left.len() != g.n() || sigma.right.len() != g.n() {
        return Err(Error::Precondition("coloring must assign every vertex".into()));
    }
    Ok(sigma.left.iter().filter(|&&c| !x.contains(c)).count() + sigma.right.iter().filter(|&&c| x.contains(c)).count())
}

/// Colors used at least s·n times by a one-side coloring.
pub fn maj(omega: &[u8], s: f64, n: usize, q: usize) -> Vec<u8> {
    let threshold = s * n as f64 - FLOAT_SLACK;
    (1..=q as u8)
        .filter(|&c| omega.iter().filter(|&&x| x == c).count() as f64 >= threshold)
        .collect()
}

fn color_mask(colors: impl IntoIterator<Item = u8>) -> u64 {
    colors.into_iter().fold(0, |m, c| m | 1 << (c - 1))
}

/// Number of colors from `allowed` left for each neighborhood vertex, given
/// the labels on the support; returned in the order of `neighborhood`.
fn extension_counts(g: &BipartiteGraph, support: &VertexSet, labels: &[Label], neighborhood: &VertexSet, x: &ColorClass) -> Vec<u32> {
    let x_mask = color_mask(x.colors());
    let not_x_mask = color_mask(x.complement());
    neighborhood
        .iter()
        .map(|v| {
            let used = g
                .neighbors(v)
                .filter_map(|u| support.as_slice().binary_search(&u).ok())
                .fold(0u64, |m, i| m | 1 << (labels[i] - 1));
            let ground = if v.side == Side::L { x_mask } else { not_x_mask };
            (ground & !used).count_ones()
        })
        .collect()
}

/// w(γ, 1): ground extensions of γ over V_γ = γ̄ ⊔ N(γ̄), normalized by the
/// ground count |X|^{|V_γ∩L|}(q−|X|)^{|V_γ∩R|}.
pub fn coloring_weight(g: &BipartiteGraph, support: &VertexSet, labels: &[Label], x: &ColorClass) -> Result<BigRational> {
    if support.is_empty() || labels.len() != support.len() {
        return Err(Error::Model("labels must match a nonempty support".into()));
    }
    for (v, &c) in support.iter().zip(labels) {
        let ok = match v.side {
            Side::L => c >= 1 && c as usize <= x.q() && !x.contains(c),
            Side::R => x.contains(c),
        };
        if !ok {
            return Err(Error::Model(format!("label {c} on {v} is not a deviating color for X={x}")));
        }
    }
    let nb = g.neighborhood(support)?;
    let mut numer = BigUint::one();
    for k in extension_counts(g, support, labels, &nb, x) {
        numer *= k;
    }
    let in_l = support.count_on(Side::L) + nb.count_on(Side::L);
    let in_r = support.count_on(Side::R) + nb.count_on(Side::R);
    let denom = BigUint::from(x.len()).pow(in_l as u32) * BigUint::from(x.q() - x.len()).pow(in_r as u32);
    Ok(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
}

pub struct ColoringModel<'g> {
    graph: &'g BipartiteGraph,
    x: ColorClass,
    alpha_n: usize,
}

impl<'g> ColoringModel<'g> {
    pub fn new(graph: &'g BipartiteGraph, x: ColorClass, alpha_n: usize) -> Self {
        ColoringModel { graph, x, alpha_n }
    }

    pub fn class(&self) -> &ColorClass {
        &self.x
    }
}

impl PolymerModel for ColoringModel<'_> {
    fn graph(&self) -> &BipartiteGraph {
        self.graph
    }

    fn in_universe(&self, _v: Vertex) -> bool {
        true
    }

    fn label_domain(&self, v: Vertex) -> Vec<Label> {
        match v.side {
            Side::L => self.x.complement(),
            Side::R => self.x.colors(),
        }
    }

    fn max_polymer_size(&self) -> usize {
        self.alpha_n.saturating_sub(1)
    }

    fn structural_degree(&self) -> usize {
        2 * self.graph.n()
    }

    fn weight_base(&self, support: &VertexSet, labels: &[Label]) -> Result<BigRational> {
        coloring_weight(self.graph, support, labels, &self.x)
    }

    /// Labelings are assigned vertex by vertex, abandoning a branch as soon
    /// as some neighborhood vertex has no ground color left.
    fn polymers_on(&self, support: &VertexSet) -> Result<Vec<Polymer>> {
        let g = self.graph;
        let nb = g.neighborhood(support)?;
        let domains: Vec<Vec<Label>> = support.iter().map(|v| self.label_domain(v)).collect();
        let ground: Vec<u64> = nb.iter().map(|v| color_mask(self.x.ground_colors(v.side))).collect();
        // for each support position, the neighborhood positions it touches
        let touches: Vec<Vec<usize>> = support
            .iter()
            .map(|v| {
                let mut t: Vec<usize> = g.neighbors(v).filter_map(|u| nb.as_slice().binary_search(&u).ok()).collect();
                t.dedup();
                t
            })
            .collect();

        struct Search<'a> {
            domains: &'a [Vec<Label>],
            touches: &'a [Vec<usize>],
            labels: Vec<Label>,
            remaining: Vec<u64>,
            found: Vec<Vec<Label>>,
        }

        impl Search<'_> {
            fn go(&mut self, pos: usize) {
                if pos == self.domains.len() {
                    self.found.push(self.labels.clone());
                    return;
                }
                for &c in &self.domains[pos] {
                    let bit = 1u64 << (c - 1);
                    let saved: Vec<u64> = self.touches[pos].iter().map(|&t| self.remaining[t]).collect();
                    let mut dead = false;
                    for &t in &self.touches[pos] {
                        self.remaining[t] &= !bit;
                        dead |= self.remaining[t] == 0;
                    }
                    if !dead {
                        self.labels[pos] = c;
                        self.go(pos + 1);
                    }
                    for (&t, s) in self.touches[pos].iter().zip(saved) {
                        self.remaining[t] = s;
                    }
                }
            }
        }

        let mut search = Search {
            domains: &domains,
            touches: &touches,
            labels: vec![0; support.len()],
            remaining: ground,
            found: Vec::new(),
        };
        search.go(0);
        search
            .found
            .into_iter()
            .map(|labels| {
                let weight = coloring_weight(g, support, &labels, &self.x)?;
                Ok(Polymer {
                    support: support.clone(),
                    labels,
                    neighborhood: nb.clone(),
                    weight,
                })
            })
            .collect()
    }
}

/// |X|^n (q−|X|)^n · Σ_{compatible Γ, ‖Γ‖ < αn} Π w(γ, 1).
pub fn colorings_cluster_via_polymers(g: &BipartiteGraph, x: &ColorClass, alpha_n: usize, budget: OracleBudget) -> Result<BigRational> {
    if alpha_n == 0 {
        return Err(Error::Precondition("alpha_n must be at least 1".into()));
    }
    let model = ColoringModel::new(g, *x, alpha_n);
    let xi = xi_exact(&model, &BigRational::one(), Some(alpha_n), budget)?;
    Ok(ground_prefactor(g.n(), x) * xi)
}

fn ground_prefactor(n: usize, x: &ColorClass) -> BigRational {
    let base = BigInt::from(x.len() * (x.q() - x.len()));
    BigRational::from_integer(base.pow(n as u32))
}

/// The color classes the coloring driver expands around: [q̲], plus [q̄] when q is odd.
pub fn algorithm2_classes(q: usize) -> Result<Vec<ColorClass>> {
    let (lo, hi) = half_palettes(q);
    let mut out = vec![ColorClass::prefix(q, lo)?];
    if hi != lo {
        out.push(ColorClass::prefix(q, hi)?);
    }
    Ok(out)
}

/// Estimate of ln |C(G)| for q colors.
pub fn algorithm2(g: &BipartiteGraph, q: usize, eps: f64, cfg: &DriverConfig) -> Result<Estimate> {
    let start = Instant::now();
    cfg.check_eps(eps)?;
    let regime = regime_parameters(RegimeMode::Coloring, g.delta(), Some(q), cfg.force)?;
    let n = g.n();
    if cfg.use_brute(n, eps) {
        let count = count_colorings(g, q, cfg.budget)?;
        let mut est = Estimate::exact(BigRational::from_integer(count.into()), Method::BruteForce);
        est.diagnostics.timings.insert("total".into(), start.elapsed().as_secs_f64());
        return Ok(est);
    }
    let alpha_n = cfg.alpha_n.unwrap_or_else(|| regime.alpha_n(n));
    let radius = cfg.radius.unwrap_or(LOW_FUGACITY_RADIUS);
    let eps_side = cfg.series_eps(n, eps)?;
    let classes = algorithm2_classes(q)?;
    let models: Vec<ColoringModel<'_>> = classes.iter().map(|x| ColoringModel::new(g, *x, alpha_n)).collect();
    let (lo, _) = half_palettes(q);
    // binom(q, q̲) · |X|^n (q−|X|)^n, the same for both classes
    let prefactor = BigRational::from_integer(BigInt::from(binomial(q as u64, lo as u64))) * ground_prefactor(n, &classes[0]);

    let mut est = if cfg.exact {
        let xis = crate::par::map_slice(&models, |m| xi_exact(m, &BigRational::one(), None, cfg.budget));
        let mut total = BigRational::zero();
        for xi in xis {
            total += xi?;
        }
        let mut est = Estimate::exact(prefactor * total, Method::PolymerPipeline);
        est.certified = false;
        est.relative_error_bound = cfg.structural_error(n);
        est
    } else {
        let parts = crate::par::map_slice(&models, |m| estimate_log_xi(m, eps_side, radius, cfg.m_override, cfg.budget));
        let parts: Vec<Estimate> = parts.into_iter().collect::<Result<_>>()?;
        let mut est = parts[0].clone();
        est.log_value = ln_rational(&prefactor) + parts.iter().map(|e| e.log_value).fold(f64::NEG_INFINITY, log_add);
        est.relative_error_bound = cfg.structural_error(n) + parts.iter().map(|e| e.relative_error_bound).sum::<f64>();
        est.certified = parts.iter().all(|e| e.certified) && !cfg.force;
        est.diagnostics.polymer_count = Some(parts.iter().map(|e| e.diagnostics.polymer_count.unwrap_or(0)).sum());
        est.diagnostics.timings.clear();
        est
    };
    est.diagnostics.notes.push(format!("alpha_n={alpha_n}"));
    est.diagnostics.notes.push(format!("expansions={}", classes.len()));
    if cfg.force {
        est.diagnostics.notes.push("regime preconditions forced".into());
    }
    if cfg.branch == Branch::Auto {
        est.diagnostics.notes.push("branch chosen automatically".into());
    }
    est.diagnostics.timings.insert("total".into(), start.elapsed().as_secs_f64());
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::oracle::count_colorings_cluster;
    use crate::polymer::enumerate_polymers;
    use crate::random::{sample_graph, SampleConfig};

    fn r(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    const B: OracleBudget = OracleBudget::DEFAULT;
    const L0: Vertex = Vertex::left(0);
    const L1: Vertex = Vertex::left(1);
    const R0: Vertex = Vertex::right(0);

    fn one(v: Vertex) -> VertexSet {
        std::iter::once(v).collect()
    }

    #[test]
    fn deviation_examples() {
        let g = k22();
        let x = ColorClass::new(3, &[1]).unwrap();
        let d = |l: Vec<u8>, r: Vec<u8>| deviation_distance(&g, &Coloring::new(l, r), &x).unwrap();
        assert_eq!(d(vec![1, 1], vec![2, 2]), 0);
        assert_eq!(d(vec![2, 1], vec![3, 3]), 1);
        assert_eq!(d(vec![1, 1], vec![1, 1]), 2);
        assert!(deviation_distance(&g, &Coloring::new(vec![1], vec![2, 2]), &x).is_err());
    }

    #[test]
    fn maj_examples() {
        assert_eq!(maj(&[1, 1], 0.5, 2, 3), vec![1]);
        assert_eq!(maj(&[1, 2], 0.4, 2, 3), vec![1, 2]);
        assert_eq!(maj(&[1, 2], 0.0, 2, 4), vec![1, 2, 3, 4]);
    }

    #[test]
    fn weight_examples() {
        let g = k22();
        let x1 = ColorClass::new(3, &[1]).unwrap();
        assert_eq!(coloring_weight(&g, &one(L0), &[2], &x1).unwrap(), r(1, 4));
        assert_eq!(coloring_weight(&g, &one(R0), &[1], &x1).unwrap(), r(0, 1));
        let x12 = ColorClass::new(3, &[1, 2]).unwrap();
        assert_eq!(coloring_weight(&g, &one(R0), &[1], &x12).unwrap(), r(1, 4));
        assert!(matches!(coloring_weight(&g, &one(L0), &[1], &x1), Err(Error::Model(_))));
    }

    #[test]
    fn class_validation() {
        assert!(ColorClass::new(3, &[1, 2, 3]).is_err());
        assert!(ColorClass::new(3, &[]).is_err());
        assert!(ColorClass::new(3, &[4]).is_err());
        let x = ColorClass::new(2, &[1]).unwrap();
        let g = k22();
        let m = ColoringModel::new(&g, x, 5);
        assert_eq!(m.label_domain(L0), vec![2]);
        assert_eq!(m.label_domain(R0), vec![1]);
        assert_eq!(ColorClass::all_of_size(4, 2).unwrap().len(), 6);
    }

    #[test]
    fn polymer_examples() {
        let g = k22();
        let x = ColorClass::new(3, &[1]).unwrap();
        let m = ColoringModel::new(&g, x, 2);
        let ps = enumerate_polymers(&m, 1).unwrap();
        let got: Vec<(VertexSet, Vec<u8>)> = ps.iter().map(|p| (p.support.clone(), p.labels.clone())).collect();
        assert_eq!(
            got,
            vec![(one(L0), vec![2]), (one(L0), vec![3]), (one(L1), vec![2]), (one(L1), vec![3])]
        );
        assert!(ps.iter().all(|p| p.weight == r(1, 4)));
    }

    #[test]
    fn pruned_labelings_match_cross_product() {
        struct Plain<'a>(ColoringModel<'a>);
        impl PolymerModel for Plain<'_> {
            fn graph(&self) -> &BipartiteGraph {
                self.0.graph()
            }
            fn in_universe(&self, v: Vertex) -> bool {
                self.0.in_universe(v)
            }
            fn label_domain(&self, v: Vertex) -> Vec<Label> {
                self.0.label_domain(v)
            }
            fn max_polymer_size(&self) -> usize {
                self.0.max_polymer_size()
            }
            fn structural_degree(&self) -> usize {
                self.0.structural_degree()
            }
            fn weight_base(&self, s: &VertexSet, l: &[Label]) -> Result<BigRational> {
                self.0.weight_base(s, l)
            }
        }
        for seed in 0..10 {
            let g = sample_graph(&SampleConfig::new(3, 2, seed).unwrap());
            for x in ColorClass::all_of_size(4, 2).unwrap() {
                let pruned = enumerate_polymers(&ColoringModel::new(&g, x, 7), 6).unwrap();
                let plain = enumerate_polymers(&Plain(ColoringModel::new(&g, x, 7)), 6).unwrap();
                assert_eq!(pruned, plain);
            }
        }
    }

    #[test]
    fn cluster_examples() {
        let g = k22();
        let x = ColorClass::new(3, &[1]).unwrap();
        assert_eq!(colorings_cluster_via_polymers(&g, &x, 1, B).unwrap(), r(4, 1));
        assert_eq!(colorings_cluster_via_polymers(&g, &x, 2, B).unwrap(), r(8, 1));
        assert!(colorings_cluster_via_polymers(&g, &x, 0, B).is_err());
    }

    #[test]
    fn cluster_matches_oracle_on_random_graphs() {
        for seed in 0..6 {
            let g = sample_graph(&SampleConfig::new(3, 2, seed).unwrap());
            for x in ColorClass::all_of_size(3, 1).unwrap() {
                for k in 1..=7 {
                    let oracle = count_colorings_cluster(&g, &x, k, 3, B).unwrap();
                    assert_eq!(colorings_cluster_via_polymers(&g, &x, k, B).unwrap(), BigRational::from_integer(oracle.into()));
                }
            }
        }
    }

    #[test]
    fn algorithm2_examples() {
        let g = k22();
        let cfg = DriverConfig {
            force: true,
            ..Default::default()
        };
        let est = algorithm2(&g, 3, 0.1, &cfg).unwrap();
        assert_eq!(est.exact, Some(r(18, 1)));
        assert_eq!(algorithm2_classes(3).unwrap().len(), 2);
        assert_eq!(algorithm2_classes(4).unwrap().len(), 1);

        let poly = DriverConfig {
            branch: Branch::Polymer,
            alpha_n: Some(2),
            exact: true,
            ..cfg
        };
        let est = algorithm2(&g, 3, 0.1, &poly).unwrap();
        let c1 = count_colorings_cluster(&g, &ColorClass::new(3, &[1]).unwrap(), 2, 3, B).unwrap();
        let c2 = count_colorings_cluster(&g, &ColorClass::new(3, &[1, 2]).unwrap(), 2, 3, B).unwrap();
        assert_eq!(est.exact, Some(BigRational::from_integer((BigUint::from(3u8) * (c1 + c2)).into())));
        assert!(matches!(algorithm2(&g, 3, 0.1, &DriverConfig::default()), Err(Error::Regime(_))));
    }
}
