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

//! Generic polymer machinery on the square graph G².
//!
//! A polymer is a G²-connected support with one label per support vertex and
//! a nonzero base weight `a_γ`, so that `w(γ, z) = a_γ z^{|γ|}`. Two polymers
//! are compatible when their supports are at G²-distance greater than one.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use fixedbitset::FixedBitSet;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Vertex, VertexSet};
use crate::oracle::OracleBudget;
use crate::par;

pub type Label = u8;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Polymer {
    pub support: VertexSet,
    /// Label of each support vertex, aligned with `support`'s order.
    pub labels: Vec<Label>,
    pub neighborhood: VertexSet,
    pub weight: BigRational,
}

impl Polymer {
    pub fn size(&self) -> usize {
        self.support.len()
    }

    pub fn label_of(&self, v: Vertex) -> Option<Label> {
        self.support
            .as_slice()
            .binary_search(&v)
            .ok()
            .map(|i| self.labels[i])
    }

    fn sort_key(&self) -> (usize, &VertexSet, &[Label]) {
        (self.size(), &self.support, &self.labels)
    }
}

/// What the enumeration, the exact Ξ oracle and the cluster expansion need
/// from a concrete polymer model.
pub trait PolymerModel: Sync {
    fn graph(&self) -> &BipartiteGraph;

    /// Whether `v` may appear in a polymer support.
    fn in_universe(&self, v: Vertex) -> bool;

    fn label_domain(&self, v: Vertex) -> Vec<Label>;

    /// Largest admissible polymer size (inclusive).
    fn max_polymer_size(&self) -> usize;

    /// Upper bound on the degree of Ξ(z) in z.
    fn structural_degree(&self) -> usize;

    /// `a_γ` for a labeled support; may be zero for labelings that are not
    /// polymers.
    fn weight_base(&self, support: &VertexSet, labels: &[Label]) -> Result<BigRational>;

    /// All polymers on one support. The default tries every labeling and
    /// keeps the nonzero weights.
    fn polymers_on(&self, support: &VertexSet) -> Result<Vec<Polymer>> {
        let domains: Vec<Vec<Label>> = support.iter().map(|v| self.label_domain(v)).collect();
        if domains.iter().any(Vec::is_empty) {
            return Ok(Vec::new());
        }
        let neighborhood = self.graph().neighborhood(support)?;
        let mut out = Vec::new();
        let mut idx = vec![0usize; domains.len()];
        loop {
            let labels: Vec<Label> = idx.iter().zip(&domains).map(|(&i, d)| d[i]).collect();
            let weight = self.weight_base(support, &labels)?;
            if !weight.is_zero() {
                out.push(Polymer {
                    support: support.clone(),
                    labels,
                    neighborhood: neighborhood.clone(),
                    weight,
                });
            }
            // odometer step
            let mut pos = idx.len();
            loop {
                if pos == 0 {
                    return Ok(out);
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < domains[pos].len() {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }
}

/// Compatibility: disjoint supports with no G² edge between them.
pub fn compatible(g: &BipartiteGraph, a: &Polymer, b: &Polymer) -> bool {
    supports_compatible(g, &a.support, &b.support)
}

pub fn supports_compatible(g: &BipartiteGraph, a: &VertexSet, b: &VertexSet) -> bool {
    for u in a.iter() {
        if b.contains(u) {
            return false;
        }
        for &w in g.square_neighbor_ids(g.id(u)) {
            if b.contains(g.vertex(w as usize)) {
                return false;
            }
        }
    }
    true
}

/// Visits every G²-connected set of allowed vertices that contains `root`
/// and has at most `max_size` members, each exactly once. With `root_is_min`
/// only sets whose smallest flat id is `root` are visited.
pub(crate) fn for_each_support<F: FnMut(&[usize])>(
    g: &BipartiteGraph,
    allowed: &FixedBitSet,
    root: usize,
    max_size: usize,
    root_is_min: bool,
    mut visit: F,
) {
    if max_size == 0 || !allowed.contains(root) {
        return;
    }
    let admissible = |u: usize| allowed.contains(u) && (!root_is_min || u > root);
    // cover[u] > 0  <=>  u is in the current set or G²-adjacent to it
    let mut cover = vec![0u32; g.vertex_count()];
    let touch = |cover: &mut Vec<u32>, x: usize, delta: i32| {
        cover[x] = (cover[x] as i32 + delta) as u32;
        for &y in g.square_neighbor_ids(x) {
            cover[y as usize] = (cover[y as usize] as i32 + delta) as u32;
        }
    };
    touch(&mut cover, root, 1);
    let ext: Vec<usize> = g
        .square_neighbor_ids(root)
        .iter()
        .map(|&u| u as usize)
        .filter(|&u| admissible(u))
        .collect();
    let mut current = vec![root];

    #[allow(clippy::too_many_arguments)]
    fn extend<F: FnMut(&[usize])>(
        g: &BipartiteGraph,
        current: &mut Vec<usize>,
        mut ext: Vec<usize>,
        cover: &mut Vec<u32>,
        max_size: usize,
        admissible: &dyn Fn(usize) -> bool,
        touch: &dyn Fn(&mut Vec<u32>, usize, i32),
        visit: &mut F,
    ) {
        visit(current);
        if current.len() == max_size {
            return;
        }
        while let Some(w) = ext.pop() {
            let mut next_ext = ext.clone();
            for &u in g.square_neighbor_ids(w) {
                let u = u as usize;
                if cover[u] == 0 && admissible(u) {
                    next_ext.push(u);
                }
            }
            current.push(w);
            touch(cover, w, 1);
            extend(g, current, next_ext, cover, max_size, admissible, touch, visit);
            touch(cover, w, -1);
            current.pop();
        }
    }

    extend(g, &mut current, ext, &mut cover, max_size, &admissible, &touch, &mut visit);
}

fn universe_bits<M: PolymerModel + ?Sized>(model: &M) -> FixedBitSet {
    let g = model.graph();
    let mut bits = FixedBitSet::with_capacity(g.vertex_count());
    for v in g.vertices() {
        if model.in_universe(v) {
            bits.insert(g.id(v));
        }
    }
    bits
}

/// Every G²-connected subset of `universe` containing `root` with at most
/// `max_size` vertices, sorted by size and then lexicographically.
pub fn enumerate_supports(g: &BipartiteGraph, universe: &VertexSet, root: Vertex, max_size: usize) -> Result<Vec<VertexSet>> {
    if !universe.contains(root) {
        return Err(Error::Precondition(format!("root {root} is not in the universe")));
    }
    let mut allowed = FixedBitSet::with_capacity(g.vertex_count());
    for v in universe.iter() {
        allowed.insert(g.id(v));
    }
    let mut out = Vec::new();
    for_each_support(g, &allowed, g.id(root), max_size, false, |ids| {
        out.push(ids.iter().map(|&i| g.vertex(i)).collect::<VertexSet>());
    });
    out.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    Ok(out)
}

/// All polymers of size at most `max_size` (further capped by the model's
/// own bound), in canonical order: by size, then support, then labels.
pub fn enumerate_polymers<M: PolymerModel + ?Sized>(model: &M, max_size: usize) -> Result<Vec<Polymer>> {
    let g = model.graph();
    let limit = max_size.min(model.max_polymer_size());
    let allowed = universe_bits(model);
    let roots: Vec<usize> = allowed.ones().collect();
    let per_root = par::map_slice(&roots, |&root| -> Result<Vec<Polymer>> {
        let mut supports = Vec::new();
        for_each_support(g, &allowed, root, limit, true, |ids| {
            supports.push(ids.iter().map(|&i| g.vertex(i)).collect::<VertexSet>());
        });
        let mut polymers = Vec::new();
        for s in supports {
            polymers.extend(model.polymers_on(&s)?);
        }
        Ok(polymers)
    });
    let mut all = Vec::new();
    for chunk in per_root {
        all.extend(chunk?);
    }
    all.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    Ok(all)
}

fn rational_pow(z: &BigRational, k: usize) -> BigRational {
    num_traits::pow(z.clone(), k)
}

/// Σ over compatible sets Γ with ‖Γ‖ < `cap` of Π w(γ, z); `None` means no
/// cap. Direct recursion with pairwise compatibility tests, kept separate
/// from the coefficient extractor it is used to check.
pub fn xi_exact<M: PolymerModel + ?Sized>(model: &M, z: &BigRational, cap: Option<usize>, budget: OracleBudget) -> Result<BigRational> {
    if cap == Some(0) {
        return Ok(BigRational::zero());
    }
    if z.is_zero() {
        return Ok(BigRational::one());
    }
    let max_total = cap.map(|c| c - 1).unwrap_or(usize::MAX);
    let polymers = enumerate_polymers(model, max_total)?;
    xi_exact_over(model.graph(), &polymers, z, max_total, budget)
}

/// As [`xi_exact`], over an explicit polymer list; `max_total` bounds ‖Γ‖.
pub fn xi_exact_over(g: &BipartiteGraph, polymers: &[Polymer], z: &BigRational, max_total: usize, budget: OracleBudget) -> Result<BigRational> {
    let weights: Vec<BigRational> = polymers.iter().map(|p| &p.weight * rational_pow(z, p.size())).collect();
    let work = AtomicU64::new(0);
    let exceeded = std::sync::atomic::AtomicBool::new(false);

    struct Ctx<'a> {
        g: &'a BipartiteGraph,
        polymers: &'a [Polymer],
        weights: &'a [BigRational],
        max_total: usize,
        work: &'a AtomicU64,
        exceeded: &'a std::sync::atomic::AtomicBool,
        budget: u128,
    }

    fn rec(ctx: &Ctx<'_>, chosen: &mut Vec<usize>, start: usize, total: usize, prod: &BigRational) -> BigRational {
        let mut acc = prod.clone();
        for j in start..ctx.polymers.len() {
            if ctx.exceeded.load(Ordering::Relaxed) {
                break;
            }
            let p = &ctx.polymers[j];
            if total + p.size() > ctx.max_total {
                // sorted by size: nothing later fits either
                break;
            }
            if ctx.work.fetch_add(1, Ordering::Relaxed) as u128 >= ctx.budget {
                ctx.exceeded.store(true, Ordering::Relaxed);
                break;
            }
            if chosen.iter().all(|&c| compatible(ctx.g, &ctx.polymers[c], p)) {
                chosen.push(j);
                acc += rec(ctx, chosen, j + 1, total + p.size(), &(prod * &ctx.weights[j]));
                chosen.pop();
            }
        }
        acc
    }

    let ctx = Ctx {
        g,
        polymers,
        weights: &weights,
        max_total,
        work: &work,
        exceeded: &exceeded,
        budget: budget.max_enumeration,
    };
    // branch on the first (smallest-index) polymer of the set
    let branches = par::map_range(polymers.len(), |i| {
        if polymers[i].size() > max_total {
            return BigRational::zero();
        }
        let mut chosen = vec![i];
        rec(&ctx, &mut chosen, i + 1, polymers[i].size(), &weights[i])
    });
    if exceeded.load(Ordering::Relaxed) {
        return Err(Error::Resource {
            what: "compatible-set enumeration",
            needed: work.load(Ordering::Relaxed) as u128,
            budget: budget.max_enumeration,
        });
    }
    Ok(branches.into_iter().fold(BigRational::one(), |a, b| a + b))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KpReport {
    /// max over γ* of Σ_{γ ≁ γ*} e^{a|γ|}|a_γ|R^{|γ|} / (a|γ*|); at most one
    /// certifies Ξ(z) ≠ 0 for |z| < R on this graph.
    pub max_ratio: f64,
    pub argmax: Option<Polymer>,
    pub polymer_count: usize,
}

impl KpReport {
    pub fn passes(&self) -> bool {
        self.max_ratio <= 1.0
    }
}

/// Kotecký–Preiss check with a(γ) = `a_coeff`·|γ| at |z| = `radius`.
pub fn kp_check<M: PolymerModel + ?Sized>(model: &M, a_coeff: f64, radius: f64) -> Result<KpReport> {
    if !(a_coeff > 0.0) || !(radius >= 0.0) {
        return Err(Error::Domain(format!(
            "KP check needs a_coeff > 0 and radius >= 0, got {a_coeff}, {radius}"
        )));
    }
    let polymers = enumerate_polymers(model, usize::MAX)?;
    Ok(kp_check_over(model.graph(), &polymers, a_coeff, radius))
}

pub fn kp_check_over(g: &BipartiteGraph, polymers: &[Polymer], a_coeff: f64, radius: f64) -> KpReport {
    if polymers.is_empty() {
        return KpReport {
            max_ratio: 0.0,
            argmax: None,
            polymer_count: 0,
        };
    }
    // the ratio depends only on the support, so polymers sharing one are pooled
    let mut group_of: HashMap<&VertexSet, usize> = HashMap::new();
    let mut first: Vec<usize> = Vec::new();
    let mut terms: Vec<f64> = Vec::new();
    for (i, p) in polymers.iter().enumerate() {
        let k = p.size() as f64;
        let term = (a_coeff * k).exp() * p.weight.abs().to_f64().unwrap_or(f64::INFINITY) * radius.powf(k);
        let gi = *group_of.entry(&p.support).or_insert_with(|| {
            first.push(i);
            terms.push(0.0);
            first.len() - 1
        });
        terms[gi] += term;
    }
    let mut containing: Vec<Vec<u32>> = vec![Vec::new(); g.vertex_count()];
    for (gi, &i) in first.iter().enumerate() {
        for v in polymers[i].support.iter() {
            containing[g.id(v)].push(gi as u32);
        }
    }
    let ratios = par::map_range(first.len(), |gi| {
        let star = &polymers[first[gi]];
        let mut seen = FixedBitSet::with_capacity(first.len());
        let mut near = FixedBitSet::with_capacity(g.vertex_count());
        for v in star.support.iter() {
            let id = g.id(v);
            near.insert(id);
            for &w in g.square_neighbor_ids(id) {
                near.insert(w as usize);
            }
        }
        let mut sum = 0.0;
        for v in near.ones() {
            for &j in &containing[v] {
                if !seen.put(j as usize) {
                    sum += terms[j as usize];
                }
            }
        }
        sum / (a_coeff * star.size() as f64)
    });
    let (best_group, &max_ratio) = ratios
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |acc, (i, r)| if *r > *acc.1 { (i, r) } else { acc });
    let best = first[best_group];
    KpReport {
        max_ratio,
        argmax: Some(polymers[best].clone()),
        polymer_count: polymers.len(),
    }
}

/// t = (−1 + √(1 + 8e)) / (4e), the KP coefficient used at high fugacity.
pub fn high_fugacity_kp_coefficient() -> f64 {
    let e = std::f64::consts::E;
    (-1.0 + (1.0 + 8.0 * e).sqrt()) / (4.0 * e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::graph::Side;
    use crate::random::{sample_graph, SampleConfig};

    fn set(vs: &[Vertex]) -> VertexSet {
        vs.iter().copied().collect()
    }

    const L0: Vertex = Vertex::left(0);
    const L1: Vertex = Vertex::left(1);
    const R0: Vertex = Vertex::right(0);
    const R1: Vertex = Vertex::right(1);

    fn unit(support: &[Vertex]) -> Polymer {
        Polymer {
            support: set(support),
            labels: vec![1; support.len()],
            neighborhood: VertexSet::new(),
            weight: BigRational::one(),
        }
    }

    #[test]
    fn compatibility_examples() {
        assert!(!compatible(&k22(), &unit(&[L0]), &unit(&[L1])));
        assert!(compatible(&two_edges(), &unit(&[L0]), &unit(&[L1])));
        assert!(!compatible(&two_edges(), &unit(&[L0]), &unit(&[L0])));
    }

    #[test]
    fn support_examples() {
        let g = k22();
        let all: VertexSet = g.vertices().collect();
        let got = enumerate_supports(&g, &all, L0, 2).unwrap();
        assert_eq!(got, vec![set(&[L0]), set(&[L0, L1]), set(&[L0, R0]), set(&[L0, R1])]);
        let left: VertexSet = g.side_vertices(Side::L).collect();
        assert_eq!(enumerate_supports(&g, &left, L0, 2).unwrap(), vec![set(&[L0]), set(&[L0, L1])]);
        assert_eq!(enumerate_supports(&g, &all, L0, 1).unwrap(), vec![set(&[L0])]);
        assert!(enumerate_supports(&g, &left, R0, 2).is_err());
    }

    /// Brute force: all subsets containing the root, filtered by G²-connectivity.
    fn brute_supports(g: &BipartiteGraph, universe: &[Vertex], root: Vertex, max: usize) -> Vec<VertexSet> {
        let m = universe.len();
        let mut out = Vec::new();
        for mask in 0u32..(1 << m) {
            let s: VertexSet = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| universe[i]).collect();
            if s.len() > max || !s.contains(root) {
                continue;
            }
            if g.square_components(&s).len() == 1 {
                out.push(s);
            }
        }
        out.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
        out
    }

    #[test]
    fn supports_match_brute_force() {
        for seed in 0..30 {
            let n = 2 + (seed as usize % 4);
            let g = sample_graph(&SampleConfig::new(n, 1 + seed as usize % 3, seed).unwrap());
            let all: Vec<Vertex> = g.vertices().collect();
            let uni: VertexSet = all.iter().copied().collect();
            for &root in &all {
                for max in [1, 3, 2 * n] {
                    assert_eq!(
                        enumerate_supports(&g, &uni, root, max).unwrap(),
                        brute_supports(&g, &all, root, max)
                    );
                }
            }
        }
    }

    #[test]
    fn rooted_at_minimum_partitions_supports() {
        for seed in 0..20 {
            let g = sample_graph(&SampleConfig::new(4, 2, seed).unwrap());
            let mut allowed = FixedBitSet::with_capacity(8);
            allowed.insert_range(..);
            let mut seen = std::collections::BTreeSet::new();
            for root in 0..8 {
                for_each_support(&g, &allowed, root, 8, true, |ids| {
                    assert_eq!(*ids.iter().min().unwrap(), root);
                    let mut s = ids.to_vec();
                    s.sort_unstable();
                    assert!(seen.insert(s), "duplicate support");
                });
            }
            // every connected subset appears
            let all: Vec<Vertex> = g.vertices().collect();
            let total: usize = (0..8).map(|r| brute_supports(&g, &all, g.vertex(r), 8).iter().filter(|s| g.id(s.as_slice()[0]) == r).count()).sum();
            assert_eq!(seen.len(), total);
        }
    }

    #[test]
    fn kp_coefficient() {
        let t = high_fugacity_kp_coefficient();
        assert!(t > 0.345 && t < 0.347);
    }

    #[test]
    fn kp_empty() {
        let r = kp_check_over(&k22(), &[], 0.5, 1.0);
        assert_eq!(r.max_ratio, 0.0);
        assert!(r.passes());
    }
}
