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

//! Brute-force ground truth. These routines enumerate raw configurations and
//! filter them; none of them goes through polymers.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::coloring::ColorClass;
use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Side, Vertex, VertexSet};
use crate::par;
use crate::polymer::Label;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleBudget {
    pub max_enumeration: u128,
}

impl OracleBudget {
    pub const DEFAULT: OracleBudget = OracleBudget { max_enumeration: 1 << 26 };

    pub fn new(max_enumeration: u128) -> Result<Self> {
        if max_enumeration == 0 {
            return Err(Error::Domain("oracle budget must be positive".into()));
        }
        Ok(OracleBudget { max_enumeration })
    }

    fn admit(&self, what: &'static str, needed: Option<u128>) -> Result<u64> {
        match needed {
            Some(k) if k <= self.max_enumeration && k <= u64::MAX as u128 => Ok(k as u64),
            _ => Err(Error::Resource {
                what,
                needed: needed.unwrap_or(u128::MAX),
                budget: self.max_enumeration,
            }),
        }
    }
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self::DEFAULT
    }
}

fn pow_checked(base: u128, exp: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// Bitmask of right neighbors of each left vertex.
fn left_masks(g: &BipartiteGraph) -> Vec<u64> {
    let n = g.n();
    (0..n)
        .map(|i| g.neighbor_ids(i).iter().fold(0u64, |m, &r| m | 1 << (r as usize - n)))
        .collect()
}

fn side_limit(g: &BipartiteGraph) -> Result<()> {
    if g.n() > 63 {
        return Err(Error::Resource {
            what: "one-side subset enumeration",
            needed: u128::MAX,
            budget: 63,
        });
    }
    Ok(())
}

/// `profile[s][f]` = number of S ⊆ L with |S| = s and n − |N(S)| = f.
pub fn is_profile(g: &BipartiteGraph, budget: OracleBudget) -> Result<Vec<Vec<u128>>> {
    side_limit(g)?;
    let n = g.n();
    let total = budget.admit("independent-set enumeration", 1u128.checked_shl(n as u32))?;
    let masks = left_masks(g);
    let parts = par::map_slice(&par::chunks(total), |&(lo, hi)| {
        let mut prof = vec![vec![0u128; n + 1]; n + 1];
        for s in lo..hi {
            let mut nb = 0u64;
            let mut bits = s;
            while bits != 0 {
                nb |= masks[bits.trailing_zeros() as usize];
                bits &= bits - 1;
            }
            prof[s.count_ones() as usize][n - nb.count_ones() as usize] += 1;
        }
        prof
    });
    let mut prof = vec![vec![0u128; n + 1]; n + 1];
    for p in parts {
        for (row, prow) in prof.iter_mut().zip(p) {
            for (c, pc) in row.iter_mut().zip(prow) {
                *c += pc;
            }
        }
    }
    Ok(prof)
}

fn rat(x: u128) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// Σ over independent sets I with |I∩L| = s, |I∩R| = t where `keep(s, t)`.
fn profile_sum(profile: &[Vec<u128>], lambda: &BigRational, keep: impl Fn(usize, usize) -> bool) -> BigRational {
    let n = profile.len() - 1;
    let pows: Vec<BigRational> = (0..=2 * n).map(|k| num_traits::pow(lambda.clone(), k)).collect();
    let mut acc = BigRational::zero();
    for (s, row) in profile.iter().enumerate() {
        for (f, &count) in row.iter().enumerate() {
            if count == 0 {
                continue;
            }
            for t in 0..=f {
                if keep(s, t) {
                    acc += rat(count * crate::props::binomial(f as u64, t as u64)) * &pows[s + t];
                }
            }
        }
    }
    acc
}

fn check_lambda(lambda: &BigRational) -> Result<()> {
    if *lambda < BigRational::zero() {
        return Err(Error::Domain(format!("fugacity must be nonnegative, got {lambda}")));
    }
    Ok(())
}

/// Z(G, λ) via the one-side sum Σ_{S⊆L} λ^|S| (1+λ)^{n−|N(S)|}.
pub fn count_is(g: &BipartiteGraph, lambda: &BigRational, budget: OracleBudget) -> Result<BigRational> {
    check_lambda(lambda)?;
    let prof = is_profile(g, budget)?;
    let one_plus = lambda + BigRational::one();
    let mut acc = BigRational::zero();
    for (s, row) in prof.iter().enumerate() {
        for (f, &count) in row.iter().enumerate() {
            if count > 0 {
                acc += rat(count) * num_traits::pow(lambda.clone(), s) * num_traits::pow(one_plus.clone(), f);
            }
        }
    }
    Ok(acc)
}

/// Z(G, λ) by testing every subset of L ∪ R for independence.
pub fn count_is_naive(g: &BipartiteGraph, lambda: &BigRational, budget: OracleBudget) -> Result<BigRational> {
    check_lambda(lambda)?;
    let n = g.n();
    if 2 * n > 63 {
        return Err(Error::Resource {
            what: "naive independent-set enumeration",
            needed: u128::MAX,
            budget: budget.max_enumeration,
        });
    }
    let total = budget.admit("naive independent-set enumeration", 1u128.checked_shl(2 * n as u32))?;
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| g.neighbor_ids(i).iter().map(move |&r| (i, r as usize)))
        .collect();
    let parts = par::map_slice(&par::chunks(total), |&(lo, hi)| {
        let mut by_size = vec![0u128; 2 * n + 1];
        for mask in lo..hi {
            if edges.iter().all(|&(a, b)| mask >> a & 1 == 0 || mask >> b & 1 == 0) {
                by_size[mask.count_ones() as usize] += 1;
            }
        }
        by_size
    });
    let mut acc = BigRational::zero();
    for by_size in parts {
        for (k, c) in by_size.into_iter().enumerate() {
            if c > 0 {
                acc += rat(c) * num_traits::pow(lambda.clone(), k);
            }
        }
    }
    Ok(acc)
}

/// Σ λ^|I| over I with |I ∩ X| < `alpha_n`.
pub fn count_is_cluster(g: &BipartiteGraph, side: Side, alpha_n: usize, lambda: &BigRational, budget: OracleBudget) -> Result<BigRational> {
    check_lambda(lambda)?;
    let prof = is_profile(g, budget)?;
    Ok(match side {
        Side::L => profile_sum(&prof, lambda, |s, _| s < alpha_n),
        Side::R => profile_sum(&prof, lambda, |_, t| t < alpha_n),
    })
}

/// Σ λ^|I| over I in the union of the two side clusters.
pub fn count_is_cluster_union(g: &BipartiteGraph, alpha_n: usize, lambda: &BigRational, budget: OracleBudget) -> Result<BigRational> {
    check_lambda(lambda)?;
    let prof = is_profile(g, budget)?;
    Ok(profile_sum(&prof, lambda, |s, t| s < alpha_n || t < alpha_n))
}

/// Σ λ^|I| over I in the intersection of the two side clusters.
pub fn count_is_cluster_intersection(g: &BipartiteGraph, alpha_n: usize, lambda: &BigRational, budget: OracleBudget) -> Result<BigRational> {
    check_lambda(lambda)?;
    let prof = is_profile(g, budget)?;
    Ok(profile_sum(&prof, lambda, |s, t| s < alpha_n && t < alpha_n))
}

fn check_q(q: usize) -> Result<()> {
    if q == 0 || q > 63 {
        return Err(Error::Domain(format!("number of colors must be in 1..=63, got {q}")));
    }
    Ok(())
}

/// Decodes `index` into base-`q` digits, least significant first.
fn digits(mut index: u64, q: u64, out: &mut [u8]) {
    for d in out.iter_mut() {
        *d = (index % q) as u8;
        index /= q;
    }
}

/// Odometer step in base `q`.
fn bump(d: &mut [u8], q: u8) {
    for x in d.iter_mut() {
        *x += 1;
        if *x < q {
            return;
        }
        *x = 0;
    }
}

/// |C(G)| via Σ over left colorings of Π_{v∈R} (q − #distinct colors on N(v)).
pub fn count_colorings(g: &BipartiteGraph, q: usize, budget: OracleBudget) -> Result<BigUint> {
    check_q(q)?;
    let n = g.n();
    let total = budget.admit("coloring enumeration", pow_checked(q as u128, n))?;
    let nbrs: Vec<Vec<usize>> = (0..n).map(|j| g.neighbor_ids(n + j).iter().map(|&l| l as usize).collect()).collect();
    let parts = par::map_slice(&par::chunks(total), |&(lo, hi)| {
        let mut d = vec![0u8; n];
        digits(lo, q as u64, &mut d);
        let mut acc = BigUint::zero();
        for _ in lo..hi {
            let mut term = BigUint::one();
            for nb in &nbrs {
                let used = nb.iter().fold(0u64, |m, &l| m | 1 << d[l]);
                term *= (q - used.count_ones() as usize) as u64;
            }
            acc += term;
            bump(&mut d, q as u8);
        }
        acc
    });
    Ok(parts.into_iter().sum())
}

/// Runs `visit(left, right)` on every proper coloring, colors 0-based.
fn for_each_proper<F>(g: &BipartiteGraph, q: usize, budget: OracleBudget, what: &'static str, visit: F) -> Result<()>
where
    F: Fn(&[u8], &[u8]) + Sync + Send,
{
    check_q(q)?;
    let n = g.n();
    let total = budget.admit(what, pow_checked(q as u128, 2 * n))?;
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| g.neighbor_ids(i).iter().map(move |&r| (i, r as usize - n)))
        .collect();
    par::map_slice(&par::chunks(total), |&(lo, hi)| {
        let mut d = vec![0u8; 2 * n];
        digits(lo, q as u64, &mut d);
        for _ in lo..hi {
            let (left, right) = d.split_at(n);
            if edges.iter().all(|&(a, b)| left[a] != right[b]) {
                visit(left, right);
            }
            bump(&mut d, q as u8);
        }
    });
    Ok(())
}

/// |C(G)| by testing every assignment of both sides.
pub fn count_colorings_naive(g: &BipartiteGraph, q: usize, budget: OracleBudget) -> Result<BigUint> {
    let count = std::sync::atomic::AtomicU64::new(0);
    for_each_proper(g, q, budget, "naive coloring enumeration", |_, _| {
        count.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
    })?;
    Ok(BigUint::from(count.into_inner()))
}

fn check_class(q: usize, x: &ColorClass) -> Result<()> {
    if x.q() != q {
        return Err(Error::Precondition(format!("color class is over [{}], not [{q}]", x.q())));
    }
    Ok(())
}

/// `hist[d]` = number of proper colorings with deviation distance d from X.
pub fn coloring_deviation_histogram(g: &BipartiteGraph, x: &ColorClass, q: usize, budget: OracleBudget) -> Result<Vec<BigUint>> {
    check_class(q, x)?;
    let n = g.n();
    let hist: Vec<std::sync::atomic::AtomicU64> = (0..=2 * n).map(|_| Default::default()).collect();
    for_each_proper(g, q, budget, "coloring cluster enumeration", |left, right| {
        let d = left.iter().filter(|&&c| !x.contains(c + 1)).count() + right.iter().filter(|&&c| x.contains(c + 1)).count();
        hist[d].fetch_add(1, std::sync::atomic::Ordering::Relaxed);
    })?;
    Ok(hist.into_iter().map(|a| BigUint::from(a.into_inner())).collect())
}

/// |C_X| = #{proper σ : d_X(σ) < alpha_n}.
pub fn count_colorings_cluster(g: &BipartiteGraph, x: &ColorClass, alpha_n: usize, q: usize, budget: OracleBudget) -> Result<BigUint> {
    let hist = coloring_deviation_histogram(g, x, q, budget)?;
    Ok(hist.into_iter().take(alpha_n).sum())
}

/// A labeled support, as produced by splitting a coloring's deviations.
pub type LabeledSupport = (VertexSet, Vec<Label>);

/// Groups the colorings of C_X by their deviation polymer sets: each key is
/// the sorted list of G²-components of the deviating vertices with their
/// colors, each value the number of colorings producing it.
pub fn coloring_polymer_partition(
    g: &BipartiteGraph,
    x: &ColorClass,
    alpha_n: usize,
    q: usize,
    budget: OracleBudget,
) -> Result<BTreeMap<Vec<LabeledSupport>, u64>> {
    check_class(q, x)?;
    let n = g.n();
    let found = std::sync::Mutex::new(BTreeMap::new());
    for_each_proper(g, q, budget, "coloring partition enumeration", |left, right| {
        let deviating: VertexSet = (0..n)
            .filter(|&i| !x.contains(left[i] + 1))
            .map(|i| Vertex::left(i as u32))
            .chain((0..n).filter(|&j| x.contains(right[j] + 1)).map(|j| Vertex::right(j as u32)))
            .collect();
        if deviating.len() >= alpha_n {
            return;
        }
        let color = |v: Vertex| match v.side {
            Side::L => left[v.index as usize] + 1,
            Side::R => right[v.index as usize] + 1,
        };
        let mut key: Vec<LabeledSupport> = g
            .square_components(&deviating)
            .into_iter()
            .map(|c| {
                let labels = c.iter().map(color).collect();
                (c, labels)
            })
            .collect();
        key.sort();
        *found.lock().unwrap().entry(key).or_insert(0) += 1;
    })?;
    Ok(found.into_inner().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::random::{sample_graph, SampleConfig};

    fn r(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    const B: OracleBudget = OracleBudget::DEFAULT;

    #[test]
    fn independent_set_examples() {
        assert_eq!(count_is(&k22(), &r(1, 1), B).unwrap(), r(7, 1));
        assert_eq!(count_is(&k22(), &r(2, 1), B).unwrap(), r(17, 1));
        let l = r(3, 7);
        assert_eq!(count_is(&k11(), &l, B).unwrap(), r(1, 1) + r(2, 1) * &l);
    }

    #[test]
    fn cluster_examples() {
        let one = r(1, 1);
        assert_eq!(count_is_cluster(&k22(), Side::L, 2, &one, B).unwrap(), r(6, 1));
        assert_eq!(count_is_cluster(&k22(), Side::L, 0, &one, B).unwrap(), r(0, 1));
        assert_eq!(count_is_cluster(&k22(), Side::R, 3, &one, B).unwrap(), r(7, 1));
    }

    #[test]
    fn coloring_examples() {
        assert_eq!(count_colorings(&k22(), 3, B).unwrap(), BigUint::from(18u32));
        assert_eq!(count_colorings(&k22(), 2, B).unwrap(), BigUint::from(2u32));
        assert_eq!(count_colorings(&k11(), 5, B).unwrap(), BigUint::from(20u32));
        let x = ColorClass::new(3, &[1]).unwrap();
        assert_eq!(count_colorings_cluster(&k22(), &x, 1, 3, B).unwrap(), BigUint::from(4u32));
        assert_eq!(count_colorings_cluster(&k22(), &x, 2, 3, B).unwrap(), BigUint::from(8u32));
        assert_eq!(count_colorings_cluster(&k22(), &x, 5, 3, B).unwrap(), BigUint::from(18u32));
    }

    #[test]
    fn one_side_sums_match_naive() {
        for seed in 0..40 {
            let n = 1 + seed as usize % 4;
            let g = sample_graph(&SampleConfig::new(n, 1 + seed as usize % 3, seed).unwrap());
            for l in [r(1, 2), r(1, 1), r(3, 1)] {
                assert_eq!(count_is(&g, &l, B).unwrap(), count_is_naive(&g, &l, B).unwrap());
            }
            if n <= 3 {
                assert_eq!(count_colorings(&g, 3, B).unwrap(), count_colorings_naive(&g, 3, B).unwrap());
            }
        }
    }

    #[test]
    fn union_plus_intersection_is_both_sides() {
        for seed in 0..20 {
            let g = sample_graph(&SampleConfig::new(4, 2, seed).unwrap());
            for k in 0..=5 {
                let l = r(2, 3);
                let lhs = count_is_cluster(&g, Side::L, k, &l, B).unwrap() + count_is_cluster(&g, Side::R, k, &l, B).unwrap();
                let rhs = count_is_cluster_union(&g, k, &l, B).unwrap() + count_is_cluster_intersection(&g, k, &l, B).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let g = sample_graph(&SampleConfig::new(12, 2, 0).unwrap());
        let tiny = OracleBudget::new(100).unwrap();
        assert!(matches!(count_is(&g, &r(1, 1), tiny), Err(Error::Resource { .. })));
        assert!(matches!(count_colorings(&g, 3, tiny), Err(Error::Resource { .. })));
        assert!(OracleBudget::new(0).is_err());
    }

    #[test]
    fn partition_covers_cluster() {
        let x = ColorClass::new(3, &[1]).unwrap();
        let parts = coloring_polymer_partition(&k22(), &x, 2, 3, B).unwrap();
        assert_eq!(parts.values().sum::<u64>(), 8);
        assert_eq!(parts[&Vec::new()], 4);
    }
}
