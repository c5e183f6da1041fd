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

//! Structural graph properties (expansion, covering) and the parameter
//! regimes the counting algorithms are stated for.

use std::sync::atomic::{AtomicUsize, Ordering};

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use fixedbitset::FixedBitSet;
use rand::seq::index;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Side, VertexSet};
use crate::par;
use crate::random::sub_seed;

/// Absolute slack for comparisons of integer counts against real thresholds.
pub const FLOAT_SLACK: f64 = 1e-9;

/// Default number of subsets an exact check may visit.
pub const DEFAULT_EXACT_BUDGET: u128 = 1 << 24;

/// Subsets per size class when an automatic check falls back to sampling.
pub const DEFAULT_SAMPLES_PER_SIZE: usize = 1000;

/// ⌊x⌋, treating values within `FLOAT_SLACK` of an integer as that integer.
pub fn floor_snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() < FLOAT_SLACK {
        r
    } else {
        x.floor()
    }
}

/// ⌈x⌉ with the same snapping as [`floor_snap`].
pub fn ceil_snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() < FLOAT_SLACK {
        r
    } else {
        x.ceil()
    }
}

/// C(n, k), saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Binary entropy in bits, with H(0) = H(1) = 0.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("binary entropy needs x in [0,1], got {x}")));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-x * x.log2() - (1.0 - x) * (1.0 - x).log2())
}

/// Δ − (H(α) + H(αβ)) / (H(α) − αβ·H(1/β)); positive exactly when the
/// expansion threshold is met for these parameters.
///
/// Values with |f| < 0.5 are recomputed with 128-bit floats since the
/// interesting margins are of order 0.1.
pub fn expander_threshold_margin(delta: usize, alpha: f64, beta: f64) -> Result<f64> {
    if !(alpha > 0.0 && beta > 1.0 && alpha < 1.0 / beta) {
        return Err(Error::Domain(format!(
            "need 0 < alpha < 1/beta < 1, got alpha={alpha}, beta={beta}"
        )));
    }
    let h = |x: f64| binary_entropy(x).expect("argument checked in range");
    let ab = alpha * beta;
    let denom = h(alpha) - ab * h(1.0 / beta);
    if denom <= 0.0 {
        return Err(Error::Domain(format!(
            "H(alpha) - alpha*beta*H(1/beta) = {denom} is not positive"
        )));
    }
    let f = delta as f64 - (h(alpha) + h(ab)) / denom;
    if f.abs() >= 0.5 {
        return Ok(f);
    }
    Ok(precise_margin(delta, alpha, beta))
}

const PRECISION: usize = 128;

fn precise_margin(delta: usize, alpha: f64, beta: f64) -> f64 {
    let rm = RoundingMode::ToEven;
    let mut cc = Consts::new().expect("constants cache");
    let one = BigFloat::from_u8(1, PRECISION);
    let mut entropy = |x: &BigFloat| -> BigFloat {
        if x.is_zero() || x.cmp(&one) == Some(0) {
            return BigFloat::new(PRECISION);
        }
        let y = one.sub(x, PRECISION, rm);
        let a = x.mul(&x.log2(PRECISION, rm, &mut cc), PRECISION, rm);
        let b = y.mul(&y.log2(PRECISION, rm, &mut cc), PRECISION, rm);
        a.add(&b, PRECISION, rm).neg()
    };
    let a = BigFloat::from_f64(alpha, PRECISION);
    let b = BigFloat::from_f64(beta, PRECISION);
    let ab = a.mul(&b, PRECISION, rm);
    let inv_b = one.div(&b, PRECISION, rm);
    let ha = entropy(&a);
    let hab = entropy(&ab);
    let hib = entropy(&inv_b);
    let num = ha.add(&hab, PRECISION, rm);
    let den = ha.sub(&ab.mul(&hib, PRECISION, rm), PRECISION, rm);
    let f = BigFloat::from_u64(delta as u64, PRECISION).sub(&num.div(&den, PRECISION, rm), PRECISION, rm);
    to_f64(&f, &mut cc)
}

fn to_f64(x: &BigFloat, cc: &mut Consts) -> f64 {
    x.format(Radix::Dec, RoundingMode::ToEven, cc)
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(f64::NAN)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeMode {
    IsHigh,
    IsLow,
    Coloring,
}

/// Parameter choices of one regime. Mode-specific entries are `None`
/// outside their mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeParams {
    pub mode: RegimeMode,
    pub delta: usize,
    pub q: Option<usize>,
    pub alpha: f64,
    pub beta: f64,
    pub zeta: Option<f64>,
    pub s: Option<f64>,
    pub lambda_l: Option<f64>,
}

impl RegimeParams {
    /// ⌊αn⌋.
    pub fn alpha_n(&self, n: usize) -> usize {
        floor_snap(self.alpha * n as f64).max(0.0) as usize
    }
}

/// ⌊q/2⌋ and ⌈q/2⌉.
pub fn half_palettes(q: usize) -> (usize, usize) {
    (q / 2, q.div_ceil(2))
}

pub const IS_HIGH_ZETA: f64 = 1.28;
pub const IS_HIGH_MIN_DELTA: usize = 53;

/// Parameters of each regime. With `force` the degree and palette bounds are
/// not enforced, which is what desk-scale experiments need.
pub fn regime_parameters(mode: RegimeMode, delta: usize, q: Option<usize>, force: bool) -> Result<RegimeParams> {
    if delta == 0 {
        return Err(Error::Domain("delta must be positive".into()));
    }
    let d = delta as f64;
    let params = match mode {
        RegimeMode::IsHigh => {
            if delta < IS_HIGH_MIN_DELTA && !force {
                return Err(Error::Regime(format!(
                    "high-fugacity regime needs delta >= {IS_HIGH_MIN_DELTA}, got {delta}"
                )));
            }
            let zeta = IS_HIGH_ZETA;
            RegimeParams {
                mode,
                delta,
                q: None,
                alpha: 2.9 / d,
                beta: d / (2.9 * zeta),
                zeta: Some(zeta),
                s: None,
                lambda_l: None,
            }
        }
        RegimeMode::IsLow => {
            let ln = d.ln();
            let alpha = ln * ln / d;
            let lambda_l = ln.powi(4) / d;
            if !force && !(lambda_l < 1.0 && alpha < 1.0 / 3.0) {
                return Err(Error::Regime(format!(
                    "low-fugacity regime is empty at delta={delta} (lambda_l={lambda_l:.4}, alpha={alpha:.4})"
                )));
            }
            RegimeParams {
                mode,
                delta,
                q: None,
                alpha,
                beta: 1.0 / (3.0 * alpha),
                zeta: None,
                s: None,
                lambda_l: Some(lambda_l),
            }
        }
        RegimeMode::Coloring => {
            let q = q.ok_or_else(|| Error::Precondition("coloring regime needs q".into()))?;
            if q < 2 {
                return Err(Error::Domain(format!("need q >= 2 colors, got {q}")));
            }
            let (_, q_hi) = half_palettes(q);
            let min_delta = 100.0 * (q_hi as f64).powi(10);
            if !force && (q < 3 || d < min_delta) {
                return Err(Error::Regime(format!(
                    "coloring regime needs q >= 3 and delta >= {min_delta}, got q={q}, delta={delta}"
                )));
            }
            RegimeParams {
                mode,
                delta,
                q: Some(q),
                alpha: 1.0 / d.sqrt(),
                beta: d.sqrt() / 3.0,
                zeta: None,
                s: Some(1.0 / (18.0 * (q_hi as f64).powi(5))),
                lambda_l: None,
            }
        }
    };
    Ok(params)
}

/// Threshold margin of the high-fugacity parameters, computed from the exact
/// rationals α = 29/(10Δ) and αβ = 1/ζ = 25/32 at 128 bits.
pub fn is_high_threshold_margin(delta: usize) -> f64 {
    let rm = RoundingMode::ToEven;
    let mut cc = Consts::new().expect("constants cache");
    let p = PRECISION;
    let one = BigFloat::from_u8(1, p);
    let mut entropy = |x: &BigFloat| -> BigFloat {
        let y = one.sub(x, p, rm);
        let a = x.mul(&x.log2(p, rm, &mut cc), p, rm);
        let b = y.mul(&y.log2(p, rm, &mut cc), p, rm);
        a.add(&b, p, rm).neg()
    };
    let alpha = BigFloat::from_u64(29, p).div(&BigFloat::from_u64(10 * delta as u64, p), p, rm);
    let ab = BigFloat::from_u64(25, p).div(&BigFloat::from_u64(32, p), p, rm);
    // 1/β = αζ = (29/(10Δ))·(32/25)
    let inv_beta = alpha.mul(&BigFloat::from_u64(32, p).div(&BigFloat::from_u64(25, p), p, rm), p, rm);
    let ha = entropy(&alpha);
    let hab = entropy(&ab);
    let hib = entropy(&inv_beta);
    let num = ha.add(&hab, p, rm);
    let den = ha.sub(&ab.mul(&hib, p, rm), p, rm);
    let f = BigFloat::from_u64(delta as u64, p).sub(&num.div(&den, p, rm), p, rm);
    to_f64(&f, &mut cc)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CheckMode {
    /// Exhaustive; fails with a resource error when the subset count exceeds the budget.
    Exact { budget: u128 },
    /// `per_size` uniform subsets for every size class.
    Sampled { per_size: usize, seed: u64 },
    /// Exact within budget, otherwise sampled.
    Auto { budget: u128, per_size: usize, seed: u64 },
}

impl CheckMode {
    pub fn exact() -> Self {
        CheckMode::Exact {
            budget: DEFAULT_EXACT_BUDGET,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictMethod {
    Exact,
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyVerdict {
    pub holds: bool,
    /// Smallest violating subset found, ordered by size, then side, then
    /// lexicographically.
    pub witness: Option<VertexSet>,
    pub method: VerdictMethod,
    /// False for sampled verdicts: "holds" then only means no violation was found.
    pub is_proof: bool,
    pub subsets_checked: u128,
}

/// Candidate pool for a subset scan: items with neighbor bitsets.
struct Pool<'g> {
    graph: &'g BipartiteGraph,
    /// Flat ids of the items.
    ids: Vec<usize>,
    /// Neighbor bitset over flat ids for each item.
    nbrs: Vec<FixedBitSet>,
}

impl<'g> Pool<'g> {
    fn side(graph: &'g BipartiteGraph, side: Side) -> Self {
        let ids: Vec<usize> = graph.side_vertices(side).map(|v| graph.id(v)).collect();
        Self::build(graph, ids)
    }

    fn mixed(graph: &'g BipartiteGraph) -> Self {
        Self::build(graph, (0..graph.vertex_count()).collect())
    }

    fn build(graph: &'g BipartiteGraph, ids: Vec<usize>) -> Self {
        let nbrs = ids
            .iter()
            .map(|&u| {
                let mut b = FixedBitSet::with_capacity(graph.vertex_count());
                for &w in graph.neighbor_ids(u) {
                    b.insert(w as usize);
                }
                b
            })
            .collect();
        Pool { graph, ids, nbrs }
    }

    fn len(&self) -> usize {
        self.ids.len()
    }

    /// |N(U)| with U's own members removed.
    fn outside_count(&self, combo: &[usize], union: &FixedBitSet) -> usize {
        union.count_ones(..) - combo.iter().filter(|&&i| union.contains(self.ids[i])).count()
    }

    fn witness(&self, combo: &[usize]) -> VertexSet {
        combo.iter().map(|&i| self.graph.vertex(self.ids[i])).collect()
    }
}

/// Walks the size-`k` combinations of `0..m` whose first element is `first`,
/// in lexicographic order, keeping a running neighbor union. Stops at the
/// first combination the predicate rejects.
fn first_violation_from(
    pool: &Pool<'_>,
    k: usize,
    first: usize,
    ok: &(dyn Fn(&[usize], &FixedBitSet) -> bool + Sync),
    visited: &mut u128,
) -> Option<Vec<usize>> {
    let m = pool.len();
    if first + k > m {
        return None;
    }
    let mut combo = vec![first];
    let mut unions = vec![pool.nbrs[first].clone()];
    fn rec(
        pool: &Pool<'_>,
        k: usize,
        m: usize,
        combo: &mut Vec<usize>,
        unions: &mut Vec<FixedBitSet>,
        ok: &(dyn Fn(&[usize], &FixedBitSet) -> bool + Sync),
        visited: &mut u128,
    ) -> bool {
        if combo.len() == k {
            *visited += 1;
            return !ok(combo, unions.last().unwrap());
        }
        let start = combo.last().unwrap() + 1;
        let remaining = k - combo.len();
        for next in start..=(m - remaining) {
            let mut u = unions.last().unwrap().clone();
            u.union_with(&pool.nbrs[next]);
            combo.push(next);
            unions.push(u);
            if rec(pool, k, m, combo, unions, ok, visited) {
                return true;
            }
            combo.pop();
            unions.pop();
        }
        false
    }
    if rec(pool, k, m, &mut combo, &mut unions, ok, visited) {
        Some(combo)
    } else {
        None
    }
}

type Predicate<'a> = Box<dyn Fn(&Pool<'_>, &[usize], &FixedBitSet) -> bool + Sync + 'a>;

/// Exhaustive scan over pools and size classes; the smallest witness wins.
fn exact_scan(pools: &[Pool<'_>], sizes: &[usize], pred: &Predicate<'_>) -> PropertyVerdict {
    // task = (size, pool, first element); tasks are in witness order
    let mut tasks = Vec::new();
    for &k in sizes {
        for (p, pool) in pools.iter().enumerate() {
            for first in 0..pool.len() {
                if first + k <= pool.len() {
                    tasks.push((k, p, first));
                }
            }
        }
    }
    let best = AtomicUsize::new(usize::MAX);
    let results = par::map_range(tasks.len(), |t| {
        if t > best.load(Ordering::Relaxed) {
            return (None, 0u128);
        }
        let (k, p, first) = tasks[t];
        let pool = &pools[p];
        let ok = |c: &[usize], u: &FixedBitSet| pred(pool, c, u);
        let mut visited = 0;
        let found = first_violation_from(pool, k, first, &ok, &mut visited);
        if found.is_some() {
            best.fetch_min(t, Ordering::Relaxed);
        }
        (found.map(|c| pool.witness(&c)), visited)
    });
    let subsets_checked = results.iter().map(|r| r.1).sum();
    let witness = results.into_iter().find_map(|r| r.0);
    PropertyVerdict {
        holds: witness.is_none(),
        witness,
        method: VerdictMethod::Exact,
        is_proof: true,
        subsets_checked,
    }
}

fn sampled_scan(pools: &[Pool<'_>], sizes: &[usize], per_size: usize, seed: u64, pred: &Predicate<'_>) -> PropertyVerdict {
    let mut tasks = Vec::new();
    for &k in sizes {
        for p in 0..pools.len() {
            if k <= pools[p].len() {
                tasks.push((k, p));
            }
        }
    }
    let results = par::map_range(tasks.len(), |t| {
        let (k, p) = tasks[t];
        let pool = &pools[p];
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, t as u64));
        let mut checked = 0u128;
        for _ in 0..per_size {
            let mut combo = index::sample(&mut rng, pool.len(), k).into_vec();
            combo.sort_unstable();
            let mut union = FixedBitSet::with_capacity(pool.graph.vertex_count());
            for &i in &combo {
                union.union_with(&pool.nbrs[i]);
            }
            checked += 1;
            if !pred(pool, &combo, &union) {
                return (Some(pool.witness(&combo)), checked);
            }
        }
        (None, checked)
    });
    let subsets_checked = results.iter().map(|r| r.1).sum();
    let witness = results.into_iter().find_map(|r| r.0);
    PropertyVerdict {
        holds: witness.is_none(),
        witness,
        method: VerdictMethod::Sampled,
        is_proof: false,
        subsets_checked,
    }
}

fn run_scan(pools: &[Pool<'_>], sizes: &[usize], mode: CheckMode, what: &'static str, pred: Predicate<'_>) -> Result<PropertyVerdict> {
    let needed: u128 = sizes
        .iter()
        .flat_map(|&k| pools.iter().map(move |p| binomial(p.len() as u64, k as u64)))
        .fold(0u128, |a, b| a.saturating_add(b));
    match mode {
        CheckMode::Exact { budget } => {
            if needed > budget {
                return Err(Error::Resource { what, needed, budget });
            }
            Ok(exact_scan(pools, sizes, &pred))
        }
        CheckMode::Sampled { per_size, seed } => Ok(sampled_scan(pools, sizes, per_size, seed, &pred)),
        CheckMode::Auto { budget, per_size, seed } => {
            if needed <= budget {
                Ok(exact_scan(pools, sizes, &pred))
            } else {
                Ok(sampled_scan(pools, sizes, per_size, seed, &pred))
            }
        }
    }
}

/// (α,β)-expansion: every one-side U with |U| ≤ αn has |N(U)| ≥ β|U|.
pub fn is_expander(g: &BipartiteGraph, alpha: f64, beta: f64, mode: CheckMode) -> Result<PropertyVerdict> {
    if alpha < 0.0 || beta.is_nan() {
        return Err(Error::Domain(format!("invalid expander parameters alpha={alpha}, beta={beta}")));
    }
    let max = (floor_snap(alpha * g.n() as f64) as usize).min(g.n());
    let sizes: Vec<usize> = (1..=max).collect();
    let pools = [Pool::side(g, Side::L), Pool::side(g, Side::R)];
    run_scan(
        &pools,
        &sizes,
        mode,
        "expander check",
        Box::new(move |pool, combo, union| {
            pool.outside_count(combo, union) as f64 + FLOAT_SLACK >= beta * combo.len() as f64
        }),
    )
}

/// (a,b)-cover: every one-side U with |U| ≥ an has |N(U)| > (1−b)n. Only
/// the smallest admissible size is scanned; growing U cannot shrink N(U).
pub fn has_cover_property(g: &BipartiteGraph, a: f64, b: f64, mode: CheckMode) -> Result<PropertyVerdict> {
    if !(a > 0.0 && b > 0.0 && b <= 1.0) {
        return Err(Error::Domain(format!("cover property needs 0 < a and 0 < b <= 1, got a={a}, b={b}")));
    }
    let n = g.n();
    let k = (ceil_snap(a * n as f64) as usize).max(1);
    let sizes: Vec<usize> = if k <= n { vec![k] } else { Vec::new() };
    let threshold = (1.0 - b) * n as f64;
    let pools = [Pool::side(g, Side::L), Pool::side(g, Side::R)];
    run_scan(
        &pools,
        &sizes,
        mode,
        "cover check",
        Box::new(move |pool, combo, union| pool.outside_count(combo, union) as f64 > threshold + FLOAT_SLACK),
    )
}

/// |N(U)| ≥ (β−1)|U| for every U ⊆ L ∪ R with |U| ≤ αn; implied by
/// (α,β)-expansion.
pub fn beta_minus_one_expansion_holds(g: &BipartiteGraph, alpha: f64, beta: f64, mode: CheckMode) -> Result<PropertyVerdict> {
    if alpha < 0.0 || beta.is_nan() {
        return Err(Error::Domain(format!("invalid expander parameters alpha={alpha}, beta={beta}")));
    }
    let max = (floor_snap(alpha * g.n() as f64) as usize).min(g.vertex_count());
    let sizes: Vec<usize> = (1..=max).collect();
    let pools = [Pool::mixed(g)];
    run_scan(
        &pools,
        &sizes,
        mode,
        "mixed expansion check",
        Box::new(move |pool, combo, union| {
            pool.outside_count(combo, union) as f64 + FLOAT_SLACK >= (beta - 1.0) * combo.len() as f64
        }),
    )
}

/// Convenience: vertex set of one side.
pub fn side_set(g: &BipartiteGraph, side: Side) -> VertexSet {
    g.side_vertices(side).collect()
}

#[allow(dead_code)]
#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Vertex;
    use crate::graph::fixtures::*;
    use crate::random::{sample_graph, SampleConfig};

    const L0: Vertex = Vertex::left(0);
    const L1: Vertex = Vertex::left(1);

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        // 2 - (3/4)·log2(3) evaluated independently
        let expected = 2.0 - 0.75 * 3f64.log2();
        assert!((binary_entropy(0.25).unwrap() - 0.811278).abs() < 1e-6);
        assert!((binary_entropy(0.25).unwrap() - expected).abs() < 1e-15);
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(-0.1).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(60, 30), 118264581564861424);
    }

    #[test]
    fn threshold_anchors() {
        let at = |d: usize| {
            let p = regime_parameters(RegimeMode::IsHigh, d, None, true).unwrap();
            expander_threshold_margin(d, p.alpha, p.beta).unwrap()
        };
        let (f52, f53) = (at(52), at(53));
        assert!((f52 + 0.06).abs() < 0.01, "f(52) = {f52}");
        assert!((f53 - 0.11).abs() < 0.01, "f(53) = {f53}");
        assert!((is_high_threshold_margin(52) - f52).abs() < 1e-9);
        assert!((is_high_threshold_margin(53) - f53).abs() < 1e-9);
    }

    #[test]
    fn margin_domain_errors() {
        // α = 1/2 < 1/β = 2/3 satisfies the ordering, so this one is accepted
        assert!(expander_threshold_margin(10, 0.5, 1.5).is_ok());
        assert!(matches!(expander_threshold_margin(10, 0.7, 1.5), Err(Error::Domain(_))));
        assert!(matches!(expander_threshold_margin(10, 0.1, 0.9), Err(Error::Domain(_))));
    }

    #[test]
    fn margin_increases_with_degree() {
        let mut prev = f64::NEG_INFINITY;
        for d in 53..=1000 {
            let p = regime_parameters(RegimeMode::IsHigh, d, None, false).unwrap();
            let f = expander_threshold_margin(d, p.alpha, p.beta).unwrap();
            assert!(f > prev, "not increasing at {d}");
            prev = f;
        }
    }

    #[test]
    fn regimes() {
        let p = regime_parameters(RegimeMode::IsHigh, 53, None, false).unwrap();
        assert_eq!(p.alpha, 2.9 / 53.0);
        assert!((p.beta - 14.278).abs() < 1e-3);
        assert!(matches!(regime_parameters(RegimeMode::IsHigh, 52, None, false), Err(Error::Regime(_))));

        let d = 10f64.exp().round() as usize;
        let p = regime_parameters(RegimeMode::IsLow, d, None, true).unwrap();
        let ln = (d as f64).ln();
        assert!((p.alpha - ln * ln / d as f64).abs() < 1e-15);
        assert!((p.beta - 1.0 / (3.0 * p.alpha)).abs() < 1e-9);
        assert!((p.lambda_l.unwrap() - ln.powi(4) / d as f64).abs() < 1e-15);

        let p = regime_parameters(RegimeMode::Coloring, 102_400, Some(3), false).unwrap();
        assert_eq!(p.s, Some(1.0 / 576.0));
        assert!((p.alpha - 1.0 / 320.0).abs() < 1e-15);
        assert!((p.beta - 320.0 / 3.0).abs() < 1e-12);
        assert!(matches!(regime_parameters(RegimeMode::Coloring, 102_399, Some(3), false), Err(Error::Regime(_))));
        assert!(regime_parameters(RegimeMode::Coloring, 100, None, true).is_err());
    }

    #[test]
    fn is_low_forced_at_e10() {
        // Δ = e^10 is not an integer; check the formulas directly at the real point
        let d = 10f64.exp();
        let alpha = 100.0 / d;
        assert!((alpha - 10f64.powi(2) / d).abs() < 1e-18);
        assert!(((1.0 / (3.0 * alpha)) - d / 300.0).abs() < 1e-9);
    }

    #[test]
    fn expander_examples() {
        let g = k22();
        let v = is_expander(&g, 1.0, 1.0, CheckMode::exact()).unwrap();
        assert!(v.holds && v.is_proof);
        let v = is_expander(&g, 1.0, 2.0, CheckMode::exact()).unwrap();
        assert!(!v.holds);
        assert_eq!(v.witness.unwrap(), [L0, L1].into_iter().collect());
        assert!(is_expander(&g, 0.5, 2.0, CheckMode::exact()).unwrap().holds);
    }

    #[test]
    fn expander_budget() {
        let g = sample_graph(&SampleConfig::new(30, 3, 1).unwrap());
        let err = is_expander(&g, 0.5, 1.5, CheckMode::Exact { budget: 1000 }).unwrap_err();
        assert!(matches!(err, Error::Resource { .. }));
        let v = is_expander(&g, 0.5, 1.5, CheckMode::Auto { budget: 1000, per_size: 5, seed: 1 }).unwrap();
        assert_eq!(v.method, VerdictMethod::Sampled);
        assert!(!v.is_proof);
    }

    #[test]
    fn cover_examples() {
        let v = has_cover_property(&k22(), 0.5, 0.4, CheckMode::exact()).unwrap();
        assert!(v.holds);
        let v = has_cover_property(&two_edges(), 0.5, 0.4, CheckMode::exact()).unwrap();
        assert!(!v.holds);
        assert_eq!(v.witness.unwrap(), [L0].into_iter().collect());
        for seed in 0..5 {
            let g = sample_graph(&SampleConfig::new(6, 2, seed).unwrap());
            assert!(has_cover_property(&g, 0.3, 1.0, CheckMode::exact()).unwrap().holds);
        }
    }

    #[test]
    fn mixed_expansion_examples() {
        let v = beta_minus_one_expansion_holds(&k22(), 1.0, 2.0, CheckMode::exact()).unwrap();
        assert!(v.holds);
        for seed in 0..5 {
            let g = sample_graph(&SampleConfig::new(5, 2, seed).unwrap());
            assert!(beta_minus_one_expansion_holds(&g, 1.0, 1.0, CheckMode::exact()).unwrap().holds);
        }
    }

    #[test]
    fn expansion_implies_mixed_expansion() {
        for seed in 0..40 {
            let g = sample_graph(&SampleConfig::new(6, 3, seed).unwrap());
            for (alpha, beta) in [(0.34, 2.0), (0.5, 1.5), (0.2, 3.0)] {
                if is_expander(&g, alpha, beta, CheckMode::exact()).unwrap().holds {
                    assert!(beta_minus_one_expansion_holds(&g, alpha, beta, CheckMode::exact()).unwrap().holds);
                }
            }
        }
    }

    #[test]
    fn exact_witness_is_smallest() {
        // Brute force over all one-side subsets in witness order.
        for seed in 0..20 {
            let g = sample_graph(&SampleConfig::new(5, 2, seed).unwrap());
            let v = is_expander(&g, 0.8, 1.6, CheckMode::exact()).unwrap();
            let mut expected = None;
            'outer: for k in 1..=4usize {
                for side in [Side::L, Side::R] {
                    let mut subsets: Vec<VertexSet> = (0u32..32)
                        .filter(|m| m.count_ones() as usize == k)
                        .map(|m| (0..5).filter(|i| m >> i & 1 == 1).map(|i| Vertex { side, index: i }).collect())
                        .collect();
                    subsets.sort();
                    for u in subsets {
                        if (g.neighborhood(&u).unwrap().len() as f64) < 1.6 * k as f64 {
                            expected = Some(u);
                            break 'outer;
                        }
                    }
                }
            }
            assert_eq!(v.witness, expected);
        }
    }
}
