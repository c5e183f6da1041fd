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

//! Truncated cluster expansion: coefficients of Ξ(z), their formal
//! logarithm, a zero-free-disk tail bound, and the resulting estimate of
//! ln Ξ(1).

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::Instant;

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;
use crate::oracle::OracleBudget;
use crate::par;
use crate::polymer::{enumerate_polymers, Polymer, PolymerModel};

/// Coefficients c_0..c_m of a truncated power series in z.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Series {
    pub coefficients: Vec<BigRational>,
}

impl Series {
    pub fn new(coefficients: Vec<BigRational>) -> Self {
        Series { coefficients }
    }

    pub fn order(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn eval(&self, z: &BigRational) -> BigRational {
        self.coefficients
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * z + c)
    }

    /// Σ_k c_k, i.e. the value at z = 1.
    pub fn sum(&self) -> BigRational {
        self.coefficients.iter().fold(BigRational::zero(), |a, c| a + c)
    }
}

/// c_k = Σ over compatible Γ with ‖Γ‖ = k of Π a_γ, for k ≤ m.
pub fn xi_coefficients<M: PolymerModel + ?Sized>(model: &M, m: usize, budget: OracleBudget) -> Result<Series> {
    let polymers = enumerate_polymers(model, m)?;
    xi_coefficients_over(model.graph(), &polymers, m, budget)
}

/// As [`xi_coefficients`], over an explicit polymer list in canonical order.
pub fn xi_coefficients_over(g: &BipartiteGraph, polymers: &[Polymer], m: usize, budget: OracleBudget) -> Result<Series> {
    let support_ids: Vec<Vec<usize>> = polymers
        .iter()
        .map(|p| p.support.iter().map(|v| g.id(v)).collect())
        .collect();
    // closed G² neighborhood of each support
    let blocks: Vec<FixedBitSet> = support_ids
        .iter()
        .map(|ids| {
            let mut b = FixedBitSet::with_capacity(g.vertex_count());
            for &u in ids {
                b.insert(u);
                for &w in g.square_neighbor_ids(u) {
                    b.insert(w as usize);
                }
            }
            b
        })
        .collect();
    let sizes: Vec<usize> = polymers.iter().map(Polymer::size).collect();
    let work = AtomicU64::new(0);
    let exceeded = AtomicBool::new(false);

    struct Walk<'a> {
        support_ids: &'a [Vec<usize>],
        blocks: &'a [FixedBitSet],
        sizes: &'a [usize],
        polymers: &'a [Polymer],
        m: usize,
        work: &'a AtomicU64,
        exceeded: &'a AtomicBool,
        budget: u128,
    }

    impl Walk<'_> {
        fn go(&self, blocked: &FixedBitSet, start: usize, total: usize, prod: &BigRational, coeffs: &mut [BigRational]) {
            coeffs[total] += prod;
            for j in start..self.polymers.len() {
                if total + self.sizes[j] > self.m || self.exceeded.load(Ordering::Relaxed) {
                    break;
                }
                if self.work.fetch_add(1, Ordering::Relaxed) as u128 >= self.budget {
                    self.exceeded.store(true, Ordering::Relaxed);
                    break;
                }
                if self.support_ids[j].iter().any(|&u| blocked.contains(u)) {
                    continue;
                }
                let mut next = blocked.clone();
                next.union_with(&self.blocks[j]);
                self.go(&next, j + 1, total + self.sizes[j], &(prod * &self.polymers[j].weight), coeffs);
            }
        }
    }

    let walk = Walk {
        support_ids: &support_ids,
        blocks: &blocks,
        sizes: &sizes,
        polymers,
        m,
        work: &work,
        exceeded: &exceeded,
        budget: budget.max_enumeration,
    };
    let branches = par::map_range(polymers.len(), |i| {
        let mut coeffs = vec![BigRational::zero(); m + 1];
        if sizes[i] <= m {
            walk.go(&blocks[i], i + 1, sizes[i], &polymers[i].weight, &mut coeffs);
        }
        coeffs
    });
    if exceeded.load(Ordering::Relaxed) {
        return Err(Error::Resource {
            what: "coefficient extraction",
            needed: work.load(Ordering::Relaxed) as u128,
            budget: budget.max_enumeration,
        });
    }
    let mut coeffs = vec![BigRational::zero(); m + 1];
    coeffs[0] = BigRational::one();
    for b in branches {
        for (c, x) in coeffs.iter_mut().zip(b) {
            *c += x;
        }
    }
    Ok(Series::new(coeffs))
}

/// Formal logarithm of a series with c_0 = 1. The result has the same order
/// and a zero constant term.
pub fn log_series(xi: &Series) -> Result<Series> {
    let c = &xi.coefficients;
    if c.first() != Some(&BigRational::one()) {
        return Err(Error::malformed(None, "log_series needs a series with constant term 1"));
    }
    let m = xi.order();
    let mut p = vec![BigRational::zero(); m + 1];
    for k in 1..=m {
        let kk = BigRational::from_integer(BigInt::from(k));
        let mut acc = &kk * &c[k];
        for j in 1..k {
            acc -= BigRational::from_integer(BigInt::from(j)) * &p[j] * &c[k - j];
        }
        p[k] = acc / kk;
    }
    Ok(Series::new(p))
}

/// Formal exponential of a series with zero constant term.
pub fn exp_series(p: &Series) -> Result<Series> {
    let p = &p.coefficients;
    if p.first().is_some_and(|c| !c.is_zero()) {
        return Err(Error::malformed(None, "exp_series needs a zero constant term"));
    }
    let m = p.len().saturating_sub(1);
    let mut g = vec![BigRational::zero(); m + 1];
    g[0] = BigRational::one();
    for k in 1..=m {
        let mut acc = BigRational::zero();
        for j in 1..=k {
            acc += BigRational::from_integer(BigInt::from(j)) * &p[j] * &g[k - j];
        }
        g[k] = acc / BigRational::from_integer(BigInt::from(k));
    }
    Ok(Series::new(g))
}

/// degree·R^{−(m+1)} / ((m+1)(1 − 1/R)): bound on |Σ_{k>m} p_k| when Ξ has
/// at most `degree` zeros, all of modulus at least R.
pub fn tail_bound(degree: usize, radius: f64, m: usize) -> f64 {
    if degree == 0 {
        return 0.0;
    }
    let k = (m + 1) as f64;
    degree as f64 * (-k * radius.ln()).exp() / (k * (1.0 - 1.0 / radius))
}

/// Smallest m whose tail bound is at most `eps`.
pub fn truncation_order(degree: usize, radius: f64, eps: f64) -> Result<usize> {
    if !(radius > 1.0) || !radius.is_finite() {
        return Err(Error::Domain(format!("truncation radius must exceed 1, got {radius}")));
    }
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    let mut m = 0;
    while tail_bound(degree, radius, m) > eps {
        m += 1;
    }
    Ok(m)
}

/// Natural log of a positive rational, accurate for numbers far outside the
/// f64 range.
pub fn ln_rational(r: &BigRational) -> f64 {
    if !r.is_positive() {
        return f64::NEG_INFINITY;
    }
    ln_bigint(r.numer()) - ln_bigint(r.denom())
}

fn ln_bigint(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().map_or(f64::INFINITY, f64::ln);
    }
    let shift = bits - 64;
    let top: BigInt = x >> shift;
    top.to_f64().map_or(f64::INFINITY, f64::ln) + shift as f64 * std::f64::consts::LN_2
}

/// ln(e^a + e^b).
pub fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    BruteForce,
    PolymerPipeline,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub truncation_order: Option<usize>,
    pub polymer_count: Option<usize>,
    pub radius: Option<f64>,
    pub degree: Option<usize>,
    /// Wall-clock seconds per phase; excluded from reproducibility checks.
    pub timings: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

/// An approximation of ln Z with a bound on |ln Ẑ − ln Z|.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub log_value: f64,
    /// The exact value when one was computed.
    pub exact: Option<BigRational>,
    pub relative_error_bound: f64,
    pub method: Method,
    /// False when the truncation order was user-supplied or a regime
    /// precondition was forced.
    pub certified: bool,
    pub diagnostics: Diagnostics,
}

impl Estimate {
    pub fn exact(value: BigRational, method: Method) -> Self {
        Estimate {
            log_value: ln_rational(&value),
            exact: Some(value),
            relative_error_bound: 0.0,
            method,
            certified: true,
            diagnostics: Diagnostics::default(),
        }
    }
}

/// Estimates ln Ξ(1) by Σ_{k≤m} p_k with m from the tail bound at `radius`
/// unless overridden.
pub fn estimate_log_xi<M: PolymerModel + ?Sized>(
    model: &M,
    eps: f64,
    radius: f64,
    m_override: Option<usize>,
    budget: OracleBudget,
) -> Result<Estimate> {
    let start = Instant::now();
    let degree = model.structural_degree();
    let m = match m_override {
        Some(m) => m,
        None => truncation_order(degree, radius, eps)?,
    };
    if !(radius > 1.0) {
        return Err(Error::Domain(format!("truncation radius must exceed 1, got {radius}")));
    }
    let polymers = enumerate_polymers(model, m)?;
    let enumerated = start.elapsed().as_secs_f64();
    let xi = xi_coefficients_over(model.graph(), &polymers, m, budget)?;
    let p = log_series(&xi)?;
    let value = p.sum();
    // no polymers at all: Ξ ≡ 1
    let exhausted = polymers.is_empty() && m >= model.max_polymer_size().min(degree);
    let mut diagnostics = Diagnostics {
        truncation_order: Some(m),
        polymer_count: Some(polymers.len()),
        radius: Some(radius),
        degree: Some(degree),
        ..Default::default()
    };
    diagnostics.timings.insert("enumerate".into(), enumerated);
    diagnostics.timings.insert("total".into(), start.elapsed().as_secs_f64());
    if m_override.is_some() {
        diagnostics.notes.push(format!("truncation order {m} set by caller"));
    }
    Ok(Estimate {
        log_value: value.to_f64().unwrap_or(f64::NAN),
        exact: None,
        relative_error_bound: if exhausted { 0.0 } else { tail_bound(degree, radius, m) },
        method: Method::PolymerPipeline,
        certified: m_override.is_none(),
        diagnostics,
    })
}
