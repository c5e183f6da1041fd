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

//! Regular bipartite multigraphs stored as the union of their perfect matchings.
//!
//! Vertices carry their side explicitly. Internally every vertex also has a
//! flat id: left vertex `i` is `i`, right vertex `j` is `n + j`. Adjacency keeps
//! parallel edges (so every degree is exactly Δ), while the square graph G²,
//! which joins vertices at distance one or two, is deduplicated.

use std::collections::VecDeque;
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    L,
    R,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::L => Side::R,
            Side::R => Side::L,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::L => "L",
            Side::R => "R",
        })
    }
}

/// A vertex of a bipartite graph, ordered left-before-right then by index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vertex {
    pub side: Side,
    pub index: u32,
}

impl Vertex {
    pub const fn left(index: u32) -> Self {
        Vertex { side: Side::L, index }
    }

    pub const fn right(index: u32) -> Self {
        Vertex { side: Side::R, index }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.side {
            Side::L => write!(f, "l{}", self.index),
            Side::R => write!(f, "r{}", self.index),
        }
    }
}

/// A duplicate-free, sorted set of vertices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(Vec<Vertex>);

impl VertexSet {
    pub fn new() -> Self {
        VertexSet(Vec::new())
    }

    /// Builds a set from already sorted, duplicate-free vertices.
    pub(crate) fn from_sorted(v: Vec<Vertex>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        VertexSet(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = Vertex> + Clone + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[Vertex] {
        &self.0
    }

    pub fn insert(&mut self, v: Vertex) -> bool {
        match self.0.binary_search(&v) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, v);
                true
            }
        }
    }

    pub fn count_on(&self, side: Side) -> usize {
        self.0.iter().filter(|v| v.side == side).count()
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }
}

impl FromIterator<Vertex> for VertexSet {
    fn from_iter<I: IntoIterator<Item = Vertex>>(iter: I) -> Self {
        let mut v: Vec<Vertex> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        VertexSet(v)
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("}")
    }
}

/// Δ-regular bipartite multigraph with `n` vertices per side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteGraph {
    n: usize,
    delta: usize,
    matchings: Vec<Vec<u32>>,
    adj: Vec<Vec<u32>>,
    sq_adj: Vec<Vec<u32>>,
}

impl BipartiteGraph {
    /// Builds the graph whose edge multiset is the union of the matchings;
    /// matching `i` joins left `j` to right `matchings[i][j]`.
    pub fn new(n: usize, delta: usize, matchings: Vec<Vec<u32>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::malformed(None, "n must be at least 1"));
        }
        if delta == 0 {
            return Err(Error::malformed(None, "delta must be at least 1"));
        }
        if matchings.len() != delta {
            return Err(Error::malformed(
                None,
                format!("expected {delta} matchings, got {}", matchings.len()),
            ));
        }
        for (i, m) in matchings.iter().enumerate() {
            check_permutation(m, n).map_err(|msg| Error::malformed(None, format!("matching {i}: {msg}")))?;
        }

        let mut adj = vec![Vec::with_capacity(delta); 2 * n];
        for m in &matchings {
            for (l, &r) in m.iter().enumerate() {
                adj[l].push(n as u32 + r);
                adj[n + r as usize].push(l as u32);
            }
        }

        let mut sq_adj = Vec::with_capacity(2 * n);
        let mut seen = FixedBitSet::with_capacity(2 * n);
        for u in 0..2 * n {
            seen.clear();
            seen.insert(u);
            let mut list = Vec::new();
            for &w in &adj[u] {
                if !seen.put(w as usize) {
                    list.push(w);
                }
                for &x in &adj[w as usize] {
                    if !seen.put(x as usize) {
                        list.push(x);
                    }
                }
            }
            list.sort_unstable();
            sq_adj.push(list);
        }

        Ok(BipartiteGraph {
            n,
            delta,
            matchings,
            adj,
            sq_adj,
        })
    }

    /// Vertices per side.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn matchings(&self) -> &[Vec<u32>] {
        &self.matchings
    }

    pub fn vertex_count(&self) -> usize {
        2 * self.n
    }

    pub fn id(&self, v: Vertex) -> usize {
        match v.side {
            Side::L => v.index as usize,
            Side::R => self.n + v.index as usize,
        }
    }

    pub fn vertex(&self, id: usize) -> Vertex {
        if id < self.n {
            Vertex::left(id as u32)
        } else {
            Vertex::right((id - self.n) as u32)
        }
    }

    pub fn contains(&self, v: Vertex) -> bool {
        (v.index as usize) < self.n
    }

    pub fn side_vertices(&self, side: Side) -> impl Iterator<Item = Vertex> {
        (0..self.n as u32).map(move |index| Vertex { side, index })
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.side_vertices(Side::L).chain(self.side_vertices(Side::R))
    }

    /// Neighbors by flat id, with multiplicity.
    pub fn neighbor_ids(&self, id: usize) -> &[u32] {
        &self.adj[id]
    }

    /// G² neighbors by flat id, sorted, excluding `id` itself.
    pub fn square_neighbor_ids(&self, id: usize) -> &[u32] {
        &self.sq_adj[id]
    }

    pub fn neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        self.adj[self.id(v)].iter().map(|&w| self.vertex(w as usize))
    }

    pub fn square_neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        self.sq_adj[self.id(v)].iter().map(|&w| self.vertex(w as usize))
    }

    pub fn max_square_degree(&self) -> usize {
        self.sq_adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_square_adjacent(&self, u: Vertex, v: Vertex) -> bool {
        self.sq_adj[self.id(u)].binary_search(&(self.id(v) as u32)).is_ok()
    }

    /// N_G(U): vertices adjacent to some member of `u`, minus `u` itself.
    pub fn neighborhood(&self, u: &VertexSet) -> Result<VertexSet> {
        if u.is_empty() {
            return Err(Error::Precondition("neighborhood of the empty set".into()));
        }
        let bits = self.neighborhood_bits(u.iter().map(|v| self.id(v)));
        Ok(self.set_from_bits(&bits))
    }

    /// Neighborhood as a bitset over flat ids (members of the input removed).
    pub(crate) fn neighborhood_bits(&self, ids: impl Iterator<Item = usize> + Clone) -> FixedBitSet {
        let mut bits = FixedBitSet::with_capacity(2 * self.n);
        for u in ids.clone() {
            for &w in &self.adj[u] {
                bits.insert(w as usize);
            }
        }
        for u in ids {
            bits.set(u, false);
        }
        bits
    }

    pub(crate) fn set_from_bits(&self, bits: &FixedBitSet) -> VertexSet {
        VertexSet::from_sorted(bits.ones().map(|id| self.vertex(id)).collect())
    }

    /// Connected components of G² induced on `u`, each sorted, listed by
    /// smallest member.
    pub fn square_components(&self, u: &VertexSet) -> Vec<VertexSet> {
        let mut inside = FixedBitSet::with_capacity(2 * self.n);
        for v in u.iter() {
            inside.insert(self.id(v));
        }
        let mut done = FixedBitSet::with_capacity(2 * self.n);
        let mut out = Vec::new();
        for start in u.iter().map(|v| self.id(v)) {
            if done.contains(start) {
                continue;
            }
            let mut comp = vec![start];
            done.insert(start);
            let mut head = 0;
            while head < comp.len() {
                let x = comp[head];
                head += 1;
                for &y in &self.sq_adj[x] {
                    let y = y as usize;
                    if inside.contains(y) && !done.put(y) {
                        comp.push(y);
                    }
                }
            }
            comp.sort_unstable();
            out.push(VertexSet::from_sorted(comp.into_iter().map(|id| self.vertex(id)).collect()));
        }
        out
    }

    /// BFS distance in G; `None` when disconnected.
    pub fn distance(&self, u: Vertex, v: Vertex) -> Option<usize> {
        let (s, t) = (self.id(u), self.id(v));
        if s == t {
            return Some(0);
        }
        let mut dist = vec![usize::MAX; 2 * self.n];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for &y in &self.adj[x] {
                let y = y as usize;
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    if y == t {
                        return Some(dist[y]);
                    }
                    queue.push_back(y);
                }
            }
        }
        None
    }

    /// Plain-text form: a `n delta` header line, then one permutation per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.delta);
        for m in &self.matchings {
            let row: Vec<String> = m.iter().map(u32::to_string).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    /// Parses the plain-text form. Blank lines and `#` comments are ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut rows = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let (hline, header) = rows.next().ok_or_else(|| Error::malformed(None, "empty graph file"))?;
        let head = parse_numbers(header, hline)?;
        if head.len() != 2 {
            return Err(Error::malformed(hline, "header must be `n delta`"));
        }
        let (n, delta) = (head[0] as usize, head[1] as usize);

        let mut matchings = Vec::with_capacity(delta);
        for (line, row) in rows {
            if matchings.len() == delta {
                return Err(Error::malformed(line, format!("more than {delta} matching rows")));
            }
            let perm = parse_numbers(row, line)?;
            check_permutation(&perm, n).map_err(|msg| Error::malformed(line, msg))?;
            matchings.push(perm);
        }
        if matchings.len() != delta {
            return Err(Error::malformed(
                None,
                format!("expected {delta} matching rows, found {}", matchings.len()),
            ));
        }
        Self::new(n, delta, matchings)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&GraphFile {
            n: self.n,
            delta: self.delta,
            matchings: self.matchings.clone(),
        })
        .expect("graph serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text)
            .map_err(|e| Error::malformed(Some(e.line()), e.to_string()))?;
        Self::new(file.n, file.delta, file.matchings)
    }

    /// Accepts either format, choosing JSON when the input starts with `{`.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::from_json(text)
        } else {
            Self::from_text(text)
        }
    }

    /// SHA-256 of the text form, hex encoded.
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    n: usize,
    delta: usize,
    matchings: Vec<Vec<u32>>,
}

fn parse_numbers(row: &str, line: usize) -> Result<Vec<u32>> {
    row.split_whitespace()
        .map(|tok| {
            tok.parse::<u32>()
                .map_err(|_| Error::malformed(line, format!("`{tok}` is not a non-negative integer")))
        })
        .collect()
}

fn check_permutation(perm: &[u32], n: usize) -> std::result::Result<(), String> {
    if perm.len() != n {
        return Err(format!("permutation has {} entries, expected {n}", perm.len()));
    }
    let mut seen = vec![false; n];
    for &x in perm {
        let x = x as usize;
        if x >= n {
            return Err(format!("entry {x} out of range 0..{n}"));
        }
        if std::mem::replace(&mut seen[x], true) {
            return Err(format!("entry {x} repeated"));
        }
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// K_{2,2}, i.e. the 4-cycle.
    pub fn k22() -> BipartiteGraph {
        BipartiteGraph::new(2, 2, vec![vec![0, 1], vec![1, 0]]).unwrap()
    }

    pub fn k11() -> BipartiteGraph {
        BipartiteGraph::new(1, 1, vec![vec![0]]).unwrap()
    }

    /// Two disjoint edges l0-r0 and l1-r1.
    pub fn two_edges() -> BipartiteGraph {
        BipartiteGraph::new(2, 1, vec![vec![0, 1]]).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    fn set(vs: &[Vertex]) -> VertexSet {
        vs.iter().copied().collect()
    }

    const L0: Vertex = Vertex::left(0);
    const L1: Vertex = Vertex::left(1);
    const R0: Vertex = Vertex::right(0);
    const R1: Vertex = Vertex::right(1);

    #[test]
    fn k22_is_complete_bipartite() {
        let g = k22();
        for l in [L0, L1] {
            let nb: VertexSet = g.neighbors(l).collect();
            assert_eq!(nb, set(&[R0, R1]));
        }
    }

    #[test]
    fn single_edge() {
        let g = k11();
        assert_eq!(g.neighbors(L0).collect::<Vec<_>>(), vec![R0]);
        assert_eq!(g.neighbors(R0).collect::<Vec<_>>(), vec![L0]);
    }

    #[test]
    fn doubled_matching_keeps_multiplicity() {
        let g = BipartiteGraph::new(2, 2, vec![vec![0, 1], vec![0, 1]]).unwrap();
        assert_eq!(g.neighbors(L0).collect::<Vec<_>>(), vec![R0, R0]);
        for v in g.vertices() {
            assert_eq!(g.neighbors(v).count(), 2);
        }
        // no same-side pairs in G²
        assert!(!g.is_square_adjacent(L0, L1));
        assert!(!g.is_square_adjacent(R0, R1));
        assert!(g.is_square_adjacent(L0, R0));
    }

    #[test]
    fn rejects_non_bijection() {
        let err = BipartiteGraph::new(2, 1, vec![vec![0, 0]]).unwrap_err();
        assert!(matches!(err, Error::Malformed { .. }));
        assert!(BipartiteGraph::new(2, 2, vec![vec![0, 1]]).is_err());
        assert!(BipartiteGraph::new(2, 1, vec![vec![0, 2]]).is_err());
    }

    #[test]
    fn neighborhood_examples() {
        let g = k22();
        assert_eq!(g.neighborhood(&set(&[L0])).unwrap(), set(&[R0, R1]));
        assert_eq!(g.neighborhood(&set(&[L0, R0])).unwrap(), set(&[L1, R1]));
        assert!(g.neighborhood(&set(&[L0, L1, R0, R1])).unwrap().is_empty());
        assert!(matches!(
            g.neighborhood(&VertexSet::new()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn square_component_examples() {
        assert_eq!(k22().square_components(&set(&[L0, L1])), vec![set(&[L0, L1])]);
        assert_eq!(
            two_edges().square_components(&set(&[L0, L1])),
            vec![set(&[L0]), set(&[L1])]
        );
        assert!(k22().square_components(&VertexSet::new()).is_empty());
    }

    #[test]
    fn distance_examples() {
        assert_eq!(k22().distance(L0, L1), Some(2));
        assert_eq!(k22().distance(R1, R1), Some(0));
        assert_eq!(two_edges().distance(L0, R1), None);
        assert_eq!(two_edges().distance(L0, R0), Some(1));
    }

    #[test]
    fn text_and_json_parse() {
        let g = k22();
        assert_eq!(BipartiteGraph::parse(&g.to_text()).unwrap(), g);
        assert_eq!(BipartiteGraph::parse(&g.to_json()).unwrap(), g);
        let commented = "# a 4-cycle\n2 2\n\n0 1  # identity\n1 0\n";
        assert_eq!(BipartiteGraph::parse(commented).unwrap(), g);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match BipartiteGraph::from_text("2 2\n0 1\n1 1\n") {
            Err(Error::Malformed { line: Some(3), .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match BipartiteGraph::from_text("2 1\n0 x\n") {
            Err(Error::Malformed { line: Some(2), .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(BipartiteGraph::from_text("").is_err());
        assert!(BipartiteGraph::from_text("2 2\n0 1\n").is_err());
    }

    fn arb_graph() -> impl Strategy<Value = BipartiteGraph> {
        (1usize..=6, 1usize..=4).prop_flat_map(|(n, d)| {
            let perm = Just((0..n as u32).collect::<Vec<_>>()).prop_shuffle();
            proptest::collection::vec(perm, d)
                .prop_map(move |ms| BipartiteGraph::new(n, d, ms).unwrap())
        })
    }

    proptest! {
        #[test]
        fn graph_invariants(g in arb_graph()) {
            let d = g.delta();
            for v in g.vertices() {
                prop_assert_eq!(g.neighbors(v).count(), d);
                prop_assert!(g.square_neighbors(v).count() <= d * d);
                for u in g.vertices() {
                    let close = u != v && g.distance(u, v).is_some_and(|x| x <= 2);
                    prop_assert_eq!(g.is_square_adjacent(u, v), close);
                }
            }
            prop_assert_eq!(BipartiteGraph::parse(&g.to_text()).unwrap(), g.clone());
        }

        #[test]
        fn neighborhood_excludes_set(g in arb_graph(), mask in 1u32..4096) {
            let u: VertexSet = g.vertices().filter(|v| mask >> (g.id(*v) % 12) & 1 == 1).collect();
            prop_assume!(!u.is_empty());
            let nb = g.neighborhood(&u).unwrap();
            prop_assert!(nb.is_disjoint(&u));
        }

        #[test]
        fn components_are_separated(g in arb_graph(), mask in 0u32..4096) {
            let u: VertexSet = g.vertices().filter(|v| mask >> (g.id(*v) % 12) & 1 == 1).collect();
            let comps = g.square_components(&u);
            prop_assert_eq!(comps.iter().map(VertexSet::len).sum::<usize>(), u.len());
            for (i, a) in comps.iter().enumerate() {
                for b in &comps[i + 1..] {
                    for x in a.iter() {
                        for y in b.iter() {
                            prop_assert!(x != y && !g.is_square_adjacent(x, y));
                        }
                    }
                }
            }
        }
    }
}
