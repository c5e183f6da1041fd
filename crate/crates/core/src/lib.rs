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

//! Polymer-model counting of weighted independent sets and proper colorings
//! on random regular bipartite graphs, with brute-force oracles and checks
//! of the structural properties the approximations rely on.

pub mod coloring;
pub mod error;
pub mod expansion;
pub mod graph;
pub mod harness;
pub mod hardcore;
pub mod oracle;
pub mod par;
pub mod polymer;
pub mod props;
pub mod random;

pub use error::{Error, Result};
pub use graph::{BipartiteGraph, Side, Vertex, VertexSet};
pub use num_rational::BigRational;
