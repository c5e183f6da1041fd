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

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Unparseable or structurally invalid input, e.g. a matching that is not a permutation.
    #[error("malformed input{}: {msg}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Malformed { line: Option<usize>, msg: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    /// Parameters fall outside the regime the counting guarantees are stated for.
    #[error("outside parameter regime: {0}")]
    Regime(String),

    #[error("invalid polymer: {0}")]
    Model(String),

    /// An exhaustive computation would exceed its configured work budget.
    #[error("budget exceeded: {what} needs {needed} work units, budget is {budget}")]
    Resource {
        what: &'static str,
        needed: u128,
        budget: u128,
    },
}

impl Error {
    pub(crate) fn malformed(line: impl Into<Option<usize>>, msg: impl Into<String>) -> Self {
        Error::Malformed {
            line: line.into(),
            msg: msg.into(),
        }
    }
}
