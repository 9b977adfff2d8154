//! Per-corpus expectation metadata.
//!
//! ```toml
//! [bad]
//! monge_ampere = false
//!
//! [weighted]
//! degenerate_point = "1,0"
//!
//! [mixed.checks]
//! leaf_strata = "skip"
//! ```
//!
//! Tables are keyed by file stem. Potentials without a table are expected
//! to solve the Monge-Ampère equation and pass every check.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use crate::checks::{checks, Status};

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PotentialExpectation {
    #[serde(default = "yes")]
    pub monge_ampere: bool,
    /// A point with `det H = 0`, used for Θ-orbit and leaf stratum checks.
    pub degenerate_point: Option<String>,
    /// Base point of the traced leaf; sampled when absent.
    pub leaf_base: Option<String>,
    /// Per-check overrides of the expected status.
    #[serde(default)]
    pub checks: BTreeMap<String, Status>,
}

fn yes() -> bool {
    true
}

impl Default for PotentialExpectation {
    fn default() -> Self {
        Self {
            monge_ampere: true,
            degenerate_point: None,
            leaf_base: None,
            checks: BTreeMap::new(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Expectations(BTreeMap<String, PotentialExpectation>);

impl Expectations {
    pub fn parse(text: &str) -> Result<Self> {
        let map: BTreeMap<String, PotentialExpectation> = toml::from_str(text)?;
        let registry = checks();
        for (pot, e) in &map {
            for name in e.checks.keys() {
                if registry.get(name).is_err() {
                    bail!("[{pot}.checks]: unknown check '{name}' (available: {})", registry.names().join(", "));
                }
            }
        }
        Ok(Self(map))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn get(&self, stem: &str) -> PotentialExpectation {
        self.0.get(stem).cloned().unwrap_or_default()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }
}
