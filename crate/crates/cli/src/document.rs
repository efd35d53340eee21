//! Spec documents: parsing, validation and construction of the core objects.

use std::fmt;
use std::path::Path;

use crested_markov::crested::{ComponentChain, CrestedSpec};
use crested_markov::insect::{AlphaRule, InsectChain};
use crested_markov::markov::{stationary, Chain, Measure};
use crested_markov::poset::Poset;
use crested_markov::Error;
use nalgebra::DMatrix;
use serde::Deserialize;
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitKind {
    Schema = 2,
    Math = 3,
    SizeCap = 4,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ExitKind,
    pub message: String,
}

impl CliError {
    pub fn schema(message: impl Into<String>) -> Self {
        CliError {
            kind: ExitKind::Schema,
            message: message.into(),
        }
    }

    pub fn math(message: impl Into<String>) -> Self {
        CliError {
            kind: ExitKind::Math,
            message: message.into(),
        }
    }

    pub fn code(&self) -> i32 {
        self.kind as i32
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match e {
            Error::SizeCap(_) | Error::SizeLimit { .. } => ExitKind::SizeCap,
            Error::InvalidSpec(_) | Error::DimensionMismatch { .. } | Error::Index { .. } => ExitKind::Schema,
            _ => ExitKind::Math,
        };
        CliError {
            kind,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Crested,
    Insect,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Crested => "crested",
            Mode::Insect => "insect",
        })
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosetDoc {
    pub n: usize,
    /// `[lower, upper]`, 1-based.
    #[serde(default)]
    pub covers: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDoc {
    /// 1-based element label.
    pub index: usize,
    pub size: usize,
    #[serde(default)]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub sigma: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub poset: PosetDoc,
    pub components: Vec<ComponentDoc>,
    #[serde(default)]
    pub p0: Option<Vec<f64>>,
    pub mode: Mode,
    #[serde(default)]
    pub base_point: Option<Vec<usize>>,
}

/// A parsed document with its raw-input hash.
#[derive(Clone, Debug)]
pub struct Input {
    pub doc: SpecDocument,
    pub hash: String,
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn read_input(path: &Path) -> CliResult<Input> {
    let bytes = std::fs::read(path).map_err(|e| CliError::schema(format!("{}: {e}", path.display())))?;
    parse_input(&bytes)
}

pub fn parse_input(bytes: &[u8]) -> CliResult<Input> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let doc: SpecDocument = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::schema(format!("{path}: {}", e.inner()))
    })?;
    check_shape(&doc)?;
    Ok(Input {
        doc,
        hash: hex_digest(bytes),
    })
}

/// Structural checks that the type system cannot express.
fn check_shape(doc: &SpecDocument) -> CliResult<()> {
    let n = doc.poset.n;
    if n == 0 {
        return Err(CliError::schema("poset.n: must be at least 1"));
    }
    for (k, &[lo, hi]) in doc.poset.covers.iter().enumerate() {
        if lo == 0 || hi == 0 || lo > n || hi > n {
            return Err(CliError::schema(format!(
                "poset.covers[{k}]: labels must lie in 1..={n}"
            )));
        }
    }
    if doc.components.len() != n {
        return Err(CliError::schema(format!(
            "components: expected {n} entries, found {}",
            doc.components.len()
        )));
    }
    let mut seen = vec![false; n];
    for (k, c) in doc.components.iter().enumerate() {
        if c.index == 0 || c.index > n || std::mem::replace(&mut seen[c.index - 1], true) {
            return Err(CliError::schema(format!(
                "components[{k}].index: must be a distinct label in 1..={n}"
            )));
        }
        if c.size == 0 {
            return Err(CliError::schema(format!(
                "components[{k}].size: must be positive"
            )));
        }
        match (doc.mode, &c.matrix) {
            (Mode::Crested, None) => {
                return Err(CliError::schema(format!(
                    "components[{k}].matrix: required when mode is crested"
                )))
            }
            (_, Some(rows)) => {
                if rows.len() != c.size || rows.iter().any(|r| r.len() != c.size) {
                    return Err(CliError::schema(format!(
                        "components[{k}].matrix: expected {0}×{0}",
                        c.size
                    )));
                }
            }
            _ => {}
        }
        if let Some(s) = &c.sigma {
            if s.len() != c.size {
                return Err(CliError::schema(format!(
                    "components[{k}].sigma: expected {} entries",
                    c.size
                )));
            }
        }
    }
    match (doc.mode, &doc.p0) {
        (Mode::Crested, None) => return Err(CliError::schema("p0: required when mode is crested")),
        (_, Some(p)) if p.len() != n => {
            return Err(CliError::schema(format!(
                "p0: expected {n} entries, found {}",
                p.len()
            )))
        }
        _ => {}
    }
    if let Some(x) = &doc.base_point {
        if x.len() != n {
            return Err(CliError::schema(format!("base_point: expected {n} coordinates")));
        }
    }
    Ok(())
}

impl SpecDocument {
    pub fn poset(&self) -> CliResult<Poset> {
        let covers: Vec<(usize, usize)> = self.poset.covers.iter().map(|&[lo, hi]| (lo, hi)).collect();
        Ok(Poset::from_covers(self.poset.n, &covers)?)
    }

    /// Components in element order.
    pub fn ordered_components(&self) -> Vec<&ComponentDoc> {
        let mut v: Vec<&ComponentDoc> = self.components.iter().collect();
        v.sort_by_key(|c| c.index);
        v
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.ordered_components().iter().map(|c| c.size).collect()
    }

    pub fn base_point(&self) -> Vec<usize> {
        self.base_point.clone().unwrap_or_else(|| vec![0; self.poset.n])
    }

    /// Component chains, each validated as a stochastic matrix.
    pub fn chains(&self) -> CliResult<Vec<Chain>> {
        self.ordered_components()
            .iter()
            .map(|c| {
                let m = c.size;
                match &c.matrix {
                    Some(rows) => {
                        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
                        Chain::new(DMatrix::from_row_slice(m, m, &flat))
                            .map_err(|e| CliError::math(format!("component {}: {e}", c.index)))
                    }
                    None => Ok(Chain::uniform(m)),
                }
            })
            .collect()
    }

    pub fn insect(&self, rule: AlphaRule) -> CliResult<InsectChain> {
        if self.mode != Mode::Insect {
            return Err(CliError::schema("mode: this command needs mode insect"));
        }
        Ok(InsectChain::with_rule(self.poset()?, self.sizes(), rule)?)
    }

    /// The crested spec: given components and `p0`, or the Insect
    /// realization in insect mode.
    pub fn crested(&self, rule: AlphaRule) -> CliResult<CrestedSpec> {
        if self.mode == Mode::Insect {
            return self.insect(rule)?.to_crested().map_err(Into::into);
        }
        let poset = self.poset()?;
        let chains = self.chains()?;
        let components = chains
            .into_iter()
            .zip(self.ordered_components())
            .map(|(chain, c)| {
                let sigma = match &c.sigma {
                    Some(s) => Measure::from_slice(s),
                    None => stationary(&chain),
                }
                .map_err(|e| CliError::math(format!("component {}: {e}", c.index)))?;
                ComponentChain::new(chain, sigma)
                    .map_err(|e| CliError::math(format!("component {}: {e}", c.index)))
            })
            .collect::<CliResult<Vec<_>>>()?;
        let p0 = self.p0.clone().expect("checked for crested mode");
        Ok(CrestedSpec::new(poset, components, p0).map_err(|e| match e {
            Error::InvalidSpec(msg) => CliError::math(format!("p0: {msg}")),
            other => other.into(),
        })?)
    }
}

/// Parses `0,1,0` (or `010` when every coordinate is one digit).
pub fn parse_state(text: &str, sizes: &[usize]) -> CliResult<Vec<usize>> {
    let parts: Vec<&str> = if text.contains(',') {
        text.split(',').map(str::trim).collect()
    } else {
        text.split("").filter(|s| !s.is_empty()).collect()
    };
    if parts.len() != sizes.len() {
        return Err(CliError::schema(format!(
            "state '{text}': expected {} coordinates",
            sizes.len()
        )));
    }
    parts
        .iter()
        .zip(sizes)
        .enumerate()
        .map(|(i, (p, &m))| {
            let v: usize = p.parse().map_err(|_| {
                CliError::schema(format!("state '{text}': coordinate {} is not an integer", i + 1))
            })?;
            if v >= m {
                return Err(CliError::schema(format!(
                    "state '{text}': coordinate {} must be below {m}",
                    i + 1
                )));
            }
            Ok(v)
        })
        .collect()
}

pub fn format_state(x: &[usize], sizes: &[usize]) -> String {
    if sizes.iter().all(|&m| m <= 10) {
        x.iter().map(|v| v.to_string()).collect()
    } else {
        x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
    }
}
