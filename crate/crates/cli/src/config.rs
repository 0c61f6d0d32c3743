//! Configuration documents: one JSON file describes a family, the flow
//! truncation, the backend, and an optional tolerance override.
//!
//! Numbers are written either as a plain float (`0.5`) or as a two-element
//! array `[re, im]` for complex values.  On the exact backend every float
//! literal is converted to its exact binary-rational value, so
//! parse → build → serialize → rebuild reproduces the model bit for bit.

use kptau::{Error, FamilySpec, JordanSpec, Matrix, Result, Scalar};
use serde::{Deserialize, Serialize};

/// A config number: real or `[re, im]`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Real(f64),
    Pair([f64; 2]),
}

impl Num {
    pub fn to_scalar<S: Scalar>(self) -> Result<S> {
        let (re, im) = match self {
            Num::Real(re) => (re, 0.0),
            Num::Pair([re, im]) => (re, im),
        };
        if !re.is_finite() || !im.is_finite() {
            return Err(Error::BadInput("non-finite number in config".into()));
        }
        Ok(S::from_re_im(re, im))
    }
}

/// One Jordan block: eigenvalue and size.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockCfg {
    pub eigenvalue: Num,
    pub size: usize,
}

/// The family section of a config document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilyCfg {
    Rational {
        n: usize,
        k: usize,
        c: Vec<Vec<Num>>,
    },
    Soliton {
        betas: Vec<Num>,
        c: Vec<Vec<Num>>,
    },
    Cauchy {
        betas: Vec<Num>,
        deltas: Vec<Num>,
        c: Vec<Vec<Num>>,
    },
    CalogeroMoser {
        z: Vec<Num>,
        xi: Vec<Num>,
    },
    GenericJordan {
        b: Vec<BlockCfg>,
        d: Vec<BlockCfg>,
        c: Vec<Vec<Num>>,
        f: Vec<Vec<Num>>,
    },
}

/// A full configuration document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub family: FamilyCfg,
    /// Flow truncation: commands reject time vectors longer than this.
    #[serde(default = "default_kflow")]
    pub kflow: usize,
    /// "exact" or "float"; the --backend flag overrides.
    #[serde(default)]
    pub backend: Option<String>,
    /// Relative tolerance override for residual judgments on the float
    /// backend.
    #[serde(default)]
    pub tol: Option<f64>,
}

fn default_kflow() -> usize {
    8
}

pub fn parse_config(text: &str) -> Result<Config> {
    serde_json::from_str(text).map_err(|e| Error::BadInput(format!("config parse error: {e}")))
}

fn matrix_from<S: Scalar>(rows: &[Vec<Num>], what: &str) -> Result<Matrix<S>> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::BadInput(format!("{what}: empty matrix")));
    }
    let width = rows[0].len();
    if rows.iter().any(|r| r.len() != width) {
        return Err(Error::BadInput(format!("{what}: ragged rows")));
    }
    let mut data = Vec::with_capacity(rows.len() * width);
    for r in rows {
        for v in r {
            data.push(v.to_scalar::<S>()?);
        }
    }
    Ok(Matrix::from_rows(
        data.chunks(width).map(|c| c.to_vec()).collect(),
    ))
}

fn vector_from<S: Scalar>(vals: &[Num]) -> Result<Vec<S>> {
    vals.iter().map(|v| v.to_scalar::<S>()).collect()
}

fn spec_from<S: Scalar>(blocks: &[BlockCfg], what: &str) -> Result<JordanSpec<S>> {
    if blocks.is_empty() {
        return Err(Error::BadInput(format!("{what}: no Jordan blocks")));
    }
    JordanSpec::from_pairs(
        blocks
            .iter()
            .map(|b| Ok((b.eigenvalue.to_scalar::<S>()?, b.size)))
            .collect::<Result<Vec<_>>>()?,
    )
}

/// Instantiate the family over a backend.
pub fn family_spec<S: Scalar>(cfg: &FamilyCfg) -> Result<FamilySpec<S>> {
    Ok(match cfg {
        FamilyCfg::Rational { n, k, c } => FamilySpec::Rational {
            n: *n,
            k: *k,
            c: matrix_from(c, "c")?,
        },
        FamilyCfg::Soliton { betas, c } => FamilySpec::Soliton {
            betas: vector_from(betas)?,
            c: matrix_from(c, "c")?,
        },
        FamilyCfg::Cauchy { betas, deltas, c } => FamilySpec::Cauchy {
            betas: vector_from(betas)?,
            deltas: vector_from(deltas)?,
            c: matrix_from(c, "c")?,
        },
        FamilyCfg::CalogeroMoser { z, xi } => FamilySpec::CalogeroMoser {
            z: vector_from(z)?,
            xi: vector_from(xi)?,
        },
        FamilyCfg::GenericJordan { b, d, c, f } => FamilySpec::GenericJordan {
            bspec: spec_from(b, "b")?,
            dspec: spec_from(d, "d")?,
            c: matrix_from(c, "c")?,
            fmat: matrix_from(f, "f")?,
        },
    })
}
