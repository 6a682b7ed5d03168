//! JSON model files and a flat coordinate export for quadratic models.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FactorLayout, FactorModel};
use crate::poly::{BinaryPolynomial, VarId};
use crate::quadratize::ReductionLedger;

pub const FORMAT_VERSION: &str = "1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermEntry {
    pub vars: Vec<u32>,
    #[serde(with = "super::decimal")]
    pub coeff: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelMetadata {
    #[serde(with = "super::decimal")]
    pub big_n: BigInt,
    pub n: u32,
    pub fix_lsb: bool,
    #[serde(with = "super::decimal")]
    pub s_i: BigInt,
    #[serde(with = "super::decimal")]
    pub s_j: BigInt,
    #[serde(with = "super::decimal")]
    pub paper_gme: BigInt,
    /// Constant moved into the offset by quadratization gadgets.
    #[serde(with = "super::decimal", default = "BigInt::default")]
    pub constant_shift: BigInt,
}

/// On-disk form of a [`FactorModel`]. Terms are listed in canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: String,
    pub variables: usize,
    pub degree: usize,
    #[serde(with = "super::decimal")]
    pub offset: BigInt,
    pub terms: Vec<TermEntry>,
    pub metadata: ModelMetadata,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ledger: Option<ReductionLedger>,
}

impl ModelFile {
    pub fn new(model: &FactorModel, ledger: Option<&ReductionLedger>) -> Self {
        ModelFile {
            format_version: FORMAT_VERSION.to_string(),
            variables: model.num_vars,
            degree: model.poly.degree(),
            offset: model.poly.offset().clone(),
            terms: model
                .poly
                .terms()
                .map(|(vars, c)| TermEntry {
                    vars: vars.iter().map(|v| v.0).collect(),
                    coeff: c.clone(),
                })
                .collect(),
            metadata: ModelMetadata {
                big_n: model.big_n.clone(),
                n: model.layout.n,
                fix_lsb: model.layout.fix_lsb,
                s_i: model.layout.s_i.clone(),
                s_j: model.layout.s_j.clone(),
                paper_gme: model.paper_gme.clone(),
                constant_shift: model.gadget_shift.clone(),
            },
            ledger: ledger.cloned(),
        }
    }

    pub fn into_model(self) -> Result<(FactorModel, Option<ReductionLedger>)> {
        let invalid = |message: String| Error::Parse {
            line: 0,
            column: 0,
            message,
        };
        let poly = BinaryPolynomial::from_terms(
            self.terms.into_iter().map(|t| (t.vars.into_iter().map(VarId), t.coeff)),
            self.offset,
        );
        if poly.num_vars() > self.variables {
            return Err(invalid(format!(
                "terms reference {} variables but the file declares {}",
                poly.num_vars(),
                self.variables
            )));
        }
        if poly.degree() != self.degree {
            return Err(invalid(format!(
                "declared degree {} but terms have degree {}",
                self.degree,
                poly.degree()
            )));
        }
        let m = self.metadata;
        let layout = FactorLayout {
            n: m.n,
            fix_lsb: m.fix_lsb,
            s_i: m.s_i,
            s_j: m.s_j,
        };
        layout.validate()?;
        if layout.num_vars() > self.variables {
            return Err(invalid("fewer variables than the factor layout needs".into()));
        }
        let model = FactorModel {
            big_n: m.big_n,
            layout,
            poly,
            paper_gme: m.paper_gme,
            num_vars: self.variables,
            gadget_shift: m.constant_shift,
        };
        Ok((model, self.ledger))
    }
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: String,
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

pub fn model_to_json(model: &FactorModel, ledger: Option<&ReductionLedger>) -> String {
    let mut s = serde_json::to_string_pretty(&ModelFile::new(model, ledger)).expect("model serializes");
    s.push('\n');
    s
}

pub fn model_from_json(text: &str) -> Result<(FactorModel, Option<ReductionLedger>)> {
    let probe: VersionProbe = serde_json::from_str(text).map_err(parse_error)?;
    if probe.format_version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: probe.format_version,
            expected: FORMAT_VERSION.to_string(),
        });
    }
    let file: ModelFile = serde_json::from_str(text).map_err(parse_error)?;
    file.into_model()
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn save_model(model: &FactorModel, ledger: Option<&ReductionLedger>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model_to_json(model, ledger)).map_err(io_error(path))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<(FactorModel, Option<ReductionLedger>)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    model_from_json(&text)
}

/// Writes a degree-2 polynomial as `i j coeff` lines with `i <= j`; linear
/// terms use `i i`. Two comment lines carry the variable count and offset.
pub fn write_coo(poly: &BinaryPolynomial, num_vars: usize, mut out: impl Write) -> Result<()> {
    let degree = poly.degree();
    if degree > 2 {
        return Err(Error::UnsupportedDegree(degree));
    }
    let mut text = format!("# variables {num_vars}\n# offset {}\n", poly.offset());
    for (vars, c) in poly.terms() {
        let (i, j) = (vars[0].0, vars[vars.len() - 1].0);
        text.push_str(&format!("{i} {j} {c}\n"));
    }
    out.write_all(text.as_bytes()).map_err(io_error(Path::new("<coo>")))
}

pub fn save_coo(poly: &BinaryPolynomial, num_vars: usize, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_coo(poly, num_vars, &mut buf)?;
    fs::write(path, buf).map_err(io_error(path))
}
