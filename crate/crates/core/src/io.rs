//! Parameter file formats.
//!
//! A hemophilia operator is a JSON object with the keys `a1 a2 c1 c2 b1 b2 b3
//! b4 d1 d2 d3`; a general operator is `{"eta", "nu", "pf", "pm"}` with
//! `pf[i][r][j]` and `pm[i][r][l]` nested arrays.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::general::GeneralOperator;
use crate::params::{Hemophilia, HemophiliaParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralSpec {
    pub eta: usize,
    pub nu: usize,
    pub pf: Vec<Vec<Vec<f64>>>,
    pub pm: Vec<Vec<Vec<f64>>>,
}

impl GeneralSpec {
    pub fn build(&self) -> Result<GeneralOperator<f64>> {
        GeneralOperator::from_nested(self.eta, self.nu, &self.pf, &self.pm)
    }

    pub fn from_operator(op: &GeneralOperator<f64>) -> Self {
        let (pf, pm) = op.to_nested();
        Self { eta: op.eta(), nu: op.nu(), pf, pm }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamsFile {
    Hemophilia(HemophiliaParams<f64>),
    General(GeneralSpec),
}

/// A validated operator loaded from a parameter document.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedOperator {
    Hemophilia(Hemophilia<f64>),
    General(GeneralOperator<f64>),
}

impl ParamsFile {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("parameter documents serialize")
    }

    pub fn build(&self) -> Result<LoadedOperator> {
        match self {
            ParamsFile::Hemophilia(p) => Ok(LoadedOperator::Hemophilia(Hemophilia::new(*p)?)),
            ParamsFile::General(g) => Ok(LoadedOperator::General(g.build()?)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn parses_hemophilia_document() {
        let text = r#"{"a1":0.5,"a2":0.5,"c1":0.5,"c2":0.5,"b1":0.25,"b2":0.25,
                      "b3":0.25,"b4":0.25,"d1":0.2,"d2":0.3,"d3":0.5}"#;
        match ParamsFile::from_json(text).unwrap().build().unwrap() {
            LoadedOperator::Hemophilia(w) => assert_eq!(w.params().d2, 0.3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parses_general_document() {
        let text = r#"{"eta":1,"nu":1,"pf":[[[0.5]]],"pm":[[[0.5]]]}"#;
        assert!(matches!(
            ParamsFile::from_json(text).unwrap().build().unwrap(),
            LoadedOperator::General(_)
        ));
    }

    #[test]
    fn invalid_values_fail_validation_not_parsing() {
        let text = r#"{"eta":1,"nu":1,"pf":[[[0.5]]],"pm":[[[0.6]]]}"#;
        let doc = ParamsFile::from_json(text).unwrap();
        assert!(matches!(doc.build(), Err(Error::NormalizationViolation { .. })));
    }

    #[test]
    fn json_round_trip() {
        let doc = ParamsFile::Hemophilia(HemophiliaParams::classical());
        assert_eq!(ParamsFile::from_json(&doc.to_json()).unwrap(), doc);
    }
}
