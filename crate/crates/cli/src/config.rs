//! Operator sources: a preset, a parameter file (JSON or `name,value` CSV),
//! and `--set` overrides.

use std::path::Path;

use gonodyn_core::io::{GeneralSpec, LoadedOperator, ParamsFile};
use gonodyn_core::params::COEFFICIENT_NAMES;
use gonodyn_core::{Operator, Params};

use crate::error::CliError;
use crate::spec;
use crate::table::{Cell, Table};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// `name,value` lines (optional `name,value` header, `#` comments).
pub fn parse_params_csv(text: &str) -> Result<Params, CliError> {
    let mut values: [Option<f64>; 11] = [None; 11];
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line == "name,value" {
            continue;
        }
        let (name, val) = line
            .split_once(',')
            .ok_or_else(|| usage(format!("parameter CSV line {}: expected name,value", lineno + 1)))?;
        let k = COEFFICIENT_NAMES
            .iter()
            .position(|c| *c == name.trim())
            .ok_or_else(|| usage(format!("parameter CSV line {}: unknown coefficient '{name}'", lineno + 1)))?;
        let v: f64 = val
            .trim()
            .parse()
            .map_err(|_| usage(format!("parameter CSV line {}: '{val}' is not a number", lineno + 1)))?;
        if values[k].replace(v).is_some() {
            return Err(usage(format!("parameter CSV: '{name}' given twice")));
        }
    }
    let mut arr = [0.0; 11];
    for (k, v) in values.iter().enumerate() {
        arr[k] = v.ok_or_else(|| usage(format!("parameter CSV: missing '{}'", COEFFICIENT_NAMES[k])))?;
    }
    Ok(Params::from_array(arr))
}

pub fn params_csv(p: &Params) -> String {
    let mut t = Table::new(["name", "value"]);
    for (name, v) in COEFFICIENT_NAMES.iter().zip(p.to_array()) {
        t.push(vec![Cell::from(*name), Cell::from(v)]);
    }
    t.to_csv()
}

fn read_file(path: &Path) -> Result<ParamsFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    if text.trim_start().starts_with('{') {
        ParamsFile::from_json(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
    } else {
        Ok(ParamsFile::Hemophilia(parse_params_csv(&text)?))
    }
}

/// Resolves the operator from exactly one of `params` / `preset`, then
/// applies `--set` overrides (hemophilia operators only).
pub fn load(params: Option<&Path>, preset: Option<&str>, sets: &[String]) -> Result<LoadedOperator, CliError> {
    let mut doc = match (params, preset) {
        (Some(path), None) => read_file(path)?,
        (None, Some(name)) => ParamsFile::Hemophilia(
            Params::preset(name).ok_or_else(|| usage(format!("unknown preset '{name}' (expected classical or w0)")))?,
        ),
        _ => return Err(usage("exactly one of --params and --preset is required")),
    };
    if !sets.is_empty() {
        let ParamsFile::Hemophilia(p) = &mut doc else {
            return Err(usage("--set applies only to hemophilia parameters"));
        };
        for s in sets {
            let (name, v) = spec::assignment(s)?;
            p.set(name, v);
        }
    }
    Ok(doc.build()?)
}

pub fn document(op: &LoadedOperator) -> ParamsFile {
    match op {
        LoadedOperator::Hemophilia(w) => ParamsFile::Hemophilia(*w.params()),
        LoadedOperator::General(g) => ParamsFile::General(GeneralSpec::from_operator(g)),
    }
}

pub fn require_hemophilia<'a>(op: &'a LoadedOperator, command: &str) -> Result<&'a Operator, CliError> {
    match op {
        LoadedOperator::Hemophilia(w) => Ok(w),
        LoadedOperator::General(_) => Err(usage(format!("{command} needs a hemophilia operator (a1..d3)"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_csv_round_trip() {
        let mut p = Params::classical();
        p.d1 = 0.1;
        p.d2 = 0.2 + 1.0 / 3.0;
        p.d3 = 1.0 - p.d1 - p.d2;
        assert_eq!(parse_params_csv(&params_csv(&p)).unwrap(), p);
    }

    #[test]
    fn params_csv_errors() {
        assert!(parse_params_csv("a1,0.5\n").is_err());
        assert!(parse_params_csv("zz,1\n").is_err());
        assert!(parse_params_csv("a1,x\n").is_err());
    }

    #[test]
    fn presets_and_overrides() {
        let op = load(None, Some("w0"), &["c1=0".into()]).unwrap();
        assert!(matches!(op, LoadedOperator::Hemophilia(_)));
        assert!(load(None, Some("nope"), &[]).is_err());
        assert!(load(None, Some("classical"), &["a1=0.9".into()]).is_err());
        assert!(load(None, None, &[]).is_err());
    }
}
