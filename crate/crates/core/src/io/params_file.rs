//! `KEY value` parameter files. `#` starts a comment; blank lines are ignored.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::params::RunParams;
use crate::{Error, Result};

const SCALE_PREFIX: &str = "SCALE_PROCESS_";

const MANDATORY: [&str; 15] = [
    "N_DIM",
    "LAMBDA_MIN",
    "LAMBDA_MAX",
    "LAMBDA_INDEX",
    "DELTA_LAMBDA",
    "H_MIN",
    "H_MAX",
    "H_INIT",
    "MAX_ITER",
    "TOL_RESIDUAL",
    "MU",
    "GAMMA",
    "MAX_DEPTH",
    "MAX_CHILDREN",
    "VERBOSE",
];

/// Used when a file has no WORKER_BUDGET line.
pub const DEFAULT_WORKER_BUDGET: usize = 12;

struct Entry {
    line: usize,
    value: String,
}

fn parse_error(line: usize, key: &str, message: impl Into<String>) -> Error {
    Error::ParamParse { line, key: key.to_string(), message: message.into() }
}

pub fn read_parameters(path: &Path) -> Result<RunParams> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_parameters(&text)
}

pub fn parse_parameters(text: &str) -> Result<RunParams> {
    let mut entries: HashMap<String, Entry> = HashMap::new();
    let mut scalings: HashMap<usize, (usize, String)> = HashMap::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut fields = content.split_whitespace();
        let key = fields.next().expect("non-empty line");
        let value = match (fields.next(), fields.next()) {
            (Some(v), None) => v.to_string(),
            (None, _) => return Err(parse_error(line, key, "missing value")),
            (Some(_), Some(_)) => return Err(parse_error(line, key, "expected a single value")),
        };
        if let Some(index) = key.strip_prefix(SCALE_PREFIX) {
            let k: usize = index
                .parse()
                .map_err(|_| parse_error(line, key, "scaling index must be a non-negative integer"))?;
            if scalings.insert(k, (line, value)).is_some() {
                return Err(parse_error(line, key, "duplicate key"));
            }
            continue;
        }
        if !MANDATORY.contains(&key) && key != "WORKER_BUDGET" {
            return Err(parse_error(line, key, "unknown key"));
        }
        if entries.insert(key.to_string(), Entry { line, value }).is_some() {
            return Err(parse_error(line, key, "duplicate key"));
        }
    }

    for key in MANDATORY {
        if !entries.contains_key(key) {
            return Err(Error::MissingParam { key: key.to_string() });
        }
    }

    let real = |key: &str| -> Result<f64> {
        let e = &entries[key];
        e.value.parse::<f64>().map_err(|_| parse_error(e.line, key, format!("not a number: {}", e.value)))
    };
    let integer = |key: &str| -> Result<u64> {
        let e = &entries[key];
        e.value
            .parse::<u64>()
            .map_err(|_| parse_error(e.line, key, format!("not a non-negative integer: {}", e.value)))
    };

    let max_children = integer("MAX_CHILDREN")? as usize;
    let mut scales = Vec::with_capacity(max_children);
    for k in 0..max_children {
        let key = format!("{SCALE_PREFIX}{k}");
        let (line, value) = scalings.get(&k).ok_or_else(|| {
            let line = entries["MAX_CHILDREN"].line;
            parse_error(line, &key, format!("MAX_CHILDREN is {max_children} but {key} is missing"))
        })?;
        scales.push(value.parse::<f64>().map_err(|_| parse_error(*line, &key, "not a number"))?);
    }
    if let Some((&k, (line, _))) = scalings.iter().filter(|(&k, _)| k >= max_children).min_by_key(|(&k, _)| k) {
        return Err(parse_error(
            *line,
            &format!("{SCALE_PREFIX}{k}"),
            format!("index beyond MAX_CHILDREN = {max_children}"),
        ));
    }

    let worker_budget = match entries.get("WORKER_BUDGET") {
        Some(_) => integer("WORKER_BUDGET")? as usize,
        None => DEFAULT_WORKER_BUDGET,
    };
    let params = RunParams {
        n_dim: integer("N_DIM")? as usize,
        lambda_min: real("LAMBDA_MIN")?,
        lambda_max: real("LAMBDA_MAX")?,
        lambda_index: integer("LAMBDA_INDEX")? as usize,
        delta_lambda: real("DELTA_LAMBDA")?,
        h_min: real("H_MIN")?,
        h_max: real("H_MAX")?,
        h_init: real("H_INIT")?,
        max_iter: u32::try_from(integer("MAX_ITER")?)
            .map_err(|_| parse_error(entries["MAX_ITER"].line, "MAX_ITER", "too large"))?,
        tol_residual: real("TOL_RESIDUAL")?,
        mu: real("MU")?,
        gamma: real("GAMMA")?,
        max_depth: integer("MAX_DEPTH")? as usize,
        max_children,
        scalings: scales,
        verbose: u32::try_from(integer("VERBOSE")?)
            .map_err(|_| parse_error(entries["VERBOSE"].line, "VERBOSE", "too large"))?,
        worker_budget,
    };

    params.validate().map_err(|err| {
        let message = match &err {
            Error::InvalidParams(m) => m.clone(),
            other => other.to_string(),
        };
        // attribute the failure to the first key the message names
        let mut named: Vec<(&str, usize)> = entries
            .iter()
            .filter(|(k, _)| message.contains(k.as_str()))
            .map(|(k, e)| (k.as_str(), e.line))
            .collect();
        named.sort_by_key(|(k, _)| message.find(k).unwrap_or(usize::MAX));
        match named.first() {
            Some((key, line)) => parse_error(*line, key, message),
            None if message.contains(SCALE_PREFIX) => {
                let line = scalings.values().map(|(l, _)| *l).min().unwrap_or(0);
                parse_error(line, "SCALE_PROCESS_K", message)
            }
            None => err,
        }
    })?;
    Ok(params)
}

/// Serializes `params`; `parse_parameters` reads the result back exactly.
pub fn write_parameters(params: &RunParams) -> String {
    let mut out = String::new();
    let mut int = |k: &str, v: u64| writeln!(out, "{k} {v}").unwrap();
    int("N_DIM", params.n_dim as u64);
    int("LAMBDA_INDEX", params.lambda_index as u64);
    int("MAX_ITER", params.max_iter as u64);
    int("MAX_DEPTH", params.max_depth as u64);
    int("MAX_CHILDREN", params.max_children as u64);
    int("VERBOSE", params.verbose as u64);
    int("WORKER_BUDGET", params.worker_budget as u64);
    let reals = [
        ("LAMBDA_MIN", params.lambda_min),
        ("LAMBDA_MAX", params.lambda_max),
        ("DELTA_LAMBDA", params.delta_lambda),
        ("H_MIN", params.h_min),
        ("H_MAX", params.h_max),
        ("H_INIT", params.h_init),
        ("TOL_RESIDUAL", params.tol_residual),
        ("MU", params.mu),
        ("GAMMA", params.gamma),
    ];
    for (k, v) in reals {
        writeln!(out, "{k} {v:e}").unwrap();
    }
    for (k, t) in params.scalings.iter().enumerate() {
        writeln!(out, "{SCALE_PREFIX}{k} {t:e}").unwrap();
    }
    out
}
