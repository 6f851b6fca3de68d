//! Input keys shared by the config file and the command line.
//!
//! A config file is flat TOML whose keys are the long flag names without the
//! leading dashes. Flags override file values.

use std::collections::BTreeMap;
use std::path::Path;

use clap::parser::ValueSource;
use clap::{Arg, ArgAction, ArgMatches, Command};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Real,
    Int,
    Flag,
    Text,
}

#[derive(Debug, Clone, Copy)]
pub struct Key {
    pub name: &'static str,
    pub kind: Kind,
    pub help: &'static str,
}

const fn key(name: &'static str, kind: Kind, help: &'static str) -> Key {
    Key { name, kind, help }
}

use Kind::*;

pub const OUTPUT: &[Key] = &[
    key("format", Text, "report format: human, json or csv [default: human]"),
    key("output", Text, "write the report to this path instead of stdout"),
];

pub const ARMS: &[Key] = &[
    key("p0", Real, "response probability in the control arm"),
    key("delta-p", Real, "treatment minus control response probability"),
    key("tau", Real, "RMST horizon"),
    key("set-param", Int, "summary set: 1 means, 2 survival rates, 3 rates and RMST gains"),
    key("m0-r", Real, "set 1: control responder mean survival"),
    key("m0-nr", Real, "set 1: control non-responder mean survival"),
    key("diffm-r", Real, "set 1: treatment minus control responder mean"),
    key("diffm-nr", Real, "set 1: treatment minus control non-responder mean"),
    key("s0-r", Real, "sets 2, 3: control responder survival at tau"),
    key("s0-nr", Real, "sets 2, 3: control non-responder survival at tau"),
    key("diffs-r", Real, "set 2: treatment minus control responder survival at tau"),
    key("diffs-nr", Real, "set 2: treatment minus control non-responder survival at tau"),
    key("delta-r", Real, "responder RMST gain (set 3, or anticipated effects)"),
    key("delta-nr", Real, "non-responder RMST gain (set 3, or anticipated effects)"),
    key("set3-method", Text, "set 3 inversion: root or taylor [default: root]"),
    key("a0-r", Real, "scale of control responders"),
    key("a0-nr", Real, "scale of control non-responders"),
    key("a1-r", Real, "scale of treatment responders"),
    key("a1-nr", Real, "scale of treatment non-responders"),
    key("shape", Real, "common Weibull shape [default: 1]"),
    key("ascale-cens", Real, "exponential censoring scale (inf for none)"),
    key("ascale-cens-treatment", Real, "treatment-arm censoring scale [default: ascale-cens]"),
];

pub const ANTICIPATED: &[Key] = &[key("delta-0", Real, "control responder minus non-responder RMST")];

pub const TESTING: &[Key] = &[
    key("alpha", Real, "one-sided significance level [default: 0.05]"),
    key("two-sided", Flag, "treat alpha as two-sided (tests at alpha/2)"),
];

pub const POWER: &[Key] = &[
    key("beta", Real, "type II error [default: 0.2]"),
    key("pi", Real, "control allocation fraction [default: 0.5]"),
];

pub const CURVES: &[Key] = &[
    key("curves", Text, "write survival and hazard-ratio curves to this CSV path"),
    key("curves-grid", Int, "number of curve points on [0, tau] [default: 201]"),
];

pub const SIMULATION: &[Key] = &[
    key("n", Text, "total sample size or auto [default: auto]"),
    key("replications", Int, "number of simulated trials [default: 1000]"),
    key("seed", Int, "random seed [default: 1]"),
    key("hypothesis", Text, "alternative or null (treatment arm := control arm) [default: alternative]"),
    key("emit-data", Text, "write one simulated dataset to this CSV path"),
    key("emit-replication", Int, "replication written by emit-data [default: 0]"),
    key("grid", Text, "scenario grid file; replaces the single-scenario keys"),
    key("grid-sample", Int, "simulate this many grid scenarios, evenly strided [default: all]"),
];

pub const ANALYSIS: &[Key] = &[
    key("data", Text, "trial dataset CSV (arm,time,event,responder)"),
    key("km", Text, "write Kaplan-Meier curves to this CSV path"),
];

pub fn keys_for(sub: &str) -> Vec<Key> {
    let groups: &[&[Key]] = match sub {
        "effectsize" => &[ARMS, ANTICIPATED, CURVES, OUTPUT],
        "samplesize" => &[ARMS, TESTING, POWER, CURVES, OUTPUT],
        "calibrate" => &[ARMS, CURVES, OUTPUT],
        "simulate" => &[ARMS, TESTING, POWER, SIMULATION, OUTPUT],
        "analyze" => &[ANALYSIS, &[key("tau", Real, "RMST horizon")], TESTING, OUTPUT],
        _ => &[],
    };
    groups.iter().flat_map(|g| g.iter().copied()).collect()
}

pub fn subcommand(name: &'static str, about: &'static str) -> Command {
    let mut cmd = Command::new(name).about(about).arg(
        Arg::new("config")
            .long("config")
            .short('c')
            .value_name("FILE")
            .help("flat TOML file of keys; flags override it"),
    );
    for k in keys_for(name) {
        let arg = Arg::new(k.name).long(k.name).help(k.help);
        cmd = cmd.arg(match k.kind {
            Flag => arg.action(ArgAction::SetTrue),
            Real => arg.value_name("X").allow_hyphen_values(true),
            Int => arg.value_name("N"),
            Text => arg.value_name("VALUE"),
        });
    }
    cmd
}

#[derive(Debug, Clone, PartialEq)]
pub enum Val {
    Real(f64),
    Int(i64),
    Flag(bool),
    Text(String),
}

impl Val {
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Val::Real(x) if x.is_finite() => serde_json::json!(x),
            Val::Real(x) => serde_json::json!(x.to_string()),
            Val::Int(i) => serde_json::json!(i),
            Val::Flag(b) => serde_json::json!(b),
            Val::Text(s) => serde_json::json!(s),
        }
    }
}

fn parse_text(k: &Key, raw: &str) -> Result<Val, CliError> {
    let bad = || CliError::Usage(format!("invalid value {raw:?} for {}", k.name));
    Ok(match k.kind {
        Real => Val::Real(raw.trim().parse().map_err(|_| bad())?),
        Int => Val::Int(raw.trim().parse().map_err(|_| bad())?),
        Flag => Val::Flag(raw.trim().parse().map_err(|_| bad())?),
        Text => Val::Text(raw.to_string()),
    })
}

fn from_toml(k: &Key, v: &toml::Value) -> Result<Val, CliError> {
    use toml::Value as T;
    let bad = || CliError::Usage(format!("invalid value {v} for {} in config file", k.name));
    Ok(match (k.kind, v) {
        (Real, T::Float(x)) => Val::Real(*x),
        (Real, T::Integer(i)) => Val::Real(*i as f64),
        (Real, T::String(s)) => parse_text(k, s)?,
        (Int, T::Integer(i)) => Val::Int(*i),
        (Flag, T::Boolean(b)) => Val::Flag(*b),
        (Text, T::String(s)) => Val::Text(s.clone()),
        (Text, T::Integer(i)) => Val::Text(i.to_string()),
        _ => return Err(bad()),
    })
}

#[derive(Debug, Clone)]
pub struct Params {
    pub sub: &'static str,
    values: BTreeMap<&'static str, Val>,
}

impl Params {
    pub fn load(sub: &'static str, m: &ArgMatches) -> Result<Self, CliError> {
        let keys = keys_for(sub);
        let mut values = BTreeMap::new();

        if let Some(path) = m.get_one::<String>("config") {
            let text = std::fs::read_to_string(Path::new(path))
                .map_err(|e| CliError::Usage(format!("cannot read config file {path}: {e}")))?;
            let table: toml::Table =
                toml::from_str(&text).map_err(|e| CliError::Usage(format!("config file {path}: {e}")))?;
            for (name, v) in &table {
                let k = keys
                    .iter()
                    .find(|k| k.name == name)
                    .ok_or_else(|| CliError::Usage(format!("unknown key {name:?} for {sub} in {path}")))?;
                values.insert(k.name, from_toml(k, v)?);
            }
        }

        for k in &keys {
            if m.value_source(k.name) != Some(ValueSource::CommandLine) {
                continue;
            }
            let v = match k.kind {
                Flag => Val::Flag(m.get_flag(k.name)),
                _ => parse_text(k, m.get_one::<String>(k.name).expect("value present"))?,
            };
            values.insert(k.name, v);
        }
        Ok(Self { sub, values })
    }

    #[cfg(test)]
    pub fn from_pairs(sub: &'static str, pairs: &[(&'static str, Val)]) -> Self {
        Self {
            sub,
            values: pairs.iter().cloned().collect(),
        }
    }

    pub fn has(&self, k: &str) -> bool {
        self.values.contains_key(k)
    }

    pub fn present<'a>(&self, ks: &[&'a str]) -> Vec<&'a str> {
        ks.iter().copied().filter(|k| self.has(k)).collect()
    }

    /// Fails listing every key of `ks` that is missing.
    pub fn require(&self, ks: &[&str], context: &str) -> Result<(), CliError> {
        let missing: Vec<_> = ks.iter().filter(|k| !self.has(k)).collect();
        if missing.is_empty() {
            Ok(())
        } else {
            let list: Vec<_> = missing.iter().map(|k| k.to_string()).collect();
            Err(CliError::Usage(format!("{context}: missing {}", list.join(", "))))
        }
    }

    pub fn real(&self, k: &str) -> Option<f64> {
        match self.values.get(k) {
            Some(Val::Real(x)) => Some(*x),
            _ => None,
        }
    }

    pub fn real_or(&self, k: &str, default: f64) -> f64 {
        self.real(k).unwrap_or(default)
    }

    pub fn need_real(&self, k: &str) -> Result<f64, CliError> {
        self.real(k).ok_or_else(|| CliError::Usage(format!("{}: missing {k}", self.sub)))
    }

    pub fn int(&self, k: &str) -> Option<i64> {
        match self.values.get(k) {
            Some(Val::Int(i)) => Some(*i),
            _ => None,
        }
    }

    pub fn count_or(&self, k: &str, default: u64) -> Result<u64, CliError> {
        match self.int(k) {
            None => Ok(default),
            Some(i) if i >= 0 => Ok(i as u64),
            Some(i) => Err(CliError::Usage(format!("{k} must be non-negative, got {i}"))),
        }
    }

    pub fn text(&self, k: &str) -> Option<&str> {
        match self.values.get(k) {
            Some(Val::Text(s)) => Some(s),
            _ => None,
        }
    }

    pub fn flag(&self, k: &str) -> bool {
        matches!(self.values.get(k), Some(Val::Flag(true)))
    }

    /// Inputs echoed into the report, output options excluded.
    pub fn echo(&self) -> BTreeMap<String, serde_json::Value> {
        self.values
            .iter()
            .filter(|(k, _)| !matches!(**k, "format" | "output"))
            .map(|(k, v)| (k.to_string(), v.to_json()))
            .collect()
    }
}
