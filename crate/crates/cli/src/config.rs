//! JSON configuration documents.
//!
//! Top level holds exactly one of `homogeneous`, `preset` or `explicit`,
//! plus an optional `initial` state for `evolve`.

use std::f64::consts::PI;

use serde_json::{json, Map, Value};

use ptwalk::operators::Chirality;
use ptwalk::{HomogeneousParams, WalkConfig};

use crate::error::CliError;

pub const DEFAULT_SITES: usize = 64;
pub const DEFAULT_EXPERIMENT_SITES: usize = 64;
pub const DEFAULT_HALF_WIDTH: usize = 128;
pub const DEFAULT_EXP_GAMMA0: f64 = 1.1;

#[derive(Debug, Clone, PartialEq)]
pub enum Walk {
    Homogeneous {
        params: HomogeneousParams,
        /// `None` lets `evolve` size the ring from the step count.
        sites: Option<usize>,
    },
    Lattice(WalkConfig),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Initial {
    pub site: i64,
    pub chirality: Chirality,
}

impl Default for Initial {
    fn default() -> Self {
        Initial {
            site: 0,
            chirality: Chirality::Right,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConfig {
    pub walk: Walk,
    pub preset: Option<String>,
    pub initial: Initial,
    /// The document with defaults filled in, echoed into the manifest.
    pub resolved: Value,
}

impl ParsedConfig {
    pub fn homogeneous(&self) -> Result<HomogeneousParams, CliError> {
        match &self.walk {
            Walk::Homogeneous { params, .. } => Ok(*params),
            Walk::Lattice(c) => c.as_homogeneous().map_err(|_| {
                CliError::Usage("this subcommand needs a homogeneous configuration".into())
            }),
        }
    }

    /// Ring for lattice subcommands; homogeneous walks use their `N` or
    /// `fallback_sites`.
    pub fn lattice(&self, fallback_sites: usize) -> Result<WalkConfig, CliError> {
        match &self.walk {
            Walk::Homogeneous { params, sites } => {
                Ok(WalkConfig::homogeneous(sites.unwrap_or(fallback_sites), params)?)
            }
            Walk::Lattice(c) => Ok(c.clone()),
        }
    }
}

fn err(path: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, CliError> {
    v.as_object().ok_or_else(|| err(path, "expected an object"))
}

fn reject_unknown(obj: &Map<String, Value>, allowed: &[&str], path: &str) -> Result<(), CliError> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(err(&format!("{path}.{k}"), "unknown key")),
        None => Ok(()),
    }
}

fn number(obj: &Map<String, Value>, key: &str, path: &str) -> Result<Option<f64>, CliError> {
    match obj.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_f64()
            .filter(|x| x.is_finite())
            .map(Some)
            .ok_or_else(|| err(&format!("{path}.{key}"), "expected a finite number")),
    }
}

fn required(obj: &Map<String, Value>, key: &str, path: &str) -> Result<f64, CliError> {
    number(obj, key, path)?.ok_or_else(|| err(&format!("{path}.{key}"), "missing required number"))
}

fn count(obj: &Map<String, Value>, key: &str, path: &str) -> Result<Option<usize>, CliError> {
    match obj.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_u64()
            .map(|n| Some(n as usize))
            .ok_or_else(|| err(&format!("{path}.{key}"), "expected a non-negative integer")),
    }
}

pub fn parse_config(text: &str) -> Result<ParsedConfig, CliError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| err("$", format!("invalid JSON: {e}")))?;
    parse_value(&doc)
}

/// Document equivalent to `--preset <name>`.
pub fn preset_document(name: &str) -> Value {
    json!({ "preset": name })
}

pub fn parse_value(doc: &Value) -> Result<ParsedConfig, CliError> {
    let top = object(doc, "$")?;
    let kinds: Vec<&str> = ["homogeneous", "preset", "explicit"]
        .into_iter()
        .filter(|k| top.contains_key(*k))
        .collect();
    let initial = match top.get("initial") {
        Some(v) => parse_initial(v)?,
        None => Initial::default(),
    };
    let initial_json = json!({
        "site": initial.site,
        "chirality": if initial.chirality == Chirality::Left { "L" } else { "R" },
    });
    let mut parsed = match kinds.as_slice() {
        ["homogeneous"] => {
            reject_unknown(top, &["homogeneous", "initial"], "$")?;
            parse_homogeneous(&top["homogeneous"])?
        }
        ["preset"] => parse_preset(top)?,
        ["explicit"] => {
            reject_unknown(top, &["explicit", "initial"], "$")?;
            parse_explicit(&top["explicit"])?
        }
        [] => return Err(err("$", "expected one of `homogeneous`, `preset`, `explicit`")),
        _ => return Err(err("$", format!("conflicting keys {kinds:?}"))),
    };
    parsed.initial = initial;
    if let Some(obj) = parsed.resolved.as_object_mut() {
        obj.insert("initial".into(), initial_json);
    }
    Ok(parsed)
}

fn parse_initial(v: &Value) -> Result<Initial, CliError> {
    let path = "$.initial";
    let obj = object(v, path)?;
    reject_unknown(obj, &["site", "chirality"], path)?;
    let site = match obj.get("site") {
        None => 0,
        Some(s) => s.as_i64().ok_or_else(|| err("$.initial.site", "expected an integer"))?,
    };
    let chirality = match obj.get("chirality").map(|c| c.as_str()) {
        None | Some(Some("R")) => Chirality::Right,
        Some(Some("L")) => Chirality::Left,
        _ => return Err(err("$.initial.chirality", "expected \"L\" or \"R\"")),
    };
    Ok(Initial { site, chirality })
}

fn parse_homogeneous(v: &Value) -> Result<ParsedConfig, CliError> {
    let path = "$.homogeneous";
    let obj = object(v, path)?;
    reject_unknown(obj, &["theta1", "theta2", "gamma", "phi", "N"], path)?;
    let theta1 = required(obj, "theta1", path)?;
    let theta2 = required(obj, "theta2", path)?;
    let gamma = number(obj, "gamma", path)?.unwrap_or(0.0);
    let phi = number(obj, "phi", path)?.unwrap_or(0.0);
    let sites = count(obj, "N", path)?;
    let params = HomogeneousParams::new(theta1, theta2, gamma, phi)?;
    let mut resolved = json!({ "theta1": theta1, "theta2": theta2, "gamma": gamma, "phi": phi });
    if let Some(n) = sites {
        resolved["N"] = json!(n);
    }
    Ok(ParsedConfig {
        walk: Walk::Homogeneous { params, sites },
        preset: None,
        initial: Initial::default(),
        resolved: json!({ "homogeneous": resolved }),
    })
}

/// `{"preset": "name", ...overrides}` or `{"preset": {"name": ..., ...}}`.
fn parse_preset(top: &Map<String, Value>) -> Result<ParsedConfig, CliError> {
    let (fields, path): (Map<String, Value>, &str) = match &top["preset"] {
        Value::String(name) => {
            let mut m: Map<String, Value> = top
                .iter()
                .filter(|(k, _)| k.as_str() != "preset" && k.as_str() != "initial")
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect();
            m.insert("name".into(), Value::String(name.clone()));
            (m, "$")
        }
        Value::Object(m) => {
            reject_unknown(top, &["preset", "initial"], "$")?;
            (m.clone(), "$.preset")
        }
        _ => return Err(err("$.preset", "expected a preset name or object")),
    };
    let name = fields
        .get("name")
        .and_then(Value::as_str)
        .ok_or_else(|| err(&format!("{path}.name"), "missing preset name"))?
        .to_string();
    let (walk, resolved) = match name.as_str() {
        "experiment" => {
            // defaults: e^{γ₀} = 1.1, φ₀ = 6π/5
            reject_unknown(&fields, &["name", "gamma0", "exp_gamma0", "phi0", "N"], path)?;
            let gamma0 = match (number(&fields, "gamma0", path)?, number(&fields, "exp_gamma0", path)?) {
                (Some(_), Some(_)) => {
                    return Err(err(&format!("{path}.exp_gamma0"), "conflicts with gamma0"));
                }
                (Some(g), None) => g,
                (None, Some(eg)) if eg > 0.0 => eg.ln(),
                (None, Some(eg)) => {
                    return Err(err(&format!("{path}.exp_gamma0"), format!("must be positive, got {eg}")));
                }
                (None, None) => DEFAULT_EXP_GAMMA0.ln(),
            };
            let phi0 = number(&fields, "phi0", path)?.unwrap_or(6.0 * PI / 5.0);
            let sites = count(&fields, "N", path)?.unwrap_or(DEFAULT_EXPERIMENT_SITES);
            (
                Walk::Lattice(WalkConfig::experiment(sites, gamma0, phi0)?),
                json!({ "name": name, "gamma0": gamma0, "phi0": phi0, "N": sites }),
            )
        }
        "four-region" => {
            reject_unknown(&fields, &["name", "L"], path)?;
            let half = count(&fields, "L", path)?.unwrap_or(DEFAULT_HALF_WIDTH);
            (
                Walk::Lattice(WalkConfig::four_region(half)?),
                json!({ "name": name, "L": half, "N": 2 * half }),
            )
        }
        "homogeneous" => {
            // the running example: θ₁ = π/4, θ₂ = −π/7
            reject_unknown(&fields, &["name", "exp_gamma", "phi", "N"], path)?;
            let eg = number(&fields, "exp_gamma", path)?.unwrap_or(1.0);
            let phi = number(&fields, "phi", path)?.unwrap_or(0.0);
            let sites = count(&fields, "N", path)?;
            let params = HomogeneousParams::with_exp_gamma(PI / 4.0, -PI / 7.0, eg, phi)?;
            let mut r = json!({ "name": name, "theta1": PI / 4.0, "theta2": -PI / 7.0, "gamma": params.gamma, "phi": phi });
            if let Some(n) = sites {
                r["N"] = json!(n);
            }
            (Walk::Homogeneous { params, sites }, r)
        }
        other => return Err(err(&format!("{path}.name"), format!("unknown preset {other:?}"))),
    };
    Ok(ParsedConfig {
        walk,
        preset: Some(name),
        initial: Initial::default(),
        resolved: json!({ "preset": resolved }),
    })
}

fn field(obj: &Map<String, Value>, key: &str, sites: usize) -> Result<[Vec<f64>; 2], CliError> {
    let path = format!("$.explicit.{key}");
    let outer = obj
        .get(key)
        .ok_or_else(|| err(&path, "missing field"))?
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| err(&path, "expected two arrays (one per substep)"))?;
    let mut out: [Vec<f64>; 2] = Default::default();
    for (i, inner) in outer.iter().enumerate() {
        let p = format!("{path}[{i}]");
        let values = inner
            .as_array()
            .filter(|a| a.len() == sites)
            .ok_or_else(|| err(&p, format!("expected an array of {sites} numbers")))?;
        for (j, v) in values.iter().enumerate() {
            let x = v
                .as_f64()
                .filter(|x| x.is_finite())
                .ok_or_else(|| err(&format!("{p}[{j}]"), "expected a finite number"))?;
            if key.starts_with("gain") && x <= 0.0 {
                return Err(err(&format!("{p}[{j}]"), format!("gain must be positive, got {x}")));
            }
            out[i].push(x);
        }
    }
    Ok(out)
}

fn parse_explicit(v: &Value) -> Result<ParsedConfig, CliError> {
    let path = "$.explicit";
    let obj = object(v, path)?;
    reject_unknown(obj, &["N", "theta", "gainL", "gainR", "phiL", "phiR"], path)?;
    let sites = count(obj, "N", path)?.ok_or_else(|| err("$.explicit.N", "missing lattice size"))?;
    let config = WalkConfig::new(
        sites,
        field(obj, "theta", sites)?,
        field(obj, "gainL", sites)?,
        field(obj, "gainR", sites)?,
        field(obj, "phiL", sites)?,
        field(obj, "phiR", sites)?,
    )?;
    Ok(ParsedConfig {
        walk: Walk::Lattice(config),
        preset: None,
        initial: Initial::default(),
        resolved: json!({ "explicit": v }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn experiment_preset_with_overrides() {
        let p = parse_config(r#"{"preset":"experiment","gamma0":0.0953,"phi0":3.7699,"N":256}"#).unwrap();
        let Walk::Lattice(c) = &p.walk else { panic!() };
        assert_eq!(c.sites(), 256);
        assert_eq!(p.preset.as_deref(), Some("experiment"));
        assert_eq!(c.phase(0, Chirality::Right)[c.index(-2)], -3.7699);
        assert_eq!(c.phase(0, Chirality::Right)[c.index(0)], 3.7699);
        let q = parse_config(r#"{"preset":{"name":"experiment","gamma0":0.0953,"phi0":3.7699,"N":256}}"#).unwrap();
        assert_eq!(p.walk, q.walk);
    }

    #[test]
    fn experiment_defaults() {
        let p = parse_config(r#"{"preset":"experiment"}"#).unwrap();
        assert_eq!(p.resolved["preset"]["gamma0"], json!(1.1f64.ln()));
        assert_eq!(p.resolved["preset"]["phi0"], json!(6.0 * PI / 5.0));
        assert_eq!(p.resolved["preset"]["N"], json!(64));
        let q = parse_config(r#"{"preset":"experiment","exp_gamma0":1.1}"#).unwrap();
        assert_eq!(p.walk, q.walk);
        assert!(parse_config(r#"{"preset":"experiment","exp_gamma0":1.1,"gamma0":0.1}"#).is_err());
        assert!(parse_config(r#"{"preset":"experiment","exp_gamma0":0}"#).is_err());
    }

    #[test]
    fn four_region_preset() {
        let p = parse_config(r#"{"preset":"four-region","L":16}"#).unwrap();
        let Walk::Lattice(c) = &p.walk else { panic!() };
        assert_eq!(c.sites(), 32);
        assert_eq!(c.theta(0)[c.index(8)], PI / 4.0);
        assert_eq!(c.theta(0)[c.index(9)], -PI / 8.0);
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn homogeneous_block() {
        let p = parse_config(r#"{"homogeneous":{"theta1":0.7854,"theta2":-0.4488,"gamma":0.0,"phi":0.0}}"#).unwrap();
        let h = p.homogeneous().unwrap();
        assert_eq!((h.theta1, h.theta2, h.gamma, h.phi), (0.7854, -0.4488, 0.0, 0.0));
        assert_eq!(p.lattice(8).unwrap().sites(), 8);
    }

    #[test]
    fn explicit_block() {
        let doc = json!({"explicit": {
            "N": 4,
            "theta": [[0.1, 0.2, 0.3, 0.4], [0.0, 0.0, 0.0, 0.0]],
            "gainL": [[1.0, 1.0, 1.0, 1.0], [1.0, 1.0, 1.0, 1.0]],
            "gainR": [[1.0, 1.0, 1.0, 1.0], [1.0, 1.0, 1.0, 1.0]],
            "phiL": [[0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0]],
            "phiR": [[0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0]],
        }});
        let p = parse_value(&doc).unwrap();
        let Walk::Lattice(c) = &p.walk else { panic!() };
        assert_eq!(c.theta(0), &[0.1, 0.2, 0.3, 0.4]);

        let mut bad = doc.clone();
        bad["explicit"]["gainR"][1][2] = json!(0.0);
        match parse_value(&bad).unwrap_err() {
            CliError::Config { path, .. } => assert_eq!(path, "$.explicit.gainR[1][2]"),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn schema_errors_carry_paths() {
        let path_of = |text: &str| match parse_config(text).unwrap_err() {
            CliError::Config { path, .. } => path,
            e => panic!("{e:?}"),
        };
        assert_eq!(path_of(r#"{"homogeneous":{"theta1":"x","theta2":0}}"#), "$.homogeneous.theta1");
        assert_eq!(path_of(r#"{"homogeneous":{"theta2":0}}"#), "$.homogeneous.theta1");
        assert_eq!(path_of(r#"{"homogeneous":{"theta1":0,"theta2":0,"bogus":1}}"#), "$.homogeneous.bogus");
        assert_eq!(path_of(r#"{"preset":"nope"}"#), "$.name");
        assert_eq!(path_of(r#"{}"#), "$");
        assert_eq!(path_of(r#"[1]"#), "$");
        assert_eq!(path_of(r#"{"preset":"experiment","initial":{"chirality":"X"}}"#), "$.initial.chirality");
    }

    #[test]
    fn initial_state() {
        let p = parse_config(r#"{"preset":"homogeneous","initial":{"site":2,"chirality":"L"}}"#).unwrap();
        assert_eq!(p.initial, Initial { site: 2, chirality: Chirality::Left });
        assert_eq!(p.resolved["initial"]["chirality"], "L");
    }
}
