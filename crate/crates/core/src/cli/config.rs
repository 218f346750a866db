//! Flat `key = value` sweep configuration.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::quadrature::QuadratureConfig;

#[derive(Debug, Error, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: `{}`: {}", self.key, self.message),
            None => write!(f, "`{}`: {}", self.key, self.message),
        }
    }
}

fn err(line: Option<usize>, key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Kind {
    ThermalNeg,
    ThermalGap,
    ThermalMi,
    SqueezeCom,
    SqueezeR,
    SqueezeBand,
    CoherentCheck,
    WightmanCheck,
    Selfcheck,
}

pub const KINDS: [Kind; 9] = [
    Kind::ThermalNeg,
    Kind::ThermalGap,
    Kind::ThermalMi,
    Kind::SqueezeCom,
    Kind::SqueezeR,
    Kind::SqueezeBand,
    Kind::CoherentCheck,
    Kind::WightmanCheck,
    Kind::Selfcheck,
];

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::ThermalNeg => "thermal-neg",
            Kind::ThermalGap => "thermal-gap",
            Kind::ThermalMi => "thermal-mi",
            Kind::SqueezeCom => "squeeze-com",
            Kind::SqueezeR => "squeeze-r",
            Kind::SqueezeBand => "squeeze-band",
            Kind::CoherentCheck => "coherent-check",
            Kind::WightmanCheck => "wightman-check",
            Kind::Selfcheck => "selfcheck",
        }
    }

    pub fn parse(s: &str) -> Option<Kind> {
        KINDS.iter().copied().find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ValueType {
    Number,
    Count,
    Vector,
    List,
    Text,
}

/// Every accepted key, its value type and a one-line description.
const KEYS: &[(&str, ValueType, &str)] = &[
    ("variable", ValueType::Text, "swept parameter"),
    ("min", ValueType::Number, "grid start"),
    ("max", ValueType::Number, "grid end"),
    ("points", ValueType::Count, "grid size"),
    ("scale", ValueType::Text, "linear or log"),
    ("curve", ValueType::Text, "parameter giving one curve per value, or none"),
    ("curve_values", ValueType::List, "comma-separated curve values"),
    ("out", ValueType::Text, "output CSV path"),
    ("workers", ValueType::Count, "worker threads"),
    ("sigma", ValueType::Number, "smearing width"),
    ("omega", ValueType::Number, "energy gap"),
    ("lambda", ValueType::Number, "coupling strength"),
    ("d", ValueType::Number, "detector separation"),
    ("x_com", ValueType::Number, "centre of mass x coordinate"),
    ("temperature", ValueType::Number, "field temperature, 0 for vacuum"),
    ("mass", ValueType::Number, "field mass (thermal kinds)"),
    ("r", ValueType::Number, "squeezing amplitude"),
    ("theta", ValueType::Number, "squeezing phase"),
    ("epsilon", ValueType::Number, "bandlimited box side"),
    ("k_center", ValueType::Vector, "bandlimited box centre kx,ky,kz"),
    ("zeta_table", ValueType::Text, "tabulated zeta file (squeeze-com)"),
    ("a0", ValueType::Number, "coherent peak amplitude"),
    ("alpha_width", ValueType::Number, "coherent amplitude width"),
    ("radius", ValueType::Number, "spatial separation (wightman-check)"),
    ("t", ValueType::Number, "time separation (wightman-check)"),
    ("rel_tol", ValueType::Number, "quadrature relative tolerance"),
    ("abs_tol", ValueType::Number, "quadrature absolute tolerance"),
    ("max_subdivisions", ValueType::Count, "quadrature panel budget"),
    ("envelope_cutoff", ValueType::Number, "truncation threshold relative to abs_tol"),
];

pub fn known_keys() -> impl Iterator<Item = (&'static str, &'static str)> {
    KEYS.iter().map(|(k, _, d)| (*k, *d))
}

fn key_type(key: &str) -> Option<ValueType> {
    KEYS.iter().find(|(k, _, _)| *k == key).map(|(_, t, _)| *t)
}

/// Keys that are not physical parameters and so cannot be swept.
const CONTROL_KEYS: &[&str] = &[
    "variable",
    "min",
    "max",
    "points",
    "scale",
    "curve",
    "curve_values",
    "out",
    "workers",
    "zeta_table",
    "k_center",
    "rel_tol",
    "abs_tol",
    "max_subdivisions",
    "envelope_cutoff",
];

fn sweepable(key: &str) -> bool {
    key_type(key) == Some(ValueType::Number) && !CONTROL_KEYS.contains(&key)
}

/// Raw `key -> (value, source line)` pairs from a config file.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, (String, usize)>, ConfigError> {
    let mut out: BTreeMap<String, (String, usize)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(Some(line), content, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        if key_type(key).is_none() {
            return Err(err(Some(line), key, "unknown key"));
        }
        if let Some((_, first)) = out.get(key) {
            return Err(err(Some(line), key, format!("duplicate key, first set on line {first}, again on line {line}")));
        }
        out.insert(key.to_string(), (value.to_string(), line));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub scale: Scale,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i + 1 == n {
                    return self.max;
                }
                let f = i as f64 / (n - 1) as f64;
                match self.scale {
                    Scale::Linear => self.min + f * (self.max - self.min),
                    Scale::Log => (self.min.ln() + f * (self.max.ln() - self.min.ln())).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub kind: Kind,
    /// Every parameter in effect, as text, after defaults, file and flags.
    pub fixed: BTreeMap<String, String>,
    pub variable: String,
    pub grid: Grid,
    pub curve: Option<(String, Vec<f64>)>,
    pub output_path: String,
    pub quadrature: QuadratureConfig,
    pub workers: Option<usize>,
}

impl SweepSpec {
    pub fn number(&self, key: &str) -> f64 {
        self.fixed[key].parse().expect("validated number")
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        self.fixed.get(key).map(String::as_str)
    }

    pub fn vector(&self, key: &str) -> [f64; 3] {
        let v = parse_list(&self.fixed[key]).expect("validated vector");
        [v[0], v[1], v[2]]
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("`{}` is not a number", p.trim())))
        .collect()
}

/// Per-kind defaults. Figure geometries where the captions state them, the
/// rest representative.
pub fn defaults(kind: Kind) -> Vec<(&'static str, &'static str)> {
    let mut d = vec![
        ("sigma", "1"),
        ("lambda", "0.1"),
        ("mass", "0"),
        ("x_com", "0"),
        ("temperature", "0"),
        ("r", "0"),
        ("theta", "0"),
        ("scale", "linear"),
        ("curve", "none"),
    ];
    let specific: &[(&str, &str)] = match kind {
        Kind::ThermalNeg | Kind::ThermalMi => &[
            ("omega", "3"),
            ("d", "1"),
            ("variable", "temperature"),
            ("min", "0"),
            ("max", "6"),
            ("points", "61"),
            ("curve", "d"),
            ("curve_values", "0.5,1,2"),
        ],
        Kind::ThermalGap => &[
            ("omega", "3"),
            ("d", "2"),
            ("variable", "omega"),
            ("min", "0"),
            ("max", "8"),
            ("points", "161"),
            ("curve", "temperature"),
            ("curve_values", "0.5,1,2"),
        ],
        Kind::SqueezeCom => &[
            ("omega", "1"),
            ("d", "2"),
            ("variable", "x_com"),
            ("min", "-4"),
            ("max", "4"),
            ("points", "81"),
            ("curve", "r"),
            ("curve_values", "0,0.5,1"),
        ],
        Kind::SqueezeR => &[
            ("omega", "1"),
            ("d", "2"),
            ("variable", "r"),
            ("min", "0"),
            ("max", "15"),
            ("points", "61"),
            ("curve", "d"),
            ("curve_values", "0.5,2,5"),
        ],
        Kind::SqueezeBand => &[
            ("omega", "1"),
            ("d", "1"),
            ("r", "1"),
            ("k_center", "1,0,0"),
            ("epsilon", "1"),
            ("variable", "epsilon"),
            ("min", "0.1"),
            ("max", "16"),
            ("points", "40"),
            ("curve", "d"),
            ("curve_values", "1,5"),
        ],
        Kind::CoherentCheck => &[
            ("omega", "3"),
            ("d", "0.5"),
            ("lambda", "0.01"),
            ("a0", "1"),
            ("alpha_width", "1"),
            ("variable", "a0"),
            ("min", "0"),
            ("max", "5"),
            ("points", "11"),
        ],
        Kind::WightmanCheck => &[
            ("omega", "1"),
            ("d", "1"),
            ("radius", "1.25"),
            ("t", "0"),
            ("temperature", "1"),
            ("variable", "t"),
            ("min", "0"),
            ("max", "3"),
            ("points", "31"),
        ],
        Kind::Selfcheck => &[("omega", "1"), ("d", "1"), ("variable", "omega"), ("min", "0"), ("max", "1"), ("points", "2")],
    };
    for &(k, v) in specific {
        d.retain(|(dk, _)| *dk != k);
        d.push((k, v));
    }
    d
}

/// Defaults, then file entries, then flags.
pub fn build_spec(
    kind: Kind,
    file: &BTreeMap<String, (String, usize)>,
    flags: &BTreeMap<String, String>,
) -> Result<SweepSpec, ConfigError> {
    let mut values: BTreeMap<String, (String, Option<usize>)> = BTreeMap::new();
    for (k, v) in defaults(kind) {
        values.insert(k.to_string(), (v.to_string(), None));
    }
    for (k, (v, line)) in file {
        values.insert(k.clone(), (v.clone(), Some(*line)));
    }
    for (k, v) in flags {
        if key_type(k).is_none() {
            return Err(err(None, k, "unknown key"));
        }
        values.insert(k.clone(), (v.clone(), None));
    }
    if !values.contains_key("out") {
        values.insert("out".into(), (format!("{}.csv", kind.name()), None));
    }
    for (k, (v, line)) in &values {
        let bad = |m: String| Err(err(*line, k, m));
        match key_type(k).expect("known key") {
            ValueType::Number => match v.parse::<f64>() {
                Ok(x) if x.is_finite() => {}
                _ => return bad(format!("`{v}` is not a finite number")),
            },
            ValueType::Count => match v.parse::<usize>() {
                Ok(_) => {}
                Err(_) => return bad(format!("`{v}` is not a non-negative integer")),
            },
            ValueType::Vector => match parse_list(v) {
                Ok(l) if l.len() == 3 => {}
                Ok(l) => return bad(format!("expected 3 components, found {}", l.len())),
                Err(m) => return bad(m),
            },
            ValueType::List => {
                if let Err(m) = parse_list(v) {
                    return bad(m);
                }
            }
            ValueType::Text => {}
        }
    }
    let get = |k: &str| values.get(k).map(|(v, _)| v.as_str());
    let line_of = |k: &str| values.get(k).and_then(|(_, l)| *l);
    let num = |k: &str| get(k).map(|v| v.parse::<f64>().expect("checked"));

    let variable = get("variable").unwrap_or_default().to_string();
    if !sweepable(&variable) {
        return Err(err(line_of("variable"), "variable", format!("`{variable}` is not a sweepable parameter")));
    }
    let scale = match get("scale").unwrap_or("linear") {
        "linear" => Scale::Linear,
        "log" => Scale::Log,
        other => return Err(err(line_of("scale"), "scale", format!("`{other}` is not linear or log"))),
    };
    let (min, max) = match (num("min"), num("max")) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(err(None, "min", "grid needs min and max")),
    };
    let points: usize = get("points").map(|p| p.parse().expect("checked")).unwrap_or(0);
    if points < 2 {
        return Err(err(line_of("points"), "points", "a grid needs at least 2 points"));
    }
    if !(min < max) {
        return Err(err(line_of("max"), "max", format!("min = {min} must be below max = {max}")));
    }
    if scale == Scale::Log && !(min > 0.0) {
        return Err(err(line_of("min"), "min", "a log grid needs min > 0"));
    }
    let curve = match get("curve").unwrap_or("none") {
        "none" => None,
        c => {
            if !sweepable(c) || c == variable {
                return Err(err(line_of("curve"), "curve", format!("`{c}` cannot label curves here")));
            }
            let list = get("curve_values")
                .ok_or_else(|| err(line_of("curve"), "curve_values", "curve set without curve_values"))?;
            let vals = parse_list(list).expect("checked");
            if vals.is_empty() {
                return Err(err(line_of("curve_values"), "curve_values", "empty list"));
            }
            Some((c.to_string(), vals))
        }
    };
    let mut quadrature = if kind == Kind::SqueezeBand {
        QuadratureConfig::cubature()
    } else {
        QuadratureConfig::default()
    };
    if let Some(v) = num("rel_tol") {
        quadrature.rel_tol = v;
    }
    if let Some(v) = num("abs_tol") {
        quadrature.abs_tol = v;
    }
    if let Some(v) = get("max_subdivisions") {
        quadrature.max_subdivisions = v.parse().expect("checked");
    }
    if let Some(v) = num("envelope_cutoff") {
        quadrature.envelope_cutoff = v;
    }
    if let Err(e) = quadrature.validate() {
        return Err(err(None, "rel_tol", e.to_string()));
    }
    let workers = get("workers").map(|w| w.parse::<usize>().expect("checked"));
    if workers == Some(0) {
        return Err(err(line_of("workers"), "workers", "must be at least 1"));
    }
    Ok(SweepSpec {
        kind,
        fixed: values.iter().map(|(k, (v, _))| (k.clone(), v.clone())).collect(),
        variable,
        grid: Grid { min, max, points, scale },
        curve,
        output_path: get("out").unwrap_or_default().to_string(),
        quadrature,
        workers,
    })
}
