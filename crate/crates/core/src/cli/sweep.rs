//! Grid evaluation and CSV emission.

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use super::config::{ConfigError, Kind, SweepSpec};
use crate::coherent::{assemble_coherent_rho, first_order_amplitudes, CoherentAmplitudeFamily};
use crate::measures::{mutual_information, negativity, negativity_xform};
use crate::model::DetectorPair;
use crate::quadrature::QuadratureConfig;
use crate::squeezed::{total_squeezed_elements, BandlimitedSqueezing, SqueezeAmplitude, TabulatedZeta};
use crate::thermal::{thermal_wightman_closed, thermal_wightman_numeric, total_thermal_elements, ThermalSetup};
use crate::vacuum::{vacuum_elements, MatrixElements};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("compute error at {point}: {message}")]
    Compute { point: String, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Squeezing amplitude loaded once per sweep, if the kind needs one.
enum Extra {
    None,
    Table(SqueezeAmplitude),
}

fn load_extra(spec: &SweepSpec) -> Result<Extra, ConfigError> {
    match (spec.kind, spec.text("zeta_table")) {
        (Kind::SqueezeCom, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
                line: None,
                key: "zeta_table".into(),
                message: format!("cannot read {path}: {e}"),
            })?;
            let t = TabulatedZeta::parse(&text).map_err(|e| ConfigError {
                line: None,
                key: "zeta_table".into(),
                message: format!("{path}: {e}"),
            })?;
            Ok(Extra::Table(t.into_amplitude()))
        }
        (_, Some(_)) => Err(ConfigError {
            line: None,
            key: "zeta_table".into(),
            message: "only squeeze-com accepts a tabulated zeta".into(),
        }),
        _ => Ok(Extra::None),
    }
}

fn element_columns(mi: bool) -> Vec<&'static str> {
    let mut c = vec!["l_aa", "l_bb", "l_ab_re", "l_ab_im", "m_re", "m_im", "negativity", "negativity_norm"];
    if mi {
        c.push("mutual_information");
    }
    c
}

fn value_columns(kind: Kind) -> Vec<&'static str> {
    match kind {
        Kind::ThermalMi => element_columns(true),
        Kind::CoherentCheck => vec!["negativity", "negativity_vacuum", "residual", "amplitude_scale", "residual_over_cube"],
        Kind::WightmanCheck => vec!["closed", "numeric", "abs_diff"],
        _ => element_columns(false),
    }
}

fn element_row(el: &MatrixElements, lambda: f64, mi: bool) -> Result<Vec<f64>, String> {
    let n = negativity_xform(el, false).map_err(|e| e.to_string())?;
    let norm = negativity_xform(&el.scaled(1.0 / (lambda * lambda)), false).map_err(|e| e.to_string())?;
    let mut row = vec![el.l_aa.re, el.l_bb.re, el.l_ab.re, el.l_ab.im, el.m.re, el.m.im, n, norm];
    if mi {
        row.push(mutual_information(el).map_err(|e| e.to_string())?);
    }
    Ok(row)
}

fn pair_of(p: &BTreeMap<String, f64>) -> Result<DetectorPair, String> {
    DetectorPair::identical_on_axis(p["omega"], p["sigma"], p["lambda"], p["x_com"], p["d"]).map_err(|e| e.to_string())
}

fn evaluate(spec: &SweepSpec, extra: &Extra, p: &BTreeMap<String, f64>, cfg: &QuadratureConfig) -> Result<Vec<f64>, String> {
    let s = |e: &dyn std::fmt::Display| e.to_string();
    match spec.kind {
        Kind::ThermalNeg | Kind::ThermalGap | Kind::ThermalMi => {
            let pair = pair_of(p)?;
            let t = p["temperature"];
            let el = if t == 0.0 {
                vacuum_elements(&pair, p["mass"], cfg).map_err(|e| s(&e))?
            } else {
                if !(t > 0.0) {
                    return Err(format!("temperature = {t} must be >= 0"));
                }
                let setup = ThermalSetup::new(pair, 1.0 / t, p["mass"]).map_err(|e| s(&e))?;
                total_thermal_elements(&setup, cfg).map_err(|e| s(&e))?
            };
            element_row(&el, p["lambda"], spec.kind == Kind::ThermalMi)
        }
        Kind::SqueezeCom | Kind::SqueezeR => {
            let pair = pair_of(p)?;
            let amp = match extra {
                Extra::Table(a) => a.clone(),
                Extra::None => SqueezeAmplitude::uniform(p["r"], p["theta"]),
            };
            let el = total_squeezed_elements(&pair, &amp, cfg).map_err(|e| s(&e))?;
            element_row(&el, p["lambda"], false)
        }
        Kind::SqueezeBand => {
            let pair = pair_of(p)?;
            let amp = SqueezeAmplitude::Bandlimited(BandlimitedSqueezing {
                k_center: spec.vector("k_center"),
                epsilon: p["epsilon"],
                r: p["r"],
                theta: p["theta"],
            });
            let el = total_squeezed_elements(&pair, &amp, cfg).map_err(|e| s(&e))?;
            element_row(&el, p["lambda"], false)
        }
        Kind::CoherentCheck => {
            let pair = pair_of(p)?;
            let base = vacuum_elements(&pair, 0.0, cfg).map_err(|e| s(&e))?;
            let fam = |a0: f64| CoherentAmplitudeFamily {
                a0,
                width: p["alpha_width"],
            };
            let with = assemble_coherent_rho(&pair, fam(p["a0"]), &base, cfg).map_err(|e| s(&e))?;
            let without = assemble_coherent_rho(&pair, fam(0.0), &base, cfg).map_err(|e| s(&e))?;
            let n = negativity(&with).map_err(|e| s(&e))?;
            let n0 = negativity(&without).map_err(|e| s(&e))?;
            let amps = first_order_amplitudes(&pair, fam(p["a0"]), cfg).map_err(|e| s(&e))?;
            let scale = amps.a_plus.iter().map(|a| a.norm()).fold(0.0, f64::max);
            let resid = (n - n0).abs();
            let ratio = if scale > 0.0 { resid / scale.powi(3) } else { 0.0 };
            Ok(vec![n, n0, resid, scale, ratio])
        }
        Kind::WightmanCheck => {
            let t = p["temperature"];
            if !(t > 0.0) {
                return Err(format!("temperature = {t} must be > 0"));
            }
            let closed = thermal_wightman_closed(p["radius"], p["t"], 1.0 / t).map_err(|e| s(&e))?;
            let numeric = thermal_wightman_numeric(p["radius"], p["t"], 1.0 / t, cfg).map_err(|e| s(&e))?;
            Ok(vec![closed, numeric, (closed - numeric).abs()])
        }
        Kind::Selfcheck => Err("selfcheck is not a sweep".into()),
    }
}

/// Worker count: explicit value, else `HARVESTKIT_WORKERS`, else the number
/// of available cores.
pub fn resolve_workers(explicit: Option<usize>) -> Result<usize, ConfigError> {
    if let Some(w) = explicit {
        return Ok(w);
    }
    match std::env::var("HARVESTKIT_WORKERS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(w) if w >= 1 => Ok(w),
            _ => Err(ConfigError {
                line: None,
                key: "HARVESTKIT_WORKERS".into(),
                message: format!("`{v}` is not a positive integer"),
            }),
        },
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

pub fn compute_table(spec: &SweepSpec, workers: usize) -> Result<Table, SweepError> {
    let extra = load_extra(spec)?;
    let base: BTreeMap<String, f64> = spec
        .fixed
        .iter()
        .filter_map(|(k, v)| v.parse::<f64>().ok().map(|x| (k.clone(), x)))
        .collect();
    let curves: Vec<Option<f64>> = match &spec.curve {
        Some((_, vals)) => vals.iter().map(|v| Some(*v)).collect(),
        None => vec![None],
    };
    let grid = spec.grid.values();
    let points: Vec<(Option<f64>, f64)> = curves.iter().flat_map(|c| grid.iter().map(move |x| (*c, *x))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SweepError::Io(e.to_string()))?;
    let results: Vec<Result<Vec<f64>, SweepError>> = pool.install(|| {
        points
            .par_iter()
            .map(|&(c, x)| {
                let mut p = base.clone();
                p.insert(spec.variable.clone(), x);
                let mut label = format!("{} = {x}", spec.variable);
                if let (Some((name, _)), Some(cv)) = (&spec.curve, c) {
                    p.insert(name.clone(), cv);
                    label.push_str(&format!(", {name} = {cv}"));
                }
                let vals = evaluate(spec, &extra, &p, &spec.quadrature).map_err(|message| SweepError::Compute { point: label, message })?;
                let mut row = vec![x];
                if let Some(cv) = c {
                    row.push(cv);
                }
                row.extend(vals);
                Ok(row)
            })
            .collect()
    });
    let mut rows = Vec::with_capacity(results.len());
    for r in results {
        rows.push(r?);
    }
    let mut columns = vec![spec.variable.clone()];
    if let Some((name, _)) = &spec.curve {
        columns.push(name.clone());
    }
    columns.extend(value_columns(spec.kind).into_iter().map(String::from));
    Ok(Table { columns, rows })
}

/// Header block echoing every parameter, then the column line and rows.
/// Output path and worker count are left out so files from different runs
/// of the same sweep compare byte for byte.
pub fn render_csv(spec: &SweepSpec, table: &Table) -> String {
    let mut out = String::new();
    out.push_str(&format!("# harvestkit {VERSION}\n# kind = {}\n", spec.kind.name()));
    for (k, v) in &spec.fixed {
        if k == "out" || k == "workers" {
            continue;
        }
        out.push_str(&format!("# {k} = {v}\n"));
    }
    let q = &spec.quadrature;
    out.push_str(&format!(
        "# quadrature = rel_tol {:e}, abs_tol {:e}, max_subdivisions {}, envelope_cutoff {:e}\n",
        q.rel_tol, q.abs_tol, q.max_subdivisions, q.envelope_cutoff
    ));
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.12e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Table, SweepError> {
    let workers = resolve_workers(spec.workers)?;
    let table = compute_table(spec, workers)?;
    std::fs::write(&spec.output_path, render_csv(spec, &table)).map_err(|e| SweepError::Io(format!("{}: {e}", spec.output_path)))?;
    Ok(table)
}

/// A standalone matplotlib script that plots the negativity-like column of a
/// sweep CSV against the swept variable, one line per curve value.
pub fn plot_script(spec: &SweepSpec, csv_path: &str) -> String {
    let y = match spec.kind {
        Kind::ThermalMi => "mutual_information",
        Kind::CoherentCheck => "residual",
        Kind::WightmanCheck => "abs_diff",
        _ => "negativity_norm",
    };
    let curve = spec.curve.as_ref().map(|(n, _)| n.as_str()).unwrap_or("");
    format!(
        r##"import csv
import matplotlib.pyplot as plt

path = {csv_path:?}
with open(path) as fh:
    rows = list(csv.DictReader(line for line in fh if not line.startswith("#")))
x, y, curve = {x:?}, {y:?}, {curve:?}
groups = {{}}
for row in rows:
    groups.setdefault(row[curve] if curve else "", []).append((float(row[x]), float(row[y])))
for label, pts in groups.items():
    plt.plot([p[0] for p in pts], [p[1] for p in pts], label=(curve + " = " + label) if curve else None)
plt.xlabel(x)
plt.ylabel(y)
if curve:
    plt.legend()
plt.savefig(path.rsplit(".", 1)[0] + ".png", dpi=150)
"##,
        x = spec.variable
    )
}
