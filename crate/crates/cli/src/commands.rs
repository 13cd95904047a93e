//! Subcommand bodies. Each writes its data files into the output directory
//! and returns the summary recorded in the manifest.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde_json::{json, Map, Value};

use ptwalk::evolution::{auto_sites, classify_growth, distribution_moments, init_state, run, MIN_SERIES};
use ptwalk::momentum::{exceptional_gamma, experiment_dispersion, scan_bz, REALITY_TOL};
use ptwalk::operators::Chirality;
use ptwalk::spectral::{eigenvalues, unimodularity};
use ptwalk::symmetry::{
    check_bloch_symmetry, check_position_pcs, check_position_phs, check_position_pt, check_table_conditions,
    find_modified_phs_shift, table_row, verify_dense_symmetry, SymmetryKind, SymmetryReport,
};
use ptwalk::{Frame, WalkConfig, WalkError};

use crate::config::{ParsedConfig, Walk, DEFAULT_SITES};
use crate::error::CliError;
use crate::output::{Cell, Csv, OutDir};

pub const DEFAULT_DISPERSION_GRID: usize = 401;
pub const DEFAULT_SYMMETRY_GRID: usize = 64;
pub const DEFAULT_STEPS: usize = 200;
pub const DEFAULT_SPECTRUM_TOL: f64 = 1e-6;
pub const DEFAULT_SYMMETRY_TOL: f64 = 1e-9;
/// Violations listed per symmetry in `symmetry.json`; the rest are counted.
pub const MAX_LISTED_VIOLATIONS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub grid: Option<usize>,
    pub steps: Option<usize>,
    pub frame: Frame,
    pub tol: Option<f64>,
}

/// Momenta `k_j = −π + 2π(j+1)/M`, the grid used by band scans.
fn momentum_grid(m: usize) -> Vec<f64> {
    (0..m).map(|j| -PI + 2.0 * PI * (j + 1) as f64 / m as f64).collect()
}

fn grid(opts: &Options, default: usize) -> Result<usize, CliError> {
    match opts.grid.unwrap_or(default) {
        m if m < 2 => Err(CliError::Usage(format!("--grid must be at least 2, got {m}"))),
        m => Ok(m),
    }
}

fn tolerance(opts: &Options, default: f64) -> Result<f64, CliError> {
    match opts.tol.unwrap_or(default) {
        t if t > 0.0 && t.is_finite() => Ok(t),
        t => Err(CliError::Usage(format!("--tol must be positive and finite, got {t}"))),
    }
}

fn frame_name(frame: Frame) -> &'static str {
    match frame {
        Frame::Original => "original",
        Frame::Symmetry => "symmetry",
    }
}

pub fn dispersion(cfg: &ParsedConfig, opts: &Options, out: &mut OutDir) -> Result<Value, CliError> {
    let m = grid(opts, DEFAULT_DISPERSION_GRID)?;
    if cfg.preset.as_deref() == Some("experiment") {
        return experiment_bands(cfg, m, out);
    }
    let p = cfg.homogeneous()?;
    let scan = scan_bz(&p, m)?;
    let mut csv = Csv::new(&["k", "re_eps_plus", "im_eps_plus", "re_eps_minus", "im_eps_minus", "eta", "xi_real"]);
    for pt in &scan.points {
        csv.row(&[
            Cell::F(pt.k),
            Cell::F(pt.eps_plus.re),
            Cell::F(pt.eps_plus.im),
            Cell::F(pt.eps_minus.re),
            Cell::F(pt.eps_minus.im),
            Cell::F(pt.eta),
            Cell::B(pt.xi_is_real()),
        ]);
    }
    out.write_csv("dispersion.csv", &csv)?;
    Ok(json!({
        "grid": m,
        "max_imag": scan.max_imag(),
        "complex_windows": scan.complex_windows(),
    }))
}

/// Four bands of the period-4 experiment walk.
fn experiment_bands(cfg: &ParsedConfig, m: usize, out: &mut OutDir) -> Result<Value, CliError> {
    let preset = &cfg.resolved["preset"];
    let gamma0 = preset["gamma0"].as_f64().unwrap_or(0.0);
    let phi0 = preset["phi0"].as_f64().unwrap_or(0.0);
    let mut csv = Csv::new(&[
        "k", "re_eps_1", "im_eps_1", "re_eps_2", "im_eps_2", "re_eps_3", "im_eps_3", "re_eps_4", "im_eps_4",
    ]);
    let mut max_imag: f64 = 0.0;
    for k in momentum_grid(m) {
        let bands = experiment_dispersion(k, gamma0, phi0)?;
        let mut cells = vec![Cell::F(k)];
        for e in &bands {
            max_imag = max_imag.max(e.im.abs());
            cells.extend([Cell::F(e.re), Cell::F(e.im)]);
        }
        csv.row(&cells);
    }
    out.write_csv("dispersion.csv", &csv)?;
    Ok(json!({ "grid": m, "bands": 4, "max_imag": max_imag }))
}

pub fn evolve(cfg: &ParsedConfig, opts: &Options, out: &mut OutDir) -> Result<Value, CliError> {
    let steps = opts.steps.unwrap_or(DEFAULT_STEPS);
    let config = match &cfg.walk {
        Walk::Homogeneous { sites: None, .. } => cfg.lattice(auto_sites(steps))?,
        _ => cfg.lattice(DEFAULT_SITES)?,
    };
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let spinor = match cfg.initial.chirality {
        Chirality::Left => [one, zero],
        Chirality::Right => [zero, one],
    };
    let s0 = init_state(config.sites(), cfg.initial.site, spinor)?;
    let record = run(&config, &s0, steps)?;

    let mut csv = Csv::new(&["t", "total_probability"]);
    for (t, p) in record.total_probability.iter().enumerate() {
        csv.row(&[Cell::I(t as i64), Cell::F(*p)]);
    }
    out.write_csv("probability.csv", &csv)?;

    let mut csv = Csv::new(&["t", "n", "probability"]);
    for (t, dist) in record.distributions.iter().enumerate() {
        for (j, p) in dist.iter().enumerate() {
            csv.row(&[Cell::I(t as i64), Cell::I(config.coordinate(j)), Cell::F(*p)]);
        }
    }
    out.write_csv("distribution.csv", &csv)?;

    let (regime, reason) = if record.total_probability.len() < MIN_SERIES {
        (Value::Null, json!(format!("needs at least {MIN_SERIES} points")))
    } else {
        match classify_growth(&record.total_probability) {
            Ok(r) => (json!(r), Value::Null),
            Err(e @ WalkError::Unclassified { .. }) => (Value::Null, json!(e.to_string())),
            Err(e) => return Err(e.into()),
        }
    };
    let moments = distribution_moments(&record.final_state)?;
    let growth = json!({
        "sites": config.sites(),
        "steps": steps,
        "regime": regime,
        "unclassified_reason": reason,
        "final_total_probability": record.total_probability[steps],
        "final_moments": moments,
    });
    out.write_json("growth.json", &growth)?;
    Ok(growth)
}

pub fn spectrum(cfg: &ParsedConfig, opts: &Options, out: &mut OutDir) -> Result<Value, CliError> {
    let tol = tolerance(opts, DEFAULT_SPECTRUM_TOL)?;
    let config = cfg.lattice(DEFAULT_SITES)?;
    let s = eigenvalues(&config, opts.frame)?;
    let (real, deviation) = unimodularity(&s, tol);
    let mut sorted = s.eigenvalues.clone();
    sorted.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut csv = Csv::new(&["re", "im", "abs_minus_one"]);
    for l in &sorted {
        csv.row(&[Cell::F(l.re), Cell::F(l.im), Cell::F(l.norm() - 1.0)]);
    }
    out.write_csv("spectrum.csv", &csv)?;
    let report = json!({
        "sites": config.sites(),
        "dimension": config.dim(),
        "frame": frame_name(opts.frame),
        "count": sorted.len(),
        "max_unimodularity_deviation": deviation,
        "real_quasienergy": real,
        "tolerance": tol,
        "sampled_residual": s.sampled_residual,
    });
    out.write_json("spectrum.json", &report)?;
    Ok(report)
}

fn report_json(r: &SymmetryReport) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("holds".into(), json!(r.holds));
    m.insert("max_residual".into(), json!(r.max_residual));
    m.insert("violation_count".into(), json!(r.violations.len()));
    m.insert("violations".into(), json!(&r.violations[..r.violations.len().min(MAX_LISTED_VIOLATIONS)]));
    m
}

/// Position-space report with the witness under `key` and the dense
/// residual at that witness.
fn position_entry(c: &WalkConfig, r: &SymmetryReport, key: &str, tol: f64) -> Result<Value, CliError> {
    let mut m = report_json(r);
    match r.witness {
        Some(w) => {
            let residual = verify_dense_symmetry(c, r.kind, w.offset())?;
            m.insert(key.into(), json!(w.offset()));
            m.insert("dense_residual".into(), json!(residual));
            m.insert("dense_holds".into(), json!(residual < tol));
        }
        None => {
            m.insert(key.into(), Value::Null);
        }
    }
    Ok(Value::Object(m))
}

fn dense_only(c: &WalkConfig, kind: SymmetryKind, tol: f64) -> Result<Value, CliError> {
    let residual = verify_dense_symmetry(c, kind, 0)?;
    Ok(json!({ "holds": residual < tol, "dense_residual": residual }))
}

pub fn check_symmetry(cfg: &ParsedConfig, opts: &Options, out: &mut OutDir) -> Result<Value, CliError> {
    let tol = tolerance(opts, DEFAULT_SYMMETRY_TOL)?;
    let mut symmetries = Map::new();
    let report = match &cfg.walk {
        Walk::Homogeneous { params, .. } => {
            let m = grid(opts, DEFAULT_SYMMETRY_GRID)?;
            let ks = momentum_grid(m);
            for kind in SymmetryKind::ALL {
                let mut entry = report_json(&check_bloch_symmetry(params, kind, &ks)?);
                entry.insert("table".into(), json!(table_row(params, kind)?));
                entry.insert("table_holds".into(), json!(check_table_conditions(params, kind)?.holds));
                symmetries.insert(kind.name().into(), Value::Object(entry));
            }
            json!({ "level": "bloch", "grid": m, "symmetries": symmetries })
        }
        Walk::Lattice(c) => {
            let checks = [
                (check_position_pt(c), "q"),
                (check_position_pcs(c), "q"),
                (check_position_phs(c), "r"),
                (find_modified_phs_shift(c), "r"),
            ];
            for (r, key) in &checks {
                symmetries.insert(r.kind.name().into(), position_entry(c, r, key, tol)?);
            }
            for kind in [SymmetryKind::TimeReversal, SymmetryKind::Chiral] {
                symmetries.insert(kind.name().into(), dense_only(c, kind, tol)?);
            }
            json!({ "level": "position", "sites": c.sites(), "tolerance": tol, "symmetries": symmetries })
        }
    };
    out.write_json("symmetry.json", &report)?;
    let holds: Map<String, Value> = symmetries.iter().map(|(k, v)| (k.clone(), v["holds"].clone())).collect();
    Ok(Value::Object(holds))
}

pub fn exceptional_point(cfg: &ParsedConfig, opts: &Options, out: &mut OutDir) -> Result<Value, CliError> {
    let p = cfg.homogeneous()?;
    let m = grid(opts, DEFAULT_DISPERSION_GRID)?;
    let exp_gamma_star = exceptional_gamma(p.theta1, p.theta2)?;
    let gamma_star = exp_gamma_star.ln();
    let max_imag = scan_bz(&p, m)?.max_imag();
    let report = json!({
        "theta1": p.theta1,
        "theta2": p.theta2,
        "exp_gamma_star": exp_gamma_star,
        "gamma_star": gamma_star,
        "gamma": p.gamma,
        "phi": p.phi,
        "grid": m,
        "max_imag": max_imag,
        "pt_unbroken": max_imag <= REALITY_TOL,
    });
    out.write_json("exceptional.json", &report)?;
    Ok(report)
}
