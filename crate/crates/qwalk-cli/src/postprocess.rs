//! Post-processing of saved result bundles: parse a CSV or JSON export
//! produced by this tool and derive fitted coefficients, decay times, and
//! profile statistics from it.

use std::collections::BTreeMap;
use std::path::Path;

use qwalk::grid::CircleGrid;
use qwalk::observables::{
    coherence_decay_time, fit_diffusion_coefficient, profile_kurtosis, ObservableSeries,
};
use serde_json::{json, Value};

use crate::report::Table;
use crate::CliError;

#[derive(Debug, Default)]
pub struct SavedBundle {
    pub metadata: BTreeMap<String, String>,
    pub profile: Vec<f64>,
    pub series: BTreeMap<String, Vec<f64>>,
}

fn parse_csv(text: &str) -> Result<SavedBundle, CliError> {
    let mut bundle = SavedBundle::default();
    #[derive(PartialEq)]
    enum Section {
        Metadata,
        Profile,
        OtherTable,
        Series(String),
    }
    let mut section = Section::Metadata;
    let mut expect_header = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let (key, value) = rest.split_once('=').ok_or_else(|| {
                CliError::Config(format!("input line {}: malformed `{line}`", lineno + 1))
            })?;
            match key {
                "table" => {
                    section = if value == "profile" {
                        Section::Profile
                    } else {
                        Section::OtherTable
                    };
                    expect_header = true;
                }
                "series" => {
                    section = Section::Series(value.to_string());
                    bundle.series.insert(value.to_string(), Vec::new());
                    expect_header = true;
                }
                _ => {
                    bundle.metadata.insert(key.to_string(), value.to_string());
                }
            }
            continue;
        }
        if expect_header {
            expect_header = false;
            continue;
        }
        let mut cells = line.split(',');
        match &section {
            Section::Metadata => {
                return Err(CliError::Config(format!(
                    "input line {}: data before any table or series header",
                    lineno + 1
                )))
            }
            Section::Profile => {
                let value = cells.nth(2).ok_or_else(|| {
                    CliError::Config(format!("input line {}: profile row needs j,m,N", lineno + 1))
                })?;
                bundle.profile.push(value.parse().map_err(|_| {
                    CliError::Config(format!("input line {}: bad number `{value}`", lineno + 1))
                })?);
            }
            Section::OtherTable => {}
            Section::Series(name) => {
                let value = cells.nth(1).ok_or_else(|| {
                    CliError::Config(format!("input line {}: series row needs j,value", lineno + 1))
                })?;
                let parsed = value.parse().map_err(|_| {
                    CliError::Config(format!("input line {}: bad number `{value}`", lineno + 1))
                })?;
                bundle.series.get_mut(name).unwrap().push(parsed);
            }
        }
    }
    Ok(bundle)
}

fn parse_json(text: &str) -> Result<SavedBundle, CliError> {
    let document: Value = serde_json::from_str(text)
        .map_err(|e| CliError::Config(format!("input is not valid JSON: {e}")))?;
    let mut bundle = SavedBundle::default();
    if let Some(metadata) = document["metadata"].as_object() {
        for (key, value) in metadata {
            if let Some(text) = value.as_str() {
                bundle.metadata.insert(key.clone(), text.to_string());
            }
        }
    }
    if let Some(rows) = document["profile"]["rows"].as_array() {
        for row in rows {
            let value = row[1]
                .as_f64()
                .ok_or_else(|| CliError::Config("profile row without a number".into()))?;
            bundle.profile.push(value);
        }
    }
    if let Some(series) = document["series"].as_object() {
        for (name, values) in series {
            let parsed: Option<Vec<f64>> =
                values.as_array().map(|a| a.iter().filter_map(Value::as_f64).collect());
            if let Some(v) = parsed {
                bundle.series.insert(name.clone(), v);
            }
        }
    }
    Ok(bundle)
}

pub fn parse_saved(path: &Path) -> Result<SavedBundle, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("input file {}: {e}", path.display())))?;
    if text.trim_start().starts_with('{') {
        parse_json(&text)
    } else {
        parse_csv(&text)
    }
}

/// Derive fitted and windowed quantities from a saved bundle. Absent inputs
/// produce null rows rather than errors, so one report covers any export.
pub fn derive(bundle: &SavedBundle, fit_window: Option<(u64, u64)>) -> Result<Table, CliError> {
    let mut table = Table::default();
    table.meta("version", qwalk::VERSION);
    table.meta("command", "observables");
    for key in ["case", "sigma", "M", "steps", "method", "seed"] {
        if let Some(value) = bundle.metadata.get(key) {
            table.meta(&format!("source_{key}"), value);
        }
    }
    table.columns = vec!["quantity".into(), "value".into()];
    let mut row = |name: &str, value: Value| {
        table.rows.push(vec![Value::String(name.into()), value]);
    };

    if let Some(m2) = bundle.series.get("m2") {
        let window = match fit_window {
            Some(w) => w,
            None => ((m2.len() / 2) as u64, (m2.len() - 1) as u64),
        };
        let series = ObservableSeries::from_values("m2", m2.clone(), vec![])?;
        let fit = fit_diffusion_coefficient(&series, window)?;
        row("diffusion_coefficient", json!(fit.coefficient));
        row("diffusion_slope", json!(fit.slope));
        row("diffusion_intercept", json!(fit.intercept));
        row("diffusion_residual_rms", json!(fit.residual_rms));
        row("fit_window_start", json!(window.0));
        row("fit_window_end", json!(window.1));
    } else {
        row("diffusion_coefficient", Value::Null);
    }

    if let Some(coherence) = bundle.series.get("coherence") {
        let series = ObservableSeries::from_values("coherence", coherence.clone(), vec![])?;
        let tau = coherence_decay_time(&series, coherence[0], 5);
        row(
            "coherence_decay_time",
            tau.map_or(Value::Null, |t| json!(t)),
        );
    } else {
        row("coherence_decay_time", Value::Null);
    }

    if let Some(entropy) = bundle.series.get("entropy") {
        let lo = fit_window.map_or(entropy.len() / 2, |w| w.0 as usize);
        let hi = fit_window.map_or(entropy.len() - 1, |w| (w.1 as usize).min(entropy.len() - 1));
        if lo <= hi && hi < entropy.len() {
            let window = &entropy[lo..=hi];
            let mean = window.iter().sum::<f64>() / window.len() as f64;
            row("mean_entropy", json!(mean));
        } else {
            return Err(CliError::Config(format!(
                "field `fit-window`: [{lo}, {hi}] does not fit an entropy series of length {}",
                entropy.len()
            )));
        }
    } else {
        row("mean_entropy", Value::Null);
    }

    if bundle.profile.is_empty() {
        row("profile_kurtosis", Value::Null);
    } else {
        let m_half: usize = bundle
            .metadata
            .get("M")
            .ok_or_else(|| CliError::Config("input metadata is missing `M`".into()))?
            .parse()
            .map_err(|_| CliError::Config("input metadata `M` is not a number".into()))?;
        let grid = CircleGrid::new(m_half)?;
        if bundle.profile.len() != grid.size() {
            return Err(CliError::Config(format!(
                "profile has {} rows for a grid of {} sites",
                bundle.profile.len(),
                grid.size()
            )));
        }
        row("profile_kurtosis", json!(profile_kurtosis(&bundle.profile, &grid)?));
    }
    Ok(table)
}
