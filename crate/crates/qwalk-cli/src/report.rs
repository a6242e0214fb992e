//! Result bundles and their CSV/JSON writers. Both formats carry the same
//! fields; CSV leads with `#key=value` metadata lines, JSON mirrors them in
//! a `metadata` object. All writing is single-threaded and ordered, so a
//! fixed config and seed reproduce the output byte for byte.

use std::io::Write;
use std::path::Path;

use qwalk::observables::DiffusionFit;
use serde_json::{json, Map, Value};

use crate::config::Format;
use crate::CliError;

#[derive(Debug, Clone)]
pub struct ProfileSnapshot {
    pub step: usize,
    pub sites: Vec<i64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct RunBundle {
    pub metadata: Vec<(String, String)>,
    pub warnings: Vec<String>,
    pub profile: Option<ProfileSnapshot>,
    pub profile_std_error: Option<ProfileSnapshot>,
    /// Named series over steps 0..len-1.
    pub series: Vec<(String, Vec<f64>)>,
    pub fit: Option<(DiffusionFit, (u64, u64))>,
}

impl RunBundle {
    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    pub fn warn(&mut self, text: impl ToString) {
        self.warnings.push(text.to_string());
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.metadata {
            out.push_str(&format!("#{key}={value}\n"));
        }
        if let Some((fit, (j1, j2))) = &self.fit {
            out.push_str(&format!("#diffusion_coefficient={}\n", fit.coefficient));
            out.push_str(&format!("#diffusion_slope={}\n", fit.slope));
            out.push_str(&format!("#diffusion_intercept={}\n", fit.intercept));
            out.push_str(&format!("#diffusion_residual_rms={}\n", fit.residual_rms));
            out.push_str(&format!("#diffusion_window={j1}..{j2}\n"));
        }
        for warning in &self.warnings {
            out.push_str(&format!("#warning={warning}\n"));
        }
        if let Some(profile) = &self.profile {
            out.push_str("#table=profile\n");
            out.push_str("j,m,N\n");
            for (m, n) in profile.sites.iter().zip(&profile.values) {
                out.push_str(&format!("{},{m},{n}\n", profile.step));
            }
        }
        if let Some(se) = &self.profile_std_error {
            out.push_str("#table=profile_std_error\n");
            out.push_str("j,m,se\n");
            for (m, s) in se.sites.iter().zip(&se.values) {
                out.push_str(&format!("{},{m},{s}\n", se.step));
            }
        }
        for (name, values) in &self.series {
            out.push_str(&format!("#series={name}\n"));
            out.push_str("j,value\n");
            for (j, value) in values.iter().enumerate() {
                out.push_str(&format!("{j},{value}\n"));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let metadata: Map<String, Value> = self
            .metadata
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        let profile = |snapshot: &Option<ProfileSnapshot>| match snapshot {
            Some(p) => json!({
                "step": p.step,
                "rows": p.sites.iter().zip(&p.values)
                    .map(|(m, n)| json!([m, n])).collect::<Vec<_>>(),
            }),
            None => Value::Null,
        };
        let series: Map<String, Value> = self
            .series
            .iter()
            .map(|(name, values)| (name.clone(), json!(values)))
            .collect();
        let fit = match &self.fit {
            Some((fit, (j1, j2))) => json!({
                "coefficient": fit.coefficient,
                "slope": fit.slope,
                "intercept": fit.intercept,
                "residual_rms": fit.residual_rms,
                "window": [j1, j2],
            }),
            None => Value::Null,
        };
        let document = json!({
            "metadata": metadata,
            "warnings": self.warnings,
            "profile": profile(&self.profile),
            "profile_std_error": profile(&self.profile_std_error),
            "series": series,
            "diffusion_fit": fit,
        });
        let mut text = serde_json::to_string_pretty(&document).expect("serializable document");
        text.push('\n');
        text
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

/// Write rendered text to the path, or to stdout when no path was given.
pub fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| {
            CliError::Config(format!("field `out`: cannot write {}: {e}", path.display()))
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Config(format!("field `out`: stdout: {e}")))
        }
    }
}

/// A generic table with metadata, used by the oracle and check subcommands.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    fn cell_csv(value: &Value) -> String {
        match value {
            Value::Null => String::new(),
            Value::String(s) => s.clone(),
            other => other.to_string(),
        }
    }

    pub fn render(&self, format: Format, name: &str) -> String {
        match format {
            Format::Csv => {
                let mut out = String::new();
                for (key, value) in &self.metadata {
                    out.push_str(&format!("#{key}={value}\n"));
                }
                out.push_str(&format!("#table={name}\n"));
                out.push_str(&self.columns.join(","));
                out.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(Self::cell_csv).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
                out
            }
            Format::Json => {
                let metadata: Map<String, Value> = self
                    .metadata
                    .iter()
                    .map(|(k, v)| (k.clone(), Value::String(v.clone())))
                    .collect();
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let object: Map<String, Value> = self
                            .columns
                            .iter()
                            .cloned()
                            .zip(row.iter().cloned())
                            .collect();
                        Value::Object(object)
                    })
                    .collect();
                let document = json!({
                    "metadata": metadata,
                    "table": name,
                    "rows": rows,
                });
                let mut text =
                    serde_json::to_string_pretty(&document).expect("serializable document");
                text.push('\n');
                text
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_sections_are_ordered_and_prefixed() {
        let mut bundle = RunBundle::default();
        bundle.meta("version", "0.1.0");
        bundle.warn("wavefront reached the boundary at step 9");
        bundle.profile = Some(ProfileSnapshot {
            step: 2,
            sites: vec![-1, 0, 1],
            values: vec![0.25, 0.5, 0.25],
        });
        bundle.series.push(("m2".into(), vec![0.0, 1.0]));
        let text = bundle.to_csv();
        let meta_pos = text.find("#version=0.1.0").unwrap();
        let warn_pos = text.find("#warning=").unwrap();
        let table_pos = text.find("#table=profile\nj,m,N\n2,-1,0.25").unwrap();
        let series_pos = text.find("#series=m2\nj,value\n0,0\n1,1\n").unwrap();
        assert!(meta_pos < warn_pos && warn_pos < table_pos && table_pos < series_pos);
    }

    #[test]
    fn json_mirrors_the_csv_fields() {
        let mut bundle = RunBundle::default();
        bundle.meta("case", "electric");
        bundle.series.push(("entropy".into(), vec![0.5]));
        let value: Value = serde_json::from_str(&bundle.to_json()).unwrap();
        assert_eq!(value["metadata"]["case"], "electric");
        assert_eq!(value["series"]["entropy"][0], 0.5);
        assert!(value["profile"].is_null());
        assert!(value["diffusion_fit"].is_null());
    }

    #[test]
    fn table_renders_null_as_empty_cell() {
        let mut table = Table::default();
        table.columns = vec!["sigma".into(), "value".into()];
        table.rows.push(vec![json!(0.5), Value::Null]);
        let text = table.render(Format::Csv, "oracle");
        assert!(text.contains("0.5,\n"));
    }
}
