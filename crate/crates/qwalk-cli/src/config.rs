//! Experiment configuration: defaults, flat key=value config files, flag
//! overrides, and validation with field-named errors.

use std::collections::BTreeMap;
use std::path::PathBuf;

use qwalk::noise::NoiseCase;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Pure,
    MonteCarlo,
    ExactAveraged,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Pure => "pure",
            Method::MonteCarlo => "monte-carlo",
            Method::ExactAveraged => "exact-averaged",
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        match text {
            "pure" => Ok(Method::Pure),
            "monte-carlo" => Ok(Method::MonteCarlo),
            "exact-averaged" => Ok(Method::ExactAveraged),
            other => Err(CliError::Config(format!(
                "field `method`: expected pure, monte-carlo, or exact-averaged, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn name(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        match text {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CliError::Config(format!(
                "field `format`: expected csv or json, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservableKind {
    Profile,
    SecondMoment,
    Coherence,
    Entropy,
}

impl ObservableKind {
    pub const ALL: [ObservableKind; 4] = [
        ObservableKind::Profile,
        ObservableKind::SecondMoment,
        ObservableKind::Coherence,
        ObservableKind::Entropy,
    ];

    pub fn parse_list(text: &str) -> Result<Vec<ObservableKind>, CliError> {
        if text == "all" {
            return Ok(Self::ALL.to_vec());
        }
        let mut out = Vec::new();
        for item in text.split(',') {
            let kind = match item.trim() {
                "profile" => ObservableKind::Profile,
                "m2" => ObservableKind::SecondMoment,
                "coherence" => ObservableKind::Coherence,
                "entropy" => ObservableKind::Entropy,
                other => {
                    return Err(CliError::Config(format!(
                        "field `observables`: unknown observable `{other}` \
                         (expected profile, m2, coherence, entropy, or all)"
                    )))
                }
            };
            if !out.contains(&kind) {
                out.push(kind);
            }
        }
        if out.is_empty() {
            return Err(CliError::Config(
                "field `observables`: the list is empty".into(),
            ));
        }
        Ok(out)
    }
}

fn parse_case(text: &str) -> Result<NoiseCase, CliError> {
    match text {
        "electric" | "e" => Ok(NoiseCase::Electric),
        "gravitational" | "g" => Ok(NoiseCase::Gravitational),
        other => Err(CliError::Config(format!(
            "field `case`: expected electric or gravitational, got `{other}`"
        ))),
    }
}

pub fn case_name(case: NoiseCase) -> &'static str {
    match case {
        NoiseCase::Electric => "electric",
        NoiseCase::Gravitational => "gravitational",
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub case: NoiseCase,
    pub sigma: f64,
    pub m_half: usize,
    pub steps: usize,
    pub method: Method,
    pub realizations: usize,
    pub seed: u64,
    pub observables: Vec<ObservableKind>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub allow_wrap: bool,
}

impl ExperimentConfig {
    pub fn wants(&self, kind: ObservableKind) -> bool {
        self.observables.contains(&kind)
    }
}

/// Raw flag values as given on the command line; `None` means the flag was
/// absent and the config file or the default applies.
#[derive(Debug, Default, Clone, clap::Args)]
pub struct RunArgs {
    /// Flat key=value config file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Noise case: electric or gravitational.
    #[arg(long)]
    pub case: Option<String>,
    /// Width of the uniform angle distribution, in [0, 2*pi).
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Circle half-width M; the grid has 2M+1 sites.
    #[arg(long = "M")]
    pub m_half: Option<usize>,
    /// Number of walk steps.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Evolution method: pure, monte-carlo, or exact-averaged.
    #[arg(long)]
    pub method: Option<String>,
    /// Number of Monte Carlo realizations.
    #[arg(long)]
    pub realizations: Option<usize>,
    /// Seed for every random draw in the run.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated observables (profile, m2, coherence, entropy) or all.
    #[arg(long)]
    pub observables: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Export format: csv or json.
    #[arg(long)]
    pub format: Option<String>,
    /// Permit steps >= M; the wavefront wrap is then reported as a warning.
    #[arg(long)]
    pub allow_wrap: bool,
}

const CONFIG_KEYS: [&str; 11] = [
    "case",
    "sigma",
    "M",
    "steps",
    "method",
    "realizations",
    "seed",
    "observables",
    "out",
    "format",
    "allow-wrap",
];

/// Parse a flat key=value file: one pair per line, `#` lines and blank
/// lines ignored, keys restricted to the ExperimentConfig fields.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!(
                "config line {}: expected key=value, got `{line}`",
                lineno + 1
            ))
        })?;
        let key = key.trim();
        let value = value.trim();
        if !CONFIG_KEYS.contains(&key) {
            return Err(CliError::Config(format!(
                "config line {}: unknown key `{key}`",
                lineno + 1
            )));
        }
        out.insert(key.to_string(), value.to_string());
    }
    Ok(out)
}

fn parse_field<T: std::str::FromStr>(value: &str, field: &str) -> Result<T, CliError> {
    value.parse().map_err(|_| {
        CliError::Config(format!("field `{field}`: cannot parse `{value}`"))
    })
}

/// Merge defaults, the config file, and the flags (in increasing
/// precedence), then validate every invariant. `forced_method` pins the
/// method for the `ensemble` and `averaged` subcommands.
pub fn resolve(args: &RunArgs, forced_method: Option<Method>) -> Result<ExperimentConfig, CliError> {
    let file = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("config file {}: {e}", path.display()))
            })?;
            parse_config_file(&text)?
        }
        None => BTreeMap::new(),
    };
    let lookup = |key: &str| file.get(key).map(String::as_str);

    let case = match (&args.case, lookup("case")) {
        (Some(flag), _) => parse_case(flag)?,
        (None, Some(value)) => parse_case(value)?,
        (None, None) => NoiseCase::Gravitational,
    };
    let sigma = match (args.sigma, lookup("sigma")) {
        (Some(flag), _) => flag,
        (None, Some(value)) => parse_field(value, "sigma")?,
        (None, None) => 0.5,
    };
    let m_half = match (args.m_half, lookup("M")) {
        (Some(flag), _) => flag,
        (None, Some(value)) => parse_field(value, "M")?,
        (None, None) => 64,
    };
    let steps = match (args.steps, lookup("steps")) {
        (Some(flag), _) => flag,
        (None, Some(value)) => parse_field(value, "steps")?,
        (None, None) => 50,
    };
    let method = match forced_method {
        Some(method) => {
            if let Some(flag) = &args.method {
                if Method::parse(flag)? != method {
                    return Err(CliError::Config(format!(
                        "field `method`: this subcommand always runs {}, got `{flag}`",
                        method.name()
                    )));
                }
            }
            method
        }
        None => match (&args.method, lookup("method")) {
            (Some(flag), _) => Method::parse(flag)?,
            (None, Some(value)) => Method::parse(value)?,
            (None, None) => Method::Pure,
        },
    };
    let realizations = match (args.realizations, lookup("realizations")) {
        (Some(flag), _) => flag,
        (None, Some(value)) => parse_field(value, "realizations")?,
        (None, None) => 100,
    };
    let seed = match (args.seed, lookup("seed")) {
        (Some(flag), _) => flag,
        (None, Some(value)) => parse_field(value, "seed")?,
        (None, None) => 0,
    };
    let observables = match (&args.observables, lookup("observables")) {
        (Some(flag), _) => ObservableKind::parse_list(flag)?,
        (None, Some(value)) => ObservableKind::parse_list(value)?,
        (None, None) => ObservableKind::ALL.to_vec(),
    };
    let out = match (&args.out, lookup("out")) {
        (Some(flag), _) => Some(flag.clone()),
        (None, Some(value)) => Some(PathBuf::from(value)),
        (None, None) => None,
    };
    let format = match (&args.format, lookup("format")) {
        (Some(flag), _) => Format::parse(flag)?,
        (None, Some(value)) => Format::parse(value)?,
        (None, None) => Format::Csv,
    };
    let allow_wrap = args.allow_wrap
        || matches!(lookup("allow-wrap"), Some("true") | Some("1") | Some("yes"));

    let cfg = ExperimentConfig {
        case,
        sigma,
        m_half,
        steps,
        method,
        realizations,
        seed,
        observables,
        out,
        format,
        allow_wrap,
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &ExperimentConfig) -> Result<(), CliError> {
    if !cfg.sigma.is_finite() || cfg.sigma < 0.0 || cfg.sigma >= std::f64::consts::TAU {
        return Err(CliError::Config(format!(
            "field `sigma`: must lie in [0, 2*pi), got {}",
            cfg.sigma
        )));
    }
    if cfg.m_half == 0 {
        return Err(CliError::Config(
            "field `M`: the circle half-width must be positive".into(),
        ));
    }
    if cfg.steps == 0 {
        return Err(CliError::Config(
            "field `steps`: at least one step is required".into(),
        ));
    }
    if cfg.steps >= cfg.m_half && !cfg.allow_wrap {
        return Err(CliError::Config(format!(
            "field `steps`: {} steps reach the boundary of a circle with M = {}; \
             pass --allow-wrap to accept wrap-around",
            cfg.steps, cfg.m_half
        )));
    }
    if cfg.method == Method::MonteCarlo && cfg.realizations == 0 {
        return Err(CliError::Config(
            "field `realizations`: monte-carlo requires at least one realization".into(),
        ));
    }
    Ok(())
}
