//! Experiment execution: the three evolution methods, the Monte Carlo vs
//! exact-averaged cross-check, and the table builders for the oracle and
//! check subcommands.

use std::f64::consts::PI;

use qwalk::asymptotics::{alpha_gravitational, diffusion_e, diffusion_g};
use qwalk::continuum::{generator_g, generator_numeric, two_step_quadratic_g, verbatim_entry_orders};
use qwalk::density::{default_initial_density, DensityField};
use qwalk::gauge::{electric_field, gauge_transform, potential_from_angle_field, GaugeField};
use qwalk::grid::CircleGrid;
use qwalk::linalg::C64;
use qwalk::noise::{monte_carlo_average, step_averaged, NoiseCase, NoiseConfig};
use qwalk::observables::{
    fit_diffusion_coefficient, mean_square_displacement, probability_profile,
    pure_reduced_spin_series, reduced_spin_density, shannon_entropy, spin_coherence,
    ObservableSeries,
};
use qwalk::walk::{
    site_probabilities, step_wavefunction, step_wavefunction_extended, CoinAngles, SpinorField,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{case_name, ExperimentConfig, Method, ObservableKind};
use crate::report::{ProfileSnapshot, RunBundle, Table};
use crate::CliError;

fn common_metadata(bundle: &mut RunBundle, cfg: &ExperimentConfig, command: &str) {
    bundle.meta("version", qwalk::VERSION);
    bundle.meta("command", command);
    bundle.meta("case", case_name(cfg.case));
    bundle.meta("sigma", cfg.sigma);
    bundle.meta("M", cfg.m_half);
    bundle.meta("steps", cfg.steps);
    bundle.meta("method", cfg.method.name());
    bundle.meta("format", cfg.format.name());
    bundle.meta("seed", cfg.seed);
    if cfg.method == Method::MonteCarlo {
        bundle.meta("realizations", cfg.realizations);
    }
    bundle.meta("trace_tolerance", "1e-12");
}

fn snapshot(grid: &CircleGrid, step: usize, values: Vec<f64>) -> ProfileSnapshot {
    ProfileSnapshot {
        step,
        sites: grid.sites().collect(),
        values,
    }
}

fn attach_fit(bundle: &mut RunBundle, cfg: &ExperimentConfig, m2: &[f64]) -> Result<(), CliError> {
    if cfg.steps < 8 {
        return Ok(());
    }
    let series = ObservableSeries::from_values("m2", m2.to_vec(), vec![])?;
    let window = ((cfg.steps / 2) as u64, cfg.steps as u64);
    let fit = fit_diffusion_coefficient(&series, window)?;
    bundle.fit = Some((fit, window));
    Ok(())
}

/// Largest modulus of the off-diagonal (left-right) block of a pure state's
/// density operator: the coherence observable without forming the operator.
fn pure_coherence(psi: &SpinorField) -> f64 {
    let max_l = psi.psi_l.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let max_r = psi.psi_r.iter().map(|v| v.norm()).fold(0.0, f64::max);
    max_l * max_r
}

fn run_pure(cfg: &ExperimentConfig, bundle: &mut RunBundle) -> Result<(), CliError> {
    let grid = CircleGrid::new(cfg.m_half)?;
    let angles = CoinAngles::hadamard();
    bundle.meta("note", "the pure method ignores sigma and uses the fixed reference coin");

    let mut psi = SpinorField::default_initial(grid);
    let mut m2 = vec![0.0];
    let mut coherence = vec![pure_coherence(&psi)];
    let mut wrapped_at = None;
    let mut final_profile = site_probabilities(&psi);
    for j in 1..=cfg.steps {
        psi = step_wavefunction(&psi, &angles);
        let profile = site_probabilities(&psi);
        let msd = mean_square_displacement(&profile, &grid)?;
        if msd.wrapped && wrapped_at.is_none() {
            wrapped_at = Some(j);
        }
        m2.push(msd.value);
        coherence.push(pure_coherence(&psi));
        if j == cfg.steps {
            final_profile = profile;
        }
    }
    if let Some(j) = wrapped_at {
        bundle.warn(format!("wavefront reached the boundary at step {j}"));
    }

    if cfg.wants(ObservableKind::Profile) {
        bundle.profile = Some(snapshot(&grid, cfg.steps, final_profile));
    }
    if cfg.wants(ObservableKind::SecondMoment) {
        attach_fit(bundle, cfg, &m2)?;
        bundle.series.push(("m2".into(), m2));
    }
    if cfg.wants(ObservableKind::Coherence) {
        bundle.series.push(("coherence".into(), coherence));
    }
    if cfg.wants(ObservableKind::Entropy) {
        let spins = pure_reduced_spin_series(grid, &angles, cfg.steps);
        let entropy: Result<Vec<f64>, _> = spins.iter().map(shannon_entropy).collect();
        bundle.series.push(("entropy".into(), entropy?));
    }
    Ok(())
}

fn run_exact_averaged(cfg: &ExperimentConfig, bundle: &mut RunBundle) -> Result<(), CliError> {
    let grid = CircleGrid::new(cfg.m_half)?;
    let noise_cfg = NoiseConfig::new(cfg.case, cfg.sigma)?.with_seed(cfg.seed);
    let mut rho = default_initial_density(grid);
    let mut m2 = Vec::with_capacity(cfg.steps + 1);
    let mut coherence = Vec::with_capacity(cfg.steps + 1);
    let mut entropy = Vec::with_capacity(cfg.steps + 1);
    let mut wrapped_at = None;
    let mut record = |rho: &DensityField, j: usize, wrapped_at: &mut Option<usize>| -> Result<Vec<f64>, CliError> {
        let profile = probability_profile(rho)?;
        let msd = mean_square_displacement(&profile, &grid)?;
        if msd.wrapped && wrapped_at.is_none() {
            *wrapped_at = Some(j);
        }
        m2.push(msd.value);
        coherence.push(spin_coherence(rho)?);
        entropy.push(shannon_entropy(&reduced_spin_density(rho)?)?);
        Ok(profile)
    };
    let mut final_profile = record(&rho, 0, &mut wrapped_at)?;
    for j in 1..=cfg.steps {
        rho = step_averaged(&rho, &noise_cfg)?;
        final_profile = record(&rho, j, &mut wrapped_at)?;
    }
    if let Some(j) = wrapped_at {
        bundle.warn(format!("wavefront reached the boundary at step {j}"));
    }

    if cfg.wants(ObservableKind::Profile) {
        bundle.profile = Some(snapshot(&grid, cfg.steps, final_profile));
    }
    if cfg.wants(ObservableKind::SecondMoment) {
        attach_fit(bundle, cfg, &m2)?;
        bundle.series.push(("m2".into(), m2));
    }
    if cfg.wants(ObservableKind::Coherence) {
        bundle.series.push(("coherence".into(), coherence));
    }
    if cfg.wants(ObservableKind::Entropy) {
        bundle.series.push(("entropy".into(), entropy));
    }
    Ok(())
}

fn run_monte_carlo(cfg: &ExperimentConfig, bundle: &mut RunBundle) -> Result<(), CliError> {
    let grid = CircleGrid::new(cfg.m_half)?;
    let noise_cfg = NoiseConfig::new(cfg.case, cfg.sigma)?
        .with_seed(cfg.seed)
        .with_realizations(cfg.realizations);
    let psi0 = SpinorField::default_initial(grid);
    let mc = monte_carlo_average(&psi0, &noise_cfg, cfg.steps, cfg.realizations, cfg.seed)?;

    let msd = mean_square_displacement(&mc.profile, &grid)?;
    if msd.wrapped {
        bundle.warn(format!(
            "ensemble-mean wavefront reached the boundary by step {}",
            cfg.steps
        ));
    }
    bundle.meta("final_m2", msd.value);
    bundle.meta("final_coherence", spin_coherence(&mc.mean)?);
    bundle.meta(
        "final_entropy",
        shannon_entropy(&reduced_spin_density(&mc.mean)?)?,
    );
    if cfg.wants(ObservableKind::Profile) {
        bundle.profile = Some(snapshot(&grid, cfg.steps, mc.profile));
        bundle.profile_std_error = Some(snapshot(&grid, cfg.steps, mc.profile_std_error));
    }
    Ok(())
}

/// Run one experiment to a result bundle. Deterministic given the config
/// and seed.
pub fn run_experiment(cfg: &ExperimentConfig, command: &str) -> Result<RunBundle, CliError> {
    let mut bundle = RunBundle::default();
    common_metadata(&mut bundle, cfg, command);
    match cfg.method {
        Method::Pure => run_pure(cfg, &mut bundle)?,
        Method::ExactAveraged => run_exact_averaged(cfg, &mut bundle)?,
        Method::MonteCarlo => run_monte_carlo(cfg, &mut bundle)?,
    }
    Ok(bundle)
}

pub fn cross_check_passes(l1: f64, budget: f64) -> bool {
    l1 <= budget
}

/// Monte Carlo and exact-averaged final profiles on one config: L1 distance
/// against a four-standard-error budget. Returns the report and whether the
/// check passed.
pub fn cross_check(cfg: &ExperimentConfig, command: &str) -> Result<(RunBundle, bool), CliError> {
    let grid = CircleGrid::new(cfg.m_half)?;
    let noise_cfg = NoiseConfig::new(cfg.case, cfg.sigma)?
        .with_seed(cfg.seed)
        .with_realizations(cfg.realizations);
    let psi0 = SpinorField::default_initial(grid);
    let mc = monte_carlo_average(&psi0, &noise_cfg, cfg.steps, cfg.realizations, cfg.seed)?;
    let exact = {
        let mut rho = default_initial_density(grid);
        for _ in 0..cfg.steps {
            rho = step_averaged(&rho, &noise_cfg)?;
        }
        probability_profile(&rho)?
    };
    let l1: f64 = mc
        .profile
        .iter()
        .zip(&exact)
        .map(|(a, b)| (a - b).abs())
        .sum();
    let budget: f64 = 4.0 * mc.profile_std_error.iter().sum::<f64>();
    let pass = cross_check_passes(l1, budget);

    let mut bundle = RunBundle::default();
    common_metadata(&mut bundle, cfg, command);
    bundle.meta("cross_check_l1", l1);
    bundle.meta("cross_check_budget", budget);
    bundle.meta("cross_check_pass", pass);
    if cfg.wants(ObservableKind::Profile) {
        bundle.profile = Some(snapshot(&grid, cfg.steps, mc.profile));
        bundle.profile_std_error = Some(snapshot(&grid, cfg.steps, mc.profile_std_error));
        bundle.series.push(("exact_profile".into(), exact));
    }
    Ok((bundle, pass))
}

/// Closed-form coefficient table over a σ grid, with per-row ordering and
/// monotonicity flags. Singular evaluations are flagged, never dropped.
pub fn oracle_table(sigmas: &[f64]) -> Table {
    let mut table = Table::default();
    table.meta("version", qwalk::VERSION);
    table.meta("command", "oracles");
    table.meta("points", sigmas.len());
    table.columns = vec![
        "sigma".into(),
        "diffusion_electric".into(),
        "diffusion_gravitational".into(),
        "alpha_gravitational".into(),
        "ordered".into(),
        "decreasing_electric".into(),
        "decreasing_gravitational".into(),
        "flag".into(),
    ];
    let mut previous: Option<(Option<f64>, Option<f64>)> = None;
    for &sigma in sigmas {
        let d_e = diffusion_e(sigma).ok();
        let d_g = diffusion_g(sigma).ok();
        let a_g = alpha_gravitational(sigma).ok();
        let singular = d_e.is_none() || d_g.is_none() || a_g.is_none();
        let ordered = match (d_e, d_g) {
            (Some(e), Some(g)) => Value::Bool(g < e),
            _ => Value::Null,
        };
        let decreasing = |now: Option<f64>, before: Option<Option<f64>>| match (now, before.flatten())
        {
            (Some(n), Some(b)) => Value::Bool(n < b),
            _ => Value::Null,
        };
        let dec_e = decreasing(d_e, previous.map(|p| p.0));
        let dec_g = decreasing(d_g, previous.map(|p| p.1));
        let number = |v: Option<f64>| v.map_or(Value::Null, |x| json!(x));
        table.rows.push(vec![
            json!(sigma),
            number(d_e),
            number(d_g),
            number(a_g),
            ordered,
            dec_e,
            dec_g,
            Value::String(if singular { "singular".into() } else { "ok".into() }),
        ]);
        previous = Some((d_e, d_g));
    }
    table
}

/// Per-entry order-of-agreement report for the published quadratic
/// expansion of the squared averaged operator, plus the order test on the
/// numerically derived truncation. Returns the table and whether the
/// numeric order test passed.
pub fn continuum_report(epsilon: f64) -> (Table, bool) {
    let published = verbatim_entry_orders(
        |k, p, s| generator_g(k, p, s).matrix,
        (1.0, 1.0, 1.0),
        epsilon,
    );
    let quadratic = verbatim_entry_orders(two_step_quadratic_g, (1.0, 1.0, 1.0), epsilon);
    let worst_deviation = |eps: f64| {
        let exact = generator_numeric(NoiseCase::Gravitational, eps, eps, eps).matrix;
        exact.max_abs_diff(&two_step_quadratic_g(eps, eps, eps))
    };
    let global_ratio = worst_deviation(epsilon) / worst_deviation(0.5 * epsilon);
    let per_entry_ok = quadratic.iter().flatten().all(|r| *r >= 6.0);
    let pass = per_entry_ok && (6.0..=10.0).contains(&global_ratio);

    let mut breaking = Vec::new();
    let mut table = Table::default();
    table.meta("version", qwalk::VERSION);
    table.meta("command", "continuum-check");
    table.meta("epsilon", epsilon);
    table.columns = vec![
        "row".into(),
        "col".into(),
        "published_ratio".into(),
        "published_second_order".into(),
    ];
    for i in 0..4 {
        for j in 0..4 {
            let ratio = published[i][j];
            let matches = ratio >= 6.0;
            if !matches {
                breaking.push(format!("({i},{j})"));
            }
            let cell = if ratio.is_finite() {
                json!(ratio)
            } else {
                Value::String("inf".into())
            };
            table
                .rows
                .push(vec![json!(i), json!(j), cell, Value::Bool(matches)]);
        }
    }
    table.meta("published_breaking_entries", breaking.join(";"));
    table.meta("numeric_global_ratio", global_ratio);
    table.meta("numeric_order_ok", pass);
    (table, pass)
}

/// Random-phase gauge trials: invariance of the electric field and of the
/// probability profile, with the worst deviations per trial. Returns the
/// table and whether every deviation stayed below 1e-12.
pub fn gauge_report(
    trials: usize,
    m_half: usize,
    steps: usize,
    seed: u64,
) -> Result<(Table, bool), CliError> {
    let grid = CircleGrid::new(m_half)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = Table::default();
    table.meta("version", qwalk::VERSION);
    table.meta("command", "gauge-check");
    table.meta("trials", trials);
    table.meta("M", m_half);
    table.meta("steps", steps);
    table.meta("seed", seed);
    table.meta("tolerance", "1e-12");
    table.columns = vec![
        "trial".into(),
        "field_deviation".into(),
        "profile_deviation".into(),
    ];
    let mut pass = true;
    for trial in 0..trials {
        let angles: Vec<Vec<CoinAngles>> = (0..steps)
            .map(|_| {
                (0..grid.size())
                    .map(|_| {
                        CoinAngles::extended(
                            rng.gen::<f64>() * PI,
                            rng.gen::<f64>() * 2.0 * PI,
                            rng.gen::<f64>() * 2.0 * PI,
                            rng.gen::<f64>() * 2.0 * PI,
                        )
                    })
                    .collect()
            })
            .collect();
        let phi: Vec<Vec<f64>> = (0..steps + 1)
            .map(|_| (0..grid.size()).map(|_| rng.gen::<f64>() * 2.0 * PI).collect())
            .collect();
        let phi0 = phi[0].clone();
        let phase_field = GaugeField::new(grid, phi)?;
        let transformed = gauge_transform(&angles, &phase_field)?;

        let before = electric_field(&potential_from_angle_field(&angles), grid)?;
        let after = electric_field(&potential_from_angle_field(&transformed), grid)?;
        let mut field_deviation = 0.0f64;
        for (row_b, row_a) in before.iter().zip(&after) {
            for (b, a) in row_b.iter().zip(row_a) {
                field_deviation = field_deviation.max((b - a).abs());
            }
        }

        let mut plain = SpinorField::default_initial(grid);
        let mut gauged = SpinorField::default_initial(grid);
        for idx in 0..grid.size() {
            let phase = C64::new(0.0, -phi0[idx]).exp();
            gauged.psi_l[idx] *= phase;
            gauged.psi_r[idx] *= phase;
        }
        let mut profile_deviation = 0.0f64;
        for j in 0..steps {
            plain = step_wavefunction_extended(&plain, &angles[j])?;
            gauged = step_wavefunction_extended(&gauged, &transformed[j])?;
            for (a, b) in site_probabilities(&plain)
                .iter()
                .zip(&site_probabilities(&gauged))
            {
                profile_deviation = profile_deviation.max((a - b).abs());
            }
        }

        pass &= field_deviation <= 1e-12 && profile_deviation <= 1e-12;
        table.rows.push(vec![
            json!(trial),
            json!(field_deviation),
            json!(profile_deviation),
        ]);
    }
    table.meta("pass", pass);
    Ok((table, pass))
}
