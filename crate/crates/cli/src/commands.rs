use spinladder::bath::{
    decorrelation_variance, ensemble_fidelity, fidelity_from_variance, linearized_fidelity,
    optimal_digit_count, preset, qd_derived_parameters, simulate_decorrelation, BathProcess,
    DecorrelationMode, QdPreset, EXPANSION_LIMIT,
};
use spinladder::posterior::EXACT_DIGIT_LIMIT;
use spinladder::protocol::monte_carlo_with_cache;
use spinladder::{
    protocol_time, ramsey_comparison_time, run_ideal, DigitString, EcStrategy, MonteCarloOptions,
    PosteriorCache, PriorDistribution, ProtocolConfig, ScaleMap,
};

use crate::args::Command;
use crate::error::{validation, CliError, CliResult};
use crate::output::{format_float, Cell, Table};
use crate::settings::{parse_digits, parse_floats, Resolver};

/// A fully validated job; building it performs every check up front.
pub enum Plan {
    Ideal(IdealPlan),
    MonteCarlo(McPlan),
    Decorrelate(DecorrelatePlan),
    Ramsey(RamseyPlan),
    Qd(QdPlan),
}

pub struct IdealPlan {
    digits: Vec<u32>,
    base: ProtocolConfig,
}

pub struct McPlan {
    digits: Vec<u32>,
    error_ps: Vec<f64>,
    strategies: Vec<EcStrategy>,
    runs: usize,
    batches: usize,
    base: ProtocolConfig,
    grid: usize,
}

pub struct DecorrelatePlan {
    process: BathProcess,
    window: f64,
    est_ratio: f64,
    lags: Vec<f64>,
    angles: Vec<f64>,
    fidelity_lag: f64,
    realizations: usize,
    step: f64,
    seed: u64,
}

pub struct RamseyPlan {
    digits: Vec<u32>,
    base: ProtocolConfig,
}

pub struct QdPlan {
    preset: QdPreset,
    base: ProtocolConfig,
    max_digits: u32,
}

struct Physical {
    delta0: f64,
    t_c: f64,
}

fn physical(r: &mut Resolver) -> CliResult<Physical> {
    let name = r.text("preset", "GaAs-large");
    let derived = qd_derived_parameters(&preset(&name)?)?;
    let delta0 = match r.optional::<f64>("delta0-inv")? {
        Some(t) if t > 0.0 && t.is_finite() => t.recip(),
        Some(t) => return Err(validation(format!("--delta0-inv {t} must be positive"))),
        None if derived.delta0 > 0.0 => derived.delta0,
        None => return Err(validation(format!("preset {name} has no field spread"))),
    };
    let t_c = match r.optional::<f64>("tc")? {
        Some(t) if t > 0.0 => t,
        Some(t) => return Err(validation(format!("--tc {t} must be positive"))),
        None => derived.t_c,
    };
    Ok(Physical { delta0, t_c })
}

fn base_config(r: &mut Resolver, delta0: f64) -> CliResult<ProtocolConfig> {
    let f: f64 = r.get("safety-factor", "1")?;
    let tau_m: f64 = r.get("tau-m", "1e-6")?;
    let scale = ScaleMap::new(delta0, f)?;
    let cfg = ProtocolConfig::new(1, scale).with_tau_m(tau_m);
    cfg.validate()?;
    Ok(cfg)
}

fn check_digits(digits: &[u32], base: &ProtocolConfig) -> CliResult<()> {
    for &m in digits {
        base.clone().with_digits(m).validate()?;
    }
    Ok(())
}

pub fn plan(command: Command, r: &mut Resolver) -> CliResult<Plan> {
    match command {
        Command::Ideal => {
            let digits = parse_digits(&r.text("digits", "1..8"))?;
            let phys = physical(r)?;
            let base = base_config(r, phys.delta0)?;
            check_digits(&digits, &base)?;
            if let Some(&m) = digits.iter().find(|&&m| m > EXACT_DIGIT_LIMIT) {
                return Err(validation(format!(
                    "exhaustive check limited to {EXACT_DIGIT_LIMIT} digits, got {m}"
                )));
            }
            Ok(Plan::Ideal(IdealPlan { digits, base }))
        }
        Command::Simulate | Command::SweepError | Command::EcCompare => {
            let (digits_default, p_default) = match command {
                Command::Simulate => ("8", "0"),
                Command::SweepError => ("1..16", "0,1e-4,1e-2,1e-1"),
                _ => ("1..16", "1e-2"),
            };
            let digits = parse_digits(&r.text("digits", digits_default))?;
            let error_ps = parse_floats("error-p", &r.text("error-p", p_default))?;
            if command != Command::SweepError && error_ps.len() != 1 {
                return Err(validation(
                    "--error-p takes a single value for this command",
                ));
            }
            let strategies = if command == Command::EcCompare {
                ["none", "s1", "s1-half", "s2"]
                    .iter()
                    .map(|n| EcStrategy::from_name(n))
                    .collect::<Result<Vec<_>, _>>()?
            } else {
                vec![EcStrategy::from_name(&r.text("ec", "none"))?]
            };
            let runs: usize = r.get("runs", "10000")?;
            let batches: usize = r.get("batches", "10")?;
            if batches < 2 || runs < batches {
                return Err(validation(format!(
                    "need at least 2 batches and as many runs as batches (runs {runs}, batches {batches})"
                )));
            }
            let seed: u64 = r.get("seed", "1")?;
            let grid: usize = r.get("grid", "4096")?;
            PriorDistribution::uniform(grid)?;
            let phys = physical(r)?;
            let base = base_config(r, phys.delta0)?.with_seed(seed);
            check_digits(&digits, &base)?;
            for &p in &error_ps {
                base.clone().with_error_p(p).validate()?;
            }
            Ok(Plan::MonteCarlo(McPlan {
                digits,
                error_ps,
                strategies,
                runs,
                batches,
                base,
                grid,
            }))
        }
        Command::Decorrelate => {
            let m: u32 = r.get("digits", "8")?;
            let phys = physical(r)?;
            let base = base_config(r, phys.delta0)?.with_digits(m);
            base.validate()?;
            let window = match r.optional::<f64>("window")? {
                Some(w) if w > 0.0 && w.is_finite() => w,
                Some(w) => return Err(validation(format!("--window {w} must be positive"))),
                None => {
                    let w = protocol_time(&base)?.total;
                    r.record("window", &format_float(w));
                    w
                }
            };
            let est_ratio: f64 = r.get("est-ratio", "0.025")?;
            let lags = parse_floats("lags", &r.text("lags", "0,0.5,1,2,4"))?;
            let angles = parse_floats(
                "angles",
                &r.text("angles", "0.785398163397,1.57079632679,3.14159265359"),
            )?;
            let fidelity_lag: f64 = r.get("fidelity-lag", "1")?;
            let realizations: usize = r.get("runs", "2000")?;
            let step: f64 = r.get("trajectory-step", "0.02")?;
            let seed: u64 = r.get("seed", "1")?;
            let strict = r.flag("strict")?;
            if !(est_ratio >= 0.0) || lags.iter().chain([&fidelity_lag]).any(|&l| l < 0.0) {
                return Err(validation("--est-ratio and lags must be nonnegative"));
            }
            if angles.iter().any(|&a| a < 0.0) {
                return Err(validation("--angles must be nonnegative"));
            }
            if realizations < 2 || !(step > 0.0 && step <= 1.0) {
                return Err(validation(
                    "need at least 2 runs and a trajectory step in (0, 1]",
                ));
            }
            let process = BathProcess::gaussian(phys.delta0, phys.t_c)?;
            if step * window > phys.t_c / 10.0 {
                eprintln!(
                    "warning: trajectory step {:e} s exceeds t_c / 10; simulated records are under-resolved",
                    step * window
                );
            }
            if strict && window > EXPANSION_LIMIT * phys.t_c {
                return Err(CliError::Regime(format!(
                    "window {window:e} s exceeds t_c / 10 = {:e} s",
                    EXPANSION_LIMIT * phys.t_c
                )));
            }
            Ok(Plan::Decorrelate(DecorrelatePlan {
                process,
                window,
                est_ratio,
                lags,
                angles,
                fidelity_lag,
                realizations,
                step,
                seed,
            }))
        }
        Command::CompareRamsey => {
            let digits = parse_digits(&r.text("digits", "1..12"))?;
            let ec = EcStrategy::from_name(&r.text("ec", "none"))?;
            let phys = physical(r)?;
            let base = base_config(r, phys.delta0)?.with_ec(ec);
            check_digits(&digits, &base)?;
            Ok(Plan::Ramsey(RamseyPlan { digits, base }))
        }
        Command::QdParams => {
            let name = r.text("preset", "GaAs-large");
            let mut q = preset(&name)?;
            if let Some(a) = r.optional::<f64>("hyperfine")? {
                q = q.with_hyperfine_ns(a)?;
            }
            if let Some(n) = r.optional::<f64>("nuclei")? {
                q = q.with_nuclei(n);
            }
            if let Some(p) = r.optional::<f64>("polarization")? {
                q = q.with_polarization(p);
            }
            if let Some(e) = r.optional::<f64>("epsilon-z")? {
                q = q.with_epsilon_z_ns(e);
            }
            q.validate()?;
            let f: f64 = r.get("safety-factor", "1")?;
            let tau_m: f64 = r.get("tau-m", "1e-6")?;
            let max_digits: u32 = r.get("max-digits", "30")?;
            let base = ProtocolConfig::new(max_digits, ScaleMap::new(1.0, f)?).with_tau_m(tau_m);
            base.validate()?;
            Ok(Plan::Qd(QdPlan {
                preset: q,
                base,
                max_digits,
            }))
        }
    }
}

impl Plan {
    pub fn execute(&self, command: Command, spec: Vec<(String, String)>) -> CliResult<Table> {
        let name = command.name();
        match self {
            Plan::Ideal(p) => ideal(p, name, spec),
            Plan::MonteCarlo(p) => monte_carlo(p, name, spec),
            Plan::Decorrelate(p) => decorrelate(p, name, spec),
            Plan::Ramsey(p) => ramsey(p, name, spec),
            Plan::Qd(p) => qd(p, name, spec),
        }
    }
}

fn ideal(p: &IdealPlan, name: &str, spec: Vec<(String, String)>) -> CliResult<Table> {
    let mut t = Table::new(
        name,
        spec,
        vec![
            "digits",
            "values_checked",
            "exact_matches",
            "interaction_time_s",
            "total_time_s",
        ],
    );
    for &m in &p.digits {
        let cfg = p.base.clone().with_digits(m);
        let mut matches = 0u64;
        let count = 1u64 << m;
        for n in 0..count {
            let s = DigitString::from_numerator(n, m)?;
            if run_ideal(&s, &cfg)?.result == s {
                matches += 1;
            }
        }
        let time = protocol_time(&cfg)?;
        t.push(vec![
            m.into(),
            count.into(),
            matches.into(),
            time.interaction.into(),
            time.total.into(),
        ]);
    }
    Ok(t)
}

fn monte_carlo(p: &McPlan, name: &str, spec: Vec<(String, String)>) -> CliResult<Table> {
    let prior = PriorDistribution::uniform(p.grid)?;
    let options = MonteCarloOptions {
        runs: p.runs,
        batches: p.batches,
        ..Default::default()
    };
    let mut rows = Vec::new();
    for &m in &p.digits {
        let cache = PosteriorCache::new(&prior, m);
        for (si, ec) in p.strategies.iter().enumerate() {
            for (pi, &err) in p.error_ps.iter().enumerate() {
                let cfg = p
                    .base
                    .clone()
                    .with_digits(m)
                    .with_error_p(err)
                    .with_ec(ec.clone());
                let report = monte_carlo_with_cache(&prior, &cfg, &options, &cache)?;
                rows.push(((si, pi, m), report));
            }
        }
    }
    rows.sort_by_key(|(k, _)| *k);
    let mut t = Table::new(
        name,
        spec,
        vec![
            "ec",
            "error_p",
            "digits",
            "runs",
            "batches",
            "rms_ratio",
            "rms_ratio_std_error",
            "improvement",
            "mean_log10_ratio",
            "log10_std_error",
            "interaction_time_s",
            "total_time_s",
            "measurements",
        ],
    );
    for (_, r) in rows {
        t.push(vec![
            r.ec.clone().into(),
            r.error_p.into(),
            r.digits.into(),
            r.runs.into(),
            r.batch_ratios.len().into(),
            r.rms_ratio.into(),
            r.rms_ratio_std_error.into(),
            r.improvement().into(),
            r.mean_log10_ratio.into(),
            r.log10_std_error.into(),
            r.time.interaction.into(),
            r.time.total.into(),
            r.time.measurements.into(),
        ]);
    }
    Ok(t)
}

fn decorrelate(p: &DecorrelatePlan, name: &str, spec: Vec<(String, String)>) -> CliResult<Table> {
    let mut t = Table::new(
        name,
        spec,
        vec![
            "quantity",
            "lag_s",
            "angle_rad",
            "expansion",
            "quadrature",
            "monte_carlo",
            "monte_carlo_std_error",
            "linearized",
            "note",
        ],
    );
    let delta0 = p.process.delta0();
    let d2 = p.process.variance();
    let est_var = (p.est_ratio * delta0).powi(2);
    let t_c = p.process.t_c();
    let dt = p.step * p.window;
    let out_of_regime =
        |lag: f64| p.window > EXPANSION_LIMIT * t_c || lag + p.window > EXPANSION_LIMIT * t_c;
    if p.window > EXPANSION_LIMIT * t_c {
        t.push(vec![
            "warning".into(),
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
            "window exceeds t_c/10; expansion omitted".into(),
        ]);
    }
    let expansion = |lag: f64| -> CliResult<Option<f64>> {
        if out_of_regime(lag) {
            return Ok(None);
        }
        Ok(Some(decorrelation_variance(
            &p.process,
            p.window,
            est_var,
            lag,
            DecorrelationMode::Expansion,
        )?))
    };
    let quadrature = |lag: f64| {
        decorrelation_variance(
            &p.process,
            p.window,
            est_var,
            lag,
            DecorrelationMode::Quadrature,
        )
    };

    let lag_t = p.window;
    t.push(vec![
        "noise_contribution_ratio".into(),
        lag_t.into(),
        Cell::Empty,
        (est_var / d2).into(),
        (est_var / d2).into(),
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
    ]);
    t.push(vec![
        "decorrelation_contribution_ratio".into(),
        lag_t.into(),
        Cell::Empty,
        expansion(lag_t)?.map(|v| (v - est_var) / d2).into(),
        ((quadrature(lag_t)? - est_var) / d2).into(),
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
    ]);

    for (i, &factor) in p.lags.iter().enumerate() {
        let lag = factor * p.window;
        let e = expansion(lag)?;
        let q = quadrature(lag)?;
        let sim = simulate_decorrelation(
            &p.process,
            p.window,
            est_var,
            lag,
            p.realizations,
            dt,
            p.seed.wrapping_add((i as u64) << 32),
        )?;
        let root = sim.mean_sq.sqrt();
        t.push(vec![
            "sqrt_variance_ratio".into(),
            lag.into(),
            Cell::Empty,
            e.map(|v| v.sqrt() / delta0).into(),
            (q.sqrt() / delta0).into(),
            (root / delta0).into(),
            (sim.std_error / (2.0 * root) / delta0).into(),
            Cell::Empty,
            (if e.is_none() {
                "outside expansion regime"
            } else {
                ""
            })
            .into(),
        ]);
    }

    let lag = p.fidelity_lag * p.window;
    let e = expansion(lag)?;
    let q = quadrature(lag)?;
    for (i, &angle) in p.angles.iter().enumerate() {
        let tau = angle / delta0;
        let mc = ensemble_fidelity(
            &p.process,
            p.window,
            est_var,
            lag,
            angle,
            p.realizations,
            dt,
            p.seed.wrapping_add((1u64 << 48) + ((i as u64) << 32)),
        )?;
        t.push(vec![
            "fidelity".into(),
            lag.into(),
            angle.into(),
            e.map(|v| fidelity_from_variance(v, tau)).into(),
            fidelity_from_variance(q, tau).into(),
            mc.into(),
            Cell::Empty,
            linearized_fidelity(q, tau).into(),
            Cell::Empty,
        ]);
    }
    Ok(t)
}

fn ramsey(p: &RamseyPlan, name: &str, spec: Vec<(String, String)>) -> CliResult<Table> {
    let mut t = Table::new(
        name,
        spec,
        vec![
            "digits",
            "target_ratio",
            "ladder_total_time_s",
            "ladder_measurements",
            "ramsey_total_time_s",
            "ramsey_shots",
        ],
    );
    for &m in &p.digits {
        let cfg = p.base.clone().with_digits(m);
        let time = protocol_time(&cfg)?;
        let target = cfg.scale.alpha() / cfg.scale.delta0() * 0.5f64.powf(f64::from(m) / 2.0);
        t.push(vec![
            m.into(),
            target.into(),
            time.total.into(),
            time.measurements.into(),
            ramsey_comparison_time(&cfg)?.into(),
            (1u64 << m).into(),
        ]);
    }
    Ok(t)
}

fn qd(p: &QdPlan, name: &str, spec: Vec<(String, String)>) -> CliResult<Table> {
    let d = qd_derived_parameters(&p.preset)?;
    let m_opt = if d.delta0 > 0.0 {
        Some(optimal_digit_count(&p.preset, &p.base, p.max_digits)?)
    } else {
        None
    };
    let mut t = Table::new(
        name,
        spec,
        vec![
            "preset",
            "hyperfine_rad_s",
            "nuclei",
            "polarization",
            "epsilon_z_rad_s",
            "delta0_rad_s",
            "t2_star_s",
            "t_c_s",
            "decorrelation_rate_per_ms",
            "optimal_digits",
        ],
    );
    t.push(vec![
        p.preset.name.clone().into(),
        p.preset.a_total.into(),
        p.preset.nuclei.into(),
        p.preset.polarization.into(),
        p.preset.epsilon_z.into(),
        d.delta0.into(),
        d.t2_star.into(),
        d.t_c.into(),
        (1e-3 / d.t_c).into(),
        m_opt.into(),
    ]);
    Ok(t)
}
