//! Scenario runners behind the command-line subcommands.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::admissibility::{check, scan_region, AdmissibilityQuery, ConditionReport, RegionTable, ScanAxis};
use crate::config::RunConfig;
use crate::dynamics::{
    calibrate_smallness, convergence_study, Calibration, ConvergenceReport, Mode, PathRefinement,
    Scheme, Termination, Trajectory,
};
use crate::error::{Error, Result};
use crate::norms::virial_rate_expected;
use crate::output::{csv_string, fmt_f64, trajectory_csv, write_atomic, write_bundle};
use crate::paths::{
    event_membership, event_probability, mc_event_probability, sample_path, EventSpec, Membership,
};

/// JSON summary of one run; embeds the full resolved configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub config: RunConfig,
    pub termination: Termination,
    pub membership: Membership,
    pub monotone: Option<bool>,
    pub strictly_decreased: Option<bool>,
    pub final_time: f64,
    pub rows: usize,
}

impl RunSummary {
    pub fn new(config: &RunConfig, tr: &Trajectory) -> Self {
        RunSummary {
            config: config.clone(),
            termination: tr.termination,
            membership: tr.membership,
            monotone: tr.monotone,
            strictly_decreased: tr.strictly_decreased,
            final_time: tr.final_time,
            rows: tr.rows.len(),
        }
    }
}

pub fn simulate(cfg: &RunConfig) -> Result<Trajectory> {
    let p = cfg.prepare()?;
    p.simulation.run(&p.theta0)
}

/// Writes `<prefix>.csv`, `<prefix>.json` and optional plots into `cfg.output.dir`.
pub fn write_run(cfg: &RunConfig, tr: &Trajectory) -> Result<RunSummary> {
    let summary = RunSummary::new(cfg, tr);
    write_bundle(
        &cfg.output.dir,
        &cfg.output.prefix,
        &trajectory_csv(tr)?,
        &summary,
        cfg.output.plot,
        "t",
    )?;
    Ok(summary)
}

/// One swept parameter: a dotted key and its values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub key: String,
    pub values: Vec<String>,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;
    /// `key=v1,v2,...`
    fn from_str(s: &str) -> Result<Self> {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("sweep axis {s:?} is not key=v1,v2")))?;
        let values: Vec<String> = v.split(',').map(|x| x.trim().to_string()).collect();
        if values.iter().any(|x| x.is_empty()) {
            return Err(Error::Config(format!("empty value in sweep axis {s:?}")));
        }
        Ok(SweepAxis {
            key: k.trim().to_string(),
            values,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub id: usize,
    pub assignments: Vec<String>,
    pub termination: Termination,
    pub final_time: f64,
    pub in_event: bool,
    pub monotone: Option<bool>,
    pub strictly_decreased: Option<bool>,
}

/// Runs the Cartesian product of `axes` over `base`, in parallel. Each run
/// writes its own bundle under `<dir>/<prefix>_<id>`; the returned rows are
/// ordered by run id.
pub fn sweep(base: &RunConfig, axes: &[SweepAxis], write: bool) -> Result<Vec<SweepRow>> {
    let mut combos: Vec<Vec<String>> = vec![vec![]];
    for a in axes {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                a.values.iter().map(move |v| {
                    let mut c = c.clone();
                    c.push(format!("{}={}", a.key, v));
                    c
                })
            })
            .collect();
    }
    let configs: Vec<RunConfig> = combos
        .iter()
        .enumerate()
        .map(|(id, c)| {
            let mut cfg = base.with_overrides(c)?;
            cfg.output.prefix = format!("{}_{id:04}", base.output.prefix);
            Ok(cfg)
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<SweepRow> = configs
        .par_iter()
        .zip(combos.par_iter())
        .enumerate()
        .map(|(id, (cfg, c))| {
            let tr = simulate(cfg)?;
            if write {
                write_run(cfg, &tr)?;
            }
            Ok(SweepRow {
                id,
                assignments: c.clone(),
                termination: tr.termination,
                final_time: tr.final_time,
                in_event: tr.membership.in_event,
                monotone: tr.monotone,
                strictly_decreased: tr.strictly_decreased,
            })
        })
        .collect::<Result<_>>()?;
    rows.sort_by_key(|r| r.id);
    Ok(rows)
}

fn opt_flag(b: Option<bool>) -> String {
    b.map(|x| u8::from(x).to_string()).unwrap_or_default()
}

fn termination_name(t: &Termination) -> &'static str {
    match t {
        Termination::Horizon => "horizon",
        Termination::BlowupDetected { .. } => "blowup_detected",
        Termination::ResolutionLoss { .. } => "resolution_loss",
        Termination::AmplificationOverflow { .. } => "amplification_overflow",
    }
}

pub fn sweep_csv(axes: &[SweepAxis], rows: &[SweepRow]) -> Result<String> {
    let mut header = vec!["id".to_string()];
    header.extend(axes.iter().map(|a| a.key.clone()));
    header.extend(
        ["termination", "final_time", "in_event", "monotone", "strictly_decreased"]
            .map(String::from),
    );
    csv_string(
        &header,
        rows.iter().map(|r| {
            let mut rec = vec![r.id.to_string()];
            rec.extend(
                r.assignments
                    .iter()
                    .map(|a| a.split_once('=').map_or("", |x| x.1).to_string()),
            );
            rec.extend([
                termination_name(&r.termination).to_string(),
                fmt_f64(r.final_time),
                u8::from(r.in_event).to_string(),
                opt_flag(r.monotone),
                opt_flag(r.strictly_decreased),
            ]);
            rec
        }),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRow {
    pub alpha: f64,
    pub beta: f64,
    pub nu: f64,
    pub closed_form: f64,
    pub monte_carlo: f64,
    pub std_error: f64,
    pub truncation_bound: f64,
    pub n_paths: u64,
    pub dt: f64,
    pub horizon: f64,
    pub bridge: bool,
    /// `|MC - closed form| ≤ 3·std_error + truncation_bound`.
    pub consistent: bool,
}

/// Closed-form event probability next to a Monte Carlo estimate for each
/// parameter triple, sorted by `(α, β, ν)`.
pub fn event_table(
    events: &[EventSpec],
    n_paths: u64,
    dt: f64,
    horizon: f64,
    bridge: bool,
    seed: u64,
) -> Result<Vec<EventRow>> {
    let mut rows = events
        .iter()
        .map(|e| {
            let mc = mc_event_probability(e, n_paths, dt, horizon, bridge, seed)?;
            let exact = event_probability(e);
            Ok(EventRow {
                alpha: e.alpha,
                beta: e.beta,
                nu: e.nu,
                closed_form: exact,
                monte_carlo: mc.estimate,
                std_error: mc.std_error,
                truncation_bound: mc.truncation_bound,
                n_paths,
                dt,
                horizon,
                bridge,
                consistent: (mc.estimate - exact).abs()
                    <= 3.0 * mc.std_error + mc.truncation_bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| {
        (a.alpha, a.beta, a.nu)
            .partial_cmp(&(b.alpha, b.beta, b.nu))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(rows)
}

pub fn event_csv(rows: &[EventRow]) -> Result<String> {
    let header = [
        "alpha",
        "beta",
        "nu",
        "closed_form",
        "monte_carlo",
        "std_error",
        "truncation_bound",
        "n_paths",
        "dt",
        "horizon",
        "bridge",
        "consistent",
    ]
    .map(String::from);
    csv_string(
        &header,
        rows.iter().map(|r| {
            vec![
                fmt_f64(r.alpha),
                fmt_f64(r.beta),
                fmt_f64(r.nu),
                fmt_f64(r.closed_form),
                fmt_f64(r.monte_carlo),
                fmt_f64(r.std_error),
                fmt_f64(r.truncation_bound),
                r.n_paths.to_string(),
                fmt_f64(r.dt),
                fmt_f64(r.horizon),
                u8::from(r.bridge).to_string(),
                u8::from(r.consistent).to_string(),
            ]
        }),
    )
}

pub fn admissible_check(q: &AdmissibilityQuery) -> Result<ConditionReport> {
    check(q)
}

pub fn admissible_scan(base: &AdmissibilityQuery, x: &ScanAxis, y: &ScanAxis) -> Result<RegionTable> {
    scan_region(base, x, y)
}

/// Least-squares fit of the second moment against time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VirialFit {
    pub slope: f64,
    pub expected: f64,
    pub relative_error: f64,
    pub window_start: f64,
    pub window_end: f64,
    pub points: usize,
}

/// Fits the rows recorded before the first boundary warning or flagged row.
pub fn virial_fit(tr: &Trajectory, mass: f64, nu: f64) -> Result<VirialFit> {
    let pts: Vec<(f64, f64)> = tr
        .rows
        .iter()
        .take_while(|r| !r.boundary_warning && !r.blowup && !r.overflow)
        .filter_map(|r| r.second_moment.map(|m| (r.t, m)))
        .collect();
    if pts.len() < 3 {
        return Err(Error::Config(
            "virial fit needs at least 3 recorded second moments".into(),
        ));
    }
    let n = pts.len() as f64;
    let (mt, mv) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (t, v)| (a + t / n, b + v / n));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), (t, v)| {
        (a + (t - mt) * (v - mv), b + (t - mt) * (t - mt))
    });
    let slope = sxy / sxx;
    let expected = virial_rate_expected(mass, nu);
    Ok(VirialFit {
        slope,
        expected,
        relative_error: ((slope - expected) / expected).abs(),
        window_start: pts[0].0,
        window_end: pts[pts.len() - 1].0,
        points: pts.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlowupReport {
    pub summary: RunSummary,
    pub virial: Option<VirialFit>,
}

/// Deterministic run recording the second moment; fits the virial rate when
/// the datum is a Gaussian.
pub fn blowup_demo(cfg: &RunConfig) -> Result<(Trajectory, BlowupReport)> {
    let mut cfg = cfg.clone();
    cfg.output.second_moment = true;
    let tr = simulate(&cfg)?;
    let virial = match cfg.datum {
        crate::datum::DatumSpec::Gaussian { mass, .. } => virial_fit(&tr, mass, 0.0).ok(),
        _ => None,
    };
    Ok((
        tr.clone(),
        BlowupReport {
            summary: RunSummary::new(&cfg, &tr),
            virial,
        },
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StratSeed {
    pub seed: u64,
    pub in_event: bool,
    pub ito_completed: bool,
    pub ito_monotone: bool,
    pub ito_strictly_decreased: bool,
    pub strat_completed: bool,
    /// `max_t |μ̂^t(0) - μ̂^0(0)| / |μ̂^0(0)|` for the Stratonovich run.
    pub strat_zero_mode_drift: f64,
    pub strat_initial_log_norm: f64,
    pub strat_final_log_norm: f64,
    pub strat_grew: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StratReport {
    pub config: RunConfig,
    pub seeds: Vec<StratSeed>,
    pub ito_monotone_all: bool,
    pub strat_grew_any: bool,
    pub max_zero_mode_drift: f64,
}

/// Seeds `start, start+1, ...` whose sampled path lies in the event on the
/// whole horizon, until `count` are found or `max_tries` seeds are used.
pub fn seeds_in_event(cfg: &RunConfig, start: u64, count: usize, max_tries: u64) -> Result<Vec<u64>> {
    let env = cfg
        .envelope
        .ok_or_else(|| Error::Config("seed selection requires an envelope".into()))?;
    let ev = EventSpec::new(env.alpha, env.beta, cfg.noise.nu)?;
    let mut out = Vec::new();
    for seed in start..start + max_tries {
        let path = sample_path(cfg.integrator.dt, cfg.integrator.horizon, seed)?;
        if event_membership(&path, &ev, cfg.output.bridge).in_event {
            out.push(seed);
            if out.len() == count {
                break;
            }
        }
    }
    Ok(out)
}

fn audited(tr: &Trajectory) -> Result<(f64, f64)> {
    let first = tr.rows.first().and_then(|r| r.audit);
    let last = tr.rows.iter().rev().find_map(|r| r.audit);
    match (first, last) {
        (Some(a), Some(b)) => Ok((a.log_norm, b.log_norm)),
        _ => Err(Error::Config("the comparison requires an audited norm".into())),
    }
}

/// Runs the Itô and Stratonovich transformed equations from the same datum
/// along the same path for each seed.
pub fn strat_demo(cfg: &RunConfig, seeds: &[u64]) -> Result<StratReport> {
    let rows: Vec<StratSeed> = seeds
        .par_iter()
        .map(|&seed| {
            let mut ito = cfg.clone();
            ito.seed = seed;
            ito.integrator.mode = Mode::Ito;
            let mut strat = ito.clone();
            strat.integrator.mode = Mode::Stratonovich;
            strat.integrator.scheme = Scheme::Etdrk2;
            let ti = simulate(&ito)?;
            let ts = simulate(&strat)?;
            let m0 = ts.rows[0].mass_mu;
            let drift = ts
                .rows
                .iter()
                .map(|r| (r.mass_mu - m0).abs() / m0.abs().max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max);
            let (a, b) = audited(&ts)?;
            Ok(StratSeed {
                seed,
                in_event: ti.membership.in_event,
                ito_completed: ti.termination.completed(),
                ito_monotone: ti.monotone == Some(true),
                ito_strictly_decreased: ti.strictly_decreased == Some(true),
                strat_completed: ts.termination.completed(),
                strat_zero_mode_drift: drift,
                strat_initial_log_norm: a,
                strat_final_log_norm: b,
                strat_grew: b >= a,
            })
        })
        .collect::<Result<_>>()?;
    Ok(StratReport {
        config: cfg.clone(),
        ito_monotone_all: rows.iter().all(|r| r.ito_completed && r.ito_monotone),
        strat_grew_any: rows.iter().any(|r| r.strat_grew),
        max_zero_mode_drift: rows
            .iter()
            .map(|r| r.strat_zero_mode_drift)
            .fold(0.0, f64::max),
        seeds: rows,
    })
}

pub fn strat_csv(rep: &StratReport) -> Result<String> {
    let header = [
        "seed",
        "in_event",
        "ito_completed",
        "ito_monotone",
        "ito_strictly_decreased",
        "strat_completed",
        "strat_zero_mode_drift",
        "strat_initial_log_norm",
        "strat_final_log_norm",
        "strat_grew",
    ]
    .map(String::from);
    let b = |x: bool| u8::from(x).to_string();
    csv_string(
        &header,
        rep.seeds.iter().map(|r| {
            vec![
                r.seed.to_string(),
                b(r.in_event),
                b(r.ito_completed),
                b(r.ito_monotone),
                b(r.ito_strictly_decreased),
                b(r.strat_completed),
                fmt_f64(r.strat_zero_mode_drift),
                fmt_f64(r.strat_initial_log_norm),
                fmt_f64(r.strat_final_log_norm),
                b(r.strat_grew),
            ]
        }),
    )
}

/// Bisection of the datum scale: a scale passes when the run reaches the
/// horizon with a monotone audited norm.
pub fn calibrate(cfg: &RunConfig, lo: f64, hi: f64, iterations: usize) -> Result<Calibration> {
    if cfg.audit.is_none() {
        return Err(Error::Config("calibration requires an audited norm".into()));
    }
    calibrate_smallness(
        |scale| {
            let mut c = cfg.clone();
            c.datum = cfg.datum.scaled(scale);
            let tr = simulate(&c)?;
            Ok(tr.termination.completed() && tr.monotone == Some(true))
        },
        lo,
        hi,
        iterations,
    )
}

pub fn calibration_csv(cal: &Calibration) -> Result<String> {
    csv_string(
        &["scale".to_string(), "monotone".to_string()],
        cal.evaluations
            .iter()
            .map(|(s, ok)| vec![fmt_f64(*s), u8::from(*ok).to_string()]),
    )
}

/// Self-convergence of each scheme on the configured datum, all levels
/// sharing the path sampled at `cfg.integrator.dt`.
pub fn convergence(
    cfg: &RunConfig,
    schemes: &[Scheme],
    levels: usize,
    refinement: PathRefinement,
) -> Result<Vec<ConvergenceReport>> {
    let p = cfg.prepare()?;
    schemes
        .iter()
        .map(|&s| {
            let mut dy = p.simulation.dynamics.clone();
            dy.spec.scheme = s;
            dy = dy.with_dt(dy.spec.dt)?;
            convergence_study(&dy, &p.theta0, &p.simulation.path, levels, refinement)
        })
        .collect()
}

pub fn convergence_csv(reports: &[ConvergenceReport]) -> Result<String> {
    let header = ["scheme", "refinement", "dt", "difference", "order"].map(String::from);
    let mut recs = Vec::new();
    for r in reports {
        for (k, dt) in r.dts.iter().enumerate() {
            recs.push(vec![
                format!("{:?}", r.scheme).to_lowercase(),
                format!("{:?}", r.refinement).to_lowercase(),
                fmt_f64(*dt),
                r.differences.get(k).map(|x| fmt_f64(*x)).unwrap_or_default(),
                k.checked_sub(1)
                    .and_then(|j| r.orders.get(j))
                    .map(|x| fmt_f64(*x))
                    .unwrap_or_default(),
            ]);
        }
    }
    csv_string(&header, recs)
}

/// Machine-readable form of `err`: its variant name and message.
pub fn error_record(err: &Error) -> serde_json::Value {
    serde_json::json!({
        "error": format!("{err:?}").split(['(', ' ', '{']).next().unwrap_or("Error"),
        "message": err.to_string(),
    })
}

/// Writes the error record of `err` next to the other outputs.
pub fn write_error(dir: &Path, prefix: &str, err: &Error) -> Result<()> {
    write_atomic(
        &dir.join(format!("{prefix}.error.json")),
        format!("{:#}\n", error_record(err)).as_bytes(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Preset;

    fn tiny(p: Preset) -> RunConfig {
        p.config()
            .with_overrides(&[
                "grid.n=8",
                "integrator.horizon=0.02",
                "output.stride=1",
            ])
            .unwrap()
    }

    #[test]
    fn horizon_zero_gives_one_row() {
        let cfg = tiny(Preset::SqgRandom)
            .with_overrides(&["integrator.horizon=0"])
            .unwrap();
        let tr = simulate(&cfg).unwrap();
        assert_eq!(tr.rows.len(), 1);
        assert_eq!(trajectory_csv(&tr).unwrap().lines().count(), 2);
    }

    #[test]
    fn sweep_orders_rows_and_writes() {
        let dir = tempfile::tempdir().unwrap();
        let mut base = tiny(Preset::SqgRandom);
        base.output.dir = dir.path().to_path_buf();
        let axes: Vec<SweepAxis> = vec![
            "noise.nu=1.0,2.0".parse().unwrap(),
            "seed=3,4".parse().unwrap(),
        ];
        let rows = sweep(&base, &axes, true).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.windows(2).all(|w| w[0].id < w[1].id));
        assert_eq!(rows[1].assignments, vec!["noise.nu=1.0", "seed=4"]);
        assert!(dir.path().join("sqg_random_0003.csv").exists());
        let csv = sweep_csv(&axes, &rows).unwrap();
        assert!(csv.starts_with("id,noise.nu,seed,termination"));
    }

    #[test]
    fn event_table_closed_form() {
        let e = EventSpec::new(1.0, 1.0, std::f64::consts::SQRT_2).unwrap();
        let rows = event_table(&[e], 200, 0.01, 2.0, true, 1).unwrap();
        assert!((rows[0].closed_form - 0.6321206).abs() < 5e-8);
        assert!(event_csv(&rows).unwrap().starts_with("alpha,beta,nu,closed_form"));
    }

    #[test]
    fn virial_fit_recovers_line() {
        let cfg = tiny(Preset::PksBlowup)
            .with_overrides(&["grid.n=64", "grid.l=16"])
            .unwrap();
        let (tr, rep) = blowup_demo(&cfg).unwrap();
        assert!(tr.rows.iter().all(|r| r.second_moment.is_some()));
        let fit = rep.virial.unwrap();
        assert_eq!(fit.points, 3);
        assert!(fit.slope < 0.0);
    }

    #[test]
    fn strat_demo_runs() {
        let cfg = tiny(Preset::SqgRandom);
        let rep = strat_demo(&cfg, &[1, 2]).unwrap();
        assert_eq!(rep.seeds.len(), 2);
        assert!(rep.max_zero_mode_drift < 1e-12);
        assert!(strat_csv(&rep).unwrap().lines().count() == 3);
    }

    #[test]
    fn calibration_requires_audit() {
        let cfg = tiny(Preset::PksBlowup);
        assert!(calibrate(&cfg, 0.1, 1.0, 2).is_err());
        let cfg = tiny(Preset::SqgRandom)
            .with_overrides(&["output.resolution_threshold=1"])
            .unwrap();
        let cal = calibrate(&cfg, 0.1, 10.0, 2).unwrap();
        assert!(cal.monotone_scale.is_some());
        assert!(calibration_csv(&cal).unwrap().starts_with("scale,monotone\n"));
    }

    #[test]
    fn error_record_names_variant() {
        let dir = tempfile::tempdir().unwrap();
        write_error(dir.path(), "x", &Error::Config("bad".into())).unwrap();
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("x.error.json")).unwrap())
                .unwrap();
        assert_eq!(v["error"], "Config");
    }
}
