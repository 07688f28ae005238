use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use active_scalar::admissibility::{AdmissibilityQuery, Param, ScanAxis};
use active_scalar::config::{Preset, RunConfig};
use active_scalar::dynamics::{PathRefinement, Scheme, Termination};
use active_scalar::harness;
use active_scalar::output::{to_json, write_atomic, write_bundle};
use active_scalar::paths::EventSpec;
use active_scalar::{Error, Result};

#[derive(Parser)]
#[command(name = "active-scalar", version, about = "Active scalar equations with random Gevrey diffusion")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named scenario used when no configuration file is given.
    #[arg(long)]
    preset: Option<String>,
    /// Dotted override, e.g. `--set grid.n=128`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (overrides output.dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write one SVG per recorded series.
    #[arg(long)]
    plot: bool,
}

#[derive(Args, Clone, Copy)]
struct Outcomes {
    /// Treat blow-up or resolution loss as success.
    #[arg(long)]
    expect_blowup: bool,
    /// Treat amplification overflow as success.
    #[arg(long)]
    allow_overflow: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// One run.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        outcomes: Outcomes,
    },
    /// Cartesian parameter grid of runs.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Swept key and values, e.g. `--param noise.nu=1,2,4`.
        #[arg(long = "param", value_name = "KEY=V1,V2,..", required = true)]
        params: Vec<String>,
    },
    /// Closed-form event probability against Monte Carlo.
    EventProb {
        /// `alpha,beta,nu`; repeatable.
        #[arg(long = "event", value_name = "A,B,NU")]
        events: Vec<String>,
        #[arg(long, default_value_t = 100_000)]
        paths: u64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 20.0)]
        horizon: f64,
        #[arg(long)]
        no_bridge: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value = "event_prob")]
        prefix: String,
    },
    /// Parameter admissibility.
    Admissible {
        #[command(subcommand)]
        cmd: AdmissibleCmd,
    },
    /// Deterministic aggregation with second-moment tracking.
    BlowupDemo {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        outcomes: Outcomes,
    },
    /// Itô against Stratonovich on shared data and paths.
    StratDemo {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        /// Only use seeds whose path stays in the event.
        #[arg(long)]
        in_event: bool,
        #[arg(long, default_value_t = 0)]
        first_seed: u64,
    },
    /// Bisection of the datum scale for monotone runs.
    CalibrateSmallness {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 1e-3)]
        lo: f64,
        #[arg(long, default_value_t = 1e3)]
        hi: f64,
        #[arg(long, default_value_t = 12)]
        iterations: usize,
    },
    /// Pathwise step-refinement study.
    Convergence {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        /// `linear` or `bridge`.
        #[arg(long, default_value = "linear")]
        refinement: String,
    },
}

#[derive(Args, Clone)]
struct QueryArgs {
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    s: f64,
    /// Integrability exponent; `inf` allowed.
    #[arg(long)]
    r: String,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
}

#[derive(Subcommand)]
enum AdmissibleCmd {
    /// Evaluate every condition for one query.
    Check {
        #[command(flatten)]
        query: QueryArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value = "admissible")]
        prefix: String,
    },
    /// Boolean region over two parameters.
    Scan {
        #[command(flatten)]
        query: QueryArgs,
        /// `param:lo:hi:n`, cell midpoints.
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value = "region")]
        prefix: String,
    },
}

fn parse_r(s: &str) -> Result<f64> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        t => t
            .parse()
            .map_err(|_| Error::MalformedQuery(format!("bad exponent {s:?}"))),
    }
}

impl QueryArgs {
    fn query(&self) -> Result<AdmissibilityQuery> {
        Ok(AdmissibilityQuery {
            d: self.d,
            gamma: self.gamma,
            s: self.s,
            r: parse_r(&self.r)?,
            sigma: self.sigma,
            q: self.q,
            kappa: self.kappa,
        })
    }
}

fn parse_axis(s: &str) -> Result<ScanAxis> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::MalformedQuery(format!("axis {s:?} is not param:lo:hi:n"));
    if parts.len() != 4 {
        return Err(bad());
    }
    let param: Param = parts[0].parse()?;
    let lo: f64 = parts[1].parse().map_err(|_| bad())?;
    let hi: f64 = parts[2].parse().map_err(|_| bad())?;
    let n: usize = parts[3].parse().map_err(|_| bad())?;
    Ok(ScanAxis::midpoints(param, lo, hi, n))
}

fn load(run: &RunArgs, default: Preset) -> Result<RunConfig> {
    let mut cfg = match (&run.config, &run.preset) {
        (Some(p), _) => RunConfig::load(p, &run.set)?,
        (None, Some(name)) => name.parse::<Preset>()?.config().with_overrides(&run.set)?,
        (None, None) => default.config().with_overrides(&run.set)?,
    };
    if let Some(o) = &run.out {
        cfg.output.dir = o.clone();
    }
    cfg.output.plot |= run.plot;
    Ok(cfg)
}

fn outcome_code(t: &Termination, o: Outcomes) -> u8 {
    match t {
        Termination::Horizon => 0,
        Termination::AmplificationOverflow { .. } if !o.allow_overflow => 3,
        Termination::BlowupDetected { .. } | Termination::ResolutionLoss { .. }
            if !o.expect_blowup =>
        {
            4
        }
        _ => 0,
    }
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::GridMismatch(_)
        | Error::Hypothesis(_)
        | Error::MalformedQuery(_)
        | Error::NonHermitian { .. } => 2,
        Error::AmplificationOverflow { .. } => 3,
        Error::BlowupDetected { .. } => 4,
        Error::Io(_) => 1,
    }
}

fn run(cmd: Cmd) -> Result<u8> {
    match cmd {
        Cmd::Simulate { run, outcomes } => {
            let cfg = load(&run, Preset::SqgRandom)?;
            let tr = harness::simulate(&cfg)?;
            harness::write_run(&cfg, &tr)?;
            Ok(outcome_code(&tr.termination, outcomes))
        }
        Cmd::Sweep { run, params } => {
            let cfg = load(&run, Preset::SqgRandom)?;
            let axes = params
                .iter()
                .map(|p| p.parse())
                .collect::<Result<Vec<harness::SweepAxis>>>()?;
            let rows = harness::sweep(&cfg, &axes, true)?;
            let summary = serde_json::json!({ "config": cfg, "axes": axes, "runs": rows });
            write_bundle(
                &cfg.output.dir,
                &format!("{}_sweep", cfg.output.prefix),
                &harness::sweep_csv(&axes, &rows)?,
                &summary,
                false,
                "id",
            )?;
            Ok(0)
        }
        Cmd::EventProb {
            events,
            paths,
            dt,
            horizon,
            no_bridge,
            seed,
            out,
            prefix,
        } => {
            let specs = if events.is_empty() {
                vec![EventSpec::new(1.0, 1.0, std::f64::consts::SQRT_2)?]
            } else {
                events
                    .iter()
                    .map(|e| {
                        let v: Vec<f64> = e
                            .split(',')
                            .map(|x| x.trim().parse::<f64>())
                            .collect::<std::result::Result<_, _>>()
                            .map_err(|_| Error::Config(format!("bad event {e:?}")))?;
                        match v[..] {
                            [a, b, nu] => EventSpec::new(a, b, nu),
                            _ => Err(Error::Config(format!("event {e:?} is not a,b,nu"))),
                        }
                    })
                    .collect::<Result<_>>()?
            };
            let rows = harness::event_table(&specs, paths, dt, horizon, !no_bridge, seed)?;
            for r in &rows {
                println!(
                    "alpha={} beta={} nu={} closed_form={:.7} monte_carlo={:.7} std_error={:.2e} consistent={}",
                    r.alpha, r.beta, r.nu, r.closed_form, r.monte_carlo, r.std_error, r.consistent
                );
            }
            write_bundle(&out, &prefix, &harness::event_csv(&rows)?, &rows, false, "alpha")?;
            Ok(0)
        }
        Cmd::Admissible { cmd } => match cmd {
            AdmissibleCmd::Check { query, out, prefix } => {
                let q = query.query()?;
                let rep = harness::admissible_check(&q)?;
                let json = to_json(&serde_json::json!({ "query": q, "report": rep }))?;
                print!("{json}");
                write_atomic(&out.join(format!("{prefix}.json")), json.as_bytes())?;
                Ok(0)
            }
            AdmissibleCmd::Scan {
                query,
                x,
                y,
                out,
                prefix,
            } => {
                let q = query.query()?;
                let (x, y) = (parse_axis(&x)?, parse_axis(&y)?);
                let table = harness::admissible_scan(&q, &x, &y)?;
                let summary = serde_json::json!({ "query": q, "x": x, "y": y,
                    "admissible_cells": table.cells.iter().filter(|c| c.admissible).count(),
                    "cells": table.cells.len() });
                write_bundle(&out, &prefix, &table.to_csv()?, &summary, false, x.param.name())?;
                Ok(0)
            }
        },
        Cmd::BlowupDemo { run, outcomes } => {
            let cfg = load(&run, Preset::PksBlowup)?;
            let (tr, rep) = harness::blowup_demo(&cfg)?;
            write_bundle(
                &cfg.output.dir,
                &cfg.output.prefix,
                &active_scalar::output::trajectory_csv(&tr)?,
                &rep,
                cfg.output.plot,
                "t",
            )?;
            if let Some(v) = rep.virial {
                println!(
                    "virial slope {:.6} expected {:.6} relative error {:.3e} over [{}, {}]",
                    v.slope, v.expected, v.relative_error, v.window_start, v.window_end
                );
            }
            Ok(outcome_code(&tr.termination, outcomes))
        }
        Cmd::StratDemo {
            run,
            seeds,
            in_event,
            first_seed,
        } => {
            let cfg = load(&run, Preset::SqgRandom)?;
            let list: Vec<u64> = if in_event {
                harness::seeds_in_event(&cfg, first_seed, seeds, 100 * seeds as u64 + 100)?
            } else {
                (first_seed..first_seed + seeds as u64).collect()
            };
            let rep = harness::strat_demo(&cfg, &list)?;
            println!(
                "ito monotone in all: {}; stratonovich grew in some: {}; max zero-mode drift {:.3e}",
                rep.ito_monotone_all, rep.strat_grew_any, rep.max_zero_mode_drift
            );
            write_bundle(
                &cfg.output.dir,
                &format!("{}_strat", cfg.output.prefix),
                &harness::strat_csv(&rep)?,
                &rep,
                false,
                "seed",
            )?;
            Ok(0)
        }
        Cmd::CalibrateSmallness {
            run,
            lo,
            hi,
            iterations,
        } => {
            let cfg = load(&run, Preset::SqgRandom)?;
            let cal = harness::calibrate(&cfg, lo, hi, iterations)?;
            println!(
                "monotone scale {:?}, failing scale {:?}",
                cal.monotone_scale, cal.failing_scale
            );
            let summary = serde_json::json!({ "config": cfg, "calibration": cal });
            write_bundle(
                &cfg.output.dir,
                &format!("{}_calibration", cfg.output.prefix),
                &harness::calibration_csv(&cal)?,
                &summary,
                false,
                "scale",
            )?;
            Ok(0)
        }
        Cmd::Convergence {
            run,
            levels,
            refinement,
        } => {
            let cfg = load(&run, Preset::SqgRandom)?;
            let refinement = match refinement.as_str() {
                "linear" => PathRefinement::Linear,
                "bridge" => PathRefinement::Bridge,
                other => return Err(Error::Config(format!("unknown refinement {other:?}"))),
            };
            let reps =
                harness::convergence(&cfg, &[Scheme::Etd1, Scheme::Etdrk2], levels, refinement)?;
            for r in &reps {
                println!("{:?}: observed order {:.3}", r.scheme, r.observed_order());
            }
            let summary = serde_json::json!({ "config": cfg, "reports": reps });
            write_bundle(
                &cfg.output.dir,
                &format!("{}_convergence", cfg.output.prefix),
                &harness::convergence_csv(&reps)?,
                &summary,
                false,
                "dt",
            )?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let mut rec = harness::error_record(&e);
            rec["exit_code"] = error_code(&e).into();
            eprintln!("{rec}");
            ExitCode::from(error_code(&e))
        }
    }
}
