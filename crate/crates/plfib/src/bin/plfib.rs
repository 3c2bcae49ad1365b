//! Command-line front end: map construction, regime classification,
//! pressure curves, measures, dimensions, recurrence, simulation and the
//! acceptance suite.

// Flag guards are written `!(x > a)` so NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use clap::{Args, Parser, Subcommand, ValueEnum};
use plfib::kneading::{
    check_admissibility, check_condition_121, fibonacci_kneading, floor_r_kneading,
    DEFAULT_FLOOR_R_PREFIX,
};
use plfib::mc::{simulate_walk, WalkSimConfig};
use plfib::mpf::Precision;
use plfib::plmap::{critical_order, PLMap};
use plfib::thermo::{
    classify_recurrence, closed_form_measures, hyperbolic_dimension, pressure_bounds,
    project_measures, solve_pressure, t1_of, SolveOptions,
};
use plfib::walk::WalkModel;
use rayon::prelude::*;
use std::io::Write;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "plfib",
    version,
    about = "countably piecewise linear Fibonacci maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Json,
    Csv,
}

#[derive(Args)]
struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    emit: Emit,
    /// Write to a file instead of stdout.
    #[arg(long)]
    output: Option<std::path::PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Fibonacci,
    FloorR,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a kneading map and its cutting times.
    Kneading {
        #[arg(long, value_enum, default_value = "fibonacci")]
        family: Family,
        /// Ratio for the floor-r family.
        #[arg(long, default_value_t = 0.5)]
        r: f64,
        #[arg(long, default_value_t = 30)]
        depth: usize,
        /// Fibonacci-type prefix length for the floor-r family.
        #[arg(long, default_value_t = DEFAULT_FLOOR_R_PREFIX)]
        prefix: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Build a map, optionally verifying the construction conditions or
    /// evaluating it at a point.
    Map {
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 200)]
        depth: usize,
        /// Check the construction inequalities up to this branch.
        #[arg(long)]
        verify_conditions: Option<usize>,
        /// Evaluate f at a point.
        #[arg(long)]
        eval: Option<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Classify the attractor regime over a parameter or a grid.
    Classify {
        #[arg(long, conflicts_with = "lambda_grid")]
        lambda: Option<f64>,
        /// Grid start:end:step.
        #[arg(long)]
        lambda_grid: Option<String>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Pressure curve over a t-grid.
    Pressure {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        t_min: f64,
        #[arg(long)]
        t_max: f64,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        /// Mantissa bits for the solver (53, 113 or 256).
        #[arg(long, env = "PLFIB_PRECISION_BITS", default_value_t = 113)]
        precision_bits: u32,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Closed-form conformal and invariant measures at (lambda, t).
    Measures {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        t: f64,
        /// Number of branch masses to emit.
        #[arg(long, default_value_t = 40)]
        depth: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Hyperbolic dimension of the family.
    Dims {
        #[arg(long)]
        lambda: f64,
    },
    /// Recurrence classification at (lambda, t).
    Recurrence {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        t: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Monte Carlo simulation of the induced walk.
    Simulate {
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 1000)]
        walkers: usize,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        threshold: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run the acceptance suite; exits nonzero on any failure.
    Verify {
        #[arg(long, value_enum, default_value = "csv")]
        emit: Emit,
    },
}

fn write_out(out: &OutputArgs, content: String) -> std::io::Result<()> {
    match &out.output {
        Some(path) => std::fs::write(path, content),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(content.as_bytes())
        }
    }
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => fail(msg),
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Kneading {
            family,
            r,
            depth,
            prefix,
            out,
        } => {
            let kd = match family {
                Family::Fibonacci => fibonacci_kneading(depth),
                Family::FloorR => floor_r_kneading(r, depth, prefix).map_err(|e| e.to_string())?,
            };
            let cond = check_condition_121(&kd).map_err(|e| e.to_string())?;
            let adm = check_admissibility(&kd);
            let content = match out.emit {
                Emit::Json => {
                    let obj = serde_json::json!({
                        "kneading": kd,
                        "condition_121": cond,
                        "admissibility": adm,
                    });
                    format!("{}\n", serde_json::to_string_pretty(&obj).unwrap())
                }
                Emit::Csv => {
                    let mut s = String::from("k,Q,S\n");
                    for k in 1..=kd.depth() {
                        s.push_str(&format!("{k},{},{}\n", kd.q(k), kd.s_big(k)));
                    }
                    s
                }
            };
            write_out(&out, content).map_err(|e| e.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Map {
            lambda,
            depth,
            verify_conditions,
            eval,
            out,
        } => {
            let map = PLMap::fibonacci_family(lambda, depth).map_err(|e| e.to_string())?;
            let conditions = match verify_conditions {
                Some(j_max) => Some(map.verify_conditions(j_max).map_err(|e| e.to_string())?),
                None => None,
            };
            let eval_result = eval.map(|x| match map.eval_f(x) {
                Ok(v) => serde_json::json!({"x": x, "f": v, "status": "ok"}),
                Err(e) => serde_json::json!({"x": x, "status": e.to_string()}),
            });
            let content = match out.emit {
                Emit::Json => {
                    let n = depth.min(map.depth());
                    let obj = serde_json::json!({
                        "lambda": lambda,
                        "depth": n,
                        "critical_order": critical_order(lambda),
                        "eps": (0..=n).map(|j| map.eps(j)).collect::<Vec<_>>(),
                        "z": (0..=n).map(|j| map.z(j)).collect::<Vec<_>>(),
                        "kappa": (0..=n).map(|j| map.kappa(j)).collect::<Vec<_>>(),
                        "s": (1..=n).map(|j| map.slope(j)).collect::<Vec<_>>(),
                        "conditions": conditions,
                        "eval": eval_result,
                    });
                    format!("{}\n", serde_json::to_string_pretty(&obj).unwrap())
                }
                Emit::Csv => {
                    let mut s = String::from("j,eps,z,kappa,s\n");
                    for j in 0..=depth.min(map.depth()) {
                        let slope = if j >= 1 {
                            format!("{:.17e}", map.slope(j))
                        } else {
                            String::new()
                        };
                        s.push_str(&format!(
                            "{j},{:.17e},{:.17e},{:.17e},{slope}\n",
                            map.eps(j),
                            map.z(j),
                            map.kappa(j)
                        ));
                    }
                    if let Some(cs) = conditions {
                        s.push_str("j,log_margin_128,log_margin_129,pass\n");
                        for c in cs {
                            s.push_str(&format!(
                                "{},{:.6},{},{}\n",
                                c.j,
                                c.log_margin_128,
                                c.log_margin_129
                                    .map(|m| format!("{m:.6}"))
                                    .unwrap_or_default(),
                                c.pass
                            ));
                        }
                    }
                    if let Some(e) = eval_result {
                        s.push_str(&format!("eval,{e}\n"));
                    }
                    s
                }
            };
            write_out(&out, content).map_err(|e| e.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Classify {
            lambda,
            lambda_grid,
            out,
        } => {
            let lambdas = match (lambda, lambda_grid) {
                (Some(l), None) => vec![l],
                (None, Some(spec)) => parse_grid(&spec)?,
                _ => return Err("pass exactly one of --lambda / --lambda-grid".into()),
            };
            let rows: Vec<WalkModel> = lambdas
                .par_iter()
                .map(|&l| WalkModel::new(l).map_err(|e| e.to_string()))
                .collect::<Result<_, _>>()?;
            let content = match out.emit {
                Emit::Json => format!("{}\n", serde_json::to_string_pretty(&rows).unwrap()),
                Emit::Csv => {
                    let mut s = String::from("lambda,drift,second_moment,tail_ratio,regime\n");
                    for r in rows {
                        s.push_str(&format!(
                            "{:.12},{:.17e},{:.17e},{:.17e},{}\n",
                            r.lambda, r.drift, r.second_moment, r.tail_ratio, r.regime
                        ));
                    }
                    s
                }
            };
            write_out(&out, content).map_err(|e| e.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Pressure {
            lambda,
            t_min,
            t_max,
            steps,
            precision_bits,
            out,
        } => {
            if !matches!(precision_bits, 53 | 113 | 256) {
                return Err("precision-bits must be one of 53, 113, 256".into());
            }
            let opts = SolveOptions {
                precision: Precision::from_bits(precision_bits),
                ..Default::default()
            };
            if !(t_max >= t_min) || steps < 1 {
                return Err("need t_max >= t_min and steps >= 1".into());
            }
            let ts: Vec<f64> = (0..steps)
                .map(|i| {
                    if steps == 1 {
                        t_min
                    } else {
                        t_min + (t_max - t_min) * i as f64 / (steps - 1) as f64
                    }
                })
                .collect();
            #[derive(serde::Serialize)]
            struct Row {
                t: f64,
                p: Option<f64>,
                log_p: Option<f64>,
                residual: Option<f64>,
                log_lower_factor: Option<f64>,
                log_upper_factor: Option<f64>,
                status: String,
            }
            let rows: Vec<Row> = ts
                .par_iter()
                .map(|&t| {
                    let bounds = pressure_bounds(lambda, t).ok();
                    match solve_pressure(lambda, t, &opts) {
                        Ok(pt) => Row {
                            t,
                            p: Some(pt.p),
                            log_p: Some(pt.log_p),
                            residual: Some(pt.residual),
                            log_lower_factor: bounds.as_ref().map(|b| b.log_lower_factor),
                            log_upper_factor: bounds.as_ref().map(|b| b.log_upper_factor),
                            status: "ok".into(),
                        },
                        Err(e) => Row {
                            t,
                            p: None,
                            log_p: None,
                            residual: None,
                            log_lower_factor: bounds.as_ref().map(|b| b.log_lower_factor),
                            log_upper_factor: bounds.as_ref().map(|b| b.log_upper_factor),
                            status: e.to_string(),
                        },
                    }
                })
                .collect();
            let content = match out.emit {
                Emit::Json => format!("{}\n", serde_json::to_string_pretty(&rows).unwrap()),
                Emit::Csv => {
                    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.17e}")).unwrap_or_default();
                    let mut s = String::from(
                        "t,p,log_p,residual,log_lower_factor,log_upper_factor,status\n",
                    );
                    for r in rows {
                        s.push_str(&format!(
                            "{:.12},{},{},{},{},{},{}\n",
                            r.t,
                            fmt(r.p),
                            fmt(r.log_p),
                            fmt(r.residual),
                            fmt(r.log_lower_factor),
                            fmt(r.log_upper_factor),
                            r.status
                        ));
                    }
                    s
                }
            };
            write_out(&out, content).map_err(|e| e.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Measures {
            lambda,
            t,
            depth,
            out,
        } => {
            let map = PLMap::fibonacci_family(lambda, 120).map_err(|e| e.to_string())?;
            let ms = closed_form_measures(&map, t, depth).map_err(|e| e.to_string())?;
            let projection = if t < t1_of(lambda) {
                match project_measures(lambda, t) {
                    Ok(p) => serde_json::to_value(&p).ok(),
                    Err(e) => Some(serde_json::json!({ "status": e.to_string() })),
                }
            } else {
                None
            };
            let content = match out.emit {
                Emit::Json => {
                    let obj = serde_json::json!({
                        "measures": ms,
                        "projection": projection,
                    });
                    format!("{}\n", serde_json::to_string_pretty(&obj).unwrap())
                }
                Emit::Csv => {
                    let mut s = String::from("j,conformal_w,invariant_w,invariant_hat_w\n");
                    for j in 0..ms.conformal_w.len() {
                        let iv = ms
                            .invariant_w
                            .as_ref()
                            .map(|v| format!("{:.17e}", v[j]))
                            .unwrap_or_default();
                        let ivh = ms
                            .invariant_hat_w
                            .as_ref()
                            .map(|v| format!("{:.17e}", v[j]))
                            .unwrap_or_default();
                        s.push_str(&format!(
                            "{},{:.17e},{iv},{ivh}\n",
                            j + 1,
                            ms.conformal_w[j]
                        ));
                    }
                    s
                }
            };
            write_out(&out, content).map_err(|e| e.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Dims { lambda } => {
            if !(lambda > 0.0 && lambda < 1.0) {
                return Err("lambda must lie in (0, 1)".into());
            }
            println!("{}", hyperbolic_dimension(lambda));
            Ok(ExitCode::SUCCESS)
        }
        Command::Recurrence { lambda, t, out } => {
            let rep = classify_recurrence(lambda, t).map_err(|e| e.to_string())?;
            let content = match out.emit {
                Emit::Json => format!("{}\n", serde_json::to_string_pretty(&rep).unwrap()),
                Emit::Csv => format!(
                    "lambda,t,t1,induced,original\n{:.12},{:.12},{:.12},{},{}\n",
                    rep.lambda, rep.t, rep.t1, rep.induced, rep.original
                ),
            };
            write_out(&out, content).map_err(|e| e.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate {
            lambda,
            walkers,
            steps,
            seed,
            threshold,
            out,
        } => {
            let cfg = WalkSimConfig::new(lambda, walkers, steps, seed, threshold);
            let rep = simulate_walk(&cfg).map_err(|e| e.to_string())?;
            let content = match out.emit {
                Emit::Json => format!("{}\n", serde_json::to_string_pretty(&rep).unwrap()),
                Emit::Csv => {
                    let mut s = String::from(
                        "lambda,walkers,steps,seed,threshold,escape_fraction,empirical_drift,drift_std_error,tv_to_closed_form\n",
                    );
                    s.push_str(&format!(
                        "{:.12},{},{},{},{},{:.17e},{:.17e},{:.17e},{}\n",
                        lambda,
                        walkers,
                        steps,
                        seed,
                        threshold,
                        rep.escape_fraction,
                        rep.empirical_drift,
                        rep.drift_std_error,
                        rep.tv_to_closed_form
                            .map(|v| format!("{v:.17e}"))
                            .unwrap_or_default()
                    ));
                    s.push_str("state,occupation\n");
                    for (i, h) in rep.histogram.iter().enumerate().filter(|(_, h)| **h > 0.0) {
                        s.push_str(&format!("{},{:.17e}\n", i + 1, h));
                    }
                    s
                }
            };
            write_out(&out, content).map_err(|e| e.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { emit } => {
            let results = plfib::acceptance::run_all();
            let all_pass = results.iter().all(|r| r.passed);
            match emit {
                Emit::Json => {
                    println!("{}", serde_json::to_string_pretty(&results).unwrap());
                }
                Emit::Csv => {
                    for r in &results {
                        println!("{}", r.line());
                    }
                    println!(
                        "{}: {}/{} criteria passed",
                        if all_pass { "OK" } else { "FAILED" },
                        results.iter().filter(|r| r.passed).count(),
                        results.len()
                    );
                }
            }
            Ok(if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err("grid must be start:end:step".into());
    }
    let start: f64 = parts[0].parse().map_err(|_| "bad grid start")?;
    let end: f64 = parts[1].parse().map_err(|_| "bad grid end")?;
    let step: f64 = parts[2].parse().map_err(|_| "bad grid step")?;
    if !(step > 0.0) || end < start {
        return Err("need step > 0 and end >= start".into());
    }
    let mut out = Vec::new();
    let mut x = start;
    while x <= end + 1e-12 {
        out.push(x);
        x += step;
    }
    Ok(out)
}
