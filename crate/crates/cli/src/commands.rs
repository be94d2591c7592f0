use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use paging_core::des::{little_check, replicate, SimConfig, SimResult};
use paging_core::format::g17;
use paging_core::metrics::CSV_HEADER;
use paging_core::strategy::{Comparison, StrategySummary};
use paging_core::traffic::TrafficSpec;
use paging_core::{
    compare_strategies, error_metrics, generate, mean_system_time, predict_series, sweep_curves, train, ErrorReport,
    Model, PerfectForesight, SchemeConfig, StrategyConfig, TrafficSeries, TrainReport,
};

use crate::config::ExperimentConfig;
use crate::plot;

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn curves(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let (seq, conc) = cfg.schemes()?;
    let grid = cfg.lambda_grid()?;
    let table = sweep_curves(&[seq.clone(), conc.clone()], &grid)?;
    write(out, "curves.csv", &table.to_csv())?;
    write(out, "curves.gp", &plot::curves(&[seq.name(), conc.name()]))?;
    println!("wrote {} rows to curves.csv", table.rows.len());
    match StrategyConfig::new(seq, conc, None) {
        Ok(s) => println!("crossover lambda* = {}", g17(s.threshold())),
        Err(e) => eprintln!("no crossover: {e}"),
    }
    Ok(())
}

pub struct TrainedType {
    pub spec: TrafficSpec,
    pub series: TrafficSeries,
    /// First held-out index.
    pub cut: usize,
    pub model: Model,
    pub report: TrainReport,
}

fn train_type(cfg: &ExperimentConfig, spec: TrafficSpec) -> Result<TrainedType> {
    let label = spec.kind;
    let opts = cfg.train_options()?;
    let series = generate(&spec).with_context(|| format!("traffic {label}"))?;
    let (train_part, _) =
        series.split(cfg.predictor.train_fraction, opts.window).with_context(|| format!("traffic {label}"))?;
    let (model, report) = train(train_part.samples(), &opts).with_context(|| format!("training on traffic {label}"))?;
    Ok(TrainedType { spec, cut: train_part.len(), series, model, report })
}

/// Held-out predictions; windows may reach back into the training part.
fn held_out(t: &TrainedType) -> Result<(Vec<f64>, Vec<f64>)> {
    let w = t.model.window();
    let samples = t.series.samples();
    let predicted = predict_series(&t.model, &samples[t.cut - w..])?;
    Ok((samples[t.cut..].to_vec(), predicted))
}

pub fn train_cmd(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let mut metrics = format!("traffic,{CSV_HEADER},neurons,train_mse,normalized_rmse\n");
    let mut labels = Vec::new();
    for spec in cfg.traffic_specs()? {
        let t = train_type(cfg, spec)?;
        let label = t.spec.kind.to_string();
        let (actual, predicted) = held_out(&t)?;
        let report: ErrorReport =
            error_metrics(&actual, &predicted).with_context(|| format!("metrics for traffic {label}"))?;
        let mut csv = String::from("t,actual,predicted\n");
        for (i, (a, p)) in actual.iter().zip(&predicted).enumerate() {
            writeln!(csv, "{},{},{}", t.cut + i, g17(*a), g17(*p))?;
        }
        write(out, &format!("prediction_{label}.csv"), &csv)?;
        write(out, &format!("model_{label}.txt"), &t.model.to_text())?;
        let normalized_rmse = report.rmse / t.model.scale();
        writeln!(
            metrics,
            "{label},{},{},{},{}",
            report.to_csv_row(),
            t.report.neurons,
            g17(t.report.final_mse),
            g17(normalized_rmse)
        )?;
        let pearson = report.pearson.map_or_else(|| "undefined (zero variance)".to_string(), |r| format!("{r:.6}"));
        println!(
            "{label}: {} neurons, goal {}, held-out mse {:.6}, rmse {:.6}, pearson {pearson}",
            t.report.neurons,
            if t.report.goal_met { "met" } else { "not met" },
            report.mse,
            report.rmse
        );
        labels.push(label);
    }
    write(out, "metrics.csv", &metrics)?;
    write(out, "prediction.gp", &plot::predictions(&labels))?;
    Ok(())
}

fn summary_row(label: &str, strategy: &str, s: &StrategySummary, switches: usize) -> String {
    format!(
        "{label},{strategy},{},{},{},{},{switches}\n",
        g17(s.mean_wait_probability),
        s.mean_system_time,
        s.finite_mean_system_time.map_or_else(|| "nan".to_string(), g17),
        s.divergent_steps
    )
}

pub fn strategy_cmd(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let strategy = cfg.strategy_config()?;
    println!("threshold lambda* = {}", g17(strategy.threshold()));
    let mut summary = String::from("traffic,strategy,mean_pwait,mean_T,finite_mean_T,divergent_steps,switches\n");
    for spec in cfg.traffic_specs()? {
        let t = train_type(cfg, spec)?;
        let label = t.spec.kind.to_string();
        let oracle = compare_strategies(&t.series, &PerfectForesight { lookback: t.model.window() }, &strategy)?;
        let cmp: Comparison = if cfg.strategy.perfect_oracle {
            oracle.clone()
        } else {
            compare_strategies(&t.series, &t.model, &strategy)?
        };
        write(out, &format!("comparison_{label}.csv"), &cmp.to_csv())?;
        write(out, &format!("comparison_{label}.gp"), &plot::strategy(&label))?;
        summary.push_str(&summary_row(&label, "sequential", &cmp.sequential, 0));
        summary.push_str(&summary_row(&label, "concurrent", &cmp.concurrent, 0));
        summary.push_str(&summary_row(&label, "intelligent", &cmp.intelligent, cmp.switches));
        summary.push_str(&summary_row(&label, "oracle", &oracle.intelligent, oracle.switches));
        let flag = if cmp.intelligent_wins() { "  <- intelligent beats both pure strategies" } else { "" };
        println!(
            "{label}: mean T sequential {} ({} divergent steps), concurrent {}, intelligent {}{flag}",
            cmp.sequential.mean_system_time,
            cmp.sequential.divergent_steps,
            cmp.concurrent.mean_system_time,
            cmp.intelligent.mean_system_time
        );
    }
    write(out, "strategy_summary.csv", &summary)?;
    Ok(())
}

struct CellOutcome {
    channels: u32,
    mean_service_time: f64,
    arrival_rate: f64,
    analytic_pwait: f64,
    analytic_t: f64,
    runs: Vec<SimResult>,
}

/// Returns whether every cell agreed with the analytic values.
pub fn validate_cmd(cfg: &ExperimentConfig, out: &Path) -> Result<bool> {
    cfg.check_validation()?;
    let v = &cfg.validation;
    let seeds: Vec<u64> = (0..v.replications as u64).map(|r| cfg.seed.wrapping_add(r)).collect();
    let mut outcomes = Vec::new();
    for cell in &v.cells {
        let scheme = SchemeConfig::new("cell", cell.channels, cell.mean_service_time)?;
        let analytic = mean_system_time(&scheme, cell.arrival_rate)?;
        let horizon = v.horizon.unwrap_or(v.arrivals as f64 / cell.arrival_rate / (1.0 - v.warmup_fraction));
        let sim = SimConfig {
            warmup: v.warmup_fraction * horizon,
            batches: v.batches,
            ..SimConfig::homogeneous(cell.channels, cell.mean_service_time, cell.arrival_rate, horizon, 0)
        };
        let runs = replicate(&sim, &seeds).with_context(|| {
            format!("cell c={} s={} lambda={}", cell.channels, g17(cell.mean_service_time), g17(cell.arrival_rate))
        })?;
        outcomes.push(CellOutcome {
            channels: cell.channels,
            mean_service_time: cell.mean_service_time,
            arrival_rate: cell.arrival_rate,
            analytic_pwait: analytic.wait_probability,
            analytic_t: analytic.mean_system_time.to_real(),
            runs,
        });
    }
    let mut csv = String::from(
        "channels,mean_service_time,arrival_rate,seed,served,analytic_pwait,sim_pwait,pwait_halfwidth,pwait_ok,analytic_T,sim_T,T_halfwidth,T_ok,little_ok,pass\n",
    );
    let mut all_pass = true;
    for o in &outcomes {
        for (run, seed) in o.runs.iter().zip(&seeds) {
            let pw_ok = run.wait_probability.agrees_with(o.analytic_pwait, v.relative_tolerance);
            let t_ok = run.mean_system_time.agrees_with(o.analytic_t, v.relative_tolerance);
            let pass = pw_ok && t_ok;
            all_pass &= pass;
            writeln!(
                csv,
                "{},{},{},{seed},{},{},{},{},{pw_ok},{},{},{},{t_ok},{},{pass}",
                o.channels,
                g17(o.mean_service_time),
                g17(o.arrival_rate),
                run.served,
                g17(o.analytic_pwait),
                g17(run.wait_probability.mean),
                g17(run.wait_probability.ci95_halfwidth),
                g17(o.analytic_t),
                g17(run.mean_system_time.mean),
                g17(run.mean_system_time.ci95_halfwidth),
                little_check(run, o.arrival_rate)
            )?;
            println!(
                "c={:<3} s={:<4} lambda={:<4} seed={seed}: pwait {:.5} vs {:.5} +- {:.5}, T {:.5} vs {:.5} +- {:.5}  {}",
                o.channels,
                o.mean_service_time,
                o.arrival_rate,
                o.analytic_pwait,
                run.wait_probability.mean,
                run.wait_probability.ci95_halfwidth,
                o.analytic_t,
                run.mean_system_time.mean,
                run.mean_system_time.ci95_halfwidth,
                if pass { "PASS" } else { "FAIL" }
            );
        }
    }
    write(out, "validate.csv", &csv)?;
    Ok(all_pass)
}
