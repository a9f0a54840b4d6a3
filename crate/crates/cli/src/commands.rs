//! Subcommand bodies. Each returns the list of failed invariants.

use std::path::Path;

use anyhow::{bail, Result};
use decoupling_core::channel::purified_output;
use decoupling_core::coding::{run_code_experiment, CodeExperimentConfig, CodeSummary};
use decoupling_core::decoupling::{
    exact_haar_average_hs, haar_samples, oneshot_bound, weyl_average_hs, DecouplingInstance, Estimate, Metric,
};
use decoupling_core::optimize::multicopy_lower_bound;
use decoupling_core::typicality::{flatten_code, verify_typ_bounds};
use decoupling_core::SeededSource;
use serde::Serialize;

use crate::config::*;
use crate::output::{csv, float, opt_float, OutDir};
use crate::Format;

pub const DECOUPLE_COLUMNS: [&str; 10] =
    ["instance_id", "S", "R", "E", "metric", "n_samples", "mean", "stderr", "exact_value", "bound"];

pub const CODE_COLUMNS: [&str; 11] = [
    "trial",
    "decoupling_distance",
    "hs_distance_sq",
    "oneshot_bound",
    "achieved_fidelity",
    "channel_fidelity",
    "infidelity",
    "fidelity_slack",
    "bound_holds",
    "encoding_defect",
    "trace_deviation",
];

/// Monte-Carlo means may exceed their target by this many standard errors.
const SIGMAS: f64 = 5.0;

#[derive(Serialize)]
struct DecoupleRow {
    instance_id: String,
    #[serde(rename = "S")]
    s: usize,
    #[serde(rename = "R")]
    r: usize,
    #[serde(rename = "E")]
    e: usize,
    metric: String,
    n_samples: usize,
    mean: f64,
    stderr: f64,
    exact_value: Option<f64>,
    bound: Option<f64>,
}

impl DecoupleRow {
    fn cells(&self) -> Vec<String> {
        vec![
            self.instance_id.clone(),
            self.s.to_string(),
            self.r.to_string(),
            self.e.to_string(),
            self.metric.clone(),
            self.n_samples.to_string(),
            float(self.mean),
            float(self.stderr),
            opt_float(self.exact_value),
            opt_float(self.bound),
        ]
    }
}

#[derive(Serialize)]
struct InstanceSummary {
    id: String,
    s_dim: usize,
    r_dim: usize,
    e_dim: usize,
    purity: f64,
    exact_hs: Option<f64>,
    weyl_hs: Option<f64>,
    oneshot_bound: f64,
    max_trace_deviation: f64,
}

#[derive(Serialize)]
struct Summary<T: Serialize> {
    schema: &'static str,
    failures: Vec<String>,
    #[serde(flatten)]
    body: T,
}

fn label(name: MetricName) -> &'static str {
    match name {
        MetricName::HsSquared => "hs_squared",
        MetricName::Trace => "trace",
        MetricName::TraceSquared => "trace_squared",
    }
}

fn metric_of(name: MetricName) -> Metric {
    match name {
        MetricName::HsSquared => Metric::HsSquared,
        MetricName::Trace => Metric::Trace,
        MetricName::TraceSquared => Metric::TraceSquared,
    }
}

fn build_instance(source: &InstanceSource, r_dim: usize, seed: u64, index: u64, base: &Path) -> Result<DecouplingInstance> {
    Ok(match source {
        InstanceSource::Channel(spec) => DecouplingInstance::from_channel(&spec.build(base)?, r_dim)?,
        InstanceSource::Random {
            s_dim,
            e_dim,
            kraus_count,
        } => {
            let mut rng = SeededSource::with_stream(seed, 2 * index).rng();
            DecouplingInstance::random(*s_dim, *e_dim, *kraus_count, r_dim, &mut rng)?
        }
    })
}

pub fn decouple(cfg: &DecoupleConfig, base: &Path, out: &OutDir, format: Format) -> Result<Vec<String>> {
    if cfg.n_samples < 2 {
        bail!("n_samples must be at least 2");
    }
    let mut ids = std::collections::BTreeSet::new();
    for inst in &cfg.instances {
        validate_id(&inst.id)?;
        if !ids.insert(inst.id.as_str()) {
            bail!("duplicate instance id `{}`", inst.id);
        }
    }
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    let mut failures = Vec::new();
    for (index, ic) in cfg.instances.iter().enumerate() {
        let inst = build_instance(&ic.source, ic.r_dim, cfg.seed, index as u64, base)?;
        let (s, r, e) = (inst.s_dim(), inst.r_dim(), inst.e_dim());
        let exact = if s >= 2 { Some(exact_haar_average_hs(&inst)?) } else { None };
        let bound = oneshot_bound(&inst);
        let samples = haar_samples(&inst, cfg.n_samples, &SeededSource::with_stream(cfg.seed, 2 * index as u64 + 1))?;
        let row = |metric: &str, n: usize, est: (f64, f64), exact_value: Option<f64>, bound: Option<f64>| DecoupleRow {
            instance_id: ic.id.clone(),
            s,
            r,
            e,
            metric: metric.into(),
            n_samples: n,
            mean: est.0,
            stderr: est.1,
            exact_value,
            bound,
        };
        for &m in &cfg.metrics {
            let metric = metric_of(m);
            let values: Vec<f64> = samples.iter().map(|x| metric.of(x)).collect();
            let est = Estimate::from_values(&values);
            let (exact_value, bound_value) = match m {
                MetricName::HsSquared => (exact.map(|x| x.exact), exact.map(|x| x.relaxed_bound)),
                MetricName::Trace => (None, Some(bound)),
                MetricName::TraceSquared => (None, Some(bound * bound)),
            };
            if let Some(x) = exact_value {
                if (est.mean - x).abs() > SIGMAS * est.stderr + 1e-10 {
                    failures.push(format!("{}: {} mean {} differs from closed form {}", ic.id, label(m), est.mean, x));
                }
            }
            if let Some(b) = bound_value {
                if est.mean > b + SIGMAS * est.stderr + 1e-12 {
                    failures.push(format!("{}: {} mean {} exceeds bound {}", ic.id, label(m), est.mean, b));
                }
            }
            rows.push(row(label(m), est.n_samples, (est.mean, est.stderr), exact_value, bound_value));
        }
        let weyl = if cfg.weyl { Some(weyl_average_hs(&inst)?) } else { None };
        if let Some(w) = weyl {
            rows.push(row("hs_squared_weyl", s * s, (w, 0.0), exact.map(|x| x.exact), exact.map(|x| x.relaxed_bound)));
        }
        summaries.push(InstanceSummary {
            id: ic.id.clone(),
            s_dim: s,
            r_dim: r,
            e_dim: e,
            purity: inst.purity(),
            exact_hs: exact.map(|x| x.exact),
            weyl_hs: weyl,
            oneshot_bound: bound,
            max_trace_deviation: samples.iter().map(|x| x.trace_deviation).fold(0.0, f64::max),
        });
    }
    match format {
        Format::Csv => out.write("decouple.csv", &csv(&DECOUPLE_COLUMNS, &rows.iter().map(|r| r.cells()).collect::<Vec<_>>()))?,
        Format::Json => out.write_json("decouple.json", &rows)?,
    }
    out.write_json(
        "summary.json",
        &Summary {
            schema: DECOUPLE_SCHEMA,
            failures: failures.clone(),
            body: serde_json::json!({ "instances": summaries }),
        },
    )?;
    Ok(failures)
}

pub fn code(cfg: &CodeConfig, base: &Path, out: &OutDir, format: Format) -> Result<Vec<String>> {
    let channel = cfg.channel.build(base)?;
    let phi = cfg.phi.build(channel.in_dim())?;
    let exp = run_code_experiment(&CodeExperimentConfig {
        channel,
        phi,
        n: cfg.n,
        r_dim: cfg.r_dim,
        trials: cfg.trials,
        delta: cfg.delta,
        seed: cfg.seed,
        mode: cfg.subspace_mode,
    })?;
    let summary: CodeSummary = exp.summary();
    let mut failures = Vec::new();
    for r in exp.records.iter().filter(|r| !r.bound_holds) {
        failures.push(format!("trial {}: fidelity {} below 1 - distance {}", r.trial, r.achieved_fidelity, 1.0 - r.decoupling_distance));
    }
    for r in exp.records.iter().filter(|r| r.encoding_defect > 1e-10) {
        failures.push(format!("trial {}: encoding marginal off by {}", r.trial, r.encoding_defect));
    }
    let d = summary.decoupling_distance;
    if d.mean > summary.oneshot_bound + SIGMAS * d.stderr {
        failures.push(format!("mean decoupling distance {} exceeds one-shot bound {}", d.mean, summary.oneshot_bound));
    }
    match format {
        Format::Csv => {
            let rows: Vec<Vec<String>> = exp
                .records
                .iter()
                .map(|r| {
                    vec![
                        r.trial.to_string(),
                        float(r.decoupling_distance),
                        float(r.hs_distance_sq),
                        float(r.oneshot_bound),
                        float(r.achieved_fidelity),
                        float(r.channel_fidelity),
                        float(r.infidelity),
                        float(r.fidelity_slack),
                        r.bound_holds.to_string(),
                        float(r.encoding_defect),
                        float(r.trace_deviation),
                    ]
                })
                .collect();
            out.write("code.csv", &csv(&CODE_COLUMNS, &rows))?;
        }
        Format::Json => out.write_json("code.json", &exp.records)?,
    }
    out.write_json(
        "summary.json",
        &Summary {
            schema: CODE_SCHEMA,
            failures: failures.clone(),
            body: serde_json::json!({
                "subspace_mode": exp.code.mode.name(),
                "chosen_type": exp.code.chosen_type,
                "epsilon": exp.code.epsilon,
                "summary": summary,
            }),
        },
    )?;
    Ok(failures)
}

#[derive(Serialize)]
struct CapacityReport {
    channel: String,
    n: usize,
    per_copy: f64,
    product_value: f64,
    single_copy: f64,
    /// Optimal single-copy input as rows of `[re, im]` pairs.
    state: Vec<Vec<[f64; 2]>>,
    restarts: Vec<decoupling_core::optimize::RestartOutcome>,
}

pub fn capacity(cfg: &CapacityConfig, base: &Path, out: &OutDir, format: Format) -> Result<Vec<String>> {
    let channel = cfg.channel.build(base)?;
    let res = multicopy_lower_bound(&channel, cfg.n, cfg.restarts, cfg.iterations, &SeededSource::new(cfg.seed))?;
    let m = res.single_copy.state.matrix();
    let report = CapacityReport {
        channel: channel.name().into(),
        n: cfg.n,
        per_copy: res.per_copy,
        product_value: res.product_value,
        single_copy: res.single_copy.value,
        state: (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect(),
        restarts: res.multi_copy.restarts.clone(),
    };
    let mut failures = Vec::new();
    let cap = (channel.in_dim().min(channel.out_dim()) as f64).log2();
    if report.per_copy > cap + 1e-9 {
        failures.push(format!("per-copy value {} exceeds log2 min(dims) = {}", report.per_copy, cap));
    }
    for r in res.single_copy.restarts.iter().chain(&res.multi_copy.restarts) {
        if r.history.windows(2).any(|w| w[1] < w[0]) {
            failures.push(format!("restart {}: history decreases", r.restart));
        }
    }
    match format {
        Format::Json => out.write_json("capacity.json", &report)?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = report
                .restarts
                .iter()
                .map(|r| vec![r.restart.to_string(), float(r.value / cfg.n as f64), r.history.len().to_string()])
                .collect();
            out.write("capacity.csv", &csv(&["restart", "per_copy_value", "iterations"], &rows))?;
        }
    }
    out.write_json(
        "summary.json",
        &Summary {
            schema: CAPACITY_SCHEMA,
            failures: failures.clone(),
            body: serde_json::json!({ "per_copy": report.per_copy, "product_value": report.product_value }),
        },
    )?;
    Ok(failures)
}

pub fn typicality(cfg: &TypicalityConfig, base: &Path, out: &OutDir, format: Format) -> Result<Vec<String>> {
    let channel = cfg.channel.build(base)?;
    let phi = cfg.phi.build(channel.in_dim())?;
    let code = flatten_code(&purified_output(&phi, &channel)?, cfg.n, cfg.delta)?;
    let report = verify_typ_bounds(&code);
    let failures: Vec<String> = report
        .bounds
        .iter()
        .filter(|b| b.required && !b.pass)
        .map(|b| format!("{}: lhs {} rhs {}", b.name, b.lhs, opt_float(b.rhs)))
        .collect();
    match format {
        Format::Json => out.write_json("typicality.json", &report)?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = report
                .bounds
                .iter()
                .map(|b| vec![b.name.clone(), float(b.lhs), opt_float(b.rhs), opt_float(b.slack), b.pass.to_string(), b.required.to_string()])
                .collect();
            out.write("typicality.csv", &csv(&["bound", "lhs", "rhs", "slack", "pass", "required"], &rows))?;
        }
    }
    out.write_json(
        "summary.json",
        &Summary {
            schema: TYPICALITY_SCHEMA,
            failures: failures.clone(),
            body: serde_json::json!({
                "channel": channel.name(),
                "epsilon": report.epsilon_measured,
                "c_prime": report.c_prime,
                "dims": report.dims,
            }),
        },
    )?;
    Ok(failures)
}
