//! Benchmark harness: runs an algorithm set over an instance set and emits
//! one CSV row per cell, plus optional ratio-vs-eta plot data.

use std::path::PathBuf;
use std::time::Instant;

use crate::algorithms::make_algorithm;
use crate::cli::files;
use crate::engine::{simulate, ItemCatalog, Mode};
use crate::metrics::metrics_report;
use crate::opt::{optimal_bounds, optimal_exact, OptResult};
use crate::schedule::schedule_cost;
use crate::weight::{display_rational, Weight};

pub struct BenchRow {
    pub instance: String,
    pub algorithm: String,
    pub mode: String,
    /// Exact rational cost, or `FAILED(reason)`.
    pub cost: String,
    pub opt_kind: String,
    pub opt_lower: String,
    pub opt_upper: String,
    /// Cost over the exact optimum, or over the upper witness when only
    /// bounds are available (conservative).
    pub ratio: String,
    pub ratio_decimal: String,
    pub eta: u64,
    pub item_inversions: u64,
    pub request_inversions: u64,
    pub services: usize,
    pub runtime_ms: u128,
    pub failed: bool,
    pub eta_ratio_point: Option<(u64, f64)>,
}

pub const CSV_HEADER: &str = "instance,algorithm,mode,cost,opt_kind,opt_lower,opt_upper,\
ratio,ratio_decimal,eta,item_inversions,request_inversions,services,runtime_ms";

pub fn run_bench(
    algorithms: &[String],
    instance_paths: &[PathBuf],
    mode: Mode,
    opt_limit: usize,
) -> (Vec<BenchRow>, bool) {
    let mode_name = match mode {
        Mode::Predicted => "predicted",
        Mode::Clairvoyant => "clairvoyant",
    };
    let mut rows = Vec::new();
    let mut any_failed = false;
    for path in instance_paths {
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        let instance = match files::read_instance(path) {
            Ok(instance) => instance,
            Err(err) => {
                any_failed = true;
                for algorithm in algorithms {
                    rows.push(failed_row(&name, algorithm, mode_name, &err.to_string()));
                }
                continue;
            }
        };
        let report = metrics_report(&instance);
        let opt = match optimal_exact(&instance, opt_limit) {
            Ok(result) => result,
            Err(_) => optimal_bounds(&instance).expect("valid instance"),
        };
        let (opt_kind, opt_lower, opt_upper) = match &opt {
            OptResult::Exact { cost, .. } => ("exact", *cost, *cost),
            OptResult::Bounds { lower, upper, .. } => ("bounds", *lower, *upper),
        };
        let catalog = ItemCatalog::of(&instance);
        for algorithm in algorithms {
            let started = Instant::now();
            let outcome = make_algorithm(algorithm, &catalog)
                .map_err(|e| e.to_string())
                .and_then(|mut alg| {
                    simulate(&instance, alg.as_mut(), mode).map_err(|e| e.to_string())
                });
            let runtime_ms = started.elapsed().as_millis();
            match outcome {
                Ok((schedule, _)) => {
                    let cost = schedule_cost(&schedule, &instance)
                        .expect("run output")
                        .total;
                    let ratio = cost.div(&opt_upper);
                    rows.push(BenchRow {
                        instance: name.clone(),
                        algorithm: algorithm.clone(),
                        mode: mode_name.into(),
                        cost: cost.to_string(),
                        opt_kind: opt_kind.into(),
                        opt_lower: opt_lower.to_string(),
                        opt_upper: opt_upper.to_string(),
                        ratio: ratio.map(|r| display_rational(&r)).unwrap_or_default(),
                        ratio_decimal: ratio
                            .map(|r| format!("{}", ratio_to_f64(&r)))
                            .unwrap_or_default(),
                        eta: report.eta,
                        item_inversions: report.item_inversions,
                        request_inversions: report.request_inversions,
                        services: schedule.services.len(),
                        runtime_ms,
                        failed: false,
                        eta_ratio_point: ratio.map(|r| (report.eta, ratio_to_f64(&r))),
                    });
                }
                Err(reason) => {
                    any_failed = true;
                    rows.push(failed_row(&name, algorithm, mode_name, &reason));
                }
            }
        }
    }
    (rows, any_failed)
}

fn ratio_to_f64(ratio: &crate::weight::Rational) -> f64 {
    *ratio.numer() as f64 / *ratio.denom() as f64
}

fn failed_row(instance: &str, algorithm: &str, mode: &str, reason: &str) -> BenchRow {
    BenchRow {
        instance: instance.into(),
        algorithm: algorithm.into(),
        mode: mode.into(),
        cost: format!("FAILED({})", reason.replace('\n', " ")),
        opt_kind: String::new(),
        opt_lower: String::new(),
        opt_upper: String::new(),
        ratio: String::new(),
        ratio_decimal: String::new(),
        eta: 0,
        item_inversions: 0,
        request_inversions: 0,
        services: 0,
        runtime_ms: 0,
        failed: true,
        eta_ratio_point: None,
    }
}

fn csv_field(text: &str) -> String {
    if text.contains(',') || text.contains('"') || text.contains('\n') {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let fields = [
            csv_field(&row.instance),
            csv_field(&row.algorithm),
            csv_field(&row.mode),
            csv_field(&row.cost),
            csv_field(&row.opt_kind),
            csv_field(&row.opt_lower),
            csv_field(&row.opt_upper),
            csv_field(&row.ratio),
            csv_field(&row.ratio_decimal),
            row.eta.to_string(),
            row.item_inversions.to_string(),
            row.request_inversions.to_string(),
            row.services.to_string(),
            row.runtime_ms.to_string(),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Two-column eta/ratio data, one block per algorithm, ready for plotting.
pub fn to_plot_data(rows: &[BenchRow], algorithms: &[String]) -> String {
    let mut out = String::new();
    for algorithm in algorithms {
        out.push_str(&format!("# {algorithm}\n"));
        for row in rows.iter().filter(|r| &r.algorithm == algorithm) {
            if let Some((eta, ratio)) = row.eta_ratio_point {
                out.push_str(&format!("{eta} {ratio}\n"));
            }
        }
        out.push('\n');
    }
    out
}

/// `cost` as an exact multiple of `opt`, recomputable from the CSV columns.
pub fn exact_ratio(cost: &Weight, opt: &Weight) -> Option<String> {
    cost.div(opt).map(|r| display_rational(&r))
}
