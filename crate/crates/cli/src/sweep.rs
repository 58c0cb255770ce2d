//! `sweep`: independent runs over a list of initial areas or radii,
//! executed concurrently and tabulated in input order.

use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::Context;
use nullflow::Outcome;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::provenance::{config_hash, csv_preamble};
use crate::simulate::{execute, write_artifacts};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parameter {
    Area,
    B0,
}

impl Parameter {
    fn name(self) -> &'static str {
        match self {
            Parameter::Area => "area",
            Parameter::B0 => "b0",
        }
    }

    /// A radius `b₀` stands for the initial area `4πb₀²`.
    fn area(self, value: f64) -> f64 {
        match self {
            Parameter::Area => value,
            Parameter::B0 => 4.0 * PI * value * value,
        }
    }
}

pub struct SweepArgs {
    pub template: RunConfig,
    pub parameter: Parameter,
    pub values: Vec<f64>,
    pub output: Option<PathBuf>,
    pub per_cell: bool,
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, Default, Serialize)]
struct Row {
    cell: usize,
    parameter: &'static str,
    value: f64,
    area0: f64,
    outcome: String,
    t_final: Option<f64>,
    area_final: Option<f64>,
    t_max_observed: Option<f64>,
    t_max_predicted: Option<f64>,
    max_abs_h2_final: Option<f64>,
    roundness_final: Option<f64>,
    steps: Option<usize>,
    error: String,
}

#[derive(Serialize)]
struct SweepManifest<'a> {
    template: String,
    parameter: Parameter,
    values: &'a [f64],
}

fn run_cell(args: &SweepArgs, cell: usize, value: f64) -> Row {
    let area0 = args.parameter.area(value);
    let mut row = Row { cell, parameter: args.parameter.name(), value, area0, ..Default::default() };
    let mut cfg = args.template.clone();
    cfg.area = Some(area0);
    let result = (|| -> anyhow::Result<()> {
        let (config, series) = execute(&cfg)?;
        if args.per_cell {
            let hash = cfg.hash()?;
            let dir = cfg.output_dir.join(format!("cell-{cell:03}"));
            write_artifacts(&dir, &cfg, &hash, &config, &series)?;
        }
        let last = series.last();
        row.outcome = series.outcome.name().into();
        row.t_final = Some(last.t);
        row.area_final = Some(last.area);
        if let Outcome::ShrinksToTip { t_max_observed, t_max_predicted } = series.outcome {
            row.t_max_observed = Some(t_max_observed);
            row.t_max_predicted = Some(t_max_predicted);
        }
        row.max_abs_h2_final = Some(last.h2_max_abs());
        row.roundness_final = Some(last.roundness);
        row.steps = Some(series.steps);
        Ok(())
    })();
    if let Err(e) = result {
        row.outcome = "error".into();
        row.error = format!("{e:#}");
    }
    row
}

/// Returns the number of cells that failed.
pub fn cmd_sweep(args: &SweepArgs) -> anyhow::Result<usize> {
    args.template.prepare()?;
    let template_hash = args.template.hash()?;
    let hash = config_hash(&SweepManifest { template: template_hash.clone(), parameter: args.parameter, values: &args.values })?;

    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.threads.unwrap_or(0)).build()?;
    let rows: Vec<Row> = pool.install(|| {
        args.values.par_iter().enumerate().map(|(i, &v)| run_cell(args, i, v)).collect()
    });

    let path = args.output.clone().unwrap_or_else(|| args.template.output_dir.join("sweep.csv"));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut out = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    writeln!(out, "{}", csv_preamble(&hash))?;
    let mut w = csv::Writer::from_writer(out);
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;

    let failed = rows.iter().filter(|r| !r.error.is_empty()).count();
    let outcomes: Vec<&str> = rows.iter().map(|r| r.outcome.as_str()).collect();
    let report = serde_json::json!({
        "tool": crate::provenance::TOOL,
        "version": crate::provenance::VERSION,
        "config_hash": hash,
        "table": path,
        "cells": rows.len(),
        "failed": failed,
        "outcomes": outcomes,
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(failed)
}
