//! The four subcommands: simulate, analytic, compare, sweep.

use std::fmt;

use anyhow::{bail, Context, Result};
use kicked_walk::ensemble::averaged_distribution;
use kicked_walk::near_resonant::near_resonant_distribution;
use kicked_walk::observables::{least_squares_line, mean_momentum, peak_positions, std_dev};
use kicked_walk::quantum_map::walk;
use kicked_walk::resonant::resonant_distribution;
use kicked_walk::{MomentumDistribution, Route};
use rayon::prelude::*;

use crate::output::{distribution_csv, distribution_svg, write_file, ExtraHeader};
use crate::run_config::{Resolved, RouteArg};

/// A compare run exceeded its tolerance. Carries the judged number so the
/// exit-code path still shows it.
#[derive(Debug)]
pub struct ComparisonFailed {
    pub judged: f64,
    pub tolerance: f64,
}

impl fmt::Display for ComparisonFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "comparison failed: max deviation {:.3e} exceeds tolerance {:.3e}",
            self.judged, self.tolerance
        )
    }
}

impl std::error::Error for ComparisonFailed {}

/// Compute the distribution for one route, ensemble-averaged when requested.
fn run_route(res: &Resolved, route: RouteArg) -> Result<MomentumDistribution> {
    let lib_route = route.to_route();
    if let Some(spec) = res.ensemble(lib_route) {
        return Ok(averaged_distribution(&res.walk, &res.ratchet, &spec)?);
    }
    let dist = match route {
        RouteArg::Simulate => walk(&res.walk, &res.ratchet)?,
        RouteArg::Resonant => resonant_distribution(&res.walk, &res.ratchet)?,
        RouteArg::NearResonant => near_resonant_distribution(&res.walk, &res.ratchet)?,
    };
    Ok(dist)
}

/// Ensemble parameters for the provenance header, when averaging is active.
fn ensemble_header(res: &Resolved) -> ExtraHeader {
    let mut extra = ExtraHeader::new();
    if let Some(spec) = res.ensemble(Route::Simulation) {
        extra.push(("fwhm".into(), spec.fwhm.to_string()));
        extra.push(("samples".into(), spec.samples.to_string()));
        extra.push(("seed".into(), spec.seed.to_string()));
        extra.push(("sigma".into(), spec.sigma().to_string()));
    }
    extra
}

/// Write a CSV (and optional SVG) under the output directory, or print the
/// CSV to standard output when no directory was given.
fn emit(res: &Resolved, dist: &MomentumDistribution, stem: &str, extra: &ExtraHeader) -> Result<()> {
    let csv = distribution_csv(dist, extra);
    match &res.out {
        Some(dir) => {
            let path = write_file(dir, &format!("{stem}.csv"), &csv)?;
            println!("wrote {}", path.display());
            if res.plot {
                let title = format!("{} k={} T={}", dist.route.tag(), dist.config.k, dist.config.steps);
                let path = write_file(dir, &format!("{stem}.svg"), &distribution_svg(dist, &title))?;
                println!("wrote {}", path.display());
            }
        }
        None => print!("{csv}"),
    }
    Ok(())
}

pub fn cmd_simulate(res: &Resolved) -> Result<()> {
    let dist = run_route(res, RouteArg::Simulate)?;
    emit(res, &dist, "simulate", &ensemble_header(res))
}

pub fn cmd_analytic(res: &Resolved) -> Result<()> {
    let route = res.analytic_route();
    if route == RouteArg::Simulate {
        bail!("analytic needs --route resonant or near-resonant (simulate has its own command)");
    }
    let dist = run_route(res, route)?;
    let stem = match route {
        RouteArg::Resonant => "analytic_resonant",
        _ => "analytic_near_resonant",
    };
    emit(res, &dist, stem, &ensemble_header(res))
}

/// Max |ΔP(n)|, optionally skipping the initial classes {0, 1}.
fn max_norm_excluding(
    a: &MomentumDistribution,
    b: &MomentumDistribution,
    exclude_initial: bool,
) -> f64 {
    a.grid()
        .filter(|n| !(exclude_initial && (*n == 0 || *n == 1)))
        .map(|n| (a.p_total(n) - b.p_total(n)).abs())
        .fold(0.0, f64::max)
}

pub fn cmd_compare(res: &Resolved) -> Result<()> {
    let candidate_route = res.analytic_route();
    if candidate_route == RouteArg::Simulate {
        bail!("compare judges an analytic route against the simulation; pass --route resonant or near-resonant");
    }
    let baseline = run_route(res, RouteArg::Simulate)?;
    let candidate = run_route(res, candidate_route)?;

    let max_norm = baseline.max_norm_distance(&candidate)?;
    let l1_full = kicked_walk::observables::l1_distance(&baseline, &candidate, &[])?;
    let l1_trimmed = kicked_walk::observables::l1_distance(&baseline, &candidate, &[0, 1])?;
    let judged = max_norm_excluding(&baseline, &candidate, res.exclude_initial);
    let judged_metric =
        if res.exclude_initial { "max_norm_excluding_initial" } else { "max_norm" };
    let pass = judged <= res.tolerance;

    println!("comparing SIMULATION (baseline) vs {}", candidate_route.to_route().tag());
    println!("  max-norm             {max_norm:.6e}");
    println!("  L1 (all n)           {l1_full:.6e}");
    println!("  L1 (n not in {{0,1}})  {l1_trimmed:.6e}");
    println!(
        "  judged {} = {judged:.6e} against tolerance {:.6e} -> {}",
        judged_metric,
        res.tolerance,
        if pass { "PASS" } else { "FAIL" }
    );

    let report = serde_json::json!({
        "baseline": baseline.route.tag(),
        "candidate": candidate.route.tag(),
        "k": res.walk.k,
        "steps": res.walk.steps,
        "beta": res.walk.beta,
        "fwhm": res.fwhm,
        "samples": if res.fwhm > 0.0 { Some(res.samples) } else { None },
        "seed": if res.fwhm > 0.0 { Some(res.seed) } else { None },
        "max_norm": max_norm,
        "l1": l1_full,
        "l1_excluding_initial": l1_trimmed,
        "judged_metric": judged_metric,
        "judged": judged,
        "tolerance": res.tolerance,
        "pass": pass,
    });
    if let Some(dir) = &res.out {
        let text = serde_json::to_string_pretty(&report).context("serializing report")?;
        let path = write_file(dir, "compare_report.json", &(text + "\n"))?;
        println!("wrote {}", path.display());
        emit(res, &baseline, "compare_baseline", &ensemble_header(res))?;
        emit(res, &candidate, "compare_candidate", &ensemble_header(res))?;
    }
    if !pass {
        return Err(ComparisonFailed { judged, tolerance: res.tolerance }.into());
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Axis {
    K,
    Steps,
    Fwhm,
}

impl Axis {
    fn name(self) -> &'static str {
        match self {
            Axis::K => "k",
            Axis::Steps => "steps",
            Axis::Fwhm => "fwhm",
        }
    }

    /// Apply one swept value to a run configuration.
    fn apply(self, res: &Resolved, value: f64) -> Result<Resolved> {
        let mut point = res.clone();
        match self {
            Axis::K => point.walk.k = value,
            Axis::Steps => {
                if value < 0.0 || value.fract() != 0.0 {
                    bail!("steps value {value} is not a nonnegative integer");
                }
                point.walk.steps = value as u32;
            }
            Axis::Fwhm => point.fwhm = value,
        }
        point.walk.validate()?;
        Ok(point)
    }
}

pub fn cmd_sweep(res: &Resolved, axis: Axis, values_text: &str) -> Result<()> {
    let out_dir = res
        .out
        .clone()
        .ok_or_else(|| anyhow::anyhow!("sweep emits one file per value and needs --out DIR"))?;
    let values: Vec<f64> = values_text
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .with_context(|| format!("invalid sweep value {:?}", part.trim()))
        })
        .collect::<Result<_>>()?;
    if values.is_empty() {
        bail!("sweep needs at least one value");
    }
    let mut unique = values.clone();
    unique.sort_by(f64::total_cmp);
    unique.dedup();
    if unique.len() != values.len() {
        bail!("sweep values contain duplicates");
    }
    let route = res.route.unwrap_or(RouteArg::Simulate);

    // One walk per value, in parallel; writes happen serially afterwards.
    let runs: Vec<(f64, Resolved, MomentumDistribution)> = values
        .par_iter()
        .map(|&value| {
            let point = axis.apply(res, value)?;
            let dist = run_route(&point, route)?;
            Ok((value, point, dist))
        })
        .collect::<Result<_>>()?;

    let mut summary = String::new();
    summary.push_str("# kwalk sweep v1\n");
    summary.push_str(&format!("# axis = {}\n", axis.name()));
    summary.push_str(&format!("# route = {}\n", route.to_route().tag()));
    summary.push_str("value,mean_momentum,std_dev,peak_min,peak_max,mass\n");
    let mut spread_points = Vec::with_capacity(runs.len());
    for (value, point, dist) in &runs {
        let mut extra = ensemble_header(point);
        extra.push(("sweep_axis".into(), axis.name().into()));
        extra.push(("sweep_value".into(), value.to_string()));
        let point_for_emit =
            Resolved { out: Some(out_dir.clone()), ..point.clone() };
        emit(&point_for_emit, dist, &format!("sweep_{}_{}", axis.name(), value), &extra)?;
        let mean = mean_momentum(dist)?;
        let spread = std_dev(dist)?;
        let peaks = peak_positions(dist);
        let peak_min = peaks.iter().min().copied().unwrap_or(0);
        let peak_max = peaks.iter().max().copied().unwrap_or(0);
        summary.push_str(&format!(
            "{value},{mean:.16e},{spread:.16e},{peak_min},{peak_max},{:.16e}\n",
            dist.mass()
        ));
        spread_points.push((*value, spread));
    }
    if axis == Axis::Steps && spread_points.len() >= 4 {
        if let Some((slope, intercept, r_squared)) = least_squares_line(&spread_points) {
            summary.push_str(&format!("# fit_slope = {slope}\n"));
            summary.push_str(&format!("# fit_intercept = {intercept}\n"));
            summary.push_str(&format!("# fit_r_squared = {r_squared}\n"));
        }
    }
    let path = write_file(&out_dir, &format!("sweep_{}_summary.csv", axis.name()), &summary)?;
    println!("wrote {}", path.display());
    Ok(())
}
