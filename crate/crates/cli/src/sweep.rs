//! Convergence sweeps and the spatial saturation scan.

use frameavg::AveragingKind;
use log::{info, warn};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::pipeline::{row_checks, Point, Prepared, RowCheck};

/// Outcome of a sweep: sorted points and the row checks that failed.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub points: Vec<Point>,
    pub failures: Vec<(usize, String, RowCheck)>,
}

impl SweepOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn records(&self) -> Vec<crate::record::ExperimentRecord> {
        self.points.iter().map(|p| p.record.clone()).collect()
    }
}

fn run_size(cfg: &ExperimentConfig, n: usize, kinds: &[AveragingKind<f64>]) -> Result<Vec<Point>, CliError> {
    let lattice = cfg.lattice(n)?;
    info!("N={n}: dimension {}", lattice.dim());
    let prepared = Prepared::new(lattice, cfg.model, cfg.beta, cfg.perturbation())?;
    let mut points = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let p = prepared.evaluate(kind)?;
        info!(
            "N={n} {kind}: S(M rho'|rho) = {:.6e}, |ME - 1| = {:.6e}",
            p.record.rel_ent_avg, p.record.me_deviation
        );
        points.push(p);
    }
    Ok(points)
}

/// Evaluates every `(N, kind)` pair of `kinds`, sizes in parallel.
pub fn run_points(cfg: &ExperimentConfig, kinds: &[AveragingKind<f64>]) -> Result<SweepOutcome, CliError> {
    let per_size: Vec<Result<Vec<Point>, CliError>> =
        cfg.sizes.par_iter().map(|&n| run_size(cfg, n, kinds)).collect();
    let mut points = Vec::new();
    for r in per_size {
        points.extend(r?);
    }
    points.sort_by(|a, b| a.record.key_cmp(&b.record));
    let mut failures = Vec::new();
    for p in &points {
        for check in row_checks(p) {
            let tolerance = cfg.tolerance_overrides.get(check.name).copied().unwrap_or(check.tolerance);
            let check = RowCheck { tolerance, ..check };
            if !check.passed() {
                warn!(
                    "N={} {}: {} residual {:.3e} exceeds {:.1e}",
                    p.record.n, p.record.avg_kind, check.name, check.residual, check.tolerance
                );
                failures.push((p.record.n, p.record.avg_kind.clone(), check));
            }
        }
    }
    Ok(SweepOutcome { points, failures })
}

pub fn convergence_sweep(cfg: &ExperimentConfig) -> Result<SweepOutcome, CliError> {
    let outcome = run_points(cfg, &cfg.averaging)?;
    report_trends(&outcome.points);
    Ok(outcome)
}

fn report_trends(points: &[Point]) {
    let mut kinds: Vec<(String, Option<f64>)> = Vec::new();
    for p in points {
        let key = (p.record.avg_kind.clone(), p.record.avg_param);
        if !kinds.contains(&key) {
            kinds.push(key);
        }
    }
    for (kind, param) in kinds {
        let series: Vec<&Point> =
            points.iter().filter(|p| p.record.avg_kind == kind && p.record.avg_param == param).collect();
        if series.len() < 2 {
            continue;
        }
        let decreasing = series.windows(2).all(|w| w[1].record.rel_ent_avg < w[0].record.rel_ent_avg);
        let ratio = series.last().unwrap().record.rel_ent_avg / series[0].record.rel_ent_avg;
        info!("{kind}: S(M rho'|rho) strictly decreasing in N: {decreasing}; last/first = {ratio:.4}");
        // exploratory log-linear fit of S(M rho'|rho) against N
        let xy: Vec<(f64, f64)> = series
            .iter()
            .filter(|p| p.record.rel_ent_avg > 0.0)
            .map(|p| (p.record.n as f64, p.record.rel_ent_avg.ln()))
            .collect();
        if xy.len() >= 2 {
            let m = xy.len() as f64;
            let (sx, sy) = xy.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
            let (mx, my) = (sx / m, sy / m);
            let sxy: f64 = xy.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
            let sxx: f64 = xy.iter().map(|(x, _)| (x - mx).powi(2)).sum();
            info!("{kind}: log S(M rho'|rho) ~ {:.4} N + const", sxy / sxx);
        }
    }
}

/// Weighted averages at ascending `R`, plus the uniform reference row.
pub fn saturation_scan(cfg: &ExperimentConfig) -> Result<SweepOutcome, CliError> {
    let radii: Vec<f64> = cfg
        .averaging
        .iter()
        .filter_map(|k| match k {
            AveragingKind::Weighted { r } => Some(*r),
            _ => None,
        })
        .collect();
    if radii.is_empty() {
        return Err(CliError::Config("saturate: averaging must list weighted-spatial entries".into()));
    }
    if radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Config(format!("saturate: R values must be strictly ascending, got {radii:?}")));
    }
    let mut kinds = cfg.averaging.clone();
    if !kinds.contains(&AveragingKind::Uniform) {
        kinds.insert(0, AveragingKind::Uniform);
    }
    let outcome = run_points(cfg, &kinds)?;
    for &n in &cfg.sizes {
        let rows: Vec<&Point> = outcome.points.iter().filter(|p| p.record.n == n).collect();
        let Some(uniform) = rows.iter().find(|p| p.record.avg_kind == "uniform-spatial") else { continue };
        let reference = uniform.record.gain();
        let weighted: Vec<&&Point> = rows.iter().filter(|p| p.record.avg_kind == "weighted-spatial").collect();
        for p in &weighted {
            info!("N={n} R={}: gain {:.6e} (uniform {:.6e})", p.record.avg_param.unwrap_or(0.0), p.record.gain(), reference);
        }
        let monotone = weighted.windows(2).all(|w| w[1].record.gain() >= w[0].record.gain() - 1e-12);
        info!("N={n}: gain non-decreasing in R: {monotone}");
        if let Some(last) = weighted.last() {
            let r = last.record.avg_param.unwrap_or(0.0);
            if r >= n as f64 && reference > 0.0 {
                let within = (last.record.gain() - reference).abs() <= 0.02 * reference;
                info!("N={n}: final R={r} gain within 2% of uniform: {within}");
            }
        }
    }
    Ok(outcome)
}
