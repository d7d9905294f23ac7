//! Experiment runner: turns scenarios into result tables.

mod presets;
mod scenario;
mod table;

pub use presets::{mixed_three_relay_network, preset, PRESETS};
pub use scenario::{
    output_name, AlphaSweep, CurveGrid, DiversitySurface, Kind, Output, Scenario,
};
pub use table::{
    read_rows, CurveRow, FitRow, SurfaceRow, SweepRow, Table, CURVE_COLUMNS, FIT_COLUMNS,
    SURFACE_COLUMNS, SWEEP_COLUMNS,
};

use crate::analytic::{
    asymptotic_af_bounds, asymptotic_outage_dfaf, coding_gain_dfaf, diversity_order_af,
    outage_af_sc, outage_df_sc, outage_dfaf_sc, RateSpec,
};
use crate::channel::{NetworkSpec, PowerSpec};
use crate::error::{Error, Result};
use crate::montecarlo::{
    db_to_linear, estimate_coupled, Combiner, CoupledRun, OutageEstimate, Protocol, Scheme,
};

/// Grid points with fewer failures than this get a warning.
pub const MIN_RELIABLE_FAILURES: u64 = 30;

/// Output of one scenario run.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub name: String,
    pub table: Table,
    pub warnings: Vec<String>,
    /// Coupled trials where DF-AF lost to DF or AF; always zero for a
    /// correct selection rule.
    pub dominance_violations: u64,
}

/// Exact SC outage of `scheme`.
pub fn analytic_outage(
    scheme: Scheme,
    net: &NetworkSpec,
    power: &PowerSpec,
    rs: &RateSpec,
) -> Result<f64> {
    match scheme {
        Scheme::DfAf => outage_dfaf_sc(net, power, rs),
        Scheme::Df => outage_df_sc(net, power, rs),
        Scheme::Af => outage_af_sc(net, power, rs),
    }
}

/// Diversity order of `scheme` under SC.
pub fn theoretical_diversity(scheme: Scheme, net: &NetworkSpec, rs: &RateSpec) -> Result<f64> {
    match scheme {
        Scheme::DfAf | Scheme::Df => Ok(coding_gain_dfaf(net, rs)?.diversity_order),
        Scheme::Af => Ok(diversity_order_af(net)),
    }
}

fn low_failure_warning(
    name: &str,
    at: &str,
    protocol: Protocol,
    est: &OutageEstimate,
) -> Option<String> {
    (est.failures < MIN_RELIABLE_FAILURES).then(|| {
        format!(
            "{name}: {at} {}/{}: only {} failures in {} trials; estimate unreliable",
            protocol.scheme, protocol.combiner, est.failures, est.trials
        )
    })
}

/// Runs a scenario of any kind.
pub fn run_scenario(s: &Scenario, workers: Option<usize>) -> Result<Report> {
    s.validate()?;
    match s.kind()? {
        Kind::Curve(net, grid) => run_curve(s, net, grid, workers),
        Kind::AlphaSweep(..) => sweep_alpha(s, workers),
        Kind::Surface(surface) => Ok(Report {
            name: s.name.clone(),
            table: Table::Surface(diversity_surface(surface, &s.rate_spec()?)?),
            warnings: vec![],
            dominance_violations: 0,
        }),
    }
}

fn run_curve(
    s: &Scenario,
    net: &NetworkSpec,
    grid: &CurveGrid,
    workers: Option<usize>,
) -> Result<Report> {
    let rs = s.rate_spec()?;
    let protocols = s.protocols();
    let cfg = s.mc_config(workers);
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    let mut dominance_violations = 0;

    for (point, &snr_db) in grid.snr_db.iter().enumerate() {
        let power = PowerSpec::equal(db_to_linear(snr_db))?;
        let in_mc_range = grid.mc_max_snr_db.is_none_or(|max| snr_db <= max);
        let mc: Option<CoupledRun> = if s.wants(Output::Montecarlo) && in_mc_range {
            let run = estimate_coupled(net, &power, &rs, &protocols, &cfg, point as u64)?;
            dominance_violations += run.dominance_violations;
            Some(run)
        } else {
            None
        };
        let asymptote = if s.wants(Output::Asymptotic) {
            Some(asymptotic_outage_dfaf(net, &power, &rs)?)
        } else {
            None
        };

        for (j, &p) in protocols.iter().enumerate() {
            let outage_analytic = if s.wants(Output::Analytic) {
                Some(analytic_outage(p.scheme, net, &power, &rs)?)
            } else {
                None
            };
            let est = mc.as_ref().map(|run| run.estimates[j]);
            if let Some(w) = est
                .as_ref()
                .and_then(|e| low_failure_warning(&s.name, &format!("{snr_db} dB"), p, e))
            {
                warnings.push(w);
            }
            rows.push(CurveRow {
                snr_db,
                scheme: p.scheme.name().to_string(),
                combiner: p.combiner.name().to_string(),
                outage_analytic,
                outage_asymptotic: asymptote.filter(|_| p.scheme != Scheme::Af),
                outage_mc: est.map(|e| e.probability),
                mc_ci_low: est.map(|e| e.ci_low),
                mc_ci_high: est.map(|e| e.ci_high),
                trials: est.map(|e| e.trials),
                failures: est.map(|e| e.failures),
            });
            if p.scheme == Scheme::Af && s.wants(Output::Bounds) {
                let (lower, upper) = asymptotic_af_bounds(net, &power, &rs)?;
                for (label, value) in [("af_lower", lower), ("af_upper", upper)] {
                    rows.push(CurveRow {
                        snr_db,
                        scheme: label.to_string(),
                        combiner: p.combiner.name().to_string(),
                        outage_analytic: None,
                        outage_asymptotic: Some(value),
                        outage_mc: None,
                        mc_ci_low: None,
                        mc_ci_high: None,
                        trials: None,
                        failures: None,
                    });
                }
            }
        }
    }
    Ok(Report {
        name: s.name.clone(),
        table: Table::Curve(rows),
        warnings,
        dominance_violations,
    })
}

/// Monte Carlo outage at each power split `α`, all schemes on shared draws.
pub fn sweep_alpha(s: &Scenario, workers: Option<usize>) -> Result<Report> {
    s.validate()?;
    let Kind::AlphaSweep(net, sweep) = s.kind()? else {
        return Err(Error::Config(format!(
            "scenario `{}` has no [alpha_sweep] table",
            s.name
        )));
    };
    let rs = s.rate_spec()?;
    let protocols = s.protocols();
    let cfg = s.mc_config(workers);
    let total = db_to_linear(sweep.total_power_db);
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    let mut dominance_violations = 0;
    for (point, &alpha) in sweep.alphas.iter().enumerate() {
        let power = PowerSpec::from_alpha(total, alpha, sweep.noise_variance)?
            .with_direct_link(sweep.direct_link);
        let run = estimate_coupled(net, &power, &rs, &protocols, &cfg, point as u64)?;
        dominance_violations += run.dominance_violations;
        for (p, est) in protocols.iter().zip(&run.estimates) {
            if let Some(w) = low_failure_warning(&s.name, &format!("alpha {alpha}"), *p, est) {
                warnings.push(w);
            }
            rows.push(SweepRow {
                alpha,
                scheme: p.scheme.name().to_string(),
                combiner: p.combiner.name().to_string(),
                outage_mc: est.probability,
                mc_ci_low: est.ci_low,
                mc_ci_high: est.ci_high,
                trials: est.trials,
                failures: est.failures,
            });
        }
    }
    Ok(Report {
        name: s.name.clone(),
        table: Table::Sweep(rows),
        warnings,
        dominance_violations,
    })
}

/// Least-squares high-SNR slope of an outage curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiversityFit {
    /// Negated slope of `log10(outage)` against `log10(SNR)`.
    pub fitted_slope: f64,
    pub theoretical_d: Option<f64>,
    pub snr_window_db: (f64, f64),
    /// Root-mean-square residual of the fit, in decades of outage.
    pub residual: f64,
    pub points: usize,
}

impl DiversityFit {
    pub fn with_theoretical(mut self, d: f64) -> Self {
        self.theoretical_d = Some(d);
        self
    }
}

/// Fits `log10 P = c - d log10 SNR` to the points of `curve` (dB, outage)
/// lying inside `window_db`.
pub fn fit_diversity(curve: &[(f64, f64)], window_db: (f64, f64)) -> Result<DiversityFit> {
    let (lo, hi) = window_db;
    let inside: Vec<(f64, f64)> = curve
        .iter()
        .copied()
        .filter(|&(db, _)| db >= lo && db <= hi)
        .collect();
    if inside.len() < 3 {
        return Err(Error::InsufficientPoints {
            lo,
            hi,
            found: inside.len(),
        });
    }
    if let Some(&(snr_db, _)) = inside.iter().find(|&&(_, p)| !(p > 0.0)) {
        return Err(Error::ZeroOutage { snr_db });
    }
    let pts: Vec<(f64, f64)> = inside.iter().map(|&(db, p)| (db / 10.0, p.log10())).collect();
    let n = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let sse: f64 = pts
        .iter()
        .map(|&(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(DiversityFit {
        fitted_slope: -slope,
        theoretical_d: None,
        snr_window_db: window_db,
        residual: (sse / n).sqrt(),
        points: inside.len(),
    })
}

/// Exact SC outage of `scheme` at every grid point.
pub fn analytic_curve(
    scheme: Scheme,
    net: &NetworkSpec,
    rs: &RateSpec,
    snr_grid_db: &[f64],
) -> Result<Vec<(f64, f64)>> {
    snr_grid_db
        .iter()
        .map(|&db| {
            let power = PowerSpec::equal(db_to_linear(db))?;
            Ok((db, analytic_outage(scheme, net, &power, rs)?))
        })
        .collect()
}

fn window_grid(window_db: (f64, f64), step_db: f64) -> Vec<f64> {
    let n = ((window_db.1 - window_db.0) / step_db).round() as usize;
    (0..=n).map(|i| window_db.0 + i as f64 * step_db).collect()
}

/// Fitted diversity of every SC scheme in a curve scenario, over the
/// scenario grid points inside `window_db`. Surface scenarios produce their
/// surface table instead.
pub fn fit_scenario(s: &Scenario, window_db: (f64, f64)) -> Result<Report> {
    s.validate()?;
    let rs = s.rate_spec()?;
    let table = match s.kind()? {
        Kind::Curve(net, grid) => {
            if s.combiners.contains(&Combiner::Mrc) {
                return Err(Error::Config(
                    "diversity fits use the closed-form SC outage; MRC has none".into(),
                ));
            }
            let rows = s
                .protocols()
                .into_iter()
                .map(|p| {
                    let curve = analytic_curve(p.scheme, net, &rs, &grid.snr_db)?;
                    let fit = fit_diversity(&curve, window_db)?;
                    Ok(FitRow {
                        scheme: p.scheme.name().to_string(),
                        combiner: p.combiner.name().to_string(),
                        theoretical_d: theoretical_diversity(p.scheme, net, &rs)?,
                        fitted_slope: fit.fitted_slope,
                        residual: fit.residual,
                        window_lo_db: window_db.0,
                        window_hi_db: window_db.1,
                        points: fit.points,
                    })
                })
                .collect::<Result<_>>()?;
            Table::Fit(rows)
        }
        Kind::Surface(surface) => Table::Surface(diversity_surface(surface, &rs)?),
        Kind::AlphaSweep(..) => {
            return Err(Error::Config(
                "alpha sweeps have no SNR axis to fit a diversity order on".into(),
            ))
        }
    };
    Ok(Report {
        name: s.name.clone(),
        table,
        warnings: vec![],
        dominance_violations: 0,
    })
}

/// Fitted DF-AF diversity for every `(g1, g2)` pair of symmetric relays.
pub fn diversity_surface(surface: &DiversitySurface, rs: &RateSpec) -> Result<Vec<SurfaceRow>> {
    let window = (surface.window_db[0], surface.window_db[1]);
    let grid = window_grid(window, surface.snr_step_db);
    let mut rows = Vec::with_capacity(surface.shapes.len().pow(2));
    for &g1 in &surface.shapes {
        for &g2 in &surface.shapes {
            let net = NetworkSpec::from_shapes(
                surface.m0,
                &vec![g1; surface.relays],
                &vec![g2; surface.relays],
            )?;
            let curve = analytic_curve(Scheme::DfAf, &net, rs, &grid)?;
            let fit = fit_diversity(&curve, window)?;
            rows.push(SurfaceRow {
                m0: surface.m0,
                g1,
                g2,
                theoretical_d: coding_gain_dfaf(&net, rs)?.diversity_order,
                fitted_slope: fit.fitted_slope,
                residual: fit.residual,
                window_lo_db: window.0,
                window_hi_db: window.1,
            });
        }
    }
    Ok(rows)
}
