//! Experiment assembly shared by the command-line runner and the Python bindings:
//! parameter grids, one row type per CSV schema, and gnuplot script generation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analytic::{mean_power, mu_tilde, power_outage_bound};
use crate::error::{Error, Result};
use crate::feasibility::{simulate_min_pb_density, trace_boundary, Noise, RegionConfig, Storage};
use crate::montecarlo::{
    estimate_mean_raw_power, estimate_outage, estimate_power_outage, sustainable_power, OutageStatistic, TrialPlan,
};
use crate::propagation::{DeploymentParams, MptMode, SystemParams};

/// `10^(db / 10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// A list of parameter values, given explicitly or as an evenly spaced range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Range(GridRange),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRange {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    /// Space the points evenly in `log` rather than linearly.
    #[serde(default)]
    pub log: bool,
}

impl Grid {
    pub fn linear(start: f64, stop: f64, points: usize) -> Self {
        Grid::Range(GridRange {
            start,
            stop,
            points,
            log: false,
        })
    }

    pub fn log(start: f64, stop: f64, points: usize) -> Self {
        Grid::Range(GridRange {
            start,
            stop,
            points,
            log: true,
        })
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        let v = match self {
            Grid::Values(v) => v.clone(),
            Grid::Range(r) => {
                if r.points == 0 || !r.start.is_finite() || !r.stop.is_finite() {
                    return Err(Error::invalid("grid range needs finite ends and at least one point"));
                }
                if r.log && !(r.start > 0.0 && r.stop > 0.0) {
                    return Err(Error::invalid("a log grid needs positive ends"));
                }
                let (a, b) = if r.log {
                    (r.start.ln(), r.stop.ln())
                } else {
                    (r.start, r.stop)
                };
                let last = r.points - 1;
                (0..r.points)
                    .map(|i| {
                        // The ends come out exactly as written.
                        if i == 0 {
                            return r.start;
                        }
                        if i == last {
                            return r.stop;
                        }
                        let x = a + (b - a) * (i as f64 / last as f64);
                        if r.log {
                            x.exp()
                        } else {
                            x
                        }
                    })
                    .collect()
            }
        };
        if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("grid values must be finite and non-empty"));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fig3Row {
    pub mu: f64,
    pub epsilon: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fig4Row {
    pub lambda_b: f64,
    pub min_p_noise: f64,
    pub min_p_intlim: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fig5Row {
    pub lambda_p: f64,
    pub p_iso_large: f64,
    pub p_dir_large: f64,
    pub p_iso_small: f64,
    pub p_dir_small: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fig6Row {
    pub lambda_b: f64,
    pub min_lambda_p_sim: f64,
    pub min_lambda_p_bound: f64,
    pub mode: MptMode,
    pub storage: Storage,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageRow {
    pub lambda_b: f64,
    pub p: f64,
    pub q: f64,
    pub lambda_p: f64,
    pub p_out: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MptPowerRow {
    pub lambda_p: f64,
    pub mode: MptMode,
    pub analytic: f64,
    pub simulated: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerOutageRow {
    pub lambda_p: f64,
    pub mode: MptMode,
    pub threshold: f64,
    pub p_out: f64,
    pub stderr: f64,
    /// Nearest-beacon bound, absent where it does not apply.
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityRow {
    pub lambda_b: f64,
    pub min_co_param: f64,
    pub infeasible: bool,
    pub simulated: Option<f64>,
}

/// `epsilon(mu) = Pr(S + mu > 0)` on a grid of thresholds.
pub fn fig3_rows(stat: &OutageStatistic, mu_grid: &[f64]) -> Vec<Fig3Row> {
    mu_grid
        .iter()
        .map(|&mu| {
            let e = stat.epsilon_at(mu);
            Fig3Row {
                mu,
                epsilon: e.value,
                stderr: e.stderr,
            }
        })
        .collect()
}

/// Minimal mobile power with noise (threshold `mu`) and interference-limited (`mu_tilde`).
pub fn fig4_rows(system: &SystemParams, mu: f64, lambda_b_grid: &[f64]) -> Result<Vec<Fig4Row>> {
    let mt = mu_tilde(system.p_b, system.eta, system.alpha)?;
    let noise = trace_boundary(&RegionConfig::cellular(Noise::Nonzero), system, mu, lambda_b_grid, 1.0)?;
    let intlim = trace_boundary(
        &RegionConfig::cellular(Noise::InterferenceLimited),
        system,
        mt,
        lambda_b_grid,
        1.0,
    )?;
    Ok(lambda_b_grid
        .iter()
        .zip(noise.min_co_param.iter().zip(&intlim.min_co_param))
        .map(|(&lambda_b, (&a, &b))| Fig4Row {
            lambda_b,
            min_p_noise: a,
            min_p_intlim: b,
        })
        .collect())
}

/// Transmit power a mobile can sustain versus beacon density. Large storage uses the closed-form
/// mean power divided by the duty cycle, small storage the simulated `delta`-quantile of the
/// harvested power. Every density reuses the same trial streams.
pub fn fig5_rows(system: &SystemParams, q: f64, lambda_p_grid: &[f64], plan: &TrialPlan) -> Result<Vec<Fig5Row>> {
    let s = system;
    lambda_p_grid
        .iter()
        .map(|&lambda_p| {
            let large = |mode| -> Result<f64> {
                Ok(mean_power(mode, q, lambda_p, s.nu, s.beta, s.z_m, s.z_s)?.value / s.omega)
            };
            let d = DeploymentParams::new(0.0, q, 1.0, lambda_p);
            Ok(Fig5Row {
                lambda_p,
                p_iso_large: large(MptMode::Isotropic)?,
                p_dir_large: large(MptMode::Directed)?,
                p_iso_small: sustainable_power(s, &d, MptMode::Isotropic, s.delta, plan)?,
                p_dir_small: sustainable_power(s, &d, MptMode::Directed, s.delta, plan)?,
            })
        })
        .collect()
}

pub const FIG6_CASES: [(MptMode, Storage); 4] = [
    (MptMode::Isotropic, Storage::Large),
    (MptMode::Directed, Storage::Large),
    (MptMode::Isotropic, Storage::Small),
    (MptMode::Directed, Storage::Small),
];

/// Simulated and closed-form (inner-bound) minimal beacon densities for every MPT/storage case.
pub fn fig6_rows(
    system: &SystemParams,
    mu: f64,
    q: f64,
    lambda_b_grid: &[f64],
    plan: &TrialPlan,
) -> Result<Vec<Fig6Row>> {
    let mut rows = Vec::new();
    for (mode, storage) in FIG6_CASES {
        let config = RegionConfig::hybrid(Noise::Nonzero, mode, storage);
        let bound = trace_boundary(&config, system, mu, lambda_b_grid, q)?;
        for (&lambda_b, &b) in lambda_b_grid.iter().zip(&bound.min_co_param) {
            let sim = simulate_min_pb_density(lambda_b, q, system, mu, &config, plan)?;
            rows.push(Fig6Row {
                lambda_b,
                min_lambda_p_sim: sim.or_infinity(),
                min_lambda_p_bound: b,
                mode,
                storage,
            });
        }
    }
    Ok(rows)
}

pub fn outage_rows(
    system: &SystemParams,
    deployments: &[DeploymentParams],
    plan: &TrialPlan,
) -> Result<Vec<OutageRow>> {
    deployments
        .iter()
        .map(|d| {
            let e = estimate_outage(system, d, plan)?;
            Ok(OutageRow {
                lambda_b: d.lambda_b,
                p: d.p,
                q: d.q,
                lambda_p: d.lambda_p,
                p_out: e.value,
                stderr: e.stderr,
            })
        })
        .collect()
}

pub fn mpt_power_rows(
    system: &SystemParams,
    q: f64,
    lambda_p_grid: &[f64],
    plan: &TrialPlan,
) -> Result<Vec<MptPowerRow>> {
    let s = system;
    let mut rows = Vec::new();
    for &lambda_p in lambda_p_grid {
        for mode in [MptMode::Isotropic, MptMode::Directed] {
            let d = DeploymentParams::new(0.0, q, 1.0, lambda_p);
            let sim = estimate_mean_raw_power(s, &d, mode, plan)?;
            rows.push(MptPowerRow {
                lambda_p,
                mode,
                analytic: mean_power(mode, q, lambda_p, s.nu, s.beta, s.z_m, s.z_s)?.value,
                simulated: sim.value,
                stderr: sim.stderr,
            });
        }
    }
    Ok(rows)
}

pub fn power_outage_rows(
    system: &SystemParams,
    q: f64,
    threshold: f64,
    lambda_p_grid: &[f64],
    plan: &TrialPlan,
) -> Result<Vec<PowerOutageRow>> {
    let s = system;
    let mut rows = Vec::new();
    for &lambda_p in lambda_p_grid {
        for mode in [MptMode::Isotropic, MptMode::Directed] {
            let d = DeploymentParams::new(0.0, q, 1.0, lambda_p);
            let e = estimate_power_outage(s, &d, threshold, mode, plan)?;
            let bound = match power_outage_bound(threshold, q, lambda_p, s.beta, s.nu, mode, s.z_m) {
                Ok(b) => Some(b),
                Err(Error::BoundInapplicable(_)) => None,
                Err(e) => return Err(e),
            };
            rows.push(PowerOutageRow {
                lambda_p,
                mode,
                threshold,
                p_out: e.value,
                stderr: e.stderr,
                bound,
            });
        }
    }
    Ok(rows)
}

/// Closed-form boundary of one region, optionally with the simulated boundary alongside
/// (hybrid regions only).
pub fn feasibility_rows(
    config: &RegionConfig,
    system: &SystemParams,
    mu: f64,
    q: f64,
    lambda_b_grid: &[f64],
    simulate: Option<&TrialPlan>,
) -> Result<Vec<FeasibilityRow>> {
    let curve = trace_boundary(config, system, mu, lambda_b_grid, q)?;
    let mut rows = Vec::with_capacity(lambda_b_grid.len());
    for (i, &lambda_b) in lambda_b_grid.iter().enumerate() {
        let simulated = match (simulate, config.mpt) {
            (Some(plan), Some(_)) => {
                Some(simulate_min_pb_density(lambda_b, q, system, mu, config, plan)?.or_infinity())
            }
            _ => None,
        };
        rows.push(FeasibilityRow {
            lambda_b,
            min_co_param: curve.min_co_param[i],
            infeasible: curve.infeasible_mask[i],
            simulated,
        });
    }
    Ok(rows)
}

/// Renders rows as CSV with a header taken from the row's field names.
pub fn to_csv<R: Serialize>(rows: &[R]) -> std::result::Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| csv::Error::from(e.into_error()))
}

/// CSV layouts that have a plot script.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Outage,
}

impl PlotKind {
    pub fn header(self) -> &'static str {
        match self {
            PlotKind::Fig3 => "mu,epsilon,stderr",
            PlotKind::Fig4 => "lambda_b,min_p_noise,min_p_intlim",
            PlotKind::Fig5 => "lambda_p,p_iso_large,p_dir_large,p_iso_small,p_dir_small",
            PlotKind::Fig6 => "lambda_b,min_lambda_p_sim,min_lambda_p_bound,mode,storage",
            PlotKind::Outage => "lambda_b,p,q,lambda_p,p_out,stderr",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PlotKind::Fig3 => "fig3",
            PlotKind::Fig4 => "fig4",
            PlotKind::Fig5 => "fig5",
            PlotKind::Fig6 => "fig6",
            PlotKind::Outage => "outage",
        }
    }
}

/// A gnuplot script for `csv_path`, after checking that the file has the expected header.
pub fn plot_script(kind: PlotKind, csv_path: &Path) -> Result<String> {
    let text = std::fs::read_to_string(csv_path)
        .map_err(|e| Error::invalid(format!("cannot read {}: {e}", csv_path.display())))?;
    let header = text.lines().next().unwrap_or("").trim_end();
    if header != kind.header() {
        return Err(Error::invalid(format!(
            "{} has header '{header}', expected '{}'",
            csv_path.display(),
            kind.header()
        )));
    }
    let csv = csv_path.display().to_string().replace('\'', "''");
    let out = csv_path.with_extension("png").display().to_string().replace('\'', "''");
    let mut s = String::new();
    s.push_str("# gnuplot script\nset datafile separator ','\nset key autotitle columnhead\n");
    s.push_str("set terminal pngcairo size 900,600\n");
    s.push_str(&format!("set output '{out}'\nset grid\n"));
    let body = match kind {
        PlotKind::Fig3 => "set xlabel 'mu'\nset ylabel 'epsilon'\nset yrange [0:1]\n\
             plot 'CSV' using 1:2:(1.96*$3) with yerrorlines title 'epsilon(mu)'\n"
            .to_string(),
        PlotKind::Fig4 => "set logscale xy\nset xlabel 'lambda_b'\nset ylabel 'minimum p'\n\
             plot 'CSV' using 1:2 with lines title 'nonzero noise', \\\n     \
             'CSV' using 1:3 with lines dashtype 2 title 'interference limited'\n"
            .to_string(),
        PlotKind::Fig5 => "set logscale x\nset xlabel 'lambda_p'\nset ylabel 'p (dB)'\n\
             plot 'CSV' using 1:(10*log10($2)) with lines title 'isotropic, large storage', \\\n     \
             'CSV' using 1:(10*log10($3)) with lines title 'directed, large storage', \\\n     \
             'CSV' using 1:(10*log10($4)) with linespoints title 'isotropic, small storage', \\\n     \
             'CSV' using 1:(10*log10($5)) with linespoints title 'directed, small storage'\n"
            .to_string(),
        PlotKind::Fig6 => {
            let mut b = String::from("set logscale xy\nset xlabel 'lambda_b'\nset ylabel 'minimum lambda_p'\nplot ");
            let cases: Vec<String> = FIG6_CASES
                .iter()
                .map(|(m, st)| {
                    let sel = format!(
                        "(strcol(4) eq '{}' && strcol(5) eq '{}' ? $COL : 1/0)",
                        m.as_str(),
                        st.as_str()
                    );
                    format!(
                        "'CSV' using 1:{} with lines title '{m} {st}', \\\n     \
                         'CSV' using 1:{} with lines dashtype 2 title '{m} {st} bound'",
                        sel.replace("COL", "2"),
                        sel.replace("COL", "3"),
                        m = m.as_str(),
                        st = st.as_str()
                    )
                })
                .collect();
            b.push_str(&cases.join(", \\\n     "));
            b.push('\n');
            b
        }
        PlotKind::Outage => "set xlabel 'lambda_b'\nset ylabel 'outage probability'\nset yrange [0:1]\n\
             plot 'CSV' using 1:5:(1.96*$6) with yerrorbars title 'P_out'\n"
            .to_string(),
    };
    s.push_str(&body.replace("CSV", &csv));
    Ok(s)
}

/// The threshold used by experiments that need one: the configured value, or a fresh
/// estimate at the target outage `system.epsilon`.
pub fn resolve_mu(system: &SystemParams, fixed: Option<f64>, plan: &TrialPlan) -> Result<f64> {
    match fixed {
        Some(mu) if mu > 0.0 && mu.is_finite() => Ok(mu),
        Some(mu) => Err(Error::invalid(format!("mu must be positive, got {mu}"))),
        None => Ok(crate::montecarlo::estimate_mu(system, system.epsilon, plan)?.mu),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(Grid::linear(0.0, 1.0, 3).values().unwrap(), vec![0.0, 0.5, 1.0]);
        let g = Grid::log(0.01, 10.0, 4).values().unwrap();
        assert_eq!(g[0], 0.01);
        assert_eq!(g[3], 10.0);
        assert!((g[1] - 0.1).abs() < 1e-15 && (g[2] - 1.0).abs() < 1e-14);
        assert!(Grid::log(0.0, 1.0, 3).values().is_err());
        let parsed: Grid = serde_json::from_str(r#"{"start": 1, "stop": 2, "points": 2}"#).unwrap();
        assert_eq!(parsed.values().unwrap(), vec![1.0, 2.0]);
        let parsed: Grid = serde_json::from_str("[3, 4]").unwrap();
        assert_eq!(parsed.values().unwrap(), vec![3.0, 4.0]);
    }

    #[test]
    fn decibels() {
        assert_eq!(db_to_linear(10.0), 10.0);
        assert!((db_to_linear(17.0) - 50.118_723_362_727_23).abs() < 1e-9);
    }

    #[test]
    fn csv_headers_match_schemas() {
        let header = |bytes: Vec<u8>| String::from_utf8(bytes).unwrap().lines().next().unwrap().to_string();
        assert_eq!(
            header(
                to_csv(&[Fig3Row {
                    mu: 0.0,
                    epsilon: 0.1,
                    stderr: 0.0
                }])
                .unwrap()
            ),
            PlotKind::Fig3.header()
        );
        let r4 = Fig4Row {
            lambda_b: 1.0,
            min_p_noise: 1.0,
            min_p_intlim: 1.0,
        };
        assert_eq!(header(to_csv(&[r4]).unwrap()), PlotKind::Fig4.header());
        let r5 = Fig5Row {
            lambda_p: 1.0,
            p_iso_large: 1.0,
            p_dir_large: 1.0,
            p_iso_small: 1.0,
            p_dir_small: 1.0,
        };
        assert_eq!(header(to_csv(&[r5]).unwrap()), PlotKind::Fig5.header());
        let r6 = Fig6Row {
            lambda_b: 1.0,
            min_lambda_p_sim: f64::INFINITY,
            min_lambda_p_bound: 1.0,
            mode: MptMode::Directed,
            storage: Storage::Small,
        };
        let text = String::from_utf8(to_csv(&[r6]).unwrap()).unwrap();
        assert_eq!(text.lines().next().unwrap(), PlotKind::Fig6.header());
        assert_eq!(text.lines().nth(1).unwrap(), "1.0,inf,1.0,directed,small");
        let ro = OutageRow {
            lambda_b: 1.0,
            p: 0.0,
            q: 1.0,
            lambda_p: 0.0,
            p_out: 1.0,
            stderr: 0.0,
        };
        assert_eq!(header(to_csv(&[ro]).unwrap()), PlotKind::Outage.header());
    }

    #[test]
    fn fig4_curves_are_parallel() {
        let s = SystemParams::default();
        let grid = Grid::log(0.01, 10.0, 7).values().unwrap();
        let rows = fig4_rows(&s, 3.8, &grid).unwrap();
        let ratio = rows[0].min_p_noise / rows[0].min_p_intlim;
        for r in &rows {
            assert!((r.min_p_noise / r.min_p_intlim / ratio - 1.0).abs() < 1e-12);
        }
    }
}
