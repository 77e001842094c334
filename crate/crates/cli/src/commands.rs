use adiabatic_lab::dynamics::{evolve, required_time_scan};
use adiabatic_lab::meanfield::{self, default_critical_point, endpoint_s_readings};
use adiabatic_lab::model::ModelParams;
use adiabatic_lab::observables::{self, concurrence_curve};
use adiabatic_lab::oracle::{self, SolutionMask};
use adiabatic_lab::spectral::{self, DosKind, Endpoint, GapScalingFit, LineFit, Path};
use adiabatic_lab::{eigensolver, ALPHA_CRITICAL};
use clap::Args;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::grid::{parse_int_grid, parse_real_grid};
use crate::output::{json_real, real, render, write_json, write_output, Table};
use crate::{CliError, Common};

fn parse_alpha(text: &str) -> Result<f64, String> {
    let v = match text.trim() {
        "inf" | "infinity" => f64::INFINITY,
        t => t
            .parse::<f64>()
            .map_err(|_| format!("not a number: `{t}`"))?,
    };
    if v.is_nan() || v < 0.0 {
        return Err(format!("alpha must be >= 0, got {text}"));
    }
    Ok(v)
}

fn meta(command: &str, params: Value, tolerances: Value) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert("params".into(), params);
    m.insert("tolerances".into(), tolerances);
    m
}

fn finish(
    common: &Common,
    table: &Table,
    meta: &Map<String, Value>,
    summary: Option<Value>,
) -> Result<(), CliError> {
    let bytes = render(table, meta)?;
    write_output(common.out.as_deref(), &bytes)?;
    if let (Some(path), Some(value)) = (&common.summary, summary) {
        write_json(path, &value)?;
    }
    Ok(())
}

fn reals(values: &[f64]) -> Value {
    Value::Array(values.iter().map(|&x| json_real(x)).collect())
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_parser = parse_alpha)]
    pub alpha: f64,
    /// s grid
    #[arg(long, default_value = "0..1:201")]
    pub s: String,
    /// Number of lowest levels (default n + 1)
    #[arg(long)]
    pub levels: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

pub fn spectrum(a: &SpectrumArgs) -> Result<(), CliError> {
    let s_grid = parse_real_grid(&a.s)?;
    let levels = a.levels.unwrap_or(a.n + 1);
    if levels < 1 || levels > a.n + 1 {
        return Err(CliError::Validation(format!(
            "--levels must be in [1, {}]",
            a.n + 1
        )));
    }
    let curves = spectral::level_curves(a.n, a.alpha, &s_grid, levels)?;
    let mut table =
        Table::new(std::iter::once("s".to_string()).chain((0..levels).map(|i| format!("e_{i}"))));
    for (s, row) in s_grid.iter().zip(&curves) {
        table.push(
            std::iter::once(real(*s))
                .chain(row.iter().map(|&e| real(e)))
                .collect(),
        );
    }
    let m = meta(
        "spectrum",
        json!({"n": a.n, "alpha": json_real(a.alpha), "s": a.s, "levels": levels}),
        json!({"eigenvalues": "bisection to machine precision"}),
    );
    finish(
        &a.common,
        &table,
        &m,
        Some(json!({"n": a.n, "levels": levels, "points": s_grid.len()})),
    )
}

#[derive(Debug, Args)]
pub struct DosArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_parser = parse_alpha)]
    pub alpha: f64,
    /// Histogram bins over [0, 1]
    #[arg(long, default_value_t = 25)]
    pub bins: usize,
    /// omega grid for the analytic curves
    #[arg(long, default_value = "0.0025..0.9975:200")]
    pub omega: String,
    #[command(flatten)]
    pub common: Common,
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

pub fn dos(a: &DosArgs) -> Result<(), CliError> {
    let omega = parse_real_grid(&a.omega)?;
    let mut table = Table::new(["series", "omega", "density", "density_normalized"]);
    let push_curve = |table: &mut Table, label: &str, c: &spectral::DosCurve| {
        let mass = trapezoid(&c.omega, &c.density);
        for (w, d) in c.omega.iter().zip(&c.density) {
            table.push(vec![label.to_string(), real(*w), real(*d), real(d / mass)]);
        }
    };
    push_curve(
        &mut table,
        DosKind::AnalyticS0.label(),
        &spectral::dos_s0_analytic(a.n, &omega)?,
    );
    let finite = a.alpha.is_finite();
    if finite {
        push_curve(
            &mut table,
            DosKind::AnalyticS1Full.label(),
            &spectral::dos_s1_analytic(a.n, a.alpha, &omega)?,
        );
        push_curve(
            &mut table,
            DosKind::AnalyticS1Sector.label(),
            &spectral::dos_s1_sector(a.n, a.alpha, &omega)?,
        );
    }
    let width = 1.0 / a.bins as f64;
    for (label, endpoint) in [
        ("empirical_s0", Endpoint::Start),
        ("empirical_s1", Endpoint::End),
    ] {
        let h = spectral::dos_histogram(a.n, a.alpha, endpoint, a.bins)?;
        let total = h.total();
        for (c, w) in h.centers().iter().zip(&h.weights) {
            table.push(vec![
                label.to_string(),
                real(*c),
                real(w / width),
                real(w / total / width),
            ]);
        }
    }
    let mut summary = json!({"n": a.n, "alpha": json_real(a.alpha), "bins": a.bins});
    if finite {
        let binned = spectral::dos_analytic_binned(a.n, a.alpha, DosKind::AnalyticS1Full, a.bins)?;
        for (c, d) in binned.omega.iter().zip(&binned.density) {
            table.push(vec![
                "binned_s1_full".to_string(),
                real(*c),
                real(*d),
                real(*d),
            ]);
        }
        summary["shape_discrepancy_s1"] =
            json_real(spectral::dos_shape_discrepancy(a.n, a.alpha, a.bins)?);
    }
    let m = meta(
        "dos",
        json!({"n": a.n, "alpha": json_real(a.alpha), "bins": a.bins, "omega": a.omega}),
        json!({"bin_average_panels": 64}),
    );
    finish(&a.common, &table, &m, Some(summary))
}

#[derive(Debug, Args)]
pub struct PhaseDiagramArgs {
    /// alpha grid
    #[arg(long, default_value = "0..6:61")]
    pub alpha: String,
    /// s grid
    #[arg(long, default_value = "0..1:101")]
    pub s: String,
    #[command(flatten)]
    pub common: Common,
}

pub fn phase_diagram(a: &PhaseDiagramArgs) -> Result<(), CliError> {
    let alphas = parse_real_grid(&a.alpha)?;
    let ss = parse_real_grid(&a.s)?;
    let surface = meanfield::sx_surface(&alphas, &ss)?;
    let mut table = Table::new(["alpha", "s", "sx"]);
    for (j, alpha) in alphas.iter().enumerate() {
        for (i, s) in ss.iter().enumerate() {
            table.push(vec![real(*alpha), real(*s), real(surface.values[i][j])]);
        }
    }
    let m = meta(
        "phase-diagram",
        json!({"alpha": a.alpha, "s": a.s}),
        json!({
            "theta_grid": meanfield::DEFAULT_THETA_GRID,
            "refine": meanfield::DEFAULT_REFINE_TOLERANCE,
            "degeneracy": meanfield::DEGENERACY_TOLERANCE,
            "jump_threshold": meanfield::JUMP_THRESHOLD,
        }),
    );
    let summary = if a.common.summary.is_some() {
        let cp = default_critical_point()?;
        let transitions = alphas
            .par_iter()
            .map(|&alpha| {
                let t = meanfield::transition_line(alpha, meanfield::DEFAULT_S_RESOLUTION)?;
                Ok(json!({
                    "alpha": json_real(t.alpha),
                    "s_c": json_real(t.s_c),
                    "order": t.order.label(),
                    "sx_jump": json_real(t.sx_jump),
                }))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let readings: Map<String, Value> = endpoint_s_readings()
            .iter()
            .map(|(k, v)| (k.to_string(), json_real(*v)))
            .collect();
        Some(json!({
            "critical_point": {"alpha_c": json_real(cp.alpha_c), "s_c": json_real(cp.s_c)},
            "alpha_c_closed_form": json_real(ALPHA_CRITICAL),
            "endpoint_s_readings": readings,
            "transitions": transitions,
        }))
    } else {
        None
    };
    finish(&a.common, &table, &m, summary)
}

#[derive(Debug, Args)]
pub struct AnatomyArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_parser = parse_alpha)]
    pub alpha: f64,
    /// s grid
    #[arg(long, default_value = "0..1:201")]
    pub s: String,
    /// Levels included in the anti-crossing scan
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
    #[command(flatten)]
    pub common: Common,
}

pub fn anatomy(a: &AnatomyArgs) -> Result<(), CliError> {
    if a.n < 1 {
        return Err(CliError::Validation("--n must be at least 1".into()));
    }
    let ss = parse_real_grid(&a.s)?;
    let path = Path::new(a.n, a.alpha)?;
    let rows = ss
        .par_iter()
        .map(|&s| {
            let pair = eigensolver::ground_pair(&path.at(s)?)?;
            let r0 = observables::anatomy(pair.psi0.amplitudes())?;
            let r1 = observables::anatomy(pair.psi1.amplitudes())?;
            Ok([(s, 0, pair.e0, r0), (s, 1, pair.e1, r1)])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut header = vec![
        "s".to_string(),
        "state".into(),
        "energy".into(),
        "overlap_x".into(),
        "overlap_z".into(),
    ];
    header.extend((0..=a.n).map(|k| format!("w_{k}")));
    let mut table = Table::new(header);
    for (s, state, energy, r) in rows.into_iter().flatten() {
        let mut row = vec![
            real(s),
            state.to_string(),
            real(energy),
            real(r.overlap_x),
            real(r.overlap_z),
        ];
        row.extend(r.dicke_weights.iter().map(|&w| real(w)));
        table.push(row);
    }
    let m = meta(
        "anatomy",
        json!({"n": a.n, "alpha": json_real(a.alpha), "s": a.s, "levels": a.levels}),
        json!({"prominence": spectral::DEFAULT_PROMINENCE, "s_tolerance": spectral::DEFAULT_S_TOLERANCE}),
    );
    let summary = if a.common.summary.is_some() {
        let found = spectral::anticrossing_scan(a.n, a.alpha, a.levels, &ss)?;
        let cascade = spectral::cascade(&found).map(
            |c| json!({"s1": json_real(c.s1), "s_c": json_real(c.s_c), "s2": json_real(c.s2)}),
        );
        let g = spectral::min_gap(a.n, a.alpha, spectral::DEFAULT_S_TOLERANCE)?;
        Some(json!({
            "min_gap": {"s": json_real(g.s), "gap": json_real(g.gap)},
            "anticrossings": found.iter().map(|c| json!({
                "s": json_real(c.s), "lower_level": c.lower_level, "gap": json_real(c.gap)
            })).collect::<Vec<_>>(),
            "cascade": cascade,
        }))
    } else {
        None
    };
    finish(&a.common, &table, &m, summary)
}

#[derive(Debug, Args)]
pub struct ConcurrenceArgs {
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    /// alpha grid
    #[arg(long, default_value = "0..6:13")]
    pub alpha: String,
    /// s grid
    #[arg(long, default_value = "0..1:101")]
    pub s: String,
    /// Extrapolate over n = 500, 1000, 2000 instead of using --n
    #[arg(long)]
    pub thermodynamic: bool,
    #[command(flatten)]
    pub common: Common,
}

pub fn concurrence(a: &ConcurrenceArgs) -> Result<(), CliError> {
    let alphas = parse_real_grid(&a.alpha)?;
    let ss = parse_real_grid(&a.s)?;
    let columns = alphas
        .iter()
        .map(|&alpha| {
            if a.thermodynamic {
                ss.par_iter()
                    .map(|&s| observables::thermodynamic_concurrence(alpha, s))
                    .collect::<Result<Vec<_>, _>>()
            } else {
                concurrence_curve(a.n, alpha, &ss)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(["alpha", "s", "c_r"]);
    for (alpha, col) in alphas.iter().zip(&columns) {
        for (s, c) in ss.iter().zip(col) {
            table.push(vec![real(*alpha), real(*s), real(*c)]);
        }
    }
    let n_used = if a.thermodynamic {
        json!(observables::RICHARDSON_SIZES)
    } else {
        json!(a.n)
    };
    let m = meta(
        "concurrence",
        json!({"n": n_used, "alpha": a.alpha, "s": a.s, "thermodynamic": a.thermodynamic}),
        json!({"norm": observables::NORM_TOLERANCE}),
    );
    finish(
        &a.common,
        &table,
        &m,
        Some(json!({"rows": table.rows.len()})),
    )
}

#[derive(Debug, Args)]
pub struct GapScalingArgs {
    #[arg(long, value_parser = parse_alpha)]
    pub alpha: f64,
    /// n grid, at least 4 ascending values
    #[arg(long)]
    pub n: String,
    #[arg(long, default_value_t = spectral::DEFAULT_S_TOLERANCE)]
    pub s_tolerance: f64,
    #[command(flatten)]
    pub common: Common,
}

fn line_json(fit: &LineFit, slope_name: &str) -> Value {
    let mut m = Map::new();
    m.insert(slope_name.into(), json_real(fit.slope));
    m.insert("intercept".into(), json_real(fit.intercept));
    m.insert("residual".into(), json_real(fit.residual));
    Value::Object(m)
}

fn fit_json(fit: &GapScalingFit) -> Value {
    json!({
        "model": match fit.model {
            spectral::ScalingModel::Power => "power",
            spectral::ScalingModel::Exponential => "exponential",
        },
        "power": line_json(&fit.power, "nu"),
        "exponential": line_json(&fit.exponential, "c"),
        "n_range": [fit.n_range.0, fit.n_range.1],
    })
}

pub fn gap_scaling(a: &GapScalingArgs) -> Result<(), CliError> {
    let ns = parse_int_grid(&a.n)?;
    let fit = spectral::gap_scaling_with(a.alpha, &ns, a.s_tolerance)?;
    let mut table = Table::new(["n", "s_star", "gap_min"]);
    for (n, g) in &fit.points {
        table.push(vec![n.to_string(), real(g.s), real(g.gap)]);
    }
    let mut m = meta(
        "gap-scaling",
        json!({"alpha": json_real(a.alpha), "n": ns}),
        json!({"s_tolerance": a.s_tolerance, "coarse_points": spectral::DEFAULT_COARSE_POINTS}),
    );
    m.insert("fit".into(), fit_json(&fit));
    finish(&a.common, &table, &m, Some(fit_json(&fit)))
}

#[derive(Debug, Args)]
pub struct DynamicsArgs {
    /// Qubit count (a grid when --target is given)
    #[arg(long)]
    pub n: String,
    #[arg(long, value_parser = parse_alpha)]
    pub alpha: f64,
    /// Total-time grid
    #[arg(long = "t", default_value = "0..100:11")]
    pub t: String,
    /// Initial step count before doubling
    #[arg(long, default_value_t = 16)]
    pub steps: usize,
    /// Find the smallest T reaching this fidelity for each n
    #[arg(long)]
    pub target: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

pub fn dynamics(a: &DynamicsArgs) -> Result<(), CliError> {
    let ns = parse_int_grid(&a.n)?;
    let tolerances = json!({
        "fidelity_convergence": adiabatic_lab::dynamics::FIDELITY_CONVERGENCE,
        "max_steps": adiabatic_lab::dynamics::MAX_STEPS,
    });
    if let Some(target) = a.target {
        let times = required_time_scan(&ns, a.alpha, target)?;
        let mut table = Table::new(["n", "t_star", "inverse_gap_sq"]);
        for t in &times {
            table.push(vec![
                t.n.to_string(),
                real(t.t_star),
                real(t.inverse_gap_sq),
            ]);
        }
        let m = meta(
            "dynamics",
            json!({"n": ns, "alpha": json_real(a.alpha), "target": target}),
            tolerances,
        );
        return finish(&a.common, &table, &m, Some(json!({"rows": times.len()})));
    }
    let [n] = ns[..] else {
        return Err(CliError::Validation(
            "--n must be a single value without --target".into(),
        ));
    };
    let ts = parse_real_grid(&a.t)?;
    let runs = ts
        .par_iter()
        .map(|&t| evolve(n, a.alpha, t, a.steps))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(["t", "fidelity", "norm_drift", "steps"]);
    for r in &runs {
        table.push(vec![
            real(r.total_time),
            real(r.fidelity),
            real(r.norm_drift),
            r.steps.to_string(),
        ]);
    }
    let m = meta(
        "dynamics",
        json!({"n": n, "alpha": json_real(a.alpha), "t": a.t, "steps": a.steps}),
        tolerances,
    );
    let drift = runs.iter().map(|r| r.norm_drift).fold(0.0, f64::max);
    finish(
        &a.common,
        &table,
        &m,
        Some(json!({"max_norm_drift": drift})),
    )
}

#[derive(Debug, Args)]
pub struct OracleCheckArgs {
    #[arg(long, default_value_t = 8)]
    pub n_max: usize,
    /// alpha grid
    #[arg(long, default_value = "0,1,2.598076211353316,5,inf")]
    pub alpha: String,
    /// s grid
    #[arg(long, default_value = "0..1:5")]
    pub s: String,
    #[command(flatten)]
    pub common: Common,
}

const ORACLE_TOLERANCE: f64 = 1e-10;
const GAUGE_TOLERANCE: f64 = 1e-12;

pub fn oracle_check(a: &OracleCheckArgs) -> Result<(), CliError> {
    if a.n_max < 1 || a.n_max > oracle::MAX_QUBITS {
        return Err(CliError::Validation(format!(
            "--n-max must be in [1, {}]",
            oracle::MAX_QUBITS
        )));
    }
    let alphas = parse_real_grid(&a.alpha)?;
    let ss = parse_real_grid(&a.s)?;
    let points: Vec<(usize, f64, f64)> = (1..=a.n_max)
        .flat_map(|n| {
            let ss = &ss;
            alphas
                .iter()
                .flat_map(move |&al| ss.iter().map(move |&s| (n, al, s)))
        })
        .collect();
    let reports = points
        .par_iter()
        .map(|&(n, alpha, s)| {
            // alternating bit pattern, truncated to n qubits
            let mask = SolutionMask::from_bits(n, 0x2AAA & ((1 << n) - 1));
            oracle::verify_point(&ModelParams::new(n, alpha, s)?, Some(&mask))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut table = Table::new([
        "n",
        "alpha",
        "s",
        "block_deviation",
        "sector_deviation",
        "full_spectrum_deviation",
        "gauge_deviation",
        "pass",
    ]);
    let mut failures = 0;
    for n in 1..=a.n_max {
        let mut worst = [0.0f64; 4];
        let mut ok = true;
        for r in reports.iter().filter(|r| r.params.n() == n) {
            let gauge = r.gauge_deviation.unwrap_or(f64::INFINITY);
            let pass = r.block_deviation < ORACLE_TOLERANCE
                && r.sector_deviation < ORACLE_TOLERANCE
                && r.full_spectrum_deviation < ORACLE_TOLERANCE
                && gauge < GAUGE_TOLERANCE;
            ok &= pass;
            for (w, v) in worst.iter_mut().zip([
                r.block_deviation,
                r.sector_deviation,
                r.full_spectrum_deviation,
                gauge,
            ]) {
                *w = w.max(v);
            }
            table.push(vec![
                n.to_string(),
                real(r.params.alpha()),
                real(r.params.s()),
                real(r.block_deviation),
                real(r.sector_deviation),
                real(r.full_spectrum_deviation),
                real(gauge),
                pass.to_string(),
            ]);
        }
        if !ok {
            failures += 1;
        }
        println!(
            "{} n={n}: block {:.1e}, sector {:.1e}, full spectrum {:.1e}, gauge {:.1e}",
            if ok { "PASS" } else { "FAIL" },
            worst[0],
            worst[1],
            worst[2],
            worst[3]
        );
    }
    println!(
        "oracle-check: {} of {} qubit counts passed",
        a.n_max - failures,
        a.n_max
    );
    if a.common.out.is_some() {
        let m = meta(
            "oracle-check",
            json!({"n_max": a.n_max, "alpha": a.alpha, "s": a.s}),
            json!({"sector": ORACLE_TOLERANCE, "gauge": GAUGE_TOLERANCE}),
        );
        finish(&a.common, &table, &m, None)?;
    }
    if let Some(path) = &a.common.summary {
        write_json(
            path,
            &json!({"n_max": a.n_max, "failed": failures, "alphas": reals(&alphas)}),
        )?;
    }
    if failures > 0 {
        return Err(CliError::Numerical(format!(
            "{failures} qubit counts failed the oracle comparison"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_values() {
        assert_eq!(parse_alpha("2.5"), Ok(2.5));
        assert_eq!(parse_alpha("inf"), Ok(f64::INFINITY));
        assert!(parse_alpha("-1").is_err());
        assert!(parse_alpha("nan").is_err());
    }
}
