//! Subcommand bodies. Each returns the text to write to the output.

use std::fmt::Write as _;

use parma_core::bench;
use parma_core::forecast::{predict, ForecastOrigin};
use parma_core::greens::SeasonTables;
use parma_core::model::{validate, ModelSpec, PeriodicModel};
use parma_core::moments::{
    check_convergence, default_probe_lag, MomentProfile, MomentsError, DEFAULT_MARGIN,
};
use parma_core::numfmt::sig12;
use parma_core::sim::{simulate, Innovation, SimPlan};
use parma_core::vsform::{build_vsform, par24_restriction, stationarity, xi_cross_check, Verdict};

use crate::error::CliError;
use crate::input::Series;

pub fn model_name(model: &PeriodicModel) -> String {
    let (p, q, l) = (model.ar_order(), model.ma_order(), model.period());
    if q == 0 {
        format!("PAR({p};{l})")
    } else {
        format!("PARMA({p},{q};{l})")
    }
}

fn verdict_label(v: Verdict) -> &'static str {
    match v {
        Verdict::Stationary => "STATIONARY",
        Verdict::NonStationary => "NONSTATIONARY",
        Verdict::Indeterminate => "INDETERMINATE",
    }
}

pub struct SimulateArgs {
    pub length: usize,
    pub seed: u64,
    pub replications: usize,
    pub burn_in: Option<usize>,
    pub innovation: Innovation,
    pub start: i64,
}

pub fn simulate_cmd(model: PeriodicModel, args: &SimulateArgs) -> Result<String, CliError> {
    let invalid = |e: parma_core::sim::SimError| CliError::Invalid(e.to_string());
    let mut plan = SimPlan::new(model.clone(), args.length, args.seed)
        .with_start(args.start)
        .with_replications(args.replications)
        .map_err(invalid)?
        .with_innovation(args.innovation.clone())
        .map_err(invalid)?;
    if let Some(b) = args.burn_in {
        plan = plan.with_burn_in(b).map_err(invalid)?;
    }
    let paths = simulate(&plan);
    if paths.len() == 1 {
        let mut buf = Vec::new();
        paths[0]
            .write_csv(&model, &mut buf)
            .expect("writing to memory");
        return Ok(String::from_utf8(buf).expect("ascii output"));
    }
    let clock = model.clock();
    let mut out = String::from("replication,time,season,y,epsilon\n");
    for (i, path) in paths.iter().enumerate() {
        for (j, t) in path.times().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{}",
                i,
                t,
                clock.season(t),
                sig12(path.y[j]),
                sig12(path.eps[j])
            )
            .unwrap();
        }
    }
    Ok(out)
}

/// Innovations implied by the series, taking ε = 0 before the first point
/// with a full set of AR predecessors.
pub fn reconstruct_innovations(model: &PeriodicModel, series: &Series) -> Vec<f64> {
    let (p, q) = (model.ar_order(), model.ma_order());
    let y = &series.values;
    let mut eps = vec![0.0; y.len()];
    for i in p..y.len() {
        let t = series.times[i];
        let mut e = y[i] - model.phi0(t);
        for m in 1..=p {
            e -= model.phi(m, t) * y[i - m];
        }
        for j in 1..=q.min(i) {
            e -= model.theta(j, t) * eps[i - j];
        }
        eps[i] = e;
    }
    eps
}

pub fn forecast_cmd(
    model: &PeriodicModel,
    series: &Series,
    horizon: usize,
    z: f64,
    notes: &mut Vec<String>,
) -> Result<String, CliError> {
    let (p, q) = (model.ar_order(), model.ma_order());
    let n = series.values.len();
    if n < p {
        return Err(CliError::Invalid(format!(
            "series has {n} values, the model needs at least p = {p}"
        )));
    }
    let origin_time = *series.times.last().unwrap();
    let y_tail: Vec<f64> = series.values.iter().rev().take(p).copied().collect();
    let eps_tail: Vec<f64> = if q == 0 {
        Vec::new()
    } else {
        let eps = match &series.eps {
            Some(e) => e.clone(),
            None => {
                if n < p + q {
                    return Err(CliError::Invalid(format!(
                        "series has {n} values; reconstructing innovations needs at least p + q = {}",
                        p + q
                    )));
                }
                notes.push(format!(
                    "no epsilon column: innovations reconstructed from the series with zero start-up values before time {}",
                    series.times[p]
                ));
                reconstruct_innovations(model, series)
            }
        };
        if eps.len() < q {
            return Err(CliError::Invalid(format!(
                "need at least q = {q} innovations"
            )));
        }
        eps.iter().rev().take(q).copied().collect()
    };
    let origin = ForecastOrigin::new(origin_time, y_tail, eps_tail);
    let report = predict(model, &origin, horizon).map_err(|e| CliError::Invalid(e.to_string()))?;
    let mut out = String::from("h,time,season,point,mse,lower,upper\n");
    for f in &report.horizons {
        let (lo, hi) = f.interval(z);
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            f.h,
            f.target_time,
            f.target_season,
            sig12(f.point),
            sig12(f.mse),
            sig12(lo),
            sig12(hi)
        )
        .unwrap();
    }
    Ok(out)
}

pub fn moments_cmd(
    model: &PeriodicModel,
    max_lag: usize,
    truncation: Option<usize>,
) -> Result<String, CliError> {
    let l = model.period();
    let diag = check_convergence(model, default_probe_lag(l), DEFAULT_MARGIN);
    let mut out = String::new();
    writeln!(
        out,
        "# convergence: rho_hat={} period_factor={} probe_lag={} tail={} {}",
        sig12(diag.rho_hat),
        sig12(diag.period_factor(l)),
        diag.probe_lag,
        sig12(diag.tail),
        if diag.passed { "PASS" } else { "FAIL" }
    )
    .unwrap();
    let profile = match MomentProfile::compute(model, max_lag, truncation, diag) {
        Ok(p) => p,
        Err(e @ MomentsError::NotConvergent { .. }) => {
            return Err(CliError::Invalid(format!("{}{e}", out)))
        }
        Err(e) => return Err(CliError::Invalid(e.to_string())),
    };
    let first = &profile.seasons[0];
    writeln!(
        out,
        "# truncation: R={} mean_tail_bound={} covariance_tail_bound={}",
        profile.truncation,
        sig12(first.mean_tail_bound),
        sig12(first.covariance_tail_bound)
    )
    .unwrap();
    out.push_str("season,mean,variance");
    for k in 1..=max_lag {
        write!(out, ",gamma_{k}").unwrap();
    }
    out.push('\n');
    for s in &profile.seasons {
        write!(out, "{},{},{}", s.season, sig12(s.mean), sig12(s.variance)).unwrap();
        for g in &s.autocovariance[1..] {
            write!(out, ",{}", sig12(*g)).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn stationarity_cmd(model: &PeriodicModel, tolerance: f64) -> String {
    let (p, l) = (model.ar_order(), model.period());
    let vs = build_vsform(model);
    let v = stationarity(&vs);
    let mut out = String::new();
    writeln!(out, "model: {}", model_name(model)).unwrap();
    writeln!(out, "vs_ar_order: {}", vs.ar_blocks()).unwrap();
    writeln!(out, "max_root_modulus: {}", sig12(v.max_root_modulus)).unwrap();
    writeln!(out, "verdict: {}", verdict_label(v.verdict)).unwrap();
    if p == 1 {
        let product: f64 = (1..=l).map(|s| model.ar_coef(1, s)).product();
        writeln!(out, "period_product: {}", sig12(product.abs())).unwrap();
    }
    if p <= l {
        let x = xi_cross_check(model, tolerance);
        writeln!(out, "xi_l: {}", sig12(x.xi_l)).unwrap();
        writeln!(out, "det_phi_l: {}", sig12(x.det_phi_l)).unwrap();
        writeln!(
            out,
            "xi_cross_check: {}",
            if x.consistent {
                "consistent"
            } else {
                "INCONSISTENT"
            }
        )
        .unwrap();
    }
    if let Ok(r) = par24_restriction(model) {
        writeln!(out, "par24_restriction: {}", sig12(r)).unwrap();
        writeln!(
            out,
            "par24_restriction_verdict: {}",
            if r < 1.0 {
                "STATIONARY"
            } else {
                "NONSTATIONARY"
            }
        )
        .unwrap();
    }
    out
}

pub fn greens_cmd(
    model: &PeriodicModel,
    horizon: usize,
    season: Option<usize>,
) -> Result<String, CliError> {
    let l = model.period();
    if let Some(s) = season {
        if !(1..=l).contains(&s) {
            return Err(CliError::Usage(format!("--season {s} outside 1..={l}")));
        }
    }
    let tables = SeasonTables::new(model, horizon);
    let mut out = String::from("season,lag,xi,xi_star\n");
    for table in tables.iter() {
        let s = table.anchor_season();
        if season.is_some_and(|want| want != s) {
            continue;
        }
        for (r, (x, xs)) in table
            .xi_values()
            .iter()
            .zip(table.xi_star_values())
            .enumerate()
        {
            writeln!(out, "{},{},{},{}", s, r, sig12(*x), sig12(*xs)).unwrap();
        }
    }
    Ok(out)
}

/// Deterministic PAR(4;365) used when no model is given.
pub fn bench_default_model() -> PeriodicModel {
    let l = 365;
    let ar = (1..=4)
        .map(|m| {
            (0..l)
                .map(|s| 0.2 * ((s * 7 + m * 13) as f64 * 0.37).sin() / m as f64)
                .collect()
        })
        .collect();
    PeriodicModel::par(ar).expect("built-in model is valid")
}

pub fn bench_cmd(model: &PeriodicModel, orders: &[usize], reps: usize) -> String {
    let rows = bench::run(model, orders, reps);
    let mut out = format!("# model: {}\n", model_name(model));
    out.push_str("order,recurrence_us,dense_lu_us,banded_lu_us,speedup\n");
    for r in rows {
        writeln!(
            out,
            "{},{:.3},{:.3},{:.3},{:.1}",
            r.order,
            r.recurrence.as_secs_f64() * 1e6,
            r.dense_lu.as_secs_f64() * 1e6,
            r.banded_lu.as_secs_f64() * 1e6,
            r.speedup()
        )
        .unwrap();
    }
    out
}

/// Lint report. Returns the text and whether the model passed validation.
pub fn validate_cmd(spec: ModelSpec) -> (String, bool) {
    let mut out = String::new();
    match validate(spec) {
        Err(e) => {
            writeln!(out, "status: INVALID").unwrap();
            for v in &e.violations {
                writeln!(out, "error: {v}").unwrap();
            }
            (out, false)
        }
        Ok(model) => {
            writeln!(out, "model: {}", model_name(&model)).unwrap();
            writeln!(out, "status: valid").unwrap();
            let v = stationarity(&build_vsform(&model));
            match v.verdict {
                Verdict::Stationary => {}
                Verdict::NonStationary => writeln!(
                    out,
                    "warning: not stationary (max root modulus {}); unconditional moments do not exist",
                    sig12(v.max_root_modulus)
                )
                .unwrap(),
                Verdict::Indeterminate => writeln!(
                    out,
                    "warning: max root modulus {} is within 0.02 of the unit circle",
                    sig12(v.max_root_modulus)
                )
                .unwrap(),
            }
            if model.ma_order() > 0 {
                // u_t = ε_t + Σ θ_j ε_{t-j} inverts iff ε_t = u_t − Σ θ_j ε_{t-j} is stable
                let l = model.period();
                let negated: Vec<Vec<f64>> = (1..=model.ma_order())
                    .map(|j| (1..=l).map(|s| -model.ma_coef(j, s)).collect())
                    .collect();
                let dual = PeriodicModel::new(vec![0.0; l], negated, Vec::new(), vec![1.0; l])
                    .expect("negated MA coefficients are finite");
                let inv = stationarity(&build_vsform(&dual));
                if inv.max_root_modulus >= 1.0 {
                    writeln!(
                        out,
                        "warning: MA part is not invertible (max root modulus {}); innovations reconstructed from data will not settle",
                        sig12(inv.max_root_modulus)
                    )
                    .unwrap();
                }
            }
            if model.is_constant() && model.period() > 1 {
                writeln!(out, "note: coefficients do not vary by season").unwrap();
            }
            (out, true)
        }
    }
}
