//! Command dispatch.

use markovgeom::covariance::{finite_time_covariance, markov_covariance, qfi_rate, x_map};
use markovgeom::gaussian::symplectic_basis;
use markovgeom::geometry::{
    connection_form, e_map, find_gauge_equivalence, gauge_apply, horizontal_projection,
    lie_pushforward, projective_distance,
};
use markovgeom::lan::{lan_convergence, output_overlap_trace};
use markovgeom::lindblad::stationary_state;
use markovgeom::{
    CMatrix, DynamicalParams, ErgodicPoint, LocalChart, QfiConvention, TangentVector, C64,
};
use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::config::{build_gauge, build_model, build_tangents, from_cmatrix, Command, JobConfig};
use crate::error::CliError;
use crate::report::{Record, Report};

fn ergodic(d: DynamicalParams, field: &str) -> Result<ErgodicPoint, CliError> {
    ErgodicPoint::new(d).map_err(|e| CliError::core("lindblad", e, json!({ "field": field })))
}

fn lift<T>(module: &str, r: markovgeom::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::core(module, e, Value::Null))
}

fn cjson(z: C64) -> Value {
    json!([z.re, z.im])
}

fn rjson(m: &DMatrix<f64>) -> Value {
    json!((0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

fn tangent_json(t: &TangentVector) -> Value {
    json!({
        "dh": from_cmatrix(t.dh()),
        "dl": t.dl().iter().map(from_cmatrix).collect::<Vec<_>>(),
    })
}

fn push_matrix(records: &mut Vec<Record>, quantity: &str, m: &CMatrix) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            records.push(Record::entry(quantity, i, j, m[(i, j)].re, m[(i, j)].im));
        }
    }
}

fn push_real_matrix(records: &mut Vec<Record>, quantity: &str, m: &DMatrix<f64>) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            records.push(Record::entry(quantity, i, j, m[(i, j)], 0.0));
        }
    }
}

/// Slope of `−log err` against `log t`, least squares.
pub fn decay_exponent(ts: &[f64], errs: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .zip(errs)
        .filter(|(_, e)| **e > 0.0)
        .map(|(t, e)| (t.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(-sxy / sxx)
}

struct Ctx<'a> {
    job: &'a JobConfig,
    base: DynamicalParams,
}

impl Ctx<'_> {
    fn point(&self) -> Result<ErgodicPoint, CliError> {
        ergodic(self.base.clone(), "model")
    }

    fn tangents(&self) -> Result<Vec<(String, TangentVector)>, CliError> {
        let spec = self
            .job
            .tangents
            .as_ref()
            .ok_or_else(|| CliError::field("tangents", "tangents missing"))?;
        build_tangents(spec, &self.job.model, &self.base)
    }

    fn convention(&self) -> QfiConvention {
        self.job
            .options
            .convention
            .map(Into::into)
            .unwrap_or(QfiConvention::Metric)
    }

    fn tol(&self) -> f64 {
        self.job.options.tol.unwrap_or(crate::config::DEFAULT_TOL)
    }

    fn grid(&self) -> Vec<f64> {
        self.job.options.t_grid.clone().unwrap_or_default()
    }

    fn second(&self) -> Result<DynamicalParams, CliError> {
        match (&self.job.model2, &self.job.gauge) {
            (Some(m), _) => build_model(m, "model2"),
            (None, Some(g)) => {
                let g = build_gauge(g, self.base.dim())?;
                lift("geometry", gauge_apply(&g, &self.base))
            }
            (None, None) => Err(CliError::field("model2", "second model missing")),
        }
    }
}

/// Runs a validated job.
pub fn run(job: &JobConfig) -> Result<Report, CliError> {
    let ctx = Ctx {
        job,
        base: build_model(&job.model, "model")?,
    };
    let mut records = Vec::new();
    let result = match job.command {
        Command::Info => info(&ctx, &mut records)?,
        Command::Qfi => qfi(&ctx, &mut records)?,
        Command::Decompose => decompose(&ctx, &mut records)?,
        Command::Connection => connection(&ctx, &mut records)?,
        Command::Symplectic => symplectic(&ctx, &mut records)?,
        Command::LanCheck => lan_check(&ctx, &mut records)?,
        Command::EquivCheck => equiv_check(&ctx, &mut records)?,
        Command::CovConverge => cov_converge(&ctx, &mut records)?,
        Command::OutputOverlap => output_overlap(&ctx, &mut records)?,
    };
    Ok(Report {
        config: job.clone(),
        result,
        records,
    })
}

fn info(ctx: &Ctx, records: &mut Vec<Record>) -> Result<Value, CliError> {
    let rep = lift("lindblad", stationary_state(&ctx.base))?;
    records.push(Record::scalar("ergodic", if rep.ergodic { 1.0 } else { 0.0 }));
    records.push(Record::scalar("spectral_gap", rep.spectral_gap));
    let (rho, spectrum) = match &rep.stationary {
        Some(rho) => {
            push_matrix(records, "rho_ss", rho.matrix());
            let spec = rho.spectrum().0;
            for (i, v) in spec.iter().enumerate() {
                records.push(Record::entry("stationary_spectrum", i, 0, *v, 0.0));
            }
            (json!(from_cmatrix(rho.matrix())), json!(spec))
        }
        None => (Value::Null, Value::Null),
    };
    Ok(json!({
        "dim": ctx.base.dim(),
        "channels": ctx.base.channels(),
        "ergodic": rep.ergodic,
        "zero_eigen_count": rep.zero_eigen_count,
        "min_stationary_eigenvalue": rep.min_stationary_eigenvalue,
        "spectral_gap": rep.spectral_gap,
        "rho_ss": rho,
        "stationary_spectrum": spectrum,
    }))
}

fn qfi(ctx: &Ctx, records: &mut Vec<Record>) -> Result<Value, CliError> {
    let point = ctx.point()?;
    let (labels, ts): (Vec<String>, Vec<TangentVector>) = ctx.tangents()?.into_iter().unzip();
    let f = lift("covariance", qfi_rate(&point, &ts, ctx.convention()))?;
    push_real_matrix(records, "qfi", &f.matrix);
    Ok(json!({
        "convention": ctx.convention().as_str(),
        "labels": labels,
        "matrix": rjson(&f.matrix),
        "min_eigenvalue": f.min_eigenvalue(),
    }))
}

fn decompose(ctx: &Ctx, records: &mut Vec<Record>) -> Result<Value, CliError> {
    let point = ctx.point()?;
    let mut out = Vec::new();
    for (i, (label, t)) in ctx.tangents()?.iter().enumerate() {
        let h = lift("geometry", horizontal_projection(&point, t))?;
        let w = lift("geometry", connection_form(&point, t))?;
        let v = lift("geometry", lie_pushforward(point.params(), &w))?;
        let e_norm = lift("geometry", e_map(point.params(), t))?.norm();
        let identifiable = e_norm <= ctx.tol() * (1.0 + t.norm());
        records.push(Record::entry("norm", i, 0, t.norm(), 0.0));
        records.push(Record::entry("horizontal_norm", i, 0, h.norm(), 0.0));
        records.push(Record::entry("vertical_norm", i, 0, v.norm(), 0.0));
        records.push(Record::entry("e_norm", i, 0, e_norm, 0.0));
        out.push(json!({
            "label": label,
            "norm": t.norm(),
            "horizontal_norm": h.norm(),
            "vertical_norm": v.norm(),
            "e_norm": e_norm,
            "identifiable": identifiable,
            "horizontal": tangent_json(&h),
            "vertical": tangent_json(&v),
        }));
    }
    Ok(json!({ "tangents": out }))
}

fn connection(ctx: &Ctx, records: &mut Vec<Record>) -> Result<Value, CliError> {
    let point = ctx.point()?;
    let mut out = Vec::new();
    for (i, (label, t)) in ctx.tangents()?.iter().enumerate() {
        let w = lift("geometry", connection_form(&point, t))?;
        push_matrix(records, &format!("k[{i}]"), w.k());
        records.push(Record::entry("r", i, 0, w.r(), 0.0));
        let horizontal = w.k().norm() <= ctx.tol() && w.r().abs() <= ctx.tol();
        out.push(json!({
            "label": label,
            "k": from_cmatrix(w.k()),
            "r": w.r(),
            "horizontal": horizontal,
        }));
    }
    Ok(json!({ "components": out }))
}

fn symplectic(ctx: &Ctx, records: &mut Vec<Record>) -> Result<Value, CliError> {
    let point = ctx.point()?;
    let hs = ctx
        .tangents()?
        .iter()
        .map(|(_, t)| lift("geometry", horizontal_projection(&point, t)))
        .collect::<Result<Vec<_>, _>>()?;
    let complete = ctx.job.options.complete_with_j.unwrap_or(false);
    let model = lift("gaussian", symplectic_basis(&point, &hs, ctx.convention(), complete))?;
    push_real_matrix(records, "f", &model.f);
    push_real_matrix(records, "sigma", &model.sigma);
    Ok(json!({
        "convention": ctx.convention().as_str(),
        "dim_id": model.dim_id(),
        "condition_number": model.condition_number,
        "f": rjson(&model.f),
        "sigma": rjson(&model.sigma),
        "basis": model.basis.iter().map(tangent_json).collect::<Vec<_>>(),
    }))
}

fn lan_check(ctx: &Ctx, records: &mut Vec<Record>) -> Result<Value, CliError> {
    let point = ctx.point()?;
    let gap = point.spectral_gap();
    let ts: Vec<TangentVector> = ctx.tangents()?.into_iter().map(|(_, t)| t).collect();
    let f = lift("covariance", qfi_rate(&point, &ts, ctx.convention()))?;
    let chart = lift("lan", LocalChart::linear_horizontal(point, &ts))?;
    let o = &ctx.job.options;
    let (u, u2) = (o.u.clone().unwrap_or_default(), o.u2.clone().unwrap_or_default());
    let t_values: Vec<f64> = ctx.grid().iter().map(|m| m / gap).collect();
    let rep = lift("lan", lan_convergence(&chart, &u, &u2, &t_values, None))?;
    for (i, (t, z)) in rep.t_values.iter().zip(&rep.finite_overlaps).enumerate() {
        records.push(Record::series("finite_overlap", i, 0, *t, z.re, z.im));
        records.push(Record::series("error", i, 0, *t, rep.errors[i], 0.0));
    }
    records.push(Record::entry("limit_overlap", 0, 0, rep.limit_value.re, rep.limit_value.im));
    push_real_matrix(records, "phase_matrix", &rep.phase_matrix_used);
    Ok(json!({
        "convention": ctx.convention().as_str(),
        "spectral_gap": gap,
        "t_values": rep.t_values,
        "finite_overlaps": rep.finite_overlaps.iter().copied().map(cjson).collect::<Vec<_>>(),
        "errors": rep.errors,
        "limit_value": cjson(rep.limit_value),
        "max_abs_error": rep.max_abs_error,
        "decreasing": rep.errors.windows(2).all(|w| w[1] <= w[0]),
        "phase_matrix": rjson(&rep.phase_matrix_used),
        "phase_convention": rep.phase_convention,
        "fisher": rjson(&f.matrix),
    }))
}

fn equiv_check(ctx: &Ctx, records: &mut Vec<Record>) -> Result<Value, CliError> {
    let p1 = ctx.point()?;
    let p2 = ergodic(ctx.second()?, "model2")?;
    let wit = lift("geometry", find_gauge_equivalence(&p1, &p2))?;
    records.push(Record::scalar("found", if wit.found { 1.0 } else { 0.0 }));
    records.push(Record::scalar("eigen_real_part", wit.eigen_real_part));
    if let Some(w) = &wit.w {
        push_matrix(records, "w", w);
    }
    if let Some(r) = wit.r {
        records.push(Record::scalar("r", r));
    }
    let mut result = json!({
        "found": wit.found,
        "w": wit.w.as_ref().map(from_cmatrix),
        "r": wit.r,
        "eigen_real_part": wit.eigen_real_part,
        "tolerance": wit.tolerance,
    });
    if let (Some(g), Some(w), Some(r)) = (&ctx.job.gauge, &wit.w, wit.r) {
        if ctx.job.model2.is_none() {
            let g = build_gauge(g, ctx.base.dim())?;
            result["gauge_check"] = json!({
                "w_distance": projective_distance(w, g.w()),
                "r_plus_a": r + g.a(),
            });
        }
    }
    Ok(result)
}

fn cov_converge(ctx: &Ctx, records: &mut Vec<Record>) -> Result<Value, CliError> {
    let point = ctx.point()?;
    let gap = point.spectral_gap();
    let density = ctx
        .job
        .options
        .quad_density
        .unwrap_or(crate::config::DEFAULT_QUAD_DENSITY);
    let t_values: Vec<f64> = ctx.grid().iter().map(|m| m / gap).collect();
    let mut out = Vec::new();
    for (i, (label, t)) in ctx.tangents()?.iter().enumerate() {
        let x = lift("covariance", x_map(point.params(), t))?;
        let limit = lift("covariance", markov_covariance(&point, &x, &x))?;
        let mut values = Vec::new();
        let mut errors = Vec::new();
        for (j, &tv) in t_values.iter().enumerate() {
            let steps = ((tv * point.generator().norm() * density).ceil() as usize).max(400);
            let z = lift(
                "covariance",
                finite_time_covariance(&point, &x, &x, tv, steps, None),
            )?;
            records.push(Record::series(format!("finite[{i}]"), j, 0, tv, z.re, z.im));
            errors.push((z - limit).norm());
            values.push(cjson(z));
        }
        records.push(Record::entry(format!("limit[{i}]"), 0, 0, limit.re, limit.im));
        out.push(json!({
            "label": label,
            "limit": cjson(limit),
            "finite": values,
            "errors": errors,
            "decay_exponent": decay_exponent(&t_values, &errors),
        }));
    }
    Ok(json!({ "spectral_gap": gap, "t_values": t_values, "tangents": out }))
}

fn output_overlap(ctx: &Ctx, records: &mut Vec<Record>) -> Result<Value, CliError> {
    let p1 = ctx.point()?;
    let p2 = ergodic(ctx.second()?, "model2")?;
    let gap = p1.spectral_gap().min(p2.spectral_gap());
    let t_values: Vec<f64> = ctx.grid().iter().map(|m| m / gap).collect();
    let values = t_values
        .iter()
        .map(|&t| lift("lan", output_overlap_trace(&p1, &p2, t)))
        .collect::<Result<Vec<_>, _>>()?;
    for (i, (t, v)) in t_values.iter().zip(&values).enumerate() {
        records.push(Record::series("overlap_trace", i, 0, *t, *v, 0.0));
    }
    let purity = |p: &ErgodicPoint| -> f64 {
        p.report()
            .stationary
            .as_ref()
            .map(|r| r.spectrum().0.iter().map(|l| l * l).sum::<f64>().powi(2))
            .unwrap_or(f64::NAN)
    };
    Ok(json!({
        "spectral_gap": gap,
        "t_values": t_values,
        "values": values,
        "self_limit_model": purity(&p1),
        "self_limit_model2": purity(&p2),
    }))
}
