use super::report::{Cell, Report, Series};
use super::scenario::{Pipeline, Scenario};
use crate::disk::DiskPoint;
use crate::error::{Error, Result};
use crate::operators::{strong_continuity_curve, volterra_symbol_class, witness_construct, Verdict, WitnessGrids};
use crate::quadrature::fit_loglog_slope;
use crate::semigroup::{bloch_condition_profile, flow};
use crate::spaces::{mads_norm_with, NormForm, NormOptions};
use serde_json::json;

const OK: &str = "ok";

fn status(e: &Error) -> Cell {
    Cell::Text(format!("error: {e}"))
}

fn verdict(v: Verdict) -> &'static str {
    match v {
        Verdict::Consistent => "consistent",
        Verdict::Inconsistent => "inconsistent",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn opt(x: Option<f64>) -> Cell {
    Cell::Num(x.unwrap_or(f64::NAN))
}

fn norm_options(sc: &Scenario) -> NormOptions {
    NormOptions {
        tol: sc.tol,
        radii: sc.radii(),
        angles: sc.angles,
        refine: true,
    }
}

fn columns(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Runs the scenario's pipeline; numeric failures land in the `status`
/// column of the affected rows.
pub fn execute(sc: &Scenario) -> Result<Report> {
    let mut report = Report {
        scenario: sc.clone(),
        columns: Vec::new(),
        rows: Vec::new(),
        summary: json!({}),
        profile: None,
        curve: None,
    };
    match sc.pipeline {
        Pipeline::Norm => norm(sc, &mut report)?,
        Pipeline::Flow => flow_rows(sc, &mut report)?,
        Pipeline::Continuity => continuity(sc, &mut report)?,
        Pipeline::BlochCheck => bloch(sc, &mut report)?,
        Pipeline::SymbolClass => symbol_class(sc, &mut report)?,
        Pipeline::Witness => witness(sc, &mut report)?,
    }
    Ok(report)
}

fn params(sc: &Scenario) -> Result<crate::spaces::SpaceParams> {
    sc.params.ok_or_else(|| Error::Config {
        field: "params".into(),
        message: "required by this pipeline".into(),
    })
}

/// Columns: function, form, value, f0_term, global_sup, tail_slope, status.
fn norm(sc: &Scenario, rep: &mut Report) -> Result<()> {
    rep.columns = columns(&["function", "form", "value", "f0_term", "global_sup", "tail_slope", "status"]);
    let params = params(sc)?;
    let forms = if sc.forms.is_empty() { vec![NormForm::Kernel] } else { sc.forms.clone() };
    let opts = norm_options(sc);
    for (label, f) in sc.resolve_functions()? {
        for &form in &forms {
            let form_name = serde_json::to_value(form)?.as_str().unwrap_or_default().to_string();
            match mads_norm_with(&f, params, form, None, &opts) {
                Ok(est) => {
                    if rep.profile.is_none() {
                        rep.profile = Some(Series {
                            quantity: format!("per-radius sup of the {form_name} functional of {label}"),
                            x_label: "r".into(),
                            y_label: "sup".into(),
                            points: est.profile.radii.iter().copied().zip(est.profile.values.iter().copied()).collect(),
                        });
                    }
                    rep.rows.push(vec![
                        label.clone().into(),
                        form_name.into(),
                        est.value.into(),
                        est.f0_term.into(),
                        est.profile.global_sup.into(),
                        opt(est.profile.tail_slope()),
                        OK.into(),
                    ]);
                }
                Err(e) => rep.rows.push(vec![
                    label.clone().into(),
                    form_name.into(),
                    f64::NAN.into(),
                    f64::NAN.into(),
                    f64::NAN.into(),
                    f64::NAN.into(),
                    status(&e),
                ]),
            }
        }
    }
    Ok(())
}

/// Columns: z_re, z_im, t, value_re, value_im, steps, local_error, status.
fn flow_rows(sc: &Scenario, rep: &mut Report) -> Result<()> {
    rep.columns = columns(&["z_re", "z_im", "t", "value_re", "value_im", "steps", "local_error", "status"]);
    let spec = sc.generator_spec()?;
    for z in &sc.points {
        let p = DiskPoint::new(z[0], z[1])?;
        for &t in &sc.t_grid {
            let mut row: Vec<Cell> = vec![z[0].into(), z[1].into(), t.into()];
            match flow(&spec, p, t, sc.tol) {
                Ok(r) => row.extend([r.value.re.into(), r.value.im.into(), r.steps.into(), r.local_error.into(), OK.into()]),
                Err(e) => row.extend([f64::NAN.into(), f64::NAN.into(), Cell::Int(0), f64::NAN.into(), status(&e)]),
            }
            rep.rows.push(row);
        }
    }
    Ok(())
}

/// Columns: function, t, norm, status. Rows ascend in `t`.
fn continuity(sc: &Scenario, rep: &mut Report) -> Result<()> {
    rep.columns = columns(&["function", "t", "norm", "status"]);
    let params = params(sc)?;
    let spec = sc.generator_spec()?;
    let opts = norm_options(sc);
    let mut ts = sc.t_grid.clone();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let mut slopes = serde_json::Map::new();
    for (label, f) in sc.resolve_functions()? {
        let mut pts = Vec::new();
        for &t in &ts {
            match strong_continuity_curve(&spec, &f, params, &[t], &opts) {
                Ok(c) => {
                    let v = c.points[0].1;
                    pts.push((t, v));
                    rep.rows.push(vec![label.clone().into(), t.into(), v.into(), OK.into()]);
                }
                Err(e) => rep.rows.push(vec![label.clone().into(), t.into(), f64::NAN.into(), status(&e)]),
            }
        }
        let positive: Vec<(f64, f64)> = pts.iter().copied().filter(|p| p.0 > 0.0).collect();
        slopes.insert(label.clone(), json!(fit_loglog_slope(&positive)));
        if rep.curve.is_none() {
            rep.curve = Some(Series {
                quantity: format!("||f o phi_t - f|| for {label} under {}", spec.name),
                x_label: "t".into(),
                y_label: "norm".into(),
                points: pts,
            });
        }
    }
    rep.summary = json!({ "slope_convention": "d log norm / d log(1/t)", "slopes": slopes });
    Ok(())
}

/// Columns: r, value, argmax_angle, status.
fn bloch(sc: &Scenario, rep: &mut Report) -> Result<()> {
    rep.columns = columns(&["r", "value", "argmax_angle", "status"]);
    let spec = sc.generator_spec()?;
    let radii = sc.radii();
    match bloch_condition_profile(&spec, sc.log_weighted, &radii) {
        Ok(r) => {
            for i in 0..r.profile.radii.len() {
                rep.rows.push(vec![
                    r.profile.radii[i].into(),
                    r.profile.values[i].into(),
                    r.profile.argmax_angles[i].into(),
                    OK.into(),
                ]);
            }
            rep.profile = Some(Series {
                quantity: format!(
                    "sup (1-|z|^2){}/|G(z)| on |z| = r for {}",
                    if sc.log_weighted { " log(1/(1-|z|^2))" } else { "" },
                    spec.name
                ),
                x_label: "r".into(),
                y_label: "sup".into(),
                points: r.profile.radii.iter().copied().zip(r.profile.values.iter().copied()).collect(),
            });
            rep.summary = json!({
                "log_weighted": sc.log_weighted,
                "slope": r.slope,
                "verdict": r.verdict,
                "holds": r.holds(),
                "excluded_ball": r.excluded_ball,
            });
        }
        Err(_) => {
            for &x in &radii {
                match bloch_condition_profile(&spec, sc.log_weighted, &[x]) {
                    Ok(r) => rep
                        .rows
                        .push(vec![x.into(), r.profile.values[0].into(), r.profile.argmax_angles[0].into(), OK.into()]),
                    Err(e) => rep.rows.push(vec![x.into(), f64::NAN.into(), f64::NAN.into(), status(&e)]),
                }
            }
            rep.summary = json!({ "log_weighted": sc.log_weighted, "verdict": "failed" });
        }
    }
    Ok(())
}

/// Columns: function, bounded, compact, slope, f_log_norm, f_norm, m0_norm, note, status.
fn symbol_class(sc: &Scenario, rep: &mut Report) -> Result<()> {
    rep.columns = columns(&["function", "bounded", "compact", "slope", "f_log_norm", "f_norm", "m0_norm", "note", "status"]);
    let params = params(sc)?;
    let opts = NormOptions {
        refine: false,
        ..norm_options(sc)
    };
    for (label, g) in sc.resolve_functions()? {
        match volterra_symbol_class(&g, params, sc.univalent_hint, &opts) {
            Ok(r) => {
                let ev = &r.evidence;
                if rep.profile.is_none() {
                    if let Some(p) = &ev.profile {
                        rep.profile = Some(Series {
                            quantity: format!("little-o profile of the symbol {label}"),
                            x_label: "r".into(),
                            y_label: "sup".into(),
                            points: p.radii.iter().copied().zip(p.values.iter().copied()).collect(),
                        });
                    }
                }
                rep.rows.push(vec![
                    label.clone().into(),
                    verdict(r.bounded).into(),
                    verdict(r.compact).into(),
                    opt(ev.slope),
                    opt(ev.f_log_norm),
                    opt(ev.f_norm),
                    opt(ev.m0_norm),
                    ev.note.clone().into(),
                    OK.into(),
                ]);
            }
            Err(e) => {
                let mut row: Vec<Cell> = vec![label.clone().into(), "".into(), "".into()];
                row.extend(std::iter::repeat_n(Cell::Num(f64::NAN), 4));
                row.extend(["".into(), status(&e)]);
                rep.rows.push(row);
            }
        }
    }
    Ok(())
}

const WITNESS_COLUMNS: [&str; 18] = [
    "function",
    "n",
    "delta",
    "delta_prime",
    "w_re",
    "w_im",
    "arc_center",
    "arc_length",
    "coefficient",
    "m_n",
    "box_lower",
    "grid_slack",
    "partial_norm",
    "margin_1",
    "margin_2",
    "margin_3",
    "margin_4",
    "status",
];

/// One row per round (round 0 is the base case `F_0 ≡ 1`); a failed search
/// adds a row with the tightest margins.
fn witness(sc: &Scenario, rep: &mut Report) -> Result<()> {
    rep.columns = columns(&WITNESS_COLUMNS);
    let params = params(sc)?;
    let grids = WitnessGrids {
        tol: sc.tol,
        ..sc.witness.clone().unwrap_or_default()
    };
    let mut summary = serde_json::Map::new();
    for (label, g) in sc.resolve_functions()? {
        match witness_construct(&g, params, sc.n_max, &grids) {
            Ok(st) => {
                let nan = Cell::Num(f64::NAN);
                let mut row0: Vec<Cell> = vec![label.clone().into(), Cell::Int(0), st.thresholds[0].into(), nan.clone(), 1.0.into(), 0.0.into()];
                row0.extend([
                    st.arcs[0].center_angle.into(),
                    st.arcs[0].length.into(),
                    1.0.into(),
                    nan.clone(),
                    nan.clone(),
                    nan.clone(),
                ]);
                row0.extend([st.partial_norms[0].into(), nan.clone(), nan.clone(), nan.clone(), nan, OK.into()]);
                rep.rows.push(row0);
                for r in &st.rounds {
                    let mut row: Vec<Cell> = vec![
                        label.clone().into(),
                        r.n.into(),
                        r.delta.into(),
                        r.delta_prime.into(),
                        r.w.re.into(),
                        r.w.im.into(),
                    ];
                    row.extend([
                        r.arc.center_angle.into(),
                        r.arc.length.into(),
                        r.coefficient.into(),
                        r.m_n.into(),
                        r.box_lower.into(),
                    ]);
                    row.extend([r.grid_slack.into(), r.partial_norm.into()]);
                    row.extend(r.margins.iter().map(|m| Cell::Num(m.1)));
                    row.push(OK.into());
                    rep.rows.push(row);
                }
                summary.insert(label.clone(), serde_json::to_value(&st)?);
            }
            Err(e) => {
                let round = match &e {
                    Error::SearchExhausted { round, .. } => *round,
                    _ => 0,
                };
                let mut row: Vec<Cell> = vec![label.clone().into(), round.into()];
                row.extend(std::iter::repeat_n(Cell::Num(f64::NAN), 15));
                row.push(status(&e));
                rep.rows.push(row);
                let margins = match &e {
                    Error::SearchExhausted { margins, .. } => json!(margins),
                    _ => json!(null),
                };
                summary.insert(label.clone(), json!({ "error": e.to_string(), "margins": margins }));
            }
        }
    }
    rep.summary = serde_json::Value::Object(summary);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(text: &str) -> Report {
        execute(&Scenario::from_toml(text, ".").unwrap()).unwrap()
    }

    fn num(rep: &Report, row: usize, col: &str) -> f64 {
        rep.rows[row][rep.column(col).unwrap()].as_f64().unwrap()
    }

    #[test]
    fn flow_row() {
        let rep = run("name = \"f\"\npipeline = \"flow\"\ngenerator = \"neg_z\"\npoints = [[0.5, 0.0]]\nt_grid = [1.0]\ntol = 1e-10\n");
        assert!((num(&rep, 0, "value_re") - 0.5 * (-1.0f64).exp()).abs() < 1e-9);
        assert!((num(&rep, 0, "value_re") - 0.18394).abs() < 1e-5);
    }

    #[test]
    fn bloch_row() {
        let rep = run("name = \"b\"\npipeline = \"bloch-check\"\ngenerator = \"parabolic\"\n");
        let i = rep.rows.iter().position(|r| r[0].as_f64() == Some(0.99)).unwrap();
        assert!((num(&rep, i, "value") - 199.0).abs() < 1e-6);
        assert_eq!(rep.summary["holds"], json!(false));
        assert_eq!(rep.profile.as_ref().unwrap().points.len(), rep.rows.len());
    }

    #[test]
    fn continuity_zero_time() {
        let rep = run(
            "name = \"c\"\npipeline = \"continuity\"\ngenerator = \"neg_z\"\nfunctions = [\"e_2\"]\nt_grid = [0.01, 0.0]\nparams = { p = 2.0, s = 1.0, alpha = 0.0 }\nangles = 16\ntol = 1e-5\n",
        );
        assert_eq!(num(&rep, 0, "t"), 0.0);
        assert_eq!(num(&rep, 0, "norm"), 0.0);
        assert!(num(&rep, 1, "norm") > 0.0);
    }

    #[test]
    fn generator_from_side_catalogue() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("g.toml"),
            "[[generator]]\nname = \"spin\"\nclosed_form = \"linear\"\nparameters = { lambda_re = 0.0, lambda_im = 1.0 }\n",
        )
        .unwrap();
        let sc = Scenario::from_toml(
            "name = \"f\"\npipeline = \"flow\"\ngenerator = \"spin\"\ncatalogue = \"g.toml\"\npoints = [[0.5, 0.0]]\nt_grid = [1.0]\ntol = 1e-10\n",
            dir.path(),
        )
        .unwrap();
        let rep = execute(&sc).unwrap();
        // φ_t(z) = e^{-it} z
        assert!((num(&rep, 0, "value_re") - 0.5 * 1f64.cos()).abs() < 1e-9);
        assert!((num(&rep, 0, "value_im") + 0.5 * 1f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn failures_become_status_rows() {
        let rep = run(
            "name = \"n\"\npipeline = \"norm\"\nfunctions = [\"e_1\"]\nparams = { p = 2.0, s = 1.0, alpha = 0.0 }\ntol = 1e-14\nangles = 4\nradii = [0.0]\n",
        );
        let st = rep.rows[0][rep.column("status").unwrap()].render();
        assert!(st.starts_with("error: ") && st.contains("quadrature did not reach tolerance"), "{st}");
        assert_eq!(rep.to_csv().unwrap().lines().count(), 2);
    }

    #[test]
    fn csv_is_deterministic() {
        let text = "name = \"b\"\npipeline = \"bloch-check\"\ngenerator = \"logistic\"\nlog_weighted = true\n";
        let a = run(text).to_csv().unwrap();
        let b = run(text).to_csv().unwrap();
        assert_eq!(a, b);
        assert!(a.lines().next().unwrap() == "r,value,argmax_angle,status");
    }
}
