//! Text and JSON renderings of core reports.

use finsler_core::classify::{BerwaldVerdict, ClassificationReport, PointOutcome, PointReport, Verdict, Witness};
use finsler_core::decomp::{DecompOutcome, DecompPointReport, FDiagnostic};
use finsler_core::Rational;
use serde_json::{json, Value};

pub const SCHEMA_VERSION: u32 = 1;

pub fn point_strings(p: &[Rational]) -> Vec<String> {
    p.iter().map(ToString::to_string).collect()
}

pub fn point_text(p: &[Rational]) -> String {
    format!("({})", point_strings(p).join(", "))
}

fn indices_text(idx: &[usize]) -> String {
    idx.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn witness_json(w: &Witness, dump: bool) -> Value {
    let mut v = json!({ "indices": w.indices, "leading_term": w.leading_term });
    if dump {
        v["residual"] = json!(w.residual);
    }
    v
}

fn witness_text(label: &str, w: &Witness, dump: bool) -> String {
    let mut s = format!("    {label} witness: index ({}), leading term {}", indices_text(&w.indices), w.leading_term);
    if dump {
        s.push_str(&format!("\n      residual: {}", w.residual));
    }
    s
}

fn berwald_json(b: &BerwaldVerdict, dump: bool) -> Value {
    json!({
        "holds": b.holds,
        "spray_polynomial": b.spray_polynomial,
        "coefficients_y_independent": b.coefficients_y_independent,
        "spray": b.spray,
        "witness": b.witness.as_ref().map(|w| witness_json(w, dump)),
    })
}

fn verdict_json(v: &Verdict, dump: bool) -> Value {
    json!({ "holds": v.holds, "witness": v.witness.as_ref().map(|w| witness_json(w, dump)) })
}

fn mode_text(mode: impl std::fmt::Display, fell_back: bool) -> String {
    if fell_back {
        format!("{mode}, fallback from exact")
    } else {
        mode.to_string()
    }
}

fn point_report_json(r: &PointReport, dump: bool) -> Value {
    json!({
        "point": point_strings(&r.point),
        "status": "classified",
        "mode": r.mode.to_string(),
        "fell_back": r.fell_back,
        "riemannian": r.riemannian,
        "berwald": berwald_json(&r.berwald, dump),
        "landsberg": verdict_json(&r.landsberg, dump),
        "landsberg_implies_berwald_mechanism": r.mechanism_verified,
    })
}

pub fn classification_json(kind: &str, report: &ClassificationReport, dump: bool) -> Value {
    let points: Vec<Value> = report
        .points
        .iter()
        .map(|p| match p {
            PointOutcome::Classified(r) => point_report_json(r, dump),
            PointOutcome::Degenerate { point, reason } => {
                json!({ "point": point_strings(point), "status": "degenerate", "reason": reason })
            }
        })
        .collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": "classify",
        "metric": { "kind": kind, "dimension": report.dimension, "degree": report.degree },
        "requested_mode": report.requested_mode.to_string(),
        "points": points,
        "summary": {
            "riemannian": report.riemannian(),
            "berwald": report.berwald(),
            "landsberg": report.landsberg(),
        },
    })
}

fn opt_bool(v: Option<bool>) -> String {
    v.map_or_else(|| "n/a".into(), |b| b.to_string())
}

pub fn classification_text(kind: &str, report: &ClassificationReport, dump: bool) -> String {
    let mut out = vec![format!("metric: {kind}, n = {}, m = {}", report.dimension, report.degree)];
    for p in &report.points {
        match p {
            PointOutcome::Classified(r) => {
                out.push(format!(
                    "point {} [{}]: riemannian = {}, berwald = {}, landsberg = {}",
                    point_text(&r.point),
                    mode_text(r.mode, r.fell_back),
                    r.riemannian,
                    r.berwald.holds,
                    r.landsberg.holds
                ));
                if let Some(spray) = &r.berwald.spray {
                    for (i, g) in spray.iter().enumerate() {
                        out.push(format!("    G^{} = {g}", i + 1));
                    }
                }
                if let Some(w) = &r.berwald.witness {
                    out.push(witness_text("berwald", w, dump));
                }
                if let Some(w) = &r.landsberg.witness {
                    out.push(witness_text("landsberg", w, dump));
                }
            }
            PointOutcome::Degenerate { point, reason } => out.push(format!("point {}: degenerate: {reason}", point_text(point))),
        }
    }
    out.push(format!(
        "summary: riemannian = {}, berwald = {}, landsberg = {}",
        opt_bool(report.riemannian()),
        opt_bool(report.berwald()),
        opt_bool(report.landsberg())
    ));
    out.join("\n")
}

fn f_json(f: &FDiagnostic) -> Value {
    match f {
        FDiagnostic::NoFactorization => json!({ "factorization": false }),
        FDiagnostic::Factorization { f, f_is_zero, term2_holds, br_holds, term1_coeff2_holds, term1_coeff3_holds } => json!({
            "factorization": true,
            "f": f,
            "f_is_zero": f_is_zero,
            "term2_holds": term2_holds,
            "br_holds": br_holds,
            "term1_coeff2_holds": term1_coeff2_holds,
            "term1_coeff3_holds": term1_coeff3_holds,
        }),
    }
}

fn f_text(f: &FDiagnostic) -> String {
    match f {
        FDiagnostic::NoFactorization => "no factorization".into(),
        FDiagnostic::Factorization { f, term2_holds, br_holds, term1_coeff2_holds, term1_coeff3_holds, .. } => format!(
            "f = {f}; nabla_0 b + a f = 0: {term2_holds}; b^j r_j(b) = 2 b f: {br_holds}; \
             b^i nabla_i b_r = c b_r f: {term1_coeff2_holds} (c = 2), {term1_coeff3_holds} (c = 3)"
        ),
    }
}

fn decomp_point_json(r: &DecompPointReport, dump: bool) -> Value {
    let i = &r.identities;
    json!({
        "point": point_strings(&r.point),
        "status": "checked",
        "mode": r.mode.to_string(),
        "fell_back": r.fell_back,
        "p1_berwald": r.p1_berwald,
        "p2_parallel": r.p2_parallel,
        "b_vanishes": r.b_vanishes,
        "spray_paths_agree": r.spray_paths_agree,
        "delta": r.delta,
        "nabla_b": r.nabla_b,
        "f_diagnostic": f_json(&r.f_diagnostic),
        "identities": {
            "inverse_identity": i.inverse_identity,
            "closed_form_inverse": i.closed_form_inverse,
            "det_divisible_by_delta": i.det_divisible_by_delta,
            "y_r_b": i.y_r_b,
            "b_nabla_b": i.b_nabla_b,
            "t_inv_b": i.t_inv_b,
            "t_inv_a": i.t_inv_a,
            "r_b_closed": i.r_b_closed,
            "r_t_closed": i.r_t_closed,
            "metric_compatible": i.metric_compatible,
        },
        "witness": r.witness.as_ref().map(|w| witness_json(w, dump)),
    })
}

pub fn decomp_json(outcomes: &[DecompOutcome], dump: bool) -> Value {
    let points: Vec<Value> = outcomes
        .iter()
        .map(|o| match o {
            DecompOutcome::Checked(r) => decomp_point_json(r, dump),
            DecompOutcome::Degenerate { point, reason } => {
                json!({ "point": point_strings(point), "status": "degenerate", "reason": reason })
            }
        })
        .collect();
    json!({ "schema_version": SCHEMA_VERSION, "command": "verify-decomp", "points": points })
}

pub fn decomp_text(outcomes: &[DecompOutcome], dump: bool) -> String {
    let mut out = Vec::new();
    for o in outcomes {
        match o {
            DecompOutcome::Checked(r) => {
                out.push(format!(
                    "point {} [{}]: P1 (Berwald) = {}, P2 (nabla b = 0) = {}, equivalent = {}",
                    point_text(&r.point),
                    mode_text(r.mode, r.fell_back),
                    r.p1_berwald,
                    r.p2_parallel,
                    r.p1_berwald == r.p2_parallel
                ));
                out.push(format!("    Delta = {}", r.delta));
                let rows: Vec<String> = r.nabla_b.iter().map(|row| format!("[{}]", row.join(", "))).collect();
                out.push(format!("    nabla_i b_j = [{}]", rows.join(", ")));
                out.push(format!(
                    "    B^i: {}; spray paths agree = {}",
                    match r.b_vanishes {
                        Some(true) => "identically zero",
                        Some(false) => "NONZERO",
                        None => "nonzero (b not parallel)",
                    },
                    r.spray_paths_agree
                ));
                out.push(format!("    identities: {}", if r.identities.all() { "all hold" } else { "FAILED" }));
                out.push(format!("    f-diagnostic: {}", f_text(&r.f_diagnostic)));
                if let Some(w) = &r.witness {
                    out.push(witness_text("non-polynomial spray", w, dump));
                }
            }
            DecompOutcome::Degenerate { point, reason } => out.push(format!("point {}: degenerate: {reason}", point_text(point))),
        }
    }
    out.join("\n")
}
