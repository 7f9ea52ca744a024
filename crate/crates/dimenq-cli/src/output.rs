//! Output conventions: result JSON on stdout, deterministic float formatting.

use dimenq::conic::{CertificateReport, SdpStatus};
use serde_json::{json, Value};

/// Shortest representation capped at 9 significant digits: round to 9
/// significant digits, then print the shortest round-trip form of the
/// rounded value.
pub fn format_value(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    let scale = 10f64.powi(8 - mag);
    let rounded = (x * scale).round() / scale;
    format!("{rounded}")
}

pub fn status_str(s: SdpStatus) -> &'static str {
    match s {
        SdpStatus::Optimal => "optimal",
        SdpStatus::Infeasible => "infeasible",
        SdpStatus::Unbounded => "unbounded",
        SdpStatus::MaxIterations => "max_iterations",
    }
}

/// Summary of an op's re-checked certificate for the result JSON.
pub fn certificate_summary(report: &CertificateReport) -> Value {
    let worst = report.feasibility_residuals.iter().map(|(_, r)| *r).fold(f64::INFINITY, f64::min);
    json!({
        "verdict": if report.verdict { "pass" } else { "fail" },
        "gap": report.gap,
        "min_constraint_residual": if worst.is_finite() { Value::from(worst) } else { Value::Null },
    })
}

/// The single machine-readable result object each subcommand prints.
pub fn emit_result(value: f64, status: &str, certificate_summary: Value, runtime_ms: u128, extra: Value) {
    let mut obj = json!({
        "value": value,
        "status": status,
        "certificate_summary": certificate_summary,
        "runtime_ms": runtime_ms as u64,
    });
    if let (Value::Object(base), Value::Object(ext)) = (&mut obj, extra) {
        for (k, v) in ext {
            base.insert(k, v);
        }
    }
    println!("{}", serde_json::to_string(&obj).expect("result serializes"));
}
