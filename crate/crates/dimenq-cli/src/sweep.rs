//! Parameter sweeps: independent solves over a grid, executed on a worker
//! pool, emitted as CSV ordered by parameter index.

use crate::device::{evaluate_target, DeviceSpec, Target};
use crate::output::format_value;
use dimenq::conic::SolveOptions;
use dimenq::error::{Error, Result};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

pub struct SweepSpec {
    pub target: Target,
    pub device: DeviceSpec,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

pub struct SweepRow {
    pub param: f64,
    pub value: f64,
    pub status: String,
}

/// Worker pool size: DIMENQ_THREADS if set, else available parallelism.
fn pool_size(points: usize) -> usize {
    let configured = std::env::var("DIMENQ_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1);
    let default = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    configured.unwrap_or(default).min(points).max(1)
}

/// Run every sweep point independently (no warm starts, so parallel order
/// cannot change results); rows come back ordered by parameter index.
pub fn run_sweep(spec: &SweepSpec, opts: &SolveOptions) -> Result<Vec<SweepRow>> {
    if spec.steps < 2 {
        return Err(Error::InvalidValue("sweep needs steps >= 2".into()));
    }
    if !(spec.start < spec.stop) {
        return Err(Error::InvalidValue("sweep needs start < stop".into()));
    }
    let params: Vec<f64> = (0..spec.steps)
        .map(|i| spec.start + (spec.stop - spec.start) * i as f64 / (spec.steps - 1) as f64)
        .collect();

    let results: Mutex<Vec<Option<Result<SweepRow>>>> =
        Mutex::new((0..spec.steps).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = pool_size(spec.steps);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::SeqCst);
                if idx >= params.len() {
                    break;
                }
                let param = params[idx];
                let row = evaluate_target(&spec.target, &spec.device, param, opts).map(
                    |(value, status)| SweepRow { param, value, status },
                );
                results.lock().unwrap()[idx] = Some(row);
            });
        }
    });

    let rows = results.into_inner().unwrap();
    let mut out = Vec::with_capacity(spec.steps);
    for row in rows {
        out.push(row.expect("worker filled every slot")?);
    }
    check_monotonicity(spec, &out)?;
    Ok(out)
}

/// Known monotone sweeps are verified post-hoc: the depolarizing channel
/// measure never increases with noise, and the noisy-MUB measurement measure
/// never increases as visibility drops.
fn check_monotonicity(spec: &SweepSpec, rows: &[SweepRow]) -> Result<()> {
    const TOL: f64 = 1e-6;
    let violation = |msg: String| Err(Error::Solver(msg));
    match (&spec.target, &spec.device) {
        (Target::ChannelDim, DeviceSpec::Family(dimenq::channels::ChannelFamily::Depolarizing)) => {
            for w in rows.windows(2) {
                if w[1].value > w[0].value + TOL {
                    return violation(format!(
                        "monotonicity violated: channel-dim rose from {} to {} between p = {} and {}",
                        w[0].value, w[1].value, w[0].param, w[1].param
                    ));
                }
            }
        }
        (Target::MeasDim, DeviceSpec::MubPair(_)) => {
            // Parameter is the visibility p; noise is 1 - p.
            for w in rows.windows(2) {
                if w[1].value < w[0].value - TOL {
                    return violation(format!(
                        "monotonicity violated: meas-dim fell from {} to {} between p = {} and {}",
                        w[0].value, w[1].value, w[0].param, w[1].param
                    ));
                }
            }
        }
        _ => {}
    }
    Ok(())
}

/// CSV with header `param,value,status`, '.' decimal, ',' separator, LF line
/// endings, and 9-significant-digit values.
pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("param,value,status\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", format_value(r.param), format_value(r.value), r.status));
    }
    out
}
