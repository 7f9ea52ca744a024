//! Command-line surface for the average-dimensionality measures: load device
//! descriptions, compute measures, run parameter sweeps, emit CSV.

mod device;
mod output;
mod sweep;

use clap::{Args, Parser, Subcommand};
use device::{DeviceSpec, Target};
use dimenq::channels::{self, ChannelFamily};
use dimenq::conic::SolveOptions;
use dimenq::error::{Error, Result};
use dimenq::linalg::max_entangled;
use dimenq::measurements;
use dimenq::states::{self, DensityMatrix};
use dimenq::steering;
use output::{certificate_summary, emit_result, status_str};
use serde_json::{json, Value};
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "dimenq", about = "Average-dimensionality measures for quantum devices", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Args)]
struct SolverFlags {
    /// Relative duality-gap tolerance passed to the conic solver.
    #[arg(long, global = true, default_value_t = 1e-7)]
    gap_tol: f64,
    /// Feasibility tolerance passed to the conic solver.
    #[arg(long, global = true, default_value_t = 1e-8)]
    feas_tol: f64,
    /// Iteration cap for the conic solver.
    #[arg(long, global = true, default_value_t = 200)]
    max_iter: usize,
    /// Write a plain-text listing of each solved program to this file.
    #[arg(long, global = true)]
    dump_sdp: Option<PathBuf>,
}

impl SolverFlags {
    fn opts(&self) -> SolveOptions {
        SolveOptions {
            gap_tol: self.gap_tol,
            feas_tol: self.feas_tol,
            max_iter: self.max_iter,
            dump: self.dump_sdp.clone(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Dimension measure of a channel (bits).
    ChannelDim {
        #[arg(long, conflicts_with = "file")]
        family: Option<ChannelFamilyArg>,
        #[arg(long, requires = "family")]
        param: Option<f64>,
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Schmidt measure of a 2x2 or 2x3 bipartite state (bits).
    StateSchmidt {
        /// Werner-family parameter lambda.
        #[arg(long, conflicts_with = "file")]
        werner: Option<f64>,
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Dimension measure of a measurement set: exact for qubits, alpha log2 d
    /// upper bound otherwise.
    MeasDim {
        #[command(flatten)]
        source: MeasSource,
    },
    /// Incompatibility weight of a measurement set.
    MeasWeight {
        #[command(flatten)]
        source: MeasSource,
    },
    /// Joint-measurability verdict and white-noise robustness.
    JmCheck {
        #[command(flatten)]
        source: MeasSource,
    },
    /// Schmidt measure of a qubit assemblage (steering weight).
    SteerSchmidt {
        #[arg(long, conflicts_with = "file")]
        bell_xz: Option<f64>,
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// log2(d) upper bound on the assemblage Schmidt measure.
    SteerBound {
        #[arg(long, conflicts_with = "file")]
        gap_example: Option<usize>,
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Pretty-good measurements of an assemblage.
    Pgm {
        #[arg(long)]
        file: PathBuf,
        /// Write the POVM JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Twirl a POVM set under the MUB symmetry group of its dimension.
    Twirl {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parameter sweep; writes CSV `param,value,status`.
    Sweep {
        #[arg(long)]
        target: String,
        #[arg(long)]
        family: Option<ChannelFamilyArg>,
        #[arg(long)]
        mub_pair: Option<usize>,
        #[arg(long, default_value_t = false)]
        werner: bool,
        #[arg(long, default_value_t = false)]
        bell_xz: bool,
        /// JSON template file with a `${param}` placeholder.
        #[arg(long)]
        template: Option<PathBuf>,
        #[arg(long)]
        start: f64,
        #[arg(long)]
        stop: f64,
        #[arg(long)]
        steps: usize,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Construct the assemblage family whose log d bound is arbitrarily loose,
    /// together with its certified qubit decomposition.
    GapExample {
        #[arg(long)]
        d: usize,
        /// Write the assemblage JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank-k pseudo-measurement construction for the noisy MUB pair.
    MubHeuristic {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: usize,
        /// Comma-separated outcome subset for the X basis (searched when omitted).
        #[arg(long)]
        o1: Option<String>,
        /// Comma-separated outcome subset for the Z basis.
        #[arg(long)]
        o2: Option<String>,
    },
    /// Check every type invariant of a device file.
    Validate {
        #[arg(long)]
        file: PathBuf,
    },
}

#[derive(Args)]
struct MeasSource {
    /// Noisy MUB pair in this prime dimension (requires --p).
    #[arg(long, conflicts_with = "file")]
    mub_pair: Option<usize>,
    /// Visibility of the MUB pair.
    #[arg(long, requires = "mub_pair")]
    p: Option<f64>,
    #[arg(long)]
    file: Option<PathBuf>,
}

impl MeasSource {
    fn load(&self) -> Result<measurements::PovmSet> {
        match (self.mub_pair, &self.file) {
            (Some(d), None) => {
                let p = self.p.ok_or_else(|| Error::InvalidValue("--mub-pair requires --p".into()))?;
                measurements::mub_pair(d, p)
            }
            (None, Some(path)) => dimenq::io::povm_from_json(&read_json(path)?),
            _ => Err(Error::InvalidValue("provide exactly one of --mub-pair/--file".into())),
        }
    }
}

#[derive(Clone, Copy)]
struct ChannelFamilyArg(ChannelFamily);

impl std::str::FromStr for ChannelFamilyArg {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(Self(s.parse()?))
    }
}

fn read_json(path: &PathBuf) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn write_text(path: &PathBuf, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Solver(_) | Error::IllPosed(_) | Error::EighNonConvergence { .. } => 2,
                _ => 1,
            }
        }
    };
    std::process::exit(code);
}

fn run(cli: &Cli) -> Result<()> {
    let opts = cli.solver.opts();
    let started = Instant::now();
    match &cli.command {
        Command::ChannelDim { family, param, file } => {
            let ch = match (family, file) {
                (Some(f), None) => channels::named_channel(
                    f.0,
                    param.ok_or_else(|| Error::InvalidValue("--family requires --param".into()))?,
                )?,
                (None, Some(path)) => dimenq::io::channel_from_json(&read_json(path)?)?,
                _ => return Err(Error::InvalidValue("provide exactly one of --family/--file".into())),
            };
            let r = channels::dimension_measure(&ch, &opts)?;
            emit_result(
                r.value,
                status_str(r.solution.status),
                certificate_summary(&r.certificate),
                started.elapsed().as_millis(),
                json!({}),
            );
        }
        Command::StateSchmidt { werner, file } => {
            let rho = match (werner, file) {
                (Some(l), None) => states::werner_state(*l)?,
                (None, Some(path)) => dimenq::io::state_from_json(&read_json(path)?)?,
                _ => return Err(Error::InvalidValue("provide exactly one of --werner/--file".into())),
            };
            let r = states::schmidt_measure_2xn(&rho, &opts)?;
            emit_result(
                r.value,
                status_str(r.solution.status),
                certificate_summary(&r.certificate),
                started.elapsed().as_millis(),
                json!({}),
            );
        }
        Command::MeasDim { source } => {
            let m = source.load()?;
            let (r, bound) = if m.dim() == 2 {
                (measurements::dimension_measure_qubit(&m, &opts)?, false)
            } else {
                (measurements::dimension_measure_upper_bound(&m, &opts)?, true)
            };
            emit_result(
                r.value,
                status_str(r.solution.status),
                certificate_summary(&r.certificate),
                started.elapsed().as_millis(),
                json!({ "upper_bound": bound }),
            );
        }
        Command::MeasWeight { source } => {
            let m = source.load()?;
            let r = measurements::incompatibility_weight(&m, &opts)?;
            emit_result(
                r.value,
                status_str(r.solution.status),
                certificate_summary(&r.certificate),
                started.elapsed().as_millis(),
                json!({}),
            );
        }
        Command::JmCheck { source } => {
            let m = source.load()?;
            let r = measurements::joint_measurability(&m, &opts)?;
            emit_result(
                r.robustness,
                status_str(r.solution.status),
                certificate_summary(&r.certificate),
                started.elapsed().as_millis(),
                json!({ "jointly_measurable": r.jointly_measurable }),
            );
        }
        Command::SteerSchmidt { bell_xz, file } => {
            let s = match (bell_xz, file) {
                (Some(p), None) => {
                    let rho = DensityMatrix::new((2, 2), max_entangled(2).density())?;
                    steering::from_state_and_povms(&rho, &measurements::mub_pair(2, *p)?)?
                }
                (None, Some(path)) => dimenq::io::assemblage_from_json(&read_json(path)?)?,
                _ => return Err(Error::InvalidValue("provide exactly one of --bell-xz/--file".into())),
            };
            let r = steering::schmidt_measure_qubit_assemblage(&s, &opts)?;
            emit_result(
                r.value,
                status_str(r.solution.status),
                certificate_summary(&r.certificate),
                started.elapsed().as_millis(),
                json!({}),
            );
        }
        Command::SteerBound { gap_example, file } => {
            let s = match (gap_example, file) {
                (Some(d), None) => steering::gap_example(*d)?.assemblage,
                (None, Some(path)) => dimenq::io::assemblage_from_json(&read_json(path)?)?,
                _ => return Err(Error::InvalidValue("provide exactly one of --gap-example/--file".into())),
            };
            let r = steering::schmidt_measure_upper_bound(&s, &opts)?;
            emit_result(
                r.value,
                status_str(r.solution.status),
                certificate_summary(&r.certificate),
                started.elapsed().as_millis(),
                json!({}),
            );
        }
        Command::Pgm { file, out } => {
            let s = dimenq::io::assemblage_from_json(&read_json(file)?)?;
            let pgm = steering::pretty_good_measurements(&s)?;
            let doc = dimenq::io::povm_to_json(&pgm);
            // Value reported: how far the effects are from completing to the
            // identity (a validity residual, ~0 for healthy inputs).
            let mut resid = 0.0f64;
            for x in 0..pgm.n_inputs() {
                let mut sum = dimenq::linalg::HermitianOperator::zero(pgm.dim());
                for a in 0..pgm.n_outcomes() {
                    sum = sum.add(pgm.effect(x, a));
                }
                resid = resid.max(sum.distance_max(&dimenq::linalg::HermitianOperator::identity(pgm.dim())));
            }
            match out {
                Some(path) => write_text(path, &serde_json::to_string(&doc).unwrap())?,
                None => println!("{}", serde_json::to_string(&doc).unwrap()),
            }
            emit_result(resid, "ok", json!({}), started.elapsed().as_millis(), json!({}));
        }
        Command::Twirl { file, out } => {
            let m = dimenq::io::povm_from_json(&read_json(file)?)?;
            let group = measurements::mub_symmetry_group(m.dim())?;
            let t = measurements::twirl_povm(&m, &group)?;
            let doc = dimenq::io::povm_to_json(&t);
            match out {
                Some(path) => write_text(path, &serde_json::to_string(&doc).unwrap())?,
                None => println!("{}", serde_json::to_string(&doc).unwrap()),
            }
            // A twirled POVM pair is of noisy-MUB form; report its visibility.
            let p = measurements::extract_visibility(&t)?;
            emit_result(p, "ok", json!({}), started.elapsed().as_millis(), json!({}));
        }
        Command::Sweep { target, family, mub_pair, werner, bell_xz, template, start, stop, steps, out } => {
            let target: Target = target.parse()?;
            let device = match (family, mub_pair, werner, bell_xz, template) {
                (Some(f), None, false, false, None) => DeviceSpec::Family(f.0),
                (None, Some(d), false, false, None) => DeviceSpec::MubPair(*d),
                (None, None, true, false, None) => DeviceSpec::Werner,
                (None, None, false, true, None) => DeviceSpec::BellXz,
                (None, None, false, false, Some(t)) => DeviceSpec::Template(t.clone()),
                _ => {
                    return Err(Error::InvalidValue(
                        "provide exactly one device source (--family/--mub-pair/--werner/--bell-xz/--template)".into(),
                    ))
                }
            };
            let spec = sweep::SweepSpec { target, device, start: *start, stop: *stop, steps: *steps };
            let rows = sweep::run_sweep(&spec, &opts)?;
            let csv = sweep::to_csv(&rows);
            match out {
                Some(path) => write_text(path, &csv)?,
                None => print!("{csv}"),
            }
        }
        Command::GapExample { d, out } => {
            let g = steering::gap_example(*d)?;
            if let Some(path) = out {
                write_text(path, &serde_json::to_string(&dimenq::io::assemblage_to_json(&g.assemblage)).unwrap())?;
            }
            emit_result(
                g.residual,
                "ok",
                json!({ "decomposition_residual": g.residual }),
                started.elapsed().as_millis(),
                json!({ "true_value": g.true_value, "components": g.decomposition.len() }),
            );
        }
        Command::MubHeuristic { d, k, o1, o2 } => {
            let parse_subset = |s: &String| -> Result<Vec<usize>> {
                s.split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<usize>()
                            .map_err(|_| Error::Parse(format!("bad outcome index '{t}'")))
                    })
                    .collect()
            };
            let (o1v, o2v, r) = match (o1, o2) {
                (Some(a), Some(b)) => {
                    let (a, b) = (parse_subset(a)?, parse_subset(b)?);
                    let r = measurements::heuristic_mub_construction(*d, *k, &a, &b)?;
                    (a, b, r)
                }
                (None, None) => measurements::best_heuristic_construction(*d, *k)?,
                _ => return Err(Error::InvalidValue("provide both --o1 and --o2 or neither".into())),
            };
            emit_result(
                r.p_k,
                "ok",
                json!({ "tie_broken": r.tie_broken }),
                started.elapsed().as_millis(),
                json!({ "o1": o1v, "o2": o2v, "heuristic": true }),
            );
        }
        Command::Validate { file } => {
            let doc = read_json(file)?;
            let violations = dimenq::io::validate_json(&doc)?;
            if violations.is_empty() {
                println!("ok");
            } else {
                for v in &violations {
                    println!("violation at {}: {} (residual {})", v.location, v.message, v.residual);
                }
                return Err(Error::InvariantViolation(format!(
                    "{} invariant violation(s) in {}",
                    violations.len(),
                    file.display()
                )));
            }
        }
    }
    Ok(())
}
