//! Device sources for single-shot and sweep evaluation: named families,
//! explicit files, and parameterized file templates.

use dimenq::channels::{self, ChannelFamily};
use dimenq::conic::SolveOptions;
use dimenq::error::{Error, Result};
use dimenq::linalg::max_entangled;
use dimenq::measurements;
use dimenq::states::{self, DensityMatrix};
use dimenq::steering;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    ChannelDim,
    StateSchmidt,
    MeasDim,
    MeasWeight,
    JmRobustness,
    SteerSchmidt,
}

impl std::str::FromStr for Target {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "channel-dim" => Ok(Self::ChannelDim),
            "state-schmidt" => Ok(Self::StateSchmidt),
            "meas-dim" => Ok(Self::MeasDim),
            "meas-weight" => Ok(Self::MeasWeight),
            "jm-robustness" => Ok(Self::JmRobustness),
            "steer-schmidt" => Ok(Self::SteerSchmidt),
            other => Err(Error::InvalidValue(format!("unknown sweep target '{other}'"))),
        }
    }
}

/// Where the swept device comes from; the sweep parameter binds to the
/// family parameter or to the `${param}` placeholder of a template file.
pub enum DeviceSpec {
    Family(ChannelFamily),
    MubPair(usize),
    Werner,
    /// Bell state measured with noisy X/Z; parameter is the visibility.
    BellXz,
    Template(std::path::PathBuf),
}

/// Evaluate one sweep point; returns (value, status string).
pub fn evaluate_target(
    target: &Target,
    device: &DeviceSpec,
    param: f64,
    opts: &SolveOptions,
) -> Result<(f64, String)> {
    match target {
        Target::ChannelDim => {
            let ch = match device {
                DeviceSpec::Family(f) => channels::named_channel(*f, param)?,
                DeviceSpec::Template(path) => {
                    let json = render_template(path, param)?;
                    dimenq::io::channel_from_json(&json)?
                }
                _ => return Err(Error::InvalidValue("channel-dim needs --family or --template".into())),
            };
            let r = channels::dimension_measure(&ch, opts)?;
            Ok((r.value, "optimal".into()))
        }
        Target::StateSchmidt => {
            let rho = match device {
                DeviceSpec::Werner => states::werner_state(param)?,
                DeviceSpec::Template(path) => {
                    let json = render_template(path, param)?;
                    dimenq::io::state_from_json(&json)?
                }
                _ => return Err(Error::InvalidValue("state-schmidt needs --werner or --template".into())),
            };
            let r = states::schmidt_measure_2xn(&rho, opts)?;
            Ok((r.value, "optimal".into()))
        }
        Target::MeasDim | Target::MeasWeight | Target::JmRobustness => {
            let m = match device {
                DeviceSpec::MubPair(d) => measurements::mub_pair(*d, param)?,
                DeviceSpec::Template(path) => {
                    let json = render_template(path, param)?;
                    dimenq::io::povm_from_json(&json)?
                }
                _ => return Err(Error::InvalidValue("measurement sweeps need --mub-pair or --template".into())),
            };
            let r = match target {
                Target::MeasDim => {
                    if m.dim() == 2 {
                        measurements::dimension_measure_qubit(&m, opts)?.value
                    } else {
                        measurements::dimension_measure_upper_bound(&m, opts)?.value
                    }
                }
                Target::MeasWeight => measurements::incompatibility_weight(&m, opts)?.value,
                Target::JmRobustness => measurements::joint_measurability(&m, opts)?.robustness,
                _ => unreachable!(),
            };
            Ok((r, "optimal".into()))
        }
        Target::SteerSchmidt => {
            let s = match device {
                DeviceSpec::BellXz => {
                    let rho = DensityMatrix::new((2, 2), max_entangled(2).density())?;
                    steering::from_state_and_povms(&rho, &measurements::mub_pair(2, param)?)?
                }
                DeviceSpec::Template(path) => {
                    let json = render_template(path, param)?;
                    dimenq::io::assemblage_from_json(&json)?
                }
                _ => return Err(Error::InvalidValue("steer-schmidt sweeps need --bell-xz or --template".into())),
            };
            let r = steering::schmidt_measure_qubit_assemblage(&s, opts)?;
            Ok((r.value, "optimal".into()))
        }
    }
}

/// Read a JSON template and substitute `${param}` with the bound value.
pub fn render_template(path: &std::path::Path, param: f64) -> Result<serde_json::Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let rendered = text.replace("${param}", &format!("{param:.17}"));
    serde_json::from_str(&rendered).map_err(|e| Error::Parse(format!("template: {e}")))
}
