//! TOML experiment configuration.
//!
//! Every key is optional and unknown keys are rejected. Values are validated
//! at load time; errors point at the offending line and column.
//!
//! ```toml
//! model = "rgrwf"            # rgrwf | preferred_frame | local_hv
//! n = 100000                 # runs per settings pair and frame
//! seed = 7                   # master seed
//! out = "out"                # output directory
//! state = "singlet"          # or four [re, im] amplitudes in the order ++, +-, -+, --
//! flash_rate = 5.0           # flashes per unit lab time per region
//! epsilon = 0.0              # collapse softening, 0 <= epsilon <= 0.1
//!
//! [regions]
//! a = { t = [0.0, 1.0], x = [-11.0, -10.0] }
//! b = { t = [0.0, 1.0], x = [10.0, 11.0] }
//!
//! [run]
//! a = 0.0
//! b = 1.0471975511965976
//! frame = 0.0                # rapidity
//! csv = false
//!
//! [classify]
//! frames_probe = [-1.0, -0.5, 0.0, 0.5, 1.0]
//! grid = [[0.0, 0.0], [0.0, 0.7853981633974483]]
//! chsh_angles = [0.0, 1.5707963267948966, 0.7853981633974483, 2.356194490192345]
//!
//! [certify]
//! k_max = 2
//! theta = 1.0471975511965976
//! probe_frames = [-1.0, 1.0]
//! native_frame = -1.0
//! probe_frame = 1.0
//! witness_samples = 1000
//! ```

use std::ops::Range;
use std::path::{Path, PathBuf};

use flashlab_core::determinism::CertificateConfig;
use flashlab_core::minkowski::GeometryError;
use flashlab_core::models::ModelError;
use flashlab_core::quantum::ComplexAmplitude;
use flashlab_core::{Frame, ModelId, ModelParams, PureState, Region, Setting, SettingPair, Side};
use serde::Deserialize;
use thiserror::Error;
use toml::Spanned;

use crate::classifier::{ClassifierConfig, DEFAULT_N};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("line {line}, column {column}: {message}")]
    Invalid {
        line: usize,
        column: usize,
        message: String,
    },
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: Option<Spanned<String>>,
    n: Option<Spanned<u64>>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    state: Option<Spanned<RawState>>,
    flash_rate: Option<Spanned<f64>>,
    epsilon: Option<Spanned<f64>>,
    regions: Option<Spanned<RawRegions>>,
    #[serde(default)]
    run: RawRun,
    #[serde(default)]
    classify: RawClassify,
    #[serde(default)]
    certify: RawCertify,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawState {
    Named(String),
    Amplitudes([[f64; 2]; 4]),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegions {
    a: RawBox,
    b: RawBox,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBox {
    t: [f64; 2],
    x: [f64; 2],
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawRun {
    a: Option<f64>,
    b: Option<f64>,
    frame: Option<Spanned<f64>>,
    csv: Option<bool>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawClassify {
    frames_probe: Option<Spanned<Vec<f64>>>,
    grid: Option<Spanned<Vec<[f64; 2]>>>,
    chsh_angles: Option<[f64; 4]>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawCertify {
    k_max: Option<Spanned<u32>>,
    theta: Option<f64>,
    probe_frames: Option<Spanned<Vec<f64>>>,
    native_frame: Option<Spanned<f64>>,
    probe_frame: Option<Spanned<f64>>,
    witness_samples: Option<u64>,
}

/// Settings of the `run` subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSection {
    pub settings: SettingPair,
    pub frame: Frame,
    pub csv: bool,
}

/// A validated configuration. `master_seed` is `None` when the file does not
/// set one, so the caller can fall back to the environment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelId,
    pub params: ModelParams,
    pub n: u64,
    pub master_seed: Option<u64>,
    pub out: PathBuf,
    pub run: RunSection,
    pub classify: ClassifierConfig,
    pub certify: CertificateConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::from_toml("").expect("empty configuration is valid")
    }
}

/// Largest `k_max` accepted by the certificate (2^20 side-function tables).
const MAX_CERTIFY_K: u32 = 2;

struct Source<'a>(&'a str);

impl Source<'_> {
    fn invalid(&self, span: Range<usize>, message: impl Into<String>) -> ConfigError {
        let before = &self.0[..span.start.min(self.0.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.chars().rev().take_while(|&c| c != '\n').count() + 1;
        ConfigError::Invalid {
            line,
            column,
            message: message.into(),
        }
    }

    fn frame(&self, rapidity: &Spanned<f64>) -> Result<Frame, ConfigError> {
        Frame::new(*rapidity.get_ref()).map_err(|e| self.invalid(rapidity.span(), e.to_string()))
    }

    fn frames(&self, list: &Spanned<Vec<f64>>) -> Result<Vec<Frame>, ConfigError> {
        list.get_ref()
            .iter()
            .map(|&r| Frame::new(r).map_err(|e| self.invalid(list.span(), e.to_string())))
            .collect()
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        RunConfig::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let src = Source(text);

        let model = match &raw.model {
            Some(m) => m
                .get_ref()
                .parse::<ModelId>()
                .map_err(|_| src.invalid(m.span(), format!("unknown model {:?}", m.get_ref())))?,
            None => ModelId::Rgrwf,
        };
        let n = match &raw.n {
            Some(n) if *n.get_ref() == 0 => return Err(src.invalid(n.span(), "n must be positive")),
            Some(n) => *n.get_ref(),
            None => DEFAULT_N,
        };

        let state = match &raw.state {
            None => PureState::singlet(),
            Some(s) => match s.get_ref() {
                RawState::Named(name) if name == "singlet" => PureState::singlet(),
                RawState::Named(name) => {
                    return Err(src.invalid(
                        s.span(),
                        format!("unknown state {name:?}; use \"singlet\" or amplitudes"),
                    ))
                }
                RawState::Amplitudes(a) => {
                    let amps = a.map(|[re, im]| ComplexAmplitude::new(re, im));
                    PureState::new(amps).map_err(|e| src.invalid(s.span(), e.to_string()))?
                }
            },
        };

        let regions = match &raw.regions {
            None => ModelParams::default_regions(),
            Some(r) => {
                let make = |side: Side, b: &RawBox| -> Result<Region, GeometryError> {
                    Region::new(side, (b.t[0], b.t[1]), (b.x[0], b.x[1]))
                };
                let inner = r.get_ref();
                let a =
                    make(Side::A, &inner.a).map_err(|e| src.invalid(r.span(), e.to_string()))?;
                let b =
                    make(Side::B, &inner.b).map_err(|e| src.invalid(r.span(), e.to_string()))?;
                (a, b)
            }
        };
        let rate = raw.flash_rate.as_ref().map_or(5.0, |r| *r.get_ref());
        let epsilon = raw.epsilon.as_ref().map_or(0.0, |e| *e.get_ref());
        let params = ModelParams::new(rate, epsilon, regions, state).map_err(|e| {
            let span = |field: &Option<Spanned<f64>>| field.as_ref().map(|f| f.span());
            let at = match &e {
                ModelError::InvalidParams(m) if m.contains("epsilon") => span(&raw.epsilon),
                ModelError::InvalidParams(m) if m.contains("rate") => span(&raw.flash_rate),
                ModelError::InvalidParams(m) if m.contains("mean flash") => {
                    span(&raw.flash_rate).or_else(|| raw.regions.as_ref().map(|r| r.span()))
                }
                _ => raw.regions.as_ref().map(|r| r.span()),
            };
            src.invalid(at.unwrap_or(0..0), e.to_string())
        })?;

        let run = RunSection {
            settings: SettingPair::new(raw.run.a.unwrap_or(0.0), raw.run.b.unwrap_or(0.0)),
            frame: match &raw.run.frame {
                Some(f) => src.frame(f)?,
                None => Frame::lab(),
            },
            csv: raw.run.csv.unwrap_or(false),
        };

        let mut classify = ClassifierConfig::for_params(&params);
        classify.n = n;
        if let Some(frames) = &raw.classify.frames_probe {
            classify.frames_probe = src.frames(frames)?;
        }
        if let Some(grid) = &raw.classify.grid {
            if grid.get_ref().is_empty() {
                return Err(src.invalid(grid.span(), "settings grid is empty"));
            }
            classify.grid = grid
                .get_ref()
                .iter()
                .map(|&[a, b]| SettingPair::new(a, b))
                .collect();
        }
        if let Some(angles) = raw.classify.chsh_angles {
            classify.chsh_angles = angles.map(Setting::new);
        }

        let mut certify = CertificateConfig {
            params: params.clone(),
            ..CertificateConfig::default()
        };
        let c = &raw.certify;
        if let Some(k) = &c.k_max {
            if *k.get_ref() > MAX_CERTIFY_K {
                return Err(src.invalid(k.span(), format!("k_max must be at most {MAX_CERTIFY_K}")));
            }
            certify.k_max = *k.get_ref();
        }
        if let Some(theta) = c.theta {
            certify.wigner_theta = theta;
        }
        if let Some(frames) = &c.probe_frames {
            certify.probe_frames = src.frames(frames)?;
        }
        if let Some(f) = &c.native_frame {
            certify.janus_native = src.frame(f)?;
        }
        if let Some(f) = &c.probe_frame {
            certify.janus_probe = src.frame(f)?;
        }
        if let Some(w) = c.witness_samples {
            certify.witness_samples = w;
        }

        Ok(RunConfig {
            model,
            params,
            n,
            master_seed: raw.seed,
            out: raw.out.unwrap_or_else(|| PathBuf::from("out")),
            run,
            classify,
            certify,
        })
    }

    /// Sets the master seed of every section.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = Some(seed);
        self.classify.master_seed = seed;
        self.certify.seed = seed;
        self
    }

    pub fn with_n(mut self, n: u64) -> Self {
        self.n = n;
        self.classify.n = n;
        self
    }
}
