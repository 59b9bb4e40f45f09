use stochtrace_core::diffusion::DiffusionError;
use stochtrace_core::emergent::EmergentError;
use stochtrace_core::hiddenvars::HiddenError;
use stochtrace_core::numkit::NumError;
use stochtrace_core::tracedyn::TraceError;
use stochtrace_core::waveengine::WaveError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{module}: {message}")]
    Numerical { module: &'static str, message: String },
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl LabError {
    /// Process exit code: 2 for configuration problems, 3 for numerical or output failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 2,
            LabError::Numerical { .. } | LabError::Io { .. } => 3,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        LabError::Config(msg.into())
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        LabError::Io { path: path.display().to_string(), source }
    }
}

macro_rules! numerical {
    ($($ty:ty => $module:literal),* $(,)?) => {
        $(impl From<$ty> for LabError {
            fn from(e: $ty) -> Self {
                LabError::Numerical { module: $module, message: e.to_string() }
            }
        })*
    };
}

numerical!(
    DiffusionError => "diffusion",
    WaveError => "waveengine",
    EmergentError => "emergent",
    TraceError => "tracedyn",
    HiddenError => "hiddenvars",
    NumError => "numkit",
);
