use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty binning: every bin has zero observations")]
    EmptyBinning,

    #[error("degenerate correlation: an argument has zero variance")]
    DegenerateCorrelation,

    #[error("constant output: the output has zero variance")]
    ConstantOutput,

    #[error("degenerate input `{0}`: the column has zero width")]
    DegenerateInput(String),

    #[error("sample too small: {0} observations (at least 100 required)")]
    SampleTooSmall(usize),

    #[error("FFD requires >= 2 levels per axis (budget {budget} for {dims} dimensions)")]
    FfdTooSmall { dims: usize, budget: usize },

    #[error("dimension {dim} outside the supported range 1..={max}")]
    DimensionOutOfRange { dim: usize, max: usize },

    #[error("dependence supported for uniform marginals only")]
    NonUniformDependence,

    #[error("model `{model}` expects {expected} inputs, got {got}")]
    ArityMismatch {
        model: String,
        expected: usize,
        got: usize,
    },

    #[error("insufficient sample: variance estimate is not positive")]
    InsufficientSample,

    #[error("nothing to decompose: all combined indices are <= 0")]
    NothingToDecompose,

    #[error("palette exhausted: {0} states for the top input (at most 10)")]
    PaletteExhausted(usize),

    #[error("invalid states: {0}")]
    InvalidStates(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("row {row}, column `{column}`: cannot parse `{value}` as a number")]
    MalformedCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True when the error stems from user-supplied input rather than a
    /// numerical or internal failure.
    pub fn is_user_error(&self) -> bool {
        matches!(
            self,
            Error::SampleTooSmall(_)
                | Error::FfdTooSmall { .. }
                | Error::DimensionOutOfRange { .. }
                | Error::NonUniformDependence
                | Error::ArityMismatch { .. }
                | Error::InvalidStates(_)
                | Error::InvalidArgument(_)
                | Error::InvalidDataset(_)
                | Error::MalformedCell { .. }
                | Error::Csv(_)
                | Error::Json(_)
                | Error::ConstantOutput
                | Error::DegenerateInput(_)
        )
    }

    /// Stable snake_case name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyBinning => "empty_binning",
            Error::DegenerateCorrelation => "degenerate_correlation",
            Error::ConstantOutput => "constant_output",
            Error::DegenerateInput(_) => "degenerate_input",
            Error::SampleTooSmall(_) => "sample_too_small",
            Error::FfdTooSmall { .. } => "ffd_too_small",
            Error::DimensionOutOfRange { .. } => "dimension_out_of_range",
            Error::NonUniformDependence => "non_uniform_dependence",
            Error::ArityMismatch { .. } => "arity_mismatch",
            Error::InsufficientSample => "insufficient_sample",
            Error::NothingToDecompose => "nothing_to_decompose",
            Error::PaletteExhausted(_) => "palette_exhausted",
            Error::InvalidStates(_) => "invalid_states",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::InvalidDataset(_) => "invalid_dataset",
            Error::MalformedCell { .. } => "malformed_cell",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}
