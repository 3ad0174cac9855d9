use thiserror::Error;

use crate::workspace::Cell;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("map dimensions must be at least 1x1, got {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },

    #[error("invalid map weight `{name}` = {value}: weights must be finite and positive")]
    InvalidWeight { name: &'static str, value: f64 },

    #[error("connectivity must be 4 or 8, got {0}")]
    InvalidConnectivity(u8),

    #[error("regions overlap: `{first}` and `{second}`")]
    RegionsOverlap { first: String, second: String },

    #[error("region `{name}` has a malformed or out-of-bounds rectangle {rect:?}")]
    RegionOutOfBounds { name: String, rect: [i64; 4] },

    #[error("duplicate region `{0}`")]
    DuplicateRegion(String),

    #[error("cell ({}, {}) is outside the map", .0.x, .0.y)]
    CellOutOfBounds(Cell),

    #[error("map file syntax error at line {line}, column {column}: {message}")]
    MapSyntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("formula parse error at position {position}: {message}")]
    FormulaSyntax { position: usize, message: String },

    #[error("formula `{0}` is outside safety/guarantee fragment")]
    OutsideFragment(String),

    #[error("proposition `{0}` appears in both the avoid and the reach set")]
    ConflictingProposition(String),

    #[error("duplicate proposition `{0}`")]
    DuplicateProposition(String),

    #[error("at least one proposition is required")]
    NoPropositions,

    #[error("unsupported pattern `{0}`")]
    UnsupportedPattern(String),

    #[error("pattern needs {needed} distinct propositions, only {available} given")]
    NotEnoughPropositions { needed: usize, available: usize },

    #[error("proposition `{0}` is not bound to any region of the map")]
    UnboundProposition(String),

    #[error("no accepting states")]
    NoAcceptingStates,

    #[error("hypothesis `{0}` does not partition the shared automaton's propositions")]
    HypothesisMismatch(String),

    #[error("illegal transition from ({}, {}) to ({}, {})", .from.x, .from.y, .to.x, .to.y)]
    IllegalTransition { from: Cell, to: Cell },

    #[error("trajectory gap between ({}, {}) and ({}, {})", .from.x, .from.y, .to.x, .to.y)]
    TrajectoryGap { from: Cell, to: Cell },

    #[error("hypothesis set is empty")]
    EmptyHypotheses,

    #[error("duplicate hypothesis `{0}`")]
    DuplicateHypothesis(String),

    #[error("missing cost table for hypothesis `{0}`")]
    MissingCostTable(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("could not place {regions} disjoint regions of size {size} on a {n}x{n} grid after {attempts} attempts")]
    RegionPlacement {
        n: usize,
        regions: usize,
        size: usize,
        attempts: usize,
    },

    #[error("intent is unsatisfiable from the start cell after {0} draws")]
    Unsatisfiable(usize),

    #[error("input is empty")]
    EmptyInput,

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad input data, as opposed to I/O or runtime failures.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Io(_)
                | Error::TrajectoryGap { .. }
                | Error::Unsatisfiable(_)
                | Error::RegionPlacement { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
