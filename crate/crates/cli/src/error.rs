use std::fmt;

use phidim::construct::ConstructError;
use phidim::covering::CoveringError;
use phidim::dimension::DimensionError;
use phidim::faithfulness::FaithfulnessError;
use phidim::gale::GaleError;
use phidim::numeric::{NumericError, SurdError};
use phidim::representation::ReprError;

/// Failure classes, each with a fixed exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Soft = 1,
    Usage = 2,
    Codec = 3,
    Insufficient = 4,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
}

impl CliError {
    pub fn usage(m: impl Into<String>) -> Self {
        CliError { kind: Kind::Usage, message: m.into() }
    }

    pub fn codec(m: impl Into<String>) -> Self {
        CliError { kind: Kind::Codec, message: m.into() }
    }

    pub fn insufficient(m: impl Into<String>) -> Self {
        CliError { kind: Kind::Insufficient, message: m.into() }
    }

    pub fn soft(m: impl Into<String>) -> Self {
        CliError { kind: Kind::Soft, message: m.into() }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind as i32
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn with(kind: Kind, e: impl fmt::Display) -> CliError {
    CliError { kind, message: e.to_string() }
}

impl From<NumericError> for CliError {
    fn from(e: NumericError) -> Self {
        match e {
            NumericError::InvalidQSpec(_) | NumericError::InvalidRational(_) | NumericError::TermTooSmall(_) => {
                with(Kind::Usage, e)
            }
            NumericError::ListExhausted { .. } | NumericError::TooLarge { .. } => with(Kind::Insufficient, e),
            NumericError::NonPositive(_) => with(Kind::Codec, e),
        }
    }
}

impl From<SurdError> for CliError {
    fn from(e: SurdError) -> Self {
        match e {
            SurdError::BadExponent(_) => with(Kind::Usage, e),
            SurdError::Undecided => with(Kind::Codec, e),
        }
    }
}

impl From<ReprError> for CliError {
    fn from(e: ReprError) -> Self {
        match e {
            ReprError::InvalidSpec(_) => with(Kind::Usage, e),
            ReprError::Numeric(n) => n.into(),
            _ => with(Kind::Codec, e),
        }
    }
}

impl From<CoveringError> for CliError {
    fn from(e: CoveringError) -> Self {
        match e {
            CoveringError::InvalidFamilySpec(_) | CoveringError::MissingWindow | CoveringError::PointOutOfRange(_) => {
                with(Kind::Usage, e)
            }
            CoveringError::Exhausted { .. } | CoveringError::TooMany { .. } => with(Kind::Insufficient, e),
            CoveringError::Numeric(n) => n.into(),
            _ => with(Kind::Codec, e),
        }
    }
}

impl From<GaleError> for CliError {
    fn from(e: GaleError) -> Self {
        match e {
            GaleError::Covering(c) => c.into(),
            GaleError::Surd(s) => s.into(),
            GaleError::BadWeights | GaleError::ExponentDecrease { .. } => with(Kind::Usage, e),
            _ => with(Kind::Codec, e),
        }
    }
}

impl From<DimensionError> for CliError {
    fn from(e: DimensionError) -> Self {
        match e {
            DimensionError::EmptyGrid
            | DimensionError::InsufficientBits { .. }
            | DimensionError::TooShort { .. }
            | DimensionError::DepthExhausted { .. } => with(Kind::Insufficient, e),
            DimensionError::Numeric(n) => n.into(),
            DimensionError::Covering(c) => c.into(),
            DimensionError::Parse(_) => with(Kind::Codec, e),
            _ => with(Kind::Usage, e),
        }
    }
}

impl From<FaithfulnessError> for CliError {
    fn from(e: FaithfulnessError) -> Self {
        match e {
            FaithfulnessError::Numeric(n) => n.into(),
            _ => with(Kind::Usage, e),
        }
    }
}

impl From<ConstructError> for CliError {
    fn from(e: ConstructError) -> Self {
        match e {
            ConstructError::InputTooShort { .. } => with(Kind::Insufficient, e),
            ConstructError::DeficitExceeded { .. } => with(Kind::Soft, e),
            ConstructError::Oracle(d) => d.into(),
            _ => with(Kind::Usage, e),
        }
    }
}
