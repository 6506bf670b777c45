use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument was outside the domain of the operation.
    Domain { what: &'static str, value: f64 },
    /// An iterative method did not reach its tolerance.
    Convergence {
        method: &'static str,
        iterations: usize,
    },
    /// The endpoints of a bracket do not straddle a root.
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
    /// A dataset needs at least one observation.
    EmptyDataset,
    /// The baseline probability does not exceed `p0`, so no fragility index exists.
    NotFragileApplicable { initial_prob: f64, p0: f64 },
    /// Requested more reclassifications than there are censored observations.
    Range { requested: usize, available: usize },
    /// An argument combination that is invalid as a whole.
    Invalid(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what, value } => write!(f, "domain error: {what} (got {value})"),
            Error::Convergence { method, iterations } => {
                write!(f, "{method} did not converge after {iterations} iterations")
            }
            Error::Bracket { lo, hi, f_lo, f_hi } => write!(
                f,
                "root not bracketed: f({lo}) = {f_lo}, f({hi}) = {f_hi} have the same sign"
            ),
            Error::EmptyDataset => f.write_str("dataset has no observations"),
            Error::NotFragileApplicable { initial_prob, p0 } => write!(
                f,
                "initial posterior probability {initial_prob} does not exceed p0 = {p0}"
            ),
            Error::Range {
                requested,
                available,
            } => write!(
                f,
                "requested {requested} reclassifications but only {available} censored observations"
            ),
            Error::Invalid(msg) => f.write_str(msg),
        }
    }
}

impl core::error::Error for Error {}

impl Error {
    /// True for failures of the numerical kernels rather than bad inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Convergence { .. } | Error::Bracket { .. })
    }
}
