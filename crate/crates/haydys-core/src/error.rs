use core::fmt;

/// Failure modes shared by every module.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Two fields that must share a lattice do not.
    GridMismatch,
    /// Grid parameters violate `n ≥ 9`, `n` odd, `h > 0`.
    InvalidGrid { n: usize, h: f64 },
    /// A parameter is outside its documented range.
    InvalidArgument(&'static str),
    /// The charge shell does not fit inside the truncation radius.
    ShellOutsideGrid { r_shell: f64, radius: f64 },
    /// |Φ| drops below the threshold somewhere on the charge shell.
    HiggsVanishesOnShell { min_norm: f64 },
    /// Not enough shells in `[R/2, R]` for the asymptotic fit.
    TooFewShells(usize),
    /// Conjugate gradients stopped at `max_iter` above tolerance.
    NotConverged { iterations: usize, residual: f64 },
    /// An eigenvalue iteration made no progress.
    Stagnation,
    /// Projection onto the kernel removed the whole candidate.
    DegenerateDirection,
    /// `c = 0` where a normalisation needs a nonzero input.
    ZeroInput,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::GridMismatch => write!(f, "fields live on different grids"),
            Error::InvalidGrid { n, h } => {
                write!(f, "invalid grid n={n}, h={h}: need n >= 9 odd and h > 0")
            }
            Error::InvalidArgument(what) => write!(f, "invalid argument: {what}"),
            Error::ShellOutsideGrid { r_shell, radius } => {
                write!(f, "shell radius {r_shell} does not fit inside R={radius}")
            }
            Error::HiggsVanishesOnShell { min_norm } => {
                write!(f, "|Phi| falls to {min_norm} on the shell")
            }
            Error::TooFewShells(k) => write!(f, "only {k} shells available for the fit"),
            Error::NotConverged { iterations, residual } => {
                write!(f, "no convergence after {iterations} iterations (residual {residual:e})")
            }
            Error::Stagnation => write!(f, "eigenvalue iteration stagnated"),
            Error::DegenerateDirection => write!(f, "candidate annihilated by the projection"),
            Error::ZeroInput => write!(f, "input vanishes"),
        }
    }
}

impl core::error::Error for Error {}
