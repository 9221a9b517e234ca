use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Dimension mismatch between states, operators, or factor spaces.
    #[error("shape error: {0}")]
    Shape(String),

    /// Invalid model or state construction parameters (non-Hermitian matrix,
    /// unnormalizable state, bad density matrix, ...).
    #[error("model error: {0}")]
    Model(String),

    /// A numerical routine produced an unusable result (failed
    /// eigendecomposition, negative variance beyond roundoff, ...).
    #[error("numerics error: {0}")]
    Numerics(String),

    /// The time grid is too coarse for the requested evolution.
    #[error("resolution error: n_steps = {given} but at least {required} required for |H|*T/hbar = {load:.4}")]
    Resolution {
        given: usize,
        required: usize,
        load: f64,
    },

    /// The reference section is singular: the evolving state became
    /// (numerically) orthogonal to the initial state.
    #[error("orthogonality error: |<psi(0)|psi(t)>| = {overlap:.3e} at t = {t:.6}, below the 1e-6 cutoff")]
    Orthogonality { t: f64, overlap: f64 },

    /// Zero mean energy fluctuation with geometrically distinct endpoints.
    /// Physically impossible; signals a numerics bug upstream.
    #[error("degenerate error: mean fluctuation {fluctuation:.3e} vanishes but endpoints are separated by {distance:.3e} rad")]
    Degenerate { fluctuation: f64, distance: f64 },

    /// A two-sided bound (time or power sandwich) failed beyond numerical
    /// slack. The inequality is a theorem, so this is always a bug.
    #[error("sandwich violation in {quantity}: lower = {lower:.9}, actual = {actual:.9}, upper = {upper:.9} (slack {slack:.3e})")]
    SandwichViolation {
        quantity: &'static str,
        lower: f64,
        actual: f64,
        upper: f64,
        slack: f64,
    },

    /// Argument outside the supported domain of a special function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed run configuration.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
