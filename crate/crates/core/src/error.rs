use thiserror::Error;

/// Errors surfaced by the geometry, quantisation and shooting layers.
#[derive(Debug, Error)]
pub enum Error {
    /// An integration path passes closer to a turning point or to the origin
    /// than the configured clearance and no waypoint hint was supplied.
    #[error("integration path from {from} to {to} passes within {clearance:.3e} of obstacle at {obstacle}; supply a waypoint hint")]
    PathTooClose {
        from: num_complex::Complex64,
        to: num_complex::Complex64,
        obstacle: num_complex::Complex64,
        clearance: f64,
    },

    /// A Stokes/anti-Stokes line exhausted its step budget before reaching a
    /// terminus.
    #[error("line from turning point {origin} truncated after {steps} steps at |x| = {radius:.3e}")]
    TruncatedLine {
        origin: usize,
        steps: usize,
        radius: f64,
    },

    /// The corrector failed to converge, usually right at a nearly-double zero.
    #[error("level-set corrector diverged near {at} (origin turning point {origin})")]
    DegenerateTracing {
        origin: usize,
        at: num_complex::Complex64,
    },

    /// The Stokes graph is structurally degenerate (a line terminates on
    /// another turning point astride the continuation arc), so the crossing
    /// order is undefined.
    #[error("ambiguous crossing sequence at E = {boundary_energy}: graph is at a structural boundary")]
    AmbiguousSequence { boundary_energy: f64 },

    /// Window construction failed because (alpha, l) sits on a region boundary
    /// where the window layout is degenerate.
    #[error("boundary parameters (alpha = {alpha}, l = {l}): {reason}")]
    BoundaryParameters { alpha: f64, l: f64, reason: String },

    /// An extremum being tracked collided with a window edge.
    #[error("extremum at E = {energy} collided with window boundary {boundary}")]
    WindowCollision { energy: f64, boundary: f64 },

    /// A search exhausted its refinement budget.
    #[error("budget exhausted in {what}")]
    BudgetExhausted { what: String },

    /// A bracketing root search could not find a sign change.
    #[error("bracketing failed: {0}")]
    Bracket(String),

    /// The shooting contour could not keep the required clearance from x = 0.
    #[error("contour clearance failure near x = {at} (|x| = {radius:.3e})")]
    ContourClearance {
        at: num_complex::Complex64,
        radius: f64,
    },

    /// Adaptive ODE stepping failed (step size underflow or step budget).
    #[error("ODE integration failed at t = {t}: {reason}")]
    OdeStep { t: f64, reason: String },

    /// Invalid caller-supplied configuration.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
