//! Spectral analysis of the PT-symmetric eigenvalue problem
//!
//! ```text
//!     -psi'' + (x^6 + alpha x^2 + l(l+1)/x^2) psi = E psi,   psi in L^2(C),
//! ```
//!
//! where `C` is a contour joining `|x| = infinity` in the Stokes sectors
//! centred on `arg x = -3pi/4` and `arg x = -pi/4`.
//!
//! Two independent solvers are provided and cross-validated:
//!
//! * a complex-WKB engine that traces the Stokes geometry of
//!   `P(x) = E - V(x)`, propagates connection coefficients around the
//!   turning-point structure and evaluates a real quantisation-condition
//!   function `Q(E)` whose zeros are eigenvalues ([`quantise`]);
//! * a direct ODE shooting solver that integrates the equation along the
//!   contour and matches Wronskians at a junction point ([`oracle`]).
//!
//! On top of `Q(E)` sit search routines for eigenvalues, for parameter
//! values where two real eigenvalues merge (degeneracies), and for cusp
//! points where the degeneracy mechanism switches between a minimum and a
//! maximum of `Q` being pulled through zero ([`quantise`] search functions).

pub mod critical;
pub mod error;
pub mod oracle;
pub mod poly;
pub mod potential;
pub mod quad;
pub mod quantise;
pub mod report;
mod search;
pub mod spectrum;
pub mod stokes;
pub mod turning;

pub use critical::{
    classify_configuration, classify_region, critical_energies, ConfigurationId,
    CriticalEnergies, Region, RegionLabel,
};
pub use error::Error;
pub use potential::{l_prime, Momentum, ProblemParams};
pub use quad::{action_integral, ActionValue, BranchAnchor};
pub use quantise::{
    crossing_sequence, find_cusps, find_degeneracies, find_eigenvalues, propagate,
    quantisation_condition, CoefficientState, CrossingEvent, CrossingSequence,
    QuantisationCondition,
};
pub use spectrum::{ComplexPair, Cusp, Degeneracy, Eigenvalue, ExtremumKind, Source, SpectrumResult};
pub use stokes::{build_graph, trace_line, LineKind, StokesGraph, StokesLine, Terminus};
pub use turning::{turning_points, TurningPointSet};

/// The fixed polynomial degree of the confining term: `V ~ x^(2M)` with `M = 3`.
pub const M: f64 = 3.0;

pub(crate) type C64 = num_complex::Complex64;
