//! Supergeometric linear algebra over Grassmann (Weil) algebras and the superPfaffian.
//!
//! The crate is layered bottom-up:
//!
//! - [`weil`]: exact or floating arithmetic in `Λ(ℝ^N)` over a pluggable [`Scalar`] ring,
//!   body/soul split and jet evaluation of smooth functions;
//! - [`superspace`]: symplectic supervector spaces, super polynomials, the moment map
//!   and the Poisson bracket;
//! - [`superlinalg`]: block supermatrices, determinants, Pfaffians, Berezinians,
//!   the `B`-adjoint and the signature of the even quadratic form;
//! - [`berezin`]: Liouville-normalized Gaussian–Berezin integration, the brute-force
//!   oracle for everything in [`spf`];
//! - [`spf`]: the superPfaffian in closed form on every signature stratum, its holomorphic
//!   extension, Taylor coefficients and identity checkers.
//!
//! Conventions used throughout:
//!
//! - the even Gram matrix is `J₂ ⊕ … ⊕ J₂` with `J₂ = [[0,1],[−1,0]]`, the odd Gram is the identity;
//! - a Weil point `X` of `gl(V)` acts on coordinate columns by ordinary matrix product, entries
//!   written to the left of coordinates (`X g_j = g_i X_ij`);
//! - `B(v, w) = Σ v₀ᵀ J w₀ − Σ_k v₁ᵏ w₁ᵏ` on even Weil points, `μ(X, v) = −½ B(v, Xv)`;
//! - [`superlinalg::pfaffian`] is normalized so that `Pfaff([[0,−c],[c,0]]) = c`.

pub mod berezin;
pub mod random;
pub mod spf;
pub mod superlinalg;
pub mod superspace;
pub mod weil;

pub use weil::{GaussRational, Rational, Scalar, ScalarKind, WeilElement};

/// Errors shared by every module. Each variant maps to one failure class of the CLI.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Shape, generator-count or antisymmetry violations.
    #[error("structure: {0}")]
    Structure(String),
    /// An entry has the wrong parity for its block.
    #[error("parity: {0}")]
    Parity(String),
    /// An element whose body must be invertible has zero body.
    #[error("singular body: {0}")]
    SingularBody(String),
    /// The even quadratic form is degenerate, so no signature stratum applies.
    #[error("stratum boundary: {0}")]
    StratumBoundary(String),
    /// A scalar function is undefined at the requested point.
    #[error("domain: {0}")]
    Domain(String),
    /// Square-root continuation could not be resolved.
    #[error("branch: {0}")]
    Branch(String),
    /// A result is not representable in the chosen scalar ring (irrational root, missing 𝒊).
    #[error("inexact: {0}")]
    Inexact(String),
    /// A hard size cap was exceeded.
    #[error("capacity: {0}")]
    Capacity(String),
    /// Malformed input.
    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
