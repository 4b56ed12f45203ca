//! Quiver spectral calculus at desk scale.
//!
//! A quiver here is a finite graph with loops and multiple edges. The crate
//! builds the operators a quiver carries (gradient, Kirchhoff, one-form,
//! signless and Hodge Laplacians, and for simple graphs the connection
//! matrix with its exact Green inverse), computes their spectra with a
//! cyclic Jacobi solver, and verifies the eigenvalue-sum inequalities that
//! relate them: the Brouwer bound `S_k <= m + r + k(k+1)/2`, the Lew bound,
//! the degree sandwich, interlacing under edge removal and snap reduction,
//! and the spanning-tree certificate for `n >= 4 d_1^2`.
//!
//! Structural identities (principal submatrices, Green inverses,
//! unimodularity) are checked in exact integer arithmetic; floating point
//! only enters through the eigensolver, and every inequality check carries
//! an explicit tolerance and margin.

pub mod checks;
pub mod error;
pub mod families;
pub mod operators;
pub mod quiver;
pub mod spectra;

pub use checks::{
    brouwer_certificate, run_check, Certificate, CertificateStep, CheckConfig, CheckKind,
    CheckReport, Perturbation, Verdict,
};
pub use error::{Error, Result};
pub use families::{
    search, AggregateReport, BatchSpec, Family, FamilySpec, SearchSpec,
};
pub use operators::{connection, gradient, incidence_pack, kirchhoff, one_form, signless,
    supertrace, ConnectionPack, IncidencePack, Simplex};
pub use quiver::{DegreeSequence, Quiver, SpanningTree};
pub use spectra::{
    betti, eigen_desc, essential_isospectral_margin, heat_supertrace, sequence_table,
    spectral_radius, SequenceTable, Spectrum,
};
