//! Minimal-surface equation toolkit: Dirichlet problems with finite and infinite boundary
//! data on flat multi-domains, solvability certificates, conjugate surfaces, divergence
//! analysis and r-noid construction.

pub mod flatgeom;
pub mod geom;
pub mod mesh;
pub mod jscheck;
pub mod sparse;
pub mod msesolve;
pub mod surface;
pub mod conjfield;
pub mod divscan;
pub mod rnoid;
pub mod meshio;
pub mod cli;
