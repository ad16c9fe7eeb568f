//! Special functions: Riccati-Bessel/Hankel functions, normalized Legendre
//! functions, spherical harmonics, and the spherical mode bookkeeping.

pub mod harmonics;
pub mod legendre;
pub mod mode;
pub mod riccati;

pub use harmonics::{
    radial_function, scalar_harmonic, scalar_harmonic_from_table, vector_harmonic,
    vector_harmonic_from_table,
};
pub use legendre::{legendre_normalized, AngularFunctions, AngularTable};
pub use mode::{mode_count, modes, truncation_degree, ModeIndex, Parity, Polarization};
pub use riccati::{riccati_psi, riccati_psi_ladder, riccati_xi, riccati_xi_ladder, RiccatiPair};
