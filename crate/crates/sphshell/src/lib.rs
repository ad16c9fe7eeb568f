//! Spherical scattering operators (SSOs) for radially stratified, possibly
//! uniaxially anisotropic spherical shells, and their composition with an
//! antenna's free-space generalized scattering matrix (GSM).
//!
//! The crate is organized around the flow of a typical computation:
//!
//! 1. [`media`] describes the shell: inner bubble, exterior region, and a
//!    stack of radial layers (homogeneous or continuously varying).
//! 2. [`radial`] solves the radial wave equations for each mode family and
//!    degree, by closed form where available and adaptive integration
//!    otherwise.
//! 3. [`sso`] assembles the four diagonal operators (transition, inward and
//!    outward transmission, internal reflection) from the radial boundary
//!    data.
//! 4. [`gsm`] holds the antenna GSM data model, interchange file I/O, and the
//!    composition algebra producing the effective embedded-system GSM.
//! 5. [`fields`] builds excitations (plane waves, port drives) and extracts
//!    observables (far fields, gain, bistatic RCS, port S-parameters).
//!
//! [`specfun`] provides the special functions everything else is built on,
//! and [`oracles`] contains independent reference implementations used by the
//! validation suite.

pub mod error;
pub mod fields;
pub mod gsm;
pub mod linalg;
pub mod media;
pub mod ode;
pub mod oracles;
pub mod radial;
pub mod specfun;
pub mod sso;

pub use error::Error;

/// Speed of light in vacuum, m/s.
pub const C0: f64 = 299_792_458.0;

/// Free-space wave impedance, ohms.
pub const Z0: f64 = 376.730_313_412;

/// Free-space wavenumber k0 = 2 pi f / c0, rad/m.
pub fn wavenumber_vacuum(frequency_hz: f64) -> f64 {
    2.0 * std::f64::consts::PI * frequency_hz / C0
}
