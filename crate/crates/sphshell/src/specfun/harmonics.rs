//! Scalar and vector spherical harmonics and the VSWF radial factors.
//!
//! Conventions: real-valued harmonics with cos(m phi) (even) / sin(m phi)
//! (odd) azimuthal dependence, orthonormal over the unit sphere. Vector
//! components are given in the right-handed (r^, theta^, phi^) frame.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::specfun::legendre::AngularTable;
use crate::specfun::mode::{ModeIndex, Parity};
use crate::specfun::riccati::{riccati_psi, riccati_xi};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7; // 1 / sqrt(2 pi)

fn azimuthal_norm(m: u32) -> f64 {
    if m == 0 {
        INV_SQRT_2PI
    } else {
        std::f64::consts::SQRT_2 * INV_SQRT_2PI
    }
}

/// Y_{sigma m l}(theta, phi).
pub fn scalar_harmonic(parity: Parity, m: u32, l: u32, theta: f64, phi: f64) -> Result<f64> {
    let n = ModeIndex::new(crate::specfun::mode::Polarization::Te, parity, m, l)?;
    let table = AngularTable::new(l, theta);
    Ok(scalar_harmonic_from_table(&table, &n, phi))
}

pub fn scalar_harmonic_from_table(table: &AngularTable, n: &ModeIndex, phi: f64) -> f64 {
    let trig = match n.parity {
        Parity::Even => (n.m as f64 * phi).cos(),
        Parity::Odd => (n.m as f64 * phi).sin(),
    };
    azimuthal_norm(n.m) * table.get(n.l, n.m).p * trig
}

/// A_{kind, sigma m l}(theta, phi) in (r^, theta^, phi^) components.
pub fn vector_harmonic(kind: u8, n: &ModeIndex, theta: f64, phi: f64) -> Result<[f64; 3]> {
    let table = AngularTable::new(n.l, theta);
    vector_harmonic_from_table(kind, &table, n, phi)
}

/// Same as [`vector_harmonic`] but reusing a precomputed [`AngularTable`],
/// which is how mode-summed field evaluations should call it.
pub fn vector_harmonic_from_table(
    kind: u8,
    table: &AngularTable,
    n: &ModeIndex,
    phi: f64,
) -> Result<[f64; 3]> {
    let af = table.get(n.l, n.m);
    let norm = azimuthal_norm(n.m);
    let mphi = n.m as f64 * phi;
    let (trig, dtrig) = match n.parity {
        // dtrig carries d/dphi of the azimuthal factor with the m absorbed
        // into pi_l^m.
        Parity::Even => (mphi.cos(), -mphi.sin()),
        Parity::Odd => (mphi.sin(), mphi.cos()),
    };
    let inv_ll1 = 1.0 / ((n.l * (n.l + 1)) as f64).sqrt();
    // d Y / d theta and (1 / sin theta) dY / d phi.
    let y_theta = norm * af.tau * trig;
    let y_phi = norm * af.pi * dtrig;
    match kind {
        1 => Ok([0.0, inv_ll1 * y_phi, -inv_ll1 * y_theta]),
        2 => Ok([0.0, inv_ll1 * y_theta, inv_ll1 * y_phi]),
        3 => Ok([norm * af.p * trig, 0.0, 0.0]),
        _ => Err(Error::domain("vector_harmonic", format!("kind must be 1, 2 or 3, got {kind}"))),
    }
}

/// Radial factor R^{(p)}_{kind, l}(kr) of the VSWFs: kind 1 pairs with A_1,
/// kind 2 and 3 with A_2 and A_3 of the tau = 2 wave.
pub fn radial_function(kind: u8, p: u8, l: u32, kr: Complex64) -> Result<Complex64> {
    if kr.norm() == 0.0 {
        return Err(Error::domain("radial_function", "kr must be nonzero"));
    }
    let z = match p {
        1 => riccati_psi(l as f64, kr)?,
        4 => riccati_xi(l as f64, kr)?,
        _ => {
            return Err(Error::domain("radial_function", format!("p must be 1 or 4, got {p}")));
        }
    };
    match kind {
        1 => Ok(z.value / kr),
        2 => Ok(z.derivative / kr),
        3 => Ok(((l * (l + 1)) as f64).sqrt() * z.value / (kr * kr)),
        _ => Err(Error::domain("radial_function", format!("kind must be 1, 2 or 3, got {kind}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::mode::Polarization;
    use approx::assert_relative_eq;

    #[test]
    fn scalar_pole_value() {
        // Y_{e01}(theta = 0) = sqrt(3 / 4 pi).
        let y = scalar_harmonic(Parity::Even, 0, 1, 0.0, 0.3).unwrap();
        assert_relative_eq!(y, 0.4886025119, max_relative = 1e-9);
        // Odd harmonics vanish at phi = 0.
        let y = scalar_harmonic(Parity::Odd, 1, 1, 1.0, 0.0).unwrap();
        assert_relative_eq!(y, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn known_tangential_component() {
        let n = ModeIndex::new(Polarization::Tm, Parity::Even, 0, 1).unwrap();
        let a2 = vector_harmonic(2, &n, std::f64::consts::FRAC_PI_2, 0.0).unwrap();
        assert_relative_eq!(a2[1].abs(), 0.345494, max_relative = 1e-5);
        assert_eq!(a2[0], 0.0);
        assert_relative_eq!(a2[2], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn pole_behavior() {
        let n = ModeIndex::new(Polarization::Te, Parity::Even, 0, 1).unwrap();
        let a1 = vector_harmonic(1, &n, 0.0, 0.0).unwrap();
        assert!(a1.iter().all(|c| c.abs() < 1e-12));
        let a3 = vector_harmonic(3, &n, 0.0, 0.0).unwrap();
        assert_relative_eq!(a3[0], 0.4886025119, max_relative = 1e-9);
        assert_eq!(a3[1], 0.0);
        assert_eq!(a3[2], 0.0);
    }

    fn sphere_quad() -> Vec<(f64, f64, f64)> {
        // (theta, phi, weight): Gauss-Legendre in cos(theta) x uniform phi.
        let nphi = 32;
        let mut pts = Vec::new();
        for (x, w) in crate::specfun::legendre::testutil::gauss_legendre(24) {
            for i in 0..nphi {
                let phi = 2.0 * std::f64::consts::PI * i as f64 / nphi as f64;
                pts.push((x.acos(), phi, w * 2.0 * std::f64::consts::PI / nphi as f64));
            }
        }
        pts
    }

    #[test]
    fn scalar_harmonics_orthonormal() {
        let quad = sphere_quad();
        let modes: Vec<_> = crate::specfun::mode::modes(3)
            .filter(|n| n.pol == Polarization::Te)
            .collect();
        for a in &modes {
            for b in &modes {
                let mut acc = 0.0;
                for &(theta, phi, w) in &quad {
                    let t = AngularTable::new(3, theta);
                    acc += w
                        * scalar_harmonic_from_table(&t, a, phi)
                        * scalar_harmonic_from_table(&t, b, phi);
                }
                let expect = if (a.parity, a.m, a.l) == (b.parity, b.m, b.l) { 1.0 } else { 0.0 };
                assert_relative_eq!(acc, expect, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn vector_harmonics_orthonormal() {
        let quad = sphere_quad();
        let modes: Vec<_> = crate::specfun::mode::modes(4)
            .filter(|n| n.pol == Polarization::Te && n.l <= 4)
            .collect();
        for kind_a in 1..=3u8 {
            for kind_b in kind_a..=3u8 {
                for a in modes.iter().step_by(3) {
                    for b in modes.iter().step_by(3) {
                        let mut acc = 0.0;
                        for &(theta, phi, w) in &quad {
                            let t = AngularTable::new(4, theta);
                            let va = vector_harmonic_from_table(kind_a, &t, a, phi).unwrap();
                            let vb = vector_harmonic_from_table(kind_b, &t, b, phi).unwrap();
                            acc += w * (va[0] * vb[0] + va[1] * vb[1] + va[2] * vb[2]);
                        }
                        let same = kind_a == kind_b
                            && (a.parity, a.m, a.l) == (b.parity, b.m, b.l);
                        let expect = if same { 1.0 } else { 0.0 };
                        assert_relative_eq!(
                            acc,
                            expect,
                            epsilon = 1e-9
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn radial_function_examples() {
        let one = Complex64::new(1.0, 0.0);
        let r11 = radial_function(1, 1, 1, one).unwrap();
        assert_relative_eq!(r11.re, 0.3011686789, max_relative = 1e-9);
        // R^{(1)}_{3,1}(2) = sqrt(2) psi_1(2) / 4.
        let psi1_2 = riccati_psi(1.0, Complex64::new(2.0, 0.0)).unwrap().value;
        let r31 = radial_function(3, 1, 1, Complex64::new(2.0, 0.0)).unwrap();
        assert_relative_eq!(r31.re, (2.0f64).sqrt() * psi1_2.re / 4.0, max_relative = 1e-12);
        // R^{(4)}_{2,1}(1) = xi_1'(1).
        let xi1 = riccati_xi(1.0, one).unwrap();
        let r24 = radial_function(2, 4, 1, one).unwrap();
        assert_relative_eq!((r24 - xi1.derivative).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn radial_function_domain_errors() {
        assert!(radial_function(1, 1, 1, Complex64::new(0.0, 0.0)).is_err());
        assert!(radial_function(1, 2, 1, Complex64::new(1.0, 0.0)).is_err());
        assert!(radial_function(4, 1, 1, Complex64::new(1.0, 0.0)).is_err());
    }
}
