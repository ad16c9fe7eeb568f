//! Excitation construction (plane waves, port drives) and observable
//! extraction: far fields, gain patterns, bistatic RCS and port S-parameters.
//!
//! All mode vectors are indexed in the canonical linear ordering. Far fields
//! are reported as the amplitude F(r^) with the e^{-jkr}/r factor removed
//! (Eq. 27): F = sqrt(Z_f) sum_n f_n j^{l+2-tau} A_{tau n}(r^).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gsm::{respond, EffectiveGsm};
use crate::media::HomogeneousRegion;
use crate::specfun::legendre::AngularTable;
use crate::specfun::mode::{mode_count, modes, ModeIndex, Polarization};
use crate::specfun::{radial_function, vector_harmonic_from_table};
use crate::{wavenumber_vacuum, Z0};

/// A linearly or elliptically polarized incident plane wave.
#[derive(Debug, Clone, Copy)]
pub struct PlaneWaveSpec {
    /// Propagation direction, colatitude (radians).
    pub theta_inc: f64,
    /// Propagation direction, azimuth (radians).
    pub phi_inc: f64,
    /// Unit Jones vector in the (theta^, phi^) basis of the propagation
    /// direction.
    pub polarization: [Complex64; 2],
    /// Field amplitude E0, V/m.
    pub amplitude: f64,
}

impl PlaneWaveSpec {
    pub fn new(
        theta_inc: f64,
        phi_inc: f64,
        polarization: [Complex64; 2],
        amplitude: f64,
    ) -> Result<Self> {
        let norm = (polarization[0].norm_sqr() + polarization[1].norm_sqr()).sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::domain(
                "PlaneWaveSpec",
                format!("polarization must be a unit vector, |e| = {norm}"),
            ));
        }
        if !theta_inc.is_finite() || !phi_inc.is_finite() || !amplitude.is_finite() {
            return Err(Error::domain("PlaneWaveSpec", "angles and amplitude must be finite"));
        }
        Ok(PlaneWaveSpec { theta_inc, phi_inc, polarization, amplitude })
    }

    /// Theta-polarized wave of unit amplitude.
    pub fn theta_polarized(theta_inc: f64, phi_inc: f64, amplitude: f64) -> Result<Self> {
        Self::new(
            theta_inc,
            phi_inc,
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            amplitude,
        )
    }
}

/// Far-field amplitude in one direction, (theta^, phi^) components, volts.
#[derive(Debug, Clone, Copy)]
pub struct FarFieldSample {
    pub theta: f64,
    pub phi: f64,
    pub f: [Complex64; 2],
}

impl FarFieldSample {
    /// |F|^2 summed over both polarizations.
    pub fn power_density(&self) -> f64 {
        self.f[0].norm_sqr() + self.f[1].norm_sqr()
    }
}

/// Unit vectors (r^, theta^, phi^) at (theta, phi), Cartesian components.
fn spherical_basis(theta: f64, phi: f64) -> [[f64; 3]; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [
        [st * cp, st * sp, ct],
        [ct * cp, ct * sp, -st],
        [-sp, cp, 0.0],
    ]
}

/// A real (r^, theta^, phi^) vector as Cartesian components.
fn to_cartesian(v: [f64; 3], theta: f64, phi: f64) -> [f64; 3] {
    let basis = spherical_basis(theta, phi);
    let mut out = [0.0; 3];
    for (unit, comp) in basis.iter().zip(v) {
        for i in 0..3 {
            out[i] += comp * unit[i];
        }
    }
    out
}

/// Regular VSWF u^{(1)}_n(k r) at a Cartesian point, Cartesian components.
/// This is the evaluation kernel behind the plane-wave reconstruction
/// property; the origin (kr = 0) is excluded.
pub fn regular_wave(n: &ModeIndex, k: Complex64, point: [f64; 3]) -> Result<[Complex64; 3]> {
    let r = (point[0] * point[0] + point[1] * point[1] + point[2] * point[2]).sqrt();
    if r == 0.0 {
        return Err(Error::domain("regular_wave", "the origin is excluded (kr = 0)"));
    }
    let theta = (point[2] / r).clamp(-1.0, 1.0).acos();
    let phi = point[1].atan2(point[0]);
    let kr = k * r;
    let table = AngularTable::new(n.l, theta);
    // (r^, theta^, phi^) components.
    let sph: [Complex64; 3] = match n.pol {
        Polarization::Te => {
            let r1 = radial_function(1, 1, n.l, kr)?;
            let a1 = vector_harmonic_from_table(1, &table, n, phi)?;
            [r1 * a1[0], r1 * a1[1], r1 * a1[2]]
        }
        Polarization::Tm => {
            let r2 = radial_function(2, 1, n.l, kr)?;
            let r3 = radial_function(3, 1, n.l, kr)?;
            let a2 = vector_harmonic_from_table(2, &table, n, phi)?;
            let a3 = vector_harmonic_from_table(3, &table, n, phi)?;
            [r2 * a2[0] + r3 * a3[0], r2 * a2[1] + r3 * a3[1], r2 * a2[2] + r3 * a3[2]]
        }
    };
    let basis = spherical_basis(theta, phi);
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for (unit, comp) in basis.iter().zip(sph) {
        for i in 0..3 {
            out[i] += comp * unit[i];
        }
    }
    Ok(out)
}

/// Regular-wave expansion coefficients a^f of a plane wave
/// E = E0 e^ exp(-j k k^_inc . r), such that the Eq. 1 expansion
/// k sqrt(Z) sum a_n u^{(1)}_n reproduces the wave:
///
/// ```text
/// a_{tau n} = (4 pi E0 / (k_f sqrt(Z_f))) j^{l+1-tau} [A_{tau n}(-k^_inc) . e^]
/// ```
///
/// The sign and phase convention is fixed by the reconstruction property
/// test, which is the binding contract for this function.
pub fn plane_wave_coefficients(
    spec: &PlaneWaveSpec,
    lmax: u32,
    exterior: &HomogeneousRegion,
    frequency_hz: f64,
) -> Result<Vec<Complex64>> {
    let k0 = wavenumber_vacuum(frequency_hz);
    let kf = exterior.wavenumber(k0);
    let zf = exterior.impedance();
    let zf_sqrt = crate::media::branch_sqrt(zf);

    // Polarization vector in Cartesian components, from the basis of the
    // propagation direction.
    let basis = spherical_basis(spec.theta_inc, spec.phi_inc);
    let mut e_cart = [Complex64::new(0.0, 0.0); 3];
    for i in 0..3 {
        e_cart[i] = spec.polarization[0] * basis[1][i] + spec.polarization[1] * basis[2][i];
    }

    // Harmonics are evaluated at the arrival direction -k^_inc.
    let theta_a = std::f64::consts::PI - spec.theta_inc;
    let phi_a = spec.phi_inc + std::f64::consts::PI;
    let table = AngularTable::new(lmax, theta_a);

    let prefactor = 4.0 * std::f64::consts::PI * spec.amplitude / (kf * zf_sqrt);
    let j = Complex64::new(0.0, 1.0);
    modes(lmax)
        .map(|n| {
            let kind = n.pol.tau();
            let a = vector_harmonic_from_table(kind, &table, &n, phi_a)?;
            let a_cart = to_cartesian(a, theta_a, phi_a);
            let mut dot = Complex64::new(0.0, 0.0);
            for i in 0..3 {
                dot += a_cart[i] * e_cart[i];
            }
            let phase = j.powi((n.l + 1 - kind as u32) as i32);
            Ok(prefactor * phase * dot)
        })
        .collect()
}

/// Far-field amplitudes F(r^) (Eq. 27) for outgoing coefficients `f_f` in
/// a medium of wave impedance `zf`, at the given (theta, phi) directions.
pub fn far_field(
    f_f: &[Complex64],
    lmax: u32,
    zf: Complex64,
    directions: &[(f64, f64)],
) -> Result<Vec<FarFieldSample>> {
    if f_f.len() != mode_count(lmax) {
        return Err(Error::Dimension(format!(
            "f_f has {} entries, expected {} for Lmax = {lmax}",
            f_f.len(),
            mode_count(lmax)
        )));
    }
    let zf_sqrt = crate::media::branch_sqrt(zf);
    let j = Complex64::new(0.0, 1.0);
    directions
        .iter()
        .map(|&(theta, phi)| {
            let table = AngularTable::new(lmax, theta);
            let mut f = [Complex64::new(0.0, 0.0); 2];
            for (coeff, n) in f_f.iter().zip(modes(lmax)) {
                if coeff.norm() == 0.0 {
                    continue;
                }
                let a = vector_harmonic_from_table(n.pol.tau(), &table, &n, phi)?;
                let phase = j.powi((n.l + 2 - n.pol.tau() as u32) as i32);
                f[0] += zf_sqrt * coeff * phase * a[1];
                f[1] += zf_sqrt * coeff * phase * a[2];
            }
            Ok(FarFieldSample { theta, phi, f })
        })
        .collect()
}

/// Realized gain G(r^) = 4 pi |F|^2 / (2 Z_f P_in) for port drive `v`
/// (a^f = 0), with incident power P_in = (1/2) sum |v|^2. The exterior is
/// taken as free space.
pub fn gain_pattern(
    eff: &EffectiveGsm,
    v: &[Complex64],
    directions: &[(f64, f64)],
) -> Result<Vec<f64>> {
    let p_in: f64 = 0.5 * v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    if p_in == 0.0 {
        return Err(Error::domain("gain_pattern", "port drive v must be nonzero"));
    }
    let a_f = vec![Complex64::new(0.0, 0.0); eff.mode_count()];
    let f_f = respond(eff, v, &a_f)?.f_f;
    let samples = far_field(&f_f, eff.lmax, Complex64::new(Z0, 0.0), directions)?;
    Ok(samples
        .iter()
        .map(|s| 4.0 * std::f64::consts::PI * s.power_density() / (2.0 * Z0 * p_in))
        .collect())
}

/// Bistatic radar cross section sigma(r^) = 4 pi |F_s|^2 / |E0|^2 under
/// plane-wave incidence with zero port drive.
pub fn bistatic_rcs(
    eff: &EffectiveGsm,
    spec: &PlaneWaveSpec,
    exterior: &HomogeneousRegion,
    frequency_hz: f64,
    directions: &[(f64, f64)],
) -> Result<Vec<f64>> {
    let a_f = plane_wave_coefficients(spec, eff.lmax, exterior, frequency_hz)?;
    let v = vec![Complex64::new(0.0, 0.0); eff.num_ports()];
    let f_f = respond(eff, &v, &a_f)?.f_f;
    let samples = far_field(&f_f, eff.lmax, exterior.impedance(), directions)?;
    let e0_sq = spec.amplitude * spec.amplitude;
    Ok(samples
        .iter()
        .map(|s| 4.0 * std::f64::consts::PI * s.power_density() / e0_sq)
        .collect())
}

/// One port S-parameter entry in the reporting convention of the CSV
/// output: magnitude in dB, phase in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparamRow {
    pub frequency_hz: f64,
    /// Output (row) port, 1-based.
    pub port_out: usize,
    /// Input (column) port, 1-based.
    pub port_in: usize,
    pub mag_db: f64,
    pub phase_deg: f64,
}

/// Port S-parameters (the Gamma~ block) over a frequency list.
pub fn port_sparams(effs: &[EffectiveGsm]) -> Vec<SparamRow> {
    let mut rows = Vec::new();
    for eff in effs {
        let p = eff.num_ports();
        for i in 0..p {
            for j in 0..p {
                let z = eff.gamma[[i, j]];
                rows.push(SparamRow {
                    frequency_hz: eff.frequency_hz,
                    port_out: i + 1,
                    port_in: j + 1,
                    mag_db: 20.0 * z.norm().log10(),
                    phase_deg: z.im.atan2(z.re).to_degrees(),
                });
            }
        }
    }
    rows
}
