//! Independent reference implementations used only for validation: the
//! classical Mie series for a solid homogeneous sphere, the Neumann
//! (multiple-bounce) expansion of the composition algebra, and a staircase
//! convergence harness for continuously graded shells.
//!
//! The Mie oracle shares only the special functions with the production
//! path; it never calls the radial transport or operator assembly code.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gsm::{compose, AntennaGsm, EffectiveGsm};
use crate::linalg::matmul;
use crate::media::{branch_sqrt, HomogeneousRegion, ShellGeometry};
use crate::specfun::mode::Polarization;
use crate::specfun::riccati::{riccati_psi_ladder, riccati_xi_ladder};
use crate::sso::{assemble_with_lmax, SsoSet};

/// Scattering coefficients of a solid homogeneous sphere, written in the
/// transition-operator convention: the scattered outgoing amplitude is
/// t_{tau l} times the regular incident amplitude, and the per-mode
/// S-parameter is 1 + 2 t_{tau l}.
#[derive(Debug, Clone)]
pub struct MieCoefficients {
    pub lmax: u32,
    /// TM (electric) coefficients, index l - 1.
    pub tm: Vec<Complex64>,
    /// TE (magnetic) coefficients, index l - 1.
    pub te: Vec<Complex64>,
}

impl MieCoefficients {
    pub fn get(&self, pol: Polarization, l: u32) -> Complex64 {
        let i = (l - 1) as usize;
        match pol {
            Polarization::Te => self.te[i],
            Polarization::Tm => self.tm[i],
        }
    }
}

/// Textbook Mie series for a solid sphere of the given medium embedded in a
/// homogeneous exterior, from tangential field continuity at the surface:
///
/// ```text
/// t_{tau l} = - (u psi_l'(y) psi_l(x) - psi_l(y) psi_l'(x))
///             / (u psi_l'(y) xi_l(x)  - psi_l(y) xi_l'(x))
/// ```
///
/// with x = k_e r, y = k_i r, and u = (p_e k_i) / (p k_e) where p is mu for
/// TE and eps for TM.
pub fn mie_solid_sphere(
    eps: Complex64,
    mu: Complex64,
    radius: f64,
    exterior: &HomogeneousRegion,
    k0: f64,
    lmax: u32,
) -> Result<MieCoefficients> {
    if radius <= 0.0 {
        return Err(Error::domain("mie_solid_sphere", format!("radius must be positive, got {radius}")));
    }
    let interior = HomogeneousRegion::new(eps, mu);
    let x = exterior.wavenumber(k0) * radius;
    let y = interior.wavenumber(k0) * radius;
    let li = lmax as usize;
    let psi_x = riccati_psi_ladder(li, x)?;
    let xi_x = riccati_xi_ladder(li, x)?;
    let psi_y = riccati_psi_ladder(li, y)?;
    let k_ratio = interior.wavenumber(k0) / exterior.wavenumber(k0);

    let mut te = Vec::with_capacity(li);
    let mut tm = Vec::with_capacity(li);
    for l in 1..=li {
        for (out, p_e, p_i) in
            [(&mut te, exterior.mu, mu), (&mut tm, exterior.eps, eps)]
        {
            let u = p_e * k_ratio / p_i;
            let num = u * psi_y[l].derivative * psi_x[l].value - psi_y[l].value * psi_x[l].derivative;
            let den = u * psi_y[l].derivative * xi_x[l].value - psi_y[l].value * xi_x[l].derivative;
            out.push(-num / den);
        }
    }
    Ok(MieCoefficients { lmax, te, tm })
}

/// Largest-magnitude eigenvalue estimate of a square matrix by power
/// iteration (sufficient as a convergence guard for the Neumann series).
fn spectral_radius_estimate(k: &Array2<Complex64>) -> f64 {
    let n = k.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut v: Vec<Complex64> =
        (0..n).map(|i| Complex64::new(1.0 + 0.1 * (i as f64).sin(), 0.1 * (i as f64).cos())).collect();
    let mut radius = 0.0;
    for _ in 0..60 {
        let mut w = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..n {
                w[i] += k[[i, j]] * v[j];
            }
        }
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        radius = norm / v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v = w.iter().map(|z| z / norm).collect();
    }
    radius
}

/// Effective GSM via the multiple-bounce Neumann expansion
/// M^-1 = sum_k [ (1/2)(S - 1) rho ]^k, truncated when the term norm drops
/// below 1e-13. This is an independent oracle for [`crate::gsm::compose`];
/// it never performs a linear solve.
pub fn neumann_compose(
    antenna: &AntennaGsm,
    sso: &SsoSet,
    max_terms: usize,
) -> Result<EffectiveGsm> {
    let n = antenna.mode_count();
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let delta = |i: usize, j: usize| if i == j { one } else { zero };

    // K = (1/2)(S - 1) rho, the per-bounce operator.
    let k = Array2::from_shape_fn((n, n), |(i, j)| {
        0.5 * (antenna.s[[i, j]] - delta(i, j)) * sso.rho[j]
    });
    let radius = spectral_radius_estimate(&k);
    if radius >= 0.9 {
        return Err(Error::NonConvergence(format!(
            "Neumann series: spectral radius of the bounce operator is {radius:.3}"
        )));
    }

    // Right-hand sides whose M^-1 images the composition needs.
    let x = Array2::from_shape_fn((n, n), |(i, j)| {
        0.5 * (antenna.s[[i, j]] - delta(i, j)) * sso.phi[j]
    });

    let series = |rhs: &Array2<Complex64>| -> Result<Array2<Complex64>> {
        let mut total = rhs.clone();
        let mut term = rhs.clone();
        for _ in 0..max_terms {
            term = matmul(&k, &term)?;
            let norm = term.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            total = &total + &term;
            if norm < 1e-13 {
                return Ok(total);
            }
        }
        Err(Error::NonConvergence(format!(
            "Neumann series did not reach 1e-13 within {max_terms} terms"
        )))
    };
    let minv_t = series(&antenna.t)?;
    let minv_x = series(&x)?;

    let rho_minv_t =
        Array2::from_shape_fn(minv_t.dim(), |(i, j)| 0.5 * sso.rho[i] * minv_t[[i, j]]);
    let gamma = &antenna.gamma + &matmul(&antenna.r, &rho_minv_t)?;
    let inner = Array2::from_shape_fn((n, n), |(i, j)| {
        (if i == j { sso.phi[j] } else { zero }) + sso.rho[i] * minv_x[[i, j]]
    });
    let r = matmul(&antenna.r, &inner)?;
    let t = Array2::from_shape_fn(minv_t.dim(), |(i, j)| sso.psi[i] * minv_t[[i, j]]);
    let s = Array2::from_shape_fn((n, n), |(i, j)| {
        delta(i, j)
            + 2.0 * (if i == j { sso.t[i] } else { zero })
            + 2.0 * sso.psi[i] * minv_x[[i, j]]
    });
    Ok(EffectiveGsm { frequency_hz: antenna.frequency_hz, lmax: antenna.lmax, gamma, r, t, s })
}

/// One row of the staircase convergence table.
#[derive(Debug, Clone, Copy)]
pub struct StaircaseError {
    /// Number of homogeneous layers each graded segment was split into.
    pub n_layers: usize,
    /// Max entrywise difference over all four effective blocks and all
    /// supplied frequencies, against the direct-ODE reference.
    pub max_error: f64,
}

fn max_block_difference(a: &EffectiveGsm, b: &EffectiveGsm) -> f64 {
    let pairs = [(&a.gamma, &b.gamma), (&a.r, &b.r), (&a.t, &b.t), (&a.s, &b.s)];
    pairs
        .iter()
        .flat_map(|(x, y)| x.iter().zip(y.iter()))
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Cross-validate the staircase approximation of a continuously graded
/// shell against direct ODE integration. For each n in `n_list`, every
/// graded segment is replaced by n homogeneous layers, the shell is
/// composed with each antenna (one per frequency), and the max entrywise
/// deviation from the directly integrated composition is recorded.
pub fn staircase_convergence(
    geometry: &ShellGeometry,
    n_list: &[usize],
    antennas: &[AntennaGsm],
) -> Result<Vec<StaircaseError>> {
    let reference: Vec<EffectiveGsm> = antennas
        .iter()
        .map(|a| {
            let sso = assemble_with_lmax(geometry, a.frequency_hz, a.lmax)?;
            compose(a, &sso)
        })
        .collect::<Result<_>>()?;
    n_list
        .iter()
        .map(|&n_layers| {
            let stepped = geometry.staircase(n_layers)?;
            let mut max_error = 0.0f64;
            for (antenna, exact) in antennas.iter().zip(&reference) {
                let sso = assemble_with_lmax(&stepped, antenna.frequency_hz, antenna.lmax)?;
                let eff = compose(antenna, &sso)?;
                max_error = max_error.max(max_block_difference(&eff, exact));
            }
            Ok(StaircaseError { n_layers, max_error })
        })
        .collect()
}

/// Relative wavenumber contrast m = sqrt(eps mu / (eps_e mu_e)) used by the
/// small-sphere checks.
pub fn relative_index(eps: Complex64, mu: Complex64, exterior: &HomogeneousRegion) -> Complex64 {
    branch_sqrt(eps * mu / (exterior.eps * exterior.mu))
}
