//! The four diagonal spherical scattering operators: transition t, inward
//! transmission Phi, internal reflection rho, outward transmission Psi
//! (Eq. 21, 22, 24, 25). Entries depend only on (tau, l); `assemble`
//! expands them across (sigma, m) into the canonical linear mode ordering.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::media::{branch_sqrt, ShellGeometry, Side};
use crate::radial::{propagate_stack, Direction, RadialBoundaryData};
use crate::specfun::mode::{mode_count, modes, truncation_degree, Polarization};
use crate::specfun::riccati::{riccati_psi_ladder, riccati_xi_ladder, RiccatiPair};
use crate::wavenumber_vacuum;

/// A denominator counts as vanishing when it is this small relative to its
/// largest additive term (near-resonant shell).
const DENOM_TOL: f64 = 1e-12;

/// One operator's values per (tau, l), l = 1..=lmax.
#[derive(Debug, Clone)]
pub struct PerTauL {
    pub lmax: u32,
    te: Vec<Complex64>,
    tm: Vec<Complex64>,
}

impl PerTauL {
    pub fn get(&self, pol: Polarization, l: u32) -> Complex64 {
        let i = (l - 1) as usize;
        match pol {
            Polarization::Te => self.te[i],
            Polarization::Tm => self.tm[i],
        }
    }

    /// Expand into the canonical linear ordering (constant across sigma, m).
    pub fn to_diagonal(&self) -> Vec<Complex64> {
        modes(self.lmax).map(|n| self.get(n.pol, n.l)).collect()
    }
}

/// All four operators at one frequency, as diagonals in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct SsoSet {
    pub frequency_hz: f64,
    pub lmax: u32,
    pub t: Vec<Complex64>,
    pub phi: Vec<Complex64>,
    pub rho: Vec<Complex64>,
    pub psi: Vec<Complex64>,
}

impl SsoSet {
    pub fn mode_count(&self) -> usize {
        mode_count(self.lmax)
    }
}

/// The (t, Phi, rho, Psi) entries of a single (family, l) mode.
#[derive(Debug, Clone, Copy)]
struct ModeOperators {
    t: Complex64,
    phi: Complex64,
    rho: Complex64,
    psi: Complex64,
}

fn guarded_denominator(
    c: Complex64,
    z: &RiccatiPair,
    tau: u8,
    l: u32,
) -> Result<Complex64> {
    let term = c * z.value;
    let den = term - z.derivative;
    if den.norm() < DENOM_TOL * term.norm().max(z.derivative.norm()) {
        return Err(Error::IllConditionedMode { tau, l });
    }
    Ok(den)
}

fn mode_operators(
    geometry: &ShellGeometry,
    k0: f64,
    family: Polarization,
    l: u32,
) -> Result<ModeOperators> {
    let ext = geometry.exterior;
    let bub = geometry.bubble;
    let kf = ext.wavenumber(k0);
    let kb = bub.wavenumber(k0);
    let li = l as usize;
    let psi_a = riccati_psi_ladder(li, kf * geometry.ra)?[li];
    let xi_a = riccati_xi_ladder(li, kf * geometry.ra)?[li];
    let psi_b = riccati_psi_ladder(li, kb * geometry.rb)?[li];
    let xi_b = riccati_xi_ladder(li, kb * geometry.rb)?[li];

    let shell_a = geometry.sample(geometry.ra, Side::Inner)?;
    let shell_b = geometry.sample(geometry.rb, Side::Outer)?;
    let (mat_f, mat_b, perp_a, perp_b) = match family {
        Polarization::Te => (ext.mu, bub.mu, shell_a.mu_perp, shell_b.mu_perp),
        Polarization::Tm => (ext.eps, bub.eps, shell_a.eps_perp, shell_b.eps_perp),
    };
    let tau = family.tau();

    let fwd: RadialBoundaryData = propagate_stack(geometry, k0, family, l, Direction::Forward)?;
    let bwd: RadialBoundaryData = propagate_stack(geometry, k0, family, l, Direction::Backward)?;

    // Eq. 21: t = -(c psi_a - psi_a') / (c xi_a - xi_a').
    let c_a = mat_f / (kf * perp_a) * fwd.ratio_ra();
    let den = guarded_denominator(c_a, &xi_a, tau, l)?;
    let t = -(c_a * psi_a.value - psi_a.derivative) / den;

    // Eq. 22: Phi from the forward value (TE) / derivative (TM) ratios.
    let z_fb = branch_sqrt(ext.impedance() / bub.impedance());
    let phi = match family {
        Polarization::Te => {
            z_fb * (psi_a.value + t * xi_a.value) / psi_b.value
                / fwd.value_ratio_ra_over_rb()
        }
        Polarization::Tm => {
            if psi_b.derivative.norm() < DENOM_TOL * psi_b.value.norm() {
                return Err(Error::Degenerate {
                    l,
                    message: "psi_l'(kb rb) vanishes in the Phi_2 denominator".into(),
                });
            }
            (perp_a / perp_b) * z_fb * (psi_a.derivative + t * xi_a.derivative)
                / psi_b.derivative
                / fwd.deriv_ratio_ra_over_rb()
        }
    };

    // Eq. 24: rho from the backward boundary ratio at rb.
    let c_b = mat_b / (kb * perp_b) * bwd.ratio_rb();
    let term = c_b * xi_b.value - xi_b.derivative;
    let den = guarded_denominator(c_b, &psi_b, tau, l)?;
    let rho = -term / den;

    // Eq. 25: Psi (t <-> rho substitution in Eq. 22).
    let z_bf = branch_sqrt(bub.impedance() / ext.impedance());
    let psi = match family {
        Polarization::Te => {
            bwd.value_ratio_ra_over_rb() * z_bf * (rho * psi_b.value + xi_b.value) / xi_a.value
        }
        Polarization::Tm => {
            bwd.deriv_ratio_ra_over_rb() * (perp_b / perp_a) * z_bf
                * (rho * psi_b.derivative + xi_b.derivative)
                / xi_a.derivative
        }
    };

    Ok(ModeOperators { t, phi, rho, psi })
}

fn operator_table(
    geometry: &ShellGeometry,
    frequency_hz: f64,
    lmax: u32,
) -> Result<[PerTauL; 4]> {
    let k0 = wavenumber_vacuum(frequency_hz);
    let per_l: Vec<(ModeOperators, ModeOperators)> = (1..=lmax)
        .into_par_iter()
        .map(|l| {
            let te = mode_operators(geometry, k0, Polarization::Te, l)?;
            let tm = mode_operators(geometry, k0, Polarization::Tm, l)?;
            Ok((te, tm))
        })
        .collect::<Result<_>>()?;
    let build = |pick: fn(&ModeOperators) -> Complex64| PerTauL {
        lmax,
        te: per_l.iter().map(|(te, _)| pick(te)).collect(),
        tm: per_l.iter().map(|(_, tm)| pick(tm)).collect(),
    };
    Ok([
        build(|m| m.t),
        build(|m| m.phi),
        build(|m| m.rho),
        build(|m| m.psi),
    ])
}

/// Transition-matrix entries t_{tau l} (Eq. 21).
pub fn transition_entries(
    geometry: &ShellGeometry,
    frequency_hz: f64,
    lmax: u32,
) -> Result<PerTauL> {
    Ok(operator_table(geometry, frequency_hz, lmax)?[0].clone())
}

/// Inward-transmission entries Phi_{tau l} (Eq. 22).
pub fn inward_entries(geometry: &ShellGeometry, frequency_hz: f64, lmax: u32) -> Result<PerTauL> {
    Ok(operator_table(geometry, frequency_hz, lmax)?[1].clone())
}

/// Reflection entries rho_{tau l} (Eq. 24).
pub fn reflection_entries(
    geometry: &ShellGeometry,
    frequency_hz: f64,
    lmax: u32,
) -> Result<PerTauL> {
    Ok(operator_table(geometry, frequency_hz, lmax)?[2].clone())
}

/// Outward-transmission entries Psi_{tau l} (Eq. 25).
pub fn outward_entries(geometry: &ShellGeometry, frequency_hz: f64, lmax: u32) -> Result<PerTauL> {
    Ok(operator_table(geometry, frequency_hz, lmax)?[3].clone())
}

/// Assemble all four operators with the default truncation degree
/// Lmax = ceil(kf ra + 7 (kf ra)^(1/3) + 3).
pub fn assemble(geometry: &ShellGeometry, frequency_hz: f64) -> Result<SsoSet> {
    let k0 = wavenumber_vacuum(frequency_hz);
    let kf = geometry.exterior.wavenumber(k0).norm();
    let lmax = truncation_degree(kf, geometry.ra)?;
    assemble_with_lmax(geometry, frequency_hz, lmax)
}

pub fn assemble_with_lmax(
    geometry: &ShellGeometry,
    frequency_hz: f64,
    lmax: u32,
) -> Result<SsoSet> {
    let [t, phi, rho, psi] = operator_table(geometry, frequency_hz, lmax)?;
    Ok(SsoSet {
        frequency_hz,
        lmax,
        t: t.to_diagonal(),
        phi: phi.to_diagonal(),
        rho: rho.to_diagonal(),
        psi: psi.to_diagonal(),
    })
}

/// Per-mode 2x2 scattering matrix in incoming/outgoing amplitudes
/// (u^(1) = (u^(3) + u^(4))/2), valid when bubble and exterior are vacuum.
/// For lossless shells this map is unitary; for lossy shells, contractive.
pub fn in_out_matrix(
    t: Complex64,
    phi: Complex64,
    rho: Complex64,
    psi: Complex64,
) -> [[Complex64; 2]; 2] {
    let d = 1.0 + rho / 2.0;
    [
        [(1.0 + 2.0 * t) - psi * phi / d, psi / d],
        [phi / d, (rho / 2.0) / d],
    ]
}

/// Largest singular value of a 2x2 complex matrix, via the eigenvalues of
/// M^H M.
pub fn max_singular_value(m: &[[Complex64; 2]; 2]) -> f64 {
    let a = m[0][0].norm_sqr() + m[1][0].norm_sqr();
    let d = m[0][1].norm_sqr() + m[1][1].norm_sqr();
    let b = m[0][0].conj() * m[0][1] + m[1][0].conj() * m[1][1];
    let tr = a + d;
    let det = a * d - b.norm_sqr();
    (0.5 * (tr + (tr * tr - 4.0 * det).max(0.0).sqrt())).sqrt()
}
