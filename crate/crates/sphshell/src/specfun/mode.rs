//! Spherical mode multi-index and its canonical linear ordering.
//!
//! The ordering used everywhere (including the GSM interchange format):
//! enumerate `l = 1..Lmax`; within `l`, `m = 0..l`; within `m`, parity even
//! then odd (odd skipped at `m = 0`); within `(sigma, m)`, TE then TM.

use crate::error::{Error, Result};

/// Polarization type: TE (no radial electric field) or TM (no radial
/// magnetic field).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    Te,
    Tm,
}

impl Polarization {
    /// The conventional family index: 1 for TE, 2 for TM.
    pub fn tau(self) -> u8 {
        match self {
            Polarization::Te => 1,
            Polarization::Tm => 2,
        }
    }

    pub fn from_tau(tau: u8) -> Result<Self> {
        match tau {
            1 => Ok(Polarization::Te),
            2 => Ok(Polarization::Tm),
            _ => Err(Error::domain("Polarization", format!("tau must be 1 or 2, got {tau}"))),
        }
    }
}

/// Azimuthal parity: cosine (even) or sine (odd) dependence on phi.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

/// The multi-index (tau, sigma, m, l) of a vector spherical wave function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeIndex {
    pub pol: Polarization,
    pub parity: Parity,
    pub m: u32,
    pub l: u32,
}

impl ModeIndex {
    pub fn new(pol: Polarization, parity: Parity, m: u32, l: u32) -> Result<Self> {
        if l < 1 {
            return Err(Error::domain("ModeIndex", format!("degree l must be >= 1, got {l}")));
        }
        if m > l {
            return Err(Error::domain("ModeIndex", format!("order m = {m} exceeds degree l = {l}")));
        }
        if m == 0 && parity == Parity::Odd {
            return Err(Error::domain("ModeIndex", "odd parity vanishes identically for m = 0"));
        }
        Ok(ModeIndex { pol, parity, m, l })
    }

    /// Position in the canonical linear ordering.
    pub fn linear(&self) -> usize {
        let l = self.l as usize;
        let m = self.m as usize;
        // Modes with degree < l: sum over l' = 1..l of (2 + 4 l').
        let before_l = 2 * (l - 1) + 2 * l * (l - 1);
        // Within degree l, modes with order < m.
        let before_m = if m == 0 { 0 } else { 2 + 4 * (m - 1) };
        let parity_offset = match (self.m, self.parity) {
            (_, Parity::Even) => 0,
            (_, Parity::Odd) => 2,
        };
        let tau_offset = match self.pol {
            Polarization::Te => 0,
            Polarization::Tm => 1,
        };
        before_l + before_m + parity_offset + tau_offset
    }

    /// Inverse of [`ModeIndex::linear`].
    pub fn from_linear(index: usize, lmax: u32) -> Result<Self> {
        if index >= mode_count(lmax) {
            return Err(Error::domain(
                "ModeIndex",
                format!("linear index {index} out of range for Lmax = {lmax}"),
            ));
        }
        let mut rest = index;
        for l in 1..=lmax {
            let per_l = 2 + 4 * l as usize;
            if rest >= per_l {
                rest -= per_l;
                continue;
            }
            let m = if rest < 2 {
                0
            } else {
                1 + (rest - 2) / 4
            };
            let within_m = if m == 0 { rest } else { (rest - 2) % 4 };
            let parity = if m > 0 && within_m >= 2 { Parity::Odd } else { Parity::Even };
            let pol = if within_m % 2 == 0 { Polarization::Te } else { Polarization::Tm };
            return ModeIndex::new(pol, parity, m as u32, l);
        }
        unreachable!("index bounds checked above")
    }
}

/// Number of modes retained at truncation degree `lmax`: 2 Lmax (Lmax + 2).
pub fn mode_count(lmax: u32) -> usize {
    let l = lmax as usize;
    2 * l * (l + 2)
}

/// Iterate all modes up to `lmax` in canonical order.
pub fn modes(lmax: u32) -> impl Iterator<Item = ModeIndex> {
    (0..mode_count(lmax)).map(move |i| ModeIndex::from_linear(i, lmax).expect("in range"))
}

/// Truncation degree Lmax = ceil(k r + 7 (k r)^(1/3) + 3).
pub fn truncation_degree(kf: f64, ra: f64) -> Result<u32> {
    let kr = kf * ra;
    if !(kr > 0.0) {
        return Err(Error::domain("truncation_degree", format!("kf * ra must be positive, got {kr}")));
    }
    Ok((kr + 7.0 * kr.cbrt() + 3.0).ceil() as u32)
}
