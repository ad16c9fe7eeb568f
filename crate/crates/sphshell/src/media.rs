//! Radial constitutive profiles of the shell and the two homogeneous end
//! regions (inner bubble and exterior).
//!
//! All radii are meters and all constitutive values are relative
//! (dimensionless). With the e^{+j omega t} convention, passive media carry
//! Im(eps), Im(mu) <= 0.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::Z0;

/// Constitutive values of a radially uniaxial medium at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumSample {
    pub eps_perp: Complex64,
    pub eps_r: Complex64,
    pub mu_perp: Complex64,
    pub mu_r: Complex64,
}

impl MediumSample {
    pub fn isotropic(eps: Complex64, mu: Complex64) -> Self {
        MediumSample { eps_perp: eps, eps_r: eps, mu_perp: mu, mu_r: mu }
    }

    pub fn vacuum() -> Self {
        Self::isotropic(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0))
    }

    pub fn is_isotropic(&self) -> bool {
        self.eps_perp == self.eps_r && self.mu_perp == self.mu_r
    }

    pub fn is_lossless(&self) -> bool {
        [self.eps_perp, self.eps_r, self.mu_perp, self.mu_r].iter().all(|v| v.im == 0.0)
    }

    fn check(&self) -> std::result::Result<(), String> {
        for (name, v) in [
            ("eps_perp", self.eps_perp),
            ("eps_r", self.eps_r),
            ("mu_perp", self.mu_perp),
            ("mu_r", self.mu_r),
        ] {
            if v.norm() == 0.0 || !v.is_finite() {
                return Err(format!("{name} must be finite and nonzero, got {v}"));
            }
        }
        Ok(())
    }
}

/// Complex square root on the branch with Re >= 0 (physical wave branch).
pub fn branch_sqrt(z: Complex64) -> Complex64 {
    let s = z.sqrt();
    if s.re < 0.0 {
        -s
    } else {
        s
    }
}

/// A homogeneous isotropic region (the bubble interior or the exterior).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousRegion {
    pub eps: Complex64,
    pub mu: Complex64,
}

impl HomogeneousRegion {
    pub fn new(eps: Complex64, mu: Complex64) -> Self {
        HomogeneousRegion { eps, mu }
    }

    pub fn vacuum() -> Self {
        HomogeneousRegion::new(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0))
    }

    /// k = k0 sqrt(eps mu), Re(k) >= 0.
    pub fn wavenumber(&self, k0: f64) -> Complex64 {
        k0 * branch_sqrt(self.eps * self.mu)
    }

    /// Z = Z0 sqrt(mu / eps), Re(Z) >= 0, in ohms.
    pub fn impedance(&self) -> Complex64 {
        Z0 * branch_sqrt(self.mu / self.eps)
    }
}

/// A scalar constitutive profile as a function of radius (meters).
pub type ProfileFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Continuously varying uniaxial profile over one segment. Analytic radial
/// derivatives of the transverse components may be supplied; absent that,
/// the radial solver falls back to central differences.
#[derive(Clone)]
pub struct RadialProfile {
    pub eps_perp: ProfileFn,
    pub eps_r: ProfileFn,
    pub mu_perp: ProfileFn,
    pub mu_r: ProfileFn,
    pub d_eps_perp: Option<ProfileFn>,
    pub d_mu_perp: Option<ProfileFn>,
}

impl RadialProfile {
    pub fn sample(&self, r: f64) -> MediumSample {
        MediumSample {
            eps_perp: (self.eps_perp)(r),
            eps_r: (self.eps_r)(r),
            mu_perp: (self.mu_perp)(r),
            mu_r: (self.mu_r)(r),
        }
    }
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialProfile").finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum SegmentProfile {
    Constant(MediumSample),
    Radial(RadialProfile),
}

/// One radial segment of the shell.
#[derive(Debug, Clone)]
pub struct LayerSegment {
    pub r_inner: f64,
    pub r_outer: f64,
    pub profile: SegmentProfile,
}

impl LayerSegment {
    pub fn constant(r_inner: f64, r_outer: f64, sample: MediumSample) -> Self {
        LayerSegment { r_inner, r_outer, profile: SegmentProfile::Constant(sample) }
    }

    pub fn radial(r_inner: f64, r_outer: f64, profile: RadialProfile) -> Self {
        LayerSegment { r_inner, r_outer, profile: SegmentProfile::Radial(profile) }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.profile, SegmentProfile::Constant(_))
    }

    pub fn sample(&self, r: f64) -> MediumSample {
        match &self.profile {
            SegmentProfile::Constant(s) => *s,
            SegmentProfile::Radial(p) => p.sample(r),
        }
    }
}

/// Which one-sided limit to take at an interface radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Inner,
    Outer,
}

/// The full stratified shell: bubble, layered region [rb, ra], exterior.
#[derive(Debug, Clone)]
pub struct ShellGeometry {
    pub rb: f64,
    pub ra: f64,
    pub bubble: HomogeneousRegion,
    pub exterior: HomogeneousRegion,
    pub segments: Vec<LayerSegment>,
}

/// Relative tolerance for segment tiling checks.
const TILE_TOL: f64 = 1e-12;

impl ShellGeometry {
    /// Build and validate in one step.
    pub fn new(
        rb: f64,
        ra: f64,
        bubble: HomogeneousRegion,
        exterior: HomogeneousRegion,
        segments: Vec<LayerSegment>,
    ) -> Result<Self> {
        let g = ShellGeometry { rb, ra, bubble, exterior, segments };
        match g.validate().into_iter().next() {
            None => Ok(g),
            Some(problem) => Err(Error::Geometry(problem)),
        }
    }

    /// Check all invariants; returns every violation found (empty = ok).
    pub fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        if !(self.rb > 0.0 && self.ra > self.rb) {
            problems.push(format!("radii not increasing: rb = {}, ra = {}", self.rb, self.ra));
        }
        if self.segments.is_empty() {
            problems.push("shell has no segments".into());
            return problems;
        }
        let tol = TILE_TOL * self.ra;
        if (self.segments[0].r_inner - self.rb).abs() > tol {
            problems.push(format!(
                "segments do not tile: first segment starts at {} but rb = {}",
                self.segments[0].r_inner, self.rb
            ));
        }
        if (self.segments.last().unwrap().r_outer - self.ra).abs() > tol {
            problems.push(format!(
                "segments do not tile: last segment ends at {} but ra = {}",
                self.segments.last().unwrap().r_outer,
                self.ra
            ));
        }
        for (i, seg) in self.segments.iter().enumerate() {
            if !(seg.r_inner < seg.r_outer) {
                problems.push(format!("segment {i} has non-positive thickness"));
            }
            if i > 0 && (seg.r_inner - self.segments[i - 1].r_outer).abs() > tol {
                problems.push(format!(
                    "segments do not tile: gap or overlap between segments {} and {i}",
                    i - 1
                ));
            }
            // Probe the profile at a few radii for finiteness.
            for t in [0.0, 0.5, 1.0] {
                let r = seg.r_inner + t * (seg.r_outer - seg.r_inner);
                if let Err(msg) = seg.sample(r).check() {
                    problems.push(format!("segment {i} at r = {r}: {msg}"));
                    break;
                }
            }
        }
        for (name, v) in [
            ("bubble eps", self.bubble.eps),
            ("bubble mu", self.bubble.mu),
            ("exterior eps", self.exterior.eps),
            ("exterior mu", self.exterior.mu),
        ] {
            if v.norm() == 0.0 || !v.is_finite() {
                problems.push(format!("{name} must be finite and nonzero, got {v}"));
            }
        }
        problems
    }

    /// Index of the segment owning radius `r` from the requested side.
    pub fn segment_index(&self, r: f64, side: Side) -> Result<usize> {
        if !(self.rb..=self.ra).contains(&r) {
            return Err(Error::domain(
                "sample",
                format!("r = {r} outside the shell [{}, {}]", self.rb, self.ra),
            ));
        }
        let idx = match side {
            // Inner limit: the segment that ends at (or contains) r.
            Side::Inner => self
                .segments
                .iter()
                .position(|s| s.r_inner < r && r <= s.r_outer)
                .unwrap_or(0),
            // Outer limit: the segment that starts at (or contains) r.
            Side::Outer => self
                .segments
                .iter()
                .position(|s| s.r_inner <= r && r < s.r_outer)
                .unwrap_or(self.segments.len() - 1),
        };
        Ok(idx)
    }

    /// Constitutive values at `r`; at an interface, `side` picks which
    /// segment's limit is returned.
    pub fn sample(&self, r: f64, side: Side) -> Result<MediumSample> {
        let idx = self.segment_index(r, side)?;
        Ok(self.segments[idx].sample(r))
    }

    /// Replace each continuous segment by `n_layers` equal-thickness
    /// homogeneous segments sampled at the sub-segment midpoints. Constant
    /// segments pass through untouched.
    pub fn staircase(&self, n_layers: usize) -> Result<ShellGeometry> {
        if n_layers < 1 {
            return Err(Error::domain("staircase", "n_layers must be >= 1"));
        }
        let mut segments = Vec::new();
        for seg in &self.segments {
            match &seg.profile {
                SegmentProfile::Constant(_) => segments.push(seg.clone()),
                SegmentProfile::Radial(p) => {
                    let h = (seg.r_outer - seg.r_inner) / n_layers as f64;
                    for i in 0..n_layers {
                        let lo = seg.r_inner + i as f64 * h;
                        let hi = if i + 1 == n_layers { seg.r_outer } else { lo + h };
                        let mid = 0.5 * (lo + hi);
                        segments.push(LayerSegment::constant(lo, hi, p.sample(mid)));
                    }
                }
            }
        }
        Ok(ShellGeometry {
            rb: self.rb,
            ra: self.ra,
            bubble: self.bubble,
            exterior: self.exterior,
            segments,
        })
    }
}
