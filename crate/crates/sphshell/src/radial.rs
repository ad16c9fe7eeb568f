//! Boundary data of the radial functions g(r) (TE family) and h(r) (TM
//! family) for each degree l.
//!
//! Within a homogeneous segment the solutions are Riccati-Bessel
//! combinations of (possibly fractional) modified degree; continuously
//! varying segments are integrated adaptively. Segments are chained by the
//! tangential-continuity jump conditions: the value is continuous and the
//! derivative scales with the mu_perp (TE) or eps_perp (TM) ratio across
//! each interface.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::media::{branch_sqrt, LayerSegment, MediumSample, SegmentProfile, ShellGeometry};
use crate::ode::{self, Tolerances};
use crate::specfun::mode::Polarization;
use crate::specfun::riccati::{riccati_psi, riccati_psi_ladder, riccati_xi, riccati_xi_ladder};

/// Value and radial derivative of g or h at one radius.
#[derive(Debug, Clone, Copy)]
pub struct PointState {
    pub value: Complex64,
    pub deriv: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Boundary data of one radial solution across the whole shell.
///
/// The stored values at the propagation start are exact; the values at the
/// far end carry an extra factor exp(`log_scale`) from per-segment
/// renormalization (zero unless the solution grew or shrank past 1e100
/// within the stack).
#[derive(Debug, Clone, Copy)]
pub struct RadialBoundaryData {
    pub family: Polarization,
    pub l: u32,
    pub direction: Direction,
    pub value_rb: Complex64,
    pub deriv_rb: Complex64,
    pub value_ra: Complex64,
    pub deriv_ra: Complex64,
    pub log_scale: f64,
}

impl RadialBoundaryData {
    /// g'(ra) / g(ra); scale factors cancel.
    pub fn ratio_ra(&self) -> Complex64 {
        self.deriv_ra / self.value_ra
    }

    /// g'(rb) / g(rb).
    pub fn ratio_rb(&self) -> Complex64 {
        self.deriv_rb / self.value_rb
    }

    /// g(ra) / g(rb) including accumulated renormalization.
    pub fn value_ratio_ra_over_rb(&self) -> Complex64 {
        let base = self.value_ra / self.value_rb;
        match self.direction {
            Direction::Forward => base * self.log_scale.exp(),
            Direction::Backward => base * (-self.log_scale).exp(),
        }
    }

    /// g'(ra) / g'(rb) including accumulated renormalization.
    pub fn deriv_ratio_ra_over_rb(&self) -> Complex64 {
        let base = self.deriv_ra / self.deriv_rb;
        match self.direction {
            Direction::Forward => base * self.log_scale.exp(),
            Direction::Backward => base * (-self.log_scale).exp(),
        }
    }
}

/// Modified degree L of Eq.-29 type closed forms:
/// L = sqrt(ratio l(l+1) + 1/4) - 1/2 with ratio = mu_perp/mu_r (TE) or
/// eps_perp/eps_r (TM).
pub fn modified_degree(ratio: Complex64, l: u32) -> Result<f64> {
    if ratio.im.abs() > 1e-12 * ratio.norm() {
        return Err(Error::domain(
            "modified_degree",
            format!("anisotropy ratio must be real for the closed form, got {ratio}"),
        ));
    }
    let radicand = ratio.re * (l * (l + 1)) as f64 + 0.25;
    if radicand < 0.0 {
        return Err(Error::domain(
            "modified_degree",
            format!("negative radicand {radicand} (ratio {ratio}, l = {l})"),
        ));
    }
    Ok(radicand.sqrt() - 0.5)
}

fn anisotropy_ratio(sample: &MediumSample, family: Polarization) -> Complex64 {
    match family {
        Polarization::Te => sample.mu_perp / sample.mu_r,
        Polarization::Tm => sample.eps_perp / sample.eps_r,
    }
}

fn transverse(sample: &MediumSample, family: Polarization) -> Complex64 {
    match family {
        Polarization::Te => sample.mu_perp,
        Polarization::Tm => sample.eps_perp,
    }
}

/// Degenerate-IC guard: in the evanescent regime |z|/|z'| stays above
/// ~ x/(2l), so a relative threshold this small only fires at genuine zeros.
const IC_ZERO_TOL: f64 = 1e-12;

/// Initial conditions at rb for the forward (t, Phi) solve, Eq.-18 style:
/// value 1, derivative (kb transverse(rb) / material_b) psi_l'/psi_l.
pub fn initial_condition_forward(
    geometry: &ShellGeometry,
    k0: f64,
    family: Polarization,
    l: u32,
) -> Result<PointState> {
    let kb = geometry.bubble.wavenumber(k0);
    let x = kb * geometry.rb;
    let psi = riccati_psi_ladder(l as usize, x)?[l as usize];
    if psi.value.norm() <= IC_ZERO_TOL * psi.derivative.norm() {
        return Err(Error::Degenerate {
            l,
            message: format!("psi_l(kb rb) vanishes at kb rb = {x}"),
        });
    }
    let shell = geometry.sample(geometry.rb, crate::media::Side::Outer)?;
    let material_b = match family {
        Polarization::Te => geometry.bubble.mu,
        Polarization::Tm => geometry.bubble.eps,
    };
    let deriv = kb * transverse(&shell, family) / material_b * psi.derivative / psi.value;
    Ok(PointState { value: Complex64::new(1.0, 0.0), deriv })
}

/// Initial conditions at ra for the backward (rho, Psi) solve, Eq.-23
/// style: duality map psi -> xi, bubble -> exterior.
pub fn initial_condition_backward(
    geometry: &ShellGeometry,
    k0: f64,
    family: Polarization,
    l: u32,
) -> Result<PointState> {
    let kf = geometry.exterior.wavenumber(k0);
    let x = kf * geometry.ra;
    let xi = riccati_xi_ladder(l as usize, x)?[l as usize];
    if xi.value.norm() <= IC_ZERO_TOL * xi.derivative.norm() {
        return Err(Error::Degenerate {
            l,
            message: format!("xi_l(kf ra) vanishes at kf ra = {x}"),
        });
    }
    let shell = geometry.sample(geometry.ra, crate::media::Side::Inner)?;
    let material_f = match family {
        Polarization::Te => geometry.exterior.mu,
        Polarization::Tm => geometry.exterior.eps,
    };
    let deriv = kf * transverse(&shell, family) / material_f * xi.derivative / xi.value;
    Ok(PointState { value: Complex64::new(1.0, 0.0), deriv })
}

/// Transport (value, deriv) across one homogeneous segment by the closed
/// form g = A psi_L(k_perp r) + B xi_L(k_perp r). `r_from` and `r_to` are
/// the segment end points in either order.
fn transport_closed(
    sample: &MediumSample,
    k0: f64,
    order: f64,
    state: PointState,
    r_from: f64,
    r_to: f64,
) -> Result<PointState> {
    let k_perp = k0 * branch_sqrt(sample.eps_perp * sample.mu_perp);
    let x0 = k_perp * r_from;
    let x1 = k_perp * r_to;
    let z0p = riccati_psi(order, x0)?;
    let z0x = riccati_xi(order, x0)?;
    // Wronskian psi xi' - psi' xi = -j makes the 2x2 solve explicit.
    let det = Complex64::new(0.0, -1.0) * k_perp;
    let a = (state.value * k_perp * z0x.derivative - state.deriv * z0x.value) / det;
    let b = (state.deriv * z0p.value - state.value * k_perp * z0p.derivative) / det;
    let z1p = riccati_psi(order, x1)?;
    let z1x = riccati_xi(order, x1)?;
    Ok(PointState {
        value: a * z1p.value + b * z1x.value,
        deriv: k_perp * (a * z1p.derivative + b * z1x.derivative),
    })
}

/// Transport across one segment by adaptive integration of Eq. 5.
fn transport_numeric(
    segment: &LayerSegment,
    k0: f64,
    family: Polarization,
    l: u32,
    state: PointState,
    r_from: f64,
    r_to: f64,
    tol: Tolerances,
) -> Result<PointState> {
    let ll1 = (l * (l + 1)) as f64;
    let fd_step = 1e-6 * (segment.r_outer - segment.r_inner);
    let profile = segment.profile.clone();
    let transverse_deriv = move |r: f64| -> Complex64 {
        match &profile {
            SegmentProfile::Constant(_) => Complex64::new(0.0, 0.0),
            SegmentProfile::Radial(p) => {
                let (f, df) = match family {
                    Polarization::Te => (&p.mu_perp, &p.d_mu_perp),
                    Polarization::Tm => (&p.eps_perp, &p.d_eps_perp),
                };
                match df {
                    Some(d) => d(r),
                    None => (f(r + fd_step) - f(r - fd_step)) / (2.0 * fd_step),
                }
            }
        }
    };
    let seg = segment.clone();
    let rhs = move |r: f64, y: &[Complex64; 2]| {
        let s = seg.sample(r);
        let t = transverse(&s, family);
        let p = -transverse_deriv(r) / t;
        let q = k0 * k0 * s.mu_perp * s.eps_perp - anisotropy_ratio(&s, family) * ll1 / (r * r);
        [y[1], -p * y[1] - q * y[0]]
    };
    let y = ode::integrate(rhs, r_from, r_to, [state.value, state.deriv], tol)?;
    Ok(PointState { value: y[0], deriv: y[1] })
}

/// Single-segment closed-form solve (isotropic Eq. 26): transports the IC
/// from the segment's starting interface to the other end.
pub fn solve_closed_isotropic(
    segment: &LayerSegment,
    k0: f64,
    // In an isotropic medium both families satisfy the same scalar equation;
    // the parameter is kept for signature symmetry with the ODE path.
    _family: Polarization,
    l: u32,
    ic: PointState,
    from_inner: bool,
) -> Result<PointState> {
    let r_from = if from_inner { segment.r_inner } else { segment.r_outer };
    let sample = segment.sample(r_from);
    if !sample.is_isotropic() {
        return Err(Error::domain("solve_closed_isotropic", "segment is not isotropic"));
    }
    let (r_to, _) = if from_inner {
        (segment.r_outer, segment.r_inner)
    } else {
        (segment.r_inner, segment.r_outer)
    };
    transport_closed(&sample, k0, l as f64, ic, r_from, r_to)
}

/// Single-segment closed-form solve with the modified degree of Eq. 29/30
/// (uniaxial anisotropy with a real anisotropy ratio).
pub fn solve_closed_anisotropic(
    segment: &LayerSegment,
    k0: f64,
    family: Polarization,
    l: u32,
    ic: PointState,
    from_inner: bool,
) -> Result<PointState> {
    let r_from = if from_inner { segment.r_inner } else { segment.r_outer };
    let r_to = if from_inner { segment.r_outer } else { segment.r_inner };
    let sample = segment.sample(r_from);
    let order = modified_degree(anisotropy_ratio(&sample, family), l)?;
    transport_closed(&sample, k0, order, ic, r_from, r_to)
}

/// Single-segment adaptive solve of Eq. 5 (any profile).
pub fn solve_numeric(
    segment: &LayerSegment,
    k0: f64,
    family: Polarization,
    l: u32,
    ic: PointState,
    from_inner: bool,
    tol: Tolerances,
) -> Result<PointState> {
    let (r_from, r_to) = if from_inner {
        (segment.r_inner, segment.r_outer)
    } else {
        (segment.r_outer, segment.r_inner)
    };
    transport_numeric(segment, k0, family, l, ic, r_from, r_to, tol)
}

fn transport_segment(
    segment: &LayerSegment,
    k0: f64,
    family: Polarization,
    l: u32,
    state: PointState,
    from_inner: bool,
    tol: Tolerances,
) -> Result<PointState> {
    match &segment.profile {
        SegmentProfile::Constant(sample) => {
            match modified_degree(anisotropy_ratio(sample, family), l) {
                Ok(order) => {
                    let (r_from, r_to) = if from_inner {
                        (segment.r_inner, segment.r_outer)
                    } else {
                        (segment.r_outer, segment.r_inner)
                    };
                    transport_closed(sample, k0, order, state, r_from, r_to)
                }
                // Complex anisotropy ratio: no real-order closed form.
                Err(_) => solve_numeric(segment, k0, family, l, state, from_inner, tol),
            }
        }
        SegmentProfile::Radial(_) => solve_numeric(segment, k0, family, l, state, from_inner, tol),
    }
}

/// Magnitudes beyond which the per-segment renormalization kicks in.
const RESCALE_LIMIT: f64 = 1e100;

/// Chain all segments of the shell for one (family, l) pair.
///
/// Forward runs rb -> ra with the Eq.-18 initial conditions (feeding t and
/// Phi); backward runs ra -> rb with the Eq.-23 conditions (feeding rho and
/// Psi). Interface jumps follow Eq. 31.
pub fn propagate_stack(
    geometry: &ShellGeometry,
    k0: f64,
    family: Polarization,
    l: u32,
    direction: Direction,
) -> Result<RadialBoundaryData> {
    propagate_stack_with(geometry, k0, family, l, direction, Tolerances::default())
}

pub fn propagate_stack_with(
    geometry: &ShellGeometry,
    k0: f64,
    family: Polarization,
    l: u32,
    direction: Direction,
    tol: Tolerances,
) -> Result<RadialBoundaryData> {
    let start = match direction {
        Direction::Forward => initial_condition_forward(geometry, k0, family, l)?,
        Direction::Backward => initial_condition_backward(geometry, k0, family, l)?,
    };
    let (end, log_scale) = transport_through(geometry, k0, family, l, start, direction, tol)?;
    let (value_rb, deriv_rb, value_ra, deriv_ra) = match direction {
        Direction::Forward => (start.value, start.deriv, end.value, end.deriv),
        Direction::Backward => (end.value, end.deriv, start.value, start.deriv),
    };
    Ok(RadialBoundaryData {
        family,
        l,
        direction,
        value_rb,
        deriv_rb,
        value_ra,
        deriv_ra,
        log_scale,
    })
}

/// Transport an arbitrary start state through the full stack; returns the
/// end state and the accumulated log renormalization factor.
pub(crate) fn transport_through(
    geometry: &ShellGeometry,
    k0: f64,
    family: Polarization,
    l: u32,
    start: PointState,
    direction: Direction,
    tol: Tolerances,
) -> Result<(PointState, f64)> {
    let n = geometry.segments.len();
    let mut state = start;
    let mut log_scale = 0.0f64;
    let indices: Vec<usize> = match direction {
        Direction::Forward => (0..n).collect(),
        Direction::Backward => (0..n).rev().collect(),
    };
    for (step, &i) in indices.iter().enumerate() {
        let seg = &geometry.segments[i];
        if step > 0 {
            // Interface jump (Eq. 31): value continuous, derivative scaled
            // by the transverse-parameter ratio, entering segment i.
            let (r_if, prev) = match direction {
                Direction::Forward => (seg.r_inner, &geometry.segments[i - 1]),
                Direction::Backward => (seg.r_outer, &geometry.segments[i + 1]),
            };
            let ratio = transverse(&seg.sample(r_if), family)
                / transverse(&prev.sample(r_if), family);
            state.deriv *= ratio;
        }
        let from_inner = direction == Direction::Forward;
        state = transport_segment(seg, k0, family, l, state, from_inner, tol)
            .map_err(|e| e.in_segment(i))?;
        let mag = state.value.norm().max(state.deriv.norm() * geometry.ra);
        if mag > RESCALE_LIMIT || (mag < 1.0 / RESCALE_LIMIT && mag > 0.0) {
            state.value /= mag;
            state.deriv /= mag;
            log_scale += mag.ln();
        }
    }
    Ok((state, log_scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::{HomogeneousRegion, RadialProfile, Side};
    use crate::wavenumber_vacuum;
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn vacuum_shell() -> ShellGeometry {
        ShellGeometry::new(
            0.150,
            0.180,
            HomogeneousRegion::vacuum(),
            HomogeneousRegion::vacuum(),
            vec![LayerSegment::constant(0.150, 0.180, MediumSample::vacuum())],
        )
        .unwrap()
    }

    fn lossy_shell() -> ShellGeometry {
        ShellGeometry::new(
            0.150,
            0.180,
            HomogeneousRegion::vacuum(),
            HomogeneousRegion::vacuum(),
            vec![LayerSegment::constant(
                0.150,
                0.180,
                MediumSample::isotropic(c(5.0, -0.5), c(1.0, 0.0)),
            )],
        )
        .unwrap()
    }

    fn aniso_shell() -> ShellGeometry {
        ShellGeometry::new(
            0.150,
            0.180,
            HomogeneousRegion::vacuum(),
            HomogeneousRegion::vacuum(),
            vec![LayerSegment::constant(
                0.150,
                0.180,
                MediumSample {
                    eps_perp: c(5.0, 0.0),
                    eps_r: c(2.0, 0.0),
                    mu_perp: c(3.0, 0.0),
                    mu_r: c(1.0, 0.0),
                },
            )],
        )
        .unwrap()
    }

    #[test]
    fn modified_degree_values() {
        assert!((modified_degree(c(3.0, 0.0), 1).unwrap() - 2.0).abs() <= 1e-14);
        assert_relative_eq!(
            modified_degree(c(2.5, 0.0), 1).unwrap(),
            5.25f64.sqrt() - 0.5,
            epsilon = 1e-15
        );
        // Isotropic limit collapses to the integer degree exactly.
        for l in 1..=20u32 {
            assert_eq!(modified_degree(c(1.0, 0.0), l).unwrap(), l as f64);
        }
        assert!(modified_degree(c(1.0, 0.5), 1).is_err());
    }

    #[test]
    fn forward_ic_vacuum() {
        let g = vacuum_shell();
        let k0 = wavenumber_vacuum(3.5e9);
        let ic = initial_condition_forward(&g, k0, Polarization::Te, 1).unwrap();
        let x = c(k0 * 0.150, 0.0);
        let psi = riccati_psi(1.0, x).unwrap();
        assert_relative_eq!(ic.value.re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(
            (ic.deriv - k0 * psi.derivative / psi.value).norm(),
            0.0,
            epsilon = 1e-10
        );
    }

    #[test]
    fn backward_ic_vacuum() {
        let g = vacuum_shell();
        let k0 = wavenumber_vacuum(3.5e9);
        let ic = initial_condition_backward(&g, k0, Polarization::Tm, 1).unwrap();
        let xi = riccati_xi(1.0, c(k0 * 0.180, 0.0)).unwrap();
        assert_relative_eq!(
            (ic.deriv - k0 * xi.derivative / xi.value).norm(),
            0.0,
            epsilon = 1e-10
        );
    }

    #[test]
    fn backward_ic_anisotropic_factor() {
        // mu_perp(ra) = 3 scales the TE backward derivative by 3.
        let k0 = wavenumber_vacuum(3.5e9);
        let vac = initial_condition_backward(&vacuum_shell(), k0, Polarization::Te, 1).unwrap();
        let aniso = initial_condition_backward(&aniso_shell(), k0, Polarization::Te, 1).unwrap();
        assert_relative_eq!((aniso.deriv - 3.0 * vac.deriv).norm(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn degenerate_forward_ic_detected() {
        // psi_1 has its first zero where tan x = x, x ~ 4.4934.
        let x_zero = 4.493409457909064f64;
        let rb = 0.150;
        let k0 = x_zero / rb;
        let g = ShellGeometry::new(
            rb,
            0.180,
            HomogeneousRegion::vacuum(),
            HomogeneousRegion::vacuum(),
            vec![LayerSegment::constant(rb, 0.180, MediumSample::vacuum())],
        )
        .unwrap();
        match initial_condition_forward(&g, k0, Polarization::Te, 1) {
            Err(Error::Degenerate { l: 1, .. }) => {}
            other => panic!("expected degenerate IC, got {other:?}"),
        }
    }

    #[test]
    fn vacuum_free_propagation() {
        // Forward through vacuum: g(r) = psi_l(k r) / psi_l(k rb).
        let g = vacuum_shell();
        let k0 = wavenumber_vacuum(3.5e9);
        for l in [1u32, 3, 7] {
            let data = propagate_stack(&g, k0, Polarization::Te, l, Direction::Forward).unwrap();
            let pa = riccati_psi(l as f64, c(k0 * 0.180, 0.0)).unwrap();
            let pb = riccati_psi(l as f64, c(k0 * 0.150, 0.0)).unwrap();
            let expect = pa.value / pb.value;
            assert!((data.value_ratio_ra_over_rb() - expect).norm() <= 1e-12 * expect.norm());
            let expect_d = k0 * pa.derivative / pb.value;
            assert!((data.deriv_ra - expect_d).norm() <= 1e-11 * expect_d.norm());
        }
    }

    fn as_numeric(g: &ShellGeometry) -> ShellGeometry {
        // Rewrap constant segments as trivial radial profiles to force the
        // ODE path.
        let segments = g
            .segments
            .iter()
            .map(|s| {
                let sample = s.sample(s.r_inner);
                LayerSegment::radial(
                    s.r_inner,
                    s.r_outer,
                    RadialProfile {
                        eps_perp: Arc::new(move |_| sample.eps_perp),
                        eps_r: Arc::new(move |_| sample.eps_r),
                        mu_perp: Arc::new(move |_| sample.mu_perp),
                        mu_r: Arc::new(move |_| sample.mu_r),
                        d_eps_perp: Some(Arc::new(|_| c(0.0, 0.0))),
                        d_mu_perp: Some(Arc::new(|_| c(0.0, 0.0))),
                    },
                )
            })
            .collect();
        ShellGeometry { segments, ..g.clone() }
    }

    #[test]
    fn closed_matches_numeric_isotropic() {
        let g = lossy_shell();
        let gn = as_numeric(&g);
        let k0 = wavenumber_vacuum(3.5e9);
        for family in [Polarization::Te, Polarization::Tm] {
            for l in [1u32, 4, 9] {
                for dir in [Direction::Forward, Direction::Backward] {
                    let a = propagate_stack(&g, k0, family, l, dir).unwrap();
                    let b = propagate_stack(&gn, k0, family, l, dir).unwrap();
                    let ra = a.value_ratio_ra_over_rb();
                    let rb = b.value_ratio_ra_over_rb();
                    assert!(
                        (ra - rb).norm() <= 1e-8 * ra.norm(),
                        "value ratio mismatch: family {family:?}, l = {l}, {dir:?}"
                    );
                    assert!((a.ratio_ra() - b.ratio_ra()).norm() <= 1e-8 * a.ratio_ra().norm());
                }
            }
        }
    }

    #[test]
    fn closed_matches_numeric_anisotropic() {
        let g = aniso_shell();
        let gn = as_numeric(&g);
        let k0 = wavenumber_vacuum(3.5e9);
        for family in [Polarization::Te, Polarization::Tm] {
            for l in [1u32, 5] {
                let a = propagate_stack(&g, k0, family, l, Direction::Forward).unwrap();
                let b = propagate_stack(&gn, k0, family, l, Direction::Forward).unwrap();
                let ra = a.value_ratio_ra_over_rb();
                let rb = b.value_ratio_ra_over_rb();
                assert!(
                    (ra - rb).norm() <= 1e-8 * ra.norm(),
                    "family {family:?}, l = {l}: {ra} vs {rb}"
                );
            }
        }
    }

    #[test]
    fn interface_split_invariance() {
        let g = lossy_shell();
        let sample = g.sample(0.160, Side::Inner).unwrap();
        let split = ShellGeometry::new(
            0.150,
            0.180,
            g.bubble,
            g.exterior,
            vec![
                LayerSegment::constant(0.150, 0.1637, sample),
                LayerSegment::constant(0.1637, 0.180, sample),
            ],
        )
        .unwrap();
        let k0 = wavenumber_vacuum(3.5e9);
        for family in [Polarization::Te, Polarization::Tm] {
            for l in [1u32, 6, 12] {
                let a = propagate_stack(&g, k0, family, l, Direction::Forward).unwrap();
                let b = propagate_stack(&split, k0, family, l, Direction::Forward).unwrap();
                let va = a.value_ratio_ra_over_rb();
                let vb = b.value_ratio_ra_over_rb();
                assert!((va - vb).norm() <= 1e-12 * va.norm());
                assert!((a.deriv_ra - b.deriv_ra).norm() <= 1e-11 * a.deriv_ra.norm());
            }
        }
    }

    #[test]
    fn forward_backward_transport_consistency() {
        let g = lossy_shell();
        let k0 = wavenumber_vacuum(3.5e9);
        let tol = Tolerances::default();
        for family in [Polarization::Te, Polarization::Tm] {
            for l in [1u32, 5] {
                let fwd = propagate_stack(&g, k0, family, l, Direction::Forward).unwrap();
                let end = PointState { value: fwd.value_ra, deriv: fwd.deriv_ra };
                let (back, s) =
                    transport_through(&g, k0, family, l, end, Direction::Backward, tol).unwrap();
                let value_rb = back.value * s.exp() * fwd.log_scale.exp();
                let deriv_rb = back.deriv * s.exp() * fwd.log_scale.exp();
                assert!((value_rb - fwd.value_rb).norm() <= 1e-8);
                assert!((deriv_rb - fwd.deriv_rb).norm() <= 1e-8 * fwd.deriv_rb.norm());
            }
        }
    }

    #[test]
    fn continuous_profile_solves() {
        // eps_perp = 2 + ln(2/r - 5), eps_r = 1/r (r in meters): a smooth
        // profile exercised end to end through the ODE path.
        let profile = RadialProfile {
            eps_perp: Arc::new(|r| c(2.0 + (2.0 / r - 5.0).ln(), 0.0)),
            eps_r: Arc::new(|r| c(1.0 / r, 0.0)),
            mu_perp: Arc::new(|_| c(1.0, 0.0)),
            mu_r: Arc::new(|_| c(1.0, 0.0)),
            d_eps_perp: None,
            d_mu_perp: None,
        };
        let g = ShellGeometry::new(
            0.150,
            0.180,
            HomogeneousRegion::vacuum(),
            HomogeneousRegion::vacuum(),
            vec![LayerSegment::radial(0.150, 0.180, profile)],
        )
        .unwrap();
        let k0 = wavenumber_vacuum(3.5e9);
        let data = propagate_stack(&g, k0, Polarization::Tm, 2, Direction::Forward).unwrap();
        assert!(data.value_ra.is_finite() && data.deriv_ra.is_finite());
        // Staircase approximations converge to the ODE solution.
        let coarse = propagate_stack(
            &g.staircase(5).unwrap(),
            k0,
            Polarization::Tm,
            2,
            Direction::Forward,
        )
        .unwrap();
        let fine = propagate_stack(
            &g.staircase(80).unwrap(),
            k0,
            Polarization::Tm,
            2,
            Direction::Forward,
        )
        .unwrap();
        let truth = data.value_ratio_ra_over_rb();
        let err_coarse = (coarse.value_ratio_ra_over_rb() - truth).norm() / truth.norm();
        let err_fine = (fine.value_ratio_ra_over_rb() - truth).norm() / truth.norm();
        assert!(err_fine < err_coarse);
        assert!(err_fine < 1e-4, "fine staircase error {err_fine}");
    }
}
