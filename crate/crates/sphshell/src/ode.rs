//! Adaptive Dormand-Prince 5(4) integration for small complex-valued systems.
//!
//! The radial wave equations are second-order scalar ODEs integrated as
//! first-order systems of two complex components, so the stepper is written
//! for a fixed-size complex state rather than a generic container.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Integration tolerances and limits.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rel: 1e-10, abs: 1e-12, max_steps: 1_000_000 }
    }
}

// Dormand-Prince 5(4) Butcher tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
// 5th-order weights equal the last row of A (FSAL); the embedded 4th-order
// weights are below.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// State vector of `N` complex components.
pub type State<const N: usize> = [Complex64; N];

fn axpy<const N: usize>(y: &State<N>, h: f64, coeffs: &[f64], k: &[State<N>]) -> State<N> {
    let mut out = *y;
    for (c, ki) in coeffs.iter().zip(k.iter()) {
        if *c == 0.0 {
            continue;
        }
        for i in 0..N {
            out[i] += h * c * ki[i];
        }
    }
    out
}

/// Integrate `dy/dt = f(t, y)` from `t0` to `t1` (either direction).
///
/// Returns the state at `t1`. On step-size underflow the error carries the
/// abscissa where the integration stalled.
pub fn integrate<const N: usize, F>(
    f: F,
    t0: f64,
    t1: f64,
    y0: State<N>,
    tol: Tolerances,
) -> Result<State<N>>
where
    F: Fn(f64, &State<N>) -> State<N>,
{
    if t0 == t1 {
        return Ok(y0);
    }
    let span = t1 - t0;
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0;
    let mut h = span / 100.0;
    let h_min = span.abs() * 1e-14;
    let mut k0 = f(t, &y);

    for _ in 0..tol.max_steps {
        if (t - t1) * dir >= 0.0 {
            return Ok(y);
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        let mut k = [k0; 7];
        for s in 0..6 {
            let ys = axpy(&y, h, &A[s][..=s], &k[..=s]);
            k[s + 1] = f(t + C[s] * h, &ys);
        }
        // 5th-order solution (FSAL: weights are A[5], stages k0..k5).
        let y5 = axpy(&y, h, &A[5], &k[..6]);
        let y4 = axpy(&y, h, &B4, &k[..7]);

        let mut err: f64 = 0.0;
        for i in 0..N {
            let scale = tol.abs + tol.rel * y[i].norm().max(y5[i].norm());
            err = err.max((y5[i] - y4[i]).norm() / scale);
        }

        if err <= 1.0 {
            t += h;
            y = y5;
            k0 = k[6]; // FSAL
        }
        let factor = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
        h *= factor.clamp(0.2, 5.0);
        if h.abs() < h_min {
            return Err(Error::Stiffness {
                radius: t,
                message: format!("step size underflow ({h:.3e} after reaching t = {t:.6e})"),
            });
        }
    }
    Err(Error::Stiffness { radius: t, message: "maximum step count exceeded".into() })
}
