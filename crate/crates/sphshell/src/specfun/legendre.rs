//! Normalized associated Legendre functions and the derived angular
//! functions pi_l^m = m P~_l^m / sin(theta) and tau_l^m = d P~_l^m / d theta.
//!
//! The normalization is unit L2 norm on [-1, 1]:
//! integral of [P~_l^m(u)]^2 du = 1, with no Condon-Shortley phase.
//!
//! All recurrences run on the pole-regular functions
//! S_l^m = P~_l^m / sin^m(theta), so the values stay finite and accurate
//! arbitrarily close to theta = 0 and pi.

use crate::error::{Error, Result};

/// P~, pi and tau for a single (l, m) at a fixed colatitude.
#[derive(Debug, Clone, Copy, Default)]
pub struct AngularFunctions {
    /// P~_l^m(cos theta).
    pub p: f64,
    /// m P~_l^m / sin theta (finite at the poles).
    pub pi: f64,
    /// d P~_l^m / d theta.
    pub tau: f64,
}

/// All angular functions with l <= lmax at one colatitude.
#[derive(Debug, Clone)]
pub struct AngularTable {
    lmax: u32,
    /// rows[m][l], zero-padded for l < max(m, 1).
    rows: Vec<Vec<AngularFunctions>>,
}

/// S_l^m = P~_l^m / sin^m for l = 0..=lmax (entries below l = m are zero).
fn s_ladder(lmax: u32, m: u32, u: f64) -> Vec<f64> {
    let lmax = lmax as usize;
    let m = m as usize;
    let mut s = vec![0.0; lmax + 1];
    if m > lmax {
        return s;
    }
    // c_m = sqrt((2m+1)/2 * (2m-1)!! / (2m)!!), built up iteratively.
    let mut c = std::f64::consts::FRAC_1_SQRT_2;
    for k in 1..=m {
        c *= ((2 * k + 1) as f64 / (2 * k) as f64).sqrt();
    }
    s[m] = c;
    if m + 1 <= lmax {
        s[m + 1] = ((2 * m + 3) as f64).sqrt() * u * s[m];
    }
    for l in (m + 2)..=lmax {
        let lf = l as f64;
        let mf = m as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
            .sqrt();
        s[l] = a * (u * s[l - 1] - b * s[l - 2]);
    }
    s
}

impl AngularTable {
    pub fn new(lmax: u32, theta: f64) -> Self {
        let u = theta.cos();
        let sin = theta.sin().max(0.0); // theta in [0, pi]; guard tiny negatives
        let n = lmax as usize + 1;
        let mut rows = vec![vec![AngularFunctions::default(); n]; n];

        let s1 = s_ladder(lmax, 1, u); // needed for tau at m = 0
        for m in 0..=lmax {
            let s = if m == 1 { s1.clone() } else { s_ladder(lmax, m, u) };
            let mf = m as f64;
            // sin^m and sin^(m-1), with sin^0 = 1 even at the poles.
            let sin_m = sin.powi(m as i32);
            let sin_m1 = if m == 0 { 0.0 } else { sin.powi(m as i32 - 1) };
            for l in m.max(1)..=lmax {
                let lf = l as f64;
                let li = l as usize;
                let p = s[li] * sin_m;
                let pi = mf * s[li] * sin_m1;
                let tau = if m == 0 {
                    // d P~_l^0 / d theta = -sqrt(l(l+1)) P~_l^1.
                    -(lf * (lf + 1.0)).sqrt() * s1[li] * sin
                } else {
                    let f = if li == m as usize {
                        0.0
                    } else {
                        ((lf * lf - mf * mf) * (2.0 * lf + 1.0) / (2.0 * lf - 1.0)).sqrt()
                            * s[li - 1]
                    };
                    sin_m1 * (lf * u * s[li] - f)
                };
                rows[m as usize][li] = AngularFunctions { p, pi, tau };
            }
        }
        AngularTable { lmax, rows }
    }

    pub fn lmax(&self) -> u32 {
        self.lmax
    }

    pub fn get(&self, l: u32, m: u32) -> AngularFunctions {
        debug_assert!(l <= self.lmax && m <= l);
        self.rows[m as usize][l as usize]
    }
}

/// P~_l^m(u), normalized to unit L2 norm on [-1, 1].
pub fn legendre_normalized(l: u32, m: u32, u: f64) -> Result<f64> {
    if m > l {
        return Err(Error::domain("legendre_normalized", format!("m = {m} exceeds l = {l}")));
    }
    if !(-1.0..=1.0).contains(&u) {
        return Err(Error::domain("legendre_normalized", format!("|u| must be <= 1, got {u}")));
    }
    let sin = (1.0 - u * u).max(0.0).sqrt();
    Ok(s_ladder(l, m, u)[l as usize] * sin.powi(m as i32))
}
