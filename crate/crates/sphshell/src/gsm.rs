//! Antenna generalized scattering matrix (GSM) data model, interchange file
//! I/O, and the composition algebra producing the effective embedded-system
//! GSM (Eq. 9-15).
//!
//! The antenna GSM relates waveguide-port amplitudes (v in, w out) and
//! spherical-wave amplitudes in the bubble (a^b incident, f^b outgoing):
//!
//! ```text
//! w   = Gamma v + (1/2) R a^b
//! f^b = T v + (1/2) (S - 1) a^b
//! ```
//!
//! Composing with a shell's scattering operators eliminates the bubble
//! amplitudes and yields the same relations between v, w and the exterior
//! amplitudes a^f, f^f with tilded matrices.

use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{lu_factor, matmul};
use crate::media::ShellGeometry;
use crate::specfun::mode::mode_count;
use crate::sso::SsoSet;

/// Interchange files newer than this are rejected.
const FORMAT_VERSION: u32 = 1;

/// The only mode ordering this crate reads or writes.
const MODE_ORDERING: &str = "canonical-v1";

/// Two antenna frequencies count as the same sample within this tolerance.
const FREQUENCY_TOL_HZ: f64 = 1.0;

/// Composition fails when the conditioning proxy of M indicates a condition
/// number beyond this.
const CONDITION_LIMIT: f64 = 1e12;

/// Free-space antenna GSM at a single frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaGsm {
    pub frequency_hz: f64,
    pub lmax: u32,
    /// P x P port reflection block.
    pub gamma: Array2<Complex64>,
    /// P x N receive block.
    pub r: Array2<Complex64>,
    /// N x P transmit block.
    pub t: Array2<Complex64>,
    /// N x N spherical scattering block.
    pub s: Array2<Complex64>,
}

impl AntennaGsm {
    pub fn new(
        frequency_hz: f64,
        lmax: u32,
        gamma: Array2<Complex64>,
        r: Array2<Complex64>,
        t: Array2<Complex64>,
        s: Array2<Complex64>,
    ) -> Result<Self> {
        let n = mode_count(lmax);
        let p = gamma.nrows();
        if gamma.ncols() != p {
            return Err(Error::Dimension(format!(
                "Gamma must be square, got {}x{}",
                gamma.nrows(),
                gamma.ncols()
            )));
        }
        for (name, m, rows, cols) in
            [("R", &r, p, n), ("T", &t, n, p), ("S", &s, n, n)]
        {
            if m.dim() != (rows, cols) {
                return Err(Error::Dimension(format!(
                    "{name} must be {rows}x{cols} for P = {p}, Lmax = {lmax}; got {}x{}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(AntennaGsm { frequency_hz, lmax, gamma, r, t, s })
    }

    pub fn num_ports(&self) -> usize {
        self.gamma.nrows()
    }

    pub fn mode_count(&self) -> usize {
        mode_count(self.lmax)
    }
}

/// Effective GSM of antenna plus shell (the tilded matrices of Eq. 14).
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveGsm {
    pub frequency_hz: f64,
    pub lmax: u32,
    pub gamma: Array2<Complex64>,
    pub r: Array2<Complex64>,
    pub t: Array2<Complex64>,
    pub s: Array2<Complex64>,
}

impl EffectiveGsm {
    pub fn num_ports(&self) -> usize {
        self.gamma.nrows()
    }

    pub fn mode_count(&self) -> usize {
        mode_count(self.lmax)
    }
}

/// Observable amplitudes for one excitation (Eq. 15).
#[derive(Debug, Clone, PartialEq)]
pub struct SystemResponse {
    /// Reflected waveguide amplitudes, one per port.
    pub w: Vec<Complex64>,
    /// Outgoing exterior spherical-wave amplitudes, one per mode.
    pub f_f: Vec<Complex64>,
}

/// A multi-frequency antenna GSM as stored in an interchange file, with the
/// bubble-medium metadata the free-space solve assumed.
#[derive(Debug, Clone)]
pub struct GsmSet {
    pub lmax: u32,
    pub num_ports: usize,
    pub bubble_eps: Complex64,
    pub bubble_mu: Complex64,
    pub entries: Vec<AntennaGsm>,
}

impl GsmSet {
    /// The entry matching `frequency_hz` to within 1 Hz, if any.
    pub fn at_frequency(&self, frequency_hz: f64) -> Option<&AntennaGsm> {
        self.entries
            .iter()
            .find(|e| (e.frequency_hz - frequency_hz).abs() <= FREQUENCY_TOL_HZ)
    }

    /// Check the recorded bubble medium against a shell geometry.
    pub fn check_bubble(&self, geometry: &ShellGeometry) -> Result<()> {
        let de = (self.bubble_eps - geometry.bubble.eps).norm();
        let dm = (self.bubble_mu - geometry.bubble.mu).norm();
        if de > 1e-12 * self.bubble_eps.norm().max(1.0)
            || dm > 1e-12 * self.bubble_mu.norm().max(1.0)
        {
            return Err(Error::GsmFormat(format!(
                "antenna GSM was computed in bubble medium eps = {}, mu = {}, \
                 but the geometry's bubble is eps = {}, mu = {}",
                self.bubble_eps, self.bubble_mu, geometry.bubble.eps, geometry.bubble.mu
            )));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Interchange file format (JSON, format_version 1).
// ---------------------------------------------------------------------------

type MatRepr = Vec<Vec<[f64; 2]>>;

#[derive(Serialize, Deserialize)]
struct BlockRepr {
    gamma: MatRepr,
    r: MatRepr,
    t: MatRepr,
    s: MatRepr,
}

#[derive(Serialize, Deserialize)]
struct FileRepr {
    format_version: u32,
    lmax: u32,
    num_ports: usize,
    mode_ordering: String,
    bubble_eps: [f64; 2],
    bubble_mu: [f64; 2],
    frequencies_hz: Vec<f64>,
    blocks: Vec<BlockRepr>,
}

fn matrix_to_repr(m: &Array2<Complex64>) -> MatRepr {
    m.rows().into_iter().map(|row| row.iter().map(|z| [z.re, z.im]).collect()).collect()
}

fn matrix_from_repr(name: &str, repr: &MatRepr, rows: usize, cols: usize) -> Result<Array2<Complex64>> {
    if repr.len() != rows || repr.iter().any(|r| r.len() != cols) {
        return Err(Error::GsmFormat(format!(
            "block `{name}` must be {rows}x{cols}, got {}x{}",
            repr.len(),
            repr.first().map_or(0, Vec::len)
        )));
    }
    Ok(Array2::from_shape_fn((rows, cols), |(i, j)| {
        Complex64::new(repr[i][j][0], repr[i][j][1])
    }))
}

/// Read a multi-frequency antenna GSM from an interchange file.
pub fn load_gsm(path: impl AsRef<Path>) -> Result<GsmSet> {
    let text = std::fs::read_to_string(path.as_ref())?;
    let repr: FileRepr = serde_json::from_str(&text)
        .map_err(|e| Error::GsmFormat(format!("{}: {e}", path.as_ref().display())))?;
    if repr.format_version != FORMAT_VERSION {
        return Err(Error::GsmFormat(format!(
            "unknown format_version {} (supported: {FORMAT_VERSION})",
            repr.format_version
        )));
    }
    if repr.mode_ordering != MODE_ORDERING {
        return Err(Error::GsmFormat(format!(
            "unknown mode_ordering `{}` (supported: `{MODE_ORDERING}`)",
            repr.mode_ordering
        )));
    }
    if repr.blocks.len() != repr.frequencies_hz.len() {
        return Err(Error::GsmFormat(format!(
            "{} frequencies but {} blocks",
            repr.frequencies_hz.len(),
            repr.blocks.len()
        )));
    }
    let n = mode_count(repr.lmax);
    let p = repr.num_ports;
    let entries = repr
        .frequencies_hz
        .iter()
        .zip(&repr.blocks)
        .map(|(&f, b)| {
            AntennaGsm::new(
                f,
                repr.lmax,
                matrix_from_repr("gamma", &b.gamma, p, p)?,
                matrix_from_repr("r", &b.r, p, n)?,
                matrix_from_repr("t", &b.t, n, p)?,
                matrix_from_repr("s", &b.s, n, n)?,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GsmSet {
        lmax: repr.lmax,
        num_ports: p,
        bubble_eps: Complex64::new(repr.bubble_eps[0], repr.bubble_eps[1]),
        bubble_mu: Complex64::new(repr.bubble_mu[0], repr.bubble_mu[1]),
        entries,
    })
}

/// Write a multi-frequency antenna GSM to an interchange file.
pub fn save_gsm(set: &GsmSet, path: impl AsRef<Path>) -> Result<()> {
    for e in &set.entries {
        if e.lmax != set.lmax || e.num_ports() != set.num_ports {
            return Err(Error::Dimension(format!(
                "entry at {} Hz has lmax = {}, P = {}; the set declares lmax = {}, P = {}",
                e.frequency_hz,
                e.lmax,
                e.num_ports(),
                set.lmax,
                set.num_ports
            )));
        }
    }
    let repr = FileRepr {
        format_version: FORMAT_VERSION,
        lmax: set.lmax,
        num_ports: set.num_ports,
        mode_ordering: MODE_ORDERING.into(),
        bubble_eps: [set.bubble_eps.re, set.bubble_eps.im],
        bubble_mu: [set.bubble_mu.re, set.bubble_mu.im],
        frequencies_hz: set.entries.iter().map(|e| e.frequency_hz).collect(),
        blocks: set
            .entries
            .iter()
            .map(|e| BlockRepr {
                gamma: matrix_to_repr(&e.gamma),
                r: matrix_to_repr(&e.r),
                t: matrix_to_repr(&e.t),
                s: matrix_to_repr(&e.s),
            })
            .collect(),
    };
    let text = serde_json::to_string(&repr).expect("serialization cannot fail");
    std::fs::write(path, text)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Composition algebra.
// ---------------------------------------------------------------------------

fn check_compatible(antenna: &AntennaGsm, sso: &SsoSet) -> Result<()> {
    if antenna.lmax != sso.lmax {
        return Err(Error::Composition {
            frequency_hz: antenna.frequency_hz,
            message: format!("antenna Lmax = {} but SSO Lmax = {}", antenna.lmax, sso.lmax),
        });
    }
    if (antenna.frequency_hz - sso.frequency_hz).abs() > FREQUENCY_TOL_HZ {
        return Err(Error::Composition {
            frequency_hz: antenna.frequency_hz,
            message: format!("SSO was assembled at {} Hz", sso.frequency_hz),
        });
    }
    Ok(())
}

/// M = 1 - (1/2)(S - 1) rho, formed as a column scaling (rho is diagonal).
fn multiple_scattering_matrix(antenna: &AntennaGsm, sso: &SsoSet) -> Array2<Complex64> {
    let n = antenna.mode_count();
    Array2::from_shape_fn((n, n), |(i, j)| {
        let delta = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
        let s_minus_1 = antenna.s[[i, j]] - delta;
        delta - 0.5 * s_minus_1 * sso.rho[j]
    })
}

fn factor_m(antenna: &AntennaGsm, sso: &SsoSet) -> Result<crate::linalg::LuFactors> {
    let m = multiple_scattering_matrix(antenna, sso);
    let lu = lu_factor(&m).map_err(|e| Error::Composition {
        frequency_hz: antenna.frequency_hz,
        message: format!("multiple-scattering matrix M: {e}"),
    })?;
    if lu.rcond_proxy() < 1.0 / CONDITION_LIMIT {
        return Err(Error::Composition {
            frequency_hz: antenna.frequency_hz,
            message: format!(
                "multiple-scattering matrix M is ill-conditioned (proxy {:.2e})",
                lu.rcond_proxy()
            ),
        });
    }
    Ok(lu)
}

/// Effective GSM of the antenna embedded in the shell (Eq. 14):
///
/// ```text
/// Gamma~ = Gamma + (1/2) R rho M^-1 T
/// R~     = R [Phi + rho M^-1 (1/2)(S - 1) Phi]
/// T~     = Psi M^-1 T
/// S~     = 1 + 2t + Psi M^-1 (S - 1) Phi
/// ```
///
/// with M = 1 - (1/2)(S - 1) rho. All M^-1 applications are linear solves
/// against right-hand sides; M is never inverted explicitly.
pub fn compose(antenna: &AntennaGsm, sso: &SsoSet) -> Result<EffectiveGsm> {
    check_compatible(antenna, sso)?;
    let n = antenna.mode_count();
    let lu = factor_m(antenna, sso)?;

    // X = (1/2)(S - 1) Phi (column scaling), then M^-1 X and M^-1 T.
    let x = Array2::from_shape_fn((n, n), |(i, j)| {
        let delta = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
        0.5 * (antenna.s[[i, j]] - delta) * sso.phi[j]
    });
    let minv_x = lu.solve_columns(&x)?;
    let minv_t = lu.solve_columns(&antenna.t)?;

    // Row scalings by the diagonal operators.
    let rho_minv_t =
        Array2::from_shape_fn(minv_t.dim(), |(i, j)| 0.5 * sso.rho[i] * minv_t[[i, j]]);
    let gamma = &antenna.gamma + &matmul(&antenna.r, &rho_minv_t)?;

    let inner = Array2::from_shape_fn((n, n), |(i, j)| {
        let delta = if i == j { sso.phi[j] } else { Complex64::new(0.0, 0.0) };
        delta + sso.rho[i] * minv_x[[i, j]]
    });
    let r = matmul(&antenna.r, &inner)?;

    let t = Array2::from_shape_fn(minv_t.dim(), |(i, j)| sso.psi[i] * minv_t[[i, j]]);

    let s = Array2::from_shape_fn((n, n), |(i, j)| {
        let delta = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
        delta + 2.0 * if i == j { sso.t[i] } else { Complex64::new(0.0, 0.0) }
            + 2.0 * sso.psi[i] * minv_x[[i, j]]
    });

    Ok(EffectiveGsm { frequency_hz: antenna.frequency_hz, lmax: antenna.lmax, gamma, r, t, s })
}

/// Only the port block Gamma~ of the composition, solving against the P
/// columns of T instead of the full N x N right-hand side. This is the cheap
/// path for S-parameter sweeps.
pub fn compose_ports_only(antenna: &AntennaGsm, sso: &SsoSet) -> Result<Array2<Complex64>> {
    check_compatible(antenna, sso)?;
    let lu = factor_m(antenna, sso)?;
    let minv_t = lu.solve_columns(&antenna.t)?;
    let rho_minv_t =
        Array2::from_shape_fn(minv_t.dim(), |(i, j)| 0.5 * sso.rho[i] * minv_t[[i, j]]);
    Ok(&antenna.gamma + &matmul(&antenna.r, &rho_minv_t)?)
}

/// Observable amplitudes for port drive `v` and incident exterior field
/// `a_f` (Eq. 15): w = Gamma~ v + (1/2) R~ a^f, f^f = T~ v + (1/2)(S~ - 1) a^f.
pub fn respond(eff: &EffectiveGsm, v: &[Complex64], a_f: &[Complex64]) -> Result<SystemResponse> {
    let p = eff.num_ports();
    let n = eff.mode_count();
    if v.len() != p {
        return Err(Error::Dimension(format!("v has {} entries, expected P = {p}", v.len())));
    }
    if a_f.len() != n {
        return Err(Error::Dimension(format!("a_f has {} entries, expected N = {n}", a_f.len())));
    }
    let mut w = vec![Complex64::new(0.0, 0.0); p];
    for i in 0..p {
        for j in 0..p {
            w[i] += eff.gamma[[i, j]] * v[j];
        }
        for j in 0..n {
            w[i] += 0.5 * eff.r[[i, j]] * a_f[j];
        }
    }
    let mut f_f = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        for j in 0..p {
            f_f[i] += eff.t[[i, j]] * v[j];
        }
        for j in 0..n {
            let delta = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            f_f[i] += 0.5 * (eff.s[[i, j]] - delta) * a_f[j];
        }
    }
    Ok(SystemResponse { w, f_f })
}

/// Synthetic antenna that neither radiates, receives nor scatters
/// (S = 1, T = 0, R = 0, Gamma = 0): every shell scenario can be exercised
/// without an external full-wave solver.
pub fn transparent_antenna(frequency_hz: f64, lmax: u32, num_ports: usize) -> AntennaGsm {
    let n = mode_count(lmax);
    AntennaGsm::new(
        frequency_hz,
        lmax,
        Array2::zeros((num_ports, num_ports)),
        Array2::zeros((num_ports, n)),
        Array2::zeros((n, num_ports)),
        Array2::eye(n),
    )
    .expect("dimensions are consistent by construction")
}

/// Synthetic single-port antenna with a fully reflective port and no
/// spherical coupling (S = 1, R = 0, T = 0, Gamma = 1).
pub fn null_antenna(frequency_hz: f64, lmax: u32) -> AntennaGsm {
    let n = mode_count(lmax);
    AntennaGsm::new(
        frequency_hz,
        lmax,
        Array2::eye(1),
        Array2::zeros((1, n)),
        Array2::zeros((n, 1)),
        Array2::eye(n),
    )
    .expect("dimensions are consistent by construction")
}

/// The SSO of a perfectly transparent shell (t = 0, rho = 0, Phi = Psi = 1).
pub fn identity_sso(frequency_hz: f64, lmax: u32) -> SsoSet {
    let n = mode_count(lmax);
    SsoSet {
        frequency_hz,
        lmax,
        t: vec![Complex64::new(0.0, 0.0); n],
        phi: vec![Complex64::new(1.0, 0.0); n],
        rho: vec![Complex64::new(0.0, 0.0); n],
        psi: vec![Complex64::new(1.0, 0.0); n],
    }
}

/// Randomized GSM/SSO builders shared by the in-crate validation suites.
#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub(crate) fn random_matrix(
        rng: &mut ChaCha8Rng,
        rows: usize,
        cols: usize,
        scale: f64,
    ) -> Array2<Complex64> {
        Array2::from_shape_fn((rows, cols), |_| {
            c(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
        })
    }

    pub(crate) fn random_antenna(seed: u64, p: usize, lmax: u32, f: f64) -> AntennaGsm {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = mode_count(lmax);
        // Keep S close to the identity so the multiple-scattering series is
        // comfortably contractive in random tests.
        let mut s = random_matrix(&mut rng, n, n, 0.3 / n as f64);
        for i in 0..n {
            s[[i, i]] += 1.0;
        }
        AntennaGsm::new(
            f,
            lmax,
            random_matrix(&mut rng, p, p, 0.5),
            random_matrix(&mut rng, p, n, 0.5),
            random_matrix(&mut rng, n, p, 0.5),
            s,
        )
        .unwrap()
    }

    pub(crate) fn random_sso(seed: u64, lmax: u32, f: f64) -> SsoSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = mode_count(lmax);
        let mut draw = |scale: f64, offset: Complex64| -> Vec<Complex64> {
            (0..n)
                .map(|_| offset + c(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)))
                .collect()
        };
        SsoSet {
            frequency_hz: f,
            lmax,
            t: draw(0.4, c(0.0, 0.0)),
            phi: draw(0.4, c(0.8, 0.0)),
            rho: draw(0.4, c(0.0, 0.0)),
            psi: draw(0.4, c(0.8, 0.0)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::testutil::{random_antenna, random_matrix, random_sso};
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn max_abs_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn vacuum_sso_composition_is_identity() {
        let antenna = random_antenna(11, 5, 3, 2.0e9);
        let eff = compose(&antenna, &identity_sso(2.0e9, 3)).unwrap();
        assert!(max_abs_diff(&eff.gamma, &antenna.gamma) <= 1e-12);
        assert!(max_abs_diff(&eff.r, &antenna.r) <= 1e-12);
        assert!(max_abs_diff(&eff.t, &antenna.t) <= 1e-12);
        assert!(max_abs_diff(&eff.s, &antenna.s) <= 1e-12);
    }

    #[test]
    fn transparent_antenna_reduces_to_shell() {
        // S = 1, T = 0, R = 0: the ports never couple, so S~ = 1 + 2t,
        // Gamma~ = Gamma, R~ = 0, T~ = 0.
        let lmax = 2;
        let n = mode_count(lmax);
        let p = 2;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let gamma = random_matrix(&mut rng, p, p, 0.5);
        let antenna = AntennaGsm::new(
            1.0e9,
            lmax,
            gamma.clone(),
            Array2::zeros((p, n)),
            Array2::zeros((n, p)),
            Array2::eye(n),
        )
        .unwrap();
        let sso = random_sso(5, lmax, 1.0e9);
        let eff = compose(&antenna, &sso).unwrap();
        assert!(max_abs_diff(&eff.gamma, &gamma) <= 1e-14);
        assert!(eff.r.iter().all(|z| z.norm() <= 1e-14));
        assert!(eff.t.iter().all(|z| z.norm() <= 1e-14));
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { 1.0 + 2.0 * sso.t[i] } else { c(0.0, 0.0) };
                assert!((eff.s[[i, j]] - expect).norm() <= 1e-14);
            }
        }
    }

    #[test]
    fn ports_only_matches_full_composition() {
        let antenna = random_antenna(21, 4, 3, 2.0e9);
        let sso = random_sso(22, 3, 2.0e9);
        let full = compose(&antenna, &sso).unwrap();
        let gamma = compose_ports_only(&antenna, &sso).unwrap();
        assert!(max_abs_diff(&full.gamma, &gamma) <= 1e-13);
    }

    #[test]
    fn respond_is_linear() {
        let antenna = random_antenna(31, 3, 2, 1.5e9);
        let sso = random_sso(32, 2, 1.5e9);
        let eff = compose(&antenna, &sso).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let n = eff.mode_count();
        let p = eff.num_ports();
        let draw = |rng: &mut ChaCha8Rng, len: usize| -> Vec<Complex64> {
            (0..len).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
        };
        let v1 = draw(&mut rng, p);
        let v2 = draw(&mut rng, p);
        let a1 = draw(&mut rng, n);
        let a2 = draw(&mut rng, n);
        let (alpha, beta) = (c(0.3, -1.1), c(-0.7, 0.2));

        let combined_v: Vec<_> = v1.iter().zip(&v2).map(|(x, y)| alpha * x + beta * y).collect();
        let combined_a: Vec<_> = a1.iter().zip(&a2).map(|(x, y)| alpha * x + beta * y).collect();
        let lhs = respond(&eff, &combined_v, &combined_a).unwrap();
        let r1 = respond(&eff, &v1, &a1).unwrap();
        let r2 = respond(&eff, &v2, &a2).unwrap();
        for i in 0..p {
            assert!((lhs.w[i] - (alpha * r1.w[i] + beta * r2.w[i])).norm() <= 1e-12);
        }
        for i in 0..n {
            assert!((lhs.f_f[i] - (alpha * r1.f_f[i] + beta * r2.f_f[i])).norm() <= 1e-12);
        }
        // Zero excitation gives zero response.
        let zero = respond(&eff, &vec![c(0.0, 0.0); p], &vec![c(0.0, 0.0); n]).unwrap();
        assert!(zero.w.iter().all(|z| z.norm() == 0.0));
        assert!(zero.f_f.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("antenna.gsm.json");
        let set = GsmSet {
            lmax: 2,
            num_ports: 3,
            bubble_eps: c(1.0, 0.0),
            bubble_mu: c(1.0, 0.0),
            entries: vec![random_antenna(41, 3, 2, 1.0e9), random_antenna(42, 3, 2, 1.1e9)],
        };
        save_gsm(&set, &path).unwrap();
        let loaded = load_gsm(&path).unwrap();
        assert_eq!(loaded.lmax, set.lmax);
        assert_eq!(loaded.num_ports, set.num_ports);
        assert_eq!(loaded.entries.len(), 2);
        for (a, b) in loaded.entries.iter().zip(&set.entries) {
            assert_eq!(a.frequency_hz.to_bits(), b.frequency_hz.to_bits());
            for (name, x, y) in [
                ("gamma", &a.gamma, &b.gamma),
                ("r", &a.r, &b.r),
                ("t", &a.t, &b.t),
                ("s", &a.s, &b.s),
            ] {
                for (i, (za, zb)) in x.iter().zip(y.iter()).enumerate() {
                    assert!(
                        za.re.to_bits() == zb.re.to_bits() && za.im.to_bits() == zb.im.to_bits(),
                        "block {name} entry {i}: {za} != {zb}"
                    );
                }
            }
        }
        assert!(loaded.at_frequency(1.1e9).is_some());
        assert!(loaded.at_frequency(1.05e9).is_none());
    }

    #[test]
    fn malformed_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");

        std::fs::write(&path, "{\"format_version\": 1").unwrap();
        assert!(matches!(load_gsm(&path), Err(Error::GsmFormat(_))));

        // Valid JSON but missing the `s` block.
        std::fs::write(
            &path,
            r#"{"format_version":1,"lmax":1,"num_ports":1,"mode_ordering":"canonical-v1",
                "bubble_eps":[1,0],"bubble_mu":[1,0],"frequencies_hz":[1e9],
                "blocks":[{"gamma":[[[0,0]]],"r":[[]],"t":[]}]}"#,
        )
        .unwrap();
        let err = load_gsm(&path).unwrap_err();
        assert!(err.to_string().contains('s'), "error should name the missing block: {err}");

        // Wrong version.
        std::fs::write(
            &path,
            r#"{"format_version":7,"lmax":1,"num_ports":0,"mode_ordering":"canonical-v1",
                "bubble_eps":[1,0],"bubble_mu":[1,0],"frequencies_hz":[],"blocks":[]}"#,
        )
        .unwrap();
        let err = load_gsm(&path).unwrap_err();
        assert!(err.to_string().contains("format_version"), "{err}");
    }

    #[test]
    fn composition_preconditions() {
        let antenna = random_antenna(51, 2, 2, 1.0e9);
        // Lmax mismatch.
        assert!(compose(&antenna, &identity_sso(1.0e9, 3)).is_err());
        // Frequency mismatch beyond 1 Hz.
        assert!(compose(&antenna, &identity_sso(1.0e9 + 10.0, 2)).is_err());
        // Within 1 Hz is accepted.
        assert!(compose(&antenna, &identity_sso(1.0e9 + 0.5, 2)).is_ok());
    }

    #[test]
    fn singular_m_is_reported() {
        // S = 1 + 2/rho on the diagonal makes M = 1 - (1/2)(S-1) rho = 0.
        let lmax = 1;
        let n = mode_count(lmax);
        let mut s = Array2::<Complex64>::eye(n);
        for i in 0..n {
            s[[i, i]] += 2.0;
        }
        let antenna =
            AntennaGsm::new(1.0e9, lmax, Array2::eye(1), Array2::zeros((1, n)), Array2::zeros((n, 1)), s)
                .unwrap();
        let mut sso = identity_sso(1.0e9, lmax);
        sso.rho = vec![c(1.0, 0.0); n];
        let err = compose(&antenna, &sso).unwrap_err();
        assert!(matches!(err, Error::Composition { .. }), "{err}");
    }

    #[test]
    fn dimension_validation() {
        let n = mode_count(1);
        assert!(AntennaGsm::new(
            1.0e9,
            1,
            Array2::eye(2),
            Array2::zeros((2, n + 1)),
            Array2::zeros((n, 2)),
            Array2::eye(n)
        )
        .is_err());
        let antenna = random_antenna(61, 2, 1, 1.0e9);
        let eff = compose(&antenna, &identity_sso(1.0e9, 1)).unwrap();
        assert!(respond(&eff, &[c(1.0, 0.0)], &vec![c(0.0, 0.0); n]).is_err());
        assert!(respond(&eff, &[c(1.0, 0.0); 2], &vec![c(0.0, 0.0); n - 1]).is_err());
    }
}
