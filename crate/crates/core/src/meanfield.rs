//! Product-state (mean-field) energy surface and the phase diagram it implies.
//!
//! The ansatz is `prod_k (cos(theta/2)|0> + sin(theta/2) e^(i phi)|1>)`. Energies
//! are per qubit in the `n -> infinity` limit unless stated otherwise.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::ALPHA_LIMIT_THRESHOLD;
use crate::optimize::linspace;
use crate::spectral::check_grid;
use crate::ALPHA_CRITICAL;

pub const DEFAULT_THETA_GRID: usize = 2001;
pub const DEFAULT_REFINE_TOLERANCE: f64 = 1e-12;
pub const DEGENERACY_TOLERANCE: f64 = 1e-10;
pub const MIN_THETA_SEPARATION: f64 = 1e-3;
/// `sx_jump` above this marks a first-order transition.
pub const JUMP_THRESHOLD: f64 = 1e-4;
pub const DEFAULT_S_SCAN_POINTS: usize = 201;
pub const DEFAULT_S_RESOLUTION: f64 = 1e-12;
/// Half-width of the window around the numerically located endpoint that is
/// classified as second order.
pub const SECOND_ORDER_WINDOW: f64 = 1e-6;

fn check_s(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::invalid("s", format!("{s} is outside [0, 1]")));
    }
    Ok(())
}

/// Problem-Hamiltonian energy per qubit, `(1 - e^(alpha (cos theta - 1))) / (1 - e^(-2 alpha))`.
fn problem_energy(theta: f64, alpha: f64) -> f64 {
    let c = theta.cos();
    if alpha < ALPHA_LIMIT_THRESHOLD {
        0.5 * (1.0 - c)
    } else if alpha.is_infinite() {
        if c >= 1.0 {
            0.0
        } else {
            1.0
        }
    } else {
        (alpha * (c - 1.0)).exp_m1() / (-2.0 * alpha).exp_m1()
    }
}

fn problem_energy_derivative(theta: f64, alpha: f64) -> f64 {
    let (sn, c) = theta.sin_cos();
    if alpha < ALPHA_LIMIT_THRESHOLD {
        0.5 * sn
    } else if alpha.is_infinite() {
        0.0
    } else {
        alpha * sn * (alpha * (c - 1.0)).exp() / -(-2.0 * alpha).exp_m1()
    }
}

/// `n -> infinity` product-state energy per qubit,
/// `(1-s)(1 - sin theta cos phi)/2 + s (e^alpha - e^(alpha cos theta)) / (2 sinh alpha)`.
pub fn mf_energy(theta: f64, phi: f64, s: f64, alpha: f64) -> f64 {
    0.5 * (1.0 - s) * (1.0 - theta.sin() * phi.cos()) + s * problem_energy(theta, alpha)
}

/// Exact product-state expectation of `H(s, alpha)` for `n` qubits.
pub fn mf_energy_finite(theta: f64, phi: f64, s: f64, alpha: f64, n: usize) -> f64 {
    let driver = 0.5 * (1.0 - s) * (1.0 - theta.sin() * phi.cos());
    let sin2 = (0.5 * theta).sin().powi(2);
    let nf = n as f64;
    let problem = if alpha < ALPHA_LIMIT_THRESHOLD {
        sin2
    } else if alpha.is_infinite() {
        // 1 - cos^(2n)(theta/2)
        -(nf * (-sin2).ln_1p()).exp_m1()
    } else {
        // per-qubit factor cos^2(theta/2) + sin^2(theta/2) e^(-2 alpha / n)
        let log_factor = (sin2 * (-2.0 * alpha / nf).exp_m1()).ln_1p();
        (nf * log_factor).exp_m1() / (-2.0 * alpha).exp_m1()
    };
    driver + s * problem
}

/// `d/d theta` of [`mf_energy`] at `phi = 0`.
fn energy_slope(theta: f64, s: f64, alpha: f64) -> f64 {
    -0.5 * (1.0 - s) * theta.cos() + s * problem_energy_derivative(theta, alpha)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldSolution {
    pub theta: f64,
    pub phi: f64,
    pub energy: f64,
    /// Two separated global minima within [`DEGENERACY_TOLERANCE`].
    pub degenerate: bool,
    /// The other minimum when `degenerate`.
    pub other_theta: Option<f64>,
}

impl MeanFieldSolution {
    /// `<s_x> = sin(theta) cos(phi) / 2`.
    pub fn sx(&self) -> f64 {
        0.5 * self.theta.sin() * self.phi.cos()
    }
}

pub fn mf_minimize(s: f64, alpha: f64) -> Result<MeanFieldSolution> {
    mf_minimize_with(s, alpha, DEFAULT_THETA_GRID, DEFAULT_REFINE_TOLERANCE)
}

/// Global minimum over `theta in [0, pi]` with `phi = 0`: grid scan, then each
/// interior grid minimum is refined by bisection on the sign of the slope.
pub fn mf_minimize_with(
    s: f64,
    alpha: f64,
    grid: usize,
    refine_tolerance: f64,
) -> Result<MeanFieldSolution> {
    check_s(s)?;
    crate::model::check_alpha(alpha)?;
    if grid < 3 {
        return Err(Error::invalid("grid", "need at least 3 theta points"));
    }
    if !(refine_tolerance > 0.0) {
        return Err(Error::invalid("refine_tolerance", "must be positive"));
    }
    let thetas = linspace(0.0, std::f64::consts::PI, grid);
    let energies: Vec<f64> = thetas
        .iter()
        .map(|&t| mf_energy(t, 0.0, s, alpha))
        .collect();

    let mut minima: Vec<(f64, f64)> = Vec::new();
    for i in 0..grid {
        let left = i == 0 || energies[i] <= energies[i - 1];
        let right = i + 1 == grid || energies[i] <= energies[i + 1];
        if !(left && right) {
            continue;
        }
        let theta = if i == 0 || i + 1 == grid {
            thetas[i]
        } else {
            refine(thetas[i - 1], thetas[i + 1], s, alpha, refine_tolerance)
        };
        minima.push((theta, mf_energy(theta, 0.0, s, alpha)));
    }
    minima.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
    let &(theta, energy) = minima
        .first()
        .ok_or(Error::NoConvergence("mean-field grid scan"))?;
    let other = minima.iter().skip(1).find(|(t, e)| {
        (t - theta).abs() > MIN_THETA_SEPARATION && (e - energy).abs() <= DEGENERACY_TOLERANCE
    });
    Ok(MeanFieldSolution {
        theta,
        phi: 0.0,
        energy,
        degenerate: other.is_some(),
        other_theta: other.map(|m| m.0),
    })
}

/// Zero of the slope in `[lo, hi]`, or the lower-energy end if the slope does
/// not change sign there.
fn refine(mut lo: f64, mut hi: f64, s: f64, alpha: f64, tol: f64) -> f64 {
    let f_lo = energy_slope(lo, s, alpha);
    let f_hi = energy_slope(hi, s, alpha);
    if !(f_lo <= 0.0 && f_hi >= 0.0) {
        let (a, b) = (mf_energy(lo, 0.0, s, alpha), mf_energy(hi, 0.0, s, alpha));
        let mid = 0.5 * (lo + hi);
        let m = mf_energy(mid, 0.0, s, alpha);
        return if m <= a && m <= b {
            mid
        } else if a <= b {
            lo
        } else {
            hi
        };
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if energy_slope(mid, s, alpha) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `values[i][j]` is `<s_x>` at `(s_grid[i], alpha_grid[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct SxSurface {
    pub alpha: Vec<f64>,
    pub s: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

pub fn sx_surface(alpha_grid: &[f64], s_grid: &[f64]) -> Result<SxSurface> {
    check_grid("alpha_grid", alpha_grid)?;
    check_grid("s_grid", s_grid)?;
    let values = s_grid
        .par_iter()
        .map(|&s| {
            alpha_grid
                .iter()
                .map(|&a| mf_minimize(s, a).map(|m| m.sx()))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SxSurface {
        alpha: alpha_grid.to_vec(),
        s: s_grid.to_vec(),
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitionOrder {
    First,
    Second,
    None,
}

impl TransitionOrder {
    pub fn label(&self) -> &'static str {
        match self {
            TransitionOrder::First => "first",
            TransitionOrder::Second => "second",
            TransitionOrder::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionPoint {
    pub alpha: f64,
    /// Location of the steepest drop of `<s_x>(s)`, refined to the requested
    /// resolution. For a first-order transition this is where the two minima
    /// are degenerate.
    pub s_c: f64,
    pub order: TransitionOrder,
    /// `<s_x>` just below `s_c` minus `<s_x>` just above it.
    pub sx_jump: f64,
}

/// Scans `s` for the steepest drop in `<s_x>`, then bisects toward it
/// keeping the larger half of the drop.
fn locate_drop(alpha: f64, s_resolution: f64) -> Result<(f64, f64)> {
    let grid = linspace(0.0, 1.0, DEFAULT_S_SCAN_POINTS);
    let sx = grid
        .iter()
        .map(|&s| mf_minimize(s, alpha).map(|m| m.sx()))
        .collect::<Result<Vec<_>>>()?;
    let i = (0..grid.len() - 1)
        .max_by(|&a, &b| (sx[a] - sx[a + 1]).total_cmp(&(sx[b] - sx[b + 1])))
        .ok_or(Error::NoConvergence("transition scan"))?;
    let (mut lo, mut hi) = (grid[i], grid[i + 1]);
    let (mut sx_lo, mut sx_hi) = (sx[i], sx[i + 1]);
    while hi - lo > s_resolution {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let sx_mid = mf_minimize(mid, alpha)?.sx();
        if sx_lo - sx_mid >= sx_mid - sx_hi {
            hi = mid;
            sx_hi = sx_mid;
        } else {
            lo = mid;
            sx_lo = sx_mid;
        }
    }
    Ok((0.5 * (lo + hi), (sx_lo - sx_hi).max(0.0)))
}

pub fn transition_line(alpha: f64, s_resolution: f64) -> Result<TransitionPoint> {
    crate::model::check_alpha(alpha)?;
    if !(s_resolution > 0.0) {
        return Err(Error::invalid("s_resolution", "must be positive"));
    }
    let (s_c, sx_jump) = locate_drop(alpha, s_resolution)?;
    let endpoint = default_critical_point()?;
    let order = if (alpha - endpoint.alpha_c).abs() <= SECOND_ORDER_WINDOW {
        TransitionOrder::Second
    } else if sx_jump > JUMP_THRESHOLD {
        TransitionOrder::First
    } else {
        TransitionOrder::None
    };
    Ok(TransitionPoint {
        alpha,
        s_c,
        order,
        sx_jump,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub alpha_c: f64,
    /// `s` where the degeneracy first appears.
    pub s_c: f64,
}

/// Bisection in `alpha` on whether `<s_x>(s)` jumps by more than
/// [`JUMP_THRESHOLD`], over the bracket `[1, 5]`.
pub fn critical_point(tolerance: f64) -> Result<CriticalPoint> {
    if !(tolerance > 0.0) {
        return Err(Error::invalid("tolerance", "must be positive"));
    }
    let first = |alpha: f64| -> Result<(bool, f64)> {
        let (s, jump) = locate_drop(alpha, DEFAULT_S_RESOLUTION)?;
        Ok((jump > JUMP_THRESHOLD, s))
    };
    let (mut lo, mut hi) = (1.0, 5.0);
    let (lo_first, _) = first(lo)?;
    let (hi_first, mut s_hi) = first(hi)?;
    if lo_first || !hi_first {
        return Err(Error::BracketFailure {
            lo,
            hi,
            target: JUMP_THRESHOLD,
        });
    }
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        let (is_first, s) = first(mid)?;
        if is_first {
            hi = mid;
            s_hi = s;
        } else {
            lo = mid;
        }
    }
    Ok(CriticalPoint {
        alpha_c: hi,
        s_c: s_hi,
    })
}

/// [`critical_point`] at tolerance `1e-10`, computed once per process.
pub fn default_critical_point() -> Result<CriticalPoint> {
    static CELL: OnceLock<std::result::Result<CriticalPoint, String>> = OnceLock::new();
    CELL.get_or_init(|| critical_point(1e-10).map_err(|e| e.to_string()))
        .clone()
        .map_err(|_| Error::NoConvergence("critical point"))
}

/// Two parenthesizations of the printed closed form for the endpoint `s`:
/// `2 / (2 + 3 sqrt(6) e^(3/2) / sinh(3 sqrt(3)/2))` and
/// `2 / (2 + 3 sqrt(6) e^(3/2) sinh(3 sqrt(3)/2))`.
pub fn endpoint_s_readings() -> [(&'static str, f64); 2] {
    let c = 3.0 * 6f64.sqrt() * 1.5f64.exp();
    let sh = ALPHA_CRITICAL.sinh();
    [
        ("reciprocal_sinh", 2.0 / (2.0 + c / sh)),
        ("product_sinh", 2.0 / (2.0 + c * sh)),
    ]
}
