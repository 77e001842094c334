//! Collective-spin expectation values, the rescaled concurrence and overlap
//! diagnostics for symmetric states.
//!
//! States are passed as amplitude slices over the Dicke index `k = 0..=n`
//! (`m = k - n/2`) and must have unit norm to within [`NORM_TOLERANCE`].

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::eigensolver;
use crate::error::{Error, Result};
use crate::model::{self, norm_sq, ModelParams, SymmetricState, TridiagonalOperator};
use crate::spectral::check_grid;

pub const NORM_TOLERANCE: f64 = 1e-8;
/// Largest `n` accepted by [`wootters_oracle`].
pub const WOOTTERS_MAX_QUBITS: usize = 12;
/// Qubit counts used by [`thermodynamic_concurrence`].
pub const RICHARDSON_SIZES: [usize; 3] = [500, 1000, 2000];

fn check_state(psi: &[f64]) -> Result<usize> {
    if psi.is_empty() {
        return Err(Error::invalid("psi", "state needs at least one amplitude"));
    }
    if let Some(i) = psi.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let dev = (norm_sq(psi) - 1.0).abs();
    if dev > NORM_TOLERANCE {
        return Err(Error::NotNormalized(dev));
    }
    Ok(psi.len() - 1)
}

fn m_of(n: usize, k: usize) -> f64 {
    k as f64 - 0.5 * n as f64
}

/// `S_x` as a tridiagonal operator on the Dicke basis.
pub fn sx_operator(n: usize) -> Result<TridiagonalOperator> {
    TridiagonalOperator::new(
        vec![0.0; n + 1],
        (0..n).map(|k| model::ladder(n, k)).collect(),
    )
}

/// `<S_x>`; divide by `n` for `<s_x>`.
pub fn expect_sx(psi: &[f64]) -> Result<f64> {
    let n = check_state(psi)?;
    Ok((0..n)
        .map(|k| 2.0 * model::ladder(n, k) * psi[k] * psi[k + 1])
        .sum())
}

/// `<S_x^2> = |S_x psi|^2`.
pub fn expect_sx2(psi: &[f64]) -> Result<f64> {
    let n = check_state(psi)?;
    Ok(norm_sq(&sx_operator(n)?.matvec(psi)))
}

pub fn expect_sz(psi: &[f64]) -> Result<f64> {
    let n = check_state(psi)?;
    Ok(psi
        .iter()
        .enumerate()
        .map(|(k, a)| m_of(n, k) * a * a)
        .sum())
}

pub fn expect_sz2(psi: &[f64]) -> Result<f64> {
    let n = check_state(psi)?;
    Ok(psi
        .iter()
        .enumerate()
        .map(|(k, a)| m_of(n, k).powi(2) * a * a)
        .sum())
}

/// `<S_y^2>` from `S_y^2 = (S^2 - S_z^2)/2 - (S_+^2 + S_-^2)/4`.
pub fn expect_sy2(psi: &[f64]) -> Result<f64> {
    let n = check_state(psi)?;
    let j = 0.5 * n as f64;
    let diag: f64 = psi
        .iter()
        .enumerate()
        .map(|(k, a)| 0.5 * (j * (j + 1.0) - m_of(n, k).powi(2)) * a * a)
        .sum();
    // <k+1| S_+ |k> = 2 * ladder(n, k)
    let raise2: f64 = (0..n.saturating_sub(1))
        .map(|k| 4.0 * model::ladder(n, k) * model::ladder(n, k + 1) * psi[k] * psi[k + 2])
        .sum();
    Ok(diag - 0.5 * raise2)
}

/// `C_R = 1 - 4 <S_y^2> / n`. Reported as computed; it can be negative.
pub fn rescaled_concurrence(psi: &[f64]) -> Result<f64> {
    let n = check_state(psi)?;
    if n == 0 {
        return Err(Error::invalid("n", "qubit count must be at least 1"));
    }
    Ok(1.0 - 4.0 * expect_sy2(psi)? / n as f64)
}

/// `(n - 1)` times the Wootters concurrence of the two-qubit reduced state.
///
/// The reduced state is `rho = W W^T` with one column of `W` per Dicke state of
/// the traced-out `n - 2` qubits. The concurrence follows from the singular
/// values of `W^T (sigma_y x sigma_y) W`, which are the square roots of the
/// eigenvalues of `rho rho~`.
pub fn wootters_oracle(psi: &[f64]) -> Result<f64> {
    let n = check_state(psi)?;
    if n < 2 {
        return Err(Error::invalid("n", "concurrence needs at least 2 qubits"));
    }
    if n > WOOTTERS_MAX_QUBITS {
        return Err(Error::TooLarge {
            n,
            max: WOOTTERS_MAX_QUBITS,
        });
    }
    let rest = n - 2;
    // amplitude on the Dicke state with q qubits in |1>
    let c = |q: usize| psi[n - q];
    let mut w = DMatrix::<f64>::zeros(4, rest + 1);
    for r in 0..=rest {
        let f = |i: usize| (model::binomial(rest, r) / model::binomial(n, r + i)).sqrt();
        // columns over |00>, |01>, |10>, |11> of the two kept qubits
        w[(0, r)] = c(r) * f(0);
        w[(1, r)] = c(r + 1) * f(1);
        w[(2, r)] = c(r + 1) * f(1);
        w[(3, r)] = c(r + 2) * f(2);
    }
    let mut flip = DMatrix::<f64>::zeros(4, 4);
    flip[(0, 3)] = -1.0;
    flip[(3, 0)] = -1.0;
    flip[(1, 2)] = 1.0;
    flip[(2, 1)] = 1.0;
    let tau = w.transpose() * flip * &w;
    let mut lambda: Vec<f64> = SymmetricEigen::new(tau)
        .eigenvalues
        .iter()
        .map(|x| x.abs())
        .collect();
    lambda.sort_by(|a, b| b.total_cmp(a));
    lambda.resize(4.max(lambda.len()), 0.0);
    let conc = (lambda[0] - lambda[1] - lambda[2] - lambda[3]).max(0.0);
    Ok((n - 1) as f64 * conc)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateAnatomy {
    /// `|<=>|psi>|^2` with the x-polarized state.
    pub overlap_x: f64,
    /// `|<^|psi>|^2` with the z-polarized state.
    pub overlap_z: f64,
    /// `|<j, m|psi>|^2` indexed by `k`.
    pub dicke_weights: Vec<f64>,
}

pub fn anatomy(psi: &[f64]) -> Result<StateAnatomy> {
    let n = check_state(psi)?;
    let x: f64 = psi
        .iter()
        .enumerate()
        .map(|(k, a)| a * model::x_polarized_weight(n, k).sqrt())
        .sum();
    let dicke_weights: Vec<f64> = psi.iter().map(|a| a * a).collect();
    Ok(StateAnatomy {
        overlap_x: x * x,
        overlap_z: dicke_weights[n],
        dicke_weights,
    })
}

/// The `S_x` eigenstate `|n/2, n/2 - excitations>_x`.
pub fn x_dicke_state(n: usize, excitations: usize) -> Result<SymmetricState> {
    if excitations > n {
        return Err(Error::invalid(
            "excitations",
            format!("{excitations} exceeds n = {n}"),
        ));
    }
    let res = eigensolver::eigen_all_with_vectors(&sx_operator(n)?)?;
    res.vectors
        .and_then(|mut v| {
            let idx = n - excitations;
            (idx < v.len()).then(|| v.swap_remove(idx))
        })
        .ok_or(Error::NoConvergence("S_x eigenvectors"))
}

pub fn ground_state(n: usize, alpha: f64, s: f64) -> Result<SymmetricState> {
    let t = model::build_hs(&ModelParams::new(n, alpha, s)?)?;
    eigensolver::lowest_eigenpairs(&t, 1)?
        .vectors
        .and_then(|mut v| v.pop())
        .ok_or(Error::NoConvergence("ground state"))
}

/// Ground-state `C_R` along `s_grid`.
pub fn concurrence_curve(n: usize, alpha: f64, s_grid: &[f64]) -> Result<Vec<f64>> {
    check_grid("s_grid", s_grid)?;
    s_grid
        .par_iter()
        .map(|&s| rescaled_concurrence(ground_state(n, alpha, s)?.amplitudes()))
        .collect()
}

/// Richardson extrapolation of the ground-state `C_R` over
/// [`RICHARDSON_SIZES`], assuming corrections in powers of `1/n`.
pub fn thermodynamic_concurrence(alpha: f64, s: f64) -> Result<f64> {
    let c = RICHARDSON_SIZES
        .par_iter()
        .map(|&n| rescaled_concurrence(ground_state(n, alpha, s)?.amplitudes()))
        .collect::<Result<Vec<_>>>()?;
    let r1 = 2.0 * c[1] - c[0];
    let r2 = 2.0 * c[2] - c[1];
    Ok((4.0 * r2 - r1) / 3.0)
}

/// Where the ground state switches character, and how much `C_R` changes
/// across it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcurrenceStep {
    /// Steepest drop of the ground-state `<s_x>`, bisected to `1e-12`.
    pub s_c: f64,
    pub delta: f64,
    /// `|C_R(s_c + delta) - C_R(s_c - delta)|`
    pub jump: f64,
    /// The same with `delta / 4`.
    pub jump_fine: f64,
}

impl ConcurrenceStep {
    /// A continuous curve shrinks roughly fourfold when `delta` does; a
    /// discontinuous one keeps most of its jump.
    pub fn is_discontinuous(&self) -> bool {
        self.jump_fine > 0.5 * self.jump
    }
}

pub fn concurrence_step(n: usize, alpha: f64, delta: f64) -> Result<ConcurrenceStep> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::invalid("delta", "must be in (0, 0.5)"));
    }
    let sx = |s: f64| -> Result<f64> {
        Ok(expect_sx(ground_state(n, alpha, s)?.amplitudes())? / n as f64)
    };
    let grid = crate::optimize::linspace(0.0, 1.0, 201);
    let values = grid
        .par_iter()
        .map(|&s| sx(s))
        .collect::<Result<Vec<_>>>()?;
    let i = (0..grid.len() - 1)
        .max_by(|&a, &b| (values[a] - values[a + 1]).total_cmp(&(values[b] - values[b + 1])))
        .ok_or(Error::NoConvergence("concurrence scan"))?;
    let (mut lo, mut hi) = (grid[i], grid[i + 1]);
    let (mut v_lo, mut v_hi) = (values[i], values[i + 1]);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        let v = sx(mid)?;
        if v_lo - v >= v - v_hi {
            hi = mid;
            v_hi = v;
        } else {
            lo = mid;
            v_lo = v;
        }
    }
    let s_c = 0.5 * (lo + hi);
    let c = |s: f64| -> Result<f64> {
        rescaled_concurrence(ground_state(n, alpha, s.clamp(0.0, 1.0))?.amplitudes())
    };
    let jump = (c(s_c + delta)? - c(s_c - delta)?).abs();
    let jump_fine = (c(s_c + 0.25 * delta)? - c(s_c - 0.25 * delta)?).abs();
    Ok(ConcurrenceStep {
        s_c,
        delta,
        jump,
        jump_fine,
    })
}
