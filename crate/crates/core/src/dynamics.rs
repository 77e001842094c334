//! Time evolution under the linear schedule `s(t) = t / T`, starting from the
//! x-polarized ground state of `H(0)`.
//!
//! Each step of length `dt` applies the fourth-order commutator-free Magnus
//! rule `exp(-i dt (a1 H1 + a2 H2)) exp(-i dt (a2 H1 + a1 H2))`, with `H1`, `H2`
//! at the two Gauss nodes. `H` is affine in `s`, so each factor is
//! `exp(-i (dt/2) H(s_eff))` and is applied exactly through the eigenpairs of
//! the tridiagonal matrix.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::eigensolver;
use crate::error::{Error, Result};
use crate::model::{SymmetricState, TridiagonalOperator};
use crate::oracle::{self, DenseOperator, SolutionMask};
use crate::spectral::{self, Path};

/// Doubling stops once the fidelity moves by less than this.
pub const FIDELITY_CONVERGENCE: f64 = 1e-6;
pub const MAX_STEPS: usize = 1 << 24;
/// Upper end of the geometric time scan in [`required_time_scan`].
pub const MAX_TIME: f64 = 1e6;
const BISECTION_RELATIVE: f64 = 1e-4;

const SQRT3: f64 = 1.732_050_807_568_877_2;
const GAUSS: [f64; 2] = [0.5 - SQRT3 / 6.0, 0.5 + SQRT3 / 6.0];
const A1: f64 = (3.0 - 2.0 * SQRT3) / 12.0;
const A2: f64 = (3.0 + 2.0 * SQRT3) / 12.0;

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult {
    /// Amplitudes over the Dicke index.
    pub final_state: Vec<Complex64>,
    /// `|<^|psi(T)>|^2`; the z-polarized state is the ground state of `H(1)`
    /// for every `alpha`.
    pub fidelity: f64,
    pub norm_drift: f64,
    pub total_time: f64,
    pub steps: usize,
}

fn check_time(total_time: f64, steps: usize) -> Result<()> {
    if !total_time.is_finite() {
        return Err(Error::invalid("T", "total time must be finite"));
    }
    if total_time < 0.0 {
        return Err(Error::invalid("T", "total time must be non-negative"));
    }
    if steps < 1 {
        return Err(Error::invalid("steps", "need at least one step"));
    }
    Ok(())
}

/// Effective `s` of the two factors of the step starting at `t0`, in
/// application order.
fn factor_points(t0: f64, dt: f64, total_time: f64) -> [f64; 2] {
    let s1 = (t0 + GAUSS[0] * dt) / total_time;
    let s2 = (t0 + GAUSS[1] * dt) / total_time;
    // a1 + a2 = 1/2
    [
        (2.0 * (A2 * s1 + A1 * s2)).clamp(0.0, 1.0),
        (2.0 * (A1 * s1 + A2 * s2)).clamp(0.0, 1.0),
    ]
}

/// `psi <- exp(-i tau H) psi`.
fn apply_exponential(h: &TridiagonalOperator, tau: f64, psi: &mut [Complex64]) -> Result<()> {
    let eig = eigensolver::eigen_all_with_vectors(h)?;
    let vectors = eig
        .vectors
        .ok_or(Error::NoConvergence("propagator eigenvectors"))?;
    let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
    for (lambda, v) in eig.values.iter().zip(&vectors) {
        let v = v.amplitudes();
        let c: Complex64 = v.iter().zip(psi.iter()).map(|(a, b)| b * a).sum();
        let c = c * Complex64::from_polar(1.0, -tau * lambda);
        for (o, a) in out.iter_mut().zip(v) {
            *o += c * a;
        }
    }
    psi.copy_from_slice(&out);
    Ok(())
}

fn initial_state(n: usize) -> Vec<Complex64> {
    SymmetricState::x_polarized(n)
        .amplitudes()
        .iter()
        .map(|&a| Complex64::new(a, 0.0))
        .collect()
}

fn finish(n: usize, psi: Vec<Complex64>, total_time: f64, steps: usize) -> EvolutionResult {
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    EvolutionResult {
        fidelity: psi[n].norm_sqr(),
        norm_drift: (norm - 1.0).abs(),
        final_state: psi,
        total_time,
        steps,
    }
}

/// One run with exactly `steps` steps.
pub fn evolve_fixed(
    n: usize,
    alpha: f64,
    total_time: f64,
    steps: usize,
) -> Result<EvolutionResult> {
    check_time(total_time, steps)?;
    let path = Path::new(n, alpha)?;
    if total_time == 0.0 {
        // sudden quench: the overlap of the two polarized states
        let mut r = finish(n, initial_state(n), 0.0, steps);
        r.fidelity = 0.5f64.powi(n as i32);
        return Ok(r);
    }
    let dt = total_time / steps as f64;
    let mut psi = initial_state(n);
    for j in 0..steps {
        for s in factor_points(j as f64 * dt, dt, total_time) {
            apply_exponential(&path.at(s)?, 0.5 * dt, &mut psi)?;
        }
    }
    Ok(finish(n, psi, total_time, steps))
}

/// Evolution with step doubling until the fidelity changes by less than
/// [`FIDELITY_CONVERGENCE`]. Starts from `max(steps, ceil(T))` steps so the
/// step never exceeds the spectral width of `H`.
pub fn evolve(n: usize, alpha: f64, total_time: f64, steps: usize) -> Result<EvolutionResult> {
    check_time(total_time, steps)?;
    if total_time == 0.0 {
        return evolve_fixed(n, alpha, 0.0, steps);
    }
    let mut steps = steps.max(total_time.ceil() as usize);
    let mut coarse = evolve_fixed(n, alpha, total_time, steps)?;
    loop {
        if 2 * steps > MAX_STEPS {
            return Err(Error::NoConvergence("step doubling"));
        }
        steps *= 2;
        let fine = evolve_fixed(n, alpha, total_time, steps)?;
        if (fine.fidelity - coarse.fidelity).abs() < FIDELITY_CONVERGENCE {
            return Ok(fine);
        }
        coarse = fine;
    }
}

/// Fixed-step fidelity of the same scheme on the full `2^n` space, with the
/// problem Hamiltonian gauge-transformed by `mask`. The target is the basis
/// state of the solution bit string.
pub fn evolve_dense(
    n: usize,
    alpha: f64,
    mask: &SolutionMask,
    total_time: f64,
    steps: usize,
) -> Result<f64> {
    check_time(total_time, steps)?;
    if mask.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: mask.len(),
        });
    }
    let h0 = oracle::full_h0(n)?;
    let hp = oracle::apply_gauge(
        &DenseOperator::from_matrix(n, oracle::full_hp(n, alpha)?)?,
        mask,
    )?
    .into_matrix();
    let dim = 1usize << n;
    let amp = 0.5f64.powf(n as f64 / 2.0);
    let mut re = DVector::from_element(dim, amp);
    let mut im = DVector::zeros(dim);
    if total_time > 0.0 {
        let dt = total_time / steps as f64;
        for j in 0..steps {
            for s in factor_points(j as f64 * dt, dt, total_time) {
                let h: DMatrix<f64> = &h0 * (1.0 - s) + &hp * s;
                let eig = SymmetricEigen::new(h);
                let v = &eig.eigenvectors;
                let cr = v.tr_mul(&re);
                let ci = v.tr_mul(&im);
                let (mut nr, mut ni) = (cr.clone(), ci.clone());
                for k in 0..dim {
                    let (sin, cos) = (-0.5 * dt * eig.eigenvalues[k]).sin_cos();
                    nr[k] = cos * cr[k] - sin * ci[k];
                    ni[k] = sin * cr[k] + cos * ci[k];
                }
                re = v * nr;
                im = v * ni;
            }
        }
    }
    let t = mask.index();
    Ok(re[t] * re[t] + im[t] * im[t])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RequiredTime {
    pub n: usize,
    /// Smallest `T` found where the fidelity reaches the target, to relative
    /// precision `1e-4`.
    pub t_star: f64,
    pub inverse_gap_sq: f64,
}

/// For each `n`, doubles `T` from `1/64` until the fidelity reaches `target`,
/// then bisects the last bracket.
pub fn required_time_scan(n_list: &[usize], alpha: f64, target: f64) -> Result<Vec<RequiredTime>> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::invalid("fidelity_target", "must lie in (0, 1)"));
    }
    if n_list.is_empty() {
        return Err(Error::invalid("n_list", "no qubit counts given"));
    }
    n_list
        .par_iter()
        .map(|&n| {
            let gap = spectral::min_gap(n, alpha, 1e-10)?.gap;
            Ok(RequiredTime {
                n,
                t_star: required_time(n, alpha, target)?,
                inverse_gap_sq: 1.0 / (gap * gap),
            })
        })
        .collect()
}

fn required_time(n: usize, alpha: f64, target: f64) -> Result<f64> {
    let fidelity = |t: f64| -> Result<f64> { Ok(evolve(n, alpha, t, 16)?.fidelity) };
    if fidelity(0.0)? >= target {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0 / 64.0);
    while fidelity(hi)? < target {
        lo = hi;
        hi *= 2.0;
        if hi > MAX_TIME {
            return Err(Error::BracketFailure {
                lo: 0.0,
                hi: MAX_TIME,
                target,
            });
        }
    }
    while hi - lo > BISECTION_RELATIVE * hi {
        let mid = 0.5 * (lo + hi);
        if fidelity(mid)? >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quench_overlap() {
        for n in [1, 5, 20, 60] {
            let r = evolve(n, 3.0, 0.0, 1).unwrap();
            assert_eq!(r.fidelity, 0.5f64.powi(n as i32));
            assert!(r.norm_drift < 1e-15);
        }
    }

    #[test]
    fn invalid_inputs() {
        assert!(evolve(3, 1.0, -1.0, 10).is_err());
        assert!(evolve(3, 1.0, f64::NAN, 10).is_err());
        assert!(evolve(3, 1.0, 1.0, 0).is_err());
        assert!(required_time_scan(&[3], 1.0, 1.0).is_err());
    }

    #[test]
    fn single_qubit_adiabatic() {
        let r = evolve(1, 2.0, 100.0, 100).unwrap();
        assert!(r.fidelity > 0.99, "{}", r.fidelity);
        assert!(r.norm_drift <= 1e-9);
    }

    /// Reference for `n = 1`: classical RK4 on the 2x2 system with a tiny step.
    fn rk4_single_qubit(alpha: f64, total_time: f64, steps: usize) -> f64 {
        let path = Path::new(1, alpha).unwrap();
        let h = |t: f64| {
            let m = path.at((t / total_time).clamp(0.0, 1.0)).unwrap();
            (m.diag().to_vec(), m.offdiag()[0])
        };
        let f = |t: f64, y: [Complex64; 2]| {
            let (d, o) = h(t);
            let mi = Complex64::new(0.0, -1.0);
            [mi * (d[0] * y[0] + o * y[1]), mi * (o * y[0] + d[1] * y[1])]
        };
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let mut y = [Complex64::new(c, 0.0), Complex64::new(c, 0.0)];
        let dt = total_time / steps as f64;
        for j in 0..steps {
            let t = j as f64 * dt;
            let k1 = f(t, y);
            let k2 = f(
                t + dt / 2.0,
                [y[0] + k1[0] * dt / 2.0, y[1] + k1[1] * dt / 2.0],
            );
            let k3 = f(
                t + dt / 2.0,
                [y[0] + k2[0] * dt / 2.0, y[1] + k2[1] * dt / 2.0],
            );
            let k4 = f(t + dt, [y[0] + k3[0] * dt, y[1] + k3[1] * dt]);
            for i in 0..2 {
                y[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * dt / 6.0;
            }
        }
        y[1].norm_sqr()
    }

    #[test]
    fn single_qubit_matches_rk4() {
        for (alpha, t) in [(0.5, 3.0), (4.0, 7.5)] {
            let want = rk4_single_qubit(alpha, t, 200_000);
            let got = evolve(1, alpha, t, 8).unwrap().fidelity;
            assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        }
    }

    #[test]
    fn fourth_order_convergence() {
        let f = |steps| evolve_fixed(6, 3.0, 20.0, steps).unwrap().fidelity;
        let reference = f(4096);
        let e1 = (f(32) - reference).abs();
        let e2 = (f(64) - reference).abs();
        assert!(e1 / e2 > 12.0, "{e1} {e2}");
    }

    #[test]
    fn separable_is_easier_than_projector_like() {
        let easy = evolve(6, 0.0, 200.0, 64).unwrap().fidelity;
        let hard = evolve(6, 10.0, 200.0, 64).unwrap().fidelity;
        assert!(easy > hard, "{easy} {hard}");
        assert!(easy > 0.99);
    }

    #[test]
    fn adiabatic_trend() {
        let n = 4;
        let alpha = 2.0;
        let t0 = required_time_scan(&[n], alpha, 0.5).unwrap()[0].t_star;
        let f0 = evolve(n, alpha, t0, 16).unwrap().fidelity;
        let f10 = evolve(n, alpha, 10.0 * t0, 16).unwrap().fidelity;
        assert!(f10 > f0);
    }

    #[test]
    fn gauge_does_not_change_fidelity() {
        for n in [3, 5] {
            let sym = evolve_fixed(n, 2.5, 6.0, 40).unwrap().fidelity;
            for value in [0, 1, (1 << n) - 1, 0b101] {
                let mask = SolutionMask::from_bits(n, value);
                let dense = evolve_dense(n, 2.5, &mask, 6.0, 40).unwrap();
                assert!(
                    (dense - sym).abs() < 1e-8,
                    "n={n} mask={value}: {dense} vs {sym}"
                );
            }
        }
    }

    #[test]
    fn target_just_above_quench_overlap() {
        let n = 5;
        let target = 0.5f64.powi(n as i32) + 1e-6;
        let t = required_time_scan(&[n], 1.0, target).unwrap()[0].t_star;
        assert!(t > 0.0 && t < 0.1, "{t}");
    }
}
