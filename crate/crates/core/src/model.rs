//! The interpolating Hamiltonian `H(s) = (1 - s) H0 + s HP(alpha)` restricted
//! to the maximal-spin (`j = n/2`) sector.
//!
//! Basis convention used throughout the crate: index `k = 0..=n` is the Dicke
//! state with `S_z` eigenvalue `m = k - n/2`. The state with all qubits in `|0>`
//! (the ground state of `HP`) sits at `k = n`; `q = n - k` counts the qubits in
//! `|1>`.

use crate::error::{Error, Result};

/// Below this value of `alpha` the problem Hamiltonian uses its `alpha -> 0` limit.
pub const ALPHA_LIMIT_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    n: usize,
    alpha: f64,
    s: f64,
}

impl ModelParams {
    /// `alpha` may be `f64::INFINITY` (projector limit).
    pub fn new(n: usize, alpha: f64, s: f64) -> Result<Self> {
        check_n(n)?;
        check_alpha(alpha)?;
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::invalid("s", format!("{s} is outside [0, 1]")));
        }
        Ok(Self { n, alpha, s })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn with_s(&self, s: f64) -> Result<Self> {
        Self::new(self.n, self.alpha, s)
    }
}

pub(crate) fn check_n(n: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::invalid("n", "qubit count must be at least 1"));
    }
    Ok(())
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_nan() || alpha < 0.0 {
        return Err(Error::invalid("alpha", format!("{alpha} must be >= 0")));
    }
    Ok(())
}

/// Real symmetric tridiagonal matrix stored as its diagonal and one
/// off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl TridiagonalOperator {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::invalid("diag", "dimension must be at least 1"));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::DimensionMismatch {
                expected: diag.len() - 1,
                got: offdiag.len(),
            });
        }
        Ok(Self { diag, offdiag })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    /// Index of the first non-finite entry (diagonal first, then off-diagonal).
    pub fn check_finite(&self) -> Result<()> {
        let dim = self.dim();
        if let Some(i) = self.diag.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        if let Some(i) = self.offdiag.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(dim + i));
        }
        Ok(())
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let d = &self.diag;
        let e = &self.offdiag;
        let dim = d.len();
        let mut out = vec![0.0; dim];
        for i in 0..dim {
            let mut acc = d[i] * v[i];
            if i > 0 {
                acc += e[i - 1] * v[i - 1];
            }
            if i + 1 < dim {
                acc += e[i] * v[i + 1];
            }
            out[i] = acc;
        }
        out
    }

    /// Union of the Gershgorin discs, as an interval `(lo, hi)`.
    pub fn gershgorin(&self) -> (f64, f64) {
        let dim = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..dim {
            let mut r = 0.0;
            if i > 0 {
                r += self.offdiag[i - 1].abs();
            }
            if i + 1 < dim {
                r += self.offdiag[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Infinity norm, an upper bound on the spectral radius.
    pub fn norm_inf(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    /// `(1 - s) * a + s * b`, entrywise.
    pub fn interpolate(a: &Self, b: &Self, s: f64) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                got: b.dim(),
            });
        }
        let mix = |x: &f64, y: &f64| (1.0 - s) * x + s * y;
        Ok(Self {
            diag: a.diag.iter().zip(&b.diag).map(|(x, y)| mix(x, y)).collect(),
            offdiag: a
                .offdiag
                .iter()
                .zip(&b.offdiag)
                .map(|(x, y)| mix(x, y))
                .collect(),
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            diag: self.diag.iter().map(|x| x * factor).collect(),
            offdiag: self.offdiag.iter().map(|x| x * factor).collect(),
        }
    }
}

/// Real unit vector over the Dicke basis of `n` qubits (`n + 1` amplitudes).
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricState {
    amp: Vec<f64>,
}

impl SymmetricState {
    pub const NORM_TOLERANCE: f64 = 1e-12;

    pub fn new(amp: Vec<f64>) -> Result<Self> {
        if amp.is_empty() {
            return Err(Error::invalid("amp", "state needs at least one amplitude"));
        }
        if let Some(i) = amp.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let dev = (norm_sq(&amp) - 1.0).abs();
        if dev > Self::NORM_TOLERANCE {
            return Err(Error::NotNormalized(dev));
        }
        Ok(Self { amp })
    }

    /// Rescales `amp` to unit norm.
    pub fn normalized(mut amp: Vec<f64>) -> Result<Self> {
        let norm = norm_sq(&amp).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::invalid(
                "amp",
                "cannot normalize a zero or non-finite vector",
            ));
        }
        amp.iter_mut().for_each(|x| *x /= norm);
        Ok(Self { amp })
    }

    /// Unit vector on Dicke index `k`.
    pub fn basis(n: usize, k: usize) -> Result<Self> {
        if k > n {
            return Err(Error::invalid("k", format!("{k} exceeds n = {n}")));
        }
        let mut amp = vec![0.0; n + 1];
        amp[k] = 1.0;
        Ok(Self { amp })
    }

    /// `|0...0>`, the fully z-polarized state (`k = n`).
    pub fn z_polarized(n: usize) -> Self {
        let mut amp = vec![0.0; n + 1];
        amp[n] = 1.0;
        Self { amp }
    }

    /// The fully x-polarized product state; component `k` is
    /// `sqrt(C(n, k)) / 2^(n/2)`.
    pub fn x_polarized(n: usize) -> Self {
        let amp = (0..=n).map(|k| x_polarized_weight(n, k).sqrt()).collect();
        Self { amp }
    }

    pub fn n(&self) -> usize {
        self.amp.len() - 1
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amp
    }

    pub fn into_amplitudes(self) -> Vec<f64> {
        self.amp
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.amp.iter().zip(&other.amp).map(|(a, b)| a * b).sum()
    }
}

impl AsRef<[f64]> for SymmetricState {
    fn as_ref(&self) -> &[f64] {
        &self.amp
    }
}

pub(crate) fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Matrix element `<m+1| S_x |m>` for Dicke index `k` (`m = k - n/2`).
///
/// Equals `sqrt(j(j+1) - m(m+1)) / 2`, written as `sqrt((n-k)(k+1)) / 2`.
pub fn ladder(n: usize, k: usize) -> f64 {
    debug_assert!(k < n);
    0.5 * (((n - k) * (k + 1)) as f64).sqrt()
}

/// `ln C(n, k)`.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum()
}

/// `C(n, k)` in floating point; exact for results below 2^53.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0;
    // c stays the integer C(n - k + i, i) at every step
    for i in 1..=k {
        c = c * (n - k + i) as f64 / i as f64;
    }
    c
}

/// `C(n, k) / 2^n`, the squared overlap of the x-polarized state with Dicke
/// index `k`.
pub fn x_polarized_weight(n: usize, k: usize) -> f64 {
    if n <= 60 {
        binomial(n, k) * 0.5f64.powi(n as i32)
    } else {
        (ln_binomial(n, k) - n as f64 * std::f64::consts::LN_2).exp()
    }
}

/// Energy of `HP(alpha)` on a state with `q` qubits in `|1>`:
/// `(1 - exp(-2 alpha q / n)) / (1 - exp(-2 alpha))`.
///
/// Algebraically equal to `(e^alpha - e^(2 alpha m / n)) / (2 sinh alpha)` with
/// `m = n/2 - q`, and free of overflow for large `alpha`.
pub fn hp_energy(n: usize, q: usize, alpha: f64) -> f64 {
    let x = q as f64 / n as f64;
    if alpha < ALPHA_LIMIT_THRESHOLD {
        x
    } else if alpha.is_infinite() {
        if q == 0 {
            0.0
        } else {
            1.0
        }
    } else {
        (-2.0 * alpha * x).exp_m1() / (-2.0 * alpha).exp_m1()
    }
}

/// `H0 = I/2 - S_x / n`.
pub fn build_h0(n: usize) -> Result<TridiagonalOperator> {
    check_n(n)?;
    let inv_n = 1.0 / n as f64;
    let diag = vec![0.5; n + 1];
    let offdiag = (0..n).map(|k| -ladder(n, k) * inv_n).collect();
    TridiagonalOperator::new(diag, offdiag)
}

/// `HP(alpha) = (e^alpha - e^(2 alpha S_z / n)) / (2 sinh alpha)`; diagonal.
pub fn build_hp(n: usize, alpha: f64) -> Result<TridiagonalOperator> {
    check_n(n)?;
    check_alpha(alpha)?;
    let diag = (0..=n).map(|k| hp_energy(n, n - k, alpha)).collect();
    TridiagonalOperator::new(diag, vec![0.0; n])
}

pub fn build_hs(params: &ModelParams) -> Result<TridiagonalOperator> {
    let h0 = build_h0(params.n)?;
    let hp = build_hp(params.n, params.alpha)?;
    TridiagonalOperator::interpolate(&h0, &hp, params.s)
}

/// A level of `HP` in the full `2^n` space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    /// Number of qubits in `|1>`.
    pub excitations: usize,
    pub energy: f64,
    /// `C(n, q)`.
    pub degeneracy: f64,
}

/// All `n + 1` distinct levels of `H(s = 1)`, ordered by excitation count.
pub fn level_energies_s1(n: usize, alpha: f64) -> Result<Vec<Level>> {
    check_n(n)?;
    check_alpha(alpha)?;
    Ok((0..=n)
        .map(|q| Level {
            excitations: q,
            energy: hp_energy(n, q, alpha),
            degeneracy: binomial(n, q),
        })
        .collect())
}

/// Levels of `H(s = 0) = H0`: energy `q / n` with degeneracy `C(n, q)`.
pub fn level_energies_s0(n: usize) -> Result<Vec<Level>> {
    check_n(n)?;
    Ok((0..=n)
        .map(|q| Level {
            excitations: q,
            energy: q as f64 / n as f64,
            degeneracy: binomial(n, q),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn h0_small_cases() {
        let h = build_h0(1).unwrap();
        assert_eq!(h.diag(), &[0.5, 0.5]);
        assert!(close(h.offdiag()[0], -0.5, 1e-15));

        let h = build_h0(2).unwrap();
        assert_eq!(h.diag(), &[0.5, 0.5, 0.5]);
        let r = 2f64.sqrt() / 4.0;
        assert!(h.offdiag().iter().all(|&x| close(x, -r, 1e-15)));
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(build_h0(0).is_err());
        assert!(build_hp(3, -1.0).is_err());
        assert!(build_hp(3, f64::NAN).is_err());
        assert!(ModelParams::new(3, 1.0, 1.5).is_err());
        assert!(ModelParams::new(0, 1.0, 0.5).is_err());
        assert!(level_energies_s1(4, -0.1).is_err());
    }

    #[test]
    fn hp_examples() {
        for alpha in [0.3, 1.0, 7.0, 800.0] {
            let h = build_hp(1, alpha).unwrap();
            assert!(close(h.diag()[0], 1.0, 1e-14), "alpha {alpha}");
            assert_eq!(h.diag()[1], 0.0);
        }
        let h = build_hp(5, f64::INFINITY).unwrap();
        assert_eq!(h.diag(), &[1.0, 1.0, 1.0, 1.0, 1.0, 0.0]);
        let h = build_hp(4, 0.0).unwrap();
        assert_eq!(h.diag(), &[1.0, 0.75, 0.5, 0.25, 0.0]);
    }

    #[test]
    fn hp_matches_textbook_form_where_it_is_representable() {
        let n = 6;
        for alpha in [0.5, 2.0, 10.0] {
            let h = build_hp(n, alpha).unwrap();
            for k in 0..=n {
                let m = k as f64 - n as f64 / 2.0;
                let direct =
                    (alpha.exp() - (2.0 * alpha * m / n as f64).exp()) / (2.0 * alpha.sinh());
                assert!(close(h.diag()[k], direct, 1e-13));
            }
        }
    }

    #[test]
    fn hp_diag_monotone_decreasing() {
        for alpha in [1e-3, 1.0, 5.0, 1e3] {
            let h = build_hp(30, alpha).unwrap();
            if alpha < 100.0 {
                assert!(h.diag().windows(2).all(|w| w[0] > w[1]));
            } else {
                // saturates to 1 in floating point
                assert!(h.diag().windows(2).all(|w| w[0] >= w[1]));
            }
            assert_eq!(h.diag()[30], 0.0);
        }
    }

    #[test]
    fn hs_endpoints_and_midpoint() {
        let p = ModelParams::new(7, 2.5, 0.0).unwrap();
        assert_eq!(build_hs(&p).unwrap(), build_h0(7).unwrap());
        let p = p.with_s(1.0).unwrap();
        assert_eq!(build_hs(&p).unwrap(), build_hp(7, 2.5).unwrap());

        for alpha in [0.1, 3.0, 40.0] {
            let h = build_hs(&ModelParams::new(1, alpha, 0.5).unwrap()).unwrap();
            assert!(close(h.diag()[0], 0.75, 1e-14));
            assert!(close(h.diag()[1], 0.25, 1e-14));
            assert!(close(h.offdiag()[0], -0.25, 1e-15));
        }
    }

    #[test]
    fn level_energies_limits() {
        let levels = level_energies_s1(8, 3.0).unwrap();
        assert_eq!(levels[0].energy, 0.0);
        assert_eq!(levels[0].degeneracy, 1.0);
        assert_eq!(levels[3].degeneracy, 56.0);
        let total: f64 = levels.iter().map(|l| l.degeneracy).sum();
        assert_eq!(total, 256.0);

        let inf = level_energies_s1(8, f64::INFINITY).unwrap();
        assert!(inf[1..].iter().all(|l| l.energy == 1.0));

        let zero = level_energies_s1(8, 0.0).unwrap();
        for l in &zero {
            assert!(close(l.energy, l.excitations as f64 / 8.0, 1e-15));
        }
    }

    #[test]
    fn ladder_matches_angular_momentum_formula() {
        for n in 1..12 {
            let j = n as f64 / 2.0;
            for k in 0..n {
                let m = k as f64 - j;
                let direct = 0.5 * (j * (j + 1.0) - m * (m + 1.0)).sqrt();
                assert!(close(ladder(n, k), direct, 1e-14));
            }
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(10, 5), 252.0);
        assert_eq!(binomial(52, 26), 495918532948104.0);
        assert_eq!(binomial(3, 4), 0.0);
        assert!(close(ln_binomial(300, 150), binomial(300, 150).ln(), 1e-9));
        let s: f64 = (0..=80).map(|k| x_polarized_weight(80, k)).sum();
        assert!(close(s, 1.0, 1e-13));
    }

    #[test]
    fn polarized_states_are_normalized() {
        for n in [1, 2, 9, 64, 500] {
            let x = SymmetricState::x_polarized(n);
            assert!(close(norm_sq(x.amplitudes()), 1.0, 1e-12));
            SymmetricState::new(x.into_amplitudes()).unwrap();
        }
        assert!(matches!(
            SymmetricState::new(vec![1.0, 1.0]),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn interpolate_rejects_mismatched_dims() {
        let a = build_h0(3).unwrap();
        let b = build_h0(4).unwrap();
        assert!(TridiagonalOperator::interpolate(&a, &b, 0.5).is_err());
    }
}
