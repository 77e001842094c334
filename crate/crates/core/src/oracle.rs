//! Brute-force construction of `H(s, alpha)` on the full `2^n` Hilbert space.
//!
//! Operators are assembled from Kronecker products of Pauli matrices, the
//! problem Hamiltonian through the product form `h_p = prod_k (I + p sigma_z^k)`
//! with `p = tanh(alpha / n)`. Dicke states are built by summing bit strings.
//! None of this shares code with [`crate::model`], so agreement between the two
//! is a real check.
//!
//! Qubit `k` is bit `k` of the basis index; bit value 0 is `|0>`
//! (`sigma_z = +1`).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{ModelParams, TridiagonalOperator, ALPHA_LIMIT_THRESHOLD};

/// Largest qubit count accepted by the dense constructors.
pub const MAX_QUBITS: usize = 14;

/// Tolerance on `max |[H, S^2]|` for sector extraction.
pub const COMMUTATION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    n: usize,
    matrix: DMatrix<f64>,
}

impl DenseOperator {
    pub fn from_matrix(n: usize, matrix: DMatrix<f64>) -> Result<Self> {
        let dim = 1usize << n;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { n, matrix })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        sorted_eigenvalues(self.matrix.clone())
    }
}

/// The bit string `J` of a target solution `|J_1 ... J_n>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionMask(Vec<bool>);

impl SolutionMask {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![false; n])
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![true; n])
    }

    /// Bit `k` of `value` becomes `J_k`.
    pub fn from_bits(n: usize, value: usize) -> Self {
        Self((0..n).map(|k| (value >> k) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// Basis index of `|w(J)>`.
    pub fn index(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .fold(0, |acc, (k, _)| acc | (1 << k))
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::invalid("n", "qubit count must be at least 1"));
    }
    if n > MAX_QUBITS {
        return Err(Error::TooLarge { n, max: MAX_QUBITS });
    }
    Ok(())
}

fn pauli_x() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

fn pauli_z() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

/// `|0><1|`, raises `S_z` by one.
fn sigma_plus() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0])
}

/// `op` acting on qubit `k` of `n`: `I ⊗ ... ⊗ op ⊗ ... ⊗ I` with qubit
/// `n - 1` as the leftmost factor.
pub fn single_site(op: &DMatrix<f64>, k: usize, n: usize) -> DMatrix<f64> {
    let id = DMatrix::<f64>::identity(2, 2);
    let mut out = DMatrix::<f64>::identity(1, 1);
    for site in (0..n).rev() {
        out = if site == k {
            out.kronecker(op)
        } else {
            out.kronecker(&id)
        };
    }
    out
}

fn collective(op: &DMatrix<f64>, n: usize, weight: f64) -> DMatrix<f64> {
    let dim = 1usize << n;
    (0..n).fold(DMatrix::zeros(dim, dim), |acc, k| {
        acc + single_site(op, k, n) * weight
    })
}

/// `S_x = (1/2) sum_k sigma_x^k`.
pub fn total_sx(n: usize) -> Result<DMatrix<f64>> {
    check_qubits(n)?;
    Ok(collective(&pauli_x(), n, 0.5))
}

/// `S_z = (1/2) sum_k sigma_z^k`.
pub fn total_sz(n: usize) -> Result<DMatrix<f64>> {
    check_qubits(n)?;
    Ok(collective(&pauli_z(), n, 0.5))
}

/// `S^2 = S_+ S_- + S_z^2 - S_z`, real in the computational basis.
pub fn total_spin_squared(n: usize) -> Result<DMatrix<f64>> {
    check_qubits(n)?;
    let sp = collective(&sigma_plus(), n, 1.0);
    let sz = collective(&pauli_z(), n, 0.5);
    Ok(&sp * sp.transpose() + &sz * &sz - sz)
}

/// `h_p = prod_k (I + p sigma_z^k)`.
pub fn product_hp(n: usize, p: f64) -> Result<DMatrix<f64>> {
    check_qubits(n)?;
    let factor = DMatrix::from_row_slice(2, 2, &[1.0 + p, 0.0, 0.0, 1.0 - p]);
    let mut out = DMatrix::<f64>::identity(1, 1);
    for _ in 0..n {
        out = out.kronecker(&factor);
    }
    Ok(out)
}

/// `H0 = I/2 - S_x / n` on the full space.
pub fn full_h0(n: usize) -> Result<DMatrix<f64>> {
    let dim = 1usize << n;
    let sx = total_sx(n)?;
    Ok(DMatrix::identity(dim, dim) * 0.5 - sx / n as f64)
}

/// `HP(alpha)` on the full space.
///
/// For finite `alpha` this uses `h_p = (1 - p^2)^(n/2) e^(2 alpha S_z / n)`, so
/// `HP = (I - e^(-alpha) (1 - p^2)^(-n/2) h_p) / (1 - e^(-2 alpha))`.
pub fn full_hp(n: usize, alpha: f64) -> Result<DMatrix<f64>> {
    check_qubits(n)?;
    crate::model::check_alpha(alpha)?;
    let dim = 1usize << n;
    if alpha < ALPHA_LIMIT_THRESHOLD {
        return Ok(DMatrix::identity(dim, dim) * 0.5 - total_sz(n)? / n as f64);
    }
    if alpha.is_infinite() {
        let mut m = DMatrix::identity(dim, dim);
        m[(0, 0)] = 0.0;
        return Ok(m);
    }
    let p = (alpha / n as f64).tanh();
    let hp = product_hp(n, p)?;
    let prefactor = (-alpha - 0.5 * n as f64 * (-p * p).ln_1p()).exp();
    let denom = -(-2.0 * alpha).exp_m1();
    Ok((DMatrix::identity(dim, dim) - hp * prefactor) / denom)
}

/// Full `2^n x 2^n` matrix of `H(s, alpha)`.
pub fn build_full(params: &ModelParams) -> Result<DenseOperator> {
    let n = params.n();
    check_qubits(n)?;
    let s = params.s();
    let h = full_h0(n)? * (1.0 - s) + full_hp(n, params.alpha())? * s;
    DenseOperator::from_matrix(n, h)
}

/// `U = prod_k (sigma_x^k)^(J_k)` as a dense matrix.
pub fn gauge_unitary(mask: &SolutionMask) -> Result<DMatrix<f64>> {
    let n = mask.len();
    check_qubits(n)?;
    let dim = 1usize << n;
    let x = pauli_x();
    Ok(mask
        .bits()
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .fold(DMatrix::identity(dim, dim), |acc, (k, _)| {
            acc * single_site(&x, k, n)
        }))
}

/// `U H U^dagger`. `U` permutes basis states by XOR with the mask, so this is
/// an exact relabeling of rows and columns.
pub fn apply_gauge(h: &DenseOperator, mask: &SolutionMask) -> Result<DenseOperator> {
    if mask.len() != h.n() {
        return Err(Error::DimensionMismatch {
            expected: h.n(),
            got: mask.len(),
        });
    }
    let m = mask.index();
    let dim = h.dim();
    let src = h.matrix();
    let out = DMatrix::from_fn(dim, dim, |i, j| src[(i ^ m, j ^ m)]);
    DenseOperator::from_matrix(h.n(), out)
}

/// Columns are the normalized Dicke states of `n` qubits, column `k` holding
/// the `q = n - k` excitation state as a uniform superposition of bit strings.
pub fn dicke_basis(n: usize) -> Result<DMatrix<f64>> {
    check_qubits(n)?;
    let dim = 1usize << n;
    let mut counts = vec![0usize; n + 1];
    for i in 0..dim {
        counts[i.count_ones() as usize] += 1;
    }
    let mut b = DMatrix::zeros(dim, n + 1);
    for i in 0..dim {
        let q = i.count_ones() as usize;
        b[(i, n - q)] = 1.0 / (counts[q] as f64).sqrt();
    }
    Ok(b)
}

/// Largest absolute entry of `A B - B A`.
pub fn commutator_norm(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a * b - b * a).amax()
}

/// Projection of `h` onto the maximal-spin sector, an `(n+1) x (n+1)` matrix
/// in the same index convention as [`crate::model`].
pub fn symmetric_sector(h: &DenseOperator) -> Result<DMatrix<f64>> {
    let n = h.n();
    let s2 = total_spin_squared(n)?;
    let c = commutator_norm(h.matrix(), &s2);
    if c > COMMUTATION_TOLERANCE {
        return Err(Error::NotPermutationSymmetric(c));
    }
    let b = dicke_basis(n)?;
    Ok(b.transpose() * h.matrix() * b)
}

/// Dense copy of a tridiagonal operator.
pub fn tridiagonal_to_dense(t: &TridiagonalOperator) -> DMatrix<f64> {
    let dim = t.dim();
    let mut m = DMatrix::from_diagonal(&DVector::from_column_slice(t.diag()));
    for (i, &e) in t.offdiag().iter().enumerate() {
        m[(i, i + 1)] = e;
        m[(i + 1, i)] = e;
    }
    debug_assert_eq!(m.nrows(), dim);
    m
}

pub fn sorted_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Outcome of comparing the tridiagonal path with the dense oracle at one
/// parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub params: ModelParams,
    /// Max entrywise difference between the projected block and `build_hs`.
    pub block_deviation: f64,
    /// Max difference between tridiagonal eigenvalues and eigenvalues of the
    /// projected block.
    pub sector_deviation: f64,
    /// Max distance from each tridiagonal eigenvalue to the nearest eigenvalue
    /// of the full `2^n` matrix.
    pub full_spectrum_deviation: f64,
    /// Max difference of sorted full spectra before and after a gauge
    /// transformation, if one was checked.
    pub gauge_deviation: Option<f64>,
}

/// Runs the sector-equivalence checks at `params`, plus the gauge check when
/// `mask` is given.
pub fn verify_point(params: &ModelParams, mask: Option<&SolutionMask>) -> Result<OracleReport> {
    let t = crate::model::build_hs(params)?;
    let tri = crate::eigensolver::eigen_all(&t)?.values;

    let full = build_full(params)?;
    let block = symmetric_sector(&full)?;
    let block_deviation = (&block - tridiagonal_to_dense(&t)).amax();
    let block_vals = sorted_eigenvalues(block);
    let sector_deviation = tri
        .iter()
        .zip(&block_vals)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let full_vals = full.eigenvalues();
    let full_spectrum_deviation = tri
        .iter()
        .map(|v| nearest_distance(&full_vals, *v))
        .fold(0.0, f64::max);

    let gauge_deviation = match mask {
        Some(mask) => {
            let g = apply_gauge(&full, mask)?.eigenvalues();
            Some(
                g.iter()
                    .zip(&full_vals)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max),
            )
        }
        None => None,
    };

    Ok(OracleReport {
        params: *params,
        block_deviation,
        sector_deviation,
        full_spectrum_deviation,
        gauge_deviation,
    })
}

/// Distance from `x` to the closest entry of the ascending slice `sorted`.
fn nearest_distance(sorted: &[f64], x: f64) -> f64 {
    let idx = sorted.partition_point(|v| *v < x);
    let mut best = f64::INFINITY;
    if idx < sorted.len() {
        best = best.min((sorted[idx] - x).abs());
    }
    if idx > 0 {
        best = best.min((sorted[idx - 1] - x).abs());
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_hs;

    fn params(n: usize, alpha: f64, s: f64) -> ModelParams {
        ModelParams::new(n, alpha, s).unwrap()
    }

    #[test]
    fn one_qubit_matches_tridiagonal() {
        for (alpha, s) in [(0.0, 0.3), (1.5, 0.5), (f64::INFINITY, 0.8)] {
            let p = params(1, alpha, s);
            let full = build_full(&p).unwrap();
            let dense = tridiagonal_to_dense(&build_hs(&p).unwrap());
            // single qubit: basis index 0 = |0> is Dicke k = 1
            let perm = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
            let diff = (&perm * full.matrix() * &perm - dense).amax();
            assert!(diff < 1e-15, "alpha {alpha}: {diff}");
        }
    }

    #[test]
    fn tridiagonal_eigenvalues_appear_in_full_spectrum() {
        let r = verify_point(&params(3, 2.0, 0.4), None).unwrap();
        assert!(r.full_spectrum_deviation < 1e-12);
        assert!(r.sector_deviation < 1e-12);
        assert!(r.block_deviation < 1e-12);
        assert_eq!(full_h0(3).unwrap().nrows(), 8);
    }

    #[test]
    fn product_form_matches_exponential() {
        for (n, alpha) in [(3, 0.7), (5, 2.0), (6, 9.0)] {
            let p: f64 = (alpha / n as f64).tanh();
            let hp = product_hp(n, p).unwrap();
            let sz = total_sz(n).unwrap();
            let exp_diag = sz.diagonal().map(|m| (2.0 * p.atanh() * m).exp());
            let scale = (1.0 - p * p).powf(n as f64 / 2.0);
            for i in 0..hp.nrows() {
                let lhs = scale * exp_diag[i];
                assert!((lhs - hp[(i, i)]).abs() < 1e-12 * lhs.max(1.0));
            }
        }
    }

    #[test]
    fn gauge_identity_mask_is_noop() {
        let full = build_full(&params(4, 3.0, 0.6)).unwrap();
        let g = apply_gauge(&full, &SolutionMask::zeros(4)).unwrap();
        assert_eq!(g, full);
    }

    #[test]
    fn gauge_permutation_equals_conjugation() {
        let full = build_full(&params(4, 2.0, 0.35)).unwrap();
        let mask = SolutionMask::from_bits(4, 0b1011);
        let u = gauge_unitary(&mask).unwrap();
        let conj = &u * full.matrix() * u.transpose();
        let perm = apply_gauge(&full, &mask).unwrap();
        assert!((conj - perm.matrix()).amax() < 1e-15);
    }

    #[test]
    fn gauge_preserves_spectrum_and_h0() {
        let n = 5;
        let full = build_full(&params(n, 4.0, 0.45)).unwrap();
        let before = full.eigenvalues();
        for bits in [1usize, 0b10110, 0b11111] {
            let mask = SolutionMask::from_bits(n, bits);
            let after = apply_gauge(&full, &mask).unwrap().eigenvalues();
            let dev = before
                .iter()
                .zip(&after)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(dev < 1e-12, "mask {bits:b}: {dev}");
        }
        let h0 = DenseOperator::from_matrix(n, full_h0(n).unwrap()).unwrap();
        let moved = apply_gauge(&h0, &SolutionMask::from_bits(n, 0b01101)).unwrap();
        assert!((moved.matrix() - h0.matrix()).amax() < 1e-15);
    }

    #[test]
    fn gauge_moves_problem_ground_state() {
        let n = 4;
        let hp = build_full(&params(n, 2.0, 1.0)).unwrap();
        let mask = SolutionMask::ones(n);
        let g = apply_gauge(&hp, &mask).unwrap();
        let diag = g.matrix().diagonal();
        let (argmin, _) = diag
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert_eq!(argmin, 0b1111);
        assert!(diag[0b1111].abs() < 1e-14);
    }

    #[test]
    fn gauge_rejects_wrong_length() {
        let full = build_full(&params(3, 1.0, 0.5)).unwrap();
        assert!(matches!(
            apply_gauge(&full, &SolutionMask::zeros(4)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sector_block_examples() {
        let p = params(2, 1.0, 0.5);
        let block = symmetric_sector(&build_full(&p).unwrap()).unwrap();
        let dense = tridiagonal_to_dense(&build_hs(&p).unwrap());
        assert!((block - dense).amax() < 1e-12);

        let id = DenseOperator::from_matrix(3, DMatrix::identity(8, 8)).unwrap();
        let block = symmetric_sector(&id).unwrap();
        assert!((block - DMatrix::<f64>::identity(4, 4)).amax() < 1e-14);

        let block = symmetric_sector(&build_full(&params(3, 5.0, 0.0)).unwrap()).unwrap();
        let vals = sorted_eigenvalues(block);
        for (v, want) in vals.iter().zip([0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]) {
            assert!((v - want).abs() < 1e-12);
        }
    }

    #[test]
    fn sector_rejects_non_symmetric_operator() {
        let n = 3;
        let h = single_site(&pauli_z(), 0, n);
        let op = DenseOperator::from_matrix(n, h).unwrap();
        assert!(matches!(
            symmetric_sector(&op),
            Err(Error::NotPermutationSymmetric(_))
        ));
    }

    #[test]
    fn full_hamiltonian_commutes_with_total_spin() {
        let n = 5;
        let s2 = total_spin_squared(n).unwrap();
        for (alpha, s) in [(0.0, 0.2), (2.5, 0.7), (f64::INFINITY, 0.4)] {
            let h = build_full(&params(n, alpha, s)).unwrap();
            assert!(commutator_norm(h.matrix(), &s2) < 1e-13);
        }
    }

    #[test]
    fn total_spin_of_dicke_states() {
        let n = 4;
        let s2 = total_spin_squared(n).unwrap();
        let b = dicke_basis(n).unwrap();
        let j = n as f64 / 2.0;
        let applied = &s2 * &b - &b * (j * (j + 1.0));
        assert!(applied.amax() < 1e-13);
        let gram = b.transpose() * &b;
        assert!((gram - DMatrix::<f64>::identity(n + 1, n + 1)).amax() < 1e-14);
    }

    #[test]
    fn resource_guard() {
        assert!(matches!(
            build_full(&params(15, 1.0, 0.5)),
            Err(Error::TooLarge { n: 15, max: 14 })
        ));
    }
}
