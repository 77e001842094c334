//! Eigenvalues and eigenvectors of real symmetric tridiagonal matrices.
//!
//! Full spectra use the implicit-shift QL iteration (O(dim^2) without vectors).
//! Selected low-lying eigenvalues use Sturm-sequence bisection, which is O(dim)
//! per step and is what the gap searches call thousands of times; their
//! eigenvectors come from inverse iteration with a pivoted tridiagonal LU.

use crate::error::{Error, Result};
use crate::model::{SymmetricState, TridiagonalOperator};

const MAX_QL_SWEEPS: usize = 60;
const MAX_BISECTION_STEPS: usize = 256;
const MAX_INVERSE_ITERATIONS: usize = 8;
/// Eigenvalues closer than this (relative to the matrix norm) are treated as a
/// cluster and their vectors are explicitly orthogonalized.
const CLUSTER_TOLERANCE: f64 = 1e-3;
/// Components below this fraction of the largest one are skipped when fixing
/// the sign of an eigenvector.
const SIGN_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    /// Ascending.
    pub values: Vec<f64>,
    pub vectors: Option<Vec<SymmetricState>>,
}

/// The two lowest eigenpairs.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundPair {
    pub e0: f64,
    pub e1: f64,
    pub gap: f64,
    pub psi0: SymmetricState,
    pub psi1: SymmetricState,
}

/// All eigenvalues, ascending.
pub fn eigen_all(t: &TridiagonalOperator) -> Result<EigenResult> {
    t.check_finite()?;
    let mut d = t.diag().to_vec();
    let mut e = t.offdiag().to_vec();
    e.push(0.0);
    implicit_ql(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(EigenResult {
        values: d,
        vectors: None,
    })
}

/// All eigenpairs, ascending, with the sign convention applied to each vector.
pub fn eigen_all_with_vectors(t: &TridiagonalOperator) -> Result<EigenResult> {
    t.check_finite()?;
    let dim = t.dim();
    let mut d = t.diag().to_vec();
    let mut e = t.offdiag().to_vec();
    e.push(0.0);
    let mut z = vec![0.0; dim * dim];
    for i in 0..dim {
        z[i * dim + i] = 1.0;
    }
    implicit_ql(&mut d, &mut e, Some(&mut z))?;

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let mut v = z[i * dim..(i + 1) * dim].to_vec();
            fix_sign(&mut v);
            SymmetricState::normalized(v)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EigenResult {
        values,
        vectors: Some(vectors),
    })
}

/// The `count` lowest eigenvalues by bisection, ascending.
pub fn lowest_values(t: &TridiagonalOperator, count: usize) -> Result<Vec<f64>> {
    t.check_finite()?;
    let count = count.min(t.dim());
    let sturm = Sturm::new(t);
    // Bisect from the top so each lower value can reuse the bracket above it.
    let mut upper = sturm.hi;
    let mut vals = vec![0.0; count];
    for k in (0..count).rev() {
        let v = sturm.kth(k, sturm.lo, upper);
        vals[k] = v;
        upper = (v + 4.0 * f64::EPSILON * v.abs() + 2.0 * sturm.abstol).min(sturm.hi);
    }
    Ok(vals)
}

/// The `count` lowest eigenpairs (bisection + inverse iteration).
pub fn lowest_eigenpairs(t: &TridiagonalOperator, count: usize) -> Result<EigenResult> {
    let values = lowest_values(t, count)?;
    let scale = t.norm_inf().max(f64::MIN_POSITIVE);
    let mut raw: Vec<Vec<f64>> = Vec::with_capacity(values.len());
    for (i, &lambda) in values.iter().enumerate() {
        // vectors of a cluster must be orthogonalized against each other
        let cluster: Vec<&Vec<f64>> = (0..i)
            .filter(|&j| (lambda - values[j]).abs() <= CLUSTER_TOLERANCE * scale)
            .map(|j| &raw[j])
            .collect();
        let v = inverse_iteration(t, lambda, &cluster)?;
        raw.push(v);
    }
    let vectors = raw
        .into_iter()
        .map(|mut v| {
            fix_sign(&mut v);
            SymmetricState::normalized(v)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EigenResult {
        values,
        vectors: Some(vectors),
    })
}

pub fn ground_pair(t: &TridiagonalOperator) -> Result<GroundPair> {
    if t.dim() < 2 {
        return Err(Error::invalid("dim", "ground_pair needs dimension >= 2"));
    }
    let res = lowest_eigenpairs(t, 2)?;
    let mut vecs = res.vectors.unwrap_or_default().into_iter();
    let (psi0, psi1) = match (vecs.next(), vecs.next()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::NoConvergence("ground pair eigenvectors")),
    };
    let (e0, e1) = (res.values[0], res.values[1]);
    Ok(GroundPair {
        e0,
        e1,
        gap: (e1 - e0).max(0.0),
        psi0,
        psi1,
    })
}

/// `E1 - E0` without eigenvectors.
pub fn gap(t: &TridiagonalOperator) -> Result<f64> {
    let v = lowest_values(t, 2)?;
    if v.len() < 2 {
        return Err(Error::invalid("dim", "gap needs dimension >= 2"));
    }
    Ok((v[1] - v[0]).max(0.0))
}

/// Flips `v` so its first component of non-negligible magnitude is positive.
pub fn fix_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > SIGN_THRESHOLD * max) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Implicit QL with Wilkinson-type shifts. `e[i]` couples `i` and `i + 1`;
/// `e` has length `dim` with a trailing zero. Eigenvectors, if requested,
/// accumulate into the column-major `z` (column `i` = vector `i`).
fn implicit_ql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_QL_SWEEPS {
                return Err(Error::NoConvergence("implicit QL"));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    let (left, right) = z.split_at_mut((i + 1) * n);
                    let col_i = &mut left[i * n..];
                    let col_next = &mut right[..n];
                    for (zi, zn) in col_i.iter_mut().zip(col_next.iter_mut()) {
                        let f = *zn;
                        *zn = s * *zi + c * f;
                        *zi = c * *zi - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Sturm-sequence counting for a fixed matrix.
struct Sturm<'a> {
    d: &'a [f64],
    e2: Vec<f64>,
    pivmin: f64,
    abstol: f64,
    lo: f64,
    hi: f64,
}

impl<'a> Sturm<'a> {
    fn new(t: &'a TridiagonalOperator) -> Self {
        let e2: Vec<f64> = t.offdiag().iter().map(|x| x * x).collect();
        let max_e2 = e2.iter().fold(1.0f64, |m, &x| m.max(x));
        let pivmin = f64::MIN_POSITIVE * max_e2;
        let (lo, hi) = t.gershgorin();
        let norm = lo.abs().max(hi.abs());
        let pad = 2.0 * f64::EPSILON * norm + 2.0 * pivmin;
        Self {
            d: t.diag(),
            e2,
            pivmin,
            abstol: 0.5 * f64::EPSILON * norm,
            lo: lo - pad,
            hi: hi + pad,
        }
    }

    /// Number of eigenvalues strictly below `x`.
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = self.d[0] - x;
        if q.abs() < self.pivmin {
            q = -self.pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.d.len() {
            q = self.d[i] - x - self.e2[i - 1] / q;
            if q.abs() < self.pivmin {
                q = -self.pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Eigenvalue `k` (0-based), known to lie in `[lo, hi]`.
    fn kth(&self, k: usize, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..MAX_BISECTION_STEPS {
            let width = hi - lo;
            let tol = 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + self.abstol + self.pivmin;
            if width <= tol {
                break;
            }
            let mid = lo + 0.5 * width;
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo + 0.5 * (hi - lo)
    }
}

/// Inverse iteration for the eigenvalue `lambda`, orthogonalized against
/// `cluster` (unit vectors of nearby eigenvalues).
fn inverse_iteration(
    t: &TridiagonalOperator,
    lambda: f64,
    cluster: &[&Vec<f64>],
) -> Result<Vec<f64>> {
    let n = t.dim();
    let scale = t.norm_inf().max(f64::MIN_POSITIVE);
    if n == 1 {
        return Ok(vec![1.0]);
    }
    let lu = TridiagonalLu::factor(t, lambda, f64::EPSILON * scale);
    // deterministic, non-special start vector
    let mut x: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.25 * (((i * 7919 + 13) % 101) as f64 / 101.0))
        .collect();
    orthogonalize(&mut x, cluster);
    normalize(&mut x);

    for it in 0..MAX_INVERSE_ITERATIONS {
        lu.solve(&mut x);
        orthogonalize(&mut x, cluster);
        if !normalize(&mut x) {
            return Err(Error::NoConvergence("inverse iteration"));
        }
        if it >= 1 {
            let tx = t.matvec(&x);
            let res = tx
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - lambda * b).powi(2))
                .sum::<f64>()
                .sqrt();
            if res <= 1e-12 * scale {
                return Ok(x);
            }
        }
    }
    let tx = t.matvec(&x);
    let res = tx
        .iter()
        .zip(&x)
        .map(|(a, b)| (a - lambda * b).powi(2))
        .sum::<f64>()
        .sqrt();
    if res <= 1e-10 * scale {
        Ok(x)
    } else {
        Err(Error::NoConvergence("inverse iteration"))
    }
}

fn orthogonalize(x: &mut [f64], basis: &[&Vec<f64>]) {
    // two passes of classical Gram-Schmidt
    for _ in 0..2 {
        for b in basis {
            let proj: f64 = x.iter().zip(b.iter()).map(|(a, c)| a * c).sum();
            x.iter_mut().zip(b.iter()).for_each(|(a, c)| *a -= proj * c);
        }
    }
}

fn normalize(x: &mut [f64]) -> bool {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !norm.is_finite() || norm == 0.0 {
        return false;
    }
    x.iter_mut().for_each(|v| *v /= norm);
    true
}

/// LU factorization with partial pivoting of `T - shift * I`.
struct TridiagonalLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    fn factor(t: &TridiagonalOperator, shift: f64, tiny: f64) -> Self {
        let n = t.dim();
        let mut dl = t.offdiag().to_vec();
        let mut du = t.offdiag().to_vec();
        let mut d: Vec<f64> = t.diag().iter().map(|x| x - shift).collect();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                let fact = if d[i] != 0.0 { dl[i] / d[i] } else { 0.0 };
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        for p in d.iter_mut() {
            if p.abs() < tiny {
                *p = if *p < 0.0 { -tiny } else { tiny };
            }
        }
        Self {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.dl[i] * b[i];
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_hs, ModelParams};
    use proptest::prelude::*;

    fn hs(n: usize, alpha: f64, s: f64) -> TridiagonalOperator {
        build_hs(&ModelParams::new(n, alpha, s).unwrap()).unwrap()
    }

    fn residual(t: &TridiagonalOperator, lambda: f64, v: &[f64]) -> f64 {
        t.matvec(v)
            .iter()
            .zip(v)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn one_by_one() {
        let t = TridiagonalOperator::new(vec![3.25], vec![]).unwrap();
        assert_eq!(eigen_all(&t).unwrap().values, vec![3.25]);
        assert_eq!(lowest_values(&t, 1).unwrap().len(), 1);
        assert!((lowest_values(&t, 1).unwrap()[0] - 3.25).abs() < 1e-15);
        assert!(ground_pair(&t).is_err());
    }

    #[test]
    fn two_by_two_closed_form() {
        let t = hs(1, 1.0, 0.5);
        let r = 2f64.sqrt() / 4.0;
        let vals = eigen_all(&t).unwrap().values;
        assert!((vals[0] - (0.5 - r)).abs() < 1e-15);
        assert!((vals[1] - (0.5 + r)).abs() < 1e-15);
        let gp = ground_pair(&t).unwrap();
        assert!((gp.gap - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn separable_spectrum_is_equally_spaced() {
        let (n, s) = (50, 0.3);
        let t = hs(n, 0.0, s);
        let r = (s * s + (1.0 - s) * (1.0 - s)).sqrt();
        let e_min = 0.5 * (1.0 - r);
        let vals = eigen_all(&t).unwrap().values;
        for (q, v) in vals.iter().enumerate() {
            assert!((v - (e_min + q as f64 * r / n as f64)).abs() < 1e-10);
        }
        let low = lowest_values(&t, 5).unwrap();
        for (a, b) in low.iter().zip(&vals) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn non_finite_input_rejected() {
        let t = TridiagonalOperator::new(vec![1.0, f64::NAN], vec![0.1]).unwrap();
        assert_eq!(eigen_all(&t), Err(Error::NonFinite(1)));
        let t = TridiagonalOperator::new(vec![1.0, 2.0], vec![f64::INFINITY]).unwrap();
        assert!(matches!(ground_pair(&t), Err(Error::NonFinite(2))));
    }

    #[test]
    fn ground_state_at_endpoints() {
        for n in [1, 4, 9, 40] {
            let gp = ground_pair(&hs(n, 2.0, 0.0)).unwrap();
            assert!(gp.e0.abs() < 1e-14);
            let x = SymmetricState::x_polarized(n);
            assert!((gp.psi0.dot(&x) - 1.0).abs() < 1e-12);

            let gp = ground_pair(&hs(n, 2.0, 1.0)).unwrap();
            assert!(gp.e0.abs() < 1e-15);
            assert!((gp.psi0.amplitudes()[n] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn vectors_are_deterministic() {
        let t = hs(60, 5.0, 0.31);
        let a = ground_pair(&t).unwrap();
        let b = ground_pair(&t).unwrap();
        assert_eq!(a, b);
        let c = eigen_all_with_vectors(&t).unwrap();
        let d = eigen_all_with_vectors(&t).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn ql_and_bisection_agree_with_vectors() {
        let t = hs(30, 5.0, 0.3);
        let full = eigen_all_with_vectors(&t).unwrap();
        let low = lowest_eigenpairs(&t, 4).unwrap();
        let fv = full.vectors.unwrap();
        let lv = low.vectors.unwrap();
        for k in 0..4 {
            assert!((full.values[k] - low.values[k]).abs() < 1e-13);
            assert!((fv[k].dot(&lv[k]).abs() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn exactly_degenerate_pair_stays_orthonormal() {
        // direct sum of two identical blocks
        let t = TridiagonalOperator::new(vec![1.0, 2.0, 1.0, 2.0], vec![0.5, 0.0, 0.5]).unwrap();
        let res = lowest_eigenpairs(&t, 2).unwrap();
        let v = res.vectors.unwrap();
        assert!((res.values[0] - res.values[1]).abs() < 1e-14);
        assert!(v[0].dot(&v[1]).abs() < 1e-12);
        for (val, vec) in res.values.iter().zip(&v) {
            assert!(residual(&t, *val, vec.amplitudes()) < 1e-12);
        }
    }

    #[test]
    fn near_degenerate_first_order_ground_pair() {
        // exponentially small gap at a first-order anti-crossing
        let t = hs(200, 8.0, 0.33);
        let gp = ground_pair(&t).unwrap();
        assert!(gp.psi0.dot(&gp.psi1).abs() < 1e-10);
        assert!(residual(&t, gp.e0, gp.psi0.amplitudes()) < 1e-10);
        assert!(residual(&t, gp.e1, gp.psi1.amplitudes()) < 1e-10);
    }

    fn arb_tridiagonal() -> impl Strategy<Value = TridiagonalOperator> {
        (1usize..40).prop_flat_map(|dim| {
            (
                proptest::collection::vec(-2.0f64..2.0, dim),
                proptest::collection::vec(-1.0f64..1.0, dim - 1),
            )
                .prop_map(|(d, e)| TridiagonalOperator::new(d, e).unwrap())
        })
    }

    proptest! {
        #[test]
        fn eigenpairs_satisfy_contract(t in arb_tridiagonal()) {
            let res = eigen_all_with_vectors(&t).unwrap();
            let norm = t.norm_inf().max(1e-300);
            let (glo, ghi) = t.gershgorin();
            prop_assert!(res.values.windows(2).all(|w| w[0] <= w[1]));
            let vecs = res.vectors.unwrap();
            for (i, (val, v)) in res.values.iter().zip(&vecs).enumerate() {
                prop_assert!(*val >= glo - 1e-12 && *val <= ghi + 1e-12);
                prop_assert!(residual(&t, *val, v.amplitudes()) <= 1e-10 * norm);
                for w in &vecs[..i] {
                    prop_assert!(v.dot(w).abs() <= 1e-10);
                }
            }
            let vals_only = eigen_all(&t).unwrap().values;
            for (a, b) in vals_only.iter().zip(&res.values) {
                prop_assert!((a - b).abs() <= 1e-12 * norm.max(1.0));
            }
        }

        #[test]
        fn bisection_matches_ql(t in arb_tridiagonal(), count in 1usize..6) {
            let all = eigen_all(&t).unwrap().values;
            let low = lowest_eigenpairs(&t, count).unwrap();
            let norm = t.norm_inf().max(1.0);
            for (k, val) in low.values.iter().enumerate() {
                prop_assert!((val - all[k]).abs() <= 1e-12 * norm);
            }
            let vecs = low.vectors.unwrap();
            for (i, (val, v)) in low.values.iter().zip(&vecs).enumerate() {
                prop_assert!(residual(&t, *val, v.amplitudes()) <= 1e-10 * norm);
                for w in &vecs[..i] {
                    prop_assert!(v.dot(w).abs() <= 1e-10);
                }
            }
        }
    }
}
