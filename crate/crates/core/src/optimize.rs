//! One-dimensional minimization helpers shared by the gap and mean-field searches.

use crate::error::Result;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a minimum of `f` on `[a, b]`, stopping once the
/// bracket is narrower than `tol`. Returns the best point seen and its value.
pub fn golden_section<F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = if a <= b { (a, b) } else { (b, a) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let fa = f(a)?;
    let fb = f(b)?;
    let mut best = [(a, fa), (b, fb), (c, fc), (d, fd)]
        .into_iter()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .unwrap_or((a, fa));

    while (b - a) > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
            if fc < best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
            if fd < best.1 {
                best = (d, fd);
            }
        }
        // the bracket can stop shrinking once it reaches floating-point resolution
        if c >= d {
            break;
        }
    }
    Ok(best)
}

/// Evenly spaced grid of `count` points over `[a, b]`, endpoints included.
pub fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let step = (b - a) / (count - 1) as f64;
            (0..count)
                .map(|i| {
                    if i + 1 == count {
                        b
                    } else {
                        a + i as f64 * step
                    }
                })
                .collect()
        }
    }
}

/// Indices of discrete local minima of `values` (endpoints included, ties
/// resolved toward the left).
pub fn local_minima(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    let mut out = Vec::new();
    for i in 0..n {
        let left_ok = i == 0 || values[i] < values[i - 1];
        let right_ok = i + 1 == n || values[i] <= values[i + 1];
        if left_ok && right_ok {
            out.push(i);
        }
    }
    out
}
