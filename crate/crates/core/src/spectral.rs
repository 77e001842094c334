//! Minimum-gap search, finite-size gap scaling, level anti-crossings and
//! density of states at the path endpoints.

use rayon::prelude::*;

use crate::eigensolver;
use crate::error::{Error, Result};
use crate::model::{self, TridiagonalOperator};
use crate::optimize::{golden_section, linspace, local_minima};

pub const DEFAULT_COARSE_POINTS: usize = 200;
pub const DEFAULT_S_TOLERANCE: f64 = 1e-12;
/// Anti-crossings are local gap minima below this fraction of the median gap
/// of the same level pair.
pub const DEFAULT_PROMINENCE: f64 = 0.5;

/// `H0` and `HP` for one `(n, alpha)`, interpolated on demand.
#[derive(Debug, Clone)]
pub struct Path {
    h0: TridiagonalOperator,
    hp: TridiagonalOperator,
}

impl Path {
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        Ok(Self {
            h0: model::build_h0(n)?,
            hp: model::build_hp(n, alpha)?,
        })
    }

    pub fn n(&self) -> usize {
        self.h0.dim() - 1
    }

    fn dim(&self) -> usize {
        self.h0.dim()
    }

    pub fn at(&self, s: f64) -> Result<TridiagonalOperator> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::invalid("s", format!("{s} is outside [0, 1]")));
        }
        TridiagonalOperator::interpolate(&self.h0, &self.hp, s)
    }

    pub fn gap(&self, s: f64) -> Result<f64> {
        eigensolver::gap(&self.at(s)?)
    }

    /// `d(E1 - E0)/ds` by Hellmann-Feynman, `<psi1|HP - H0|psi1> - <psi0|HP - H0|psi0>`.
    pub fn gap_slope(&self, s: f64) -> Result<f64> {
        let pair = eigensolver::ground_pair(&self.at(s)?)?;
        let d = |psi: &[f64]| -> f64 {
            let a = self.hp.matvec(psi);
            let b = self.h0.matvec(psi);
            psi.iter()
                .zip(a.iter().zip(&b))
                .map(|(p, (x, y))| p * (x - y))
                .sum()
        };
        Ok(d(pair.psi1.amplitudes()) - d(pair.psi0.amplitudes()))
    }

    /// `levels[i]` is `E_i(s)` for the `count` lowest levels.
    pub fn levels(&self, s: f64, count: usize) -> Result<Vec<f64>> {
        eigensolver::lowest_values(&self.at(s)?, count)
    }
}

pub fn gap_at(n: usize, alpha: f64, s: f64) -> Result<f64> {
    Path::new(n, alpha)?.gap(s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinGap {
    pub s: f64,
    pub gap: f64,
}

/// Global minimum of `E1 - E0` over `s in [0, 1]`: a 200-point scan, then
/// refinement to `s_tolerance` around the best grid point.
///
/// The refinement bisects on the sign of the gap slope when it changes sign
/// across the bracket. Golden section on the gap itself is the fallback; it
/// stalls near `sqrt(eps)` in `s` because a smooth minimum is flat to
/// working precision.
pub fn min_gap(n: usize, alpha: f64, s_tolerance: f64) -> Result<MinGap> {
    min_gap_with(n, alpha, s_tolerance, DEFAULT_COARSE_POINTS)
}

pub fn min_gap_with(
    n: usize,
    alpha: f64,
    s_tolerance: f64,
    coarse_points: usize,
) -> Result<MinGap> {
    if !(s_tolerance > 0.0) {
        return Err(Error::invalid("s_tolerance", "must be positive"));
    }
    if coarse_points < 3 {
        return Err(Error::invalid(
            "coarse_points",
            "need at least 3 grid points",
        ));
    }
    if n < 1 {
        return Err(Error::invalid("n", "qubit count must be at least 1"));
    }
    let path = Path::new(n, alpha)?;
    let grid = linspace(0.0, 1.0, coarse_points);
    let gaps = grid
        .par_iter()
        .map(|&s| path.gap(s))
        .collect::<Result<Vec<_>>>()?;
    let (i, _) = gaps
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or(Error::NoConvergence("coarse gap scan"))?;
    let lo = grid[i.saturating_sub(1)];
    let hi = grid[(i + 1).min(grid.len() - 1)];
    let (s, gap) = refine_minimum(&path, lo, hi, s_tolerance)?;
    if gaps[i] < gap {
        Ok(MinGap {
            s: grid[i],
            gap: gaps[i],
        })
    } else {
        Ok(MinGap { s, gap })
    }
}

fn refine_minimum(path: &Path, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    let (mut a, mut b) = (lo, hi);
    if path.dim() >= 2 && path.gap_slope(a)? < 0.0 && path.gap_slope(b)? > 0.0 {
        while b - a > tol {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if path.gap_slope(mid)? < 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        let s = 0.5 * (a + b);
        let (g, ga, gb) = (path.gap(s)?, path.gap(a)?, path.gap(b)?);
        // a tiny gap can leave the slope unreliable; keep the best point seen
        return Ok([(s, g), (a, ga), (b, gb)]
            .into_iter()
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap_or((s, g)));
    }
    golden_section(|s| path.gap(s), lo, hi, tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapCurve {
    pub s: Vec<f64>,
    pub gaps: Vec<f64>,
}

pub fn gap_curve(n: usize, alpha: f64, s_grid: &[f64]) -> Result<GapCurve> {
    check_grid("s_grid", s_grid)?;
    let path = Path::new(n, alpha)?;
    let gaps = s_grid
        .par_iter()
        .map(|&s| path.gap(s))
        .collect::<Result<Vec<_>>>()?;
    Ok(GapCurve {
        s: s_grid.to_vec(),
        gaps,
    })
}

/// `curves[j][i]` is `E_i(s_j)`.
pub fn level_curves(n: usize, alpha: f64, s_grid: &[f64], count: usize) -> Result<Vec<Vec<f64>>> {
    check_grid("s_grid", s_grid)?;
    let path = Path::new(n, alpha)?;
    s_grid.par_iter().map(|&s| path.levels(s, count)).collect()
}

pub(crate) fn check_grid(name: &'static str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid(name, "grid is empty"));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid(name, "grid must be strictly increasing"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingModel {
    /// `log gap = a - nu log n`
    Power,
    /// `log gap = a - c n`
    Exponential,
}

/// Least-squares line in log space. `slope` is the decay parameter (`nu` or
/// `c`), so positive values mean a closing gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of `log gap`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapScalingFit {
    pub model: ScalingModel,
    pub power: LineFit,
    pub exponential: LineFit,
    pub n_range: (usize, usize),
    pub points: Vec<(usize, MinGap)>,
}

impl GapScalingFit {
    pub fn preferred(&self) -> &LineFit {
        match self.model {
            ScalingModel::Power => &self.power,
            ScalingModel::Exponential => &self.exponential,
        }
    }
}

pub fn gap_scaling(alpha: f64, n_list: &[usize]) -> Result<GapScalingFit> {
    gap_scaling_with(alpha, n_list, DEFAULT_S_TOLERANCE)
}

pub fn gap_scaling_with(alpha: f64, n_list: &[usize], s_tolerance: f64) -> Result<GapScalingFit> {
    check_n_list(n_list)?;
    let points = n_list
        .par_iter()
        .map(|&n| min_gap(n, alpha, s_tolerance).map(|g| (n, g)))
        .collect::<Result<Vec<_>>>()?;
    fit_gap_scaling(points)
}

fn check_n_list(n_list: &[usize]) -> Result<()> {
    if n_list.len() < 4 {
        return Err(Error::TooFewPoints {
            needed: 4,
            got: n_list.len(),
        });
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(
            "n_list",
            "qubit counts must be strictly ascending",
        ));
    }
    Ok(())
}

/// Fits both decay models to precomputed minimum gaps.
pub fn fit_gap_scaling(points: Vec<(usize, MinGap)>) -> Result<GapScalingFit> {
    let ns: Vec<usize> = points.iter().map(|p| p.0).collect();
    check_n_list(&ns)?;
    if let Some((n, _)) = points.iter().find(|(_, g)| !(g.gap > 0.0)) {
        return Err(Error::invalid(
            "gaps",
            format!("minimum gap at n = {n} is not positive"),
        ));
    }
    let y: Vec<f64> = points.iter().map(|(_, g)| g.gap.ln()).collect();
    let log_n: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let lin_n: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let power = fit_decay(&log_n, &y);
    let exponential = fit_decay(&lin_n, &y);
    let model = if exponential.residual < power.residual {
        ScalingModel::Exponential
    } else {
        ScalingModel::Power
    };
    Ok(GapScalingFit {
        model,
        power,
        exponential,
        n_range: (ns[0], ns[ns.len() - 1]),
        points,
    })
}

/// Ordinary least squares of `y = a - b x`.
fn fit_decay(x: &[f64], y: &[f64]) -> LineFit {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    LineFit {
        slope: -slope,
        intercept,
        residual,
    }
}

/// A local minimum of `E_{k+1}(s) - E_k(s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntiCrossing {
    pub s: f64,
    /// `k`, the lower level of the pair.
    pub lower_level: usize,
    pub gap: f64,
}

pub fn anticrossing_scan(
    n: usize,
    alpha: f64,
    level_count: usize,
    s_grid: &[f64],
) -> Result<Vec<AntiCrossing>> {
    anticrossing_scan_with(
        n,
        alpha,
        level_count,
        s_grid,
        DEFAULT_PROMINENCE,
        DEFAULT_S_TOLERANCE,
    )
}

/// Local minima of adjacent-level gaps among the `level_count` lowest levels
/// that fall below `prominence` times the median gap of their pair, refined
/// by golden section. Sorted by `s`, then by level.
pub fn anticrossing_scan_with(
    n: usize,
    alpha: f64,
    level_count: usize,
    s_grid: &[f64],
    prominence: f64,
    s_tolerance: f64,
) -> Result<Vec<AntiCrossing>> {
    if level_count < 2 || level_count > n + 1 {
        return Err(Error::invalid(
            "level_count",
            format!("must be in [2, {}]", n + 1),
        ));
    }
    check_grid("s_grid", s_grid)?;
    let path = Path::new(n, alpha)?;
    let levels = s_grid
        .par_iter()
        .map(|&s| path.levels(s, level_count))
        .collect::<Result<Vec<_>>>()?;

    let mut found = Vec::new();
    for k in 0..level_count - 1 {
        let gaps: Vec<f64> = levels.iter().map(|l| l[k + 1] - l[k]).collect();
        let threshold = prominence * median(&gaps);
        for i in local_minima(&gaps) {
            if i == 0 || i + 1 == gaps.len() || gaps[i] >= threshold {
                continue;
            }
            let pair_gap = |s: f64| -> Result<f64> {
                let l = path.levels(s, k + 2)?;
                Ok(l[k + 1] - l[k])
            };
            let (s, gap) = golden_section(pair_gap, s_grid[i - 1], s_grid[i + 1], s_tolerance)?;
            found.push(AntiCrossing {
                s,
                lower_level: k,
                gap,
            });
        }
    }
    found.sort_by(|a, b| a.s.total_cmp(&b.s).then(a.lower_level.cmp(&b.lower_level)));
    Ok(found)
}

/// The ground-state anti-crossing `s_c` with the neighbouring anti-crossings of
/// the first excited level, `s1 < s_c < s2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cascade {
    pub s1: f64,
    pub s_c: f64,
    pub s2: f64,
}

pub fn cascade(crossings: &[AntiCrossing]) -> Option<Cascade> {
    let ground = crossings
        .iter()
        .filter(|c| c.lower_level == 0)
        .min_by(|a, b| a.gap.total_cmp(&b.gap))?;
    let s_c = ground.s;
    let first: Vec<f64> = crossings
        .iter()
        .filter(|c| c.lower_level == 1)
        .map(|c| c.s)
        .collect();
    let s1 = first
        .iter()
        .copied()
        .filter(|&s| s < s_c)
        .fold(None, |m: Option<f64>, s| Some(m.map_or(s, |m| m.max(s))))?;
    let s2 = first
        .iter()
        .copied()
        .filter(|&s| s > s_c)
        .fold(None, |m: Option<f64>, s| Some(m.map_or(s, |m| m.min(s))))?;
    Some(Cascade { s1, s_c, s2 })
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DosKind {
    AnalyticS0,
    AnalyticS1Full,
    AnalyticS1Sector,
    Empirical,
}

impl DosKind {
    pub fn label(&self) -> &'static str {
        match self {
            DosKind::AnalyticS0 => "analytic_s0",
            DosKind::AnalyticS1Full => "analytic_s1_full",
            DosKind::AnalyticS1Sector => "analytic_s1_sector",
            DosKind::Empirical => "empirical",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DosCurve {
    pub omega: Vec<f64>,
    pub density: Vec<f64>,
    pub kind: DosKind,
}

/// Which end of the path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    /// `s = 0`
    Start,
    /// `s = 1`
    End,
}

/// `(2n/pi) exp(-2n (omega - 1/2)^2)`.
pub fn dos_s0_density(n: usize, omega: f64) -> f64 {
    let n = n as f64;
    2.0 * n / std::f64::consts::PI * (-2.0 * n * (omega - 0.5).powi(2)).exp()
}

/// Density of maximal-spin levels at `s = 1`: `1 / (alpha (1 - 2 omega + coth alpha))`.
/// Its `alpha -> 0` limit is the uniform density 1.
pub fn dos_s1_sector_density(alpha: f64, omega: f64) -> Result<f64> {
    check_finite_alpha(alpha)?;
    if alpha < model::ALPHA_LIMIT_THRESHOLD {
        return Ok(1.0);
    }
    let denom = 1.0 - 2.0 * omega + 1.0 / alpha.tanh();
    if !(denom > 0.0) {
        return Err(Error::invalid(
            "omega",
            format!("{omega} is outside the support (1 - 2 omega + coth alpha <= 0)"),
        ));
    }
    Ok(1.0 / (alpha * denom))
}

/// Full-spectrum density at `s = 1`: the sector density weighted by the
/// binomial Gaussian in the inverted excitation fraction. Reduces to
/// [`dos_s0_density`] as `alpha -> 0`.
pub fn dos_s1_full_density(n: usize, alpha: f64, omega: f64) -> Result<f64> {
    check_finite_alpha(alpha)?;
    if alpha < model::ALPHA_LIMIT_THRESHOLD {
        return Ok(dos_s0_density(n, omega));
    }
    let sector = dos_s1_sector_density(alpha, omega)?;
    // (alpha + ln(e^alpha - 2 omega sinh alpha)) / (2 alpha), rewritten to avoid overflow
    let x = 1.0 + (omega * (-2.0 * alpha).exp_m1()).ln_1p() / (2.0 * alpha);
    let nf = n as f64;
    Ok(2.0 * nf / std::f64::consts::PI * (-2.0 * nf * (x - 0.5).powi(2)).exp() * sector)
}

fn check_finite_alpha(alpha: f64) -> Result<()> {
    model::check_alpha(alpha)?;
    if alpha.is_infinite() {
        return Err(Error::invalid(
            "alpha",
            "analytic densities need finite alpha (the projector limit is a point mass)",
        ));
    }
    Ok(())
}

pub fn dos_s0_analytic(n: usize, omega: &[f64]) -> Result<DosCurve> {
    model::check_n(n)?;
    Ok(DosCurve {
        omega: omega.to_vec(),
        density: omega.iter().map(|&w| dos_s0_density(n, w)).collect(),
        kind: DosKind::AnalyticS0,
    })
}

pub fn dos_s1_analytic(n: usize, alpha: f64, omega: &[f64]) -> Result<DosCurve> {
    model::check_n(n)?;
    Ok(DosCurve {
        omega: omega.to_vec(),
        density: omega
            .iter()
            .map(|&w| dos_s1_full_density(n, alpha, w))
            .collect::<Result<_>>()?,
        kind: DosKind::AnalyticS1Full,
    })
}

pub fn dos_s1_sector(n: usize, alpha: f64, omega: &[f64]) -> Result<DosCurve> {
    model::check_n(n)?;
    Ok(DosCurve {
        omega: omega.to_vec(),
        density: omega
            .iter()
            .map(|&w| dos_s1_sector_density(alpha, w))
            .collect::<Result<_>>()?,
        kind: DosKind::AnalyticS1Sector,
    })
}

/// Degeneracy-weighted histogram of the exact levels over `bins` equal bins
/// of `[0, 1]`. `weights` sum to `2^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Histogram {
    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}

pub fn dos_histogram(n: usize, alpha: f64, endpoint: Endpoint, bins: usize) -> Result<Histogram> {
    if bins < 2 {
        return Err(Error::invalid("bins", "need at least 2 bins"));
    }
    let levels = match endpoint {
        Endpoint::Start => model::level_energies_s0(n)?,
        Endpoint::End => model::level_energies_s1(n, alpha)?,
    };
    let mut weights = vec![0.0; bins];
    for level in &levels {
        // levels sitting on an edge go to the upper bin
        let pos = level.energy * bins as f64 + 1e-9;
        let idx = (pos.floor() as usize).min(bins - 1);
        weights[idx] += level.degeneracy;
    }
    Ok(Histogram {
        edges: linspace(0.0, 1.0, bins + 1),
        weights,
    })
}

/// Histogram density with unit total mass, sampled at bin centers.
pub fn dos_empirical(n: usize, alpha: f64, endpoint: Endpoint, bins: usize) -> Result<DosCurve> {
    let h = dos_histogram(n, alpha, endpoint, bins)?;
    let total = h.total();
    let width = 1.0 / bins as f64;
    Ok(DosCurve {
        omega: h.centers(),
        density: h.weights.iter().map(|w| w / total / width).collect(),
        kind: DosKind::Empirical,
    })
}

/// Analytic density averaged over each of `bins` equal bins of `[0, 1]`,
/// rescaled to unit total mass (composite Simpson, 64 panels per bin).
pub fn dos_analytic_binned(n: usize, alpha: f64, kind: DosKind, bins: usize) -> Result<DosCurve> {
    if bins < 2 {
        return Err(Error::invalid("bins", "need at least 2 bins"));
    }
    let density = |w: f64| -> Result<f64> {
        match kind {
            DosKind::AnalyticS0 => Ok(dos_s0_density(n, w)),
            DosKind::AnalyticS1Full => dos_s1_full_density(n, alpha, w),
            DosKind::AnalyticS1Sector => dos_s1_sector_density(alpha, w),
            DosKind::Empirical => Err(Error::invalid("kind", "expected an analytic density")),
        }
    };
    let edges = linspace(0.0, 1.0, bins + 1);
    let masses = edges
        .windows(2)
        .map(|w| simpson(&density, w[0], w[1], 64))
        .collect::<Result<Vec<_>>>()?;
    let total: f64 = masses.iter().sum();
    let width = 1.0 / bins as f64;
    Ok(DosCurve {
        omega: edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect(),
        density: masses.iter().map(|m| m / total / width).collect(),
        kind,
    })
}

fn simpson<F: Fn(f64) -> Result<f64>>(f: &F, a: f64, b: f64, panels: usize) -> Result<f64> {
    let panels = panels + panels % 2;
    let h = (b - a) / panels as f64;
    let mut acc = f(a)? + f(b)?;
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h)?;
    }
    Ok(acc * h / 3.0)
}

/// `max |empirical - analytic| / max analytic` over bins, both curves at unit
/// mass, comparing the `s = 1` full-spectrum histogram with the bin-averaged
/// analytic density.
pub fn dos_shape_discrepancy(n: usize, alpha: f64, bins: usize) -> Result<f64> {
    let emp = dos_empirical(n, alpha, Endpoint::End, bins)?;
    let ana = dos_analytic_binned(n, alpha, DosKind::AnalyticS1Full, bins)?;
    let peak = ana.density.iter().fold(0.0f64, |m, &x| m.max(x));
    let worst = emp
        .density
        .iter()
        .zip(&ana.density)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    Ok(worst / peak)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn single_qubit_min_gap() {
        let g = min_gap(1, 2.0, 1e-10).unwrap();
        assert!((g.s - 0.5).abs() < 1e-9);
        assert!((g.gap - FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn separable_min_gap() {
        let g = min_gap(100, 0.0, 1e-10).unwrap();
        assert!((g.s - 0.5).abs() < 1e-6);
        assert!((g.gap - FRAC_1_SQRT_2 / 100.0).abs() < 1e-10);
    }

    #[test]
    fn separable_min_gap_converges_to_inverse_sqrt2_n() {
        for n in [50, 120, 300] {
            let g = min_gap(n, 0.0, 1e-12).unwrap();
            assert!((g.gap * n as f64 * 2f64.sqrt() - 1.0).abs() < 1e-6);
            assert!((g.s - 0.5).abs() < 1e-9, "{}", g.s);
        }
    }

    #[test]
    fn gap_slope_matches_finite_difference() {
        let path = Path::new(12, 3.0).unwrap();
        for s in [0.2, 0.31, 0.7] {
            let h = 1e-6;
            let fd = (path.gap(s + h).unwrap() - path.gap(s - h).unwrap()) / (2.0 * h);
            assert!((path.gap_slope(s).unwrap() - fd).abs() < 1e-6);
        }
    }

    #[test]
    fn strongly_first_order_gap_closes_fast() {
        let g10 = min_gap(10, 10.0, 1e-12).unwrap();
        let g20 = min_gap(20, 10.0, 1e-12).unwrap();
        assert!(g20.gap / g10.gap < 0.1, "{} {}", g10.gap, g20.gap);
    }

    #[test]
    fn min_gap_rejects_bad_tolerance() {
        assert!(min_gap(4, 1.0, 0.0).is_err());
        assert!(min_gap(4, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn scaling_needs_four_ascending_points() {
        assert!(matches!(
            gap_scaling(0.0, &[10, 20, 30]),
            Err(Error::TooFewPoints { needed: 4, got: 3 })
        ));
        assert!(gap_scaling(0.0, &[10, 30, 20, 40]).is_err());
    }

    #[test]
    fn fit_recovers_synthetic_models() {
        let pts = |f: &dyn Fn(f64) -> f64| {
            [10usize, 20, 40, 80, 160]
                .iter()
                .map(|&n| {
                    (
                        n,
                        MinGap {
                            s: 0.5,
                            gap: f(n as f64),
                        },
                    )
                })
                .collect::<Vec<_>>()
        };
        let fit = fit_gap_scaling(pts(&|n| 3.0 * n.powf(-1.25))).unwrap();
        assert_eq!(fit.model, ScalingModel::Power);
        assert!((fit.power.slope - 1.25).abs() < 1e-12);
        assert!((fit.power.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(fit.power.residual < 1e-12);

        let fit = fit_gap_scaling(pts(&|n| 0.5 * (-0.07 * n).exp())).unwrap();
        assert_eq!(fit.model, ScalingModel::Exponential);
        assert!((fit.exponential.slope - 0.07).abs() < 1e-12);
    }

    #[test]
    fn separable_scaling_is_inverse_n() {
        let fit = gap_scaling(0.0, &[100, 200, 300, 400]).unwrap();
        assert_eq!(fit.model, ScalingModel::Power);
        assert!((fit.power.slope - 1.0).abs() < 1e-6);
        let again = gap_scaling(0.0, &[100, 200, 300, 400]).unwrap();
        assert_eq!(fit, again);
    }

    #[test]
    fn s0_density_shape() {
        let n = 40;
        assert_eq!(dos_s0_density(n, 0.5), 80.0 / std::f64::consts::PI);
        for d in [0.01, 0.1, 0.3] {
            assert!((dos_s0_density(n, 0.5 + d) - dos_s0_density(n, 0.5 - d)).abs() < 1e-12);
            assert!(dos_s0_density(n, 0.5 + d) < dos_s0_density(n, 0.5));
        }
    }

    #[test]
    fn s1_sector_density_values() {
        let alpha: f64 = 2.0;
        let want = 1.0 / (alpha * (1.0 + 1.0 / alpha.tanh()));
        assert!((dos_s1_sector_density(alpha, 0.0).unwrap() - want).abs() < 1e-15);
        assert_eq!(dos_s1_sector_density(0.0, 0.3).unwrap(), 1.0);
        // support ends at omega = (1 + coth alpha) / 2
        assert!(dos_s1_sector_density(alpha, 1.2).is_err());
        assert!(dos_s1_full_density(10, f64::INFINITY, 0.5).is_err());
    }

    #[test]
    fn s1_full_density_limits() {
        let n = 100;
        // alpha -> 0 recovers the Gaussian
        let a = dos_s1_full_density(n, 1e-10, 0.37).unwrap();
        assert!((a - dos_s0_density(n, 0.37)).abs() < 1e-12);
        let near = dos_s1_full_density(n, 1e-6, 0.37).unwrap();
        assert!((near - dos_s0_density(n, 0.37)).abs() / a < 1e-4);
        // mass moves toward omega = 1 as alpha grows
        let mean = |alpha: f64| {
            let c = dos_analytic_binned(n, alpha, DosKind::AnalyticS1Full, 200).unwrap();
            c.omega
                .iter()
                .zip(&c.density)
                .map(|(w, d)| w * d)
                .sum::<f64>()
                / 200.0
        };
        let means: Vec<f64> = [0.0, 1.0, 2.0, 3.0].iter().map(|&a| mean(a)).collect();
        assert!(means.windows(2).all(|w| w[0] < w[1]), "{means:?}");
    }

    #[test]
    fn histogram_counts_every_state() {
        let h = dos_histogram(10, 2.0, Endpoint::End, 20).unwrap();
        assert_eq!(h.total(), 1024.0);
        let h = dos_histogram(12, 0.5, Endpoint::Start, 7).unwrap();
        assert_eq!(h.total(), 4096.0);
        assert!(dos_histogram(10, 2.0, Endpoint::End, 1).is_err());
    }

    #[test]
    fn projector_limit_histogram() {
        let h = dos_histogram(10, f64::INFINITY, Endpoint::End, 10).unwrap();
        assert_eq!(h.weights[9], 1023.0);
        assert_eq!(h.weights[0], 1.0);
    }

    #[test]
    fn s0_histogram_is_binomial() {
        let n = 10;
        let h = dos_histogram(n, 1.0, Endpoint::Start, n + 1).unwrap();
        // level q/10 lands in bin floor(q * 11 / 10)
        for q in 0..=n {
            let bin = ((q * (n + 1)) / n).min(n);
            assert_eq!(h.weights[bin], model::binomial(n, q));
        }
        let emp = dos_empirical(n, 1.0, Endpoint::Start, 11).unwrap();
        let mass: f64 = emp.density.iter().sum::<f64>() / 11.0;
        assert!((mass - 1.0).abs() < 1e-14);
    }

    #[test]
    fn separable_spectrum_has_no_anticrossings() {
        let grid = linspace(0.0, 1.0, 101);
        let found = anticrossing_scan(12, 0.0, 6, &grid).unwrap();
        assert!(found.is_empty(), "{found:?}");
    }

    #[test]
    fn anticrossing_rejects_too_many_levels() {
        let grid = linspace(0.0, 1.0, 11);
        assert!(anticrossing_scan(4, 1.0, 6, &grid).is_err());
    }

    #[test]
    fn cascade_at_n30_alpha5() {
        let grid = linspace(0.0, 1.0, 401);
        let found = anticrossing_scan(30, 5.0, 4, &grid).unwrap();
        let c = cascade(&found).expect("cascade");
        assert!(c.s1 < c.s_c && c.s_c < c.s2, "{c:?}");
        let g = min_gap(30, 5.0, 1e-12).unwrap();
        let ground = found
            .iter()
            .filter(|a| a.lower_level == 0)
            .min_by(|a, b| a.gap.total_cmp(&b.gap))
            .unwrap();
        assert!((ground.s - g.s).abs() < 1e-6);
        assert!((ground.gap - g.gap).abs() < 1e-10);
    }
}
