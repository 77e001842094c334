use adiabatic_lab::dynamics::required_time_scan;
use adiabatic_lab::eigensolver;
use adiabatic_lab::meanfield::{mf_minimize, transition_line};
use adiabatic_lab::model::{build_hs, ModelParams};
use adiabatic_lab::spectral::{fit_gap_scaling, gap_scaling, min_gap, MinGap, ScalingModel};

#[test]
fn finite_size_transition_point_approaches_mean_field() {
    let alpha = 5.0;
    let s_mf = transition_line(alpha, 1e-12).unwrap().s_c;
    let dist: Vec<f64> = [20, 40, 80, 160]
        .iter()
        .map(|&n| (min_gap(n, alpha, 1e-12).unwrap().s - s_mf).abs())
        .collect();
    assert!(dist.windows(2).all(|w| w[1] < w[0]), "{dist:?}");
}

#[test]
fn ground_energy_approaches_mean_field() {
    for (alpha, s) in [(5.0, 0.2), (5.0, 0.5), (4.0, 0.8)] {
        let e_mf = mf_minimize(s, alpha).unwrap().energy;
        let diffs: Vec<f64> = [20, 40, 80, 160]
            .iter()
            .map(|&n| {
                let t = build_hs(&ModelParams::new(n, alpha, s).unwrap()).unwrap();
                (eigensolver::lowest_values(&t, 1).unwrap()[0] - e_mf).abs()
            })
            .collect();
        assert!(diffs.windows(2).all(|w| w[1] < w[0]), "{diffs:?}");
    }
}

#[test]
fn exponential_closing_at_larger_sizes() {
    // at alpha = 3 the exponential law only wins once n is well past 40
    let ns: Vec<usize> = (100..=400).step_by(20).collect();
    let fit = gap_scaling(3.0, &ns).unwrap();
    assert_eq!(fit.model, ScalingModel::Exponential);
    assert!(fit.exponential.residual < 0.1 * fit.power.residual);
}

#[test]
fn strongly_first_order_required_time_outgrows_polynomials() {
    let ns: Vec<usize> = (4..=10).collect();
    let times = required_time_scan(&ns, 10.0, 0.9).unwrap();
    // same two-model comparison as for gaps, applied to 1 / T*
    let points = times
        .iter()
        .map(|t| {
            (
                t.n,
                MinGap {
                    s: 0.0,
                    gap: 1.0 / t.t_star,
                },
            )
        })
        .collect();
    let fit = fit_gap_scaling(points).unwrap();
    assert_eq!(fit.model, ScalingModel::Exponential, "{times:?}");
    let slopes: Vec<f64> = times
        .windows(2)
        .map(|w| (w[1].t_star / w[0].t_star).ln() / (w[1].n as f64 / w[0].n as f64).ln())
        .collect();
    assert!(slopes[1..].windows(2).all(|w| w[1] > w[0]), "{slopes:?}");
}
