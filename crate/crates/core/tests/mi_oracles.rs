//! Mutual information of quantized channels against closed forms and
//! brute-force evaluation written independently of the library.

use flashread::channel::{gray_labels, LevelDistribution, ReadChannelModel};
use flashread::quantizer::{build_dmc, full_soft_mi, mutual_information, threshold_mi, Dmc, ThresholdSet};
use proptest::prelude::*;

const TOL: f64 = 1e-12;

fn q(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

fn h(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

fn sigma_for(snr_db: f64) -> f64 {
    (10f64.powf(-snr_db / 10.0)).sqrt()
}

/// Probability that N(mean, sigma) lands in each region cut by `t`.
fn regions(mean: f64, sigma: f64, t: &[f64]) -> Vec<f64> {
    let mut tails: Vec<f64> = t.iter().map(|&x| q((x - mean) / sigma)).collect();
    tails.insert(0, 1.0);
    tails.push(0.0);
    tails.windows(2).map(|w| w[0] - w[1]).collect()
}

fn slc(snr_db: f64, t: Vec<f64>) -> f64 {
    let m = ReadChannelModel::<f64>::gaussian(2, snr_db).unwrap();
    mutual_information(&build_dmc(&m, &ThresholdSet::new(t).unwrap()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn slc_two_reads_closed_form(snr in 0.0f64..15.0, qv in 0.001f64..1.5) {
        let s = sigma_for(snr);
        let qm = q((1.0 - qv) / s);
        let qp = q((1.0 + qv) / s);
        let (p1, p2, p3) = (1.0 - qm, qm - qp, qp);
        let oracle = h(&[(p1 + p3) / 2.0, p2, (p1 + p3) / 2.0]) - h(&[p1, p2, p3]);
        let got = slc(snr, vec![-qv, qv]);
        prop_assert!((got - oracle).abs() < TOL, "{got} vs {oracle}");
    }

    #[test]
    fn slc_three_reads_closed_form(snr in 0.0f64..15.0, qv in 0.001f64..1.5) {
        let s = sigma_for(snr);
        let qm = q((1.0 - qv) / s);
        let q0 = q(1.0 / s);
        let qp = q((1.0 + qv) / s);
        let p = [1.0 - qm, qm - q0, q0 - qp, qp];
        let oracle = h(&[(p[0] + p[3]) / 2.0, (p[1] + p[2]) / 2.0, (p[2] + p[1]) / 2.0, (p[3] + p[0]) / 2.0]) - h(&p);
        let got = slc(snr, vec![-qv, 0.0, qv]);
        prop_assert!((got - oracle).abs() < TOL, "{got} vs {oracle}");
    }

    #[test]
    fn mlc_six_reads_symmetric_closed_form(snr in 8.0f64..20.0, a in 0.01f64..0.3, b in 0.01f64..0.3) {
        let m = ReadChannelModel::<f64>::gaussian(4, snr).unwrap();
        let step = 2.0 / 5f64.sqrt();
        let t = vec![-step - a, -step + a, -b, b, step - a, step + a];
        let s = sigma_for(snr);
        // Region order low to high: p_i1, e_ia, p_i2, e_ib, p_i3, e_ic, p_i4.
        // Levels 3 and 4 mirror levels 2 and 1.
        let r1 = regions(-1.5 * step, s, &t);
        let r2 = regions(-0.5 * step, s, &t);
        let [p11, e1a, p12, e1b, p13, e1c, p14] = r1[..] else { unreachable!() };
        let [p21, e2a, p22, e2b, p23, e2c, p24] = r2[..] else { unreachable!() };
        let hy = h(&[
            (p11 + p21 + p24 + p14) / 4.0,
            (p12 + p22 + p23 + p13) / 4.0,
            (p13 + p23 + p22 + p12) / 4.0,
            (p14 + p24 + p21 + p11) / 4.0,
            (e1a + e2a + e2c + e1c) / 4.0,
            (e1b + e2b + e2b + e1b) / 4.0,
            (e1c + e2c + e2a + e1a) / 4.0,
        ]);
        let oracle = hy
            - 0.5 * h(&[p11, p12, p13, p14, e1a, e1b, e1c])
            - 0.5 * h(&[p21, p22, p23, p24, e2a, e2b, e2c]);
        let got = mutual_information(&build_dmc(&m, &ThresholdSet::new(t).unwrap()));
        prop_assert!((got - oracle).abs() < TOL, "{got} vs {oracle}");
    }

    #[test]
    fn mlc_six_reads_asymmetric_closed_form(
        means in proptest::collection::vec(0.3f64..1.0, 4),
        sigmas in proptest::collection::vec(0.05f64..0.4, 4),
        cuts in proptest::collection::vec(0.0f64..1.0, 6),
    ) {
        let mut mu = Vec::new();
        let mut acc = -2.0;
        for d in &means {
            acc += d;
            mu.push(acc);
        }
        let levels = mu.iter().zip(&sigmas).map(|(&m, &s)| (0.25, LevelDistribution::gaussian(m, s).unwrap())).collect();
        let model = ReadChannelModel::new(levels, gray_labels(4)).unwrap();
        let (lo, hi) = (mu[0] - 0.5, mu[3] + 0.5);
        let mut t: Vec<f64> = cuts.iter().map(|c| lo + c * (hi - lo)).collect();
        t.sort_by(f64::total_cmp);
        prop_assume!(t.windows(2).all(|w| w[1] - w[0] > 1e-6));

        let rows: Vec<Vec<f64>> = mu.iter().zip(&sigmas).map(|(&m, &s)| regions(m, s, &t)).collect();
        let hy = h(&(0..7).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / 4.0).collect::<Vec<_>>());
        let oracle = hy - rows.iter().map(|r| 0.25 * h(r)).sum::<f64>();
        let got = threshold_mi(&model, &ThresholdSet::new(t).unwrap());
        prop_assert!((got - oracle).abs() < TOL, "{got} vs {oracle}");
    }

    #[test]
    fn bsc_reduction(p in 0.0f64..=0.5) {
        let dmc = Dmc::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]], vec![0.5, 0.5]).unwrap();
        let oracle = 1.0 - h(&[p, 1.0 - p]);
        prop_assert!((mutual_information(&dmc) - oracle).abs() < TOL);
    }

    #[test]
    fn random_dmc_matches_brute_force(
        raw in proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, 5), 3),
        raw_prior in proptest::collection::vec(0.01f64..1.0, 3),
    ) {
        prop_assume!(raw.iter().all(|r| r.iter().sum::<f64>() > 1e-3));
        let rows: Vec<Vec<f64>> = raw.iter().map(|r| {
            let s: f64 = r.iter().sum();
            r.iter().map(|x| x / s).collect()
        }).collect();
        let ps: f64 = raw_prior.iter().sum();
        let prior: Vec<f64> = raw_prior.iter().map(|x| x / ps).collect();
        let py: Vec<f64> = (0..5).map(|y| (0..3).map(|x| prior[x] * rows[x][y]).sum()).collect();
        let mut oracle = 0.0;
        for x in 0..3 {
            for y in 0..5 {
                let joint = prior[x] * rows[x][y];
                if joint > 0.0 {
                    oracle += joint * (rows[x][y] / py[y]).log2();
                }
            }
        }
        let dmc = Dmc::new(rows, prior).unwrap();
        prop_assert!((mutual_information(&dmc) - oracle).abs() < TOL);
    }

    #[test]
    fn regions_match_numeric_integration(snr in 3.0f64..12.0, qv in 0.05f64..0.8) {
        let s = sigma_for(snr);
        let pdf = |v: f64| (-(v - 1.0).powi(2) / (2.0 * s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt());
        let qm = q((1.0 - qv) / s);
        let qp = q((1.0 + qv) / s);
        let numeric = simpson(pdf, -qv, qv, 20_000);
        prop_assert!((numeric - (qm - qp)).abs() < TOL, "{numeric} vs {}", qm - qp);
        let m = ReadChannelModel::<f64>::gaussian(2, snr).unwrap();
        let dmc = build_dmc(&m, &ThresholdSet::new(vec![-qv, qv]).unwrap());
        prop_assert!((dmc.prob(1, 1) - numeric).abs() < TOL);
    }
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn soft_oracle(model: &ReadChannelModel<f64>) -> f64 {
    let (lo, hi) = model.span(12.0);
    let m = model.num_levels();
    let integrand = |v: f64| {
        let f: Vec<f64> = (0..m).map(|l| model.level_pdf(l, v)).collect();
        let mix: f64 = f.iter().zip(model.levels()).map(|(fx, lv)| fx * lv.prior).sum();
        f.iter()
            .zip(model.levels())
            .filter(|(fx, _)| **fx > 0.0)
            .map(|(fx, lv)| lv.prior * fx * (fx / mix).log2())
            .sum::<f64>()
    };
    simpson(integrand, lo, hi, 400_000)
}

#[test]
fn full_soft_matches_simpson() {
    for (levels, snr) in [(2, 0.0), (2, 6.241), (2, 9.789), (4, 13.76), (8, 20.0)] {
        let m = ReadChannelModel::<f64>::gaussian(levels, snr).unwrap();
        let got = full_soft_mi(&m).unwrap();
        let oracle = soft_oracle(&m);
        assert!((got - oracle).abs() < 1e-8, "{levels}-PAM {snr} dB: {got} vs {oracle}");
    }
}

#[test]
fn full_soft_asymmetric_matches_simpson() {
    let params = flashread::channel::RetentionParams::default();
    let m = ReadChannelModel::<f64>::retention(6.0, &params).unwrap();
    let got = full_soft_mi(&m).unwrap();
    let oracle = soft_oracle(&m);
    assert!((got - oracle).abs() < 1e-8, "{got} vs {oracle}");
}

#[test]
fn slc_two_reads_anchor_point() {
    let qv = 0.2188;
    let s = sigma_for(6.241);
    let qm = q((1.0 - qv) / s);
    let qp = q((1.0 + qv) / s);
    let (p1, p2, p3) = (1.0 - qm, qm - qp, qp);
    let oracle = h(&[(p1 + p3) / 2.0, p2, (p1 + p3) / 2.0]) - h(&[p1, p2, p3]);
    assert!((slc(6.241, vec![-qv, qv]) - oracle).abs() < TOL);
}
