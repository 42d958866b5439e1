use std::f64::consts::PI;

use hormander::operator::{
    family_samples, holomorphic_calculus, random_unit_pairs, resolvent_bip_identity, wave_mellin_identity,
    ContourSpec, FamilyGrid, FamilyKind, SectorialOperator,
};
use hormander::rbound::{r_bound, r_l2_bound, L2BasisConfig, RSearchConfig, SpaceSpec};
use hormander::spaces::{make_partition, sobolev_norm, GridSpec, PartitionKind, PartitionParams, SampledFunction};
use hormander::special::{
    binomial, f_m, gamma_fm, h_kernel, wave_kernel_integral, IntegralConfig, WaveKernelParams, WaveSign,
};
use hormander::{bracket, Mat, Vector, C64};
use proptest::prelude::*;

fn diag(values: &[f64]) -> Mat {
    Mat::from_diagonal(&Vector::from_iterator(values.len(), values.iter().map(|&v| C64::new(v, 0.0))))
}

fn shear_matrix(n: usize, shear: f64) -> Mat {
    Mat::from_fn(n, n, |i, j| match (i, j) {
        _ if i == j => C64::new(1.0, 0.0),
        _ if j == i + 1 => C64::new(shear, 0.0),
        _ => C64::new(0.0, 0.0),
    })
}

/// Diagonalizable, non-normal operator with the given positive spectrum.
fn similar(values: &[f64], shear: f64) -> SectorialOperator {
    let s = shear_matrix(values.len(), shear);
    let inv = s.clone().try_inverse().unwrap();
    SectorialOperator::from_matrix("similar", &s * diag(values) * inv).unwrap()
}

fn spectrum() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.5f64..1.5, 1..5).prop_map(|v| v.into_iter().map(|x| 10f64.powf(x)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn f_m_bounded_by_triangle_inequality(m in 1u32..5, beta in -2.0f64..0.9, t in -200.0f64..200.0) {
        let bound: f64 = (1..=m).map(|k| binomial(m, k) * (k as f64).powf(-beta)).sum();
        prop_assert!(f_m(C64::new(beta, t), m).unwrap().norm() <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn wave_kernel_quadrature_matches_gamma(m in 1u32..4, frac in 0.05f64..0.95, im in -5.0f64..5.0) {
        let z = C64::new(-(m as f64) * frac, im);
        prop_assume!((z.re - z.re.round()).abs() > 1e-3 || im.abs() > 1e-3);
        let q = wave_kernel_integral(z, m, &IntegralConfig::default()).unwrap();
        let g = gamma_fm(z, m).unwrap();
        prop_assert!((q - g).norm() <= 1e-8 * g.norm(), "{} vs {}", q, g);
    }

    #[test]
    fn h_kernel_weighted_is_bounded(alpha in 0.6f64..2.5, t in -60.0f64..60.0) {
        let m = ((alpha - 0.5).floor() + 1.0) as u32;
        let p = WaveKernelParams::new(alpha, m, WaveSign::Minus).unwrap();
        let v = h_kernel(t, &p).unwrap().norm() * bracket(t).powf(alpha);
        prop_assert!(v.is_finite() && v < 1e3);
    }

    #[test]
    fn partitions_sum_to_one(t in -2.0f64..2.0, x in 0.3f64..3.0) {
        let params = PartitionParams::default();
        let eq = make_partition(PartitionKind::Equidistant, &params).unwrap();
        let s: f64 = (-4..=4).map(|n| eq.member(n, t)).sum();
        prop_assert!((s - 1.0).abs() < 1e-10);
        let dy = make_partition(PartitionKind::Dyadic, &params).unwrap();
        let s: f64 = (-4..=4).map(|n| dy.member(n, x)).sum();
        prop_assert!((s - 1.0).abs() < 1e-10);
        let fd = make_partition(PartitionKind::FourierDyadic, &params).unwrap();
        let s: f64 = (0..=6).map(|n| fd.member(n, x)).chain((1..=6).map(|n| fd.member(-n, x))).sum();
        prop_assert!((s - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sobolev_order_zero_is_l2(center in -3.0f64..3.0, width in 0.3f64..3.0) {
        let grid = GridSpec::new(-30.0, 30.0, 2048).unwrap();
        let f = SampledFunction::linear(grid, |u| C64::new((-((u - center) / width).powi(2)).exp(), 0.0)).unwrap();
        let s = sobolev_norm(&f, 0.0).unwrap().value;
        prop_assert!((s - f.l2_norm()).abs() <= 1e-10 * s);
    }

    #[test]
    fn contour_calculus_matches_eigen_oracle(values in spectrum(), shear in -0.5f64..0.5, which in 0usize..3) {
        let op = similar(&values, shear);
        let f = move |l: C64| {
            let rho = l / (C64::new(1.0, 0.0) + l).powu(2);
            match which {
                0 => rho,
                1 => rho * rho,
                _ => rho * (-l).exp(),
            }
        };
        let contour = ContourSpec::for_operator(&op);
        let a = holomorphic_calculus(&op, &f, &contour).unwrap();
        let s = shear_matrix(values.len(), shear);
        let fl = Mat::from_diagonal(&Vector::from_iterator(values.len(), values.iter().map(|&v| f(C64::new(v, 0.0)))));
        let b = &s * fl * s.clone().try_inverse().unwrap();
        let scale = values.iter().map(|&v| f(C64::new(v, 0.0)).norm()).fold(0.0, f64::max);
        // contour roundoff floor when f(A) is tiny against the integrand mass
        let err = (a - b).norm();
        prop_assert!(err <= 1e-8 * scale + 1e-13, "{} (scale {})", err, scale);
    }

    #[test]
    fn calculus_is_multiplicative(values in spectrum(), shear in -0.5f64..0.5) {
        let op = similar(&values, shear);
        let f = |l: C64| l / (C64::new(1.0, 0.0) + l).powu(2);
        let g = |l: C64| l / (C64::new(1.0, 0.0) + l).powu(2) * (-l).exp();
        let contour = ContourSpec::for_operator(&op);
        let fg = holomorphic_calculus(&op, &|l| f(l) * g(l), &contour).unwrap();
        let prod = holomorphic_calculus(&op, &f, &contour).unwrap() * holomorphic_calculus(&op, &g, &contour).unwrap();
        let err = (&fg - &prod).norm();
        prop_assert!(err <= 1e-8, "{}", err);
    }

    #[test]
    fn hilbert_r_bound_is_max_norm(seed in 0u64..1000, k in 1usize..4, c in 0.1f64..5.0) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let ops: Vec<Mat> = (0..k)
            .map(|_| Mat::from_fn(3, 3, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)))
            .collect();
        let space = SpaceSpec::hilbert(3);
        let cfg = RSearchConfig::default();
        let r = r_bound(&ops, &space, &cfg).unwrap().value();
        let max = ops.iter().map(|t| t.clone().singular_values().max()).fold(0.0, f64::max);
        prop_assert!((r - max).abs() <= 1e-10 * max);
        // scaling is exact, subsets do not increase the bound
        let scaled: Vec<Mat> = ops.iter().map(|t| t * C64::new(c, 0.0)).collect();
        let rs = r_bound(&scaled, &space, &cfg).unwrap().value();
        prop_assert!((rs - c * r).abs() <= 1e-10 * c * r);
        let sub = r_bound(&ops[..1], &space, &cfg).unwrap().value();
        prop_assert!(sub <= r * (1.0 + 1e-12));
    }

    #[test]
    fn scaling_is_exact_off_hilbert(seed in 0u64..1000, c in 0.1f64..5.0) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let ops: Vec<Mat> = (0..2)
            .map(|_| Mat::from_fn(3, 3, |_, _| C64::new(rng.random::<f64>() - 0.5, 0.0)))
            .collect();
        let space = SpaceSpec::new(1.0, 3).unwrap();
        let cfg = RSearchConfig { restarts: 4, iterations: 50, ..Default::default() };
        let r = r_bound(&ops, &space, &cfg).unwrap().value();
        let scaled: Vec<Mat> = ops.iter().map(|t| t * C64::new(c, 0.0)).collect();
        let rs = r_bound(&scaled, &space, &cfg).unwrap().value();
        prop_assert!((rs - c * r).abs() <= 1e-9 * c * r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn mellin_identities_on_random_spectra(values in spectrum(), seed in 0u64..100, theta in 0.2f64..3.0) {
        let op = SectorialOperator::from_matrix("d", diag(&values)).unwrap();
        let pairs = random_unit_pairs(op.dim(), 5, seed);
        let t: Vec<f64> = (0..=20).map(|k| -5.0 + 0.5 * k as f64).collect();
        let p = WaveKernelParams::new(1.0, 2, WaveSign::Minus).unwrap();
        prop_assert!(wave_mellin_identity(&op, &p, &pairs, &t).unwrap().max_error <= 1e-3);
        prop_assert!(resolvent_bip_identity(&op, 0.5, theta, &pairs, &t).unwrap().max_error <= 1e-3);
    }

    #[test]
    fn imaginary_power_bound_grows_with_window(values in spectrum(), alpha in 0.7f64..2.0) {
        let op = SectorialOperator::from_matrix("d", diag(&values)).unwrap();
        let space = SpaceSpec::hilbert(op.dim());
        let mut prev = 0.0;
        for t_max in [5.0, 10.0, 20.0, 40.0] {
            let grid = FamilyGrid { t_max, ..Default::default() };
            let fam = family_samples(&op, FamilyKind::ImaginaryPowers { alpha }, &grid).unwrap();
            let v = r_l2_bound(&fam, &space, &L2BasisConfig::default()).unwrap().value();
            prop_assert!(v >= prev * (1.0 - 1e-12));
            // bounded by the full-line value
            let full = (PI.sqrt() * hormander::special::gamma(C64::new(alpha - 0.5, 0.0)).unwrap().re
                / hormander::special::gamma(C64::new(alpha, 0.0)).unwrap().re).sqrt();
            prop_assert!(v <= full * (1.0 + 1e-3), "{} > {}", v, full);
            prev = v;
        }
    }
}
