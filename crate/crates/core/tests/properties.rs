use std::f64::consts::PI;

use proptest::prelude::*;

use hybridnet::analytic::{kappa, mean_power_isotropic, power_outage_bound, psi};
use hybridnet::feasibility::{
    hybrid_min_pb_density, region_contains, trace_boundary, Noise, RegionConfig, Requirement, Storage,
};
use hybridnet::montecarlo::{estimate_mean_raw_power, estimate_outage, with_worker_count, TrialPlan};
use hybridnet::propagation::{
    interference_at_typical, raw_power_directed, raw_power_isotropic, DeploymentParams, MptMode, SystemParams,
};
use hybridnet::rng::RandomStream;
use hybridnet::spatial::{nearest_index, sample_ppp, sample_realization, NetworkRealization, Point, SimWindow};

fn point() -> impl Strategy<Value = Point> {
    (-30.0..30.0f64, -30.0..30.0f64).prop_map(|(x, y)| Point::new(x, y))
}

/// A hand-built realization; mobiles need not respect cells for the propagation identities.
fn realization() -> impl Strategy<Value = NetworkRealization> {
    (
        prop::collection::vec(point(), 2..40),
        prop::collection::vec(point(), 1..30),
    )
        .prop_map(|(mobiles, pbs)| {
            let nearest = nearest_index(&pbs, mobiles[0]).unwrap().0;
            NetworkRealization {
                bs_points: mobiles.clone(),
                mobiles,
                pb_points: pbs,
                nearest_pb_of_typical: Some(nearest),
            }
        })
}

const HYBRID: [(MptMode, Storage); 4] = [
    (MptMode::Isotropic, Storage::Large),
    (MptMode::Directed, Storage::Large),
    (MptMode::Isotropic, Storage::Small),
    (MptMode::Directed, Storage::Small),
];

proptest! {
    #[test]
    fn psi_never_exceeds_total_gain(lambda in 1e-4..50.0f64, nu in 1.0..4.0f64, beta in 2.05..8.0f64) {
        let near = psi(lambda, nu, beta).unwrap();
        let total = mean_power_isotropic(1.0, lambda, nu, beta).unwrap();
        prop_assert!(total - near >= -1e-12 * total, "psi {near} > total {total}");
    }

    #[test]
    fn psi_monotone(lambda in 1e-3..20.0f64, nu in 1.01..4.0f64, beta in 2.1..8.0f64, f in 1.01..3.0f64) {
        // Once pi lambda nu^2 is large psi saturates at nu^-beta, so only weak monotonicity holds.
        prop_assert!(psi(lambda * f, nu, beta).unwrap() >= psi(lambda, nu, beta).unwrap());
        prop_assert!(psi(lambda, nu * f, beta).unwrap() <= psi(lambda, nu, beta).unwrap());
    }

    #[test]
    fn isotropic_mean_is_linear(q in 0.01..100.0f64, lambda in 0.0..10.0f64, a in 0.1..10.0f64) {
        let base = mean_power_isotropic(q, lambda, 1.5, 3.0).unwrap();
        let rel = |x: f64, y: f64| (x - y).abs() <= 1e-12 * y.abs().max(1e-300);
        prop_assert!(rel(mean_power_isotropic(a * q, lambda, 1.5, 3.0).unwrap(), a * base));
        prop_assert!(rel(mean_power_isotropic(q, a * lambda, 1.5, 3.0).unwrap(), a * base));
    }

    #[test]
    fn outage_bound_is_a_probability(
        p in 1e-3..10.0f64, ratio in 1.0..100.0f64, lambda in 0.0..5.0f64, beta in 2.1..6.0f64,
        nu in 1.0..3.0f64, directed in any::<bool>(), z_m in 1.0..20.0f64,
    ) {
        let mode = if directed { MptMode::Directed } else { MptMode::Isotropic };
        let gain = if directed { z_m } else { 1.0 };
        // Choose q so that the single-beacon precondition holds.
        let q = ratio * p * nu.powf(beta) / gain;
        let b = power_outage_bound(p, q, lambda, beta, nu, mode, z_m).unwrap();
        prop_assert!(b > 0.0 || lambda > 0.0);
        prop_assert!((0.0..=1.0).contains(&b));
    }

    #[test]
    fn interference_monotone_in_k_and_linear_in_p(r in realization(), p in 0.01..100.0f64) {
        let mut last = f64::INFINITY;
        for k in 0..r.mobiles.len() + 1 {
            let i = interference_at_typical(&r, 1.0, k, 4.0);
            prop_assert!(i <= last);
            last = i;
            let scaled = interference_at_typical(&r, p, k, 4.0);
            prop_assert!((scaled - p * i).abs() <= 1e-12 * scaled.abs().max(1e-300));
        }
    }

    #[test]
    fn raw_power_linearity_dominance_and_single_beacon_cap(
        r in realization(), q in 0.01..100.0f64, z_s in 0.001..1.0f64, z_m in 1.0..30.0f64,
    ) {
        let (beta, nu) = (3.0, 1.5);
        let iso = raw_power_isotropic(&r, q, beta, nu);
        prop_assert!((raw_power_isotropic(&r, 2.0 * q, beta, nu) - 2.0 * iso).abs() <= 1e-12 * iso);
        let dir = raw_power_directed(&r, q, z_m, z_s, beta, nu).unwrap();
        let dir2 = raw_power_directed(&r, 2.0 * q, z_m, z_s, beta, nu).unwrap();
        prop_assert!((dir2 - 2.0 * dir).abs() <= 1e-12 * dir);
        prop_assert!(z_s * iso <= dir * (1.0 + 1e-12));
        prop_assert!(dir <= z_m * iso * (1.0 + 1e-12));
        let single = |t: &Point| q * t.dist(r.typical_mobile()).max(nu).powf(-beta);
        for t in &r.pb_points {
            prop_assert!(single(t) <= q * nu.powf(-beta) * (1.0 + 1e-12));
            prop_assert!(z_m * single(t) <= z_m * q * nu.powf(-beta) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn hybrid_boundaries_are_monotone(
        lb in 0.01..5.0f64, q in 0.1..100.0f64, z_m in 1.0..30.0f64, f in 1.01..4.0f64, mu in 0.5..20.0f64,
    ) {
        let s = SystemParams { z_m, ..SystemParams::default() };
        for (mode, storage) in HYBRID {
            let c = RegionConfig::hybrid(Noise::Nonzero, mode, storage);
            let at = |lb: f64, q: f64, s: &SystemParams| hybrid_min_pb_density(lb, q, s, mu, &c).unwrap().or_infinity();
            let base = at(lb, q, &s);
            prop_assert!(at(lb * f, q, &s) <= base);
            prop_assert!(at(lb, q * f, &s) <= base);
            let sharper = SystemParams { z_m: z_m * f, ..s };
            prop_assert!(at(lb, q, &sharper) <= base);
        }
    }

    #[test]
    fn membership_agrees_with_traced_boundary(lb in 0.01..5.0f64, q in 0.1..100.0f64, mu in 0.5..20.0f64) {
        let s = SystemParams::default();
        let mut configs = vec![RegionConfig::cellular(Noise::Nonzero), RegionConfig::cellular(Noise::InterferenceLimited)];
        configs.extend(HYBRID.iter().map(|&(m, st)| RegionConfig::hybrid(Noise::Nonzero, m, st)));
        configs.extend(HYBRID.iter().map(|&(m, st)| RegionConfig::hybrid(Noise::InterferenceLimited, m, st)));
        for c in configs {
            let curve = trace_boundary(&c, &s, mu, &[lb], q).unwrap();
            let b = curve.min_co_param[0];
            let point = |v: f64| match c.mpt {
                None => DeploymentParams::new(v, q, lb, 0.0),
                Some(_) => DeploymentParams::new(1.0, q, lb, v),
            };
            if curve.infeasible_mask[0] {
                prop_assert!(!region_contains(&point(1e300), &s, mu, &c));
                continue;
            }
            prop_assert!(region_contains(&point(b), &s, mu, &c));
            prop_assert!(region_contains(&point(b * (1.0 + 1e-9)), &s, mu, &c));
            if b > 0.0 {
                prop_assert!(!region_contains(&point(b * (1.0 - 1e-9)), &s, mu, &c));
            }
        }
    }

    #[test]
    fn directed_contains_isotropic_once_beyond_the_log_regime(
        lb in 0.01..5.0f64, q in 0.1..100.0f64, mu in 0.5..20.0f64, beta in 2.2..6.0f64, extra in 1.0..5.0f64,
    ) {
        let z_m = extra * beta / (beta - 2.0);
        let s = SystemParams { beta, z_m, ..SystemParams::default() };
        let k = kappa(s.omega, s.sigma2, s.nu, s.beta, mu).unwrap();
        let y = k / (z_m * q * lb.powf(0.5 * s.alpha));
        let iso = RegionConfig::hybrid(Noise::Nonzero, MptMode::Isotropic, Storage::Large);
        let dir = RegionConfig::hybrid(Noise::Nonzero, MptMode::Directed, Storage::Large);
        let iso_min = hybrid_min_pb_density(lb, q, &s, mu, &iso).unwrap().or_infinity();
        let dir_min = hybrid_min_pb_density(lb, q, &s, mu, &dir).unwrap().or_infinity();
        // Nesting of the two inner bounds holds exactly when -ln(1 - y) <= z_m (1 - 2/beta) y.
        let nested = y < 1.0 && -(-y).ln_1p() <= z_m * (1.0 - 2.0 / beta) * y;
        if nested {
            prop_assert!(dir_min <= iso_min * (1.0 + 1e-12));
        } else if y < 1.0 {
            prop_assert!(dir_min >= iso_min * (1.0 - 1e-12));
        }
    }
}

#[test]
fn nesting_fails_just_above_the_directed_threshold() {
    // Close to z_m q lambda_b^{alpha/2} = kappa the directed bound blows up logarithmically while
    // the isotropic one stays finite, even with z_m well above beta / (beta - 2).
    let s = SystemParams {
        z_m: 6.0,
        ..SystemParams::default()
    };
    let mu = 4.0;
    let k = kappa(s.omega, s.sigma2, s.nu, s.beta, mu).unwrap();
    let q = 1.01 * k / s.z_m;
    let iso = RegionConfig::hybrid(Noise::Nonzero, MptMode::Isotropic, Storage::Large);
    let dir = RegionConfig::hybrid(Noise::Nonzero, MptMode::Directed, Storage::Large);
    let iso_min = hybrid_min_pb_density(1.0, q, &s, mu, &iso).unwrap().value().unwrap();
    let dir_min = hybrid_min_pb_density(1.0, q, &s, mu, &dir).unwrap().value().unwrap();
    assert!(dir_min > iso_min);
}

#[test]
fn directed_bound_asymptote() {
    let s = SystemParams::default();
    let mu = 3.8;
    let c = RegionConfig::hybrid(Noise::Nonzero, MptMode::Directed, Storage::Large);
    let k = kappa(s.omega, s.sigma2, s.nu, s.beta, mu).unwrap();
    let lb: f64 = 0.7;
    let q = 1e3 * k / (s.z_m * lb.powf(0.5 * s.alpha));
    let min = hybrid_min_pb_density(lb, q, &s, mu, &c).unwrap().value().unwrap();
    let product = PI * s.nu * s.nu * min * s.z_m * q * lb.powf(0.5 * s.alpha);
    assert!((product / k - 1.0).abs() < 0.01);
    assert_ne!(
        hybrid_min_pb_density(lb, q, &s, mu, &c).unwrap(),
        Requirement::Infeasible
    );
}

#[test]
fn bs_points_are_origin_plus_the_same_ppp() {
    for seed in 0..5 {
        let window = SimWindow::for_density(2.0, 10.0).unwrap();
        let d = DeploymentParams::new(1.0, 1.0, 2.0, 0.5);
        let r = sample_realization(&d, &window, &mut RandomStream::for_trial(seed, 0)).unwrap();
        let ppp = sample_ppp(2.0, &window, &mut RandomStream::for_trial(seed, 0)).unwrap();
        assert_eq!(r.bs_points[0], Point::ORIGIN);
        assert_eq!(&r.bs_points[1..], &ppp[..]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn mobiles_lie_in_their_own_cells(seed in any::<u64>(), lambda_b in 0.05..20.0f64) {
        let window = SimWindow::for_density(lambda_b, 10.0).unwrap();
        let d = DeploymentParams::new(1.0, 1.0, lambda_b, 0.0);
        let r = sample_realization(&d, &window, &mut RandomStream::for_trial(seed, 0)).unwrap();
        prop_assert_eq!(r.mobiles.len(), r.bs_points.len());
        for (i, m) in r.mobiles.iter().enumerate() {
            prop_assert!(window.contains(*m));
            prop_assert_eq!(nearest_index(&r.bs_points, *m).unwrap().0, i);
        }
    }

    #[test]
    fn estimates_ignore_worker_count(seed in any::<u64>()) {
        let s = SystemParams::default();
        let d = DeploymentParams::new(0.5, 3.0, 1.0, 0.8);
        let plan = TrialPlan::new(24, seed).with_truncation_factor(10.0);
        let run = |n| with_worker_count(n, || {
            (estimate_outage(&s, &d, &plan).unwrap(), estimate_mean_raw_power(&s, &d, MptMode::Directed, &plan).unwrap())
        }).unwrap();
        prop_assert_eq!(run(1), run(3));
    }
}
