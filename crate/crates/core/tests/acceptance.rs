//! Acceptance suite: one test per release criterion, each printing a
//! PASS line (run with `cargo test --test acceptance -- --nocapture` to see
//! them). Every tolerance is pinned here, not configured elsewhere.

use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use parageo::construction::{run, GrowthSequence};
use parageo::exact_linalg::{
    determinant, generalized_cross, is_almost_orthogonal, wedge, IntVector,
};
use parageo::interval::{Cert, Interval, PrecisionPolicy};
use parageo::minima::{
    lambda_sq_exact, minkowski_sandwich, successive_minima_bruteforce, volume, BodyFamily,
};
use parageo::num_bigint::BigInt;
use parageo::num_rational::BigRational;
use parageo::systems::{MeshSequence, QuasiRegularSystem};
use parageo::verify::{certify_system, CertStatus, VerifyConfig};

use num_traits::{One, Signed, Zero};

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn reference_mesh(count: usize) -> MeshSequence {
    MeshSequence::regular(ratio(2, 1), ratio(2, 1), count).unwrap()
}

/// Certified norm window `A_i <= |x_i| <= 2 A_i` via interval comparison of
/// the exact squared norm against enclosures of `A_i^2` and `4 A_i^2`.
fn norm_window_certified(point: &IntVector, x_exponent: &BigRational, bits: u32) -> bool {
    let a = Interval::from_ratio(x_exponent, bits + 16).exp(bits);
    let a2 = a.mul(&a, bits);
    let ns = Interval::from_int(&point.norm_sq());
    a2.certainly_le(&ns) == Cert::True && ns.certainly_le(&a2.scale2(2)) == Cert::True
}

/// Criterion: exact certificates for n in {2,3,4} on the regular mesh
/// x1 = 2, rho = 2, 12 stages; every window determinant and dual pairing is
/// +-1 exactly, every norm window interval-certified, under 60 s per n.
#[test]
fn acceptance_exact_certificates() {
    let policy = PrecisionPolicy::default();
    for n in [2usize, 3, 4] {
        let t0 = Instant::now();
        let mesh = reference_mesh(12);
        let growth = GrowthSequence::from_mesh(&mesh, &policy).unwrap();
        let result = run(n, &growth, 12, &policy).unwrap();
        assert_eq!(result.stage_count(), 12);

        // Re-verify everything independently of the stage records.
        for i in 1..=12 - n + 1 {
            let window: Vec<&IntVector> = (i..i + n).map(|j| result.point(j)).collect();
            let det = determinant(&window).unwrap();
            assert!(det.abs().is_one(), "n={n} window {i} determinant {det}");
        }
        for i in 1..=12 - n + 1 {
            let shifted: Vec<&IntVector> = (i + 1..i + n).map(|j| result.point(j)).collect();
            let w_next = generalized_cross(&shifted).unwrap();
            let dual = result.point(i).dot(&w_next).unwrap();
            assert!(dual.abs().is_one(), "n={n} dual pairing at {i}: {dual}");
        }
        for i in 1..=12 {
            assert!(
                norm_window_certified(result.point(i), mesh.value(i), 128),
                "n={n} norm window at {i}"
            );
        }
        let elapsed = t0.elapsed();
        assert!(
            elapsed.as_secs() < 60,
            "n={n} construction certificates took {elapsed:?}"
        );
        println!(
            "PASS: exact certificates n={n} (12 stages, {:.2?})",
            elapsed
        );
    }
}

/// Criterion: uniform bound for n = 3 on the same instance. The certified
/// max deviation plus the n*h sampling term must fall below 2 n^2 = 18,
/// decisively, with the precision cap at 512 bits; the report also states
/// whether the deviation sits below the analytic ceiling
/// (n^2+n) log 2 + log(n!/2^n) + n log 2.
#[test]
fn acceptance_uniform_bound_n3() {
    let sys = QuasiRegularSystem::new(reference_mesh(12), 3).unwrap();
    let config = VerifyConfig {
        samples_per_interval: 512,
        tail_rel_target: 1e-6,
        policy: PrecisionPolicy::new(128, 512),
    };
    let (report, _) = certify_system(&sys, &config).unwrap();
    assert_eq!(report.status, CertStatus::Pass, "certification must pass");
    assert_eq!(report.bound, 18);

    // The pass decision again, spelled out: upper end + n h < 2 n^2.
    let total = Interval::point(report.max_deviation_upper.clone())
        .add(&Interval::from_ratio(&report.sampling_error, 128), 128);
    assert_eq!(
        total.certainly_lt(&Interval::from_i64(18)),
        Cert::True,
        "max deviation {} + sampling {} must stay below 18",
        report.max_deviation_upper.to_f64_approx(),
        report.sampling_error
    );

    // Decisive: no indeterminate comparison anywhere in the report.
    for row in &report.rows {
        assert_eq!(row.leg_center_within, Cert::True, "leg at q={}", row.q);
    }
    for r in &report.residuals {
        assert_eq!(r.within_bound, Cert::True, "residual at q={}", r.q);
    }
    let sampling = Interval::from_ratio(&report.sampling_error, 64);
    println!(
        "PASS: uniform bound n=3 (max deviation {:.4} + sampling {:.4} < 18; below analytic ceiling {:.4}: {:?})",
        report.max_deviation_upper.to_f64_approx(),
        sampling.hi().to_f64_approx(),
        report.analytic_ceiling.hi().to_f64_approx(),
        report.below_analytic_ceiling,
    );
}

/// Criterion: trajectory residuals stay below n log 2 (upper interval ends)
/// at every stage and grid point, for n in {2, 3}.
#[test]
fn acceptance_trajectory_residuals() {
    for n in [2usize, 3] {
        let sys = QuasiRegularSystem::new(reference_mesh(12), n).unwrap();
        let config = VerifyConfig {
            samples_per_interval: 32,
            tail_rel_target: 1e-6,
            policy: PrecisionPolicy::new(128, 512),
        };
        let (report, _) = certify_system(&sys, &config).unwrap();
        assert!(!report.residuals.is_empty());
        for r in &report.residuals {
            assert_eq!(
                r.within_bound,
                Cert::True,
                "n={n} residual at stage {} q={} is [{}, {}]",
                r.point_index,
                r.q,
                r.residual.lo().to_f64_approx(),
                r.residual.hi().to_f64_approx(),
            );
        }
        println!(
            "PASS: trajectory residuals n={n} ({} rows, max upper {:.4} <= n log 2)",
            report.residuals.len(),
            report.max_residual_upper.to_f64_approx()
        );
    }
}

/// Criterion: oracle equivalence for n = 2. For 20 seeded rational
/// directions and Q in {1, 1.5, 2, 3}: the brute-force profile satisfies
/// Minkowski's second theorem 2^n/n! <= prod lambda_j * vol <= 2^n with the
/// volume certified to relative width 1e-6, and the product-bound sandwich
/// brackets the profile component-wise.
#[test]
fn acceptance_minima_oracle_equivalence() {
    let mut rng = StdRng::seed_from_u64(42);
    let qs = [ratio(1, 1), ratio(3, 2), ratio(2, 1), ratio(3, 1)];
    let bits = 128;
    let mut instances = 0;
    for _ in 0..20 {
        let w = loop {
            let a = rng.gen_range(-20i64..=20);
            let b = rng.gen_range(-20i64..=20);
            if a != 0 || b != 0 {
                break IntVector::from_i64(&[a, b]).unwrap();
            }
        };
        let body = BodyFamily::rational_unit(w.clone()).unwrap();
        for q in &qs {
            let profile = successive_minima_bruteforce(&body, q, 1_000_000, bits).unwrap();
            let lambdas_sq = profile.lambdas_sq.clone().unwrap();

            let (vol, _) = volume(2, &Interval::from_ratio(q, bits), 1e-6, bits).unwrap();
            assert!(
                vol.rel_width_approx().unwrap() <= 1e-6,
                "volume slack at w={w} Q={q}"
            );

            // prod lambda = sqrt(prod lambda^2), exactly known squares.
            let prod_sq = &lambdas_sq[0] * &lambdas_sq[1];
            let prod = Interval::from_ratio(&prod_sq, bits + 8).sqrt(bits);
            let product = prod.mul(&vol, bits);
            assert_eq!(
                product.certainly_ge(&Interval::from_i64(2)),
                Cert::True,
                "lower Minkowski bound at w={w} Q={q}"
            );
            assert_eq!(
                product.certainly_le(&Interval::from_i64(4)),
                Cert::True,
                "upper Minkowski bound at w={w} Q={q}"
            );

            // Sandwich from the standard basis: lambda_j <= sorted_j exactly
            // on squares, sorted_j <= factor * lambda_j certified.
            let e1 = IntVector::from_i64(&[1, 0]).unwrap();
            let e2 = IntVector::from_i64(&[0, 1]).unwrap();
            let mut basis_sq: Vec<BigRational> = vec![
                lambda_sq_exact(&e1, &body, q).unwrap().unwrap(),
                lambda_sq_exact(&e2, &body, q).unwrap().unwrap(),
            ];
            basis_sq.sort();
            for (j, l_sq) in lambdas_sq.iter().enumerate() {
                assert!(
                    l_sq <= &basis_sq[j],
                    "sandwich lower at w={w} Q={q} j={j}"
                );
            }
            let basis_lambdas: Vec<Interval> = [&e1, &e2]
                .iter()
                .map(|e| {
                    let sq = lambda_sq_exact(e, &body, q).unwrap().unwrap();
                    Interval::from_ratio(&sq, bits + 8).sqrt(bits)
                })
                .collect();
            let (sorted, factor) = minkowski_sandwich(&basis_lambdas, &vol, bits);
            assert_eq!(
                factor.certainly_ge(&Interval::one()),
                Cert::True,
                "factor >= 1 at w={w} Q={q}"
            );
            for (j, s) in sorted.iter().enumerate() {
                let bound = factor.mul(&profile.lambdas[j], bits);
                assert_eq!(
                    s.certainly_le(&bound),
                    Cert::True,
                    "sandwich upper at w={w} Q={q} j={j}"
                );
            }
            instances += 1;
        }
    }
    println!("PASS: minima oracle equivalence ({instances} instances, n=2)");
}

/// Criterion: exact zero-sum and breakpoint continuity on 100 randomized
/// quasi-regular systems, n in {2..5}.
#[test]
fn acceptance_system_invariants() {
    let mut rng = StdRng::seed_from_u64(7);
    for trial in 0..100 {
        let n = rng.gen_range(2usize..=5);
        let count = n + rng.gen_range(1usize..=5);
        // strictly increasing positive rationals
        let mut values = Vec::with_capacity(count);
        let mut cur = ratio(rng.gen_range(1i64..=9), rng.gen_range(1i64..=4));
        for _ in 0..count {
            values.push(cur.clone());
            cur += ratio(rng.gen_range(1i64..=12), rng.gen_range(1i64..=4));
        }
        let mesh = MeshSequence::explicit(values).unwrap();
        let sys = QuasiRegularSystem::new(mesh, n).unwrap();
        let k = sys.breakpoints().len();

        // zero-sum at every breakpoint plus random interior points
        let mut probes: Vec<BigRational> = sys.breakpoints().to_vec();
        let (lo, hi) = sys.domain();
        for _ in 0..5 {
            let t = ratio(rng.gen_range(0i64..=1000), 1000);
            probes.push(lo + (hi - lo) * t);
        }
        for q in &probes {
            let p = sys.evaluate(q).unwrap();
            let sum: BigRational = p.iter().sum();
            assert!(sum.is_zero(), "trial {trial}: zero-sum failed at q={q}");
            // membership in the monotone cone
            for w in p.windows(2) {
                assert!(w[0] <= w[1], "trial {trial}: not sorted at q={q}");
            }
        }
        // exact continuity across every interior breakpoint
        for i in 1..k {
            let q = sys.breakpoints()[i].clone();
            let left = sys.evaluate_in_interval(i, &q);
            if i + 1 <= k - 1 {
                let right = sys.evaluate_in_interval(i + 1, &q);
                assert_eq!(left, right, "trial {trial}: continuity at q_{}", i + 1);
            }
        }
    }
    println!("PASS: system invariants (100 randomized systems, n in 2..=5)");
}

/// Criterion: exterior-algebra property suite, 1000 randomized instances
/// per identity, zero failures.
#[test]
fn acceptance_exterior_algebra_properties() {
    let mut rng = StdRng::seed_from_u64(2024);

    let random_vec = |rng: &mut StdRng, n: usize| -> IntVector {
        loop {
            let coords: Vec<i64> = (0..n).map(|_| rng.gen_range(-9i64..=9)).collect();
            if coords.iter().any(|&c| c != 0) {
                return IntVector::from_i64(&coords).unwrap();
            }
        }
    };

    // Hadamard: |x_1 ^ .. ^ x_k|^2 <= prod |x_i|^2, exactly.
    for _ in 0..1000 {
        let n = rng.gen_range(2usize..=5);
        let k = rng.gen_range(1usize..=n);
        let vs: Vec<IntVector> = (0..k).map(|_| random_vec(&mut rng, n)).collect();
        let refs: Vec<&IntVector> = vs.iter().collect();
        let w = wedge(&refs).unwrap();
        let lhs = w.norm_sq();
        let rhs: BigInt = vs.iter().map(|v| v.norm_sq()).product();
        assert!(lhs <= rhs, "Hadamard failed for {vs:?}");
    }
    // equality for pairwise-orthogonal tuples (disjoint-support scaled units)
    for _ in 0..200 {
        let n = rng.gen_range(2usize..=5);
        let k = rng.gen_range(1usize..=n);
        let mut vs = Vec::with_capacity(k);
        let mut axes: Vec<usize> = (0..n).collect();
        for _ in 0..k {
            let pick = rng.gen_range(0..axes.len());
            let axis = axes.swap_remove(pick);
            let mut coords = vec![0i64; n];
            coords[axis] = rng.gen_range(1i64..=9);
            vs.push(IntVector::from_i64(&coords).unwrap());
        }
        let refs: Vec<&IntVector> = vs.iter().collect();
        let w = wedge(&refs).unwrap();
        let rhs: BigInt = vs.iter().map(|v| v.norm_sq()).product();
        assert_eq!(w.norm_sq(), rhs, "orthogonal Hadamard equality");
    }

    // Almost-orthogonal product bound:
    // |x_1 ^ .. ^ x_k|^2 * 4^(k-1) >= prod |x_i|^2 when almost orthogonal.
    let mut ao_seen = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(2usize..=5);
        let k = rng.gen_range(2usize..=n);
        let vs: Vec<IntVector> = (0..k).map(|_| random_vec(&mut rng, n)).collect();
        let refs: Vec<&IntVector> = vs.iter().collect();
        let (ao, _) = is_almost_orthogonal(&refs, 64).unwrap();
        if !ao {
            continue;
        }
        ao_seen += 1;
        let w = wedge(&refs).unwrap();
        let lhs = w.norm_sq() * BigInt::from(4).pow(k as u32 - 1);
        let rhs: BigInt = vs.iter().map(|v| v.norm_sq()).product();
        assert!(lhs >= rhs, "product bound failed for {vs:?}");
        // subsequence closure: contiguous subsequences stay almost orthogonal
        for a in 0..k {
            for b in a + 1..=k {
                let sub: Vec<&IntVector> = refs[a..b].to_vec();
                let (sub_ao, _) = is_almost_orthogonal(&sub, 64).unwrap();
                assert!(sub_ao, "subsequence closure failed");
            }
        }
    }
    assert!(ao_seen > 100, "too few almost-orthogonal samples: {ao_seen}");

    // cross/det/wedge consistency, 1000 instances.
    for _ in 0..1000 {
        let n = rng.gen_range(2usize..=5);
        let vs: Vec<IntVector> = (0..n - 1).map(|_| random_vec(&mut rng, n)).collect();
        let refs: Vec<&IntVector> = vs.iter().collect();
        let cross = generalized_cross(&refs).unwrap();
        let w = wedge(&refs).unwrap();
        assert_eq!(cross.norm_sq(), w.norm_sq(), "cross/wedge norms differ");
        let x = random_vec(&mut rng, n);
        let mut all: Vec<&IntVector> = vec![&x];
        all.extend(refs.iter().copied());
        let det = determinant(&all).unwrap();
        assert_eq!(x.dot(&cross).unwrap(), det, "duality x.w = det failed");
        if w.is_zero() {
            assert!(cross.is_zero(), "cross nonzero on dependent input");
        }
    }
    println!("PASS: exterior algebra property suite (1000 instances per identity)");
}

/// Criterion: the reference two-dimensional walkthrough is reproduced byte
/// for byte under the reference rounding policy, and its postconditions
/// hold regardless.
#[test]
fn acceptance_worked_example_regression() {
    let policy = PrecisionPolicy::default();
    let growth = GrowthSequence::from_rationals(vec![
        ratio(1, 1),
        ratio(4, 1),
        ratio(16, 1),
        ratio(64, 1),
    ])
    .unwrap();
    let result = run(2, &growth, 3, &policy).unwrap();
    let rendered: Vec<String> = result.points().iter().map(|p| p.to_string()).collect();
    assert_eq!(
        rendered,
        vec![
            "(1, 1)".to_string(),
            "(5, 4)".to_string(),
            "(19, 15)".to_string()
        ],
        "byte-exact walkthrough"
    );
    // postcondition-only acceptance (valid for any rounding policy)
    for i in 1..=2 {
        let det = determinant(&[result.point(i), result.point(i + 1)]).unwrap();
        assert!(det.abs().is_one());
    }
    for s in result.stages() {
        assert!(s.dual_pairing.abs().is_one());
    }
    println!("PASS: worked-example regression ((1,1), (5,4), (19,15) byte-exact)");
}
