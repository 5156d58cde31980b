//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured quantity. Run with `cargo test -p twoweight-cli --test
//! acceptance` (add `-- --nocapture` to see the lines on success).

use std::time::Instant;
use twoweight::functionals::{
    a2_scan, energy_sum, energy_sum_f64, fitted_slope, gap_energy_partial_sums, Decomposition,
    EnergyDirection, MeasureF64,
};
use twoweight::interval::Interval;
use twoweight::kernel::Region;
use twoweight::measures::{self, s_hat};
use twoweight::rat::{npow, rat, rint, to_f64, Rat};
use twoweight::reversal;
use twoweight::scalar::Scalar;
use twoweight::transform;
use twoweight::tree::{self, TreeAddress};
use twoweight::{ExecMode, KernelSpec};
use twoweight_cli::{run_named_check, MeasureCache, RunConfig};
use num::traits::{One, Signed, Zero};

fn config() -> RunConfig {
    let mut cfg = RunConfig { stable_output: true, ..RunConfig::default() };
    cfg.validate().expect("default config is valid");
    cfg
}

#[test]
fn criterion_1_exact_redistribution() {
    let t0 = Instant::now();
    let kernel = KernelSpec::default_flattened();
    let stages = measures::redistribute_chain(16, 7, &kernel).expect("chain to depth 7");
    for (i, stage) in stages.iter().enumerate() {
        let m = (i + 1) as u32;
        let closed = measures::redistributed_closed_form(16, m).unwrap();
        assert_eq!(stage, &closed, "stage {m} deviates from the closed form");
    }
    // child ratios at every node to depth 6 are exactly (1 +- 1/16)/2
    let (up, dn) = (rat(17, 32), rat(15, 32));
    for level in 1..=6u32 {
        for addr in TreeAddress::all_at_level(level) {
            let parent = measures::omega_hat_node_mass(&addr, 16);
            let (lo, hi) = addr.children();
            let ratio_lo = measures::omega_hat_node_mass(&lo, 16) / &parent;
            let ratio_hi = measures::omega_hat_node_mass(&hi, 16) / &parent;
            assert!(ratio_lo == up || ratio_lo == dn);
            assert_eq!(&ratio_lo + &ratio_hi, Rat::one());
        }
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 10.0, "criterion 1 runtime {dt:?} exceeds 10 s");
    println!("ACCEPTANCE 1 PASS: literal redistribution equals the closed form to depth 7 (exact), {dt:?}");
}

#[test]
fn criterion_2_flatness() {
    let t0 = Instant::now();
    let kernel = KernelSpec::default_flattened();
    let omega = measures::redistributed_closed_form(16, 8).unwrap();
    let rep = transform::certify_flatness(&kernel, &omega, 16, 8, 5, 1, ExecMode::default());
    assert!(rep.pass, "flatness failure: {:?}", rep.first_failure);
    // the certificate covers all centers below depth 8 and sampled points of
    // every central interval to depth 6
    assert!(rep.centers_checked >= 255);
    assert!(rep.samples_checked >= 255 + 5 * 127);
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 60.0, "criterion 2 runtime {dt:?} exceeds 60 s");
    println!(
        "ACCEPTANCE 2 PASS: transform vanishes exactly at {} evaluation points, {dt:?}",
        rep.samples_checked
    );
}

#[test]
fn criterion_3_sigma_dot_ratio() {
    let n = 16u32;
    let gens = 7u32;
    let sd = measures::sigma_dot(n, gens).unwrap();
    let q = rat(4, 255);
    let limit = rat(255, 251);
    for level in 1..gens {
        for addr in TreeAddress::all_at_level(level) {
            let iv = tree::interval_of(&addr, n);
            let mut partial = Rat::zero();
            let mut qk = Rat::one();
            for _ in 0..(gens - level) {
                partial += &qk;
                qk *= &q;
            }
            // exact identity: truncated interval mass over the gap weight
            let ratio = sd.mass_on(&iv, true) / s_hat(&addr, n);
            assert_eq!(ratio, partial, "geometric identity fails at {addr}");
            if gens - level == 6 {
                let err = to_f64(&(&limit - &partial)).abs();
                assert!(err < 1e-6, "limit error {err} at depth gap 6");
            }
        }
    }
    println!("ACCEPTANCE 3 PASS: truncated mass ratios equal the exact geometric sums; limit 255/251 within 1e-6 at gap 6");
}

#[test]
fn criterion_4_replication_and_dilation() {
    let rep = measures::verify_replication(16, 8).expect("depth in range");
    assert!(rep.pass, "replication failure: {:?}", rep.first_failure);
    assert!(rep.checks.len() >= 40);

    // kernel dilation: exact equality in exact regions; transitions evaluate
    // through the shared normalized profile, so the float paths agree to the
    // last bit (tolerance 1e-12 required)
    let kernel = KernelSpec::default_flattened();
    let mut rng = twoweight::random::rng_for(1, "acceptance-dilation", 0);
    let mut exact_samples = 0usize;
    let mut transition_samples = 0usize;
    let span = Interval::new(npow(16, -3), npow(16, 3));
    let mut i = 0usize;
    while transition_samples < 10_000 {
        i += 1;
        assert!(i < 2_000_000, "not enough transition samples found");
        let x = twoweight::random::rat_in_interval(&mut rng, &span, 1 << 30);
        let kx = kernel.eval(&x).unwrap();
        let knx = kernel.eval(&(&x * rint(16))).unwrap();
        match (&kx, &knx) {
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                exact_samples += 1;
                assert_eq!(b, &(a / rint(16)), "exact dilation fails at {x}");
            }
            _ => {
                transition_samples += 1;
                let dev = (knx.to_f64() - kx.to_f64() / 16.0).abs();
                assert!(dev < 1e-12, "transition dilation off by {dev:e}");
            }
        }
    }
    assert!(exact_samples > 0);
    println!(
        "ACCEPTANCE 4 PASS: replication identities exact ({} checks); dilation exact on {} samples, within 1e-12 on {} transition samples",
        rep.checks.len(),
        exact_samples,
        transition_samples
    );
}

#[test]
fn criterion_5_a2_stability() {
    let sd = measures::sigma_dot(16, 6).unwrap();
    let om = measures::redistributed_closed_form(16, 8).unwrap();
    let scan = a2_scan(&sd, &om, 16, 8, 1000, 1, ExecMode::default());
    assert!(scan.sup.is_finite() && scan.sup > 0.0);
    let a = scan.per_level_sup[6];
    let b = scan.per_level_sup[8];
    let drift = (b - a).abs() / a;
    assert!(drift < 0.10, "sup varies by {drift:.4} between depths 6 and 8");
    // the certified exact value backs the float sup
    assert!((to_f64(&scan.sup_exact) - scan.sup).abs() <= 1e-9 * scan.sup);
    println!(
        "ACCEPTANCE 5 PASS: Muckenhoupt sup {:.6} (exact {}), depth 6 vs 8 drift {:.2e}",
        scan.sup,
        twoweight::rat::format_rat(&scan.sup_exact),
        drift
    );
}

#[test]
fn criterion_6_testing_series() {
    let t0 = Instant::now();
    let cfg = config();
    let mut cache = MeasureCache::default();
    for name in ["test-forward", "test-backward", "wbp-scan", "maximal-testing"] {
        let reports = run_named_check(&cfg, &mut cache, name).unwrap();
        for r in &reports {
            assert!(r.pass, "{name} series failed: witnesses {:?}", r.witnesses);
            assert!(r.per_depth.len() == 5, "{name} must cover depths 4..8");
            let values: Vec<f64> = r.per_depth.iter().map(|p| p.value).collect();
            let max = values.iter().cloned().fold(f64::MIN, f64::max);
            let min = values.iter().cloned().fold(f64::MAX, f64::min);
            assert!(max / min <= 10.0, "{name} spread {max}/{min}");
            for w in values[values.len() - 3..].windows(2) {
                assert!((w[1] - w[0]) / w[0] < 0.05, "{name} final increments exceed 5%");
            }
        }
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 600.0, "criterion 6 runtime {dt:?} exceeds 10 min");
    println!("ACCEPTANCE 6 PASS: testing/WBP/maximal series bounded over depths 4..8, {dt:?}");
}

#[test]
fn criterion_7_energy_dichotomy() {
    let t0 = Instant::now();
    let cfg = config();
    let mut cache = MeasureCache::default();

    // (a) bounded backward energy for the atomic pair
    let r = run_named_check(&cfg, &mut cache, "energy-backward-dot").unwrap().remove(0);
    assert!(r.pass, "backward-dot: {:?}", r.witnesses);
    let values: Vec<f64> = r.per_depth.iter().map(|p| p.value).collect();
    assert!(values.last().unwrap() / values.first().unwrap() <= 10.0);

    // exact anchors: the float mirror agrees with the exact decomposition sum
    let sd = measures::sigma_dot(16, 6).unwrap();
    let om = measures::redistributed_closed_form(16, 8).unwrap();
    let sdf = MeasureF64::from(&sd);
    let omf = MeasureF64::from(&om);
    for level in 1..=3u32 {
        let dec = Decomposition::children_at_level(16, level);
        let exact = energy_sum(&dec, &sd, &om, EnergyDirection::Backward).unwrap();
        assert!(exact.exact());
        let parts: Vec<(f64, f64)> =
            dec.parts.iter().map(|p| (to_f64(&p.left), to_f64(&p.right))).collect();
        let fast = energy_sum_f64(&parts, &sdf, &omf);
        assert!((exact.to_f64() - fast).abs() <= 1e-9 * exact.to_f64().max(1e-12));
    }

    // (b) affine divergence for the smeared pair over the gap decomposition
    let sh = measures::sigma_hat(16, 6).unwrap();
    let sums = gap_energy_partial_sums(16, 5, &sh, &om).unwrap();
    let f: Vec<f64> = sums.iter().map(to_f64).collect();
    let slope = fitted_slope(&f);
    assert!(slope > 0.0, "gap partial sums must grow");
    let increments: Vec<f64> = f.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = increments.iter().sum::<f64>() / increments.len() as f64;
    for d in &increments {
        assert!(*d > mean / 3.0 && *d < mean * 3.0, "increment {d} vs mean {mean}");
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 300.0, "criterion 7 runtime {dt:?} exceeds 5 min");
    println!(
        "ACCEPTANCE 7 PASS: atomic backward energy bounded (sup {:.4e}); smeared gap sums grow affinely (slope {slope:.4e}), {dt:?}",
        values.last().unwrap()
    );
}

#[test]
fn criterion_8_energy_reversal() {
    let mut c0s = Vec::new();
    for inst in reversal::random_hilbert_instances(20, 1) {
        let chk = reversal::energy_reversal_check(&inst).expect("valid instance");
        assert!(chk.rhs.is_exact(), "plain-kernel rhs must be exact for atomic data");
        let c0 = chk.c0.expect("positive rhs");
        assert!(c0.is_finite() && c0 > 0.0);
        c0s.push(c0);
    }
    let max = c0s.iter().cloned().fold(f64::MIN, f64::max);
    let min = c0s.iter().cloned().fold(f64::MAX, f64::min);
    assert!(max / min <= 10.0, "constant spread {max}/{min} exceeds 10");

    let inst = reversal::build_reversal_failure_witness(16, rat(3, 4)).expect("witness");
    // every kernel classification used by the witness is exact flat band 0
    for p in &inst.mu.pieces {
        for endpoint in [&p.interval.left, &p.interval.right] {
            for x in [&inst.j.left, &inst.j.right] {
                let cls = inst.kernel.classify(&(endpoint - x)).unwrap();
                assert_eq!((cls.region, cls.band), (Region::Flat, 0));
            }
        }
    }
    let chk = reversal::energy_reversal_check(&inst).unwrap();
    assert!(chk.reversal_failed);
    assert!(chk.rhs.is_zero_exact());
    assert!(chk.lhs.is_positive());
    println!(
        "ACCEPTANCE 8 PASS: 20 plain-kernel constants within spread {:.3}; flat-spot witness has rhs exactly 0, lhs {:.4e}",
        max / min,
        to_f64(&chk.lhs)
    );
}

#[test]
fn criterion_9_kernel_structure() {
    let kernel = KernelSpec::default_flattened();
    let sqrt_n = 4.0f64;
    let mut transition_checked = 0usize;
    let mut samples = 0usize;
    // log-spaced samples rounded to dyadic rationals, nine bands
    let per_band = 1112usize;
    for band in -4i32..=4 {
        let scale = npow(16, -band);
        for j in 0..per_band {
            // u sweeps [1/4, 4] = [N^{-1/2}, N^{1/2}] uniformly in log u
            let uf = 0.25 * 16f64.powf((j as f64 + 0.5) / per_band as f64);
            let u = Rat::from_float(uf).unwrap();
            let x = &u * &scale;
            samples += 1;
            let plus = kernel.eval(&x).unwrap();
            let minus = kernel.eval(&(-x.clone())).unwrap();
            // oddness: exact on exact paths, bitwise through transitions
            match (&plus, &minus) {
                (Scalar::Exact(a), Scalar::Exact(b)) => assert_eq!(a, &(-b.clone())),
                _ => assert_eq!(plus.to_f64(), -minus.to_f64()),
            }
            // ellipticity window
            let v = to_f64(&x) * plus.to_f64();
            assert!(v >= 1.0 / sqrt_n - 1e-9 && v <= sqrt_n + 1e-9, "xK = {v} escapes the window");
            // monotonicity
            let d = kernel.eval_derivative(&x).unwrap();
            assert!(d.to_f64() <= 1e-18, "positive derivative {} at {x}", d.to_f64());
            // finite differences in transitions (relative step)
            if kernel.classify(&x).unwrap().region.is_transition() {
                transition_checked += 1;
                let xf = to_f64(&x);
                let h = xf * 1e-8;
                let fd = (kernel.eval_f64(xf + h) - kernel.eval_f64(xf - h)) / (2.0 * h);
                let rel = ((d.to_f64() - fd) / fd).abs();
                assert!(rel < 1e-5, "transition derivative off by {rel:.2e} at {x}");
            }
        }
    }
    assert!(samples >= 10_000, "need at least 1e4 samples, got {samples}");
    assert!(transition_checked >= 100, "not enough transition samples ({transition_checked})");
    println!(
        "ACCEPTANCE 9 PASS: oddness, ellipticity window [1/4, 4], nonpositive derivative on {samples} log-spaced samples; {} transition finite-difference checks within 1e-5",
        transition_checked
    );
}
