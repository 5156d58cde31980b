//! The thirteen battery checks.

use crate::config::{RunConfig, BATTERY_ORDER};
use num::traits::{One, Zero};
use std::collections::BTreeMap;
use std::time::Instant;
use twoweight::functionals::{
    a2_scan, energy_sum_f64, fitted_slope, gap_energy_partial_sums, maximal_testing,
    testing_backward, testing_forward, wbp_scan, Decomposition, MeasureF64,
};
use twoweight::interval::Interval;
use twoweight::measures::{self, DiscreteMeasure};
use twoweight::rat::{format_rat, npow, rat, rint, to_f64, Rat};
use twoweight::report::{bounded_series_proxy, CheckReport, DepthPoint};
use twoweight::scalar::Scalar;
use twoweight::transform;
use twoweight::tree::{self, TreeAddress};

/// Lazily built measures shared across checks.
#[derive(Default)]
pub struct MeasureCache {
    omegas: BTreeMap<u32, DiscreteMeasure>,
    sigma_dots: BTreeMap<u32, DiscreteMeasure>,
    sigma_hats: BTreeMap<u32, DiscreteMeasure>,
}

impl MeasureCache {
    pub fn omega(&mut self, n: u32, m: u32) -> &DiscreteMeasure {
        self.omegas
            .entry(m)
            .or_insert_with(|| measures::redistributed_closed_form(n, m).expect("depth validated"))
    }

    pub fn sigma_dot(&mut self, n: u32, gens: u32) -> &DiscreteMeasure {
        self.sigma_dots
            .entry(gens)
            .or_insert_with(|| measures::sigma_dot(n, gens).expect("depth validated"))
    }

    pub fn sigma_hat(&mut self, n: u32, gens: u32) -> &DiscreteMeasure {
        self.sigma_hats
            .entry(gens)
            .or_insert_with(|| measures::sigma_hat(n, gens).expect("depth validated"))
    }
}

pub struct BatteryOutcome {
    pub reports: Vec<CheckReport>,
    pub warnings: Vec<String>,
    pub all_pass: bool,
}

fn blank(cfg: &RunConfig, name: &str, depth: u32) -> CheckReport {
    CheckReport {
        name: name.to_string(),
        params: cfg.params_at(depth),
        value: 0.0,
        value_exact: None,
        bound_proxy: 0.0,
        pass: false,
        witnesses: vec![],
        per_depth: vec![],
        runtime_ms: 0,
        seed: cfg.seed,
    }
}

fn finish(mut report: CheckReport, started: Instant, cfg: &RunConfig) -> CheckReport {
    report.runtime_ms =
        if cfg.stable_output { 0 } else { started.elapsed().as_millis() as u64 };
    report.canonicalize();
    report
}

/// Evenly sampled node addresses at a level, endpoints always included.
fn sampled_nodes(level: u32, max_count: usize) -> Vec<TreeAddress> {
    let total = 1u64 << level;
    let step = (total as usize / max_count.max(1)).max(1);
    let mut out: Vec<TreeAddress> = (1..=total)
        .step_by(step)
        .map(|r| TreeAddress::from_rank(level, r))
        .collect();
    if level > 0 {
        out.push(TreeAddress::from_rank(level, total));
    }
    out.dedup();
    out
}

pub fn check_build_measures(cfg: &RunConfig, cache: &mut MeasureCache) -> CheckReport {
    let t0 = Instant::now();
    let mut report = blank(cfg, "build-measures", cfg.depth);
    let n = cfg.n_param;
    let omega = cache.omega(n, cfg.depth).clone();
    let sd = cache.sigma_dot(n, cfg.sigma_gens).clone();
    let sh = cache.sigma_hat(n, cfg.sigma_gens).clone();

    let mut pass = omega.total_mass() == Rat::one();
    if !pass {
        report.witnesses.push("omega mass is not exactly 1".into());
    }
    // expected sigma mass: the root level carries 1; each level below the
    // root multiplies by q = 4/(N^2(1 - eta^2)), seeded by the even root
    // split contributing 4/N^2
    let q = rat(4, 1) / (npow(n, 2) * (Rat::one() - npow(n, -2)));
    let mut expect = Rat::zero();
    if cfg.sigma_gens >= 1 {
        expect += Rat::one();
        let mut level_total = rat(4, 1) / npow(n, 2);
        for _ in 1..cfg.sigma_gens {
            expect += &level_total;
            level_total *= &q;
        }
    }
    if sd.total_mass() != expect {
        pass = false;
        report.witnesses.push("sigma-dot mass differs from the geometric sum".into());
    }
    if sh.total_mass() != sd.total_mass() {
        pass = false;
        report.witnesses.push("smeared sigma mass differs from atomic sigma".into());
    }
    // refinement consistency on sampled nodes
    for level in 0..cfg.depth.min(4) {
        for addr in sampled_nodes(level, 8) {
            let iv = tree::interval_of(&addr, n);
            if omega.mass_on(&iv, true) != measures::omega_hat_node_mass(&addr, n) {
                pass = false;
                report.witnesses.push(format!("mass mismatch at {}", addr.level_rank_label()));
            }
        }
    }
    report.pass = pass;
    report.value = to_f64(&sd.total_mass());
    report.value_exact = Some(format_rat(&sd.total_mass()));
    report.bound_proxy = 1.0;
    finish(report, t0, cfg)
}

pub fn check_verify_replication(cfg: &RunConfig, _cache: &mut MeasureCache) -> CheckReport {
    let t0 = Instant::now();
    let mut report = blank(cfg, "verify-replication", cfg.depth);
    match measures::verify_replication(cfg.n_param, cfg.depth) {
        Ok(rep) => {
            report.pass = rep.pass;
            report.value = rep.checks.len() as f64;
            if let Some(f) = rep.first_failure {
                report.witnesses.push(f);
            }
        }
        Err(e) => report.witnesses.push(e.to_string()),
    }
    // kernel dilation identity on a sample of exact-region and transition points
    let kernel = cfg.kernel();
    let mut max_dev = 0.0f64;
    let mut rng = twoweight::random::rng_for(cfg.seed, "dilation", 0);
    let span = Interval::new(npow(cfg.n_param, -2), npow(cfg.n_param, 2));
    for _ in 0..1000 {
        let x = twoweight::random::rat_in_interval(&mut rng, &span, 1 << 24);
        let kx = kernel.eval(&x).expect("nonzero sample");
        let knx = kernel.eval(&(&x * rint(cfg.n_param as i64))).expect("nonzero sample");
        match (&kx, &knx) {
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                if b != &(a / rint(cfg.n_param as i64)) {
                    report.pass = false;
                    report.witnesses.push(format!("dilation broken at {}", format_rat(&x)));
                }
            }
            _ => {
                let dev = (knx.to_f64() - kx.to_f64() / cfg.n_param as f64).abs();
                max_dev = max_dev.max(dev);
                if dev > 1e-12 {
                    report.pass = false;
                    report.witnesses.push(format!("dilation off by {dev:e} at {}", format_rat(&x)));
                }
            }
        }
    }
    report.bound_proxy = 1e-12;
    if report.value == 0.0 {
        report.value = max_dev;
    }
    finish(report, t0, cfg)
}

pub fn check_verify_eta(cfg: &RunConfig, _cache: &mut MeasureCache) -> CheckReport {
    let t0 = Instant::now();
    let mut report = blank(cfg, "verify-eta", cfg.depth);
    let chain_depth = cfg.depth.saturating_sub(1).clamp(2, 7);
    let kernel = cfg.kernel();
    match measures::redistribute_chain(cfg.n_param, chain_depth, &kernel) {
        Ok(stages) => {
            let mut pass = true;
            for (i, stage) in stages.iter().enumerate() {
                let m = (i + 1) as u32;
                let expect = measures::redistributed_closed_form(cfg.n_param, m).unwrap();
                if stage != &expect {
                    pass = false;
                    report.witnesses.push(format!("stage {m} deviates from the closed form"));
                }
                report.per_depth.push(DepthPoint { depth: m, value: to_f64(&stage.total_mass()) });
            }
            report.pass = pass;
            report.value = chain_depth as f64;
            report.value_exact = Some("0".into()); // exact-equality check, zero defect
        }
        Err(e) => report.witnesses.push(e.to_string()),
    }
    report.bound_proxy = 0.0;
    finish(report, t0, cfg)
}

pub fn check_certify_flatness(cfg: &RunConfig, cache: &mut MeasureCache) -> CheckReport {
    let t0 = Instant::now();
    let mut report = blank(cfg, "certify-flatness", cfg.depth);
    let kernel = cfg.kernel();
    let omega = cache.omega(cfg.n_param, cfg.depth).clone();
    let rep = transform::certify_flatness(
        &kernel,
        &omega,
        cfg.n_param,
        cfg.depth,
        5,
        cfg.seed,
        cfg.exec_mode(),
    );
    report.pass = rep.pass;
    report.value = rep.samples_checked as f64;
    report.value_exact = Some("0".into());
    report.bound_proxy = 0.0;
    if let Some(f) = rep.first_failure {
        report.witnesses.push(f);
    }
    finish(report, t0, cfg)
}

pub fn check_a2_scan(cfg: &RunConfig, cache: &mut MeasureCache) -> CheckReport {
    let t0 = Instant::now();
    let mut report = blank(cfg, "a2-scan", cfg.depth);
    let sd = cache.sigma_dot(cfg.n_param, cfg.sigma_gens).clone();
    let om = cache.omega(cfg.n_param, cfg.depth).clone();
    let scan = a2_scan(&sd, &om, cfg.n_param, cfg.depth, 1000, cfg.seed, cfg.exec_mode());
    for (lvl, sup) in scan.per_level_sup.iter().enumerate() {
        report.per_depth.push(DepthPoint { depth: lvl as u32, value: *sup });
    }
    let shallow_idx = cfg.depth.saturating_sub(2) as usize;
    let a = scan.per_level_sup[shallow_idx.min(scan.per_level_sup.len() - 1)];
    let b = *scan.per_level_sup.last().unwrap();
    let drift = if a > 0.0 { (b - a).abs() / a } else { f64::INFINITY };
    report.pass = drift < cfg.tol_a2_stability && b.is_finite();
    report.value = scan.sup;
    report.value_exact = Some(format_rat(&scan.sup_exact));
    report.bound_proxy = cfg.tol_a2_stability;
    report.witnesses.push(format!("argmax {}", scan.argmax));
    report.witnesses.push(format!("stability drift {drift:.4}"));
    finish(report, t0, cfg)
}

fn series_report(
    cfg: &RunConfig,
    name: &str,
    series: Vec<(u32, f64)>,
    extra_witnesses: Vec<String>,
) -> CheckReport {
    let mut report = blank(cfg, name, cfg.depth);
    let values: Vec<f64> = series.iter().map(|p| p.1).collect();
    let chk = bounded_series_proxy(&values, cfg.tol_spread, cfg.tol_trend, 2);
    report.per_depth = series.iter().map(|(d, v)| DepthPoint { depth: *d, value: *v }).collect();
    report.pass = chk.pass;
    report.value = *values.last().unwrap_or(&f64::NAN);
    report.bound_proxy = cfg.tol_spread;
    report.witnesses.push(format!("max/min {:.4}", chk.max_over_min));
    report
        .witnesses
        .push(format!("tail increments {:?}", chk.tail_increments.iter().map(|d| (d * 1e4).round() / 1e4).collect::<Vec<_>>()));
    report.witnesses.extend(extra_witnesses);
    report
}

pub fn check_test_forward(cfg: &RunConfig, cache: &mut MeasureCache) -> CheckReport {
    let t0 = Instant::now();
    let kernel = cfg.kernel();
    let mut series = Vec::new();
    for d in cfg.depth_series() {
        let n_d = d.saturating_sub(2).max(1);
        let sd = cache.sigma_dot(cfg.n_param, n_d).clone();
        let om = cache.omega(cfg.n_param, d).clone();
        let r = testing_forward(&Interval::unit(), &kernel, &sd, &om, cfg.tol_quadrature, cfg.exec_mode())
            .expect("unit interval carries sigma mass");
        series.push((d, r.ratio));
    }
    finish(series_report(cfg, "test-forward", series, vec![]), t0, cfg)
}

pub fn check_test_backward(cfg: &RunConfig, cache: &mut MeasureCache) -> CheckReport {
    let t0 = Instant::now();
    let kernel = cfg.kernel();
    let mut series = Vec::new();
    let mut witnesses = Vec::new();
    let mut all_exact = true;
    let mut psup_max = 0.0f64;
    for d in cfg.depth_series() {
        let n_d = d.saturating_sub(2).max(1);
        let sd = cache.sigma_dot(cfg.n_param, n_d).clone();
        let om = cache.omega(cfg.n_param, d).clone();
        let mut worst = 0.0f64;
        for level in 1..n_d.max(2) {
            for addr in sampled_nodes(level, 16) {
                let iv = tree::interval_of(&addr, cfg.n_param);
                let r = testing_backward(&iv, &kernel, &sd, &om).expect("tree interval carries mass");
                all_exact &= r.exact;
                psup_max = psup_max.max(r.pointwise_over_poisson);
                worst = worst.max(r.ratio);
            }
        }
        series.push((d, worst));
    }
    if !all_exact {
        witnesses.push("inexact backward path encountered".into());
    }
    witnesses.push(format!("pointwise/poisson sup {psup_max:.4}"));
    let mut report = series_report(cfg, "test-backward", series, witnesses);
    report.pass &= all_exact;
    finish(report, t0, cfg)
}

pub fn check_wbp_scan(cfg: &RunConfig, cache: &mut MeasureCache) -> CheckReport {
    let t0 = Instant::now();
    let kernel = cfg.kernel();
    let mut series = Vec::new();
    let mut witnesses = Vec::new();
    let mut all_exact = true;
    for d in cfg.depth_series() {
        let n_d = d.saturating_sub(2).max(1);
        let sd = cache.sigma_dot(cfg.n_param, n_d).clone();
        let om = cache.omega(cfg.n_param, d).clone();
        let r = wbp_scan(&kernel, &sd, &om, cfg.n_param, n_d).expect("canonical measures");
        all_exact &= r.exact_numerators;
        if let Some((li, lj)) = &r.argmax {
            if d == cfg.depth {
                witnesses.push(format!("argmax pair I = {li}, J = {lj}"));
            }
        }
        series.push((d, r.sup));
    }
    if !all_exact {
        witnesses.push("inexact pairing encountered".into());
    }
    let mut report = series_report(cfg, "wbp-scan", series, witnesses);
    report.pass &= all_exact;
    finish(report, t0, cfg)
}

pub fn check_maximal_testing(cfg: &RunConfig, cache: &mut MeasureCache) -> CheckReport {
    let t0 = Instant::now();
    let mut series = Vec::new();
    for d in cfg.depth_series() {
        let n_d = d.saturating_sub(2).max(1);
        let sd = cache.sigma_dot(cfg.n_param, n_d).clone();
        let om = cache.omega(cfg.n_param, d).clone();
        let mut worst = 0.0f64;
        for level in 0..=2u32.min(n_d.saturating_sub(1)) {
            for addr in sampled_nodes(level, 8) {
                let q = tree::interval_of(&addr, cfg.n_param);
                let r = maximal_testing(&q, &sd, &om, cfg.n_param, d).expect("tree window");
                worst = worst.max(to_f64(&r));
            }
        }
        series.push((d, worst));
    }
    finish(series_report(cfg, "maximal-testing", series, vec![]), t0, cfg)
}

fn random_parts_f64(cfg: &RunConfig, label: &str, d: u32, j: u64) -> Vec<(f64, f64)> {
    let mut rng = twoweight::random::rng_for(cfg.seed, label, (d as u64) << 32 | j);
    let dec = Decomposition::random(&mut rng, &Interval::unit(), 1u64 << d.min(16), 12);
    dec.parts.iter().map(|p| (to_f64(&p.left), to_f64(&p.right))).collect()
}

fn tree_parts_f64(n: u32, level: u32) -> Vec<(f64, f64)> {
    Decomposition::children_at_level(n, level)
        .parts
        .iter()
        .map(|p| (to_f64(&p.left), to_f64(&p.right)))
        .collect()
}

/// Running sup of forward energy sums: tree-child decompositions at growing
/// levels plus seeded random decompositions at growing grid resolution, all
/// at the configured truncations. The scan runs on float mirrors; the
/// tree-child anchors are certified exact in the acceptance suite.
pub fn check_energy_forward(cfg: &RunConfig, cache: &mut MeasureCache) -> CheckReport {
    let t0 = Instant::now();
    let sd = cache.sigma_dot(cfg.n_param, cfg.sigma_gens).clone();
    let om = cache.omega(cfg.n_param, cfg.depth).clone();
    let sdf = MeasureF64::from(&sd);
    let omf = MeasureF64::from(&om);
    let normalizer = to_f64(&sd.total_mass());
    let mut running = 0.0f64;
    let mut series = Vec::new();
    for d in cfg.depth_series() {
        let level = (d - 2).min(cfg.depth.saturating_sub(2));
        running = running.max(energy_sum_f64(&tree_parts_f64(cfg.n_param, level), &omf, &sdf) / normalizer);
        for j in 0..40u64 {
            let parts = random_parts_f64(cfg, "energy-forward", d, j);
            running = running.max(energy_sum_f64(&parts, &omf, &sdf) / normalizer);
        }
        series.push((d, running));
    }
    let mut report = series_report(cfg, "energy-forward", series, vec![]);
    let values: Vec<f64> = report.per_depth.iter().map(|p| p.value).collect();
    let spread = values.last().unwrap() / values.first().unwrap().max(1e-300);
    report.pass = spread <= cfg.tol_spread && values.iter().all(|v| v.is_finite());
    report.witnesses.push(format!("running-sup spread {spread:.4}"));
    finish(report, t0, cfg)
}

/// Running sup of backward energy sums for the atomic pair: bounded is the
/// expected outcome. 1000 random decompositions spread across the depth
/// series, plus tree-child decompositions at every level that still carries
/// more than one atom per part.
pub fn check_energy_backward_dot(cfg: &RunConfig, cache: &mut MeasureCache) -> CheckReport {
    let t0 = Instant::now();
    let sd = cache.sigma_dot(cfg.n_param, cfg.sigma_gens).clone();
    let om = cache.omega(cfg.n_param, cfg.depth).clone();
    let sdf = MeasureF64::from(&sd);
    let omf = MeasureF64::from(&om);
    // |[0,1]|_omega = 1, so decomposition sums are already ratios
    let mut running = 0.0f64;
    let mut series = Vec::new();
    for level in 1..=cfg.sigma_gens.saturating_sub(2).max(1) {
        running = running.max(energy_sum_f64(&tree_parts_f64(cfg.n_param, level), &sdf, &omf));
    }
    let trials_per_depth = 1000 / cfg.depth_series().len().max(1);
    for d in cfg.depth_series() {
        for j in 0..trials_per_depth as u64 {
            let parts = random_parts_f64(cfg, "energy-backward-dot", d, j);
            running = running.max(energy_sum_f64(&parts, &sdf, &omf));
        }
        series.push((d, running));
    }
    let mut report = series_report(cfg, "energy-backward-dot", series, vec![]);
    // the running sup is monotone; the spread limit is the whole content
    let values: Vec<f64> = report.per_depth.iter().map(|p| p.value).collect();
    let spread = values.last().unwrap() / values.first().unwrap().max(1e-300);
    report.pass = spread <= cfg.tol_spread && values.iter().all(|v| v.is_finite());
    report.witnesses.push(format!("running-sup spread {spread:.4}"));
    finish(report, t0, cfg)
}

pub fn check_energy_backward_hat(cfg: &RunConfig, cache: &mut MeasureCache) -> CheckReport {
    let t0 = Instant::now();
    let mut report = blank(cfg, "energy-backward-hat", cfg.depth);
    let sh = cache.sigma_hat(cfg.n_param, cfg.sigma_gens).clone();
    let om = cache.omega(cfg.n_param, cfg.depth).clone();
    let l_max = cfg.sigma_gens.saturating_sub(1).min(cfg.depth.saturating_sub(2));
    let sums = gap_energy_partial_sums(cfg.n_param, l_max, &sh, &om).expect("gap decomposition");
    let f: Vec<f64> = sums.iter().map(to_f64).collect();
    let slope = fitted_slope(&f);
    report.per_depth =
        f.iter().enumerate().map(|(l, v)| DepthPoint { depth: l as u32, value: *v }).collect();
    let increments: Vec<f64> = f.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = increments.iter().sum::<f64>() / increments.len().max(1) as f64;
    let within = increments
        .iter()
        .all(|d| *d > mean / cfg.tol_hat_increment_factor && *d < mean * cfg.tol_hat_increment_factor);
    report.pass = slope > 0.0 && within && !increments.is_empty();
    report.value = slope;
    report.bound_proxy = cfg.tol_hat_increment_factor;
    report.witnesses.push(format!(
        "per-level increments {:?}",
        increments.iter().map(|d| (d * 1e6).round() / 1e6).collect::<Vec<_>>()
    ));
    report.witnesses.push("divergence witness: affine partial-sum growth".into());
    finish(report, t0, cfg)
}

pub fn check_reversal(cfg: &RunConfig, _cache: &mut MeasureCache) -> CheckReport {
    let t0 = Instant::now();
    let mut report = blank(cfg, "reversal", cfg.depth);
    let mut pass = true;
    let mut c0s = Vec::new();
    for (idx, inst) in twoweight::reversal::random_hilbert_instances(20, cfg.seed).iter().enumerate() {
        match twoweight::reversal::energy_reversal_check(inst) {
            Ok(chk) => match chk.c0 {
                Some(c) if c.is_finite() && c > 0.0 => c0s.push(c),
                _ => {
                    if !chk.lhs.is_zero() {
                        pass = false;
                        report.witnesses.push(format!("instance {idx}: degenerate rhs"));
                    }
                }
            },
            Err(e) => {
                pass = false;
                report.witnesses.push(format!("instance {idx}: {e}"));
            }
        }
    }
    let spread = if c0s.is_empty() {
        f64::INFINITY
    } else {
        c0s.iter().cloned().fold(f64::MIN, f64::max) / c0s.iter().cloned().fold(f64::MAX, f64::min)
    };
    if spread > cfg.tol_spread {
        pass = false;
        report.witnesses.push(format!("plain-kernel constant spread {spread:.3} exceeds limit"));
    }
    match twoweight::reversal::build_reversal_failure_witness(cfg.n_param, cfg.rho.clone()) {
        Ok(inst) => match twoweight::reversal::energy_reversal_check(&inst) {
            Ok(chk) if chk.reversal_failed => {
                report.witnesses.push(format!(
                    "flat-spot witness: lhs = {} > 0, rhs exactly 0 (J = {}, gamma = {})",
                    to_f64(&chk.lhs),
                    inst.j,
                    format_rat(&inst.gamma)
                ));
            }
            Ok(_) => {
                pass = false;
                report.witnesses.push("flat-spot witness failed to break the reversal".into());
            }
            Err(e) => {
                pass = false;
                report.witnesses.push(format!("witness check error: {e}"));
            }
        },
        Err(e) => {
            pass = false;
            report.witnesses.push(format!("witness construction failed: {e}"));
        }
    }
    report.pass = pass;
    report.value = spread;
    report.bound_proxy = cfg.tol_spread;
    finish(report, t0, cfg)
}

pub fn run_named_check(cfg: &RunConfig, cache: &mut MeasureCache, name: &str) -> Option<Vec<CheckReport>> {
    let reports = match name {
        "build-measures" => vec![check_build_measures(cfg, cache)],
        "verify-replication" => vec![check_verify_replication(cfg, cache)],
        "verify-eta" => vec![check_verify_eta(cfg, cache)],
        "certify-flatness" => vec![check_certify_flatness(cfg, cache)],
        "a2-scan" => vec![check_a2_scan(cfg, cache)],
        "test-forward" => vec![check_test_forward(cfg, cache)],
        "test-backward" => vec![check_test_backward(cfg, cache)],
        "wbp-scan" => vec![check_wbp_scan(cfg, cache)],
        "maximal-testing" => vec![check_maximal_testing(cfg, cache)],
        "energy-forward" => vec![check_energy_forward(cfg, cache)],
        "energy-backward" => {
            vec![check_energy_backward_dot(cfg, cache), check_energy_backward_hat(cfg, cache)]
        }
        "energy-backward-dot" => vec![check_energy_backward_dot(cfg, cache)],
        "energy-backward-hat" => vec![check_energy_backward_hat(cfg, cache)],
        "reversal" => vec![check_reversal(cfg, cache)],
        _ => return None,
    };
    Some(reports)
}

/// Runs the full battery. Checks run sequentially by default (one shared
/// measure cache keeps memory bounded); with `parallel` enabled they run
/// concurrently, each with its own cache. Exit semantics: pass means every
/// expected-pass check passed and every expected-fail check exhibited its
/// witness (divergence slope, reversal failure).
pub fn run_battery(cfg: &RunConfig) -> BatteryOutcome {
    let reports: Vec<CheckReport> = if cfg.parallel && cfg!(feature = "parallel") {
        let batches = twoweight::exec::map_collect(
            twoweight::ExecMode::Parallel,
            &BATTERY_ORDER,
            |name| {
                let mut cache = MeasureCache::default();
                run_named_check(cfg, &mut cache, name).expect("known check name")
            },
        );
        batches.into_iter().flatten().collect()
    } else {
        let mut cache = MeasureCache::default();
        let mut reports = Vec::new();
        for name in BATTERY_ORDER {
            reports.extend(run_named_check(cfg, &mut cache, name).expect("known check name"));
        }
        reports
    };
    let all_pass = reports.iter().all(|r| r.pass);
    BatteryOutcome { reports, warnings: vec![], all_pass }
}
