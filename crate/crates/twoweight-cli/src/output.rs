//! Report and profile emission.

use crate::config::{OutputFormat, RunConfig};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use twoweight::measures::{self, DiscreteMeasure};
use twoweight::rat::{format_rat, parse_rat, to_f64, Rat};
use twoweight::report::CheckReport;
use twoweight::transform;
use twoweight::tree::TreeAddress;
use twoweight::KernelSpec;

pub fn write_reports(cfg: &RunConfig, reports: &[CheckReport]) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(&cfg.out)?;
    let mut written = Vec::new();
    if matches!(cfg.format, OutputFormat::Json | OutputFormat::Both) {
        for r in reports {
            let path = cfg.out.join(format!("{}.json", r.name));
            fs::write(&path, r.to_json())?;
            written.push(path);
        }
        let combined = cfg.out.join("battery.json");
        let all = serde_json::to_string_pretty(reports)?;
        fs::write(&combined, all)?;
        written.push(combined);
    }
    if matches!(cfg.format, OutputFormat::Csv | OutputFormat::Both) {
        for r in reports {
            if r.per_depth.is_empty() {
                continue;
            }
            let path = cfg.out.join(format!("{}.csv", r.name));
            fs::write(&path, r.per_depth_csv())?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Serializes the three canonical measures and a per-level mass table.
pub fn write_measures(cfg: &RunConfig) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(&cfg.out)?;
    let n = cfg.n_param;
    let omega = measures::redistributed_closed_form(n, cfg.depth).expect("depth validated");
    let sd = measures::sigma_dot(n, cfg.sigma_gens).expect("depth validated");
    let sh = measures::sigma_hat(n, cfg.sigma_gens).expect("depth validated");
    let mut written = Vec::new();
    for (name, m) in [("omega_hat", &omega), ("sigma_dot", &sd), ("sigma_hat", &sh)] {
        let path = cfg.out.join(format!("{name}_{}.json", if name == "omega_hat" { cfg.depth } else { cfg.sigma_gens }));
        fs::write(&path, serde_json::to_string_pretty(m)?)?;
        written.push(path);
    }
    // per-level mass table of the redistributed measure
    let path = cfg.out.join("masses.csv");
    let mut f = fs::File::create(&path)?;
    writeln!(f, "level,rank,address,mass")?;
    for level in 0..=cfg.depth.min(6) {
        for addr in TreeAddress::all_at_level(level) {
            writeln!(
                f,
                "{},{},{},{}",
                level,
                addr.rank(),
                addr,
                format_rat(&measures::omega_hat_node_mass(&addr, n))
            )?;
        }
    }
    written.push(path);
    Ok(written)
}

/// Kernel profile CSV: x, K(x), K'(x), region, band.
pub fn kernel_profile_csv(kernel: &KernelSpec, from: f64, to: f64, per_decade: usize) -> String {
    let mut out = String::from("x,k,k_prime,region,band\n");
    let decades = (to / from).log10();
    let total = ((decades * per_decade as f64).ceil() as usize).max(2);
    for i in 0..=total {
        let x = from * 10f64.powf(decades * i as f64 / total as f64);
        let xr = Rat::from_float(x).unwrap();
        let class = kernel.classify(&xr).expect("positive sample");
        let k = kernel.eval_f64(x);
        let kp = kernel.eval_derivative(&xr).map(|s| s.to_f64()).unwrap_or(f64::NAN);
        out.push_str(&format!(
            "{x:.12e},{k:.12e},{kp:.12e},{},{}\n",
            class.region.label(),
            class.band
        ));
    }
    out
}

/// Evaluates the transform of a serialized measure at a list of points.
pub fn transform_eval_csv(
    kernel: &KernelSpec,
    measure_path: &Path,
    points_path: &Path,
    exclusion: &Rat,
) -> Result<String, String> {
    let text = fs::read_to_string(measure_path).map_err(|e| e.to_string())?;
    let mu: DiscreteMeasure = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let pts = fs::read_to_string(points_path).map_err(|e| e.to_string())?;
    let mut out = String::from("x,value,exact\n");
    for line in pts.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let x = parse_rat(line).ok_or_else(|| format!("bad point {line:?}"))?;
        match transform::apply(kernel, &mu, &x, None, exclusion) {
            Ok(v) => out.push_str(&format!(
                "{},{:.12e},{}\n",
                format_rat(&x),
                v.to_f64(),
                v.is_exact()
            )),
            Err(e) => out.push_str(&format!("{},error:{e},false\n", format_rat(&x))),
        }
    }
    Ok(out)
}

/// Replayable serialization of the flat-spot reversal-failure witness.
pub fn write_reversal_witness(cfg: &RunConfig) -> std::io::Result<Option<PathBuf>> {
    let inst = match twoweight::reversal::build_reversal_failure_witness(cfg.n_param, cfg.rho.clone()) {
        Ok(i) => i,
        Err(_) => return Ok(None), // unsafe parameters: nothing to serialize
    };
    fs::create_dir_all(&cfg.out)?;
    let doc = serde_json::json!({
        "kernel": { "N": inst.kernel.n, "rho": format_rat(&inst.kernel.rho), "kind": "flattened" },
        "gamma": format_rat(&inst.gamma),
        "j": { "left": format_rat(&inst.j.left), "right": format_rat(&inst.j.right) },
        "omega": inst.omega,
        "mu": inst.mu,
    });
    let path = cfg.out.join("reversal_witness.json");
    fs::write(&path, serde_json::to_string_pretty(&doc)?)?;
    Ok(Some(path))
}

/// Per-depth energy-sum series for external plotting, plus the kernel profile
/// and mass tables.
pub fn emit_profile(cfg: &RunConfig) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(&cfg.out)?;
    let mut written = write_measures(cfg)?;
    let kernel = cfg.kernel();
    let profile = kernel_profile_csv(&kernel, 1e-4, 1e2, 200);
    let path = cfg.out.join("kernel.csv");
    fs::write(&path, profile)?;
    written.push(path);

    let sh = measures::sigma_hat(cfg.n_param, cfg.sigma_gens).expect("depth validated");
    let om = measures::redistributed_closed_form(cfg.n_param, cfg.depth).expect("depth validated");
    let l_max = cfg.sigma_gens.saturating_sub(1).min(cfg.depth.saturating_sub(2));
    let sums = twoweight::functionals::gap_energy_partial_sums(cfg.n_param, l_max, &sh, &om)
        .expect("gap decomposition");
    let path = cfg.out.join("energy_backward_hat.csv");
    let mut f = fs::File::create(&path)?;
    writeln!(f, "level,partial_sum")?;
    for (l, s) in sums.iter().enumerate() {
        writeln!(f, "{l},{:.12e}", to_f64(s))?;
    }
    written.push(path);
    Ok(written)
}
