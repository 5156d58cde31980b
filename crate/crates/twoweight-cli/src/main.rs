use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use twoweight_cli::{
    kernel_profile_csv, run_battery, run_named_check, transform_eval_csv, write_measures,
    write_reports, MeasureCache, OutputFormat, RunConfig,
};

#[derive(Parser)]
#[command(name = "twoweight", version, about = "Certification battery for the two-weight flattened-transform construction")]
struct Cli {
    /// Cantor subdivision parameter N
    #[arg(long = "n-param", alias = "n", global = true, default_value_t = 16)]
    n_param: u32,
    /// flattening width parameter rho, a rational like 3/4
    #[arg(long, global = true, default_value = "3/4")]
    rho: String,
    /// stage depth m of the redistributed measure
    #[arg(long, global = true, default_value_t = 8)]
    depth: u32,
    /// truncation generations n of the reweighted measure
    #[arg(long = "sigma-gens", global = true, default_value_t = 6)]
    sigma_gens: u32,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// output directory for reports
    #[arg(long, global = true, default_value = "reports")]
    out: PathBuf,
    /// json | csv | both
    #[arg(long, global = true, default_value = "json")]
    format: String,
    /// permit N < 16 or rho < 2/3 (flat-spot containment not guaranteed)
    #[arg(long = "allow-unsafe-params", global = true, default_value_t = false)]
    allow_unsafe_params: bool,
    /// run scans on all cores
    #[arg(long, global = true, default_value_t = false)]
    parallel: bool,
    /// zero out runtimes so reports are byte-stable across runs
    #[arg(long = "stable-output", global = true, default_value_t = false)]
    stable_output: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the measures and write them with per-level mass tables
    BuildMeasures,
    /// Certify the measure replication identities
    VerifyReplication,
    /// Compare the literal redistribution against the closed form
    VerifyEta,
    /// Certify exact vanishing of the transform at gap centers and on L
    CertifyFlatness,
    /// Scan the Muckenhoupt product over tree and random intervals
    A2Scan,
    /// Forward testing ratio series over truncation depths
    TestForward,
    /// Backward testing ratio series over truncation depths
    TestBackward,
    /// Weak boundedness pair scan series
    WbpScan,
    /// Maximal-function testing series
    MaximalTesting,
    /// Forward energy decomposition sums
    EnergyForward,
    /// Backward energy: bounded atomic case and divergent smeared case
    EnergyBackward,
    /// Energy reversal: plain-kernel constants and the flat-spot witness
    Reversal,
    /// Dump the kernel profile as CSV
    KernelProfile {
        #[arg(long, default_value_t = 1e-4)]
        from: f64,
        #[arg(long, default_value_t = 1e2)]
        to: f64,
        #[arg(long = "per-decade", default_value_t = 200)]
        per_decade: usize,
    },
    /// Evaluate the transform of a serialized measure at listed points
    TransformEval {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        points: PathBuf,
        #[arg(long, default_value = "0")]
        exclusion: String,
        #[arg(long = "kernel", default_value = "flattened")]
        kernel: String,
    },
    /// Run the whole battery in order
    RunAll,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = RunConfig {
        n_param: cli.n_param,
        depth: cli.depth,
        sigma_gens: cli.sigma_gens,
        seed: cli.seed,
        out: cli.out.clone(),
        allow_unsafe_params: cli.allow_unsafe_params,
        parallel: cli.parallel,
        stable_output: cli.stable_output,
        ..RunConfig::default()
    };
    cfg.rho = match RunConfig::parse_rho(&cli.rho) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    cfg.format = match cli.format.parse::<OutputFormat>() {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let warnings = match cfg.validate() {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    for w in &warnings {
        eprintln!("warning: {w}");
    }

    let named = |name: &str| -> ExitCode {
        let mut cache = MeasureCache::default();
        let reports = run_named_check(&cfg, &mut cache, name).expect("known check");
        let mut ok = true;
        for r in &reports {
            println!("{} {}: value {:.6e} (bound {:.3e})", status(r.pass), r.name, r.value, r.bound_proxy);
            ok &= r.pass;
        }
        if let Err(e) = write_reports(&cfg, &reports) {
            eprintln!("error writing reports: {e}");
            return ExitCode::from(2);
        }
        if ok {
            ExitCode::SUCCESS
        } else {
            ExitCode::FAILURE
        }
    };

    match cli.command {
        Command::BuildMeasures => {
            let code = named("build-measures");
            match write_measures(&cfg) {
                Ok(paths) => {
                    for p in paths {
                        println!("wrote {}", p.display());
                    }
                    code
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::VerifyReplication => named("verify-replication"),
        Command::VerifyEta => named("verify-eta"),
        Command::CertifyFlatness => named("certify-flatness"),
        Command::A2Scan => named("a2-scan"),
        Command::TestForward => named("test-forward"),
        Command::TestBackward => named("test-backward"),
        Command::WbpScan => named("wbp-scan"),
        Command::MaximalTesting => named("maximal-testing"),
        Command::EnergyForward => named("energy-forward"),
        Command::EnergyBackward => named("energy-backward"),
        Command::Reversal => {
            let code = named("reversal");
            match twoweight_cli::write_reversal_witness(&cfg) {
                Ok(Some(path)) => println!("wrote {}", path.display()),
                Ok(None) => {}
                Err(e) => eprintln!("error writing witness: {e}"),
            }
            code
        }
        Command::KernelProfile { from, to, per_decade } => {
            let kernel = cfg.kernel();
            let csv = kernel_profile_csv(&kernel, from, to, per_decade);
            std::fs::create_dir_all(&cfg.out).ok();
            let path = cfg.out.join("kernel.csv");
            match std::fs::write(&path, csv) {
                Ok(()) => {
                    println!("wrote {}", path.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::TransformEval { measure, points, exclusion, kernel } => {
            let kernel = match kernel.as_str() {
                "flattened" => cfg.kernel(),
                "hilbert" => twoweight::KernelSpec::hilbert(),
                other => {
                    eprintln!("error: unknown kernel kind {other:?}");
                    return ExitCode::from(2);
                }
            };
            let excl = match twoweight::rat::parse_rat(&exclusion) {
                Some(e) => e,
                None => {
                    eprintln!("error: bad exclusion radius {exclusion:?}");
                    return ExitCode::from(2);
                }
            };
            match transform_eval_csv(&kernel, &measure, &points, &excl) {
                Ok(csv) => {
                    print!("{csv}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::RunAll => {
            let outcome = run_battery(&cfg);
            for r in &outcome.reports {
                println!(
                    "{} {}: value {:.6e} (bound {:.3e}, {} ms)",
                    status(r.pass),
                    r.name,
                    r.value,
                    r.bound_proxy,
                    r.runtime_ms
                );
            }
            if let Err(e) = write_reports(&cfg, &outcome.reports) {
                eprintln!("error writing reports: {e}");
                return ExitCode::from(2);
            }
            if matches!(cfg.format, OutputFormat::Csv | OutputFormat::Both) {
                if let Err(e) = twoweight_cli::emit_profile(&cfg) {
                    eprintln!("error writing profiles: {e}");
                    return ExitCode::from(2);
                }
            }
            println!(
                "{}: {} of {} checks passed",
                if outcome.all_pass { "BATTERY PASS" } else { "BATTERY FAIL" },
                outcome.reports.iter().filter(|r| r.pass).count(),
                outcome.reports.len()
            );
            if outcome.all_pass {
                ExitCode::SUCCESS
            } else {
                let first = outcome.reports.iter().find(|r| !r.pass).map(|r| r.name.clone());
                if let Some(name) = first {
                    eprintln!("first failing check: {name}");
                }
                ExitCode::FAILURE
            }
        }
    }
}

fn status(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}
