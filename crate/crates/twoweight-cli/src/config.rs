//! Run configuration and validation.

use std::path::PathBuf;
use thiserror::Error;
use twoweight::rat::{parse_rat, rat, Rat};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("sigma generations ({n_gens}) must be at least 1 and not exceed the stage depth ({m})")]
    TruncationOrder { n_gens: u32, m: u32 },
    #[error("N = {0} and rho = {1} do not guarantee the flat-spot containment; pass --allow-unsafe-params to proceed")]
    UnsafeParams(u32, String),
    #[error("depth {requested} exceeds the CE_MAX_DEPTH cap {cap}")]
    DepthCap { requested: u32, cap: u32 },
    #[error("bad rational literal: {0}")]
    BadRational(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
    Both,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "both" => Ok(OutputFormat::Both),
            other => Err(format!("unknown format {other:?} (expected json|csv|both)")),
        }
    }
}

/// The battery's check names, in execution order.
pub const BATTERY_ORDER: [&str; 13] = [
    "build-measures",
    "verify-replication",
    "verify-eta",
    "certify-flatness",
    "a2-scan",
    "test-forward",
    "test-backward",
    "wbp-scan",
    "maximal-testing",
    "energy-forward",
    "energy-backward-dot",
    "energy-backward-hat",
    "reversal",
];

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub n_param: u32,
    pub rho: Rat,
    /// omega stage depth m
    pub depth: u32,
    /// sigma truncation generations n
    pub sigma_gens: u32,
    pub seed: u64,
    pub out: PathBuf,
    pub format: OutputFormat,
    pub allow_unsafe_params: bool,
    pub parallel: bool,
    /// relative trend tolerance for testing-type series (last increments)
    pub tol_trend: f64,
    /// max/min spread limit for boundedness proxies
    pub tol_spread: f64,
    /// relative quadrature tolerance
    pub tol_quadrature: f64,
    /// stability tolerance for the Muckenhoupt sup across depths
    pub tol_a2_stability: f64,
    /// gap-sum increments must stay within this factor of their mean
    pub tol_hat_increment_factor: f64,
    /// zero out runtimes for byte-stable report comparison
    pub stable_output: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n_param: 16,
            rho: rat(3, 4),
            depth: 8,
            sigma_gens: 6,
            seed: 1,
            out: PathBuf::from("reports"),
            format: OutputFormat::Json,
            allow_unsafe_params: false,
            parallel: false,
            tol_trend: 0.05,
            tol_spread: 10.0,
            tol_quadrature: 1e-10,
            tol_a2_stability: 0.10,
            tol_hat_increment_factor: 3.0,
            stable_output: false,
        }
    }
}

impl RunConfig {
    pub fn parse_rho(s: &str) -> Result<Rat, ConfigError> {
        parse_rat(s).ok_or_else(|| ConfigError::BadRational(s.to_string()))
    }

    /// Validates and returns any warnings (for example the low-depth notice).
    pub fn validate(&mut self) -> Result<Vec<String>, ConfigError> {
        let mut warnings = Vec::new();
        if self.sigma_gens > self.depth || self.sigma_gens == 0 {
            return Err(ConfigError::TruncationOrder { n_gens: self.sigma_gens, m: self.depth });
        }
        if self.rho <= Rat::from_integer(0.into()) || self.rho >= Rat::from_integer(1.into()) {
            return Err(ConfigError::BadRational(format!(
                "rho = {} must lie strictly inside (0, 1)",
                twoweight::rat::format_rat(&self.rho)
            )));
        }
        let cap = twoweight::measures::max_depth();
        if self.depth + 1 > cap {
            return Err(ConfigError::DepthCap { requested: self.depth + 1, cap });
        }
        let safe = self.n_param >= 16 && self.rho >= rat(2, 3) && self.rho < rat(1, 1);
        if !safe && !self.allow_unsafe_params {
            return Err(ConfigError::UnsafeParams(
                self.n_param,
                twoweight::rat::format_rat(&self.rho),
            ));
        }
        if self.depth < 6 {
            self.tol_trend *= 4.0;
            self.tol_spread *= 2.0;
            warnings.push(format!(
                "low-depth run (m = {}): trend tolerances widened to {:.0}% / spread {:.0}",
                self.depth,
                self.tol_trend * 100.0,
                self.tol_spread
            ));
        }
        Ok(warnings)
    }

    pub fn exec_mode(&self) -> twoweight::ExecMode {
        if self.parallel {
            twoweight::ExecMode::Parallel
        } else {
            twoweight::ExecMode::Sequential
        }
    }

    /// The truncation-depth series for boundedness proxies: 4..=depth (or the
    /// single configured depth when it is below 4).
    pub fn depth_series(&self) -> Vec<u32> {
        if self.depth < 4 {
            vec![self.depth.max(3)]
        } else {
            (4..=self.depth).collect()
        }
    }

    pub fn params_at(&self, depth: u32) -> twoweight::report::ReportParams {
        twoweight::report::ReportParams {
            n: self.n_param,
            rho: twoweight::rat::format_rat(&self.rho),
            n_gens: self.sigma_gens,
            m: self.depth,
            depth,
        }
    }

    pub fn kernel(&self) -> twoweight::KernelSpec {
        twoweight::KernelSpec::flattened(self.n_param, self.rho.clone())
            .expect("validated kernel parameters")
    }
}
