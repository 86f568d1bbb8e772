use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use cr_spectra::{FactorSpec, RuleDescriptor};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Parser, Debug)]
#[command(name = "cr-spectra", version, about = "Sub-Laplacian spectra on the CR sphere")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Eigenvalues, clusters and the scale-invariant functional for one factor.
    Spectrum(Args),
    /// Checks `λ₁·V^{1/(n+1)} ≤ 2n·V(θ₀)^{1/(n+1)}` over a family of factors.
    Verify(Args),
    /// Balances the measure `f^{n+1}ψ₀` by a CR automorphism.
    Balance(Args),
    /// Batch checks of the automorphism identities.
    CheckIdentities(Args),
}

impl Command {
    pub fn args(&self) -> &Args {
        match self {
            Self::Spectrum(a) | Self::Verify(a) | Self::Balance(a) | Self::CheckIdentities(a) => a,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Spectrum(_) => "spectrum",
            Self::Verify(_) => "verify",
            Self::Balance(_) => "balance",
            Self::CheckIdentities(_) => "check-identities",
        }
    }
}

#[derive(clap::Args, Debug, Default)]
pub struct Args {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Maximal total degree of the polynomial basis.
    #[arg(long)]
    pub degree: Option<u32>,
    #[arg(long, value_enum)]
    pub rule: Option<RuleKind>,
    /// Gauss–Legendre order of the product rule.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub mc_samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `constant`, `constant:C`, `extremal:T`, `extremal:T:S` or a JSON object.
    #[arg(long)]
    pub factor: Option<String>,
    /// Comma-separated dilation parameters (verify: extremal family).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub t_grid: Option<Vec<f64>>,
    /// Comma-separated ε values (verify: random exp(ε·g) family).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub eps_grid: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    /// Random factors per ε (verify) or random samples (check-identities).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Admissible negative margin as a fraction of the bound.
    #[arg(long, allow_negative_numbers = true)]
    pub allowance: Option<f64>,
    /// Largest dilation parameter sampled by check-identities.
    #[arg(long, allow_negative_numbers = true)]
    pub t_max: Option<f64>,
    /// Number of eigenvalues reported by spectrum (default: all).
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Product,
    Montecarlo,
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Single,
    Extremal,
    ExpPoly,
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct RuleFile {
    kind: RuleKind,
    m: Option<usize>,
    samples: Option<usize>,
    seed: Option<u64>,
}

#[derive(Deserialize, Debug)]
#[serde(untagged)]
enum FactorFile {
    Text(String),
    Spec(FactorSpec),
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    command: Option<String>,
    n: Option<usize>,
    degree: Option<u32>,
    rule: Option<RuleFile>,
    seed: Option<u64>,
    factor: Option<FactorFile>,
    family: Option<Family>,
    t_grid: Option<Vec<f64>>,
    eps_grid: Option<Vec<f64>>,
    samples: Option<usize>,
    allowance: Option<f64>,
    t_max: Option<f64>,
    count: Option<usize>,
    format: Option<Format>,
}

/// Fully resolved settings; embedded verbatim in every output.
#[derive(Serialize, Debug, Clone)]
pub struct RunConfig {
    pub command: String,
    pub n: usize,
    pub degree: u32,
    pub rule: RuleDescriptor,
    pub seed: u64,
    pub factor: FactorSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_grid: Option<Vec<f64>>,
    pub samples: usize,
    pub allowance: f64,
    pub t_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

const DEFAULT_MC_SAMPLES: usize = 200_000;

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn check_grid(name: &str, grid: &Option<Vec<f64>>) -> Result<(), CliError> {
    match grid {
        Some(g) if g.is_empty() => Err(config_err(format!("{name} is empty"))),
        Some(g) if g.iter().any(|v| !v.is_finite()) => {
            Err(config_err(format!("{name} contains a non-finite value")))
        }
        _ => Ok(()),
    }
}

impl RunConfig {
    pub fn resolve(command: &Command) -> Result<Self, CliError> {
        let args = command.args();
        let file: ConfigFile = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str(&text).map_err(|e| config_err(format!("malformed config: {e}")))?
            }
            None => ConfigFile::default(),
        };
        if let Some(c) = &file.command {
            if c != command.name() {
                return Err(config_err(format!(
                    "config is for command {c:?}, not {:?}",
                    command.name()
                )));
            }
        }

        let n = args.n.or(file.n).unwrap_or(1);
        if n < 1 {
            return Err(config_err("n must be at least 1"));
        }
        let degree = args.degree.or(file.degree).unwrap_or(4);
        if degree < 1 {
            return Err(config_err("degree must be at least 1"));
        }
        let seed = args.seed.or(file.seed).unwrap_or(0);

        let file_rule = file.rule.as_ref();
        let kind = args
            .rule
            .or(file_rule.map(|r| r.kind))
            .unwrap_or(if n == 1 { RuleKind::Product } else { RuleKind::Montecarlo });
        let rule = match kind {
            RuleKind::Product => {
                if n != 1 {
                    return Err(config_err("the product rule is only available for n = 1"));
                }
                let default_m = match command {
                    Command::Balance(_) | Command::CheckIdentities(_) => 24,
                    _ => 2 * degree as usize + 6,
                };
                let m = args.m.or(file_rule.and_then(|r| r.m)).unwrap_or(default_m);
                if m < 2 {
                    return Err(config_err("m must be at least 2"));
                }
                RuleDescriptor::Product { m }
            }
            RuleKind::Montecarlo => {
                let samples = args
                    .mc_samples
                    .or(file_rule.and_then(|r| r.samples))
                    .unwrap_or(DEFAULT_MC_SAMPLES);
                if samples < 1000 {
                    return Err(config_err("mc-samples must be at least 1000"));
                }
                RuleDescriptor::MonteCarlo {
                    samples,
                    seed: args.seed.or(file_rule.and_then(|r| r.seed)).unwrap_or(seed),
                }
            }
        };

        let factor = match (&args.factor, file.factor) {
            (Some(text), _) => FactorSpec::parse(text).map_err(|e| config_err(e.to_string()))?,
            (None, Some(FactorFile::Text(text))) => {
                FactorSpec::parse(&text).map_err(|e| config_err(e.to_string()))?
            }
            (None, Some(FactorFile::Spec(spec))) => spec,
            (None, None) => FactorSpec::Constant { c: 1.0 },
        };

        let t_grid = args.t_grid.clone().or(file.t_grid);
        let eps_grid = args.eps_grid.clone().or(file.eps_grid);
        check_grid("t-grid", &t_grid)?;
        check_grid("eps-grid", &eps_grid)?;
        if t_grid.iter().flatten().any(|t| *t < 0.0) {
            return Err(config_err("t-grid values must be ≥ 0"));
        }

        let family = match command {
            Command::Verify(_) => Some(args.family.or(file.family).unwrap_or(if t_grid.is_some() {
                Family::Extremal
            } else if eps_grid.is_some() {
                Family::ExpPoly
            } else {
                Family::Single
            })),
            _ => None,
        };
        match family {
            Some(Family::Extremal) if t_grid.is_none() => {
                return Err(config_err("extremal family needs --t-grid"))
            }
            Some(Family::ExpPoly) if eps_grid.is_none() => {
                return Err(config_err("exp-poly family needs --eps-grid"))
            }
            _ => {}
        }

        let default_samples = match command {
            Command::CheckIdentities(_) => 100,
            _ => 20,
        };
        let samples = args.samples.or(file.samples).unwrap_or(default_samples);
        if samples < 1 {
            return Err(config_err("samples must be at least 1"));
        }
        let allowance = args.allowance.or(file.allowance).unwrap_or(1e-3);
        if !(allowance.is_finite() && allowance >= 0.0) {
            return Err(config_err("allowance must be finite and ≥ 0"));
        }
        let t_max = args.t_max.or(file.t_max).unwrap_or(2.0);
        if !(t_max.is_finite() && t_max >= 0.0) {
            return Err(config_err("t-max must be finite and ≥ 0"));
        }
        let count = args.count.or(file.count);
        let format = args.format.or(file.format).unwrap_or_default();

        Ok(Self {
            command: command.name().to_string(),
            n,
            degree,
            rule,
            seed,
            factor,
            family,
            t_grid,
            eps_grid,
            samples,
            allowance,
            t_max,
            count,
            format,
            out: args.out.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(argv: &[&str]) -> Result<RunConfig, CliError> {
        let mut full = vec!["cr-spectra"];
        full.extend_from_slice(argv);
        RunConfig::resolve(&Cli::try_parse_from(full).unwrap().command)
    }

    #[test]
    fn defaults_depend_on_command() {
        let s = resolve(&["spectrum"]).unwrap();
        assert_eq!((s.n, s.degree), (1, 4));
        assert_eq!(s.rule, RuleDescriptor::Product { m: 14 });
        assert_eq!(s.factor, FactorSpec::Constant { c: 1.0 });
        assert!(s.family.is_none());

        let b = resolve(&["balance"]).unwrap();
        assert_eq!(b.rule, RuleDescriptor::Product { m: 24 });

        let c = resolve(&["check-identities", "--n", "3", "--seed", "4"]).unwrap();
        assert_eq!(c.samples, 100);
        assert_eq!(c.rule, RuleDescriptor::MonteCarlo { samples: DEFAULT_MC_SAMPLES, seed: 4 });
    }

    #[test]
    fn family_inference() {
        let v = resolve(&["verify", "--t-grid", "0,0.5"]).unwrap();
        assert_eq!(v.family, Some(Family::Extremal));
        assert_eq!(v.t_grid, Some(vec![0.0, 0.5]));
        let v = resolve(&["verify", "--eps-grid", "0.1"]).unwrap();
        assert_eq!(v.family, Some(Family::ExpPoly));
        let v = resolve(&["verify"]).unwrap();
        assert_eq!(v.family, Some(Family::Single));
        assert!(resolve(&["verify", "--family", "exp-poly"]).is_err());
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for argv in [
            &["spectrum", "--t-grid", "-1"][..],
            &["spectrum", "--allowance", "-0.1"],
            &["spectrum", "--t-max", "inf"],
            &["spectrum", "--m", "1"],
            &["check-identities", "--samples", "0"],
        ] {
            assert!(matches!(resolve(argv), Err(CliError::Config(_))), "{argv:?}");
        }
    }

    #[test]
    fn output_path_is_not_embedded() {
        let c = resolve(&["spectrum", "--out", "/tmp/x.json"]).unwrap();
        let v = serde_json::to_value(&c).unwrap();
        assert!(v.get("out").is_none());
        assert_eq!(v["rule"]["kind"], "product");
    }
}
