//! Command-line surface and parsing of the compound flag values.

use std::path::PathBuf;

use anyhow::{bail, Context};
use asymqkd_core::distill::{DistillParams, StoppingRule};
use asymqkd_core::sim::{eve_intercept_resend, CheckSplit, EveModel};
use asymqkd_core::threshold::{ChannelFamily, ProtocolVariant};
use asymqkd_core::{Basis, PauliRates};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "asymqkd",
    version,
    about = "QKD key rates, thresholds and simulations over asymmetric Pauli channels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One-way and one-B-step key rates of a single channel.
    Rates(RatesArgs),
    /// Total-noise threshold of one protocol along a channel ray.
    Threshold(ThresholdArgs),
    /// Thresholds of the Y-basis and Chau protocols against q_y0 / q_x0.
    SweepFig1(Fig1Args),
    /// One-B-step rate R against r' as the total noise grows.
    SweepFig2(Fig2Args),
    /// Monte Carlo run of the protocol.
    Simulate(SimulateArgs),
}

/// A channel, either as error rates or as a point on a `q_x = q_z` family.
#[derive(Debug, Clone, Args)]
pub struct ChannelArgs {
    #[arg(long, default_value_t = 0.0)]
    pub qx: f64,
    #[arg(long, default_value_t = 0.0)]
    pub qy: f64,
    #[arg(long, default_value_t = 0.0)]
    pub qz: f64,
    /// q_y0 / q_x0 with q_x0 = q_z0; use together with --scale.
    #[arg(long, conflicts_with_all = ["qx", "qy", "qz"], requires = "scale")]
    pub family_ratio: Option<f64>,
    /// Total noise q_x0 + q_y0 + q_z0 on the --family-ratio ray.
    #[arg(long, requires = "family_ratio")]
    pub scale: Option<f64>,
}

impl ChannelArgs {
    pub fn resolve(&self) -> anyhow::Result<PauliRates> {
        match (self.family_ratio, self.scale) {
            (Some(r), Some(s)) => Ok(ChannelFamily::y_fraction(r)?.rates_at(s)?),
            _ => PauliRates::from_errors(self.qx, self.qy, self.qz).context("invalid channel"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    /// Positive CSS rate after some number of B-steps.
    Positive,
    /// Both residual errors below --target after B-steps and one P-step.
    Residual,
}

#[derive(Debug, Clone, Args)]
pub struct DistillArgs {
    #[arg(long, value_enum, default_value_t = RuleArg::Positive)]
    pub rule: RuleArg,
    /// Residual error goal of the residual rule.
    #[arg(long, default_value_t = 0.05)]
    pub target: f64,
    #[arg(long, default_value_t = 60)]
    pub m_max: usize,
    #[arg(long, default_value_t = 2001)]
    pub k_max: usize,
    /// Bisection tolerance in total-noise units.
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
}

impl DistillArgs {
    pub fn params(&self) -> DistillParams {
        DistillParams {
            rule: match self.rule {
                RuleArg::Positive => StoppingRule::PositiveCssRate,
                RuleArg::Residual => StoppingRule::ResidualTarget,
            },
            target: self.target,
            m_max: self.m_max,
            k_max: self.k_max,
        }
    }

    pub fn describe(&self) -> String {
        format!(
            "rule={} target={} m_max={} k_max={} tol={}",
            self.rule.to_possible_value().unwrap().get_name(),
            self.target,
            self.m_max,
            self.k_max,
            self.tol
        )
    }
}

#[derive(Debug, Args)]
pub struct RatesArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    /// q_y0 / q_x0 on the q_x0 = q_z0 family.
    #[arg(long, conflicts_with_all = ["family", "direction"])]
    pub family_ratio: Option<f64>,
    /// Same as --family-ratio, written `r=<ratio>`.
    #[arg(long, value_parser = parse_family, conflicts_with = "direction")]
    pub family: Option<f64>,
    /// General ray direction `qx,qy,qz`.
    #[arg(long, value_parser = parse_triple)]
    pub direction: Option<[f64; 3]>,
    #[arg(long, value_parser = parse_variant, default_value = "ybasis")]
    pub variant: ProtocolVariant,
    #[command(flatten)]
    pub distill: DistillArgs,
}

impl ThresholdArgs {
    pub fn family(&self) -> anyhow::Result<ChannelFamily> {
        Ok(match (self.family_ratio.or(self.family), self.direction) {
            (Some(r), _) => ChannelFamily::y_fraction(r)?,
            (None, Some(d)) => ChannelFamily::direction(d)?,
            (None, None) => bail!("give --family-ratio, --family r=<ratio> or --direction"),
        })
    }
}

#[derive(Debug, Args)]
pub struct Fig1Args {
    /// Grid of q_y0 / q_x0 values, `lo:hi:step`.
    #[arg(long, value_parser = parse_grid, default_value = "0:1:0.05")]
    pub grid: Grid,
    #[command(flatten)]
    pub distill: DistillArgs,
}

#[derive(Debug, Args)]
pub struct Fig2Args {
    /// Grid of total noise values, `lo:hi:step`.
    #[arg(long, value_parser = parse_grid, default_value = "0:0.4:0.01")]
    pub grid: Grid,
    /// Comma-separated q_y0 values, one curve each.
    #[arg(long, value_delimiter = ',', default_value = "0,0.005,0.01,0.02")]
    pub cases: Vec<f64>,
    /// Emit the crossing points instead of the curves.
    #[arg(long)]
    pub crossings: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimFormat {
    Kv,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Balanced,
    Uniform,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Number of key bits; (6 + delta) n qubits are sent.
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 2.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `none`, `own`, bases such as `zx` (uniform), or weights `z=0.2,x=0.8`.
    #[arg(long, value_parser = parse_eve, default_value = "none")]
    pub eve: EveArg,
    #[arg(long, default_value_t = 1)]
    pub b_rounds: usize,
    /// P-step group size, odd.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 0.05)]
    pub target: f64,
    #[arg(long, default_value_t = 3.0)]
    pub abort_sigma: f64,
    #[arg(long, default_value_t = 0.45)]
    pub abort_ceiling: f64,
    #[arg(long, value_enum, default_value_t = SplitArg::Balanced)]
    pub check_split: SplitArg,
    /// |z| limit of the analytic comparison.
    #[arg(long, default_value_t = 3.0)]
    pub z_max: f64,
    #[arg(long, value_enum, default_value_t = SimFormat::Kv)]
    pub format: SimFormat,
}

/// Inclusive arithmetic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
    pub text: String,
}

impl Grid {
    /// `lo + i step` for `i = 0..=round((hi - lo) / step)`.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step).round() as usize;
        (0..=n).map(|i| self.lo + i as f64 * self.step).collect()
    }
}

pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, step] = parts.as_slice() else {
        return Err("expected lo:hi:step".into());
    };
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) || hi < lo || step <= 0.0 {
        return Err("need finite lo <= hi and step > 0".into());
    }
    if (hi - lo) / step > 1e6 {
        return Err("grid has more than a million points".into());
    }
    Ok(Grid {
        lo,
        hi,
        step,
        text: s.to_string(),
    })
}

fn parse_family(s: &str) -> Result<f64, String> {
    let v = s.strip_prefix("r=").unwrap_or(s);
    v.parse().map_err(|e| format!("`{s}`: {e}"))
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<Result<_, _>>()?;
    v.try_into()
        .map_err(|_| "expected three comma-separated numbers".into())
}

fn parse_variant(s: &str) -> Result<ProtocolVariant, String> {
    s.parse().map_err(|e| format!("{e}"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EveArg {
    pub model: Option<EveModel>,
    pub text: String,
}

fn basis_letter(c: char) -> Result<Basis, String> {
    match c.to_ascii_lowercase() {
        'z' => Ok(Basis::Z),
        'x' => Ok(Basis::X),
        'y' => Ok(Basis::Y),
        _ => Err(format!("unknown basis `{c}`")),
    }
}

pub fn parse_eve(s: &str) -> Result<EveArg, String> {
    let model = match s {
        "none" => None,
        "own" => Some(EveModel::OwnBasis),
        _ if s.contains('=') => {
            let mut bases = Vec::new();
            let mut weights = Vec::new();
            for part in s.split(',') {
                let (b, w) = part
                    .split_once('=')
                    .ok_or(format!("`{part}`: expected basis=weight"))?;
                let mut chars = b.trim().chars();
                let (Some(c), None) = (chars.next(), chars.next()) else {
                    return Err(format!("`{b}`: expected one basis letter"));
                };
                bases.push(basis_letter(c)?);
                weights.push(w.trim().parse::<f64>().map_err(|e| format!("`{w}`: {e}"))?);
            }
            Some(eve_intercept_resend(&bases, &weights).map_err(|e| e.to_string())?)
        }
        _ => {
            let bases: Vec<Basis> = s.chars().map(basis_letter).collect::<Result<_, _>>()?;
            Some(EveModel::uniform(&bases).map_err(|e| e.to_string())?)
        }
    };
    Ok(EveArg {
        model,
        text: s.to_string(),
    })
}

impl SplitArg {
    pub fn split(self) -> CheckSplit {
        match self {
            SplitArg::Balanced => CheckSplit::Balanced,
            SplitArg::Uniform => CheckSplit::Uniform,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = parse_grid("0:1:0.25").unwrap();
        assert_eq!(g.points(), [0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_grid("0:0.95:0.05").unwrap().points().len(), 20);
        assert_eq!(parse_grid("0.3:0.3:0.1").unwrap().points(), [0.3]);
        for bad in ["0:1", "1:0:0.1", "0:1:0", "a:1:0.1", "0:1:-1"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn eve_specs() {
        assert_eq!(parse_eve("none").unwrap().model, None);
        assert_eq!(parse_eve("own").unwrap().model, Some(EveModel::OwnBasis));
        assert_eq!(
            parse_eve("zx").unwrap().model,
            Some(EveModel::InterceptResend {
                weights: [0.5, 0.5, 0.0]
            })
        );
        assert_eq!(
            parse_eve("z=0.25,y=0.75").unwrap().model,
            Some(EveModel::InterceptResend {
                weights: [0.25, 0.0, 0.75]
            })
        );
        for bad in ["q", "zz", "z=0.5", "zx=1", ""] {
            assert!(parse_eve(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn family_forms() {
        assert_eq!(parse_family("r=1").unwrap(), 1.0);
        assert_eq!(parse_family("0.5").unwrap(), 0.5);
        assert!(parse_family("r=").is_err());
        assert_eq!(parse_triple("1, 0,2").unwrap(), [1.0, 0.0, 2.0]);
        assert!(parse_triple("1,2").is_err());
    }
}
