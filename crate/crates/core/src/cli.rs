//! Command-line frontend.
//!
//! Exit codes: `0` success (or certified), `1` valid but not certified
//! (`certify` only), `2` any input or configuration error. Results go to
//! stdout or `--output`; diagnostics go to stderr.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::channel::{derive_capacities, ChannelSpec, LinkCapacities};
use crate::cutset::solve_bound;
use crate::error::{Error, Result};
use crate::experiments::{
    run_sweep, write_csv, write_summary, Conditioning, GainDistribution, NoiseProfile,
    PowerBudget, SweepConfig,
};
use crate::optimality::certify_capacities;
use crate::sr_rate::sr_rate_min_form;

pub const EXIT_OK: u8 = 0;
pub const EXIT_UNCERTIFIED: u8 = 1;
pub const EXIT_INPUT: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "diamond-relay",
    version,
    about = "Successive-relaying rates and cut-set bounds for the half-duplex diamond relay channel"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Link capacities and the successive-relaying rate.
    Analyze(InstanceArgs),
    /// Half-duplex cut-set bound and its time-sharing vector.
    Bound(InstanceArgs),
    /// Checks whether successive relaying reaches the bound.
    Certify(InstanceArgs),
    /// Seeded Monte Carlo sweep over random instances.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    /// Path to a JSON instance, `-` for stdin, or the JSON text itself.
    /// Either a channel spec (gains, noises, powers) or capacities
    /// `{c01, c02, c13, c23}` with optional `c012`, `c123`.
    #[arg(long, short)]
    pub input: String,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConditioningArg {
    Unconditioned,
    ForceProductEqual,
    ForceCorollary43,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistributionArg {
    Exponential,
    LogUniform,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// JSON sweep configuration (path, `-` or inline); replaces the flags below.
    #[arg(long, short)]
    pub input: Option<String>,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ConditioningArg::Unconditioned)]
    pub conditioning: ConditioningArg,
    #[arg(long, value_enum, default_value_t = DistributionArg::Exponential)]
    pub distribution: DistributionArg,
    /// Lower gain for `log-uniform`.
    #[arg(long, default_value_t = 0.1)]
    pub lo: f64,
    /// Upper gain for `log-uniform`.
    #[arg(long, default_value_t = 10.0)]
    pub hi: f64,
    /// Power budgets `p_s,p_r1,p_r2`.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [1.0, 1.0, 1.0])]
    pub power: Vec<f64>,
    /// Noise variances `sigma1_sq,sigma2_sq,sigma3_sq`.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [1.0, 1.0, 1.0])]
    pub noise: Vec<f64>,
    /// Record output (CSV or JSON); stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Summary JSON file. Defaults to `<output>.summary.json`, or stderr
    /// when records go to stdout.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

/// A parsed instance, in gain space or capacity space.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Gains(ChannelSpec),
    Capacities(LinkCapacities),
}

impl Instance {
    pub fn capacities(&self) -> Result<LinkCapacities> {
        match self {
            Instance::Gains(spec) => derive_capacities(spec),
            Instance::Capacities(caps) => Ok(*caps),
        }
    }
}

const SPEC_FIELDS: [&str; 10] = [
    "g01", "g02", "g13", "g23", "sigma1_sq", "sigma2_sq", "sigma3_sq", "p_s", "p_r1", "p_r2",
];
const LINK_FIELDS: [&str; 4] = ["c01", "c02", "c13", "c23"];
const CUT_FIELDS: [&str; 2] = ["c012", "c123"];

fn field_number(obj: &Map<String, Value>, field: &'static str) -> Result<Option<f64>> {
    match obj.get(field) {
        None => Ok(None),
        Some(v) => v
            .as_f64()
            .map(Some)
            .ok_or_else(|| Error::domain(field, format!("expected a number, got {v}"))),
    }
}

fn required(obj: &Map<String, Value>, field: &'static str) -> Result<f64> {
    field_number(obj, field)?.ok_or_else(|| Error::domain(field, "missing field"))
}

fn check_keys(obj: &Map<String, Value>, allowed: &[&str]) -> Result<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(Error::Config(format!("unknown field `{k}`"))),
        None => Ok(()),
    }
}

/// Parses an instance from JSON text. Every error names the field at fault.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| Error::Config(format!("malformed JSON: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Config("instance must be a JSON object".into()))?;
    let capacity_space = obj
        .keys()
        .any(|k| LINK_FIELDS.contains(&k.as_str()) || CUT_FIELDS.contains(&k.as_str()));
    if capacity_space {
        let allowed: Vec<&str> = LINK_FIELDS.iter().chain(&CUT_FIELDS).copied().collect();
        check_keys(obj, &allowed)?;
        let [c01, c02, c13, c23] = [
            required(obj, "c01")?,
            required(obj, "c02")?,
            required(obj, "c13")?,
            required(obj, "c23")?,
        ];
        let mut caps = LinkCapacities::from_links(c01, c02, c13, c23)?;
        if let Some(c012) = field_number(obj, "c012")? {
            caps.c012 = c012;
        }
        if let Some(c123) = field_number(obj, "c123")? {
            caps.c123 = c123;
        }
        caps.validate()?;
        Ok(Instance::Capacities(caps))
    } else {
        check_keys(obj, &SPEC_FIELDS)?;
        let mut vals = [0.0; 10];
        for (slot, field) in vals.iter_mut().zip(SPEC_FIELDS) {
            *slot = required(obj, field)?;
        }
        let [g01, g02, g13, g23, sigma1_sq, sigma2_sq, sigma3_sq, p_s, p_r1, p_r2] = vals;
        let spec = ChannelSpec {
            g01,
            g02,
            g13,
            g23,
            sigma1_sq,
            sigma2_sq,
            sigma3_sq,
            p_s,
            p_r1,
            p_r2,
        };
        spec.validate()?;
        Ok(Instance::Gains(spec))
    }
}

/// Reads `source` as a path, `-` for stdin, or inline JSON.
fn read_source(source: &str) -> Result<String> {
    let trimmed = source.trim_start();
    if trimmed.starts_with('{') {
        return Ok(source.to_owned());
    }
    let mut text = String::new();
    if source == "-" {
        io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Error::Config(format!("reading stdin: {e}")))?;
    } else {
        text = std::fs::read_to_string(source)
            .map_err(|e| Error::Config(format!("reading {source}: {e}")))?;
    }
    Ok(text)
}

fn open_output<'a>(
    path: &Option<PathBuf>,
    stdout: &'a mut dyn Write,
) -> Result<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::Config(format!("creating {}: {e}", p.display())))?,
        )),
        None => Box::new(stdout),
    })
}

fn emit_json<S: Serialize>(value: &S, out: &mut dyn Write) -> Result<()> {
    let write_err = |e: String| Error::Config(format!("writing output: {e}"));
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| write_err(e.to_string()))?;
    writeln!(out).map_err(|e| write_err(e.to_string()))?;
    out.flush().map_err(|e| write_err(e.to_string()))
}

#[derive(Serialize)]
struct AnalyzeOutput<'a> {
    capacities: &'a LinkCapacities,
    sr_rate: &'a crate::sr_rate::SrRateResult,
}

fn instance_caps(args: &InstanceArgs) -> Result<LinkCapacities> {
    if args.format != Format::Json {
        return Err(Error::Config(
            "csv output is only available for the sweep subcommand".into(),
        ));
    }
    parse_instance(&read_source(&args.input)?)?.capacities()
}

fn analyze(args: &InstanceArgs, stdout: &mut dyn Write) -> Result<u8> {
    let caps = instance_caps(args)?;
    let rate = sr_rate_min_form(&caps);
    let mut out = open_output(&args.output, stdout)?;
    emit_json(
        &AnalyzeOutput {
            capacities: &caps,
            sr_rate: &rate,
        },
        &mut out,
    )?;
    Ok(EXIT_OK)
}

fn bound(args: &InstanceArgs, stdout: &mut dyn Write) -> Result<u8> {
    let caps = instance_caps(args)?;
    let solution = solve_bound(&caps);
    emit_json(&solution, &mut open_output(&args.output, stdout)?)?;
    Ok(EXIT_OK)
}

fn certify(args: &InstanceArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<u8> {
    let caps = instance_caps(args)?;
    let report = certify_capacities(&caps)?;
    if let Some(w) = &report.hypothesis_warning {
        let _ = writeln!(stderr, "warning: {w}");
    }
    emit_json(&report, &mut open_output(&args.output, stdout)?)?;
    Ok(if report.capacity_certified {
        EXIT_OK
    } else {
        EXIT_UNCERTIFIED
    })
}

fn sweep_config(args: &SweepArgs) -> Result<SweepConfig> {
    if let Some(src) = &args.input {
        let cfg: SweepConfig = serde_json::from_str(&read_source(src)?)
            .map_err(|e| Error::Config(format!("sweep config: {e}")))?;
        cfg.validate()?;
        return Ok(cfg);
    }
    let gain_distribution = match args.distribution {
        DistributionArg::Exponential => GainDistribution::ExponentialUnitMean,
        DistributionArg::LogUniform => GainDistribution::LogUniform {
            lo: args.lo,
            hi: args.hi,
        },
    };
    let conditioning = match args.conditioning {
        ConditioningArg::Unconditioned => Conditioning::Unconditioned,
        ConditioningArg::ForceProductEqual => Conditioning::ForceProductEqual,
        ConditioningArg::ForceCorollary43 => Conditioning::ForceCorollary43,
    };
    let triple = |v: &[f64], name: &str| -> Result<[f64; 3]> {
        <[f64; 3]>::try_from(v).map_err(|_| Error::Config(format!("--{name} needs three values")))
    };
    let [p_s, p_r1, p_r2] = triple(&args.power, "power")?;
    let [sigma1_sq, sigma2_sq, sigma3_sq] = triple(&args.noise, "noise")?;
    let cfg = SweepConfig {
        n_samples: args.n,
        seed: args.seed,
        gain_distribution,
        power_budget: PowerBudget { p_s, p_r1, p_r2 },
        noise: NoiseProfile {
            sigma1_sq,
            sigma2_sq,
            sigma3_sq,
        },
        conditioning,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn summary_path(output: &Path) -> PathBuf {
    let mut name = output
        .file_stem()
        .map(|s| s.to_os_string())
        .unwrap_or_default();
    name.push(".summary.json");
    output.with_file_name(name)
}

fn sweep(args: &SweepArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<u8> {
    let cfg = sweep_config(args)?;
    let result = run_sweep(&cfg)?;
    match args.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Full<'a> {
                summary: &'a crate::experiments::SweepSummary,
                records: &'a [crate::experiments::SweepRecord],
            }
            let full = Full {
                summary: &result.summary,
                records: &result.records,
            };
            emit_json(&full, &mut open_output(&args.output, stdout)?)?;
        }
        Format::Csv => {
            write_csv(&result.records, open_output(&args.output, stdout)?)?;
            let target = args
                .summary
                .clone()
                .or_else(|| args.output.as_deref().map(summary_path));
            match target {
                Some(path) => write_summary(&result.summary, open_output(&Some(path), stdout)?)?,
                None => write_summary(&result.summary, &mut *stderr)?,
            }
        }
    }
    let s = &result.summary;
    let _ = writeln!(
        stderr,
        "sweep: {} samples, certification rate {:.4}, gap in [{:.3e}, {:.3e}]",
        s.n_samples, s.certification_rate, s.min_gap, s.max_gap
    );
    Ok(EXIT_OK)
}

/// Runs a parsed command; returns the process exit code.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8 {
    let outcome = match &cli.command {
        Command::Analyze(a) => analyze(a, stdout),
        Command::Bound(a) => bound(a, stdout),
        Command::Certify(a) => certify(a, stdout, stderr),
        Command::Sweep(a) => sweep(a, stdout, stderr),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_INPUT
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_json(g: [f64; 4]) -> String {
        serde_json::to_string(&ChannelSpec::<f64>::unit(g[0], g[1], g[2], g[3])).unwrap()
    }

    #[test]
    fn parses_gain_space() {
        let inst = parse_instance(&unit_json([3.0, 7.0, 7.0, 3.0])).unwrap();
        let caps = inst.capacities().unwrap();
        assert!((caps.c02 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn parses_capacity_space_with_defaults() {
        let inst = parse_instance(r#"{"c01": 2, "c02": 3, "c13": 3, "c23": 2}"#).unwrap();
        let caps = inst.capacities().unwrap();
        assert_eq!(caps, LinkCapacities::from_links(2.0, 3.0, 3.0, 2.0).unwrap());
        let inst =
            parse_instance(r#"{"c01": 2, "c02": 3, "c13": 3, "c23": 2, "c012": 3, "c123": 4}"#)
                .unwrap();
        assert_eq!(inst.capacities().unwrap().c123, 4.0);
    }

    #[test]
    fn errors_name_the_field() {
        let bad = unit_json([-1.0, 1.0, 1.0, 1.0]);
        let msg = parse_instance(&bad).unwrap_err().to_string();
        assert!(msg.contains("g01"), "{msg}");

        let msg = parse_instance(r#"{"g01": "x"}"#).unwrap_err().to_string();
        assert!(msg.contains("g01"), "{msg}");

        let msg = parse_instance("{}").unwrap_err().to_string();
        assert!(msg.contains("g01"), "{msg}");

        let msg = parse_instance(r#"{"c01": 1, "c02": 1, "c13": 1}"#).unwrap_err().to_string();
        assert!(msg.contains("c23"), "{msg}");

        let msg = parse_instance(r#"{"c01": 1, "c02": 1, "c13": 1, "c23": 1, "g01": 1}"#)
            .unwrap_err()
            .to_string();
        assert!(msg.contains("g01"), "{msg}");
    }

    #[test]
    fn summary_path_sits_next_to_output() {
        assert_eq!(
            summary_path(Path::new("/tmp/out/run.csv")),
            PathBuf::from("/tmp/out/run.summary.json")
        );
    }
}
