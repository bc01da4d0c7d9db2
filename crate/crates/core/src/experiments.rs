//! Seeded random instances and Monte Carlo sweeps over them.
//!
//! Sample `i` of a sweep with seed `s` is drawn from its own ChaCha20
//! stream: the key comes from `ChaCha20Rng::seed_from_u64(s)` and the stream
//! id is `i`. Samples are therefore independent of how many others are
//! drawn and of the order they are evaluated in.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{derive_capacities, gain_for_capacity, link_capacity, ChannelSpec, LinkCapacities};
use crate::error::{Error, Result};
use crate::optimality::{certify_capacities, LemmaCase, CERTIFY_TOLERANCE};

/// Identity of the generator and stream-splitting rule, echoed in summaries.
pub const RNG_DESCRIPTION: &str =
    "rand_chacha::ChaCha20Rng; key = seed_from_u64(seed); stream = sample index";

/// Bound below which relative gaps are not reported.
pub const RELATIVE_GAP_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GainDistribution {
    /// `|h|^2` of unit-variance Rayleigh fading.
    ExponentialUnitMean,
    /// `exp(U(ln lo, ln hi))`.
    LogUniform { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conditioning {
    Unconditioned,
    /// Forces `c01 c02 = c13 c23` by solving for `g23`.
    ForceProductEqual,
    /// Equal powers with mirrored links `c02 = c13`, `c01 = c23`.
    ForceCorollary43,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerBudget {
    pub p_s: f64,
    pub p_r1: f64,
    pub p_r2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseProfile {
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
    pub sigma3_sq: f64,
}

impl Default for PowerBudget {
    fn default() -> Self {
        PowerBudget {
            p_s: 1.0,
            p_r1: 1.0,
            p_r2: 1.0,
        }
    }
}

impl Default for NoiseProfile {
    fn default() -> Self {
        NoiseProfile {
            sigma1_sq: 1.0,
            sigma2_sq: 1.0,
            sigma3_sq: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub gain_distribution: GainDistribution,
    pub power_budget: PowerBudget,
    pub noise: NoiseProfile,
    pub conditioning: Conditioning,
}

impl SweepConfig {
    pub fn new(n_samples: usize, seed: u64, conditioning: Conditioning) -> Self {
        SweepConfig {
            n_samples,
            seed,
            gain_distribution: GainDistribution::ExponentialUnitMean,
            power_budget: PowerBudget::default(),
            noise: NoiseProfile::default(),
            conditioning,
        }
    }

    fn template(&self) -> ChannelSpec {
        let (p, n) = (self.power_budget, self.noise);
        let p_relay = match self.conditioning {
            Conditioning::ForceCorollary43 => [p.p_s, p.p_s],
            _ => [p.p_r1, p.p_r2],
        };
        ChannelSpec {
            g01: 0.0,
            g02: 0.0,
            g13: 0.0,
            g23: 0.0,
            sigma1_sq: n.sigma1_sq,
            sigma2_sq: n.sigma2_sq,
            sigma3_sq: n.sigma3_sq,
            p_s: p.p_s,
            p_r1: p_relay[0],
            p_r2: p_relay[1],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::Config("n_samples must be >= 1".into()));
        }
        if let GainDistribution::LogUniform { lo, hi } = self.gain_distribution {
            if !(lo > 0.0 && lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Config(format!(
                    "log-uniform bounds need 0 < lo < hi, got lo = {lo}, hi = {hi}"
                )));
            }
        }
        let tpl = self.template();
        tpl.validate()?;
        let positive = |name: &str, p: f64| {
            if p > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be > 0 for conditioned sampling")))
            }
        };
        match self.conditioning {
            Conditioning::Unconditioned => {}
            Conditioning::ForceProductEqual => {
                positive("p_s", tpl.p_s)?;
                positive("p_r1", tpl.p_r1)?;
                positive("p_r2", tpl.p_r2)?;
            }
            Conditioning::ForceCorollary43 => positive("p_s", tpl.p_s)?,
        }
        Ok(())
    }
}

struct GainSampler {
    rng: ChaCha20Rng,
    law: GainDistribution,
}

impl GainSampler {
    fn new(seed: u64, index: usize, law: GainDistribution) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        GainSampler { rng, law }
    }

    fn draw(&mut self) -> f64 {
        let u: f64 = self.rng.gen();
        match self.law {
            GainDistribution::ExponentialUnitMean => -(-u).ln_1p(),
            GainDistribution::LogUniform { lo, hi } => (lo.ln() + u * (hi.ln() - lo.ln())).exp(),
        }
    }

    /// Redraws until the gain is strictly positive.
    fn draw_positive(&mut self) -> f64 {
        loop {
            let g = self.draw();
            if g > 0.0 {
                return g;
            }
        }
    }
}

/// Draws sample `index` of the sweep described by `config`.
pub fn sample_instance(config: &SweepConfig, index: usize) -> Result<ChannelSpec> {
    config.validate()?;
    if index >= config.n_samples {
        return Err(Error::Config(format!(
            "sample index {index} out of range for {} samples",
            config.n_samples
        )));
    }
    let mut sampler = GainSampler::new(config.seed, index, config.gain_distribution);
    let mut spec = config.template();
    match config.conditioning {
        Conditioning::Unconditioned => {
            spec.g01 = sampler.draw();
            spec.g02 = sampler.draw();
            spec.g13 = sampler.draw();
            spec.g23 = sampler.draw();
        }
        Conditioning::ForceProductEqual => loop {
            spec.g01 = sampler.draw_positive();
            spec.g02 = sampler.draw_positive();
            spec.g13 = sampler.draw_positive();
            let c01 = link_capacity(spec.g01, spec.p_s, spec.sigma1_sq)?;
            let c02 = link_capacity(spec.g02, spec.p_s, spec.sigma2_sq)?;
            let c13 = link_capacity(spec.g13, spec.p_r1, spec.sigma3_sq)?;
            spec.g23 = gain_for_capacity(c01 * c02 / c13, spec.p_r2, spec.sigma3_sq)?;
            // a tiny c13 can push the solved gain past f64 range; redraw
            if spec.g23.is_finite() {
                break;
            }
        },
        Conditioning::ForceCorollary43 => {
            spec.g01 = sampler.draw_positive();
            spec.g02 = sampler.draw_positive();
            let c01 = link_capacity(spec.g01, spec.p_s, spec.sigma1_sq)?;
            let c02 = link_capacity(spec.g02, spec.p_s, spec.sigma2_sq)?;
            spec.g13 = gain_for_capacity(c02, spec.p_r1, spec.sigma3_sq)?;
            spec.g23 = gain_for_capacity(c01, spec.p_r2, spec.sigma3_sq)?;
        }
    }
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub seed: u64,
    pub index: usize,
    pub spec: ChannelSpec,
    pub caps: LinkCapacities,
    pub r_sr: f64,
    pub bound: f64,
    pub gap: f64,
    pub lemma_case: LemmaCase,
    pub certified: bool,
}

fn evaluate(config: &SweepConfig, index: usize) -> Result<SweepRecord> {
    let spec = sample_instance(config, index)?;
    let caps = derive_capacities(&spec)?;
    let report = certify_capacities(&caps)?;
    Ok(SweepRecord {
        seed: config.seed,
        index,
        spec,
        caps,
        r_sr: report.r_sr,
        bound: report.bound,
        gap: report.gap,
        lemma_case: report.lemma_case,
        certified: report.capacity_certified,
    })
}

/// Serial, lazy stream of sweep records in index order.
pub fn records(config: &SweepConfig) -> impl Iterator<Item = Result<SweepRecord>> + '_ {
    (0..config.n_samples).map(move |i| evaluate(config, i))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub rng: String,
    pub config: SweepConfig,
    pub n_samples: usize,
    pub min_gap: f64,
    pub max_gap: f64,
    pub mean_gap: f64,
    /// Over records with `bound > RELATIVE_GAP_FLOOR`.
    pub max_relative_gap: Option<f64>,
    pub mean_relative_gap: Option<f64>,
    pub relative_gap_samples: usize,
    pub certified: usize,
    pub certification_rate: f64,
    pub case_counts: BTreeMap<LemmaCase, usize>,
    /// Fraction of source-sides and relay-sides records left short of the
    /// bound; `None` when the sweep drew no such record.
    pub equal_rate_non_attainment: Option<f64>,
}

/// Folds records, in order, into a summary.
pub fn summarize(config: &SweepConfig, records: &[SweepRecord]) -> SweepSummary {
    let n = records.len();
    let mut min_gap = f64::INFINITY;
    let mut max_gap = f64::NEG_INFINITY;
    let mut gap_sum = 0.0;
    let mut rel_sum = 0.0;
    let mut rel_max: Option<f64> = None;
    let mut rel_n = 0;
    let mut certified = 0;
    let mut case_counts: BTreeMap<LemmaCase, usize> =
        LemmaCase::ALL.iter().map(|&c| (c, 0)).collect();
    let (mut equal_rate, mut missed) = (0usize, 0usize);
    for r in records {
        min_gap = min_gap.min(r.gap);
        max_gap = max_gap.max(r.gap);
        gap_sum += r.gap;
        if r.bound > RELATIVE_GAP_FLOOR {
            let rel = r.gap / r.bound;
            rel_sum += rel;
            rel_n += 1;
            rel_max = Some(rel_max.map_or(rel, |m: f64| m.max(rel)));
        }
        if r.certified {
            certified += 1;
        }
        *case_counts.entry(r.lemma_case).or_default() += 1;
        if matches!(
            r.lemma_case,
            LemmaCase::SourceSidesEqual | LemmaCase::RelaySidesEqual
        ) {
            equal_rate += 1;
            if r.gap > CERTIFY_TOLERANCE * r.bound.max(1.0) {
                missed += 1;
            }
        }
    }
    let nf = n.max(1) as f64;
    SweepSummary {
        rng: RNG_DESCRIPTION.to_owned(),
        config: *config,
        n_samples: n,
        min_gap,
        max_gap,
        mean_gap: gap_sum / nf,
        max_relative_gap: rel_max,
        mean_relative_gap: (rel_n > 0).then(|| rel_sum / rel_n as f64),
        relative_gap_samples: rel_n,
        certified,
        certification_rate: certified as f64 / nf,
        case_counts,
        equal_rate_non_attainment: (equal_rate > 0).then(|| missed as f64 / equal_rate as f64),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub records: Vec<SweepRecord>,
    pub summary: SweepSummary,
}

/// Evaluates every sample (in parallel) and summarizes them in index order.
///
/// Fails on the first record, by index, whose evaluation errors; a gap below
/// `-1e-9` surfaces as [`Error::NegativeGap`].
pub fn run_sweep(config: &SweepConfig) -> Result<SweepOutput> {
    config.validate()?;
    let evaluated: Vec<Result<SweepRecord>> = (0..config.n_samples)
        .into_par_iter()
        .map(|i| evaluate(config, i))
        .collect();
    let records = evaluated.into_iter().collect::<Result<Vec<_>>>()?;
    let summary = summarize(config, &records);
    Ok(SweepOutput { records, summary })
}

pub const CSV_HEADER: [&str; 17] = [
    "seed", "index", "g01", "g02", "g13", "g23", "c01", "c02", "c13", "c23", "c012", "c123",
    "r_sr", "bound", "gap", "lemma_case", "certified",
];

/// 17 significant digits, enough to round-trip any `f64`.
fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: Write>(records: &[SweepRecord], out: W) -> Result<()> {
    let io_err = |e: csv::Error| Error::Config(format!("csv output failed: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(io_err)?;
    for r in records {
        let nums = [
            r.spec.g01, r.spec.g02, r.spec.g13, r.spec.g23, r.caps.c01, r.caps.c02, r.caps.c13,
            r.caps.c23, r.caps.c012, r.caps.c123, r.r_sr, r.bound, r.gap,
        ];
        let mut row = vec![r.seed.to_string(), r.index.to_string()];
        row.extend(nums.iter().map(|&x| fmt_num(x)));
        row.push(r.lemma_case.as_str().to_owned());
        row.push(r.certified.to_string());
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush()
        .map_err(|e| Error::Config(format!("csv output failed: {e}")))?;
    Ok(())
}

pub fn write_summary<W: Write>(summary: &SweepSummary, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, summary)
        .map_err(|e| Error::Config(format!("summary output failed: {e}")))?;
    writeln!(out).map_err(|e| Error::Config(format!("summary output failed: {e}")))?;
    Ok(())
}
