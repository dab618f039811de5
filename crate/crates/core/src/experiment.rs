//! Seeded welfare and order-bias experiments over uniformly random profiles.
//!
//! Profile `k` of a run is drawn from ChaCha8 stream `2k` of the seed and
//! its sampled initial orders from stream `2k + 1`, so results do not depend
//! on thread scheduling and every mechanism sees the same profiles and the
//! same orders.
//!
//! Config files are flat `key = value` lines (`#` starts a comment):
//!
//! ```text
//! mechanisms = RSD, R-TLQ+G, PS
//! n = 4..8          # or a list `4, 6, 8`, or a stepped range `4..16:4`
//! profiles = 2000
//! orders = exact    # or `sampled:64`
//! seed = 7
//! metrics = util_loss, egal, egal_rowmin, order_bias
//! loss = per_profile  # or `ratio_of_means`
//! ```

use std::fmt;

use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::enumerate::all_orders;
use crate::error::{Error, Result};
use crate::lottery::DEFAULT_ENUMERATION_LIMIT;
use crate::mechanism::{Mechanism, Output};
use crate::model::{AgentOrder, PreferenceOrder, Profile};
use crate::welfare::{
    agent_utilities, estimate, expected_utilities, optimal_utilitarian, paired_difference, Estimate,
};

/// Profiles with each agent's order drawn independently and uniformly.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct ProfileSampler {
    pub n: usize,
    pub seed: u64,
}

impl ProfileSampler {
    pub fn new(n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInstance("n must be at least 1".into()));
        }
        Ok(Self { n, seed })
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    pub fn profile(&self, index: u64) -> Profile {
        let mut rng = self.rng(2 * index);
        let prefs = (0..self.n)
            .map(|_| {
                let mut v: Vec<usize> = (0..self.n).collect();
                v.shuffle(&mut rng);
                PreferenceOrder::from_valid(v)
            })
            .collect();
        Profile::one_sided(prefs).expect("sampled orders are valid")
    }

    /// `count` initial orders tied to profile `index`.
    pub fn orders(&self, index: u64, count: usize) -> Vec<AgentOrder> {
        let mut rng = self.rng(2 * index + 1);
        (0..count)
            .map(|_| {
                let mut v: Vec<usize> = (0..self.n).collect();
                v.shuffle(&mut rng);
                AgentOrder::from_valid(v)
            })
            .collect()
    }

    pub fn profiles(&self, count: u64) -> Vec<Profile> {
        (0..count).map(|k| self.profile(k)).collect()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum OrdersMode {
    Exact,
    Sampled(usize),
}

impl OrdersMode {
    pub fn label(&self) -> &'static str {
        match self {
            OrdersMode::Exact => "exact",
            OrdersMode::Sampled(_) => "sampled",
        }
    }

    fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t == "exact" {
            return Ok(OrdersMode::Exact);
        }
        match t
            .strip_prefix("sampled:")
            .and_then(|k| k.trim().parse::<usize>().ok())
        {
            Some(k) if k >= 1 => Ok(OrdersMode::Sampled(k)),
            _ => Err(Error::Config(format!(
                "orders must be `exact` or `sampled:<count>`, got `{t}`"
            ))),
        }
    }
}

impl fmt::Display for OrdersMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrdersMode::Exact => f.write_str("exact"),
            OrdersMode::Sampled(k) => write!(f, "sampled:{k}"),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Metric {
    /// `(OPT - W) / OPT`, with `W` the expected utilitarian welfare.
    UtilLoss,
    /// Expected minimum Borda utility over runs, divided by `n`.
    Egal,
    /// Minimum over agents of expected Borda utility, divided by `n`.
    EgalRowMin,
    /// Spread of expected utility across proposing positions, divided by `n`.
    OrderBias,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::UtilLoss,
        Metric::Egal,
        Metric::EgalRowMin,
        Metric::OrderBias,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::UtilLoss => "util_loss",
            Metric::Egal => "egal",
            Metric::EgalRowMin => "egal_rowmin",
            Metric::OrderBias => "order_bias",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == text.trim())
            .ok_or_else(|| Error::Config(format!("unknown metric `{}`", text.trim())))
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Default)]
pub enum LossMode {
    #[default]
    PerProfile,
    RatioOfMeans,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub mechanisms: Vec<Mechanism>,
    pub n_values: Vec<usize>,
    pub profile_samples: u64,
    pub orders: OrdersMode,
    pub seed: u64,
    pub metrics: Vec<Metric>,
    pub loss_mode: LossMode,
}

fn parse_n_values(v: &str) -> Result<Vec<usize>> {
    let bad = || Error::Config(format!("cannot read n values from `{v}`"));
    let v = v.trim();
    if let Some((lo, rest)) = v.split_once("..") {
        let (hi, step) = match rest.split_once(':') {
            Some((h, s)) => (h, s.trim().parse::<usize>().map_err(|_| bad())?),
            None => (rest, 1),
        };
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().parse().map_err(|_| bad())?;
        if step == 0 || lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).step_by(step).collect());
    }
    v.split(',')
        .map(|x| x.trim().parse().map_err(|_| bad()))
        .collect()
}

fn list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut mechanisms = None;
        let mut n_values = None;
        let mut profile_samples = None;
        let mut orders = OrdersMode::Exact;
        let mut seed = 0;
        let mut metrics = None;
        let mut loss_mode = LossMode::PerProfile;
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: k + 1,
                message: "expected `key = value`".into(),
            })?;
            let value = value.trim();
            let at = |e: Error| Error::Parse {
                line: k + 1,
                message: e.to_string(),
            };
            match key.trim() {
                "mechanisms" => {
                    mechanisms = Some(
                        list(value)
                            .map(Mechanism::parse)
                            .collect::<Result<Vec<_>>>()
                            .map_err(at)?,
                    )
                }
                "n" => n_values = Some(parse_n_values(value).map_err(at)?),
                "profiles" => {
                    profile_samples =
                        Some(value.parse().map_err(|_| {
                            at(Error::Config(format!("bad profile count `{value}`")))
                        })?)
                }
                "orders" => orders = OrdersMode::parse(value).map_err(at)?,
                "seed" => {
                    seed = value
                        .parse()
                        .map_err(|_| at(Error::Config(format!("bad seed `{value}`"))))?
                }
                "metrics" => {
                    metrics = Some(
                        list(value)
                            .map(Metric::parse)
                            .collect::<Result<Vec<_>>>()
                            .map_err(at)?,
                    )
                }
                "loss" => {
                    loss_mode = match value {
                        "per_profile" => LossMode::PerProfile,
                        "ratio_of_means" => LossMode::RatioOfMeans,
                        _ => return Err(at(Error::Config(format!("unknown loss mode `{value}`")))),
                    }
                }
                other => return Err(at(Error::Config(format!("unknown key `{other}`")))),
            }
        }
        let cfg = Self {
            mechanisms: mechanisms.unwrap_or_default(),
            n_values: n_values.ok_or_else(|| Error::Config("missing `n`".into()))?,
            profile_samples: profile_samples
                .ok_or_else(|| Error::Config("missing `profiles`".into()))?,
            orders,
            seed,
            metrics: metrics.ok_or_else(|| Error::Config("missing `metrics`".into()))?,
            loss_mode,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Rejects bad combinations before any computation starts.
    pub fn validate(&self) -> Result<()> {
        if self.mechanisms.is_empty() {
            return Err(Error::Config("no mechanisms listed".into()));
        }
        if self.metrics.is_empty() {
            return Err(Error::Config("no metrics listed".into()));
        }
        if self.n_values.is_empty() || self.n_values.contains(&0) {
            return Err(Error::Config("n values must be at least 1".into()));
        }
        if self.profile_samples == 0 {
            return Err(Error::Config("profiles must be at least 1".into()));
        }
        for m in &self.mechanisms {
            if m.base.needs_item_prefs() {
                return Err(Error::Config(format!(
                    "{m} needs item-side preferences; experiments sample one-sided profiles"
                )));
            }
        }
        if self.orders == OrdersMode::Exact {
            if let Some(&n) = self
                .n_values
                .iter()
                .find(|&&n| n > DEFAULT_ENUMERATION_LIMIT)
            {
                return Err(Error::LimitExceeded {
                    n,
                    limit: DEFAULT_ENUMERATION_LIMIT,
                });
            }
        }
        Ok(())
    }
}

/// Summary statistics for one (n, mechanism, metric) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct WelfareStats {
    pub n: usize,
    pub mechanism: Mechanism,
    pub metric: Metric,
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    pub orders_mode: &'static str,
    pub seed: u64,
}

/// Per-profile values behind a statistic, kept for paired comparisons.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricSamples {
    pub stats: WelfareStats,
    /// One value per profile. For order bias this is the gap between the
    /// two positions with the highest and lowest mean, divided by `n`.
    pub values: Vec<f64>,
}

fn orders_for(
    mech: Mechanism,
    sampler: &ProfileSampler,
    index: u64,
    mode: OrdersMode,
) -> Vec<AgentOrder> {
    let n = sampler.n;
    if !mech.randomized || !mech.base.uses_order() {
        return vec![AgentOrder::identity(n)];
    }
    match mode {
        OrdersMode::Exact => all_orders(n).collect(),
        OrdersMode::Sampled(k) => sampler.orders(index, k),
    }
}

fn effective_mode(mech: Mechanism, mode: OrdersMode, metric: Metric) -> &'static str {
    if metric == Metric::OrderBias || !mech.randomized || !mech.base.uses_order() {
        "exact"
    } else {
        mode.label()
    }
}

/// Expected utilities per agent and expected minimum utility over the runs.
fn run_profile(
    mech: Mechanism,
    profile: &Profile,
    orders: &[AgentOrder],
) -> Result<(Vec<f64>, f64)> {
    let n = profile.n();
    let mut sums = vec![0i64; n];
    let mut min_sum = 0i64;
    for o in orders {
        match mech.run(profile, o)? {
            Output::Matching(m) => {
                let u = agent_utilities(&m, profile);
                min_sum += *u.iter().min().unwrap_or(&0);
                for (s, x) in sums.iter_mut().zip(&u) {
                    *s += x;
                }
            }
            Output::Fractional(p) => {
                // The expected minimum is not defined by a fractional
                // outcome alone; report the minimum of expectations.
                let eu: Vec<f64> = expected_utilities(&p, profile)
                    .iter()
                    .map(|x| x.to_f64().unwrap())
                    .collect();
                let min = eu.iter().cloned().fold(f64::INFINITY, f64::min);
                return Ok((eu, min));
            }
        }
    }
    let k = orders.len() as f64;
    Ok((
        sums.iter().map(|&s| s as f64 / k).collect(),
        min_sum as f64 / k,
    ))
}

/// Utility at each proposing position from the identity order, averaged over
/// the `n` cyclic relabellings of the agents (same expectation, lower variance).
fn position_utilities(mech: Mechanism, profile: &Profile) -> Result<Vec<f64>> {
    let n = profile.n();
    let identity = [AgentOrder::identity(n)];
    if !mech.base.uses_order() {
        // Relabelling only permutes the outcome, so every position sees the
        // average agent.
        let (u, _) = run_profile(mech.deterministic(), profile, &identity)?;
        let avg = u.iter().sum::<f64>() / n as f64;
        return Ok(vec![avg; n]);
    }
    let mut acc = vec![0f64; n];
    for r in 0..n {
        let perm: Vec<usize> = (0..n).map(|i| (i + r) % n).collect();
        let rotated = profile.relabel_agents(&perm)?;
        let (u, _) = run_profile(mech.deterministic(), &rotated, &identity)?;
        for (a, x) in acc.iter_mut().zip(u) {
            *a += x;
        }
    }
    Ok(acc.into_iter().map(|x| x / n as f64).collect())
}

/// Evaluates one metric for one mechanism on `profiles` sampled profiles.
pub fn evaluate(
    mech: Mechanism,
    metric: Metric,
    sampler: ProfileSampler,
    profiles: u64,
    mode: OrdersMode,
    loss_mode: LossMode,
) -> Result<MetricSamples> {
    let n = sampler.n;
    if metric == Metric::OrderBias {
        let per_profile = (0..profiles)
            .into_par_iter()
            .map(|k| position_utilities(mech, &sampler.profile(k)))
            .collect::<Result<Vec<_>>>()?;
        let pos_means: Vec<f64> = (0..n)
            .map(|i| per_profile.iter().map(|u| u[i]).sum::<f64>() / profiles as f64)
            .collect();
        let (mut hi, mut lo) = (0, 0);
        for i in 0..n {
            if pos_means[i] > pos_means[hi] {
                hi = i;
            }
            if pos_means[i] < pos_means[lo] {
                lo = i;
            }
        }
        let values: Vec<f64> = per_profile
            .iter()
            .map(|u| (u[hi] - u[lo]) / n as f64)
            .collect();
        let e = Estimate {
            mean: (pos_means[hi] - pos_means[lo]) / n as f64,
            stderr: estimate(&values).stderr,
        };
        return Ok(MetricSamples {
            stats: stats(n, mech, metric, e, profiles, "exact", sampler.seed),
            values,
        });
    }

    let rows = (0..profiles)
        .into_par_iter()
        .map(|k| {
            let p = sampler.profile(k);
            let (eu, emin) = run_profile(mech, &p, &orders_for(mech, &sampler, k, mode))?;
            let opt = if metric == Metric::UtilLoss {
                optimal_utilitarian(&p).0 as f64
            } else {
                0.0
            };
            Ok((eu, emin, opt))
        })
        .collect::<Result<Vec<_>>>()?;
    let nf = n as f64;
    let values: Vec<f64> = rows
        .iter()
        .map(|(eu, emin, opt)| match metric {
            Metric::UtilLoss => {
                let w: f64 = eu.iter().sum();
                if *opt > 0.0 {
                    (opt - w) / opt
                } else {
                    0.0
                }
            }
            Metric::Egal => emin / nf,
            Metric::EgalRowMin => eu.iter().cloned().fold(f64::INFINITY, f64::min) / nf,
            Metric::OrderBias => unreachable!(),
        })
        .collect();
    let mut e = estimate(&values);
    if metric == Metric::UtilLoss && loss_mode == LossMode::RatioOfMeans {
        e = ratio_of_means(
            &rows
                .iter()
                .map(|(eu, _, opt)| (opt - eu.iter().sum::<f64>(), *opt))
                .collect::<Vec<_>>(),
        );
    }
    Ok(MetricSamples {
        stats: stats(
            n,
            mech,
            metric,
            e,
            profiles,
            effective_mode(mech, mode, metric),
            sampler.seed,
        ),
        values,
    })
}

/// `sum(loss) / sum(opt)` with a delta-method standard error.
fn ratio_of_means(pairs: &[(f64, f64)]) -> Estimate {
    let k = pairs.len() as f64;
    let (sl, so) = pairs
        .iter()
        .fold((0.0, 0.0), |(a, b), (l, o)| (a + l, b + o));
    let r = sl / so;
    let resid: Vec<f64> = pairs.iter().map(|(l, o)| l - r * o).collect();
    let se = estimate(&resid).stderr / (so / k);
    Estimate {
        mean: r,
        stderr: se,
    }
}

fn stats(
    n: usize,
    mechanism: Mechanism,
    metric: Metric,
    e: Estimate,
    samples: u64,
    mode: &'static str,
    seed: u64,
) -> WelfareStats {
    WelfareStats {
        n,
        mechanism,
        metric,
        mean: e.mean,
        stderr: e.stderr,
        samples,
        orders_mode: mode,
        seed,
    }
}

/// Mean utilitarian loss of `mech` over `profiles` random profiles.
pub fn utilitarian_loss(
    mech: Mechanism,
    n: usize,
    profiles: u64,
    mode: OrdersMode,
    seed: u64,
) -> Result<WelfareStats> {
    if n < 2 {
        return Err(Error::InvalidInstance(
            "utilitarian loss needs n >= 2".into(),
        ));
    }
    Ok(evaluate(
        mech,
        Metric::UtilLoss,
        ProfileSampler::new(n, seed)?,
        profiles,
        mode,
        LossMode::PerProfile,
    )?
    .stats)
}

/// Order bias of `mech` run from the fixed order 1..n.
pub fn order_bias(mech: Mechanism, n: usize, profiles: u64, seed: u64) -> Result<WelfareStats> {
    Ok(evaluate(
        mech,
        Metric::OrderBias,
        ProfileSampler::new(n, seed)?,
        profiles,
        OrdersMode::Exact,
        LossMode::PerProfile,
    )?
    .stats)
}

/// `a - b` on the same profiles and orders.
pub fn compare(a: &MetricSamples, b: &MetricSamples) -> Estimate {
    paired_difference(&a.values, &b.values)
}

/// Runs every (n, mechanism, metric) cell of the config.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<WelfareStats>> {
    cfg.validate()?;
    let mut out = Vec::new();
    for &n in &cfg.n_values {
        let sampler = ProfileSampler::new(n, cfg.seed)?;
        for &mech in &cfg.mechanisms {
            for &metric in &cfg.metrics {
                out.push(
                    evaluate(
                        mech,
                        metric,
                        sampler,
                        cfg.profile_samples,
                        cfg.orders,
                        cfg.loss_mode,
                    )?
                    .stats,
                );
            }
        }
    }
    Ok(out)
}

pub const CSV_HEADER: [&str; 8] = [
    "n",
    "mechanism",
    "metric",
    "mean",
    "stderr",
    "samples",
    "orders_mode",
    "seed",
];

pub fn to_csv(rows: &[WelfareStats]) -> Result<String> {
    let io = |e: csv::Error| Error::Config(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.mechanism.code(),
            r.metric.name().to_string(),
            format!("{:.10}", r.mean),
            format!("{:.10}", r.stderr),
            r.samples.to_string(),
            r.orders_mode.to_string(),
            r.seed.to_string(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// One parsed CSV row: the statistic fields as text-free values.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub n: usize,
    pub mechanism: String,
    pub metric: String,
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    pub orders_mode: String,
    pub seed: u64,
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let field = |i: usize| rec.get(i).unwrap_or("").to_string();
        let num = |i: usize| -> Result<f64> {
            field(i).parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad number in column {}", i + 1),
            })
        };
        out.push(CsvRow {
            n: num(0)? as usize,
            mechanism: field(1),
            metric: field(2),
            mean: num(3)?,
            stderr: num(4)?,
            samples: num(5)? as u64,
            orders_mode: field(6),
            seed: field(7).parse().map_err(|_| Error::Parse {
                line,
                message: "bad seed".into(),
            })?,
        });
    }
    Ok(out)
}
