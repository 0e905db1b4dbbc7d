//! Sequential treatment-assignment engines and imbalance diagnostics.
//!
//! All schemes target balanced 1:1 allocation. The stratified schemes
//! (permuted block, biased coin, urn) apply their rule independently
//! within each joint level of the randomization covariates; the marginal
//! method balances each covariate margin instead of the joint strata.
//!
//! Every scheme is expressed through [`SchemeState::assignment_probability`],
//! the conditional probability of assigning arm 1 given the current state.
//! [`SchemeState::assign_next`] draws from that probability and updates the
//! counters, which keeps the randomization rules exactly testable.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::derive_rng;

/// Joint levels of the randomization covariates for one subject.
pub type StratumLabel = Vec<u8>;

/// Randomization scheme families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeKind {
    /// Fair-coin assignment, independent of everything.
    #[serde(rename = "simple")]
    Simple,
    /// Blocks of `2b` assignments forced to contain exactly `b` of each arm.
    #[serde(rename = "permuted-block")]
    PermutedBlock,
    /// Biased coin favoring the under-represented arm with probability `p`.
    #[serde(rename = "biased-coin")]
    EfronBiasedCoin,
    /// Biased coin whose bias decays as the stratum fills (urn design).
    #[serde(rename = "urn")]
    WeiUrn,
    /// Marginal method: favor the arm minimizing the weighted sum of
    /// marginal imbalances.
    #[serde(rename = "pocock-simon")]
    PocockSimon,
}

impl SchemeKind {
    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::Simple => "simple",
            SchemeKind::PermutedBlock => "permuted-block",
            SchemeKind::EfronBiasedCoin => "biased-coin",
            SchemeKind::WeiUrn => "urn",
            SchemeKind::PocockSimon => "pocock-simon",
        }
    }
}

/// Full specification of a randomization scheme.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub kind: SchemeKind,
    /// Apply the rule within each joint stratum (permuted block, biased
    /// coin, urn). `false` pools all subjects into a single stratum.
    pub stratified: bool,
    /// Block size `2b` for the permuted block design.
    pub block_size: usize,
    /// Bias probability for the biased coin and the marginal method.
    pub coin_p: f64,
    pub urn_s: f64,
    pub urn_omega: f64,
    /// Per-margin weights for the marginal method; `None` means equal.
    pub ps_weights: Option<Vec<f64>>,
    /// Compare squared marginal differences instead of absolute ones in
    /// the marginal method.
    pub ps_squared: bool,
}

impl SchemeSpec {
    pub fn simple() -> Self {
        SchemeSpec {
            kind: SchemeKind::Simple,
            stratified: false,
            block_size: 4,
            coin_p: 2.0 / 3.0,
            urn_s: 1.0,
            urn_omega: 1.0,
            ps_weights: None,
            ps_squared: false,
        }
    }

    pub fn permuted_block(block_size: usize) -> Self {
        SchemeSpec {
            kind: SchemeKind::PermutedBlock,
            stratified: true,
            block_size,
            ..SchemeSpec::simple()
        }
    }

    pub fn efron_biased_coin(coin_p: f64) -> Self {
        SchemeSpec {
            kind: SchemeKind::EfronBiasedCoin,
            stratified: true,
            coin_p,
            ..SchemeSpec::simple()
        }
    }

    pub fn wei_urn(urn_s: f64, urn_omega: f64) -> Self {
        SchemeSpec {
            kind: SchemeKind::WeiUrn,
            stratified: true,
            urn_s,
            urn_omega,
            ..SchemeSpec::simple()
        }
    }

    pub fn pocock_simon(coin_p: f64) -> Self {
        SchemeSpec {
            kind: SchemeKind::PocockSimon,
            stratified: false,
            coin_p,
            ..SchemeSpec::simple()
        }
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn validate(&self) -> Result<(), SchemeError> {
        match self.kind {
            SchemeKind::PermutedBlock => {
                if self.block_size < 2 || self.block_size % 2 != 0 {
                    return Err(SchemeError::InvalidBlockSize(self.block_size));
                }
            }
            SchemeKind::EfronBiasedCoin | SchemeKind::PocockSimon => {
                if !(self.coin_p > 0.5 && self.coin_p <= 1.0) {
                    return Err(SchemeError::InvalidCoinProbability(self.coin_p));
                }
            }
            SchemeKind::WeiUrn => {
                if !(self.urn_s >= 0.0 && self.urn_omega >= 0.0)
                    || !self.urn_s.is_finite()
                    || !self.urn_omega.is_finite()
                {
                    return Err(SchemeError::InvalidUrnParameters {
                        s: self.urn_s,
                        omega: self.urn_omega,
                    });
                }
            }
            SchemeKind::Simple => {}
        }
        if let Some(w) = &self.ps_weights {
            if w.is_empty() || w.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(SchemeError::InvalidMarginWeights);
            }
            if w.iter().sum::<f64>() <= 0.0 {
                return Err(SchemeError::InvalidMarginWeights);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("block size must be an even integer >= 2, got {0}")]
    InvalidBlockSize(usize),
    #[error("coin probability must lie in (1/2, 1], got {0}")]
    InvalidCoinProbability(f64),
    #[error("urn parameters must be finite and non-negative, got s={s}, omega={omega}")]
    InvalidUrnParameters { s: f64, omega: f64 },
    #[error("margin weights must be non-negative with a positive sum")]
    InvalidMarginWeights,
    #[error("stratum label has {got} margins, expected {expected}")]
    MarginMismatch { got: usize, expected: usize },
    #[error("margin weights count {got} does not match margin count {expected}")]
    WeightCountMismatch { got: usize, expected: usize },
    #[error("stratum labels with more than 8 margins are not supported")]
    LabelTooLong,
}

#[derive(Clone, Debug, Default)]
struct StratumCounters {
    /// Within-stratum imbalance: assigned to 1 minus assigned to 0.
    imbalance: i64,
    /// Assignments made so far in this stratum.
    count: u64,
    /// Remaining slots of the current permuted block.
    block_ones: u32,
    block_zeros: u32,
}

/// Mutable state of one sequential randomization engine.
///
/// Single-writer: assignments within a trial are inherently sequential.
/// Distinct trials use independent states with independent streams.
#[derive(Clone, Debug)]
pub struct SchemeState {
    spec: SchemeSpec,
    strata: HashMap<u64, StratumCounters>,
    /// Per-margin arm counts, keyed by level; used by the marginal method.
    margins: Vec<HashMap<u8, [u64; 2]>>,
    margin_count: Option<usize>,
    assigned: u64,
    rng: ChaCha12Rng,
}

fn pack_label(label: &[u8]) -> Result<u64, SchemeError> {
    if label.len() > 8 {
        return Err(SchemeError::LabelTooLong);
    }
    let mut key = label.len() as u64;
    for &level in label {
        key = (key << 8) | u64::from(level);
    }
    Ok(key)
}

impl SchemeState {
    pub fn new(spec: SchemeSpec, rng: ChaCha12Rng) -> Result<Self, SchemeError> {
        spec.validate()?;
        Ok(SchemeState {
            spec,
            strata: HashMap::new(),
            margins: Vec::new(),
            margin_count: None,
            assigned: 0,
            rng,
        })
    }

    pub fn spec(&self) -> &SchemeSpec {
        &self.spec
    }

    /// Total assignments made so far.
    pub fn assigned(&self) -> u64 {
        self.assigned
    }

    /// Current within-stratum imbalance for `label` (0 if unseen).
    pub fn stratum_imbalance(&self, label: &[u8]) -> i64 {
        let key = match self.effective_key(label) {
            Ok(k) => k,
            Err(_) => return 0,
        };
        self.strata.get(&key).map_or(0, |s| s.imbalance)
    }

    fn effective_key(&self, label: &[u8]) -> Result<u64, SchemeError> {
        if self.spec.stratified {
            pack_label(label)
        } else {
            Ok(0)
        }
    }

    fn check_margins(&mut self, label: &[u8]) -> Result<(), SchemeError> {
        match self.margin_count {
            Some(m) if m != label.len() => Err(SchemeError::MarginMismatch {
                got: label.len(),
                expected: m,
            }),
            Some(_) => Ok(()),
            None => {
                if label.len() > 8 {
                    return Err(SchemeError::LabelTooLong);
                }
                if let Some(w) = &self.spec.ps_weights {
                    if w.len() != label.len() {
                        return Err(SchemeError::WeightCountMismatch {
                            got: w.len(),
                            expected: label.len(),
                        });
                    }
                }
                self.margin_count = Some(label.len());
                if self.spec.kind == SchemeKind::PocockSimon {
                    self.margins = vec![HashMap::new(); label.len()];
                }
                Ok(())
            }
        }
    }

    /// Conditional probability of assigning arm 1 to the next subject with
    /// stratum label `label`, given the current state.
    pub fn assignment_probability(&self, label: &[u8]) -> Result<f64, SchemeError> {
        if let Some(m) = self.margin_count {
            if m != label.len() {
                return Err(SchemeError::MarginMismatch {
                    got: label.len(),
                    expected: m,
                });
            }
        }
        let p = match self.spec.kind {
            SchemeKind::Simple => 0.5,
            SchemeKind::PermutedBlock => {
                let key = self.effective_key(label)?;
                let (ones, zeros) = match self.strata.get(&key) {
                    Some(s) if s.block_ones + s.block_zeros > 0 => (s.block_ones, s.block_zeros),
                    _ => {
                        let half = (self.spec.block_size / 2) as u32;
                        (half, half)
                    }
                };
                f64::from(ones) / f64::from(ones + zeros)
            }
            SchemeKind::EfronBiasedCoin => {
                let key = self.effective_key(label)?;
                let d = self.strata.get(&key).map_or(0, |s| s.imbalance);
                three_way(d, self.spec.coin_p)
            }
            SchemeKind::WeiUrn => {
                let key = self.effective_key(label)?;
                let (d, k) = self
                    .strata
                    .get(&key)
                    .map_or((0, 0), |s| (s.imbalance, s.count));
                let s = self.spec.urn_s;
                let omega = self.spec.urn_omega;
                let p_k = 0.5 + omega * d.unsigned_abs() as f64 / (2.0 * (2.0 * s + omega * k as f64));
                three_way(d, p_k)
            }
            SchemeKind::PocockSimon => {
                let weights = self.margin_weights(label.len());
                let mut if_one = 0.0;
                let mut if_zero = 0.0;
                for (m, &level) in label.iter().enumerate() {
                    let [n1, n0] = self
                        .margins
                        .get(m)
                        .and_then(|counts| counts.get(&level))
                        .copied()
                        .unwrap_or([0, 0]);
                    let (n1, n0) = (n1 as f64, n0 as f64);
                    let measure = |d: f64| if self.spec.ps_squared { d * d } else { d.abs() };
                    if_one += weights[m] * measure(n1 + 1.0 - n0);
                    if_zero += weights[m] * measure(n1 - n0 - 1.0);
                }
                if if_one < if_zero {
                    self.spec.coin_p
                } else if if_one > if_zero {
                    1.0 - self.spec.coin_p
                } else {
                    0.5
                }
            }
        };
        Ok(p)
    }

    fn margin_weights(&self, margins: usize) -> Vec<f64> {
        match &self.spec.ps_weights {
            Some(w) => {
                let total: f64 = w.iter().sum();
                w.iter().map(|x| x / total).collect()
            }
            None => vec![1.0 / margins as f64; margins],
        }
    }

    /// Assign the next subject and update the state counters.
    pub fn assign_next(&mut self, label: &[u8]) -> Result<u8, SchemeError> {
        self.check_margins(label)?;
        let p = self.assignment_probability(label)?;
        let arm: u8 = if self.rng.random::<f64>() < p { 1 } else { 0 };
        self.record(label, arm)?;
        Ok(arm)
    }

    fn record(&mut self, label: &[u8], arm: u8) -> Result<(), SchemeError> {
        let key = self.effective_key(label)?;
        let entry = self.strata.entry(key).or_default();
        entry.imbalance += if arm == 1 { 1 } else { -1 };
        entry.count += 1;
        if self.spec.kind == SchemeKind::PermutedBlock {
            if entry.block_ones + entry.block_zeros == 0 {
                let half = (self.spec.block_size / 2) as u32;
                entry.block_ones = half;
                entry.block_zeros = half;
            }
            if arm == 1 {
                entry.block_ones -= 1;
            } else {
                entry.block_zeros -= 1;
            }
        }
        if self.spec.kind == SchemeKind::PocockSimon {
            if self.margins.len() < label.len() {
                self.margins.resize(label.len(), HashMap::new());
            }
            for (m, &level) in label.iter().enumerate() {
                let counts = self.margins[m].entry(level).or_insert([0, 0]);
                counts[usize::from(arm == 0)] += 1;
            }
        }
        self.assigned += 1;
        Ok(())
    }
}

/// P(assign 1) under the biased-coin rule with imbalance `d` and bias `p`.
fn three_way(d: i64, p: f64) -> f64 {
    match d.cmp(&0) {
        std::cmp::Ordering::Less => p,
        std::cmp::Ordering::Equal => 0.5,
        std::cmp::Ordering::Greater => 1.0 - p,
    }
}

/// Final imbalance of one realized assignment sequence, by stratum.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ImbalanceReport {
    pub strata: BTreeMap<StratumLabel, StratumImbalance>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StratumImbalance {
    pub n: u64,
    pub imbalance: i64,
    /// imbalance / sqrt(n)
    pub normalized: f64,
}

impl ImbalanceReport {
    /// Overall imbalance: assigned to 1 minus assigned to 0.
    pub fn total(&self) -> i64 {
        self.strata.values().map(|s| s.imbalance).sum()
    }
}

/// Per-stratum imbalance of a realized sequence of `(label, arm)` pairs.
pub fn imbalance<'a, I>(assignments: I) -> ImbalanceReport
where
    I: IntoIterator<Item = (&'a [u8], u8)>,
{
    let mut strata: BTreeMap<StratumLabel, StratumImbalance> = BTreeMap::new();
    for (label, arm) in assignments {
        let entry = strata.entry(label.to_vec()).or_default();
        entry.n += 1;
        entry.imbalance += if arm == 1 { 1 } else { -1 };
    }
    for s in strata.values_mut() {
        s.normalized = s.imbalance as f64 / (s.n as f64).sqrt();
    }
    ImbalanceReport { strata }
}

/// Covariate laws for imbalance Monte Carlo runs.
#[derive(Clone, Debug)]
pub enum CovariateLaw {
    /// Independent Bernoulli margins with the given success probabilities.
    Bernoulli(Vec<f64>),
    /// Independent categorical margins; each inner vector is a level
    /// distribution over levels `1..=len`.
    Categorical(Vec<Vec<f64>>),
}

impl CovariateLaw {
    pub fn sample(&self, rng: &mut ChaCha12Rng) -> StratumLabel {
        match self {
            CovariateLaw::Bernoulli(ps) => ps
                .iter()
                .map(|&p| u8::from(rng.random::<f64>() < p))
                .collect(),
            CovariateLaw::Categorical(margins) => margins
                .iter()
                .map(|probs| {
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    for (idx, &p) in probs.iter().enumerate() {
                        acc += p;
                        if u < acc {
                            return idx as u8 + 1;
                        }
                    }
                    probs.len() as u8
                })
                .collect(),
        }
    }
}

/// Empirical moments of the within-stratum imbalance over replicated runs.
#[derive(Clone, Debug)]
pub struct ImbalanceMoments {
    pub n: usize,
    pub replicates: usize,
    pub strata: BTreeMap<StratumLabel, StratumMomentRow>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct StratumMomentRow {
    /// Replicates in which the stratum appeared.
    pub present: usize,
    pub mean_n: f64,
    pub mean_d: f64,
    pub var_d: f64,
    pub var_d_se: f64,
    /// var(D_n(z)) / n, the scale in which (D1) failure shows.
    pub var_d_over_n: f64,
    pub mean_norm: f64,
    pub var_norm: f64,
    pub var_norm_se: f64,
    /// Largest |D_k(z)| seen at any point of any replicate.
    pub max_abs_d: i64,
}

/// Replicated imbalance study: distributes `replicates` runs of length `n`
/// over the thread pool and aggregates per-stratum moments of the final
/// imbalance and its root-n normalization.
pub fn monte_carlo_imbalance(
    spec: &SchemeSpec,
    law: &CovariateLaw,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<ImbalanceMoments, SchemeError> {
    spec.validate()?;
    let kind_tag = spec.kind as u64;
    let runs: Vec<Result<BTreeMap<StratumLabel, (u64, i64, i64)>, SchemeError>> = (0..replicates)
        .into_par_iter()
        .map(|rep| {
            let mut data_rng = derive_rng(seed, &[kind_tag, rep as u64, crate::rng::STREAM_DATA]);
            let assign_rng = derive_rng(seed, &[kind_tag, rep as u64, crate::rng::STREAM_ASSIGN]);
            let mut state = SchemeState::new(spec.clone(), assign_rng)?;
            // label -> (n_z, D_n(z), running max |D_k(z)|)
            let mut tally: BTreeMap<StratumLabel, (u64, i64, i64)> = BTreeMap::new();
            for _ in 0..n {
                let label = law.sample(&mut data_rng);
                let arm = state.assign_next(&label)?;
                let entry = tally.entry(label).or_insert((0, 0, 0));
                entry.0 += 1;
                entry.1 += if arm == 1 { 1 } else { -1 };
                entry.2 = entry.2.max(entry.1.abs());
            }
            Ok(tally)
        })
        .collect();

    let mut per_stratum: BTreeMap<StratumLabel, (Vec<f64>, Vec<f64>, Vec<f64>, i64)> =
        BTreeMap::new();
    for run in runs {
        let tally = run?;
        for (label, (n_z, d, max_abs)) in tally {
            let entry = per_stratum
                .entry(label)
                .or_insert_with(|| (Vec::new(), Vec::new(), Vec::new(), 0));
            entry.0.push(n_z as f64);
            entry.1.push(d as f64);
            entry.2.push(d as f64 / (n_z as f64).sqrt());
            entry.3 = entry.3.max(max_abs);
        }
    }

    let mut strata = BTreeMap::new();
    for (label, (ns, ds, norms, max_abs)) in per_stratum {
        let (var_d, var_d_se) = crate::util::variance_with_se(&ds);
        let (var_norm, var_norm_se) = crate::util::variance_with_se(&norms);
        strata.insert(
            label,
            StratumMomentRow {
                present: ds.len(),
                mean_n: crate::util::mean(&ns),
                mean_d: crate::util::mean(&ds),
                var_d,
                var_d_se,
                var_d_over_n: var_d / n as f64,
                mean_norm: crate::util::mean(&norms),
                var_norm,
                var_norm_se,
                max_abs_d: max_abs,
            },
        );
    }
    Ok(ImbalanceMoments {
        n,
        replicates,
        strata,
    })
}

/// Render a stratum label for reports, e.g. `[1, 3]` as `1-3`.
pub fn format_label(label: &[u8]) -> String {
    label
        .iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join("-")
}
