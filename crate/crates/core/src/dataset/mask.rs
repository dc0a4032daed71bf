use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::MultiViewDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaskProtocol {
    /// Drop a fraction `rate` of every view's instances.
    RandomMissing,
    /// Keep a fraction `rate` of samples in both views, one view for the rest.
    PairedSample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskSpec {
    pub protocol: MaskProtocol,
    pub rate: f64,
    pub seed: u64,
}

impl MaskSpec {
    pub fn new(protocol: MaskProtocol, rate: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::InvalidParameter(format!(
                "mask rate {rate} outside [0, 1]"
            )));
        }
        Ok(Self {
            protocol,
            rate,
            seed,
        })
    }
}

/// Raw output of a mask draw, before the data is sliced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskDraw {
    /// Sorted sample ids kept per view.
    pub availability: Vec<Vec<usize>>,
    /// Per-view kept count before the at-least-one-view repair.
    pub retained_before_repair: Vec<usize>,
    /// Number of samples re-inserted by the repair.
    pub repaired: usize,
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Random-missing draw over `n_views` complete views of `n` samples.
///
/// Every view independently keeps `round((1 - rate) * n)` uniformly chosen
/// instances. A sample left with no view is then re-inserted into one
/// uniformly chosen view, so repair only ever adds instances.
pub fn random_missing_availability(
    n: usize,
    n_views: usize,
    rate: f64,
    seed: u64,
) -> Result<MaskDraw> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::InvalidParameter(format!(
            "mask rate {rate} outside [0, 1]"
        )));
    }
    if rate >= 1.0 {
        return Err(Error::InfeasibleMask(
            "missing rate 1 removes every instance; at least one view per sample cannot hold"
                .into(),
        ));
    }
    let keep = round_half_up((1.0 - rate) * n as f64).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kept = vec![vec![false; n]; n_views];
    for row in kept.iter_mut() {
        for i in index::sample(&mut rng, n, keep) {
            row[i] = true;
        }
    }
    let retained_before_repair = vec![keep; n_views];
    let mut repaired = 0;
    for i in 0..n {
        if !kept.iter().any(|row| row[i]) {
            let v = rng.random_range(0..n_views);
            kept[v][i] = true;
            repaired += 1;
        }
    }
    let availability: Vec<Vec<usize>> = kept
        .iter()
        .map(|row| (0..n).filter(|&i| row[i]).collect())
        .collect();
    if let Some(v) = availability.iter().position(|a| a.is_empty()) {
        return Err(Error::InfeasibleMask(format!(
            "view {v} keeps no instances at missing rate {rate} with n = {n}"
        )));
    }
    Ok(MaskDraw {
        availability,
        retained_before_repair,
        repaired,
    })
}

/// Paired-sample draw for two complete views of `n` samples.
///
/// `round(rate * n)` samples keep both views. The rest are shuffled and split
/// so the per-view counts differ by at most one.
pub fn paired_sample_availability(
    n: usize,
    n_views: usize,
    rate: f64,
    seed: u64,
) -> Result<MaskDraw> {
    if n_views != 2 {
        return Err(Error::UnsupportedProtocol(format!(
            "paired-sample masks need exactly 2 views, got {n_views}"
        )));
    }
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::InvalidParameter(format!(
            "mask rate {rate} outside [0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let paired = round_half_up(rate * n as f64).min(n);
    let (both, rest) = order.split_at(paired);
    // rest is already a uniform shuffle; alternate views over it
    let mut availability = vec![both.to_vec(), both.to_vec()];
    for (k, &i) in rest.iter().enumerate() {
        availability[k % 2].push(i);
    }
    for a in availability.iter_mut() {
        a.sort_unstable();
    }
    if let Some(v) = availability.iter().position(|a| a.is_empty()) {
        return Err(Error::InfeasibleMask(format!(
            "view {v} keeps no instances"
        )));
    }
    let retained_before_repair = availability.iter().map(Vec::len).collect();
    Ok(MaskDraw {
        availability,
        retained_before_repair,
        repaired: 0,
    })
}

fn require_complete(full: &MultiViewDataset) -> Result<()> {
    if !full.is_complete() {
        return Err(Error::InvalidAvailability(
            "masks must be applied to a dataset with all views complete".into(),
        ));
    }
    Ok(())
}

pub fn apply_random_missing_mask(
    full: &MultiViewDataset,
    spec: &MaskSpec,
) -> Result<MultiViewDataset> {
    if spec.protocol != MaskProtocol::RandomMissing {
        return Err(Error::UnsupportedProtocol(
            "expected a random-missing mask spec".into(),
        ));
    }
    require_complete(full)?;
    let draw = random_missing_availability(full.n_samples(), full.n_views(), spec.rate, spec.seed)?;
    full.select(draw.availability)
}

pub fn apply_paired_sample_mask(
    full: &MultiViewDataset,
    spec: &MaskSpec,
) -> Result<MultiViewDataset> {
    if spec.protocol != MaskProtocol::PairedSample {
        return Err(Error::UnsupportedProtocol(
            "expected a paired-sample mask spec".into(),
        ));
    }
    require_complete(full)?;
    let draw = paired_sample_availability(full.n_samples(), full.n_views(), spec.rate, spec.seed)?;
    full.select(draw.availability)
}

pub fn apply_mask(full: &MultiViewDataset, spec: &MaskSpec) -> Result<MultiViewDataset> {
    match spec.protocol {
        MaskProtocol::RandomMissing => apply_random_missing_mask(full, spec),
        MaskProtocol::PairedSample => apply_paired_sample_mask(full, spec),
    }
}
