//! Finite-shot simulation of photon counting behind the gadget.
//!
//! Every setting of a campaign draws from its own ChaCha8 stream: the key
//! comes from the campaign seed and the stream number is the setting's
//! position in the plan, so results do not depend on thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{apply_two_mode_unitary, photon_number_distribution, FixedNState};
use crate::gadget::{gadget_unitary, MeasurementSetting};
use crate::math::falling_factorial;
use crate::recipe::{MeasurementRecord, SettingsPlan};

/// Recorded in output files next to the seed.
pub const RNG_ALGORITHM: &str = "chacha8-seed_from_u64-stream";

/// Photon counts in port `b1` over `shots` repetitions.
#[derive(Debug, Clone, PartialEq)]
pub struct CountHistogram {
    pub setting: MeasurementSetting,
    pub shots: u64,
    /// `counts[n]` is how often `n` photons were seen, `n = 0..=N`.
    pub counts: Vec<u64>,
}

/// Mean and standard error of an estimated moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub value: f64,
    pub stderr: f64,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn sample(probs: &[f64], shots: u64, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in probs {
        acc += p;
        cdf.push(acc);
    }
    // absorb rounding so every draw lands on an outcome with support
    let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1);
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..shots {
        let u: f64 = rng.random::<f64>() * acc;
        let n = cdf.iter().position(|&c| u < c).unwrap_or(last).min(last);
        counts[n] += 1;
    }
    counts
}

fn simulate_on_stream(
    state: &FixedNState,
    setting: MeasurementSetting,
    shots: u64,
    seed: u64,
    stream: u64,
) -> Result<CountHistogram> {
    if shots == 0 {
        return Err(Error::Range { what: "shots", detail: "at least one shot is needed".into() });
    }
    let out = apply_two_mode_unitary(state, &gadget_unitary(&setting))?;
    let probs = photon_number_distribution(&out);
    let counts = sample(&probs, shots, &mut rng_for(seed, stream));
    Ok(CountHistogram { setting, shots, counts })
}

/// Counts behind the gadget, reproducible from `seed`.
pub fn simulate_counts(
    state: &FixedNState,
    setting: MeasurementSetting,
    shots: u64,
    seed: u64,
) -> Result<CountHistogram> {
    simulate_on_stream(state, setting, shots, seed, 0)
}

/// Sample mean of `n(n−1)…(n−N+1)` and its standard error.
pub fn estimate_moment(hist: &CountHistogram, order: usize) -> MomentEstimate {
    let shots = hist.shots as f64;
    let stat: Vec<(f64, f64)> =
        hist.counts.iter().enumerate().map(|(n, &c)| (falling_factorial(n, order), c as f64)).collect();
    let mean = stat.iter().map(|(f, c)| f * c).sum::<f64>() / shots;
    let stderr = if hist.shots > 1 {
        let ss: f64 = stat.iter().map(|(f, c)| c * (f - mean).powi(2)).sum();
        (ss / (shots - 1.0)).sqrt() / shots.sqrt()
    } else {
        0.0
    };
    MomentEstimate { value: mean, stderr }
}

/// One estimated record per plan setting, in plan order.
pub fn run_campaign(state: &FixedNState, plan: &SettingsPlan, shots: u64, seed: u64) -> Result<Vec<MeasurementRecord>> {
    if state.photons() != plan.order {
        return Err(Error::Dimension { expected: plan.order + 1, actual: state.dim() });
    }
    plan.settings
        .par_iter()
        .enumerate()
        .map(|(i, &setting)| {
            let hist = simulate_on_stream(state, setting, shots, seed, i as u64)?;
            let est = estimate_moment(&hist, plan.order);
            Ok(MeasurementRecord::estimated(setting, est.value, est.stderr))
        })
        .collect()
}
