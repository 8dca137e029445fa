use rayon::prelude::*;

use crate::copula::{open_unit, CopulaModel};
use crate::rng::{RandomStream, StreamRng};
use crate::{Error, Result};

use super::{ProbabilityEstimate, SelectionProblem};

/// Replications per shard. Shard `k` draws from `stream.substream(k)`, so
/// the estimate does not depend on how shards are spread over threads.
const SHARD: u64 = 4096;

fn check_reps(reps: u64) -> Result<()> {
    if reps == 0 {
        return Err(Error::Precondition("reps must be at least 1".into()));
    }
    Ok(())
}

/// Runs `reps` Bernoulli trials in shards and counts the successes.
fn sharded<F>(reps: u64, stream: RandomStream, trial: F) -> u64
where
    F: Fn(&mut StreamRng, &mut Vec<(f64, f64)>) -> bool + Sync,
{
    let shards = reps.div_ceil(SHARD);
    (0..shards)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream.substream(k).rng();
            let mut buf = Vec::new();
            let count = SHARD.min(reps - k * SHARD);
            (0..count).filter(|_| trial(&mut rng, &mut buf)).count() as u64
        })
        .sum()
}

/// Monte Carlo estimate of the success probability, simulating the selection
/// rule literally: draw `n` pairs, keep the `m` with smallest `u`, succeed if
/// any kept `v ≤ α`. Ties in `u` fall back to draw order.
///
/// Costs `O(n)` per replication; see [`success_montecarlo_order_stats`] for
/// large `n`.
pub fn success_montecarlo(
    model: &CopulaModel,
    prob: &SelectionProblem,
    reps: u64,
    stream: RandomStream,
) -> Result<ProbabilityEstimate> {
    check_reps(reps)?;
    let (n, m, alpha) = (prob.n() as usize, prob.m() as usize, prob.alpha());
    let hits = sharded(reps, stream, |rng, buf| {
        buf.clear();
        buf.extend((0..n).map(|_| model.sample_pair(rng)));
        if m < n {
            // stable order on u, then index, via the position in buf
            let mut idx: Vec<usize> = (0..n).collect();
            idx.select_nth_unstable_by(m - 1, |&a, &b| {
                buf[a].0.total_cmp(&buf[b].0).then(a.cmp(&b))
            });
            idx[..m].iter().any(|&i| buf[i].1 <= alpha)
        } else {
            buf.iter().any(|p| p.1 <= alpha)
        }
    });
    Ok(ProbabilityEstimate::from_counts(hits, reps))
}

/// Monte Carlo estimate that samples only what the selection looks at.
///
/// The `m` smallest of `n` uniforms are generated in increasing order through
/// the Rényi representation, carried as `ln(1 - U₍ₖ₎)` so that values near
/// `1/n` keep full precision even for `n ≈ 10⁹`. Given its observed value,
/// each selected candidate's true value is independent with CDF `C(· | u)`,
/// so a trial succeeds when some uniform `wₖ ≤ C(α | U₍ₖ₎)`. Equal in law to
/// [`success_montecarlo`] at `O(m)` cost per replication.
pub fn success_montecarlo_order_stats(
    model: &CopulaModel,
    prob: &SelectionProblem,
    reps: u64,
    stream: RandomStream,
) -> Result<ProbabilityEstimate> {
    check_reps(reps)?;
    let (n, m) = (prob.n(), prob.m());
    let slice = model.conditional_at(prob.alpha());
    let hits = sharded(reps, stream, |rng, _| {
        let mut ln_survival = 0.0;
        for k in 0..m {
            ln_survival += open_unit(rng).ln() / (n - k) as f64;
            let u = -ln_survival.exp_m1();
            if open_unit(rng) <= slice.cdf(u) {
                return true;
            }
        }
        false
    });
    Ok(ProbabilityEstimate::from_counts(hits, reps))
}

/// Monte Carlo of the threshold rule: every candidate with `u ≤ m/n` is
/// selected, success if any of them has `v ≤ α`.
pub fn threshold_rule_montecarlo(
    model: &CopulaModel,
    prob: &SelectionProblem,
    reps: u64,
    stream: RandomStream,
) -> Result<ProbabilityEstimate> {
    check_reps(reps)?;
    let threshold = prob.m() as f64 / prob.n() as f64;
    let (n, alpha) = (prob.n(), prob.alpha());
    let hits = sharded(reps, stream, |rng, _| {
        let mut hit = false;
        // draw all n pairs so each replication consumes the same stream length
        for _ in 0..n {
            let (u, v) = model.sample_pair(rng);
            hit |= u <= threshold && v <= alpha;
        }
        hit
    });
    Ok(ProbabilityEstimate::from_counts(hits, reps))
}

/// Monte Carlo success probability of selecting the candidates at the given
/// observed ranks (0 is the smallest `u`) instead of the top `m`. With
/// `ranks = None`, `m` ranks are drawn uniformly at random per replication.
pub fn ranked_subset_montecarlo(
    model: &CopulaModel,
    prob: &SelectionProblem,
    ranks: Option<&[usize]>,
    reps: u64,
    stream: RandomStream,
) -> Result<ProbabilityEstimate> {
    check_reps(reps)?;
    let (n, m, alpha) = (prob.n() as usize, prob.m() as usize, prob.alpha());
    if let Some(r) = ranks {
        if r.len() != m || r.iter().any(|&i| i >= n) {
            return Err(Error::Precondition(format!(
                "need {m} distinct ranks below {n}, got {r:?}"
            )));
        }
        let mut sorted = r.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != m {
            return Err(Error::Precondition(format!("ranks must be distinct, got {r:?}")));
        }
    }
    let hits = sharded(reps, stream, |rng, buf| {
        buf.clear();
        buf.extend((0..n).map(|_| model.sample_pair(rng)));
        buf.sort_by(|a, b| a.0.total_cmp(&b.0));
        match ranks {
            Some(r) => r.iter().any(|&i| buf[i].1 <= alpha),
            None => rand::seq::index::sample(rng, n, m).iter().any(|i| buf[i].1 <= alpha),
        }
    });
    Ok(ProbabilityEstimate::from_counts(hits, reps))
}
