use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    gelman_rubin, BrlConfig, BrlError, Chain, Proposal, RuleList, RuleSpace, StandardMoves,
};
use crate::dataset::CategoricalDataset;
use crate::rule::Rule;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIterations,
    /// One chain cannot be checked for convergence; it runs to `max_iters`.
    SingleChain,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `(iterations per chain, R̂)` at every check.
    pub rhat_history: Vec<(usize, f64)>,
    pub iterations: usize,
    pub n_chains: usize,
    pub acceptance_rate: f64,
    pub stop_reason: StopReason,
    pub best_log_posterior: f64,
}

impl Diagnostics {
    pub fn converged(&self) -> bool {
        self.stop_reason == StopReason::Converged
    }

    pub fn final_rhat(&self) -> Option<f64> {
        self.rhat_history.last().map(|&(_, r)| r)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainOutcome {
    pub rule_list: RuleList,
    pub diagnostics: Diagnostics,
}

pub fn train(
    dataset: &CategoricalDataset,
    mined: &[Rule],
    config: &BrlConfig,
) -> Result<TrainOutcome, BrlError> {
    train_with(dataset, mined, config, &StandardMoves)
}

/// Runs `config.n_chains` chains in lockstep segments of `check_interval`
/// iterations until R̂ of their log-posterior traces reaches the threshold or
/// `max_iters` is spent, then returns the best thinned sample from the second
/// half of any chain.
pub fn train_with(
    dataset: &CategoricalDataset,
    mined: &[Rule],
    config: &BrlConfig,
    proposal: &dyn Proposal,
) -> Result<TrainOutcome, BrlError> {
    if mined.is_empty() {
        return Err(BrlError::NoRules);
    }
    let space = RuleSpace::new(dataset, mined.to_vec(), config)?;
    let mut chains: Vec<Chain> = (0..config.n_chains)
        .map(|c| {
            Chain::new(
                &space,
                proposal,
                config.seed.wrapping_add(c as u64),
                config.thin,
            )
        })
        .collect();

    let mut iterations = 0;
    let mut rhat_history = Vec::new();
    let mut stop_reason = None;
    while iterations < config.max_iters {
        let step = config.check_interval.min(config.max_iters - iterations);
        if config.parallel {
            chains.par_iter_mut().try_for_each(|c| c.advance(step))?;
        } else {
            chains.iter_mut().try_for_each(|c| c.advance(step))?;
        }
        iterations += step;
        if chains.len() >= 2 && iterations >= 4 {
            let traces: Vec<&[f64]> = chains
                .iter()
                .map(|c| c.trace().log_posteriors.as_slice())
                .collect();
            let rhat = gelman_rubin(&traces)?;
            rhat_history.push((iterations, rhat));
            if rhat <= config.rhat_threshold {
                stop_reason = Some(StopReason::Converged);
                break;
            }
        }
    }
    let stop_reason = stop_reason.unwrap_or(if chains.len() < 2 {
        StopReason::SingleChain
    } else {
        StopReason::MaxIterations
    });

    let burn_in = iterations / 2;
    let mut best: Option<(&[usize], f64)> = None;
    for chain in &chains {
        for s in chain
            .trace()
            .samples
            .iter()
            .filter(|s| s.iteration > burn_in)
        {
            if best.is_none_or(|(_, lp)| s.log_posterior > lp) {
                best = Some((&s.state, s.log_posterior));
            }
        }
    }
    if best.is_none() {
        // Too few iterations to thin into the second half: use final states.
        for chain in &chains {
            if best.is_none_or(|(_, lp)| chain.log_posterior() > lp) {
                best = Some((chain.state(), chain.log_posterior()));
            }
        }
    }
    let (state, best_log_posterior) = best.expect("at least one chain");
    let rules = state.iter().map(|&i| space.rules()[i].clone()).collect();
    let rule_list = RuleList::fit(rules, dataset, space.alpha().to_vec());

    let accepted: usize = chains.iter().map(|c| c.trace().accepted).sum();
    let total = iterations * chains.len();
    let diagnostics = Diagnostics {
        rhat_history,
        iterations,
        n_chains: chains.len(),
        acceptance_rate: if total == 0 {
            0.0
        } else {
            accepted as f64 / total as f64
        },
        stop_reason,
        best_log_posterior,
    };
    Ok(TrainOutcome {
        rule_list,
        diagnostics,
    })
}
