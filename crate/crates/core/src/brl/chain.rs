use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BrlConfig, BrlError, Proposal, RuleSpace, StandardMoves};
use crate::dataset::CategoricalDataset;
use crate::rule::Rule;

/// A stored chain state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// 1-based iteration after which the state was recorded.
    pub iteration: usize,
    pub state: Vec<usize>,
    pub log_posterior: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ChainTrace {
    /// Log posterior of the current state after every iteration.
    pub log_posteriors: Vec<f64>,
    /// Every `thin`-th state.
    pub samples: Vec<Sample>,
    pub accepted: usize,
}

impl ChainTrace {
    pub fn iterations(&self) -> usize {
        self.log_posteriors.len()
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.log_posteriors.is_empty() {
            0.0
        } else {
            self.accepted as f64 / self.log_posteriors.len() as f64
        }
    }
}

/// One Metropolis–Hastings chain that can be advanced in segments.
pub struct Chain<'a> {
    space: &'a RuleSpace,
    proposal: &'a dyn Proposal,
    rng: ChaCha8Rng,
    state: Vec<usize>,
    log_posterior: f64,
    thin: usize,
    trace: ChainTrace,
}

impl<'a> Chain<'a> {
    /// Starts from a draw of the prior.
    pub fn new(space: &'a RuleSpace, proposal: &'a dyn Proposal, seed: u64, thin: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let state = space.sample_prior(&mut rng);
        let log_posterior = space.log_posterior(&state);
        Self {
            space,
            proposal,
            rng,
            state,
            log_posterior,
            thin: thin.max(1),
            trace: ChainTrace::default(),
        }
    }

    pub fn advance(&mut self, iters: usize) -> Result<(), BrlError> {
        let n_rules = self.space.n_rules();
        let max_len = self.space.max_len();
        self.trace.log_posteriors.reserve(iters);
        for _ in 0..iters {
            let (candidate, log_q_ratio) =
                self.proposal
                    .propose(&self.state, n_rules, max_len, &mut self.rng)?;
            let candidate_lp = self.space.log_posterior(&candidate);
            let u: f64 = self.rng.random();
            if u.ln() < candidate_lp - self.log_posterior + log_q_ratio {
                self.state = candidate;
                self.log_posterior = candidate_lp;
                self.trace.accepted += 1;
            }
            self.trace.log_posteriors.push(self.log_posterior);
            let iteration = self.trace.log_posteriors.len();
            if iteration.is_multiple_of(self.thin) {
                self.trace.samples.push(Sample {
                    iteration,
                    state: self.state.clone(),
                    log_posterior: self.log_posterior,
                });
            }
        }
        Ok(())
    }

    pub fn state(&self) -> &[usize] {
        &self.state
    }

    pub fn log_posterior(&self) -> f64 {
        self.log_posterior
    }

    pub fn trace(&self) -> &ChainTrace {
        &self.trace
    }

    pub fn into_trace(self) -> ChainTrace {
        self.trace
    }
}

/// Runs a single chain for `config.max_iters` iterations.
pub fn run_chain(
    dataset: &CategoricalDataset,
    mined: &[Rule],
    config: &BrlConfig,
    chain_seed: u64,
) -> Result<ChainTrace, BrlError> {
    if mined.is_empty() {
        return Err(BrlError::NoRules);
    }
    let space = RuleSpace::new(dataset, mined.to_vec(), config)?;
    let mut chain = Chain::new(&space, &StandardMoves, chain_seed, config.thin);
    chain.advance(config.max_iters)?;
    Ok(chain.into_trace())
}
