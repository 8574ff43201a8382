use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::BrlError;

/// One edit of a rule list. Positions index the list; `rule` indexes the
/// mined rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Move {
    Insert { rule: usize, position: usize },
    Remove { position: usize },
    Swap { i: usize, j: usize },
}

impl Move {
    pub fn apply(self, state: &[usize]) -> Vec<usize> {
        let mut next = state.to_vec();
        match self {
            Move::Insert { rule, position } => next.insert(position, rule),
            Move::Remove { position } => {
                next.remove(position);
            }
            Move::Swap { i, j } => next.swap(i, j),
        }
        next
    }
}

/// Draws a candidate list and the log ratio `ln q(s | s') − ln q(s' | s)`.
pub trait Proposal: Send + Sync {
    fn propose(
        &self,
        state: &[usize],
        n_rules: usize,
        max_len: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<(Vec<usize>, f64), BrlError>;
}

/// Insert, remove or swap, picked uniformly among the move types valid for
/// the current list.
#[derive(Clone, Copy, Debug, Default)]
pub struct StandardMoves;

/// Always proposes the current state.
#[derive(Clone, Copy, Debug, Default)]
pub struct StayPut;

/// Number of move types available from a list of length `m`.
pub(crate) fn valid_move_types(m: usize, max_len: usize) -> usize {
    usize::from(m < max_len) + usize::from(m >= 1) + usize::from(m >= 2)
}

impl StandardMoves {
    pub fn draw(
        &self,
        state: &[usize],
        n_rules: usize,
        max_len: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<(Move, f64), BrlError> {
        let m = state.len();
        let max_len = max_len.min(n_rules);
        let types = valid_move_types(m, max_len);
        if types == 0 {
            return Err(BrlError::NoValidMove);
        }
        let mut pick = rng.random_range(0..types);
        if m < max_len {
            if pick == 0 {
                let unused: Vec<usize> = (0..n_rules).filter(|r| !state.contains(r)).collect();
                let rule = unused[rng.random_range(0..unused.len())];
                let position = rng.random_range(0..=m);
                let back = valid_move_types(m + 1, max_len);
                let ratio = (types as f64 * (n_rules - m) as f64 / back as f64).ln();
                return Ok((Move::Insert { rule, position }, ratio));
            }
            pick -= 1;
        }
        if pick == 0 {
            let position = rng.random_range(0..m);
            let back = valid_move_types(m - 1, max_len);
            let ratio = (types as f64 / (back as f64 * (n_rules - m + 1) as f64)).ln();
            return Ok((Move::Remove { position }, ratio));
        }
        let i = rng.random_range(0..m);
        let mut j = rng.random_range(0..m - 1);
        if j >= i {
            j += 1;
        }
        Ok((
            Move::Swap {
                i: i.min(j),
                j: i.max(j),
            },
            0.0,
        ))
    }
}

impl Proposal for StandardMoves {
    fn propose(
        &self,
        state: &[usize],
        n_rules: usize,
        max_len: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<(Vec<usize>, f64), BrlError> {
        let (mv, ratio) = self.draw(state, n_rules, max_len, rng)?;
        Ok((mv.apply(state), ratio))
    }
}

impl Proposal for StayPut {
    fn propose(
        &self,
        state: &[usize],
        _: usize,
        _: usize,
        _: &mut ChaCha8Rng,
    ) -> Result<(Vec<usize>, f64), BrlError> {
        Ok((state.to_vec(), 0.0))
    }
}

/// Convenience wrapper around [`StandardMoves`].
pub fn propose(
    state: &[usize],
    n_rules: usize,
    max_len: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<usize>, f64), BrlError> {
    StandardMoves.propose(state, n_rules, max_len, rng)
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use rand::SeedableRng;

    use super::*;
    use crate::brl::{BrlConfig, RuleSpace};
    use crate::dataset::tests::schema;
    use crate::dataset::{CategoricalDataset, Literal};
    use crate::rule::Rule;

    #[test]
    fn empty_state_only_inserts() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let (mv, _) = StandardMoves.draw(&[], 3, 3, &mut rng).unwrap();
            assert!(matches!(mv, Move::Insert { position: 0, .. }));
        }
    }

    #[test]
    fn full_state_never_inserts() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let (mv, _) = StandardMoves.draw(&[2, 0, 1], 3, 3, &mut rng).unwrap();
            assert!(!matches!(mv, Move::Insert { .. }));
        }
    }

    #[test]
    fn nothing_to_do_is_an_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(propose(&[], 0, 0, &mut rng), Err(BrlError::NoValidMove));
    }

    /// Every list of distinct indices from `0..n` with length at most `max_len`.
    fn all_states(n: usize, max_len: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        let mut frontier = vec![vec![]];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for s in &frontier {
                for r in (0..n).filter(|r| !s.contains(r)) {
                    let mut t: Vec<usize> = s.clone();
                    t.push(r);
                    next.push(t);
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    /// Exact `q(· | s)` by listing every move with its probability.
    fn transition(s: &[usize], n: usize, max_len: usize) -> HashMap<Vec<usize>, f64> {
        let m = s.len();
        let types = valid_move_types(m, max_len) as f64;
        let mut q = HashMap::new();
        if m < max_len {
            let unused: Vec<usize> = (0..n).filter(|r| !s.contains(r)).collect();
            for &rule in &unused {
                for position in 0..=m {
                    let p = 1.0 / types / unused.len() as f64 / (m + 1) as f64;
                    *q.entry(Move::Insert { rule, position }.apply(s))
                        .or_insert(0.0) += p;
                }
            }
        }
        if m >= 1 {
            for position in 0..m {
                *q.entry(Move::Remove { position }.apply(s)).or_insert(0.0) +=
                    1.0 / types / m as f64;
            }
        }
        if m >= 2 {
            let pairs = (m * (m - 1) / 2) as f64;
            for i in 0..m {
                for j in i + 1..m {
                    *q.entry(Move::Swap { i, j }.apply(s)).or_insert(0.0) += 1.0 / types / pairs;
                }
            }
        }
        q
    }

    #[test]
    fn detailed_balance_on_enumerated_space() {
        let ds = CategoricalDataset::new(
            vec![schema("a", &["p", "q"]), schema("b", &["u", "v"])],
            "y",
            vec!["0".into(), "1".into()],
            vec![0, 0, 0, 1, 1, 0, 1, 1, 0, 0, 1, 1],
            vec![0, 0, 1, 1, 0, 1],
        )
        .unwrap();
        let rules = vec![
            Rule::single(Literal::new(0, 0)),
            Rule::single(Literal::new(1, 1)),
            Rule::new(vec![Literal::new(0, 1), Literal::new(1, 0)]).unwrap(),
        ];
        let space = RuleSpace::new(&ds, rules, &BrlConfig::default()).unwrap();
        let n = space.n_rules();
        let max_len = space.max_len();
        let states = all_states(n, max_len);
        let lp: HashMap<Vec<usize>, f64> = states
            .iter()
            .map(|s| (s.clone(), space.log_posterior(s)))
            .collect();

        // Draw moves and check that the reported ratio is the exact ratio.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for s in &states {
            let q_fwd = transition(s, n, max_len);
            for _ in 0..20 {
                let (t, ratio) = propose(s, n, max_len, &mut rng).unwrap();
                if &t == s {
                    continue;
                }
                let q_back = transition(&t, n, max_len)[s];
                let expected = q_back.ln() - q_fwd[&t].ln();
                assert!((ratio - expected).abs() < 1e-12, "{s:?} -> {t:?}");
            }
        }

        // Flow balance between every pair.
        for s in &states {
            for (t, q_st) in transition(s, n, max_len) {
                if &t == s {
                    continue;
                }
                let q_ts = transition(&t, n, max_len)[s];
                let a_st = (lp[&t] - lp[s] + q_ts.ln() - q_st.ln()).exp().min(1.0);
                let a_ts = (lp[s] - lp[&t] + q_st.ln() - q_ts.ln()).exp().min(1.0);
                let forward = lp[s].exp() * q_st * a_st;
                let backward = lp[&t].exp() * q_ts * a_ts;
                assert!(
                    (forward - backward).abs() <= 1e-12 * forward.max(backward),
                    "{s:?} <-> {t:?}"
                );
            }
        }
    }
}
