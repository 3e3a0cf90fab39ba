//! Exact optimization oracles: optimal makespan by branch-and-bound and the
//! β-unbalance of an allocation with respect to a player.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::exactnum::{leading_ratio, Ratio, TieredValue};
use crate::schedmodel::{load, makespan, validate_allocation, Allocation, Instance};

/// Search-space guard for [`opt_makespan`]: product of per-job branching factors.
pub const OPT_SEARCH_LIMIT: u128 = 100_000_000;

/// Enumeration guard for [`beta_unbalance`].
pub const BETA_SEARCH_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OptError {
    #[error("job {job} has no allowed active player")]
    NoAllowedPlayer { job: usize },
    #[error("search space of {size} nodes exceeds the budget of {limit}")]
    BudgetExceeded { size: u128, limit: u128 },
    #[error("player {player} does not dictate the makespan of the allocation")]
    NotDictating { player: usize },
    #[error("allocation is invalid for the instance")]
    InvalidAllocation,
}

/// Optimal makespan with a lexicographically smallest optimal witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OptResult {
    pub value: TieredValue,
    pub witness: Allocation,
    pub explored: u64,
}

fn allowed_players(t: &Instance, forbidden: &BTreeSet<usize>) -> Result<Vec<Vec<usize>>, OptError> {
    (1..=t.m())
        .map(|j| {
            let ps: Vec<usize> = t.active_players(j).into_iter().filter(|p| !forbidden.contains(p)).collect();
            if ps.is_empty() {
                Err(OptError::NoAllowedPlayer { job: j })
            } else {
                Ok(ps)
            }
        })
        .collect()
}

fn search_size(options: &[Vec<usize>]) -> u128 {
    options.iter().fold(1u128, |acc, o| acc.saturating_mul(o.len() as u128))
}

/// Minimum makespan over allocations that avoid `forbidden` players.
pub fn opt_makespan(t: &Instance, forbidden: &BTreeSet<usize>) -> Result<OptResult, OptError> {
    opt_makespan_with_limit(t, forbidden, OPT_SEARCH_LIMIT)
}

/// [`opt_makespan`] with an explicit search-space guard.
pub fn opt_makespan_with_limit(t: &Instance, forbidden: &BTreeSet<usize>, limit: u128) -> Result<OptResult, OptError> {
    let options = allowed_players(t, forbidden)?;
    let size = search_size(&options);
    if size > limit {
        return Err(OptError::BudgetExceeded { size, limit });
    }
    let mut search = Search { t, options: &options, explored: 0 };

    let min_cost = |j: usize| options[j - 1].iter().map(|&p| t.cost(p, j).clone()).min().expect("nonempty");
    let mut order: Vec<usize> = (1..=t.m()).collect();
    order.sort_by(|&a, &b| min_cost(b).cmp(&min_cost(a)).then(a.cmp(&b)));

    let mut loads = vec![TieredValue::zero(); t.n() + 1];
    for &j in &order {
        let p = *options[j - 1]
            .iter()
            .min_by(|&&p, &&q| (&loads[p] + t.cost(p, j)).cmp(&(&loads[q] + t.cost(q, j))))
            .expect("nonempty");
        loads[p] = &loads[p] + t.cost(p, j);
    }
    let greedy = loads.iter().max().cloned().unwrap_or_default();

    let mut best = greedy;
    let mut loads = vec![TieredValue::zero(); t.n() + 1];
    search.improve(&order, 0, &mut loads, &TieredValue::zero(), &mut best);

    let mut owner = vec![0; t.m()];
    let mut loads = vec![TieredValue::zero(); t.n() + 1];
    let found = search.lex_first(1, &mut loads, &best, &mut owner);
    debug_assert!(found, "an allocation achieving the optimum exists");
    let witness = Allocation::new(owner);
    debug_assert_eq!(makespan(t, &witness), best);
    Ok(OptResult { value: best, witness, explored: search.explored })
}

struct Search<'a> {
    t: &'a Instance,
    options: &'a [Vec<usize>],
    explored: u64,
}

impl Search<'_> {
    /// Lowers `best` to the optimum; prunes partial assignments whose max load reaches it.
    fn improve(&mut self, order: &[usize], depth: usize, loads: &mut [TieredValue], cur_max: &TieredValue, best: &mut TieredValue) {
        self.explored += 1;
        if depth == order.len() {
            if cur_max < best {
                *best = cur_max.clone();
            }
            return;
        }
        let j = order[depth];
        let mut choices: Vec<usize> = self.options[j - 1].clone();
        choices.sort_by(|&p, &q| self.t.cost(p, j).cmp(self.t.cost(q, j)).then(p.cmp(&q)));
        for p in choices {
            let new_load = &loads[p] + self.t.cost(p, j);
            let new_max = if &new_load > cur_max { new_load.clone() } else { cur_max.clone() };
            if &new_max >= best {
                continue;
            }
            let saved = std::mem::replace(&mut loads[p], new_load);
            self.improve(order, depth + 1, loads, &new_max, best);
            loads[p] = saved;
        }
    }

    /// Finds the lexicographically smallest owner vector with makespan at most `bound`.
    fn lex_first(&mut self, j: usize, loads: &mut [TieredValue], bound: &TieredValue, owner: &mut [usize]) -> bool {
        self.explored += 1;
        if j > self.t.m() {
            return true;
        }
        for &p in &self.options[j - 1] {
            let new_load = &loads[p] + self.t.cost(p, j);
            if &new_load > bound {
                continue;
            }
            let saved = std::mem::replace(&mut loads[p], new_load);
            owner[j - 1] = p;
            if self.lex_first(j + 1, loads, bound, owner) {
                return true;
            }
            loads[p] = saved;
        }
        false
    }
}

/// Allocations respecting dummies and active players, in lexicographic owner order.
pub(crate) fn for_each_allocation(options: &[Vec<usize>], mut visit: impl FnMut(&Allocation)) {
    let mut idx = vec![0usize; options.len()];
    let mut x = Allocation::new(options.iter().map(|o| o[0]).collect());
    loop {
        visit(&x);
        let mut k = options.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < options[k].len() {
                x.owner[k] = options[k][idx[k]];
                break;
            }
            idx[k] = 0;
            x.owner[k] = options[k][0];
        }
    }
}

/// β-unbalance of `a` with respect to the makespan-dictating player `i`.
///
/// Returns the maximum over admissible `A′` of
/// `leading_ratio(load_i(A) − load_i(A′), makespan(A′))` and the first maximizer.
pub fn beta_unbalance(t: &Instance, a: &Allocation, i: usize) -> Result<(Ratio, Allocation), OptError> {
    validate_allocation(t, a).map_err(|_| OptError::InvalidAllocation)?;
    let li = load(t, a, i);
    if li.is_infinite() || li != makespan(t, a) {
        return Err(OptError::NotDictating { player: i });
    }
    let options: Vec<Vec<usize>> = (1..=t.m())
        .map(|j| match t.dummy_owner(j) {
            Some(o) => Ok(vec![o]),
            None => {
                let ps = t.active_players(j);
                if ps.is_empty() {
                    Err(OptError::NoAllowedPlayer { job: j })
                } else {
                    Ok(ps)
                }
            }
        })
        .collect::<Result<_, _>>()?;
    let size = search_size(&options);
    if size > BETA_SEARCH_LIMIT {
        return Err(OptError::BudgetExceeded { size, limit: BETA_SEARCH_LIMIT });
    }
    let mut best: Option<(Ratio, Allocation)> = None;
    for_each_allocation(&options, |ap| {
        let den = makespan(t, ap);
        let num = li.checked_sub(&load(t, ap, i)).expect("finite loads");
        let beta = if den.is_zero() {
            if num.signum() == std::cmp::Ordering::Greater {
                Ratio::Unbounded
            } else {
                return;
            }
        } else {
            leading_ratio(&num, &den).expect("positive finite makespan")
        };
        if best.as_ref().is_none_or(|(b, _)| &beta > b) {
            best = Some((beta, ap.clone()));
        }
    });
    best.ok_or(OptError::InvalidAllocation)
}
