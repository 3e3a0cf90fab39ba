//! Built-in mechanisms used as attack targets and baselines, and the selector
//! syntax that names them.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::optcore::opt_makespan;
use crate::schedmodel::{Allocation, ExternalMechanism, Instance, Mechanism, MechanismError, MechanismHandle};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SelectorError {
    #[error("unknown mechanism selector `{0}`")]
    Unknown(String),
    #[error("bad parameter in selector `{selector}`: {reason}")]
    BadParameter { selector: String, reason: String },
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
}

/// Each job to its cheapest player; ties to the lowest index.
pub fn minwork_allocate(t: &Instance) -> Result<Allocation, MechanismError> {
    let owner = (1..=t.m())
        .map(|j| {
            (1..=t.n())
                .filter(|&i| t.cost(i, j).is_finite())
                .min_by(|&p, &q| t.cost(p, j).cmp(t.cost(q, j)).then(p.cmp(&q)))
                .ok_or_else(|| MechanismError::Unallocatable(format!("job {j} has no finite cost")))
        })
        .collect::<Result<_, _>>()?;
    Ok(Allocation::new(owner))
}

/// The lexicographically smallest makespan-optimal allocation.
pub fn optmakespan_allocate(t: &Instance) -> Result<Allocation, MechanismError> {
    opt_makespan(t, &BTreeSet::new()).map(|r| r.witness).map_err(|e| MechanismError::Unallocatable(e.to_string()))
}

/// Every job to player `d`, regardless of cost.
pub fn dictator_allocate(t: &Instance, d: usize) -> Allocation {
    Allocation::new(vec![d; t.m()])
}

/// A seeded, deterministic but otherwise arbitrary allocation.
///
/// Each job goes to a pseudo-random finite-cost player, or with probability 1/16 to
/// any player. The choice depends only on the seed and the instance.
pub fn random_allocate(t: &Instance, seed: u64) -> Allocation {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(t.to_json().as_bytes());
    let digest: [u8; 32] = hasher.finalize().into();
    let mut rng = ChaCha8Rng::from_seed(digest);
    let owner = (1..=t.m())
        .map(|j| {
            let active = t.active_players(j);
            if active.is_empty() || rng.gen_ratio(1, 16) {
                rng.gen_range(1..=t.n())
            } else {
                active[rng.gen_range(0..active.len())]
            }
        })
        .collect();
    Allocation::new(owner)
}

/// The built-in mechanisms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Builtin {
    MinWork,
    OptMakespan,
    Dictator(usize),
    Random(u64),
}

impl Mechanism for Builtin {
    fn allocate(&mut self, t: &Instance) -> Result<Allocation, MechanismError> {
        match self {
            Builtin::MinWork => minwork_allocate(t),
            Builtin::OptMakespan => optmakespan_allocate(t),
            Builtin::Dictator(d) if *d > t.n() => Err(MechanismError::Unallocatable(format!("dictator {d} exceeds n = {}", t.n()))),
            Builtin::Dictator(d) => Ok(dictator_allocate(t, *d)),
            Builtin::Random(seed) => Ok(random_allocate(t, *seed)),
        }
    }

    fn describe(&self) -> String {
        match self {
            Builtin::MinWork => "minwork".into(),
            Builtin::OptMakespan => "optmakespan".into(),
            Builtin::Dictator(d) => format!("dictator:{d}"),
            Builtin::Random(seed) => format!("random:{seed}"),
        }
    }

    fn try_clone(&self) -> Result<Box<dyn Mechanism>, MechanismError> {
        Ok(Box::new(self.clone()))
    }
}

/// Parses `minwork`, `optmakespan`, `dictator:<i>`, `random:<seed>` or `extern:<command>`.
pub fn parse_builtin(selector: &str) -> Result<Option<Builtin>, SelectorError> {
    let bad = |reason: &str| SelectorError::BadParameter { selector: selector.into(), reason: reason.into() };
    let (name, param) = match selector.split_once(':') {
        Some((n, p)) => (n, Some(p)),
        None => (selector, None),
    };
    Ok(Some(match (name, param) {
        ("minwork", None) => Builtin::MinWork,
        ("optmakespan", None) => Builtin::OptMakespan,
        ("dictator", Some(p)) => match p.trim().parse::<usize>() {
            Ok(d) if d >= 1 => Builtin::Dictator(d),
            _ => return Err(bad("player index must be a positive integer")),
        },
        ("random", Some(p)) => Builtin::Random(p.trim().parse().map_err(|_| bad("seed must be an unsigned integer"))?),
        ("extern", Some(_)) => return Ok(None),
        _ => return Err(SelectorError::Unknown(selector.into())),
    }))
}

/// Opens a mechanism from its selector string.
pub fn open(selector: &str) -> Result<MechanismHandle, SelectorError> {
    match parse_builtin(selector)? {
        Some(b) => Ok(MechanismHandle::new(Box::new(b))),
        None => {
            let cmd = selector.split_once(':').map(|(_, c)| c).unwrap_or_default();
            if cmd.trim().is_empty() {
                return Err(SelectorError::BadParameter { selector: selector.into(), reason: "empty command".into() });
            }
            Ok(MechanismHandle::new(Box::new(ExternalMechanism::spawn(cmd)?)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::TieredValue;

    fn inst(rows: &[&[&str]]) -> Instance {
        let costs = rows.iter().map(|r| r.iter().map(|s| s.parse().unwrap()).collect()).collect();
        Instance::new(costs, Default::default()).unwrap()
    }

    #[test]
    fn minwork_examples() {
        let d = inst(&[&["1", "1e2"], &["1", "1e1"]]);
        assert_eq!(minwork_allocate(&d).unwrap().owner, vec![1, 1]);
        let e = inst(&[&["inf", "26589/10000", "1e1"], &["22055/10000", "inf", "inf"], &["1", "22055/10000", "1e2"]]);
        assert_eq!(minwork_allocate(&e).unwrap().owner, vec![3, 3, 3]);
        let unique = inst(&[&["inf"], &["5"], &["inf"]]);
        assert_eq!(minwork_allocate(&unique).unwrap().owner, vec![2]);
        assert!(minwork_allocate(&inst(&[&["inf"], &["inf"]])).is_err());
    }

    #[test]
    fn optmakespan_examples() {
        assert_eq!(optmakespan_allocate(&inst(&[&["1", "1"], &["2", "2"]])).unwrap().owner, vec![1, 1]);
        assert_eq!(optmakespan_allocate(&inst(&[&["3"], &["2"]])).unwrap().owner, vec![2]);
        let mut diag = inst(&[&["1", "inf"], &["inf", "1"]]);
        diag.mark_dummy(1, 1).unwrap();
        diag.mark_dummy(2, 2).unwrap();
        assert_eq!(optmakespan_allocate(&diag).unwrap().owner, vec![1, 2]);
    }

    #[test]
    fn dictator_and_selectors() {
        let t = inst(&[&["1", "2", "3"], &["1", "1", "1"]]);
        assert_eq!(dictator_allocate(&t, 1).owner, vec![1, 1, 1]);
        assert_eq!(dictator_allocate(&inst(&[&["1", "1"]]), 1).owner, vec![1, 1]);
        assert_eq!(parse_builtin("dictator:2").unwrap(), Some(Builtin::Dictator(2)));
        assert_eq!(parse_builtin("random:7").unwrap(), Some(Builtin::Random(7)));
        assert_eq!(parse_builtin("extern:cat").unwrap(), None);
        assert!(parse_builtin("dictator:0").is_err());
        assert!(parse_builtin("vcg").is_err());
        assert_eq!(open("optmakespan").unwrap().describe(), "optmakespan");
    }

    #[test]
    fn random_is_deterministic() {
        let t = inst(&[&["1", "2", "3", "inf"], &["1", "1", "1", "1"], &["2", "inf", "1", "4"]]);
        let a = random_allocate(&t, 11);
        assert_eq!(a, random_allocate(&t, 11));
        assert_eq!(a.owner.len(), 4);
        let t2 = t.with_cost(1, 1, TieredValue::from_int(9)).unwrap();
        let differs = (0..32).any(|s| random_allocate(&t, s) != random_allocate(&t2, s));
        assert!(differs);
    }
}
