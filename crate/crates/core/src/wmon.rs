//! Weak monotonicity: the WMON sum on instance pairs, the four inference lemmas as
//! checked predicates, and a seeded perturbation fuzzer.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactnum::{rat, Rational, TieredValue};
use crate::exec::{map_indices, Exec};
use crate::schedmodel::{Allocation, Instance, MechanismError, MechanismHandle};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WmonError {
    #[error("instances have different shapes")]
    Shape,
    #[error("rows other than player {player} differ: {rows:?}")]
    OtherRowsDiffer { player: usize, rows: Vec<usize> },
    #[error("job {job} is assigned to player {player} at infinite cost")]
    InfiniteAssignment { player: usize, job: usize },
    #[error("lemma hypothesis fails: {0}")]
    Hypothesis(String),
}

/// Value of the WMON sum. A job moving between a finite and an infinite cost
/// contributes `−∞`, which makes the whole sum `−∞`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WmonValue {
    Finite(TieredValue),
    MinusInfinity,
}

impl WmonValue {
    pub fn is_positive(&self) -> bool {
        matches!(self, WmonValue::Finite(v) if v.signum() == Ordering::Greater)
    }
}

impl fmt::Display for WmonValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WmonValue::Finite(v) => write!(f, "{v}"),
            WmonValue::MinusInfinity => f.write_str("-inf"),
        }
    }
}

/// The WMON sum for one player on one instance pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WmonReport {
    pub player: usize,
    pub value: WmonValue,
    pub violated: bool,
    pub skipped_terms: Vec<usize>,
}

fn check_single_row(t: &Instance, tp: &Instance, i: usize) -> Result<(), WmonError> {
    if t.n() != tp.n() || t.m() != tp.m() || i == 0 || i > t.n() {
        return Err(WmonError::Shape);
    }
    let rows: Vec<usize> = t.differing_rows(tp).into_iter().filter(|&r| r != i).collect();
    if rows.is_empty() {
        Ok(())
    } else {
        Err(WmonError::OtherRowsDiffer { player: i, rows })
    }
}

/// `Σ_j (t_i^j − t′_i^j)(x_i^j − x′_i^j)` with the violation flag.
pub fn wmon_value(t: &Instance, x: &Allocation, tp: &Instance, xp: &Allocation, i: usize) -> Result<WmonReport, WmonError> {
    check_single_row(t, tp, i)?;
    if x.owner.len() != t.m() || xp.owner.len() != t.m() {
        return Err(WmonError::Shape);
    }
    let mut sum = TieredValue::zero();
    let mut minus_inf = false;
    let mut skipped = Vec::new();
    for j in 1..=t.m() {
        let (a, b) = (t.cost(i, j), tp.cost(i, j));
        let (g, gp) = (x.gets(i, j), xp.gets(i, j));
        if (g && a.is_infinite()) || (gp && b.is_infinite()) {
            return Err(WmonError::InfiniteAssignment { player: i, job: j });
        }
        if a.is_infinite() && b.is_infinite() {
            skipped.push(j);
            continue;
        }
        if g == gp {
            continue;
        }
        if a.is_infinite() || b.is_infinite() {
            minus_inf = true;
            continue;
        }
        let diff = a.checked_sub(b).expect("finite");
        sum = if g { &sum + &diff } else { &sum + &(-&diff) };
    }
    let value = if minus_inf { WmonValue::MinusInfinity } else { WmonValue::Finite(sum) };
    let violated = value.is_positive();
    Ok(WmonReport { player: i, value, violated, skipped_terms: skipped })
}

/// A lemma application; `F₃` is the complement of the listed jobs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "lemma")]
pub enum LemmaExpectation {
    /// Owned jobs in `f1` decrease, unowned jobs in `f2` increase, the rest are unchanged.
    L1 { player: usize, f1: BTreeSet<usize>, f2: BTreeSet<usize> },
    /// Owned jobs in `j` decrease and one further job `k` decreases; the rest are unchanged.
    /// The single-job case is `j = {j}`.
    L2 { player: usize, j: BTreeSet<usize>, k: usize },
    /// As `L1`, with the player's dummy job changing arbitrarily.
    L3 { player: usize, dummy: usize, f1: BTreeSet<usize>, f2: BTreeSet<usize> },
    /// Two owned jobs: `j1` decreases, `j2` increases; the rest are unchanged.
    L4 { player: usize, j1: usize, j2: usize },
}

impl LemmaExpectation {
    pub fn player(&self) -> usize {
        match self {
            LemmaExpectation::L1 { player, .. }
            | LemmaExpectation::L2 { player, .. }
            | LemmaExpectation::L3 { player, .. }
            | LemmaExpectation::L4 { player, .. } => *player,
        }
    }

    /// Picks the lemma whose hypotheses match the change of row `i` from `t` to `tp`.
    pub fn derive(t: &Instance, x: &Allocation, tp: &Instance, i: usize) -> Option<LemmaExpectation> {
        let (mut f1, mut f2) = (BTreeSet::new(), BTreeSet::new());
        let (mut owned_up, mut unowned_down, mut dummy_change) = (Vec::new(), Vec::new(), None);
        let dummy = t.dummy_of(i).filter(|&d| tp.dummy_of(i) == Some(d));
        for j in 1..=t.m() {
            let (a, b) = (t.cost(i, j), tp.cost(i, j));
            if a == b {
                continue;
            }
            if Some(j) == dummy {
                dummy_change = Some(j);
                continue;
            }
            match (x.gets(i, j), b < a) {
                (true, true) => {
                    f1.insert(j);
                }
                (false, false) => {
                    f2.insert(j);
                }
                (true, false) => owned_up.push(j),
                (false, true) => unowned_down.push(j),
            }
        }
        let clean = owned_up.is_empty() && unowned_down.is_empty();
        if clean {
            return Some(match dummy_change {
                Some(d) => LemmaExpectation::L3 { player: i, dummy: d, f1, f2 },
                None => LemmaExpectation::L1 { player: i, f1, f2 },
            });
        }
        if dummy_change.is_some() {
            return None;
        }
        if owned_up.len() == 1 && f1.len() == 1 && f2.is_empty() && unowned_down.is_empty() {
            return Some(LemmaExpectation::L4 { player: i, j1: *f1.iter().next().unwrap(), j2: owned_up[0] });
        }
        if unowned_down.len() == 1 && owned_up.is_empty() && f2.is_empty() && !f1.is_empty() {
            return Some(LemmaExpectation::L2 { player: i, j: f1, k: unowned_down[0] });
        }
        None
    }
}

impl fmt::Display for LemmaExpectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LemmaExpectation::L1 { player, f1, f2 } => write!(f, "L1(i={player}, F1={f1:?}, F2={f2:?})"),
            LemmaExpectation::L2 { player, j, k } => write!(f, "L2(i={player}, j={j:?}, k={k})"),
            LemmaExpectation::L3 { player, dummy, f1, f2 } => write!(f, "L3(i={player}, dummy={dummy}, F1={f1:?}, F2={f2:?})"),
            LemmaExpectation::L4 { player, j1, j2 } => write!(f, "L4(i={player}, j1={j1}, j2={j2})"),
        }
    }
}

/// A predicted fact about player `i`'s bundle in the new allocation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Constraint {
    Keep { job: usize },
    NotGet { job: usize },
    AtLeastOneOf { jobs: Vec<usize> },
    IfGetThenGet { if_job: usize, then_job: usize },
}

impl Constraint {
    pub fn holds(&self, xp: &Allocation, i: usize) -> bool {
        match self {
            Constraint::Keep { job } => xp.gets(i, *job),
            Constraint::NotGet { job } => !xp.gets(i, *job),
            Constraint::AtLeastOneOf { jobs } => jobs.iter().any(|&j| xp.gets(i, j)),
            Constraint::IfGetThenGet { if_job, then_job } => !xp.gets(i, *if_job) || xp.gets(i, *then_job),
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Keep { job } => write!(f, "keep {job}"),
            Constraint::NotGet { job } => write!(f, "not-get {job}"),
            Constraint::AtLeastOneOf { jobs } => write!(f, "at-least-one-of {jobs:?}"),
            Constraint::IfGetThenGet { if_job, then_job } => write!(f, "if-get {if_job} then get {then_job}"),
        }
    }
}

/// Constraints on player `player`'s bundle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub player: usize,
    pub constraints: Vec<Constraint>,
}

impl ConstraintSet {
    /// Constraints that `xp` breaks.
    pub fn broken(&self, xp: &Allocation) -> Vec<&Constraint> {
        self.constraints.iter().filter(|c| !c.holds(xp, self.player)).collect()
    }

    pub fn satisfied_by(&self, xp: &Allocation) -> bool {
        self.broken(xp).is_empty()
    }
}

impl fmt::Display for ConstraintSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.constraints.iter().map(|c| c.to_string()).collect();
        write!(f, "player {}: {{{}}}", self.player, parts.join(", "))
    }
}

fn hyp(msg: String) -> WmonError {
    WmonError::Hypothesis(msg)
}

fn check_l1_sets(t: &Instance, x: &Allocation, tp: &Instance, i: usize, f1: &BTreeSet<usize>, f2: &BTreeSet<usize>, free: Option<usize>) -> Result<(), WmonError> {
    if let Some(j) = f1.intersection(f2).next() {
        return Err(hyp(format!("job {j} in both F1 and F2")));
    }
    for j in 1..=t.m() {
        let (a, b) = (t.cost(i, j), tp.cost(i, j));
        if Some(j) == free {
            if f1.contains(&j) || f2.contains(&j) {
                return Err(hyp(format!("dummy job {j} listed in F1/F2")));
            }
            continue;
        }
        if f1.contains(&j) {
            if !x.gets(i, j) || a.is_infinite() || b >= a {
                return Err(hyp(format!("F1 job {j} must be owned and strictly decreased")));
            }
        } else if f2.contains(&j) {
            if x.gets(i, j) || a.is_infinite() || b <= a {
                return Err(hyp(format!("F2 job {j} must be unowned and strictly increased")));
            }
        } else if a != b {
            return Err(hyp(format!("F3 job {j} changed from {a} to {b}")));
        }
    }
    Ok(())
}

/// Constraints on `x′ = f(T′)` implied by weak monotonicity (and, for L3, a finite ratio).
pub fn infer(lemma: &LemmaExpectation, t: &Instance, x: &Allocation, tp: &Instance) -> Result<ConstraintSet, WmonError> {
    let i = lemma.player();
    check_single_row(t, tp, i)?;
    let mut out = Vec::new();
    match lemma {
        LemmaExpectation::L1 { f1, f2, .. } => {
            check_l1_sets(t, x, tp, i, f1, f2, None)?;
            out.extend(f1.iter().map(|&job| Constraint::Keep { job }));
            out.extend(f2.iter().map(|&job| Constraint::NotGet { job }));
        }
        LemmaExpectation::L3 { dummy, f1, f2, .. } => {
            let d = *dummy;
            if t.dummy_of(i) != Some(d) || tp.dummy_of(i) != Some(d) {
                return Err(hyp(format!("job {d} is not the dummy of player {i}")));
            }
            if !x.gets(i, d) {
                return Err(hyp(format!("player {i} does not hold its dummy {d}")));
            }
            check_l1_sets(t, x, tp, i, f1, f2, Some(d))?;
            out.extend(f1.iter().map(|&job| Constraint::Keep { job }));
            out.push(Constraint::Keep { job: d });
            out.extend(f2.iter().map(|&job| Constraint::NotGet { job }));
            out.sort_by_key(|c| match c {
                Constraint::Keep { job } => (0, *job),
                _ => (1, 0),
            });
        }
        LemmaExpectation::L2 { j, k, .. } => {
            let k = *k;
            if j.is_empty() || j.contains(&k) {
                return Err(hyp("L2 needs a nonempty owned set not containing k".into()));
            }
            let dec = |q: usize| -> Option<TieredValue> {
                let (a, b) = (t.cost(i, q), tp.cost(i, q));
                (a.is_finite() && b < a).then(|| a.checked_sub(b).expect("finite"))
            };
            let dk = dec(k).ok_or_else(|| hyp(format!("job {k} must strictly decrease")))?;
            let mut dj = Vec::new();
            for &q in j {
                if !x.gets(i, q) {
                    return Err(hyp(format!("job {q} must be owned")));
                }
                dj.push((q, dec(q).ok_or_else(|| hyp(format!("job {q} must strictly decrease")))?));
            }
            for q in 1..=t.m() {
                if q != k && !j.contains(&q) && t.cost(i, q) != tp.cost(i, q) {
                    return Err(hyp(format!("job {q} must be unchanged")));
                }
            }
            if x.gets(i, k) {
                out.extend(j.iter().chain(std::iter::once(&k)).copied().collect::<BTreeSet<_>>().into_iter().map(|job| Constraint::Keep { job }));
            } else {
                let mut all: Vec<usize> = j.iter().copied().collect();
                all.push(k);
                all.sort_unstable();
                out.push(Constraint::AtLeastOneOf { jobs: all });
                out.extend(dj.into_iter().filter(|(_, d)| d > &dk).map(|(job, _)| Constraint::Keep { job }));
            }
        }
        LemmaExpectation::L4 { j1, j2, .. } => {
            let (j1, j2) = (*j1, *j2);
            if j1 == j2 || !x.gets(i, j1) || !x.gets(i, j2) {
                return Err(hyp("L4 needs two distinct owned jobs".into()));
            }
            if !(tp.cost(i, j1) < t.cost(i, j1)) {
                return Err(hyp(format!("job {j1} must strictly decrease")));
            }
            if !(tp.cost(i, j2) > t.cost(i, j2)) {
                return Err(hyp(format!("job {j2} must strictly increase")));
            }
            for q in 1..=t.m() {
                if q != j1 && q != j2 && t.cost(i, q) != tp.cost(i, q) {
                    return Err(hyp(format!("job {q} must be unchanged")));
                }
            }
            out.push(Constraint::IfGetThenGet { if_job: j2, then_job: j1 });
        }
    }
    Ok(ConstraintSet { player: i, constraints: out })
}

/// A stored violation: the pair, the player and the positive WMON sum.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub player: usize,
    #[serde(rename = "T")]
    pub t: Instance,
    pub x: Allocation,
    #[serde(rename = "Tprime")]
    pub tprime: Instance,
    pub xprime: Allocation,
    pub value: TieredValue,
}

impl Violation {
    /// Recomputes the WMON sum from the stored pair.
    pub fn reverify(&self) -> Result<(), String> {
        let r = wmon_value(&self.t, &self.x, &self.tprime, &self.xprime, self.player).map_err(|e| e.to_string())?;
        match r.value {
            WmonValue::Finite(v) if v == self.value && r.violated => Ok(()),
            other => Err(format!("stored value {} but recomputed {other}", self.value)),
        }
    }
}

/// Random instance family for the fuzzer: `n × m` integer grids with entries in `lo..=hi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuzzSpec {
    pub n: usize,
    pub m: usize,
    pub lo: i64,
    pub hi: i64,
}

/// Number of independent RNG shards; fixed so results do not depend on thread count.
pub const FUZZ_SHARDS: usize = 64;

fn random_rational<R: Rng>(rng: &mut R, max: i64) -> Rational {
    let den = rng.gen_range(1..=4);
    rat(rng.gen_range(1..=max * den), den)
}

/// One random instance and a single-row perturbation of it.
pub fn random_pair<R: Rng>(spec: &FuzzSpec, rng: &mut R) -> (Instance, Instance, usize) {
    let costs: Vec<Vec<TieredValue>> = (0..spec.n)
        .map(|_| (0..spec.m).map(|_| TieredValue::from_int(rng.gen_range(spec.lo..=spec.hi))).collect())
        .collect();
    let t = Instance::new(costs, Default::default()).expect("nonnegative grid");
    let i = rng.gen_range(1..=spec.n);
    let mut tp = t.clone();
    let span = (spec.hi - spec.lo).max(1);
    loop {
        for j in 1..=spec.m {
            if rng.gen_bool(0.5) {
                let old = t.cost(i, j).standard_part();
                let delta = random_rational(rng, span);
                let new = if rng.gen_bool(0.5) { old + delta } else { (old - delta).max(rat(0, 1)) };
                tp.set_cost(i, j, TieredValue::from_rational(new)).expect("nonnegative");
            }
        }
        if tp != t {
            return (t, tp, i);
        }
    }
}

/// Queries `mech` on `trials` random pairs and collects WMON violations, in trial order.
///
/// Trials are split into [`FUZZ_SHARDS`] shards; shard `s` draws from a ChaCha stream
/// seeded with `seed + s` and owns every trial `k` with `k % FUZZ_SHARDS == s`.
pub fn fuzz(mech: &MechanismHandle, spec: &FuzzSpec, trials: usize, seed: u64, exec: Exec) -> Result<Vec<Violation>, MechanismError> {
    let handles = shard_handles(mech, FUZZ_SHARDS.min(trials))?;
    let shards = map_indices(handles.len(), exec, |s| -> Result<Vec<(usize, Violation)>, MechanismError> {
        let mut handle = handles[s].lock().expect("shard handle");
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(s as u64));
        let mut found = Vec::new();
        for k in (s..trials).step_by(FUZZ_SHARDS) {
            let (t, tp, i) = random_pair(spec, &mut rng);
            let x = handle.query(&t)?;
            let xp = handle.query(&tp)?;
            if let Some(v) = check_pair(&t, &x, &tp, &xp, i) {
                found.push((k, v));
            }
        }
        Ok(found)
    });
    let mut all = Vec::new();
    for shard in shards {
        all.extend(shard?);
    }
    all.sort_by_key(|(k, _)| *k);
    Ok(all.into_iter().map(|(_, v)| v).collect())
}

fn shard_handles(mech: &MechanismHandle, count: usize) -> Result<Vec<Mutex<MechanismHandle>>, MechanismError> {
    (0..count).map(|_| mech.try_clone().map(Mutex::new)).collect()
}

fn check_pair(t: &Instance, x: &Allocation, tp: &Instance, xp: &Allocation, i: usize) -> Option<Violation> {
    let r = wmon_value(t, x, tp, xp, i).ok()?;
    match (r.violated, r.value) {
        (true, WmonValue::Finite(value)) => Some(Violation { player: i, t: t.clone(), x: x.clone(), tprime: tp.clone(), xprime: xp.clone(), value }),
        _ => None,
    }
}

/// All `2 × 2` instances over `grid`, paired with every single-row change within the grid.
///
/// Instances are indexed in lexicographic order of their entries; the scan over
/// base instances runs under `exec` and violations are returned in scan order.
pub fn exhaustive_2x2(mech: &MechanismHandle, grid: &[i64], exec: Exec) -> Result<Vec<Violation>, MechanismError> {
    let g = grid.len();
    let build = |code: usize| -> Instance {
        let mut c = code;
        let mut vals = [0i64; 4];
        for v in vals.iter_mut().rev() {
            *v = grid[c % g];
            c /= g;
        }
        let row = |a: i64, b: i64| vec![TieredValue::from_int(a), TieredValue::from_int(b)];
        Instance::new(vec![row(vals[0], vals[1]), row(vals[2], vals[3])], Default::default()).expect("grid")
    };
    let total = g.pow(4);
    let handles = shard_handles(mech, FUZZ_SHARDS.min(total))?;
    let per_shard = map_indices(handles.len(), exec, |s| -> Result<Vec<Violation>, MechanismError> {
        let mut handle = handles[s].lock().expect("shard handle");
        let mut found = Vec::new();
        let lo = s * total / handles.len();
        let hi = (s + 1) * total / handles.len();
        for code in lo..hi {
            let t = build(code);
            let x = handle.query(&t)?;
            for other in 0..total {
                let tp = build(other);
                let rows = t.differing_rows(&tp);
                if rows.len() != 1 {
                    continue;
                }
                let xp = handle.query(&tp)?;
                if let Some(v) = check_pair(&t, &x, &tp, &xp, rows[0]) {
                    found.push(v);
                }
            }
        }
        Ok(found)
    });
    let mut all = Vec::new();
    for chunk in per_shard {
        all.extend(chunk?);
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(rows: &[&[&str]]) -> Instance {
        let costs = rows.iter().map(|r| r.iter().map(|s| s.parse().unwrap()).collect()).collect();
        Instance::new(costs, Default::default()).unwrap()
    }

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    #[test]
    fn example_one() {
        let g1 = inst(&[&["1", "2", "3"], &["2", "1", "3"]]);
        let g2 = inst(&[&["1", "2", "3"], &["3", "1", "2"]]);
        let x = Allocation::new(vec![1, 2, 2]);
        let lemma = LemmaExpectation::L1 { player: 2, f1: set(&[3]), f2: set(&[1]) };
        let cs = infer(&lemma, &g1, &x, &g2).unwrap();
        assert_eq!(cs.constraints, vec![Constraint::Keep { job: 3 }, Constraint::NotGet { job: 1 }]);
        assert_eq!(LemmaExpectation::derive(&g1, &x, &g2, 2), Some(lemma));
        let ok = wmon_value(&g1, &x, &g2, &Allocation::new(vec![1, 2, 2]), 2).unwrap();
        assert!(!ok.violated);
        let bad = wmon_value(&g1, &x, &g2, &Allocation::new(vec![1, 1, 1]), 2).unwrap();
        assert_eq!(bad.value, WmonValue::Finite(TieredValue::from_int(1)));
        assert!(bad.violated);
        let same = wmon_value(&g1, &x, &g1, &Allocation::new(vec![2, 1, 1]), 2).unwrap();
        assert_eq!(same.value, WmonValue::Finite(TieredValue::zero()));
    }

    #[test]
    fn example_two() {
        let h1 = inst(&[&["1", "2", "3"], &["2", "1", "3"]]);
        let h2 = inst(&[&["1", "2", "3"], &["1", "0", "3"]]);
        let x = Allocation::new(vec![1, 2, 2]);
        let lemma = LemmaExpectation::L2 { player: 2, j: set(&[2]), k: 1 };
        let cs = infer(&lemma, &h1, &x, &h2).unwrap();
        assert_eq!(cs.constraints, vec![Constraint::AtLeastOneOf { jobs: vec![1, 2] }]);
        assert_eq!(LemmaExpectation::derive(&h1, &x, &h2, 2), Some(lemma));
    }

    #[test]
    fn example_three() {
        let mut i1 = inst(&[&["1", "1", "2", "inf"], &["1", "2", "1", "1"]]);
        i1.mark_dummy(2, 4).unwrap();
        let mut i2 = inst(&[&["1", "1", "2", "inf"], &["2", "2", "1/2", "3"]]);
        i2.mark_dummy(2, 4).unwrap();
        let x = Allocation::new(vec![1, 1, 2, 2]);
        let lemma = LemmaExpectation::L3 { player: 2, dummy: 4, f1: set(&[3]), f2: set(&[1]) };
        let cs = infer(&lemma, &i1, &x, &i2).unwrap();
        assert_eq!(cs.constraints, vec![Constraint::Keep { job: 3 }, Constraint::Keep { job: 4 }, Constraint::NotGet { job: 1 }]);
        assert_eq!(LemmaExpectation::derive(&i1, &x, &i2, 2), Some(lemma));
    }

    #[test]
    fn example_four() {
        let k1 = inst(&[&["1", "2", "3"], &["1", "0", "3"]]);
        let k2 = inst(&[&["1", "2", "3"], &["3/4", "1", "3"]]);
        let x = Allocation::new(vec![2, 2, 1]);
        let lemma = LemmaExpectation::L4 { player: 2, j1: 1, j2: 2 };
        let cs = infer(&lemma, &k1, &x, &k2).unwrap();
        assert_eq!(cs.constraints, vec![Constraint::IfGetThenGet { if_job: 2, then_job: 1 }]);
        assert!(!cs.satisfied_by(&Allocation::new(vec![1, 2, 1])));
        assert!(cs.satisfied_by(&Allocation::new(vec![1, 1, 1])));
        assert_eq!(LemmaExpectation::derive(&k1, &x, &k2, 2), Some(lemma));
    }

    #[test]
    fn hypotheses_are_checked() {
        let g1 = inst(&[&["1", "2", "3"], &["2", "1", "3"]]);
        let g2 = inst(&[&["1", "2", "3"], &["3", "1", "2"]]);
        let x = Allocation::new(vec![1, 2, 2]);
        let wrong = LemmaExpectation::L1 { player: 2, f1: set(&[1]), f2: set(&[]) };
        assert!(infer(&wrong, &g1, &x, &g2).is_err());
        let other_row = inst(&[&["9", "2", "3"], &["3", "1", "2"]]);
        assert!(matches!(wmon_value(&g1, &x, &other_row, &x, 2), Err(WmonError::OtherRowsDiffer { .. })));
    }

    #[test]
    fn infinite_terms() {
        let t = inst(&[&["1", "inf"], &["inf", "inf"]]);
        let tp = inst(&[&["1", "inf"], &["2", "inf"]]);
        let x = Allocation::new(vec![1, 1]);
        let r = wmon_value(&t, &x, &tp, &x, 2).unwrap();
        assert_eq!(r.skipped_terms, vec![2]);
        assert!(!r.violated);
        let moved = wmon_value(&t, &x, &tp, &Allocation::new(vec![2, 1]), 2).unwrap();
        assert_eq!(moved.value, WmonValue::MinusInfinity);
        assert!(matches!(wmon_value(&t, &Allocation::new(vec![2, 1]), &tp, &x, 2), Err(WmonError::InfiniteAssignment { .. })));
    }
}
