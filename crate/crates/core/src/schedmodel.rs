//! Instances, allocations, loads and makespans, and the mechanism interface.
//!
//! Players and jobs are 1-indexed throughout the public API.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactnum::{NumError, TieredValue};

mod external;

pub use external::{ExternalMechanism, TIMEOUT_ENV};

/// Errors raised while building or editing an instance.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("instance must have at least one player and one job")]
    Empty,
    #[error("cost matrix row {row} has {got} entries, expected {expected}")]
    Ragged { row: usize, got: usize, expected: usize },
    #[error("negative cost {value} at player {player}, job {job}")]
    NegativeCost { player: usize, job: usize, value: String },
    #[error("index out of range: player {player}, job {job}")]
    OutOfRange { player: usize, job: usize },
    #[error("dummy job {job} of player {player}: {reason}")]
    BadDummy { player: usize, job: usize, reason: String },
    #[error("instance declares n={n}, m={m} but the matrix is {rows}x{cols}")]
    ShapeMismatch { n: usize, m: usize, rows: usize, cols: usize },
    #[error(transparent)]
    Value(#[from] NumError),
}

/// Processing-time matrix `T` with optional dummy-job metadata.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Instance {
    costs: Vec<Vec<TieredValue>>,
    dummy_of: BTreeMap<usize, usize>,
}

impl Instance {
    /// Builds an instance from rows (players) of costs; `dummy_of` maps player to job.
    pub fn new(costs: Vec<Vec<TieredValue>>, dummy_of: BTreeMap<usize, usize>) -> Result<Self, ModelError> {
        let m = costs.first().map_or(0, Vec::len);
        if costs.is_empty() || m == 0 {
            return Err(ModelError::Empty);
        }
        for (r, row) in costs.iter().enumerate() {
            if row.len() != m {
                return Err(ModelError::Ragged { row: r + 1, got: row.len(), expected: m });
            }
            for (c, v) in row.iter().enumerate() {
                check_cost(r + 1, c + 1, v)?;
            }
        }
        let inst = Instance { costs, dummy_of };
        for (&i, &j) in &inst.dummy_of {
            inst.check_dummy(i, j)?;
        }
        Ok(inst)
    }

    /// Number of players.
    pub fn n(&self) -> usize {
        self.costs.len()
    }

    /// Number of jobs.
    pub fn m(&self) -> usize {
        self.costs[0].len()
    }

    /// Cost `t_i^j`.
    pub fn cost(&self, i: usize, j: usize) -> &TieredValue {
        &self.costs[i - 1][j - 1]
    }

    /// Row `t_i`.
    pub fn row(&self, i: usize) -> &[TieredValue] {
        &self.costs[i - 1]
    }

    pub fn dummy_of(&self, i: usize) -> Option<usize> {
        self.dummy_of.get(&i).copied()
    }

    pub fn dummies(&self) -> &BTreeMap<usize, usize> {
        &self.dummy_of
    }

    /// Owner of `j` if `j` is registered as some player's dummy.
    pub fn dummy_owner(&self, j: usize) -> Option<usize> {
        self.dummy_of.iter().find(|(_, &d)| d == j).map(|(&i, _)| i)
    }

    /// Returns a copy with `t_i^j = v`.
    pub fn with_cost(&self, i: usize, j: usize, v: TieredValue) -> Result<Self, ModelError> {
        let mut out = self.clone();
        out.set_cost(i, j, v)?;
        Ok(out)
    }

    /// Sets `t_i^j = v`, keeping the instance invariants.
    pub fn set_cost(&mut self, i: usize, j: usize, v: TieredValue) -> Result<(), ModelError> {
        if i == 0 || j == 0 || i > self.n() || j > self.m() {
            return Err(ModelError::OutOfRange { player: i, job: j });
        }
        check_cost(i, j, &v)?;
        if let Some(owner) = self.dummy_owner(j) {
            if owner == i && v.is_infinite() {
                return Err(ModelError::BadDummy { player: i, job: j, reason: "owner cost must stay finite".into() });
            }
            if owner != i && v.is_finite() {
                return Err(ModelError::BadDummy { player: owner, job: j, reason: format!("player {i} cost must stay infinite") });
            }
        }
        self.costs[i - 1][j - 1] = v;
        Ok(())
    }

    /// Registers `j` as the dummy job of player `i`.
    pub fn mark_dummy(&mut self, i: usize, j: usize) -> Result<(), ModelError> {
        self.check_dummy(i, j)?;
        if let Some(other) = self.dummy_owner(j) {
            if other != i {
                return Err(ModelError::BadDummy { player: i, job: j, reason: format!("already the dummy of player {other}") });
            }
        }
        self.dummy_of.insert(i, j);
        Ok(())
    }

    fn check_dummy(&self, i: usize, j: usize) -> Result<(), ModelError> {
        if i == 0 || j == 0 || i > self.n() || j > self.m() {
            return Err(ModelError::OutOfRange { player: i, job: j });
        }
        if self.cost(i, j).is_infinite() {
            return Err(ModelError::BadDummy { player: i, job: j, reason: "owner cost is infinite".into() });
        }
        if (1..=self.n()).any(|p| p != i && self.cost(p, j).is_finite()) {
            return Err(ModelError::BadDummy { player: i, job: j, reason: "another player has a finite cost".into() });
        }
        Ok(())
    }

    /// Players with finite cost for job `j`.
    pub fn active_players(&self, j: usize) -> Vec<usize> {
        (1..=self.n()).filter(|&i| self.cost(i, j).is_finite()).collect()
    }

    /// True iff some player processes `j` at zero or infinitesimal cost.
    pub fn is_trivial(&self, j: usize) -> bool {
        (1..=self.n()).any(|i| {
            let v = self.cost(i, j);
            v.is_finite() && v.standard_part() == num_traits::Zero::zero()
        })
    }

    /// Rows that differ between `self` and `other` (same shape required).
    pub fn differing_rows(&self, other: &Instance) -> Vec<usize> {
        (1..=self.n()).filter(|&i| self.row(i) != other.row(i)).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }
}

fn check_cost(i: usize, j: usize, v: &TieredValue) -> Result<(), ModelError> {
    if v.is_finite() && v.signum() == std::cmp::Ordering::Less {
        return Err(ModelError::NegativeCost { player: i, job: j, value: v.to_string() });
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct InstanceJson {
    n: usize,
    m: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty", deserialize_with = "player_keys")]
    dummy_of: BTreeMap<usize, usize>,
    costs: Vec<Vec<TieredValue>>,
}

/// Reads player keys given as strings, which also works inside buffered (tagged) content.
fn player_keys<'de, D: serde::Deserializer<'de>>(d: D) -> Result<BTreeMap<usize, usize>, D::Error> {
    BTreeMap::<String, usize>::deserialize(d)?
        .into_iter()
        .map(|(k, v)| k.parse().map(|k| (k, v)).map_err(|_| serde::de::Error::custom(format!("player key `{k}` is not an index"))))
        .collect()
}

impl Serialize for Instance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        InstanceJson { n: self.n(), m: self.m(), dummy_of: self.dummy_of.clone(), costs: self.costs.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Instance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = InstanceJson::deserialize(d)?;
        let rows = raw.costs.len();
        let cols = raw.costs.first().map_or(0, Vec::len);
        if rows != raw.n || cols != raw.m {
            return Err(serde::de::Error::custom(ModelError::ShapeMismatch { n: raw.n, m: raw.m, rows, cols }));
        }
        Instance::new(raw.costs, raw.dummy_of).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.costs {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// Assignment of every job to one player; `owner[j-1]` is the player of job `j`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Allocation {
    pub owner: Vec<usize>,
}

impl Allocation {
    pub fn new(owner: Vec<usize>) -> Self {
        Allocation { owner }
    }

    /// Owner of job `j`.
    pub fn owner_of(&self, j: usize) -> usize {
        self.owner[j - 1]
    }

    /// The indicator `x_i^j`.
    pub fn gets(&self, i: usize, j: usize) -> bool {
        self.owner.get(j - 1) == Some(&i)
    }

    /// Jobs assigned to player `i`, ascending.
    pub fn jobs_of(&self, i: usize) -> Vec<usize> {
        (1..=self.owner.len()).filter(|&j| self.owner[j - 1] == i).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("allocation serializes")
    }
}

/// A structural problem with an allocation.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum AllocationDefect {
    #[error("allocation covers {got} jobs, instance has {expected}")]
    Length { expected: usize, got: usize },
    #[error("job {job} is unassigned")]
    Unassigned { job: usize },
    #[error("job {job} assigned to player {owner}, but n = {n}")]
    OwnerOutOfRange { job: usize, owner: usize, n: usize },
}

/// Lists every structural defect of `x` with respect to `t`.
pub fn validate_allocation(t: &Instance, x: &Allocation) -> Result<(), Vec<AllocationDefect>> {
    let mut defects = Vec::new();
    if x.owner.len() != t.m() {
        defects.push(AllocationDefect::Length { expected: t.m(), got: x.owner.len() });
    }
    for (idx, &o) in x.owner.iter().enumerate() {
        if o == 0 {
            defects.push(AllocationDefect::Unassigned { job: idx + 1 });
        } else if o > t.n() {
            defects.push(AllocationDefect::OwnerOutOfRange { job: idx + 1, owner: o, n: t.n() });
        }
    }
    if defects.is_empty() {
        Ok(())
    } else {
        Err(defects)
    }
}

/// `Σ_{j ∈ x_i} t_i^j`.
pub fn load(t: &Instance, x: &Allocation, i: usize) -> TieredValue {
    x.owner
        .iter()
        .enumerate()
        .filter(|(_, &o)| o == i)
        .map(|(j, _)| t.cost(i, j + 1).clone())
        .sum()
}

/// Maximum load over all players.
pub fn makespan(t: &Instance, x: &Allocation) -> TieredValue {
    (1..=t.n()).map(|i| load(t, x, i)).max().unwrap_or_default()
}

/// Jobs assigned to a player at infinite cost.
pub fn infinite_assignments(t: &Instance, x: &Allocation) -> Vec<usize> {
    (1..=t.m()).filter(|&j| t.cost(x.owner_of(j), j).is_infinite()).collect()
}

/// Errors surfaced by mechanism queries.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MechanismError {
    #[error("failed to launch mechanism: {0}")]
    Launch(String),
    #[error("mechanism protocol error: {0}")]
    Protocol(String),
    #[error("mechanism timed out after {0} ms")]
    Timeout(u64),
    #[error("mechanism cannot allocate: {0}")]
    Unallocatable(String),
}

/// A deterministic allocation rule `f: Instance → Allocation`.
pub trait Mechanism: Send {
    fn allocate(&mut self, t: &Instance) -> Result<Allocation, MechanismError>;

    /// Selector string identifying this mechanism.
    fn describe(&self) -> String;

    /// An independent handle answering the same way.
    fn try_clone(&self) -> Result<Box<dyn Mechanism>, MechanismError>;
}

/// A mechanism plus a query counter.
pub struct MechanismHandle {
    inner: Box<dyn Mechanism>,
    queries: usize,
}

impl MechanismHandle {
    pub fn new(inner: Box<dyn Mechanism>) -> Self {
        MechanismHandle { inner, queries: 0 }
    }

    pub fn query(&mut self, t: &Instance) -> Result<Allocation, MechanismError> {
        self.queries += 1;
        self.inner.allocate(t)
    }

    pub fn queries(&self) -> usize {
        self.queries
    }

    pub fn describe(&self) -> String {
        self.inner.describe()
    }

    /// An independent query stream with a fresh counter.
    pub fn try_clone(&self) -> Result<MechanismHandle, MechanismError> {
        Ok(MechanismHandle::new(self.inner.try_clone()?))
    }
}

impl fmt::Debug for MechanismHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MechanismHandle({}, queries={})", self.describe(), self.queries)
    }
}
