//! Adaptive lower-bound strategies: each edits an instance step by step, queries the
//! mechanism, checks the behavior that weak monotonicity predicts, and stops with a
//! [`Verdict`] that can be re-checked from stored data alone.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactnum::{format_decimal, leading_ratio, parse_rational, rational_str, Ratio, Rational, TieredValue};
use crate::forge::{build_main, build_small, ForgeError, MainParams, SmallConstruction};
use crate::schedmodel::{infinite_assignments, load, makespan, validate_allocation, Allocation, Instance, MechanismError, MechanismHandle};
use crate::wmon::Violation;

mod blocks;
mod engine;
mod small;

pub use blocks::run_main;
pub use small::{run_2x2, run_3x3, run_3x4};

/// Tier of the bookkeeping perturbation applied to non-designated entries.
///
/// Deeper than every tier used by the constructions, so it never changes a
/// comparison between them.
pub const PERTURB_TIER: u32 = 8;

#[derive(Debug, Error)]
pub enum AdversaryError {
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
    #[error("mechanism returned an invalid allocation: {0}")]
    InvalidAllocation(String),
    #[error("invalid strategy parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Forge(#[from] ForgeError),
}

/// Why a ratio is unbounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnboundedReason {
    /// Some job is assigned at infinite cost.
    InfiniteAssignment,
    /// The mechanism's makespan is infinitely larger than the certificate's.
    TierGap,
}

/// Outcome of a strategy run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Verdict {
    RatioWitness {
        instance: Instance,
        allocation: Allocation,
        certificate: Allocation,
        #[serde(with = "rational_str")]
        claimed: Rational,
    },
    Unbounded {
        instance: Instance,
        allocation: Allocation,
        certificate: Allocation,
        reason: UnboundedReason,
    },
    WmonViolation {
        violation: Violation,
    },
    StrategyIncomplete {
        step: String,
        diagnostic: String,
    },
}

impl Verdict {
    pub fn kind(&self) -> &'static str {
        match self {
            Verdict::RatioWitness { .. } => "RatioWitness",
            Verdict::Unbounded { .. } => "Unbounded",
            Verdict::WmonViolation { .. } => "WmonViolation",
            Verdict::StrategyIncomplete { .. } => "StrategyIncomplete",
        }
    }

    /// The leading ratio of mechanism makespan to certificate makespan, when defined.
    pub fn leading_ratio(&self) -> Option<Ratio> {
        match self {
            Verdict::RatioWitness { instance, allocation, certificate, .. } | Verdict::Unbounded { instance, allocation, certificate, .. } => {
                ratio_of(&makespan(instance, allocation), &makespan(instance, certificate))
            }
            _ => None,
        }
    }

    /// Short rendering of the bound: six decimals, `unbounded` or `-`.
    pub fn bound_text(&self) -> String {
        match self.leading_ratio() {
            Some(Ratio::Finite(q)) => format_decimal(&q, 6),
            Some(Ratio::Unbounded) => "unbounded".into(),
            None => "-".into(),
        }
    }
}

/// Ratio `num / den` at the leading tier of `den`; a zero optimum against a positive
/// makespan is unbounded. `None` when undefined.
pub fn ratio_of(num: &TieredValue, den: &TieredValue) -> Option<Ratio> {
    if den.is_infinite() {
        return None;
    }
    if den.is_zero() {
        return (num.signum() == std::cmp::Ordering::Greater).then_some(Ratio::Unbounded);
    }
    leading_ratio(num, den).ok()
}

/// One cost change in a transcript step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edit {
    pub player: usize,
    pub job: usize,
    pub value: TieredValue,
}

/// A job registered as a player's dummy in a transcript step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DummyMark {
    pub player: usize,
    pub job: usize,
}

/// One query of a run: the edits leading to the queried instance and the answer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptStep {
    pub branch: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub player: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edits: Vec<Edit>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dummies: Vec<DummyMark>,
    pub allocation: Allocation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expectation: Option<String>,
    pub matched: bool,
}

/// The ordered queries of a run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Transcript {
    pub steps: Vec<TranscriptStep>,
}

impl Transcript {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// A finished run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Run {
    pub verdict: Verdict,
    pub transcript: Transcript,
}

impl Run {
    pub fn queries(&self) -> usize {
        self.transcript.len()
    }
}

/// The strategies and their parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Strategy {
    Main { a: Rational, r: usize, k_c: usize },
    S2x2,
    S3x3 { a: Rational, b: Rational, c: Rational },
    S3x4 { x: Rational },
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Main { .. } => "main",
            Strategy::S2x2 => "s2x2",
            Strategy::S3x3 { .. } => "s3x3",
            Strategy::S3x4 { .. } => "s3x4",
        }
    }

    /// Parameters as exact strings.
    pub fn params(&self) -> BTreeMap<String, String> {
        let q = |v: &Rational| crate::exactnum::format_rational(v);
        match self {
            Strategy::Main { a, r, k_c } => BTreeMap::from([("a".into(), q(a)), ("r".into(), r.to_string()), ("kc".into(), k_c.to_string())]),
            Strategy::S2x2 => BTreeMap::new(),
            Strategy::S3x3 { a, b, c } => BTreeMap::from([("a".into(), q(a)), ("b".into(), q(b)), ("c".into(), q(c))]),
            Strategy::S3x4 { x } => BTreeMap::from([("x".into(), q(x))]),
        }
    }

    /// Rebuilds a strategy from its name and parameter strings.
    pub fn from_parts(name: &str, params: &BTreeMap<String, String>) -> Result<Self, AdversaryError> {
        let get = |k: &str| params.get(k).ok_or_else(|| AdversaryError::Params(format!("missing parameter `{k}`")));
        let rational = |k: &str| -> Result<Rational, AdversaryError> { parse_rational(get(k)?).map_err(|e| AdversaryError::Params(e.to_string())) };
        let int = |k: &str| -> Result<usize, AdversaryError> { get(k)?.parse().map_err(|_| AdversaryError::Params(format!("`{k}` must be a nonnegative integer"))) };
        Ok(match name {
            "main" => Strategy::Main { a: rational("a")?, r: int("r")?, k_c: int("kc")? },
            "s2x2" => Strategy::S2x2,
            "s3x3" => Strategy::S3x3 { a: rational("a")?, b: rational("b")?, c: rational("c")? },
            "s3x4" => Strategy::S3x4 { x: rational("x")? },
            other => return Err(AdversaryError::Params(format!("unknown strategy `{other}`"))),
        })
    }

    /// The instance queried first.
    pub fn initial_instance(&self) -> Result<Instance, AdversaryError> {
        Ok(match self {
            Strategy::Main { a, r, k_c } => build_main(&MainParams::new(a.clone(), *r, *k_c)?)?,
            Strategy::S2x2 => build_small(&SmallConstruction::D2x2)?,
            Strategy::S3x3 { a, b, c } => build_small(&SmallConstruction::E3x3 { a: a.clone(), b: b.clone(), c: c.clone() })?,
            Strategy::S3x4 { x } => build_small(&SmallConstruction::F3x4 { x: x.clone() })?,
        })
    }

    /// Runs the strategy against `mech`.
    pub fn run(&self, mech: &mut MechanismHandle) -> Result<Run, AdversaryError> {
        match self {
            Strategy::Main { a, r, k_c } => run_main(mech, &MainParams::new(a.clone(), *r, *k_c)?),
            Strategy::S2x2 => run_2x2(mech),
            Strategy::S3x3 { a, b, c } => run_3x3(mech, a, b, c),
            Strategy::S3x4 { x } => run_3x4(mech, x),
        }
    }
}

/// The stored result of an attack.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub strategy: String,
    pub params: BTreeMap<String, String>,
    pub mechanism: String,
    pub verdict: Verdict,
    pub transcript: Transcript,
}

impl Report {
    pub fn new(strategy: &Strategy, mechanism: &str, run: Run) -> Self {
        Report { strategy: strategy.name().into(), params: strategy.params(), mechanism: mechanism.into(), verdict: run.verdict, transcript: run.transcript }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Result of [`dummy_boost`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Boost {
    /// The instance with player `i`'s dummy cost raised to `gamma`.
    pub instance: Instance,
    pub gamma: TieredValue,
    /// `1 + β` for the pre-boost allocation.
    pub expected: Ratio,
    /// `aprime` with player `i` holding its dummy; its makespan equals that of `aprime`.
    pub certificate: Allocation,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoostError {
    #[error("player {0} has no dummy job")]
    NoDummy(usize),
    #[error("certificate is invalid or has no finite positive makespan")]
    BadCertificate,
    #[error("boosted dummy cost would be negative")]
    NegativeGamma,
}

/// Raises player `i`'s dummy cost to `γ = makespan(T, A′) − Σ_{j ∈ A′_i, j ≠ dummy} t_i^j`.
pub fn dummy_boost(t: &Instance, x: &Allocation, i: usize, aprime: &Allocation) -> Result<Boost, BoostError> {
    let d = t.dummy_of(i).ok_or(BoostError::NoDummy(i))?;
    validate_allocation(t, aprime).map_err(|_| BoostError::BadCertificate)?;
    let ms = makespan(t, aprime);
    if ms.is_infinite() || ms.is_zero() {
        return Err(BoostError::BadCertificate);
    }
    let others: TieredValue = aprime.jobs_of(i).into_iter().filter(|&j| j != d).map(|j| t.cost(i, j).clone()).sum();
    let gamma = ms.checked_sub(&others).map_err(|_| BoostError::BadCertificate)?;
    if gamma.signum() == std::cmp::Ordering::Less {
        return Err(BoostError::NegativeGamma);
    }
    let excess = load(t, x, i).checked_sub(&load(t, aprime, i)).map_err(|_| BoostError::BadCertificate)?;
    let expected = match leading_ratio(&excess, &ms).map_err(|_| BoostError::BadCertificate)? {
        Ratio::Finite(beta) => Ratio::Finite(beta + Rational::from_integer(1.into())),
        Ratio::Unbounded => Ratio::Unbounded,
    };
    let instance = t.with_cost(i, d, gamma.clone()).map_err(|_| BoostError::BadCertificate)?;
    let mut certificate = aprime.clone();
    certificate.owner[d - 1] = i;
    Ok(Boost { instance, gamma, expected, certificate })
}

/// A failed soundness check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Defect(pub String);

impl fmt::Display for Defect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn check_pair(instance: &Instance, allocation: &Allocation, certificate: &Allocation) -> Result<Option<Ratio>, Defect> {
    validate_allocation(instance, allocation).map_err(|d| Defect(format!("mechanism allocation invalid: {d:?}")))?;
    validate_allocation(instance, certificate).map_err(|d| Defect(format!("certificate invalid: {d:?}")))?;
    if !infinite_assignments(instance, certificate).is_empty() {
        return Err(Defect("certificate assigns a job at infinite cost".into()));
    }
    Ok(ratio_of(&makespan(instance, allocation), &makespan(instance, certificate)))
}

/// Re-checks every invariant of `v` from the stored data.
pub fn verify_verdict(v: &Verdict) -> Result<(), Defect> {
    match v {
        Verdict::RatioWitness { instance, allocation, certificate, claimed } => match check_pair(instance, allocation, certificate)? {
            Some(Ratio::Unbounded) => Ok(()),
            Some(Ratio::Finite(q)) if &q >= claimed => Ok(()),
            Some(Ratio::Finite(q)) => Err(Defect(format!("ratio {} is below the claimed bound {}", format_decimal(&q, 6), format_decimal(claimed, 6)))),
            None => Err(Defect("ratio is undefined".into())),
        },
        Verdict::Unbounded { instance, allocation, certificate, reason } => {
            let ratio = check_pair(instance, allocation, certificate)?;
            let infinite = !infinite_assignments(instance, allocation).is_empty();
            match reason {
                UnboundedReason::InfiniteAssignment if !infinite => return Err(Defect("no job is assigned at infinite cost".into())),
                UnboundedReason::TierGap if infinite => return Err(Defect("tier gap claimed but a job is assigned at infinite cost".into())),
                _ => {}
            }
            match ratio {
                Some(Ratio::Unbounded) => Ok(()),
                _ => Err(Defect("ratio is not unbounded".into())),
            }
        }
        Verdict::WmonViolation { violation } => {
            validate_allocation(&violation.t, &violation.x).map_err(|d| Defect(format!("x invalid: {d:?}")))?;
            validate_allocation(&violation.tprime, &violation.xprime).map_err(|d| Defect(format!("x' invalid: {d:?}")))?;
            let rows = violation.t.differing_rows(&violation.tprime);
            if rows != vec![violation.player] {
                return Err(Defect(format!("instances differ in rows {rows:?}, expected only {}", violation.player)));
            }
            violation.reverify().map_err(Defect)
        }
        Verdict::StrategyIncomplete { step, diagnostic } => Err(Defect(format!("strategy incomplete at {step}: {diagnostic}"))),
    }
}

/// Re-executes a report against `mech`: replays each step's edits and compares the
/// answers, then reruns the strategy and compares verdict and transcript exactly.
pub fn replay(report: &Report, mech: &MechanismHandle) -> Result<(), Defect> {
    let strategy = Strategy::from_parts(&report.strategy, &report.params).map_err(|e| Defect(e.to_string()))?;
    let mut t = strategy.initial_instance().map_err(|e| Defect(e.to_string()))?;
    let mut handle = mech.try_clone().map_err(|e| Defect(e.to_string()))?;
    for (k, step) in report.transcript.steps.iter().enumerate() {
        for e in &step.edits {
            t.set_cost(e.player, e.job, e.value.clone()).map_err(|err| Defect(format!("step {k}: {err}")))?;
        }
        for d in &step.dummies {
            t.mark_dummy(d.player, d.job).map_err(|err| Defect(format!("step {k}: {err}")))?;
        }
        let x = handle.query(&t).map_err(|e| Defect(format!("step {k}: {e}")))?;
        if x != step.allocation {
            return Err(Defect(format!("step {k} ({}): mechanism answered {:?}, transcript has {:?}", step.branch, x.owner, step.allocation.owner)));
        }
    }
    let mut fresh = mech.try_clone().map_err(|e| Defect(e.to_string()))?;
    let rerun = strategy.run(&mut fresh).map_err(|e| Defect(e.to_string()))?;
    let stored = serde_json::to_string(&report.verdict).expect("verdict serializes");
    if serde_json::to_string(&rerun.verdict).expect("verdict serializes") != stored {
        return Err(Defect("rerun produced a different verdict".into()));
    }
    if rerun.transcript != report.transcript {
        return Err(Defect("rerun produced a different transcript".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;

    fn nr() -> Instance {
        build_small(&SmallConstruction::BNr).unwrap()
    }

    #[test]
    fn boost_examples() {
        let t = nr();
        let b = dummy_boost(&t, &Allocation::new(vec![1, 1, 2]), 1, &Allocation::new(vec![2, 1, 2])).unwrap();
        assert_eq!(b.gamma, TieredValue::from_int(1));
        assert_eq!(b.expected, Ratio::Finite(rat(2, 1)));
        assert_eq!(makespan(&b.instance, &b.certificate), TieredValue::from_int(1));
        let same = dummy_boost(&t, &Allocation::new(vec![2, 1, 2]), 1, &Allocation::new(vec![2, 1, 2])).unwrap();
        assert_eq!(same.expected, Ratio::Finite(rat(1, 1)));
        assert_eq!(dummy_boost(&t, &Allocation::new(vec![1, 1, 2]), 1, &Allocation::new(vec![1, 1, 2])).unwrap().gamma, TieredValue::zero());
    }

    #[test]
    fn verify_detects_tampering() {
        let t = nr();
        let v = Verdict::RatioWitness {
            instance: t.with_cost(1, 2, TieredValue::from_int(1)).unwrap(),
            allocation: Allocation::new(vec![1, 1, 2]),
            certificate: Allocation::new(vec![2, 1, 2]),
            claimed: rat(2, 1),
        };
        assert_eq!(verify_verdict(&v), Ok(()));
        let mut bumped = v.clone();
        if let Verdict::RatioWitness { claimed, .. } = &mut bumped {
            *claimed += rat(1, 1);
        }
        assert!(verify_verdict(&bumped).is_err());
        let mut broken = v;
        if let Verdict::RatioWitness { certificate, .. } = &mut broken {
            certificate.owner[0] = 0;
        }
        assert!(verify_verdict(&broken).is_err());
        assert!(verify_verdict(&Verdict::StrategyIncomplete { step: "s".into(), diagnostic: "d".into() }).is_err());
    }

    fn check(strategy: &Strategy, selector: &str) -> Run {
        let mut mech = crate::mechlib::open(selector).unwrap();
        let run = strategy.run(&mut mech).unwrap();
        assert_eq!(verify_verdict(&run.verdict), Ok(()), "{selector}: {:?}", run.verdict);
        let report = Report::new(strategy, selector, run.clone());
        let back: Report = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(back, report);
        replay(&report, &crate::mechlib::open(selector).unwrap()).unwrap();
        run
    }

    fn ratio(run: &Run) -> Ratio {
        run.verdict.leading_ratio().unwrap()
    }

    #[test]
    fn minwork_outcomes() {
        let run = check(&Strategy::S2x2, "minwork");
        assert_eq!(ratio(&run), Ratio::Finite(rat(2, 1)));
        let run = check(&Strategy::S3x3 { a: rat(1, 1), b: rat(22055, 10000), c: rat(26589, 10000) }, "minwork");
        assert!(ratio(&run).at_least(&rat(22054, 10000)));
        let run = check(&Strategy::S3x4 { x: rat(141421, 100000) }, "minwork");
        assert!(ratio(&run).at_least(&rat(241420, 100000)));
        let run = check(&Strategy::Main { a: rat(1873, 1000), r: 3, k_c: 3 }, "minwork");
        assert_eq!(run.queries(), 3);
        assert_eq!(ratio(&run), Ratio::Finite(rat(2873, 1000)));
    }

    #[test]
    fn dictators_and_optimum() {
        let strategies = [
            Strategy::S2x2,
            Strategy::S3x3 { a: rat(1, 1), b: rat(22055, 10000), c: rat(26589, 10000) },
            Strategy::S3x4 { x: rat(141421, 100000) },
            Strategy::Main { a: rat(1873, 1000), r: 2, k_c: 2 },
        ];
        for s in &strategies {
            let n = s.initial_instance().unwrap().n();
            let dictators = (1..=n.min(3)).map(|i| format!("dictator:{i}"));
            for sel in std::iter::once("optmakespan".to_string()).chain(dictators) {
                let sel = sel.as_str();
                let run = check(s, sel);
                assert_ne!(run.verdict.kind(), "StrategyIncomplete", "{s:?} {sel}");
            }
        }
    }

    #[test]
    fn random_stubs() {
        let strategies = [
            Strategy::S2x2,
            Strategy::S3x3 { a: rat(1, 1), b: rat(22055, 10000), c: rat(26589, 10000) },
            Strategy::S3x4 { x: rat(141421, 100000) },
            Strategy::Main { a: rat(1873, 1000), r: 3, k_c: 3 },
        ];
        for s in &strategies {
            for seed in 0..40 {
                let run = check(s, &format!("random:{seed}"));
                assert_ne!(run.verdict.kind(), "StrategyIncomplete", "{s:?} seed {seed}: {:?}", run.verdict);
            }
        }
    }
}
