//! Step machinery shared by the strategies: edit, predict, query, compare.

use std::cmp::Ordering;

use super::{dummy_boost, ratio_of, AdversaryError, DummyMark, Edit, Run, Transcript, TranscriptStep, UnboundedReason, Verdict, PERTURB_TIER};
use crate::exactnum::{Ratio, Rational, TieredValue};
use crate::schedmodel::{infinite_assignments, makespan, validate_allocation, Allocation, Instance, MechanismHandle};
use crate::wmon::{infer, wmon_value, LemmaExpectation, Violation};

/// Early exit from a strategy body.
pub(crate) enum Stop {
    Verdict(Box<Verdict>),
    Error(AdversaryError),
}

pub(crate) type Flow<T = ()> = Result<T, Stop>;

fn stop(v: Verdict) -> Stop {
    Stop::Verdict(Box::new(v))
}

/// The bookkeeping perturbation `δ`.
pub(crate) fn delta() -> TieredValue {
    TieredValue::eps(PERTURB_TIER)
}

pub(crate) fn incomplete(step: &str, diagnostic: impl Into<String>) -> Stop {
    stop(Verdict::StrategyIncomplete { step: step.into(), diagnostic: diagnostic.into() })
}

/// Per-job cheapest player, ties to the lowest index, with explicit overrides.
pub(crate) fn min_cost_allocation(t: &Instance, overrides: &[(usize, usize)]) -> Allocation {
    let owner = (1..=t.m())
        .map(|j| {
            overrides.iter().rev().find(|(job, _)| *job == j).map(|&(_, p)| p).unwrap_or_else(|| {
                (1..=t.n()).min_by(|&p, &q| t.cost(p, j).cmp(t.cost(q, j)).then(p.cmp(&q))).expect("at least one player")
            })
        })
        .collect();
    Allocation::new(owner)
}

pub(crate) struct Engine<'a> {
    mech: &'a mut MechanismHandle,
    pub t: Instance,
    pub x: Allocation,
    steps: Vec<TranscriptStep>,
}

impl<'a> Engine<'a> {
    pub fn new(mech: &'a mut MechanismHandle, t: Instance) -> Self {
        Engine { mech, t, x: Allocation::new(Vec::new()), steps: Vec::new() }
    }

    /// Queries the current instance as the first step.
    pub fn initial(&mut self) -> Flow {
        let t = self.t.clone();
        self.x = self.query_checked("initial", None, Vec::new(), Vec::new(), None, &t)?;
        Ok(())
    }

    /// Turns a terminal stop into a run; mechanism failures surface as errors.
    pub fn finish_run(self, stop: Stop) -> Result<Run, AdversaryError> {
        match stop {
            Stop::Error(e) => Err(e),
            Stop::Verdict(verdict) => Ok(Run { verdict: *verdict, transcript: Transcript { steps: self.steps } }),
        }
    }

    fn query_checked(
        &mut self,
        branch: &str,
        player: Option<usize>,
        edits: Vec<Edit>,
        dummies: Vec<DummyMark>,
        expectation: Option<String>,
        tp: &Instance,
    ) -> Flow<Allocation> {
        let xp = self.mech.query(tp).map_err(|e| Stop::Error(e.into()))?;
        validate_allocation(tp, &xp).map_err(|d| Stop::Error(AdversaryError::InvalidAllocation(format!("{d:?}"))))?;
        self.steps.push(TranscriptStep { branch: branch.into(), player, edits, dummies, allocation: xp.clone(), expectation, matched: true });
        if !infinite_assignments(tp, &xp).is_empty() {
            return Err(stop(Verdict::Unbounded {
                instance: tp.clone(),
                allocation: xp,
                certificate: min_cost_allocation(tp, &[]),
                reason: UnboundedReason::InfiniteAssignment,
            }));
        }
        Ok(xp)
    }

    /// Applies single-row edits to player `i`, queries, and checks the predicted behavior.
    pub fn step(&mut self, branch: &str, i: usize, edits: Vec<(usize, TieredValue)>, dummies: Vec<(usize, usize)>) -> Flow {
        let edits: Vec<Edit> = edits.into_iter().map(|(job, value)| Edit { player: i, job, value }).collect();
        let dummies: Vec<DummyMark> = dummies.into_iter().map(|(player, job)| DummyMark { player, job }).collect();
        let mut tp = self.t.clone();
        for e in &edits {
            tp.set_cost(e.player, e.job, e.value.clone()).map_err(|err| incomplete(branch, format!("edit rejected: {err}")))?;
        }
        for d in &dummies {
            tp.mark_dummy(d.player, d.job).map_err(|err| incomplete(branch, format!("dummy rejected: {err}")))?;
        }
        let lemma = LemmaExpectation::derive(&self.t, &self.x, &tp, i).ok_or_else(|| incomplete(branch, "no lemma matches the edit"))?;
        let cs = infer(&lemma, &self.t, &self.x, &tp).map_err(|e| incomplete(branch, e.to_string()))?;
        let xp = self.query_checked(branch, Some(i), edits, dummies, Some(format!("{lemma} => {cs}")), &tp)?;
        if cs.satisfied_by(&xp) {
            self.t = tp;
            self.x = xp;
            return Ok(());
        }
        if let Some(last) = self.steps.last_mut() {
            last.matched = false;
        }
        let cert = min_cost_allocation(&tp, &[]);
        if ratio_of(&makespan(&tp, &xp), &makespan(&tp, &cert)) == Some(Ratio::Unbounded) {
            return Err(stop(Verdict::Unbounded { instance: tp, allocation: xp, certificate: cert, reason: UnboundedReason::TierGap }));
        }
        let broken: Vec<String> = cs.broken(&xp).iter().map(|c| c.to_string()).collect();
        match wmon_value(&self.t, &self.x, &tp, &xp, i) {
            Ok(report) if report.violated => {
                let value = match report.value {
                    crate::wmon::WmonValue::Finite(v) => v,
                    crate::wmon::WmonValue::MinusInfinity => return Err(incomplete(branch, "violation with infinite value")),
                };
                Err(stop(Verdict::WmonViolation {
                    violation: Violation { player: i, t: self.t.clone(), x: self.x.clone(), tprime: tp, xprime: xp, value },
                }))
            }
            Ok(_) => Err(incomplete(branch, format!("broken {broken:?} without a WMON violation"))),
            Err(e) => Err(incomplete(branch, e.to_string())),
        }
    }

    /// Designated edits on row `i` plus the perturbation convention on its other finite entries.
    pub fn perturbed(&self, i: usize, designated: Vec<(usize, TieredValue)>) -> Vec<(usize, TieredValue)> {
        let mut out = designated;
        let d = delta();
        for j in 1..=self.t.m() {
            if out.iter().any(|(job, _)| *job == j) {
                continue;
            }
            let c = self.t.cost(i, j);
            if !c.is_finite() {
                continue;
            }
            if self.x.gets(i, j) {
                if c.is_zero() {
                    continue;
                }
                let lowered = c.checked_sub(&d).expect("finite");
                if lowered.signum() != Ordering::Less {
                    out.push((j, lowered));
                }
            } else {
                out.push((j, c + &d));
            }
        }
        out.sort_by_key(|(j, _)| *j);
        out
    }

    /// An L1-style step: designated edits with the perturbation convention.
    pub fn l1(&mut self, branch: &str, i: usize, designated: Vec<(usize, TieredValue)>, dummies: Vec<(usize, usize)>) -> Flow {
        let edits = self.perturbed(i, designated);
        self.step(branch, i, edits, dummies)
    }

    /// Sets the listed entries of row `i` to zero under the perturbation convention.
    pub fn zero(&mut self, branch: &str, i: usize, jobs: &[usize]) -> Flow {
        self.l1(branch, i, jobs.iter().map(|&j| (j, TieredValue::zero())).collect(), Vec::new())
    }

    /// Raises player `i`'s dummy to the makespan of `aprime`, queries, and concludes.
    pub fn boost(&mut self, branch: &str, i: usize, aprime: Allocation, claimed: Rational) -> Stop {
        let Some(d) = self.t.dummy_of(i) else { return incomplete(branch, format!("player {i} has no dummy")) };
        let boost = match dummy_boost(&self.t, &self.x, i, &aprime) {
            Ok(b) => b,
            Err(e) => return incomplete(branch, e.to_string()),
        };
        let edits = self.perturbed(i, vec![(d, boost.gamma.clone())]);
        if let Err(stop) = self.step(branch, i, edits, Vec::new()) {
            return stop;
        }
        self.finish(branch, boost.certificate, Some(claimed))
    }

    /// Compares the current allocation with `cert`; `claimed = None` expects a tier gap.
    pub fn finish(&self, branch: &str, cert: Allocation, claimed: Option<Rational>) -> Stop {
        if let Err(d) = validate_allocation(&self.t, &cert) {
            return incomplete(branch, format!("certificate invalid: {d:?}"));
        }
        let ratio = ratio_of(&makespan(&self.t, &self.x), &makespan(&self.t, &cert));
        match (ratio, claimed) {
            (Some(Ratio::Unbounded), _) => stop(Verdict::Unbounded {
                instance: self.t.clone(),
                allocation: self.x.clone(),
                certificate: cert,
                reason: UnboundedReason::TierGap,
            }),
            (Some(Ratio::Finite(q)), Some(c)) if q >= c => {
                stop(Verdict::RatioWitness { instance: self.t.clone(), allocation: self.x.clone(), certificate: cert, claimed: c })
            }
            (ratio, _) => incomplete(branch, format!("ratio {ratio:?} does not reach the claim")),
        }
    }

    /// Certificate from the current instance.
    pub fn cert(&self, overrides: &[(usize, usize)]) -> Allocation {
        min_cost_allocation(&self.t, overrides)
    }
}

/// Runs a strategy body on an engine started from `t`.
pub(crate) fn drive(mech: &mut MechanismHandle, t: Instance, body: impl FnOnce(&mut Engine) -> Flow<Stop>) -> Result<Run, AdversaryError> {
    let mut e = Engine::new(mech, t);
    let stop = match e.initial() {
        Err(s) => s,
        Ok(()) => match body(&mut e) {
            Ok(s) | Err(s) => s,
        },
    };
    e.finish_run(stop)
}
