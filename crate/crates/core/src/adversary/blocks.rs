//! Strategy on the block construction: walk the blocks in order, trigger a transition
//! where player 1 loses a block's first job, then walk the C chain.

use std::collections::BTreeSet;

use super::engine::{drive, Engine, Flow, Stop};
use super::{AdversaryError, Run};
use crate::exactnum::{rat, Rational, TieredValue};
use crate::forge::{apply_e, build_main, certified_bound, EVariant, MainParams};
use crate::schedmodel::{Instance, MechanismHandle};

/// Attack on the block construction for parameters `p`.
///
/// Every sound outcome reaches `certified_bound(p)` or is unbounded.
pub fn run_main(mech: &mut MechanismHandle, p: &MainParams) -> Result<Run, AdversaryError> {
    let t = build_main(p)?;
    check_overlap(&t, p)?;
    let claimed = certified_bound(p)?;
    let p = p.clone();
    drive(mech, t, move |e| body(e, &p, claimed))
}

/// Block-active and chain-active players may share only player 1.
fn check_overlap(t: &Instance, p: &MainParams) -> Result<(), AdversaryError> {
    let active = |jobs: &mut dyn Iterator<Item = usize>| -> BTreeSet<usize> { jobs.flat_map(|j| t.active_players(j)).collect() };
    let blocks = active(&mut (1..=3 * p.r));
    let chain = active(&mut (1..=p.k_c).map(|i| p.c_job(i)));
    let shared: Vec<usize> = blocks.intersection(&chain).copied().filter(|&q| q != 1).collect();
    if shared.is_empty() {
        Ok(())
    } else {
        Err(AdversaryError::Params(format!("players {shared:?} are active in both the blocks and the chain")))
    }
}

/// Row-`i` edits turning `from` into `to`.
fn row_edits(from: &Instance, to: &Instance, i: usize) -> Vec<(usize, TieredValue)> {
    (1..=from.m()).filter(|&j| from.cost(i, j) != to.cost(i, j)).map(|j| (j, to.cost(i, j).clone())).collect()
}

/// Certificate overrides for blocks after `i` and the chain.
fn later_overrides(p: &MainParams, i: usize) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = (i + 1..=p.r).map(|k| (p.block_jobs(k).0, 2 * k)).collect();
    out.extend((1..=p.k_c).map(|c| (p.c_job(c), p.c_player(c))));
    out
}

fn held_positive(e: &Engine, jobs: impl Iterator<Item = usize>) -> Vec<usize> {
    jobs.filter(|&j| e.x.gets(1, j) && !e.t.cost(1, j).is_zero()).collect()
}

fn body(e: &mut Engine, p: &MainParams, claimed: Rational) -> Flow<Stop> {
    let one_plus_a = Rational::from_integer(1.into()) + &p.a;
    let mut start = 1;
    let mut last: Option<(usize, EVariant)> = None;
    while let Some(i) = (start..=p.r).find(|&i| !e.x.gets(1, p.block_jobs(i).0)) {
        let label = |s: &str| format!("block{i}/{s}");
        let held = held_positive(e, 1..=3 * (i - 1));
        if !held.is_empty() {
            e.zero(&label("trivialize"), 1, &held)?;
        }
        let (j1, j2, j3) = p.block_jobs(i);
        let q = e.x.owner_of(j1);
        let variant = match q {
            _ if q == 2 * i => EVariant::E1,
            _ if q == 2 * i + 1 => EVariant::E2,
            _ => return Err(super::engine::incomplete(&label("holder"), format!("first job held by player {q}"))),
        };
        let (tj, _) = variant.target(i);
        let uj = if tj == j2 { j3 } else { j2 };
        let other = if q == 2 * i { 2 * i + 1 } else { 2 * i };

        if !e.x.gets(q, tj) {
            e.zero(&label("semi-dummy"), q, &[j1])?;
            let mut over = later_overrides(p, i);
            over.extend([(j1, q), (tj, q), (uj, other)]);
            let cert = e.cert(&over);
            return Ok(e.boost(&label("semi-dummy-boost"), 1, cert, rat(3, 1)));
        }

        let t1 = apply_e(&e.t, i, variant, 1, p).map_err(|err| super::engine::incomplete(&label("step1"), err.to_string()))?;
        let mut edits = row_edits(&e.t, &t1, q);
        edits.push((j1, e.t.cost(q, j1).checked_sub(&super::engine::delta()).expect("finite")));
        e.step(&label("step1"), q, edits, Vec::new())?;
        if e.x.gets(q, tj) {
            let mut over = later_overrides(p, i);
            over.extend([(tj, 1), (j1, other), (uj, other)]);
            let cert = e.cert(&over);
            return Ok(e.boost(&label("keep-boost"), q, cert, one_plus_a));
        }

        let t2 = apply_e(&e.t, i, variant, 2, p).map_err(|err| super::engine::incomplete(&label("step2"), err.to_string()))?;
        let edits = row_edits(&e.t, &t2, 1);
        e.step(&label("step2"), 1, edits, Vec::new())?;
        let (has_first, has_target) = (e.x.gets(1, j1), e.x.gets(1, tj));
        if has_first && has_target {
            last = Some((i, variant));
            start = i + 1;
            continue;
        }
        let (zeroed, released) = match (has_first, has_target) {
            (false, true) => (tj, j1),
            (true, false) => (j1, tj),
            _ => return Err(super::engine::incomplete(&label("step2"), "player 1 holds neither job")),
        };
        e.zero(&label("release"), 1, &[zeroed])?;
        let h = e.x.owner_of(released);
        let mut over = later_overrides(p, i);
        over.extend([(j1, 1), (tj, 1)]);
        let cert = e.cert(&over);
        return Ok(e.boost(&label("release-boost"), h, cert, one_plus_a));
    }

    for c in 1..=p.k_c {
        let j = p.c_job(c);
        if e.x.gets(1, j) {
            continue;
        }
        let label = format!("chain{c}");
        let held = held_positive(e, (1..=3 * p.r).chain((1..c).map(|k| p.c_job(k))));
        if !held.is_empty() {
            e.zero(&format!("{label}/trivialize"), 1, &held)?;
        }
        let h = e.x.owner_of(j);
        let mut over: Vec<(usize, usize)> = vec![(j, 1)];
        over.extend((c + 1..=p.k_c).map(|k| (p.c_job(k), p.c_player(k))));
        let cert = e.cert(&over);
        return Ok(e.boost(&format!("{label}/boost"), h, cert, one_plus_a));
    }

    let mut over = match last {
        None => later_overrides(p, 0),
        Some((k, variant)) => {
            let (j1, j2, j3) = p.block_jobs(k);
            let mut o = later_overrides(p, k);
            match variant {
                EVariant::E1 => o.extend([(j1, 2 * k + 1), (j2, 2 * k), (j3, 2 * k + 1)]),
                EVariant::E2 => o.extend([(j1, 2 * k), (j2, 2 * k), (j3, 2 * k + 1)]),
            }
            o
        }
    };
    over.push((p.dummy_job(1), 1));
    let cert = e.cert(&over);
    Ok(e.boost("final/boost", 1, cert, claimed))
}
