//! Strategies on the 2 × 2, 3 × 3 and 3 × 4 constructions.

use super::engine::{delta, drive, Engine, Flow, Stop};
use super::{AdversaryError, Run};
use crate::exactnum::{rat, Rational, TieredValue};
use crate::forge::{build_small, SmallConstruction};
use crate::schedmodel::{Allocation, MechanismHandle};

fn alloc(owner: &[usize]) -> Allocation {
    Allocation::new(owner.to_vec())
}

fn inf() -> TieredValue {
    TieredValue::infinity()
}

fn fin(q: &Rational) -> TieredValue {
    TieredValue::from_rational(q.clone())
}

/// `1 − 2ε₁`.
fn one_minus_eps_prime() -> TieredValue {
    TieredValue::from_int(1) + -&TieredValue::term(rat(2, 1), 1)
}

/// Lowers `e.t[i][j]` by `δ`.
fn lowered(e: &Engine, i: usize, j: usize) -> TieredValue {
    e.t.cost(i, j).checked_sub(&delta()).expect("finite")
}

/// Attack on `[[1, ε₂], [1, ε₁]]`; every sound outcome has ratio at least 2.
pub fn run_2x2(mech: &mut MechanismHandle) -> Result<Run, AdversaryError> {
    let t = build_small(&SmallConstruction::D2x2)?;
    drive(mech, t, body_2x2)
}

fn body_2x2(e: &mut Engine) -> Flow<Stop> {
    let two = rat(2, 1);
    if e.x.gets(2, 2) {
        if e.x.gets(1, 1) {
            e.zero("split/zero-p1", 1, &[1])?;
            return Ok(e.finish("split/zero-p1", alloc(&[1, 1]), None));
        }
        e.zero("p2-all/zero-p2", 2, &[1])?;
        return Ok(e.finish("p2-all/zero-p2", alloc(&[2, 1]), None));
    }
    if e.x.gets(1, 1) {
        e.l1("p1-all/raise", 2, vec![(2, inf())], vec![(1, 2)])?;
        return Ok(e.boost("p1-all/boost", 1, alloc(&[2, 1]), two));
    }
    e.step("swap/lower", 2, vec![(1, one_minus_eps_prime()), (2, TieredValue::eps(3))], Vec::new())?;
    if e.x.gets(1, 2) {
        e.zero("swap/zero-p2", 2, &[1])?;
        return Ok(e.finish("swap/zero-p2", alloc(&[2, 2]), None));
    }
    e.l1("swap/raise", 1, vec![(2, inf())], vec![(2, 2)])?;
    Ok(e.boost("swap/boost", 2, alloc(&[1, 2]), two))
}

/// Attack on `[[∞, c, ε₁], [b, ∞, ∞], [a, b, ε₂]]` with `0 < a < b < c`.
///
/// Outcomes reach `min{(c+b)/b, b/a, (a+b+c)/c}` or are unbounded.
pub fn run_3x3(mech: &mut MechanismHandle, a: &Rational, b: &Rational, c: &Rational) -> Result<Run, AdversaryError> {
    let t = build_small(&SmallConstruction::E3x3 { a: a.clone(), b: b.clone(), c: c.clone() })?;
    let (a, b, c) = (a.clone(), b.clone(), c.clone());
    drive(mech, t, move |e| body_3x3(e, &a, &b, &c))
}

fn body_3x3(e: &mut Engine, a: &Rational, b: &Rational, c: &Rational) -> Flow<Stop> {
    let r_cb = (c + b) / b;
    let r_ba = b / a;
    let r_abc = (a + b + c) / c;
    if e.x.gets(1, 2) {
        if !e.x.gets(1, 3) {
            let lowered_c = fin(c) + -&TieredValue::term(rat(2, 1), 1);
            e.step("p1-second/lower", 1, vec![(2, lowered_c), (3, TieredValue::eps(3))], Vec::new())?;
            if !e.x.gets(1, 3) {
                e.zero("p1-second-only/zero", 1, &[2])?;
                if e.x.gets(2, 1) {
                    return Ok(e.finish("p1-second-only/ratio", alloc(&[3, 1, 1]), Some(r_ba)));
                }
                e.zero("p1-second-only/zero-p3", 3, &[1])?;
                return Ok(e.finish("p1-second-only/gap", alloc(&[3, 1, 1]), None));
            }
        }
        e.l1("p1-both/raise", 3, vec![(3, inf())], vec![(1, 3)])?;
        return Ok(e.boost("p1-both/boost", 1, alloc(&[2, 3, 1]), r_cb));
    }
    if e.x.gets(2, 1) {
        e.zero("p2-first/zero-p3", 3, &[2])?;
        return Ok(e.finish("p2-first/ratio", alloc(&[3, 3, 3]), Some(r_ba)));
    }
    if e.x.gets(3, 3) {
        e.l1("p3-all/raise", 1, vec![(3, inf())], vec![(3, 3)])?;
        if e.x.gets(2, 1) {
            e.zero("p3-all/zero-p3", 3, &[2])?;
            return Ok(e.finish("p3-all/ratio", alloc(&[3, 3, 3]), Some(r_ba)));
        }
        return Ok(e.boost("p3-all/boost", 3, alloc(&[2, 1, 3]), r_abc));
    }
    e.zero("p3-two/zero", 3, &[1, 2])?;
    Ok(e.finish("p3-two/gap", alloc(&[3, 3, 3]), None))
}

/// Attack on `[[∞, x, ∞, ε₄], [1, ε₂, ε₂, ∞], [1, ε₁, ε₃, ∞]]` with `x > 1`.
///
/// Outcomes reach `min{1 + x, (2 + x)/x}` or are unbounded.
pub fn run_3x4(mech: &mut MechanismHandle, x: &Rational) -> Result<Run, AdversaryError> {
    let t = build_small(&SmallConstruction::F3x4 { x: x.clone() })?;
    let x = x.clone();
    drive(mech, t, move |e| body_3x4(e, &x))
}

fn body_3x4(e: &mut Engine, x: &Rational) -> Flow<Stop> {
    let one = Rational::from_integer(1.into());
    let r_1x = &one + x;
    let r_2x = (rat(2, 1) + x) / x;
    let one_cost = TieredValue::from_int(1);
    if e.x.gets(1, 2) {
        return Ok(e.boost("p1-second/boost", 1, alloc(&[2, 2, 3, 1]), r_1x));
    }
    match (e.x.owner_of(1), e.x.owner_of(2)) {
        (2, 2) => {
            e.l1("p2-two/raise-p3", 3, vec![(2, inf())], Vec::new())?;
            if e.x.gets(1, 2) {
                return Ok(e.boost("p2-two/p1-boost", 1, alloc(&[3, 2, 2, 1]), r_1x));
            }
            let j1 = lowered(e, 2, 1);
            e.step("p2-two/swap-up", 2, vec![(1, j1), (2, one_cost)], Vec::new())?;
            if e.x.gets(1, 2) {
                return Ok(e.boost("p2-two/swap-p1-boost", 1, alloc(&[3, 2, 2, 1]), r_1x));
            }
            if e.x.gets(2, 3) {
                e.zero("p2-all/zero", 2, &[1, 2])?;
                return Ok(e.finish("p2-all/gap", alloc(&[2, 2, 3, 1]), None));
            }
            let low = one_minus_eps_prime();
            e.step("p2-two/lower", 2, vec![(1, low.clone()), (2, low), (3, TieredValue::eps(4))], Vec::new())?;
            if e.x.gets(2, 3) {
                e.l1("p2-three/raise-p3", 3, vec![(3, inf())], vec![(2, 3)])?;
                if e.x.gets(1, 2) {
                    return Ok(e.boost("p2-three/p1-boost", 1, alloc(&[3, 2, 2, 1]), r_1x));
                }
                return Ok(e.boost("p2-three/p2-boost", 2, alloc(&[3, 1, 2, 1]), r_2x));
            }
            e.zero("p2-two/zero", 2, &[1, 2])?;
            Ok(e.finish("p2-two/gap", alloc(&[2, 2, 2, 1]), None))
        }
        (2, 3) => {
            e.zero("p2-first/zero", 2, &[1])?;
            Ok(e.finish("p2-first/gap", alloc(&[2, 2, 3, 1]), None))
        }
        (3, 2) => {
            e.step("p3-first/lower", 3, vec![(1, one_minus_eps_prime()), (2, TieredValue::eps(3))], Vec::new())?;
            match e.x.owner_of(2) {
                1 => Ok(e.boost("p3-first/p1-boost", 1, alloc(&[2, 3, 3, 1]), r_1x)),
                2 => {
                    e.zero("p3-first/zero", 3, &[1])?;
                    Ok(e.finish("p3-first/gap", alloc(&[3, 3, 3, 1]), None))
                }
                _ => {
                    if e.x.gets(2, 3) {
                        e.zero("p3-two/zero", 3, &[1, 2])?;
                        return Ok(e.finish("p3-two/gap", alloc(&[3, 3, 3, 1]), None));
                    }
                    e.l1("p3-all/raise-p2", 2, vec![(2, inf()), (3, inf())], vec![(3, 3)])?;
                    if e.x.gets(1, 2) {
                        return Ok(e.boost("p3-all/p1-boost", 1, alloc(&[2, 3, 3, 1]), r_1x));
                    }
                    let j1 = lowered(e, 3, 1);
                    e.step("p3-all/swap-up", 3, vec![(1, j1), (2, one_cost)], Vec::new())?;
                    if e.x.gets(3, 2) {
                        return Ok(e.boost("p3-all/p3-boost", 3, alloc(&[2, 1, 3, 1]), r_2x));
                    }
                    Ok(e.boost("p3-all/swap-p1-boost", 1, alloc(&[2, 3, 3, 1]), r_1x))
                }
            }
        }
        _ => {
            e.zero("p3-both/zero", 3, &[1])?;
            Ok(e.finish("p3-both/gap", alloc(&[3, 2, 3, 1]), None))
        }
    }
}
