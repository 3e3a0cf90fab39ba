//! Instance constructions and the parameter engine: the block recurrence for `b_k`,
//! its closed form, certified lower bounds and the search over `a`.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::exactnum::{format_decimal, parse_rational, rat, rpow, Rational, TieredValue};
use crate::exec::{map_slice, Exec};
use crate::schedmodel::{Instance, ModelError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ForgeError {
    #[error("parameter a = {a} out of range {range}")]
    AOutOfRange { a: String, range: &'static str },
    #[error("block count r must be at least 1")]
    ZeroBlocks,
    #[error("b has {got} entries, expected {expected}")]
    BLength { got: usize, expected: usize },
    #[error("infeasible parameters: b_{k} < a^-{k}")]
    Infeasible { k: usize },
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("block {block} out of range 1..={r}")]
    BlockOutOfRange { block: usize, r: usize },
    #[error("no feasible a in [{lo}, {hi}]")]
    NoFeasibleA { lo: String, hi: String },
    #[error("no sign change of the polynomial on [{lo}, {hi}]")]
    NoBracket { lo: String, hi: String },
    #[error("no published ratio for r = {0}")]
    NoTableEntry(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Reference pairs `(r, ratio)`; the corresponding `a` is `ratio − 1`.
pub const TABLE1: [(usize, &str); 6] = [(3, "2.873"), (4, "2.911"), (5, "2.932"), (10, "2.966"), (30, "2.988"), (36, "2.990")];

/// The tabulated ratio for `r`.
pub fn table_ratio(r: usize) -> Option<Rational> {
    TABLE1.iter().find(|(k, _)| *k == r).map(|(_, v)| parse_rational(v).expect("table literal"))
}

/// `a = ratio − 1` for the tabulated `r`.
pub fn table_a(r: usize) -> Option<Rational> {
    table_ratio(r).map(|q| q - Rational::one())
}

fn inv_pow(a: &Rational, k: usize) -> Rational {
    rpow(a, -(k as i32))
}

fn check_a_main(a: &Rational) -> Result<(), ForgeError> {
    let two = rat(2, 1);
    if a * a > two && a < &two {
        Ok(())
    } else {
        Err(ForgeError::AOutOfRange { a: a.to_string(), range: "(sqrt 2, 2)" })
    }
}

fn check_a_recurrence(a: &Rational) -> Result<(), ForgeError> {
    if a > &Rational::one() && a < &rat(2, 1) {
        Ok(())
    } else {
        Err(ForgeError::AOutOfRange { a: a.to_string(), range: "(1, 2)" })
    }
}

/// `z = Σ_{j=r+1}^{r+k_c} a^{−j}`.
pub fn chain_sum(a: &Rational, r: usize, k_c: usize) -> Rational {
    (r + 1..=r + k_c).map(|j| inv_pow(a, j)).sum()
}

/// Output of [`compute_b`]: `b[k−1] = b_k` and `s[k] = s(k)` for `k = 0..=r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Recurrence {
    pub b: Vec<Rational>,
    pub z: Rational,
    pub s: Vec<Rational>,
}

/// Solves `s(r) = 0`, `s(k−1) = 2s(k) − a^{−(k−2)} + 4a^{−k} + z` and sets `b_k = s(k−1) − s(k)`.
pub fn compute_b(a: &Rational, r: usize, k_c: usize) -> Result<Recurrence, ForgeError> {
    check_a_recurrence(a)?;
    if r == 0 {
        return Err(ForgeError::ZeroBlocks);
    }
    let z = chain_sum(a, r, k_c);
    let mut s = vec![Rational::zero(); r + 1];
    for k in (1..=r).rev() {
        s[k - 1] = rat(2, 1) * &s[k] - rpow(a, 2 - k as i32) + rat(4, 1) * inv_pow(a, k) + &z;
    }
    let b = (1..=r).map(|k| &s[k - 1] - &s[k]).collect();
    Ok(Recurrence { b, z, s })
}

/// `b_k = 2^{r−k}(a^{−r}(a+2) + z) − a^{−k}(a² + a − 2)`.
pub fn compute_b_closed(a: &Rational, r: usize, k_c: usize, k: usize) -> Rational {
    let z = chain_sum(a, r, k_c);
    let pow2 = Rational::from_integer(num_bigint::BigInt::from(2u32).pow((r - k) as u32));
    pow2 * (inv_pow(a, r) * (a + rat(2, 1)) + z) - inv_pow(a, k) * (a * a + a - rat(2, 1))
}

/// Parameters of the main construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MainParams {
    pub a: Rational,
    pub r: usize,
    pub k_c: usize,
    pub b: Vec<Rational>,
    pub z: Rational,
}

impl MainParams {
    /// Parameters with `b` from [`compute_b`].
    pub fn new(a: Rational, r: usize, k_c: usize) -> Result<Self, ForgeError> {
        check_a_main(&a)?;
        let rec = compute_b(&a, r, k_c)?;
        Ok(MainParams { a, r, k_c, b: rec.b, z: rec.z })
    }

    /// Parameters with an explicit `b` vector.
    pub fn with_b(a: Rational, r: usize, k_c: usize, b: Vec<Rational>) -> Result<Self, ForgeError> {
        check_a_main(&a)?;
        if r == 0 {
            return Err(ForgeError::ZeroBlocks);
        }
        if b.len() != r {
            return Err(ForgeError::BLength { got: b.len(), expected: r });
        }
        let z = chain_sum(&a, r, k_c);
        Ok(MainParams { a, r, k_c, b, z })
    }

    /// Number of players `2r + 1 + k_c`.
    pub fn n(&self) -> usize {
        2 * self.r + 1 + self.k_c
    }

    /// Number of jobs `3r + k_c + n`.
    pub fn m(&self) -> usize {
        3 * self.r + self.k_c + self.n()
    }

    /// `b_k` for `k ∈ 1..=r`.
    pub fn b(&self, k: usize) -> &Rational {
        &self.b[k - 1]
    }

    /// `a^{−k}`.
    pub fn inv_pow(&self, k: usize) -> Rational {
        inv_pow(&self.a, k)
    }

    /// Checks `b_k ≥ a^{−k}` for every block.
    pub fn check_feasible(&self) -> Result<(), ForgeError> {
        match (1..=self.r).find(|&k| self.b(k) < &self.inv_pow(k)) {
            Some(k) => Err(ForgeError::Infeasible { k }),
            None => Ok(()),
        }
    }

    /// Jobs of block `i`: `(first, second, third)`.
    pub fn block_jobs(&self, i: usize) -> (usize, usize, usize) {
        let base = 3 * (i - 1);
        (base + 1, base + 2, base + 3)
    }

    /// Job index of C-chain job `i`.
    pub fn c_job(&self, i: usize) -> usize {
        3 * self.r + i
    }

    /// Player owning C-chain job `i` besides player 1.
    pub fn c_player(&self, i: usize) -> usize {
        2 * self.r + 1 + i
    }

    /// Dummy job of player `i`.
    pub fn dummy_job(&self, i: usize) -> usize {
        3 * self.r + self.k_c + i
    }

    /// Step-2 cost of the second (or third) block job: `max{2a^{−i} − (b_i − a^{−i} + ε₁), a^{−i}}`.
    pub fn transition_cost(&self, i: usize) -> TieredValue {
        let ai = self.inv_pow(i);
        let lowered = TieredValue::from_rational(rat(2, 1) * &ai - (self.b(i) - &ai)) + -&TieredValue::eps(1);
        TieredValue::max_of(&lowered, &TieredValue::from_rational(ai))
    }
}

fn fin(q: Rational) -> TieredValue {
    TieredValue::from_rational(q)
}

fn grid_with_dummies(n: usize, width: usize) -> (Vec<Vec<TieredValue>>, BTreeMap<usize, usize>) {
    let m = width + n;
    let mut costs = vec![vec![TieredValue::infinity(); m]; n];
    let mut dummies = BTreeMap::new();
    for (i, row) in costs.iter_mut().enumerate() {
        row[width + i] = TieredValue::zero();
        dummies.insert(i + 1, width + i + 1);
    }
    (costs, dummies)
}

/// The main instance: `r` blocks, a C chain of length `k_c` and one dummy per player.
pub fn build_main(p: &MainParams) -> Result<Instance, ForgeError> {
    p.check_feasible()?;
    let n = p.n();
    let (mut costs, dummies) = grid_with_dummies(n, 3 * p.r + p.k_c);
    for i in 1..=p.r {
        let (j1, j2, j3) = p.block_jobs(i);
        let two = rat(2, 1) * p.inv_pow(i);
        costs[0][j1 - 1] = fin(p.b(i).clone());
        costs[0][j2 - 1] = fin(two.clone());
        costs[0][j3 - 1] = fin(two);
        let first = fin(p.inv_pow(i - 1));
        costs[2 * i - 1][j1 - 1] = first.clone();
        costs[2 * i - 1][j2 - 1] = TieredValue::eps(1);
        costs[2 * i][j1 - 1] = first;
        costs[2 * i][j3 - 1] = TieredValue::eps(1);
    }
    for i in 1..=p.k_c {
        let j = p.c_job(i);
        costs[0][j - 1] = fin(p.inv_pow(p.r + i));
        costs[p.c_player(i) - 1][j - 1] = fin(p.inv_pow(p.r + i - 1));
    }
    Ok(Instance::new(costs, dummies)?)
}

/// Which block job the transition targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EVariant {
    /// Second block job, co-player `2i`.
    E1,
    /// Third block job, co-player `2i+1`.
    E2,
}

impl EVariant {
    /// `(job offset within the block, co-player)` for block `i`.
    pub fn target(self, i: usize) -> (usize, usize) {
        match self {
            EVariant::E1 => (3 * (i - 1) + 2, 2 * i),
            EVariant::E2 => (3 * (i - 1) + 3, 2 * i + 1),
        }
    }
}

/// Applies transition step 1 or 2 to block `i` of a main-construction instance.
pub fn apply_e(t: &Instance, i: usize, variant: EVariant, step: u8, p: &MainParams) -> Result<Instance, ForgeError> {
    if i == 0 || i > p.r {
        return Err(ForgeError::BlockOutOfRange { block: i, r: p.r });
    }
    if p.b(i) < &p.inv_pow(i) {
        return Err(ForgeError::Infeasible { k: i });
    }
    if t.n() != p.n() || t.m() != p.m() {
        return Err(ForgeError::BadParams(format!("instance is {}x{}, expected {}x{}", t.n(), t.m(), p.n(), p.m())));
    }
    let (job, co) = variant.target(i);
    let mut out = t.clone();
    match step {
        1 => out.set_cost(co, job, fin(p.inv_pow(i - 1)))?,
        2 => {
            out.set_cost(1, 3 * (i - 1) + 1, fin(p.inv_pow(i)))?;
            out.set_cost(1, job, p.transition_cost(i))?;
        }
        _ => return Err(ForgeError::BadParams(format!("step {step} is not 1 or 2"))),
    }
    Ok(out)
}

/// The small constructions and reference matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SmallConstruction {
    /// `[[1, ε₂], [1, ε₁]]`.
    D2x2,
    /// `[[∞, c, ε₁], [b, ∞, ∞], [a, b, ε₂]]` with `a < b < c`.
    E3x3 { a: Rational, b: Rational, c: Rational },
    /// `[[∞, x, ∞, ε₄], [1, ε₂, ε₂, ∞], [1, ε₁, ε₃, ∞]]`, job 4 the dummy of player 1.
    F3x4 { x: Rational },
    /// One shared unit job plus dummies.
    BNr,
    /// A 3 × 2 block of ones plus dummies.
    BCkv,
    /// A chain of `k` geometric jobs plus dummies.
    CKv { a: Rational, k: usize },
    /// One block `[[b₁, 2/a, 2/a], [1, ε, ∞], [1, ∞, ε]]` plus dummies.
    BNew { a: Rational, b1: Rational },
}

impl SmallConstruction {
    fn validate(&self) -> Result<(), ForgeError> {
        let bad = |s: &str| Err(ForgeError::BadParams(s.into()));
        match self {
            SmallConstruction::E3x3 { a, b, c } if !(a.is_positive() && a < b && b < c) => bad("need 0 < a < b < c"),
            SmallConstruction::F3x4 { x } if x <= &Rational::one() => bad("need x > 1"),
            SmallConstruction::CKv { a, k } if *k == 0 || a <= &Rational::one() => bad("need k >= 1 and a > 1"),
            SmallConstruction::BNew { a, b1 } if !a.is_positive() || b1.is_negative() => bad("need a > 0 and b1 >= 0"),
            _ => Ok(()),
        }
    }
}

/// Builds a small instance; the reference matrices get a dummy block appended.
pub fn build_small(which: &SmallConstruction) -> Result<Instance, ForgeError> {
    which.validate()?;
    let e = TieredValue::eps;
    let inf = TieredValue::infinity;
    let one = || TieredValue::from_int(1);
    let inst = match which {
        SmallConstruction::D2x2 => Instance::new(vec![vec![one(), e(2)], vec![one(), e(1)]], BTreeMap::new())?,
        SmallConstruction::E3x3 { a, b, c } => Instance::new(
            vec![
                vec![inf(), fin(c.clone()), e(1)],
                vec![fin(b.clone()), inf(), inf()],
                vec![fin(a.clone()), fin(b.clone()), e(2)],
            ],
            BTreeMap::new(),
        )?,
        SmallConstruction::F3x4 { x } => Instance::new(
            vec![
                vec![inf(), fin(x.clone()), inf(), e(4)],
                vec![one(), e(2), e(2), inf()],
                vec![one(), e(1), e(3), inf()],
            ],
            BTreeMap::from([(1, 4)]),
        )?,
        SmallConstruction::BNr => {
            let (mut c, d) = grid_with_dummies(2, 1);
            c[0][0] = one();
            c[1][0] = one();
            Instance::new(c, d)?
        }
        SmallConstruction::BCkv => {
            let (mut c, d) = grid_with_dummies(3, 2);
            for row in c.iter_mut() {
                row[0] = one();
                row[1] = one();
            }
            Instance::new(c, d)?
        }
        SmallConstruction::CKv { a, k } => {
            let (mut c, d) = grid_with_dummies(k + 1, *k);
            for i in 1..=*k {
                c[0][i - 1] = fin(inv_pow(a, i));
                c[i][i - 1] = fin(inv_pow(a, i - 1));
            }
            Instance::new(c, d)?
        }
        SmallConstruction::BNew { a, b1 } => {
            let (mut c, d) = grid_with_dummies(3, 3);
            let two = fin(rat(2, 1) / a);
            c[0][0] = fin(b1.clone());
            c[0][1] = two.clone();
            c[0][2] = two;
            c[1][0] = one();
            c[1][1] = e(1);
            c[2][0] = one();
            c[2][2] = e(1);
            Instance::new(c, d)?
        }
    };
    Ok(inst)
}

/// The terms whose minimum is the certified bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundTerms {
    pub one_plus_a: Rational,
    /// `1 + Σ b_k + z`.
    pub v0: Rational,
    /// `v[k−1] = V_k`.
    pub v: Vec<Rational>,
}

impl BoundTerms {
    pub fn bound(&self) -> Rational {
        self.v.iter().chain([&self.one_plus_a, &self.v0]).min().expect("nonempty").clone()
    }
}

/// The individual terms of the certified bound.
pub fn bound_terms(p: &MainParams) -> Result<BoundTerms, ForgeError> {
    p.check_feasible()?;
    let one = Rational::one();
    let total: Rational = p.b.iter().sum();
    let v0 = &one + total + &p.z;
    let mut tail = Rational::zero();
    let mut v = vec![Rational::zero(); p.r];
    for k in (1..=p.r).rev() {
        let ak = p.inv_pow(k);
        let prev = p.inv_pow(k - 1);
        let moved = std::cmp::max(rat(2, 1) * &ak - (p.b(k) - &ak), ak.clone());
        v[k - 1] = (&prev + &ak + moved + &tail + &p.z) / &prev;
        tail += p.b(k);
    }
    Ok(BoundTerms { one_plus_a: one + &p.a, v0, v })
}

/// `min(1 + a, V₀, min_k V_k)` at standard part.
pub fn certified_bound(p: &MainParams) -> Result<Rational, ForgeError> {
    bound_terms(p).map(|t| t.bound())
}

/// Bound at `a` with `b` from the recurrence, or `None` when infeasible.
pub fn bound_at(a: &Rational, r: usize, k_c: usize) -> Result<Option<Rational>, ForgeError> {
    let p = MainParams::new(a.clone(), r, k_c)?;
    match certified_bound(&p) {
        Ok(b) => Ok(Some(b)),
        Err(ForgeError::Infeasible { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Searches `[lo, hi]` for the `a` maximizing the certified bound.
///
/// The `1 + a` arm increases in `a` while the block terms decrease, so the maximum
/// sits where `1 + a` stops binding; bisection locates that point to within `tol`
/// using exact dyadic midpoints.
pub fn solve_best_a(r: usize, k_c: usize, lo: &Rational, hi: &Rational, tol: &Rational) -> Result<(Rational, Rational), ForgeError> {
    if lo >= hi || !tol.is_positive() {
        return Err(ForgeError::BadParams("need lo < hi and tol > 0".into()));
    }
    let binds = |a: &Rational| -> Result<Option<(bool, Rational)>, ForgeError> {
        Ok(bound_at(a, r, k_c)?.map(|b| (b == Rational::one() + a, b)))
    };
    let no_feasible = || ForgeError::NoFeasibleA { lo: lo.to_string(), hi: hi.to_string() };
    let at_lo = binds(lo)?.ok_or_else(no_feasible)?;
    if !at_lo.0 {
        return Ok((lo.clone(), at_lo.1));
    }
    if let Some((true, b)) = binds(hi)? {
        return Ok((hi.clone(), b));
    }
    let (mut good, mut bad) = (lo.clone(), hi.clone());
    let mut best = at_lo.1;
    let half = rat(1, 2);
    while &bad - &good > *tol {
        let mid = (&good + &bad) * &half;
        match binds(&mid)? {
            Some((true, b)) => {
                good = mid;
                best = b;
            }
            _ => bad = mid,
        }
    }
    if let Some(b) = bound_at(&bad, r, k_c)? {
        if b > best {
            return Ok((bad, b));
        }
    }
    Ok((good, best))
}

/// Evaluates `Σ coeffs[i] x^i`.
pub fn poly_eval(coeffs: &[i64], x: &Rational) -> Rational {
    coeffs.iter().rev().fold(Rational::zero(), |acc, &c| acc * x + rat(c, 1))
}

/// Bisection root of a polynomial with a sign change on `[lo, hi]`, to within `tol`.
pub fn bisect_root(coeffs: &[i64], lo: &Rational, hi: &Rational, tol: &Rational) -> Result<Rational, ForgeError> {
    let (mut lo, mut hi) = (lo.clone(), hi.clone());
    let flo = poly_eval(coeffs, &lo);
    if flo.is_zero() {
        return Ok(lo);
    }
    let fhi = poly_eval(coeffs, &hi);
    if fhi.is_zero() {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(ForgeError::NoBracket { lo: lo.to_string(), hi: hi.to_string() });
    }
    let lo_sign = flo.signum();
    let half = rat(1, 2);
    while &hi - &lo > *tol {
        let mid = (&lo + &hi) * &half;
        let fm = poly_eval(coeffs, &mid);
        if fm.is_zero() {
            return Ok(mid);
        }
        if fm.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * half)
}

fn default_tol() -> Rational {
    rat(1, 1 << 40)
}

/// Root of `a³ − a² − 2a + 1` in `[3/2, 2]`.
pub fn warmup_root() -> Rational {
    bisect_root(&[1, -2, -1, 1], &rat(3, 2), &rat(2, 1), &default_tol()).expect("bracketed")
}

/// Root of `ρ³ − 2ρ² − 1` in `[2, 3]`.
pub fn small_root() -> Rational {
    bisect_root(&[-1, 0, -2, 1], &rat(2, 1), &rat(3, 1), &default_tol()).expect("bracketed")
}

/// Root of `a² − a − 1` in `[1, 2]`.
pub fn golden_root() -> Rational {
    bisect_root(&[-1, -1, 1], &rat(1, 1), &rat(2, 1), &default_tol()).expect("bracketed")
}

/// Where a bounds row's `a` came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundSource {
    Table,
    Optimized,
}

impl BoundSource {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundSource::Table => "table",
            BoundSource::Optimized => "optimized",
        }
    }
}

/// One row of the bounds sweep.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundsRow {
    pub r: usize,
    pub n: usize,
    pub k_c: usize,
    pub a: Rational,
    pub bound: Option<Rational>,
    pub source: BoundSource,
}

impl BoundsRow {
    pub fn feasible(&self) -> bool {
        self.bound.is_some()
    }

    /// CSV fields: `r, n, k_c, a, bound, feasible, source` with decimals to 6 places.
    pub fn fields(&self) -> [String; 7] {
        [
            self.r.to_string(),
            self.n.to_string(),
            self.k_c.to_string(),
            format_decimal(&self.a, 6),
            self.bound.as_ref().map(|b| format_decimal(b, 6)).unwrap_or_default(),
            self.feasible().to_string(),
            self.source.as_str().to_string(),
        ]
    }
}

/// Search settings for the optimized rows of [`bounds_sweep`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchRange {
    pub lo: Rational,
    pub hi: Rational,
    pub tol: Rational,
}

impl Default for SearchRange {
    fn default() -> Self {
        SearchRange { lo: rat(17, 10), hi: rat(199, 100), tol: rat(1, 10_000) }
    }
}

/// Table-point bounds for each `r` (chain length `k_c`, default `r`) and optionally the
/// optimizer's rows; `r` values are processed independently under `exec`.
pub fn bounds_sweep(rs: &[usize], k_c: Option<usize>, optimize: Option<&SearchRange>, exec: Exec) -> Result<Vec<BoundsRow>, ForgeError> {
    let rows = map_slice(rs, exec, |&r| -> Result<Vec<BoundsRow>, ForgeError> {
        let kc = k_c.unwrap_or(r);
        let n = 2 * r + 1 + kc;
        let a = table_a(r).ok_or(ForgeError::NoTableEntry(r))?;
        let mut out = vec![BoundsRow { r, n, k_c: kc, bound: bound_at(&a, r, kc)?, a, source: BoundSource::Table }];
        if let Some(range) = optimize {
            let (a, bound) = solve_best_a(r, kc, &range.lo, &range.hi, &range.tol)?;
            out.push(BoundsRow { r, n, k_c: kc, a, bound: Some(bound), source: BoundSource::Optimized });
        }
        Ok(out)
    });
    let mut all = Vec::new();
    for chunk in rows {
        all.extend(chunk?);
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(q: &Rational) -> f64 {
        crate::exactnum::TieredValue::from_rational(q.clone()).to_f64()
    }

    #[test]
    fn recurrence_examples() {
        let rec = compute_b(&rat(18736, 10000), 3, 3).unwrap();
        for (got, want) in rec.b.iter().zip([1.141, 0.509, 0.222]) {
            assert!((f(got) - want).abs() <= 0.005, "{} vs {want}", f(got));
        }
        let a = rat(3, 2);
        let empty = compute_b(&a, 1, 0).unwrap();
        assert!(empty.z.is_zero());
        assert_eq!(empty.b[0], rat(4, 1) / &a - &a);
        assert_eq!(empty.s[1], Rational::zero());
        assert!(compute_b(&rat(2, 1), 1, 0).is_err());
    }

    #[test]
    fn closed_form_specializations() {
        let a = rat(1873, 1000);
        for r in 1..=4 {
            let z = chain_sum(&a, r, r);
            assert_eq!(compute_b_closed(&a, r, r, r), inv_pow(&a, r) * (rat(4, 1) - &a * &a) + z);
        }
    }

    #[test]
    fn main_shape() {
        let p = MainParams::new(rat(1618, 1000), 1, 1).unwrap();
        let t = build_main(&p).unwrap();
        assert_eq!((t.n(), t.m()), (4, 8));
        assert_eq!(t.cost(1, 4), &fin(inv_pow(&p.a, 2)));
        assert_eq!(t.cost(4, 4), &fin(inv_pow(&p.a, 1)));
        let p0 = MainParams::new(rat(1618, 1000), 2, 0).unwrap();
        assert_eq!(p0.n(), 5);
        assert_eq!(build_main(&p0).unwrap().m(), 11);
    }

    #[test]
    fn transition_examples() {
        let a = rat(18019, 10000);
        let p = MainParams::with_b(a.clone(), 1, 0, vec![rat(2, 1) / &a]).unwrap();
        assert_eq!(p.transition_cost(1), fin(Rational::one() / &a));
        let tight = MainParams::with_b(a.clone(), 1, 0, vec![Rational::one() / &a]).unwrap();
        assert_eq!(tight.transition_cost(1), fin(rat(2, 1) / &a) + -&TieredValue::eps(1));
        let p2 = MainParams::new(rat(1873, 1000), 2, 2).unwrap();
        let t = build_main(&p2).unwrap();
        let s1 = apply_e(&t, 2, EVariant::E2, 1, &p2).unwrap();
        assert_eq!(s1.cost(5, 6), &fin(inv_pow(&p2.a, 1)));
        let s2 = apply_e(&s1, 2, EVariant::E2, 2, &p2).unwrap();
        assert_eq!(s2.cost(1, 4), &fin(inv_pow(&p2.a, 2)));
        assert_eq!(s2.cost(1, 6), &p2.transition_cost(2));
        assert_eq!(s2.cost(1, 5), t.cost(1, 5));
    }

    #[test]
    fn small_shapes() {
        assert_eq!(build_small(&SmallConstruction::D2x2).unwrap().to_json(), r#"{"n":2,"m":2,"costs":[["1","1e2"],["1","1e1"]]}"#);
        let e = build_small(&SmallConstruction::E3x3 { a: rat(1, 1), b: rat(22055, 10000), c: rat(26589, 10000) }).unwrap();
        assert!(e.cost(1, 1).is_infinite() && e.cost(3, 3) == &TieredValue::eps(2));
        let fx = build_small(&SmallConstruction::F3x4 { x: rat(141421, 100000) }).unwrap();
        assert_eq!(fx.dummy_of(1), Some(4));
        assert_eq!((build_small(&SmallConstruction::BNr).unwrap().m(), build_small(&SmallConstruction::BCkv).unwrap().m()), (3, 5));
        let kv = build_small(&SmallConstruction::CKv { a: rat(1618, 1000), k: 3 }).unwrap();
        assert_eq!((kv.n(), kv.m()), (4, 7));
        assert!(build_small(&SmallConstruction::E3x3 { a: rat(2, 1), b: rat(1, 1), c: rat(3, 1) }).is_err());
        assert!(build_small(&SmallConstruction::F3x4 { x: rat(1, 1) }).is_err());
    }

    #[test]
    fn cubic_roots() {
        assert!((f(&warmup_root()) - 1.80194).abs() < 1e-5);
        let rho = small_root();
        assert!((f(&rho) - 2.20557).abs() < 1e-4);
        assert!((f(&(&rho * (&rho - Rational::one()))) - 2.6589).abs() < 1e-3);
        assert!((f(&golden_root()) - 1.618034).abs() < 1e-6);
        assert!(bisect_root(&[1, 0, 1], &rat(0, 1), &rat(1, 1), &rat(1, 100)).is_err());
    }

    #[test]
    fn certified_examples() {
        let p = MainParams::new(rat(18019, 10000), 1, 60).unwrap();
        assert!(f(&certified_bound(&p).unwrap()) >= 2.8018);
        let kv = MainParams::new(rat(1618, 1000), 1, 60).unwrap();
        let terms = bound_terms(&kv).unwrap();
        assert_eq!(terms.bound(), rat(2618, 1000));
        assert!(f(&terms.v0) > 3.8);
        let bad = MainParams::with_b(rat(18, 10), 2, 2, vec![rat(1, 1), rat(1, 100)]).unwrap();
        assert_eq!(certified_bound(&bad), Err(ForgeError::Infeasible { k: 2 }));
    }
}
