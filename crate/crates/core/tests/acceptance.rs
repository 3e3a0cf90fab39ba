//! End-to-end acceptance checks; prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use mechdock_core::adversary::{run_2x2, run_3x3, run_3x4, run_main, verify_verdict, Strategy, Verdict};
use mechdock_core::exactnum::{rat, Ratio, Rational, TieredValue};
use mechdock_core::exec::{map_indices, Exec};
use mechdock_core::forge::{build_main, certified_bound, compute_b, compute_b_closed, warmup_root, MainParams};
use mechdock_core::mechlib::open;
use mechdock_core::optcore::opt_makespan;
use mechdock_core::schedmodel::{makespan, Allocation, Instance};
use mechdock_core::wmon::{exhaustive_2x2, fuzz, FuzzSpec};
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn f(q: &Rational) -> f64 {
    q.to_f64().expect("finite")
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn timed<T>(limit: Duration, what: &str, body: impl FnOnce() -> T) -> Result<T, String> {
    let start = Instant::now();
    let out = body();
    let took = start.elapsed();
    ensure(took < limit, format!("{what} took {took:?}, limit {limit:?}"))?;
    Ok(out)
}

fn table_certification() -> Outcome {
    let table = [(3, 2873, 0.005), (4, 2911, 0.005), (5, 2932, 0.005), (10, 2966, 0.01)];
    let mut seen = Vec::new();
    for (r, ratio, tol) in table {
        let target = rat(ratio, 1000);
        let a = &target - rat(1, 1);
        let bound = timed(Duration::from_secs(1), &format!("r={r}"), || certified_bound(&MainParams::new(a, r, r).map_err(|e| e.to_string())?).map_err(|e| e.to_string()))??;
        ensure((f(&bound) - f(&target)).abs() <= tol, format!("r={r}: bound {:.6} vs {:.3}", f(&bound), f(&target)))?;
        seen.push(format!("r={r}:{:.4}", f(&bound)));
    }
    Ok(seen.join(" "))
}

fn example_instance() -> Outcome {
    let rec = compute_b(&rat(18736, 10000), 3, 3).map_err(|e| e.to_string())?;
    for (b, want) in rec.b.iter().zip([1.141, 0.509, 0.222]) {
        ensure((f(b) - want).abs() <= 0.005, format!("b = {:.4}, expected {want}", f(b)))?;
    }
    let p = MainParams::new(rat(18736, 10000), 3, 3).map_err(|e| e.to_string())?;
    let t = build_main(&p).map_err(|e| e.to_string())?;
    let printed = [1.141, 1.067, 1.067, 0.509, 0.570, 0.570, 0.222, 0.304, 0.304, 0.081, 0.043, 0.023];
    for (j, want) in printed.iter().enumerate() {
        let got = t.cost(1, j + 1).to_f64();
        ensure((got - want).abs() <= 0.002, format!("row 1 entry {}: {got:.4} vs {want}", j + 1))?;
    }
    Ok(format!("b = ({:.4}, {:.4}, {:.4})", f(&rec.b[0]), f(&rec.b[1]), f(&rec.b[2])))
}

fn warmup() -> Outcome {
    let bound = certified_bound(&MainParams::new(rat(18019, 10000), 1, 60).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure(bound >= rat(28018, 10000), format!("bound {:.6} < 2.8018", f(&bound)))?;
    let root = warmup_root();
    let cubic = |x: f64| x * x * x - x * x - 2.0 * x + 1.0;
    ensure((f(&root) - 1.80194).abs() <= 1e-5, format!("root {:.7}", f(&root)))?;
    ensure(cubic(f(&root)).abs() < 1e-4, "root does not solve the cubic")?;
    Ok(format!("bound {:.6}, root {:.6}", f(&bound), f(&root)))
}

fn leading(v: &Verdict) -> Result<Ratio, String> {
    v.leading_ratio().ok_or_else(|| format!("no ratio in {}", v.kind()))
}

fn main_end_to_end() -> Outcome {
    let p = MainParams::new(rat(1873, 1000), 3, 3).map_err(|e| e.to_string())?;
    let mut mech = open("minwork").map_err(|e| e.to_string())?;
    let run = timed(Duration::from_secs(5), "run_main", || run_main(&mut mech, &p))?.map_err(|e| e.to_string())?;
    ensure(matches!(run.verdict, Verdict::RatioWitness { .. }), format!("verdict {}", run.verdict.kind()))?;
    verify_verdict(&run.verdict).map_err(|d| d.to_string())?;
    let ratio = leading(&run.verdict)?;
    ensure(ratio.at_least(&rat(2872, 1000)), format!("ratio {ratio:?}"))?;
    ensure(run.queries() < 200, format!("{} queries", run.queries()))?;
    Ok(format!("ratio {}, {} queries", run.verdict.bound_text(), run.queries()))
}

fn small_end_to_end() -> Outcome {
    let second = Duration::from_secs(1);
    let mut mech = open("minwork").map_err(|e| e.to_string())?;
    let r2 = timed(second, "run_2x2", || run_2x2(&mut mech))?.map_err(|e| e.to_string())?;
    let r3 = timed(second, "run_3x3", || run_3x3(&mut mech, &rat(1, 1), &rat(22055, 10000), &rat(26589, 10000)))?.map_err(|e| e.to_string())?;
    let r4 = timed(second, "run_3x4", || run_3x4(&mut mech, &rat(141421, 100000)))?.map_err(|e| e.to_string())?;
    for run in [&r2, &r3, &r4] {
        verify_verdict(&run.verdict).map_err(|d| d.to_string())?;
    }
    ensure(leading(&r2.verdict)? == Ratio::Finite(rat(2, 1)), "2x2 ratio is not exactly 2")?;
    ensure(leading(&r3.verdict)?.at_least(&rat(22054, 10000)), "3x3 ratio below 2.2054")?;
    ensure(leading(&r4.verdict)?.at_least(&rat(241420, 100000)), "3x4 ratio below 2.41420")?;
    Ok(format!("{} / {} / {}", r2.verdict.bound_text(), r3.verdict.bound_text(), r4.verdict.bound_text()))
}

fn recurrence_oracle() -> Outcome {
    let mut checked = 0;
    for a in [rat(3, 2), rat(8, 5), rat(1873, 1000), rat(19, 10)] {
        for r in 1..=12 {
            for k_c in 0..=12 {
                let rec = compute_b(&a, r, k_c).map_err(|e| e.to_string())?;
                for k in 1..=r {
                    ensure(rec.b[k - 1] == compute_b_closed(&a, r, k_c, k), format!("mismatch at a={a}, r={r}, k_c={k_c}, k={k}"))?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} coefficients equal"))
}

fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    loop {
        let n = rng.gen_range(2..=5);
        let m = rng.gen_range(2..=8);
        let costs: Vec<Vec<TieredValue>> = (0..n)
            .map(|_| {
                (0..m)
                    .map(|_| match rng.gen_range(0..10) {
                        0 => TieredValue::infinity(),
                        1 => TieredValue::eps(rng.gen_range(1..=2)),
                        2 => TieredValue::from_int(rng.gen_range(1..=4)) + TieredValue::eps(1),
                        _ => TieredValue::from_rational(rat(rng.gen_range(0..=12), rng.gen_range(1..=3))),
                    })
                    .collect()
            })
            .collect();
        let t = Instance::new(costs, Default::default()).expect("valid costs");
        let size: u128 = (1..=m).map(|j| t.active_players(j).len() as u128).product();
        if size > 0 && size <= 100_000 {
            return t;
        }
    }
}

/// Lexicographic enumeration of all allocations to active players; first minimum wins.
fn naive_opt(t: &Instance) -> (TieredValue, Allocation) {
    let options: Vec<Vec<usize>> = (1..=t.m()).map(|j| t.active_players(j)).collect();
    let mut idx = vec![0usize; t.m()];
    let mut best: Option<(TieredValue, Allocation)> = None;
    loop {
        let x = Allocation::new(idx.iter().zip(&options).map(|(&k, o)| o[k]).collect());
        let ms = makespan(t, &x);
        if best.as_ref().is_none_or(|(b, _)| &ms < b) {
            best = Some((ms, x));
        }
        let mut k = t.m();
        loop {
            if k == 0 {
                return best.expect("at least one allocation");
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < options[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn opt_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut nodes = 0u64;
    for case in 0..200 {
        let t = random_instance(&mut rng);
        let bb = opt_makespan(&t, &BTreeSet::new()).map_err(|e| e.to_string())?;
        let (value, witness) = naive_opt(&t);
        ensure(bb.value == value, format!("case {case}: value {} vs {}", bb.value, value))?;
        ensure(bb.witness == witness, format!("case {case}: witness {:?} vs {:?}", bb.witness.owner, witness.owner))?;
        nodes += bb.explored;
    }
    Ok(format!("200 instances agree ({nodes} search nodes)"))
}

fn wmon_suite() -> Outcome {
    let minwork = open("minwork").map_err(|e| e.to_string())?;
    let found = fuzz(&minwork, &FuzzSpec { n: 3, m: 3, lo: 0, hi: 5 }, 10_000, 1, Exec::default()).map_err(|e| e.to_string())?;
    ensure(found.is_empty(), format!("minwork: {} violations", found.len()))?;
    let opt = open("optmakespan").map_err(|e| e.to_string())?;
    let mut grid = vec![1, 2, 3];
    let mut violations = exhaustive_2x2(&opt, &grid, Exec::default()).map_err(|e| e.to_string())?;
    if violations.is_empty() {
        grid.push(4);
        violations = exhaustive_2x2(&opt, &grid, Exec::default()).map_err(|e| e.to_string())?;
    }
    ensure(!violations.is_empty(), "optmakespan: no violation found")?;
    for v in &violations {
        v.reverify()?;
    }
    Ok(format!("minwork 0/10000; optmakespan {} violations over {grid:?}, all re-verified", violations.len()))
}

fn soundness_sweep() -> Outcome {
    let strategies = [
        Strategy::Main { a: rat(1873, 1000), r: 3, k_c: 3 },
        Strategy::S2x2,
        Strategy::S3x3 { a: rat(1, 1), b: rat(22055, 10000), c: rat(26589, 10000) },
        Strategy::S3x4 { x: rat(141421, 100000) },
    ];
    let mut summary = Vec::new();
    for s in &strategies {
        let results = map_indices(10_000, Exec::default(), |seed| -> Result<&'static str, String> {
            let mut mech = open(&format!("random:{seed}")).map_err(|e| e.to_string())?;
            let run = s.run(&mut mech).map_err(|e| format!("seed {seed}: {e}"))?;
            verify_verdict(&run.verdict).map_err(|d| format!("{} seed {seed}: {d}", s.name()))?;
            Ok(run.verdict.kind())
        });
        let mut kinds = std::collections::BTreeMap::new();
        for r in results {
            *kinds.entry(r?).or_insert(0usize) += 1;
        }
        summary.push(format!("{} {kinds:?}", s.name()));
    }
    Ok(summary.join("; "))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("table certification", table_certification),
        ("example instance", example_instance),
        ("warm-up bound", warmup),
        ("main end-to-end", main_end_to_end),
        ("small end-to-end", small_end_to_end),
        ("recurrence oracle", recurrence_oracle),
        ("optimization oracle", opt_oracle),
        ("wmon suite", wmon_suite),
        ("soundness sweep", soundness_sweep),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail}; {secs:.2}s)", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({why}; {secs:.2}s)", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
