//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::sync::Mutex;
use std::time::Instant;

use freespace_core::attainment::{random_function, verify_na_equals_sna};
use freespace_core::extremal::{
    self, check_verdict, classify_all, default_eps_grid, oracle_extreme_points, ClassificationRow, ClassifyOptions,
    EvidenceKind, Status,
};
use freespace_core::free_space::{kr_norm_dual, kr_norm_primal, slice_diameter, FreeElement, Molecule};
use freespace_core::lipschitz::{
    build_f_xy, build_fdent, lip_norm, pair_molecule, FdentScale, LipFunction,
};
use freespace_core::metric::{
    concavity_margin, gallery, random_space, segment_is_trivial, snowflake, Family, RandomSpaceStyle,
};
use freespace_core::rational::{self, int, ratio, to_f64};
use freespace_core::{MetricSpace, PointId, Rational};
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const SEED: u64 = 0x5eed_f00d;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn spaces(seed: u64, count: usize, sizes: std::ops::RangeInclusive<usize>) -> Vec<MetricSpace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(sizes.clone());
            let style = RandomSpaceStyle::pick(&mut rng);
            random_space(&mut rng, n, style)
        })
        .collect()
}

fn molecule_set(space: &MetricSpace, pred: impl Fn(PointId, PointId) -> bool) -> Vec<Molecule> {
    Molecule::all(space).into_iter().filter(|m| pred(m.x, m.y)).collect()
}

fn oracle_equivalence(finite: &[MetricSpace], rows: &Mutex<Vec<ClassificationRow>>) -> Outcome {
    let opts = ClassifyOptions::default();
    finite.par_iter().enumerate().try_for_each(|(i, s)| -> Result<(), String> {
        let trivial = molecule_set(s, |x, y| segment_is_trivial(s, x, y).unwrap());
        let oracle = oracle_extreme_points(s).map_err(|e| e.to_string())?;
        ensure(trivial == oracle, || format!("space {i}: {} trivial vs {} vertices", trivial.len(), oracle.len()))?;
        let classified = classify_all(s, &opts).map_err(|e| format!("space {i}: {e}"))?;
        rows.lock().unwrap().extend(classified);
        Ok(())
    })?;
    Ok(format!("{} spaces, 4-8 points", finite.len()))
}

fn norm_duality() -> Outcome {
    let pool = spaces(SEED + 2, 100, 2..=7);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let elements: Vec<(usize, FreeElement)> = (0..500)
        .map(|k| {
            let s = &pool[k % pool.len()];
            let c = (0..s.len()).map(|_| ratio(rng.gen_range(-12..=12), rng.gen_range(1..=6))).collect();
            (k % pool.len(), FreeElement::new(s, c).unwrap())
        })
        .collect();
    elements.par_iter().try_for_each(|(i, mu)| {
        let s = &pool[*i];
        let dual = kr_norm_dual(s, mu).map_err(|e| e.to_string())?.0;
        let primal = kr_norm_primal(s, mu).map_err(|e| e.to_string())?.0;
        ensure(dual == primal, || format!("space {i}: dual {dual} != primal {primal}"))
    })?;
    pool.par_iter().try_for_each(|s| -> Result<(), String> {
        for (x, y) in s.ordered_pairs() {
            let e = FreeElement::delta(s, x).unwrap().sub(&FreeElement::delta(s, y).unwrap()).unwrap();
            let n = kr_norm_primal(s, &e).map_err(|e| e.to_string())?.0;
            ensure(&n == s.d(x, y), || format!("isometry fails on ({}, {})", s.label(x), s.label(y)))?;
        }
        Ok(())
    })?;
    Ok("500 elements exact, isometry on every pair".into())
}

fn f_xy_properties(finite: &[MetricSpace]) -> Outcome {
    let eps_grid = [ratio(1, 2), ratio(1, 4), ratio(1, 10), ratio(1, 100)];
    let checked = finite
        .par_iter()
        .map(|s| -> Result<usize, String> {
            let mut count = 0;
            for (x, y) in s.ordered_pairs() {
                let f = build_f_xy(s, x, y).unwrap();
                let dxy = s.d(x, y);
                ensure(lip_norm(s, &f).unwrap().value <= int(1), || "(b) lip_norm > 1".into())?;
                for (u, v) in s.ordered_pairs() {
                    let p = pair_molecule(s, &f, Molecule { x: u, y: v });
                    let far = (s.d(x, u) + s.d(u, y)).max(s.d(x, v) + s.d(v, y));
                    ensure(p <= dxy / &far, || "(a) bound fails".into())?;
                    let mut eps: Vec<Rational> = eps_grid.to_vec();
                    eps.push(Rational::one() - &p + ratio(1, 1000));
                    for e in eps.iter().filter(|e| e.is_positive() && p > Rational::one() - *e) {
                        ensure((Rational::one() - e) * &far < *dxy, || "(c) bound fails".into())?;
                    }
                    if p.is_one() {
                        let seg = freespace_core::metric::metric_segment(s, x, y).unwrap();
                        ensure(seg.contains(&u) && seg.contains(&v), || "(d) endpoints off segment".into())?;
                    }
                    count += 1;
                }
            }
            Ok(count)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(format!("(a)-(d) on {} (pair, molecule) combinations", checked.iter().sum::<usize>()))
}

fn normalized(space: &MetricSpace, f: LipFunction) -> LipFunction {
    let l = lip_norm(space, &f).unwrap().value;
    LipFunction::new(space, f.values().iter().map(|v| v / &l).collect()).unwrap()
}

fn slice_bound() -> Outcome {
    let pool = spaces(SEED + 4, 100, 4..=5);
    let alphas = [ratio(1, 2), ratio(1, 4), ratio(1, 8), ratio(9, 10)];
    let epss = [ratio(1, 2), ratio(1, 4), ratio(1, 10), ratio(3, 4)];
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    let instances: Vec<(usize, LipFunction, Rational, Rational)> = (0..pool.len())
        .map(|i| {
            let s = &pool[i];
            let pairs: Vec<_> = s.ordered_pairs().collect();
            let (x, y) = pairs[rng.gen_range(0..pairs.len())];
            let f = match i % 3 {
                0 => build_f_xy(s, x, y).unwrap(),
                1 => normalized(s, random_function(s, &mut rng)),
                _ => build_fdent(s, x, y, &ratio(1, 8), &ratio(1, 2), FdentScale::Rescale)
                    .unwrap_or_else(|_| build_f_xy(s, x, y).unwrap()),
            };
            let a = alphas[rng.gen_range(0..alphas.len())].clone();
            let e = epss[rng.gen_range(0..epss.len())].clone();
            (i, f, a, e)
        })
        .collect();
    let tight = Mutex::new(Rational::zero());
    instances.par_iter().try_for_each(|(i, f, a, e)| {
        let s = &pool[*i];
        let full = slice_diameter(s, f, &(e * a), false).map_err(|e| e.to_string())?;
        let restricted = slice_diameter(s, f, a, true).map_err(|e| e.to_string())?;
        let rhs = int(2) * restricted + int(4) * e;
        let mut t = tight.lock().unwrap();
        if full.clone() / &rhs > *t {
            *t = full.clone() / &rhs;
        }
        ensure(full <= rhs, || format!("instance {i}: {full} > {rhs}"))
    })?;
    let t = tight.into_inner().unwrap();
    Ok(format!("{} instances, max lhs/rhs = {:.4}", instances.len(), to_f64(&t)))
}

fn fdent_contract() -> Outcome {
    let pool = spaces(SEED + 6, 400, 3..=7);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 7);
    let epss = [ratio(1, 5), ratio(1, 8), ratio(1, 16), ratio(1, 100)];
    let taus = [ratio(1, 10), ratio(1, 2), ratio(9, 10), ratio(1, 3)];
    let mut done = 0;
    for s in &pool {
        let pairs: Vec<_> = s.ordered_pairs().collect();
        let (x, y) = pairs[rng.gen_range(0..pairs.len())];
        let eps = &epss[rng.gen_range(0..epss.len())];
        let tau = &taus[rng.gen_range(0..taus.len())];
        let f = match build_fdent(s, x, y, eps, tau, FdentScale::Rescale) {
            Ok(f) => f,
            Err(_) => continue,
        };
        let k = Rational::one() / (Rational::one() + int(4) * eps * tau);
        ensure(lip_norm(s, &f).unwrap().value <= int(1), || "lip_norm > 1".into())?;
        let p = pair_molecule(s, &f, Molecule { x, y });
        ensure(p == k && p > Rational::one() - int(4) * eps * tau, || format!("pairing {p}"))?;
        let unit = s.d(x, y);
        for c in [x, y] {
            let ball: Vec<_> = s.points().filter(|&t| s.d(c, t) / unit <= *eps).collect();
            for &u in &ball {
                for &v in ball.iter().filter(|&&v| v != u) {
                    let q = pair_molecule(s, &f, Molecule { x: u, y: v });
                    ensure(q <= Rational::one() - tau, || "same-ball pairing exceeds 1 - tau".into())?;
                }
            }
        }
        done += 1;
        if done == 60 {
            break;
        }
    }
    ensure(done >= 50, || format!("only {done} instances with disjoint balls"))?;
    Ok(format!("{done} instances"))
}

fn ag_reproduction(rows: &Mutex<Vec<ClassificationRow>>) -> Outcome {
    let s = gallery("ag", 24).map_err(|e| e.to_string())?;
    let (o, x1) = (s.point("0").unwrap(), s.point("x1").unwrap());
    let row = extremal::classify_pair(&s, o, x1, &ClassifyOptions::default()).map_err(|e| e.to_string())?;
    for v in [&row.extreme, &row.exposed_by_fxy, &row.denting, &row.strongly_exposed] {
        check_verdict(&s, v).map_err(|e| format!("{:?}: {e}", v.property))?;
    }
    ensure(row.extreme.status == Status::Proven, || "extreme not proven".into())?;
    ensure(row.denting.status == Status::Refuted, || "denting not refuted".into())?;
    let failures: Vec<_> = row.denting.rows(EvidenceKind::DentingFailure).collect();
    ensure(!failures.is_empty(), || "no denting failure rows".into())?;
    for r in &failures {
        let m = Family::Ag.index_of(&r.witness[0]).unwrap() as i64;
        ensure(r.excess == Some(ratio(2, m)) && r.min_distance == Some(int(1) + ratio(1, m)), || {
            format!("witness x{m} has the wrong values")
        })?;
    }
    ensure(row.strongly_exposed.status == Status::Refuted, || "strongly exposed not refuted".into())?;
    let zs: Vec<_> = row.strongly_exposed.rows(EvidenceKind::ZWitness).collect();
    ensure(zs.len() == 20, || format!("{} (Z) witnesses", zs.len()))?;
    for r in &zs {
        let n = rational::floor_to_u64(r.level.as_ref().unwrap()) as usize;
        let m = Family::Ag.index_of(&r.witness[0]).unwrap();
        ensure(m >= 2 * n, || format!("level {n} witness x{m}"))?;
    }
    let summary = format!("N=24, {} denting failures, 20 (Z) witnesses with m >= 2n", failures.len());
    rows.lock().unwrap().push(row);
    Ok(summary)
}

fn tree_reproduction(rows: &Mutex<Vec<ClassificationRow>>) -> Outcome {
    let s = gallery("tree_omega", 24).map_err(|e| e.to_string())?;
    let (xi, o) = (s.point("xinf").unwrap(), s.point("0").unwrap());
    let row = extremal::classify_pair(&s, xi, o, &ClassifyOptions::default()).map_err(|e| e.to_string())?;
    for v in [&row.extreme, &row.exposed_by_fxy, &row.denting, &row.strongly_exposed] {
        check_verdict(&s, v).map_err(|e| format!("{:?}: {e}", v.property))?;
    }
    ensure(row.denting.status == Status::Proven, || "denting not proven".into())?;
    let table: Vec<_> = row.denting.rows(EvidenceKind::DentingRow).collect();
    ensure(table.len() == default_eps_grid().len(), || "incomplete delta table".into())?;
    ensure(table.iter().all(|r| r.lhs.is_positive()), || "nonpositive delta".into())?;
    ensure(row.strongly_exposed.status == Status::Refuted, || "strongly exposed not refuted".into())?;
    let zs: Vec<_> = row.strongly_exposed.rows(EvidenceKind::ZWitness).collect();
    ensure(zs.len() == 20, || format!("{} (Z) witnesses", zs.len()))?;
    for r in &zs {
        let n = rational::floor_to_u64(r.level.as_ref().unwrap()) as usize;
        let m = Family::TreeOmega.index_of(&r.witness[0]).unwrap();
        ensure(m + 1 >= 2 * n, || format!("level {n} witness x{m}"))?;
    }
    let deltas: Vec<String> = table.iter().map(|r| rational::format(&r.lhs)).collect();
    rows.lock().unwrap().push(row);
    Ok(format!("delta table [{}], 20 (Z) witnesses with m >= 2n-1", deltas.join(", ")))
}

fn snowflake_vertices(rows: &Mutex<Vec<ClassificationRow>>) -> Outcome {
    let pool = spaces(SEED + 8, 50, 3..=6);
    let exps = [ratio(1, 4), ratio(1, 2), ratio(3, 4)];
    let jobs: Vec<(usize, &Rational)> = (0..pool.len()).flat_map(|i| exps.iter().map(move |p| (i, p))).collect();
    let min_margin = Mutex::new(f64::INFINITY);
    jobs.par_iter().try_for_each(|&(i, p)| -> Result<(), String> {
        let base = &pool[i];
        let t = snowflake(base, p).map_err(|e| e.to_string())?;
        let all = Molecule::all(&t);
        let oracle = oracle_extreme_points(&t).map_err(|e| e.to_string())?;
        ensure(oracle == all, || format!("space {i}, p={p}: {} of {} molecules are vertices", oracle.len(), all.len()))?;
        let pf = to_f64(p);
        for (x, y) in t.ordered_pairs() {
            for z in t.points().filter(|&z| z != x && z != y) {
                let gap = to_f64(t.d(x, z)) + to_f64(t.d(z, y)) - to_f64(t.d(x, y));
                let margin = concavity_margin(to_f64(base.d(x, z)), to_f64(base.d(z, y)), pf);
                ensure(margin > 1e-9 && gap >= margin - 1e-9, || {
                    format!("space {i}, p={p}: gap {gap:e} vs margin {margin:e}")
                })?;
                let mut m = min_margin.lock().unwrap();
                *m = m.min(margin);
            }
        }
        let classified = classify_all(&t, &ClassifyOptions::default()).map_err(|e| e.to_string())?;
        rows.lock().unwrap().extend(classified);
        Ok(())
    })?;
    Ok(format!("{} snowflakes, smallest margin {:.3e}", jobs.len(), min_margin.into_inner().unwrap()))
}

fn norm_attainment() -> Outcome {
    let pool = spaces(SEED + 9, 50, 2..=7);
    let reports = pool
        .par_iter()
        .enumerate()
        .map(|(i, s)| verify_na_equals_sna(s, 10, SEED + 100 + i as u64).map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    let total: usize = reports.iter().map(|r| r.samples).sum();
    let bad = reports.iter().filter(|r| !r.passed).count();
    ensure(bad == 0, || format!("{bad} spaces with counterexamples"))?;
    Ok(format!("{total} functions, 0 counterexamples"))
}

fn gallery_rows(rows: &Mutex<Vec<ClassificationRow>>) -> Result<(), String> {
    for fam in Family::ALL {
        let s = gallery(fam.name(), 9).map_err(|e| e.to_string())?;
        let classified = classify_all(&s, &ClassifyOptions::default()).map_err(|e| e.to_string())?;
        rows.lock().unwrap().extend(classified);
    }
    Ok(())
}

fn chain_invariant(rows: &Mutex<Vec<ClassificationRow>>) -> Outcome {
    gallery_rows(rows)?;
    let rows = rows.lock().unwrap();
    let broken = rows.iter().filter(|r| !r.chain_holds()).count();
    ensure(broken == 0, || format!("{broken} of {} rows break the chain", rows.len()))?;
    Ok(format!("{} rows", rows.len()))
}

fn main() -> ExitCode {
    let finite = spaces(SEED, 200, 4..=8);
    let rows = Mutex::new(Vec::new());
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("oracle equivalence", Box::new(|| oracle_equivalence(&finite, &rows))),
        ("norm duality", Box::new(norm_duality)),
        ("f_xy properties", Box::new(|| f_xy_properties(&finite))),
        ("slice diameter bound", Box::new(slice_bound)),
        ("fdent contract", Box::new(fdent_contract)),
        ("ag counterexample", Box::new(|| ag_reproduction(&rows))),
        ("tree counterexample", Box::new(|| tree_reproduction(&rows))),
        ("snowflake vertices", Box::new(|| snowflake_vertices(&rows))),
        ("norm attainment", Box::new(norm_attainment)),
        ("chain invariant", Box::new(|| chain_invariant(&rows))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(run))
            .unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
