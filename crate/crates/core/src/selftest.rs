//! Quick invariant suites run by `padiflow selftest`, on small deterministic
//! samples. The full-size versions live in the test suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::charp::{closure_scan, p_closed_test, reduce_mod_p, Closure};
use crate::exactnum::{int, rat, LogValue, OddPrime, Rational};
use crate::foliation::{blowup_chart, classify_singularity, invariance_defect, separatrix_series, Chart, Poly2, SingularityKind, VectorField, Which};
use crate::gauss::{gauss_norm_log, NormBound};
use crate::ode::{check_self_bounded, find_k1, random_admissible, solve_direct, solve_newton, InstanceShape};
use crate::series::TruncSeries;
use crate::size::{aanalyticity_budget, lambda_exponent, proper_transform, BudgetParams, Extended};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    pub detail: String,
}

type Outcome = std::result::Result<(usize, String), String>;

fn odd(p: u64) -> OddPrime {
    OddPrime::new(p).expect("odd prime literal")
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn flagship() -> VectorField {
    VectorField::new(Poly2::x1(), Poly2::from_terms([((0, 1), int(-1)), ((2, 0), int(1))])).expect("nonzero field")
}

fn oracle(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 32;
    let mut cases = 0;
    for p in [3, 5, 7] {
        let p = odd(p);
        for _ in 0..8 {
            let prob = random_admissible(&mut rng, p, &InstanceShape::new(n));
            let direct = solve_direct(&prob, n).map_err(|e| e.to_string())?;
            let sol = solve_newton(&prob, n).map_err(|e| e.to_string())?;
            ensure(sol.y == direct, || format!("solvers disagree at p = {p}"))?;
            ensure(check_self_bounded(&sol.y, &sol.ledger.certified_r), || format!("self-bound fails at p = {p}"))?;
            ensure(sol.ledger.within_paper_bound().map_err(|e| e.to_string())?, || format!("decrement exceeds the bound at p = {p}"))?;
            cases += 1;
        }
    }
    Ok((cases, format!("Newton == direct at N = {n}")))
}

fn k1_values() -> Outcome {
    for (p, want) in [(3, 6), (5, 8), (11, 11)] {
        let got = find_k1(odd(p));
        ensure(got == want, || format!("k1({p}) = {got}, expected {want}"))?;
    }
    Ok((3, "k1 = 6, 8, 11 at p = 3, 5, 11".into()))
}

fn random_poly(rng: &mut ChaCha8Rng, p: u64, deg: usize, order: usize) -> TruncSeries {
    let terms = (0..=deg).map(|m| {
        let v: i32 = rng.gen_range(-2..=2);
        let unit = rat(rng.gen_range(1..=9) * if rng.gen_bool(0.5) { 1 } else { -1 }, rng.gen_range(1..=9));
        let c = if rng.gen_bool(0.3) { Rational::from(0) } else { Rational::from(p as i64).pow(v) * unit };
        (m, c)
    });
    TruncSeries::from_terms(terms, order)
}

fn gauss_laws(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases = 300;
    for _ in 0..cases {
        let p = odd([3, 5, 7][rng.gen_range(0..3)]);
        let logr = LogValue::log_p(p).scale(&rat(-rng.gen_range(0..4), rng.gen_range(1..4)));
        let order = 16;
        let deg = rng.gen_range(0..8);
        let f = random_poly(&mut rng, p.get(), deg, order);
        let deg = rng.gen_range(0..8);
        let g = random_poly(&mut rng, p.get(), deg, order);
        let nf = gauss_norm_log(&f, &logr);
        let ng = gauss_norm_log(&g, &logr);
        let want = match (nf.value(), ng.value()) {
            (Some(a), Some(b)) => NormBound::Finite(a + b),
            _ => NormBound::MinusInfinity,
        };
        ensure(gauss_norm_log(&(&f * &g), &logr) == want, || format!("multiplicativity fails for {f} and {g}"))?;
        let sum = gauss_norm_log(&(&f + &g), &logr);
        let ultra = match (nf.value(), ng.value()) {
            (Some(a), Some(b)) => a.clone().max(b.clone()),
            (Some(a), None) | (None, Some(a)) => a.clone(),
            (None, None) => continue,
        };
        ensure(sum.le(&ultra), || format!("ultrametric inequality fails for {f} and {g}"))?;
    }
    Ok((cases, "multiplicative and ultrametric".into()))
}

fn separatrix() -> Outcome {
    let v = flagship();
    for n in [2, 5, 16] {
        let phi = separatrix_series(&v, Which::Two, n).map_err(|e| e.to_string())?;
        ensure(phi == TruncSeries::monomial(2, rat(1, 3), n), || format!("phi2 = {phi} at N = {n}"))?;
        let d = invariance_defect(&v, &phi, Which::Two, n).map_err(|e| e.to_string())?;
        ensure(d.is_zero(), || format!("nonzero defect {d}"))?;
    }
    let bumped = &TruncSeries::monomial(2, rat(1, 3), 8) + &TruncSeries::monomial(3, int(1), 8);
    let d = invariance_defect(&v, &bumped, Which::Two, 8).map_err(|e| e.to_string())?;
    ensure(d.valuation() == Some(3), || "perturbed series has the wrong defect order".into())?;
    Ok((4, "phi2 = T^2/3 with zero defect".into()))
}

fn closure() -> Outcome {
    let scan = closure_scan(&flagship(), 3, 97).map_err(|e| e.to_string())?;
    for &(p, c) in &scan {
        let want = if p == 3 { Closure::NotClosed } else { Closure::Closed };
        ensure(c == want, || format!("flagship at p = {p}: {c}"))?;
    }
    let mut cases = scan.len();
    for p in [3u64, 5, 7, 11] {
        for a in 1..p {
            let v = VectorField::new(Poly2::x1(), Poly2::monomial(0, 1, int(a as i64))).expect("nonzero field");
            let f = reduce_mod_p(&v, odd(p)).map_err(|e| e.to_string())?;
            ensure(p_closed_test(&f).map_err(|e| e.to_string())?, || format!("diagonal field a = {a} not closed at p = {p}"))?;
            cases += 1;
        }
    }
    Ok((cases, "flagship closed exactly away from 3; diagonal fields closed".into()))
}

fn blowup() -> Outcome {
    let b = blowup_chart(&flagship(), Chart::One).map_err(|e| e.to_string())?;
    let want = VectorField::new(
        Poly2::from_terms([((1, 0), int(2)), ((3, 1), int(-1))]),
        Poly2::from_terms([((0, 1), int(-1)), ((2, 2), int(1))]),
    )
    .expect("nonzero field");
    ensure(b == want, || format!("chart 1 gives {b}"))?;
    let class = classify_singularity(&b).map_err(|e| e.to_string())?;
    ensure(class.kind == SingularityKind::NondegenerateReduced, || format!("chart 1 class {}", class.kind))?;
    Ok((2, "chart-1 transform matches the hand computation".into()))
}

fn size() -> Outcome {
    let n = 10;
    let p = 5;
    let integral = TruncSeries::from_terms((1..=n).map(|m| (m, int(m as i64))), n);
    let est = lambda_exponent(&integral, p).map_err(|e| e.to_string())?;
    ensure(est.lower_bound_log_p == int(0), || "p-integral graph has a nonzero exponent".into())?;
    let mut terms = vec![(1, int(1))];
    terms.extend((2..=n).map(|m| (m, Rational::from(p as i64).pow(1 - m as i32))));
    let est = lambda_exponent(&TruncSeries::from_terms(terms, n), p).map_err(|e| e.to_string())?;
    ensure(est.lambda_p == Extended::Finite(int(-1)) && est.exact, || format!("lambda = {}", est.lambda_p))?;
    let phi = TruncSeries::from_terms([(2, rat(1, 3)), (3, int(2)), (5, rat(-7, 4))], n);
    let psi = proper_transform(&phi, p).map_err(|e| e.to_string())?;
    ensure(psi.mul_x() == phi, || "proper transform does not round-trip".into())?;
    Ok((3, "integral, lambda = -1 and round-trip cases".into()))
}

fn budget() -> Outcome {
    let params = BudgetParams::new(1, 1);
    let mut prev: Option<Rational> = None;
    for p_max in [100, 1000, 10_000] {
        let b = aanalyticity_budget(&params, p_max).map_err(|e| e.to_string())?;
        if let Some(lo) = &prev {
            ensure(&b.partial.lo >= lo, || format!("partial sum decreases at pMax = {p_max}"))?;
        }
        prev = Some(b.partial.lo.clone());
    }
    Ok((3, "partial sums monotone".into()))
}

/// Runs every suite; `seed` drives the randomized ones.
pub fn run_all(seed: u64) -> Vec<SuiteReport> {
    let suites: Vec<(&'static str, Outcome)> = vec![
        ("oracle", oracle(seed)),
        ("k1", k1_values()),
        ("gauss", gauss_laws(seed)),
        ("separatrix", separatrix()),
        ("pclosed", closure()),
        ("blowup", blowup()),
        ("size", size()),
        ("budget", budget()),
    ];
    suites
        .into_iter()
        .map(|(name, outcome)| match outcome {
            Ok((cases, detail)) => SuiteReport { name, passed: true, cases, detail },
            Err(detail) => SuiteReport { name, passed: false, cases: 0, detail },
        })
        .collect()
}
