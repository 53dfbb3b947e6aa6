//! Acceptance suite: one line per criterion, `PASS` or `FAIL`, with the
//! measured quantities and wall time. Criteria run one after another so the
//! timings are not inflated by each other.
//!
//! `cargo test --test acceptance -- 3 8` runs only the listed criteria.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use dirapprox::abscissa::NamedRule;
use dirapprox::{
    build_universal, chi, constrained_fit, estimate_abscissas, isometry_check, laurent_decompose, lift, minimax_fit, rational_dirichlet_fit,
    unlift, verify_schedule, zeta_chordal_convergence_check, ChordalGrid, CoefficientRule, CompactSetSpec, Complex64, Density,
    DirichletPolynomial, FitOptions, IsometryPlan, LaurentOptions, SpherePoint, TargetEntry, TargetFamily, TargetFunction,
    UniversalOptions, VerifyOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_poly(rng: &mut ChaCha8Rng, max_n: usize) -> DirichletPolynomial {
    let n = rng.gen_range(1..=max_n);
    DirichletPolynomial::new((0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()).unwrap()
}

fn bohr_isometry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let plan = IsometryPlan::default();
    let mut worst = 0.0f64;
    let mut failures = 0;
    for _ in 0..50 {
        let p = random_poly(&mut rng, 20);
        let r = isometry_check(&p, &plan).unwrap();
        let gap = (r.halfplane - r.polydisc).abs() / r.halfplane.max(r.polydisc);
        worst = worst.max(gap);
        if gap > 0.02 {
            failures += 1;
        }
    }
    Outcome { pass: failures == 0, detail: format!("50 polynomials, worst relative gap {worst:.3e} (limit 2e-2), {failures} over") }
}

fn round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut bad = 0;
    for _ in 0..1000 {
        let mut p = random_poly(&mut rng, 200);
        // sparse supports exercise zero coefficients too
        let coeffs: Vec<Complex64> = p.coeffs().iter().map(|&a| if rng.gen_bool(0.3) { c(0.0, 0.0) } else { a }).collect();
        p = DirichletPolynomial::new(coeffs).unwrap();
        if unlift(&lift(&p)).unwrap() != p {
            bad += 1;
        }
    }
    Outcome { pass: bad == 0, detail: format!("1000 polynomials (N ≤ 200), {bad} not reproduced exactly") }
}

fn mergelyan_decay() -> Outcome {
    let set = CompactSetSpec::disc(c(-1.0, 0.0), 0.5).unwrap().discretize(&Density::default()).unwrap();
    let opts = FitOptions::default();
    let e10 = minimax_fit(&set, &TargetFunction::Exp, 10, &opts).unwrap().minimax_error;
    let e60 = minimax_fit(&set, &TargetFunction::Exp, 60, &opts).unwrap().minimax_error;
    Outcome { pass: e60 < 0.5 * e10 && e60 < 1e-2, detail: format!("E(10) = {e10:.3e}, E(60) = {e60:.3e} (need < E(10)/2 and < 1e-2)") }
}

fn simultaneous_approximation() -> Outcome {
    let set = CompactSetSpec::k_m(1).translate(c(-0.5, 0.0)).discretize(&Density::default()).unwrap();
    let f = DirichletPolynomial::monomial(2, c(1.0, 0.0));
    let g = TargetFunction::constant(c(1.0, 0.0));
    let (sigma, eps) = (1.0, 0.5);
    let mut last = String::new();
    for n in [25, 50, 100, 200, 400] {
        let r = constrained_fit(&set, &g, &f, sigma, eps, n, &FitOptions::default()).unwrap();
        let recomputed = (&r.polynomial - &f.resized(n)).seminorm_sigma(sigma);
        last = format!("N = {n}: error {:.4}, ‖h − f‖_σ = {recomputed:.4}, converged {}", r.minimax_error, r.converged);
        if r.converged && r.minimax_error < 0.1 && recomputed <= eps {
            return Outcome { pass: true, detail: last };
        }
    }
    Outcome { pass: false, detail: format!("no N ≤ 400 qualified; last {last}") }
}

fn universal_schedule() -> Outcome {
    let family = TargetFamily::new(vec![
        TargetEntry::new(TargetFunction::constant(c(0.0, 0.0)), 1, 0.1),
        TargetEntry::new(TargetFunction::constant(c(1.0, 0.0)), 1, 0.1),
        TargetEntry::new(TargetFunction::Identity, 1, 0.1),
    ])
    .unwrap();
    let sched = build_universal(&family, &UniversalOptions::default()).unwrap();
    let report = verify_schedule(&sched, &family, &VerifyOptions::default()).unwrap();
    let increasing = sched.cuts.len() == 3 && sched.cuts.windows(2).all(|w| w[0] < w[1]);
    let budgets = report.entries.iter().all(|e| e.block_seminorm.is_some_and(|b| b <= e.budget * (1.0 + 1e-9)));
    let pass = increasing && report.pass && report.ladder_finite && budgets;
    let failure = sched
        .failure
        .as_ref()
        .map(|f| format!("; stage {} stopped at sup-error {:.3} (tol {}) with block seminorm {:.4} ≤ budget {:.4}", f.stage, f.best_error, f.tol, f.best_block_seminorm, f.budget))
        .unwrap_or_default();
    Outcome { pass, detail: format!("cuts {:?}, verify pass {}, ladder finite {}{failure}", sched.cuts, report.pass, report.ladder_finite) }
}

fn laurent_reconstruction() -> Outcome {
    let z0 = c(0.0, 0.0);
    let set = CompactSetSpec::annulus(z0, 1.0, 2.0).unwrap().discretize(&Density::default()).unwrap();
    let f = TargetFunction::Identity.plus(TargetFunction::Inverse { center: z0 });
    let pieces = laurent_decompose(&set, &f, &[z0], &LaurentOptions::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let z = Complex64::from_polar(rng.gen_range(1.0..2.0), rng.gen_range(0.0..std::f64::consts::TAU));
        worst = worst.max((pieces.reconstruct(z) - f.evaluate(z).unwrap()).norm());
    }
    let g = TargetFunction::Exp.plus(TargetFunction::ExpInverse { center: z0 });
    let fit = |d| rational_dirichlet_fit(&set, &g, &[z0], &[d, d], &FitOptions::default(), &LaurentOptions::default()).unwrap().sup_error;
    let (e10, e60) = (fit(10), fit(60));
    Outcome {
        pass: worst <= 1e-8 && e60 <= 0.5 * e10,
        detail: format!("reconstruction {worst:.2e} (limit 1e-8); e^s + e^(1/s): E(10,10) = {e10:.3e}, E(60,60) = {e60:.3e}"),
    }
}

fn chordal_axioms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let point = |rng: &mut ChaCha8Rng| {
        if rng.gen_bool(0.05) {
            SpherePoint::INFINITY
        } else {
            let scale = 10f64.powf(rng.gen_range(-4.0..4.0));
            SpherePoint::new(c(rng.gen_range(-1.0..1.0) * scale, rng.gen_range(-1.0..1.0) * scale))
        }
    };
    let mut worst = 0.0f64;
    for _ in 0..100_000 {
        let (a, b, d) = (point(&mut rng), point(&mut rng), point(&mut rng));
        let (ab, ba) = (chi(a, b), chi(b, a));
        worst = worst.max((ab - ba).abs());
        worst = worst.max(-ab).max(ab - 1.0);
        worst = worst.max(chi(a, d) - ab - chi(b, d));
    }
    Outcome { pass: worst <= 1e-14, detail: format!("10^5 triples, worst violation {worst:.2e}") }
}

fn zeta_chordal() -> Outcome {
    let r = zeta_chordal_convergence_check([-5.0, 5.0], &[10, 100, 1_000, 10_000, 100_000], 0.1, &ChordalGrid::default()).unwrap();
    let errs: Vec<f64> = r.rows.iter().take(4).map(|row| row.chi_sup_error).collect();
    let monotone = errs.windows(2).all(|w| w[1] <= w[0]);
    let found = r.n0.and_then(|n| r.rows.iter().find(|row| row.n == n)).is_some_and(|row| row.chi_sup_error <= 0.1);
    let column: Vec<String> = r.rows.iter().map(|row| format!("{}:{:.4}", row.n, row.chi_sup_error)).collect();
    Outcome { pass: monotone && found, detail: format!("errors {}, N0 = {:?}", column.join(" "), r.n0) }
}

fn abscissas() -> Outcome {
    let ones = estimate_abscissas(&CoefficientRule::AllOnes, 10_000).unwrap();
    let sc = ones.sigma_c_estimate.finite();
    let near_one = sc.is_some_and(|s| (s - 1.0).abs() <= 0.1);
    let rules = vec![
        CoefficientRule::AllOnes,
        CoefficientRule::Alternating,
        CoefficientRule::NamedCustom { name: NamedRule::Mobius },
        CoefficientRule::NamedCustom { name: NamedRule::Liouville },
        CoefficientRule::NamedCustom { name: NamedRule::Log },
        CoefficientRule::NamedCustom { name: NamedRule::Sqrt },
        CoefficientRule::NamedCustom { name: NamedRule::InverseSquare },
        CoefficientRule::explicit(vec![c(1.0, 0.0), c(0.0, 2.0), c(-3.0, 0.0)]).unwrap(),
    ];
    let mut bad = 0;
    let mut count = 0;
    for rule in &rules {
        for t in [1_000, 10_000, 100_000] {
            count += 1;
            if !estimate_abscissas(rule, t).unwrap().satisfies_ordering(0.05) {
                bad += 1;
            }
        }
    }
    Outcome { pass: near_one && bad == 0, detail: format!("all-ones σ_c = {sc:?}; {count} reports, {bad} violate the ordering chain") }
}

fn seminorm_and_shift() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let mut domination = 0.0f64;
    for _ in 0..1000 {
        let p = random_poly(&mut rng, 50);
        let sigma = rng.gen_range(-1.0..2.0);
        let bound = p.seminorm_sigma(sigma);
        let s = c(sigma + rng.gen_range(0.0..3.0), rng.gen_range(-100.0..100.0));
        domination = domination.max((p.evaluate(s).unwrap().norm() - bound) / bound.max(f64::MIN_POSITIVE));
    }
    let mut shift = 0.0f64;
    for _ in 0..1000 {
        let p = random_poly(&mut rng, 50);
        let delta = rng.gen_range(-2.0..2.0);
        let s = c(rng.gen_range(-2.0..2.0), rng.gen_range(-50.0..50.0));
        let lhs = p.shift_by_delta(delta).unwrap().evaluate(s).unwrap();
        let rhs = p.evaluate(s + delta).unwrap();
        let scale = p.seminorm_sigma(s.re + delta);
        shift = shift.max((lhs - rhs).norm() / scale);
    }
    Outcome {
        pass: domination <= 1e-12 && shift <= 1e-12,
        detail: format!("domination excess {domination:.2e}, shift mismatch {shift:.2e} (relative, limit 1e-12)"),
    }
}

type Criterion = (u32, &'static str, u64, fn() -> Outcome);

const CRITERIA: [Criterion; 10] = [
    (1, "Bohr isometry surrogate", 60, bohr_isometry),
    (2, "lift/unlift round trip", 5, round_trip),
    (3, "Mergelyan-type decay", 30, mergelyan_decay),
    (4, "simultaneous approximation", 120, simultaneous_approximation),
    (5, "universal schedule", 180, universal_schedule),
    (6, "Laurent reconstruction and rational fit", 60, laurent_reconstruction),
    (7, "chordal metric axioms", 5, chordal_axioms),
    (8, "zeta chordal convergence", 60, zeta_chordal),
    (9, "abscissa estimates", 20, abscissas),
    (10, "seminorm domination and shift identity", 5, seminorm_and_shift),
];

fn main() -> ExitCode {
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, budget, run) in CRITERIA {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let pass = outcome.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {id:>2} {}: {name}: {} [{:.1} s of {budget} s]",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
