//! Acceptance run: one PASS/FAIL line per criterion with the measured
//! quantity, its tolerance and the runtime against its budget.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tvflow::bounds::{extinction_bound_second, SecondOrderDatum};
use tvflow::exact1d::{evolve_1d, extinction_time_1d, solution_at};
use tvflow::fourth::{
    annulus_calibrable_fourth, evolve_fourth_ball, find_q_star, fourth_ball_closed_form, fourth_ball_ode_n2,
    fourth_ball_rhs, fourth_extinction_time, lambda_saint_venant, BallEvolution, FourthBallState, SvGeometry,
};
use tvflow::fracflow::{dissipation_check, evolve_fractional, wminus1p_growth_check};
use tvflow::minmov::{
    brute_force_prox_oracle, minimizing_movements, numerical_extinction_time, prox_tv_1d, verify_subdifferential, STEADY_TOL,
};
use tvflow::radial2::extinction_time_radial;
use tvflow::regularity::{check_gradient_bound_1d, check_jump_monotonicity, ViolationKind};
use tvflow::{EventKind, Geometry, GridSignal, RadialStack, Signature, StepFunction1D};

const SEED: u64 = 0x7f10_2024;

type Check = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Check);

fn rng(criterion: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED ^ criterion.wrapping_mul(0x9e37_79b9))
}

fn verdict(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn unwrap<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| format!("error: {e}"))
}

/// Random periodic step on [0,1) whose plateaus are all at least `min_len`.
fn random_step(rng: &mut ChaCha8Rng, min_len: f64) -> StepFunction1D<f64> {
    loop {
        let m = rng.gen_range(2..=5);
        let mut cuts: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
        cuts.sort_by(f64::total_cmp);
        let ok = cuts.windows(2).all(|w| w[1] - w[0] >= min_len) && 1.0 - cuts[m - 1] + cuts[0] >= min_len;
        if !ok {
            continue;
        }
        let values: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if let Ok(u) = StepFunction1D::new(cuts, values, 1.0) {
            if !u.is_constant() {
                return u;
            }
        }
    }
}

fn criterion_1() -> Check {
    let mut rng = rng(1);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.gen_range(2..=6u32);
        let a0 = rng.gen_range(0.1..5.0);
        let r0 = rng.gen_range(0.1..5.0);
        let ball = unwrap(RadialStack::ball(n, a0, r0))?;
        let exact = extinction_time_radial(&ball);
        let bound = unwrap(extinction_bound_second(&SecondOrderDatum::Stack(ball)))?.bound;
        let closed = a0 * r0 / n as f64;
        worst = worst.max((bound - exact).abs()).max((exact - closed).abs());
    }
    verdict(worst <= 1e-12, format!("max |bound - T*| = {worst:.3e} (tol 1e-12)"))
}

fn criterion_2() -> Check {
    let mut rng = rng(2);
    let (nodes, tau) = (512, 1e-4);
    let (mut worst_l2, mut worst_t): (f64, f64) = (0.0, 0.0);
    for _ in 0..10 {
        let u0 = random_step(&mut rng, 0.05);
        let t_star = extinction_time_1d(&u0);
        let k = (t_star / (2.0 * tau)).round() as usize;
        let g0 = unwrap(GridSignal::sample_step(&u0, nodes))?;
        let mm = unwrap(minimizing_movements(&g0, tau, k, prox_tv_1d))?;
        let exact = unwrap(GridSignal::sample_step(&unwrap(solution_at(&u0, k as f64 * tau))?, nodes))?;
        let norm = unwrap(g0.lp_norm(2.0))?;
        worst_l2 = worst_l2.max(mm.last_state().l2_distance(&exact) / norm);
        let max_steps = (3.0 * t_star / tau) as usize + 10;
        let t_num = unwrap(numerical_extinction_time(&g0, tau, max_steps, STEADY_TOL, prox_tv_1d))?
            .ok_or_else(|| format!("no numerical extinction within {max_steps} steps"))?;
        worst_t = worst_t.max((t_num - t_star).abs() / t_star);
    }
    verdict(
        worst_l2 <= 0.02 && worst_t <= 0.05,
        format!("max L2 gap / |u0| = {worst_l2:.3e} (tol 2e-2), max extinction error = {worst_t:.3e} (tol 5e-2)"),
    )
}

fn alive(e: BallEvolution) -> Result<FourthBallState, String> {
    match e {
        BallEvolution::Alive(s) => Ok(s),
        BallEvolution::Extinct { time } => Err(format!("unexpected extinction at {time}")),
    }
}

fn rel(fd: f64, exact: f64) -> f64 {
    if exact == 0.0 {
        fd.abs()
    } else {
        (fd - exact).abs() / exact.abs()
    }
}

fn criterion_3() -> Check {
    let mut rng = rng(3);
    let (mut worst_rhs, mut worst_moment): (f64, f64) = (0.0, 0.0);
    let mut drift = true;
    for n in [1u32, 3, 4, 5, 6] {
        let nf = n as f64;
        for _ in 0..20 {
            let a0 = rng.gen_range(0.5..2.0);
            let r0 = rng.gen_range(0.5..2.0);
            let span = unwrap(fourth_extinction_time(n, a0, r0))?.unwrap_or(1.0);
            let t = span * rng.gen_range(0.05..0.8);
            let at = |s: f64| fourth_ball_closed_form(n, a0, r0, s).map_err(|e| e.to_string()).and_then(alive);
            let h = 1e-4 * span;
            let (lo, mid, hi) = (at(t - h)?, at(t)?, at(t + h)?);
            let (da, dr) = unwrap(fourth_ball_rhs(n, mid.a, mid.r))?;
            worst_rhs = worst_rhs.max(rel((hi.a - lo.a) / (2.0 * h), da)).max(rel((hi.r - lo.r) / (2.0 * h), dr));
            let hm = 1e-2 * span;
            let (lo, hi) = (at(t - hm)?, at(t + hm)?);
            let moment = (hi.a * hi.r.powi(3) - lo.a * lo.r.powi(3)) / (2.0 * hm);
            worst_moment = worst_moment.max((moment + nf * (4.0 * nf - 10.0)).abs());
            if n == 4 {
                drift &= lo.r == r0 && mid.r == r0 && hi.r == r0;
            }
        }
    }
    verdict(
        worst_rhs <= 1e-6 && worst_moment <= 1e-9 && drift,
        format!(
            "max rel FD error = {worst_rhs:.3e} (tol 1e-6), max |d(aR^3)/dt + n(4n-10)| = {worst_moment:.3e} (tol 1e-9), n=4 radius fixed: {drift}"
        ),
    )
}

fn criterion_4() -> Check {
    let chi = unwrap(Signature::new(vec![-1]))?;
    let mut worst: f64 = 0.0;
    for n in [1u32, 3, 4, 5, 10] {
        for radius in [0.5, 1.0, 3.0] {
            let lambda = unwrap(lambda_saint_venant(n, SvGeometry::Ball { radius }, &chi))?;
            let nf = n as f64;
            worst = worst.max(rel(lambda, -nf * (nf + 2.0) / radius.powi(3)));
        }
    }
    verdict(worst <= 1e-6, format!("max rel error = {worst:.3e} (tol 1e-6)"))
}

fn criterion_5() -> Check {
    let q = unwrap(find_q_star(2, 1e-6))?;
    let chi = unwrap(Signature::uniform(1, 2))?;
    let below = unwrap(annulus_calibrable_fourth(2, 1.0, q.q_star * (1.0 - 1e-3), &chi))?.feasible;
    let above = unwrap(annulus_calibrable_fourth(2, 1.0, q.q_star * (1.0 + 1e-3), &chi))?.feasible;
    let mut n3 = 0;
    let mut n3_ok = true;
    for sign in [1i8, -1] {
        let chi = unwrap(Signature::uniform(sign, 2))?;
        for k in 0..60 {
            let ratio = 1.01 * (1e5f64 / 1.01).powf(k as f64 / 59.0);
            n3_ok &= unwrap(annulus_calibrable_fourth(3, 1.0, ratio, &chi))?.feasible;
            n3 += 1;
        }
    }
    verdict(
        q.q_star > 1.0 && below && !above && n3_ok,
        format!(
            "Q* = {:.9}, feasible at Q*(1-1e-3): {below}, infeasible at Q*(1+1e-3): {}, n=3 feasible on {n3} ratios in [1.01, 1e5]: {n3_ok}",
            q.q_star, !above
        ),
    )
}

fn criterion_6() -> Check {
    let mut rng = rng(6);
    let (mut worst, mut worst_cert): (f64, f64) = (0.0, 0.0);
    let mut invalid = 0;
    for _ in 0..200 {
        let periodic = rng.gen_bool(0.5);
        let len = rng.gen_range(if periodic { 3 } else { 2 }..=8);
        let geometry = if periodic { Geometry::Periodic1d } else { Geometry::Neumann1d };
        let samples: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = unwrap(GridSignal::new(samples, 1.0 / len as f64, geometry))?;
        let lambda = 10f64.powf(rng.gen_range(-3.0..1.0));
        let w = unwrap(prox_tv_1d(&f, lambda))?;
        let oracle = unwrap(brute_force_prox_oracle(f.samples(), &f.masses(), &f.edge_weights(), lambda, periodic))?;
        worst = w.samples().iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
        let cert = unwrap(verify_subdifferential(&w, &f, lambda))?;
        worst_cert = worst_cert.max(cert.max_residual());
        if !cert.is_valid(1e-8) {
            invalid += 1;
        }
    }
    verdict(
        worst <= 1e-8 && invalid == 0,
        format!("max |prox - oracle| = {worst:.3e} (tol 1e-8), certificate failures = {invalid}, max residual = {worst_cert:.3e}"),
    )
}

fn criterion_7() -> Check {
    let mut rng = rng(7);
    let tol = 1e-9;
    let mut violations = 0;
    let mut pairs = 0;
    for k in 0..50 {
        let u0 = random_step(&mut rng, 0.02);
        if k % 2 == 0 {
            let traj = unwrap(evolve_1d(&u0, extinction_time_1d(&u0) * 1.1))?;
            let r = unwrap(check_jump_monotonicity(&traj, tol))?;
            violations += r.violations.len();
            pairs += r.pairs_checked;
        } else {
            let g0 = unwrap(GridSignal::sample_step(&u0, 128))?;
            let traj = unwrap(minimizing_movements(&g0, 1e-3, 80, prox_tv_1d))?;
            for r in [unwrap(check_jump_monotonicity(&traj, tol))?, unwrap(check_gradient_bound_1d(&traj, tol))?] {
                violations += r.violations.len();
                pairs += r.pairs_checked;
            }
        }
    }
    let ball = unwrap(evolve_fourth_ball(3, 1.0, 1.0, 0.1, 20))?;
    let fourth = unwrap(check_jump_monotonicity(&ball, tol))?;
    let moved = fourth.violations.iter().filter(|v| v.kind == ViolationKind::NewJump).count();
    verdict(
        violations == 0 && moved > 0,
        format!("second-order violations = {violations} over {pairs} pairs, n=3 fourth-order ball jump relocations = {moved}"),
    )
}

fn criterion_8() -> Check {
    let bump = unwrap(StepFunction1D::new(vec![0.0, 0.75], vec![0.0, 1.0], 1.0))?;
    let u0 = unwrap(GridSignal::sample_step(&bump, 256))?;
    let mut lines = Vec::new();
    let mut ok = true;
    for s in [0.0, 0.5, 1.0] {
        let coarse = unwrap(evolve_fractional(&u0, s, 1e-4, 100, 2.0))?;
        let fine = unwrap(evolve_fractional(&u0, s, 5e-5, 200, 2.0))?;
        let (r1, r2) = (dissipation_check(&coarse), dissipation_check(&fine));
        let ratio = r2 / r1;
        let norms = coarse.series("hs_norm").unwrap_or(&[]);
        let extinct = coarse.final_event(EventKind::Extinction).map(|e| e.time);
        let decreasing = norms
            .windows(2)
            .zip(&coarse.times[1..])
            .filter(|(_, t)| extinct.is_none_or(|e| **t < e))
            .all(|(w, _)| w[1] < w[0]);
        let growth = unwrap(wminus1p_growth_check(&coarse, s, 2.0))?.holds;
        ok &= r1 <= 0.05 && (0.4..=0.6).contains(&ratio) && decreasing && growth;
        lines.push(format!(
            "s={s}: residual {r1:.3e} (tol 5e-2), halved-step ratio {ratio:.3} (0.4..0.6), norm decreasing {decreasing}, envelope {growth}"
        ));
    }
    verdict(ok, lines.join("; "))
}

fn criterion_9() -> Check {
    let traj = unwrap(fourth_ball_ode_n2(1.0, 1.0, 1e3))?;
    let s = &traj.states;
    let a_down = s.windows(2).all(|w| w[1].a < w[0].a);
    let r_up = s.windows(2).all(|w| w[1].r > w[0].r);
    let min_gap = s.iter().filter_map(FourthBallState::gap).fold(f64::INFINITY, f64::min);
    let extinct = traj.final_event(EventKind::Extinction).is_some();
    let reached = traj.times.last().copied().unwrap_or(0.0);
    verdict(
        a_down && r_up && min_gap > 0.0 && !extinct && reached == 1e3,
        format!(
            "{} steps to t = {reached}, a decreasing {a_down}, R increasing {r_up}, min gap = {min_gap:.3e}, extinction {extinct}",
            s.len()
        ),
    )
}

fn q(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Ordered pair u ≤ v on a shared partition of multiples of 1/64.
fn ordered_pair(rng: &mut ChaCha8Rng) -> Result<(StepFunction1D<BigRational>, StepFunction1D<BigRational>), String> {
    let m = rng.gen_range(2..=6);
    let mut ticks: Vec<i64> = (0..64).collect();
    ticks.shuffle(rng);
    let mut ticks = ticks[..m].to_vec();
    ticks.sort_unstable();
    let cuts: Vec<BigRational> = ticks.iter().map(|k| q(*k, 64)).collect();
    let u: Vec<BigRational> = (0..m).map(|_| q(rng.gen_range(-8..=8), 8)).collect();
    let v: Vec<BigRational> = u.iter().map(|x| x + q(rng.gen_range(0..=4), 8)).collect();
    Ok((unwrap(StepFunction1D::new(cuts.clone(), u, BigRational::one()))?, unwrap(StepFunction1D::new(cuts, v, BigRational::one()))?))
}

/// Whether u ≤ v at the midpoint of every cell of the common refinement.
fn ordered(u: &StepFunction1D<BigRational>, v: &StepFunction1D<BigRational>) -> bool {
    let mut pts: Vec<BigRational> = u.breakpoints().iter().chain(v.breakpoints()).cloned().collect();
    pts.push(BigRational::zero());
    pts.sort();
    pts.dedup();
    let one = BigRational::one();
    (0..pts.len()).all(|i| {
        let next = if i + 1 < pts.len() { pts[i + 1].clone() } else { &pts[0] + &one };
        let mut mid = (&pts[i] + &next) / q(2, 1);
        if mid >= one {
            mid -= &one;
        }
        u.eval(&mid) <= v.eval(&mid)
    })
}

fn criterion_10() -> Check {
    let mut rng = rng(10);
    let mut checks = 0;
    let mut broken = 0;
    for _ in 0..50 {
        let (u0, v0) = ordered_pair(&mut rng)?;
        if !ordered(&u0, &v0) {
            return Err("generator produced an unordered pair".into());
        }
        let t_max = extinction_time_1d(&u0).max(extinction_time_1d(&v0)) * q(11, 10);
        for j in 0..20 {
            let t = &t_max * q(j, 19);
            let (u, v) = (unwrap(solution_at(&u0, t.clone()))?, unwrap(solution_at(&v0, t))?);
            checks += 1;
            if !ordered(&u, &v) {
                broken += 1;
            }
        }
    }
    verdict(broken == 0, format!("order violations = {broken} over {checks} exact rational comparisons"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("ball extinction equals the second-order bound", 1, criterion_1),
        ("1D exact flow vs minimizing movements", 30, criterion_2),
        ("fourth-order closed form vs its ODE", 1, criterion_3),
        ("Saint-Venant speed on balls", 5, criterion_4),
        ("planar critical annulus ratio", 10, criterion_5),
        ("prox vs brute-force oracle", 10, criterion_6),
        ("jump and gradient monotonicity", 60, criterion_7),
        ("fractional dissipation", 120, criterion_8),
        ("planar fourth-order ball qualitative behaviour", 10, criterion_9),
        ("comparison principle in exact arithmetic", 10, criterion_10),
    ];
    let mut failed = 0;
    for (k, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = elapsed < Duration::from_secs(*budget);
        let (ok, msg) = match outcome {
            Ok(m) => (in_time, m),
            Err(m) => (false, m),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} criterion {}: {name}: {msg}; runtime {:.3} s (budget {budget} s)",
            if ok { "PASS" } else { "FAIL" },
            k + 1,
            elapsed.as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} of {} criteria failed", criteria.len());
        ExitCode::FAILURE
    }
}
