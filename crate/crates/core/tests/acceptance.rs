//! Acceptance criteria 1 to 9, one line each. Exits nonzero if any fails.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use cartan_motion::deformation::{convergence_study, orbital_integral_t, limit_rhs};
use cartan_motion::lie_model::{sl2r, sl2r_x_sl2r};
use cartan_motion::motion_group::{
    operator_norm, Grading, InverseFourierGrid, MotionGroup, OperatorProfile, ScalarProfile,
};
use cartan_motion::pairing::{l2_scaling, T0Pairing};
use cartan_motion::quadrature::{ChartKind, KModulation, Resolution, SmoothTestFunction};
use cartan_motion::root_character::{
    det_p_both_ways, discrete_series_character_value, HalfWeight, TorusElement, REGULARITY_EPS,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DET_TOL: f64 = 1e-10;
const ORBIT_REL_TOL: f64 = 1e-8;
const PIPELINE_TOL: f64 = 1e-6;
const LIMIT_TOL: f64 = 1e-3;
const SELF_CONVERGENCE_TOL: f64 = 1e-8;
const PAIR_TOL: f64 = 1e-6;
const L2_REL_TOL: f64 = 1e-14;
const TRACE_TOL: f64 = 1e-6;
const HOMOMORPHISM_TOL: f64 = 1e-6;

const THETAS: [f64; 4] = [PI / 5.0, PI / 3.0, PI / 2.0, 2.0 * PI / 3.0];

struct Outcome {
    pass: bool,
    detail: String,
}

fn budget(pass: bool, elapsed: Duration, limit: Option<Duration>, detail: String) -> Outcome {
    match limit {
        Some(l) if elapsed > l => Outcome {
            pass: false,
            detail: format!("{detail}; runtime {elapsed:.1?} over budget {l:?}"),
        },
        _ => Outcome {
            pass,
            detail: format!("{detail}; runtime {elapsed:.1?}"),
        },
    }
}

fn sl2() -> MotionGroup {
    MotionGroup::new(sl2r()).expect("sl2r model")
}

fn circle(theta: f64) -> TorusElement {
    TorusElement::new(&[theta])
}

fn determinant_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for model in [sl2r(), sl2r_x_sl2r()] {
        let group = MotionGroup::new(model.clone()).expect("model");
        let mut count = 0;
        while count < 100 {
            let angles: Vec<f64> = (0..group.rank()).map(|_| rng.gen_range(-PI..PI)).collect();
            let x = TorusElement::new(&angles);
            let pair = det_p_both_ways(&model, group.datum(), &x).expect("det");
            if pair.direct.abs() <= REGULARITY_EPS {
                continue;
            }
            worst = worst.max(pair.abs_diff());
            count += 1;
        }
        checked += count;
    }
    budget(
        worst < DET_TOL,
        start.elapsed(),
        Some(Duration::from_secs(1)),
        format!("{checked} elements, max |direct - character| = {worst:.2e} (tol {DET_TOL:e})"),
    )
}

fn oracle_functions() -> Vec<(SmoothTestFunction, f64)> {
    let wave = |c: f64| KModulation::new(vec![(vec![0], Complex64::new(1.0, 0.0)), (vec![2], Complex64::new(0.0, c))]);
    vec![
        (SmoothTestFunction::gaussian(1.0, vec![0.0, 0.0], KModulation::constant(1)), PI / 2.0),
        (SmoothTestFunction::gaussian(1.0, vec![0.3, -0.2], KModulation::cosine(1, 0, 0.5)), PI / 3.0),
        (SmoothTestFunction::gaussian(2.0, vec![0.5, 0.0], KModulation::constant(1)), PI / 5.0),
        (SmoothTestFunction::gaussian(0.5, vec![-0.4, 0.4], wave(0.3)), 2.0 * PI / 3.0),
        (SmoothTestFunction::gaussian(1.5, vec![0.0, 0.7], KModulation::cosine(1, 0, -0.8)), 2.0),
        (SmoothTestFunction::gaussian(3.0, vec![0.2, 0.1], wave(-0.5)), 1.0),
        (SmoothTestFunction::bump(2.0, KModulation::constant(1)), PI / 2.0),
        (SmoothTestFunction::bump(1.5, KModulation::cosine(1, 0, 0.5)), PI / 3.0),
        (SmoothTestFunction::bump(3.0, wave(0.25)), 2.0 * PI / 3.0),
        (SmoothTestFunction::bump(2.5, KModulation::constant(1)), 2.5),
    ]
}

fn orbit_oracle() -> Outcome {
    let start = Instant::now();
    let group = sl2();
    let res = Resolution::default();
    let mut worst: f64 = 0.0;
    for (f, theta) in oracle_functions() {
        let x = circle(theta);
        let a = group.orbital_integral_motion(&f, &x, &res).expect("orbital integral");
        let b = group.orbital_integral_motion_orbit(&f, &x, &res).expect("orbit oracle");
        worst = worst.max((a - b).norm() / a.norm().max(b.norm()));
    }
    budget(
        worst < ORBIT_REL_TOL,
        start.elapsed(),
        Some(Duration::from_secs(30)),
        format!("10 functions, max relative error {worst:.2e} (tol {ORBIT_REL_TOL:e})"),
    )
}

/// `setup` is the time spent building the shared inverse-transform table.
fn prop_tau_pipeline(group: &MotionGroup, t0: &T0Pairing, setup: Duration) -> Outcome {
    let start = Instant::now() - setup;
    let scalar = ScalarProfile::gaussian(1.0, 1.0);
    let mut worst: f64 = 0.0;
    for m in 0..4 {
        let mu = HalfWeight::integral(&[m]);
        let profile = OperatorProfile::new(scalar.clone(), mu.clone(), Grading::Plain);
        for theta in THETAS {
            let x = circle(theta);
            let closed = group.prop_tau_closed_form(&profile, &x).expect("closed form");
            let quad = t0.orbital_value(&mu, Grading::Plain, &x).expect("quadrature");
            worst = worst.max((closed - quad).norm());
        }
    }
    budget(
        worst < PIPELINE_TOL,
        start.elapsed(),
        Some(Duration::from_secs(300)),
        format!("16 (mu, theta) pairs, max |closed - quadrature| = {worst:.2e} (tol {PIPELINE_TOL:e})"),
    )
}

fn deformation_limit() -> Outcome {
    let start = Instant::now();
    let group = sl2();
    let res = Resolution::default();
    let fine = res.refined();
    let f = SmoothTestFunction::bump(2.0, KModulation::constant(1));
    let x = circle(PI / 2.0);
    let schedule: Vec<f64> = (0..7).map(|k| 0.5f64.powi(k)).collect();
    let table = convergence_study(&group, &f, &x, &schedule, &res).expect("convergence study");
    let t_last = *schedule.last().expect("schedule");
    let coarse_last = table.rows.last().expect("rows").value;
    let fine_last = orbital_integral_t(&group, &f, &x, t_last, &fine).expect("refined I(t)");
    let fine_limit = limit_rhs(&group, &f, &x, &fine).expect("refined limit");
    let self_conv = (coarse_last - fine_last).norm().max((table.limit - fine_limit).norm());
    let monotone = table.tail_monotone == Some(true);
    let gap = table.final_gap();
    budget(
        monotone && gap < LIMIT_TOL && self_conv < SELF_CONVERGENCE_TOL,
        start.elapsed(),
        Some(Duration::from_secs(600)),
        format!(
            "tail monotone {monotone}, final gap {gap:.2e} (tol {LIMIT_TOL:e}), self-convergence {self_conv:.2e} (tol {SELF_CONVERGENCE_TOL:e}), rate {:.2}",
            table.empirical_rate().unwrap_or(f64::NAN)
        ),
    )
}

fn t0_pairing(group: &MotionGroup, t0: &T0Pairing, wide: &T0Pairing) -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut independence: f64 = 0.0;
    for m in 0..4 {
        let mu = HalfWeight::integral(&[m]);
        for theta in THETAS {
            let x = circle(theta);
            let closed = discrete_series_character_value(group.datum(), &mu, &x).expect("character value");
            let quad = t0.value(&mu, &x).expect("pairing");
            let other = wide.value(&mu, &x).expect("pairing, second profile");
            worst = worst.max((closed - quad).norm());
            independence = independence.max((quad - other).norm());
        }
    }
    budget(
        worst < PAIR_TOL && independence < PAIR_TOL,
        start.elapsed(),
        None,
        format!(
            "max |character - quadrature| = {worst:.2e}, max |g1 - g2 profile| = {independence:.2e} (tol {PAIR_TOL:e})"
        ),
    )
}

fn l2_law() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for model in [sl2r(), sl2r_x_sl2r()] {
        let mu = HalfWeight::integral(&vec![2; model.torus_rank()]);
        let d_p = model.d_p() as i32;
        for t in [1.0, 0.5, 0.25, 0.125] {
            let ratio = l2_scaling(&model, &mu, t).expect("l2 scaling");
            let expected = f64::powi(t, d_p);
            worst = worst.max((ratio - expected).abs() / expected);
        }
    }
    budget(
        worst < L2_REL_TOL,
        start.elapsed(),
        Some(Duration::from_secs(1)),
        format!("both models, t in {{1, 1/2, 1/4, 1/8}}, max relative error {worst:.2e} (tol {L2_REL_TOL:e})"),
    )
}

fn res(torus: usize, radial: usize, angular: usize) -> Resolution {
    Resolution {
        torus,
        radial,
        angular,
        cartesian: 64,
        chart: ChartKind::Polar,
    }
}

fn trace_pair() -> (SmoothTestFunction, SmoothTestFunction) {
    let f = SmoothTestFunction::gaussian(1.0, vec![0.3, -0.2], KModulation::cosine(1, 0, 0.5));
    let h = SmoothTestFunction::gaussian(
        1.0,
        vec![0.5, 0.2],
        KModulation::new(vec![(vec![1], Complex64::new(1.0, 0.0)), (vec![0], Complex64::new(0.5, 0.0))]),
    );
    (f, h)
}

fn trace_property() -> Outcome {
    let start = Instant::now();
    let group = sl2();
    let (f, h) = trace_pair();
    let inner = res(16, 32, 32);
    let outer = res(8, 32, 32);
    let x = circle(PI / 3.0);
    let fh = group.convolution(&f, &h, &inner).expect("f * h");
    let hf = group.convolution(&h, &f, &inner).expect("h * f");
    let a = group.orbital_integral_motion(&fh, &x, &outer).expect("tau(f * h)");
    let b = group.orbital_integral_motion(&hf, &x, &outer).expect("tau(h * f)");
    let diff = (a - b).norm();
    budget(
        diff < TRACE_TOL,
        start.elapsed(),
        None,
        format!("|tau(f*h) - tau(h*f)| = {diff:.2e} at |tau| = {:.3} (tol {TRACE_TOL:e})", a.norm()),
    )
}

fn fourier_homomorphism() -> Outcome {
    let start = Instant::now();
    let group = sl2();
    let (f, h) = trace_pair();
    let z = [0.5, 0.3];
    let cutoff = 16;
    let ft_res = res(16, 32, 32);
    let fh = group.convolution(&f, &h, &res(16, 32, 32)).expect("f * h");
    let a = group.fourier_transform(&fh, &z, cutoff, &ft_res).expect("FT(f * h)");
    let b = group.fourier_transform(&f, &z, cutoff, &ft_res).expect("FT(f)");
    let c = group.fourier_transform(&h, &z, cutoff, &ft_res).expect("FT(h)");
    let err = operator_norm(&(&a.matrix - b.compose(&c)));
    let tail = a.tail_mass.max(b.tail_mass).max(c.tail_mass);
    budget(
        err < HOMOMORPHISM_TOL,
        start.elapsed(),
        None,
        format!(
            "||FT(f*h) - FT(f)FT(h)|| = {err:.2e} (tol {HOMOMORPHISM_TOL:e}), norm {:.3}, max tail mass {tail:.1e}",
            operator_norm(&a.matrix)
        ),
    )
}

fn report_determinism() -> Outcome {
    let start = Instant::now();
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_cartan-motion"))
            .args(["report", "--threads", "1"])
            .env_remove("CARTAN_THREADS")
            .output()
            .expect("run report")
    };
    let first = run();
    let second = run();
    let identical = first.stdout == second.stdout;
    let passed = first.status.code() == Some(0) && second.status.code() == Some(0);
    let all_pass = serde_json::from_slice::<serde_json::Value>(&first.stdout)
        .map(|v| v["pass"] == true)
        .unwrap_or(false);
    budget(
        identical && passed && all_pass,
        start.elapsed(),
        None,
        format!(
            "default config, byte-identical {identical} ({} bytes), exit codes {:?}/{:?}, all experiments pass {all_pass}",
            first.stdout.len(),
            first.status.code(),
            second.status.code()
        ),
    )
}

fn main() -> ExitCode {
    let group = sl2();
    let setup = Instant::now();
    let narrow = T0Pairing::new(
        &group,
        ScalarProfile::gaussian(1.0, 1.0),
        &InverseFourierGrid::default(),
        Resolution::default(),
    )
    .expect("inverse transform table");
    let setup = setup.elapsed();
    let wide = T0Pairing::new(
        &group,
        ScalarProfile::gaussian(2.0, 1.0),
        &InverseFourierGrid::default(),
        Resolution::default(),
    )
    .expect("inverse transform table");
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("determinant identity", Box::new(determinant_identity)),
        ("orbital integral vs orbit oracle", Box::new(orbit_oracle)),
        ("closed form vs inverse-transform pipeline", Box::new(|| prop_tau_pipeline(&group, &narrow, setup))),
        ("deformation limit on the bump", Box::new(deformation_limit)),
        ("t = 0 pairing and profile independence", Box::new(|| t0_pairing(&group, &narrow, &wide))),
        ("L2-trace scaling", Box::new(l2_law)),
        ("trace property", Box::new(trace_property)),
        ("Fourier homomorphism", Box::new(fourier_homomorphism)),
        ("report determinism", Box::new(report_determinism)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = check();
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!("criterion {}: {verdict} {name}: {}", i + 1, outcome.detail);
        if !outcome.pass {
            failed += 1;
        }
    }
    if failed == 0 {
        println!("all 9 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("{failed} of 9 criteria fail");
        ExitCode::FAILURE
    }
}
