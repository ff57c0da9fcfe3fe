//! Acceptance criteria. Each test prints one PASS/FAIL line with its measured
//! numbers before asserting.

use std::sync::{Mutex, MutexGuard};
use std::time::{Duration, Instant};

use qot::linalg::{jz_operator, su_generators, Hermitian};
use qot::metrics::{
    decomp_distance_sq, dpt_distance_sq, fidelity_second_derivative, modified_dpt_sq,
    p_swap_fidelity, qfi, self_distance_sq, skew_information, superfidelity, swap_fidelity,
    uhlmann_fidelity, ConeKind, Formulation, ObservableSet,
};
use qot::sdp::SolverSettings;
use qot::states::{evolve, random_density_hs, random_pure, DensityMatrix, SeedSpec};

/// Criteria run one at a time so their timings do not include each other.
static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn verdict(id: u32, pass: bool, what: &str, detail: String, elapsed: Duration) -> bool {
    println!(
        "criterion {id:>2} [{}] {what}: {detail} ({:.1} s)",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    pass
}

fn pair(d: usize, seed: u64, k: u64) -> (DensityMatrix, DensityMatrix) {
    (
        random_density_hs(d, SeedSpec::new(seed, 2 * k)),
        random_density_hs(d, SeedSpec::new(seed, 2 * k + 1)),
    )
}

#[test]
fn criterion_01_worked_example() {
    let _serial = serial();
    let t0 = Instant::now();
    let settings = SolverSettings::default();
    let rho = DensityMatrix::maximally_mixed(2);
    let sigma = DensityMatrix::basis(2, 0);
    let z = ObservableSet::z(2);
    let d = dpt_distance_sq(&rho, &sigma, &z, Formulation::Dpt, ConeKind::Ppt, &settings)
        .unwrap()
        .value;
    let m = modified_dpt_sq(&rho, &sigma, &z, ConeKind::Ppt, &settings)
        .unwrap()
        .value;
    let e = decomp_distance_sq(&rho, &sigma, &z, &settings)
        .unwrap()
        .value;
    let elapsed = t0.elapsed();
    let pass = (d - 1.0).abs() <= 1e-4
        && (m - 1.0).abs() <= 1e-4
        && e == 0.5
        && elapsed < Duration::from_secs(5);
    assert!(verdict(
        1,
        pass,
        "worked example",
        format!("dpt={d:.9} modified={m:.9} decomp={e}"),
        elapsed
    ));
}

#[test]
fn criterion_02_qubit_swap_fidelity_equals_fidelity() {
    let _serial = serial();
    let t0 = Instant::now();
    let settings = SolverSettings::default();
    let mut worst = 0.0_f64;
    for k in 0..200 {
        let (rho, sigma) = pair(2, 2, k);
        let fs = swap_fidelity(&rho, &sigma, ConeKind::Ppt, &settings).unwrap();
        worst = worst.max((fs.value - uhlmann_fidelity(&rho, &sigma).unwrap()).abs());
    }
    let elapsed = t0.elapsed();
    let pass = worst <= 1e-4 && elapsed < Duration::from_secs(120);
    assert!(verdict(
        2,
        pass,
        "qubit F_S(PPT) = F, 200 pairs",
        format!("max deviation {worst:.3e}"),
        elapsed
    ));
}

#[test]
fn criterion_03_fidelity_sandwich() {
    let _serial = serial();
    let t0 = Instant::now();
    // certified gap 5e-6 per solve keeps two-solve comparisons inside the 1e-5 slack
    let settings = SolverSettings::default().with_tolerance(5e-7);
    let mut failures = Vec::new();
    let mut worst = f64::INFINITY;
    for d in [3, 4] {
        for k in 0..100 {
            let (rho, sigma) = pair(d, 3, k);
            let f = uhlmann_fidelity(&rho, &sigma).unwrap();
            let ppt = swap_fidelity(&rho, &sigma, ConeKind::Ppt, &settings)
                .unwrap()
                .value;
            let all = swap_fidelity(&rho, &sigma, ConeKind::All, &settings)
                .unwrap()
                .value;
            let margin = (ppt - (f - 1e-5))
                .min(f.sqrt() + 1e-5 - ppt)
                .min(all + 1e-5 - ppt);
            worst = worst.min(margin);
            if margin < 0.0 {
                failures.push((d, k));
            }
        }
    }
    let elapsed = t0.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(600);
    let detail = format!("violations {failures:?}, smallest slack {worst:.3e}");
    assert!(verdict(
        3,
        pass,
        "F <= F_S(PPT) <= min(sqrt F, F_S(ALL)), d=3,4 x 100",
        detail,
        elapsed
    ));
}

#[test]
fn criterion_04_self_distance_closed_form() {
    let _serial = serial();
    let t0 = Instant::now();
    let settings = SolverSettings::default();
    let mut worst = 0.0_f64;
    for d in [2, 3] {
        let obs = ObservableSet::su(d);
        for k in 0..50 {
            let rho = random_density_hs(d, SeedSpec::new(4, k));
            let sdp = dpt_distance_sq(&rho, &rho, &obs, Formulation::Dpt, ConeKind::All, &settings)
                .unwrap()
                .value;
            let skew: f64 = obs
                .ops()
                .iter()
                .map(|h| skew_information(&rho, h).unwrap())
                .sum();
            worst = worst.max((sdp - skew).abs());
        }
    }
    let pass = worst <= 1e-4;
    assert!(verdict(
        4,
        pass,
        "self-distance = sum of skew information",
        format!("max deviation {worst:.3e}"),
        t0.elapsed()
    ));
}

#[test]
fn criterion_05_full_set_identities() {
    let _serial = serial();
    let t0 = Instant::now();
    let settings = SolverSettings::default();
    let mut worst_f = 0.0_f64;
    let mut worst_s = 0.0_f64;
    for d in [2, 3] {
        let obs = ObservableSet::su(d);
        for k in 0..50 {
            let (rho, sigma) = pair(d, 5, k);
            let dpt = dpt_distance_sq(
                &rho,
                &sigma,
                &obs,
                Formulation::Dpt,
                ConeKind::Ppt,
                &settings,
            )
            .unwrap()
            .value;
            let fs = swap_fidelity(&rho, &sigma, ConeKind::Ppt, &settings)
                .unwrap()
                .value;
            worst_s = worst_s.max((dpt - (2.0 * d as f64 - 2.0 * fs)).abs());
            if d == 2 {
                worst_f = worst_f
                    .max((dpt - (4.0 - 2.0 * uhlmann_fidelity(&rho, &sigma).unwrap())).abs());
            }
        }
    }
    let pass = worst_f <= 2e-4 && worst_s <= 2e-4;
    let detail = format!(
        "|D - (4 - 2F)| <= {worst_f:.3e} (d=2), |D - (2d - 2F_S)| <= {worst_s:.3e} (d=2,3)"
    );
    assert!(verdict(
        5,
        pass,
        "full-set identity chain",
        detail,
        t0.elapsed()
    ));
}

#[test]
fn criterion_06_dynamics_tangency() {
    let _serial = serial();
    let t0 = Instant::now();
    let settings = SolverSettings::default().with_tolerance(1e-6);
    let h = jz_operator(4);
    let step = 0.05;
    let mut worst = 0.0_f64;
    let mut rows = Vec::new();
    for k in 0..3 {
        let rho = random_density_hs(4, SeedSpec::new(6, k));
        let target = -qfi(&rho, &h).unwrap() / 2.0;
        let fd_f = fidelity_second_derivative(&rho, &h, step).unwrap();
        let fs = |theta: f64| {
            let moved = evolve(&rho, &h, theta).unwrap();
            swap_fidelity(&rho, &moved, ConeKind::Ppt, &settings)
                .unwrap()
                .value
        };
        let fd_s = (fs(step) + fs(-step) - 2.0 * fs(0.0)) / (step * step);
        worst = worst.max((fd_f - target).abs()).max((fd_s - target).abs());
        rows.push(format!("{target:.4}/{fd_f:.4}/{fd_s:.4}"));
    }
    let pass = worst <= 1e-2;
    let detail = format!(
        "-qfi/2 vs F'' vs F_S'': {}; max deviation {worst:.3e}",
        rows.join(", ")
    );
    assert!(verdict(
        6,
        pass,
        "second derivatives at theta=0, d=4, J_z",
        detail,
        t0.elapsed()
    ));
}

#[test]
fn criterion_07_pure_pair_distance() {
    let _serial = serial();
    let t0 = Instant::now();
    let settings = SolverSettings::default();
    let mut worst = 0.0_f64;
    for d in [2, 3] {
        let obs = ObservableSet::su(d);
        for k in 0..100 {
            let psi = random_pure(d, SeedSpec::new(7, 2 * k)).density();
            let phi = random_pure(d, SeedSpec::new(7, 2 * k + 1)).density();
            let want = qot::metrics::delta_sq(&psi, &phi, &obs).unwrap();
            for f in [Formulation::Dpt, Formulation::Gmpc] {
                for cone in [ConeKind::All, ConeKind::Ppt] {
                    let got = dpt_distance_sq(&psi, &phi, &obs, f, cone, &settings)
                        .unwrap()
                        .value;
                    worst = worst.max((got - want).abs());
                }
            }
        }
    }
    let pass = worst <= 1e-4;
    assert!(verdict(
        7,
        pass,
        "pure pairs: SDP = Delta^2",
        format!("max deviation {worst:.3e}"),
        t0.elapsed()
    ));
}

#[test]
fn criterion_08_triangle_with_pure_middle() {
    let _serial = serial();
    let t0 = Instant::now();
    let settings = SolverSettings::default();
    let obs = ObservableSet::su(2);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for k in 0..100 {
        let rho = random_density_hs(2, SeedSpec::new(8, 3 * k));
        let omega = random_pure(2, SeedSpec::new(8, 3 * k + 1)).density();
        let tau = random_density_hs(2, SeedSpec::new(8, 3 * k + 2));
        let dist = |a: &DensityMatrix, b: &DensityMatrix| {
            decomp_distance_sq(a, b, &obs, &settings)
                .unwrap()
                .value
                .max(0.0)
                .sqrt()
        };
        let margin = dist(&rho, &omega) + dist(&omega, &tau) - dist(&rho, &tau);
        worst = worst.min(margin);
        if margin < -1e-7 {
            violations += 1;
        }
    }
    let pass = violations == 0;
    let detail = format!("{violations} violations, smallest slack {worst:.3e}");
    assert!(verdict(
        8,
        pass,
        "triangle inequality, pure middle, 100 triples",
        detail,
        t0.elapsed()
    ));
}

/// Observable sets cycled through by the property suite.
fn observables(d: usize, k: u64) -> ObservableSet {
    match k % 3 {
        0 => ObservableSet::su(d),
        1 => ObservableSet::z(d),
        _ => ObservableSet::new(su_generators(d)[..2].to_vec()).unwrap(),
    }
}

#[test]
fn criterion_09_property_suite() {
    let _serial = serial();
    let t0 = Instant::now();
    let settings = SolverSettings::default();
    let n = 200;
    let mut fails = [0usize; 5];
    let mut conjecture = 0usize;

    for k in 0..n {
        let d = 2 + (k % 2) as usize;
        let rho = random_density_hs(d, SeedSpec::new(9, 2 * k));
        let h: Hermitian = observables(d, k).ops()[0].clone();
        if qfi(&rho, &h).unwrap() / 4.0 < skew_information(&rho, &h).unwrap() - 1e-12 {
            fails[0] += 1;
        }

        let sigma = random_density_hs(d, SeedSpec::new(9, 2 * k + 1));
        let obs = observables(d, k);
        let ppt = dpt_distance_sq(
            &rho,
            &sigma,
            &obs,
            Formulation::Dpt,
            ConeKind::Ppt,
            &settings,
        )
        .unwrap()
        .value;
        let all = dpt_distance_sq(
            &rho,
            &sigma,
            &obs,
            Formulation::Dpt,
            ConeKind::All,
            &settings,
        )
        .unwrap()
        .value;
        if ppt < all - 2e-5 {
            fails[1] += 1;
        }

        // the remaining checks use qubits, where the PPT programs are exact
        let (rho, sigma) = pair(2, 90, k);
        let obs = observables(2, k);
        let cross = dpt_distance_sq(
            &rho,
            &sigma,
            &obs,
            Formulation::Dpt,
            ConeKind::Ppt,
            &settings,
        )
        .unwrap()
        .value;
        let s_rho = self_distance_sq(&rho, &obs, ConeKind::Ppt, &settings)
            .unwrap()
            .value;
        let s_sigma = self_distance_sq(&sigma, &obs, ConeKind::Ppt, &settings)
            .unwrap()
            .value;
        if cross < 0.5 * (s_rho + s_sigma) - 1e-5 {
            fails[2] += 1;
        }

        let psi = random_pure(2, SeedSpec::new(91, k)).density();
        let m_ppt = modified_dpt_sq(&psi, &sigma, &obs, ConeKind::Ppt, &settings)
            .unwrap()
            .value;
        let m_all = modified_dpt_sq(&psi, &sigma, &obs, ConeKind::All, &settings)
            .unwrap()
            .value;
        if m_ppt > m_all + 1e-5 {
            fails[3] += 1;
        }

        if (superfidelity(&rho, &sigma).unwrap() - uhlmann_fidelity(&rho, &sigma).unwrap()).abs()
            > 1e-9
        {
            fails[4] += 1;
        }

        let c_ppt = modified_dpt_sq(&rho, &sigma, &obs, ConeKind::Ppt, &settings)
            .unwrap()
            .value;
        let c_all = modified_dpt_sq(&rho, &sigma, &obs, ConeKind::All, &settings)
            .unwrap()
            .value;
        if c_ppt > c_all + 1e-5 {
            conjecture += 1;
        }
    }
    let pass = fails.iter().all(|&f| f == 0);
    let detail = format!(
        "failures qfi/4>=skew {}, ppt>=all {}, self bound {}, pure modified ordering {}, superfidelity {}; \
         mixed modified ordering (informational) {conjecture}/{n} violations",
        fails[0], fails[1], fails[2], fails[3], fails[4]
    );
    assert!(verdict(
        9,
        pass,
        "property suite, 200 instances each",
        detail,
        t0.elapsed()
    ));
}

#[test]
fn criterion_10_four_party_programs() {
    let _serial = serial();
    let t0 = Instant::now();
    let settings = SolverSettings::default();
    let mut worst_pure = 0.0_f64;
    let mut worst_sym = 0.0_f64;
    for k in 0..20 {
        let psi = random_pure(2, SeedSpec::new(10, 2 * k));
        let phi = random_pure(2, SeedSpec::new(10, 2 * k + 1));
        let v = p_swap_fidelity(&psi.density(), &phi.density(), 2, false, &settings)
            .unwrap()
            .value;
        worst_pure = worst_pure.max((v - psi.overlap(&phi).powi(2)).abs());

        let (rho, sigma) = pair(2, 100, k);
        let free = p_swap_fidelity(&rho, &sigma, 2, false, &settings)
            .unwrap()
            .value;
        let sym = p_swap_fidelity(&rho, &sigma, 2, true, &settings)
            .unwrap()
            .value;
        worst_sym = worst_sym.max((free - sym).abs());
    }
    let elapsed = t0.elapsed();
    let pass = worst_pure <= 1e-4 && worst_sym <= 2e-4 && elapsed < Duration::from_secs(300);
    let detail = format!(
        "pure |F_S^(2) - overlap^4| <= {worst_pure:.3e}, symmetric invariance <= {worst_sym:.3e}"
    );
    assert!(verdict(
        10,
        pass,
        "p = 2 programs, 20 pairs",
        detail,
        elapsed
    ));
}
