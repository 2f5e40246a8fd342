//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test --release -p qness-cli --test acceptance`.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qness_cli::{cmd_expect, cmd_sweep_t, RunConfig};
use qness_core::ising::{
    build_ising_model, build_m_ising_pauli, controlled_block, controlled_string_rotation, gate_count_table,
    IsingSpec, Topology, TrotterOrder,
};
use qness_core::linalg::{max_abs_diff, op_norm, singular_values, HermitianEigen};
use qness_core::observables::{estimate_expectation, sample_expectation, ObservableSpec};
use qness_core::oracle::liouvillian_gap;
use qness_core::qpe::{
    analytic_p0, error_probability_bound, prepare_xi_circuit, run, simulated_error_probability, t_lower_bound,
    trotter_power, xi_vector, NessProblem, OracleMode, PowerLadder, QpeConfig,
};
use qness_core::sim::StateVector;
use qness_core::stats::{linear_fit, log2_fit};
use qness_core::sweep::{sweep_t, SweepRow, SweepSpec};
use qness_core::{single_spin_model, PauliAxis, PauliString};

const T0: f64 = 0.2;
const FIELDS: [f64; 3] = [0.5, 1.0, 2.0];
const TS: std::ops::RangeInclusive<usize> = 4..=10;

struct Outcome {
    pass: bool,
    lines: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { pass: true, lines: Vec::new() }
    }

    fn check(&mut self, ok: bool, msg: impl Into<String>) {
        self.pass &= ok;
        let tag = if ok { "ok  " } else { "FAIL" };
        self.lines.push(format!("    {tag} {}", msg.into()));
    }

    fn note(&mut self, msg: impl Into<String>) {
        self.lines.push(format!("    info {}", msg.into()));
    }
}

fn ts() -> Vec<f64> {
    TS.map(|t| t as f64).collect()
}

fn single_spin_sweeps() -> Vec<(f64, NessProblem, Vec<SweepRow>)> {
    FIELDS
        .iter()
        .map(|&h| {
            let p = NessProblem::new(single_spin_model(h)).unwrap();
            let rows = sweep_t(&p, &SweepSpec::exact(TS, T0)).unwrap();
            (h, p, rows)
        })
        .collect()
}

fn fidelity_scaling(sweeps: &[(f64, NessProblem, Vec<SweepRow>)], elapsed: f64) -> Outcome {
    let mut o = Outcome::new();
    for (h, _, rows) in sweeps {
        let f: Vec<f64> = rows.iter().map(|r| r.one_minus_f).collect();
        let slope = log2_fit(&ts(), &f).unwrap().slope;
        o.check((-2.3..=-1.7).contains(&slope), format!("h={h}: slope log2(1-F) = {slope:.3}, want [-2.3, -1.7]"));
    }
    o.check(elapsed < 120.0, format!("sweep runtime {elapsed:.2} s, want < 120 s"));
    o
}

fn estimator_scaling(sweeps: &[(f64, NessProblem, Vec<SweepRow>)]) -> Outcome {
    let mut o = Outcome::new();
    for (h, _, rows) in sweeps {
        let dy: Vec<f64> = rows.iter().map(|r| r.delta_sigma_y).collect();
        let dz: Vec<f64> = rows.iter().map(|r| r.delta_sigma_z).collect();
        for (name, d) in [("sigma_y", &dy), ("sigma_z", &dz)] {
            let slope = log2_fit(&ts(), d).unwrap().slope;
            o.check((-1.3..=-0.7).contains(&slope), format!("h={h} {name}: slope log2(delta) = {slope:.3}, want [-1.3, -0.7]"));
            let last = *d.last().unwrap();
            o.check(last < 1e-2, format!("h={h} {name}: relative error at t=10 = {last:.3e}, want < 1e-2"));
        }
    }
    o
}

fn success_probability(sweeps: &[(f64, NessProblem, Vec<SweepRow>)]) -> Outcome {
    let mut o = Outcome::new();
    let mut worst: f64 = 0.0;
    let mut min_p0: f64 = 1.0;
    for (_, p, rows) in sweeps {
        for r in rows {
            min_p0 = min_p0.min(r.p0);
            worst = worst.max((r.p0 - analytic_p0(p, r.t, T0).p0).abs());
        }
    }
    o.check(min_p0 > 0.5, format!("smallest p0 = {min_p0:.6}, want > 1/2"));
    o.check(worst < 1e-9, format!("largest |p0 - analytic| = {worst:.2e}, want < 1e-9"));
    o
}

fn error_probability(sweeps: &[(f64, NessProblem, Vec<SweepRow>)]) -> Outcome {
    let mut o = Outcome::new();
    let g = 0.5;
    for (h, p, rows) in sweeps {
        let violations: Vec<String> = rows
            .iter()
            .filter(|r| r.p_e > r.p_e_bound)
            .map(|r| format!("t={} p_e={:.2e} > {:.2e}", r.t, r.p_e, r.p_e_bound))
            .collect();
        o.check(
            violations.is_empty(),
            if violations.is_empty() {
                format!("h={h}: p_e <= 1/(pi^2 g^2 2^(2t+1)) for t=4..10")
            } else {
                format!("h={h}: bound violated at {}", violations.join(", "))
            },
        );
        // the same bound with the phase scaled by t0, for comparison
        let scaled = rows.iter().all(|r| r.p_e <= error_probability_bound(g * T0, r.t));
        o.note(format!("h={h}: bound with g*t0 in place of g holds: {scaled}"));

        let t = t_lower_bound(g, 1e-3) as usize;
        let out = run(p, &QpeConfig::exact(t, T0)).unwrap();
        let pe = simulated_error_probability(p, &out).unwrap();
        o.check(pe < 1e-3, format!("h={h}: p_e at t_lower_bound = {t} is {pe:.2e}, want < 1e-3"));
    }
    o
}

fn spectral_identities() -> Outcome {
    let mut o = Outcome::new();
    let mut problems = vec![("single-spin h=1".to_string(), NessProblem::new(single_spin_model(1.0)).unwrap())];
    for n in [2, 3] {
        let spec = IsingSpec::new(n, Topology::Chain, 1.0, 1.0).unwrap();
        problems.push((format!("Ising N={n}"), NessProblem::new(build_ising_model(&spec)).unwrap()));
    }
    for (name, p) in &problems {
        let sv = singular_values(p.liouvillian().matrix());
        let m_eigs = HermitianEigen::new(p.m().matrix()).values;
        let mut signed: Vec<f64> = sv.iter().flat_map(|&s| [s, -s]).collect();
        signed.sort_by(f64::total_cmp);
        let mut eigs = m_eigs.clone();
        eigs.sort_by(f64::total_cmp);
        let pairing = eigs.iter().zip(&signed).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        o.check(pairing < 1e-9, format!("{name}: eig(M) vs ±sv(L) mismatch {pairing:.2e}, want < 1e-9"));

        let l_eigs = qness_core::linalg::GeneralEigen::new(p.liouvillian().matrix()).unwrap().values;
        let gap = liouvillian_gap(&l_eigs);
        let top = sv.iter().cloned().fold(0.0, f64::max);
        let min_nz = sv.iter().cloned().filter(|&s| s > 1e-9 * top).fold(f64::INFINITY, f64::min);
        o.check(gap <= min_nz + 1e-9, format!("{name}: gap {gap:.6} <= min nonzero singular value {min_nz:.6}"));
    }
    for h in [0.1, 0.5, 1.0, 2.0, 5.0] {
        let p = NessProblem::new(single_spin_model(h)).unwrap();
        let eigs = qness_core::linalg::GeneralEigen::new(p.liouvillian().matrix()).unwrap().values;
        let gap = liouvillian_gap(&eigs);
        o.check((gap - 0.5).abs() < 1e-10, format!("single-spin h={h}: gap = {gap:.12}, want 1/2 within 1e-10"));
    }
    o
}

fn preparation_circuit() -> Outcome {
    let mut o = Outcome::new();
    for n in 1..=4 {
        let circ = prepare_xi_circuit(n).unwrap();
        let out = StateVector::zero(2 * n + 1).apply(&circ).unwrap();
        let diff = (out.to_cvec() - xi_vector(n)).camax();
        o.check(diff <= 1e-12, format!("N={n}: amplitude error {diff:.1e}, want <= 1e-12"));
        o.check(circ.len() == 2 * n + 2, format!("N={n}: {} gates, want {}", circ.len(), 2 * n + 2));
    }
    o
}

fn cross_validation() -> Outcome {
    let mut o = Outcome::new();
    for n in 1..=3 {
        let spec = IsingSpec::new(n, Topology::Chain, 1.0, 0.7).unwrap();
        let dense = NessProblem::new(build_ising_model(&spec)).unwrap();
        let diff = max_abs_diff(&build_m_ising_pauli(&spec).to_dense(), dense.m().matrix());
        o.check(diff <= 1e-12, format!("Ising N={n}: symbolic vs dense M differ by {diff:.1e}, want <= 1e-12"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let axes = [PauliAxis::I, PauliAxis::X, PauliAxis::Y, PauliAxis::Z];
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let width = rng.random_range(1..=5);
        let p = PauliString::new((0..width).map(|_| axes[rng.random_range(0..4)]).collect());
        let delta = rng.random_range(-PI..PI);
        let block = controlled_block(&controlled_string_rotation(&p, delta, false).unwrap()).unwrap();
        let exact = HermitianEigen::new(&p.to_dense()).map(|v| Complex64::from_polar(1.0, delta * v));
        worst = worst.max(max_abs_diff(&block, &exact));
    }
    o.check(worst <= 1e-12, format!("100 random templates: worst deviation {worst:.1e}, want <= 1e-12"));
    o
}

fn trotter_convergence() -> Outcome {
    let mut o = Outcome::new();
    let spec = IsingSpec::new(2, Topology::Chain, 1.0, 1.0).unwrap();
    let p = NessProblem::new(build_ising_model(&spec)).unwrap().with_pauli_form(build_m_ising_pauli(&spec)).unwrap();
    let exact = PowerLadder::exact(&p, 1, T0);
    let steps = [4usize, 8, 16, 32, 64];
    for (order, want) in [(TrotterOrder::First, 2.0), (TrotterOrder::Second, 4.0)] {
        let errs: Vec<f64> = steps
            .iter()
            .map(|&r| op_norm(&(trotter_power(p.m_pauli().unwrap(), T0, order, r).unwrap() - exact.power(0))))
            .collect();
        let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
        let ok = ratios.iter().all(|r| (r / want - 1.0).abs() <= 0.25);
        let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
        o.check(ok, format!("order {}: error ratios for r=4..64 [{}], want {want} ± 25%", order.as_u8(), shown.join(", ")));
    }

    for h in FIELDS {
        let p = NessProblem::new(single_spin_model(h)).unwrap();
        let spec = SweepSpec {
            oracle: OracleMode::Trotter { order: TrotterOrder::Second, steps: 256 },
            ..SweepSpec::exact(TS, T0)
        };
        let rows = sweep_t(&p, &spec).unwrap();
        let f: Vec<f64> = rows.iter().map(|r| r.one_minus_f).collect();
        let slope = log2_fit(&ts(), &f).unwrap().slope;
        o.check(
            (-2.3..=-1.7).contains(&slope),
            format!("h={h}: second-order r=256 slope log2(1-F) = {slope:.3}, want [-2.3, -1.7]"),
        );
    }

    let table = gate_count_table(Topology::Chain, 1.0, 1.0, 2..=6).unwrap();
    let ns: Vec<f64> = table.iter().map(|(n, _)| *n as f64).collect();
    let single: Vec<f64> = table.iter().map(|(_, c)| c.single_qubit as f64).collect();
    let cnot: Vec<f64> = table.iter().map(|(_, c)| c.cnot as f64).collect();
    let fs = linear_fit(&ns, &single).unwrap();
    let fc = linear_fit(&ns, &cnot).unwrap();
    o.check(fs.r_squared > 0.999, format!("single-qubit count fit R^2 = {:.6}, slope {:.2}/N", fs.r_squared, fs.slope));
    o.check(fc.r_squared > 0.999, format!("CNOT count fit R^2 = {:.6}, slope {:.2}/N", fc.r_squared, fc.slope));
    for (n, c) in &table {
        o.note(format!(
            "N={n}: single-qubit {} (40N = {}), CNOT {} (42N = {}), controlled Rz {}",
            c.single_qubit,
            40 * n,
            c.cnot,
            42 * n,
            c.controlled_rz
        ));
    }
    o
}

fn determinism() -> Outcome {
    let mut o = Outcome::new();
    let sweep_cfg = RunConfig {
        t_range: Some("3..7".into()),
        t0: Some(T0),
        postselect: Some("sampled".into()),
        shots: Some(4000),
        seed: Some(11),
        ..Default::default()
    };
    let a = cmd_sweep_t(&sweep_cfg).unwrap().body;
    let b = cmd_sweep_t(&sweep_cfg).unwrap().body;
    o.check(a == b, "sweep-t CSV byte-identical across runs");
    let expect_cfg = RunConfig { h_values: Some("0.5,2".into()), ..sweep_cfg };
    let a = cmd_expect(&expect_cfg).unwrap().body;
    let b = cmd_expect(&expect_cfg).unwrap().body;
    o.check(a == b, "expect CSV byte-identical across runs");

    let p = NessProblem::new(single_spin_model(1.0)).unwrap();
    let psi3 = run(&p, &QpeConfig::exact(8, T0)).unwrap().psi3;
    for axis in [PauliAxis::Y, PauliAxis::Z] {
        let obs = ObservableSpec::site(1, 0, axis).unwrap();
        let exact = estimate_expectation(&psi3, &obs).unwrap().value;
        let seeds: Vec<u64> = (0..10).collect();
        let shot_levels = [1_000u64, 4_000, 16_000, 64_000];
        let mut rms = Vec::new();
        for &shots in &shot_levels {
            let ests: Vec<_> = seeds.iter().map(|&s| sample_expectation(&psi3, &obs, shots, 1000 + s).unwrap()).collect();
            let mse = ests.iter().map(|e| (e.value - exact).powi(2)).sum::<f64>() / ests.len() as f64;
            rms.push(mse.sqrt());
            if shots == 16_000 {
                let mean = ests.iter().map(|e| e.value).sum::<f64>() / ests.len() as f64;
                let se = ests.iter().map(|e| e.std_error.unwrap()).sum::<f64>() / ests.len() as f64;
                let se_mean = se / (ests.len() as f64).sqrt();
                o.check(
                    (mean - exact).abs() <= 3.0 * se_mean,
                    format!("{}: 10-seed mean off by {:.2e}, 3 SE = {:.2e}", obs.label(), (mean - exact).abs(), 3.0 * se_mean),
                );
            }
        }
        let xs: Vec<f64> = shot_levels.iter().map(|&s| (s as f64).log2()).collect();
        let slope = log2_fit(&xs, &rms).unwrap().slope;
        o.check(
            (-0.689..=-0.311).contains(&slope),
            format!("{}: slope log2(rms error) vs log2(shots) = {slope:.3}, want -0.5 ± 0.189", obs.label()),
        );
    }
    o
}

fn main() {
    let start = Instant::now();
    let sweeps = single_spin_sweeps();
    let elapsed = start.elapsed().as_secs_f64();

    let criteria: Vec<(&str, Box<dyn FnOnce() -> Outcome + '_>)> = vec![
        ("1 fidelity scaling", Box::new(|| fidelity_scaling(&sweeps, elapsed))),
        ("2 estimator error scaling", Box::new(|| estimator_scaling(&sweeps))),
        ("3 success probability", Box::new(|| success_probability(&sweeps))),
        ("4 error-probability bound", Box::new(|| error_probability(&sweeps))),
        ("5 spectral identities", Box::new(spectral_identities)),
        ("6 preparation circuit", Box::new(preparation_circuit)),
        ("7 Ising cross-validation", Box::new(cross_validation)),
        ("8 Trotter convergence", Box::new(trotter_convergence)),
        ("9 determinism and sampling", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let out = f();
        println!("{} criterion {name}", if out.pass { "PASS" } else { "FAIL" });
        for l in &out.lines {
            println!("{l}");
        }
        failed += usize::from(!out.pass);
    }
    println!("{failed} of 9 criteria failed ({:.1} s)", start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
