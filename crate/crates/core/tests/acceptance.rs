//! Acceptance gate: one line per criterion, non-zero exit if any fails.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;

use qwalk_transport::classical::{
    run_fd, run_fd_truncated, run_mc, sample_flight, FdOptions, McMode, McOptions,
};
use qwalk_transport::geometry::{
    build_bypass_geometry, bypass_problem, GridGeometry, Material, SourceSpec, DetectorRegion, OBSTACLE,
};
use qwalk_transport::harness::{extract_slice, run_experiment, Axis, ExperimentConfig, Solver};
use qwalk_transport::rng::RngStream;
use qwalk_transport::statevector::StateVector;
use qwalk_transport::strategies::{
    run_amplified_walk, run_measured_walk, swap_test_pair, AbsorbMode, GroverK, MeasuredWalkOptions,
};
use qwalk_transport::walk::{
    build_boundary_conditions, build_position_coin, build_shift, build_walk_step, prepare_real_amplitudes,
    CoinMode, WalkRegisters,
};

use common::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Coin value to `(dx, dy)`, written out from the direction table.
fn coin_move(coin: usize) -> (i64, i64) {
    match coin {
        0b100 => (1, 0),
        0b110 => (0, 1),
        0b101 => (-1, 0),
        0b111 => (0, -1),
        _ => (0, 0),
    }
}

fn basis_index(regs: &WalkRegisters, x: usize, y: usize, coin: usize) -> usize {
    let mut i = 0;
    for (b, &q) in regs.x.iter().enumerate() {
        i |= ((x >> b) & 1) << q;
    }
    for (b, &q) in regs.y.iter().enumerate() {
        i |= ((y >> b) & 1) << q;
    }
    for (b, &q) in regs.coin.iter().enumerate() {
        i |= ((coin >> b) & 1) << q;
    }
    i
}

fn shift_correctness() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in [2usize, 3] {
        let (regs, nq) = WalkRegisters::contiguous(n, n);
        let shift = build_shift(&regs, nq).unwrap();
        let side = 1i64 << n;
        for y in 0..side {
            for x in 0..side {
                for coin in 0..8 {
                    let from = basis_index(&regs, x as usize, y as usize, coin);
                    let (dx, dy) = coin_move(coin);
                    let to = basis_index(
                        &regs,
                        (x + dx).rem_euclid(side) as usize,
                        (y + dy).rem_euclid(side) as usize,
                        coin,
                    );
                    let mut s = StateVector::basis(nq, from).unwrap();
                    s.apply_circuit(&shift).unwrap();
                    for (i, a) in s.amplitudes().iter().enumerate() {
                        let want = if i == to { 1.0 } else { 0.0 };
                        worst = worst.max((a - Complex64::new(want, 0.0)).norm());
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst < 1e-10 && secs < 10.0,
        format!("max deviation {worst:.2e}, {secs:.2} s"),
    )
}

fn boundary_correctness() -> Outcome {
    let (regs, nq) = WalkRegisters::contiguous(2, 2);
    let circuit = build_boundary_conditions(&regs, nq).unwrap();
    let mut failures = 0;
    let mut flips = 0;
    for y in 0..4 {
        for x in 0..4 {
            for coin in 0..8 {
                let prohibited = matches!(
                    (coin, x, y),
                    (0b100, 3, _) | (0b101, 0, _) | (0b110, _, 3) | (0b111, _, 0)
                );
                let want = if prohibited { coin ^ 1 } else { coin };
                flips += usize::from(prohibited);
                let mut s = StateVector::basis(nq, basis_index(&regs, x, y, coin)).unwrap();
                s.apply_circuit(&circuit).unwrap();
                let (idx, amp) = s
                    .amplitudes()
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                    .unwrap();
                let mut pos_coin = idx & !(1 << regs.boundary_ancilla);
                pos_coin &= !(1 << regs.coin_ancilla);
                if (amp.norm() - 1.0).abs() > 1e-12 || pos_coin != basis_index(&regs, x, y, want) {
                    failures += 1;
                }
            }
        }
    }
    outcome(
        failures == 0 && flips == 16,
        format!("{failures} failures over 128 cases ({flips} prohibited)"),
    )
}

fn coin_distribution() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in [2usize, 3] {
        let g = build_bypass_geometry(n, n).unwrap();
        let (regs, nq) = WalkRegisters::contiguous(n, n);
        let coin = build_position_coin(&g, &regs, nq, CoinMode::GateLevel).unwrap();
        for y in 0..g.height() {
            for x in 0..g.width() {
                let m = g.material_at(x, y).unwrap();
                let p_a = m.sigma_a / (m.sigma_a + m.sigma_s);
                let p_s = m.sigma_s / (m.sigma_a + m.sigma_s);
                let mut s = StateVector::basis(nq, basis_index(&regs, x, y, 0)).unwrap();
                coin.apply(&mut s, &regs).unwrap();
                let dist = s.marginal(&regs.coin).unwrap();
                for (k, p) in dist.iter().enumerate() {
                    let want = if k < 4 { p_a / 4.0 } else { p_s / 4.0 };
                    worst = worst.max((p - want).abs());
                }
            }
        }
    }

    // gate-level and fast-path backends on a random 4x4 medium
    let mut rng = RngStream::new(3);
    let materials: Vec<(String, Material)> = (0..16)
        .map(|i| {
            let s: f64 = rng.random();
            (format!("m{i}"), Material::with_scattering(1.0, s))
        })
        .collect();
    let g = GridGeometry::new(2, 2, 1.0, materials, (0..16).collect()).unwrap();
    let (regs, nq) = WalkRegisters::contiguous(2, 2);
    let amps: Vec<f64> = (0..16).map(|_| rng.random::<f64>()).collect();
    let prep = prepare_real_amplitudes(nq, &regs.position(), &amps).unwrap();
    let mut a = StateVector::zero(nq).unwrap();
    a.apply_circuit(&prep).unwrap();
    let mut b = a.clone();
    build_position_coin(&g, &regs, nq, CoinMode::GateLevel)
        .unwrap()
        .apply(&mut a, &regs)
        .unwrap();
    build_position_coin(&g, &regs, nq, CoinMode::FastPath)
        .unwrap()
        .apply(&mut b, &regs)
        .unwrap();
    let backend = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm())
        .fold((a.norm2() - b.norm2()).abs(), f64::max);
    outcome(
        worst < 1e-10 && backend < 1e-10,
        format!("max distribution error {worst:.2e}, backend difference {backend:.2e}"),
    )
}

fn unitarity() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut largest = 0;
    let cases = [
        GridGeometry::homogeneous(1, 1, 1.0, Material::with_scattering(1.0, 0.7)).unwrap(),
        GridGeometry::homogeneous(2, 1, 1.0, Material::with_scattering(1.0, 1.0)).unwrap(),
        build_bypass_geometry(2, 2).unwrap(),
    ];
    for g in &cases {
        let (regs, nq) = WalkRegisters::contiguous(g.n_x(), g.n_y());
        let step = build_walk_step(g, &regs, nq, CoinMode::GateLevel).unwrap();
        let u = step.unitary_circuit().unwrap().unwrap();
        largest = largest.max(nq);
        worst = worst.max(unitarity_error(&unitary_columns(&u)));
    }
    outcome(
        worst < 1e-10 && largest <= 10,
        format!("max |U'U - I| {worst:.2e} up to {largest} qubits"),
    )
}

fn walk_vs_kernel() -> Outcome {
    let g = GridGeometry::homogeneous(3, 3, 1.0, Material::with_scattering(1.0, 0.9)).unwrap();
    let source = SourceSpec::point(2, 5);
    let opts = MeasuredWalkOptions {
        n_steps: 10,
        n_shots: 100_000,
        absorb_mode: AbsorbMode::SelfLoop,
        gate_level_coin: false,
    };
    let report = run_measured_walk(&g, &source, &opts, &mut RngStream::new(5)).unwrap();
    let k = dense_kernel(&g, true);
    let mut p = point_distribution(&g, 2, 5);
    let mut worst: f64 = 0.0;
    for rec in &report.steps {
        p = push(&p, &k);
        let h: Vec<f64> = rec.histogram.iter().map(|&c| c as f64).collect();
        worst = worst.max(tv(&h, &p));
    }
    let last = report.steps.last().map(|r| r.step).unwrap_or(0);
    outcome(
        worst < 0.02 && last == 10,
        format!("max TV over steps 1..={last}: {worst:.4}"),
    )
}

fn classical_cross_check() -> Outcome {
    let start = Instant::now();
    let problem = bypass_problem(3, 3).unwrap();
    let g = &problem.geometry;
    let opts = McOptions {
        n_particles: 500_000,
        ..Default::default()
    };
    let mc = run_mc(g, &problem.source, &opts, &RngStream::new(6)).unwrap();
    let fd = run_fd(g, &problem.source, &FdOptions::default()).unwrap();
    let cos = cosine(&unit(mc.flux.tallies()), &unit(fd.tallies()));
    let slice_mc = extract_slice(&mc.flux, g.cell_size(), Axis::X, 5.0).unwrap();
    let slice_fd = extract_slice(&fd, g.cell_size(), Axis::X, 5.0).unwrap();
    let slice_tv = tv(&slice_mc.values, &slice_fd.values);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        cos > 0.95 && slice_tv < 0.05 && secs < 120.0,
        format!(
            "MC vs FD: cosine {cos:.4}, midline slice TV {slice_tv:.4}, {} capped, {secs:.1} s",
            mc.capped
        ),
    )
}

/// The same comparison with flights quantised to one cell, for information.
fn lattice_mc_note() -> String {
    let problem = bypass_problem(3, 3).unwrap();
    let g = &problem.geometry;
    let opts = McOptions {
        n_particles: 500_000,
        mode: McMode::Lattice,
        ..Default::default()
    };
    let mc = run_mc(g, &problem.source, &opts, &RngStream::new(6)).unwrap();
    let fd = run_fd(g, &problem.source, &FdOptions::default()).unwrap();
    let cos = cosine(&unit(mc.flux.tallies()), &unit(fd.tallies()));
    let col = |m: &[f64]| column(m, g.width(), 4);
    let slice_tv = tv(&col(mc.flux.tallies()), &col(fd.tallies()));
    let (obs, arm) = region_means(g, mc.flux.tallies());
    format!(
        "lattice-limit MC vs FD: cosine {cos:.4}, midline slice TV {slice_tv:.4}, obstacle/arm mean {:.3}",
        obs / arm
    )
}

fn region_means(g: &GridGeometry, map: &[f64]) -> (f64, f64) {
    let obstacle = g.material_id(OBSTACLE).unwrap();
    let (mut so, mut no, mut sa, mut na) = (0.0, 0, 0.0, 0);
    for (i, v) in map.iter().enumerate() {
        if g.cell_material_ids()[i] == obstacle {
            so += v;
            no += 1;
        } else {
            sa += v;
            na += 1;
        }
    }
    (so / no as f64, sa / na as f64)
}

fn measured_walk_agreement() -> Outcome {
    let problem = bypass_problem(3, 3).unwrap();
    let g = &problem.geometry;
    let run = |steps: usize| {
        let opts = MeasuredWalkOptions {
            n_steps: steps,
            n_shots: 100_000,
            ..Default::default()
        };
        let walk = run_measured_walk(g, &problem.source, &opts, &mut RngStream::new(7)).unwrap();
        let fd = run_fd_truncated(g, &problem.source, steps).unwrap();
        let s_walk = extract_slice(&walk.flux, g.cell_size(), Axis::X, 5.0).unwrap();
        let s_fd = extract_slice(&fd, g.cell_size(), Axis::X, 5.0).unwrap();
        (walk, cosine(&s_walk.values, &s_fd.values))
    };
    let (walk10, cos10) = run(10);
    let (_, cos40) = run(40);
    let (obs, arm) = region_means(g, walk10.flux.tallies());
    outcome(
        obs < arm && cos10 > 0.9 && cos40 < cos10,
        format!(
            "obstacle mean {obs:.1} < arm mean {arm:.1}; slice cosine {cos10:.4} at 10 steps, {cos40:.4} at 40"
        ),
    )
}

fn amplitude_amplification() -> Outcome {
    let g = GridGeometry::homogeneous(2, 2, 1.0, Material::with_scattering(1.0, 0.9)).unwrap();
    let source = SourceSpec::point(1, 1);
    let detector = DetectorRegion::new([(2, 2)]).unwrap();
    // oracle: every coin succeeds with the same probability, so the good
    // mass is that probability per step times the kernel's detector mass
    let per_step: f64 = 1.0 / (8.0 * 0.9 / 4.0);
    let k2 = dense_kernel(&g, true);
    let p2 = push(&push(&point_distribution(&g, 1, 1), &k2), &k2)[2 * 4 + 2];
    let a_oracle = per_step.powi(2) * p2;
    let mut worst: f64 = 0.0;
    let mut a_sim = 0.0;
    for k in 0..4 {
        let r = run_amplified_walk(&g, &source, 2, &detector, GroverK::Fixed(k)).unwrap();
        a_sim = r.baseline;
        let theta = r.baseline.sqrt().asin();
        let want = ((2 * k + 1) as f64 * theta).sin().powi(2);
        worst = worst.max((r.amplified - want).abs());
    }
    let auto = run_amplified_walk(&g, &source, 2, &detector, GroverK::Auto).unwrap();
    let optimum = PI / (4.0 * a_sim.sqrt().asin()) - 0.5;
    let auto_ok = (auto.k as f64 - optimum).abs() <= 1.0;
    outcome(
        worst < 1e-8 && auto_ok && (a_sim - a_oracle).abs() < 1e-12,
        format!(
            "a = {a_sim:.6} (oracle {a_oracle:.6}), max formula error {worst:.2e}, auto k = {} vs optimum {optimum:.2}",
            auto.k
        ),
    )
}

fn random_state(n: usize, rng: &mut RngStream) -> StateVector {
    let v: Vec<Complex64> = (0..1 << n)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(v.into_iter().map(|a| a / norm).collect()).unwrap()
}

fn swap_test() -> Outcome {
    let n_shots = 100_000;
    let mut rng = RngStream::new(9);
    let mut misses = 0;
    let mut worst_z: f64 = 0.0;
    let mut check = |psi: &StateVector, phi: &StateVector, rng: &mut RngStream| {
        let exact = psi.inner(phi).unwrap().norm_sqr();
        let r = swap_test_pair(psi, phi, n_shots, rng).unwrap();
        let p0 = (1.0 + exact) / 2.0;
        let sigma = 2.0 * (p0 * (1.0 - p0) / n_shots as f64).sqrt();
        let err = (r.estimate - exact).abs();
        let z = if sigma > 0.0 { err / sigma } else if err == 0.0 { 0.0 } else { f64::INFINITY };
        worst_z = worst_z.max(z);
        if z > 3.0 {
            misses += 1;
        }
        r.estimate
    };
    for _ in 0..20 {
        let psi = random_state(3, &mut rng);
        let phi = random_state(3, &mut rng);
        check(&psi, &phi, &mut rng);
    }
    let psi = random_state(3, &mut rng);
    let same = check(&psi, &psi, &mut rng);
    let orth = check(
        &StateVector::basis(3, 2).unwrap(),
        &StateVector::basis(3, 5).unwrap(),
        &mut rng,
    );
    outcome(
        misses == 0,
        format!("{misses} of 22 outside 3 sigma (worst {worst_z:.2} sigma); identical {same:.4}, orthogonal {orth:.4}"),
    )
}

fn flight_sampling() -> Outcome {
    let n = 100_000;
    let mut rng = RngStream::new(10);
    let mut xs: Vec<f64> = (0..n).map(|_| sample_flight(1.0, &mut rng)).collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    xs.sort_by(f64::total_cmp);
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let cdf = 1.0 - (-x).exp();
            (cdf - i as f64 / n as f64).max((i + 1) as f64 / n as f64 - cdf)
        })
        .fold(0.0, f64::max);
    // asymptotic Kolmogorov critical value at alpha = 0.001
    let critical = (-(0.001f64 / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt();
    outcome(
        d < critical && (mean - 1.0).abs() < 0.005,
        format!("KS D = {d:.5} (critical {critical:.5}), mean {mean:.5}"),
    )
}

fn determinism() -> Outcome {
    let config = ExperimentConfig {
        solvers: vec![
            Solver::Fd,
            Solver::Mc,
            Solver::WalkMeasured,
            Solver::WalkAmplified,
            Solver::SwapScore,
        ],
        seed: Some(11),
        mc: qwalk_transport::harness::McConfig {
            particles: 50_000,
            ..Default::default()
        },
        walk_amplified: qwalk_transport::harness::AmplifiedConfig {
            detector: Some(vec![[1, 1]]),
            ..Default::default()
        },
        ..Default::default()
    };
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        run_experiment(&config, d.path()).unwrap();
    }
    let mut compared = 0;
    let mut differ = Vec::new();
    let out = |d: &tempfile::TempDir| d.path().join("out");
    let mut names: Vec<_> = std::fs::read_dir(out(&dirs[0]))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .filter(|n| n.to_string_lossy().ends_with(".csv"))
        .collect();
    names.sort();
    for name in &names {
        let a = std::fs::read(out(&dirs[0]).join(name)).unwrap();
        let b = std::fs::read(out(&dirs[1]).join(name)).unwrap();
        compared += 1;
        if a != b {
            differ.push(name.to_string_lossy().into_owned());
        }
    }
    outcome(
        differ.is_empty() && compared == 4,
        format!("{compared} CSVs compared, differing: {differ:?}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("shift correctness", shift_correctness),
        ("boundary correctness", boundary_correctness),
        ("coin distribution", coin_distribution),
        ("unitarity", unitarity),
        ("walk vs kernel", walk_vs_kernel),
        ("classical cross-check", classical_cross_check),
        ("measured-walk agreement", measured_walk_agreement),
        ("amplitude amplification", amplitude_amplification),
        ("swap test", swap_test),
        ("flight sampling", flight_sampling),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<26} {}  {} [{:.1} s]",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
        if i == 5 {
            println!("    info: {}", lattice_mc_note());
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
