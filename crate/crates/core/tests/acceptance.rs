//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use willmore_core::diagnostics::{fit_sphere, torus_radii_ratio};
use willmore_core::energy::{
    self, angle_vector, energy_w2w_with_form, finite_difference_gradient, gradient,
    normalization_c, normalization_cw, quadratic_edge_form, quadratic_vertex_form,
    sphere_inversion, W2wForm,
};
use willmore_core::mesh::{
    build_topology, icosahedron, incidence_and_weights, octahedron, random_flipped_triangulation,
    random_inscribed, tetrahedron, torus, TorusGrid,
};
use willmore_core::optimize::minimize;
use willmore_core::qp::{
    abstract_angles, check_realizability, solve_inequality_qp, solve_lambda, PredictedType,
};
use willmore_core::{
    EnergyKind, GraphData, MeshTopology, OptimizationConfig, Status, TriangleMesh, Vec3,
};

type Criterion = (&'static str, fn() -> Outcome, Duration);

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn topo(mesh: &TriangleMesh) -> MeshTopology {
    build_topology(mesh).unwrap()
}

fn graph(mesh: &TriangleMesh) -> GraphData {
    incidence_and_weights(&topo(mesh)).unwrap()
}

fn regular_solids() -> [(&'static str, TriangleMesh, f64, f64, f64); 3] {
    [
        (
            "tetrahedron",
            tetrahedron(),
            2.0 * PI / 3.0,
            8.0 * PI * PI / 3.0,
            16.0 * PI * PI,
        ),
        (
            "octahedron",
            octahedron(),
            PI / 2.0,
            3.0 * PI * PI,
            24.0 * PI * PI,
        ),
        (
            "icosahedron",
            icosahedron(),
            2.0 * PI / 5.0,
            24.0 * PI * PI / 5.0,
            48.0 * PI * PI,
        ),
    ]
}

fn criterion_1() -> Outcome {
    let mut worst_beta = 0.0f64;
    let mut worst_energy = 0.0f64;
    let mut worst_constant = 0.0f64;
    for (_, mesh, beta, c, cw) in regular_solids() {
        let t = topo(&mesh);
        let g = incidence_and_weights(&t).unwrap();
        for b in angle_vector(&mesh, &t).unwrap().values {
            worst_beta = worst_beta.max((b - beta).abs());
        }
        for kind in EnergyKind::ALL {
            worst_energy = worst_energy.max(energy::energy(&mesh, &t, kind).unwrap().value.abs());
        }
        worst_constant = worst_constant
            .max(rel(normalization_c(&g).unwrap(), c))
            .max(rel(normalization_cw(&g).unwrap(), cw));
    }
    Outcome::new(
        worst_beta <= 1e-9 && worst_energy <= 1e-9 && worst_constant <= 1e-10,
        format!("max |beta err| {worst_beta:.1e}, max |energy| {worst_energy:.1e}, max constant err {worst_constant:.1e}"),
    )
}

/// Best KKT point over every subset of vertex constraints taken as the
/// active set, for `min x^t W x` s.t. `M x >= 2 pi 1`.
fn brute_force_qp(g: &GraphData, weighted: bool) -> Vec<f64> {
    let m = g.incidence_matrix();
    let e = g.edge_count();
    let w = if weighted {
        g.weight_matrix()
    } else {
        DMatrix::identity(e, e)
    };
    let winv = w.clone().try_inverse().unwrap();
    let n = g.vertex_count;
    let mut best: Option<(f64, DVector<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let set: Vec<usize> = (0..n).filter(|v| mask >> v & 1 == 1).collect();
        let ms = DMatrix::from_fn(set.len(), e, |r, c| m[(set[r], c)]);
        let k = &ms * &winv * ms.transpose();
        let Some(mu) = k.lu().solve(&DVector::from_element(set.len(), TAU)) else {
            continue;
        };
        if mu.iter().any(|&v| v < -1e-12) {
            continue;
        }
        let x = &winv * ms.transpose() * mu;
        if (&m * &x).iter().any(|&s| s < TAU - 1e-9) {
            continue;
        }
        let obj = (x.transpose() * &w * &x)[(0, 0)];
        if best.as_ref().is_none_or(|(b, _)| obj < *b) {
            best = Some((obj, x));
        }
    }
    best.unwrap().1.iter().copied().collect()
}

fn criterion_2() -> Outcome {
    let mut lambda_err = 0.0f64;
    for ((_, mesh, ..), want) in regular_solids()
        .into_iter()
        .zip([PI / 3.0, PI / 4.0, PI / 5.0])
    {
        for l in solve_lambda(&graph(&mesh), false).unwrap() {
            lambda_err = lambda_err.max((l - want).abs());
        }
    }

    let mut graphs: Vec<GraphData> = regular_solids().iter().map(|(_, m, ..)| graph(m)).collect();
    for v in [6, 7, 8, 9, 10] {
        for seed in 0..12 {
            graphs.push(graph(
                &random_flipped_triangulation(v, 4 * v, seed).unwrap(),
            ));
        }
    }

    let mut feas_err = 0.0f64;
    let mut identity_err = 0.0f64;
    let mut agree = 0;
    let mut disagree = Vec::new();
    let mut with_negative = 0;
    for (idx, g) in graphs.iter().enumerate() {
        let x = abstract_angles(g, false).unwrap();
        for s in g.vertex_sums(&x) {
            feas_err = feas_err.max((s - TAU).abs());
        }
        let xw = abstract_angles(g, true).unwrap();
        for s in g.vertex_sums(&xw) {
            feas_err = feas_err.max((s - TAU).abs());
        }
        let norm: f64 = x.iter().map(|v| v * v).sum();
        identity_err = identity_err.max(rel(norm, normalization_c(g).unwrap()));
        identity_err = identity_err.max(rel(
            quadratic_edge_form(g, &xw),
            normalization_cw(g).unwrap(),
        ));

        for weighted in [false, true] {
            let eq = if weighted { &xw } else { &x };
            let lambda_nonneg = solve_lambda(g, weighted)
                .unwrap()
                .iter()
                .all(|&l| l > -1e-10);
            if !lambda_nonneg {
                with_negative += 1;
            }
            let oracle = brute_force_qp(g, weighted);
            let scale = eq.iter().fold(1.0f64, |a, v| a.max(v.abs()));
            let same = oracle
                .iter()
                .zip(eq)
                .all(|(a, b)| (a - b).abs() <= 1e-8 * scale);
            let solver = solve_inequality_qp(g, weighted).unwrap().x;
            let solver_ok = solver
                .iter()
                .zip(&oracle)
                .all(|(a, b)| (a - b).abs() <= 1e-8 * scale);
            if same == lambda_nonneg && solver_ok {
                agree += 1;
            } else {
                disagree.push((idx, weighted));
            }
        }
    }
    let random = graphs.len() - 3;
    Outcome::new(
        lambda_err <= 1e-10 && feas_err <= 1e-9 && identity_err <= 1e-10 && disagree.is_empty() && random >= 50,
        format!(
            "lambda err {lambda_err:.1e}, feasibility err {feas_err:.1e}, identity err {identity_err:.1e}, \
             equivalence {agree}/{} over {random} random graphs ({with_negative} programs with negative lambda){}",
            2 * graphs.len(),
            if disagree.is_empty() { String::new() } else { format!(", disagreements {disagree:?}") }
        ),
    )
}

fn perturbed_hull(count: usize, seed: u64) -> TriangleMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let axes = Vec3::new(
        rng.random_range(0.5..2.0),
        rng.random_range(0.5..2.0),
        rng.random_range(0.5..2.0),
    );
    let hull = random_inscribed(count, axes, seed).unwrap();
    let positions = hull
        .positions
        .iter()
        .map(|p| p * rng.random_range(0.8..1.2))
        .collect();
    hull.with_positions(positions)
}

fn gradient_meshes() -> Vec<TriangleMesh> {
    let mut meshes = Vec::new();
    for seed in 0..12 {
        meshes.push(perturbed_hull(12 + seed as usize, seed));
        meshes.push(random_flipped_triangulation(10 + seed as usize % 4, 40, 100 + seed).unwrap());
    }
    meshes
}

fn criterion_3() -> Outcome {
    let meshes = gradient_meshes();
    let mut parts = Vec::new();
    let mut pass = true;
    for kind in EnergyKind::ALL {
        let mut worst = 0.0f64;
        let mut checked = 0;
        for mesh in &meshes {
            let t = topo(mesh);
            let angles = angle_vector(mesh, &t).unwrap();
            // W is not differentiable where an angle vanishes
            if kind == EnergyKind::W && angles.min().unwrap() < 1e-3 {
                continue;
            }
            let analytic = gradient(mesh, &t, kind, 0.0).unwrap();
            let fd = finite_difference_gradient(mesh, &t, kind, 1e-6).unwrap();
            let diff: f64 = analytic
                .0
                .iter()
                .zip(&fd.0)
                .map(|(a, b)| (a - b).norm_squared())
                .sum::<f64>()
                .sqrt();
            worst = worst.max(diff / analytic.norm().max(1e-12));
            checked += 1;
        }
        pass &= worst < 1e-5 && checked >= 20;
        parts.push(format!("{kind}: {checked} meshes, max rel err {worst:.1e}"));
    }
    Outcome::new(pass, parts.join("; "))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    let mut count = 0;
    let quantities = |mesh: &TriangleMesh, t: &MeshTopology| {
        let beta = angle_vector(mesh, t).unwrap();
        let sum: f64 = beta.values.iter().sum();
        let sq: f64 = beta.values.iter().map(|b| b * b).sum();
        let weighted: f64 = t
            .edges
            .iter()
            .zip(&beta.values)
            .map(|(e, b)| (t.valence[e.i] + t.valence[e.j]) as f64 * b * b)
            .sum();
        [energy::energy_w(mesh, t).unwrap().value, sum, sq, weighted]
    };
    for seed in 0..10 {
        let mesh = if seed % 2 == 0 {
            perturbed_hull(16, 200 + seed)
        } else {
            random_flipped_triangulation(12, 48, 200 + seed).unwrap()
        };
        let t = topo(&mesh);
        let before = quantities(&mesh, &t);
        for _ in 0..10 {
            let center = Vec3::new(
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
            );
            let radius = rng.random_range(0.5..3.0);
            let image =
                mesh.with_positions(sphere_inversion(&mesh.positions, &center, radius).unwrap());
            let after = quantities(&image, &t);
            for (a, b) in before.iter().zip(&after) {
                worst = worst.max((a - b).abs() / a.abs().max(1.0));
            }
            count += 1;
        }
    }
    Outcome::new(
        worst <= 1e-8,
        format!("{count} inversions, max rel change {worst:.1e}"),
    )
}

fn criterion_5() -> Outcome {
    let mesh = random_inscribed(50, Vec3::new(1.0, 1.0, 2.0), 0).unwrap();
    let t = topo(&mesh);
    let g = incidence_and_weights(&t).unwrap();
    let run = |kind| {
        let config = OptimizationConfig {
            max_steps: 100,
            w_threshold: 1e-3,
            ..OptimizationConfig::new(kind)
        };
        minimize(&mesh, &t, Some(&g), &config).unwrap()
    };
    let w2 = run(EnergyKind::W2);
    let w_after_w2 = energy::energy_w(&w2.mesh, &t).unwrap().value;
    let dev = fit_sphere(&w2.mesh.positions).unwrap().max_deviation;
    let w = run(EnergyKind::W);
    let w_after_w = energy::energy_w(&w.mesh, &t).unwrap().value;
    Outcome::new(
        w_after_w2 <= 1e-6 && dev <= 1e-3 && w_after_w >= 10.0 * w_after_w2,
        format!(
            "W2 run ({}): W {w_after_w2:.2e}, sphere deviation {dev:.1e}; W run ({}): W {w_after_w:.2e}",
            w2.status, w.status
        ),
    )
}

fn minimize_torus(
    m: usize,
    n: usize,
) -> (
    TriangleMesh,
    MeshTopology,
    willmore_core::OptimizationResult,
) {
    let mesh = torus(2.0, 1.0, m, n).unwrap();
    let t = topo(&mesh);
    let g = incidence_and_weights(&t).unwrap();
    let config = OptimizationConfig {
        max_steps: 20000,
        gradient_tolerance: 1e-8,
        ..OptimizationConfig::new(EnergyKind::W2)
    };
    let result = minimize(&mesh, &t, Some(&g), &config).unwrap();
    (mesh, t, result)
}

fn criterion_6() -> Outcome {
    let (_, t, coarse) = minimize_torus(16, 16);
    let ratio = torus_radii_ratio(
        &coarse.mesh,
        &t,
        TorusGrid {
            major: 16,
            minor: 16,
        },
    )
    .unwrap();
    let ratio_ok = coarse.grad_norm <= 1e-8 && rel(ratio, 2f64.sqrt()) <= 0.02;

    let (_, _, fine) = minimize_torus(24, 24);
    let target = 4.0 * PI * PI;
    let w2_ok = fine.grad_norm <= 1e-8 && ((fine.energy - target) / target).abs() <= 0.05;
    Outcome::new(
        ratio_ok && w2_ok,
        format!(
            "16x16: {} after {} steps, |grad| {:.1e}, ratio {ratio:.4} (target {:.4}); \
             24x24: {} after {} steps, |grad| {:.1e}, W2 = {:.4} pi^2 (target 4 pi^2)",
            coarse.status,
            coarse.steps,
            coarse.grad_norm,
            2f64.sqrt(),
            fine.status,
            fine.steps,
            fine.grad_norm,
            fine.energy / (PI * PI)
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut meshes = 0;
    for seed in 0..10 {
        let mesh = if seed % 2 == 0 {
            perturbed_hull(10 + seed as usize, 300 + seed)
        } else {
            random_flipped_triangulation(12, 48, 300 + seed).unwrap()
        };
        let t = topo(&mesh);
        let g = incidence_and_weights(&t).unwrap();
        for _ in 0..100 {
            let x: Vec<f64> = (0..g.edge_count())
                .map(|_| rng.random_range(-PI..PI))
                .collect();
            let e = quadratic_edge_form(&g, &x);
            worst = worst.max((e - quadratic_vertex_form(&g, &x)).abs() / e.abs());
        }
        let edge = energy_w2w_with_form(&mesh, &t, &g, W2wForm::Edge).unwrap();
        let vertex = energy_w2w_with_form(&mesh, &t, &g, W2wForm::Vertex).unwrap();
        let raw = edge.value + edge.constant.unwrap();
        worst = worst.max((edge.value - vertex.value).abs() / raw);
        meshes += 1;
    }
    Outcome::new(
        worst <= 1e-12,
        format!("{meshes} meshes x 100 vectors, max rel diff {worst:.1e}"),
    )
}

fn sorted_over_pi(values: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = values.iter().map(|b| b / PI).collect();
    v.sort_by(f64::total_cmp);
    v
}

fn criterion_8() -> Outcome {
    let mut matched = 0;
    let mut examined = 0;
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    'search: for v in [10, 12] {
        for seed in 0..200 {
            let mesh = random_flipped_triangulation(v, 4 * v, seed).unwrap();
            let t = topo(&mesh);
            let report = check_realizability(&t, false).unwrap();
            if report.predicted != PredictedType::ConvexInscribedUnique {
                continue;
            }
            examined += 1;
            let g = incidence_and_weights(&t).unwrap();
            let result = minimize(
                &mesh,
                &t,
                Some(&g),
                &OptimizationConfig::new(EnergyKind::W2),
            )
            .unwrap();
            let geometric = sorted_over_pi(&angle_vector(&result.mesh, &t).unwrap().values);
            let predicted = sorted_over_pi(&report.angles);
            let err = geometric
                .iter()
                .zip(&predicted)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if err <= 1e-3 {
                matched += 1;
                worst = worst.max(err);
            } else {
                failures.push(format!(
                    "V={v} seed {seed}: {} err {err:.1e}",
                    result.status
                ));
            }
            if matched >= 6 {
                break 'search;
            }
        }
    }
    Outcome::new(
        matched >= 5 && failures.is_empty(),
        format!(
            "{matched}/{examined} convex-inscribed-unique graphs match, max entry err {worst:.1e}{}",
            if failures.is_empty() { String::new() } else { format!("; mismatches: {}", failures.join(", ")) }
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut tried = Vec::new();
    for seed in 0..100 {
        let mesh = random_flipped_triangulation(10, 40, seed).unwrap();
        let t = topo(&mesh);
        let report = check_realizability(&t, false).unwrap();
        if report.rivin_cycle_ok || !report.angles.iter().all(|&b| b > 0.0) {
            continue;
        }
        let g = incidence_and_weights(&t).unwrap();
        let result = minimize(
            &mesh,
            &t,
            Some(&g),
            &OptimizationConfig::new(EnergyKind::W2),
        )
        .unwrap();
        tried.push(format!("seed {seed}: {}", result.status));
        if result.status == Status::Degenerated {
            return Outcome::new(
                true,
                format!(
                    "V=10 seed {seed}: lightest non-facial dual cycle {:.4} pi, degenerated after {} steps, {} collapsing edges",
                    report.min_nonfacial_cycle_sum.unwrap() / PI,
                    result.steps,
                    result.collapsed_edges.len()
                ),
            );
        }
    }
    Outcome::new(
        false,
        format!(
            "no degenerated run among Rivin failures: {}",
            tried.join(", ")
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("regular solids", criterion_1, Duration::from_secs(1)),
        ("quadratic programs", criterion_2, Duration::from_secs(10)),
        ("gradients", criterion_3, Duration::from_secs(60)),
        ("Mobius invariance", criterion_4, Duration::MAX),
        ("ellipsoid", criterion_5, Duration::from_secs(120)),
        ("torus", criterion_6, Duration::from_secs(300)),
        ("W2w vertex and edge forms", criterion_7, Duration::MAX),
        ("abstract angles of minimizers", criterion_8, Duration::MAX),
        ("collapse", criterion_9, Duration::MAX),
    ];
    let mut failed = 0;
    for (k, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let pass = outcome.pass && elapsed <= *budget;
        if !pass {
            failed += 1;
        }
        let over = if elapsed > *budget {
            " (over time budget)"
        } else {
            ""
        };
        println!(
            "criterion {} {} [{name}] {:.2}s{over}: {}",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            outcome.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
