//! Acceptance suite: every criterion runs at its stated tolerance and prints
//! one pass/fail line (visible with `cargo test --test acceptance -- --nocapture`).

use fracctrl::control_operators::{
    grammian, linear_controllability_indicator, operator_norm_b, resolvent_apply, BOperator,
    ControlVector,
};
use fracctrl::experiment::{run_beta_sweep, sweep_to_csv, ExperimentConfig};
use fracctrl::mild_solver::{solve_fixed_point, SolverConfig, Trajectory};
use fracctrl::mittag_leffler::{gamma, MlEvaluator, MlParams};
use fracctrl::nonlocal_problem::{
    check_contraction, estimate_lipschitz, example_f, example_g, DeclaredConstants, FSlot, GSlot,
    NonlocalWeights, ProblemSpec,
};
use fracctrl::solution_families::{Families, FamilyConfig};
use fracctrl::spectral_basis::{BasisConfig, SpectralVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{E, PI, SQRT_2};

struct Criterion {
    name: &'static str,
    failures: Vec<String>,
}

impl Criterion {
    fn new(name: &'static str) -> Self {
        Criterion { name, failures: Vec::new() }
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(msg());
        }
    }

    fn finish(self) {
        if self.failures.is_empty() {
            println!("[{}] PASS", self.name);
        } else {
            println!("[{}] FAIL", self.name);
            for f in &self.failures {
                println!("    {f}");
            }
            panic!("{} failed:\n{}", self.name, self.failures.join("\n"));
        }
    }
}

fn random_vec(rng: &mut impl Rng, n: usize) -> SpectralVector {
    SpectralVector::from_coeffs((0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
}

#[test]
fn criterion_1_mittag_leffler_classical_limits() {
    let mut c = Criterion::new("criterion 1: Mittag-Leffler classical limits");

    let exp_ev = MlEvaluator::new(MlParams::new(1.0, 1.0)).unwrap();
    let mut worst = 0.0f64;
    for i in 0..=1000 {
        let x = -10.0 * i as f64 / 1000.0;
        worst = worst.max((exp_ev.eval(x).unwrap() - x.exp()).abs());
    }
    c.check(worst <= 1e-8, || format!("exp identity error {worst:e} > 1e-8"));

    let cos_ev = MlEvaluator::new(MlParams::new(2.0, 1.0)).unwrap();
    let sin_ev = MlEvaluator::new(MlParams::new(2.0, 2.0)).unwrap();
    let mut worst = 0.0f64;
    for i in 0..=2000 {
        let t = 20.0 * i as f64 / 2000.0;
        let x = -t * t;
        worst = worst.max((cos_ev.eval(x).unwrap() - t.cos()).abs());
        worst = worst.max((t * sin_ev.eval(x).unwrap() - t.sin()).abs());
    }
    c.check(worst <= 1e-8, || format!("cos/sinc identity error {worst:e} > 1e-8"));

    // recurrence E_{α,β}(x) = 1/Γ(β) + x·E_{α,α+β}(x)
    let mut worst = 0.0f64;
    for &alpha in &[1.2, 1.5, 1.9] {
        for &beta in &[1.0, 2.0, alpha] {
            let lhs = MlEvaluator::new(MlParams::new(alpha, beta)).unwrap();
            let rhs = MlEvaluator::new(MlParams::new(alpha, alpha + beta)).unwrap();
            for i in 0..=60 {
                let x = -30.0 * i as f64 / 60.0;
                let r = (lhs.eval(x).unwrap() - (1.0 / gamma(beta) + x * rhs.eval(x).unwrap())).abs();
                worst = worst.max(r);
            }
        }
    }
    c.check(worst <= 1e-8, || format!("recurrence residual {worst:e} > 1e-8"));

    c.finish();
}

#[test]
fn criterion_2_solution_family_consistency() {
    let mut c = Criterion::new("criterion 2: solution-family consistency");
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let a = 1.0;

    for &q in &[1.3f64, 1.5, 1.8] {
        let fam = Families::new(FamilyConfig::new(q, BasisConfig::new(PI, 8))).unwrap();

        // S_q equals the Simpson integral of C_q to 1e-6
        let v = random_vec(&mut rng, 8);
        for &theta in &[0.3, 0.7, 1.0] {
            let s = fam.sq_apply(theta, &v).unwrap();
            let mut quad = SpectralVector::zeros(8);
            for n in 1..=8 {
                let h = theta / 400.0;
                let mut acc = fam.cq_factor(n, 0.0).unwrap() + fam.cq_factor(n, theta).unwrap();
                for i in 1..400 {
                    let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                    acc += w * fam.cq_factor(n, i as f64 * h).unwrap();
                }
                quad.coeffs[n - 1] = v.coeffs[n - 1] * acc * h / 3.0;
            }
            let err = s.sub(&quad).norm();
            c.check(err <= 1e-6, || format!("q={q} θ={theta}: ‖S−∫C‖ = {err:e} > 1e-6"));
        }

        // P_q equals the fractional integral of C_q to 1e-4 (graded mesh)
        let gam_exp = 3.0 / (q - 1.0);
        let v = random_vec(&mut rng, 8);
        for &theta in &[0.5f64, 1.0] {
            let p = fam.pq_apply(theta, &v).unwrap();
            let t_end = theta.powf(1.0 / gam_exp);
            let m = 2000usize;
            let h = t_end / m as f64;
            let mut quad = SpectralVector::zeros(8);
            for n in 1..=8 {
                let integrand = |t: f64| {
                    let sigma = t.powf(gam_exp);
                    gam_exp * t * t * fam.cq_factor(n, (theta - sigma).max(0.0)).unwrap()
                };
                let mut acc = 0.5 * (integrand(0.0) + integrand(t_end));
                for i in 1..m {
                    acc += integrand(i as f64 * h);
                }
                quad.coeffs[n - 1] = v.coeffs[n - 1] * acc * h / gamma(q - 1.0);
            }
            let err = p.sub(&quad).norm();
            c.check(err <= 1e-4, || {
                format!("q={q} θ={theta}: ‖P − I^(q−1)C‖ = {err:e} > 1e-4")
            });
        }

        // Lemma bound with measured M over 1000 random (θ, v)
        let m_meas = fam.measure_cosine_bound(a).unwrap();
        let cap = m_meas * a.powf(q - 1.0) / gamma(q);
        let mut worst_excess = 0.0f64;
        for _ in 0..1000 {
            let v = random_vec(&mut rng, 8);
            let theta = rng.random_range(0.0..=a);
            let p = fam.pq_apply(theta, &v).unwrap();
            worst_excess = worst_excess.max(p.norm() - cap * v.norm());
        }
        c.check(worst_excess <= 1e-12, || {
            format!("q={q}: Riemann-Liouville bound exceeded by {worst_excess:e}")
        });
    }
    c.finish();
}

#[test]
fn criterion_3_control_operators() {
    let mut c = Criterion::new("criterion 3: control operators");
    let mut rng = ChaCha8Rng::seed_from_u64(3033);

    // adjoint identity to 1e-13 on 100 random pairs
    let b = BOperator::Example;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let u = ControlVector {
            coeffs: (0..7).map(|_| rng.random_range(-1.0..1.0)).collect(),
        };
        let v = random_vec(&mut rng, 8);
        let lhs = b.apply(&u, 8).dot(&v);
        let rhs: f64 = u
            .coeffs
            .iter()
            .zip(&b.apply_star(&v).coeffs)
            .map(|(a, b)| a * b)
            .sum();
        worst = worst.max((lhs - rhs).abs());
    }
    c.check(worst <= 1e-13, || format!("adjoint identity defect {worst:e} > 1e-13"));

    // ‖B‖ = √5 ± 1e-9
    for &n in &[2usize, 4, 8, 16] {
        let norm = operator_norm_b(n).unwrap();
        c.check((norm - 5.0f64.sqrt()).abs() <= 1e-9, || {
            format!("‖B‖ at N={n} is {norm}, want √5")
        });
    }

    // Grammian symmetric with positive minimum eigenvalue
    for &q in &[1.3f64, 1.5, 1.8] {
        let fam = Families::new(FamilyConfig::new(q, BasisConfig::new(PI, 8))).unwrap();
        let k = grammian(&fam, &b, 1.0, 400).unwrap();
        let defect = k.symmetry_defect();
        let min_eig = k.min_eigenvalue();
        c.check(defect <= 1e-14, || format!("q={q}: symmetry defect {defect:e}"));
        c.check(min_eig > 0.0, || format!("q={q}: min eigenvalue {min_eig:e} ≤ 0"));
    }

    // resolvent bound ‖R(β,K)v‖ ≤ ‖v‖/β on 100 random (β, v)
    let fam = Families::new(FamilyConfig::new(1.5, BasisConfig::new(PI, 8))).unwrap();
    let k = grammian(&fam, &b, 1.0, 400).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let v = random_vec(&mut rng, 8);
        let beta = 10f64.powf(rng.random_range(-6.0..0.0));
        let x = resolvent_apply(beta, &k, &v).unwrap();
        worst = worst.max(x.norm() - v.norm() / beta);
    }
    c.check(worst <= 1e-12, || format!("resolvent bound exceeded by {worst:e}"));

    c.finish();
}

#[test]
fn criterion_4_linear_controllability_indicator() {
    let mut c = Criterion::new("criterion 4: linear controllability (strong-topology decay)");
    let mut rng = ChaCha8Rng::seed_from_u64(4044);
    let fam = Families::new(FamilyConfig::new(1.5, BasisConfig::new(PI, 8))).unwrap();
    let k = grammian(&fam, &BOperator::Example, 1.0, 400).unwrap();
    let betas: Vec<f64> = (0..=5).map(|i| 10f64.powi(-1 - i)).collect();

    for trial in 0..10 {
        let v = random_vec(&mut rng, 8);
        let seq = linear_controllability_indicator(&k, &v, &betas).unwrap();
        for w in seq.windows(2) {
            c.check(w[1] < w[0], || {
                format!("trial {trial}: indicator not strictly decreasing: {seq:?}")
            });
        }
        let ratio = seq[seq.len() - 1] / seq[0];
        c.check(ratio <= 0.1, || {
            format!("trial {trial}: final/initial = {ratio:e} > 0.1")
        });
    }
    c.finish();
}

fn linear_problem(q: f64, modes: usize) -> ProblemSpec {
    ProblemSpec {
        family: FamilyConfig::new(q, BasisConfig::new(PI, modes)),
        input_op: BOperator::Example,
        f: FSlot::Zero,
        g: GSlot::Zero,
        phi: NonlocalWeights::empty(),
        psi: NonlocalWeights::empty(),
        z0: SpectralVector::zeros(modes),
        z1: SpectralVector::zeros(modes),
        horizon: 1.0,
        constants: DeclaredConstants {
            c1: 0.0,
            c2: 0.0,
            c3: 0.0,
            d1: 0.0,
            d2: 0.0,
            m_bound: 0.0,
        },
    }
}

#[test]
fn criterion_5_solver_oracle_equivalence() {
    let mut c = Criterion::new("criterion 5: solver oracle equivalence");
    let mut rng = ChaCha8Rng::seed_from_u64(5055);

    // linear problems match the mode-wise Duhamel propagator at n_t = 400
    for &q in &[1.3f64, 1.5, 1.8] {
        let mut p = linear_problem(q, 6);
        p.z0 = random_vec(&mut rng, 6);
        p.z1 = random_vec(&mut rng, 6).scale(0.5);
        let fam = Families::new(p.family.clone()).unwrap();
        let k = grammian(&fam, &p.input_op, 1.0, 400).unwrap();
        let z_d = SpectralVector::from_coeffs(vec![0.1, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let report = solve_fixed_point(&p, &k, 1e-2, &z_d, &SolverConfig::new(400)).unwrap();
        c.check(report.converged, || format!("q={q}: linear solve did not converge"));
        let forcing: Vec<SpectralVector> = report
            .control
            .iter()
            .map(|u| p.input_op.apply(u, 6))
            .collect();
        let oracle = fam
            .duhamel_linear(&p.z0, &p.z1, &forcing, report.trajectory.grid())
            .unwrap();
        let err = report.trajectory.sup_distance(&oracle);
        c.check(err <= 1e-6, || format!("q={q}: solver vs Duhamel {err:e} > 1e-6"));
    }

    // q → 2 classical limit: one mode against an RK4 reference of
    // z″ = −μz + u(θ) with the same prescribed control forcing
    {
        let q = 2.0 - 1e-9;
        let mut p = linear_problem(q, 1);
        p.input_op = BOperator::Custom(nalgebra::DMatrix::from_element(1, 1, 1.0));
        p.z0 = SpectralVector::from_coeffs(vec![0.4]);
        p.z1 = SpectralVector::from_coeffs(vec![-0.1]);
        let n_t = 400;
        let ws = fracctrl::mild_solver::Workspace::new(&p, n_t).unwrap();
        let u_of = |t: f64| (2.0 * t).cos();
        let control: Vec<ControlVector> = ws
            .grid()
            .iter()
            .map(|&t| ControlVector { coeffs: vec![u_of(t)] })
            .collect();
        let seed = Trajectory::constant(ws.grid().to_vec(), p.z0.clone()).unwrap();
        let got = ws.apply_with_control(&seed, &control).unwrap();

        // RK4 on z' = v, v' = −μz + u; μ = 1, h fine enough to be exact here
        let mu = 1.0;
        let steps_per_node = 25usize;
        let h = 1.0 / (n_t * steps_per_node) as f64;
        let (mut z, mut v) = (0.4f64, -0.1f64);
        let mut t = 0.0;
        let mut worst = (got.state(0).coeffs[0] - z).abs();
        let f = |t: f64, z: f64, v: f64| (v, -mu * z + u_of(t));
        for k in 1..=n_t {
            for _ in 0..steps_per_node {
                let (k1z, k1v) = f(t, z, v);
                let (k2z, k2v) = f(t + 0.5 * h, z + 0.5 * h * k1z, v + 0.5 * h * k1v);
                let (k3z, k3v) = f(t + 0.5 * h, z + 0.5 * h * k2z, v + 0.5 * h * k2v);
                let (k4z, k4v) = f(t + h, z + h * k3z, v + h * k3v);
                z += h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
                v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
                t += h;
            }
            worst = worst.max((got.state(k).coeffs[0] - z).abs());
        }
        c.check(worst <= 1e-4, || {
            format!("q→2 classical limit: solver vs RK4 {worst:e} > 1e-4")
        });
    }

    // self-convergence factor ≥ 1.5 per grid doubling on the worked example
    {
        let cfg = ExperimentConfig::default();
        let p = cfg.problem().unwrap();
        let fam = Families::new(p.family.clone()).unwrap();
        let k = grammian(&fam, &p.input_op, 1.0, 400).unwrap();
        let z_d = cfg.z_d_vector();
        let solve = |n_t: usize| {
            let mut sc = SolverConfig::new(n_t);
            sc.fp_tol = 1e-11;
            solve_fixed_point(&p, &k, 1e-2, &z_d, &sc).unwrap().trajectory
        };
        let s100 = solve(100);
        let s200 = solve(200);
        let s400 = solve(400);
        let dist = |fine: &Trajectory, coarse: &Trajectory| {
            let ratio = (fine.nodes() - 1) / (coarse.nodes() - 1);
            coarse
                .states()
                .iter()
                .enumerate()
                .map(|(k, s)| s.sub(fine.state(k * ratio)).norm())
                .fold(0.0, f64::max)
        };
        let d100 = dist(&s400, &s100);
        let d200 = dist(&s400, &s200);
        c.check(d200 * 1.5 <= d100, || {
            format!("self-convergence factor {} < 1.5", d100 / d200)
        });
    }

    c.finish();
}

#[test]
fn criterion_6_example_instance_hypotheses() {
    let mut c = Criterion::new("criterion 6: example-instance hypotheses");
    let mut rng = ChaCha8Rng::seed_from_u64(6066);
    let ny = 13usize;
    let l2 = |a: &Vec<f64>, b: &Vec<f64>| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    };

    // sampled Lipschitz of g ≤ e/2 × 1.05
    let mut g_hat = 0.0f64;
    for &tau in &[0.5, 1.0] {
        for &amp in &[0.01, 0.5] {
            let est = estimate_lipschitz(
                |s: &Vec<f64>| example_g(0.0, tau, s),
                l2,
                || (0..ny).map(|_| rng.random_range(-amp..amp)).collect(),
                300,
            );
            g_hat = g_hat.max(est);
        }
    }
    c.check(g_hat <= (E / 2.0) * 1.05, || {
        format!("g Lipschitz estimate {g_hat} > e/2 × 1.05")
    });

    // sampled Lipschitz of f (state chained through the Volterra integral of
    // g at horizon 1) ≤ (2+3e)/6 × 1.05
    let combined = |s: &Vec<f64>| {
        // w(1) = trapezoid of g(1, τ, s) over τ ∈ [0, 1], constant state
        let m = 64usize;
        let h = 1.0 / m as f64;
        let mut w = vec![0.0; s.len()];
        for j in 0..=m {
            let gv = example_g(1.0, j as f64 * h, s);
            let wt = if j == 0 || j == m { 0.5 * h } else { h };
            for (acc, &g) in w.iter_mut().zip(&gv) {
                *acc += wt * g;
            }
        }
        example_f(1.0, s, &w)
    };
    let mut f_hat = 0.0f64;
    for &amp in &[0.01, 0.5, 2.0] {
        let est = estimate_lipschitz(
            combined,
            l2,
            || (0..ny).map(|_| rng.random_range(-amp..amp)).collect(),
            300,
        );
        f_hat = f_hat.max(est);
    }
    let f_cap = (2.0 + 3.0 * E) / 6.0;
    c.check(f_hat <= f_cap * 1.05, || {
        format!("combined f Lipschitz estimate {f_hat} > (2+3e)/6 × 1.05 = {}", f_cap * 1.05)
    });

    // contraction margin 0.3 for Σ|aᵢ| = 0.3, Σ|γᵢ| = 0.4 with measured M
    let cfg = ExperimentConfig::default();
    let p = cfg.problem().unwrap();
    let con = check_contraction(p.family.bound_m, p.constants.d1, p.constants.d2);
    c.check(con.passed && (con.margin - 0.3).abs() <= 1e-9, || {
        format!("contraction margin {} ≠ 0.3 (M = {})", con.margin, p.family.bound_m)
    });

    // uniform bound of the worked f respected: all sampled values within the
    // pointwise cap 1/4 + (e−1)/√2 on horizon 1
    let w_cap = (E - 1.0) / SQRT_2;
    let cap = 0.25 + w_cap;
    let mut worst = 0.0f64;
    for _ in 0..2000 {
        let theta = rng.random_range(0.0..=1.0);
        let s: Vec<f64> = (0..ny).map(|_| rng.random_range(-100.0..100.0)).collect();
        let w: Vec<f64> = (0..ny).map(|_| rng.random_range(0.0..=w_cap)).collect();
        for v in example_f(theta, &s, &w) {
            worst = worst.max(v.abs());
        }
    }
    c.check(worst <= cap + 1e-12, || {
        format!("example f pointwise value {worst} exceeds cap {cap}")
    });

    c.finish();
}

fn sweep_config(q: f64) -> ExperimentConfig {
    ExperimentConfig {
        q,
        ..Default::default()
    }
}

#[test]
fn criterion_7_approximate_controllability_sweep() {
    let mut c = Criterion::new("criterion 7: approximate controllability at desk scale");

    for &q in &[1.5f64, 1.3, 1.8] {
        let cfg = sweep_config(q);
        let records = run_beta_sweep(&cfg, 1).unwrap();
        c.check(records.len() == 5, || format!("q={q}: expected 5 rows"));
        for r in &records {
            c.check(r.converged, || format!("q={q} β={}: did not converge", r.beta));
            c.check(r.iterations <= 50, || {
                format!("q={q} β={}: {} iterations > 50", r.beta, r.iterations)
            });
            c.check(r.lemma2_ok, || {
                format!("q={q} β={}: feedback-control bound violated", r.beta)
            });
        }
        for w in records.windows(2) {
            c.check(w[1].terminal_error < w[0].terminal_error, || {
                format!(
                    "q={q}: terminal error not strictly decreasing: {} → {}",
                    w[0].terminal_error, w[1].terminal_error
                )
            });
        }
        let ratio = records[4].terminal_error / records[0].terminal_error;
        c.check(ratio <= 0.1, || {
            format!("q={q}: terminal_error(1e-5)/terminal_error(1e-1) = {ratio:e} > 0.1")
        });

        // residual ≤ 1e-6 on the returned trajectories (spot check via a
        // direct solve at the middle β)
        let p = cfg.problem().unwrap();
        let fam = Families::new(p.family.clone()).unwrap();
        let k = grammian(&fam, &p.input_op, 1.0, cfg.grammian_nodes).unwrap();
        let report =
            solve_fixed_point(&p, &k, 1e-3, &cfg.z_d_vector(), &cfg.solver_config()).unwrap();
        c.check(report.residual <= 1e-6, || {
            format!("q={q}: residual {:e} > 1e-6", report.residual)
        });
    }

    c.finish();
}

#[test]
fn criterion_8_determinism_byte_identical_csv() {
    let mut c = Criterion::new("criterion 8: determinism");
    for &q in &[1.5f64, 1.3, 1.8] {
        let cfg = sweep_config(q);
        let a = sweep_to_csv(&run_beta_sweep(&cfg, 1).unwrap());
        let b = sweep_to_csv(&run_beta_sweep(&cfg, 2).unwrap());
        c.check(a == b, || format!("q={q}: sweep CSV differs across runs"));
        c.check(a.into_bytes() == b.into_bytes(), || {
            format!("q={q}: byte-level mismatch")
        });
    }
    c.finish();
}
