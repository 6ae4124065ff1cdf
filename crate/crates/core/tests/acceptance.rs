//! Acceptance suite. Runs every criterion at its full size and tolerance,
//! prints one PASS/FAIL line per criterion and exits nonzero if any fails.
//! Numeric arguments select criteria: `cargo test --test acceptance -- 1 4`.

use std::collections::HashMap;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use underlay::harness::{
    clears_box, constraint_violation, decreasing_series, feasibility_mismatch, grid_neighbors, mean_std,
    random_group, read_rows, run_mobility, run_trials, ExperimentConfig, MobilityConfig, TraceRow, TrialResult,
    ASCENT_TOL, GRID_TOL, KKT_TOL,
};
use underlay::matching::{check_feasibility, PerClProblem};
use underlay::power::{optimize_group, LinkModel, MamiOptions, MamiStatus};

/// Base seed of every Monte-Carlo criterion; trial k uses `BASE_SEED ^ k`.
const BASE_SEED: u64 = 0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// A feasible group with `links` links drawn from `rng`.
fn feasible_group(rng: &mut ChaCha8Rng, links: usize) -> PerClProblem {
    loop {
        let problem = random_group(rng, links);
        if check_feasibility(&problem).feasible {
            return problem;
        }
    }
}

/// A random point of the feasible set: the segment from the minimum-power
/// point towards a uniform box point, shortened until it is feasible. The
/// start meets its QoS constraints with equality, hence the round-off slack.
fn feasible_point(rng: &mut ChaCha8Rng, problem: &PerClProblem) -> Vec<f64> {
    let p_init = check_feasibility(problem).p_init.expect("feasible group");
    let q: Vec<f64> = problem.p_max_vec.iter().map(|&cap| rng.gen::<f64>() * cap).collect();
    let mut lambda: f64 = rng.gen();
    loop {
        let p: Vec<f64> = p_init.iter().zip(&q).map(|(a, b)| a + lambda * (b - a)).collect();
        if constraint_violation(problem, &p) <= 1e-12 {
            return p;
        }
        lambda *= 0.5;
    }
}

/// Trial results per (algorithm, N, M/N), shared by the sweep criteria.
#[derive(Default)]
struct Trials {
    cache: HashMap<(String, usize, usize), Vec<TrialResult>>,
}

impl Trials {
    fn get(&mut self, algorithm: &str, n_cvl: usize, density: usize) -> &[TrialResult] {
        let key = (algorithm.to_string(), n_cvl, density);
        if !self.cache.contains_key(&key) {
            let config = ExperimentConfig {
                algorithms: vec![algorithm.into()],
                n_cvl: vec![n_cvl],
                density: vec![density],
                trials: 200,
                base_seed: BASE_SEED,
                ..Default::default()
            };
            let mut runs = run_trials(&config).expect("sweep runs");
            self.cache.insert(key.clone(), runs.remove(0).1);
        }
        &self.cache[&key]
    }

    fn rates(&mut self, algorithm: &str, n_cvl: usize, density: usize) -> Vec<f64> {
        self.get(algorithm, n_cvl, density).iter().map(|t| t.sum_rate).collect()
    }
}

fn feasibility_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut checked, mut mismatches) = (0, Vec::new());
    for k in 0..2000 {
        let links = rng.gen_range(1..=3);
        let problem = random_group(&mut rng, links);
        if !clears_box(&problem) {
            continue;
        }
        checked += 1;
        if let Some(msg) = feasibility_mismatch(&problem).expect("oracle runs") {
            mismatches.push(format!("instance {k}: {msg}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        mismatches.is_empty() && secs < 30.0,
        format!("{checked} of 2000 instances clear the box, {} mismatches {mismatches:?}, {secs:.1} s", mismatches.len()),
    )
}

fn monotone_ascent() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let opts = MamiOptions::default();
    let (mut worst_drop, mut flat, mut multi) = (0.0f64, 0, 0);
    for _ in 0..500 {
        let links = rng.gen_range(2..=4);
        let out = optimize_group(&feasible_group(&mut rng, links), &opts).expect("valid group");
        let trace = &out.objective_trace;
        for w in trace.windows(2) {
            worst_drop = worst_drop.max(w[0] - w[1]);
        }
        if out.iterations > 1 {
            multi += 1;
            if !trace.windows(2).any(|w| w[1] > w[0]) {
                flat += 1;
            }
        }
    }
    outcome(
        worst_drop <= ASCENT_TOL && flat == 0,
        format!("largest drop {worst_drop:e}, {multi} multi-iteration runs, {flat} without a strict increase"),
    )
}

fn kkt_stationarity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let opts = MamiOptions::default();
    let (mut worst_kkt, mut worst_viol, mut statuses) = (0.0f64, 0.0f64, HashMap::new());
    for _ in 0..500 {
        let links = rng.gen_range(1..=4);
        let problem = feasible_group(&mut rng, links);
        let out = optimize_group(&problem, &opts).expect("valid group");
        worst_kkt = worst_kkt.max(if out.kkt_residual.is_nan() { f64::INFINITY } else { out.kkt_residual });
        worst_viol = worst_viol.max(constraint_violation(&problem, &out.p));
        *statuses.entry(format!("{:?}", out.status)).or_insert(0) += 1;
    }
    let infeasible = statuses.contains_key(&format!("{:?}", MamiStatus::Infeasible));
    outcome(
        worst_kkt <= KKT_TOL && worst_viol <= 1e-6 && !infeasible,
        format!("largest residual {worst_kkt:e}, largest relative violation {worst_viol:e}, statuses {statuses:?}"),
    )
}

fn gradient_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let links = rng.gen_range(2..=4);
        let problem = feasible_group(&mut rng, links);
        let p = feasible_point(&mut rng, &problem);
        let model = LinkModel::new(&problem);
        let grad = model.grad_r_vex(&p);
        let central = |j: usize, h: f64| {
            let (mut up, mut down) = (p.clone(), p.clone());
            up[j] += h;
            down[j] -= h;
            (model.dc_split(&up).1 - model.dc_split(&down).1) / (2.0 * h)
        };
        let mut err = 0.0f64;
        for j in 0..p.len() {
            // Central differences at h and h/2 combined by one Richardson
            // step; the step stays well inside p >= 0.
            let h = 1e-3 * p[j].max(1e-6 * problem.p_max_vec[j]);
            let fd = (4.0 * central(j, 0.5 * h) - central(j, h)) / 3.0;
            err = err.max((fd - grad[j]).abs());
        }
        let scale = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        worst = worst.max(err / scale);
    }
    outcome(worst <= 1e-5, format!("largest relative error {worst:e} over 1000 points"))
}

fn dc_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let links = rng.gen_range(1..=4);
        let problem = random_group(&mut rng, links);
        let p: Vec<f64> = problem.p_max_vec.iter().map(|&cap| rng.gen::<f64>() * cap).collect();
        let model = LinkModel::new(&problem);
        let (r_cav, r_vex) = model.dc_split(&p);
        worst = worst.max((r_cav + r_vex - model.sum_rate(&p)).abs());
    }
    outcome(worst <= 1e-9, format!("largest gap {worst:e} over 1000 points"))
}

fn grid_certificate() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let opts = MamiOptions::default();
    let (mut worst, mut neighbors) = (f64::NEG_INFINITY, 0);
    for _ in 0..200 {
        let problem = feasible_group(&mut rng, 2);
        let out = optimize_group(&problem, &opts).expect("valid group");
        let check = grid_neighbors(&problem, &out.p, 500).expect("grid builds");
        worst = worst.max(check.gap());
        neighbors += check.feasible_neighbors;
    }
    outcome(
        worst <= GRID_TOL,
        format!("largest neighbor gain {worst:e} bits/s/Hz, {neighbors} feasible neighbors over 200 instances"),
    )
}

/// Difference of means and the standard error of that difference.
fn margin(a: &[f64], b: &[f64]) -> (f64, f64) {
    let (ma, sa) = mean_std(a);
    let (mb, sb) = mean_std(b);
    (ma - mb, (sa * sa / a.len() as f64 + sb * sb / b.len() as f64).sqrt())
}

fn sum_rate_ordering(trials: &mut Trials) -> Outcome {
    let start = Instant::now();
    let ours = trials.rates("msera2", 10, 20);
    let mut pass = true;
    let mut parts = vec![format!("msera2 {:.2}", mean_std(&ours).0)];
    for rival in ["random_ncvl", "random_cvl"] {
        let (diff, se) = margin(&ours, &trials.rates(rival, 10, 20));
        pass &= diff > 2.0 * se;
        parts.push(format!("vs {rival}: +{diff:.2} (2 SE = {:.2})", 2.0 * se));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 600.0;
    parts.push(format!("{secs:.0} s"));
    outcome(pass, parts.join(", "))
}

fn non_inferiority(trials: &mut Trials) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [6, 10, 16] {
        let two = mean_std(&trials.rates("msera2", n, 20)).0;
        let one = mean_std(&trials.rates("msera1", n, 20)).0;
        pass &= two >= 0.99 * one;
        parts.push(format!("N={n}: msera2 {two:.2} vs msera1 {one:.2}"));
    }
    outcome(pass, parts.join(", "))
}

fn complexity_trend(trials: &mut Trials) -> Outcome {
    let densities = [4, 8, 12, 16, 20];
    let points: Vec<(f64, f64)> = densities
        .iter()
        .map(|&m| {
            let times: Vec<f64> = trials.get("msera2", 10, m).iter().map(|t| t.wall_time_s).collect();
            ((m as f64).ln(), mean_std(&times).0.ln())
        })
        .collect();
    let n = points.len() as f64;
    let (mx, my) = (points.iter().map(|p| p.0).sum::<f64>() / n, points.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let secs: Vec<String> = points.iter().map(|p| format!("{:.4}", p.1.exp())).collect();
    outcome(
        (1.6..=2.6).contains(&slope),
        format!("exponent {slope:.3}, mean runtimes at M/N {densities:?}: {secs:?} s"),
    )
}

fn trace_monotone() -> Outcome {
    let dir = std::env::temp_dir().join(format!("underlay-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let (mut series, mut bad) = (0, Vec::new());
    for trial in 0..5u64 {
        let path = dir.join(format!("trace{trial}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_underlay"))
            .args(["trace", "--algorithm", "msera1,msera2,random_ncvl,random_cvl"])
            .args(["--n-cvl", "10", "--density", "20", "--seed", &BASE_SEED.to_string()])
            .args(["--trial", &trial.to_string(), "--trace"])
            .arg(&path)
            .status()
            .expect("binary runs");
        if !status.success() {
            bad.push(format!("trial {trial}: exit {status}"));
            continue;
        }
        let rows: Vec<TraceRow> = read_rows(std::fs::File::open(&path).expect("trace file")).expect("trace parses");
        // Four algorithms in a row; a new series starts whenever the
        // iteration counter resets.
        let starts: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].iteration == 0).collect();
        series += starts.len();
        for (k, &s) in starts.iter().enumerate() {
            let end = starts.get(k + 1).copied().unwrap_or(rows.len());
            for cvl in decreasing_series(&rows[s..end], 0.0) {
                bad.push(format!("trial {trial}: CVL {cvl} decreases"));
            }
        }
    }
    std::fs::remove_dir_all(&dir).ok();
    outcome(bad.is_empty(), format!("{series} CL series over 5 trials x 4 algorithms, problems {bad:?}"))
}

fn mobility_ranking() -> Outcome {
    let config = ExperimentConfig {
        algorithms: vec!["msera2".into()],
        n_cvl: vec![3],
        density: vec![4, 12, 20],
        trials: 100,
        base_seed: BASE_SEED,
        mobility: Some(MobilityConfig {
            snapshots: 10,
            ..Default::default()
        }),
        ..Default::default()
    };
    let rows = run_mobility(&config).expect("mobility runs");
    let mean = |density: usize| {
        let r: Vec<f64> = rows.iter().filter(|r| r.density == density).map(|r| r.mean_sum_rate).collect();
        r.iter().sum::<f64>() / r.len() as f64
    };
    let (m4, m12, m20) = (mean(4), mean(12), mean(20));
    outcome(
        m20 > m12 && m12 > m4,
        format!("mean over snapshots: M/N=20 {m20:.2}, 12 {m12:.2}, 4 {m4:.2}"),
    )
}

type Criterion = (usize, &'static str, Box<dyn FnOnce(&mut Trials) -> Outcome>);

fn main() -> ExitCode {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut trials = Trials::default();
    let criteria: Vec<Criterion> = vec![
        (1, "feasibility test matches the vertex oracle", Box::new(|_| feasibility_equivalence())),
        (2, "monotone ascent", Box::new(|_| monotone_ascent())),
        (3, "KKT stationarity and constraint satisfaction", Box::new(|_| kkt_stationarity())),
        (4, "gradient of the convex part", Box::new(|_| gradient_check())),
        (5, "DC split identity", Box::new(|_| dc_identity())),
        (6, "grid local-optimality certificate", Box::new(|_| grid_certificate())),
        (7, "msera2 beats both random schedulers", Box::new(sum_rate_ordering)),
        (8, "msera2 non-inferior to msera1", Box::new(non_inferiority)),
        (9, "runtime exponent in M/N", Box::new(complexity_trend)),
        (10, "trace series are nondecreasing", Box::new(|_| trace_monotone())),
        (11, "mobility ranks by density", Box::new(|_| mobility_ranking())),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = run(&mut trials);
        let verdict = if result.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!result.pass);
        println!(
            "criterion {id:2} {name}: {verdict} ({}; {:.1} s)",
            result.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
