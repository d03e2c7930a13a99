//! One test per acceptance criterion. Each prints a `[PASS]` or `[FAIL]` line
//! (written straight to stderr so it shows without `--nocapture`) and then
//! asserts. Criterion 10 is long-running and ignored by default; run it with
//! `cargo test --release --test acceptance -- --ignored`.

mod common;

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use common::{
    chain_mdp, fixture, load_q_fixture, random_decision, random_mdp, random_policy, random_q,
    random_row, random_window, rng,
};
use pdcv::env::{Direction, GridWorld};
use pdcv::harness::{
    aggregate, best_per_algorithm, gridworld_policies, run_sweep, write_csv, AggregateRow,
    AlgorithmSpec, ExperimentConfig, ExperimentKind, Summary,
};
use pdcv::mdp::{sample_episode, ActionId, DiscretePolicy, StateId};
use pdcv::oracle::{bellman_residual, enumerate_expected_return, exact_q, DEFAULT_TOLERANCE};
use pdcv::returns::{
    estimate, lambda_return_tderror_sum, lambda_return_weighted, nstep_cv_sarsa_return,
    nstep_expected_sarsa_return, nstep_tree_backup_return, nstep_tree_backup_return_explicit,
    ActionDetail, Decision, EstimatorVariant, FrozenEpisode, LambdaForm, ReturnContext,
    ReturnEstimatorSpec,
};
use rand::Rng;

const STUDY_SEED: u64 = 2018;

fn report(criterion: u32, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "[{tag}] criterion {criterion}: {detail}");
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[test]
fn criterion_01_zero_mean_correction() {
    let start = Instant::now();
    let mut r = rng(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let pi = random_row(&mut r, 4, 0.0);
        let mu = random_row(&mut r, 4, 0.01);
        let q: Vec<f64> = (0..4).map(|_| r.gen_range(-100.0..100.0)).collect();
        let e: f64 = pi.iter().zip(&q).map(|(p, v)| p * v).sum();
        let total: f64 = (0..4).map(|a| mu[a] * (e - pi[a] / mu[a] * q[a])).sum();
        worst = worst.max(total.abs());
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        1,
        worst < 1e-12 && secs < 1.0,
        &format!("max |Σ μ(E−ρQ)| = {worst:.3e} over 1000 triples in {secs:.3}s"),
    );
}

#[test]
fn criterion_02_unbiasedness_oracle_equivalence() {
    let start = Instant::now();
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let gamma = r.gen_range(0.5..=1.0);
        let mdp = random_mdp(&mut r, 3, 2, gamma);
        let mu = random_policy(&mut r, 4, 2, 0.1);
        let pi = random_policy(&mut r, 4, 2, 0.0);
        let q = random_q(&mut r, 4, 2);
        let start_pair = (StateId(r.gen_range(0..3)), ActionId(r.gen_range(0..2)));
        for n in 1..=4 {
            let spec = |v| ReturnEstimatorSpec::new(v, n, gamma).unwrap();
            let base = enumerate_expected_return(
                &mdp,
                &mu,
                &pi,
                &spec(EstimatorVariant::SarsaIs),
                &q,
                start_pair,
            )
            .unwrap();
            for c in [-1.0, 0.5] {
                let s = spec(EstimatorVariant::CvSarsa).with_c(c).unwrap();
                let cv = enumerate_expected_return(&mdp, &mu, &pi, &s, &q, start_pair).unwrap();
                worst = worst.max((cv - base).abs());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        2,
        worst < 1e-12 && secs < 10.0,
        &format!("max |E[cv] − E[sarsa_is]| = {worst:.3e} over 50 MDPs, n=1..4, in {secs:.2}s"),
    );
}

#[test]
fn criterion_03_one_step_collapse() {
    let mut r = rng(3);
    let mut mismatches = 0;
    for i in 0..10_000 {
        let (d, rewards) = random_window(&mut r, 1, i % 10 == 0);
        let ctx = ReturnContext::new(&d, &rewards, i % 10 == 0).unwrap();
        let gamma = r.gen_range(0.0..=1.0);
        if nstep_cv_sarsa_return(&ctx, gamma, -1.0).to_bits()
            != nstep_expected_sarsa_return(&ctx, gamma).to_bits()
        {
            mismatches += 1;
        }
    }
    report(
        3,
        mismatches == 0,
        &format!("{mismatches} of 10000 one-step targets differ bitwise"),
    );
}

#[test]
fn criterion_04_exact_q_deterministic_collapse() {
    let gamma = 0.95;
    let mdp = chain_mdp(gamma);
    let pi = DiscretePolicy::repeated(11, vec![0.7, 0.3]).unwrap();
    let mu = DiscretePolicy::uniform(11, 2);
    let truth = exact_q(&mdp, &pi, 1e-13).unwrap();
    let one_step = ReturnEstimatorSpec::new(EstimatorVariant::ExpectedSarsa, 1, gamma).unwrap();
    let mut r = rng(4);
    let mut worst = 0.0f64;
    let mut checked = 0;
    for _ in 0..50 {
        let traj = sample_episode(&mdp, &mu, &pi, &mut r, 10_000).unwrap();
        let ep = FrozenEpisode::from_trajectory(&traj, &truth.q, &pi).unwrap();
        for t in 0..ep.len() {
            let target = estimate(&one_step, &ep.window(t, 1).unwrap());
            for n in 1..=8 {
                let spec = ReturnEstimatorSpec::new(EstimatorVariant::CvSarsa, n, gamma).unwrap();
                worst = worst.max((estimate(&spec, &ep.window(t, n).unwrap()) - target).abs());
                checked += 1;
            }
        }
    }
    report(
        4,
        worst < 1e-10,
        &format!("max |Ĝ_cv − one-step ES| = {worst:.3e} over {checked} windows, n=1..8"),
    );
}

#[test]
fn criterion_05_lambda_identities() {
    let start = Instant::now();
    let mut r = rng(5);
    let mut worst = 0.0f64;
    let mut episodes = 0;
    while episodes < 200 {
        let gamma = r.gen_range(0.8..=1.0);
        let mdp = random_mdp(&mut r, 3, 2, gamma);
        let mu = random_policy(&mut r, 4, 2, 0.2);
        let pi = random_policy(&mut r, 4, 2, 0.0);
        let q = random_q(&mut r, 4, 2);
        let traj = sample_episode(&mdp, &mu, &pi, &mut r, 40).unwrap();
        if !traj.is_terminal() {
            continue;
        }
        episodes += 1;
        let ep = FrozenEpisode::from_trajectory(&traj, &q, &pi).unwrap();
        for form in LambdaForm::ALL {
            let spec = ReturnEstimatorSpec::new(form.matching_variant(), 1, gamma).unwrap();
            for lambda in [0.0, 0.3, 0.7, 1.0] {
                for t in 0..ep.len() {
                    let w = lambda_return_weighted(&ep, t, &spec, lambda).unwrap();
                    let s = lambda_return_tderror_sum(&ep, t, form, gamma, lambda).unwrap();
                    worst = worst.max((w - s).abs());
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    report(5, worst < 1e-10 && secs < 10.0, &format!("max |weighted − TD-error sum| = {worst:.3e} over 200 episodes, 4 forms, 4 λ, in {secs:.2}s"));
}

#[test]
fn criterion_06_tree_backup_dual_form() {
    let mut r = rng(6);
    let mut worst = 0.0f64;
    for i in 0..10_000 {
        let h = 1 + i % 8;
        let terminal = i % 3 == 0;
        let len = h + usize::from(!terminal);
        let raw: Vec<_> = (0..len).map(|_| random_decision(&mut r)).collect();
        let rewards: Vec<f64> = (0..h).map(|_| r.gen_range(-2.0..2.0)).collect();
        let details: Vec<ActionDetail> = raw
            .iter()
            .map(|(_, pi, q, a)| ActionDetail {
                policy_row: pi,
                q_values: q,
                action: ActionId(*a),
            })
            .collect();
        let decisions: Vec<Decision> = raw.iter().map(|(d, ..)| *d).collect();
        let gamma = r.gen_range(0.0..=1.0);
        let ctx = ReturnContext::new(&decisions, &rewards, terminal).unwrap();
        let a = nstep_tree_backup_return(&ctx, gamma);
        let b = nstep_tree_backup_return_explicit(&details, &rewards, terminal, gamma);
        worst = worst.max((a - b).abs());
    }
    report(
        6,
        worst < 1e-12,
        &format!("max |correction form − explicit sum| = {worst:.3e} over 10000 contexts"),
    );
}

#[test]
fn criterion_07_oracle_quality() {
    let g = GridWorld::new();
    let model = g.model();
    let mut worst_residual = 0.0f64;
    let mut worst_fixture = 0.0f64;
    for (kind, name) in [
        (
            ExperimentKind::GridworldOnpolicy,
            "gridworld_q_equiprobable.csv",
        ),
        (
            ExperimentKind::GridworldOffpolicy,
            "gridworld_q_north_eps05.csv",
        ),
    ] {
        let (_, pi) = gridworld_policies(kind).unwrap();
        let truth = exact_q(&model, &pi, DEFAULT_TOLERANCE).unwrap();
        worst_residual = worst_residual.max(bellman_residual(&model, &pi, &truth.q));
        let rows = load_q_fixture(name);
        assert_eq!(rows.len(), 92, "{}", fixture(name).display());
        for (s, a, q) in rows {
            worst_fixture = worst_fixture.max((truth.get(s, a) - q).abs());
        }
    }
    let (_, uniform) = gridworld_policies(ExperimentKind::GridworldOnpolicy).unwrap();
    let truth = exact_q(&model, &uniform, DEFAULT_TOLERANCE).unwrap();
    let mut worst_symmetry = 0.0f64;
    for &(s, a) in truth.pairs() {
        let d = Direction::from_action(a).unwrap();
        let rs = g.state_of(g.rotate(g.cell_of(s)));
        worst_symmetry =
            worst_symmetry.max((truth.get(s, a) - truth.get(rs, d.opposite().action())).abs());
    }
    report(
        7,
        worst_residual < 1e-9 && worst_fixture < 1e-8 && worst_symmetry < 1e-9,
        &format!("residual {worst_residual:.3e}, fixture gap {worst_fixture:.3e}, rotation gap {worst_symmetry:.3e}"),
    );
}

fn study(
    kind: ExperimentKind,
    algorithms: Vec<AlgorithmSpec>,
    runs: usize,
    episodes: usize,
) -> Vec<AggregateRow> {
    let mut config = ExperimentConfig::new(kind, algorithms);
    config.runs = runs;
    config.episodes = episodes;
    config.base_seed = STUDY_SEED;
    let summary = match kind {
        ExperimentKind::MountainCar => Summary::MeanOverEpisodes,
        _ => Summary::Final,
    };
    aggregate(&run_sweep(&config, workers()).unwrap(), summary)
}

/// Rows of one `(variant, n)` keyed by α bits, in α order.
fn curve(
    rows: &[AggregateRow],
    variant: EstimatorVariant,
    n: usize,
) -> BTreeMap<u64, &AggregateRow> {
    rows.iter()
        .filter(|r| r.algorithm == variant.name() && r.n == n)
        .map(|r| (r.alpha.to_bits(), r))
        .collect()
}

#[test]
fn criterion_08_gridworld_offpolicy_study() {
    use EstimatorVariant::{CvSarsa, ExpectedSarsa};
    let rows = study(
        ExperimentKind::GridworldOffpolicy,
        vec![
            AlgorithmSpec::new(ExpectedSarsa, 1),
            AlgorithmSpec::new(CvSarsa, 2),
            AlgorithmSpec::new(ExpectedSarsa, 4),
            AlgorithmSpec::new(CvSarsa, 4),
        ],
        200,
        200,
    );
    let es1 = curve(&rows, ExpectedSarsa, 1);
    let cv2 = curve(&rows, CvSarsa, 2);
    let (mut not_worse, mut separated, mut points) = (true, 0, 0);
    let mut detail_a = Vec::new();
    for (bits, e) in &es1 {
        let c = cv2[bits];
        points += 1;
        not_worse &= c.mean <= e.mean;
        if e.mean - c.mean >= e.stderr + c.stderr {
            separated += 1;
        }
        detail_a.push(format!("α={} {:.3}/{:.3}", e.alpha, c.mean, e.mean));
    }
    let part_a = not_worse && 2 * separated > points;

    let es4 = curve(&rows, ExpectedSarsa, 4);
    let cv4 = curve(&rows, CvSarsa, 4);
    let mut part_b = true;
    let mut detail_b = Vec::new();
    for (bits, e) in es4.iter().filter(|(_, r)| r.alpha >= 0.3) {
        let c = cv4[bits];
        let ok = e.mean > c.mean;
        part_b &= ok;
        detail_b.push(format!(
            "α={} es4 {:.3} ({} div) vs cv4 {:.3} ({} div){}",
            e.alpha,
            e.mean,
            e.diverged,
            c.mean,
            c.diverged,
            if ok { "" } else { " ✗" }
        ));
    }
    let _ = writeln!(
        std::io::stderr(),
        "  (a) cv2/es1 final RMS: {}",
        detail_a.join(", ")
    );
    let _ = writeln!(std::io::stderr(), "  (b) {}", detail_b.join("; "));
    report(
        8,
        part_a && part_b,
        &format!(
            "(a) {} with {separated}/{points} α separated by 1 SE; (b) {}",
            if part_a { "holds" } else { "fails" },
            if part_b { "holds" } else { "fails" }
        ),
    );
}

#[test]
fn criterion_09_gridworld_onpolicy_study() {
    use EstimatorVariant::{CvSarsa, ExpectedSarsa};
    let ns = [1, 2, 4, 8];
    let algorithms = [ExpectedSarsa, CvSarsa]
        .into_iter()
        .flat_map(|v| ns.into_iter().map(move |n| AlgorithmSpec::new(v, n)))
        .collect();
    let rows = study(ExperimentKind::GridworldOnpolicy, algorithms, 200, 200);
    let best = best_per_algorithm(&rows, false);
    let pick = |v: EstimatorVariant, n: usize| {
        best.iter()
            .find(|r| r.algorithm == v.name() && r.n == n)
            .unwrap()
    };
    let mut pass = true;
    let mut detail = Vec::new();
    for n in ns {
        let (c, e) = (pick(CvSarsa, n), pick(ExpectedSarsa, n));
        let ok = c.mean < e.mean;
        pass &= ok;
        detail.push(format!(
            "n={n} cv {:.4}±{:.4} (α={}) vs es {:.4}±{:.4} (α={}){}",
            c.mean,
            c.stderr,
            c.alpha,
            e.mean,
            e.stderr,
            e.alpha,
            if ok { "" } else { " ✗" }
        ));
    }
    report(9, pass, &detail.join("; "));
}

#[test]
#[ignore = "long-running mountain-car study; run with --ignored in release mode"]
fn criterion_10_mountain_car_study() {
    use EstimatorVariant::{CvSarsa, ExpectedSarsa};
    let ns = [1, 2, 4, 8];
    let algorithms = [ExpectedSarsa, CvSarsa]
        .into_iter()
        .flat_map(|v| ns.into_iter().map(move |n| AlgorithmSpec::new(v, n)))
        .collect();
    let rows = study(ExperimentKind::MountainCar, algorithms, 50, 100);
    let best = best_per_algorithm(&rows, true);
    let top = |v: EstimatorVariant| {
        best.iter()
            .filter(|r| r.algorithm == v.name())
            .max_by(|a, b| a.mean.total_cmp(&b.mean))
            .unwrap()
    };
    let (c, e) = (top(CvSarsa), top(ExpectedSarsa));
    let pass = c.mean + c.stderr >= e.mean;
    report(
        10,
        pass,
        &format!(
            "best cv n={} α={} mean return {:.2}±{:.2}; best es n={} α={} {:.2}±{:.2}",
            c.n, c.alpha, c.mean, c.stderr, e.n, e.alpha, e.mean, e.stderr
        ),
    );
}

#[test]
fn criterion_11_harness_determinism() {
    let start = Instant::now();
    let mut config = ExperimentConfig::new(
        ExperimentKind::GridworldOffpolicy,
        vec![
            AlgorithmSpec::new(EstimatorVariant::ExpectedSarsa, 2),
            AlgorithmSpec::new(EstimatorVariant::CvSarsa, 4),
        ],
    );
    config.alpha_grid = vec![0.1, 0.5, 0.9];
    config.runs = 20;
    config.episodes = 50;
    config.base_seed = 11;
    let csv = |workers| {
        let records = run_sweep(&config, workers).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &aggregate(&records, Summary::Final)).unwrap();
        buf
    };
    let (one, eight) = (csv(1), csv(8));
    let secs = start.elapsed().as_secs_f64();
    report(
        11,
        one == eight && !one.is_empty() && secs < 60.0,
        &format!(
            "{} CSV bytes, identical for 1 and 8 workers: {}, {secs:.2}s",
            one.len(),
            one == eight
        ),
    );
}
