use proptest::prelude::*;

use super::*;
use crate::ppo::{PolicySpec, PpoHyper};
use crate::repnet::{RepNet, RepNetConfig, RepNetMode, Representation};
use crate::seed::rng_from_seed;

fn net_for(cfg: &TaskConfig, seed: u64) -> RepNet {
    RepNet::new(RepNetConfig::new(RepNetMode::Generative, 32, cfg.encoding_scheme()), seed).unwrap()
}

fn small(task: TaskKind) -> TaskConfig {
    let mut c = TaskConfig::defaults(task);
    if task == TaskKind::Xxz {
        c.n_qubits = 4;
        c.n_measurements = 10;
    }
    if task == TaskKind::Ising {
        c.n_qubits = 4;
        c.target = Some(vec![0.8; 3]);
    }
    c
}

#[test]
fn reward_examples() {
    let a = Representation(vec![0.0; 4]);
    let b = Representation(vec![1.0, 0.0, 0.0, 0.0]);
    assert_eq!(reward(&a, &a, 10.0, 4).unwrap(), 0.0);
    assert_eq!(reward(&a, &b, 10.0, 4).unwrap(), -5.0);
    assert_eq!(reward(&a, &b, 20.0, 4).unwrap(), -10.0);
    assert!(reward(&a, &Representation(vec![0.0; 3]), 10.0, 4).is_err());
    assert!(reward(&a, &b, 10.0, 3).is_err());
    assert!(reward(&a, &b, 0.0, 4).is_err());
}

#[test]
fn terminate_threshold_follows_scale_and_dimension() {
    let c = TaskConfig::defaults(TaskKind::Cat);
    let e = c.episode_config(32);
    assert!((e.terminate_eps - 0.05 * 10.0 / 32f64.sqrt()).abs() < 1e-15);
    assert_eq!(TaskConfig::defaults(TaskKind::Xxz).max_steps, 30);
    assert_eq!(TaskConfig::defaults(TaskKind::Cat).max_steps, 20);
    assert_eq!(TaskConfig::defaults(TaskKind::ProcessOutput).max_steps, 55);
    assert_eq!(TaskConfig::defaults(TaskKind::Xxz).n_measurements, 50);
    assert_eq!(TaskConfig::defaults(TaskKind::Ising).n_measurements, 5);
}

#[test]
fn start_at_target_terminates_immediately() {
    for task in [TaskKind::Cat, TaskKind::Xxz, TaskKind::ProcessOutput, TaskKind::Ising] {
        let cfg = small(task);
        let mut env = make_environment(&cfg).unwrap();
        let net = net_for(&cfg, 1);
        let ec = cfg.episode_config(32);
        let t = env.sample_start(&mut rng_from_seed(0)).target;
        let start = EpisodeStart { initial: t.clone(), target: t };
        let mut rep = Representer::new(&net, true);
        let traj = run_episode(&mut env, None, &mut rep, &ec, start, ActionMode::Uniform, 3).unwrap();
        assert_eq!(traj.steps.len(), 1, "{task:?}");
        assert_eq!(traj.n_actions(), 0);
        assert!(traj.steps[0].reward >= -ec.terminate_eps);
        assert!(traj.terminated);
        assert!((traj.final_fidelity() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn trajectories_never_exceed_horizon() {
    for task in [TaskKind::Cat, TaskKind::Xxz, TaskKind::ProcessOutput, TaskKind::Ising] {
        let cfg = small(task);
        let mut env = make_environment(&cfg).unwrap();
        let net = net_for(&cfg, 2);
        // A zero threshold forces full-length episodes.
        let ec = EpisodeConfig { terminate_eps: 0.0, ..cfg.episode_config(32) };
        let mut rep = Representer::new(&net, true);
        for s in 0..3 {
            let start = env.sample_start(&mut rng_from_seed(s));
            let t = run_episode(&mut env, None, &mut rep, &ec, start, ActionMode::Uniform, s).unwrap();
            assert!(t.n_actions() <= cfg.max_steps);
            assert_eq!(t.n_actions(), cfg.max_steps);
            for r in &t.steps {
                assert!(r.reward <= 0.0);
                assert!((0.0..=1.0 + 1e-12).contains(&r.fidelity));
            }
        }
    }
}

#[test]
fn observation_is_built_from_measurements_only() {
    let cfg = TaskConfig { noise_sigma2: 0.1, ..TaskConfig::defaults(TaskKind::Cat) };
    let net = net_for(&cfg, 4);
    let ec = cfg.episode_config(32);
    let mut env = make_environment(&cfg).unwrap();
    let start = EpisodeStart { initial: vec![1.0, 0.2], target: CAT_TARGET.to_vec() };
    let mut rep = Representer::new(&net, false);
    let ep = EpisodeRunner::start(&mut env, &mut rep, &ec, start.clone(), 17, false).unwrap();
    // Reproduce the observation from the raw statistics with the same seeds.
    let mut probe = make_environment(&cfg).unwrap();
    probe.reset(&start, crate::seed::derive_seed_str(17, "measurements")).unwrap();
    let cur = net.encode(&probe.measure(crate::seed::derive_seed(17, 0)).unwrap()).unwrap();
    let tgt = net.encode(&probe.measure_target().unwrap()).unwrap();
    let mut want: Vec<f64> = cur.0.iter().zip(&tgt.0).map(|(c, t)| c - t).collect();
    want.extend(tgt.0);
    assert_eq!(ep.observation(), want);
}

#[test]
fn reward_zero_only_at_target() {
    let cfg = TaskConfig::defaults(TaskKind::Cat);
    let net = net_for(&cfg, 5);
    let ec = cfg.episode_config(32);
    let mut env = make_environment(&cfg).unwrap();
    let mut rep = Representer::new(&net, true);
    let at = EpisodeRunner::start(&mut env, &mut rep, &ec, EpisodeStart { initial: CAT_TARGET.to_vec(), target: CAT_TARGET.to_vec() }, 0, false).unwrap();
    assert!(at.observation()[..32].iter().all(|&x| x == 0.0));
    let away = EpisodeRunner::start(&mut env, &mut rep, &ec, EpisodeStart { initial: vec![-1.0, 1.0], target: CAT_TARGET.to_vec() }, 0, false).unwrap();
    let d: f64 = away.observation()[..32].iter().map(|a| a * a).sum::<f64>().sqrt();
    assert!(d > 0.0);
}

#[test]
fn greedy_evaluation_is_deterministic() {
    let cfg = TaskConfig { noise_sigma2: 0.1, ..TaskConfig::defaults(TaskKind::Cat) };
    let net = net_for(&cfg, 6);
    let ec = cfg.episode_config(32);
    let mut env = make_environment(&cfg).unwrap();
    let policy = PolicySpec::new(64, 16, env.action_structure(), 1).unwrap();
    let sc: Vec<Scenario> = scenario_catalog().into_iter().filter(|s| s.task == TaskKind::Cat).collect();
    let a = evaluate(&mut env, Some(&policy), &net, &sc, 2, &ec, ActionMode::Greedy, 9).unwrap();
    let b = evaluate(&mut env, Some(&policy), &net, &sc, 2, &ec, ActionMode::Greedy, 9).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.scenarios.len(), 4);
}

#[test]
fn single_experiment_flags_interval() {
    let cfg = TaskConfig::defaults(TaskKind::Cat);
    let net = net_for(&cfg, 7);
    let ec = cfg.episode_config(32);
    let mut env = make_environment(&cfg).unwrap();
    let sc = vec![Scenario::new("one", TaskKind::Cat, Some(vec![0.4, 0.3]), Some(CAT_TARGET.to_vec()))];
    let r = evaluate(&mut env, None, &net, &sc, 1, &ec, ActionMode::Uniform, 0).unwrap();
    let s = &r.scenarios[0];
    assert!(s.ci_degenerate);
    assert_eq!(s.ci_half_width, 0.0);
    assert_eq!(s.fidelity_curve.len(), 21);
    assert!(s.fidelity_curve.iter().all(|f| (0.0..=1.0 + 1e-12).contains(f)));
    let r = evaluate(&mut env, None, &net, &sc, 5, &ec, ActionMode::Uniform, 0).unwrap();
    assert!(!r.scenarios[0].ci_degenerate);
    assert!(r.scenarios[0].ci_half_width > 0.0);
    // A scenario of another task is rejected.
    let bad = vec![Scenario::new("x", TaskKind::Xxz, None, None)];
    assert!(evaluate(&mut env, None, &net, &bad, 1, &ec, ActionMode::Uniform, 0).is_err());
    // Greedy without a policy is a contract error.
    assert!(evaluate(&mut env, None, &net, &sc, 1, &ec, ActionMode::Greedy, 0).is_err());
}

#[test]
fn catalog_contents() {
    let cat = scenario_catalog();
    let cats: Vec<_> = cat.iter().filter(|s| s.task == TaskKind::Cat).collect();
    assert_eq!(cats.len(), 4);
    assert!(cats.iter().all(|s| s.target.as_deref() == Some(&[0.5, -1.8][..])));
    assert_eq!(cat.iter().filter(|s| s.task == TaskKind::Xxz).count(), 5);
    assert_eq!(cat.iter().filter(|s| s.task == TaskKind::Ising).count(), 4);
    let ising2 = cat.iter().find(|s| s.name == "ising-2").unwrap();
    assert_eq!(ising2.target.as_deref(), Some(&[0.8, -0.8, 0.8, -0.8, 0.8][..]));
    assert_eq!(ising2.initial.as_deref(), Some(&[0.0; 5][..]));
    assert!(cat.iter().any(|s| s.task == TaskKind::ProcessOutput && s.initial.is_none() && s.target.is_none()));
    let json = serde_json::to_string(&cat).unwrap();
    let back: Vec<Scenario> = serde_json::from_str(&json).unwrap();
    assert_eq!(back, cat);
}

#[test]
fn cat_step_decays_within_episode() {
    let cfg = TaskConfig::defaults(TaskKind::Cat);
    let mut env = make_environment(&cfg).unwrap();
    env.reset(&EpisodeStart { initial: vec![-2.9, 0.0], target: CAT_TARGET.to_vec() }, 0).unwrap();
    let mut prev = env.params();
    for k in 1..=20 {
        env.step(&[0]).unwrap();
        let now = env.params();
        let beta = 0.3 * (1.0 - (k - 1) as f64 / 20.0);
        assert!((now[0] - prev[0] - beta).abs() < 1e-12, "step {k}");
        prev = now;
    }
    // The first move of a fresh episode uses the full step again.
    env.reset(&EpisodeStart { initial: vec![0.0, 0.0], target: CAT_TARGET.to_vec() }, 0).unwrap();
    env.step(&[0]).unwrap();
    assert!((env.params()[0] - 0.3).abs() < 1e-12);
}

#[test]
fn xxz_environment_snaps_and_moves() {
    let cfg = small(TaskKind::Xxz);
    let mut env = make_environment(&cfg).unwrap();
    env.reset(&EpisodeStart { initial: vec![1.5, 2.05], target: XXZ_TP.to_vec() }, 0).unwrap();
    assert!((env.params()[0] - 1.5).abs() < 1e-12 && (env.params()[1] - 2.0).abs() < 1e-12);
    env.step(&[0]).unwrap();
    assert!((env.params()[0] - 1.65).abs() < 1e-12);
    assert!(within_grid_cell(&[0.6, 0.8], &XXZ_TP));
    assert!(!within_grid_cell(&[0.75, 0.6], &XXZ_TP));
    assert!(env.step(&[8]).is_err());
    // The target is never drawn as a training start.
    let mut rng = rng_from_seed(3);
    for _ in 0..200 {
        let s = env.sample_start(&mut rng);
        assert_ne!(s.initial, s.target);
    }
}

#[test]
fn ising_environment_moves_every_coupling() {
    let cfg = small(TaskKind::Ising);
    let mut env = make_environment(&cfg).unwrap();
    env.reset(&EpisodeStart { initial: vec![0.0; 3], target: vec![0.8; 3] }, 0).unwrap();
    env.step(&[2, 1, 0]).unwrap();
    let p = env.params();
    assert!((p[0] - 0.1).abs() < 1e-12 && p[1] == 0.0 && (p[2] + 0.1).abs() < 1e-12);
    let s = env.current_state().unwrap();
    let want = crate::qcore::ground_state(&crate::spin_env::build_ising_hamiltonian(&crate::spin_env::IsingParams { couplings: p }).unwrap(), 0).unwrap().state;
    assert!((crate::qcore::fidelity(&s, &want).unwrap() - 1.0).abs() < 1e-10);
    assert!(env.step(&[3, 0, 0]).is_err());
}

#[test]
fn process_output_is_kerr_of_coherent_input() {
    let cfg = TaskConfig::defaults(TaskKind::ProcessOutput);
    let mut env = make_environment(&cfg).unwrap();
    env.reset(&EpisodeStart { initial: vec![1.0, 0.0], target: vec![2.0, 1.0] }, 0).unwrap();
    env.step(&[0]).unwrap();
    let p = env.params();
    assert!((p[0] - 1.09).abs() < 1e-12 && (p[1] - 0.06 * std::f64::consts::PI).abs() < 1e-12);
    let want = crate::cv_env::kerr_gate(
        &crate::cv_env::coherent_state(num_complex::Complex64::from_polar(1.09, 0.06 * std::f64::consts::PI), 60).unwrap(),
    );
    assert!((crate::qcore::fidelity(&env.current_state().unwrap(), &want).unwrap() - 1.0).abs() < 1e-10);
    // Unitary process: output fidelity equals the coherent-input overlap.
    let a = num_complex::Complex64::from_polar(1.09, 0.06 * std::f64::consts::PI);
    let b = num_complex::Complex64::from_polar(2.0, 1.0);
    assert!((env.fidelity().unwrap() - (-(a - b).norm_sqr()).exp()).abs() < 1e-9);
}

#[test]
fn measurement_policy_controls_resampling() {
    let start = EpisodeStart { initial: vec![0.5, 0.5], target: CAT_TARGET.to_vec() };
    for (policy, changes) in [(MeasurementPolicy::PerEpisode, false), (MeasurementPolicy::PerStep, true)] {
        let cfg = TaskConfig { measurement_policy: policy, ..TaskConfig::defaults(TaskKind::Cat) };
        let net = net_for(&cfg, 8);
        let ec = cfg.episode_config(32);
        let mut env = make_environment(&cfg).unwrap();
        let mut rep = Representer::new(&net, false);
        let mut ep = EpisodeRunner::start(&mut env, &mut rep, &ec, start.clone(), 1, false).unwrap();
        let before = env.measurement_specs().to_vec();
        ep.advance(&mut env, &mut rep, &ec, &[0]).unwrap();
        assert_eq!(env.measurement_specs() != before.as_slice(), changes);
    }
}

#[test]
fn noise_depends_on_seed_only_when_enabled() {
    let start = EpisodeStart { initial: vec![0.5, 0.5], target: CAT_TARGET.to_vec() };
    let mut clean = make_environment(&TaskConfig::defaults(TaskKind::Cat)).unwrap();
    clean.reset(&start, 0).unwrap();
    assert_eq!(clean.measure(1).unwrap(), clean.measure(2).unwrap());
    let mut noisy = make_environment(&TaskConfig { noise_sigma2: 0.1, ..TaskConfig::defaults(TaskKind::Cat) }).unwrap();
    noisy.reset(&start, 0).unwrap();
    assert_eq!(noisy.measure(1).unwrap(), noisy.measure(1).unwrap());
    assert_ne!(noisy.measure(1).unwrap(), noisy.measure(2).unwrap());
    // Targets are always exact.
    assert_eq!(noisy.measure_target().unwrap(), clean.measure_target().unwrap());
}

#[test]
fn embedding_cache_is_transparent() {
    let cfg = small(TaskKind::Xxz);
    let net = net_for(&cfg, 9);
    let mut env = make_environment(&cfg).unwrap();
    env.reset(&EpisodeStart { initial: XXZ_SB.to_vec(), target: XXZ_TP.to_vec() }, 4).unwrap();
    let pairs = env.measure(0).unwrap();
    let mut cached = Representer::new(&net, true);
    let a = cached.represent(&pairs).unwrap();
    let b = cached.represent(&pairs).unwrap();
    let direct = net.encode(&pairs).unwrap();
    assert_eq!(a, direct);
    assert_eq!(b, direct);
}

#[test]
fn smoke_training_bookkeeping_and_determinism() {
    let cfg = TaskConfig::defaults(TaskKind::Cat);
    let net = net_for(&cfg, 10);
    let ec = cfg.episode_config(32);
    let hyper = PpoHyper { total_steps: 2048, ..PpoHyper::default() };
    let run = || {
        let mut env = make_environment(&cfg).unwrap();
        train_rgrl(&mut env, &net, &ec, &hyper, 5).unwrap()
    };
    let a = run();
    assert_eq!(a.updates.len(), 4);
    assert_eq!(a.updates.last().unwrap().env_steps, 2048);
    assert!(a.updates.iter().all(|u| u.diagnostics.kl.is_finite()));
    let b = run();
    assert_eq!(a.updates, b.updates);
    assert_eq!(a.policy, b.policy);
}

#[test]
fn restarts_keep_the_best_validation_score() {
    let cfg = TaskConfig::defaults(TaskKind::Cat);
    let net = net_for(&cfg, 10);
    let ec = cfg.episode_config(32);
    let hyper = PpoHyper { total_steps: 1024, restarts: 3, validation_episodes: 8, ..PpoHyper::default() };
    let mut env = make_environment(&cfg).unwrap();
    let out = train_rgrl(&mut env, &net, &ec, &hyper, 2).unwrap();
    assert_eq!(out.restart_scores.len(), 3);
    let best = out.restart_scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(out.restart_scores[out.selected], best);
    let again = validation_score(&mut env, &net, &ec, &out.policy, 8, 2).unwrap();
    assert_eq!(again, best);
    assert!(best <= 0.0);
    assert!(train_rgrl(&mut env, &net, &ec, &PpoHyper { restarts: 0, ..hyper.clone() }, 2).is_err());
}

#[test]
fn factored_process_actions() {
    let cfg = TaskConfig { process_actions: ProcessActionSet::Factored, ..TaskConfig::defaults(TaskKind::ProcessOutput) };
    let mut env = make_environment(&cfg).unwrap();
    assert_eq!(env.action_structure(), crate::ppo::ActionStructure::MultiDiscrete(vec![3, 3]));
    env.reset(&EpisodeStart { initial: vec![1.0, 0.5], target: vec![2.0, 0.5] }, 0).unwrap();
    env.step(&[1, 1]).unwrap();
    assert_eq!(env.params(), vec![1.0, 0.5]);
    env.step(&[2, 1]).unwrap();
    assert!((env.params()[0] - 1.09).abs() < 1e-12);
}

#[test]
fn incompatible_policy_is_rejected() {
    let cfg = TaskConfig::defaults(TaskKind::Cat);
    let net = net_for(&cfg, 11);
    let ec = cfg.episode_config(32);
    let mut env = make_environment(&cfg).unwrap();
    let wrong_dim = PolicySpec::new(40, 8, env.action_structure(), 0).unwrap();
    assert!(check_policy_compatible(&wrong_dim, &net, &env).is_err());
    let wrong_actions = PolicySpec::new(64, 8, crate::ppo::ActionStructure::Discrete(4), 0).unwrap();
    assert!(check_policy_compatible(&wrong_actions, &net, &env).is_err());
    let sc = scenario_catalog().into_iter().filter(|s| s.task == TaskKind::Cat).collect::<Vec<_>>();
    assert!(evaluate(&mut env, Some(&wrong_dim), &net, &sc, 1, &ec, ActionMode::Greedy, 0).is_err());
}

#[test]
fn invalid_task_configs_are_rejected() {
    assert!(TaskConfig { n_qubits: 5, ..TaskConfig::defaults(TaskKind::Xxz) }.validate().is_err());
    assert!(TaskConfig { target: Some(vec![1.0]), ..TaskConfig::defaults(TaskKind::Cat) }.validate().is_err());
    assert!(TaskConfig { cutoff: 30, ..TaskConfig::defaults(TaskKind::Cat) }.validate().is_err());
    assert!(TaskConfig { reward_scale: 0.0, ..TaskConfig::defaults(TaskKind::Cat) }.validate().is_err());
    for t in [TaskKind::Xxz, TaskKind::Ising, TaskKind::Cat, TaskKind::ProcessOutput] {
        TaskConfig::defaults(t).validate().unwrap();
        assert_eq!(t.as_str().parse::<TaskKind>().unwrap(), t);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn reward_nonpositive_and_scale_linear(a in prop::collection::vec(-3.0f64..3.0, 8), b in prop::collection::vec(-3.0f64..3.0, 8), c in 0.1f64..50.0) {
        let ra = Representation(a);
        let rb = Representation(b);
        let r1 = reward(&ra, &rb, c, 8).unwrap();
        let r2 = reward(&ra, &rb, 2.0 * c, 8).unwrap();
        prop_assert!(r1 <= 0.0);
        prop_assert!((r2 - 2.0 * r1).abs() <= 1e-12 * r1.abs().max(1.0));
        prop_assert_eq!(reward(&ra, &ra, c, 8).unwrap(), 0.0);
    }

    #[test]
    fn reward_scale_free_in_dimension(v in prop::collection::vec(-3.0f64..3.0, 4)) {
        // Repeating every coordinate twice doubles d and scales the norm by √2.
        let zero4 = Representation(vec![0.0; 4]);
        let zero8 = Representation(vec![0.0; 8]);
        let r4 = reward(&Representation(v.clone()), &zero4, 10.0, 4).unwrap();
        let doubled: Vec<f64> = v.iter().flat_map(|&x| [x, x]).collect();
        let r8 = reward(&Representation(doubled), &zero8, 10.0, 8).unwrap();
        prop_assert!((r4 - r8).abs() < 1e-12);
    }

    #[test]
    fn environment_steps_are_pure(seed in 0u64..1000, a in 0usize..8) {
        let cfg = TaskConfig::defaults(TaskKind::Cat);
        let mut e1 = make_environment(&cfg).unwrap();
        let mut e2 = make_environment(&cfg).unwrap();
        let start = e1.sample_start(&mut rng_from_seed(seed));
        e1.reset(&start, seed).unwrap();
        e2.reset(&start, seed).unwrap();
        e1.step(&[a]).unwrap();
        e2.step(&[a]).unwrap();
        prop_assert_eq!(e1.params(), e2.params());
        prop_assert_eq!(e1.measure(seed).unwrap(), e2.measure(seed).unwrap());
    }
}
