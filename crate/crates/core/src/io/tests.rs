use super::*;
use crate::control::{TaskConfig, TaskKind, XXZ_TP};
use crate::ppo::{actor_distribution, ActionStructure, PolicySpec};
use crate::repnet::{RepNet, RepNetConfig, RepNetMode};
use proptest::prelude::*;

#[test]
fn version_majors() {
    assert!(check_version("1.0", "x").is_ok());
    assert!(check_version("1.7", "x").is_ok());
    assert!(check_version("2.0", "x").is_err());
    assert!(check_version("one", "x").is_err());
}

#[test]
fn csv_has_header_and_lf_endings() {
    let mut t = CsvTable::new(["step", "fidelity"]);
    t.push(vec!["0".into(), fmt_f64(0.25)]).unwrap();
    t.push(vec!["1".into(), fmt_f64(1.0 / 3.0)]).unwrap();
    assert!(t.push(vec!["2".into()]).is_err());
    let bytes = t.to_bytes().unwrap();
    let text = String::from_utf8(bytes).unwrap();
    assert!(text.starts_with("step,fidelity\n"));
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().count(), 3);

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("sub/t.csv");
    t.write(&p).unwrap();
    let back = CsvTable::read(&p).unwrap();
    assert_eq!(back, t);
    assert_eq!(back.column("fidelity"), Some(1));
    let v: f64 = back.rows[1][1].parse().unwrap();
    assert_eq!(v, 1.0 / 3.0);
}

proptest! {
    #[test]
    fn fmt_f64_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        let back: f64 = fmt_f64(x).parse().unwrap();
        prop_assert_eq!(back.to_bits(), x.to_bits());
    }
}

#[test]
fn json_files_end_with_newline() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("a/b.json");
    write_json(&p, &vec![1.5, 2.0]).unwrap();
    let s = std::fs::read_to_string(&p).unwrap();
    assert!(s.ends_with('\n'));
    let v: Vec<f64> = read_json(&p).unwrap();
    assert_eq!(v, vec![1.5, 2.0]);
    assert_eq!(sha256_file(&p).unwrap(), sha256_bytes(s.as_bytes()));
    assert_eq!(sha256_bytes(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

#[test]
fn policy_file_round_trip() {
    let p = PolicySpec::new(6, 8, ActionStructure::MultiDiscrete(vec![3, 3]), 4).unwrap();
    let f = PolicyFile::new(&p, TaskKind::Ising, 3);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("policy.json");
    write_json(&path, &f).unwrap();
    let back: PolicyFile = read_json(&path).unwrap();
    assert_eq!(back, f);
    let q = back.to_policy().unwrap();
    let obs = [0.3, -0.1, 0.7, 1.2, -2.0, 0.05];
    assert_eq!(p.value(&obs).unwrap(), q.value(&obs).unwrap());
    assert_eq!(actor_distribution(&p, &obs).unwrap(), actor_distribution(&q, &obs).unwrap());
}

#[test]
fn repnet_file_round_trip() {
    let cfg = TaskConfig::defaults(TaskKind::Cat);
    let net = RepNet::new(RepNetConfig::new(RepNetMode::Generative, 32, cfg.encoding_scheme()), 9).unwrap();
    let f = RepNetFile::new(&net, TaskKind::Cat, vec![4.0, 3.5]);
    let text = serde_json::to_string(&f).unwrap();
    let back: RepNetFile = serde_json::from_str(&text).unwrap();
    let net2 = back.to_net().unwrap();
    let mut env = crate::control::make_environment(&cfg).unwrap();
    use crate::control::Environment;
    let pairs = env.measure_target().unwrap();
    assert_eq!(net.encode(&pairs).unwrap(), net2.encode(&pairs).unwrap());
}

#[test]
fn future_major_is_rejected() {
    let p = PolicySpec::new(4, 4, ActionStructure::Discrete(4), 1).unwrap();
    let mut f = PolicyFile::new(&p, TaskKind::ProcessOutput, 2);
    f.format_version = "2.0".into();
    let err = f.to_policy().unwrap_err().to_string();
    assert!(err.contains("major version 2"), "{err}");
}

#[test]
fn corrupt_layer_sizes_are_rejected() {
    let p = PolicySpec::new(4, 4, ActionStructure::Discrete(4), 1).unwrap();
    let mut f = MlpFile::from_mlp(&p.actor);
    f.layers[0].bias.pop();
    assert!(f.to_mlp().is_err());
}

#[test]
fn manifest_detects_stale_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let art = dir.path().join("policy.json");
    std::fs::write(&art, "{}\n").unwrap();
    let mut m = Manifest::new("train-agent", 7, sha256_bytes(b"cfg"));
    m.outputs.push(ArtifactRef::of(&art).unwrap());
    let mpath = Manifest::path_for(&art);
    assert!(mpath.to_string_lossy().ends_with("policy.json.manifest.json"));
    m.write(&mpath).unwrap();
    assert_eq!(Manifest::read(&mpath).unwrap(), m);
    assert_eq!(Manifest::verify_artifact(&art).unwrap().sha256, m.outputs[0].sha256);
    std::fs::write(&art, "{\"x\": 1}\n").unwrap();
    let err = Manifest::verify_artifact(&art).unwrap_err().to_string();
    assert!(err.contains("stale"), "{err}");
    std::fs::remove_file(&mpath).unwrap();
    assert!(Manifest::verify_artifact(&art).is_err());
}

#[test]
fn config_defaults_and_presets() {
    let c = RunConfig::defaults(TaskKind::Xxz);
    assert_eq!(c.ppo.total_steps, 50_000);
    assert_eq!(c.ppo.n_updates(), 97);
    assert_eq!(c.task.target.as_deref(), Some(&XXZ_TP[..]));
    let s = RunConfig::from_toml_str("task.kind = \"xxz\"", Some(Preset::Smoke)).unwrap();
    assert_eq!(s.ppo.total_steps, 2048);
    assert_eq!(s.ppo.n_updates(), 4);
    // File keys win over the preset.
    let s = RunConfig::from_toml_str("[ppo]\ntotal_steps = 4096\n", Some(Preset::Smoke)).unwrap();
    assert_eq!(s.ppo.total_steps, 4096);
    assert_eq!(s.task.task, TaskKind::Cat);
    assert!("medium".parse::<Preset>().is_err());
}

#[test]
fn config_rejects_bad_values() {
    assert!(RunConfig::from_toml_str("repnet.d = 48", None).is_err());
    assert!(RunConfig::from_toml_str("repnet.mode = \"property\"", None).is_err());
    assert!(RunConfig::from_toml_str("task.kind = \"qutrit\"", None).is_err());
    assert!(RunConfig::from_toml_str("ppo.minibatch = 0", None).is_err());
    assert!(RunConfig::from_toml_str("ppo = 3", None).is_err());
}

#[test]
fn flat_toml_round_trips() {
    for task in [TaskKind::Xxz, TaskKind::Ising, TaskKind::Cat, TaskKind::ProcessOutput] {
        let mut c = RunConfig::defaults(task);
        c.seed = 11;
        c.eval.scenarios = vec!["a".into()];
        let text = c.to_flat_toml().unwrap();
        assert!(text.lines().all(|l| l.contains(" = ")));
        let back = RunConfig::from_toml_str(&text, None).unwrap();
        assert_eq!(back, c);
    }
}

#[test]
fn xxz_dataset_covers_the_grid() {
    let task = TaskConfig { n_qubits: 4, ..TaskConfig::defaults(TaskKind::Xxz) };
    let opts = DatasetOptions { measurements_per_state: 5, ..DatasetOptions::defaults(TaskKind::Xxz) };
    let ds = generate_dataset(&task, &opts, 3).unwrap();
    assert_eq!(ds.records.len(), 441);
    assert!(ds.records.iter().all(|r| r.measurements.len() == 5 && r.label.is_some()));
    let first = &ds.records[0].params;
    assert_eq!(first, &vec![0.0, 0.0]);
    ds.validate().unwrap();
}

#[test]
fn product_states_have_zero_label() {
    // All couplings zero: the ground state is |+⟩^⊗L.
    let task = TaskConfig::defaults(TaskKind::Ising);
    let opts = DatasetOptions { n_states: 3, measurements_per_state: 4, labels: true };
    let ds = generate_dataset(&task, &opts, 0).unwrap();
    assert!(ds.records[0].params.iter().all(|&j| j == 0.0));
    assert!(ds.records[0].label.unwrap().abs() < 1e-9);
    assert_eq!(ds.records.len(), 3);
}

#[test]
fn dataset_files_are_byte_identical() {
    let task = TaskConfig::defaults(TaskKind::Cat);
    let opts = DatasetOptions { n_states: 5, measurements_per_state: 4, labels: false };
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    write_json(&a, &generate_dataset(&task, &opts, 8).unwrap()).unwrap();
    write_json(&b, &generate_dataset(&task, &opts, 8).unwrap()).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let back: Dataset = read_json(&a).unwrap();
    assert_eq!(back, generate_dataset(&task, &opts, 8).unwrap());
    assert_eq!(back.training_records().unwrap().len(), 5);
    assert_ne!(generate_dataset(&task, &opts, 9).unwrap().records, back.records);
}

#[test]
fn cv_datasets_need_measurements() {
    let task = TaskConfig::defaults(TaskKind::ProcessOutput);
    let opts = DatasetOptions { n_states: 2, measurements_per_state: 0, labels: false };
    assert!(generate_dataset(&task, &opts, 0).is_err());
}

#[test]
fn scenario_catalog_survives_toml() {
    #[derive(serde::Serialize, serde::Deserialize, PartialEq, Debug)]
    struct Wrap {
        scenario: Vec<crate::control::Scenario>,
    }
    let w = Wrap { scenario: crate::control::scenario_catalog() };
    let text = toml::to_string(&w).unwrap();
    let back: Wrap = toml::from_str(&text).unwrap();
    assert_eq!(back, w);
}
