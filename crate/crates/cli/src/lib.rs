//! The `rgrl` pipeline: `gen-data → train-repnet → train-agent → eval`, plus
//! `export-embedding`. Every command reads its inputs from and writes its
//! outputs to one run directory; each output has a `<file>.manifest.json`
//! recording seeds, the configuration digest and upstream digests.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use rgrl_core::control::{
    evaluate, make_environment, scenario_catalog, EpisodeStart, train_rgrl, within_grid_cell, ActionMode, ControlEnv, Environment,
    EvalReport, Scenario, ScenarioReport, TaskKind, Trajectory, UpdateRecord,
};
use rgrl_core::cv_env::{wigner_function, WignerGrid};
use rgrl_core::io::{
    fmt_f64, generate_dataset, read_json, sha256_bytes, write_json, ArtifactRef, CsvTable, Dataset, Manifest, PolicyFile,
    Preset, RepNetFile, RunConfig, FORMAT_VERSION,
};
use rgrl_core::repnet::{pca_project, train_self_supervised, train_supervised, RepNet, RepNetConfig, RepNetMode, Representation};
use rgrl_core::seed::derive_seed_str;

pub const DATASET: &str = "dataset.json";
pub const REPNET: &str = "repnet.json";
pub const REPNET_LOSS: &str = "repnet_loss.csv";
pub const POLICY: &str = "policy.json";
pub const DIAGNOSTICS: &str = "diagnostics.jsonl";
pub const EVAL_SUMMARY: &str = "eval_summary.json";
pub const EVAL_SUMMARY_CSV: &str = "eval_summary.csv";
pub const EVAL_CURVES: &str = "eval_curves.csv";
pub const EVAL_TRAJECTORIES: &str = "eval_trajectories.csv";
pub const EVAL_PCA: &str = "eval_embedding_pca.csv";
pub const EMBEDDING_PCA: &str = "embedding_pca.csv";

/// Task defaults, then `preset`, then the file, then `seed`.
pub fn load_config(path: Option<&Path>, seed: Option<u64>, preset: Option<Preset>) -> Result<RunConfig> {
    let text = match path {
        Some(p) => fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?,
        None => String::new(),
    };
    let mut cfg = RunConfig::from_toml_str(&text, preset).with_context(|| match path {
        Some(p) => format!("in config {}", p.display()),
        None => "in the default config".into(),
    })?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn config_digest(cfg: &RunConfig) -> Result<String> {
    Ok(sha256_bytes(cfg.to_flat_toml()?.as_bytes()))
}

fn manifest(cmd: &str, cfg: &RunConfig) -> Result<Manifest> {
    let mut m = Manifest::new(cmd, cfg.seed, config_digest(cfg)?);
    m.details.insert("config".into(), cfg.to_flat_toml()?.into());
    Ok(m)
}

/// Writes one manifest per output listing the same upstream set.
fn seal(m: &mut Manifest, outputs: &[PathBuf]) -> Result<()> {
    m.outputs = outputs.iter().map(|p| ArtifactRef::of(p)).collect::<rgrl_core::Result<_>>()?;
    for p in outputs {
        m.write(&Manifest::path_for(p))?;
    }
    Ok(())
}

fn require(path: &Path, what: &str) -> Result<ArtifactRef> {
    if !path.exists() {
        bail!("missing {what}: {} does not exist (run the upstream command first)", path.display());
    }
    Manifest::verify_artifact(path).with_context(|| format!("checking {what} {}", path.display()))
}

fn load_dataset(out: &Path, cfg: &RunConfig) -> Result<(Dataset, ArtifactRef)> {
    let path = out.join(DATASET);
    let r = require(&path, "dataset")?;
    let ds: Dataset = read_json(&path)?;
    ds.validate()?;
    if ds.task.task != cfg.task.task {
        bail!("dataset {} is for task {}, config asks for {}", path.display(), ds.task.task.as_str(), cfg.task.task.as_str());
    }
    Ok((ds, r))
}

fn load_repnet(out: &Path, cfg: &RunConfig) -> Result<(RepNet, ArtifactRef)> {
    let path = out.join(REPNET);
    let r = require(&path, "representation weights")?;
    let f: RepNetFile = read_json(&path)?;
    if f.task != cfg.task.task {
        bail!("{} was trained for task {}, config asks for {}", path.display(), f.task.as_str(), cfg.task.task.as_str());
    }
    let net = f.to_net()?;
    if net.d() != cfg.repnet.d {
        bail!("representation dimension mismatch: {} has d = {}, config repnet.d = {}", path.display(), net.d(), cfg.repnet.d);
    }
    Ok((net, r))
}

fn load_policy(out: &Path, cfg: &RunConfig, net: &RepNet) -> Result<(rgrl_core::ppo::PolicySpec, ArtifactRef)> {
    let path = out.join(POLICY);
    let r = require(&path, "policy weights")?;
    let f: PolicyFile = read_json(&path)?;
    if f.task != cfg.task.task || f.d != net.d() {
        bail!("{} belongs to task {} with d = {}, not task {} with d = {}", path.display(), f.task.as_str(), f.d, cfg.task.task.as_str(), net.d());
    }
    Ok((f.to_policy()?, r))
}

/// `gen-data`: exact statistics over the task's parameter family.
pub fn gen_data(cfg: &RunConfig, out: &Path) -> Result<PathBuf> {
    cfg.validate()?;
    let ds = generate_dataset(&cfg.task, &cfg.data, derive_seed_str(cfg.seed, "data"))?;
    let path = out.join(DATASET);
    write_json(&path, &ds)?;
    let mut m = manifest("gen-data", cfg)?;
    m.details.insert("records".into(), ds.records.len().into());
    m.details.insert("task".into(), cfg.task.task.as_str().into());
    seal(&mut m, std::slice::from_ref(&path))?;
    Ok(path)
}

/// Loss trace health: finite, and the mean of the last ten epochs no larger
/// than the mean of the first ten (or of each half, for short traces).
pub fn loss_is_healthy(trace: &[f64]) -> bool {
    if trace.is_empty() || trace.iter().any(|l| !l.is_finite()) {
        return false;
    }
    let w = (trace.len() / 2).clamp(1, 10);
    let head = trace[..w].iter().sum::<f64>() / w as f64;
    let tail = trace[trace.len() - w..].iter().sum::<f64>() / w as f64;
    tail <= head
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepNetOutcome {
    pub path: PathBuf,
    pub healthy: bool,
    pub final_loss: f64,
}

/// `train-repnet`: self-supervised (generative) or supervised (property)
/// representation training on the dataset.
pub fn train_repnet(cfg: &RunConfig, out: &Path) -> Result<RepNetOutcome> {
    cfg.validate()?;
    let (ds, upstream) = load_dataset(out, cfg)?;
    let records = ds.training_records()?;
    let rc = RepNetConfig::new(cfg.repnet.mode, cfg.repnet.d, ds.scheme());
    let hyper = cfg.repnet.hyper(cfg.task.noise_sigma2, derive_seed_str(cfg.seed, "repnet"));
    let run = match cfg.repnet.mode {
        RepNetMode::Generative => train_self_supervised(&records, rc, &hyper)?,
        RepNetMode::Property => train_supervised(&records, rc, &hyper)?,
    };
    let path = out.join(REPNET);
    write_json(&path, &RepNetFile::new(&run.net, cfg.task.task, run.loss_trace.clone()))?;
    let mut loss = CsvTable::new(["epoch", "loss"]);
    for (e, l) in run.loss_trace.iter().enumerate() {
        loss.push(vec![(e + 1).to_string(), fmt_f64(*l)])?;
    }
    let loss_path = out.join(REPNET_LOSS);
    loss.write(&loss_path)?;
    let healthy = loss_is_healthy(&run.loss_trace);
    let final_loss = *run.loss_trace.last().expect("at least one epoch");
    let mut m = manifest("train-repnet", cfg)?;
    m.upstream.push(upstream);
    m.details.insert("mode".into(), cfg.repnet.mode.as_str().into());
    m.details.insert("d".into(), cfg.repnet.d.into());
    m.details.insert("task".into(), cfg.task.task.as_str().into());
    m.details.insert("encoding_version".into(), rgrl_core::repnet::ENCODING_VERSION.into());
    m.details.insert("final_loss".into(), final_loss.into());
    m.details.insert("healthy".into(), healthy.into());
    seal(&mut m, &[path.clone(), loss_path])?;
    Ok(RepNetOutcome { path, healthy, final_loss })
}

/// `train-agent`: PPO-Clip against the trained representation.
pub fn train_agent(cfg: &RunConfig, out: &Path) -> Result<PathBuf> {
    cfg.validate()?;
    let (net, upstream) = load_repnet(out, cfg)?;
    let mut env = make_environment(&cfg.task)?;
    let ec = cfg.task.episode_config(net.d());
    let trained = train_rgrl(&mut env, &net, &ec, &cfg.ppo, derive_seed_str(cfg.seed, "agent"))?;
    let path = out.join(POLICY);
    write_json(&path, &PolicyFile::new(&trained.policy, cfg.task.task, net.d()))?;
    let diag_path = out.join(DIAGNOSTICS);
    write_diagnostics(&diag_path, &trained.updates)?;
    let mut m = manifest("train-agent", cfg)?;
    m.upstream.push(upstream);
    m.details.insert("updates".into(), trained.updates.len().into());
    m.details.insert("restart_scores".into(), serde_json::to_value(&trained.restart_scores)?);
    m.details.insert("selected_restart".into(), trained.selected.into());
    seal(&mut m, &[path.clone(), diag_path])?;
    Ok(path)
}

/// One JSON object per line and per update.
pub fn write_diagnostics(path: &Path, updates: &[UpdateRecord]) -> Result<()> {
    let mut s = String::new();
    for u in updates {
        s.push_str(&serde_json::to_string(u)?);
        s.push('\n');
    }
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::File::create(path)?.write_all(s.as_bytes()).with_context(|| format!("writing {}", path.display()))
}

pub fn read_diagnostics(path: &Path) -> Result<Vec<UpdateRecord>> {
    let s = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    s.lines().enumerate().map(|(i, l)| serde_json::from_str(l).with_context(|| format!("{} line {}", path.display(), i + 1))).collect()
}

/// The catalog entries selected by `eval.scenarios` (all of the task's when
/// empty).
pub fn selected_scenarios(cfg: &RunConfig) -> Result<Vec<Scenario>> {
    let all: Vec<Scenario> = scenario_catalog().into_iter().filter(|s| s.task == cfg.task.task).collect();
    if cfg.eval.scenarios.is_empty() {
        return Ok(all);
    }
    cfg.eval
        .scenarios
        .iter()
        .map(|n| all.iter().find(|s| &s.name == n).cloned().with_context(|| format!("no scenario {n:?} for task {}", cfg.task.task.as_str())))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub name: String,
    pub n_experiments: usize,
    pub mean_fidelity: f64,
    pub ci_half_width: f64,
    pub ci_degenerate: bool,
    pub mean_initial_fidelity: f64,
    /// Fraction of episodes ending within one grid step of the target (XXZ).
    pub within_cell_fraction: Option<f64>,
    pub fidelity_curve: Vec<f64>,
    pub reward_curve: Vec<f64>,
}

impl ScenarioSummary {
    fn of(s: &ScenarioReport, task: TaskKind) -> Self {
        let within_cell_fraction = (task == TaskKind::Xxz).then(|| {
            let hits = s
                .trajectories
                .iter()
                .filter(|t| t.steps.iter().any(|st| within_grid_cell(&st.params, &target_of(t))))
                .count();
            hits as f64 / s.trajectories.len() as f64
        });
        Self {
            name: s.name.clone(),
            n_experiments: s.n_experiments,
            mean_fidelity: s.mean_fidelity,
            ci_half_width: s.ci_half_width,
            ci_degenerate: s.ci_degenerate,
            mean_initial_fidelity: s.mean_initial_fidelity,
            within_cell_fraction,
            fidelity_curve: s.fidelity_curve.clone(),
            reward_curve: s.reward_curve.clone(),
        }
    }
}

fn target_of(t: &Trajectory) -> Vec<f64> {
    t.start.target.clone()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub format_version: String,
    pub task: TaskKind,
    pub mode: ActionMode,
    pub horizon: usize,
    pub scenarios: Vec<ScenarioSummary>,
    /// The same scenarios under a uniformly random policy.
    pub baseline: Option<Vec<ScenarioSummary>>,
}

impl EvalSummary {
    pub fn scenario(&self, name: &str) -> Option<&ScenarioSummary> {
        self.scenarios.iter().find(|s| s.name == name)
    }

    pub fn baseline_scenario(&self, name: &str) -> Option<&ScenarioSummary> {
        self.baseline.as_ref()?.iter().find(|s| s.name == name)
    }
}

#[derive(Debug, Clone)]
pub struct EvalOutcome {
    pub summary: EvalSummary,
    pub report: EvalReport,
    pub baseline: Option<EvalReport>,
}

/// `eval`: greedy (or configured-mode) episodes on the catalog scenarios,
/// optionally against a uniform-random baseline.
pub fn eval(cfg: &RunConfig, out: &Path) -> Result<EvalOutcome> {
    cfg.validate()?;
    let (net, rep_ref) = load_repnet(out, cfg)?;
    let (policy, pol_ref) = load_policy(out, cfg, &net)?;
    let scenarios = selected_scenarios(cfg)?;
    let mut env = make_environment(&cfg.task)?;
    let ec = cfg.task.episode_config(net.d());
    let seed = derive_seed_str(cfg.seed, "eval");
    let report = evaluate(&mut env, Some(&policy), &net, &scenarios, cfg.eval.n_experiments, &ec, cfg.eval.mode, seed)?;
    let baseline = if cfg.eval.baseline {
        Some(evaluate(&mut env, None, &net, &scenarios, cfg.eval.n_experiments, &ec, ActionMode::Uniform, seed)?)
    } else {
        None
    };
    let task = cfg.task.task;
    let summary = EvalSummary {
        format_version: FORMAT_VERSION.into(),
        task,
        mode: report.mode,
        horizon: report.horizon,
        scenarios: report.scenarios.iter().map(|s| ScenarioSummary::of(s, task)).collect(),
        baseline: baseline.as_ref().map(|b| b.scenarios.iter().map(|s| ScenarioSummary::of(s, task)).collect()),
    };

    let mut outputs = Vec::new();
    let p = out.join(EVAL_SUMMARY);
    write_json(&p, &summary)?;
    outputs.push(p);

    let mut table = CsvTable::new(["policy", "scenario", "n_experiments", "mean_fidelity", "ci_half_width", "ci_degenerate", "mean_initial_fidelity", "within_cell_fraction"]);
    let mut curves = CsvTable::new(["policy", "scenario", "step", "mean_fidelity", "mean_reward"]);
    let n_params = cfg.task.n_params();
    let mut header = vec!["policy".to_string(), "scenario".into(), "episode".into(), "step".into()];
    header.extend((0..n_params).map(|i| format!("param_{i}")));
    header.extend(["action", "reward", "distance", "fidelity"].map(String::from));
    let mut traj = CsvTable::new(header);
    let labelled = std::iter::once(("trained", &summary.scenarios, &report)).chain(
        summary.baseline.as_ref().zip(baseline.as_ref()).map(|(s, r)| ("uniform", s, r)),
    );
    for (label, sums, rep) in labelled {
        for (s, r) in sums.iter().zip(&rep.scenarios) {
            table.push(vec![
                label.into(),
                s.name.clone(),
                s.n_experiments.to_string(),
                fmt_f64(s.mean_fidelity),
                fmt_f64(s.ci_half_width),
                s.ci_degenerate.to_string(),
                fmt_f64(s.mean_initial_fidelity),
                s.within_cell_fraction.map(fmt_f64).unwrap_or_default(),
            ])?;
            for (k, (f, rw)) in s.fidelity_curve.iter().zip(&s.reward_curve).enumerate() {
                curves.push(vec![label.into(), s.name.clone(), k.to_string(), fmt_f64(*f), fmt_f64(*rw)])?;
            }
            for (e, t) in r.trajectories.iter().enumerate() {
                for st in &t.steps {
                    let mut row = vec![label.to_string(), s.name.clone(), e.to_string(), st.step.to_string()];
                    row.extend(st.params.iter().map(|v| fmt_f64(*v)));
                    let action = st.action.as_ref().map(|a| a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")).unwrap_or_default();
                    row.extend([action, fmt_f64(st.reward), fmt_f64(st.distance), fmt_f64(st.fidelity)]);
                    traj.push(row)?;
                }
            }
        }
    }
    for (name, t) in [(EVAL_SUMMARY_CSV, &table), (EVAL_CURVES, &curves), (EVAL_TRAJECTORIES, &traj)] {
        let p = out.join(name);
        t.write(&p)?;
        outputs.push(p);
    }
    if cfg.eval.pca {
        let p = out.join(EVAL_PCA);
        trajectory_pca(&mut env, &net, &report)?.write(&p)?;
        outputs.push(p);
    }
    if cfg.eval.wigner && matches!(task, TaskKind::Cat | TaskKind::ProcessOutput) {
        outputs.extend(wigner_exports(&mut env, &report, out)?);
    }
    let mut m = manifest("eval", cfg)?;
    m.upstream = vec![rep_ref, pol_ref];
    seal(&mut m, &outputs)?;
    Ok(EvalOutcome { summary, report, baseline })
}

/// Noiseless representation of parameters `p` under the run's measurement set.
fn represent_params(env: &mut ControlEnv, net: &RepNet, p: &[f64]) -> Result<Representation> {
    env.reset(&EpisodeStart { initial: p.to_vec(), target: p.to_vec() }, 0)?;
    Ok(net.encode(&env.measure_target()?)?)
}

/// PCA of the first trajectory of each scenario together with its target.
fn trajectory_pca(env: &mut ControlEnv, net: &RepNet, report: &EvalReport) -> Result<CsvTable> {
    let mut reps = Vec::new();
    let mut keys = Vec::new();
    for s in &report.scenarios {
        let t = &s.trajectories[0];
        for st in &t.steps {
            reps.push(represent_params(env, net, &st.params)?);
            keys.push((s.name.clone(), "trajectory", st.step.to_string()));
        }
        reps.push(represent_params(env, net, &t.start.target)?);
        keys.push((s.name.clone(), "target", String::new()));
    }
    let mut table = CsvTable::new(["scenario", "kind", "step", "pc1", "pc2"]);
    if reps.len() < 3 {
        return Ok(table);
    }
    for ((name, kind, step), xy) in keys.into_iter().zip(pca_project(&reps)?) {
        table.push(vec![name, kind.into(), step, fmt_f64(xy[0]), fmt_f64(xy[1])])?;
    }
    Ok(table)
}

/// Wigner grids of the initial and final state of each scenario's first
/// experiment, in long format.
fn wigner_exports(env: &mut ControlEnv, report: &EvalReport, out: &Path) -> Result<Vec<PathBuf>> {
    let grid = WignerGrid::square(3.5, 71);
    let mut paths = Vec::new();
    for s in &report.scenarios {
        let t = &s.trajectories[0];
        let last = t.steps.last().expect("step 0 recorded");
        for (tag, p) in [("initial", &t.steps[0].params), ("final", &last.params), ("target", &t.start.target)] {
            let w = wigner_function(&env.state_for(p)?, &grid)?;
            let mut table = CsvTable::new(["x", "p", "w"]);
            for (i, x) in grid.xs.iter().enumerate() {
                for (j, q) in grid.ps.iter().enumerate() {
                    table.push(vec![fmt_f64(*x), fmt_f64(*q), fmt_f64(w[(i, j)])])?;
                }
            }
            let path = out.join(format!("wigner_{}_{tag}.csv", s.name));
            table.write(&path)?;
            paths.push(path);
        }
    }
    Ok(paths)
}

/// `export-embedding`: 2-D PCA of the representation of every dataset record.
pub fn export_embedding(cfg: &RunConfig, out: &Path) -> Result<PathBuf> {
    cfg.validate()?;
    let (ds, data_ref) = load_dataset(out, cfg)?;
    let (net, rep_ref) = load_repnet(out, cfg)?;
    let records = ds.training_records()?;
    let reps = records.iter().map(|r| net.encode(&r.pairs)).collect::<rgrl_core::Result<Vec<_>>>()?;
    let n_params = ds.records.first().map_or(0, |r| r.params.len());
    let mut header = vec!["record".to_string()];
    header.extend((0..n_params).map(|i| format!("param_{i}")));
    header.extend(["label", "pc1", "pc2"].map(String::from));
    let mut table = CsvTable::new(header);
    if reps.len() >= 3 {
        for (i, (rec, xy)) in ds.records.iter().zip(pca_project(&reps)?).enumerate() {
            let mut row = vec![i.to_string()];
            row.extend(rec.params.iter().map(|v| fmt_f64(*v)));
            row.push(rec.label.map(fmt_f64).unwrap_or_default());
            row.extend([fmt_f64(xy[0]), fmt_f64(xy[1])]);
            table.push(row)?;
        }
    }
    let path = out.join(EMBEDDING_PCA);
    table.write(&path)?;
    let mut m = manifest("export-embedding", cfg)?;
    m.upstream = vec![data_ref, rep_ref];
    seal(&mut m, std::slice::from_ref(&path))?;
    Ok(path)
}
