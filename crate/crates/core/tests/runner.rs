mod common;

use std::sync::Arc;

use common::shipped_scenarios;
use multisim::kernel::{
    Composite, Message, ModelNode, ObservationRecord, RunLog, SimClock, Snapshot, Submodel,
};
use multisim::models::{BehaviorRegistry, ModelError, SirParams};
use multisim::multiscale::{EpidemicRegion, RegionConfig, Strategy, SwitchPolicy};
use multisim::orchestration::RunConfig;
use multisim::runner::{cli_main, execute, run_scenario, Config, ExecutorMode, Trajectory};
use num_rational::Ratio;

/// A region that raises when stepped from `fail_at`.
struct Faulty {
    inner: EpidemicRegion<f64>,
    fail_at: Option<u64>,
}

impl Submodel for Faulty {
    fn id(&self) -> &str {
        self.inner.id()
    }
    fn step_ticks(&self) -> u64 {
        self.inner.step_ticks()
    }
    fn initialize(&mut self, seed: u64) -> multisim::Result<()> {
        self.inner.initialize(seed)
    }
    fn step(&mut self, from: u64, len: u64, inbox: &[Message], log: &mut RunLog) -> multisim::Result<Vec<Message>> {
        if self.fail_at == Some(from) {
            return Err(ModelError::Injected("region fault".into()).into());
        }
        self.inner.step(from, len, inbox, log)
    }
    fn snapshot(&self, tick: u64) -> multisim::Result<Snapshot> {
        self.inner.snapshot(tick)
    }
    fn restore(&mut self, snapshot: &Snapshot) -> multisim::Result<()> {
        self.inner.restore(snapshot)
    }
    fn observe(&self, tick: u64) -> ObservationRecord {
        self.inner.observe(tick)
    }
}

const IDS: [&str; 4] = ["r0", "r1", "r2", "r3"];

fn regions(fail: Option<(&str, u64)>) -> ModelNode {
    let reg = Arc::new(BehaviorRegistry::standard());
    let strategies = [Strategy::Zoom, Strategy::Puppeteer, Strategy::View, Strategy::Cohabitation];
    let children = IDS
        .iter()
        .zip(strategies)
        .map(|(id, strategy)| {
            let config = RegionConfig {
                id: (*id).into(),
                step_ticks: 2,
                h: 0.5,
                params: SirParams::new(0.5, 0.1, 600).unwrap(),
                i0: 15,
                policy: SwitchPolicy::new(0.06, 0.03, 4, strategy).unwrap(),
                coupling_weight: 0.0,
                cohabit_share: 0.2,
            };
            let fail_at = fail.and_then(|(f, t)| (f == *id).then_some(t));
            ModelNode::leaf(Faulty {
                inner: EpidemicRegion::new(config, Arc::clone(&reg)),
                fail_at,
            })
        })
        .collect();
    ModelNode::Composite(Composite::new("root", 10, children, vec![]).unwrap())
}

fn clock() -> SimClock {
    SimClock::new(Ratio::new(1, 4)).unwrap()
}

fn run(mode: ExecutorMode, fail: Option<(&str, u64)>) -> multisim::Result<Trajectory> {
    execute(regions(fail), clock(), &RunConfig::new(5, 300, 10), mode)
}

#[test]
fn independent_regions_match_across_executors() {
    let seq = run(ExecutorMode::Sequential, None).unwrap();
    for units in [1, 2, 4] {
        let par = run(ExecutorMode::Parallel(units), None).unwrap();
        assert_eq!(par.digest(), seq.digest(), "parallel({units})");
    }
    assert_eq!(seq.len(), 4 * 31);
}

#[test]
fn parallel_failure_names_the_region_and_tick() {
    let err = run(ExecutorMode::Parallel(4), Some(("r2", 126))).unwrap_err();
    assert_eq!(err.attribution(), Some(("r2", 126)));
    let text = err.to_string();
    assert!(text.contains("r2") && text.contains("126"), "{text}");
}

#[test]
fn shipped_scenarios_are_identical_across_modes() {
    let mut seen = 0;
    for path in shipped_scenarios() {
        let cfg = Config::load(&path).unwrap();
        if cfg.clock.end_tick > 2000 {
            continue;
        }
        seen += 1;
        let seq = run_scenario(&cfg, 3, ExecutorMode::Sequential).unwrap();
        let par = run_scenario(&cfg, 3, ExecutorMode::Parallel(4)).unwrap();
        assert_eq!(seq.trajectory.to_csv(), par.trajectory.to_csv(), "{}", path.display());
        assert_eq!(
            seq.log.render(Default::default()),
            par.log.render(Default::default())
        );
    }
    assert!(seen >= 2);
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli_main(std::iter::once("multisim").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn cli_validates_shipped_configs() {
    for path in shipped_scenarios() {
        let (code, _, err) = cli(&["validate", "--config", path.to_str().unwrap()]);
        assert_eq!(code, 0, "{}: {err}", path.display());
    }
}

#[test]
fn cli_without_config_prints_usage() {
    let (code, _, err) = cli(&["run"]);
    assert_eq!(code, 1);
    assert!(err.contains("--config") && err.to_lowercase().contains("usage"), "{err}");
    let (code, _, _) = cli(&["validate", "--config", "/nonexistent/scenario.toml"]);
    assert_eq!(code, 1);
}

#[test]
fn cli_runs_are_reproducible() {
    let config = common::scenarios_dir().join("director_pool.toml");
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let (code, _, err) = cli(&[
            "run",
            "--config",
            config.to_str().unwrap(),
            "--seed",
            "21",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{err}");
        outputs.push(std::fs::read(out.join("trajectory.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert!(!outputs[0].is_empty());

    let traj = dir.path().join("a").join("trajectory.csv");
    let (code, stdout, _) = cli(&["replay", "--trajectory", traj.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(!stdout.is_empty());
}

#[test]
fn config_errors_are_reported() {
    let bad = r#"
[clock]
quantum = "1/10"
end_tick = 15
checkpoint_interval = 10
[run]
seed = 1
[params]
beta = 0.3
gamma = 0.1
n_total = 100
i0 = 1
[switch]
theta_up = 0.05
theta_down = 0.02
dwell_ticks = 0
strategy = "zoom"
[output]
dir = "out"
[tree]
[[tree.participants]]
kind = "region"
id = "a"
step = 1
"#;
    let parsed = Config::from_toml(bad);
    assert!(parsed.is_err() || parsed.unwrap().validate().is_err());
    let unknown = bad.replace("kind = \"region\"", "kind = \"volcano\"");
    let parsed = Config::from_toml(&unknown);
    assert!(parsed.map(|c| c.build(1, ExecutorMode::Sequential).is_err()).unwrap_or(true));
}
