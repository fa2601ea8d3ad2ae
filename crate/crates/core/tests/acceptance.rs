//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::thread;
use std::time::{Duration, Instant};

use common::{l1_oracle, shipped_scenarios};
use multisim::exchange::{apportion, promise};
use multisim::kernel::{EventKind, LogLevel, RunLog};
use multisim::models::{
    abm_sir_step, decay_step, ebm_sir_step, set_behavior, BehaviorRegistry, DecayState, EbmState,
    SirParams, CAUTIOUS,
};
use multisim::multiscale::{aggregate, disaggregate, Compartment, MicroPopulation, Strategy, LABELS};
use multisim::orchestration::{wait, Controller, Worker, WorkerPool};
use multisim::rng::StreamRng;
use multisim::runner::{run_scenario, Config, ExecutorMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn scenario(name: &str) -> Config {
    Config::load(common::scenarios_dir().join(name)).expect("shipped scenario")
}

fn conservation() -> Outcome {
    let cfg = scenario("hybrid_epidemic.toml");
    let started = Instant::now();
    let out = run_scenario(&cfg, cfg.run.seed, ExecutorMode::Sequential).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    let n: u64 = cfg
        .tree
        .participants
        .iter()
        .map(|p| p.n.unwrap_or(cfg.params.n_total))
        .sum();
    let mut totals: BTreeMap<u64, i64> = BTreeMap::new();
    for r in out.trajectory.records() {
        let sum = r.int_sum(&LABELS).ok_or(format!("non-integer record at {}", r.tick))?;
        *totals.entry(r.tick).or_default() += sum;
    }
    let expected_checkpoints = cfg.clock.end_tick / cfg.clock.checkpoint_interval + 1;
    let bad = totals.values().filter(|&&t| t != n as i64).count();
    let switches = out.log.count(EventKind::Switch);
    ensure(
        n == 10_000
            && cfg.clock.end_tick == 10_000
            && totals.len() as u64 == expected_checkpoints
            && bad == 0
            && switches >= 6
            && elapsed <= Duration::from_secs(30),
        format!(
            "N={n}, {} checkpoints, {bad} off-total, {switches} switches, {:.2}s",
            totals.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn grid_vectors(len: usize, out: &mut Vec<Vec<u64>>, cur: &mut Vec<u64>) {
    if cur.len() == len {
        out.push(cur.clone());
        return;
    }
    for k in 0..=10 {
        cur.push(k);
        grid_vectors(len, out, cur);
        cur.pop();
    }
}

fn apportionment() -> Outcome {
    let started = Instant::now();
    let mut cases = 0u64;
    let mut mismatches = Vec::new();
    for len in 1..=4 {
        let mut vectors = Vec::new();
        grid_vectors(len, &mut vectors, &mut Vec::new());
        for tenths in &vectors {
            let weights: Vec<f64> = tenths.iter().map(|&k| k as f64 * 0.1).collect();
            for total in 0..=10u64 {
                cases += 1;
                let got = apportion(&weights, total).ok();
                let want = l1_oracle(tenths, total);
                if got != want && mismatches.len() < 3 {
                    mismatches.push(format!("{weights:?}/{total}: {got:?} vs {want:?}"));
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut leaks = 0;
    for _ in 0..1000 {
        let len = rng.random_range(1..=12);
        let weights: Vec<f64> = (0..len).map(|_| rng.random_range(0.0..1000.0)).collect();
        let total = rng.random_range(0..100_000u64);
        match apportion(&weights, total) {
            Ok(v) if v.iter().sum::<u64>() == total => {}
            _ => leaks += 1,
        }
    }
    let elapsed = started.elapsed();
    ensure(
        mismatches.is_empty() && leaks == 0 && elapsed <= Duration::from_secs(10),
        format!(
            "{cases} grid cases, {} mismatches {mismatches:?}, 1000 random with {leaks} leaks, {:.2}s",
            mismatches.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn decay_terminal(h: f64) -> f64 {
    let steps = (10.0 / h).round() as usize;
    let mut s = DecayState { y: 1.0f64, rate: 1.0 };
    for _ in 0..steps {
        s = decay_step(s, h).unwrap();
    }
    s.y
}

fn solver_order() -> Outcome {
    let started = Instant::now();
    let exact = (-10.0f64).exp();
    let errors: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&h| (decay_terminal(h) - exact).abs())
        .collect();
    let orders: Vec<f64> = errors.windows(2).map(|e| (e[0] / e[1]).log2()).collect();
    let terminal = (decay_terminal(0.01) - exact).abs() / exact;
    let elapsed = started.elapsed();
    ensure(
        orders.iter().all(|p| (3.9..=4.1).contains(p))
            && terminal <= 1e-8
            && elapsed <= Duration::from_secs(1),
        format!(
            "orders {:.4}/{:.4}, relative error at t=10 (h=0.01) {terminal:.2e}, {:.3}s",
            orders[0],
            orders[1],
            elapsed.as_secs_f64()
        ),
    )
}

fn abm_peak(seed: u64, n: u64, i0: u64, params: &SirParams<f64>, h: f64) -> f64 {
    let reg = BehaviorRegistry::standard();
    let mut pop = MicroPopulation::from_counts("peak", [n - i0, i0, 0]);
    let mut rng = StreamRng::new(seed, 0);
    let mut peak = i0;
    while pop.counts()[1] > 0 {
        let f = pop.infected_fraction();
        abm_sir_step(&mut pop, params, h, f, &mut rng, &reg).unwrap();
        peak = peak.max(pop.counts()[1]);
    }
    peak as f64 / n as f64
}

fn statistical_consistency() -> Outcome {
    let started = Instant::now();
    let (n, i0, h) = (10_000u64, 10u64, 0.1);
    let params = SirParams::new(0.3, 0.1, n).unwrap();
    let mut ebm = EbmState::new((n - i0) as f64, i0 as f64, 0.0);
    let mut ebm_peak = ebm.i;
    for _ in 0..40_000 {
        ebm = ebm_sir_step(ebm, &params, 0.01).unwrap();
        ebm_peak = ebm_peak.max(ebm.i);
    }
    let ebm_peak = ebm_peak / n as f64;
    // closed-form peak of the SIR system
    let r0 = 0.3 / 0.1;
    let s0 = (n - i0) as f64 / n as f64;
    let analytic = i0 as f64 / n as f64 + s0 - (1.0 + (r0 * s0).ln()) / r0;

    let units = thread::available_parallelism().map_or(4, |u| u.get());
    let seeds: Vec<u64> = (0..200).collect();
    let peaks: Vec<f64> = thread::scope(|s| {
        let handles: Vec<_> = seeds
            .chunks(200usize.div_ceil(units))
            .map(|chunk| s.spawn(|| chunk.iter().map(|&sd| abm_peak(sd, n, i0, &params, h)).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|hd| hd.join().unwrap()).collect()
    });
    let mean = peaks.iter().sum::<f64>() / peaks.len() as f64;
    let rel = (mean - ebm_peak).abs() / ebm_peak;
    let elapsed = started.elapsed();
    ensure(
        rel <= 0.05 && (ebm_peak - analytic).abs() < 1e-6 && elapsed <= Duration::from_secs(120),
        format!(
            "ABM mean peak {mean:.5} over {} seeds, EBM peak {ebm_peak:.5} (closed form {analytic:.5}), relative gap {:.2}%, {:.2}s",
            peaks.len(),
            rel * 100.0,
            elapsed.as_secs_f64()
        ),
    )
}

fn executor_equivalence() -> Outcome {
    let started = Instant::now();
    let mut compared = 0;
    let mut diffs = Vec::new();
    for path in shipped_scenarios() {
        let cfg = Config::load(&path).map_err(|e| e.to_string())?;
        for seed in 1..=10u64 {
            let seq = run_scenario(&cfg, seed, ExecutorMode::Sequential).map_err(|e| e.to_string())?;
            let reference = seq.trajectory.to_csv();
            for units in [2, 4] {
                let par = run_scenario(&cfg, seed, ExecutorMode::Parallel(units)).map_err(|e| e.to_string())?;
                compared += 1;
                if par.trajectory.to_csv() != reference {
                    diffs.push(format!("{} seed {seed} parallel({units})", path.display()));
                }
            }
        }
    }
    let elapsed = started.elapsed();
    ensure(
        diffs.is_empty() && compared > 0 && elapsed <= Duration::from_secs(120),
        format!("{compared} comparisons, {} differing {diffs:?}, {:.2}s", diffs.len(), elapsed.as_secs_f64()),
    )
}

/// Step events that start at or past the checkpoint closing their window.
fn barrier_violations(log: &RunLog, interval: u64) -> (usize, usize) {
    let mut window_start = 0;
    let (mut steps, mut violations) = (0, 0);
    for e in log.events() {
        match e.kind {
            EventKind::Barrier => window_start = e.tick,
            EventKind::Rollback => window_start = e.tick,
            EventKind::Step => {
                steps += 1;
                let end = window_start + interval;
                let len: u64 = e.get("len").and_then(|l| l.parse().ok()).unwrap_or(0);
                if e.tick < window_start || e.tick >= end || e.tick + len > end {
                    violations += 1;
                }
            }
            EventKind::Switch => {}
        }
    }
    (steps, violations)
}

fn barrier_safety() -> Outcome {
    let mut steps = 0;
    let mut violations = 0;
    for path in shipped_scenarios() {
        let cfg = Config::load(&path).map_err(|e| e.to_string())?;
        for mode in [ExecutorMode::Sequential, ExecutorMode::Parallel(4)] {
            let out = run_scenario(&cfg, cfg.run.seed, mode).map_err(|e| e.to_string())?;
            let written = RunLog::parse(&out.log.render(LogLevel::Steps))?;
            let (s, v) = barrier_violations(&written, cfg.clock.checkpoint_interval);
            steps += s;
            violations += v;
        }
    }
    ensure(
        violations == 0 && steps > 0,
        format!("{steps} step events audited, {violations} violations"),
    )
}

fn rollback_controller(seed: u64, fault: bool) -> Result<Controller, String> {
    let mut cfg = scenario("hybrid_epidemic.toml");
    cfg.clock.end_tick = 100;
    cfg.clock.checkpoint_interval = 10;
    cfg.switch.dwell_ticks = 5;
    cfg.switch.theta_up = 0.03;
    for p in &mut cfg.tree.participants {
        p.i0 = Some(60);
    }
    let s = cfg.build(seed, ExecutorMode::Sequential).map_err(|e| e.to_string())?;
    let mut c = Controller::new(s.tree, s.clock, s.run).map_err(|e| e.to_string())?;
    if fault {
        c = c
            .with_check(multisim::orchestration::ConservedTotal::new(LABELS, s.conserved_total.unwrap()))
            .with_fault_hook(Box::new(|tick, attempt, records| {
                if tick == 70 && attempt == 0 {
                    records.clear();
                }
            }));
    }
    Ok(c)
}

fn rollback_fidelity() -> Outcome {
    let mut matched = 0;
    let mut switched = 0;
    let mut reexecuted = 0;
    for seed in 0..10u64 {
        let mut straight = rollback_controller(seed, false)?;
        straight.run_until(80).map_err(|e| e.to_string())?;
        let mut replayed = rollback_controller(seed, true)?;
        let run = |c: &mut Controller| -> multisim::Result<()> {
            c.run_until(80)?;
            c.rollback_to(50)?;
            c.run_until(80)
        };
        run(&mut replayed).map_err(|e| e.to_string())?;
        let same = straight.state_digest().map_err(|e| e.to_string())?
            == replayed.state_digest().map_err(|e| e.to_string())?
            && straight.trajectory().to_csv() == replayed.trajectory().to_csv();
        matched += same as usize;
        switched += (straight.log().count(EventKind::Switch) > 0) as usize;
        reexecuted += replayed
            .log()
            .events()
            .iter()
            .filter(|e| e.kind == EventKind::Rollback && e.get("reexecute").is_some())
            .count();
    }
    ensure(
        matched == 10 && reexecuted >= 10,
        format!("{matched}/10 seeds match, {switched} with switches before tick 80, {reexecuted} injected faults re-executed"),
    )
}

struct Spin {
    done: u64,
}

impl Worker for Spin {
    type Task = u64;
    type Output = (u64, u64);

    fn run(&mut self, task: u64) -> multisim::Result<(u64, u64)> {
        self.done += 1;
        let mut x = task;
        for _ in 0..1000 {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        }
        Ok((x, self.done))
    }
}

fn pool_accounting() -> Outcome {
    let capacity = 8;
    let pool = WorkerPool::new(capacity, |_| Spin { done: 0 }).map_err(|e| e.to_string())?;
    let after_init = pool.constructions();
    let mut max_seen = after_init;
    let mut futures = Vec::with_capacity(1000);
    for t in 0..1000u64 {
        futures.push(pool.assign(t).map_err(|e| e.to_string())?);
        max_seen = max_seen.max(pool.constructions());
    }
    let mut total_done = 0;
    let mut per_worker_max = 0;
    for f in futures {
        let (_, done) = wait(f).map_err(|e| e.to_string())?;
        total_done += 1;
        per_worker_max = per_worker_max.max(done);
        max_seen = max_seen.max(pool.constructions());
    }
    ensure(
        after_init == capacity && max_seen == capacity && pool.constructions() == capacity && total_done == 1000,
        format!(
            "capacity {capacity}, constructions {after_init} after init, max {max_seen} over 1000 tasks, busiest worker ran {per_worker_max}"
        ),
    )
}

fn puppeteer_round_trip() -> Outcome {
    let reg = BehaviorRegistry::<f64>::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut failures = 0;
    let mut agents = 0;
    for trial in 0..1000u64 {
        let n = rng.random_range(0..400u64);
        let mut pop = MicroPopulation::from_counts("p", [n, 0, 0]);
        for a in pop.agents_mut() {
            a.compartment = Compartment::from_index(rng.random_range(0..3));
            if rng.random_bool(0.3) {
                set_behavior(a, CAUTIOUS, &reg).unwrap();
            }
        }
        agents += n;
        let (m, kept) = aggregate::<f64>(pop.clone(), Strategy::Puppeteer).map_err(|e| e.to_string())?;
        let back = disaggregate(m, Strategy::Puppeteer, kept, &mut StreamRng::new(trial, 0))
            .map_err(|e| e.to_string())?;
        let same = back.agents().len() == pop.agents().len()
            && back.agents().iter().zip(pop.agents()).all(|(a, b)| {
                a.id == b.id && a.compartment == b.compartment && a.behavior == b.behavior && !a.frozen
            });
        failures += (!same) as usize;
    }
    ensure(
        failures == 0,
        format!("1000 populations ({agents} agents), {failures} mismatches"),
    )
}

fn future_blocking() -> Outcome {
    let delay = Duration::from_millis(10);
    let jitter = Duration::from_millis(1);
    let mut failures = Vec::new();
    for trial in 0..100u64 {
        let (p, f) = promise::<u64>();
        let producer = thread::spawn(move || {
            thread::sleep(delay);
            p.resolve(trial * 7);
        });
        let issued = Instant::now();
        let pending = !f.is_ready();
        let got = f.get();
        let waited = issued.elapsed();
        producer.join().unwrap();
        if !pending || got != Ok(trial * 7) || waited + jitter < delay {
            failures.push(format!("trial {trial}: pending={pending} got={got:?} waited={waited:?}"));
        }
    }
    ensure(
        failures.is_empty(),
        format!("100 trials, {} failures {failures:?}", failures.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("population conservation in the hybrid run", conservation),
        ("apportionment against the L1 oracle", apportionment),
        ("decay solver order and accuracy", solver_order),
        ("ABM peak against the EBM peak", statistical_consistency),
        ("sequential and parallel executors agree", executor_equivalence),
        ("no step crosses its checkpoint", barrier_safety),
        ("rollback and re-execution fidelity", rollback_fidelity),
        ("worker pool construction accounting", pool_accounting),
        ("puppeteer round trip", puppeteer_round_trip),
        ("futures block until resolved", future_blocking),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("acceptance {:>2} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("acceptance {:>2} FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
