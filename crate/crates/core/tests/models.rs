use multisim::kernel::{RunLog, Submodel};
use multisim::models::{
    abm_sir_step, decay_step, ebm_sir_step, infection_probability, recovery_probability, rk4_step,
    set_behavior, BehaviorRegistry, DecayModel, DecayState, EbmState, ModelError, SirParams,
    CAUTIOUS, STANDARD,
};
use multisim::multiscale::{Compartment, MicroPopulation};
use multisim::rng::StreamRng;
use proptest::prelude::*;

#[test]
fn rk4_on_trivial_fields() {
    let y = rk4_step(|_: &[f64]| vec![0.0, 0.0], &[1.5, -2.0], 0.3).unwrap();
    assert_eq!(y, vec![1.5, -2.0]);
    let y = rk4_step(|_: &[f64]| vec![2.0], &[1.0], 0.25).unwrap();
    assert!((y[0] - 1.5).abs() < 1e-15);
}

#[test]
fn rk4_linear_field_matches_the_quartic_taylor_polynomial() {
    let h = 0.1f64;
    let taylor = 1.0 - h + h * h / 2.0 - h.powi(3) / 6.0 + h.powi(4) / 24.0;
    let y = rk4_step(|y: &[f64]| vec![-y[0]], &[1.0], h).unwrap();
    assert!((y[0] - taylor).abs() < 1e-15);
    assert!((y[0] - 0.904_837_50).abs() < 5e-9);
}

#[test]
fn rk4_rejects_bad_inputs() {
    assert_eq!(
        rk4_step(|_: &[f64]| vec![f64::NAN], &[1.0], 0.1),
        Err(ModelError::NonFiniteDerivative)
    );
    assert_eq!(
        rk4_step(|y: &[f64]| y.to_vec(), &[1.0], 0.0),
        Err(ModelError::NonPositiveStep)
    );
}

#[test]
fn ebm_examples() {
    let p = SirParams::new(0.3, 0.1, 1000).unwrap();
    let dfe = EbmState::new(1000.0, 0.0, 0.0);
    assert_eq!(ebm_sir_step(dfe, &p, 0.5).unwrap(), dfe);

    let p0 = SirParams::new(0.0, 0.1, 1000).unwrap();
    let mut s = EbmState::new(900.0, 100.0, 0.0);
    let h = 0.1;
    for _ in 0..100 {
        s = ebm_sir_step(s, &p0, h).unwrap();
    }
    assert_eq!(s.s, 900.0);
    let exact = 100.0 * (-0.1f64 * 10.0).exp();
    assert!((s.i - exact).abs() / exact < 1e-8);
}

#[test]
fn ebm_conserves_over_long_runs() {
    let p = SirParams::new(0.3, 0.1, 10_000).unwrap();
    let mut s = EbmState::new(9_990.0f64, 10.0, 0.0);
    for _ in 0..100_000 {
        let before = s.total();
        s = ebm_sir_step(s, &p, 0.01).unwrap();
        assert!((s.total() - before).abs() <= 1e-9);
    }
    assert!((s.total() - 10_000.0).abs() <= 1e-6);
}

#[test]
fn abm_probabilities() {
    let p = infection_probability(0.3f64, 0.5, 1.0);
    let oracle = 1.0 - (-0.15f64).exp();
    assert!((p - oracle).abs() < 1e-15);
    assert!((p - 0.139_292_02).abs() < 5e-9);
    assert_eq!(recovery_probability(50.0f64, 1.0), 1.0);
}

#[test]
fn abm_examples() {
    let reg = BehaviorRegistry::standard();
    let mut pop = MicroPopulation::from_counts("r", [100, 0, 0]);
    let p = SirParams::new(0.3, 0.1, 100).unwrap();
    let s = abm_sir_step(&mut pop, &p, 1.0, 0.0, &mut StreamRng::new(1, 2), &reg).unwrap();
    assert_eq!((s.infections, pop.counts()), (0, [100, 0, 0]));

    let mut pop = MicroPopulation::from_counts("r", [0, 250, 0]);
    let p = SirParams::new(0.3, 50.0, 250).unwrap();
    abm_sir_step(&mut pop, &p, 1.0, 1.0, &mut StreamRng::new(1, 2), &reg).unwrap();
    assert_eq!(pop.counts(), [0, 0, 250]);
}

fn infection_rate(behavior: multisim::models::BehaviorId) -> f64 {
    let reg = BehaviorRegistry::standard();
    let n = 200_000u64;
    let mut pop = MicroPopulation::from_counts("r", [n, 0, 0]);
    for a in pop.agents_mut() {
        set_behavior(a, behavior, &reg).unwrap();
    }
    let p = SirParams::new(0.2, 0.1, n).unwrap();
    let stats = abm_sir_step(&mut pop, &p, 1.0, 0.5, &mut StreamRng::new(5, 5), &reg).unwrap();
    stats.infections as f64 / n as f64
}

#[test]
fn cautious_behavior_halves_the_hazard() {
    let standard = infection_rate(STANDARD);
    let cautious = infection_rate(CAUTIOUS);
    let hazard = 0.2f64 * 0.5 * 1.0;
    let p_std = 1.0 - (-hazard).exp();
    let p_cau = 1.0 - (-0.5 * hazard).exp();
    let tol = |p: f64| 5.0 * (p * (1.0 - p) / 200_000.0).sqrt();
    assert!((standard - p_std).abs() < tol(p_std), "{standard} vs {p_std}");
    assert!((cautious - p_cau).abs() < tol(p_cau), "{cautious} vs {p_cau}");
}

#[test]
fn behavior_swaps() {
    let reg = BehaviorRegistry::<f64>::standard();
    let mut pop = MicroPopulation::from_counts("r", [3, 0, 0]);
    let agent = &mut pop.agents_mut()[1];
    let before = agent.clone();
    set_behavior(agent, STANDARD, &reg).unwrap();
    assert_eq!(*agent, before);
    set_behavior(agent, CAUTIOUS, &reg).unwrap();
    assert_eq!((agent.id, agent.compartment), (before.id, before.compartment));
    assert!(matches!(
        set_behavior(agent, multisim::models::BehaviorId(9), &reg),
        Err(ModelError::UnknownBehavior(_))
    ));
}

#[test]
fn behavior_swap_only_changes_the_future() {
    let reg = BehaviorRegistry::standard();
    let p = SirParams::new(0.4, 0.1, 2000).unwrap();
    let run = |swap_at: Option<usize>| {
        let mut pop = MicroPopulation::from_counts("r", [1980, 20, 0]);
        let mut rng = StreamRng::new(11, 3);
        let mut trace = Vec::new();
        for k in 0..60 {
            if swap_at == Some(k) {
                for a in pop.agents_mut() {
                    set_behavior(a, CAUTIOUS, &reg).unwrap();
                }
            }
            let f = pop.infected_fraction();
            abm_sir_step(&mut pop, &p, 0.5, f, &mut rng, &reg).unwrap();
            trace.push(pop.counts());
        }
        trace
    };
    let base = run(None);
    let swapped = run(Some(30));
    assert_eq!(base[..30], swapped[..30]);
    assert_ne!(base[30..], swapped[30..]);
}

#[test]
fn decay_examples() {
    let mut s = DecayState { y: 1.0f64, rate: 1.0 };
    for _ in 0..1000 {
        s = decay_step(s, 0.01).unwrap();
    }
    let exact = (-10.0f64).exp();
    assert!((s.y - exact).abs() / exact <= 1e-8);
    assert!((exact - 4.539_993e-5).abs() < 1e-11);

    let mut z = DecayState { y: 3.0f64, rate: 0.0 };
    for _ in 0..10 {
        z = decay_step(z, 0.1).unwrap();
    }
    assert_eq!(z.y, 3.0);
}

fn decay_error(h: f64) -> f64 {
    let steps = (10.0 / h).round() as usize;
    let mut s = DecayState { y: 1.0f64, rate: 1.0 };
    for _ in 0..steps {
        s = decay_step(s, h).unwrap();
    }
    (s.y - (-10.0f64).exp()).abs()
}

#[test]
fn halving_the_step_shrinks_the_error_sixteenfold() {
    let ratio = decay_error(0.1) / decay_error(0.05);
    assert!((ratio - 16.0).abs() < 1.0, "ratio {ratio}");
}

#[test]
fn decay_model_is_monotone() {
    let mut m = DecayModel::new("d", 1, 0.05f64, 2.0, 0.7);
    m.initialize(0).unwrap();
    let mut last = m.state().y;
    for t in 0..200 {
        m.step(t, 1, &[], &mut RunLog::new()).unwrap();
        assert!(m.state().y <= last);
        last = m.state().y;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn abm_conserves_and_only_moves_forward(
        s in 0u64..300, i in 0u64..300, r in 0u64..50,
        beta in 0.0f64..2.0, gamma in 0.0f64..1.0, seed in any::<u64>(), steps in 1usize..20,
    ) {
        let n = s + i + r;
        prop_assume!(n > 0);
        let reg = BehaviorRegistry::standard();
        let p = SirParams::new(beta, gamma, n).unwrap();
        let mut pop = MicroPopulation::from_counts("r", [s, i, r]);
        let mut rng = StreamRng::new(seed, 0);
        for _ in 0..steps {
            let before: Vec<Compartment> = pop.agents().iter().map(|a| a.compartment).collect();
            let f = pop.infected_fraction();
            abm_sir_step(&mut pop, &p, 0.5, f, &mut rng, &reg).unwrap();
            prop_assert_eq!(pop.len() as u64, n);
            for (b, a) in before.iter().zip(pop.agents()) {
                let ok = *b == a.compartment
                    || (*b == Compartment::S && a.compartment == Compartment::I)
                    || (*b == Compartment::I && a.compartment == Compartment::R);
                prop_assert!(ok, "{:?} -> {:?}", b, a.compartment);
            }
        }
    }

    #[test]
    fn ebm_step_conserves(s in 0.0f64..1e4, i in 0.0f64..1e4, beta in 0.0f64..3.0, gamma in 0.0f64..2.0, h in 0.001f64..1.0) {
        let n = (s + i).ceil() as u64 + 1;
        let p = SirParams::new(beta, gamma, n).unwrap();
        let st = EbmState::new(s, i, 0.0);
        let next = ebm_sir_step(st, &p, h).unwrap();
        prop_assert!((next.total() - st.total()).abs() <= 1e-9 * st.total().max(1.0));
    }
}
