use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    aggregate, bind_cohabitation, cohabit_step, disaggregate, evaluate_switch, macro_step,
    view_refresh, Compartment, Decision, Forcing, MacroState, MicroPopulation, Mode, Strategy,
    SwitchPolicy,
};
use crate::kernel::{EventKind, LogEvent, Message, ObservationRecord, RunLog, Snapshot, Submodel, Value};
use crate::models::{abm_sir_step, BehaviorRegistry, SirParams};
use crate::rng::StreamRng;
use crate::{Result, Scalar};

/// Channel on which regions publish their infected fraction.
pub const INFECTED_FRACTION: &str = "infected_fraction";

#[derive(Clone, Debug)]
pub struct RegionConfig<T> {
    pub id: String,
    pub step_ticks: u64,
    /// Model time covered by one step.
    pub h: T,
    /// `n_total` is the region's population.
    pub params: SirParams<T>,
    pub i0: u64,
    pub policy: SwitchPolicy,
    /// Weight of the external infected fraction in the hazard.
    pub coupling_weight: T,
    /// Share of agents kept live under Cohabitation.
    pub cohabit_share: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct RegionState<T> {
    mode: Mode,
    micro: Option<MicroPopulation>,
    macro_state: Option<MacroState<T>>,
    rng: StreamRng,
    ticks_in_mode: u64,
    external: Option<T>,
    switches: u64,
}

/// An epidemic region that moves between agent and equation resolution.
pub struct EpidemicRegion<T: Scalar> {
    config: RegionConfig<T>,
    behaviors: Arc<BehaviorRegistry<T>>,
    state: RegionState<T>,
}

impl<T: Scalar> EpidemicRegion<T> {
    pub fn new(config: RegionConfig<T>, behaviors: Arc<BehaviorRegistry<T>>) -> Self {
        let state = Self::initial_state(&config, 0);
        Self {
            config,
            behaviors,
            state,
        }
    }

    fn initial_state(config: &RegionConfig<T>, seed: u64) -> RegionState<T> {
        let n = config.params.n_total;
        let i0 = config.i0.min(n);
        RegionState {
            mode: Mode::Micro,
            micro: Some(MicroPopulation::from_counts(&config.id, [n - i0, i0, 0])),
            macro_state: None,
            rng: StreamRng::for_id(seed, &config.id),
            ticks_in_mode: 0,
            external: None,
            switches: 0,
        }
    }

    pub fn mode(&self) -> Mode {
        self.state.mode
    }

    pub fn switches(&self) -> u64 {
        self.state.switches
    }

    /// Agents count towards the region only when they are not a shadow of
    /// the macro state.
    fn live_micro(&self) -> Option<&MicroPopulation> {
        let additive =
            self.state.mode == Mode::Micro || self.config.policy.strategy == Strategy::Cohabitation;
        self.state.micro.as_ref().filter(|_| additive)
    }

    pub fn counts(&self) -> [u64; 3] {
        let mut counts = [0; 3];
        if let Some(pop) = self.live_micro() {
            let c = pop.counts();
            (0..3).for_each(|k| counts[k] += c[k]);
        }
        if let Some(m) = &self.state.macro_state {
            let c = m.counts();
            (0..3).for_each(|k| counts[k] += c[k]);
        }
        counts
    }

    pub fn infected_fraction(&self) -> f64 {
        let n = self.config.params.n_total;
        if n == 0 {
            return 0.0;
        }
        let micro_i = self
            .live_micro()
            .map_or(0.0, |p| p.counts()[Compartment::I.index()] as f64);
        let macro_i = self
            .state
            .macro_state
            .as_ref()
            .map_or(0.0, |m| m.infected_mass().as_f64());
        (micro_i + macro_i) / n as f64
    }

    fn absorb_inbox(&mut self, inbox: &[Message]) {
        let mut latest: BTreeMap<&str, f64> = BTreeMap::new();
        for m in inbox.iter().filter(|m| m.channel == INFECTED_FRACTION) {
            latest.insert(&m.source, m.value.as_f64());
        }
        if !latest.is_empty() {
            let mean = latest.values().sum::<f64>() / latest.len() as f64;
            self.state.external = Some(T::lit(mean));
        }
    }

    fn forcing(&self) -> Forcing<T> {
        match self.state.external {
            Some(external) => Forcing {
                weight: self.config.coupling_weight,
                external,
            },
            None => Forcing::none(),
        }
    }

    fn advance(&mut self) -> Result<()> {
        let forcing = self.forcing();
        let cfg = &self.config;
        let st = &mut self.state;
        match (st.mode, cfg.policy.strategy) {
            (Mode::Micro, _) => {
                let pop = st.micro.as_mut().expect("micro mode holds agents");
                let local = T::lit(pop.infected_fraction());
                abm_sir_step(
                    pop,
                    &cfg.params,
                    cfg.h,
                    forcing.effective(local),
                    &mut st.rng,
                    &self.behaviors,
                )?;
            }
            (Mode::Macro, Strategy::Cohabitation) => {
                let m = st.macro_state.as_mut().expect("macro mode holds a tally");
                let pop = st.micro.as_mut().expect("cohabitation keeps a cohort");
                cohabit_step(m, pop, &cfg.params, cfg.h, forcing, &mut st.rng, &self.behaviors)?;
            }
            (Mode::Macro, strategy) => {
                let m = st.macro_state.as_mut().expect("macro mode holds a tally");
                macro_step(m, &cfg.params, cfg.h, forcing)?;
                if strategy == Strategy::View {
                    let pop = st.micro.as_mut().expect("view keeps its agents");
                    view_refresh(m, pop, &mut st.rng)?;
                }
            }
        }
        Ok(())
    }

    fn switch(&mut self, decision: Decision, tick: u64, log: &mut RunLog) -> Result<()> {
        let strategy = self.config.policy.strategy;
        let from = self.state.mode;
        match decision {
            Decision::Stay => return Ok(()),
            Decision::SwitchToMacro => {
                let pop = self.state.micro.take().expect("micro mode holds agents");
                let (mut m, mut retained) = aggregate::<T>(pop, strategy)?;
                if strategy == Strategy::Cohabitation {
                    let cohort = retained.as_mut().expect("cohabitation retains agents");
                    let keep = (self.config.cohabit_share * cohort.len() as f64).ceil() as usize;
                    bind_cohabitation(&mut m, cohort, keep)?;
                }
                self.state.macro_state = Some(m);
                self.state.micro = retained;
                self.state.mode = Mode::Macro;
            }
            Decision::SwitchToMicro => {
                let m = self.state.macro_state.take().expect("macro mode holds a tally");
                let retained = self.state.micro.take();
                let pop = disaggregate(m, strategy, retained, &mut self.state.rng)?;
                self.state.micro = Some(pop);
                self.state.mode = Mode::Micro;
            }
        }
        self.state.switches += 1;
        log.push(
            LogEvent::new(tick, EventKind::Switch, &self.config.id)
                .field("from", from)
                .field("to", self.state.mode)
                .field("strategy", strategy),
        );
        Ok(())
    }
}

impl<T: Scalar> Submodel for EpidemicRegion<T> {
    fn id(&self) -> &str {
        &self.config.id
    }

    fn step_ticks(&self) -> u64 {
        self.config.step_ticks
    }

    fn initialize(&mut self, seed: u64) -> Result<()> {
        self.state = Self::initial_state(&self.config, seed);
        Ok(())
    }

    fn step(
        &mut self,
        from_tick: u64,
        step_ticks: u64,
        inbox: &[Message],
        log: &mut RunLog,
    ) -> Result<Vec<Message>> {
        self.absorb_inbox(inbox);
        let own = self.config.step_ticks;
        let mut tick = from_tick;
        for _ in 0..step_ticks / own {
            self.advance()?;
            tick += own;
            let decision = evaluate_switch(
                &self.config.policy,
                self.infected_fraction(),
                self.state.mode,
                self.state.ticks_in_mode,
            );
            if decision == Decision::Stay {
                self.state.ticks_in_mode += own;
            } else {
                self.switch(decision, tick, log)?;
                self.state.ticks_in_mode = 0;
            }
        }
        Ok(vec![Message::new(
            &self.config.id,
            INFECTED_FRACTION,
            Value::Real(self.infected_fraction()),
        )])
    }

    fn snapshot(&self, tick: u64) -> Result<Snapshot> {
        Ok(Snapshot::encode(&self.config.id, tick, &self.state)?)
    }

    fn restore(&mut self, snapshot: &Snapshot) -> Result<()> {
        self.state = snapshot.decode(&self.config.id)?;
        Ok(())
    }

    fn observe(&self, tick: u64) -> ObservationRecord {
        let c = self.counts();
        ObservationRecord::new(tick, &self.config.id, self.state.mode.as_str())
            .with("S", Value::Int(c[0] as i64))
            .with("I", Value::Int(c[1] as i64))
            .with("R", Value::Int(c[2] as i64))
    }
}
