//! Agent-level work that a director hands to its workers.

use std::sync::Arc;

use super::{abm_sir_step, BehaviorRegistry, ModelError, SirParams};
use crate::exchange::ConservedTally;
use crate::kernel::{Message, ObservationRecord, Snapshot, Value};
use crate::multiscale::{MicroPopulation, INFECTED_FRACTION, LABELS};
use crate::orchestration::{DirectorModel, Worker};
use crate::rng::StreamRng;
use crate::{Result, Scalar};

#[derive(Clone, Debug)]
pub struct MicroTask<T> {
    pub index: usize,
    pub population: MicroPopulation,
    pub rng: StreamRng,
    pub params: SirParams<T>,
    pub h: T,
    pub steps: u64,
    /// Fixed hazard fraction; the population's own fraction when `None`.
    pub infected_fraction: Option<T>,
}

#[derive(Clone, Debug)]
pub struct MicroTaskResult<T> {
    pub index: usize,
    pub population: MicroPopulation,
    pub rng: StreamRng,
    pub tally: ConservedTally<T>,
    pub worker: usize,
    /// Tasks completed by this worker, this one included.
    pub worker_tasks_done: u64,
}

/// Steps a micro population for a number of steps.
pub struct MicroStepWorker<T: Scalar> {
    id: usize,
    behaviors: Arc<BehaviorRegistry<T>>,
    tasks_done: u64,
    failing: bool,
}

impl<T: Scalar> MicroStepWorker<T> {
    pub fn new(id: usize, behaviors: Arc<BehaviorRegistry<T>>) -> Self {
        Self {
            id,
            behaviors,
            tasks_done: 0,
            failing: false,
        }
    }

    /// A worker whose every task fails.
    pub fn failing(id: usize, behaviors: Arc<BehaviorRegistry<T>>) -> Self {
        Self {
            failing: true,
            ..Self::new(id, behaviors)
        }
    }

    pub fn tasks_done(&self) -> u64 {
        self.tasks_done
    }
}

impl<T: Scalar> Worker for MicroStepWorker<T> {
    type Task = MicroTask<T>;
    type Output = MicroTaskResult<T>;

    fn run(&mut self, mut task: MicroTask<T>) -> Result<MicroTaskResult<T>> {
        if self.failing {
            return Err(ModelError::Injected(format!("worker {} refuses tasks", self.id)).into());
        }
        for _ in 0..task.steps {
            let fraction = task
                .infected_fraction
                .unwrap_or_else(|| T::lit(task.population.infected_fraction()));
            abm_sir_step(
                &mut task.population,
                &task.params,
                task.h,
                fraction,
                &mut task.rng,
                &self.behaviors,
            )?;
        }
        self.tasks_done += 1;
        let tally = ConservedTally::new(LABELS, task.population.counts().to_vec());
        Ok(MicroTaskResult {
            index: task.index,
            population: task.population,
            rng: task.rng,
            tally,
            worker: self.id,
            worker_tasks_done: self.tasks_done,
        })
    }
}

/// A region split into equal partitions, each stepped by a worker.
///
/// All partitions share the region-wide infected fraction taken at the start
/// of a step.
pub struct PartitionedRegion<T: Scalar> {
    id: String,
    step_ticks: u64,
    h: T,
    params: SirParams<T>,
    i0: u64,
    partition_count: usize,
    partitions: Vec<(MicroPopulation, StreamRng)>,
}

impl<T: Scalar> PartitionedRegion<T> {
    pub fn new(
        id: impl Into<String>,
        step_ticks: u64,
        h: T,
        params: SirParams<T>,
        i0: u64,
        partition_count: usize,
    ) -> Self {
        Self {
            id: id.into(),
            step_ticks,
            h,
            params,
            i0,
            partition_count: partition_count.max(1),
            partitions: Vec::new(),
        }
    }

    pub fn counts(&self) -> [u64; 3] {
        let mut counts = [0; 3];
        for (pop, _) in &self.partitions {
            let c = pop.counts();
            (0..3).for_each(|k| counts[k] += c[k]);
        }
        counts
    }

    pub fn infected_fraction(&self) -> f64 {
        let c = self.counts();
        let n: u64 = c.iter().sum();
        if n == 0 {
            0.0
        } else {
            c[1] as f64 / n as f64
        }
    }
}

fn share(total: u64, parts: usize, k: usize) -> u64 {
    let parts = parts as u64;
    total / parts + u64::from((k as u64) < total % parts)
}

impl<T: Scalar> DirectorModel for PartitionedRegion<T> {
    type Task = MicroTask<T>;
    type Output = MicroTaskResult<T>;

    fn id(&self) -> &str {
        &self.id
    }

    fn step_ticks(&self) -> u64 {
        self.step_ticks
    }

    fn initialize(&mut self, seed: u64) -> Result<()> {
        let n = self.params.n_total;
        let i0 = self.i0.min(n);
        self.partitions = (0..self.partition_count)
            .map(|k| {
                let sub = format!("{}.{k}", self.id);
                let nk = share(n, self.partition_count, k);
                let ik = share(i0, self.partition_count, k).min(nk);
                (
                    MicroPopulation::from_counts(&sub, [nk - ik, ik, 0]),
                    StreamRng::for_id(seed, &sub),
                )
            })
            .collect();
        Ok(())
    }

    fn plan(&mut self, _from_tick: u64, step_ticks: u64, _inbox: &[Message]) -> Result<Vec<MicroTask<T>>> {
        let fraction = T::lit(self.infected_fraction());
        Ok(self
            .partitions
            .iter()
            .enumerate()
            .map(|(index, (population, rng))| MicroTask {
                index,
                population: population.clone(),
                rng: rng.clone(),
                params: self.params,
                h: self.h,
                steps: step_ticks / self.step_ticks,
                infected_fraction: Some(fraction),
            })
            .collect())
    }

    fn integrate(
        &mut self,
        _from_tick: u64,
        _step_ticks: u64,
        outputs: Vec<MicroTaskResult<T>>,
    ) -> Result<Vec<Message>> {
        for out in outputs {
            self.partitions[out.index] = (out.population, out.rng);
        }
        Ok(vec![Message::new(
            &self.id,
            INFECTED_FRACTION,
            Value::Real(self.infected_fraction()),
        )])
    }

    fn snapshot(&self, tick: u64) -> Result<Snapshot> {
        Ok(Snapshot::encode(&self.id, tick, &self.partitions)?)
    }

    fn restore(&mut self, snapshot: &Snapshot) -> Result<()> {
        self.partitions = snapshot.decode(&self.id)?;
        Ok(())
    }

    fn observe(&self, tick: u64) -> ObservationRecord {
        let c = self.counts();
        ObservationRecord::new(tick, &self.id, "director")
            .with("S", Value::Int(c[0] as i64))
            .with("I", Value::Int(c[1] as i64))
            .with("R", Value::Int(c[2] as i64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shares_sum_to_the_total() {
        let parts: Vec<u64> = (0..3).map(|k| share(10, 3, k)).collect();
        assert_eq!(parts, vec![4, 3, 3]);
    }

    #[test]
    fn zero_step_task_is_identity() {
        let mut w = MicroStepWorker::<f64>::new(0, Arc::new(BehaviorRegistry::standard()));
        let pop = MicroPopulation::from_counts("p", [5, 5, 0]);
        let out = w
            .run(MicroTask {
                index: 0,
                population: pop.clone(),
                rng: StreamRng::new(0, 0),
                params: SirParams::new(0.3, 0.1, 10).unwrap(),
                h: 1.0,
                steps: 0,
                infected_fraction: None,
            })
            .unwrap();
        assert_eq!(out.population, pop);
        assert_eq!(out.tally.counts(), &[5, 5, 0]);
    }
}
