use std::fmt::Write as _;

use crate::format::format_real;
use crate::kernel::{digest64, ObservationRecord, Value};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunMeta {
    pub seed: u64,
    pub config_digest: u64,
    pub mode: String,
}

impl RunMeta {
    /// `key=value` lines, with the digest of the serialized trajectory.
    pub fn render(&self, trajectory_digest: u64) -> String {
        format!(
            "seed={}\nconfig_digest={:016x}\nmode={}\ntrajectory_digest={:016x}\n",
            self.seed, self.config_digest, self.mode, trajectory_digest
        )
    }

    /// Parses [`RunMeta::render`] output; returns the meta and the recorded digest.
    pub fn parse(text: &str) -> Option<(Self, u64)> {
        let mut meta = RunMeta::default();
        let mut digest = None;
        for line in text.lines() {
            let (k, v) = line.split_once('=')?;
            match k {
                "seed" => meta.seed = v.parse().ok()?,
                "config_digest" => meta.config_digest = u64::from_str_radix(v, 16).ok()?,
                "mode" => meta.mode = v.to_owned(),
                "trajectory_digest" => digest = Some(u64::from_str_radix(v, 16).ok()?),
                _ => {}
            }
        }
        Some((meta, digest?))
    }
}

/// Observation records ordered by `(tick, submodel_id)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    records: Vec<ObservationRecord>,
    pub meta: RunMeta,
}

impl Trajectory {
    pub fn records(&self) -> &[ObservationRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn at(&self, tick: u64) -> impl Iterator<Item = &ObservationRecord> {
        self.records.iter().filter(move |r| r.tick == tick)
    }

    pub fn of(&self, id: &str) -> impl Iterator<Item = &ObservationRecord> + '_ {
        let id = id.to_owned();
        self.records.iter().filter(move |r| r.submodel_id == id)
    }

    /// Appends and keeps the order with a stable sort.
    pub fn extend(&mut self, records: impl IntoIterator<Item = ObservationRecord>) {
        self.records.extend(records);
        if !self.is_sorted() {
            self.records
                .sort_by(|a, b| (a.tick, &a.submodel_id).cmp(&(b.tick, &b.submodel_id)));
        }
    }

    pub fn truncate(&mut self, len: usize) {
        self.records.truncate(len);
    }

    pub fn is_sorted(&self) -> bool {
        self.records
            .windows(2)
            .all(|w| (w[0].tick, &w[0].submodel_id) <= (w[1].tick, &w[1].submodel_id))
    }

    /// Labels in order of first appearance.
    pub fn labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = Vec::new();
        for r in &self.records {
            for l in r.labels() {
                if !labels.iter().any(|x| x == l) {
                    labels.push(l.to_owned());
                }
            }
        }
        labels
    }

    /// `tick,submodel_id,mode_tag,<labels>`; integers verbatim, reals with nine
    /// significant digits, absent values empty.
    pub fn to_csv(&self) -> String {
        let labels = self.labels();
        let mut out = String::from("tick,submodel_id,mode_tag");
        for l in &labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for r in &self.records {
            let _ = write!(out, "{},{},{}", r.tick, r.submodel_id, r.mode_tag);
            for l in &labels {
                out.push(',');
                match r.get(l) {
                    Some(Value::Int(v)) => {
                        let _ = write!(out, "{v}");
                    }
                    Some(Value::Real(v)) => out.push_str(&format_real(v)),
                    None => {}
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn digest(&self) -> u64 {
        digest64(self.to_csv().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = Trajectory::default();
        t.extend([
            ObservationRecord::new(1, "b", "ode").with("y", Value::Real(0.5)),
            ObservationRecord::new(0, "a", "micro").with("S", Value::Int(3)),
        ]);
        assert_eq!(
            t.to_csv(),
            "tick,submodel_id,mode_tag,S,y\n0,a,micro,3,\n1,b,ode,,0.5\n"
        );
    }

    #[test]
    fn meta_round_trip() {
        let meta = RunMeta {
            seed: 7,
            config_digest: 0xabc,
            mode: "parallel(4)".into(),
        };
        let (back, digest) = RunMeta::parse(&meta.render(42)).unwrap();
        assert_eq!(back, meta);
        assert_eq!(digest, 42);
    }
}
