use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EventKind {
    Step,
    Barrier,
    Rollback,
    Switch,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Step => "step",
            EventKind::Barrier => "barrier",
            EventKind::Rollback => "rollback",
            EventKind::Switch => "switch",
        }
    }
}

impl FromStr for EventKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "step" => EventKind::Step,
            "barrier" => EventKind::Barrier,
            "rollback" => EventKind::Rollback,
            "switch" => EventKind::Switch,
            other => return Err(format!("unknown event `{other}`")),
        })
    }
}

/// One run-log line: `tick=<n> event=<kind> id=<submodel>` followed by
/// optional `key=value` fields.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogEvent {
    pub tick: u64,
    pub kind: EventKind,
    pub id: String,
    pub extra: Vec<(String, String)>,
}

impl LogEvent {
    pub fn new(tick: u64, kind: EventKind, id: impl Into<String>) -> Self {
        Self {
            tick,
            kind,
            id: id.into(),
            extra: Vec::new(),
        }
    }

    pub fn field(mut self, key: &str, value: impl ToString) -> Self {
        self.extra.push((key.to_owned(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.extra
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

impl fmt::Display for LogEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "tick={} event={} id={}",
            self.tick,
            self.kind.as_str(),
            self.id
        )?;
        for (k, v) in &self.extra {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

impl FromStr for LogEvent {
    type Err = String;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let mut fields = line.split(' ').map(|tok| {
            tok.split_once('=')
                .ok_or_else(|| format!("malformed field `{tok}`"))
        });
        let mut next = |name: &str| -> Result<String, String> {
            let (k, v) = fields.next().ok_or(format!("missing `{name}`"))??;
            if k != name {
                return Err(format!("expected `{name}`, found `{k}`"));
            }
            Ok(v.to_owned())
        };
        let tick = next("tick")?
            .parse()
            .map_err(|e| format!("bad tick: {e}"))?;
        let kind = next("event")?.parse()?;
        let id = next("id")?;
        let extra = fields
            .map(|kv| kv.map(|(k, v)| (k.to_owned(), v.to_owned())))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            tick,
            kind,
            id,
            extra,
        })
    }
}

/// Verbosity of the written run log (`MULTISIM_LOG`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LogLevel {
    /// Nothing is written.
    Off,
    /// Barriers, rollbacks and switches.
    Events,
    /// Everything, including every step.
    #[default]
    Steps,
}

impl LogLevel {
    pub fn from_env() -> Self {
        std::env::var("MULTISIM_LOG")
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or_default()
    }

    pub fn admits(self, kind: EventKind) -> bool {
        match self {
            LogLevel::Off => false,
            LogLevel::Events => kind != EventKind::Step,
            LogLevel::Steps => true,
        }
    }
}

impl FromStr for LogLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "off" | "0" | "none" => Ok(LogLevel::Off),
            "events" => Ok(LogLevel::Events),
            "steps" | "all" => Ok(LogLevel::Steps),
            other => Err(format!("unknown log level `{other}`")),
        }
    }
}

/// Append-only, in-memory run log. Always records everything; the level only
/// filters what [`RunLog::render`] writes out.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunLog {
    events: Vec<LogEvent>,
}

impl RunLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, event: LogEvent) {
        self.events.push(event);
    }

    pub fn append(&mut self, other: &mut RunLog) {
        self.events.append(&mut other.events);
    }

    pub fn events(&self) -> &[LogEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    pub fn render(&self, level: LogLevel) -> String {
        let mut out = String::new();
        for e in self.events.iter().filter(|e| level.admits(e.kind)) {
            out.push_str(&e.to_string());
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let events = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(str::parse)
            .collect::<Result<_, _>>()?;
        Ok(Self { events })
    }
}
