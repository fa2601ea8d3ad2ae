use std::fmt;

use serde::{Deserialize, Serialize};

use super::{MultiscaleError, Strategy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Micro,
    Macro,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Micro => "micro",
            Mode::Macro => "macro",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Stay,
    SwitchToMacro,
    SwitchToMicro,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwitchPolicy {
    pub theta_up: f64,
    pub theta_down: f64,
    pub dwell_ticks: u64,
    pub strategy: Strategy,
}

impl SwitchPolicy {
    pub fn new(
        theta_up: f64,
        theta_down: f64,
        dwell_ticks: u64,
        strategy: Strategy,
    ) -> Result<Self, MultiscaleError> {
        let unit = |x: f64| x > 0.0 && x < 1.0;
        if !unit(theta_up) || !unit(theta_down) {
            return Err(MultiscaleError::InvalidPolicy(format!(
                "thresholds must lie in (0, 1), got up={theta_up} down={theta_down}"
            )));
        }
        if theta_down >= theta_up {
            return Err(MultiscaleError::InvalidPolicy(format!(
                "theta_down {theta_down} must be below theta_up {theta_up}"
            )));
        }
        Ok(Self {
            theta_up,
            theta_down,
            dwell_ticks,
            strategy,
        })
    }
}

/// Up-switch at `fraction >= theta_up`, down-switch at `fraction <= theta_down`,
/// both only once `ticks_in_mode >= dwell_ticks`.
///
/// `ticks_in_mode` restarts at zero on the evaluation after a switch.
pub fn evaluate_switch(
    policy: &SwitchPolicy,
    fraction: f64,
    mode: Mode,
    ticks_in_mode: u64,
) -> Decision {
    if ticks_in_mode < policy.dwell_ticks {
        return Decision::Stay;
    }
    match mode {
        Mode::Micro if fraction >= policy.theta_up => Decision::SwitchToMacro,
        Mode::Macro if fraction <= policy.theta_down => Decision::SwitchToMicro,
        _ => Decision::Stay,
    }
}
