use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_OFFSET: u32 = 24;

/// How lead features that would reach past the end of the day are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeadPolicy {
    /// Reuse hour 23 of the same day.
    #[default]
    ClampAtDayEnd,
    /// Read the next day's hours. Breaks the day-ahead rule, so it is rejected.
    CrossDayBoundary,
}

/// Hour offsets of lagged and leading PCA features.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LagLeadSpec {
    lags: BTreeSet<u32>,
    leads: BTreeSet<u32>,
    #[serde(default)]
    lead_policy: LeadPolicy,
}

impl LagLeadSpec {
    pub fn new(
        lags: impl IntoIterator<Item = u32>,
        leads: impl IntoIterator<Item = u32>,
        lead_policy: LeadPolicy,
    ) -> Result<Self> {
        let lags: BTreeSet<u32> = lags.into_iter().collect();
        let leads: BTreeSet<u32> = leads.into_iter().collect();
        for &k in lags.iter().chain(&leads) {
            if k == 0 || k > MAX_OFFSET {
                return Err(Error::argument(format!(
                    "offset {k} outside 1..={MAX_OFFSET}"
                )));
            }
        }
        if !leads.is_empty() && lead_policy == LeadPolicy::CrossDayBoundary {
            return Err(Error::Constraint(
                "lead features crossing the day boundary would read day D+1 inputs".into(),
            ));
        }
        Ok(Self {
            lags,
            leads,
            lead_policy,
        })
    }

    /// Lags `1..=lag` (0 for none) and leads `1..=lead` (0 for none).
    pub fn cumulative(lag: u32, lead: u32) -> Result<Self> {
        Self::new(1..=lag, 1..=lead, LeadPolicy::ClampAtDayEnd)
    }

    pub fn baseline() -> Self {
        Self::default()
    }

    pub fn lags(&self) -> impl Iterator<Item = u32> + '_ {
        self.lags.iter().copied()
    }

    pub fn leads(&self) -> impl Iterator<Item = u32> + '_ {
        self.leads.iter().copied()
    }

    pub fn lead_policy(&self) -> LeadPolicy {
        self.lead_policy
    }

    /// Re-check invariants after deserialization.
    pub fn validate(&self) -> Result<()> {
        Self::new(self.lags(), self.leads(), self.lead_policy).map(|_| ())
    }

    /// Short label such as `Baseline`, `Lag1`, `Lag3+Lead2`.
    pub fn label(&self) -> String {
        let contiguous = |s: &BTreeSet<u32>| {
            s.iter().copied().eq(1..=s.len() as u32)
        };
        let part = |prefix: &str, s: &BTreeSet<u32>| -> Option<String> {
            if s.is_empty() {
                None
            } else if contiguous(s) {
                Some(format!("{prefix}{}", s.len()))
            } else {
                let list: Vec<String> = s.iter().map(u32::to_string).collect();
                Some(format!("{prefix}{{{}}}", list.join(",")))
            }
        };
        let parts: Vec<String> = [part("Lag", &self.lags), part("Lead", &self.leads)]
            .into_iter()
            .flatten()
            .collect();
        if parts.is_empty() {
            "Baseline".into()
        } else {
            parts.join("+")
        }
    }
}

impl fmt::Display for LagLeadSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// The eleven lag/lead configurations of the ablation study, in table order.
pub fn ablation_presets() -> Vec<LagLeadSpec> {
    const GRID: [(u32, u32); 11] = [
        (0, 0),
        (1, 0),
        (2, 0),
        (0, 1),
        (5, 0),
        (1, 1),
        (3, 0),
        (2, 2),
        (0, 2),
        (3, 2),
        (5, 2),
    ];
    GRID.iter()
        .map(|&(lag, lead)| LagLeadSpec::cumulative(lag, lead).expect("preset offsets are valid"))
        .collect()
}

/// Look up a preset by label (case-insensitive, e.g. `lag1+lead1`).
pub fn preset(name: &str) -> Result<LagLeadSpec> {
    let wanted = name.replace(' ', "").to_ascii_lowercase();
    ablation_presets()
        .into_iter()
        .find(|s| s.label().to_ascii_lowercase() == wanted)
        .ok_or_else(|| Error::argument(format!("unknown lag/lead preset `{name}`")))
}
