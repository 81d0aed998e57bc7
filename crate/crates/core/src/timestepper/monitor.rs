use super::Trajectory;
use crate::diagnostics::DiagnosticsRecord;

/// Default slack for both monotonicity checks.
pub const DEFAULT_SLACK: f64 = 1e-10;

/// Comparison of one window with its predecessor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowCheck {
    /// 1-based position of the record in the trajectory.
    pub window: usize,
    pub t: f64,
    pub sup_before: f64,
    pub sup_after: f64,
    pub l2_before: f64,
    pub l2_after: f64,
    pub sup_ok: bool,
    pub l2_ok: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AprioriReport {
    pub sup_slack: f64,
    pub l2_slack: f64,
    pub checks: Vec<WindowCheck>,
}

impl AprioriReport {
    pub fn sup_violations(&self) -> Vec<&WindowCheck> {
        self.checks.iter().filter(|c| !c.sup_ok).collect()
    }

    pub fn l2_violations(&self) -> Vec<&WindowCheck> {
        self.checks.iter().filter(|c| !c.l2_ok).collect()
    }

    pub fn sup_monotone(&self) -> bool {
        self.checks.iter().all(|c| c.sup_ok)
    }

    pub fn l2_monotone(&self) -> bool {
        self.checks.iter().all(|c| c.l2_ok)
    }
}

/// Checks that sup_norm and l2_norm never increase from one window to the
/// next by more than 1e-10. Violations are collected, not raised.
pub fn apriori_monitor(trajectory: &Trajectory) -> AprioriReport {
    apriori_monitor_with(trajectory, DEFAULT_SLACK, DEFAULT_SLACK)
}

pub fn apriori_monitor_with(trajectory: &Trajectory, sup_slack: f64, l2_slack: f64) -> AprioriReport {
    let mut prev: &DiagnosticsRecord = &trajectory.initial;
    let mut checks = Vec::with_capacity(trajectory.records.len());
    for (i, rec) in trajectory.records.iter().enumerate() {
        let (l2_before, l2_after) = (prev.l2_norm(), rec.l2_norm());
        checks.push(WindowCheck {
            window: i + 1,
            t: rec.t,
            sup_before: prev.sup_norm,
            sup_after: rec.sup_norm,
            l2_before,
            l2_after,
            sup_ok: rec.sup_norm <= prev.sup_norm + sup_slack,
            l2_ok: l2_after <= l2_before + l2_slack,
        });
        prev = rec;
    }
    AprioriReport {
        sup_slack,
        l2_slack,
        checks,
    }
}
