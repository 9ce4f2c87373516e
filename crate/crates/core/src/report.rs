//! CSV output.
//!
//! Writers are hand-assembled rather than going through a serialization
//! crate: the byte stream is part of the reproducibility contract (same
//! configuration and seed, same file, byte for byte), so the formatting
//! must stay under direct control. Floats print through `Display`, which
//! emits the shortest representation that parses back to the same value;
//! rows end in `\n` with no trailing separator.

use crate::experiments::{HeatmapCell, SweepPoint};
use crate::num::Real;
use crate::optimizer::OptimizationResult;
use crate::validate::CheckOutcome;

/// Sweep results, one row per panel size and system.
///
/// Columns: `m_elements,system,avg_se,std_err,n_trials`.
pub fn sweep_csv<F: Real>(points: &[SweepPoint<F>]) -> String {
    let mut out = String::from("m_elements,system,avg_se,std_err,n_trials\n");
    for p in points {
        for (system, stats) in [("ios", &p.ios), ("irs", &p.irs), ("direct", &p.direct)] {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                p.m_elements, system, stats.avg_se, stats.std_err, p.n_trials
            ));
        }
    }
    out
}

/// Coverage map, one row per evaluated grid cell.
///
/// Columns: `x,y,side,se_ios,se_irs,se_direct`.
pub fn heatmap_csv<F: Real>(cells: &[HeatmapCell<F>]) -> String {
    let mut out = String::from("x,y,side,se_ios,se_irs,se_direct\n");
    for c in cells {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            c.x, c.y, c.side, c.se_ios, c.se_irs, c.se_direct
        ));
    }
    out
}

/// Chosen element states, one row per element (1-based).
///
/// Columns: `element,phase_index,psi_rad`; the index column is empty for
/// continuous solutions, which have no state grid.
pub fn phases_csv<F: Real>(result: &OptimizationResult<F>) -> String {
    let mut out = String::from("element,phase_index,psi_rad\n");
    for (i, psi) in result.psi.iter().enumerate() {
        match &result.indices {
            Some(v) => out.push_str(&format!("{},{},{}\n", i + 1, v.indices()[i], psi)),
            None => out.push_str(&format!("{},,{}\n", i + 1, psi)),
        }
    }
    out
}

/// Self-check outcomes, one row per check.
///
/// Columns: `check,status,detail`; the detail is quoted since it contains
/// free text.
pub fn validate_csv(checks: &[CheckOutcome]) -> String {
    let mut out = String::from("check,status,detail\n");
    for c in checks {
        let status = if c.passed { "pass" } else { "fail" };
        let detail = c.detail.replace('"', "\"\"");
        out.push_str(&format!("{},{},\"{}\"\n", c.name, status, detail));
    }
    out
}
