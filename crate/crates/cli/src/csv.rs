//! Trajectory export.

use std::fmt::Write as _;

use dirac_core::dynamics::Trajectory;

/// Header `t,<state>,<monitors>`, then one row per step with 17 significant
/// digits.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::new();
    let header: Vec<&str> =
        std::iter::once("t").chain(traj.names.iter().map(String::as_str)).chain(traj.monitor_names.iter().map(String::as_str)).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for (k, t) in traj.times.iter().enumerate() {
        let _ = write!(out, "{t:.16e}");
        for v in traj.states[k].iter().chain(&traj.monitors[k]) {
            let _ = write!(out, ",{v:.16e}");
        }
        out.push('\n');
    }
    out
}
