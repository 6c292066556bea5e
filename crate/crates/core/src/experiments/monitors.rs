//! Left- and right-hand sides of the a-priori inequalities, with the unknown
//! constants dropped. Exported for inspection only.

use super::budget::derivative;
use super::{DiagnosticsRecord, PairSample};
use crate::dynamics::SolverParams;
use crate::norms::SeminormReport;

/// Column-named table; the first column is `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct MonitorTable {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

fn sq(x: f64) -> f64 {
    x * x
}

fn curl_lap_sq(r: &SeminormReport) -> f64 {
    sq(r.curl_lap_l2)
}

/// `in2`, `in4` and the combined `H²` inequality along one trajectory.
/// Empty when fewer than three records exist.
pub fn trajectory_monitors(records: &[DiagnosticsRecord], params: &SolverParams) -> MonitorTable {
    let header = vec!["t", "in2_lhs", "in2_rhs", "in4_lhs", "in4_rhs", "cach_lhs", "cach_rhs"];
    if records.len() < 3 {
        return MonitorTable { header, rows: Vec::new() };
    }
    let (mu, gamma) = (params.mu, params.gamma);
    let times: Vec<f64> = records.iter().map(|r| r.t).collect();
    let grad: Vec<f64> = records.iter().map(|r| sq(r.u.grad_l2) + sq(r.b.grad_l2)).collect();
    let lap: Vec<f64> = records.iter().map(|r| sq(r.u.lap_l2) + sq(r.b.lap_l2)).collect();
    let h2: Vec<f64> = records.iter().map(|r| sq(r.u.h2) + sq(r.b.h2)).collect();
    let rows = records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let (u, b) = (&r.u, &r.b);
            let gu2 = sq(u.grad_l2);
            let gb2 = sq(b.grad_l2);
            let lu2 = sq(u.lap_l2);
            let lb2 = sq(b.lap_l2);
            let in2_lhs = 0.5 * derivative(&times, &grad, i) + 0.5 * mu * lu2 + 0.5 * gamma * lb2;
            let in2_rhs = (gu2 + gb2).powi(3) + lb2 * lb2 * gb2;
            let in4_lhs = 0.5 * derivative(&times, &lap, i)
                + 0.25 * mu * curl_lap_sq(u)
                + 0.25 * gamma * (curl_lap_sq(b) + sq(b.div_lap_l2));
            let in4_rhs = 0.25 * gamma * lb2 + (gu2 + gb2 + lb2).powi(3) + lu2 * (gu2 * gu2 + gb2 * gb2);
            let cach_lhs = 0.5 * derivative(&times, &h2, i)
                + 0.25 * mu * (gu2 + lu2 + curl_lap_sq(u))
                + 0.25 * gamma * (gb2 + lb2 + curl_lap_sq(b) + sq(b.div_lap_l2));
            let cach_rhs = h2[i] * (gu2 * gu2 + gb2 * gb2 + lb2 * lb2);
            vec![r.t, in2_lhs, in2_rhs, in4_lhs, in4_rhs, cach_lhs, cach_rhs]
        })
        .collect();
    MonitorTable { header, rows }
}

/// `in5`, `in50` and `in300` for the difference of a base and a perturbed
/// trajectory. Empty when fewer than three samples exist.
pub fn difference_monitors(trace: &[PairSample], params: &SolverParams) -> MonitorTable {
    let header = vec!["t", "in5_lhs", "in5_rhs", "in50_lhs", "in50_rhs", "in300_lhs", "in300_rhs"];
    if trace.len() < 3 {
        return MonitorTable { header, rows: Vec::new() };
    }
    let (mu, gamma) = (params.mu, params.gamma);
    let times: Vec<f64> = trace.iter().map(|s| s.t).collect();
    let l2: Vec<f64> = trace.iter().map(|s| sq(s.diff_u.l2) + sq(s.diff_b.l2)).collect();
    let grad: Vec<f64> = trace.iter().map(|s| sq(s.diff_u.grad_l2) + sq(s.diff_b.grad_l2)).collect();
    let lap: Vec<f64> = trace.iter().map(|s| sq(s.diff_u.lap_l2) + sq(s.diff_b.lap_l2)).collect();
    let rows = trace
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let (u, b, du, db) = (&s.base_u, &s.base_b, &s.diff_u, &s.diff_b);
            let base4 = u.grad_l2.powi(4) + b.grad_l2.powi(4) + b.lap_l2.powi(4);
            let base4_full = base4 + u.lap_l2.powi(4);
            let gdu = sq(du.grad_l2);
            let gdb = sq(db.grad_l2);
            let ldu = sq(du.lap_l2);
            let ldb = sq(db.lap_l2);
            let in5_lhs = 0.5 * derivative(&times, &l2, i) + 0.5 * mu * gdu + 0.5 * gamma * gdb;
            let in5_rhs = base4 * l2[i];
            let in50_lhs = 0.5 * derivative(&times, &grad, i) + 0.5 * mu * ldu + 0.5 * gamma * ldb;
            let in50_rhs = (gdu + gdb + ldb) * base4 + (gdu + gdb + ldb).powi(3);
            let in300_lhs = 0.5 * derivative(&times, &lap, i)
                + 0.25 * mu * curl_lap_sq(du)
                + 0.25 * gamma * (curl_lap_sq(db) + sq(db.div_lap_l2));
            let all = gdu + gdb + ldu + ldb;
            let in300_rhs = all * base4_full
                + 0.25 * mu * ldu
                + 0.25 * gamma * ldb
                + (gdb + ldb) * (curl_lap_sq(b) + sq(b.div_lap_l2))
                + all.powi(3);
            vec![s.t, in5_lhs, in5_rhs, in50_lhs, in50_rhs, in300_lhs, in300_rhs]
        })
        .collect();
    MonitorTable { header, rows }
}
