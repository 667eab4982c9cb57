//! Side-by-side evaluation of the baseline planner, the learned-social
//! planner and the exact social optimum.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grid::Pose;
use crate::learner::{DualQ, EpisodeStats};
use crate::oracle::social_optimal_path;
use crate::planner::{plan_traced, PlannerConfig};
use crate::scenario::{QueueScenario, StartSpec};

/// Chebyshev distance beyond which a scenario counts as far field.
pub const FAR_FIELD_CELLS: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Baseline,
    Hplsv,
    Oracle,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Baseline => "baseline",
            Method::Hplsv => "hplsv",
            Method::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub scenario: usize,
    pub seed: u64,
    pub method: Method,
    pub w: f64,
    pub success: bool,
    pub crossings: usize,
    pub actions: usize,
    /// Action count of the exact optimum for the same weight.
    pub oracle_actions: usize,
    pub length_ratio: f64,
    pub expanded: usize,
    /// Largest social contribution of any expanded node in the far field.
    pub far_field_max: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
}

impl EvalReport {
    pub fn method(&self, m: Method) -> impl Iterator<Item = &EvalRow> {
        self.rows.iter().filter(move |r| r.method == m)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "scenario,seed,method,w,success,crossings,actions,oracle_actions,length_ratio,expanded,far_field_max\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{:.6},{},{:.6}",
                r.scenario,
                r.seed,
                r.method.name(),
                r.w,
                u8::from(r.success),
                r.crossings,
                r.actions,
                r.oracle_actions,
                r.length_ratio,
                r.expanded,
                r.far_field_max
            );
        }
        s
    }
}

/// Summary over the rows of one method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub scenarios: usize,
    pub successes: usize,
    pub crossing_free: usize,
    pub mean_length_ratio: f64,
}

pub fn summarize<'a>(rows: impl Iterator<Item = &'a EvalRow>) -> Summary {
    let (mut n, mut ok, mut free, mut ratio) = (0, 0, 0, 0.0);
    for r in rows {
        n += 1;
        if r.success {
            ok += 1;
            ratio += r.length_ratio;
            if r.crossings == 0 {
                free += 1;
            }
        }
    }
    Summary {
        scenarios: n,
        successes: ok,
        crossing_free: free,
        mean_length_ratio: if ok == 0 { f64::NAN } else { ratio / ok as f64 },
    }
}

fn start_of(s: &QueueScenario, id: usize) -> Result<Pose> {
    match s.start {
        StartSpec::Fixed(p) => Ok(p),
        StartSpec::Random => Err(Error::InvalidScenario(format!("scenario {id} has no fixed start"))),
    }
}

fn ratio(actions: usize, optimal: usize) -> f64 {
    if optimal == 0 {
        if actions == 0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        actions as f64 / optimal as f64
    }
}

/// Plan each scenario with the baseline (`w = 0`), with `cfg`, and with the
/// exact optimum at `cfg.w`. A failed plan yields a row with `success = 0`.
pub fn evaluate(scenarios: &[QueueScenario], seed: u64, dq: &DualQ, cfg: &PlannerConfig) -> Result<EvalReport> {
    let k_s = dq.reward.k_s;
    let mut rows = Vec::new();
    for (id, s) in scenarios.iter().enumerate() {
        let start = start_of(s, id)?;
        let oracles = [0.0, cfg.w].map(|w| social_optimal_path(s, start, w, k_s).ok());
        for (method, w) in [(Method::Baseline, 0.0), (Method::Hplsv, cfg.w)] {
            let pc = PlannerConfig { w, ..*cfg };
            let mut far = 0.0f64;
            let result = plan_traced(&s.map, &s.scene, start, dq, &pc, |e| {
                if s.scene.chebyshev_to_nearest(e.pose.cell()) > FAR_FIELD_CELLS {
                    far = far.max(e.max_social);
                }
            });
            let oracle = &oracles[usize::from(method == Method::Hplsv)];
            let oracle_actions = oracle.as_ref().map_or(0, |o| o.action_count());
            rows.push(match result {
                Ok(r) => EvalRow {
                    scenario: id,
                    seed,
                    method,
                    w,
                    success: true,
                    crossings: s.count_crossings(&r.poses, &r.actions),
                    actions: r.action_count(),
                    oracle_actions,
                    length_ratio: ratio(r.action_count(), oracle_actions),
                    expanded: r.expanded,
                    far_field_max: far,
                },
                Err(Error::NoPath { expanded, .. }) => EvalRow {
                    scenario: id,
                    seed,
                    method,
                    w,
                    success: false,
                    crossings: 0,
                    actions: 0,
                    oracle_actions,
                    length_ratio: f64::NAN,
                    expanded,
                    far_field_max: far,
                },
                Err(e) => return Err(e),
            });
        }
        let oracle = &oracles[1];
        rows.push(EvalRow {
            scenario: id,
            seed,
            method: Method::Oracle,
            w: cfg.w,
            success: oracle.is_some(),
            crossings: oracle.as_ref().map_or(0, |o| o.crossings),
            actions: oracle.as_ref().map_or(0, |o| o.action_count()),
            oracle_actions: oracle.as_ref().map_or(0, |o| o.action_count()),
            length_ratio: if oracle.is_some() { 1.0 } else { f64::NAN },
            expanded: 0,
            far_field_max: 0.0,
        });
    }
    Ok(EvalReport { rows })
}

pub fn training_log_header() -> &'static str {
    "episode,return,success,crossings,steps\n"
}

pub fn training_log_row(e: &EpisodeStats) -> String {
    format!(
        "{},{:.6},{},{},{}\n",
        e.episode,
        e.task_return,
        u8::from(e.success),
        e.crossings,
        e.steps
    )
}
