use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use hplsv::eval::{self, Method};
use hplsv::learner::{self, TrainEvent};
use hplsv::oracle;
use hplsv::planner::{self, Normalization};
use hplsv::render::{self, Figure};
use hplsv::{generate, DualQ, Error, Pose, PlannerConfig, QueueScenario, RewardConfig, SocialTarget, StartSpec, TrainConfig};

#[derive(Parser)]
#[command(name = "hplsv", version, about = "Queue-aware path planning with a learned social value")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn task and social value tables.
    Train(TrainArgs),
    /// Plan a path on a scenario.
    Plan(PlanArgs),
    /// Compare baseline, learned and exact planners on generated scenarios.
    Eval(EvalArgs),
    /// Exact social values and their deviation from a model.
    Oracle(OracleArgs),
    /// Draw a scenario, its cost field and a planned path.
    Render(RenderArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Scenario file.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Train on N generated continuous-like scenarios.
    #[arg(long, value_name = "N")]
    generated: Option<usize>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Seed for generated scenarios (defaults to --seed).
    #[arg(long)]
    scenario_seed: Option<u64>,
    #[arg(long, default_value_t = 30_000)]
    episodes: usize,
    #[arg(long, default_value_t = 0.95)]
    gamma: f64,
    #[arg(long, default_value_t = 2)]
    person_slots: usize,
    #[arg(long, default_value = "max")]
    social_target: SocialTarget,
    #[arg(long)]
    out: PathBuf,
    /// Per-episode training log.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct PlanOpts {
    #[arg(long, default_value_t = 1.0)]
    w: f64,
    #[arg(long, default_value_t = 0.3)]
    kthresh: f64,
    /// Normalize social values by k_s/(1-gamma) instead of k_s.
    #[arg(long)]
    horizon_norm: bool,
}

impl PlanOpts {
    fn config(&self) -> PlannerConfig {
        PlannerConfig {
            w: self.w,
            k_thresh: self.kthresh,
            normalization: if self.horizon_norm {
                Normalization::Horizon
            } else {
                Normalization::Crossing
            },
            ..Default::default()
        }
    }
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Without a model the planner sees no social cost.
    #[arg(long)]
    model: Option<PathBuf>,
    #[command(flatten)]
    opts: PlanOpts,
    /// Also draw the result (.ppm plus .svg, or .txt for ASCII).
    #[arg(long)]
    render: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, value_name = "N")]
    generated: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    opts: PlanOpts,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Model to compare against; its gamma and k_s are used.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 0.95)]
    gamma: f64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    model: Option<PathBuf>,
    #[command(flatten)]
    opts: PlanOpts,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => train(a),
        Command::Plan(a) => plan(a),
        Command::Eval(a) => run_eval(a),
        Command::Oracle(a) => run_oracle(a),
        Command::Render(a) => run_render(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load_scenario(path: &Path) -> Result<QueueScenario> {
    hplsv::load_scenario(path).with_context(|| format!("loading scenario {}", path.display()))
}

fn load_model(path: &Path) -> Result<DualQ> {
    learner::load(path).with_context(|| format!("loading model {}", path.display()))
}

fn model_or_empty(path: Option<&Path>) -> Result<DualQ> {
    match path {
        Some(p) => load_model(p),
        None => Ok(DualQ::empty(Default::default(), 0.95, RewardConfig::default())),
    }
}

fn fixed_start(s: &QueueScenario) -> Result<Pose> {
    match s.start {
        StartSpec::Fixed(p) => Ok(p),
        StartSpec::Random => bail!("scenario has a random start; planning needs a fixed one"),
    }
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn train(a: TrainArgs) -> Result<ExitCode> {
    let scenarios = match (&a.source.scenario, a.source.generated) {
        (Some(p), _) => vec![load_scenario(p)?],
        (None, Some(n)) => generate::continuous_like(a.scenario_seed.unwrap_or(a.seed), n)?,
        (None, None) => unreachable!("clap enforces one source"),
    };
    let mut cfg = TrainConfig::with_episodes(a.episodes);
    cfg.seed = a.seed;
    cfg.gamma = a.gamma;
    cfg.social_target = a.social_target;
    cfg.quantizer.person_slots = a.person_slots;

    let mut log = String::from(eval::training_log_header());
    let (mut successes, mut crossings) = (0usize, 0usize);
    let dq = learner::train_with(scenarios.as_slice(), &cfg, &RewardConfig::default(), |e| {
        if let TrainEvent::Episode(stats) = e {
            successes += usize::from(stats.success);
            crossings += stats.crossings;
            log.push_str(&eval::training_log_row(&stats));
        }
    })?;
    learner::save(&dq, &a.out)?;
    if let Some(p) = &a.log {
        write(p, &log)?;
    }
    println!(
        "episodes {} successes {} crossings {} social keys {}",
        a.episodes,
        successes,
        crossings,
        dq.q_social.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn plan(a: PlanArgs) -> Result<ExitCode> {
    let s = load_scenario(&a.scenario)?;
    let dq = model_or_empty(a.model.as_deref())?;
    let start = fixed_start(&s)?;
    let cfg = a.opts.config();
    let r = match planner::plan_scenario(&s, start, &dq, &cfg) {
        Ok(r) => r,
        Err(e @ Error::NoPath { .. }) => {
            println!("{e}");
            return Ok(ExitCode::from(1));
        }
        Err(e) => return Err(e.into()),
    };
    let mut out = std::io::stdout().lock();
    writeln!(out, "step x y heading action c_s")?;
    for (i, p) in r.poses.iter().enumerate() {
        let (action, c) = match r.actions.get(i) {
            Some(act) => (act.code().to_string(), format!("{:.6}", r.per_step_c_s[i])),
            None => ("-".into(), "-".into()),
        };
        writeln!(out, "{i} {} {} {} {action} {c}", p.x, p.y, p.heading.letter())?;
    }
    writeln!(
        out,
        "actions {} g_n {} g_s {:.6} expanded {} crossings {}",
        r.action_count(),
        r.total_g_n,
        r.total_g_s,
        r.expanded,
        r.crossings.unwrap_or(0)
    )?;
    if let Some(path) = &a.render {
        let field = planner::cost_field(&s.map, &s.scene, &dq, &cfg);
        let fig = Figure {
            start: Some(start),
            path: Some(&r.poses),
            cost_field: Some(&field),
            ..Figure::new(&s)
        };
        emit_figure(&fig, path)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn run_eval(a: EvalArgs) -> Result<ExitCode> {
    let dq = load_model(&a.model)?;
    let scenarios = generate::continuous_like(a.seed, a.generated)?;
    let report = eval::evaluate(&scenarios, a.seed, &dq, &a.opts.config())?;
    write(&a.out, report.to_csv())?;
    for m in [Method::Baseline, Method::Hplsv, Method::Oracle] {
        let s = eval::summarize(report.method(m));
        println!(
            "{:<8} success {}/{} crossing-free {} mean length ratio {:.4}",
            m.name(),
            s.successes,
            s.scenarios,
            s.crossing_free,
            s.mean_length_ratio
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn run_oracle(a: OracleArgs) -> Result<ExitCode> {
    let s = load_scenario(&a.scenario)?;
    let model = a.model.as_deref().map(load_model).transpose()?;
    let (gamma, k_s) = match &model {
        Some(dq) => (dq.gamma, dq.reward.k_s),
        None => (a.gamma, RewardConfig::default().k_s),
    };
    let values = oracle::social_value_iteration(&s, gamma, k_s, a.tol)?;
    let mut csv = String::from("x,y,heading,action,q\n");
    for i in 0..s.map.pose_count() {
        let p = s.map.pose_at(i);
        if !s.map.is_free(p.cell()) || p.cell() == s.goal() {
            continue;
        }
        for act in hplsv::Action::ALL {
            csv.push_str(&format!(
                "{},{},{},{},{:.9}\n",
                p.x,
                p.y,
                p.heading.letter(),
                act.code(),
                values.get(&s.map, p, act)
            ));
        }
    }
    write(&a.out, csv)?;
    println!(
        "sweeps {} bellman residual {:.3e}",
        values.iterations,
        oracle::bellman_residual(&s, &values)
    );
    if let Some(dq) = &model {
        let projected = oracle::project(&s, &values, &dq.quantizer);
        let bound = k_s / (1.0 - gamma);
        for (name, agg) in [("max", &projected.max), ("mean", &projected.mean)] {
            let d = oracle::deviation(dq, agg);
            println!(
                "{name}-aggregated deviation: max {:.4} ({:.4} of bound) mean {:.4} ({:.4} of bound) keys unseen {}",
                d.max_abs,
                d.max_abs / bound,
                d.mean_abs,
                d.mean_abs / bound,
                d.unseen_keys
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run_render(a: RenderArgs) -> Result<ExitCode> {
    let s = load_scenario(&a.scenario)?;
    let dq = model_or_empty(a.model.as_deref())?;
    let start = fixed_start(&s).ok();
    let cfg = if a.model.is_some() {
        a.opts.config()
    } else {
        PlannerConfig::baseline()
    };
    let path = start.and_then(|p| planner::plan(&s.map, &s.scene, p, &dq, &cfg).ok());
    let field = a
        .model
        .as_ref()
        .map(|_| planner::cost_field(&s.map, &s.scene, &dq, &cfg));
    let fig = Figure {
        start,
        path: path.as_ref().map(|r| r.poses.as_slice()),
        cost_field: field.as_deref(),
        ..Figure::new(&s)
    };
    emit_figure(&fig, &a.out)?;
    Ok(ExitCode::SUCCESS)
}

/// `.txt` gets ASCII; anything else gets a PPM at the path plus an SVG next to it.
fn emit_figure(fig: &Figure, path: &Path) -> Result<()> {
    if path.extension().is_some_and(|e| e == "txt") {
        return write(path, render::to_ascii(fig));
    }
    write(path, render::to_ppm(fig))?;
    write(&path.with_extension("svg"), render::to_svg(fig))
}
