//! `lqgpbe`: load a game config, solve or verify it, simulate it, and write
//! plot-ready files into an output directory.
//!
//! Exit status is the only success signal: 0 on success, 1 on any error, 2
//! when a solve did not converge or a discrete candidate was not certified
//! (files are still written in both cases).

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lqg_equilibrium::{solve_centralized, solve_equilibrium, Solution, ValueFn};
use lqg_filter::{forward_pass, Trajectory};
use lqg_sim::{filter_consistency_check, simulate, ConsistencyReport, RolloutPlan, SimConfig, Summary, TrajectoryRecord};
use pbe_core::strategy::{profile_from_records, profile_to_records, StrategyRecord};
use pbe_core::{load_spec, LoadedConfig, LqgGameSpec, Mat, Method, Profile};
use pbe_discrete::{oracle_report, search_equilibrium, verify_equilibrium, Caps, OracleReport, ThetaEntry, ThetaPolicy, VerificationReport};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

/// Largest oracle deviation accepted by `verify-discrete`.
pub const ORACLE_TOL: f64 = 1e-12;

/// z-score threshold of the `simulate --check` filter diagnostics.
pub const CHECK_Z: f64 = 3.0;

#[derive(Parser, Debug)]
#[command(name = "lqgpbe", version, about = "Structured equilibria of dynamic games with private signals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve an LQG game: strategies.json, values.json, iterations.csv, public_trajectory.csv.
    Solve(Common),
    /// Monte Carlo play of the solved (or supplied) strategies: summary.json.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Play these strategies (a strategies.json written by `solve`) instead of solving.
        #[arg(long)]
        strategies: Option<PathBuf>,
        /// Also write the first N trajectories to trajectories.csv.
        #[arg(long, value_name = "N")]
        dump: Option<usize>,
        /// Add the filter consistency diagnostics to summary.json.
        #[arg(long)]
        check: bool,
    },
    /// Search and certify a discrete game: verification_report.json.
    VerifyDiscrete(Common),
    /// Game value against the centralized team optimum: comparison.csv.
    CompareCentralized {
        #[command(flatten)]
        common: Common,
        /// Add Monte Carlo estimates of the game value.
        #[arg(long)]
        mc: bool,
    },
    /// comparison.csv for horizons 1..=T_max of the config's game.
    SweepHorizon {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "T_MAX")]
        t_max: usize,
        #[arg(long)]
        mc: bool,
    },
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "N")]
    pub iters: Option<usize>,
    #[arg(long, value_name = "X")]
    pub tol: Option<f64>,
    #[arg(long, value_name = "X")]
    pub damping: Option<f64>,
    #[arg(long, value_name = "N")]
    pub trajectories: Option<usize>,
    #[arg(long)]
    pub inner_fixed_point: bool,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum MethodArg {
    Lagged,
    BackwardNewton,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Lagged => Method::Lagged,
            MethodArg::BackwardNewton => Method::BackwardNewton,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Results written but not converged / not certified.
    Flagged,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Success => 0,
            Outcome::Flagged => 2,
        }
    }

    fn and(self, ok: bool) -> Self {
        if ok {
            self
        } else {
            Outcome::Flagged
        }
    }
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct StrategyFile {
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    pub method: Method,
    pub strategies: Vec<StrategyRecord>,
}

#[derive(Serialize, Debug)]
struct StageValue {
    t: usize,
    player: usize,
    #[serde(flatten)]
    value: ValueFn,
}

#[derive(Serialize, Debug)]
struct ValuesFile {
    /// Sum over players of expected total reward, divided by the horizon.
    game_value_per_time: f64,
    player_values: Vec<f64>,
    /// Value of player i at stage t as a quadratic in `[v̂^i_t; f_t]`.
    value_functions: Vec<StageValue>,
}

#[derive(Serialize, Debug)]
pub struct SummaryFile {
    #[serde(flatten)]
    pub summary: Summary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub consistency: Option<ConsistencyReport>,
}

#[derive(Serialize, Debug)]
struct DiscreteReport {
    certified: bool,
    oracle_tolerance: f64,
    max_oracle_deviation: f64,
    verification: VerificationReport,
    oracle: Vec<OracleReport>,
    candidate: Vec<ThetaEntry>,
}

/// Builds the global rayon pool from `LQGPBE_THREADS` when set.
pub fn configure_threads() -> anyhow::Result<()> {
    let Ok(v) = std::env::var("LQGPBE_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().with_context(|| format!("LQGPBE_THREADS = {v:?} is not a thread count"))?;
    if n == 0 {
        bail!("LQGPBE_THREADS must be at least 1");
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("building the thread pool")?;
    Ok(())
}

pub fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    match &cli.command {
        Command::Solve(c) => solve_cmd(c),
        Command::Simulate { common, strategies, dump, check } => simulate_cmd(common, strategies.as_deref(), *dump, *check),
        Command::VerifyDiscrete(c) => verify_cmd(c),
        Command::CompareCentralized { common, mc } => {
            let cfg = load(common)?;
            let spec = cfg.lqg()?.clone();
            compare_cmd(common, &cfg, &[spec], *mc)
        }
        Command::SweepHorizon { common, t_max, mc } => {
            if *t_max == 0 {
                bail!("--t-max must be at least 1");
            }
            let cfg = load(common)?;
            let spec = cfg.lqg()?;
            let specs = (1..=*t_max).map(|t| spec.with_horizon(t)).collect::<Result<Vec<_>, _>>()?;
            compare_cmd(common, &cfg, &specs, *mc)
        }
    }
}

fn load(c: &Common) -> anyhow::Result<LoadedConfig> {
    let mut cfg = load_spec(&c.config, None).with_context(|| format!("loading {}", c.config.display()))?;
    let r = &mut cfg.run;
    if let Some(x) = c.seed {
        r.master_seed = x;
    }
    if let Some(x) = c.iters {
        r.max_outer_iters = x;
    }
    if let Some(x) = c.tol {
        r.convergence_tol = x;
    }
    if let Some(x) = c.damping {
        r.damping = x;
    }
    if let Some(x) = c.trajectories {
        r.num_trajectories = x;
    }
    if c.inner_fixed_point {
        r.inner_fixed_point = true;
    }
    if let Some(m) = c.method {
        r.method = m.into();
    }
    r.validate()?;
    fs::create_dir_all(&c.out).with_context(|| format!("creating {}", c.out.display()))?;
    write_json(&c.out.join("config.json"), &cfg.to_json())?;
    Ok(cfg)
}

/// 17 significant digits, '.' decimal.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn csv_writer(path: &Path) -> anyhow::Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))
}

fn warn_unconverged(sol: &Solution, what: &str) {
    if !sol.converged {
        eprintln!(
            "warning: {what} did not converge after {} iterations (residual {:e})",
            sol.iterations, sol.residual
        );
    }
}

fn solve_cmd(c: &Common) -> anyhow::Result<Outcome> {
    let cfg = load(c)?;
    let spec = cfg.lqg()?;
    let sol = solve_equilibrium(spec, &cfg.run)?;
    warn_unconverged(&sol, "solve");
    write_solution(&c.out, spec, &cfg, &sol)?;
    Ok(Outcome::Success.and(sol.converged))
}

fn write_solution(out: &Path, spec: &LqgGameSpec, cfg: &LoadedConfig, sol: &Solution) -> anyhow::Result<()> {
    let strategies = StrategyFile {
        converged: sol.converged,
        iterations: sol.iterations,
        residual: sol.residual,
        method: cfg.run.method,
        strategies: profile_to_records(&sol.profile),
    };
    write_json(&out.join("strategies.json"), &strategies)?;

    let mut value_functions = Vec::new();
    for (t, stage) in sol.values.iter().enumerate() {
        for (i, q) in stage.iter().enumerate() {
            value_functions.push(StageValue { t: t + 1, player: i + 1, value: ValueFn::from_quad(q) });
        }
    }
    let values = ValuesFile {
        game_value_per_time: sol.game_value(spec),
        player_values: sol.player_values(spec),
        value_functions,
    };
    write_json(&out.join("values.json"), &values)?;

    let mut w = csv_writer(&out.join("iterations.csv"))?;
    w.write_record(["k", "epsilon"])?;
    for r in &sol.log {
        w.write_record([r.k.to_string(), fmt_f64(r.epsilon)])?;
    }
    w.flush()?;

    write_public_trajectory(&out.join("public_trajectory.csv"), spec, &sol.trajectory)
}

/// Long format: one row per matrix entry. `player` is empty for public
/// quantities; rows and columns are one-based.
fn write_public_trajectory(path: &Path, spec: &LqgGameSpec, tr: &Trajectory) -> anyhow::Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["t", "quantity", "player", "row", "col", "value"])?;
    let mut put = |t: usize, q: &str, player: Option<usize>, m: &Mat| -> anyhow::Result<()> {
        let p = player.map_or(String::new(), |i| (i + 1).to_string());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                w.write_record([(t + 1).to_string(), q.to_string(), p.clone(), (r + 1).to_string(), (c + 1).to_string(), fmt_f64(m[(r, c)])])?;
            }
        }
        Ok(())
    };
    let nv = spec.state_dim;
    for (t, s) in tr.stages.iter().enumerate() {
        for i in 0..spec.num_players {
            put(t, "sigma_v", Some(i), &s.sigma_v(i, nv))?;
            put(t, "E", Some(i), &s.e_block(i, nv))?;
        }
        for i in 0..spec.num_players {
            put(t, "sigma_filt", Some(i), &s.sigma_filt[i])?;
            put(t, "sigma_pred", Some(i), &s.sigma_pred[i])?;
        }
        put(t, "sigma_tilde_filt", None, &s.sigma_tilde_filt)?;
        put(t, "sigma_tilde_pred", None, &s.sigma_tilde_pred)?;
    }
    w.flush()?;
    Ok(())
}

fn read_strategies(path: &Path, spec: &LqgGameSpec) -> anyhow::Result<Profile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: StrategyFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(profile_from_records(&file.strategies, spec)?)
}

fn simulate_cmd(c: &Common, strategies: Option<&Path>, dump: Option<usize>, check: bool) -> anyhow::Result<Outcome> {
    let cfg = load(c)?;
    let spec = cfg.lqg()?;
    let (profile, outcome) = match strategies {
        Some(p) => (read_strategies(p, spec)?, Outcome::Success),
        None => {
            let sol = solve_equilibrium(spec, &cfg.run)?;
            warn_unconverged(&sol, "solve");
            (sol.profile, Outcome::Success.and(sol.converged))
        }
    };
    let forward = forward_pass(spec, &profile, cfg.run.pinv_tol)?;
    let sim_cfg = SimConfig {
        master_seed: cfg.run.master_seed,
        num_trajectories: cfg.run.num_trajectories,
        keep_records: check || dump.is_some(),
    };
    let out = simulate(&RolloutPlan::on_path(spec, &profile, &forward), &sim_cfg);
    let consistency = check.then(|| filter_consistency_check(spec, &profile, &forward, &out.records, CHECK_Z));
    if let Some(n) = dump {
        write_trajectories(&c.out.join("trajectories.csv"), spec, &out.records[..n.min(out.records.len())])?;
    }
    let passed = consistency.as_ref().map_or(true, |r| r.passed);
    if !passed {
        eprintln!("warning: filter consistency check failed at {CHECK_Z} standard errors");
    }
    write_json(&c.out.join("summary.json"), &SummaryFile { summary: out.summary, consistency })?;
    Ok(outcome)
}

fn write_trajectories(path: &Path, spec: &LqgGameSpec, recs: &[TrajectoryRecord]) -> anyhow::Result<()> {
    let (n, nv, na) = (spec.num_players, spec.state_dim, spec.action_dim);
    let nf = recs.first().and_then(|r| r.f.first()).map_or(0, |f| f.len());
    let mut header = vec!["id".to_string(), "t".to_string()];
    header.extend((1..=nv).map(|k| format!("v_{k}")));
    for i in 1..=n {
        header.extend((1..=nv).map(|k| format!("x{i}_{k}")));
        header.extend((1..=nv).map(|k| format!("vhat{i}_{k}")));
        header.extend((1..=na).map(|k| format!("a{i}_{k}")));
    }
    header.extend((1..=nf).map(|k| format!("f_{k}")));
    header.extend((1..=n).map(|i| format!("r{i}")));
    let mut w = csv_writer(path)?;
    w.write_record(&header)?;
    for r in recs {
        for t in 0..spec.horizon {
            let mut row = vec![r.id.to_string(), (t + 1).to_string()];
            row.extend(r.v.iter().map(|x| fmt_f64(*x)));
            for i in 0..n {
                row.extend(r.x[t][i].iter().map(|x| fmt_f64(*x)));
                row.extend(r.vhat[t][i].iter().map(|x| fmt_f64(*x)));
                row.extend(r.a[t][i].iter().map(|x| fmt_f64(*x)));
            }
            row.extend(r.f[t].iter().map(|x| fmt_f64(*x)));
            row.extend(r.rewards[t].iter().map(|x| fmt_f64(*x)));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn verify_cmd(c: &Common) -> anyhow::Result<Outcome> {
    let cfg = load(c)?;
    let spec = cfg.discrete()?;
    let caps = Caps::default();
    let theta = search_equilibrium(spec, &caps)?;
    let verification = verify_equilibrium(spec, &theta, cfg.run.convergence_tol, &caps)?;
    let policy = ThetaPolicy::new(spec, &theta);
    let oracle = oracle_report(spec, &policy, &caps)?;
    if let Some(e) = policy.take_error() {
        return Err(e.into());
    }
    let max_oracle_deviation = oracle.iter().map(OracleReport::worst).fold(0.0, f64::max);
    let certified = verification.certified && max_oracle_deviation <= ORACLE_TOL;
    if !certified {
        eprintln!(
            "warning: not certified (gain {:e}, oracle deviation {:e})",
            verification.max_total_gain, max_oracle_deviation
        );
    }
    let report = DiscreteReport {
        certified,
        oracle_tolerance: ORACLE_TOL,
        max_oracle_deviation,
        verification,
        oracle,
        candidate: theta.to_entries(),
    };
    write_json(&c.out.join("verification_report.json"), &report)?;
    Ok(Outcome::Success.and(certified))
}

fn compare_cmd(c: &Common, cfg: &LoadedConfig, specs: &[LqgGameSpec], mc: bool) -> anyhow::Result<Outcome> {
    let mut outcome = Outcome::Success;
    let mut header = vec!["T", "J_game", "J_centralized"];
    if mc {
        header.extend(["J_game_mc", "J_game_mc_se"]);
    }
    let mut w = csv_writer(&c.out.join("comparison.csv"))?;
    w.write_record(&header)?;
    for spec in specs {
        let t = spec.horizon;
        let sol = solve_equilibrium(spec, &cfg.run).with_context(|| format!("solving the T = {t} game"))?;
        warn_unconverged(&sol, &format!("the T = {t} game"));
        outcome = outcome.and(sol.converged);
        let central = solve_centralized(spec, cfg.run.pinv_tol)?;
        let mut row = vec![t.to_string(), fmt_f64(sol.game_value(spec)), fmt_f64(central.value_per_time)];
        if mc {
            let sim_cfg = SimConfig { master_seed: cfg.run.master_seed, num_trajectories: cfg.run.num_trajectories, keep_records: false };
            let out = simulate(&RolloutPlan::on_path(spec, &sol.profile, &sol.trajectory), &sim_cfg);
            row.extend([fmt_f64(out.summary.per_time_total.mean), fmt_f64(out.summary.per_time_total.se)]);
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(outcome)
}
