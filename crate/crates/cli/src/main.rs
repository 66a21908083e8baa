use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rtnua::{run_batch, run_episode_with, BatchConfig, ControllerKind, EpisodeOptions, EpisodeResult, Mode, ScenarioConfig, SizePreset, ATTRITION_GRID};
use rtnua_cli::grid::{self, Axis, Score};
use rtnua_cli::report::{self, AggregateRow, EpisodeRow, SeriesRow};
use rtnua_cli::scenario::{build_config, pct, Job};
use rtnua_cli::svg;
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "rtnua", version, about = "Relay-swarm task networking under attrition")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration over a range of seeds.
    Run(RunArgs),
    /// Run every preset and attrition combination for both controllers.
    Sweep(SweepArgs),
    /// Run the standard ablations of one configuration.
    Ablate(AblateArgs),
    /// Render SVG frames of one episode.
    Frames(FramesArgs),
    /// Exhaustive grid search maximizing mean TU1.
    Gridsearch(GridArgs),
    /// Plot mean per-tick counts from a series CSV.
    Plot(PlotArgs),
}

#[derive(Args)]
struct Base {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    mode: Option<Mode>,
    /// Extra `key=value` override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct Single {
    #[command(flatten)]
    base: Base,
    /// Problem size: xs, s, m, l or xl.
    #[arg(long)]
    preset: Option<SizePreset>,
    /// Per-tick attrition in percent.
    #[arg(long)]
    attrition: Option<f64>,
}

impl Single {
    fn config(&self) -> Result<ScenarioConfig> {
        build_config(self.base.config.as_deref(), self.preset, self.attrition, self.base.mode, &self.base.overrides)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    scenario: Single,
    /// Controller to run; both when omitted.
    #[arg(long)]
    controller: Option<ControllerKind>,
    /// Number of seeds, starting at 0.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    base: Base,
    /// Comma-separated sizes; all when omitted.
    #[arg(long, value_delimiter = ',')]
    preset: Vec<SizePreset>,
    /// Comma-separated attrition rates in percent; the standard grid when omitted.
    #[arg(long, value_delimiter = ',')]
    attrition: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    seeds: u64,
}

#[derive(Args)]
struct AblateArgs {
    #[command(flatten)]
    scenario: Single,
    #[arg(long, default_value_t = ControllerKind::Phireman)]
    controller: ControllerKind,
    #[arg(long, default_value_t = 100)]
    seeds: u64,
}

#[derive(Args)]
struct FramesArgs {
    #[command(flatten)]
    scenario: Single,
    #[arg(long, default_value_t = ControllerKind::Phireman)]
    controller: ControllerKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_values_t = [0u64, 40, 80, 120, 160, 200])]
    ticks: Vec<u64>,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    scenario: Single,
    #[arg(long, default_value_t = ControllerKind::Phireman)]
    controller: ControllerKind,
    #[arg(long, default_value_t = 100)]
    seeds: u64,
    /// Swept parameter as `key=v1,v2,...`, repeatable.
    #[arg(long = "param", required = true)]
    params: Vec<Axis>,
}

#[derive(Args)]
struct PlotArgs {
    /// Series CSV written by `run`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    controller: Option<ControllerKind>,
    /// Keep only rows of this config id.
    #[arg(long)]
    config_id: Option<String>,
    /// Output SVG file.
    #[arg(long, default_value = "series.svg")]
    out: PathBuf,
}

fn main() {
    if let Err(e) = dispatch(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
        Command::Ablate(a) => ablate(a),
        Command::Frames(a) => frames(a),
        Command::Gridsearch(a) => gridsearch(a),
        Command::Plot(a) => plot(a),
    }
}

fn controllers(choice: Option<ControllerKind>) -> Vec<ControllerKind> {
    choice.map(|c| vec![c]).unwrap_or_else(|| ControllerKind::ALL.to_vec())
}

fn execute(jobs: &[Job], seeds: u64, controllers: &[ControllerKind]) -> Result<Vec<EpisodeResult>> {
    let batch: Vec<BatchConfig> = jobs.iter().map(|j| BatchConfig { id: j.id.clone(), config: j.config.clone() }).collect();
    let seeds: Vec<u64> = (0..seeds).collect();
    Ok(run_batch(&batch, &seeds, controllers)?)
}

fn out_dir(path: &Path) -> Result<&Path> {
    std::fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(path)
}

fn run(a: RunArgs) -> Result<()> {
    let job = Job::new(a.scenario.config()?);
    let results = execute(std::slice::from_ref(&job), a.seeds, &controllers(a.controller))?;
    let episodes = report::episode_rows(std::slice::from_ref(&job), &results);
    let aggregates = report::aggregate_rows(&episodes);
    let dir = out_dir(&a.scenario.base.out)?;
    report::write_csv(&dir.join("episodes.csv"), &episodes)?;
    report::write_csv(&dir.join("series.csv"), &report::series_rows(&results))?;
    report::write_csv(&dir.join("aggregate.csv"), &aggregates)?;
    print!("{}", report::format_aggregates(&aggregates));
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let presets = if a.preset.is_empty() { SizePreset::ALL.to_vec() } else { a.preset.clone() };
    let rates: Vec<f64> = if a.attrition.is_empty() { ATTRITION_GRID.iter().map(|p| pct(*p)).collect() } else { a.attrition.clone() };
    let mut jobs = Vec::new();
    for &size in &presets {
        for &rate in &rates {
            let cfg = build_config(a.base.config.as_deref(), Some(size), Some(rate), a.base.mode, &a.base.overrides)?;
            jobs.push(Job::new(cfg));
        }
    }
    let results = execute(&jobs, a.seeds, &ControllerKind::ALL)?;
    let episodes = report::episode_rows(&jobs, &results);
    let aggregates = report::aggregate_rows(&episodes);
    let deltas = report::delta_rows(&aggregates);
    let dir = out_dir(&a.base.out)?;
    report::write_csv(&dir.join("episodes.csv"), &episodes)?;
    report::write_csv(&dir.join("aggregate.csv"), &aggregates)?;
    report::write_csv(&dir.join("delta.csv"), &deltas)?;
    print!("{}", report::format_aggregates(&aggregates));
    println!("{:<14} {:>10} {:>10}", "config", "dTU1 pp", "dTU2 pp");
    for d in &deltas {
        println!("{:<14} {:>+10.2} {:>+10.2}", d.config_id, d.tu1_delta, d.tu2_delta);
    }
    Ok(())
}

#[derive(Serialize)]
struct AblationRow {
    variant: String,
    controller: ControllerKind,
    mode: Mode,
    n: usize,
    tu1_mean: f64,
    tu1_stderr: f64,
    tu2_mean: f64,
    tu2_stderr: f64,
}

fn ablate(a: AblateArgs) -> Result<()> {
    let base = if a.scenario.preset.is_none() && a.scenario.attrition.is_none() && a.scenario.base.config.is_none() {
        build_config(None, Some(SizePreset::S), Some(1.0), a.scenario.base.mode, &a.scenario.base.overrides)?
    } else {
        a.scenario.config()?
    };
    let variants: Vec<(&str, ScenarioConfig)> = vec![
        ("default", base.clone()),
        ("theta=0", ScenarioConfig { theta: 0.0, ..base.clone() }),
        ("nodes_only", ScenarioConfig { nodes_only: true, ..base.clone() }),
        ("v=0.1", ScenarioConfig { max_speed: 0.1, ..base.clone() }),
        ("v=0.2", ScenarioConfig { max_speed: 0.2, ..base.clone() }),
        ("sigma=0", ScenarioConfig { task_walk_sigma: 0.0, ..base.clone() }),
        ("sigma=0.2", ScenarioConfig { task_walk_sigma: 0.2, ..base.clone() }),
    ];
    let jobs: Vec<Job> = variants.into_iter().map(|(name, c)| Job::named(name, c)).collect();
    let results = execute(&jobs, a.seeds, &[a.controller])?;
    let aggregates = report::aggregate_rows(&report::episode_rows(&jobs, &results));
    let rows: Vec<AblationRow> = aggregates
        .iter()
        .map(|g: &AggregateRow| AblationRow {
            variant: g.config_id.clone(),
            controller: g.controller,
            mode: g.mode,
            n: g.n,
            tu1_mean: g.tu1_mean,
            tu1_stderr: g.tu1_stderr,
            tu2_mean: g.tu2_mean,
            tu2_stderr: g.tu2_stderr,
        })
        .collect();
    report::write_csv(&out_dir(&a.scenario.base.out)?.join("ablation.csv"), &rows)?;
    print!("{}", report::format_aggregates(&aggregates));
    Ok(())
}

fn frames(a: FramesArgs) -> Result<()> {
    let cfg = ScenarioConfig { seed: a.seed, ..a.scenario.config()? };
    if let Some(t) = a.ticks.iter().find(|&&t| t > cfg.horizon) {
        bail!("no snapshot at tick {t}; available ticks are 0..={}", cfg.horizon);
    }
    let job = Job::new(cfg.clone());
    let options = EpisodeOptions { snapshot_ticks: a.ticks.clone() };
    let result = run_episode_with(&cfg, a.controller, &job.id, &options)?;
    let dir = out_dir(&a.scenario.base.out)?;
    for snap in &result.snapshots {
        let path = dir.join(format!("frame_{:04}.svg", snap.tick));
        std::fs::write(&path, svg::render_frame(snap, cfg.field_half_width)).with_context(|| format!("writing {}", path.display()))?;
        println!("{}", path.display());
    }
    Ok(())
}

fn gridsearch(a: GridArgs) -> Result<()> {
    let base = if a.scenario.preset.is_none() && a.scenario.attrition.is_none() && a.scenario.base.config.is_none() {
        build_config(None, Some(SizePreset::S), Some(1.0), a.scenario.base.mode, &a.scenario.base.overrides)?
    } else {
        a.scenario.config()?
    };
    let with = |assignment: &[(String, String)]| -> Result<ScenarioConfig> {
        let mut c = base.clone();
        for (k, v) in assignment {
            c = c.with_override(k, v).with_context(|| format!("{k}={v}"))?;
        }
        Ok(c)
    };
    let (points, best) = grid::search(&a.params, |assignment| {
        let job = Job::named("grid", with(assignment)?);
        let results = execute(std::slice::from_ref(&job), a.seeds, &[a.controller])?;
        let rows: Vec<EpisodeRow> = report::episode_rows(std::slice::from_ref(&job), &results);
        let g = &report::aggregate_rows(&rows)[0];
        eprintln!("{:?} -> TU1 {:.2}", assignment, g.tu1_mean);
        Ok(Score { objective: g.tu1_mean, stderr: g.tu1_stderr })
    })?;

    let dir = out_dir(&a.scenario.base.out)?;
    let mut w = csv::Writer::from_path(dir.join("grid_scores.csv"))?;
    let mut header: Vec<String> = a.params.iter().map(|p| p.key.clone()).collect();
    header.extend(["tu1_mean".to_string(), "tu1_stderr".to_string()]);
    w.write_record(&header)?;
    for p in &points {
        let mut rec: Vec<String> = p.assignment.iter().map(|(_, v)| v.clone()).collect();
        rec.push(p.score.objective.to_string());
        rec.push(p.score.stderr.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    let fitted = with(&points[best].assignment)?;
    std::fs::write(dir.join("fitted.cfg"), fitted.to_kv_string())?;
    println!("best {:?} with mean TU1 {:.2}", points[best].assignment, points[best].score.objective);
    Ok(())
}

fn plot(a: PlotArgs) -> Result<()> {
    let rows: Vec<SeriesRow> = report::read_csv(&a.input)?;
    let picked: Vec<SeriesRow> = rows
        .into_iter()
        .filter(|r| a.controller.map_or(true, |c| r.controller == c))
        .filter(|r| a.config_id.as_ref().map_or(true, |id| &r.config_id == id))
        .collect();
    if picked.is_empty() {
        bail!("no series rows in {} match the filters", a.input.display());
    }
    let episodes = picked.iter().filter(|r| r.tick == 0).count();
    let title = format!("{} ({episodes} episodes)", a.input.display());
    let svg = svg::render_series(&svg::mean_series(&picked), &title);
    if let Some(parent) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        out_dir(parent)?;
    }
    std::fs::write(&a.out, svg).with_context(|| format!("writing {}", a.out.display()))?;
    println!("{}", a.out.display());
    Ok(())
}
