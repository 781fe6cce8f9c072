use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use cvsheet_core::evolution::{solve_nonlinear, write_trajectory_csv, RunSummary};
use cvsheet_core::harness::{
    continuous_dependence_study, run_illposed_probe, run_resolution_study, run_triangulation,
    write_rows, ExperimentConfig, Manifest, DEPENDENCE_CSV_HEADER, ILLPOSED_CSV_HEADER,
    RESOLUTION_CSV_HEADER, TRIANGULATION_CSV_HEADER,
};
use cvsheet_core::lab::{run_campaign, write_samples_csv, Campaign, Inequality, Verdict};
use cvsheet_core::FormTag;

const MEAN_TOLERANCE: f64 = 1e-12;
const FORM_TOLERANCE: f64 = 1e-8;
const HARD_TOLERANCE: f64 = 1e-12;
const GROWTH_CEILING: f64 = 1e6;

#[derive(Parser)]
#[command(
    name = "cvsheet",
    version,
    about = "Experiments for the current-vortex-sheet amplitude equation"
)]
struct Cli {
    /// Configuration file; defaults apply when omitted.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Overrides `output_dir` from the configuration.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the base problem and write its trajectory.
    Solve {
        #[arg(long, default_value = "C")]
        form: FormTag,
    },
    /// Solve the base problem in all three forms and compare at the horizon.
    EquivCheck,
    /// Randomised inequality campaigns.
    IneqLab {
        /// Inequality id, or `all`.
        #[arg(long, default_value = "all")]
        inequality: String,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Continuous dependence on the data along the perturbation family.
    ContDep,
    /// Regularisation triangulation over `n_list × epsilon_list`.
    Triangulate {
        /// Restrict to one `n`.
        #[arg(long)]
        n: Option<usize>,
        /// Restrict to one `ε`.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Growth rates on a background violating the margin.
    Illposed,
    /// Spectral convergence of the base run over `K_levels`.
    Resolution,
    /// Print the configuration template.
    Template,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve { .. } => "solve",
            Command::EquivCheck => "equiv-check",
            Command::IneqLab { .. } => "ineq-lab",
            Command::ContDep => "cont-dep",
            Command::Triangulate { .. } => "triangulate",
            Command::Illposed => "illposed",
            Command::Resolution => "resolution",
            Command::Template => "template",
        }
    }
}

/// Files written by a command and whether its checks held.
struct Run {
    outputs: Vec<String>,
    passed: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("invariant check failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: Cli) -> Result<bool> {
    if let Command::Template = cli.command {
        print!("{}", ExperimentConfig::template());
        return Ok(true);
    }
    let mut cfg = match &cli.config {
        Some(path) => {
            ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(dir) = cli.output {
        cfg.output_dir = dir;
    }
    let dir = cfg.output_dir.clone();
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;

    let run = match &cli.command {
        Command::Solve { form } => solve(&cfg, &dir, *form)?,
        Command::EquivCheck => equiv_check(&cfg, &dir)?,
        Command::IneqLab {
            inequality,
            samples,
        } => ineq_lab(&cfg, &dir, inequality, *samples)?,
        Command::ContDep => cont_dep(&cfg, &dir)?,
        Command::Triangulate { n, epsilon } => triangulate(&cfg, &dir, *n, *epsilon)?,
        Command::Illposed => illposed(&cfg, &dir)?,
        Command::Resolution => resolution(&cfg, &dir)?,
        Command::Template => unreachable!(),
    };

    let mut manifest = Manifest::new(cli.command.name(), &cfg);
    manifest.tool = env!("CARGO_PKG_NAME").into();
    manifest.outputs = run.outputs;
    manifest.invariants_passed = run.passed;
    manifest.write(&dir)?;
    println!(
        "{}: {} ({})",
        cli.command.name(),
        if run.passed {
            "invariants hold"
        } else {
            "INVARIANT VIOLATED"
        },
        dir.display()
    );
    Ok(run.passed)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(create(dir, name)?, value)?;
    Ok(())
}

fn e(v: f64) -> String {
    format!("{v:e}")
}

fn solve(cfg: &ExperimentConfig, dir: &Path, form: FormTag) -> Result<Run> {
    let solver = cvsheet_core::SolverConfig {
        form,
        ..cfg.solver.clone()
    };
    let (u, v) = cfg.base_data();
    let start = Instant::now();
    let result = solve_nonlinear(&solver, &u, &v);
    let summary = RunSummary::from_result(&solver, &result, start.elapsed().as_secs_f64());
    write_json(dir, "summary.json", &summary)?;
    let traj = result.context("base solve")?;
    write_trajectory_csv(&traj, create(dir, "trajectory.csv")?)?;
    Ok(Run {
        outputs: vec!["trajectory.csv".into(), "summary.json".into()],
        passed: traj.max_abs_mean() <= MEAN_TOLERANCE,
    })
}

#[derive(Serialize)]
struct EquivSummary {
    horizon: f64,
    max_gap: f64,
    tolerance: f64,
}

fn equiv_check(cfg: &ExperimentConfig, dir: &Path) -> Result<Run> {
    let (u, v) = cfg.base_data();
    let mut finals = Vec::new();
    for form in FormTag::ALL {
        let solver = cvsheet_core::SolverConfig {
            form,
            ..cfg.solver.clone()
        };
        let traj =
            solve_nonlinear(&solver, &u, &v).with_context(|| format!("form {form} solve"))?;
        finals.push((form, traj.last().clone()));
    }
    let mut rows = Vec::new();
    let mut max_gap: f64 = 0.0;
    for i in 0..finals.len() {
        for j in i + 1..finals.len() {
            let gap = (&finals[i].1.varphi - &finals[j].1.varphi).sobolev_norm(3.0);
            max_gap = max_gap.max(gap);
            rows.push(vec![
                finals[i].0.to_string(),
                finals[j].0.to_string(),
                e(finals[i].1.t),
                e(gap),
            ]);
        }
    }
    write_rows(
        create(dir, "equiv.csv")?,
        &["form_a", "form_b", "t", "gap_H3"],
        rows,
    )?;
    write_json(
        dir,
        "summary.json",
        &EquivSummary {
            horizon: finals[0].1.t,
            max_gap,
            tolerance: FORM_TOLERANCE,
        },
    )?;
    Ok(Run {
        outputs: vec!["equiv.csv".into(), "summary.json".into()],
        passed: max_gap <= FORM_TOLERANCE,
    })
}

fn ineq_lab(cfg: &ExperimentConfig, dir: &Path, which: &str, samples: usize) -> Result<Run> {
    let list: Vec<Inequality> = if which == "all" {
        Inequality::ALL.to_vec()
    } else {
        vec![which.parse().map_err(|m: String| anyhow::anyhow!(m))?]
    };
    let mut outputs = Vec::new();
    let mut reports = Vec::new();
    let mut passed = true;
    for ineq in list {
        let campaign = Campaign::new(ineq, samples, cfg.k_levels.clone(), cfg.seed);
        let outcome = run_campaign(&campaign).with_context(|| format!("campaign {ineq}"))?;
        let name = format!("samples_{}.csv", ineq.id());
        write_samples_csv(ineq, &outcome.samples, create(dir, &name)?)?;
        outputs.push(name);
        let r = &outcome.report;
        passed &= r.degenerate_violations == 0 && r.verdict == Verdict::Bounded;
        if ineq.is_hard() {
            passed &= r.max_ratio <= 1.0 + HARD_TOLERANCE;
        }
        reports.push(outcome.report);
    }
    write_json(dir, "summary.json", &reports)?;
    outputs.push("summary.json".into());
    Ok(Run { outputs, passed })
}

fn cont_dep(cfg: &ExperimentConfig, dir: &Path) -> Result<Run> {
    let study = continuous_dependence_study(cfg)?;
    write_trajectory_csv(&study.base, create(dir, "trajectory_base.csv")?)?;
    let mut outputs = vec!["trajectory_base.csv".to_string()];
    for (n, traj) in &study.perturbed {
        let name = format!("trajectory_n{n}.csv");
        write_trajectory_csv(traj, create(dir, &name)?)?;
        outputs.push(name);
    }
    let horizon = study.horizon();
    write_rows(
        create(dir, "dependence.csv")?,
        &DEPENDENCE_CSV_HEADER,
        study.records.iter().map(|r| r.row(horizon)),
    )?;
    write_json(dir, "summary.json", &study.records)?;
    outputs.extend(["dependence.csv".into(), "summary.json".into()]);
    let passed = study.records.iter().all(|r| {
        r.weak_below_strong
            && r.strong_distance.is_finite()
            && r.weak_distance.is_finite()
            && r.strong_distance >= 0.0
    });
    Ok(Run { outputs, passed })
}

/// One row of the `(ε′, ε, n₀)` table: the worst triangulated distance over
/// `n ≥ n₀` at this `ε`.
#[derive(Serialize)]
struct SelectionRow {
    epsilon: f64,
    n0: usize,
    worst_distance: f64,
}

fn triangulate(
    cfg: &ExperimentConfig,
    dir: &Path,
    n: Option<usize>,
    epsilon: Option<f64>,
) -> Result<Run> {
    let ns = n.map(|n| vec![n]).unwrap_or_else(|| cfg.n_list.clone());
    let eps = epsilon
        .map(|e| vec![e])
        .unwrap_or_else(|| cfg.epsilon_list.clone());
    if ns.is_empty() || eps.is_empty() {
        bail!("nothing to triangulate: empty n or epsilon list");
    }
    let mut reports = Vec::new();
    for &e in &eps {
        for &n in &ns {
            reports.push(
                run_triangulation(cfg, n, e).with_context(|| format!("n = {n}, epsilon = {e}"))?,
            );
        }
    }
    write_rows(
        create(dir, "triangulation.csv")?,
        &TRIANGULATION_CSV_HEADER,
        reports.iter().map(|r| r.row()),
    )?;

    let mut selection = Vec::new();
    for &e in &eps {
        for &n0 in &ns {
            let worst = reports
                .iter()
                .filter(|r| r.epsilon == e && r.n >= n0)
                .map(|r| r.triangulated_distance)
                .fold(0.0, f64::max);
            selection.push(SelectionRow {
                epsilon: e,
                n0,
                worst_distance: worst,
            });
        }
    }
    #[derive(Serialize)]
    struct Summary<'a> {
        reports: &'a [cvsheet_core::harness::TriangulationReport],
        selection: Vec<SelectionRow>,
    }
    write_json(
        dir,
        "summary.json",
        &Summary {
            reports: &reports,
            selection,
        },
    )?;
    Ok(Run {
        outputs: vec!["triangulation.csv".into(), "summary.json".into()],
        passed: reports.iter().all(|r| r.triangle_ok),
    })
}

fn illposed(cfg: &ExperimentConfig, dir: &Path) -> Result<Run> {
    let probe = &cfg.illposed;
    let rates = run_illposed_probe(cfg.solver.mu, probe.amplitude, &probe.k_list, probe.t_short)?;
    write_rows(
        create(dir, "illposed.csv")?,
        &ILLPOSED_CSV_HEADER,
        rates.iter().map(|r| r.row()),
    )?;
    write_json(dir, "summary.json", &rates)?;
    let passed = rates.iter().all(|r| {
        r.rate.is_finite() && r.growth_factor.is_finite() && r.growth_factor <= GROWTH_CEILING
    });
    Ok(Run {
        outputs: vec!["illposed.csv".into(), "summary.json".into()],
        passed,
    })
}

fn resolution(cfg: &ExperimentConfig, dir: &Path) -> Result<Run> {
    let rows = run_resolution_study(cfg, &cfg.k_levels)?;
    write_rows(
        create(dir, "resolution.csv")?,
        &RESOLUTION_CSV_HEADER,
        rows.iter().map(|r| r.row()),
    )?;
    write_json(dir, "summary.json", &rows)?;
    Ok(Run {
        outputs: vec!["resolution.csv".into(), "summary.json".into()],
        passed: rows.iter().all(|r| r.distance.is_finite()),
    })
}
