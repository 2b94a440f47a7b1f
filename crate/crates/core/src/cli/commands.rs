use std::path::Path;

use super::config::{ConfigFile, Overrides, RunConfig};
use super::io::{parse_curve, write_curve, CurveRow, Format, Report};
use super::{Cli, CliError, Command, FitArgs, NonmarkArgs, TomoArgs};
use crate::decoherence::thickness_to_time;
use crate::dynamics::Stage;
use crate::estimation::fit::{fit_gaussian_death, fit_revival, FitResult};
use crate::estimation::tomography::{
    exact_frequencies, monte_carlo_errors, reconstruct, reconstruct_frequencies, simulate_tomography, Statistic,
    TomographyCounts,
};
use crate::linalg::{fidelity, trace_distance};
use crate::nonmarkov::{blp_for_pair, blp_optimize_pair, ProbePair};
use crate::state::ghz_mixed;
use crate::witnesses::entanglement_witness;

pub(super) fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let text = match &cli.command {
        Command::Scan => cmd_scan(&resolve(cli)?, cli.global.format)?,
        Command::Fit(args) => cmd_fit(args, cli.global.format)?,
        Command::Nonmark(args) => cmd_nonmark(&resolve(cli)?, args, cli.global.format)?,
        Command::Tomo(args) => cmd_tomo(&resolve(cli)?, args, cli.global.format)?,
    };
    emit(cli.global.output.as_deref(), &text)
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let g = &cli.global;
    let file = g
        .config
        .as_deref()
        .map(ConfigFile::load)
        .transpose()
        .map_err(CliError::Usage)?;
    let flags = Overrides {
        theta: g.theta,
        eta: g.eta,
        corr: g.corr,
        l_max: g.l_max,
        points: g.points,
        seed: g.seed,
    };
    RunConfig::resolve(file.as_ref(), g.preset, &flags).map_err(|e| CliError::Usage(e.to_string()))
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, text),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Usage(format!("cannot write output: {e}")))
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

pub fn cmd_scan(cfg: &RunConfig, format: Format) -> Result<String, CliError> {
    let curve = cfg.scanner()?.scan()?;
    let rows: Vec<CurveRow> = curve.iter().map(CurveRow::from_point).collect();
    Ok(write_curve(&rows, format))
}

fn stage_column(rows: &[CurveRow], column: &str, stage: Stage) -> (Vec<f64>, Vec<f64>) {
    rows.iter()
        .filter(|r| r.stage() == Some(stage))
        .map(|r| (r.l_total, r.value(column).expect("column checked")))
        .unzip()
}

fn add_fit(report: &mut Report, fit: &FitResult) {
    for (name, v) in &fit.params {
        report.num(name, *v);
        report.num(
            &format!("{name}_err"),
            fit.stderr.get(name).copied().unwrap_or(f64::NAN),
        );
    }
}

pub fn cmd_fit(args: &FitArgs, format: Format) -> Result<String, CliError> {
    let rows = parse_curve(&read_file(&args.input)?).map_err(CliError::Usage)?;
    let stage = Stage::parse(&args.stage).ok_or_else(|| CliError::Usage(format!("unknown stage {:?}", args.stage)))?;
    if args.column == "l_total" || rows.first().is_some_and(|r| r.value(&args.column).is_none()) {
        return Err(CliError::Usage(format!("no numeric column {:?}", args.column)));
    }
    if rows.is_empty() {
        return Err(CliError::Usage("curve file has no rows".into()));
    }
    let (dx, dy) = stage_column(&rows, &args.column, Stage::U1);
    let death = fit_gaussian_death(&dx, &dy)?;
    let mut report = Report::default();
    report.text("column", args.column.as_str()).text("stage", stage.label());
    let fit = match stage {
        Stage::U1 => death,
        Stage::U2 => {
            let (rx, ry) = stage_column(&rows, &args.column, Stage::U2);
            if rx.is_empty() {
                return Err(CliError::Usage("curve has no u2 rows".into()));
            }
            let l_max = dx.last().copied().unwrap_or(0.0);
            report.num("l_max", l_max);
            fit_revival(&rx, &ry, &death, l_max)?
        }
    };
    add_fit(&mut report, &fit);
    report
        .num("residual_norm", fit.residual_norm)
        .num("gradient_norm", fit.gradient_norm)
        .num("iterations", fit.iterations as f64)
        .text("converged", fit.converged.to_string());
    Ok(report.render(format))
}

pub fn cmd_nonmark(cfg: &RunConfig, args: &NonmarkArgs, format: Format) -> Result<String, CliError> {
    if args.samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    let best = blp_optimize_pair(&cfg.env, &cfg.schedule, args.samples, cfg.seed)?;
    let equatorial = blp_for_pair(&cfg.env, &cfg.schedule, ProbePair::EQUATORIAL)?;
    let pair = best.probe_pair.unwrap_or(ProbePair::EQUATORIAL);
    let mut report = Report::default();
    report
        .num("n_value", best.n_value)
        .num("equatorial_n_value", equatorial.n_value)
        .num("probe_polar", pair.polar)
        .num("probe_azimuth", pair.azimuth)
        .num("samples", args.samples as f64)
        .text("seed", cfg.seed.to_string())
        .num("t_max", thickness_to_time(cfg.schedule.l1_final(), &cfg.schedule))
        .num("revival_intervals", best.revival_intervals.len() as f64);
    for (i, (a, b)) in best.revival_intervals.iter().enumerate() {
        report
            .num(&format!("revival_{i}_start"), *a)
            .num(&format!("revival_{i}_end"), *b);
    }
    Ok(report.render(format))
}

pub fn cmd_tomo(cfg: &RunConfig, args: &TomoArgs, format: Format) -> Result<String, CliError> {
    if args.shots == 0 {
        return Err(CliError::Usage("--shots must be at least 1".into()));
    }
    if !(args.thickness >= 0.0) {
        return Err(CliError::Usage("--thickness must be nonnegative".into()));
    }
    let ideal = ghz_mixed(cfg.params)?;
    let scanner = cfg.scanner()?;
    let point = scanner.evaluate_at(args.thickness)?;
    let actual = crate::decoherence::dephase_a(scanner.initial_state(), point.kappa)?;

    let mut report = Report::default();
    let (rec, counts) = if args.exact {
        report.text("mode", "exact");
        (reconstruct_frequencies(&exact_frequencies(&actual)?)?, None)
    } else {
        let counts = match &args.from_counts {
            Some(p) => {
                report.text("mode", "file");
                TomographyCounts::from_table(&read_file(p)?).map_err(|e| CliError::Usage(e.to_string()))?
            }
            None => {
                report.text("mode", "simulated");
                simulate_tomography(&actual, args.shots, cfg.seed)?
            }
        };
        (reconstruct(&counts)?, Some(counts))
    };

    let f = fidelity(&rec, &ideal)?;
    let ew = entanglement_witness(&rec)?;
    let (f_err, ew_err) = match &counts {
        Some(c) if args.resamples >= 2 => (
            monte_carlo_errors(c, args.resamples, &Statistic::Fidelity(ideal.clone()), cfg.seed)?,
            monte_carlo_errors(c, args.resamples, &Statistic::EntanglementWitness, cfg.seed)?,
        ),
        Some(_) => return Err(CliError::Usage("--resamples must be at least 2".into())),
        None => (0.0, 0.0),
    };
    report
        .num(
            "shots_per_setting",
            counts.as_ref().map_or(0.0, |c| c.shots_per_setting as f64),
        )
        .num("thickness", args.thickness)
        .num("fidelity", f)
        .num("fidelity_err", f_err)
        .num("ew", ew)
        .num("ew_err", ew_err)
        .num("trace_distance_to_true", trace_distance(&rec, &actual)?)
        .num("resamples", if counts.is_some() { args.resamples as f64 } else { 0.0 })
        .text("seed", cfg.seed.to_string());

    if let (Some(path), Some(c)) = (&args.counts, &counts) {
        write_file(path, &c.to_table())?;
    }
    Ok(report.render(format))
}
