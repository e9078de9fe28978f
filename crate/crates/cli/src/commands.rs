use std::fs;
use std::path::Path;

use thiserror::Error;
use unitselect_core::format::{FlaggedGroupSpec, SimulationMetadata, StudyFile, TruthFile};
use unitselect_core::simulate::{generate_study_with_workers, SimulationConfig, RNG_ALGORITHM};
use unitselect_core::{
    ab_representation, benefit_bounds, brute_force_benefit_range, gain_equality_check, rank_groups,
    sigma, w_term, ABHeuristic, Error, Estimator, Study,
};

use crate::args::{BoundsArgs, Cli, Command, CompareArgs, Format, SimulateArgs, VerifyArgs, Weights};
use crate::report::{
    AbWeights, BoundsReport, CompareReport, Decision, GridRange, GroupBounds, GroupComparison,
    GroupVerification, Interval, RankEntry, Render, VerifyReport, VerifyStatus,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_ANALYTIC: u8 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read `{path}`: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write `{path}`: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Input { path: String, source: Error },
}

/// What a subcommand produced: the report for stdout, notes for stderr and
/// the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub diagnostics: Vec<String>,
    pub exit_code: u8,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.display().to_string(),
        source,
    })
}

fn input_err(path: &Path) -> impl FnOnce(Error) -> CliError + '_ {
    move |source| CliError::Input {
        path: path.display().to_string(),
        source,
    }
}

pub fn load_study(path: &Path) -> Result<Study, CliError> {
    unitselect_core::format::parse_study(&read(path)?).map_err(input_err(path))
}

fn render<R: Render>(report: &R, format: Format) -> String {
    match format {
        Format::Table => report.table(),
        Format::Json => report.json(),
    }
}

pub fn bounds_report(study: &Study, estimator: Estimator) -> BoundsReport {
    let bv = study.benefit_vector();
    let gain_equal = gain_equality_check(bv);
    let ab = ab_representation(bv).map(|h| AbWeights { a: h.a, b: h.b });
    let mut compatible = Vec::new();
    let groups: Vec<GroupBounds> = study
        .groups()
        .iter()
        .map(|g| {
            let report = g.compatibility();
            let bounds = report
                .is_compatible()
                .then(|| benefit_bounds(bv, &g.experimental, g.observational.as_ref()).ok())
                .flatten();
            if bounds.is_some() {
                compatible.push(g.clone());
            }
            GroupBounds {
                id: g.id.clone(),
                compatible: bounds.is_some(),
                violations: report.violations.iter().map(|v| v.to_string()).collect(),
                sigma: sigma(bv),
                w: w_term(bv, &g.experimental),
                l: report.l,
                u: report.u,
                bounds: bounds.map(|b| Interval {
                    lower: b.lower,
                    upper: b.upper,
                }),
                estimate: bounds.map(|b| b.estimate(estimator)),
                point_identified: bounds.map(|b| b.point_identified),
                gain_equality: gain_equal,
                ab_expressible: ab.is_some(),
            }
        })
        .collect();
    let ranking = Study::new(*bv, compatible)
        .ok()
        .and_then(|s| rank_groups(&s, estimator).ok())
        .unwrap_or_default()
        .into_iter()
        .enumerate()
        .map(|(i, r)| RankEntry {
            rank: i + 1,
            id: r.id,
            estimate: r.estimate,
        })
        .collect();
    let incompatible_groups = groups.iter().filter(|g| !g.compatible).count();
    BoundsReport {
        benefit_vector: bv.into(),
        estimator: estimator.to_string(),
        ab_representation: ab,
        groups,
        ranking,
        incompatible_groups,
    }
}

pub fn compare_report(study: &Study, weights: Weights, estimator: Estimator) -> CompareReport {
    let h = ABHeuristic {
        a: weights.a,
        b: weights.b,
    };
    let bounds = bounds_report(study, estimator);
    let groups: Vec<GroupComparison> = study
        .groups()
        .iter()
        .zip(&bounds.groups)
        .map(|(g, b)| {
            let heuristic_value = h.evaluate(&g.experimental);
            let heuristic_decision = Decision::from_score(heuristic_value);
            let benefit_decision = b.estimate.map(Decision::from_score);
            GroupComparison {
                id: g.id.clone(),
                heuristic_value,
                heuristic_decision,
                compatible: b.compatible,
                violations: b.violations.clone(),
                bounds: b.bounds,
                estimate: b.estimate,
                benefit_decision,
                disagreement: benefit_decision.is_some_and(|d| d != heuristic_decision),
            }
        })
        .collect();
    CompareReport {
        heuristic: AbWeights { a: h.a, b: h.b },
        benefit_vector: bounds.benefit_vector,
        estimator: bounds.estimator,
        disagreements: groups.iter().filter(|g| g.disagreement).count(),
        incompatible_groups: bounds.incompatible_groups,
        groups,
    }
}

pub fn verify_report(study: &Study, grid_step: f64) -> Result<VerifyReport, Error> {
    if !(grid_step > 0.0 && grid_step <= 0.1) {
        return Err(Error::InvalidGridStep(grid_step));
    }
    let bv = study.benefit_vector();
    let tolerance = 2.0 * grid_step * bv.l1_norm();
    let groups: Vec<GroupVerification> = study
        .groups()
        .iter()
        .map(|g| {
            let obs = g.observational.as_ref();
            let report = g.compatibility();
            let closed = if report.is_compatible() {
                benefit_bounds(bv, &g.experimental, obs).ok()
            } else {
                None
            };
            let Some(closed) = closed else {
                return GroupVerification {
                    id: g.id.clone(),
                    status: VerifyStatus::Incompatible,
                    message: Some(report.describe()),
                    closed_form: None,
                    brute_force: None,
                    max_deviation: None,
                };
            };
            let closed_form = Some(Interval {
                lower: closed.lower,
                upper: closed.upper,
            });
            match brute_force_benefit_range(bv, &g.experimental, obs, grid_step) {
                Ok(r) => {
                    let dev = (r.min - closed.lower).abs().max((r.max - closed.upper).abs());
                    GroupVerification {
                        id: g.id.clone(),
                        status: if dev <= tolerance {
                            VerifyStatus::Pass
                        } else {
                            VerifyStatus::Fail
                        },
                        message: None,
                        closed_form,
                        brute_force: Some(GridRange {
                            min: r.min,
                            max: r.max,
                            n_feasible: r.n_feasible,
                        }),
                        max_deviation: Some(dev),
                    }
                }
                Err(e) => GroupVerification {
                    id: g.id.clone(),
                    status: VerifyStatus::NoFeasiblePoint,
                    message: Some(e.to_string()),
                    closed_form,
                    brute_force: None,
                    max_deviation: None,
                },
            }
        })
        .collect();
    Ok(VerifyReport {
        benefit_vector: bv.into(),
        grid_step,
        tolerance,
        all_passed: groups.iter().all(|g| g.status == VerifyStatus::Pass),
        groups,
    })
}

/// Builds the study file the simulator writes for `truth`.
pub fn simulate_file(
    truth: &TruthFile,
    n_per_arm: u64,
    n_observational: u64,
    seed: u64,
    exact: bool,
    workers: usize,
) -> Result<StudyFile, Error> {
    let cfg = SimulationConfig {
        n_per_arm,
        n_observational,
        seed,
        exact,
        groups: truth.ground_truths()?,
    };
    let bv = truth.benefit_vector()?;
    let sim = generate_study_with_workers(&cfg, &bv, workers)?;
    let mut file = StudyFile::from_study(&sim.study);
    file.simulation = Some(SimulationMetadata {
        generator: if exact {
            "expected-counts".into()
        } else {
            RNG_ALGORITHM.into()
        },
        seed,
        n_per_arm,
        n_observational,
        exact,
        flagged_groups: sim.flagged.iter().map(FlaggedGroupSpec::from).collect(),
    });
    Ok(file)
}

fn run_bounds(args: &BoundsArgs) -> Result<Outcome, CliError> {
    let study = load_study(&args.input)?;
    let report = bounds_report(&study, args.estimator.into());
    let diagnostics = report
        .groups
        .iter()
        .filter(|g| !g.compatible)
        .map(|g| format!("group `{}` is incompatible: {}", g.id, g.violations.join("; ")))
        .collect();
    Ok(Outcome {
        stdout: render(&report, args.output.format),
        diagnostics,
        exit_code: if report.incompatible_groups > 0 {
            EXIT_ANALYTIC
        } else {
            EXIT_OK
        },
    })
}

fn run_compare(args: &CompareArgs) -> Result<Outcome, CliError> {
    let study = load_study(&args.input)?;
    let report = compare_report(&study, args.ab, args.estimator.into());
    let diagnostics = report
        .groups
        .iter()
        .filter(|g| !g.compatible)
        .map(|g| format!("group `{}` is incompatible: {}", g.id, g.violations.join("; ")))
        .collect();
    Ok(Outcome {
        stdout: render(&report, args.output.format),
        diagnostics,
        exit_code: if report.incompatible_groups > 0 {
            EXIT_ANALYTIC
        } else {
            EXIT_OK
        },
    })
}

fn run_simulate(args: &SimulateArgs) -> Result<Outcome, CliError> {
    let truth = TruthFile::from_json(&read(&args.truth)?).map_err(input_err(&args.truth))?;
    let file = simulate_file(
        &truth,
        args.n_per_arm,
        args.n_obs,
        args.seed,
        args.exact,
        args.workers,
    )
    .map_err(input_err(&args.truth))?;
    let mut diagnostics: Vec<String> = file
        .simulation
        .iter()
        .flat_map(|m| &m.flagged_groups)
        .map(|f| format!("group `{}` drew incompatible data: {}", f.id, f.reason))
        .collect();
    let json = file.to_json();
    let stdout = if args.out.as_os_str() == "-" {
        json
    } else {
        fs::write(&args.out, json).map_err(|source| CliError::Write {
            path: args.out.display().to_string(),
            source,
        })?;
        diagnostics.push(format!("wrote {}", args.out.display()));
        String::new()
    };
    Ok(Outcome {
        stdout,
        diagnostics,
        exit_code: EXIT_OK,
    })
}

fn run_verify(args: &VerifyArgs) -> Result<Outcome, CliError> {
    let study = load_study(&args.input)?;
    let report = verify_report(&study, args.grid_step).map_err(input_err(&args.input))?;
    Ok(Outcome {
        stdout: render(&report, args.output.format),
        diagnostics: Vec::new(),
        exit_code: if report.all_passed {
            EXIT_OK
        } else {
            EXIT_ANALYTIC
        },
    })
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Bounds(a) => run_bounds(a),
        Command::Compare(a) => run_compare(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Verify(a) => run_verify(a),
    }
}
