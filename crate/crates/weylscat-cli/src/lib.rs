//! Config-driven front end: scattering-matrix sweeps over lambda grids,
//! inverse-problem pipelines, and the invariant verification suite, with
//! CSV/JSON output for external plotting.

pub mod config;
pub mod records;
pub mod verify;

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use weylscat::herglotz::{boundary_limit, BoundarySchedule, NevanlinnaMeasure, WeylSampler};
use weylscat::inverse::{check_admissibility, default_y_ladder, realize, ContractiveSampler};
use weylscat::linalg::{defect_contraction, defect_unitary};
use weylscat::models::{build_model, matrix_from_data, ModelSpec};
use weylscat::scattering::{
    coupled_blocks, lax_phillips, scattering_matrix, DissipativeMatrix, SampleStatus,
    ScatteringSample,
};
use weylscat::Error;

use config::{
    ContractionRef, DissipativeSpec, ModelRef, OutputFormat, OutputSpec, RunConfig, Subcommand,
};
use records::{
    dissipative_csv, forward_csv, laxphillips_csv, to_json_pretty, verify_csv, DissipativeRecord,
    ForwardRecord, LaxPhillipsRecord,
};

/// CLI-level failures with their exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Unparseable or inconsistent configuration (exit 2).
    Config(String),
    /// Model construction or model file problems (exit 3).
    Model(String),
    /// Numerical failure outside the tolerated per-row budget (exit 1).
    Numerical(String),
    /// Filesystem problems (exit 1).
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Model(m) => write!(f, "model error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Model(_) => 3,
            CliError::Numerical(_) | CliError::Io(_) => 1,
        }
    }
}

/// Parsed command line (the config file carries everything else).
#[derive(Debug, Clone)]
pub struct CliArgs {
    pub config: PathBuf,
    pub output: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub threads: usize,
    pub seed: Option<u64>,
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}

fn resolve_weyl(mref: &ModelRef) -> Result<(usize, WeylSampler, Option<NevanlinnaMeasure>), CliError> {
    match mref {
        ModelRef::Spec(spec) => {
            let built = build_model(spec).map_err(|e| CliError::Model(e.to_string()))?;
            let sampler = built.sampler.ok_or_else(|| {
                CliError::Model(format!("model '{}' provides no Weyl evaluator", spec.name()))
            })?;
            Ok((built.dim, sampler, built.measure))
        }
        ModelRef::File { file } => {
            let text = read_file(file).map_err(|e| CliError::Model(e.to_string()))?;
            let measure =
                NevanlinnaMeasure::from_json(&text).map_err(|e| CliError::Model(e.to_string()))?;
            let dim = measure.dim();
            Ok((dim, WeylSampler::from_measure(measure.clone()), Some(measure)))
        }
    }
}

fn resolve_contraction(wref: &ContractionRef) -> Result<(usize, ContractiveSampler), CliError> {
    match wref {
        ContractionRef::Spec(spec) => {
            let built = build_model(spec).map_err(|e| CliError::Model(e.to_string()))?;
            let w = built.contraction.ok_or_else(|| {
                CliError::Model(format!(
                    "model '{}' provides no contraction evaluator",
                    spec.name()
                ))
            })?;
            Ok((built.dim, w))
        }
        ContractionRef::File { file } => {
            let text = read_file(file).map_err(|e| CliError::Model(e.to_string()))?;
            let table: config::ContractionTableFile = serde_json::from_str(&text)
                .map_err(|e| CliError::Model(format!("contraction file: {e}")))?;
            let samples = table
                .samples
                .iter()
                .map(|s| {
                    Ok((
                        Complex64::new(s.eta[0], s.eta[1]),
                        matrix_from_data(&s.w).map_err(|e| CliError::Model(e.to_string()))?,
                    ))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            let w = ContractiveSampler::tabulated(samples)
                .map_err(|e| CliError::Model(e.to_string()))?;
            Ok((table.dim, w))
        }
    }
}

fn resolve_dissipative(spec: &DissipativeSpec, dim: usize) -> Result<DissipativeMatrix, CliError> {
    let d = match spec {
        DissipativeSpec::Matrix { data } => {
            let m = matrix_from_data(data).map_err(|e| CliError::Model(e.to_string()))?;
            DissipativeMatrix::new(m).map_err(|e| CliError::Model(e.to_string()))?
        }
        DissipativeSpec::MinusIIdentity => DissipativeMatrix::minus_i_identity(dim),
        DissipativeSpec::Random { dim: n, seed } => build_model(&ModelSpec::RandomDissipativeD {
            dim: *n,
            seed: *seed,
        })
        .map_err(|e| CliError::Model(e.to_string()))?
        .dissipative
        .expect("random dissipative model always yields a parameter"),
    };
    if d.dim() != dim {
        return Err(CliError::Model(format!(
            "dissipative parameter is {}x{} but the model dimension is {dim}",
            d.dim(),
            d.dim()
        )));
    }
    Ok(d)
}

struct RowStats {
    total: usize,
    failed: usize,
    defect_violations: usize,
    max_defect: f64,
}

impl RowStats {
    fn exit_code(&self) -> i32 {
        if self.defect_violations > 0 || 20 * self.failed > self.total {
            1
        } else {
            0
        }
    }
}

fn run_parallel<T: Send>(
    threads: usize,
    grid: &[f64],
    row: impl Fn(f64) -> Result<T, CliError> + Sync,
) -> Result<Vec<T>, CliError> {
    if threads <= 1 {
        grid.iter().map(|&l| row(l)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
        pool.install(|| grid.par_iter().map(|&l| row(l)).collect())
    }
}

fn sample_at(
    sampler: &WeylSampler,
    lambda: f64,
    sched: &BoundarySchedule,
    rtol: f64,
) -> Result<ScatteringSample, CliError> {
    match boundary_limit(sampler, lambda, sched) {
        Ok((mval, err)) => match scattering_matrix(&mval, rtol) {
            Ok(mut s) => {
                s.lambda = lambda;
                s.err_estimate = err;
                Ok(s)
            }
            Err(Error::SingularWeylValue { .. }) => Ok(failed_sample(
                lambda,
                sampler.dim(),
                SampleStatus::SingularWeylValue,
            )),
            Err(e) => Err(CliError::Numerical(e.to_string())),
        },
        Err(Error::NoConvergence { .. }) => {
            Ok(failed_sample(lambda, sampler.dim(), SampleStatus::NoConvergence))
        }
        Err(e) => Err(CliError::Numerical(e.to_string())),
    }
}

fn failed_sample(lambda: f64, dim: usize, status: SampleStatus) -> ScatteringSample {
    ScatteringSample {
        lambda,
        rank: 0,
        fiber_basis: weylscat::CMatrix::zeros(dim, 0),
        s: weylscat::CMatrix::zeros(0, 0),
        unitarity_defect: 0.0,
        err_estimate: f64::NAN,
        status,
    }
}

fn emit(
    output: &Option<OutputSpec>,
    csv: impl FnOnce() -> String,
    json: impl FnOnce() -> String,
) -> Result<(), CliError> {
    match output {
        Some(spec) => {
            let text = match spec.format {
                OutputFormat::Csv => csv(),
                OutputFormat::Json => json(),
            };
            write_file(&spec.path, &text)
        }
        None => {
            print!("{}", json());
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct InverseOutput<'a> {
    admissibility: &'a weylscat::AdmissibilityReport,
    strict_contraction_pass: bool,
    growth_pass: bool,
    all_probes_diverging: bool,
    inner_flag: bool,
    roundtrip_error: f64,
    model_file: String,
}

fn run_config(cfg: &RunConfig, threads: usize) -> Result<i32, CliError> {
    let sched = cfg.schedule();
    let rtol = cfg.tolerances.rtol;
    let defect_cut = cfg.tolerances.defect_threshold;

    match cfg.subcommand {
        Subcommand::Forward => {
            let mref = cfg
                .model
                .as_ref()
                .ok_or_else(|| CliError::Config("forward needs a model".into()))?;
            let grid_spec = cfg
                .grid
                .as_ref()
                .ok_or_else(|| CliError::Config("forward needs a grid".into()))?;
            let (dim, sampler, _) = resolve_weyl(mref)?;
            let grid = grid_spec.points_vec();
            let samples = run_parallel(threads, &grid, |l| sample_at(&sampler, l, &sched, rtol))?;
            let records: Vec<ForwardRecord> =
                samples.iter().map(ForwardRecord::from_sample).collect();
            let stats = RowStats {
                total: samples.len(),
                failed: samples.iter().filter(|s| s.status != SampleStatus::Ok).count(),
                defect_violations: samples
                    .iter()
                    .filter(|s| s.status == SampleStatus::Ok && s.unitarity_defect > defect_cut)
                    .count(),
                max_defect: samples
                    .iter()
                    .map(|s| s.unitarity_defect)
                    .fold(0.0, f64::max),
            };
            emit(
                &cfg.output,
                || forward_csv(&records, dim),
                || to_json_pretty(&records),
            )?;
            eprintln!(
                "forward: {} rows, {} failed, max unitarity defect {:.3e}",
                stats.total, stats.failed, stats.max_defect
            );
            Ok(stats.exit_code())
        }
        Subcommand::Dissipative => {
            let mref = cfg
                .model
                .as_ref()
                .ok_or_else(|| CliError::Config("dissipative needs a model".into()))?;
            let grid_spec = cfg
                .grid
                .as_ref()
                .ok_or_else(|| CliError::Config("dissipative needs a grid".into()))?;
            let dspec = cfg
                .d_matrix
                .as_ref()
                .ok_or_else(|| CliError::Config("dissipative needs d_matrix".into()))?;
            let (dim, sampler, _) = resolve_weyl(mref)?;
            let d = resolve_dissipative(dspec, dim)?;
            let grid = grid_spec.points_vec();
            let records = run_parallel(threads, &grid, |lambda| {
                match boundary_limit(&sampler, lambda, &sched) {
                    Ok((mval, err)) => match coupled_blocks(&mval, &d, rtol) {
                        Ok(blocks) => {
                            let defect = defect_unitary(&blocks.full)
                                .map_err(|e| CliError::Numerical(e.to_string()))?;
                            Ok(DissipativeRecord::from_blocks(lambda, err, &blocks, defect))
                        }
                        Err(Error::SingularCoupledValue { .. } | Error::SingularWeylValue { .. }) => {
                            Ok(DissipativeRecord::failed(lambda, SampleStatus::SingularWeylValue))
                        }
                        Err(e) => Err(CliError::Numerical(e.to_string())),
                    },
                    Err(Error::NoConvergence { .. }) => {
                        Ok(DissipativeRecord::failed(lambda, SampleStatus::NoConvergence))
                    }
                    Err(e) => Err(CliError::Numerical(e.to_string())),
                }
            })?;
            let stats = RowStats {
                total: records.len(),
                failed: records.iter().filter(|r| r.status != "ok").count(),
                defect_violations: records
                    .iter()
                    .filter(|r| r.status == "ok" && r.full_defect > defect_cut)
                    .count(),
                max_defect: records.iter().map(|r| r.full_defect).fold(0.0, f64::max),
            };
            emit(
                &cfg.output,
                || dissipative_csv(&records, dim),
                || to_json_pretty(&records),
            )?;
            eprintln!(
                "dissipative: {} rows, {} failed, max full-matrix defect {:.3e}",
                stats.total, stats.failed, stats.max_defect
            );
            Ok(stats.exit_code())
        }
        Subcommand::Laxphillips => {
            let mref = cfg
                .model
                .as_ref()
                .ok_or_else(|| CliError::Config("laxphillips needs a model".into()))?;
            let grid_spec = cfg
                .grid
                .as_ref()
                .ok_or_else(|| CliError::Config("laxphillips needs a grid".into()))?;
            let dspec = cfg
                .d_matrix
                .as_ref()
                .ok_or_else(|| CliError::Config("laxphillips needs d_matrix".into()))?;
            let (dim, sampler, _) = resolve_weyl(mref)?;
            let d = resolve_dissipative(dspec, dim)?;
            let grid = grid_spec.points_vec();
            let records = run_parallel(threads, &grid, |lambda| {
                match boundary_limit(&sampler, lambda, &sched) {
                    Ok((mval, err)) => match lax_phillips(&mval, &d) {
                        Ok(s_lp) => {
                            let defect = defect_contraction(&s_lp)
                                .map_err(|e| CliError::Numerical(e.to_string()))?;
                            Ok(LaxPhillipsRecord::new(lambda, err, &s_lp, defect))
                        }
                        Err(Error::SingularCoupledValue { .. }) => {
                            Ok(LaxPhillipsRecord::failed(lambda, SampleStatus::SingularWeylValue))
                        }
                        Err(e) => Err(CliError::Numerical(e.to_string())),
                    },
                    Err(Error::NoConvergence { .. }) => {
                        Ok(LaxPhillipsRecord::failed(lambda, SampleStatus::NoConvergence))
                    }
                    Err(e) => Err(CliError::Numerical(e.to_string())),
                }
            })?;
            let stats = RowStats {
                total: records.len(),
                failed: records.iter().filter(|r| r.status != "ok").count(),
                defect_violations: records
                    .iter()
                    .filter(|r| r.status == "ok" && r.contraction_defect > defect_cut)
                    .count(),
                max_defect: records
                    .iter()
                    .map(|r| r.contraction_defect)
                    .fold(0.0, f64::max),
            };
            emit(
                &cfg.output,
                || laxphillips_csv(&records, dim),
                || to_json_pretty(&records),
            )?;
            eprintln!(
                "laxphillips: {} rows, {} failed, max contraction defect {:.3e}",
                stats.total, stats.failed, stats.max_defect
            );
            Ok(stats.exit_code())
        }
        Subcommand::Inverse => {
            let wref = cfg
                .w_model
                .as_ref()
                .ok_or_else(|| CliError::Config("inverse needs w_model".into()))?;
            let grid_spec = cfg
                .grid
                .as_ref()
                .ok_or_else(|| CliError::Config("inverse needs a grid".into()))?;
            let (_, w) = resolve_contraction(wref)?;
            let boundary_grid = grid_spec.points_vec();
            let support_grid = cfg
                .support_grid
                .as_ref()
                .unwrap_or(grid_spec)
                .points_vec();
            let report = check_admissibility(
                &w,
                &default_y_ladder(),
                cfg.probe_count,
                &boundary_grid,
                &sched,
                cfg.seed,
            )
            .map_err(|e| CliError::Numerical(e.to_string()))?;
            let (measure, roundtrip) = match realize(&w, &support_grid, &sched) {
                Ok(v) => v,
                Err(Error::AdmissibilityFailed { reason }) => {
                    eprintln!("inverse: admissibility failed: {reason}");
                    return Ok(1);
                }
                Err(e) => return Err(CliError::Numerical(e.to_string())),
            };
            let model_path = cfg.model_output.clone().unwrap_or_else(|| {
                let base = cfg
                    .output
                    .as_ref()
                    .map(|o| o.path.clone())
                    .unwrap_or_else(|| PathBuf::from("inverse_out"));
                let mut s = base.into_os_string();
                s.push(".model.json");
                PathBuf::from(s)
            });
            write_file(&model_path, &measure.to_json())?;
            let out = InverseOutput {
                admissibility: &report,
                strict_contraction_pass: report.passes_strict_contraction(),
                growth_pass: report.passes_growth(),
                all_probes_diverging: report.all_probes_diverging(),
                inner_flag: report.inner_flag,
                roundtrip_error: roundtrip,
                model_file: model_path.display().to_string(),
            };
            emit(&cfg.output, || to_json_pretty(&out), || to_json_pretty(&out))?;
            eprintln!(
                "inverse: roundtrip error {:.3e}, recovered model at {}",
                roundtrip,
                model_path.display()
            );
            Ok(if roundtrip < cfg.tolerances.roundtrip_threshold {
                0
            } else {
                1
            })
        }
        Subcommand::Verify => {
            let records = verify::run_verify(cfg.seed)?;
            let all_pass = records.iter().all(|r| r.pass);
            for r in &records {
                eprintln!(
                    "{} {} (max defect {:.3e}, threshold {:.1e})",
                    if r.pass { "PASS" } else { "FAIL" },
                    r.invariant,
                    r.max_defect,
                    r.threshold
                );
            }
            emit(
                &cfg.output,
                || verify_csv(&records),
                || to_json_pretty(&records),
            )?;
            Ok(if all_pass { 0 } else { 1 })
        }
    }
}

/// Entry point: returns the process exit code.
pub fn run(args: &CliArgs) -> i32 {
    let text = match read_file(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    let mut cfg = match RunConfig::from_json(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };
    if let Some(path) = &args.output {
        let format = args
            .format
            .or(cfg.output.as_ref().map(|o| o.format))
            .unwrap_or(OutputFormat::Csv);
        cfg.output = Some(OutputSpec {
            path: path.clone(),
            format,
        });
    } else if let (Some(fmtarg), Some(out)) = (args.format, cfg.output.as_mut()) {
        out.format = fmtarg;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    match run_config(&cfg, args.threads) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
