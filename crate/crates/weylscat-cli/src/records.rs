//! Output records and the CSV/JSON writers.
//!
//! CSV numbers are printed with 17 significant digits so a double round-trips
//! exactly; JSON goes through serde_json, whose shortest-round-trip float
//! encoding is also lossless. Matrix columns are padded to the maximal fiber
//! rank of the run, and a `status` column appears only when some row failed
//! (all-clean tables keep the plain numeric column set).

use serde::{Deserialize, Serialize};
use weylscat::models::{matrix_to_data, MatrixData};
use weylscat::scattering::{CoupledBlocks, SampleStatus, ScatteringSample};
use weylscat::CMatrix;

pub fn status_str(s: SampleStatus) -> &'static str {
    match s {
        SampleStatus::Ok => "ok",
        SampleStatus::NoConvergence => "no_convergence",
        SampleStatus::SingularWeylValue => "singular_weyl_value",
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn finite_or_none(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// One row of a `forward` sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForwardRecord {
    pub lambda: f64,
    pub status: String,
    pub rank: usize,
    pub err_estimate: Option<f64>,
    pub unitarity_defect: f64,
    pub s: MatrixData,
    pub fiber_basis: MatrixData,
}

impl ForwardRecord {
    pub fn from_sample(sample: &ScatteringSample) -> Self {
        ForwardRecord {
            lambda: sample.lambda,
            status: status_str(sample.status).to_string(),
            rank: sample.rank,
            err_estimate: finite_or_none(sample.err_estimate),
            unitarity_defect: sample.unitarity_defect,
            s: matrix_to_data(&sample.s),
            fiber_basis: matrix_to_data(&sample.fiber_basis),
        }
    }
}

/// One row of a `dissipative` sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DissipativeRecord {
    pub lambda: f64,
    pub status: String,
    pub rank: usize,
    pub err_estimate: Option<f64>,
    pub full_defect: f64,
    pub s11: MatrixData,
    pub s12: MatrixData,
    pub s21: MatrixData,
    pub s22: MatrixData,
    pub full: MatrixData,
}

impl DissipativeRecord {
    pub fn from_blocks(lambda: f64, err: f64, blocks: &CoupledBlocks, full_defect: f64) -> Self {
        DissipativeRecord {
            lambda,
            status: "ok".into(),
            rank: blocks.rank,
            err_estimate: finite_or_none(err),
            full_defect,
            s11: matrix_to_data(&blocks.s11),
            s12: matrix_to_data(&blocks.s12),
            s21: matrix_to_data(&blocks.s21),
            s22: matrix_to_data(&blocks.s22),
            full: matrix_to_data(&blocks.full),
        }
    }

    pub fn failed(lambda: f64, status: SampleStatus) -> Self {
        DissipativeRecord {
            lambda,
            status: status_str(status).to_string(),
            rank: 0,
            err_estimate: None,
            full_defect: 0.0,
            s11: vec![],
            s12: vec![],
            s21: vec![],
            s22: vec![],
            full: vec![],
        }
    }
}

/// One row of a `laxphillips` sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LaxPhillipsRecord {
    pub lambda: f64,
    pub status: String,
    pub err_estimate: Option<f64>,
    pub contraction_defect: f64,
    pub s_lp: MatrixData,
}

impl LaxPhillipsRecord {
    pub fn new(lambda: f64, err: f64, s_lp: &CMatrix, contraction_defect: f64) -> Self {
        LaxPhillipsRecord {
            lambda,
            status: "ok".into(),
            err_estimate: finite_or_none(err),
            contraction_defect,
            s_lp: matrix_to_data(s_lp),
        }
    }

    pub fn failed(lambda: f64, status: SampleStatus) -> Self {
        LaxPhillipsRecord {
            lambda,
            status: status_str(status).to_string(),
            err_estimate: None,
            contraction_defect: 0.0,
            s_lp: vec![],
        }
    }
}

/// One invariant check of the `verify` subcommand.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyRecord {
    pub invariant: String,
    pub max_defect: f64,
    pub threshold: f64,
    pub pass: bool,
}

fn matrix_cells(m: &MatrixData, rows: usize, cols: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(2 * rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            match m.get(r).and_then(|row| row.get(c)) {
                Some([re, im]) => {
                    out.push(fmt(*re));
                    out.push(fmt(*im));
                }
                None => {
                    out.push(String::new());
                    out.push(String::new());
                }
            }
        }
    }
    out
}

fn write_table(header: Vec<String>, rows: Vec<Vec<String>>, with_status: bool) -> String {
    let mut text = String::new();
    let mut header = header;
    if with_status {
        header.push("status".into());
    }
    text.push_str(&header.join(","));
    text.push('\n');
    for mut row in rows {
        if !with_status {
            row.pop(); // drop the trailing status cell
        }
        text.push_str(&row.join(","));
        text.push('\n');
    }
    text
}

/// CSV table of forward records; matrix columns run over the maximal rank.
pub fn forward_csv(records: &[ForwardRecord], dim: usize) -> String {
    let mut header = vec![
        "lambda".to_string(),
        "rank".to_string(),
        "err_estimate".to_string(),
        "unitarity_defect".to_string(),
    ];
    for r in 0..dim {
        for c in 0..dim {
            header.push(format!("re_s_{r}_{c}"));
            header.push(format!("im_s_{r}_{c}"));
        }
    }
    let any_failed = records.iter().any(|r| r.status != "ok");
    let rows = records
        .iter()
        .map(|r| {
            let mut row = vec![
                fmt(r.lambda),
                r.rank.to_string(),
                r.err_estimate.map(fmt).unwrap_or_default(),
                fmt(r.unitarity_defect),
            ];
            row.extend(matrix_cells(&r.s, dim, dim));
            row.push(r.status.clone());
            row
        })
        .collect();
    write_table(header, rows, any_failed)
}

pub fn dissipative_csv(records: &[DissipativeRecord], dim: usize) -> String {
    let full_dim = 2 * dim;
    let mut header = vec![
        "lambda".to_string(),
        "rank".to_string(),
        "err_estimate".to_string(),
        "full_defect".to_string(),
    ];
    for r in 0..full_dim {
        for c in 0..full_dim {
            header.push(format!("re_full_{r}_{c}"));
            header.push(format!("im_full_{r}_{c}"));
        }
    }
    let any_failed = records.iter().any(|r| r.status != "ok");
    let rows = records
        .iter()
        .map(|r| {
            let mut row = vec![
                fmt(r.lambda),
                r.rank.to_string(),
                r.err_estimate.map(fmt).unwrap_or_default(),
                fmt(r.full_defect),
            ];
            row.extend(matrix_cells(&r.full, full_dim, full_dim));
            row.push(r.status.clone());
            row
        })
        .collect();
    write_table(header, rows, any_failed)
}

pub fn laxphillips_csv(records: &[LaxPhillipsRecord], dim: usize) -> String {
    let mut header = vec![
        "lambda".to_string(),
        "err_estimate".to_string(),
        "contraction_defect".to_string(),
    ];
    for r in 0..dim {
        for c in 0..dim {
            header.push(format!("re_slp_{r}_{c}"));
            header.push(format!("im_slp_{r}_{c}"));
        }
    }
    let any_failed = records.iter().any(|r| r.status != "ok");
    let rows = records
        .iter()
        .map(|r| {
            let mut row = vec![
                fmt(r.lambda),
                r.err_estimate.map(fmt).unwrap_or_default(),
                fmt(r.contraction_defect),
            ];
            row.extend(matrix_cells(&r.s_lp, dim, dim));
            row.push(r.status.clone());
            row
        })
        .collect();
    write_table(header, rows, any_failed)
}

pub fn verify_csv(records: &[VerifyRecord]) -> String {
    let header = vec![
        "invariant".to_string(),
        "max_defect".to_string(),
        "threshold".to_string(),
        "pass".to_string(),
    ];
    let rows = records
        .iter()
        .map(|r| {
            vec![
                r.invariant.clone(),
                fmt(r.max_defect),
                fmt(r.threshold),
                r.pass.to_string(),
                String::new(), // placeholder dropped by write_table
            ]
        })
        .collect();
    write_table(header, rows, false)
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("record serialization")
}
