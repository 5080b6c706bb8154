//! File formats: CSV data matrices, JSON parameter and report files, and
//! the per-chain output directory.
//!
//! All CSV files carry a header row; floating-point cells are written in
//! Rust's shortest round-trip form, so a write/read cycle reproduces the
//! numbers bit for bit. Draw blocks with no columns (for example
//! thresholds when L = 2) are skipped on write and reconstructed empty on
//! read.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::config::ModelConfig;
use crate::error::{Error, Result};
use crate::eval::{GewekeResult, ModelComparisonRow};
use crate::model::{cuts_from_interior, cuts_strictly_increasing, ItemParams, StructuralParams};
use crate::sampler::{ChainOutput, DrawBlock};
use crate::sim::TruthSet;

pub const SCHEMA_VERSION: u32 = 1;

/// Serialized fit configuration: a schema tag around the model settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub model: ModelConfig,
}

impl RunConfig {
    pub fn new(model: ModelConfig) -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            model,
        }
    }
}

pub fn read_run_config(path: &Path) -> Result<RunConfig> {
    let cfg: RunConfig = read_json(path)?;
    if cfg.schema_version != SCHEMA_VERSION {
        return Err(Error::Config(format!(
            "{} has schema version {}, this build reads {}",
            path.display(),
            cfg.schema_version,
            SCHEMA_VERSION
        )));
    }
    Ok(cfg)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn parse_cell<T: std::str::FromStr>(field: &str, line: usize, what: &str) -> Result<T> {
    field
        .trim()
        .parse::<T>()
        .map_err(|_| Error::data_at(format!("cannot parse {what} from `{field}`"), line))
}

fn record_line(record: &csv::StringRecord) -> usize {
    record.position().map(|p| p.line() as usize).unwrap_or(0)
}

/// Reads a CSV of small nonnegative integers (responses or attribute
/// profiles): header row of column names, one row per respondent.
pub fn read_level_csv(path: &Path) -> Result<(DMatrix<u8>, Vec<String>)> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let names: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let mut rows: Vec<Vec<u8>> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record_line(&record);
        let row = record
            .iter()
            .map(|f| parse_cell::<u8>(f, line, "a response level"))
            .collect::<Result<Vec<u8>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::data(format!("{} has no data rows", path.display())));
    }
    let y = DMatrix::from_fn(rows.len(), names.len(), |i, j| rows[i][j]);
    Ok((y, names))
}

pub fn write_level_csv(path: &Path, m: &DMatrix<u8>, names: &[String]) -> Result<()> {
    assert_eq!(m.ncols(), names.len(), "one name per column");
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(names)?;
    for i in 0..m.nrows() {
        writer.write_record((0..m.ncols()).map(|j| m[(i, j)].to_string()))?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads a CSV of finite floating-point values (covariates).
pub fn read_numeric_csv(path: &Path) -> Result<(DMatrix<f64>, Vec<String>)> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let names: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record_line(&record);
        let row = record
            .iter()
            .map(|f| {
                let v = parse_cell::<f64>(f, line, "a number")?;
                if !v.is_finite() {
                    return Err(Error::data_at(format!("non-finite value `{f}`"), line));
                }
                Ok(v)
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::data(format!("{} has no data rows", path.display())));
    }
    let x = DMatrix::from_fn(rows.len(), names.len(), |i, j| rows[i][j]);
    Ok((x, names))
}

pub fn write_numeric_csv(path: &Path, x: &DMatrix<f64>, names: &[String]) -> Result<()> {
    assert_eq!(x.ncols(), names.len(), "one name per column");
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(names)?;
    for i in 0..x.nrows() {
        writer.write_record((0..x.ncols()).map(|j| x[(i, j)].to_string()))?;
    }
    writer.flush()?;
    Ok(())
}

/// Response level counts observed in the data: per item, the largest level
/// plus one, floored at two.
pub fn infer_levels(y: &DMatrix<u8>) -> Vec<usize> {
    (0..y.ncols())
        .map(|j| {
            let top = (0..y.nrows()).map(|i| y[(i, j)] as usize).max().unwrap_or(0);
            (top + 1).max(2)
        })
        .collect()
}

pub fn item_labels(j: usize) -> Vec<String> {
    (1..=j).map(|t| format!("item{t}")).collect()
}

pub fn covariate_labels(d: usize) -> Vec<String> {
    (1..=d).map(|t| format!("x{t}")).collect()
}

pub fn attribute_labels(k: usize) -> Vec<String> {
    (1..=k).map(|t| format!("a{t}")).collect()
}

/// JSON form of a full parameter set. Cut vectors are stored by their free
/// interior parts because JSON has no infinities.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthFile {
    pub schema_version: u32,
    /// Coefficients, H rows of J values.
    pub beta: Vec<Vec<f64>>,
    /// Inclusion indicators, same shape.
    pub delta: Vec<Vec<u8>>,
    /// Free interior cutpoints per item (M_j - 2 values).
    pub kappa_interior: Vec<Vec<f64>>,
    /// Regression coefficients, D rows of K values.
    pub lambda: Vec<Vec<f64>>,
    /// Upper-triangle correlations, pair-lexicographic.
    pub r_upper: Vec<f64>,
    /// Free interior thresholds per attribute (L - 2 values).
    pub gamma_interior: Vec<Vec<f64>>,
}

impl TruthFile {
    pub fn from_params(t: &TruthSet) -> Self {
        let (h, j) = t.items.beta.shape();
        let (d, k) = t.structural.lambda.shape();
        TruthFile {
            schema_version: SCHEMA_VERSION,
            beta: (0..h)
                .map(|hh| (0..j).map(|jj| t.items.beta[(hh, jj)]).collect())
                .collect(),
            delta: (0..h)
                .map(|hh| (0..j).map(|jj| t.items.delta[(hh, jj)]).collect())
                .collect(),
            kappa_interior: t
                .items
                .kappa
                .iter()
                .map(|cuts| cuts[2..cuts.len() - 1].to_vec())
                .collect(),
            lambda: (0..d)
                .map(|dd| (0..k).map(|kk| t.structural.lambda[(dd, kk)]).collect())
                .collect(),
            r_upper: (0..k)
                .flat_map(|i| ((i + 1)..k).map(move |j2| (i, j2)))
                .map(|(i, j2)| t.structural.r[(i, j2)])
                .collect(),
            gamma_interior: t
                .structural
                .gamma
                .iter()
                .map(|cuts| cuts[2..cuts.len() - 1].to_vec())
                .collect(),
        }
    }

    pub fn to_params(&self) -> Result<TruthSet> {
        let h = self.beta.len();
        let j = self.beta.first().map(Vec::len).unwrap_or(0);
        if self.delta.len() != h
            || self.beta.iter().any(|r| r.len() != j)
            || self.delta.iter().any(|r| r.len() != j)
        {
            return Err(Error::data("coefficient and indicator blocks are ragged"));
        }
        if self.kappa_interior.len() != j {
            return Err(Error::data(format!(
                "{} cutpoint lists for {} items",
                self.kappa_interior.len(),
                j
            )));
        }
        let k = self.gamma_interior.len();
        let d = self.lambda.len();
        if k == 0 || d == 0 {
            return Err(Error::data("parameter file has no attributes or covariates"));
        }
        if self.lambda.iter().any(|r| r.len() != k) {
            return Err(Error::data("regression block is ragged"));
        }
        if self.r_upper.len() != k * (k - 1) / 2 {
            return Err(Error::data(format!(
                "{} correlations for {} attributes",
                self.r_upper.len(),
                k
            )));
        }
        let beta = DMatrix::from_fn(h, j, |hh, jj| self.beta[hh][jj]);
        let delta = DMatrix::from_fn(h, j, |hh, jj| self.delta[hh][jj]);
        let kappa: Vec<Vec<f64>> = self
            .kappa_interior
            .iter()
            .map(|i| cuts_from_interior(i))
            .collect();
        let gamma: Vec<Vec<f64>> = self
            .gamma_interior
            .iter()
            .map(|i| cuts_from_interior(i))
            .collect();
        for cuts in kappa.iter().chain(gamma.iter()) {
            if !cuts_strictly_increasing(cuts) {
                return Err(Error::data("cut vector is not strictly increasing"));
            }
        }
        let lambda = DMatrix::from_fn(d, k, |dd, kk| self.lambda[dd][kk]);
        let mut r = DMatrix::identity(k, k);
        let mut p = 0usize;
        for i in 0..k {
            for j2 in (i + 1)..k {
                if self.r_upper[p].abs() >= 1.0 {
                    return Err(Error::data(format!(
                        "correlation {} is outside (-1, 1)",
                        self.r_upper[p]
                    )));
                }
                r[(i, j2)] = self.r_upper[p];
                r[(j2, i)] = self.r_upper[p];
                p += 1;
            }
        }
        Ok(TruthSet {
            items: ItemParams { beta, delta, kappa },
            structural: StructuralParams { lambda, r, gamma },
        })
    }
}

pub fn read_truth_json(path: &Path) -> Result<TruthSet> {
    let file: TruthFile = read_json(path)?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(Error::Config(format!(
            "{} has schema version {}, this build reads {}",
            path.display(),
            file.schema_version,
            SCHEMA_VERSION
        )));
    }
    file.to_params()
}

pub fn write_truth_json(path: &Path, truth: &TruthSet) -> Result<()> {
    write_json(path, &TruthFile::from_params(truth))
}

/// Chain-level facts stored next to the draw files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSummary {
    pub schema_version: u32,
    pub draws: usize,
    pub effect_labels: Vec<String>,
    pub item_names: Vec<String>,
    pub covariate_names: Vec<String>,
    /// Post-burn-in cutpoint acceptance per item; absent when nothing ran
    /// after burn-in.
    pub kappa_acceptance: Vec<Option<f64>>,
    pub sigma_kappa: Vec<f64>,
    pub gamma_top_unbounded: Vec<u64>,
    pub init_warnings: Vec<String>,
}

const BLOCK_FILES: [&str; 7] = [
    "beta.csv",
    "delta.csv",
    "kappa.csv",
    "lambda.csv",
    "r.csv",
    "gamma.csv",
    "omega.csv",
];

fn write_draw_block(path: &Path, block: &DrawBlock) -> Result<()> {
    if block.cols() == 0 {
        return Ok(());
    }
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(block.names())?;
    for r in 0..block.rows() {
        writer.write_record(block.row(r).iter().map(|v| v.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}

fn read_draw_block(path: &Path, rows_if_absent: usize) -> Result<DrawBlock> {
    if !path.exists() {
        let mut block = DrawBlock::new(Vec::new());
        for _ in 0..rows_if_absent {
            block.push_row(&[]);
        }
        return Ok(block);
    }
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let names: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let mut block = DrawBlock::new(names);
    let mut buf = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record_line(&record);
        buf.clear();
        for field in record.iter() {
            buf.push(parse_cell::<f64>(field, line, "a draw")?);
        }
        block.push_row(&buf);
    }
    Ok(block)
}

/// Writes one fitted chain as a directory: `config.json`, `summary.json`,
/// one CSV per draw block, `alpha_tally.csv`, and `log_joint.csv` when the
/// log joint was recorded.
pub fn write_chain_dir(dir: &Path, out: &ChainOutput, init_warnings: &[String]) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_json(dir.join("config.json").as_path(), &RunConfig::new(out.config.clone()))?;
    let summary = ChainSummary {
        schema_version: SCHEMA_VERSION,
        draws: out.draws(),
        effect_labels: out.effect_labels.clone(),
        item_names: out.item_names.clone(),
        covariate_names: out.covariate_names.clone(),
        kappa_acceptance: out
            .kappa_acceptance
            .iter()
            .map(|&a| if a.is_nan() { None } else { Some(a) })
            .collect(),
        sigma_kappa: out.sigma_kappa.clone(),
        gamma_top_unbounded: out.gamma_top_unbounded.clone(),
        init_warnings: init_warnings.to_vec(),
    };
    write_json(dir.join("summary.json").as_path(), &summary)?;
    let blocks = [
        &out.beta, &out.delta, &out.kappa, &out.lambda, &out.r, &out.gamma, &out.omega,
    ];
    for (file, block) in BLOCK_FILES.iter().zip(blocks) {
        write_draw_block(dir.join(file).as_path(), block)?;
    }
    if !out.log_joint.is_empty() {
        let mut writer = csv::Writer::from_path(dir.join("log_joint.csv"))?;
        writer.write_record(["log_joint"])?;
        for v in &out.log_joint {
            writer.write_record([v.to_string()])?;
        }
        writer.flush()?;
    }
    let mut writer = csv::Writer::from_path(dir.join("alpha_tally.csv"))?;
    writer.write_record(["respondent", "attribute", "level", "count"])?;
    let cfg = &out.config;
    for i in 0..cfg.n {
        for k in 0..cfg.k {
            for l in 0..cfg.l {
                writer.write_record([
                    i.to_string(),
                    k.to_string(),
                    l.to_string(),
                    out.tally(i, k, l).to_string(),
                ])?;
            }
        }
    }
    writer.flush()?;
    Ok(())
}

/// Reads a chain directory back into memory, checking the draw blocks
/// against the stored configuration. Returns the chain and the recorded
/// initializer warnings.
pub fn read_chain_dir(dir: &Path) -> Result<(ChainOutput, Vec<String>)> {
    let run = read_run_config(dir.join("config.json").as_path())?;
    let cfg = run.model;
    cfg.validate()?;
    let summary: ChainSummary = read_json(dir.join("summary.json").as_path())?;
    if summary.schema_version != SCHEMA_VERSION {
        return Err(Error::Config(format!(
            "summary in {} has schema version {}, this build reads {}",
            dir.display(),
            summary.schema_version,
            SCHEMA_VERSION
        )));
    }
    let table = crate::model::EffectTable::new(cfg.k, cfg.l, cfg.order)?;
    let h = table.h();
    let j = cfg.j();
    let expected = [
        h * j,
        h * j,
        cfg.m.iter().map(|m| m - 2).sum::<usize>(),
        cfg.d * cfg.k,
        cfg.k * (cfg.k - 1) / 2,
        cfg.k * (cfg.l - 2),
        1,
    ];
    let mut blocks = Vec::with_capacity(BLOCK_FILES.len());
    for (file, want) in BLOCK_FILES.iter().zip(expected) {
        let block = read_draw_block(dir.join(file).as_path(), summary.draws)?;
        if block.cols() != want {
            return Err(Error::data(format!(
                "{file} has {} columns, the configuration implies {want}",
                block.cols()
            )));
        }
        if block.rows() != summary.draws {
            return Err(Error::data(format!(
                "{file} has {} rows, the summary records {} draws",
                block.rows(),
                summary.draws
            )));
        }
        blocks.push(block);
    }
    let mut it = blocks.into_iter();
    let (beta, delta, kappa, lambda, r, gamma, omega) = (
        it.next().unwrap(),
        it.next().unwrap(),
        it.next().unwrap(),
        it.next().unwrap(),
        it.next().unwrap(),
        it.next().unwrap(),
        it.next().unwrap(),
    );
    let log_joint_path = dir.join("log_joint.csv");
    let log_joint = if log_joint_path.exists() {
        read_draw_block(log_joint_path.as_path(), 0)?
            .values()
            .to_vec()
    } else {
        Vec::new()
    };
    let mut alpha_tally = vec![0u32; cfg.n * cfg.k * cfg.l];
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(dir.join("alpha_tally.csv"))?;
    for record in reader.records() {
        let record = record?;
        let line = record_line(&record);
        if record.len() != 4 {
            return Err(Error::data_at("tally rows have four fields", line));
        }
        let i: usize = parse_cell(&record[0], line, "a respondent index")?;
        let k: usize = parse_cell(&record[1], line, "an attribute index")?;
        let l: usize = parse_cell(&record[2], line, "a level")?;
        let count: u32 = parse_cell(&record[3], line, "a count")?;
        if i >= cfg.n || k >= cfg.k || l >= cfg.l {
            return Err(Error::data_at("tally indices out of range", line));
        }
        alpha_tally[(i * cfg.k + k) * cfg.l + l] = count;
    }
    if summary.draws > 0 {
        for i in 0..cfg.n {
            for k in 0..cfg.k {
                let total: u64 = (0..cfg.l)
                    .map(|l| alpha_tally[(i * cfg.k + k) * cfg.l + l] as u64)
                    .sum();
                if total != summary.draws as u64 {
                    return Err(Error::data(format!(
                        "tallies for respondent {i}, attribute {k} sum to {total}, \
                         expected {}",
                        summary.draws
                    )));
                }
            }
        }
    }
    if summary.item_names.len() != j
        || summary.covariate_names.len() != cfg.d
        || summary.effect_labels.len() != h
        || summary.kappa_acceptance.len() != j
        || summary.sigma_kappa.len() != j
        || summary.gamma_top_unbounded.len() != cfg.k
    {
        return Err(Error::data("summary.json lengths do not match the configuration"));
    }
    let out = ChainOutput {
        config: cfg,
        effect_labels: summary.effect_labels,
        item_names: summary.item_names,
        covariate_names: summary.covariate_names,
        beta,
        delta,
        kappa,
        lambda,
        r,
        gamma,
        omega,
        log_joint,
        alpha_tally,
        kappa_acceptance: summary
            .kappa_acceptance
            .iter()
            .map(|a| a.unwrap_or(f64::NAN))
            .collect(),
        sigma_kappa: summary.sigma_kappa,
        gamma_top_unbounded: summary.gamma_top_unbounded,
    };
    Ok((out, summary.init_warnings))
}

pub fn write_geweke_csv(path: &Path, names: &[String], results: &[GewekeResult]) -> Result<()> {
    assert_eq!(names.len(), results.len(), "one result per name");
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["parameter", "z", "degenerate"])?;
    for (name, res) in names.iter().zip(results) {
        let z = if res.z.is_nan() { String::new() } else { res.z.to_string() };
        writer.write_record([name.as_str(), z.as_str(), if res.degenerate { "true" } else { "false" }])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_comparison_csv(path: &Path, rows: &[ModelComparisonRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record([
        "label",
        "k",
        "l",
        "classes",
        "measurement_params",
        "structural_params",
        "u",
        "z",
        "beta_sparsity",
    ])?;
    for row in rows {
        writer.write_record([
            row.label.clone(),
            row.k.to_string(),
            row.l.to_string(),
            row.classes.to_string(),
            row.measurement_params.to_string(),
            row.structural_params.to_string(),
            row.u.to_string(),
            row.z.to_string(),
            row.beta_sparsity.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Posterior predictive comparison written by the `ppc` command.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PpcReport {
    pub schema_version: u32,
    pub replicates: usize,
    pub pairs: usize,
    pub u: f64,
    pub z: f64,
    pub mean_observed_discrepancy: f64,
    pub mean_replicate_discrepancy: f64,
    pub warnings: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::recovery::tests::{degenerate_output, toy_truth};
    use tempfile::tempdir;

    #[test]
    fn level_csv_roundtrip_and_inference() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("y.csv");
        let y = DMatrix::from_row_slice(3, 2, &[0, 2, 1, 0, 2, 1]);
        let names = item_labels(2);
        write_level_csv(&path, &y, &names).unwrap();
        let (back, back_names) = read_level_csv(&path).unwrap();
        assert_eq!(back, y);
        assert_eq!(back_names, names);
        assert_eq!(infer_levels(&y), vec![3, 3]);
        // A constant column still reports two levels.
        let flat = DMatrix::from_element(4, 1, 0u8);
        assert_eq!(infer_levels(&flat), vec![2]);
    }

    #[test]
    fn bad_cells_report_their_line() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("y.csv");
        fs::write(&path, "item1,item2\n0,1\n2,oops\n").unwrap();
        let err = read_level_csv(&path).unwrap_err();
        match err {
            Error::Data { line, .. } => assert_eq!(line, Some(3)),
            other => panic!("unexpected error {other}"),
        }
        let empty = dir.path().join("empty.csv");
        fs::write(&empty, "item1,item2\n").unwrap();
        assert!(read_level_csv(&empty).is_err());
    }

    #[test]
    fn numeric_csv_roundtrip_is_exact() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("x.csv");
        let x = DMatrix::from_row_slice(2, 3, &[1.0, -0.123456789123456789, 3.5e-300, 1.0, 2.0, 0.1]);
        write_numeric_csv(&path, &x, &covariate_labels(3)).unwrap();
        let (back, _) = read_numeric_csv(&path).unwrap();
        assert_eq!(back, x);
        fs::write(&path, "x1\ninf\n").unwrap();
        assert!(read_numeric_csv(&path).is_err());
    }

    #[test]
    fn truth_json_roundtrip_is_exact() {
        let truth = toy_truth();
        let dir = tempdir().unwrap();
        let path = dir.path().join("truth.json");
        write_truth_json(&path, &truth).unwrap();
        let back = read_truth_json(&path).unwrap();
        assert_eq!(back.items.beta, truth.items.beta);
        assert_eq!(back.items.delta, truth.items.delta);
        assert_eq!(back.items.kappa, truth.items.kappa);
        assert_eq!(back.structural.lambda, truth.structural.lambda);
        assert_eq!(back.structural.r, truth.structural.r);
        assert_eq!(back.structural.gamma, truth.structural.gamma);
    }

    #[test]
    fn corrupt_truth_files_are_rejected() {
        let truth = toy_truth();
        let mut file = TruthFile::from_params(&truth);
        file.r_upper = vec![1.5];
        assert!(file.to_params().is_err());
        let mut file = TruthFile::from_params(&truth);
        file.kappa_interior[0] = vec![0.0];
        assert!(file.to_params().is_err(), "interior cut at the anchor is not increasing");
        let mut file = TruthFile::from_params(&truth);
        file.beta.pop();
        assert!(file.to_params().is_err());
    }

    #[test]
    fn chain_dir_roundtrip_preserves_everything() {
        let truth = toy_truth();
        let cfg = crate::config::ModelConfig::new(6, vec![3; 4], 2, 2, 3, 2);
        let alpha = DMatrix::<u8>::from_fn(6, 2, |i, k| ((i >> k) & 1) as u8);
        let mut out = degenerate_output(&cfg, &truth, &alpha, 3);
        out.log_joint = vec![-10.5, -9.25, -11.0];
        out.kappa_acceptance[2] = f64::NAN;
        let dir = tempdir().unwrap();
        let chain_dir = dir.path().join("chain_00");
        write_chain_dir(&chain_dir, &out, &["weak signal".into()]).unwrap();
        let (back, warnings) = read_chain_dir(&chain_dir).unwrap();
        assert_eq!(warnings, vec!["weak signal".to_string()]);
        assert_eq!(back.draws(), 3);
        assert_eq!(back.beta.values(), out.beta.values());
        assert_eq!(back.beta.names(), out.beta.names());
        assert_eq!(back.delta.values(), out.delta.values());
        assert_eq!(back.kappa.values(), out.kappa.values());
        assert_eq!(back.lambda.values(), out.lambda.values());
        assert_eq!(back.r.values(), out.r.values());
        assert_eq!(back.omega.values(), out.omega.values());
        assert_eq!(back.log_joint, out.log_joint);
        assert_eq!(back.alpha_tally, out.alpha_tally);
        assert!(back.kappa_acceptance[2].is_nan());
        assert_eq!(back.kappa_acceptance[0], out.kappa_acceptance[0]);
        // L = 2: no threshold file, but the block still reports the draws.
        assert!(!chain_dir.join("gamma.csv").exists());
        assert_eq!(back.gamma.rows(), 3);
        assert_eq!(back.gamma.cols(), 0);
    }

    #[test]
    fn tampered_chain_dirs_are_rejected() {
        let truth = toy_truth();
        let cfg = crate::config::ModelConfig::new(4, vec![3; 4], 2, 2, 3, 2);
        let alpha = DMatrix::<u8>::zeros(4, 2);
        let out = degenerate_output(&cfg, &truth, &alpha, 2);
        let dir = tempdir().unwrap();
        let chain_dir = dir.path().join("chain_00");
        write_chain_dir(&chain_dir, &out, &[]).unwrap();
        // Drop a column from the coefficient block.
        let beta_path = chain_dir.join("beta.csv");
        let text = fs::read_to_string(&beta_path).unwrap();
        let truncated: Vec<String> = text
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect();
        fs::write(&beta_path, truncated.join("\n")).unwrap();
        assert!(read_chain_dir(&chain_dir).is_err());
    }

    #[test]
    fn run_config_schema_is_enforced() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("config.json");
        let run = RunConfig::new(crate::config::ModelConfig::new(5, vec![3], 1, 2, 1, 1));
        write_json(&path, &run).unwrap();
        assert!(read_run_config(&path).is_ok());
        let mut bad = run.clone();
        bad.schema_version = 99;
        write_json(&path, &bad).unwrap();
        assert!(read_run_config(&path).is_err());
    }

    #[test]
    fn geweke_and_comparison_tables_write() {
        let dir = tempdir().unwrap();
        let gpath = dir.path().join("geweke.csv");
        let names = vec!["beta[item1][0 0]".to_string(), "omega".to_string()];
        let results = vec![
            GewekeResult { z: 0.5, degenerate: false },
            GewekeResult { z: f64::NAN, degenerate: true },
        ];
        write_geweke_csv(&gpath, &names, &results).unwrap();
        let text = fs::read_to_string(&gpath).unwrap();
        assert!(text.contains("beta[item1][0 0],0.5,false"));
        assert!(text.contains("omega,,true"));
        let cpath = dir.path().join("comparison.csv");
        let row = ModelComparisonRow {
            label: "fit-a".into(),
            k: 2,
            l: 2,
            classes: 4,
            measurement_params: 75,
            structural_params: 7,
            u: 100.0,
            z: -0.25,
            beta_sparsity: 0.125,
        };
        write_comparison_csv(&cpath, &[row]).unwrap();
        let text = fs::read_to_string(&cpath).unwrap();
        assert!(text.lines().count() == 2);
        assert!(text.contains("fit-a,2,2,4,75,7,100,-0.25,0.125"));
    }
}
