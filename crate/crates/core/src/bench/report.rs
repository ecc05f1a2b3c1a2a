//! Result tables and the run summary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::artifacts::{write_file, ArtifactError};
use super::beta::{mean_std, BetaReport};
use super::efficiency::{sign_test, EfficiencyResults};
use super::preset::ExperimentConfig;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("nothing to report")]
    Empty,
    #[error(transparent)]
    Io(#[from] ArtifactError),
}

/// Hash git assigns to a blob with these contents.
pub fn git_blob_hash(bytes: &[u8]) -> String {
    let mut h = sha1_smol::Sha1::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.digest().to_string()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportInput {
    pub name: String,
    pub hash: String,
}

impl ReportInput {
    pub fn new(name: impl Into<String>, bytes: &[u8]) -> ReportInput {
        ReportInput {
            name: name.into(),
            hash: git_blob_hash(bytes),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BetaRun {
    pub seed: u64,
    pub report: BetaReport,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub config: ExperimentConfig,
    pub beta: Vec<BetaRun>,
    pub efficiency: Option<EfficiencyResults>,
    pub inputs: Vec<ReportInput>,
}

/// Pooled fractions of every run of one space.
pub fn pooled_beta(runs: &[BetaRun], space: &str) -> Option<(f64, f64)> {
    let fractions: Vec<f64> = runs
        .iter()
        .filter(|r| r.report.space == space)
        .flat_map(|r| r.report.programs.iter().map(|p| p.fraction()))
        .collect();
    (!fractions.is_empty()).then(|| mean_std(&fractions))
}

fn beta_spaces(runs: &[BetaRun]) -> Vec<&str> {
    let mut spaces: Vec<&str> = runs.iter().map(|r| r.report.space.as_str()).collect();
    spaces.sort_unstable();
    spaces.dedup();
    spaces
}

pub fn beta_csv(runs: &[BetaRun], space: &str) -> String {
    let mut out = String::from("seed,program,identical,neighbors,fraction\n");
    for r in runs.iter().filter(|r| r.report.space == space) {
        for (i, p) in r.report.programs.iter().enumerate() {
            let _ = writeln!(out, "{},{i},{},{},{:.6}", r.seed, p.identical, p.neighbors, p.fraction());
        }
    }
    out
}

fn join<T: ToString>(xs: impl IntoIterator<Item = T>) -> String {
    xs.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn summary_text(report: &Report) -> String {
    let mut out = String::new();
    if !report.beta.is_empty() {
        let mut seeds: Vec<u64> = report.beta.iter().map(|r| r.seed).collect();
        seeds.sort_unstable();
        seeds.dedup();
        let _ = writeln!(out, "beta seeds: {}", join(seeds));
    }
    if let Some(e) = &report.efficiency {
        let _ = writeln!(out, "efficiency seeds: {}", join(&e.seeds));
    }
    out.push_str("\nconfig:\n");
    for line in report.config.to_text().lines() {
        let _ = writeln!(out, "  {line}");
    }
    out.push_str("\ninputs:\n");
    for input in &report.inputs {
        let _ = writeln!(out, "  {}  {}", input.hash, input.name);
    }
    if !report.beta.is_empty() {
        out.push_str("\nbeta:\n");
        for space in beta_spaces(&report.beta) {
            let (mean, std) = pooled_beta(&report.beta, space).unwrap_or_default();
            let n: usize = report
                .beta
                .iter()
                .filter(|r| r.report.space == space)
                .map(|r| r.report.programs.len())
                .sum();
            let _ = writeln!(out, "  {space}: mean {mean:.4} std {std:.4} over {n} programs");
            for r in report.beta.iter().filter(|r| r.report.space == space) {
                let _ = writeln!(out, "    seed {}: mean {:.4} std {:.4}", r.seed, r.report.mean, r.report.std);
            }
        }
    }
    if let Some(e) = &report.efficiency {
        out.push_str("\nefficiency:\n");
        for row in &e.rows {
            let s = sign_test(&row.per_seed);
            let _ = writeln!(
                out,
                "  games {} {} vs {}: mean {:.2} ci95 [{:.2}, {:.2}] sign {}/{}/{} p {:.4}",
                row.games, row.mode, row.opponent, row.mean, row.ci95.0, row.ci95.1, s.wins, s.losses, s.ties, s.p_value
            );
        }
    }
    out
}

/// Writes one CSV per experiment and `summary.txt` into `dir`, returning
/// the paths written.
pub fn emit_report(report: &Report, dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    if report.beta.is_empty() && report.efficiency.is_none() {
        return Err(ReportError::Empty);
    }
    let mut written = Vec::new();
    for space in beta_spaces(&report.beta) {
        let path = dir.join(format!("beta_{space}.csv"));
        write_file(&path, &beta_csv(&report.beta, space))?;
        written.push(path);
    }
    if let Some(e) = &report.efficiency {
        let path = dir.join("efficiency.csv");
        write_file(&path, &e.to_csv())?;
        written.push(path);
    }
    let path = dir.join("summary.txt");
    write_file(&path, &summary_text(report))?;
    written.push(path);
    Ok(written)
}
