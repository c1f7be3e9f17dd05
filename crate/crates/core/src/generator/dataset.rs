//! Dataset configs, JSONL dataset files and their manifests.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    derive_seed, generate_puzzle, puzzle_id, DomainCatalog, GeneratorConfig, GeneratorError,
    KindWeights, SizePreset, GENERATOR_VERSION,
};
use crate::puzzle::{validate_puzzle, DatasetRecord, Puzzle};

pub const DATASET_FILE: &str = "dataset.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MissingSpec {
    One(usize),
    Many(Vec<usize>),
}

impl MissingSpec {
    pub fn values(&self) -> Vec<usize> {
        match self {
            MissingSpec::One(k) => vec![*k],
            MissingSpec::Many(ks) => ks.clone(),
        }
    }
}

/// One block of puzzles: a size and the missing-clue counts to produce, `count` each.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<SizePreset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_houses: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_attributes: Option<usize>,
    /// Defaults to the preset's range.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_missing: Option<MissingSpec>,
    pub count: usize,
}

/// Declarative generation config, usually read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub seed: u64,
    #[serde(default = "default_true")]
    pub necessity_enforced: bool,
    #[serde(default)]
    pub weights: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog: Option<DomainCatalog>,
    pub cells: Vec<CellConfig>,
}

fn default_true() -> bool {
    true
}

impl DatasetConfig {
    pub fn from_toml(text: &str) -> Result<Self, GeneratorError> {
        toml::from_str(text).map_err(|e| GeneratorError::InvalidConfig(e.to_string()))
    }

    /// Expands the cells into per-puzzle configs and ids, in config order.
    pub fn jobs(&self) -> Result<Vec<(String, GeneratorConfig)>, GeneratorError> {
        if self.cells.is_empty() {
            return Err(GeneratorError::InvalidConfig("no cells configured".into()));
        }
        let weights = KindWeights::from_names(&self.weights)?;
        let catalog = self.catalog.clone().unwrap_or_default();
        let mut jobs = Vec::new();
        for cell in &self.cells {
            let (label, n_houses, n_attributes, default_missing) =
                match (cell.preset, cell.n_houses, cell.n_attributes) {
                    (Some(p), None, None) => {
                        let (n, m) = p.dims();
                        (p.as_str().to_string(), n, m, p.default_missing())
                    }
                    (None, Some(n), Some(m)) => (format!("{n}x{m}"), n, m, vec![1]),
                    _ => {
                        return Err(GeneratorError::InvalidConfig(
                            "each cell needs either preset or both n_houses and n_attributes"
                                .into(),
                        ))
                    }
                };
            let missing = cell
                .n_missing
                .as_ref()
                .map(MissingSpec::values)
                .unwrap_or(default_missing);
            if missing.is_empty() {
                return Err(GeneratorError::InvalidConfig(
                    "n_missing list is empty".into(),
                ));
            }
            for k in missing {
                for _ in 0..cell.count {
                    let index = jobs.len();
                    let cfg = GeneratorConfig {
                        seed: derive_seed(self.seed, index as u64),
                        preset: label.clone(),
                        n_houses,
                        n_attributes,
                        catalog: catalog.clone(),
                        weights: weights.clone(),
                        n_missing: k,
                        necessity_enforced: self.necessity_enforced,
                    };
                    cfg.validate()?;
                    jobs.push((puzzle_id(&label, n_houses, n_attributes, k, index), cfg));
                }
            }
        }
        Ok(jobs)
    }

    /// Generates every puzzle; parallel, but the output order is the job order.
    pub fn generate(&self) -> Result<Vec<Puzzle>, GeneratorError> {
        let jobs = self.jobs()?;
        jobs.par_iter()
            .map(|(id, cfg)| generate_puzzle(cfg, id.clone()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestCell {
    pub size: String,
    pub n_houses: usize,
    pub n_attributes: usize,
    pub n_missing: usize,
    pub count: usize,
}

/// Per-(size, n_missing) counts of a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub generator_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub total: usize,
    pub cells: Vec<ManifestCell>,
    /// size -> n_missing -> count.
    pub table: IndexMap<String, BTreeMap<usize, usize>>,
}

impl Manifest {
    pub fn from_puzzles(puzzles: &[Puzzle], seed: Option<u64>) -> Self {
        let mut cells: Vec<ManifestCell> = Vec::new();
        let mut table: IndexMap<String, BTreeMap<usize, usize>> = IndexMap::new();
        for p in puzzles {
            let size = p.size_label();
            *table
                .entry(size.clone())
                .or_default()
                .entry(p.k_star)
                .or_default() += 1;
            match cells
                .iter_mut()
                .find(|c| c.size == size && c.n_missing == p.k_star)
            {
                Some(c) => c.count += 1,
                None => cells.push(ManifestCell {
                    size,
                    n_houses: p.schema.n_houses,
                    n_attributes: p.schema.n_attributes(),
                    n_missing: p.k_star,
                    count: 1,
                }),
            }
        }
        Manifest {
            generator_version: GENERATOR_VERSION.to_string(),
            seed,
            total: puzzles.len(),
            cells,
            table,
        }
    }

    pub fn cell(&self, size: &str, n_missing: usize) -> usize {
        self.table
            .get(size)
            .and_then(|row| row.get(&n_missing))
            .copied()
            .unwrap_or(0)
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> GeneratorError + '_ {
    move |source| GeneratorError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Validates and writes `dataset.jsonl` and `manifest.json` under `dir`.
pub fn emit_dataset(
    puzzles: &[Puzzle],
    dir: &Path,
    seed: Option<u64>,
) -> Result<Manifest, GeneratorError> {
    for p in puzzles {
        let violations = validate_puzzle(p);
        if !violations.is_empty() {
            let names: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            return Err(GeneratorError::InvalidConfig(format!(
                "puzzle {} fails validation: {}",
                p.id,
                names.join("; ")
            )));
        }
    }
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let data_path = dir.join(DATASET_FILE);
    let file = fs::File::create(&data_path).map_err(io_err(&data_path))?;
    let mut out = BufWriter::new(file);
    for p in puzzles {
        let line =
            serde_json::to_string(&DatasetRecord::from(p)).expect("dataset records serialize");
        writeln!(out, "{line}").map_err(io_err(&data_path))?;
    }
    out.flush().map_err(io_err(&data_path))?;

    let manifest = Manifest::from_puzzles(puzzles, seed);
    let manifest_path = dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(&manifest_path, text).map_err(io_err(&manifest_path))?;
    Ok(manifest)
}

/// Reads a JSONL dataset; bad lines are reported with their 1-based line number.
pub fn load_dataset(path: &Path) -> Result<Vec<Puzzle>, GeneratorError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut puzzles = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let puzzle: Puzzle =
            serde_json::from_str(&line).map_err(|e| GeneratorError::BadRecord {
                path: path.display().to_string(),
                line: i + 1,
                detail: e.to_string(),
            })?;
        puzzles.push(puzzle);
    }
    Ok(puzzles)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_config_expands_cells() {
        let cfg = DatasetConfig::from_toml(
            r#"
seed = 3

[[cells]]
preset = "small"
count = 2

[[cells]]
n_houses = 3
n_attributes = 2
n_missing = 1
count = 1
"#,
        )
        .unwrap();
        let jobs = cfg.jobs().unwrap();
        let ids: Vec<&str> = jobs.iter().map(|(id, _)| id.as_str()).collect();
        assert_eq!(
            ids,
            [
                "small-3x3-m1-0000",
                "small-3x3-m1-0001",
                "small-3x3-m2-0002",
                "small-3x3-m2-0003",
                "3x2-3x2-m1-0004"
            ]
        );
        assert!(jobs.iter().all(|(_, c)| c.necessity_enforced));
    }

    #[test]
    fn bad_cells_are_config_errors() {
        let zero = DatasetConfig::from_toml(
            "seed = 1\n[[cells]]\npreset = \"small\"\nn_missing = 0\ncount = 1\n",
        )
        .unwrap()
        .jobs()
        .unwrap_err();
        assert!(zero.is_config_error());
        assert!(zero.to_string().contains("n_missing"));
        let unknown =
            DatasetConfig::from_toml("seed = 1\nbogus = 2\n[[cells]]\ncount = 1\n").unwrap_err();
        assert!(unknown.is_config_error());
    }

    #[test]
    fn round_trip_through_files() {
        let cfg = DatasetConfig::from_toml("seed = 9\n[[cells]]\npreset = \"small\"\ncount = 3\n")
            .unwrap();
        let puzzles = cfg.generate().unwrap();
        let dir = tempfile::tempdir().unwrap();
        let manifest = emit_dataset(&puzzles, dir.path(), Some(9)).unwrap();
        assert_eq!(manifest.total, 6);
        assert_eq!(manifest.cell("small", 1), 3);
        assert_eq!(manifest.cell("small", 2), 3);
        let back = load_dataset(&dir.path().join(DATASET_FILE)).unwrap();
        assert_eq!(back, puzzles);
    }

    #[test]
    fn bad_line_reports_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        let good = serde_json::to_string(&crate::fixtures::figure_puzzle()).unwrap();
        fs::write(&path, format!("{good}\n{{\"id\": 3}}\n")).unwrap();
        match load_dataset(&path) {
            Err(GeneratorError::BadRecord { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected BadRecord, got {other:?}"),
        }
    }
}
