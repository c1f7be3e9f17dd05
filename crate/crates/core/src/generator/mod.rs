//! Seeded puzzle generation, clue masking and dataset files.

mod catalog;
mod dataset;
mod text;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use catalog::{DomainCatalog, Theme};
pub use dataset::{
    emit_dataset, load_dataset, CellConfig, DatasetConfig, Manifest, ManifestCell, MissingSpec,
    DATASET_FILE, MANIFEST_FILE,
};
pub use text::{parse_clue_text, render_clue_text, TextError};

use crate::puzzle::{Clue, ClueKind, Constraint, GeneratorInfo, Puzzle, Schema, SolutionGrid};
use crate::solver::{self, Count, SolverError, DEFAULT_CAP};

pub const GENERATOR_VERSION: &str = "1";
pub const MASK_RETRIES: usize = 64;
pub const GENERATION_RESTARTS: usize = 16;
pub const MAX_GENERATED_HOUSES: usize = 6;
pub const MAX_GENERATED_ATTRIBUTES: usize = 6;

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("n_missing {n_missing} out of bounds: must be within [1, floor(|full|/2) = {max}]")]
    MaskBounds { n_missing: usize, max: usize },
    #[error("no valid mask found after {0} resamples")]
    MaskingExhausted(usize),
    #[error("no unique clue set after {0} restarts")]
    GenerationExhausted(usize),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Text(#[from] TextError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {detail}")]
    BadRecord {
        path: String,
        line: usize,
        detail: String,
    },
}

impl GeneratorError {
    /// Errors caused by the configuration rather than by the run.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            GeneratorError::InvalidConfig(_) | GeneratorError::MaskBounds { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizePreset {
    Small,
    Medium,
    Large,
}

impl SizePreset {
    pub const ALL: [SizePreset; 3] = [SizePreset::Small, SizePreset::Medium, SizePreset::Large];

    /// `(N, M)` for the preset.
    pub fn dims(self) -> (usize, usize) {
        match self {
            SizePreset::Small => (3, 3),
            SizePreset::Medium => (4, 4),
            SizePreset::Large => (5, 5),
        }
    }

    pub fn default_missing(self) -> Vec<usize> {
        match self {
            SizePreset::Small => (1..=2).collect(),
            SizePreset::Medium => (1..=4).collect(),
            SizePreset::Large => (1..=6).collect(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SizePreset::Small => "small",
            SizePreset::Medium => "medium",
            SizePreset::Large => "large",
        }
    }
}

impl fmt::Display for SizePreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SizePreset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "small" => Ok(SizePreset::Small),
            "medium" => Ok(SizePreset::Medium),
            "large" => Ok(SizePreset::Large),
            other => Err(format!("unknown size preset {other:?}")),
        }
    }
}

/// Sampling weight per clue kind, keyed by relation name in config files.
#[derive(Debug, Clone, PartialEq)]
pub struct KindWeights(pub BTreeMap<ClueKind, f64>);

impl Default for KindWeights {
    fn default() -> Self {
        let mut w: BTreeMap<ClueKind, f64> = ClueKind::ALL.into_iter().map(|k| (k, 1.0)).collect();
        w.insert(ClueKind::SameHouse, 2.0);
        w.insert(ClueKind::NotAt, 0.5);
        KindWeights(w)
    }
}

impl KindWeights {
    pub fn from_names(raw: &BTreeMap<String, f64>) -> Result<Self, GeneratorError> {
        let mut weights = KindWeights::default();
        for (name, &w) in raw {
            let kind = ClueKind::from_rel_name(name).ok_or_else(|| {
                GeneratorError::InvalidConfig(format!("unknown clue kind {name:?} in weights"))
            })?;
            if !(w.is_finite() && w >= 0.0) {
                return Err(GeneratorError::InvalidConfig(format!(
                    "weight for {name} must be finite and >= 0"
                )));
            }
            weights.0.insert(kind, w);
        }
        if !weights.0.values().any(|&w| w > 0.0) {
            return Err(GeneratorError::InvalidConfig(
                "all clue kind weights are zero".into(),
            ));
        }
        Ok(weights)
    }

    pub fn get(&self, kind: ClueKind) -> f64 {
        self.0.get(&kind).copied().unwrap_or(0.0)
    }
}

/// Everything needed to generate one puzzle.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub preset: String,
    pub n_houses: usize,
    pub n_attributes: usize,
    pub catalog: DomainCatalog,
    pub weights: KindWeights,
    pub n_missing: usize,
    pub necessity_enforced: bool,
}

impl GeneratorConfig {
    pub fn preset(preset: SizePreset, n_missing: usize, seed: u64) -> Self {
        let (n_houses, n_attributes) = preset.dims();
        GeneratorConfig {
            seed,
            preset: preset.as_str().to_string(),
            n_houses,
            n_attributes,
            catalog: DomainCatalog::shipped(),
            weights: KindWeights::default(),
            n_missing,
            necessity_enforced: true,
        }
    }

    pub fn validate(&self) -> Result<(), GeneratorError> {
        if !(2..=MAX_GENERATED_HOUSES).contains(&self.n_houses) {
            return Err(GeneratorError::InvalidConfig(format!(
                "n_houses {} outside [2, {MAX_GENERATED_HOUSES}]",
                self.n_houses
            )));
        }
        if !(1..=MAX_GENERATED_ATTRIBUTES).contains(&self.n_attributes) {
            return Err(GeneratorError::InvalidConfig(format!(
                "n_attributes {} outside [1, {MAX_GENERATED_ATTRIBUTES}]",
                self.n_attributes
            )));
        }
        if self.n_attributes > self.catalog.themes.len() {
            return Err(GeneratorError::InvalidConfig(format!(
                "catalog has {} themes, {} attributes requested",
                self.catalog.themes.len(),
                self.n_attributes
            )));
        }
        if let Some(t) = self.catalog.themes[..self.n_attributes]
            .iter()
            .find(|t| t.pool.len() < self.n_houses)
        {
            return Err(GeneratorError::InvalidConfig(format!(
                "theme {} has {} values, {} houses requested",
                t.attr,
                t.pool.len(),
                self.n_houses
            )));
        }
        if self.n_missing == 0 {
            return Err(GeneratorError::InvalidConfig(
                "n_missing must be at least 1 (bound: 1 <= n_missing <= floor(|full|/2))".into(),
            ));
        }
        Ok(())
    }
}

/// Derives a per-puzzle seed from a master seed and a puzzle index.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Picks N values per attribute from the catalog themes.
pub fn sample_schema(cfg: &GeneratorConfig, rng: &mut impl Rng) -> Schema {
    let mut attributes = Vec::with_capacity(cfg.n_attributes);
    let mut domains = Vec::with_capacity(cfg.n_attributes);
    let mut aliases = BTreeMap::new();
    for theme in &cfg.catalog.themes[..cfg.n_attributes] {
        let mut picked = index::sample(rng, theme.pool.len(), cfg.n_houses).into_vec();
        picked.sort_unstable();
        let values: Vec<String> = picked.into_iter().map(|i| theme.pool[i].clone()).collect();
        aliases.extend(theme.aliases(&values));
        attributes.push(theme.attr.clone());
        domains.push(values);
    }
    let mut schema = Schema::new(cfg.n_houses, attributes, domains);
    schema.aliases = aliases;
    schema
}

/// A uniformly random permutation per attribute.
pub fn sample_solution_grid(schema: &Schema, rng: &mut impl Rng) -> SolutionGrid {
    let positions: Vec<Vec<usize>> = (0..schema.n_attributes())
        .map(|_| {
            let mut column: Vec<usize> = (0..schema.n_houses).collect();
            column.shuffle(rng);
            column
        })
        .collect();
    SolutionGrid::from_positions(schema, &positions)
}

/// Every true statement about `grid`, grouped by kind.
///
/// Same-attribute `NotAt` statements are omitted since they hold in every grid.
pub fn candidate_pool(schema: &Schema, grid: &SolutionGrid) -> BTreeMap<ClueKind, Vec<Constraint>> {
    let mut pool: BTreeMap<ClueKind, Vec<Constraint>> = BTreeMap::new();
    let mut entities = Vec::new();
    for (a, domain) in schema.domains.iter().enumerate() {
        for (v, value) in domain.iter().enumerate() {
            let house = grid.house_of(a, value).expect("grid covers the domain");
            entities.push((a, schema.entity(a, v), house));
        }
    }
    for (_, e, house) in &entities {
        pool.entry(ClueKind::FoundAt)
            .or_default()
            .push(Constraint::found_at("", *house, e.clone()));
    }
    for (ai, lhs, hl) in &entities {
        for (aj, rhs, hr) in &entities {
            if lhs == rhs {
                continue;
            }
            for kind in ClueKind::RELATIONS {
                if kind == ClueKind::NotAt && ai == aj {
                    continue;
                }
                if kind.holds_between(*hl, *hr) {
                    pool.entry(kind).or_default().push(Constraint::relation(
                        "",
                        kind,
                        lhs.clone(),
                        rhs.clone(),
                    ));
                }
            }
        }
    }
    pool
}

/// Samples true clues by kind weight until the grid is unique, then drops
/// clues in seeded random order while uniqueness survives. Ids are `c1..cK`.
pub fn generate_clue_set(
    schema: &Schema,
    grid: &SolutionGrid,
    weights: &KindWeights,
    rng: &mut impl Rng,
) -> Result<Vec<Constraint>, GeneratorError> {
    let mut pool = candidate_pool(schema, grid);
    let mut chosen: Vec<Constraint> = Vec::new();
    loop {
        if !chosen.is_empty() && solver::is_unique(&chosen, schema)?.0 {
            break;
        }
        let kinds: Vec<ClueKind> = pool
            .iter()
            .filter(|(k, v)| !v.is_empty() && weights.get(**k) > 0.0)
            .map(|(k, _)| *k)
            .collect();
        if kinds.is_empty() {
            return Err(GeneratorError::GenerationExhausted(1));
        }
        let dist =
            WeightedIndex::new(kinds.iter().map(|k| weights.get(*k))).expect("positive weights");
        let kind = kinds[dist.sample(rng)];
        let bucket = pool.get_mut(&kind).expect("kind listed");
        let pick = rng.gen_range(0..bucket.len());
        chosen.push(bucket.swap_remove(pick));
    }

    let mut order: Vec<usize> = (0..chosen.len()).collect();
    order.shuffle(rng);
    let mut keep = vec![true; chosen.len()];
    for i in order {
        keep[i] = false;
        let trial: Vec<Constraint> = chosen
            .iter()
            .zip(&keep)
            .filter(|(_, k)| **k)
            .map(|(c, _)| c.clone())
            .collect();
        if !solver::is_unique(&trial, schema)?.0 {
            keep[i] = true;
        }
    }
    Ok(chosen
        .into_iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .enumerate()
        .map(|(i, (c, _))| c.with_id(format!("c{}", i + 1)))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Masking {
    pub visible: Vec<String>,
    pub missing: Vec<String>,
    pub k_star: usize,
    pub initial_count: u64,
}

/// Withholds `n_missing` clues so that the visible set is ambiguous and, when
/// enforced, every withheld clue is necessary for uniqueness.
pub fn mask_clues(
    full: &[Constraint],
    schema: &Schema,
    n_missing: usize,
    necessity_enforced: bool,
    rng: &mut impl Rng,
) -> Result<Masking, GeneratorError> {
    let max = full.len() / 2;
    if n_missing == 0 || n_missing > max {
        return Err(GeneratorError::MaskBounds { n_missing, max });
    }
    // Necessity of each clue depends only on the full set.
    let necessary: Vec<bool> = if necessity_enforced {
        (0..full.len())
            .map(|i| {
                let rest: Vec<Constraint> = full
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, c)| c.clone())
                    .collect();
                solver::is_unique(&rest, schema).map(|(u, _)| !u)
            })
            .collect::<Result<_, _>>()?
    } else {
        vec![true; full.len()]
    };
    for _ in 0..MASK_RETRIES {
        let mut picked = index::sample(rng, full.len(), n_missing).into_vec();
        picked.sort_unstable();
        if picked.iter().any(|&i| !necessary[i]) {
            continue;
        }
        let visible: Vec<Constraint> = full
            .iter()
            .enumerate()
            .filter(|(i, _)| !picked.contains(i))
            .map(|(_, c)| c.clone())
            .collect();
        let result = solver::count_solutions(&visible, schema, DEFAULT_CAP)?;
        let Count::Exact(initial_count) = result.count else {
            continue;
        };
        if initial_count <= 1 {
            continue;
        }
        return Ok(Masking {
            visible: visible.iter().map(|c| c.id.clone()).collect(),
            missing: picked.iter().map(|&i| full[i].id.clone()).collect(),
            k_star: n_missing,
            initial_count,
        });
    }
    Err(GeneratorError::MaskingExhausted(MASK_RETRIES))
}

/// Runs the full pipeline for one puzzle: schema, grid, clue set, text, mask.
pub fn generate_puzzle(
    cfg: &GeneratorConfig,
    id: impl Into<String>,
) -> Result<Puzzle, GeneratorError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut last_err = None;
    for _ in 0..GENERATION_RESTARTS {
        let schema = sample_schema(cfg, &mut rng);
        let grid = sample_solution_grid(&schema, &mut rng);
        let full = generate_clue_set(&schema, &grid, &cfg.weights, &mut rng)?;
        let masking = match mask_clues(
            &full,
            &schema,
            cfg.n_missing,
            cfg.necessity_enforced,
            &mut rng,
        ) {
            Ok(m) => m,
            Err(e @ (GeneratorError::MaskBounds { .. } | GeneratorError::MaskingExhausted(_))) => {
                last_err = Some(e);
                continue;
            }
            Err(e) => return Err(e),
        };
        let full_clues = full
            .into_iter()
            .map(|c| {
                let text = render_clue_text(&c, &cfg.catalog)?;
                Ok(Clue {
                    constraint: c,
                    text,
                })
            })
            .collect::<Result<Vec<_>, GeneratorError>>()?;
        return Ok(Puzzle {
            id: id.into(),
            schema,
            full_clues,
            visible: masking.visible,
            missing: masking.missing,
            solution: grid,
            k_star: masking.k_star,
            initial_count: masking.initial_count,
            necessity_enforced: cfg.necessity_enforced,
            generator: Some(GeneratorInfo {
                seed: cfg.seed,
                preset: cfg.preset.clone(),
                version: GENERATOR_VERSION.to_string(),
            }),
        });
    }
    Err(match last_err {
        Some(GeneratorError::MaskBounds { n_missing, max }) => {
            GeneratorError::MaskBounds { n_missing, max }
        }
        _ => GeneratorError::GenerationExhausted(GENERATION_RESTARTS),
    })
}

pub fn puzzle_id(
    preset: &str,
    n_houses: usize,
    n_attributes: usize,
    n_missing: usize,
    index: usize,
) -> String {
    format!("{preset}-{n_houses}x{n_attributes}-m{n_missing}-{index:04}")
}
