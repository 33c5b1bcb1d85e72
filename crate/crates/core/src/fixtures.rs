//! Built-in tables and figure grids, plus loaders for user-supplied files.
//!
//! A fixture is a TOML document:
//!
//! ```toml
//! id = "table3"
//! seed = ["ZZI IIZ ZII", "XXI IIX XII"]
//! structure = "(3,0,6)"
//! structure_origin = "printed"
//!
//! [[figures]]
//! name = "fig3r"
//! origin = "printed"
//! exact = true
//! displacement = "0,u^3"
//! grid = """
//! ...
//! """
//! ```
//!
//! `rows` may list a full table; otherwise the table is the expansion of
//! `seed`. `origin` is `printed` for values transcribed from the literature
//! and `computed` for values produced by this crate.

use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::mubtab::{expand_seed, GeneratorTable, MubError, MubStructure, SeedTable};

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("unknown fixture {0:?}")]
    Unknown(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed fixture: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Mub(#[from] MubError),
    #[error("fixture {id}: {message}")]
    Invalid { id: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct FigureFixture {
    pub name: String,
    pub origin: String,
    /// Whether the rendered grid is expected to match cell for cell.
    pub exact: bool,
    pub displacement: Option<String>,
    pub grid: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct Fixture {
    pub id: String,
    pub seed: Option<[String; 2]>,
    pub rows: Option<Vec<String>>,
    pub rows_origin: Option<String>,
    pub structure: Option<String>,
    pub structure_origin: Option<String>,
    #[serde(default)]
    pub figures: Vec<FigureFixture>,
}

const BUILTIN: [(&str, &str); 10] = [
    ("table1", include_str!("../fixtures/table1.toml")),
    ("table2a", include_str!("../fixtures/table2a.toml")),
    ("table2b", include_str!("../fixtures/table2b.toml")),
    ("table2c", include_str!("../fixtures/table2c.toml")),
    ("table2d", include_str!("../fixtures/table2d.toml")),
    ("table2e", include_str!("../fixtures/table2e.toml")),
    ("table3", include_str!("../fixtures/table3.toml")),
    ("table4", include_str!("../fixtures/table4.toml")),
    ("table5", include_str!("../fixtures/table5.toml")),
    ("table6", include_str!("../fixtures/table6.toml")),
];

pub fn builtin_ids() -> Vec<&'static str> {
    BUILTIN.iter().map(|(id, _)| *id).collect()
}

pub fn builtin(id: &str) -> Result<Fixture, FixtureError> {
    let (_, text) = BUILTIN
        .iter()
        .find(|(k, _)| *k == id)
        .ok_or_else(|| FixtureError::Unknown(id.into()))?;
    Fixture::from_toml(text)
}

pub fn all_builtin() -> Vec<Fixture> {
    BUILTIN
        .iter()
        .map(|(_, t)| Fixture::from_toml(t).expect("built-in fixture parses"))
        .collect()
}

/// The built-in figure with this name, and the fixture carrying it.
pub fn figure(name: &str) -> Option<(Fixture, FigureFixture)> {
    all_builtin().into_iter().find_map(|f| {
        let fig = f.figures.iter().find(|g| g.name == name).cloned()?;
        Some((f, fig))
    })
}

impl Fixture {
    pub fn from_toml(text: &str) -> Result<Self, FixtureError> {
        let f: Fixture = toml::from_str(text)?;
        if f.seed.is_none() && f.rows.is_none() {
            return Err(FixtureError::Invalid {
                id: f.id,
                message: "needs seed or rows".into(),
            });
        }
        Ok(f)
    }

    pub fn seed_table(&self) -> Result<Option<SeedTable>, FixtureError> {
        self.seed
            .as_ref()
            .map(|[a, b]| SeedTable::parse(a, b))
            .transpose()
            .map_err(Into::into)
    }

    /// The listed rows if present, else the expansion of the seed.
    pub fn table(&self) -> Result<GeneratorTable, FixtureError> {
        match (&self.rows, self.seed_table()?) {
            (Some(rows), _) => Ok(GeneratorTable::parse(&rows.join("\n"))?),
            (None, Some(seed)) => Ok(expand_seed(&seed)),
            (None, None) => unreachable!("checked on load"),
        }
    }

    pub fn expected_structure(&self) -> Result<Option<MubStructure>, FixtureError> {
        self.structure
            .as_deref()
            .map(|s| {
                s.parse().map_err(|e: MubError| FixtureError::Invalid {
                    id: self.id.clone(),
                    message: e.to_string(),
                })
            })
            .transpose()
    }
}

/// Resolves a table argument: a built-in id, a `.toml` fixture file, or a
/// plain-text file with either two seed rows or a full table.
pub fn resolve_table(arg: &str) -> Result<(String, GeneratorTable), FixtureError> {
    if let Ok(f) = builtin(arg) {
        return Ok((f.id.clone(), f.table()?));
    }
    let path = Path::new(arg);
    let text = std::fs::read_to_string(path).map_err(|source| match source.kind() {
        std::io::ErrorKind::NotFound => FixtureError::Unknown(arg.into()),
        _ => FixtureError::Io {
            path: arg.into(),
            source,
        },
    })?;
    if path.extension().is_some_and(|e| e == "toml") {
        let f = Fixture::from_toml(&text)?;
        return Ok((f.id.clone(), f.table()?));
    }
    let lines: Vec<&str> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .collect();
    let table = if lines.len() == 2 {
        expand_seed(&SeedTable::parse(lines[0], lines[1])?)
    } else {
        GeneratorTable::parse(&text)?
    };
    Ok((arg.to_string(), table))
}
