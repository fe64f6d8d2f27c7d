//! Non-fatal diagnostics carried alongside results.

use std::fmt;

use serde::Serialize;

/// Non-fatal conditions met while processing. Batch runs report these and carry on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Warning {
    ConstantLightness,
    Achromatic,
    GridReduced {
        requested: (usize, usize),
        used: (usize, usize),
    },
    /// ROD item with zero offence and zero defence; rated 0.
    UndefinedRatio { item: usize },
    /// Rating vector with every item tied; contributes nothing to aggregation.
    TotalTie { vector: usize },
    /// Ratings grid cells with no submission, scored as "no use".
    MissingCells { count: usize },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::ConstantLightness => f.write_str("constant lightness; stretch skipped"),
            Warning::Achromatic => f.write_str("no net chroma; hue shift skipped"),
            Warning::GridReduced { requested, used } => write!(
                f,
                "CLAHE grid {}x{} reduced to {}x{} to fit the image",
                requested.0, requested.1, used.0, used.1
            ),
            Warning::UndefinedRatio { item } => {
                write!(f, "item {item} neither scores nor is scored against; rated 0")
            }
            Warning::TotalTie { vector } => {
                write!(f, "rating vector {vector} ties every item and is ignored")
            }
            Warning::MissingCells { count } => {
                write!(f, "{count} unrated cells treated as N (no use)")
            }
        }
    }
}

/// A value together with the warnings raised while producing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Warned<T> {
    pub value: T,
    pub warnings: Vec<Warning>,
}

impl<T> Warned<T> {
    pub fn clean(value: T) -> Self {
        Warned {
            value,
            warnings: Vec::new(),
        }
    }

    pub fn with_warning(value: T, warning: Warning) -> Self {
        Warned {
            value,
            warnings: vec![warning],
        }
    }

    pub fn into_value(self) -> T {
        self.value
    }

    /// Unwraps the value, appending warnings to `sink`.
    pub fn collect_into(self, sink: &mut Vec<Warning>) -> T {
        sink.extend(self.warnings);
        self.value
    }
}
