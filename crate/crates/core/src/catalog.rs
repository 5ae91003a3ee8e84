//! The worked example patterns, all with `X = 0`, `T = 1`.

use crate::model::StoragePattern;

#[derive(Debug, Clone)]
pub struct NamedPattern {
    pub name: &'static str,
    pub pattern: StoragePattern,
    pub x: usize,
    pub t: usize,
}

/// Messages per set in the catalog patterns.
pub const CATALOG_COUNT: usize = 2;

const LAYOUTS: &[(&str, usize, &[&[usize]])] = &[
    ("sec2_running", 4, &[&[1, 2, 4], &[1, 2, 3], &[1, 4], &[3, 4]]),
    ("example_1", 4, &[&[1, 2, 4], &[1, 2, 3], &[1, 3, 4]]),
    ("example_2", 5, &[&[1, 3, 4], &[3, 4, 5], &[2, 3, 5]]),
    ("example_3", 5, &[&[1, 3, 4], &[1, 3, 4, 5], &[2, 3, 5]]),
    ("example_4", 5, &[&[1, 2, 3, 4], &[2, 3, 4, 5]]),
    ("example_5", 5, &[&[1, 2, 3], &[2, 3, 4], &[1, 3, 5], &[2, 4]]),
    ("example_6", 8, &[&[1, 2, 3], &[1, 3, 4], &[4, 5, 7], &[4, 6, 7], &[7, 8]]),
];

pub fn catalog() -> Vec<NamedPattern> {
    LAYOUTS
        .iter()
        .map(|(name, n, sets)| NamedPattern {
            name,
            pattern: StoragePattern::uniform(*n, CATALOG_COUNT, sets).expect("catalog pattern is valid"),
            x: 0,
            t: 1,
        })
        .collect()
}

pub fn by_name(name: &str) -> Option<NamedPattern> {
    catalog().into_iter().find(|p| p.name == name)
}
