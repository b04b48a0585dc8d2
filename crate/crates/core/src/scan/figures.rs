//! Built-in runs reproducing the four standard figure data sets.

use crate::error::{Error, Result};
use crate::scan::config::{parse_config, ScanConfig};

const FIGURES: [&str; 4] = [
    include_str!("../../figures/fig1.toml"),
    include_str!("../../figures/fig2.toml"),
    include_str!("../../figures/fig3.toml"),
    include_str!("../../figures/fig4.toml"),
];

/// TOML source of figure `n` (1 to 4).
pub fn figure_source(n: usize) -> Option<&'static str> {
    n.checked_sub(1).and_then(|i| FIGURES.get(i)).copied()
}

pub fn figure_config(n: usize) -> Result<Vec<ScanConfig>> {
    let src = figure_source(n).ok_or_else(|| Error::Invariant(format!("no figure {n}; choose 1 to 4")))?;
    Ok(parse_config(src)?)
}
