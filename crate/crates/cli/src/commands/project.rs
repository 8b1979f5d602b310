//! `regap project`: Euclidean projection of vectors onto the permutation
//! hull described by a spec file. Input CSV: header row, then one vector of
//! `p` comma-separated values per line.

use std::path::Path;

use anyhow::{bail, Context, Result};
use regap_core::prox::{project_hull, HullSpec};

pub fn run(spec_path: &Path, input_path: &Path, output_path: &Path) -> Result<()> {
    let spec_text = std::fs::read_to_string(spec_path)
        .with_context(|| format!("reading spec {}", spec_path.display()))?;
    let spec = HullSpec::parse_records(&spec_text)?;

    let input = std::fs::read_to_string(input_path)
        .with_context(|| format!("reading input {}", input_path.display()))?;
    let mut lines = input.lines();
    let header = lines.next().context("input CSV needs a header row")?;

    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let y: Vec<f64> = line
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| anyhow::anyhow!("line {}: {e}", lineno + 2))
            })
            .collect::<Result<_>>()?;
        if y.len() != spec.dim() {
            bail!(
                "line {}: vector has {} entries, spec dimension is {}",
                lineno + 2,
                y.len(),
                spec.dim()
            );
        }
        let b = project_hull(&spec, &y)?;
        let cells: Vec<String> = b.iter().map(|v| format!("{v}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    if let Some(dir) = output_path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(output_path, out)
        .with_context(|| format!("writing {}", output_path.display()))?;
    Ok(())
}
