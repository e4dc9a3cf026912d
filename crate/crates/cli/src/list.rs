use anyhow::{bail, Context, Result};

/// Parses `"0,2,5-7"` into `[0, 2, 5, 6, 7]`. Ranges are inclusive.
pub fn parse_indices(list: &str) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.split_once('-') {
            Some((a, b)) => {
                let a: u32 = a.trim().parse().with_context(|| format!("bad range {item:?}"))?;
                let b: u32 = b.trim().parse().with_context(|| format!("bad range {item:?}"))?;
                if a > b {
                    bail!("empty range {item:?}");
                }
                out.extend(a..=b);
            }
            None => out.push(item.parse().with_context(|| format!("bad index {item:?}"))?),
        }
    }
    if out.is_empty() {
        bail!("empty list");
    }
    Ok(out)
}

/// Resolves a subject list against the dataset's ids. Items are ids
/// (`S003`) or index ranges (`0-29`).
pub fn parse_subjects(list: &str, subjects: &[String]) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some(i) = subjects.iter().position(|s| s == item) {
            out.push(i);
            continue;
        }
        for i in parse_indices(item).with_context(|| format!("unknown subject {item:?}"))? {
            let i = i as usize;
            if i >= subjects.len() {
                bail!("subject index {i} out of range (dataset has {})", subjects.len());
            }
            out.push(i);
        }
    }
    out.sort_unstable();
    out.dedup();
    if out.is_empty() {
        bail!("empty subject list");
    }
    Ok(out)
}
