//! ASCII pictures of the slots of one unknown for two derivations.
//!
//! Slots with equal normal forms share a letter; a free slot whose value
//! occurs nowhere else is `*`, any other lone slot is `+`.

use std::collections::HashMap;

use crate::deriv_index::DerivIndex;
use crate::tower::{Tower, TowerElem};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RenderError {
    #[error("pictures need exactly two derivations, not {0}")]
    NotTwo(usize),
    #[error("unknown {0} out of range")]
    Unknown(usize),
}

/// `a … z`, then `aa`, `ab`, ….
pub fn letter(mut k: usize) -> String {
    let mut out = Vec::new();
    loop {
        out.push((b'a' + (k % 26) as u8) as char);
        if k < 26 {
            break;
        }
        k = k / 26 - 1;
    }
    out.iter().rev().collect()
}

/// Symbols for `cells`, listed row by row.
fn label(tower: &Tower, cells: &[DerivIndex]) -> Vec<String> {
    let values: Vec<TowerElem> = cells.iter().map(|c| tower.slot_value(c)).collect();
    let mut counts: HashMap<&TowerElem, usize> = HashMap::new();
    for v in &values {
        *counts.entry(v).or_default() += 1;
    }
    let mut letters: HashMap<&TowerElem, String> = HashMap::new();
    let mut next = 0;
    cells
        .iter()
        .zip(&values)
        .map(|(c, v)| {
            if counts[v] == 1 {
                return if tower.get(c).is_none() { "*".to_string() } else { "+".to_string() };
            }
            letters
                .entry(v)
                .or_insert_with(|| {
                    next += 1;
                    letter(next - 1)
                })
                .clone()
        })
        .collect()
}

fn check(tower: &Tower, unknown: usize) -> Result<(), RenderError> {
    if tower.m() != 2 {
        return Err(RenderError::NotTwo(tower.m()));
    }
    if unknown >= tower.n() {
        return Err(RenderError::Unknown(unknown));
    }
    Ok(())
}

fn layout(rows: &[usize], symbols: &[String]) -> String {
    let width = symbols.iter().map(|s| s.chars().count()).max().unwrap_or(1);
    let mut out = String::new();
    let mut it = symbols.iter();
    for len in rows {
        let row: Vec<String> = it.by_ref().take(*len).map(|s| format!("{s:<width$}")).collect();
        out.push_str(row.join(" ").trim_end());
        out.push('\n');
    }
    out
}

/// Row `i` holds `∂_0^i ∂_1^j` for `i + j ≤ height`.
pub fn render_triangle(tower: &Tower, unknown: usize, height: u32) -> Result<String, RenderError> {
    check(tower, unknown)?;
    let mut cells = Vec::new();
    let mut rows = Vec::new();
    for i in 0..=height {
        rows.push((height - i + 1) as usize);
        for j in 0..=height - i {
            cells.push(DerivIndex::from_entries(&[i, j], unknown));
        }
    }
    Ok(layout(&rows, &label(tower, &cells)))
}

/// Rows `i < rows`, columns `j < cols`.
pub fn render_grid(tower: &Tower, unknown: usize, rows: u32, cols: u32) -> Result<String, RenderError> {
    check(tower, unknown)?;
    let mut cells = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            cells.push(DerivIndex::from_entries(&[i, j], unknown));
        }
    }
    Ok(layout(&vec![cols as usize; rows as usize], &label(tower, &cells)))
}
