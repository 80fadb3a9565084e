//! Locating the 2L-cycle that traps a stalled decoder and typing it.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::code::CssCode;
use crate::cycle::{classify_walk, cycle_rank, walk_coeffs, walk_from_columns, CycleType, CycleWitness, Side};
use crate::decoder::HistorySets;
use crate::sparse::NbSparseMatrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IdentificationFailure {
    #[error("no symbol changed during the history window")]
    EmptyHistory,
    #[error("only symbol {0} changed; one column cannot select a cycle")]
    SingleSymbol(usize),
    #[error("{0} changed symbols cannot lie on one cycle of length 2L")]
    TooManySymbols(usize),
    #[error("no cycle of length 2L contains the changed symbols and failing checks")]
    NoCycle,
    #[error("{0} distinct cycles contain the changed symbols and failing checks")]
    Ambiguous(usize),
}

fn contains_all(haystack: &[usize], needles: &[usize]) -> bool {
    needles.iter().all(|x| haystack.contains(x))
}

/// Finds the unique cycle `C` of the side's check matrix with
/// `J(l) ⊆ J(C)` and `I(l) ⊆ I(C)`.
///
/// Uses the code's cycle table when present (indexed by the first two changed
/// columns) and otherwise a bounded walk from the first changed column.
pub fn identify_cycle(code: &CssCode, side: Side, hist: &HistorySets) -> Result<CycleWitness, IdentificationFailure> {
    let l = code.params.l;
    let changed = &hist.changed;
    match changed.len() {
        0 => return Err(IdentificationFailure::EmptyHistory),
        1 => return Err(IdentificationFailure::SingleSymbol(changed[0])),
        k if k > l => return Err(IdentificationFailure::TooManySymbols(k)),
        _ => {}
    }
    if hist.unsatisfied.len() > l {
        return Err(IdentificationFailure::NoCycle);
    }
    let check = code.check(side);
    let partner = code.partner(side);
    let fits = |cols: &[usize], rows: &[usize]| contains_all(cols, changed) && contains_all(rows, &hist.unsatisfied);

    if let Some(table) = code.table(side) {
        let mut hits = table.lookup(changed[0], changed[1]).filter(|c| fits(&c.columns, &c.rows));
        if let Some(first) = hits.next() {
            let extra = hits.count();
            if extra > 0 {
                return Err(IdentificationFailure::Ambiguous(extra + 1));
            }
            return Ok(first.clone());
        }
        if table.lookup(changed[0], changed[1]).next().is_some() {
            return Err(IdentificationFailure::NoCycle);
        }
    }

    let found: Vec<Vec<usize>> = cycles_through(check, changed[0], l)
        .into_iter()
        .filter(|(cols, rows)| fits(cols, rows))
        .map(|(cols, _)| cols)
        .collect();
    match found.len() {
        0 => Err(IdentificationFailure::NoCycle),
        1 => {
            let (columns, rows) = walk_from_columns(check, &found[0]).ok_or(IdentificationFailure::NoCycle)?;
            Ok(CycleWitness::from_walk(&code.field, side, check, partner, columns, rows))
        }
        k => Err(IdentificationFailure::Ambiguous(k)),
    }
}

/// Every cycle of length 2L through column `j0`, as `(columns, rows)` sets
/// sorted ascending. Walks the row graph: column `j0` joins rows `a` and `b`,
/// and a cycle is a simple path of `l - 1` further columns from `b` back to
/// `a`.
pub fn cycles_through(check: &NbSparseMatrix, j0: usize, l: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let col = check.col(j0);
    if col.len() != 2 || l < 2 {
        return Vec::new();
    }
    let (a, b) = (col[0].0 as usize, col[1].0 as usize);
    let mut out = BTreeSet::new();
    let mut rows = vec![a, b];
    let mut cols = vec![j0];

    fn other_row(check: &NbSparseMatrix, j: usize, r: usize) -> Option<usize> {
        let c = check.col(j);
        if c.len() != 2 {
            return None;
        }
        let (x, y) = (c[0].0 as usize, c[1].0 as usize);
        Some(if x == r { y } else { x })
    }

    fn walk(
        check: &NbSparseMatrix,
        l: usize,
        target: usize,
        rows: &mut Vec<usize>,
        cols: &mut Vec<usize>,
        out: &mut BTreeSet<(Vec<usize>, Vec<usize>)>,
    ) {
        let u = *rows.last().unwrap();
        for &(j, _) in check.row(u) {
            let j = j as usize;
            if cols.contains(&j) {
                continue;
            }
            let Some(w) = other_row(check, j, u) else { continue };
            if cols.len() + 1 == l {
                if w == target {
                    let mut c = cols.clone();
                    c.push(j);
                    c.sort_unstable();
                    let mut r = rows.clone();
                    r.sort_unstable();
                    out.insert((c, r));
                }
                continue;
            }
            if rows.contains(&w) {
                continue;
            }
            rows.push(w);
            cols.push(j);
            walk(check, l, target, rows, cols, out);
            rows.pop();
            cols.pop();
        }
    }

    walk(check, l, a, &mut rows, &mut cols, &mut out);
    out.into_iter().collect()
}

/// Type of a witness against the partner matrix, recomputed from scratch:
/// a partner row through two cycle columns with exactly the cycle's support
/// makes it Type I, otherwise the O(L) cycle rank separates II from III.
pub fn classify(code: &CssCode, witness: &CycleWitness) -> CycleType {
    let check = code.check(witness.side);
    let coeffs = walk_coeffs(check, &witness.columns, &witness.rows);
    let rank = cycle_rank(&code.field, &coeffs);
    classify_walk(code.partner(witness.side), &witness.columns, rank)
}
