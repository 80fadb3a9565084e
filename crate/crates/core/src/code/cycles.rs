//! Enumeration and indexing of all length-2L cycles of a column-weight-2
//! check matrix.

use std::collections::HashMap;

use thiserror::Error;

use crate::cycle::{CycleType, CycleWitness, Side};
use crate::gf::Field;
use crate::sparse::NbSparseMatrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AuditError {
    #[error("check matrix column {0} does not have weight 2")]
    ColumnWeight(usize),
    #[error("support of partner row {0} does not appear as a Type-I cycle")]
    MissingTypeI(usize),
    #[error("cycle enumeration exceeded its budget of {0} search steps")]
    TooExpensive(u64),
}

/// Row graph of a column-weight-2 matrix: rows are vertices, column `j`
/// joins its two rows. `adj[u]` lists `(column, other row)`.
fn row_graph(check: &NbSparseMatrix) -> Result<Vec<Vec<(usize, usize)>>, AuditError> {
    let mut adj = vec![Vec::new(); check.n_rows()];
    for j in 0..check.n_cols() {
        let col = check.col(j);
        if col.len() != 2 {
            return Err(AuditError::ColumnWeight(j));
        }
        let (a, b) = (col[0].0 as usize, col[1].0 as usize);
        adj[a].push((j, b));
        adj[b].push((j, a));
    }
    Ok(adj)
}

/// Normalises a walk to start at its smallest column and continue towards
/// the smaller neighbour.
fn canonical(columns: Vec<usize>, rows: Vec<usize>) -> (Vec<usize>, Vec<usize>) {
    let l = columns.len();
    let start = (0..l).min_by_key(|&k| columns[k]).unwrap();
    let fwd = columns[(start + 1) % l];
    let back = columns[(start + l - 1) % l];
    if fwd < back {
        let c = (0..l).map(|k| columns[(start + k) % l]).collect();
        let r = (0..l).map(|k| rows[(start + k) % l]).collect();
        (c, r)
    } else {
        // Reverse: column order start, start-1, ...; the row between columns
        // k-1 and k is rows[k-1].
        let c = (0..l).map(|k| columns[(start + l - k) % l]).collect();
        let r = (0..l).map(|k| rows[(start + 2 * l - k - 1) % l]).collect();
        (c, r)
    }
}

/// All cycles of length `2 * l` as canonical `(columns, rows)` walks, without
/// classification. `budget` bounds the number of DFS extensions.
pub fn enumerate_raw(check: &NbSparseMatrix, l: usize, budget: u64) -> Result<Vec<(Vec<usize>, Vec<usize>)>, AuditError> {
    let adj = row_graph(check)?;
    let m = check.n_rows();
    let mut out = Vec::new();
    let mut steps = 0u64;
    let mut path_rows = Vec::with_capacity(l);
    let mut path_cols = Vec::with_capacity(l);
    let mut on_path = vec![false; m];

    struct Ctx<'a> {
        adj: &'a [Vec<(usize, usize)>],
        l: usize,
        start: usize,
        budget: u64,
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        ctx: &Ctx<'_>,
        u: usize,
        path_rows: &mut Vec<usize>,
        path_cols: &mut Vec<usize>,
        on_path: &mut [bool],
        steps: &mut u64,
        out: &mut Vec<(Vec<usize>, Vec<usize>)>,
    ) -> Result<(), AuditError> {
        for &(j, w) in &ctx.adj[u] {
            *steps += 1;
            if *steps > ctx.budget {
                return Err(AuditError::TooExpensive(ctx.budget));
            }
            if path_cols.last() == Some(&j) {
                continue;
            }
            if path_rows.len() == ctx.l {
                // Closing edge back to the start; emit each cycle once.
                if w == ctx.start && j > path_cols[0] {
                    let mut cols = path_cols.clone();
                    cols.push(j);
                    // Row path_rows[k] sits between cols[k-1] and cols[k];
                    // rotate into the witness convention.
                    let columns: Vec<usize> = (0..ctx.l).map(|k| cols[(k + ctx.l - 1) % ctx.l]).collect();
                    out.push(canonical(columns, path_rows.clone()));
                }
                continue;
            }
            if w <= ctx.start || on_path[w] {
                continue;
            }
            on_path[w] = true;
            path_rows.push(w);
            path_cols.push(j);
            dfs(ctx, w, path_rows, path_cols, on_path, steps, out)?;
            path_rows.pop();
            path_cols.pop();
            on_path[w] = false;
        }
        Ok(())
    }

    for start in 0..m {
        let ctx = Ctx {
            adj: &adj,
            l,
            start,
            budget,
        };
        path_rows.clear();
        path_cols.clear();
        path_rows.push(start);
        on_path[start] = true;
        dfs(&ctx, start, &mut path_rows, &mut path_cols, &mut on_path, &mut steps, &mut out)?;
        on_path[start] = false;
    }
    out.sort();
    Ok(out)
}

/// Classified cycles of one side plus the column-pair lookup index.
///
/// Distinct cycles can share a pair of columns, so the index maps a pair to
/// every cycle through it.
#[derive(Clone, Debug)]
pub struct CycleTable {
    pub side: Side,
    pub cycles: Vec<CycleWitness>,
    index: HashMap<(u32, u32), Vec<u32>>,
    /// Type-I cycle id per partner row.
    type1_by_row: Vec<Option<u32>>,
}

fn pair_key(a: usize, b: usize) -> (u32, u32) {
    if a < b {
        (a as u32, b as u32)
    } else {
        (b as u32, a as u32)
    }
}

impl CycleTable {
    /// All cycles containing both columns.
    pub fn lookup(&self, a: usize, b: usize) -> impl Iterator<Item = &CycleWitness> {
        self.index
            .get(&pair_key(a, b))
            .into_iter()
            .flatten()
            .map(|&id| &self.cycles[id as usize])
    }

    /// Number of column pairs lying on more than one cycle.
    pub fn shared_pairs(&self) -> usize {
        self.index.values().filter(|v| v.len() > 1).count()
    }

    /// Largest number of cycles through a single column pair.
    pub fn max_pair_multiplicity(&self) -> usize {
        self.index.values().map(Vec::len).max().unwrap_or(0)
    }

    pub fn type1_for_row(&self, row: usize) -> Option<&CycleWitness> {
        self.type1_by_row
            .get(row)
            .copied()
            .flatten()
            .map(|id| &self.cycles[id as usize])
    }

    pub fn count(&self, kind: fn(&CycleType) -> bool) -> usize {
        self.cycles.iter().filter(|c| kind(&c.kind)).count()
    }

    pub fn type_counts(&self) -> (usize, usize, usize) {
        let mut t = (0, 0, 0);
        for c in &self.cycles {
            match c.kind {
                CycleType::TypeI { .. } => t.0 += 1,
                CycleType::TypeII => t.1 += 1,
                CycleType::TypeIII => t.2 += 1,
            }
        }
        t
    }
}

/// Default DFS budget for [`enumerate_cycles`].
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 400_000_000;

/// Enumerates, classifies and indexes every 2L-cycle of `check`. Fails when
/// the support of some partner row is not among the Type-I cycles.
pub fn enumerate_cycles(
    field: &Field,
    side: Side,
    check: &NbSparseMatrix,
    partner: &NbSparseMatrix,
    l: usize,
    budget: u64,
) -> Result<CycleTable, AuditError> {
    let raw = enumerate_raw(check, l, budget)?;
    let mut cycles = Vec::with_capacity(raw.len());
    let mut index = HashMap::new();
    let mut type1_by_row = vec![None; partner.n_rows()];
    for (id, (columns, rows)) in raw.into_iter().enumerate() {
        for a in 0..columns.len() {
            for b in a + 1..columns.len() {
                index
                    .entry(pair_key(columns[a], columns[b]))
                    .or_insert_with(Vec::new)
                    .push(id as u32);
            }
        }
        let w = CycleWitness::from_walk(field, side, check, partner, columns, rows);
        if let CycleType::TypeI { row } = w.kind {
            type1_by_row[row] = Some(id as u32);
        }
        cycles.push(w);
    }
    if let Some(row) = type1_by_row.iter().position(Option::is_none) {
        return Err(AuditError::MissingTypeI(row));
    }
    Ok(CycleTable {
        side,
        cycles,
        index,
        type1_by_row,
    })
}
