//! Enumeration and labeling of dynamical sectors.
//!
//! Three constructions are provided:
//! - plain Fock-table sectors for site-dependent occupations (permutation
//!   symmetry broken at the sector level),
//! - totally symmetric sector bases (one-row Young diagram): orbit
//!   superpositions of Fock tables,
//! - totally antisymmetric sector bases (one-column diagram): Slater
//!   determinants of distinct single-site states.
//!
//! The fragmentation census ties these to the Schur-Weyl table and splits
//! every sector by magnetization.

use std::collections::BTreeMap;

use crate::young::{schur_weyl_table, strip_full_columns, Su3Label, YoungDiagram};
use crate::{Error, Result};

/// Occupation pattern of the `L` sites.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Occupations {
    Uniform { sites: usize, per_site: u32 },
    PerSite(Vec<u32>),
}

impl Occupations {
    pub fn sites(&self) -> usize {
        match self {
            Occupations::Uniform { sites, .. } => *sites,
            Occupations::PerSite(v) => v.len(),
        }
    }

    pub fn total_particles(&self) -> u64 {
        match self {
            Occupations::Uniform { sites, per_site } => *sites as u64 * *per_site as u64,
            Occupations::PerSite(v) => v.iter().map(|&n| n as u64).sum(),
        }
    }
}

/// Permutation-symmetry part of a sector label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PermutationPart {
    Diagram(YoungDiagram),
    Symmetric,
    Antisymmetric,
    None,
}

/// Full sector label: occupations, permutation part, magnetization.
/// Diagram labels require uniform occupations (site-dependent `n_j` break
/// the permutation symmetry at the sector level).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectorLabel {
    pub occupations: Occupations,
    pub permutation_part: PermutationPart,
    /// `None` means "all magnetization blocks together".
    pub magnetization: Option<i64>,
}

impl SectorLabel {
    pub fn new(
        occupations: Occupations,
        permutation_part: PermutationPart,
        magnetization: Option<i64>,
    ) -> Result<Self> {
        if let Some(m) = magnetization {
            if m.unsigned_abs() > occupations.total_particles() {
                return Err(Error::InvalidInput(format!(
                    "|M| = {} exceeds total particle number {}",
                    m.unsigned_abs(),
                    occupations.total_particles()
                )));
            }
        }
        if matches!(permutation_part, PermutationPart::Diagram(_))
            && matches!(occupations, Occupations::PerSite(_))
        {
            return Err(Error::InvalidInput(
                "Young-diagram labels require uniform occupations".into(),
            ));
        }
        Ok(Self {
            occupations,
            permutation_part,
            magnetization,
        })
    }
}

impl std::fmt::Display for SectorLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.occupations {
            Occupations::Uniform { sites, per_site } => write!(f, "L={sites} n={per_site}")?,
            Occupations::PerSite(v) => {
                write!(f, "n=(")?;
                for (i, n) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{n}")?;
                }
                write!(f, ")")?;
            }
        }
        match &self.permutation_part {
            PermutationPart::Diagram(d) => write!(f, " lambda={d}")?,
            PermutationPart::Symmetric => write!(f, " symmetric")?,
            PermutationPart::Antisymmetric => write!(f, " antisymmetric")?,
            PermutationPart::None => {}
        }
        match self.magnetization {
            Some(m) => write!(f, " M={m}"),
            None => write!(f, " M=all"),
        }
    }
}

/// Fock table: `L x 3` occupation grid, `occ[j] = (n_j1, n_j2, n_j3)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockTable {
    pub occ: Vec<[u32; 3]>,
}

impl FockTable {
    pub fn sites(&self) -> usize {
        self.occ.len()
    }

    pub fn site_occupation(&self, j: usize) -> u32 {
        self.occ[j].iter().sum()
    }

    pub fn magnetization(&self) -> i64 {
        self.occ
            .iter()
            .map(|row| row[0] as i64 - row[2] as i64)
            .sum()
    }

    /// Canonical orbit representative: rows sorted descending.
    pub fn canonical(&self) -> FockTable {
        let mut occ = self.occ.clone();
        occ.sort_unstable_by(|a, b| b.cmp(a));
        FockTable { occ }
    }

    /// Size of the `S_L` orbit of this table: `L! / prod(multiplicities!)`.
    /// Exact in f64 for desk-scale `L` (the result divides `L!`).
    pub fn orbit_size(&self) -> f64 {
        let mut counts: BTreeMap<[u32; 3], u64> = BTreeMap::new();
        for row in &self.occ {
            *counts.entry(*row).or_insert(0) += 1;
        }
        let mut size = 1.0f64;
        let mut placed = 0u64;
        for &mult in counts.values() {
            // Multinomial built incrementally: C(placed + mult, mult).
            for k in 1..=mult {
                placed += 1;
                size = size * placed as f64 / k as f64;
            }
        }
        size.round()
    }
}

impl std::fmt::Display for FockTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.occ.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{},{},{}", row[0], row[1], row[2])?;
        }
        write!(f, "]")
    }
}

/// All single-site Fock states `(a, b, c)` with `a + b + c = n`, ordered by
/// the hypercharge hierarchy: larger `Y` first (smaller `c`), then larger
/// `I_3` (larger `a`).
pub fn single_site_states(n: u32) -> Vec<[u32; 3]> {
    let mut states = Vec::new();
    for c in 0..=n {
        for a in (0..=n - c).rev() {
            states.push([a, n - c - a, c]);
        }
    }
    states
}

/// Magnetization of a single-site state.
pub fn site_magnetization(state: [u32; 3]) -> i64 {
    state[0] as i64 - state[2] as i64
}

/// Complete, duplicate-free, deterministic enumeration of the Fock tables
/// with the given per-site occupations and total magnetization, by
/// depth-first backtracking with magnetization pruning.
///
/// An infeasible magnetization yields an empty list, not an error.
pub fn enumerate_fock_tables(n_per_site: &[u32], m: i64) -> Vec<FockTable> {
    assert!(!n_per_site.is_empty(), "need at least one site");
    // Suffix sums bound how much magnetization the remaining sites can absorb.
    let mut suffix: Vec<i64> = vec![0; n_per_site.len() + 1];
    for j in (0..n_per_site.len()).rev() {
        suffix[j] = suffix[j + 1] + n_per_site[j] as i64;
    }
    let mut out = Vec::new();
    let mut rows: Vec<[u32; 3]> = Vec::with_capacity(n_per_site.len());
    fn dfs(
        n_per_site: &[u32],
        suffix: &[i64],
        target: i64,
        acc: i64,
        rows: &mut Vec<[u32; 3]>,
        out: &mut Vec<FockTable>,
    ) {
        let j = rows.len();
        if j == n_per_site.len() {
            if acc == target {
                out.push(FockTable { occ: rows.clone() });
            }
            return;
        }
        // Remaining sites can shift M by at most the remaining particles.
        let remaining = suffix[j];
        if (target - acc).abs() > remaining {
            return;
        }
        for state in single_site_states(n_per_site[j]) {
            rows.push(state);
            dfs(
                n_per_site,
                suffix,
                target,
                acc + site_magnetization(state),
                rows,
                out,
            );
            rows.pop();
        }
    }
    dfs(n_per_site, &suffix, m, 0, &mut rows, &mut out);
    out
}

/// Basis of a sector, in one of the three concrete realizations. Matrix
/// elements are produced by `hamiltonian::build_fock_sector_hamiltonian`.
#[derive(Clone, Debug)]
pub enum SectorBasis {
    /// Raw Fock tables (site-dependent occupations).
    Plain {
        label: SectorLabel,
        tables: Vec<FockTable>,
    },
    /// Normalized uniform superpositions over `S_L` orbits; states are the
    /// canonical representatives with their orbit sizes.
    Symmetric {
        label: SectorLabel,
        orbits: Vec<FockTable>,
        orbit_sizes: Vec<f64>,
    },
    /// Normalized alternating sums over site permutations of `L` mutually
    /// distinct single-site states; states are the sorted selections.
    Antisymmetric {
        label: SectorLabel,
        selections: Vec<Vec<[u32; 3]>>,
    },
}

impl SectorBasis {
    pub fn dim(&self) -> usize {
        match self {
            SectorBasis::Plain { tables, .. } => tables.len(),
            SectorBasis::Symmetric { orbits, .. } => orbits.len(),
            SectorBasis::Antisymmetric { selections, .. } => selections.len(),
        }
    }

    pub fn label(&self) -> &SectorLabel {
        match self {
            SectorBasis::Plain { label, .. }
            | SectorBasis::Symmetric { label, .. }
            | SectorBasis::Antisymmetric { label, .. } => label,
        }
    }

    pub fn sites(&self) -> usize {
        self.label().occupations.sites()
    }
}

/// Plain Fock-table sector for site-dependent occupations.
pub fn fock_sector_basis(n_per_site: &[u32], m: i64) -> Result<SectorBasis> {
    let tables = enumerate_fock_tables(n_per_site, m);
    let label = SectorLabel::new(
        Occupations::PerSite(n_per_site.to_vec()),
        PermutationPart::None,
        Some(m),
    )?;
    Ok(SectorBasis::Plain { label, tables })
}

/// Totally symmetric sector: orbits of the multiset of table rows. The
/// basis vectors are normalized uniform superpositions over each orbit;
/// the dimension equals the number of multisets of `L` single-site states
/// with total magnetization `m`.
pub fn symmetric_sector_basis(
    sites: usize,
    n: u32,
    m: i64,
    budget: usize,
) -> Result<SectorBasis> {
    assert!(sites >= 1 && n >= 1);
    let states = single_site_states(n);
    let mut orbits = Vec::new();
    // Non-increasing sequences of state indices = canonical representatives.
    fn dfs(
        states: &[[u32; 3]],
        max_index: usize,
        left: usize,
        acc: i64,
        target: i64,
        n: u32,
        rows: &mut Vec<[u32; 3]>,
        out: &mut Vec<FockTable>,
    ) {
        if left == 0 {
            if acc == target {
                // Store the orbit representative in canonical row order.
                out.push(FockTable { occ: rows.clone() }.canonical());
            }
            return;
        }
        if (target - acc).abs() > (left as i64) * n as i64 {
            return;
        }
        for idx in 0..=max_index {
            rows.push(states[idx]);
            dfs(states, idx, left - 1, acc + site_magnetization(states[idx]), target, n, rows, out);
            rows.pop();
        }
    }
    let mut rows = Vec::with_capacity(sites);
    dfs(
        &states,
        states.len() - 1,
        sites,
        0,
        m,
        n,
        &mut rows,
        &mut orbits,
    );
    if orbits.len() > budget {
        return Err(Error::BudgetExceeded {
            what: format!("symmetric sector L={sites} n={n} M={m}"),
            dim: orbits.len(),
            budget,
        });
    }
    let orbit_sizes = orbits.iter().map(|t| t.orbit_size()).collect();
    let label = SectorLabel::new(
        Occupations::Uniform {
            sites,
            per_site: n,
        },
        PermutationPart::Symmetric,
        Some(m),
    )?;
    Ok(SectorBasis::Symmetric {
        label,
        orbits,
        orbit_sizes,
    })
}

/// Totally antisymmetric sector: all size-`L` subsets of mutually distinct
/// single-site states with total magnetization `m`, each standing for a
/// normalized determinant. Repeated-state selections have zero norm and
/// are excluded by construction; an empty basis is a valid result.
///
/// Requires uniform occupations: sites with different particle numbers
/// cannot be permuted into each other.
pub fn antisymmetric_sector_basis(n_per_site: &[u32], m: i64) -> Result<SectorBasis> {
    let Some((&first, rest)) = n_per_site.split_first() else {
        return Err(Error::InvalidInput("need at least one site".into()));
    };
    if rest.iter().any(|&n| n != first) {
        return Err(Error::InvalidInput(
            "antisymmetric sectors require a uniform number of particles per site".into(),
        ));
    }
    let sites = n_per_site.len();
    let states = single_site_states(first);
    let mut selections = Vec::new();
    // Strictly increasing index sequences = canonical distinct selections.
    fn dfs(
        states: &[[u32; 3]],
        start: usize,
        left: usize,
        acc: i64,
        target: i64,
        n: u32,
        sel: &mut Vec<[u32; 3]>,
        out: &mut Vec<Vec<[u32; 3]>>,
    ) {
        if left == 0 {
            if acc == target {
                // Determinant rows in ascending order fix the sign
                // convention used by the Hamiltonian assembly.
                let mut canonical = sel.clone();
                canonical.sort_unstable();
                out.push(canonical);
            }
            return;
        }
        if states.len() - start < left {
            return;
        }
        if (target - acc).abs() > (left as i64) * n as i64 {
            return;
        }
        for idx in start..states.len() {
            sel.push(states[idx]);
            dfs(states, idx + 1, left - 1, acc + site_magnetization(states[idx]), target, n, sel, out);
            sel.pop();
        }
    }
    let mut sel = Vec::with_capacity(sites);
    dfs(&states, 0, sites, 0, m, first, &mut sel, &mut selections);
    let label = SectorLabel::new(
        Occupations::Uniform {
            sites,
            per_site: first,
        },
        PermutationPart::Antisymmetric,
        Some(m),
    )?;
    Ok(SectorBasis::Antisymmetric { label, selections })
}

/// One row of the fragmentation census.
#[derive(Clone, Debug)]
pub struct CensusRow {
    pub diagram: YoungDiagram,
    pub stripped: YoungDiagram,
    /// `(p, q, r)` when the diagram has at most 3 rows.
    pub su3: Option<Su3Label>,
    /// Multiplicity of the sector (all copies are isospectral).
    pub specht_dim: u128,
    /// Dimension of one sector copy.
    pub weyl_dim: u128,
    /// `(M, subsector dimension)`, `M` descending; sums to `weyl_dim`.
    pub m_splits: Vec<(i64, u128)>,
}

/// Fragmentation census for `L` sites with `n` particles each.
#[derive(Clone, Debug)]
pub struct FragmentationReport {
    pub sites: usize,
    pub particles_per_site: u32,
    pub local_dim: usize,
    pub rows: Vec<CensusRow>,
    pub largest_sector: u128,
    /// `sum specht * weyl`, verified to equal `d^L` exactly.
    pub total_dim: u128,
}

/// Counts semistandard tableaux of `shape` with entries `1..=d`, split by
/// total magnetization weight. Rows weakly increase, columns strictly
/// increase; the count equals the Weyl dimension.
fn ssyt_magnetization_split(
    shape: &YoungDiagram,
    weights: &[i64],
    budget: u128,
) -> Result<BTreeMap<i64, u128>> {
    let mut split = BTreeMap::new();
    if shape.num_rows() == 0 {
        split.insert(0, 1);
        return Ok(split);
    }
    let rows = shape.rows().to_vec();
    let d = weights.len();
    // fill[r][c] = entry (1-based); iterate cells row-major.
    let mut fill: Vec<Vec<usize>> = rows.iter().map(|&len| vec![0; len]).collect();
    let mut total = 0u128;
    fn dfs(
        rows: &[usize],
        d: usize,
        weights: &[i64],
        fill: &mut Vec<Vec<usize>>,
        r: usize,
        c: usize,
        acc: i64,
        split: &mut BTreeMap<i64, u128>,
        total: &mut u128,
        budget: u128,
    ) -> Result<()> {
        if r == rows.len() {
            *split.entry(acc).or_insert(0) += 1;
            *total += 1;
            if *total > budget {
                return Err(Error::BudgetExceeded {
                    what: "semistandard tableau enumeration".into(),
                    dim: *total as usize,
                    budget: budget as usize,
                });
            }
            return Ok(());
        }
        let (next_r, next_c) = if c + 1 < rows[r] { (r, c + 1) } else { (r + 1, 0) };
        let min_left = if c > 0 { fill[r][c - 1] } else { 1 };
        let min_above = if r > 0 && fill[r - 1].len() > c {
            fill[r - 1][c] + 1
        } else {
            1
        };
        for e in min_left.max(min_above)..=d {
            fill[r][c] = e;
            dfs(rows, d, weights, fill, next_r, next_c, acc + weights[e - 1], split, total, budget)?;
        }
        fill[r][c] = 0;
        Ok(())
    }
    dfs(
        &rows, d, weights, &mut fill, 0, 0, 0, &mut split, &mut total, budget,
    )?;
    Ok(split)
}

/// Builds the census: one row per partition of `L` into at most `d` parts,
/// with Specht multiplicities, Weyl dimensions, and per-magnetization
/// splits. The total-dimension cross-check `sum = d^L` is enforced by the
/// underlying Schur-Weyl table.
pub fn fragmentation_report(sites: usize, n: u32, budget: usize) -> Result<FragmentationReport> {
    let d = ((n as usize + 1) * (n as usize + 2)) / 2;
    let table = schur_weyl_table(sites, d)?;
    let weights: Vec<i64> = single_site_states(n)
        .into_iter()
        .map(site_magnetization)
        .collect();
    let mut rows = Vec::new();
    let mut largest = 0u128;
    let mut total = 0u128;
    for row in table {
        let (stripped, _) = strip_full_columns(&row.diagram, d)?;
        let split = ssyt_magnetization_split(&stripped, &weights, budget as u128)?;
        let sum: u128 = split.values().sum();
        if sum != row.weyl_dim {
            return Err(Error::Numerical(format!(
                "magnetization split of {} sums to {sum}, expected {}",
                row.diagram, row.weyl_dim
            )));
        }
        largest = largest.max(row.weyl_dim);
        total += row.specht_dim * row.weyl_dim;
        let su3 = if row.diagram.num_rows() <= 3 && n == 1 {
            Some(Su3Label::from_diagram(&row.diagram)?)
        } else {
            None
        };
        let mut m_splits: Vec<(i64, u128)> = split.into_iter().collect();
        m_splits.reverse();
        rows.push(CensusRow {
            diagram: row.diagram,
            stripped,
            su3,
            specht_dim: row.specht_dim,
            weyl_dim: row.weyl_dim,
            m_splits,
        });
    }
    Ok(FragmentationReport {
        sites,
        particles_per_site: n,
        local_dim: d,
        rows,
        largest_sector: largest,
        total_dim: total,
    })
}
