//! Partition and Young-diagram combinatorics.
//!
//! Young diagrams with `L` boxes label the irreps of the site-permutation
//! group `S_L` (Specht modules); diagrams with at most `d-1` rows label the
//! irreps of `SU(d)`. The Schur-Weyl table pairs the two and carries the
//! dimension identity `sum_lambda specht * weyl = d^L`.

use num_bigint::BigUint;

use crate::{Error, Result};

/// Integer partition stored as its non-increasing row lengths.
///
/// The empty diagram (zero boxes) is a valid value; it labels the trivial
/// representation left after stripping all full columns.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct YoungDiagram {
    rows: Vec<usize>,
}

impl YoungDiagram {
    /// Builds a diagram from row lengths, rejecting increasing or zero rows.
    pub fn new(rows: Vec<usize>) -> Result<Self> {
        if rows.contains(&0) {
            return Err(Error::InvalidInput("diagram rows must be positive".into()));
        }
        if !rows.windows(2).all(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(format!(
                "diagram rows must be non-increasing, got {rows:?}"
            )));
        }
        Ok(Self { rows })
    }

    /// The empty diagram.
    pub fn empty() -> Self {
        Self { rows: Vec::new() }
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    /// Number of rows.
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Total number of boxes.
    pub fn boxes(&self) -> usize {
        self.rows.iter().sum()
    }

    /// Row length with zero-padding past the last row.
    pub fn row(&self, i: usize) -> usize {
        self.rows.get(i).copied().unwrap_or(0)
    }

    /// Conjugate (transposed) diagram.
    pub fn conjugate(&self) -> Self {
        let cols = self.row(0);
        let rows = (0..cols)
            .map(|c| self.rows.iter().filter(|&&r| r > c).count())
            .collect();
        Self { rows }
    }

    /// Number of columns containing exactly `height` rows.
    pub fn columns_of_height(&self, height: usize) -> usize {
        self.conjugate()
            .rows()
            .iter()
            .filter(|&&h| h == height)
            .count()
    }
}

impl std::fmt::Display for YoungDiagram {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, ")")
    }
}

/// SU(3) sector label: columns of the `S_L` diagram with one, two, and
/// three rows. Satisfies `p + 2q + 3r = L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Su3Label {
    pub p: usize,
    pub q: usize,
    pub r: usize,
}

impl Su3Label {
    /// Reads `(p, q, r)` off a diagram with at most 3 rows.
    pub fn from_diagram(diagram: &YoungDiagram) -> Result<Self> {
        if diagram.num_rows() > 3 {
            return Err(Error::InvalidInput(format!(
                "diagram {diagram} has more than 3 rows"
            )));
        }
        let r = diagram.columns_of_height(3);
        let q = diagram.columns_of_height(2);
        let p = diagram.columns_of_height(1);
        Ok(Self { p, q, r })
    }

    /// Total boxes `p + 2q + 3r`.
    pub fn boxes(&self) -> usize {
        self.p + 2 * self.q + 3 * self.r
    }

    /// Dimension of the SU(3) irrep `D(p,q)`: `(p+1)(q+1)(p+q+2)/2`.
    pub fn irrep_dim(&self) -> usize {
        (self.p + 1) * (self.q + 1) * (self.p + self.q + 2) / 2
    }
}

/// One row of the Schur-Weyl table for `(L, d)`.
#[derive(Clone, Debug)]
pub struct SchurWeylRow {
    /// `S_L` label (at most `d` rows, `L` boxes).
    pub diagram: YoungDiagram,
    /// Multiplicity of the sector: dimension of the Specht module.
    pub specht_dim: u128,
    /// Dimension of the paired SU(d) irrep.
    pub weyl_dim: u128,
    /// Diagram with full columns removed (at most `d-1` rows).
    pub stripped: YoungDiagram,
}

/// Enumerates every partition of `total` into at most `max_parts` parts, in
/// lexicographically decreasing order.
pub fn enumerate_partitions(total: usize, max_parts: usize) -> Vec<YoungDiagram> {
    assert!(total >= 1 && max_parts >= 1, "need total >= 1, max_parts >= 1");
    let mut out = Vec::new();
    let mut current = Vec::new();
    descend(total, total, max_parts, &mut current, &mut out);
    out
}

fn descend(
    remaining: usize,
    cap: usize,
    parts_left: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<YoungDiagram>,
) {
    if remaining == 0 {
        out.push(YoungDiagram {
            rows: current.clone(),
        });
        return;
    }
    if parts_left == 0 {
        return;
    }
    // Largest feasible first part gives lexicographically decreasing output.
    let hi = remaining.min(cap);
    // A part must leave the remainder representable: remaining - part <= part * (parts_left - 1).
    for part in (1..=hi).rev() {
        if remaining - part <= part * (parts_left - 1) {
            current.push(part);
            descend(remaining - part, part, parts_left - 1, current, out);
            current.pop();
        }
    }
}

/// Number of partitions of `total` into at most `max_parts` parts.
pub fn partition_count(total: usize, max_parts: usize) -> usize {
    enumerate_partitions(total, max_parts).len()
}

fn factorial(n: usize) -> BigUint {
    (1..=n as u64).map(BigUint::from).product()
}

fn to_u128(value: BigUint, what: &str) -> Result<u128> {
    u128::try_from(&value)
        .map_err(|_| Error::DimensionOverflow(format!("{what} = {value} exceeds u128")))
}

/// Dimension of the Specht module: `L! / prod hooks` (number of standard
/// Young tableaux). Exact big-integer arithmetic internally; errors if the
/// result exceeds the exposed width.
pub fn specht_dimension(diagram: &YoungDiagram) -> Result<u128> {
    let boxes = diagram.boxes();
    let conj = diagram.conjugate();
    let mut hooks = BigUint::from(1u32);
    for (i, &len) in diagram.rows().iter().enumerate() {
        for j in 0..len {
            let hook = (len - j) + (conj.row(j) - i) - 1;
            hooks *= BigUint::from(hook as u64);
        }
    }
    let dim = factorial(boxes) / hooks;
    to_u128(dim, "Specht dimension")
}

/// Weyl dimension of the SU(d) irrep labeled by `stripped` (at most `d-1`
/// rows; rows are zero-padded to length `d`):
/// `prod_{i<j} (lambda_i - lambda_j + j - i) / (j - i)`, an exact integer.
pub fn weyl_dimension(stripped: &YoungDiagram, d: usize) -> Result<u128> {
    if d < 2 {
        return Err(Error::InvalidInput("need d >= 2".into()));
    }
    if stripped.num_rows() > d - 1 {
        return Err(Error::InvalidInput(format!(
            "diagram {stripped} has more than d-1 = {} rows",
            d - 1
        )));
    }
    let mut num = BigUint::from(1u32);
    let mut den = BigUint::from(1u32);
    for i in 0..d {
        for j in (i + 1)..d {
            let li = stripped.row(i);
            let lj = stripped.row(j);
            num *= BigUint::from((li - lj + j - i) as u64);
            den *= BigUint::from((j - i) as u64);
        }
    }
    to_u128(num / den, "Weyl dimension")
}

/// Removes the columns of length `d` from `diagram`, returning the stripped
/// diagram and the number of removed columns.
pub fn strip_full_columns(diagram: &YoungDiagram, d: usize) -> Result<(YoungDiagram, usize)> {
    if diagram.num_rows() > d {
        return Err(Error::InvalidInput(format!(
            "diagram {diagram} has more than d = {d} rows"
        )));
    }
    if diagram.num_rows() < d {
        return Ok((diagram.clone(), 0));
    }
    let r = diagram.row(d - 1);
    let rows = diagram
        .rows()
        .iter()
        .map(|&len| len - r)
        .filter(|&len| len > 0)
        .collect();
    Ok((YoungDiagram { rows }, r))
}

/// Full Schur-Weyl table for `(L, d)`: one row per partition of `L` into at
/// most `d` parts. Verifies the dimension identity
/// `sum specht * weyl = d^L` exactly and fails hard if it does not hold.
pub fn schur_weyl_table(sites: usize, d: usize) -> Result<Vec<SchurWeylRow>> {
    if sites < 1 || d < 2 {
        return Err(Error::InvalidInput("need L >= 1 and d >= 2".into()));
    }
    let mut rows = Vec::new();
    let mut total = BigUint::from(0u32);
    for diagram in enumerate_partitions(sites, d) {
        let (stripped, _) = strip_full_columns(&diagram, d)?;
        let specht = specht_dimension(&diagram)?;
        let weyl = weyl_dimension(&stripped, d)?;
        total += BigUint::from(specht) * BigUint::from(weyl);
        rows.push(SchurWeylRow {
            diagram,
            specht_dim: specht,
            weyl_dim: weyl,
            stripped,
        });
    }
    let expected = BigUint::from(d as u64).pow(sites as u32);
    if total != expected {
        return Err(Error::Numerical(format!(
            "Schur-Weyl identity violated for (L={sites}, d={d}): got {total}, want {expected}"
        )));
    }
    to_u128(expected, "d^L")?;
    Ok(rows)
}
