//! Sector Hamiltonian assembly.
//!
//! The model on `L` sites of 3-mode bosons is, with `omega_0` absorbed,
//!
//! ```text
//! H = h sum_j (n_j1 - n_j3)
//!     - sum_{a,b=1,2} (g_a g_b / L) sum_{i,j} b†_{i,a+1} b_{i,a} b†_{j,b} b_{j,b+1}
//! ```
//!
//! or in collective form `H = 2h V3 - (g1 T21 + g2 T32)(g1 T12 + g2 T23)/L`.
//! Both the irrep (Gelfand-Tsetlin) pathway and the Fock pathways assemble
//! the same operator; cross-pathway spectral agreement is a test oracle.
//!
//! The module also hosts the effective SU(3) representation projection for
//! multi-particle sites and the SU(2) integrable-point diagnostic.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;

use crate::sectors::{
    FockTable, Occupations, PermutationPart, SectorBasis, SectorLabel,
};
use crate::su3::brute::ExplicitIrrep;
use crate::su3::{GenIndex, IrrepBasis};
use crate::{Error, Result};

/// Model parameters. The overall energy scale `omega_0` is fixed to 1
/// (absorbed into the couplings); `g1 = g2` is the integrable point where
/// the model reduces to an SU(2) collective spin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HamiltonianParams {
    pub h: f64,
    pub g1: f64,
    pub g2: f64,
}

impl HamiltonianParams {
    pub fn new(h: f64, g1: f64, g2: f64) -> Self {
        Self { h, g1, g2 }
    }

    pub fn is_integrable_point(&self) -> bool {
        self.g1 == self.g2
    }
}

/// Dense real symmetric Hamiltonian block of one sector.
#[derive(Clone, Debug)]
pub struct SectorMatrix {
    pub matrix: DMatrix<f64>,
    pub label: SectorLabel,
    /// Human-readable description of the basis realization.
    pub basis: String,
}

impl SectorMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Text export: `#`-prefixed header with the sector label, then the
    /// matrix entries row-major, one matrix row per line.
    pub fn write_text<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# sector: {}", self.label)?;
        writeln!(w, "# basis: {}", self.basis)?;
        writeln!(w, "# dim: {}", self.dim())?;
        for i in 0..self.dim() {
            let mut line = String::new();
            for j in 0..self.dim() {
                if j > 0 {
                    line.push(' ');
                }
                line.push_str(&format!("{:.17e}", self.matrix[(i, j)]));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Kahan compensated accumulator for the interaction double sums.
#[derive(Clone, Copy, Debug, Default)]
struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    fn add(&mut self, value: f64) {
        let y = value - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Checks near-symmetry, then mirrors the averaged triangle so that
/// `max |H - H^T| = 0` holds exactly.
fn symmetrize(mut m: DMatrix<f64>, context: &str) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    let scale = m.abs().max().max(1e-300);
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            asym = asym.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    if asym > 1e-10 * scale {
        return Err(Error::Numerical(format!(
            "{context}: assembled matrix asymmetry {asym:.3e} exceeds tolerance"
        )));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

/// Assembles the Hamiltonian on the irrep `D(p,q)` (with `r` stripped full
/// columns fixing `L = p + 2q + 3r`), restricted to the magnetization
/// block `m` when given.
pub fn build_su3_sector_hamiltonian(
    p: usize,
    q: usize,
    r: usize,
    m: Option<i64>,
    params: &HamiltonianParams,
    budget: usize,
) -> Result<SectorMatrix> {
    let sites = p + 2 * q + 3 * r;
    if sites == 0 {
        return Err(Error::InvalidInput("empty system: p+2q+3r = 0".into()));
    }
    if let Some(m) = m {
        if m.unsigned_abs() as usize > sites {
            return Err(Error::InvalidInput(format!(
                "M = {m} outside [-L, L] = [-{sites}, {sites}]"
            )));
        }
    }
    // State enumeration is cheap and linear in memory; `budget` gates the
    // dense block actually assembled.
    let basis = IrrepBasis::build(p, q, usize::MAX)?;
    let block: Vec<usize> = match m {
        Some(m) => basis.magnetization_block(m),
        None => (0..basis.dim()).collect(),
    };
    if block.len() > budget {
        return Err(Error::BudgetExceeded {
            what: format!("sector D({p},{q}) M={m:?}"),
            dim: block.len(),
            budget,
        });
    }
    let pos: HashMap<usize, usize> = block.iter().enumerate().map(|(c, &i)| (i, c)).collect();
    let dim = block.len();
    let mut matrix = DMatrix::zeros(dim, dim);
    let scale = sites as f64;
    for (col, &j) in block.iter().enumerate() {
        // Field term 2h V3 = h (n1 - n3), diagonal in the weight basis.
        matrix[(col, col)] += params.h * basis.weights()[j].magnetization as f64;

        // Interaction -(g1 T21 + g2 T32)(g1 T12 + g2 T23) / L.
        let mut acc: BTreeMap<usize, KahanSum> = BTreeMap::new();
        let mut mid: Vec<(usize, f64)> = Vec::new();
        for (k, c) in basis.apply(GenIndex(1, 2), j) {
            mid.push((k, params.g1 * c));
        }
        for (k, c) in basis.apply(GenIndex(2, 3), j) {
            mid.push((k, params.g2 * c));
        }
        for (k, ck) in mid {
            for (l, c) in basis.apply(GenIndex(2, 1), k) {
                acc.entry(l).or_default().add(params.g1 * c * ck);
            }
            for (l, c) in basis.apply(GenIndex(3, 2), k) {
                acc.entry(l).or_default().add(params.g2 * c * ck);
            }
        }
        for (l, k) in acc {
            let row = *pos.get(&l).ok_or_else(|| {
                Error::Numerical("interaction left the magnetization block".into())
            })?;
            matrix[(row, col)] -= k.sum / scale;
        }
    }
    let label = SectorLabel::new(
        Occupations::Uniform {
            sites,
            per_site: 1,
        },
        PermutationPart::Diagram(su3_diagram(p, q, r)?),
        m,
    )?;
    Ok(SectorMatrix {
        matrix: symmetrize(matrix, "irrep pathway")?,
        label,
        basis: format!("Gelfand-Tsetlin D({p},{q}), r={r}"),
    })
}

fn su3_diagram(p: usize, q: usize, r: usize) -> Result<crate::young::YoungDiagram> {
    let rows: Vec<usize> = [p + q + r, q + r, r]
        .into_iter()
        .filter(|&x| x > 0)
        .collect();
    if rows.is_empty() {
        return Err(Error::InvalidInput("empty diagram".into()));
    }
    crate::young::YoungDiagram::new(rows)
}

/// Applies the Hamiltonian to one Fock table: exact bosonic ladder action
/// with `sqrt(n)` factors. Returns `(table, coefficient)` pairs, the
/// diagonal field term included.
fn apply_fock_hamiltonian(
    table: &FockTable,
    params: &HamiltonianParams,
    sites: usize,
) -> Vec<(FockTable, f64)> {
    let mut acc: BTreeMap<FockTable, KahanSum> = BTreeMap::new();
    acc.entry(table.clone())
        .or_default()
        .add(params.h * table.magnetization() as f64);

    let g = [params.g1, params.g2];
    let scale = sites as f64;
    // Raising part X = b†_{j,b} b_{j,b+1} (modes 0-based: moves b+1 -> b).
    for j in 0..table.sites() {
        for b in 0..2usize {
            if table.occ[j][b + 1] == 0 {
                continue;
            }
            let amp_x = (table.occ[j][b + 1] as f64).sqrt() * ((table.occ[j][b] + 1) as f64).sqrt();
            let mut mid = table.clone();
            mid.occ[j][b + 1] -= 1;
            mid.occ[j][b] += 1;
            // Lowering part Y = b†_{i,a+1} b_{i,a} applied to the result.
            for i in 0..mid.sites() {
                for a in 0..2usize {
                    if mid.occ[i][a] == 0 {
                        continue;
                    }
                    let amp_y =
                        (mid.occ[i][a] as f64).sqrt() * ((mid.occ[i][a + 1] + 1) as f64).sqrt();
                    let mut fin = mid.clone();
                    fin.occ[i][a] -= 1;
                    fin.occ[i][a + 1] += 1;
                    acc.entry(fin)
                        .or_default()
                        .add(-g[a] * g[b] / scale * amp_x * amp_y);
                }
            }
        }
    }
    acc.into_iter()
        .map(|(t, k)| (t, k.sum))
        .filter(|&(_, c)| c != 0.0)
        .collect()
}

/// Assembles the Hamiltonian in a Fock-pathway basis (plain tables,
/// symmetric orbits, or antisymmetric determinants). The `1/L` interaction
/// scale uses the number of sites.
pub fn build_fock_sector_hamiltonian(
    basis: &SectorBasis,
    params: &HamiltonianParams,
) -> Result<SectorMatrix> {
    let sites = basis.sites();
    let dim = basis.dim();
    let mut matrix = DMatrix::zeros(dim, dim);
    match basis {
        SectorBasis::Plain { tables, .. } => {
            let pos: HashMap<&FockTable, usize> =
                tables.iter().enumerate().map(|(i, t)| (t, i)).collect();
            for (col, t) in tables.iter().enumerate() {
                for (u, c) in apply_fock_hamiltonian(t, params, sites) {
                    let row = *pos.get(&u).ok_or_else(|| {
                        Error::Numerical(format!(
                            "Hamiltonian left the sector: produced {u} from {t}"
                        ))
                    })?;
                    matrix[(row, col)] += c;
                }
            }
        }
        SectorBasis::Symmetric {
            orbits,
            orbit_sizes,
            ..
        } => {
            let pos: HashMap<&FockTable, usize> =
                orbits.iter().enumerate().map(|(i, t)| (t, i)).collect();
            for (col, rep) in orbits.iter().enumerate() {
                for (u, c) in apply_fock_hamiltonian(rep, params, sites) {
                    let canon = u.canonical();
                    let row = *pos.get(&canon).ok_or_else(|| {
                        Error::Numerical(format!(
                            "Hamiltonian left the symmetric sector at {canon}"
                        ))
                    })?;
                    // <O|H|O'> = sqrt(|O'| / |O|) * sum of coefficients
                    // landing in orbit O (applied to one representative).
                    matrix[(row, col)] += c * (orbit_sizes[col] / orbit_sizes[row]).sqrt();
                }
            }
        }
        SectorBasis::Antisymmetric { selections, .. } => {
            let pos: HashMap<&[[u32; 3]], usize> = selections
                .iter()
                .enumerate()
                .map(|(i, s)| (s.as_slice(), i))
                .collect();
            for (col, sel) in selections.iter().enumerate() {
                let rep = FockTable { occ: sel.clone() };
                for (u, c) in apply_fock_hamiltonian(&rep, params, sites) {
                    // Project onto the determinant basis: distinct rows
                    // sorted with the permutation sign, repeats vanish.
                    let Some((sorted, sign)) = sort_with_sign(&u.occ) else {
                        continue;
                    };
                    if let Some(&row) = pos.get(sorted.as_slice()) {
                        matrix[(row, col)] += c * sign;
                    }
                }
            }
        }
    }
    Ok(SectorMatrix {
        matrix: symmetrize(matrix, "fock pathway")?,
        label: basis.label().clone(),
        basis: match basis {
            SectorBasis::Plain { .. } => "Fock tables".into(),
            SectorBasis::Symmetric { .. } => "symmetric orbit superpositions".into(),
            SectorBasis::Antisymmetric { .. } => "Slater determinants".into(),
        },
    })
}

/// Sorts rows ascending, returning the parity of the sorting permutation;
/// `None` if two rows coincide (zero antisymmetric component).
fn sort_with_sign(rows: &[[u32; 3]]) -> Option<(Vec<[u32; 3]>, f64)> {
    let mut v = rows.to_vec();
    let mut sign = 1.0;
    for i in 0..v.len() {
        for j in (i + 1)..v.len() {
            match v[j].cmp(&v[i]) {
                std::cmp::Ordering::Less => {
                    v.swap(i, j);
                    sign = -sign;
                }
                std::cmp::Ordering::Equal => return None,
                std::cmp::Ordering::Greater => {}
            }
        }
    }
    Some((v, sign))
}

/// Cartan eigenvalues `(h_1, ..., h_amax)` of an `S_L` highest-weight
/// state: `h_a` counts the columns of the Young diagram with exactly `a`
/// rows. Valid for `(n, L)` when `sum_a a h_a = L` and the number of
/// entries stays within the local dimension `(n+1)(n+2)/2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CartanVector {
    entries: Vec<u64>,
}

impl CartanVector {
    pub fn new(entries: Vec<u64>, n: u32, sites: usize) -> Result<Self> {
        let d = ((n as usize + 1) * (n as usize + 2)) / 2;
        if entries.is_empty() || entries.len() > d {
            return Err(Error::InvalidInput(format!(
                "Cartan vector length {} outside 1..={d} for n = {n}",
                entries.len()
            )));
        }
        let weighted: u128 = entries
            .iter()
            .enumerate()
            .map(|(i, &h)| (i as u128 + 1) * h as u128)
            .sum();
        if weighted != sites as u128 {
            return Err(Error::InvalidInput(format!(
                "sum_a a h_a = {weighted} does not equal L = {sites}"
            )));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    fn get(&self, index_1based: usize) -> u64 {
        self.entries.get(index_1based - 1).copied().unwrap_or(0)
    }
}

/// Effective U(3) integers `(p*, q*, r*)` for a permutation sector of
/// `n`-particle sites, via the hierarchy construction. Satisfies
/// `p* + 2q* + 3r* = nL`; reduces to the identity `(h1, h2, h3)` at
/// `n = 1`.
pub fn effective_rep(cartan: &CartanVector, n: u32, sites: usize) -> Result<(u64, u64, u64)> {
    // Re-validate so that invariant-violating vectors cannot sneak in
    // through a stale CartanVector built for different (n, L).
    let cartan = CartanVector::new(cartan.entries.clone(), n, sites)?;
    let n = n as i128;
    let mut p_acc: i128 = 0;
    let mut q2_acc: i128 = 0;
    let mut r3_acc: i128 = 0;
    for t in 0..=n {
        // phi_t = n t - t(t-3)/2 and m_t = t(n+1-t)(n+2-t).
        let phi = n * t - t * (t - 3) / 2;
        let m_t = t * (n + 1 - t) * (n + 2 - t);
        for alpha in 1..=(n + 1 - t) {
            let h = cartan.get((phi + alpha) as usize) as i128;
            if h == 0 {
                continue;
            }
            p_acc += alpha * (n - alpha - t + 1) * h;
            q2_acc += (m_t + alpha * (alpha - 1 - 2 * t)) * h;
            r3_acc += (n * phi - m_t + 3 * alpha * t) * h;
        }
    }
    if q2_acc % 2 != 0 || r3_acc % 3 != 0 {
        return Err(Error::Numerical(format!(
            "effective representation not integral: 2q* = {q2_acc}, 3r* = {r3_acc}"
        )));
    }
    let (p, q, r) = (p_acc, q2_acc / 2, r3_acc / 3);
    if p < 0 || q < 0 || r < 0 {
        return Err(Error::Numerical(format!(
            "negative effective representation ({p}, {q}, {r})"
        )));
    }
    let total = p + 2 * q + 3 * r;
    let expect = n * sites as i128;
    if total != expect {
        return Err(Error::Numerical(format!(
            "constraint p* + 2q* + 3r* = nL violated: {total} != {expect}"
        )));
    }
    Ok((p as u64, q as u64, r as u64))
}

/// Maximum commutator entry `max |[H, S^2]|` with the embedded SU(2)
/// spin-1 algebra `S+ = T12 + T23`, `Sz = T11 - T33`,
/// `S^2 = Sz Sz + (S+ S- + S- S+)/2`. Vanishes at the integrable point
/// `g1 = g2` and is generically O(1) away from it.
pub fn su2_commutator_residual(rep: &ExplicitIrrep, params: &HamiltonianParams) -> f64 {
    let h = rep.hamiltonian(params);
    let s2 = su2_total_spin_squared(rep);
    (&h * &s2 - &s2 * &h).abs().max()
}

/// Same residual restricted to one magnetization block of an irrep
/// (`S^2` preserves magnetization, so the restriction is consistent).
pub fn su2_commutator_residual_block(
    basis: &IrrepBasis,
    r: usize,
    m: i64,
    params: &HamiltonianParams,
) -> Result<f64> {
    let rep = basis.to_explicit(r);
    let h = build_su3_sector_hamiltonian(basis.p, basis.q, r, Some(m), params, usize::MAX)?;
    let block = basis.magnetization_block(m);
    let s2_full = su2_total_spin_squared(&rep);
    let n = block.len();
    let mut s2 = DMatrix::zeros(n, n);
    for (i, &bi) in block.iter().enumerate() {
        for (j, &bj) in block.iter().enumerate() {
            s2[(i, j)] = s2_full[(bi, bj)];
        }
    }
    Ok((&h.matrix * &s2 - &s2 * &h.matrix).abs().max())
}

fn su2_total_spin_squared(rep: &ExplicitIrrep) -> DMatrix<f64> {
    let t = &rep.t;
    let sz = &t[0][0] - &t[2][2];
    let sp = &t[0][1] + &t[1][2];
    let sm = sp.transpose();
    &sz * &sz + 0.5 * (&sp * &sm + &sm * &sp)
}
