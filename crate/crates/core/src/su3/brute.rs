//! Independent brute-force irrep construction in the full product space.
//!
//! For one particle per site the ambient space is `(C^3)^{tensor L}`. The
//! highest-weight state of the sector labeled by a Young diagram is built
//! by filling the diagram canonically with site indices, assigning mode
//! `1` to first-row sites, `2` to second-row sites, `3` to third-row
//! sites, then symmetrizing every row and antisymmetrizing every column
//! (`S_ab = 1 + P_ab`, `A_ab = 1 - P_ab`, extended to full row/column
//! stabilizers). The rest of the irrep is generated by the lowering
//! operators `T21, T31, T32` and orthonormalized.
//!
//! This path costs `O(3^L)` memory and factorial time in the row lengths,
//! so it is restricted to small `L`; its purpose is to certify the
//! Gelfand-Tsetlin construction through [`bases_spectrally_equal`].

use nalgebra::DMatrix;

use crate::hamiltonian::HamiltonianParams;
use crate::young::YoungDiagram;
use crate::{Error, Result};

/// Largest site count accepted by the brute-force pathway.
pub const MAX_SITES: usize = 7;

/// An irrep presented as dense generator matrices in some orthonormal
/// basis, together with the site count `L` providing the `1/L`
/// interaction scale.
#[derive(Clone, Debug)]
pub struct ExplicitIrrep {
    /// Number of sites of the defining realization (`p + 2q + 3r`).
    pub sites: usize,
    /// Generator matrices `t[a][b] = T_{a+1, b+1}`.
    pub t: [[DMatrix<f64>; 3]; 3],
}

impl ExplicitIrrep {
    pub fn dim(&self) -> usize {
        self.t[0][0].nrows()
    }

    /// Collective-spin Hamiltonian
    /// `H = 2h V3 - (g1 T21 + g2 T32)(g1 T12 + g2 T23) / L`
    /// with `V3 = (T11 - T33)/2`, as a dense symmetric matrix.
    pub fn hamiltonian(&self, params: &HamiltonianParams) -> DMatrix<f64> {
        let t = &self.t;
        let v3 = (&t[0][0] - &t[2][2]) * 0.5;
        let raise = &t[0][1] * params.g1 + &t[1][2] * params.g2;
        let lower = &t[1][0] * params.g1 + &t[2][1] * params.g2;
        v3 * (2.0 * params.h) - lower * raise / self.sites as f64
    }
}

/// Dense real vector in the `3^L` product space.
struct ProductSpace {
    sites: usize,
    dim: usize,
}

impl ProductSpace {
    fn new(sites: usize) -> Self {
        Self {
            sites,
            dim: 3usize.pow(sites as u32),
        }
    }

    fn mode(&self, state: usize, site: usize) -> usize {
        state / 3usize.pow(site as u32) % 3
    }

    fn with_mode(&self, state: usize, site: usize, mode: usize) -> usize {
        let p = 3usize.pow(site as u32);
        state - self.mode(state, site) * p + mode * p
    }

    /// Applies the collective generator `T_{ab} = sum_j |a><b|_j`.
    fn apply_generator(&self, a: usize, b: usize, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (state, &c) in v.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for site in 0..self.sites {
                if self.mode(state, site) == b - 1 {
                    out[self.with_mode(state, site, a - 1)] += c;
                }
            }
        }
        out
    }

    /// Applies a site permutation `pi` (new site `pi[j]` carries what site
    /// `j` carried).
    fn permute(&self, pi: &[usize], v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (state, &c) in v.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let mut target = 0usize;
            for site in 0..self.sites {
                target += self.mode(state, site) * 3usize.pow(pi[site] as u32);
            }
            out[target] += c;
        }
        out
    }

    /// Symmetrizes (`sign = 1`) or antisymmetrizes (`sign = -1`) over the
    /// listed sites by summing the full (signed) stabilizer.
    fn project(&self, sites: &[usize], sign: f64, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        let mut perm: Vec<usize> = (0..sites.len()).collect();
        permute_all(&mut perm, 0, &mut |perm, parity| {
            let mut pi: Vec<usize> = (0..self.sites).collect();
            for (slot, &target) in perm.iter().enumerate() {
                pi[sites[slot]] = sites[target];
            }
            let image = self.permute(&pi, v);
            let weight = if sign < 0.0 { parity } else { 1.0 };
            for (o, i) in out.iter_mut().zip(image.iter()) {
                *o += weight * i;
            }
        });
        out
    }
}

fn permute_all(perm: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize], f64)) {
    if k == perm.len() {
        // Parity by counting inversions.
        let mut inv = 0;
        for i in 0..perm.len() {
            for j in (i + 1)..perm.len() {
                if perm[i] > perm[j] {
                    inv += 1;
                }
            }
        }
        f(perm, if inv % 2 == 0 { 1.0 } else { -1.0 });
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute_all(perm, k + 1, f);
        perm.swap(k, i);
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Builds the irrep carried by `diagram` (at most 3 rows, `L` boxes) inside
/// the product space, returning dense generator matrices in an orthonormal
/// basis generated from the symmetrized highest-weight state.
///
/// Errors on a zero-norm highest weight, which happens exactly when the
/// diagram is incompatible with 3 local states (more than 3 rows).
pub fn brute_force_basis(diagram: &YoungDiagram, sites: usize) -> Result<ExplicitIrrep> {
    if diagram.boxes() != sites {
        return Err(Error::InvalidInput(format!(
            "diagram {diagram} has {} boxes, expected L = {sites}",
            diagram.boxes()
        )));
    }
    if sites > MAX_SITES {
        return Err(Error::BudgetExceeded {
            what: "brute-force product space".into(),
            dim: 3usize.pow(sites as u32),
            budget: 3usize.pow(MAX_SITES as u32),
        });
    }
    if diagram.num_rows() > 3 {
        return Err(Error::Numerical(format!(
            "zero-norm highest weight: diagram {diagram} needs {} local states, only 3 exist",
            diagram.num_rows()
        )));
    }

    let space = ProductSpace::new(sites);

    // Canonical tableau: fill row by row with sites 0, 1, 2, ...
    let mut rows: Vec<Vec<usize>> = Vec::new();
    let mut next = 0usize;
    for &len in diagram.rows() {
        rows.push((next..next + len).collect());
        next += len;
    }

    // Reference state: mode = row index for each site.
    let mut phi_index = 0usize;
    for (mode, row) in rows.iter().enumerate() {
        for &site in row {
            phi_index += mode * 3usize.pow(site as u32);
        }
    }
    let mut v = vec![0.0; space.dim];
    v[phi_index] = 1.0;

    // Row symmetrizers, then column antisymmetrizers.
    for row in &rows {
        if row.len() > 1 {
            v = space.project(row, 1.0, &v);
        }
    }
    let columns = diagram.conjugate();
    for (c, &height) in columns.rows().iter().enumerate() {
        if height > 1 {
            let col: Vec<usize> = rows[..height].iter().map(|r| r[c]).collect();
            v = space.project(&col, -1.0, &v);
        }
    }

    let hw_norm = norm(&v);
    if hw_norm < 1e-9 {
        return Err(Error::Numerical(format!(
            "zero-norm highest weight for diagram {diagram}"
        )));
    }
    for x in v.iter_mut() {
        *x /= hw_norm;
    }

    // Orbit under the lowering operators, orthonormalized by modified
    // Gram-Schmidt with one re-orthogonalization pass (tolerance 1e-10 for
    // rank decisions; degenerate weights produce near-linear dependence).
    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut head = 0usize;
    while head < basis.len() {
        for (a, b) in [(2, 1), (3, 1), (3, 2)] {
            let mut w = space.apply_generator(a, b, &basis[head]);
            let w_norm = norm(&w);
            if w_norm < 1e-12 {
                continue;
            }
            for x in w.iter_mut() {
                *x /= w_norm;
            }
            for _ in 0..2 {
                for e in &basis {
                    let overlap = dot(e, &w);
                    for (wj, ej) in w.iter_mut().zip(e.iter()) {
                        *wj -= overlap * ej;
                    }
                }
            }
            let res = norm(&w);
            if res > 1e-10 {
                for x in w.iter_mut() {
                    *x /= res;
                }
                basis.push(w);
            }
        }
        head += 1;
    }

    let dim = basis.len();
    let t: [[DMatrix<f64>; 3]; 3] = std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let mut m = DMatrix::zeros(dim, dim);
            for (j, ej) in basis.iter().enumerate() {
                let image = space.apply_generator(a + 1, b + 1, ej);
                for (i, ei) in basis.iter().enumerate() {
                    m[(i, j)] = dot(ei, &image);
                }
            }
            m
        })
    });

    Ok(ExplicitIrrep { sites, t })
}

/// True iff the sorted spectra of the collective Hamiltonian built in the
/// two bases agree elementwise within 1e-9. Errors on dimension mismatch.
pub fn bases_spectrally_equal(
    a: &ExplicitIrrep,
    b: &ExplicitIrrep,
    params: &HamiltonianParams,
) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    let ea = crate::spectral::diagonalize_dense(&a.hamiltonian(params))?;
    let eb = crate::spectral::diagonalize_dense(&b.hamiltonian(params))?;
    let scale = ea
        .iter()
        .chain(eb.iter())
        .fold(1.0f64, |acc, &x| acc.max(x.abs()));
    Ok(ea
        .iter()
        .zip(eb.iter())
        .all(|(x, y)| (x - y).abs() <= 1e-9 * scale))
}

impl super::IrrepBasis {
    /// Dense-generator view of this GT basis, with `r` full columns fixing
    /// the site count `L = p + 2q + 3r`.
    pub fn to_explicit(&self, r: usize) -> ExplicitIrrep {
        ExplicitIrrep {
            sites: self.p + 2 * self.q + 3 * r,
            t: self.generator_matrices(),
        }
    }
}
