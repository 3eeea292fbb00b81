//! SU(3) irrep bases `D(p,q)` with explicit generator matrix elements.
//!
//! States are realized as Gelfand-Tsetlin patterns, which give exact
//! polynomial-cost matrix elements for all nine `gl(3)` generators
//! `T_{ab}`. The construction is validated against an independent
//! brute-force realization that builds the irrep inside the full product
//! space by symmetrizing a reference state according to its Young tableau
//! (see [`brute`]).
//!
//! Conventions:
//! - matrix elements are real and non-negative, so `T_{ba} = T_{ab}^T`
//!   and every sector Hamiltonian built from them is real symmetric;
//! - states are ordered by magnetization `M` descending, then hypercharge
//!   `Y'` descending, then pattern.

use nalgebra::DMatrix;

use crate::{Error, Result};

pub mod brute;

/// Default cap on irrep dimensions for full enumeration.
pub const DEFAULT_STATE_BUDGET: usize = 200_000;

/// Gelfand-Tsetlin pattern for `gl(3)`:
///
/// ```text
/// m13  m23  m33
///    m12  m22
///      m11
/// ```
///
/// Betweenness: `m13 >= m12 >= m23 >= m22 >= m33` and `m12 >= m11 >= m22`.
/// The top row is fixed per irrep; for `D(p,q)` it is `(p+q, q, 0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GtPattern {
    pub m12: i64,
    pub m22: i64,
    pub m11: i64,
}

/// Weight labels carried by every basis state. Half-integers are stored
/// doubled (`two_i3 = 2 I_3`), rationals tripled (`three_y = 3 Y`), so all
/// bookkeeping stays exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WeightLabel {
    /// `2 I_3 = n1 - n2`.
    pub two_i3: i64,
    /// `3 Y = n1 + n2 - 2 n3`.
    pub three_y: i64,
    /// `2 V_3 = n1 - n3`.
    pub two_v3: i64,
    /// `3 Y' = 2 n2 - n1 - n3`.
    pub three_y_prime: i64,
    /// Magnetization `M = n1 - n3 = 2 V_3`.
    pub magnetization: i64,
}

impl WeightLabel {
    fn from_occupations(n1: i64, n2: i64, n3: i64) -> Self {
        Self {
            two_i3: n1 - n2,
            three_y: n1 + n2 - 2 * n3,
            two_v3: n1 - n3,
            three_y_prime: 2 * n2 - n1 - n3,
            magnetization: n1 - n3,
        }
    }
}

/// Index of a generator `T_{ab}`, `a, b` in `1..=3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenIndex(pub usize, pub usize);

/// Basis of one SU(3) irrep `D(p,q)` in the Gelfand-Tsetlin realization.
///
/// Generator matrices act with exact (square-root) matrix elements; dense
/// copies are materialized lazily only for small irreps. The struct is
/// immutable once built and safe to share across threads.
#[derive(Clone, Debug)]
pub struct IrrepBasis {
    pub p: usize,
    pub q: usize,
    states: Vec<GtPattern>,
    weights: Vec<WeightLabel>,
    index: std::collections::HashMap<GtPattern, usize>,
}

impl IrrepBasis {
    /// Builds the `D(p,q)` basis: all GT patterns with top row
    /// `(p+q, q, 0)`, ordered by (`M` desc, `Y'` desc, pattern desc).
    ///
    /// Errors with [`Error::BudgetExceeded`] when `d_{p,q}` is larger than
    /// `budget` (pass [`DEFAULT_STATE_BUDGET`] unless a tighter cap is
    /// wanted).
    pub fn build(p: usize, q: usize, budget: usize) -> Result<Self> {
        let dim = (p + 1) * (q + 1) * (p + q + 2) / 2;
        if dim > budget {
            return Err(Error::BudgetExceeded {
                what: format!("irrep D({p},{q})"),
                dim,
                budget,
            });
        }
        let (m13, m23, m33) = ((p + q) as i64, q as i64, 0i64);
        let mut states = Vec::with_capacity(dim);
        for m12 in m23..=m13 {
            for m22 in m33..=m23 {
                for m11 in m22..=m12 {
                    states.push(GtPattern { m12, m22, m11 });
                }
            }
        }
        debug_assert_eq!(states.len(), dim);
        let top_sum = m13 + m23 + m33;
        let weight_of = |s: &GtPattern| {
            let n1 = s.m11;
            let n2 = s.m12 + s.m22 - s.m11;
            let n3 = top_sum - s.m12 - s.m22;
            WeightLabel::from_occupations(n1, n2, n3)
        };
        states.sort_by_key(|s| {
            let w = weight_of(s);
            (
                -w.magnetization,
                -w.three_y_prime,
                -s.m12,
                -s.m22,
                -s.m11,
            )
        });
        let weights = states.iter().map(weight_of).collect();
        let index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (*s, i))
            .collect();
        Ok(Self {
            p,
            q,
            states,
            weights,
            index,
        })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[GtPattern] {
        &self.states
    }

    pub fn weights(&self) -> &[WeightLabel] {
        &self.weights
    }

    /// Indices of the basis states with magnetization `m` (the states are
    /// M-sorted, so this is a contiguous range).
    pub fn magnetization_block(&self, m: i64) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| self.weights[i].magnetization == m)
            .collect()
    }

    /// Occupations `(n1, n2, n3)` of state `i` within the stripped irrep
    /// (excluding the `r` full columns, which add `r` to each mode).
    pub fn occupations(&self, i: usize) -> (i64, i64, i64) {
        let s = &self.states[i];
        let top_sum = (self.p + 2 * self.q) as i64;
        let n1 = s.m11;
        let n2 = s.m12 + s.m22 - s.m11;
        let n3 = top_sum - s.m12 - s.m22;
        (n1, n2, n3)
    }

    /// Applies `T_{ab}` to basis state `i`, returning `(state, coeff)`
    /// pairs of the image. All coefficients are real non-negative for
    /// off-diagonal generators; diagonal generators return the occupation.
    pub fn apply(&self, g: GenIndex, i: usize) -> Vec<(usize, f64)> {
        let GenIndex(a, b) = g;
        let s = self.states[i];
        let (n1, n2, n3) = self.occupations(i);
        match (a, b) {
            (1, 1) => vec![(i, n1 as f64)],
            (2, 2) => vec![(i, n2 as f64)],
            (3, 3) => vec![(i, n3 as f64)],
            (1, 2) => self.raise_12(s),
            (2, 1) => self.lower_21(s),
            (2, 3) => self.raise_23(s),
            (3, 2) => self.lower_32(s),
            (1, 3) => self.compose(|j| self.raise_12_idx(j), |j| self.raise_23_idx(j), i),
            (3, 1) => self.compose(|j| self.lower_32_idx(j), |j| self.lower_21_idx(j), i),
            _ => panic!("generator index out of range: T_{a}{b}"),
        }
    }

    fn top(&self) -> (i64, i64, i64) {
        ((self.p + self.q) as i64, self.q as i64, 0)
    }

    fn push(&self, out: &mut Vec<(usize, f64)>, s: GtPattern, coeff: f64) {
        if coeff != 0.0 {
            if let Some(&idx) = self.index.get(&s) {
                out.push((idx, coeff));
            }
        }
    }

    fn raise_12(&self, s: GtPattern) -> Vec<(usize, f64)> {
        let mut out = Vec::with_capacity(1);
        if s.m11 < s.m12 {
            let c = ((s.m12 - s.m11) * (s.m11 - s.m22 + 1)) as f64;
            self.push(
                &mut out,
                GtPattern {
                    m11: s.m11 + 1,
                    ..s
                },
                c.sqrt(),
            );
        }
        out
    }

    fn lower_21(&self, s: GtPattern) -> Vec<(usize, f64)> {
        let mut out = Vec::with_capacity(1);
        if s.m11 > s.m22 {
            let c = ((s.m11 - s.m22) * (s.m12 - s.m11 + 1)) as f64;
            self.push(
                &mut out,
                GtPattern {
                    m11: s.m11 - 1,
                    ..s
                },
                c.sqrt(),
            );
        }
        out
    }

    /// `T_{23}` raises `m12` or `m22` (Gelfand-Tsetlin matrix elements).
    fn raise_23(&self, s: GtPattern) -> Vec<(usize, f64)> {
        let (m13, m23, m33) = self.top();
        let (m12, m22, m11) = (s.m12, s.m22, s.m11);
        let mut out = Vec::with_capacity(2);
        if m12 < m13 {
            let num = (m13 - m12) * (m12 - m23 + 1) * (m12 - m33 + 2) * (m12 - m11 + 1);
            let den = (m12 - m22 + 1) * (m12 - m22 + 2);
            self.push(
                &mut out,
                GtPattern {
                    m12: m12 + 1,
                    ..s
                },
                (num as f64 / den as f64).sqrt(),
            );
        }
        if m22 < m23 && m22 < m11 {
            let num = (m13 - m22 + 1) * (m23 - m22) * (m22 - m33 + 1) * (m11 - m22);
            let den = (m12 - m22 + 1) * (m12 - m22);
            self.push(
                &mut out,
                GtPattern {
                    m22: m22 + 1,
                    ..s
                },
                (num as f64 / den as f64).sqrt(),
            );
        }
        out
    }

    /// `T_{32} = T_{23}^T`: lowers `m12` or `m22`.
    fn lower_32(&self, s: GtPattern) -> Vec<(usize, f64)> {
        let (m13, m23, m33) = self.top();
        let (m12, m22, m11) = (s.m12, s.m22, s.m11);
        let mut out = Vec::with_capacity(2);
        if m12 > m23 && m12 > m11 {
            // Transpose element: <m12-1| T32 |m12> = <m12| T23 |m12-1>.
            let src12 = m12 - 1;
            let num = (m13 - src12) * (src12 - m23 + 1) * (src12 - m33 + 2) * (src12 - m11 + 1);
            let den = (src12 - m22 + 1) * (src12 - m22 + 2);
            self.push(
                &mut out,
                GtPattern {
                    m12: m12 - 1,
                    ..s
                },
                (num as f64 / den as f64).sqrt(),
            );
        }
        if m22 > m33 {
            let src22 = m22 - 1;
            let num = (m13 - src22 + 1) * (m23 - src22) * (src22 - m33 + 1) * (m11 - src22);
            let den = (m12 - src22 + 1) * (m12 - src22);
            self.push(
                &mut out,
                GtPattern {
                    m22: m22 - 1,
                    ..s
                },
                (num as f64 / den as f64).sqrt(),
            );
        }
        out
    }

    fn raise_12_idx(&self, i: usize) -> Vec<(usize, f64)> {
        self.raise_12(self.states[i])
    }
    fn lower_21_idx(&self, i: usize) -> Vec<(usize, f64)> {
        self.lower_21(self.states[i])
    }
    fn raise_23_idx(&self, i: usize) -> Vec<(usize, f64)> {
        self.raise_23(self.states[i])
    }
    fn lower_32_idx(&self, i: usize) -> Vec<(usize, f64)> {
        self.lower_32(self.states[i])
    }

    /// Commutator composition `[f, g]` applied to state `i`, used for
    /// `T13 = [T12, T23]` and `T31 = [T32, T21]`.
    fn compose<F, G>(&self, f: F, g: G, i: usize) -> Vec<(usize, f64)>
    where
        F: Fn(usize) -> Vec<(usize, f64)>,
        G: Fn(usize) -> Vec<(usize, f64)>,
    {
        let mut acc: std::collections::HashMap<usize, f64> = std::collections::HashMap::new();
        for (j, cj) in g(i) {
            for (k, ck) in f(j) {
                *acc.entry(k).or_insert(0.0) += cj * ck;
            }
        }
        for (j, cj) in f(i) {
            for (k, ck) in g(j) {
                *acc.entry(k).or_insert(0.0) -= cj * ck;
            }
        }
        let mut out: Vec<(usize, f64)> = acc
            .into_iter()
            .filter(|&(_, c)| c.abs() > 0.0)
            .collect();
        out.sort_by_key(|&(k, _)| k);
        out
    }

    /// Dense matrix of `T_{ab}` in this basis. Only sensible for small
    /// irreps; large sectors go through [`IrrepBasis::apply`] instead.
    pub fn generator_matrix(&self, g: GenIndex) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for (j, c) in self.apply(g, i) {
                m[(j, i)] += c;
            }
        }
        m
    }

    /// All nine generator matrices, indexed `[a-1][b-1]`.
    pub fn generator_matrices(&self) -> [[DMatrix<f64>; 3]; 3] {
        std::array::from_fn(|a| std::array::from_fn(|b| {
            self.generator_matrix(GenIndex(a + 1, b + 1))
        }))
    }

    /// Writes one state per line: GT pattern row, occupations, and weight
    /// labels (`2I3 3Y 2V3 3Y' M` stored doubled/tripled to stay integer).
    pub fn dump_states<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# D({},{}) dim {}", self.p, self.q, self.dim())?;
        writeln!(w, "# m12 m22 m11  n1 n2 n3  2I3 3Y 2V3 3Y' M")?;
        for i in 0..self.dim() {
            let s = &self.states[i];
            let (n1, n2, n3) = self.occupations(i);
            let w_ = &self.weights[i];
            writeln!(
                w,
                "{} {} {}  {} {} {}  {} {} {} {} {}",
                s.m12,
                s.m22,
                s.m11,
                n1,
                n2,
                n3,
                w_.two_i3,
                w_.three_y,
                w_.two_v3,
                w_.three_y_prime,
                w_.magnetization
            )?;
        }
        Ok(())
    }
}

/// Quadratic and cubic Casimir matrices `C2 = sum T_ab T_ba` and
/// `C3 = sum T_ab T_bc T_ca` built from dense generator matrices.
///
/// Both must be multiples of the identity (Schur's lemma); a non-scalar
/// result signals a generator-construction bug and is a hard failure.
///
/// Note these are the `gl(3)` invariants, which include the particle
/// number: conjugate irreps share the traceless SU(3) part
/// `C2 - N^2/3` (with `N = p + 2q`), not `C2` itself.
pub fn casimir_matrices(basis: &IrrepBasis) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let t = basis.generator_matrices();
    let n = basis.dim();
    let mut c2 = DMatrix::zeros(n, n);
    for a in 0..3 {
        for b in 0..3 {
            c2 += &t[a][b] * &t[b][a];
        }
    }
    let mut c3 = DMatrix::zeros(n, n);
    for a in 0..3 {
        for b in 0..3 {
            let tab_tbc: [DMatrix<f64>; 3] = std::array::from_fn(|c| &t[a][b] * &t[b][c]);
            for (c, prod) in tab_tbc.iter().enumerate() {
                c3 += prod * &t[c][a];
            }
        }
    }
    for (name, m) in [("C2", &c2), ("C3", &c3)] {
        let scalar = m[(0, 0)];
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { scalar } else { 0.0 };
                dev = dev.max((m[(i, j)] - expect).abs());
            }
        }
        let scale = scalar.abs().max(1.0);
        if dev > 1e-10 * scale {
            return Err(Error::Numerical(format!(
                "{name} of D({},{}) is not scalar: max deviation {dev:.3e}",
                basis.p, basis.q
            )));
        }
    }
    Ok((c2, c3))
}

/// Eigenvalue of the traceless SU(3) quadratic Casimir,
/// `C2_su3 = C2 - N^2/3`; equal for conjugate irreps `D(p,q)` and `D(q,p)`.
pub fn casimir2_su3_eigenvalue(basis: &IrrepBasis) -> Result<f64> {
    let (c2, _) = casimir_matrices(basis)?;
    let n = (basis.p + 2 * basis.q) as f64;
    Ok(c2[(0, 0)] - n * n / 3.0)
}
