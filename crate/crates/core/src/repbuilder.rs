//! Representations of C(SO_q(N)) as truncated operator matrices.
//!
//! Elementary representations are not copied from a table: each simple-root
//! node is paired with U_{q_i}(sl_2) through the vector representation, the
//! spin blocks are read off numerically, and the middle three-dimensional
//! block (type B, node n) is produced by Clebsch-Gordan squaring of the
//! spin-1/2 matrix elements. [`check_frt`] is the acceptance oracle for all
//! of it: a construction that fails the quadratic relations, the unitarity
//! identity or the involution identity is a hard error, never patched.

use crate::exprs::{Amp, OpExpr, Prim};
use crate::opcalc::{Deg, LaurentOp};
use crate::scalars::QParams;
use crate::sparse::C64;
use crate::weyl::{LieType, WeylWord};
use nalgebra::DMatrix;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RepError {
    #[error("node {node} is out of range for rank {rank}")]
    BadNode { node: usize, rank: usize },
    #[error("spin block {0:?} does not match any U_q(sl2) structure: {1}")]
    BlockStructure(Vec<usize>, String),
    #[error("no coproduct convention block-diagonalizes the tensor square (defects {0:.3e}, {1:.3e})")]
    CgIntertwiner(f64, f64),
}

/// Index data of the R-matrix: the reflection i' = N+1-i, the half-integer
/// weights rho_i, the metric C and the two-case entry formula.
#[derive(Debug, Clone)]
pub struct RMatrixData {
    pub n_size: usize,
    pub q: f64,
    pub rho: Vec<f64>,
}

impl RMatrixData {
    pub fn new(n_size: usize, q: f64) -> Self {
        assert!(n_size >= 3);
        let rho = (1..=n_size)
            .map(|i| {
                let ip = n_size + 1 - i;
                if i < ip {
                    n_size as f64 / 2.0 - i as f64
                } else if i == ip {
                    0.0
                } else {
                    -(n_size as f64 / 2.0 - ip as f64)
                }
            })
            .collect();
        RMatrixData { n_size, q, rho }
    }

    pub fn iprime(&self, i: usize) -> usize {
        self.n_size + 1 - i
    }

    pub fn rho(&self, i: usize) -> f64 {
        self.rho[i - 1]
    }

    /// C^i_j = delta_{i j'} q^{-rho_i}.
    pub fn c_entry(&self, i: usize, j: usize) -> f64 {
        if j == self.iprime(i) {
            self.q.powf(-self.rho(i))
        } else {
            0.0
        }
    }

    /// R^{ij}_{mn}, upper pair (i,j), lower pair (m,n).
    pub fn r_value(&self, i: usize, j: usize, m: usize, n: usize) -> f64 {
        let q = self.q;
        if i > m {
            let kron = if j == m && i == n { 1.0 } else { 0.0 };
            (q - 1.0 / q) * (kron - self.c_entry(j, i) * self.c_entry(m, n))
        } else if i == m && j == n {
            let d1 = if i == j { 1.0 } else { 0.0 };
            let d2 = if i == self.iprime(j) { 1.0 } else { 0.0 };
            q.powf(d1 - d2)
        } else {
            0.0
        }
    }

    /// Nonzero (m, n, value) with R^{ij}_{mn} != 0 for fixed upper (i,j).
    pub fn upper_support(&self, i: usize, j: usize) -> Vec<(usize, usize, f64)> {
        let mut cands = vec![(i, j), (j, i)];
        for m in 1..=self.n_size {
            cands.push((m, self.iprime(m)));
        }
        cands.sort_unstable();
        cands.dedup();
        cands
            .into_iter()
            .filter_map(|(m, n)| {
                let v = self.r_value(i, j, m, n);
                (v != 0.0).then_some((m, n, v))
            })
            .collect()
    }

    /// Nonzero (i, j, value) with R^{ij}_{mn} != 0 for fixed lower (m,n).
    pub fn lower_support(&self, m: usize, n: usize) -> Vec<(usize, usize, f64)> {
        let mut cands = vec![(m, n), (n, m)];
        for i in 1..=self.n_size {
            cands.push((i, self.iprime(i)));
        }
        cands.sort_unstable();
        cands.dedup();
        cands
            .into_iter()
            .filter_map(|(i, j)| {
                let v = self.r_value(i, j, m, n);
                (v != 0.0).then_some((i, j, v))
            })
            .collect()
    }
}

/// N x N matrix of operator expressions, the image of the fundamental
/// matrix under a representation.
#[derive(Debug, Clone)]
pub struct RepMatrix {
    pub n_size: usize,
    pub nvars: usize,
    pub nslots: usize,
    pub q: f64,
    entries: Vec<OpExpr>,
}

impl RepMatrix {
    fn from_entries(
        n_size: usize,
        nvars: usize,
        nslots: usize,
        q: f64,
        entries: Vec<OpExpr>,
    ) -> Self {
        assert_eq!(entries.len(), n_size * n_size);
        RepMatrix {
            n_size,
            nvars,
            nslots,
            q,
            entries,
        }
    }

    /// 1-based indexing throughout.
    pub fn entry(&self, i: usize, j: usize) -> &OpExpr {
        &self.entries[(i - 1) * self.n_size + (j - 1)]
    }

    pub fn scale_entry(&mut self, i: usize, j: usize, s: C64) {
        let e = self.entry(i, j).scale(s);
        self.entries[(i - 1) * self.n_size + (j - 1)] = e;
    }

    /// Structural zero test (no surviving terms at all).
    pub fn is_zero_entry(&self, i: usize, j: usize) -> bool {
        self.entry(i, j).is_zero()
    }

    pub fn materialize(&self, d: usize) -> NumRep {
        let entries = self
            .entries
            .par_iter()
            .map(|e| {
                if e.is_zero() {
                    None
                } else {
                    Some(e.materialize(self.q, d))
                }
            })
            .collect();
        NumRep {
            n_size: self.n_size,
            nvars: self.nvars,
            dims: vec![d as u32; self.nslots],
            entries,
        }
    }
}

/// Materialized representation at a fixed cut-off dimension.
pub struct NumRep {
    pub n_size: usize,
    pub nvars: usize,
    pub dims: Vec<u32>,
    entries: Vec<Option<LaurentOp>>,
}

impl NumRep {
    pub fn entry(&self, i: usize, j: usize) -> Option<&LaurentOp> {
        self.entries[(i - 1) * self.n_size + (j - 1)].as_ref()
    }

    fn zero(&self) -> LaurentOp {
        LaurentOp::zero(self.nvars, &self.dims)
    }

    pub fn entry_or_zero(&self, i: usize, j: usize) -> LaurentOp {
        self.entry(i, j).cloned().unwrap_or_else(|| self.zero())
    }
}

/// The counit: identity on the diagonal, nothing off it.
pub fn counit(n_size: usize, q: f64) -> RepMatrix {
    let mut entries = vec![OpExpr::zero(0, 0); n_size * n_size];
    for i in 0..n_size {
        entries[i * n_size + i] = OpExpr::one(0, 0);
    }
    RepMatrix::from_entries(n_size, 0, 0, q, entries)
}

/// How the circle variables of the one-dimensional representations are
/// carried.
#[derive(Debug, Clone)]
pub enum TauSpec {
    /// One Laurent variable; `weights[i-1]` is the exponent attached to the
    /// i-th torus coordinate (all zero = the trivial point t = 1).
    Single(Vec<i64>),
    /// One independent variable per torus coordinate.
    Multi,
}

/// Diagonal representation: degree -1 in variable i for i <= n, degree +1
/// in variable N+1-i past the middle, degree 0 at the middle (odd N).
pub fn build_tau(n_size: usize, spec: &TauSpec, q: f64) -> RepMatrix {
    let half = n_size / 2;
    let (nvars, degs): (usize, Vec<Deg>) = match spec {
        TauSpec::Single(weights) => {
            assert_eq!(weights.len(), half, "need one weight per torus coordinate");
            let degs = (1..=n_size)
                .map(|i| {
                    let d = if i <= half {
                        -weights[i - 1]
                    } else if i > n_size - half {
                        weights[n_size - i]
                    } else {
                        0
                    };
                    vec![d as i16]
                })
                .collect();
            (1, degs)
        }
        TauSpec::Multi => {
            let degs = (1..=n_size)
                .map(|i| {
                    let mut deg = vec![0i16; half];
                    if i <= half {
                        deg[i - 1] = -1;
                    } else if i > n_size - half {
                        deg[n_size - i] = 1;
                    }
                    deg
                })
                .collect();
            (half, degs)
        }
    };
    let mut entries = vec![OpExpr::zero(nvars, 0); n_size * n_size];
    for (i, deg) in degs.into_iter().enumerate() {
        entries[i * n_size + i] = OpExpr::monomial(nvars, deg, C64::new(1.0, 0.0), vec![]);
    }
    RepMatrix::from_entries(n_size, nvars, 0, q, entries)
}

pub fn matrix_size(lie: LieType, rank: usize) -> usize {
    match lie {
        LieType::B => 2 * rank + 1,
        LieType::D => 2 * rank,
    }
}

/// The vector representation matrices (K_i, E_i, F_i) of the quantized
/// enveloping algebra, as real dense matrices.
pub fn t1_matrices(
    lie: LieType,
    rank: usize,
    node: usize,
    q: f64,
) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let n = rank;
    let size = matrix_size(lie, rank);
    let mut k = DMatrix::<f64>::identity(size, size);
    let mut e = DMatrix::<f64>::zeros(size, size);
    let mut f = DMatrix::<f64>::zeros(size, size);
    // D_j scales position j by q; 1-based positions as in the formulas
    let dmul = |mat: &mut DMatrix<f64>, j: usize, pow: f64| {
        mat[(j - 1, j - 1)] *= q.powf(pow);
    };
    match lie {
        LieType::B => {
            if node < n {
                dmul(&mut k, node, -1.0);
                dmul(&mut k, node + 1, 1.0);
                dmul(&mut k, 2 * n - node + 1, -1.0);
                dmul(&mut k, 2 * n - node + 2, 1.0);
                e[(node, node - 1)] = 1.0;
                e[(2 * n - node + 1, 2 * n - node)] = -1.0;
                f[(node - 1, node)] = 1.0;
                f[(2 * n - node, 2 * n - node + 1)] = -1.0;
            } else {
                dmul(&mut k, n, -1.0);
                dmul(&mut k, n + 2, 1.0);
                let c = (q.sqrt() + 1.0 / q.sqrt()).sqrt();
                e[(n, n - 1)] = c;
                e[(n + 1, n)] = -c * q.sqrt();
                f[(n - 1, n)] = c;
                f[(n, n + 1)] = -c / q.sqrt();
            }
        }
        LieType::D => {
            if node < n {
                dmul(&mut k, node, -1.0);
                dmul(&mut k, node + 1, 1.0);
                dmul(&mut k, 2 * n - node, -1.0);
                dmul(&mut k, 2 * n - node + 1, 1.0);
                e[(node, node - 1)] = 1.0;
                e[(2 * n - node, 2 * n - node - 1)] = -1.0;
                f[(node - 1, node)] = 1.0;
                f[(2 * n - node - 1, 2 * n - node)] = -1.0;
            } else {
                dmul(&mut k, n - 1, -1.0);
                dmul(&mut k, n, -1.0);
                dmul(&mut k, n + 1, 1.0);
                dmul(&mut k, n + 2, 1.0);
                e[(n + 1, n - 1)] = -1.0;
                e[(n, n - 2)] = 1.0;
                f[(n - 1, n + 1)] = -1.0;
                f[(n - 2, n)] = 1.0;
            }
        }
    }
    (k, e, f)
}

/// Node deformation exponent: q_i = q^{node_exponent}.
pub fn node_exponent(lie: LieType, rank: usize, node: usize) -> f64 {
    match lie {
        LieType::B if node == rank => 0.5,
        _ => 1.0,
    }
}

/// Standard generators of C(SU_{q^dim}(2)) as single-slot expressions, in
/// the order (u11, u12, u21, u22).
fn suq2_letters(dim_exp: f64, q: f64) -> [OpExpr; 4] {
    let one = C64::new(1.0, 0.0);
    let u11 = OpExpr::monomial(
        0,
        vec![],
        one,
        vec![vec![Prim::Ladder {
            step: -1,
            amp: Amp::SqrtOneMinusQPow {
                scale: 2.0 * dim_exp,
                offset: 0.0,
            },
        }]],
    );
    let u22 = u11.adj();
    let u12 = OpExpr::monomial(
        0,
        vec![],
        C64::new(-q.powf(dim_exp), 0.0),
        vec![vec![Prim::QPow { c: dim_exp }]],
    );
    let u21 = OpExpr::monomial(0, vec![], one, vec![vec![Prim::QPow { c: dim_exp }]]);
    [u11, u12, u21, u22]
}

/// Connected blocks of coordinates under the raising action.
fn action_blocks(e: &DMatrix<f64>, size: usize) -> Vec<Vec<usize>> {
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let r = find(parent, parent[x]);
            parent[x] = r;
        }
        parent[x]
    }
    let mut parent: Vec<usize> = (0..size).collect();
    for r in 0..size {
        for c in 0..size {
            if e[(r, c)] != 0.0 {
                let (a, b) = (find(&mut parent, r), find(&mut parent, c));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut blocks: std::collections::BTreeMap<usize, Vec<usize>> =
        std::collections::BTreeMap::new();
    for x in 0..size {
        let r = find(&mut parent, x);
        blocks.entry(r).or_default().push(x + 1);
    }
    blocks.into_values().collect()
}

enum Coproduct {
    /// Delta(E) = E (x) K + 1 (x) E, Delta(F) = F (x) 1 + K^{-1} (x) F.
    EkOneE,
    /// Delta(E) = E (x) 1 + K (x) E, Delta(F) = F (x) K^{-1} + 1 (x) F.
    EOneKe,
}

fn tensor_square_action(conv: &Coproduct, q_node: f64) -> [DMatrix<f64>; 3] {
    let tk = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0 / q_node, q_node]));
    let te = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]);
    let tf = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
    let id = DMatrix::<f64>::identity(2, 2);
    let tk_inv = tk.clone().try_inverse().unwrap();
    let rk = tk.kronecker(&tk);
    let (re, rf) = match conv {
        Coproduct::EkOneE => (
            te.kronecker(&tk) + id.kronecker(&te),
            tf.kronecker(&id) + tk_inv.kronecker(&tf),
        ),
        Coproduct::EOneKe => (
            te.kronecker(&id) + tk.kronecker(&te),
            tf.kronecker(&tk_inv) + id.kronecker(&tf),
        ),
    };
    [rk, re, rf]
}

/// Orthonormal basis of C^4 adapted to the triplet (+) singlet
/// decomposition. The raising chain is built to match the target block and
/// then normalized: the tensor square is a unitary corepresentation, so
/// only an orthonormal basis keeps the subcorepresentation unitary. The
/// normalization conjugates the paired action by a positive diagonal, which
/// is the diagonal-gauge equivalence the relation checker accepts; the
/// defect returned measures block-diagonality, the exact K eigenvalues and
/// the gauge-invariant E*F entry products.
fn cg_basis(target: &[DMatrix<f64>; 3], conv: &Coproduct, q_node: f64) -> (DMatrix<f64>, f64) {
    let [rk, re, rf] = tensor_square_action(conv, q_node);
    let mut y = DMatrix::<f64>::zeros(4, 4);
    let mut w = nalgebra::DVector::<f64>::zeros(4);
    w[0] = 1.0;
    y.set_column(0, &w);
    let mut w2 = &re * &w / target[1][(1, 0)];
    let mut w3 = &re * &w2 / target[1][(2, 1)];
    if w2.norm() < 1e-14 || w3.norm() < 1e-14 {
        return (y, f64::INFINITY);
    }
    w2 /= w2.norm();
    w3 /= w3.norm();
    y.set_column(1, &w2);
    y.set_column(2, &w3);
    // singlet: K-eigenvalue-1 subspace is span{e1(x)e2, e2(x)e1}
    let c1 = re.column(1).into_owned();
    let c2 = re.column(2).into_owned();
    let (alpha, beta) = if c1.norm() > 1e-14 {
        (-c2.dot(&c1) / c1.dot(&c1), 1.0)
    } else {
        (1.0, 0.0)
    };
    let mut s = nalgebra::DVector::<f64>::zeros(4);
    s[1] = alpha;
    s[2] = beta;
    if s.norm() < 1e-14 {
        return (y, f64::INFINITY);
    }
    s /= s.norm();
    y.set_column(3, &s);
    // orthonormality check; the inverse is then the transpose
    let gram_defect = (y.transpose() * &y - DMatrix::<f64>::identity(4, 4)).abs().max();
    let yi = y.transpose();
    let mut defect = gram_defect;
    let ck = &yi * &rk * &y;
    let ce = &yi * &re * &y;
    let cf = &yi * &rf * &y;
    for (which, conj) in [&ck, &ce, &cf].into_iter().enumerate() {
        // off-block entries must vanish
        for r in 0..4 {
            for c in 0..4 {
                if (r < 3) != (c < 3) {
                    defect = defect.max(conj[(r, c)].abs());
                }
            }
        }
        if which == 0 {
            // K is untouched by a diagonal gauge
            for r in 0..3 {
                for c in 0..3 {
                    defect = defect.max((conj[(r, c)] - target[0][(r, c)]).abs());
                }
            }
            defect = defect.max((conj[(3, 3)] - 1.0).abs());
        }
    }
    // gauge-invariant products E_{a+1,a} F_{a,a+1}
    for a in 0..2 {
        let got = ce[(a + 1, a)] * cf[(a, a + 1)];
        let want = target[1][(a + 1, a)] * target[2][(a, a + 1)];
        defect = defect.max((got - want).abs());
    }
    (y, defect)
}

/// Elementary representation attached to one simple reflection, over a
/// single Toeplitz factor.
pub fn build_elementary(
    lie: LieType,
    rank: usize,
    node: usize,
    q: f64,
) -> Result<RepMatrix, RepError> {
    if node == 0 || node > rank {
        return Err(RepError::BadNode { node, rank });
    }
    let size = matrix_size(lie, rank);
    let (tk, te, tf) = t1_matrices(lie, rank, node, q);
    let dim_exp = node_exponent(lie, rank, node);
    let q_node = q.powf(dim_exp);
    let letters = suq2_letters(dim_exp, q);
    let mut entries = vec![OpExpr::zero(0, 1); size * size];

    for block in action_blocks(&te, size) {
        match block.len() {
            1 => {
                let j = block[0];
                if (tk[(j - 1, j - 1)] - 1.0).abs() > 1e-12 {
                    return Err(RepError::BlockStructure(
                        block,
                        "trivial coordinate with nonunit K eigenvalue".into(),
                    ));
                }
                entries[(j - 1) * size + (j - 1)] = OpExpr::one(0, 1);
            }
            2 => {
                let (k1, k2) = (block[0], block[1]);
                let e_lo = te[(k2 - 1, k1 - 1)];
                let f_up = tf[(k1 - 1, k2 - 1)];
                let k_ok = (tk[(k1 - 1, k1 - 1)] - 1.0 / q_node).abs() < 1e-12
                    && (tk[(k2 - 1, k2 - 1)] - q_node).abs() < 1e-12;
                if !k_ok || (e_lo * f_up - 1.0).abs() > 1e-12 || (e_lo.abs() - 1.0).abs() > 1e-12 {
                    return Err(RepError::BlockStructure(
                        block,
                        "doublet does not match the spin-1/2 pattern".into(),
                    ));
                }
                // gauge c = (1, e_lo); Psi*(v^k_l) = (c_l / c_k) u^{pos k}_{pos l}
                let gauge = [1.0, e_lo];
                let coords = [k1, k2];
                for (pa, &ka) in coords.iter().enumerate() {
                    for (pb, &kb) in coords.iter().enumerate() {
                        let letter = &letters[pa * 2 + pb];
                        let s = gauge[pb] / gauge[pa];
                        entries[(ka - 1) * size + (kb - 1)] = letter.scale(C64::new(s, 0.0));
                    }
                }
            }
            3 => {
                let idx = |a: usize| block[a] - 1;
                let mut bk = DMatrix::<f64>::zeros(3, 3);
                let mut be = DMatrix::<f64>::zeros(3, 3);
                let mut bf = DMatrix::<f64>::zeros(3, 3);
                for r in 0..3 {
                    for c in 0..3 {
                        bk[(r, c)] = tk[(idx(r), idx(c))];
                        be[(r, c)] = te[(idx(r), idx(c))];
                        bf[(r, c)] = tf[(idx(r), idx(c))];
                    }
                }
                let target = [bk, be, bf];
                // The E (x) K + 1 (x) E convention is the one under which
                // the pairing of products reproduces the quadratic
                // relations; the flipped convention also intertwines the
                // actions but fails the relation oracle downstream.
                let (y, d1) = cg_basis(&target, &Coproduct::EkOneE, q_node);
                if d1 > 1e-9 {
                    let (_, d2) = cg_basis(&target, &Coproduct::EOneKe, q_node);
                    return Err(RepError::CgIntertwiner(d1, d2));
                }
                let yi = y.transpose();
                // tensor-square corep entries: (V (x) V)_{(r s),(u v)} = u^r_u u^s_v
                let mut tensor: Vec<Vec<OpExpr>> = Vec::with_capacity(4);
                for r in 0..2 {
                    for s in 0..2 {
                        let mut row = Vec::with_capacity(4);
                        for u in 0..2 {
                            for v in 0..2 {
                                row.push(letters[r * 2 + u].mul(&letters[s * 2 + v]));
                            }
                        }
                        tensor.push(row);
                    }
                }
                for a in 0..3 {
                    for b in 0..3 {
                        let mut acc = OpExpr::zero(0, 1);
                        for (rs, row) in tensor.iter().enumerate() {
                            for (uv, prod) in row.iter().enumerate() {
                                let coef = yi[(a, rs)] * y[(uv, b)];
                                if coef.abs() > 1e-15 {
                                    acc = acc.add(&prod.scale(C64::new(coef, 0.0)));
                                }
                            }
                        }
                        entries[idx(a) * size + idx(b)] = prune_coeffs(acc);
                    }
                }
            }
            _ => {
                return Err(RepError::BlockStructure(
                    block,
                    "block larger than a triplet".into(),
                ));
            }
        }
    }
    Ok(RepMatrix::from_entries(size, 0, 1, q, entries))
}

fn prune_coeffs(e: OpExpr) -> OpExpr {
    let max = e.terms.iter().map(|t| t.coeff.norm()).fold(0.0f64, f64::max);
    if max == 0.0 {
        return OpExpr::zero(e.nvars, e.nslots);
    }
    let mut out = e;
    out.terms.retain(|t| t.coeff.norm() > 1e-13 * max);
    out
}

/// Convolution product: entry(i,j) = sum_k e1(i,k) (x) e2(k,j); tensor
/// factors concatenate and Laurent degrees add.
pub fn convolve(r1: &RepMatrix, r2: &RepMatrix) -> RepMatrix {
    assert_eq!(r1.n_size, r2.n_size, "representations of different groups");
    assert!((r1.q - r2.q).abs() < 1e-15);
    let n = r1.n_size;
    let nvars = r1.nvars.max(r2.nvars);
    let entries: Vec<OpExpr> = (0..n * n)
        .map(|pos| {
            let (i, j) = (pos / n + 1, pos % n + 1);
            let mut acc = OpExpr::zero(nvars, r1.nslots + r2.nslots);
            for k in 1..=n {
                let a = r1.entry(i, k);
                let b = r2.entry(k, j);
                if a.is_zero() || b.is_zero() {
                    continue;
                }
                acc = acc.add(&a.lifted(nvars).kron(&b.lifted(nvars)));
            }
            acc
        })
        .collect();
    RepMatrix::from_entries(n, nvars, r1.nslots + r2.nslots, r1.q, entries)
}

/// pi_{t,w}: the one-dimensional part followed by one elementary
/// representation per letter of the reduced word.
pub fn build_pi(word: &WeylWord, tau: &TauSpec, q: f64) -> Result<RepMatrix, RepError> {
    let n_size = matrix_size(word.lie, word.rank);
    let mut rep = build_tau(n_size, tau, q);
    for &letter in &word.letters {
        let elem = build_elementary(word.lie, word.rank, letter, q)?;
        rep = convolve(&rep, &elem);
    }
    Ok(rep)
}

/// Pulls a representation of the two-steps-smaller group back along the
/// restriction map: border entries become delta_ij, the interior block is
/// kept.
pub fn eta_pullback(inner: &RepMatrix) -> RepMatrix {
    let m = inner.n_size;
    let n = m + 2;
    let mut entries = vec![OpExpr::zero(inner.nvars, inner.nslots); n * n];
    entries[0] = OpExpr::one(inner.nvars, inner.nslots);
    entries[(n - 1) * n + (n - 1)] = OpExpr::one(inner.nvars, inner.nslots);
    for i in 1..=m {
        for j in 1..=m {
            entries[i * n + j] = inner.entry(i, j).clone();
        }
    }
    RepMatrix::from_entries(n, inner.nvars, inner.nslots, inner.q, entries)
}

/// Report of the defining-relation check: quadratic relation defects,
/// unitarity defects, involution defects, all on interior compressions.
#[derive(Debug, Clone)]
pub struct FrtReport {
    pub max_relation: f64,
    pub worst_tuple: (usize, usize, usize, usize),
    pub max_unitarity: f64,
    pub max_involution: f64,
    pub tol: f64,
}

impl FrtReport {
    pub fn max_defect(&self) -> f64 {
        self.max_relation
            .max(self.max_unitarity)
            .max(self.max_involution)
    }

    pub fn pass(&self) -> bool {
        self.max_defect() <= self.tol
    }
}

/// Evaluates every instance of the quadratic relation
/// `sum_{k,l} R^{ji}_{kl} v^k_s v^l_t - R^{lk}_{st} v^i_k v^j_l = 0`
/// together with `V V* = V* V = I` and the involution identity, reporting
/// interior-compressed defect norms.
pub fn check_frt(rep: &RepMatrix, rmat: &RMatrixData, params: &QParams) -> FrtReport {
    assert_eq!(rep.n_size, rmat.n_size);
    let n = rep.n_size;
    let d = params.trunc_dim;
    let margin = params.interior_margin;
    let num = rep.materialize(d);

    // relation defects, grouped by (s,t) so left-hand products are shared
    // across (i,j) within a group
    let groups: Vec<(usize, usize)> = (1..=n)
        .flat_map(|s| (1..=n).map(move |t| (s, t)))
        .collect();
    let results: Vec<(f64, (usize, usize, usize, usize))> = groups
        .par_iter()
        .map(|&(s, t)| {
            let mut lhs_cache: std::collections::HashMap<(usize, usize), Option<LaurentOp>> =
                std::collections::HashMap::new();
            let lower = rmat.lower_support(s, t);
            let mut worst = (0.0f64, (0, 0, 0, 0));
            for i in 1..=n {
                for j in 1..=n {
                    let mut defect = LaurentOp::zero(num.nvars, &num.dims);
                    for &(k, l, v) in &rmat.upper_support(j, i) {
                        let prod = lhs_cache
                            .entry((k, l))
                            .or_insert_with(|| match (num.entry(k, s), num.entry(l, t)) {
                                (Some(a), Some(b)) => Some(a.mul(b)),
                                _ => None,
                            })
                            .clone();
                        if let Some(p) = prod {
                            defect = defect.add_scaled(&p, C64::new(v, 0.0));
                        }
                    }
                    for &(l, k, v) in &lower {
                        if let (Some(a), Some(b)) = (num.entry(i, k), num.entry(j, l)) {
                            let p = a.mul(b);
                            defect = defect.add_scaled(&p, C64::new(-v, 0.0));
                        }
                    }
                    let res = defect.interior_compress(margin).residual_norm(params.tol);
                    if res > worst.0 {
                        worst = (res, (i, j, s, t));
                    }
                }
            }
            worst
        })
        .collect();
    let (max_relation, worst_tuple) = results
        .into_iter()
        .fold((0.0, (0, 0, 0, 0)), |acc, x| if x.0 > acc.0 { x } else { acc });

    // unitarity V V* = V* V = I
    let pairs: Vec<(usize, usize)> = (1..=n)
        .flat_map(|i| (1..=n).map(move |j| (i, j)))
        .collect();
    let unit: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let mut row = LaurentOp::zero(num.nvars, &num.dims);
            let mut col = LaurentOp::zero(num.nvars, &num.dims);
            for k in 1..=n {
                if let (Some(a), Some(b)) = (num.entry(i, k), num.entry(j, k)) {
                    row = row.add(&a.mul(&b.adj()));
                }
                if let (Some(a), Some(b)) = (num.entry(k, i), num.entry(k, j)) {
                    col = col.add(&a.adj().mul(b));
                }
            }
            if i == j {
                let id = LaurentOp::identity(num.nvars, &num.dims);
                row = row.sub(&id);
                col = col.sub(&id);
            }
            row.interior_compress(margin)
                .residual_norm(params.tol)
                .max(col.interior_compress(margin).residual_norm(params.tol))
        })
        .collect();
    let max_unitarity = unit.into_iter().fold(0.0, f64::max);

    // involution (v^k_l)* = q^{rho_k - rho_l} v^{k'}_{l'}
    let inv: Vec<f64> = pairs
        .par_iter()
        .map(|&(k, l)| {
            let lhs = num.entry_or_zero(k, l).adj();
            let scale = rmat.q.powf(rmat.rho(k) - rmat.rho(l));
            let rhs = num
                .entry_or_zero(rmat.iprime(k), rmat.iprime(l))
                .scale(C64::new(scale, 0.0));
            lhs.sub(&rhs)
                .interior_compress(margin)
                .residual_norm(params.tol)
        })
        .collect();
    let max_involution = inv.into_iter().fold(0.0, f64::max);

    FrtReport {
        max_relation,
        worst_tuple,
        max_unitarity,
        max_involution,
        tol: params.tol,
    }
}

/// Generators of the k-th quotient subalgebra: the images x_j of the
/// last-row entries, indexed from the rightmost column inwards, plus the
/// row-1 partners recovered through the involution identity.
pub struct QuotientGens {
    pub lie: LieType,
    pub rank: usize,
    pub k: usize,
    pub word: WeylWord,
    /// x_j = pi_{omega_k}(v^N_{N+1-j}), phase-normalized; index j-1.
    pub x: Vec<OpExpr>,
    /// Phase stripped from each raw generator to make its leading
    /// coefficient positive real.
    pub phases: Vec<C64>,
    /// Row-1 partners derived via the involution, matching columns.
    pub row1: Vec<OpExpr>,
    pub rep: RepMatrix,
}

/// Number of nonvanishing last-row entries under the k-th quotient word;
/// the count gains one extra column past the middle node.
pub fn quotient_gen_count(_lie: LieType, rank: usize, k: usize) -> usize {
    if k <= rank {
        k
    } else {
        k + 1
    }
}

pub fn quotient_generators(
    lie: LieType,
    rank: usize,
    k: usize,
    q: f64,
) -> Result<QuotientGens, RepError> {
    let word = crate::weyl::omega_k(lie, rank, k).expect("k within the omega range");
    let n_size = matrix_size(lie, rank);
    let rep = build_pi(&word, &TauSpec::Single(vec![1; n_size / 2]), q)?;
    let rdata = RMatrixData::new(n_size, q);
    let count = quotient_gen_count(lie, rank, k);
    let mut x = Vec::with_capacity(count);
    let mut phases = Vec::with_capacity(count);
    let mut row1 = Vec::with_capacity(count);
    for j in 1..=count {
        let col = n_size + 1 - j;
        let raw = rep.entry(n_size, col).clone();
        let lead = raw
            .terms
            .iter()
            .max_by(|a, b| a.coeff.norm().partial_cmp(&b.coeff.norm()).unwrap());
        let phase = match lead {
            Some(t) if t.coeff.norm() > 0.0 => t.coeff / t.coeff.norm(),
            _ => C64::new(1.0, 0.0),
        };
        let normalized = raw.scale(phase.conj());
        // v^1_i = q^{rho_1 - rho_i} (v^N_{N+1-i})^*, so the partner of x_j
        // sits in column j of the first row.
        let inv_scale = rdata.q.powf(rdata.rho(1) - rdata.rho(j));
        row1.push(normalized.adj().scale(C64::new(inv_scale, 0.0)));
        x.push(normalized);
        phases.push(phase);
    }
    Ok(QuotientGens {
        lie,
        rank,
        k,
        word,
        x,
        phases,
        row1,
        rep,
    })
}

/// Applies the symbol map on the last tensor factor of each stored
/// generator, landing in the next-smaller algebra.
pub fn rho_k(gens: &[OpExpr]) -> Vec<OpExpr> {
    gens.iter().map(|g| g.symbol_on_last_slot()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weyl::omega_k;

    fn params_small(q: f64) -> QParams {
        QParams::new(q, 8, 3).unwrap()
    }

    #[test]
    fn rmatrix_basic_entries() {
        let r = RMatrixData::new(5, 0.5);
        assert!((r.rho(1) - 1.5).abs() < 1e-15); // N/2 - 1
        assert!((r.r_value(1, 1, 1, 1) - 0.5).abs() < 1e-15); // q on the diagonal
        assert!((r.r_value(1, 2, 1, 2) - 1.0).abs() < 1e-15); // exponent 0
        assert!((r.r_value(3, 3, 3, 3) - 1.0).abs() < 1e-15); // middle index i = i'
    }

    #[test]
    fn counit_passes_frt() {
        for n in [4usize, 5, 6, 7] {
            let rep = counit(n, 0.5);
            let rmat = RMatrixData::new(n, 0.5);
            let report = check_frt(&rep, &rmat, &params_small(0.5));
            assert!(report.max_relation < 1e-13, "counit defect at N={n}");
            assert!(report.max_unitarity < 1e-13);
        }
    }

    #[test]
    fn tau_is_a_homomorphism() {
        for n in [4usize, 5] {
            let rep = build_tau(n, &TauSpec::Multi, 0.5);
            let rmat = RMatrixData::new(n, 0.5);
            let report = check_frt(&rep, &rmat, &params_small(0.5));
            assert!(report.pass(), "tau defect {:.2e} at N={n}", report.max_defect());
        }
        // trivial weights give the identity matrix
        let id = build_tau(5, &TauSpec::Single(vec![0, 0]), 0.5);
        for i in 1..=5 {
            let e = id.entry(i, i);
            assert_eq!(e.terms.len(), 1);
            assert_eq!(e.terms[0].deg, vec![0]);
        }
    }

    #[test]
    fn tau_odd_case_degrees() {
        let tau = build_tau(3, &TauSpec::Single(vec![1]), 0.5);
        assert_eq!(tau.entry(1, 1).terms[0].deg, vec![-1]);
        assert_eq!(tau.entry(2, 2).terms[0].deg, vec![0]);
        assert_eq!(tau.entry(3, 3).terms[0].deg, vec![1]);
    }

    #[test]
    fn elementary_reps_pass_frt_all_nodes() {
        for (lie, rank) in [
            (LieType::B, 2usize),
            (LieType::B, 3),
            (LieType::D, 2),
            (LieType::D, 3),
        ] {
            for node in 1..=rank {
                for &q in &[0.3, 0.5, 0.7] {
                    let rep = build_elementary(lie, rank, node, q).unwrap();
                    let rmat = RMatrixData::new(rep.n_size, q);
                    let report = check_frt(&rep, &rmat, &params_small(q));
                    assert!(
                        report.pass(),
                        "{lie:?} rank {rank} node {node} q {q}: defect {:.2e} > {:.2e} at {:?}",
                        report.max_defect(),
                        report.tol,
                        report.worst_tuple,
                    );
                }
            }
        }
    }

    #[test]
    fn so3_elementary_passes() {
        // rank 1 exercises the Clebsch-Gordan triplet block alone
        let rep = build_elementary(LieType::B, 1, 1, 0.4).unwrap();
        let rmat = RMatrixData::new(3, 0.4);
        let report = check_frt(&rep, &rmat, &params_small(0.4));
        assert!(report.pass(), "defect {:.2e}", report.max_defect());
    }

    #[test]
    fn corrupted_rep_is_detected() {
        let mut rep = build_elementary(LieType::B, 2, 1, 0.5).unwrap();
        rep.scale_entry(1, 1, C64::new(1.01, 0.0));
        let rmat = RMatrixData::new(5, 0.5);
        let report = check_frt(&rep, &rmat, &params_small(0.5));
        assert!(!report.pass(), "corruption must violate the relations");
    }

    #[test]
    fn convolved_words_pass_frt() {
        let q = 0.5;
        for (lie, rank, k) in [
            (LieType::B, 2usize, 3usize),
            (LieType::D, 2, 3),
            (LieType::B, 2, 4),
        ] {
            let word = omega_k(lie, rank, k).unwrap();
            let rep = build_pi(&word, &TauSpec::Single(vec![1; rank]), q).unwrap();
            let rmat = RMatrixData::new(rep.n_size, q);
            let report = check_frt(&rep, &rmat, &params_small(q));
            assert!(
                report.pass(),
                "{lie:?} rank {rank} k {k}: defect {:.2e} at {:?}",
                report.max_defect(),
                report.worst_tuple
            );
        }
    }

    #[test]
    fn spin_one_block_has_double_shift() {
        // the lowest corner of the short-root triplet block carries a
        // squared-shift component
        let rep = build_elementary(LieType::B, 2, 2, 0.5).unwrap();
        let e = rep.entry(4, 4);
        let has_double = e.terms.iter().any(|t| {
            t.slots[0]
                .iter()
                .map(|p| match p {
                    Prim::Ladder { step, .. } => *step,
                    _ => 0,
                })
                .sum::<i32>()
                == 2
        });
        assert!(has_double, "expected a (S^2)*-type component: {e:?}");
    }

    #[test]
    fn eta_pullback_satisfies_bigger_relations() {
        let q = 0.5;
        let inner = build_elementary(LieType::B, 1, 1, q).unwrap(); // N = 3
        let outer = eta_pullback(&inner); // N = 5
        let rmat = RMatrixData::new(5, q);
        let report = check_frt(&outer, &rmat, &params_small(q));
        assert!(report.pass(), "defect {:.2e}", report.max_defect());
    }

    #[test]
    fn quotient_generator_forms_b_case() {
        // x_k = t (x) (q^N)^{(k-1)} and x_l carries the dressed shift in
        // slot l, up to the recorded phases
        let q = 0.5;
        let d = 10;
        let gens = quotient_generators(LieType::B, 2, 2, q).unwrap();
        assert_eq!(gens.x.len(), 2);
        let x2 = gens.x[1].materialize(q, d);
        let expect = OpExpr::monomial(
            1,
            vec![1],
            C64::new(1.0, 0.0),
            vec![vec![Prim::QPow { c: 1.0 }]],
        )
        .materialize(q, d);
        assert!(
            x2.sub(&expect).norm_upper_bound() < 1e-12,
            "x_2 should be t (x) q^N after phase normalization"
        );
        let x1 = gens.x[0].materialize(q, d);
        let raise = OpExpr::monomial(
            1,
            vec![1],
            C64::new(1.0, 0.0),
            vec![vec![Prim::Ladder {
                step: 1,
                amp: Amp::SqrtOneMinusQPow {
                    scale: 2.0,
                    offset: 2.0,
                },
            }]],
        )
        .materialize(q, d);
        assert!(
            x1.sub(&raise).norm_upper_bound() < 1e-12,
            "x_1 should be t (x) sqrt(1-q^(2N)) S*"
        );
    }

    #[test]
    fn d_case_middle_generator_forms() {
        // y_{n+2} = t (x) (q^N)^{(x)n} for the even family at k = n+1
        let q = 0.5;
        let d = 8;
        let n = 2;
        let gens = quotient_generators(LieType::D, n, n + 1, q).unwrap();
        assert_eq!(gens.x.len(), n + 2);
        let y_last = gens.x[n + 1].materialize(q, d);
        let expect = OpExpr::monomial(
            1,
            vec![1],
            C64::new(1.0, 0.0),
            vec![vec![Prim::QPow { c: 1.0 }]; n],
        )
        .materialize(q, d);
        assert!(
            y_last.sub(&expect).norm_upper_bound() < 1e-12,
            "y_(n+2) should be t (x) (q^N)^n"
        );
    }

    #[test]
    fn vanishing_pattern_matches_range() {
        // bottom-row entries vanish exactly below the advertised column
        let q = 0.5;
        for (lie, rank) in [(LieType::B, 2usize), (LieType::B, 3), (LieType::D, 3)] {
            let n_size = matrix_size(lie, rank);
            let max_k = match lie {
                LieType::B => 2 * rank,
                LieType::D => 2 * rank - 1,
            };
            for k in 1..=max_k {
                let word = omega_k(lie, rank, k).unwrap();
                if word.len() > 3 {
                    continue; // longer words are covered by the suites
                }
                let rep = build_pi(&word, &TauSpec::Single(vec![1; rank]), q).unwrap();
                let count = quotient_gen_count(lie, rank, k);
                for j in 1..=n_size {
                    let zero = rep.is_zero_entry(n_size, j);
                    let expect_zero = j <= n_size - count;
                    assert_eq!(zero, expect_zero, "{lie:?} rank {rank} k {k} column {j}");
                }
            }
        }
    }

    #[test]
    fn rho_k_kills_last_generator() {
        let q = 0.5;
        let gens = quotient_generators(LieType::B, 3, 3, q).unwrap();
        let dropped = rho_k(&gens.x);
        // x_3 = t (x) qN (x) qN maps to zero, x_1 and x_2 survive
        assert!(dropped[2].is_zero());
        assert!(!dropped[0].is_zero());
        assert!(!dropped[1].is_zero());
        // rho_k(x_j) equals the generator x_j of the smaller algebra
        let smaller = quotient_generators(LieType::B, 3, 2, q).unwrap();
        for j in 0..2 {
            let diff = dropped[j]
                .materialize(q, 8)
                .sub(&smaller.x[j].materialize(q, 8));
            assert!(
                diff.norm_upper_bound() < 1e-12,
                "restriction mismatch at generator {j}"
            );
        }
    }

    #[test]
    fn rho_k_multiplicative_on_generator_products() {
        let q = 0.5;
        let gens = quotient_generators(LieType::B, 2, 3, q).unwrap();
        for a in &gens.x {
            for b in &gens.x {
                let prod = a.mul(b);
                let lhs = prod.symbol_on_last_slot().materialize(q, 8);
                let rhs = a
                    .symbol_on_last_slot()
                    .mul(&b.symbol_on_last_slot())
                    .materialize(q, 8);
                assert!(lhs.sub(&rhs).norm_upper_bound() < 1e-11);
            }
        }
    }
}
