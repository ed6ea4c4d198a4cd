//! The quantized enveloping algebra action on the polynomial algebra
//! generated by the first- and last-row entries of the fundamental matrix,
//! and the highest-weight vector constructions built on it.
//!
//! Polynomials are formal words; no normal ordering is ever applied. The
//! ladder identities hold only after commutation, so equality is always
//! decided under a faithful representation of the quotient algebra, never
//! by rewriting.

use crate::exprs::LaurentVec;
use crate::opcalc::LaurentOp;
use crate::repbuilder::{matrix_size, t1_matrices, NumRep, RepMatrix};
use crate::scalars::hw_coefficients;
use crate::sparse::C64;
use crate::weyl::LieType;
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Row {
    First,
    Last,
}

/// One generator letter v^row_col.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub row: Row,
    pub col: usize,
}

pub type Word = Vec<Letter>;

/// Complex-linear combination of formal words; the empty word is the unit.
#[derive(Debug, Clone, PartialEq)]
pub struct FreePoly {
    pub terms: BTreeMap<Word, C64>,
}

impl FreePoly {
    pub fn zero() -> Self {
        FreePoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn unit() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![], C64::new(1.0, 0.0));
        FreePoly { terms }
    }

    pub fn letter(l: Letter) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![l], C64::new(1.0, 0.0));
        FreePoly { terms }
    }

    pub fn add_term(&mut self, word: Word, coeff: C64) {
        if coeff == C64::new(0.0, 0.0) {
            return;
        }
        match self.terms.entry(word) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if *e.get() == C64::new(0.0, 0.0) {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &FreePoly) -> FreePoly {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), *c);
        }
        out
    }

    pub fn scale(&self, s: C64) -> FreePoly {
        if s == C64::new(0.0, 0.0) {
            return FreePoly::zero();
        }
        FreePoly {
            terms: self.terms.iter().map(|(w, c)| (w.clone(), c * s)).collect(),
        }
    }

    pub fn sub(&self, other: &FreePoly) -> FreePoly {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &FreePoly) -> FreePoly {
        let mut out = FreePoly::zero();
        for (wa, ca) in &self.terms {
            for (wb, cb) in &other.terms {
                let mut w = wa.clone();
                w.extend_from_slice(wb);
                out.add_term(w, ca * cb);
            }
        }
        out
    }

    pub fn pow_letter(l: Letter, k: usize) -> FreePoly {
        let mut terms = BTreeMap::new();
        terms.insert(vec![l; k], C64::new(1.0, 0.0));
        FreePoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff_l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    pub fn max_len(&self) -> usize {
        self.terms.keys().map(|w| w.len()).max().unwrap_or(0)
    }
}

/// Generators of the quantized enveloping algebra acting on the polynomial
/// algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gen {
    E(usize),
    F(usize),
    K(usize),
    KInv(usize),
}

/// Cached vector-representation matrices for one (type, rank, q) context.
pub struct ActionCtx {
    pub lie: LieType,
    pub rank: usize,
    pub q: f64,
    /// (K_i, E_i, F_i) for node i at index i-1.
    t1: Vec<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)>,
}

impl ActionCtx {
    pub fn new(lie: LieType, rank: usize, q: f64) -> Self {
        let t1 = (1..=rank).map(|i| t1_matrices(lie, rank, i, q)).collect();
        ActionCtx { lie, rank, q, t1 }
    }

    pub fn n_size(&self) -> usize {
        matrix_size(self.lie, self.rank)
    }

    fn k_diag(&self, node: usize, col: usize) -> f64 {
        self.t1[node - 1].0[(col - 1, col - 1)]
    }

    /// Nonzero (k, value) of column `col` of T1(E_node) resp. T1(F_node).
    fn ladder_column(&self, node: usize, col: usize, raising: bool) -> Vec<(usize, f64)> {
        let m = if raising {
            &self.t1[node - 1].1
        } else {
            &self.t1[node - 1].2
        };
        (1..=self.n_size())
            .filter_map(|k| {
                let v = m[(k - 1, col - 1)];
                (v != 0.0).then_some((k, v))
            })
            .collect()
    }
}

/// Module action: on a letter, `f . v^i_j = sum_k T1(f)_{kj} v^i_k`; on
/// products, the Leibniz rules of the coproduct
/// `Delta(E) = E (x) K + 1 (x) E`, `Delta(K) = K (x) K`,
/// `Delta(F) = F (x) 1 + K^{-1} (x) F`, extended linearly.
pub fn act(gen: Gen, p: &FreePoly, ctx: &ActionCtx) -> FreePoly {
    let mut out = FreePoly::zero();
    for (word, coeff) in &p.terms {
        match gen {
            Gen::K(i) => {
                let scale: f64 = word.iter().map(|l| ctx.k_diag(i, l.col)).product();
                out.add_term(word.clone(), coeff * scale);
            }
            Gen::KInv(i) => {
                let scale: f64 = word.iter().map(|l| 1.0 / ctx.k_diag(i, l.col)).product();
                out.add_term(word.clone(), coeff * scale);
            }
            Gen::E(i) => {
                for pos in 0..word.len() {
                    let tail_scale: f64 = word[pos + 1..]
                        .iter()
                        .map(|l| ctx.k_diag(i, l.col))
                        .product();
                    for (k, v) in ctx.ladder_column(i, word[pos].col, true) {
                        let mut w = word.clone();
                        w[pos] = Letter {
                            row: word[pos].row,
                            col: k,
                        };
                        out.add_term(w, coeff * v * tail_scale);
                    }
                }
            }
            Gen::F(i) => {
                for pos in 0..word.len() {
                    let head_scale: f64 = word[..pos]
                        .iter()
                        .map(|l| 1.0 / ctx.k_diag(i, l.col))
                        .product();
                    for (k, v) in ctx.ladder_column(i, word[pos].col, false) {
                        let mut w = word.clone();
                        w[pos] = Letter {
                            row: word[pos].row,
                            col: k,
                        };
                        out.add_term(w, coeff * v * head_scale);
                    }
                }
            }
        }
    }
    out
}

/// Integer weight (lambda1, lambda2); the dominance rules depend on N.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HighestWeight {
    pub lambda1: i64,
    pub lambda2: i64,
}

impl HighestWeight {
    pub fn is_valid(&self, n_size: usize) -> bool {
        if n_size == 4 {
            self.lambda1 >= self.lambda2.abs()
        } else {
            self.lambda1 >= self.lambda2 && self.lambda2 >= 0
        }
    }
}

/// Exponents r_i of the K_i eigenvalues q^{r_i} on a highest weight vector.
pub fn k_eigen_exponents(n_size: usize, hw: HighestWeight) -> Vec<i64> {
    let n = n_size / 2;
    let (l1, l2) = (hw.lambda1, hw.lambda2);
    let odd = n_size % 2 == 1;
    match (odd, n) {
        (true, 1) => vec![2 * l1],
        (true, 2) => vec![l1 - l2, 2 * l2],
        (true, 3) => vec![l1 - l2, l2, 0],
        (false, 1) => vec![l1],
        (false, 2) => vec![l1 - l2, l1 + l2],
        (false, 3) => vec![l1 - l2, l2, l2],
        (_, _) => {
            let mut r = vec![l1 - l2, l2];
            r.resize(n, 0);
            r
        }
    }
}

/// The four distinguished letters used by the ladder construction.
#[derive(Debug, Clone, Copy)]
pub struct LadderLetters {
    pub a: Letter,
    pub b: Letter,
    pub c: Letter,
    pub d: Letter,
}

impl LadderLetters {
    /// Standard choice: a = v^1_{N-1}, b = v^N_{N-1}, c = v^1_N, d = v^N_N.
    pub fn standard(n_size: usize) -> Self {
        LadderLetters {
            a: Letter {
                row: Row::First,
                col: n_size - 1,
            },
            b: Letter {
                row: Row::Last,
                col: n_size - 1,
            },
            c: Letter {
                row: Row::First,
                col: n_size,
            },
            d: Letter {
                row: Row::Last,
                col: n_size,
            },
        }
    }

    /// Relabeled choice for N = 4 with negative second weight:
    /// a = v^1_2, b = v^4_2, c = v^1_4, d = v^4_4.
    pub fn relabeled_n4() -> Self {
        LadderLetters {
            a: Letter {
                row: Row::First,
                col: 2,
            },
            b: Letter {
                row: Row::Last,
                col: 2,
            },
            c: Letter {
                row: Row::First,
                col: 4,
            },
            d: Letter {
                row: Row::Last,
                col: 4,
            },
        }
    }
}

/// u_m = b^m c^m + A_1 a b^{m-1} c^{m-1} d + ... + A_m a^m d^m with the
/// cancellation coefficients A_{k+1} = -A_k X_k / A1^{k+1}, where X_0 = A1^0
/// and X_k = A2^k, all read at rank parameter m.
pub fn build_u_lambda(m: usize, q: f64, letters: &LadderLetters) -> FreePoly {
    if m == 0 {
        return FreePoly::unit();
    }
    let (a1, a2) = hw_coefficients(m as u32, q);
    let mut coeffs = vec![1.0f64];
    for k in 0..m {
        let x_k = if k == 0 { a1[0] } else { a2[k] };
        let prev = coeffs[k];
        coeffs.push(-prev * x_k / a1[k + 1]);
    }
    let mut out = FreePoly::zero();
    for (k, coeff) in coeffs.iter().enumerate() {
        let mut word = Vec::with_capacity(2 * m);
        word.extend(std::iter::repeat(letters.a).take(k));
        word.extend(std::iter::repeat(letters.b).take(m - k));
        word.extend(std::iter::repeat(letters.c).take(m - k));
        word.extend(std::iter::repeat(letters.d).take(k));
        out.add_term(word, C64::new(*coeff, 0.0));
    }
    out
}

/// The candidate family x_i = c^i d^{r-i} u_m, i = 0..r, with the case
/// splits on N = 4 (negative weights, relabeled letters) and N = 5 (doubled
/// ladder parameter).
pub fn build_hw_vectors(hw: HighestWeight, n_size: usize, q: f64) -> Vec<FreePoly> {
    assert!(hw.is_valid(n_size), "weight fails the dominance condition");
    let (letters, r, m) = if n_size == 4 && hw.lambda2 < 0 {
        (
            LadderLetters::relabeled_n4(),
            hw.lambda1 + hw.lambda2,
            (-hw.lambda2) as usize,
        )
    } else {
        let m = if n_size == 5 {
            2 * hw.lambda2 as usize
        } else {
            hw.lambda2 as usize
        };
        (LadderLetters::standard(n_size), hw.lambda1 - hw.lambda2, m)
    };
    let u = build_u_lambda(m, q, &letters);
    (0..=r)
        .map(|i| {
            let mut prefix = FreePoly::unit();
            prefix = prefix.mul(&FreePoly::pow_letter(letters.c, i as usize));
            prefix = prefix.mul(&FreePoly::pow_letter(letters.d, (r - i) as usize));
            prefix.mul(&u)
        })
        .collect()
}

/// Materialized first/last-row entries of a quotient representation,
/// enough to evaluate any polynomial in the letter algebra.
pub struct RowEval {
    pub n_size: usize,
    pub nvars: usize,
    pub dims: Vec<u32>,
    pub q: f64,
    first: Vec<Option<LaurentOp>>,
    last: Vec<Option<LaurentOp>>,
}

impl RowEval {
    pub fn from_rep(rep: &RepMatrix, d: usize) -> Self {
        let num: NumRep = rep.materialize(d);
        let first = (1..=rep.n_size).map(|j| num.entry(1, j).cloned()).collect();
        let last = (1..=rep.n_size)
            .map(|j| num.entry(rep.n_size, j).cloned())
            .collect();
        RowEval {
            n_size: rep.n_size,
            nvars: rep.nvars,
            dims: num.dims.clone(),
            q: rep.q,
            first,
            last,
        }
    }

    fn letter_op(&self, l: Letter) -> Option<&LaurentOp> {
        match l.row {
            Row::First => self.first[l.col - 1].as_ref(),
            Row::Last => self.last[l.col - 1].as_ref(),
        }
    }

    /// Represents the polynomial as a truncated operator. Words sharing a
    /// left prefix reuse the partial products (the word set is sorted, so a
    /// simple stack suffices).
    pub fn represent(&self, p: &FreePoly) -> LaurentOp {
        let mut acc = LaurentOp::zero(self.nvars, &self.dims);
        let mut stack: Vec<(Word, LaurentOp)> = Vec::new();
        for (word, coeff) in &p.terms {
            if word.is_empty() {
                acc = acc.add_scaled(&LaurentOp::identity(self.nvars, &self.dims), *coeff);
                continue;
            }
            while let Some((w, _)) = stack.last() {
                if word.len() >= w.len() && word[..w.len()] == w[..] {
                    break;
                }
                stack.pop();
            }
            let mut dead = false;
            while stack.len() < word.len() {
                let depth = stack.len();
                let letter = word[depth];
                let op = match self.letter_op(letter) {
                    Some(op) => op,
                    None => {
                        dead = true;
                        break;
                    }
                };
                let next = match stack.last() {
                    Some((_, prev)) => prev.mul(op),
                    None => op.clone(),
                };
                stack.push((word[..=depth].to_vec(), next));
            }
            if dead {
                stack.clear();
                continue;
            }
            acc = acc.add_scaled(&stack.last().unwrap().1, *coeff);
        }
        acc
    }

    /// Applies the represented polynomial to the vacuum vector.
    pub fn apply_to_vacuum(&self, p: &FreePoly) -> LaurentVec {
        let vac = LaurentVec::vacuum(self.nvars, self.dims.len(), self.dim_per_factor());
        let mut out = LaurentVec::empty(self.nvars, self.dims.len(), self.dim_per_factor());
        for (word, coeff) in &p.terms {
            let mut v = vac.clone();
            let mut dead = false;
            for letter in word.iter().rev() {
                match self.letter_op(*letter) {
                    Some(op) => {
                        v = apply_laurent_op(op, &v);
                    }
                    None => {
                        dead = true;
                        break;
                    }
                }
                if v.comps.is_empty() {
                    dead = true;
                    break;
                }
            }
            if !dead {
                out = out.add_scaled(&v, *coeff);
            }
        }
        out
    }

    fn dim_per_factor(&self) -> usize {
        self.dims.first().map(|&d| d as usize).unwrap_or(1)
    }
}

fn apply_laurent_op(op: &LaurentOp, v: &LaurentVec) -> LaurentVec {
    let dim = op.dims.first().map(|&d| d as usize).unwrap_or(1);
    let mut out = LaurentVec::empty(op.nvars.max(v.nvars), op.dims.len(), dim);
    let total: usize = op.dims.iter().map(|&d| d as usize).product();
    for (dop, comp) in &op.comps {
        for (dv, positions) in &v.comps {
            let nd = crate::opcalc::deg_add(dop, dv);
            let mut dense = vec![C64::new(0.0, 0.0); total];
            for (&pos, &val) in positions {
                dense[pos as usize] = val;
            }
            let mut res = vec![C64::new(0.0, 0.0); total];
            comp.matvec(&dense, &mut res);
            let slot = out.comps.entry(nd).or_default();
            for (i, val) in res.iter().enumerate() {
                if val.norm() > 0.0 {
                    *slot.entry(i as u64).or_insert(C64::new(0.0, 0.0)) += val;
                }
            }
        }
    }
    out.pruned()
}

/// Residual report of the highest-weight conditions for one candidate.
#[derive(Debug, Clone)]
pub struct HwReport {
    /// Per node: residual of the raising annihilation E_i(x) = 0.
    pub e_residuals: Vec<f64>,
    /// Per node: residual of K_i(x) = q^{r_i} x.
    pub k_residuals: Vec<f64>,
    pub tol: f64,
}

impl HwReport {
    pub fn max_residual(&self) -> f64 {
        self.e_residuals
            .iter()
            .chain(self.k_residuals.iter())
            .fold(0.0f64, |a, &b| a.max(b))
    }

    pub fn pass(&self) -> bool {
        self.max_residual() <= self.tol
    }
}

/// Evaluates the annihilation and eigenvalue conditions for one candidate
/// vector under a (faithful) quotient representation. Formally vanishing
/// polynomials short-circuit; coefficientwise-small polynomials are bounded
/// through the contractivity of the generator images.
pub fn verify_hw(
    x: &FreePoly,
    hw: HighestWeight,
    ctx: &ActionCtx,
    eval: &RowEval,
    margin: usize,
    tol: f64,
) -> HwReport {
    let n_size = ctx.n_size();
    let r = k_eigen_exponents(n_size, hw);
    let mut e_residuals = Vec::with_capacity(ctx.rank);
    let mut k_residuals = Vec::with_capacity(ctx.rank);
    let norm_of = |p: &FreePoly| -> f64 {
        if p.is_zero() {
            return 0.0;
        }
        // ||pi(word)|| <= prod ||entries|| <= (1 + eps)^len
        let bound = p.coeff_l1_norm() * 1.001f64.powi(p.max_len() as i32);
        if bound <= tol {
            return bound;
        }
        eval.represent(p)
            .interior_compress(margin)
            .residual_norm(tol)
    };
    for i in 1..=ctx.rank {
        e_residuals.push(norm_of(&act(Gen::E(i), x, ctx)));
        let kx = act(Gen::K(i), x, ctx);
        let expected = x.scale(C64::new(ctx.q.powi(r[i - 1] as i32), 0.0));
        k_residuals.push(norm_of(&kx.sub(&expected)));
    }
    HwReport {
        e_residuals,
        k_residuals,
        tol,
    }
}

/// Numerical rank of the family applied to the vacuum vector: Gram-matrix
/// singular values above (rel_tol * max) count as independent directions.
pub fn linear_independence(polys: &[FreePoly], eval: &RowEval, rel_tol: f64) -> (usize, Vec<f64>) {
    assert!(!polys.is_empty());
    let vecs: Vec<LaurentVec> = polys.par_iter().map(|p| eval.apply_to_vacuum(p)).collect();
    let r = vecs.len();
    let mut gram = DMatrix::<C64>::zeros(r, r);
    for i in 0..r {
        for j in 0..r {
            gram[(i, j)] = vecs[i].inner(&vecs[j]);
        }
    }
    let eig = nalgebra::SymmetricEigen::new(gram);
    let mut svals: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    svals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let max = svals.first().copied().unwrap_or(0.0);
    let rank = svals.iter().filter(|&&s| s > rel_tol * max && s > 0.0).count();
    (rank, svals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repbuilder::{build_pi, TauSpec};
    use crate::weyl::omega_n_words;

    fn letters7() -> LadderLetters {
        LadderLetters::standard(7)
    }

    #[test]
    fn observation_tables_formal() {
        // K and E actions on the four distinguished letters for n > 2
        let ctx = ActionCtx::new(LieType::B, 3, 0.5);
        let q = 0.5;
        let l = letters7();
        for (x, kind) in [(l.a, "x"), (l.b, "x"), (l.c, "y"), (l.d, "y")] {
            let p = FreePoly::letter(x);
            for i in 1..=3usize {
                let kp = act(Gen::K(i), &p, &ctx);
                let scale = kp.terms.values().next().unwrap().re;
                let expect = match (kind, i) {
                    ("x", 1) => 1.0 / q,
                    ("x", 2) => q,
                    ("y", 1) => q,
                    _ => 1.0,
                };
                assert!((scale - expect).abs() < 1e-14, "K_{i} on {kind}");
            }
        }
        // E_1(a) = -c, E_1(b) = -d, everything else annihilates
        let ea = act(Gen::E(1), &FreePoly::letter(l.a), &ctx);
        assert_eq!(ea, FreePoly::letter(l.c).scale(C64::new(-1.0, 0.0)));
        let eb = act(Gen::E(1), &FreePoly::letter(l.b), &ctx);
        assert_eq!(eb, FreePoly::letter(l.d).scale(C64::new(-1.0, 0.0)));
        for y in [l.c, l.d] {
            for i in 1..=3usize {
                assert!(act(Gen::E(i), &FreePoly::letter(y), &ctx).is_zero());
            }
        }
        for i in 2..=3usize {
            assert!(act(Gen::E(i), &FreePoly::letter(l.a), &ctx).is_zero());
            assert!(act(Gen::E(i), &FreePoly::letter(l.b), &ctx).is_zero());
        }
    }

    #[test]
    fn leibniz_consistency() {
        let ctx = ActionCtx::new(LieType::B, 3, 0.45);
        let l = letters7();
        for (x, y) in [(l.a, l.b), (l.b, l.c), (l.a, l.d), (l.c, l.b)] {
            let px = FreePoly::letter(x);
            let py = FreePoly::letter(y);
            let pxy = px.mul(&py);
            for i in 1..=3usize {
                let lhs = act(Gen::E(i), &pxy, &ctx);
                let rhs = act(Gen::E(i), &px, &ctx)
                    .mul(&act(Gen::K(i), &py, &ctx))
                    .add(&px.mul(&act(Gen::E(i), &py, &ctx)));
                assert!(lhs.sub(&rhs).coeff_l1_norm() < 1e-13);
                // K is grouplike
                let kk = act(Gen::K(i), &pxy, &ctx);
                let kk2 = act(Gen::K(i), &px, &ctx).mul(&act(Gen::K(i), &py, &ctx));
                assert!(kk.sub(&kk2).coeff_l1_norm() < 1e-13);
            }
        }
    }

    #[test]
    fn u1_coefficient() {
        // A_1 = -A1^0 / A1^1 = -q^{-2} at rank parameter 1
        let q = 0.5f64;
        let u = build_u_lambda(1, q, &letters7());
        assert_eq!(u.terms.len(), 2);
        let l = letters7();
        let ad = vec![l.a, l.d];
        let coeff = u.terms.get(&ad).unwrap();
        assert!((coeff.re + q.powi(-2)).abs() < 1e-13);
    }

    #[test]
    fn hw_vector_counts() {
        // (1,0) at N = 7 gives {c, d}
        let v = build_hw_vectors(HighestWeight { lambda1: 1, lambda2: 0 }, 7, 0.5);
        assert_eq!(v.len(), 2);
        let l = letters7();
        assert!(v[0].terms.contains_key(&vec![l.d]));
        assert!(v[1].terms.contains_key(&vec![l.c]));
        // (2,-1) at N = 4 gives lambda1 - |lambda2| + 1 = 2 vectors
        let v4 = build_hw_vectors(HighestWeight { lambda1: 2, lambda2: -1 }, 4, 0.5);
        assert_eq!(v4.len(), 2);
        // counts match lambda1 - lambda2 + 1 generally
        for (l1, l2) in [(2i64, 0i64), (3, 1), (3, 3)] {
            let v = build_hw_vectors(HighestWeight { lambda1: l1, lambda2: l2 }, 7, 0.5);
            assert_eq!(v.len() as i64, l1 - l2 + 1);
        }
    }

    #[test]
    fn annihilation_u1_represented() {
        // the formal image of u_1 under E_1 is nonzero; after representation
        // it cancels through the commutation relations
        let q = 0.5;
        let ctx = ActionCtx::new(LieType::B, 3, q);
        let u1 = build_u_lambda(1, q, &letters7());
        let e1 = act(Gen::E(1), &u1, &ctx);
        assert!(!e1.is_zero(), "formal image is nonzero before commutation");
        let (word, _) = omega_n_words(7);
        let rep = build_pi(&word, &TauSpec::Single(vec![1; 3]), q).unwrap();
        let eval = RowEval::from_rep(&rep, 7);
        let res = eval.represent(&e1).interior_compress(4).residual_norm(1e-9);
        assert!(res < 1e-9, "represented annihilation residual {res:.3e}");
    }

    #[test]
    fn ladder_rung_represented_n5() {
        // E_1(b^2 c^2) = A1^0 b c^2 d at rank parameter 2, compared under
        // the faithful N = 5 representation
        let q = 0.5;
        let ctx = ActionCtx::new(LieType::B, 2, q);
        let l = LadderLetters::standard(5);
        let b2c2 = FreePoly::pow_letter(l.b, 2).mul(&FreePoly::pow_letter(l.c, 2));
        let lhs = act(Gen::E(1), &b2c2, &ctx);
        let (a1, _) = hw_coefficients(2, q);
        let rhs = {
            let mut p = FreePoly::zero();
            p.add_term(vec![l.b, l.c, l.c, l.d], C64::new(a1[0], 0.0));
            p
        };
        let (word, _) = omega_n_words(5);
        let rep = build_pi(&word, &TauSpec::Single(vec![1; 2]), q).unwrap();
        let eval = RowEval::from_rep(&rep, 16);
        let res = eval
            .represent(&lhs.sub(&rhs))
            .interior_compress(8)
            .residual_norm(1e-9);
        assert!(res < 1e-9, "ladder rung residual {res:.3e}");
    }

    #[test]
    fn k_eigen_table_rows() {
        assert_eq!(
            k_eigen_exponents(7, HighestWeight { lambda1: 3, lambda2: 1 }),
            vec![2, 1, 0]
        );
        assert_eq!(
            k_eigen_exponents(5, HighestWeight { lambda1: 2, lambda2: 1 }),
            vec![1, 2]
        );
        assert_eq!(
            k_eigen_exponents(4, HighestWeight { lambda1: 2, lambda2: -1 }),
            vec![3, 1]
        );
        assert_eq!(
            k_eigen_exponents(6, HighestWeight { lambda1: 2, lambda2: 2 }),
            vec![0, 2, 2]
        );
    }

    #[test]
    fn rank_of_prop32_family() {
        // (2,-1) at N = 4: the two vacuum images are distinct basis vectors
        let q = 0.5;
        let hw = HighestWeight { lambda1: 2, lambda2: -1 };
        let polys = build_hw_vectors(hw, 4, q);
        let (word, _) = omega_n_words(4);
        let rep = build_pi(&word, &TauSpec::Single(vec![1; 2]), q).unwrap();
        let eval = RowEval::from_rep(&rep, 16);
        let (rank, svals) = linear_independence(&polys, &eval, 1e-8);
        assert_eq!(rank, 2, "singular values {svals:?}");
    }

    #[test]
    fn unit_poly_is_trivial_hw() {
        let q = 0.5;
        let ctx = ActionCtx::new(LieType::B, 2, q);
        let (word, _) = omega_n_words(5);
        let rep = build_pi(&word, &TauSpec::Single(vec![1; 2]), q).unwrap();
        let eval = RowEval::from_rep(&rep, 8);
        let report = verify_hw(
            &FreePoly::unit(),
            HighestWeight { lambda1: 0, lambda2: 0 },
            &ctx,
            &eval,
            3,
            1e-10,
        );
        assert!(report.pass());
        assert!(report.max_residual() == 0.0);
    }
}
