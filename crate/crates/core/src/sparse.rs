//! Complex CSR matrices sized for truncated tensor-product operators.
//!
//! The operators handled here are Kronecker products of banded factors, so
//! rows stay short (a handful of entries) while total dimensions go up to
//! 16^5. Everything is deterministic: rows are kept sorted by column and all
//! reductions are sequential.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type C64 = Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMat {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<C64>,
}

impl CsrMat {
    pub fn zero(nrows: usize, ncols: usize) -> Self {
        CsrMat {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        CsrMat {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            cols: (0..n as u32).collect(),
            vals: vec![C64::new(1.0, 0.0); n],
        }
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = CsrMat::zero(n, n);
        let mut nnz = 0;
        for (i, &v) in diag.iter().enumerate() {
            if v != C64::new(0.0, 0.0) {
                m.cols.push(i as u32);
                m.vals.push(v);
                nnz += 1;
            }
            m.indptr[i + 1] = nnz;
        }
        m
    }

    /// Triplets need not be sorted; duplicates are summed.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (u32, u32, C64)>,
    ) -> Self {
        let mut trip: Vec<(u32, u32, C64)> = triplets.into_iter().collect();
        trip.sort_by_key(|&(r, c, _)| (r, c));
        let mut m = CsrMat::zero(nrows, ncols);
        let mut last: Option<(u32, u32)> = None;
        for (r, c, v) in trip {
            debug_assert!((r as usize) < nrows && (c as usize) < ncols);
            if last == Some((r, c)) {
                *m.vals.last_mut().unwrap() += v;
            } else {
                m.cols.push(c);
                m.vals.push(v);
                last = Some((r, c));
            }
            m.indptr[r as usize + 1] = m.vals.len();
        }
        // make indptr cumulative over empty rows
        for i in 1..=nrows {
            if m.indptr[i] < m.indptr[i - 1] {
                m.indptr[i] = m.indptr[i - 1];
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> (&[u32], &[C64]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.cols[a..b], &self.vals[a..b])
    }

    pub fn iter_entries(&self) -> impl Iterator<Item = (u32, u32, C64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cs, vs) = self.row(i);
            cs.iter()
                .zip(vs.iter())
                .map(move |(&c, &v)| (i as u32, c, v))
        })
    }

    /// Drops entries with |v| <= eps. eps = 0.0 keeps exact zeros out only.
    pub fn pruned(&self, eps: f64) -> Self {
        CsrMat::from_triplets(
            self.nrows,
            self.ncols,
            self.iter_entries().filter(|(_, _, v)| v.norm() > eps),
        )
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut m = self.clone();
        for v in &mut m.vals {
            *v *= s;
        }
        m
    }

    pub fn add(&self, other: &CsrMat) -> Self {
        self.add_scaled(other, C64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &CsrMat) -> Self {
        self.add_scaled(other, C64::new(-1.0, 0.0))
    }

    pub fn add_scaled(&self, other: &CsrMat, s: C64) -> Self {
        assert_eq!(self.nrows, other.nrows);
        assert_eq!(self.ncols, other.ncols);
        let mut indptr = Vec::with_capacity(self.nrows + 1);
        indptr.push(0usize);
        let mut cols = Vec::with_capacity(self.nnz() + other.nnz());
        let mut vals = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.nrows {
            let (ca, va) = self.row(i);
            let (cb, vb) = other.row(i);
            let (mut p, mut r) = (0, 0);
            while p < ca.len() || r < cb.len() {
                if r >= cb.len() || (p < ca.len() && ca[p] < cb[r]) {
                    cols.push(ca[p]);
                    vals.push(va[p]);
                    p += 1;
                } else if p >= ca.len() || cb[r] < ca[p] {
                    cols.push(cb[r]);
                    vals.push(vb[r] * s);
                    r += 1;
                } else {
                    let v = va[p] + vb[r] * s;
                    if v != C64::new(0.0, 0.0) {
                        cols.push(ca[p]);
                        vals.push(v);
                    }
                    p += 1;
                    r += 1;
                }
            }
            indptr.push(cols.len());
        }
        CsrMat {
            nrows: self.nrows,
            ncols: self.ncols,
            indptr,
            cols,
            vals,
        }
    }

    pub fn matmul(&self, other: &CsrMat) -> Self {
        assert_eq!(self.ncols, other.nrows, "dimension mismatch in matmul");
        let n = other.ncols;
        let mut acc = vec![C64::new(0.0, 0.0); n];
        let mut touched: Vec<u32> = Vec::new();
        let mut indptr = Vec::with_capacity(self.nrows + 1);
        indptr.push(0usize);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for i in 0..self.nrows {
            let (ca, va) = self.row(i);
            for (&k, &av) in ca.iter().zip(va.iter()) {
                let (cb, vb) = other.row(k as usize);
                for (&j, &bv) in cb.iter().zip(vb.iter()) {
                    let cell = &mut acc[j as usize];
                    if *cell == C64::new(0.0, 0.0) {
                        touched.push(j);
                    }
                    *cell += av * bv;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                let v = acc[j as usize];
                acc[j as usize] = C64::new(0.0, 0.0);
                if v != C64::new(0.0, 0.0) {
                    cols.push(j);
                    vals.push(v);
                }
            }
            touched.clear();
            indptr.push(cols.len());
        }
        CsrMat {
            nrows: self.nrows,
            ncols: n,
            indptr,
            cols,
            vals,
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.cols {
            counts[c as usize + 1] += 1;
        }
        for i in 1..=self.ncols {
            counts[i] += counts[i - 1];
        }
        let indptr = counts.clone();
        let mut cols = vec![0u32; self.nnz()];
        let mut vals = vec![C64::new(0.0, 0.0); self.nnz()];
        let mut cursor = indptr.clone();
        for (r, c, v) in self.iter_entries() {
            let slot = cursor[c as usize];
            cols[slot] = r;
            vals[slot] = v.conj();
            cursor[c as usize] += 1;
        }
        CsrMat {
            nrows: self.ncols,
            ncols: self.nrows,
            indptr,
            cols,
            vals,
        }
    }

    pub fn kron(&self, other: &CsrMat) -> Self {
        let nrows = self.nrows * other.nrows;
        let ncols = self.ncols * other.ncols;
        let mut indptr = Vec::with_capacity(nrows + 1);
        indptr.push(0usize);
        let mut cols = Vec::with_capacity(self.nnz() * other.nnz());
        let mut vals = Vec::with_capacity(self.nnz() * other.nnz());
        for ia in 0..self.nrows {
            let (ca, va) = self.row(ia);
            for ib in 0..other.nrows {
                let (cb, vb) = other.row(ib);
                for (&ja, &a) in ca.iter().zip(va.iter()) {
                    for (&jb, &b) in cb.iter().zip(vb.iter()) {
                        cols.push(ja * other.ncols as u32 + jb);
                        vals.push(a * b);
                    }
                }
                indptr.push(cols.len());
            }
        }
        CsrMat {
            nrows,
            ncols,
            indptr,
            cols,
            vals,
        }
    }

    pub fn matvec(&self, x: &[C64], out: &mut [C64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(out.len(), self.nrows);
        for o in out.iter_mut() {
            *o = C64::new(0.0, 0.0);
        }
        for i in 0..self.nrows {
            let (cs, vs) = self.row(i);
            let mut acc = C64::new(0.0, 0.0);
            for (&c, &v) in cs.iter().zip(vs.iter()) {
                acc += v * x[c as usize];
            }
            out[i] = acc;
        }
    }

    /// out = A^H x without forming the adjoint.
    pub fn matvec_adj(&self, x: &[C64], out: &mut [C64]) {
        assert_eq!(x.len(), self.nrows);
        assert_eq!(out.len(), self.ncols);
        for o in out.iter_mut() {
            *o = C64::new(0.0, 0.0);
        }
        for i in 0..self.nrows {
            let xi = x[i];
            if xi == C64::new(0.0, 0.0) {
                continue;
            }
            let (cs, vs) = self.row(i);
            for (&c, &v) in cs.iter().zip(vs.iter()) {
                out[c as usize] += v.conj() * xi;
            }
        }
    }

    pub fn frob_norm(&self) -> f64 {
        self.vals.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        let mut t = C64::new(0.0, 0.0);
        for i in 0..self.nrows.min(self.ncols) {
            let (cs, vs) = self.row(i);
            if let Ok(p) = cs.binary_search(&(i as u32)) {
                t += vs[p];
            }
        }
        t
    }

    /// Keeps entries whose row and column both satisfy `keep`.
    pub fn masked(&self, keep: impl Fn(u32) -> bool) -> Self {
        CsrMat::from_triplets(
            self.nrows,
            self.ncols,
            self.iter_entries()
                .filter(|&(r, c, _)| keep(r) && keep(c)),
        )
    }

    pub fn columns_with_entries(&self) -> Vec<u32> {
        let mut cols: Vec<u32> = self.cols.clone();
        cols.sort_unstable();
        cols.dedup();
        cols
    }

    /// Dense submatrix indexed by `idx` on both sides.
    pub fn dense_submatrix(&self, idx: &[u32]) -> nalgebra::DMatrix<C64> {
        let pos: std::collections::HashMap<u32, usize> =
            idx.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        let mut d = nalgebra::DMatrix::from_element(idx.len(), idx.len(), C64::new(0.0, 0.0));
        for &i in idx {
            let (cs, vs) = self.row(i as usize);
            for (&c, &v) in cs.iter().zip(vs.iter()) {
                if let Some(&pc) = pos.get(&c) {
                    d[(pos[&i], pc)] = v;
                }
            }
        }
        d
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<C64> {
        let mut d = nalgebra::DMatrix::from_element(self.nrows, self.ncols, C64::new(0.0, 0.0));
        for (r, c, v) in self.iter_entries() {
            d[(r as usize, c as usize)] = v;
        }
        d
    }

    /// Largest singular value via power iteration on A^H A. The returned
    /// value is accurate to ~1e-12 relative for the uses here (pass/fail
    /// against tolerances orders of magnitude away); a deterministic seeded
    /// start vector keeps reports byte-stable.
    pub fn op_norm(&self) -> f64 {
        if self.nnz() == 0 {
            return 0.0;
        }
        // cheap exact path for very small matrices
        if self.nrows.max(self.ncols) <= 64 {
            let d = self.to_dense();
            return d.svd(false, false).singular_values.max();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ (self.nnz() as u64));
        let mut x: Vec<C64> = (0..self.ncols)
            .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let mut y = vec![C64::new(0.0, 0.0); self.nrows];
        let mut z = vec![C64::new(0.0, 0.0); self.ncols];
        normalize(&mut x);
        let mut lambda = 0.0_f64;
        for it in 0..400 {
            self.matvec(&x, &mut y);
            self.matvec_adj(&y, &mut z);
            let nl = norm(&z);
            if nl == 0.0 {
                return 0.0;
            }
            for (xi, zi) in x.iter_mut().zip(z.iter()) {
                *xi = zi / nl;
            }
            if it > 4 && (nl - lambda).abs() <= 1e-13 * nl.max(1e-30) {
                lambda = nl;
                break;
            }
            lambda = nl;
        }
        lambda.sqrt()
    }
}

fn norm(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(x: &mut [C64]) {
    let n = norm(x);
    if n > 0.0 {
        for v in x.iter_mut() {
            *v /= n;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_sparse(seed: u64, n: usize, fill: f64) -> CsrMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut trip = Vec::new();
        for i in 0..n as u32 {
            for j in 0..n as u32 {
                if rng.gen::<f64>() < fill {
                    trip.push((i, j, c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)));
                }
            }
        }
        CsrMat::from_triplets(n, n, trip)
    }

    #[test]
    fn matmul_matches_dense() {
        let a = random_sparse(1, 17, 0.3);
        let b = random_sparse(2, 17, 0.3);
        let sparse = a.matmul(&b).to_dense();
        let dense = a.to_dense() * b.to_dense();
        assert!((sparse - dense).norm() < 1e-12);
    }

    #[test]
    fn adjoint_is_involution_and_antihomomorphism() {
        let a = random_sparse(3, 13, 0.4);
        let b = random_sparse(4, 13, 0.4);
        assert_eq!(a.adjoint().adjoint(), a);
        let lhs = a.matmul(&b).adjoint().to_dense();
        let rhs = b.adjoint().matmul(&a.adjoint()).to_dense();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn kron_matches_dense() {
        let a = random_sparse(5, 6, 0.5);
        let b = random_sparse(6, 5, 0.5);
        let k = a.kron(&b).to_dense();
        let d = a.to_dense().kronecker(&b.to_dense());
        assert!((k - d).norm() < 1e-12);
    }

    #[test]
    fn op_norm_matches_svd() {
        // larger than the dense shortcut so power iteration is exercised
        let a = random_sparse(7, 90, 0.15);
        let svd = a.to_dense().svd(false, false).singular_values.max();
        assert!((a.op_norm() - svd).abs() < 1e-8 * svd.max(1.0));
    }

    #[test]
    fn matvec_adj_consistent() {
        let a = random_sparse(8, 23, 0.3);
        let x: Vec<C64> = (0..23).map(|i| c(i as f64, -(i as f64) / 3.0)).collect();
        let mut y1 = vec![c(0.0, 0.0); 23];
        a.matvec_adj(&x, &mut y1);
        let mut y2 = vec![c(0.0, 0.0); 23];
        a.adjoint().matvec(&x, &mut y2);
        for (u, v) in y1.iter().zip(y2.iter()) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn mask_and_trace() {
        let a = CsrMat::identity(10);
        assert_eq!(a.trace(), c(10.0, 0.0));
        let m = a.masked(|i| i < 7);
        assert_eq!(m.trace(), c(7.0, 0.0));
        assert_eq!(m.nnz(), 7);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn add_then_sub_roundtrip(seed in 0u64..500) {
            let a = random_sparse(seed, 11, 0.4);
            let b = random_sparse(seed + 1000, 11, 0.4);
            let back = a.add(&b).sub(&b);
            prop_assert!((back.to_dense() - a.to_dense()).norm() < 1e-12);
        }
    }
}
