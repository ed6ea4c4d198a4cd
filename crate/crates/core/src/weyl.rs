//! Weyl groups of types B_n and D_n as signed permutations.
//!
//! Equality of words is decided through the faithful signed-permutation
//! action, and Coxeter lengths are positive-root inversion counts; at the
//! ranks used here (n <= 8) exhaustive methods are enough and do not depend
//! on any rewriting system.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum LieType {
    B,
    D,
}

#[derive(Debug, Error, PartialEq)]
pub enum WeylError {
    #[error("letter {letter} is not a simple reflection index for rank {rank}")]
    BadLetter { letter: usize, rank: usize },
    #[error("k = {k} is out of range for {lie:?} with rank {rank}")]
    BadK { lie: LieType, rank: usize, k: usize },
}

/// A word in the simple reflections s_1..s_n.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeylWord {
    pub lie: LieType,
    pub rank: usize,
    pub letters: Vec<usize>,
}

impl WeylWord {
    pub fn new(lie: LieType, rank: usize, letters: Vec<usize>) -> Result<Self, WeylError> {
        for &l in &letters {
            if l == 0 || l > rank {
                return Err(WeylError::BadLetter { letter: l, rank });
            }
        }
        Ok(WeylWord { lie, rank, letters })
    }

    pub fn identity(lie: LieType, rank: usize) -> Self {
        WeylWord {
            lie,
            rank,
            letters: vec![],
        }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn concat(&self, other: &WeylWord) -> Self {
        assert_eq!(self.lie, other.lie);
        assert_eq!(self.rank, other.rank);
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        WeylWord {
            lie: self.lie,
            rank: self.rank,
            letters,
        }
    }

    pub fn is_prefix_of(&self, other: &WeylWord) -> bool {
        self.letters.len() <= other.letters.len()
            && other.letters[..self.letters.len()] == self.letters[..]
    }

    /// Letter count equals Coxeter length.
    pub fn is_reduced(&self) -> bool {
        coxeter_length(self.lie, &signed_perm(self)) == self.letters.len()
    }
}

/// Signed permutation in window notation: `perm[i-1] = +-j` means
/// `e_i -> +-e_j`.
pub type SignedPerm = Vec<i32>;

pub fn identity_perm(rank: usize) -> SignedPerm {
    (1..=rank as i32).collect()
}

fn generator_perm(lie: LieType, rank: usize, i: usize) -> SignedPerm {
    let mut p = identity_perm(rank);
    if i < rank {
        p.swap(i - 1, i);
    } else {
        match lie {
            LieType::B => p[rank - 1] = -(rank as i32),
            LieType::D => {
                // e_{n-1} -> -e_n, e_n -> -e_{n-1}
                p[rank - 2] = -(rank as i32);
                p[rank - 1] = -(rank as i32 - 1);
            }
        }
    }
    p
}

/// Function composition a after b.
pub fn compose(a: &SignedPerm, b: &SignedPerm) -> SignedPerm {
    assert_eq!(a.len(), b.len());
    b.iter()
        .map(|&bi| {
            let img = a[bi.unsigned_abs() as usize - 1];
            if bi > 0 { img } else { -img }
        })
        .collect()
}

/// The canonical faithful action: letters act right-to-left, so
/// `signed_perm(concat(u, v)) = signed_perm(u) o signed_perm(v)`.
pub fn signed_perm(w: &WeylWord) -> SignedPerm {
    let mut p = identity_perm(w.rank);
    for &l in &w.letters {
        let g = generator_perm(w.lie, w.rank, l);
        p = compose(&p, &g);
    }
    p
}

/// Image of `c1 e_a + c2 e_b` style roots; positivity test on images.
fn image_is_negative(perm: &SignedPerm, support: &[(usize, i32)]) -> bool {
    // collect image as coefficient list
    let mut coeffs: Vec<(usize, i32)> = support
        .iter()
        .map(|&(idx, c)| {
            let img = perm[idx - 1];
            (img.unsigned_abs() as usize, c * img.signum())
        })
        .collect();
    coeffs.sort_unstable();
    match coeffs.len() {
        1 => coeffs[0].1 < 0,
        2 => {
            let (a, ca) = coeffs[0];
            let (b, cb) = coeffs[1];
            debug_assert!(a < b);
            // e_a + e_b (+,+) positive; e_a - e_b positive; everything with
            // negative coefficient on the smaller index is negative
            let _ = b;
            if ca > 0 {
                false
            } else {
                // (-,+) = e_b - e_a is negative; (-,-) negative
                let _ = cb;
                true
            }
        }
        _ => unreachable!(),
    }
}

/// Coxeter length as the number of positive roots sent to negative ones.
pub fn coxeter_length(lie: LieType, perm: &SignedPerm) -> usize {
    let n = perm.len();
    let mut count = 0;
    for i in 1..=n {
        for j in (i + 1)..=n {
            if image_is_negative(perm, &[(i, 1), (j, -1)]) {
                count += 1;
            }
            if image_is_negative(perm, &[(i, 1), (j, 1)]) {
                count += 1;
            }
        }
        if lie == LieType::B && image_is_negative(perm, &[(i, 1)]) {
            count += 1;
        }
    }
    count
}

fn simple_root_support(lie: LieType, rank: usize, i: usize) -> Vec<(usize, i32)> {
    if i < rank {
        vec![(i, 1), (i + 1, -1)]
    } else {
        match lie {
            LieType::B => vec![(rank, 1)],
            LieType::D => vec![(rank - 1, 1), (rank, 1)],
        }
    }
}

/// A reduced word for the longest element; length n^2 for B, n^2 - n for D.
pub fn longest_element(lie: LieType, rank: usize) -> WeylWord {
    assert!(rank >= 1);
    assert!(lie == LieType::B || rank >= 2, "D_n needs n >= 2");
    let target: SignedPerm = match lie {
        LieType::B => (1..=rank as i32).map(|i| -i).collect(),
        LieType::D => (1..=rank as i32)
            .map(|i| {
                if i < rank as i32 || rank % 2 == 0 {
                    -i
                } else {
                    i
                }
            })
            .collect(),
    };
    // peel right descents: l(w s_i) < l(w) iff w(alpha_i) < 0
    let mut w = target;
    let mut letters_rev = Vec::new();
    loop {
        let mut descent = None;
        for i in 1..=rank {
            if image_is_negative(&w, &simple_root_support(lie, rank, i)) {
                descent = Some(i);
                break;
            }
        }
        match descent {
            Some(i) => {
                w = compose(&w, &generator_perm(lie, rank, i));
                letters_rev.push(i);
            }
            None => break,
        }
    }
    assert_eq!(w, identity_perm(rank), "descent peeling must reach identity");
    letters_rev.reverse();
    WeylWord {
        lie,
        rank,
        letters: letters_rev,
    }
}

/// The word attached to the k-th irreducible family of the quotient space:
/// identity at k = 1, then s_1..s_{k-1} while the chain grows, and the
/// reflected tails past the middle node (case by case for B and D).
pub fn omega_k(lie: LieType, rank: usize, k: usize) -> Result<WeylWord, WeylError> {
    let n = rank;
    let max_k = match lie {
        LieType::B => 2 * n,
        LieType::D => 2 * n - 1,
    };
    if k < 1 || k > max_k {
        return Err(WeylError::BadK { lie, rank, k });
    }
    let letters: Vec<usize> = if k == 1 {
        vec![]
    } else if k <= n + 1 {
        (1..=k - 1).collect()
    } else {
        match lie {
            LieType::B => {
                // s_1..s_{n-1} s_n s_{n-1}..s_{2n-k+1}
                let mut v: Vec<usize> = (1..=n).collect();
                v.extend((2 * n - k + 1..=n - 1).rev());
                v
            }
            LieType::D => {
                // s_1..s_{n-1} s_n s_{n-2}..s_{2n-k}
                let mut v: Vec<usize> = (1..=n).collect();
                v.extend((2 * n - k..=n - 2).rev());
                v
            }
        }
    };
    WeylWord::new(lie, rank, letters)
}

/// The pair (omega_N, omega_N') used for the highest-weight vector counts:
/// omega_N is the longest quotient word and omega_N' drops its final letter.
pub fn omega_n_words(n_big: usize) -> (WeylWord, WeylWord) {
    assert!(n_big >= 4);
    let rank = n_big / 2;
    let (lie, k_max) = if n_big % 2 == 1 {
        (LieType::B, 2 * rank)
    } else {
        (LieType::D, 2 * rank - 1)
    };
    let omega = omega_k(lie, rank, k_max).unwrap();
    let mut letters = omega.letters.clone();
    letters.pop();
    let omega_prime = WeylWord::new(lie, rank, letters).unwrap();
    (omega, omega_prime)
}
