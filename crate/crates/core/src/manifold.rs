//! Manifold specifications: finite presentations with peripheral data.
//!
//! A [`ManifoldSpec`] is read from a JSON document, validated once, and is
//! immutable afterwards.  Mod-2 cohomology of the presentation complex is
//! computed here as well; it bounds the degree of the restriction map on the
//! `SL(2,C)` side.

use std::fmt;

use nalgebra::Matrix2;
use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Mat2;

/// Determinant tolerance for seed matrices.
pub const SEED_DET_TOL: f64 = 1e-8;
/// Relator tolerance for seed representations (distance to `±I`).
pub const SEED_RELATOR_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ManifoldError {
    #[error("malformed spec document: {0}")]
    Malformed(String),
    #[error("word {context} uses generator {index} but only {generators} generators exist")]
    InvalidIndex {
        context: String,
        index: i32,
        generators: usize,
    },
    #[error("word {context} contains the letter 0")]
    ZeroLetter { context: String },
    #[error("spec declares no cusps")]
    NoCusps,
    #[error("right-handed peripheral basis requires the explicit override flag")]
    RightHandedBasis,
    #[error("seed matrix for generator {generator} has |det - 1| = {deviation:e}")]
    SeedDeterminant { generator: usize, deviation: f64 },
    #[error("seed relator {relator} is {deviation:e} away from +/-identity")]
    SeedRelator { relator: usize, deviation: f64 },
    #[error("seed has {got} matrices for {expected} generators")]
    SeedArity { expected: usize, got: usize },
    #[error("cusp {cusp}: meridian and longitude do not commute in the abelianization")]
    PeripheralNotCommuting { cusp: usize },
    #[error("cusp {cusp}: seed images of meridian and longitude do not commute ({deviation:e})")]
    SeedPeripheralNotCommuting { cusp: usize, deviation: f64 },
    #[error("reference volume must be nonnegative, got {0}")]
    NegativeVolume(f64),
    #[error(
        "inconsistent spec: dim H^1(M;Z2) = {h1_dim} is smaller than the cusp count {cusps}"
    )]
    CohomologyRank { h1_dim: usize, cusps: usize },
}

/// An element of the free group on the generators, as signed 1-based
/// generator indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<i32>);

impl Word {
    pub fn new(letters: Vec<i32>) -> Self {
        Word(letters)
    }

    pub fn identity() -> Self {
        Word(Vec::new())
    }

    /// Reads a word in the usual letter notation: `a`..`z` are generators
    /// 1..26 and capitals their inverses.
    pub fn from_letters(text: &str) -> Result<Self, ManifoldError> {
        text.chars()
            .map(|c| {
                if c.is_ascii_lowercase() {
                    Ok(c as i32 - 'a' as i32 + 1)
                } else if c.is_ascii_uppercase() {
                    Ok(-(c as i32 - 'A' as i32 + 1))
                } else {
                    Err(ManifoldError::Malformed(format!("bad letter {c:?} in {text:?}")))
                }
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Word)
    }

    pub fn letters(&self) -> &[i32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn validate(&self, generators: usize, context: &str) -> Result<(), ManifoldError> {
        for &x in &self.0 {
            if x == 0 {
                return Err(ManifoldError::ZeroLetter {
                    context: context.to_string(),
                });
            }
            if x.unsigned_abs() as usize > generators {
                return Err(ManifoldError::InvalidIndex {
                    context: context.to_string(),
                    index: x,
                    generators,
                });
            }
        }
        Ok(())
    }

    /// Cancels adjacent `x x^-1` pairs until none remain.
    pub fn free_reduce(&self) -> Word {
        let mut out: Vec<i32> = Vec::with_capacity(self.0.len());
        for &x in &self.0 {
            if out.last() == Some(&-x) {
                out.pop();
            } else {
                out.push(x);
            }
        }
        Word(out)
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|x| -x).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// `self · other · self^-1`
    pub fn conjugate_by(&self, other: &Word) -> Word {
        self.concat(other).concat(&self.inverse())
    }

    /// Exponent sum of every generator: the image in `Z^n`.
    pub fn exponent_sums(&self, generators: usize) -> Vec<i64> {
        let mut sums = vec![0i64; generators];
        for &x in &self.0 {
            let i = x.unsigned_abs() as usize - 1;
            sums[i] += x.signum() as i64;
        }
        sums
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for &x in &self.0 {
            let i = x.unsigned_abs() - 1;
            if i < 26 {
                let base = if x > 0 { b'a' } else { b'A' };
                write!(f, "{}", (base + i as u8) as char)?;
            } else {
                write!(f, "[{x}]")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CuspData {
    pub meridian: Word,
    pub longitude: Word,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Handedness {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceVolume {
    pub value: f64,
    pub provenance: String,
}

/// On-disk layout of a spec document.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub name: String,
    pub generators: usize,
    pub relators: Vec<Word>,
    pub cusps: Vec<CuspData>,
    pub basis_handedness: Handedness,
    pub reference_volume: ReferenceVolume,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_representation: Option<Vec<[[f64; 2]; 4]>>,
    pub provenance: String,
    /// Accept a right-handed peripheral basis.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub allow_right_handed: bool,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    /// Accept right-handed bases even if the document does not set
    /// `allow_right_handed`.
    pub allow_right_handed: bool,
}

/// A validated manifold specification.
#[derive(Clone, Debug)]
pub struct ManifoldSpec {
    pub name: String,
    pub generators: usize,
    pub relators: Vec<Word>,
    pub cusps: Vec<CuspData>,
    pub handedness: Handedness,
    pub reference_volume: ReferenceVolume,
    pub seed: Option<Vec<Mat2>>,
    pub provenance: String,
}

impl ManifoldSpec {
    pub fn cusp_count(&self) -> usize {
        self.cusps.len()
    }

    /// `+1` for left-handed bases, `-1` for right-handed ones.
    pub fn orientation_sign(&self) -> f64 {
        match self.handedness {
            Handedness::Left => 1.0,
            Handedness::Right => -1.0,
        }
    }

    pub fn to_document(&self) -> SpecDocument {
        SpecDocument {
            name: self.name.clone(),
            generators: self.generators,
            relators: self.relators.clone(),
            cusps: self.cusps.clone(),
            basis_handedness: self.handedness,
            reference_volume: self.reference_volume.clone(),
            seed_representation: self.seed.as_ref().map(|s| {
                s.iter()
                    .map(|m| {
                        [
                            [m[(0, 0)].re, m[(0, 0)].im],
                            [m[(0, 1)].re, m[(0, 1)].im],
                            [m[(1, 0)].re, m[(1, 0)].im],
                            [m[(1, 1)].re, m[(1, 1)].im],
                        ]
                    })
                    .collect()
            }),
            provenance: self.provenance.clone(),
            allow_right_handed: self.handedness == Handedness::Right,
        }
    }
}

pub fn parse_spec(text: &str) -> Result<ManifoldSpec, ManifoldError> {
    parse_spec_with(text, ParseOptions::default())
}

pub fn parse_spec_with(text: &str, options: ParseOptions) -> Result<ManifoldSpec, ManifoldError> {
    let doc: SpecDocument =
        serde_json::from_str(text).map_err(|e| ManifoldError::Malformed(e.to_string()))?;
    from_document(doc, options)
}

pub fn from_document(doc: SpecDocument, options: ParseOptions) -> Result<ManifoldSpec, ManifoldError> {
    let n = doc.generators;
    if n == 0 {
        return Err(ManifoldError::Malformed("generator count must be positive".into()));
    }
    for (i, r) in doc.relators.iter().enumerate() {
        r.validate(n, &format!("relator {}", i + 1))?;
    }
    if doc.cusps.is_empty() {
        return Err(ManifoldError::NoCusps);
    }
    for (i, c) in doc.cusps.iter().enumerate() {
        c.meridian.validate(n, &format!("meridian {}", i + 1))?;
        c.longitude.validate(n, &format!("longitude {}", i + 1))?;
        let commutator = c
            .meridian
            .concat(&c.longitude)
            .concat(&c.meridian.inverse())
            .concat(&c.longitude.inverse());
        if commutator.exponent_sums(n).iter().any(|&e| e != 0) {
            return Err(ManifoldError::PeripheralNotCommuting { cusp: i + 1 });
        }
    }
    if doc.basis_handedness == Handedness::Right && !(doc.allow_right_handed || options.allow_right_handed) {
        return Err(ManifoldError::RightHandedBasis);
    }
    if !(doc.reference_volume.value >= 0.0) {
        return Err(ManifoldError::NegativeVolume(doc.reference_volume.value));
    }
    if doc.provenance.trim().is_empty() || doc.reference_volume.provenance.trim().is_empty() {
        return Err(ManifoldError::Malformed("provenance strings are mandatory".into()));
    }

    let seed = match doc.seed_representation {
        None => None,
        Some(raw) => {
            if raw.len() != n {
                return Err(ManifoldError::SeedArity {
                    expected: n,
                    got: raw.len(),
                });
            }
            let mats: Vec<Mat2> = raw
                .iter()
                .map(|e| {
                    Matrix2::new(
                        Complex::new(e[0][0], e[0][1]),
                        Complex::new(e[1][0], e[1][1]),
                        Complex::new(e[2][0], e[2][1]),
                        Complex::new(e[3][0], e[3][1]),
                    )
                })
                .collect();
            for (i, m) in mats.iter().enumerate() {
                let dev = (m.determinant() - Complex::new(1.0, 0.0)).norm();
                if !(dev < SEED_DET_TOL) {
                    return Err(ManifoldError::SeedDeterminant {
                        generator: i + 1,
                        deviation: dev,
                    });
                }
            }
            for (i, r) in doc.relators.iter().enumerate() {
                let w = crate::linalg::eval_word(r, &mats);
                let dev = crate::linalg::distance_to_pm_identity(&w);
                if !(dev < SEED_RELATOR_TOL) {
                    return Err(ManifoldError::SeedRelator {
                        relator: i + 1,
                        deviation: dev,
                    });
                }
            }
            for (i, c) in doc.cusps.iter().enumerate() {
                let a = crate::linalg::eval_word(&c.meridian, &mats);
                let b = crate::linalg::eval_word(&c.longitude, &mats);
                let dev = (a * b - b * a).norm();
                if !(dev < SEED_RELATOR_TOL) {
                    return Err(ManifoldError::SeedPeripheralNotCommuting {
                        cusp: i + 1,
                        deviation: dev,
                    });
                }
            }
            Some(mats)
        }
    };

    Ok(ManifoldSpec {
        name: doc.name,
        generators: n,
        relators: doc.relators,
        cusps: doc.cusps,
        handedness: doc.basis_handedness,
        reference_volume: doc.reference_volume,
        seed,
        provenance: doc.provenance,
    })
}

/// Mod-2 cohomology data of the presentation complex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Z2CohomologyData {
    pub h1_dim: usize,
    pub cusp_count: usize,
    pub k: usize,
    pub degree_bound: u64,
}

/// Row-reduces a matrix over `Z/2` in place and returns its rank.
fn z2_rank(rows: &mut [Vec<u8>], cols: usize) -> usize {
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][c] == 1) else {
            continue;
        };
        rows.swap(rank, p);
        for r in 0..rows.len() {
            if r != rank && rows[r][c] == 1 {
                for j in 0..cols {
                    rows[r][j] ^= rows[rank][j];
                }
            }
        }
        rank += 1;
    }
    rank
}

fn relator_matrix_z2(spec_generators: usize, relators: &[Word]) -> Vec<Vec<u8>> {
    relators
        .iter()
        .map(|r| {
            r.exponent_sums(spec_generators)
                .into_iter()
                .map(|e| e.rem_euclid(2) as u8)
                .collect()
        })
        .collect()
}

/// Basis of the homomorphisms `pi_1 -> Z/2`, as vectors of generator values.
pub fn z2_cocycle_basis(generators: usize, relators: &[Word]) -> Vec<Vec<u8>> {
    let mut rows = relator_matrix_z2(generators, relators);
    let rank = z2_rank(&mut rows, generators);
    let rows = &rows[..rank];
    let pivots: Vec<usize> = rows
        .iter()
        .map(|r| r.iter().position(|&x| x == 1).expect("nonzero reduced row"))
        .collect();
    let free: Vec<usize> = (0..generators).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![0u8; generators];
            v[f] = 1;
            for (row, &p) in rows.iter().zip(&pivots) {
                v[p] = row[f];
            }
            v
        })
        .collect()
}

/// `dim H^1(M; Z/2)` from the abelianized relator matrix and the resulting
/// bound `2^k` on the degree of the `SL(2,C)` restriction map.
pub fn h1_z2(spec: &ManifoldSpec) -> Result<Z2CohomologyData, ManifoldError> {
    let mut rows = relator_matrix_z2(spec.generators, &spec.relators);
    let rank = z2_rank(&mut rows, spec.generators);
    let h1_dim = spec.generators - rank;
    let h = spec.cusp_count();
    if h1_dim < h {
        return Err(ManifoldError::CohomologyRank { h1_dim, cusps: h });
    }
    let k = h1_dim - h;
    Ok(Z2CohomologyData {
        h1_dim,
        cusp_count: h,
        k,
        degree_bound: 1u64 << k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec_with(generators: usize, relators: Vec<Word>, cusps: usize) -> ManifoldSpec {
        ManifoldSpec {
            name: "test".into(),
            generators,
            relators,
            cusps: vec![
                CuspData {
                    meridian: Word::new(vec![1]),
                    longitude: Word::identity(),
                };
                cusps
            ],
            handedness: Handedness::Left,
            reference_volume: ReferenceVolume {
                value: 0.0,
                provenance: "none".into(),
            },
            seed: None,
            provenance: "test".into(),
        }
    }

    #[test]
    fn free_reduce_examples() {
        assert_eq!(Word::new(vec![1, -1]).free_reduce(), Word::identity());
        assert_eq!(Word::new(vec![1, 2, -2, 1]).free_reduce(), Word::new(vec![1, 1]));
        assert_eq!(Word::identity().free_reduce(), Word::identity());
        assert_eq!(Word::new(vec![2, 1, -1, -2, 3]).free_reduce(), Word::new(vec![3]));
    }

    #[test]
    fn letters_round_trip() {
        let w = Word::from_letters("XyxYxyXYxY").unwrap();
        assert_eq!(w.letters()[0], -24);
        let w = Word::from_letters("aBAb").unwrap();
        assert_eq!(w, Word::new(vec![1, -2, -1, 2]));
        assert_eq!(w.to_string(), "aBAb");
    }

    #[test]
    fn free_group_rank_one() {
        let d = h1_z2(&spec_with(1, vec![], 1)).unwrap();
        assert_eq!((d.h1_dim, d.k, d.degree_bound), (1, 0, 1));
    }

    #[test]
    fn cohomology_rank_violation_is_reported() {
        // <a | a^2>: H^1(Z/2) = Z/2, fine; <a | a> kills it.
        let spec = spec_with(1, vec![Word::new(vec![1])], 1);
        assert!(matches!(h1_z2(&spec), Err(ManifoldError::CohomologyRank { .. })));
    }

    #[test]
    fn cocycles_satisfy_relators() {
        let rel = Word::from_letters("aaabABBAb").unwrap();
        let basis = z2_cocycle_basis(2, std::slice::from_ref(&rel));
        assert_eq!(basis.len(), 1);
        let sums = rel.exponent_sums(2);
        let dot: i64 = sums.iter().zip(&basis[0]).map(|(s, &b)| s * b as i64).sum();
        assert_eq!(dot.rem_euclid(2), 0);
    }

    fn word_strategy() -> impl Strategy<Value = Word> {
        prop::collection::vec(prop_oneof![-3i32..=-1, 1i32..=3], 0..24).prop_map(Word::new)
    }

    proptest! {
        #[test]
        fn free_reduce_is_idempotent(w in word_strategy()) {
            let once = w.free_reduce();
            prop_assert_eq!(once.free_reduce(), once.clone());
            prop_assert_eq!(once.exponent_sums(3), w.exponent_sums(3));
            prop_assert!(once.letters().windows(2).all(|p| p[0] != -p[1]));
        }

        #[test]
        fn appending_conjugate_relator_keeps_h1(conj in word_strategy(), pick in 0usize..2) {
            let rels = vec![
                Word::from_letters("aaabABBAb").unwrap(),
                Word::from_letters("abcABC").unwrap(),
            ];
            let base = spec_with(3, rels.clone(), 1);
            let mut more = rels.clone();
            more.push(conj.conjugate_by(&rels[pick]));
            let mutated = spec_with(3, more, 1);
            prop_assert_eq!(h1_z2(&base).unwrap().h1_dim, h1_z2(&mutated).unwrap().h1_dim);
        }
    }
}
