//! Graded quotients `Q[y_1..y_k] / I` truncated at a top degree, computed
//! degree by degree with exact row reduction.
//!
//! For each degree `d <= top` the ideal piece `I_d` is spanned by `g * m`
//! over generators `g` and monomials `m` of degree `d - deg g`. Columns are
//! ordered by descending graded-lex, so pivots land on the largest
//! monomials and normal forms are expressed in the smallest ones.

use std::collections::HashMap;

use num_traits::Zero;

use super::linalg::{rref, Rref};
use super::poly::{Monomial, Polynomial};
use super::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GradedError {
    #[error("ideal generator {index} is not homogeneous")]
    InhomogeneousGenerator { index: usize },
    #[error("generator {index} has {found} variables, expected {expected}")]
    VariableMismatch {
        index: usize,
        found: usize,
        expected: usize,
    },
    #[error("element of degree {degree} exceeds the truncation degree {top}")]
    DegreeAboveTop { degree: u32, top: u32 },
}

#[derive(Clone, Debug)]
pub struct GradedPiece {
    degree: u32,
    monomials: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
    ideal: Rref,
}

impl GradedPiece {
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn ideal_rank(&self) -> usize {
        self.ideal.rank()
    }

    pub fn quotient_dim(&self) -> usize {
        self.monomials.len() - self.ideal.rank()
    }

    /// Monomials that survive in the quotient (non-pivot columns).
    pub fn standard_monomials(&self) -> Vec<Monomial> {
        self.ideal
            .free_columns()
            .into_iter()
            .map(|j| self.monomials[j].clone())
            .collect()
    }

    fn to_vector(&self, p: &Polynomial) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.monomials.len()];
        for (m, c) in p.terms() {
            v[self.index[m]] = c.clone();
        }
        v
    }

    fn to_polynomial(&self, nvars: usize, v: Vec<Rational>) -> Polynomial {
        Polynomial::from_terms(
            nvars,
            v.into_iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(j, c)| (self.monomials[j].clone(), c)),
        )
    }
}

#[derive(Clone, Debug)]
pub struct GradedQuotient {
    nvars: usize,
    top: u32,
    pieces: Vec<GradedPiece>,
}

impl GradedQuotient {
    /// Builds every graded piece up to and including `top`. Zero generators
    /// are ignored; generators above `top` contribute nothing.
    pub fn new(nvars: usize, generators: &[Polynomial], top: u32) -> Result<Self, GradedError> {
        let mut gens: Vec<(u32, &Polynomial)> = Vec::new();
        for (index, g) in generators.iter().enumerate() {
            if g.nvars() != nvars {
                return Err(GradedError::VariableMismatch {
                    index,
                    found: g.nvars(),
                    expected: nvars,
                });
            }
            if g.is_zero() {
                continue;
            }
            let d = g
                .homogeneous_degree()
                .ok_or(GradedError::InhomogeneousGenerator { index })?;
            gens.push((d, g));
        }

        let pieces = (0..=top)
            .map(|d| {
                let monomials = Monomial::all_of_degree(nvars, d);
                let index: HashMap<Monomial, usize> = monomials
                    .iter()
                    .enumerate()
                    .map(|(i, m)| (m.clone(), i))
                    .collect();
                let mut rows = Vec::new();
                for &(gd, g) in &gens {
                    if gd > d {
                        continue;
                    }
                    for m in Monomial::all_of_degree(nvars, d - gd) {
                        let mut row = vec![Rational::zero(); monomials.len()];
                        for (t, c) in g.terms() {
                            row[index[&t.mul(&m)]] = c.clone();
                        }
                        rows.push(row);
                    }
                }
                let ideal = rref(rows, monomials.len());
                GradedPiece {
                    degree: d,
                    monomials,
                    index,
                    ideal,
                }
            })
            .collect();
        Ok(GradedQuotient { nvars, top, pieces })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn top(&self) -> u32 {
        self.top
    }

    pub fn piece(&self, d: u32) -> Option<&GradedPiece> {
        self.pieces.get(d as usize)
    }

    /// Dimensions of the quotient in degrees `0..=top`.
    pub fn dims(&self) -> Vec<usize> {
        self.pieces.iter().map(GradedPiece::quotient_dim).collect()
    }

    /// Unique representative of `p` modulo the ideal, supported on standard
    /// monomials. Each homogeneous component is reduced separately.
    pub fn normal_form(&self, p: &Polynomial) -> Result<Polynomial, GradedError> {
        assert_eq!(p.nvars(), self.nvars, "variable count");
        let mut by_degree: HashMap<u32, Polynomial> = HashMap::new();
        for (m, c) in p.terms() {
            let d = m.degree();
            if d > self.top {
                return Err(GradedError::DegreeAboveTop {
                    degree: d,
                    top: self.top,
                });
            }
            by_degree
                .entry(d)
                .or_insert_with(|| Polynomial::zero(self.nvars))
                .add_term(m.clone(), c.clone());
        }
        let mut degrees: Vec<u32> = by_degree.keys().copied().collect();
        degrees.sort_unstable();
        let mut out = Polynomial::zero(self.nvars);
        for d in degrees {
            let piece = &self.pieces[d as usize];
            let mut v = piece.to_vector(&by_degree[&d]);
            piece.ideal.reduce(&mut v);
            out = &out + &piece.to_polynomial(self.nvars, v);
        }
        Ok(out)
    }

    pub fn contains(&self, p: &Polynomial) -> Result<bool, GradedError> {
        Ok(self.normal_form(p)?.is_zero())
    }
}
