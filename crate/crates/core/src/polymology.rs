//! The polymology ring `Sym* W / SR(V, E)` of a toric-deformed cotangent
//! bundle and its top-degree evaluation.
//!
//! A deformation is stored per pair of rays `(ρ, ρ')` as a vector
//! `w(ρ, ρ') ∈ W = Q^r`; the component of `E` on `O(-D_ρ)` is the
//! `W`-valued linear Cox form `sum_ρ' x_ρ' ⊗ w(ρ, ρ')`. For the undeformed
//! Euler sequence `w(ρ, ρ) = deg(D_ρ)` and all other entries vanish.
//!
//! Supported deformations are *block-complete*: `E` only mixes rays of the
//! same class, and for every primitive collection `K` and class `c` the
//! rows `K_c` only reach columns inside `K_c` within the class block. The
//! ideal generator attached to `K` is then the product over classes of the
//! determinants of the `|K_c| x |K_c|` matrices of linear forms
//! `w(ρ, ρ') · ψ`.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use num_traits::{One, Zero};

use crate::exact::rational::format_rational;
use crate::exact::{GradedQuotient, Monomial, Polynomial, Rational};
use crate::toric::{DivisorClass, ToricVariety};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolymologyError {
    #[error("ray index {index} out of range ({nrays} rays)")]
    RayOutOfRange { index: usize, nrays: usize },
    #[error("vector has {found} coordinates, expected r = {expected}")]
    VectorLength { expected: usize, found: usize },
    #[error("coefficient ({row}, {col}) given twice")]
    DuplicateEntry { row: usize, col: usize },
    #[error(
        "class-compatibility violation: w({row}, {col}) is nonzero but deg D_{row} != deg D_{col}"
    )]
    ClassIncompatible { row: usize, col: usize },
    #[error("deformation is not block-complete: w({row}, {col}) mixes primitive collection {collection:?} with the rest of its class block")]
    NotBlockComplete {
        collection: Vec<usize>,
        row: usize,
        col: usize,
    },
    #[error("expected {expected} classes, got {found}")]
    WrongArity { expected: usize, found: usize },
    #[error("element has degree {found}, expected {expected}")]
    DegreeMismatch { expected: u32, found: u32 },
    #[error("top-degree quotient has dimension {dim}, expected 1 (degenerate deformation)")]
    TopDimension { dim: usize },
    #[error("reference element lies in the ideal (degenerate deformation)")]
    DegenerateReference,
}

/// Element of `W ≅ H^1(E*_V)`, in the class-group basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WVector(pub Vec<Rational>);

impl WVector {
    pub fn zero(r: usize) -> Self {
        WVector(vec![Rational::zero(); r])
    }

    pub fn from_ints(v: &[i64]) -> Self {
        WVector(
            v.iter()
                .map(|&x| Rational::from_integer(x.into()))
                .collect(),
        )
    }

    pub fn from_class(c: &DivisorClass) -> Self {
        WVector(c.to_rationals())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn add(&self, other: &WVector) -> WVector {
        WVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, c: &Rational) -> WVector {
        WVector(self.0.iter().map(|a| a * c).collect())
    }

    /// `sum_a w_a ψ_a` as a polynomial in `r` variables.
    pub fn linear_form(&self) -> Polynomial {
        Polynomial::linear(&self.0)
    }
}

impl fmt::Display for WVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.iter().map(format_rational).join(","))
    }
}

/// Homogeneous element of `Sym^d W`, a polynomial in `ψ_1..ψ_r`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymElement {
    poly: Polynomial,
    degree: u32,
}

impl SymElement {
    pub fn one(r: usize) -> Self {
        SymElement {
            poly: Polynomial::one(r),
            degree: 0,
        }
    }

    pub fn zero(r: usize, degree: u32) -> Self {
        SymElement {
            poly: Polynomial::zero(r),
            degree,
        }
    }

    pub fn linear(w: &WVector) -> Self {
        SymElement {
            poly: w.linear_form(),
            degree: 1,
        }
    }

    /// `w_1 · w_2 ⋯ w_k` in `Sym^k W`.
    pub fn product(r: usize, ws: &[WVector]) -> Self {
        ws.iter()
            .fold(SymElement::one(r), |acc, w| acc.mul(&SymElement::linear(w)))
    }

    /// Wraps `p`, which must be zero or homogeneous of degree `degree`.
    pub fn from_polynomial(poly: Polynomial, degree: u32) -> Result<Self, PolymologyError> {
        match poly.homogeneous_degree() {
            Some(d) if d != degree => Err(PolymologyError::DegreeMismatch {
                expected: degree,
                found: d,
            }),
            None if !poly.is_zero() => Err(PolymologyError::DegreeMismatch {
                expected: degree,
                found: poly.terms().map(|(m, _)| m.degree()).max().unwrap_or(0),
            }),
            _ => Ok(SymElement { poly, degree }),
        }
    }

    pub fn mul(&self, other: &SymElement) -> SymElement {
        SymElement {
            poly: &self.poly * &other.poly,
            degree: self.degree + other.degree,
        }
    }

    pub fn add(&self, other: &SymElement) -> SymElement {
        assert_eq!(
            self.degree, other.degree,
            "adding elements of different degree"
        );
        SymElement {
            poly: &self.poly + &other.poly,
            degree: self.degree,
        }
    }

    pub fn scale(&self, c: &Rational) -> SymElement {
        SymElement {
            poly: self.poly.scale(c),
            degree: self.degree,
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> SymElement {
        SymElement {
            poly: self.poly.mul_monomial(m, &Rational::one()),
            degree: self.degree + m.degree(),
        }
    }

    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn rank(&self) -> usize {
        self.poly.nvars()
    }
}

impl fmt::Display for SymElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.poly.display_with(&psi_names(self.poly.nvars())))
    }
}

/// Names `psi1..psir` used when printing elements of `Sym W`.
pub fn psi_names(r: usize) -> Vec<String> {
    (1..=r).map(|a| format!("psi{a}")).collect()
}

/// The map `E: ⊕ O(-D_ρ) → O ⊗ W`, stored by its nonzero coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeformedEuler {
    rank: usize,
    nrays: usize,
    coefficients: BTreeMap<(usize, usize), WVector>,
}

impl DeformedEuler {
    /// The toric Euler sequence: `w(ρ, ρ) = deg(D_ρ)`.
    pub fn undeformed(v: &ToricVariety) -> Self {
        let coefficients = (0..v.nrays())
            .map(|rho| ((rho, rho), WVector::from_class(&v.degree(rho))))
            .filter(|(_, w)| !w.is_zero())
            .collect();
        DeformedEuler {
            rank: v.rank(),
            nrays: v.nrays(),
            coefficients,
        }
    }

    /// Builds `E` from `((row ray, column ray), w)` entries; missing entries
    /// are zero. Rejects entries that connect rays of different classes.
    pub fn from_coefficients<I>(v: &ToricVariety, entries: I) -> Result<Self, PolymologyError>
    where
        I: IntoIterator<Item = ((usize, usize), WVector)>,
    {
        let nrays = v.nrays();
        let mut coefficients = BTreeMap::new();
        for ((row, col), w) in entries {
            for index in [row, col] {
                if index >= nrays {
                    return Err(PolymologyError::RayOutOfRange { index, nrays });
                }
            }
            if w.len() != v.rank() {
                return Err(PolymologyError::VectorLength {
                    expected: v.rank(),
                    found: w.len(),
                });
            }
            if coefficients.contains_key(&(row, col)) {
                return Err(PolymologyError::DuplicateEntry { row, col });
            }
            if w.is_zero() {
                continue;
            }
            if v.degree(row) != v.degree(col) {
                return Err(PolymologyError::ClassIncompatible { row, col });
            }
            coefficients.insert((row, col), w);
        }
        Ok(DeformedEuler {
            rank: v.rank(),
            nrays,
            coefficients,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn nrays(&self) -> usize {
        self.nrays
    }

    pub fn coefficient(&self, row: usize, col: usize) -> WVector {
        self.coefficients
            .get(&(row, col))
            .cloned()
            .unwrap_or_else(|| WVector::zero(self.rank))
    }

    /// Nonzero coefficients in `(row, col)` order.
    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &WVector)> {
        self.coefficients.iter()
    }

    pub fn is_undeformed(&self, v: &ToricVariety) -> bool {
        *self == DeformedEuler::undeformed(v)
    }

    /// Component `E_ρ` paired with each `ψ_a`: the Cox linear forms
    /// `sum_ρ' w(ρ, ρ')_a x_ρ'` for `a = 1..r`.
    pub fn section(&self, rho: usize) -> Vec<Polynomial> {
        (0..self.rank)
            .map(|a| {
                let coeffs: Vec<Rational> = (0..self.nrays)
                    .map(|col| {
                        self.coefficients
                            .get(&(rho, col))
                            .map_or_else(Rational::zero, |w| w.0[a].clone())
                    })
                    .collect();
                Polynomial::linear(&coeffs)
            })
            .collect()
    }

    /// Re-checks class compatibility against `v`.
    pub fn check_class_compatibility(&self, v: &ToricVariety) -> Result<(), PolymologyError> {
        for &(row, col) in self.coefficients.keys() {
            if v.degree(row) != v.degree(col) {
                return Err(PolymologyError::ClassIncompatible { row, col });
            }
        }
        Ok(())
    }

    /// Fails with the first coefficient that breaks block-completeness.
    pub fn check_block_complete(&self, v: &ToricVariety) -> Result<(), PolymologyError> {
        for k in v.primitive_collections() {
            for &row in k {
                let class = v.degree(row);
                for col in 0..self.nrays {
                    if k.contains(&col) || v.degree(col) != class {
                        continue;
                    }
                    if self.coefficients.contains_key(&(row, col)) {
                        return Err(PolymologyError::NotBlockComplete {
                            collection: k.clone(),
                            row,
                            col,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn undeformed_euler(v: &ToricVariety) -> DeformedEuler {
    DeformedEuler::undeformed(v)
}

/// Determinant of a square matrix of polynomials by cofactor expansion
/// along the first row.
pub fn polynomial_determinant(m: &[Vec<Polynomial>], nvars: usize) -> Polynomial {
    let n = m.len();
    if n == 0 {
        return Polynomial::one(nvars);
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut det = Polynomial::zero(nvars);
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Polynomial>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(c, _)| c != j)
                    .map(|(_, p)| p.clone())
                    .collect()
            })
            .collect();
        let term = &m[0][j] * &polynomial_determinant(&minor, nvars);
        det = if j % 2 == 0 {
            &det + &term
        } else {
            &det - &term
        };
    }
    det
}

/// One generator of `SR(V, E)` with the primitive collection it comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SrGenerator {
    pub collection: Vec<usize>,
    pub element: SymElement,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SrIdeal {
    pub generators: Vec<SrGenerator>,
}

impl SrIdeal {
    pub fn polynomials(&self) -> Vec<Polynomial> {
        self.generators
            .iter()
            .map(|g| g.element.poly.clone())
            .collect()
    }
}

/// The generator for each primitive collection: product over the classes
/// `c` met by `K` of `det [w(ρ, ρ') · ψ]_{ρ, ρ' ∈ K_c}`.
pub fn sr_ideal(v: &ToricVariety, e: &DeformedEuler) -> Result<SrIdeal, PolymologyError> {
    e.check_class_compatibility(v)?;
    e.check_block_complete(v)?;
    let r = v.rank();
    let generators = v
        .primitive_collections()
        .iter()
        .map(|k| {
            let mut blocks: BTreeMap<DivisorClass, Vec<usize>> = BTreeMap::new();
            for &rho in k {
                blocks.entry(v.degree(rho)).or_default().push(rho);
            }
            let poly = blocks.values().fold(Polynomial::one(r), |acc, block| {
                let matrix: Vec<Vec<Polynomial>> = block
                    .iter()
                    .map(|&row| {
                        block
                            .iter()
                            .map(|&col| e.coefficient(row, col).linear_form())
                            .collect()
                    })
                    .collect();
                &acc * &polynomial_determinant(&matrix, r)
            });
            SrGenerator {
                collection: k.clone(),
                element: SymElement {
                    poly,
                    degree: k.len() as u32,
                },
            }
        })
        .collect();
    Ok(SrIdeal { generators })
}

/// Flags produced by [`validate_deformation`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeformationReport {
    pub undeformed: bool,
    pub block_complete: bool,
    pub nondegenerate: bool,
    pub dimension_valid: bool,
    pub quotient_dims: Vec<usize>,
    pub betti_numbers: Vec<usize>,
    pub failures: Vec<String>,
}

impl DeformationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Class-compatibility and block-completeness violations are hard errors;
/// degeneracy and wrong graded dimensions are reported as failed flags.
pub fn validate_deformation(
    v: &ToricVariety,
    e: &DeformedEuler,
) -> Result<DeformationReport, PolymologyError> {
    Ok(Polymology::new(v.clone(), e.clone())?.report().clone())
}

/// The polymology ring of `(V, E)` with its graded normal forms, computed
/// once at construction up to degree `n`.
#[derive(Clone, Debug)]
pub struct Polymology {
    variety: ToricVariety,
    euler: DeformedEuler,
    ideal: SrIdeal,
    quotient: GradedQuotient,
    report: DeformationReport,
    reference: SymElement,
    top: Result<(Monomial, Rational), PolymologyError>,
}

impl Polymology {
    pub fn new(variety: ToricVariety, euler: DeformedEuler) -> Result<Self, PolymologyError> {
        let ideal = sr_ideal(&variety, &euler)?;
        let r = variety.rank();
        let n = variety.dim() as u32;
        let quotient =
            GradedQuotient::new(r, &ideal.polynomials(), n).expect("generators are homogeneous");

        let quotient_dims = quotient.dims();
        let betti_numbers = variety.betti_numbers();
        let nondegenerate = ideal.generators.iter().all(|g| !g.element.is_zero());
        let dimension_valid = quotient_dims == betti_numbers;
        let mut failures = Vec::new();
        if !nondegenerate {
            failures.push("degenerate deformation".to_string());
        }
        if !dimension_valid {
            failures.push("quotient dimensions differ from Betti numbers".to_string());
        }
        let report = DeformationReport {
            undeformed: euler.is_undeformed(&variety),
            block_complete: true,
            nondegenerate,
            dimension_valid,
            quotient_dims,
            betti_numbers,
            failures,
        };

        let reference = SymElement::product(
            r,
            &variety
                .reference_cone()
                .iter()
                .map(|&rho| WVector::from_class(&variety.degree(rho)))
                .collect::<Vec<_>>(),
        );
        let top_piece = quotient.piece(n).expect("top piece");
        let top = if top_piece.quotient_dim() != 1 {
            Err(PolymologyError::TopDimension {
                dim: top_piece.quotient_dim(),
            })
        } else {
            let b = top_piece.standard_monomials().remove(0);
            let nf = quotient.normal_form(&reference.poly).expect("degree n");
            let c = nf.coeff(&b);
            if c.is_zero() {
                Err(PolymologyError::DegenerateReference)
            } else {
                Ok((b, c))
            }
        };

        Ok(Polymology {
            variety,
            euler,
            ideal,
            quotient,
            report,
            reference,
            top,
        })
    }

    pub fn undeformed(variety: ToricVariety) -> Self {
        let e = DeformedEuler::undeformed(&variety);
        Polymology::new(variety, e).expect("undeformed Euler data is block-complete")
    }

    pub fn variety(&self) -> &ToricVariety {
        &self.variety
    }

    pub fn euler(&self) -> &DeformedEuler {
        &self.euler
    }

    pub fn ideal(&self) -> &SrIdeal {
        &self.ideal
    }

    pub fn report(&self) -> &DeformationReport {
        &self.report
    }

    pub fn rank(&self) -> usize {
        self.variety.rank()
    }

    pub fn dim(&self) -> usize {
        self.variety.dim()
    }

    /// `Π_{ρ ∈ σ0} deg(D_ρ)` for the reference maximal cone `σ0`.
    pub fn reference_element(&self) -> &SymElement {
        &self.reference
    }

    /// Graded dimensions `d_0..d_n` of `Sym W / SR(V, E)`.
    pub fn quotient_dims(&self) -> Vec<usize> {
        self.report.quotient_dims.clone()
    }

    pub fn normal_form(&self, s: &SymElement) -> SymElement {
        let poly = self
            .quotient
            .normal_form(&s.poly)
            .expect("degree within the truncation");
        SymElement {
            poly,
            degree: s.degree,
        }
    }

    /// Coefficient of `s` on the one-dimensional top piece, normalized so
    /// the reference element evaluates to 1.
    pub fn eval_top(&self, s: &SymElement) -> Result<Rational, PolymologyError> {
        let n = self.dim() as u32;
        if s.degree != n {
            return Err(PolymologyError::DegreeMismatch {
                expected: n,
                found: s.degree,
            });
        }
        let (b, ref_coeff) = self.top.as_ref().map_err(Clone::clone)?;
        let nf = self.normal_form(s);
        Ok(nf.poly.coeff(b) / ref_coeff)
    }

    /// `⟨σ_1, ..., σ_n⟩_V`.
    pub fn product_v(&self, sigmas: &[WVector]) -> Result<Rational, PolymologyError> {
        if sigmas.len() != self.dim() {
            return Err(PolymologyError::WrongArity {
                expected: self.dim(),
                found: sigmas.len(),
            });
        }
        self.check_vectors(sigmas)?;
        self.eval_top(&SymElement::product(self.rank(), sigmas))
    }

    pub(crate) fn check_vectors(&self, ws: &[WVector]) -> Result<(), PolymologyError> {
        for w in ws {
            if w.len() != self.rank() {
                return Err(PolymologyError::VectorLength {
                    expected: self.rank(),
                    found: w.len(),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{int, ratio};
    use crate::toric::Fan;

    fn variety(fan: Fan) -> ToricVariety {
        ToricVariety::new(fan).unwrap()
    }

    fn p1xp1() -> ToricVariety {
        variety(Fan::projective_space(1).product(&Fan::projective_space(1)))
    }

    fn psi(r: usize, exps: &[u32]) -> Polynomial {
        Polynomial::monomial(Monomial::new(exps.to_vec()), Rational::one())
            .mul_monomial(&Monomial::one(r), &Rational::one())
    }

    #[test]
    fn undeformed_diagonals() {
        let e = DeformedEuler::undeformed(&variety(Fan::projective_space(2)));
        assert_eq!(e.entries().count(), 3);
        assert_eq!(e.coefficient(1, 1), WVector::from_ints(&[1]));
        assert!(e.coefficient(0, 1).is_zero());

        let e = DeformedEuler::undeformed(&variety(Fan::hirzebruch(1)));
        let diag: Vec<WVector> = (0..4).map(|i| e.coefficient(i, i)).collect();
        assert_eq!(
            diag,
            vec![
                WVector::from_ints(&[1, 0]),
                WVector::from_ints(&[0, 1]),
                WVector::from_ints(&[1, 0]),
                WVector::from_ints(&[1, 1]),
            ]
        );
    }

    #[test]
    fn undeformed_generators() {
        let pm = Polymology::undeformed(variety(Fan::projective_space(2)));
        assert_eq!(pm.ideal().polynomials(), vec![psi(1, &[3])]);
        assert_eq!(pm.quotient_dims(), vec![1, 1, 1]);

        let pm = Polymology::undeformed(p1xp1());
        assert_eq!(
            pm.ideal().polynomials(),
            vec![psi(2, &[2, 0]), psi(2, &[0, 2])]
        );
        assert_eq!(pm.quotient_dims(), vec![1, 2, 1]);

        let pm = Polymology::undeformed(variety(Fan::hirzebruch(1)));
        assert_eq!(pm.quotient_dims(), vec![1, 2, 1]);
        assert!(pm.report().passed());
    }

    #[test]
    fn eval_top_examples() {
        let pm = Polymology::undeformed(variety(Fan::projective_space(2)));
        assert_eq!(
            pm.eval_top(&SymElement::from_polynomial(psi(1, &[2]), 2).unwrap())
                .unwrap(),
            int(1)
        );

        let pm = Polymology::undeformed(p1xp1());
        let e = |x| SymElement::from_polynomial(x, 2).unwrap();
        assert_eq!(pm.eval_top(&e(psi(2, &[1, 1]))).unwrap(), int(1));
        assert_eq!(pm.eval_top(&e(psi(2, &[2, 0]))).unwrap(), int(0));
        let h = WVector::from_ints(&[1, 1]);
        assert_eq!(pm.product_v(&[h.clone(), h]).unwrap(), int(2));

        let v = variety(Fan::hirzebruch(1));
        let d2 = WVector::from_class(&v.degree(1));
        let pm = Polymology::undeformed(v);
        assert_eq!(pm.product_v(&[d2.clone(), d2]).unwrap(), int(-1));
    }

    #[test]
    fn projective_four_point_class() {
        let pm = Polymology::undeformed(variety(Fan::projective_space(4)));
        let h = WVector::from_ints(&[1]);
        assert_eq!(pm.product_v(&vec![h.clone(); 4]).unwrap(), int(1));
        let mut sig = vec![h; 4];
        sig[2] = WVector::zero(1);
        assert_eq!(pm.product_v(&sig).unwrap(), int(0));
    }

    #[test]
    fn wrong_degree_and_arity() {
        let pm = Polymology::undeformed(variety(Fan::projective_space(2)));
        assert!(matches!(
            pm.eval_top(&SymElement::one(1)),
            Err(PolymologyError::DegreeMismatch {
                expected: 2,
                found: 0
            })
        ));
        assert!(matches!(
            pm.product_v(&[WVector::from_ints(&[1])]),
            Err(PolymologyError::WrongArity { .. })
        ));
    }

    /// Ruling blocks `A` (coefficient of x_1) and `B` (coefficient of x_2)
    /// on the first factor of P^1 x P^1.
    fn ruling_deformation(v: &ToricVariety, a: [[i64; 2]; 2], b: [[i64; 2]; 2]) -> DeformedEuler {
        let mut entries = Vec::new();
        for rho in 0..2 {
            entries.push(((rho, 0), WVector::from_ints(&a[rho])));
            entries.push(((rho, 1), WVector::from_ints(&b[rho])));
        }
        entries.push(((2, 2), WVector::from_ints(&[0, 1])));
        entries.push(((3, 3), WVector::from_ints(&[0, 1])));
        DeformedEuler::from_coefficients(v, entries).unwrap()
    }

    #[test]
    fn deformed_ruling_generator_matches_cofactor_expansion() {
        let v = p1xp1();
        let a = [[1, 2], [0, 1]];
        let b = [[3, -1], [1, 1]];
        let e = ruling_deformation(&v, a, b);
        let ideal = sr_ideal(&v, &e).unwrap();
        // direct 2x2 cofactor expansion: m00*m11 - m01*m10
        let lf = |w: [i64; 2]| WVector::from_ints(&w).linear_form();
        let expect = &(&lf(a[0]) * &lf(b[1])) - &(&lf(b[0]) * &lf(a[1]));
        assert_eq!(ideal.generators[0].element.poly(), &expect);
        assert_eq!(ideal.generators[0].element.degree(), 2);
        assert_eq!(ideal.generators[1].element.poly(), &psi(2, &[0, 2]));

        let report = validate_deformation(&v, &e).unwrap();
        assert!(report.nondegenerate);
        assert_eq!(report.quotient_dims, vec![1, 2, 1]);
    }

    #[test]
    fn zero_block_is_degenerate() {
        let v = p1xp1();
        let e = ruling_deformation(&v, [[0, 0], [0, 0]], [[0, 0], [0, 0]]);
        let report = validate_deformation(&v, &e).unwrap();
        assert!(!report.nondegenerate);
        assert!(!report.passed());
        let pm = Polymology::new(v, e).unwrap();
        assert!(matches!(
            pm.eval_top(&SymElement::from_polynomial(psi(2, &[1, 1]), 2).unwrap()),
            Err(PolymologyError::TopDimension { dim: 2 })
        ));
    }

    #[test]
    fn class_incompatible_entries_rejected() {
        let v = p1xp1();
        let err = DeformedEuler::from_coefficients(&v, [((0, 2), WVector::from_ints(&[1, 0]))]);
        assert_eq!(
            err,
            Err(PolymologyError::ClassIncompatible { row: 0, col: 2 })
        );
        let err = DeformedEuler::from_coefficients(&v, [((0, 0), WVector::from_ints(&[1]))]);
        assert!(matches!(err, Err(PolymologyError::VectorLength { .. })));
    }

    #[test]
    fn dense_class_blocks_are_block_complete() {
        // every same-class pair gets a generic coefficient
        for fan in [
            Fan::projective_space(3),
            Fan::hirzebruch(2),
            Fan::projective_space(2).product(&Fan::projective_space(1)),
        ] {
            let v = variety(fan);
            let mut entries = Vec::new();
            for row in 0..v.nrays() {
                for col in 0..v.nrays() {
                    if v.degree(row) == v.degree(col) {
                        let w = WVector(
                            (0..v.rank())
                                .map(|a| ratio((row * 7 + col * 3 + a) as i64 % 5 + 1, 2))
                                .collect(),
                        );
                        entries.push(((row, col), w));
                    }
                }
            }
            let e = DeformedEuler::from_coefficients(&v, entries).unwrap();
            assert!(e.check_block_complete(&v).is_ok());
            assert!(sr_ideal(&v, &e).is_ok());
        }
    }
}
