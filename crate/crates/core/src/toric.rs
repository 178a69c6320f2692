//! Fans of smooth projective toric varieties.
//!
//! A [`Fan`] is validated into a [`ToricVariety`], which carries the class
//! group data (rank `r = #rays - n` and the degree map of every toric
//! divisor), the primitive collections, and a [`ChowRing`] used as the
//! classical intersection-number oracle.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::exact::{rref, solve_linear, GradedQuotient, IntMatrix, Monomial, Polynomial, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ToricError {
    #[error("malformed fan: {0}")]
    Malformed(String),
    #[error("ray {index} has length {found}, expected dimension {expected}")]
    DimensionMismatch {
        index: usize,
        found: usize,
        expected: usize,
    },
    #[error("ray {index} is not primitive")]
    NonPrimitiveRay { index: usize },
    #[error("fan is not smooth: {0}")]
    NotSmooth(String),
    #[error("fan fails the wall condition")]
    WallCondition,
    #[error("class group has torsion (invariant factors {0:?})")]
    Torsion(Vec<String>),
    #[error("rays do not span the lattice; the fan cannot be complete")]
    RankDeficient,
    #[error("expected {expected} classes, got {found}")]
    WrongArity { expected: usize, found: usize },
    #[error("divisor class has {found} coordinates, expected {expected}")]
    ClassLength { expected: usize, found: usize },
    #[error("polynomial has {found} variables, expected {expected}")]
    VariableCount { expected: usize, found: usize },
}

/// Rays and maximal cones of a fan in `Z^dim`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fan {
    dim: usize,
    rays: Vec<Vec<i64>>,
    max_cones: Vec<Vec<usize>>,
}

impl Fan {
    /// Checks the structure only: ray lengths, primitivity, distinctness and
    /// cone indices. Each cone is stored sorted; cone order is preserved.
    pub fn new(
        dim: usize,
        rays: Vec<Vec<i64>>,
        max_cones: Vec<Vec<usize>>,
    ) -> Result<Fan, ToricError> {
        if dim == 0 {
            return Err(ToricError::Malformed("dimension must be positive".into()));
        }
        for (index, ray) in rays.iter().enumerate() {
            if ray.len() != dim {
                return Err(ToricError::DimensionMismatch {
                    index,
                    found: ray.len(),
                    expected: dim,
                });
            }
            let g = ray.iter().fold(0i64, |g, &x| g.gcd(&x));
            if g != 1 {
                return Err(ToricError::NonPrimitiveRay { index });
            }
        }
        if let Some((i, j)) = (0..rays.len())
            .tuple_combinations()
            .find(|&(i, j)| rays[i] == rays[j])
        {
            return Err(ToricError::Malformed(format!("rays {i} and {j} coincide")));
        }
        if max_cones.is_empty() {
            return Err(ToricError::Malformed("no maximal cones".into()));
        }
        let mut cones = Vec::with_capacity(max_cones.len());
        for (c, cone) in max_cones.into_iter().enumerate() {
            let mut cone = cone;
            cone.sort_unstable();
            if cone.windows(2).any(|w| w[0] == w[1]) {
                return Err(ToricError::Malformed(format!("cone {c} repeats a ray")));
            }
            if let Some(&bad) = cone.iter().find(|&&r| r >= rays.len()) {
                return Err(ToricError::Malformed(format!(
                    "cone {c} refers to ray {bad}, but there are {} rays",
                    rays.len()
                )));
            }
            cones.push(cone);
        }
        Ok(Fan {
            dim,
            rays,
            max_cones: cones,
        })
    }

    /// Fan of `P^n`: rays `e_1..e_n, -(e_1+...+e_n)`, cones all `n`-subsets.
    pub fn projective_space(n: usize) -> Fan {
        let mut rays: Vec<Vec<i64>> = (0..n)
            .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
            .collect();
        rays.push(vec![-1; n]);
        let cones = (0..=n).combinations(n).collect();
        Fan::new(n, rays, cones).expect("projective space fan")
    }

    /// Hirzebruch surface `F_a` with rays `(1,0), (0,1), (-1,a), (0,-1)`.
    pub fn hirzebruch(a: i64) -> Fan {
        Fan::new(
            2,
            vec![vec![1, 0], vec![0, 1], vec![-1, a], vec![0, -1]],
            vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]],
        )
        .expect("Hirzebruch fan")
    }

    /// Product fan: rays of `self` (padded), then rays of `other`.
    pub fn product(&self, other: &Fan) -> Fan {
        let dim = self.dim + other.dim;
        let mut rays = Vec::new();
        for r in &self.rays {
            let mut v = r.clone();
            v.resize(dim, 0);
            rays.push(v);
        }
        for r in &other.rays {
            let mut v = vec![0; self.dim];
            v.extend_from_slice(r);
            rays.push(v);
        }
        let offset = self.rays.len();
        let cones = self
            .max_cones
            .iter()
            .cartesian_product(&other.max_cones)
            .map(|(a, b)| {
                a.iter()
                    .copied()
                    .chain(b.iter().map(|&i| i + offset))
                    .collect()
            })
            .collect();
        Fan::new(dim, rays, cones).expect("product fan")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rays(&self) -> &[Vec<i64>] {
        &self.rays
    }

    pub fn max_cones(&self) -> &[Vec<usize>] {
        &self.max_cones
    }

    pub fn nrays(&self) -> usize {
        self.rays.len()
    }

    /// The `#rays x dim` matrix whose rows are the ray generators.
    pub fn ray_matrix(&self) -> IntMatrix {
        IntMatrix::from_rows(&self.rays)
    }

    fn cone_matrix(&self, cone: &[usize]) -> IntMatrix {
        let rows: Vec<Vec<i64>> = cone.iter().map(|&i| self.rays[i].clone()).collect();
        IntMatrix::from_rows(&rows)
    }

    /// All faces (ray subsets of maximal cones), including the empty face.
    pub fn faces(&self) -> BTreeSet<Vec<usize>> {
        let mut out = BTreeSet::new();
        for cone in &self.max_cones {
            for k in 0..=cone.len() {
                for sub in cone.iter().copied().combinations(k) {
                    out.insert(sub);
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Completeness {
    Verified,
    Unverified,
}

/// Outcome of [`validate_fan`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FanReport {
    pub simplicial: bool,
    pub smooth: bool,
    pub wall_condition: bool,
    pub ray_coverage: bool,
    pub completeness: Completeness,
    /// Human-readable reasons for every failed flag, in a fixed order.
    pub failures: Vec<String>,
}

impl FanReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks smoothness, the wall condition and ray coverage.
///
/// Completeness is reported as verified when the wall condition and ray
/// coverage hold, every ray lies in at least `n` maximal cones, and the
/// maximal cones are connected through shared walls.
pub fn validate_fan(fan: &Fan) -> FanReport {
    let n = fan.dim;
    let mut failures = Vec::new();

    let mut simplicial = true;
    let mut smooth = true;
    for cone in &fan.max_cones {
        if cone.len() != n {
            simplicial = false;
            smooth = false;
            continue;
        }
        let det = fan.cone_matrix(cone).det();
        if det.is_zero() {
            simplicial = false;
        }
        if !det.abs().is_one() {
            smooth = false;
        }
    }

    // walls: (n-1)-subsets of maximal cones, with the cones containing them
    let mut wall_condition = simplicial;
    let mut adjacency = vec![Vec::new(); fan.max_cones.len()];
    if simplicial {
        let mut walls: std::collections::BTreeMap<Vec<usize>, Vec<usize>> = Default::default();
        for (c, cone) in fan.max_cones.iter().enumerate() {
            for wall in cone.iter().copied().combinations(n - 1) {
                walls.entry(wall).or_default().push(c);
            }
        }
        for owners in walls.values() {
            if owners.len() != 2 {
                wall_condition = false;
            } else {
                adjacency[owners[0]].push(owners[1]);
                adjacency[owners[1]].push(owners[0]);
            }
        }
    }

    let mut uses = vec![0usize; fan.rays.len()];
    for cone in &fan.max_cones {
        for &r in cone {
            uses[r] += 1;
        }
    }
    let ray_coverage = uses.iter().all(|&u| u > 0);

    let connected = {
        let mut seen = vec![false; fan.max_cones.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(c) = stack.pop() {
            for &d in &adjacency[c] {
                if !seen[d] {
                    seen[d] = true;
                    stack.push(d);
                }
            }
        }
        seen.iter().all(|&s| s)
    };
    let completeness =
        if wall_condition && ray_coverage && connected && uses.iter().all(|&u| u >= n) {
            Completeness::Verified
        } else {
            Completeness::Unverified
        };

    if !simplicial {
        failures.push("not simplicial".to_string());
    }
    if !smooth {
        failures.push("not smooth".to_string());
    }
    if !wall_condition {
        failures.push("wall condition".to_string());
    }
    if !ray_coverage {
        failures.push("ray coverage".to_string());
    }
    FanReport {
        simplicial,
        smooth,
        wall_condition,
        ray_coverage,
        completeness,
        failures,
    }
}

/// Free class group of the fan: returns `(r, G)` where the columns of the
/// `r x #rays` matrix `G` are the classes of the toric divisors.
///
/// `G` comes from the trailing rows of the left transform of the Smith
/// normal form of the ray matrix, then put in Hermite normal form so the
/// basis is canonical.
pub fn class_group(fan: &Fan) -> Result<(usize, IntMatrix), ToricError> {
    let a = fan.ray_matrix();
    let n = fan.dim;
    let nrays = fan.nrays();
    if nrays < n {
        return Err(ToricError::RankDeficient);
    }
    let (u, d, _v) = a.smith_normal_form();
    let diag = d.diagonal();
    if diag.iter().any(Zero::is_zero) {
        return Err(ToricError::RankDeficient);
    }
    if diag.iter().any(|x| !x.is_one()) {
        return Err(ToricError::Torsion(
            diag.iter()
                .filter(|x| !x.is_one())
                .map(ToString::to_string)
                .collect(),
        ));
    }
    let g = u.row_slice(n, nrays);
    let (_, g) = g.hermite_normal_form();
    debug_assert!((&g * &a).is_zero());
    Ok((nrays - n, g))
}

/// Minimal ray subsets that are not faces, each sorted, listed in
/// lexicographic order. Assumes a simplicial fan, so no minimal non-face
/// has more than `dim + 1` rays.
pub fn primitive_collections(fan: &Fan) -> Vec<Vec<usize>> {
    let faces = fan.faces();
    let mut out = Vec::new();
    for k in 1..=(fan.dim + 1).min(fan.nrays()) {
        for subset in (0..fan.nrays()).combinations(k) {
            if faces.contains(&subset) {
                continue;
            }
            let minimal = (0..k).all(|skip| {
                let sub: Vec<usize> = subset
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &r)| r)
                    .collect();
                faces.contains(&sub)
            });
            if minimal {
                out.push(subset);
            }
        }
    }
    out.sort();
    out
}

/// Element of the class group in the fixed basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DivisorClass(pub Vec<BigInt>);

impl DivisorClass {
    pub fn from_ints(v: &[i64]) -> Self {
        DivisorClass(v.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn zero(r: usize) -> Self {
        DivisorClass(vec![BigInt::zero(); r])
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.0
    }

    pub fn to_rationals(&self) -> Vec<Rational> {
        self.0
            .iter()
            .map(|x| Rational::from_integer(x.clone()))
            .collect()
    }

    pub fn add(&self, other: &DivisorClass) -> DivisorClass {
        DivisorClass(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &DivisorClass) -> DivisorClass {
        DivisorClass(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, k: i64) -> DivisorClass {
        DivisorClass(self.0.iter().map(|a| a * k).collect())
    }
}

impl fmt::Display for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.iter().join(","))
    }
}

/// A validated smooth fan with its class group data.
#[derive(Clone, Debug)]
pub struct ToricVariety {
    fan: Fan,
    report: FanReport,
    rank: usize,
    degree_map: IntMatrix,
    primitive_collections: Vec<Vec<usize>>,
    reference_cone: usize,
    chow: ChowRing,
}

impl ToricVariety {
    /// Validates the fan and computes class group, primitive collections
    /// and the Chow ring. Fails on non-smooth fans and on wall-condition
    /// failures; unverified completeness is recorded, not fatal.
    pub fn new(fan: Fan) -> Result<ToricVariety, ToricError> {
        let report = validate_fan(&fan);
        if !report.simplicial || !report.smooth {
            return Err(ToricError::NotSmooth(report.failures.join(", ")));
        }
        if !report.wall_condition {
            return Err(ToricError::WallCondition);
        }
        let (rank, degree_map) = class_group(&fan)?;
        let primitive_collections = primitive_collections(&fan);
        let reference_cone = 0;
        let chow = ChowRing::new(&fan, &primitive_collections);
        Ok(ToricVariety {
            fan,
            report,
            rank,
            degree_map,
            primitive_collections,
            reference_cone,
            chow,
        })
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn dim(&self) -> usize {
        self.fan.dim
    }

    pub fn nrays(&self) -> usize {
        self.fan.nrays()
    }

    /// Rank `r` of the class group.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn report(&self) -> &FanReport {
        &self.report
    }

    pub fn degree_map(&self) -> &IntMatrix {
        &self.degree_map
    }

    pub fn primitive_collections(&self) -> &[Vec<usize>] {
        &self.primitive_collections
    }

    pub fn reference_cone(&self) -> &[usize] {
        &self.fan.max_cones[self.reference_cone]
    }

    pub fn reference_cone_index(&self) -> usize {
        self.reference_cone
    }

    pub fn chow_ring(&self) -> &ChowRing {
        &self.chow
    }

    /// Class of the toric divisor `D_ρ`.
    pub fn degree(&self, ray: usize) -> DivisorClass {
        DivisorClass(self.degree_map.column(ray))
    }

    pub fn monomial_class(&self, m: &Monomial) -> DivisorClass {
        let mut out = vec![BigInt::zero(); self.rank];
        for (ray, &e) in m.exponents().iter().enumerate() {
            if e > 0 {
                for (a, o) in out.iter_mut().enumerate() {
                    *o += &self.degree_map[(a, ray)] * e;
                }
            }
        }
        DivisorClass(out)
    }

    /// Common class of all terms, or `None` for zero or class-inhomogeneous
    /// polynomials.
    pub fn class_of(&self, p: &Polynomial) -> Option<DivisorClass> {
        if p.nvars() != self.nrays() {
            return None;
        }
        let mut classes = p.terms().map(|(m, _)| self.monomial_class(m));
        let first = classes.next()?;
        classes.all(|c| c == first).then_some(first)
    }

    /// Cox monomials of the given class with total degree at most
    /// `max_degree`, in descending graded-lex order.
    pub fn monomials_of_class(&self, class: &DivisorClass, max_degree: u32) -> Vec<Monomial> {
        let mut out: Vec<Monomial> = (0..=max_degree)
            .flat_map(|d| Monomial::all_of_degree(self.nrays(), d))
            .filter(|m| &self.monomial_class(m) == class)
            .collect();
        out.sort_by(|a, b| b.cmp(a));
        out
    }

    pub fn is_face(&self, rays: &[usize]) -> bool {
        let mut s = rays.to_vec();
        s.sort_unstable();
        self.fan
            .max_cones
            .iter()
            .any(|c| s.iter().all(|r| c.contains(r)))
    }

    /// Number of `k`-ray faces for `k = 0..=n`.
    pub fn face_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.dim() + 1];
        for f in self.fan.faces() {
            counts[f.len()] += 1;
        }
        counts
    }

    /// Even Betti numbers `b_0, b_2, ..., b_2n` from the face counts:
    /// `b_2k = sum_{i>=k} (-1)^(i-k) C(i,k) f_(n-i)`.
    pub fn betti_numbers(&self) -> Vec<usize> {
        let n = self.dim();
        let f = self.face_counts();
        (0..=n)
            .map(|k| {
                let mut s = 0i64;
                for i in k..=n {
                    let term = binomial(i, k) as i64 * f[n - i] as i64;
                    s += if (i - k) % 2 == 0 { term } else { -term };
                }
                usize::try_from(s).expect("negative Betti number")
            })
            .collect()
    }

    fn check_class(&self, c: &DivisorClass) -> Result<(), ToricError> {
        if c.0.len() != self.rank {
            return Err(ToricError::ClassLength {
                expected: self.rank,
                found: c.0.len(),
            });
        }
        Ok(())
    }

    /// A rational Cox linear form representing the class.
    pub fn lift_class(&self, c: &[Rational]) -> Vec<Rational> {
        let g: Vec<Vec<Rational>> = (0..self.rank)
            .map(|a| {
                self.degree_map
                    .row(a)
                    .iter()
                    .map(|x| Rational::from_integer(x.clone()))
                    .collect()
            })
            .collect();
        solve_linear(&g, self.nrays(), c)
            .particular
            .expect("degree map is surjective")
    }

    /// Classical intersection number of `n` divisor classes.
    pub fn intersection_number(&self, classes: &[DivisorClass]) -> Result<Rational, ToricError> {
        self.intersection_number_normalized_by(classes, self.reference_cone)
    }

    /// Same as [`intersection_number`](Self::intersection_number), but with
    /// the point class fixed by the maximal cone `cone` instead of the
    /// stored reference cone.
    pub fn intersection_number_normalized_by(
        &self,
        classes: &[DivisorClass],
        cone: usize,
    ) -> Result<Rational, ToricError> {
        if classes.len() != self.dim() {
            return Err(ToricError::WrongArity {
                expected: self.dim(),
                found: classes.len(),
            });
        }
        for c in classes {
            self.check_class(c)?;
        }
        let rational: Vec<Vec<Rational>> = classes.iter().map(DivisorClass::to_rationals).collect();
        self.rational_intersection_normalized_by(&rational, cone)
    }

    /// Intersection number of `n` classes in `Pic ⊗ Q`.
    pub fn rational_intersection_number(
        &self,
        classes: &[Vec<Rational>],
    ) -> Result<Rational, ToricError> {
        self.rational_intersection_normalized_by(classes, self.reference_cone)
    }

    fn rational_intersection_normalized_by(
        &self,
        classes: &[Vec<Rational>],
        cone: usize,
    ) -> Result<Rational, ToricError> {
        if classes.len() != self.dim() {
            return Err(ToricError::WrongArity {
                expected: self.dim(),
                found: classes.len(),
            });
        }
        for c in classes {
            if c.len() != self.rank {
                return Err(ToricError::ClassLength {
                    expected: self.rank,
                    found: c.len(),
                });
            }
        }
        let forms: Vec<Vec<Rational>> = classes.iter().map(|c| self.lift_class(c)).collect();
        Ok(self
            .chow
            .evaluate_linear_forms(&forms, &self.fan.max_cones[cone]))
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// `Q[x_ρ] / (SR + linear relations)` truncated at degree `n`.
///
/// The linear relations `sum_ρ <m, u_ρ> x_ρ` are eliminated first by row
/// reduction, which expresses every `x_ρ` in `r` free Cox variables; the
/// Stanley-Reisner monomials are then reduced in that polynomial ring.
#[derive(Clone, Debug)]
pub struct ChowRing {
    nrays: usize,
    dim: usize,
    /// Image of each `x_ρ` as a linear form in the free variables.
    substitution: Vec<Polynomial>,
    free_rays: Vec<usize>,
    quotient: GradedQuotient,
}

impl ChowRing {
    fn new(fan: &Fan, primitive: &[Vec<usize>]) -> ChowRing {
        let n = fan.dim;
        let nrays = fan.nrays();
        let relations: Vec<Vec<Rational>> = (0..n)
            .map(|i| {
                fan.rays
                    .iter()
                    .map(|u| Rational::from_integer(u[i].into()))
                    .collect()
            })
            .collect();
        let reduced = rref(relations, nrays);
        let free_rays = reduced.free_columns();
        let k = free_rays.len();
        let mut substitution = vec![Polynomial::zero(k); nrays];
        for (j, &f) in free_rays.iter().enumerate() {
            substitution[f] = Polynomial::var(k, j);
        }
        for (row, &p) in reduced.rows.iter().zip(&reduced.pivots) {
            let coeffs: Vec<Rational> = free_rays.iter().map(|&f| -row[f].clone()).collect();
            substitution[p] = Polynomial::linear(&coeffs);
        }
        let sr_images: Vec<Polynomial> = primitive
            .iter()
            .map(|coll| {
                coll.iter()
                    .fold(Polynomial::one(k), |acc, &r| &acc * &substitution[r])
            })
            .collect();
        let quotient =
            GradedQuotient::new(k, &sr_images, n as u32).expect("SR images are homogeneous");
        ChowRing {
            nrays,
            dim: n,
            substitution,
            free_rays,
            quotient,
        }
    }

    /// Rays whose Cox variables survive the linear elimination.
    pub fn free_rays(&self) -> &[usize] {
        &self.free_rays
    }

    pub fn graded_dims(&self) -> Vec<usize> {
        self.quotient.dims()
    }

    fn image(&self, form: &[Rational]) -> Polynomial {
        assert_eq!(form.len(), self.nrays);
        form.iter()
            .zip(&self.substitution)
            .fold(Polynomial::zero(self.free_rays.len()), |acc, (c, s)| {
                &acc + &s.scale(c)
            })
    }

    /// Coordinate of a top-degree element on the (one-dimensional) top
    /// piece, relative to the square-free monomial of `cone`.
    pub fn evaluate_linear_forms(&self, forms: &[Vec<Rational>], cone: &[usize]) -> Rational {
        let k = self.free_rays.len();
        let product = forms
            .iter()
            .fold(Polynomial::one(k), |acc, f| &acc * &self.image(f));
        let reference = cone
            .iter()
            .fold(Polynomial::one(k), |acc, &r| &acc * &self.substitution[r]);
        let nf = self.quotient.normal_form(&product).expect("degree n");
        let nf_ref = self.quotient.normal_form(&reference).expect("degree n");
        let piece = self.quotient.piece(self.dim as u32).expect("top piece");
        let standard = piece.standard_monomials();
        assert_eq!(
            standard.len(),
            1,
            "top degree of the Chow ring is one-dimensional"
        );
        let b = &standard[0];
        let r = nf_ref.coeff(b);
        assert!(!r.is_zero(), "point class vanishes");
        nf.coeff(b) / r
    }
}
