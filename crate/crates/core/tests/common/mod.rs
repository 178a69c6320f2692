#![allow(dead_code)]

use itertools::Itertools;
use rand::Rng;

use toric_score::exact::rational::{int, ratio};
use toric_score::exact::{Monomial, Polynomial, Rational};
use toric_score::polymology::{DeformedEuler, WVector};
use toric_score::toric::{DivisorClass, Fan, ToricVariety};

pub fn variety(fan: Fan) -> ToricVariety {
    ToricVariety::new(fan).expect("smooth complete fan")
}

pub fn p(n: usize) -> ToricVariety {
    variety(Fan::projective_space(n))
}

pub fn p1xp1() -> ToricVariety {
    variety(Fan::projective_space(1).product(&Fan::projective_space(1)))
}

pub fn f1() -> ToricVariety {
    variety(Fan::hirzebruch(1))
}

/// The fans used by the equivalence checks.
pub fn test_varieties() -> Vec<(&'static str, ToricVariety)> {
    vec![
        ("P2", p(2)),
        ("P4", p(4)),
        ("P5", p(5)),
        ("P1xP1", p1xp1()),
        ("F1", f1()),
    ]
}

/// Nondecreasing `k`-tuples from `0..n`.
pub fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0..n).combinations_with_replacement(k).collect()
}

pub fn divisor(v: &ToricVariety, ray: usize) -> WVector {
    WVector::from_class(&v.degree(ray))
}

pub fn basis(r: usize) -> Vec<WVector> {
    (0..r)
        .map(|a| WVector((0..r).map(|b| int(i64::from(a == b))).collect()))
        .collect()
}

pub fn to_class(w: &WVector) -> DivisorClass {
    DivisorClass(
        w.0.iter()
            .map(|q| {
                assert!(q.is_integer());
                q.to_integer()
            })
            .collect(),
    )
}

pub fn random_rational<R: Rng>(rng: &mut R) -> Rational {
    ratio(rng.gen_range(-6..=6), rng.gen_range(1..=3))
}

pub fn random_nonzero_rational<R: Rng>(rng: &mut R) -> Rational {
    loop {
        let q = random_rational(rng);
        if q != int(0) {
            return q;
        }
    }
}

pub fn random_wvector<R: Rng>(rng: &mut R, r: usize) -> WVector {
    WVector((0..r).map(|_| random_rational(rng)).collect())
}

/// A class-homogeneous polynomial with at least two terms, drawn from the
/// monomials of `class` of total degree at most `max_degree`.
pub fn random_homogeneous<R: Rng>(
    rng: &mut R,
    v: &ToricVariety,
    class: &DivisorClass,
    max_degree: u32,
) -> Polynomial {
    let monomials = v.monomials_of_class(class, max_degree);
    assert!(monomials.len() >= 2, "class {class} has too few monomials");
    loop {
        let mut f = Polynomial::zero(v.nrays());
        for m in &monomials {
            if rng.gen_bool(0.6) {
                f.add_term(m.clone(), random_nonzero_rational(rng));
            }
        }
        if f.len() >= 2 {
            return f;
        }
    }
}

/// Random coefficients for every ordered pair of rays in the same class.
pub fn random_block_deformation<R: Rng>(rng: &mut R, v: &ToricVariety) -> DeformedEuler {
    let mut entries = Vec::new();
    for row in 0..v.nrays() {
        for col in 0..v.nrays() {
            if v.degree(row) == v.degree(col) {
                entries.push(((row, col), random_wvector(rng, v.rank())));
            }
        }
    }
    DeformedEuler::from_coefficients(v, entries).expect("class-compatible")
}

pub fn mono(exps: &[u32], c: i64) -> Polynomial {
    Polynomial::monomial(Monomial::new(exps.to_vec()), int(c))
}

pub fn sum(ps: &[Polynomial]) -> Polynomial {
    ps.iter().skip(1).fold(ps[0].clone(), |acc, p| &acc + p)
}

/// `x_0^d + ... + x_{n-1}^d`.
pub fn fermat(nvars: usize, d: u32) -> Polynomial {
    sum(&(0..nvars)
        .map(|i| {
            let mut e = vec![0; nvars];
            e[i] = d;
            mono(&e, 1)
        })
        .collect::<Vec<_>>())
}

/// `x_0 x_1 + x_2 x_3 + x_4 x_5` on six variables.
pub fn split_quadric() -> Polynomial {
    sum(&[
        mono(&[1, 1, 0, 0, 0, 0], 1),
        mono(&[0, 0, 1, 1, 0, 0], 1),
        mono(&[0, 0, 0, 0, 1, 1], 1),
    ])
}

/// `(Aᵀ)⁻¹` by exact solving; `None` when `A` is singular.
pub fn inverse_transpose(a: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    use toric_score::exact::solve_linear;
    let n = a.len();
    let at: Vec<Vec<Rational>> = (0..n)
        .map(|i| (0..n).map(|j| a[j][i].clone()).collect())
        .collect();
    let mut b = vec![vec![int(0); n]; n];
    for k in 0..n {
        let e: Vec<Rational> = (0..n).map(|i| int(i64::from(i == k))).collect();
        let s = solve_linear(&at, n, &e);
        if !s.kernel.is_empty() {
            return None;
        }
        let x = s.particular?;
        for (row, xi) in b.iter_mut().zip(x) {
            row[k] = xi;
        }
    }
    Some(b)
}

/// Euler data on `P^n` with `E_ρ = sum_ρ' A[ρ][ρ'] x_ρ' ψ`.
pub fn projective_deformation(v: &ToricVariety, a: &[Vec<Rational>]) -> DeformedEuler {
    let entries = (0..a.len())
        .flat_map(|i| (0..a.len()).map(move |j| (i, j)))
        .map(|(i, j)| ((i, j), WVector(vec![a[i][j].clone()])));
    DeformedEuler::from_coefficients(v, entries).expect("single class block")
}

/// The lift `J = (Aᵀ)⁻¹ ∂f` through the deformation given by `A`.
pub fn deformed_lift(
    a: &[Vec<Rational>],
    f: &Polynomial,
) -> std::collections::BTreeMap<usize, Polynomial> {
    let b = inverse_transpose(a).expect("invertible");
    (0..a.len())
        .map(|rho| {
            let j = (0..a.len()).fold(Polynomial::zero(f.nvars()), |acc, k| {
                &acc + &f.derivative(k).scale(&b[rho][k])
            });
            (rho, j)
        })
        .collect()
}

/// `A = I + N` with `N` the superdiagonal of ones.
pub fn unipotent(n: usize) -> Vec<Vec<Rational>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| int(i64::from(i == j) + i64::from(j == i + 1)))
                .collect()
        })
        .collect()
}
