mod common;

use std::collections::BTreeSet;

use itertools::Itertools;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use toric_score::exact::linalg::mat_vec;
use toric_score::exact::rational::{int, is_canonical, ratio};
use toric_score::exact::{solve_linear, IntMatrix, Monomial, Polynomial, Rational};
use toric_score::io::{parse_problem, ClassSpec, FanSpec, ProblemFile, QuerySpec, RayRef, Term};
use toric_score::polymology::{Polymology, SymElement, WVector};
use toric_score::score::{score_product, CompleteIntersection, HypersurfaceData, ScoreOptions};
use toric_score::toric::{DivisorClass, Fan, ToricVariety};

fn rational() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=5).prop_map(|(p, q)| ratio(p, q))
}

fn polynomial(nvars: usize, max_exp: u32, max_terms: usize) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec(
        (prop::collection::vec(0..=max_exp, nvars), rational()),
        0..=max_terms,
    )
    .prop_map(move |terms| {
        let mut p = Polynomial::zero(nvars);
        for (e, c) in terms {
            p.add_term(Monomial::new(e), c);
        }
        p
    })
}

fn int_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-6i64..=6, cols), rows)
}

/// Decides `g | f` by solving for the coefficients of an unknown quotient
/// of bounded degree.
fn divides_by_linear_algebra(f: &Polynomial, g: &Polynomial) -> Option<Polynomial> {
    let n = f.nvars();
    let max_f = f.terms().map(|(m, _)| m.degree()).max().unwrap_or(0);
    let min_g = g.terms().map(|(m, _)| m.degree()).min().unwrap();
    if f.is_zero() {
        return Some(Polynomial::zero(n));
    }
    let bound = max_f.checked_sub(min_g)?;
    let unknowns: Vec<Monomial> = (0..=bound)
        .flat_map(|d| Monomial::all_of_degree(n, d))
        .collect();
    let mut rows_index: Vec<Monomial> = f.terms().map(|(m, _)| m.clone()).collect();
    for u in &unknowns {
        for (m, _) in g.terms() {
            rows_index.push(u.mul(m));
        }
    }
    let rows_index: Vec<Monomial> = rows_index
        .into_iter()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let a: Vec<Vec<Rational>> = rows_index
        .iter()
        .map(|target| {
            unknowns
                .iter()
                .map(|u| {
                    g.terms()
                        .find(|(m, _)| &u.mul(m) == target)
                        .map_or_else(Rational::zero, |(_, c)| c.clone())
                })
                .collect()
        })
        .collect();
    let b: Vec<Rational> = rows_index.iter().map(|m| f.coeff(m)).collect();
    let x = solve_linear(&a, unknowns.len(), &b).particular?;
    Some(Polynomial::from_terms(
        n,
        unknowns.into_iter().zip(x).filter(|(_, c)| !c.is_zero()),
    ))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn rational_field_laws(a in rational(), b in rational(), c in rational()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!(is_canonical(&(&(&a * &b) - &c)));
        if !b.is_zero() {
            prop_assert_eq!(&(&a / &b) * &b, a);
        }
    }

    #[test]
    fn exact_division_of_products(q in polynomial(3, 2, 4), g in polynomial(3, 2, 3)) {
        prop_assume!(!g.is_zero());
        let f = &q * &g;
        let quotient = f.exact_div(&g).unwrap();
        prop_assert_eq!(quotient, Some(q));
    }

    #[test]
    fn exact_division_agrees_with_linear_algebra(
        q in polynomial(3, 2, 3),
        g in polynomial(3, 2, 3),
        noise in polynomial(3, 2, 2),
    ) {
        prop_assume!(!g.is_zero());
        let f = &(&q * &g) + &noise;
        let fast = f.exact_div(&g).unwrap();
        let slow = divides_by_linear_algebra(&f, &g);
        prop_assert_eq!(fast.is_some(), slow.is_some());
        if let Some(q) = fast {
            prop_assert_eq!(&q * &g, f);
        }
    }

    #[test]
    fn smith_normal_form_recomposes(rows in 1usize..=4, cols in 1usize..=4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<Vec<i64>> = (0..rows)
            .map(|_| (0..cols).map(|_| rand::Rng::gen_range(&mut rng, -6i64..=6)).collect())
            .collect();
        let a = IntMatrix::from_rows(&data);
        let (u, d, v) = a.smith_normal_form();
        prop_assert_eq!(&(&u * &a) * &v, d.clone());
        prop_assert!(u.det().magnitude().is_one());
        prop_assert!(v.det().magnitude().is_one());
        prop_assert!(d.is_diagonal());
        let diag = d.diagonal();
        for w in diag.windows(2) {
            if !w[0].is_zero() {
                prop_assert!((&w[1] % &w[0]).is_zero());
            } else {
                prop_assert!(w[1].is_zero());
            }
        }
    }

    #[test]
    fn hermite_normal_form_recomposes(data in int_matrix(3, 4)) {
        let a = IntMatrix::from_rows(&data);
        let (t, h) = a.hermite_normal_form();
        prop_assert_eq!(&t * &a, h);
        prop_assert!(t.det().magnitude().is_one());
    }

    #[test]
    fn solve_linear_certificates(
        a in prop::collection::vec(prop::collection::vec(rational(), 4), 3),
        b in prop::collection::vec(rational(), 3),
    ) {
        let s = solve_linear(&a, 4, &b);
        if let Some(x) = &s.particular {
            prop_assert_eq!(mat_vec(&a, x), b);
        }
        for k in &s.kernel {
            prop_assert!(mat_vec(&a, k).iter().all(Zero::is_zero));
        }
    }
}

/// Smooth complete fans built from projective spaces and Hirzebruch
/// surfaces, of dimension at most 4.
fn fan_strategy() -> impl Strategy<Value = Fan> {
    let factor = prop_oneof![
        (1usize..=3).prop_map(Fan::projective_space),
        (0i64..=3).prop_map(Fan::hirzebruch),
    ];
    prop::collection::vec(factor, 1..=2).prop_filter_map("dimension at most 4", |fs| {
        let fan = fs
            .iter()
            .skip(1)
            .fold(fs[0].clone(), |acc, f| acc.product(f));
        (fan.dim() <= 4).then_some(fan)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn toric_invariants(fan in fan_strategy()) {
        let v = ToricVariety::new(fan.clone()).unwrap();
        for cone in fan.max_cones() {
            let m = IntMatrix::from_rows(&cone.iter().map(|&r| fan.rays()[r].clone()).collect::<Vec<_>>());
            prop_assert!(m.det().magnitude().is_one());
        }
        // sum_ρ <m, u_ρ> deg(D_ρ) = 0 for each basis vector m
        for i in 0..fan.dim() {
            let mut total = DivisorClass::zero(v.rank());
            for (ray, u) in fan.rays().iter().enumerate() {
                total = total.add(&v.degree(ray).scale(u[i]));
            }
            prop_assert_eq!(total, DivisorClass::zero(v.rank()));
        }
        // faces are exactly the subsets containing no primitive collection
        let faces = fan.faces();
        for subset in (0..fan.nrays()).powerset() {
            let contains_collection = v
                .primitive_collections()
                .iter()
                .any(|k| k.iter().all(|r| subset.contains(r)));
            prop_assert_eq!(faces.contains(&subset), !contains_collection, "{:?}", subset);
        }
        let pm = Polymology::undeformed(v.clone());
        prop_assert_eq!(pm.quotient_dims(), v.betti_numbers());
        // undeformed generators are products of divisor classes
        for g in &pm.ideal().generators {
            let expected = SymElement::product(
                v.rank(),
                &g.collection.iter().map(|&r| divisor(&v, r)).collect::<Vec<_>>(),
            );
            prop_assert_eq!(&g.element, &expected);
        }
    }

    #[test]
    fn intersection_symmetric_and_multilinear(fan in fan_strategy(), seed in any::<u64>()) {
        let v = ToricVariety::new(fan).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = v.dim();
        let random_class = |rng: &mut ChaCha8Rng| {
            DivisorClass::from_ints(&(0..v.rank()).map(|_| rand::Rng::gen_range(rng, -3i64..=3)).collect::<Vec<_>>())
        };
        let classes: Vec<DivisorClass> = (0..n).map(|_| random_class(&mut rng)).collect();
        let base = v.intersection_number(&classes).unwrap();
        let mut rev = classes.clone();
        rev.reverse();
        prop_assert_eq!(v.intersection_number(&rev).unwrap(), base.clone());
        let other = random_class(&mut rng);
        let (a, b) = (rand::Rng::gen_range(&mut rng, -3i64..=3), rand::Rng::gen_range(&mut rng, -3i64..=3));
        let mut mixed = classes.clone();
        mixed[0] = classes[0].scale(a).add(&other.scale(b));
        let mut alt = classes.clone();
        alt[0] = other;
        prop_assert_eq!(
            v.intersection_number(&mixed).unwrap(),
            &int(a) * &base + &int(b) * v.intersection_number(&alt).unwrap()
        );
        for cone in 0..v.fan().max_cones().len() {
            prop_assert_eq!(v.intersection_number_normalized_by(&classes, cone).unwrap(), base.clone());
        }
        // the undeformed product agrees with the oracle
        let pm = Polymology::undeformed(v.clone());
        let sig: Vec<WVector> = classes.iter().map(WVector::from_class).collect();
        prop_assert_eq!(pm.product_v(&sig).unwrap(), base);
    }

    #[test]
    fn deformed_products_are_multilinear(seed in any::<u64>(), which in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = [p1xp1(), p(3), variety(Fan::projective_space(1).product(&Fan::projective_space(2)))][which].clone();
        let e = random_block_deformation(&mut rng, &v);
        let pm = Polymology::new(v.clone(), e).unwrap();
        prop_assume!(pm.report().passed());
        let n = v.dim();
        let sig: Vec<WVector> = (0..n).map(|_| random_wvector(&mut rng, v.rank())).collect();
        let base = pm.product_v(&sig).unwrap();
        for perm in (0..n).permutations(n) {
            let s: Vec<WVector> = perm.iter().map(|&i| sig[i].clone()).collect();
            prop_assert_eq!(pm.product_v(&s).unwrap(), base.clone());
        }
        let zeroed: Vec<WVector> = std::iter::once(WVector::zero(v.rank())).chain(sig[1..].iter().cloned()).collect();
        prop_assert_eq!(pm.product_v(&zeroed).unwrap(), int(0));
        // normal forms are idempotent and eval_top factors through them
        let s = SymElement::product(v.rank(), &sig);
        let nf = pm.normal_form(&s);
        prop_assert_eq!(pm.normal_form(&nf), nf.clone());
        prop_assert_eq!(pm.eval_top(&nf).unwrap(), base);
    }

    #[test]
    fn score_matches_classical_restriction(seed in any::<u64>(), d in 1u32..=3) {
        // undeformed hypersurface of P^1 x P^3 of class (a, d)
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = variety(Fan::projective_space(1).product(&Fan::projective_space(3)));
        let pm = Polymology::undeformed(v.clone());
        let a = rand::Rng::gen_range(&mut rng, 0i64..=1);
        let class = DivisorClass::from_ints(&[a, i64::from(d)]);
        let f = random_homogeneous(&mut rng, &v, &class, d + a as u32);
        let x = HypersurfaceData::default_jacobian(&v, "X", f).unwrap();
        let ci = CompleteIntersection::extract(&pm, vec![x]).unwrap();
        for rays in multisets(v.nrays(), 3) {
            let sig: Vec<WVector> = rays.iter().map(|&r| divisor(&v, r)).collect();
            let value = score_product(&pm, &ci, &sig, ScoreOptions::default()).unwrap().value;
            let mut classes: Vec<DivisorClass> = rays.iter().map(|&r| v.degree(r)).collect();
            classes.push(class.clone());
            prop_assert_eq!(value, v.intersection_number(&classes).unwrap());
        }
    }

    #[test]
    fn hypersurface_order_does_not_matter(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = p(5);
        let a = loop {
            let a: Vec<Vec<Rational>> = (0..6).map(|_| (0..6).map(|_| random_rational(&mut rng)).collect()).collect();
            if inverse_transpose(&a).is_some() {
                break a;
            }
        };
        let pm = Polymology::new(v.clone(), projective_deformation(&v, &a)).unwrap();
        let h = |label: &str, f: Polynomial| HypersurfaceData::new(&v, label, f.clone(), None, deformed_lift(&a, &f)).unwrap();
        let f1 = random_homogeneous(&mut rng, &v, &DivisorClass::from_ints(&[2]), 2);
        let f2 = random_homogeneous(&mut rng, &v, &DivisorClass::from_ints(&[1]), 1);
        let forward = CompleteIntersection::extract(&pm, vec![h("A", f1.clone()), h("B", f2.clone())]).unwrap();
        let backward = CompleteIntersection::extract(&pm, vec![h("B", f2), h("A", f1)]).unwrap();
        prop_assert_eq!(&forward.gammas, &vec![WVector::from_ints(&[2]), WVector::from_ints(&[1])]);
        let sig: Vec<WVector> = (0..3).map(|_| random_wvector(&mut rng, 1)).collect();
        let x = score_product(&pm, &forward, &sig, ScoreOptions::default()).unwrap();
        let y = score_product(&pm, &backward, &sig, ScoreOptions::default()).unwrap();
        prop_assert_eq!(x.value.clone(), y.value);
        let product: Rational = sig.iter().map(|w| w.0[0].clone()).product();
        prop_assert_eq!(x.value, &product * &int(2));
    }
}

fn term() -> impl Strategy<Value = Term> {
    (prop::collection::vec(0u32..=3, 3), rational()).prop_map(|(e, c)| Term(e, c))
}

fn class_spec() -> impl Strategy<Value = ClassSpec> {
    prop_oneof![
        rational().prop_map(|q| ClassSpec::Vector(vec![q])),
        (0usize..3).prop_map(|r| ClassSpec::Divisor(RayRef::Index(r))),
        prop::sample::select(vec!["a", "b", "c"])
            .prop_map(|s| ClassSpec::Divisor(RayRef::Label(s.into()))),
    ]
}

fn problem_strategy() -> impl Strategy<Value = ProblemFile> {
    let query = prop_oneof![
        Just(QuerySpec::Validate),
        Just(QuerySpec::Ring),
        prop::collection::vec(class_spec(), 2).prop_map(|sigmas| QuerySpec::Product { sigmas }),
        prop::collection::vec(class_spec(), 2).prop_map(|classes| QuerySpec::Intersect { classes }),
    ];
    (
        prop::option::of("[a-z ]{0,12}"),
        prop::collection::vec(query, 0..5),
        prop::collection::vec(term(), 0..3),
    )
        .prop_map(|(name, queries, extra)| {
            // P^2 plus a hypersurface whose class is fixed by its first term
            let mut f = vec![Term(vec![1, 1, 1], int(1))];
            f.extend(
                extra
                    .into_iter()
                    .map(|Term(_, c)| Term(vec![3, 0, 0], c))
                    .take(1),
            );
            ProblemFile {
                name,
                fan: FanSpec {
                    rays: vec![vec![1, 0], vec![0, 1], vec![-1, -1]],
                    max_cones: vec![
                        vec![RayRef::Label("a".into()), RayRef::Label("b".into())],
                        vec![RayRef::Index(1), RayRef::Index(2)],
                        vec![RayRef::Index(0), RayRef::Label("c".into())],
                    ],
                    ray_labels: Some(vec!["a".into(), "b".into(), "c".into()]),
                },
                deformation: Default::default(),
                hypersurfaces: vec![toric_score::io::HypersurfaceSpec {
                    label: "X".into(),
                    class: None,
                    f,
                    j: Default::default(),
                }],
                queries,
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn problem_files_round_trip(file in problem_strategy()) {
        let text = serde_json::to_string_pretty(&file).unwrap();
        let parsed = parse_problem(&text).unwrap();
        prop_assert_eq!(&parsed.file, &file);
        let again = serde_json::to_string_pretty(&parsed.file).unwrap();
        prop_assert_eq!(again, text);
    }
}

#[test]
fn rational_inputs_normalize() {
    let text = r#"{"fan": {"rays": [[1,0],[0,1],[-1,-1]], "max_cones": [[0,1],[1,2],[0,2]]},
                   "queries": [{"kind": "product", "sigmas": [["3/6"], [[-4, -8]]]}]}"#;
    let p = parse_problem(text).unwrap();
    let QuerySpec::Product { sigmas } = &p.file.queries[0] else {
        panic!()
    };
    assert_eq!(
        sigmas,
        &vec![
            ClassSpec::Vector(vec![ratio(1, 2)]),
            ClassSpec::Vector(vec![ratio(1, 2)])
        ]
    );
    let out = serde_json::to_value(&p.file).unwrap();
    assert_eq!(
        out["queries"][0]["sigmas"],
        serde_json::json!([["1/2"], ["1/2"]])
    );
}
