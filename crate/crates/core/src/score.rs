//! Products on complete intersections `X = {f_1 = ... = f_m = 0} ⊂ V`
//! computed on `V`.
//!
//! Each hypersurface comes with a lift `J` of its defining section through
//! the deformed Euler map. The composite `E∘J` must equal `γ·f` for a
//! constant `γ ∈ W`; that `γ` is then inserted into the ambient product:
//!
//! `⟨σ_1, ..., σ_{n-m}⟩_X = ⟨σ_1, ..., σ_{n-m}, γ_1, ..., γ_m⟩_V`.

use std::collections::BTreeMap;

use itertools::Itertools;

use crate::exact::{Polynomial, Rational};
use crate::polymology::{Polymology, PolymologyError, SymElement, WVector};
use crate::toric::{Completeness, DivisorClass, ToricVariety};

/// Emitted when more hypersurfaces are cut than the codimension bound allows.
pub const WARN_CODIMENSION: &str = "hypothesis violated: m <= n - 3 does not hold";
/// Emitted whenever the identification of H^1(E*_X) with W is assumed rather
/// than proved by the engine.
pub const WARN_H1: &str = "hypothesis unverified: H^1(E*_X) = W";
/// Emitted when the fan could not be certified complete.
pub const WARN_COMPLETENESS: &str = "completeness unverified";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScoreError {
    #[error("hypersurface {label}: f is zero")]
    ZeroPolynomial { label: String },
    #[error("hypersurface {label}: expected {expected} Cox variables, found {found}")]
    VariableCount {
        label: String,
        expected: usize,
        found: usize,
    },
    #[error("hypersurface {label}: f is not class-homogeneous")]
    NotHomogeneous { label: String },
    #[error("hypersurface {label}: {what} has class {found}, expected {expected}")]
    ClassMismatch {
        label: String,
        what: String,
        expected: DivisorClass,
        found: String,
    },
    #[error("hypersurface {label}: J refers to ray {ray}, only {nrays} rays")]
    RayOutOfRange {
        label: String,
        ray: usize,
        nrays: usize,
    },
    #[error(
        "hypersurface {label}: coordinate {coordinate} of E∘J is not divisible by f (no monad)"
    )]
    Divisibility { label: String, coordinate: usize },
    #[error("hypersurface {label}: coordinate {coordinate} of E∘J / f is not constant")]
    NonConstantQuotient { label: String, coordinate: usize },
    #[error("hypersurface {label}: recomposition γ·f = E∘J failed at coordinate {coordinate}")]
    Recomposition { label: String, coordinate: usize },
    #[error("expected {expected} classes, got {found}")]
    WrongArity { expected: usize, found: usize },
    #[error("{m} hypersurfaces in dimension {n} violates m <= n - 3")]
    HypothesisViolation { m: usize, n: usize },
    #[error(transparent)]
    Polymology(#[from] PolymologyError),
}

/// A hypersurface `{f = 0}` of class `H` with its lift `J`, where `J_ρ` has
/// class `H - deg(D_ρ)`. Missing entries of `J` are zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HypersurfaceData {
    pub label: String,
    pub f: Polynomial,
    pub class: DivisorClass,
    pub jacobian: BTreeMap<usize, Polynomial>,
}

impl HypersurfaceData {
    /// Checks `f` and every `J_ρ` against the grading of `v`. When `class`
    /// is given it must agree with the class of `f`.
    pub fn new(
        v: &ToricVariety,
        label: impl Into<String>,
        f: Polynomial,
        class: Option<DivisorClass>,
        jacobian: BTreeMap<usize, Polynomial>,
    ) -> Result<Self, ScoreError> {
        let label = label.into();
        if f.nvars() != v.nrays() {
            return Err(ScoreError::VariableCount {
                label,
                expected: v.nrays(),
                found: f.nvars(),
            });
        }
        if f.is_zero() {
            return Err(ScoreError::ZeroPolynomial { label });
        }
        let found = v.class_of(&f).ok_or_else(|| ScoreError::NotHomogeneous {
            label: label.clone(),
        })?;
        let class = match class {
            Some(c) if c != found => {
                return Err(ScoreError::ClassMismatch {
                    label,
                    what: "f".into(),
                    expected: c,
                    found: found.to_string(),
                })
            }
            _ => found,
        };
        let mut kept = BTreeMap::new();
        for (ray, j) in jacobian {
            if ray >= v.nrays() {
                return Err(ScoreError::RayOutOfRange {
                    label,
                    ray,
                    nrays: v.nrays(),
                });
            }
            if j.nvars() != v.nrays() {
                return Err(ScoreError::VariableCount {
                    label,
                    expected: v.nrays(),
                    found: j.nvars(),
                });
            }
            if j.is_zero() {
                continue;
            }
            let expected = class.sub(&v.degree(ray));
            match v.class_of(&j) {
                Some(c) if c == expected => {}
                other => {
                    return Err(ScoreError::ClassMismatch {
                        label,
                        what: format!("J[{ray}]"),
                        expected,
                        found: other.map_or_else(|| "inhomogeneous".into(), |c| c.to_string()),
                    })
                }
            }
            kept.insert(ray, j);
        }
        Ok(HypersurfaceData {
            label,
            f,
            class,
            jacobian: kept,
        })
    }

    /// `J_ρ = ∂f/∂x_ρ`, the lift through the undeformed Euler sequence.
    pub fn default_jacobian(
        v: &ToricVariety,
        label: impl Into<String>,
        f: Polynomial,
    ) -> Result<Self, ScoreError> {
        let jacobian = (0..f.nvars()).map(|i| (i, f.derivative(i))).collect();
        HypersurfaceData::new(v, label, f, None, jacobian)
    }

    pub fn j(&self, ray: usize) -> Polynomial {
        self.jacobian
            .get(&ray)
            .cloned()
            .unwrap_or_else(|| Polynomial::zero(self.f.nvars()))
    }
}

/// Coordinates `(E∘J)_a = sum_ρ J_ρ · E_ρ^a` of the composite map.
pub fn compose_euler(pm: &Polymology, hyp: &HypersurfaceData) -> Vec<Polynomial> {
    let e = pm.euler();
    let nvars = hyp.f.nvars();
    let mut out = vec![Polynomial::zero(nvars); e.rank()];
    for (&ray, j) in &hyp.jacobian {
        for (o, s) in out.iter_mut().zip(e.section(ray)) {
            *o = &*o + &(j * &s);
        }
    }
    out
}

/// The unique `γ ∈ W` with `E∘J = γ·f`, by exact division in the Cox ring.
/// Every success is rechecked by multiplying back.
pub fn extract_gamma(pm: &Polymology, hyp: &HypersurfaceData) -> Result<WVector, ScoreError> {
    let composite = compose_euler(pm, hyp);
    let mut gamma = Vec::with_capacity(composite.len());
    for (coordinate, p) in composite.iter().enumerate() {
        let q = p
            .exact_div(&hyp.f)
            .expect("matching variables, nonzero f")
            .ok_or_else(|| ScoreError::Divisibility {
                label: hyp.label.clone(),
                coordinate,
            })?;
        let c = q
            .as_constant()
            .ok_or_else(|| ScoreError::NonConstantQuotient {
                label: hyp.label.clone(),
                coordinate,
            })?;
        if &hyp.f.scale(&c) != p {
            return Err(ScoreError::Recomposition {
                label: hyp.label.clone(),
                coordinate,
            });
        }
        gamma.push(c);
    }
    Ok(WVector(gamma))
}

/// Hypersurfaces with their extracted classes, in the given order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompleteIntersection {
    pub hypersurfaces: Vec<HypersurfaceData>,
    pub gammas: Vec<WVector>,
}

impl CompleteIntersection {
    /// An empty list is accepted and means `X = V`.
    pub fn extract(
        pm: &Polymology,
        hypersurfaces: Vec<HypersurfaceData>,
    ) -> Result<Self, ScoreError> {
        let gammas = hypersurfaces
            .iter()
            .map(|h| extract_gamma(pm, h))
            .collect::<Result<_, _>>()?;
        Ok(CompleteIntersection {
            hypersurfaces,
            gammas,
        })
    }

    pub fn codimension(&self) -> usize {
        self.hypersurfaces.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScoreOptions {
    /// Evaluate even when `m > n - 3`. The warning is reported either way.
    pub allow_hypothesis_violations: bool,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        ScoreOptions {
            allow_hypothesis_violations: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalReport {
    pub value: Rational,
    pub inserted_gammas: Vec<WVector>,
    /// The degree-`n` element `σ_1⋯σ_{n-m}·γ_1⋯γ_m` that was evaluated.
    pub certificate: SymElement,
    /// Its normal form modulo `SR(V, E)`.
    pub normal_form: SymElement,
    pub warnings: Vec<String>,
}

/// Warnings that apply to products on `ci` inside `pm`, in a fixed order.
pub fn hypothesis_warnings(pm: &Polymology, ci: &CompleteIntersection) -> Vec<String> {
    let n = pm.dim();
    let m = ci.codimension();
    let mut warnings = Vec::new();
    let codim_violated = m > 0 && m + 3 > n;
    if codim_violated {
        warnings.push(WARN_CODIMENSION.to_string());
    }
    if m > 0 && (codim_violated || !pm.report().undeformed) {
        warnings.push(WARN_H1.to_string());
    }
    if pm.variety().report().completeness == Completeness::Unverified {
        warnings.push(WARN_COMPLETENESS.to_string());
    }
    warnings
}

/// `⟨σ_1, ..., σ_{n-m}⟩_X` evaluated as `⟨σ's, γ_1, ..., γ_m⟩_V`.
pub fn score_product(
    pm: &Polymology,
    ci: &CompleteIntersection,
    sigmas: &[WVector],
    options: ScoreOptions,
) -> Result<EvalReport, ScoreError> {
    let n = pm.dim();
    let m = ci.codimension();
    if sigmas.len() + m != n {
        return Err(ScoreError::WrongArity {
            expected: n.saturating_sub(m),
            found: sigmas.len(),
        });
    }
    if m > 0 && m + 3 > n && !options.allow_hypothesis_violations {
        return Err(ScoreError::HypothesisViolation { m, n });
    }
    let all: Vec<WVector> = sigmas.iter().chain(&ci.gammas).cloned().collect();
    let value = pm.product_v(&all)?;
    let certificate = SymElement::product(pm.rank(), &all);
    let normal_form = pm.normal_form(&certificate);
    Ok(EvalReport {
        value,
        inserted_gammas: ci.gammas.clone(),
        certificate,
        normal_form,
        warnings: hypothesis_warnings(pm, ci),
    })
}

/// One insertion order: the normal form after each step and the final value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InsertionOrder {
    pub order: Vec<usize>,
    pub partials: Vec<SymElement>,
    pub value: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConsistencyReport {
    pub one_shot: Rational,
    pub orders: Vec<InsertionOrder>,
    pub consistent: bool,
}

/// Compares one-shot insertion of all `γ`'s against inserting them one at a
/// time, reducing to normal form after every step, in every order.
pub fn restriction_consistency_check(
    pm: &Polymology,
    ci: &CompleteIntersection,
    sigmas: &[WVector],
) -> Result<ConsistencyReport, ScoreError> {
    let one_shot = score_product(pm, ci, sigmas, ScoreOptions::default())?.value;
    let r = pm.rank();
    let start = pm.normal_form(&SymElement::product(r, sigmas));
    let mut orders = Vec::new();
    for order in (0..ci.codimension()).permutations(ci.codimension()) {
        let mut current = start.clone();
        let mut partials = Vec::with_capacity(order.len());
        for &k in &order {
            current = pm.normal_form(&current.mul(&SymElement::linear(&ci.gammas[k])));
            partials.push(current.clone());
        }
        let value = pm.eval_top(&current)?;
        orders.push(InsertionOrder {
            order,
            partials,
            value,
        });
    }
    let consistent = orders.iter().all(|o| o.value == one_shot);
    Ok(ConsistencyReport {
        one_shot,
        orders,
        consistent,
    })
}
