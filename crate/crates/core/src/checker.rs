//! Uniqueness verdicts from transversality and sampled Lipschitz estimates.
//!
//! [`check_main`] tests a field against a foliation: the field must cross
//! the leaf through the base point, and both `F∘Φ` and `(Φ')⁻¹` must be
//! Lipschitz in the leaf variables near the origin. The other checks are
//! special cases: the identity foliation ([`check_cid`]), hyperplane leaves
//! ([`check_hyperplane`]) and a single transverse direction in the plane
//! ([`check_stettner_nowak`]).
//!
//! A verdict of [`Verdict::Supported`] is sampled evidence, not a proof.

use std::fmt;

use crate::field::{ScalarMap, VectorField};
use crate::foliation::{affine_foliation, Foliation};
use crate::linalg::Vector;
use crate::projective::OrthonormalBasis;
use crate::sampling::{
    sample_quotients, PairDirection, SampleDomain, Shape, DEFAULT_BUDGET, DEFAULT_SEED,
};
use crate::transform::{
    composed_field, inverse_jacobian_map, lipschitz_fixing_first, transversality,
    LipschitzEstimate, DEFAULT_RADIUS, TRANSVERSALITY_THRESHOLD,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckParams {
    /// Half-width of the box around the origin of the foliation coordinates.
    pub radius: f64,
    pub budget: usize,
    pub seed: u64,
    pub threshold: f64,
}

impl Default for CheckParams {
    fn default() -> Self {
        Self {
            radius: DEFAULT_RADIUS,
            budget: DEFAULT_BUDGET,
            seed: DEFAULT_SEED,
            threshold: TRANSVERSALITY_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theorem {
    Main,
    Cid,
    Hyperplane,
    StettnerNowak,
}

impl Theorem {
    pub fn as_str(&self) -> &'static str {
        match self {
            Theorem::Main => "main",
            Theorem::Cid => "cid",
            Theorem::Hyperplane => "hyperplane",
            Theorem::StettnerNowak => "stettner-nowak",
        }
    }
}

/// Ordered by precedence: a transversality failure overrides everything.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Supported,
    TransversalityFails,
    LipschitzBlowup,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Supported => "SUPPORTED",
            Verdict::TransversalityFails => "TRANSVERSALITY_FAILS",
            Verdict::LipschitzBlowup => "LIPSCHITZ_BLOWUP",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }

    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Supported => 0,
            Verdict::TransversalityFails => 2,
            Verdict::LipschitzBlowup => 3,
            Verdict::Inconclusive => 4,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessReport {
    pub theorem: Theorem,
    pub field: String,
    pub foliation: String,
    pub p0: Vector,
    pub transversality_value: Option<f64>,
    pub normal_at_p0: Option<Vector>,
    pub lip_f_phi: Option<LipschitzEstimate>,
    pub lip_inv_jac: Option<LipschitzEstimate>,
    pub verdict: Verdict,
    pub params: CheckParams,
    /// Errors met along the way, in the order they occurred.
    pub diagnostics: Vec<String>,
}

/// Applies the precedence rule.
pub fn decide(
    transversality: Option<f64>,
    threshold: f64,
    estimates: &[Option<&LipschitzEstimate>],
    had_errors: bool,
) -> Verdict {
    if transversality.is_some_and(|v| v.abs() <= threshold) {
        Verdict::TransversalityFails
    } else if estimates.iter().flatten().any(|e| e.blowup) {
        Verdict::LipschitzBlowup
    } else if had_errors || transversality.is_none() {
        Verdict::Inconclusive
    } else {
        Verdict::Supported
    }
}

fn describe(phi: &Foliation) -> String {
    format!("{} ({})", phi.map().name(), phi.provenance().tag())
}

/// Transversality plus Lipschitz estimates of `F∘Φ` and `(Φ')⁻¹`.
pub fn check_main(field: &VectorField, phi: &Foliation, params: &CheckParams) -> UniquenessReport {
    run_main(Theorem::Main, field, phi, params)
}

fn run_main(
    theorem: Theorem,
    field: &VectorField,
    phi: &Foliation,
    params: &CheckParams,
) -> UniquenessReport {
    let mut diagnostics = Vec::new();
    let mut note = |what: &str, e: &dyn fmt::Display| diagnostics.push(format!("{what}: {e}"));

    let (value, normal) = match transversality(field, phi) {
        Ok(t) => (Some(t.value), Some(t.normal)),
        Err(e) => {
            note("transversality", &e);
            (None, None)
        }
    };
    let lip_f_phi = match composed_field(field, phi) {
        Ok(g) => lipschitz_fixing_first(
            |w| g.eval(w),
            phi.dim(),
            params.radius,
            params.budget,
            params.seed,
        )
        .map_err(|e| note("F∘Φ", &e))
        .ok(),
        Err(e) => {
            note("F∘Φ", &e);
            None
        }
    };
    let lip_inv_jac = lipschitz_fixing_first(
        inverse_jacobian_map(phi),
        phi.dim(),
        params.radius,
        params.budget,
        params.seed,
    )
    .map_err(|e| note("(Φ')⁻¹", &e))
    .ok();

    let verdict = decide(
        value,
        params.threshold,
        &[lip_f_phi.as_ref(), lip_inv_jac.as_ref()],
        !diagnostics.is_empty(),
    );
    UniquenessReport {
        theorem,
        field: field.name().to_string(),
        foliation: describe(phi),
        p0: phi.base().clone(),
        transversality_value: value,
        normal_at_p0: normal,
        lip_f_phi,
        lip_inv_jac,
        verdict,
        params: *params,
        diagnostics,
    }
}

fn construction_failed(
    theorem: Theorem,
    field: String,
    p0: &Vector,
    params: &CheckParams,
    err: &dyn fmt::Display,
) -> UniquenessReport {
    UniquenessReport {
        theorem,
        field,
        foliation: "none".to_string(),
        p0: p0.clone(),
        transversality_value: None,
        normal_at_p0: None,
        lip_f_phi: None,
        lip_inv_jac: None,
        verdict: Verdict::Inconclusive,
        params: *params,
        diagnostics: vec![format!("foliation: {err}")],
    }
}

/// [`check_main`] with the identity foliation through `p0`.
pub fn check_cid(field: &VectorField, p0: &Vector, params: &CheckParams) -> UniquenessReport {
    match Foliation::identity(p0) {
        Ok(phi) => run_main(Theorem::Cid, field, &phi, params),
        Err(e) => construction_failed(Theorem::Cid, field.name().to_string(), p0, params, &e),
    }
}

/// [`check_main`] with leaves parallel to the hyperplane spanned by `basis`,
/// swept along its unit normal.
pub fn check_hyperplane(
    field: &VectorField,
    p0: &Vector,
    basis: &OrthonormalBasis,
    params: &CheckParams,
) -> UniquenessReport {
    match affine_foliation(p0, basis.normal(), basis) {
        Ok(phi) => run_main(Theorem::Hyperplane, field, &phi, params),
        Err(e) => construction_failed(
            Theorem::Hyperplane,
            field.name().to_string(),
            p0,
            params,
            &e,
        ),
    }
}

/// Planar check for `x' = f(t, x)` along a constant direction `u`.
///
/// The transversality value is `u₂ − f(t₀, x₀)·u₁`, the inner product of
/// `(1, f)` with the normal `(u₂, −u₁)`. The Lipschitz estimate
/// samples `|f(p) − f(p + k u)| / |k|` over the box of half-width
/// `params.radius` around `(t₀, x₀)`.
pub fn check_stettner_nowak(
    f: &ScalarMap,
    t0x0: &Vector,
    u: &Vector,
    params: &CheckParams,
) -> UniquenessReport {
    let mut diagnostics = Vec::new();
    let fail = |msg: String| UniquenessReport {
        theorem: Theorem::StettnerNowak,
        field: f.name().to_string(),
        foliation: format!("direction {u}"),
        p0: t0x0.clone(),
        transversality_value: None,
        normal_at_p0: None,
        lip_f_phi: None,
        lip_inv_jac: None,
        verdict: Verdict::Inconclusive,
        params: *params,
        diagnostics: vec![msg],
    };
    if f.dim() != 2 || t0x0.dim() != 2 || u.dim() != 2 {
        return fail("dimension: the condition is stated in the plane".to_string());
    }
    let speed = u.norm();
    if speed == 0.0 {
        return fail("direction: u is zero".to_string());
    }

    let value = match f.eval(t0x0) {
        Ok(f0) => Some(u[1] - f0 * u[0]),
        Err(e) => {
            diagnostics.push(format!("transversality: {e}"));
            None
        }
    };
    let domain = SampleDomain {
        pinned: 0,
        free: 2,
        shape: Shape::Box,
        radius: params.radius,
        direction: PairDirection::Fixed(u.clone()),
    };
    let g = |c: &[f64]| {
        let p = [t0x0[0] + c[0], t0x0[1] + c[1]];
        Ok(Vector::new(vec![f.eval(&p)?])?)
    };
    let lip = match sample_quotients(g, &domain, params.budget, params.seed) {
        Ok(s) => Some(LipschitzEstimate {
            constant: s.value * speed,
            region: params.radius,
            pairs_used: s.pairs_used,
            blowup: s.blowup,
            growth: s.growth(),
            strata: s.strata,
            seed: params.seed,
        }),
        Err(e) => {
            diagnostics.push(format!("f along u: {e}"));
            None
        }
    };
    let verdict = decide(
        value,
        params.threshold,
        &[lip.as_ref()],
        !diagnostics.is_empty(),
    );
    UniquenessReport {
        theorem: Theorem::StettnerNowak,
        field: f.name().to_string(),
        foliation: format!("direction {u}"),
        p0: t0x0.clone(),
        transversality_value: value,
        normal_at_p0: Some(Vector::new(vec![u[1], -u[0]]).expect("u is finite")),
        lip_f_phi: lip,
        lip_inv_jac: None,
        verdict,
        params: *params,
        diagnostics,
    }
}
