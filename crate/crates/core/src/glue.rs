//! The fully parametric induction behind the gluing bound
//! `alpha(I(m^x8)) >= 2m`: starting from a hypothetical element of degree
//! `2m-1` through eight points of multiplicity `m`, two Cremona steps per
//! round produce, for every `s >= 0`, an element of degree `2m-(8s^2+1)` in
//! `I((m-(4s^2-2s))^x4, (m-(4s^2+2s))^x4)`, which is absurd for `s = m`.
//! All round identities are checked exactly in Z[m, s].

use num_bigint::BigInt;

use crate::error::Error;
use crate::forms::{poly_sign_all_m, BivariatePoly};

/// The verified induction data. Holding a value of this type means every
/// identity below has been recomputed and found to vanish exactly.
#[derive(Clone, Debug)]
pub struct GlueInductionProof {
    /// degree after round s: 2m - (8s^2 + 1)
    pub claim_degree: BivariatePoly,
    /// first four multiplicities: m - (4s^2 - 2s)
    pub claim_mult_a: BivariatePoly,
    /// remaining four multiplicities: m - (4s^2 + 2s)
    pub claim_mult_b: BivariatePoly,
    /// k of the first step in round s: -8s - 2
    pub step1_k: BivariatePoly,
    /// k of the second step in round s: -8s - 6
    pub step2_k: BivariatePoly,
}

fn ident(stage: &str, got: &BivariatePoly, want: &BivariatePoly) -> Result<(), Error> {
    let diff = got.sub(want);
    if diff.is_zero() {
        Ok(())
    } else {
        Err(Error::GlueIdentity { stage: stage.to_string(), diff: format!("{diff:?}") })
    }
}

/// Verifies the whole induction and returns its data.
pub fn prove_glue_base() -> Result<GlueInductionProof, Error> {
    let m = BivariatePoly::var_m();
    let s = BivariatePoly::var_s();
    let s2 = s.mul(&s);
    let c = BivariatePoly::constant;

    // claimed shapes as polynomials in (m, s)
    let degree = m.scale(2).sub(&s2.scale(8)).sub(&c(1));
    let mult_a = m.clone().sub(&s2.scale(4)).add(&s.scale(2));
    let mult_b = m.clone().sub(&s2.scale(4)).sub(&s.scale(2));

    // base case s = 0 must be (2m - 1; m^x8)
    let zero = c(0);
    ident("base degree", &degree.subst_s(&zero), &m.scale(2).sub(&c(1)))?;
    ident("base mult a", &mult_a.subst_s(&zero), &m)?;
    ident("base mult b", &mult_b.subst_s(&zero), &m)?;

    // step 1: k = 2*degree - 4*mult_a must equal -8s - 2
    let k1 = degree.scale(2).sub(&mult_a.scale(4));
    ident("step-1 k", &k1, &s.scale(-8).sub(&c(2)))?;
    let degree_mid = degree.add(&k1);
    ident(
        "mid degree",
        &degree_mid,
        &m.scale(2).sub(&s2.scale(8)).sub(&s.scale(8)).sub(&c(3)),
    )?;

    // the transformed first four multiplicities advance one round
    let s_next = s.add(&c(1));
    ident("mult a advance", &mult_a.add(&k1), &mult_a.subst_s(&s_next))?;

    // step 2: k = 2*degree_mid - 4*mult_b must equal -8s - 6
    let k2 = degree_mid.scale(2).sub(&mult_b.scale(4));
    ident("step-2 k", &k2, &s.scale(-8).sub(&c(6)))?;
    ident("degree advance", &degree_mid.add(&k2), &degree.subst_s(&s_next))?;
    ident("mult b advance", &mult_b.add(&k2), &mult_b.subst_s(&s_next))?;

    // termination: at s = m the degree is 2m - 8m^2 - 1 < 0 for all m >= 1,
    // i.e. 8m^2 - 2m + 1 > 0
    let at_s_eq_m = degree.subst_s(&m);
    let negated = at_s_eq_m.neg();
    if !poly_sign_all_m(&negated, &BigInt::from(1))? {
        return Err(Error::GlueIdentity {
            stage: "termination".into(),
            diff: format!("{negated:?} not positive for all m >= 1"),
        });
    }

    Ok(GlueInductionProof {
        claim_degree: degree,
        claim_mult_a: mult_a,
        claim_mult_b: mult_b,
        step1_k: k1,
        step2_k: k2,
    })
}
