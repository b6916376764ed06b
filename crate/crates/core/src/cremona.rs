//! Parametric linear systems in P^3 and the quadro-cubic Cremona reduction,
//! producing replayable emptiness certificates.
//!
//! A system `(d; m_1,...,m_n)` stands for the claim that some nonzero form of
//! degree `d` vanishes to order `m_j` at the j-th of `n` general points. A
//! Cremona step on four points sends it to `(d+k; m_1+k,...,m_4+k, rest)`
//! with `k = 2d - m_1 - m_2 - m_3 - m_4`, preserving nonemptiness. Chaining
//! steps into an absurd system (negative degree, or a multiplicity exceeding
//! the degree) certifies emptiness of the initial one.

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::forms::{AffineForm, Sign};

/// A parametric linear system in P^3: degree and multiplicities are affine
/// forms in the parameter `m`.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearSystem {
    pub d: AffineForm,
    pub mults: Vec<AffineForm>,
}

impl std::fmt::Debug for LinearSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}; ", self.d)?;
        for (i, m) in self.mults.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, ")")
    }
}

impl LinearSystem {
    pub fn new(d: AffineForm, mults: Vec<AffineForm>) -> Self {
        LinearSystem { d, mults }
    }

    /// Normal form: multiplicities sorted non-increasing by (slope, offset),
    /// entries that are <= 0 for all m >= m0 clipped to the zero form.
    /// Returns the threshold m0 from which the clipping is valid.
    pub fn normalize(&self) -> (LinearSystem, BigInt) {
        let mut m0 = BigInt::one();
        let mut mults: Vec<AffineForm> = self
            .mults
            .iter()
            .map(|f| match f.nonpositive_from() {
                Some(t) => {
                    m0 = m0.clone().max(t);
                    AffineForm::zero()
                }
                None => f.clone(),
            })
            .collect();
        mults.sort_by(|a, b| (&b.slope, &b.offset).cmp(&(&a.slope, &a.offset)));
        (LinearSystem { d: self.d.clone(), mults }, m0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Cremona,
    Hyperplane,
}

/// A recorded reduction step; `k` is recomputed and checked on replay.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionStep {
    pub kind: StepKind,
    pub indices: Vec<usize>,
    pub k: AffineForm,
}

/// A step request; indices `None` means "auto": the four (or three) largest
/// multiplicities of the current normalized system.
#[derive(Clone, Debug)]
pub struct ScriptStep {
    pub kind: StepKind,
    pub indices: Option<Vec<usize>>,
}

impl ScriptStep {
    pub fn cremona(indices: [usize; 4]) -> Self {
        ScriptStep { kind: StepKind::Cremona, indices: Some(indices.to_vec()) }
    }

    pub fn cremona_auto() -> Self {
        ScriptStep { kind: StepKind::Cremona, indices: None }
    }

    pub fn hyperplane(indices: [usize; 3]) -> Self {
        ScriptStep { kind: StepKind::Hyperplane, indices: Some(indices.to_vec()) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    NegativeDegree,
    MultExceedsDegree { index: usize },
}

/// Replayable proof that a parametric system is empty for all m >= m0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmptinessCertificate {
    pub v: u32,
    pub initial: LinearSystem,
    pub steps: Vec<ReductionStep>,
    pub intermediates: Vec<LinearSystem>,
    pub witness: Witness,
    pub m0: u64,
}

fn check_indices(len: usize, indices: &[usize], want: usize) -> Result<(), Error> {
    if indices.len() != want {
        return Err(Error::Cremona(format!("expected {want} indices, got {}", indices.len())));
    }
    for (i, &a) in indices.iter().enumerate() {
        if a >= len {
            return Err(Error::Cremona(format!("index {a} out of range for {len} slots")));
        }
        if indices[..i].contains(&a) {
            return Err(Error::Cremona(format!("duplicate index {a}")));
        }
    }
    Ok(())
}

/// One Cremona step on the four selected points. The input is padded with
/// zero multiplicities up to 4 slots. Returns the normalized result, the
/// computed `k`, and the clipping threshold.
pub fn cremona_step(
    sys: &LinearSystem,
    indices: &[usize],
) -> Result<(LinearSystem, AffineForm, BigInt), Error> {
    let mut mults = sys.mults.clone();
    while mults.len() < 4 {
        mults.push(AffineForm::zero());
    }
    check_indices(mults.len(), indices, 4)?;
    let mut k = sys.d.scale(2);
    for &i in indices {
        k = k.sub(&mults[i]);
    }
    for &i in indices {
        mults[i] = mults[i].add(&k);
    }
    let raw = LinearSystem::new(sys.d.add(&k), mults);
    let (normalized, m0) = raw.normalize();
    Ok((normalized, k, m0))
}

/// Hyperplane-factor step on three selected points: with
/// `l = 2d - m_a - m_b - m_c < 0` for all m >= m0, every member of the
/// system is divisible by the l-th power of the plane through the three
/// points, leaving a system of degree `d + l` with those three
/// multiplicities reduced by `-l`.
pub fn hyperplane_step(
    sys: &LinearSystem,
    indices: &[usize],
) -> Result<(LinearSystem, AffineForm, BigInt), Error> {
    let mut mults = sys.mults.clone();
    while mults.len() < 3 {
        mults.push(AffineForm::zero());
    }
    check_indices(mults.len(), indices, 3)?;
    let mut ell = sys.d.scale(2);
    for &i in indices {
        ell = ell.sub(&mults[i]);
    }
    let neg_from = ell.sign_from(Sign::Negative).ok_or_else(|| {
        Error::Cremona(format!("hyperplane step requires l < 0 eventually; l = {ell}"))
    })?;
    for &i in indices {
        mults[i] = mults[i].add(&ell);
    }
    let raw = LinearSystem::new(sys.d.add(&ell), mults);
    let (normalized, clip_m0) = raw.normalize();
    Ok((normalized, ell, neg_from.max(clip_m0)))
}

/// Looks for an absurdity in a normalized system: degree negative for all
/// m >= m0, or some multiplicity exceeding the degree for all m >= m0.
/// Among applicable witnesses the one with minimal m0 is returned
/// (negative degree preferred on ties).
pub fn detect_contradiction(sys: &LinearSystem) -> Option<(Witness, BigInt)> {
    let mut best: Option<(Witness, BigInt)> = None;
    let mut consider = |w: Witness, m0: BigInt| match &best {
        Some((_, cur)) if *cur <= m0 => {}
        _ => best = Some((w, m0)),
    };
    if let Some(m0) = sys.d.sign_from(Sign::Negative) {
        consider(Witness::NegativeDegree, m0);
    }
    for (i, mult) in sys.mults.iter().enumerate() {
        if let Some(m0) = mult.sub(&sys.d).sign_from(Sign::Positive) {
            consider(Witness::MultExceedsDegree { index: i }, m0);
        }
    }
    best
}

/// Applies a script of reduction steps and certifies the contradiction on the
/// final system. Every intermediate system is recorded for replay.
pub fn run_script(initial: &LinearSystem, steps: &[ScriptStep]) -> Result<EmptinessCertificate, Error> {
    let (mut sys, mut m0) = initial.normalize();
    let mut recorded = Vec::with_capacity(steps.len());
    let mut intermediates = Vec::with_capacity(steps.len());
    for step in steps {
        let want = match step.kind {
            StepKind::Cremona => 4,
            StepKind::Hyperplane => 3,
        };
        let indices: Vec<usize> = match &step.indices {
            Some(idx) => idx.clone(),
            // auto: largest multiplicities come first after normalization
            None => (0..want).collect(),
        };
        let (next, k, step_m0) = match step.kind {
            StepKind::Cremona => cremona_step(&sys, &indices)?,
            StepKind::Hyperplane => hyperplane_step(&sys, &indices)?,
        };
        recorded.push(ReductionStep { kind: step.kind, indices, k });
        intermediates.push(next.clone());
        m0 = m0.max(step_m0);
        sys = next;
    }
    let (witness, wit_m0) =
        detect_contradiction(&sys).ok_or_else(|| Error::NoContradiction(format!("{sys:?}")))?;
    m0 = m0.max(wit_m0);
    let m0: u64 = m0.try_into().map_err(|_| Error::Cremona("m0 out of range".into()))?;
    Ok(EmptinessCertificate {
        v: 1,
        initial: initial.clone(),
        steps: recorded,
        intermediates,
        witness,
        m0,
    })
}

/// Standalone verifier: replays the steps, recomputing every `k` and every
/// intermediate system, and rechecks the witness and the threshold m0.
pub fn verify_certificate(cert: &EmptinessCertificate) -> Result<(), Error> {
    if cert.v != 1 {
        return Err(Error::BadCertificate(format!("unknown schema version {}", cert.v)));
    }
    if cert.steps.len() != cert.intermediates.len() {
        return Err(Error::BadCertificate("steps/intermediates length mismatch".into()));
    }
    let (mut sys, mut m0) = cert.initial.normalize();
    for (step, expected) in cert.steps.iter().zip(&cert.intermediates) {
        let (next, k, step_m0) = match step.kind {
            StepKind::Cremona => cremona_step(&sys, &step.indices)?,
            StepKind::Hyperplane => hyperplane_step(&sys, &step.indices)?,
        };
        if k != step.k {
            return Err(Error::BadCertificate(format!(
                "recorded k = {} but recomputed k = {k}",
                step.k
            )));
        }
        if next != *expected {
            return Err(Error::BadCertificate(format!(
                "intermediate mismatch: recorded {expected:?}, recomputed {next:?}"
            )));
        }
        m0 = m0.max(step_m0);
        sys = next;
    }
    let (witness, wit_m0) = detect_contradiction(&sys)
        .ok_or_else(|| Error::BadCertificate(format!("final system {sys:?} is not absurd")))?;
    if witness != cert.witness {
        return Err(Error::BadCertificate(format!(
            "witness mismatch: recorded {:?}, found {witness:?}",
            cert.witness
        )));
    }
    let m0 = m0.max(wit_m0);
    if m0 != BigInt::from(cert.m0) {
        return Err(Error::BadCertificate(format!(
            "m0 mismatch: recorded {}, recomputed {m0}",
            cert.m0
        )));
    }
    Ok(())
}

/// A certified statement `alpha(I(seq)^(a*m)) >= c*m` for all m >= m0,
/// obtained from emptiness of `(c*m - 1; a*m*seq)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphaBound {
    pub seq: Vec<u64>,
    pub a: u64,
    pub c: u64,
    pub m0: u64,
    pub certificate: EmptinessCertificate,
}

/// Builds the system `(c*m - 1; a*m_1*m, ..., a*m_n*m)` and certifies its
/// emptiness with the given script.
pub fn prove_alpha_bound(
    seq: &[u64],
    a: u64,
    c: u64,
    steps: &[ScriptStep],
) -> Result<AlphaBound, Error> {
    let d = AffineForm::new(c as i64, -1);
    let mults = seq
        .iter()
        .map(|&mj| AffineForm::new(BigInt::from(a) * BigInt::from(mj), BigInt::from(0)))
        .collect();
    let cert = run_script(&LinearSystem::new(d, mults), steps)?;
    Ok(AlphaBound { seq: seq.to_vec(), a, c, m0: cert.m0, certificate: cert })
}

pub fn verify_alpha_bound(ab: &AlphaBound) -> Result<(), Error> {
    verify_certificate(&ab.certificate)?;
    let cert = &ab.certificate;
    let d = AffineForm::new(ab.c as i64, -1);
    if cert.initial.d != d {
        return Err(Error::BadCertificate("alpha bound degree does not match certificate".into()));
    }
    let mut expected: Vec<AffineForm> = ab
        .seq
        .iter()
        .map(|&mj| AffineForm::new(BigInt::from(ab.a) * BigInt::from(mj), BigInt::from(0)))
        .collect();
    let mut got = cert.initial.mults.clone();
    expected.sort();
    got.sort();
    if expected != got {
        return Err(Error::BadCertificate("alpha bound mults do not match certificate".into()));
    }
    if cert.m0 != ab.m0 {
        return Err(Error::BadCertificate("alpha bound m0 mismatch".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn af(a: i64, b: i64) -> AffineForm {
        AffineForm::new(a, b)
    }

    fn sys(d: (i64, i64), mults: &[(i64, i64)]) -> LinearSystem {
        LinearSystem::new(af(d.0, d.1), mults.iter().map(|&(a, b)| af(a, b)).collect())
    }

    #[test]
    fn cremona_step_glue_base() {
        // (2m-1; m^8), indices 0..4 -> k = -2, (2m-3; m^4, (m-2)^4)
        let s = sys((2, -1), &[(1, 0); 8]);
        let (next, k, _) = cremona_step(&s, &[0, 1, 2, 3]).unwrap();
        assert_eq!(k, af(0, -2));
        assert_eq!(next.d, af(2, -3));
        let mut expected: Vec<AffineForm> = vec![af(1, 0); 4];
        expected.extend(vec![af(1, -2); 4]);
        assert_eq!(next.mults, expected);
    }

    #[test]
    fn cremona_step_gammas5_clips() {
        // (8m-1; 6m,6m,6m,3m,3m) -> k = -5m-2, (3m-3; 3m, (m-2)^3, 0)
        let s = sys((8, -1), &[(6, 0), (6, 0), (6, 0), (3, 0), (3, 0)]);
        let (next, k, m0) = cremona_step(&s, &[0, 1, 2, 3]).unwrap();
        assert_eq!(k, af(-5, -2));
        assert_eq!(next.d, af(3, -3));
        assert_eq!(next.mults, vec![af(3, 0), af(1, -2), af(1, -2), af(1, -2), af(0, 0)]);
        assert_eq!(m0, 1.into());
    }

    #[test]
    fn cremona_step_fixed_point() {
        let s = sys((0, 0), &[(0, 0); 4]);
        let (next, k, _) = cremona_step(&s, &[0, 1, 2, 3]).unwrap();
        assert_eq!(k, AffineForm::zero());
        assert_eq!(next, s);
    }

    #[test]
    fn cremona_rejects_duplicates() {
        let s = sys((2, -1), &[(1, 0); 8]);
        assert!(cremona_step(&s, &[0, 1, 2, 2]).is_err());
    }

    #[test]
    fn degree_bookkeeping_invariant() {
        // new degree - old degree = k for every step
        let s = sys((23, -1), &[(18, 0), (18, 0), (9, 0), (9, 0), (9, 0), (9, 0), (9, 0), (9, 0), (9, 0), (9, 0)]);
        let (next, k, _) = cremona_step(&s, &[0, 1, 2, 3]).unwrap();
        assert_eq!(next.d, s.d.add(&k));
    }

    #[test]
    fn detect_contradiction_examples() {
        let s = sys((0, -3), &[(0, 0); 4]);
        assert_eq!(detect_contradiction(&s), Some((Witness::NegativeDegree, 1.into())));

        let s = sys((3, -3), &[(3, 0), (1, -2), (1, -2), (1, -2), (0, 0)]);
        assert_eq!(
            detect_contradiction(&s),
            Some((Witness::MultExceedsDegree { index: 0 }, 1.into()))
        );

        let s = sys((2, -3), &[(1, -2); 8]);
        assert_eq!(detect_contradiction(&s), None);
    }

    #[test]
    fn run_script_gammas2() {
        // (4m-1; (3m)^4) -> k = -4m-2 -> (-3; 0^4)
        let cert = run_script(&sys((4, -1), &[(3, 0); 4]), &[ScriptStep::cremona([0, 1, 2, 3])])
            .unwrap();
        assert_eq!(cert.steps[0].k, af(-4, -2));
        assert_eq!(cert.intermediates[0].d, af(0, -3));
        assert_eq!(cert.witness, Witness::NegativeDegree);
        assert_eq!(cert.m0, 1);
        verify_certificate(&cert).unwrap();
    }

    #[test]
    fn run_script_gammas6() {
        let cert = run_script(
            &sys((7, -1), &[(6, 0), (6, 0), (3, 0), (3, 0), (3, 0)]),
            &[ScriptStep::cremona([0, 1, 2, 3])],
        )
        .unwrap();
        let fin = cert.intermediates.last().unwrap();
        assert_eq!(fin.d, af(3, -3));
        assert_eq!(fin.mults, vec![af(3, 0), af(2, -2), af(2, -2), af(0, 0), af(0, 0)]);
        assert_eq!(cert.witness, Witness::MultExceedsDegree { index: 0 });
        verify_certificate(&cert).unwrap();
    }

    #[test]
    fn run_script_gammas4_recomputed_chain() {
        // two auto steps from (23m-1; 18m,18m,(9m)^8)
        let mut mults = vec![(18, 0), (18, 0)];
        mults.extend(vec![(9, 0); 8]);
        let cert = run_script(
            &sys((23, -1), &mults),
            &[ScriptStep::cremona_auto(), ScriptStep::cremona_auto()],
        )
        .unwrap();
        // recomputed intermediate carries 10m-2, not the printed 11m-2
        assert!(cert.intermediates[0].mults.contains(&af(10, -2)));
        assert!(!cert.intermediates[0].mults.contains(&af(11, -2)));
        let fin = cert.intermediates.last().unwrap();
        assert_eq!(fin.d, af(7, -5));
        assert_eq!(fin.mults[0], af(9, 0));
        assert_eq!(cert.witness, Witness::MultExceedsDegree { index: 0 });
        assert_eq!(cert.m0, 1);
        verify_certificate(&cert).unwrap();
    }

    #[test]
    fn run_script_fails_without_contradiction() {
        let err = run_script(&sys((2, -3), &[(1, -2); 8]), &[]).unwrap_err();
        assert!(matches!(err, Error::NoContradiction(_)));
    }

    #[test]
    fn tampered_k_rejected() {
        let cert = run_script(&sys((4, -1), &[(3, 0); 4]), &[ScriptStep::cremona([0, 1, 2, 3])])
            .unwrap();
        let mut bad = cert.clone();
        bad.steps[0].k = af(-4, -1);
        assert!(verify_certificate(&bad).is_err());
        let mut bad = cert.clone();
        bad.intermediates[0].d = af(0, -2);
        assert!(verify_certificate(&bad).is_err());
        let mut bad = cert;
        bad.m0 = 2;
        assert!(verify_certificate(&bad).is_err());
    }

    #[test]
    fn hyperplane_step_requires_negative_ell() {
        // l = 2d - m1 - m2 - m3 must be negative for all m >= m0
        let s = sys((1, 0), &[(1, 0), (1, 0), (1, 0), (1, 0)]);
        // l = 2m - 3m = -m < 0 for m >= 1
        let (next, ell, m0) = hyperplane_step(&s, &[0, 1, 2]).unwrap();
        assert_eq!(ell, af(-1, 0));
        assert_eq!(m0, 1.into());
        assert_eq!(next.d, af(0, 0));
        // positive l rejected
        let s = sys((5, 0), &[(1, 0), (1, 0), (1, 0)]);
        assert!(hyperplane_step(&s, &[0, 1, 2]).is_err());
    }

    #[test]
    fn alpha_bound_gammas3() {
        let ab = prove_alpha_bound(&[1, 1, 1, 1, 1], 3, 5, &[ScriptStep::cremona([0, 1, 2, 3])])
            .unwrap();
        assert_eq!(ab.m0, 1);
        verify_alpha_bound(&ab).unwrap();
        let fin = ab.certificate.intermediates.last().unwrap();
        assert_eq!(fin.d, af(3, -3));
        assert_eq!(fin.mults[0], af(3, 0));
    }
}
