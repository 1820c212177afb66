//! Socle of `u_ρ(a,b)|·|^s ⋊ π` for every half-integral `s`, the
//! irreducibility test and the first reducible point.
//!
//! The regimes:
//!
//! * `s > (a-1)/2` or `s < -(b-1)/2`: one summand, obtained by inverting the
//!   composite highest derivatives that peel `u_ρ(a,b)|·|^s` off `π`.
//! * `0 < s ≤ (a-1)/2`: the summands `σ` of `u_ρ(a-2s,b) ⋊ π` surviving the
//!   image test, each contributing `soc(u_ρ(2s,b)|·|^{a/2} ⋊ σ)`.
//! * `-(b-1)/2 ≤ s < 0`: the same with `u_ρ(a,b+2s)` and `u_ρ(a,-2s)|·|^{-b/2}`.
//! * `s = 0`: the decomposition of the unitary induction.
//!
//! When the exponents of `u_ρ(a,b)|·|^s` lie off the good line of `ρ`, the
//! induction is irreducible and never touches the derivative machinery.

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::arthur::{build_pi, decompose_unitary, ExtendedMultiSegment, UnitaryDecomposition};
use crate::base::{is_good_parity, HalfInt};
use crate::clrep::ClDatum;
use crate::derivatives::{apply_trace, composite_socle, run_chain, speh_chains, DerivativeTrace};
use crate::error::{Error, Result};
use crate::glrep::SpehShape;

/// Which branch of [`socle`] produced the answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    LargeS,
    MiddlePos,
    MiddleNeg,
    Unitary,
    BadParityIrreducible,
}

/// The irreducible summands of a socle, pairwise distinct, in canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SocleResult {
    pub summands: Vec<ClDatum>,
    pub regime: Regime,
    /// Highest derivatives of `π` along the peeled Speh representation, when one was peeled.
    pub trace: Option<DerivativeTrace>,
}

impl SocleResult {
    pub fn is_irreducible(&self) -> bool {
        self.summands.len() == 1
    }
}

/// The representation being induced: an extended multi-segment (needed
/// in the middle range and at `s = 0`) or bare Langlands data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArthurRep {
    Multisegment { e: ExtendedMultiSegment },
    Datum { pi: ClDatum },
}

/// `u_ρ(a,b)|·|^s ⋊ π`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InductionProblem {
    pub u: SpehShape,
    pub pi: ArthurRep,
}

impl InductionProblem {
    /// Checks that `E` is valid and `π(E) ≠ 0`.
    pub fn new(u: SpehShape, e: ExtendedMultiSegment) -> Result<Self> {
        if build_pi(&e)?.is_none() {
            return Err(Error::Invalid(format!("pi({e}) vanishes")));
        }
        Ok(InductionProblem { u, pi: ArthurRep::Multisegment { e } })
    }

    /// `π` is taken to be of Arthur type; only the outer regimes can use it.
    pub fn from_datum(u: SpehShape, pi: ClDatum) -> Self {
        InductionProblem { u, pi: ArthurRep::Datum { pi } }
    }

    pub fn at(&self, s: HalfInt) -> Self {
        let mut out = self.clone();
        out.u.s = s;
        out
    }

    pub fn datum(&self) -> Result<ClDatum> {
        match &self.pi {
            ArthurRep::Datum { pi } => Ok(pi.clone()),
            ArthurRep::Multisegment { e } => {
                build_pi(e)?.ok_or_else(|| Error::Invalid(format!("pi({e}) vanishes")))
            }
        }
    }

    pub fn multisegment(&self) -> Result<&ExtendedMultiSegment> {
        match &self.pi {
            ArthurRep::Multisegment { e } => Ok(e),
            ArthurRep::Datum { .. } => Err(Error::Precondition(
                "this regime needs pi given by an extended multi-segment".into(),
            )),
        }
    }

    /// Exponents of `u_ρ(a,b)|·|^s` lie on the good line of `ρ`.
    fn on_good_line(&self) -> bool {
        self.u.rho.good_exponent(self.u.big_a() + self.u.s)
    }
}

/// `soc(u_ρ(a,b)|·|^s ⋊ π)`.
pub fn socle(problem: &InductionProblem) -> Result<SocleResult> {
    let u = &problem.u;
    let s2 = u.s.twice();
    if !problem.on_good_line() {
        return off_line_socle(problem);
    }
    if s2 > u.a as i64 - 1 || s2 < -(u.b as i64 - 1) {
        let pi = problem.datum()?;
        let (_, trace) = run_chain(&pi, &speh_chains(u)?)?;
        let out = composite_socle(&pi, u)?;
        return Ok(SocleResult { summands: vec![out], regime: Regime::LargeS, trace: Some(trace) });
    }
    if s2 == 0 {
        let e = problem.multisegment()?;
        let summands = match decompose_unitary(u, e)? {
            UnitaryDecomposition::Summands { summands } => summands.into_iter().map(|m| m.pi).collect(),
            UnitaryDecomposition::BadParity => unreachable!("good line at s = 0 means good parity"),
        };
        return Ok(finish(summands, Regime::Unitary, None));
    }
    let (companion, outer, regime) = middle_shapes(u)?;
    let e = problem.multisegment()?;
    let pi = problem.datum()?;
    let (_, trace) = run_chain(&pi, &speh_chains(&outer)?)?;
    let candidates = match decompose_unitary(&companion, e)? {
        UnitaryDecomposition::Summands { summands } => summands,
        UnitaryDecomposition::BadParity => {
            return Err(Error::Inconsistent(format!("companion u({},{}) has bad parity", companion.a, companion.b)))
        }
    };
    let mut summands = Vec::new();
    for member in candidates {
        if apply_trace(&member.pi, &trace)?.is_some() {
            summands.push(composite_socle(&member.pi, &outer)?);
        }
    }
    Ok(finish(summands, regime, Some(trace)))
}

/// For `s` in the middle range: the `s = 0` companion and the Speh
/// representation induced on top of it.
fn middle_shapes(u: &SpehShape) -> Result<(SpehShape, SpehShape, Regime)> {
    let s2 = u.s.twice();
    let (companion, outer, regime) = if s2 > 0 {
        let k = s2 as u32;
        (
            SpehShape::new(u.rho.clone(), u.a - k, u.b, HalfInt::ZERO)?,
            SpehShape::new(u.rho.clone(), k, u.b, HalfInt::from_twice(u.a as i64))?,
            Regime::MiddlePos,
        )
    } else {
        let k = (-s2) as u32;
        (
            SpehShape::new(u.rho.clone(), u.a, u.b - k, HalfInt::ZERO)?,
            SpehShape::new(u.rho.clone(), u.a, k, HalfInt::from_twice(-(u.b as i64)))?,
            Regime::MiddleNeg,
        )
    };
    // the outer shape sits beyond its own middle range, so its socle is a single inversion
    let o2 = outer.s.twice();
    assert!(o2 > outer.a as i64 - 1 || o2 < -(outer.b as i64 - 1), "inner induction landed in the middle range");
    Ok((companion, outer, regime))
}

/// Exponents off the good line: `u_ρ(a,b)|·|^s ⋊ π` is irreducible and,
/// for `|s| > (b-1)/2`, equals `u_ρ(a,b)|·|^{-|s|} ⋊ π`, whose segments all
/// have negative exponent and commute with everything in `π`.
fn off_line_socle(problem: &InductionProblem) -> Result<SocleResult> {
    let u = &problem.u;
    if u.s.abs().twice() < u.b as i64 {
        return Err(Error::Unsupported(format!(
            "u({},{})|.|^{} x pi is irreducible, but its Langlands data has segments of non-negative exponent off the good line",
            u.a, u.b, u.s
        )));
    }
    let pi = problem.datum()?;
    let neg = SpehShape::new(u.rho.clone(), u.a, u.b, -u.s.abs())?;
    let out = pi.with_gl(pi.gl().join(&neg.to_datum()))?;
    Ok(SocleResult { summands: vec![out], regime: Regime::BadParityIrreducible, trace: None })
}

fn finish(mut summands: Vec<ClDatum>, regime: Regime, trace: Option<DerivativeTrace>) -> SocleResult {
    summands.sort();
    let n = summands.len();
    summands.dedup();
    assert_eq!(n, summands.len(), "socle has a repeated summand");
    SocleResult { summands, regime, trace }
}

/// Whether `σ`, a summand of the `s = 0` companion induction, lies in the
/// image that contributes to the socle at `s` (middle range only).
///
/// The highest derivatives of `π` along the outer Speh representation are
/// recorded and the same fixed orders are applied to `σ`; `σ` passes when
/// the result is nonzero.
pub fn image_test(sigma: &ClDatum, problem: &InductionProblem) -> Result<bool> {
    let u = &problem.u;
    let s2 = u.s.twice();
    if s2 == 0 || s2 > u.a as i64 - 1 || s2 < -(u.b as i64 - 1) {
        return Err(Error::Precondition(format!("s = {} is outside the middle range", u.s)));
    }
    if !problem.on_good_line() {
        return Err(Error::Precondition("exponents lie off the good line".into()));
    }
    let (_, outer, _) = middle_shapes(u)?;
    let (_, trace) = run_chain(&problem.datum()?, &speh_chains(&outer)?)?;
    Ok(apply_trace(sigma, &trace)?.is_some())
}

/// `u_ρ(a,b)|·|^s ⋊ π` is irreducible iff both socles at `±s` are
/// irreducible and isomorphic.
pub fn is_irreducible(problem: &InductionProblem) -> Result<bool> {
    if irred_sufficient(problem)? == Verdict::Irreducible {
        return Ok(true);
    }
    let plus = socle(problem)?;
    if !plus.is_irreducible() {
        return Ok(false);
    }
    let minus = socle(&problem.at(-problem.u.s))?;
    Ok(minus.is_irreducible() && plus.summands == minus.summands)
}

/// Outcome of the cheap irreducibility criterion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Irreducible,
    Unknown,
}

/// [`irred_sufficient_at`] for the shift stored in the problem.
pub fn irred_sufficient(problem: &InductionProblem) -> Result<Verdict> {
    let s = Rational64::new(problem.u.s.twice(), 2);
    irred_sufficient_at(problem, s)
}

/// Irreducible when `s ∉ ½ℤ`, when `s ∈ ½ℤ ∖ ℤ` and `ψ ⊕ (ρ ⊠ S_a ⊠ S_b)^2`
/// has good parity, or when `s ∈ ℤ` and it does not. The shift stored in
/// `problem` is ignored.
pub fn irred_sufficient_at(problem: &InductionProblem, s: Rational64) -> Result<Verdict> {
    let twice = s * 2;
    if !twice.is_integer() {
        return Ok(Verdict::Irreducible);
    }
    let good = combined_good_parity(problem)?;
    let integral = s.is_integer();
    Ok(if integral != good { Verdict::Irreducible } else { Verdict::Unknown })
}

fn combined_good_parity(problem: &InductionProblem) -> Result<bool> {
    let u = &problem.u;
    let psi_good = match &problem.pi {
        ArthurRep::Multisegment { e } => e.psi()?.is_good_parity(),
        // Langlands data alone do not determine ψ; good parity of φ is what is checked
        ArthurRep::Datum { pi } => pi.phi().is_good_parity(),
    };
    Ok(psi_good && is_good_parity(&u.rho, u.a, u.b))
}

/// Smallest `s ≥ 0` with `u_ρ(a,b)|·|^s ⋊ π` reducible, or `None` if the scan
/// finds none. The shift stored in `problem` is ignored.
///
/// Only the residue class not settled by [`irred_sufficient_at`] is scanned.
/// Past `max{(a-1)/2, (b-1)/2}` both socles are single inversions; two
/// consecutive irreducible points there end the scan.
pub fn first_reducible_point(problem: &InductionProblem) -> Result<Option<HalfInt>> {
    let u = &problem.u;
    let start = if combined_good_parity(problem)? { HalfInt::ZERO } else { HalfInt::HALF };
    let bound = HalfInt::from_twice(u.a.max(u.b) as i64 - 1) + 1;
    let mut s = start;
    let mut quiet_past_bound = 0;
    loop {
        let here = problem.at(s);
        if irred_sufficient(&here)? == Verdict::Unknown && !is_irreducible(&here)? {
            return Ok(Some(s));
        }
        if s > bound {
            quiet_past_bound += 1;
            if quiet_past_bound == 2 {
                return Ok(None);
            }
        }
        s = s + 1;
    }
}
