//! Property bodies shared by the proptest suite and the seeded acceptance
//! sampler. Each returns `Ok(true)` when the case was checked, `Ok(false)`
//! when it falls outside the property's domain.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use socle::arthur::{
    build_pi_padded, decompose_unitary, packet_of, ExtendedMultiSegment, PullbackOrder, UnitaryDecomposition,
};
use socle::base::is_good_parity;
use socle::clrep::{AParameter, ASummand, ClDatum};
use socle::derivatives::{d_max, d_max_cuspidal, soc, DerivativeKind};
use socle::engine::{first_reducible_point, is_irreducible, socle, InductionProblem, Regime};
use socle::glrep::SpehShape;
use socle::{CuspidalLabel, GroupKind, HalfInt};

use super::data::{all_data, good_dims, labels, negative_segments, nonzero_members};

pub type Outcome = Result<bool, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

pub fn data_pool(parity: u8) -> &'static [ClDatum] {
    static POOLS: [OnceLock<Vec<ClDatum>>; 2] = [OnceLock::new(), OnceLock::new()];
    POOLS[parity as usize].get_or_init(|| {
        let rho = labels()[parity as usize].clone();
        all_data(&rho, &negative_segments(&rho, (-7, 7), -9), &good_dims(&rho, 9), 12)
    })
}

pub fn members(parity: u8) -> &'static [(ExtendedMultiSegment, ClDatum)] {
    static POOLS: [OnceLock<Vec<(ExtendedMultiSegment, ClDatum)>>; 2] = [OnceLock::new(), OnceLock::new()];
    POOLS[parity as usize].get_or_init(|| {
        let (kind, max_a2) = if parity == 0 { (GroupKind::Sp, 5) } else { (GroupKind::SoOdd, 3) };
        nonzero_members(&labels()[parity as usize], kind, 3, max_a2)
    })
}

/// Number of kinds available for a parity: three positive and three negative
/// cuspidal exponents, plus `Δ[0,-1]` and `Z[0,1]` for integral labels.
pub fn kind_count(parity: u8) -> usize {
    if parity == 0 {
        8
    } else {
        6
    }
}

/// A kind on the good line of the label with the given parity; index 6 and 7
/// select the `Δ[0,-1]` and `Z[0,1]` kinds for integral labels.
pub fn kind(parity: u8, idx: usize) -> DerivativeKind {
    let rho = labels()[parity as usize].clone();
    match (parity, idx) {
        (0, 6) => DerivativeKind::DeltaZeroMinusOne { rho },
        (0, 7) => DerivativeKind::ZZeroOne { rho },
        _ => {
            let k = (idx % 3) as i64 + 1;
            let x = HalfInt::from_twice(2 * k - parity as i64);
            DerivativeKind::cuspidal(&rho, if idx < 3 { x } else { -x }).unwrap()
        }
    }
}

/// `π` lies in the domain of the kind: the `Δ[0,-1]` and `Z[0,1]` formulas
/// need `π` reduced at `ρ|·|^{-1}` and `ρ|·|^1` respectively.
pub fn in_domain(pi: &ClDatum, kind: &DerivativeKind) -> bool {
    let reduced_at = |x: i64| d_max_cuspidal(pi, kind.rho(), HalfInt::int(x)).unwrap().1 == 0;
    match kind {
        DerivativeKind::Cuspidal { .. } => true,
        DerivativeKind::DeltaZeroMinusOne { .. } => reduced_at(-1),
        DerivativeKind::ZZeroOne { .. } => reduced_at(1),
    }
}

pub fn socle_then_derivative(parity: u8, idx: usize, i: usize, r: u32) -> Outcome {
    let kind = kind(parity, idx);
    let pool = data_pool(parity);
    let pi = &pool[i % pool.len()];
    if !in_domain(pi, &kind) {
        return Ok(false);
    }
    let (base, k) = d_max(pi, &kind).map_err(|e| e.to_string())?;
    let reduced = if k == 0 { pi.clone() } else { base };
    let up = soc(&reduced, &kind, r).map_err(|e| e.to_string())?;
    let back = d_max(&up, &kind).map_err(|e| e.to_string())?;
    ensure!(back == (reduced.clone(), r), "{kind:?}^{r} on {reduced}: got {} with k = {}", back.0, back.1);
    Ok(true)
}

pub fn derivative_then_socle(parity: u8, idx: usize, i: usize) -> Outcome {
    let kind = kind(parity, idx);
    let pool = data_pool(parity);
    let pi = &pool[i % pool.len()];
    if !in_domain(pi, &kind) {
        return Ok(false);
    }
    let (d, k) = d_max(pi, &kind).map_err(|e| e.to_string())?;
    let up = soc(&d, &kind, k).map_err(|e| e.to_string())?;
    ensure!(&up == pi, "{kind:?} on {pi}: socle gave {up}");
    Ok(true)
}

/// Highest derivatives at `x` and `y` commute when the exponents are distinct,
/// nonzero and not adjacent. At `x = -y` both orders land on the same
/// representation but the split of the total order between the steps moves.
pub fn commutation(parity: u8, i: usize, x2: i64, y2: i64) -> Outcome {
    let rho = labels()[parity as usize].clone();
    let snap = |v: i64| if (v - parity as i64).rem_euclid(2) == 0 { v } else { v + 1 };
    let (x, y) = (HalfInt::from_twice(snap(x2)), HalfInt::from_twice(snap(y2)));
    if x == HalfInt::ZERO || y == HalfInt::ZERO || x == y || (x - y).abs() == HalfInt::ONE {
        return Ok(false);
    }
    let pool = data_pool(parity);
    let pi = &pool[i % pool.len()];
    let step = |p: &ClDatum, z| d_max_cuspidal(p, &rho, z).map_err(|e| e.to_string());
    let (a, ka) = step(pi, x)?;
    let (ab, kab) = step(&a, y)?;
    let (b, kb) = step(pi, y)?;
    let (ba, kba) = step(&b, x)?;
    ensure!(ab == ba, "{pi} at ({x}, {y}): {ab} vs {ba}");
    if x == -y {
        ensure!(ka + kab == kb + kba, "{pi} at ({x}, {y}): total orders differ");
    } else {
        ensure!((ka, kab) == (kba, kb), "{pi} at ({x}, {y}): orders differ");
    }
    Ok(true)
}

pub fn len_bound(parity: u8, i: usize, a: u32, b: u32) -> Outcome {
    let pool = members(parity);
    let (e, _) = &pool[i % pool.len()];
    let u = SpehShape::new(labels()[parity as usize].clone(), a, b, HalfInt::ZERO).map_err(|e| e.to_string())?;
    let n = decompose_unitary(&u, e).map_err(|e| e.to_string())?.len() as u32;
    ensure!(n >= 1 && n <= a.min(b) + 1, "u({a},{b}) ⋊ π({e}): {n} summands");
    Ok(true)
}

/// Pure pairs `(ρ ⊠ S_a ⊠ S_b)^2` for a half-integral label of orthogonal type
/// have exactly `min(a,b) + 1` members, and every member rebuilds from its
/// multi-segment after padding. Returns the number of parameters checked.
pub fn pair_packets(max: u32) -> Result<usize, String> {
    let rho = CuspidalLabel::new("rho", 1, 1);
    let mut checked = 0;
    for a in 1..=max {
        for b in 1..=max {
            if !is_good_parity(&rho, a, b) {
                continue;
            }
            let pair = vec![ASummand { rho: rho.clone(), a, b }, ASummand { rho: rho.clone(), a, b }];
            let psi = AParameter::with_kind(pair, GroupKind::SoOdd).map_err(|e| e.to_string())?;
            let members = packet_of(&psi).map_err(|e| e.to_string())?;
            ensure!(members.len() as u32 == a.min(b) + 1, "({a},{b}): {} members", members.len());
            for m in &members {
                for pad in 1..=2 {
                    let p = build_pi_padded(&m.e, PullbackOrder::BottomUp, pad).map_err(|e| e.to_string())?;
                    ensure!(p.as_ref() == Some(&m.pi), "{} with padding {pad}", m.e);
                }
            }
            checked += 1;
        }
    }
    Ok(checked)
}

pub fn engine_regimes(parity: u8, i: usize, a: u32, b: u32, s2: i64) -> Outcome {
    let rho: CuspidalLabel = labels()[parity as usize].clone();
    let pool = members(parity);
    let (e, _) = &pool[i % pool.len()];
    let s = HalfInt::from_twice(s2);
    let err = |e: socle::Error| e.to_string();
    let p = InductionProblem::new(SpehShape::new(rho.clone(), a, b, s).map_err(err)?, e.clone()).map_err(err)?;
    let Ok(r) = socle(&p) else {
        // only the off-line middle range is left uncomputed
        ensure!(
            !rho.good_exponent(p.u.big_a() + s) && s.abs().twice() < b as i64,
            "socle failed outside the off-line middle range"
        );
        return Ok(true);
    };
    let mut dedup = r.summands.clone();
    dedup.dedup();
    ensure!(dedup.len() == r.summands.len(), "repeated summand");
    let n = r.summands.len() as u32;
    match r.regime {
        Regime::LargeS | Regime::BadParityIrreducible => ensure!(n == 1, "{n} summands in {:?}", r.regime),
        Regime::Unitary => {
            let m = decompose_unitary(&p.u, e).map_err(err)?;
            ensure!(!matches!(m, UnitaryDecomposition::BadParity), "bad parity at s = 0");
            ensure!(n as usize == m.len(), "{n} vs {} summands", m.len());
        }
        Regime::MiddlePos | Regime::MiddleNeg => {
            let k = s2.unsigned_abs() as u32;
            let (ca, cb) = if s2 > 0 { (a - k, b) } else { (a, b - k) };
            let c = SpehShape::new(rho.clone(), ca, cb, HalfInt::ZERO).map_err(err)?;
            let m = decompose_unitary(&c, e).map_err(err)?.len() as u32;
            ensure!(n >= 1 && n <= m && m <= ca.min(cb) + 1, "{n} summands against {m} at the companion");
        }
    }
    ensure!(
        is_irreducible(&p).map_err(err)? == is_irreducible(&p.at(-s)).map_err(err)?,
        "irreducibility differs at ±{s}"
    );
    Ok(true)
}

pub fn first_reducible_point_at_zero(parity: u8, i: usize, a: u32, b: u32) -> Outcome {
    let rho = labels()[parity as usize].clone();
    let pool = members(parity);
    let (e, _) = &pool[i % pool.len()];
    let err = |e: socle::Error| e.to_string();
    let u = SpehShape::new(rho, a, b, HalfInt::ZERO).map_err(err)?;
    let reducible = decompose_unitary(&u, e).map_err(err)?.len() >= 2;
    let p = InductionProblem::new(u, e.clone()).map_err(err)?;
    let frp = first_reducible_point(&p).map_err(err)?;
    ensure!((frp == Some(HalfInt::ZERO)) == reducible, "first reducible point {frp:?}");
    Ok(true)
}

/// Draws cases from a seeded generator until `target` of them land in the
/// property's domain. Returns the number of draws.
pub fn sample(seed: u64, target: usize, mut case: impl FnMut(&mut ChaCha8Rng) -> Outcome) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut hits, mut draws) = (0, 0);
    while hits < target {
        draws += 1;
        if draws > 50 * target {
            return Err(format!("only {hits} of {target} cases in domain after {draws} draws"));
        }
        if case(&mut rng)? {
            hits += 1;
        }
    }
    Ok(draws)
}

/// The kind indices drawn for round trips: integral labels get the
/// `Δ[0,-1]` and `Z[0,1]` kinds a quarter of the time each.
pub fn draw_kind(rng: &mut ChaCha8Rng) -> (u8, usize) {
    let parity = rng.gen_range(0..2u8);
    if parity == 0 && rng.gen_bool(0.5) {
        (0, rng.gen_range(6..kind_count(0)))
    } else {
        (parity, rng.gen_range(0..6))
    }
}
