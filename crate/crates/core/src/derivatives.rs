//! Highest derivatives of representations of `G_n` and the matching socles.
//!
//! Three kinds of derivative are supported: `D_{ρ|·|^x}` for `x ≠ 0`, the
//! `Δ_ρ[0,-1]`-derivative and the `Z_ρ[0,1]`-derivative. Composite
//! derivatives along a segment splice in the last two kinds where the
//! segment passes through `ρ`.
//!
//! # Positive exponents
//!
//! For `x > 0` the derivative interacts with the tempered part. The rule
//! used here matches the `ρ`-pieces of `π` in a symmetric picture where each
//! segment of the Langlands data also contributes its contragredient.
//! Pieces able to lose `ρ|·|^x` from the top:
//!
//! * `L`: segments `[x, y]`;
//! * `R`: segments `[x_i, -x]` with `x_i < x - 1` (their duals end at `x`);
//! * `T`: copies of `ρ ⊠ S_{2x+1}`.
//!
//! Pieces with top `x - 1` block them, taken greedily by decreasing bottom:
//! segments `[x_j, -x+1]` block `R`, copies of `ρ ⊠ S_{2x-1}` block `R`,
//! each `P = Δ[x-1, -x]` blocks its own dual, and segments `[x-1, y']`
//! block `L`, then `T`, then `R`. Unblocked `L` and `R` lose one exponent
//! each. The free copies of `S_{2x+1}` are handled together with
//! `S_{2x-1}` and `P` so that the character stays valid; `δ` below records
//! whether one copy of `S_{2x-1}` is tied up with them.
//!
//! This rule reproduces the closed formula for the special shape
//! `L((ρ|·|^{-1})^s, Δ_ρ[0,-1]^t; π(φ, ε))` at `x = 1` and every worked
//! example in the test suite. The branch `x = 1/2`, where `S_{2x-1}` is
//! empty, is not covered by those examples and should be treated as
//! unverified.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::base::{CuspidalLabel, HalfInt, Segment};
use crate::clrep::{ClDatum, Summand, TemperedTable};
use crate::error::{Error, Result};
use crate::glrep::{
    delta01_socle, left_delta01_derivative_max, left_derivative_max, left_socle, left_z01_derivative_max,
    z01_socle, GlDatum, SpehShape,
};

/// A kind of derivative.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DerivativeKind {
    /// `D_{ρ|·|^x}` with `x ≠ 0`.
    Cuspidal { rho: CuspidalLabel, x: HalfInt },
    DeltaZeroMinusOne { rho: CuspidalLabel },
    ZZeroOne { rho: CuspidalLabel },
}

impl DerivativeKind {
    pub fn cuspidal(rho: &CuspidalLabel, x: HalfInt) -> Result<Self> {
        if x == HalfInt::ZERO {
            return Err(Error::Invalid("the rho-derivative at exponent 0 is not supported".into()));
        }
        Ok(DerivativeKind::Cuspidal { rho: rho.clone(), x })
    }

    pub fn rho(&self) -> &CuspidalLabel {
        match self {
            DerivativeKind::Cuspidal { rho, .. }
            | DerivativeKind::DeltaZeroMinusOne { rho }
            | DerivativeKind::ZZeroOne { rho } => rho,
        }
    }
}

impl fmt::Display for DerivativeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DerivativeKind::Cuspidal { x, .. } => write!(f, "D_{x}"),
            DerivativeKind::DeltaZeroMinusOne { .. } => f.write_str("D_Delta[0,-1]"),
            DerivativeKind::ZZeroOne { .. } => f.write_str("D_Z[0,1]"),
        }
    }
}

/// One step `D^{(k)}` of a composite derivative.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    #[serde(flatten)]
    pub kind: DerivativeKind,
    pub k: u32,
}

/// The steps of a composite derivative, in the order they are applied.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DerivativeTrace {
    pub steps: Vec<TraceStep>,
}

impl DerivativeTrace {
    pub fn exponents(&self) -> Vec<u32> {
        self.steps.iter().map(|s| s.k).collect()
    }

    pub fn extend(&mut self, other: DerivativeTrace) {
        self.steps.extend(other.steps);
    }
}

impl fmt::Display for DerivativeTrace {
    /// Written as a composition, last step first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().rev().enumerate() {
            if i > 0 {
                f.write_str(" o ")?;
            }
            write!(f, "{}^({})", s.kind, s.k)?;
        }
        Ok(())
    }
}

/// Direction of a composite derivative along a segment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `D_{ρ|·|^x, ..., ρ|·|^y}` from `x` down to `y`.
    Descending,
    /// `D_{ρ|·|^y, ..., ρ|·|^x}` from `y` up to `x`.
    Ascending,
}

// ---------------------------------------------------------------------------
// memoization

#[derive(Clone, PartialEq, Eq, Hash)]
struct CacheKey {
    op: u8,
    pi: ClDatum,
    rho: String,
    x: HalfInt,
    r: u32,
}

#[derive(Clone)]
enum CacheValue {
    Derivative(Result<(ClDatum, u32)>),
    Socle(Result<ClDatum>),
}

/// Environment variable holding the maximal number of memoized results (0 disables).
pub const CACHE_SIZE_VAR: &str = "SOCLE_CACHE_SIZE";
const DEFAULT_CACHE_SIZE: usize = 1 << 14;

fn cache() -> &'static (Mutex<HashMap<CacheKey, CacheValue>>, usize) {
    static CACHE: OnceLock<(Mutex<HashMap<CacheKey, CacheValue>>, usize)> = OnceLock::new();
    CACHE.get_or_init(|| {
        let size = std::env::var(CACHE_SIZE_VAR).ok().and_then(|v| v.parse().ok()).unwrap_or(DEFAULT_CACHE_SIZE);
        (Mutex::new(HashMap::new()), size)
    })
}

fn memo(key: CacheKey, compute: impl FnOnce() -> CacheValue) -> CacheValue {
    let (map, size) = cache();
    if *size == 0 {
        return compute();
    }
    if let Some(v) = map.lock().unwrap().get(&key) {
        return v.clone();
    }
    let v = compute();
    let mut m = map.lock().unwrap();
    if m.len() >= *size {
        m.clear();
    }
    m.insert(key, v.clone());
    v
}

fn memo_derivative(op: u8, pi: &ClDatum, rho: &CuspidalLabel, x: HalfInt, f: impl FnOnce() -> Result<(ClDatum, u32)>) -> Result<(ClDatum, u32)> {
    let key = CacheKey { op, pi: pi.clone(), rho: rho.id.clone(), x, r: 0 };
    match memo(key, || CacheValue::Derivative(f())) {
        CacheValue::Derivative(v) => v,
        CacheValue::Socle(_) => unreachable!("cache slot holds a socle"),
    }
}

fn memo_socle(op: u8, pi: &ClDatum, rho: &CuspidalLabel, x: HalfInt, r: u32, f: impl FnOnce() -> Result<ClDatum>) -> Result<ClDatum> {
    let key = CacheKey { op, pi: pi.clone(), rho: rho.id.clone(), x, r };
    match memo(key, || CacheValue::Socle(f())) {
        CacheValue::Socle(v) => v,
        CacheValue::Derivative(_) => unreachable!("cache slot holds a derivative"),
    }
}

// ---------------------------------------------------------------------------
// cuspidal derivatives

fn seg(rho: &CuspidalLabel, x: HalfInt, y: HalfInt) -> Segment {
    Segment::raw(rho, x, y)
}

/// Highest `ρ|·|^x`-derivative `D^max_{ρ|·|^x}(π)` and its order, for `x ≠ 0`.
pub fn d_max_cuspidal(pi: &ClDatum, rho: &CuspidalLabel, x: HalfInt) -> Result<(ClDatum, u32)> {
    if x == HalfInt::ZERO {
        return Err(Error::Invalid("the rho-derivative at exponent 0 is not supported".into()));
    }
    memo_derivative(0, pi, rho, x, || {
        if x < HalfInt::ZERO {
            let (gl, k) = left_derivative_max(pi.gl(), rho, x);
            Ok((pi.with_gl(gl)?, k))
        } else {
            positive_derivative(pi, rho, x)
        }
    })
}

fn positive_derivative(pi: &ClDatum, rho: &CuspidalLabel, x: HalfInt) -> Result<(ClDatum, u32)> {
    let ours = |s: &Segment| s.rho == *rho && s.x.congruent(x);
    let segs = pi.gl().segments();
    let mut rest: Vec<Segment> = Vec::new();
    let mut l: Vec<Segment> = Vec::new();
    let mut lp: Vec<Segment> = Vec::new();
    let mut r: Vec<Segment> = Vec::new();
    let mut rp: Vec<Segment> = Vec::new();
    let mut t_count = 0u32;
    for s in segs {
        if !ours(s) {
            rest.push(s.clone());
        } else if s.x == x {
            l.push(s.clone());
        } else if s.x == x - 1 && s.y == -x {
            t_count += 1;
            rest.push(s.clone());
        } else if s.x == x - 1 && s.y < -x {
            lp.push(s.clone());
        } else if s.y == -x && s.x < x - 1 {
            r.push(s.clone());
        } else if s.y == -x + 1 && s.x < x - 1 {
            rp.push(s.clone());
            rest.push(s.clone());
        } else {
            rest.push(s.clone());
        }
    }
    // `lp` segments never change, keep them
    rest.extend(lp.iter().cloned());

    let mut table = pi.table();
    let top = Summand::from_exponent(rho, x).expect("x > 0");
    let low = Summand::from_exponent(rho, x - 1);
    let m_top = table.mult(&top);
    let e_top = table.sign(&top).unwrap_or(1);
    // `S_0` is empty: behaves as an unlimited supply with sign +1
    let (m_low, e_low) = match &low {
        Some(s) => (table.mult(s), table.sign(s).unwrap_or(1)),
        None => (u32::MAX, 1),
    };

    // segments [x-1, y'] block L first, then T, then R
    l.sort_by_key(|s| s.y);
    let mut l_blocked = vec![false; l.len()];
    let mut t_blocked = 0u32;
    let mut lp_on_r = 0usize;
    let mut lp_sorted = lp.clone();
    lp_sorted.sort_by_key(|s| std::cmp::Reverse(s.y));
    for b in &lp_sorted {
        if let Some(i) = (0..l.len()).find(|&i| !l_blocked[i] && l[i].y > b.y) {
            l_blocked[i] = true;
        } else if t_blocked < m_top {
            t_blocked += 1;
        } else {
            lp_on_r += 1;
        }
    }
    let m = m_top - t_blocked;
    let sign_t = if t_count.is_multiple_of(2) { 1 } else { -1 };
    let delta = u32::from(m >= 1 && m_low >= 1 && e_top * e_low != sign_t);

    // R blockers, by decreasing bottom of their duals
    r.sort_by_key(|s| std::cmp::Reverse(s.x));
    let mut r_blocked = vec![false; r.len()];
    let mut rp_sorted = rp.clone();
    rp_sorted.sort_by_key(|s| s.x);
    for b in &rp_sorted {
        if let Some(i) = (0..r.len()).find(|&i| !r_blocked[i] && r[i].x < b.x) {
            r_blocked[i] = true;
        }
    }
    let low_blockers = if low.is_some() { (m_low - delta) as usize } else { 0 };
    for _ in 0..low_blockers + lp_on_r {
        if let Some(i) = (0..r.len()).find(|&i| !r_blocked[i]) {
            r_blocked[i] = true;
        }
    }

    let mut k = 0u32;
    for (i, s) in l.iter().enumerate() {
        if l_blocked[i] {
            rest.push(s.clone());
        } else {
            k += 1;
            rest.push(Segment::new(rho.clone(), x - 1, s.y)?);
        }
    }
    for (i, s) in r.iter().enumerate() {
        if r_blocked[i] {
            rest.push(s.clone());
        } else {
            k += 1;
            rest.push(Segment::new(rho.clone(), s.x, -x + 1)?);
        }
    }

    let new_low_sign = if m_low > 0 && low.is_some() { e_low } else { e_top * sign_t };
    let convert = |table: &mut TemperedTable, n: u32| -> Result<()> {
        table.remove(&top, n)?;
        if let Some(s) = &low {
            table.add(s, n, new_low_sign);
        }
        Ok(())
    };
    let p = seg(rho, x - 1, -x);
    if delta == 0 {
        if m % 2 == 1 && t_count >= 1 {
            // one P dissolves into S_{2x-1}^2 and one copy of S_{2x+1} stays;
            // the new copies leave that copy unable to move
            let pos = rest.iter().position(|s| *s == p).expect("P present");
            rest.remove(pos);
            if let Some(s) = &low {
                table.add(s, 2, e_top * sign_t);
            }
            convert(&mut table, m - 1)?;
        } else {
            convert(&mut table, m)?;
        }
        k += m;
    } else if m >= 2 && m.is_multiple_of(2) {
        // two copies of S_{2x+1} merge into a new P
        table.remove(&top, 2)?;
        rest.push(p);
        convert(&mut table, m - 2)?;
        k += m - 1;
    } else {
        convert(&mut table, m - 1)?;
        k += m - 1;
    }
    let out = ClDatum::from_table(GlDatum::new(rest), &table)
        .map_err(|e| Error::Inconsistent(format!("derivative D_{x} of {pi}: {e}")))?;
    Ok((out, k))
}

/// `soc((ρ|·|^x)^r ⋊ π)` for `x ≠ 0`: the unique irreducible `π'` with
/// `D^max_{ρ|·|^x}(π') = D^max_{ρ|·|^x}(π)` of order larger by `r`.
pub fn soc_cuspidal(pi: &ClDatum, rho: &CuspidalLabel, x: HalfInt, r: u32) -> Result<ClDatum> {
    if r == 0 {
        return Ok(pi.clone());
    }
    if x == HalfInt::ZERO {
        return Err(Error::Invalid("the rho-derivative at exponent 0 is not supported".into()));
    }
    memo_socle(1, pi, rho, x, r, || {
        if x < HalfInt::ZERO {
            pi.with_gl(left_socle(pi.gl(), rho, x, r)?)
        } else {
            positive_socle(pi, rho, x, r)
        }
    })
}

/// Moves undoing one unit of a positive derivative.
#[derive(Clone, Copy, Debug)]
enum Move {
    /// `[x-1, y] -> [x, y]` on the given distinct segment.
    RaiseTop(usize),
    /// `[x_j, -x+1] -> [x_j, -x]` on the given distinct segment.
    LowerBottom(usize),
    /// New segment `[-x, -x]`.
    NewSingleton,
    /// `S_{2x-1} -> S_{2x+1}`; creates `S_{2x+1}` from nothing when `S_{2x-1}` is empty.
    Widen,
    /// `P -> S_{2x+1}^2`.
    SplitP,
    /// `S_{2x-1}^2 -> P`.
    MergeLow,
}

fn positive_socle(pi: &ClDatum, rho: &CuspidalLabel, x: HalfInt, r: u32) -> Result<ClDatum> {
    let (base, k0) = d_max_cuspidal(pi, rho, x)?;
    let n = k0 + r;
    let ours = |s: &Segment| s.rho == *rho && s.x.congruent(x);
    let mut raisable: BTreeMap<Segment, u32> = BTreeMap::new();
    let mut lowerable: BTreeMap<Segment, u32> = BTreeMap::new();
    let p = seg(rho, x - 1, -x);
    for s in base.gl().segments().iter().filter(|s| ours(s)) {
        if s.x == x - 1 && s.y < -x {
            *raisable.entry(s.clone()).or_default() += 1;
        } else if s.y == -x + 1 && s.x < x - 1 {
            *lowerable.entry(s.clone()).or_default() += 1;
        }
    }
    let raisable: Vec<(Segment, u32)> = raisable.into_iter().collect();
    let lowerable: Vec<(Segment, u32)> = lowerable.into_iter().collect();
    let top = Summand::from_exponent(rho, x).expect("x > 0");
    let low = Summand::from_exponent(rho, x - 1);
    let table = base.table();
    let low_count = low.as_ref().map_or(u32::MAX, |s| table.mult(s));
    let p_count = base.gl().count(&p) as u32;

    // capacities of each move class
    let mut classes: Vec<(Move, u32)> = Vec::new();
    for (i, (_, c)) in raisable.iter().enumerate() {
        classes.push((Move::RaiseTop(i), *c));
    }
    for (i, (_, c)) in lowerable.iter().enumerate() {
        classes.push((Move::LowerBottom(i), *c));
    }
    classes.push((Move::NewSingleton, n));
    classes.push((Move::Widen, low_count.min(n)));
    classes.push((Move::SplitP, p_count.min(n)));
    if low.is_some() {
        classes.push((Move::MergeLow, (low_count / 2).min(n)));
    }

    let mut found: Vec<ClDatum> = Vec::new();
    let mut counts = vec![0u32; classes.len()];
    enumerate_counts(&classes, n, 0, &mut counts, &mut |counts| {
        if low.is_some() {
            let widen = counts[classes.len() - 3];
            let merge = counts[classes.len() - 1];
            if widen + 2 * merge > low_count {
                return;
            }
        }
        let signs: &[i8] = if table.mult(&top) > 0 { &[1] } else { &[1, -1] };
        for &sign in signs {
            let cand = match build_candidate(&base, rho, x, &classes, counts, &raisable, &lowerable, sign) {
                Some(c) => c,
                None => continue,
            };
            if found.contains(&cand) {
                continue;
            }
            if let Ok((d, k)) = d_max_cuspidal(&cand, rho, x) {
                if k == n && d == base {
                    found.push(cand);
                }
            }
        }
    });
    match found.len() {
        1 => Ok(found.pop().unwrap()),
        0 => Err(Error::Inconsistent(format!("no candidate for soc(({rho:?}|.|^{x})^{r} x {pi})"))),
        _ => Err(Error::Inconsistent(format!("{} candidates for soc(({rho:?}|.|^{x})^{r} x {pi}): {found:?}", found.len()))),
    }
}

fn enumerate_counts(classes: &[(Move, u32)], remaining: u32, i: usize, counts: &mut Vec<u32>, f: &mut dyn FnMut(&[u32])) {
    if i == classes.len() {
        if remaining == 0 {
            f(counts);
        }
        return;
    }
    for c in 0..=classes[i].1.min(remaining) {
        counts[i] = c;
        enumerate_counts(classes, remaining - c, i + 1, counts, f);
    }
    counts[i] = 0;
}

#[allow(clippy::too_many_arguments)]
fn build_candidate(
    base: &ClDatum,
    rho: &CuspidalLabel,
    x: HalfInt,
    classes: &[(Move, u32)],
    counts: &[u32],
    raisable: &[(Segment, u32)],
    lowerable: &[(Segment, u32)],
    new_top_sign: i8,
) -> Option<ClDatum> {
    let mut segs: Vec<Segment> = base.gl().segments().to_vec();
    let mut table = base.table();
    let top = Summand::from_exponent(rho, x)?;
    let low = Summand::from_exponent(rho, x - 1);
    let p = seg(rho, x - 1, -x);
    let top_sign = table.sign(&top).unwrap_or(new_top_sign);
    let take = |segs: &mut Vec<Segment>, s: &Segment| -> Option<()> {
        let pos = segs.iter().position(|t| t == s)?;
        segs.remove(pos);
        Some(())
    };
    for (&(mv, _), &c) in classes.iter().zip(counts) {
        for _ in 0..c {
            match mv {
                Move::RaiseTop(i) => {
                    let s = &raisable[i].0;
                    take(&mut segs, s)?;
                    segs.push(seg(rho, x, s.y));
                }
                Move::LowerBottom(i) => {
                    let s = &lowerable[i].0;
                    take(&mut segs, s)?;
                    segs.push(seg(rho, s.x, -x));
                }
                Move::NewSingleton => segs.push(seg(rho, -x, -x)),
                Move::Widen => {
                    if let Some(l) = &low {
                        table.remove(l, 1).ok()?;
                    }
                    table.add(&top, 1, top_sign);
                }
                Move::SplitP => {
                    take(&mut segs, &p)?;
                    table.add(&top, 2, top_sign);
                }
                Move::MergeLow => {
                    table.remove(low.as_ref()?, 2).ok()?;
                    segs.push(p.clone());
                }
            }
        }
    }
    ClDatum::from_table(GlDatum::new(segs), &table).ok()
}

// ---------------------------------------------------------------------------
// Δ_ρ[0,-1]

fn require_reduced(pi: &ClDatum, rho: &CuspidalLabel, x: HalfInt) -> Result<()> {
    if d_max_cuspidal(pi, rho, x)?.1 != 0 {
        return Err(Error::Precondition(format!("{pi} is not {rho:?}|.|^{x}-reduced")));
    }
    Ok(())
}

/// Highest `Δ_ρ[0,-1]`-derivative of a `ρ|·|^{-1}`-reduced `π`: the GL part
/// takes its highest left `Δ_ρ[0,-1]`-derivative, the tempered part is kept.
pub fn d_max_delta01(pi: &ClDatum, rho: &CuspidalLabel) -> Result<(ClDatum, u32)> {
    require_reduced(pi, rho, -HalfInt::ONE)?;
    let (gl, k) = left_delta01_derivative_max(pi.gl(), rho)?;
    Ok((pi.with_gl(gl)?, k))
}

/// `soc(Δ_ρ[0,-1]^r ⋊ π)` for `ρ|·|^{-1}`-reduced `π`.
pub fn soc_delta01(pi: &ClDatum, rho: &CuspidalLabel, r: u32) -> Result<ClDatum> {
    if r == 0 {
        return Ok(pi.clone());
    }
    require_reduced(pi, rho, -HalfInt::ONE)?;
    let out = pi.with_gl(delta01_socle(pi.gl(), rho, r)?)?;
    let (d, k) = d_max_delta01(&out, rho)?;
    let (d0, k0) = d_max_delta01(pi, rho)?;
    if d != d0 || k != k0 + r {
        return Err(Error::Inconsistent(format!("soc(Delta[0,-1]^{r} x {pi}) does not invert")));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Z_ρ[0,1], special shape

/// `π = L((ρ|·|^{-1})^s, Δ_ρ[0,-1]^t; π(φ, ε))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecialShape {
    pub s: u32,
    pub t: u32,
    pub table: TemperedTable,
}

impl SpecialShape {
    /// Recognise the special shape; no other segments are allowed.
    pub fn of(pi: &ClDatum, rho: &CuspidalLabel) -> Option<SpecialShape> {
        let (mut s, mut t) = (0, 0);
        for g in pi.gl().segments() {
            if g.rho != *rho {
                return None;
            }
            match (g.x.to_int(), g.y.to_int()) {
                (Some(-1), Some(-1)) => s += 1,
                (Some(0), Some(-1)) => t += 1,
                _ => return None,
            }
        }
        Some(SpecialShape { s, t, table: pi.table() })
    }

    pub fn to_datum(&self, rho: &CuspidalLabel) -> Result<ClDatum> {
        let mut segs = vec![seg(rho, -HalfInt::ONE, -HalfInt::ONE); self.s as usize];
        segs.extend(std::iter::repeat_n(seg(rho, HalfInt::ZERO, -HalfInt::ONE), self.t as usize));
        ClDatum::from_table(GlDatum::new(segs), &self.table)
    }
}

fn s1(rho: &CuspidalLabel) -> Summand {
    Summand::new(rho, 1)
}

fn s3(rho: &CuspidalLabel) -> Summand {
    Summand::new(rho, 3)
}

fn flip_s1(table: &mut TemperedTable, rho: &CuspidalLabel) {
    if let Some(e) = table.sign(&s1(rho)) {
        table.set_sign(&s1(rho), -e);
    }
}

fn delta_of(table: &TemperedTable, rho: &CuspidalLabel, t: u32) -> bool {
    let (a, b) = (s1(rho), s3(rho));
    let sign_t = if t.is_multiple_of(2) { 1 } else { -1 };
    table.mult(&a) >= 1 && table.mult(&b) >= 1 && table.sign(&a).unwrap() * table.sign(&b).unwrap() != sign_t
}

/// Which of the four cases of the special-shape formula applies.
pub fn z01_special_case(shape: &SpecialShape, rho: &CuspidalLabel) -> u8 {
    let delta = delta_of(&shape.table, rho, shape.t);
    let m = shape.table.mult(&s1(rho));
    let same = m % 2 == shape.s % 2;
    match (delta, same) {
        (true, false) => 1,
        (true, true) => 2,
        (false, false) => 3,
        (false, true) => 4,
    }
}

/// Highest `Z_ρ[0,1]`-derivative of `L((ρ|·|^{-1})^s, Δ_ρ[0,-1]^t; π(φ, ε))`,
/// which must be `ρ|·|^1`-reduced.
pub fn d_max_z01_special(pi: &ClDatum, rho: &CuspidalLabel) -> Result<(ClDatum, u32)> {
    let shape = SpecialShape::of(pi, rho)
        .ok_or_else(|| Error::Precondition(format!("{pi} is not of the form L((rho|.|^-1)^s, Delta[0,-1]^t; pi)")))?;
    require_reduced(pi, rho, HalfInt::ONE)?;
    let SpecialShape { s, t, table } = shape.clone();
    let delta = delta_of(&table, rho, t);
    let m = table.mult(&s1(rho));
    if table.mult(&s3(rho)) != u32::from(delta) || s + u32::from(delta) > m {
        return Err(Error::Inconsistent(format!("{pi} passed the reducedness test but fails its closed form")));
    }
    let even = t % 2 == 0;
    let mut out = table.clone();
    let e1 = table.sign(&s1(rho)).unwrap_or(1);
    let (s2, t2, k) = match z01_special_case(&shape, rho) {
        1 if even => (s, 0, t),
        1 => {
            out.add(&s1(rho), 1, e1);
            out.remove(&s3(rho), 1)?;
            (s + 1, 0, t)
        }
        2 => {
            if even && s == 0 {
                out.remove(&s1(rho), 1)?;
                out.remove(&s3(rho), 1)?;
                flip_s1(&mut out, rho);
                (0, 0, t + 1)
            } else if even {
                out.remove(&s1(rho), 2)?;
                (s - 1, 0, t + 1)
            } else {
                out.remove(&s1(rho), 1)?;
                out.remove(&s3(rho), 1)?;
                (s, 0, t + 1)
            }
        }
        3 if t == 0 => (s, 0, 0),
        3 if even => {
            out.add(&s1(rho), 2, e1);
            (s + 1, 0, t - 1)
        }
        3 => (s, 1, t - 1),
        _ => {
            if !even && m > s && s == 0 {
                flip_s1(&mut out, rho);
                (0, 0, t)
            } else if !even && m > s {
                out.remove(&s1(rho), 2)?;
                (s - 1, 1, t)
            } else {
                (s, 0, t)
            }
        }
    };
    Ok((SpecialShape { s: s2, t: t2, table: out }.to_datum(rho)?, k))
}

/// Which row of the inversion table applies to `(π', k)`, together with the result.
pub fn z01_inverse_case(pi_prime: &ClDatum, rho: &CuspidalLabel, k: u32) -> Result<(u8, ClDatum)> {
    if k == 0 {
        return Err(Error::Invalid("inversion needs k > 0".into()));
    }
    let SpecialShape { s: sp, t: tp, table } = SpecialShape::of(pi_prime, rho)
        .ok_or_else(|| Error::Precondition(format!("{pi_prime} is not of the special shape")))?;
    let m = table.mult(&s1(rho));
    let has3 = table.mult(&s3(rho)) > 0;
    let e1 = table.sign(&s1(rho));
    let mut out = table.clone();
    let odd_k = k % 2 == 1;
    let pow = |n: u32| if n.is_multiple_of(2) { 1i8 } else { -1 };
    let outside = || Error::Invalid(format!("({pi_prime}, k = {k}) lies outside the inversion table"));
    let (case, s, t) = if !odd_k {
        if tp == 1 {
            (1, sp, k + 1)
        } else if tp != 0 {
            return Err(outside());
        } else if m % 2 == sp % 2 {
            (2, sp, k)
        } else if has3 {
            (3, sp, k)
        } else {
            let e = e1.ok_or_else(outside)?;
            out.add(&s1(rho), 1, e);
            out.add(&s3(rho), 1, pow(k) * e);
            (4, sp, k - 1)
        }
    } else if tp == 1 {
        let e = e1.ok_or_else(outside)?;
        out.add(&s1(rho), 2, e);
        (5, sp + 1, k)
    } else if tp != 0 {
        return Err(outside());
    } else if m == sp {
        (6, sp, k)
    } else if sp == 0 && m % 2 == 0 {
        flip_s1(&mut out, rho);
        (7, 0, k)
    } else if sp == 0 && has3 {
        out.add(&s1(rho), 2, e1.ok_or_else(outside)?);
        (8, 1, k - 1)
    } else if sp == 0 {
        let e = -e1.ok_or_else(outside)?;
        out.set_sign(&s1(rho), e);
        out.add(&s1(rho), 1, e);
        out.add(&s3(rho), 1, pow(k) * e);
        (9, 0, k - 1)
    } else if sp < m && m % 2 == sp % 2 {
        out.remove(&s1(rho), 2)?;
        (10, sp - 1, k + 1)
    } else if sp < m && has3 {
        out.add(&s1(rho), 2, e1.ok_or_else(outside)?);
        (11, sp + 1, k - 1)
    } else if sp < m {
        let e = e1.ok_or_else(outside)?;
        out.remove(&s1(rho), 1)?;
        out.add(&s3(rho), 1, pow(k - 1) * e);
        (12, sp - 1, k)
    } else {
        return Err(outside());
    };
    Ok((case, SpecialShape { s, t, table: out }.to_datum(rho)?))
}

/// The `ρ|·|^1`-reduced special-shape `π` with `D^max_{Z_ρ[0,1]}(π) = D^{(k)}(π) = π'`.
pub fn z01_inverse(pi_prime: &ClDatum, rho: &CuspidalLabel, k: u32) -> Result<ClDatum> {
    Ok(z01_inverse_case(pi_prime, rho, k)?.1)
}

// ---------------------------------------------------------------------------
// Z_ρ[0,1], general case

struct Split {
    others: Vec<Segment>,
    a2: ClDatum,
    l1: u32,
    k1: u32,
}

fn step_err(step: u8, e: Error) -> Error {
    match e {
        Error::Precondition(m) => Error::Precondition(format!("Z[0,1] step {step}: {m}")),
        Error::Inconsistent(m) => Error::Inconsistent(format!("Z[0,1] step {step}: {m}")),
        other => other,
    }
}

fn require_good_parity(pi: &ClDatum, rho: &CuspidalLabel) -> Result<()> {
    if let Some(s) = pi.gl().segments().iter().find(|s| s.rho == *rho && !rho.good_exponent(s.x)) {
        return Err(Error::Precondition(format!("{pi} is not of good parity at {s:?}")));
    }
    Ok(())
}

/// Split off the special part and peel it; returns the remaining segments, `π_A''`, `l_1`, `k_1`.
fn split_special(pi: &ClDatum, rho: &CuspidalLabel) -> Result<Split> {
    require_good_parity(pi, rho)?;
    require_reduced(pi, rho, HalfInt::ONE).map_err(|e| step_err(1, e))?;
    let minus_one = seg(rho, -HalfInt::ONE, -HalfInt::ONE);
    let d01 = seg(rho, HalfInt::ZERO, -HalfInt::ONE);
    let (mut special, mut others) = (Vec::new(), Vec::new());
    for s in pi.gl().segments() {
        if *s == minus_one || *s == d01 {
            special.push(s.clone());
        } else {
            others.push(s.clone());
        }
    }
    let a = pi.with_gl(GlDatum::new(special)).map_err(|e| step_err(2, e))?;
    let (a1, l1) = d_max_cuspidal(&a, rho, HalfInt::ONE).map_err(|e| step_err(2, e))?;
    let (a2, k1) = d_max_z01_special(&a1, rho).map_err(|e| step_err(2, e))?;
    Ok(Split { others, a2, l1, k1 })
}

fn tau_of(split: &Split, rho: &CuspidalLabel) -> GlDatum {
    let mut segs = split.others.clone();
    segs.extend(std::iter::repeat_n(seg(rho, HalfInt::ZERO, HalfInt::ZERO), split.k1 as usize));
    segs.extend(std::iter::repeat_n(seg(rho, HalfInt::ONE, HalfInt::ONE), (split.k1 + split.l1) as usize));
    GlDatum::new(segs)
}

/// Rebuild from `τ'` and `π_A''`.
fn reassemble(tau2: &GlDatum, a2: &ClDatum, rho: &CuspidalLabel) -> Result<ClDatum> {
    let zero = seg(rho, HalfInt::ZERO, HalfInt::ZERO);
    let one = seg(rho, HalfInt::ONE, HalfInt::ONE);
    let k2 = tau2.count(&zero) as u32;
    let ones = tau2.count(&one) as u32;
    let l2 = ones
        .checked_sub(k2)
        .ok_or_else(|| Error::Inconsistent(format!("Z[0,1] step 4: {tau2} has more rho than rho|.|^1")))?;
    let others: Vec<Segment> = tau2.segments().iter().filter(|s| **s != zero && **s != one).cloned().collect();
    let b1 = if k2 > 0 { z01_inverse(a2, rho, k2).map_err(|e| step_err(5, e))? } else { a2.clone() };
    let b = soc_cuspidal(&b1, rho, HalfInt::ONE, l2).map_err(|e| step_err(5, e))?;
    if SpecialShape::of(&b, rho).is_none() {
        return Err(Error::Inconsistent(format!("Z[0,1] step 6: {b} is not of the special shape")));
    }
    let mut segs = others;
    segs.extend(b.gl().segments().iter().cloned());
    ClDatum::new(GlDatum::new(segs), b.phi().clone(), b.eps().clone()).map_err(|e| step_err(6, e))
}

/// Highest `Z_ρ[0,1]`-derivative of a `ρ|·|^1`-reduced `π` of good parity.
pub fn d_max_z01_general(pi: &ClDatum, rho: &CuspidalLabel) -> Result<(ClDatum, u32)> {
    memo_derivative(2, pi, rho, HalfInt::ZERO, || {
        let split = split_special(pi, rho)?;
        let tau = tau_of(&split, rho);
        let (tau2, k) = left_z01_derivative_max(&tau, rho).map_err(|e| step_err(4, e))?;
        Ok((reassemble(&tau2, &split.a2, rho)?, k))
    })
}

/// `soc(Z_ρ[0,1]^k ⋊ π)` for `ρ|·|^1`-reduced `π` of good parity.
pub fn soc_z01_power(pi: &ClDatum, rho: &CuspidalLabel, k: u32) -> Result<ClDatum> {
    if k == 0 {
        return Ok(pi.clone());
    }
    memo_socle(3, pi, rho, HalfInt::ZERO, k, || {
        let split = split_special(pi, rho)?;
        let tau = tau_of(&split, rho);
        let tau2 = z01_socle(&tau, rho, k).map_err(|e| step_err(3, e))?;
        reassemble(&tau2, &split.a2, rho)
    })
}

// ---------------------------------------------------------------------------
// dispatch on kinds

/// Highest derivative of the given kind.
pub fn d_max(pi: &ClDatum, kind: &DerivativeKind) -> Result<(ClDatum, u32)> {
    match kind {
        DerivativeKind::Cuspidal { rho, x } => d_max_cuspidal(pi, rho, *x),
        DerivativeKind::DeltaZeroMinusOne { rho } => d_max_delta01(pi, rho),
        DerivativeKind::ZZeroOne { rho } => d_max_z01_general(pi, rho),
    }
}

/// Socle of the `r`-th power of the representation matching `kind`, induced with `π`.
pub fn soc(pi: &ClDatum, kind: &DerivativeKind, r: u32) -> Result<ClDatum> {
    match kind {
        DerivativeKind::Cuspidal { rho, x } => soc_cuspidal(pi, rho, *x, r),
        DerivativeKind::DeltaZeroMinusOne { rho } => soc_delta01(pi, rho, r),
        DerivativeKind::ZZeroOne { rho } => soc_z01_power(pi, rho, r),
    }
}

/// `D^{(k)}(π)` up to multiplicity: zero above the highest order, otherwise
/// the irreducible `soc(X^{k_max - k} ⋊ D^max(π))`.
pub fn d_fixed(pi: &ClDatum, kind: &DerivativeKind, k: u32) -> Result<Option<ClDatum>> {
    let (d, kmax) = d_max(pi, kind)?;
    if k > kmax {
        return Ok(None);
    }
    if k == kmax {
        return Ok(Some(d));
    }
    soc(&d, kind, kmax - k).map(Some)
}

// ---------------------------------------------------------------------------
// composite derivatives

/// The steps of `D^max` along `[from, to]`, splicing in `Δ_ρ[0,-1]` or
/// `Z_ρ[0,1]` where the segment passes through `ρ`.
///
/// Descending chains run `from, from-1, ..., to`; ascending ones run
/// `from, from+1, ..., to`.
pub fn chain_kinds(rho: &CuspidalLabel, from: HalfInt, to: HalfInt, dir: Direction) -> Result<Vec<DerivativeKind>> {
    if !from.congruent(to) {
        return Err(Error::Invalid(format!("endpoints {from} and {to} differ by a non-integer")));
    }
    let (lo, hi) = match dir {
        Direction::Descending if from >= to => (to, from),
        Direction::Ascending if from <= to => (from, to),
        _ => return Err(Error::Invalid(format!("[{from}, {to}] runs against the {dir:?} direction"))),
    };
    let mut exps = Vec::new();
    let mut e = lo;
    while e <= hi {
        exps.push(e);
        e = e + 1;
    }
    if dir == Direction::Descending {
        exps.reverse();
    }
    let contains_zero = exps.contains(&HalfInt::ZERO);
    let mut out = Vec::new();
    if !contains_zero {
        for e in exps {
            out.push(DerivativeKind::cuspidal(rho, e)?);
        }
        return Ok(out);
    }
    match dir {
        Direction::Descending => {
            if to >= HalfInt::ZERO {
                return Err(Error::Precondition(format!("descending chain [{from}, {to}] through 0 must end below 0")));
            }
            for e in exps {
                if e == HalfInt::ZERO {
                    continue;
                }
                out.push(DerivativeKind::cuspidal(rho, e)?);
                if e == -HalfInt::ONE {
                    out.push(DerivativeKind::DeltaZeroMinusOne { rho: rho.clone() });
                }
            }
        }
        Direction::Ascending => {
            if to <= HalfInt::ZERO {
                return Err(Error::Precondition(format!("ascending chain [{from}, {to}] through 0 must end above 0")));
            }
            for e in exps {
                if e == HalfInt::ZERO {
                    continue;
                }
                out.push(DerivativeKind::cuspidal(rho, e)?);
                if e == HalfInt::ONE {
                    out.push(DerivativeKind::ZZeroOne { rho: rho.clone() });
                }
            }
        }
    }
    Ok(out)
}

/// Apply `D^max` along a list of kinds, recording each order.
pub fn run_chain(pi: &ClDatum, kinds: &[DerivativeKind]) -> Result<(ClDatum, DerivativeTrace)> {
    let mut cur = pi.clone();
    let mut trace = DerivativeTrace::default();
    for kind in kinds {
        let (next, k) = d_max(&cur, kind)?;
        trace.steps.push(TraceStep { kind: kind.clone(), k });
        cur = next;
    }
    Ok((cur, trace))
}

/// Composite highest derivative along `[from, to]`.
pub fn composite_d_max(
    pi: &ClDatum,
    rho: &CuspidalLabel,
    from: HalfInt,
    to: HalfInt,
    dir: Direction,
) -> Result<(ClDatum, DerivativeTrace)> {
    run_chain(pi, &chain_kinds(rho, from, to, dir)?)
}

/// Apply fixed orders `D^{(k)}` in sequence; `None` when the result vanishes.
pub fn apply_trace(pi: &ClDatum, trace: &DerivativeTrace) -> Result<Option<ClDatum>> {
    let mut cur = pi.clone();
    for step in &trace.steps {
        match d_fixed(&cur, &step.kind, step.k)? {
            Some(next) => cur = next,
            None => return Ok(None),
        }
    }
    Ok(Some(cur))
}

/// The unique irreducible `π` whose composite highest derivative along the
/// kinds of `trace` is `sigma` with exactly the orders recorded in `trace`.
pub fn rebuild(sigma: &ClDatum, trace: &DerivativeTrace) -> Result<ClDatum> {
    let mut cur = sigma.clone();
    for step in trace.steps.iter().rev() {
        let (_, k0) = d_max(&cur, &step.kind)?;
        if k0 != 0 {
            return Err(Error::Inconsistent(format!("{cur} is not reduced for {}", step.kind)));
        }
        cur = soc(&cur, &step.kind, step.k)?;
    }
    Ok(cur)
}

/// Orders of `trace` raised by one piece of `u`: every step gains one,
/// except `D_{ρ|·|^{±1}}` steps feeding a spliced two-sided derivative.
pub fn raise_trace(trace: &DerivativeTrace) -> DerivativeTrace {
    let steps = &trace.steps;
    let mut out = trace.clone();
    for i in 0..steps.len() {
        let feeds_splice = matches!(steps[i].kind, DerivativeKind::Cuspidal { .. })
            && steps.get(i + 1).is_some_and(|n| !matches!(n.kind, DerivativeKind::Cuspidal { .. }));
        if !feeds_splice {
            out.steps[i].k += 1;
        }
    }
    out
}

/// Inverse of [`raise_trace`]; `None` when some order would become negative.
pub fn lower_trace(trace: &DerivativeTrace) -> Option<DerivativeTrace> {
    let steps = &trace.steps;
    let mut out = trace.clone();
    for i in 0..steps.len() {
        let feeds_splice = matches!(steps[i].kind, DerivativeKind::Cuspidal { .. })
            && steps.get(i + 1).is_some_and(|n| !matches!(n.kind, DerivativeKind::Cuspidal { .. }));
        if !feeds_splice {
            out.steps[i].k = out.steps[i].k.checked_sub(1)?;
        }
    }
    Some(out)
}

/// Chains peeling `u_ρ(a,b)|·|^s` off the left when `s > (a-1)/2` (rows, from
/// the top) or `s < -(b-1)/2` (columns, from the left).
pub fn speh_chains(u: &SpehShape) -> Result<Vec<DerivativeKind>> {
    let (a, b) = (u.big_a(), u.big_b());
    let s = u.s;
    let mut kinds = Vec::new();
    if s.twice() > u.a as i64 - 1 {
        for i in 0..u.a as i64 {
            kinds.extend(chain_kinds(&u.rho, b + s - i, a + s - i, Direction::Ascending)?);
        }
    } else if s.twice() < -(u.b as i64 - 1) {
        for j in 0..u.b as i64 {
            kinds.extend(chain_kinds(&u.rho, b + s + j, -a + s + j, Direction::Descending)?);
        }
    } else {
        return Err(Error::Precondition(format!("s = {s} is within the middle range for u({}, {})", u.a, u.b)));
    }
    Ok(kinds)
}

/// `soc(u_ρ(a,b)|·|^s ⋊ π)` for `s > (a-1)/2` or `s < -(b-1)/2`.
pub fn composite_socle(pi: &ClDatum, u: &SpehShape) -> Result<ClDatum> {
    let kinds = speh_chains(u)?;
    let (sigma, trace) = run_chain(pi, &kinds)?;
    let raised = raise_trace(&trace);
    let out = rebuild(&sigma, &raised)?;
    let (check, trace2) = run_chain(&out, &kinds)?;
    if check != sigma || trace2 != raised {
        return Err(Error::Inconsistent(format!("socle of u({},{})|.|^{} x {pi} does not invert", u.a, u.b, u.s)));
    }
    Ok(out)
}
