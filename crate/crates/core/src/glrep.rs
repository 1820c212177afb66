//! Irreducible representations of general linear groups in Langlands notation,
//! with left and right derivatives and the matching socles.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::base::{CuspidalLabel, HalfInt, Segment};
use crate::error::{Error, Result};
use crate::text::{label_suffix_text, Cursor};

/// A multisegment `{Δ_1, ..., Δ_r}` standing for `L(Δ_1, ..., Δ_r)`.
///
/// Segments are kept sorted so equal data compare equal; empty segments are dropped.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(from = "Vec<Segment>", into = "Vec<Segment>")]
pub struct GlDatum {
    segments: Vec<Segment>,
}

impl GlDatum {
    pub fn new(mut segments: Vec<Segment>) -> Self {
        segments.retain(|s| !s.is_empty());
        segments.sort();
        GlDatum { segments }
    }

    pub fn trivial() -> Self {
        GlDatum::default()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn into_segments(self) -> Vec<Segment> {
        self.segments
    }

    pub fn is_trivial(&self) -> bool {
        self.segments.is_empty()
    }

    /// Rank `n` of the group `GL_n`.
    pub fn degree(&self) -> u64 {
        self.segments.iter().map(|s| s.len() as u64 * s.rho.dim as u64).sum()
    }

    pub fn dual(&self) -> GlDatum {
        GlDatum::new(self.segments.iter().map(Segment::dual).collect())
    }

    pub fn shift(&self, s: HalfInt) -> GlDatum {
        GlDatum::new(self.segments.iter().map(|seg| seg.shift(s)).collect())
    }

    /// Union of multisegments.
    pub fn join(&self, other: &GlDatum) -> GlDatum {
        GlDatum::new(self.segments.iter().chain(&other.segments).cloned().collect())
    }

    pub fn count(&self, seg: &Segment) -> usize {
        self.segments.iter().filter(|s| *s == seg).count()
    }

    pub fn parse(text: &str, labels: &[CuspidalLabel]) -> Result<Self> {
        let mut cur = Cursor::new(text);
        let datum = if cur.eat("L(") {
            let segs = parse_segment_list(&mut cur, labels, &[")"])?;
            cur.expect(")")?;
            GlDatum::new(segs)
        } else if cur.eat("1") {
            GlDatum::trivial()
        } else {
            GlDatum::new(parse_segment_list(&mut cur, labels, &[])?)
        };
        cur.finish()?;
        Ok(datum)
    }
}

/// Parse a comma separated list of `D[x,y]`, `Z[y,x]` and `id^k` items.
///
/// `D[x,y]^m` repeats a segment, `Z[y,x]` expands to the singletons
/// `[y,y], ..., [x,x]`, `rho^k` is `k` copies of `D[0,0]`.
pub(crate) fn parse_segment_list(
    cur: &mut Cursor<'_>,
    labels: &[CuspidalLabel],
    stops: &[&str],
) -> Result<Vec<Segment>> {
    let mut out = Vec::new();
    loop {
        if cur.at_end() || stops.iter().any(|s| cur.peek() == s.chars().next()) {
            break;
        }
        if cur.eat("D[") {
            let x = cur.half_int()?;
            cur.expect(",")?;
            let y = cur.half_int()?;
            cur.expect("]")?;
            let rho = cur.label_suffix(labels)?;
            let mult = if cur.eat("^") { cur.unsigned()? } else { 1 };
            let seg = Segment::new(rho, x, y).map_err(|e| cur.error(&e.to_string()))?;
            out.extend(std::iter::repeat_n(seg, mult as usize));
        } else if cur.eat("Z[") {
            let y = cur.half_int()?;
            cur.expect(",")?;
            let x = cur.half_int()?;
            cur.expect("]")?;
            let rho = cur.label_suffix(labels)?;
            if !x.congruent(y) || x < y {
                return Err(cur.error("malformed Zelevinsky segment"));
            }
            let mut e = y;
            while e <= x {
                out.push(Segment::raw(&rho, e, e));
                e = e + 1;
            }
        } else {
            let id = cur.ident()?;
            let rho = labels
                .iter()
                .find(|l| l.id == id)
                .cloned()
                .or_else(|| (id == "rho").then(CuspidalLabel::trivial))
                .ok_or_else(|| cur.error(&format!("unknown item {id:?}")))?;
            let mult = if cur.eat("^") { cur.unsigned()? } else { 1 };
            let seg = Segment::raw(&rho, HalfInt::ZERO, HalfInt::ZERO);
            out.extend(std::iter::repeat_n(seg, mult as usize));
        }
        if !cur.eat(",") {
            break;
        }
    }
    Ok(out)
}

pub(crate) fn write_segment_list(f: &mut fmt::Formatter<'_>, segs: &[Segment]) -> fmt::Result {
    for (i, s) in segs.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "D[{},{}]{}", s.x, s.y, label_suffix_text(&s.rho))?;
    }
    Ok(())
}

impl From<Vec<Segment>> for GlDatum {
    fn from(segments: Vec<Segment>) -> Self {
        GlDatum::new(segments)
    }
}

impl From<GlDatum> for Vec<Segment> {
    fn from(d: GlDatum) -> Self {
        d.segments
    }
}

impl fmt::Display for GlDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("L(")?;
        write_segment_list(f, &self.segments)?;
        f.write_str(")")
    }
}

impl fmt::Debug for GlDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// The Speh representation `u_ρ(a, b)|·|^s`, i.e. `Speh(St(ρ, a), b)` twisted by `s`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpehShape {
    pub rho: CuspidalLabel,
    pub a: u32,
    pub b: u32,
    pub s: HalfInt,
}

impl SpehShape {
    pub fn new(rho: CuspidalLabel, a: u32, b: u32, s: HalfInt) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(Error::Invalid("Speh shape needs a, b >= 1".into()));
        }
        Ok(SpehShape { rho, a, b, s })
    }

    /// `A = (a + b)/2 - 1`.
    pub fn big_a(&self) -> HalfInt {
        HalfInt::from_twice(self.a as i64 + self.b as i64 - 2)
    }

    /// `B = (a - b)/2`.
    pub fn big_b(&self) -> HalfInt {
        HalfInt::from_twice(self.a as i64 - self.b as i64)
    }

    /// The `b` segments `Δ[B + s + j, -A + s + j]`.
    pub fn to_datum(&self) -> GlDatum {
        let (a, b) = (self.big_a(), self.big_b());
        GlDatum::new(
            (0..self.b as i64)
                .map(|j| Segment::raw(&self.rho, b + self.s + j, -a + self.s + j))
                .collect(),
        )
    }

    /// Recognise a Speh datum; a single segment counts as `b = 1`.
    pub fn from_datum(datum: &GlDatum) -> Option<SpehShape> {
        let segs = datum.segments();
        let first = segs.first()?;
        let a = first.len();
        let mut sorted: Vec<&Segment> = segs.iter().collect();
        sorted.sort_by_key(|s| s.x);
        for (j, s) in sorted.iter().enumerate() {
            if s.rho != first.rho || s.len() != a || s.x != sorted[0].x + j as i64 {
                return None;
            }
        }
        let b = segs.len() as i64;
        let big_b = HalfInt::from_twice(a - b);
        Some(SpehShape { rho: first.rho.clone(), a: a as u32, b: b as u32, s: sorted[0].x - big_b })
    }
}

fn matches(seg: &Segment, rho: &CuspidalLabel, top: HalfInt) -> bool {
    seg.rho == *rho && seg.x == top
}

/// Highest left derivative `L^max_{ρ|·|^x}`: returns the derivative and its order.
///
/// Segments `[x, y]` may lose their top unless blocked by a segment
/// `[x-1, y']` with `y' < y`. Blockers are paired greedily, largest `y'` first,
/// each with the shortest segment it can block.
pub fn left_derivative_max(tau: &GlDatum, rho: &CuspidalLabel, x: HalfInt) -> (GlDatum, u32) {
    let segs = tau.segments();
    let mut tops: Vec<usize> = (0..segs.len()).filter(|&i| matches(&segs[i], rho, x)).collect();
    if tops.is_empty() {
        return (tau.clone(), 0);
    }
    tops.sort_by_key(|&i| segs[i].y);
    let mut lows: Vec<usize> = (0..segs.len()).filter(|&i| matches(&segs[i], rho, x - 1)).collect();
    lows.sort_by_key(|&i| std::cmp::Reverse(segs[i].y));
    let mut blocked = vec![false; tops.len()];
    for &l in &lows {
        let y_low = segs[l].y;
        if let Some(slot) = (0..tops.len()).find(|&t| !blocked[t] && segs[tops[t]].y > y_low) {
            blocked[slot] = true;
        }
    }
    let mut out = Vec::with_capacity(segs.len());
    let mut k = 0;
    let mut free = vec![false; segs.len()];
    for (t, &i) in tops.iter().enumerate() {
        free[i] = !blocked[t];
    }
    for (i, s) in segs.iter().enumerate() {
        if free[i] {
            k += 1;
            if s.x > s.y {
                out.push(Segment::raw(rho, x - 1, s.y));
            }
        } else {
            out.push(s.clone());
        }
    }
    (GlDatum::new(out), k)
}

/// Highest right derivative at `ρ|·|^x`, read off from the contragredient.
pub fn right_derivative_max(tau: &GlDatum, rho: &CuspidalLabel, x: HalfInt) -> (GlDatum, u32) {
    let (d, k) = left_derivative_max(&tau.dual(), rho, -x);
    (d.dual(), k)
}

/// `soc((ρ|·|^x)^r × τ)`.
pub fn left_socle(tau: &GlDatum, rho: &CuspidalLabel, x: HalfInt, r: u32) -> Result<GlDatum> {
    if r == 0 {
        return Ok(tau.clone());
    }
    let (base, k0) = left_derivative_max(tau, rho, x);
    let target = k0 + r;
    let mut lows: BTreeMap<Segment, usize> = BTreeMap::new();
    for s in base.segments().iter().filter(|s| matches(s, rho, x - 1)) {
        *lows.entry(s.clone()).or_default() += 1;
    }
    let lows: Vec<(Segment, usize)> = lows.into_iter().collect();
    let mut found: Option<GlDatum> = None;
    let mut choice = vec![0usize; lows.len()];
    loop {
        let raised: usize = choice.iter().sum();
        if raised <= target as usize {
            let mut segs: Vec<Segment> = Vec::new();
            let mut skip: Vec<usize> = choice.clone();
            for s in base.segments() {
                if let Some(pos) = lows.iter().position(|(l, _)| l == s) {
                    if skip[pos] > 0 {
                        skip[pos] -= 1;
                        segs.push(Segment::raw(rho, x, s.y));
                        continue;
                    }
                }
                segs.push(s.clone());
            }
            for _ in raised..target as usize {
                segs.push(Segment::raw(rho, x, x));
            }
            let cand = GlDatum::new(segs);
            let (d, k) = left_derivative_max(&cand, rho, x);
            if k == target && d == base {
                if found.as_ref().is_some_and(|f| *f != cand) {
                    return Err(Error::Inconsistent(format!("two socle candidates over {base}")));
                }
                found = Some(cand);
            }
        }
        // odometer over the raise counts
        let mut i = 0;
        while i < choice.len() {
            if choice[i] < lows[i].1 {
                choice[i] += 1;
                break;
            }
            choice[i] = 0;
            i += 1;
        }
        if i == choice.len() {
            break;
        }
    }
    found.ok_or_else(|| Error::Inconsistent(format!("no socle for ({rho:?}|.|^{x})^{r} x {tau}")))
}

/// `soc(τ × (ρ|·|^x)^r)`.
pub fn right_socle(tau: &GlDatum, rho: &CuspidalLabel, x: HalfInt, r: u32) -> Result<GlDatum> {
    Ok(left_socle(&tau.dual(), rho, -x, r)?.dual())
}

/// Highest left derivative with respect to `Z_ρ[0,1]`, for `τ` that is left
/// `ρ|·|^1`-reduced.
pub fn left_z01_derivative_max(tau: &GlDatum, rho: &CuspidalLabel) -> Result<(GlDatum, u32)> {
    two_step_derivative(tau, rho, HalfInt::ONE)
}

/// `soc(Z_ρ[0,1]^r × τ)`.
pub fn z01_socle(tau: &GlDatum, rho: &CuspidalLabel, r: u32) -> Result<GlDatum> {
    two_step_socle(tau, rho, HalfInt::ONE, r)
}

/// Highest left derivative with respect to `Δ_ρ[0,-1]`, for `τ` that is left
/// `ρ|·|^{-1}`-reduced.
pub fn left_delta01_derivative_max(tau: &GlDatum, rho: &CuspidalLabel) -> Result<(GlDatum, u32)> {
    two_step_derivative(tau, rho, -HalfInt::ONE)
}

/// `soc(Δ_ρ[0,-1]^r × τ)`.
pub fn delta01_socle(tau: &GlDatum, rho: &CuspidalLabel, r: u32) -> Result<GlDatum> {
    two_step_socle(tau, rho, -HalfInt::ONE, r)
}

fn two_step_derivative(tau: &GlDatum, rho: &CuspidalLabel, e: HalfInt) -> Result<(GlDatum, u32)> {
    if left_derivative_max(tau, rho, e).1 != 0 {
        return Err(Error::Precondition(format!("{tau} is not left {rho:?}|.|^{e}-reduced")));
    }
    let (t0, k0) = left_derivative_max(tau, rho, HalfInt::ZERO);
    let (t1, k1) = left_derivative_max(&t0, rho, e);
    Ok((left_socle(&t1, rho, HalfInt::ZERO, k0 - k1)?, k1))
}

fn two_step_socle(tau: &GlDatum, rho: &CuspidalLabel, e: HalfInt, r: u32) -> Result<GlDatum> {
    if r == 0 {
        return Ok(tau.clone());
    }
    let (t0, k0) = left_derivative_max(tau, rho, HalfInt::ZERO);
    let inner = left_socle(&t0, rho, e, r)?;
    left_socle(&inner, rho, HalfInt::ZERO, k0 + r)
}

/// Irreducibility of `π_1 × π_2` when one factor is a Speh representation
/// (a segment included) and the other a single segment.
///
/// `Δ × u` reduces exactly when `Δ` is linked to an end column of `u` from the
/// outside: the last column precedes `Δ`, or `Δ` precedes the first column.
/// Other shapes are rejected.
pub fn gl_product_irreducible(p1: &GlDatum, p2: &GlDatum) -> Result<bool> {
    if p1.is_trivial() || p2.is_trivial() {
        return Ok(true);
    }
    let (u, seg) = match (p1.segments(), p2.segments()) {
        (_, [seg]) if SpehShape::from_datum(p1).is_some() => (p1, seg),
        ([seg], _) if SpehShape::from_datum(p2).is_some() => (p2, seg),
        _ => return Err(Error::Precondition("need a Speh factor and a segment factor".into())),
    };
    let first = u.segments().iter().min_by_key(|s| s.x).expect("nonempty");
    let last = u.segments().iter().max_by_key(|s| s.x).expect("nonempty");
    let precedes = |a: &Segment, b: &Segment| crate::base::segments_linked(a, b) && a.x < b.x;
    Ok(!(precedes(last, seg) || precedes(seg, first)))
}
