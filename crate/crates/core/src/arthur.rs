//! Extended multi-segments, the representations `π(E)` they define, and the
//! decomposition of unitary inductions `u_ρ(a,b) ⋊ π(E)`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::base::{dual_dimension_of, is_good_parity, CuspidalLabel, GroupKind, GroupType, HalfInt, Segment};
use crate::clrep::{AParameter, ASummand, ClDatum, Summand, TemperedTable};
use crate::derivatives::{chain_kinds, lower_trace, rebuild, run_chain, Direction};
use crate::error::{Error, Result};
use crate::glrep::{GlDatum, SpehShape};
use crate::text::{label_suffix_text, Cursor};

/// `([A,B]_ρ, l, η)`; the label lives on the enclosing block.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExtendedSegment {
    #[serde(rename = "A")]
    pub big_a: HalfInt,
    #[serde(rename = "B")]
    pub big_b: HalfInt,
    pub l: u32,
    pub eta: i8,
}

impl ExtendedSegment {
    /// Builds the segment, forgetting `η` when `l = b/2`.
    pub fn new(big_a: HalfInt, big_b: HalfInt, l: u32, eta: i8) -> Self {
        let mut e = ExtendedSegment { big_a, big_b, l, eta };
        e.normalize();
        e
    }

    fn normalize(&mut self) {
        if self.b() == Some(2 * self.l as i64) {
            self.eta = 1;
        }
    }

    /// `b = A - B + 1`, if `A - B` is an integer.
    fn b(&self) -> Option<i64> {
        let d = self.big_a - self.big_b;
        d.to_int().map(|d| d + 1)
    }

    /// `a = A + B + 1`.
    pub fn a_dim(&self) -> u32 {
        (self.big_a + self.big_b + 1).to_int().unwrap_or(0).max(0) as u32
    }

    /// `b = A - B + 1`.
    pub fn b_dim(&self) -> u32 {
        self.b().unwrap_or(0).max(0) as u32
    }

    fn shifted(&self, t: i64) -> ExtendedSegment {
        ExtendedSegment { big_a: self.big_a + t, big_b: self.big_b + t, ..self.clone() }
    }
}

impl fmt::Display for ExtendedSegment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let eta = if self.eta > 0 { "+1" } else { "-1" };
        write!(f, "([{},{}];{},{})", self.big_a, self.big_b, self.l, eta)
    }
}

/// The extended segments carrying one label, in their admissible order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RhoBlock {
    pub rho: CuspidalLabel,
    pub segments: Vec<ExtendedSegment>,
}

/// `E = ∪_ρ {([A_i,B_i]_ρ, l_i, η_i)}_{i ∈ (I_ρ,>)}` for the group `group`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExtendedMultiSegment {
    blocks: Vec<RhoBlock>,
    pub group: GroupType,
}

/// A violated clause found by [`validate`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub clause: Clause,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clause {
    /// `A - B ∈ ℤ_{≥0}`, `A + B ≥ 0` and `0 ≤ l ≤ b/2`.
    Segment,
    /// `B_i < B_j` forces `i < j`.
    AdmissibleOrder,
    /// `ψ_E` has good parity and fits the group.
    Parameter,
    SignCondition,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Clause::Segment => "segment",
            Clause::AdmissibleOrder => "admissible order",
            Clause::Parameter => "parameter",
            Clause::SignCondition => "sign condition",
        })
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.clause, self.message)
    }
}

impl ExtendedMultiSegment {
    /// Blocks with the same label are merged; blocks are kept sorted by label.
    pub fn new(blocks: Vec<RhoBlock>, group: GroupType) -> Self {
        let mut merged: BTreeMap<CuspidalLabel, Vec<ExtendedSegment>> = BTreeMap::new();
        for b in blocks {
            merged.entry(b.rho).or_default().extend(b.segments);
        }
        let blocks = merged
            .into_iter()
            .filter(|(_, s)| !s.is_empty())
            .map(|(rho, mut segments)| {
                segments.iter_mut().for_each(ExtendedSegment::normalize);
                RhoBlock { rho, segments }
            })
            .collect();
        ExtendedMultiSegment { blocks, group }
    }

    /// Infers the group of the given kind from the dimension of `ψ_E`.
    pub fn with_kind(blocks: Vec<RhoBlock>, kind: GroupKind) -> Result<Self> {
        let dim: u32 = blocks
            .iter()
            .flat_map(|b| b.segments.iter().map(move |s| dual_dimension_of(&b.rho, s.a_dim(), s.b_dim())))
            .sum();
        let group = GroupType::from_dual_dimension(kind, dim)
            .ok_or_else(|| Error::Invalid(format!("no group of kind {kind:?} has dual dimension {dim}")))?;
        Ok(ExtendedMultiSegment::new(blocks, group))
    }

    pub fn blocks(&self) -> &[RhoBlock] {
        &self.blocks
    }

    pub fn block(&self, rho: &CuspidalLabel) -> &[ExtendedSegment] {
        self.blocks.iter().find(|b| b.rho == *rho).map_or(&[], |b| &b.segments)
    }

    pub fn labels(&self) -> Vec<CuspidalLabel> {
        self.blocks.iter().map(|b| b.rho.clone()).collect()
    }

    /// Parse `{([A,B];l,eta), ...}` or a sequence of blocks `id: {...}`.
    pub fn parse(text: &str, kind: GroupKind, labels: &[CuspidalLabel]) -> Result<Self> {
        ExtendedMultiSegment::with_kind(ExtendedMultiSegment::parse_blocks(text, labels)?, kind)
    }

    /// The blocks of the text form, before any group is inferred.
    pub fn parse_blocks(text: &str, labels: &[CuspidalLabel]) -> Result<Vec<RhoBlock>> {
        let mut cur = Cursor::new(text);
        let mut blocks = Vec::new();
        loop {
            let rho = if cur.peek() == Some('{') {
                labels.iter().find(|l| l.id == "rho").or(labels.first()).cloned().unwrap_or_default()
            } else {
                let id = cur.ident()?;
                cur.expect(":")?;
                labels
                    .iter()
                    .find(|l| l.id == id)
                    .cloned()
                    .ok_or_else(|| cur.error(&format!("unknown cuspidal label {id:?}")))?
            };
            cur.expect("{")?;
            let mut segments = Vec::new();
            while cur.peek() != Some('}') {
                cur.expect("(")?;
                cur.expect("[")?;
                let big_a = cur.half_int()?;
                cur.expect(",")?;
                let big_b = cur.half_int()?;
                cur.expect("]")?;
                if !cur.eat(";") {
                    cur.expect(",")?;
                }
                let l = cur.unsigned()?;
                cur.expect(",")?;
                let eta = cur.sign()?;
                cur.expect(")")?;
                segments.push(ExtendedSegment { big_a, big_b, l, eta });
                if !cur.eat(",") {
                    break;
                }
            }
            cur.expect("}")?;
            blocks.push(RhoBlock { rho, segments });
            cur.eat(";");
            cur.eat(",");
            if cur.at_end() {
                break;
            }
        }
        Ok(blocks)
    }

    /// `ψ_E = ⊕ ρ ⊠ S_{a_i} ⊠ S_{b_i}`.
    pub fn psi(&self) -> Result<AParameter> {
        let summands = self
            .blocks
            .iter()
            .flat_map(|b| b.segments.iter().map(move |s| ASummand { rho: b.rho.clone(), a: s.a_dim(), b: s.b_dim() }))
            .collect();
        AParameter::new(summands, self.group)
    }

    /// Add the pair `([A,B],l,η), ([A,B],l,(-1)^{A-B}η)`, adjacent and after
    /// every entry with `B_j ≤ B`.
    pub fn with_pair(&self, rho: &CuspidalLabel, big_a: HalfInt, big_b: HalfInt, l: u32, eta: i8) -> Result<Self> {
        let first = ExtendedSegment::new(big_a, big_b, l, eta);
        let parity = (big_a - big_b).to_int().ok_or_else(|| Error::Invalid("A - B must be an integer".into()))?;
        let second = ExtendedSegment::new(big_a, big_b, l, if parity % 2 == 0 { eta } else { -eta });
        let mut blocks = self.blocks.clone();
        let idx = match blocks.iter().position(|b| b.rho == *rho) {
            Some(i) => i,
            None => {
                blocks.push(RhoBlock { rho: rho.clone(), segments: Vec::new() });
                blocks.len() - 1
            }
        };
        let segs = &mut blocks[idx].segments;
        let pos = segs.iter().position(|s| s.big_b > big_b).unwrap_or(segs.len());
        segs.insert(pos, second);
        segs.insert(pos, first);
        let dim = self.group.dual_dimension() + 2 * dual_dimension_of(rho, first_a(big_a, big_b), first_b(big_a, big_b));
        let group = GroupType::from_dual_dimension(self.group.kind, dim)
            .ok_or_else(|| Error::Inconsistent("dimension parity changed".into()))?;
        Ok(ExtendedMultiSegment::new(blocks, group))
    }
}

fn first_a(big_a: HalfInt, big_b: HalfInt) -> u32 {
    (big_a + big_b + 1).to_int().unwrap_or(0).max(0) as u32
}

fn first_b(big_a: HalfInt, big_b: HalfInt) -> u32 {
    (big_a - big_b + 1).to_int().unwrap_or(0).max(0) as u32
}

impl fmt::Display for ExtendedMultiSegment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let single_default = self.blocks.len() == 1 && self.blocks[0].rho.id == "rho";
        for (k, b) in self.blocks.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            if !single_default {
                write!(f, "{}: ", b.rho.id)?;
            }
            f.write_str("{")?;
            for (i, s) in b.segments.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{s}")?;
            }
            f.write_str("}")?;
        }
        if self.blocks.is_empty() {
            f.write_str("{}")?;
        }
        Ok(())
    }
}

/// Check every clause of the definition; an empty list means `E` is valid.
pub fn validate(e: &ExtendedMultiSegment) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |clause, message: String| out.push(Diagnostic { clause, message });
    let mut sign = 1i64;
    let mut dim = 0u32;
    for block in &e.blocks {
        let rho = &block.rho;
        for (i, s) in block.segments.iter().enumerate() {
            let at = format!("entry {i} {s}{}", label_suffix_text(rho));
            let b = match s.b() {
                Some(b) if b >= 1 => b,
                _ => {
                    push(Clause::Segment, format!("{at}: A - B is not a non-negative integer"));
                    continue;
                }
            };
            if s.big_a + s.big_b < HalfInt::ZERO {
                push(Clause::Segment, format!("{at}: A + B < 0"));
            }
            if 2 * s.l as i64 > b {
                push(Clause::Segment, format!("{at}: l exceeds b/2"));
            }
            if s.eta != 1 && s.eta != -1 {
                push(Clause::Segment, format!("{at}: eta must be +1 or -1"));
            }
            if !is_good_parity(rho, s.a_dim(), s.b_dim()) {
                push(Clause::Parameter, format!("{at}: ({},{}) is not of good parity", s.a_dim(), s.b_dim()));
            }
            dim += dual_dimension_of(rho, s.a_dim(), s.b_dim());
            let exp = b / 2 + s.l as i64;
            let eta_b = if s.eta < 0 && b % 2 == 1 { -1 } else { 1 };
            sign *= if exp % 2 == 0 { eta_b } else { -eta_b };
        }
        for (i, w) in block.segments.windows(2).enumerate() {
            if w[1].big_b < w[0].big_b {
                push(Clause::AdmissibleOrder, format!("entries {i} and {} of {} have decreasing B", i + 1, rho.id));
            }
        }
    }
    if dim != e.group.dual_dimension() {
        push(Clause::Parameter, format!("psi_E has dimension {dim}, the dual group of {} needs {}", e.group, e.group.dual_dimension()));
    }
    if sign != 1 {
        push(Clause::SignCondition, "the product of (-1)^([b/2]+l) eta^b is -1".into());
    }
    out
}

fn require_valid(e: &ExtendedMultiSegment) -> Result<()> {
    let diags = validate(e);
    if diags.is_empty() {
        Ok(())
    } else {
        let text: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
        Err(Error::Invalid(format!("{e}: {}", text.join("; "))))
    }
}

/// Order in which the shifted entries are pulled back to their places.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PullbackOrder {
    /// Largest index first.
    TopDown,
    /// Smallest index first.
    BottomUp,
}

/// `π(E)`, or `None` when it vanishes.
pub fn build_pi(e: &ExtendedMultiSegment) -> Result<Option<ClDatum>> {
    build_pi_with(e, PullbackOrder::BottomUp)
}

/// [`build_pi`] with an explicit pullback order.
pub fn build_pi_with(e: &ExtendedMultiSegment, order: PullbackOrder) -> Result<Option<ClDatum>> {
    build_pi_padded(e, order, 0)
}

/// [`build_pi_with`], shifting every entry `pad` further than needed.
pub fn build_pi_padded(e: &ExtendedMultiSegment, order: PullbackOrder, pad: i64) -> Result<Option<ClDatum>> {
    require_valid(e)?;
    // shift upwards, lowest index first, to a non-negative DDR datum
    let mut shifts: Vec<Vec<i64>> = Vec::new();
    let mut segs = Vec::new();
    let mut table = TemperedTable::default();
    for block in &e.blocks {
        let rho = &block.rho;
        let mut ts = Vec::new();
        let mut floor: Option<HalfInt> = None;
        for s in &block.segments {
            // smallest integer t with B + t >= 0
            let mut t = (-s.big_b.twice()).div_euclid(2).max(0);
            if HalfInt::int(t) < -s.big_b {
                t += 1;
            }
            t += pad;
            if let Some(fl) = floor {
                let need = fl + 1 + pad - s.big_b;
                let need = need.to_int().ok_or_else(|| Error::Invalid("exponents of one label must be congruent".into()))?;
                t = t.max(need);
            }
            let sh = s.shifted(t);
            floor = Some(sh.big_a);
            ts.push(t);
            add_ddr_piece(rho, &sh, &mut segs, &mut table)?;
        }
        shifts.push(ts);
    }
    let mut pi = ClDatum::from_table(GlDatum::new(segs), &table)?;
    let mut jobs: Vec<(usize, usize)> = Vec::new();
    for (bi, block) in e.blocks.iter().enumerate() {
        let idx: Vec<usize> = match order {
            PullbackOrder::TopDown => (0..block.segments.len()).rev().collect(),
            PullbackOrder::BottomUp => (0..block.segments.len()).collect(),
        };
        jobs.extend(idx.into_iter().map(|i| (bi, i)));
    }
    for (bi, i) in jobs {
        let block = &e.blocks[bi];
        let s = &block.segments[i];
        for t in (1..=shifts[bi][i]).rev() {
            match pull_row(&pi, &block.rho, s.big_b + t, s.big_a + t)? {
                Some(next) => pi = next,
                None => return Ok(None),
            }
        }
    }
    Ok(Some(pi))
}

/// Segments and tempered summands of one entry of a non-negative DDR datum.
fn add_ddr_piece(rho: &CuspidalLabel, s: &ExtendedSegment, segs: &mut Vec<Segment>, table: &mut TemperedTable) -> Result<()> {
    for j in 0..s.l as i64 {
        segs.push(Segment::new(rho.clone(), s.big_b + j, -s.big_a + j)?);
    }
    let count = s.b_dim() as i64 - 2 * s.l as i64;
    for k in 0..count {
        let x = s.big_b + s.l as i64 + k;
        let summand = Summand::from_exponent(rho, x).ok_or_else(|| Error::Invalid(format!("negative exponent {x}")))?;
        let sign = if k % 2 == 0 { s.eta } else { -s.eta };
        table.add(&summand, 1, sign);
    }
    Ok(())
}

/// `D_{ρ|·|^{lo}, ..., ρ|·|^{hi}}(π)` for the Zelevinsky segment `Z_ρ[lo, hi]`:
/// the `σ` with `π = soc(Z_ρ[lo, hi] ⋊ σ)`, or `None` when there is none.
fn pull_row(pi: &ClDatum, rho: &CuspidalLabel, lo: HalfInt, hi: HalfInt) -> Result<Option<ClDatum>> {
    let kinds = chain_kinds(rho, lo, hi, Direction::Ascending)?;
    let (sigma, trace) = run_chain(pi, &kinds)?;
    let lowered = match lower_trace(&trace) {
        Some(t) => t,
        None => return Ok(None),
    };
    let out = match rebuild(&sigma, &lowered) {
        Ok(o) => o,
        Err(Error::Inconsistent(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let (check, trace2) = run_chain(&out, &kinds)?;
    if check != sigma || trace2 != lowered {
        return Ok(None);
    }
    Ok(Some(out))
}

/// `π(E) ≠ 0`.
pub fn is_nonvanishing(e: &ExtendedMultiSegment) -> Result<bool> {
    Ok(build_pi(e)?.is_some())
}

/// Result of decomposing `u_ρ(a,b) ⋊ π(E)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UnitaryDecomposition {
    /// `ψ_E ⊕ (ρ ⊠ S_a ⊠ S_b)^{⊕2}` is not of good parity and the induction is irreducible.
    BadParity,
    Summands { summands: Vec<Member> },
}

/// A nonzero `π(E)` together with `E`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Member {
    pub e: ExtendedMultiSegment,
    pub pi: ClDatum,
}

impl UnitaryDecomposition {
    pub fn len(&self) -> usize {
        match self {
            UnitaryDecomposition::BadParity => 1,
            UnitaryDecomposition::Summands { summands } => summands.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// The classes `(l, η)` with `0 ≤ l ≤ b/2`, `η` forgotten when `l = b/2`.
pub fn pair_classes(b: u32) -> Vec<(u32, i8)> {
    let mut out = Vec::new();
    for l in 0..=b / 2 {
        out.push((l, 1));
        if 2 * l < b {
            out.push((l, -1));
        }
    }
    out
}

/// `u_ρ(a,b) ⋊ π(E) = ⊕ π(E_{(l,η)})` over the nonzero `π(E_{(l,η)})`.
pub fn decompose_unitary(u: &SpehShape, e: &ExtendedMultiSegment) -> Result<UnitaryDecomposition> {
    if u.s != HalfInt::ZERO {
        return Err(Error::Precondition(format!("decomposition needs s = 0, got {}", u.s)));
    }
    if build_pi(e)?.is_none() {
        return Err(Error::Precondition(format!("pi({e}) vanishes")));
    }
    if !is_good_parity(&u.rho, u.a, u.b) {
        return Ok(UnitaryDecomposition::BadParity);
    }
    let (big_a, big_b) = (u.big_a(), u.big_b());
    let mut summands: Vec<Member> = Vec::new();
    // every class is tried: a shortcut skipping B + l = -1/2 with η = -1
    // drops nonzero members when E already has entries with the same B
    for (l, eta) in pair_classes(u.b) {
        let e2 = e.with_pair(&u.rho, big_a, big_b, l, eta)?;
        if let Some(pi) = build_pi(&e2)? {
            if summands.iter().any(|m| m.pi == pi) {
                return Err(Error::Inconsistent(format!("{pi} occurs twice in u({},{}) x pi({e})", u.a, u.b)));
            }
            summands.push(Member { e: e2, pi });
        }
    }
    Ok(UnitaryDecomposition::Summands { summands })
}

/// All nonzero `π(E)` with `ψ_E ≅ ψ`, for `ψ` of good parity.
///
/// Entries are ordered by `B`, then `A`; members with equal Langlands data
/// are listed once, under the first `E` found.
pub fn packet_of(psi: &AParameter) -> Result<Vec<Member>> {
    if !psi.is_good_parity() {
        return Err(Error::Precondition(format!("{psi} is not of good parity")));
    }
    let mut by_rho: BTreeMap<CuspidalLabel, Vec<(HalfInt, HalfInt)>> = BTreeMap::new();
    for s in psi.summands() {
        let big_a = HalfInt::from_twice(s.a as i64 + s.b as i64 - 2);
        let big_b = HalfInt::from_twice(s.a as i64 - s.b as i64);
        by_rho.entry(s.rho.clone()).or_default().push((big_a, big_b));
    }
    let mut slots: Vec<(CuspidalLabel, HalfInt, HalfInt)> = Vec::new();
    for (rho, mut v) in by_rho {
        v.sort_by_key(|x| (x.1, x.0));
        slots.extend(v.into_iter().map(|(a, b)| (rho.clone(), a, b)));
    }
    let choices: Vec<Vec<(u32, i8)>> = slots.iter().map(|(_, a, b)| pair_classes(first_b(*a, *b))).collect();
    let mut out: Vec<Member> = Vec::new();
    let mut idx = vec![0usize; slots.len()];
    loop {
        let mut blocks: Vec<RhoBlock> = Vec::new();
        for (k, (rho, a, b)) in slots.iter().enumerate() {
            let (l, eta) = choices[k][idx[k]];
            let seg = ExtendedSegment::new(*a, *b, l, eta);
            match blocks.last_mut() {
                Some(bl) if bl.rho == *rho => bl.segments.push(seg),
                _ => blocks.push(RhoBlock { rho: rho.clone(), segments: vec![seg] }),
            }
        }
        let e = ExtendedMultiSegment::new(blocks, psi.group);
        if validate(&e).is_empty() {
            if let Some(pi) = build_pi(&e)? {
                if !out.iter().any(|m| m.pi == pi) {
                    out.push(Member { e, pi });
                }
            }
        }
        // next choice vector
        let mut k = 0;
        loop {
            if k == idx.len() {
                return Ok(out);
            }
            idx[k] += 1;
            if idx[k] < choices[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}
