//! Irreducible representations of `G_n` in Langlands notation, tempered
//! parameters with characters, and A-parameters.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::base::{dual_dimension_of, is_good_parity, CuspidalLabel, GroupKind, GroupType, HalfInt};
use crate::error::{Error, Result};
use crate::glrep::{parse_segment_list, GlDatum};
use crate::text::{label_suffix_text, Cursor};

/// The irreducible representation `ρ ⊠ S_d` of `W_F × SL_2(C)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Summand {
    pub rho: CuspidalLabel,
    pub d: u32,
}

impl Summand {
    pub fn new(rho: &CuspidalLabel, d: u32) -> Self {
        Summand { rho: rho.clone(), d }
    }

    /// The summand `ρ ⊠ S_{2x+1}`; `None` unless `x ≥ 0`.
    pub fn from_exponent(rho: &CuspidalLabel, x: HalfInt) -> Option<Self> {
        let d = (x + x + 1).to_int()?;
        (d >= 1).then(|| Summand::new(rho, d as u32))
    }

    /// `x` with `d = 2x + 1`.
    pub fn exponent(&self) -> HalfInt {
        HalfInt::from_twice(self.d as i64 - 1)
    }
}

impl fmt::Debug for Summand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}{}", self.d, label_suffix_text(&self.rho))
    }
}

/// A tempered L-parameter of good parity, as a sorted multiset of summands.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(from = "Vec<Summand>", into = "Vec<Summand>")]
pub struct TemperedParam {
    summands: Vec<Summand>,
}

impl TemperedParam {
    pub fn new(mut summands: Vec<Summand>) -> Self {
        summands.sort();
        TemperedParam { summands }
    }

    pub fn summands(&self) -> &[Summand] {
        &self.summands
    }

    pub fn multiplicity(&self, s: &Summand) -> u32 {
        self.summands.iter().filter(|t| *t == s).count() as u32
    }

    pub fn distinct(&self) -> Vec<Summand> {
        let mut v = self.summands.clone();
        v.dedup();
        v
    }

    pub fn dual_dimension(&self) -> u32 {
        self.summands.iter().map(|s| s.rho.dim * s.d).sum()
    }

    pub fn is_good_parity(&self) -> bool {
        self.summands.iter().all(|s| is_good_parity(&s.rho, s.d, 1))
    }
}

impl From<Vec<Summand>> for TemperedParam {
    fn from(v: Vec<Summand>) -> Self {
        TemperedParam::new(v)
    }
}

impl From<TemperedParam> for Vec<Summand> {
    fn from(p: TemperedParam) -> Self {
        p.summands
    }
}

#[derive(Clone, Serialize, Deserialize)]
struct SignEntry {
    rho: CuspidalLabel,
    d: u32,
    sign: i8,
}

/// A character of the component group, as a sign on each distinct summand.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(from = "Vec<SignEntry>", into = "Vec<SignEntry>")]
pub struct Character {
    signs: BTreeMap<Summand, i8>,
}

impl Character {
    pub fn new(signs: BTreeMap<Summand, i8>) -> Self {
        Character { signs }
    }

    pub fn sign(&self, s: &Summand) -> Option<i8> {
        self.signs.get(s).copied()
    }

    pub fn signs(&self) -> &BTreeMap<Summand, i8> {
        &self.signs
    }
}

impl From<Vec<SignEntry>> for Character {
    fn from(v: Vec<SignEntry>) -> Self {
        Character { signs: v.into_iter().map(|e| (Summand { rho: e.rho, d: e.d }, e.sign)).collect() }
    }
}

impl From<Character> for Vec<SignEntry> {
    fn from(c: Character) -> Self {
        c.signs.into_iter().map(|(s, sign)| SignEntry { rho: s.rho, d: s.d, sign }).collect()
    }
}

/// `eps` is a sign on exactly the distinct summands of `phi` whose product,
/// counted with multiplicity, is `+1`.
pub fn validate_character(phi: &TemperedParam, eps: &Character) -> bool {
    let distinct = phi.distinct();
    if distinct.len() != eps.signs.len() || distinct.iter().any(|s| !eps.signs.contains_key(s)) {
        return false;
    }
    if eps.signs.values().any(|&e| e != 1 && e != -1) {
        return false;
    }
    phi.summands.iter().map(|s| eps.signs[s] as i32).product::<i32>() == 1
}

/// A tempered representation `π(φ, ε)` kept as a table `summand -> (multiplicity, sign)`.
///
/// This is the working form used by the derivative code; it need not satisfy
/// the product rule until converted back into a [`ClDatum`].
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TemperedTable {
    entries: BTreeMap<Summand, (u32, i8)>,
}

impl TemperedTable {
    pub fn mult(&self, s: &Summand) -> u32 {
        self.entries.get(s).map_or(0, |e| e.0)
    }

    pub fn sign(&self, s: &Summand) -> Option<i8> {
        self.entries.get(s).map(|e| e.1)
    }

    /// Add `n` copies of `s`; the sign is only used when `s` is new.
    pub fn add(&mut self, s: &Summand, n: u32, sign: i8) {
        if n == 0 {
            return;
        }
        self.entries.entry(s.clone()).or_insert((0, sign)).0 += n;
    }

    pub fn remove(&mut self, s: &Summand, n: u32) -> Result<()> {
        if n == 0 {
            return Ok(());
        }
        let e = self
            .entries
            .get_mut(s)
            .filter(|e| e.0 >= n)
            .ok_or_else(|| Error::Inconsistent(format!("cannot remove {n} copies of {s:?}")))?;
        e.0 -= n;
        if e.0 == 0 {
            self.entries.remove(s);
        }
        Ok(())
    }

    pub fn set_sign(&mut self, s: &Summand, sign: i8) {
        if let Some(e) = self.entries.get_mut(s) {
            e.1 = sign;
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Summand, u32, i8)> {
        self.entries.iter().map(|(s, &(m, e))| (s, m, e))
    }
}

/// The irreducible representation `L(Δ_1, ..., Δ_r; π(φ, ε))` of some `G_n`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClDatum {
    gl: GlDatum,
    phi: TemperedParam,
    eps: Character,
}

impl ClDatum {
    /// Checks that every segment has negative exponent and that `(φ, ε)` is
    /// a tempered parameter of good parity with a valid character.
    pub fn new(gl: GlDatum, phi: TemperedParam, eps: Character) -> Result<Self> {
        if let Some(s) = gl.segments().iter().find(|s| s.exponent_sum() >= HalfInt::ZERO) {
            return Err(Error::Invalid(format!("segment {s:?} is not of negative exponent")));
        }
        if !phi.is_good_parity() {
            return Err(Error::Invalid("tempered parameter is not of good parity".into()));
        }
        if !validate_character(&phi, &eps) {
            return Err(Error::Invalid(format!("invalid character {:?} on {:?}", eps.signs, phi.summands)));
        }
        Ok(ClDatum { gl, phi, eps })
    }

    pub fn from_table(gl: GlDatum, table: &TemperedTable) -> Result<Self> {
        let mut summands = Vec::new();
        let mut signs = BTreeMap::new();
        for (s, m, e) in table.entries() {
            summands.extend(std::iter::repeat_n(s.clone(), m as usize));
            signs.insert(s.clone(), e);
        }
        ClDatum::new(gl, TemperedParam::new(summands), Character::new(signs))
    }

    pub fn tempered(phi: TemperedParam, eps: Character) -> Result<Self> {
        ClDatum::new(GlDatum::trivial(), phi, eps)
    }

    pub fn gl(&self) -> &GlDatum {
        &self.gl
    }

    pub fn phi(&self) -> &TemperedParam {
        &self.phi
    }

    pub fn eps(&self) -> &Character {
        &self.eps
    }

    pub fn table(&self) -> TemperedTable {
        let mut t = TemperedTable::default();
        for s in self.phi.distinct() {
            t.add(&s, self.phi.multiplicity(&s), self.eps.signs[&s]);
        }
        t
    }

    pub fn with_gl(&self, gl: GlDatum) -> Result<Self> {
        ClDatum::new(gl, self.phi.clone(), self.eps.clone())
    }

    pub fn is_tempered(&self) -> bool {
        self.gl.is_trivial()
    }

    /// Dimension of the L-parameter of this representation.
    pub fn dual_dimension(&self) -> u32 {
        let gl: u64 = self.gl.segments().iter().map(|s| s.len() as u64 * s.rho.dim as u64).sum();
        self.phi.dual_dimension() + 2 * gl as u32
    }

    pub fn group(&self, kind: GroupKind) -> Option<GroupType> {
        GroupType::from_dual_dimension(kind, self.dual_dimension())
    }

    /// Parse `L(D[x,y],...; pi(x^s,...))` or `pi(x^s,...)`.
    ///
    /// Exponents in `pi(...)` are `x` with `d = 2x + 1`; a suffix `@id` after
    /// a sign or segment selects a label from `labels` (default `rho`).
    pub fn parse(text: &str, labels: &[CuspidalLabel]) -> Result<Self> {
        let mut cur = Cursor::new(text);
        let (gl, (phi, eps)) = if cur.eat("L(") {
            let segs = parse_segment_list(&mut cur, labels, &[";"])?;
            cur.expect(";")?;
            let temp = parse_pi(&mut cur, labels)?;
            cur.expect(")")?;
            (GlDatum::new(segs), temp)
        } else {
            (GlDatum::trivial(), parse_pi(&mut cur, labels)?)
        };
        cur.finish()?;
        ClDatum::new(gl, phi, eps)
    }
}

fn parse_pi(cur: &mut Cursor<'_>, labels: &[CuspidalLabel]) -> Result<(TemperedParam, Character)> {
    cur.expect("pi(")?;
    let mut summands = Vec::new();
    let mut signs: BTreeMap<Summand, i8> = BTreeMap::new();
    while cur.peek() != Some(')') {
        let x = cur.half_int()?;
        cur.expect("^")?;
        let sign = cur.sign()?;
        let rho = cur.label_suffix(labels)?;
        let s = Summand::from_exponent(&rho, x).ok_or_else(|| cur.error("exponent must be at least 0"))?;
        if signs.insert(s.clone(), sign).is_some_and(|old| old != sign) {
            return Err(cur.error("equal summands must carry equal signs"));
        }
        summands.push(s);
        if !cur.eat(",") {
            break;
        }
    }
    cur.expect(")")?;
    Ok((TemperedParam::new(summands), Character::new(signs)))
}

pub(crate) fn write_pi(f: &mut fmt::Formatter<'_>, phi: &TemperedParam, eps: &Character) -> fmt::Result {
    f.write_str("pi(")?;
    let mut ordered = phi.summands.clone();
    ordered.sort_by(|a, b| (a.rho.id != "rho", &a.rho.id, a.d).cmp(&(b.rho.id != "rho", &b.rho.id, b.d)));
    for (i, s) in ordered.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        let sign = if eps.signs[s] > 0 { '+' } else { '-' };
        write!(f, "{}^{}{}", s.exponent(), sign, label_suffix_text(&s.rho))?;
    }
    f.write_str(")")
}

impl fmt::Display for ClDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.gl.is_trivial() {
            return write_pi(f, &self.phi, &self.eps);
        }
        f.write_str("L(")?;
        crate::glrep::write_segment_list(f, self.gl.segments())?;
        f.write_str("; ")?;
        write_pi(f, &self.phi, &self.eps)?;
        f.write_str(")")
    }
}

impl fmt::Debug for ClDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for ClDatum {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClDatum::parse(s, &[])
    }
}

/// One summand `ρ ⊠ S_a ⊠ S_b` of an A-parameter.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ASummand {
    pub rho: CuspidalLabel,
    pub a: u32,
    pub b: u32,
}

impl ASummand {
    pub fn is_good_parity(&self) -> bool {
        is_good_parity(&self.rho, self.a, self.b)
    }

    pub fn dual_dimension(&self) -> u32 {
        dual_dimension_of(&self.rho, self.a, self.b)
    }
}

/// An A-parameter `ψ = ⊕ ρ ⊠ S_a ⊠ S_b` for the group `group`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AParameter {
    summands: Vec<ASummand>,
    pub group: GroupType,
}

impl AParameter {
    pub fn new(mut summands: Vec<ASummand>, group: GroupType) -> Result<Self> {
        if summands.iter().any(|s| s.a == 0 || s.b == 0) {
            return Err(Error::Invalid("S_0 is not a representation".into()));
        }
        summands.sort();
        let dim: u32 = summands.iter().map(ASummand::dual_dimension).sum();
        if dim != group.dual_dimension() {
            return Err(Error::Invalid(format!(
                "parameter of dimension {dim} does not fit {group} (dual dimension {})",
                group.dual_dimension()
            )));
        }
        Ok(AParameter { summands, group })
    }

    /// Build with the group inferred from the dimension.
    pub fn with_kind(summands: Vec<ASummand>, kind: GroupKind) -> Result<Self> {
        let dim: u32 = summands.iter().map(ASummand::dual_dimension).sum();
        let group = GroupType::from_dual_dimension(kind, dim)
            .ok_or_else(|| Error::Invalid(format!("no group of kind {kind:?} has dual dimension {dim}")))?;
        AParameter::new(summands, group)
    }

    pub fn summands(&self) -> &[ASummand] {
        &self.summands
    }

    pub fn is_good_parity(&self) -> bool {
        self.summands.iter().all(ASummand::is_good_parity)
    }

    /// Parse `(a,b) + (a,b)@id + ...`.
    pub fn parse(text: &str, kind: GroupKind, labels: &[CuspidalLabel]) -> Result<Self> {
        let mut cur = Cursor::new(text);
        let mut summands = Vec::new();
        loop {
            cur.expect("(")?;
            let a = cur.unsigned()?;
            cur.expect(",")?;
            let b = cur.unsigned()?;
            cur.expect(")")?;
            let rho = cur.label_suffix(labels)?;
            summands.push(ASummand { rho, a, b });
            if !cur.eat("+") {
                break;
            }
        }
        cur.finish()?;
        AParameter::with_kind(summands, kind)
    }
}

impl fmt::Display for AParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.summands.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({},{}){}", s.a, s.b, label_suffix_text(&s.rho))?;
        }
        Ok(())
    }
}

/// Split `ψ = ψ_1 ⊕ ψ_0 ⊕ ψ_1^∨` with `ψ_0` of good parity and `ψ_1` collecting
/// one copy of each pair of bad-parity summands.
pub fn moeglin_split(psi: &AParameter) -> Result<(Vec<ASummand>, AParameter)> {
    let mut bad: BTreeMap<&ASummand, u32> = BTreeMap::new();
    let mut good = Vec::new();
    for s in &psi.summands {
        if s.is_good_parity() {
            good.push(s.clone());
        } else {
            *bad.entry(s).or_default() += 1;
        }
    }
    let mut psi1 = Vec::new();
    for (s, m) in bad {
        if m % 2 == 1 {
            return Err(Error::Invalid(format!("bad parity summand {s:?} occurs an odd number of times")));
        }
        psi1.extend(std::iter::repeat_n(s.clone(), m as usize / 2));
    }
    let removed: u32 = psi1.iter().map(ASummand::dual_dimension).sum();
    let group = GroupType::from_dual_dimension(psi.group.kind, psi.group.dual_dimension() - 2 * removed)
        .ok_or_else(|| Error::Inconsistent("good parity part has the wrong dimension".into()))?;
    Ok((psi1, AParameter::new(good, group)?))
}
