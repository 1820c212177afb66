//! Exponents, cuspidal labels, segments and group types.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An element of `(1/2)Z`, stored as twice its value.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct HalfInt {
    twice: i64,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { twice: 0 };
    pub const ONE: HalfInt = HalfInt { twice: 2 };
    pub const HALF: HalfInt = HalfInt { twice: 1 };

    pub const fn from_twice(twice: i64) -> Self {
        HalfInt { twice }
    }

    pub const fn int(n: i64) -> Self {
        HalfInt { twice: 2 * n }
    }

    pub const fn twice(self) -> i64 {
        self.twice
    }

    pub const fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    /// Value as an integer, if it is one.
    pub fn to_int(self) -> Option<i64> {
        self.is_integer().then_some(self.twice / 2)
    }

    pub fn abs(self) -> Self {
        HalfInt { twice: self.twice.abs() }
    }

    /// `self` and `other` differ by an integer.
    pub fn congruent(self, other: HalfInt) -> bool {
        (self.twice - other.twice) % 2 == 0
    }

    pub fn to_f64(self) -> f64 {
        self.twice as f64 / 2.0
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt { twice: self.twice + rhs.twice }
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt { twice: self.twice - rhs.twice }
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt { twice: -self.twice }
    }
}

impl Add<i64> for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: i64) -> HalfInt {
        HalfInt { twice: self.twice + 2 * rhs }
    }
}

impl Sub<i64> for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: i64) -> HalfInt {
        HalfInt { twice: self.twice - 2 * rhs }
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl fmt::Debug for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("not a half-integer: {s:?}"));
        if let Some((num, den)) = s.split_once('/') {
            let num: i64 = num.trim().parse().map_err(|_| bad())?;
            match den.trim() {
                "1" => Ok(HalfInt::int(num)),
                "2" => Ok(HalfInt::from_twice(num)),
                _ => Err(bad()),
            }
        } else if let Some((int, frac)) = s.split_once('.') {
            let neg = int.trim_start().starts_with('-');
            let int: i64 = if int == "-" || int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
            let half = match frac.trim_end_matches('0') {
                "" => 0,
                "5" => 1,
                _ => return Err(bad()),
            };
            let twice = 2 * int + if neg { -half } else { half };
            Ok(HalfInt::from_twice(twice))
        } else {
            s.parse::<i64>().map(HalfInt::int).map_err(|_| bad())
        }
    }
}

impl From<i64> for HalfInt {
    fn from(n: i64) -> Self {
        HalfInt::int(n)
    }
}

impl Serialize for HalfInt {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for HalfInt {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Int(n) => Ok(HalfInt::int(n)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// A self-dual irreducible supercuspidal representation of some `GL_d`.
///
/// `parity_class` records the type of `rho` relative to the group: with class 0,
/// `rho ⊠ S_d` is of good parity exactly for odd `d`; with class 1, for even `d`.
///
/// Labels compare by `id` alone.
#[derive(Clone, Serialize, Deserialize)]
pub struct CuspidalLabel {
    pub id: String,
    pub dim: u32,
    pub parity_class: u8,
}

impl CuspidalLabel {
    pub fn new(id: impl Into<String>, dim: u32, parity_class: u8) -> Self {
        CuspidalLabel { id: id.into(), dim, parity_class: parity_class % 2 }
    }

    /// The trivial character of `GL_1`, viewed as orthogonal.
    pub fn trivial() -> Self {
        CuspidalLabel::new("rho", 1, 0)
    }

    /// Exponents attached to `rho` inside good-parity data: integers for class 0,
    /// proper half-integers for class 1.
    pub fn good_exponent(&self, x: HalfInt) -> bool {
        x.is_integer() == (self.parity_class == 0)
    }
}

impl PartialEq for CuspidalLabel {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for CuspidalLabel {}

impl std::hash::Hash for CuspidalLabel {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.id.hash(state);
    }
}

impl PartialOrd for CuspidalLabel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CuspidalLabel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.id.cmp(&other.id)
    }
}

impl Default for CuspidalLabel {
    fn default() -> Self {
        CuspidalLabel::trivial()
    }
}

impl fmt::Debug for CuspidalLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id)
    }
}

/// `rho ⊠ S_a ⊠ S_b` is of good parity.
pub fn is_good_parity(rho: &CuspidalLabel, a: u32, b: u32) -> bool {
    if a == 0 || b == 0 {
        return false;
    }
    let total = (a + b) % 2;
    match rho.parity_class {
        0 => total == 0,
        _ => total == 1,
    }
}

/// The segment `Δ_ρ[x, y]` with `x ≥ y - 1`; `x = y - 1` is the empty segment.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Segment {
    pub rho: CuspidalLabel,
    pub x: HalfInt,
    pub y: HalfInt,
}

impl Segment {
    pub fn new(rho: CuspidalLabel, x: HalfInt, y: HalfInt) -> Result<Self> {
        if !x.congruent(y) || x + 1 < y {
            return Err(Error::Invalid(format!("malformed segment [{x},{y}]")));
        }
        Ok(Segment { rho, x, y })
    }

    /// Constructor for callers that already know `x - y` is a non-negative integer.
    pub(crate) fn raw(rho: &CuspidalLabel, x: HalfInt, y: HalfInt) -> Self {
        debug_assert!(x.congruent(y) && x >= y, "bad segment [{x},{y}]");
        Segment { rho: rho.clone(), x, y }
    }

    pub fn len(&self) -> i64 {
        (self.x - self.y).twice() / 2 + 1
    }

    pub fn is_empty(&self) -> bool {
        self.x < self.y
    }

    /// Twice the central exponent `(x + y) / 2`, i.e. `x + y`.
    pub fn exponent_sum(&self) -> HalfInt {
        self.x + self.y
    }

    /// The contragredient `Δ[-y, -x]`.
    pub fn dual(&self) -> Segment {
        Segment { rho: self.rho.clone(), x: -self.y, y: -self.x }
    }

    pub fn shift(&self, s: HalfInt) -> Segment {
        Segment { rho: self.rho.clone(), x: self.x + s, y: self.y + s }
    }

    pub fn contains(&self, e: HalfInt) -> bool {
        e.congruent(self.x) && self.y <= e && e <= self.x
    }

    /// Sorting key for Langlands data: ascending `x + y`, then ascending `x`.
    pub(crate) fn langlands_key(&self) -> (HalfInt, HalfInt, &CuspidalLabel) {
        (self.x + self.y, self.x, &self.rho)
    }
}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.langlands_key().cmp(&other.langlands_key()).then_with(|| self.y.cmp(&other.y))
    }
}

impl fmt::Debug for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "D[{},{}]", self.x, self.y)?;
        if self.rho.id != "rho" {
            write!(f, "@{}", self.rho.id)?;
        }
        Ok(())
    }
}

/// Two segments are linked when their union is a segment containing both strictly.
pub fn segments_linked(a: &Segment, b: &Segment) -> bool {
    if a.rho != b.rho || !a.x.congruent(b.x) {
        return false;
    }
    let (lo, hi) = if a.x <= b.x { (a, b) } else { (b, a) };
    // lo sits to the left: linked iff hi starts strictly above lo, begins no
    // higher than one past lo's top, and is not nested.
    lo.x < hi.x && lo.y < hi.y && hi.y <= lo.x + 1
}

/// `GroupKind::Sp` is `Sp_{2n}`, `GroupKind::SoOdd` is split `SO_{2n+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKind {
    Sp,
    SoOdd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupType {
    pub kind: GroupKind,
    pub rank: u32,
}

impl GroupType {
    /// Dimension of the standard representation of the dual group.
    pub fn dual_dimension(&self) -> u32 {
        match self.kind {
            GroupKind::Sp => 2 * self.rank + 1,
            GroupKind::SoOdd => 2 * self.rank,
        }
    }

    /// The group whose dual has dimension `n`, if `n` has the right parity.
    pub fn from_dual_dimension(kind: GroupKind, n: u32) -> Option<GroupType> {
        match kind {
            GroupKind::Sp if n % 2 == 1 => Some(GroupType { kind, rank: (n - 1) / 2 }),
            GroupKind::SoOdd if n.is_multiple_of(2) => Some(GroupType { kind, rank: n / 2 }),
            _ => None,
        }
    }
}

impl fmt::Display for GroupType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GroupKind::Sp => write!(f, "Sp{}", 2 * self.rank),
            GroupKind::SoOdd => write!(f, "SO{}", 2 * self.rank + 1),
        }
    }
}

/// Contribution of `rho ⊠ S_a ⊠ S_b` to the dual dimension.
pub fn dual_dimension_of(rho: &CuspidalLabel, a: u32, b: u32) -> u32 {
    rho.dim * a * b
}
