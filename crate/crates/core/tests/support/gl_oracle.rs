//! Brute-force computations in the Grothendieck ring of `GL_n` for a single
//! cuspidal and integral exponents.
//!
//! Standard modules `λ(m) = Δ_1 × ... × Δ_r` are expanded as the sum of all
//! `L(n)` with `n` obtainable from `m` by repeatedly replacing a linked pair by
//! its union and intersection, each with multiplicity one. That expansion is
//! exact for up to three segments, which is all this module is used for.
//! Jacquet modules come from the coproduct of segments.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

/// A segment `[x, y]` with `x >= y`.
pub type Seg = (i64, i64);
/// A sorted multisegment.
pub type Multi = Vec<Seg>;
/// A formal combination of basis vectors indexed by multisegments.
pub type Comb = BTreeMap<Multi, i64>;

fn norm(mut m: Multi) -> Multi {
    m.sort();
    m
}

fn linked(a: Seg, b: Seg) -> bool {
    let (lo, hi) = if a.0 <= b.0 { (a, b) } else { (b, a) };
    lo.0 < hi.0 && lo.1 < hi.1 && hi.1 <= lo.0 + 1
}

#[derive(Default)]
pub struct Oracle {
    below: HashMap<Multi, BTreeSet<Multi>>,
    to_std: HashMap<Multi, Comb>,
}

impl Oracle {
    /// All multisegments reachable from `m` by elementary operations, `m` included.
    pub fn below(&mut self, m: &Multi) -> BTreeSet<Multi> {
        if let Some(b) = self.below.get(m) {
            return b.clone();
        }
        let mut seen = BTreeSet::new();
        let mut stack = vec![m.clone()];
        while let Some(cur) = stack.pop() {
            if !seen.insert(cur.clone()) {
                continue;
            }
            for i in 0..cur.len() {
                for j in i + 1..cur.len() {
                    let (a, b) = (cur[i], cur[j]);
                    if !linked(a, b) {
                        continue;
                    }
                    let mut next: Multi = cur
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| *k != i && *k != j)
                        .map(|(_, s)| *s)
                        .collect();
                    next.push((a.0.max(b.0), a.1.min(b.1)));
                    let (ix, iy) = (a.0.min(b.0), a.1.max(b.1));
                    if ix >= iy {
                        next.push((ix, iy));
                    }
                    stack.push(norm(next));
                }
            }
        }
        self.below.insert(m.clone(), seen.clone());
        seen
    }

    /// `L(m)` written in the basis of standard modules.
    pub fn irreducible_in_std(&mut self, m: &Multi) -> Comb {
        if let Some(c) = self.to_std.get(m) {
            return c.clone();
        }
        let mut out: Comb = BTreeMap::new();
        out.insert(m.clone(), 1);
        for n in self.below(m) {
            if n != *m {
                for (k, v) in self.irreducible_in_std(&n) {
                    *out.entry(k).or_default() -= v;
                }
            }
        }
        out.retain(|_, v| *v != 0);
        self.to_std.insert(m.clone(), out.clone());
        out
    }

    /// Rewrite a combination of standard modules in the irreducible basis.
    pub fn std_to_irr(&mut self, c: &Comb) -> Comb {
        let mut out: Comb = BTreeMap::new();
        for (m, v) in c {
            for n in self.below(m) {
                *out.entry(n).or_default() += v;
            }
        }
        out.retain(|_, v| *v != 0);
        out
    }

    /// Partial Jacquet module of `λ(m)` whose left factor contains the
    /// irreducible `L(t)`: the right factors, in the standard basis.
    ///
    /// `left` selects pieces cut from the top of segments (left derivatives);
    /// otherwise pieces come from the bottom (right derivatives).
    fn std_derivative(&mut self, m: &Multi, t: &Multi, left: bool) -> Comb {
        let support = |mm: &Multi| -> BTreeMap<i64, usize> {
            let mut s = BTreeMap::new();
            for &(x, y) in mm {
                for e in y..=x {
                    *s.entry(e).or_default() += 1;
                }
            }
            s
        };
        let target = support(t);
        let mut out: Comb = BTreeMap::new();
        let mut cut = vec![0i64; m.len()];
        loop {
            let mut pieces = Vec::new();
            let mut rest = Vec::new();
            for (i, &(x, y)) in m.iter().enumerate() {
                let c = cut[i];
                if c > 0 {
                    if left {
                        pieces.push((x, x - c + 1));
                    } else {
                        pieces.push((y + c - 1, y));
                    }
                }
                if c < x - y + 1 {
                    if left {
                        rest.push((x - c, y));
                    } else {
                        rest.push((x, y + c));
                    }
                }
            }
            let pieces = norm(pieces);
            if support(&pieces) == target && self.below(&pieces).contains(t) {
                *out.entry(norm(rest)).or_default() += 1;
            }
            let mut i = 0;
            while i < m.len() {
                if cut[i] < m[i].0 - m[i].1 + 1 {
                    cut[i] += 1;
                    break;
                }
                cut[i] = 0;
                i += 1;
            }
            if i == m.len() {
                break;
            }
        }
        out
    }

    /// Derivative of `L(m)` with respect to the irreducible `L(t)`, in the irreducible basis.
    pub fn derivative(&mut self, m: &Multi, t: &Multi, left: bool) -> Comb {
        let mut acc: Comb = BTreeMap::new();
        for (n, v) in self.irreducible_in_std(m) {
            for (r, w) in self.std_derivative(&n, t, left) {
                *acc.entry(r).or_default() += v * w;
            }
        }
        acc.retain(|_, v| *v != 0);
        self.std_to_irr(&acc)
    }

    /// Highest derivative with respect to `L(t_k)` over `k = 0, 1, ...`.
    pub fn highest(&mut self, m: &Multi, t: impl Fn(usize) -> Multi, left: bool) -> (Comb, usize) {
        let mut best = (BTreeMap::from([(m.clone(), 1)]), 0);
        for k in 1..=m.len() * 8 {
            let d = self.derivative(m, &norm(t(k)), left);
            if d.is_empty() {
                break;
            }
            best = (d, k);
        }
        best
    }

    /// `L(m1) × L(m2)` in the irreducible basis.
    pub fn product(&mut self, m1: &Multi, m2: &Multi) -> Comb {
        let mut acc: Comb = BTreeMap::new();
        for (a, v) in self.irreducible_in_std(m1) {
            for (b, w) in self.irreducible_in_std(m2) {
                let mut u = a.clone();
                u.extend(b);
                *acc.entry(norm(u)).or_default() += v * w;
            }
        }
        acc.retain(|_, v| *v != 0);
        self.std_to_irr(&acc)
    }
}

/// All multisegments with at most `max_len` segments and exponents in `[lo, hi]`.
pub fn all_multisegments(max_len: usize, lo: i64, hi: i64) -> Vec<Multi> {
    let mut segs = Vec::new();
    for x in lo..=hi {
        for y in lo..=x {
            segs.push((x, y));
        }
    }
    let mut out = vec![vec![]];
    let mut frontier: Vec<(Multi, usize)> = vec![(vec![], 0)];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for (m, start) in &frontier {
            for (i, s) in segs.iter().enumerate().skip(*start) {
                let mut n = m.clone();
                n.push(*s);
                out.push(norm(n.clone()));
                next.push((n, i));
            }
        }
        frontier = next;
    }
    out
}
