//! The worked examples for `Sp`, `ρ = 1_{GL_1}`, as checks that collect
//! every mismatch instead of stopping at the first.

use socle::arthur::{build_pi, decompose_unitary, packet_of, ExtendedMultiSegment, UnitaryDecomposition};
use socle::clrep::ClDatum;
use socle::derivatives::{apply_trace, d_fixed, DerivativeKind, DerivativeTrace, TraceStep};
use socle::engine::{first_reducible_point, image_test, is_irreducible, socle, InductionProblem};
use socle::glrep::SpehShape;
use socle::{CuspidalLabel, GroupKind, HalfInt};

pub fn rho() -> CuspidalLabel {
    CuspidalLabel::trivial()
}

pub fn e(text: &str) -> ExtendedMultiSegment {
    ExtendedMultiSegment::parse(text, GroupKind::Sp, &[rho()]).unwrap()
}

pub fn datum(text: &str) -> ClDatum {
    ClDatum::parse(text, &[rho()]).unwrap()
}

pub fn shape(a: u32, b: u32, s: &str) -> SpehShape {
    SpehShape::new(rho(), a, b, s.parse().unwrap()).unwrap()
}

pub fn problem(a: u32, b: u32, s: &str, e_text: &str) -> InductionProblem {
    InductionProblem::new(shape(a, b, s), e(e_text)).unwrap()
}

pub const TRIVIAL: &str = "{([0,0];0,1)}";
pub const SINGLE_MEMBER: &str = "{([3,-1];2,-1),([3,1];0,-1),([2,2];0,-1)}";
pub const PACKET: [&str; 5] = [
    "{([1,0];1,1),([3,1];1,1)}",
    "{([1,0];0,-1),([3,1];0,1)}",
    "{([1,0];1,1),([3,1];0,-1)}",
    "{([1,0];0,1),([3,1];1,-1)}",
    "{([1,0];0,-1),([3,1];1,-1)}",
];

/// Collects mismatches.
#[derive(Default)]
pub struct Report {
    pub failures: Vec<String>,
    pub checks: usize,
}

impl Report {
    pub fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    pub fn finish(self) -> Result<String, String> {
        if self.failures.is_empty() {
            Ok(format!("{} checks", self.checks))
        } else {
            Err(self.failures.join("; "))
        }
    }
}

fn sorted(mut v: Vec<ClDatum>) -> Vec<ClDatum> {
    v.sort();
    v
}

fn unitary(u: &SpehShape, e_text: &str) -> Vec<ClDatum> {
    match decompose_unitary(u, &e(e_text)).unwrap() {
        UnitaryDecomposition::Summands { summands } => sorted(summands.into_iter().map(|m| m.pi).collect()),
        UnitaryDecomposition::BadParity => panic!("unexpected bad parity"),
    }
}

fn pis(es: &[&str]) -> Vec<ClDatum> {
    sorted(es.iter().map(|t| build_pi(&e(t)).unwrap().expect("nonzero")).collect())
}

fn data(ts: &[&str]) -> Vec<ClDatum> {
    sorted(ts.iter().map(|t| datum(t)).collect())
}

fn socle_of(p: &InductionProblem) -> Vec<ClDatum> {
    socle(p).unwrap().summands
}

fn show(v: &[ClDatum]) -> String {
    v.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" + ")
}

/// Every socle computed for the three examples, keyed by a description.
pub fn all_socles() -> Vec<(String, Vec<ClDatum>)> {
    let mut out = Vec::new();
    for s in ["1/2", "-1/2"] {
        out.push((format!("u(2,3) s={s}"), socle_of(&problem(2, 3, s, TRIVIAL))));
    }
    for s in ["-3", "-2", "-1", "0", "1", "2", "3"] {
        out.push((format!("u(4,4) s={s}"), socle_of(&problem(4, 4, s, SINGLE_MEMBER))));
    }
    for (i, t) in PACKET.iter().enumerate() {
        for s in ["-2", "-1", "0", "1", "2"] {
            out.push((format!("E{} s={s}", i + 1), socle_of(&problem(4, 2, s, t))));
        }
    }
    out
}

/// The two-summand socles at `s = ±1/2` and the two unitary decompositions behind them.
pub fn speh_2_3_over_trivial() -> Result<String, String> {
    let mut r = Report::default();
    let z = unitary(&shape(1, 3, "0"), TRIVIAL);
    let z_expected = data(&["L(D[-1,-1],D[-1,-1]; pi(0^+,0^+,0^+))", "L(D[-1,-1]; pi(0^-,0^-,1^+))"]);
    r.check(z == z_expected, || format!("Z[-1,1] x 1 = {}", show(&z)));
    let z_members = pis(&["{([1,-1];1,1),([1,-1];1,1),([0,0];0,1)}", "{([1,-1];1,-1),([1,-1];1,-1),([0,0];0,1)}"]);
    r.check(z == z_members, || "Z[-1,1] x 1 disagrees with its multi-segments".into());

    let u22 = unitary(&shape(2, 2, "0"), TRIVIAL);
    let u22_expected = data(&["L(D[0,-1],D[0,-1]; pi(0^+))", "L(D[0,-1]; pi(0^+,0^+,1^+))"]);
    r.check(u22 == u22_expected, || format!("u(2,2) x 1 = {}", show(&u22)));
    let u22_members = pis(&["{([0,0];0,1),([1,0];1,1),([1,0];1,-1)}", "{([0,0];0,1),([1,0];0,1),([1,0];0,-1)}"]);
    r.check(u22 == u22_members, || "u(2,2) x 1 disagrees with its multi-segments".into());

    let plus = socle_of(&problem(2, 3, "1/2", TRIVIAL));
    let plus_expected = data(&["L(D[-1,-1],D[0,-2]; pi(0^+,0^+,1^+))", "L(D[0,-1]; pi(0^-,1^-,2^+))"]);
    r.check(plus == plus_expected, || format!("soc at s=1/2 = {}", show(&plus)));
    let minus = socle_of(&problem(2, 3, "-1/2", TRIVIAL));
    let minus_expected = data(&["L(D[-1,-2],D[0,-1],D[0,-1]; pi(0^+))", "L(D[-1,-2],D[0,-1]; pi(0^+,0^+,1^+))"]);
    r.check(minus == minus_expected, || format!("soc at s=-1/2 = {}", show(&minus)));

    // both companion summands survive the image test at s = 1/2
    let p = problem(2, 3, "1/2", TRIVIAL);
    for sigma in &z {
        r.check(image_test(sigma, &p).unwrap(), || format!("{sigma} fails the image test"));
    }
    r.finish()
}

fn trace(steps: &[(i64, u32)]) -> DerivativeTrace {
    DerivativeTrace {
        steps: steps
            .iter()
            .map(|&(x, k)| TraceStep { kind: DerivativeKind::cuspidal(&rho(), HalfInt::int(x)).unwrap(), k })
            .collect(),
    }
}

fn nonzero(pi: &ClDatum, t: &DerivativeTrace) -> bool {
    apply_trace(pi, t).unwrap().is_some()
}

pub fn speh_4_4_over_single_member() -> Result<String, String> {
    let mut r = Report::default();
    let base = e(SINGLE_MEMBER);
    let pi = build_pi(&base).unwrap().expect("nonzero");
    let pi_expected = datum("L(D[-1,-3],D[0,-2],D[2,-3]; pi(1^-,1^-,2^+))");
    r.check(pi == pi_expected, || format!("pi(E) = {pi}"));

    // s = 0: four of the five candidates vanish
    let a = HalfInt::int(3);
    for (l, eta) in [(2, 1), (1, 1), (0, 1), (0, -1)] {
        let v = build_pi(&base.with_pair(&rho(), a, HalfInt::ZERO, l, eta).unwrap()).unwrap();
        r.check(v.is_none(), || format!("pi(E_({l},{eta})) = {} should vanish", v.as_ref().unwrap()));
    }
    let survivor = build_pi(&base.with_pair(&rho(), a, HalfInt::ZERO, 1, -1).unwrap()).unwrap();
    let s0 = unitary(&shape(4, 4, "0"), SINGLE_MEMBER);
    r.check(survivor.is_some() && s0 == vec![survivor.clone().unwrap()], || format!("s=0 gives {}", show(&s0)));
    r.check(is_irreducible(&problem(4, 4, "0", SINGLE_MEMBER)).unwrap(), || "irreducible at s=0".into());

    // s = 1: the companion has two summands, the derivative separates them
    let two = HalfInt::int(2);
    let first = build_pi(&base.with_pair(&rho(), two, -HalfInt::ONE, 1, -1).unwrap()).unwrap();
    let second = build_pi(&base.with_pair(&rho(), two, -HalfInt::ONE, 2, -1).unwrap()).unwrap();
    r.check(first.is_some() && second.is_some(), || "both companion summands at s=1 are nonzero".into());
    let companion = unitary(&shape(2, 4, "0"), SINGLE_MEMBER);
    r.check(companion.len() == 2, || format!("u(2,4) x pi(E) = {}", show(&companion)));
    let d121 = trace(&[(1, 1), (2, 2), (3, 1)]);
    r.check(nonzero(&pi, &d121), || "D_3^(1) D_2^(2) D_1^(1) pi(E) vanishes".into());
    if let (Some(first), Some(second)) = (&first, &second) {
        r.check(!nonzero(second, &d121), || "D_3^(1) D_2^(2) D_1^(1) of the (2,-1) summand survives".into());
        let p1 = problem(4, 4, "1", SINGLE_MEMBER);
        r.check(image_test(first, &p1).unwrap(), || "the (1,-1) summand fails the image test".into());
        r.check(!image_test(second, &p1).unwrap(), || "the (2,-1) summand passes the image test".into());
    }
    let plus = socle_of(&problem(4, 4, "1", SINGLE_MEMBER));
    let minus = socle_of(&problem(4, 4, "-1", SINGLE_MEMBER));
    r.check(plus.len() == 1 && minus.len() == 1, || "socles at s=1 and s=-1 are irreducible".into());
    let d232 = trace(&[(1, 2), (2, 3), (3, 2)]);
    r.check(plus.iter().all(|p| nonzero(p, &d232)), || "D_3^(2) D_2^(3) D_1^(2) soc(s=1) vanishes".into());
    r.check(minus.iter().all(|p| !nonzero(p, &d232)), || "D_3^(2) D_2^(3) D_1^(2) soc(s=-1) survives".into());
    // the companion at s = -1 is a single summand
    let neg = unitary(&shape(4, 2, "0"), SINGLE_MEMBER);
    let neg_expected = build_pi(&base.with_pair(&rho(), two, HalfInt::ONE, 0, -1).unwrap()).unwrap();
    r.check(neg_expected.is_some() && neg == vec![neg_expected.unwrap()], || format!("u(4,2) x pi(E) = {}", show(&neg)));
    r.check(!is_irreducible(&problem(4, 4, "1", SINGLE_MEMBER)).unwrap(), || "reducible at s=1".into());
    let frp = first_reducible_point(&problem(4, 4, "0", SINGLE_MEMBER)).unwrap();
    r.check(frp == Some(HalfInt::ONE), || format!("first reducible point {frp:?}"));
    // fixed derivatives stay consistent with the maximal ones
    r.check(d_fixed(&pi, &DerivativeKind::cuspidal(&rho(), HalfInt::ONE).unwrap(), 1).unwrap().is_some(), || {
        "D_1^(1) pi(E) vanishes".into()
    });
    r.finish()
}

pub fn speh_4_2_over_packet() -> Result<String, String> {
    let mut r = Report::default();
    let psi = e(PACKET[0]).psi().unwrap();
    let packet = sorted(packet_of(&psi).unwrap().into_iter().map(|m| m.pi).collect());
    r.check(packet == pis(&PACKET), || format!("packet = {}", show(&packet)));
    r.check(packet.len() == 5, || format!("packet has {} members", packet.len()));

    let pair = |t: &str, l: u32, eta: i8, l2: u32, eta2: i8| {
        let inner = t.trim_start_matches('{').trim_end_matches('}');
        format!("{{{inner},([2,1];{l},{eta}),([2,1];{l2},{eta2})}}")
    };
    let decompositions: [Vec<String>; 5] = [
        vec![pair(PACKET[0], 0, 1, 0, -1), pair(PACKET[0], 1, 1, 1, -1)],
        vec![pair(PACKET[1], 0, 1, 0, -1)],
        vec![pair(PACKET[2], 0, -1, 0, 1)],
        vec![pair(PACKET[3], 1, 1, 1, -1), pair(PACKET[3], 0, -1, 0, 1)],
        vec![pair(PACKET[4], 1, 1, 1, -1)],
    ];
    let mut total = 0;
    for (i, want) in decompositions.iter().enumerate() {
        let got = unitary(&shape(4, 2, "0"), PACKET[i]);
        let want_refs: Vec<&str> = want.iter().map(String::as_str).collect();
        r.check(got == pis(&want_refs), || format!("u(4,2) x pi(E{}) = {}", i + 1, show(&got)));
        total += got.len();
        let reducible = !is_irreducible(&problem(4, 2, "0", PACKET[i])).unwrap();
        r.check(reducible == (i == 0 || i == 3), || format!("E{} reducibility at s=0", i + 1));
    }
    r.check(total == 7, || format!("{total} summands at s=0"));

    let socles = [
        (1, "1", "L(D[0,-1],D[1,-3]; pi(0^-,1^-,2^-,2^-,3^+))"),
        (1, "-1", "L(D[0,-3],D[1,-2]; pi(0^-,1^+,1^+,2^-,3^+))"),
        (2, "1", "L(D[0,-3],D[0,-1],D[1,-2]; pi(1^-,2^+,3^-))"),
        (2, "-1", "L(D[0,-3],D[0,-1],D[1,-2]; pi(1^-,2^+,3^-))"),
        (4, "1", "L(D[0,-3],D[2,-3]; pi(0^-,1^+,1^+,1^+,2^-))"),
        (4, "-1", "L(D[0,-3],D[1,-3],D[1,-2]; pi(0^-,1^+,2^-))"),
        (2, "2", "L(D[0,-3],D[1,-2]; pi(1^-,3^+,4^-))"),
        (2, "-2", "L(D[-1,-4],D[0,-3],D[0,-1]; pi(1^-,2^+,3^-))"),
    ];
    for (i, s, want) in socles {
        let got = socle_of(&problem(4, 2, s, PACKET[i]));
        r.check(got == vec![datum(want)], || format!("soc at s={s} for E{} = {}", i + 1, show(&got)));
    }
    r.check(is_irreducible(&problem(4, 2, "1", PACKET[2])).unwrap(), || "E3 irreducible at s=1".into());
    r.check(!is_irreducible(&problem(4, 2, "2", PACKET[2])).unwrap(), || "E3 reducible at s=2".into());

    let frps: Vec<Option<HalfInt>> =
        PACKET.iter().map(|t| first_reducible_point(&problem(4, 2, "0", t)).unwrap()).collect();
    let expected: Vec<Option<HalfInt>> = [0, 1, 2, 0, 1].iter().map(|&v| Some(HalfInt::int(v))).collect();
    r.check(frps == expected, || format!("first reducible points {frps:?}"));
    r.finish()
}

/// No socle repeats a summand, and irreducibility is symmetric in `s`.
pub fn multiplicity_and_symmetry() -> Result<String, String> {
    let mut r = Report::default();
    for (what, summands) in all_socles() {
        let mut d = summands.clone();
        d.dedup();
        r.check(!summands.is_empty() && d.len() == summands.len(), || format!("{what}: {}", show(&summands)));
    }
    let mut problems: Vec<(u32, u32, &str, Vec<&str>)> = vec![(2, 3, TRIVIAL, vec!["1/2", "3/2"]), (4, 4, SINGLE_MEMBER, vec!["1", "2", "3"])];
    for t in PACKET {
        problems.push((4, 2, t, vec!["1", "2", "3"]));
    }
    for (a, b, t, shifts) in problems {
        for s in shifts {
            let plus = is_irreducible(&problem(a, b, s, t)).unwrap();
            let minus = is_irreducible(&problem(a, b, &format!("-{s}"), t)).unwrap();
            r.check(plus == minus, || format!("u({a},{b}) x pi({t}) at s=+-{s}: {plus} vs {minus}"));
        }
    }
    r.finish()
}
