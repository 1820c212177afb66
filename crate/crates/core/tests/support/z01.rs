//! The closed-form `Z_ρ[0,1]`-derivative of `L((ρ|·|^{-1})^s, Δ_ρ[0,-1]^t; π(φ, ε))`.

use std::collections::{BTreeMap, BTreeSet};

use socle::clrep::{Summand, TemperedTable};
use socle::derivatives::{d_max_z01_special, z01_inverse_case, z01_special_case, SpecialShape};
use socle::CuspidalLabel;

/// Every case of the formula and every row of its inversion table is
/// reached, and inversion undoes the derivative.
pub fn every_case_is_hit_and_inverted() {
    let rho = CuspidalLabel::trivial();
    let mut forward: BTreeMap<u8, usize> = BTreeMap::new();
    let mut inverse: BTreeMap<u8, usize> = BTreeMap::new();
    for s in 0..=3u32 {
        for t in 0..=3u32 {
            for m1 in 0..=4u32 {
                for m3 in 0..=2u32 {
                    for m5 in 0..=1u32 {
                        for signs in 0..8u32 {
                            let mut table = TemperedTable::default();
                            for (bit, (d, m)) in [(1, m1), (3, m3), (5, m5)].into_iter().enumerate() {
                                table.add(&Summand::new(&rho, d), m, if signs >> bit & 1 == 1 { -1 } else { 1 });
                            }
                            let shape = SpecialShape { s, t, table };
                            let Ok(pi) = shape.to_datum(&rho) else { continue };
                            let Ok((derived, k)) = d_max_z01_special(&pi, &rho) else { continue };
                            *forward.entry(z01_special_case(&shape, &rho)).or_default() += 1;
                            if k == 0 {
                                continue;
                            }
                            let (row, back) = z01_inverse_case(&derived, &rho, k).unwrap();
                            assert_eq!(back, pi, "row {row} does not invert {derived} with k = {k}");
                            *inverse.entry(row).or_default() += 1;
                        }
                    }
                }
            }
        }
    }
    assert_eq!(forward.keys().copied().collect::<BTreeSet<_>>(), (1..=4).collect(), "{forward:?}");
    assert_eq!(inverse.keys().copied().collect::<BTreeSet<_>>(), (1..=12).collect(), "{inverse:?}");
}
