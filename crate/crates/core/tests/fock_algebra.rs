use std::collections::BTreeMap;

use num_complex::Complex64;
use proptest::prelude::*;
use trispin_core::fock::{apply_ladder, apply_ladder_ordered, LadderKind, ModeOrder};
use trispin_core::{FockState, Species, Statistics};

type Ket = BTreeMap<FockState, Complex64>;

fn apply(k: &Ket, site: usize, sp: Species, kind: LadderKind) -> Ket {
    let mut out = Ket::new();
    for (s, a) in k {
        if let Some((t, b)) = apply_ladder(s, site, sp, kind).unwrap() {
            *out.entry(t).or_default() += a * b;
        }
    }
    out
}

fn add(mut a: Ket, b: &Ket, sign: f64) -> Ket {
    for (s, v) in b {
        *a.entry(s.clone()).or_default() += v * sign;
    }
    a.retain(|_, v| v.norm() > 1e-12);
    a
}

fn species(b: bool) -> Species {
    if b {
        Species::Up
    } else {
        Species::Down
    }
}

fn fermion_state() -> impl Strategy<Value = FockState> {
    prop::collection::vec((0u16..2, 0u16..2), 3).prop_map(|v| {
        FockState::new(v.into_iter().map(|(a, b)| [a, b]).collect(), Statistics::Fermion).unwrap()
    })
}

fn boson_state() -> impl Strategy<Value = FockState> {
    prop::collection::vec((0u16..3, 0u16..3), 3).prop_map(|v| {
        FockState::new(v.into_iter().map(|(a, b)| [a, b]).collect(), Statistics::Boson).unwrap()
    })
}

proptest! {
    #[test]
    fn fermion_anticommutator(s in fermion_state(), i in 0usize..3, j in 0usize..3, si: bool, sj: bool) {
        let ket: Ket = [(s.clone(), Complex64::new(1.0, 0.0))].into();
        let (a, b) = (species(si), species(sj));
        let x = apply(&apply(&ket, j, b, LadderKind::Create), i, a, LadderKind::Annihilate);
        let y = apply(&apply(&ket, i, a, LadderKind::Annihilate), j, b, LadderKind::Create);
        let sum = add(x, &y, 1.0);
        if i == j && si == sj {
            prop_assert_eq!(sum.len(), 1);
            prop_assert!((sum[&s] - 1.0).norm() < 1e-15);
        } else {
            prop_assert!(sum.is_empty());
        }
    }

    #[test]
    fn fermion_creators_anticommute(s in fermion_state(), i in 0usize..3, j in 0usize..3, si: bool, sj: bool) {
        let ket: Ket = [(s, Complex64::new(1.0, 0.0))].into();
        let (a, b) = (species(si), species(sj));
        let x = apply(&apply(&ket, j, b, LadderKind::Create), i, a, LadderKind::Create);
        let y = apply(&apply(&ket, i, a, LadderKind::Create), j, b, LadderKind::Create);
        prop_assert!(add(x, &y, 1.0).is_empty());
    }

    #[test]
    fn boson_commutator(s in boson_state(), i in 0usize..3, j in 0usize..3, si: bool, sj: bool) {
        let ket: Ket = [(s.clone(), Complex64::new(1.0, 0.0))].into();
        let (a, b) = (species(si), species(sj));
        let x = apply(&apply(&ket, j, b, LadderKind::Create), i, a, LadderKind::Annihilate);
        let y = apply(&apply(&ket, i, a, LadderKind::Annihilate), j, b, LadderKind::Create);
        let diff = add(x, &y, -1.0);
        if i == j && si == sj {
            prop_assert_eq!(diff.len(), 1);
            prop_assert!((diff[&s] - 1.0).norm() < 1e-12);
        } else {
            prop_assert!(diff.is_empty());
        }
    }

    // <t|a^dag|s> = conj(<s|a|t>)
    #[test]
    fn creation_is_adjoint_of_annihilation(s in fermion_state(), b in boson_state(), i in 0usize..3, si: bool) {
        for st in [s, b] {
            let sp = species(si);
            if let Some((t, down)) = apply_ladder(&st, i, sp, LadderKind::Annihilate).unwrap() {
                let (back, up) = apply_ladder(&t, i, sp, LadderKind::Create).unwrap().unwrap();
                prop_assert_eq!(back, st);
                prop_assert_eq!(up, down.conj());
            }
        }
    }

    #[test]
    fn reversed_order_anticommutes_too(s in fermion_state(), i in 0usize..3, j in 0usize..3, si: bool, sj: bool) {
        prop_assume!(i != j || si != sj);
        let (a, b) = (species(si), species(sj));
        let ord = ModeOrder::Reversed;
        let step = |st: &FockState, site, sp, kind| apply_ladder_ordered(st, site, sp, kind, ord).unwrap();
        let x = step(&s, j, b, LadderKind::Create).and_then(|(t, c1)| step(&t, i, a, LadderKind::Annihilate).map(|(u, c2)| (u, c1 * c2)));
        let y = step(&s, i, a, LadderKind::Annihilate).and_then(|(t, c1)| step(&t, j, b, LadderKind::Create).map(|(u, c2)| (u, c1 * c2)));
        match (x, y) {
            (Some((u1, c1)), Some((u2, c2))) => {
                prop_assert_eq!(u1, u2);
                prop_assert!((c1 + c2).norm() < 1e-15);
            }
            (None, None) => {}
            _ => prop_assert!(false, "only one ordering survived"),
        }
    }
}

#[test]
fn pauli_exclusion() {
    let s = FockState::new(vec![[1, 0], [0, 1]], Statistics::Fermion).unwrap();
    assert!(apply_ladder(&s, 0, Species::Up, LadderKind::Create).unwrap().is_none());
    assert!(FockState::new(vec![[2, 0]], Statistics::Fermion).is_err());
}
