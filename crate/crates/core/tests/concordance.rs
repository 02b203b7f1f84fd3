mod common;

use arftower::concordance::{
    balance, certify, initial_tower, order2_count, verify_certificate, Certificate, CertifyOptions,
    NamedDiagram, Outcome,
};
use arftower::grope::GropeClass;
use arftower::invariants::arf_from_conway;
use arftower::table::{bundled, lookup};
use arftower::tower::Move;
use common::{corrupt, corruptible_leaves};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn named(e: &arftower::table::TableEntry) -> NamedDiagram {
    NamedDiagram::new(e.name.clone(), e.diagram.clone())
}

fn knot(name: &str) -> NamedDiagram {
    named(&lookup(name).unwrap())
}

fn certificate(a: &str, b: &str, n: u32, grope: bool) -> Certificate {
    match certify(
        &knot(a),
        &knot(b),
        &CertifyOptions::new(n).with_grope(grope),
    )
    .unwrap()
    {
        Outcome::Certificate(c) => *c,
        Outcome::Obstruction(o) => panic!("{a}, {b}: {o}"),
    }
}

#[test]
fn certify_iff_equal_arf_exhaustive_at_order_3() {
    let table = bundled();
    let pairs: Vec<(usize, usize)> = (0..table.len())
        .flat_map(|i| (i..table.len()).map(move |j| (i, j)))
        .collect();
    pairs.par_iter().for_each(|&(i, j)| {
        let (a, b) = (&table[i], &table[j]);
        let arf = |d| arf_from_conway(d).unwrap().value;
        let (x, y) = (arf(&a.diagram), arf(&b.diagram));
        match certify(&named(a), &named(b), &CertifyOptions::new(3)).unwrap() {
            Outcome::Certificate(c) => {
                assert_eq!(x, y, "{} {}", a.name, b.name);
                let r = verify_certificate(&c);
                assert!(r.passed(), "{} {}: {:?}", a.name, b.name, r.issues);
            }
            Outcome::Obstruction(o) => {
                assert_ne!(x, y, "{} {}", a.name, b.name);
                assert_eq!(o.parity, (x + y) % 2);
                assert_eq!(o.order2_points % 2, 1);
            }
        }
    });
}

#[test]
fn certify_sampled_at_order_6() {
    let table = bundled();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..12 {
        let a = table.choose(&mut rng).unwrap();
        let b = table.choose(&mut rng).unwrap();
        let same = arf_from_conway(&a.diagram).unwrap() == arf_from_conway(&b.diagram).unwrap();
        match certify(&named(a), &named(b), &CertifyOptions::new(6)).unwrap() {
            Outcome::Certificate(c) => {
                assert!(same);
                assert!(verify_certificate(&c).passed(), "{} {}", a.name, b.name);
            }
            Outcome::Obstruction(_) => assert!(!same),
        }
    }
}

#[test]
fn greedy_balancing_bound() {
    let s = [
        lookup("3_1")
            .unwrap()
            .diagram
            .descending_switches(1)
            .unwrap(),
        lookup("4_1")
            .unwrap()
            .diagram
            .descending_switches(1)
            .unwrap(),
    ];
    let mut t = initial_tower(&s).unwrap();
    let total = order2_count(&t);
    let moves = balance(&mut t).unwrap();
    assert!(moves as u64 <= total / 2);
    assert_eq!(order2_count(&t), total);
    for d in t.disks() {
        let on = t
            .points()
            .filter(|p| p.surfaces.contains(&d.id) && t.order_of(p).unwrap() == 2)
            .count();
        assert_eq!(on % 2, 0, "disk {}", d.id);
    }
}

#[test]
fn pipeline_moves_keep_parity() {
    let c = certificate("5_2", "6_1", 2, false);
    let mut t = initial_tower(&c.switches).unwrap();
    let parity = order2_count(&t) % 2;
    for rec in &c.moves {
        if matches!(rec.mv, Move::Checkpoint { .. }) {
            break;
        }
        t.apply_mut(&rec.mv).unwrap();
        assert_eq!(order2_count(&t) % 2, parity);
    }
}

#[test]
fn orders_2_to_7() {
    for n in 2..=7 {
        let c = certificate("3_1", "4_1", n, true);
        let r = verify_certificate(&c);
        assert!(r.passed(), "order {n}: {:?}", r.issues);
        assert!(c.tower_summary.simple);
        assert_eq!(c.tower_summary.nonzero_framings, 0);
        assert_eq!(c.grope.as_ref().unwrap().class, GropeClass::Finite(n + 1));
        match certify(&knot("0_1"), &knot("3_1"), &CertifyOptions::new(n)).unwrap() {
            Outcome::Obstruction(o) => assert_eq!(o.parity, 1),
            Outcome::Certificate(_) => panic!("unknot and trefoil certified"),
        }
    }
}

#[test]
fn certificate_json_is_stable() {
    let c = certificate("3_1", "4_1", 3, true);
    let v = serde_json::to_value(&c).unwrap();
    for key in [
        "version",
        "knots",
        "arf",
        "order",
        "switches",
        "moves",
        "tower_summary",
        "grope",
    ] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["knots"][0]["name"], "3_1");
    assert!(v["moves"][0].get("op").is_some());
    let back: Certificate = serde_json::from_value(v).unwrap();
    assert_eq!(back, c);
    assert_eq!(certificate("3_1", "4_1", 3, true), c);
}

#[test]
fn framing_corruption_is_named() {
    let mut c = certificate("3_1", "4_1", 4, false);
    let i = c
        .moves
        .iter()
        .rposition(|r| matches!(r.mv, Move::BoundaryTwist { .. }))
        .unwrap();
    if let Move::BoundaryTwist { sign, .. } = &mut c.moves[i].mv {
        *sign = -*sign;
    }
    let r = verify_certificate(&c);
    assert!(r
        .issues
        .iter()
        .any(|i| matches!(i, arftower::concordance::Issue::Tower { violation } if violation.kind() == "framing_nonzero")),
        "{:?}", r.issues);
}

#[test]
fn random_single_field_corruptions_are_rejected() {
    let c = certificate("3_1", "4_1", 4, true);
    let clean = serde_json::to_value(&c).unwrap();
    let leaves = corruptible_leaves(&clean);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..200 {
        let path = &leaves[rng.gen_range(0..leaves.len())];
        let mut v = clean.clone();
        corrupt(&mut v, path);
        if let Ok(bad) = serde_json::from_value::<Certificate>(v) {
            let r = verify_certificate(&bad);
            assert!(!r.passed(), "corruption at {} accepted", path.join("."));
        }
    }
}
