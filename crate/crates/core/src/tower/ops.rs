use std::collections::VecDeque;

use super::{verify_tower, Move, PointId, SurfaceId, TowerError, TowerState};
use crate::diagram::SwitchSequence;
use crate::invariants::{ArfSource, ArfValue};
use crate::Sign;

/// Order-1 tower on a disk bounded by a knot, read off from a crossing
/// change sequence that unknots it.
///
/// Each change is a self-intersection of the sheet with the sign of the
/// change. Changes of the majority sign are matched with padding changes of
/// zero linking number, the i-th positive point is paired with the i-th
/// negative one, and each disk meets the sheet `|lk|` times per switch it
/// came from. Those order-2 signs alternate across the tower.
pub fn build_order1(seq: &SwitchSequence) -> TowerState {
    let mut t = TowerState::with_sheet(1);
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for s in &seq.switches {
        let id = t.insert_point(0, 0, s.sign);
        match s.sign {
            Sign::Pos => plus.push((id, s.lk)),
            Sign::Neg => minus.push((id, s.lk)),
        }
    }
    while plus.len() > minus.len() {
        minus.push((t.insert_point(0, 0, Sign::Neg), 0));
    }
    while minus.len() > plus.len() {
        plus.push((t.insert_point(0, 0, Sign::Pos), 0));
    }
    let mut sign = Sign::Pos;
    for (&(p, lp), &(q, lq)) in plus.iter().zip(&minus) {
        let w = t
            .apply_mut(&Move::PairPoints { p, q, fig6: None })
            .expect("opposite self-points of the sheet pair")[0];
        for _ in 0..(lp.unsigned_abs() + lq.unsigned_abs()) {
            t.insert_point(w, 0, sign);
            sign = -sign;
        }
    }
    t.set_declared_order(1);
    t.clear_script();
    t
}

/// Parity of the order-2 points of a valid order-1 tower.
pub fn arf_count(t: &TowerState) -> Result<ArfValue, TowerError> {
    let report = verify_tower(t, 1);
    if !report.passed() {
        return Err(TowerError::Precondition(format!(
            "not an order-1 tower: {}",
            report.violations[0]
        )));
    }
    let mut count = 0i64;
    for p in t.points() {
        if t.order_of(p)? == 2 {
            count += 1;
        }
    }
    Ok(ArfValue::new(count, ArfSource::Tower))
}

/// The boundary arc a push from `host` descends into: the highest-order
/// arc, so that a push from an order-m disk passes through every lower
/// disk on the way to the sheet.
fn descent_arc(t: &TowerState, host: SurfaceId) -> Result<SurfaceId, TowerError> {
    let arcs = t.disk(host)?.boundary_arcs.expect("disks carry arcs");
    let (a, b) = (t.surface(arcs[0])?.order, t.surface(arcs[1])?.order);
    Ok(if b >= a { arcs[1] } else { arcs[0] })
}

fn other_arc(t: &TowerState, host: SurfaceId, arc: SurfaceId) -> Result<SurfaceId, TowerError> {
    let arcs = t.disk(host)?.boundary_arcs.expect("disks carry arcs");
    Ok(if arcs[0] == arc { arcs[1] } else { arcs[0] })
}

/// A cancelling pair left on an order-0 sheet by a cascade, with the disk
/// it was last pushed out of and the sheet it landed on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LandedPair {
    pub pos: PointId,
    pub neg: PointId,
    pub host: SurfaceId,
    pub sheet: SurfaceId,
}

pub(crate) fn cascade_mut(
    t: &mut TowerState,
    point: PointId,
    host: SurfaceId,
) -> Result<Vec<LandedPair>, TowerError> {
    let mut queue = VecDeque::from([(point, host)]);
    let mut landed = Vec::new();
    while let Some((p, h)) = queue.pop_front() {
        let into = descent_arc(t, h)?;
        let ids = t.apply_mut(&Move::PushDown {
            point: p,
            host: h,
            into,
        })?;
        if t.surface(into)?.order == 0 {
            landed.push(LandedPair {
                pos: ids[0],
                neg: ids[1],
                host: h,
                sheet: into,
            });
        } else {
            queue.push_back((ids[0], into));
            queue.push_back((ids[1], into));
        }
    }
    Ok(landed)
}

/// Pushes `point` off the interior of disk `host` and keeps pushing the
/// results down through the disks below until they land on the sheet.
/// From an order-m host this takes m levels and leaves `2^(m-1)` pairs.
pub fn cascade_push(
    t: &TowerState,
    point: PointId,
    host: SurfaceId,
) -> Result<(TowerState, Vec<LandedPair>), TowerError> {
    let mut u = t.clone();
    let landed = cascade_mut(&mut u, point, host)?;
    Ok((u, landed))
}

/// Pairs every landed pair by a disk meeting the host's other arc once.
fn pair_landed(t: &mut TowerState, landed: &[LandedPair]) -> Result<(), TowerError> {
    for l in landed {
        let fig6 = other_arc(t, l.host, l.sheet)?;
        t.apply_mut(&Move::PairPoints {
            p: l.pos,
            q: l.neg,
            fig6: Some(fig6),
        })?;
    }
    Ok(())
}

fn require(t: &TowerState, n: u32, simple: bool) -> Result<(), TowerError> {
    let r = verify_tower(t, n);
    if !r.passed() {
        return Err(TowerError::Precondition(format!(
            "not a tower of order {n}: {}",
            r.violations[0]
        )));
    }
    if simple && !r.simple {
        return Err(TowerError::Precondition(format!(
            "order-{n} tower is not simple"
        )));
    }
    if !t.order0_connected() {
        return Err(TowerError::Precondition(
            "order-0 surface is not connected".into(),
        ));
    }
    Ok(())
}

/// Turns a valid order-2 tower into a simple one by pushing every
/// intersection between disks down into the sheet. Pairs that land at
/// order 2 get disks meeting the sheet once; higher-order pairs are left
/// for the next stage.
pub fn make_simple(t: &TowerState) -> Result<TowerState, TowerError> {
    const N: u32 = 2;
    require(t, N, false)?;
    let mut u = t.clone();
    loop {
        let next = u
            .points()
            .find(|p| !u.is_simple_point(p))
            .map(|p| (p.id, p.surfaces));
        let Some((p, [a, b])) = next else { break };
        let host = if u.surface(a)?.order <= u.surface(b)?.order {
            a
        } else {
            b
        };
        let arcs = u.disk(host)?.boundary_arcs.expect("disks carry arcs");
        let into = if u.surface(arcs[0])?.order <= u.surface(arcs[1])?.order {
            arcs[0]
        } else {
            arcs[1]
        };
        let ids = u.apply_mut(&Move::PushDown {
            point: p,
            host,
            into,
        })?;
        let order = u.order_of(u.point(ids[0])?)?;
        if order <= N {
            let fig6 = other_arc(&u, host, into)?;
            u.apply_mut(&Move::PairPoints {
                p: ids[0],
                q: ids[1],
                fig6: Some(fig6),
            })?;
        }
    }
    u.apply_mut(&Move::Checkpoint {
        order: N,
        simple: true,
    })?;
    Ok(u)
}

/// Raises a simple tower of order `n >= 2` to order `n + 1`.
///
/// Each unpaired order-(n+1) point `p` on a disk `W` is cancelled by a
/// boundary twist of `W` along the sheet. The framing is restored by a
/// twist along `W`'s other arc, an order-`2n` point which is pushed down
/// disk by disk to the sheet and whose pairs get disks meeting the sheet
/// once. Leftover boundary conflicts are pushed off first.
pub fn raise_order(t: &TowerState) -> Result<TowerState, TowerError> {
    let n = t.declared_order();
    if n < 2 {
        return Err(TowerError::Precondition(format!(
            "raise_order needs order at least 2, tower has {n}"
        )));
    }
    require(t, n, true)?;
    let mut u = t.clone();

    for c in t.ledger().to_vec() {
        let x = u.apply_mut(&Move::BoundaryPushoff(c))?[0];
        let pt = u.point(x)?.clone();
        if !u.is_simple_point(&pt) {
            let [a, b] = pt.surfaces;
            let host = if u.surface(a)?.order <= u.surface(b)?.order {
                a
            } else {
                b
            };
            let landed = cascade_mut(&mut u, x, host)?;
            pair_landed(&mut u, &landed)?;
        }
    }

    let todo: Vec<PointId> = u
        .points()
        .filter(|p| p.paired_by.is_none())
        .filter(|p| u.order_of(p).is_ok_and(|k| k == n + 1))
        .map(|p| p.id)
        .collect();
    for p in todo {
        let pt = u.point(p)?.clone();
        let w = if u.surface(pt.surfaces[0])?.order == 0 {
            pt.surfaces[1]
        } else {
            pt.surfaces[0]
        };
        let arcs = u.disk(w)?.boundary_arcs.expect("disks carry arcs");
        let sheet_arc = if u.surface(arcs[0])?.order == 0 {
            arcs[0]
        } else {
            arcs[1]
        };
        let rest = other_arc(&u, w, sheet_arc)?;
        let q = u.apply_mut(&Move::BoundaryTwist {
            disk: w,
            arc: sheet_arc,
            sign: -pt.sign,
        })?[0];
        u.apply_mut(&Move::PairPoints { p, q, fig6: None })?;
        let r = u.apply_mut(&Move::BoundaryTwist {
            disk: w,
            arc: rest,
            sign: pt.sign,
        })?[0];
        if u.surface(rest)?.order > 0 {
            let landed = cascade_mut(&mut u, r, rest)?;
            pair_landed(&mut u, &landed)?;
        } else {
            return Err(TowerError::Precondition(format!(
                "disk {w} has both boundary arcs on the sheet"
            )));
        }
    }
    u.apply_mut(&Move::Checkpoint {
        order: n + 1,
        simple: true,
    })?;
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{parse_pd, SwitchRecord};

    fn seq(records: &[(Sign, i64)]) -> SwitchSequence {
        SwitchSequence {
            basepoint: 1,
            switches: records
                .iter()
                .enumerate()
                .map(|(i, &(sign, lk))| SwitchRecord {
                    crossing: i,
                    sign,
                    lk,
                })
                .collect(),
        }
    }

    #[test]
    fn empty_sequence_gives_empty_tower() {
        let t = build_order1(&seq(&[]));
        assert_eq!(t.points().count(), 0);
        assert!(verify_tower(&t, 1).passed());
        assert_eq!(arf_count(&t).unwrap().value, 0);
    }

    #[test]
    fn trefoil_tower() {
        let d = parse_pd("X[1,5,2,4];X[3,1,4,6];X[5,3,6,2]").unwrap();
        let t = build_order1(&d.descending_switches(2).unwrap());
        assert_eq!(t.disks().count(), 1);
        assert_eq!(t.summary().points_by_order.get(&2), Some(&1));
        assert!(verify_tower(&t, 1).passed());
        assert!(!verify_tower(&t, 2).passed());
        assert_eq!(arf_count(&t).unwrap().value, 1);
    }

    /// Sheet plus one disk of each order 1..=m, disk k pairing points
    /// between disk k-1 and the sheet. Returns the top disk.
    fn chain(m: u32) -> (TowerState, SurfaceId) {
        let mut t = TowerState::with_sheet(1);
        let mut below = 0;
        for _ in 0..m {
            let p = t.add_point(below, 0, Sign::Pos).unwrap();
            let q = t.add_point(below, 0, Sign::Neg).unwrap();
            below = t.apply_mut(&Move::PairPoints { p, q, fig6: None }).unwrap()[0];
        }
        (t, below)
    }

    #[test]
    fn cascade_doubles_per_level() {
        for m in 1..=6u32 {
            let (mut t, top) = chain(m + 1);
            let host = t.disk(top).unwrap().boundary_arcs.unwrap()[1];
            let r = t
                .apply_mut(&Move::BoundaryTwist {
                    disk: top,
                    arc: host,
                    sign: Sign::Pos,
                })
                .unwrap()[0];
            let (u, landed) = cascade_push(&t, r, host).unwrap();
            assert_eq!(landed.len(), 1 << (m - 1), "host order {m}");
            for l in &landed {
                assert_eq!(u.order_of(u.point(l.pos).unwrap()).unwrap(), m + 2);
            }
        }
    }

    #[test]
    fn make_simple_pushes_self_point() {
        let (mut t, w) = chain(1);
        t.apply_mut(&Move::InteriorTwist {
            disk: w,
            sign: Sign::Pos,
        })
        .unwrap();
        assert!(make_simple(&t).is_err());
        for _ in 0..2 {
            let q = t
                .apply_mut(&Move::BoundaryTwist {
                    disk: w,
                    arc: 0,
                    sign: Sign::Neg,
                })
                .unwrap()[0];
            let p = t.add_point(w, 0, Sign::Pos).unwrap();
            t.apply_mut(&Move::PairPoints { p, q, fig6: None }).unwrap();
        }
        assert!(verify_tower(&t, 2).passed());
        assert!(!verify_tower(&t, 2).simple);
        let u = make_simple(&t).unwrap();
        let s = u.summary();
        assert!(s.simple);
        assert_eq!(s.disks_by_order.get(&2), Some(&3));
        assert_eq!(s.unpaired_by_order.get(&3), Some(&1));
    }

    #[test]
    fn raise_order_without_work_adds_nothing() {
        let (mut t, _) = chain(1);
        t.apply_mut(&Move::Checkpoint {
            order: 2,
            simple: true,
        })
        .unwrap();
        let u = raise_order(&t).unwrap();
        assert_eq!(u.disks().count(), t.disks().count());
        assert_eq!(u.declared_order(), 3);
    }

    #[test]
    fn raise_order_with_one_point() {
        // order-2 disk carrying one order-3 point with the sheet
        let (mut t, w) = chain(2);
        t.add_point(w, 0, Sign::Pos).unwrap();
        t.apply_mut(&Move::Checkpoint {
            order: 2,
            simple: true,
        })
        .unwrap();
        let before = t.disks().count();
        let u = raise_order(&t).unwrap();
        // pairing disk for p plus one disk for the single cascade pair
        assert_eq!(u.disks().count(), before + 2);
        assert!(verify_tower(&u, 3).passed());
        assert_eq!(u.summary().unpaired_by_order.get(&4), Some(&1));
    }
}
