use serde::{Deserialize, Serialize};

use super::{rebuild, Diagram, DiagramError, EdgeLabel};
use crate::Sign;

/// A Reidemeister move of type I or II at a concrete site.
///
/// Faces are indexed as returned by [`Diagram::faces`] and sides by their
/// position in [`super::Face::sides`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reidemeister {
    /// Adds a curl on `edge`, or on a free loop when `edge` is `None`.
    R1Add {
        edge: Option<EdgeLabel>,
        sign: Sign,
        loop_left: bool,
    },
    R1Remove {
        crossing: usize,
    },
    /// Pushes a finger of side `second` across side `first` of `face`.
    R2Add {
        face: usize,
        first: usize,
        second: usize,
        first_over: bool,
    },
    /// Removes the two crossings around a bigon face.
    R2Remove {
        face: usize,
    },
}

const E: usize = 0;
const N: usize = 1;
const W: usize = 2;
const S: usize = 3;

type Raw = Vec<([u64; 4], Sign)>;

/// Four compass positions (ccw from east) with labels, the position where
/// the under-strand enters and the one where the over-strand enters.
fn place(labels: [u64; 4], under_in: usize, over_in: usize) -> ([u64; 4], Sign) {
    let slots = [0, 1, 2, 3].map(|k| labels[(under_in + k) % 4]);
    let sign = if (over_in + 4 - under_in) % 4 == 3 {
        Sign::Pos
    } else {
        Sign::Neg
    };
    (slots, sign)
}

type BigonSite = (usize, usize, [(EdgeLabel, EdgeLabel); 2]);
impl Diagram {
    fn widened(&self) -> Raw {
        self.crossings
            .iter()
            .map(|c| (c.slots.map(|l| 4 * l as u64), c.sign))
            .collect()
    }

    /// Renames the occurrence of `label` where it enters a crossing.
    fn retarget_head(&self, raw: &mut Raw, label: EdgeLabel, to: u64) {
        let h = self.edge_index().head[label as usize - 1];
        raw[h.crossing].0[h.slot] = to;
    }

    pub fn apply_move(&self, mv: &Reidemeister) -> Result<Diagram, DiagramError> {
        match *mv {
            Reidemeister::R1Add {
                edge,
                sign,
                loop_left,
            } => self.r1_add(edge, sign, loop_left),
            Reidemeister::R1Remove { crossing } => self.r1_remove(crossing),
            Reidemeister::R2Add {
                face,
                first,
                second,
                first_over,
            } => self.r2_add(face, first, second, first_over),
            Reidemeister::R2Remove { face } => self.r2_remove(face),
        }
    }

    fn r1_add(
        &self,
        edge: Option<EdgeLabel>,
        sign: Sign,
        loop_left: bool,
    ) -> Result<Diagram, DiagramError> {
        let mut raw = self.widened();
        let mut free = self.free_loops;
        let (e_in, lp, e_out) = match edge {
            Some(l) => {
                self.check_edge_label(l)?;
                let w = 4 * l as u64;
                self.retarget_head(&mut raw, l, w + 2);
                (w, w + 1, w + 2)
            }
            None => {
                if free == 0 {
                    return Err(DiagramError::NotApplicable("no free loop".into()));
                }
                free -= 1;
                let w = 4 * (self.edge_count() as u64 + 1);
                (w, w + 1, w)
            }
        };
        let slots = match (loop_left, sign) {
            (false, Sign::Neg) => [e_in, lp, lp, e_out],
            (false, Sign::Pos) => [lp, lp, e_out, e_in],
            (true, Sign::Pos) => [e_in, e_out, lp, lp],
            (true, Sign::Neg) => [lp, e_in, e_out, lp],
        };
        raw.push((slots, sign));
        Ok(rebuild(raw, &[], free))
    }

    fn r1_remove(&self, crossing: usize) -> Result<Diagram, DiagramError> {
        let c = self.crossing(crossing)?;
        let i = (0..4)
            .find(|&i| c.slots[i] == c.slots[(i + 1) % 4])
            .ok_or_else(|| {
                DiagramError::NotApplicable(format!("crossing {crossing} has no curl"))
            })?;
        let (p, q) = (c.slots[(i + 2) % 4], c.slots[(i + 3) % 4]);
        let mut raw = self.widened();
        raw.remove(crossing);
        Ok(rebuild(
            raw,
            &[(4 * p as u64, 4 * q as u64)],
            self.free_loops,
        ))
    }

    fn r2_add(
        &self,
        face: usize,
        first: usize,
        second: usize,
        first_over: bool,
    ) -> Result<Diagram, DiagramError> {
        let faces = self.faces();
        let f = faces
            .get(face)
            .ok_or_else(|| DiagramError::NotApplicable(format!("no face {face}")))?;
        let (s1, s2) = match (f.sides.get(first), f.sides.get(second)) {
            (Some(a), Some(b)) => (*a, *b),
            _ => return Err(DiagramError::NotApplicable("no such face side".into())),
        };
        if s1.edge == s2.edge {
            return Err(DiagramError::NotApplicable(
                "both sides lie on the same edge".into(),
            ));
        }
        let mut raw = self.widened();
        let (w1, w2) = (4 * s1.edge as u64, 4 * s2.edge as u64);
        self.retarget_head(&mut raw, s1.edge, w1 + 2);
        self.retarget_head(&mut raw, s2.edge, w2 + 2);
        let (e1a, e1b, e1c) = (w1, w1 + 1, w1 + 2);
        let (e2a, e2b, e2c) = (w2, w2 + 1, w2 + 2);

        // first edge runs south to north through P1 then P2; the finger of
        // the second edge comes from the side the face is on
        let (near, far) = if s1.face_on_left() { (W, E) } else { (E, W) };
        let parallel = s1.face_on_left() != s2.face_on_left();
        let mut p1 = [0u64; 4];
        let mut p2 = [0u64; 4];
        p1[S] = e1a;
        p1[N] = e1b;
        p2[S] = e1b;
        p2[N] = e1c;
        // (position where the second strand enters) at P1 and P2
        let (in1, in2) = if parallel {
            p1[near] = e2a;
            p1[far] = e2b;
            p2[far] = e2b;
            p2[near] = e2c;
            (near, far)
        } else {
            p2[near] = e2a;
            p2[far] = e2b;
            p1[far] = e2b;
            p1[near] = e2c;
            (far, near)
        };
        let (x1, x2) = if first_over {
            (place(p1, in1, S), place(p2, in2, S))
        } else {
            (place(p1, S, in1), place(p2, S, in2))
        };
        raw.push(x1);
        raw.push(x2);
        Ok(rebuild(raw, &[], self.free_loops))
    }

    fn r2_remove(&self, face: usize) -> Result<Diagram, DiagramError> {
        let faces = self.faces();
        let f = faces
            .get(face)
            .ok_or_else(|| DiagramError::NotApplicable(format!("no face {face}")))?;
        let site = self.bigon_site(f).ok_or_else(|| {
            DiagramError::NotApplicable(format!("face {face} is not an R2 bigon"))
        })?;
        let (x, y, merges) = site;
        let mut raw = self.widened();
        let (hi, lo) = if x > y { (x, y) } else { (y, x) };
        raw.remove(hi);
        raw.remove(lo);
        let merges: Vec<(u64, u64)> = merges
            .iter()
            .map(|&(a, b)| (4 * a as u64, 4 * b as u64))
            .collect();
        Ok(rebuild(raw, &merges, self.free_loops))
    }

    /// For a bigon bounded by one strand passing over the other at both
    /// corners, the two crossings and the label pairs to join.
    fn bigon_site(&self, f: &super::Face) -> Option<BigonSite> {
        if f.sides.len() != 2 {
            return None;
        }
        let (d0, d1) = (f.sides[0].dart, f.sides[1].dart);
        let (x, s) = (d0.crossing, d0.slot);
        let y = d1.crossing;
        if x == y {
            return None;
        }
        let t = (d1.slot + 3) % 4;
        let u = (s + 3) % 4;
        if s % 2 != t % 2 {
            return None;
        }
        let lab = |c: usize, k: usize| self.crossings[c].slots[k % 4];
        Some((
            x,
            y,
            [
                (lab(x, s + 2), lab(y, t + 2)),
                (lab(y, t + 3), lab(x, u + 2)),
            ],
        ))
    }

    /// Every R1/R2 move applicable to this diagram.
    pub fn reidemeister_sites(&self) -> Vec<Reidemeister> {
        let mut out = Vec::new();
        let mut edges: Vec<Option<EdgeLabel>> =
            (1..=self.edge_count() as EdgeLabel).map(Some).collect();
        if self.free_loops > 0 {
            edges.push(None);
        }
        for edge in edges {
            for sign in [Sign::Pos, Sign::Neg] {
                for loop_left in [false, true] {
                    out.push(Reidemeister::R1Add {
                        edge,
                        sign,
                        loop_left,
                    });
                }
            }
        }
        for (i, c) in self.crossings.iter().enumerate() {
            if (0..4).any(|k| c.slots[k] == c.slots[(k + 1) % 4]) {
                out.push(Reidemeister::R1Remove { crossing: i });
            }
        }
        for (fi, f) in self.faces().iter().enumerate() {
            for a in 0..f.sides.len() {
                for b in 0..f.sides.len() {
                    if f.sides[a].edge != f.sides[b].edge {
                        for first_over in [false, true] {
                            out.push(Reidemeister::R2Add {
                                face: fi,
                                first: a,
                                second: b,
                                first_over,
                            });
                        }
                    }
                }
            }
            if self.bigon_site(f).is_some() {
                out.push(Reidemeister::R2Remove { face: fi });
            }
        }
        out
    }
}
