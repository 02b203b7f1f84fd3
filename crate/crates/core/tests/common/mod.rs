#![allow(dead_code)]

use arftower::diagram::{Diagram, Reidemeister};
use arftower::poly::ConwayPoly;
use arftower::tower::{Move, SurfaceId, TowerState};
use arftower::Sign;
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::Value;

type Poly = Vec<i128>;

fn trim(mut p: Poly) -> Poly {
    while p.last() == Some(&0) {
        p.pop();
    }
    p
}

fn add(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![0; a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, x) in b.iter().enumerate() {
        out[i] += x;
    }
    trim(out)
}

fn mul(a: &Poly, b: &Poly) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

fn neg(a: &Poly) -> Poly {
    a.iter().map(|x| -x).collect()
}

/// Exact division in Z[t]; panics if `b` does not divide `a`.
fn div_exact(a: &Poly, b: &Poly) -> Poly {
    let mut r = a.clone();
    let db = b.len() - 1;
    if r.len() < b.len() {
        assert!(r.is_empty(), "inexact division");
        return Vec::new();
    }
    let mut q = vec![0; r.len() - db];
    for k in (0..q.len()).rev() {
        let c = r[k + db];
        assert_eq!(c % b[db], 0, "inexact division");
        q[k] = c / b[db];
        for (j, y) in b.iter().enumerate() {
            r[k + j] -= q[k] * y;
        }
    }
    assert!(r.iter().all(|&x| x == 0), "inexact division");
    trim(q)
}

/// Drops factors of t and fixes the sign so that the value at 1 is positive.
fn normalize(p: Poly) -> Poly {
    let mut p = trim(p);
    while p.first() == Some(&0) {
        p.remove(0);
    }
    if p.iter().sum::<i128>() < 0 {
        p = neg(&p);
    }
    p
}

fn bareiss_det(mut m: Vec<Vec<Poly>>) -> Poly {
    let n = m.len();
    if n == 0 {
        return vec![1];
    }
    let mut prev: Poly = vec![1];
    let mut sign = 1;
    for k in 0..n - 1 {
        if m[k][k].is_empty() {
            match (k + 1..n).find(|&i| !m[i][k].is_empty()) {
                Some(i) => {
                    m.swap(i, k);
                    sign = -sign;
                }
                None => return Vec::new(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = add(&mul(&m[i][j], &m[k][k]), &neg(&mul(&m[i][k], &m[k][j])));
                m[i][j] = div_exact(&num, &prev);
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if sign < 0 {
        neg(&d)
    } else {
        d
    }
}

/// Alexander polynomial of a knot from the coloring matrix of its diagram,
/// with no use of the skein engine. Normalized as in [`normalize`].
pub fn alexander_oracle(d: &Diagram) -> Vec<i128> {
    let xs = d.crossings();
    if xs.is_empty() {
        return vec![1];
    }
    let m = d.edge_count();
    // arcs: edges joined through over-passes
    let mut parent: Vec<usize> = (0..=m).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut x = x;
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for c in xs {
        let a = find(&mut parent, c.over_in() as usize);
        let b = find(&mut parent, c.over_out() as usize);
        parent[a] = b;
    }
    let mut arc_of = vec![usize::MAX; m + 1];
    let mut arcs = 0;
    for e in 1..=m {
        let r = find(&mut parent, e);
        if arc_of[r] == usize::MAX {
            arc_of[r] = arcs;
            arcs += 1;
        }
        arc_of[e] = arc_of[r];
    }
    assert_eq!(arcs, xs.len(), "one arc per crossing");
    let n = xs.len();
    let mut mat = vec![vec![Vec::new(); n]; n];
    for (row, c) in xs.iter().enumerate() {
        let i = arc_of[c.under_in() as usize];
        let j = arc_of[c.under_out() as usize];
        let k = arc_of[c.over_in() as usize];
        let t: Poly = vec![0, 1];
        let one_minus_t: Poly = vec![1, -1];
        // positive: x_j = t x_i + (1 - t) x_k; negative: x_i = t x_j + (1 - t) x_k
        let (src, dst) = match c.sign() {
            Sign::Pos => (i, j),
            Sign::Neg => (j, i),
        };
        mat[row][src] = add(&mat[row][src], &t);
        mat[row][dst] = add(&mat[row][dst], &vec![-1]);
        mat[row][k] = add(&mat[row][k], &one_minus_t);
    }
    let minor: Vec<Vec<Poly>> = mat[1..].iter().map(|r| r[1..].to_vec()).collect();
    normalize(bareiss_det(minor))
}

/// Alexander polynomial obtained from a Conway polynomial by z^2 = t - 2 + 1/t.
pub fn alexander_from_conway(p: &ConwayPoly) -> Vec<i128> {
    let g = p.degree().unwrap_or(0) / 2;
    let mut acc: Poly = Vec::new();
    let base: Poly = vec![1, -2, 1];
    for k in 0..=g {
        let c = p.coeff(2 * k) as i128;
        if c == 0 {
            continue;
        }
        let mut term: Poly = vec![c];
        for _ in 0..k {
            term = mul(&term, &base);
        }
        let mut shifted = vec![0; (g - k) as usize];
        shifted.extend(term);
        acc = add(&acc, &shifted);
    }
    normalize(acc)
}

/// Knot determinant |Delta(-1)|.
pub fn determinant(alex: &[i128]) -> i128 {
    alex.iter()
        .enumerate()
        .map(|(i, c)| if i % 2 == 0 { *c } else { -c })
        .sum::<i128>()
        .abs()
}

/// A straight tower: sheet, then disks of orders 1..=m each resting on the
/// previous one and the sheet. Returns the top disk.
pub fn chain(m: u32) -> (TowerState, SurfaceId) {
    let mut t = TowerState::with_sheet(1);
    let mut below = 0;
    for _ in 0..m {
        let p = t.add_point(below, 0, Sign::Pos).unwrap();
        let q = t.add_point(below, 0, Sign::Neg).unwrap();
        below = t.apply_mut(&Move::PairPoints { p, q, fig6: None }).unwrap()[0];
    }
    (t, below)
}

/// Applies up to `steps` random applicable R1/R2 moves, keeping the
/// diagram under `max_crossings`.
pub fn fuzz_moves<R: Rng>(d: &Diagram, steps: usize, max_crossings: usize, rng: &mut R) -> Diagram {
    let mut cur = d.clone();
    for _ in 0..steps {
        let mut sites = cur.reidemeister_sites();
        if cur.crossing_count() + 2 > max_crossings {
            sites.retain(|m| {
                matches!(
                    m,
                    Reidemeister::R1Remove { .. } | Reidemeister::R2Remove { .. }
                )
            });
        }
        sites.shuffle(rng);
        for mv in sites.iter().take(16) {
            if let Ok(next) = cur.apply_move(mv) {
                cur = next;
                break;
            }
        }
    }
    cur
}

/// Paths of the leaves a single-field corruption may touch: numbers, the
/// pd strings and the fingerprint. Knot names are labels only and
/// checkpoint `simple` flags only weaken an assertion, so both are skipped.
pub fn corruptible_leaves(v: &Value) -> Vec<Vec<String>> {
    fn walk(v: &Value, path: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    if k == "name" || (k == "simple" && path.iter().any(|p| p == "moves")) {
                        continue;
                    }
                    path.push(k.clone());
                    walk(x, path, out);
                    path.pop();
                }
            }
            Value::Array(a) => {
                for (i, x) in a.iter().enumerate() {
                    path.push(i.to_string());
                    walk(x, path, out);
                    path.pop();
                }
            }
            Value::Number(_) | Value::Bool(_) => out.push(path.clone()),
            Value::String(_) => {
                if matches!(path.last().map(String::as_str), Some("pd" | "fingerprint")) {
                    out.push(path.clone());
                }
            }
            Value::Null => {}
        }
    }
    let mut out = Vec::new();
    walk(v, &mut Vec::new(), &mut out);
    out
}

fn leaf_mut<'a>(v: &'a mut Value, path: &[String]) -> &'a mut Value {
    path.iter().fold(v, |v, k| match v {
        Value::Object(m) => m.get_mut(k).expect("path exists"),
        Value::Array(a) => &mut a[k.parse::<usize>().expect("index")],
        _ => panic!("path runs through a leaf"),
    })
}

/// Corrupts the leaf at `path`: signs flip, other integers move by one,
/// booleans flip, strings get a character changed.
pub fn corrupt(v: &mut Value, path: &[String]) {
    let is_sign =
        path.last().is_some_and(|k| k == "sign") || path.iter().any(|k| k == "bottom_marks");
    let leaf = leaf_mut(v, path);
    *leaf = match leaf.clone() {
        Value::Number(n) => {
            let x = n.as_i64().expect("integer leaf");
            if is_sign {
                Value::from(-x)
            } else {
                Value::from(x + 1)
            }
        }
        Value::Bool(b) => Value::Bool(!b),
        Value::String(s) => {
            let mut chars: Vec<char> = s.chars().collect();
            match chars.iter().position(|c| c.is_ascii_digit()) {
                Some(i) => {
                    chars[i] = if chars[i] == '9' {
                        '1'
                    } else {
                        (chars[i] as u8 + 1) as char
                    }
                }
                None => chars.push('x'),
            }
            Value::String(chars.into_iter().collect())
        }
        other => other,
    };
}
