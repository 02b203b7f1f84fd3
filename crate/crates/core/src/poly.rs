use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Integer polynomial in `z`, stored sparsely without zero coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct ConwayPoly {
    coeffs: BTreeMap<u32, i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse polynomial: {0}")]
pub struct PolyParseError(String);

impl ConwayPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(1, 0)
    }

    pub fn z() -> Self {
        Self::monomial(1, 1)
    }

    pub fn monomial(c: i64, k: u32) -> Self {
        let mut p = Self::zero();
        p.add_term(k, c);
        p
    }

    /// Builds `c[0] + c[1]*z + ...`.
    pub fn from_coeffs(c: &[i64]) -> Self {
        let mut p = Self::zero();
        for (k, &v) in c.iter().enumerate() {
            p.add_term(k as u32, v);
        }
        p
    }

    fn add_term(&mut self, k: u32, c: i64) {
        if c == 0 {
            return;
        }
        let e = self.coeffs.entry(k).or_insert(0);
        *e = e.checked_add(c).expect("polynomial coefficient overflow");
        if *e == 0 {
            self.coeffs.remove(&k);
        }
    }

    pub fn coeff(&self, k: u32) -> i64 {
        self.coeffs.get(&k).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, i64)> + '_ {
        self.coeffs.iter().map(|(&k, &c)| (k, c))
    }

    /// Multiplication by `z`.
    pub fn times_z(&self) -> Self {
        ConwayPoly {
            coeffs: self.coeffs.iter().map(|(&k, &c)| (k + 1, c)).collect(),
        }
    }

    pub fn scale(&self, s: i64) -> Self {
        let mut p = Self::zero();
        for (&k, &c) in &self.coeffs {
            p.add_term(
                k,
                c.checked_mul(s).expect("polynomial coefficient overflow"),
            );
        }
        p
    }
}

impl Add for &ConwayPoly {
    type Output = ConwayPoly;
    fn add(self, rhs: &ConwayPoly) -> ConwayPoly {
        let mut p = self.clone();
        for (&k, &c) in &rhs.coeffs {
            p.add_term(k, c);
        }
        p
    }
}

impl Sub for &ConwayPoly {
    type Output = ConwayPoly;
    fn sub(self, rhs: &ConwayPoly) -> ConwayPoly {
        self + &(-rhs)
    }
}

impl Neg for &ConwayPoly {
    type Output = ConwayPoly;
    fn neg(self) -> ConwayPoly {
        self.scale(-1)
    }
}

impl Mul for &ConwayPoly {
    type Output = ConwayPoly;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: &ConwayPoly) -> ConwayPoly {
        let mut p = ConwayPoly::zero();
        for (&i, &a) in &self.coeffs {
            for (&j, &b) in &rhs.coeffs {
                p.add_term(
                    i + j,
                    a.checked_mul(b).expect("polynomial coefficient overflow"),
                );
            }
        }
        p
    }
}

impl fmt::Display for ConwayPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (&k, &c)) in self.coeffs.iter().enumerate() {
            let mag = c.unsigned_abs();
            if i == 0 {
                if c < 0 {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if c < 0 { " - " } else { " + " })?;
            }
            match (k, mag) {
                (0, _) => write!(f, "{mag}")?,
                (1, 1) => f.write_str("z")?,
                (1, _) => write!(f, "{mag}*z")?,
                (_, 1) => write!(f, "z^{k}")?,
                _ => write!(f, "{mag}*z^{k}")?,
            }
        }
        Ok(())
    }
}

impl FromStr for ConwayPoly {
    type Err = PolyParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PolyParseError(s.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad());
        }
        let mut p = ConwayPoly::zero();
        let mut cuts: Vec<usize> = compact
            .char_indices()
            .filter(|&(i, c)| i > 0 && (c == '+' || c == '-'))
            .map(|(i, _)| i)
            .collect();
        cuts.push(compact.len());
        let mut from = 0;
        for to in cuts {
            let term = &compact[from..to];
            let (neg, body) = match term.as_bytes()[0] {
                b'-' => (true, &term[1..]),
                b'+' => (false, &term[1..]),
                _ => (false, term),
            };
            let (c, k) = parse_term(body).ok_or_else(bad)?;
            p.add_term(k, if neg { -c } else { c });
            from = to;
        }
        Ok(p)
    }
}

fn parse_term(t: &str) -> Option<(i64, u32)> {
    let (coef, var) = match t.find('z') {
        None => return t.parse().ok().map(|c| (c, 0)),
        Some(i) => (&t[..i], &t[i + 1..]),
    };
    let c = match coef {
        "" => 1,
        _ => coef.strip_suffix('*')?.parse().ok()?,
    };
    let k = match var {
        "" => 1,
        _ => var.strip_prefix('^')?.parse().ok()?,
    };
    Some((c, k))
}

impl From<ConwayPoly> for String {
    fn from(p: ConwayPoly) -> String {
        p.to_string()
    }
}

impl TryFrom<String> for ConwayPoly {
    type Error = PolyParseError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}
