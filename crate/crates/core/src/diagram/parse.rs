use std::collections::BTreeMap;

use super::{Crossing, Diagram, DiagramError, EdgeLabel};
use crate::Sign;

/// Parses either a PD code or a Gauss code, guessing from the first
/// non-blank character.
pub fn parse(input: &str) -> Result<Diagram, DiagramError> {
    let body: String = input
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n");
    match body.trim_start().chars().next() {
        Some('O') | Some('U') | Some('o') | Some('u') => parse_gauss(&body),
        _ => parse_pd(input),
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn err(&self, msg: impl Into<String>) -> DiagramError {
        DiagramError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c == b'#' && self.at_line_start() {
                while self.pos < self.src.len() && self.src[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn at_line_start(&self) -> bool {
        self.src[..self.pos]
            .iter()
            .rev()
            .take_while(|&&c| c != b'\n')
            .all(|c| c.is_ascii_whitespace())
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), DiagramError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected '{}'", c as char)))
        }
    }

    fn word(&mut self) -> &'a str {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("")
    }

    fn number(&mut self) -> Result<u32, DiagramError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap_or("")
            .parse()
            .map_err(|_| DiagramError::Syntax {
                pos: start,
                msg: "number out of range".into(),
            })
    }
}

/// Parses `X[a,b,c,d]` terms separated by `;`, `,` or newlines, optionally
/// wrapped in `PD[...]`. `Loop[k]` adds a crossingless component. An empty
/// input is the unknot.
pub fn parse_pd(input: &str) -> Result<Diagram, DiagramError> {
    let mut lx = Lexer {
        src: input.as_bytes(),
        pos: 0,
    };
    if lx.peek().is_none() {
        return Ok(Diagram::unknot());
    }
    let save = lx.pos;
    let wrapped = if lx.word() == "PD" {
        lx.expect(b'[')?;
        true
    } else {
        lx.pos = save;
        false
    };
    let mut raw = Vec::new();
    let mut loops = 0u32;
    loop {
        match lx.peek() {
            None => break,
            Some(b']') if wrapped => break,
            Some(b';') | Some(b',') => {
                lx.pos += 1;
                continue;
            }
            _ => {}
        }
        let at = lx.pos;
        match lx.word() {
            "X" => {
                lx.expect(b'[')?;
                let mut slots = [0; 4];
                for (i, s) in slots.iter_mut().enumerate() {
                    if i > 0 {
                        lx.expect(b',')?;
                    }
                    *s = lx.number()?;
                }
                lx.expect(b']')?;
                raw.push(slots);
            }
            "Loop" => {
                lx.expect(b'[')?;
                lx.number()?;
                lx.expect(b']')?;
                loops += 1;
            }
            w => {
                lx.pos = at;
                return Err(lx.err(if w.is_empty() {
                    "expected X[...] term".to_string()
                } else {
                    format!("unknown term '{w}'")
                }));
            }
        }
    }
    if wrapped {
        lx.expect(b']')?;
        if lx.peek().is_some() {
            return Err(lx.err("trailing input after PD[...]"));
        }
    }
    if raw.is_empty() && loops == 0 {
        return Ok(Diagram::unknot());
    }
    Diagram::from_pd(&raw, loops)
}

/// Parses a signed Gauss code such as `O1+,U2+,O3+,U1+,O2+,U3+` for a
/// single-component knot. An empty code is the unknot.
pub fn parse_gauss(input: &str) -> Result<Diagram, DiagramError> {
    let tokens: Vec<&str> = input
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .collect();
    if tokens.is_empty() {
        return Ok(Diagram::unknot());
    }
    // crossing name -> (over passage, under passage, sign), passages 1-based
    let mut seen: BTreeMap<u32, (Option<u32>, Option<u32>, Sign)> = BTreeMap::new();
    let mut order = Vec::new();
    for (i, tok) in tokens.iter().enumerate() {
        let p = i as u32 + 1;
        let bad = || DiagramError::Gauss(format!("bad token '{tok}'"));
        let mut chars = tok.chars();
        let over = match chars.next().map(|c| c.to_ascii_uppercase()) {
            Some('O') => true,
            Some('U') => false,
            _ => return Err(bad()),
        };
        let rest = chars.as_str();
        let sign = match rest.chars().last() {
            Some('+') => Sign::Pos,
            Some('-') => Sign::Neg,
            _ => return Err(bad()),
        };
        let k: u32 = rest[..rest.len() - 1].parse().map_err(|_| bad())?;
        let entry = seen.entry(k).or_insert_with(|| {
            order.push(k);
            (None, None, sign)
        });
        if entry.2 != sign {
            return Err(DiagramError::Gauss(format!(
                "crossing {k} has inconsistent signs"
            )));
        }
        let slot = if over { &mut entry.0 } else { &mut entry.1 };
        if slot.replace(p).is_some() {
            return Err(DiagramError::Gauss(format!(
                "crossing {k} passed {} twice",
                if over { "over" } else { "under" }
            )));
        }
    }
    let m = tokens.len() as EdgeLabel;
    let inc = |p: u32| if p == 1 { m } else { p - 1 };
    let mut crossings = Vec::with_capacity(order.len());
    for k in order {
        let (o, u, sign) = seen[&k];
        let (o, u) = match (o, u) {
            (Some(o), Some(u)) => (o, u),
            _ => return Err(DiagramError::Gauss(format!("crossing {k} appears once"))),
        };
        let slots = match sign {
            Sign::Pos => [inc(u), o, u, inc(o)],
            Sign::Neg => [inc(u), inc(o), u, o],
        };
        crossings.push(Crossing { slots, sign });
    }
    let d = Diagram {
        crossings,
        free_loops: 0,
    };
    d.check_planar()?;
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pd_forms_agree() {
        let a = parse_pd("X[1,5,2,4];X[3,1,4,6];X[5,3,6,2]").unwrap();
        let b = parse_pd("PD[X[1, 5, 2, 4], X[3, 1, 4, 6], X[5, 3, 6, 2]]").unwrap();
        let c = parse_pd("# trefoil\nX[1,5,2,4]\nX[3,1,4,6]\nX[5,3,6,2]\n").unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_eq!(a.to_pd_string(), "X[1,5,2,4];X[3,1,4,6];X[5,3,6,2]");
    }

    #[test]
    fn empty_is_unknot() {
        assert_eq!(parse("").unwrap(), Diagram::unknot());
        assert_eq!(parse_pd("  \n").unwrap(), Diagram::unknot());
        assert_eq!(parse_pd("PD[]").unwrap(), Diagram::unknot());
    }

    #[test]
    fn loops_round_trip() {
        let d = parse_pd("Loop[1];Loop[2]").unwrap();
        assert_eq!(d.component_count(), 2);
        assert_eq!(parse_pd(&d.to_pd_string()).unwrap(), d);
    }

    #[test]
    fn syntax_errors() {
        for bad in [
            "X[1,2",
            "X[1,2,3]",
            "Y[1,2,3,4]",
            "X[1,2,3,-4]",
            "PD[X[1,1,2,2]",
        ] {
            assert!(
                matches!(parse(bad), Err(DiagramError::Syntax { .. })),
                "{bad}"
            );
        }
    }

    #[test]
    fn gauss_trefoil_matches_pd() {
        let g = parse("O1+,U2+,O3+,U1+,O2+,U3+").unwrap();
        let p = parse_pd("X[1,5,2,4];X[3,1,4,6];X[5,3,6,2]").unwrap();
        let sorted = |d: &Diagram| {
            let mut v: Vec<_> = d
                .crossings()
                .iter()
                .map(|c| (c.slots(), c.sign()))
                .collect();
            v.sort();
            v
        };
        assert_eq!(sorted(&g), sorted(&p));
    }

    #[test]
    fn gauss_errors() {
        assert!(parse_gauss("O1+,U1-").is_err());
        assert!(parse_gauss("O1+,O1+").is_err());
        assert!(parse_gauss("O1+,U2+").is_err());
        assert!(parse_gauss("Q1+").is_err());
        // non-planar (virtual trefoil)
        assert!(parse_gauss("O1-,O2-,U1-,U2-").is_err());
    }
}
