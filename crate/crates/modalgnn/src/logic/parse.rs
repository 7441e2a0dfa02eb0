//! Concrete syntax for formulas.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! formula := disj
//! disj    := conj ('|' conj)*
//! conj    := unary ('&' unary)*
//! unary   := '!' unary | '<>' ctx? unary | '[]' unary | prim
//! ctx     := '{' ('>=' | '>' | '=') num '}'
//! num     := INTEGER              (graded diamond)
//!          | INTEGER '/' INTEGER  (ratio diamond, value in [0,1])
//! prim    := IDENT | 'true' | 'false' | '(' formula ')'
//! ```
//!
//! Bare integers make graded diamonds, slash-form rationals make ratio
//! diamonds; a ratio of one must therefore be written `1/1`. The printer
//! emits a canonical spacing (binary operators spaced, prefixes tight) and
//! always prints ratio thresholds in slash form, so `parse(print(f)) == f`.

use super::{CountRel, Formula, LogicError, RatioRel};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::Zero;

/// Parses the concrete grammar into a [`Formula`].
pub fn parse(text: &str) -> Result<Formula, LogicError> {
    let mut p = Parser {
        b: text.as_bytes(),
        pos: 0,
    };
    let f = p.disj()?;
    p.skip_ws();
    if p.pos != p.b.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(f)
}

/// Renders a formula in the canonical concrete syntax.
pub fn print(f: &Formula) -> String {
    p_disj(f)
}

fn p_disj(f: &Formula) -> String {
    match f {
        Formula::Or(l, r) => format!("{} | {}", p_disj(l), p_conj(r)),
        _ => p_conj(f),
    }
}

fn p_conj(f: &Formula) -> String {
    match f {
        Formula::And(l, r) => format!("{} & {}", p_conj(l), p_unary(r)),
        _ => p_unary(f),
    }
}

fn p_unary(f: &Formula) -> String {
    match f {
        Formula::Not(i) => format!("!{}", p_unary(i)),
        Formula::Dia(i) => format!("<>{}", p_unary(i)),
        Formula::Box(i) => format!("[]{}", p_unary(i)),
        Formula::GDia { rel, count, inner } => {
            let rel = match rel {
                CountRel::Geq => ">=",
                CountRel::Eq => "=",
            };
            format!("<>{{{rel}{count}}}{}", p_unary(inner))
        }
        Formula::RDia { rel, ratio, inner } => {
            let rel = match rel {
                RatioRel::Geq => ">=",
                RatioRel::Gt => ">",
                RatioRel::Eq => "=",
            };
            format!(
                "<>{{{rel}{}/{}}}{}",
                ratio.numer(),
                ratio.denom(),
                p_unary(inner)
            )
        }
        _ => p_prim(f),
    }
}

fn p_prim(f: &Formula) -> String {
    match f {
        Formula::Atom(s) => s.clone(),
        Formula::Top => "true".to_string(),
        Formula::Bottom => "false".to_string(),
        _ => format!("({})", p_disj(f)),
    }
}

struct Parser<'a> {
    b: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> LogicError {
        LogicError::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.b.len() && self.b[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Consumes `tok` if it is next (after whitespace).
    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.b[self.pos..].starts_with(tok.as_bytes()) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<(), LogicError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{tok}`")))
        }
    }

    fn disj(&mut self) -> Result<Formula, LogicError> {
        let mut f = self.conj()?;
        while self.eat("|") {
            let r = self.conj()?;
            f = Formula::or(f, r);
        }
        Ok(f)
    }

    fn conj(&mut self) -> Result<Formula, LogicError> {
        let mut f = self.unary()?;
        while self.eat("&") {
            let r = self.unary()?;
            f = Formula::and(f, r);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, LogicError> {
        if self.eat("!") {
            return Ok(Formula::not(self.unary()?));
        }
        if self.eat("<>") {
            if self.eat("{") {
                return self.threshold_diamond();
            }
            return Ok(Formula::dia(self.unary()?));
        }
        if self.eat("[]") {
            return Ok(Formula::boxm(self.unary()?));
        }
        self.prim()
    }

    /// Parses the rest of `<>{rel num}` after the opening brace.
    fn threshold_diamond(&mut self) -> Result<Formula, LogicError> {
        // Order matters: `>=` before `>`.
        let rel = if self.eat(">=") {
            ">="
        } else if self.eat(">") {
            ">"
        } else if self.eat("=") {
            "="
        } else {
            return Err(self.err("expected `>=`, `>`, or `=`"));
        };
        let num = self.integer()?;
        if self.eat("/") {
            let den = self.integer()?;
            if den.is_zero() {
                return Err(self.err("ratio denominator is zero"));
            }
            self.expect("}")?;
            let ratio = BigRational::new(num, den);
            let rrel = match rel {
                ">=" => RatioRel::Geq,
                ">" => RatioRel::Gt,
                _ => RatioRel::Eq,
            };
            let inner = self.unary()?;
            Formula::rdia(rrel, ratio, inner)
        } else {
            self.expect("}")?;
            let grel = match rel {
                ">=" => CountRel::Geq,
                "=" => CountRel::Eq,
                _ => {
                    return Err(self.err("graded diamonds support `>=` and `=` only"));
                }
            };
            let count: u64 = num
                .to_string()
                .parse()
                .map_err(|_| self.err("count too large"))?;
            let inner = self.unary()?;
            Ok(Formula::gdia(grel, count, inner))
        }
    }

    fn integer(&mut self) -> Result<BigInt, LogicError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.b.len() && self.b[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected an integer"));
        }
        let s = std::str::from_utf8(&self.b[start..self.pos]).expect("ascii digits");
        Ok(s.parse().expect("digits parse as BigInt"))
    }

    fn prim(&mut self) -> Result<Formula, LogicError> {
        if self.eat("(") {
            let f = self.disj()?;
            self.expect(")")?;
            return Ok(f);
        }
        self.skip_ws();
        let start = self.pos;
        if self.pos < self.b.len()
            && (self.b[self.pos].is_ascii_alphabetic() || self.b[self.pos] == b'_')
        {
            self.pos += 1;
            while self.pos < self.b.len()
                && (self.b[self.pos].is_ascii_alphanumeric() || self.b[self.pos] == b'_')
            {
                self.pos += 1;
            }
            let name = std::str::from_utf8(&self.b[start..self.pos]).expect("ascii ident");
            return Ok(match name {
                "true" => Formula::Top,
                "false" => Formula::Bottom,
                _ => Formula::atom(name),
            });
        }
        Err(self.err("expected a formula"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn grammar_examples() {
        assert_eq!(
            parse("<>{>1/2} P").unwrap(),
            Formula::rdia(RatioRel::Gt, rat(1, 2), Formula::atom("P")).unwrap()
        );
        assert_eq!(
            parse("<>{>=2} P & []Q").unwrap(),
            Formula::and(
                Formula::gdia(CountRel::Geq, 2, Formula::atom("P")),
                Formula::boxm(Formula::atom("Q"))
            )
        );
        let f = parse("!(<>P | false)").unwrap();
        assert_eq!(parse(&print(&f)).unwrap(), f);
    }

    #[test]
    fn precedence_and_associativity() {
        // & binds tighter than |, both left-associative.
        let f = parse("a | b & c | d").unwrap();
        assert_eq!(
            f,
            Formula::or(
                Formula::or(
                    Formula::atom("a"),
                    Formula::and(Formula::atom("b"), Formula::atom("c"))
                ),
                Formula::atom("d")
            )
        );
        let g = parse("a & b & c").unwrap();
        assert_eq!(
            g,
            Formula::and(
                Formula::and(Formula::atom("a"), Formula::atom("b")),
                Formula::atom("c")
            )
        );
        // Prefixes apply to the tightest formula.
        let h = parse("!<>P & Q").unwrap();
        assert_eq!(
            h,
            Formula::and(
                Formula::not(Formula::dia(Formula::atom("P"))),
                Formula::atom("Q")
            )
        );
    }

    #[test]
    fn printing_is_canonical_and_reparses() {
        let samples = [
            "P",
            "true",
            "false",
            "!P",
            "!!P",
            "<>P",
            "[]<>P",
            "P & Q | R",
            "(P | Q) & R",
            "P | (Q | R)",
            "<>(P & <>Q)",
            "<>{>=3}P",
            "<>{=2}<>P",
            "<>{>=1/2}P",
            "<>{>0/1}P",
            "<>{=2/3}(P | Q)",
            "!<>{>=1/1}!P",
        ];
        for s in samples {
            let f = parse(s).unwrap();
            let printed = print(&f);
            let g = parse(&printed).unwrap();
            assert_eq!(f, g, "round trip through `{printed}` from `{s}`");
        }
        // Whitespace-insensitivity.
        assert_eq!(parse(" <> { >= 1/2 } P ").unwrap(), parse("<>{>=1/2}P").unwrap());
        // Ratio thresholds always reprint in slash form.
        let f = parse("<>{>=1/1}P").unwrap();
        assert_eq!(print(&f), "<>{>=1/1}P");
        let g = parse("<>{>0/1}P").unwrap();
        assert_eq!(print(&g), "<>{>0/1}P");
        // Reduction happens on parse.
        let h = parse("<>{>=2/4}P").unwrap();
        assert_eq!(print(&h), "<>{>=1/2}P");
    }

    #[test]
    fn syntax_errors_carry_positions() {
        for (text, expect_pos) in [
            ("", 0usize),
            ("P |", 3),
            ("<>{>2}P", 6),   // strict bare-integer threshold
            ("<>{>=3/2}P", 0), // out-of-range ratio reported by constructor
            ("(P", 2),
            ("P Q", 2),
            ("<>{3}P", 3),
            ("<>{>=1/0}P", 8),
        ] {
            let e = parse(text).unwrap_err();
            match e {
                LogicError::Syntax { pos, .. } => {
                    assert_eq!(pos, expect_pos, "position for `{text}`")
                }
                LogicError::RatioOutOfRange(_) => assert_eq!(expect_pos, 0, "for `{text}`"),
                other => panic!("unexpected error {other:?} for `{text}`"),
            }
        }
        // Keywords are not atoms, but identifiers may extend them.
        assert_eq!(parse("trueX").unwrap(), Formula::atom("trueX"));
        assert_eq!(parse("true").unwrap(), Formula::Top);
    }
}
