use std::fmt;

use serde::Serialize;

use super::SurfaceError;

/// 1-based line and column (columns count characters, not bytes).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kw {
    Class,
    Structure,
    Extends,
    Where,
    Instance,
    Variables,
    Goal,
    Defeq,
    Axiom,
    Opaque,
    Fun,
    Type,
}

impl Kw {
    fn from_word(w: &str) -> Option<Kw> {
        Some(match w {
            "class" => Kw::Class,
            "structure" => Kw::Structure,
            "extends" => Kw::Extends,
            "where" => Kw::Where,
            "instance" => Kw::Instance,
            "variables" | "variable" => Kw::Variables,
            "goal" => Kw::Goal,
            "defeq" => Kw::Defeq,
            "axiom" => Kw::Axiom,
            "opaque" => Kw::Opaque,
            "fun" | "λ" => Kw::Fun,
            "Type" => Kw::Type,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Kw::Class => "class",
            Kw::Structure => "structure",
            Kw::Extends => "extends",
            Kw::Where => "where",
            Kw::Instance => "instance",
            Kw::Variables => "variables",
            Kw::Goal => "goal",
            Kw::Defeq => "defeq",
            Kw::Axiom => "axiom",
            Kw::Opaque => "opaque",
            Kw::Fun => "fun",
            Kw::Type => "Type",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(i64),
    Kw(Kw),
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    Colon,
    Assign,
    Arrow,
    FatArrow,
    Comma,
    Eq,
    At,
    Dot,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Num(n) => write!(f, "number {n}"),
            Tok::Kw(k) => write!(f, "`{}`", k.as_str()),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrack => f.write_str("`[`"),
            Tok::RBrack => f.write_str("`]`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Assign => f.write_str("`:=`"),
            Tok::Arrow => f.write_str("`→`"),
            Tok::FatArrow => f.write_str("`=>`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::At => f.write_str("`@`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

fn ident_start(c: char) -> bool {
    c == '_' || (c.is_alphabetic() && c != 'λ')
}

fn ident_continue(c: char) -> bool {
    c == '_' || c == '\'' || c == '!' || c == '?' || c.is_alphanumeric() || ('₀'..='₉').contains(&c)
}

pub fn lex(text: &str) -> Result<Vec<Token>, SurfaceError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, width) = match c {
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '[' => (Tok::LBrack, 1),
            ']' => (Tok::RBrack, 1),
            '{' => (Tok::LBrace, 1),
            '}' => (Tok::RBrace, 1),
            ',' => (Tok::Comma, 1),
            '@' => (Tok::At, 1),
            '.' => (Tok::Dot, 1),
            '→' => (Tok::Arrow, 1),
            '≡' => (Tok::Eq, 1),
            ':' if next == Some('=') => (Tok::Assign, 2),
            ':' => (Tok::Colon, 1),
            '-' if next == Some('>') => (Tok::Arrow, 2),
            '=' if next == Some('>') => (Tok::FatArrow, 2),
            '=' => (Tok::Eq, 1),
            'λ' => (Tok::Kw(Kw::Fun), 1),
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    bump!();
                }
                let s: String = chars[start..i].iter().collect();
                let n = s.parse::<i64>().map_err(|_| SurfaceError::Parse {
                    pos,
                    expected: vec!["a number that fits in 64 bits".into()],
                    found: s.clone(),
                })?;
                out.push(Token { tok: Tok::Num(n), pos });
                continue;
            }
            c if ident_start(c) => {
                let start = i;
                loop {
                    while i < chars.len() && ident_continue(chars[i]) {
                        bump!();
                    }
                    // A dot joins segments only when another identifier follows.
                    if i + 1 < chars.len() && chars[i] == '.' && ident_start(chars[i + 1]) {
                        bump!();
                        continue;
                    }
                    break;
                }
                let s: String = chars[start..i].iter().collect();
                let tok = Kw::from_word(&s).map(Tok::Kw).unwrap_or(Tok::Ident(s));
                out.push(Token { tok, pos });
                continue;
            }
            other => {
                return Err(SurfaceError::Parse {
                    pos,
                    expected: vec!["a token".into()],
                    found: format!("character {other:?}"),
                })
            }
        };
        for _ in 0..width {
            bump!();
        }
        out.push(Token { tok, pos });
    }
    out.push(Token { tok: Tok::Eof, pos: Pos { line, col } });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn arrows_are_interchangeable() {
        assert_eq!(toks("α → α"), toks("α -> α"));
    }

    #[test]
    fn dotted_identifiers_and_postfix_dots() {
        assert_eq!(
            toks("i.to_semiring.zero (x).f"),
            vec![
                Tok::Ident("i.to_semiring.zero".into()),
                Tok::LParen,
                Tok::Ident("x".into()),
                Tok::RParen,
                Tok::Dot,
                Tok::Ident("f".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_and_positions() {
        let ts = lex("-- header\n  class foo").unwrap();
        assert_eq!(ts[0].tok, Tok::Kw(Kw::Class));
        assert_eq!(ts[0].pos, Pos { line: 2, col: 3 });
        assert_eq!(ts[1].pos, Pos { line: 2, col: 9 });
    }

    #[test]
    fn unexpected_character_is_positioned() {
        match lex("class a\n  $") {
            Err(SurfaceError::Parse { pos, .. }) => assert_eq!(pos, Pos { line: 2, col: 3 }),
            other => panic!("{other:?}"),
        }
    }
}
