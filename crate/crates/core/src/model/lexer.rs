use super::ModelError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

// Longest first so that `:=` wins over `:` and `<=` over `<`.
const SYMBOLS: &[&str] = &[
    ":=", "||", "/:", "..", "/=", "<=", ">=", "=>", ":", "=", "<", ">", "&", "+", "-", "*", "(", ")", "{", "}", ",",
    ";",
];

pub(crate) const KEYWORDS: &[&str] = &[
    "MACHINE",
    "SETS",
    "CONSTANTS",
    "VARIABLES",
    "INVARIANT",
    "INITIALISATION",
    "OPERATIONS",
    "END",
    "SELECT",
    "THEN",
    "BEGIN",
    "IF",
    "ELSIF",
    "ELSE",
    "ANY",
    "WHERE",
    "CHOICE",
    "OR",
    "skip",
    "TRUE",
    "FALSE",
    "BOOL",
    "or",
    "not",
    "min",
    "max",
];

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, ModelError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;

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

    'outer: while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            bump!();
            continue;
        }
        let pos = Pos { line, col };
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            bump!();
            bump!();
            while i < chars.len() {
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    bump!();
                    bump!();
                    continue 'outer;
                }
                bump!();
            }
            return Err(ModelError::Syntax {
                pos,
                message: "unterminated comment".into(),
            });
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                bump!();
            }
            out.push(Token {
                tok: Tok::Ident(s),
                pos,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                bump!();
            }
            let v = s.parse::<i64>().map_err(|_| ModelError::Syntax {
                pos,
                message: format!("integer literal {s} out of range"),
            })?;
            out.push(Token { tok: Tok::Int(v), pos });
            continue;
        }
        for sym in SYMBOLS {
            let n = sym.len();
            if i + n <= chars.len() && chars[i..i + n].iter().copied().eq(sym.chars()) {
                for _ in 0..n {
                    bump!();
                }
                out.push(Token {
                    tok: Tok::Sym(sym),
                    pos,
                });
                continue 'outer;
            }
        }
        return Err(ModelError::Syntax {
            pos,
            message: format!("unexpected character {c:?}"),
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, col },
    });
    Ok(out)
}
