//! Indentation-aware tokenizer.

use super::SyntaxError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Name(String),
    Int(i64),
    Float(f64),
    Str(String),
    Op(&'static str),
    Newline,
    Indent,
    Dedent,
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

const OPS: [&str; 43] = [
    "**=", "//=", "->", "**", "//", "==", "!=", "<=", ">=", "+=", "-=", "*=", "/=", "%=", "|=",
    "&=", ":=", "(", ")", "[", "]", "{", "}", ",", ":", ".", ";", "+", "-", "*", "/", "%", "<",
    ">", "=", "|", "&", "~", "^", "@", "!", "?", "$",
];

pub fn tokenize(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut indents = vec![0usize];
    let mut depth = 0usize; // bracket nesting
    let mut i = 0usize;
    let mut line = 1u32;
    let mut line_start = 0usize;
    let mut at_line_start = true;

    let err = |line: u32, col: usize, msg: &str| SyntaxError {
        line,
        col: col as u32,
        message: msg.to_string(),
    };

    while i < chars.len() {
        if at_line_start && depth == 0 {
            let mut width = 0;
            let mut j = i;
            while j < chars.len() && (chars[j] == ' ' || chars[j] == '\t') {
                width += if chars[j] == '\t' { 8 - width % 8 } else { 1 };
                j += 1;
            }
            // blank or comment-only lines do not affect indentation
            if j >= chars.len() || chars[j] == '\n' || chars[j] == '#' || chars[j] == '\r' {
                while j < chars.len() && chars[j] != '\n' {
                    j += 1;
                }
                i = j;
                if i < chars.len() {
                    i += 1;
                    line += 1;
                    line_start = i;
                }
                continue;
            }
            let current = *indents.last().expect("indent stack");
            if width > current {
                indents.push(width);
                out.push(Token { tok: Tok::Indent, line, col: 0 });
            } else {
                while width < *indents.last().expect("indent stack") {
                    indents.pop();
                    out.push(Token { tok: Tok::Dedent, line, col: 0 });
                }
                if width != *indents.last().expect("indent stack") {
                    return Err(err(line, width, "inconsistent dedent"));
                }
            }
            i = j;
            at_line_start = false;
        }

        let c = chars[i];
        let col = (i - line_start) as u32;
        match c {
            '\n' => {
                if depth == 0 {
                    if !matches!(out.last().map(|t: &Token| &t.tok), Some(Tok::Newline) | None) {
                        out.push(Token { tok: Tok::Newline, line, col });
                    }
                    at_line_start = true;
                }
                i += 1;
                line += 1;
                line_start = i;
            }
            ' ' | '\t' | '\r' => i += 1,
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '\\' if chars.get(i + 1) == Some(&'\n') => {
                i += 2;
                line += 1;
                line_start = i;
            }
            c if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) => {
                let start = i;
                let mut is_float = false;
                while i < chars.len() {
                    let d = chars[i];
                    if d.is_ascii_digit() || d == '_' {
                        i += 1;
                    } else if d == '.' && !is_float {
                        is_float = true;
                        i += 1;
                    } else if (d == 'e' || d == 'E')
                        && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit() || *n == '-' || *n == '+')
                    {
                        is_float = true;
                        i += 2;
                    } else {
                        break;
                    }
                }
                let text: String = chars[start..i].iter().filter(|c| **c != '_').collect();
                let tok = if is_float {
                    Tok::Float(text.parse().map_err(|_| err(line, col as usize, "bad float"))?)
                } else {
                    Tok::Int(text.parse().map_err(|_| err(line, col as usize, "integer literal too large"))?)
                };
                out.push(Token { tok, line, col });
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let is_prefix = matches!(word.as_str(), "r" | "b" | "u" | "rb" | "br" | "f");
                if is_prefix && i < chars.len() && (chars[i] == '"' || chars[i] == '\'') {
                    if word.contains('f') {
                        return Err(err(line, col as usize, "f-strings are not supported"));
                    }
                    let raw = word.contains('r');
                    let start_line = line;
                    let (s, ni, nl, ls) = lex_string(&chars, i, line, line_start, raw)?;
                    i = ni;
                    line = nl;
                    line_start = ls;
                    out.push(Token { tok: Tok::Str(s), line: start_line, col });
                } else {
                    out.push(Token { tok: Tok::Name(word), line, col });
                }
            }
            '"' | '\'' => {
                let start_line = line;
                let (s, ni, nl, ls) = lex_string(&chars, i, line, line_start, false)?;
                i = ni;
                line = nl;
                line_start = ls;
                out.push(Token { tok: Tok::Str(s), line: start_line, col });
            }
            _ => {
                let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
                let op = OPS
                    .iter()
                    .find(|op| rest.starts_with(**op))
                    .ok_or_else(|| err(line, col as usize, &format!("unexpected character {c:?}")))?;
                match *op {
                    "(" | "[" | "{" => depth += 1,
                    ")" | "]" | "}" => depth = depth.saturating_sub(1),
                    _ => {}
                }
                i += op.len();
                out.push(Token { tok: Tok::Op(op), line, col });
            }
        }
    }
    if !matches!(out.last().map(|t| &t.tok), Some(Tok::Newline) | None) {
        out.push(Token { tok: Tok::Newline, line, col: 0 });
    }
    while indents.len() > 1 {
        indents.pop();
        out.push(Token { tok: Tok::Dedent, line, col: 0 });
    }
    out.push(Token { tok: Tok::Eof, line, col: 0 });
    Ok(out)
}

type Lexed = (String, usize, u32, usize);

fn lex_string(
    chars: &[char],
    mut i: usize,
    mut line: u32,
    mut line_start: usize,
    raw: bool,
) -> Result<Lexed, SyntaxError> {
    let quote = chars[i];
    let triple = chars.get(i + 1) == Some(&quote) && chars.get(i + 2) == Some(&quote);
    i += if triple { 3 } else { 1 };
    let mut s = String::new();
    loop {
        let Some(&c) = chars.get(i) else {
            return Err(SyntaxError {
                line,
                col: 0,
                message: "unterminated string".into(),
            });
        };
        if c == quote {
            if !triple {
                i += 1;
                break;
            }
            if chars.get(i + 1) == Some(&quote) && chars.get(i + 2) == Some(&quote) {
                i += 3;
                break;
            }
        }
        if c == '\n' {
            if !triple {
                return Err(SyntaxError {
                    line,
                    col: 0,
                    message: "newline in string literal".into(),
                });
            }
            line += 1;
            line_start = i + 1;
        }
        if c == '\\' && !raw {
            let next = chars.get(i + 1).copied().unwrap_or('\\');
            let mapped = match next {
                'n' => Some('\n'),
                't' => Some('\t'),
                'r' => Some('\r'),
                '0' => Some('\0'),
                '\\' => Some('\\'),
                '\'' => Some('\''),
                '"' => Some('"'),
                '\n' => None,
                other => {
                    s.push('\\');
                    Some(other)
                }
            };
            if let Some(m) = mapped {
                s.push(m);
            } else {
                line += 1;
                line_start = i + 2;
            }
            i += 2;
            continue;
        }
        s.push(c);
        i += 1;
    }
    Ok((s, i, line, line_start))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn indentation_blocks() {
        let t = toks("if x:\n    y = 1\nz\n");
        assert_eq!(
            t,
            vec![
                Tok::Name("if".into()),
                Tok::Name("x".into()),
                Tok::Op(":"),
                Tok::Newline,
                Tok::Indent,
                Tok::Name("y".into()),
                Tok::Op("="),
                Tok::Int(1),
                Tok::Newline,
                Tok::Dedent,
                Tok::Name("z".into()),
                Tok::Newline,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn brackets_join_lines_and_comments_vanish() {
        let t = toks("f(1,\n  2)  # c\n");
        assert!(!t[..t.len() - 2].contains(&Tok::Newline));
    }

    #[test]
    fn strings_and_numbers() {
        let t = toks("'a\\n' \"\"\"doc\nmore\"\"\" 1.5 1_000 r'\\d'\n");
        assert_eq!(t[0], Tok::Str("a\n".into()));
        assert_eq!(t[1], Tok::Str("doc\nmore".into()));
        assert_eq!(t[2], Tok::Float(1.5));
        assert_eq!(t[3], Tok::Int(1000));
        assert_eq!(t[4], Tok::Str("\\d".into()));
    }

    #[test]
    fn bad_dedent_is_an_error() {
        assert!(tokenize("if x:\n    a\n  b\n").is_err());
    }
}
