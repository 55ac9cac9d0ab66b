use super::parser::SyntaxError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Num { value: f64, float: bool },
    Inf,
    Sym(&'static str),
    Newline,
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const SYMBOLS: [&str; 27] = [
    "max=", "min=", "+=", "|=", "&=", "<=", ">=", "==", "!=", "&&", "||", "+", "-", "*", "/", "(", ")", "[", "]", ",", ":", ";",
    "=", "<", ">", "!", "∞",
];

pub fn lex(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut out = Vec::new();
    for (ln, line) in src.lines().enumerate() {
        let chars: Vec<(usize, char)> = line.char_indices().collect();
        let mut k = 0;
        while k < chars.len() {
            let (byte, c) = chars[k];
            let col = k + 1;
            let rest = &line[byte..];
            let at = |tok| Token { tok, line: ln + 1, col };
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                k += 1;
                continue;
            }
            if c.is_ascii_digit() || (c == '.' && chars.get(k + 1).is_some_and(|d| d.1.is_ascii_digit())) {
                let mut j = k;
                let mut float = false;
                while j < chars.len() {
                    let d = chars[j].1;
                    if d.is_ascii_digit() {
                        j += 1;
                    } else if d == '.' && !float {
                        float = true;
                        j += 1;
                    } else if (d == 'e' || d == 'E')
                        && chars.get(j + 1).is_some_and(|n| n.1.is_ascii_digit() || ((n.1 == '-' || n.1 == '+') && chars.get(j + 2).is_some_and(|m| m.1.is_ascii_digit())))
                    {
                        float = true;
                        j += 2;
                    } else {
                        break;
                    }
                }
                let end = chars.get(j).map(|p| p.0).unwrap_or(line.len());
                let text = &line[byte..end];
                let value: f64 = text.parse().map_err(|_| SyntaxError::new(ln + 1, col, format!("bad number {text:?}")))?;
                out.push(at(Tok::Num { value, float }));
                k = j;
                continue;
            }
            if c.is_alphabetic() || c == '_' {
                let mut j = k;
                while j < chars.len() && (chars[j].1.is_alphanumeric() || chars[j].1 == '_') {
                    j += 1;
                }
                let end = chars.get(j).map(|p| p.0).unwrap_or(line.len());
                let word = &line[byte..end];
                let next_is_assign = line[end..].starts_with('=') && !line[end..].starts_with("==");
                match word {
                    "max" if next_is_assign => {
                        out.push(at(Tok::Sym("max=")));
                        k = j + 1;
                    }
                    "min" if next_is_assign => {
                        out.push(at(Tok::Sym("min=")));
                        k = j + 1;
                    }
                    "inf" | "Inf" => {
                        out.push(at(Tok::Inf));
                        k = j;
                    }
                    _ => {
                        out.push(at(Tok::Ident(word.to_string())));
                        k = j;
                    }
                }
                continue;
            }
            match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                Some(&"∞") => {
                    out.push(at(Tok::Inf));
                    k += 1;
                }
                Some(s) => {
                    out.push(at(Tok::Sym(s)));
                    k += s.chars().count();
                }
                None => return Err(SyntaxError::new(ln + 1, col, format!("unexpected character {c:?}"))),
            }
        }
        out.push(Token { tok: Tok::Newline, line: ln + 1, col: chars.len() + 1 });
    }
    let last = src.lines().count().max(1);
    out.push(Token { tok: Tok::Eof, line: last, col: 1 });
    Ok(out)
}
