//! Maps a JSON path back to a line/column in the source text.
//!
//! Only ever run on text that `serde_json` already accepted, so the scanner
//! assumes well-formed input and bails out with `None` on anything else.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Seg {
    Key(&'static str),
    Index(usize),
}

/// Path into a JSON document, e.g. `links[2].delays[0].duration`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct JsonPath(Vec<Seg>);

impl JsonPath {
    pub fn root() -> Self {
        JsonPath(Vec::new())
    }

    pub fn key(&self, k: &'static str) -> Self {
        let mut p = self.clone();
        p.0.push(Seg::Key(k));
        p
    }

    pub fn index(&self, i: usize) -> Self {
        let mut p = self.clone();
        p.0.push(Seg::Index(i));
        p
    }

    pub fn segments(&self) -> &[Seg] {
        &self.0
    }
}

impl fmt::Display for JsonPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("$");
        }
        for (i, seg) in self.0.iter().enumerate() {
            match seg {
                Seg::Key(k) if i == 0 => write!(f, "{k}")?,
                Seg::Key(k) => write!(f, ".{k}")?,
                Seg::Index(n) => write!(f, "[{n}]")?,
            }
        }
        Ok(())
    }
}

struct Scanner<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> Option<()> {
        self.ws();
        (self.peek()? == b).then(|| self.pos += 1)
    }

    /// Raw string contents between the quotes, escapes left in place.
    fn string(&mut self) -> Option<&'a [u8]> {
        self.eat(b'"')?;
        let start = self.pos;
        loop {
            match self.peek()? {
                b'\\' => self.pos += 2,
                b'"' => {
                    let s = &self.src[start..self.pos];
                    self.pos += 1;
                    return Some(s);
                }
                _ => self.pos += 1,
            }
        }
    }

    fn skip_value(&mut self) -> Option<()> {
        self.ws();
        match self.peek()? {
            b'"' => self.string().map(|_| ()),
            b'{' => {
                self.pos += 1;
                self.ws();
                if self.peek()? == b'}' {
                    self.pos += 1;
                    return Some(());
                }
                loop {
                    self.string()?;
                    self.eat(b':')?;
                    self.skip_value()?;
                    self.ws();
                    match self.peek()? {
                        b',' => self.pos += 1,
                        b'}' => {
                            self.pos += 1;
                            return Some(());
                        }
                        _ => return None,
                    }
                }
            }
            b'[' => {
                self.pos += 1;
                self.ws();
                if self.peek()? == b']' {
                    self.pos += 1;
                    return Some(());
                }
                loop {
                    self.skip_value()?;
                    self.ws();
                    match self.peek()? {
                        b',' => self.pos += 1,
                        b']' => {
                            self.pos += 1;
                            return Some(());
                        }
                        _ => return None,
                    }
                }
            }
            _ => {
                while let Some(b) = self.peek() {
                    if matches!(b, b',' | b'}' | b']') || b.is_ascii_whitespace() {
                        break;
                    }
                    self.pos += 1;
                }
                Some(())
            }
        }
    }

    /// Byte offset of the value at `path`, or of the deepest prefix found.
    fn find(&mut self, path: &[Seg]) -> Option<usize> {
        self.ws();
        let Some((first, rest)) = path.split_first() else {
            return Some(self.pos);
        };
        let here = self.pos;
        match (first, self.peek()?) {
            (Seg::Key(want), b'{') => {
                self.pos += 1;
                self.ws();
                if self.peek()? == b'}' {
                    return Some(here);
                }
                loop {
                    let key = self.string()?;
                    self.eat(b':')?;
                    if key == want.as_bytes() {
                        return self.find(rest);
                    }
                    self.skip_value()?;
                    self.ws();
                    match self.peek()? {
                        b',' => self.pos += 1,
                        _ => return Some(here),
                    }
                }
            }
            (Seg::Index(want), b'[') => {
                self.pos += 1;
                let mut i = 0;
                loop {
                    self.ws();
                    if self.peek()? == b']' {
                        return Some(here);
                    }
                    if i == *want {
                        return self.find(rest);
                    }
                    self.skip_value()?;
                    self.ws();
                    match self.peek()? {
                        b',' => self.pos += 1,
                        _ => return Some(here),
                    }
                    i += 1;
                }
            }
            _ => Some(here),
        }
    }
}

/// 1-based line and column (in characters) of the value at `path`. Falls
/// back to the closest enclosing value when the path is absent.
pub fn locate(text: &str, path: &JsonPath) -> (usize, usize) {
    let mut sc = Scanner {
        src: text.as_bytes(),
        pos: 0,
    };
    let offset = sc.find(path.segments()).unwrap_or(0).min(text.len());
    line_col(text, offset)
}

pub fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let mut offset = offset.min(text.len());
    while !text.is_char_boundary(offset) {
        offset -= 1;
    }
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let line_start = before.rfind('\n').map_or(0, |i| i + 1);
    let column = before[line_start..].chars().count() + 1;
    (line, column)
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"{
  "a": 1,
  "list": [
    {"x": "q\"z", "y": [1, 2]},
    {"x": "w", "y": {"deep": true}}
  ]
}"#;

    #[test]
    fn finds_nested_values() {
        let p = JsonPath::root().key("list").index(1).key("y").key("deep");
        assert_eq!(locate(DOC, &p), (5, 30));
        let p = JsonPath::root().key("list").index(0).key("y");
        assert_eq!(locate(DOC, &p), (4, 24));
        assert_eq!(locate(DOC, &JsonPath::root().key("a")), (2, 8));
    }

    #[test]
    fn missing_path_falls_back_to_parent() {
        let p = JsonPath::root().key("list").index(7);
        assert_eq!(locate(DOC, &p), (3, 11));
        assert_eq!(locate(DOC, &JsonPath::root().key("nope")), (1, 1));
    }

    #[test]
    fn path_display() {
        let p = JsonPath::root()
            .key("links")
            .index(2)
            .key("delays")
            .index(0);
        assert_eq!(p.to_string(), "links[2].delays[0]");
        assert_eq!(JsonPath::root().to_string(), "$");
    }
}
