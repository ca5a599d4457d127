//! A deliberately small TikZ reader: straight-line `\draw` polylines,
//! `\fill (x,y) circle ...` point markers and `\coordinate ... at (x,y)`
//! labels. Anything else is skipped.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;

/// One straight stroke in figure units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: Point2,
    pub end: Point2,
}

impl Segment {
    pub fn length(&self) -> f64 {
        (self.end - self.start).norm()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SegmentList {
    pub segments: Vec<Segment>,
    /// Filled-circle positions, in order of appearance.
    pub markers: Vec<Point2>,
    /// Coordinate labels (`$a$` → position of the label anchor).
    pub labels: BTreeMap<String, Point2>,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            bytes: text.as_bytes(),
            pos: 0,
            line: 1,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<u8> {
        self.bytes.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c == b'%' {
                while let Some(c) = self.peek() {
                    if c == b'\n' {
                        break;
                    }
                    self.bump();
                }
            } else if c.is_ascii_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn word(&mut self) -> &'a str {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphabetic()) {
            self.bump();
        }
        std::str::from_utf8(&self.bytes[start..self.pos]).unwrap_or("")
    }

    /// Consume a balanced `open ... close` group and return its inner text.
    fn group(&mut self, open: u8, close: u8) -> Result<(String, usize)> {
        let line = self.line;
        debug_assert_eq!(self.peek(), Some(open));
        self.bump();
        let start = self.pos;
        let mut depth = 1;
        while let Some(c) = self.bump() {
            if c == open {
                depth += 1;
            } else if c == close {
                depth -= 1;
                if depth == 0 {
                    let inner = String::from_utf8_lossy(&self.bytes[start..self.pos - 1]);
                    return Ok((inner.into_owned(), line));
                }
            }
        }
        Err(Error::Parse {
            line,
            message: format!("unclosed '{}'", open as char),
        })
    }

    fn skip_options(&mut self) -> Result<Option<String>> {
        self.skip_ws();
        if self.peek() == Some(b'[') {
            Ok(Some(self.group(b'[', b']')?.0))
        } else {
            Ok(None)
        }
    }

    fn skip_statement(&mut self) {
        while let Some(c) = self.peek() {
            if c == b';' {
                self.bump();
                return;
            }
            if c == b'\\' {
                return;
            }
            self.bump();
        }
    }
}

enum Coord {
    Point(Point2),
    Named(String),
}

fn parse_coord(inner: &str, line: usize) -> Result<Coord> {
    let Some((xs, ys)) = inner.split_once(',') else {
        return Ok(Coord::Named(inner.trim().to_string()));
    };
    let parse = |s: &str| -> Result<f64> {
        let s = s.trim();
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Parse {
                line,
                message: format!("malformed coordinate ({inner})"),
            })
    };
    Ok(Coord::Point(Point2::new(parse(xs)?, parse(ys)?)))
}

/// Extract segments, markers and labels from a TikZ picture body.
///
/// Scale directives are ignored; coordinates are returned exactly as written.
pub fn parse_tikz(text: &str) -> Result<SegmentList> {
    let mut out = SegmentList::default();
    let mut cur = Cursor::new(text);
    while let Some(c) = cur.peek() {
        if c != b'\\' {
            cur.bump();
            continue;
        }
        cur.bump();
        match cur.word() {
            "draw" => parse_draw(&mut cur, &mut out)?,
            "fill" => {
                cur.skip_options()?;
                cur.skip_ws();
                if cur.peek() == Some(b'(') {
                    let (inner, line) = cur.group(b'(', b')')?;
                    if let Coord::Point(p) = parse_coord(&inner, line)? {
                        out.markers.push(p);
                    }
                }
                cur.skip_statement();
            }
            "coordinate" => parse_coordinate(&mut cur, &mut out)?,
            _ => {}
        }
    }
    Ok(out)
}

fn parse_draw(cur: &mut Cursor<'_>, out: &mut SegmentList) -> Result<()> {
    cur.skip_options()?;
    let mut prev: Option<Point2> = None;
    let mut pending_line = false;
    loop {
        cur.skip_ws();
        match cur.peek() {
            None | Some(b'\\') => return Ok(()),
            Some(b';') => {
                cur.bump();
                return Ok(());
            }
            Some(b'(') => {
                let (inner, line) = cur.group(b'(', b')')?;
                let point = match parse_coord(&inner, line)? {
                    Coord::Point(p) => Some(p),
                    Coord::Named(name) => out.labels.get(&name).copied(),
                };
                match (point, prev, pending_line) {
                    (Some(p), Some(q), true) => out.segments.push(Segment { start: q, end: p }),
                    (None, _, _) => {
                        prev = None;
                        pending_line = false;
                        continue;
                    }
                    _ => {}
                }
                prev = point;
                pending_line = false;
            }
            Some(b'-') if cur.peek_at(1) == Some(b'-') => {
                cur.bump();
                cur.bump();
                pending_line = true;
            }
            Some(b'[') => {
                cur.group(b'[', b']')?;
            }
            Some(b'{') => {
                cur.group(b'{', b'}')?;
            }
            Some(_) => {
                // Unsupported path operation (arc, node, `to`, ...): break the polyline.
                cur.bump();
                prev = None;
                pending_line = false;
            }
        }
    }
}

fn parse_coordinate(cur: &mut Cursor<'_>, out: &mut SegmentList) -> Result<()> {
    let options = cur.skip_options()?;
    cur.skip_ws();
    let mut name = None;
    if cur.peek() == Some(b'(') {
        name = Some(cur.group(b'(', b')')?.0.trim().to_string());
    }
    cur.skip_ws();
    if cur.word() != "at" {
        cur.skip_statement();
        return Ok(());
    }
    cur.skip_ws();
    if cur.peek() != Some(b'(') {
        return Err(Error::Parse {
            line: cur.line,
            message: "expected coordinate after 'at'".into(),
        });
    }
    let (inner, line) = cur.group(b'(', b')')?;
    if let Coord::Point(p) = parse_coord(&inner, line)? {
        let label = options.as_deref().and_then(label_text).or(name);
        if let Some(label) = label.filter(|s| !s.is_empty()) {
            out.labels.insert(label, p);
        }
    }
    cur.skip_statement();
    Ok(())
}

/// `label=right:$a$` → `a`.
fn label_text(options: &str) -> Option<String> {
    let rest = options.split("label=").nth(1)?;
    let rest = rest.split(',').next()?;
    let text = rest.rsplit(':').next()?.trim();
    Some(text.trim_matches('$').trim().to_string())
}
