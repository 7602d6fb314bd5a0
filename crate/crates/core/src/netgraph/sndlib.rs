//! Readers for the SNDlib native (sectioned plain text) and XML network formats.
//!
//! SNDlib carries no link lengths, so lengths are derived from node
//! coordinates. The native reader additionally accepts a non-standard
//! `LINK_LENGTHS ( <link_id> <km> ... )` section and the XML reader an
//! optional `<length>` element (km) inside `<link>`; explicit lengths win.

use std::collections::HashMap;

use super::topology::{FiberSpec, Node, RawLink, Topology};
use crate::error::{Error, Result};

/// Parses either format, picking XML when the document starts with `<`.
pub fn parse_topology(text: &str, fiber: &FiberSpec) -> Result<Topology> {
    if text.trim_start().starts_with('<') {
        parse_sndlib_xml(text, fiber)
    } else {
        parse_sndlib_native(text, fiber)
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Nodes,
    Links,
    Lengths,
    Skipped,
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Splits on whitespace while keeping parentheses as separate tokens.
fn tokens(line: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch == '(' || ch == ')' || ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(&line[s..i]);
            }
            if !ch.is_whitespace() {
                out.push(&line[i..i + 1]);
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(&line[s..]);
    }
    out
}

fn number(tok: Option<&&str>, line: usize, what: &str) -> Result<f64> {
    let tok = tok.ok_or_else(|| perr(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| perr(line, format!("invalid {what} `{tok}`")))
}

pub fn parse_sndlib_native(text: &str, fiber: &FiberSpec) -> Result<Topology> {
    let mut section = Section::None;
    let mut nodes = Vec::new();
    let mut links = Vec::new();
    let mut lengths: HashMap<String, (f64, usize)> = HashMap::new();
    let mut saw_nodes = false;
    let mut saw_links = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() || line.starts_with('?') {
            continue;
        }
        let toks = tokens(line);
        if section == Section::None {
            match toks.as_slice() {
                [name, "("] => {
                    section = match *name {
                        "NODES" => {
                            saw_nodes = true;
                            Section::Nodes
                        }
                        "LINKS" => {
                            saw_links = true;
                            Section::Links
                        }
                        "LINK_LENGTHS" => Section::Lengths,
                        _ => Section::Skipped,
                    };
                }
                _ => return Err(perr(line_no, format!("expected section header, got `{line}`"))),
            }
            continue;
        }
        if toks == [")"] {
            section = Section::None;
            continue;
        }
        match section {
            Section::Nodes => {
                let name = toks[0].to_string();
                let coords = match &toks[1..] {
                    [] => None,
                    ["(", x, y, ")"] => {
                        let lon = number(Some(x), line_no, "longitude")?;
                        let lat = number(Some(y), line_no, "latitude")?;
                        Some((lon, lat))
                    }
                    _ => return Err(perr(line_no, format!("malformed node line `{line}`"))),
                };
                nodes.push(Node { name, coords });
            }
            Section::Links => match toks.as_slice() {
                [id, "(", a, b, ")", ..] => links.push(RawLink {
                    name: id.to_string(),
                    a: a.to_string(),
                    b: b.to_string(),
                    length_km: None,
                    line: line_no,
                }),
                _ => return Err(perr(line_no, format!("malformed link line `{line}`"))),
            },
            Section::Lengths => match toks.as_slice() {
                [id, km] => {
                    let km = number(Some(km), line_no, "link length")?;
                    lengths.insert(id.to_string(), (km, line_no));
                }
                _ => return Err(perr(line_no, format!("malformed length line `{line}`"))),
            },
            Section::Skipped | Section::None => {}
        }
    }
    if section != Section::None {
        return Err(perr(text.lines().count(), "unterminated section"));
    }
    if !saw_nodes || !saw_links {
        return Err(perr(1, "document lacks a NODES or LINKS section"));
    }
    for l in &mut links {
        if let Some((km, _)) = lengths.remove(&l.name) {
            l.length_km = Some(km);
        }
    }
    if let Some((name, (_, line))) = lengths.into_iter().min_by_key(|(_, (_, l))| *l) {
        return Err(perr(line, format!("length given for unknown link `{name}`")));
    }
    Topology::build(nodes, links, fiber)
}

pub fn parse_sndlib_xml(text: &str, fiber: &FiberSpec) -> Result<Topology> {
    let doc = roxmltree::Document::parse(text).map_err(|e| perr(e.pos().row as usize, e.to_string()))?;
    let line_of = |n: roxmltree::Node| doc.text_pos_at(n.range().start).row as usize;
    let child_text = |n: roxmltree::Node, tag: &str| -> Option<String> {
        n.children()
            .find(|c| c.has_tag_name(tag))
            .and_then(|c| c.text())
            .map(|t| t.trim().to_string())
    };

    let mut nodes = Vec::new();
    let mut links = Vec::new();
    for n in doc.descendants().filter(|n| n.has_tag_name("node")) {
        let line = line_of(n);
        let name = n
            .attribute("id")
            .ok_or_else(|| perr(line, "node without id"))?
            .to_string();
        let coords = match n.children().find(|c| c.has_tag_name("coordinates")) {
            Some(c) => {
                let x = child_text(c, "x");
                let y = child_text(c, "y");
                let lon = number(x.as_deref().as_ref(), line, "x coordinate")?;
                let lat = number(y.as_deref().as_ref(), line, "y coordinate")?;
                Some((lon, lat))
            }
            None => None,
        };
        nodes.push(Node { name, coords });
    }
    for l in doc.descendants().filter(|n| n.has_tag_name("link")) {
        let line = line_of(l);
        let name = l
            .attribute("id")
            .ok_or_else(|| perr(line, "link without id"))?
            .to_string();
        let a = child_text(l, "source").ok_or_else(|| perr(line, "link without source"))?;
        let b = child_text(l, "target").ok_or_else(|| perr(line, "link without target"))?;
        let length_km = match child_text(l, "length") {
            Some(s) => Some(number(Some(&s.as_str()), line, "link length")?),
            None => None,
        };
        links.push(RawLink {
            name,
            a,
            b,
            length_km,
            line,
        });
    }
    if nodes.is_empty() {
        return Err(perr(1, "document has no <node> elements"));
    }
    Topology::build(nodes, links, fiber)
}
