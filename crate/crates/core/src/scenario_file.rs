//! Line-oriented scenario text format.
//!
//! ```text
//! version 1
//! grid 30 30 0.2
//! goal 15 15
//! person 15 17 S
//! person 15 19 S
//! start 2 2 E
//! margin 1
//! ```
//!
//! `obstacle X Y` marks static obstacles. Instead of `margin`, the ring can be
//! listed explicitly with `vobstacle X Y` and `opening X Y` lines.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Cell, GridMap, Heading, Pose};
use crate::scenario::{Person, QueueScenario, Scene, StartSpec};

pub const FORMAT_VERSION: u32 = 1;

struct Fields<'a> {
    line: usize,
    it: std::str::SplitWhitespace<'a>,
}

impl<'a> Fields<'a> {
    fn next(&mut self, what: &str) -> Result<&'a str> {
        self.it
            .next()
            .ok_or_else(|| Error::parse(self.line, format!("missing {what}")))
    }

    fn num<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let s = self.next(what)?;
        s.parse()
            .map_err(|_| Error::parse(self.line, format!("invalid {what} '{s}'")))
    }

    fn heading(&mut self) -> Result<Heading> {
        let s = self.next("heading")?;
        s.parse()
            .map_err(|_| Error::parse(self.line, format!("invalid heading '{s}'")))
    }

    fn end(mut self) -> Result<()> {
        match self.it.next() {
            Some(extra) => Err(Error::parse(self.line, format!("unexpected '{extra}'"))),
            None => Ok(()),
        }
    }
}

fn once<T>(slot: &mut Option<T>, value: T, line: usize, name: &str) -> Result<()> {
    if slot.is_some() {
        return Err(Error::parse(line, format!("duplicate '{name}' directive")));
    }
    *slot = Some(value);
    Ok(())
}

pub fn parse_scenario(text: &str) -> Result<QueueScenario> {
    let mut version = None;
    let mut map: Option<GridMap> = None;
    let mut goal = None;
    let mut start = None;
    let mut margin = None;
    let mut people = Vec::new();
    let mut vobs = BTreeSet::new();
    let mut opening = BTreeSet::new();
    let mut last_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("");
        let mut f = Fields {
            line,
            it: content.split_whitespace(),
        };
        let Some(directive) = f.it.next() else {
            continue;
        };
        if version.is_none() && directive != "version" {
            return Err(Error::parse(line, "expected 'version' as the first directive"));
        }
        let cell = |f: &mut Fields, map: &Option<GridMap>| -> Result<Cell> {
            let c = Cell::new(f.num("x")?, f.num("y")?);
            let m = map
                .as_ref()
                .ok_or_else(|| Error::parse(line, "'grid' must precede cell directives"))?;
            if !m.in_bounds(c) {
                return Err(Error::parse(line, format!("cell {c} outside {}x{} grid", m.width(), m.height())));
            }
            Ok(c)
        };
        match directive {
            "version" => {
                let v: u32 = f.num("version")?;
                if v != FORMAT_VERSION {
                    return Err(Error::parse(line, format!("unsupported version {v}")));
                }
                f.end()?;
                once(&mut version, v, line, "version")?;
            }
            "grid" => {
                let (w, h, res): (u32, u32, f64) = (f.num("width")?, f.num("height")?, f.num("resolution")?);
                f.end()?;
                let m = GridMap::new(w, h, res).map_err(|e| Error::parse(line, e.to_string()))?;
                once(&mut map, m, line, "grid")?;
            }
            "obstacle" => {
                let c = cell(&mut f, &map)?;
                f.end()?;
                map.as_mut().expect("checked by cell()").set_obstacle(c)?;
            }
            "goal" => {
                let c = cell(&mut f, &map)?;
                f.end()?;
                once(&mut goal, c, line, "goal")?;
            }
            "person" => {
                let c = cell(&mut f, &map)?;
                let h = f.heading()?;
                f.end()?;
                people.push(Person::new(c.x, c.y, h));
            }
            "start" => {
                let mut peek = f.it.clone();
                let s = if peek.next() == Some("random") {
                    f.it.next();
                    StartSpec::Random
                } else {
                    let c = cell(&mut f, &map)?;
                    StartSpec::Fixed(Pose::at(c, f.heading()?))
                };
                f.end()?;
                once(&mut start, s, line, "start")?;
            }
            "margin" => {
                let m: u32 = f.num("margin")?;
                f.end()?;
                once(&mut margin, (m, line), line, "margin")?;
            }
            "vobstacle" => {
                let c = cell(&mut f, &map)?;
                f.end()?;
                vobs.insert(c);
            }
            "opening" => {
                let c = cell(&mut f, &map)?;
                f.end()?;
                opening.insert(c);
            }
            other => return Err(Error::parse(line, format!("unknown directive '{other}'"))),
        }
    }

    let end = last_line + 1;
    let missing = |name: &str| Error::parse(end, format!("missing '{name}' directive"));
    version.ok_or_else(|| missing("version"))?;
    let map = map.ok_or_else(|| missing("grid"))?;
    let goal = goal.ok_or_else(|| missing("goal"))?;
    let start = start.ok_or_else(|| missing("start"))?;
    if people.is_empty() {
        return Err(missing("person"));
    }
    match margin {
        Some((m, line)) => {
            if !vobs.is_empty() || !opening.is_empty() {
                return Err(Error::parse(line, "'margin' cannot be combined with explicit vobstacle/opening cells"));
            }
            QueueScenario::with_margin(map, goal, people, m, start)
        }
        None => {
            if vobs.is_empty() {
                return Err(missing("margin' or 'vobstacle"));
            }
            QueueScenario::new(map, Scene { goal, people }, vobs, opening, None, start)
        }
    }
}

pub fn print_scenario(s: &QueueScenario) -> String {
    let mut out = String::new();
    let m = &s.map;
    let _ = writeln!(out, "version {FORMAT_VERSION}");
    let _ = writeln!(out, "grid {} {} {}", m.width(), m.height(), m.resolution());
    for c in m.obstacles() {
        let _ = writeln!(out, "obstacle {} {}", c.x, c.y);
    }
    let _ = writeln!(out, "goal {} {}", s.goal().x, s.goal().y);
    for p in s.people() {
        let _ = writeln!(out, "person {} {} {}", p.x, p.y, p.facing.letter());
    }
    match s.start {
        StartSpec::Fixed(p) => {
            let _ = writeln!(out, "start {} {} {}", p.x, p.y, p.heading.letter());
        }
        StartSpec::Random => out.push_str("start random\n"),
    }
    match s.margin {
        Some(margin) => {
            let _ = writeln!(out, "margin {margin}");
        }
        None => {
            for c in &s.virtual_obstacles {
                let _ = writeln!(out, "vobstacle {} {}", c.x, c.y);
            }
            for c in &s.opening {
                let _ = writeln!(out, "opening {} {}", c.x, c.y);
            }
        }
    }
    out
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<QueueScenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenario(&text)
}

pub fn save_scenario(s: &QueueScenario, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, print_scenario(s)).map_err(|e| Error::io(path, e))
}
