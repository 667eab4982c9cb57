//! Figures: binary PPM, SVG with the same geometry, and ASCII.
//!
//! North is up. Cells are drawn as squares of [`CELL_PX`] pixels; the social
//! cost field is a grayscale ramp from white (0) to black (1).

use std::fmt::Write as _;

use crate::grid::{Cell, Heading, Pose};
use crate::scenario::QueueScenario;

pub const CELL_PX: u32 = 8;

type Rgb = [u8; 3];

pub const WHITE: Rgb = [255, 255, 255];
pub const OBSTACLE: Rgb = [64, 64, 64];
pub const RING: Rgb = [220, 30, 30];
pub const OPENING: Rgb = [255, 200, 200];
pub const START: Rgb = [0, 200, 220];
pub const GOAL: Rgb = [20, 170, 40];
pub const PERSON: Rgb = [255, 140, 0];
pub const PATH: Rgb = [30, 60, 230];

/// Everything drawn in one figure.
#[derive(Debug, Clone, Copy)]
pub struct Figure<'a> {
    pub scenario: &'a QueueScenario,
    pub start: Option<Pose>,
    pub path: Option<&'a [Pose]>,
    /// One value in [0, 1] per map cell, in map index order.
    pub cost_field: Option<&'a [f64]>,
}

impl<'a> Figure<'a> {
    pub fn new(scenario: &'a QueueScenario) -> Self {
        Figure {
            scenario,
            start: None,
            path: None,
            cost_field: None,
        }
    }
}

fn gray(c: f64) -> Rgb {
    let v = (255.0 * (1.0 - c.clamp(0.0, 1.0))).round() as u8;
    [v, v, v]
}

/// Shape drawn inside a cell, in cell-local unit coordinates (0..1, y up).
#[derive(Clone, Copy)]
enum Mark {
    Fill,
    Dot(f64),
    Arrow(Heading),
}

struct Item {
    cell: Cell,
    color: Rgb,
    mark: Mark,
}

fn arrow_triangle(h: Heading) -> [(f64, f64); 3] {
    let tri = [(0.9, 0.5), (0.15, 0.85), (0.15, 0.15)];
    let a = h.angle();
    let (s, c) = a.sin_cos();
    tri.map(|(x, y)| {
        let (dx, dy) = (x - 0.5, y - 0.5);
        (0.5 + dx * c - dy * s, 0.5 + dx * s + dy * c)
    })
}

fn items(fig: &Figure) -> Vec<Item> {
    let s = fig.scenario;
    let map = &s.map;
    let mut out = Vec::new();
    if let Some(field) = fig.cost_field {
        for (i, &c) in field.iter().enumerate() {
            if c > 0.0 {
                out.push(Item {
                    cell: map.cell_at(i),
                    color: gray(c),
                    mark: Mark::Fill,
                });
            }
        }
    }
    for c in map.obstacles() {
        out.push(Item { cell: c, color: OBSTACLE, mark: Mark::Fill });
    }
    for &c in &s.opening {
        out.push(Item { cell: c, color: OPENING, mark: Mark::Dot(0.25) });
    }
    for &c in &s.virtual_obstacles {
        out.push(Item { cell: c, color: RING, mark: Mark::Dot(0.3) });
    }
    if let Some(path) = fig.path {
        for p in path {
            out.push(Item { cell: p.cell(), color: PATH, mark: Mark::Dot(0.2) });
        }
    }
    for p in s.people() {
        out.push(Item { cell: p.cell(), color: PERSON, mark: Mark::Arrow(p.facing) });
    }
    if let Some(p) = fig.start {
        out.push(Item { cell: p.cell(), color: START, mark: Mark::Dot(0.45) });
    }
    out.push(Item { cell: s.goal(), color: GOAL, mark: Mark::Dot(0.45) });
    out
}

fn inside_triangle(p: (f64, f64), t: &[(f64, f64); 3]) -> bool {
    let edge = |a: (f64, f64), b: (f64, f64)| (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
    let d = [edge(t[0], t[1]), edge(t[1], t[2]), edge(t[2], t[0])];
    d.iter().all(|v| *v >= 0.0) || d.iter().all(|v| *v <= 0.0)
}

fn covers(mark: Mark, u: f64, v: f64) -> bool {
    match mark {
        Mark::Fill => true,
        Mark::Dot(r) => (u - 0.5).powi(2) + (v - 0.5).powi(2) <= r * r,
        Mark::Arrow(h) => inside_triangle((u, v), &arrow_triangle(h)),
    }
}

/// Binary PPM (P6). Output depends only on the figure contents.
pub fn to_ppm(fig: &Figure) -> Vec<u8> {
    let map = &fig.scenario.map;
    let (w, h) = (map.width() * CELL_PX, map.height() * CELL_PX);
    let mut px = vec![WHITE; (w * h) as usize];
    for item in items(fig) {
        let x0 = item.cell.x as u32 * CELL_PX;
        // Row 0 of the image is the top (largest y).
        let y0 = (map.height() - 1 - item.cell.y as u32) * CELL_PX;
        for dy in 0..CELL_PX {
            for dx in 0..CELL_PX {
                let u = (f64::from(dx) + 0.5) / f64::from(CELL_PX);
                let v = 1.0 - (f64::from(dy) + 0.5) / f64::from(CELL_PX);
                if covers(item.mark, u, v) {
                    px[((y0 + dy) * w + x0 + dx) as usize] = item.color;
                }
            }
        }
    }
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    out.reserve(px.len() * 3);
    for p in px {
        out.extend_from_slice(&p);
    }
    out
}

fn hex(c: Rgb) -> String {
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

pub fn to_svg(fig: &Figure) -> String {
    let map = &fig.scenario.map;
    let k = f64::from(CELL_PX);
    let (w, h) = (map.width() * CELL_PX, map.height() * CELL_PX);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="{}"/>"#, hex(WHITE));
    for item in items(fig) {
        let x0 = f64::from(item.cell.x) * k;
        let y0 = f64::from(map.height() as i32 - 1 - item.cell.y) * k;
        let color = hex(item.color);
        match item.mark {
            Mark::Fill => {
                let _ = writeln!(s, r#"<rect x="{x0}" y="{y0}" width="{k}" height="{k}" fill="{color}"/>"#);
            }
            Mark::Dot(r) => {
                let _ = writeln!(
                    s,
                    r#"<circle cx="{}" cy="{}" r="{}" fill="{color}"/>"#,
                    x0 + k / 2.0,
                    y0 + k / 2.0,
                    r * k
                );
            }
            Mark::Arrow(hd) => {
                let pts: Vec<String> = arrow_triangle(hd)
                    .iter()
                    .map(|(u, v)| format!("{:.3},{:.3}", x0 + u * k, y0 + (1.0 - v) * k))
                    .collect();
                let _ = writeln!(s, r#"<polygon points="{}" fill="{color}"/>"#, pts.join(" "));
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

/// One character per cell, north at the top.
///
/// `G` goal, `S` start, `^>v<` people, `*` path, `x` ring, `=` opening,
/// `#` obstacle, `1`-`9` social cost tenths, `.` free.
pub fn to_ascii(fig: &Figure) -> String {
    let s = fig.scenario;
    let map = &s.map;
    let (w, h) = (map.width() as usize, map.height() as usize);
    let mut grid = vec![vec!['.'; w]; h];
    let mut put = |c: Cell, ch: char| {
        grid[h - 1 - c.y as usize][c.x as usize] = ch;
    };
    if let Some(field) = fig.cost_field {
        for (i, &c) in field.iter().enumerate() {
            let tenth = (c.clamp(0.0, 1.0) * 9.0).round() as u32;
            if c > 0.0 {
                put(map.cell_at(i), char::from_digit(tenth.max(1), 10).unwrap_or('9'));
            }
        }
    }
    for c in map.obstacles() {
        put(c, '#');
    }
    for &c in &s.opening {
        put(c, '=');
    }
    for &c in &s.virtual_obstacles {
        put(c, 'x');
    }
    if let Some(path) = fig.path {
        for p in path {
            put(p.cell(), '*');
        }
    }
    for p in s.people() {
        let ch = match p.facing {
            Heading::N => '^',
            Heading::E => '>',
            Heading::S => 'v',
            Heading::W => '<',
        };
        put(p.cell(), ch);
    }
    if let Some(p) = fig.start {
        put(p.cell(), 'S');
    }
    put(s.goal(), 'G');
    let mut out = String::with_capacity((w + 1) * h);
    for row in grid {
        out.extend(row);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;

    fn pixel(ppm: &[u8], w: u32, x: u32, y: u32) -> Rgb {
        let header = format!("P6\n{w} {w}\n255\n").len();
        let i = header + 3 * (y * w + x) as usize;
        [ppm[i], ppm[i + 1], ppm[i + 2]]
    }

    #[test]
    fn ppm_header_and_size() {
        let s = generate::demo();
        let ppm = to_ppm(&Figure::new(&s));
        let header = b"P6\n240 240\n255\n";
        assert!(ppm.starts_with(header));
        assert_eq!(ppm.len(), header.len() + 240 * 240 * 3);
    }

    #[test]
    fn markers_land_in_the_right_cells() {
        let s = generate::demo();
        let fig = Figure {
            start: Some(Pose::new(2, 2, Heading::E)),
            ..Figure::new(&s)
        };
        let ppm = to_ppm(&fig);
        let centre = |c: Cell| (c.x as u32 * 8 + 4, (29 - c.y as u32) * 8 + 4);
        let (x, y) = centre(Cell::new(15, 15));
        assert_eq!(pixel(&ppm, 240, x, y), GOAL);
        let (x, y) = centre(Cell::new(2, 2));
        assert_eq!(pixel(&ppm, 240, x, y), START);
        let (x, y) = centre(Cell::new(13, 13));
        assert_eq!(pixel(&ppm, 240, x, y), RING);
        assert_eq!(pixel(&ppm, 240, 0, 0), WHITE);
    }

    #[test]
    fn ascii_layout() {
        let s = generate::demo();
        let art = to_ascii(&Figure::new(&s));
        let rows: Vec<&str> = art.lines().collect();
        assert_eq!(rows.len(), 30);
        assert_eq!(rows[29 - 15].chars().nth(15), Some('G'));
        assert_eq!(rows[29 - 17].chars().nth(15), Some('v'));
        assert_eq!(rows[29 - 21].chars().nth(14), Some('='));
        assert_eq!(art.matches('x').count(), 21);
    }

    #[test]
    fn svg_mentions_every_marker() {
        let s = generate::demo();
        let svg = to_svg(&Figure::new(&s));
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polygon").count(), 2);
        assert_eq!(svg.matches(&hex(RING)).count(), 21);
    }
}
