//! Plain-text map files.
//!
//! ```text
//! edged3-map 1
//! name corridor
//! v_max 0.5
//! w_max 1.5
//! dt 0.1
//! beams 16
//! max_range 3.5
//! time_limit 17
//! velocity_lag 0
//! boundary 0 0 6 0 6 4 0 4
//! obstacle 1 1 5 1 5 3 1 3
//! segment 2 0.5 2 0.8
//! ```
//!
//! `boundary` and `obstacle` list polygon vertices as `x y` pairs;
//! `segment` adds a thin wall. Lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::geometry::{Point, Polygon, Segment};
use super::nav::NavWorld;
use crate::{Error, Result};

pub const MAP_FORMAT: &str = "edged3-map";
pub const MAP_FORMAT_VERSION: u32 = 1;

fn parse_numbers(key: &str, rest: &[&str], line: usize) -> Result<Vec<f64>> {
    rest.iter()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::Format(format!("line {line}: {key} value {t:?} is not a number")))
        })
        .collect()
}

fn parse_polygon(key: &str, values: &[f64], line: usize) -> Result<Polygon> {
    if values.len() < 6 || values.len() % 2 != 0 {
        return Err(Error::Format(format!(
            "line {line}: {key} needs at least three x y pairs"
        )));
    }
    Ok(Polygon::new(
        values.chunks(2).map(|c| Point::new(c[0], c[1])).collect(),
    ))
}

fn scalar(key: &str, values: &[f64], line: usize) -> Result<f64> {
    match values {
        [v] => Ok(*v),
        _ => Err(Error::Format(format!("line {line}: {key} takes one value"))),
    }
}

/// Parses a map document.
pub fn parse_map(text: &str) -> Result<NavWorld> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Format("empty map file".into()))?;
    let expected = format!("{MAP_FORMAT} {MAP_FORMAT_VERSION}");
    if header.split_whitespace().collect::<Vec<_>>().join(" ") != expected {
        return Err(Error::Format(format!(
            "map header {header:?}, expected {expected:?}"
        )));
    }

    let mut name = String::from("custom");
    let mut boundary = None;
    let mut obstacles = Vec::new();
    let mut segments = Vec::new();
    let mut params: Vec<(&str, f64)> = Vec::new();
    for (line, text) in lines {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        let (key, rest) = (tokens[0], &tokens[1..]);
        if key == "name" {
            name = rest.join(" ");
            continue;
        }
        let values = parse_numbers(key, rest, line)?;
        match key {
            "boundary" => {
                if boundary.is_some() {
                    return Err(Error::Format(format!("line {line}: second boundary")));
                }
                boundary = Some(parse_polygon(key, &values, line)?);
            }
            "obstacle" => obstacles.push(parse_polygon(key, &values, line)?),
            "segment" => match values[..] {
                [ax, ay, bx, by] => segments.push(Segment::new(ax, ay, bx, by)),
                _ => return Err(Error::Format(format!("line {line}: segment takes four values"))),
            },
            "v_max" | "w_max" | "dt" | "beams" | "max_range" | "time_limit" | "velocity_lag" => {
                params.push((key, scalar(key, &values, line)?));
            }
            other => return Err(Error::Format(format!("line {line}: unknown key {other:?}"))),
        }
    }
    let boundary = boundary.ok_or_else(|| Error::Format("map has no boundary".into()))?;
    let mut world = NavWorld::new(&name, boundary, obstacles, 1.0)?;
    let mut time_limit = None;
    for (key, v) in params {
        match key {
            "v_max" => world.v_max = v,
            "w_max" => world.w_max = v,
            "dt" => world.dt = v,
            "beams" => {
                if v.fract() != 0.0 || v < 0.0 {
                    return Err(Error::Format(format!("beam count {v} is not a whole number")));
                }
                world.n_beams = v as usize;
            }
            "max_range" => world.max_range = v,
            "time_limit" => time_limit = Some(v),
            _ => world.velocity_lag = v,
        }
    }
    world.time_limit = time_limit.ok_or_else(|| Error::Format("map has no time_limit".into()))?;
    world.segments = segments;
    world.finalize()?;
    Ok(world)
}

fn push_polygon(out: &mut String, key: &str, poly: &Polygon) {
    out.push_str(key);
    for v in &poly.vertices {
        let _ = write!(out, " {} {}", v.x, v.y);
    }
    out.push('\n');
}

/// Serializes a world; [`parse_map`] reads it back exactly.
pub fn format_map(world: &NavWorld) -> String {
    let mut out = format!("{MAP_FORMAT} {MAP_FORMAT_VERSION}\nname {}\n", world.name);
    for (key, v) in [
        ("v_max", world.v_max),
        ("w_max", world.w_max),
        ("dt", world.dt),
        ("beams", world.n_beams as f64),
        ("max_range", world.max_range),
        ("time_limit", world.time_limit),
        ("velocity_lag", world.velocity_lag),
    ] {
        let _ = writeln!(out, "{key} {v}");
    }
    push_polygon(&mut out, "boundary", &world.boundary);
    for o in &world.obstacles {
        push_polygon(&mut out, "obstacle", o);
    }
    for s in &world.segments {
        let _ = writeln!(out, "segment {} {} {} {}", s.a.x, s.a.y, s.b.x, s.b.y);
    }
    out
}

pub fn load_map(path: &Path) -> Result<NavWorld> {
    parse_map(&fs::read_to_string(path)?)
}

pub fn save_map(world: &NavWorld, path: &Path) -> Result<()> {
    fs::write(path, format_map(world))?;
    Ok(())
}
