//! Reader and writer for the ISPD 2005/2006 Bookshelf dialect.
//!
//! Coordinates in `.pl` files are lower-left corners; internally blocks are
//! stored by center, translated so the row bounding box starts at the origin.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{Block, Circuit, Net, Pin, Placement, Region, Row};
use crate::error::{Error, Result};

struct Lines {
    path: PathBuf,
    text: String,
}

impl Lines {
    fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Lines { path: path.to_path_buf(), text })
    }

    /// Non-empty, comment-stripped lines tokenized on whitespace, with `:` split
    /// into its own token. Header lines (`UCLA ...`) are skipped.
    fn tokens(&self) -> impl Iterator<Item = (usize, Vec<&str>)> {
        self.text.lines().enumerate().filter_map(|(i, raw)| {
            let line = raw.split('#').next().unwrap_or("");
            let toks: Vec<&str> = line
                .split_whitespace()
                .flat_map(|t| split_colon(t))
                .filter(|t| !t.is_empty())
                .collect();
            if toks.is_empty() || toks[0] == "UCLA" {
                None
            } else {
                Some((i + 1, toks))
            }
        })
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse { path: self.path.clone(), line, msg: msg.into() }
    }

    fn num(&self, line: usize, tok: Option<&&str>) -> Result<f64> {
        let t = tok.ok_or_else(|| self.err(line, "missing number"))?;
        t.parse::<f64>().map_err(|_| self.err(line, format!("expected a number, found `{t}`")))
    }
}

fn split_colon(t: &str) -> Vec<&str> {
    if t == ":" || !t.contains(':') {
        return vec![t];
    }
    let mut out = Vec::new();
    let mut rest = t;
    while let Some(i) = rest.find(':') {
        out.push(&rest[..i]);
        out.push(":");
        rest = &rest[i + 1..];
    }
    out.push(rest);
    out
}

/// `Key : value` header lines.
fn header_value(toks: &[&str], key: &str) -> Option<usize> {
    (toks.len() >= 3 && toks[0] == key && toks[1] == ":").then(|| toks[2].parse().ok()).flatten()
}

#[derive(Default)]
struct AuxFiles {
    nodes: Option<PathBuf>,
    nets: Option<PathBuf>,
    pl: Option<PathBuf>,
    scl: Option<PathBuf>,
}

fn parse_aux(path: &Path) -> Result<AuxFiles> {
    let lines = Lines::read(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut files = AuxFiles::default();
    for (_, toks) in lines.tokens() {
        for t in toks {
            let p = dir.join(t);
            match Path::new(t).extension().and_then(|e| e.to_str()) {
                Some("nodes") => files.nodes = Some(p),
                Some("nets") => files.nets = Some(p),
                Some("pl") => files.pl = Some(p),
                Some("scl") => files.scl = Some(p),
                _ => {}
            }
        }
    }
    Ok(files)
}

fn require(p: Option<PathBuf>, aux: &Path, ext: &str) -> Result<PathBuf> {
    p.ok_or_else(|| Error::Parse { path: aux.to_path_buf(), line: 0, msg: format!("aux lists no .{ext} file") })
}

fn parse_nodes(path: &Path) -> Result<Vec<Block>> {
    let lines = Lines::read(path)?;
    let mut declared = None;
    let mut blocks = Vec::new();
    for (ln, toks) in lines.tokens() {
        if let Some(n) = header_value(&toks, "NumNodes") {
            declared = Some(n);
            continue;
        }
        if toks[0] == "NumTerminals" {
            continue;
        }
        if toks.len() < 3 {
            return Err(lines.err(ln, "expected `name width height [terminal]`"));
        }
        let w = lines.num(ln, toks.get(1))?;
        let h = lines.num(ln, toks.get(2))?;
        let mut b = Block::cell(toks[0], w, h, 0.0, 0.0);
        match toks.get(3).copied() {
            None => {}
            Some("terminal") => b.movable = false,
            Some("terminal_NI") => {
                b.movable = false;
                b.non_image = true;
            }
            Some(other) => return Err(lines.err(ln, format!("unknown node attribute `{other}`"))),
        }
        blocks.push(b);
    }
    if let Some(n) = declared {
        if n != blocks.len() {
            return Err(lines.err(0, format!("NumNodes is {n} but {} nodes were listed", blocks.len())));
        }
    }
    Ok(blocks)
}

fn parse_nets(path: &Path, index: &HashMap<String, usize>) -> Result<Vec<Net>> {
    let lines = Lines::read(path)?;
    let mut nets: Vec<Net> = Vec::new();
    let mut remaining = 0usize;
    let mut declared = None;
    for (ln, toks) in lines.tokens() {
        if let Some(n) = header_value(&toks, "NumNets") {
            declared = Some(n);
            continue;
        }
        if toks[0] == "NumPins" {
            continue;
        }
        if toks[0] == "NetDegree" {
            if remaining != 0 {
                return Err(lines.err(ln, format!("previous net is missing {remaining} pins")));
            }
            let degree = header_value(&toks, "NetDegree").ok_or_else(|| lines.err(ln, "malformed NetDegree line"))?;
            let name = toks.get(3).map(|s| s.to_string()).unwrap_or_else(|| format!("net{}", nets.len()));
            nets.push(Net { name, pins: Vec::with_capacity(degree) });
            remaining = degree;
            continue;
        }
        let net = match nets.last_mut() {
            Some(n) if remaining > 0 => n,
            _ => return Err(lines.err(ln, "pin line outside of a net")),
        };
        let block = *index
            .get(toks[0])
            .ok_or_else(|| Error::UnknownNode { net: net.name.clone(), node: toks[0].to_string() })?;
        let (dx, dy) = match toks.iter().position(|t| *t == ":") {
            Some(i) => (lines.num(ln, toks.get(i + 1))?, lines.num(ln, toks.get(i + 2))?),
            None => (0.0, 0.0),
        };
        net.pins.push(Pin { block, dx, dy });
        remaining -= 1;
    }
    if remaining != 0 {
        return Err(lines.err(0, format!("last net is missing {remaining} pins")));
    }
    if let Some(n) = declared {
        if n != nets.len() {
            return Err(lines.err(0, format!("NumNets is {n} but {} nets were listed", nets.len())));
        }
    }
    Ok(nets)
}

/// Returns lower-left coordinates per block.
fn parse_pl(path: &Path, blocks: &mut [Block], index: &HashMap<String, usize>) -> Result<()> {
    let lines = Lines::read(path)?;
    for (ln, toks) in lines.tokens() {
        if toks.len() < 3 {
            return Err(lines.err(ln, "expected `name x y : orient`"));
        }
        let i = *index.get(toks[0]).ok_or_else(|| lines.err(ln, format!("unknown node `{}`", toks[0])))?;
        blocks[i].x = lines.num(ln, toks.get(1))?;
        blocks[i].y = lines.num(ln, toks.get(2))?;
        if toks.iter().any(|t| t.starts_with("/FIXED")) {
            blocks[i].movable = false;
        }
    }
    Ok(())
}

fn parse_scl(path: &Path) -> Result<Vec<Row>> {
    let lines = Lines::read(path)?;
    let mut rows = Vec::new();
    let mut cur: Option<Row> = None;
    for (ln, toks) in lines.tokens() {
        match toks[0] {
            "NumRows" => {}
            "CoreRow" => {
                cur = Some(Row { y: 0.0, height: 0.0, site_width: 1.0, segments: Vec::new() });
            }
            "End" => {
                let row = cur.take().ok_or_else(|| lines.err(ln, "`End` without `CoreRow`"))?;
                if row.height <= 0.0 || row.segments.is_empty() {
                    return Err(lines.err(ln, "row has no height or no sites"));
                }
                rows.push(row);
            }
            key => {
                let row = cur.as_mut().ok_or_else(|| lines.err(ln, format!("`{key}` outside a row")))?;
                let val = |i: usize| lines.num(ln, toks.get(i));
                match key {
                    "Coordinate" => row.y = val(2)?,
                    "Height" => row.height = val(2)?,
                    // The site pitch is the spacing; the width only matters if no spacing is given.
                    "Sitewidth" | "Sitespacing" => row.site_width = val(2)?,
                    "SubrowOrigin" => {
                        let x0 = val(2)?;
                        let n = toks
                            .iter()
                            .position(|t| *t == "NumSites")
                            .ok_or_else(|| lines.err(ln, "SubrowOrigin without NumSites"))?;
                        let sites = lines.num(ln, toks.get(n + 2))?;
                        row.segments.push((x0, x0 + sites * row.site_width));
                    }
                    _ => {}
                }
            }
        }
    }
    if rows.is_empty() {
        return Err(lines.err(0, "no rows"));
    }
    rows.sort_by(|a, b| a.y.total_cmp(&b.y));
    Ok(rows)
}

/// Parses a circuit from a Bookshelf `.aux` file.
///
/// The region is the bounding box of the `.scl` rows, translated to the origin.
/// Terminals and `/FIXED` entries are fixed blocks; `terminal_NI` nodes carry
/// pins but no area.
pub fn parse_bookshelf(aux_path: &Path) -> Result<Circuit> {
    let files = parse_aux(aux_path)?;
    let nodes_path = require(files.nodes, aux_path, "nodes")?;
    let nets_path = require(files.nets, aux_path, "nets")?;
    let pl_path = require(files.pl, aux_path, "pl")?;
    let scl_path = require(files.scl, aux_path, "scl")?;

    let mut blocks = parse_nodes(&nodes_path)?;
    let mut index = HashMap::with_capacity(blocks.len());
    for (i, b) in blocks.iter().enumerate() {
        if index.insert(b.name.clone(), i).is_some() {
            return Err(Error::InvalidCircuit(format!("duplicate node `{}`", b.name)));
        }
    }
    let nets = parse_nets(&nets_path, &index)?;
    parse_pl(&pl_path, &mut blocks, &index)?;
    let mut rows = parse_scl(&scl_path)?;

    let x0 = rows.iter().flat_map(|r| r.segments.iter().map(|s| s.0)).fold(f64::INFINITY, f64::min);
    let x1 = rows.iter().flat_map(|r| r.segments.iter().map(|s| s.1)).fold(f64::NEG_INFINITY, f64::max);
    let y0 = rows.iter().map(|r| r.y).fold(f64::INFINITY, f64::min);
    let y1 = rows.iter().map(|r| r.y + r.height).fold(f64::NEG_INFINITY, f64::max);
    for r in &mut rows {
        r.y -= y0;
        for s in &mut r.segments {
            s.0 -= x0;
            s.1 -= x0;
        }
    }
    for b in &mut blocks {
        b.x = b.x + 0.5 * b.width - x0;
        b.y = b.y + 0.5 * b.height - y0;
    }

    let name = aux_path.file_stem().and_then(|s| s.to_str()).unwrap_or("circuit").to_string();
    let mut circuit = Circuit::new(name, blocks, nets, Region::new(x1 - x0, y1 - y0), 1.0, rows)?;
    circuit.origin = (x0, y0);
    Ok(circuit)
}

/// Positions from a `.pl` file applied to `circuit`'s blocks; blocks the
/// file does not list keep their current position.
pub fn read_placement(circuit: &Circuit, path: &Path) -> Result<Placement> {
    let lines = Lines::read(path)?;
    let mut p = circuit.initial_placement();
    let (ox, oy) = circuit.origin;
    for (ln, toks) in lines.tokens() {
        if toks.len() < 3 {
            return Err(lines.err(ln, "expected `name x y : orient`"));
        }
        let i = circuit.block_index(toks[0]).ok_or_else(|| lines.err(ln, format!("unknown node `{}`", toks[0])))?;
        let b = &circuit.blocks[i];
        p.x[i] = lines.num(ln, toks.get(1))? + 0.5 * b.width - ox;
        p.y[i] = lines.num(ln, toks.get(2))? + 0.5 * b.height - oy;
    }
    Ok(p)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn pl_text(circuit: &Circuit, placement: &Placement) -> String {
    let mut s = String::from("UCLA pl 1.0\n\n");
    for (i, b) in circuit.blocks.iter().enumerate() {
        if b.is_filler {
            continue;
        }
        let x = placement.x[i] - 0.5 * b.width + circuit.origin.0;
        let y = placement.y[i] - 0.5 * b.height + circuit.origin.1;
        let suffix = match (b.movable, b.non_image) {
            (true, _) => "",
            (false, false) => " /FIXED",
            (false, true) => " /FIXED_NI",
        };
        let _ = writeln!(s, "{}\t{}\t{}\t: N{}", b.name, x, y, suffix);
    }
    s
}

/// Writes a Bookshelf `.pl` file for all non-filler blocks.
pub fn write_placement(circuit: &Circuit, placement: &Placement, path: &Path) -> Result<()> {
    write_file(path, &pl_text(circuit, placement))
}

/// Writes a complete benchmark (`.aux`, `.nodes`, `.nets`, `.pl`, `.scl`) into
/// `dir` and returns the path of the `.aux` file.
pub fn write_bookshelf(circuit: &Circuit, placement: &Placement, dir: &Path, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let real: Vec<&Block> = circuit.blocks.iter().filter(|b| !b.is_filler).collect();

    let mut nodes = String::from("UCLA nodes 1.0\n\n");
    let terminals = real.iter().filter(|b| !b.movable).count();
    let _ = writeln!(nodes, "NumNodes : {}\nNumTerminals : {}", real.len(), terminals);
    for b in &real {
        let kind = match (b.movable, b.non_image) {
            (true, _) => "",
            (false, false) => "\tterminal",
            (false, true) => "\tterminal_NI",
        };
        let _ = writeln!(nodes, "{}\t{}\t{}{}", b.name, b.width, b.height, kind);
    }

    let mut nets = String::from("UCLA nets 1.0\n\n");
    let _ = writeln!(nets, "NumNets : {}\nNumPins : {}", circuit.nets.len(), circuit.num_pins());
    for net in &circuit.nets {
        let _ = writeln!(nets, "NetDegree : {} {}", net.pins.len(), net.name);
        for p in &net.pins {
            let _ = writeln!(nets, "\t{}\tB : {} {}", circuit.blocks[p.block].name, p.dx, p.dy);
        }
    }

    let mut scl = String::from("UCLA scl 1.0\n\n");
    let _ = writeln!(scl, "NumRows : {}", circuit.rows.len());
    for r in &circuit.rows {
        let _ = writeln!(scl, "CoreRow Horizontal");
        let _ = writeln!(scl, "  Coordinate : {}", r.y + circuit.origin.1);
        let _ = writeln!(scl, "  Height : {}", r.height);
        let _ = writeln!(scl, "  Sitewidth : {}", r.site_width);
        let _ = writeln!(scl, "  Sitespacing : {}", r.site_width);
        let _ = writeln!(scl, "  Siteorient : N\n  Sitesymmetry : Y");
        for s in &r.segments {
            let sites = ((s.1 - s.0) / r.site_width).round();
            let _ = writeln!(scl, "  SubrowOrigin : {} NumSites : {}", s.0 + circuit.origin.0, sites);
        }
        let _ = writeln!(scl, "End");
    }

    let aux = format!("RowBasedPlacement : {name}.nodes {name}.nets {name}.pl {name}.scl\n");
    write_file(&dir.join(format!("{name}.nodes")), &nodes)?;
    write_file(&dir.join(format!("{name}.nets")), &nets)?;
    write_file(&dir.join(format!("{name}.scl")), &scl)?;
    write_placement(circuit, placement, &dir.join(format!("{name}.pl")))?;
    let aux_path = dir.join(format!("{name}.aux"));
    write_file(&aux_path, &aux)?;
    Ok(aux_path)
}
