use std::fs;
use std::path::{Path, PathBuf};

use neumann_place::netlist::{
    generate_synthetic, parse_bookshelf, read_placement, write_bookshelf, write_placement, Block, Circuit, Placement,
    Region,
};
use neumann_place::placer::insert_fillers;
use neumann_place::Error;
use proptest::prelude::*;

const NODES: &str = "UCLA nodes 1.0
# two cells and two pads

NumNodes : 4
NumTerminals : 2
a 2 2
b 2 2
t1 1 1 terminal
t2 1 1 terminal
";

const NETS: &str = "UCLA nets 1.0

NumNets : 2
NumPins : 5
NetDegree : 3 n0
  a B : 0.5 -0.5
  b B
  t1 B : 0 0
NetDegree : 2 n1
  b B : -1 1
  t2 B : 0.25 0.25
";

const PL: &str = "UCLA pl 1.0

a 102 51 : N
b 106 53 : N
t1 100 50 : N /FIXED
t2 109 53 : N /FIXED
";

const SCL: &str = "UCLA scl 1.0

NumRows : 2
CoreRow Horizontal
  Coordinate : 50
  Height : 2
  Sitewidth : 1
  Sitespacing : 1
  Siteorient : N
  Sitesymmetry : Y
  SubrowOrigin : 100 NumSites : 10
End
CoreRow Horizontal
  Coordinate : 52
  Height : 2
  Sitewidth : 1
  Sitespacing : 1
  Siteorient : N
  Sitesymmetry : Y
  SubrowOrigin : 100 NumSites : 10
End
";

fn write_fixture(dir: &Path, nets: &str) -> PathBuf {
    fs::write(dir.join("tiny.nodes"), NODES).unwrap();
    fs::write(dir.join("tiny.nets"), nets).unwrap();
    fs::write(dir.join("tiny.pl"), PL).unwrap();
    fs::write(dir.join("tiny.scl"), SCL).unwrap();
    let aux = dir.join("tiny.aux");
    fs::write(&aux, "RowBasedPlacement : tiny.nodes tiny.nets tiny.pl tiny.scl\n").unwrap();
    aux
}

fn assert_same(a: &Circuit, b: &Circuit, tol: f64) {
    assert_eq!(a.blocks.len(), b.blocks.len());
    for (x, y) in a.blocks.iter().zip(&b.blocks) {
        assert_eq!(x.name, y.name);
        assert_eq!((x.width, x.height, x.movable, x.non_image), (y.width, y.height, y.movable, y.non_image));
        assert!((x.x - y.x).abs() <= tol && (x.y - y.y).abs() <= tol, "{} moved", x.name);
    }
    assert_eq!(a.nets, b.nets);
    let close = |p: f64, q: f64| (p - q).abs() <= 1e-12 * (1.0 + p.abs());
    assert!(close(a.region.width, b.region.width) && close(a.region.height, b.region.height));
    assert_eq!(a.rows.len(), b.rows.len());
    for (r, s) in a.rows.iter().zip(&b.rows) {
        assert!(close(r.y, s.y) && close(r.height, s.height) && close(r.site_width, s.site_width));
        for (u, v) in r.segments.iter().zip(&s.segments) {
            assert!(close(u.0, v.0) && close(u.1, v.1));
        }
    }
}

#[test]
fn four_node_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let c = parse_bookshelf(&write_fixture(dir.path(), NETS)).unwrap();
    assert_eq!(c.blocks.len(), 4);
    assert_eq!(c.nets.len(), 2);
    assert_eq!(c.num_pins(), 5);
    assert_eq!(c.region, Region::new(10.0, 4.0));
    assert_eq!(c.origin, (100.0, 50.0));
    let a = &c.blocks[c.block_index("a").unwrap()];
    assert!(a.movable && (a.x, a.y) == (3.0, 2.0));
    let t1 = &c.blocks[c.block_index("t1").unwrap()];
    assert!(!t1.movable && (t1.x, t1.y) == (0.5, 0.5));
    let pins = &c.nets[0].pins;
    assert_eq!((pins[0].dx, pins[0].dy), (0.5, -0.5));
    assert_eq!((pins[1].dx, pins[1].dy), (0.0, 0.0));
}

#[test]
fn unknown_pin_node_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let nets = NETS.replace("t2 B : 0.25", "ghost B : 0.25");
    match parse_bookshelf(&write_fixture(dir.path(), &nets)) {
        Err(Error::UnknownNode { node, .. }) => assert_eq!(node, "ghost"),
        other => panic!("expected unknown-node error, got {other:?}"),
    }
}

#[test]
fn malformed_line_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let aux = write_fixture(dir.path(), NETS);
    fs::write(dir.path().join("tiny.nodes"), NODES.replace("b 2 2", "b 2 wide")).unwrap();
    match parse_bookshelf(&aux) {
        Err(Error::Parse { path, line, .. }) => {
            assert!(path.ends_with("tiny.nodes"));
            assert_eq!(line, 7);
        }
        other => panic!("expected parse error, got {other:?}"),
    }
}

#[test]
fn missing_file_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let aux = write_fixture(dir.path(), NETS);
    fs::remove_file(dir.path().join("tiny.scl")).unwrap();
    assert!(matches!(parse_bookshelf(&aux), Err(Error::Io { .. })));
}

#[test]
fn placement_round_trip_and_markers() {
    let dir = tempfile::tempdir().unwrap();
    let c = parse_bookshelf(&write_fixture(dir.path(), NETS)).unwrap();
    let mut p = c.initial_placement();
    p.x[0] = 4.123456789;
    p.y[1] = 1.000001;
    let out = dir.path().join("out.pl");
    write_placement(&c, &p, &out).unwrap();
    let q = read_placement(&c, &out).unwrap();
    for i in 0..p.len() {
        assert!((p.x[i] - q.x[i]).abs() < 1e-6 && (p.y[i] - q.y[i]).abs() < 1e-6);
    }
    let text = fs::read_to_string(&out).unwrap();
    let fixed: Vec<&str> = text.lines().filter(|l| l.ends_with("/FIXED")).collect();
    assert_eq!(fixed.len(), 2);
    assert!(fixed.iter().all(|l| l.starts_with('t')));
}

#[test]
fn fillers_are_not_written() {
    let dir = tempfile::tempdir().unwrap();
    let c = generate_synthetic(50, 60, Region::new(30.0, 30.0), 3).unwrap();
    let mut blocks = c.blocks.clone();
    blocks.extend(insert_fillers(&c, 1.0, 3));
    let n_fill = blocks.len() - c.blocks.len();
    assert!(n_fill > 0);
    let ext = Circuit::new("f", blocks, c.nets.clone(), c.region, c.target_density, c.rows.clone()).unwrap();
    let out = dir.path().join("f.pl");
    write_placement(&ext, &ext.initial_placement(), &out).unwrap();
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains(": N")).count(), 50);
    assert!(!text.contains("filler"));
}

#[test]
fn synthetic_examples() {
    let a = generate_synthetic(500, 600, Region::new(100.0, 100.0), 1).unwrap();
    let b = generate_synthetic(500, 600, Region::new(100.0, 100.0), 1).unwrap();
    assert_same(&a, &b, 0.0);
    let area: f64 = a.blocks.iter().map(Block::area).sum();
    assert!(area <= 7000.0, "area {area}");
    for net in &a.nets {
        assert!((2..=5).contains(&net.pins.len()));
    }
    let one = generate_synthetic(1, 1, Region::new(10.0, 10.0), 0).unwrap();
    assert_eq!((one.blocks.len(), one.nets.len()), (1, 1));
}

fn positions(c: &Circuit, seed: u64) -> Placement {
    // deterministic scramble inside the region
    let mut p = c.initial_placement();
    let (w, h) = (c.region.width, c.region.height);
    for i in 0..p.len() {
        let t = (i as f64 + 1.0) * (seed as f64 + 0.618);
        p.x[i] = (t * 0.7548776662).fract() * w;
        p.y[i] = (t * 0.5698402910).fract() * h;
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn write_parse_round_trip(n in 1usize..60, seed in 0u64..1000) {
        let dir = tempfile::tempdir().unwrap();
        let side = 4.0 * (n as f64).sqrt() + 4.0;
        let c = generate_synthetic(n, n + 3, Region::new(side, side), seed).unwrap();
        let p = positions(&c, seed);
        let aux = write_bookshelf(&c, &p, dir.path(), "rt").unwrap();
        let parsed = parse_bookshelf(&aux).unwrap();
        assert_same(&parsed, &c.with_placement(&p), 1e-6);

        let again = write_bookshelf(&parsed, &parsed.initial_placement(), &dir.path().join("b"), "rt").unwrap();
        let reparsed = parse_bookshelf(&again).unwrap();
        assert_same(&reparsed, &parsed, 0.0);
    }
}
