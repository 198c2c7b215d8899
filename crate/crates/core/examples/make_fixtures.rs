//! Regenerates the design fixtures under `fixtures/`.
//!
//! Parts are described by their intended global pose; every connection
//! tuple is then solved from those poses, so the files reproduce the
//! intended assemblies exactly.
//!
//!     cargo run -p flatpack-core --example make_fixtures -- fixtures

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use flatpack_core::design::{
    instantiate_component, parse_expression, save_design, Alignment, ComponentDecl, ComponentInstance,
    ComponentTemplate, ConnectionDecl, DesignModel, Expr, HingeDecl, IncludeDecl, ParamDef, Scalar, TemplateDef,
};
use flatpack_core::geom::Transform;
use flatpack_core::placement::{fit_connection, reverse_connection};
use nalgebra::{Matrix3, Vector3};

fn frame(origin: [f64; 3], u: [f64; 3], v: [f64; 3]) -> Transform {
    let u = Vector3::from(u).normalize();
    let v = Vector3::from(v).normalize();
    Transform::from_parts(Matrix3::from_columns(&[u, v, u.cross(&v)]), Vector3::from(origin)).expect("orthonormal frame")
}

const X: [f64; 3] = [1.0, 0.0, 0.0];
const Y: [f64; 3] = [0.0, 1.0, 0.0];
const Z: [f64; 3] = [0.0, 0.0, 1.0];

fn clean(v: f64) -> f64 {
    let r = (v * 1e6).round() / 1e6;
    let r = if (v - r).abs() < 1e-7 { r } else { v };
    if r == 0.0 { 0.0 } else { r }
}

fn num(v: f64) -> Scalar {
    Scalar(Expr::Num(clean(v)))
}

struct Part {
    id: String,
    template: ComponentTemplate,
    /// Bindings written to the file; constrained parameters are left out.
    declared: BTreeMap<String, f64>,
    inst: ComponentInstance,
    pose: Transform,
}

#[derive(Default)]
struct Builder {
    templates: Vec<TemplateDef>,
    parts: Vec<Part>,
}

impl Builder {
    fn template(&self, name: &str) -> ComponentTemplate {
        ComponentTemplate::builtin(name)
            .or_else(|| self.templates.iter().find(|t| t.name == name).map(|t| t.build().expect("valid template")))
            .unwrap_or_else(|| panic!("no template {name}"))
    }

    fn add(&mut self, id: &str, template: &str, values: &[(&str, f64)], free: &[&str], pose: Transform) {
        let t = self.template(template);
        let all: BTreeMap<String, f64> = values.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        let declared = all.iter().filter(|(k, _)| free.contains(&k.as_str())).map(|(k, v)| (k.clone(), *v)).collect();
        let mut inst = instantiate_component(id, &t, &all).expect("valid bindings");
        inst.placement = Some(pose);
        self.parts.push(Part { id: id.into(), template: t, declared, inst, pose });
    }

    fn part(&self, id: &str) -> &Part {
        self.parts.iter().find(|p| p.id == id).unwrap_or_else(|| panic!("no part {id}"))
    }

    fn connection(&self, a: &str, ia: &str, b: &str, ib: &str, al: Alignment) -> flatpack_core::design::Connection {
        let (pa, pb) = (self.part(a), self.part(b));
        let pose = pb.pose.inverse().compose(&pa.pose);
        fit_connection(&pa.inst, ia, &pb.inst, ib, al, &pose).expect("fit")
    }

    fn decl(&self, a: &str, ia: &str, b: &str, ib: &str, al: Alignment) -> ConnectionDecl {
        to_decl(&self.connection(a, ia, b, ib, al), None)
    }

    /// Like `decl` but with symbolic offsets that must evaluate to the
    /// solved ones.
    fn decl_expr(&self, a: &str, ia: &str, b: &str, ib: &str, al: Alignment, off: [&str; 3]) -> ConnectionDecl {
        let c = self.connection(a, ia, b, ib, al);
        let values = self.values();
        for k in 0..3 {
            let e = parse_expression(off[k]).expect("offset expression");
            let v = e.eval(&|n: &str| values.get(n).copied()).expect("offset evaluates");
            assert!((v - c.offset[k]).abs() < 1e-9, "{a}->{b} offset {k}: {} gives {v}, solved {}", off[k], c.offset[k]);
        }
        to_decl(&c, Some(off))
    }

    fn values(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        for p in &self.parts {
            for (k, v) in &p.inst.bindings {
                m.insert(format!("{}.{k}", p.id), *v);
            }
        }
        m
    }

    fn components(&self, ids: &[&str]) -> Vec<ComponentDecl> {
        ids.iter()
            .map(|id| {
                let p = self.part(id);
                ComponentDecl { id: p.id.clone(), template: p.template.name.clone(), bindings: p.declared.clone() }
            })
            .collect()
    }

    fn all_ids(&self) -> Vec<&str> {
        self.parts.iter().map(|p| p.id.as_str()).collect()
    }
}

fn to_decl(c: &flatpack_core::design::Connection, off: Option<[&str; 3]>) -> ConnectionDecl {
    let offset = match off {
        Some(o) => o.map(|s| {
            let e = parse_expression(s).expect("offset expression");
            match e.as_constant() {
                Some(v) => num(v),
                None => Scalar(e),
            }
        }),
        None => c.offset.map(num),
    };
    ConnectionDecl {
        connecting: [c.connecting.0.clone(), c.connecting.1.clone()],
        connected: [c.connected.0.clone(), c.connected.1.clone()],
        alignment: c.alignment,
        offset,
        rotation: c.rotation.map(num),
    }
}

fn model(components: Vec<ComponentDecl>, connections: Vec<ConnectionDecl>) -> DesignModel {
    DesignModel { components, connections, ..DesignModel::default() }
}

fn write(dir: &Path, name: &str, m: &DesignModel) {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).expect("create fixture dir");
    }
    std::fs::write(&path, save_design(m)).expect("write fixture");
    println!("wrote {}", path.display());
}

fn side_template() -> TemplateDef {
    let s = |t: &str| Scalar(parse_expression(t).expect("vertex expression"));
    TemplateDef {
        name: "wedge_side".into(),
        params: ["b", "t", "h"].iter().map(|n| ParamDef { name: n.to_string(), min: 1.0, max: 5000.0 }).collect(),
        vertices: vec![[s("0"), s("0")], [s("b"), s("0")], [s("b"), s("h")], [s("b - t"), s("h")]],
        interfaces: [("b", 0), ("r", 1), ("t", 2), ("f", 3)].iter().map(|(k, v)| (k.to_string(), *v)).collect(),
    }
}

fn desk() -> Builder {
    let mut b = Builder { templates: vec![side_template()], ..Builder::default() };
    let rect = |l: f64, w: f64| [("l", l), ("w", w)];
    let free = &["l", "w", "b", "t", "h", "cx", "cy", "cl", "cw"];
    b.add("p01", "rectangle", &rect(800.0, 400.0), free, frame([0.0, 0.0, 700.0], X, Y));
    b.add("p02", "rectangle", &rect(360.0, 700.0), free, frame([50.0, 20.0, 0.0], Y, Z));
    b.add("p03", "rectangle", &rect(360.0, 700.0), free, frame([750.0, 20.0, 0.0], Y, Z));
    b.add("p04", "rectangle", &rect(600.0, 140.0), free, frame([100.0, 240.0, 700.0], X, Y));
    b.add("p05", "rectangle", &rect(700.0, 100.0), free, frame([50.0, 200.0, 100.0], X, Z));
    let side = [("b", 140.0), ("t", 60.0), ("h", 400.0)];
    b.add("p06", "wedge_side", &side, free, frame([100.0, 240.0, 700.0], Y, Z));
    b.add("p07", "wedge_side", &side, free, frame([700.0, 240.0, 700.0], Y, Z));
    let back = [("l", 600.0), ("w", 350.0), ("cx", 150.0), ("cy", 50.0), ("cl", 300.0), ("cw", 100.0)];
    b.add("p08", "annular_rectangle", &back, free, frame([100.0, 380.0, 750.0], X, Z));
    b.add("p09", "rectangle", &rect(600.0, 90.0), free, frame([100.0, 290.0, 850.0], X, Y));
    b.add("p10", "rectangle", &rect(600.0, 65.0), free, frame([100.0, 315.0, 1000.0], X, Y));
    b.add("p11", "rectangle", &rect(50.0, 150.0), free, frame([400.0, 320.0, 850.0], Y, Z));
    b
}

type Spec<'a> = (&'a str, &'a str, &'a str, &'a str, Alignment);

const FF: Alignment = Alignment::FrontFront;
const FB: Alignment = Alignment::FrontBack;

const DESK_TABLE: [Spec; 4] = [
    ("p02", "t", "p01", "l", FF),
    ("p03", "t", "p01", "r", FB),
    ("p04", "b", "p01", "t", FF),
    ("p05", "l", "p02", "b", FF),
];
const DESK_SIDES_TO_BASE: [Spec; 2] = [("p06", "b", "p04", "l", FF), ("p07", "b", "p04", "r", FB)];
const DESK_SHELF: [Spec; 4] = [
    ("p08", "l", "p06", "r", FF),
    ("p09", "t", "p08", "b", FB),
    ("p10", "l", "p06", "t", FF),
    ("p11", "b", "p09", "b", FF),
];

fn decls(b: &Builder, specs: &[Spec]) -> Vec<ConnectionDecl> {
    specs.iter().map(|&(a, ia, c, ic, al)| b.decl(a, ia, c, ic, al)).collect()
}

fn write_desks(dir: &Path) {
    let b = desk();
    let ids = b.all_ids();
    let original: Vec<Spec> = [&DESK_TABLE[..2], &DESK_TABLE[2..3], &DESK_SIDES_TO_BASE[..], &DESK_SHELF[..], &DESK_TABLE[3..]].concat();
    let mut m = model(b.components(&ids), decls(&b, &original));
    m.templates = b.templates.clone();
    write(dir, "reading_desk.yaml", &m);

    // Every connection stated from the other side.
    let mut flipped = m.clone();
    flipped.connections = original
        .iter()
        .map(|&(a, ia, c, ic, al)| {
            let conn = b.connection(a, ia, c, ic, al);
            let rev = reverse_connection(&conn, &b.part(a).inst, &b.part(c).inst).expect("reverse");
            to_decl(&rev, None)
        })
        .collect();
    write(dir, "reading_desk_flipped.yaml", &flipped);

    // Components listed backwards and a different spanning tree.
    let alt: [Spec; 10] = [
        ("p11", "t", "p10", "b", FF),
        ("p09", "l", "p06", "f", FB),
        ("p10", "t", "p08", "t", FF),
        ("p06", "r", "p08", "l", FF),
        ("p08", "r", "p07", "r", FB),
        ("p07", "b", "p04", "r", FF),
        ("p04", "b", "p01", "t", FB),
        ("p05", "l", "p02", "b", FF),
        ("p03", "b", "p05", "r", FF),
        ("p02", "t", "p01", "l", FF),
    ];
    let rev_ids: Vec<&str> = ids.iter().rev().copied().collect();
    let mut reordered = model(b.components(&rev_ids), decls(&b, &alt));
    reordered.templates = b.templates.clone();
    write(dir, "reading_desk_reordered.yaml", &reordered);

    // Two sub-models: table and shelf unit.
    let table_ids = ["p01", "p02", "p03", "p04", "p05"];
    let mut table = model(b.components(&table_ids), decls(&b, &DESK_TABLE));
    table.exports = [("base_l", ["p04", "l"]), ("base_r", ["p04", "r"])]
        .iter()
        .map(|(k, v)| (k.to_string(), v.map(String::from)))
        .collect();
    write(dir, "desk_parts/table.yaml", &table);

    let shelf_ids = ["p06", "p07", "p08", "p09", "p10", "p11"];
    let mut shelf_specs = DESK_SHELF.to_vec();
    shelf_specs.push(("p07", "r", "p08", "r", FF));
    let mut shelf = model(b.components(&shelf_ids), decls(&b, &shelf_specs));
    shelf.templates = b.templates.clone();
    shelf.exports = [("side_l", ["p06", "b"]), ("side_r", ["p07", "b"])]
        .iter()
        .map(|(k, v)| (k.to_string(), v.map(String::from)))
        .collect();
    write(dir, "desk_parts/shelf.yaml", &shelf);

    let cross = |x: &mut ConnectionDecl, a: [&str; 2], c: [&str; 2]| {
        x.connecting = a.map(String::from);
        x.connected = c.map(String::from);
    };
    let include = |alias: &str, file: &str| IncludeDecl { alias: alias.into(), file: Some(file.into()), model: None };
    let mut top = decls(&b, &DESK_SIDES_TO_BASE);
    cross(&mut top[0], ["shelf", "side_l"], ["table", "base_l"]);
    cross(&mut top[1], ["shelf", "side_r"], ["table", "base_r"]);
    let two = DesignModel {
        includes: vec![include("table", "desk_parts/table.yaml"), include("shelf", "desk_parts/shelf.yaml")],
        connections: top,
        ..DesignModel::default()
    };
    write(dir, "reading_desk_two_models.yaml", &two);

    // Three sub-models: table, frame (sides and back), shelves.
    let frame_ids = ["p06", "p07", "p08"];
    let mut frame_m = model(
        b.components(&frame_ids),
        decls(&b, &[("p08", "l", "p06", "r", FF), ("p07", "r", "p08", "r", FF)]),
    );
    frame_m.templates = b.templates.clone();
    frame_m.exports = [
        ("side_l", ["p06", "b"]),
        ("side_r", ["p07", "b"]),
        ("back_b", ["p08", "b"]),
        ("side_top", ["p06", "t"]),
    ]
    .iter()
    .map(|(k, v)| (k.to_string(), v.map(String::from)))
    .collect();
    write(dir, "desk_parts/frame.yaml", &frame_m);

    let shelves_ids = ["p09", "p10", "p11"];
    let mut shelves = model(
        b.components(&shelves_ids),
        decls(&b, &[("p11", "b", "p09", "b", FF), ("p10", "b", "p11", "t", FB)]),
    );
    shelves.exports = [("lower", ["p09", "t"]), ("upper", ["p10", "l"])]
        .iter()
        .map(|(k, v)| (k.to_string(), v.map(String::from)))
        .collect();
    write(dir, "desk_parts/shelves.yaml", &shelves);

    let mut top = decls(
        &b,
        &[DESK_SIDES_TO_BASE[0], DESK_SIDES_TO_BASE[1], ("p09", "t", "p08", "b", FB), ("p10", "l", "p06", "t", FF)],
    );
    cross(&mut top[0], ["frame", "side_l"], ["table", "base_l"]);
    cross(&mut top[1], ["frame", "side_r"], ["table", "base_r"]);
    cross(&mut top[2], ["shelves", "lower"], ["frame", "back_b"]);
    cross(&mut top[3], ["shelves", "upper"], ["frame", "side_top"]);
    let three = DesignModel {
        includes: vec![
            include("table", "desk_parts/table.yaml"),
            include("frame", "desk_parts/frame.yaml"),
            include("shelves", "desk_parts/shelves.yaml"),
        ],
        connections: top,
        ..DesignModel::default()
    };
    write(dir, "reading_desk_three_models.yaml", &three);
}

/// Seven window frames standing tangent to a circle; every pair crosses
/// through both rails.
fn write_stool(dir: &Path) {
    let mut b = Builder::default();
    let (r, l, h) = (50.0, 520.0, 400.0);
    let board = [("l", l), ("w", h), ("cx", 20.0), ("cy", 60.0), ("cl", 480.0), ("cw", 280.0)];
    let ids: Vec<String> = (1..=7).map(|k| format!("board{k}")).collect();
    for (k, id) in ids.iter().enumerate() {
        let th = 2.0 * PI * k as f64 / 7.0;
        let d = [-th.sin(), th.cos(), 0.0];
        let origin = [r * th.cos() - l / 2.0 * d[0], r * th.sin() - l / 2.0 * d[1], 0.0];
        b.add(id, "annular_rectangle", &board, &["l", "w", "cx", "cy", "cl", "cw"], frame(origin, d, Z));
    }
    let conns = (1..7).map(|k| b.decl(&ids[k], "b", &ids[0], "b", FF)).collect();
    write(dir, "stool.yaml", &model(b.components(&b.all_ids()), conns));
}

fn constraints(pairs: &[(&str, &str)]) -> BTreeMap<String, Scalar> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), Scalar(parse_expression(v).expect("constraint expression"))))
        .collect()
}

fn write_simple_table(dir: &Path) {
    let (len, wid, ll, h) = (1000.0, 600.0, 80.0, 720.0);
    let side = wid - 40.0 - 2.0 * ll;
    let mut b = Builder::default();
    let free: &[&str] = &["l", "w"];
    let none: &[&str] = &[];
    let rect = |l: f64, w: f64| [("l", l), ("w", w)];
    b.add("top", "rectangle", &rect(len, wid), free, frame([0.0, 0.0, h], X, Y));
    b.add("leg1", "rectangle", &rect(ll, h), free, frame([20.0, 20.0, 0.0], Y, Z));
    b.add("leg2", "rectangle", &rect(ll, h), none, frame([20.0, wid - 20.0 - ll, 0.0], Y, Z));
    b.add("leg3", "rectangle", &rect(ll, h), none, frame([len - 20.0, 20.0, 0.0], Y, Z));
    b.add("leg4", "rectangle", &rect(ll, h), none, frame([len - 20.0, wid - 20.0 - ll, 0.0], Y, Z));
    b.add("apron1", "rectangle", &rect(side, 60.0), none, frame([20.0, 20.0 + ll, h - 60.0], Y, Z));
    b.add("apron2", "rectangle", &rect(side, 60.0), none, frame([len - 20.0, 20.0 + ll, h - 60.0], Y, Z));
    b.add("brace1", "rectangle", &rect(side, 60.0), none, frame([20.0, 20.0 + ll, 100.0], Y, Z));
    b.add("brace2", "rectangle", &rect(side, 60.0), none, frame([len - 20.0, 20.0 + ll, 100.0], Y, Z));
    b.add("apron3", "rectangle", &rect(len - 40.0, 60.0), none, frame([20.0, 40.0, h - 80.0], X, Z));
    b.add("apron4", "rectangle", &rect(len - 40.0, 60.0), none, frame([20.0, wid - 40.0, h - 80.0], X, Z));
    let conns = vec![
        b.decl_expr("leg1", "t", "top", "l", FF, ["20", "20 + leg1.l / 2 - top.w / 2", "0"]),
        b.decl_expr("leg2", "t", "top", "l", FF, ["20", "top.w / 2 - 20 - leg1.l / 2", "0"]),
        b.decl_expr("leg3", "t", "top", "r", FF, ["-20", "20 + leg1.l / 2 - top.w / 2", "0"]),
        b.decl_expr("leg4", "t", "top", "r", FF, ["-20", "top.w / 2 - 20 - leg1.l / 2", "0"]),
        b.decl_expr("apron1", "l", "leg1", "r", FF, ["0", "leg1.w / 2 - 30", "0"]),
        b.decl_expr("brace1", "l", "leg1", "r", FF, ["0", "130 - leg1.w / 2", "0"]),
        b.decl_expr("apron2", "l", "leg3", "r", FF, ["0", "leg1.w / 2 - 30", "0"]),
        b.decl_expr("brace2", "l", "leg3", "r", FF, ["0", "130 - leg1.w / 2", "0"]),
        b.decl_expr("apron3", "l", "leg1", "b", FF, ["20 - leg1.l / 2", "leg1.w - 50", "0"]),
        b.decl_expr("apron4", "l", "leg2", "b", FF, ["leg1.l / 2 - 20", "leg1.w - 50", "0"]),
    ];
    let mut m = model(b.components(&b.all_ids()), conns);
    m.constraints = constraints(&[
        ("leg2.l", "leg1.l"),
        ("leg2.w", "leg1.w"),
        ("leg3.l", "leg1.l"),
        ("leg3.w", "leg1.w"),
        ("leg4.l", "leg1.l"),
        ("leg4.w", "leg1.w"),
        ("apron1.l", "top.w - 40 - 2 * leg1.l"),
        ("apron1.w", "60"),
        ("apron2.l", "apron1.l"),
        ("apron2.w", "apron1.w"),
        ("brace1.l", "apron1.l"),
        ("brace1.w", "60"),
        ("brace2.l", "apron1.l"),
        ("brace2.w", "brace1.w"),
        ("apron3.l", "top.l - 40"),
        ("apron3.w", "60"),
        ("apron4.l", "apron3.l"),
        ("apron4.w", "apron3.w"),
    ]);
    write(dir, "simple_table.yaml", &m);
}

fn rocker_template() -> TemplateDef {
    let s = |t: &str| Scalar(parse_expression(t).expect("vertex expression"));
    let v = |x: &str, y: &str| [s(x), s(y)];
    TemplateDef {
        name: "rocker".into(),
        params: vec![
            ParamDef { name: "len".into(), min: 300.0, max: 2000.0 },
            ParamDef { name: "h".into(), min: 200.0, max: 2000.0 },
            ParamDef { name: "sh".into(), min: 100.0, max: 1000.0 },
            ParamDef { name: "sag".into(), min: 0.0, max: 200.0 },
        ],
        vertices: vec![
            v("0", "sag"),
            v("0.25 * len", "0.25 * sag"),
            v("0.5 * len", "0"),
            v("0.75 * len", "0.25 * sag"),
            v("len", "sag"),
            v("len", "h"),
            v("len - 60", "h"),
            v("len - 60", "sh"),
            v("0", "sh"),
        ],
        interfaces: [("b", 1), ("k", 4), ("p", 6), ("s", 7), ("f", 8)]
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect(),
    }
}

fn write_rocker_chair(dir: &Path) {
    let (len, h, sh, sag) = (700.0, 900.0, 380.0, 60.0);
    let (w, d, bw, aw) = (450.0, 380.0, 450.0, 80.0);
    let mut b = Builder { templates: vec![rocker_template()], ..Builder::default() };
    let rk = [("len", len), ("h", h), ("sh", sh), ("sag", sag)];
    let all: &[&str] = &["len", "h", "sh", "sag"];
    b.add("rocker_l", "rocker", &rk, all, frame([0.0, 0.0, 0.0], Y, Z));
    b.add("rocker_r", "rocker", &rk, &[], frame([w, 0.0, 0.0], Y, Z));
    b.add("seat", "rectangle", &[("l", w), ("w", d)], &["l", "w"], frame([0.0, len - 60.0 - d, sh], X, Y));
    b.add("back", "rectangle", &[("l", w), ("w", bw)], &["w"], frame([0.0, len - 60.0, sh + 20.0], X, Z));
    b.add("apron", "rectangle", &[("l", w), ("w", aw)], &["w"], frame([0.0, len - 20.0 - d, sh - 10.0 - aw], X, Z));
    let conns = vec![
        b.decl_expr("seat", "l", "rocker_l", "s", FF, ["rocker_l.len / 2 - 30 - seat.w / 2", "0", "0"]),
        b.decl_expr("rocker_r", "s", "seat", "r", FF, ["0", "seat.w / 2 - rocker_l.len / 2 + 30", "0"]),
        b.decl_expr(
            "back",
            "l",
            "rocker_l",
            "p",
            FF,
            ["0", "rocker_l.sh / 2 + 20 + back.w / 2 - rocker_l.h / 2", "0"],
        ),
        b.decl_expr(
            "apron",
            "l",
            "rocker_l",
            "f",
            FF,
            ["rocker_l.len - 20 - seat.w", "rocker_l.sh / 2 - 10 - apron.w / 2 - rocker_l.sag / 2", "0"],
        ),
    ];
    let mut m = model(b.components(&b.all_ids()), conns);
    m.templates = b.templates.clone();
    m.constraints = constraints(&[
        ("rocker_r.len", "rocker_l.len"),
        ("rocker_r.h", "rocker_l.h"),
        ("rocker_r.sh", "rocker_l.sh"),
        ("rocker_r.sag", "rocker_l.sag"),
        ("back.l", "seat.l"),
        ("apron.l", "seat.l"),
    ]);
    m.hinges = vec![HingeDecl { part: "back".into(), region: [75.0, 100.0, 375.0, 300.0], rows: 4, cols: 6 }];
    write(dir, "rocker_chair.yaml", &m);
}

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    write_desks(&dir);
    write_stool(&dir);
    write_simple_table(&dir);
    write_rocker_chair(&dir);
}
