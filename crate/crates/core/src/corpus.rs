//! The bundled `.hier` corpus.

pub const FIG1: &str = include_str!("../../../corpus/fig1.hier");
pub const MODULE: &str = include_str!("../../../corpus/module.hier");
pub const CUBE: &str = include_str!("../../../corpus/cube.hier");
pub const ROOTONLY: &str = include_str!("../../../corpus/rootonly.hier");
pub const POINT: &str = include_str!("../../../corpus/point.hier");
pub const EMPTY: &str = include_str!("../../../corpus/empty.hier");

/// (file name, contents) for every corpus file.
pub const ALL: &[(&str, &str)] = &[
    ("fig1.hier", FIG1),
    ("module.hier", MODULE),
    ("cube.hier", CUBE),
    ("rootonly.hier", ROOTONLY),
    ("point.hier", POINT),
    ("empty.hier", EMPTY),
];
