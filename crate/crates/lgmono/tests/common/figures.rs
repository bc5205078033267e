use lgmono::catalog::CatalogEntry;

/// Arrows transcribed from the drawn quivers: (source, target, label).
/// The table is kept exactly as drawn; known misprints are corrected in `figure_edges`.
#[rustfmt::skip]
pub const FIGURES: &[(&str, &[(&str, &str, &str)])] = &[
    (
        "p2",
        &[
            ("E0", "E1", "n3"), ("E0", "E1", "n1"), ("E0", "E1", "n2"), ("E1", "E2", "n2"),
            ("E1", "E2", "n1"), ("E1", "E2", "n3"),
        ],
    ),
    (
        "p1xp1",
        &[
            ("E00", "E10", "n2"), ("E00", "E10", "n4"), ("E00", "E01", "n3"), ("E00", "E01", "n1"),
            ("E10", "E11", "n3"), ("E10", "E11", "n1"), ("E01", "E11", "n2"), ("E01", "E11", "n4"),
        ],
    ),
    (
        "bl1_p2",
        &[
            ("E0", "E1", "n1"), ("E0", "E1", "n2+n3"), ("E0", "E1", "n3+n4"), ("E0", "F1", "n4"),
            ("E0", "F1", "n2"), ("F1", "E1", "n3"), ("F1", "E2", "n1"), ("F1", "E2", "n2+n3"),
            ("F1", "E2", "n3+n4"), ("E1", "E2", "n4"), ("E1", "E2", "n2"),
        ],
    ),
    (
        "bl2_p2",
        &[
            ("E0", "E1", "n2+n4+n5"), ("E0", "E1", "n2+n3"), ("E0", "E1", "n1+n5"), ("E0", "F1", "n4+n5"),
            ("E0", "F1", "n2"), ("E0", "F2", "n1"), ("E0", "F2", "n3+n4"), ("E1", "E2", "n4"),
            ("F1", "E1", "n3"), ("F1", "E2", "n3+n4"), ("F1", "E2", "n1"), ("F2", "E1", "n5"),
            ("F2", "E2", "n4+n5"), ("F2", "E2", "n2"),
        ],
    ),
    (
        "bl3_p2",
        &[
            ("E0", "F3", "n3+n4"), ("E0", "F3", "n1+n6"), ("E0", "F1", "n5+n6"), ("E0", "F1", "n2+n3"),
            ("E0", "F2", "n4+n5"), ("E0", "F2", "n1+n2"), ("F3", "E1", "n2"), ("F3", "E2", "n5"),
            ("F1", "E1", "n4"), ("F1", "E2", "n1"), ("F2", "E1", "n6"), ("F2", "E2", "n3"),
        ],
    ),
    (
        "p2bundle_k0",
        &[
            ("E00", "E10", "n2"), ("E00", "E10", "n1"), ("E00", "E10", "n4"), ("E00", "E01", "n5"),
            ("E00", "E01", "n3"), ("E01", "E11", "n4"), ("E01", "E11", "n1"), ("E01", "E11", "n2"),
            ("E10", "E11", "n5"), ("E10", "E11", "n3"), ("E10", "E20", "n4"), ("E10", "E20", "n1"),
            ("E10", "E20", "n2"), ("E11", "E21", "n4"), ("E11", "E21", "n1"), ("E11", "E21", "n2"),
            ("E20", "E21", "n5"), ("E20", "E21", "n3"),
        ],
    ),
    (
        "p2bundle_k1",
        &[
            ("E00", "E10", "n4"), ("E00", "E10", "n1"), ("E00", "E10", "n2"), ("E00", "E01", "n5"),
            ("E01", "E11", "n4"), ("E01", "E11", "n1"), ("E01", "E11", "n2"), ("E10", "E01", "n3"),
            ("E10", "E11", "n5"), ("E10", "E20", "n4"), ("E10", "E20", "n1"), ("E10", "E20", "n2"),
            ("E11", "E21", "n4"), ("E11", "E21", "n1"), ("E11", "E21", "n2"), ("E20", "E11", "n3"),
            ("E20", "E21", "n5"),
        ],
    ),
    (
        "p2bundle_k2",
        &[
            ("E00", "E10", "n4"), ("E00", "E10", "n1"), ("E00", "E10", "n2"), ("E00", "E01", "n5"),
            ("E01", "E11", "n4"), ("E01", "E11", "n1"), ("E01", "E11", "n2"), ("E10", "E11", "n5"),
            ("E10", "E20", "n4"), ("E10", "E20", "n1"), ("E10", "E20", "n2"), ("E11", "E21", "n4"),
            ("E11", "E21", "n1"), ("E11", "E21", "n2"), ("E20", "E01", "n3"), ("E20", "E21", "n5"),
        ],
    ),
    (
        "p1bundle_k1",
        &[
            ("E00", "E01", "n1"), ("E00", "E01", "n2"), ("E00", "E10", "n3"), ("E00", "E10", "n5"),
            ("E10", "E11", "n1"), ("E10", "E11", "n2"), ("E10", "E01", "n4"), ("E01", "E02", "n1"),
            ("E01", "E02", "n2"), ("E01", "E11", "n3"), ("E01", "E11", "n5"), ("E11", "E12", "n1"),
            ("E11", "E12", "n2"), ("E11", "E02", "n4"), ("E02", "E12", "n5"), ("E02", "E12", "n3"),
        ],
    ),
    (
        "p1xp1bundle_00",
        &[
            ("E000", "E010", "n5"), ("E000", "E010", "n3"), ("E000", "E100", "n2"), ("E000", "E100", "n4"),
            ("E000", "E001", "n1"), ("E000", "E001", "n6"), ("E010", "E110", "n2"), ("E010", "E110", "n4"),
            ("E010", "E011", "n6"), ("E010", "E011", "n1"), ("E100", "E110", "n5"), ("E100", "E110", "n3"),
            ("E100", "E101", "n1"), ("E100", "E101", "n6"), ("E110", "E111", "n1"), ("E110", "E111", "n6"),
            ("E001", "E011", "n5"), ("E001", "E011", "n3"), ("E001", "E101", "n4"), ("E001", "E101", "n2"),
            ("E101", "E111", "n3"), ("E101", "E111", "n5"), ("E011", "E111", "n4"), ("E011", "E111", "n2"),
        ],
    ),
    (
        "p1xp1bundle_11",
        &[
            ("E000", "E010", "n3"), ("E000", "E010", "n5"), ("E000", "E100", "n2"), ("E000", "E100", "n4"),
            ("E000", "E001", "n1"), ("E000", "E111", "n6"), ("E010", "E110", "n2"), ("E010", "E110", "n4"),
            ("E010", "E011", "n1"), ("E100", "E110", "n5"), ("E100", "E110", "n3"), ("E100", "E101", "n1"),
            ("E110", "E111", "n1"), ("E001", "E011", "n3"), ("E001", "E011", "n5"), ("E001", "E101", "n2"),
            ("E001", "E101", "n4"), ("E101", "E111", "n3"), ("E101", "E111", "n5"), ("E011", "E111", "n2"),
            ("E011", "E111", "n4"),
        ],
    ),
    (
        "p1xp1bundle_1m1",
        &[
            ("E000", "E010", "n3"), ("E000", "E010", "n5"), ("E000", "E100", "n2"), ("E000", "E100", "n4"),
            ("E000", "E001", "n1"), ("E010", "E110", "n2"), ("E010", "E110", "n4"), ("E010", "E011", "n1"),
            ("E010", "E101", "n6"), ("E100", "E110", "n5"), ("E100", "E110", "n3"), ("E100", "E101", "n1"),
            ("E110", "E111", "n1"), ("E001", "E011", "n3"), ("E001", "E011", "n5"), ("E001", "E101", "n2"),
            ("E001", "E101", "n4"), ("E101", "E111", "n3"), ("E101", "E111", "n5"), ("E011", "E111", "n2"),
            ("E011", "E111", "n4"),
        ],
    ),
];

pub fn figure_edges(id: &str, drawn: &[(&str, &str, &str)]) -> Vec<(String, String, String)> {
    let rename = |v: &str| -> String {
        match (id, v) {
            // drawn with transposed indices
            ("p1xp1", "E10") => "E01".into(),
            ("p1xp1", "E01") => "E10".into(),
            _ => v.into(),
        }
    };
    let mut out: Vec<_> = drawn
        .iter()
        .map(|&(s, t, l)| {
            let l = if id == "bl2_p2" && l == "n2+n4+n5" {
                "n3+n4+n5"
            } else {
                l
            };
            (rename(s), rename(t), l.to_string())
        })
        .collect();
    out.sort();
    out
}

pub fn built_edges(entry: &CatalogEntry) -> Vec<(String, String, String)> {
    let q = entry.quiver();
    let mut out: Vec<_> = q
        .edges
        .iter()
        .map(|e| {
            (
                q.vertices[e.source].clone(),
                q.vertices[e.target].clone(),
                entry.format_divisor(&e.label),
            )
        })
        .collect();
    out.sort();
    out
}
