use std::collections::BTreeSet;

use lgmono::catalog::{self, Catalog};
use lgmono::toric::{
    divisor_class, divisor_polytope_points, effective_basis, euler_characteristic, facets,
    is_reflexive_fano, is_special_collection, picard, polar_vertices, FanoPolytope, FanoViolation,
    LineBundleClass, ToricDivisor, ToricError,
};

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn box_points(dim: usize, r: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p: Vec<i64>| (-r..=r).map(move |x| [p.clone(), vec![x]].concat()))
            .collect();
    }
    out
}

fn rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x as f64).collect())
        .collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| m[i][c].abs() > 1e-9) else {
            continue;
        };
        m.swap(r, p);
        for i in 0..m.len() {
            if i != r {
                let f = m[i][c] / m[r][c];
                for k in 0..cols {
                    m[i][k] -= f * m[r][k];
                }
            }
        }
        r += 1;
    }
    r
}

/// Facet normals of a reflexive polytope found by scanning the dual lattice:
/// `m` is a facet normal when all vertices satisfy `<m, v> >= -1` and the
/// vertices on the hyperplane span it.
fn scanned_facet_normals(vertices: &[Vec<i64>], dim: usize) -> BTreeSet<Vec<i64>> {
    box_points(dim, 4)
        .into_iter()
        .filter(|m| {
            vertices.iter().all(|v| dot(m, v) >= -1) && {
                let on: Vec<Vec<i64>> = vertices
                    .iter()
                    .filter(|v| dot(m, v) == -1)
                    .cloned()
                    .collect();
                rank(&on) == dim
            }
        })
        .collect()
}

fn scanned_section_points(rays: &[Vec<i64>], dim: usize, a: &[i64]) -> BTreeSet<Vec<i64>> {
    box_points(dim, 6)
        .into_iter()
        .filter(|m| rays.iter().zip(a).all(|(n, &ai)| dot(m, n) >= -ai))
        .collect()
}

fn poly(v: &[&[i64]]) -> FanoPolytope {
    FanoPolytope::new(v.iter().map(|x| x.to_vec()).collect()).unwrap()
}

#[test]
fn facets_agree_with_lattice_scan() {
    for entry in Catalog::builtin().entries() {
        let p = &entry.polytope;
        let fs = facets(p).unwrap();
        let got: BTreeSet<Vec<i64>> = fs.iter().map(|f| f.inner_normal.clone()).collect();
        assert_eq!(
            got,
            scanned_facet_normals(p.vertices(), p.dim()),
            "{}",
            entry.id
        );
        for f in &fs {
            for (i, v) in p.vertices().iter().enumerate() {
                let level = dot(&f.inner_normal, v);
                assert!(level >= -1);
                assert_eq!(level == -1, f.vertex_indices.contains(&i), "{}", entry.id);
            }
        }
    }
}

#[test]
fn small_facet_examples() {
    let p2 = poly(&[&[1, 0], &[0, 1], &[-1, -1]]);
    assert_eq!(facets(&p2).unwrap().len(), 3);
    let p1p1 = poly(&[&[1, 0], &[0, 1], &[-1, 0], &[0, -1]]);
    let fs = facets(&p1p1).unwrap();
    assert_eq!(fs.len(), 4);
    assert!(fs.iter().all(|f| f.vertex_indices.len() == 2));
    let bundle = catalog::get("p2bundle_k1").unwrap();
    assert_eq!(facets(&bundle.polytope).unwrap().len(), 6);
}

#[test]
fn polar_involution() {
    for entry in Catalog::builtin().entries() {
        let p = &entry.polytope;
        let dual = polar_vertices(p).unwrap();
        assert_eq!(dual.len(), facets(p).unwrap().len());
        let back = polar_vertices(&FanoPolytope::new(dual).unwrap()).unwrap();
        let a: BTreeSet<_> = back.into_iter().collect();
        let b: BTreeSet<_> = p.vertices().iter().cloned().collect();
        assert_eq!(a, b, "{}", entry.id);
    }
}

#[test]
fn fano_checks() {
    for entry in Catalog::builtin().entries() {
        assert!(is_reflexive_fano(&entry.polytope).is_fano, "{}", entry.id);
    }
    let square = poly(&[&[1, 1], &[-1, 1], &[-1, -1], &[1, -1]]);
    let check = is_reflexive_fano(&square);
    assert!(!check.is_fano);
    assert!(
        matches!(check.violation, Some(FanoViolation::NonUnimodularFacet { det, .. }) if det.abs() == 2)
    );
    let flat = FanoPolytope::new(vec![vec![1, 0], vec![-1, 0]]).unwrap();
    assert!(!is_reflexive_fano(&flat).is_fano);
}

#[test]
fn polytope_validation() {
    assert!(FanoPolytope::new(vec![vec![2, 0], vec![0, 1], vec![-1, -1]]).is_err());
    assert!(FanoPolytope::new(vec![vec![1, 0], vec![1, 0], vec![-1, -1]]).is_err());
    assert!(FanoPolytope::new(vec![vec![1, 0], vec![0, 1, 0]]).is_err());
    let lopsided = poly(&[&[1, 0], &[0, 1], &[1, 1]]);
    assert_eq!(picard(&lopsided), Err(ToricError::OriginNotInterior));
}

#[test]
fn euler_characteristics() {
    let expected = [
        ("p2", 3),
        ("p1xp1", 4),
        ("bl1_p2", 4),
        ("bl2_p2", 5),
        ("bl3_p2", 6),
        ("p2bundle_k0", 6),
        ("p2bundle_k1", 6),
        ("p2bundle_k2", 6),
        ("p1bundle_k0", 6),
        ("p1bundle_k1", 6),
        ("p1xp1bundle_00", 8),
        ("p1xp1bundle_11", 8),
        ("p1xp1bundle_1m1", 8),
    ];
    for (id, chi) in expected {
        assert_eq!(
            euler_characteristic(&catalog::get(id).unwrap().polytope).unwrap(),
            chi,
            "{id}"
        );
    }
}

#[test]
fn picard_ranks() {
    let expected = [
        ("p2", 1),
        ("p1xp1", 2),
        ("bl1_p2", 2),
        ("bl2_p2", 3),
        ("bl3_p2", 4),
        ("p2bundle_k0", 2),
        ("p2bundle_k1", 2),
        ("p2bundle_k2", 2),
        ("p1bundle_k0", 2),
        ("p1bundle_k1", 2),
        ("p1xp1bundle_00", 3),
        ("p1xp1bundle_11", 3),
        ("p1xp1bundle_1m1", 3),
    ];
    for (id, r) in expected {
        let e = catalog::get(id).unwrap();
        let pic = e.picard();
        assert_eq!(pic.rank(), r, "{id}");
        assert_eq!(pic.rank(), e.rays().len() - e.dim());
    }
}

#[test]
fn principal_divisors_have_zero_class() {
    for entry in Catalog::builtin().entries() {
        let pic = entry.picard();
        let zero = divisor_class(&pic, &ToricDivisor::zero(pic.num_rays())).unwrap();
        for m in box_points(entry.dim(), 2) {
            let d = pic.principal(&m);
            assert_eq!(
                divisor_class(&pic, &d).unwrap(),
                zero,
                "{} {:?}",
                entry.id,
                m
            );
        }
    }
}

#[test]
fn class_names_are_consistent() {
    for entry in Catalog::builtin().entries() {
        let pic = entry.picard();
        let names: Vec<&String> = entry
            .ray_names
            .iter()
            .map(|r| &entry.class_names[r])
            .collect();
        for i in 0..names.len() {
            for j in 0..names.len() {
                let ci = divisor_class(&pic, &ToricDivisor::ray(pic.num_rays(), i)).unwrap();
                let cj = divisor_class(&pic, &ToricDivisor::ray(pic.num_rays(), j)).unwrap();
                assert_eq!(
                    names[i] == names[j],
                    ci == cj,
                    "{} n{} n{}",
                    entry.id,
                    i + 1,
                    j + 1
                );
            }
        }
    }
    let bl1 = catalog::get("bl1_p2").unwrap();
    assert_eq!(bl1.class_names["n2"], "H-E");
    assert_eq!(bl1.class_names["n4"], "H-E");
}

#[test]
fn class_examples() {
    let p2 = catalog::get("p2").unwrap();
    let pic = p2.picard();
    let a = divisor_class(&pic, &ToricDivisor(vec![1, 1, 1])).unwrap();
    let b = divisor_class(&pic, &ToricDivisor(vec![3, 0, 0])).unwrap();
    assert_eq!(a, b);
    assert_ne!(
        a,
        divisor_class(&pic, &ToricDivisor(vec![2, 0, 0])).unwrap()
    );
    assert!(matches!(
        divisor_class(&pic, &ToricDivisor(vec![1, 0])),
        Err(ToricError::LengthMismatch {
            expected: 3,
            got: 2
        })
    ));
}

#[test]
fn section_points_agree_with_lattice_scan() {
    for entry in Catalog::builtin().entries() {
        let n = entry.rays().len();
        for d in [
            ToricDivisor::zero(n),
            ToricDivisor(vec![1; n]),
            ToricDivisor::ray(n, 0),
            ToricDivisor::ray(n, n - 1).scale(2),
        ] {
            let got: BTreeSet<Vec<i64>> = divisor_polytope_points(&entry.polytope, &d)
                .unwrap()
                .into_iter()
                .collect();
            assert_eq!(
                got,
                scanned_section_points(entry.rays(), entry.dim(), &d.0),
                "{} {}",
                entry.id,
                d
            );
        }
    }
}

#[test]
fn section_point_examples() {
    let p2 = catalog::get("p2").unwrap();
    let pts = divisor_polytope_points(&p2.polytope, &ToricDivisor(vec![1, 0, 0])).unwrap();
    let got: BTreeSet<_> = pts.into_iter().collect();
    let want: BTreeSet<Vec<i64>> = [vec![-1, 0], vec![0, 0], vec![-1, 1]].into_iter().collect();
    assert_eq!(got, want);
    assert_eq!(
        divisor_polytope_points(&p2.polytope, &ToricDivisor::zero(3)).unwrap(),
        vec![vec![0, 0]]
    );
    let bl1 = catalog::get("bl1_p2").unwrap();
    assert_eq!(
        divisor_polytope_points(&bl1.polytope, &ToricDivisor::ray(4, 0))
            .unwrap()
            .len(),
        3
    );
}

#[test]
fn effective_basis_examples() {
    let bl1 = catalog::get("bl1_p2").unwrap();
    let pic = bl1.picard();
    let h = divisor_class(&pic, &bl1.parse_divisor("n1").unwrap()).unwrap();
    let got: Vec<String> = effective_basis(&pic, &h)
        .unwrap()
        .iter()
        .map(|d| bl1.format_divisor(d))
        .collect();
    assert_eq!(got, ["n1", "n2+n3", "n3+n4"]);

    let zero = divisor_class(&pic, &ToricDivisor::zero(4)).unwrap();
    assert_eq!(
        effective_basis(&pic, &zero).unwrap(),
        vec![ToricDivisor::zero(4)]
    );

    let bl2 = catalog::get("bl2_p2").unwrap();
    let pic = bl2.picard();
    let h_e1 = divisor_class(&pic, &bl2.parse_divisor("n2").unwrap()).unwrap();
    let got: Vec<String> = effective_basis(&pic, &h_e1)
        .unwrap()
        .iter()
        .map(|d| bl2.format_divisor(d))
        .collect();
    assert_eq!(got, ["n2", "n4+n5"]);
    let h = divisor_class(&pic, &bl2.parse_divisor("n1+n5").unwrap()).unwrap();
    let got: Vec<String> = effective_basis(&pic, &h)
        .unwrap()
        .iter()
        .map(|d| bl2.format_divisor(d))
        .collect();
    assert_eq!(got.len(), 3);
    assert!(got.contains(&"n3+n4+n5".to_string()));
    assert!(!got.contains(&"n2+n4+n5".to_string()));
}

#[test]
fn effective_basis_invariants() {
    for entry in Catalog::builtin().entries() {
        let pic = entry.picard();
        let n = pic.num_rays();
        for d in [
            ToricDivisor(vec![1; n]),
            ToricDivisor::ray(n, 0).scale(2),
            ToricDivisor::ray(n, 1).add(&ToricDivisor::ray(n, 2)),
        ] {
            let l = divisor_class(&pic, &d).unwrap();
            let basis = effective_basis(&pic, &l).unwrap();
            assert_eq!(basis.len(), pic.section_points(&l.rep).unwrap().len());
            let distinct: BTreeSet<_> = basis.iter().collect();
            assert_eq!(distinct.len(), basis.len());
            assert!(basis.windows(2).all(|w| w[0] > w[1]), "descending order");
            for b in &basis {
                assert!(b.is_effective());
                assert_eq!(divisor_class(&pic, b).unwrap(), l);
            }
            assert!(basis.contains(&d));
        }
    }
}

#[test]
fn catalog_collections_are_special() {
    for entry in Catalog::builtin().entries() {
        let report = is_special_collection(&entry.picard(), &entry.classes()).unwrap();
        assert!(report.special, "{}", entry.id);
    }
    let p2 = catalog::get("p2").unwrap();
    let pic = p2.picard();
    let single: Vec<LineBundleClass> = vec![divisor_class(&pic, &ToricDivisor::zero(3)).unwrap()];
    assert!(is_special_collection(&pic, &single).unwrap().special);
}
