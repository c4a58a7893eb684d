//! Mesh serialization: bit-exact round-trip (including a property over
//! arbitrary finite coordinates), parse failures with line numbers, and
//! generator/validation behavior.

use glpd_fem::mesh::{format_mesh, notched_strip, parse_mesh, structured_strip, Mesh};
use glpd_fem::FemError;
use proptest::prelude::*;

#[test]
fn generated_meshes_round_trip_bit_exactly() {
    for mesh in [
        structured_strip(1.0, 2.0, 2, 4),
        notched_strip(1.0, 4.0, 0.5, 5, 20),
    ] {
        let text = format_mesh(&mesh);
        let back = parse_mesh(&text).unwrap();
        assert_eq!(mesh, back);
        assert_eq!(format_mesh(&back), text);
    }
}

#[test]
fn generators_produce_valid_meshes_with_the_expected_counts() {
    let strip = structured_strip(1.0, 2.0, 2, 4);
    strip.validate().unwrap();
    assert_eq!(strip.elements.len(), 8);
    // Serendipity lattice: (2nx+1)(2ny+1) minus the nx*ny center nodes.
    assert_eq!(strip.nodes.len(), 5 * 9 - 8);

    let notch = notched_strip(1.0, 4.0, 0.5, 5, 20);
    notch.validate().unwrap();
    assert_eq!(notch.elements.len(), 100);
    assert_eq!(notch.nodes.len(), 11 * 41 - 100);
    // Notch depth equals the radius at the minimum section.
    let bottom = notch.node_set("bottom").unwrap();
    let xmax = bottom
        .iter()
        .map(|&n| notch.nodes[n][0])
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((xmax - 0.5).abs() < 1e-12);
    // The edge is untouched above y = radius.
    let right = notch.node_set("right").unwrap();
    for &n in right {
        let [x, y] = notch.nodes[n];
        if y >= 0.5 {
            assert!((x - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn parse_errors_carry_line_numbers() {
    let e = parse_mesh("bogus header").unwrap_err();
    match e {
        FemError::Parse { line, .. } => assert_eq!(line, 1),
        other => panic!("unexpected error {other:?}"),
    }

    let text = "nodes 1 elements 0\n1 0.0 zz\n";
    match parse_mesh(text).unwrap_err() {
        FemError::Parse { line, msg } => {
            assert_eq!(line, 2);
            assert!(msg.contains("zz"));
        }
        other => panic!("unexpected error {other:?}"),
    }

    let mesh = structured_strip(1.0, 1.0, 1, 1);
    let mut text = format_mesh(&mesh);
    text.push_str("junk record\n");
    let last = text.lines().count();
    match parse_mesh(&text).unwrap_err() {
        FemError::Parse { line, msg } => {
            assert_eq!(line, last);
            assert!(msg.contains("junk"));
        }
        other => panic!("unexpected error {other:?}"),
    }
}

#[test]
fn out_of_range_connectivity_is_rejected_at_parse_and_validate() {
    let text = "nodes 1 elements 1\n1 0.0 0.0\n1 1 1 1 1 1 1 1 9\n";
    assert!(matches!(
        parse_mesh(text),
        Err(FemError::Parse { line: 3, .. })
    ));

    let mut mesh = structured_strip(1.0, 1.0, 1, 1);
    mesh.elements[0][3] = 999;
    assert!(matches!(mesh.validate(), Err(FemError::Mesh(_))));
}

#[test]
fn inverted_elements_fail_jacobian_validation() {
    let mut mesh = structured_strip(1.0, 1.0, 1, 1);
    // Swapping two adjacent corners folds the element.
    mesh.elements[0].swap(0, 1);
    let err = mesh.validate().unwrap_err();
    match err {
        FemError::Mesh(msg) => assert!(msg.contains("Jacobian"), "{msg}"),
        other => panic!("unexpected error {other:?}"),
    }
}

fn arb_mesh() -> impl Strategy<Value = Mesh> {
    let coord = prop_oneof![
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        -1.0e6..1.0e6_f64,
        Just(0.0),
        Just(-0.0),
        Just(1.0e-308),
    ];
    (proptest::collection::vec((coord.clone(), coord), 8..40)).prop_map(|pts| {
        let nodes: Vec<[f64; 2]> = pts.iter().map(|&(x, y)| [x, y]).collect();
        let n = nodes.len();
        let elements = vec![[0, 1, 2, 3, 4, 5, 6, 7], [n - 8, n - 7, n - 6, n - 5, n - 4, n - 3, n - 2, n - 1]];
        Mesh {
            nodes,
            elements,
            node_sets: vec![("a".into(), vec![0, n - 1])],
            element_sets: vec![("b".into(), vec![1])],
        }
    })
}

proptest! {
    // Serialization uses shortest round-trip float notation, so arbitrary
    // finite coordinates survive parse(format(mesh)) bit for bit.
    #[test]
    fn round_trip_is_bit_exact_for_arbitrary_coordinates(mesh in arb_mesh()) {
        let text = format_mesh(&mesh);
        let back = parse_mesh(&text).unwrap();
        prop_assert_eq!(&mesh.nodes, &back.nodes);
        prop_assert_eq!(&mesh, &back);
    }
}
