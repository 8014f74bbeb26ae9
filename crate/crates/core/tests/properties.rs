mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use tops_stbc::constellation::hard_limit;
use tops_stbc::stbc::{
    csr_partition, emit_code, parse_code, pulse_assignable_partition, quasi_orthogonal_pair, QO_TOL, SUPPORT_TOL,
};
use tops_stbc::{catalog, ComplexGrid, LinearStbc};

/// Random sparse weight matrices with small integer entries; zeros are
/// common so equal supports actually occur.
fn sparse_code(n: usize, k: usize) -> impl Strategy<Value = LinearStbc> {
    prop::collection::vec(prop::collection::vec((-2i8..=2, -2i8..=2), n * n), k).prop_filter_map(
        "all-zero weight",
        move |mats| {
            let grids: Vec<ComplexGrid> = mats
                .into_iter()
                .map(|m| {
                    let e = m.into_iter().map(|(a, b)| Complex64::new(a as f64, b as f64)).collect();
                    ComplexGrid::from_rows(n, n, e).unwrap()
                })
                .collect();
            LinearStbc::new("random", n, n, grids).ok()
        },
    )
}

fn grid(n: usize) -> impl Strategy<Value = ComplexGrid> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |v| {
        ComplexGrid::from_rows(n, n, v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn assemble_is_linear(
        idx in 0usize..common::CATALOG_NAMES.len(),
        s in prop::collection::vec(-2.0f64..2.0, 16),
        t in prop::collection::vec(-2.0f64..2.0, 16),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let code = catalog::build(common::CATALOG_NAMES[idx]).unwrap();
        let k = code.k();
        let (s, t) = (&s[..k], &t[..k]);
        let mix: Vec<f64> = s.iter().zip(t).map(|(x, y)| a * x + b * y).collect();
        let lhs = code.assemble_codeword(&mix).unwrap();
        let rhs = &code.assemble_codeword(s).unwrap().scale(a) + &code.assemble_codeword(t).unwrap().scale(b);
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn quasi_orthogonality_is_symmetric(a in grid(2), b in grid(2)) {
        let code = LinearStbc::new("pair", 2, 2, vec![a, b]).unwrap();
        let ab = quasi_orthogonal_pair(code.weight(0), code.weight(1), QO_TOL).unwrap();
        let ba = quasi_orthogonal_pair(code.weight(1), code.weight(0), QO_TOL).unwrap();
        prop_assert_eq!(ab, ba);
        prop_assert_eq!(ab, common::qo(code.weight(0).grid(), code.weight(1).grid()));
    }

    #[test]
    fn pulse_assignable_supports_are_disjoint(code in sparse_code(2, 6)) {
        let p = csr_partition(&code, SUPPORT_TOL);
        prop_assert_eq!(p.groups().iter().map(|g| g.members().to_vec()).collect::<Vec<_>>(), common::support_classes(&code));
        let pa = pulse_assignable_partition(&p);
        prop_assert!(pa.has_disjoint_supports());
        prop_assert_eq!(pa.symbol_count(), code.k());
        // Coarsening only merges whole classes.
        for g in p.groups() {
            let owner = pa.group_of(g.members()[0]).unwrap();
            prop_assert!(g.members().iter().all(|&k| pa.group_of(k) == Some(owner)));
        }
    }

    #[test]
    fn random_codes_round_trip(code in sparse_code(3, 4)) {
        let back = parse_code(&emit_code(&code)).unwrap();
        for k in 0..code.k() {
            prop_assert_eq!(back.weight(k).grid(), code.weight(k).grid());
        }
    }

    #[test]
    fn hard_limit_picks_a_nearest_level(x in -3.0f64..3.0) {
        let levels = [-1.5, -0.5, 0.5, 1.5];
        let j = hard_limit(&levels, x);
        let d = (x - levels[j]).abs();
        prop_assert!(levels.iter().all(|l| (x - l).abs() >= d));
    }
}

#[test]
fn hard_limit_examples() {
    assert_eq!(hard_limit(&[-1.0, 1.0], 0.3), 1);
    assert_eq!(hard_limit(&[-1.0, 1.0], 0.0), 0);
    assert_eq!(hard_limit(&[-3.0, -1.0, 1.0, 3.0], 2.0), 2);
}
