//! Code algebra and catalog checked against independent references.

mod common;

use common::{brute_force_min_det, qo, qo_components, support_cells, support_classes, CATALOG_NAMES};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tops_stbc::catalog::{self, block_partition, Fast4x2Params, GoldenParams, SrParams};
use tops_stbc::stbc::{
    coarsen, coding_gain, csr_partition, diversity_rank, emit_code, group_codeword, intra_group_structure, parse_code,
    pulse_assignable_partition, quasi_orthogonal_pair, CsrPartition, QO_TOL, SUPPORT_TOL,
};
use tops_stbc::{ComplexGrid, Constellation, Error, LinearStbc};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn members(p: &CsrPartition) -> Vec<Vec<usize>> {
    p.groups().iter().map(|g| g.members().to_vec()).collect()
}

fn cells(p: &CsrPartition, g: usize) -> Vec<(usize, usize)> {
    p.groups()[g].support().cells().collect()
}

fn random_symbols(k: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..k).map(|_| rng.random_range(-2.0..2.0)).collect()
}

#[test]
fn csr_matches_pairwise_support_oracle_for_every_code() {
    for name in CATALOG_NAMES {
        let code = catalog::build(name).unwrap();
        let p = csr_partition(&code, SUPPORT_TOL);
        assert_eq!(members(&p), support_classes(&code), "{name}");
        assert_eq!(p.symbol_count(), code.k());
        for (g, group) in p.groups().iter().enumerate() {
            for &k in group.members() {
                assert_eq!(support_cells(code.weight(k).grid()), cells(&p, g), "{name} symbol {k}");
            }
        }
        for a in 0..p.len() {
            for b in a + 1..p.len() {
                assert_ne!(cells(&p, a), cells(&p, b));
            }
        }
    }
}

#[test]
fn partition_counts() {
    let count = |name: &str| csr_partition(&catalog::build(name).unwrap(), SUPPORT_TOL).len();
    assert_eq!(count("vblast4"), 4);
    assert_eq!(count("golden"), 2);
    assert_eq!(count("sr2x2"), 2);
    assert_eq!(count("alamouti"), 2);
    assert_eq!(count("ciod4"), 2);
    assert_eq!(count("vblast1"), 1);
    // Strict equal-support classes of the 4x2 codes; see the block merge below.
    assert_eq!(count("sr4x2"), 4);
    assert_eq!(count("fast4x2"), 4);
}

#[test]
fn vblast_groups_are_single_cells() {
    let p = csr_partition(&catalog::build("vblast4").unwrap(), SUPPORT_TOL);
    assert_eq!(p.sizes(), vec![2, 2, 2, 2]);
    for g in 0..4 {
        assert_eq!(cells(&p, g), vec![(g, 0)]);
    }
    let p2 = csr_partition(&catalog::build_vblast(2).unwrap(), SUPPORT_TOL);
    assert_eq!(p2.len(), 2);
    assert!(p2.groups().iter().all(|g| g.support().len() == 1));
    assert!(catalog::build_vblast(4).unwrap().is_min_delay_exempt());
}

#[test]
fn golden_and_alamouti_supports() {
    for name in ["golden", "alamouti", "sr2x2"] {
        let p = csr_partition(&catalog::build(name).unwrap(), SUPPORT_TOL);
        assert_eq!(cells(&p, 0), vec![(0, 0), (1, 1)], "{name}");
        assert_eq!(cells(&p, 1), vec![(0, 1), (1, 0)], "{name}");
    }
    let p = csr_partition(&catalog::build("golden").unwrap(), SUPPORT_TOL);
    assert_eq!(p.sizes(), vec![4, 4]);
    assert_eq!(p.groups()[0].support().to_string(), "{(1,1),(2,2)}");
}

#[test]
fn four_by_two_codes_merge_to_two_block_groups() {
    let diag_blocks: Vec<(usize, usize)> = (0..4)
        .flat_map(|r| (0..4).map(move |c| (r, c)))
        .filter(|(r, c)| r / 2 == c / 2)
        .collect();
    for name in ["sr4x2", "fast4x2"] {
        let code = catalog::build(name).unwrap();
        let p = block_partition(&csr_partition(&code, SUPPORT_TOL), 2).unwrap();
        assert_eq!(p.sizes(), vec![8, 8], "{name}");
        assert!(p.has_disjoint_supports());
        assert!(cells(&p, 0).iter().all(|cell| diag_blocks.contains(cell)), "{name}");
        assert!(cells(&p, 1).iter().all(|cell| !diag_blocks.contains(cell)), "{name}");
        // Identity merge leaves it unchanged.
        assert_eq!(coarsen(&p, &[vec![0], vec![1]]).unwrap(), p);
        // Every equal-support class is an Alamouti pattern repeated in two blocks.
        for g in csr_partition(&code, SUPPORT_TOL).groups() {
            let tiles: std::collections::BTreeSet<(usize, usize)> =
                g.support().cells().map(|(r, c)| (r / 2, c / 2)).collect();
            assert_eq!(tiles.len(), 2, "{name}");
        }
    }
}

#[test]
fn fast_code_symbol_supports_sit_in_diagonal_blocks() {
    let code = catalog::build("fast4x2").unwrap();
    for k in 0..4 {
        for (r, col) in support_cells(code.weight(k).grid()) {
            assert_eq!(r / 2, col / 2);
        }
    }
    let bad = Fast4x2Params {
        r: c(0.0, 0.0),
        ..Fast4x2Params::default()
    };
    assert!(matches!(catalog::build_fast4x2(&bad), Err(Error::InvalidParams(_))));
    let bad = Fast4x2Params {
        zeta: c(2.0, 0.0),
        ..Fast4x2Params::default()
    };
    assert!(matches!(catalog::build_fast4x2(&bad), Err(Error::InvalidParams(_))));
    // Top-left block is [[a, -r^2 b*], [r^2 b, a*]].
    let r2 = Fast4x2Params::default().r.powi(2);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = code.assemble_codeword(&random_symbols(16, &mut rng)).unwrap();
    assert!((x[(1, 1)] - x[(0, 0)].conj()).norm() < 1e-12);
    assert!((x[(0, 1)] + r2 * (x[(1, 0)] / r2).conj()).norm() < 1e-12);
}

fn golden_oracle(a: Complex64, b: Complex64, cc: Complex64, d: Complex64) -> [[Complex64; 2]; 2] {
    let th = (1.0 + 5f64.sqrt()) / 2.0;
    let thb = 1.0 - th;
    let alpha = c(1.0, 1.0 - th);
    let alphab = c(1.0, 1.0 - thb);
    let gamma = c(0.0, 1.0);
    let k = 1.0 / 5f64.sqrt();
    [
        [alpha * (a + b * th) * k, alpha * (cc + d * th) * k],
        [gamma * alphab * (cc + d * thb) * k, alphab * (a + b * thb) * k],
    ]
}

#[test]
fn golden_matches_symbolic_evaluation() {
    let code = catalog::build("golden").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let s: Vec<f64> = (0..8).map(|_| rng.random_range(-3i32..=3) as f64).collect();
        let x = code.assemble_codeword(&s).unwrap();
        let o = golden_oracle(c(s[0], s[1]), c(s[2], s[3]), c(s[4], s[5]), c(s[6], s[7]));
        for r in 0..2 {
            for col in 0..2 {
                assert!((x[(r, col)] - o[r][col]).norm() < 1e-12);
            }
        }
    }
    let k = 1.0 / 5f64.sqrt();
    let p = GoldenParams::default();
    let a_i = code.weight(0).grid();
    assert!((a_i[(0, 0)] - p.alpha * k).norm() < 1e-15 && (a_i[(1, 1)] - p.alpha_bar * k).norm() < 1e-15);
    assert_eq!(a_i[(0, 1)], c(0.0, 0.0));
    let c_i = code.weight(4).grid();
    assert!((c_i[(0, 1)] - p.alpha * k).norm() < 1e-15);
    assert!((c_i[(1, 0)] - p.gamma * p.alpha_bar * k).norm() < 1e-15);
    assert_eq!(code.energy_scale(), 1.0);
}

#[test]
fn sr2x2_first_weight_is_rotation() {
    let code = catalog::build("sr2x2").unwrap();
    let t = 2f64.atan() / 2.0;
    let w = code.weight(0).grid();
    assert!((w[(0, 0)] - c(t.cos(), 0.0)).norm() < 1e-15);
    assert!((w[(1, 1)] - c(0.0, t.sin())).norm() < 1e-15);
    assert_eq!(support_cells(w), vec![(0, 0), (1, 1)]);
    let p = SrParams::default();
    assert!((p.sqrt_i * p.sqrt_i - c(0.0, 1.0)).norm() < 1e-15);
}

#[test]
fn alamouti_structure() {
    let code = catalog::build("alamouti").unwrap();
    let x = code.assemble_codeword(&[1.0, 0.0, 0.0, 0.0]).unwrap();
    assert_eq!(x, ComplexGrid::identity(2));
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let s = random_symbols(4, &mut rng);
        let x = code.assemble_codeword(&s).unwrap();
        let e = s.iter().map(|v| v * v).sum::<f64>();
        let g = x.adjoint().matmul(&x).unwrap();
        assert!(g.max_abs_diff(&ComplexGrid::identity(2).scale(e)) < 1e-12);
    }
    assert!(quasi_orthogonal_pair(code.weight(0), code.weight(2), QO_TOL).unwrap());
    assert!(!quasi_orthogonal_pair(code.weight(0), code.weight(0), QO_TOL).unwrap());
}

#[test]
fn vblast_quasi_orthogonality() {
    let code = catalog::build("vblast4").unwrap();
    for a in 0..8 {
        for b in 0..8 {
            let lib = quasi_orthogonal_pair(code.weight(a), code.weight(b), QO_TOL).unwrap();
            assert_eq!(lib, qo(code.weight(a).grid(), code.weight(b).grid()));
            assert_eq!(
                lib,
                quasi_orthogonal_pair(code.weight(b), code.weight(a), QO_TOL).unwrap()
            );
            // e_j e_l^T + e_l e_j^T is nonzero across antennas; only the I/Q
            // pair of one antenna is quasi-orthogonal.
            assert_eq!(lib, a != b && a / 2 == b / 2, "{a} {b}");
        }
    }
}

#[test]
fn intra_structure_matches_oracle() {
    for name in CATALOG_NAMES {
        let code = catalog::build(name).unwrap();
        let p = csr_partition(&code, SUPPORT_TOL);
        for g in 0..p.len() {
            let st = intra_group_structure(&code, &p, g, QO_TOL).unwrap();
            assert_eq!(
                st.subgroups(),
                qo_components(&code, p.groups()[g].members()).as_slice(),
                "{name} {g}"
            );
            let subs = st.subgroups();
            for (i, a) in subs.iter().enumerate() {
                for b in &subs[i + 1..] {
                    for &x in a {
                        for &y in b {
                            assert!(qo(code.weight(x).grid(), code.weight(y).grid()));
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn intra_structure_values() {
    let st = |name: &str, g: usize| {
        let code = catalog::build(name).unwrap();
        let p = csr_partition(&code, SUPPORT_TOL);
        intra_group_structure(&code, &p, g, QO_TOL)
            .unwrap()
            .subgroups()
            .to_vec()
    };
    // Golden: in-phase and quadrature parts of (a, b) decouple.
    assert_eq!(st("golden", 0), vec![vec![0, 2], vec![1, 3]]);
    assert_eq!(st("golden", 1), vec![vec![4, 6], vec![5, 7]]);
    // The rotated codes split into complex symbols, each (x_I, x_Q) coupled.
    assert_eq!(st("sr2x2", 0), vec![vec![0, 1], vec![2, 3]]);
    assert_eq!(st("sr2x2", 1), vec![vec![4, 5], vec![6, 7]]);
    assert_eq!(st("ciod4", 0), vec![vec![0, 1], vec![4, 5]]);
    assert_eq!(st("sr4x2", 0), vec![vec![0, 1], vec![4, 5]]);
    // Orthogonal designs are single-real-symbol decodable.
    assert_eq!(st("alamouti", 0), vec![vec![0], vec![1]]);
    assert_eq!(st("vblast4", 2), vec![vec![4], vec![5]]);
}

#[test]
fn pulse_assignable_partitions() {
    for name in CATALOG_NAMES {
        let p = csr_partition(&catalog::build(name).unwrap(), SUPPORT_TOL);
        let pa = pulse_assignable_partition(&p);
        assert!(pa.has_disjoint_supports(), "{name}");
        assert!(pa.len() <= p.len());
    }
    let golden = csr_partition(&catalog::build("golden").unwrap(), SUPPORT_TOL);
    assert_eq!(pulse_assignable_partition(&golden), golden);
    let vb = csr_partition(&catalog::build("vblast4").unwrap(), SUPPORT_TOL);
    assert_eq!(pulse_assignable_partition(&vb), vb);
    // Class supports {(1,1)} and {(1,1),(2,2)} share a cell.
    let mut a = ComplexGrid::zeros(2, 2);
    a[(0, 0)] = c(1.0, 0.0);
    let b = ComplexGrid::identity(2);
    let code = LinearStbc::new("overlap", 2, 2, vec![a, b]).unwrap();
    let p = csr_partition(&code, SUPPORT_TOL);
    assert_eq!(p.len(), 2);
    assert_eq!(pulse_assignable_partition(&p).len(), 1);
}

#[test]
fn coarsen_examples() {
    let golden = csr_partition(&catalog::build("golden").unwrap(), SUPPORT_TOL);
    let one = coarsen(&golden, &[vec![0, 1]]).unwrap();
    assert_eq!(one.len(), 1);
    assert_eq!(one.sizes(), vec![8]);
    let vb = csr_partition(&catalog::build("vblast4").unwrap(), SUPPORT_TOL);
    let two = coarsen(&vb, &[vec![0, 1], vec![2, 3]]).unwrap();
    assert_eq!(two.len(), 2);
    let c0: Vec<(usize, usize)> = two.groups()[0].support().cells().collect();
    let c1: Vec<(usize, usize)> = two.groups()[1].support().cells().collect();
    assert_eq!(c0, vec![(0, 0), (1, 0)]);
    assert!(c0.iter().all(|x| !c1.contains(x)));
    assert!(matches!(
        coarsen(&vb, &[vec![0, 1], vec![1, 2]]),
        Err(Error::InvalidMerge(_))
    ));
    assert!(matches!(coarsen(&vb, &[vec![0, 7]]), Err(Error::UnknownGroup(7))));
}

#[test]
fn group_codewords_sum_to_codeword() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for name in CATALOG_NAMES {
        let code = catalog::build(name).unwrap();
        let p = csr_partition(&code, SUPPORT_TOL);
        for _ in 0..100 {
            let s = random_symbols(code.k(), &mut rng);
            let full = code.assemble_codeword(&s).unwrap();
            let mut sum = ComplexGrid::zeros(code.n_tx(), code.n_slots());
            for g in 0..p.len() {
                sum = &sum + &group_codeword(&code, &p, g, &s).unwrap();
            }
            assert!(sum.max_abs_diff(&full) <= 1e-14 * full.max_abs().max(1.0), "{name}");
        }
    }
    let code = catalog::build("golden").unwrap();
    let p = csr_partition(&code, SUPPORT_TOL);
    let s = [1.0, -1.0, 0.5, 2.0, 0.0, 0.0, 0.0, 0.0];
    assert_eq!(
        group_codeword(&code, &p, 0, &s).unwrap(),
        code.assemble_codeword(&s).unwrap()
    );
    assert!(code.assemble_codeword(&[0.0; 8]).unwrap().is_zero());
    let sr = catalog::build("sr4x2").unwrap();
    let blocks = block_partition(&csr_partition(&sr, SUPPORT_TOL), 2).unwrap();
    let x = group_codeword(&sr, &blocks, 1, &random_symbols(16, &mut rng)).unwrap();
    for r in 0..4 {
        for col in 0..4 {
            if r / 2 == col / 2 {
                assert_eq!(x[(r, col)], c(0.0, 0.0));
            }
        }
    }
}

#[test]
fn catalog_codes_round_trip_bit_exactly() {
    for name in CATALOG_NAMES {
        let code = catalog::build(name).unwrap();
        let text = emit_code(&code);
        let back = parse_code(&text).unwrap();
        assert_eq!(back.name(), code.name());
        assert_eq!(back.k(), code.k());
        for k in 0..code.k() {
            for (a, b) in back
                .weight(k)
                .grid()
                .entries()
                .iter()
                .zip(code.weight(k).grid().entries())
            {
                assert_eq!(a.re.to_bits(), b.re.to_bits(), "{name}");
                assert_eq!(a.im.to_bits(), b.im.to_bits(), "{name}");
            }
        }
        assert_eq!(back.energy_scale().to_bits(), code.energy_scale().to_bits());
        assert_eq!(back.is_min_delay_exempt(), code.is_min_delay_exempt());
    }
}

#[test]
fn codes_have_unit_symbol_energy_normalisation() {
    for name in CATALOG_NAMES {
        let code = catalog::build(name).unwrap();
        let e: f64 = (0..code.k()).map(|k| 0.5 * code.scaled_weight(k).frobenius_sq()).sum();
        assert!((e - (code.n_tx() * code.n_slots()) as f64).abs() < 1e-12, "{name}");
    }
}

#[test]
fn diversity_ranks() {
    let q4 = Constellation::qam(4).unwrap();
    let rank = |name: &str, c: &Constellation| diversity_rank(&catalog::build(name).unwrap(), c).unwrap();
    assert_eq!(rank("vblast4", &q4), 1);
    assert_eq!(rank("alamouti", &Constellation::bpsk()), 2);
    assert_eq!(rank("golden", &q4), 2);
    assert_eq!(rank("sr2x2", &q4), 2);
    assert_eq!(rank("ciod4", &q4), 4);
}

#[test]
fn coding_gains_against_brute_force() {
    let bpsk = Constellation::bpsk();
    let alamouti = catalog::build("alamouti").unwrap();
    let g = coding_gain(&alamouti, &bpsk).unwrap();
    let oracle = brute_force_min_det(&alamouti, &[-1.0, 1.0], &[0.0]);
    assert!((g.coding_gain - oracle).abs() < 1e-12);
    // det(D D^H) = (|d1|^2 + |d2|^2)^2 with a single flip of size 2.
    assert!((g.coding_gain - 16.0).abs() < 1e-12);

    let q4 = Constellation::qam(4).unwrap();
    let d = 0.5f64.sqrt();
    let golden = catalog::build("golden").unwrap();
    let sr = catalog::build("sr2x2").unwrap();
    let gg = coding_gain(&golden, &q4).unwrap();
    let gs = coding_gain(&sr, &q4).unwrap();
    assert!((gg.coding_gain - brute_force_min_det(&golden, &[-d, d], &[-d, d])).abs() < 1e-12);
    assert!((gs.coding_gain - brute_force_min_det(&sr, &[-d, d], &[-d, d])).abs() < 1e-12);
    assert!(gg.coding_gain > 0.0);
    assert!((gg.coding_gain - gs.coding_gain).abs() <= 1e-9 * gg.coding_gain);
    assert_eq!(gg.pair_count_examined, 256 * 255 / 2);
    assert_eq!(coding_gain(&golden, &q4).unwrap(), gg);
    let vb = coding_gain(&catalog::build("vblast4").unwrap(), &q4).unwrap();
    assert_eq!((vb.min_rank, vb.coding_gain), (1, 0.0));
}

#[test]
fn coding_gain_positive_iff_full_rank() {
    let q4 = Constellation::qam(4).unwrap();
    for name in ["vblast4", "alamouti", "golden", "sr2x2", "ciod4"] {
        let code = catalog::build(name).unwrap();
        let m = coding_gain(&code, &q4).unwrap();
        assert!(m.coding_gain >= 0.0);
        assert_eq!(m.coding_gain > 0.0, m.min_rank == code.n_tx(), "{name}");
    }
}

#[test]
fn malformed_code_file_names_block() {
    let text = "stbc bad 2 2 2\n1+0i 0+0i\n0+0i 1+0i\n0+0i 1+0i\n1+0i nope\n";
    match parse_code(text) {
        Err(Error::Parse {
            block: Some(2),
            line: 5,
            ..
        }) => {}
        other => panic!("{other:?}"),
    }
    let e = parse_code(text).unwrap_err();
    assert!(e.to_string().contains("block 2"), "{e}");
}
