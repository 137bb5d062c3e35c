use graphsim_core::bins::{DensityBin, GeneratorKind, SizeBin};
use graphsim_core::generators::{ba_expected_edges, gen_ba, gen_gnm, gen_nws, generate_in_bins, solve_generator_params, GeneratorParams};
use graphsim_core::graph::{component_labels, linear_density};
use proptest::prelude::*;

#[test]
fn ba_density_interval_over_seeds() {
    for s in 0..1000 {
        let d = linear_density(&gen_ba(200, 2.0, s).unwrap());
        assert!((1.5..=2.5).contains(&d), "seed {s}: density {d}");
    }
}

#[test]
fn ba_hubs_exceed_gnm_at_matched_edges() {
    let wins = (0..100)
        .filter(|&s| {
            let ba = gen_ba(200, 2.0, s).unwrap();
            let gnm = gen_gnm(200, ba.edge_count(), s).unwrap();
            ba.max_degree() > gnm.max_degree()
        })
        .count();
    assert!(wins >= 90, "BA hub wins {wins}/100");
}

#[test]
fn nws_shortcut_count_is_binomial() {
    let counts: Vec<usize> = (0..1000).map(|s| gen_nws(50, 2, 0.5, s).unwrap().edge_count()).collect();
    // 50 ring edges plus Binomial(50, 0.5) shortcuts.
    assert!(counts.iter().all(|c| (50..=100).contains(c)));
    let mean = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
    // The mean over 1000 runs has standard error ~0.11.
    assert!((mean - 75.0).abs() < 0.5, "mean {mean}");
}

#[test]
fn ba_solver_calibration() {
    let GeneratorParams::Ba { n, attach } = solve_generator_params(GeneratorKind::Ba, 100, 2.5, 0).unwrap() else {
        panic!("wrong family");
    };
    assert!((ba_expected_edges(n, attach) / 100.0 - 2.5).abs() < 1e-9);
    let mean = (0..1000).map(|s| linear_density(&gen_ba(n, attach, s).unwrap())).sum::<f64>() / 1000.0;
    assert!((2.25..=2.75).contains(&mean), "mean density {mean}");
}

#[test]
fn solver_within_ten_percent_of_target() {
    for kind in GeneratorKind::ALL {
        for &(n, d) in &[(15usize, 1.5f64), (40, 2.5), (120, 4.0), (300, 6.0)] {
            let p = solve_generator_params(kind, n, d, 3).unwrap();
            let expected = match &p {
                GeneratorParams::Gnm { m, .. } => *m as f64,
                GeneratorParams::Ba { n, attach } => ba_expected_edges(*n, *attach),
                GeneratorParams::Nws { n, k, p } => (*n * *k / 2) as f64 * (1.0 + p),
                GeneratorParams::Sbm { block_sizes, p_in, p_out } => {
                    let within: f64 = block_sizes.iter().map(|&b| (b * (b - 1) / 2) as f64).sum();
                    p_in * within + p_out * ((n * (n - 1) / 2) as f64 - within)
                }
            };
            assert!(((expected / n as f64) / d - 1.0).abs() <= 0.1, "{kind:?} n={n} d={d}: {p:?}");
        }
    }
}

#[test]
fn every_cell_is_generatable() {
    for g in GeneratorKind::ALL {
        for s in SizeBin::ALL {
            for d in DensityBin::ALL {
                let out = generate_in_bins(g, s, d, 11).unwrap_or_else(|e| panic!("{g:?} {s:?} {d:?}: {e}"));
                assert!(s.contains(out.graph.node_count()));
                assert!(d.contains(linear_density(&out.graph)));
            }
        }
    }
}

fn arb_cell() -> impl Strategy<Value = (GeneratorKind, SizeBin, DensityBin, u64)> {
    (
        prop::sample::select(GeneratorKind::ALL.to_vec()),
        prop::sample::select(vec![SizeBin::Small, SizeBin::Medium, SizeBin::Large]),
        prop::sample::select(DensityBin::ALL.to_vec()),
        any::<u64>(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_graphs_are_compliant_and_deterministic((g, s, d, seed) in arb_cell()) {
        let a = generate_in_bins(g, s, d, seed).unwrap();
        prop_assert!(s.contains(a.graph.node_count()));
        prop_assert!(d.contains(linear_density(&a.graph)));
        let adj: Vec<Vec<usize>> = (0..a.graph.node_count()).map(|u| a.graph.neighbors(u).to_vec()).collect();
        prop_assert_eq!(component_labels(&adj).1, 1);
        let b = generate_in_bins(g, s, d, seed).unwrap();
        prop_assert_eq!(a.graph, b.graph);
    }

    #[test]
    fn gnm_edge_count_exact(n in 5usize..40, extra in 0usize..60, seed in any::<u64>()) {
        let m = (3 * n / 2 + extra).min(n * (n - 1) / 2);
        let g = gen_gnm(n, m, seed).unwrap();
        prop_assert_eq!(g.edge_count(), m);
    }

    #[test]
    fn nws_ring_edge_count(n in 6usize..60, half in 1usize..3, seed in any::<u64>()) {
        let k = 2 * half;
        prop_assume!(k < n);
        prop_assert_eq!(gen_nws(n, k, 0.0, seed).unwrap().edge_count(), n * k / 2);
    }
}
