use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use ptlab_core::density::{
    four_profile_fast, four_profile_reference, p_class, p_induced, p_via_intermediate, sample_density, t_ind,
    DensityEstimate,
};
use ptlab_core::graph::{blowup, random_graph, Graph};
use ptlab_core::iso::{Class4, SmallGraphClass};
use ptlab_core::property::WeightedDensityProperty;
use ptlab_core::quasirandom::{audit_member, is_delta_quasirandom, Mode};
use ptlab_core::rational::{binomial, int, ratio, Rational};
use ptlab_core::tester::TesterSpec;
use ptlab_core::SubgraphFamily;

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (0..=max_n, any::<u64>()).prop_map(|(n, seed)| random_graph(n, seed))
}

fn perm_strategy(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

fn property() -> WeightedDensityProperty {
    WeightedDensityProperty::quasirandomness_property()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn complement_is_an_involution(g in graph_strategy(200)) {
        prop_assert_eq!(g.complement().complement(), g.clone());
        prop_assert!(g.complement().is_well_formed());
    }

    #[test]
    fn random_graph_is_deterministic(n in 0usize..120, seed in any::<u64>()) {
        prop_assert_eq!(random_graph(n, seed), random_graph(n, seed));
    }

    #[test]
    fn blowup_structure(g in graph_strategy(12), k in 1usize..6) {
        let (b, s) = blowup(&g, k).unwrap();
        let m = g.order();
        prop_assert_eq!(b.order(), m * k);
        for i in 0..m {
            let part = &s.parts[i];
            prop_assert_eq!(b.induced(part).edge_count(), 0);
            for j in i + 1..m {
                let cross: usize = part.iter().map(|&u| s.parts[j].iter().filter(|&&v| b.has_edge(u, v)).count()).sum();
                prop_assert!(cross == 0 || cross == k * k);
            }
        }
        let reps: Vec<usize> = s.parts.iter().map(|p| p[0]).collect();
        prop_assert_eq!(b.induced(&reps), g);
    }

    #[test]
    fn profile_sums_and_integrality(g in graph_strategy(40)) {
        prop_assume!(g.order() >= 4);
        let total: Rational = Class4::ALL.iter().map(|&c| p_induced(c, &g)).sum();
        prop_assert!(total.is_one());
        let choose = Rational::from_integer(binomial(g.order() as u64, 4));
        for c in Class4::ALL {
            prop_assert!((p_induced(c, &g) * &choose).is_integer());
        }
    }

    #[test]
    fn fast_census_matches_reference(g in graph_strategy(30)) {
        prop_assert_eq!(four_profile_fast(&g), four_profile_reference(&g));
    }

    #[test]
    fn profile_complement_symmetry(g in graph_strategy(40)) {
        prop_assert_eq!(four_profile_fast(&g.complement()), four_profile_fast(&g).complemented());
    }

    #[test]
    fn induced_embedding_density_vs_subset_density(g in graph_strategy(6)) {
        prop_assume!(g.order() >= 4);
        for c in Class4::ALL {
            let lhs = t_ind(&c.graph(), &g).unwrap() * int(24);
            prop_assert_eq!(lhs, p_induced(c, &g) * int(c.aut() as i64));
        }
    }

    #[test]
    fn averaging_through_intermediate_size(n in 6usize..=12, seed in any::<u64>(), pick in 0usize..11) {
        let g = random_graph(n, seed);
        let f = Class4::ALL[pick].small_class();
        let direct = p_class(f, &g).unwrap();
        for hp in 4..=6 {
            prop_assert_eq!(&p_via_intermediate(f, &g, hp).unwrap(), &direct);
        }
    }

    #[test]
    fn distance_zero_iff_member(g in graph_strategy(6)) {
        let d = property().distance_to_property(&g).unwrap();
        prop_assert_eq!(d.pairs == 0, property().is_member(&g));
    }

    #[test]
    fn z_is_relabeling_invariant((g, perm) in (4usize..20, any::<u64>()).prop_flat_map(|(n, s)| (Just(random_graph(n, s)), perm_strategy(n)))) {
        let p = property();
        prop_assert_eq!(p.z_value(&g.permute(&perm)), p.z_value(&g));
        let t = TesterSpec::new("paw-or-p4", SubgraphFamily::four([Class4::P3c, Class4::P4]));
        prop_assert_eq!(t.acceptance_probability(&g.permute(&perm)), t.acceptance_probability(&g));
    }

    #[test]
    fn quasirandomness_is_monotone_in_delta(g in graph_strategy(10), a in 1i64..8, b in 1i64..8) {
        let (lo, hi) = (ratio(a.min(b), 8), ratio(a.max(b), 8));
        let at_lo = is_delta_quasirandom(&g, &lo, Mode::Exact, 0, 0).unwrap();
        let at_hi = is_delta_quasirandom(&g, &hi, Mode::Exact, 0, 0).unwrap();
        prop_assert!(!at_lo.quasirandom || at_hi.quasirandom);
        prop_assert_eq!(at_lo.quasirandom, at_lo.witness.is_none());
        if let Some(w) = &at_lo.witness {
            let min = (lo.clone() * int(g.order() as i64)).ceil().to_integer();
            prop_assert!(BigInt::from(w.u.len()) >= min && BigInt::from(w.v.len()) >= min);
            let size = int((w.u.len() * w.v.len()) as i64);
            let off = (int(w.edges as i64) - &size / int(2)).abs();
            prop_assert!(off > lo * size);
        }
    }

    #[test]
    fn members_satisfy_density_chain(g in graph_strategy(40)) {
        prop_assume!(g.order() >= 4 && property().is_member(&g));
        let a = audit_member(&g, 0, &ratio(1, 1)).unwrap();
        prop_assert!(a.chain_holds && a.c4_bound_holds);
    }
}

#[test]
fn four_vertex_orbit_sizes_sum_to_64() {
    let mut counts = [0u32; 11];
    for mask in 0..64u64 {
        counts[ptlab_core::iso::class4_of_mask(mask).index()] += 1;
    }
    assert_eq!(counts.iter().sum::<u32>(), 64);
    for c in Class4::ALL {
        assert_eq!(counts[c.index()] as u64 * c.aut(), 24);
        assert_eq!(SmallGraphClass::of(&c.graph()).unwrap(), c.small_class());
    }
}

#[test]
fn sampled_density_is_calibrated() {
    let g = random_graph(25, 3);
    let fam = SubgraphFamily::four([Class4::P4, Class4::C4c, Class4::K4]);
    let exact = fam.exact_density(&four_profile_fast(&g)).unwrap();
    let p = ptlab_core::rational::to_f64(&exact);
    let runs = 400;
    let inside = (0..runs)
        .filter(|&r| {
            let est: DensityEstimate = sample_density(&fam, &g, 2000, r).unwrap();
            let se = (p * (1.0 - p) / 2000.0).sqrt();
            (est.point - p).abs() <= 4.0 * se
        })
        .count();
    assert!(inside * 100 >= runs as usize * 99, "{inside}/{runs}");
    assert!(!exact.is_zero());
}
