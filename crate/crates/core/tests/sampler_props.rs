use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use qbiv::model::normalize_instruments;
use qbiv::rng::stream_rng;
use qbiv::sampler::Move;
use qbiv::{DesignData, HyperParams, InstrumentMap, Sampler};
use rand::Rng;
use rand_distr::StandardNormal;

fn instance(n: usize, p: usize, seed: u64) -> (DesignData, InstrumentMap) {
    let mut rng = stream_rng(seed, 0);
    let w = DMatrix::from_fn(n, 2 * p, |_, _| rng.sample::<f64, _>(StandardNormal));
    let x = DMatrix::from_fn(n, p, |i, j| w[(i, j)] - w[(i, p + j)] + rng.sample::<f64, _>(StandardNormal));
    let y = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    (
        normalize_instruments(DesignData::new(y, x, w).unwrap()).unwrap(),
        InstrumentMap::paired(p),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sweeps_never_exceed_the_sparsity_cap(
        seed in any::<u64>(),
        p in 3usize..9,
        cap in 1usize..9,
        flip_mix in 0.0f64..=1.0,
        start in any::<u16>(),
    ) {
        let s_bar = cap.min(p);
        let (data, map) = instance(20, p, seed);
        let hyper = HyperParams { lambda: 5.0, rho_sq: 1.0, gamma: 0.5, u: 0.01, s_bar };
        let sampler = Sampler::new(&data, hyper, &map).unwrap();
        let theta0 = DVector::from_fn(p, |j, _| if start >> j & 1 == 1 { 1.0 } else { 0.0 });
        let mut state = sampler.init_state(&theta0).unwrap();
        prop_assert!(state.delta.count() <= s_bar);
        let mut rng = stream_rng(seed, 1);
        for _ in 0..200 {
            sampler.sweep(&mut state, flip_mix, 50, &mut rng).unwrap();
            prop_assert!(state.delta.count() <= s_bar);
        }
    }

    #[test]
    fn accepted_swaps_preserve_the_active_count(seed in any::<u64>(), p in 3usize..9, start in 1u16..) {
        let (data, map) = instance(20, p, seed);
        let hyper = HyperParams { lambda: 5.0, rho_sq: 1.0, gamma: 0.5, u: 1.0, s_bar: p };
        let sampler = Sampler::new(&data, hyper, &map).unwrap();
        let theta0 = DVector::from_fn(p, |j, _| if start >> j & 1 == 1 { 1.0 } else { 0.0 });
        let mut state = sampler.init_state(&theta0).unwrap();
        let mut rng = stream_rng(seed, 1);
        for _ in 0..30 {
            let k = state.delta.count();
            let (proposal, _) = sampler.propose_double_flip(&state, &mut rng);
            let is_swap = matches!(proposal.mv, Move::Double { .. });
            // a zero log ratio always accepts
            prop_assert!(sampler.accept_reject(&mut state, proposal, 0.0, &mut rng));
            if is_swap {
                prop_assert_eq!(state.delta.count(), k);
            } else {
                prop_assert!(k == 0 || k == p);
            }
        }
    }

    #[test]
    fn flips_past_the_cap_are_impossible(seed in any::<u64>(), p in 3usize..9) {
        let (data, map) = instance(20, p, seed);
        let hyper = HyperParams { lambda: 5.0, rho_sq: 1.0, gamma: 0.5, u: 1.0, s_bar: 2 };
        let sampler = Sampler::new(&data, hyper, &map).unwrap();
        let theta0 = DVector::from_fn(p, |j, _| if j < 2 { 1.0 } else { 0.0 });
        let state = sampler.init_state(&theta0).unwrap();
        for j in 2..p {
            prop_assert_eq!(sampler.log_ratio(&state, Move::Single { j }), f64::NEG_INFINITY);
        }
    }
}
