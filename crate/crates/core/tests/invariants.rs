use fdefln::dsp::{
    fir_filter_direct, overlap_save_correlate, overlap_save_filter, FirCoefficients,
};
use fdefln::expansion::{efln_derivative, efln_expand};
use fdefln::{AdaptConfig, ExpansionConfig, Fdefln, SeededRng, Transform};
use proptest::prelude::*;

fn block(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, len)
}

proptest! {
    #[test]
    fn round_trip_and_parseval(m in 1usize..48, seed in any::<u64>()) {
        let t = Transform::for_block(m).unwrap();
        let x = SeededRng::new(seed).uniform_vec(-1.0, 1.0, 2 * m);
        let spec = t.forward(&x).unwrap();
        let back = t.inverse(&spec).unwrap();
        prop_assert!(x.iter().zip(&back).all(|(a, b)| (a - b).abs() < 1e-12));
        let e: f64 = x.iter().map(|v| v * v).sum();
        prop_assert!((spec.energy() - 2.0 * m as f64 * e).abs() <= 1e-9 * spec.energy().max(1e-300));
        prop_assert!(spec.hermitian_defect() < 1e-12);
    }

    #[test]
    fn overlap_save_is_linear_convolution(
        m in 1usize..24,
        n_taps in 1usize..25,
        seed in any::<u64>(),
    ) {
        let n_taps = n_taps.min(m + 1);
        let mut rng = SeededRng::new(seed);
        let taps = FirCoefficients::new(rng.uniform_vec(-1.0, 1.0, n_taps)).unwrap();
        let t = Transform::for_block(m).unwrap();
        let coeff = t.forward_zero_tail(taps.taps()).unwrap();
        let stream = rng.uniform_vec(-1.0, 1.0, 6 * m);
        let direct = fir_filter_direct(&stream, &taps);
        let mut prev = vec![0.0; m];
        for (k, cur) in stream.chunks(m).enumerate() {
            let out = overlap_save_filter(&t, &prev, cur, &coeff).unwrap();
            for j in 0..m {
                prop_assert!((out[j] - direct[k * m + j]).abs() < 1e-10);
            }
            prev = cur.to_vec();
        }
    }

    #[test]
    fn overlap_save_correlation_is_double_sum(m in 1usize..24, seed in any::<u64>()) {
        let mut rng = SeededRng::new(seed);
        let t = Transform::for_block(m).unwrap();
        let hist = rng.uniform_vec(-1.0, 1.0, 2 * m);
        let e = rng.uniform_vec(-1.0, 1.0, m);
        let got = overlap_save_correlate(
            &t,
            &t.forward_zero_head(&e).unwrap(),
            &t.forward(&hist).unwrap(),
        )
        .unwrap();
        for l in 0..m {
            let brute: f64 = (0..m).map(|j| e[j] * hist[m + j - l]).sum();
            prop_assert!((got[l] - brute).abs() < 1e-10);
        }
    }

    #[test]
    fn derivative_matches_finite_difference(u in block(6), q in -2.0f64..2.0, p in 1usize..4) {
        let delta = 1e-6;
        let hi = efln_expand(&u, q + delta, p);
        let lo = efln_expand(&u, q - delta, p);
        let h = efln_derivative(&u, q, p);
        for i in 0..h.count() {
            for n in 0..u.len() {
                let fd = (hi.channel(i)[n] - lo.channel(i)[n]) / (2.0 * delta);
                prop_assert!((fd - h.channel(i)[n]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn factor_ignores_linear_channel_weights(
        seed in any::<u64>(),
        bump in prop::collection::vec(-1.0f64..1.0, 4),
    ) {
        let m = 4;
        let c = AdaptConfig::new(m, ExpansionConfig::efln(1).unwrap(), 0.0, 0.1).with_q0(0.2);
        let mut rng = SeededRng::new(seed);
        let w = rng.uniform_vec(-0.5, 0.5, 3 * m);
        let mut w2 = w.clone();
        for (a, b) in w2.iter_mut().zip(&bump) {
            *a += b;
        }
        let mut a = Fdefln::new(c).unwrap();
        let mut b = Fdefln::new(c).unwrap();
        a.set_weights(&w).unwrap();
        b.set_weights(&w2).unwrap();
        let u = rng.uniform_vec(-1.0, 1.0, m);
        let d = rng.uniform_vec(-1.0, 1.0, m);
        let (oa, ta) = a.process_traced(&u, &d).unwrap();
        // Choose b's desired signal so both runs see the same error.
        let y_b = b.clone().process(&u, &d).unwrap().y;
        let d_b: Vec<f64> = oa.e.iter().zip(&y_b).map(|(e, y)| e + y).collect();
        let (ob, tb) = b.process_traced(&u, &d_b).unwrap();
        prop_assert!(oa.e.iter().zip(&ob.e).all(|(x, y)| (x - y).abs() < 1e-12));
        prop_assert!((a.factor() - b.factor()).abs() < 1e-12);
        let (za, zb) = (ta.z(), tb.z());
        prop_assert!(za.iter().zip(&zb).all(|(x, y)| (x - y).abs() < 1e-12));
        prop_assert!(ta.z_channels[0].iter().all(|v| *v == 0.0));
    }
}

#[test]
fn weight_constraint_after_every_update() {
    let m = 8;
    let c = AdaptConfig::new(m, ExpansionConfig::efln(2).unwrap(), 5e-3, 1e-2);
    let mut f = Fdefln::new(c).unwrap();
    let mut rng = SeededRng::new(77);
    for _ in 0..200 {
        let u = rng.uniform_vec(-1.0, 1.0, m);
        let d = rng.uniform_vec(-1.0, 1.0, m);
        f.process(&u, &d).unwrap();
        assert!(f.tail_energy_ratio().unwrap() < 1e-18);
    }
}
