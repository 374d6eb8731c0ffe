use proptest::prelude::*;
use stablewave::ah::{Combination, MollifiedBox};
use stablewave::measure::lepage_terms;
use stablewave::runner::{parse_config_text, sidecar_json, Command, RunConfig};
use stablewave::{
    apply_ah, dyadic_sup_increments, estimate_holder, generate_ensemble, grid_field, lepage_integral, measure_of_set,
    FieldGrid, GridSpec, IncrementTable, LePageEnsemble, ModelParams, RegionSpec, WaveSeries,
};

fn params() -> impl Strategy<Value = ModelParams> {
    (1.05f64..1.95, 0.52f64..0.98, 0.3f64..4.0, 0.2f64..3.0)
        .prop_map(|(a, h, e, s)| ModelParams::new(a, h, e, s).unwrap())
}

fn point() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-3.0f64..3.0)
}

fn round_off(terms: &[f64]) -> f64 {
    1e-13 * terms.iter().map(|v| v.abs()).sum::<f64>().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn integral_is_linear(p in params(), seed in any::<u64>(), a in -5.0f64..5.0, b in -5.0f64..5.0) {
        let ens = generate_ensemble(400, &p, seed).unwrap();
        let f = |y: &[f64; 3]| (y[0] * 0.3).sin() / (1.0 + y[1] * y[1]);
        let g = |y: &[f64; 3]| (-y[2].abs()).exp();
        let h = |y: &[f64; 3]| a * f(y) + b * g(y);
        let lhs = lepage_integral(&ens, &h).unwrap();
        let rhs = a * lepage_integral(&ens, &f).unwrap() + b * lepage_integral(&ens, &g).unwrap();
        let tol = round_off(&lepage_terms(&ens, &|y: &[f64; 3]| a.abs() * f(y).abs() + b.abs() * g(y).abs()).unwrap());
        prop_assert!((lhs - rhs).abs() <= tol, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn measure_is_additive(p in params(), seed in any::<u64>(), axis in 0usize..3, cut in 0.05f64..0.95) {
        let ens = generate_ensemble(2000, &p, seed).unwrap();
        let whole = RegionSpec::cuboid([0.0; 3], [1.0; 3]).unwrap();
        let mut mid_hi = [1.0; 3];
        mid_hi[axis] = cut;
        let mut mid_lo = [0.0; 3];
        mid_lo[axis] = cut;
        let left = RegionSpec::cuboid([0.0; 3], mid_hi).unwrap();
        let right = RegionSpec::cuboid(mid_lo, [1.0; 3]).unwrap();
        let total = measure_of_set(&ens, &whole).unwrap();
        let parts = measure_of_set(&ens, &left).unwrap() + measure_of_set(&ens, &right).unwrap();
        // The cut plane has probability zero of holding a point.
        prop_assert!((total - parts).abs() <= round_off(&lepage_terms(&ens, &whole).unwrap()));
    }

    #[test]
    fn initial_conditions_and_odd_kernel(p in params(), seed in any::<u64>(), x in point(), t in 0.0f64..5.0) {
        let ens = generate_ensemble(300, &p, seed).unwrap();
        let s = WaveSeries::new(&ens, &p).unwrap();
        prop_assert_eq!(s.u(&x, 0.0), 0.0);
        prop_assert_eq!(s.v(&x, 0.0), 0.0);
        prop_assert_eq!(s.u(&[0.0; 3], t), 0.0);
        prop_assert_eq!(s.v(&[0.0; 3], t), 0.0);
    }

    #[test]
    fn sup_increments_never_grow(path in prop::collection::vec(-1e3f64..1e3, 257)) {
        let table = dyadic_sup_increments(&path, 1.0, 0, 8).unwrap();
        prop_assert!(table.sup_increments.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn holder_fit_is_exact_on_powers(gamma_index in 0usize..3, c in 0.1f64..10.0) {
        let gamma = [0.25, 0.5, 1.0][gamma_index];
        let levels: Vec<u32> = (2..=9).collect();
        let scales: Vec<f64> = levels.iter().map(|&n| 2f64.powi(-(n as i32))).collect();
        let table = IncrementTable {
            sup_increments: scales.iter().map(|h| c * h.powf(gamma)).collect(),
            levels,
            scales,
        };
        let r = estimate_holder(&table, false, 1.5).unwrap();
        prop_assert!((r.exponent - gamma).abs() < 1e-12);
    }

    #[test]
    fn ah_is_linear(p in params(), y in point(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        prop_assume!(y.iter().all(|v| v.abs() > 1e-3));
        let f = RegionSpec::cuboid([0.0, -0.5, 0.2], [1.0, 0.5, 0.9]).unwrap();
        let g = MollifiedBox { lower: [-1.0, 0.0, 0.0], upper: [0.3, 0.8, 1.2], width: 0.1 };
        let combo = Combination::new().with(a, f.clone()).with(b, g);
        let lhs = apply_ah(&combo, &y, &p).unwrap();
        let fa = apply_ah(&f, &y, &p).unwrap();
        let ga = apply_ah(&g, &y, &p).unwrap();
        prop_assert!((lhs - (a * fa + b * ga)).abs() <= 1e-12 * (a.abs() * fa.abs() + b.abs() * ga.abs()).max(1e-300));
    }

    #[test]
    fn ensembles_extend_by_prefix(p in params(), seed in any::<u64>(), k in 1usize..200) {
        let long = generate_ensemble(300, &p, seed).unwrap();
        let short = generate_ensemble(k, &p, seed).unwrap();
        let head = long.prefix(k).unwrap();
        prop_assert_eq!(head.gammas(), short.gammas());
        prop_assert_eq!(head.xis(), short.xis());
        prop_assert_eq!(head.gs(), short.gs());
    }

    #[test]
    fn ensemble_csv_round_trip(p in params(), seed in any::<u64>()) {
        let ens = generate_ensemble(50, &p, seed).unwrap();
        let mut buf = Vec::new();
        ens.write_csv(&mut buf).unwrap();
        let back = LePageEnsemble::read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back.gammas(), ens.gammas());
        prop_assert_eq!(back.xis(), ens.xis());
        prop_assert_eq!(back.gs(), ens.gs());
    }

    #[test]
    fn field_grid_csv_round_trip(p in params(), seed in any::<u64>(), counts in prop::array::uniform4(1usize..4)) {
        let ens = generate_ensemble(100, &p, seed).unwrap();
        let spec = GridSpec::new(counts, (-1.5, 2.0), (0.0, 2.0)).unwrap();
        let g = grid_field(&ens, &spec, &p).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        prop_assert_eq!(FieldGrid::read_csv(buf.as_slice()).unwrap(), g);
    }

    #[test]
    fn sidecar_reproduces_config(p in params(), seed in any::<u64>(), terms in 1usize..100_000, reps in 2usize..1000, vol in 0.01f64..10.0) {
        let mut c = RunConfig::defaults(Command::Isometry, "out");
        c.params = p;
        c.seed = seed;
        c.terms = terms;
        c.replicates = reps;
        c.volume = vol;
        let text = sidecar_json(&c, "artifact.csv");
        let mut back = RunConfig::defaults(Command::Isometry, "out");
        let pairs = parse_config_text(&text).unwrap();
        back.apply(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str()))).unwrap();
        prop_assert_eq!(back, c);
    }
}
