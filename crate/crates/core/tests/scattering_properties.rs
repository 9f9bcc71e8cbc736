use geoscat::greens::{green_offdiagonal, resonator_quantities, GreensConfig};
use geoscat::scattering::{
    amplitudes, momenta, transfer_matrix_general, transfer_matrix_symmetric,
    transmission_amplitude_direct, CouplingParams,
};
use geoscat::spectral::{enumerate_modes, Junctions, ModeTable, Point, ResonatorGeometry};
use geoscat::{Complex64, Scatterer};
use proptest::prelude::*;

const CUTOFF: f64 = 4000.0;

fn setup(c1: f64, c2: f64, u: [f64; 4]) -> (ModeTable, Junctions) {
    let geom = ResonatorGeometry::rectangle(c1, c2).unwrap();
    let table = enumerate_modes(&geom, CUTOFF).unwrap();
    let p1 = Point::new(c1 * (0.05 + 0.9 * u[0]), c2 * (0.05 + 0.9 * u[1]));
    let p2 = Point::new(c1 * (0.05 + 0.9 * u[2]), c2 * (0.05 + 0.9 * u[3]));
    (table, Junctions::new(&geom, p1, p2).unwrap())
}

fn unit() -> impl Strategy<Value = f64> {
    0.0f64..1.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn green_is_symmetric_in_its_points(c1 in 0.5f64..3.0, c2 in 0.5f64..3.0,
                                        u in prop::array::uniform4(unit()), lambda in -50.0f64..300.0) {
        let (table, j) = setup(c1, c2, u);
        prop_assume!(j.first != j.second);
        let a = green_offdiagonal(&table, j.first, j.second, lambda);
        let b = green_offdiagonal(&table, j.second, j.first, lambda);
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
        }
    }

    #[test]
    fn below_the_spectrum_every_denominator_is_positive(c1 in 0.5f64..3.0, c2 in 0.5f64..3.0, gap in 1e-3f64..100.0) {
        let geom = ResonatorGeometry::rectangle(c1, c2).unwrap();
        let table = enumerate_modes(&geom, 2000.0).unwrap();
        let lambda = table.modes()[0].eigenvalue - gap;
        prop_assert!(table.eigenvalues().all(|e| e - lambda > 0.0));
    }

    #[test]
    fn flux_is_conserved(c1 in 0.5f64..3.0, c2 in 0.5f64..3.0, u in prop::array::uniform4(unit()),
                         lambda in 1.0f64..300.0, gate in 0.0f64..1.0,
                         a in prop::array::uniform2(-3.0f64..3.0), cmod in prop::array::uniform2(0.1f64..3.0),
                         phase in prop::array::uniform2(0.0f64..std::f64::consts::TAU), d in prop::array::uniform2(-3.0f64..3.0)) {
        let (table, j) = setup(c1, c2, u);
        let coupling = CouplingParams::general(
            a,
            [Complex64::from_polar(cmod[0], phase[0]), Complex64::from_polar(cmod[1], phase[1])],
            d,
        ).unwrap();
        let vg = 2.0 * lambda * gate;
        let Ok(s) = Scatterer::new(&table, &j, coupling, &GreensConfig::with_cutoff(CUTOFF)) else {
            return Err(TestCaseError::reject("singular point"));
        };
        let Ok(sample) = s.sample(lambda, vg) else { return Err(TestCaseError::reject("singular point")) };
        let lhs = sample.k1 * (1.0 - sample.r.norm_sqr());
        let rhs = sample.k2 * sample.t.norm_sqr();
        prop_assert!((lhs - rhs).abs() <= 1e-8 * sample.k1.max(lhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn general_determinant_is_the_coupling_phase(c1 in 0.5f64..3.0, c2 in 0.5f64..3.0, u in prop::array::uniform4(unit()),
                                                 lambda in 1.0f64..300.0, phase in prop::array::uniform2(0.0f64..std::f64::consts::TAU),
                                                 a in prop::array::uniform2(-3.0f64..3.0)) {
        let (table, j) = setup(c1, c2, u);
        let cs = [Complex64::from_polar(0.7, phase[0]), Complex64::from_polar(1.9, phase[1])];
        let coupling = CouplingParams::general(a, cs, [0.3, -0.4]).unwrap();
        let Ok(q) = resonator_quantities(&table, &j, lambda, coupling.d, &GreensConfig::with_cutoff(CUTOFF)) else {
            return Err(TestCaseError::reject("singular point"));
        };
        let Ok(l) = transfer_matrix_general(&q, &coupling) else { return Err(TestCaseError::reject("singular point")) };
        let expected = cs[1].conj() * cs[0] / (cs[0].conj() * cs[1]);
        prop_assert!((l.det() - expected).norm() < 1e-8 * (1.0 + l.entries.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>()));
    }

    #[test]
    fn matrix_and_closed_form_amplitudes_agree(c1 in 0.5f64..3.0, c2 in 0.5f64..3.0, u in prop::array::uniform4(unit()),
                                               lambda in 1.0f64..300.0, gate in 0.0f64..1.0,
                                               a in -3.0f64..3.0, c in 0.1f64..3.0, d in -3.0f64..3.0) {
        let (table, j) = setup(c1, c2, u);
        let Ok(q) = resonator_quantities(&table, &j, lambda, [d, d], &GreensConfig::with_cutoff(CUTOFF)) else {
            return Err(TestCaseError::reject("singular point"));
        };
        let k = momenta(lambda, 2.0 * lambda * gate).unwrap();
        let Ok(l) = transfer_matrix_symmetric(&q, a, c, d) else { return Err(TestCaseError::reject("singular point")) };
        let Ok(amp) = amplitudes(&l, k.k1, k.k2) else { return Err(TestCaseError::reject("singular point")) };
        let direct = transmission_amplitude_direct(&q, a, c, d, k.k1, k.k2);
        prop_assert!((amp.t - direct).norm() <= 1e-10 * (1.0 + direct.norm()), "{} vs {}", amp.t, direct);
    }

    #[test]
    fn symmetric_coupling_is_invariant_under_junction_swap(c1 in 0.5f64..3.0, c2 in 0.5f64..3.0,
                                                           u in prop::array::uniform4(unit()), lambda in 1.0f64..300.0,
                                                           a in -3.0f64..3.0, c in 0.1f64..3.0, d in -3.0f64..3.0) {
        let (table, j) = setup(c1, c2, u);
        let coupling = CouplingParams::symmetric(a, c, d).unwrap();
        let cfg = GreensConfig::with_cutoff(CUTOFF);
        let (Ok(s), Ok(t)) = (
            Scatterer::new(&table, &j, coupling, &cfg),
            Scatterer::new(&table, &j.swapped(), coupling, &cfg),
        ) else {
            return Err(TestCaseError::reject("singular point"));
        };
        let (Ok(x), Ok(y)) = (s.transmission(lambda, 0.0), t.transmission(lambda, 0.0)) else { return Err(TestCaseError::reject("singular point")) };
        prop_assert!((x - y).abs() <= 1e-10, "{x} vs {y}");
    }
}

#[test]
fn scaled_and_matrix_paths_agree_on_the_natural_preset() {
    let (table, j) = setup(2.0, 1.0, [0.1, 0.1, 0.9, 0.9]);
    let coupling = CouplingParams::natural(0.05).unwrap();
    let cfg = GreensConfig::with_cutoff(CUTOFF);
    let s = Scatterer::new(&table, &j, coupling, &cfg).unwrap();
    for i in 0..200 {
        let lambda = 1.0 + i as f64 * 0.997;
        let Ok(fast) = s.transmission(lambda, 0.0) else {
            continue;
        };
        let slow =
            geoscat::scattering::transmission_probability(&table, &j, &coupling, lambda, 0.0, &cfg)
                .unwrap();
        assert!((fast - slow).abs() < 1e-10, "{lambda}: {fast} vs {slow}");
    }
}
