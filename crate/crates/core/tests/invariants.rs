use heomflux_core::bath::pade_decompose;
use heomflux_core::hierarchy::propagate::Propagator;
use heomflux_core::hierarchy::{HeomOperator, HierarchyConfig};
use heomflux_core::system::hermiticity_deviation;
use heomflux_core::{BathSpec, CMatrix, Complex64, SystemModel};
use proptest::prelude::*;

fn hermitian(d: usize, x: &[f64]) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    let mut it = x.iter().copied().cycle();
    for i in 0..d {
        m[(i, i)] = Complex64::new(it.next().unwrap(), 0.0);
        for j in i + 1..d {
            let z = Complex64::new(it.next().unwrap(), it.next().unwrap());
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// Random density matrix A A† / Tr(A A†).
fn density(d: usize, x: &[f64]) -> CMatrix {
    let mut it = x.iter().copied().cycle();
    let a = CMatrix::from_fn(d, d, |_, _| {
        Complex64::new(it.next().unwrap(), it.next().unwrap())
    });
    let m = &a * a.adjoint();
    let tr = m.trace();
    m / tr
}

#[derive(Debug)]
struct Case {
    op: HeomOperator,
    rho: CMatrix,
}

fn case() -> impl Strategy<Value = Case> {
    (
        2usize..4,
        prop::collection::vec(-1.0f64..1.0, 48),
        prop::collection::vec((0.01f64..0.5, 0.5f64..4.0, 0.3f64..5.0, 0usize..3), 1..3),
        1usize..4,
    )
        .prop_filter_map("decomposable", |(d, x, baths, depth)| {
            let h = hermitian(d, &x[..16]);
            let couplings: Vec<CMatrix> = (0..baths.len())
                .map(|k| hermitian(d, &x[16 + 8 * k..]))
                .collect();
            let decs = baths
                .iter()
                .map(|&(eta, gamma, t, j)| {
                    pade_decompose(&BathSpec::new(eta, gamma, t, j).ok()?).ok()
                })
                .collect::<Option<Vec<_>>>()?;
            let model = SystemModel::new(h, None, couplings).ok()?;
            let op = HeomOperator::new(model, decs, &HierarchyConfig::new(depth)).ok()?;
            Some(Case {
                op,
                rho: density(d, &x[32..]),
            })
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reduced_trace_is_conserved_by_any_state(c in case(), seed in prop::collection::vec(-1.0f64..1.0, 64)) {
        let mut x = c.op.maximally_mixed();
        for (z, s) in x.data_mut().iter_mut().zip(seed.iter().cycle().zip(seed.iter().rev().cycle())) {
            *z = Complex64::new(*s.0, *s.1);
        }
        let d = c.op.dim();
        let rhs = c.op.heom_rhs(&x, 0.0);
        let tr: Complex64 = (0..d).map(|i| rhs.data()[i * d + i]).sum();
        prop_assert!(tr.norm() < 1e-12 * rhs.data().iter().map(|z| z.norm()).fold(1.0, f64::max));
    }

    #[test]
    fn physical_states_stay_hermitian_and_normalized(c in case()) {
        let mut x = c.op.initial_state(&c.rho).unwrap();
        let mut prop = Propagator::new(&c.op);
        let dt = heomflux_core::hierarchy::propagate::stable_dt(&c.op, 0.01);
        for _ in 0..40 {
            prop.step(&mut x, dt).unwrap();
        }
        let rho = x.snapshot().rho0;
        prop_assert!((rho.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        prop_assert!(hermiticity_deviation(&rho) < 1e-12);
    }

    #[test]
    fn right_hand_side_is_linear(c in case(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let x = c.op.initial_state(&c.rho).unwrap();
        let mut y = c.op.maximally_mixed();
        let n = y.data().len();
        for (i, z) in y.data_mut().iter_mut().enumerate() {
            *z += Complex64::new((i as f64 / n as f64).sin(), (i as f64).cos() * 0.1);
        }
        let mut comb = x.clone();
        for (z, (p, q)) in comb.data_mut().iter_mut().zip(x.data().iter().zip(y.data())) {
            *z = p * a + q * b;
        }
        let (rx, ry, rc) = (c.op.heom_rhs(&x, 0.0), c.op.heom_rhs(&y, 0.0), c.op.heom_rhs(&comb, 0.0));
        let scale = rc.data().iter().chain(rx.data()).chain(ry.data()).map(|z| z.norm()).fold(1.0, f64::max);
        for ((p, q), r) in rx.data().iter().zip(ry.data()).zip(rc.data()) {
            prop_assert!((p * a + q * b - r).norm() < 1e-12 * scale * (1.0 + a.abs() + b.abs()));
        }
    }
}
