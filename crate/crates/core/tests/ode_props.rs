mod common;

use proptest::prelude::*;

use common::{point, quadratic_ode};
use kahan_darboux::ode::{jacobian_fd, parse_ode, QuadraticODE};
use kahan_darboux::poly::rational_to_f64;

fn ode_any_dim() -> impl Strategy<Value = QuadraticODE> {
    (1usize..=4).prop_flat_map(quadratic_ode)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn print_parse_round_trip(ode in ode_any_dim()) {
        let back = parse_ode(&ode.print()).unwrap();
        prop_assert_eq!(back.a(), ode.a());
        prop_assert_eq!(back.b(), ode.b());
        prop_assert_eq!(back.c(), ode.c());
        prop_assert_eq!(back.names(), ode.names());
    }

    #[test]
    fn quadratic_tensor_is_symmetric(ode in ode_any_dim()) {
        let a = ode.a();
        let n = ode.dim();
        for (i, ai) in a.iter().enumerate() {
            for j in 0..n {
                for k in 0..n {
                    prop_assert_eq!(&ai[j][k], &ai[k][j], "a[{}][{}][{}]", i, j, k);
                }
            }
        }
    }

    #[test]
    fn jacobian_matches_derivatives(ode in quadratic_ode(3), pts in prop::collection::vec(point(3), 10)) {
        let jm = ode.jacobian_matrix();
        let rhs = ode.rhs();
        for (i, row) in jm.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                prop_assert_eq!(e, &rhs[i].derivative(j));
            }
        }
        for x in pts {
            let xf: Vec<f64> = x.iter().map(rational_to_f64).collect();
            let fd = jacobian_fd(&ode, &xf, 1e-5);
            let mut full = xf.clone();
            full.push(0.0);
            for i in 0..3 {
                for j in 0..3 {
                    let exact = jm[i][j].eval_f64(&full);
                    let scale = exact.abs().max(1.0);
                    prop_assert!((fd[i][j] - exact).abs() / scale < 1e-6, "{} vs {}", fd[i][j], exact);
                }
            }
        }
    }
}
