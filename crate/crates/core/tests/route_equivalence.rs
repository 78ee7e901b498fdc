mod common;

use omit_core::rel_diff;
use omit_core::sidebands::closed::{first_order_closed_block, first_order_closed_form, second_order_closed_form};
use omit_core::sidebands::{solve_first_order_linear, solve_second_order};
use omit_core::steady::solve_steady_state;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn closed_forms_match_direct_solve(d in common::two_mode_draw()) {
        let s = solve_steady_state(&d.config).unwrap();
        let direct = solve_first_order_linear(&d.config, &s, d.omega).unwrap();
        let closed = first_order_closed_form(&d.config, &s, d.omega).unwrap();
        prop_assert!(rel_diff(closed, direct.a_minus) < 1e-10);

        let second = solve_second_order(&d.config, &s, &direct, d.omega).unwrap();
        let closed2 = second_order_closed_form(&d.config, &s, d.omega).unwrap();
        prop_assert!(rel_diff(closed2, second.block.a_minus) < 1e-9);
        prop_assert!(second.route_discrepancy() < 1e-9);
    }

    #[test]
    fn closed_block_matches_every_component(d in common::two_mode_draw()) {
        let s = solve_steady_state(&d.config).unwrap();
        let direct = solve_first_order_linear(&d.config, &s, d.omega).unwrap();
        let closed = first_order_closed_block(&d.config, &s, d.omega).unwrap();
        let scale = direct.a_minus.norm().max(direct.a_plus_conj.norm());
        prop_assert!((closed.a_plus_conj - direct.a_plus_conj).norm() <= 1e-10 * scale);
        for l in 0..2 {
            prop_assert!(rel_diff(closed.b_minus[l], direct.b_minus[l]) < 1e-10);
            prop_assert!(rel_diff(closed.b_plus_conj[l], direct.b_plus_conj[l]) < 1e-10);
        }
    }
}
