// Runs every cargo example once so that they stay working.

macro_rules! example {
    ($name:ident) => {
        mod $name {
            include!(concat!("../examples/", stringify!($name), ".rs"));

            #[test]
            fn runs() {
                main();
            }
        }
    };
}

example!(hermiticity);
example!(krylov_vs_dense);
example!(ground_state);
example!(jump_rates);
example!(locality);
example!(master_equation);
example!(flux_balance);
example!(single_trajectory);
example!(equivariance);
example!(time_reversal);
example!(snapshots);
example!(run_config);
example!(cutoff_sweep);
