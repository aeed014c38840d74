//! Every example must run to completion.

macro_rules! example {
    ($name:ident) => {
        #[allow(dead_code)]
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", stringify!($name), ".rs"));
        }

        #[test]
        fn $name() {
            $name::run_example().unwrap();
        }
    };
}

example!(michaelis_menten);
example!(wright_fisher);
example!(lyapunov);
example!(flow_oracle);
example!(full_vs_reduced);
example!(ssa_logistic);
example!(competition_spread);
example!(custom_config);
