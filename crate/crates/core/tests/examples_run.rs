macro_rules! example {
    ($name:ident, $path:literal) => {
        #[allow(dead_code)]
        #[path = $path]
        mod $name;

        #[test]
        fn $name() {
            $name::run().unwrap();
        }
    };
}

example!(sublevel_volume, "../examples/sublevel_volume.rs");
example!(nongauss_integrals, "../examples/nongauss_integrals.rs");
example!(identity_suite, "../examples/identity_suite.rs");
example!(moment_matrices, "../examples/moment_matrices.rs");
example!(min_volume_inner, "../examples/min_volume_inner.rs");
example!(min_volume_outer, "../examples/min_volume_outer.rs");
example!(kkt_contact, "../examples/kkt_contact.rs");
example!(polar_volume, "../examples/polar_volume.rs");
example!(gaussian_like, "../examples/gaussian_like.rs");
