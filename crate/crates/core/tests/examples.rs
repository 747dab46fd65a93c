//! Every example in `examples/` runs to completion.

macro_rules! example {
    ($module:ident, $file:literal) => {
        #[path = $file]
        mod $module;

        #[test]
        fn $module() {
            $module::run_example().expect(concat!($file, " should run"));
        }
    };
}

example!(features, "../examples/features.rs");
example!(ridge, "../examples/ridge.rs");
example!(forecast_lorenz, "../examples/forecast_lorenz.rs");
example!(forecast_double_scroll, "../examples/forecast_double_scroll.rs");
example!(infer_lorenz, "../examples/infer_lorenz.rs");
example!(noisy_lorenz, "../examples/noisy_lorenz.rs");
example!(training_size_sweep, "../examples/training_size_sweep.rs");
example!(return_map, "../examples/return_map.rs");
example!(complexity, "../examples/complexity.rs");
example!(baseline_reservoir, "../examples/baseline_reservoir.rs");
example!(model_roundtrip, "../examples/model_roundtrip.rs");
example!(experiment_config, "../examples/experiment_config.rs");
