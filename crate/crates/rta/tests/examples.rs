macro_rules! example {
    ($module:ident, $file:literal) => {
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }

        #[test]
        fn $module() {
            $module::run_example().expect(concat!($file, " should run"));
        }
    };
}

example!(pbw_confluence, "pbw_confluence.rs");
example!(gram_diagonal, "gram_diagonal.rs");
example!(verma_blocks, "verma_blocks.rs");
example!(casimir, "casimir.rs");
example!(polyexp, "polyexp.rs");
example!(rtm_cocycles, "rtm_cocycles.rs");
example!(rtm_algebra, "rtm_algebra.rs");
example!(classical_limit, "classical_limit.rs");
example!(spec_report, "spec_report.rs");
