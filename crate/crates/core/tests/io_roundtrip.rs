//! Printing then parsing gives back the same net and states.

use rpnkit::generate::{random_net, random_state, rng, GenParams, Labels};
use rpnkit::io::{parse, print_file, print_net, NamedState, RpnFile};

#[test]
fn random_files_round_trip() {
    let params = GenParams { labels: Labels::Some, ..GenParams::default() };
    let mut r = rng(42);
    for i in 0..100 {
        let net = random_net(&mut r, &params);
        let states = (0..3).map(|k| NamedState::anonymous(format!("s{k}"), random_state(&mut r, &net, 4, 3))).collect();
        let file = RpnFile { net, states, targets: Vec::new() };
        let text = print_file(&file);
        let back = parse(&text).unwrap_or_else(|e| panic!("net {i}: {e}\n{text}"));
        assert_eq!(print_file(&back), text, "net {i}");
        assert_eq!(print_net(&back.net), print_net(&file.net));
        for (a, b) in file.states.iter().zip(&back.states) {
            assert_eq!(a.state, b.state, "net {i}");
        }
    }
}

#[test]
fn fixture_files_are_canonical_up_to_comments() {
    let dir = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    for name in ["fig1", "fig3", "fig4", "fig5", "rooted", "hat", "forkjoin"] {
        let text = std::fs::read_to_string(dir.join(format!("{name}.rpn"))).unwrap();
        let file = parse(&text).unwrap();
        let printed = print_file(&file);
        assert_eq!(parse(&printed).unwrap(), file, "{name}");
        assert_eq!(print_file(&parse(&printed).unwrap()), printed, "{name}");
    }
}
