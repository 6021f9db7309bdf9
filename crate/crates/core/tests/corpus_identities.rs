use szego_core::conservation::identity_suite;
use szego_core::corpus;
use szego_core::hankel::{self, alternation_check, interlacement_check};
use szego_core::inverse::roundtrip;

#[test]
fn random_v4_v6_identities_and_roundtrips() {
    let samples = corpus::corpus(11, &[4, 6], 6).unwrap();
    for (i, s) in samples.iter().enumerate() {
        let rep = identity_suite(&s.u, &[]).unwrap();
        assert!(rep.max() < 1e-8, "sample {i}: {rep:?}");
        let rt = roundtrip(&s.u).unwrap();
        assert!(rt < 1e-7, "sample {i}: roundtrip {rt}");
        let sd = hankel::spectrum(&s.u).unwrap();
        assert!(interlacement_check(&sd).0);
        assert!(alternation_check(&sd));
        assert!(hankel::norm_formula_check(&s.u, &sd).unwrap() < 1e-8);
    }
}

#[test]
fn odd_classes_are_generic_too() {
    for s in corpus::corpus(5, &[3, 5], 3).unwrap() {
        let sd = hankel::spectrum(&s.u).unwrap();
        assert_eq!(sd.rank_h() + sd.rank_k(), s.rational.class_d());
        assert!(roundtrip(&s.u).unwrap() < 1e-7);
        assert!(identity_suite(&s.u, &[]).unwrap().max() < 1e-8);
    }
}
