use dirac_inverse::accelerant::Accelerant;
use dirac_inverse::direct::{Potential, SPotential, SpectralData, SpectralDatum, SpectralWindow};
use dirac_inverse::io::{
    read_accelerant, read_potential, read_s_potential, read_spectral_data, read_unitary, write_accelerant,
    write_potential, write_s_potential, write_spectral_data, write_unitary, PotentialFile,
};
use dirac_inverse::matcore::ComplexMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn any_float() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e3f64..1e3,
        prop::num::f64::NORMAL,
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
    ]
}

fn matrix(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((any_float(), any_float()), n * n)
        .prop_map(move |v| ComplexMatrix::from_iterator(n, n, v.into_iter().map(|(a, b)| Complex64::new(a, b))))
}

fn bits(m: &ComplexMatrix) -> Vec<(u64, u64)> {
    m.iter().map(|z| (z.re.to_bits(), z.im.to_bits())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn potential_files_round_trip_bit_exactly(samples in prop::collection::vec(matrix(2), 5)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.json");
        let q = Potential::new(samples).unwrap();
        write_potential(&path, &q).unwrap();
        let back = read_potential(&path).unwrap();
        for (a, b) in q.samples().iter().zip(back.samples()) {
            prop_assert_eq!(bits(a), bits(b));
        }
    }

    #[test]
    fn unitary_and_accelerant_files_round_trip(u in matrix(4), h in prop::collection::vec(matrix(2), 7), right in matrix(2)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("U.json");
        write_unitary(&path, &u).unwrap();
        prop_assert_eq!(bits(&read_unitary(&path).unwrap()), bits(&u));

        let mut acc = Accelerant::new(3, h).unwrap();
        acc.right_limit = Some(right);
        let path = dir.path().join("H.json");
        write_accelerant(&path, &acc).unwrap();
        let back = read_accelerant(&path).unwrap();
        prop_assert_eq!(back.n, 3);
        for (a, b) in acc.samples.iter().zip(&back.samples) {
            prop_assert_eq!(bits(a), bits(b));
        }
        prop_assert_eq!(bits(back.right_limit.as_ref().unwrap()), bits(acc.right_limit.as_ref().unwrap()));
    }

    #[test]
    fn spectral_data_files_round_trip(lambdas in prop::collection::btree_set(-1000i64..1000, 1..8), a in matrix(2)) {
        let dir = tempfile::tempdir().unwrap();
        let data: Vec<SpectralDatum> = lambdas
            .iter()
            .map(|&l| SpectralDatum { lambda: l as f64 * 0.1 + 1e-9, a: a.clone(), mult: 1 })
            .collect();
        let sd = SpectralData::new(1, None, data, SpectralWindow { lo: -101.0, hi: 101.0 }).unwrap();
        let path = dir.path().join("sd.json");
        write_spectral_data(&path, &sd).unwrap();
        prop_assert_eq!(read_spectral_data(&path).unwrap(), sd);
    }
}

#[test]
fn documented_layout_is_used() {
    let q = Potential::constant(ComplexMatrix::from_element(1, 1, Complex64::new(0.5, -0.25)), 2).unwrap();
    let text = serde_json::to_string(&PotentialFile::from_potential(&q)).unwrap();
    assert_eq!(
        text,
        r#"{"r":1,"grid_n":2,"domain":[-1.0,1.0],"q":[[[[0.5,-0.25]]],[[[0.5,-0.25]]],[[[0.5,-0.25]]]]}"#
    );
}

#[test]
fn auxiliary_potentials_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let v = SPotential::from_fn(4, |x| ComplexMatrix::from_element(2, 2, Complex64::new(x / 3.0, 1.0 / 7.0))).unwrap();
    let path = dir.path().join("V.json");
    write_s_potential(&path, &v).unwrap();
    assert_eq!(read_s_potential(&path).unwrap(), v);
}

#[test]
fn malformed_documents_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"r":1,"grid_n":4,"domain":[-1,1],"q":[[[[0,0]]]]}"#).unwrap();
    assert_eq!(read_potential(&path).unwrap_err().kind(), "InvalidInput");
    std::fs::write(&path, "not json").unwrap();
    assert_eq!(read_potential(&path).unwrap_err().kind(), "Json");
    assert_eq!(read_potential(&dir.path().join("missing.json")).unwrap_err().kind(), "Io");
}
